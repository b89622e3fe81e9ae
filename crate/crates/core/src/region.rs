//! Regions of an LTS: the abstract counterpart of a Petri net place.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lts::{Edge, Lts};

/// A region `(sup, con, pro)`: token count per state, consume/produce per event.
///
/// Vectors are indexed by the state and event indices of the host [`Lts`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub sup: Vec<BigInt>,
    pub con: Vec<BigInt>,
    pub pro: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("expected {expected} values for {what}, got {got}")]
    Arity {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("negative {what} value {value} for {id}")]
    NegativeValue {
        what: &'static str,
        id: String,
        value: BigInt,
    },
    #[error("inconsistent support at {state}: {first} vs {second}")]
    InconsistentSupport {
        state: String,
        first: BigInt,
        second: BigInt,
    },
    #[error("negative support {value} at {state}")]
    NegativeSupport { state: String, value: BigInt },
    #[error("con({event})={con} exceeds sup({state})={sup}")]
    ConExceedsSupport {
        state: String,
        event: String,
        con: BigInt,
        sup: BigInt,
    },
}

/// The first edge (in canonical order) at which a candidate fails the region axioms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("malformed candidate: {0}")]
    Malformed(RegionError),
    #[error("con({1}) exceeds sup({0}) at edge {0} {1} {2}")]
    NotEnabled(String, String, String),
    #[error("support update fails at edge {0} {1} {2}")]
    Update(String, String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("path is disconnected at step {0}")]
    Disconnected(usize),
    #[error("step {0} is not an edge of the LTS")]
    UnknownEdge(usize),
    #[error("support at the path end differs from the computed sum; not a region")]
    NotARegion,
}

impl Region {
    pub fn effect(&self, event: usize) -> BigInt {
        &self.pro[event] - &self.con[event]
    }

    /// The all-zero region of `lts`.
    pub fn zero(lts: &Lts) -> Region {
        Region {
            sup: vec![BigInt::zero(); lts.num_states()],
            con: vec![BigInt::zero(); lts.num_events()],
            pro: vec![BigInt::zero(); lts.num_events()],
        }
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: &BigInt) -> Region {
        let mul = |v: &Vec<BigInt>| v.iter().map(|x| x * factor).collect();
        Region {
            sup: mul(&self.sup),
            con: mul(&self.con),
            pro: mul(&self.pro),
        }
    }

    /// Expands a region from `sup(ι)` and per-event `(con, pro)` given by name.
    pub fn expand_with<F>(lts: &Lts, sup_init: impl Into<BigInt>, flows: F) -> Result<Region, RegionError>
    where
        F: Fn(&str) -> (u64, u64),
    {
        let (con, pro): (Vec<BigInt>, Vec<BigInt>) = lts
            .event_names()
            .map(|e| {
                let (c, p) = flows(e);
                (BigInt::from(c), BigInt::from(p))
            })
            .unzip();
        expand_region(lts, sup_init.into(), con, pro)
    }

    /// Events grouped by equal `(con, pro)` behaviour.
    pub fn groups(&self) -> BTreeMap<(BigInt, BigInt), Vec<usize>> {
        let mut out: BTreeMap<(BigInt, BigInt), Vec<usize>> = BTreeMap::new();
        for e in 0..self.con.len() {
            out.entry((self.con[e].clone(), self.pro[e].clone()))
                .or_default()
                .push(e);
        }
        out
    }

    /// `region sup(ι)=<k>; <event>:<con>/<pro> ...; sup: <state>=<k> ...`
    pub fn render(&self, lts: &Lts) -> String {
        let mut out = format!("region sup(ι)={};", self.sup[lts.initial()]);
        for e in 0..lts.num_events() {
            let _ = write!(out, " {}:{}/{}", lts.event_name(e), self.con[e], self.pro[e]);
        }
        out.push_str("; sup:");
        for s in 0..lts.num_states() {
            let _ = write!(out, " {}={}", lts.state_name(s), self.sup[s]);
        }
        out
    }
}

fn check_flows(lts: &Lts, con: &[BigInt], pro: &[BigInt]) -> Result<(), RegionError> {
    for (what, v) in [("con", con), ("pro", pro)] {
        if v.len() != lts.num_events() {
            return Err(RegionError::Arity {
                what,
                expected: lts.num_events(),
                got: v.len(),
            });
        }
        if let Some(e) = v.iter().position(|x| x.is_negative()) {
            return Err(RegionError::NegativeValue {
                what,
                id: lts.event_name(e).to_string(),
                value: v[e].clone(),
            });
        }
    }
    Ok(())
}

/// Completes a region from its initial support and flows by propagating
/// `sup(s') = sup(s) - con(e) + pro(e)` along the breadth-first tree, then
/// checks every edge (join consistency, nonnegativity, enabling).
pub fn expand_region(
    lts: &Lts,
    sup_init: BigInt,
    con: Vec<BigInt>,
    pro: Vec<BigInt>,
) -> Result<Region, RegionError> {
    check_flows(lts, &con, &pro)?;
    let mut sup = vec![BigInt::zero(); lts.num_states()];
    sup[lts.initial()] = sup_init;
    for &s in &lts.bfs_order()[1..] {
        let e = lts.tree_edge(s).expect("non-initial state has a tree edge");
        sup[s] = &sup[e.src] - &con[e.event] + &pro[e.event];
    }
    for s in lts.bfs_order() {
        if sup[*s].is_negative() {
            return Err(RegionError::NegativeSupport {
                state: lts.state_name(*s).to_string(),
                value: sup[*s].clone(),
            });
        }
    }
    for e in lts.edges() {
        if con[e.event] > sup[e.src] {
            return Err(RegionError::ConExceedsSupport {
                state: lts.state_name(e.src).to_string(),
                event: lts.event_name(e.event).to_string(),
                con: con[e.event].clone(),
                sup: sup[e.src].clone(),
            });
        }
        let reached = &sup[e.src] - &con[e.event] + &pro[e.event];
        if reached != sup[e.dst] {
            return Err(RegionError::InconsistentSupport {
                state: lts.state_name(e.dst).to_string(),
                first: sup[e.dst].clone(),
                second: reached,
            });
        }
    }
    Ok(Region { sup, con, pro })
}

/// Checks both region axioms on every edge of `lts`.
pub fn is_region(lts: &Lts, candidate: &Region) -> Result<(), Violation> {
    check_flows(lts, &candidate.con, &candidate.pro).map_err(Violation::Malformed)?;
    if candidate.sup.len() != lts.num_states() {
        return Err(Violation::Malformed(RegionError::Arity {
            what: "sup",
            expected: lts.num_states(),
            got: candidate.sup.len(),
        }));
    }
    if let Some(s) = candidate.sup.iter().position(|x| x.is_negative()) {
        return Err(Violation::Malformed(RegionError::NegativeValue {
            what: "sup",
            id: lts.state_name(s).to_string(),
            value: candidate.sup[s].clone(),
        }));
    }
    let Region { sup, con, pro } = candidate;
    for e in lts.edges() {
        let names = || {
            (
                lts.state_name(e.src).to_string(),
                lts.event_name(e.event).to_string(),
                lts.state_name(e.dst).to_string(),
            )
        };
        if con[e.event] > sup[e.src] {
            let (a, b, c) = names();
            return Err(Violation::NotEnabled(a, b, c));
        }
        if &sup[e.src] - &con[e.event] + &pro[e.event] != sup[e.dst] {
            let (a, b, c) = names();
            return Err(Violation::Update(a, b, c));
        }
    }
    Ok(())
}

/// `sup(s_0) + Σ eff(e_i)` along `path`, cross-checked against `sup(s_n)`.
pub fn path_support(region: &Region, lts: &Lts, path: &[Edge]) -> Result<BigInt, PathError> {
    let Some(first) = path.first() else {
        return Ok(region.sup[lts.initial()].clone());
    };
    let mut total = region.sup[first.src].clone();
    for (i, e) in path.iter().enumerate() {
        if i > 0 && path[i - 1].dst != e.src {
            return Err(PathError::Disconnected(i));
        }
        if e.src >= lts.num_states()
            || e.event >= lts.num_events()
            || lts.succ(e.src, e.event) != Some(e.dst)
        {
            return Err(PathError::UnknownEdge(i));
        }
        total += region.effect(e.event);
    }
    if total != region.sup[path.last().unwrap().dst] {
        return Err(PathError::NotARegion);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn eight_token_region(a: &Lts) -> Region {
        Region::expand_with(a, 8u32, |e| match e {
            "v" => (5, 0),
            "w" => (7, 0),
            _ => (1, 0),
        })
        .unwrap()
    }

    fn sup_of(a: &Lts, r: &Region, s: &str) -> BigInt {
        r.sup[a.state_index(s).unwrap()].clone()
    }

    #[test]
    fn expands_the_embedding_region() {
        let a = fixtures::running();
        let r = eight_token_region(&a);
        assert_eq!(sup_of(&a, &r, "bot"), BigInt::from(8));
        for i in 0..4 {
            assert_eq!(sup_of(&a, &r, &format!("s{i}")), BigInt::from(7 - i));
        }
        for (s, v) in [("t0", 3), ("t1", 2), ("q0", 1), ("q1", 0)] {
            assert_eq!(sup_of(&a, &r, s), BigInt::from(v));
        }
        assert_eq!(is_region(&a, &r), Ok(()));
    }

    #[test]
    fn zero_region_is_a_region() {
        let a = fixtures::running();
        let z = Region::expand_with(&a, 0u32, |_| (0, 0)).unwrap();
        assert_eq!(z, Region::zero(&a));
        assert_eq!(is_region(&a, &z), Ok(()));
    }

    #[test]
    fn expands_the_state_removal_region() {
        let b = fixtures::without_s3();
        let r = Region::expand_with(&b, 2u32, |e| match e {
            "x" => (2, 1),
            "a" | "y" => (1, 0),
            _ => (0, 0),
        })
        .unwrap();
        for s in ["s1", "t1", "q1"] {
            assert_eq!(sup_of(&b, &r, s), BigInt::from(1));
        }
    }

    #[test]
    fn expansion_errors() {
        let a = fixtures::running();
        // x consumes more than s1 provides
        let err = Region::expand_with(&a, 8u32, |e| if e == "x" { (8, 0) } else { (0, 0) })
            .unwrap_err();
        assert!(matches!(err, RegionError::NegativeSupport { .. }), "{err:?}");
        // join at t1: x and a disagree
        let err = Region::expand_with(&a, 5u32, |e| if e == "x" { (1, 0) } else { (0, 0) })
            .unwrap_err();
        assert!(matches!(err, RegionError::InconsistentSupport { .. }), "{err:?}");
        // con exceeds support without making anything negative
        let err = Region::expand_with(&a, 1u32, |e| match e {
            "u" => (2, 2),
            _ => (0, 0),
        })
        .unwrap_err();
        assert!(matches!(err, RegionError::ConExceedsSupport { .. }), "{err:?}");
    }

    #[test]
    fn tampered_support_is_rejected_at_the_right_edge() {
        let a = fixtures::running();
        let mut r = eight_token_region(&a);
        r.sup[a.state_index("t1").unwrap()] = BigInt::from(3);
        assert_eq!(
            is_region(&a, &r),
            Err(Violation::Update("t0".into(), "a".into(), "t1".into()))
        );
    }

    #[test]
    fn path_support_sums_effects() {
        let a = fixtures::running();
        let r = eight_token_region(&a);
        let path = a.path_to(a.state_index("s3").unwrap());
        assert_eq!(path.len(), 4);
        assert_eq!(path_support(&r, &a, &path), Ok(BigInt::from(4)));
        assert_eq!(path_support(&r, &a, &[]), Ok(BigInt::from(8)));

        let b = fixtures::without_s3();
        let rb = Region::expand_with(&b, 2u32, |e| match e {
            "x" => (2, 1),
            "a" | "y" => (1, 0),
            _ => (0, 0),
        })
        .unwrap();
        let (bot, t0, t1) = (
            b.state_index("bot").unwrap(),
            b.state_index("t0").unwrap(),
            b.state_index("t1").unwrap(),
        );
        let v = b.event_index("v").unwrap();
        let ea = b.event_index("a").unwrap();
        let path = [
            Edge { src: bot, event: v, dst: t0 },
            Edge { src: t0, event: ea, dst: t1 },
        ];
        assert_eq!(path_support(&rb, &b, &path), Ok(BigInt::from(1)));
        let broken = [path[1], path[0]];
        assert_eq!(path_support(&rb, &b, &broken), Err(PathError::Disconnected(1)));
    }

    #[test]
    fn rendering_is_stable() {
        let a = fixtures::running();
        let r = eight_token_region(&a);
        assert_eq!(
            r.render(&a),
            "region sup(ι)=8; a:1/0 u:1/0 v:5/0 w:7/0 x:1/0 y:1/0; \
             sup: bot=8 q0=1 q1=0 s0=7 s1=6 s2=5 s3=4 t0=3 t1=2"
        );
    }
}

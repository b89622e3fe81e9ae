//! Hitting-set instances, an exhaustive hitting-set solver, and the gadget
//! constructions that reduce hitting set to the removal problems, together
//! with the maps between hitting sets and removals.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use thiserror::Error;

use crate::lts::{tokens, Lts, LtsError};
use crate::removal::{RemovalMode, RemovalSet};
use crate::repair::Target;

/// `(𝔘, M, λ)`. Sets hold universe indices in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingSetInstance {
    pub universe: Vec<String>,
    pub sets: Vec<Vec<usize>>,
    pub lambda: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HsError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error("universe has {0} elements; the exhaustive solver is limited to 20")]
    TooLarge(usize),
    #[error("set M{0} is empty, so no hitting set exists")]
    EmptySet(usize),
    #[error("{0}")]
    Invalid(String),
}

impl HittingSetInstance {
    /// Builds an instance from element names; sets are sorted by universe order.
    pub fn new<S: AsRef<str>>(universe: &[S], sets: &[Vec<S>], lambda: usize) -> Result<Self, String> {
        let universe: Vec<String> = universe.iter().map(|s| s.as_ref().to_string()).collect();
        let mut seen = HashSet::new();
        for x in &universe {
            if !seen.insert(x.as_str()) {
                return Err(format!("duplicate universe element {x}"));
            }
        }
        let mut out = Vec::with_capacity(sets.len());
        for set in sets {
            let mut idx = Vec::with_capacity(set.len());
            for x in set {
                let x = x.as_ref();
                let i = universe
                    .iter()
                    .position(|u| u == x)
                    .ok_or_else(|| format!("{x} is not in the universe"))?;
                if idx.contains(&i) {
                    return Err(format!("{x} occurs twice in a set"));
                }
                idx.push(i);
            }
            idx.sort_unstable();
            out.push(idx);
        }
        Ok(HittingSetInstance {
            universe,
            sets: out,
            lambda,
        })
    }

    pub fn is_hitting_set(&self, z: &[usize]) -> bool {
        self.sets.iter().all(|m| m.iter().any(|x| z.contains(x)))
    }

    pub fn names(&self, z: &[usize]) -> Vec<&str> {
        z.iter().map(|&i| self.universe[i].as_str()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("universe {}\n", self.universe.join(" "));
        for m in &self.sets {
            out.push_str(&format!("set {}\n", self.names(m).join(" ")));
        }
        out.push_str(&format!("lambda {}\n", self.lambda));
        out
    }
}

impl fmt::Display for HittingSetInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for HittingSetInstance {
    type Err = HsError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_hitting_set(text)
    }
}

/// Parses `universe X0 X1 ...`, then `set ...` lines, and `lambda <int>`.
pub fn parse_hitting_set(text: &str) -> Result<HittingSetInstance, HsError> {
    let mut universe: Option<Vec<String>> = None;
    let mut sets: Vec<Vec<String>> = Vec::new();
    let mut lambda = None;
    for (lineno, line) in text.lines().enumerate() {
        let syntax = |column: usize, message: String| HsError::Syntax {
            line: lineno + 1,
            column,
            message,
        };
        match tokens(line).as_slice() {
            [] => {}
            [(c, "universe"), rest @ ..] => {
                if universe.is_some() {
                    return Err(syntax(*c, "duplicate `universe` line".into()));
                }
                universe = Some(rest.iter().map(|(_, x)| x.to_string()).collect());
            }
            [(c, "set"), rest @ ..] => {
                if universe.is_none() {
                    return Err(syntax(*c, "`set` before `universe`".into()));
                }
                sets.push(rest.iter().map(|(_, x)| x.to_string()).collect());
            }
            [(c, "lambda"), (vc, v)] => {
                if lambda.is_some() {
                    return Err(syntax(*c, "duplicate `lambda` line".into()));
                }
                lambda = Some(
                    v.parse::<usize>()
                        .map_err(|_| syntax(*vc, "expected a nonnegative integer".into()))?,
                );
            }
            [(c, _), ..] => {
                return Err(syntax(*c, "expected `universe`, `set` or `lambda <int>`".into()))
            }
        }
    }
    let universe = universe.ok_or(HsError::Missing("universe"))?;
    let lambda = lambda.ok_or(HsError::Missing("lambda"))?;
    HittingSetInstance::new(&universe, &sets, lambda).map_err(HsError::Invalid)
}

/// A minimum hitting set, by increasing size and lexicographic subset order.
pub fn brute_force_min_hitting_set(h: &HittingSetInstance) -> Result<Vec<usize>, HsError> {
    if h.universe.len() > 20 {
        return Err(HsError::TooLarge(h.universe.len()));
    }
    if let Some(i) = h.sets.iter().position(|m| m.is_empty()) {
        return Err(HsError::EmptySet(i));
    }
    let n = h.universe.len();
    let masks: Vec<u32> = h
        .sets
        .iter()
        .map(|m| m.iter().fold(0, |acc, &x| acc | (1 << x)))
        .collect();
    for size in 0..=n {
        for z in (0..n).combinations(size) {
            let zm: u32 = z.iter().fold(0, |acc, &x| acc | (1 << x));
            if masks.iter().all(|m| m & zm != 0) {
                return Ok(z);
            }
        }
    }
    unreachable!("the whole universe hits every nonempty set")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReductionFamily {
    EdgeLangReal,
    EdgeEmb,
    EventAll,
    StateLangReal,
    StateEmb,
}

impl ReductionFamily {
    pub const ALL: [ReductionFamily; 5] = [
        ReductionFamily::EdgeLangReal,
        ReductionFamily::EdgeEmb,
        ReductionFamily::EventAll,
        ReductionFamily::StateLangReal,
        ReductionFamily::StateEmb,
    ];

    pub fn mode(self) -> RemovalMode {
        match self {
            ReductionFamily::EdgeLangReal | ReductionFamily::EdgeEmb => RemovalMode::Edge,
            ReductionFamily::EventAll => RemovalMode::Event,
            ReductionFamily::StateLangReal | ReductionFamily::StateEmb => RemovalMode::State,
        }
    }

    /// The relations whose removal problem the family reduces to.
    pub fn targets(self) -> &'static [Target] {
        match self {
            ReductionFamily::EdgeLangReal | ReductionFamily::StateLangReal => {
                &[Target::Language, Target::Realization]
            }
            ReductionFamily::EdgeEmb | ReductionFamily::StateEmb => &[Target::Embedding],
            ReductionFamily::EventAll => &[Target::Embedding, Target::Language, Target::Realization],
        }
    }
}

impl fmt::Display for ReductionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionFamily::EdgeLangReal => "edge-lang-real",
            ReductionFamily::EdgeEmb => "edge-emb",
            ReductionFamily::EventAll => "event",
            ReductionFamily::StateLangReal => "state-lang-real",
            ReductionFamily::StateEmb => "state-emb",
        })
    }
}

impl FromStr for ReductionFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReductionFamily::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| {
                format!("unknown family `{s}` (expected edge-lang-real, edge-emb, event, state-lang-real or state-emb)")
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("lambda {lambda} exceeds the universe size {n}")]
    LambdaTooLarge { lambda: usize, n: usize },
    #[error("set M{index} has {size} elements; the construction needs between 2 and |U|")]
    SetSize { index: usize, size: usize },
    #[error("universe element {0} collides with a gadget identifier")]
    NameClash(String),
    #[error("{0:?} is not a hitting set")]
    NotHittingSet(Vec<String>),
    #[error("{size} elements exceed the budget lambda={lambda}")]
    OverBudget { size: usize, lambda: usize },
    #[error("a {got} removal does not fit the {family} family")]
    WrongMode { family: ReductionFamily, got: RemovalMode },
    #[error("mapped set {0:?} is not a hitting set of size at most the removal")]
    BackwardFailed(Vec<String>),
    #[error(transparent)]
    Lts(#[from] LtsError),
}

pub const INITIAL: &str = "iota";

fn t3(i: usize, j: usize, k: usize) -> String {
    format!("t_{{{i},{j},{k}}}")
}

fn d3(i: usize, j: usize, k: usize) -> String {
    format!("d_{{{i},{j},{k}}}")
}

fn t2(i: usize, k: usize) -> String {
    format!("t_{{{i},{k}}}")
}

fn d2(i: usize, k: usize) -> String {
    format!("d_{{{i},{k}}}")
}

pub fn f_state(i: usize, k: usize) -> String {
    format!("f_{{{i},{k}}}")
}

fn sup(name: &str, i: usize, j: usize) -> String {
    format!("{name}_{{{i}}}^{{{j}}}")
}

fn sub(name: &str, i: usize) -> String {
    format!("{name}_{{{i}}}")
}

/// Gadget identifiers: `iota`, the event `a`, and anything shaped like
/// `t_{...}`, `a_{...}`, `u_{...}` and so on. Universe elements must avoid them.
fn is_reserved(x: &str) -> bool {
    x == INITIAL
        || x == "a"
        || ["t_{", "d_{", "f_{", "u_{", "v_{", "w_{", "a_{", "k_{"]
            .iter()
            .any(|p| x.starts_with(p))
}

/// Checks the generator preconditions: `λ ≤ |𝔘|` and `2 ≤ |M_i| ≤ |𝔘|`.
pub fn check_normal_form(h: &HittingSetInstance) -> Result<(), ReductionError> {
    let n = h.universe.len();
    if h.lambda > n {
        return Err(ReductionError::LambdaTooLarge { lambda: h.lambda, n });
    }
    for (index, m) in h.sets.iter().enumerate() {
        if m.len() < 2 || m.len() > n {
            return Err(ReductionError::SetSize { index, size: m.len() });
        }
    }
    Ok(())
}

/// The LTS `A` of `fam` for `h`, and the budget `κ = λ`.
pub fn generate_instance(
    h: &HittingSetInstance,
    fam: ReductionFamily,
) -> Result<(Lts, usize), ReductionError> {
    check_normal_form(h)?;
    if let Some(x) = h.universe.iter().find(|x| is_reserved(x)) {
        return Err(ReductionError::NameClash(x.clone()));
    }
    let kappa = h.lambda;
    let x = |i: usize| h.universe[i].clone();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mut edge = |a: String, e: String, b: String| edges.push((a, e, b));
    match fam {
        ReductionFamily::EdgeLangReal | ReductionFamily::StateLangReal => {
            for (i, m) in h.sets.iter().enumerate() {
                for j in 0..=kappa {
                    edge(INITIAL.into(), sup("u", i, j), t3(i, j, 0));
                    for (k, &xi) in m.iter().enumerate() {
                        edge(t3(i, j, k), x(xi), t3(i, j, k + 1));
                    }
                    edge(t3(i, j, m.len()), x(m[0]), t3(i, j, m.len() + 1));
                }
            }
            for i in 0..h.universe.len() {
                edge(INITIAL.into(), sub("v", i), f_state(i, 0));
                edge(f_state(i, 0), x(i), f_state(i, 1));
                for l in 0..=kappa {
                    edge(f_state(i, 0), sub("a", l), f_state(i, 1));
                }
            }
        }
        ReductionFamily::EdgeEmb | ReductionFamily::StateEmb => {
            for (i, m) in h.sets.iter().enumerate() {
                for j in 0..=kappa {
                    edge(INITIAL.into(), sup("u", i, j), t3(i, j, 0));
                    edge(t3(i, j, 0), sub("k", i), t3(i, j, 1));
                    for (k, &xi) in m.iter().enumerate() {
                        edge(t3(i, j, k + 1), x(xi), t3(i, j, k + 2));
                    }
                    edge(INITIAL.into(), sup("v", i, j), d3(i, j, 0));
                    for k in 0..m.len() {
                        edge(d3(i, j, k), "a".into(), d3(i, j, k + 1));
                    }
                    edge(d3(i, j, m.len()), sub("k", i), d3(i, j, 0));
                }
            }
            for i in 0..h.universe.len() {
                edge(INITIAL.into(), sub("w", i), f_state(i, 0));
                edge(f_state(i, 0), "a".into(), f_state(i, 1));
                edge(f_state(i, 0), x(i), f_state(i, 1));
            }
        }
        ReductionFamily::EventAll => {
            for (i, m) in h.sets.iter().enumerate() {
                let mi = m.len();
                edge(t2(i, 0), sub("k", i), t2(i, 1));
                for (k, &xi) in m.iter().enumerate() {
                    edge(t2(i, k + 1), x(xi), t2(i, k + 2));
                }
                edge(t2(i, mi + 1), sub("k", i), t2(i, mi + 2));
                for (k, &xi) in m.iter().enumerate() {
                    edge(d2(i, k), x(xi), d2(i, (k + 1) % mi));
                }
                for j in 0..=mi + 2 {
                    edge(INITIAL.into(), sup("u", i, j), t2(i, j));
                }
                for j in 0..mi {
                    edge(INITIAL.into(), sup("v", i, j), d2(i, j));
                }
            }
        }
    }
    Ok((Lts::from_edges(&fam.to_string(), INITIAL, edges)?, kappa))
}

fn check_hitting_set(h: &HittingSetInstance, z: &[usize]) -> Result<(), ReductionError> {
    if !h.is_hitting_set(z) {
        return Err(ReductionError::NotHittingSet(
            h.names(z).into_iter().map(String::from).collect(),
        ));
    }
    if z.len() > h.lambda {
        return Err(ReductionError::OverBudget {
            size: z.len(),
            lambda: h.lambda,
        });
    }
    Ok(())
}

/// The removal built from a hitting set `Z`: the `X_i`-edges of the
/// `F_i` gadgets (edge families), the events of `Z` (event family), or the
/// states `f_{i,1}` (state families).
pub fn removal_from_hitting_set(
    h: &HittingSetInstance,
    z: &[usize],
    fam: ReductionFamily,
) -> Result<RemovalSet, ReductionError> {
    check_hitting_set(h, z)?;
    Ok(match fam.mode() {
        RemovalMode::Edge => RemovalSet::edges(
            z.iter()
                .map(|&i| (f_state(i, 0), h.universe[i].clone(), f_state(i, 1))),
        ),
        RemovalMode::Event => RemovalSet::events(z.iter().map(|&i| h.universe[i].clone())),
        RemovalMode::State => RemovalSet::states(z.iter().map(|&i| f_state(i, 1))),
    })
}

/// The hitting set read off a removal of the generated LTS:
///
/// * edge families: `X_i` for every `F_i` gadget that lost an edge,
///   counting the connector edge into `f_{i,0}`;
/// * event family: `𝔘 ∩ 𝔈`, plus the first element of `M_i` for a removed
///   `k_i` whose set is not hit otherwise;
/// * state families: `X_i` for every `F_i` that lost a state.
///
/// The result is checked to be a hitting set no larger than the removal.
pub fn hitting_set_from_removal(
    h: &HittingSetInstance,
    removed: &RemovalSet,
    fam: ReductionFamily,
) -> Result<Vec<usize>, ReductionError> {
    let mut z: BTreeSet<usize> = BTreeSet::new();
    match (fam.mode(), removed) {
        (RemovalMode::Edge, RemovalSet::Edges(k)) => {
            for i in 0..h.universe.len() {
                let (f0, f1) = (f_state(i, 0), f_state(i, 1));
                if k.iter().any(|(a, _, b)| *a == f0 || *b == f0 || *b == f1) {
                    z.insert(i);
                }
            }
        }
        (RemovalMode::Event, RemovalSet::Events(e)) => {
            z.extend((0..h.universe.len()).filter(|&i| e.contains(&h.universe[i])));
            for (i, m) in h.sets.iter().enumerate() {
                if e.contains(&sub("k", i)) && !m.iter().any(|x| z.contains(x)) {
                    z.insert(m[0]);
                }
            }
        }
        (RemovalMode::State, RemovalSet::States(s)) => {
            for i in 0..h.universe.len() {
                if s.contains(&f_state(i, 0)) || s.contains(&f_state(i, 1)) {
                    z.insert(i);
                }
            }
        }
        (_, other) => {
            return Err(ReductionError::WrongMode {
                family: fam,
                got: other.mode(),
            })
        }
    }
    let z: Vec<usize> = z.into_iter().collect();
    if !h.is_hitting_set(&z) || z.len() > removed.len() {
        return Err(ReductionError::BackwardFailed(
            h.names(&z).into_iter().map(String::from).collect(),
        ));
    }
    Ok(z)
}

/// The instance of the hitting-set example with nine pairs over six
/// elements and budget 4.
pub fn example_nine_pairs() -> HittingSetInstance {
    let pairs = [(0, 1), (0, 3), (0, 5), (1, 2), (1, 5), (2, 3), (2, 4), (3, 4), (4, 5)];
    let universe: Vec<String> = (0..6).map(|i| format!("X{i}")).collect();
    let sets: Vec<Vec<String>> = pairs
        .iter()
        .map(|&(a, b)| vec![universe[a].clone(), universe[b].clone()])
        .collect();
    HittingSetInstance::new(&universe, &sets, 4).expect("well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::removal::apply_removal;
    use crate::separation::{check_property, CheckOptions, Property};

    fn tiny() -> HittingSetInstance {
        HittingSetInstance::new(&["X0", "X1"], &[vec!["X0", "X1"]], 1).unwrap()
    }

    #[test]
    fn example_instance_needs_four_elements() {
        let h = example_nine_pairs();
        let z = brute_force_min_hitting_set(&h).unwrap();
        assert_eq!(z.len(), 4);
        assert!(h.is_hitting_set(&z));
        assert!(h.is_hitting_set(&[0, 2, 3, 5]));
    }

    #[test]
    fn degenerate_hitting_sets() {
        let h = HittingSetInstance::new(&["X0"], &[vec!["X0"]], 1).unwrap();
        assert_eq!(brute_force_min_hitting_set(&h).unwrap(), vec![0]);
        assert_eq!(brute_force_min_hitting_set(&tiny()).unwrap(), vec![0]);
        let empty = HittingSetInstance::new(&["X0"], &[vec![]], 1).unwrap();
        assert_eq!(brute_force_min_hitting_set(&empty), Err(HsError::EmptySet(0)));
        let names: Vec<String> = (0..21).map(|i| format!("X{i}")).collect();
        let big = HittingSetInstance::new(&names, &[], 0).unwrap();
        assert_eq!(brute_force_min_hitting_set(&big), Err(HsError::TooLarge(21)));
    }

    #[test]
    fn hitting_set_text_round_trip() {
        let h = example_nine_pairs();
        let back: HittingSetInstance = h.to_text().parse().unwrap();
        assert_eq!(back, h);
        let h: HittingSetInstance = "universe A B C\nset C A\nlambda 1\n".parse().unwrap();
        assert_eq!(h.sets, vec![vec![0, 2]]);
        assert!(matches!(
            parse_hitting_set("set A\nuniverse A\nlambda 1\n"),
            Err(HsError::Syntax { line: 1, .. })
        ));
        assert_eq!(parse_hitting_set("universe A\n"), Err(HsError::Missing("lambda")));
    }

    #[test]
    fn example_instance_gadget_counts() {
        let (a, kappa) = generate_instance(&example_nine_pairs(), ReductionFamily::EdgeLangReal).unwrap();
        assert_eq!(kappa, 4);
        assert_eq!(a.num_states(), 193);
        assert_eq!(a.edges().len(), 222);
        assert_eq!(a.state_name(a.initial()), "iota");
        assert!(a.named_edges().any(|e| e == ("t_{0,3,2}", "X0", "t_{0,3,3}")));
        assert!(a.named_edges().any(|e| e == ("f_{5,0}", "a_{4}", "f_{5,1}")));
    }

    #[test]
    fn event_family_shapes() {
        let (a, kappa) = generate_instance(&tiny(), ReductionFamily::EventAll).unwrap();
        assert_eq!(kappa, 1);
        let count = |prefix: &str| a.state_names().filter(|s| s.starts_with(prefix)).count();
        assert_eq!(count("t_"), 5);
        assert_eq!(count("d_"), 2);
        let connectors = a.named_edges().filter(|(s, _, _)| *s == "iota").count();
        assert_eq!(connectors, 7);
    }

    #[test]
    fn every_family_generates_a_valid_system() {
        let h = HittingSetInstance::new(&["X0", "X1", "X2"], &[vec!["X0", "X1"], vec!["X1", "X2"]], 2).unwrap();
        for fam in ReductionFamily::ALL {
            let (a, _) = generate_instance(&h, fam).unwrap();
            let text = a.to_text();
            let back: Lts = text.parse().unwrap();
            assert_eq!(back, a);
        }
    }

    #[test]
    fn normal_form_is_enforced() {
        let h = HittingSetInstance::new(&["X0", "X1"], &[vec!["X0"]], 1).unwrap();
        assert!(matches!(
            generate_instance(&h, ReductionFamily::EdgeEmb),
            Err(ReductionError::SetSize { index: 0, size: 1 })
        ));
        let h = HittingSetInstance::new(&["X0", "X1"], &[vec!["X0", "X1"]], 3).unwrap();
        assert!(matches!(
            generate_instance(&h, ReductionFamily::EdgeEmb),
            Err(ReductionError::LambdaTooLarge { .. })
        ));
        let h = HittingSetInstance::new(&["a", "X1"], &[vec!["a", "X1"]], 1).unwrap();
        assert!(matches!(
            generate_instance(&h, ReductionFamily::EdgeEmb),
            Err(ReductionError::NameClash(_))
        ));
    }

    #[test]
    fn forward_edges_of_the_nine_pairs_instance() {
        let h = example_nine_pairs();
        let z = [0, 2, 3, 5];
        let k = removal_from_hitting_set(&h, &z, ReductionFamily::EdgeLangReal).unwrap();
        assert_eq!(
            k.to_text(),
            "remove edge f_{0,0} X0 f_{0,1}\nremove edge f_{2,0} X2 f_{2,1}\n\
             remove edge f_{3,0} X3 f_{3,1}\nremove edge f_{5,0} X5 f_{5,1}\n"
        );
        assert_eq!(hitting_set_from_removal(&h, &k, ReductionFamily::EdgeLangReal).unwrap(), z);
        assert!(matches!(
            removal_from_hitting_set(&h, &[0, 2], ReductionFamily::EdgeLangReal),
            Err(ReductionError::NotHittingSet(_))
        ));
    }

    #[test]
    fn tiny_event_instance_forward_map() {
        let h = tiny();
        let e = removal_from_hitting_set(&h, &[0], ReductionFamily::EventAll).unwrap();
        assert_eq!(e, RemovalSet::events(["X0"]));
        let (a, _) = generate_instance(&h, ReductionFamily::EventAll).unwrap();
        let b = apply_removal(&a, &e).unwrap();
        assert!(check_property(&b, Property::Both, &CheckOptions::default()).is_ok());
        assert!(check_property(&a, Property::Both, &CheckOptions::default()).is_err());
    }

    #[test]
    fn empty_family_maps_to_empty_removal() {
        let h = HittingSetInstance::new(&["X0", "X1"], &[] as &[Vec<&str>], 0).unwrap();
        for fam in ReductionFamily::ALL {
            let r = removal_from_hitting_set(&h, &[], fam).unwrap();
            assert!(r.is_empty());
            assert!(hitting_set_from_removal(&h, &r, fam).unwrap().is_empty());
        }
    }
}

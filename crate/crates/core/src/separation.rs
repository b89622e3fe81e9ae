//! Separation atoms and their exact solution by linear feasibility.
//!
//! A region is encoded by the variables `m0 = sup(ι)`, `con(e)`, `pro(e)`,
//! all nonnegative. The support of every state is a linear form in these
//! variables obtained along the breadth-first spanning tree; every chord of
//! the tree contributes an equality, every edge an enabling inequality and
//! every sink a nonnegativity constraint. An atom adds one strict
//! inequality written with slack 1, and [`crate::simplex::solve_cone`]
//! decides it exactly.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::exec::Executor;
use crate::lts::Lts;
use crate::region::{expand_region, Region};
use crate::simplex::solve_cone;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeparationAtom {
    /// Distinct states `(s, s')`, stored with `s < s'`.
    Ssa(usize, usize),
    /// Event `e` does not occur at state `s`.
    Essa { event: usize, state: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    Ssp,
    Essp,
    Both,
}

impl Property {
    fn wants_ssp(self) -> bool {
        matches!(self, Property::Ssp | Property::Both)
    }

    fn wants_essp(self) -> bool {
        matches!(self, Property::Essp | Property::Both)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Ssp => "ssp",
            Property::Essp => "essp",
            Property::Both => "both",
        })
    }
}

/// An atom identified by names, so it can be looked up in a different LTS.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedAtom {
    Ssa(Arc<str>, Arc<str>),
    Essa(Arc<str>, Arc<str>),
}

impl NamedAtom {
    pub fn resolve(&self, lts: &Lts) -> Option<SeparationAtom> {
        match self {
            NamedAtom::Ssa(a, b) => {
                let (a, b) = (lts.state_index(a)?, lts.state_index(b)?);
                Some(SeparationAtom::Ssa(a.min(b), a.max(b)))
            }
            NamedAtom::Essa(e, s) => {
                let (event, state) = (lts.event_index(e)?, lts.state_index(s)?);
                lts.succ(state, event)
                    .is_none()
                    .then_some(SeparationAtom::Essa { event, state })
            }
        }
    }
}

impl fmt::Display for NamedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedAtom::Ssa(a, b) => write!(f, "ssa {a} {b}"),
            NamedAtom::Essa(e, s) => write!(f, "essa {e} {s}"),
        }
    }
}

impl SeparationAtom {
    pub fn named(&self, lts: &Lts) -> NamedAtom {
        match *self {
            SeparationAtom::Ssa(a, b) => {
                NamedAtom::Ssa(lts.state_name(a).into(), lts.state_name(b).into())
            }
            SeparationAtom::Essa { event, state } => {
                NamedAtom::Essa(lts.event_name(event).into(), lts.state_name(state).into())
            }
        }
    }

    pub fn render(&self, lts: &Lts) -> String {
        self.named(lts).to_string()
    }
}

impl Region {
    /// Whether this region solves `atom`: distinct supports for an SSA,
    /// `sup(s) < con(e)` for an ESSA.
    pub fn solves(&self, atom: &SeparationAtom) -> bool {
        match *atom {
            SeparationAtom::Ssa(a, b) => self.sup[a] != self.sup[b],
            SeparationAtom::Essa { event, state } => self.sup[state] < self.con[event],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtomError {
    #[error("({0}, {0}) is not a states separation atom")]
    SameState(String),
    #[error("{event} occurs at {state}; ({event}, {state}) is not an event/state separation atom")]
    EventOccurs { event: String, state: String },
    #[error("atom refers to an index outside the LTS")]
    OutOfRange,
}

/// All atoms of `property` in canonical order: SSAs by `(s, s')`, then
/// ESSAs by `(event, state)`.
pub fn enumerate_atoms(lts: &Lts, property: Property) -> Vec<SeparationAtom> {
    let n = lts.num_states();
    let mut atoms = Vec::new();
    if property.wants_ssp() {
        for a in 0..n {
            for b in a + 1..n {
                atoms.push(SeparationAtom::Ssa(a, b));
            }
        }
    }
    if property.wants_essp() {
        for event in 0..lts.num_events() {
            for state in 0..n {
                if lts.succ(state, event).is_none() {
                    atoms.push(SeparationAtom::Essa { event, state });
                }
            }
        }
    }
    atoms
}

/// The homogeneous region constraints of one LTS, built once and shared by
/// every atom query.
pub struct RegionSystem<'a> {
    lts: &'a Lts,
    vars: usize,
    rows: Vec<Vec<i64>>,
    sup_forms: Vec<Vec<i64>>,
}

impl<'a> RegionSystem<'a> {
    pub fn new(lts: &'a Lts) -> Self {
        let k = lts.num_events();
        let vars = 1 + 2 * k;
        let con = |e: usize| 1 + e;
        let pro = |e: usize| 1 + k + e;
        let mut sup_forms = vec![vec![0i64; vars]; lts.num_states()];
        sup_forms[lts.initial()][0] = 1;
        for &s in &lts.bfs_order()[1..] {
            let e = lts.tree_edge(s).unwrap();
            let mut form = sup_forms[e.src].clone();
            form[con(e.event)] -= 1;
            form[pro(e.event)] += 1;
            sup_forms[s] = form;
        }
        let mut rows: Vec<Vec<i64>> = Vec::new();
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut push = |row: Vec<i64>| {
            if row.iter().any(|&v| v != 0) && seen.insert(row.clone()) {
                rows.push(row);
            }
        };
        for (i, e) in lts.edges().iter().enumerate() {
            // enabling: sup(src) - con(e) >= 0
            let mut enabling = sup_forms[e.src].clone();
            enabling[con(e.event)] -= 1;
            push(enabling);
            if !lts.is_tree_edge(i) {
                // chord: sup(src) - con(e) + pro(e) - sup(dst) = 0
                let mut chord = sup_forms[e.src].clone();
                chord[con(e.event)] -= 1;
                chord[pro(e.event)] += 1;
                for (c, d) in chord.iter_mut().zip(&sup_forms[e.dst]) {
                    *c -= d;
                }
                push(chord.iter().map(|v| -v).collect());
                push(chord);
            }
        }
        for s in 0..lts.num_states() {
            if lts.out_edges(s).is_empty() {
                push(sup_forms[s].clone());
            }
        }
        RegionSystem {
            lts,
            vars,
            rows,
            sup_forms,
        }
    }

    pub fn lts(&self) -> &Lts {
        self.lts
    }

    fn region_from(&self, x: Vec<BigInt>) -> Region {
        let k = self.lts.num_events();
        let m0 = x[0].clone();
        let con = x[1..=k].to_vec();
        let pro = x[1 + k..].to_vec();
        expand_region(self.lts, m0, con, pro)
            .expect("solutions of the region system are regions")
    }

    fn solve_target(&self, target: Vec<i64>) -> Option<Region> {
        solve_cone(self.vars, &self.rows, &target).map(|x| self.region_from(x))
    }

    fn difference(&self, a: usize, b: usize) -> Vec<i64> {
        self.sup_forms[a]
            .iter()
            .zip(&self.sup_forms[b])
            .map(|(x, y)| x - y)
            .collect()
    }

    /// Checks that `atom` is an atom of the system's LTS.
    pub fn validate(&self, atom: &SeparationAtom) -> Result<(), AtomError> {
        let n = self.lts.num_states();
        match *atom {
            SeparationAtom::Ssa(a, b) => {
                if a >= n || b >= n {
                    Err(AtomError::OutOfRange)
                } else if a == b {
                    Err(AtomError::SameState(self.lts.state_name(a).to_string()))
                } else {
                    Ok(())
                }
            }
            SeparationAtom::Essa { event, state } => {
                if state >= n || event >= self.lts.num_events() {
                    Err(AtomError::OutOfRange)
                } else if self.lts.succ(state, event).is_some() {
                    Err(AtomError::EventOccurs {
                        event: self.lts.event_name(event).to_string(),
                        state: self.lts.state_name(state).to_string(),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// A region solving `atom`, or `None` if the atom is unsolvable.
    ///
    /// SSAs try `sup(s) - sup(s') >= 1` before the reverse branch.
    pub fn solve(&self, atom: &SeparationAtom) -> Result<Option<Region>, AtomError> {
        self.validate(atom)?;
        Ok(match *atom {
            SeparationAtom::Ssa(a, b) => self
                .solve_target(self.difference(a, b))
                .or_else(|| self.solve_target(self.difference(b, a))),
            SeparationAtom::Essa { event, state } => {
                let mut target: Vec<i64> = self.sup_forms[state].iter().map(|v| -v).collect();
                target[1 + event] += 1;
                self.solve_target(target)
            }
        })
    }
}

/// Solves a single atom of `lts`.
pub fn solve_atom(lts: &Lts, atom: &SeparationAtom) -> Result<Option<Region>, AtomError> {
    RegionSystem::new(lts).solve(atom)
}

/// A set of regions together with, for each atom, the index of a region solving it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub regions: Vec<Region>,
    pub cover: Vec<(SeparationAtom, usize)>,
}

impl Witness {
    pub fn empty() -> Self {
        Witness {
            regions: Vec::new(),
            cover: Vec::new(),
        }
    }

    pub fn render(&self, lts: &Lts) -> String {
        let mut out = format!("witness regions={}\n", self.regions.len());
        for r in &self.regions {
            out.push_str(&r.render(lts));
            out.push('\n');
        }
        out
    }
}

/// Every unsolvable atom of a failed property check, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureReport {
    pub unsolvable: Vec<SeparationAtom>,
}

impl FailureReport {
    /// One `unsolvable ssa <s> <s'>` / `unsolvable essa <e> <s>` line per atom.
    pub fn render(&self, lts: &Lts) -> String {
        self.unsolvable
            .iter()
            .map(|a| format!("unsolvable {}\n", a.render(lts)))
            .collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    /// Reduce the witness: keep a greedy set cover of the regions found,
    /// then merge pairs of regions into positive combinations where possible.
    pub shrink: bool,
    pub executor: Executor,
}

/// Decides `property` for `lts`. On success every atom is covered by a
/// region of the witness; on failure all unsolvable atoms are listed.
///
/// Atoms are visited in canonical order; an atom already solved by a
/// previously found region is not sent to the solver. With a parallel
/// executor, uncovered atoms are solved in batches of `jobs` and merged in
/// canonical order, so the verdict and the unsolvable list do not depend on
/// the number of workers.
pub fn check_property(
    lts: &Lts,
    property: Property,
    options: &CheckOptions,
) -> Result<Witness, FailureReport> {
    let system = RegionSystem::new(lts);
    let atoms = enumerate_atoms(lts, property);
    let mut covered = vec![false; atoms.len()];
    let mut regions: Vec<Region> = Vec::new();
    let mut unsolvable = Vec::new();
    let batch = options.executor.jobs().max(1);
    let mut next = 0;
    while next < atoms.len() {
        let mut pending = Vec::with_capacity(batch);
        while next < atoms.len() && pending.len() < batch {
            if !covered[next] {
                pending.push(next);
            }
            next += 1;
        }
        let solved = options.executor.map(&pending, |&i| {
            system.solve(&atoms[i]).expect("enumerated atoms are valid")
        });
        for (i, result) in pending.into_iter().zip(solved) {
            if covered[i] {
                continue;
            }
            match result {
                None => unsolvable.push(atoms[i]),
                Some(region) => {
                    for j in i..atoms.len() {
                        if !covered[j] && region.solves(&atoms[j]) {
                            covered[j] = true;
                        }
                    }
                    regions.push(region);
                }
            }
        }
    }
    if !unsolvable.is_empty() {
        return Err(FailureReport { unsolvable });
    }
    if options.shrink {
        regions = merge_regions(greedy_cover(&regions, &atoms), &atoms);
    }
    let cover = atoms
        .iter()
        .map(|a| {
            let idx = regions
                .iter()
                .position(|r| r.solves(a))
                .expect("every atom is covered");
            (*a, idx)
        })
        .collect();
    Ok(Witness { regions, cover })
}

/// Greedy set cover: repeatedly keep the region solving the most atoms not
/// yet solved (ties go to the earlier region). Kept regions stay in their
/// original order.
fn greedy_cover(regions: &[Region], atoms: &[SeparationAtom]) -> Vec<Region> {
    let solves: Vec<Vec<usize>> = regions
        .iter()
        .map(|r| (0..atoms.len()).filter(|&j| r.solves(&atoms[j])).collect())
        .collect();
    let mut covered = vec![false; atoms.len()];
    let mut remaining = atoms.len();
    let mut chosen = vec![false; regions.len()];
    while remaining > 0 {
        let (best, gain) = solves
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen[*i])
            .map(|(i, js)| (i, js.iter().filter(|&&j| !covered[j]).count()))
            .fold((usize::MAX, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        assert!(gain > 0, "regions do not cover the atoms");
        chosen[best] = true;
        for &j in &solves[best] {
            if !covered[j] {
                covered[j] = true;
                remaining -= 1;
            }
        }
    }
    regions
        .iter()
        .zip(chosen)
        .filter(|(_, c)| *c)
        .map(|(r, _)| r.clone())
        .collect()
}

/// Merges regions pairwise while possible. Regions are closed under
/// positive integer combinations, and `p·A + q·B` solves every atom solved
/// by `A` or `B` for all ratios `q/p` in an open interval minus finitely
/// many points; the interval comes from the ESSAs, the points from the SSAs.
fn merge_regions(mut regions: Vec<Region>, atoms: &[SeparationAtom]) -> Vec<Region> {
    let mut i = 0;
    while i < regions.len() {
        let mut j = i + 1;
        while j < regions.len() {
            if let Some(merged) = merge_pair(&regions[i], &regions[j], atoms) {
                regions[i] = merged;
                regions.remove(j);
                j = i + 1;
            } else {
                j += 1;
            }
        }
        i += 1;
    }
    regions
}

fn merge_pair(a: &Region, b: &Region, atoms: &[SeparationAtom]) -> Option<Region> {
    use num_rational::BigRational;
    use num_traits::{One, Signed, Zero};

    // find t = q/p > 0 with  α + tβ < 0  (ESSA)  and  α + tβ ≠ 0  (SSA)
    let mut lo = BigRational::zero();
    let mut hi: Option<BigRational> = None;
    let mut bad: Vec<BigRational> = Vec::new();
    for atom in atoms.iter().filter(|x| a.solves(x) || b.solves(x)) {
        let (alpha, beta) = match *atom {
            SeparationAtom::Ssa(s, t) => (&a.sup[s] - &a.sup[t], &b.sup[s] - &b.sup[t]),
            SeparationAtom::Essa { event, state } => {
                (&a.sup[state] - &a.con[event], &b.sup[state] - &b.con[event])
            }
        };
        let ratio = || BigRational::new(-alpha.clone(), beta.clone());
        match atom {
            SeparationAtom::Ssa(..) => {
                if !beta.is_zero() {
                    bad.push(ratio());
                }
            }
            SeparationAtom::Essa { .. } => {
                if beta.is_zero() {
                    if !alpha.is_negative() {
                        return None;
                    }
                } else if beta.is_positive() {
                    let r = ratio();
                    if hi.as_ref().is_none_or(|h| r < *h) {
                        hi = Some(r);
                    }
                } else {
                    let r = ratio();
                    if r > lo {
                        lo = r;
                    }
                }
            }
        }
    }
    let t = match &hi {
        None => {
            let mut t = BigRational::from_integer(lo.floor().to_integer()) + BigRational::one();
            while bad.contains(&t) {
                t += BigRational::one();
            }
            t
        }
        Some(h) if *h <= lo => return None,
        Some(h) => {
            let mut t = (&lo + h) / BigRational::from_integer(2.into());
            while bad.contains(&t) {
                t = (&lo + &t) / BigRational::from_integer(2.into());
            }
            t
        }
    };
    let combined = a.scaled(t.denom());
    let other = b.scaled(t.numer());
    let add = |x: &[BigInt], y: &[BigInt]| x.iter().zip(y).map(|(p, q)| p + q).collect();
    let merged = Region {
        sup: add(&combined.sup, &other.sup),
        con: add(&combined.con, &other.con),
        pro: add(&combined.pro, &other.pro),
    };
    debug_assert!(atoms
        .iter()
        .all(|x| !(a.solves(x) || b.solves(x)) || merged.solves(x)));
    Some(merged)
}

/// Decision-only check used by the repair search: returns the first
/// unsolvable atom found, or `None` if `lts` has `property`.
///
/// Atoms named in `priority` (typically atoms that were unsolvable in
/// related systems) are tried first, which makes negative answers cheap.
pub fn first_unsolvable(lts: &Lts, property: Property, priority: &[NamedAtom]) -> Option<NamedAtom> {
    let system = RegionSystem::new(lts);
    let mut regions: Vec<Region> = Vec::new();
    let mut tried: HashSet<SeparationAtom> = HashSet::new();
    for named in priority {
        let Some(atom) = named.resolve(lts) else { continue };
        let wanted = match atom {
            SeparationAtom::Ssa(..) => property.wants_ssp(),
            SeparationAtom::Essa { .. } => property.wants_essp(),
        };
        if !wanted || !tried.insert(atom) || regions.iter().any(|r| r.solves(&atom)) {
            continue;
        }
        match system.solve(&atom).expect("resolved atoms are valid") {
            Some(r) => regions.push(r),
            None => return Some(named.clone()),
        }
    }
    let atoms = enumerate_atoms(lts, property);
    let mut covered: Vec<bool> = atoms
        .iter()
        .map(|a| regions.iter().any(|r| r.solves(a)))
        .collect();
    for i in 0..atoms.len() {
        if covered[i] {
            continue;
        }
        match system.solve(&atoms[i]).expect("enumerated atoms are valid") {
            None => return Some(atoms[i].named(lts)),
            Some(region) => {
                for j in i..atoms.len() {
                    if !covered[j] && region.solves(&atoms[j]) {
                        covered[j] = true;
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::region::is_region;

    fn essa(lts: &Lts, e: &str, s: &str) -> SeparationAtom {
        SeparationAtom::Essa {
            event: lts.event_index(e).unwrap(),
            state: lts.state_index(s).unwrap(),
        }
    }

    #[test]
    fn atom_counts() {
        let a = fixtures::running();
        assert_eq!(enumerate_atoms(&a, Property::Ssp).len(), 36);
        let essp = enumerate_atoms(&a, Property::Essp);
        assert!(essp.contains(&essa(&a, "x", "s1")));
        assert!(essp.contains(&essa(&a, "x", "s3")));
        assert!(!essp
            .iter()
            .any(|x| *x == SeparationAtom::Essa {
                event: a.event_index("x").unwrap(),
                state: a.state_index("s0").unwrap()
            }));
        // 9 states x 6 events minus 10 edges
        assert_eq!(essp.len(), 44);
        let single = crate::lts::parse_lts("initial q\n").unwrap();
        assert!(enumerate_atoms(&single, Property::Both).is_empty());
    }

    #[test]
    fn running_example_essa_is_unsolvable() {
        let a = fixtures::running();
        assert_eq!(solve_atom(&a, &essa(&a, "x", "s1")), Ok(None));
    }

    #[test]
    fn state_removal_solves_the_essa() {
        let b = fixtures::without_s3();
        let atom = essa(&b, "x", "s1");
        let r = solve_atom(&b, &atom).unwrap().unwrap();
        assert!(r.solves(&atom));
        assert_eq!(is_region(&b, &r), Ok(()));
    }

    #[test]
    fn ssa_bot_s0_is_solvable() {
        let a = fixtures::running();
        let atom = SeparationAtom::Ssa(a.state_index("bot").unwrap(), a.state_index("s0").unwrap());
        let r = solve_atom(&a, &atom).unwrap().unwrap();
        assert!(r.solves(&atom));
        assert_eq!(is_region(&a, &r), Ok(()));
    }

    #[test]
    fn invalid_atoms_are_rejected() {
        let a = fixtures::running();
        let s0 = a.state_index("s0").unwrap();
        assert!(matches!(
            solve_atom(&a, &SeparationAtom::Ssa(s0, s0)),
            Err(AtomError::SameState(_))
        ));
        assert!(matches!(
            solve_atom(&a, &essa(&a, "x", "s0")),
            Err(AtomError::EventOccurs { .. })
        ));
    }

    #[test]
    fn running_example_property_checks() {
        let a = fixtures::running();
        let shrink = CheckOptions {
            shrink: true,
            ..Default::default()
        };
        let w = check_property(&a, Property::Ssp, &shrink).unwrap();
        assert_eq!(w.regions.len(), 1);
        assert_eq!(w.cover.len(), 36);
        let fail = check_property(&a, Property::Essp, &CheckOptions::default()).unwrap_err();
        assert!(fail.unsolvable.contains(&essa(&a, "x", "s1")));
        assert!(fail.render(&a).contains("unsolvable essa x s1\n"));
        assert!(check_property(&a, Property::Both, &CheckOptions::default()).is_err());
    }

    #[test]
    fn repaired_examples_have_both_properties() {
        for lts in [fixtures::without_s3(), fixtures::without_a()] {
            let w = check_property(&lts, Property::Both, &CheckOptions::default()).unwrap();
            for (atom, idx) in &w.cover {
                assert!(w.regions[*idx].solves(atom));
            }
        }
    }

    #[test]
    fn priority_atoms_short_circuit() {
        let a = fixtures::running();
        let hint = essa(&a, "x", "s1").named(&a);
        assert_eq!(first_unsolvable(&a, Property::Essp, std::slice::from_ref(&hint)), Some(hint.clone()));
        assert_eq!(first_unsolvable(&a, Property::Ssp, &[hint]), None);
        assert!(first_unsolvable(&a, Property::Both, &[]).is_some());
        assert_eq!(first_unsolvable(&fixtures::without_a(), Property::Both, &[]), None);
    }

    #[test]
    fn parallel_batches_agree() {
        let a = fixtures::running();
        let seq = check_property(&a, Property::Essp, &CheckOptions::default()).unwrap_err();
        let par = check_property(
            &a,
            Property::Essp,
            &CheckOptions {
                shrink: false,
                executor: Executor::new(4),
            },
        )
        .unwrap_err();
        assert_eq!(seq, par);
    }
}

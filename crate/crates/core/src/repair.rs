//! Minimum removals that make an LTS implementable, and a greedy upper bound.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use thiserror::Error;

use crate::exec::Executor;
use crate::lts::Lts;
use crate::removal::{
    apply_removal, edge_mask, event_mask, mask_is_valid, state_mask, RemovalMode, RemovalSet,
};
use crate::separation::{
    check_property, first_unsolvable, CheckOptions, NamedAtom, Property, SeparationAtom, Witness,
};

/// The implementation relation a repair aims at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Embedding,
    Language,
    Realization,
}

impl Target {
    /// The separation property equivalent to this relation.
    pub fn property(self) -> Property {
        match self {
            Target::Embedding => Property::Ssp,
            Target::Language => Property::Essp,
            Target::Realization => Property::Both,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Embedding => "embedding",
            Target::Language => "language",
            Target::Realization => "realization",
        })
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "embedding" => Ok(Target::Embedding),
            "language" => Ok(Target::Language),
            "realization" => Ok(Target::Realization),
            _ => Err(format!(
                "unknown property `{s}` (expected embedding, language or realization)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RepairResult {
    pub mode: RemovalMode,
    pub target: Target,
    pub removed: RemovalSet,
    pub repaired: Lts,
    pub witness: Witness,
}

impl RepairResult {
    pub fn k(&self) -> usize {
        self.removed.len()
    }

    /// The removal file, then `k=`, `property=`, `mode=` and the witness.
    pub fn render(&self) -> String {
        format!(
            "{}k={}\nproperty={}\nmode={}\n{}",
            self.removed.to_text(),
            self.k(),
            self.target,
            self.mode,
            self.witness.render(&self.repaired)
        )
    }
}

/// Every candidate of size at most `k_max` was examined and none works.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no {mode} removal of size at most {k_max} reaches {target} ({candidates} valid candidates checked)")]
pub struct NoneWithinBudget {
    pub mode: RemovalMode,
    pub target: Target,
    pub k_max: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("greedy search is stuck after removing {removed} components: no single {mode} removal is valid")]
pub struct GreedyDeadEnd {
    pub mode: RemovalMode,
    pub removed: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RepairOptions {
    pub executor: Executor,
    /// Shrink the witness of the returned repair.
    pub shrink: bool,
}

impl RepairOptions {
    fn check_options(&self) -> CheckOptions {
        CheckOptions {
            shrink: self.shrink,
            executor: self.executor.clone(),
        }
    }
}

// hint atoms kept between candidates
const MAX_HINTS: usize = 64;

/// The removable components of `lts` in `mode`, as indices: edges, events,
/// or non-initial states.
fn components(lts: &Lts, mode: RemovalMode) -> Vec<usize> {
    match mode {
        RemovalMode::Edge => (0..lts.edges().len()).collect(),
        RemovalMode::Event => (0..lts.num_events()).collect(),
        RemovalMode::State => (0..lts.num_states()).filter(|&s| s != lts.initial()).collect(),
    }
}

fn touches(lts: &Lts, mode: RemovalMode, c: usize, atom: &SeparationAtom) -> bool {
    let (states, event) = match *atom {
        SeparationAtom::Ssa(a, b) => (vec![a, b], None),
        SeparationAtom::Essa { event, state } => (vec![state], Some(event)),
    };
    match mode {
        RemovalMode::State => states.contains(&c),
        RemovalMode::Edge => {
            let e = lts.edges()[c];
            states.contains(&e.src) || states.contains(&e.dst) || event == Some(e.event)
        }
        RemovalMode::Event => {
            event == Some(c)
                || lts
                    .edges()
                    .iter()
                    .any(|e| e.event == c && (states.contains(&e.src) || states.contains(&e.dst)))
        }
    }
}

/// Components touching an unsolvable atom first, each group in canonical order.
fn prioritized(lts: &Lts, mode: RemovalMode, unsolvable: &[SeparationAtom]) -> Vec<usize> {
    let (hot, cold): (Vec<usize>, Vec<usize>) = components(lts, mode)
        .into_iter()
        .partition(|&c| unsolvable.iter().any(|a| touches(lts, mode, c, a)));
    hot.into_iter().chain(cold).collect()
}

fn mask_of(lts: &Lts, mode: RemovalMode, removed: &[usize]) -> Vec<bool> {
    match mode {
        RemovalMode::Edge => edge_mask(lts, removed),
        RemovalMode::Event => event_mask(lts, removed),
        RemovalMode::State => state_mask(lts, removed),
    }
}

fn pack(mask: &[bool]) -> Vec<u64> {
    mask.chunks(64)
        .map(|c| c.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i)))
        .collect()
}

fn removal_set(lts: &Lts, mode: RemovalMode, removed: &[usize]) -> RemovalSet {
    match mode {
        RemovalMode::Edge => RemovalSet::edges(removed.iter().map(|&i| {
            let e = lts.edges()[i];
            (lts.state_name(e.src), lts.event_name(e.event), lts.state_name(e.dst))
        })),
        RemovalMode::Event => RemovalSet::events(removed.iter().map(|&e| lts.event_name(e))),
        RemovalMode::State => RemovalSet::states(removed.iter().map(|&s| lts.state_name(s))),
    }
}

fn finish(
    lts: &Lts,
    mode: RemovalMode,
    target: Target,
    removed: RemovalSet,
    options: &RepairOptions,
) -> RepairResult {
    let repaired = apply_removal(lts, &removed).expect("search only produces valid removals");
    let witness = check_property(&repaired, target.property(), &options.check_options())
        .expect("search only accepts implementable systems");
    RepairResult {
        mode,
        target,
        removed,
        repaired,
        witness,
    }
}

/// Exact minimum removal by iterative deepening on the removal size.
///
/// At each size the valid candidates are visited in a fixed order
/// (components touching atoms unsolvable in `lts` first) and the first
/// candidate whose result has the target property is returned. Candidates
/// are checked in chunks on the executor; results are consumed in candidate
/// order, so the answer does not depend on the number of workers.
pub fn min_removal(
    lts: &Lts,
    mode: RemovalMode,
    target: Target,
    k_max: usize,
    options: &RepairOptions,
) -> Result<RepairResult, NoneWithinBudget> {
    let property = target.property();
    let unsolvable = match check_property(lts, property, &options.check_options()) {
        Ok(_) => return Ok(finish(lts, mode, target, RemovalSet::empty(mode), options)),
        Err(report) => report.unsolvable,
    };
    let order = prioritized(lts, mode, &unsolvable);
    let mut hints: Vec<NamedAtom> = unsolvable.iter().take(MAX_HINTS).map(|a| a.named(lts)).collect();
    let mut memo: HashMap<Vec<u64>, bool> = HashMap::new();
    memo.insert(pack(&vec![true; lts.edges().len()]), false);
    let chunk = if options.executor.jobs() <= 1 { 1 } else { 4 * options.executor.jobs() };
    let mut candidates = 1;

    for k in 1..=k_max.min(order.len()) {
        let mut combos = (0..order.len()).combinations(k);
        loop {
            // collect the next chunk of valid, not yet decided candidates
            let mut batch: Vec<(Vec<usize>, Vec<bool>)> = Vec::with_capacity(chunk);
            let mut exhausted = false;
            let mut seen_in_batch = HashSet::new();
            while batch.len() < chunk {
                let Some(positions) = combos.next() else {
                    exhausted = true;
                    break;
                };
                let mut removed: Vec<usize> = positions.iter().map(|&p| order[p]).collect();
                removed.sort_unstable();
                let keep = mask_of(lts, mode, &removed);
                if !mask_is_valid(lts, mode, &keep, &removed) {
                    continue;
                }
                candidates += 1;
                let key = pack(&keep);
                match memo.get(&key) {
                    Some(true) => {
                        let set = removal_set(lts, mode, &removed);
                        return Ok(finish(lts, mode, target, set, options));
                    }
                    Some(false) => continue,
                    None => {}
                }
                if seen_in_batch.insert(key) {
                    batch.push((removed, keep));
                }
            }
            let current_hints = hints.clone();
            let verdicts = options.executor.map(&batch, |(_, keep)| {
                let repaired = lts.restrict_edges(keep).expect("valid removal");
                first_unsolvable(&repaired, property, &current_hints)
            });
            for ((removed, keep), verdict) in batch.iter().zip(verdicts) {
                memo.insert(pack(keep), verdict.is_none());
                match verdict {
                    None => {
                        let set = removal_set(lts, mode, removed);
                        return Ok(finish(lts, mode, target, set, options));
                    }
                    Some(atom) => {
                        // move to front: the atom that just refuted a candidate
                        // is the best first guess for its neighbours
                        hints.retain(|h| *h != atom);
                        hints.insert(0, atom);
                        hints.truncate(MAX_HINTS);
                    }
                }
            }
            if exhausted {
                break;
            }
        }
    }
    Err(NoneWithinBudget {
        mode,
        target,
        k_max,
        candidates,
    })
}

/// Greedy repair: repeatedly applies the single valid removal that leaves
/// the fewest unsolvable atoms (ties: canonical order) until the target
/// property holds. The result is valid but not necessarily minimal.
pub fn greedy_upper_bound(
    lts: &Lts,
    mode: RemovalMode,
    target: Target,
    options: &RepairOptions,
) -> Result<RepairResult, GreedyDeadEnd> {
    let property = target.property();
    let sequential = CheckOptions::default();
    let count = |l: &Lts| match check_property(l, property, &sequential) {
        Ok(_) => 0,
        Err(report) => report.unsolvable.len(),
    };
    let mut current = lts.clone();
    let mut removed: Vec<usize> = Vec::new();
    let mut unsolvable = count(&current);
    while unsolvable > 0 {
        // single removals, as indices into the current system
        let steps: Vec<(usize, Vec<bool>)> = components(&current, mode)
            .into_iter()
            .filter_map(|c| {
                let keep = mask_of(&current, mode, &[c]);
                mask_is_valid(&current, mode, &keep, &[c]).then_some((c, keep))
            })
            .collect();
        let counts = options.executor.map(&steps, |(_, keep)| {
            count(&current.restrict_edges(keep).expect("valid removal"))
        });
        let Some((best, best_count)) = steps
            .iter()
            .zip(counts)
            .map(|((c, _), n)| (*c, n))
            .min_by_key(|&(c, n)| (n, c))
        else {
            return Err(GreedyDeadEnd {
                mode,
                removed: removed.len(),
            });
        };
        removed.push(original_index(lts, &current, mode, best));
        let keep = mask_of(&current, mode, &[best]);
        current = current.restrict_edges(&keep).expect("valid removal");
        unsolvable = best_count;
    }
    removed.sort_unstable();
    let set = removal_set(lts, mode, &removed);
    Ok(finish(lts, mode, target, set, options))
}

/// Index in `original` of component `c` of `current`, matched by name.
fn original_index(original: &Lts, current: &Lts, mode: RemovalMode, c: usize) -> usize {
    match mode {
        RemovalMode::Edge => {
            let e = current.edges()[c];
            let src = original.state_index(current.state_name(e.src)).expect("same names");
            let ev = original.event_index(current.event_name(e.event)).expect("same names");
            original.edge_index(src, ev).expect("same edges")
        }
        RemovalMode::Event => original.event_index(current.event_name(c)).expect("same names"),
        RemovalMode::State => original.state_index(current.state_name(c)).expect("same names"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{running, without_s3};
    use crate::synthesis::{synthesized_net, verify_language_simulation, verify_realization};

    fn opts() -> RepairOptions {
        RepairOptions::default()
    }

    #[test]
    fn running_example_minimum_removals() {
        let a = running();
        for (mode, target) in [
            (RemovalMode::State, Target::Language),
            (RemovalMode::Event, Target::Realization),
            (RemovalMode::Edge, Target::Language),
        ] {
            let r = min_removal(&a, mode, target, 2, &opts()).unwrap();
            assert_eq!(r.k(), 1, "{mode} {target}");
            let net = synthesized_net(&r.repaired, &r.witness).unwrap();
            verify_language_simulation(&r.repaired, &net).unwrap();
            if target == Target::Realization {
                verify_realization(&r.repaired, &net).unwrap();
            }
            let none = min_removal(&a, mode, target, 0, &opts()).unwrap_err();
            assert_eq!(none.k_max, 0);
        }
    }

    #[test]
    fn implementable_systems_need_no_removal() {
        let b = without_s3();
        for mode in [RemovalMode::Edge, RemovalMode::Event, RemovalMode::State] {
            let r = min_removal(&b, mode, Target::Realization, 3, &opts()).unwrap();
            assert_eq!(r.k(), 0);
            assert!(r.removed.is_empty());
            let g = greedy_upper_bound(&b, mode, Target::Realization, &opts()).unwrap();
            assert_eq!(g.k(), 0);
        }
    }

    #[test]
    fn greedy_matches_optimum_on_running_example() {
        let a = running();
        let g = greedy_upper_bound(&a, RemovalMode::State, Target::Language, &opts()).unwrap();
        assert_eq!(g.k(), 1);
        let m = min_removal(&a, RemovalMode::State, Target::Language, 2, &opts()).unwrap();
        assert!(g.k() >= m.k());
    }

    #[test]
    fn rendering_lists_removal_then_summary() {
        let a = running();
        let r = min_removal(&a, RemovalMode::Event, Target::Realization, 1, &opts()).unwrap();
        let text = r.render();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("remove event "));
        assert_eq!(lines.next(), Some("k=1"));
        assert_eq!(lines.next(), Some("property=realization"));
        assert_eq!(lines.next(), Some("mode=event"));
        assert!(lines.next().unwrap().starts_with("witness regions="));
    }

    #[test]
    fn parallel_search_returns_the_same_repair() {
        let a = running();
        for mode in [RemovalMode::Edge, RemovalMode::Event, RemovalMode::State] {
            let seq = min_removal(&a, mode, Target::Realization, 2, &opts()).unwrap();
            let par = RepairOptions {
                executor: Executor::new(4),
                shrink: false,
            };
            let par = min_removal(&a, mode, Target::Realization, 2, &par).unwrap();
            assert_eq!(seq.removed, par.removed);
            assert_eq!(seq.render(), par.render());
        }
    }
}

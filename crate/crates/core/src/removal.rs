//! Edge, event and state removals.
//!
//! Every removal must leave a reachable system. Edge removals must list the
//! edges they strand: an edge whose source becomes unreachable is removed
//! too, and it has to be paid for explicitly.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lts::{tokens, Lts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RemovalMode {
    Edge,
    Event,
    State,
}

impl fmt::Display for RemovalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemovalMode::Edge => "edge",
            RemovalMode::Event => "event",
            RemovalMode::State => "state",
        })
    }
}

impl FromStr for RemovalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge" => Ok(RemovalMode::Edge),
            "event" => Ok(RemovalMode::Event),
            "state" => Ok(RemovalMode::State),
            _ => Err(format!("unknown removal mode `{s}` (expected edge, event or state)")),
        }
    }
}

/// An edge given by the names of its source, event and target.
pub type NamedEdge = (String, String, String);

/// A set of removed edges, events or states, identified by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RemovalSet {
    Edges(BTreeSet<NamedEdge>),
    Events(BTreeSet<String>),
    States(BTreeSet<String>),
}

impl RemovalSet {
    pub fn empty(mode: RemovalMode) -> Self {
        match mode {
            RemovalMode::Edge => RemovalSet::Edges(BTreeSet::new()),
            RemovalMode::Event => RemovalSet::Events(BTreeSet::new()),
            RemovalMode::State => RemovalSet::States(BTreeSet::new()),
        }
    }

    pub fn edges<I, S>(edges: I) -> Self
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        RemovalSet::Edges(edges.into_iter().map(|(a, e, b)| (a.into(), e.into(), b.into())).collect())
    }

    pub fn events<I: IntoIterator<Item = S>, S: Into<String>>(events: I) -> Self {
        RemovalSet::Events(events.into_iter().map(Into::into).collect())
    }

    pub fn states<I: IntoIterator<Item = S>, S: Into<String>>(states: I) -> Self {
        RemovalSet::States(states.into_iter().map(Into::into).collect())
    }

    pub fn mode(&self) -> RemovalMode {
        match self {
            RemovalSet::Edges(_) => RemovalMode::Edge,
            RemovalSet::Events(_) => RemovalMode::Event,
            RemovalSet::States(_) => RemovalMode::State,
        }
    }

    /// `|𝔎|`, `|𝔈|` or `|𝔖|`.
    pub fn len(&self) -> usize {
        match self {
            RemovalSet::Edges(s) => s.len(),
            RemovalSet::Events(s) | RemovalSet::States(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One `remove ...` line per element, sorted.
    pub fn to_text(&self) -> String {
        match self {
            RemovalSet::Edges(s) => s
                .iter()
                .map(|(a, e, b)| format!("remove edge {a} {e} {b}\n"))
                .collect(),
            RemovalSet::Events(s) => s.iter().map(|e| format!("remove event {e}\n")).collect(),
            RemovalSet::States(s) => s.iter().map(|x| format!("remove state {x}\n")).collect(),
        }
    }
}

impl fmt::Display for RemovalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemovalParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: a removal file uses a single mode ({first} before, {second} here)")]
    MixedModes {
        line: usize,
        first: RemovalMode,
        second: RemovalMode,
    },
}

/// Parses `remove edge <s> <e> <s'>` / `remove event <e>` / `remove state <s>`
/// lines. A file without any line is an empty removal of `default_mode`.
pub fn parse_removal(text: &str, default_mode: RemovalMode) -> Result<RemovalSet, RemovalParseError> {
    let mut set: Option<RemovalSet> = None;
    for (lineno, line) in text.lines().enumerate() {
        let toks = tokens(line);
        let syntax = |column: usize, message: &str| RemovalParseError::Syntax {
            line: lineno + 1,
            column,
            message: message.to_string(),
        };
        let (mode, item) = match toks.as_slice() {
            [] => continue,
            [(_, "remove"), (_, "edge"), (_, s), (_, e), (_, t)] => {
                (RemovalMode::Edge, vec![*s, *e, *t])
            }
            [(_, "remove"), (_, "event"), (_, e)] => (RemovalMode::Event, vec![*e]),
            [(_, "remove"), (_, "state"), (_, s)] => (RemovalMode::State, vec![*s]),
            [(c, _), ..] => {
                return Err(syntax(
                    *c,
                    "expected `remove edge <s> <e> <s'>`, `remove event <e>` or `remove state <s>`",
                ))
            }
        };
        let current = set.get_or_insert_with(|| RemovalSet::empty(mode));
        if current.mode() != mode {
            return Err(RemovalParseError::MixedModes {
                line: lineno + 1,
                first: current.mode(),
                second: mode,
            });
        }
        match current {
            RemovalSet::Edges(s) => {
                s.insert((item[0].into(), item[1].into(), item[2].into()));
            }
            RemovalSet::Events(s) | RemovalSet::States(s) => {
                s.insert(item[0].into());
            }
        }
    }
    Ok(set.unwrap_or_else(|| RemovalSet::empty(default_mode)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemovalError {
    #[error("{0} {1} {2} is not an edge of the LTS")]
    UnknownEdge(String, String, String),
    #[error("unknown event {0}")]
    UnknownEvent(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("the initial state {0} cannot be removed")]
    InitialState(String),
    /// Edges that become unreachable but are not listed in the removal.
    #[error("stranded edges must be removed explicitly: {}", render_edges(.0))]
    StrandedEdges(Vec<NamedEdge>),
    /// States no longer reachable, and the kept edges they strand.
    #[error("removal breaks reachability: states {} unreachable{}", .states.join(" "), stranded_suffix(.edges))]
    Unreachable {
        states: Vec<String>,
        edges: Vec<NamedEdge>,
    },
}

fn render_edges(edges: &[NamedEdge]) -> String {
    edges
        .iter()
        .map(|(a, e, b)| format!("{a} {e} {b}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn stranded_suffix(edges: &[NamedEdge]) -> String {
    if edges.is_empty() {
        String::new()
    } else {
        format!("; stranded edges {}", render_edges(edges))
    }
}

fn named(lts: &Lts, i: usize) -> NamedEdge {
    let e = lts.edges()[i];
    (
        lts.state_name(e.src).to_string(),
        lts.event_name(e.event).to_string(),
        lts.state_name(e.dst).to_string(),
    )
}

/// Kept edges whose source is unreachable when only kept edges are used.
pub fn stranded_edges(lts: &Lts, keep: &[bool]) -> Vec<usize> {
    let reach = lts.reachable_under(keep);
    (0..lts.edges().len())
        .filter(|&i| keep[i] && !reach[lts.edges()[i].src])
        .collect()
}

fn unreachable_error(lts: &Lts, keep: &[bool], alive: impl Fn(usize) -> bool) -> RemovalError {
    let reach = lts.reachable_under(keep);
    RemovalError::Unreachable {
        states: (0..lts.num_states())
            .filter(|&s| alive(s) && !reach[s])
            .map(|s| lts.state_name(s).to_string())
            .collect(),
        edges: stranded_edges(lts, keep).into_iter().map(|i| named(lts, i)).collect(),
    }
}

/// Kept-edge mask of an edge removal, given by edge indices.
pub fn edge_mask(lts: &Lts, removed: &[usize]) -> Vec<bool> {
    let mut keep = vec![true; lts.edges().len()];
    for &i in removed {
        keep[i] = false;
    }
    keep
}

/// Kept-edge mask of an event removal.
pub fn event_mask(lts: &Lts, removed: &[usize]) -> Vec<bool> {
    let mut gone = vec![false; lts.num_events()];
    for &e in removed {
        gone[e] = true;
    }
    lts.edges().iter().map(|e| !gone[e.event]).collect()
}

/// Kept-edge mask of a state removal: edges with both endpoints surviving.
pub fn state_mask(lts: &Lts, removed: &[usize]) -> Vec<bool> {
    let mut gone = vec![false; lts.num_states()];
    for &s in removed {
        gone[s] = true;
    }
    lts.edges().iter().map(|e| !gone[e.src] && !gone[e.dst]).collect()
}

/// Whether the kept-edge mask describes a valid removal in `mode`. For state
/// removals `removed_states` must be the removed state indices.
pub fn mask_is_valid(lts: &Lts, mode: RemovalMode, keep: &[bool], removed_states: &[usize]) -> bool {
    match mode {
        RemovalMode::Edge | RemovalMode::Event => stranded_edges(lts, keep).is_empty(),
        RemovalMode::State => {
            let reach = lts.reachable_under(keep);
            let mut gone = vec![false; lts.num_states()];
            for &s in removed_states {
                gone[s] = true;
            }
            !gone[lts.initial()] && (0..lts.num_states()).all(|s| gone[s] || reach[s])
        }
    }
}

fn restrict(lts: &Lts, keep: &[bool]) -> Lts {
    lts.restrict_edges(keep)
        .expect("validated removals strand no kept edge")
}

/// Removes the edge set `𝔎`. Edges stranded by the removal must be in `𝔎`.
pub fn apply_edge_removal(lts: &Lts, removed: &BTreeSet<NamedEdge>) -> Result<Lts, RemovalError> {
    let mut idx = Vec::with_capacity(removed.len());
    for (a, e, b) in removed {
        let found = lts
            .state_index(a)
            .zip(lts.event_index(e))
            .and_then(|(s, ev)| lts.edge_index(s, ev))
            .filter(|&i| lts.state_name(lts.edges()[i].dst) == b);
        match found {
            Some(i) => idx.push(i),
            None => return Err(RemovalError::UnknownEdge(a.clone(), e.clone(), b.clone())),
        }
    }
    let keep = edge_mask(lts, &idx);
    let stranded = stranded_edges(lts, &keep);
    if !stranded.is_empty() {
        return Err(RemovalError::StrandedEdges(
            stranded.into_iter().map(|i| named(lts, i)).collect(),
        ));
    }
    Ok(restrict(lts, &keep))
}

/// Removes every edge labeled by an event of `𝔈`. Events left without
/// edges disappear from the result.
pub fn apply_event_removal(lts: &Lts, removed: &BTreeSet<String>) -> Result<Lts, RemovalError> {
    let mut idx = Vec::with_capacity(removed.len());
    for e in removed {
        idx.push(lts.event_index(e).ok_or_else(|| RemovalError::UnknownEvent(e.clone()))?);
    }
    let keep = event_mask(lts, &idx);
    if !stranded_edges(lts, &keep).is_empty() {
        return Err(unreachable_error(lts, &keep, |_| true));
    }
    Ok(restrict(lts, &keep))
}

/// The sub-system induced by the states outside `𝔖`; every survivor must
/// stay reachable.
pub fn apply_state_removal(lts: &Lts, removed: &BTreeSet<String>) -> Result<Lts, RemovalError> {
    let mut idx = Vec::with_capacity(removed.len());
    for s in removed {
        let i = lts.state_index(s).ok_or_else(|| RemovalError::UnknownState(s.clone()))?;
        if i == lts.initial() {
            return Err(RemovalError::InitialState(s.clone()));
        }
        idx.push(i);
    }
    let keep = state_mask(lts, &idx);
    if !mask_is_valid(lts, RemovalMode::State, &keep, &idx) {
        return Err(unreachable_error(lts, &keep, |s| !idx.contains(&s)));
    }
    Ok(restrict(lts, &keep))
}

pub fn apply_removal(lts: &Lts, removal: &RemovalSet) -> Result<Lts, RemovalError> {
    match removal {
        RemovalSet::Edges(k) => apply_edge_removal(lts, k),
        RemovalSet::Events(e) => apply_event_removal(lts, e),
        RemovalSet::States(s) => apply_state_removal(lts, s),
    }
}

/// The edges of `original` missing from `repaired`, i.e. the `𝔎` under
/// which `repaired` is an edge removal of `original`.
pub fn induced_edge_removal(original: &Lts, repaired: &Lts) -> BTreeSet<NamedEdge> {
    let kept: BTreeSet<(&str, &str, &str)> = repaired.named_edges().collect();
    original
        .named_edges()
        .filter(|e| !kept.contains(e))
        .map(|(a, e, b)| (a.to_string(), e.to_string(), b.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{running, without_s3, without_a};
    use crate::lts::lts_isomorphic;

    fn same(a: &Lts, b: &Lts) -> bool {
        a.named_edges().eq(b.named_edges()) && a.state_names().eq(b.state_names())
    }

    #[test]
    fn example_removals_of_running_example() {
        let a = running();
        let b = apply_edge_removal(&a, &[("s2".into(), "x".into(), "s3".into())].into()).unwrap();
        assert!(same(&b, &without_s3()));
        let b = apply_state_removal(&a, &["s3".to_string()].into()).unwrap();
        assert!(same(&b, &without_s3()));
        let c = apply_event_removal(&a, &["a".to_string()].into()).unwrap();
        assert!(same(&c, &without_a()));
    }

    #[test]
    fn empty_removals_are_identities() {
        let a = running();
        for mode in [RemovalMode::Edge, RemovalMode::Event, RemovalMode::State] {
            let b = apply_removal(&a, &RemovalSet::empty(mode)).unwrap();
            assert!(same(&a, &b));
            assert!(lts_isomorphic(&a, &b).is_some());
        }
    }

    #[test]
    fn edge_removal_must_list_stranded_edges() {
        let a = running();
        let err = apply_edge_removal(&a, &[("bot".into(), "u".into(), "s0".into())].into()).unwrap_err();
        let RemovalError::StrandedEdges(edges) = err else { panic!("{err}") };
        let names: Vec<String> = edges.iter().map(|(a, e, b)| format!("{a} {e} {b}")).collect();
        assert_eq!(names, ["s0 x s1", "s1 y s2", "s2 x s3"]);

        let full = RemovalSet::edges([
            ("bot", "u", "s0"),
            ("s0", "x", "s1"),
            ("s1", "y", "s2"),
            ("s2", "x", "s3"),
        ]);
        let b = apply_removal(&a, &full).unwrap();
        assert_eq!(b.num_states(), 5);
    }

    #[test]
    fn unknown_components_are_rejected() {
        let a = running();
        assert!(matches!(
            apply_edge_removal(&a, &[("s0".into(), "x".into(), "s2".into())].into()),
            Err(RemovalError::UnknownEdge(..))
        ));
        assert!(matches!(
            apply_event_removal(&a, &["z".to_string()].into()),
            Err(RemovalError::UnknownEvent(_))
        ));
        assert!(matches!(
            apply_state_removal(&a, &["bot".to_string()].into()),
            Err(RemovalError::InitialState(_))
        ));
    }

    #[test]
    fn removing_x_breaks_reachability() {
        let a = running();
        let err = apply_event_removal(&a, &["x".to_string()].into()).unwrap_err();
        assert_eq!(
            err,
            RemovalError::Unreachable {
                states: vec!["s1".into(), "s2".into(), "s3".into()],
                edges: vec![("s1".into(), "y".into(), "s2".into())],
            }
        );
    }

    #[test]
    fn removing_s1_breaks_reachability() {
        let a = running();
        let err = apply_state_removal(&a, &["s1".to_string()].into()).unwrap_err();
        let RemovalError::Unreachable { states, .. } = err else { panic!("{err}") };
        assert_eq!(states, ["s2", "s3"]);
    }

    #[test]
    fn event_and_state_removals_are_edge_removals() {
        let a = running();
        for removal in [RemovalSet::states(["s3"]), RemovalSet::events(["a"]), RemovalSet::states(["q1", "t1"])] {
            let b = apply_removal(&a, &removal).unwrap();
            let k = induced_edge_removal(&a, &b);
            let again = apply_edge_removal(&a, &k).unwrap();
            assert!(same(&b, &again));
        }
    }

    #[test]
    fn removal_text_round_trip() {
        let set = RemovalSet::edges([("s2", "x", "s3"), ("bot", "u", "s0")]);
        let text = set.to_text();
        assert_eq!(text, "remove edge bot u s0\nremove edge s2 x s3\n");
        assert_eq!(parse_removal(&text, RemovalMode::State).unwrap(), set);
        assert_eq!(
            parse_removal("# nothing\n", RemovalMode::State).unwrap(),
            RemovalSet::empty(RemovalMode::State)
        );
        assert!(matches!(
            parse_removal("remove event a\nremove state s3\n", RemovalMode::Edge),
            Err(RemovalParseError::MixedModes { line: 2, .. })
        ));
        assert!(matches!(
            parse_removal("remove edge a b\n", RemovalMode::Edge),
            Err(RemovalParseError::Syntax { line: 1, column: 1, .. })
        ));
    }
}

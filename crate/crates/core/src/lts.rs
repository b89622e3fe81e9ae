//! Deterministic, initialized, reachable labeled transition systems.
//!
//! States and events are stored sorted by identifier, so indices double as
//! the canonical order. Edges are kept sorted by `(source, event)`; every
//! search built on top of an [`Lts`] iterates in that order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// An edge `src --event--> dst`, in indices of the owning [`Lts`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub event: usize,
    pub dst: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("nondeterministic: state {state} has two {event}-edges (to {first} and {second})")]
    Nondeterministic {
        state: String,
        event: String,
        first: String,
        second: String,
    },
    #[error("unreachable states: {}", .0.join(" "))]
    Unreachable(Vec<String>),
    #[error("identifier {0} is used both as a state and as an event")]
    NamespaceClash(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("unknown event {0}")]
    UnknownEvent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing `initial` declaration")]
    MissingInitial,
    #[error(transparent)]
    Invalid(#[from] LtsError),
}

/// A finite deterministic labeled transition system whose states are all
/// reachable from the initial state.
#[derive(Clone, Debug)]
pub struct Lts {
    name: Arc<str>,
    states: Vec<Arc<str>>,
    events: Vec<Arc<str>>,
    initial: usize,
    edges: Vec<Edge>,
    // edges[out_start[s]..out_start[s + 1]] leave state s
    out_start: Vec<usize>,
    succ: Vec<Option<usize>>,
    // breadth-first spanning tree: index into `edges` of the tree edge entering each state
    parent: Vec<Option<usize>>,
    bfs_order: Vec<usize>,
}

impl PartialEq for Lts {
    /// Equality up to the name: same identifiers, same initial state, same edges.
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.events == other.events
            && self.initial == other.initial
            && self.edges == other.edges
    }
}

impl Eq for Lts {}

impl Lts {
    /// Builds and validates an LTS from named edges. States and events are
    /// declared by occurrence; the initial state is always a state.
    pub fn from_edges<I, S>(name: &str, initial: &str, edges: I) -> Result<Self, LtsError>
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: AsRef<str>,
    {
        let mut state_set: BTreeSet<Arc<str>> = BTreeSet::new();
        let mut event_set: BTreeSet<Arc<str>> = BTreeSet::new();
        let mut named = Vec::new();
        state_set.insert(Arc::from(initial));
        for (s, e, t) in edges {
            let (s, e, t): (Arc<str>, Arc<str>, Arc<str>) =
                (s.as_ref().into(), e.as_ref().into(), t.as_ref().into());
            state_set.insert(s.clone());
            state_set.insert(t.clone());
            event_set.insert(e.clone());
            named.push((s, e, t));
        }
        if let Some(clash) = state_set.intersection(&event_set).next() {
            return Err(LtsError::NamespaceClash(clash.to_string()));
        }
        let states: Vec<Arc<str>> = state_set.into_iter().collect();
        let events: Vec<Arc<str>> = event_set.into_iter().collect();
        let index = |v: &[Arc<str>], x: &str| v.binary_search_by(|y| (**y).cmp(x)).unwrap();
        let mut indexed: Vec<Edge> = named
            .iter()
            .map(|(s, e, t)| Edge {
                src: index(&states, s),
                event: index(&events, e),
                dst: index(&states, t),
            })
            .collect();
        indexed.sort();
        indexed.dedup();
        let initial = index(&states, initial);
        Self::from_indexed(Arc::from(name), states, events, initial, indexed)
    }

    /// Validates pre-indexed parts. `edges` must be sorted and deduplicated.
    fn from_indexed(
        name: Arc<str>,
        states: Vec<Arc<str>>,
        events: Vec<Arc<str>>,
        initial: usize,
        edges: Vec<Edge>,
    ) -> Result<Self, LtsError> {
        let n = states.len();
        let k = events.len();
        let mut succ = vec![None; n * k];
        for w in edges.windows(2) {
            if w[0].src == w[1].src && w[0].event == w[1].event {
                return Err(LtsError::Nondeterministic {
                    state: states[w[0].src].to_string(),
                    event: events[w[0].event].to_string(),
                    first: states[w[0].dst].to_string(),
                    second: states[w[1].dst].to_string(),
                });
            }
        }
        let mut out_start = vec![0; n + 1];
        for e in &edges {
            succ[e.src * k + e.event] = Some(e.dst);
            out_start[e.src + 1] += 1;
        }
        for s in 0..n {
            out_start[s + 1] += out_start[s];
        }
        let mut lts = Lts {
            name,
            states,
            events,
            initial,
            edges,
            out_start,
            succ,
            parent: vec![None; n],
            bfs_order: Vec::with_capacity(n),
        };
        let mut seen = vec![false; n];
        seen[initial] = true;
        let mut queue = VecDeque::from([initial]);
        while let Some(s) = queue.pop_front() {
            lts.bfs_order.push(s);
            for i in lts.out_start[s]..lts.out_start[s + 1] {
                let t = lts.edges[i].dst;
                if !seen[t] {
                    seen[t] = true;
                    lts.parent[t] = Some(i);
                    queue.push_back(t);
                }
            }
        }
        if lts.bfs_order.len() != n {
            let missing = (0..n)
                .filter(|&s| !seen[s])
                .map(|s| lts.states[s].to_string())
                .collect();
            return Err(LtsError::Unreachable(missing));
        }
        Ok(lts)
    }

    /// Keeps the edges flagged in `keep` (indexed like [`Lts::edges`]), then
    /// drops unused states and events. Fails if a kept edge is stranded.
    pub fn restrict_edges(&self, keep: &[bool]) -> Result<Lts, LtsError> {
        let kept = self.reachable_under(keep);
        let stranded: Vec<usize> = (0..self.states.len())
            .filter(|&s| !kept[s] && self.out_edge_indices(s).any(|i| keep[i]))
            .collect();
        if !stranded.is_empty() {
            return Err(LtsError::Unreachable(
                stranded.iter().map(|&s| self.states[s].to_string()).collect(),
            ));
        }
        self.rebuild(|i| keep[i])
    }

    /// Marks the states reachable from the initial state using only the kept edges.
    pub fn reachable_under(&self, keep: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        seen[self.initial] = true;
        let mut stack = vec![self.initial];
        while let Some(s) = stack.pop() {
            for i in self.out_edge_indices(s) {
                let t = self.edges[i].dst;
                if keep[i] && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    fn rebuild(&self, keep: impl Fn(usize) -> bool) -> Result<Lts, LtsError> {
        let mut used_state = vec![false; self.states.len()];
        let mut used_event = vec![false; self.events.len()];
        used_state[self.initial] = true;
        for (i, e) in self.edges.iter().enumerate() {
            if keep(i) {
                used_state[e.src] = true;
                used_state[e.dst] = true;
                used_event[e.event] = true;
            }
        }
        let remap = |used: &[bool]| {
            let mut next = 0;
            used.iter()
                .map(|&u| {
                    u.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect::<Vec<Option<usize>>>()
        };
        let smap = remap(&used_state);
        let emap = remap(&used_event);
        let states = self
            .states
            .iter()
            .zip(&used_state)
            .filter(|(_, &u)| u)
            .map(|(s, _)| s.clone())
            .collect();
        let events = self
            .events
            .iter()
            .zip(&used_event)
            .filter(|(_, &u)| u)
            .map(|(e, _)| e.clone())
            .collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep(i))
            .map(|(_, e)| Edge {
                src: smap[e.src].unwrap(),
                event: emap[e.event].unwrap(),
                dst: smap[e.dst].unwrap(),
            })
            .collect();
        Self::from_indexed(
            self.name.clone(),
            states,
            events,
            smap[self.initial].unwrap(),
            edges,
        )
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Arc::from(name);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn event_name(&self, e: usize) -> &str {
        &self.events[e]
    }

    pub fn state_names(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(|s| &**s)
    }

    pub fn event_names(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| &**e)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.binary_search_by(|s| (**s).cmp(name)).ok()
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.binary_search_by(|e| (**e).cmp(name)).ok()
    }

    /// Index of the edge `src --event-->`, if present.
    pub fn edge_index(&self, src: usize, event: usize) -> Option<usize> {
        self.out_edge_indices(src)
            .find(|&i| self.edges[i].event == event)
    }

    pub fn succ(&self, s: usize, e: usize) -> Option<usize> {
        self.succ[s * self.events.len() + e]
    }

    pub fn out_edges(&self, s: usize) -> &[Edge] {
        &self.edges[self.out_start[s]..self.out_start[s + 1]]
    }

    pub fn out_edge_indices(&self, s: usize) -> std::ops::Range<usize> {
        self.out_start[s]..self.out_start[s + 1]
    }

    /// States in breadth-first discovery order from the initial state.
    pub fn bfs_order(&self) -> &[usize] {
        &self.bfs_order
    }

    /// The breadth-first tree edge entering `s` (`None` for the initial state).
    pub fn tree_edge(&self, s: usize) -> Option<Edge> {
        self.parent[s].map(|i| self.edges[i])
    }

    pub fn is_tree_edge(&self, edge_index: usize) -> bool {
        self.parent[self.edges[edge_index].dst] == Some(edge_index)
    }

    /// The reachability certificate for `s`: the tree path from the initial state.
    pub fn path_to(&self, s: usize) -> Vec<Edge> {
        let mut path = Vec::new();
        let mut cur = s;
        while let Some(e) = self.tree_edge(cur) {
            path.push(e);
            cur = e.src;
        }
        path.reverse();
        path
    }

    /// Whether `word` can be fired from the initial state.
    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> Result<bool, LtsError> {
        let events = word
            .iter()
            .map(|w| {
                self.event_index(w.as_ref())
                    .ok_or_else(|| LtsError::UnknownEvent(w.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut cur = self.initial;
        for e in events {
            match self.succ(cur, e) {
                Some(t) => cur = t,
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Edges as name triples, in canonical order.
    pub fn named_edges(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.edges.iter().map(|e| {
            (
                &*self.states[e.src],
                &*self.events[e.event],
                &*self.states[e.dst],
            )
        })
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Lts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lts {}", self.name)?;
        writeln!(f, "initial {}", self.states[self.initial])?;
        for (s, e, t) in self.named_edges() {
            writeln!(f, "{s} {e} {t}")?;
        }
        Ok(())
    }
}

impl FromStr for Lts {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_lts(text)
    }
}

/// Splits a line into tokens with their 1-based columns, dropping a trailing
/// comment (a token starting with `#`).
pub(crate) fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(cut) = out.iter().position(|(_, t)| t.starts_with('#')) {
        out.truncate(cut);
    }
    out.into_iter()
        .map(|(i, t)| (line[..i].chars().count() + 1, t))
        .collect()
}

/// Parses the line-oriented LTS format:
///
/// ```text
/// lts <name>
/// initial <state>
/// <src> <event> <dst>
/// ```
///
/// The `lts` header is optional (the name defaults to `lts`).
pub fn parse_lts(text: &str) -> Result<Lts, ParseError> {
    let mut name: Option<String> = None;
    let mut initial: Option<String> = None;
    let mut edges: Vec<(String, String, String)> = Vec::new();
    // first occurrence of (src, event), for nondeterminism reports
    let mut seen: BTreeMap<(String, String), String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let toks = tokens(line);
        let syntax = |column: usize, message: &str| ParseError::Syntax {
            line: lineno,
            column,
            message: message.to_string(),
        };
        match toks.as_slice() {
            [] => {}
            [(c, "lts"), rest @ ..] => {
                if name.is_some() || initial.is_some() || !edges.is_empty() {
                    return Err(syntax(*c, "`lts` header must come first"));
                }
                match rest {
                    [(_, n)] => name = Some(n.to_string()),
                    _ => return Err(syntax(*c, "expected `lts <name>`")),
                }
            }
            [(c, "initial"), rest @ ..] => {
                if initial.is_some() {
                    return Err(syntax(*c, "duplicate `initial` declaration"));
                }
                if !edges.is_empty() {
                    return Err(syntax(*c, "`initial` must precede the edges"));
                }
                match rest {
                    [(_, s)] => initial = Some(s.to_string()),
                    _ => return Err(syntax(*c, "expected `initial <state>`")),
                }
            }
            [(c, s), (_, e), (_, t)] => {
                if initial.is_none() {
                    return Err(syntax(*c, "edge before `initial` declaration"));
                }
                let key = (s.to_string(), e.to_string());
                if let Some(prev) = seen.get(&key) {
                    if prev != t {
                        return Err(LtsError::Nondeterministic {
                            state: s.to_string(),
                            event: e.to_string(),
                            first: prev.clone(),
                            second: t.to_string(),
                        }
                        .into());
                    }
                } else {
                    seen.insert(key, t.to_string());
                }
                edges.push((s.to_string(), e.to_string(), t.to_string()));
            }
            [(c, _), ..] => return Err(syntax(*c, "expected `<src> <event> <dst>`")),
        }
    }
    let initial = initial.ok_or(ParseError::MissingInitial)?;
    Ok(Lts::from_edges(
        name.as_deref().unwrap_or("lts"),
        &initial,
        edges,
    )?)
}

/// The language-membership test `word ∈ L(A)`.
pub fn is_word_in_language<S: AsRef<str>>(lts: &Lts, word: &[S]) -> Result<bool, LtsError> {
    lts.accepts(word)
}

/// Returns the isomorphism `a → b` (state indices of `a` mapped to state
/// indices of `b`) if one exists. Events are matched by name. Because both
/// systems are deterministic, initialized and reachable, the isomorphism is
/// unique and is found by a synchronized breadth-first traversal.
pub fn lts_isomorphic(a: &Lts, b: &Lts) -> Option<Vec<usize>> {
    if a.num_states() != b.num_states()
        || a.edges().len() != b.edges().len()
        || a.events != b.events
    {
        return None;
    }
    let n = a.num_states();
    let mut phi: Vec<Option<usize>> = vec![None; n];
    let mut taken = vec![false; n];
    phi[a.initial] = Some(b.initial);
    taken[b.initial] = true;
    let mut queue = VecDeque::from([a.initial]);
    while let Some(s) = queue.pop_front() {
        let image = phi[s].unwrap();
        let (outa, outb) = (a.out_edges(s), b.out_edges(image));
        if outa.len() != outb.len() {
            return None;
        }
        for (ea, eb) in outa.iter().zip(outb) {
            if ea.event != eb.event {
                return None;
            }
            match phi[ea.dst] {
                Some(t) if t != eb.dst => return None,
                Some(_) => {}
                None => {
                    if taken[eb.dst] {
                        return None;
                    }
                    taken[eb.dst] = true;
                    phi[ea.dst] = Some(eb.dst);
                    queue.push_back(ea.dst);
                }
            }
        }
    }
    phi.into_iter().collect()
}

//! Place/transition nets: synthesis from a witness, reachability graphs and
//! the three implementation checks (embedding, language simulation,
//! realization).

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lts::{lts_isomorphic, tokens, Lts, LtsError};
use crate::separation::Witness;

/// Token counts, one per place in the net's place order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(pub Vec<BigInt>);

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("duplicate place {0}")]
    DuplicatePlace(String),
    #[error("duplicate transition {0}")]
    DuplicateTransition(String),
    #[error("identifier {0} is used both as a place and as a transition")]
    NameClash(String),
    #[error("duplicate arc {0} -> {1}")]
    DuplicateArc(String, String),
    #[error("negative token count or weight {0}")]
    Negative(BigInt),
    #[error("expected {expected} places in the witness, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] NetError),
}

/// A weighted place/transition net with an initial marking.
///
/// Places and transitions keep their declaration order; markings are
/// vectors in place order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    name: String,
    places: Vec<Arc<str>>,
    transitions: Vec<Arc<str>>,
    initial: Marking,
    // indexed [transition][place]
    consume: Vec<Vec<BigInt>>,
    produce: Vec<Vec<BigInt>>,
}

impl PetriNet {
    /// A net without arcs. `places` pairs each place with its initial token count.
    pub fn new<P, T>(name: &str, places: P, transitions: T) -> Result<Self, NetError>
    where
        P: IntoIterator<Item = (String, BigInt)>,
        T: IntoIterator<Item = String>,
    {
        let mut seen = HashSet::new();
        let mut names = Vec::new();
        let mut initial = Vec::new();
        for (p, tokens) in places {
            if tokens.is_negative() {
                return Err(NetError::Negative(tokens));
            }
            if !seen.insert(p.clone()) {
                return Err(NetError::DuplicatePlace(p));
            }
            names.push(Arc::from(p.as_str()));
            initial.push(tokens);
        }
        let mut transitions_out = Vec::new();
        let mut seen_t = HashSet::new();
        for t in transitions {
            if seen.contains(&t) {
                return Err(NetError::NameClash(t));
            }
            if !seen_t.insert(t.clone()) {
                return Err(NetError::DuplicateTransition(t));
            }
            transitions_out.push(Arc::from(t.as_str()));
        }
        let zeros = vec![vec![BigInt::zero(); names.len()]; transitions_out.len()];
        Ok(PetriNet {
            name: name.to_string(),
            places: names,
            transitions: transitions_out,
            initial: Marking(initial),
            consume: zeros.clone(),
            produce: zeros,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn places(&self) -> &[Arc<str>] {
        &self.places
    }

    pub fn transitions(&self) -> &[Arc<str>] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| &**p == name)
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| &**t == name)
    }

    /// `f(p, t)`: tokens taken from place `p` when `t` fires.
    pub fn consume(&self, place: usize, transition: usize) -> &BigInt {
        &self.consume[transition][place]
    }

    /// `f(t, p)`: tokens put on place `p` when `t` fires.
    pub fn produce(&self, place: usize, transition: usize) -> &BigInt {
        &self.produce[transition][place]
    }

    pub fn set_consume(&mut self, place: usize, transition: usize, weight: BigInt) {
        self.consume[transition][place] = weight;
    }

    pub fn set_produce(&mut self, place: usize, transition: usize, weight: BigInt) {
        self.produce[transition][place] = weight;
    }

    pub fn is_enabled(&self, marking: &Marking, transition: usize) -> bool {
        marking
            .0
            .iter()
            .zip(&self.consume[transition])
            .all(|(m, c)| m >= c)
    }

    /// The marking reached by firing `transition`, or `None` if it is not enabled.
    pub fn fire(&self, marking: &Marking, transition: usize) -> Option<Marking> {
        if !self.is_enabled(marking, transition) {
            return None;
        }
        let next = marking
            .0
            .iter()
            .zip(&self.consume[transition])
            .zip(&self.produce[transition])
            .map(|((m, c), p)| m - c + p)
            .collect();
        Some(Marking(next))
    }

    /// Renders the net in the text format read by [`parse_net`].
    pub fn to_text(&self) -> String {
        let mut out = format!("net {}\n", self.name);
        for (p, m) in self.places.iter().zip(&self.initial.0) {
            out.push_str(&format!("place {p} {m}\n"));
        }
        for t in &self.transitions {
            out.push_str(&format!("transition {t}\n"));
        }
        for (ti, t) in self.transitions.iter().enumerate() {
            for (pi, p) in self.places.iter().enumerate() {
                let c = &self.consume[ti][pi];
                if !c.is_zero() {
                    out.push_str(&format!("arc {p} {t} {c}\n"));
                }
                let w = &self.produce[ti][pi];
                if !w.is_zero() {
                    out.push_str(&format!("arc {t} {p} {w}\n"));
                }
            }
        }
        out
    }
}

impl fmt::Display for PetriNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for PetriNet {
    type Err = NetParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_net(text)
    }
}

/// Parses the net format:
///
/// ```text
/// net <name>
/// place <id> <tokens>
/// transition <id>
/// arc <place> <transition> <weight>
/// arc <transition> <place> <weight>
/// ```
///
/// Declarations may appear in any order before the arcs that use them.
pub fn parse_net(text: &str) -> Result<PetriNet, NetParseError> {
    enum Line {
        Place(String, BigInt),
        Transition(String),
        Arc(usize, usize, String, String, BigInt),
    }
    let mut name = None;
    let mut lines = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let syntax = |column: usize, message: &str| NetParseError::Syntax {
            line: lineno + 1,
            column,
            message: message.to_string(),
        };
        let number = |(c, t): (usize, &str)| {
            t.parse::<BigInt>()
                .map_err(|_| syntax(c, "expected a nonnegative integer"))
                .and_then(|v| {
                    if v.is_negative() {
                        Err(syntax(c, "expected a nonnegative integer"))
                    } else {
                        Ok(v)
                    }
                })
        };
        match tokens(line).as_slice() {
            [] => {}
            [(c, "net"), rest @ ..] => match (rest, &name) {
                ([(_, n)], None) if lines.is_empty() => name = Some(n.to_string()),
                _ => return Err(syntax(*c, "expected a single leading `net <name>`")),
            },
            [(_, "place"), (_, p), tok] => lines.push(Line::Place(p.to_string(), number(*tok)?)),
            [(_, "transition"), (_, t)] => lines.push(Line::Transition(t.to_string())),
            [(c, "arc"), (_, a), (_, b), tok] => {
                lines.push(Line::Arc(lineno + 1, *c, a.to_string(), b.to_string(), number(*tok)?))
            }
            [(c, kw), ..] if matches!(*kw, "place" | "transition" | "arc") => {
                return Err(syntax(*c, &format!("malformed `{kw}` line")))
            }
            [(c, _), ..] => return Err(syntax(*c, "expected `place`, `transition` or `arc`")),
        }
    }
    let places = lines.iter().filter_map(|l| match l {
        Line::Place(p, m) => Some((p.clone(), m.clone())),
        _ => None,
    });
    let transitions = lines.iter().filter_map(|l| match l {
        Line::Transition(t) => Some(t.clone()),
        _ => None,
    });
    let mut net = PetriNet::new(name.as_deref().unwrap_or("net"), places.collect::<Vec<_>>(), transitions.collect::<Vec<_>>())?;
    let mut seen = HashSet::new();
    for l in lines {
        let Line::Arc(line, column, a, b, w) = l else { continue };
        let unknown = || NetParseError::Syntax {
            line,
            column,
            message: format!("arc {a} -> {b} must connect a declared place and transition"),
        };
        if !seen.insert((a.clone(), b.clone())) {
            return Err(NetError::DuplicateArc(a, b).into());
        }
        match (net.place_index(&a), net.transition_index(&b)) {
            (Some(p), Some(t)) => net.set_consume(p, t, w),
            _ => match (net.transition_index(&a), net.place_index(&b)) {
                (Some(t), Some(p)) => net.set_produce(p, t, w),
                _ => return Err(unknown()),
            },
        }
    }
    Ok(net)
}

/// The synthesized net of a witness: one place `R<i>` per region with
/// `f(R, e) = con(e)`, `f(e, R) = pro(e)` and `M0(R) = sup(ι)`, and one
/// transition per event.
pub fn synthesized_net(lts: &Lts, witness: &Witness) -> Result<PetriNet, NetError> {
    for r in &witness.regions {
        if r.sup.len() != lts.num_states() || r.con.len() != lts.num_events() || r.pro.len() != lts.num_events() {
            return Err(NetError::Arity {
                expected: lts.num_states(),
                got: r.sup.len(),
            });
        }
    }
    let events: HashSet<&str> = lts.event_names().collect();
    let place_name = |i: usize| {
        let mut p = format!("R{i}");
        while events.contains(p.as_str()) {
            p.insert(0, '_');
        }
        p
    };
    let places = witness
        .regions
        .iter()
        .enumerate()
        .map(|(i, r)| (place_name(i), r.sup[lts.initial()].clone()));
    let mut net = PetriNet::new(
        lts.name(),
        places.collect::<Vec<_>>(),
        lts.event_names().map(str::to_string).collect::<Vec<_>>(),
    )?;
    for (p, r) in witness.regions.iter().enumerate() {
        for e in 0..lts.num_events() {
            net.set_consume(p, e, r.con[e].clone());
            net.set_produce(p, e, r.pro[e].clone());
        }
    }
    Ok(net)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachabilityError {
    #[error("more than {cap} reachable markings (explored {explored})")]
    CapExceeded { cap: usize, explored: usize },
    #[error(transparent)]
    Invalid(#[from] LtsError),
}

/// Breadth-first exploration of the reachable markings. States of the
/// returned LTS are named by their markings, e.g. `(8)` or `(1,0,2)`.
/// Fails as soon as more than `cap` markings have been discovered.
pub fn reachability_graph(net: &PetriNet, cap: usize) -> Result<Lts, ReachabilityError> {
    let markings = explore(net, cap)?;
    let edges: Vec<(String, String, String)> = markings
        .firings
        .iter()
        .map(|&(m, t, m2)| {
            (
                markings.states[m].to_string(),
                net.transitions[t].to_string(),
                markings.states[m2].to_string(),
            )
        })
        .collect();
    Ok(Lts::from_edges(net.name(), &net.initial.to_string(), edges)?)
}

struct Exploration {
    states: Vec<Marking>,
    firings: Vec<(usize, usize, usize)>,
}

fn explore(net: &PetriNet, cap: usize) -> Result<Exploration, ReachabilityError> {
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut states = vec![net.initial.clone()];
    index.insert(net.initial.clone(), 0);
    let mut firings = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    if cap == 0 {
        return Err(ReachabilityError::CapExceeded { cap, explored: 1 });
    }
    while let Some(m) = queue.pop_front() {
        for t in 0..net.transitions.len() {
            let Some(next) = net.fire(&states[m], t) else { continue };
            let target = match index.get(&next) {
                Some(&i) => i,
                None => {
                    if states.len() == cap {
                        return Err(ReachabilityError::CapExceeded {
                            cap,
                            explored: cap + 1,
                        });
                    }
                    let i = states.len();
                    index.insert(next.clone(), i);
                    states.push(next);
                    queue.push_back(i);
                    i
                }
            };
            firings.push((m, t, target));
        }
    }
    Ok(Exploration { states, firings })
}

/// Why an LTS is not implemented by a net in the requested sense.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationFailure {
    #[error("net transitions differ from LTS events: {0}")]
    TransitionMismatch(String),
    #[error("edge {state} {event} is not enabled at the image {marking}")]
    NotEnabled {
        state: String,
        event: String,
        marking: String,
    },
    #[error("state {state} is mapped to both {first} and {second}")]
    Inconsistent {
        state: String,
        first: String,
        second: String,
    },
    #[error("injectivity violated: {first} and {second} both map to {marking}")]
    NotInjective {
        first: String,
        second: String,
        marking: String,
    },
    /// `(event, state)` pairs where the event is enabled at the image of a
    /// state it does not occur at.
    #[error("events enabled at images of states lacking them: {}", render_pairs(.0))]
    ExtraEvents(Vec<(String, String)>),
    #[error("reachability graph exceeds {cap} markings")]
    TooManyMarkings { cap: usize },
    #[error("reachability graph is not isomorphic to the LTS")]
    NotIsomorphic,
}

fn render_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(e, s)| format!("({e}, {s})"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Maps each event of `lts` to the net transition of the same name.
fn align(lts: &Lts, net: &PetriNet) -> Result<Vec<usize>, RelationFailure> {
    let mut missing: Vec<String> = Vec::new();
    let mut map = Vec::with_capacity(lts.num_events());
    for e in lts.event_names() {
        match net.transition_index(e) {
            Some(t) => map.push(t),
            None => missing.push(format!("event {e} has no transition")),
        }
    }
    for t in net.transitions() {
        if lts.event_index(t).is_none() {
            missing.push(format!("transition {t} is not an event"));
        }
    }
    if missing.is_empty() {
        Ok(map)
    } else {
        Err(RelationFailure::TransitionMismatch(missing.join(", ")))
    }
}

/// The simulation map `φ` induced by the net: `φ(ι) = M0` and `φ` follows
/// the firing rule along every edge of `lts`. For a synthesized net this is
/// exactly `φ(s) = (sup_R(s))_R`.
fn simulation_map(lts: &Lts, net: &PetriNet, trans: &[usize]) -> Result<Vec<Marking>, RelationFailure> {
    let mut phi: Vec<Option<Marking>> = vec![None; lts.num_states()];
    phi[lts.initial()] = Some(net.initial.clone());
    for &s in lts.bfs_order() {
        let here = phi[s].clone().expect("breadth-first order visits sources first");
        for edge in lts.out_edges(s) {
            let Some(next) = net.fire(&here, trans[edge.event]) else {
                return Err(RelationFailure::NotEnabled {
                    state: lts.state_name(s).to_string(),
                    event: lts.event_name(edge.event).to_string(),
                    marking: here.to_string(),
                });
            };
            match &phi[edge.dst] {
                Some(prev) if *prev != next => {
                    return Err(RelationFailure::Inconsistent {
                        state: lts.state_name(edge.dst).to_string(),
                        first: prev.to_string(),
                        second: next.to_string(),
                    })
                }
                Some(_) => {}
                None => phi[edge.dst] = Some(next),
            }
        }
    }
    Ok(phi.into_iter().map(|m| m.expect("all states are reachable")).collect())
}

/// Checks that `net` embeds `lts` and returns the injective simulation map,
/// indexed by state.
pub fn verify_embedding(lts: &Lts, net: &PetriNet) -> Result<Vec<Marking>, RelationFailure> {
    let trans = align(lts, net)?;
    let phi = simulation_map(lts, net, &trans)?;
    let mut owner: BTreeMap<&Marking, usize> = BTreeMap::new();
    for (s, m) in phi.iter().enumerate() {
        if let Some(&first) = owner.get(m) {
            return Err(RelationFailure::NotInjective {
                first: lts.state_name(first).to_string(),
                second: lts.state_name(s).to_string(),
                marking: m.to_string(),
            });
        }
        owner.insert(m, s);
    }
    Ok(phi)
}

/// Checks that `net` simulates `lts` and that every event missing at a
/// state is disabled at the state's image. All offending pairs are
/// reported, events first.
pub fn verify_language_simulation(lts: &Lts, net: &PetriNet) -> Result<(), RelationFailure> {
    let trans = align(lts, net)?;
    let phi = simulation_map(lts, net, &trans)?;
    let mut extra = Vec::new();
    for e in 0..lts.num_events() {
        for s in 0..lts.num_states() {
            if lts.succ(s, e).is_none() && net.is_enabled(&phi[s], trans[e]) {
                extra.push((lts.event_name(e).to_string(), lts.state_name(s).to_string()));
            }
        }
    }
    if extra.is_empty() {
        Ok(())
    } else {
        Err(RelationFailure::ExtraEvents(extra))
    }
}

/// Checks that the reachability graph of `net` is isomorphic to `lts`.
/// Exploration stops after `|S|` markings, since an isomorphic graph has
/// exactly that many.
pub fn verify_realization(lts: &Lts, net: &PetriNet) -> Result<(), RelationFailure> {
    align(lts, net)?;
    let cap = lts.num_states();
    let rg = match reachability_graph(net, cap) {
        Ok(rg) => rg,
        Err(ReachabilityError::CapExceeded { .. }) => {
            return Err(RelationFailure::TooManyMarkings { cap })
        }
        // a marking rendered like an event name; such a graph cannot match `lts`
        Err(ReachabilityError::Invalid(_)) => return Err(RelationFailure::NotIsomorphic),
    };
    lts_isomorphic(lts, &rg)
        .map(|_| ())
        .ok_or(RelationFailure::NotIsomorphic)
}

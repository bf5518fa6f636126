//! Runs, labelled, complete and ready traces, and the decision procedures
//! for the trace relations, both depth-bounded and exact.
//!
//! Depth-bounded relations at depth `k`:
//!
//! * `tr`: every labelled trace of length `≤ k` on the left is matched on the
//!   right by a trace with the same actions and pointwise larger valuations.
//! * `ltr`: as `tr` with equal valuations.
//! * `cltr`: labelled traces of length `≤ k` agree in both directions, and so
//!   do complete traces of length `< k`. A complete trace of length `n` only
//!   becomes observable after `n + 1` steps, which is why the deadlock
//!   modality counts as depth one.
//! * `gltr`: every labelled trace has the same number of maximal runs of depth
//!   at most `k` on both sides (a run is maximal when it has length `k` or ends
//!   in a terminal state). This is the relation witnessed by isomorphisms of
//!   linear unravelings.
//! * `rt`: ready traces of length `≤ k` agree, where the ready set of the last
//!   position is recorded only when it is observable, i.e. at positions `< k`.
//!
//! Exact decisions for `tr`, `ltr` and `cltr` run a subset construction over
//! the product of the left structure and the powerset of the right one.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::structures::{bits, Kripke, PointedStructure};

/// An alternating state/action sequence starting at the point.
/// States and actions are indices into a [`Kripke`] view.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last(&self) -> usize {
        *self.states.last().expect("runs have at least one state")
    }

    pub fn trace(&self, k: &Kripke) -> LabelledTrace {
        LabelledTrace {
            valuations: self.states.iter().map(|&s| k.val[s]).collect(),
            actions: self.actions.clone(),
            complete: false,
        }
    }

    pub fn ready_trace(&self, k: &Kripke, observed: usize) -> ReadyTrace {
        ReadyTrace {
            valuations: self.states.iter().map(|&s| k.val[s]).collect(),
            ready: self.states.iter().take(observed).map(|&s| k.ready(s)).collect(),
            actions: self.actions.clone(),
        }
    }

    pub fn is_valid(&self, k: &Kripke) -> bool {
        self.states.len() == self.actions.len() + 1
            && self.states[0] == k.point
            && self
                .actions
                .iter()
                .enumerate()
                .all(|(i, &a)| k.succ[a][self.states[i]].binary_search(&self.states[i + 1]).is_ok())
    }

    pub fn render(&self, k: &Kripke) -> String {
        let mut out = k.names[self.states[0]].clone();
        for (i, &a) in self.actions.iter().enumerate() {
            out.push_str(&format!(" -{}-> {}", k.acts[a], k.names[self.states[i + 1]]));
        }
        out
    }
}

/// Valuations `V(a0) … V(an)` as bit sets and the actions between them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelledTrace {
    pub valuations: Vec<u64>,
    pub actions: Vec<usize>,
    pub complete: bool,
}

impl LabelledTrace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn word(&self) -> (Vec<u64>, Vec<usize>) {
        (self.valuations.clone(), self.actions.clone())
    }

    fn key(&self) -> (usize, u64, Vec<(usize, u64)>, bool) {
        let steps = self.actions.iter().zip(&self.valuations[1..]).map(|(&a, &v)| (a, v)).collect();
        (self.len(), self.valuations[0], steps, self.complete)
    }

    /// Renders as `V0 -α1-> V1 …` with a trailing `!` on complete traces.
    pub fn render(&self, props: &[String], acts: &[String]) -> String {
        let mut out = render_set(self.valuations[0], props);
        for (a, v) in self.actions.iter().zip(&self.valuations[1..]) {
            out.push_str(&format!(" -{}-> {}", acts[*a], render_set(*v, props)));
        }
        if self.complete {
            out.push('!');
        }
        out
    }
}

/// Shortlex order: shorter traces first, then lexicographic on the word.
impl Ord for LabelledTrace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for LabelledTrace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A labelled trace annotated with ready sets. `ready[i]` is `I(x_i)`; the
/// vector is one shorter than `valuations` when the last ready set lies
/// beyond the observation depth.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReadyTrace {
    pub valuations: Vec<u64>,
    pub ready: Vec<u64>,
    pub actions: Vec<usize>,
}

impl ReadyTrace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    fn key(&self) -> (usize, Vec<u64>, Vec<usize>, Vec<u64>) {
        (self.len(), self.valuations.clone(), self.actions.clone(), self.ready.clone())
    }

    /// Renders as `V0[X0] -α1-> V1[X1] …`; an unobserved ready set prints as `[?]`.
    pub fn render(&self, props: &[String], acts: &[String]) -> String {
        let ready = |i: usize| match self.ready.get(i) {
            Some(&x) => format!("[{}]", set_names(x, acts).join(",")),
            None => "[?]".to_string(),
        };
        let mut out = format!("{}{}", render_set(self.valuations[0], props), ready(0));
        for (i, a) in self.actions.iter().enumerate() {
            out.push_str(&format!(
                " -{}-> {}{}",
                acts[*a],
                render_set(self.valuations[i + 1], props),
                ready(i + 1)
            ));
        }
        out
    }
}

impl Ord for ReadyTrace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for ReadyTrace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn set_names(v: u64, names: &[String]) -> Vec<String> {
    bits(v).map(|i| names[i].clone()).collect()
}

/// Sorted brace set such as `{p,q}`.
pub fn render_set(v: u64, names: &[String]) -> String {
    format!("{{{}}}", set_names(v, names).join(","))
}

/// Runs of length exactly `n`, in depth-first order (actions, then
/// successors, ascending).
pub fn enumerate_runs(p: &PointedStructure, n: usize) -> Result<Vec<Run>> {
    let k = Kripke::new(p)?;
    Ok(runs_upto(&k, n).into_iter().filter(|r| r.len() == n).collect())
}

/// All runs of length at most `depth`, in depth-first preorder.
pub fn runs_upto(k: &Kripke, depth: usize) -> Vec<Run> {
    let mut out = Vec::new();
    let mut run = Run { states: vec![k.point], actions: Vec::new() };
    collect_runs(k, depth, &mut run, &mut out);
    out
}

fn collect_runs(k: &Kripke, depth: usize, run: &mut Run, out: &mut Vec<Run>) {
    out.push(run.clone());
    if run.len() == depth {
        return;
    }
    let x = run.last();
    for a in 0..k.acts.len() {
        for &y in &k.succ[a][x] {
            run.states.push(y);
            run.actions.push(a);
            collect_runs(k, depth, run, out);
            run.states.pop();
            run.actions.pop();
        }
    }
}

/// Runs that cannot be extended within depth `depth`: those of length
/// `depth` and those ending in a terminal state.
pub fn maximal_runs(k: &Kripke, depth: usize) -> Vec<Run> {
    runs_upto(k, depth).into_iter().filter(|r| r.len() == depth || k.is_terminal(r.last())).collect()
}

/// Which trace set to list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    Labelled,
    Complete,
    Ready,
}

/// A sorted, duplicate-free list of traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceList {
    Labelled(Vec<LabelledTrace>),
    Ready(Vec<ReadyTrace>),
}

impl TraceList {
    pub fn len(&self) -> usize {
        match self {
            TraceList::Labelled(v) => v.len(),
            TraceList::Ready(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Traces of length `≤ k` of the given kind, in shortlex order. Complete
/// traces carry the completeness mark; labelled traces do not.
pub fn traces_upto(p: &PointedStructure, k: usize, kind: TraceKind) -> Result<TraceList> {
    let kr = Kripke::new(p)?;
    Ok(match kind {
        TraceKind::Labelled => TraceList::Labelled(labelled_set(&kr, k).into_iter().collect()),
        TraceKind::Complete => TraceList::Labelled(complete_set(&kr, k).into_iter().collect()),
        TraceKind::Ready => TraceList::Ready(ready_set(&kr, k).into_iter().collect()),
    })
}

pub(crate) fn labelled_set(k: &Kripke, depth: usize) -> BTreeSet<LabelledTrace> {
    runs_upto(k, depth).iter().map(|r| r.trace(k)).collect()
}

pub(crate) fn complete_set(k: &Kripke, depth: usize) -> BTreeSet<LabelledTrace> {
    runs_upto(k, depth)
        .iter()
        .filter(|r| k.is_terminal(r.last()))
        .map(|r| LabelledTrace { complete: true, ..r.trace(k) })
        .collect()
}

pub(crate) fn ready_set(k: &Kripke, depth: usize) -> BTreeSet<ReadyTrace> {
    runs_upto(k, depth)
        .iter()
        .map(|r| r.ready_trace(k, if r.len() < depth { r.len() + 1 } else { r.len() }))
        .collect()
}

/// Number of maximal runs (depth `depth`) per trace word. Traces of maximal
/// runs shorter than `depth` are marked complete.
pub fn maximal_trace_counts(k: &Kripke, depth: usize) -> BTreeMap<LabelledTrace, usize> {
    let mut counts = BTreeMap::new();
    for r in maximal_runs(k, depth) {
        let t = LabelledTrace { complete: r.len() < depth, ..r.trace(k) };
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

/// Finite automaton over the alphabet of (action, target valuation) pairs
/// whose words are the labelled traces of a pointed structure (after the
/// initial output valuation); terminal states accept the complete traces.
#[derive(Clone, Debug)]
pub struct TraceAutomaton {
    pub props: Vec<String>,
    pub acts: Vec<String>,
    /// Element ids of the states (the part reachable from the point).
    pub states: Vec<String>,
    pub initial: usize,
    pub initial_valuation: u64,
    /// `transitions[q]`: sorted `(action, valuation, target)` triples.
    pub transitions: Vec<Vec<(usize, u64, usize)>>,
    pub terminal: Vec<bool>,
}

/// Automaton on the reachable part of `p`; state `i` is the `i`-th reachable
/// element in universe order.
pub fn build_trace_automaton(p: &PointedStructure) -> Result<TraceAutomaton> {
    let k = Kripke::new(p)?;
    Ok(automaton_of(&k))
}

fn automaton_of(k: &Kripke) -> TraceAutomaton {
    let mut reach = vec![false; k.len()];
    reach[k.point] = true;
    let mut stack = vec![k.point];
    while let Some(x) = stack.pop() {
        for s in &k.succ {
            for &y in &s[x] {
                if !reach[y] {
                    reach[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    let elems: Vec<usize> = (0..k.len()).filter(|&x| reach[x]).collect();
    let mut renum = vec![usize::MAX; k.len()];
    for (i, &x) in elems.iter().enumerate() {
        renum[x] = i;
    }
    let transitions = elems
        .iter()
        .map(|&x| {
            let mut ts: Vec<(usize, u64, usize)> = (0..k.acts.len())
                .flat_map(|a| k.succ[a][x].iter().map(move |&y| (a, y)))
                .map(|(a, y)| (a, k.val[y], renum[y]))
                .collect();
            ts.sort();
            ts
        })
        .collect();
    TraceAutomaton {
        props: k.props.clone(),
        acts: k.acts.clone(),
        states: elems.iter().map(|&x| k.names[x].clone()).collect(),
        initial: renum[k.point],
        initial_valuation: k.val[k.point],
        transitions,
        terminal: elems.iter().map(|&x| k.is_terminal(x)).collect(),
    }
}

impl TraceAutomaton {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Whether the trace is in the language (complete traces must end in a
    /// terminal state).
    pub fn accepts(&self, t: &LabelledTrace) -> bool {
        if t.valuations[0] != self.initial_valuation {
            return false;
        }
        let mut cur = BTreeSet::from([self.initial]);
        for (a, v) in t.actions.iter().zip(&t.valuations[1..]) {
            cur = cur
                .iter()
                .flat_map(|&q| self.transitions[q].iter())
                .filter(|(b, w, _)| b == a && w == v)
                .map(|&(_, _, r)| r)
                .collect();
        }
        if t.complete {
            cur.iter().any(|&q| self.terminal[q])
        } else {
            !cur.is_empty()
        }
    }

    /// Number of distinct words of length exactly `n` (complete words when
    /// `complete` is set), by determinization.
    pub fn count_words(&self, n: usize, complete: bool) -> usize {
        let mut layer: BTreeMap<Vec<usize>, usize> = BTreeMap::from([(vec![self.initial], 1)]);
        for _ in 0..n {
            let mut next: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for (set, count) in &layer {
                let mut by_symbol: BTreeMap<(usize, u64), BTreeSet<usize>> = BTreeMap::new();
                for &q in set {
                    for &(a, v, r) in &self.transitions[q] {
                        by_symbol.entry((a, v)).or_default().insert(r);
                    }
                }
                for targets in by_symbol.into_values() {
                    *next.entry(targets.into_iter().collect()).or_insert(0) += count;
                }
            }
            layer = next;
        }
        layer
            .iter()
            .filter(|(set, _)| !complete || set.iter().any(|&q| self.terminal[q]))
            .map(|(_, c)| c)
            .sum()
    }
}

/// How valuations along matched traces must relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Match {
    Subset,
    Equal,
}

impl Match {
    fn ok(self, left: u64, right: u64) -> bool {
        match self {
            Match::Subset => left & !right == 0,
            Match::Equal => left == right,
        }
    }
}

/// A shortest trace of `a` not matched in `b`, by breadth-first search
/// over pairs (state of `a`, set of matching states of `b`). With
/// `complete`, complete traces of `a` must also be complete in `b`.
fn inclusion_counterexample(
    a: &TraceAutomaton,
    b: &TraceAutomaton,
    mode: Match,
    complete: bool,
) -> Option<LabelledTrace> {
    let start_set: Vec<usize> =
        if mode.ok(a.initial_valuation, b.initial_valuation) { vec![b.initial] } else { vec![] };
    let fails = |q: usize, set: &[usize]| -> Option<bool> {
        if set.is_empty() {
            Some(false)
        } else if complete && a.terminal[q] && !set.iter().any(|&r| b.terminal[r]) {
            Some(true)
        } else {
            None
        }
    };
    type Node = (usize, Vec<usize>);
    let mut parent: Vec<(Option<usize>, usize, u64)> = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen: HashSet<Node> = HashSet::new();
    let mut queue = VecDeque::new();
    let rebuild = |parent: &Vec<(Option<usize>, usize, u64)>, mut i: usize, c: bool| {
        let mut actions = Vec::new();
        let mut vals = Vec::new();
        while let (Some(p), act, val) = parent[i] {
            actions.push(act);
            vals.push(val);
            i = p;
        }
        vals.push(a.initial_valuation);
        actions.reverse();
        vals.reverse();
        LabelledTrace { valuations: vals, actions, complete: c }
    };
    let root = (a.initial, start_set);
    seen.insert(root.clone());
    nodes.push(root);
    parent.push((None, 0, 0));
    if let Some(c) = fails(nodes[0].0, &nodes[0].1) {
        return Some(rebuild(&parent, 0, c));
    }
    queue.push_back(0usize);
    while let Some(i) = queue.pop_front() {
        let (q, set) = nodes[i].clone();
        for &(act, val, q2) in &a.transitions[q] {
            let mut next: Vec<usize> = set
                .iter()
                .flat_map(|&r| b.transitions[r].iter())
                .filter(|&&(bact, bval, _)| bact == act && mode.ok(val, bval))
                .map(|&(_, _, r2)| r2)
                .collect();
            next.sort_unstable();
            next.dedup();
            let node = (q2, next);
            if seen.insert(node.clone()) {
                let j = nodes.len();
                nodes.push(node);
                parent.push((Some(i), act, val));
                if let Some(c) = fails(nodes[j].0, &nodes[j].1) {
                    return Some(rebuild(&parent, j, c));
                }
                queue.push_back(j);
            }
        }
    }
    None
}

/// A trace relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Tr,
    Ltr,
    Cltr,
    Gltr,
    Rt,
}

impl Relation {
    pub const ALL: [Relation; 5] =
        [Relation::Tr, Relation::Ltr, Relation::Cltr, Relation::Gltr, Relation::Rt];

    pub fn name(self) -> &'static str {
        match self {
            Relation::Tr => "tr",
            Relation::Ltr => "ltr",
            Relation::Cltr => "cltr",
            Relation::Gltr => "gltr",
            Relation::Rt => "rt",
        }
    }

    /// Whether the verdict compares the left structure against the right one
    /// only (as opposed to a symmetric equivalence).
    pub fn is_directed(self) -> bool {
        matches!(self, Relation::Tr | Relation::Ltr)
    }
}

impl std::str::FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown relation `{s}`")))
    }
}

/// Depth bound of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Depth(usize),
    Exact,
}

/// Which structure exhibits a witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Why a trace relation fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceWitness {
    /// A trace of `side` without a match on the other side.
    Labelled { side: Side, trace: LabelledTrace },
    /// A ready trace of `side` missing on the other side.
    Ready { side: Side, trace: ReadyTrace },
    /// A maximal-run trace whose run counts differ.
    Count { trace: LabelledTrace, left: usize, right: usize },
}

impl TraceWitness {
    pub fn render(&self, props: &[String], acts: &[String]) -> String {
        match self {
            TraceWitness::Labelled { side, trace } => {
                format!("{side}: {}", trace.render(props, acts))
            }
            TraceWitness::Ready { side, trace } => format!("{side}: {}", trace.render(props, acts)),
            TraceWitness::Count { trace, left, right } => {
                format!("{} runs {left} vs {right}", trace.render(props, acts))
            }
        }
    }

    /// The labelled trace carried by the witness, when there is one.
    pub fn labelled(&self) -> Option<(&LabelledTrace, Option<Side>)> {
        match self {
            TraceWitness::Labelled { side, trace } => Some((trace, Some(*side))),
            TraceWitness::Count { trace, .. } => Some((trace, None)),
            TraceWitness::Ready { .. } => None,
        }
    }
}

/// Outcome of a relation check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<TraceWitness>,
}

impl Verdict {
    fn from_witness(witness: Option<TraceWitness>) -> Self {
        Verdict { holds: witness.is_none(), witness }
    }
}

fn kripke_pair(a: &PointedStructure, b: &PointedStructure) -> Result<(Kripke, Kripke)> {
    a.signature().check_compatible(b.signature())?;
    Ok((Kripke::new(a)?, Kripke::new(b)?))
}

/// Decides `rel` between `a` (left) and `b` (right).
pub fn check_trace_relation(
    rel: Relation,
    a: &PointedStructure,
    b: &PointedStructure,
    bound: Bound,
) -> Result<Verdict> {
    let (ka, kb) = kripke_pair(a, b)?;
    match bound {
        Bound::Depth(k) => Ok(match rel {
            Relation::Tr => bounded_tr(&ka, &kb, k, Match::Subset),
            Relation::Ltr => bounded_tr(&ka, &kb, k, Match::Equal),
            Relation::Cltr => bounded_cltr(&ka, &kb, k),
            Relation::Rt => bounded_rt(&ka, &kb, k),
            Relation::Gltr => gltr_by_isomorphism(a, b, &ka, &kb, k)?,
        }),
        Bound::Exact => {
            let (aa, ab) = (automaton_of(&ka), automaton_of(&kb));
            let side = |s: Side, t: Option<LabelledTrace>| {
                t.map(|trace| TraceWitness::Labelled { side: s, trace })
            };
            Ok(match rel {
                Relation::Tr => Verdict::from_witness(side(
                    Side::Left,
                    inclusion_counterexample(&aa, &ab, Match::Subset, false),
                )),
                Relation::Ltr => Verdict::from_witness(side(
                    Side::Left,
                    inclusion_counterexample(&aa, &ab, Match::Equal, false),
                )),
                Relation::Cltr => {
                    let l = side(Side::Left, inclusion_counterexample(&aa, &ab, Match::Equal, true));
                    let r = side(Side::Right, inclusion_counterexample(&ab, &aa, Match::Equal, true));
                    Verdict::from_witness(least_witness(l, r))
                }
                Relation::Gltr | Relation::Rt => {
                    return Err(Error::Unsupported(format!(
                        "exact mode is only available for tr, ltr and cltr, not {}",
                        rel.name()
                    )))
                }
            })
        }
    }
}

fn least_witness(l: Option<TraceWitness>, r: Option<TraceWitness>) -> Option<TraceWitness> {
    match (l, r) {
        (Some(x), Some(y)) => {
            let (tx, _) = x.labelled().expect("labelled witness");
            let (ty, _) = y.labelled().expect("labelled witness");
            Some(if ty < tx { y } else { x })
        }
        (x, y) => x.or(y),
    }
}

/// States of `b` reachable along a run matching `t` under `mode`.
#[cfg(test)]
fn matching_states(b: &Kripke, t: &LabelledTrace, mode: Match) -> BTreeSet<usize> {
    let mut cur = BTreeSet::new();
    if mode.ok(t.valuations[0], b.val[b.point]) {
        cur.insert(b.point);
    }
    for (&act, &v) in t.actions.iter().zip(&t.valuations[1..]) {
        cur = cur
            .iter()
            .flat_map(|&x| b.succ[act][x].iter().copied())
            .filter(|&y| mode.ok(v, b.val[y]))
            .collect();
    }
    cur
}

/// The least trace of `a` of length `≤ k` without a matching run in `b`,
/// or, up to length `complete_limit`, the least complete trace of `a`
/// matched by no complete run of `b`. Explores pairs (state of `a`, set of
/// matching states of `b`) level by level in shortlex order of the traces
/// reaching them, keeping only the first trace per pair.
fn bounded_counterexample(
    a: &Kripke,
    b: &Kripke,
    k: usize,
    mode: Match,
    complete_limit: Option<usize>,
) -> Option<LabelledTrace> {
    type Entry = (LabelledTrace, usize, Vec<usize>);
    let start: Vec<usize> = if mode.ok(a.val[a.point], b.val[b.point]) { vec![b.point] } else { vec![] };
    let root = LabelledTrace { valuations: vec![a.val[a.point]], actions: Vec::new(), complete: false };
    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::from([(a.point, start.clone())]);
    let mut level: Vec<Entry> = vec![(root, a.point, start)];
    for depth in 0..=k {
        let complete_ok = complete_limit.is_some_and(|c| depth <= c);
        let found = level
            .iter()
            .filter_map(|(t, x, set)| {
                if set.is_empty() {
                    Some(t.clone())
                } else if complete_ok && a.is_terminal(*x) && !set.iter().any(|&y| b.is_terminal(y)) {
                    Some(LabelledTrace { complete: true, ..t.clone() })
                } else {
                    None
                }
            })
            .min();
        if found.is_some() || depth == k {
            return found;
        }
        let mut next: Vec<Entry> = Vec::new();
        for (t, x, set) in &level {
            for act in 0..a.acts.len() {
                for &y in &a.succ[act][*x] {
                    let mut s2: Vec<usize> = set
                        .iter()
                        .flat_map(|&z| b.succ[act][z].iter().copied())
                        .filter(|&z| mode.ok(a.val[y], b.val[z]))
                        .collect();
                    s2.sort_unstable();
                    s2.dedup();
                    let mut t2 = t.clone();
                    t2.actions.push(act);
                    t2.valuations.push(a.val[y]);
                    next.push((t2, y, s2));
                }
            }
        }
        next.sort_by(|p, q| p.0.cmp(&q.0));
        level = next.into_iter().filter(|(_, y, s2)| seen.insert((*y, s2.clone()))).collect();
    }
    None
}

fn bounded_tr(a: &Kripke, b: &Kripke, k: usize, mode: Match) -> Verdict {
    let witness =
        bounded_counterexample(a, b, k, mode, None).map(|trace| TraceWitness::Labelled { side: Side::Left, trace });
    Verdict::from_witness(witness)
}

fn first_missing<T: Ord + Clone>(x: &BTreeSet<T>, y: &BTreeSet<T>) -> Option<T> {
    x.iter().find(|t| !y.contains(t)).cloned()
}

fn bounded_cltr(a: &Kripke, b: &Kripke, k: usize) -> Verdict {
    let climit = k.checked_sub(1);
    let left = bounded_counterexample(a, b, k, Match::Equal, climit);
    let right = bounded_counterexample(b, a, k, Match::Equal, climit);
    let wrap = |side, t: Option<LabelledTrace>| t.map(|trace| TraceWitness::Labelled { side, trace });
    Verdict::from_witness(least_witness(wrap(Side::Left, left), wrap(Side::Right, right)))
}

fn bounded_rt(a: &Kripke, b: &Kripke, k: usize) -> Verdict {
    let (ra, rb) = (ready_set(a, k), ready_set(b, k));
    let left = first_missing(&ra, &rb).map(|trace| (trace, Side::Left));
    let right = first_missing(&rb, &ra).map(|trace| (trace, Side::Right));
    let best = match (left, right) {
        (Some(l), Some(r)) => Some(if r.0 < l.0 { r } else { l }),
        (l, r) => l.or(r),
    };
    Verdict::from_witness(best.map(|(trace, side)| TraceWitness::Ready { side, trace }))
}

/// Least trace whose maximal-run counts differ, if any.
pub(crate) fn count_mismatch(a: &Kripke, b: &Kripke, k: usize) -> Option<TraceWitness> {
    let (ca, cb) = (maximal_trace_counts(a, k), maximal_trace_counts(b, k));
    let keys: BTreeSet<&LabelledTrace> = ca.keys().chain(cb.keys()).collect();
    let mismatch = keys
        .into_iter()
        .map(|t| (t, ca.get(t).copied().unwrap_or(0), cb.get(t).copied().unwrap_or(0)))
        .find(|(_, l, r)| l != r);
    mismatch.map(|(t, left, right)| TraceWitness::Count { trace: t.clone(), left, right })
}

fn gltr_by_isomorphism(
    a: &PointedStructure,
    b: &PointedStructure,
    ka: &Kripke,
    kb: &Kripke,
    k: usize,
) -> Result<Verdict> {
    let ua = crate::unravel::ml_unravel(a, k)?;
    let ub = crate::unravel::ml_unravel(b, k)?;
    let iso = crate::oracle::find_morphism(&ua, &ub, crate::oracle::MorphismKind::Isomorphism)?;
    Ok(match iso {
        Some(_) => Verdict { holds: true, witness: None },
        None => Verdict { holds: false, witness: count_mismatch(ka, kb, k) },
    })
}

/// Direct decision of `gltr` at depth `k`: recursively matches the maximal
/// runs of both sides step by step and returns an explicit trace-preserving
/// bijection between them, or `None` when no such bijection exists.
pub fn gltr_bijection(
    a: &PointedStructure,
    b: &PointedStructure,
    k: usize,
) -> Result<Option<Vec<(Run, Run)>>> {
    let (ka, kb) = kripke_pair(a, b)?;
    let ra = maximal_runs(&ka, k);
    let rb = maximal_runs(&kb, k);
    let mut pairs = Vec::new();
    let ok = match_runs(&ka, &kb, ra.iter().collect(), rb.iter().collect(), 0, &mut pairs);
    Ok(ok.then_some(pairs))
}

fn match_runs<'r>(
    ka: &Kripke,
    kb: &Kripke,
    ra: Vec<&'r Run>,
    rb: Vec<&'r Run>,
    depth: usize,
    out: &mut Vec<(Run, Run)>,
) -> bool {
    if ra.len() != rb.len() {
        return false;
    }
    type Step = Option<(usize, u64)>;
    let group = |k: &Kripke, rs: Vec<&'r Run>| {
        let mut g: BTreeMap<(u64, Step), Vec<&'r Run>> = BTreeMap::new();
        for r in rs {
            let here = k.val[r.states[depth]];
            let next = (r.len() > depth).then(|| (r.actions[depth], k.val[r.states[depth + 1]]));
            g.entry((here, next)).or_default().push(r);
        }
        g
    };
    let (ga, mut gb) = (group(ka, ra), group(kb, rb));
    if ga.len() != gb.len() {
        return false;
    }
    for (key, xs) in ga {
        let Some(ys) = gb.remove(&key) else { return false };
        if key.1.is_none() {
            if xs.len() != ys.len() {
                return false;
            }
            out.extend(xs.into_iter().zip(ys).map(|(x, y)| (x.clone(), y.clone())));
        } else if !match_runs(ka, kb, xs, ys, depth + 1, out) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fx(name: &str) -> PointedStructure {
        fixtures::load(name).unwrap()
    }

    fn render(k: &Kripke, t: &LabelledTrace) -> String {
        t.render(&k.props, &k.acts)
    }

    #[test]
    fn runs_of_length_zero_and_loops() {
        assert_eq!(enumerate_runs(&fx("fix1"), 0).unwrap().len(), 1);
        assert_eq!(enumerate_runs(&fx("loop"), 2).unwrap().len(), 1);
        let runs = enumerate_runs(&fx("fix2"), 2).unwrap();
        assert_eq!(runs.len(), 2);
        let k = Kripke::new(&fx("fix2")).unwrap();
        let acts: Vec<Vec<&str>> =
            runs.iter().map(|r| r.actions.iter().map(|&a| k.acts[a].as_str()).collect()).collect();
        assert_eq!(acts, [vec!["a", "b"], vec!["a", "c"]]);
        assert!(runs.iter().all(|r| r.is_valid(&k)));
    }

    #[test]
    fn complete_traces_of_terminal_root() {
        let TraceList::Labelled(ts) = traces_upto(&fx("terminal"), 3, TraceKind::Complete).unwrap()
        else {
            panic!()
        };
        assert_eq!(ts.len(), 1);
        assert!(ts[0].complete && ts[0].is_empty());
    }

    #[test]
    fn complete_traces_of_fix3_and_fix4() {
        let k3 = Kripke::new(&fx("fix3")).unwrap();
        let names: Vec<String> = complete_set(&k3, 2).iter().map(|t| render(&k3, t)).collect();
        assert_eq!(names, ["{} -a-> {}!", "{} -a-> {} -b-> {}!"]);
        let k4 = Kripke::new(&fx("fix4")).unwrap();
        let names: Vec<String> = complete_set(&k4, 2).iter().map(|t| render(&k4, t)).collect();
        assert_eq!(names, ["{} -a-> {} -b-> {}!"]);
    }

    #[test]
    fn fix4_automaton() {
        let aut = build_trace_automaton(&fx("fix4")).unwrap();
        assert_eq!(aut.len(), 3);
        assert_eq!(aut.terminal.iter().filter(|&&t| t).count(), 1);
        let k = Kripke::new(&fx("fix4")).unwrap();
        for n in 0..=6 {
            let bounded = labelled_set(&k, n).iter().filter(|t| t.len() == n).count();
            assert_eq!(aut.count_words(n, false), bounded, "length {n}");
        }
    }

    #[test]
    fn loop_automaton_counts() {
        let aut = build_trace_automaton(&fx("loop")).unwrap();
        assert_eq!(aut.len(), 1);
        assert!((0..8).all(|n| aut.count_words(n, false) == 1));
    }

    #[test]
    fn terminal_automaton_accepts_only_empty_trace() {
        let aut = build_trace_automaton(&fx("terminal")).unwrap();
        assert_eq!(aut.count_words(0, false), 1);
        assert_eq!(aut.count_words(0, true), 1);
        assert_eq!(aut.count_words(1, false), 0);
    }

    #[test]
    fn fixture_verdicts() {
        let check = |rel, a: &str, b: &str, bound| {
            check_trace_relation(rel, &fx(a), &fx(b), bound).unwrap().holds
        };
        assert!(check(Relation::Cltr, "fix1", "fix1", Bound::Depth(3)));
        assert!(check(Relation::Cltr, "fix1", "fix2", Bound::Depth(3)));
        assert!(check(Relation::Ltr, "fix3", "fix4", Bound::Depth(3)));
        assert!(check(Relation::Ltr, "fix4", "fix3", Bound::Depth(3)));
        assert!(!check(Relation::Cltr, "fix3", "fix4", Bound::Depth(3)));
        assert!(!check(Relation::Gltr, "fix2", "fix1", Bound::Depth(1)));
    }

    #[test]
    fn cltr_witness_is_the_complete_alpha_trace() {
        let k = Kripke::new(&fx("fix3")).unwrap();
        for bound in [Bound::Depth(3), Bound::Exact] {
            let v = check_trace_relation(Relation::Cltr, &fx("fix3"), &fx("fix4"), bound).unwrap();
            let Some(TraceWitness::Labelled { side, trace }) = v.witness else { panic!() };
            assert_eq!(side, Side::Left);
            assert_eq!(render(&k, &trace), "{} -a-> {}!");
        }
    }

    #[test]
    fn gltr_witness_counts_root_branches() {
        let v = check_trace_relation(Relation::Gltr, &fx("fix2"), &fx("fix1"), Bound::Depth(1))
            .unwrap();
        let Some(TraceWitness::Count { left, right, .. }) = v.witness else { panic!() };
        assert_eq!((left, right), (2, 1));
        assert!(gltr_bijection(&fx("fix2"), &fx("fix1"), 1).unwrap().is_none());
        assert_eq!(gltr_bijection(&fx("fix2"), &fx("fix2"), 3).unwrap().unwrap().len(), 2);
    }

    #[test]
    fn exact_mode_rejects_gltr_and_rt() {
        for rel in [Relation::Gltr, Relation::Rt] {
            let r = check_trace_relation(rel, &fx("fix1"), &fx("fix1"), Bound::Exact);
            assert!(matches!(r, Err(Error::Unsupported(_))));
        }
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let r = check_trace_relation(Relation::Tr, &fx("fix1"), &fx("fix5"), Bound::Depth(1));
        assert!(matches!(r, Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn ready_traces_record_observable_ready_sets() {
        let k = Kripke::new(&fx("fix1")).unwrap();
        let rs: Vec<String> =
            ready_set(&k, 2).iter().map(|t| t.render(&k.props, &k.acts)).collect();
        assert!(rs.contains(&"{}[a] -a-> {}[b,c]".to_string()), "{rs:?}");
        assert!(rs.contains(&"{}[a] -a-> {}[b,c] -b-> {}[?]".to_string()), "{rs:?}");
    }

    #[test]
    fn rt_separates_fix1_from_fix2_at_depth_two() {
        let v = check_trace_relation(Relation::Rt, &fx("fix1"), &fx("fix2"), Bound::Depth(2))
            .unwrap();
        assert!(!v.holds);
        assert!(check_trace_relation(Relation::Rt, &fx("fix1"), &fx("fix2"), Bound::Depth(1))
            .unwrap()
            .holds);
    }

    #[test]
    fn pair_exploration_matches_trace_sets() {
        for i in 0..60 {
            let (a, b) = crate::oracle::generate::random_pair(21, i, 4, crate::oracle::generate::mode_for(i));
            let (ka, kb) = (Kripke::new(&a).unwrap(), Kripke::new(&b).unwrap());
            for k in 0..4 {
                for mode in [Match::Subset, Match::Equal] {
                    let naive = labelled_set(&ka, k).into_iter().find(|t| matching_states(&kb, t, mode).is_empty());
                    assert_eq!(bounded_counterexample(&ka, &kb, k, mode, None), naive);
                }
                let (la, lb) = (labelled_set(&ka, k), labelled_set(&kb, k));
                let climit = k.checked_sub(1);
                let complete = |x: &Kripke| climit.map(|c| complete_set(x, c)).unwrap_or_default();
                let naive = la == lb && complete(&ka) == complete(&kb);
                assert_eq!(bounded_cltr(&ka, &kb, k).holds, naive, "sample {i} depth {k}");
                let left = [first_missing(&la, &lb), first_missing(&complete(&ka), &complete(&kb))]
                    .into_iter()
                    .flatten()
                    .min();
                assert_eq!(bounded_counterexample(&ka, &kb, k, Match::Equal, climit), left);
            }
        }
    }
}

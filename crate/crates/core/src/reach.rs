//! Bounded reachability for plain and guarded nets.
//!
//! Searches are breadth-first with deduplication. Successors are explored in
//! sorted label order, so the run returned is the lexicographically least
//! among the shortest ones and does not depend on anything but the query.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::guard::{Guard, GuardedNet, Tuple};
use crate::internalize::{place_name, transition_name, ColoredMarking, Payload};
use crate::multiset::Multiset;
use crate::net::{FiringSequence, Marking, Net, Transition};

pub const DEFAULT_DEPTH: usize = 64;
pub const DEFAULT_STATE_CAP: usize = 100_000;
/// Environment variable overriding [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "GUARDNET_STATE_CAP";

/// The state cap from the environment, or the default. Unparsable or zero
/// values are ignored.
pub fn default_state_cap() -> usize {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_STATE_CAP)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachQuery<M> {
    pub from: M,
    pub to: M,
    /// Longest run considered.
    pub depth_bound: usize,
    /// Most distinct markings stored before the search gives up.
    pub state_cap: usize,
}

impl<M> ReachQuery<M> {
    pub fn new(from: M, to: M) -> Self {
        ReachQuery {
            from,
            to,
            depth_bound: DEFAULT_DEPTH,
            state_cap: default_state_cap(),
        }
    }

    pub fn with_bounds(mut self, depth_bound: usize, state_cap: usize) -> Self {
        self.depth_bound = depth_bound;
        self.state_cap = state_cap;
        self
    }

    fn check_bounds(&self) -> Result<()> {
        if self.depth_bound == 0 || self.state_cap == 0 {
            return Err(Error::Precondition("depth bound and state cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReachOutcome<W> {
    Reachable(W),
    /// Exhaustively ruled out within the depth bound.
    NotReachable,
    /// The state cap was hit first.
    Inconclusive,
}

impl<W> ReachOutcome<W> {
    pub fn exit_code(&self) -> i32 {
        match self {
            ReachOutcome::Reachable(_) => 0,
            ReachOutcome::NotReachable => 1,
            ReachOutcome::Inconclusive => 2,
        }
    }

    pub fn is_reachable(&self) -> bool {
        matches!(self, ReachOutcome::Reachable(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            ReachOutcome::Reachable(w) => Some(w),
            _ => None,
        }
    }

    pub fn map<V>(self, f: impl FnOnce(W) -> V) -> ReachOutcome<V> {
        match self {
            ReachOutcome::Reachable(w) => ReachOutcome::Reachable(f(w)),
            ReachOutcome::NotReachable => ReachOutcome::NotReachable,
            ReachOutcome::Inconclusive => ReachOutcome::Inconclusive,
        }
    }
}

/// One colored firing: the transition, the colors it consumed along its
/// sorted pre word, the witness (span guards only) and the colors produced.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunStep {
    pub transition: String,
    pub input: Tuple,
    pub witness: Option<String>,
    pub output: Tuple,
}

impl RunStep {
    pub fn payload(&self) -> Payload {
        match &self.witness {
            Some(w) => Payload::Witness(w.clone()),
            None => Payload::Input(self.input.clone()),
        }
    }

    /// Name of the internalized transition fired by this step.
    pub fn internal_name(&self) -> String {
        transition_name(&self.transition, &self.payload())
    }
}

impl fmt::Display for RunStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.transition, self.input.join(","))?;
        if let Some(w) = &self.witness {
            write!(f, "[{w}]")?;
        }
        write!(f, " -> ({})", self.output.join(","))
    }
}

/// A colored run with the marking after every step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Run {
    pub steps: Vec<RunStep>,
    pub markings: Vec<ColoredMarking>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The run as a firing sequence of the internalized net.
    pub fn internalized(&self) -> FiringSequence {
        FiringSequence(self.steps.iter().map(RunStep::internal_name).collect())
    }

    /// The run with colors forgotten.
    pub fn base_sequence(&self) -> FiringSequence {
        FiringSequence(self.steps.iter().map(|s| s.transition.clone()).collect())
    }
}

/// An explored state space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkingGraph<S, L> {
    /// Markings in discovery order; the first is the initial one.
    pub nodes: Vec<S>,
    pub edges: Vec<(usize, L, usize)>,
    /// The state cap cut the exploration short.
    pub truncated: bool,
}

impl<S: Ord, L> MarkingGraph<S, L> {
    pub fn contains(&self, s: &S) -> bool {
        self.nodes.contains(s)
    }

    pub fn index(&self) -> BTreeMap<&S, usize> {
        self.nodes.iter().enumerate().map(|(i, s)| (s, i)).collect()
    }
}

fn plain_successors(net: &Net, m: &Marking) -> Vec<(String, Marking)> {
    net.transitions()
        .iter()
        .filter_map(|t| {
            let rest = m.checked_sub(&t.pre)?;
            Some((t.id.clone(), rest.union(&t.post)))
        })
        .collect()
}

/// All ordered color selections along the sorted pre word of `t`, drawn
/// from the tokens of `m`, each returned once.
fn selections(t: &Transition, m: &ColoredMarking) -> Vec<Tuple> {
    fn go(word: &[String], avail: &mut ColoredMarking, prefix: &mut Tuple, out: &mut Vec<Tuple>) {
        let Some((p, rest)) = word.split_first() else {
            out.push(prefix.clone());
            return;
        };
        let colors: Vec<String> = avail
            .distinct()
            .filter(|(q, _)| q == p)
            .map(|(_, c)| c.clone())
            .collect();
        for c in colors {
            let token = (p.clone(), c.clone());
            avail.remove_one(&token);
            prefix.push(c);
            go(rest, avail, prefix, out);
            prefix.pop();
            avail.insert(token);
        }
    }
    let mut out = Vec::new();
    go(&t.source().0, &mut m.clone(), &mut Vec::new(), &mut out);
    out
}

fn colored_tokens(word: &[String], tuple: &[String]) -> ColoredMarking {
    word.iter().zip(tuple).map(|(p, c)| (p.clone(), c.clone())).collect()
}

/// Every colored firing enabled at `m`, in sorted order, with the marking
/// it leads to.
pub fn colored_successors(gn: &GuardedNet, m: &ColoredMarking) -> Result<Vec<(RunStep, ColoredMarking)>> {
    let mut out = Vec::new();
    for t in gn.net.transitions() {
        let (src, tgt) = (t.source(), t.target());
        for input in selections(t, m) {
            let mut fire = |witness: Option<String>, output: &Tuple| {
                let rest = m
                    .checked_sub(&colored_tokens(&src.0, &input))
                    .expect("selection drawn from the marking");
                let next = rest.union(&colored_tokens(&tgt.0, output));
                out.push((
                    RunStep {
                        transition: t.id.clone(),
                        input: input.clone(),
                        witness,
                        output: output.clone(),
                    },
                    next,
                ));
            };
            match &gn.guard {
                Guard::None => return Err(Error::Unguarded),
                Guard::Partial(g) => {
                    if let Some(y) = g.table(&t.id).and_then(|tbl| tbl.get(&input)) {
                        fire(None, y);
                    }
                }
                Guard::Span(g) => {
                    for e in g.entries(&t.id).iter().filter(|e| e.input == input) {
                        fire(Some(e.witness.clone()), &e.output);
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Shortest-first search; returns the labels and states along the run.
fn bfs<S: Ord + Clone, L: Clone>(
    start: &S,
    target: &S,
    depth: usize,
    cap: usize,
    mut successors: impl FnMut(&S) -> Result<Vec<(L, S)>>,
) -> Result<ReachOutcome<Vec<(L, S)>>> {
    if start == target {
        return Ok(ReachOutcome::Reachable(Vec::new()));
    }
    let mut nodes: Vec<(S, Option<(usize, L)>)> = vec![(start.clone(), None)];
    let mut index: BTreeMap<S, usize> = BTreeMap::from([(start.clone(), 0)]);
    let mut frontier = vec![0];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &i in &frontier {
            let here = nodes[i].0.clone();
            for (label, s) in successors(&here)? {
                if index.contains_key(&s) {
                    continue;
                }
                if nodes.len() >= cap {
                    return Ok(ReachOutcome::Inconclusive);
                }
                let j = nodes.len();
                let found = &s == target;
                index.insert(s.clone(), j);
                nodes.push((s, Some((i, label))));
                if found {
                    let mut path = Vec::new();
                    let mut k = j;
                    while let Some((parent, l)) = &nodes[k].1 {
                        path.push((l.clone(), nodes[k].0.clone()));
                        k = *parent;
                    }
                    path.reverse();
                    return Ok(ReachOutcome::Reachable(path));
                }
                next.push(j);
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(ReachOutcome::NotReachable)
}

fn check_colored(gn: &GuardedNet, m: &ColoredMarking) -> Result<()> {
    for (p, c) in m.distinct() {
        if !gn.colors_of(p)?.contains(c) {
            return Err(Error::ColorMismatch {
                place: p.clone(),
                color: c.clone(),
            });
        }
    }
    Ok(())
}

pub fn reach_plain(net: &Net, q: &ReachQuery<Marking>) -> Result<ReachOutcome<FiringSequence>> {
    q.check_bounds()?;
    net.check_marking(&q.from)?;
    net.check_marking(&q.to)?;
    let out = bfs(&q.from, &q.to, q.depth_bound, q.state_cap, |m| {
        Ok(plain_successors(net, m))
    })?;
    Ok(out.map(|path| FiringSequence(path.into_iter().map(|(t, _)| t).collect())))
}

pub fn reach_colored(gn: &GuardedNet, q: &ReachQuery<ColoredMarking>) -> Result<ReachOutcome<Run>> {
    q.check_bounds()?;
    check_colored(gn, &q.from)?;
    check_colored(gn, &q.to)?;
    let out = bfs(&q.from, &q.to, q.depth_bound, q.state_cap, |m| {
        colored_successors(gn, m)
    })?;
    Ok(out.map(|path| {
        let (steps, markings) = path.into_iter().unzip();
        Run { steps, markings }
    }))
}

/// Every colored run of exactly `length` steps from `from` to `to`, in
/// sorted order.
pub fn colored_runs(gn: &GuardedNet, from: &ColoredMarking, to: &ColoredMarking, length: usize) -> Result<Vec<Run>> {
    check_colored(gn, from)?;
    check_colored(gn, to)?;
    fn go(
        gn: &GuardedNet,
        at: &ColoredMarking,
        to: &ColoredMarking,
        left: usize,
        run: &mut Run,
        out: &mut Vec<Run>,
    ) -> Result<()> {
        if left == 0 {
            if at == to {
                out.push(run.clone());
            }
            return Ok(());
        }
        for (step, next) in colored_successors(gn, at)? {
            run.steps.push(step);
            run.markings.push(next.clone());
            go(gn, &next, to, left - 1, run, out)?;
            run.steps.pop();
            run.markings.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(gn, from, to, length, &mut Run::default(), &mut out)?;
    Ok(out)
}

/// Level-by-level expansion up to `depth` steps, keeping every edge between
/// stored markings.
fn explore<S: Ord + Clone, L>(
    init: S,
    depth: usize,
    cap: usize,
    mut successors: impl FnMut(&S) -> Result<Vec<(L, S)>>,
) -> Result<MarkingGraph<S, L>> {
    let mut graph = MarkingGraph {
        nodes: vec![init.clone()],
        edges: Vec::new(),
        truncated: false,
    };
    let mut index = BTreeMap::from([(init, 0usize)]);
    let mut level = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for i in level {
            let here = graph.nodes[i].clone();
            for (label, s) in successors(&here)? {
                let j = match index.get(&s) {
                    Some(&j) => j,
                    None if graph.nodes.len() >= cap => {
                        graph.truncated = true;
                        continue;
                    }
                    None => {
                        let j = graph.nodes.len();
                        index.insert(s.clone(), j);
                        graph.nodes.push(s);
                        next.push(j);
                        j
                    }
                };
                graph.edges.push((i, label, j));
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    Ok(graph)
}

pub fn marking_graph_plain(
    net: &Net,
    init: &Marking,
    depth: usize,
    cap: usize,
) -> Result<MarkingGraph<Marking, String>> {
    net.check_marking(init)?;
    explore(init.clone(), depth, cap, |m| Ok(plain_successors(net, m)))
}

pub fn marking_graph_colored(
    gn: &GuardedNet,
    init: &ColoredMarking,
    depth: usize,
    cap: usize,
) -> Result<MarkingGraph<ColoredMarking, RunStep>> {
    check_colored(gn, init)?;
    explore(init.clone(), depth, cap, |m| colored_successors(gn, m))
}

/// A colored marking read as a marking of the internalized net.
pub fn internal_marking(m: &ColoredMarking) -> Marking {
    m.map(|(p, c)| place_name(p, c))
}

/// The markings with at most `tokens` tokens over the given token kinds,
/// smallest first.
pub fn markings_up_to<T: Ord + Clone>(kinds: &[T], tokens: usize) -> Vec<Multiset<T>> {
    let mut out = vec![Multiset::new()];
    let mut layer = vec![(Multiset::new(), 0usize)];
    for _ in 0..tokens {
        let mut next = Vec::new();
        for (m, lo) in &layer {
            for (k, kind) in kinds.iter().enumerate().skip(*lo) {
                let mut m2 = m.clone();
                m2.insert(kind.clone());
                out.push(m2.clone());
                next.push((m2, k));
            }
        }
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::internalize::colored_marking;
    use crate::net::marking;

    fn q<M>(from: M, to: M, depth: usize) -> ReachQuery<M> {
        ReachQuery::new(from, to).with_bounds(depth, DEFAULT_STATE_CAP)
    }

    #[test]
    fn plain_chain() {
        let a = fixtures::fixture_a();
        let out = reach_plain(&a.net, &q(marking(["P1"]), marking(["P3"]), 5)).unwrap();
        assert_eq!(
            out,
            ReachOutcome::Reachable(FiringSequence(vec!["t1".into(), "t2".into()]))
        );
        let same = reach_plain(&a.net, &q(marking(["P1"]), marking(["P1"]), 5)).unwrap();
        assert_eq!(same, ReachOutcome::Reachable(FiringSequence::default()));
        let more = reach_plain(&a.net, &q(marking(["P1"]), marking(["P1", "P3"]), 5)).unwrap();
        assert_eq!(more, ReachOutcome::NotReachable);
        assert_eq!(more.exit_code(), 1);
    }

    #[test]
    fn colored_red_cannot_reach_purple() {
        let a = fixtures::fixture_a();
        let red = colored_marking([("P1", "red")]);
        let purple = colored_marking([("P3", "purple")]);
        let green = colored_marking([("P2", "green")]);
        assert_eq!(
            reach_colored(&a, &q(red.clone(), purple, 10)).unwrap(),
            ReachOutcome::NotReachable
        );
        let run = reach_colored(&a, &q(red, green, 10)).unwrap();
        let run = run.witness().unwrap();
        assert_eq!(run.base_sequence().0, ["t1"]);
        assert_eq!(run.internalized().0, ["t1@red"]);
    }

    #[test]
    fn two_witness_runs_in_fixture_c() {
        let c = fixtures::fixture_c();
        let x = colored_marking([("X", "x")]);
        let z = colored_marking([("Z", "z")]);
        assert!(reach_colored(&c, &q(x.clone(), z.clone(), 10)).unwrap().is_reachable());
        let runs = colored_runs(&c, &x, &z, 2).unwrap();
        let names: Vec<Vec<String>> = runs.iter().map(|r| r.internalized().0).collect();
        assert_eq!(names, [["f@w1", "g@v1"], ["f@w2", "g@v2"]]);
    }

    #[test]
    fn cap_makes_search_inconclusive() {
        // a source transition makes the state space grow without end
        let net = Net::new(["P"], [Transition::new("s", Vec::<String>::new(), ["P"])]);
        let out = reach_plain(
            &net,
            &q(marking(Vec::<String>::new()), marking(["P"; 5]), 64).with_bounds(64, 3),
        )
        .unwrap();
        assert_eq!(out, ReachOutcome::Inconclusive);
        assert_eq!(out.exit_code(), 2);
    }

    #[test]
    fn fixture_d_graph() {
        let d = fixtures::fixture_d();
        let g = marking_graph_colored(&d, &colored_marking([("X", "x")]), 10, 100).unwrap();
        assert_eq!(
            g.nodes,
            [
                colored_marking([("X", "x")]),
                colored_marking([("Y", "y1")]),
                colored_marking([("Z", "z")]),
            ]
        );
        assert!(!g.contains(&colored_marking([("Y", "y2")])));
        assert!(!g.truncated);
    }

    #[test]
    fn fixture_a_graph_from_blue() {
        let a = fixtures::fixture_a();
        let g = marking_graph_colored(&a, &colored_marking([("P1", "blue")]), 10, 100).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn empty_net_graph() {
        let g = marking_graph_plain(&Net::empty(), &Marking::new(), 5, 10).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn bad_bounds_and_markings() {
        let a = fixtures::fixture_a();
        assert!(reach_plain(&a.net, &q(marking(["P1"]), marking(["P1"]), 0)).is_err());
        let bad = colored_marking([("P1", "green")]);
        assert!(matches!(
            reach_colored(&a, &q(bad.clone(), bad, 3)),
            Err(Error::ColorMismatch { .. })
        ));
    }

    #[test]
    fn markings_enumeration() {
        let m = markings_up_to(&["a", "b"], 2);
        // {}, a, b, aa, ab, bb
        assert_eq!(m.len(), 6);
    }
}

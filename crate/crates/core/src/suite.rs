//! Executable property suites. Each group checks one family of claims about
//! internalization on fixtures and seeded random nets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::guard::{all_tuples, Guard, GuardedNet};
use crate::internalize::{colored_marking, internalize, internalize_partial, internalize_span, ColoredMarking};
use crate::iso::net_isomorphic;
use crate::net::{Net, Transition};
use crate::random::{self, Flavor, Limits};
use crate::reach::{
    colored_runs, internal_marking, marking_graph_colored, marking_graph_plain, markings_up_to, reach_colored,
    reach_plain, ReachOutcome, ReachQuery, DEFAULT_STATE_CAP,
};
use crate::semantics::{collapse_to_relation, embed_partial_as_span, eval_partial, eval_span};
use crate::term::ProcessTerm;
use crate::transform::{
    add_generators, check_flags, erase_generators, identify, lift, lifted_add, lifted_erase, lifted_identify,
    lifted_synchronize, naturality_check, pullback_guard, synchronize, NetFunctor,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    All,
    Reachability,
    Lifting,
    Monoidality,
    Counterexamples,
}

impl Group {
    pub const ALL: [Group; 4] = [
        Group::Reachability,
        Group::Lifting,
        Group::Monoidality,
        Group::Counterexamples,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::All => "all",
            Group::Reachability => "reachability",
            Group::Lifting => "lifting",
            Group::Monoidality => "monoidality",
            Group::Counterexamples => "counterexamples",
        }
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Group::All]
            .into_iter()
            .chain(Group::ALL)
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown check group `{s}`"))
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    /// Random guarded nets in the reachability suite.
    pub random_nets: usize,
    /// Random instances in the lifting and cross-semantics suites.
    pub random_instances: usize,
    pub seed: u64,
    /// Depth bound used when comparing state spaces.
    pub depth: usize,
    /// Largest initial marking tried.
    pub tokens: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            random_nets: 200,
            random_instances: 50,
            seed: 0x6e65_7473,
            depth: 4,
            tokens: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub group: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}/{}: {}", self.group, self.name, self.detail)
    }
}

/// Outcome of one property: a failure message, or a summary on success.
type Check = Result<std::result::Result<String, String>>;

fn record(group: Group, name: &str, out: Check) -> CheckResult {
    let (passed, detail) = match out {
        Ok(Ok(s)) => (true, s),
        Ok(Err(s)) => (false, s),
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        group: group.name(),
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn run(group: Group, opts: &Options) -> Vec<CheckResult> {
    match group {
        Group::All => Group::ALL.iter().flat_map(|g| run(*g, opts)).collect(),
        Group::Reachability => vec![
            record(group, "fixtures", reachability_fixtures(opts)),
            record(group, "random", reachability_random(opts)),
        ],
        Group::Lifting => vec![
            record(group, "fixture-morphisms", lifting_fixture_morphisms()),
            record(group, "identification", identification_commutes(opts)),
            record(group, "addition", addition_commutes(opts)),
            record(group, "erasing", erasing_commutes(opts)),
        ],
        Group::Monoidality => vec![
            record(group, "disjoint-union", monoidality_fixtures()),
            record(group, "empty-net", empty_net_internalization()),
            record(group, "union-laws", union_laws()),
            record(group, "partial-as-span", cross_semantics(opts)),
        ],
        Group::Counterexamples => vec![
            record(group, "unreachable-purple", unreachable_purple()),
            record(group, "empty-composites", empty_composites()),
            record(group, "freeness", freeness_counterexample()),
            record(group, "synchronization", synchronization_counterexample()),
        ],
    }
}

fn flavor(i: usize) -> Flavor {
    if i.is_multiple_of(2) {
        Flavor::Partial
    } else {
        Flavor::Span
    }
}

fn token_kinds(gn: &GuardedNet) -> Vec<(String, String)> {
    gn.guard
        .colors()
        .into_iter()
        .flatten()
        .flat_map(|(p, cs)| cs.iter().map(move |c| (p.clone(), c.clone())))
        .collect()
}

/// Statistics of a state-space comparison.
#[derive(Default)]
struct Tally {
    starts: usize,
    queries: usize,
    skipped: usize,
}

/// Compares the colored state space from `init` with the plain state space
/// of the internalization, then cross-checks individual reach queries
/// against both searches.
fn compare_from(
    gn: &GuardedNet,
    internal: &crate::internalize::Internalized,
    init: &ColoredMarking,
    extra_targets: &[ColoredMarking],
    depth: usize,
    tally: &mut Tally,
) -> Result<std::result::Result<(), String>> {
    let cg = marking_graph_colored(gn, init, depth, DEFAULT_STATE_CAP)?;
    let pg = marking_graph_plain(&internal.net, &internal_marking(init), depth, DEFAULT_STATE_CAP)?;
    if cg.truncated || pg.truncated {
        tally.skipped += 1;
        return Ok(Ok(()));
    }
    tally.starts += 1;
    let colored: BTreeSet<_> = cg.nodes.iter().map(internal_marking).collect();
    let plain: BTreeSet<_> = pg.nodes.iter().cloned().collect();
    if colored != plain {
        return Ok(Err(format!(
            "state spaces from {init:?} differ: {} colored vs {} internalized markings",
            colored.len(),
            plain.len()
        )));
    }
    let targets = cg.nodes.iter().take(4).chain(extra_targets);
    for to in targets {
        tally.queries += 1;
        let q = ReachQuery::new(init.clone(), to.clone()).with_bounds(depth, DEFAULT_STATE_CAP);
        let a = reach_colored(gn, &q)?;
        let qp = ReachQuery::new(internal_marking(init), internal_marking(to)).with_bounds(depth, DEFAULT_STATE_CAP);
        let b = reach_plain(&internal.net, &qp)?;
        if a.is_reachable() != b.is_reachable() || cg.contains(to) != a.is_reachable() {
            return Ok(Err(format!(
                "from {init:?} to {to:?}: colored {a:?}, internalized {b:?}"
            )));
        }
        if let ReachOutcome::Reachable(run) = a {
            let seq = run.internalized();
            let end = internal.net.replay(&internal_marking(init), &seq)?;
            if end.last().unwrap_or(&internal_marking(init)) != &internal_marking(to) {
                return Ok(Err(format!("run {seq} does not replay to {to:?}")));
            }
            let base = internal.projection.project_sequence(&seq)?;
            let base_init = internal.projection.project_marking(init)?;
            gn.net.replay(&base_init, &base)?;
        }
    }
    Ok(Ok(()))
}

fn reachability_fixtures(opts: &Options) -> Check {
    let mut tally = Tally::default();
    for (name, gn) in fixtures::all() {
        let internal = internalize(&gn)?;
        let all = markings_up_to(&token_kinds(&gn), opts.tokens);
        for init in &all {
            let extra = [all[all.len() / 2].clone(), all[all.len() - 1].clone()];
            if let Err(e) = compare_from(&gn, &internal, init, &extra, opts.depth, &mut tally)? {
                return Ok(Err(format!("{name}: {e}")));
            }
        }
    }
    Ok(Ok(format!(
        "{} initial markings, {} queries, {} skipped",
        tally.starts, tally.queries, tally.skipped
    )))
}

fn reachability_random(opts: &Options) -> Check {
    let mut rng = random::rng(opts.seed);
    let mut tally = Tally::default();
    for i in 0..opts.random_nets {
        let gn = random::random_guarded_net(&mut rng, flavor(i), Limits::default());
        let internal = internalize(&gn)?;
        let all = markings_up_to(&token_kinds(&gn), opts.tokens);
        for init in &all {
            let extra = [random::random_colored_marking(&mut rng, &gn, opts.tokens)];
            if let Err(e) = compare_from(&gn, &internal, init, &extra, opts.depth, &mut tally)? {
                return Ok(Err(format!("net #{i}: {e}")));
            }
        }
    }
    Ok(Ok(format!(
        "{} nets, {} initial markings, {} queries, {} skipped",
        opts.random_nets, tally.starts, tally.queries, tally.skipped
    )))
}

/// Naturality of the lift and preservation of the verified flags.
fn lifting_holds(f: &NetFunctor, src: &GuardedNet, dst: &GuardedNet) -> Result<std::result::Result<(), String>> {
    if !naturality_check(f, src, dst)? {
        return Ok(Err("naturality square fails".into()));
    }
    let (si, di) = (internalize(src)?, internalize(dst)?);
    let lifted = lift(f, src, dst, &si, &di)?;
    let before = check_flags(f, &src.net, &dst.net);
    let after = check_flags(&lifted, &si.net, &di.net);
    let kept = (!before.transition_preserving || after.transition_preserving)
        && (!before.injective_on_objects || after.injective_on_objects)
        && (!before.faithful_on_generators || after.faithful_on_generators);
    if !kept {
        return Ok(Err(format!("flags {before:?} lifted to {after:?}")));
    }
    Ok(Ok(()))
}

/// The morphisms exercised on fixtures, as (name, functor, source, target).
pub fn fixture_morphisms() -> Result<Vec<(String, NetFunctor, GuardedNet, GuardedNet)>> {
    let mut out = Vec::new();
    for (name, gn) in fixtures::all() {
        out.push((
            format!("identity on {name}"),
            NetFunctor::identity(&gn.net),
            gn.clone(),
            gn,
        ));
    }
    let d = fixtures::fixture_d();
    let (w, f) = fixtures::sync_witness();
    let w_g = GuardedNet::new(w.clone(), pullback_guard(&f, &w, &d)?);
    out.push(("synchronization witness".into(), f, w_g, d));
    let (o, l, r, m) = fixtures::identification_witness();
    let o_g = GuardedNet::new(o.clone(), pullback_guard(&l, &o, &m)?);
    out.push(("left identification witness".into(), l, o_g.clone(), m.clone()));
    out.push(("right identification witness".into(), r, o_g, m));
    Ok(out)
}

fn lifting_fixture_morphisms() -> Check {
    let all = fixture_morphisms()?;
    for (name, f, src, dst) in &all {
        if let Err(e) = lifting_holds(f, src, dst)? {
            return Ok(Err(format!("{name}: {e}")));
        }
    }
    Ok(Ok(format!("{} morphisms", all.len())))
}

fn iso_or(a: &Net, b: &Net, what: impl FnOnce() -> String) -> Result<std::result::Result<(), String>> {
    Ok(match net_isomorphic(a, b)? {
        Some(_) => Ok(()),
        None => Err(what()),
    })
}

fn identification_commutes(opts: &Options) -> Check {
    let check = |o: &Net, l: &NetFunctor, r: &NetFunctor, m: &GuardedNet| -> Result<std::result::Result<(), String>> {
        let direct = internalize(&identify(o, l, r, m)?.guarded)?;
        let lifted = lifted_identify(o, l, r, m)?;
        iso_or(&direct.net, &lifted.guarded.net, || {
            format!(
                "internalized quotient\n{}is not isomorphic to\n{}",
                direct.net, lifted.guarded.net
            )
        })
    };
    let (o, l, r, m) = fixtures::identification_witness();
    if let Err(e) = check(&o, &l, &r, &m)? {
        return Ok(Err(format!("fixture: {e}")));
    }
    for (_, gn) in fixtures::all() {
        let id = NetFunctor::identity(&gn.net);
        if let Err(e) = check(&gn.net, &id, &id, &gn)? {
            return Ok(Err(format!("identity: {e}")));
        }
    }
    let mut rng = random::rng(opts.seed ^ 1);
    for i in 0..opts.random_instances {
        let inst = random::random_identification(&mut rng, flavor(i), Limits::default());
        if let Err(e) = check(&inst.overlap, &inst.left, &inst.right, &inst.target)? {
            return Ok(Err(format!("instance #{i}: {e}")));
        }
        let o_g = GuardedNet::new(
            inst.overlap.clone(),
            pullback_guard(&inst.left, &inst.overlap, &inst.target)?,
        );
        for (side, f) in [("left", &inst.left), ("right", &inst.right)] {
            if let Err(e) = lifting_holds(f, &o_g, &inst.target)? {
                return Ok(Err(format!("instance #{i}, {side} witness: {e}")));
            }
        }
    }
    Ok(Ok(format!("fixtures and {} random instances", opts.random_instances)))
}

fn addition_commutes(opts: &Options) -> Check {
    let check = |k: &GuardedNet, w_net: &Net, w: &NetFunctor| -> Result<std::result::Result<(), String>> {
        let direct = internalize(&add_generators(k, w_net, w)?)?;
        let lifted = lifted_add(k, w_net, w)?;
        iso_or(&direct.net, &lifted.net, || {
            format!(
                "internalized addition\n{}is not isomorphic to\n{}",
                direct.net, lifted.net
            )
        })
    };
    let d = fixtures::fixture_d();
    let (w, f) = fixtures::sync_witness();
    if let Err(e) = check(&d, &w, &f)? {
        return Ok(Err(format!("fixture_d: {e}")));
    }
    for (name, gn) in [
        ("fixture_a", fixtures::fixture_a()),
        ("fixture_b", fixtures::fixture_b()),
    ] {
        let w = Net::new(["S", "T"], [Transition::new("t12", ["S"], ["T"])]);
        let f = NetFunctor {
            objects: [
                ("S".to_string(), crate::term::Word::from_iter(["P1"])),
                ("T".to_string(), crate::term::Word::from_iter(["P3"])),
            ]
            .into(),
            morphisms: [("t12".to_string(), ProcessTerm::gen("t1").then(ProcessTerm::gen("t2")))].into(),
        };
        if let Err(e) = check(&gn, &w, &f)? {
            return Ok(Err(format!("{name}: {e}")));
        }
    }
    let mut rng = random::rng(opts.seed ^ 2);
    for i in 0..opts.random_instances {
        let inst = random::random_addition(&mut rng, flavor(i), Limits::default());
        if let Err(e) = check(&inst.base, &inst.generators, &inst.witness)? {
            return Ok(Err(format!("instance #{i}: {e}")));
        }
        let w_g = GuardedNet::new(
            inst.generators.clone(),
            pullback_guard(&inst.witness, &inst.generators, &inst.base)?,
        );
        if let Err(e) = lifting_holds(&inst.witness, &w_g, &inst.base)? {
            return Ok(Err(format!("instance #{i}, witness: {e}")));
        }
    }
    Ok(Ok(format!("fixtures and {} random instances", opts.random_instances)))
}

fn erasing_commutes(opts: &Options) -> Check {
    let check = |n: &GuardedNet, victims: &BTreeSet<String>| -> Result<std::result::Result<(), String>> {
        let direct = internalize(&erase_generators(n, victims)?)?;
        let lifted = lifted_erase(n, victims)?;
        iso_or(&direct.net, &lifted.net, || {
            format!("erasing {victims:?} does not commute")
        })
    };
    for (name, gn) in fixtures::all() {
        let ids: Vec<String> = gn.net.transitions().iter().map(|t| t.id.clone()).collect();
        for mask in 0..(1u32 << ids.len()) {
            let victims = ids
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, t)| t.clone())
                .collect();
            if let Err(e) = check(&gn, &victims)? {
                return Ok(Err(format!("{name}: {e}")));
            }
        }
    }
    let mut rng = random::rng(opts.seed ^ 3);
    for i in 0..opts.random_instances {
        let gn = random::random_guarded_net(&mut rng, flavor(i), Limits::default());
        let victims = random::random_victims(&mut rng, &gn.net);
        if let Err(e) = check(&gn, &victims)? {
            return Ok(Err(format!("instance #{i}: {e}")));
        }
    }
    Ok(Ok(format!("fixtures and {} random instances", opts.random_instances)))
}

fn monoidality_fixtures() -> Check {
    let all = fixtures::all();
    for (na, a) in &all {
        for (nb, b) in &all {
            let joined = internalize(&GuardedNet::disjoint_union(a, b)?)?;
            let separate = Net::disjoint_union(&internalize(a)?.net, &internalize(b)?.net);
            if let Err(e) = iso_or(&joined.net, &separate, || format!("{na} ⊕ {nb}"))? {
                return Ok(Err(e));
            }
        }
    }
    Ok(Ok(format!("{} fixture pairs", all.len() * all.len())))
}

fn empty_net_internalization() -> Check {
    for guard in [Guard::Partial(Default::default()), Guard::Span(Default::default())] {
        let i = internalize(&GuardedNet::new(Net::empty(), guard))?;
        if i.net != Net::empty() {
            return Ok(Err(format!("internalization of the empty net is\n{}", i.net)));
        }
    }
    Ok(Ok("empty".into()))
}

fn union_laws() -> Check {
    let nets: Vec<Net> = fixtures::all().into_iter().map(|(_, g)| g.net).collect();
    let empty = Net::empty();
    for a in &nets {
        let unit = Net::disjoint_union(a, &empty);
        if net_isomorphic(&unit, a)?.is_none() {
            return Ok(Err("empty net is not a unit".into()));
        }
        for b in &nets {
            if net_isomorphic(&Net::disjoint_union(a, b), &Net::disjoint_union(b, a))?.is_none() {
                return Ok(Err("union is not commutative".into()));
            }
            for c in &nets {
                let left = Net::disjoint_union(&Net::disjoint_union(a, b), c);
                let right = Net::disjoint_union(a, &Net::disjoint_union(b, c));
                if net_isomorphic(&left, &right)?.is_none() {
                    return Ok(Err("union is not associative".into()));
                }
            }
        }
    }
    Ok(Ok("unit, commutativity and associativity".into()))
}

fn cross_semantics(opts: &Options) -> Check {
    let compare = |gn: &GuardedNet| -> Result<std::result::Result<(), String>> {
        let Guard::Partial(g) = &gn.guard else {
            return Ok(Ok(()));
        };
        let p = internalize_partial(&gn.net, g)?;
        let s = internalize_span(&gn.net, &embed_partial_as_span(g))?;
        iso_or(&p.net, &s.net, || {
            "span reading of a partial guard internalizes differently".into()
        })
    };
    let mut count = 0;
    for (name, gn) in fixtures::all() {
        if matches!(gn.guard, Guard::Partial(_)) {
            count += 1;
            if let Err(e) = compare(&gn)? {
                return Ok(Err(format!("{name}: {e}")));
            }
        }
    }
    let mut rng = random::rng(opts.seed ^ 4);
    for i in 0..opts.random_instances {
        let gn = random::random_guarded_net(&mut rng, Flavor::Partial, Limits::default());
        if let Err(e) = compare(&gn)? {
            return Ok(Err(format!("instance #{i}: {e}")));
        }
    }
    Ok(Ok(format!(
        "{count} fixtures and {} random instances",
        opts.random_instances
    )))
}

fn unreachable_purple() -> Check {
    let a = fixtures::fixture_a();
    let red = colored_marking([("P1", "red")]);
    let to_purple = reach_colored(
        &a,
        &ReachQuery::new(red.clone(), colored_marking([("P3", "purple")])).with_bounds(10, DEFAULT_STATE_CAP),
    )?;
    let to_green = reach_colored(
        &a,
        &ReachQuery::new(red, colored_marking([("P2", "green")])).with_bounds(10, DEFAULT_STATE_CAP),
    )?;
    if to_purple != ReachOutcome::NotReachable {
        return Ok(Err(format!("red reaches purple: {to_purple:?}")));
    }
    if !to_green.is_reachable() {
        return Ok(Err("red does not reach green".into()));
    }
    Ok(Ok("red reaches green but never purple".into()))
}

fn empty_composites() -> Check {
    let t = ProcessTerm::gen("t1").then(ProcessTerm::gen("t2"));
    let a = fixtures::fixture_a();
    let Guard::Partial(g) = &a.guard else {
        return Err(Error::GuardKindMismatch("partial", a.guard.kind()));
    };
    let source = a.net.transition_or_err("t1")?.source();
    let mut defined = 0;
    for x in all_tuples(&g.colors, &source) {
        defined += usize::from(eval_partial(&a.net, g, &t, &x)?.is_some());
    }
    let b = fixtures::fixture_b();
    let Guard::Span(sg) = &b.guard else {
        return Err(Error::GuardKindMismatch("span", b.guard.kind()));
    };
    let rows = eval_span(&b.net, sg, &t)?.len();
    if defined != 0 || rows != 0 {
        return Ok(Err(format!("t1;t2 defined on {defined} inputs, span has {rows} rows")));
    }
    Ok(Ok("t1;t2 is empty under both guards".into()))
}

fn freeness_counterexample() -> Check {
    let c = fixtures::fixture_c();
    let Guard::Span(g) = &c.guard else {
        return Err(Error::GuardKindMismatch("span", c.guard.kind()));
    };
    let tbl = eval_span(&c.net, g, &ProcessTerm::gen("f").then(ProcessTerm::gen("g")))?;
    let pairs: BTreeMap<_, _> = tbl.multiplicities();
    let relation = collapse_to_relation(&tbl);
    let runs = colored_runs(&c, &colored_marking([("X", "x")]), &colored_marking([("Z", "z")]), 2)?;
    let distinct: BTreeSet<_> = runs.iter().map(|r| r.internalized()).collect();
    if tbl.len() != 2 || pairs.len() != 1 || relation.len() != 1 || distinct.len() != 2 {
        return Ok(Err(format!(
            "{} witnesses over {} pairs, relation of {} pairs, {} runs",
            tbl.len(),
            pairs.len(),
            relation.len(),
            distinct.len()
        )));
    }
    Ok(Ok("2 witnesses, 1 related pair, 2 runs".into()))
}

fn synchronization_counterexample() -> Check {
    let d = fixtures::fixture_d();
    let (w, f) = fixtures::sync_witness();
    let victims: BTreeSet<String> = ["f", "g"].map(String::from).into();
    let direct = internalize(&synchronize(&d, &victims, &w, &f)?)?;
    let lifted = lifted_synchronize(&d, &victims, &w, &f)?;
    let iso = net_isomorphic(&direct.net, &lifted.net)?;
    let (n, m) = (direct.net.transitions().len(), lifted.net.transitions().len());
    if n != 1 || m != 2 || iso.is_some() {
        return Ok(Err(format!("{n} vs {m} transitions, isomorphic: {}", iso.is_some())));
    }
    Ok(Ok("1 vs 2 transitions, not isomorphic".into()))
}

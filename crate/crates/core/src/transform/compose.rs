//! Gluing operations on guarded nets: identification of generators along a
//! pair of witnesses, addition and erasing of transitions, and their
//! composite, synchronization. Each has a `lifted_*` counterpart that
//! performs the corresponding operation on internalizations.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::guard::{Guard, GuardedNet, PartialGuard, SpanEntry, SpanGuard};
use crate::internalize::{internalize, Internalized};
use crate::net::{Net, Transition};
use crate::term::{apply_permutation, transition_preserving_form, Word};
use crate::transform::functor::{check_flags, guard_difference, lift, pullback_guard, NetFunctor};

/// The coequalizer of two witnesses, with the maps realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientResult {
    pub guarded: GuardedNet,
    /// Every place of the original net to its class representative.
    pub place_map: BTreeMap<String, String>,
    pub transition_map: BTreeMap<String, String>,
}

/// Union-find over identifiers; the least identifier represents its class.
#[derive(Default)]
struct Classes(BTreeMap<String, String>);

impl Classes {
    fn find(&mut self, x: &str) -> String {
        let parent = match self.0.get(x) {
            None => return x.to_string(),
            Some(p) => p.clone(),
        };
        if parent == x {
            return parent;
        }
        let root = self.find(&parent);
        self.0.insert(x.to_string(), root.clone());
        root
    }

    fn union(&mut self, a: &str, b: &str) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0.insert(hi, lo.clone());
            self.0.insert(lo.clone(), lo);
        }
    }
}

/// Permutation reordering a sorted word after its places are renamed, so
/// that the renamed word is sorted again. Equal names keep their order.
fn rekey_permutation(word: &Word, rename: &dyn Fn(&str) -> String) -> Vec<usize> {
    let renamed: Vec<String> = word.0.iter().map(|p| rename(p)).collect();
    let mut order: Vec<usize> = (0..renamed.len()).collect();
    order.sort_by(|&a, &b| renamed[a].cmp(&renamed[b]).then(a.cmp(&b)));
    let mut perm = vec![0; order.len()];
    for (new_pos, &old_pos) in order.iter().enumerate() {
        perm[old_pos] = new_pos;
    }
    perm
}

/// A guard table re-expressed after renaming places (transition `tr` of the
/// original net).
enum Rekeyed {
    Partial(BTreeMap<Vec<String>, Vec<String>>),
    Span(Vec<SpanEntry>),
    None,
}

fn rekey(guard: &Guard, tr: &Transition, rename: &dyn Fn(&str) -> String) -> Rekeyed {
    let pre = rekey_permutation(&tr.source(), rename);
    let post = rekey_permutation(&tr.target(), rename);
    match guard {
        Guard::None => Rekeyed::None,
        Guard::Partial(g) => Rekeyed::Partial(
            g.table(&tr.id)
                .into_iter()
                .flatten()
                .map(|(k, v)| (apply_permutation(&pre, k), apply_permutation(&post, v)))
                .collect(),
        ),
        Guard::Span(g) => Rekeyed::Span(
            g.entries(&tr.id)
                .iter()
                .map(|e| SpanEntry {
                    witness: e.witness.clone(),
                    input: apply_permutation(&pre, &e.input),
                    output: apply_permutation(&post, &e.output),
                })
                .collect(),
        ),
    }
}

fn same_table(a: &Rekeyed, b: &Rekeyed) -> bool {
    match (a, b) {
        (Rekeyed::None, Rekeyed::None) => true,
        (Rekeyed::Partial(x), Rekeyed::Partial(y)) => x == y,
        (Rekeyed::Span(x), Rekeyed::Span(y)) => {
            let key = |v: &[SpanEntry]| {
                let mut k: Vec<_> = v.iter().map(|e| (e.input.clone(), e.output.clone())).collect();
                k.sort();
                k
            };
            key(x) == key(y)
        }
        _ => false,
    }
}

/// Assembles a guarded net from transitions and their (already re-keyed)
/// tables, keeping the color sets given.
fn assemble(
    places: Vec<String>,
    transitions: Vec<(Transition, Rekeyed)>,
    like: &Guard,
    colors: impl Fn(&str) -> Option<BTreeSet<String>>,
) -> GuardedNet {
    let color_sets: BTreeMap<String, BTreeSet<String>> = places
        .iter()
        .filter_map(|p| colors(p).map(|c| (p.clone(), c)))
        .collect();
    let mut partial = BTreeMap::new();
    let mut span = BTreeMap::new();
    let mut trs = Vec::with_capacity(transitions.len());
    for (t, table) in transitions {
        match table {
            Rekeyed::Partial(tbl) => {
                partial.insert(t.id.clone(), tbl);
            }
            Rekeyed::Span(e) => {
                span.insert(t.id.clone(), e);
            }
            Rekeyed::None => {}
        }
        trs.push(t);
    }
    let guard = match like {
        Guard::None => Guard::None,
        Guard::Partial(_) => Guard::Partial(PartialGuard {
            colors: color_sets,
            tables: partial,
        }),
        Guard::Span(_) => Guard::Span(SpanGuard {
            colors: color_sets,
            tables: span,
        }),
    };
    GuardedNet::new(Net::new(places, trs), guard)
}

fn colors_of(guard: &Guard, p: &str) -> Option<BTreeSet<String>> {
    guard.colors().and_then(|c| c.get(p).cloned())
}

/// Renames places and transitions injectively, re-keying guard tables to the
/// sorted order of the new names. Unmapped identifiers are kept.
pub fn rename_guarded(
    gn: &GuardedNet,
    places: &BTreeMap<String, String>,
    transitions: &BTreeMap<String, String>,
) -> Result<GuardedNet> {
    let rename = |p: &str| places.get(p).cloned().unwrap_or_else(|| p.to_string());
    let new_places: BTreeSet<String> = gn.net.places().iter().map(|p| rename(p)).collect();
    if new_places.len() != gn.net.places().len() {
        return Err(Error::Precondition("place renaming is not injective".into()));
    }
    let trs = gn
        .net
        .transitions()
        .iter()
        .map(|t| {
            let id = transitions.get(&t.id).cloned().unwrap_or_else(|| t.id.clone());
            let table = rekey(&gn.guard, t, &rename);
            let renamed = Transition {
                id,
                pre: t.pre.map(|p| rename(p)),
                post: t.post.map(|p| rename(p)),
            };
            (renamed, table)
        })
        .collect::<Vec<_>>();
    let ids: BTreeSet<&String> = trs.iter().map(|(t, _)| &t.id).collect();
    if ids.len() != trs.len() {
        return Err(Error::Precondition("transition renaming is not injective".into()));
    }
    let back: BTreeMap<String, String> = gn.net.places().iter().map(|p| (rename(p), p.clone())).collect();
    Ok(assemble(new_places.into_iter().collect(), trs, &gn.guard, |p| {
        colors_of(&gn.guard, &back[p])
    }))
}

/// Quotients `m` by the equivalence generated by `l(x) ~ r(x)` on the
/// generators of `o`. Both witnesses must be transition-preserving, send
/// places to places, and induce the same guard on `o`.
pub fn identify(o: &Net, l: &NetFunctor, r: &NetFunctor, m: &GuardedNet) -> Result<QuotientResult> {
    for (side, f) in [("left", l), ("right", r)] {
        f.validate(o, &m.net)?;
        let flags = check_flags(f, o, &m.net);
        if !flags.transition_preserving {
            return Err(Error::Precondition(format!(
                "{side} witness is not transition-preserving"
            )));
        }
        if !flags.place_to_place {
            return Err(Error::Precondition(format!(
                "{side} witness does not send places to places"
            )));
        }
    }
    let (gl, gr) = (pullback_guard(l, o, m)?, pullback_guard(r, o, m)?);
    if let Some(why) = guard_difference(o, &gl, &gr)? {
        return Err(Error::Precondition(format!(
            "the witnesses induce different guards: {why}"
        )));
    }

    let mut places = Classes::default();
    for p in o.places() {
        places.union(&l.objects[p].0[0], &r.objects[p].0[0]);
    }
    let mut transitions = Classes::default();
    for t in o.transitions() {
        let gen = |f: &NetFunctor| {
            transition_preserving_form(&m.net, &f.morphisms[&t.id])
                .map(|(_, g, _)| g)
                .expect("checked transition-preserving")
        };
        transitions.union(&gen(l), &gen(r));
    }

    let place_map: BTreeMap<String, String> = m.net.places().iter().map(|p| (p.clone(), places.find(p))).collect();
    let transition_map: BTreeMap<String, String> = m
        .net
        .transitions()
        .iter()
        .map(|t| (t.id.clone(), transitions.find(&t.id)))
        .collect();
    let rename = |p: &str| place_map[p].clone();

    let mut members: BTreeMap<&str, Vec<&Transition>> = BTreeMap::new();
    for t in m.net.transitions() {
        members.entry(&transition_map[&t.id]).or_default().push(t);
    }
    let mut out_transitions = Vec::new();
    for (rep, group) in members {
        let head = group[0];
        debug_assert_eq!(head.id, rep);
        let quotient_t = Transition {
            id: rep.to_string(),
            pre: head.pre.map(|p| rename(p)),
            post: head.post.map(|p| rename(p)),
        };
        let table = rekey(&m.guard, head, &rename);
        for other in &group[1..] {
            if other.pre.map(|p| rename(p)) != quotient_t.pre || other.post.map(|p| rename(p)) != quotient_t.post {
                return Err(Error::Precondition(format!(
                    "`{}` and `{rep}` are identified but have different boundaries",
                    other.id
                )));
            }
            if !same_table(&table, &rekey(&m.guard, other, &rename)) {
                return Err(Error::Precondition(format!(
                    "guard does not descend: `{}` and `{rep}` have different tables",
                    other.id
                )));
            }
        }
        out_transitions.push((quotient_t, table));
    }
    let reps: BTreeSet<String> = place_map.values().cloned().collect();
    for p in m.net.places() {
        if colors_of(&m.guard, p) != colors_of(&m.guard, &place_map[p]) {
            return Err(Error::Precondition(format!(
                "identified places `{p}` and `{}` have different color sets",
                place_map[p]
            )));
        }
    }
    let guarded = assemble(reps.into_iter().collect(), out_transitions, &m.guard, |p| {
        colors_of(&m.guard, p)
    });
    Ok(QuotientResult {
        guarded,
        place_map,
        transition_map,
    })
}

/// Adds the transitions of `w_net` to `k`, translating places along
/// `objects` (each a single place) and using `w_guard` as their guard.
pub fn add_guarded(
    k: &GuardedNet,
    w_net: &Net,
    w_guard: &Guard,
    objects: &BTreeMap<String, Word>,
) -> Result<GuardedNet> {
    if k.guard.kind() != w_guard.kind() {
        return Err(Error::GuardKindMismatch(k.guard.kind(), w_guard.kind()));
    }
    let place = |p: &str| -> String { objects[p].0[0].clone() };
    let mut transitions: Vec<(Transition, Rekeyed)> = k
        .net
        .transitions()
        .iter()
        .map(|t| (t.clone(), rekey(&k.guard, t, &|p: &str| p.to_string())))
        .collect();
    for u in w_net.transitions() {
        if k.net.transition(&u.id).is_some() {
            return Err(Error::Precondition(format!(
                "transition `{}` already exists in the target net",
                u.id
            )));
        }
        let t = Transition {
            id: u.id.clone(),
            pre: u.pre.map(|p| place(p)),
            post: u.post.map(|p| place(p)),
        };
        transitions.push((t, rekey(w_guard, u, &place)));
    }
    Ok(assemble(k.net.places().to_vec(), transitions, &k.guard, |p| {
        colors_of(&k.guard, p)
    }))
}

fn check_generator_embedding(w_net: &Net, w: &NetFunctor, dst: &Net) -> Result<()> {
    w.validate(w_net, dst)?;
    let flags = check_flags(w, w_net, dst);
    if !flags.place_to_place {
        return Err(Error::Precondition(
            "the addition witness must send places to places".into(),
        ));
    }
    if !flags.injective_on_objects {
        return Err(Error::Precondition(
            "the addition witness must be injective on objects".into(),
        ));
    }
    Ok(())
}

/// Adds one transition per transition of `w_net`; its guard is the
/// evaluation of its image under `w` in `k`.
pub fn add_generators(k: &GuardedNet, w_net: &Net, w: &NetFunctor) -> Result<GuardedNet> {
    check_generator_embedding(w_net, w, &k.net)?;
    let pulled = pullback_guard(w, w_net, k)?;
    add_guarded(k, w_net, &pulled, &w.objects)
}

/// Removes `victims` and their guard tables; places are kept.
pub fn erase_generators(n: &GuardedNet, victims: &BTreeSet<String>) -> Result<GuardedNet> {
    if let Some(v) = victims.iter().find(|v| n.net.transition(v).is_none()) {
        return Err(Error::UnknownTransition(v.clone()));
    }
    let keep = n
        .net
        .transitions()
        .iter()
        .filter(|t| !victims.contains(&t.id))
        .map(|t| (t.clone(), rekey(&n.guard, t, &|p: &str| p.to_string())))
        .collect();
    Ok(assemble(n.net.places().to_vec(), keep, &n.guard, |p| {
        colors_of(&n.guard, p)
    }))
}

/// Erases `victims` and adds the transitions of `w_net`. The guard of the
/// new transitions is computed in `n`, before erasing, so that images may
/// mention the erased transitions.
pub fn synchronize(n: &GuardedNet, victims: &BTreeSet<String>, w_net: &Net, w: &NetFunctor) -> Result<GuardedNet> {
    check_generator_embedding(w_net, w, &n.net)?;
    let pulled = pullback_guard(w, w_net, n)?;
    let k = erase_generators(n, victims)?;
    add_guarded(&k, w_net, &pulled, &w.objects)
}

/// Data of an identification carried over to internalizations: the
/// internalized witness net with the lifted witnesses, and the internalized
/// target.
pub struct LiftedIdentification {
    pub witness: Net,
    pub left: NetFunctor,
    pub right: NetFunctor,
    pub target: GuardedNet,
}

pub fn lift_identification(o: &Net, l: &NetFunctor, r: &NetFunctor, m: &GuardedNet) -> Result<LiftedIdentification> {
    let o_g = GuardedNet::new(o.clone(), pullback_guard(l, o, m)?);
    let (oi, mi) = (internalize(&o_g)?, internalize(m)?);
    let left = lift(l, &o_g, m, &oi, &mi)?;
    let right = lift(r, &o_g, m, &oi, &mi)?;
    Ok(LiftedIdentification {
        witness: oi.net,
        left,
        right,
        target: mi.as_guarded(),
    })
}

/// `identify` performed on internalizations with the lifted witnesses.
pub fn lifted_identify(o: &Net, l: &NetFunctor, r: &NetFunctor, m: &GuardedNet) -> Result<QuotientResult> {
    let li = lift_identification(o, l, r, m)?;
    identify(&li.witness, &li.left, &li.right, &li.target)
}

struct LiftedWitness {
    net: Internalized,
    functor: NetFunctor,
}

fn lift_addition_witness(k: &GuardedNet, w_net: &Net, w: &NetFunctor, ki: &Internalized) -> Result<LiftedWitness> {
    let w_g = GuardedNet::new(w_net.clone(), pullback_guard(w, w_net, k)?);
    let wi = internalize(&w_g)?;
    let functor = lift(w, &w_g, k, &wi, ki)?;
    Ok(LiftedWitness { net: wi, functor })
}

/// `add_generators` performed on internalizations.
pub fn lifted_add(k: &GuardedNet, w_net: &Net, w: &NetFunctor) -> Result<GuardedNet> {
    check_generator_embedding(w_net, w, &k.net)?;
    let ki = internalize(k)?;
    let lw = lift_addition_witness(k, w_net, w, &ki)?;
    add_generators(&ki.as_guarded(), &lw.net.net, &lw.functor)
}

/// `erase_generators` performed on the internalization: every copy of a
/// victim is erased.
pub fn lifted_erase(n: &GuardedNet, victims: &BTreeSet<String>) -> Result<GuardedNet> {
    let ni = internalize(n)?;
    let lifted: BTreeSet<String> = ni
        .projection
        .transitions
        .iter()
        .filter(|(_, (base, _))| victims.contains(base))
        .map(|(name, _)| name.clone())
        .collect();
    erase_generators(&ni.as_guarded(), &lifted)
}

/// Erase-then-add on the internalization of `n`, erasing only the copies of
/// victims that occur in the lifted images of `w`.
pub fn lifted_synchronize(
    n: &GuardedNet,
    victims: &BTreeSet<String>,
    w_net: &Net,
    w: &NetFunctor,
) -> Result<GuardedNet> {
    check_generator_embedding(w_net, w, &n.net)?;
    let ni = internalize(n)?;
    let lw = lift_addition_witness(n, w_net, w, &ni)?;
    let lifted_victims: BTreeSet<String> = lw
        .functor
        .morphisms
        .values()
        .flat_map(|t| t.generators())
        .filter(|g| {
            ni.projection
                .transitions
                .get(*g)
                .is_some_and(|(base, _)| victims.contains(base))
        })
        .map(str::to_string)
        .collect();
    synchronize(&ni.as_guarded(), &lifted_victims, &lw.net.net, &lw.functor)
}

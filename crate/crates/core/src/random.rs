//! Seeded generators of small guarded nets and of instances for the
//! composition operations.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::guard::{all_tuples, ColorSets, Guard, GuardedNet, PartialGuard, SpanEntry, SpanGuard, Tuple};
use crate::internalize::ColoredMarking;
use crate::net::{Net, Transition};
use crate::term::{permutation_between, symmetry_for, transition_term, ProcessTerm, Word};
use crate::transform::{rename_guarded, NetFunctor};

/// The generator used everywhere a seed is given.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Partial,
    Span,
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub places: usize,
    pub colors: usize,
    pub transitions: usize,
    /// Largest pre or post multiset.
    pub arity: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            places: 4,
            colors: 4,
            transitions: 4,
            arity: 2,
        }
    }
}

fn pick_tuple<R: Rng>(rng: &mut R, colors: &ColorSets, word: &Word) -> Option<Tuple> {
    word.0
        .iter()
        .map(|p| {
            let cs: Vec<&String> = colors[p].iter().collect();
            cs.choose(rng).map(|c| (*c).clone())
        })
        .collect()
}

pub fn random_guarded_net<R: Rng>(rng: &mut R, flavor: Flavor, lim: Limits) -> GuardedNet {
    let np = rng.gen_range(1..=lim.places);
    let places: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
    let colors: ColorSets = places
        .iter()
        .map(|p| {
            let k = if rng.gen_ratio(1, 10) {
                0
            } else {
                rng.gen_range(1..=lim.colors)
            };
            (p.clone(), (0..k).map(|i| format!("c{i}")).collect())
        })
        .collect();
    let nt = rng.gen_range(0..=lim.transitions);
    let side = |rng: &mut R| -> Vec<String> {
        let n = rng.gen_range(0..=lim.arity);
        (0..n).map(|_| places.choose(rng).expect("nonempty").clone()).collect()
    };
    let transitions: Vec<Transition> = (0..nt)
        .map(|i| {
            let pre = side(rng);
            let post = side(rng);
            Transition::new(format!("t{i}"), pre, post)
        })
        .collect();
    let net = Net::new(places.clone(), transitions);

    let guard = match flavor {
        Flavor::Partial => {
            let mut tables = BTreeMap::new();
            for t in net.transitions() {
                let mut tbl = BTreeMap::new();
                for x in all_tuples(&colors, &t.source()) {
                    if rng.gen_bool(0.6) {
                        if let Some(y) = pick_tuple(rng, &colors, &t.target()) {
                            tbl.insert(x, y);
                        }
                    }
                }
                tables.insert(t.id.clone(), tbl);
            }
            Guard::Partial(PartialGuard { colors, tables })
        }
        Flavor::Span => {
            let mut tables = BTreeMap::new();
            for t in net.transitions() {
                let mut entries = Vec::new();
                for x in all_tuples(&colors, &t.source()) {
                    for _ in 0..rng.gen_range(0..=2) {
                        if let Some(y) = pick_tuple(rng, &colors, &t.target()) {
                            entries.push(SpanEntry {
                                witness: format!("s{}", entries.len()),
                                input: x.clone(),
                                output: y,
                            });
                        }
                    }
                }
                tables.insert(t.id.clone(), entries);
            }
            Guard::Span(SpanGuard { colors, tables })
        }
    };
    GuardedNet::new(net, guard)
}

/// A colored marking with at most `max_tokens` tokens.
pub fn random_colored_marking<R: Rng>(rng: &mut R, gn: &GuardedNet, max_tokens: usize) -> ColoredMarking {
    let kinds: Vec<(String, String)> = gn
        .guard
        .colors()
        .into_iter()
        .flatten()
        .flat_map(|(p, cs)| cs.iter().map(move |c| (p.clone(), c.clone())))
        .collect();
    let mut m = ColoredMarking::new();
    if kinds.is_empty() {
        return m;
    }
    for _ in 0..rng.gen_range(0..=max_tokens) {
        m.insert(kinds.choose(rng).expect("nonempty").clone());
    }
    m
}

/// Data for `identify`: `o` is glued into `target` along `left` and `right`.
#[derive(Clone, Debug)]
pub struct IdentificationInstance {
    pub overlap: Net,
    pub left: NetFunctor,
    pub right: NetFunctor,
    pub target: GuardedNet,
}

/// A subnet: some transitions, every place they touch, and possibly a few
/// more places.
pub fn random_subnet<R: Rng>(rng: &mut R, net: &Net) -> Net {
    let transitions: Vec<Transition> = net
        .transitions()
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .cloned()
        .collect();
    let mut places: BTreeSet<String> = transitions
        .iter()
        .flat_map(|t| t.pre.distinct().chain(t.post.distinct()).cloned())
        .collect();
    for p in net.places() {
        if rng.gen_bool(0.3) {
            places.insert(p.clone());
        }
    }
    Net::new(places, transitions)
}

/// Two copies of a random net glued along a random subnet. The second copy
/// renames its places by a random permutation, so the right witness needs
/// symmetries around its generators.
pub fn random_identification<R: Rng>(rng: &mut R, flavor: Flavor, lim: Limits) -> IdentificationInstance {
    let k = random_guarded_net(rng, flavor, lim);
    let overlap = random_subnet(rng, &k.net);
    let mut shuffled = k.net.places().to_vec();
    shuffled.shuffle(rng);
    let renaming: BTreeMap<String, String> = k
        .net
        .places()
        .iter()
        .zip(&shuffled)
        .map(|(p, q)| (p.clone(), format!("{q}'")))
        .collect();
    let copy = rename_guarded(&k, &renaming, &BTreeMap::new()).expect("renaming is injective");
    let target = GuardedNet::disjoint_union(&k, &copy).expect("same guard kind");

    let witness = |place: &dyn Fn(&str) -> String, tag: &str| -> NetFunctor {
        let objects: BTreeMap<String, Word> = overlap
            .places()
            .iter()
            .map(|p| (p.clone(), Word(vec![place(p)])))
            .collect();
        let image = |w: &Word| Word(w.0.iter().map(|p| place(p)).collect());
        let morphisms = overlap
            .transitions()
            .iter()
            .map(|t| {
                let tr = target
                    .net
                    .transition(&format!("{tag}:{}", t.id))
                    .expect("copied transition");
                let term = transition_term(tr, &image(&t.source()), &image(&t.target()))
                    .expect("boundaries agree up to order");
                (t.id.clone(), term)
            })
            .collect();
        NetFunctor { objects, morphisms }
    };
    let left = witness(&|p| format!("0:{p}"), "0");
    let right = witness(&|p| format!("1:{}", renaming[p]), "1");
    IdentificationInstance {
        overlap,
        left,
        right,
        target,
    }
}

/// Data for `add_generators`.
#[derive(Clone, Debug)]
pub struct AdditionInstance {
    pub base: GuardedNet,
    pub generators: Net,
    pub witness: NetFunctor,
}

/// `σ ; term ; σ′` with the symmetries sorting both boundaries.
fn sorted_boundaries(net: &Net, term: ProcessTerm) -> ProcessTerm {
    let (s, e) = crate::term::typecheck(net, &term).expect("well-typed");
    let sort = |w: &Word| {
        let mut v = w.0.clone();
        v.sort();
        Word(v)
    };
    let (ss, se) = (sort(&s), sort(&e));
    let before = permutation_between(&ss, &s).expect("same multiset");
    let after = permutation_between(&e, &se).expect("same multiset");
    symmetry_for(&before, &ss)
        .expect("permutation")
        .then(term)
        .then(symmetry_for(&after, &e).expect("permutation"))
}

/// New generators whose images are single transitions, parallel pairs or
/// sequential pairs of transitions of a random net.
pub fn random_addition<R: Rng>(rng: &mut R, flavor: Flavor, lim: Limits) -> AdditionInstance {
    let base = random_guarded_net(rng, flavor, lim);
    let net = &base.net;
    let tag = |p: &str| format!("w:{p}");
    let mut transitions = Vec::new();
    let mut morphisms = BTreeMap::new();
    let trs = net.transitions();
    if !trs.is_empty() {
        for i in 0..rng.gen_range(1..=3) {
            let a = trs.choose(rng).expect("nonempty");
            let b = trs.choose(rng).expect("nonempty");
            let term = match rng.gen_range(0..3) {
                0 => ProcessTerm::gen(a.id.clone()),
                1 => sorted_boundaries(
                    net,
                    ProcessTerm::gen(a.id.clone()).tensor(ProcessTerm::gen(b.id.clone())),
                ),
                _ if a.post == b.pre => ProcessTerm::gen(a.id.clone()).then(ProcessTerm::gen(b.id.clone())),
                _ => ProcessTerm::gen(a.id.clone()),
            };
            let (s, e) = crate::term::typecheck(net, &term).expect("well-typed");
            let id = format!("n{i}");
            transitions.push(Transition::new(
                id.clone(),
                s.0.iter().map(|p| tag(p)),
                e.0.iter().map(|p| tag(p)),
            ));
            morphisms.insert(id, term);
        }
    }
    let generators = Net::new(net.places().iter().map(|p| tag(p)), transitions);
    let objects = net.places().iter().map(|p| (tag(p), Word(vec![p.clone()]))).collect();
    AdditionInstance {
        base,
        generators,
        witness: NetFunctor { objects, morphisms },
    }
}

pub fn random_victims<R: Rng>(rng: &mut R, net: &Net) -> BTreeSet<String> {
    net.transitions()
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .map(|t| t.id.clone())
        .collect()
}

mod common;

use std::collections::BTreeMap;

use guardnet::fixtures;
use guardnet::guard::{all_tuples, Guard, PartialGuard, SpanGuard};
use guardnet::net::{Net, Transition};
use guardnet::random::Flavor;
use guardnet::semantics::{collapse_to_relation, embed_partial_as_span, eval_partial, eval_span};
use guardnet::term::{seq, symmetry_for, typecheck, ProcessTerm, Word};
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// The element at position i lands at position perm[i].
fn permute(perm: &[usize], x: &[String]) -> Vec<String> {
    let mut out = x.to_vec();
    for (i, &j) in perm.iter().enumerate() {
        out[j] = x[i].clone();
    }
    out
}

fn partial_fixtures() -> Vec<(&'static str, Net, PartialGuard)> {
    fixtures::all()
        .into_iter()
        .filter_map(|(n, gn)| match gn.guard {
            Guard::Partial(g) => Some((n, gn.net, g)),
            _ => None,
        })
        .collect()
}

fn span_fixtures() -> Vec<(&'static str, Net, SpanGuard)> {
    fixtures::all()
        .into_iter()
        .filter_map(|(n, gn)| match gn.guard {
            Guard::Span(g) => Some((n, gn.net, g)),
            _ => None,
        })
        .collect()
}

/// Every composable pair of generators of `net`.
fn composable(net: &Net) -> Vec<(&Transition, &Transition)> {
    let ts = net.transitions();
    ts.iter()
        .flat_map(|f| ts.iter().map(move |g| (f, g)))
        .filter(|(f, g)| f.target() == g.source())
        .collect()
}

#[test]
fn symmetries_permute_tuples() {
    let places = ["A", "B", "A", "C"];
    let colors: BTreeMap<String, _> = ["A", "B", "C"]
        .into_iter()
        .map(|p| (p.to_string(), ["r", "s"].map(String::from).into()))
        .collect();
    let net = Net::new(["A", "B", "C"], []);
    let partial = PartialGuard {
        colors: colors.clone(),
        tables: BTreeMap::new(),
    };
    let span = embed_partial_as_span(&partial);
    for n in 0..=4 {
        let w = Word(places[..n].iter().map(|p| p.to_string()).collect());
        for perm in permutations(n) {
            let term = symmetry_for(&perm, &w).unwrap();
            let (s, e) = typecheck(&net, &term).unwrap();
            assert_eq!(s, w);
            assert_eq!(e.0, permute(&perm, &w.0));
            let tuples = all_tuples(&colors, &w);
            for x in &tuples {
                let y = eval_partial(&net, &partial, &term, x).unwrap();
                assert_eq!(y, Some(permute(&perm, x)), "{perm:?} on {x:?}");
            }
            let rows = eval_span(&net, &span, &term).unwrap();
            assert_eq!(rows.len(), tuples.len());
            assert!(rows.rows.iter().all(|r| r.output == permute(&perm, &r.input)));
        }
    }
}

#[test]
fn partial_evaluation_is_functorial() {
    for (name, net, g) in partial_fixtures() {
        for (f, h) in composable(&net) {
            let both = ProcessTerm::gen(&f.id).then(ProcessTerm::gen(&h.id));
            for x in all_tuples(&g.colors, &f.source()) {
                let stepwise = g
                    .table(&f.id)
                    .and_then(|t| t.get(&x))
                    .and_then(|y| g.table(&h.id).and_then(|t| t.get(y)))
                    .cloned();
                assert_eq!(eval_partial(&net, &g, &both, &x).unwrap(), stepwise, "{name}: {both}");
            }
        }
    }
}

#[test]
fn span_composites_count_witness_pairs() {
    for (name, net, g) in span_fixtures() {
        for (f, h) in composable(&net) {
            let both = ProcessTerm::gen(&f.id).then(ProcessTerm::gen(&h.id));
            let expected: usize = g
                .entries(&f.id)
                .iter()
                .map(|e| g.entries(&h.id).iter().filter(|k| k.input == e.output).count())
                .sum();
            assert_eq!(eval_span(&net, &g, &both).unwrap().len(), expected, "{name}: {both}");
        }
        for t in net.transitions() {
            let single = eval_span(&net, &g, &ProcessTerm::gen(&t.id)).unwrap();
            assert_eq!(single.len(), g.entries(&t.id).len());
        }
    }
}

#[test]
fn parallel_evaluation_splits() {
    for (name, net, g) in partial_fixtures() {
        for f in net.transitions() {
            for h in net.transitions() {
                let par = ProcessTerm::gen(&f.id).tensor(ProcessTerm::gen(&h.id));
                let (s, _) = typecheck(&net, &par).unwrap();
                for x in all_tuples(&g.colors, &s) {
                    let (l, r) = x.split_at(f.pre.len());
                    let left = eval_partial(&net, &g, &ProcessTerm::gen(&f.id), l).unwrap();
                    let right = eval_partial(&net, &g, &ProcessTerm::gen(&h.id), r).unwrap();
                    let expected = left.zip(right).map(|(a, b)| [a, b].concat());
                    assert_eq!(eval_partial(&net, &g, &par, &x).unwrap(), expected, "{name}");
                }
            }
        }
    }
    for (name, net, g) in span_fixtures() {
        for f in net.transitions() {
            for h in net.transitions() {
                let par = ProcessTerm::gen(&f.id).tensor(ProcessTerm::gen(&h.id));
                let n = eval_span(&net, &g, &par).unwrap().len();
                assert_eq!(n, g.entries(&f.id).len() * g.entries(&h.id).len(), "{name}");
            }
        }
    }
}

#[test]
fn identities_evaluate_to_identities() {
    for (_, net, g) in partial_fixtures() {
        for p in net.places() {
            let w = Word::from_iter([p.as_str(), p.as_str()]);
            for x in all_tuples(&g.colors, &w) {
                assert_eq!(
                    eval_partial(&net, &g, &ProcessTerm::Id(w.clone()), &x).unwrap(),
                    Some(x)
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn sequential_boundaries(names in prop::collection::vec(0usize..3, 1..5)) {
        // A chain of P1 -> P2 -> P3 transitions wrapped in identities.
        let net = fixtures::fixture_a().net;
        let gens = ["t1", "t2"];
        let pick = |i: usize| match i {
            0 => ProcessTerm::gen(gens[0]),
            1 => ProcessTerm::gen(gens[1]),
            _ => ProcessTerm::id(["P2"]),
        };
        for pair in names.windows(2) {
            let (f, g) = (pick(pair[0]), pick(pair[1]));
            if let Ok(t) = seq(&net, f.clone(), g.clone()) {
                let (s, e) = typecheck(&net, &t).unwrap();
                prop_assert_eq!(s, typecheck(&net, &f).unwrap().0);
                prop_assert_eq!(e, typecheck(&net, &g).unwrap().1);
            }
        }
    }

    #[test]
    fn parallel_boundaries_are_strict(ids in prop::collection::vec(0usize..2, 3)) {
        let net = fixtures::fixture_a().net;
        let t = |i: usize| ProcessTerm::gen(["t1", "t2"][ids[i]]);
        let left = t(0).tensor(t(1)).tensor(t(2));
        let right = t(0).tensor(t(1).tensor(t(2)));
        prop_assert_eq!(typecheck(&net, &left).unwrap(), typecheck(&net, &right).unwrap());
        let unit = ProcessTerm::Id(Word::unit());
        prop_assert_eq!(typecheck(&net, &unit.clone().tensor(t(0))).unwrap(), typecheck(&net, &t(0)).unwrap());
        prop_assert_eq!(typecheck(&net, &t(0).tensor(unit)).unwrap(), typecheck(&net, &t(0)).unwrap());
    }

    #[test]
    fn embedding_then_collapsing_recovers_the_graph(seed in any::<u64>()) {
        let gn = common::guarded(seed, Flavor::Partial);
        let Guard::Partial(g) = &gn.guard else { unreachable!() };
        let span = embed_partial_as_span(g);
        for t in gn.net.transitions() {
            let rel = collapse_to_relation(&eval_span(&gn.net, &span, &ProcessTerm::gen(&t.id)).unwrap());
            let graph: std::collections::BTreeSet<_> = g
                .table(&t.id)
                .into_iter()
                .flatten()
                .map(|(x, y)| (x.clone(), y.clone()))
                .collect();
            prop_assert_eq!(rel, graph);
        }
    }
}

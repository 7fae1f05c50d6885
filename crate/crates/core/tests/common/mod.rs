#![allow(dead_code)]

use guardnet::guard::GuardedNet;
use guardnet::net::{Marking, Net, Transition};
use guardnet::random::{self, Flavor, Limits};
use proptest::prelude::*;

fn place(i: usize) -> String {
    format!("p{i}")
}

/// Plain nets with `1..=max_places` places and arcs of weight up to 2.
pub fn net(max_places: usize, max_transitions: usize) -> impl Strategy<Value = Net> {
    (1..=max_places).prop_flat_map(move |np| {
        let side = prop::collection::vec(0..np, 0..=2);
        prop::collection::vec((side.clone(), side), 0..=max_transitions).prop_map(move |ts| {
            Net::new(
                (0..np).map(place),
                ts.into_iter().enumerate().map(|(i, (pre, post))| {
                    Transition::new(format!("t{i}"), pre.into_iter().map(place), post.into_iter().map(place))
                }),
            )
        })
    })
}

pub fn marking_of(net: &Net, max_tokens: usize) -> impl Strategy<Value = Marking> {
    let places = net.places().to_vec();
    prop::collection::vec(prop::sample::select(places), 0..=max_tokens).prop_map(|v| v.into_iter().collect())
}

pub fn net_with_marking(max_places: usize) -> impl Strategy<Value = (Net, Marking)> {
    net(max_places, 4).prop_flat_map(|n| {
        let m = marking_of(&n, 4);
        (Just(n), m)
    })
}

/// A seeded random guarded net of the given flavor.
pub fn guarded(seed: u64, flavor: Flavor) -> GuardedNet {
    random::random_guarded_net(&mut random::rng(seed), flavor, Limits::default())
}

pub fn flavor() -> impl Strategy<Value = Flavor> {
    prop_oneof![Just(Flavor::Partial), Just(Flavor::Span)]
}

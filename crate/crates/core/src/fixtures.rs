//! The shipped example nets, compiled into the library.

use crate::bundle::{parse_bundle, parse_functor, Bundle};
use crate::guard::GuardedNet;
use crate::net::Net;
use crate::transform::NetFunctor;

/// Names of the shipped bundle files.
pub const NAMES: [&str; 7] = [
    "fixture_a",
    "fixture_b",
    "fixture_c",
    "fixture_d",
    "identification_overlap",
    "identification_target",
    "sync_generators",
];

/// Raw text of a shipped bundle or functor file.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fixture_a" => include_str!("../fixtures/fixture_a.json"),
        "fixture_b" => include_str!("../fixtures/fixture_b.json"),
        "fixture_c" => include_str!("../fixtures/fixture_c.json"),
        "fixture_d" => include_str!("../fixtures/fixture_d.json"),
        "identification_overlap" => include_str!("../fixtures/identification_overlap.json"),
        "identification_target" => include_str!("../fixtures/identification_target.json"),
        "identification_left" => include_str!("../fixtures/identification_left.json"),
        "identification_right" => include_str!("../fixtures/identification_right.json"),
        "sync_generators" => include_str!("../fixtures/sync_generators.json"),
        "sync_functor" => include_str!("../fixtures/sync_functor.json"),
        _ => return None,
    })
}

/// A shipped bundle. Panics on unknown names.
pub fn bundle(name: &str) -> Bundle {
    let text = source(name).unwrap_or_else(|| panic!("no fixture named `{name}`"));
    parse_bundle(text).unwrap_or_else(|e| panic!("fixture `{name}`: {e}"))
}

fn functor(name: &str) -> NetFunctor {
    let text = source(name).unwrap_or_else(|| panic!("no fixture named `{name}`"));
    parse_functor(text).unwrap_or_else(|e| panic!("fixture `{name}`: {e}"))
}

/// Partial guard: t1 sends red and blue to green, t2 sends yellow to purple.
pub fn fixture_a() -> GuardedNet {
    bundle("fixture_a").guarded
}

/// Span guard on the same net, with two witnesses red → green.
pub fn fixture_b() -> GuardedNet {
    bundle("fixture_b").guarded
}

/// Maximal relations as spans: two paths from x to z.
pub fn fixture_c() -> GuardedNet {
    bundle("fixture_c").guarded
}

/// f: x ↦ y1, g: y1 ↦ z and y2 ↦ z.
pub fn fixture_d() -> GuardedNet {
    bundle("fixture_d").guarded
}

/// The four guarded example nets.
pub fn all() -> Vec<(&'static str, GuardedNet)> {
    vec![
        ("fixture_a", fixture_a()),
        ("fixture_b", fixture_b()),
        ("fixture_c", fixture_c()),
        ("fixture_d", fixture_d()),
    ]
}

/// One transition `fg: X → Z` sent to `f ; g` in [`fixture_d`].
pub fn sync_witness() -> (Net, NetFunctor) {
    (bundle("sync_generators").guarded.net, functor("sync_functor"))
}

/// Two copies of a binary transition, glued along `k: P ⊗ Q → R`. The right
/// witness needs a symmetry since the second copy sorts its inputs the other
/// way round.
pub fn identification_witness() -> (Net, NetFunctor, NetFunctor, GuardedNet) {
    (
        bundle("identification_overlap").guarded.net,
        functor("identification_left"),
        functor("identification_right"),
        bundle("identification_target").guarded,
    )
}

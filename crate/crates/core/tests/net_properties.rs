mod common;

use std::collections::BTreeMap;

use guardnet::iso::net_isomorphic;
use guardnet::multiset::Multiset;
use guardnet::net::Net;
use proptest::prelude::*;

/// Isomorphism by trying every place bijection: with places fixed, the
/// transitions match iff the multisets of renamed (pre, post) pairs agree.
fn brute_force_isomorphic(a: &Net, b: &Net) -> bool {
    if a.places().len() != b.places().len() || a.transitions().len() != b.transitions().len() {
        return false;
    }
    let arcs = |net: &Net, rename: &dyn Fn(&String) -> String| -> Multiset<(Vec<String>, Vec<String>)> {
        net.transitions()
            .iter()
            .map(|t| {
                let mut pre: Vec<String> = t.pre.elements().map(rename).collect();
                let mut post: Vec<String> = t.post.elements().map(rename).collect();
                pre.sort();
                post.sort();
                (pre, post)
            })
            .collect()
    };
    let target = arcs(b, &|p| p.clone());
    let n = a.places().len();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let map: BTreeMap<&String, &String> = a.places().iter().zip(perm.iter().map(|&j| &b.places()[j])).collect();
        if arcs(a, &|p| map[p].clone()) == target {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `net` with places and transitions renamed through shuffled indices.
fn shuffled(net: &Net, places: &[usize], transitions: &[usize]) -> Net {
    let p = net
        .places()
        .iter()
        .zip(places)
        .map(|(x, &i)| (x.clone(), format!("q{i}")))
        .collect();
    let t = net
        .transitions()
        .iter()
        .zip(transitions)
        .map(|(x, &i)| (x.id.clone(), format!("u{i}")))
        .collect();
    net.rename(&p, &t)
}

fn shuffled_copy(max_places: usize) -> impl Strategy<Value = (Net, Net)> {
    common::net(max_places, 5).prop_flat_map(|n| {
        let p = Just((0..n.places().len()).collect::<Vec<_>>()).prop_shuffle();
        let t = Just((0..n.transitions().len()).collect::<Vec<_>>()).prop_shuffle();
        (Just(n), p, t).prop_map(|(n, p, t)| {
            let copy = shuffled(&n, &p, &t);
            (n, copy)
        })
    })
}

proptest! {
    #[test]
    fn firing_conserves_tokens((net, m) in common::net_with_marking(5)) {
        for t in net.enabled(&m).unwrap() {
            let tr = net.transition(&t).unwrap();
            let after = net.fire(&m, &t).unwrap();
            prop_assert_eq!(after.len() + tr.pre.len(), m.len() + tr.post.len());
        }
    }

    #[test]
    fn enabling_is_monotone((net, m) in common::net_with_marking(5), extra in 0usize..4) {
        let bigger = m.union(&net.places().iter().take(extra).cloned().collect());
        let small = net.enabled(&m).unwrap();
        let large = net.enabled(&bigger).unwrap();
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn union_is_associative_commutative_unital(
        a in common::net(3, 3),
        b in common::net(3, 3),
        c in common::net(3, 3),
    ) {
        let ab_c = Net::disjoint_union(&Net::disjoint_union(&a, &b), &c);
        let a_bc = Net::disjoint_union(&a, &Net::disjoint_union(&b, &c));
        prop_assert!(net_isomorphic(&ab_c, &a_bc).unwrap().is_some());
        let ab = Net::disjoint_union(&a, &b);
        let ba = Net::disjoint_union(&b, &a);
        prop_assert!(net_isomorphic(&ab, &ba).unwrap().is_some());
        let unit = Net::disjoint_union(&a, &Net::empty());
        prop_assert!(net_isomorphic(&unit, &a).unwrap().is_some());
    }

    #[test]
    fn isomorphism_finds_renamings((a, b) in shuffled_copy(8)) {
        let iso = net_isomorphic(&a, &b).unwrap();
        prop_assert!(iso.as_ref().is_some_and(|i| i.verify(&a, &b)));
        prop_assert!(net_isomorphic(&a, &a).unwrap().is_some());
    }

    #[test]
    fn isomorphism_agrees_with_brute_force(a in common::net(6, 4), b in common::net(6, 4)) {
        let expected = brute_force_isomorphic(&a, &b);
        let ab = net_isomorphic(&a, &b).unwrap();
        let ba = net_isomorphic(&b, &a).unwrap();
        prop_assert_eq!(ab.is_some(), expected);
        prop_assert_eq!(ba.is_some(), expected);
        if let Some(i) = ab {
            prop_assert!(i.verify(&a, &b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Near misses at the size limit: a renamed copy with one arc moved.
    #[test]
    fn isomorphism_agrees_with_brute_force_at_eight_places(
        (a, b) in shuffled_copy(8),
        victim in any::<prop::sample::Index>(),
        to in any::<prop::sample::Index>(),
    ) {
        let b = if b.transitions().is_empty() {
            b
        } else {
            let mut ts = b.transitions().to_vec();
            let t = victim.get_mut(&mut ts);
            t.post.insert(to.get(b.places()).clone());
            Net::new(b.places().to_vec(), ts)
        };
        prop_assert_eq!(net_isomorphic(&a, &b).unwrap().is_some(), brute_force_isomorphic(&a, &b));
    }
}

#[test]
fn brute_force_oracle_sanity() {
    let a = Net::new(["x", "y"], [guardnet::net::Transition::new("t", ["x"], ["y"])]);
    let b = Net::new(["m", "n"], [guardnet::net::Transition::new("s", ["n"], ["m"])]);
    let c = Net::new(["m", "n"], [guardnet::net::Transition::new("s", ["n"], ["n"])]);
    assert!(brute_force_isomorphic(&a, &b));
    assert!(!brute_force_isomorphic(&a, &c));
}

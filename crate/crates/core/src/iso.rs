//! Isomorphism of plain nets by joint color refinement followed by
//! individualization and backtracking.
//!
//! Both nets are refined together so that colors are comparable across
//! them; a branch dies as soon as the color histograms differ.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::net::Net;

pub const DEFAULT_PLACE_CAP: usize = 64;
/// Search nodes explored before giving up.
pub const SEARCH_BUDGET: usize = 200_000;

/// Bijections of places and transitions preserving pre and post exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetIsomorphism {
    pub places: BTreeMap<String, String>,
    pub transitions: BTreeMap<String, String>,
}

impl NetIsomorphism {
    /// Checks the defining property against both nets.
    pub fn verify(&self, a: &Net, b: &Net) -> bool {
        if self.places.len() != a.places().len()
            || self.transitions.len() != a.transitions().len()
            || a.places().len() != b.places().len()
            || a.transitions().len() != b.transitions().len()
        {
            return false;
        }
        let mut hit: Vec<&String> = self.places.values().collect();
        hit.sort();
        hit.dedup();
        if hit.len() != b.places().len() || hit.iter().any(|p| !b.has_place(p)) {
            return false;
        }
        let mut hit_t: Vec<&String> = self.transitions.values().collect();
        hit_t.sort();
        hit_t.dedup();
        if hit_t.len() != b.transitions().len() {
            return false;
        }
        a.transitions().iter().all(|t| {
            let Some(u) = self.transitions.get(&t.id).and_then(|id| b.transition(id)) else {
                return false;
            };
            let map = |m: &Multiset<String>| m.map(|p| self.places.get(p).cloned().unwrap_or_default());
            map(&t.pre) == u.pre && map(&t.post) == u.post
        })
    }
}

/// Bipartite incidence structure: nodes `0..np` are places, `np..` are
/// transitions. Edge labels distinguish direction and multiplicity.
struct Incidence {
    np: usize,
    adj: Vec<Vec<(u8, u32, usize)>>,
}

impl Incidence {
    fn new(net: &Net) -> Self {
        let np = net.places().len();
        let index: BTreeMap<&str, usize> = net.places().iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let mut adj = vec![Vec::new(); np + net.transitions().len()];
        for (k, t) in net.transitions().iter().enumerate() {
            let tn = np + k;
            for (kind, side) in [(0u8, &t.pre), (1u8, &t.post)] {
                for (p, n) in side.iter() {
                    let pn = index[p.as_str()];
                    adj[pn].push((kind, n, tn));
                    adj[tn].push((kind + 2, n, pn));
                }
            }
        }
        Incidence { np, adj }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }
}

type Signature = (u32, Vec<(u8, u32, u32)>);

fn signature(g: &Incidence, colors: &[u32], v: usize) -> Signature {
    let mut s: Vec<(u8, u32, u32)> = g.adj[v].iter().map(|&(k, n, w)| (k, n, colors[w])).collect();
    s.sort_unstable();
    (colors[v], s)
}

fn histogram(colors: &[u32]) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for &c in colors {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

/// Refines both colorings to a joint stable partition. Returns false when
/// the nets are told apart.
fn refine(ga: &Incidence, gb: &Incidence, ca: &mut Vec<u32>, cb: &mut Vec<u32>) -> bool {
    let mut classes = histogram(ca).len().max(histogram(cb).len());
    loop {
        let sa: Vec<Signature> = (0..ga.len()).map(|v| signature(ga, ca, v)).collect();
        let sb: Vec<Signature> = (0..gb.len()).map(|v| signature(gb, cb, v)).collect();
        let mut ids: BTreeMap<&Signature, u32> = sa.iter().chain(sb.iter()).map(|s| (s, 0)).collect();
        for (i, v) in ids.values_mut().enumerate() {
            *v = i as u32;
        }
        *ca = sa.iter().map(|s| ids[s]).collect();
        *cb = sb.iter().map(|s| ids[s]).collect();
        if histogram(ca) != histogram(cb) {
            return false;
        }
        if ids.len() == classes {
            return true;
        }
        classes = ids.len();
    }
}

struct Search<'a> {
    a: &'a Net,
    b: &'a Net,
    ga: Incidence,
    gb: Incidence,
    nodes: usize,
}

impl Search<'_> {
    fn run(&mut self, mut ca: Vec<u32>, mut cb: Vec<u32>) -> Result<Option<NetIsomorphism>> {
        self.nodes += 1;
        if self.nodes > SEARCH_BUDGET {
            return Err(Error::SearchBudget(SEARCH_BUDGET));
        }
        if !refine(&self.ga, &self.gb, &mut ca, &mut cb) {
            return Ok(None);
        }
        let np = self.ga.np;
        let place_hist = histogram(&ca[..np]);
        let target = place_hist
            .iter()
            .filter(|(_, &n)| n > 1)
            .min_by_key(|(&c, &n)| (n, c))
            .map(|(&c, _)| c);
        let Some(color) = target else {
            return Ok(self.finish(&ca, &cb));
        };
        let v = (0..np).find(|&i| ca[i] == color).expect("class is nonempty");
        let fresh = ca.iter().chain(cb.iter()).max().map_or(0, |m| m + 1);
        for w in (0..np).filter(|&j| cb[j] == color) {
            let (mut na, mut nb) = (ca.clone(), cb.clone());
            na[v] = fresh;
            nb[w] = fresh;
            if let Some(iso) = self.run(na, nb)? {
                return Ok(Some(iso));
            }
        }
        Ok(None)
    }

    /// All place classes are singletons: read off the place bijection and
    /// match transitions by their mapped boundaries.
    fn finish(&self, ca: &[u32], cb: &[u32]) -> Option<NetIsomorphism> {
        let np = self.ga.np;
        let by_color: BTreeMap<u32, usize> = (0..np).map(|j| (cb[j], j)).collect();
        let places: BTreeMap<String, String> = (0..np)
            .map(|i| (self.a.places()[i].clone(), self.b.places()[by_color[&ca[i]]].clone()))
            .collect();
        type Key = (Multiset<String>, Multiset<String>);
        let mut pool: BTreeMap<Key, Vec<&str>> = BTreeMap::new();
        for u in self.b.transitions().iter().rev() {
            pool.entry((u.pre.clone(), u.post.clone())).or_default().push(&u.id);
        }
        let mut transitions = BTreeMap::new();
        for t in self.a.transitions() {
            let key = (t.pre.map(|p| places[p].clone()), t.post.map(|p| places[p].clone()));
            let u = pool.get_mut(&key)?.pop()?;
            transitions.insert(t.id.clone(), u.to_string());
        }
        Some(NetIsomorphism { places, transitions })
    }
}

/// Finds an isomorphism between two valid nets, if one exists.
pub fn net_isomorphic(a: &Net, b: &Net) -> Result<Option<NetIsomorphism>> {
    net_isomorphic_with_cap(a, b, DEFAULT_PLACE_CAP)
}

pub fn net_isomorphic_with_cap(a: &Net, b: &Net, cap: usize) -> Result<Option<NetIsomorphism>> {
    let largest = a.places().len().max(b.places().len());
    if largest > cap {
        return Err(Error::TooLarge { places: largest, cap });
    }
    if a.places().len() != b.places().len() || a.transitions().len() != b.transitions().len() {
        return Ok(None);
    }
    let (ga, gb) = (Incidence::new(a), Incidence::new(b));
    let init = |g: &Incidence| -> Vec<u32> { (0..g.len()).map(|v| u32::from(v >= g.np)).collect() };
    let (ca, cb) = (init(&ga), init(&gb));
    let mut search = Search { a, b, ga, gb, nodes: 0 };
    let found = search.run(ca, cb)?;
    debug_assert!(found.as_ref().is_none_or(|iso| iso.verify(a, b)));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::net::Transition;

    #[test]
    fn reflexive_with_identity() {
        for (_, gn) in fixtures::all() {
            let iso = net_isomorphic(&gn.net, &gn.net).unwrap().unwrap();
            assert!(iso.places.iter().all(|(k, v)| k == v));
            assert!(iso.transitions.iter().all(|(k, v)| k == v));
        }
    }

    #[test]
    fn renaming_is_found() {
        let a = fixtures::fixture_a().net;
        let places = [("P1", "c"), ("P2", "a"), ("P3", "b")]
            .map(|(x, y)| (x.to_string(), y.to_string()))
            .into();
        let renamed = a.rename(&places, &BTreeMap::new());
        let iso = net_isomorphic(&a, &renamed).unwrap().unwrap();
        assert_eq!(iso.places, places);
    }

    #[test]
    fn fixture_a_and_d_differ_in_structure() {
        // the base nets are both chains; with guards internalized they differ
        let a = crate::internalize::internalize(&fixtures::fixture_a()).unwrap();
        let d = crate::internalize::internalize(&fixtures::fixture_d()).unwrap();
        assert!(net_isomorphic(&a.net, &d.net).unwrap().is_none());
    }

    #[test]
    fn regular_structures_need_backtracking() {
        // two 3-cycles vs one 6-cycle: refinement alone cannot separate them
        let cycle = |names: &[&str], prefix: &str| -> Vec<Transition> {
            (0..names.len())
                .map(|i| Transition::new(format!("{prefix}{i}"), [names[i]], [names[(i + 1) % names.len()]]))
                .collect()
        };
        let mut two = cycle(&["a", "b", "c"], "x");
        two.extend(cycle(&["d", "e", "f"], "y"));
        let two = Net::new(["a", "b", "c", "d", "e", "f"], two);
        let one = Net::new(
            ["a", "b", "c", "d", "e", "f"],
            cycle(&["a", "b", "c", "d", "e", "f"], "z"),
        );
        assert!(net_isomorphic(&two, &one).unwrap().is_none());
        let shuffled = Net::new(
            ["a", "b", "c", "d", "e", "f"],
            cycle(&["f", "b", "d", "a", "c", "e"], "z"),
        );
        let iso = net_isomorphic(&one, &shuffled).unwrap().unwrap();
        assert!(iso.verify(&one, &shuffled));
    }

    #[test]
    fn cap_is_enforced() {
        let names: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();
        let n = Net::new(names.clone(), []);
        assert!(matches!(
            net_isomorphic_with_cap(&n, &n, 4),
            Err(Error::TooLarge { places: 5, cap: 4 })
        ));
        assert!(net_isomorphic_with_cap(&n, &n, 5).unwrap().is_some());
    }

    #[test]
    fn multiplicities_matter() {
        let a = Net::new(["p", "q"], [Transition::new("t", ["p", "p"], ["q"])]);
        let b = Net::new(["p", "q"], [Transition::new("t", ["p"], ["q", "q"])]);
        assert!(net_isomorphic(&a, &b).unwrap().is_none());
        assert!(net_isomorphic(&Net::empty(), &Net::empty()).unwrap().is_some());
    }
}

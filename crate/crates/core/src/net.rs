//! Plain place/transition nets and the token game.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Diagnostic, Error, Result};
use crate::multiset::Multiset;
use crate::term::Word;

pub type PlaceId = String;
pub type TransitionId = String;

/// A plain marking: a multiset of tokens over places.
pub type Marking = Multiset<PlaceId>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub id: TransitionId,
    pub pre: Multiset<PlaceId>,
    pub post: Multiset<PlaceId>,
}

impl Transition {
    pub fn new<I, J, S, T>(id: impl Into<String>, pre: I, post: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        Transition {
            id: id.into(),
            pre: pre.into_iter().map(Into::into).collect(),
            post: post.into_iter().map(Into::into).collect(),
        }
    }

    /// The sorted linearization of the pre multiset, used as the source word
    /// of this transition's generator.
    pub fn source(&self) -> Word {
        Word(self.pre.elements().cloned().collect())
    }

    pub fn target(&self) -> Word {
        Word(self.post.elements().cloned().collect())
    }
}

/// A Petri net. Places and transitions are kept sorted by identifier.
///
/// Duplicate identifiers are representable (so that [`Net::validate`] can
/// report them) but every other operation assumes a valid net.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Net {
    places: Vec<PlaceId>,
    transitions: Vec<Transition>,
}

impl Net {
    pub fn new<S: Into<String>>(
        places: impl IntoIterator<Item = S>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Self {
        let mut places: Vec<PlaceId> = places.into_iter().map(Into::into).collect();
        places.sort();
        let mut transitions: Vec<Transition> = transitions.into_iter().collect();
        transitions.sort_by(|a, b| a.id.cmp(&b.id));
        Net { places, transitions }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn places(&self) -> &[PlaceId] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn has_place(&self, p: &str) -> bool {
        self.places.binary_search_by(|x| x.as_str().cmp(p)).is_ok()
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions
            .binary_search_by(|t| t.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.transitions[i])
    }

    pub fn transition_or_err(&self, id: &str) -> Result<&Transition> {
        self.transition(id)
            .ok_or_else(|| Error::UnknownTransition(id.to_string()))
    }

    /// Reports every broken invariant; an empty list means the net is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for w in self.places.windows(2) {
            if w[0] == w[1] {
                out.push(Diagnostic::new(&w[0], "duplicate place identifier"));
            }
        }
        for w in self.transitions.windows(2) {
            if w[0].id == w[1].id {
                out.push(Diagnostic::new(&w[0].id, "duplicate transition identifier"));
            }
        }
        let places: BTreeSet<&str> = self.places.iter().map(String::as_str).collect();
        for t in &self.transitions {
            if places.contains(t.id.as_str()) {
                out.push(Diagnostic::new(
                    &t.id,
                    "identifier used for both a place and a transition",
                ));
            }
            for (role, ms) in [("pre", &t.pre), ("post", &t.post)] {
                for p in ms.distinct() {
                    if !places.contains(p.as_str()) {
                        out.push(Diagnostic::new(
                            p,
                            format!("unknown place in {role} of transition `{}`", t.id),
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn check_marking(&self, m: &Marking) -> Result<()> {
        match m.distinct().find(|p| !self.has_place(p)) {
            Some(p) => Err(Error::UnknownPlace(p.clone())),
            None => Ok(()),
        }
    }

    /// Transitions whose pre multiset is contained in `m`, in identifier order.
    pub fn enabled(&self, m: &Marking) -> Result<BTreeSet<TransitionId>> {
        self.check_marking(m)?;
        Ok(self
            .transitions
            .iter()
            .filter(|t| t.pre.is_subset_of(m))
            .map(|t| t.id.clone())
            .collect())
    }

    pub fn fire(&self, m: &Marking, t: &str) -> Result<Marking> {
        self.check_marking(m)?;
        let tr = self.transition_or_err(t)?;
        let rest = m.checked_sub(&tr.pre).ok_or_else(|| Error::NotEnabled(t.to_string()))?;
        Ok(rest.union(&tr.post))
    }

    /// Replays `seq` from `m`, returning every intermediate marking
    /// (including `m` itself).
    pub fn replay(&self, m: &Marking, seq: &FiringSequence) -> Result<Vec<Marking>> {
        let mut out = vec![m.clone()];
        let mut cur = m.clone();
        for t in &seq.0 {
            cur = self.fire(&cur, t)?;
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Places and transitions of `a` tagged `0:`, those of `b` tagged `1:`.
    pub fn disjoint_union(a: &Net, b: &Net) -> Net {
        fn tagged(net: &Net, tag: &str) -> (Vec<String>, Vec<Transition>) {
            let places = net.places.iter().map(|p| format!("{tag}:{p}")).collect();
            let transitions = net
                .transitions
                .iter()
                .map(|t| Transition {
                    id: format!("{tag}:{}", t.id),
                    pre: t.pre.map(|p| format!("{tag}:{p}")),
                    post: t.post.map(|p| format!("{tag}:{p}")),
                })
                .collect();
            (places, transitions)
        }
        let (mut places, mut transitions) = tagged(a, "0");
        let (pb, tb) = tagged(b, "1");
        places.extend(pb);
        transitions.extend(tb);
        Net::new(places, transitions)
    }

    /// Renames places and transitions; unmapped identifiers are kept.
    pub fn rename(&self, places: &BTreeMap<String, String>, transitions: &BTreeMap<String, String>) -> Net {
        let rp = |p: &String| places.get(p).cloned().unwrap_or_else(|| p.clone());
        Net::new(
            self.places.iter().map(rp),
            self.transitions.iter().map(|t| Transition {
                id: transitions.get(&t.id).cloned().unwrap_or_else(|| t.id.clone()),
                pre: t.pre.map(rp),
                post: t.post.map(rp),
            }),
        )
    }
}

impl fmt::Display for Net {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "places: {}", self.places.join(", "))?;
        for t in &self.transitions {
            writeln!(f, "{}: {} -> {}", t.id, t.pre, t.post)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiringSequence(pub Vec<TransitionId>);

impl FiringSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for FiringSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(", "))
    }
}

pub fn marking<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Marking {
    tokens.into_iter().map(Into::into).collect()
}

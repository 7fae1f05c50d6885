//! The Grothendieck construction on guarded nets.
//!
//! The internalized net has one place per (place, color) pair and one
//! transition per (transition, defined input tuple) for partial guards, or
//! per (transition, witness) for span guards. Its free category is the
//! category of elements of the guard, and [`Projection`] is the functor back
//! to the base net that forgets colors.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::guard::{Color, Guard, GuardedNet, PartialGuard, SpanGuard, Tuple};
use crate::multiset::Multiset;
use crate::net::{FiringSequence, Marking, Net, Transition};
use crate::term::{permutation_between, ProcessTerm, Word};

/// A marking of a guarded net: a multiset of (place, color) tokens.
pub type ColoredMarking = Multiset<(String, Color)>;

pub fn colored_marking<P: Into<String>, C: Into<String>>(tokens: impl IntoIterator<Item = (P, C)>) -> ColoredMarking {
    tokens.into_iter().map(|(p, c)| (p.into(), c.into())).collect()
}

/// What distinguishes the internalized copies of one base transition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    /// The defining input tuple (partial guards).
    Input(Tuple),
    /// The witness identifier (span guards).
    Witness(String),
}

pub fn place_name(place: &str, color: &str) -> String {
    format!("{place}@{color}")
}

pub fn transition_name(transition: &str, payload: &Payload) -> String {
    match payload {
        Payload::Input(x) => format!("{transition}@{}", x.join(",")),
        Payload::Witness(w) => format!("{transition}@{w}"),
    }
}

/// Generator-level data of the projection from an internalized net to its
/// base net.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Projection {
    pub places: BTreeMap<String, (String, Color)>,
    pub transitions: BTreeMap<String, (String, Payload)>,
}

impl Projection {
    pub fn base_place(&self, internal: &str) -> Result<&(String, Color)> {
        self.places
            .get(internal)
            .ok_or_else(|| Error::UnknownPlace(internal.to_string()))
    }

    pub fn base_transition(&self, internal: &str) -> Result<&(String, Payload)> {
        self.transitions
            .get(internal)
            .ok_or_else(|| Error::UnknownTransition(internal.to_string()))
    }

    /// Reverse lookup tables, keyed by base identifiers.
    pub fn index(&self) -> ProjectionIndex {
        ProjectionIndex {
            places: self.places.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
            transitions: self.transitions.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
        }
    }

    /// Forgets colors of a colored marking of the internalized net.
    pub fn project_marking(&self, cm: &ColoredMarking) -> Result<Marking> {
        let idx = self.index();
        for (tok, _) in cm.iter() {
            if !idx.places.contains_key(tok) {
                return Err(Error::UnknownPlace(place_name(&tok.0, &tok.1)));
            }
        }
        Ok(cm.map(|(p, _)| p.clone()))
    }

    /// Projects a plain marking of the internalized net.
    pub fn project_internal_marking(&self, m: &Marking) -> Result<Marking> {
        for p in m.distinct() {
            self.base_place(p)?;
        }
        Ok(m.map(|p| self.places[p].0.clone()))
    }

    pub fn project_sequence(&self, seq: &FiringSequence) -> Result<FiringSequence> {
        seq.0
            .iter()
            .map(|t| self.base_transition(t).map(|(b, _)| b.clone()))
            .collect::<Result<Vec<_>>>()
            .map(FiringSequence)
    }

    /// Reads a colored marking as a plain marking of the internalized net.
    pub fn colored_to_internal(&self, cm: &ColoredMarking) -> Result<Marking> {
        let idx = self.index();
        let mut out = Marking::new();
        for ((p, c), n) in cm.iter() {
            let name = idx
                .places
                .get(&(p.clone(), c.clone()))
                .ok_or_else(|| Error::ColorMismatch {
                    place: p.clone(),
                    color: c.clone(),
                })?;
            out.insert_n(name.clone(), n);
        }
        Ok(out)
    }

    pub fn internal_to_colored(&self, m: &Marking) -> Result<ColoredMarking> {
        let mut out = ColoredMarking::new();
        for (p, n) in m.iter() {
            out.insert_n(self.base_place(p)?.clone(), n);
        }
        Ok(out)
    }

    /// Applies the projection to a term of the internalized net.
    pub fn project_term(&self, t: &ProcessTerm) -> Result<ProcessTerm> {
        // Validate first so the infallible map below never sees unknowns.
        for g in t.generators() {
            self.base_transition(g)?;
        }
        check_term_places(self, t)?;
        Ok(t.map(&mut |g| self.transitions[g].0.clone(), &mut |p| {
            self.places[p].0.clone()
        }))
    }

    pub fn project_word(&self, w: &Word) -> Result<Word> {
        w.0.iter()
            .map(|p| self.base_place(p).map(|(b, _)| b.clone()))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Strictness of the projection on generators: every internalized
    /// transition projects onto its base transition's pre and post.
    pub fn is_net_morphism(&self, internal: &Net, base: &Net) -> bool {
        internal
            .places()
            .iter()
            .all(|p| self.places.get(p).is_some_and(|(b, _)| base.has_place(b)))
            && internal.transitions().iter().all(|t| {
                let Some((b, _)) = self.transitions.get(&t.id) else {
                    return false;
                };
                let Some(bt) = base.transition(b) else {
                    return false;
                };
                let pre = t
                    .pre
                    .map(|p| self.places.get(p).map(|x| x.0.clone()).unwrap_or_default());
                let post = t
                    .post
                    .map(|p| self.places.get(p).map(|x| x.0.clone()).unwrap_or_default());
                pre == bt.pre && post == bt.post
            })
    }
}

fn check_term_places(p: &Projection, t: &ProcessTerm) -> Result<()> {
    match t {
        ProcessTerm::Gen(_) => Ok(()),
        ProcessTerm::Id(w) => p.project_word(w).map(|_| ()),
        ProcessTerm::Sym(a, b) => {
            p.project_word(a)?;
            p.project_word(b).map(|_| ())
        }
        ProcessTerm::Seq(f, g) | ProcessTerm::Par(f, g) => {
            check_term_places(p, f)?;
            check_term_places(p, g)
        }
    }
}

/// Reverse projection maps: (base place, color) → internalized place and
/// (base transition, payload) → internalized transition.
#[derive(Clone, Debug, Default)]
pub struct ProjectionIndex {
    pub places: BTreeMap<(String, Color), String>,
    pub transitions: BTreeMap<(String, Payload), String>,
}

impl ProjectionIndex {
    pub fn place(&self, base: &str, color: &str) -> Result<&String> {
        self.places
            .get(&(base.to_string(), color.to_string()))
            .ok_or_else(|| Error::ColorMismatch {
                place: base.to_string(),
                color: color.to_string(),
            })
    }

    pub fn transition(&self, base: &str, payload: &Payload) -> Result<&String> {
        self.transitions
            .get(&(base.to_string(), payload.clone()))
            .ok_or_else(|| Error::UnknownTransition(transition_name(base, payload)))
    }

    /// The internalized word over `word` colored by `tuple`.
    pub fn colored_word(&self, word: &Word, tuple: &[Color]) -> Result<Word> {
        if word.len() != tuple.len() {
            return Err(Error::Arity {
                expected: word.len(),
                found: tuple.len(),
            });
        }
        word.0
            .iter()
            .zip(tuple)
            .map(|(p, c)| self.place(p, c).cloned())
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// The internalization of a guarded net together with its projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Internalized {
    pub net: Net,
    pub projection: Projection,
}

/// Transition name to (source, target) base positions.
pub(crate) type PortOrders = BTreeMap<String, (Vec<usize>, Vec<usize>)>;

impl Internalized {
    pub fn as_guarded(&self) -> GuardedNet {
        GuardedNet::new(self.net.clone(), Guard::None)
    }

    /// Source and target of the internalized transition `name` in the
    /// order of its base transition's boundary, rather than sorted.
    pub fn colored_boundary(&self, base: &GuardedNet, name: &str) -> Result<(Word, Word)> {
        let (t, payload) = self.projection.base_transition(name)?;
        let tr = base.net.transition_or_err(t)?;
        let (x, y) = match (&base.guard, payload) {
            (Guard::Partial(g), Payload::Input(x)) => {
                let y = g.table(t).and_then(|tbl| tbl.get(x));
                (x.clone(), y.cloned())
            }
            (Guard::Span(g), Payload::Witness(w)) => {
                let e = g.entries(t).iter().find(|e| &e.witness == w);
                (
                    e.map(|e| e.input.clone()).unwrap_or_default(),
                    e.map(|e| e.output.clone()),
                )
            }
            _ => (Vec::new(), None),
        };
        let y = y.ok_or_else(|| Error::UnknownTransition(name.to_string()))?;
        let idx = self.projection.index();
        Ok((idx.colored_word(&tr.source(), &x)?, idx.colored_word(&tr.target(), &y)?))
    }

    /// For each internalized transition, the base position of every
    /// position of its sorted source and target.
    pub(crate) fn port_orders(&self, base: &GuardedNet) -> Result<PortOrders> {
        let mut out = BTreeMap::new();
        for tr in self.net.transitions() {
            let (s, e) = self.colored_boundary(base, &tr.id)?;
            let mismatch = || Error::Precondition(format!("`{}` does not match its base transition", tr.id));
            let ins = permutation_between(&tr.source(), &s).ok_or_else(mismatch)?;
            let outs = permutation_between(&tr.target(), &e).ok_or_else(mismatch)?;
            out.insert(tr.id.clone(), (ins, outs));
        }
        Ok(out)
    }
}

struct Builder {
    places: Vec<String>,
    transitions: Vec<Transition>,
    projection: Projection,
}

impl Builder {
    fn new(net: &Net, colors: &crate::guard::ColorSets) -> Result<Self> {
        let mut b = Builder {
            places: Vec::new(),
            transitions: Vec::new(),
            projection: Projection::default(),
        };
        for p in net.places() {
            for c in colors.get(p).into_iter().flatten() {
                let name = place_name(p, c);
                if b.projection
                    .places
                    .insert(name.clone(), (p.clone(), c.clone()))
                    .is_some()
                {
                    return Err(Error::Precondition(format!(
                        "internalized place name `{name}` is ambiguous"
                    )));
                }
                b.places.push(name);
            }
        }
        Ok(b)
    }

    fn add(&mut self, tr: &Transition, payload: Payload, input: &Tuple, output: &Tuple) -> Result<()> {
        let name = transition_name(&tr.id, &payload);
        let colored = |word: Word, tuple: &Tuple| -> Multiset<String> {
            word.0.iter().zip(tuple).map(|(p, c)| place_name(p, c)).collect()
        };
        let t = Transition {
            id: name.clone(),
            pre: colored(tr.source(), input),
            post: colored(tr.target(), output),
        };
        if self
            .projection
            .transitions
            .insert(name.clone(), (tr.id.clone(), payload))
            .is_some()
        {
            return Err(Error::Precondition(format!(
                "internalized transition name `{name}` is ambiguous"
            )));
        }
        self.transitions.push(t);
        Ok(())
    }

    fn finish(self) -> Internalized {
        Internalized {
            net: Net::new(self.places, self.transitions),
            projection: self.projection,
        }
    }
}

fn ensure_valid(gn_net: &Net, diags: Vec<crate::error::Diagnostic>) -> Result<()> {
    let mut all = gn_net.validate();
    all.extend(diags);
    if all.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidGuard(all))
    }
}

pub fn internalize_partial(net: &Net, g: &PartialGuard) -> Result<Internalized> {
    ensure_valid(net, g.validate(net))?;
    let mut b = Builder::new(net, &g.colors)?;
    for tr in net.transitions() {
        for (x, y) in g.table(&tr.id).into_iter().flatten() {
            b.add(tr, Payload::Input(x.clone()), x, y)?;
        }
    }
    Ok(b.finish())
}

pub fn internalize_span(net: &Net, g: &SpanGuard) -> Result<Internalized> {
    ensure_valid(net, g.validate(net))?;
    let mut b = Builder::new(net, &g.colors)?;
    for tr in net.transitions() {
        for e in g.entries(&tr.id) {
            b.add(tr, Payload::Witness(e.witness.clone()), &e.input, &e.output)?;
        }
    }
    Ok(b.finish())
}

pub fn internalize(gn: &GuardedNet) -> Result<Internalized> {
    match &gn.guard {
        Guard::None => Err(Error::Unguarded),
        Guard::Partial(g) => internalize_partial(&gn.net, g),
        Guard::Span(g) => internalize_span(&gn.net, g),
    }
}

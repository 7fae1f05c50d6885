//! Guard data: color sets per place and per-transition tables, either as
//! partial functions or as spans with witnesses.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Diagnostic, Error, Result};
use crate::net::{Net, Transition};
use crate::term::Word;

pub type Color = String;
/// Colors along a word, one per position.
pub type Tuple = Vec<Color>;
pub type ColorSets = BTreeMap<String, BTreeSet<Color>>;

/// Deterministic guard: each transition acts as a partial function from input
/// tuples (along its sorted pre word) to output tuples (along its post word).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialGuard {
    pub colors: ColorSets,
    pub tables: BTreeMap<String, BTreeMap<Tuple, Tuple>>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanEntry {
    pub witness: String,
    pub input: Tuple,
    pub output: Tuple,
}

impl SpanEntry {
    pub fn new<S: Into<String>>(
        witness: impl Into<String>,
        input: impl IntoIterator<Item = S>,
        output: impl IntoIterator<Item = S>,
    ) -> Self {
        SpanEntry {
            witness: witness.into(),
            input: input.into_iter().map(Into::into).collect(),
            output: output.into_iter().map(Into::into).collect(),
        }
    }
}

/// Nondeterministic guard: each transition is a span whose apex elements
/// (witnesses) carry an input and an output tuple.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpanGuard {
    pub colors: ColorSets,
    pub tables: BTreeMap<String, Vec<SpanEntry>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Guard {
    /// No color data: the net is an ordinary Petri net.
    #[default]
    None,
    Partial(PartialGuard),
    Span(SpanGuard),
}

impl Guard {
    pub fn kind(&self) -> &'static str {
        match self {
            Guard::None => "none",
            Guard::Partial(_) => "partial",
            Guard::Span(_) => "span",
        }
    }

    pub fn colors(&self) -> Option<&ColorSets> {
        match self {
            Guard::None => None,
            Guard::Partial(g) => Some(&g.colors),
            Guard::Span(g) => Some(&g.colors),
        }
    }

    pub fn validate(&self, net: &Net) -> Vec<Diagnostic> {
        match self {
            Guard::None => Vec::new(),
            Guard::Partial(g) => g.validate(net),
            Guard::Span(g) => g.validate(net),
        }
    }
}

/// A net together with its guard.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GuardedNet {
    pub net: Net,
    pub guard: Guard,
}

impl GuardedNet {
    pub fn new(net: Net, guard: Guard) -> Self {
        GuardedNet { net, guard }
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut d = self.net.validate();
        d.extend(self.guard.validate(&self.net));
        d
    }

    pub fn colors_of(&self, place: &str) -> Result<&BTreeSet<Color>> {
        let colors = self.guard.colors().ok_or(Error::Unguarded)?;
        colors.get(place).ok_or_else(|| Error::UnknownPlace(place.to_string()))
    }

    /// Tagged disjoint union (see [`Net::disjoint_union`]) with the guards
    /// placed side by side. A partial guard meeting a span guard is read as
    /// the span of its graph.
    pub fn disjoint_union(a: &GuardedNet, b: &GuardedNet) -> Result<GuardedNet> {
        let net = Net::disjoint_union(&a.net, &b.net);
        fn tag<V: Clone>(m: &BTreeMap<String, V>, t: &str) -> BTreeMap<String, V> {
            m.iter().map(|(k, v)| (format!("{t}:{k}"), v.clone())).collect()
        }
        fn join<V: Clone>(x: &BTreeMap<String, V>, y: &BTreeMap<String, V>) -> BTreeMap<String, V> {
            let mut out = tag(x, "0");
            out.extend(tag(y, "1"));
            out
        }
        let as_span = |g: &Guard| match g {
            Guard::Partial(p) => Some(crate::semantics::embed_partial_as_span(p)),
            Guard::Span(s) => Some(s.clone()),
            Guard::None => None,
        };
        let guard = match (&a.guard, &b.guard) {
            (Guard::None, Guard::None) => Guard::None,
            (Guard::Partial(x), Guard::Partial(y)) => Guard::Partial(PartialGuard {
                colors: join(&x.colors, &y.colors),
                tables: join(&x.tables, &y.tables),
            }),
            (Guard::None, g) | (g, Guard::None) => return Err(Error::GuardKindMismatch("none", g.kind())),
            (x, y) => {
                let (x, y) = (as_span(x).expect("guarded"), as_span(y).expect("guarded"));
                Guard::Span(SpanGuard {
                    colors: join(&x.colors, &y.colors),
                    tables: join(&x.tables, &y.tables),
                })
            }
        };
        Ok(GuardedNet::new(net, guard))
    }
}

fn validate_colors(net: &Net, colors: &ColorSets, out: &mut Vec<Diagnostic>) {
    for p in net.places() {
        if !colors.contains_key(p) {
            out.push(Diagnostic::new(p, "place has no color set"));
        }
    }
    for p in colors.keys() {
        if !net.has_place(p) {
            out.push(Diagnostic::new(p, "color set given for an unknown place"));
        }
    }
}

fn validate_tuple(
    colors: &ColorSets,
    word: &Word,
    tuple: &Tuple,
    subject: &str,
    role: &str,
    out: &mut Vec<Diagnostic>,
) {
    if tuple.len() != word.len() {
        out.push(Diagnostic::new(
            subject,
            format!(
                "{role} tuple has arity {} but the transition needs {}",
                tuple.len(),
                word.len()
            ),
        ));
        return;
    }
    for (p, c) in word.0.iter().zip(tuple) {
        let ok = colors.get(p).is_some_and(|cs| cs.contains(c));
        if !ok {
            out.push(Diagnostic::new(
                subject,
                format!("{role} color `{c}` is not in the color set of place `{p}`"),
            ));
        }
    }
}

fn table_transition<'a>(net: &'a Net, id: &str, out: &mut Vec<Diagnostic>) -> Option<&'a Transition> {
    let t = net.transition(id);
    if t.is_none() {
        out.push(Diagnostic::new(id, "guard table for an unknown transition"));
    }
    t
}

impl PartialGuard {
    pub fn validate(&self, net: &Net) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        validate_colors(net, &self.colors, &mut out);
        for (id, table) in &self.tables {
            let Some(tr) = table_transition(net, id, &mut out) else {
                continue;
            };
            let (src, tgt) = (tr.source(), tr.target());
            for (k, v) in table {
                validate_tuple(&self.colors, &src, k, id, "input", &mut out);
                validate_tuple(&self.colors, &tgt, v, id, "output", &mut out);
            }
        }
        out
    }

    pub fn table(&self, t: &str) -> Option<&BTreeMap<Tuple, Tuple>> {
        self.tables.get(t)
    }
}

impl SpanGuard {
    pub fn validate(&self, net: &Net) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        validate_colors(net, &self.colors, &mut out);
        for (id, entries) in &self.tables {
            let Some(tr) = table_transition(net, id, &mut out) else {
                continue;
            };
            let (src, tgt) = (tr.source(), tr.target());
            let mut seen = BTreeSet::new();
            for e in entries {
                if !seen.insert(&e.witness) {
                    out.push(Diagnostic::new(id, format!("duplicate witness `{}`", e.witness)));
                }
                validate_tuple(&self.colors, &src, &e.input, id, "input", &mut out);
                validate_tuple(&self.colors, &tgt, &e.output, id, "output", &mut out);
            }
        }
        out
    }

    pub fn entries(&self, t: &str) -> &[SpanEntry] {
        self.tables.get(t).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// All tuples along `word`, in lexicographic order of the color sets.
pub fn all_tuples(colors: &ColorSets, word: &Word) -> Vec<Tuple> {
    let mut out: Vec<Tuple> = vec![Vec::new()];
    for p in &word.0 {
        let cs: Vec<&Color> = colors.get(p).map(|s| s.iter().collect()).unwrap_or_default();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                cs.iter().map(move |c| {
                    let mut t = prefix.clone();
                    t.push((*c).clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Checks that `tuple` is a valid element of the color set of `word`.
pub fn check_tuple(colors: &ColorSets, word: &Word, tuple: &[Color]) -> Result<()> {
    if tuple.len() != word.len() {
        return Err(Error::Arity {
            expected: word.len(),
            found: tuple.len(),
        });
    }
    for (p, c) in word.0.iter().zip(tuple) {
        let cs = colors.get(p).ok_or_else(|| Error::UnknownPlace(p.clone()))?;
        if !cs.contains(c) {
            return Err(Error::ColorMismatch {
                place: p.clone(),
                color: c.clone(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixtures_validate() {
        for (name, gn) in fixtures::all() {
            assert!(gn.validate().is_empty(), "{name}: {:?}", gn.validate());
        }
    }

    #[test]
    fn wrong_arity_is_diagnosed() {
        let mut gn = fixtures::fixture_a();
        let Guard::Partial(g) = &mut gn.guard else {
            unreachable!()
        };
        g.tables
            .get_mut("t1")
            .unwrap()
            .insert(vec!["red".into(), "blue".into()], vec!["green".into()]);
        let d = gn.validate();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("arity 2"));
    }

    #[test]
    fn foreign_color_is_diagnosed() {
        let mut gn = fixtures::fixture_a();
        let Guard::Partial(g) = &mut gn.guard else {
            unreachable!()
        };
        g.tables
            .get_mut("t2")
            .unwrap()
            .insert(vec!["green".into()], vec!["red".into()]);
        let d = gn.validate();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("`red`"));
    }

    #[test]
    fn duplicate_witness_is_diagnosed() {
        let mut gn = fixtures::fixture_b();
        let Guard::Span(g) = &mut gn.guard else { unreachable!() };
        g.tables
            .get_mut("t1")
            .unwrap()
            .push(SpanEntry::new("s1", ["red"], ["green"]));
        assert_eq!(gn.validate().len(), 1);
    }

    #[test]
    fn unit_tuple_for_empty_word() {
        let colors = ColorSets::new();
        assert_eq!(all_tuples(&colors, &Word::unit()), vec![Vec::<String>::new()]);
    }
}

//! Strict monoidal functors between free categories of nets, presented by
//! their action on generators, and their lifting to internalizations.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::guard::{all_tuples, Color, ColorSets, Guard, GuardedNet, PartialGuard, SpanEntry, SpanGuard, Tuple};
use crate::internalize::{internalize, Internalized, Payload, ProjectionIndex};
use crate::net::Net;
use crate::semantics::{eval_partial, eval_span, WitnessPath};
use crate::term::{reorder, transition_preserving_form, typecheck, wrap, Diagram, PortMap, ProcessTerm, Word};

/// A strict monoidal functor `Free(src) → Free(dst)` given by the image of
/// every place (a word) and of every transition (a term).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetFunctor {
    pub objects: BTreeMap<String, Word>,
    pub morphisms: BTreeMap<String, ProcessTerm>,
}

impl NetFunctor {
    pub fn identity(net: &Net) -> Self {
        NetFunctor {
            objects: net
                .places()
                .iter()
                .map(|p| (p.clone(), Word(vec![p.clone()])))
                .collect(),
            morphisms: net
                .transitions()
                .iter()
                .map(|t| (t.id.clone(), ProcessTerm::Gen(t.id.clone())))
                .collect(),
        }
    }

    pub fn object(&self, p: &str) -> Result<&Word> {
        self.objects
            .get(p)
            .ok_or_else(|| Error::InvalidFunctor(format!("no image for place `{p}`")))
    }

    pub fn morphism(&self, t: &str) -> Result<&ProcessTerm> {
        self.morphisms
            .get(t)
            .ok_or_else(|| Error::InvalidFunctor(format!("no image for transition `{t}`")))
    }

    /// Image of a word: the concatenation of the images of its places.
    pub fn apply_word(&self, w: &Word) -> Result<Word> {
        let mut out = Vec::new();
        for p in &w.0 {
            out.extend(self.object(p)?.0.iter().cloned());
        }
        Ok(Word(out))
    }

    /// Checks that every generator has an image and that image boundaries
    /// match the images of the generator's boundaries.
    pub fn validate(&self, src: &Net, dst: &Net) -> Result<()> {
        for p in src.places() {
            for q in &self.object(p)?.0 {
                if !dst.has_place(q) {
                    return Err(Error::InvalidFunctor(format!(
                        "image of place `{p}` mentions unknown place `{q}`"
                    )));
                }
            }
        }
        for t in src.transitions() {
            let image = self.morphism(&t.id)?;
            let (s, e) =
                typecheck(dst, image).map_err(|e| Error::InvalidFunctor(format!("image of `{}`: {e}", t.id)))?;
            let (es, ee) = (self.apply_word(&t.source())?, self.apply_word(&t.target())?);
            if s != es || e != ee {
                return Err(Error::InvalidFunctor(format!(
                    "image of `{}` has boundary {s} → {e}, expected {es} → {ee}",
                    t.id
                )));
            }
        }
        for p in self.objects.keys() {
            if !src.has_place(p) {
                return Err(Error::InvalidFunctor(format!(
                    "object image given for unknown place `{p}`"
                )));
            }
        }
        for t in self.morphisms.keys() {
            if src.transition(t).is_none() {
                return Err(Error::InvalidFunctor(format!(
                    "morphism image given for unknown transition `{t}`"
                )));
            }
        }
        Ok(())
    }
}

/// Properties of a functor computed from its generator data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    /// Every transition goes to `σ ; g ; σ′`.
    pub transition_preserving: bool,
    /// Every place goes to a single place.
    pub place_to_place: bool,
    pub injective_on_objects: bool,
    /// Distinct transitions have distinct images.
    pub faithful_on_generators: bool,
}

impl Flags {
    /// Every flag set in `other` is also set in `self`.
    pub fn includes(&self, other: &Flags) -> bool {
        (!other.transition_preserving || self.transition_preserving)
            && (!other.place_to_place || self.place_to_place)
            && (!other.injective_on_objects || self.injective_on_objects)
            && (!other.faithful_on_generators || self.faithful_on_generators)
    }
}

pub fn check_flags(f: &NetFunctor, src: &Net, dst: &Net) -> Flags {
    let images: Vec<&Word> = src.places().iter().filter_map(|p| f.objects.get(p)).collect();
    let transition_preserving = src.transitions().iter().all(|t| {
        f.morphisms
            .get(&t.id)
            .and_then(|m| transition_preserving_form(dst, m))
            .is_some()
    });
    let place_to_place = images.len() == src.places().len() && images.iter().all(|w| w.len() == 1);
    let injective_on_objects = images.len() == src.places().len() && is_uniquely_decodable(&images);
    let distinct: BTreeSet<String> = src
        .transitions()
        .iter()
        .filter_map(|t| f.morphisms.get(&t.id))
        .map(|m| m.to_json().to_string())
        .collect();
    Flags {
        transition_preserving,
        place_to_place,
        injective_on_objects,
        faithful_on_generators: distinct.len() == src.transitions().len(),
    }
}

/// Whether the words form a code: the monoid map from place words is
/// injective iff no image is empty, images are pairwise distinct and the
/// Sardinas-Patterson test finds no ambiguous factorization.
fn is_uniquely_decodable(code: &[&Word]) -> bool {
    let words: BTreeSet<&[String]> = code.iter().map(|w| w.0.as_slice()).collect();
    if words.len() != code.len() || words.iter().any(|w| w.is_empty()) {
        return false;
    }
    let residual = |a: &BTreeSet<Vec<String>>, b: &BTreeSet<&[String]>| {
        let mut out = BTreeSet::new();
        for x in a {
            for y in b {
                if y.len() > x.len() && y.starts_with(x) {
                    out.insert(y[x.len()..].to_vec());
                }
                if x.len() > y.len() && x.starts_with(y) {
                    out.insert(x[y.len()..].to_vec());
                }
            }
        }
        out
    };
    let as_owned: BTreeSet<Vec<String>> = words.iter().map(|w| w.to_vec()).collect();
    // S1: dangling suffixes between distinct codewords
    let mut current = BTreeSet::new();
    for x in &as_owned {
        for y in &words {
            if y.len() > x.len() && y.starts_with(x) {
                current.insert(y[x.len()..].to_vec());
            }
        }
    }
    let mut seen: BTreeSet<BTreeSet<Vec<String>>> = BTreeSet::new();
    loop {
        if current.iter().any(|s| words.contains(s.as_slice())) {
            return false;
        }
        if current.is_empty() || !seen.insert(current.clone()) {
            return true;
        }
        current = residual(&current, &words);
    }
}

/// Converts between colors of a source place and tuples along its image.
/// Places sent to a single place keep their colors; places sent to other
/// words get tuples rendered with commas.
#[derive(Clone, Debug, Default)]
pub(crate) struct ColorCodec {
    decode: BTreeMap<String, BTreeMap<Color, Tuple>>,
    lengths: BTreeMap<String, usize>,
}

impl ColorCodec {
    pub(crate) fn new(f: &NetFunctor, src: &Net, dst_colors: &ColorSets) -> Result<Self> {
        let mut codec = ColorCodec::default();
        for p in src.places() {
            let image = f.object(p)?;
            let mut table = BTreeMap::new();
            for tuple in all_tuples(dst_colors, image) {
                let name = if image.len() == 1 {
                    tuple[0].clone()
                } else {
                    tuple.join(",")
                };
                if table.insert(name.clone(), tuple).is_some() {
                    return Err(Error::InvalidFunctor(format!(
                        "color `{name}` of place `{p}` does not decode uniquely"
                    )));
                }
            }
            codec.decode.insert(p.clone(), table);
            codec.lengths.insert(p.clone(), image.len());
        }
        Ok(codec)
    }

    pub(crate) fn colors(&self) -> ColorSets {
        self.decode
            .iter()
            .map(|(p, t)| (p.clone(), t.keys().cloned().collect()))
            .collect()
    }

    pub(crate) fn components(&self, place: &str, color: &str) -> Result<&Tuple> {
        self.decode
            .get(place)
            .and_then(|t| t.get(color))
            .ok_or_else(|| Error::ColorMismatch {
                place: place.to_string(),
                color: color.to_string(),
            })
    }

    /// Source tuple along `word` → flattened tuple along its image.
    pub(crate) fn flatten(&self, word: &Word, tuple: &[Color]) -> Result<Tuple> {
        let mut out = Vec::new();
        for (p, c) in word.0.iter().zip(tuple) {
            out.extend(self.components(p, c)?.iter().cloned());
        }
        Ok(out)
    }

    /// Flattened tuple along the image of `word` → source tuple along `word`.
    pub(crate) fn unflatten(&self, word: &Word, flat: &[Color]) -> Result<Tuple> {
        let mut out = Vec::with_capacity(word.len());
        let mut i = 0;
        for p in &word.0 {
            let k = self.lengths[p];
            let chunk = flat.get(i..i + k).ok_or(Error::Arity {
                expected: i + k,
                found: flat.len(),
            })?;
            out.push(if k == 1 { chunk[0].clone() } else { chunk.join(",") });
            i += k;
        }
        Ok(out)
    }
}

/// The guard `F ; G_dst` on the source net: the semantics the source must
/// carry for `F` to be a morphism into `dst`.
pub fn pullback_guard(f: &NetFunctor, src: &Net, dst: &GuardedNet) -> Result<Guard> {
    f.validate(src, &dst.net)?;
    let Some(dst_colors) = dst.guard.colors() else {
        return Ok(Guard::None);
    };
    let codec = ColorCodec::new(f, src, dst_colors)?;
    let colors = codec.colors();
    match &dst.guard {
        Guard::None => unreachable!(),
        Guard::Partial(g) => {
            let mut tables = BTreeMap::new();
            for t in src.transitions() {
                let image = f.morphism(&t.id)?;
                let mut table = BTreeMap::new();
                for x in all_tuples(&colors, &t.source()) {
                    let flat = codec.flatten(&t.source(), &x)?;
                    if let Some(y) = eval_partial(&dst.net, g, image, &flat)? {
                        table.insert(x, codec.unflatten(&t.target(), &y)?);
                    }
                }
                tables.insert(t.id.clone(), table);
            }
            Ok(Guard::Partial(PartialGuard { colors, tables }))
        }
        Guard::Span(g) => {
            let mut tables = BTreeMap::new();
            for t in src.transitions() {
                let rows = eval_span(&dst.net, g, f.morphism(&t.id)?)?;
                let mut entries = Vec::with_capacity(rows.len());
                let mut seen = BTreeSet::new();
                for r in rows.rows {
                    let witness = r.witness.to_string();
                    if !seen.insert(witness.clone()) {
                        return Err(Error::InvalidFunctor(format!(
                            "composite witness `{witness}` of `{}` is ambiguous",
                            t.id
                        )));
                    }
                    entries.push(SpanEntry {
                        witness,
                        input: codec.unflatten(&t.source(), &r.input)?,
                        output: codec.unflatten(&t.target(), &r.output)?,
                    });
                }
                tables.insert(t.id.clone(), entries);
            }
            Ok(Guard::Span(SpanGuard { colors, tables }))
        }
    }
}

fn span_multiplicities(entries: &[SpanEntry]) -> BTreeMap<(&Tuple, &Tuple), usize> {
    let mut out = BTreeMap::new();
    for e in entries {
        *out.entry((&e.input, &e.output)).or_insert(0) += 1;
    }
    out
}

/// Compares two guards on the same net: partial tables exactly, span tables
/// up to a witness bijection preserving (input, output). Returns the first
/// difference found.
pub fn guard_difference(net: &Net, a: &Guard, b: &Guard) -> Result<Option<String>> {
    match (a, b) {
        (Guard::None, Guard::None) => Ok(None),
        (Guard::Partial(x), Guard::Partial(y)) => {
            if let Some(d) = color_difference(net, &x.colors, &y.colors) {
                return Ok(Some(d));
            }
            let empty = BTreeMap::new();
            for t in net.transitions() {
                let tx = x.tables.get(&t.id).unwrap_or(&empty);
                let ty = y.tables.get(&t.id).unwrap_or(&empty);
                if tx != ty {
                    return Ok(Some(format!("tables of `{}` differ", t.id)));
                }
            }
            Ok(None)
        }
        (Guard::Span(x), Guard::Span(y)) => {
            if let Some(d) = color_difference(net, &x.colors, &y.colors) {
                return Ok(Some(d));
            }
            for t in net.transitions() {
                if span_multiplicities(x.entries(&t.id)) != span_multiplicities(y.entries(&t.id)) {
                    return Ok(Some(format!("spans of `{}` are not isomorphic", t.id)));
                }
            }
            Ok(None)
        }
        (a, b) => Err(Error::GuardKindMismatch(a.kind(), b.kind())),
    }
}

fn color_difference(net: &Net, a: &ColorSets, b: &ColorSets) -> Option<String> {
    net.places()
        .iter()
        .find(|p| a.get(*p) != b.get(*p))
        .map(|p| format!("color sets of `{p}` differ"))
}

/// Why `f` fails to be a morphism `src → dst`, if it does.
pub fn morphism_mismatch(f: &NetFunctor, src: &GuardedNet, dst: &GuardedNet) -> Result<Option<String>> {
    f.validate(&src.net, &dst.net)?;
    if src.guard.kind() != dst.guard.kind() {
        return Err(Error::GuardKindMismatch(src.guard.kind(), dst.guard.kind()));
    }
    let pulled = pullback_guard(f, &src.net, dst)?;
    guard_difference(&src.net, &src.guard, &pulled)
}

/// Whether `f` commutes with the guards: `G_src = F ; G_dst`.
pub fn check_morphism(f: &NetFunctor, src: &GuardedNet, dst: &GuardedNet) -> Result<bool> {
    Ok(morphism_mismatch(f, src, dst)?.is_none())
}

/// Lifts a morphism of guarded nets to the internalizations:
/// `(p, c) ↦ (F p, c)` on places and `(t, payload) ↦ (F t, payload)` on
/// transitions.
pub fn lift(
    f: &NetFunctor,
    src: &GuardedNet,
    dst: &GuardedNet,
    src_int: &Internalized,
    dst_int: &Internalized,
) -> Result<NetFunctor> {
    if let Some(why) = morphism_mismatch(f, src, dst)? {
        return Err(Error::NotAMorphism(why));
    }
    let dst_colors = dst.guard.colors().ok_or(Error::Unguarded)?;
    let codec = ColorCodec::new(f, &src.net, dst_colors)?;
    let idx = dst_int.projection.index();

    let mut objects = BTreeMap::new();
    for (name, (p, c)) in &src_int.projection.places {
        let image = idx.colored_word(f.object(p)?, codec.components(p, c)?)?;
        objects.insert(name.clone(), image);
    }

    let mut morphisms = BTreeMap::new();
    match (&src.guard, &dst.guard) {
        (Guard::Partial(_), Guard::Partial(g)) => {
            for (name, (t, payload)) in &src_int.projection.transitions {
                let Payload::Input(x) = payload else {
                    return Err(Error::Precondition(format!(
                        "internalized transition `{name}` has a witness payload"
                    )));
                };
                let tr = src.net.transition_or_err(t)?;
                let flat = codec.flatten(&tr.source(), x)?;
                let (term, _) = lift_partial_term(&dst.net, &dst_int.net, g, &idx, f.morphism(t)?, &flat)?;
                morphisms.insert(name.clone(), fit_boundary(&objects, src_int, dst_int, name, term)?);
            }
        }
        (Guard::Span(sg), Guard::Span(g)) => {
            let paths = witness_bijection(f, &src.net, sg, &dst.net, g, &codec)?;
            for (name, (t, payload)) in &src_int.projection.transitions {
                let Payload::Witness(w) = payload else {
                    return Err(Error::Precondition(format!(
                        "internalized transition `{name}` has an input payload"
                    )));
                };
                let (path, input) = paths
                    .get(&(t.clone(), w.clone()))
                    .ok_or_else(|| Error::NotAMorphism(format!("witness `{w}` of `{t}` unmatched")))?;
                let (term, _) = lift_span_term(&dst.net, &dst_int.net, g, &idx, f.morphism(t)?, path, input)?;
                morphisms.insert(name.clone(), fit_boundary(&objects, src_int, dst_int, name, term)?);
            }
        }
        (a, b) => return Err(Error::GuardKindMismatch(a.kind(), b.kind())),
    }
    Ok(NetFunctor { objects, morphisms })
}

/// Pairs each witness of the source guard with a witness path of the image
/// span carrying the same (input, output), in sorted order within each
/// (input, output) class.
fn witness_bijection(
    f: &NetFunctor,
    src: &Net,
    src_guard: &SpanGuard,
    dst: &Net,
    dst_guard: &SpanGuard,
    codec: &ColorCodec,
) -> Result<BTreeMap<(String, String), (WitnessPath, Tuple)>> {
    let mut out = BTreeMap::new();
    for t in src.transitions() {
        let table = eval_span(dst, dst_guard, f.morphism(&t.id)?)?;
        let mut image: BTreeMap<(Tuple, Tuple), Vec<WitnessPath>> = BTreeMap::new();
        for r in table.rows {
            image.entry((r.input, r.output)).or_default().push(r.witness);
        }
        let mut ours: BTreeMap<(Tuple, Tuple), Vec<&str>> = BTreeMap::new();
        for e in src_guard.entries(&t.id) {
            let key = (
                codec.flatten(&t.source(), &e.input)?,
                codec.flatten(&t.target(), &e.output)?,
            );
            ours.entry(key).or_default().push(&e.witness);
        }
        for (key, mut ws) in ours {
            ws.sort();
            let theirs = image.get(&key).map(Vec::as_slice).unwrap_or(&[]);
            if theirs.len() != ws.len() {
                return Err(Error::NotAMorphism(format!(
                    "span of `{}` has no matching witness",
                    t.id
                )));
            }
            for (w, p) in ws.into_iter().zip(theirs) {
                out.insert((t.id.clone(), w.to_string()), (p.clone(), key.0.clone()));
            }
        }
    }
    Ok(out)
}

fn split_input(net: &Net, left: &ProcessTerm, input: &[Color]) -> Result<(Tuple, Tuple)> {
    let k = typecheck(net, left)?.0.len();
    if input.len() < k {
        return Err(Error::Arity {
            expected: k,
            found: input.len(),
        });
    }
    Ok((input[..k].to_vec(), input[k..].to_vec()))
}

fn lift_structural(idx: &ProjectionIndex, term: &ProcessTerm, input: &[Color]) -> Result<Option<(ProcessTerm, Tuple)>> {
    Ok(match term {
        ProcessTerm::Id(w) => Some((ProcessTerm::Id(idx.colored_word(w, input)?), input.to_vec())),
        ProcessTerm::Sym(a, b) => {
            if input.len() != a.len() + b.len() {
                return Err(Error::Arity {
                    expected: a.len() + b.len(),
                    found: input.len(),
                });
            }
            let (x, y) = input.split_at(a.len());
            let term = ProcessTerm::Sym(idx.colored_word(a, x)?, idx.colored_word(b, y)?);
            Some((term, [y, x].concat()))
        }
        _ => None,
    })
}

/// The internalized generator `name` over `u`, between the colored words of
/// `u`'s boundary. Internalized boundaries are sorted by internalized place,
/// so symmetries reorder them when the colors are not in that order.
fn lifted_generator(
    net: &Net,
    int: &Net,
    idx: &ProjectionIndex,
    u: &str,
    name: &str,
    input: &[Color],
    output: &[Color],
) -> Result<ProcessTerm> {
    let tr = net.transition_or_err(u)?;
    let itr = int.transition_or_err(name)?;
    Ok(wrap(
        reorder(&idx.colored_word(&tr.source(), input)?, &itr.source())?,
        ProcessTerm::gen(name),
        reorder(&itr.target(), &idx.colored_word(&tr.target(), output)?)?,
    ))
}

/// Reorders the ends of a lifted image onto the images of the sorted
/// boundary of the internalized generator `name`.
fn fit_boundary(
    objects: &BTreeMap<String, Word>,
    src_int: &Internalized,
    dst_int: &Internalized,
    name: &str,
    term: ProcessTerm,
) -> Result<ProcessTerm> {
    let image = |w: &Word| Word(w.0.iter().flat_map(|q| objects[q].0.iter().cloned()).collect());
    let itr = src_int.net.transition_or_err(name)?;
    let (s, e) = typecheck(&dst_int.net, &term)?;
    Ok(wrap(
        reorder(&image(&itr.source()), &s)?,
        term,
        reorder(&e, &image(&itr.target()))?,
    ))
}

/// The internalized term over `term` starting from `input`, with its output.
fn lift_partial_term(
    net: &Net,
    int: &Net,
    g: &PartialGuard,
    idx: &ProjectionIndex,
    term: &ProcessTerm,
    input: &[Color],
) -> Result<(ProcessTerm, Tuple)> {
    if let Some(done) = lift_structural(idx, term, input)? {
        return Ok(done);
    }
    match term {
        ProcessTerm::Gen(u) => {
            let y = g
                .table(u)
                .and_then(|t| t.get(input))
                .ok_or_else(|| Error::NotAMorphism(format!("`{u}` undefined at ({})", input.join(","))))?;
            let name = idx.transition(u, &Payload::Input(input.to_vec()))?;
            Ok((lifted_generator(net, int, idx, u, name, input, y)?, y.clone()))
        }
        ProcessTerm::Seq(f, h) => {
            let (tf, mid) = lift_partial_term(net, int, g, idx, f, input)?;
            let (th, out) = lift_partial_term(net, int, g, idx, h, &mid)?;
            Ok((tf.then(th), out))
        }
        ProcessTerm::Par(f, h) => {
            let (x, y) = split_input(net, f, input)?;
            let (tf, mut out) = lift_partial_term(net, int, g, idx, f, &x)?;
            let (th, out2) = lift_partial_term(net, int, g, idx, h, &y)?;
            out.extend(out2);
            Ok((tf.tensor(th), out))
        }
        ProcessTerm::Id(_) | ProcessTerm::Sym(..) => unreachable!(),
    }
}

fn lift_span_term(
    net: &Net,
    int: &Net,
    g: &SpanGuard,
    idx: &ProjectionIndex,
    term: &ProcessTerm,
    path: &WitnessPath,
    input: &[Color],
) -> Result<(ProcessTerm, Tuple)> {
    let shape_error = || Error::NotAMorphism(format!("witness `{path}` does not fit term {term}"));
    if let Some(done) = lift_structural(idx, term, input)? {
        return match path {
            WitnessPath::Id(t) if t.as_slice() == input => Ok(done),
            _ => Err(shape_error()),
        };
    }
    match (term, path) {
        (ProcessTerm::Gen(u), WitnessPath::Gen(w)) => {
            let e = g
                .entries(u)
                .iter()
                .find(|e| &e.witness == w && e.input.as_slice() == input)
                .ok_or_else(shape_error)?;
            let name = idx.transition(u, &Payload::Witness(w.clone()))?;
            Ok((
                lifted_generator(net, int, idx, u, name, input, &e.output)?,
                e.output.clone(),
            ))
        }
        (ProcessTerm::Seq(f, h), WitnessPath::Seq(p, q)) => {
            let (tf, mid) = lift_span_term(net, int, g, idx, f, p, input)?;
            let (th, out) = lift_span_term(net, int, g, idx, h, q, &mid)?;
            Ok((tf.then(th), out))
        }
        (ProcessTerm::Par(f, h), WitnessPath::Par(p, q)) => {
            let (x, y) = split_input(net, f, input)?;
            let (tf, mut out) = lift_span_term(net, int, g, idx, f, p, &x)?;
            let (th, out2) = lift_span_term(net, int, g, idx, h, q, &y)?;
            out.extend(out2);
            Ok((tf.tensor(th), out))
        }
        _ => Err(shape_error()),
    }
}

/// Checks the naturality square `F̂ ; π_dst = π_src ; F` on every generator
/// of the source internalization, together with the well-typedness of the
/// lifted functor. Images are compared as string diagrams, so symmetries
/// introduced by the sorted boundaries of internalized generators do not
/// matter.
pub fn square_commutes(
    f: &NetFunctor,
    lifted: &NetFunctor,
    src: &GuardedNet,
    dst: &GuardedNet,
    src_int: &Internalized,
    dst_int: &Internalized,
) -> bool {
    square_holds(f, lifted, src, dst, src_int, dst_int).unwrap_or(false)
}

/// Positions of concatenated blocks after block `k` moves to `perm[k]`.
fn block_permutation(lens: &[usize], perm: &[usize]) -> Vec<usize> {
    let mut dest_len = vec![0; lens.len()];
    for (k, &j) in perm.iter().enumerate() {
        dest_len[j] = lens[k];
    }
    let offsets: Vec<usize> = dest_len
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    perm.iter()
        .enumerate()
        .flat_map(|(k, &j)| {
            (0..lens[k]).map({
                let o = offsets[j];
                move |i| o + i
            })
        })
        .collect()
}

fn square_holds(
    f: &NetFunctor,
    lifted: &NetFunctor,
    src: &GuardedNet,
    dst: &GuardedNet,
    src_int: &Internalized,
    dst_int: &Internalized,
) -> Result<bool> {
    lifted.validate(&src_int.net, &dst_int.net)?;
    let dst_pi = &dst_int.projection;
    for (name, (p, _)) in &src_int.projection.places {
        if dst_pi.project_word(lifted.object(name)?)? != *f.object(p)? {
            return Ok(false);
        }
    }
    let src_ports = src_int.port_orders(src)?;
    let dst_ports = dst_int.port_orders(dst)?;
    for (name, (t, _)) in &src_int.projection.transitions {
        let (img, expected) = (lifted.morphism(name)?, f.morphism(t)?);
        let itr = src_int.net.transition_or_err(name)?;
        let lens = |w: &Word| -> Result<Vec<usize>> { w.0.iter().map(|q| Ok(lifted.object(q)?.len())).collect() };
        let (ins, outs) = &src_ports[name];
        let in_perm = block_permutation(&lens(&itr.source())?, ins);
        let out_perm = block_permutation(&lens(&itr.target())?, outs);

        let (s, e) = typecheck(&dst_int.net, img)?;
        let moved = |w: &Word, perm: &[usize]| -> Result<Word> {
            let w = dst_pi.project_word(w)?;
            let mut out = w.clone();
            for (i, p) in w.0.into_iter().enumerate() {
                out.0[perm[i]] = p;
            }
            Ok(out)
        };
        if (moved(&s, &in_perm)?, moved(&e, &out_perm)?) != typecheck(&dst.net, expected)? {
            return Ok(false);
        }
        let mut ours = Diagram::build(&dst_int.net, img, &mut |tr| {
            let (inputs, outputs) = dst_ports[&tr.id].clone();
            Ok(PortMap {
                label: dst_pi.base_transition(&tr.id)?.0.clone(),
                inputs,
                outputs,
            })
        })?;
        ours.permute_boundary(&in_perm, &out_perm);
        if !ours.isomorphic(&Diagram::plain(&dst.net, expected)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lifts `f` and checks the naturality square of the projections.
pub fn naturality_check(f: &NetFunctor, src: &GuardedNet, dst: &GuardedNet) -> Result<bool> {
    let (si, di) = (internalize(src)?, internalize(dst)?);
    let lifted = lift(f, src, dst, &si, &di)?;
    Ok(square_commutes(f, &lifted, src, dst, &si, &di))
}

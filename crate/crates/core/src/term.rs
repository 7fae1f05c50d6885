//! Process terms: morphisms of the free symmetric strict monoidal category
//! presented by a net.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::net::{Net, Transition};

/// An object of the free category: a list of places. The empty word is the
/// monoidal unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<String>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Word(v)
    }

    pub fn split_at(&self, k: usize) -> (Word, Word) {
        let (a, b) = self.0.split_at(k);
        (Word(a.to_vec()), Word(b.to_vec()))
    }
}

impl<S: Into<String>> FromIterator<S> for Word {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Word(iter.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProcessTerm {
    Gen(String),
    Id(Word),
    Sym(Word, Word),
    Seq(Box<ProcessTerm>, Box<ProcessTerm>),
    Par(Box<ProcessTerm>, Box<ProcessTerm>),
}

impl ProcessTerm {
    pub fn gen(id: impl Into<String>) -> Self {
        ProcessTerm::Gen(id.into())
    }

    pub fn id<S: Into<String>>(w: impl IntoIterator<Item = S>) -> Self {
        ProcessTerm::Id(w.into_iter().collect())
    }

    /// Unchecked sequential composite; see [`seq`] for the checked version.
    pub fn then(self, g: ProcessTerm) -> Self {
        ProcessTerm::Seq(Box::new(self), Box::new(g))
    }

    /// Unchecked parallel composite.
    pub fn tensor(self, g: ProcessTerm) -> Self {
        ProcessTerm::Par(Box::new(self), Box::new(g))
    }

    /// Generator identifiers in left-to-right order.
    pub fn generators(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ProcessTerm::Gen(g) => out.push(g),
            ProcessTerm::Id(_) | ProcessTerm::Sym(..) => {}
            ProcessTerm::Seq(f, g) | ProcessTerm::Par(f, g) => {
                f.collect_generators(out);
                g.collect_generators(out);
            }
        }
    }

    /// Rewrites every generator and every place occurring in the term.
    pub fn map(&self, gen: &mut impl FnMut(&str) -> String, place: &mut impl FnMut(&str) -> String) -> ProcessTerm {
        let word = |w: &Word, place: &mut dyn FnMut(&str) -> String| Word(w.0.iter().map(|p| place(p)).collect());
        match self {
            ProcessTerm::Gen(g) => ProcessTerm::Gen(gen(g)),
            ProcessTerm::Id(w) => ProcessTerm::Id(word(w, place)),
            ProcessTerm::Sym(a, b) => ProcessTerm::Sym(word(a, place), word(b, place)),
            ProcessTerm::Seq(f, g) => {
                let f = f.map(gen, place);
                ProcessTerm::Seq(Box::new(f), Box::new(g.map(gen, place)))
            }
            ProcessTerm::Par(f, g) => {
                let f = f.map(gen, place);
                ProcessTerm::Par(Box::new(f), Box::new(g.map(gen, place)))
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ProcessTerm::Gen(g) => json!(["gen", g]),
            ProcessTerm::Id(w) => json!(["id", w.0]),
            ProcessTerm::Sym(a, b) => json!(["sym", a.0, b.0]),
            ProcessTerm::Seq(f, g) => json!(["seq", f.to_json(), g.to_json()]),
            ProcessTerm::Par(f, g) => json!(["par", f.to_json(), g.to_json()]),
        }
    }

    pub fn from_json(v: &Value) -> std::result::Result<Self, String> {
        let arr = v
            .as_array()
            .ok_or_else(|| format!("term must be an array, found {v}"))?;
        let tag = arr
            .first()
            .and_then(Value::as_str)
            .ok_or_else(|| format!("term must start with a tag string: {v}"))?;
        let word = |x: &Value| -> std::result::Result<Word, String> {
            let items = x
                .as_array()
                .ok_or_else(|| format!("expected a list of places, found {x}"))?;
            items
                .iter()
                .map(|p| {
                    p.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| format!("place must be a string: {p}"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Word)
        };
        let arity = |n: usize| -> std::result::Result<(), String> {
            if arr.len() == n + 1 {
                Ok(())
            } else {
                Err(format!("`{tag}` takes {n} argument(s): {v}"))
            }
        };
        match tag {
            "gen" => {
                arity(1)?;
                let g = arr[1]
                    .as_str()
                    .ok_or_else(|| format!("generator must be a string: {v}"))?;
                Ok(ProcessTerm::Gen(g.to_string()))
            }
            "id" => {
                arity(1)?;
                Ok(ProcessTerm::Id(word(&arr[1])?))
            }
            "sym" => {
                arity(2)?;
                Ok(ProcessTerm::Sym(word(&arr[1])?, word(&arr[2])?))
            }
            "seq" | "par" => {
                arity(2)?;
                let f = Box::new(Self::from_json(&arr[1])?);
                let g = Box::new(Self::from_json(&arr[2])?);
                Ok(if tag == "seq" {
                    ProcessTerm::Seq(f, g)
                } else {
                    ProcessTerm::Par(f, g)
                })
            }
            other => Err(format!("unknown term tag `{other}`")),
        }
    }
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessTerm::Gen(g) => write!(f, "{g}"),
            ProcessTerm::Id(w) => write!(f, "id{w}"),
            ProcessTerm::Sym(a, b) => write!(f, "sym({a},{b})"),
            ProcessTerm::Seq(x, y) => write!(f, "({x} ; {y})"),
            ProcessTerm::Par(x, y) => write!(f, "({x} ⊗ {y})"),
        }
    }
}

/// Computes the source and target words of `t`, failing on the first
/// ill-typed node. Paths are `$` for the root and `/0`, `/1` for children.
pub fn typecheck(net: &Net, t: &ProcessTerm) -> Result<(Word, Word)> {
    typecheck_at(net, t, "$")
}

fn typecheck_at(net: &Net, t: &ProcessTerm, path: &str) -> Result<(Word, Word)> {
    match t {
        ProcessTerm::Gen(g) => {
            let tr = net.transition(g).ok_or_else(|| Error::UnknownGenerator {
                path: path.to_string(),
                id: g.clone(),
            })?;
            Ok((tr.source(), tr.target()))
        }
        ProcessTerm::Id(w) => {
            check_word(net, w)?;
            Ok((w.clone(), w.clone()))
        }
        ProcessTerm::Sym(a, b) => {
            check_word(net, a)?;
            check_word(net, b)?;
            Ok((a.concat(b), b.concat(a)))
        }
        ProcessTerm::Seq(f, g) => {
            let (s, m1) = typecheck_at(net, f, &format!("{path}/0"))?;
            let (m2, e) = typecheck_at(net, g, &format!("{path}/1"))?;
            if m1 != m2 {
                return Err(Error::BoundaryMismatch {
                    path: path.to_string(),
                    expected: m2,
                    found: m1,
                });
            }
            Ok((s, e))
        }
        ProcessTerm::Par(f, g) => {
            let (s1, e1) = typecheck_at(net, f, &format!("{path}/0"))?;
            let (s2, e2) = typecheck_at(net, g, &format!("{path}/1"))?;
            Ok((s1.concat(&s2), e1.concat(&e2)))
        }
    }
}

fn check_word(net: &Net, w: &Word) -> Result<()> {
    match w.0.iter().find(|p| !net.has_place(p)) {
        Some(p) => Err(Error::UnknownPlace(p.clone())),
        None => Ok(()),
    }
}

/// Checked sequential composition.
pub fn seq(net: &Net, f: ProcessTerm, g: ProcessTerm) -> Result<ProcessTerm> {
    let t = f.then(g);
    typecheck(net, &t)?;
    Ok(t)
}

/// Checked parallel composition.
pub fn par(net: &Net, f: ProcessTerm, g: ProcessTerm) -> Result<ProcessTerm> {
    let t = f.tensor(g);
    typecheck(net, &t)?;
    Ok(t)
}

/// Permutations act on positions: `perm[i] = j` sends the wire at input
/// position `i` to output position `j`.
pub fn apply_permutation<T: Clone>(perm: &[usize], items: &[T]) -> Vec<T> {
    let mut out: Vec<Option<T>> = vec![None; items.len()];
    for (i, &j) in perm.iter().enumerate() {
        out[j] = Some(items[i].clone());
    }
    out.into_iter().map(|x| x.expect("valid permutation")).collect()
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Permutation(format!(
            "permutation of {} elements applied to a word of length {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &j in perm {
        if j >= n || seen[j] {
            return Err(Error::Permutation(format!("{perm:?} is not a bijection")));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Builds a term from symmetries and identities whose action on `w` is
/// `perm`. The identity permutation yields `Id(w)`.
pub fn symmetry_for(perm: &[usize], w: &Word) -> Result<ProcessTerm> {
    check_permutation(perm, w.len())?;
    // Bubble sort the destination positions; each adjacent swap becomes one
    // symmetry layer.
    let mut current = w.0.clone();
    let mut dest: Vec<usize> = perm.to_vec();
    let mut layers = Vec::new();
    loop {
        let mut swapped = false;
        for i in 0..dest.len().saturating_sub(1) {
            if dest[i] > dest[i + 1] {
                layers.push(adjacent_swap(&current, i));
                current.swap(i, i + 1);
                dest.swap(i, i + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(layers
        .into_iter()
        .reduce(ProcessTerm::then)
        .unwrap_or_else(|| ProcessTerm::Id(w.clone())))
}

fn adjacent_swap(w: &[String], i: usize) -> ProcessTerm {
    let sym = ProcessTerm::Sym(Word(vec![w[i].clone()]), Word(vec![w[i + 1].clone()]));
    let mut t = sym;
    if i > 0 {
        t = ProcessTerm::Id(Word(w[..i].to_vec())).tensor(t);
    }
    if i + 2 < w.len() {
        t = t.tensor(ProcessTerm::Id(Word(w[i + 2..].to_vec())));
    }
    t
}

/// A permutation sending `from` onto `to` (equal places matched in order).
pub fn permutation_between(from: &Word, to: &Word) -> Option<Vec<usize>> {
    if from.len() != to.len() {
        return None;
    }
    let mut used = vec![false; to.len()];
    let mut perm = Vec::with_capacity(from.len());
    for p in &from.0 {
        let j = (0..to.len()).find(|&j| !used[j] && &to.0[j] == p)?;
        used[j] = true;
        perm.push(j);
    }
    Some(perm)
}

/// Builds `σ ; gen ; σ′` from `source` to `target`, where the symmetries
/// reorder `source` onto the generator's source and its target onto `target`.
pub fn transition_term(tr: &Transition, source: &Word, target: &Word) -> Result<ProcessTerm> {
    let (gs, gt) = (tr.source(), tr.target());
    let before = permutation_between(source, &gs).ok_or_else(|| Error::BoundaryMismatch {
        path: "$".into(),
        expected: gs.clone(),
        found: source.clone(),
    })?;
    let after = permutation_between(&gt, target).ok_or_else(|| Error::BoundaryMismatch {
        path: "$".into(),
        expected: target.clone(),
        found: gt.clone(),
    })?;
    let mut t = ProcessTerm::Gen(tr.id.clone());
    if !is_identity(&before) {
        t = symmetry_for(&before, source)?.then(t);
    }
    if !is_identity(&after) {
        t = t.then(symmetry_for(&after, &gt)?);
    }
    Ok(t)
}

pub fn is_identity(perm: &[usize]) -> bool {
    perm.iter().enumerate().all(|(i, &j)| i == j)
}

/// Called on each generator with its input wires; `None` stops evaluation.
pub(crate) type GenHook<'a, T> = dyn FnMut(&Transition, Vec<T>) -> Result<Option<Vec<T>>> + 'a;

/// Evaluates a term wire-by-wire, handing each generator's inputs to `gen`.
/// `None` from `gen` (undefined) propagates.
pub(crate) fn eval_wires<T: Clone>(
    net: &Net,
    term: &ProcessTerm,
    input: Vec<T>,
    gen: &mut GenHook<'_, T>,
) -> Result<Option<Vec<T>>> {
    match term {
        ProcessTerm::Gen(g) => {
            let tr = net.transition_or_err(g)?;
            if input.len() != tr.pre.len() {
                return Err(Error::Arity {
                    expected: tr.pre.len(),
                    found: input.len(),
                });
            }
            gen(tr, input)
        }
        ProcessTerm::Id(w) => {
            if input.len() != w.len() {
                return Err(Error::Arity {
                    expected: w.len(),
                    found: input.len(),
                });
            }
            Ok(Some(input))
        }
        ProcessTerm::Sym(a, b) => {
            if input.len() != a.len() + b.len() {
                return Err(Error::Arity {
                    expected: a.len() + b.len(),
                    found: input.len(),
                });
            }
            let mut out = input[a.len()..].to_vec();
            out.extend_from_slice(&input[..a.len()]);
            Ok(Some(out))
        }
        ProcessTerm::Seq(f, g) => match eval_wires(net, f, input, gen)? {
            Some(mid) => eval_wires(net, g, mid, gen),
            None => Ok(None),
        },
        ProcessTerm::Par(f, g) => {
            let k = typecheck(net, f)?.0.len();
            if input.len() < k {
                return Err(Error::Arity {
                    expected: k,
                    found: input.len(),
                });
            }
            let right = input[k..].to_vec();
            let mut left = input;
            left.truncate(k);
            let a = eval_wires(net, f, left, gen)?;
            let b = eval_wires(net, g, right, gen)?;
            Ok(match (a, b) {
                (Some(mut a), Some(b)) => {
                    a.extend(b);
                    Some(a)
                }
                _ => None,
            })
        }
    }
}

/// Recognizes `σ ; g ; σ′`: a term containing exactly one generator and no
/// idle wires beside it. Returns the two permutations and the generator.
pub fn transition_preserving_form(net: &Net, term: &ProcessTerm) -> Option<(Vec<usize>, String, Vec<usize>)> {
    let gens = term.generators();
    if gens.len() != 1 {
        return None;
    }
    let (src, _) = typecheck(net, term).ok()?;
    let tr = net.transition(gens[0])?;
    if src.len() != tr.pre.len() {
        return None;
    }
    // Trace labelled wires: inputs are 0..n, generator outputs n.. .
    let n = src.len();
    let mut consumed = Vec::new();
    let mut produced = Vec::new();
    let out = eval_wires(net, term, (0..n).collect(), &mut |tr, input| {
        consumed = input;
        produced = (n..n + tr.post.len()).collect();
        Ok(Some(produced.clone()))
    })
    .ok()??;
    if out.len() != tr.post.len() || out.iter().any(|&w| w < n) {
        return None;
    }
    let mut before = vec![0; n];
    for (pos_in_gen, &wire) in consumed.iter().enumerate() {
        before[wire] = pos_in_gen;
    }
    let mut after = vec![0; out.len()];
    for (pos_out, &wire) in out.iter().enumerate() {
        after[wire - n] = pos_out;
    }
    Some((before, gens[0].to_string(), after))
}

/// `from ; σ` reordering `from` onto `to`, or `None` when they are equal.
pub fn reorder(from: &Word, to: &Word) -> Result<Option<ProcessTerm>> {
    if from == to {
        return Ok(None);
    }
    let perm = permutation_between(from, to).ok_or_else(|| Error::BoundaryMismatch {
        path: "$".into(),
        expected: to.clone(),
        found: from.clone(),
    })?;
    symmetry_for(&perm, from).map(Some)
}

/// Wraps `term` between optional reorderings.
pub fn wrap(before: Option<ProcessTerm>, term: ProcessTerm, after: Option<ProcessTerm>) -> ProcessTerm {
    let term = match before {
        Some(b) => b.then(term),
        None => term,
    };
    match after {
        Some(a) => term.then(a),
        None => term,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Wire {
    Input(usize),
    Port(usize, usize),
}

/// How a generator enters a diagram: a label, and for each position of its
/// source (target) word the port it occupies.
pub(crate) struct PortMap {
    pub label: String,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// A string diagram: generator occurrences in construction order with the
/// wire feeding each input port, and the wires reaching the outputs.
#[derive(Clone, Debug)]
pub(crate) struct Diagram {
    labels: Vec<String>,
    feeds: Vec<Vec<Wire>>,
    outputs: Vec<Wire>,
}

impl Diagram {
    pub fn build(
        net: &Net,
        term: &ProcessTerm,
        hook: &mut dyn FnMut(&Transition) -> Result<PortMap>,
    ) -> Result<Diagram> {
        let n = typecheck(net, term)?.0.len();
        let mut labels = Vec::new();
        let mut feeds = Vec::new();
        let outputs = eval_wires(net, term, (0..n).map(Wire::Input).collect(), &mut |tr, input| {
            let ports = hook(tr)?;
            let occ = labels.len();
            let mut feed = vec![Wire::Input(usize::MAX); input.len()];
            for (k, w) in input.into_iter().enumerate() {
                feed[ports.inputs[k]] = w;
            }
            labels.push(ports.label);
            feeds.push(feed);
            Ok(Some(ports.outputs.iter().map(|&j| Wire::Port(occ, j)).collect()))
        })?
        .expect("diagram generators are total");
        Ok(Diagram { labels, feeds, outputs })
    }

    /// Every generator keeps its own label and port order.
    pub fn plain(net: &Net, term: &ProcessTerm) -> Result<Diagram> {
        Diagram::build(net, term, &mut |tr| {
            Ok(PortMap {
                label: tr.id.clone(),
                inputs: (0..tr.pre.len()).collect(),
                outputs: (0..tr.post.len()).collect(),
            })
        })
    }

    /// Moves input `i` to position `inputs[i]` and output `j` to
    /// `outputs[j]`.
    pub fn permute_boundary(&mut self, inputs: &[usize], outputs: &[usize]) {
        for feed in &mut self.feeds {
            for w in feed {
                if let Wire::Input(i) = w {
                    *i = inputs[*i];
                }
            }
        }
        let mut out = self.outputs.clone();
        for (j, w) in self.outputs.iter().enumerate() {
            out[outputs[j]] = *w;
        }
        self.outputs = out;
    }

    /// Isomorphism fixing the boundary, found by matching occurrences in
    /// construction order against candidates with the same label and feeds.
    pub fn isomorphic(&self, other: &Diagram) -> bool {
        let mut a = self.labels.clone();
        let mut b = other.labels.clone();
        a.sort();
        b.sort();
        if a != b || self.outputs.len() != other.outputs.len() {
            return false;
        }
        let mut map = vec![usize::MAX; self.labels.len()];
        let mut used = vec![false; other.labels.len()];
        self.extend_match(other, 0, &mut map, &mut used)
    }

    fn translate(w: Wire, map: &[usize]) -> Wire {
        match w {
            Wire::Port(o, k) => Wire::Port(map[o], k),
            w => w,
        }
    }

    fn extend_match(&self, other: &Diagram, i: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        if i == self.labels.len() {
            return self
                .outputs
                .iter()
                .zip(&other.outputs)
                .all(|(&w, &v)| Diagram::translate(w, map) == v);
        }
        let want: Vec<Wire> = self.feeds[i].iter().map(|&w| Diagram::translate(w, map)).collect();
        for j in 0..other.labels.len() {
            if used[j] || other.labels[j] != self.labels[i] || other.feeds[j] != want {
                continue;
            }
            map[i] = j;
            used[j] = true;
            if self.extend_match(other, i + 1, map, used) {
                return true;
            }
            used[j] = false;
        }
        map[i] = usize::MAX;
        false
    }
}

/// Equality of morphisms in the free symmetric strict monoidal category:
/// equal boundaries and isomorphic string diagrams.
pub fn equivalent(net: &Net, a: &ProcessTerm, b: &ProcessTerm) -> Result<bool> {
    if typecheck(net, a)? != typecheck(net, b)? {
        return Ok(false);
    }
    Ok(Diagram::plain(net, a)?.isomorphic(&Diagram::plain(net, b)?))
}

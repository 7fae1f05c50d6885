//! Evaluation of process terms under a guard.
//!
//! Partial guards compose as partial functions: an undefined step makes the
//! whole composite undefined. Span guards compose by pullback: the composite
//! of two spans has one witness per matching pair of witnesses, so distinct
//! paths between the same colors stay distinct.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::Result;
use crate::guard::{all_tuples, check_tuple, PartialGuard, SpanEntry, SpanGuard, Tuple};
use crate::net::Net;
use crate::term::{eval_wires, typecheck, ProcessTerm};

/// Evaluates `t` at `input`. `Ok(None)` means the guard is undefined there;
/// `Err` means the query itself is malformed.
pub fn eval_partial(net: &Net, g: &PartialGuard, t: &ProcessTerm, input: &[String]) -> Result<Option<Tuple>> {
    let (src, _) = typecheck(net, t)?;
    check_tuple(&g.colors, &src, input)?;
    eval_wires(net, t, input.to_vec(), &mut |tr, x| {
        Ok(g.table(&tr.id).and_then(|tbl| tbl.get(&x)).cloned())
    })
}

/// The apex element of an evaluated span, mirroring the shape of the term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WitnessPath {
    /// A witness of a generator's span.
    Gen(String),
    /// Identities and symmetries have one witness per tuple: the tuple itself.
    Id(Tuple),
    Seq(Box<WitnessPath>, Box<WitnessPath>),
    Par(Box<WitnessPath>, Box<WitnessPath>),
}

impl fmt::Display for WitnessPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessPath::Gen(w) => write!(f, "{w}"),
            WitnessPath::Id(t) => write!(f, "id<{}>", t.join(",")),
            WitnessPath::Seq(a, b) => write!(f, "{a}.{b}"),
            WitnessPath::Par(a, b) => write!(f, "({a}|{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanRow {
    pub witness: WitnessPath,
    pub input: Tuple,
    pub output: Tuple,
}

/// The span denoted by a term, as a list of rows sorted by
/// (input, output, witness).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpanTable {
    pub rows: Vec<SpanRow>,
}

impl SpanTable {
    fn from_rows(mut rows: Vec<SpanRow>) -> Self {
        rows.sort_by(|a, b| (&a.input, &a.output, &a.witness).cmp(&(&b.input, &b.output, &b.witness)));
        SpanTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (input, output) pairs with the number of witnesses carrying each.
    pub fn multiplicities(&self) -> BTreeMap<(Tuple, Tuple), usize> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            *out.entry((r.input.clone(), r.output.clone())).or_insert(0) += 1;
        }
        out
    }
}

pub fn eval_span(net: &Net, g: &SpanGuard, t: &ProcessTerm) -> Result<SpanTable> {
    typecheck(net, t)?;
    eval_span_rows(g, t).map(SpanTable::from_rows)
}

fn eval_span_rows(g: &SpanGuard, t: &ProcessTerm) -> Result<Vec<SpanRow>> {
    Ok(match t {
        ProcessTerm::Gen(id) => g
            .entries(id)
            .iter()
            .map(|e| SpanRow {
                witness: WitnessPath::Gen(e.witness.clone()),
                input: e.input.clone(),
                output: e.output.clone(),
            })
            .collect(),
        ProcessTerm::Id(w) => all_tuples(&g.colors, w)
            .into_iter()
            .map(|x| SpanRow {
                witness: WitnessPath::Id(x.clone()),
                input: x.clone(),
                output: x,
            })
            .collect(),
        ProcessTerm::Sym(a, b) => all_tuples(&g.colors, &a.concat(b))
            .into_iter()
            .map(|x| {
                let mut out = x[a.len()..].to_vec();
                out.extend_from_slice(&x[..a.len()]);
                SpanRow {
                    witness: WitnessPath::Id(x.clone()),
                    input: x,
                    output: out,
                }
            })
            .collect(),
        ProcessTerm::Seq(f, h) => {
            let left = eval_span_rows(g, f)?;
            let right = eval_span_rows(g, h)?;
            let mut by_input: BTreeMap<&Tuple, Vec<&SpanRow>> = BTreeMap::new();
            for r in &right {
                by_input.entry(&r.input).or_default().push(r);
            }
            let mut out = Vec::new();
            for s in &left {
                for u in by_input.get(&s.output).into_iter().flatten() {
                    out.push(SpanRow {
                        witness: WitnessPath::Seq(Box::new(s.witness.clone()), Box::new(u.witness.clone())),
                        input: s.input.clone(),
                        output: u.output.clone(),
                    });
                }
            }
            out
        }
        ProcessTerm::Par(f, h) => {
            let left = eval_span_rows(g, f)?;
            let right = eval_span_rows(g, h)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for s in &left {
                for u in &right {
                    out.push(SpanRow {
                        witness: WitnessPath::Par(Box::new(s.witness.clone()), Box::new(u.witness.clone())),
                        input: [s.input.as_slice(), u.input.as_slice()].concat(),
                        output: [s.output.as_slice(), u.output.as_slice()].concat(),
                    });
                }
            }
            out
        }
    })
}

/// Witness identifier used when a partial function is read as a span: the
/// input tuple joined by commas.
pub fn witness_for_input(input: &[String]) -> String {
    input.join(",")
}

/// The graph of each partial function, as a span with one witness per
/// defined input.
pub fn embed_partial_as_span(g: &PartialGuard) -> SpanGuard {
    SpanGuard {
        colors: g.colors.clone(),
        tables: g
            .tables
            .iter()
            .map(|(t, tbl)| {
                let entries = tbl
                    .iter()
                    .map(|(k, v)| SpanEntry {
                        witness: witness_for_input(k),
                        input: k.clone(),
                        output: v.clone(),
                    })
                    .collect();
                (t.clone(), entries)
            })
            .collect(),
    }
}

/// Forgets witnesses: the relation underlying a span.
pub fn collapse_to_relation(tbl: &SpanTable) -> BTreeSet<(Tuple, Tuple)> {
    tbl.rows.iter().map(|r| (r.input.clone(), r.output.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fixtures;
    use crate::guard::Guard;
    use crate::term::Word;

    fn s(x: &[&str]) -> Tuple {
        x.iter().map(|c| c.to_string()).collect()
    }

    fn partial(gn: &crate::guard::GuardedNet) -> &PartialGuard {
        match &gn.guard {
            Guard::Partial(g) => g,
            _ => unreachable!(),
        }
    }

    fn span(gn: &crate::guard::GuardedNet) -> &SpanGuard {
        match &gn.guard {
            Guard::Span(g) => g,
            _ => unreachable!(),
        }
    }

    #[test]
    fn fixture_a_partial_evaluation() {
        let a = fixtures::fixture_a();
        let g = partial(&a);
        let t1 = ProcessTerm::gen("t1");
        let both = t1.clone().then(ProcessTerm::gen("t2"));
        assert_eq!(eval_partial(&a.net, g, &both, &s(&["red"])).unwrap(), None);
        assert_eq!(
            eval_partial(&a.net, g, &t1, &s(&["blue"])).unwrap(),
            Some(s(&["green"]))
        );
        let id = ProcessTerm::id(["P3"]);
        assert_eq!(
            eval_partial(&a.net, g, &id, &s(&["orange"])).unwrap(),
            Some(s(&["orange"]))
        );
    }

    #[test]
    fn malformed_queries_are_errors_not_undefined() {
        let a = fixtures::fixture_a();
        let g = partial(&a);
        let t1 = ProcessTerm::gen("t1");
        assert!(matches!(
            eval_partial(&a.net, g, &t1, &s(&["red", "red"])),
            Err(Error::Arity { .. })
        ));
        assert!(matches!(
            eval_partial(&a.net, g, &t1, &s(&["green"])),
            Err(Error::ColorMismatch { .. })
        ));
    }

    #[test]
    fn fixture_c_composite_keeps_both_paths() {
        let c = fixtures::fixture_c();
        let g = span(&c);
        let fg = ProcessTerm::gen("f").then(ProcessTerm::gen("g"));
        let tbl = eval_span(&c.net, g, &fg).unwrap();
        assert_eq!(tbl.len(), 2);
        let ws: Vec<String> = tbl.rows.iter().map(|r| r.witness.to_string()).collect();
        assert_eq!(ws, ["w1.v1", "w2.v2"]);
        assert!(tbl.rows.iter().all(|r| r.input == s(&["x"]) && r.output == s(&["z"])));
        assert_eq!(collapse_to_relation(&tbl).len(), 1);
    }

    #[test]
    fn fixture_b_composite_is_empty() {
        let b = fixtures::fixture_b();
        let t = ProcessTerm::gen("t1").then(ProcessTerm::gen("t2"));
        assert!(eval_span(&b.net, span(&b), &t).unwrap().is_empty());
    }

    #[test]
    fn identity_span() {
        let c = fixtures::fixture_c();
        let tbl = eval_span(&c.net, span(&c), &ProcessTerm::Id(Word::from_iter(["X"]))).unwrap();
        assert_eq!(tbl.len(), 1);
        assert_eq!(tbl.rows[0].input, s(&["x"]));
        assert_eq!(tbl.rows[0].output, s(&["x"]));
        assert!(collapse_to_relation(&SpanTable::default()).is_empty());
    }

    #[test]
    fn embedding_counts_and_graph() {
        let a = fixtures::fixture_a();
        let g = partial(&a);
        let e = embed_partial_as_span(g);
        assert_eq!(e.entries("t1").len(), 2);
        assert_eq!(e.entries("t2").len(), 1);
        for tr in a.net.transitions() {
            let tbl = eval_span(&a.net, &e, &ProcessTerm::gen(tr.id.clone())).unwrap();
            let rel = collapse_to_relation(&tbl);
            // enumerate all inputs through the partial evaluator
            let graph: BTreeSet<(Tuple, Tuple)> = all_tuples(&g.colors, &tr.source())
                .into_iter()
                .filter_map(|x| {
                    eval_partial(&a.net, g, &ProcessTerm::gen(tr.id.clone()), &x)
                        .unwrap()
                        .map(|y| (x, y))
                })
                .collect();
            assert_eq!(rel, graph);
            assert_eq!(tbl.len(), rel.len());
        }
        let empty = embed_partial_as_span(&PartialGuard::default());
        assert!(empty.tables.is_empty());
    }
}

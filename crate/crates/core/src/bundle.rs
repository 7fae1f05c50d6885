//! The bundle file format (a net, an optional guard, named markings and an
//! optional projection), functor files, and DOT export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::guard::{Guard, GuardedNet, PartialGuard, SpanEntry, SpanGuard};
use crate::internalize::{ColoredMarking, Internalized, Payload, Projection};
use crate::net::{Marking, Net, Transition};
use crate::term::{ProcessTerm, Word};
use crate::transform::NetFunctor;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NamedMarking {
    Plain(Marking),
    Colored(ColoredMarking),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bundle {
    pub guarded: GuardedNet,
    pub markings: BTreeMap<String, NamedMarking>,
    /// Present when the net is the internalization of another.
    pub projection: Option<Projection>,
}

impl Bundle {
    pub fn new(guarded: GuardedNet) -> Self {
        Bundle {
            guarded,
            ..Bundle::default()
        }
    }

    pub fn from_internalized(i: &Internalized) -> Self {
        Bundle {
            guarded: i.as_guarded(),
            markings: BTreeMap::new(),
            projection: Some(i.projection.clone()),
        }
    }

    pub fn marking(&self, name: &str) -> Option<&NamedMarking> {
        self.markings.get(name)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleFile {
    version: u32,
    net: NetDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<GuardDto>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    markings: BTreeMap<String, Vec<TokenDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    projection: Option<ProjectionDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetDto {
    places: Vec<PlaceDto>,
    transitions: Vec<TransitionDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaceDto {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    colors: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDto {
    id: String,
    pre: Vec<String>,
    post: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GuardDto {
    kind: String,
    #[serde(default)]
    tables: BTreeMap<String, Vec<RowDto>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
    #[serde(rename = "in")]
    input: Vec<String>,
    #[serde(rename = "out")]
    output: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TokenDto {
    Plain(String),
    Colored(String, String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionDto {
    places: BTreeMap<String, (String, String)>,
    transitions: BTreeMap<String, ProjectedTransitionDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectedTransitionDto {
    base: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<u32>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn check_version(text: &str) -> Result<()> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(parse_error)?;
    match probe.version {
        Some(FORMAT_VERSION) => Ok(()),
        Some(found) => Err(Error::Version {
            found,
            expected: FORMAT_VERSION,
        }),
        None => Err(Error::Parse {
            line: 1,
            column: 1,
            message: "missing field `version`".into(),
        }),
    }
}

/// Parses and cross-validates a bundle.
pub fn parse_bundle(text: &str) -> Result<Bundle> {
    check_version(text)?;
    let file: BundleFile = serde_json::from_str(text).map_err(parse_error)?;
    let mut diags = Vec::new();
    let bundle = from_file(file, &mut diags);
    if diags.is_empty() {
        Ok(bundle)
    } else {
        Err(Error::InvalidBundle(diags))
    }
}

fn from_file(file: BundleFile, diags: &mut Vec<Diagnostic>) -> Bundle {
    let kind = file.guard.as_ref().map_or("none", |g| g.kind.as_str()).to_string();
    let guarded_kind = matches!(kind.as_str(), "partial" | "span");
    if !matches!(kind.as_str(), "none" | "partial" | "span") {
        diags.push(Diagnostic::new(
            "guard",
            format!("unknown guard kind `{kind}` (expected none, partial or span)"),
        ));
    }

    let mut colors = BTreeMap::new();
    for p in &file.net.places {
        match (&p.colors, guarded_kind) {
            (Some(cs), true) => {
                let set: BTreeSet<String> = cs.iter().cloned().collect();
                if set.len() != cs.len() {
                    diags.push(Diagnostic::new(&p.id, "repeated color"));
                }
                colors.insert(p.id.clone(), set);
            }
            (None, true) => diags.push(Diagnostic::new(&p.id, "place has no color set")),
            (Some(_), false) => diags.push(Diagnostic::new(&p.id, "colors given but the bundle has no guard")),
            (None, false) => {}
        }
    }
    let net = Net::new(
        file.net.places.iter().map(|p| p.id.clone()),
        file.net
            .transitions
            .iter()
            .map(|t| Transition::new(t.id.clone(), t.pre.iter().cloned(), t.post.iter().cloned())),
    );
    diags.extend(net.validate());

    let tables = file.guard.map(|g| g.tables).unwrap_or_default();
    let guard = match kind.as_str() {
        "partial" => {
            let mut out = BTreeMap::new();
            for (t, rows) in tables {
                let mut tbl = BTreeMap::new();
                for r in rows {
                    if r.witness.is_some() {
                        diags.push(Diagnostic::new(&t, "partial guard rows take no witness"));
                    }
                    if tbl.insert(r.input.clone(), r.output).is_some() {
                        diags.push(Diagnostic::new(
                            &t,
                            format!("input ({}) has two outputs", r.input.join(",")),
                        ));
                    }
                }
                out.insert(t, tbl);
            }
            Guard::Partial(PartialGuard { colors, tables: out })
        }
        "span" => {
            let mut out = BTreeMap::new();
            for (t, rows) in tables {
                let mut entries = Vec::new();
                for r in rows {
                    let Some(witness) = r.witness else {
                        diags.push(Diagnostic::new(&t, "span guard row without a witness"));
                        continue;
                    };
                    entries.push(SpanEntry {
                        witness,
                        input: r.input,
                        output: r.output,
                    });
                }
                out.insert(t, entries);
            }
            Guard::Span(SpanGuard { colors, tables: out })
        }
        _ => {
            if !tables.is_empty() {
                diags.push(Diagnostic::new("guard", "tables given for a guard of kind none"));
            }
            Guard::None
        }
    };
    diags.extend(guard.validate(&net));
    let guarded = GuardedNet::new(net, guard);

    let mut markings = BTreeMap::new();
    for (name, tokens) in file.markings {
        if let Some(m) = marking_from(&guarded, &name, tokens, diags) {
            markings.insert(name, m);
        }
    }

    let projection = file.projection.map(|p| Projection {
        places: p.places,
        transitions: p
            .transitions
            .into_iter()
            .filter_map(|(name, t)| {
                let payload = match (t.input, t.witness) {
                    (Some(x), None) => Payload::Input(x),
                    (None, Some(w)) => Payload::Witness(w),
                    _ => {
                        diags.push(Diagnostic::new(
                            &name,
                            "projected transition needs exactly one of `input` and `witness`",
                        ));
                        return None;
                    }
                };
                Some((name, (t.base, payload)))
            })
            .collect(),
    });
    if let Some(p) = &projection {
        for name in guarded.net.places() {
            if !p.places.contains_key(name) {
                diags.push(Diagnostic::new(name, "place missing from the projection"));
            }
        }
        for t in guarded.net.transitions() {
            if !p.transitions.contains_key(&t.id) {
                diags.push(Diagnostic::new(&t.id, "transition missing from the projection"));
            }
        }
    }

    Bundle {
        guarded,
        markings,
        projection,
    }
}

fn marking_from(
    gn: &GuardedNet,
    name: &str,
    tokens: Vec<TokenDto>,
    diags: &mut Vec<Diagnostic>,
) -> Option<NamedMarking> {
    let subject = format!("marking `{name}`");
    let before = diags.len();
    let out = match &gn.guard {
        Guard::None => {
            let mut m = Marking::new();
            for tok in tokens {
                match tok {
                    TokenDto::Plain(p) if gn.net.has_place(&p) => m.insert(p),
                    TokenDto::Plain(p) => diags.push(Diagnostic::new(&subject, format!("unknown place `{p}`"))),
                    TokenDto::Colored(p, c) => diags.push(Diagnostic::new(
                        &subject,
                        format!("colored token ({p}, {c}) in a bundle without a guard"),
                    )),
                }
            }
            NamedMarking::Plain(m)
        }
        _ => {
            let mut m = ColoredMarking::new();
            for tok in tokens {
                match tok {
                    TokenDto::Colored(p, c) => match gn.colors_of(&p) {
                        Ok(cs) if cs.contains(&c) => m.insert((p, c)),
                        Ok(_) => diags.push(Diagnostic::new(
                            &subject,
                            format!("color `{c}` is not in the color set of place `{p}`"),
                        )),
                        Err(_) => diags.push(Diagnostic::new(&subject, format!("unknown place `{p}`"))),
                    },
                    TokenDto::Plain(p) => {
                        diags.push(Diagnostic::new(&subject, format!("token on `{p}` needs a color")))
                    }
                }
            }
            NamedMarking::Colored(m)
        }
    };
    (diags.len() == before).then_some(out)
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<Bundle> {
    parse_bundle(&std::fs::read_to_string(path)?)
}

pub fn save_bundle(b: &Bundle, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json_string(b))?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline; deterministic.
pub fn to_json_string(b: &Bundle) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(b)).expect("bundle serializes");
    s.push('\n');
    s
}

fn to_file(b: &Bundle) -> BundleFile {
    let gn = &b.guarded;
    let colors = gn.guard.colors();
    let net = NetDto {
        places: gn
            .net
            .places()
            .iter()
            .map(|p| PlaceDto {
                id: p.clone(),
                colors: colors.map(|c| c.get(p).into_iter().flatten().cloned().collect()),
            })
            .collect(),
        transitions: gn
            .net
            .transitions()
            .iter()
            .map(|t| TransitionDto {
                id: t.id.clone(),
                pre: t.pre.elements().cloned().collect(),
                post: t.post.elements().cloned().collect(),
            })
            .collect(),
    };
    let guard = match &gn.guard {
        Guard::None => None,
        Guard::Partial(g) => Some(GuardDto {
            kind: "partial".into(),
            tables: g
                .tables
                .iter()
                .map(|(t, tbl)| {
                    let rows = tbl
                        .iter()
                        .map(|(k, v)| RowDto {
                            witness: None,
                            input: k.clone(),
                            output: v.clone(),
                        })
                        .collect();
                    (t.clone(), rows)
                })
                .collect(),
        }),
        Guard::Span(g) => Some(GuardDto {
            kind: "span".into(),
            tables: g
                .tables
                .iter()
                .map(|(t, entries)| {
                    let rows = entries
                        .iter()
                        .map(|e| RowDto {
                            witness: Some(e.witness.clone()),
                            input: e.input.clone(),
                            output: e.output.clone(),
                        })
                        .collect();
                    (t.clone(), rows)
                })
                .collect(),
        }),
    };
    let markings = b
        .markings
        .iter()
        .map(|(name, m)| {
            let tokens = match m {
                NamedMarking::Plain(m) => m.elements().cloned().map(TokenDto::Plain).collect(),
                NamedMarking::Colored(m) => m
                    .elements()
                    .map(|(p, c)| TokenDto::Colored(p.clone(), c.clone()))
                    .collect(),
            };
            (name.clone(), tokens)
        })
        .collect();
    let projection = b.projection.as_ref().map(|p| ProjectionDto {
        places: p.places.clone(),
        transitions: p
            .transitions
            .iter()
            .map(|(name, (base, payload))| {
                let (input, witness) = match payload {
                    Payload::Input(x) => (Some(x.clone()), None),
                    Payload::Witness(w) => (None, Some(w.clone())),
                };
                (
                    name.clone(),
                    ProjectedTransitionDto {
                        base: base.clone(),
                        input,
                        witness,
                    },
                )
            })
            .collect(),
    });
    BundleFile {
        version: FORMAT_VERSION,
        net,
        guard,
        markings,
        projection,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctorFile {
    version: u32,
    objects: BTreeMap<String, Vec<String>>,
    morphisms: BTreeMap<String, serde_json::Value>,
}

pub fn parse_functor(text: &str) -> Result<NetFunctor> {
    check_version(text)?;
    let file: FunctorFile = serde_json::from_str(text).map_err(parse_error)?;
    let mut morphisms = BTreeMap::new();
    for (t, v) in file.morphisms {
        let term = ProcessTerm::from_json(&v).map_err(|e| Error::InvalidFunctor(format!("image of `{t}`: {e}")))?;
        morphisms.insert(t, term);
    }
    Ok(NetFunctor {
        objects: file.objects.into_iter().map(|(p, w)| (p, Word(w))).collect(),
        morphisms,
    })
}

pub fn load_functor(path: impl AsRef<Path>) -> Result<NetFunctor> {
    parse_functor(&std::fs::read_to_string(path)?)
}

pub fn functor_to_json_string(f: &NetFunctor) -> String {
    let file = FunctorFile {
        version: FORMAT_VERSION,
        objects: f.objects.iter().map(|(p, w)| (p.clone(), w.0.clone())).collect(),
        morphisms: f.morphisms.iter().map(|(t, m)| (t.clone(), m.to_json())).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("functor serializes");
    s.push('\n');
    s
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: places as circles, transitions as boxes. With a
/// projection, places sharing a base place are drawn in one cluster.
pub fn export_dot(net: &Net, projection: Option<&Projection>) -> String {
    let mut out = String::from("digraph net {\n  rankdir=LR;\n");
    let place_node = |p: &str| quote(&format!("p:{p}"));
    let place_line = |p: &str, indent: &str| format!("{indent}{} [shape=circle, label={}];\n", place_node(p), quote(p));
    match projection {
        Some(pi) => {
            let mut clusters: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
            let mut loose = Vec::new();
            for p in net.places() {
                match pi.places.get(p) {
                    Some((base, _)) => clusters.entry(base).or_default().push(p),
                    None => loose.push(p.as_str()),
                }
            }
            for (k, (base, members)) in clusters.iter().enumerate() {
                let _ = writeln!(out, "  subgraph cluster_{k} {{");
                let _ = writeln!(out, "    label={};", quote(base));
                for p in members {
                    out.push_str(&place_line(p, "    "));
                }
                out.push_str("  }\n");
            }
            for p in loose {
                out.push_str(&place_line(p, "  "));
            }
        }
        None => {
            for p in net.places() {
                out.push_str(&place_line(p, "  "));
            }
        }
    }
    for t in net.transitions() {
        let node = quote(&format!("t:{}", t.id));
        let _ = writeln!(out, "  {node} [shape=box, label={}];", quote(&t.id));
        for (p, n) in t.pre.iter() {
            let label = if n > 1 {
                format!(" [label=\"{n}\"]")
            } else {
                String::new()
            };
            let _ = writeln!(out, "  {} -> {node}{label};", place_node(p));
        }
        for (p, n) in t.post.iter() {
            let label = if n > 1 {
                format!(" [label=\"{n}\"]")
            } else {
                String::new()
            };
            let _ = writeln!(out, "  {node} -> {}{label};", place_node(p));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixtures_round_trip() {
        for name in fixtures::NAMES {
            let b = fixtures::bundle(name);
            let text = to_json_string(&b);
            assert_eq!(parse_bundle(&text).unwrap(), b, "{name}");
        }
    }

    #[test]
    fn fixture_a_has_partial_guard() {
        let b = fixtures::bundle("fixture_a");
        assert_eq!(b.guarded.guard.kind(), "partial");
        assert_eq!(b.markings.len(), 4);
    }

    #[test]
    fn bad_color_is_named() {
        let text = r#"{"version": 1,
            "net": {"places": [{"id": "P", "colors": ["a"]}], "transitions": []},
            "guard": {"kind": "partial", "tables": {}},
            "markings": {"m": [["P", "b"]]}}"#;
        match parse_bundle(text) {
            Err(Error::InvalidBundle(d)) => {
                assert_eq!(d.len(), 1);
                assert!(d[0].message.contains("`b`") && d[0].message.contains("`P`"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_bundle("{\"version\": 1,\n  \"net\": [") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_bundle(r#"{"version": 2, "net": {"places": [], "transitions": []}}"#),
            Err(Error::Version { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn functor_round_trip() {
        let (_, f) = fixtures::sync_witness();
        assert_eq!(parse_functor(&functor_to_json_string(&f)).unwrap(), f);
    }

    #[test]
    fn empty_net_dot() {
        assert_eq!(export_dot(&Net::empty(), None), "digraph net {\n  rankdir=LR;\n}\n");
    }
}

//! Marking arguments: a name from the bundle, or inline tokens such as
//! `P1:red,P2:green*2` (guarded) or `P1,P1,P2` (plain). An empty string is
//! the empty marking.

use guardnet::internalize::ColoredMarking;
use guardnet::net::Marking;
use guardnet::{Bundle, NamedMarking};
use serde_json::{json, Value};

fn tokens(arg: &str) -> Result<Vec<(String, u32)>, String> {
    arg.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.rsplit_once('*') {
            Some((tok, n)) => n
                .parse()
                .map(|n| (tok.to_string(), n))
                .map_err(|_| format!("bad multiplicity in `{t}`")),
            None => Ok((t.to_string(), 1)),
        })
        .collect()
}

pub fn colored(bundle: &Bundle, arg: &str) -> Result<ColoredMarking, String> {
    match bundle.marking(arg) {
        Some(NamedMarking::Colored(m)) => return Ok(m.clone()),
        Some(NamedMarking::Plain(_)) => return Err(format!("marking `{arg}` is not colored")),
        None => {}
    }
    let mut m = ColoredMarking::new();
    for (tok, n) in tokens(arg)? {
        let (p, c) = tok
            .rsplit_once(':')
            .ok_or_else(|| format!("token `{tok}` needs a color, as in `{tok}:red`"))?;
        m.insert_n((p.to_string(), c.to_string()), n);
    }
    Ok(m)
}

pub fn plain(bundle: &Bundle, arg: &str) -> Result<Marking, String> {
    match bundle.marking(arg) {
        Some(NamedMarking::Plain(m)) => return Ok(m.clone()),
        Some(NamedMarking::Colored(_)) => return Err(format!("marking `{arg}` is colored")),
        None => {}
    }
    let mut m = Marking::new();
    for (tok, n) in tokens(arg)? {
        m.insert_n(tok, n);
    }
    Ok(m)
}

pub fn colored_json(m: &ColoredMarking) -> Value {
    Value::Array(m.elements().map(|(p, c)| json!([p, c])).collect())
}

pub fn plain_json(m: &Marking) -> Value {
    Value::Array(m.elements().map(|p| json!(p)).collect())
}

pub fn colored_text(m: &ColoredMarking) -> String {
    let parts: Vec<String> = m.iter().map(|((p, c), n)| counted(&format!("{p}:{c}"), n)).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn plain_text(m: &Marking) -> String {
    let parts: Vec<String> = m.iter().map(|(p, n)| counted(p, n)).collect();
    format!("{{{}}}", parts.join(", "))
}

fn counted(tok: &str, n: u32) -> String {
    if n == 1 {
        tok.to_string()
    } else {
        format!("{tok}*{n}")
    }
}

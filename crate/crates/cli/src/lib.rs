//! The `guardnet` command line: argument parsing, dispatch and output.
//!
//! Exit codes: 0 success (or reachable), 1 not reachable / invalid bundle /
//! failed checks, 2 inconclusive search, 3 any other error, 64 usage error.

mod markings;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use guardnet::bundle::{self, export_dot, load_bundle, load_functor, save_bundle};
use guardnet::internalize::internalize;
use guardnet::reach::{colored_successors, default_state_cap, internal_marking, DEFAULT_DEPTH};
use guardnet::suite::{self, Group, Options};
use guardnet::transform::{self, NetFunctor};
use guardnet::{reach_colored, reach_plain, Bundle, Error, Guard, ReachOutcome, ReachQuery};
use serde_json::{json, Value};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_ERROR: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "guardnet",
    version,
    about = "Guarded Petri nets: internalization, reachability and net morphisms"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a bundle and report every problem found.
    Validate { bundle: PathBuf },
    /// Write the internalization of a guarded bundle.
    Internalize {
        bundle: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bounded reachability between two markings.
    Reach {
        bundle: PathBuf,
        /// Marking name from the bundle, or tokens such as `P1:red,P2:green*2`.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        /// Defaults to GUARDNET_STATE_CAP, or 100000.
        #[arg(long)]
        state_cap: Option<usize>,
        /// Search the internalized net instead of playing the colored game.
        #[arg(long)]
        plain: bool,
    },
    /// Fire a sequence of steps. Guarded nets name steps by their
    /// internalized transition, as in `t1@red` or `f@w1`.
    Fire {
        bundle: PathBuf,
        #[arg(long)]
        marking: String,
        steps: Vec<String>,
    },
    /// Identification, addition, erasing and synchronization.
    Compose {
        #[command(subcommand)]
        op: ComposeOp,
    },
    /// Render a net as Graphviz DOT.
    ExportDot {
        bundle: PathBuf,
        /// Render the internalization, clustered by base place.
        #[arg(long)]
        internalize: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the property suites.
    Check {
        #[arg(default_value = "all", value_parser = parse_group)]
        group: Group,
        /// Random guarded nets in the reachability suite.
        #[arg(long)]
        random: Option<usize>,
        /// Random instances in the lifting and cross-semantics suites.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_group(s: &str) -> Result<Group, String> {
    s.parse()
}

#[derive(Subcommand, Debug)]
enum ComposeOp {
    /// Glue the images of `--left` and `--right` together.
    Identify {
        bundle: PathBuf,
        #[arg(long)]
        overlap: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Perform the operation on the internalization with lifted data.
        #[arg(long)]
        lifted: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Add generators named by a witness functor.
    Add {
        bundle: PathBuf,
        #[arg(long)]
        generators: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        lifted: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Erase transitions.
    Erase {
        bundle: PathBuf,
        #[arg(long, value_delimiter = ',')]
        victims: Vec<String>,
        #[arg(long)]
        lifted: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Erase transitions, then add generators in their place.
    Sync {
        bundle: PathBuf,
        #[arg(long, value_delimiter = ',')]
        victims: Vec<String>,
        #[arg(long)]
        generators: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        lifted: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// What a command prints and how it exits.
struct Report {
    json: Value,
    text: String,
    code: i32,
}

impl Report {
    fn ok(json: Value, text: impl Into<String>) -> Self {
        Report {
            json,
            text: text.into(),
            code: 0,
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    diagnostics: Vec<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: e.to_string(),
            diagnostics: Vec::new(),
        }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure {
            code: EXIT_ERROR,
            message,
            diagnostics: Vec::new(),
        }
    }
}

type Outcome = Result<Report, Failure>;

/// Runs the command line with the process's standard streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_command_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs the command line, writing results to `out` and messages to `err`.
/// `argv` starts with the program name.
pub fn run_command_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = dispatch(cli.command);
    match (result, cli.format) {
        (Ok(r), Format::Text) => {
            let _ = write!(out, "{}", r.text);
            if !r.text.is_empty() && !r.text.ends_with('\n') {
                let _ = writeln!(out);
            }
            r.code
        }
        (Ok(r), Format::Json) => {
            let _ = writeln!(out, "{}", r.json);
            r.code
        }
        (Err(f), Format::Text) => {
            let _ = writeln!(err, "error: {}", f.message);
            for d in &f.diagnostics {
                let _ = writeln!(err, "  {d}");
            }
            f.code
        }
        (Err(f), Format::Json) => {
            let _ = writeln!(
                out,
                "{}",
                json!({"error": f.message, "diagnostics": f.diagnostics, "exit": f.code})
            );
            f.code
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate { bundle } => validate(&bundle),
        Command::Internalize { bundle, output } => {
            let b = load_bundle(&bundle)?;
            let i = internalize(&b.guarded)?;
            emit_bundle(&Bundle::from_internalized(&i), output.as_deref())
        }
        Command::Reach {
            bundle,
            from,
            to,
            depth,
            state_cap,
            plain,
        } => reach(
            &bundle,
            &from,
            &to,
            depth,
            state_cap.unwrap_or_else(default_state_cap),
            plain,
        ),
        Command::Fire { bundle, marking, steps } => fire(&bundle, &marking, &steps),
        Command::Compose { op } => compose(op),
        Command::ExportDot {
            bundle,
            internalize: int,
            output,
        } => export(&bundle, int, output.as_deref()),
        Command::Check {
            group,
            random,
            instances,
            seed,
        } => {
            let defaults = Options::default();
            let opts = Options {
                random_nets: random.unwrap_or(defaults.random_nets),
                random_instances: instances.unwrap_or(defaults.random_instances),
                seed: seed.unwrap_or(defaults.seed),
                ..defaults
            };
            check(group, &opts)
        }
    }
}

fn validate(path: &Path) -> Outcome {
    let b = match load_bundle(path) {
        Ok(b) => b,
        Err(Error::InvalidBundle(diags)) => {
            return Err(Failure {
                code: 1,
                message: format!("{} is not a valid bundle", path.display()),
                diagnostics: diags.iter().map(ToString::to_string).collect(),
            })
        }
        Err(e @ (Error::Parse { .. } | Error::Version { .. })) => {
            return Err(Failure {
                code: 1,
                message: e.to_string(),
                diagnostics: Vec::new(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let net = &b.guarded.net;
    let summary = format!(
        "valid: {} places, {} transitions, {} guard, {} markings",
        net.places().len(),
        net.transitions().len(),
        b.guarded.guard.kind(),
        b.markings.len()
    );
    Ok(Report::ok(
        json!({
            "valid": true,
            "places": net.places().len(),
            "transitions": net.transitions().len(),
            "guard": b.guarded.guard.kind(),
            "markings": b.markings.keys().collect::<Vec<_>>(),
        }),
        summary,
    ))
}

fn emit_bundle(b: &Bundle, output: Option<&Path>) -> Outcome {
    let net = &b.guarded.net;
    match output {
        None => {
            let text = bundle::to_json_string(b);
            let json: Value = serde_json::from_str(&text).expect("bundle text is JSON");
            Ok(Report::ok(json, text))
        }
        Some(path) => {
            save_bundle(b, path)?;
            Ok(Report::ok(
                json!({
                    "output": path.display().to_string(),
                    "places": net.places().len(),
                    "transitions": net.transitions().len(),
                }),
                format!(
                    "wrote {} ({} places, {} transitions)",
                    path.display(),
                    net.places().len(),
                    net.transitions().len()
                ),
            ))
        }
    }
}

fn outcome_name<W>(o: &ReachOutcome<W>) -> &'static str {
    match o {
        ReachOutcome::Reachable(_) => "reachable",
        ReachOutcome::NotReachable => "not-reachable",
        ReachOutcome::Inconclusive => "inconclusive",
    }
}

fn outcome_text<W>(o: &ReachOutcome<W>, steps: usize, depth: usize, cap: usize) -> String {
    match o {
        ReachOutcome::Reachable(_) => format!("reachable in {steps} step(s)\n"),
        ReachOutcome::NotReachable => format!("not reachable within depth {depth}\n"),
        ReachOutcome::Inconclusive => format!("inconclusive: state cap of {cap} reached\n"),
    }
}

fn reach(path: &Path, from: &str, to: &str, depth: usize, cap: usize, plain: bool) -> Outcome {
    let b = load_bundle(path)?;
    let gn = &b.guarded;
    if matches!(gn.guard, Guard::None) || plain {
        let (net, from, to) = if matches!(gn.guard, Guard::None) {
            (gn.net.clone(), markings::plain(&b, from)?, markings::plain(&b, to)?)
        } else {
            let i = internalize(gn)?;
            let (f, t) = (markings::colored(&b, from)?, markings::colored(&b, to)?);
            (i.net, internal_marking(&f), internal_marking(&t))
        };
        let out = reach_plain(&net, &ReachQuery::new(from, to).with_bounds(depth, cap))?;
        let seq = out.witness().map(|s| s.0.clone()).unwrap_or_default();
        let mut text = outcome_text(&out, seq.len(), depth, cap);
        for (k, t) in seq.iter().enumerate() {
            text.push_str(&format!("  {}. {t}\n", k + 1));
        }
        let json = json!({"outcome": outcome_name(&out), "steps": seq});
        return Ok(Report {
            json,
            text,
            code: out.exit_code(),
        });
    }
    let q = ReachQuery::new(markings::colored(&b, from)?, markings::colored(&b, to)?).with_bounds(depth, cap);
    let out = reach_colored(gn, &q)?;
    let steps: Vec<Value> = out
        .witness()
        .map(|run| {
            run.steps
                .iter()
                .zip(&run.markings)
                .map(|(s, m)| {
                    json!({
                        "transition": s.transition,
                        "input": s.input,
                        "witness": s.witness,
                        "output": s.output,
                        "internal": s.internal_name(),
                        "marking": markings::colored_json(m),
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    let mut text = outcome_text(&out, steps.len(), depth, cap);
    if let Some(run) = out.witness() {
        for (k, (s, m)) in run.steps.iter().zip(&run.markings).enumerate() {
            text.push_str(&format!("  {}. {s}  =>  {}\n", k + 1, markings::colored_text(m)));
        }
    }
    Ok(Report {
        json: json!({"outcome": outcome_name(&out), "steps": steps}),
        text,
        code: out.exit_code(),
    })
}

fn fire(path: &Path, marking: &str, steps: &[String]) -> Outcome {
    let b = load_bundle(path)?;
    let gn = &b.guarded;
    let mut text = String::new();
    let mut trail = Vec::new();
    if matches!(gn.guard, Guard::None) {
        let mut m = markings::plain(&b, marking)?;
        gn.net.check_marking(&m)?;
        text.push_str(&format!("start: {}\n", markings::plain_text(&m)));
        for s in steps {
            m = gn.net.fire(&m, s)?;
            text.push_str(&format!("{s}: {}\n", markings::plain_text(&m)));
            trail.push(markings::plain_json(&m));
        }
    } else {
        let mut m = markings::colored(&b, marking)?;
        text.push_str(&format!("start: {}\n", markings::colored_text(&m)));
        for s in steps {
            let next = colored_successors(gn, &m)?
                .into_iter()
                .find(|(step, _)| &step.internal_name() == s)
                .map(|(_, next)| next)
                .ok_or_else(|| Error::NotEnabled(s.clone()))?;
            m = next;
            text.push_str(&format!("{s}: {}\n", markings::colored_text(&m)));
            trail.push(markings::colored_json(&m));
        }
    }
    Ok(Report::ok(json!({"markings": trail}), text))
}

fn load_net(path: &Path) -> Result<guardnet::Net, Failure> {
    Ok(load_bundle(path)?.guarded.net)
}

fn compose(op: ComposeOp) -> Outcome {
    let (result, output) = match op {
        ComposeOp::Identify {
            bundle,
            overlap,
            left,
            right,
            lifted,
            output,
        } => {
            let m = load_bundle(&bundle)?.guarded;
            let o = load_net(&overlap)?;
            let (l, r) = (load_functor(&left)?, load_functor(&right)?);
            let q = if lifted {
                transform::lifted_identify(&o, &l, &r, &m)?
            } else {
                transform::identify(&o, &l, &r, &m)?
            };
            (q.guarded, output)
        }
        ComposeOp::Add {
            bundle,
            generators,
            witness,
            lifted,
            output,
        } => {
            let k = load_bundle(&bundle)?.guarded;
            let (w, f) = (load_net(&generators)?, load_functor(&witness)?);
            let net = if lifted {
                transform::lifted_add(&k, &w, &f)?
            } else {
                transform::add_generators(&k, &w, &f)?
            };
            (net, output)
        }
        ComposeOp::Erase {
            bundle,
            victims,
            lifted,
            output,
        } => {
            let n = load_bundle(&bundle)?.guarded;
            let victims: BTreeSet<String> = victims.into_iter().collect();
            let net = if lifted {
                transform::lifted_erase(&n, &victims)?
            } else {
                transform::erase_generators(&n, &victims)?
            };
            (net, output)
        }
        ComposeOp::Sync {
            bundle,
            victims,
            generators,
            witness,
            lifted,
            output,
        } => {
            let n = load_bundle(&bundle)?.guarded;
            let victims: BTreeSet<String> = victims.into_iter().collect();
            let (w, f): (_, NetFunctor) = (load_net(&generators)?, load_functor(&witness)?);
            let net = if lifted {
                transform::lifted_synchronize(&n, &victims, &w, &f)?
            } else {
                transform::synchronize(&n, &victims, &w, &f)?
            };
            (net, output)
        }
    };
    emit_bundle(&Bundle::new(result), output.as_deref())
}

fn export(path: &Path, int: bool, output: Option<&Path>) -> Outcome {
    let b = load_bundle(path)?;
    let dot = if int {
        let i = internalize(&b.guarded)?;
        export_dot(&i.net, Some(&i.projection))
    } else {
        export_dot(&b.guarded.net, b.projection.as_ref())
    };
    match output {
        None => Ok(Report::ok(json!({"dot": dot}), dot)),
        Some(p) => {
            std::fs::write(p, &dot).map_err(Error::from)?;
            Ok(Report::ok(
                json!({"output": p.display().to_string()}),
                format!("wrote {}", p.display()),
            ))
        }
    }
}

fn check(group: Group, opts: &Options) -> Outcome {
    let results = suite::run(group, opts);
    let passed = results.iter().all(|r| r.passed);
    let mut text: String = results.iter().map(|r| format!("{r}\n")).collect();
    let failed = results.iter().filter(|r| !r.passed).count();
    text.push_str(&format!("{} checks, {failed} failed\n", results.len()));
    let json = json!({
        "passed": passed,
        "results": results
            .iter()
            .map(|r| json!({"group": r.group, "name": r.name, "passed": r.passed, "detail": r.detail}))
            .collect::<Vec<_>>(),
    });
    Ok(Report {
        json,
        text,
        code: if passed { 0 } else { 1 },
    })
}

//! The `flowcalc` command line: argument handling, dispatch and output.

pub mod dot;
pub mod parse;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::builder::RangedU64ValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dihomotopy::{branching_profile, check_invariance, resultat1_check, t_subdivide, Direction};
use crate::error::{Error, Result};
use crate::flow::CombFlow;
use crate::homology::homology_profile;
use crate::presentation::{FlowSummary, DEFAULT_BUDGET};
use crate::probe::lemma_probe;
use crate::random::invariance_suite;
use crate::simpset::DEFAULT_CAP;

pub use parse::{parse_input, Input};
pub use report::{Body, Document, ErrorInfo, Status};
use report::*;

#[derive(Debug, Parser)]
#[command(name = "flowcalc", version, about = "Posets, finite flows, branching homology and T-subdivision checks")]
pub struct Cli {
    /// Truncation dimension of simplicial sets; homology is reported below it.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP, value_parser = RangedU64ValueParser::<usize>::new().range(1..=6))]
    pub dim_cap: usize,
    /// Word budget per level for saturation.
    #[arg(long, global = true, env = "FLOWCALC_BUDGET", default_value_t = DEFAULT_BUDGET, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
    pub budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write a Graphviz rendering of the input to this path.
    #[arg(long, global = true)]
    pub dot: Option<PathBuf>,
    /// Seed for randomized runs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chain lengths, the exterior simplex category, degrees and the direct-category check.
    PosetReport { file: PathBuf },
    /// Structural validation of a poset or flow file.
    Validate { file: PathBuf },
    /// Homology of the order complex (poset) or of every path space (flow).
    Homology {
        file: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Per-state branching spaces and their homology.
    Branch { file: PathBuf },
    /// Per-state merging spaces and their homology.
    Merge { file: PathBuf },
    /// Full directed ball conditions and the branching space at the bottom.
    BallCheck { file: PathBuf },
    /// Replace a level-0 path by a full directed ball.
    Subdivide(EdgeArgs),
    /// Compare branching and merging homology before and after a subdivision.
    CheckInvariance(InvarianceArgs),
    /// Join-isomorphism and latching-object comparisons on a ball.
    LemmaProbe { file: PathBuf },
}

#[derive(Debug, Args)]
pub struct EdgeArgs {
    #[arg(long)]
    pub flow: PathBuf,
    /// Source and target state of the path to subdivide.
    #[arg(long, num_args = 2, value_names = ["SOURCE", "TARGET"])]
    pub edge: Vec<String>,
    /// Which vertex of the path space; defaults to the first.
    #[arg(long)]
    pub vertex: Option<String>,
    /// A poset file (its poset flow is used) or a flow file.
    #[arg(long)]
    pub ball: PathBuf,
}

#[derive(Debug, Args)]
pub struct InvarianceArgs {
    #[arg(long, requires_all = ["edge", "ball"], conflicts_with = "random")]
    pub flow: Option<PathBuf>,
    #[arg(long, num_args = 2, value_names = ["SOURCE", "TARGET"])]
    pub edge: Vec<String>,
    #[arg(long)]
    pub vertex: Option<String>,
    #[arg(long)]
    pub ball: Option<PathBuf>,
    /// Check this many random instances instead of one given instance.
    #[arg(long, required_unless_present = "flow")]
    pub random: Option<usize>,
    /// Directory for failing random instances.
    #[arg(long, requires = "random")]
    pub counterexamples: Option<PathBuf>,
}

/// What a run produced: exit code and the two output streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses arguments (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let (doc, dot) = match execute(cli) {
        Ok((input, body, status, dot)) => (Document { status, input: Some(input), result: Some(body), error: None }, dot),
        Err(e) => (Document { status: Status::Error, input: None, result: None, error: Some(error_info(&e)) }, None),
    };
    let mut stderr = String::new();
    if let (Some(path), Some(text)) = (&cli.dot, dot) {
        if let Err(e) = fs::write(path, text) {
            stderr.push_str(&format!("cannot write {}: {e}\n", path.display()));
        }
    }
    if let Some(e) = &doc.error {
        stderr.push_str(&format!("error: {}\n", e.message));
    }
    let stdout = match cli.format {
        Format::Json => doc.to_json(),
        Format::Text if doc.error.is_some() => String::new(),
        Format::Text => doc.to_text(),
    };
    Outcome { code: doc.status.exit_code(), stdout, stderr }
}

fn error_info(e: &Error) -> ErrorInfo {
    let kind = match e {
        Error::Parse { kind, .. } => kind.to_string(),
        other => format!("{other:?}").split(['(', ' ', '{']).next().unwrap_or("Error").to_string(),
    };
    let (line, column) = match e {
        Error::Parse { line, column, .. } => (Some(*line), Some(*column)),
        _ => (None, None),
    };
    let message = match e {
        Error::Parse { message, .. } => message.clone(),
        other => other.to_string(),
    };
    ErrorInfo { kind, message, line, column }
}

fn read(path: &Path, cap: usize) -> Result<Input> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        column: 0,
        kind: crate::error::ParseErrorKind::Syntax,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_input(&text, cap)
}

fn flow_of(input: &Input, cap: usize, budget: usize) -> Result<CombFlow> {
    match input {
        Input::Poset { poset, .. } => Ok(CombFlow::from_poset(poset, cap)),
        Input::Flow { .. } => input.to_flow(budget),
    }
}

type Executed = (String, Body, Status, Option<String>);

fn execute(cli: &Cli) -> Result<Executed> {
    let cap = cli.dim_cap;
    let budget = cli.budget;
    match &cli.command {
        Command::PosetReport { file } => {
            let input = read(file, cap)?;
            let Input::Poset { poset, name } = &input else {
                return Err(Error::MalformedFlow("poset-report needs a poset file".into()));
            };
            let validation = poset.validate();
            let table = poset.length_table();
            let n = poset.len();
            let lengths = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter_map(|(a, b)| {
                    table.get(a, b).map(|l| LengthEntry { from: poset.name(a).into(), to: poset.name(b).into(), length: l })
                })
                .collect();
            let (body, dot) = match poset.ext_category() {
                Ok(c) => {
                    let reedy = poset.reedy_report()?;
                    let body = PosetBody {
                        validation,
                        lengths,
                        objects: (0..c.objects.len())
                            .map(|o| ObjectEntry { chain: c.object_label(o), degree: c.degree[o] })
                            .collect(),
                        arrows: c
                            .arrows
                            .iter()
                            .map(|a| ArrowEntry {
                                index: a.index,
                                source: c.object_label(a.source),
                                target: c.object_label(a.target),
                                source_degree: c.degree[a.source],
                                target_degree: c.degree[a.target],
                            })
                            .collect(),
                        terminal: Some(c.object_label(c.terminal)),
                        simplicial_relations: c.simplicial_relations_hold(),
                        reedy: Some(reedy),
                    };
                    (body, Some(dot::ext_category_dot(&c)))
                }
                Err(Error::NotBounded) => (
                    PosetBody {
                        validation,
                        lengths,
                        objects: Vec::new(),
                        arrows: Vec::new(),
                        terminal: None,
                        simplicial_relations: false,
                        reedy: None,
                    },
                    None,
                ),
                Err(e) => return Err(e),
            };
            let pass = body.validation.bounded && body.simplicial_relations && body.reedy.as_ref().is_some_and(|r| r.direct);
            Ok((name.clone(), Body::PosetReport(body), Status::of(pass), dot))
        }
        Command::Validate { file } => {
            let input = read(file, cap)?;
            let name = input.name().to_string();
            match &input {
                Input::Poset { poset, .. } => {
                    let dot = dot::flow_dot(&CombFlow::from_poset(poset, cap));
                    let body = ValidateBody { poset: Some(poset.validate()), flow: None, summary: None };
                    Ok((name, Body::Validate(body), Status::Pass, Some(dot)))
                }
                Input::Flow { .. } => {
                    let x = input.to_flow(budget)?;
                    let report = x.validate()?;
                    let pass = report.loopless;
                    let body = ValidateBody { poset: None, flow: Some(report), summary: Some(FlowSummary::of(&x)) };
                    Ok((name, Body::Validate(body), Status::of(pass), Some(dot::flow_dot(&x))))
                }
            }
        }
        Command::Homology { file, degree } => {
            if let Some(d) = degree {
                if *d + 1 > cap {
                    return Err(Error::DegreeOutOfRange { degree: *d, max: cap - 1 });
                }
            }
            let input = read(file, cap)?;
            let keep = |groups: Vec<crate::homology::HomologyGroup>| -> Vec<(usize, crate::homology::HomologyGroup)> {
                groups.into_iter().enumerate().filter(|(n, _)| degree.is_none_or(|d| d == *n)).collect()
            };
            let mut spaces = Vec::new();
            let mut dot = None;
            match &input {
                Input::Poset { poset, .. } => {
                    let oc = poset.order_complex(cap);
                    spaces.push(SpaceHomology { space: "order complex".into(), groups: keep(homology_profile(&oc)) });
                }
                Input::Flow { .. } => {
                    let x = input.to_flow(budget)?;
                    for ((a, b), sp) in x.paths() {
                        spaces.push(SpaceHomology {
                            space: format!("P({},{})", x.state_name(a), x.state_name(b)),
                            groups: keep(homology_profile(sp)),
                        });
                    }
                    dot = Some(dot::flow_dot(&x));
                }
            }
            Ok((input.name().into(), Body::Homology(HomologyBody { cap, spaces }), Status::Pass, dot))
        }
        Command::Branch { file } | Command::Merge { file } => {
            let input = read(file, cap)?;
            let x = flow_of(&input, cap, budget)?;
            x.state_poset()?;
            let body = if matches!(cli.command, Command::Branch { .. }) {
                Body::Branch(branching_profile(&x, Direction::Minus))
            } else {
                Body::Merge(branching_profile(&x, Direction::Plus))
            };
            Ok((input.name().into(), body, Status::Pass, Some(dot::flow_dot(&x))))
        }
        Command::BallCheck { file } => {
            let input = read(file, cap)?;
            let x = flow_of(&input, cap, budget)?;
            let ball = x.ball_report();
            let branching = if ball.is_ball { Some(resultat1_check(&x)?) } else { None };
            let pass = ball.is_ball && branching.as_ref().is_some_and(|r| r.passes);
            let body = BallCheckBody { ball, branching_at_bottom: branching };
            Ok((input.name().into(), Body::BallCheck(body), Status::of(pass), Some(dot::flow_dot(&x))))
        }
        Command::Subdivide(args) => {
            let (input, x, edge, d) = load_instance(&args.flow, &args.edge, args.vertex.as_deref(), &args.ball, cap, budget)?;
            let s = t_subdivide(&x, edge, &d, budget)?;
            let y = &s.flow;
            let state_map = s.map.states.iter().enumerate().map(|(a, &b)| (x.state_name(a).to_string(), y.state_name(b).to_string())).collect();
            let new_states = (0..y.state_count()).filter(|t| !s.map.states.contains(t)).map(|t| y.state_name(t).to_string()).collect();
            let body = SubdivideBody {
                edge: (
                    x.state_name(edge.0).into(),
                    x.state_name(edge.1).into(),
                    x.path(edge.0, edge.1).unwrap().name(0, edge.2).into(),
                ),
                ball_vertex: s.ball_vertex.clone(),
                ball_vertex_choices: s.ball_vertex_choices,
                state_map,
                new_states,
                flow: FlowSummary::of(y),
            };
            Ok((input, Body::Subdivide(body), Status::Pass, Some(dot::flow_dot(y))))
        }
        Command::CheckInvariance(args) => {
            if let Some(count) = args.random {
                let out = invariance_suite(cli.seed, count, cap, budget, args.counterexamples.as_deref());
                let cases: Vec<InvarianceCase> = out
                    .cases
                    .iter()
                    .map(|c| InvarianceCase {
                        label: c.label.clone(),
                        report: match &c.outcome {
                            Ok(r) => r.clone(),
                            Err(e) => crate::dihomotopy::InvarianceReport {
                                comparisons: Vec::new(),
                                new_states: Vec::new(),
                                failures: vec![format!("error: {e}")],
                                pass: false,
                                contractibility: crate::flow::CONTRACTIBILITY_NOTE.into(),
                            },
                        },
                    })
                    .collect();
                let passed = cases.iter().filter(|c| c.report.pass).count();
                let failed = cases.len() - passed;
                let body = InvarianceBody {
                    cases,
                    passed,
                    failed,
                    counterexamples: out.counterexamples.iter().map(|p| p.display().to_string()).collect(),
                };
                return Ok((format!("random (seed {})", cli.seed), Body::CheckInvariance(body), Status::of(failed == 0), None));
            }
            let flow = args.flow.as_ref().expect("clap requires --flow or --random");
            let ball = args.ball.as_ref().expect("clap requires --ball with --flow");
            let (input, x, edge, d) = load_instance(flow, &args.edge, args.vertex.as_deref(), ball, cap, budget)?;
            let s = t_subdivide(&x, edge, &d, budget)?;
            let report = check_invariance(&x, &s.flow, &s.map)?;
            let pass = report.pass;
            let label = format!("{} -> {}", x.state_name(edge.0), x.state_name(edge.1));
            let body = InvarianceBody {
                cases: vec![InvarianceCase { label, report }],
                passed: usize::from(pass),
                failed: usize::from(!pass),
                counterexamples: Vec::new(),
            };
            Ok((input, Body::CheckInvariance(body), Status::of(pass), Some(dot::flow_dot(&s.flow))))
        }
        Command::LemmaProbe { file } => {
            let input = read(file, cap)?;
            let d = flow_of(&input, cap, budget)?;
            let report = lemma_probe(&d, budget)?;
            let pass = report.consistent;
            let dot = d.state_poset()?.ext_category().ok().map(|c| dot::ext_category_dot(&c));
            Ok((input.name().into(), Body::LemmaProbe(report), Status::of(pass), dot))
        }
    }
}

fn load_instance(
    flow: &Path,
    edge: &[String],
    vertex: Option<&str>,
    ball: &Path,
    cap: usize,
    budget: usize,
) -> Result<(String, CombFlow, (usize, usize, usize), CombFlow)> {
    let input = read(flow, cap)?;
    let x = input.to_flow(budget)?;
    let (a, b) = (x.require_state(&edge[0])?, x.require_state(&edge[1])?);
    let Some(sp) = x.path(a, b) else {
        return Err(Error::MalformedSubdivision(format!("no path from {} to {}", edge[0], edge[1])));
    };
    let v = match vertex {
        None => 0,
        Some(name) => (0..sp.len(0))
            .find(|&k| sp.name(0, k) == name || x.vertex_names(a, b)[k] == name)
            .ok_or_else(|| Error::MalformedSubdivision(format!("P({},{}) has no vertex `{name}`", edge[0], edge[1])))?,
    };
    let d = flow_of(&read(ball, cap)?, cap, budget)?;
    Ok((input.name().to_string(), x, (a, b, v), d))
}

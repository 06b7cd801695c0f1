//! `splice`: command-line front end to `splice-core`.
//!
//! Every command prints one JSON report `{"command", "status", "payload"}`
//! to standard output. Exit codes: 0 ok, 1 semantic refusal, 2 parse or
//! usage error, 3 infeasible input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use splice_core::diagram::{DiagramError, SpliceDiagram};
use splice_core::doc::{self, DocError, JsonRational};
use splice_core::endcurve::{self, EndCurveError};
use splice_core::fan::{self, Membership, MembershipError};
use splice_core::poly::WeightVector;
use splice_core::random::random_diagram;
use splice_core::recover::{self, RecoverError};
use splice_core::system::{self, SpliceSystem, SystemError};

#[derive(Parser)]
#[command(name = "splice", version, about = "Splice diagrams, splice fans and end-curves in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the edge determinant, semigroup and coprimality conditions.
    Check { diagram: PathBuf },
    /// Emit a splice type system (Vandermonde coefficients, or random ones with --seed).
    System {
        diagram: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit the splice fan with multiplicities.
    Fan { diagram: PathBuf },
    /// Decide membership of weight vectors in the local tropicalization.
    Member {
        /// Diagram or system document.
        input: PathBuf,
        /// Comma-separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        /// JSON array of weight vectors.
        #[arg(long, conflicts_with = "w")]
        queries: Option<PathBuf>,
    },
    /// Initial forms at a weight vector, and optionally the smoothness smoke test.
    Initial {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        /// Torus points per cell for the smoke test.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// End-curve, binomial form and parameterization for a root leaf.
    Endcurve {
        input: PathBuf,
        #[arg(long)]
        root: String,
    },
    /// Recover the coprime diagram of a fan document.
    Recover { fan: PathBuf },
    /// Check that recovery from the fan reproduces the diagram.
    Roundtrip { diagram: PathBuf },
    /// Generate a diagram satisfying the edge determinant and semigroup conditions.
    Random {
        #[arg(long)]
        leaves: usize,
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        coprime: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::System { .. } => "system",
            Command::Fan { .. } => "fan",
            Command::Member { .. } => "member",
            Command::Initial { .. } => "initial",
            Command::Endcurve { .. } => "endcurve",
            Command::Recover { .. } => "recover",
            Command::Roundtrip { .. } => "roundtrip",
            Command::Random { .. } => "random",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    Violation,
    Infeasible,
    Error,
}

impl Status {
    fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::Error => 2,
            Status::Infeasible => 3,
        }
    }
}

#[derive(Serialize)]
struct CommandReport {
    command: &'static str,
    status: Status,
    payload: Value,
}

struct Failure {
    status: Status,
    message: String,
}

impl Failure {
    fn new(status: Status, message: impl ToString) -> Self {
        Failure { status, message: message.to_string() }
    }
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        match e {
            DocError::Json(_) | DocError::Shape(_) => Failure::new(Status::Error, e),
            DocError::Diagram(_) => Failure::new(Status::Violation, e),
            DocError::System(s) => s.into(),
        }
    }
}

impl From<SystemError> for Failure {
    fn from(e: SystemError) -> Self {
        match e {
            SystemError::SemigroupFailure { .. } => Failure::new(Status::Infeasible, e),
            _ => Failure::new(Status::Violation, e),
        }
    }
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Self {
        match e {
            DiagramError::GenerationExhausted(_) => Failure::new(Status::Infeasible, e),
            _ => Failure::new(Status::Violation, e),
        }
    }
}

impl From<MembershipError> for Failure {
    fn from(e: MembershipError) -> Self {
        match e {
            MembershipError::Inconsistent => Failure::new(Status::Error, e),
            _ => Failure::new(Status::Violation, e),
        }
    }
}

impl From<EndCurveError> for Failure {
    fn from(e: EndCurveError) -> Self {
        Failure::new(Status::Violation, e)
    }
}

impl From<RecoverError> for Failure {
    fn from(e: RecoverError) -> Self {
        Failure::new(Status::Violation, e)
    }
}

impl From<fan::FanError> for Failure {
    fn from(e: fan::FanError) -> Self {
        Failure::new(Status::Violation, e)
    }
}

type Outcome = Result<(Status, Value), Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(Status::Error, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::new(Status::Error, format!("malformed JSON: {e}")))
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| DocError::from(e).into())
}

fn is_system_doc(v: &Value) -> bool {
    v.get("equations").is_some()
}

/// A diagram document, or the diagram inside a system document.
fn load_diagram(path: &Path) -> Result<SpliceDiagram, Failure> {
    let v = read_json(path)?;
    let spec: doc::DiagramDoc = if is_system_doc(&v) {
        from_value::<doc::SystemDoc>(v)?.diagram
    } else {
        from_value(v)?
    };
    Ok(doc::diagram_from_doc(&spec)?)
}

/// A system document as given, or the minimal system of a diagram document.
fn load_system(path: &Path) -> Result<SpliceSystem, Failure> {
    let v = read_json(path)?;
    if is_system_doc(&v) {
        Ok(doc::system_from_doc(&from_value(v)?, true)?)
    } else {
        let d = doc::diagram_from_doc(&from_value(v)?)?;
        Ok(system::minimal_system(&d)?)
    }
}

fn parse_w(text: &str) -> Result<WeightVector, Failure> {
    text.parse().map_err(|e| Failure::new(Status::Error, format!("--w: {e}")))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("documents serialize")
}

fn membership_doc(
    sys: &SpliceSystem,
    f: &fan::SpliceFan,
    w: &WeightVector,
) -> Result<doc::MembershipDoc, MembershipError> {
    let w_doc = w.entries().iter().cloned().map(JsonRational).collect();
    Ok(match fan::membership::membership_in(sys, f, w)? {
        Membership::In(cell) => {
            doc::MembershipDoc { w: w_doc, member: true, cell: Some(doc::cell_doc(f, &cell)), certificate: None }
        }
        Membership::Out(c) => doc::MembershipDoc {
            w: w_doc,
            member: false,
            cell: None,
            certificate: Some(doc::certificate_doc(sys.diagram(), &c)),
        },
    })
}

fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::Check { diagram } => {
            let d = load_diagram(diagram)?;
            let r = d.check_conditions();
            let status = if r.admissible() && r.coprime { Status::Ok } else { Status::Violation };
            Ok((status, to_value(&r)))
        }
        Command::System { diagram, seed } => {
            let d = load_diagram(diagram)?;
            let s = match seed {
                Some(seed) => system::random_system(&d, *seed)?,
                None => system::minimal_system(&d)?,
            };
            Ok((Status::Ok, to_value(&doc::system_doc(&s))))
        }
        Command::Fan { diagram } => {
            let d = load_diagram(diagram)?;
            Ok((Status::Ok, to_value(&doc::fan_doc(&fan::splice_fan(&d)?))))
        }
        Command::Member { input, w, queries } => {
            let sys = load_system(input)?;
            let f = fan::splice_fan(sys.diagram())?;
            match (w, queries) {
                (Some(w), _) => Ok((Status::Ok, to_value(&membership_doc(&sys, &f, &parse_w(w)?)?))),
                (None, Some(path)) => {
                    let raw: Vec<Vec<JsonRational>> = from_value(read_json(path)?)?;
                    let ws = raw
                        .into_iter()
                        .map(|v| WeightVector::new(v.into_iter().map(|q| q.0).collect()))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| Failure::new(Status::Error, e))?;
                    let results = ws
                        .par_iter()
                        .map(|w| membership_doc(&sys, &f, w))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok((Status::Ok, json!({ "results": results })))
                }
                (None, None) => Err(Failure::new(Status::Error, "member needs --w or --queries")),
            }
        }
        Command::Initial { input, w, samples, seed } => {
            let sys = load_system(input)?;
            if w.is_none() && samples.is_none() {
                return Err(Failure::new(Status::Error, "initial needs --w or --samples"));
            }
            let mut payload = serde_json::Map::new();
            if let Some(w) = w {
                let w = parse_w(w)?;
                if w.len() != sys.n_vars() || !w.is_strictly_positive() {
                    return Err(Failure::new(Status::Violation, "weight vector must be strictly positive of length n"));
                }
                let ii = fan::initial_ideal_generators(&sys, &w);
                let gens: Vec<Vec<doc::TermDoc>> = ii.generators.iter().map(doc::terms_doc).collect();
                payload.insert("w".into(), to_value(&w.entries().iter().cloned().map(JsonRational).collect::<Vec<_>>()));
                payload.insert("generators".into(), to_value(&gens));
                payload.insert("monomial_free".into(), Value::Bool(ii.monomial_free));
            }
            if let Some(k) = samples {
                let r = fan::smoothness_smoke(&sys, *k, *seed).map_err(|e| Failure::new(Status::Violation, e))?;
                payload.insert(
                    "smoke".into(),
                    json!({ "cells": r.cells, "points": r.points, "min_ratio": format!("{:e}", r.min_ratio) }),
                );
            }
            Ok((Status::Ok, Value::Object(payload)))
        }
        Command::Endcurve { input, root } => {
            let sys = load_system(input)?;
            let d = sys.diagram();
            let rooted = endcurve::root(d, d.leaf(root)?)?;
            let ecs = endcurve::end_curve_system(&sys, &rooted);
            let bin = endcurve::binomial_reduce(&ecs, d)?;
            let curve = endcurve::parameterize(&ecs, &rooted)?;
            if !endcurve::verify_parameterization(&curve, &ecs) {
                return Err(Failure::new(Status::Violation, "parameterization failed verification"));
            }
            Ok((Status::Ok, to_value(&doc::end_curve_doc(d, &bin, &curve))))
        }
        Command::Recover { fan: path } => {
            let f = doc::fan_from_doc(&from_value(read_json(path)?)?)?;
            Ok((Status::Ok, to_value(&recover::recover(&f)?.to_spec())))
        }
        Command::Roundtrip { diagram } => {
            let d = load_diagram(diagram)?;
            let ok = recover::roundtrip(&d)?;
            Ok((if ok { Status::Ok } else { Status::Violation }, json!({ "isomorphic": ok })))
        }
        Command::Random { leaves, nodes, seed, coprime } => {
            let d = random_diagram(*leaves, *nodes, *seed, *coprime)?;
            Ok((Status::Ok, to_value(&d.to_spec())))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (status, payload) = match run(&cli.command) {
        Ok(x) => x,
        Err(f) => (f.status, json!({ "error": f.message })),
    };
    let report = CommandReport { command: cli.command.name(), status, payload };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // A closed pipe downstream is not an error of the command.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(status.exit_code())
}

//! `posmap` command line.
//!
//! Every subcommand writes exactly one JSON document to stdout. Exit codes:
//! 0 success, 1 internal inconsistency, 2 parse or usage error, 3 dimension
//! or representation error, 4 input is not a state, 5 absolute continuity
//! fails (the report is still written).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::entangle::{self, check_state, entanglement_operator, ppt_check, verify_identity};
use crate::error::Error;
use crate::io::{self, matrix_value, vector_value, MatrixFile, ReadError};
use crate::matcore::{BipartiteOperator, CMatrix, Factor};
use crate::positivity::{classify, ClassifyOptions, SearchParams};
use crate::qmaps::{QMap, TensorElement};
use crate::random;
use crate::rn;
use crate::tensornorms::{
    all_norms, alpha_norm, duality_gap_report, epsilon_norm, pi_norm, AlphaParams, LowerWitness,
    NormEstimate, NormParams, PiParams, UpperWitness,
};
use crate::verdict::{Status, Verdict, Witness};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_NOT_STATE: i32 = 4;
pub const EXIT_NOT_CAC: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "posmap", version, about = "Positive maps, tensor norms and entanglement checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Positivity hierarchy of a linear map.
    ClassifyMap(ClassifyArgs),
    /// PPT test and entangling maps of a bipartite state.
    AnalyzeState(StateArgs),
    /// Projective, injective and α norm intervals.
    Norms(NormsArgs),
    /// Absolute continuity and Radon-Nikodym derivative of two CP maps.
    Rn(RnArgs),
    /// Seeded random instance as a matrix file.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rep {
    Kraus,
    Choi,
    Superop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Pi,
    Epsilon,
    Alpha,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    State,
    Separable,
    Cpmap,
    Werner,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "choi")]
    pub rep: Rep,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = crate::positivity::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, env = "POSMAP_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, env = "POSMAP_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub which: Which,
    #[arg(long)]
    pub rmax: Option<usize>,
    #[arg(long, env = "POSMAP_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RnArgs {
    #[arg(long)]
    pub phi: PathBuf,
    #[arg(long)]
    pub psi: PathBuf,
    #[arg(long, default_value_t = rn::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, env = "POSMAP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Factor dimensions `a,b`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    /// Werner mixing parameter.
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of product terms (separable) or Kraus operators (cpmap).
    #[arg(long)]
    pub n: Option<usize>,
}

/// Machine-readable result of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub verdicts: Vec<Verdict>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub details: Value,
    pub runtime_ms: u64,
}

/// What `main` prints and returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Option<String>,
    pub stderr: Option<String>,
}

impl Outcome {
    fn failure(code: i32, msg: impl Into<String>) -> Self {
        Self {
            code,
            stdout: None,
            stderr: Some(msg.into()),
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotAState(_) => EXIT_NOT_STATE,
            Error::DimensionMismatch(_)
            | Error::NotHermitian { .. }
            | Error::NotPsd { .. }
            | Error::NotCp { .. }
            | Error::InvalidSelector(_) => EXIT_DIMENSION,
            Error::InvalidArgument(_) => EXIT_PARSE,
            Error::NotAbsolutelyContinuous { .. } => EXIT_NOT_CAC,
            Error::RouteDisagreement(_) => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::Parse(msg) => Failure {
                code: EXIT_PARSE,
                message: format!("parse error: {msg}"),
            },
            ReadError::Shape(e) => e.into(),
        }
    }
}

type Run = std::result::Result<(ReportOrMatrix, i32), Failure>;

enum ReportOrMatrix {
    Report {
        verdicts: Vec<Verdict>,
        tolerances: BTreeMap<String, f64>,
        seed: u64,
        details: Value,
    },
    Matrix(MatrixFile),
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let result: Run = match &cli.command {
        Command::ClassifyMap(a) => classify_map(a),
        Command::AnalyzeState(a) => analyze_state(a),
        Command::Norms(a) => norms(a),
        Command::Rn(a) => rn_cmd(a),
        Command::Gen(a) => gen(a).map(|m| (ReportOrMatrix::Matrix(m), EXIT_OK)),
    };
    match result {
        Err(f) => Outcome::failure(f.code, f.message),
        Ok((ReportOrMatrix::Matrix(m), code)) => Outcome {
            code,
            stdout: Some(io::to_json(&m)),
            stderr: None,
        },
        Ok((ReportOrMatrix::Report { verdicts, tolerances, seed, details }, code)) => {
            let report = ReportFile {
                verdicts,
                tolerances,
                seed,
                details,
                runtime_ms: start.elapsed().as_millis() as u64,
            };
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            Outcome {
                code,
                stdout: Some(text),
                stderr: (code == EXIT_NOT_CAC).then(|| "not completely absolutely continuous".to_string()),
            }
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.to_string();
            if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: Some(text),
                    stderr: None,
                }
            } else {
                Outcome::failure(code, text.lines().next().unwrap_or("usage error").to_string())
            }
        }
    }
}

fn tolerances(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn read_text(path: &PathBuf) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn read_map(path: &PathBuf, rep: Rep) -> std::result::Result<QMap, Failure> {
    let text = read_text(path)?;
    Ok(match rep {
        Rep::Kraus => {
            let kraus = io::parse_matrix_list(&text)?;
            let first = kraus.first().ok_or_else(|| Failure {
                code: EXIT_PARSE,
                message: "empty Kraus list".into(),
            })?;
            let (dout, din) = (first.rows(), first.cols());
            QMap::from_kraus(din, dout, kraus)?
        }
        Rep::Choi => {
            let c = io::parse_matrix_file(&text)?.to_bipartite()?;
            crate::matcore::check_hermitian(c.mat())?;
            QMap::from_choi(c)
        }
        Rep::Superop => QMap::from_superop(io::parse_matrix_file(&text)?.to_matrix()?)?,
    })
}

fn classify_map(a: &ClassifyArgs) -> Run {
    let map = read_map(&a.input, a.rep)?;
    let c = map.choi().map_mat(|m| m.clone());
    crate::matcore::check_hermitian(c.mat())?;
    let mut opts = ClassifyOptions {
        tol: a.tol,
        search: SearchParams {
            restarts: a.restarts,
            seed: a.seed,
            ..SearchParams::default()
        },
        max_k: a.k,
        ..ClassifyOptions::default()
    };
    opts.membership.bp_tol = a.tol;
    opts.membership.alpha.seed = a.seed;
    let kmax = c.d1().min(c.d2());
    if a.k == 0 || a.k > kmax {
        return Err(Failure {
            code: EXIT_PARSE,
            message: format!("--k must lie in 1..={kmax}"),
        });
    }
    let report = classify(&c, &opts)?;
    let membership = report.d0.as_ref().map(|m| {
        json!({
            "alpha_lower": m.alpha.lower,
            "alpha_upper": m.alpha.upper,
            "trace": m.trace,
            "trace_bound_holds": m.trace_bound_holds,
            "hermitian_deviation": m.hermitian_deviation,
        })
    });
    let details = json!({
        "din": map.din(),
        "dout": map.dout(),
        "restarts": a.restarts,
        "unital": map.unitality().holds,
        "trace_preserving": map.trace_preserving().holds,
        "membership": membership,
    });
    Ok((
        ReportOrMatrix::Report {
            verdicts: report.verdicts,
            tolerances: tolerances(&[
                ("tol", opts.tol),
                ("alpha_tol", opts.membership.alpha_tol),
                ("trace_tol", opts.membership.trace_tol),
                ("decompose_tol", opts.decompose_tol),
            ]),
            seed: a.seed,
            details,
        },
        EXIT_OK,
    ))
}

fn read_state(path: &PathBuf) -> std::result::Result<BipartiteOperator, Failure> {
    let f = io::parse_matrix_file(&read_text(path)?)?;
    if f.dims().is_none() {
        return Err(Error::DimensionMismatch("state files need d1 and d2".into()).into());
    }
    Ok(f.to_bipartite()?)
}

const IDENTITY_TOL: f64 = 1e-9;

fn analyze_state(a: &StateArgs) -> Run {
    let rho = read_state(&a.input)?;
    check_state(&rho, a.tol.max(entangle::DEFAULT_EIG_TOL))?;
    let ppt = ppt_check(&rho, a.tol)?;
    let e = entanglement_operator(&rho, None, entangle::DEFAULT_EIG_TOL)?;
    let ident = verify_identity(&e, a.samples, a.seed)?;
    let hh = &e.matrix().adjoint() * e.matrix();
    let norm_dev = (hh.trace() - rho.trace()).norm();

    let mut verdicts = Vec::new();
    let ppt_verdict = if ppt.ppt {
        Verdict::new("ppt", Status::CertifiedYes, ppt.route_a_min_eig)
    } else {
        let pt = rho.partial_transpose(Factor::Second);
        let eig = crate::matcore::herm_eig(&pt.mat().hermitian_part())?;
        Verdict::new("ppt", Status::CertifiedNo, ppt.route_a_min_eig)
            .with_witness(Witness::Eigenvector(eig.lowest_vector()))
    };
    verdicts.push(ppt_verdict);
    verdicts.push(residual_verdict("state-reconstruction-identity", ident.max_residual(), IDENTITY_TOL));
    verdicts.push(residual_verdict("entanglement-operator-normalization", norm_dev, IDENTITY_TOL));

    let details = json!({
        "d1": rho.d1(),
        "d2": rho.d2(),
        "route_a_min_eig": ppt.route_a_min_eig,
        "route_b_cp_min_eig": ppt.route_b_cp.value,
        "route_b_co_cp_min_eig": ppt.route_b_co_cp.value,
        "routes_agree": ppt.route_a == ppt.route_b,
        "identity": ident,
        "operator_rank": e.rank(),
        "reduced_first": matrix_value(&rho.partial_trace(Factor::Second), None),
        "reduced_second": matrix_value(&rho.partial_trace(Factor::First), None),
    });
    Ok((
        ReportOrMatrix::Report {
            verdicts,
            tolerances: tolerances(&[
                ("tol", a.tol),
                ("identity_tol", IDENTITY_TOL),
                ("eig_tol", entangle::DEFAULT_EIG_TOL),
            ]),
            seed: a.seed,
            details,
        },
        EXIT_OK,
    ))
}

fn residual_verdict(name: &str, value: f64, tol: f64) -> Verdict {
    if value <= tol {
        Verdict::new(name, Status::CertifiedYes, value)
    } else {
        Verdict::new(name, Status::CertifiedNo, value).with_witness(Witness::Residual { value, tolerance: tol })
    }
}

fn interval_verdict(name: &str, e: &NormEstimate) -> Verdict {
    Verdict::new(name, Status::CertifiedYes, e.midpoint()).with_witness(Witness::Interval {
        lower: e.lower,
        upper: e.upper,
    })
}

fn lower_witness_value(w: &LowerWitness) -> Value {
    match w {
        LowerWitness::Zero => json!({"kind": "zero"}),
        LowerWitness::RankOne { a, b, v } => json!({
            "kind": "rank-one-functional",
            "a": vector_value(a),
            "b": vector_value(b),
            "v": matrix_value(v, None),
        }),
        LowerWitness::Sandwich { a, b, transposed } => json!({
            "kind": "sandwich-functional",
            "a": matrix_value(a, None),
            "b": matrix_value(b, None),
            "transposed": transposed,
        }),
        LowerWitness::SliceVectors { c, d } => json!({
            "kind": "slice-vectors",
            "c": vector_value(c),
            "d": vector_value(d),
        }),
    }
}

fn upper_witness_value(w: &UpperWitness) -> Value {
    match w {
        UpperWitness::Zero => json!({"kind": "zero"}),
        UpperWitness::Decomposition(t) => json!({
            "kind": "decomposition",
            "terms": t.terms().iter().map(|(x, y)| json!([matrix_value(x, None), matrix_value(y, None)])).collect::<Vec<_>>(),
        }),
        UpperWitness::BlockBound => json!({"kind": "block-bound"}),
        UpperWitness::TraceNorm => json!({"kind": "trace-norm"}),
        UpperWitness::Cells(n) => json!({"kind": "branch-and-bound", "cells": n}),
    }
}

fn estimate_value(e: &NormEstimate) -> Value {
    json!({
        "lower": e.lower,
        "upper": e.upper,
        "iterations": e.iterations,
        "lower_witness": lower_witness_value(&e.lower_witness),
        "upper_witness": upper_witness_value(&e.upper_witness),
    })
}

fn norms(a: &NormsArgs) -> Run {
    let f = io::parse_matrix_file(&read_text(&a.input)?)?;
    let u = f.to_bipartite()?;
    if a.rmax == Some(0) {
        return Err(Error::InvalidArgument("--rmax must be at least 1".into()).into());
    }
    let t = TensorElement::from_operator(&u);
    let params = NormParams {
        seed: a.seed,
        ..NormParams::default()
    };
    let pi_params = PiParams {
        r_max: a.rmax,
        seed: a.seed,
        ..PiParams::default()
    };
    let alpha_params = AlphaParams {
        seed: a.seed,
        ..AlphaParams::default()
    };
    let mut verdicts = Vec::new();
    let mut details = serde_json::Map::new();
    details.insert("d1".into(), json!(u.d1()));
    details.insert("d2".into(), json!(u.d2()));
    let square = u.d1() == u.d2();

    let (eps, pi) = match a.which {
        Which::All => {
            let (e, p) = all_norms(&t, &params, &pi_params)?;
            (Some(e), Some(p))
        }
        Which::Pi => (None, Some(pi_norm(&t, &pi_params)?)),
        Which::Epsilon => (Some(epsilon_norm(&t, &params)?), None),
        Which::Alpha => (None, None),
    };
    if let Some(p) = &pi {
        verdicts.push(interval_verdict("pi-norm", p));
        details.insert("pi".into(), estimate_value(p));
    }
    if let Some(e) = &eps {
        verdicts.push(interval_verdict("epsilon-norm", e));
        details.insert("epsilon".into(), estimate_value(e));
    }
    if matches!(a.which, Which::Alpha) || (matches!(a.which, Which::All) && square) {
        let alpha = alpha_norm(&u, &alpha_params)?;
        verdicts.push(interval_verdict("alpha-norm", &alpha));
        details.insert("alpha".into(), estimate_value(&alpha));
    }
    if matches!(a.which, Which::All) && square {
        let r = duality_gap_report(&u, &t, &alpha_params, &pi_params)?;
        let check = |name: &str, ok: bool, v: f64| {
            Verdict::new(name, if ok { Status::CertifiedYes } else { Status::CertifiedNo }, v)
        };
        verdicts.push(check("duality-pairing-bound", r.pairing_bound, r.pairing));
        verdicts.push(check("duality-trace-lower-bound", r.trace_lower_bound, r.alpha.lower));
        verdicts.push(check("duality-trace-upper-bound", r.trace_upper_bound, u.trace().re));
        details.insert(
            "duality".into(),
            json!({
                "pairing": r.pairing,
                "alpha_upper": r.alpha.upper,
                "pi_upper": r.pi.upper,
                "pairing_bound": r.pairing_bound,
                "trace_lower_bound": r.trace_lower_bound,
                "trace_upper_bound": r.trace_upper_bound,
            }),
        );
    }
    Ok((
        ReportOrMatrix::Report {
            verdicts,
            tolerances: tolerances(&[("alpha_target_gap", alpha_params.target_gap), ("duality_tol", 1e-6)]),
            seed: a.seed,
            details: Value::Object(details),
        },
        EXIT_OK,
    ))
}

fn rn_cmd(a: &RnArgs) -> Run {
    let phi = read_map(&a.phi, Rep::Choi)?;
    let psi = read_map(&a.psi, Rep::Choi)?;
    let cac = rn::cac_test(&phi, &psi, a.tol)?;
    let tols = tolerances(&[("tol", a.tol)]);
    if cac.status != Status::CertifiedYes {
        return Ok((
            ReportOrMatrix::Report {
                verdicts: vec![cac],
                tolerances: tols,
                seed: 0,
                details: json!({"derivative": null}),
            },
            EXIT_NOT_CAC,
        ));
    }
    let r = rn::rn_derivative(&phi, &psi, a.tol)?;
    let dims = Some((phi.din(), phi.dout()));
    let details = json!({
        "derivative": matrix_value(&r.d, dims),
        "support_rank": r.support_rank,
        "reconstruction_residual": r.reconstruction_residual,
        "domination_bound": crate::matcore::operator_norm(&r.d),
    });
    Ok((
        ReportOrMatrix::Report {
            verdicts: vec![cac],
            tolerances: tols,
            seed: 0,
            details,
        },
        EXIT_OK,
    ))
}

fn gen(a: &GenArgs) -> std::result::Result<MatrixFile, Failure> {
    let [d1, d2] = a.dims[..] else {
        return Err(Failure {
            code: EXIT_PARSE,
            message: "--dims takes two values a,b".into(),
        });
    };
    let b = match a.kind {
        Kind::State => random::make_random_state(a.seed, d1, d2)?,
        Kind::Separable => random::make_separable(a.seed, a.n.unwrap_or(5), d1, d2)?,
        Kind::Cpmap => {
            let mut rng = random::rng(a.seed);
            random::random_cp_map(&mut rng, d1, d2, a.n.unwrap_or(2)).choi_of()
        }
        Kind::Werner => {
            if d1 != d2 {
                return Err(Error::DimensionMismatch("Werner states need equal dims".into()).into());
            }
            let p = a.p.ok_or_else(|| Failure {
                code: EXIT_PARSE,
                message: "--p is required for Werner states".into(),
            })?;
            random::werner(d1, p)?
        }
    };
    Ok(MatrixFile::from_bipartite(&b))
}

/// Matrix file for an operator with factor dimensions.
pub fn matrix_file(m: &CMatrix, d1: usize, d2: usize) -> MatrixFile {
    MatrixFile::from_matrix(m, Some((d1, d2)))
}

//! Argument parsing and command dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use ultradiff_core::bounds::{
    majorant_derivatives, rai_witness, BoundCertificate, CertKind, MajorantSpec, Shift,
};
use ultradiff_core::fdb::{check_fdb_property, m_circ_dp, n_beta_coefficients};
use ultradiff_core::jet::{ode_solve, reciprocal_via_ode, BivariateField};
use ultradiff_core::matrix::{
    build_remark2, check_matrix_condition, verify_lemma1, Implication, MatrixCondition, Remark2Kind,
    WeightMatrix,
};
use ultradiff_core::numeric::rational;
use ultradiff_core::seq::appendix_a::vertex_index;
use ultradiff_core::seq::{
    check_almost_increasing, check_almost_increasing_with_witness, check_growth, check_weakly_log_convex,
    compare_inclusion, GrowthCondition, Relation,
};
use ultradiff_core::weight_fn::{check_omega_conditions, check_subadditive, check_thm3_condition, WeightFunction};
use ultradiff_core::{Scalar, Status, Verdict, WeightSequence};

use crate::config::{Format, Mode, RaiReadingArg, RunConfig};
use crate::error::{CliError, EXIT_ESTIMATE, EXIT_HOLDS, EXIT_REFUTED};
use crate::formats::{
    num, read_json, verdict_json, write_text, AnyJet, JetFile, MatrixFile,
    SequenceFile, WeightFunctionFile,
};
use crate::pipelines::{
    crosscheck_pipeline, inverse_bound_pipeline, lemma4_pipeline, neumann_bound_pipeline,
    ode_bound_pipeline, omega_matrix_pipeline, remark2_pipeline, Lemma4Inputs, OdeClass, PipelineOutcome,
};
use crate::report::{cell, Report, Table};
use crate::suite::{determinism, run_suite};

#[derive(Debug, Parser)]
#[command(name = "ultradiff", version, about = "Decide stability conditions of ultradifferentiable weights")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Truncation order.
    #[arg(long = "K", global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub dp_cap: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Report path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Config file; overrides the environment variable and the default path.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Closed-form vertex depth for far checkpoints (0 disables).
    #[arg(long, global = true)]
    pub far_vertices: Option<u32>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub rai_reading: Option<RaiReadingArg>,
    /// Directory for constructed objects (defaults to the report's directory).
    #[arg(long, global = true)]
    pub artifacts: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight sequences.
    #[command(subcommand)]
    Seq(SeqCmd),
    /// Composition maximum and the Faà di Bruno property.
    #[command(subcommand)]
    Fdb(FdbCmd),
    /// Weight functions.
    #[command(subcommand)]
    Omega(OmegaCmd),
    /// Weight matrices.
    #[command(subcommand)]
    Matrix(MatrixCmd),
    /// Majorants and constants.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Exact jet arithmetic.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// End-to-end constructions.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeqFamily {
    Gevrey,
    AppendixA,
    Sawtooth,
    Ones,
}

#[derive(Debug, Args)]
pub struct SeqSource {
    #[arg(long, value_enum, conflicts_with = "file")]
    pub family: Option<SeqFamily>,
    /// Gevrey exponent.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Sequence JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeqCheck {
    WeaklyLogConvex,
    DerivationClosed,
    LiminfRootPositive,
    RootToInfinity,
    AlmostIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelationArg {
    Preceq,
    Triangle,
}

#[derive(Debug, Subcommand)]
pub enum SeqCmd {
    /// Decide one condition.
    Check {
        #[command(flatten)]
        source: SeqSource,
        #[arg(long, value_enum)]
        check: SeqCheck,
        /// Also test the closed-form vertex pair (k_4, k_5).
        #[arg(long)]
        sparse_witness: bool,
    },
    /// Inclusion between two sequence files.
    Compare {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum, default_value = "preceq")]
        relation: RelationArg,
    },
    /// Write a built-in family as a sequence file.
    Export {
        #[command(flatten)]
        source: SeqSource,
    },
}

#[derive(Debug, Subcommand)]
pub enum FdbCmd {
    /// `M°` and its statistic as CSV.
    Mcirc {
        #[command(flatten)]
        source: SeqSource,
    },
    Check {
        #[command(flatten)]
        source: SeqSource,
    },
    /// Coefficients `N(beta)` for one `k`.
    Nbeta {
        #[arg(long = "k", id = "nbeta_k")]
        k: usize,
    },
}

#[derive(Debug, Args)]
pub struct OmegaSource {
    /// Power weight exponent.
    #[arg(long, conflicts_with = "file")]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 16.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 4000)]
    pub knots: usize,
    /// Weight function JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum OmegaCmd {
    /// Standing conditions and the composition condition.
    Check {
        #[command(flatten)]
        source: OmegaSource,
    },
    /// Conjugate knots as CSV.
    Conjugate {
        #[command(flatten)]
        source: OmegaSource,
    },
    Subadditive {
        #[command(flatten)]
        source: OmegaSource,
        #[arg(long, default_value_t = 1.0)]
        lo: f64,
        #[arg(long, default_value_t = 1e6)]
        hi: f64,
    },
}

#[derive(Debug, Args)]
pub struct MatrixSource {
    #[arg(long, conflicts_with = "remark2")]
    pub file: Option<PathBuf>,
    /// Built-in asymmetric matrix: kind1 or kind2.
    #[arg(long)]
    pub remark2: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum MatrixCmd {
    Check {
        #[command(flatten)]
        source: MatrixSource,
        /// H, Comega_B, Comega_R, dc_R, dc_B, rai_R, rai_B, FdB_R or FdB_B.
        #[arg(long)]
        cond: String,
    },
    /// Check the implications between rai, dc and FdB.
    Lemma1 {
        #[command(flatten)]
        source: MatrixSource,
    },
    BuildRemark2 {
        #[arg(long)]
        kind: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum BoundsCmd {
    /// Derivatives of the majorant pair at 0.
    Majorant {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 20)]
        j: usize,
    },
    /// Roumieu row witness and its constant.
    RaiWitness {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, default_value_t = 0)]
        lambda: usize,
        #[arg(long)]
        shifted: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    Compose {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    Inverse {
        #[arg(long)]
        f: PathBuf,
    },
    Reciprocal {
        #[arg(long)]
        f: PathBuf,
    },
    /// Taylor jet of the solution of `x' = x^2`, `x(0) = 1`.
    OdeXsq,
    /// Pareto front of `(rho, ln C)` for a jet against a sequence.
    Profile {
        #[arg(long)]
        f: PathBuf,
        #[command(flatten)]
        source: SeqSource,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        rhos: Vec<f64>,
    },
    /// Run the acceptance battery.
    Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Field {
    Xsq,
}

#[derive(Debug, Subcommand)]
pub enum PipelineCmd {
    OmegaMatrix {
        #[arg(long, default_value = "power")]
        family: String,
        #[command(flatten)]
        source: OmegaSource,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        rhos: Vec<f64>,
    },
    Remark2 {
        #[arg(long)]
        kind: String,
    },
    OdeBound {
        #[arg(long, value_enum, default_value = "xsq")]
        field: Field,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, value_enum, default_value = "roumieu")]
        class: OdeClass,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    InverseBound,
    NeumannBound {
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        ac: f64,
    },
    Lemma4 {
        /// Gevrey rows of exponents 1, 1, 1 and `L_k = 1`.
        #[arg(long)]
        demo: bool,
        #[arg(long, value_delimiter = ',', num_args = 3)]
        s: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_delimiter = ',')]
        zeros: Vec<usize>,
    },
    OracleCrosscheck {
        /// function, ode_field, inverse or reciprocal.
        #[arg(long, default_value = "function")]
        kind: String,
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        shifted: bool,
        #[command(flatten)]
        source: SeqSource,
        #[arg(long)]
        jet: PathBuf,
    },
}

struct Output {
    report: Report,
    artifacts: Vec<(String, String)>,
}

fn status_code(s: Status) -> i32 {
    match s {
        Status::HoldsUpTo => EXIT_HOLDS,
        Status::Refuted => EXIT_REFUTED,
        Status::Estimate => EXIT_ESTIMATE,
    }
}

fn verdict_report(command: &str, run: &RunConfig, v: &Verdict, extra: Value) -> Output {
    let mut t = Table::new("track", &["k", "stat"]);
    for c in &v.checkpoints {
        t.push(vec![crate::formats::index_str(c.index), cell(c.stat)]);
    }
    let mut body = verdict_json(v);
    if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
        b.extend(e);
    }
    Output {
        report: Report {
            command: command.into(),
            config: run.clone(),
            status: v.status.as_str().into(),
            exit_code: status_code(v.status),
            body,
            table: Some(t),
        },
        artifacts: Vec::new(),
    }
}

fn pass_report(command: &str, run: &RunConfig, pass: bool, body: Value, table: Option<Table>) -> Report {
    Report {
        command: command.into(),
        config: run.clone(),
        status: if pass { "PASS" } else { "FAIL" }.into(),
        exit_code: if pass { EXIT_HOLDS } else { EXIT_REFUTED },
        body,
        table,
    }
}

fn pipeline_output(command: &str, run: &RunConfig, out: PipelineOutcome) -> Output {
    Output {
        report: pass_report(command, run, out.pass, out.body, out.table),
        artifacts: out.artifacts,
    }
}

fn info_output(command: &str, run: &RunConfig, body: Value, table: Option<Table>) -> Output {
    Output {
        report: Report {
            command: command.into(),
            config: run.clone(),
            status: "OK".into(),
            exit_code: EXIT_HOLDS,
            body,
            table,
        },
        artifacts: Vec::new(),
    }
}

fn load_sequence(src: &SeqSource, k: usize) -> Result<WeightSequence, CliError> {
    match (&src.file, src.family) {
        (Some(p), _) => read_json::<SequenceFile>(p)?.to_sequence(),
        (None, Some(f)) => Ok(match f {
            SeqFamily::Gevrey => WeightSequence::gevrey(src.s, k)?,
            SeqFamily::AppendixA => WeightSequence::appendix_a(k)?,
            SeqFamily::Sawtooth => WeightSequence::sawtooth(k)?,
            SeqFamily::Ones => WeightSequence::constant_one(k),
        }),
        (None, None) => Err(CliError::Usage("give --family or --file".into())),
    }
}

fn load_weight_function(src: &OmegaSource) -> Result<WeightFunction, CliError> {
    match (&src.file, src.s) {
        (Some(p), _) => read_json::<WeightFunctionFile>(p)?.to_weight_function(),
        (None, Some(s)) => Ok(WeightFunction::power(s, src.t_max, src.knots)?),
        (None, None) => Err(CliError::Usage("give --s (power weight) or --file".into())),
    }
}

fn parse_kind(s: &str) -> Result<Remark2Kind, CliError> {
    Remark2Kind::parse(s).ok_or_else(|| CliError::Usage(format!("unknown matrix kind `{s}` (kind1 or kind2)")))
}

fn load_matrix(src: &MatrixSource, run: &RunConfig) -> Result<WeightMatrix, CliError> {
    match (&src.file, &src.remark2) {
        (Some(p), _) => read_json::<MatrixFile>(p)?.to_matrix(),
        (None, Some(kind)) => Ok(build_remark2(parse_kind(kind)?, run.truncation)?.matrix),
        (None, None) => Err(CliError::Usage("give --file or --remark2".into())),
    }
}

fn load_jet(path: &Path) -> Result<AnyJet, CliError> {
    read_json::<JetFile>(path)?.to_jet()
}

fn jet_output(command: &str, run: &RunConfig, jet: AnyJet) -> Output {
    let file = jet.to_file();
    let body = serde_json::to_value(&file).expect("jet serializes");
    let mut t = Table::new("jet", &["k", "log_abs_coefficient"]);
    let logs: Vec<f64> = match &jet {
        AnyJet::Exact(j) => j.coefficients().iter().map(Scalar::ln_abs).collect(),
        AnyJet::Float(j) => j.coefficients().iter().map(Scalar::ln_abs).collect(),
    };
    for (k, l) in logs.into_iter().enumerate() {
        t.push(vec![k.to_string(), cell(l)]);
    }
    info_output(command, run, body, Some(t))
}

fn implication_json(i: &Implication) -> Value {
    json!({
        "premises": i.premises.iter().map(|(c, s)| json!({"condition": c.name(), "status": s.as_str()})).collect::<Vec<_>>(),
        "conclusion": {"condition": i.conclusion.0.name(), "status": i.conclusion.1.as_str()},
        "outcome": i.outcome.as_str(),
        "witness_lambda": i.witness_lambda,
    })
}

fn run_seq(cmd: &SeqCmd, run: &RunConfig) -> Result<Output, CliError> {
    let cfg = run.check_config();
    match cmd {
        SeqCmd::Check { source, check, sparse_witness } => {
            let w = load_sequence(source, run.truncation)?;
            let v = match check {
                SeqCheck::WeaklyLogConvex => check_weakly_log_convex(&w, &cfg)?,
                SeqCheck::DerivationClosed => check_growth(&w, GrowthCondition::DerivationClosed, &cfg)?,
                SeqCheck::LiminfRootPositive => check_growth(&w, GrowthCondition::LiminfRootPositive, &cfg)?,
                SeqCheck::RootToInfinity => check_growth(&w, GrowthCondition::RootToInfinity, &cfg)?,
                SeqCheck::AlmostIncreasing if *sparse_witness => {
                    if w.sparse_form().is_none() {
                        return Err(CliError::Usage("--sparse-witness needs a closed-form sequence".into()));
                    }
                    check_almost_increasing_with_witness(&w, vertex_index(4), vertex_index(5), &cfg)?
                }
                SeqCheck::AlmostIncreasing => check_almost_increasing(&w, &cfg)?,
            };
            let name = check.to_possible_value().expect("named").get_name().to_string();
            Ok(verdict_report("seq check", run, &v, json!({"sequence": w.label(), "check": name})))
        }
        SeqCmd::Compare { left, right, relation } => {
            let m = read_json::<SequenceFile>(left)?.to_sequence()?;
            let n = read_json::<SequenceFile>(right)?.to_sequence()?;
            let rel = match relation {
                RelationArg::Preceq => Relation::Preceq,
                RelationArg::Triangle => Relation::Triangle,
            };
            let v = compare_inclusion(&m, &n, rel, &cfg)?;
            Ok(verdict_report("seq compare", run, &v, json!({"left": m.label(), "right": n.label()})))
        }
        SeqCmd::Export { source } => {
            let w = load_sequence(source, run.truncation)?;
            let body = serde_json::to_value(SequenceFile::from_sequence(&w)).expect("sequence serializes");
            Ok(info_output("seq export", run, body, None))
        }
    }
}

fn run_fdb(cmd: &FdbCmd, run: &RunConfig) -> Result<Output, CliError> {
    let cfg = run.check_config();
    match cmd {
        FdbCmd::Mcirc { source } => {
            let w = load_sequence(source, run.truncation)?;
            let k = run.truncation.min(w.truncation()).min(run.dp_cap);
            let table = m_circ_dp(&w, k, run.dp_cap)?;
            let terms = w.log_terms();
            let mut t = Table::new("mcirc", &["k", "log_Mk", "log_Mcirc_k", "stat"]);
            let mut sup = f64::NEG_INFINITY;
            for i in 1..=k {
                let s = (table.m_circ[i] - terms[i]) / i as f64;
                sup = sup.max(s);
                t.push(vec![i.to_string(), cell(terms[i]), cell(table.m_circ[i]), cell(sup)]);
            }
            let body = json!({"sequence": w.label(), "truncation": k, "sup_stat": num(sup)});
            Ok(info_output("fdb mcirc", run, body, Some(t)))
        }
        FdbCmd::Check { source } => {
            let w = load_sequence(source, run.truncation)?;
            let v = check_fdb_property(&w, &cfg)?;
            Ok(verdict_report("fdb check", run, &v, json!({"sequence": w.label()})))
        }
        FdbCmd::Nbeta { k } => {
            if *k > 12 {
                return Err(CliError::Usage("nbeta supports k <= 12".into()));
            }
            let coeffs = n_beta_coefficients(*k)?;
            let mut t = Table::new("nbeta", &["beta", "N"]);
            for (beta, n) in &coeffs {
                let b: Vec<String> = beta.iter().map(u32::to_string).collect();
                t.push(vec![b.join(" "), n.to_string()]);
            }
            let total: u64 = coeffs.values().sum();
            let body = json!({"k": k, "monomials": coeffs.len(), "sum": total});
            Ok(info_output("fdb nbeta", run, body, Some(t)))
        }
    }
}

fn run_omega(cmd: &OmegaCmd, run: &RunConfig) -> Result<Output, CliError> {
    let cfg = run.check_config();
    match cmd {
        OmegaCmd::Check { source } => {
            let w = load_weight_function(source)?;
            let conds = check_omega_conditions(&w, &cfg)?;
            let thm3 = check_thm3_condition(&w, &cfg)?;
            let mut entries: Vec<(&str, &Verdict)> = conds.entries().to_vec();
            entries.push(("composition", &thm3));
            let mut t = Table::new("omega_conditions", &["condition", "status", "log_constant"]);
            let mut worst = Status::HoldsUpTo;
            let mut body = serde_json::Map::new();
            for (name, v) in &entries {
                t.push(vec![name.to_string(), v.status.as_str().into(), cell(v.constant_estimate)]);
                body.insert(name.to_string(), verdict_json(v));
                worst = match (worst, v.status) {
                    (Status::Refuted, _) | (_, Status::Refuted) => Status::Refuted,
                    (Status::Estimate, _) | (_, Status::Estimate) => Status::Estimate,
                    _ => Status::HoldsUpTo,
                };
            }
            Ok(Output {
                report: Report {
                    command: "omega check".into(),
                    config: run.clone(),
                    status: worst.as_str().into(),
                    exit_code: status_code(worst),
                    body: Value::Object(body),
                    table: Some(t),
                },
                artifacts: Vec::new(),
            })
        }
        OmegaCmd::Conjugate { source } => {
            let w = load_weight_function(source)?;
            let conj = w.conjugate()?;
            let mut t = Table::new("conjugate", &["u", "phi_star"]);
            for (u, y) in conj.knots() {
                t.push(vec![cell(*u), cell(*y)]);
            }
            let body = json!({"knots": conj.knots().len(), "horizon": num(*conj.horizon())});
            Ok(info_output("omega conjugate", run, body, Some(t)))
        }
        OmegaCmd::Subadditive { source, lo, hi } => {
            let w = load_weight_function(source)?;
            let v = check_subadditive(|x| w.omega(x), *lo, *hi)?;
            Ok(verdict_report("omega subadditive", run, &v, json!({})))
        }
    }
}

fn run_matrix(cmd: &MatrixCmd, run: &RunConfig) -> Result<Output, CliError> {
    let cfg = run.check_config();
    match cmd {
        MatrixCmd::Check { source, cond } => {
            let m = load_matrix(source, run)?;
            let c = MatrixCondition::parse(cond)
                .ok_or_else(|| CliError::Usage(format!("unknown matrix condition `{cond}`")))?;
            let v = check_matrix_condition(&m, c, &cfg)?;
            let mut t = Table::new("matrix_condition", &["lambda", "mu", "status"]);
            for r in &v.per_lambda {
                t.push(vec![
                    r.lambda.to_string(),
                    r.witness_mu.map_or(String::new(), |m| m.to_string()),
                    r.status.as_str().into(),
                ]);
            }
            let body = json!({
                "condition": c.name(),
                "status": v.status.as_str(),
                "witness_map": v.witness_map(),
                "rows": v.per_lambda.iter().map(|r| json!({
                    "lambda": r.lambda,
                    "status": r.status.as_str(),
                    "mu": r.witness_mu,
                    "tried": r.tried.iter().map(|(mu, pv)| json!({"mu": mu, "verdict": verdict_json(pv)})).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            });
            Ok(Output {
                report: Report {
                    command: "matrix check".into(),
                    config: run.clone(),
                    status: v.status.as_str().into(),
                    exit_code: status_code(v.status),
                    body,
                    table: Some(t),
                },
                artifacts: Vec::new(),
            })
        }
        MatrixCmd::Lemma1 { source } => {
            let m = load_matrix(source, run)?;
            let r = verify_lemma1(&m, &cfg)?;
            let overall = r.overall();
            let body = json!({
                "overall": overall.as_str(),
                "roumieu": r.roumieu.iter().map(implication_json).collect::<Vec<_>>(),
                "beurling": r.beurling.iter().map(implication_json).collect::<Vec<_>>(),
            });
            let code = match overall {
                ultradiff_core::matrix::Consistency::Consistent => EXIT_HOLDS,
                ultradiff_core::matrix::Consistency::Violated => EXIT_REFUTED,
                ultradiff_core::matrix::Consistency::Inconclusive => EXIT_ESTIMATE,
            };
            Ok(Output {
                report: Report {
                    command: "matrix lemma1".into(),
                    config: run.clone(),
                    status: overall.as_str().to_uppercase(),
                    exit_code: code,
                    body,
                    table: None,
                },
                artifacts: Vec::new(),
            })
        }
        MatrixCmd::BuildRemark2 { kind } => {
            let r = build_remark2(parse_kind(kind)?, run.truncation)?;
            let file = MatrixFile::from_matrix(&r.matrix);
            let body = json!({
                "kind": r.kind.as_str(),
                "adjusted_row": r.adjusted_row,
                "adjusted_range": r.adjusted_range(),
                "matrix": serde_json::to_value(&file).expect("matrix serializes"),
            });
            Ok(info_output("matrix build-remark2", run, body, None))
        }
    }
}

fn run_bounds(cmd: &BoundsCmd, run: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        BoundsCmd::Majorant { a, eta, p, j } => {
            let rows = majorant_derivatives(MajorantSpec { a: *a, eta: *eta, p: *p }, *j)?;
            let mut t = Table::new("majorant", &["j", "log_Y", "log_G"]);
            for (i, (y, g)) in rows.iter().enumerate() {
                t.push(vec![i.to_string(), cell(*y), cell(*g)]);
            }
            let body = json!({"a": num(*a), "eta": num(*eta), "p": num(*p), "j_max": j});
            Ok(info_output("bounds majorant", run, body, Some(t)))
        }
        BoundsCmd::RaiWitness { source, lambda, shifted } => {
            let m = load_matrix(source, run)?;
            let w = rai_witness(&m, *lambda, &run.check_config(), *shifted)?;
            let body = json!({"lambda": lambda, "mu": w.mu, "log_H": num(w.log_h), "shifted": shifted});
            Ok(info_output("bounds rai-witness", run, body, None))
        }
    }
}

fn run_oracle(cmd: &OracleCmd, run: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        OracleCmd::Compose { f, g } => {
            let out = match (load_jet(f)?, load_jet(g)?) {
                (AnyJet::Exact(f), AnyJet::Exact(g)) => AnyJet::Exact(f.compose(&g)?),
                (AnyJet::Float(f), AnyJet::Float(g)) => AnyJet::Float(f.compose(&g)?),
                _ => return Err(CliError::Usage("both jets must use the same mode".into())),
            };
            Ok(jet_output("oracle compose", run, out))
        }
        OracleCmd::Inverse { f } => {
            let out = match load_jet(f)? {
                AnyJet::Exact(f) => AnyJet::Exact(f.functional_inverse()?),
                AnyJet::Float(f) => AnyJet::Float(f.functional_inverse()?),
            };
            Ok(jet_output("oracle inverse", run, out))
        }
        OracleCmd::Reciprocal { f } => {
            let out = match load_jet(f)? {
                AnyJet::Exact(f) => {
                    let r = f.reciprocal()?;
                    if reciprocal_via_ode(&f)? != r {
                        return Err(CliError::stage("reciprocal-routes", "division and ODE routes disagree"));
                    }
                    AnyJet::Exact(r)
                }
                AnyJet::Float(f) => AnyJet::Float(f.reciprocal()?),
            };
            Ok(jet_output("oracle reciprocal", run, out))
        }
        OracleCmd::OdeXsq => {
            let k = run.truncation;
            let out = match run.mode {
                Mode::Exact => {
                    let field = BivariateField {
                        coeffs: vec![vec![rational(1, 1)], vec![rational(2, 1)], vec![rational(1, 1)]],
                        order: None,
                    };
                    AnyJet::Exact(ode_solve(&field, rational(1, 1), k)?)
                }
                Mode::Float => {
                    let field = BivariateField { coeffs: vec![vec![1.0], vec![2.0], vec![1.0]], order: None };
                    AnyJet::Float(ode_solve(&field, 1.0, k)?)
                }
            };
            Ok(jet_output("oracle ode-xsq", run, out))
        }
        OracleCmd::Profile { f, source, rhos } => {
            let w = load_sequence(source, run.truncation)?;
            let front = match load_jet(f)? {
                AnyJet::Exact(j) => j.growth_profile(&w, rhos)?,
                AnyJet::Float(j) => j.growth_profile(&w, rhos)?,
            };
            let mut t = Table::new("profile", &["rho", "log_C"]);
            for (r, c) in &front {
                t.push(vec![cell(*r), cell(*c)]);
            }
            let body = json!({"sequence": w.label(), "front": front.iter().map(|(r, c)| json!([num(*r), num(*c)])).collect::<Vec<_>>()});
            Ok(info_output("oracle profile", run, body, Some(t)))
        }
        OracleCmd::Suite => {
            let report = run_suite(run);
            let mut results = report.results.clone();
            results.push(determinism(run, &report));
            let pass = results.iter().all(|r| r.pass);
            let mut t = Table::new("suite", &["id", "name", "pass", "summary"]);
            for r in &results {
                t.push(vec![r.id.to_string(), r.name.into(), r.pass.to_string(), r.summary.clone()]);
            }
            let body = json!(results
                .iter()
                .map(|r| json!({"id": r.id, "name": r.name, "pass": r.pass, "summary": r.summary, "details": r.details}))
                .collect::<Vec<_>>());
            Ok(Output { report: pass_report("oracle suite", run, pass, body, Some(t)), artifacts: Vec::new() })
        }
    }
}

fn run_pipeline(cmd: &PipelineCmd, run: &RunConfig) -> Result<Output, CliError> {
    let out = match cmd {
        PipelineCmd::OmegaMatrix { family, source, rhos } => {
            if family != "power" && source.file.is_none() {
                return Err(CliError::Usage(format!("unknown weight family `{family}` (power)")));
            }
            let w = load_weight_function(source)?;
            ("pipeline omega-matrix", omega_matrix_pipeline(&w, rhos, run)?)
        }
        PipelineCmd::Remark2 { kind } => ("pipeline remark2", remark2_pipeline(parse_kind(kind)?, run)?),
        PipelineCmd::OdeBound { field: Field::Xsq, radius, class, sigma } => {
            ("pipeline ode-bound", ode_bound_pipeline(*radius, *class, *sigma, run)?)
        }
        PipelineCmd::InverseBound => ("pipeline inverse-bound", inverse_bound_pipeline(run)?),
        PipelineCmd::NeumannBound { a, ac } => ("pipeline neumann-bound", neumann_bound_pipeline(*a, *ac, run)?),
        PipelineCmd::Lemma4 { demo, s, c, zeros } => {
            let inputs = match (demo, s) {
                (true, _) => Lemma4Inputs::demo(),
                (false, Some(s)) => Lemma4Inputs { s: [s[0], s[1], s[2]], c: *c, zeros: zeros.clone() },
                (false, None) => return Err(CliError::Usage("give --demo or --s s1,s2,s3".into())),
            };
            ("pipeline lemma4", lemma4_pipeline(&inputs, run)?)
        }
        PipelineCmd::OracleCrosscheck { kind, c, rho, shifted, source, jet } => {
            let kind = CertKind::parse(kind).ok_or_else(|| CliError::Usage(format!("unknown certificate kind `{kind}`")))?;
            let shift = if *shifted { Shift::MinusOne } else { Shift::None };
            let w = load_sequence(source, run.truncation)?;
            let cert = BoundCertificate::new(*c, *rho, w, shift, kind)?;
            ("pipeline oracle-crosscheck", crosscheck_pipeline(&cert, &load_jet(jet)?)?)
        }
    };
    Ok(pipeline_output(out.0, run, out.1))
}

fn apply_overrides(run: &mut RunConfig, g: &GlobalArgs) {
    if let Some(k) = g.k {
        run.truncation = k;
    }
    if let Some(v) = g.dp_cap {
        run.dp_cap = v;
    }
    if let Some(v) = g.mode {
        run.mode = v;
    }
    if let Some(v) = g.format {
        run.format = v;
    }
    if let Some(v) = g.seed {
        run.seed = v;
    }
    if let Some(v) = g.far_vertices {
        run.far_vertices = v;
    }
    if let Some(v) = g.epsilon {
        run.epsilon = v;
    }
    if let Some(v) = g.rai_reading {
        run.rai_reading = v;
    }
}

/// Run a parsed command line and return the exit code.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let mut run = RunConfig::load(cli.global.config.as_deref())?;
    apply_overrides(&mut run, &cli.global);
    run.validate()?;
    let out = match &cli.command {
        Command::Seq(c) => run_seq(c, &run)?,
        Command::Fdb(c) => run_fdb(c, &run)?,
        Command::Omega(c) => run_omega(c, &run)?,
        Command::Matrix(c) => run_matrix(c, &run)?,
        Command::Bounds(c) => run_bounds(c, &run)?,
        Command::Oracle(c) => run_oracle(c, &run)?,
        Command::Pipeline(c) => run_pipeline(c, &run)?,
    };
    let text = out.report.render()?;
    match &cli.global.out {
        Some(p) => write_text(p, &text)?,
        None => print!("{text}"),
    }
    if !out.artifacts.is_empty() {
        let dir = cli
            .global
            .artifacts
            .clone()
            .or_else(|| cli.global.out.as_ref().and_then(|p| p.parent().map(Path::to_path_buf)))
            .unwrap_or_else(|| PathBuf::from("."));
        let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        for (name, contents) in &out.artifacts {
            write_text(&dir.join(name), contents)?;
        }
    }
    Ok(out.report.exit_code)
}

//! Multi-stage constructions: build an object, check it, compare it with the
//! oracle, and return the artifacts together with a pass/fail summary.

use num_rational::BigRational;
use serde_json::{json, Value};
use ultradiff_core::bounds::{
    inverse_fn_bound, lemma4_construct, neumann_exact_sums, neumann_inverse_bound, ode_bound_beurling,
    ode_bound_roumieu, rai_constant, square_field_certificate, BoundCertificate,
};
use ultradiff_core::jet::{crosscheck_bound, DominanceReport, Jet};
use ultradiff_core::matrix::{build_remark2, check_matrix_condition, MatrixCondition, Remark2Kind, WeightMatrix};
use ultradiff_core::numeric::{ln_factorial, rational};
use ultradiff_core::seq::check_weakly_log_convex;
use ultradiff_core::weight_fn::{omega_matrix, WeightFunction};
use ultradiff_core::{CheckConfig, Scalar, Status, WeightSequence};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::formats::{certificate_json, num, verdict_json, JetFile, MatrixFile, SequenceFile};
use crate::report::{cell, Table};

/// Far vertex depth used by the asymmetric-matrix pipeline when the run
/// configuration leaves far checkpoints disabled.
pub const REMARK2_FAR_VERTICES: u32 = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub pass: bool,
    pub body: Value,
    pub table: Option<Table>,
    /// `(file name, contents)` for constructed objects.
    pub artifacts: Vec<(String, String)>,
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn stage<T>(name: &str, r: ultradiff_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::stage(name, e))
}

pub fn dominance_table(report: &DominanceReport) -> Table {
    let mut t = Table::new("dominance", &["k", "log_bound", "log_oracle"]);
    for &(k, b, o) in &report.rows {
        t.push(vec![k.to_string(), cell(b), cell(o)]);
    }
    t
}

fn dominance_json(report: &DominanceReport) -> Value {
    json!({
        "pass": report.pass,
        "first_violation": report.first_violation,
        "min_log_margin": num(report.min_margin),
    })
}

pub fn omega_matrix_pipeline(w: &WeightFunction, rhos: &[f64], run: &RunConfig) -> Result<PipelineOutcome, CliError> {
    let k_max = run.truncation;
    // row order violations surface as a stage failure of the constructor
    let (m, warnings) = stage("omega-matrix", omega_matrix(w, rhos, k_max))?;
    let cfg = run.check_config();
    let mut rows = Vec::new();
    let mut pass = true;
    for (i, row) in m.rows().iter().enumerate() {
        let v = stage("row-convexity", check_weakly_log_convex(row, &cfg.clone().with_truncation(row.truncation())))?;
        pass &= v.status == Status::HoldsUpTo;
        rows.push(json!({ "rho": num(m.lambdas()[i]), "truncation": row.truncation(), "weakly_log_convex": verdict_json(&v) }));
    }
    let mut t = Table::new("omega_matrix", &["k", "rho", "log_omega_k"]);
    for (i, row) in m.rows().iter().enumerate() {
        for (k, x) in row.log_terms().iter().enumerate() {
            t.push(vec![k.to_string(), cell(m.lambdas()[i]), cell(*x)]);
        }
    }
    let body = json!({
        "rows": rows,
        "monotone_in_rho": "PASS",
        "horizon_warnings": warnings.iter().map(|h| json!({"rho": num(h.rho), "truncated_at": h.truncated_at})).collect::<Vec<_>>(),
    });
    Ok(PipelineOutcome {
        pass,
        body,
        table: Some(t),
        artifacts: vec![("omega_matrix.json".into(), pretty(&MatrixFile::from_matrix(&m)))],
    })
}

pub fn remark2_pipeline(kind: Remark2Kind, run: &RunConfig) -> Result<PipelineOutcome, CliError> {
    let r = stage("build", build_remark2(kind, run.truncation))?;
    let mut cfg = run.check_config();
    if cfg.far_vertices == 0 {
        cfg.far_vertices = REMARK2_FAR_VERTICES;
    }
    let expected = match kind {
        Remark2Kind::BeurlingNotRoumieu => (Status::HoldsUpTo, Status::Refuted),
        Remark2Kind::RoumieuNotBeurling => (Status::Refuted, Status::HoldsUpTo),
    };
    let rai_b = stage("rai_B", check_matrix_condition(&r.matrix, MatrixCondition::RaiBeurling, &cfg))?;
    let rai_r = stage("rai_R", check_matrix_condition(&r.matrix, MatrixCondition::RaiRoumieu, &cfg))?;
    let pass = rai_b.status == expected.0 && rai_r.status == expected.1;
    let mut t = Table::new("matrix_conditions", &["condition", "lambda", "mu", "status", "constant"]);
    let mut conds = Vec::new();
    for v in [&rai_b, &rai_r] {
        for l in &v.per_lambda {
            for (mu, pv) in &l.tried {
                t.push(vec![
                    v.condition.name().into(),
                    l.lambda.to_string(),
                    mu.to_string(),
                    pv.status.as_str().into(),
                    cell(pv.constant()),
                ]);
            }
        }
        conds.push(json!({
            "condition": v.condition.name(),
            "status": v.status.as_str(),
            "witness_map": v.witness_map(),
        }));
    }
    let (lo, hi) = r.adjusted_range().unwrap_or((0, 0));
    let body = json!({
        "kind": kind.as_str(),
        "far_vertices": cfg.far_vertices,
        "adjusted_row": r.adjusted_row,
        "adjusted_indices": r.adjusted,
        "adjusted_range": if r.adjusted.is_empty() { Value::Null } else { json!([lo, hi]) },
        "conditions": conds,
        "expected": { "rai_B": expected.0.as_str(), "rai_R": expected.1.as_str() },
    });
    Ok(PipelineOutcome {
        pass,
        body,
        table: Some(t),
        artifacts: vec![(format!("remark2_{}.json", kind.as_str()), pretty(&MatrixFile::from_matrix(&r.matrix)))],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OdeClass {
    Roumieu,
    Beurling,
}

/// `x' = x^2`, `x(0) = 1` on `|x| <= radius`, against the solution
/// `1/(1 - t)`.
pub fn ode_bound_pipeline(radius: f64, class: OdeClass, sigma: f64, run: &RunConfig) -> Result<PipelineOutcome, CliError> {
    let k = run.truncation;
    if k == 0 || k > 400 {
        return Err(CliError::Usage("ode-bound needs 1 <= K <= 400".into()));
    }
    let jet = Jet::<BigRational>::geometric(k);
    let (cert, body) = match class {
        OdeClass::Roumieu => {
            let ones = WeightSequence::constant_one(k + 1);
            let src = stage("field-certificate", square_field_certificate(radius, ones.clone()))?;
            let cfg = run.check_config().with_truncation(k + 1);
            let out = stage("ode-bound", ode_bound_roumieu(&src, &ones, src.c, 1.0, &cfg))?;
            let body = json!({
                "class": "roumieu",
                "field_certificate": certificate_json(&src),
                "A": num(out.a),
                "eta": num(out.eta),
                "log_H": num(out.log_h),
                "normalization": num(out.normalization),
            });
            (out.certificate, body)
        }
        OdeClass::Beurling => {
            let n = run.truncation.max(1024);
            let m = WeightMatrix::single(stage("row", WeightSequence::gevrey(1.0, n))?);
            let cfg = run.check_config().with_truncation(n);
            // x^2 and its x-derivatives on |x| <= radius, against rho^k (k-1)! M_{k-1}
            let family = move |row: &WeightSequence, rho: f64| {
                let m1 = row.log_terms()[1].exp();
                (radius * radius).max(2.0 * radius / rho).max(2.0 / (rho * rho * m1)).max(1.0)
            };
            let b = stage("ode-bound", ode_bound_beurling(&family, &m, 0, sigma, radius, &cfg))?;
            let body = json!({
                "class": "beurling",
                "sigma": num(sigma),
                "rows": { "nu": b.nu, "mu": b.mu, "lambda": b.lambda },
                "log_H": num(b.log_h),
                "log_J": num(b.log_j),
                "L0_clipped": b.l0_clipped,
                "C_prime": num(b.c_prime),
                "log_E": num(b.log_e),
                "window": b.window,
                "converged": b.converged,
                "regularization": {
                    "comparison_holds": b.lemma4.comparison_holds,
                    "trend": b.lemma4.trend.status.as_str(),
                },
            });
            (b.certificate, body)
        }
    };
    let report = stage("crosscheck", crosscheck_bound(&cert, &jet))?;
    let mut body = body;
    body["certificate"] = certificate_json(&cert);
    body["dominance"] = dominance_json(&report);
    Ok(PipelineOutcome {
        pass: report.pass,
        body,
        table: Some(dominance_table(&report)),
        artifacts: vec![
            ("certificate.json".into(), pretty(&certificate_json(&cert))),
            ("solution_jet.json".into(), pretty(&JetFile::from_exact(&jet))),
            ("dominance.csv".into(), dominance_table(&report).to_csv()?),
        ],
    })
}

/// Inverse of `f(t) = t + t^2/2` near 0, with `|f^{(k)}| <= 3/2 (k-1)!` and
/// `|1/f'| <= 2` on `|t| <= 1/2`.
pub fn inverse_bound_pipeline(run: &RunConfig) -> Result<PipelineOutcome, CliError> {
    let k = run.truncation;
    if k == 0 || k > 200 {
        return Err(CliError::Usage("inverse-bound needs 1 <= K <= 200".into()));
    }
    let (a, c, rho) = (2.0, 1.5, 1.0);
    let m = WeightMatrix::single(WeightSequence::constant_one(k.max(64) + 1));
    let cfg = run.check_config().with_truncation(k.max(64) + 1);
    let b = stage("inverse-bound", inverse_fn_bound(a, c, rho, &m, 0, k, true, &cfg))?;
    let f = stage("jet", Jet::new(vec![rational(0, 1), rational(1, 1), rational(1, 2)]))?;
    let mut coeffs = f.coefficients().to_vec();
    coeffs.resize(k + 1, rational(0, 1));
    let g = stage("oracle-inverse", Jet::new(coeffs).and_then(|f| f.functional_inverse()))?;
    let report = stage("crosscheck", crosscheck_bound(&b.certificate, &g))?;
    let body = json!({
        "A": num(a), "C": num(c), "rho": num(rho),
        "neumann": {
            "rescaled": b.neumann.rescaled,
            "C": num(b.neumann.c),
            "rho": num(b.neumann.rho),
            "certificate": certificate_json(&b.neumann.certificate),
        },
        "nu": b.nu,
        "log_H2": num(b.log_h2),
        "certificate": certificate_json(&b.certificate),
        "dominance": dominance_json(&report),
    });
    Ok(PipelineOutcome {
        pass: report.pass,
        body,
        table: Some(dominance_table(&report)),
        artifacts: vec![
            ("certificate.json".into(), pretty(&certificate_json(&b.certificate))),
            ("inverse_jet.json".into(), pretty(&JetFile::from_exact(&g))),
        ],
    })
}

/// Exact Neumann sums for `M = 1`, `rho = 1` against `A AC (1 + AC)^{k-1}`,
/// then the simplified certificate against the sums on Gevrey-1.
pub fn neumann_bound_pipeline(a: f64, ac: f64, run: &RunConfig) -> Result<PipelineOutcome, CliError> {
    let k = run.truncation;
    if k == 0 || k > 400 {
        return Err(CliError::Usage("neumann-bound needs 1 <= K <= 400".into()));
    }
    if !(a > 0.0 && ac > 0.0 && ac < 1.0) {
        return Err(CliError::Usage("neumann-bound needs A > 0 and 0 < AC < 1".into()));
    }
    let (qa, qac) = (
        BigRational::from_f64(a).expect("finite"),
        BigRational::from_f64(ac).expect("finite"),
    );
    let ones = vec![rational(1, 1); k + 1];
    let sums = stage("exact-sums", neumann_exact_sums(&qa, &qac, &rational(1, 1), &ones, k))?;
    let mut closed = qa.clone() * qac.clone();
    let step = rational(1, 1) + qac.clone();
    let mut closed_ok = true;
    let mut t = Table::new("neumann", &["k", "log_exact_sum", "log_closed_form", "log_certificate", "log_gevrey_sum"]);
    let n = k.max(64) + 1;
    let m = WeightMatrix::single(stage("row", WeightSequence::gevrey(1.0, n))?);
    let cfg = run.check_config().with_truncation(n);
    let c = ac / a;
    let nb = stage("neumann-bound", neumann_inverse_bound(a, c, 1.0, &m, 0, k, false, &cfg))?;
    let mut cert_ok = true;
    for i in 1..=k {
        closed_ok &= sums[i] == closed;
        let gevrey_sum = nb.log_sums[i] + ln_factorial(i as u128);
        let bound = stage("certificate", nb.certificate.log_bound(i))?;
        cert_ok &= bound >= gevrey_sum - 1e-9;
        t.push(vec![i.to_string(), cell(sums[i].ln_abs()), cell(closed.ln_abs()), cell(bound), cell(gevrey_sum)]);
        closed = closed * step.clone();
    }
    let body = json!({
        "A": num(a), "AC": num(ac),
        "closed_form_matches": closed_ok,
        "certificate_dominates": cert_ok,
        "certificate": certificate_json(&nb.certificate),
    });
    Ok(PipelineOutcome {
        pass: closed_ok && cert_ok,
        body,
        artifacts: vec![("certificate.json".into(), pretty(&certificate_json(&nb.certificate))), ("neumann.csv".into(), t.to_csv()?)],
        table: Some(t),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma4Inputs {
    pub s: [f64; 3],
    /// `L_k = c^k`, with `L_k = 0` at `zeros`.
    pub c: f64,
    pub zeros: Vec<usize>,
}

impl Lemma4Inputs {
    pub fn demo() -> Self {
        Lemma4Inputs {
            s: [1.0, 1.0, 1.0],
            c: 1.0,
            zeros: Vec::new(),
        }
    }
}

pub fn lemma4_pipeline(inputs: &Lemma4Inputs, run: &RunConfig) -> Result<PipelineOutcome, CliError> {
    let k = run.truncation;
    let [s1, s2, s3] = inputs.s;
    let rows = [s1, s2, s3].map(|s| WeightSequence::gevrey(s, k));
    let [m1, m2, m3] = rows;
    let (m1, m2, m3) = (stage("M1", m1)?, stage("M2", m2)?, stage("M3", m3)?);
    let mut l: Vec<f64> = (0..=k).map(|i| i as f64 * inputs.c.ln()).collect();
    for &z in &inputs.zeros {
        if z <= k {
            l[z] = f64::NEG_INFINITY;
        }
    }
    let log_h1 = rai_constant(&m1, &m2, k, false);
    let cfg: CheckConfig = run.check_config().with_truncation(k);
    let out = stage("lemma4", lemma4_construct(&l, &m1, &m2, &m3, log_h1.exp(), &cfg))?;
    let pass = out.l_le_n1
        && out.n1_le_n2
        && out.comparison_holds
        && out.comparison_excess <= 1e-12
        && out.trend.status == Status::HoldsUpTo;
    let mut t = Table::new("lemma4", &["k", "log_L", "log_N1", "log_N2"]);
    for i in 0..=k {
        t.push(vec![i.to_string(), cell(out.l_bar[i]), cell(out.n1[i]), cell(out.n2[i])]);
    }
    let seq = |label: &str, terms: &[f64]| -> Result<String, CliError> {
        let w = WeightSequence::from_log_terms(label, terms.to_vec(), false)?;
        Ok(pretty(&SequenceFile::from_sequence(&w)))
    };
    let body = json!({
        "s": inputs.s,
        "c": num(inputs.c),
        "zero_entries": out.zero_entries,
        "log_H1": num(log_h1),
        "L_le_N1": out.l_le_n1,
        "N1_le_N2": out.n1_le_n2,
        "comparison_holds": out.comparison_holds,
        "comparison_max_excess": num(out.comparison_excess),
        "trend": verdict_json(&out.trend),
        "preconditions": out.preconditions.iter().map(|(n, s)| json!({"name": n, "status": s.as_str()})).collect::<Vec<_>>(),
    });
    Ok(PipelineOutcome {
        pass,
        body,
        artifacts: vec![("N1.json".into(), seq("N1", &out.n1)?), ("N2.json".into(), seq("N2", &out.n2)?)],
        table: Some(t),
    })
}

pub fn crosscheck_pipeline(cert: &BoundCertificate, jet: &crate::formats::AnyJet) -> Result<PipelineOutcome, CliError> {
    let report = match jet {
        crate::formats::AnyJet::Exact(j) => stage("crosscheck", crosscheck_bound(cert, j))?,
        crate::formats::AnyJet::Float(j) => stage("crosscheck", crosscheck_bound(cert, j))?,
    };
    Ok(PipelineOutcome {
        pass: report.pass,
        body: json!({ "certificate": certificate_json(cert), "dominance": dominance_json(&report) }),
        table: Some(dominance_table(&report)),
        artifacts: vec![("dominance.csv".into(), dominance_table(&report).to_csv()?)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(k: usize) -> RunConfig {
        RunConfig {
            truncation: k,
            ..RunConfig::default()
        }
    }

    #[test]
    fn xsq_roumieu_passes() {
        assert!(ode_bound_pipeline(2.0, OdeClass::Roumieu, 1.0, &run(40)).unwrap().pass);
    }

    #[test]
    fn inverse_of_half_square_passes() {
        assert!(inverse_bound_pipeline(&run(25)).unwrap().pass);
    }

    #[test]
    fn neumann_closed_form() {
        let out = neumann_bound_pipeline(2.0, 0.5, &run(30)).unwrap();
        assert_eq!(out.body["closed_form_matches"], true);
        assert!(out.pass);
    }

    #[test]
    fn lemma4_demo_passes() {
        assert!(lemma4_pipeline(&Lemma4Inputs::demo(), &run(512)).unwrap().pass);
    }
}

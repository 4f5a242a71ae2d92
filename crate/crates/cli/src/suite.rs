//! The acceptance battery: eleven criteria, each run at its stated
//! tolerance, collected into a deterministic report.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use ultradiff_core::bounds::{neumann_exact_sums, neumann_inverse_bound};
use ultradiff_core::fdb::{
    check_fdb_property, m_circ_bruteforce, m_circ_table, n_beta_by_enumeration, n_beta_coefficients,
};
use ultradiff_core::jet::{ode_solve, reciprocal_via_ode, BivariateField, Jet};
use ultradiff_core::matrix::{Remark2Kind, WeightMatrix};
use ultradiff_core::numeric::{ln_factorial, rational, LN_2};
use ultradiff_core::seq::appendix_a::{
    convexity_violation_exact, slope_chain_holds_for_all_i, vertex_index, AppendixAParams,
};
use ultradiff_core::seq::{
    check_almost_increasing, check_almost_increasing_with_witness, check_growth, dominance_threshold,
    GrowthCondition,
};
use ultradiff_core::weight_fn::{omega_matrix, Family, PiecewiseLinear, WeightFunction};
use ultradiff_core::{CheckConfig, Scalar, Status, WeightSequence};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::formats::{index_str, num};
use crate::pipelines::{
    inverse_bound_pipeline, lemma4_pipeline, ode_bound_pipeline, remark2_pipeline, Lemma4Inputs, OdeClass,
};

pub const SUITE_SCHEMA: &str = "ultradiff.suite/1";

type Q = BigRational;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub summary: String,
    pub details: Value,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.summary
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub results: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let v = json!({
            "schema": SUITE_SCHEMA,
            "seed": self.seed,
            "criteria": self.results.iter().map(|r| json!({
                "id": r.id,
                "name": r.name,
                "pass": r.pass,
                "summary": r.summary,
                "details": r.details,
            })).collect::<Vec<_>>(),
        });
        let mut s = serde_json::to_string_pretty(&v).expect("suite serializes");
        s.push('\n');
        s
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

type Outcome = Result<(bool, String, Value), CliError>;

fn rng(seed: u64, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ id as u64)
}

fn finish(id: u32, name: &'static str, out: Outcome) -> CriterionResult {
    match out {
        Ok((pass, summary, details)) => CriterionResult { id, name, pass, summary, details },
        Err(e) => CriterionResult {
            id,
            name,
            pass: false,
            summary: format!("error: {e}"),
            details: Value::Null,
        },
    }
}

/// Criteria 1 to 10 in order.
pub fn run_suite(run: &RunConfig) -> SuiteReport {
    let seed = run.seed;
    let results = vec![
        finish(1, "composition maximum: DP equals enumeration", c1_m_circ(seed)),
        finish(2, "polygon sequence properties", c2_polygon(run)),
        finish(3, "almost increasing agrees with FdB", c3_equivalence(run)),
        finish(4, "Young conjugation", c4_conjugation(seed)),
        finish(5, "associated weight matrix", c5_omega_matrix()),
        finish(6, "N(beta) coefficients", c6_n_beta()),
        finish(7, "jet oracle", c7_jets(seed)),
        finish(8, "bound dominance", c8_bounds(run)),
        finish(9, "regularization construction", c9_lemma4(run)),
        finish(10, "asymmetric two-row matrices", c10_remark2(run)),
    ];
    SuiteReport { seed, results }
}

/// Criterion 11: the suite report is byte-identical across two runs.
pub fn determinism(run: &RunConfig, first: &SuiteReport) -> CriterionResult {
    let a = first.to_json();
    let b = run_suite(run).to_json();
    let same = a == b;
    CriterionResult {
        id: 11,
        name: "determinism",
        pass: same,
        summary: format!("two runs with seed {}: {} bytes, identical = {same}", run.seed, a.len()),
        details: json!({ "bytes": a.len(), "identical": same }),
    }
}

/// Sorted rationals in `[1, 5]`: consecutive ratios of `k! M_k`.
fn random_log_convex_exact(r: &mut ChaCha8Rng, k_max: usize) -> Vec<Q> {
    let mut ratios: Vec<Q> = (0..k_max)
        .map(|_| {
            let d = r.gen_range(1..=8i64);
            rational(r.gen_range(d..=5 * d), d)
        })
        .collect();
    ratios.sort();
    let mut out = vec![rational(1, 1)];
    let mut a = rational(1, 1);
    let mut fact = rational(1, 1);
    for (i, q) in ratios.iter().enumerate() {
        a = a * q.clone();
        fact = fact * rational(i as i64 + 1, 1);
        out.push(a.clone() / fact.clone());
    }
    out
}

fn c1_m_circ(seed: u64) -> Outcome {
    const K: usize = 12;
    let mut r = rng(seed, 1);
    let mut exact_inputs: Vec<(String, Vec<Q>)> = (0..20)
        .map(|i| (format!("random-{i}"), random_log_convex_exact(&mut r, K)))
        .collect();
    let mut fact = vec![rational(1, 1)];
    for k in 1..=K {
        let next = fact[k - 1].clone() * rational(k as i64, 1);
        fact.push(next);
    }
    exact_inputs.push(("gevrey-0".into(), vec![rational(1, 1); K + 1]));
    exact_inputs.push(("gevrey-1".into(), fact));

    let mut exact_ok = true;
    let mut float_worst: f64 = 0.0;
    let mut checked = 0usize;
    let mut float_inputs: Vec<(String, Vec<f64>)> = Vec::new();
    for (label, values) in &exact_inputs {
        let table = m_circ_table(values, K)?;
        for k in 0..=K {
            exact_ok &= table.m_circ[k] == m_circ_bruteforce(values, k)?;
            checked += 1;
        }
        float_inputs.push((label.clone(), values.iter().map(|q| q.ln_abs()).collect()));
    }
    float_inputs.push(("gevrey-0.5".into(), WeightSequence::gevrey(0.5, K)?.log_terms().to_vec()));
    float_inputs.push(("polygon".into(), WeightSequence::appendix_a(K)?.log_terms().to_vec()));
    for (_, logs) in &float_inputs {
        let table = m_circ_table(logs, K)?;
        for k in 0..=K {
            let b = m_circ_bruteforce(logs, k)?;
            float_worst = float_worst.max((table.m_circ[k] - b).abs() / (1.0 + b.abs()));
        }
    }
    let pass = exact_ok && float_worst <= 1e-12;
    Ok((
        pass,
        format!(
            "{} exact sequences x k <= {K}: exact equality {exact_ok}; {} float sequences: worst relative gap {:.1e} (tol 1e-12)",
            exact_inputs.len(),
            float_inputs.len(),
            float_worst
        ),
        json!({ "exact_checks": checked, "exact_equal": exact_ok, "float_worst_gap": num(float_worst) }),
    ))
}

fn c2_polygon(run: &RunConfig) -> Outcome {
    const K: usize = 4096;
    let convex = convexity_violation_exact(K).is_none();
    let numeric_chain = AppendixAParams::new(7).slopes_monotone();
    let algebraic_chain = slope_chain_holds_for_all_i();
    let a = WeightSequence::appendix_a(K)?;
    let cfg = CheckConfig { truncation: K, ..run.check_config() };
    let dc = check_growth(&a, GrowthCondition::DerivationClosed, &cfg)?;
    let dc_finite = dc.constant_estimate.is_finite();
    let wit = check_almost_increasing_with_witness(&a, vertex_index(4), vertex_index(5), &cfg)?;
    let defect = wit.witness.map(|w| w.value).unwrap_or(f64::NEG_INFINITY);
    let defect_bound = 16f64.ln() - 1.0;
    let refuted = wit.status == Status::Refuted && defect >= defect_bound;
    let threshold = dominance_threshold(&a, 0.25, 3.1);
    let terms = a.log_terms();
    let sandwich = threshold.is_some_and(|t| {
        (t..=K).all(|k| {
            let lf = ln_factorial(k as u128);
            0.25 * lf <= terms[k] && terms[k] <= 3.1 * lf
        })
    });
    let pass = convex && numeric_chain && algebraic_chain && dc_finite && refuted && sandwich;
    Ok((
        pass,
        format!(
            "convex to {K}: {convex}; slope chain numeric {numeric_chain}, algebraic {algebraic_chain}; dc statistic {:.4} finite; \
             almost increasing {} at (k_4, k_5) with log defect {:.4} >= {:.4}; k!^(1/4) <= M_k <= k!^(3.1) from k = {} to {K}: {sandwich}",
            dc.constant_estimate,
            wit.status.as_str(),
            defect,
            defect_bound,
            threshold.map_or("none".into(), |t| t.to_string()),
        ),
        json!({
            "weakly_log_convex_exact": convex,
            "slope_chain_numeric": numeric_chain,
            "slope_chain_algebraic": algebraic_chain,
            "dc_log_constant": num(dc.constant_estimate),
            "almost_increasing": wit.status.as_str(),
            "witness": wit.witness.map(|w| json!({"j": index_str(w.j), "k": index_str(w.k), "log_defect": num(w.value)})),
            "sandwich_threshold": threshold,
            "sandwich_holds": sandwich,
        }),
    ))
}

fn c3_equivalence(run: &RunConfig) -> Outcome {
    const K: usize = 512;
    let cfg = CheckConfig { truncation: K, ..run.check_config() };
    let mut rows = Vec::new();
    let mut pass = true;
    for s in [0.0, 0.5, 1.0, 2.0] {
        let g = WeightSequence::gevrey(s, K)?;
        let (a, f) = (check_almost_increasing(&g, &cfg)?.status, check_fdb_property(&g, &cfg)?.status);
        pass &= a == Status::HoldsUpTo && f == Status::HoldsUpTo;
        rows.push(json!({"sequence": g.label(), "almost_increasing": a.as_str(), "fdb": f.as_str()}));
    }
    let saw = WeightSequence::sawtooth(K)?;
    let (a, f) = (check_almost_increasing(&saw, &cfg)?.status, check_fdb_property(&saw, &cfg)?.status);
    pass &= a == Status::Refuted && f == Status::Refuted;
    rows.push(json!({"sequence": saw.label(), "almost_increasing": a.as_str(), "fdb": f.as_str()}));

    // brute force: root below its running maximum by a factor >= 4
    let t = saw.log_terms();
    let mut run_max = f64::NEG_INFINITY;
    let mut deep = Vec::new();
    for k in 1..=K {
        let root = t[k] / k as f64;
        run_max = run_max.max(root);
        if k.is_power_of_two() && run_max - root >= 4f64.ln() {
            deep.push(k);
        }
    }
    let drops_ok = deep.len() >= 3;
    pass &= drops_ok;
    Ok((
        pass,
        format!(
            "gevrey s in {{0, 1/2, 1, 2}} both HOLD; sawtooth almost increasing {} / FdB {} at K = {K}; factor-4 root drops at breakpoints {:?}",
            a.as_str(),
            f.as_str(),
            deep
        ),
        json!({ "families": rows, "factor4_breakpoints": deep }),
    ))
}

fn c4_conjugation(seed: u64) -> Outcome {
    let mut r = rng(seed, 4);
    let mut exact_ok = true;
    for _ in 0..50 {
        let n = r.gen_range(2..10);
        let mut slopes: Vec<i64> = (0..n).map(|_| r.gen_range(0..30)).collect();
        slopes.sort();
        let mut knots = vec![(rational(0, 1), rational(0, 1))];
        for s in &slopes {
            let (t, y) = knots.last().expect("non-empty").clone();
            let w = rational(r.gen_range(1..6), r.gen_range(1..4));
            knots.push((t + w.clone(), y + w * rational(*s, 3)));
        }
        let tail = rational(slopes.last().expect("n >= 2") + r.gen_range(0..3), 3);
        let phi = PiecewiseLinear::new(knots.clone(), tail)?;
        let conj = phi.conjugate()?;
        exact_ok &= knots.iter().all(|(t, y)| conj.biconjugate(t) == *y);
    }
    let (s, t_max, n) = (2.0, 6.0, 10_000);
    let w = WeightFunction::power(s, t_max, n)?;
    let conj = w.conjugate()?;
    let fam = Family::Power { s };
    let horizon = *conj.horizon();
    let mut worst: f64 = 0.0;
    for i in 0..=400 {
        let u = horizon * i as f64 / 400.0;
        worst = worst.max((conj.eval(&u)? - fam.conjugate(u)).abs());
    }
    let pass = exact_ok && worst <= 1e-6;
    Ok((
        pass,
        format!("phi** = phi on all knots of 50 random functions: {exact_ok}; power weight s = 2 with {n} knots: max |phi* - analytic| = {worst:.2e} (tol 1e-6)"),
        json!({ "biconjugate_exact": exact_ok, "power_conjugate_max_gap": num(worst), "horizon": num(horizon) }),
    ))
}

fn c5_omega_matrix() -> Outcome {
    const K: usize = 200;
    let s = 2.0;
    let fam = Family::Power { s };
    // exact: rational samples of phi(t) = e^{t/2} - 1 on [0, 16]
    let knots: Vec<(Q, Q)> = (0..=320)
        .map(|i| {
            let t = i as f64 / 20.0;
            (rational(i, 20), Q::from_f64(fam.phi(t)).expect("finite"))
        })
        .collect();
    let tail = Q::from_f64((16.0 / s).exp() / s).expect("finite");
    let phi = PiecewiseLinear::new(knots, tail)?;
    let convex_input = phi.convexity_violation().is_none();
    let conj = phi.conjugate()?;
    let rhos = [rational(1, 2), rational(1, 1), rational(2, 1)];
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for rho in &rhos {
        rows.push((0..=K).map(|k| conj.scaled(rho, k)).collect::<Result<_, _>>()?);
    }
    let monotone = (0..=K).all(|k| rows[0][k] <= rows[1][k] && rows[1][k] <= rows[2][k]);
    let two = rational(2, 1);
    let log_convex = rows
        .iter()
        .all(|row| (1..K).all(|k| row[k + 1].clone() + row[k - 1].clone() >= two.clone() * row[k].clone()));

    let w = WeightFunction::power(s, 16.0, 4000)?;
    let (m, warnings) = omega_matrix(&w, &[0.5, 1.0, 2.0], K)?;
    let mut worst: f64 = 0.0;
    for (i, row) in m.rows().iter().enumerate() {
        let rho = m.lambdas()[i];
        let limit = s * (s * rho).ln();
        for k in 20..=K {
            let lf = ln_factorial(k as u128);
            let stat = (row.log_terms()[k] + lf - s * lf) / k as f64;
            worst = worst.max((stat - limit).abs());
        }
    }
    let ratio_ok = worst <= LN_2 && warnings.is_empty();
    let pass = convex_input && monotone && log_convex && ratio_ok;
    Ok((
        pass,
        format!(
            "exact rows monotone in rho: {monotone}; rows weakly log-convex: {log_convex}; \
             max |ln ratio - ln (2 rho)^2| over k in [20, 200] = {worst:.4} (tol ln 2)"
        ),
        json!({ "monotone": monotone, "weakly_log_convex": log_convex, "max_log_ratio_gap": num(worst) }),
    ))
}

fn c6_n_beta() -> Outcome {
    let mut routes_agree = true;
    for k in 0..=6 {
        routes_agree &= n_beta_coefficients(k)? == n_beta_by_enumeration(k)?;
    }
    let mut sums = Vec::new();
    let mut fact: u64 = 1;
    let mut sums_ok = true;
    for k in 0..=9u64 {
        if k > 0 {
            fact *= k;
        }
        let total: u64 = n_beta_coefficients(k as usize)?.values().sum();
        sums_ok &= total == fact;
        sums.push(total);
    }
    Ok((
        routes_agree && sums_ok,
        format!("recursion = expansion for k <= 6: {routes_agree}; sum N(beta) = k! for k <= 9: {sums_ok}"),
        json!({ "routes_agree": routes_agree, "sums": sums }),
    ))
}

fn random_jet(r: &mut ChaCha8Rng, k: usize, centered: bool) -> Jet<Q> {
    let c: Vec<Q> = (0..=k)
        .map(|i| {
            if centered && i == 0 {
                rational(0, 1)
            } else {
                rational(r.gen_range(-6..=6), r.gen_range(1..=5))
            }
        })
        .collect();
    Jet::new(c).expect("non-empty")
}

fn c7_jets(seed: u64) -> Outcome {
    let mut r = rng(seed, 7);
    let mut compose_ok = true;
    for _ in 0..100 {
        let f = random_jet(&mut r, 10, false);
        let g = random_jet(&mut r, 10, true);
        compose_ok &= f.compose(&g)? == f.compose_fdb(&g)?;
    }

    const KI: usize = 25;
    let mut targets: Vec<Jet<Q>> = Vec::new();
    let mut half_square = vec![rational(0, 1); KI + 1];
    half_square[1] = rational(1, 1);
    half_square[2] = rational(1, 2);
    targets.push(Jet::new(half_square)?);
    let mut geometric_shift = vec![rational(1, 1); KI + 1];
    geometric_shift[0] = rational(0, 1);
    targets.push(Jet::new(geometric_shift)?);
    for _ in 0..5 {
        let mut f = random_jet(&mut r, KI, true);
        if f.coefficients()[1] == rational(0, 1) {
            let mut c = f.coefficients().to_vec();
            c[1] = rational(1, 1);
            f = Jet::new(c)?;
        }
        targets.push(f);
    }
    let id = Jet::<Q>::identity(KI);
    let mut inverse_ok = true;
    for f in &targets {
        let g = f.functional_inverse()?;
        inverse_ok &= f.compose(&g)? == id && g.compose(f)? == id;
    }

    const KO: usize = 40;
    let field = BivariateField {
        coeffs: vec![vec![rational(1, 1)], vec![rational(2, 1)], vec![rational(1, 1)]],
        order: None,
    };
    let x = ode_solve(&field, rational(1, 1), KO)?;
    let ode_ok = x.coefficients().iter().all(|c| *c == rational(1, 1));

    let mut recip_ok = true;
    for _ in 0..20 {
        let mut f = random_jet(&mut r, 30, false);
        if f.coefficients()[0] == rational(0, 1) {
            let mut c = f.coefficients().to_vec();
            c[0] = rational(1, 1);
            f = Jet::new(c)?;
        }
        recip_ok &= reciprocal_via_ode(&f)? == f.reciprocal()?;
    }
    let pass = compose_ok && inverse_ok && ode_ok && recip_ok;
    Ok((
        pass,
        format!(
            "Horner = FdB sum on 100 pairs (K = 10): {compose_ok}; inverse roundtrip K = {KI}: {inverse_ok}; \
             x' = x^2 gives c_k = 1 to k = {KO}: {ode_ok}; reciprocal via ODE = division on 20 jets (K = 30): {recip_ok}"
        ),
        json!({ "compose": compose_ok, "inverse": inverse_ok, "ode": ode_ok, "reciprocal": recip_ok }),
    ))
}

fn c8_bounds(run: &RunConfig) -> Outcome {
    let sub = |k: usize| RunConfig { truncation: k, ..run.clone() };
    let ode = ode_bound_pipeline(2.0, OdeClass::Roumieu, 1.0, &sub(40))?;

    let (a, ac) = (rational(2, 1), rational(1, 2));
    let ones = vec![rational(1, 1); 31];
    let sums = neumann_exact_sums(&a, &ac, &rational(1, 1), &ones, 30)?;
    let mut expected = a.clone() * ac.clone();
    let mut closed_ok = true;
    for s in sums.iter().skip(1) {
        closed_ok &= *s == expected;
        expected = expected * rational(3, 2);
    }

    let m = WeightMatrix::single(WeightSequence::gevrey(1.0, 128)?);
    let cfg = CheckConfig { truncation: 128, ..run.check_config() };
    let nb = neumann_inverse_bound(2.0, 0.25, 1.0, &m, 0, 60, false, &cfg)?;
    let mut simplified_ok = true;
    for k in 0..=60 {
        simplified_ok &= nb.certificate.log_bound(k)? >= nb.log_sums[k] + ln_factorial(k as u128);
    }

    let inv = inverse_bound_pipeline(&sub(25))?;
    let pass = ode.pass && closed_ok && simplified_ok && inv.pass;
    Ok((
        pass,
        format!(
            "x' = x^2 certificate dominates to k = 40: {} (min log margin {}); Neumann sum = A (1/2)(3/2)^(k-1) to k = 30: {closed_ok}; \
             simplified certificate >= exact sum to k = 60: {simplified_ok}; inverse of t + t^2/2 dominated to k = 25: {} (min log margin {})",
            ode.pass, ode.body["dominance"]["min_log_margin"], inv.pass, inv.body["dominance"]["min_log_margin"]
        ),
        json!({
            "ode": ode.body,
            "neumann_closed_form": closed_ok,
            "neumann_simplified": simplified_ok,
            "inverse": inv.body,
        }),
    ))
}

fn c9_lemma4(run: &RunConfig) -> Outcome {
    let mut r = rng(run.seed, 9);
    let sub = RunConfig { truncation: 512, ..run.clone() };
    let mut passed = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for i in 0..30 {
        let s1 = r.gen_range(1.0..=3.0);
        let s2 = r.gen_range(s1..=3.0);
        let s3 = r.gen_range(s2..=3.0);
        let c = r.gen_range(0.5..=5.0);
        let nz = r.gen_range(0..=4);
        let zeros: Vec<usize> = (0..nz).map(|_| r.gen_range(1..=512)).collect();
        let out = lemma4_pipeline(&Lemma4Inputs { s: [s1, s2, s3], c, zeros }, &sub)?;
        if let Some(e) = out.body["comparison_max_excess"].as_f64() {
            worst_excess = worst_excess.max(e);
        }
        if out.pass {
            passed += 1;
        } else {
            failures.push(i);
        }
    }
    Ok((
        passed == 30,
        format!(
            "{passed}/30 inputs: L <= N1 <= N2, root comparison at sqrt(H1) (worst excess {worst_excess:.2e}, tol 1e-12), N2 vanishing against M3 below 0.1 by K = 512"
        ),
        json!({ "passed": passed, "failures": failures, "worst_excess": num(worst_excess) }),
    ))
}

fn c10_remark2(run: &RunConfig) -> Outcome {
    let sub = RunConfig { truncation: 4096, ..run.clone() };
    let mut pass = true;
    let mut parts = Vec::new();
    let mut details = Vec::new();
    for kind in [Remark2Kind::BeurlingNotRoumieu, Remark2Kind::RoumieuNotBeurling] {
        let out = remark2_pipeline(kind, &sub)?;
        pass &= out.pass;
        let conds = out.body["conditions"].as_array().cloned().unwrap_or_default();
        let describe: Vec<String> = conds
            .iter()
            .map(|c| format!("{} {} map {}", c["condition"].as_str().unwrap_or("?"), c["status"].as_str().unwrap_or("?"), c["witness_map"]))
            .collect();
        parts.push(format!("{}: {}", kind.as_str(), describe.join(", ")));
        details.push(out.body);
    }
    Ok((pass, parts.join("; "), Value::Array(details)))
}

//! Majorant bounds for solutions of `y' = g(y)`.

use alloc::string::String;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::One;

use super::lemma4::{lemma4_construct, Lemma4Output};
use super::{rai_constant, BoundCertificate, CertKind, Shift};
use crate::error::{Error, Result};
use crate::matrix::{check_matrix_condition, MatrixCondition, WeightMatrix};
use crate::numeric::{ln_factorial, ln_gamma, Scalar};
use crate::seq::{pair_root_verdict, WeightSequence};
use crate::verdict::{CheckConfig, Status};

/// Parameters of `G(s) = A / (1 - eta p s)` and of the solution `Y` of
/// `Y' = G(Y - A)`, `Y(0) = A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantSpec {
    pub a: f64,
    pub eta: f64,
    pub p: f64,
}

/// `(ln Y^{(j)}(0), ln G^{(j)}(0))` for `j = 0..=j_max`, where
/// `Y^{(j)}(0) = (2A)^j (eta p)^{j-1} Gamma(j - 1/2) / (2 sqrt(pi))` for
/// `j >= 1` and `G^{(j)}(0) = A eta^j j! p^j`.
pub fn majorant_derivatives(spec: MajorantSpec, j_max: usize) -> Result<Vec<(f64, f64)>> {
    let MajorantSpec { a, eta, p } = spec;
    if !(a > 0.0 && eta > 0.0 && p > 0.0) || !(a.is_finite() && eta.is_finite() && p.is_finite()) {
        return Err(Error::param("majorant", "A, eta and p must be finite and positive"));
    }
    let (la, le, lp) = (libm::log(a), libm::log(eta), libm::log(p));
    let ln_two_sqrt_pi = libm::log(2.0 * libm::sqrt(core::f64::consts::PI));
    Ok((0..=j_max)
        .map(|j| {
            let jf = j as f64;
            let y = if j == 0 {
                la
            } else {
                jf * (core::f64::consts::LN_2 + la) + (jf - 1.0) * (le + lp) + ln_gamma(jf - 0.5)
                    - ln_two_sqrt_pi
            };
            let g = la + jf * (le + lp) + ln_factorial(j as u128);
            (y, g)
        })
        .collect())
}

/// `Y^{(j)}(0)` exactly: `(2A)^j (eta p)^{j-1} (2j-3)!! / 2^j`, and `A` at `j = 0`.
pub fn majorant_y_exact(a: &BigRational, eta_p: &BigRational, j: usize) -> BigRational {
    if j == 0 {
        return a.clone();
    }
    let mut out = BigRational::one();
    for _ in 0..j {
        out = out * a.clone();
    }
    for _ in 1..j {
        out = out * eta_p.clone();
    }
    // (2A)^j / 2^j = A^j; the double factorial carries the rest
    let mut df = BigRational::one();
    let mut odd = 1i64;
    while odd <= 2 * j as i64 - 3 {
        df = df * BigRational::from_i64(odd);
        odd += 2;
    }
    out * df
}

/// Certificate `C rho^k (k-1)! M_{k-1}` for `g(y) = y^2` on `|y| <= R`
/// with `rho = 1`: `C = max(R^2, 2R, 2 / M_1)`.
pub fn square_field_constant(radius: f64, m1: f64) -> f64 {
    (radius * radius).max(2.0 * radius).max(2.0 / m1).max(1.0)
}

pub fn square_field_certificate(radius: f64, sequence: WeightSequence) -> Result<BoundCertificate> {
    if !(radius > 0.0) {
        return Err(Error::param("radius", "must be positive"));
    }
    let m1 = libm::exp(sequence.log_term(1)?);
    BoundCertificate::new(
        square_field_constant(radius, m1),
        1.0,
        sequence,
        Shift::MinusOne,
        CertKind::OdeField,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoumieuOdeBound {
    pub certificate: BoundCertificate,
    pub a: f64,
    pub eta: f64,
    /// `ln H` of the shifted root comparison between source and target rows.
    pub log_h: f64,
    /// `c >= 1` with `c M_1 >= 2`; the source row is read as `c^k M_k`.
    pub normalization: f64,
}

/// `|y^{(k)}| <= D sigma^k (k-1)! M^mu_{k-1}` with `D = 2A` and
/// `sigma = 2 A eta H c`, from a field certificate `C rho^k (k-1)! M^lambda_{k-1}`.
///
/// When `M^lambda_1 < 2` the source row is replaced by `c^k M^lambda_k`,
/// `c = 2 / M^lambda_1`; the field bound still holds for it since `c >= 1`,
/// and the factor `c^{k-1}` is folded into `sigma`.
pub fn ode_bound_roumieu(
    source: &BoundCertificate,
    target: &WeightSequence,
    a: f64,
    eta: f64,
    cfg: &CheckConfig,
) -> Result<RoumieuOdeBound> {
    if source.shift != Shift::MinusOne {
        return Err(Error::param("source", "field certificate must use the (k-1)! M_{k-1} shape"));
    }
    if !(a >= source.c) {
        return Err(Error::param("A", "must dominate the certificate constant C"));
    }
    if !(eta >= source.rho) {
        return Err(Error::param("eta", "must be at least rho"));
    }
    let lambda_row = &source.sequence;
    let verdict = pair_root_verdict(lambda_row, target, cfg)?;
    if verdict.status == Status::Refuted {
        return Err(Error::NoRaiWitness {
            lambda: 0,
            reason: String::from("root comparison of source and target rows is refuted"),
        });
    }
    let log_h = rai_constant(lambda_row, target, cfg.window, true);
    let m1 = libm::exp(lambda_row.log_term(1)?);
    let normalization = if m1 < 2.0 { 2.0 / m1 } else { 1.0 };
    let d = 2.0 * a;
    let sigma = 2.0 * a * eta * libm::exp(log_h) * normalization;
    let certificate = BoundCertificate::new(d, sigma, target.clone(), Shift::MinusOne, CertKind::OdeField)?;
    Ok(RoumieuOdeBound {
        certificate,
        a,
        eta,
        log_h,
        normalization,
    })
}

/// `rho -> C(nu, rho)`: a field bound `C rho^k (k-1)! M^nu_{k-1}` for every
/// row `nu` and `rho > 0`.
pub type CertificateFamily<'a> = &'a dyn Fn(&WeightSequence, f64) -> f64;

#[derive(Debug, Clone, PartialEq)]
pub struct BeurlingOdeBound {
    pub nu: usize,
    pub mu: usize,
    pub lambda: usize,
    pub log_h: f64,
    pub log_j: f64,
    /// `ln L_k`, `k = 0..K-1`, before clipping `L_0`.
    pub log_l: Vec<f64>,
    pub l0_clipped: bool,
    /// Constant of the field bound against `N^1`.
    pub c_prime: f64,
    pub lemma4: Lemma4Output,
    pub roumieu: RoumieuOdeBound,
    pub log_e: f64,
    pub window: usize,
    /// Whether the conversion maximum was reached well inside the window.
    pub converged: bool,
    pub certificate: BoundCertificate,
}

fn rho_grid() -> Vec<f64> {
    (-40..=12).map(|e| libm::pow(2.0, e as f64 * 0.5)).collect()
}

/// Beurling ODE bound `|y^{(k)}| <= E sigma^k (k-1)! M^lambda_{k-1}` for a
/// requested `sigma > 0`.
///
/// Rows `nu <= mu <= lambda` with bounded root comparisons are chosen, the
/// field sequence `L_{k-1} = sup |g^{(k)}| / (k-1)!` is bounded through the
/// family on a `rho`-grid, `L` is regularized into `N^1 <= N^2`, the Roumieu
/// bound is applied to `(N^1, N^2)`, and the result is converted to
/// `M^lambda` at rate `sigma` by a finite-window maximum.
pub fn ode_bound_beurling(
    family: CertificateFamily<'_>,
    m: &WeightMatrix,
    lambda: usize,
    sigma: f64,
    sup_solution: f64,
    cfg: &CheckConfig,
) -> Result<BeurlingOdeBound> {
    if lambda >= m.len() {
        return Err(Error::param("lambda", "row index out of range"));
    }
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", "must be positive"));
    }
    let pre = |cond| -> Result<()> {
        let v = check_matrix_condition(m, cond, cfg).map_err(|e| Error::stage("preconditions", e))?;
        if v.status == Status::Refuted {
            return Err(Error::Stage {
                stage: "preconditions",
                reason: alloc::format!("{} is refuted", cond.name()),
            });
        }
        Ok(())
    };
    pre(MatrixCondition::RaiBeurling)?;
    pre(MatrixCondition::ComegaBeurling)?;

    let (nu, mu) = choose_rows(m, lambda, cfg).map_err(|e| Error::stage("choose", e))?;
    let (row_nu, row_mu, row_l) = (m.row(nu), m.row(mu), m.row(lambda));
    let log_h = rai_constant(row_nu, row_mu, usize::MAX, false);
    let log_j = log_h + rai_constant(row_mu, row_l, usize::MAX, false);

    let k_max = cfg.truncation.min(row_nu.truncation()).min(row_mu.truncation()).min(row_l.truncation());
    let grid = rho_grid();
    let mut log_l = Vec::with_capacity(k_max);
    for i in 0..k_max {
        let mi = row_nu.log_term(i)?;
        let best = grid
            .iter()
            .map(|&r| libm::log(family(row_nu, r)) + (i + 1) as f64 * libm::log(r) + mi)
            .fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return Err(Error::Stage {
                stage: "family",
                reason: alloc::format!("no finite bound for L_{i}"),
            });
        }
        log_l.push(best);
    }
    let sup_g = grid.iter().map(|&r| family(row_nu, r)).fold(f64::INFINITY, f64::min);
    let l0_clipped = log_l[0] > 0.0;
    let c_prime = 1f64.max(sup_g).max(libm::exp(log_l[0]));
    let mut clipped = log_l.clone();
    clipped[0] = clipped[0].min(0.0);

    let lemma4 = lemma4_construct(&clipped, row_nu, row_mu, row_l, libm::exp(log_h), cfg)
        .map_err(|e| Error::stage("lemma4", e))?;
    let n1 = WeightSequence::from_log_terms("N1", lemma4.n1.clone(), false).map_err(|e| Error::stage("lemma4", e))?;
    let n2 = WeightSequence::from_log_terms("N2", lemma4.n2.clone(), false).map_err(|e| Error::stage("lemma4", e))?;

    let source = BoundCertificate::new(c_prime, 1.0, n1, Shift::MinusOne, CertKind::OdeField)?;
    let a = sup_solution.max(c_prime);
    let roumieu_cfg = CheckConfig {
        window: k_max,
        ..cfg.clone()
    };
    let roumieu = ode_bound_roumieu(&source, &n2, a, 1.0, &roumieu_cfg).map_err(|e| Error::stage("roumieu", e))?;

    let d = roumieu.certificate.c;
    let rate = libm::log(roumieu.certificate.rho / sigma);
    let ml = row_l.log_terms();
    let mut best = 0.0;
    let mut arg = 0;
    for k in 1..=k_max {
        let v = k as f64 * rate + lemma4.n2[k - 1] - ml[k - 1];
        if v > best {
            best = v;
            arg = k;
        }
    }
    let log_e = libm::log(d) + best;
    let converged = arg < k_max / 2;
    let certificate = BoundCertificate::new(libm::exp(log_e), sigma, row_l.clone(), Shift::MinusOne, CertKind::OdeField)
        .map_err(|e| Error::stage("convert", e))?;
    Ok(BeurlingOdeBound {
        nu,
        mu,
        lambda,
        log_h,
        log_j,
        log_l,
        l0_clipped,
        c_prime,
        lemma4,
        roumieu,
        log_e,
        window: k_max,
        converged,
        certificate,
    })
}

/// Smallest `nu`, then smallest `mu` in `nu..=lambda`, with bounded root
/// comparisons `nu -> mu` and `mu -> lambda`.
fn choose_rows(m: &WeightMatrix, lambda: usize, cfg: &CheckConfig) -> Result<(usize, usize)> {
    for nu in 0..=lambda {
        for mu in nu..=lambda {
            let a = pair_root_verdict(m.row(nu), m.row(mu), cfg)?;
            if a.status != Status::HoldsUpTo {
                continue;
            }
            let b = pair_root_verdict(m.row(mu), m.row(lambda), cfg)?;
            if b.status == Status::HoldsUpTo {
                return Ok((nu, mu));
            }
        }
    }
    Err(Error::NoRaiWitness {
        lambda,
        reason: String::from("no rows nu <= mu <= lambda with bounded root comparisons"),
    })
}

/// Exact `[t^j] Y` times `j!` from the binomial series of
/// `sqrt(1 - 2 A eta p t)`: an independent route to [`majorant_y_exact`].
pub fn majorant_y_binomial(a: &BigRational, eta_p: &BigRational, j: usize) -> BigRational {
    if j == 0 {
        return a.clone();
    }
    // binom(1/2, j) = prod_{i<j} (1/2 - i) / j!
    let half = BigRational::new(1.into(), 2.into());
    let mut binom = BigRational::one();
    for i in 0..j {
        binom = binom * (half.clone() - BigRational::from_i64(i as i64)) / BigRational::from_i64(i as i64 + 1);
    }
    let x = BigRational::from_i64(-2) * a.clone() * eta_p.clone();
    let mut xj = BigRational::one();
    for _ in 0..j {
        xj = xj * x.clone();
    }
    let mut fact = BigRational::one();
    for i in 1..=j {
        fact = fact * BigRational::from_i64(i as i64);
    }
    -(binom * xj) / eta_p.clone() * fact
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{ode_solve, BivariateField, Jet};
    use crate::numeric::rational;

    #[test]
    fn low_order_values() {
        let spec = MajorantSpec { a: 3.0, eta: 2.0, p: 1.5 };
        let d = majorant_derivatives(spec, 3).unwrap();
        assert!((d[0].0 - libm::log(3.0)).abs() < 1e-12);
        assert!((d[1].0 - libm::log(3.0)).abs() < 1e-12);
        assert!((d[2].0 - libm::log(9.0 * 3.0)).abs() < 1e-12);
        assert!((d[1].1 - libm::log(3.0 * 2.0 * 1.5)).abs() < 1e-12);
    }

    #[test]
    fn doubling_a_scales_by_two_to_the_j() {
        let s1 = MajorantSpec { a: 1.5, eta: 1.0, p: 2.0 };
        let s2 = MajorantSpec { a: 3.0, ..s1 };
        let (d1, d2) = (majorant_derivatives(s1, 10).unwrap(), majorant_derivatives(s2, 10).unwrap());
        for j in 1..=10 {
            assert!((d2[j].0 - d1[j].0 - j as f64 * core::f64::consts::LN_2).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_matches_binomial_series_and_float_form() {
        let (a, ep) = (rational(5, 2), rational(3, 7));
        for j in 0..=15 {
            let exact = majorant_y_exact(&a, &ep, j);
            assert_eq!(exact, majorant_y_binomial(&a, &ep, j), "j = {j}");
            let float = majorant_derivatives(MajorantSpec { a: 2.5, eta: 1.0, p: 3.0 / 7.0 }, j).unwrap()[j].0;
            assert!((exact.ln_abs() - float).abs() < 1e-10);
        }
    }

    #[test]
    fn majorant_solves_its_ode() {
        // Z = Y - A solves Z' = A / (1 - eta p Z), Z(0) = 0
        let (a, ep) = (rational(2, 1), rational(3, 5));
        let k = 12;
        let mut col = Vec::new();
        let mut c = a.clone();
        for _ in 0..=k {
            col.push(alloc::vec![c.clone()]);
            c = c * ep.clone();
        }
        let field = BivariateField { coeffs: col, order: Some(k) };
        let z = ode_solve(&field, rational(0, 1), k).unwrap();
        let mut fact = rational(1, 1);
        for j in 1..=k {
            fact = fact * rational(j as i64, 1);
            assert_eq!(z.coefficients()[j].clone() * fact.clone(), majorant_y_exact(&a, &ep, j));
        }
    }

    #[test]
    fn square_field_bound_dominates_solution() {
        let ones = WeightSequence::constant_one(64);
        let src = square_field_certificate(2.0, ones.clone()).unwrap();
        assert_eq!(src.c, 4.0);
        let cfg = CheckConfig::default().with_truncation(64);
        let out = ode_bound_roumieu(&src, &ones, 4.0, 1.0, &cfg).unwrap();
        assert_eq!(out.normalization, 2.0);
        assert_eq!(out.certificate.rho, 16.0);
        let jet = Jet::<BigRational>::geometric(40);
        let report = crate::jet::crosscheck_bound(&out.certificate, &jet).unwrap();
        assert!(report.pass);
        let halved = out.certificate.scaled(1e-30).unwrap();
        assert!(!crate::jet::crosscheck_bound(&halved, &jet).unwrap().pass);
    }

    #[test]
    fn beurling_bound_dominates_for_each_sigma() {
        let g = WeightSequence::gevrey(1.0, 1024).unwrap();
        let m = WeightMatrix::single(g);
        let cfg = CheckConfig::default().with_truncation(1024);
        let family = |row: &WeightSequence, rho: f64| {
            let m1 = libm::exp(row.log_terms()[1]);
            4f64.max(4.0 / rho).max(2.0 / (rho * rho * m1))
        };
        let jet = Jet::<BigRational>::geometric(40);
        let mut last_e = f64::NEG_INFINITY;
        for sigma in [1.0, 0.5, 0.25] {
            let b = ode_bound_beurling(&family, &m, 0, sigma, 2.0, &cfg).unwrap();
            assert!(b.l0_clipped);
            assert!(crate::jet::crosscheck_bound(&b.certificate, &jet).unwrap().pass);
            assert!(b.log_e > last_e);
            last_e = b.log_e;
        }
    }
}

//! Bounds for `S = T^{-1}` through the Neumann series, and for functional
//! inverses through the derivative recursion `R_k = (R_{k-1} S)'`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{rai_constant, rai_witness, BoundCertificate, CertKind, Shift};
use crate::error::{Error, Result};
use crate::fdb::Monomial;
use crate::matrix::WeightMatrix;
use crate::numeric::{ln_factorial, log_add, Scalar};
use crate::verdict::CheckConfig;

/// `s_k` bounding `|S^{(k)}| / k!`: `s_0 = A` and for `k >= 1`
/// `s_k = A sum_j sum_{alpha} (AC)^j rho^k prod M_{alpha_i}`, summed over
/// compositions by the first part.
pub fn neumann_exact_sums<T: Scalar>(a: &T, ac: &T, rho: &T, m: &[T], k_max: usize) -> Result<Vec<T>> {
    if m.len() <= k_max {
        return Err(Error::LengthMismatch(alloc::format!("need M_0..M_{k_max}")));
    }
    // w_a = AC rho^a M_a, t_k = sum_a w_a t_{k-a}
    let mut w = Vec::with_capacity(k_max + 1);
    let mut rp = T::one();
    w.push(T::zero());
    for item in m.iter().take(k_max + 1).skip(1) {
        rp = rp * rho.clone();
        w.push(ac.clone() * rp.clone() * item.clone());
    }
    let mut t = alloc::vec![T::zero(); k_max + 1];
    t[0] = T::one();
    for k in 1..=k_max {
        let mut s = T::zero();
        for i in 1..=k {
            s = s + w[i].clone() * t[k - i].clone();
        }
        t[k] = s;
    }
    Ok(t.into_iter().map(|x| a.clone() * x).collect())
}

/// Log-domain version of [`neumann_exact_sums`].
pub fn neumann_log_sums(ln_a: f64, ln_ac: f64, ln_rho: f64, log_m: &[f64], k_max: usize) -> Result<Vec<f64>> {
    if log_m.len() <= k_max {
        return Err(Error::LengthMismatch(alloc::format!("need M_0..M_{k_max}")));
    }
    let w: Vec<f64> = (0..=k_max)
        .map(|i| if i == 0 { f64::NEG_INFINITY } else { ln_ac + i as f64 * ln_rho + log_m[i] })
        .collect();
    let mut t = alloc::vec![f64::NEG_INFINITY; k_max + 1];
    t[0] = 0.0;
    for k in 1..=k_max {
        let mut s = f64::NEG_INFINITY;
        for i in 1..=k {
            s = log_add(s, w[i] + t[k - i]);
        }
        t[k] = s;
    }
    Ok(t.into_iter().map(|x| ln_a + x).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeumannBound {
    pub a: f64,
    /// Constants after the optional rescale `C' = 1/(2A)`, `rho' = 2 A C rho`.
    pub c: f64,
    pub rho: f64,
    pub rescaled: bool,
    /// `ln s_k` for `k = 0..=K`.
    pub log_sums: Vec<f64>,
    pub mu: usize,
    pub log_h: f64,
    /// `|S^{(k)}| <= D sigma^k k! M^mu_k`, `D = max(A, 1)`, `sigma = 2 rho H`.
    pub certificate: BoundCertificate,
}

/// Bound for `S = T^{-1}` given `|T^{(k)}| <= C rho^k k! M^lambda_k` and
/// `|S| <= A`.
///
/// `AC >= 1` is refused unless `rescale` is set, in which case the field
/// bound is restated with `C' = 1/(2A)` and `rho' = 2 A C rho` (valid for
/// `k >= 1` since `2AC >= 1`), giving `AC' = 1/2`.
#[allow(clippy::too_many_arguments)]
pub fn neumann_inverse_bound(
    a: f64,
    c: f64,
    rho: f64,
    m: &WeightMatrix,
    lambda: usize,
    k_max: usize,
    rescale: bool,
    cfg: &CheckConfig,
) -> Result<NeumannBound> {
    if !(a > 0.0 && c > 0.0 && rho > 0.0) {
        return Err(Error::param("A, C, rho", "must be positive"));
    }
    if k_max > cfg.dp_cap {
        return Err(Error::DpCapExceeded { k: k_max, cap: cfg.dp_cap });
    }
    let (c, rho, rescaled) = if a * c >= 1.0 {
        if !rescale {
            return Err(Error::Divergent { ac: a * c });
        }
        (1.0 / (2.0 * a), 2.0 * a * c * rho, true)
    } else {
        (c, rho, false)
    };
    let row = m.row(lambda);
    let log_m: Vec<f64> = (0..=k_max).map(|k| row.log_term(k)).collect::<Result<_>>()?;
    let log_sums = neumann_log_sums(libm::log(a), libm::log(a * c), libm::log(rho), &log_m, k_max)?;
    let w = rai_witness(m, lambda, cfg, false)?;
    let sigma = 2.0 * rho * libm::exp(w.log_h);
    let certificate = BoundCertificate::new(a.max(1.0), sigma, m.row(w.mu).clone(), Shift::None, CertKind::Reciprocal)?;
    Ok(NeumannBound {
        a,
        c,
        rho,
        rescaled,
        log_sums,
        mu: w.mu,
        log_h: w.log_h,
        certificate,
    })
}

/// `[z^k] (sum_b s_b z^b)^k`.
fn power_coefficient<T: Scalar>(s: &[T], k: usize) -> T {
    let mut acc = alloc::vec![T::zero(); k + 1];
    acc[0] = T::one();
    for _ in 0..k {
        let mut next = alloc::vec![T::zero(); k + 1];
        for (i, x) in acc.iter().enumerate() {
            if *x == T::zero() {
                continue;
            }
            for (b, sb) in s.iter().enumerate().take(k + 1 - i) {
                next[i + b] = next[i + b].clone() + x.clone() * sb.clone();
            }
        }
        acc = next;
    }
    acc[k].clone()
}

fn log_power_coefficient(log_s: &[f64], k: usize) -> f64 {
    let mut acc = alloc::vec![f64::NEG_INFINITY; k + 1];
    acc[0] = 0.0;
    for _ in 0..k {
        let mut next = alloc::vec![f64::NEG_INFINITY; k + 1];
        for (i, &x) in acc.iter().enumerate() {
            if x == f64::NEG_INFINITY {
                continue;
            }
            for (b, &sb) in log_s.iter().enumerate().take(k + 1 - i) {
                next[i + b] = log_add(next[i + b], x + sb);
            }
        }
        acc = next;
    }
    acc[k]
}

/// `k! sum_beta prod_i s_{beta_i}`: the bound on `|R_k|` after replacing
/// `N(beta)` by `k! / prod beta_i!` (given `|S^{(b)}| <= b! s_b`).
pub fn r_bound_relaxed<T: Scalar>(s: &[T], k: usize) -> T {
    let mut fact = T::one();
    for i in 1..=k {
        fact = fact * T::from_i64(i as i64);
    }
    fact * power_coefficient(s, k)
}

/// `sum_beta N(beta) prod_i beta_i! s_{beta_i}` from tabulated `N(beta)`.
pub fn r_bound_n_beta<T: Scalar>(s: &[T], n_beta: &BTreeMap<Monomial, u64>) -> T {
    let mut total = T::zero();
    for (beta, &count) in n_beta {
        let mut term = T::from_i64(count as i64);
        for &b in beta {
            let b = b as usize;
            let mut f = T::one();
            for i in 1..=b {
                f = f * T::from_i64(i as i64);
            }
            term = term * f * s[b].clone();
        }
        total = total + term;
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseBound {
    pub neumann: NeumannBound,
    /// `ln` bound on `|R_k|`, `k = 0..K-1`.
    pub log_r: Vec<f64>,
    /// `ln` bound on `|g^{(n)}|`, `n = 0..=K` (`-inf` at `n = 0`).
    pub log_g: Vec<f64>,
    pub nu: usize,
    pub log_h2: f64,
    /// `|g^{(n)}| <= A sigma^{n-1} (n-1)! M^nu_{n-1}`,
    /// `sigma = 4 D_S sigma_S H_2`.
    pub certificate: BoundCertificate,
}

/// Bound for the inverse `g` of `f` given
/// `|f^{(k)}| <= C rho^{k-1} (k-1)! M^lambda_{k-1}` and `|(f')^{-1}| <= A`.
///
/// `T = f'` satisfies the Neumann hypothesis with the same constants; then
/// `|g^{(n)}| <= A |R_{n-1}|` and `|R_k| <= k! [z^k] (sum s_b z^b)^k`.
#[allow(clippy::too_many_arguments)]
pub fn inverse_fn_bound(
    a: f64,
    c: f64,
    rho: f64,
    m: &WeightMatrix,
    lambda: usize,
    k_max: usize,
    rescale: bool,
    cfg: &CheckConfig,
) -> Result<InverseBound> {
    if k_max == 0 {
        return Err(Error::param("K", "need K >= 1"));
    }
    let neumann = neumann_inverse_bound(a, c, rho, m, lambda, k_max, rescale, cfg)
        .map_err(|e| Error::stage("neumann", e))?;
    let log_r: Vec<f64> = (0..k_max)
        .map(|k| ln_factorial(k as u128) + log_power_coefficient(&neumann.log_sums, k))
        .collect();
    let mut log_g = alloc::vec![f64::NEG_INFINITY; k_max + 1];
    for n in 1..=k_max {
        log_g[n] = libm::log(a) + log_r[n - 1];
    }
    let w2 = rai_witness(m, neumann.mu, cfg, false).map_err(|e| Error::stage("second witness", e))?;
    let log_h2 = rai_constant(m.row(neumann.mu), m.row(w2.mu), cfg.window, false);
    let sigma = 4.0 * neumann.certificate.c * neumann.certificate.rho * libm::exp(log_h2);
    let certificate = BoundCertificate::new(a, sigma, m.row(w2.mu).clone(), Shift::MinusOne, CertKind::Inverse)?;
    Ok(InverseBound {
        neumann,
        log_r,
        log_g,
        nu: w2.mu,
        log_h2,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdb::n_beta_coefficients;
    use crate::numeric::rational;
    use crate::seq::WeightSequence;
    use num_rational::BigRational;

    #[test]
    fn geometric_closed_form() {
        let ones: Vec<BigRational> = alloc::vec![rational(1, 1); 31];
        let a = rational(3, 1);
        let sums = neumann_exact_sums(&a, &rational(1, 2), &rational(1, 1), &ones, 30).unwrap();
        let mut expected = a.clone() * rational(1, 2);
        for k in 1..=30 {
            assert_eq!(sums[k], expected, "k = {k}");
            expected = expected * rational(3, 2);
        }
    }

    #[test]
    fn single_composition_at_k1() {
        let m: Vec<f64> = alloc::vec![1.0, 2.5, 7.0];
        let s = neumann_exact_sums(&2.0, &0.25, &3.0, &m, 2).unwrap();
        assert!((s[1] - 2.0 * 0.25 * 3.0 * 2.5).abs() < 1e-12);
        let l = neumann_log_sums(libm::log(2.0), libm::log(0.25), libm::log(3.0), &m.iter().map(|x| libm::log(*x)).collect::<Vec<_>>(), 2).unwrap();
        assert!((libm::exp(l[2]) - s[2]).abs() < 1e-9);
    }

    #[test]
    fn divergent_product_rejected() {
        let m = WeightMatrix::single(WeightSequence::gevrey(1.0, 64).unwrap());
        let cfg = CheckConfig::default().with_truncation(64);
        let e = neumann_inverse_bound(2.0, 1.0, 1.0, &m, 0, 20, false, &cfg).unwrap_err();
        assert_eq!(e, Error::Divergent { ac: 2.0 });
        let ok = neumann_inverse_bound(2.0, 1.0, 1.0, &m, 0, 20, true, &cfg).unwrap();
        assert!(ok.rescaled);
        assert!((ok.a * ok.c - 0.5).abs() < 1e-15);
    }

    #[test]
    fn simplified_certificate_dominates_sum() {
        let m = WeightMatrix::single(WeightSequence::gevrey(1.0, 128).unwrap());
        let cfg = CheckConfig::default().with_truncation(128);
        let b = neumann_inverse_bound(1.5, 0.5, 2.0, &m, 0, 60, false, &cfg).unwrap();
        for k in 0..=60 {
            let exact = b.log_sums[k] + ln_factorial(k as u128);
            assert!(b.certificate.log_bound(k).unwrap() >= exact - 1e-9, "k = {k}");
        }
    }

    #[test]
    fn n_beta_weighting_below_relaxation() {
        let s: Vec<BigRational> = (0..=6).map(|b| rational(b as i64 + 2, b as i64 + 1)).collect();
        for k in 1..=6 {
            let n = n_beta_coefficients(k).unwrap();
            let weighted = r_bound_n_beta(&s, &n);
            let relaxed = r_bound_relaxed(&s, k);
            assert!(weighted <= relaxed, "k = {k}");
        }
    }
}

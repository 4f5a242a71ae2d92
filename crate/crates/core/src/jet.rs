//! Truncated Taylor series at the origin (`c_k = f^{(k)}(0) / k!`).
//!
//! With `BigRational` coefficients every operation is exact; this is the
//! ground truth that derivative-bound certificates are checked against.

use alloc::vec::Vec;

use crate::bounds::BoundCertificate;
use crate::error::{Error, Result};
use crate::fdb::for_each_composition;
use crate::numeric::{ln_factorial, Scalar};
use crate::seq::{log_seminorm_m, WeightSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("coefficients", "a jet needs at least c_0"));
        }
        Ok(Jet { coeffs })
    }

    /// Zero jet of order `n` (coefficients `c_0..c_n`).
    pub fn zero(n: usize) -> Self {
        Jet {
            coeffs: alloc::vec![T::zero(); n + 1],
        }
    }

    pub fn constant(c: T, n: usize) -> Self {
        let mut j = Self::zero(n);
        j.coeffs[0] = c;
        j
    }

    /// `t` truncated at order `n`.
    pub fn identity(n: usize) -> Self {
        let mut j = Self::zero(n);
        if n >= 1 {
            j.coeffs[1] = T::one();
        }
        j
    }

    /// `e^t` truncated at order `n`.
    pub fn exp(n: usize) -> Self {
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut c = T::one();
        coeffs.push(c.clone());
        for k in 1..=n {
            c = c / T::from_i64(k as i64);
            coeffs.push(c.clone());
        }
        Jet { coeffs }
    }

    /// `1 / (1 - t)` truncated at order `n`.
    pub fn geometric(n: usize) -> Self {
        Jet {
            coeffs: alloc::vec![T::one(); n + 1],
        }
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn truncate(&self, n: usize) -> Self {
        Jet {
            coeffs: self.coeffs[..=n.min(self.order())].to_vec(),
        }
    }

    fn common(&self, other: &Self) -> usize {
        self.order().min(other.order())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.common(other);
        Jet {
            coeffs: (0..=n).map(|k| self.coeffs[k].clone() + other.coeffs[k].clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.common(other);
        Jet {
            coeffs: (0..=n).map(|k| self.coeffs[k].clone() - other.coeffs[k].clone()).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    /// Cauchy product truncated to the shorter order.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.common(other);
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut s = T::zero();
            for i in 0..=k {
                s = s + self.coeffs[i].clone() * other.coeffs[k - i].clone();
            }
            coeffs.push(s);
        }
        Jet { coeffs }
    }

    /// `1/a` from `a * (1/a) = 1`.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = self.coeffs[0].clone();
        if a0 == T::zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let n = self.order();
        let mut r: Vec<T> = Vec::with_capacity(n + 1);
        r.push(T::one() / a0.clone());
        for k in 1..=n {
            let mut s = T::zero();
            for i in 1..=k {
                s = s + self.coeffs[i].clone() * r[k - i].clone();
            }
            r.push(-(s / a0.clone()));
        }
        Ok(Jet { coeffs: r })
    }

    /// Derivative; the order drops by one (a constant stays a zero constant).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Jet {
            coeffs: (1..=self.order())
                .map(|k| self.coeffs[k].clone() * T::from_i64(k as i64))
                .collect(),
        }
    }

    fn require_centered(&self) -> Result<()> {
        if self.coeffs[0] != T::zero() {
            return Err(Error::NotCentered);
        }
        Ok(())
    }

    /// `self ∘ g` by Horner's scheme; `g` must vanish at the origin.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        g.require_centered()?;
        let n = self.common(g);
        let g = g.truncate(n);
        let mut acc = Self::constant(self.coeffs[n].clone(), n);
        for k in (0..n).rev() {
            acc = acc.mul(&g);
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeffs[k].clone();
        }
        Ok(acc)
    }

    /// `self ∘ g` through the explicit sum over compositions:
    /// `[t^k] = sum_j f_j sum_{alpha_1 + .. + alpha_j = k} prod g_{alpha_i}`.
    pub fn compose_fdb(&self, g: &Self) -> Result<Self> {
        g.require_centered()?;
        let n = self.common(g);
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(self.coeffs[0].clone());
        for k in 1..=n {
            let mut s = T::zero();
            for_each_composition(k, |alpha| {
                let mut term = self.coeffs[alpha.len()].clone();
                for &a in alpha {
                    term = term * g.coeffs[a].clone();
                }
                s = s.clone() + term;
            });
            coeffs.push(s);
        }
        Ok(Jet { coeffs })
    }

    /// `g` with `self ∘ g = t`, one coefficient at a time.
    pub fn functional_inverse(&self) -> Result<Self> {
        self.require_centered()?;
        let n = self.order();
        if n == 0 {
            return Ok(Self::zero(0));
        }
        let f1 = self.coeffs[1].clone();
        if f1 == T::zero() {
            return Err(Error::ZeroLinearTerm);
        }
        // pow[j][m] = [t^m] g^j, filled column by column
        let mut g: Vec<T> = alloc::vec![T::zero(); n + 1];
        let mut pow: Vec<Vec<T>> = alloc::vec![alloc::vec![T::zero(); n + 1]; n + 1];
        pow[0][0] = T::one();
        g[1] = T::one() / f1.clone();
        pow[1][1] = g[1].clone();
        for m in 2..=n {
            fill_power_column(&g, &mut pow, m, 2);
            let mut s = T::zero();
            for j in 2..=m {
                s = s + self.coeffs[j].clone() * pow[j][m].clone();
            }
            g[m] = -(s / f1.clone());
            pow[1][m] = g[m].clone();
        }
        Ok(Jet { coeffs: g })
    }

    /// `ln sup_k k! |c_k| / (rho^k k! M_k)` for each `rho`, with the pareto
    /// front of `(rho, ln C)` pairs (smaller `rho` first).
    pub fn growth_profile(&self, w: &WeightSequence, rhos: &[f64]) -> Result<Vec<(f64, f64)>> {
        let mut sorted = rhos.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite rho"));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for rho in sorted {
            let c = log_seminorm_m(self, w, rho)?;
            if out.last().map_or(true, |&(_, best)| c < best) {
                out.push((rho, c));
            }
        }
        Ok(out)
    }
}

/// Extend column `m` of `pow[j][m] = [t^m] g^j` for `j >= j_min`, assuming
/// `g_1..g_{m-1}` and all columns `< m` are known and `g_0 = 0`.
fn fill_power_column<T: Scalar>(g: &[T], pow: &mut [Vec<T>], m: usize, j_min: usize) {
    for j in j_min..=m {
        let mut s = T::zero();
        for i in 1..=(m - j + 1) {
            s = s + g[i].clone() * pow[j - 1][m - i].clone();
        }
        pow[j][m] = s;
    }
}

/// `F(x, t) = sum_{a,b} F_{a,b} (x - x_0)^a t^b`.
///
/// `order = Some(n)` states that every coefficient with `a + b <= n` is
/// supplied (missing entries are zero); `None` means the field is an exact
/// polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateField<T> {
    pub coeffs: Vec<Vec<T>>,
    pub order: Option<usize>,
}

impl<T: Scalar> BivariateField<T> {
    fn get(&self, a: usize, b: usize) -> Option<&T> {
        self.coeffs.get(a)?.get(b)
    }

    /// Field of `x' = -f'(t) x^2` around `x_0 = 1/f(0)`.
    pub fn reciprocal_field(f: &Jet<T>) -> Result<(Self, T)> {
        let f0 = f.coefficients()[0].clone();
        if f0 == T::zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let x0 = T::one() / f0;
        let df = f.derivative();
        let neg: Vec<T> = df.coefficients().iter().map(|c| -c.clone()).collect();
        let two = T::from_i64(2);
        let coeffs = alloc::vec![
            neg.iter().map(|c| c.clone() * x0.clone() * x0.clone()).collect(),
            neg.iter().map(|c| c.clone() * two.clone() * x0.clone()).collect(),
            neg,
        ];
        let order = if f.order() == 0 { 0 } else { f.order() - 1 };
        Ok((
            BivariateField {
                coeffs,
                order: Some(order),
            },
            x0,
        ))
    }
}

/// Taylor coefficients of the solution of `x' = F(x, t)`, `x(0) = x_0`, up
/// to order `k_max`, from `(k+1) c_{k+1} = [t^k] F(x(t), t)`.
pub fn ode_solve<T: Scalar>(field: &BivariateField<T>, x0: T, k_max: usize) -> Result<Jet<T>> {
    if let Some(have) = field.order {
        let needed = k_max.saturating_sub(1);
        if k_max > 0 && have < needed {
            return Err(Error::UnderTruncated { needed, have });
        }
    }
    // y = x - x0, pow[a][m] = [t^m] y^a
    let mut y: Vec<T> = alloc::vec![T::zero(); k_max + 1];
    let mut pow: Vec<Vec<T>> = alloc::vec![alloc::vec![T::zero(); k_max + 1]; k_max + 1];
    pow[0][0] = T::one();
    for k in 0..k_max {
        if k >= 1 {
            pow[1][k] = y[k].clone();
            fill_power_column(&y, &mut pow, k, 2);
        }
        let mut s = T::zero();
        for a in 0..=k {
            for b in 0..=(k - a) {
                let Some(f) = field.get(a, b) else { continue };
                if *f == T::zero() {
                    continue;
                }
                s = s + f.clone() * pow[a][k - b].clone();
            }
        }
        y[k + 1] = s / T::from_i64(k as i64 + 1);
    }
    y[0] = x0;
    Jet::new(y)
}

/// `1/f` by solving `x' = -f'(t) x^2`.
pub fn reciprocal_via_ode<T: Scalar>(f: &Jet<T>) -> Result<Jet<T>> {
    let (field, x0) = BivariateField::reciprocal_field(f)?;
    ode_solve(&field, x0, f.order())
}

/// Per-order comparison of a certificate with `k! |c_k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    /// `(k, ln bound_k, ln k!|c_k|)`; the oracle value is `-inf` for zeros.
    pub rows: Vec<(usize, f64, f64)>,
    pub pass: bool,
    pub first_violation: Option<usize>,
    /// Smallest `ln bound_k - ln k!|c_k|` over nonzero coefficients.
    pub min_margin: f64,
}

impl DominanceReport {
    pub fn margin(&self, k: usize) -> f64 {
        let (_, b, o) = self.rows[k];
        b - o
    }
}

/// PASS iff the certificate bounds every derivative `k! |c_k|`.
pub fn crosscheck_bound<T: Scalar>(cert: &BoundCertificate, jet: &Jet<T>) -> Result<DominanceReport> {
    let mut rows = Vec::with_capacity(jet.order() + 1);
    let mut first_violation = None;
    let mut min_margin = f64::INFINITY;
    for (k, c) in jet.coefficients().iter().enumerate() {
        let bound = cert.log_bound(k)?;
        let oracle = c.ln_abs() + ln_factorial(k as u128);
        if oracle > f64::NEG_INFINITY {
            let margin = bound - oracle;
            min_margin = min_margin.min(margin);
            if margin < 0.0 && first_violation.is_none() {
                first_violation = Some(k);
            }
        }
        rows.push((k, bound, oracle));
    }
    Ok(DominanceReport {
        rows,
        pass: first_violation.is_none(),
        first_violation,
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        rational(n, d)
    }

    fn jet(c: &[(i64, i64)]) -> Jet<Q> {
        Jet::new(c.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    #[test]
    fn geometric_times_one_minus_t() {
        let a = jet(&[(1, 1), (-1, 1), (0, 1), (0, 1), (0, 1)]);
        let prod = a.mul(&Jet::geometric(4));
        assert_eq!(prod, Jet::constant(q(1, 1), 4));
    }

    #[test]
    fn reciprocal_of_exp() {
        let r = Jet::<Q>::exp(30).reciprocal().unwrap();
        let mut fact = q(1, 1);
        for k in 0..=30 {
            if k > 0 {
                fact = fact * q(k, 1);
            }
            let sign = if k % 2 == 0 { 1 } else { -1 };
            assert_eq!(r.coefficients()[k as usize], q(sign, 1) / fact.clone());
        }
        assert_eq!(Jet::<Q>::zero(3).reciprocal().unwrap_err(), Error::ZeroConstantTerm);
    }

    #[test]
    fn exp_of_t_plus_t2_cubic() {
        let g = jet(&[(0, 1), (1, 1), (1, 1), (0, 1)]);
        let e = Jet::<Q>::exp(3);
        let h = e.compose(&g).unwrap();
        let f = e.compose_fdb(&g).unwrap();
        assert_eq!(h, f);
        // 1/6 (t^3) + t * t^2 from the square term
        assert_eq!(h.coefficients()[3], q(1, 6) + q(1, 1));
    }

    #[test]
    fn compose_identity_and_centering() {
        let g = jet(&[(0, 1), (2, 3), (-1, 5), (7, 2)]);
        assert_eq!(Jet::identity(3).compose(&g).unwrap(), g);
        let bad = jet(&[(1, 1), (1, 1)]);
        assert_eq!(g.compose(&bad).unwrap_err(), Error::NotCentered);
    }

    #[test]
    fn inverse_of_t_over_one_minus_t() {
        // t/(1-t) = t + t^2 + ...
        let mut c = alloc::vec![q(1, 1); 21];
        c[0] = q(0, 1);
        let f = Jet::new(c).unwrap();
        let g = f.functional_inverse().unwrap();
        for k in 1..=20 {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert_eq!(g.coefficients()[k], q(sign, 1));
        }
        assert_eq!(f.compose(&g).unwrap(), Jet::identity(20));
        assert_eq!(g.compose(&f).unwrap(), Jet::identity(20));
        let flat = jet(&[(0, 1), (0, 1), (1, 1)]);
        assert_eq!(flat.functional_inverse().unwrap_err(), Error::ZeroLinearTerm);
    }

    #[test]
    fn ode_examples() {
        let zero = BivariateField::<Q> {
            coeffs: Vec::new(),
            order: None,
        };
        assert_eq!(ode_solve(&zero, q(3, 1), 5).unwrap(), Jet::constant(q(3, 1), 5));
        // x' = x^2 around x0 = 1: (1 + y)^2 = 1 + 2y + y^2
        let xsq = BivariateField {
            coeffs: alloc::vec![alloc::vec![q(1, 1)], alloc::vec![q(2, 1)], alloc::vec![q(1, 1)]],
            order: None,
        };
        assert_eq!(ode_solve(&xsq, q(1, 1), 40).unwrap(), Jet::geometric(40));
        let short = BivariateField {
            coeffs: xsq.coeffs.clone(),
            order: Some(3),
        };
        assert_eq!(
            ode_solve(&short, q(1, 1), 10).unwrap_err(),
            Error::UnderTruncated { needed: 9, have: 3 }
        );
    }

    #[test]
    fn reciprocal_routes_agree_on_exp() {
        let e = Jet::<Q>::exp(30);
        assert_eq!(reciprocal_via_ode(&e).unwrap(), e.reciprocal().unwrap());
    }

    #[test]
    fn growth_profile_examples() {
        let ones = WeightSequence::constant_one(20);
        let p = Jet::<Q>::geometric(20).growth_profile(&ones, &[1.0]).unwrap();
        assert!(p[0].1.abs() < 1e-12);
        let p = Jet::<Q>::exp(20).growth_profile(&ones, &[1.0, 2.0]).unwrap();
        assert!(p[0].1.abs() < 1e-12);
        let p = Jet::<Q>::zero(5).growth_profile(&ones, &[1.0]).unwrap();
        assert_eq!(p[0].1, f64::NEG_INFINITY);
    }
}

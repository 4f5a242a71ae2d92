//! Weight functions `omega`, carried through `phi(t) = omega(e^t)`.
//!
//! `phi` is stored as a convex piecewise-linear function with a finite tail
//! slope. Its Young conjugate is computed exactly and is only valid up to
//! that tail slope.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::matrix::WeightMatrix;
use crate::numeric::{ln_factorial, Scalar};
use crate::seq::WeightSequence;
use crate::verdict::{
    bounded_rule, vanishing_rule, CheckConfig, Checkpoint, Status, Verdict,
    Witness,
};

/// Piecewise-linear function through `(t_i, y_i)` with `t_0 = 0`, continued
/// with `tail_slope` after the last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    knots: Vec<(T, T)>,
    tail_slope: T,
}

impl<T: Scalar> PiecewiseLinear<T> {
    pub fn new(knots: Vec<(T, T)>, tail_slope: T) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::param("knots", "need at least one knot"));
        }
        if knots[0].0 != T::zero() || knots[0].1 != T::zero() {
            return Err(Error::param("knots", "first knot must be (0, 0)"));
        }
        if let Some(i) = (1..knots.len()).find(|&i| knots[i].0 <= knots[i - 1].0) {
            return Err(Error::param(
                "knots",
                alloc::format!("abscissae must increase strictly (knot {i})"),
            ));
        }
        Ok(PiecewiseLinear { knots, tail_slope })
    }

    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }

    pub fn tail_slope(&self) -> &T {
        &self.tail_slope
    }

    /// Segment slopes followed by the tail slope.
    pub fn slopes(&self) -> Vec<T> {
        let mut s: Vec<T> = self
            .knots
            .windows(2)
            .map(|w| (w[1].1.clone() - w[0].1.clone()) / (w[1].0.clone() - w[0].0.clone()))
            .collect();
        s.push(self.tail_slope.clone());
        s
    }

    /// First knot at which the slope decreases, or where the first slope is
    /// negative (knot 0).
    pub fn convexity_violation(&self) -> Option<usize> {
        let s = self.slopes();
        if s[0] < T::zero() {
            return Some(0);
        }
        (1..s.len()).find(|&i| s[i] < s[i - 1])
    }

    pub fn eval(&self, t: &T) -> T {
        let n = self.knots.len();
        let last = &self.knots[n - 1];
        if *t >= last.0 {
            return last.1.clone() + self.tail_slope.clone() * (t.clone() - last.0.clone());
        }
        let i = self.knots.partition_point(|(ti, _)| ti <= t).max(1);
        let (t0, y0) = &self.knots[i - 1];
        let (t1, y1) = &self.knots[i];
        y0.clone() + (y1.clone() - y0.clone()) * (t.clone() - t0.clone()) / (t1.clone() - t0.clone())
    }

    /// Exact conjugate `u -> sup_{s >= 0} (us - phi(s))` on `[0, tail_slope]`.
    ///
    /// On `[sigma_i, sigma_{i+1}]` the supremum sits at knot `t_i`, so the
    /// conjugate has knots `(sigma_i, sigma_i t_{i-1} - phi_{i-1})`.
    pub fn conjugate(&self) -> Result<Conjugate<T>> {
        if let Some(knot) = self.convexity_violation() {
            return Err(Error::NonConvex { knot });
        }
        let slopes = self.slopes();
        let mut knots: Vec<(T, T)> = alloc::vec![(T::zero(), T::zero())];
        for (i, s) in slopes.iter().enumerate() {
            let (ti, yi) = &self.knots[i];
            let value = s.clone() * ti.clone() - yi.clone();
            let last = knots.last().expect("non-empty");
            if *s == last.0 {
                continue;
            }
            knots.push((s.clone(), value));
        }
        Ok(Conjugate {
            knots,
            horizon: self.tail_slope.clone(),
        })
    }
}

/// Conjugate `phi*` as a convex piecewise-linear function on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugate<T> {
    knots: Vec<(T, T)>,
    horizon: T,
}

impl<T: Scalar> Conjugate<T> {
    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }

    pub fn horizon(&self) -> &T {
        &self.horizon
    }

    /// `phi*(u)`; arguments past the horizon are refused.
    pub fn eval(&self, u: &T) -> Result<T> {
        if *u > self.horizon || *u < T::zero() {
            return Err(Error::OutOfHorizon {
                u: u.to_f64(),
                horizon: self.horizon.to_f64(),
            });
        }
        let n = self.knots.len();
        if n == 1 {
            return Ok(T::zero());
        }
        let i = self.knots.partition_point(|(ui, _)| ui <= u).clamp(1, n - 1);
        let (u0, y0) = &self.knots[i - 1];
        let (u1, y1) = &self.knots[i];
        Ok(y0.clone() + (y1.clone() - y0.clone()) * (u.clone() - u0.clone()) / (u1.clone() - u0.clone()))
    }

    /// `phi**(s) = max over conjugate knots of (s u_i - phi*(u_i))`.
    pub fn biconjugate(&self, s: &T) -> T {
        self.knots
            .iter()
            .map(|(u, y)| s.clone() * u.clone() - y.clone())
            .fold(None, |acc: Option<T>, v| match acc {
                Some(a) if a >= v => Some(a),
                _ => Some(v),
            })
            .expect("non-empty")
    }

    /// `phi*(rho k) / rho`, the log weight of the associated sequence.
    pub fn scaled(&self, rho: &T, k: usize) -> Result<T> {
        let u = rho.clone() * T::from_i64(k as i64);
        Ok(self.eval(&u)? / rho.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `omega(x) = x^{1/s} - 1` on `x >= 1`, i.e. `phi(t) = e^{t/s} - 1`.
    Power { s: f64 },
}

impl Family {
    /// `phi*(u) = s u (ln(s u) - 1) + 1` for `s u >= 1`, else 0.
    pub fn conjugate(&self, u: f64) -> f64 {
        match *self {
            Family::Power { s } => {
                let su = s * u;
                if su <= 1.0 {
                    0.0
                } else {
                    su * (libm::log(su) - 1.0) + 1.0
                }
            }
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        match *self {
            Family::Power { s } => libm::expm1(t / s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    pub phi: PiecewiseLinear<f64>,
    pub family: Option<Family>,
}

impl WeightFunction {
    pub fn from_knots(knots: Vec<(f64, f64)>, tail_slope: f64, family: Option<Family>) -> Result<Self> {
        if knots.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) || !tail_slope.is_finite() {
            return Err(Error::param("knots", "values must be finite"));
        }
        Ok(WeightFunction {
            phi: PiecewiseLinear::new(knots, tail_slope)?,
            family,
        })
    }

    /// `phi(t) = e^{t/s} - 1` sampled at `n + 1` equispaced knots on
    /// `[0, t_max]`, tail slope equal to `phi'(t_max)`.
    pub fn power(s: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(s > 0.0) || !(t_max > 0.0) || n == 0 {
            return Err(Error::param("power", "need s > 0, t_max > 0, n >= 1"));
        }
        let fam = Family::Power { s };
        let knots = (0..=n)
            .map(|i| {
                let t = t_max * i as f64 / n as f64;
                (t, fam.phi(t))
            })
            .collect();
        let tail = libm::exp(t_max / s) / s;
        Self::from_knots(knots, tail, Some(fam))
    }

    /// `omega(x) = max(0, ln x)`, i.e. `phi(t) = t`.
    pub fn logarithmic(t_max: f64) -> Result<Self> {
        Self::from_knots(alloc::vec![(0.0, 0.0), (t_max, t_max)], 1.0, None)
    }

    /// `omega(x) = phi(ln x)` for `x >= 1`, 0 below.
    pub fn omega(&self, x: f64) -> f64 {
        if x <= 1.0 {
            0.0
        } else {
            self.phi.eval(&libm::log(x))
        }
    }

    pub fn last_knot(&self) -> f64 {
        self.phi.knots().last().expect("non-empty").0
    }

    pub fn conjugate(&self) -> Result<Conjugate<f64>> {
        self.phi.conjugate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaConditions {
    pub omega1: Verdict,
    pub omega2: Verdict,
    pub omega3: Verdict,
    pub big_o_t: Verdict,
    pub little_o_t: Verdict,
}

impl OmegaConditions {
    pub fn entries(&self) -> [(&'static str, &Verdict); 5] {
        [
            ("omega1", &self.omega1),
            ("omega2", &self.omega2),
            ("omega3", &self.omega3),
            ("O(t)", &self.big_o_t),
            ("o(t)", &self.little_o_t),
        ]
    }
}

/// Grid `t = m ln 2` for `m = 1..` inside the knot range.
fn log_time_grid(w: &WeightFunction, extra: f64) -> Vec<f64> {
    let end = w.last_knot() - extra;
    let step = crate::numeric::LN_2;
    (1..).map(|m| m as f64 * step).take_while(|&t| t <= end).collect()
}

fn grid_checkpoints(n: usize) -> Vec<usize> {
    // positions in the grid, thinned geometrically
    let mut out = Vec::new();
    let mut c = 4usize;
    while c < n {
        out.push(c);
        c *= 2;
    }
    if n >= 1 {
        out.push(n);
    }
    out
}

fn running_sup_verdict(values: &[(f64, f64)], cfg: &CheckConfig) -> Verdict {
    // values: (grid point, stat)
    let n = values.len();
    let mut sup = f64::NEG_INFINITY;
    let mut arg = 0usize;
    let mut sups = Vec::with_capacity(n);
    for (i, &(_, s)) in values.iter().enumerate() {
        if s > sup {
            sup = s;
            arg = i;
        }
        sups.push((sup, arg));
    }
    let track: Vec<Checkpoint> = grid_checkpoints(n)
        .into_iter()
        .map(|c| Checkpoint {
            index: c.into(),
            stat: sups[c - 1].0,
        })
        .collect();
    let status = bounded_rule(&track, cfg);
    let witness = sups.last().map(|&(s, i)| Witness::exact(i + 1, i + 1, s));
    Verdict::new(status, n, track, witness)
}

fn pointwise_verdict(values: &[(f64, f64)], cfg: &CheckConfig) -> Verdict {
    let n = values.len();
    let track: Vec<Checkpoint> = grid_checkpoints(n)
        .into_iter()
        .map(|c| Checkpoint {
            index: c.into(),
            stat: values[c - 1].1,
        })
        .collect();
    let status = vanishing_rule(&track, cfg);
    let witness = Some(Witness::exact(n, n, values.last().map_or(0.0, |v| v.1)));
    Verdict::new(status, n, track, witness)
}

/// (omega1) `omega(2x) = O(omega(x))`, (omega2) `ln x = o(omega(x))`,
/// (omega3) convexity of `phi`, and `omega(x) = O(x)`, `omega(x) = o(x)`.
///
/// Trend statistics run over `x = 2^m` inside the knot range; a family tag
/// replaces the trend status by the closed-form answer.
pub fn check_omega_conditions(w: &WeightFunction, cfg: &CheckConfig) -> Result<OmegaConditions> {
    if w.phi.knots().len() < 3 {
        return Err(Error::param("knots", "need at least 3 knots"));
    }
    let ln2 = crate::numeric::LN_2;
    let phi = |t: f64| w.phi.eval(&t);

    let omega3 = match w.phi.convexity_violation() {
        Some(knot) => {
            let s = w.phi.slopes();
            let drop = if knot == 0 { -s[0] } else { s[knot - 1] - s[knot] };
            Verdict::new(
                Status::Refuted,
                w.phi.knots().len(),
                alloc::vec![Checkpoint { index: knot.into(), stat: drop }],
                Some(Witness::exact(knot, knot, drop)),
            )
        }
        None => Verdict::new(Status::HoldsUpTo, w.phi.knots().len(), Vec::new(), None),
    };

    let grid = log_time_grid(w, ln2);
    let positive: Vec<f64> = grid.iter().copied().filter(|&t| phi(t) > 0.0).collect();
    if positive.len() < 4 {
        return Err(Error::param("knots", "knot range too short for the t-grid"));
    }
    let r1: Vec<(f64, f64)> = positive
        .iter()
        .map(|&t| (t, libm::log(phi(t + ln2)) - libm::log(phi(t))))
        .collect();
    let r2: Vec<(f64, f64)> = positive
        .iter()
        .map(|&t| (t, libm::log(t) - libm::log(phi(t))))
        .collect();
    let ro: Vec<(f64, f64)> = positive
        .iter()
        .map(|&t| (t, libm::log(phi(t)) - t))
        .collect();

    let mut out = OmegaConditions {
        omega1: running_sup_verdict(&r1, cfg),
        omega2: pointwise_verdict(&r2, cfg),
        omega3,
        big_o_t: running_sup_verdict(&ro, cfg),
        little_o_t: pointwise_verdict(&ro, cfg),
    };
    if let Some(Family::Power { s }) = w.family {
        let verdicts = [
            (&mut out.omega1, true),
            (&mut out.omega2, true),
            (&mut out.big_o_t, s >= 1.0),
            (&mut out.little_o_t, s > 1.0),
        ];
        for (v, holds) in verdicts {
            let status = if holds { Status::HoldsUpTo } else { Status::Refuted };
            *v = v.clone().with_status(status).with_note("status from the closed form");
        }
    }
    Ok(out)
}

/// `sup omega(lambda x) / (lambda omega(x))` over `lambda = 2^0..2^10` and a
/// geometric `x`-grid starting at `cfg.t0`, as a running supremum in `x`.
pub fn check_thm3_condition(w: &WeightFunction, cfg: &CheckConfig) -> Result<Verdict> {
    let ln2 = crate::numeric::LN_2;
    let end = w.last_knot();
    let start = libm::log(cfg.t0.max(1.0 + 1e-9));
    let mut values = Vec::new();
    let mut t = start;
    while t + ln2 <= end {
        let base = w.phi.eval(&t);
        if base > 0.0 {
            let mut best = f64::NEG_INFINITY;
            for e in 0..=10 {
                let shift = e as f64 * ln2;
                if t + shift > end {
                    break;
                }
                let v = libm::log(w.phi.eval(&(t + shift))) - shift - libm::log(base);
                best = best.max(v);
            }
            values.push((t, best));
        }
        t += ln2;
    }
    if values.len() < 4 {
        return Err(Error::param("knots", "knot range too short for the grid"));
    }
    let verdict = running_sup_verdict(&values, cfg);
    Ok(match w.family {
        Some(Family::Power { s }) => {
            let status = if s >= 1.0 { Status::HoldsUpTo } else { Status::Refuted };
            verdict.with_status(status).with_note("status from the closed form")
        }
        None => verdict,
    })
}

/// `omega(a + b) <= omega(a) + omega(b)` over pairs from a geometric grid of
/// ratio `2^{1/4}` on `[lo, hi]`. One violation beyond relative slack `1e-12`
/// refutes, since the condition carries no constant.
pub fn check_subadditive(omega: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Verdict> {
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::param("grid", "need 0 < lo < hi"));
    }
    let ratio = libm::pow(2.0, 0.25);
    let mut grid = Vec::new();
    let mut x = lo;
    while x <= hi {
        grid.push(x);
        x *= ratio;
    }
    let mut sup = f64::NEG_INFINITY;
    let mut witness = None;
    let mut violated = false;
    let mut track = Vec::new();
    for (ib, &b) in grid.iter().enumerate() {
        for &a in &grid[..=ib] {
            let lhs = omega(a + b);
            let rhs = omega(a) + omega(b);
            let excess = if rhs > 0.0 {
                libm::log(lhs) - libm::log(rhs)
            } else if lhs > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if excess > sup {
                sup = excess;
                witness = Some((a, b, excess));
            }
            if lhs - rhs > 1e-12 * rhs.abs().max(1.0) {
                violated = true;
            }
        }
        track.push(Checkpoint {
            index: (ib + 1).into(),
            stat: sup,
        });
    }
    let status = if violated { Status::Refuted } else { Status::HoldsUpTo };
    let w = witness.map(|(a, b, v)| Witness {
        j: crate::numeric::SeqIndex::Huge { ln: libm::log(a) },
        k: crate::numeric::SeqIndex::Huge { ln: libm::log(b) },
        value: v,
    });
    Ok(Verdict::new(status, grid.len(), track, w))
}

/// `ln sup_k |f^{(k)}| exp(-phi*(rho k)/rho)` for a jet `c_k = f^{(k)}/k!`.
pub fn log_seminorm_omega<T: Scalar>(jet: &Jet<T>, conj: &Conjugate<f64>, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::param("rho", "must be positive"));
    }
    let mut best = f64::NEG_INFINITY;
    for (k, c) in jet.coefficients().iter().enumerate() {
        let w = conj.scaled(&rho, k)?;
        let lc = c.ln_abs();
        if lc == f64::NEG_INFINITY {
            continue;
        }
        best = best.max(lc + ln_factorial(k as u128) - w);
    }
    Ok(best)
}

/// A row cut short because `rho K` passed the conjugate horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonWarning {
    pub rho: f64,
    pub truncated_at: usize,
}

/// `Omega^rho_k = exp(phi*(rho k)/rho) / k!` for each `rho`.
pub fn omega_matrix(
    w: &WeightFunction,
    rhos: &[f64],
    k_max: usize,
) -> Result<(WeightMatrix, Vec<HorizonWarning>)> {
    if rhos.is_empty() || rhos.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::param("rhos", "need positive values"));
    }
    let conj = w.conjugate()?;
    let horizon = *conj.horizon();
    let mut sorted: Vec<f64> = rhos.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut rows = Vec::with_capacity(sorted.len());
    let mut warnings = Vec::new();
    for &rho in &sorted {
        let reach = libm::floor(horizon / rho) as usize;
        let k_row = k_max.min(reach);
        if k_row < k_max {
            warnings.push(HorizonWarning { rho, truncated_at: k_row });
        }
        let mut terms = Vec::with_capacity(k_row + 1);
        for k in 0..=k_row {
            terms.push(conj.scaled(&rho, k)? - ln_factorial(k as u128));
        }
        terms[0] = 0.0;
        let label: String = alloc::format!("omega(rho={rho})");
        rows.push(WeightSequence::from_log_terms(label, terms, false)?);
    }
    Ok((WeightMatrix::new(sorted, rows)?, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;
    use num_rational::BigRational;

    fn pl(points: &[(i64, i64)], tail: i64) -> PiecewiseLinear<BigRational> {
        PiecewiseLinear::new(
            points.iter().map(|&(t, y)| (rational(t, 1), rational(y, 1))).collect(),
            rational(tail, 1),
        )
        .unwrap()
    }

    #[test]
    fn single_segment_conjugate_vanishes() {
        let f = pl(&[(0, 0), (4, 12)], 3);
        let c = f.conjugate().unwrap();
        for u in 0..=3 {
            assert_eq!(c.eval(&rational(u, 1)).unwrap(), rational(0, 1));
        }
        assert!(c.eval(&rational(4, 1)).is_err());
    }

    #[test]
    fn biconjugate_recovers_knots() {
        let f = pl(&[(0, 0), (1, 1), (3, 5), (4, 9)], 6);
        let c = f.conjugate().unwrap();
        for (t, y) in f.knots() {
            assert_eq!(&c.biconjugate(t), y);
        }
    }

    #[test]
    fn conjugate_slopes_are_breakpoints() {
        let f = pl(&[(0, 0), (1, 1), (3, 5), (4, 9)], 6);
        let c = PiecewiseLinear::new(c_knots(&f), rational(4, 1)).unwrap();
        let slopes = c.slopes();
        let breakpoints: Vec<BigRational> = f.knots().iter().map(|k| k.0.clone()).collect();
        assert_eq!(&slopes[..slopes.len() - 1], &breakpoints[..]);
    }

    fn c_knots(f: &PiecewiseLinear<BigRational>) -> Vec<(BigRational, BigRational)> {
        f.conjugate().unwrap().knots().to_vec()
    }

    #[test]
    fn non_convex_rejected() {
        let f = pl(&[(0, 0), (1, 3), (2, 4)], 5);
        assert_eq!(f.conjugate().unwrap_err(), Error::NonConvex { knot: 1 });
    }

    #[test]
    fn power_conjugate_converges() {
        let w = WeightFunction::power(2.0, 8.0, 10_000).unwrap();
        let c = w.conjugate().unwrap();
        let fam = w.family.unwrap();
        for i in 0..=100 {
            let u = i as f64 * 0.1;
            assert!((c.eval(&u).unwrap() - fam.conjugate(u)).abs() < 1e-6, "u = {u}");
        }
    }

    #[test]
    fn sqrt_weight_conditions() {
        let w = WeightFunction::power(2.0, 40.0, 400).unwrap();
        let r = check_omega_conditions(&w, &CheckConfig::default()).unwrap();
        for (_, v) in r.entries() {
            assert_eq!(v.status, Status::HoldsUpTo);
        }
    }

    #[test]
    fn log_weight_fails_omega2() {
        let w = WeightFunction::from_knots(
            alloc::vec![(0.0, 0.0), (10.0, 10.0), (40.0, 40.0)],
            1.0,
            None,
        )
        .unwrap();
        let r = check_omega_conditions(&w, &CheckConfig::default()).unwrap();
        assert_eq!(r.omega2.status, Status::Refuted);
        assert!(r.omega2.last_stat().unwrap().abs() < 1e-12);
    }

    #[test]
    fn decreasing_slope_refutes_omega3() {
        let w = WeightFunction::from_knots(
            alloc::vec![(0.0, 0.0), (5.0, 10.0), (10.0, 15.0), (40.0, 100.0)],
            3.0,
            None,
        )
        .unwrap();
        let r = check_omega_conditions(&w, &CheckConfig::default()).unwrap();
        assert_eq!(r.omega3.status, Status::Refuted);
        assert_eq!(r.omega3.witness.unwrap().k, 1usize.into());
    }

    #[test]
    fn subadditivity_examples() {
        let v = check_subadditive(|t| t, 0.5, 100.0).unwrap();
        assert_eq!(v.status, Status::HoldsUpTo);
        let v = check_subadditive(libm::sqrt, 0.5, 100.0).unwrap();
        assert_eq!(v.status, Status::HoldsUpTo);
        let v = check_subadditive(|t| t * t, 0.5, 100.0).unwrap();
        assert_eq!(v.status, Status::Refuted);
        let w = v.witness.unwrap();
        assert_eq!(w.j, w.k);
    }

    #[test]
    fn thm3_examples() {
        let cfg = CheckConfig::default();
        let sqrt = WeightFunction::power(2.0, 40.0, 400).unwrap();
        let v = check_thm3_condition(&sqrt, &cfg).unwrap();
        assert_eq!(v.status, Status::HoldsUpTo);
        assert!(v.constant_estimate <= 1e-12);
    }

    #[test]
    fn omega_matrix_first_column() {
        let w = WeightFunction::power(2.0, 16.0, 2000).unwrap();
        let (m, warn) = omega_matrix(&w, &[0.5, 1.0, 2.0], 200).unwrap();
        assert!(warn.is_empty());
        for row in m.rows() {
            assert_eq!(row.log_terms()[0], 0.0);
        }
    }
}

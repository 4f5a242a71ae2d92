//! Weight sequences in the log domain.

pub mod appendix_a;
mod checks;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, ln_factorial_per_index, SeqIndex};

pub use appendix_a::AppendixAParams;
pub use checks::{
    check_almost_increasing, check_almost_increasing_with_witness, check_growth,
    check_weakly_log_convex, compare_inclusion, dominance_threshold, log_seminorm_m,
    far_indices, pair_root_verdict, GrowthCondition, Relation,
};

/// Closed form attached to a sequence, used beyond the dense prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparseForm {
    /// `M_k = k!^s`.
    Gevrey { s: f64 },
    /// The polygon weight of [`appendix_a`].
    AppendixA,
}

impl SparseForm {
    pub fn family_name(&self) -> &'static str {
        match self {
            SparseForm::Gevrey { .. } => "gevrey",
            SparseForm::AppendixA => "appendix_a",
        }
    }

    /// `(ln M_k) / k` for `k >= 1`.
    pub fn log_root(&self, k: SeqIndex) -> Result<f64> {
        match (*self, k) {
            (_, SeqIndex::Exact(0)) => Ok(0.0),
            (SparseForm::Gevrey { s }, SeqIndex::Exact(n)) => {
                Ok(s * ln_factorial(n) / n as f64)
            }
            (SparseForm::Gevrey { s }, SeqIndex::Huge { ln }) => {
                if !ln.is_finite() {
                    return Err(Error::Unrepresentable {
                        index: k.to_string(),
                    });
                }
                Ok(s * ln_factorial_per_index(ln))
            }
            (SparseForm::AppendixA, _) => appendix_a::log_root(k),
        }
    }

    /// `ln M_k`; fails when the value itself overflows.
    pub fn log_term(&self, k: SeqIndex) -> Result<f64> {
        match k {
            SeqIndex::Exact(0) => Ok(0.0),
            SeqIndex::Exact(n) => {
                if let SparseForm::Gevrey { s } = self {
                    return Ok(s * ln_factorial(n));
                }
                Ok(self.log_root(k)? * n as f64)
            }
            SeqIndex::Huge { ln } => {
                let value = self.log_root(k)? * libm::exp(ln);
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::Unrepresentable {
                        index: k.to_string(),
                    })
                }
            }
        }
    }
}

/// `M = (M_k)` stored as `log_terms[k] = ln M_k` for `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    label: String,
    log_terms: Vec<f64>,
    sparse: Option<SparseForm>,
    weakly_log_convex: bool,
}

/// Relative slack for float convexity checks on `k -> ln k! + ln M_k`.
pub(crate) const CONVEXITY_SLACK: f64 = 1e-12;

impl WeightSequence {
    /// Validating constructor for user data.
    ///
    /// Requires `ln M_0 = 0`, `ln M_1 >= 0`, finite entries, and convexity of
    /// `ln k! + ln M_k` when `weakly_log_convex` is claimed.
    pub fn from_log_terms(
        label: impl Into<String>,
        log_terms: Vec<f64>,
        weakly_log_convex: bool,
    ) -> Result<Self> {
        if log_terms.is_empty() {
            return Err(Error::InvalidSequence("empty log_terms".into()));
        }
        if let Some(i) = log_terms.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSequence(alloc::format!(
                "log_terms[{i}] is not finite"
            )));
        }
        if log_terms[0] != 0.0 {
            return Err(Error::InvalidSequence("log_terms[0] must be 0".into()));
        }
        if log_terms.len() > 1 && log_terms[1] < 0.0 {
            return Err(Error::InvalidSequence("log_terms[1] must be >= 0".into()));
        }
        let seq = WeightSequence {
            label: label.into(),
            log_terms,
            sparse: None,
            weakly_log_convex,
        };
        if weakly_log_convex {
            if let Some(k) = seq.first_convexity_violation() {
                return Err(Error::InvalidSequence(alloc::format!(
                    "claimed weakly log-convex but fails at k = {k}"
                )));
            }
        }
        Ok(seq)
    }

    /// Attach a closed form. The dense prefix keeps precedence in lookups.
    pub fn with_sparse_form(mut self, form: SparseForm) -> Self {
        self.sparse = Some(form);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `G^s = (k!^s)`.
    pub fn gevrey(s: f64, k_max: usize) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::param("s", "Gevrey order must be a finite s >= 0"));
        }
        if k_max < 2 {
            return Err(Error::param("K", "truncation must be at least 2"));
        }
        let log_terms = (0..=k_max).map(|k| s * ln_factorial(k as u128)).collect();
        Ok(WeightSequence {
            label: alloc::format!("gevrey({s})"),
            log_terms,
            sparse: Some(SparseForm::Gevrey { s }),
            weakly_log_convex: true,
        })
    }

    /// `M_k = 1`.
    pub fn constant_one(k_max: usize) -> Self {
        WeightSequence {
            label: "ones".into(),
            log_terms: alloc::vec![0.0; k_max + 1],
            sparse: Some(SparseForm::Gevrey { s: 0.0 }),
            weakly_log_convex: true,
        }
        .with_label("ones")
    }

    /// `M_k = exp(phi(k)) / k!` for the polygon of [`appendix_a`].
    pub fn appendix_a(k_max: usize) -> Result<Self> {
        if k_max < 4 {
            return Err(Error::param("K", "truncation must be at least 4"));
        }
        Ok(WeightSequence {
            label: "appendix_a".into(),
            log_terms: appendix_a::dense_log_terms(k_max),
            sparse: Some(SparseForm::AppendixA),
            weakly_log_convex: true,
        })
    }

    /// Convex polygon with vertices at `2^i`, slope 1 on `[0, 2]`, and slope
    /// jumps alternating between `+0.7` (odd `i`) and `+0.1` (even `i`).
    /// `M_k = exp(phi(k)) / k!`. Weakly log-convex, roots not almost increasing.
    pub fn sawtooth(k_max: usize) -> Result<Self> {
        if k_max < 8 {
            return Err(Error::param("K", "truncation must be at least 8"));
        }
        let mut phi = Vec::with_capacity(k_max + 1);
        let mut slope = 1.0;
        let mut value = 0.0;
        phi.push(0.0);
        for k in 1..=k_max {
            value += slope;
            phi.push(value);
            if k.is_power_of_two() && k >= 2 {
                let i = k.trailing_zeros();
                slope += if i % 2 == 1 { 0.7 } else { 0.1 };
            }
        }
        let log_terms = phi
            .iter()
            .enumerate()
            .map(|(k, p)| p - ln_factorial(k as u128))
            .collect();
        Ok(WeightSequence {
            label: "sawtooth".into(),
            log_terms,
            sparse: None,
            weakly_log_convex: true,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn log_terms(&self) -> &[f64] {
        &self.log_terms
    }

    /// Largest stored index `K`.
    pub fn truncation(&self) -> usize {
        self.log_terms.len() - 1
    }

    pub fn sparse_form(&self) -> Option<SparseForm> {
        self.sparse
    }

    pub fn is_weakly_log_convex(&self) -> bool {
        self.weakly_log_convex
    }

    /// `ln M_k` from the dense prefix, then the closed form.
    pub fn log_term(&self, k: usize) -> Result<f64> {
        if let Some(&v) = self.log_terms.get(k) {
            return Ok(v);
        }
        match self.sparse {
            Some(form) => form.log_term(SeqIndex::Exact(k as u128)),
            None => Err(Error::BeyondPrefix {
                k,
                len: self.log_terms.len(),
            }),
        }
    }

    /// `ln M_k` at any index; dense prefix first.
    pub fn evaluate(&self, k: SeqIndex) -> Result<f64> {
        match k.as_usize() {
            Some(n) => self.log_term(n),
            None => evaluate_sparse(self, k),
        }
    }

    /// `(ln M_k) / k` at any index; dense prefix first.
    pub fn log_root(&self, k: SeqIndex) -> Result<f64> {
        if let Some(n) = k.as_usize() {
            if n == 0 {
                return Ok(0.0);
            }
            if let Some(&v) = self.log_terms.get(n) {
                return Ok(v / n as f64);
            }
        }
        match self.sparse {
            Some(form) => form.log_root(k),
            None => Err(Error::NoSparseForm(self.label.clone())),
        }
    }

    /// Dense `(ln M_k) / k` for `k = 1..=n`, index 0 set to 0.
    pub(crate) fn dense_roots(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(0.0);
        for k in 1..=n {
            out.push(self.log_terms[k] / k as f64);
        }
        out
    }

    /// First `k` at which `ln k! + ln M_k` stops being convex.
    pub(crate) fn first_convexity_violation(&self) -> Option<usize> {
        let w: Vec<f64> = self
            .log_terms
            .iter()
            .enumerate()
            .map(|(k, m)| m + ln_factorial(k as u128))
            .collect();
        (1..w.len().saturating_sub(1)).find(|&k| {
            let left = w[k] - w[k - 1];
            let right = w[k + 1] - w[k];
            let scale = 1.0 + w[k + 1].abs();
            right < left - CONVEXITY_SLACK * scale
        })
    }

    /// Pointwise `min` (`adjust_down`) or `max` with `other` on `0..=upto`.
    /// Returns the adjusted sequence and the indices that changed.
    pub fn adjusted_on_prefix(
        &self,
        other: &WeightSequence,
        upto: usize,
        adjust_down: bool,
    ) -> (WeightSequence, Vec<usize>) {
        let mut terms = self.log_terms.clone();
        let mut changed = Vec::new();
        for k in 0..=upto.min(terms.len() - 1) {
            let Ok(o) = other.log_term(k) else { continue };
            let replace = if adjust_down { o < terms[k] } else { o > terms[k] };
            if replace {
                terms[k] = o;
                changed.push(k);
            }
        }
        let seq = WeightSequence {
            label: self.label.clone(),
            log_terms: terms,
            sparse: self.sparse,
            weakly_log_convex: self.weakly_log_convex && changed.is_empty(),
        };
        (seq, changed)
    }

    /// Copy restricted to `0..=k_max`.
    pub fn truncated(&self, k_max: usize) -> WeightSequence {
        let n = (k_max + 1).min(self.log_terms.len());
        WeightSequence {
            label: self.label.clone(),
            log_terms: self.log_terms[..n].to_vec(),
            sparse: self.sparse,
            weakly_log_convex: self.weakly_log_convex,
        }
    }
}

/// `ln M_k` from the closed form alone.
///
/// Beyond `10^6` the factorial uses Stirling's series; the neglected part is
/// below `1/(1260 k^5)`, far inside the `O(ln k / k)` budget.
pub fn evaluate_sparse(w: &WeightSequence, k: SeqIndex) -> Result<f64> {
    match w.sparse {
        Some(form) => form.log_term(k),
        None => Err(Error::NoSparseForm(w.label.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::LN_2;
    use appendix_a::{vertex_index, vertex_ln};

    #[test]
    fn gevrey_basics() {
        let g0 = WeightSequence::gevrey(0.0, 10).unwrap();
        assert!(g0.log_terms().iter().all(|&x| x == 0.0));
        let g1 = WeightSequence::gevrey(1.0, 10).unwrap();
        assert!((g1.log_term(3).unwrap() - libm::log(6.0)).abs() < 1e-12);
        assert!(WeightSequence::gevrey(-0.5, 10).is_err());
    }

    #[test]
    fn gevrey_half_roots_strictly_increase() {
        let g = WeightSequence::gevrey(0.5, 50).unwrap();
        let r = g.dense_roots(50);
        assert!(r[1..].windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn appendix_a_small_terms() {
        let a = WeightSequence::appendix_a(64).unwrap();
        assert!((a.log_term(2).unwrap() - libm::log(128.0)).abs() < 1e-12);
        assert!((a.log_term(4).unwrap() - libm::log(65536.0 / 24.0)).abs() < 1e-12);
        assert!(a.first_convexity_violation().is_none());
    }

    #[test]
    fn sparse_gevrey_is_log_factorial() {
        let g = WeightSequence::gevrey(1.0, 4).unwrap();
        let v = evaluate_sparse(&g, SeqIndex::Exact(10)).unwrap();
        assert!((v - libm::log(3_628_800.0)).abs() < 1e-9);
    }

    #[test]
    fn sparse_appendix_a_at_even_vertex() {
        // k_4 = 256 under the squaring schedule
        let a = WeightSequence::appendix_a(8).unwrap();
        let k4 = 256u128;
        let v = evaluate_sparse(&a, SeqIndex::Exact(k4)).unwrap();
        let expected = k4 as f64 * vertex_ln(5) - ln_factorial(k4);
        assert!((v - expected).abs() < 1e-9 * expected.abs());
    }

    #[test]
    fn sparse_appendix_a_at_odd_vertex() {
        let a = WeightSequence::appendix_a(8).unwrap();
        let r = a.log_root(vertex_index(5)).unwrap();
        // ln M_k / k ~ ln k_3 + 1 at k = k_5
        let target = 4.0 * LN_2 + 1.0;
        assert!((r - target).abs() < 1e-3, "{r} vs {target}");
    }

    #[test]
    fn missing_sparse_form_is_reported() {
        let s = WeightSequence::sawtooth(16).unwrap();
        assert!(matches!(
            evaluate_sparse(&s, SeqIndex::Exact(100)),
            Err(Error::NoSparseForm(_))
        ));
        assert!(matches!(s.log_term(100), Err(Error::BeyondPrefix { .. })));
    }

    #[test]
    fn tower_overflow_is_unrepresentable() {
        let a = WeightSequence::appendix_a(8).unwrap();
        let huge = SeqIndex::Huge { ln: vertex_ln(12) };
        assert!(matches!(
            evaluate_sparse(&a, huge),
            Err(Error::Unrepresentable { .. })
        ));
        assert!(a.log_root(huge).is_ok());
    }

    #[test]
    fn user_data_validation() {
        assert!(WeightSequence::from_log_terms("x", alloc::vec![0.0, 0.0, 2.0, 2.0], false).is_ok());
        assert!(WeightSequence::from_log_terms("x", alloc::vec![0.0, 0.0, 2.0, 2.0], true).is_err());
        assert!(WeightSequence::from_log_terms("x", alloc::vec![1.0], false).is_err());
        assert!(WeightSequence::from_log_terms("x", alloc::vec![0.0, -1.0], false).is_err());
    }
}

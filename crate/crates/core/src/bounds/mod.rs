//! Derivative-bound certificates and the constructions that produce them:
//! majorant ODE bounds, Neumann-series bounds for inverses of operator
//! fields, bounds for functional inverses, and the regularization that turns
//! Beurling data into Roumieu data.

mod lemma4;
mod majorant;
mod neumann;

use alloc::string::String;

use crate::error::{Error, Result};
use crate::matrix::WeightMatrix;
use crate::numeric::ln_factorial;
use crate::seq::{pair_root_verdict, WeightSequence};
use crate::verdict::{CheckConfig, Status};

pub use lemma4::{lemma4_construct, Lemma4Output};
pub use majorant::{
    majorant_derivatives, majorant_y_binomial, majorant_y_exact, ode_bound_beurling, ode_bound_roumieu, square_field_certificate,
    square_field_constant, BeurlingOdeBound, CertificateFamily, MajorantSpec, RoumieuOdeBound,
};
pub use neumann::{
    inverse_fn_bound, neumann_exact_sums, neumann_inverse_bound, neumann_log_sums, r_bound_n_beta,
    r_bound_relaxed, InverseBound, NeumannBound,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    /// `k! M_k`
    None,
    /// `(k-1)! M_{k-1}`, with `(-1)! M_{-1} := 1`.
    MinusOne,
}

impl Shift {
    pub fn as_str(&self) -> &'static str {
        match self {
            Shift::None => "none",
            Shift::MinusOne => "minus_one",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertKind {
    Function,
    OdeField,
    /// Bounds of a functional inverse; `rho` enters with exponent `k - 1`.
    Inverse,
    Reciprocal,
}

impl CertKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertKind::Function => "function",
            CertKind::OdeField => "ode_field",
            CertKind::Inverse => "inverse",
            CertKind::Reciprocal => "reciprocal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "function" => Some(CertKind::Function),
            "ode_field" => Some(CertKind::OdeField),
            "inverse" => Some(CertKind::Inverse),
            "reciprocal" => Some(CertKind::Reciprocal),
            _ => None,
        }
    }
}

/// `|f^{(k)}| <= C rho^e (k - s)! M_{k - s}` with `s` from the shift and
/// `e = k - 1` for inverse bounds, `e = k` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub c: f64,
    pub rho: f64,
    pub sequence: WeightSequence,
    pub shift: Shift,
    pub kind: CertKind,
}

impl BoundCertificate {
    pub fn new(c: f64, rho: f64, sequence: WeightSequence, shift: Shift, kind: CertKind) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("C", "must be finite and positive"));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::param("rho", "must be finite and positive"));
        }
        Ok(BoundCertificate {
            c,
            rho,
            sequence,
            shift,
            kind,
        })
    }

    pub fn label(&self) -> String {
        String::from(self.sequence.label())
    }

    pub fn rho_exponent(&self, k: usize) -> f64 {
        match self.kind {
            CertKind::Inverse => k as f64 - 1.0,
            _ => k as f64,
        }
    }

    /// `ln` of the bound on `|f^{(k)}|`.
    pub fn log_bound(&self, k: usize) -> Result<f64> {
        let base = libm::log(self.c) + self.rho_exponent(k) * libm::log(self.rho);
        Ok(match (self.shift, k) {
            (Shift::MinusOne, 0) => libm::log(self.c),
            (Shift::MinusOne, k) => base + ln_factorial(k as u128 - 1) + self.sequence.log_term(k - 1)?,
            (Shift::None, k) => base + ln_factorial(k as u128) + self.sequence.log_term(k)?,
        })
    }

    /// Copy with the constant multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        BoundCertificate::new(self.c * factor, self.rho, self.sequence.clone(), self.shift, self.kind)
    }
}

/// Smallest `ln H >= 0` on the window with
/// `(M^l_{j-1}/j)^{1/(j-1)} <= H (M^r_{k-1}/k)^{1/(k-1)}` for `2 <= j <= k`
/// (`shifted`), or `(M^l_j)^{1/j} <= H (M^r_k)^{1/k}` for `1 <= j <= k`.
pub fn rai_constant(left: &WeightSequence, right: &WeightSequence, window: usize, shifted: bool) -> f64 {
    let n = window.min(left.truncation()).min(right.truncation());
    let (lt, rt) = (left.log_terms(), right.log_terms());
    let root = |t: &[f64], k: usize| -> f64 {
        if shifted {
            (t[k - 1] - libm::log(k as f64)) / (k - 1) as f64
        } else {
            t[k] / k as f64
        }
    };
    let start = if shifted { 2 } else { 1 };
    let mut best_left = f64::NEG_INFINITY;
    let mut h: f64 = 0.0;
    for k in start..=n {
        best_left = best_left.max(root(lt, k));
        h = h.max(best_left - root(rt, k));
    }
    h
}

/// A row `mu` witnessing the Roumieu (rai) condition for `lambda`, with the
/// finite-window constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaiWitness {
    pub mu: usize,
    pub log_h: f64,
}

/// First `mu` in Roumieu search order (upward from `lambda`, then below)
/// whose pair verdict holds.
pub fn rai_witness(m: &WeightMatrix, lambda: usize, cfg: &CheckConfig, shifted: bool) -> Result<RaiWitness> {
    if lambda >= m.len() {
        return Err(Error::param("lambda", "row index out of range"));
    }
    let order = (lambda..m.len()).chain((0..lambda).rev());
    let mut reasons = alloc::vec::Vec::new();
    for mu in order {
        let v = pair_root_verdict(m.row(lambda), m.row(mu), cfg)?;
        if v.status == Status::HoldsUpTo {
            let log_h = rai_constant(m.row(lambda), m.row(mu), cfg.window, shifted);
            return Ok(RaiWitness { mu, log_h });
        }
        reasons.push(alloc::format!("mu = {mu}: {}", v.status.as_str()));
    }
    Err(Error::NoRaiWitness {
        lambda,
        reason: reasons.join(", "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_shift_convention() {
        let ones = WeightSequence::constant_one(10);
        let cert = BoundCertificate::new(3.0, 2.0, ones, Shift::MinusOne, CertKind::OdeField).unwrap();
        assert_eq!(cert.log_bound(0).unwrap(), libm::log(3.0));
        let expected = libm::log(3.0) + 4.0 * libm::log(2.0) + libm::log(6.0);
        assert!((cert.log_bound(4).unwrap() - expected).abs() < 1e-12);
        assert!(BoundCertificate::new(0.0, 1.0, WeightSequence::constant_one(3), Shift::None, CertKind::Function).is_err());
    }

    #[test]
    fn inverse_kind_lowers_rho_exponent() {
        let ones = WeightSequence::constant_one(10);
        let cert = BoundCertificate::new(1.0, 2.0, ones, Shift::MinusOne, CertKind::Inverse).unwrap();
        assert!((cert.log_bound(3).unwrap() - (2.0 * libm::log(2.0) + libm::log(2.0))).abs() < 1e-12);
    }

    #[test]
    fn rai_constants_for_simple_rows() {
        let g = WeightSequence::gevrey(1.0, 300).unwrap();
        assert_eq!(rai_constant(&g, &g, 256, false), 0.0);
        let h = rai_constant(&g, &g, 256, true);
        assert!(h >= 0.0 && h < 1.0);
        let ones = WeightSequence::constant_one(300);
        assert_eq!(rai_constant(&ones, &ones, 256, true), 0.0);
    }

    #[test]
    fn witness_for_single_row() {
        let m = WeightMatrix::single(WeightSequence::gevrey(1.0, 512).unwrap());
        let cfg = CheckConfig::default().with_truncation(512);
        let w = rai_witness(&m, 0, &cfg, true).unwrap();
        assert_eq!(w.mu, 0);
        let m = WeightMatrix::single(WeightSequence::sawtooth(512).unwrap());
        assert!(matches!(rai_witness(&m, 0, &cfg, true), Err(Error::NoRaiWitness { .. })));
    }
}

//! Three-valued verdicts for "there is a constant C for all k" conditions.
//!
//! Every statistic is a natural logarithm. A checker evaluates it at a
//! geometric schedule of checkpoints and hands the track to one of two rules:
//! [`bounded_rule`] for statistics that must stay bounded and
//! [`vanishing_rule`] for statistics that must tend to `-inf`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::numeric::{SeqIndex, LN_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    HoldsUpTo,
    Refuted,
    Estimate,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::HoldsUpTo => "HOLDS_UP_TO",
            Status::Refuted => "REFUTED",
            Status::Estimate => "ESTIMATE",
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, Status::HoldsUpTo)
    }

    pub fn refuted(&self) -> bool {
        matches!(self, Status::Refuted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub index: SeqIndex,
    pub stat: f64,
}

/// Pair of indices at which a statistic was attained, with its (log) value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub j: SeqIndex,
    pub k: SeqIndex,
    pub value: f64,
}

impl Witness {
    pub fn exact(j: usize, k: usize, value: f64) -> Self {
        Witness {
            j: j.into(),
            k: k.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub truncation: usize,
    pub checkpoints: Vec<Checkpoint>,
    /// Supremum of the checkpoint statistics (log domain).
    pub constant_estimate: f64,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl Verdict {
    /// Assemble a verdict, keeping the invariants: the constant is the sup of
    /// the checkpoint statistics and a refutation always carries a witness.
    pub fn new(
        status: Status,
        truncation: usize,
        checkpoints: Vec<Checkpoint>,
        witness: Option<Witness>,
    ) -> Self {
        let constant_estimate = checkpoints
            .iter()
            .map(|c| c.stat)
            .fold(f64::NEG_INFINITY, f64::max);
        let status = if status == Status::Refuted && witness.is_none() {
            Status::Estimate
        } else {
            status
        };
        Verdict {
            status,
            truncation,
            checkpoints,
            constant_estimate,
            witness,
            note: None,
        }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        if status == Status::Refuted && self.witness.is_none() {
            self.status = Status::Estimate;
        } else {
            self.status = status;
        }
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// `exp(constant_estimate)`.
    pub fn constant(&self) -> f64 {
        libm::exp(self.constant_estimate)
    }

    pub fn last_stat(&self) -> Option<f64> {
        self.checkpoints.last().map(|c| c.stat)
    }
}

/// How the printed Beurling (rai) display is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RaiReading {
    /// `(M^mu_j)^{1/j} <= C (M^lambda_k)^{1/k}`: the smaller row on the left.
    #[default]
    MuLeft,
    /// `(M^lambda_j)^{1/j} <= C (M^lambda_k)^{1/k}`, exactly as printed.
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub truncation: usize,
    pub dp_cap: usize,
    /// Per-checkpoint increment that counts as growth.
    pub grow_tol: f64,
    /// Final increment below which a bounded statistic counts as flat.
    pub flat_tol: f64,
    /// Minimal total growth over the track before a refutation is issued.
    pub min_refute: f64,
    /// Threshold for "tends to zero" statistics (natural scale, not log).
    pub epsilon: f64,
    /// Largest closed-form vertex index used as far checkpoint; 0 disables.
    pub far_vertices: u32,
    /// Window for finite-window constants (rai witnesses, conversion factors).
    pub window: usize,
    pub rai_reading: RaiReading,
    /// Start of the geometric grid for weight-function conditions.
    pub t0: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            truncation: 4096,
            dp_cap: 512,
            grow_tol: 0.05,
            flat_tol: 0.01,
            min_refute: LN_2,
            epsilon: 0.1,
            far_vertices: 0,
            window: 256,
            rai_reading: RaiReading::MuLeft,
            t0: 16.0,
        }
    }
}

impl CheckConfig {
    pub fn with_truncation(mut self, k: usize) -> Self {
        self.truncation = k;
        self
    }

    pub fn with_far_vertices(mut self, j_max: u32) -> Self {
        self.far_vertices = j_max;
        self
    }

    pub fn ln_epsilon(&self) -> f64 {
        libm::log(self.epsilon)
    }
}

/// `8, 16, 32, ...` below `k_max`, then `k_max` itself.
pub fn checkpoint_schedule(k_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut c = 8usize;
    while c < k_max {
        out.push(c);
        c *= 2;
    }
    if k_max >= 1 {
        out.push(k_max);
    }
    out
}

fn increments(track: &[Checkpoint]) -> Vec<f64> {
    track.windows(2).map(|w| w[1].stat - w[0].stat).collect()
}

/// Rule for a running-supremum statistic that should stay bounded.
///
/// Refuted when at least two of the last four increments reach `grow_tol`
/// and the whole track rose by at least `min_refute`; holds when the last two
/// increments are below `flat_tol`; an estimate otherwise. Looking at pairs
/// of increments keeps a staircase (growth at every other checkpoint) from
/// passing as flat.
pub fn bounded_rule(track: &[Checkpoint], cfg: &CheckConfig) -> Status {
    if track.len() < 2 {
        return Status::Estimate;
    }
    let inc = increments(track);
    let tail = &inc[inc.len().saturating_sub(4)..];
    let growing = tail.iter().filter(|&&d| d >= cfg.grow_tol).count();
    let total = track[track.len() - 1].stat - track[0].stat;
    if growing >= 2.min(tail.len()) && growing >= 1 && total >= cfg.min_refute {
        return Status::Refuted;
    }
    if inc[inc.len().saturating_sub(2)..].iter().all(|&d| d <= cfg.flat_tol) {
        Status::HoldsUpTo
    } else {
        Status::Estimate
    }
}

/// Rule for a pointwise statistic that should tend to `-inf`.
///
/// Holds when the last value is below `ln epsilon` and the last two steps
/// decrease; refuted when the last two steps are flat or rising while the
/// value stays above `ln epsilon`.
pub fn vanishing_rule(track: &[Checkpoint], cfg: &CheckConfig) -> Status {
    if track.len() < 3 {
        return Status::Estimate;
    }
    let n = track.len();
    let last = track[n - 1].stat;
    let d1 = track[n - 2].stat - track[n - 3].stat;
    let d2 = last - track[n - 2].stat;
    let ln_eps = cfg.ln_epsilon();
    if last <= ln_eps && d1 < 0.0 && d2 < 0.0 {
        Status::HoldsUpTo
    } else if last > ln_eps && d1 >= -cfg.flat_tol && d2 >= -cfg.flat_tol {
        Status::Refuted
    } else {
        Status::Estimate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(values: &[f64]) -> Vec<Checkpoint> {
        values
            .iter()
            .enumerate()
            .map(|(i, &s)| Checkpoint {
                index: SeqIndex::Exact(8 << i),
                stat: s,
            })
            .collect()
    }

    #[test]
    fn schedule_is_geometric_and_ends_at_k() {
        assert_eq!(checkpoint_schedule(100), [8, 16, 32, 64, 100]);
        assert_eq!(checkpoint_schedule(64), [8, 16, 32, 64]);
        assert_eq!(checkpoint_schedule(5), [5]);
    }

    #[test]
    fn bounded_rule_cases() {
        let cfg = CheckConfig::default();
        assert_eq!(bounded_rule(&track(&[1.0, 1.0, 1.0]), &cfg), Status::HoldsUpTo);
        assert_eq!(
            bounded_rule(&track(&[0.0, 0.3, 0.6, 0.9]), &cfg),
            Status::Refuted
        );
        // growing but not by enough overall
        assert_eq!(
            bounded_rule(&track(&[0.0, 0.06, 0.12, 0.18]), &cfg),
            Status::Estimate
        );
    }

    #[test]
    fn vanishing_rule_cases() {
        let cfg = CheckConfig::default();
        assert_eq!(
            vanishing_rule(&track(&[-1.0, -2.0, -3.0]), &cfg),
            Status::HoldsUpTo
        );
        assert_eq!(vanishing_rule(&track(&[0.0, 0.0, 0.0]), &cfg), Status::Refuted);
        assert_eq!(
            vanishing_rule(&track(&[0.0, -0.5, -1.0]), &cfg),
            Status::Estimate
        );
    }

    #[test]
    fn refutation_without_witness_is_downgraded() {
        let v = Verdict::new(Status::Refuted, 10, track(&[0.0, 1.0]), None);
        assert_eq!(v.status, Status::Estimate);
        assert_eq!(v.constant_estimate, 1.0);
    }
}

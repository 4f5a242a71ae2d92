use alloc::vec::Vec;

use super::appendix_a::vertex_index;
use super::{SparseForm, WeightSequence};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::numeric::{ln_factorial, Scalar, SeqIndex};
use crate::verdict::{
    bounded_rule, checkpoint_schedule, vanishing_rule, CheckConfig, Checkpoint, Status, Verdict,
    Witness,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrowthCondition {
    /// `sup (M_{k+1}/M_k)^{1/k} < inf`
    DerivationClosed,
    /// `liminf M_k^{1/k} > 0`
    LiminfRootPositive,
    /// `M_k^{1/k} -> inf`
    RootToInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `M_k <= C rho^k N_k` for some `C, rho`.
    Preceq,
    /// `M_k <= C rho^k N_k` for every `rho` with some `C`.
    Triangle,
}

fn effective_k(w: &WeightSequence, cfg: &CheckConfig) -> usize {
    cfg.truncation.min(w.truncation())
}

fn cp(index: usize, stat: f64) -> Checkpoint {
    Checkpoint {
        index: index.into(),
        stat,
    }
}

/// Closed-form vertex indices beyond the dense range, for sequences that can
/// be evaluated there. Empty unless `cfg.far_vertices >= 5`.
pub fn far_indices(cfg: &CheckConfig, dense_max: usize) -> Vec<SeqIndex> {
    if cfg.far_vertices < 5 {
        return Vec::new();
    }
    (5..=cfg.far_vertices)
        .map(vertex_index)
        .filter(|idx| match idx {
            SeqIndex::Exact(k) => *k > dense_max as u128,
            SeqIndex::Huge { .. } => true,
        })
        .collect()
}

/// Convexity of `k -> ln k! + ln M_k` over the stored prefix.
///
/// The statistic at a checkpoint is the largest drop between consecutive
/// increments seen so far (negative while strictly convex).
pub fn check_weakly_log_convex(w: &WeightSequence, cfg: &CheckConfig) -> Result<Verdict> {
    let k_max = effective_k(w, cfg);
    if k_max < 2 {
        return Err(Error::param("log_terms", "need at least 3 stored terms"));
    }
    let terms = w.log_terms();
    let wk: Vec<f64> = (0..=k_max)
        .map(|k| terms[k] + ln_factorial(k as u128))
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut first_violation = None;
    let mut track = Vec::new();
    let schedule = checkpoint_schedule(k_max - 1);
    let mut next = 0;
    for k in 1..k_max {
        let left = wk[k] - wk[k - 1];
        let right = wk[k + 1] - wk[k];
        let drop = left - right;
        worst = worst.max(drop);
        let slack = super::CONVEXITY_SLACK * (1.0 + wk[k + 1].abs());
        if drop > slack && first_violation.is_none() {
            first_violation = Some(Witness::exact(k - 1, k, drop));
        }
        if next < schedule.len() && schedule[next] == k {
            track.push(cp(k, worst));
            next += 1;
        }
    }
    let status = if first_violation.is_some() {
        Status::Refuted
    } else {
        Status::HoldsUpTo
    };
    Ok(Verdict::new(status, k_max, track, first_violation))
}

fn family_status(form: Option<SparseForm>, which: GrowthCondition) -> Option<Status> {
    match form? {
        SparseForm::Gevrey { s } => Some(match which {
            GrowthCondition::RootToInfinity if s == 0.0 => Status::Refuted,
            _ => Status::HoldsUpTo,
        }),
        SparseForm::AppendixA => Some(Status::HoldsUpTo),
    }
}

/// Growth hypotheses on a single sequence.
///
/// Known closed forms decide the status; otherwise the trend can refute but a
/// bounded-looking track is reported only as an estimate.
pub fn check_growth(
    w: &WeightSequence,
    which: GrowthCondition,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let k_max = effective_k(w, cfg);
    if k_max < 8 {
        return Err(Error::param("K", "growth checks need K >= 8"));
    }
    let terms = w.log_terms();
    let (track, witness, trend) = match which {
        GrowthCondition::DerivationClosed => {
            let last = k_max - 1;
            let schedule = checkpoint_schedule(last);
            let mut sup = f64::NEG_INFINITY;
            let mut arg = 1;
            let mut track = Vec::new();
            let mut next = 0;
            for k in 1..=last {
                let s = (terms[k + 1] - terms[k]) / k as f64;
                if s > sup {
                    sup = s;
                    arg = k;
                }
                if next < schedule.len() && schedule[next] == k {
                    track.push(cp(k, sup));
                    next += 1;
                }
            }
            let status = bounded_rule(&track, cfg);
            (track, Witness::exact(arg, arg + 1, sup), status)
        }
        GrowthCondition::LiminfRootPositive => {
            let schedule = checkpoint_schedule(k_max);
            let mut worst = f64::NEG_INFINITY;
            let mut arg = 1;
            let mut track = Vec::new();
            let mut next = 0;
            for k in 1..=k_max {
                let s = -terms[k] / k as f64;
                if s > worst {
                    worst = s;
                    arg = k;
                }
                if next < schedule.len() && schedule[next] == k {
                    track.push(cp(k, worst));
                    next += 1;
                }
            }
            let status = bounded_rule(&track, cfg);
            (track, Witness::exact(arg, arg, worst), status)
        }
        GrowthCondition::RootToInfinity => {
            let track: Vec<Checkpoint> = checkpoint_schedule(k_max)
                .into_iter()
                .map(|k| cp(k, -terms[k] / k as f64))
                .collect();
            let last = track.last().map(|c| c.stat).unwrap_or(0.0);
            let status = vanishing_rule(&track, cfg);
            (track, Witness::exact(k_max, k_max, last), status)
        }
    };
    let verdict = Verdict::new(trend, k_max, track, Some(witness));
    Ok(match family_status(w.sparse_form(), which) {
        Some(status) => verdict
            .with_status(status)
            .with_note("status from the closed form"),
        None if trend == Status::HoldsUpTo => verdict
            .with_status(Status::Estimate)
            .with_note("bounded trend without a closed form"),
        None => verdict,
    })
}

/// `max_{j <= k} (ln M^left_j)/j - (ln M^right_k)/k` tracked as a running
/// supremum over checkpoints, extended to far closed-form indices when both
/// sequences can be evaluated there.
pub fn pair_root_verdict(
    left: &WeightSequence,
    right: &WeightSequence,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let k_max = effective_k(left, cfg).min(right.truncation());
    if k_max < 8 {
        return Err(Error::param("K", "root comparisons need K >= 8"));
    }
    let lr = left.dense_roots(k_max);
    let rr = right.dense_roots(k_max);
    let schedule = checkpoint_schedule(k_max);
    let mut lmax = f64::NEG_INFINITY;
    let mut lmax_at = SeqIndex::Exact(1);
    let mut sup = f64::NEG_INFINITY;
    let mut witness = Witness::exact(1, 1, 0.0);
    let mut track = Vec::new();
    let mut next = 0;
    for k in 1..=k_max {
        if lr[k] > lmax {
            lmax = lr[k];
            lmax_at = k.into();
        }
        let d = lmax - rr[k];
        if d > sup {
            sup = d;
            witness = Witness {
                j: lmax_at,
                k: k.into(),
                value: d,
            };
        }
        if next < schedule.len() && schedule[next] == k {
            track.push(cp(k, sup));
            next += 1;
        }
    }
    let both_sparse = left.sparse_form().is_some() && right.sparse_form().is_some();
    if both_sparse {
        for idx in far_indices(cfg, k_max) {
            let l = left.log_root(idx)?;
            if l > lmax {
                lmax = l;
                lmax_at = idx;
            }
            let d = lmax - right.log_root(idx)?;
            if d > sup {
                sup = d;
                witness = Witness {
                    j: lmax_at,
                    k: idx,
                    value: d,
                };
            }
            track.push(Checkpoint { index: idx, stat: sup });
        }
    }
    let status = bounded_rule(&track, cfg);
    Ok(Verdict::new(status, k_max, track, Some(witness)))
}

/// Defect `max_{j <= k <= K} M_j^{1/j} / M_k^{1/k}` (log) over checkpoints.
pub fn check_almost_increasing(w: &WeightSequence, cfg: &CheckConfig) -> Result<Verdict> {
    pair_root_verdict(w, w, cfg)
}

/// As [`check_almost_increasing`], with an explicit far pair `(j, k)`
/// evaluated through the closed form.
///
/// The pair refutes when its defect exceeds the whole dense-window defect by
/// at least `min_refute`, i.e. the defect keeps growing across scales.
pub fn check_almost_increasing_with_witness(
    w: &WeightSequence,
    j: SeqIndex,
    k: SeqIndex,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let dense = check_almost_increasing(w, cfg)?;
    let defect = w.log_root(j)? - w.log_root(k)?;
    let dense_sup = dense.constant_estimate;
    let mut track = dense.checkpoints.clone();
    track.push(Checkpoint {
        index: k,
        stat: dense_sup.max(defect),
    });
    let witness = Witness { j, k, value: defect };
    if defect >= dense_sup + cfg.min_refute {
        Ok(Verdict::new(Status::Refuted, dense.truncation, track, Some(witness))
            .with_note("far witness pair"))
    } else {
        let status = bounded_rule(&track, cfg);
        let w = if defect > dense_sup { Some(witness) } else { dense.witness };
        Ok(Verdict::new(status, dense.truncation, track, w))
    }
}

/// `M ⪯ N` (root ratio bounded) or `M ◁ N` (root ratio tends to zero).
pub fn compare_inclusion(
    m: &WeightSequence,
    n: &WeightSequence,
    relation: Relation,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let k_max = effective_k(m, cfg).min(n.truncation());
    if k_max < 8 {
        return Err(Error::param("K", "inclusion checks need K >= 8"));
    }
    let mr = m.dense_roots(k_max);
    let nr = n.dense_roots(k_max);
    let far = if m.sparse_form().is_some() && n.sparse_form().is_some() {
        far_indices(cfg, k_max)
    } else {
        Vec::new()
    };
    match relation {
        Relation::Preceq => {
            let schedule = checkpoint_schedule(k_max);
            let mut sup = f64::NEG_INFINITY;
            let mut witness = Witness::exact(1, 1, 0.0);
            let mut track = Vec::new();
            let mut next = 0;
            for k in 1..=k_max {
                let d = mr[k] - nr[k];
                if d > sup {
                    sup = d;
                    witness = Witness::exact(k, k, d);
                }
                if next < schedule.len() && schedule[next] == k {
                    track.push(cp(k, sup));
                    next += 1;
                }
            }
            for idx in far {
                let d = m.log_root(idx)? - n.log_root(idx)?;
                if d > sup {
                    sup = d;
                    witness = Witness { j: idx, k: idx, value: d };
                }
                track.push(Checkpoint { index: idx, stat: sup });
            }
            let status = bounded_rule(&track, cfg);
            Ok(Verdict::new(status, k_max, track, Some(witness)))
        }
        Relation::Triangle => {
            let mut track: Vec<Checkpoint> = checkpoint_schedule(k_max)
                .into_iter()
                .map(|k| cp(k, mr[k] - nr[k]))
                .collect();
            for idx in far {
                let d = m.log_root(idx)? - n.log_root(idx)?;
                track.push(Checkpoint { index: idx, stat: d });
            }
            let last = *track.last().expect("non-empty schedule");
            let status = vanishing_rule(&track, cfg);
            let witness = Witness {
                j: last.index,
                k: last.index,
                value: last.stat,
            };
            Ok(Verdict::new(status, k_max, track, Some(witness)))
        }
    }
}

/// Smallest `k0` with `s ln k! <= ln M_k <= t ln k!` for every
/// `k0 <= k <= K`; `None` if the bounds fail at `K` itself.
pub fn dominance_threshold(w: &WeightSequence, s: f64, t: f64) -> Option<usize> {
    let terms = w.log_terms();
    let ok = |k: usize| {
        let lf = ln_factorial(k as u128);
        s * lf <= terms[k] && terms[k] <= t * lf
    };
    let k_max = w.truncation();
    if !ok(k_max) {
        return None;
    }
    let mut k0 = k_max;
    while k0 > 0 && ok(k0 - 1) {
        k0 -= 1;
    }
    Some(k0)
}

/// `ln sup_k |f^{(k)}| / (rho^k k! M_k)` for a jet `c_k = f^{(k)}/k!`.
/// Returns `-inf` for the zero jet.
pub fn log_seminorm_m<T: Scalar>(jet: &Jet<T>, w: &WeightSequence, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::param("rho", "must be positive"));
    }
    let ln_rho = libm::log(rho);
    let mut best = f64::NEG_INFINITY;
    for (k, c) in jet.coefficients().iter().enumerate() {
        let lc = c.ln_abs();
        if lc == f64::NEG_INFINITY {
            continue;
        }
        let v = lc - k as f64 * ln_rho - w.log_term(k)?;
        best = best.max(v);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::LN_2;
    use crate::seq::appendix_a::vertex_index;

    fn cfg(k: usize) -> CheckConfig {
        CheckConfig::default().with_truncation(k)
    }

    #[test]
    fn convexity_counterexample() {
        let w = WeightSequence::from_log_terms("x", alloc::vec![0.0, 0.0, 2.0, 2.0], false).unwrap();
        let v = check_weakly_log_convex(&w, &cfg(3)).unwrap();
        assert_eq!(v.status, Status::Refuted);
        assert_eq!(v.witness.unwrap().k, SeqIndex::Exact(2));
    }

    #[test]
    fn gevrey_is_convex() {
        for s in [0.0, 0.5, 1.0, 3.0] {
            let g = WeightSequence::gevrey(s, 256).unwrap();
            assert_eq!(check_weakly_log_convex(&g, &cfg(256)).unwrap().status, Status::HoldsUpTo);
        }
    }

    #[test]
    fn gevrey_one_derivation_closed() {
        let g = WeightSequence::gevrey(1.0, 512).unwrap();
        let v = check_growth(&g, GrowthCondition::DerivationClosed, &cfg(512)).unwrap();
        assert_eq!(v.status, Status::HoldsUpTo);
        assert!(v.constant() <= 2.0 + 1e-12);
    }

    #[test]
    fn gevrey_zero_roots_do_not_diverge() {
        let g = WeightSequence::gevrey(0.0, 512).unwrap();
        let v = check_growth(&g, GrowthCondition::RootToInfinity, &cfg(512)).unwrap();
        assert_eq!(v.status, Status::Refuted);
        assert!(v.witness.is_some());
    }

    #[test]
    fn unknown_family_caps_holds_at_estimate() {
        let g = WeightSequence::gevrey(1.0, 512).unwrap();
        let plain = WeightSequence::from_log_terms("plain", g.log_terms().to_vec(), true).unwrap();
        let v = check_growth(&plain, GrowthCondition::DerivationClosed, &cfg(512)).unwrap();
        assert_eq!(v.status, Status::Estimate);
    }

    #[test]
    fn almost_increasing_basics() {
        let g = WeightSequence::gevrey(1.0, 512).unwrap();
        let v = check_almost_increasing(&g, &cfg(512)).unwrap();
        assert_eq!(v.status, Status::HoldsUpTo);
        assert_eq!(v.constant_estimate, 0.0);
        let ones = WeightSequence::constant_one(512);
        let v = check_almost_increasing(&ones, &cfg(512)).unwrap();
        assert_eq!(v.status, Status::HoldsUpTo);
        assert_eq!(v.constant(), 1.0);
    }

    #[test]
    fn sawtooth_is_not_almost_increasing() {
        let s = WeightSequence::sawtooth(512).unwrap();
        let v = check_almost_increasing(&s, &cfg(512)).unwrap();
        assert_eq!(v.status, Status::Refuted);
    }

    #[test]
    fn appendix_a_far_pair_refutes() {
        let a = WeightSequence::appendix_a(4096).unwrap();
        let v = check_almost_increasing_with_witness(&a, vertex_index(4), vertex_index(5), &cfg(4096))
            .unwrap();
        assert_eq!(v.status, Status::Refuted);
        assert!(v.witness.unwrap().value >= 4.0 * LN_2 - 1.0);
    }

    #[test]
    fn appendix_a_far_checkpoints_refute() {
        let a = WeightSequence::appendix_a(4096).unwrap();
        let v = check_almost_increasing(&a, &cfg(4096).with_far_vertices(9)).unwrap();
        assert_eq!(v.status, Status::Refuted);
    }

    #[test]
    fn inclusion_examples() {
        let g1 = WeightSequence::gevrey(1.0, 1024).unwrap();
        let g2 = WeightSequence::gevrey(2.0, 1024).unwrap();
        let c = cfg(1024);
        assert_eq!(compare_inclusion(&g1, &g2, Relation::Preceq, &c).unwrap().status, Status::HoldsUpTo);
        assert_eq!(compare_inclusion(&g1, &g2, Relation::Triangle, &c).unwrap().status, Status::HoldsUpTo);
        assert_eq!(compare_inclusion(&g2, &g1, Relation::Preceq, &c).unwrap().status, Status::Refuted);
        let refl = compare_inclusion(&g1, &g1, Relation::Preceq, &c).unwrap();
        assert_eq!(refl.status, Status::HoldsUpTo);
        assert_eq!(refl.constant(), 1.0);
    }

    #[test]
    fn seminorm_examples() {
        use num_rational::BigRational;
        let ones = WeightSequence::constant_one(20);
        let e = Jet::<BigRational>::exp(20);
        assert!(log_seminorm_m(&e, &ones, 1.0).unwrap().abs() < 1e-12);
        let z = Jet::<BigRational>::zero(5);
        assert_eq!(log_seminorm_m(&z, &ones, 1.0).unwrap(), f64::NEG_INFINITY);
        let p = Jet::new((0..10).map(|k| libm::pow(2.0, k as f64)).collect()).unwrap();
        assert!(log_seminorm_m(&p, &ones, 2.0).unwrap().abs() < 1e-12);
        assert!(log_seminorm_m(&p, &ones, 0.0).is_err());
    }
}

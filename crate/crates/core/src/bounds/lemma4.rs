//! Regularization of a sequence `L` below `M^1 <= M^2 <= M^3` into
//! `L <= N^1 <= N^2` with a root comparison constant `sqrt(H_1)`.

use alloc::vec::Vec;

use super::rai_constant;
use crate::error::{Error, Result};
use crate::seq::{check_growth, GrowthCondition, WeightSequence};
use crate::verdict::{checkpoint_schedule, vanishing_rule, CheckConfig, Checkpoint, Status, Verdict, Witness};

/// Log-domain slack for the verified inequalities.
const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma4Output {
    /// `ln L̄`, zero entries of `L` replaced by `1`.
    pub l_bar: Vec<f64>,
    pub zero_entries: Vec<usize>,
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    pub l_le_n1: bool,
    pub n1_le_n2: bool,
    /// `max_{j <= k} (ln N^1_j)/j - (ln N^2_k)/k - ln sqrt(H_1)`; `<= 0` when
    /// the root comparison holds.
    pub comparison_excess: f64,
    pub comparison_holds: bool,
    /// `(N^2_k / M^3_k)^{1/k}` tending to zero.
    pub trend: Verdict,
    pub preconditions: Vec<(&'static str, Status)>,
}

fn tol(x: f64) -> f64 {
    TOL * (1.0 + x.abs())
}

/// `(N^i_k)^{1/k} = max(sqrt((M^i_k)^{1/k}), max_{1 <= j <= k} L̄_j^{1/j})`
/// for `i = 1, 2`, `N^i_0 = 1`.
///
/// `log_l[k] = ln L_k` (`-inf` for zero entries); `L_0 <= 1` is required.
pub fn lemma4_construct(
    log_l: &[f64],
    m1: &WeightSequence,
    m2: &WeightSequence,
    m3: &WeightSequence,
    h1: f64,
    cfg: &CheckConfig,
) -> Result<Lemma4Output> {
    if !(h1 >= 1.0) {
        return Err(Error::param("H1", "must be at least 1"));
    }
    if log_l.is_empty() || log_l[0] > 0.0 {
        return Err(Error::param("L", "need L_0 <= 1"));
    }
    let k_max = (log_l.len() - 1)
        .min(m1.truncation())
        .min(m2.truncation())
        .min(m3.truncation())
        .min(cfg.truncation);
    if k_max < 8 {
        return Err(Error::param("K", "need K >= 8"));
    }
    let mut zero_entries = Vec::new();
    let l_bar: Vec<f64> = log_l[..=k_max]
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if x == f64::NEG_INFINITY {
                zero_entries.push(k);
                0.0
            } else {
                x
            }
        })
        .collect();
    if l_bar.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return Err(Error::param("L", "entries must be finite or zero"));
    }

    let build = |m: &WeightSequence| -> Vec<f64> {
        let t = m.log_terms();
        let mut out = Vec::with_capacity(k_max + 1);
        out.push(0.0);
        let mut lmax = f64::NEG_INFINITY;
        for k in 1..=k_max {
            lmax = lmax.max(l_bar[k] / k as f64);
            let root = (0.5 * t[k] / k as f64).max(lmax);
            out.push(k as f64 * root);
        }
        out
    };
    let n1 = build(m1);
    let n2 = build(m2);

    let l_le_n1 = (0..=k_max).all(|k| l_bar[k] <= n1[k] + tol(n1[k]));
    let n1_le_n2 = (0..=k_max).all(|k| n1[k] <= n2[k] + tol(n2[k]));
    let half_ln_h1 = 0.5 * libm::log(h1);
    let mut best = f64::NEG_INFINITY;
    let mut excess = f64::NEG_INFINITY;
    let mut comparison_holds = true;
    for k in 1..=k_max {
        best = best.max(n1[k] / k as f64);
        let e = best - n2[k] / k as f64 - half_ln_h1;
        excess = excess.max(e);
        if e > tol(n2[k] / k as f64) {
            comparison_holds = false;
        }
    }

    let t3 = m3.log_terms();
    let track: Vec<Checkpoint> = checkpoint_schedule(k_max)
        .into_iter()
        .map(|k| Checkpoint {
            index: k.into(),
            stat: (n2[k] - t3[k]) / k as f64,
        })
        .collect();
    let last = *track.last().expect("non-empty schedule");
    let trend_status = vanishing_rule(&track, cfg);
    let trend = Verdict::new(
        trend_status,
        k_max,
        track,
        Some(Witness {
            j: last.index,
            k: last.index,
            value: last.stat,
        }),
    );

    let preconditions = preconditions(&l_bar, m1, m2, m3, h1, k_max, cfg)?;
    Ok(Lemma4Output {
        l_bar,
        zero_entries,
        n1,
        n2,
        l_le_n1,
        n1_le_n2,
        comparison_excess: excess,
        comparison_holds,
        trend,
        preconditions,
    })
}

fn preconditions(
    l_bar: &[f64],
    m1: &WeightSequence,
    m2: &WeightSequence,
    m3: &WeightSequence,
    h1: f64,
    k_max: usize,
    cfg: &CheckConfig,
) -> Result<Vec<(&'static str, Status)>> {
    let t1 = m1.log_terms();
    let track: Vec<Checkpoint> = checkpoint_schedule(k_max)
        .into_iter()
        .map(|k| Checkpoint {
            index: k.into(),
            stat: (l_bar[k] - t1[k]) / k as f64,
        })
        .collect();
    let below = vanishing_rule(&track, cfg);
    let ordered = |a: &WeightSequence, b: &WeightSequence| {
        let (x, y) = (a.log_terms(), b.log_terms());
        if (0..=k_max).all(|k| x[k] <= y[k] + tol(y[k])) {
            Status::HoldsUpTo
        } else {
            Status::Refuted
        }
    };
    let chain = if rai_constant(m1, m2, k_max, false) <= libm::log(h1) + TOL {
        Status::HoldsUpTo
    } else {
        Status::Refuted
    };
    let cfg_k = cfg.clone().with_truncation(k_max);
    let mut out = alloc::vec![
        ("L tends to zero against M1", below),
        ("M1 <= M2", ordered(m1, m2)),
        ("M2 <= M3", ordered(m2, m3)),
        ("root comparison M1 -> M2 within H1", chain),
    ];
    for (name, m) in [("M1 roots unbounded", m1), ("M2 roots unbounded", m2), ("M3 roots unbounded", m3)] {
        out.push((name, check_growth(m, GrowthCondition::RootToInfinity, &cfg_k)?.status));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ln_factorial;

    #[test]
    fn constant_l_against_factorials() {
        let g = WeightSequence::gevrey(1.0, 512).unwrap();
        let l = alloc::vec![0.0; 513];
        let cfg = CheckConfig::default().with_truncation(512);
        let out = lemma4_construct(&l, &g, &g, &g, 1.0, &cfg).unwrap();
        for k in 2..=512 {
            assert!((out.n1[k] - 0.5 * ln_factorial(k as u128)).abs() < 1e-9);
        }
        assert_eq!(out.n1[0], 0.0);
        assert!(out.l_le_n1 && out.n1_le_n2 && out.comparison_holds);
        assert_eq!(out.trend.status, Status::HoldsUpTo);
    }

    #[test]
    fn zero_entries_match_ones() {
        let g = WeightSequence::gevrey(1.5, 64).unwrap();
        let cfg = CheckConfig::default().with_truncation(64);
        let mut l: Vec<f64> = (0..=64).map(|k| k as f64 * 0.7).collect();
        l[0] = 0.0;
        let mut with_zero = l.clone();
        with_zero[5] = f64::NEG_INFINITY;
        l[5] = 0.0;
        let a = lemma4_construct(&with_zero, &g, &g, &g, 1.0, &cfg).unwrap();
        let b = lemma4_construct(&l, &g, &g, &g, 1.0, &cfg).unwrap();
        assert_eq!(a.n1, b.n1);
        assert_eq!(a.n2, b.n2);
        assert_eq!(a.zero_entries, alloc::vec![5]);
    }

    #[test]
    fn l0_above_one_rejected() {
        let g = WeightSequence::gevrey(1.0, 16).unwrap();
        let l = alloc::vec![0.5; 17];
        assert!(lemma4_construct(&l, &g, &g, &g, 1.0, &CheckConfig::default()).is_err());
    }
}

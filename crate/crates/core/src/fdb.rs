//! Composition combinatorics: `M°`, the (FdB) check and the coefficients
//! `N(beta)` of `prod_{j=1}^k (t_1 + ... + t_j)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::seq::WeightSequence;
use crate::verdict::{bounded_rule, checkpoint_schedule, CheckConfig, Checkpoint, Verdict, Witness};

/// Largest `k` accepted by the exhaustive enumeration.
pub const BRUTE_FORCE_MAX: usize = 14;

/// Largest `k` for which `N(beta)` is computed.
pub const N_BETA_MAX: usize = 9;

/// A (max, times) semiring element: log-domain floats or exact rationals.
pub trait CompositionWeight: Clone {
    fn unit() -> Self;
    fn combine(&self, other: &Self) -> Self;
    /// Strictly better than `other`.
    fn better(&self, other: &Self) -> bool;
}

impl CompositionWeight for f64 {
    fn unit() -> Self {
        0.0
    }
    fn combine(&self, other: &Self) -> Self {
        self + other
    }
    fn better(&self, other: &Self) -> bool {
        self > other
    }
}

impl CompositionWeight for BigRational {
    fn unit() -> Self {
        BigRational::one()
    }
    fn combine(&self, other: &Self) -> Self {
        self * other
    }
    fn better(&self, other: &Self) -> bool {
        self > other
    }
}

/// `M°_k` for `k = 0..=K` together with the maximizing `(j, alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionTable<T> {
    pub m_circ: Vec<T>,
    /// Lexicographically smallest maximizer for each `k >= 1`; empty at `k = 0`.
    pub witnesses: Vec<(usize, Vec<usize>)>,
}

/// `M°_k = max_{1<=j<=k} M_j b(j, k)`, `b(j, k) = max_a M_a b(j-1, k-a)`.
///
/// `values[k]` is `M_k` in the chosen semiring (`ln M_k` for floats).
pub fn m_circ_table<T: CompositionWeight>(values: &[T], k_max: usize) -> Result<CompositionTable<T>> {
    if values.len() <= k_max {
        return Err(Error::LengthMismatch(alloc::format!(
            "need M_0..M_{k_max}, got {} terms",
            values.len()
        )));
    }
    // b[j][k], first part choice[j][k]; j = 0 row is the empty composition
    let mut b: Vec<Vec<Option<T>>> = alloc::vec![alloc::vec![None; k_max + 1]; k_max + 1];
    let mut first: Vec<Vec<usize>> = alloc::vec![alloc::vec![0; k_max + 1]; k_max + 1];
    b[0][0] = Some(T::unit());
    for j in 1..=k_max {
        for k in j..=k_max {
            let mut best: Option<T> = None;
            let mut arg = 0;
            for a in 1..=(k - j + 1) {
                let Some(rest) = &b[j - 1][k - a] else { continue };
                let cand = values[a].combine(rest);
                if best.as_ref().map_or(true, |cur| cand.better(cur)) {
                    best = Some(cand);
                    arg = a;
                }
            }
            b[j][k] = best;
            first[j][k] = arg;
        }
    }
    let mut m_circ = Vec::with_capacity(k_max + 1);
    let mut witnesses = Vec::with_capacity(k_max + 1);
    m_circ.push(T::unit());
    witnesses.push((0, Vec::new()));
    for k in 1..=k_max {
        let mut best: Option<T> = None;
        let mut arg = 0;
        for j in 1..=k {
            let cand = values[j].combine(b[j][k].as_ref().expect("filled"));
            if best.as_ref().map_or(true, |cur| cand.better(cur)) {
                best = Some(cand);
                arg = j;
            }
        }
        let mut alpha = Vec::with_capacity(arg);
        let (mut j, mut rest) = (arg, k);
        while j > 0 {
            let a = first[j][rest];
            alpha.push(a);
            rest -= a;
            j -= 1;
        }
        m_circ.push(best.expect("k >= 1"));
        witnesses.push((arg, alpha));
    }
    Ok(CompositionTable { m_circ, witnesses })
}

/// `ln M°_k` for `k = 0..=K`, refusing `K` above the configured cap.
pub fn m_circ_dp(w: &WeightSequence, k_max: usize, dp_cap: usize) -> Result<CompositionTable<f64>> {
    if k_max > dp_cap {
        return Err(Error::DpCapExceeded { k: k_max, cap: dp_cap });
    }
    if k_max > w.truncation() {
        return Err(Error::BeyondPrefix {
            k: k_max,
            len: w.log_terms().len(),
        });
    }
    m_circ_table(w.log_terms(), k_max)
}

/// Visit every composition of `k` (ordered tuple of positive parts) in
/// lexicographic order.
pub fn for_each_composition(k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 {
        f(&[]);
        return;
    }
    let mut parts = Vec::with_capacity(k);
    fn rec(rest: usize, parts: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if rest == 0 {
            f(parts);
            return;
        }
        for a in 1..=rest {
            parts.push(a);
            rec(rest - a, parts, f);
            parts.pop();
        }
    }
    rec(k, &mut parts, &mut f);
}

/// `M°_k` by exhaustive enumeration of all `(j, alpha)`.
pub fn m_circ_bruteforce<T: CompositionWeight>(values: &[T], k: usize) -> Result<T> {
    if k > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            what: "composition enumeration",
            k,
            max: BRUTE_FORCE_MAX,
        });
    }
    if values.len() <= k {
        return Err(Error::LengthMismatch(alloc::format!("need M_0..M_{k}")));
    }
    if k == 0 {
        return Ok(T::unit());
    }
    let mut best: Option<T> = None;
    for_each_composition(k, |alpha| {
        let mut v = values[alpha.len()].clone();
        for &a in alpha {
            v = v.combine(&values[a]);
        }
        if best.as_ref().map_or(true, |cur| v.better(cur)) {
            best = Some(v);
        }
    });
    Ok(best.expect("k >= 1 has compositions"))
}

/// `(M°_k / M_k)^{1/k}` (log) as a running supremum over checkpoints, up to
/// `min(K, dp_cap)`.
pub fn check_fdb_property(w: &WeightSequence, cfg: &CheckConfig) -> Result<Verdict> {
    let k_max = cfg.truncation.min(w.truncation()).min(cfg.dp_cap);
    fdb_pair_verdict(w, w, k_max, cfg)
}

/// `((M^left)°_k / M^right_k)^{1/k}` (log) as a running supremum.
pub fn fdb_pair_verdict(
    left: &WeightSequence,
    right: &WeightSequence,
    k_max: usize,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let k_max = k_max.min(right.truncation());
    if k_max < 8 {
        return Err(Error::param("K", "FdB checks need K >= 8"));
    }
    let table = m_circ_dp(left, k_max, cfg.dp_cap)?;
    fdb_verdict_from_table(&table, right, k_max, cfg)
}

/// As [`fdb_pair_verdict`] with `(M^left)°` already tabulated up to at least
/// `k_max`.
pub fn fdb_verdict_from_table(
    table: &CompositionTable<f64>,
    right: &WeightSequence,
    k_max: usize,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let k_max = k_max.min(right.truncation()).min(table.m_circ.len() - 1);
    if k_max < 8 {
        return Err(Error::param("K", "FdB checks need K >= 8"));
    }
    let rt = right.log_terms();
    let schedule = checkpoint_schedule(k_max);
    let mut sup = f64::NEG_INFINITY;
    let mut witness = Witness::exact(1, 1, 0.0);
    let mut track = Vec::new();
    let mut next = 0;
    for k in 1..=k_max {
        let s = (table.m_circ[k] - rt[k]) / k as f64;
        if s > sup {
            sup = s;
            witness = Witness::exact(table.witnesses[k].0, k, s);
        }
        if next < schedule.len() && schedule[next] == k {
            track.push(Checkpoint {
                index: k.into(),
                stat: sup,
            });
            next += 1;
        }
    }
    let status = bounded_rule(&track, cfg);
    Ok(Verdict::new(status, k_max, track, Some(witness)))
}

/// Exponent vector of a monomial in `t_1..t_k`.
pub type Monomial = Vec<u32>;

/// Coefficients `N(beta)` of `prod_{j=1}^k sum_{l=1}^j t_l`, by iterated
/// sparse multiplication.
pub fn n_beta_coefficients(k: usize) -> Result<BTreeMap<Monomial, u64>> {
    if k > N_BETA_MAX {
        return Err(Error::TooLarge {
            what: "N(beta) coefficients",
            k,
            max: N_BETA_MAX,
        });
    }
    let mut poly: BTreeMap<Monomial, u64> = BTreeMap::new();
    poly.insert(alloc::vec![0; k], 1);
    for j in 1..=k {
        let mut next: BTreeMap<Monomial, u64> = BTreeMap::new();
        for (mono, c) in &poly {
            for l in 0..j {
                let mut m = mono.clone();
                m[l] += 1;
                *next.entry(m).or_insert(0) += c;
            }
        }
        poly = next;
    }
    Ok(poly)
}

/// `N(beta)` by counting the maps `f: {1..k} -> {1..k}` with `f(j) <= j`;
/// `beta_i` is the size of the fibre over `i`.
pub fn n_beta_by_enumeration(k: usize) -> Result<BTreeMap<Monomial, u64>> {
    if k > N_BETA_MAX {
        return Err(Error::TooLarge {
            what: "N(beta) enumeration",
            k,
            max: N_BETA_MAX,
        });
    }
    let mut out: BTreeMap<Monomial, u64> = BTreeMap::new();
    // mixed-radix counter: choice[j] ranges over 0..=j
    let mut choice = alloc::vec![0usize; k];
    loop {
        let mut beta = alloc::vec![0u32; k];
        for &c in &choice {
            beta[c] += 1;
        }
        *out.entry(beta).or_insert(0) += 1;
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(out);
            }
            if choice[pos] < pos {
                choice[pos] += 1;
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ln_factorial, rational};
    use crate::verdict::Status;

    #[test]
    fn constant_sequence_has_trivial_m_circ() {
        let ones = WeightSequence::constant_one(20);
        let t = m_circ_dp(&ones, 20, 512).unwrap();
        assert!(t.m_circ.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn factorial_m_circ_three() {
        let v: Vec<BigRational> = [1, 1, 2, 6].iter().map(|&x| rational(x, 1)).collect();
        let t = m_circ_table(&v, 3).unwrap();
        assert_eq!(t.m_circ[3], rational(6, 1));
        assert_eq!(t.witnesses[3], (1, alloc::vec![3]));
        assert_eq!(m_circ_bruteforce(&v, 3).unwrap(), rational(6, 1));
    }

    #[test]
    fn m_circ_zero_is_one() {
        let g = WeightSequence::gevrey(1.0, 10).unwrap();
        assert_eq!(m_circ_dp(&g, 10, 512).unwrap().m_circ[0], 0.0);
    }

    #[test]
    fn brute_force_single_part() {
        let v: Vec<f64> = alloc::vec![0.0, 0.7, 1.9];
        assert_eq!(m_circ_bruteforce(&v, 1).unwrap(), 1.4);
        assert!(m_circ_bruteforce(&v, 15).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let g = WeightSequence::gevrey(1.0, 600).unwrap();
        assert_eq!(
            m_circ_dp(&g, 600, 512).unwrap_err(),
            Error::DpCapExceeded { k: 600, cap: 512 }
        );
    }

    #[test]
    fn gevrey_one_j1_composition_maximal() {
        let g = WeightSequence::gevrey(1.0, 12).unwrap();
        let t = m_circ_dp(&g, 12, 512).unwrap();
        for k in 1..=12 {
            assert!((t.m_circ[k] - ln_factorial(k as u128)).abs() < 1e-12);
        }
    }

    #[test]
    fn fdb_checks_on_families() {
        let cfg = CheckConfig::default().with_truncation(256);
        let ones = WeightSequence::constant_one(256);
        let v = check_fdb_property(&ones, &cfg).unwrap();
        assert_eq!(v.status, Status::HoldsUpTo);
        assert_eq!(v.constant_estimate, 0.0);
        let g = WeightSequence::gevrey(1.0, 256).unwrap();
        assert_eq!(check_fdb_property(&g, &cfg).unwrap().status, Status::HoldsUpTo);
    }

    #[test]
    fn n_beta_small_cases() {
        let n2 = n_beta_coefficients(2).unwrap();
        assert_eq!(n2.len(), 2);
        assert_eq!(n2[&alloc::vec![2, 0]], 1);
        assert_eq!(n2[&alloc::vec![1, 1]], 1);
        let n3 = n_beta_coefficients(3).unwrap();
        assert_eq!(n3[&alloc::vec![3, 0, 0]], 1);
        assert_eq!(n3[&alloc::vec![2, 1, 0]], 2);
        assert_eq!(n3[&alloc::vec![1, 2, 0]], 1);
        assert_eq!(n3[&alloc::vec![2, 0, 1]], 1);
        assert_eq!(n3[&alloc::vec![1, 1, 1]], 1);
        assert_eq!(n3.values().sum::<u64>(), 6);
        assert!(n_beta_coefficients(10).is_err());
    }

    #[test]
    fn n_beta_routes_agree() {
        for k in 0..=7 {
            assert_eq!(n_beta_coefficients(k).unwrap(), n_beta_by_enumeration(k).unwrap(), "k = {k}");
        }
    }

    #[test]
    fn composition_count() {
        let mut n = 0;
        for_each_composition(6, |_| n += 1);
        assert_eq!(n, 32);
    }
}

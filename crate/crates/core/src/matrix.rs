//! Weight matrices and their Roumieu/Beurling conditions.
//!
//! Every `forall lambda exists mu` quantifier is resolved by exhaustive search
//! over the finite index set; the inner statistic is delegated to the
//! sequence and composition checkers.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fdb::{fdb_verdict_from_table, m_circ_dp, CompositionTable};
use crate::seq::{check_growth, pair_root_verdict, GrowthCondition, SparseForm, WeightSequence};
use crate::verdict::{bounded_rule, checkpoint_schedule, CheckConfig, Checkpoint, RaiReading, Status, Verdict, Witness};

/// Slack for the pointwise ordering of rows built in floating point.
const ORDER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    lambdas: Vec<f64>,
    rows: Vec<WeightSequence>,
}

impl WeightMatrix {
    /// Rows must be pointwise ordered along the strictly increasing `lambdas`
    /// on their common stored prefix.
    pub fn new(lambdas: Vec<f64>, rows: Vec<WeightSequence>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != rows.len() {
            return Err(Error::LengthMismatch(alloc::format!(
                "{} lambdas for {} rows",
                lambdas.len(),
                rows.len()
            )));
        }
        if lambdas.iter().any(|l| !l.is_finite()) || lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("lambdas", "must be finite and strictly increasing"));
        }
        for i in 1..rows.len() {
            let (lo, hi) = (rows[i - 1].log_terms(), rows[i].log_terms());
            if let Some(k) = (0..lo.len().min(hi.len()))
                .find(|&k| lo[k] > hi[k] + ORDER_SLACK * (1.0 + hi[k].abs()))
            {
                return Err(Error::param(
                    "rows",
                    alloc::format!("rows {} and {} are not ordered at k = {k}", i - 1, i),
                ));
            }
        }
        Ok(WeightMatrix { lambdas, rows })
    }

    pub fn single(row: WeightSequence) -> Self {
        WeightMatrix {
            lambdas: alloc::vec![1.0],
            rows: alloc::vec![row],
        }
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn rows(&self) -> &[WeightSequence] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &WeightSequence {
        &self.rows[i]
    }

    fn min_truncation(&self) -> usize {
        self.rows.iter().map(|r| r.truncation()).min().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixCondition {
    /// `forall lambda: liminf (M^lambda_k)^{1/k} > 0`
    H,
    /// `forall lambda: (M^lambda_k)^{1/k} -> inf`
    ComegaBeurling,
    /// `exists lambda: liminf (M^lambda_k)^{1/k} > 0`
    ComegaRoumieu,
    DcRoumieu,
    DcBeurling,
    RaiRoumieu,
    RaiBeurling,
    FdbRoumieu,
    FdbBeurling,
}

impl MatrixCondition {
    pub const ALL: [MatrixCondition; 9] = [
        MatrixCondition::H,
        MatrixCondition::ComegaBeurling,
        MatrixCondition::ComegaRoumieu,
        MatrixCondition::DcRoumieu,
        MatrixCondition::DcBeurling,
        MatrixCondition::RaiRoumieu,
        MatrixCondition::RaiBeurling,
        MatrixCondition::FdbRoumieu,
        MatrixCondition::FdbBeurling,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MatrixCondition::H => "H",
            MatrixCondition::ComegaBeurling => "Comega_B",
            MatrixCondition::ComegaRoumieu => "Comega_R",
            MatrixCondition::DcRoumieu => "dc_R",
            MatrixCondition::DcBeurling => "dc_B",
            MatrixCondition::RaiRoumieu => "rai_R",
            MatrixCondition::RaiBeurling => "rai_B",
            MatrixCondition::FdbRoumieu => "FdB_R",
            MatrixCondition::FdbBeurling => "FdB_B",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }

    fn is_roumieu(&self) -> bool {
        matches!(
            self,
            MatrixCondition::DcRoumieu | MatrixCondition::RaiRoumieu | MatrixCondition::FdbRoumieu
        )
    }

    fn is_pairwise(&self) -> bool {
        !matches!(
            self,
            MatrixCondition::H | MatrixCondition::ComegaBeurling | MatrixCondition::ComegaRoumieu
        )
    }
}

/// Outcome for one row `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaResult {
    pub lambda: usize,
    pub status: Status,
    /// First `mu` in search order whose pair verdict holds.
    pub witness_mu: Option<usize>,
    /// Pair verdicts in search order (a single entry for row conditions).
    pub tried: Vec<(usize, Verdict)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixVerdict {
    pub condition: MatrixCondition,
    pub status: Status,
    pub per_lambda: Vec<LambdaResult>,
}

impl MatrixVerdict {
    /// `mu(lambda)` for every row, `None` where no pair holds.
    pub fn witness_map(&self) -> Vec<Option<usize>> {
        self.per_lambda.iter().map(|r| r.witness_mu).collect()
    }
}

/// `(ln M^upper_{k+1} - ln M^lower_k) / k` as a running supremum.
pub fn dc_pair_verdict(
    upper: &WeightSequence,
    lower: &WeightSequence,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let k_max = cfg.truncation.min(lower.truncation()).min(upper.truncation().saturating_sub(1));
    if k_max < 8 {
        return Err(Error::param("K", "derivation-closure checks need K >= 8"));
    }
    let (u, l) = (upper.log_terms(), lower.log_terms());
    let schedule = checkpoint_schedule(k_max);
    let mut sup = f64::NEG_INFINITY;
    let mut arg = 1;
    let mut track = Vec::new();
    let mut next = 0;
    for k in 1..=k_max {
        let s = (u[k + 1] - l[k]) / k as f64;
        if s > sup {
            sup = s;
            arg = k;
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
    Ok(Verdict::new(status, k_max, track, Some(Witness::exact(arg + 1, arg, sup))))
}

/// Lazily filled `M°` tables, one per row.
struct FdbCache<'a> {
    matrix: &'a WeightMatrix,
    k_max: usize,
    tables: Vec<Option<CompositionTable<f64>>>,
}

impl<'a> FdbCache<'a> {
    fn new(matrix: &'a WeightMatrix, k_max: usize) -> Self {
        FdbCache {
            matrix,
            k_max,
            tables: alloc::vec![None; matrix.len()],
        }
    }

    fn verdict(&mut self, left: usize, right: usize, cfg: &CheckConfig) -> Result<Verdict> {
        if self.tables[left].is_none() {
            self.tables[left] = Some(m_circ_dp(self.matrix.row(left), self.k_max, cfg.dp_cap)?);
        }
        let table = self.tables[left].as_ref().expect("filled");
        fdb_verdict_from_table(table, self.matrix.row(right), self.k_max, cfg)
    }
}

/// Candidate `mu` order: Roumieu scans upward from `lambda` and then below
/// it, Beurling scans upward from the smallest row.
fn search_order(n: usize, lambda: usize, roumieu: bool) -> Vec<usize> {
    if roumieu {
        (lambda..n).chain((0..lambda).rev()).collect()
    } else {
        (0..n).collect()
    }
}

fn combine_exists(statuses: impl Iterator<Item = Status>) -> Status {
    let mut all_refuted = true;
    for s in statuses {
        if s == Status::HoldsUpTo {
            return Status::HoldsUpTo;
        }
        if s != Status::Refuted {
            all_refuted = false;
        }
    }
    if all_refuted {
        Status::Refuted
    } else {
        Status::Estimate
    }
}

fn combine_forall(statuses: impl Iterator<Item = Status>) -> Status {
    let mut all_hold = true;
    for s in statuses {
        if s == Status::Refuted {
            return Status::Refuted;
        }
        if s != Status::HoldsUpTo {
            all_hold = false;
        }
    }
    if all_hold {
        Status::HoldsUpTo
    } else {
        Status::Estimate
    }
}

/// Decide a matrix condition at the configured truncation.
pub fn check_matrix_condition(
    m: &WeightMatrix,
    cond: MatrixCondition,
    cfg: &CheckConfig,
) -> Result<MatrixVerdict> {
    let n = m.len();
    let mut per_lambda = Vec::with_capacity(n);
    if !cond.is_pairwise() {
        let which = match cond {
            MatrixCondition::ComegaBeurling => GrowthCondition::RootToInfinity,
            _ => GrowthCondition::LiminfRootPositive,
        };
        for i in 0..n {
            let v = check_growth(m.row(i), which, cfg)?;
            per_lambda.push(LambdaResult {
                lambda: i,
                status: v.status,
                witness_mu: None,
                tried: alloc::vec![(i, v)],
            });
        }
        let statuses = per_lambda.iter().map(|r| r.status);
        let status = if cond == MatrixCondition::ComegaRoumieu {
            combine_exists(statuses)
        } else {
            combine_forall(statuses)
        };
        return Ok(MatrixVerdict {
            condition: cond,
            status,
            per_lambda,
        });
    }

    let fdb_k = cfg.truncation.min(cfg.dp_cap).min(m.min_truncation());
    let mut cache = FdbCache::new(m, fdb_k);
    for lambda in 0..n {
        let mut tried = Vec::new();
        let mut witness_mu = None;
        for mu in search_order(n, lambda, cond.is_roumieu()) {
            let v = pair_verdict(m, cond, lambda, mu, cfg, &mut cache)?;
            let holds = v.status == Status::HoldsUpTo;
            tried.push((mu, v));
            if holds {
                witness_mu = Some(mu);
                break;
            }
        }
        let status = combine_exists(tried.iter().map(|(_, v)| v.status));
        per_lambda.push(LambdaResult {
            lambda,
            status,
            witness_mu,
            tried,
        });
    }
    let status = combine_forall(per_lambda.iter().map(|r| r.status));
    Ok(MatrixVerdict {
        condition: cond,
        status,
        per_lambda,
    })
}

fn pair_verdict(
    m: &WeightMatrix,
    cond: MatrixCondition,
    lambda: usize,
    mu: usize,
    cfg: &CheckConfig,
    cache: &mut FdbCache<'_>,
) -> Result<Verdict> {
    let (l, u) = (m.row(lambda), m.row(mu));
    match cond {
        MatrixCondition::RaiRoumieu => pair_root_verdict(l, u, cfg),
        MatrixCondition::RaiBeurling => match cfg.rai_reading {
            RaiReading::MuLeft => pair_root_verdict(u, l, cfg),
            RaiReading::AsPrinted => pair_root_verdict(l, l, cfg),
        },
        MatrixCondition::DcRoumieu if lambda == mu => {
            check_growth(l, GrowthCondition::DerivationClosed, cfg)
        }
        MatrixCondition::DcBeurling if lambda == mu => {
            check_growth(l, GrowthCondition::DerivationClosed, cfg)
        }
        MatrixCondition::DcRoumieu => dc_pair_verdict(l, u, cfg),
        MatrixCondition::DcBeurling => dc_pair_verdict(u, l, cfg),
        MatrixCondition::FdbRoumieu => cache.verdict(lambda, mu, cfg),
        MatrixCondition::FdbBeurling => cache.verdict(mu, lambda, cfg),
        _ => unreachable!("row conditions are handled separately"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    Inconclusive,
    Violated,
}

impl Consistency {
    pub fn as_str(&self) -> &'static str {
        match self {
            Consistency::Consistent => "consistent",
            Consistency::Inconclusive => "inconclusive",
            Consistency::Violated => "violated",
        }
    }
}

/// One implication `premises => conclusion` judged on finite verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct Implication {
    pub premises: Vec<(MatrixCondition, Status)>,
    pub conclusion: (MatrixCondition, Status),
    pub outcome: Consistency,
    /// Row at which the conclusion fails while every premise holds.
    pub witness_lambda: Option<usize>,
}

fn judge(premises: &[&MatrixVerdict], conclusion: &MatrixVerdict) -> Implication {
    let statuses: Vec<Status> = premises.iter().map(|v| v.status).collect();
    let any_refuted = statuses.iter().any(|s| *s == Status::Refuted);
    let all_hold = statuses.iter().all(|s| *s == Status::HoldsUpTo);
    let outcome = match (any_refuted, all_hold, conclusion.status) {
        (true, _, _) => Consistency::Consistent,
        (_, _, Status::HoldsUpTo) => Consistency::Consistent,
        (_, true, Status::Refuted) => Consistency::Violated,
        _ => Consistency::Inconclusive,
    };
    let witness_lambda = (outcome == Consistency::Violated)
        .then(|| conclusion.per_lambda.iter().find(|r| r.status == Status::Refuted))
        .flatten()
        .map(|r| r.lambda);
    Implication {
        premises: premises.iter().map(|v| (v.condition, v.status)).collect(),
        conclusion: (conclusion.condition, conclusion.status),
        outcome,
        witness_lambda,
    }
}

/// `rai & dc => FdB` and `FdB & H => rai`, in both the Roumieu and the
/// Beurling form.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Report {
    pub roumieu: [Implication; 2],
    pub beurling: [Implication; 2],
}

impl Lemma1Report {
    pub fn overall(&self) -> Consistency {
        let all = self.roumieu.iter().chain(self.beurling.iter());
        let mut worst = Consistency::Consistent;
        for imp in all {
            match imp.outcome {
                Consistency::Violated => return Consistency::Violated,
                Consistency::Inconclusive => worst = Consistency::Inconclusive,
                Consistency::Consistent => {}
            }
        }
        worst
    }
}

pub fn verify_lemma1(m: &WeightMatrix, cfg: &CheckConfig) -> Result<Lemma1Report> {
    use MatrixCondition as C;
    let get = |c| check_matrix_condition(m, c, cfg);
    let h = get(C::H)?;
    let (rai_r, dc_r, fdb_r) = (get(C::RaiRoumieu)?, get(C::DcRoumieu)?, get(C::FdbRoumieu)?);
    let (rai_b, dc_b, fdb_b) = (get(C::RaiBeurling)?, get(C::DcBeurling)?, get(C::FdbBeurling)?);
    Ok(Lemma1Report {
        roumieu: [judge(&[&rai_r, &dc_r], &fdb_r), judge(&[&fdb_r, &h], &rai_r)],
        beurling: [judge(&[&rai_b, &dc_b], &fdb_b), judge(&[&fdb_b, &h], &rai_b)],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Remark2Kind {
    /// Almost increasing lower row, non-almost-increasing upper row.
    BeurlingNotRoumieu,
    /// Non-almost-increasing lower row, almost increasing upper row.
    RoumieuNotBeurling,
}

impl Remark2Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Remark2Kind::BeurlingNotRoumieu => "beurling_not_roumieu",
            Remark2Kind::RoumieuNotBeurling => "roumieu_not_beurling",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "beurling_not_roumieu" | "1" | "kind1" => Some(Remark2Kind::BeurlingNotRoumieu),
            "roumieu_not_beurling" | "2" | "kind2" => Some(Remark2Kind::RoumieuNotBeurling),
            _ => None,
        }
    }
}

/// Lower Gevrey exponent for the first kind.
pub const REMARK2_LOWER_S: f64 = 0.25;
/// Upper Gevrey exponent for the second kind.
pub const REMARK2_UPPER_T: f64 = 3.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Remark2Matrix {
    pub kind: Remark2Kind,
    pub matrix: WeightMatrix,
    /// Row whose prefix was adjusted, and the adjusted indices.
    pub adjusted_row: usize,
    pub adjusted: Vec<usize>,
}

impl Remark2Matrix {
    pub fn adjusted_range(&self) -> Option<(usize, usize)> {
        Some((*self.adjusted.first()?, *self.adjusted.last()?))
    }
}

/// Two-row matrices whose Roumieu and Beurling (rai) conditions disagree.
///
/// The Gevrey row is moved onto the closed-form row wherever the ordering
/// would fail; the closed-form row is kept intact.
pub fn build_remark2(kind: Remark2Kind, k_max: usize) -> Result<Remark2Matrix> {
    if k_max < 64 {
        return Err(Error::param("K", "need K >= 64"));
    }
    let special = WeightSequence::appendix_a(k_max)?;
    let (rows, adjusted_row, adjusted) = match kind {
        Remark2Kind::BeurlingNotRoumieu => {
            let g = WeightSequence::gevrey(REMARK2_LOWER_S, k_max)?;
            let (g, changed) = g.adjusted_on_prefix(&special, k_max, true);
            (alloc::vec![g, special], 0, changed)
        }
        Remark2Kind::RoumieuNotBeurling => {
            let g = WeightSequence::gevrey(REMARK2_UPPER_T, k_max)?;
            let (g, changed) = g.adjusted_on_prefix(&special, k_max, false);
            (alloc::vec![special, g], 1, changed)
        }
    };
    let mut rows = rows;
    let label: String = alloc::format!("{}-adjusted", rows[adjusted_row].label());
    rows[adjusted_row] = rows[adjusted_row].clone().with_label(label);
    debug_assert!(matches!(rows[adjusted_row].sparse_form(), Some(SparseForm::Gevrey { .. })));
    let matrix = WeightMatrix::new(alloc::vec![1.0, 2.0], rows)?;
    Ok(Remark2Matrix {
        kind,
        matrix,
        adjusted_row,
        adjusted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize) -> CheckConfig {
        CheckConfig::default().with_truncation(k)
    }

    #[test]
    fn unordered_rows_rejected() {
        let a = WeightSequence::gevrey(1.0, 20).unwrap();
        let b = WeightSequence::gevrey(0.5, 20).unwrap();
        assert!(WeightMatrix::new(alloc::vec![1.0, 2.0], alloc::vec![a.clone(), b.clone()]).is_err());
        assert!(WeightMatrix::new(alloc::vec![1.0, 2.0], alloc::vec![b, a]).is_ok());
    }

    #[test]
    fn single_row_degenerates() {
        let g = WeightSequence::gevrey(1.0, 512).unwrap();
        let m = WeightMatrix::single(g.clone());
        let c = cfg(512);
        let rai = check_matrix_condition(&m, MatrixCondition::RaiRoumieu, &c).unwrap();
        let direct = crate::seq::check_almost_increasing(&g, &c).unwrap();
        assert_eq!(rai.status, Status::HoldsUpTo);
        assert_eq!(rai.per_lambda[0].tried[0].1, direct);
        let fdb = check_matrix_condition(&m, MatrixCondition::FdbRoumieu, &c).unwrap();
        assert_eq!(fdb.per_lambda[0].tried[0].1, crate::fdb::check_fdb_property(&g, &c).unwrap());
        let dc = check_matrix_condition(&m, MatrixCondition::DcBeurling, &c).unwrap();
        assert_eq!(
            dc.per_lambda[0].tried[0].1,
            check_growth(&g, GrowthCondition::DerivationClosed, &c).unwrap()
        );
    }

    #[test]
    fn constant_row_satisfies_h() {
        let m = WeightMatrix::single(WeightSequence::constant_one(64));
        let v = check_matrix_condition(&m, MatrixCondition::H, &cfg(64)).unwrap();
        assert_eq!(v.status, Status::HoldsUpTo);
        assert_eq!(v.per_lambda[0].tried[0].1.constant(), 1.0);
    }

    #[test]
    fn roumieu_witness_not_below_lambda() {
        let rows: Vec<WeightSequence> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&s| WeightSequence::gevrey(s, 256).unwrap())
            .collect();
        let m = WeightMatrix::new(alloc::vec![1.0, 2.0, 3.0], rows).unwrap();
        let v = check_matrix_condition(&m, MatrixCondition::RaiRoumieu, &cfg(256)).unwrap();
        for (i, mu) in v.witness_map().into_iter().enumerate() {
            assert!(mu.unwrap() >= i);
        }
    }

    #[test]
    fn remark2_rows_ordered_and_recorded() {
        let r = build_remark2(Remark2Kind::BeurlingNotRoumieu, 512).unwrap();
        let (lo, hi) = (r.matrix.row(0).log_terms(), r.matrix.row(1).log_terms());
        assert!((0..=512).all(|k| lo[k] <= hi[k]));
        let r = build_remark2(Remark2Kind::RoumieuNotBeurling, 512).unwrap();
        assert_eq!(r.adjusted_row, 1);
        assert!(!r.adjusted.is_empty());
        let (lo, hi) = (r.matrix.row(0).log_terms(), r.matrix.row(1).log_terms());
        assert!((0..=512).all(|k| lo[k] <= hi[k]));
        assert!(build_remark2(Remark2Kind::RoumieuNotBeurling, 10).is_err());
    }

    #[test]
    fn lemma1_on_gevrey() {
        let m = WeightMatrix::single(WeightSequence::gevrey(1.0, 256).unwrap());
        let r = verify_lemma1(&m, &cfg(256)).unwrap();
        assert_eq!(r.overall(), Consistency::Consistent);
    }
}

//! The polygon weight whose roots are not almost increasing.
//!
//! Vertices sit at `k_0 = 0`, `k_1 = 2` and `k_{j+1} = k_j^2`, so
//! `ln k_j = 2^{j-1} ln 2`. The polygon values are
//! `phi(0) = 0`, `phi(2) = 8 ln 2`, and for `j >= 2`
//! `phi(k_j) = k_j ln k_{j+1}` (j even) or `k_j ln(k_j k_{j-2})` (j odd).
//! Every vertex value and every slope is a rational multiple of `ln 2`, so
//! those multiples are kept exactly.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, ln_factorial_per_index, Scalar, SeqIndex, LN_2};

/// Vertex indices up to this `j` are materialized as exact integers
/// (`k_12 = 2^2048`).
pub const EXACT_VERTEX_LIMIT: u32 = 12;

/// Beyond this vertex `ln k_j` itself leaves the floating-point range.
pub const MAX_VERTEX: u32 = 1000;

/// `ln k_j`.
pub fn vertex_ln(j: u32) -> f64 {
    if j == 0 {
        f64::NEG_INFINITY
    } else {
        libm::ldexp(LN_2, j as i32 - 1)
    }
}

/// `k_j` as an exact integer, for `j <= EXACT_VERTEX_LIMIT`.
pub fn vertex_big(j: u32) -> Option<BigUint> {
    if j > EXACT_VERTEX_LIMIT {
        return None;
    }
    if j == 0 {
        return Some(BigUint::zero());
    }
    Some(BigUint::one() << (1usize << (j - 1)))
}

/// `k_j` as `u128` when it fits (`j <= 7`).
pub fn vertex_u128(j: u32) -> Option<u128> {
    match j {
        0 => Some(0),
        1..=7 => Some(1u128 << (1u32 << (j - 1))),
        _ => None,
    }
}

pub fn vertex_index(j: u32) -> SeqIndex {
    match vertex_u128(j) {
        Some(k) => SeqIndex::Exact(k),
        None => SeqIndex::Huge { ln: vertex_ln(j) },
    }
}

/// `phi(k_j) / k_j` in units of `ln 2` (defined for `j >= 1`).
pub fn vertex_rate(j: u32) -> f64 {
    match j {
        0 => 0.0,
        1 => 4.0,
        _ if j % 2 == 0 => libm::ldexp(1.0, j as i32),
        _ => libm::ldexp(1.0, j as i32 - 1) + libm::ldexp(1.0, j as i32 - 3),
    }
}

/// `phi(k_j) / ln 2` exactly.
pub fn vertex_value(j: u32) -> Option<BigUint> {
    let k = vertex_big(j)?;
    Some(match j {
        0 => BigUint::zero(),
        1 => BigUint::from(8u8),
        _ if j % 2 == 0 => k << (j as usize),
        _ => {
            let a = k.clone() << (j as usize - 1);
            let b = k << (j as usize - 3);
            a + b
        }
    })
}

fn big(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

/// Slope `a_j` of the segment left of vertex `j`, in units of `ln 2`,
/// as the raw difference quotient `(phi(k_j) - phi(k_{j-1})) / (k_j - k_{j-1})`.
pub fn slope_raw(j: u32) -> Option<BigRational> {
    if j == 0 {
        return None;
    }
    let (k0, k1) = (vertex_big(j - 1)?, vertex_big(j)?);
    let (v0, v1) = (vertex_value(j - 1)?, vertex_value(j)?);
    Some((big(&v1) - big(&v0)) / (big(&k1) - big(&k0)))
}

/// Slope `a_j` from the coefficient closed forms, in units of `ln 2`
/// (defined for `j >= 3`).
///
/// With `L = ln k_{2i-1}`:
/// `a_{2i-1} = (5/4 m - 1)/(m - 1) L` (m = k_{2i-2}),
/// `a_{2i} = (4m - 5/4)/(m - 1) L` (m = k_{2i-1}),
/// `a_{2i+1} = (5m - 4)/(m - 1) L` (m = k_{2i}).
pub fn slope_closed_form(j: u32) -> Option<BigRational> {
    if j < 3 {
        return None;
    }
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let (i, coefficient) = if j % 2 == 1 {
        let i = (j + 1) / 2;
        let m = big(&vertex_big(2 * i - 2)?);
        (i, (r(5, 4) * m.clone() - r(1, 1)) / (m - r(1, 1)))
    } else {
        let i = j / 2;
        let m = big(&vertex_big(2 * i - 1)?);
        (i, (r(4, 1) * m.clone() - r(5, 4)) / (m - r(1, 1)))
    };
    // ln k_{2i-1} / ln 2 = 2^{2i-2}
    let l = BigRational::from_integer(BigInt::one() << (2 * i as usize - 2));
    Some(coefficient * l)
}

/// Closed-form coefficient functions of the slope chain at `m = k_{2i-2}`:
/// `(5/4 m - 1)/(m-1)`, `(4 m^2 - 5/4)/(m^2-1)`, `(5 m^4 - 4)/(m^4-1)`.
pub fn chain_coefficients(m: &BigRational) -> [BigRational; 3] {
    let one = BigRational::one();
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let m2 = m.clone() * m.clone();
    let m4 = m2.clone() * m2.clone();
    [
        (q(5, 4) * m.clone() - one.clone()) / (m.clone() - one.clone()),
        (q(4, 1) * m2.clone() - q(5, 4)) / (m2 - one.clone()),
        (q(5, 1) * m4.clone() - q(4, 1)) / (m4 - one),
    ]
}

/// Algebraic proof that `a_{2i-1} <= a_{2i} <= a_{2i+1} <= a_{2i+2}` for
/// every `i >= 2`.
///
/// The three coefficients share the factor `ln k_{2i-1}` and equal
/// `5/4 + (1/4)/(m-1)`, `4 + (11/4)/(m^2-1)` and `5 + 1/(m^4-1)` with
/// `m = k_{2i-2} >= 4`. The first two decrease in `m` and the third exceeds 5,
/// so the chain holds for all `i` once it holds at `m = 4` with the bounds
/// `c_1(4) <= 4 < c_2` and `c_2(4) <= 5 < c_3`. The step to the next block
/// multiplies the shared factor by 4, so `a_{2i+2} >= 16 ln k_{2i-1} > a_{2i+1}`.
pub fn slope_chain_holds_for_all_i() -> bool {
    let q = |n: i64| BigRational::from_integer(BigInt::from(n));
    let [c1, c2, c3] = chain_coefficients(&q(4));
    let first_decreasing = chain_coefficients(&q(5))[0] < c1;
    let second_decreasing = chain_coefficients(&q(5))[1] < c2;
    let next_block = q(4) * q(4);
    first_decreasing
        && second_decreasing
        && c1 <= q(4)
        && c2 <= q(5)
        && c3 > q(5)
        && c3 < next_block
}

/// Exact vertex data for `j <= j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixAParams {
    pub vertices: Vec<VertexRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexRecord {
    pub j: u32,
    pub index: SeqIndex,
    pub ln_index: f64,
    /// `phi(k_j) / ln 2` when exactly representable.
    pub value_ln2: Option<BigUint>,
    /// `phi(k_j) / k_j` in units of `ln 2`.
    pub rate_ln2: f64,
    /// Slope left of the vertex, in units of `ln 2`.
    pub slope_ln2: Option<f64>,
}

impl AppendixAParams {
    pub fn new(j_max: u32) -> Self {
        let vertices = (0..=j_max)
            .map(|j| VertexRecord {
                j,
                index: vertex_index(j),
                ln_index: vertex_ln(j),
                value_ln2: vertex_value(j),
                rate_ln2: vertex_rate(j),
                slope_ln2: if j == 0 {
                    None
                } else if let Some(s) = slope_raw(j) {
                    Some(s.to_f64())
                } else {
                    Some(float_slope(j))
                },
            })
            .collect();
        AppendixAParams { vertices }
    }

    /// Every consecutive slope pair is nondecreasing where represented.
    pub fn slopes_monotone(&self) -> bool {
        let s: Vec<f64> = self.vertices.iter().filter_map(|v| v.slope_ln2).collect();
        s.windows(2).all(|w| w[0] <= w[1])
    }
}

/// `a_j / ln 2` from vertex rates when exact integers are out of reach.
fn float_slope(j: u32) -> f64 {
    let q = libm::exp(vertex_ln(j - 1) - vertex_ln(j));
    (vertex_rate(j) - vertex_rate(j - 1) * q) / (1.0 - q)
}

/// `phi(k) / ln 2` for an exact index.
pub fn phi_ln2_exact(k: &BigUint) -> BigRational {
    if k.is_zero() {
        return BigRational::zero();
    }
    let mut j = 1;
    loop {
        // vertex_big(j) exists for every k reachable from a u128 or a dense prefix
        let kj = vertex_big(j).expect("exact vertex");
        if *k <= kj {
            let k0 = vertex_big(j - 1).expect("exact vertex");
            let v0 = big(&vertex_value(j - 1).expect("exact vertex"));
            let slope = slope_raw(j).expect("exact slope");
            return v0 + slope * (big(k) - big(&k0));
        }
        j += 1;
    }
}

/// `phi(k) / k` in natural units.
pub fn phi_rate(k: SeqIndex) -> Result<f64> {
    match k {
        SeqIndex::Exact(0) => Ok(0.0),
        SeqIndex::Exact(k) => {
            let kb = BigUint::from(k);
            let q = phi_ln2_exact(&kb) / big(&kb);
            Ok(q.to_f64() * LN_2)
        }
        SeqIndex::Huge { ln } => {
            if !ln.is_finite() || ln <= 0.0 {
                return Err(Error::Unrepresentable {
                    index: alloc::format!("{k}"),
                });
            }
            // smallest j with ln k_j >= ln k
            let mut j = 1u32;
            while vertex_ln(j) < ln {
                j += 1;
                if j > MAX_VERTEX {
                    return Err(Error::Unrepresentable {
                        index: alloc::format!("{k}"),
                    });
                }
            }
            let a = float_slope(j);
            let ratio = libm::exp(vertex_ln(j - 1) - ln);
            Ok((a + (vertex_rate(j - 1) - a) * ratio) * LN_2)
        }
    }
}

/// `(ln M_k) / k` with `M_k = exp(phi(k)) / k!`.
pub fn log_root(k: SeqIndex) -> Result<f64> {
    match k {
        SeqIndex::Exact(0) => Ok(0.0),
        SeqIndex::Exact(n) => Ok(phi_rate(k)? - ln_factorial(n) / n as f64),
        SeqIndex::Huge { ln } => Ok(phi_rate(k)? - ln_factorial_per_index(ln)),
    }
}

/// Dense `ln M_k` for `k = 0..=k_max`.
pub fn dense_log_terms(k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|k| {
            let phi = phi_ln2_exact(&BigUint::from(k)).to_f64() * LN_2;
            phi - ln_factorial(k as u128)
        })
        .collect()
}

/// `phi(k) / ln 2` for `k = 0..=k_max`, exactly.
pub fn dense_phi_ln2(k_max: usize) -> Vec<BigRational> {
    (0..=k_max)
        .map(|k| phi_ln2_exact(&BigUint::from(k)))
        .collect()
}

/// Exact convexity of `k -> phi(k)`, i.e. weak log-convexity of `M`, on
/// `0..=k_max`. Returns the first center index where it fails.
pub fn convexity_violation_exact(k_max: usize) -> Option<usize> {
    let phi = dense_phi_ln2(k_max);
    (1..k_max).find(|&k| {
        let left = phi[k].clone() - phi[k - 1].clone();
        let right = phi[k + 1].clone() - phi[k].clone();
        right < left
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_vertices() {
        let ks: Vec<u128> = (0..=5).map(|j| vertex_u128(j).unwrap()).collect();
        assert_eq!(ks, [0, 2, 4, 16, 256, 65536]);
        assert_eq!(vertex_u128(8), None);
    }

    #[test]
    fn vertex_values_follow_parity_rule() {
        // phi(4) = 4 ln 16, phi(16) = 16 ln(16 * 2)
        assert_eq!(vertex_value(2).unwrap(), BigUint::from(16u8));
        assert_eq!(vertex_value(3).unwrap(), BigUint::from(80u8));
        // phi(256) = 256 ln 65536
        assert_eq!(vertex_value(4).unwrap(), BigUint::from(4096u32));
    }

    #[test]
    fn early_slopes() {
        assert_eq!(slope_raw(1).unwrap(), r(4, 1));
        assert_eq!(slope_raw(2).unwrap(), r(4, 1));
        assert_eq!(slope_raw(3).unwrap(), r(16, 3));
    }

    #[test]
    fn closed_forms_agree_with_quotients() {
        for j in 3..=EXACT_VERTEX_LIMIT {
            assert_eq!(slope_closed_form(j), slope_raw(j), "j = {j}");
        }
    }

    #[test]
    fn chain_holds_algebraically() {
        assert!(slope_chain_holds_for_all_i());
        assert!(AppendixAParams::new(20).slopes_monotone());
    }

    #[test]
    fn huge_rate_matches_exact_rate() {
        for j in 5..=7u32 {
            let exact = phi_rate(vertex_index(j)).unwrap();
            let huge = phi_rate(SeqIndex::Huge { ln: vertex_ln(j) }).unwrap();
            assert!((exact - huge).abs() < 1e-9 * exact, "j={j}: {exact} {huge}");
        }
    }

    #[test]
    fn dense_prefix_small_values() {
        let t = dense_log_terms(4);
        assert!((t[2] - libm::log(128.0)).abs() < 1e-12);
        assert!((t[4] - libm::log(65536.0 / 24.0)).abs() < 1e-12);
    }

    #[test]
    fn tower_too_tall_is_an_error() {
        assert!(phi_rate(SeqIndex::Huge { ln: f64::INFINITY }).is_err());
        assert!(phi_rate(SeqIndex::Huge { ln: 1e305 }).is_err());
    }
}

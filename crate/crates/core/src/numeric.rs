//! Log-domain numerics shared by every module.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const LN_2: f64 = core::f64::consts::LN_2;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Above this argument `ln k!` switches from log-gamma to the Stirling series.
pub const EXACT_FACTORIAL_LIMIT: u128 = 1_000_000;

/// `ln k!`. Log-gamma up to [`EXACT_FACTORIAL_LIMIT`], Stirling beyond, where
/// the truncated series has relative error below `1e-30`.
pub fn ln_factorial(k: u128) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= EXACT_FACTORIAL_LIMIT {
        libm::lgamma(k as f64 + 1.0)
    } else {
        let x = k as f64;
        let ln_x = libm::log(x);
        x * ln_x - x + 0.5 * (LN_2PI + ln_x) + stirling_tail(1.0 / x)
    }
}

/// `ln(k!) / k` for an index given only through `ln k`.
///
/// Uses `ln k - 1 + (ln(2π) + ln k) / (2k) + 1/(12 k^2)`; the neglected part is
/// `O(k^-4)`, so for the indices this is meant for it is exact to double
/// precision.
pub fn ln_factorial_per_index(ln_k: f64) -> f64 {
    if ln_k < 13.0 {
        let k = libm::round(libm::exp(ln_k));
        if k >= 1.0 {
            return ln_factorial(k as u128) / k;
        }
        return 0.0;
    }
    let inv_k = libm::exp(-ln_k);
    ln_k - 1.0 + 0.5 * (LN_2PI + ln_k) * inv_k + stirling_tail(inv_k) * inv_k
}

fn stirling_tail(inv: f64) -> f64 {
    let inv2 = inv * inv;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n as u128) - ln_factorial(k as u128) - ln_factorial((n - k) as u128)
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// An index into a weight sequence.
///
/// Closed-form families are evaluated at indices far beyond `u128`; those are
/// carried through their natural logarithm only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeqIndex {
    Exact(u128),
    Huge { ln: f64 },
}

impl SeqIndex {
    pub fn ln(&self) -> f64 {
        match *self {
            SeqIndex::Exact(k) => libm::log(k as f64),
            SeqIndex::Huge { ln } => ln,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        match *self {
            SeqIndex::Exact(k) => usize::try_from(k).ok(),
            SeqIndex::Huge { .. } => None,
        }
    }

    pub fn cmp_index(&self, other: &SeqIndex) -> Ordering {
        match (self, other) {
            (SeqIndex::Exact(a), SeqIndex::Exact(b)) => a.cmp(b),
            _ => self.ln().partial_cmp(&other.ln()).unwrap_or(Ordering::Equal),
        }
    }
}

impl From<usize> for SeqIndex {
    fn from(k: usize) -> Self {
        SeqIndex::Exact(k as u128)
    }
}

impl fmt::Display for SeqIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqIndex::Exact(k) => write!(f, "{k}"),
            SeqIndex::Huge { ln } => write!(f, "exp({ln})"),
        }
    }
}

/// Field operations shared by the float and exact-rational code paths.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(x: i64) -> Self;
    /// Exact conversion from a finite float (every finite `f64` is a rational).
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// `ln |x|`, `-inf` for zero; must not overflow for huge rationals.
    fn ln_abs(&self) -> f64;
    fn abs_val(&self) -> Self;
}

impl Scalar for f64 {
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln_abs(&self) -> f64 {
        libm::log(libm::fabs(*self))
    }
    fn abs_val(&self) -> Self {
        libm::fabs(*self)
    }
}

impl Scalar for BigRational {
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let l = self.ln_abs();
            let mag = libm::exp(l);
            if self.is_negative() {
                -mag
            } else {
                mag
            }
        })
    }
    fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_bigint(self.numer()) - ln_bigint(self.denom())
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// `ln |n|` for arbitrary-size integers.
pub fn ln_bigint(n: &BigInt) -> f64 {
    if n.sign() == Sign::NoSign {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return libm::log(libm::fabs(n.to_f64().unwrap_or(f64::INFINITY)));
    }
    let shift = bits - 64;
    let top: BigInt = n.magnitude().clone().into();
    let top = (top >> shift as usize).to_f64().unwrap_or(f64::INFINITY);
    libm::log(top) + shift as f64 * LN_2
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn big_one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_switchover_is_continuous() {
        let below = ln_factorial(EXACT_FACTORIAL_LIMIT);
        let above = ln_factorial(EXACT_FACTORIAL_LIMIT + 1);
        let step = above - below;
        let expected = libm::log((EXACT_FACTORIAL_LIMIT + 1) as f64);
        assert!((step - expected).abs() < 1e-6, "step {step} vs {expected}");
    }

    #[test]
    fn small_factorials() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(10) - libm::log(3_628_800.0)).abs() < 1e-12);
    }

    #[test]
    fn per_index_matches_direct() {
        for k in [20u128, 1000, 65536, 5_000_000] {
            let direct = ln_factorial(k) / k as f64;
            let via_ln = ln_factorial_per_index(libm::log(k as f64));
            assert!((direct - via_ln).abs() < 1e-9, "k={k}: {direct} vs {via_ln}");
        }
    }

    #[test]
    fn log_add_handles_infinities() {
        assert_eq!(log_add(f64::NEG_INFINITY, 1.5), 1.5);
        assert!((log_add(0.0, 0.0) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn ln_of_huge_rational() {
        let big = BigRational::from_integer(BigInt::from(1u8) << 5000usize);
        assert!((big.ln_abs() - 5000.0 * LN_2).abs() < 1e-9);
        let tiny = big.recip();
        assert!((tiny.ln_abs() + 5000.0 * LN_2).abs() < 1e-9);
    }

    #[test]
    fn seq_index_ordering() {
        let a = SeqIndex::Exact(65536);
        let b = SeqIndex::Huge { ln: 100.0 };
        assert_eq!(a.cmp_index(&b), Ordering::Less);
    }
}

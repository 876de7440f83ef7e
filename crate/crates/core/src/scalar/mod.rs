//! Dense linear algebra over two scalar domains.
//!
//! Everything downstream runs either over exact rationals (arbitrary-precision
//! numerator/denominator, always reduced) or over `f64` with an explicit
//! tolerance context. The two domains never mix inside a single matrix; code
//! that needs both runs the pipeline twice or converts explicitly with
//! [`Matrix::to_float`].

mod eigen;
mod matrix;
mod span;

pub use eigen::{
    integer_spectrum, jacobi_eigen, minimal_polynomial, symmetric_eigendecomposition,
    IntegerSpectrum,
};
pub use matrix::Matrix;
pub use span::{gram_trace_basis, nullspace, RowEchelon, SpanAccumulator, SubspaceBasis};

use num::{BigInt, BigRational, FromPrimitive, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::error::{Error, Result};

/// Exact scalar domain: rationals with big-integer numerator and denominator.
/// `num`'s `Ratio` keeps values in lowest terms with positive denominator.
pub type Exact = BigRational;

/// Scalar types the matrix layer can run over.
///
/// Arithmetic goes through `AddAssign<&Self>`-style ops so the big-rational
/// domain avoids needless clones in inner loops. `EXACT` selects between
/// echelon-style (exact) and orthonormalizing (float) span maintenance.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + num::Zero
    + num::One
    + std::ops::Neg<Output = Self>
    + for<'a> std::ops::AddAssign<&'a Self>
    + for<'a> std::ops::SubAssign<&'a Self>
    + for<'a> std::ops::MulAssign<&'a Self>
    + for<'a> std::ops::DivAssign<&'a Self>
{
    const EXACT: bool;

    fn from_int(n: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// `(numerator, denominator)` when the value fits in machine words;
    /// used by the integer fast path for matrix products.
    fn as_i64_ratio(&self) -> Option<(i64, i64)>;

    fn from_i128_ratio(num: i128, den: i128) -> Self;

    /// Lossy construction from a float. Only the float domain uses this
    /// (normalization factors involve square roots); the exact domain panics.
    fn from_f64_approx(v: f64) -> Self;

    /// self -= c * v
    fn sub_mul(&mut self, c: &Self, v: &Self) {
        let mut t = c.clone();
        t *= v;
        *self -= &t;
    }

    /// self += c * v
    fn add_mul(&mut self, c: &Self, v: &Self) {
        let mut t = c.clone();
        t *= v;
        *self += &t;
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn as_i64_ratio(&self) -> Option<(i64, i64)> {
        None
    }

    fn from_i128_ratio(num: i128, den: i128) -> Self {
        num as f64 / den as f64
    }

    fn from_f64_approx(v: f64) -> Self {
        v
    }

    fn sub_mul(&mut self, c: &Self, v: &Self) {
        *self -= c * v;
    }

    fn add_mul(&mut self, c: &Self, v: &Self) {
        *self += c * v;
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn as_i64_ratio(&self) -> Option<(i64, i64)> {
        Some((self.numer().to_i64()?, self.denom().to_i64()?))
    }

    fn from_i128_ratio(num: i128, den: i128) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64_approx(_v: f64) -> Self {
        unreachable!("exact domain never normalizes by a float");
    }
}

/// Thresholds for every floating-point rank, clustering, and verification
/// decision. All three are relative: they get multiplied by the scale of the
/// data they are applied to. Exact-domain code ignores them.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToleranceContext {
    /// Rank threshold, relative to the norm of the vector being tested.
    pub rank_threshold: f64,
    /// Eigenvalue clustering width, relative to the spectral radius.
    pub cluster_width: f64,
    /// Residual bound for verification identities, relative to data scale.
    pub residual_bound: f64,
}

impl Default for ToleranceContext {
    fn default() -> Self {
        ToleranceContext {
            rank_threshold: 1e-9,
            cluster_width: 1e-7,
            residual_bound: 1e-8,
        }
    }
}

impl ToleranceContext {
    pub fn new(rank_threshold: f64, cluster_width: f64, residual_bound: f64) -> Result<Self> {
        let ctx = ToleranceContext {
            rank_threshold,
            cluster_width,
            residual_bound,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rank_threshold > 0.0 && self.cluster_width > 0.0 && self.residual_bound > 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be strictly positive".into(),
            ));
        }
        if self.cluster_width < self.rank_threshold {
            return Err(Error::InvalidParameter(
                "clustering width must be at least the rank threshold".into(),
            ));
        }
        Ok(())
    }
}

/// Rational reconstruction of a float: the best fraction `p/q` with
/// `|q| <= den_bound` (continued fractions). Returns `None` when no such
/// fraction lands within `tol` of `x`.
pub fn rationalize(x: f64, den_bound: u64, tol: f64) -> Option<Exact> {
    if !x.is_finite() {
        return None;
    }
    let mut a = x.floor() as i64;
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, a as i128, 1i128);
    let mut frac = x - a as f64;
    for _ in 0..64 {
        let approx = p1 as f64 / q1 as f64;
        if (approx - x).abs() <= tol {
            break;
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / frac;
        a = inv.floor() as i64;
        frac = inv - a as f64;
        let p2 = a as i128 * p1 + p0;
        let q2 = a as i128 * q1 + q0;
        if q2.unsigned_abs() > den_bound as u128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    if q1 == 0 {
        return None;
    }
    let cand = p1 as f64 / q1 as f64;
    if (cand - x).abs() <= tol {
        Some(BigRational::new(
            BigInt::from_i128(p1).unwrap(),
            BigInt::from_i128(q1).unwrap(),
        ))
    } else {
        None
    }
}

/// Format an exact rational as `p/q` (just `p` when the denominator is 1).
pub fn format_exact(x: &Exact) -> String {
    if x.denom().is_zero() || x.denom() == &BigInt::from(1) {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub(crate) fn exact_is_integer(x: &Exact) -> bool {
    x.denom().abs() == BigInt::from(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_context_rejects_bad_values() {
        assert!(ToleranceContext::new(0.0, 1e-7, 1e-8).is_err());
        assert!(ToleranceContext::new(1e-6, 1e-7, 1e-8).is_err());
        assert!(ToleranceContext::new(1e-9, 1e-7, 1e-8).is_ok());
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        let r = rationalize(1.0 / 3.0, 1_000_000, 1e-9).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(3)));
        let r = rationalize(-7.0 / 11.0, 1_000_000, 1e-9).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(-7), BigInt::from(11)));
        assert!(rationalize(std::f64::consts::SQRT_2, 1_000, 1e-12).is_none());
    }

    #[test]
    fn format_exact_styles() {
        assert_eq!(format_exact(&Exact::from_int(5)), "5");
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(format_exact(&half), "1/2");
        let neg = BigRational::new(BigInt::from(-3), BigInt::from(4));
        assert_eq!(format_exact(&neg), "-3/4");
    }
}

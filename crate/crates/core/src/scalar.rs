//! Floating-point scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real scalar the engine is generic over: `f32` or `f64`.
///
/// Tolerances are per type because single precision cannot honour the
/// double-precision thresholds used for pruning and invariant checks.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Coefficients with a smaller magnitude are dropped from linear forms.
    const PRUNE: Self;
    /// Allowed deviation of the symplectic invariant from 1.
    const INVARIANT_TOL: Self;
    /// Allowed X/Y cross covariance before the Gaussian fidelity formula is rejected.
    const CROSS_TOL: Self;
    /// Slack for physicality (uncertainty relation) checks.
    const PHYSICAL_TOL: Self;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const PRUNE: Self = 1e-14;
    const INVARIANT_TOL: Self = 1e-10;
    const CROSS_TOL: Self = 1e-9;
    const PHYSICAL_TOL: Self = 1e-8;

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f32 {
    const PRUNE: Self = 1e-6;
    const INVARIANT_TOL: Self = 1e-4;
    const CROSS_TOL: Self = 1e-4;
    const PHYSICAL_TOL: Self = 1e-3;

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

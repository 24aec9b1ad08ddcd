//! Floating-point abstraction so the pipeline runs in either `f32` or `f64`.
//!
//! Feature values, signal samples, and model parameters are generic over
//! [`Scalar`]. Probabilities, impurities, and evaluation metrics stay `f64`
//! throughout the crate: they are derived from integer counts or rank
//! statistics and gain nothing from a narrower type.

use rand::Rng;
use rand_distr::StandardNormal;

/// Scalar type for signal samples and feature values.
///
/// `f32` and `f64` implement it. The two RNG hooks exist so generic code can
/// draw noise without naming a concrete distribution type parameter.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + core::fmt::Debug
    + core::fmt::Display
    + core::str::FromStr<Err = core::num::ParseFloatError>
    + core::iter::Sum
    + serde::Serialize
    + serde::de::DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts from `f64`, rounding to the nearest representable value.
    fn from_f64_lossy(v: f64) -> Self;

    /// Widens to `f64` exactly (both supported types embed into `f64`).
    fn into_f64(self) -> f64;

    /// One draw from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the uniform distribution on `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }

    fn into_f64(self) -> f64 {
        f64::from(self)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

impl Scalar for f64 {
    fn from_f64_lossy(v: f64) -> Self {
        v
    }

    fn into_f64(self) -> f64 {
        self
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

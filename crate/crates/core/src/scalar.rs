//! Scalar abstraction so the simulation can run in `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use rand::distributions::uniform::SampleUniform;
use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the agent states are built from.
///
/// Everything downstream (strategies, the engine, analysis, the robot
/// simulation) is written against this trait; `f32` and `f64` are the
/// provided implementations.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + FromStr
    + Display
    + Debug
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Draw a uniform sample from the closed interval `[low, high]`.
    fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, low: Self, high: Self) -> Self;

    /// Draw a standard-normal sample.
    fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossless conversion from small counts (agent numbers, round counts).
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, low: Self, high: Self) -> Self {
                debug_assert!(low <= high);
                Uniform::new_inclusive(low, high).sample(rng)
            }

            fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

// Uniform sampling requires SampleUniform; assert it holds for the impls
// without leaking the bound into every generic signature.
const _: fn() = || {
    fn assert_sample_uniform<T: SampleUniform>() {}
    assert_sample_uniform::<f32>();
    assert_sample_uniform::<f64>();
};

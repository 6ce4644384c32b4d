//! Scalar abstraction for the whole engine.
//!
//! Everything numeric is written against [`Real`] so the engine can run in
//! `f32` or `f64`; the crate root exports `f64` aliases for the common case.
//! [`RealSampling`] folds the handful of random draws the simulator needs
//! into the scalar trait, so generic code never restates `rand_distr` bounds.

use rand::Rng;
use rand_distr::Distribution;

/// Random draws required by the Monte Carlo paths, implemented concretely
/// for the types that `rand_distr` supports.
pub trait RealSampling: Sized {
    /// Draw from the standard normal N(0, 1).
    fn standard_normal<G: Rng + ?Sized>(rng: &mut G) -> Self;
    /// Draw uniformly from [0, 1).
    fn unit_uniform<G: Rng + ?Sized>(rng: &mut G) -> Self;
    /// Draw from Gamma(shape, scale). Requires `shape > 0`, `scale > 0`.
    fn gamma<G: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut G) -> Self;
    /// Draw a Poisson(mean) count; a non-positive mean yields 0.
    fn poisson_count<G: Rng + ?Sized>(mean: Self, rng: &mut G) -> u64;
}

macro_rules! impl_real_sampling {
    ($t:ty) => {
        impl RealSampling for $t {
            #[inline]
            fn standard_normal<G: Rng + ?Sized>(rng: &mut G) -> Self {
                rng.sample(rand_distr::StandardNormal)
            }

            #[inline]
            fn unit_uniform<G: Rng + ?Sized>(rng: &mut G) -> Self {
                rng.sample(rand_distr::Standard)
            }

            #[inline]
            fn gamma<G: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut G) -> Self {
                rand_distr::Gamma::new(shape, scale)
                    .expect("gamma parameters must be positive")
                    .sample(rng)
            }

            #[inline]
            fn poisson_count<G: Rng + ?Sized>(mean: Self, rng: &mut G) -> u64 {
                if mean <= 0.0 {
                    return 0;
                }
                let draw: $t = rand_distr::Poisson::new(mean)
                    .expect("poisson mean must be finite and positive")
                    .sample(rng);
                draw as u64
            }
        }
    };
}

impl_real_sampling!(f32);
impl_real_sampling!(f64);

pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssignOps
    + RealSampling
    + std::fmt::Debug
    + std::fmt::Display
    + std::iter::Sum
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Lift an `f64` literal into the working scalar type.
#[inline]
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal must be representable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn draw_everything<R: Real>(seed: u64) -> R {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = R::standard_normal(&mut rng);
        let g = R::gamma(real::<R>(3.0), real::<R>(0.5), &mut rng);
        let p = real::<R>(R::poisson_count(real::<R>(4.0), &mut rng) as f64);
        let u = R::unit_uniform(&mut rng);
        n + g + p + u
    }

    #[test]
    fn sampling_is_available_for_both_scalars() {
        let a: f64 = draw_everything(7);
        let b: f32 = draw_everything(7);
        assert!(a.is_finite());
        assert!(b.is_finite());
    }

    #[test]
    fn zero_mean_poisson_is_empty() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert_eq!(f64::poisson_count(0.0, &mut rng), 0);
        assert_eq!(f64::poisson_count(-1.0, &mut rng), 0);
    }
}

//! Small statistical helpers shared by the estimators and the test suites:
//! a compensated accumulator, the Wilson score interval, and the two
//! goodness-of-fit statistics used to audit the sampling routines.

use crate::error::{Error, Result};
use crate::real::{real, Real};

/// Neumaier-compensated accumulator.
///
/// Addition order still matters — callers that need bit-exact
/// reproducibility must feed values in a fixed order — but the running
/// compensation keeps alternating or badly scaled sums accurate to the
/// last few ulps.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<R> {
    sum: R,
    compensation: R,
}

impl<R: Real> CompensatedSum<R> {
    pub fn new() -> Self {
        Self {
            sum: R::zero(),
            compensation: R::zero(),
        }
    }

    pub fn add(&mut self, x: R) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> R {
        self.sum + self.compensation
    }
}

impl<R: Real> Default for CompensatedSum<R> {
    fn default() -> Self {
        Self::new()
    }
}

/// Wilson score interval for a binomial proportion at critical value `z`
/// (1.96 for 95%). Chosen over the plain normal interval because it stays
/// inside `[0, 1]` and behaves sensibly when every trial lands on the same
/// side.
pub fn wilson_interval<R: Real>(successes: u64, trials: u64, z: R) -> Result<(R, R)> {
    if trials == 0 {
        return Err(Error::Domain(
            "a confidence interval needs at least one trial".to_string(),
        ));
    }
    if successes > trials {
        return Err(Error::Domain(format!(
            "{successes} successes out of {trials} trials is not a proportion"
        )));
    }
    let n = real::<R>(trials as f64);
    let p = real::<R>(successes as f64) / n;
    let z2 = z * z;
    let denom = R::one() + z2 / n;
    let center = (p + z2 / (n + n)) / denom;
    let half = z / denom
        * (p * (R::one() - p) / n + z2 / (real::<R>(4.0) * n * n)).sqrt();
    Ok((
        (center - half).max(R::zero()),
        (center + half).min(R::one()),
    ))
}

/// Kolmogorov–Smirnov distance between a sample and a reference
/// distribution function: the largest gap between the empirical and
/// reference CDFs, taken on both sides of each step.
pub fn ks_statistic<R: Real>(samples: &[R], cdf: impl Fn(R) -> R) -> Result<R> {
    if samples.is_empty() {
        return Err(Error::Domain(
            "the empirical distribution of zero samples is undefined".to_string(),
        ));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(
            "non-finite sample in distribution test".to_string(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
    let n = real::<R>(sorted.len() as f64);
    let mut worst = R::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let below = real::<R>(i as f64) / n;
        let above = real::<R>((i + 1) as f64) / n;
        worst = worst.max(f - below).max(above - f);
    }
    Ok(worst)
}

/// Pearson statistic `Σ (observed − expected)² / expected` over matched
/// bins. The caller is responsible for merging bins with tiny expected
/// counts before comparing against a chi-square critical value.
pub fn chi_square_statistic<R: Real>(observed: &[u64], expected: &[R]) -> Result<R> {
    if observed.is_empty() || observed.len() != expected.len() {
        return Err(Error::Domain(format!(
            "bin count mismatch: {} observed vs {} expected",
            observed.len(),
            expected.len()
        )));
    }
    let mut acc = CompensatedSum::new();
    for (&o, &e) in observed.iter().zip(expected) {
        if !(e > R::zero()) {
            return Err(Error::Domain(format!(
                "expected bin counts must be positive, got {e}"
            )));
        }
        let d = real::<R>(o as f64) - e;
        acc.add(d * d / e);
    }
    Ok(acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compensated_sum_recovers_cancelled_mass() {
        // 1 + 2^-60 - 1 loses the small term in naive order.
        let mut acc = CompensatedSum::new();
        acc.add(1.0f64);
        acc.add(2.0f64.powi(-60));
        acc.add(-1.0);
        assert_eq!(acc.total(), 2.0f64.powi(-60));
    }

    #[test]
    fn wilson_matches_hand_computed_midpoint() {
        let (lo, hi) = wilson_interval(50u64, 100, 1.96f64).unwrap();
        assert!((lo - 0.40383).abs() < 1e-4, "lo = {lo}");
        assert!((hi - 0.59617).abs() < 1e-4, "hi = {hi}");
    }

    #[test]
    fn wilson_extreme_counts_stay_in_unit_interval() {
        let (lo, hi) = wilson_interval(0u64, 20, 1.96f64).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.35);
        let (lo, hi) = wilson_interval(20u64, 20, 1.96f64).unwrap();
        assert!(lo > 0.65 && lo < 1.0);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_rejects_degenerate_inputs() {
        assert!(wilson_interval(0u64, 0, 1.96f64).is_err());
        assert!(wilson_interval(5u64, 4, 1.96f64).is_err());
    }

    #[test]
    fn ks_two_point_sample_against_uniform() {
        let d = ks_statistic(&[0.25f64, 0.75], |x| x).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ks_flags_unsorted_input_identically() {
        let a = ks_statistic(&[0.9f64, 0.1, 0.5], |x| x).unwrap();
        let b = ks_statistic(&[0.1f64, 0.5, 0.9], |x| x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chi_square_hand_example() {
        let stat = chi_square_statistic(&[10u64, 10], &[5.0f64, 15.0]).unwrap();
        assert!((stat - (5.0 + 25.0 / 15.0)).abs() < 1e-12);
    }

    #[test]
    fn chi_square_rejects_bad_bins() {
        assert!(chi_square_statistic::<f64>(&[], &[]).is_err());
        assert!(chi_square_statistic(&[1u64], &[1.0f64, 2.0]).is_err());
        assert!(chi_square_statistic(&[1u64], &[0.0f64]).is_err());
    }

    proptest! {
        #[test]
        fn wilson_contains_the_point_estimate(
            trials in 1u64..10_000,
            num in 0.0f64..=1.0,
        ) {
            let successes = (num * trials as f64).floor() as u64;
            let (lo, hi) = wilson_interval(successes, trials, 1.96f64).unwrap();
            let p = successes as f64 / trials as f64;
            prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }

        #[test]
        fn ks_stays_in_unit_interval(mut xs in proptest::collection::vec(0.0f64..1.0, 1..200)) {
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let d = ks_statistic(&xs, |x| x).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}

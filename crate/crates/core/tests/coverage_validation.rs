//! End-to-end agreement between the closed-form coverage probabilities and
//! the snapshot simulator, both association strategies, at two operating
//! points. The gate is the |analytic − simulated| ≤ 0.05 absolute budget
//! that the approximation chain (generalized-exponential surrogate,
//! residual-count convention, empty-cluster convention) is designed to fit.

use mmwpt_core::analytic::coverage;
use mmwpt_core::montecarlo::estimate_coverage;
use mmwpt_core::scenario::Strategy;
use mmwpt_core::{Quadrature, Scenario};

const TRIALS: u64 = 10_000;
const GAP_BUDGET: f64 = 0.05;

fn checked_gap(scn: &Scenario, seed: u64) -> (f64, f64) {
    let quad = Quadrature::defaults(scn);
    let report = coverage(scn, &quad).unwrap();
    let mc = estimate_coverage(scn, TRIALS, seed).unwrap();
    assert!(
        (report.probability - mc.probability).abs() <= GAP_BUDGET,
        "{:?}: analytic {} vs MC {} [{}, {}]",
        scn.strategy,
        report.probability,
        mc.probability,
        mc.ci_low,
        mc.ci_high
    );
    (report.probability, mc.probability)
}

#[test]
fn baseline_random_association_agrees() {
    let mut scn = Scenario::baseline();
    scn.strategy = Strategy::Random;
    checked_gap(&scn, 1001);
}

#[test]
fn baseline_nearest_association_agrees() {
    let mut scn = Scenario::baseline();
    scn.strategy = Strategy::Nearest;
    checked_gap(&scn, 1002);
}

#[test]
fn tighter_threshold_still_agrees() {
    let mut scn = Scenario::baseline();
    scn.energy_threshold = 2.5e-3;
    scn.strategy = Strategy::Random;
    let (_, mc_low) = checked_gap(&scn, 1003);
    scn.energy_threshold = 1e-3;
    let (_, mc_high) = checked_gap(&scn, 1003);
    assert!(mc_high >= mc_low, "coverage must not rise with the threshold");
}

#[test]
fn nearest_dominates_random_in_simulation() {
    let mut scn = Scenario::baseline();
    scn.strategy = Strategy::Random;
    let ra = estimate_coverage(&scn, TRIALS, 1004).unwrap();
    scn.strategy = Strategy::Nearest;
    let na = estimate_coverage(&scn, TRIALS, 1004).unwrap();
    let n = TRIALS as f64;
    let pooled_se = (ra.probability * (1.0 - ra.probability) / n
        + na.probability * (1.0 - na.probability) / n)
        .sqrt();
    assert!(
        na.probability >= ra.probability - 2.0 * pooled_se,
        "nearest {} vs random {} (pooled SE {pooled_se})",
        na.probability,
        ra.probability
    );
}

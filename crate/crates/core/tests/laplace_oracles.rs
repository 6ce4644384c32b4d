//! Monte Carlo oracles for the analytic Laplace building blocks. Each
//! operator is compared against a direct sample mean of e^{−s·P} built
//! from first principles — independent link draws for the per-link and
//! intra-cluster transforms, full network snapshots for the inter-cluster
//! and macro transforms — at the transform arguments the coverage sum
//! actually visits.

use mmwpt_core::analytic::{chi, laplace_inter, laplace_intra_ra, laplace_mbs};
use mmwpt_core::montecarlo::{sample_breakdowns, TrialRng};
use mmwpt_core::pointprocess::Point2;
use mmwpt_core::quad::integrate;
use mmwpt_core::real::RealSampling;
use mmwpt_core::{Quadrature, Scenario};

/// The transform arguments â_n = a·n / Θ⁻¹(γ_th) for n ∈ {1, 5, 10} at the
/// baseline threshold of 1 mW.
fn transform_arguments(scn: &Scenario) -> Vec<f64> {
    let drive = scn.harvester.harvest_inverse(scn.energy_threshold).unwrap();
    let a = scn.ge.normalizer();
    [1.0, 5.0, 10.0].iter().map(|n| a * n / drive).collect()
}

/// Mean and standard error of a sample.
fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One cluster-member link factor e^{−s·P·G·h·ℓ(d)}: Gaussian offset from
/// the cluster center, beam orientation, then fading. Links at or beyond
/// the outage radius contribute factor 1.
fn link_factor(s: f64, v0: f64, scn: &Scenario, rng: &mut TrialRng) -> f64 {
    let tier = scn.typical();
    let position = Point2 {
        x: tier.pb_scatter * f64::standard_normal(rng),
        y: tier.pb_scatter * f64::standard_normal(rng),
    };
    let d = position.distance_to(&Point2 { x: v0, y: 0.0 });
    if d >= scn.channel.r_max() {
        return 1.0;
    }
    let gain = scn.pb_array.sample_interferer_gain(rng);
    if gain == 0.0 {
        return 1.0;
    }
    let h = scn.channel.sample_fading(d, rng).unwrap();
    (-s * tier.pb_power * gain * h * scn.channel.path_loss(d)).exp()
}

#[test]
fn per_link_transform_matches_sampled_links() {
    // chi conditions on a main-lobe hit, so the unconditional per-link
    // mean is (1 − ρ_b) + ρ_b·chi.
    let scn = Scenario::baseline();
    let quad = Quadrature::defaults(&scn);
    let v0 = 10.0;
    let rho = scn.pb_array.lobe_hit_probability();
    let draws = 1_000_000usize;
    for (i, &s) in transform_arguments(&scn).iter().enumerate() {
        let mut rng = TrialRng::new(71, i as u64);
        let samples: Vec<f64> = (0..draws).map(|_| link_factor(s, v0, &scn, &mut rng)).collect();
        let (mc, se) = mean_se(&samples);
        let analytic = (1.0 - rho) + rho * chi(s, v0, scn.typical(), &scn, &quad).unwrap();
        assert!(
            (mc - analytic).abs() <= 3.0 * se + 1e-6,
            "s = {s}: MC {mc} ± {se} vs analytic {analytic}"
        );
    }
}

#[test]
fn intra_cluster_transform_matches_sampled_products() {
    // The random-association intra-cluster transform is the generating
    // functional of a Poisson(C̄−1) number of independent links.
    let scn = Scenario::baseline();
    let quad = Quadrature::defaults(&scn);
    let v0 = 10.0;
    let residual_mean = scn.typical().mean_pb_count - 1.0;
    let draws = 200_000usize;
    for (i, &s) in transform_arguments(&scn).iter().enumerate() {
        let mut rng = TrialRng::new(72, i as u64);
        let samples: Vec<f64> = (0..draws)
            .map(|_| {
                let count = f64::poisson_count(residual_mean, &mut rng);
                (0..count).map(|_| link_factor(s, v0, &scn, &mut rng)).product()
            })
            .collect();
        let (mc, se) = mean_se(&samples);
        let analytic = laplace_intra_ra(s, v0, &scn, &quad).unwrap();
        assert!(
            (mc - analytic).abs() <= 3.0 * se + 1e-6,
            "s = {s}: MC {mc} ± {se} vs analytic {analytic}"
        );
    }
}

#[test]
fn field_transforms_match_snapshot_power() {
    // Full-snapshot oracle: E[e^{−s·p_inter}] and E[e^{−s·p_mbs}] across
    // independent network realizations against the two field transforms.
    let scn = Scenario::baseline();
    let quad = Quadrature::defaults(&scn);
    let records = sample_breakdowns(&scn, 20_000, 73).unwrap();
    for &s in &transform_arguments(&scn) {
        let inter: Vec<f64> = records.iter().map(|r| (-s * r.p_inter).exp()).collect();
        let (mc, se) = mean_se(&inter);
        let analytic = laplace_inter(s, &scn, &quad).unwrap();
        assert!(
            (mc - analytic.value).abs() <= 3.0 * se + analytic.tail_bound + 1e-6,
            "inter, s = {s}: MC {mc} ± {se} vs analytic {}",
            analytic.value
        );

        let mbs: Vec<f64> = records.iter().map(|r| (-s * r.p_mbs).exp()).collect();
        let (mc, se) = mean_se(&mbs);
        let analytic = laplace_mbs(s, &scn, &quad).unwrap();
        assert!(
            (mc - analytic).abs() <= 3.0 * se + 1e-6,
            "mbs, s = {s}: MC {mc} ± {se} vs analytic {analytic}"
        );
    }
}

#[test]
fn macro_field_mean_power_matches_campbell() {
    // Campbell's formula: E[p_mbs] = λ_m·P_m·ρ_m·(N_m/2)·∫ 2πr·ℓ(r) dr.
    // Clusters are silenced (populations too small to ever sample a point)
    // so the run only pays for the macro field.
    let mut scn = Scenario::baseline();
    for tier in &mut scn.tiers {
        tier.parent_intensity = 1e-300;
        tier.mean_pb_count = 1e-300;
    }
    let channel = scn.channel.clone();
    let mean_loss = integrate(
        |r: f64| std::f64::consts::TAU * r * channel.path_loss(r),
        0.0,
        channel.r_max(),
        1e-10,
        1e-12,
    )
    .unwrap()
    .value;
    let expected = scn.macro_tier.intensity
        * scn.macro_tier.power
        * scn.macro_array.lobe_hit_probability()
        * (scn.macro_array.size() as f64 / 2.0)
        * mean_loss;

    let records = sample_breakdowns(&scn, 100_000, 74).unwrap();
    let samples: Vec<f64> = records.iter().map(|r| r.p_mbs).collect();
    let (mc, se) = mean_se(&samples);
    assert!(
        (mc - expected).abs() <= 3.0 * se,
        "MC {mc} ± {se} vs Campbell {expected}"
    );
}

//! Energy-coverage probabilities for both association rules.
//!
//! The harvested-power threshold indicator is approximated by
//! `1 − (1 − e^{−a·w})^L` in the equivalent RF threshold `w`; expanding the
//! power binomially turns the coverage probability into an alternating sum
//! of products of the Laplace transforms from the parent module, each
//! evaluated at `â_n = a·n / Θ⁻¹(γ_th)`. The `n = 0` term is the constant
//! one, so only `L` genuine quadrature passes are needed.

use serde::Serialize;

use crate::channel::BlockageChannel;
use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::pointprocess::{rician_pdf, rician_survival};
use crate::quad::{gauss_legendre, integrate_with_breakpoints};
use crate::real::{real, Real};
use crate::scenario::{QuadratureSpec, ScenarioConfig, Strategy};
use crate::stats::CompensatedSum;

use super::{
    assoc_average, assoc_factor, intra_ra_from_chi, laplace_inter, laplace_mbs, ChiCurve,
    InterLaplace,
};

/// One evaluated coverage probability plus everything needed to audit it.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport<R> {
    /// The clamped probability in `[0, 1]`.
    pub probability: R,
    /// Equivalent RF-power threshold (watts): the rectifier input that
    /// harvests exactly the configured DC threshold.
    pub rf_threshold: R,
    /// Transform arguments `â_n`, one per binomial term (index 0 is zero).
    pub s_values: Vec<R>,
    /// Signed binomial terms; their compensated sum is `raw_sum`.
    pub terms: Vec<R>,
    /// The sum before clamping into the unit interval.
    pub raw_sum: R,
    /// Largest truncation bound reported by the other-cluster transform
    /// across the evaluated terms.
    pub inter_tail_bound: R,
    /// Rayleigh mass beyond the user-distance cutoff, ignored by the outer
    /// integrals.
    pub v0_tail_mass: R,
    /// True when the DC threshold sits at or above the rectifier ceiling,
    /// pinning the probability to zero without any integration.
    pub saturated: bool,
    /// Where the cluster-size sum was cut, when nearest association ran.
    pub count_cap: Option<u64>,
}

impl<R: Real> CoverageReport<R> {
    fn saturated() -> Self {
        Self {
            probability: R::zero(),
            rf_threshold: R::infinity(),
            s_values: Vec::new(),
            terms: Vec::new(),
            raw_sum: R::zero(),
            inter_tail_bound: R::zero(),
            v0_tail_mass: R::zero(),
            saturated: true,
            count_cap: None,
        }
    }
}

/// Dispatch on the configured association strategy.
pub fn coverage<R: Real>(
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<CoverageReport<R>> {
    match scn.strategy {
        Strategy::Random => coverage_ra(scn, quad),
        Strategy::Nearest => coverage_na(scn, quad),
    }
}

/// Shared per-term prefactors: transform argument, binomial coefficient,
/// and the two field transforms that do not depend on the association rule.
struct TermFactors<R> {
    s: R,
    binom: R,
    inter: InterLaplace<R>,
    mbs: R,
}

fn shared_factors<R: Real>(
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
    rf_threshold: R,
) -> Result<Vec<TermFactors<R>>> {
    let order = scn.ge.order();
    let a = scn.ge.normalizer();
    let mut out = Vec::with_capacity(order as usize);
    let mut binom = R::one();
    for n in 1..=order {
        // C(L, n) by the exact multiplicative recurrence.
        binom = binom * real::<R>((order - n + 1) as f64) / real::<R>(n as f64);
        let s = a * real::<R>(n as f64) / rf_threshold;
        out.push(TermFactors {
            s,
            binom,
            inter: laplace_inter(s, scn, quad)?,
            mbs: laplace_mbs(s, scn, quad)?,
        });
    }
    Ok(out)
}

fn assemble<R: Real>(
    terms: Vec<R>,
    factors: &[TermFactors<R>],
    rf_threshold: R,
    quad: &QuadratureSpec<R>,
    count_cap: Option<u64>,
) -> CoverageReport<R> {
    let mut acc = CompensatedSum::new();
    for &t in &terms {
        acc.add(t);
    }
    let raw = acc.total();
    let mut s_values = Vec::with_capacity(terms.len());
    s_values.push(R::zero());
    s_values.extend(factors.iter().map(|f| f.s));
    let inter_tail_bound = factors
        .iter()
        .map(|f| f.inter.tail_bound)
        .fold(R::zero(), |a, b| a.max(b));
    let cut = quad.v0_cutoff_sigmas;
    CoverageReport {
        probability: raw.min(R::one()).max(R::zero()),
        rf_threshold,
        s_values,
        terms,
        raw_sum: raw,
        inter_tail_bound,
        v0_tail_mass: (-(cut * cut) * real::<R>(0.5)).exp(),
        saturated: false,
        count_cap,
    }
}

/// Equivalent RF threshold, or `None` when the DC threshold cannot be
/// harvested at any input power.
fn rf_threshold<R: Real>(scn: &ScenarioConfig<R>) -> Result<Option<R>> {
    match scn.harvester.harvest_inverse(scn.energy_threshold) {
        Ok(t) => Ok(Some(t)),
        Err(Error::ThresholdAboveCeiling { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Energy-coverage probability under uniformly random beacon association.
///
/// Outer integral over the user's cluster-center distance `v0`, inner
/// integral over the serving distance; the co-cluster transform rides on a
/// tabulated chi curve so the nesting stays two levels deep.
pub fn coverage_ra<R: Real>(
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<CoverageReport<R>> {
    scn.validate()?;
    quad.validate()?;
    let threshold = match rf_threshold(scn)? {
        Some(t) => t,
        None => return Ok(CoverageReport::saturated()),
    };
    let tier = scn.typical();
    let sigma_u = tier.eu_scatter;
    let v0_cut = quad.v0_cutoff_sigmas * sigma_u;
    let rho = scn.pb_array.lobe_hit_probability();
    let factors = shared_factors(scn, quad, threshold)?;

    let mut terms = Vec::with_capacity(factors.len() + 1);
    // n = 0: every transform is one and the densities integrate to one.
    terms.push(R::one());
    let outer_cuts = [sigma_u + sigma_u];
    for (idx, f) in factors.iter().enumerate() {
        let curve = ChiCurve::build(f.s, tier, scn, quad, v0_cut)?;
        let w = integrate_with_breakpoints(
            |v0| {
                let intra = intra_ra_from_chi(curve.eval(v0), tier.mean_pb_count, rho);
                let served = match assoc_average(f.s, v0, scn, quad) {
                    Ok(x) => x,
                    Err(_) => return R::nan(),
                };
                rician_pdf(v0, R::zero(), sigma_u) * intra * served
            },
            R::zero(),
            v0_cut,
            &outer_cuts,
            quad.rel_tol,
            quad.abs_tol,
        )?;
        let term = f.binom * f.inter.value * f.mbs * w.value;
        terms.push(if (idx + 1) % 2 == 1 { -term } else { term });
    }
    Ok(assemble(terms, &factors, threshold, quad, None))
}

/// Energy-coverage probability under nearest beacon association.
///
/// The cluster-size sum, the serving-distance density, and the conditional
/// co-cluster transform combine into a single grouped integrand per count:
/// `C·f(r)·q(r)^{C−1}·assoc(r)` with
/// `q(r) = (1 − ρ_b)·S(r) + ρ_b·K(r)`, where `S` is the Rician survival and
/// `K` the attenuation-weighted survival. Both cumulatives are built once
/// per `v0` on a composite grid and splined, so no quadrature nests deeper
/// than two levels. Counts beyond the configured tail mass are dropped; the
/// empty-cluster mass appears only through the constant `n = 0` term.
pub fn coverage_na<R: Real>(
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<CoverageReport<R>> {
    scn.validate()?;
    quad.validate()?;
    let threshold = match rf_threshold(scn)? {
        Some(t) => t,
        None => return Ok(CoverageReport::saturated()),
    };
    let tier = scn.typical();
    let sigma_u = tier.eu_scatter;
    let v0_cut = quad.v0_cutoff_sigmas * sigma_u;
    let (weights, cap) = poisson_weights(tier.mean_pb_count, quad.count_tail_mass)?;
    let gl = gauss_legendre::<R>(7);
    let factors = shared_factors(scn, quad, threshold)?;

    let mut terms = Vec::with_capacity(factors.len() + 1);
    terms.push(R::one());
    let outer_cuts = [sigma_u + sigma_u];
    for (idx, f) in factors.iter().enumerate() {
        let v = integrate_with_breakpoints(
            |v0| match nearest_inner(f.s, v0, scn, &weights, (&gl.0, &gl.1)) {
                Ok(x) => rician_pdf(v0, R::zero(), sigma_u) * x,
                Err(_) => R::nan(),
            },
            R::zero(),
            v0_cut,
            &outer_cuts,
            quad.rel_tol,
            quad.abs_tol,
        )?;
        let term = f.binom * f.inter.value * f.mbs * v.value;
        terms.push(if (idx + 1) % 2 == 1 { -term } else { term });
    }
    Ok(assemble(terms, &factors, threshold, quad, Some(cap)))
}

/// Poisson probabilities `P(C = c)` for `c = 1..=cap`, where `cap` is the
/// smallest count leaving less than `tail_mass` of the distribution
/// uncovered (the zero count is accounted for but not stored).
fn poisson_weights<R: Real>(mean: R, tail_mass: R) -> Result<(Vec<R>, u64)> {
    let p0 = (-mean).exp();
    if !(p0 > R::zero()) {
        return Err(Error::Domain(format!(
            "cluster mean {mean} underflows the count expansion"
        )));
    }
    let mut p = p0;
    let mut covered = p0;
    let mut weights = Vec::new();
    let mut c = 0u64;
    while R::one() - covered >= tail_mass {
        c += 1;
        if c > 4096 {
            return Err(Error::SeriesDivergence {
                terms: 4096,
                last_term: p.to_f64().unwrap_or(f64::NAN),
            });
        }
        p = p * mean / real::<R>(c as f64);
        weights.push(p);
        covered = covered + p;
    }
    Ok((weights, c))
}

/// `Σ_C P(C)·C·q^{C−1}` over the stored counts: the density-side mixture
/// weight of the grouped nearest-association integrand.
fn count_derivative_mix<R: Real>(weights: &[R], q: R) -> R {
    let mut acc = R::zero();
    let mut q_pow = R::one();
    for (i, &p) in weights.iter().enumerate() {
        acc = acc + p * real::<R>((i + 1) as f64) * q_pow;
        q_pow = q_pow * q;
    }
    acc
}

/// Inner expectation of the nearest-association theorem at one `(s, v0)`:
/// the serving-distance integral of the grouped integrand, plus the
/// closed-form mass of clusters whose nearest beacon already sits beyond
/// the outage radius.
fn nearest_inner<R: Real>(
    s: R,
    v0: R,
    scn: &ScenarioConfig<R>,
    weights: &[R],
    gl: (&[R], &[R]),
) -> Result<R> {
    let tier = scn.typical();
    let sigma = tier.pb_scatter;
    let channel = &scn.channel;
    let r_max = channel.r_max();
    let drive = s * tier.pb_power * scn.pb_array.boresight_gain();
    let rho = scn.pb_array.lobe_hit_probability();
    let half = real::<R>(0.5);

    let edges = nearest_grid(v0, sigma, channel);
    let panels = edges.len() - 1;
    let nodes_per = gl.0.len();

    // First pass: per-node density, per-panel masses of the plain and
    // attenuation-weighted densities.
    let mut node_r = Vec::with_capacity(panels * nodes_per);
    let mut node_f = Vec::with_capacity(panels * nodes_per);
    let mut gap_mass = Vec::with_capacity(panels);
    let mut gap_att = Vec::with_capacity(panels);
    for w in edges.windows(2) {
        let mid = (w[0] + w[1]) * half;
        let h = (w[1] - w[0]) * half;
        let mut gm = R::zero();
        let mut ga = R::zero();
        for (&t, &wt) in gl.0.iter().zip(gl.1) {
            let r = mid + h * t;
            let f = rician_pdf(r, v0, sigma);
            let m = channel.nakagami_shape(r)?;
            let f21 = crate::specfun::hyp2f1_half(m, drive * channel.path_loss(r) / m)?;
            node_r.push(r);
            node_f.push(f);
            gm = gm + wt * f * h;
            ga = ga + wt * f21 * f * h;
        }
        gap_mass.push(gm);
        gap_att.push(ga);
    }

    // Cumulative survival S(r) and attenuation-weighted survival K(r) from
    // the outage radius inward, splined over the grid edges.
    let tail = rician_survival(r_max, v0, sigma)?;
    let mut surv = vec![R::zero(); edges.len()];
    let mut att = vec![R::zero(); edges.len()];
    surv[panels] = tail;
    att[panels] = tail;
    for i in (0..panels).rev() {
        surv[i] = surv[i + 1] + gap_mass[i];
        att[i] = att[i + 1] + gap_att[i];
    }
    let surv_spline = CubicSpline::natural(&edges, &surv)?;
    let att_spline = CubicSpline::natural(&edges, &att)?;

    // Second pass: the grouped integrand, mixed over the cluster size.
    let mut total = CompensatedSum::new();
    let mut idx = 0;
    for w in edges.windows(2) {
        let h = (w[1] - w[0]) * half;
        for &wt in gl.1 {
            let r = node_r[idx];
            let f = node_f[idx];
            idx += 1;
            let q = ((R::one() - rho) * surv_spline.eval(r) + rho * att_spline.eval(r))
                .min(R::one())
                .max(R::zero());
            let mix = count_derivative_mix(weights, q);
            total.add(wt * h * f * assoc_factor(s, r, scn) * mix);
        }
    }

    // Clusters whose nearest member is already in outage: every beacon is
    // silent, so each count contributes its probability times tail^C.
    let mut beyond = R::zero();
    let mut tail_pow = R::one();
    for &p in weights {
        tail_pow = tail_pow * tail;
        beyond = beyond + p * tail_pow;
    }
    Ok(total.total() + beyond)
}

/// Composite integration grid over the serving distance: forced edges at
/// the path-loss breakpoints and the density's ±2σ/±5σ flanks, filled in
/// with steps that track the density width (σ/16, which keeps the spline
/// bias of the cumulative tables near 1e-8) and the power-law curvature
/// (r/6) near the origin.
fn nearest_grid<R: Real>(v0: R, sigma: R, channel: &BlockageChannel<R>) -> Vec<R> {
    let r_max = channel.r_max();
    let mut forced: Vec<R> = vec![R::zero(), r_max];
    for c in [R::one(), channel.r_min()] {
        if c > R::zero() && c < r_max {
            forced.push(c);
        }
    }
    for k in [-5.0, -2.0, 0.0, 2.0, 5.0] {
        let c = v0 + real::<R>(k) * sigma;
        if c > R::zero() && c < r_max {
            forced.push(c);
        }
    }
    forced.sort_by(|a, b| a.partial_cmp(b).expect("grid edges are finite"));
    let snap = real::<R>(1e-9) * r_max;
    forced.dedup_by(|a, b| (*a - *b).abs() <= snap);

    let fine = (sigma / real::<R>(16.0)).max(r_max / real::<R>(4096.0));
    let origin_floor = real::<R>(0.05);
    let curvature = real::<R>(6.0);
    let mut grid = vec![forced[0]];
    for w in forced.windows(2) {
        let b = w[1];
        let mut x = w[0];
        loop {
            let step = fine.min((x / curvature).max(origin_floor));
            let next = x + step;
            if next + step * real::<R>(0.5) >= b {
                break;
            }
            grid.push(next);
            x = next;
        }
        grid.push(b);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;

    fn baseline() -> (ScenarioConfig<f64>, QuadratureSpec<f64>) {
        let scn = ScenarioConfig::baseline();
        let quad = QuadratureSpec::defaults(&scn);
        (scn, quad)
    }

    #[test]
    fn poisson_weights_cover_the_distribution() {
        let (weights, cap) = poisson_weights(5.0f64, 1e-10).unwrap();
        assert_eq!(weights.len() as u64, cap);
        assert!((15..60).contains(&cap), "cap = {cap}");
        let total: f64 = weights.iter().sum::<f64>() + (-5.0f64).exp();
        assert!(1.0 - total < 1e-10, "residual {}", 1.0 - total);
    }

    #[test]
    fn poisson_weights_reject_underflowing_means() {
        assert!(poisson_weights(800.0f64, 1e-10).is_err());
    }

    #[test]
    fn count_mixture_matches_its_exponential_limit() {
        // Σ_C P(C)·C·q^{C−1} = mean·exp(−mean(1−q)) when the sum runs to
        // infinity; the stored truncation must agree to the tail mass.
        let mean = 5.0f64;
        let (weights, _) = poisson_weights(mean, 1e-12).unwrap();
        for q in [0.05, 0.3, 0.8, 0.97, 1.0] {
            let truncated = count_derivative_mix(&weights, q);
            let closed = mean * (-mean * (1.0 - q)).exp();
            assert!(
                (truncated - closed).abs() < 1e-8,
                "q = {q}: {truncated} vs {closed}"
            );
        }
    }

    #[test]
    fn nearest_inner_at_zero_argument_recovers_the_count_mass() {
        // With s = 0 every factor is one, so the inner expectation must
        // reduce to the probability that the cluster is non-empty.
        let (scn, quad) = baseline();
        let (weights, _) = poisson_weights(scn.typical().mean_pb_count, quad.count_tail_mass)
            .unwrap();
        let gl = gauss_legendre::<f64>(7);
        for v0 in [0.5, 8.0, 25.0, 120.0] {
            let inner = nearest_inner(0.0, v0, &scn, &weights, (&gl.0, &gl.1)).unwrap();
            let expect = 1.0 - (-scn.typical().mean_pb_count).exp();
            assert!(
                (inner - expect).abs() < 1e-7,
                "v0 = {v0}: {inner} vs {expect}"
            );
        }
    }

    #[test]
    fn nearest_grid_is_strictly_increasing_and_spans_the_disk() {
        let (scn, _) = baseline();
        for v0 in [0.0, 3.0, 50.0, 195.0, 500.0] {
            let g = nearest_grid(v0, scn.typical().pb_scatter, &scn.channel);
            assert_eq!(g[0], 0.0);
            assert_eq!(*g.last().unwrap(), scn.channel.r_max());
            assert!(g.windows(2).all(|w| w[1] > w[0]), "v0 = {v0}");
        }
    }

    #[test]
    fn saturated_threshold_pins_both_strategies_to_zero() {
        let (mut scn, quad) = baseline();
        scn.energy_threshold = 10e-3; // above the 4.927 mW ceiling
        for report in [coverage_ra(&scn, &quad).unwrap(), coverage_na(&scn, &quad).unwrap()] {
            assert_eq!(report.probability, 0.0);
            assert!(report.saturated);
            assert!(report.terms.is_empty());
        }
    }

    #[test]
    fn baseline_reports_are_sane_and_nearest_dominates() {
        let (mut scn, quad) = baseline();
        let ra = coverage_ra(&scn, &quad).unwrap();
        scn.strategy = Strategy::Nearest;
        let na = coverage(&scn, &quad).unwrap();

        for report in [&ra, &na] {
            assert_eq!(report.terms[0], 1.0);
            assert_eq!(report.s_values[0], 0.0);
            assert_eq!(report.terms.len(), 11);
            assert!(
                report.probability > 0.0 && report.probability < 1.0,
                "p = {}",
                report.probability
            );
            assert!(!report.saturated);
            assert!(report.inter_tail_bound < 1e-10);
            assert!(report.v0_tail_mass < 1e-13);
            assert!(
                report
                    .s_values
                    .windows(2)
                    .all(|w| w[1] > w[0]),
                "transform arguments must increase"
            );
            // Compensated summation leaves the sum order-insensitive.
            let mut reversed = CompensatedSum::new();
            for &t in report.terms.iter().rev() {
                reversed.add(t);
            }
            assert!(
                (reversed.total() - report.raw_sum).abs() < 1e-9,
                "order sensitivity {}",
                (reversed.total() - report.raw_sum).abs()
            );
        }
        let expected_rf = scn.harvester.harvest_inverse(scn.energy_threshold).unwrap();
        assert_eq!(ra.rf_threshold, expected_rf);
        assert!(ra.count_cap.is_none());
        assert!(na.count_cap.unwrap() > 10);
        // Picking the closest beacon can only help.
        assert!(
            na.probability >= ra.probability - 0.01,
            "na {} vs ra {}",
            na.probability,
            ra.probability
        );
    }

    #[test]
    fn coverage_declines_as_the_threshold_rises() {
        let (mut scn, mut quad) = baseline();
        // Trend check, not a tolerance check: a looser budget keeps it fast.
        quad.rel_tol = 1e-4;
        quad.abs_tol = 1e-8;
        let mut last = f64::INFINITY;
        for gamma in [0.5e-3, 1e-3, 2.5e-3] {
            scn.energy_threshold = gamma;
            let p = coverage_ra(&scn, &quad).unwrap().probability;
            assert!(
                p <= last + 1e-6,
                "coverage rose from {last} to {p} at threshold {gamma}"
            );
            last = p;
        }
    }
}

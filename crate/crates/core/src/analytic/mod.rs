//! Coverage analysis without simulation.
//!
//! Every random quantity in the received-power sum — beacon positions,
//! array orientations, fading — is averaged out analytically, leaving
//! one-dimensional quadratures over distances. The building blocks here are
//! Laplace transforms of the power contributed by each transmitter
//! population (co-cluster beacons under either association rule, beacons of
//! all other clusters, and the macro field), conditioned where needed on
//! the user's distance `v0` from its own cluster center. [`coverage_ra`]
//! and [`coverage_na`] combine them through an alternating binomial sum
//! that approximates the harvested-power threshold indicator.

mod coverage;

pub use coverage::{coverage, coverage_na, coverage_ra, CoverageReport};

use std::sync::Once;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::pointprocess::{density_breakpoints, rician_pdf, rician_survival, TierConfig};
use crate::quad::{gauss_legendre, integrate_with_breakpoints};
use crate::real::{real, Real};
use crate::scenario::{QuadratureSpec, ScenarioConfig};
use crate::specfun::hyp2f1_half;

/// Inner integrals run a decade tighter than the requested tolerance so
/// that nesting them inside an outer adaptive pass keeps the combined error
/// near the caller's budget.
pub(crate) fn inner_rel<R: Real>(quad: &QuadratureSpec<R>) -> R {
    quad.rel_tol * real::<R>(0.1)
}

pub(crate) fn inner_abs<R: Real>(quad: &QuadratureSpec<R>) -> R {
    quad.abs_tol * real::<R>(0.1)
}

/// Mean attenuation of a single in-beam beacon link at transform argument
/// `s`: the Laplace transform of one beacon's received power given a beam
/// hit, averaged over the array orientation, the fading, and the Rician
/// distance law of a beacon whose cluster center sits `v0` meters from the
/// user. Beacons beyond the outage radius contribute factor 1, which closes
/// the distance integral analytically past `r_max`.
pub fn chi<R: Real>(
    s: R,
    v0: R,
    tier: &TierConfig<R>,
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<R> {
    if !(s >= R::zero()) {
        return Err(Error::Domain(format!(
            "transform argument must be nonnegative, got {s}"
        )));
    }
    if s == R::zero() {
        return Ok(R::one());
    }
    let sigma = tier.pb_scatter;
    let r_max = scn.channel.r_max();
    let drive = s * tier.pb_power * scn.pb_array.boresight_gain();
    let mut cuts = quad.breakpoints.clone();
    cuts.extend(density_breakpoints(v0, sigma));
    let q = integrate_with_breakpoints(
        |r| attenuation_kernel(drive, r, scn) * rician_pdf(r, v0, sigma),
        R::zero(),
        r_max,
        &cuts,
        inner_rel(quad),
        inner_abs(quad),
    )?;
    let tail = rician_survival(r_max, v0, sigma)?;
    Ok((q.value + tail).min(R::one()))
}

/// Orientation-and-fading average `E[exp(−drive·G·h·ℓ(r))]/N` of one beam
/// hit at distance `r`, with `drive = s·P·N`. Non-finite only if the
/// special-function evaluation fails, which the adaptive integrator then
/// reports as a non-finite integrand.
fn attenuation_kernel<R: Real>(drive: R, r: R, scn: &ScenarioConfig<R>) -> R {
    let loss = scn.channel.path_loss(r);
    if loss == R::zero() {
        return R::one();
    }
    let m = match scn.channel.nakagami_shape(r) {
        Ok(m) => m,
        Err(_) => return R::nan(),
    };
    hyp2f1_half(m, drive * loss / m).unwrap_or_else(|_| R::nan())
}

/// [`chi`] tabulated across the cluster-center distance `v0` on a
/// Gauss–Legendre grid and interpolated with a natural cubic spline.
///
/// The outer integrals over `v0` (other-cluster fields, user-distance
/// averages) evaluate chi thousands of times at one fixed transform
/// argument; the table turns each evaluation into a spline lookup. Node
/// spacing tracks the beacon scatter width, which sets the scale on which
/// the curve varies, so the interpolation error stays well below the
/// quadrature tolerances.
#[derive(Debug, Clone)]
pub struct ChiCurve<R> {
    s: R,
    spline: CubicSpline<R>,
}

impl<R: Real> ChiCurve<R> {
    /// Tabulate `chi(s, ·)` for the given tier over `v0 ∈ [0, v_hi]`.
    pub fn build(
        s: R,
        tier: &TierConfig<R>,
        scn: &ScenarioConfig<R>,
        quad: &QuadratureSpec<R>,
        v_hi: R,
    ) -> Result<Self> {
        if !(v_hi > R::zero()) {
            return Err(Error::Domain(format!(
                "tabulation range must be positive, got {v_hi}"
            )));
        }
        let per_sigma = real::<R>(12.0);
        let raw = (v_hi / tier.pb_scatter * per_sigma)
            .ceil()
            .to_f64()
            .unwrap_or(512.0);
        let n = (raw as usize).clamp(96, 512);
        let (nodes, _) = gauss_legendre::<R>(n);
        let half = v_hi * real::<R>(0.5);
        let mut xs = Vec::with_capacity(n + 2);
        xs.push(R::zero());
        xs.extend(nodes.iter().map(|&t| half * (t + R::one())));
        xs.push(v_hi);
        let mut ys = Vec::with_capacity(xs.len());
        for &v0 in &xs {
            ys.push(chi(s, v0, tier, scn, quad)?);
        }
        Ok(Self {
            s,
            spline: CubicSpline::natural(&xs, &ys)?,
        })
    }

    /// The transform argument the curve was built for.
    pub fn s(&self) -> R {
        self.s
    }

    /// Interpolated chi, clamped to the unit interval (the spline can
    /// overshoot by a few ulps near the flat ends).
    pub fn eval(&self, v0: R) -> R {
        self.spline.eval(v0).min(R::one()).max(R::zero())
    }
}

static LOW_CLUSTER_MEAN: Once = Once::new();

/// Laplace transform of the co-cluster interference under uniformly random
/// association: the non-associated population is Poisson with mean one less
/// than the cluster mean, and each member contributes the beam-hit mixture
/// factor `1 − ρ_b(1 − chi)`.
pub fn laplace_intra_ra<R: Real>(
    s: R,
    v0: R,
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<R> {
    let tier = scn.typical();
    let chi_v = chi(s, v0, tier, scn, quad)?;
    Ok(intra_ra_from_chi(
        chi_v,
        tier.mean_pb_count,
        scn.pb_array.lobe_hit_probability(),
    ))
}

/// The closed-form composition used by [`laplace_intra_ra`], split out so
/// outer integrals can reuse a tabulated chi value.
pub(crate) fn intra_ra_from_chi<R: Real>(chi_v: R, mean_count: R, rho: R) -> R {
    if mean_count < R::one() {
        LOW_CLUSTER_MEAN.call_once(|| {
            log::warn!(
                "cluster mean {} is below one beacon; treating the non-associated population as empty",
                mean_count.to_f64().unwrap_or(f64::NAN)
            );
        });
    }
    let mean_others = (mean_count - R::one()).max(R::zero());
    (-(mean_others * rho * (R::one() - chi_v))).exp()
}

/// Mean attenuation of a non-associated beacon link when the serving beacon
/// sits at distance `s_b`: same kernel as [`chi`], but over the Rician law
/// truncated below `s_b` (under nearest association no other beacon can be
/// closer). Once `s_b` reaches the outage radius every remaining beacon is
/// silent and the transform is exactly one.
pub fn chi_prime<R: Real>(
    s: R,
    v0: R,
    s_b: R,
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<R> {
    if !(s >= R::zero()) {
        return Err(Error::Domain(format!(
            "transform argument must be nonnegative, got {s}"
        )));
    }
    if s == R::zero() {
        return Ok(R::one());
    }
    let tier = scn.typical();
    let sigma = tier.pb_scatter;
    let r_max = scn.channel.r_max();
    let s_b = s_b.max(R::zero());
    if s_b >= r_max {
        return Ok(R::one());
    }
    let remaining = rician_survival(s_b, v0, sigma)?;
    if !(remaining > R::zero()) {
        return Err(Error::DegenerateTruncation {
            cut: s_b.to_f64().unwrap_or(f64::NAN),
            floor: remaining.to_f64().unwrap_or(f64::NAN),
        });
    }
    let drive = s * tier.pb_power * scn.pb_array.boresight_gain();
    let mut cuts = quad.breakpoints.clone();
    cuts.extend(density_breakpoints(v0, sigma));
    let q = integrate_with_breakpoints(
        |r| attenuation_kernel(drive, r, scn) * rician_pdf(r, v0, sigma),
        s_b,
        r_max,
        &cuts,
        inner_rel(quad),
        inner_abs(quad),
    )?;
    let tail = rician_survival(r_max, v0, sigma)?;
    Ok(((q.value + tail) / remaining).min(R::one()))
}

/// Laplace transform of the co-cluster interference under nearest
/// association, conditioned on the serving distance `s_b` and the cluster
/// holding `count` beacons in total: the `count − 1` farther beacons each
/// contribute the beam-hit mixture of [`chi_prime`].
pub fn laplace_intra_na<R: Real>(
    s: R,
    v0: R,
    s_b: R,
    count: u64,
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<R> {
    if count == 0 {
        return Err(Error::Domain(
            "conditioning on an empty cluster: the serving beacon must exist".to_string(),
        ));
    }
    if count == 1 || s == R::zero() {
        return Ok(R::one());
    }
    let cp = chi_prime(s, v0, s_b, scn, quad)?;
    let rho = scn.pb_array.lobe_hit_probability();
    let per_link = R::one() - rho * (R::one() - cp);
    Ok(per_link.powi(count as i32 - 1).min(R::one()))
}

/// Laplace transform of the power received from all clusters other than the
/// user's own, together with an upper bound on the mass discarded by
/// truncating the parent-distance integral.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InterLaplace<R> {
    /// The transform value, in `(0, 1]`.
    pub value: R,
    /// Bound on the relative error introduced by the finite integration
    /// window (zero means the truncation is provably immaterial).
    pub tail_bound: R,
}

/// Laplace transform of the aggregate power from every other cluster: one
/// generating-functional factor per tier, each an exponential of a radial
/// integral over parent positions in which the whole cluster at distance
/// `v` attenuates by `1 − exp(−C̄·ρ_b·(1 − chi(v)))`.
pub fn laplace_inter<R: Real>(
    s: R,
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<InterLaplace<R>> {
    if !(s >= R::zero()) {
        return Err(Error::Domain(format!(
            "transform argument must be nonnegative, got {s}"
        )));
    }
    if s == R::zero() {
        return Ok(InterLaplace {
            value: R::one(),
            tail_bound: R::zero(),
        });
    }
    let rho = scn.pb_array.lobe_hit_probability();
    let r_max = scn.channel.r_max();
    let two_pi = real::<R>(std::f64::consts::TAU);
    let mut exponent = R::zero();
    let mut tail = R::zero();
    for tier in &scn.tiers {
        if !(tier.parent_intensity > R::zero()) {
            continue;
        }
        let curve = ChiCurve::build(s, tier, scn, quad, quad.inter_cutoff)?;
        let two_sigma = tier.pb_scatter + tier.pb_scatter;
        let cuts = [r_max - two_sigma, r_max, r_max + two_sigma];
        let q = integrate_with_breakpoints(
            |v| {
                let deficit = R::one() - curve.eval(v);
                (R::one() - (-(tier.mean_pb_count * rho * deficit)).exp()) * v
            },
            R::zero(),
            quad.inter_cutoff,
            &cuts,
            quad.rel_tol,
            quad.abs_tol,
        )?;
        exponent = exponent + two_pi * tier.parent_intensity * q.value;
        tail = tail + inter_tail_bound(tier, rho, r_max, quad.inter_cutoff);
    }
    Ok(InterLaplace {
        value: (-exponent).exp(),
        tail_bound: tail,
    })
}

/// Mass bound for the parent integral beyond the cutoff. A beacon of a
/// parent at distance `v > r_max` lands inside the outage radius only if
/// its scatter jump exceeds `v − r_max`, so `1 − chi(v)` is at most the
/// Rayleigh tail `exp(−(v − r_max)²/2σ²)`; with `1 − e^{−x} ≤ x` the
/// discarded exponent mass integrates to the closed form below, which also
/// bounds the relative error of the final exponential.
fn inter_tail_bound<R: Real>(tier: &TierConfig<R>, rho: R, r_max: R, cutoff: R) -> R {
    let delta = cutoff - r_max;
    if !(delta > R::zero()) {
        return R::infinity();
    }
    let sigma = tier.pb_scatter;
    let two_pi = real::<R>(std::f64::consts::TAU);
    let gauss = (-(delta * delta) / (real::<R>(2.0) * sigma * sigma)).exp();
    let root_half_pi = real::<R>(std::f64::consts::FRAC_PI_2).sqrt();
    two_pi
        * tier.parent_intensity
        * tier.mean_pb_count
        * rho
        * gauss
        * (sigma * sigma + r_max * sigma * root_half_pi)
}

/// Radial integral `∫ (1 − kernel(r))·r dr` over the outage disk that
/// drives the macro-field transform, by direct quadrature split at the
/// path-loss breakpoints.
pub fn mbs_integral<R: Real>(
    s: R,
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<R> {
    if !(s >= R::zero()) {
        return Err(Error::Domain(format!(
            "transform argument must be nonnegative, got {s}"
        )));
    }
    if s == R::zero() {
        return Ok(R::zero());
    }
    let drive = s * scn.macro_tier.power * scn.macro_array.boresight_gain();
    let r_max = scn.channel.r_max();
    let q = integrate_with_breakpoints(
        |r| (R::one() - attenuation_kernel(drive, r, scn)) * r,
        R::zero(),
        r_max,
        &quad.breakpoints,
        quad.rel_tol,
        quad.abs_tol,
    )?;
    Ok(q.value.max(R::zero()))
}

/// Series form of [`mbs_integral`]: the antiderivative of the attenuation
/// kernel against `r dr` on each power-law segment collapses to a single
/// hypergeometric-type series per endpoint. Converges only while every
/// endpoint argument stays inside the unit disk and the smooth-segment
/// exponent avoids the series' pole; kept as an independent cross-check of
/// the quadrature path, not as the production route.
pub fn mbs_integral_closed_form<R: Real>(s: R, scn: &ScenarioConfig<R>) -> Result<R> {
    if !(s >= R::zero()) {
        return Err(Error::Domain(format!(
            "transform argument must be nonnegative, got {s}"
        )));
    }
    if s == R::zero() {
        return Ok(R::zero());
    }
    let ch = &scn.channel;
    let drive = s * scn.macro_tier.power * scn.macro_array.boresight_gain();
    let q_los = drive / ch.m_los();
    let q_nlos = drive * ch.beta_nlos() / ch.m_nlos();
    let half = real::<R>(0.5);
    // ∫^u kernel(r)·r dr on a segment where the loss is q·r^{−α}.
    let segment = |m: R, alpha: R, q: R, u: R| -> Result<R> {
        let y = q * u.powf(-alpha);
        Ok(u * u * half * crate::specfun::hyp3f2_xi_series(m, alpha, y)?)
    };
    let r_min = ch.r_min();
    let r_max = ch.r_max();
    let near = hyp2f1_half(ch.m_los(), q_los)? * half;
    let los = segment(ch.m_los(), ch.alpha_los(), q_los, r_min)?
        - segment(ch.m_los(), ch.alpha_los(), q_los, R::one())?;
    let nlos = segment(ch.m_nlos(), ch.alpha_nlos(), q_nlos, r_max)?
        - segment(ch.m_nlos(), ch.alpha_nlos(), q_nlos, r_min)?;
    Ok(r_max * r_max * half - near - los - nlos)
}

/// Laplace transform of the macro-field power: the standard exponential
/// functional of a planar Poisson field over the outage disk.
pub fn laplace_mbs<R: Real>(
    s: R,
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<R> {
    let integral = mbs_integral(s, scn, quad)?;
    let two_pi = real::<R>(std::f64::consts::TAU);
    let rho = scn.macro_array.lobe_hit_probability();
    Ok((-(two_pi * scn.macro_tier.intensity * rho * integral)).exp())
}

/// Fading-averaged attenuation of the perfectly aligned serving link at
/// distance `r`: the Gamma-fading Laplace factor at full boresight gain.
/// Equals one beyond the outage radius, where the link carries nothing.
pub fn assoc_factor<R: Real>(s: R, r: R, scn: &ScenarioConfig<R>) -> R {
    debug_assert!(s >= R::zero() && r >= R::zero());
    if s == R::zero() || r >= scn.channel.r_max() {
        return R::one();
    }
    let m = scn
        .channel
        .nakagami_shape(r)
        .expect("the shape is defined inside the outage radius");
    let x = s
        * scn.typical().pb_power
        * scn.pb_array.boresight_gain()
        * scn.channel.path_loss(r.max(R::zero()));
    (m / (m + x)).powf(m)
}

/// Serving-link factor averaged over the Rician distance law: the inner
/// radial integral of the random-association coverage expression, with the
/// beyond-outage mass contributing factor one.
pub(crate) fn assoc_average<R: Real>(
    s: R,
    v0: R,
    scn: &ScenarioConfig<R>,
    quad: &QuadratureSpec<R>,
) -> Result<R> {
    let sigma = scn.typical().pb_scatter;
    let r_max = scn.channel.r_max();
    let mut cuts = quad.breakpoints.clone();
    cuts.extend(density_breakpoints(v0, sigma));
    let q = integrate_with_breakpoints(
        |r| assoc_factor(s, r, scn) * rician_pdf(r, v0, sigma),
        R::zero(),
        r_max,
        &cuts,
        inner_rel(quad),
        inner_abs(quad),
    )?;
    Ok((q.value + rician_survival(r_max, v0, sigma)?).min(R::one()))
}

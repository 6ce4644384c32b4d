//! Random geometry of the network and the distance laws it induces.
//!
//! Samplers cover the homogeneous PPP of macro stations, Gaussian-scattered
//! clusters of power beacons, and the "typical cluster" construction: the
//! reference user sits at distance `v0` from its own cluster center, placed
//! on the positive x-axis (the whole model is isotropic, so only distances
//! matter). The density functions are the conditional-distance laws the
//! analytic engine integrates against; they are deliberately written in
//! overflow-free forms so extreme geometries stay finite.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::integrate_with_breakpoints;
use crate::real::{real, Real};
use crate::specfun::bessel_i0_scaled;

/// Planar point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point2<R> {
    pub x: R,
    pub y: R,
}

impl<R: Real> Point2<R> {
    pub fn origin() -> Self {
        Self {
            x: R::zero(),
            y: R::zero(),
        }
    }

    pub fn norm(&self) -> R {
        self.x.hypot(self.y)
    }

    pub fn distance_to(&self, other: &Self) -> R {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One beacon tier: cluster parents, scatter widths, mean counts, transmit
/// power.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TierConfig<R> {
    /// Cluster-parent intensity, per m².
    pub parent_intensity: R,
    /// Standard deviation of beacon offsets around a parent, meters.
    pub pb_scatter: R,
    /// Standard deviation of user offsets around a parent, meters.
    pub eu_scatter: R,
    /// Mean number of beacons per cluster.
    pub mean_pb_count: R,
    /// Mean number of users per cluster. Carried for completeness; no
    /// coverage quantity depends on it.
    pub mean_eu_count: R,
    /// Per-beacon transmit power, watts.
    pub pb_power: R,
}

impl<R: Real> TierConfig<R> {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.parent_intensity > R::zero()
            && self.pb_scatter > R::zero()
            && self.eu_scatter > R::zero()
            && self.mean_pb_count > R::zero()
            && self.mean_eu_count > R::zero()
            && self.pb_power > R::zero();
        if !all_positive {
            return Err(Error::Domain(format!(
                "tier parameters must all be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// The macro-station tier: a plain PPP of high-power transmitters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MacroConfig<R> {
    /// Station intensity, per m². Zero disables the tier.
    pub intensity: R,
    /// Transmit power, watts.
    pub power: R,
    /// Array size (element count).
    pub array_size: u32,
}

impl<R: Real> MacroConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= R::zero()) || !(self.power > R::zero()) || self.array_size == 0 {
            return Err(Error::Domain(format!(
                "macro tier needs intensity >= 0, power > 0, array_size >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}

/// The sampled cluster containing the reference user: its distance to the
/// cluster center and the beacon offsets around that center.
#[derive(Debug, Clone)]
pub struct TypicalCluster<R> {
    /// Distance from the reference user to its cluster center (`v0`).
    pub eu_distance: R,
    /// Beacon positions relative to the cluster center.
    pub pb_offsets: Vec<Point2<R>>,
}

impl<R: Real> TypicalCluster<R> {
    pub fn pb_count(&self) -> usize {
        self.pb_offsets.len()
    }

    /// Reference-user position under the on-axis convention.
    pub fn eu_position(&self) -> Point2<R> {
        Point2 {
            x: self.eu_distance,
            y: R::zero(),
        }
    }
}

/// Homogeneous PPP restricted to a disk: Poisson count, uniform positions.
pub fn sample_ppp_disk<R: Real, G: Rng + ?Sized>(
    intensity: R,
    center: Point2<R>,
    radius: R,
    rng: &mut G,
) -> Vec<Point2<R>> {
    let mean = intensity * R::PI() * radius * radius;
    let count = R::poisson_count(mean, rng);
    let two_pi = R::PI() + R::PI();
    (0..count)
        .map(|_| {
            let r = radius * R::unit_uniform(rng).sqrt();
            let theta = two_pi * R::unit_uniform(rng);
            Point2 {
                x: center.x + r * theta.cos(),
                y: center.y + r * theta.sin(),
            }
        })
        .collect()
}

/// One Thomas-cluster draw: Poisson count of daughters, isotropic Gaussian
/// offsets with the given scatter around `center`.
pub fn sample_cluster<R: Real, G: Rng + ?Sized>(
    mean_count: R,
    scatter: R,
    center: Point2<R>,
    rng: &mut G,
) -> Vec<Point2<R>> {
    let count = R::poisson_count(mean_count, rng);
    (0..count)
        .map(|_| Point2 {
            x: center.x + scatter * R::standard_normal(rng),
            y: center.y + scatter * R::standard_normal(rng),
        })
        .collect()
}

/// Sample the typical cluster of tier `j`: the user's distance to the
/// cluster center is the radial law of its own Gaussian scatter (Rayleigh),
/// and the beacons scatter around the same center.
pub fn sample_typical_cluster<R: Real, G: Rng + ?Sized>(
    tier: &TierConfig<R>,
    rng: &mut G,
) -> TypicalCluster<R> {
    let dx = tier.eu_scatter * R::standard_normal(rng);
    let dy = tier.eu_scatter * R::standard_normal(rng);
    TypicalCluster {
        eu_distance: dx.hypot(dy),
        pb_offsets: sample_cluster(tier.mean_pb_count, tier.pb_scatter, Point2::origin(), rng),
    }
}

/// Conditional beacon–user distance density given the user sits `v0` from
/// the cluster center: Rician with scale `sigma`.
///
/// Evaluated as `(r/σ²)·exp(−(r−v0)²/2σ²)·[e^{−rv0/σ²} I0(rv0/σ²)]` — the
/// Gaussian factor keeps the Bessel growth absorbed, so arguments like
/// `v0 = 100σ` stay comfortably inside range.
pub fn rician_pdf<R: Real>(r: R, v0: R, sigma: R) -> R {
    debug_assert!(sigma > R::zero() && v0 >= R::zero());
    if r <= R::zero() {
        return R::zero();
    }
    let sig2 = sigma * sigma;
    let diff = r - v0;
    let gauss = (-(diff * diff) / (sig2 + sig2)).exp();
    let scaled_bessel = bessel_i0_scaled(r * v0 / sig2)
        .expect("Bessel argument is nonnegative by construction");
    r / sig2 * gauss * scaled_bessel
}

/// Distribution function of the Rician conditional distance, by adaptive
/// quadrature of [`rician_pdf`] (clamped into `[0, 1]`).
pub fn rician_cdf<R: Real>(r: R, v0: R, sigma: R) -> Result<R> {
    if r <= R::zero() {
        return Ok(R::zero());
    }
    let q = integrate_with_breakpoints(
        |t| rician_pdf(t, v0, sigma),
        R::zero(),
        r,
        &density_breakpoints(v0, sigma),
        real::<R>(1e-11),
        real::<R>(1e-13),
    )?;
    Ok(q.value.max(R::zero()).min(R::one()))
}

/// Mass of the Rician law beyond `r`, integrated directly so that deep-tail
/// truncations avoid the `1 − cdf` cancellation.
pub fn rician_survival<R: Real>(r: R, v0: R, sigma: R) -> Result<R> {
    let r = r.max(R::zero());
    let upper = tail_cutoff(r, v0, sigma);
    if upper <= r {
        return Ok(R::zero());
    }
    let q = integrate_with_breakpoints(
        |t| rician_pdf(t, v0, sigma),
        r,
        upper,
        &density_breakpoints(v0, sigma),
        real::<R>(1e-11),
        real::<R>(1e-13),
    )?;
    Ok(q.value.max(R::zero()).min(R::one()))
}

/// Density of the *nearest* of `count` i.i.d. Rician distances.
pub fn nearest_pdf<R: Real>(r: R, v0: R, count: u64, sigma: R) -> Result<R> {
    if count == 0 {
        return Err(Error::Domain(
            "nearest-distance law needs at least one beacon in the cluster".to_string(),
        ));
    }
    if r <= R::zero() {
        return Ok(R::zero());
    }
    let f = rician_pdf(r, v0, sigma);
    if count == 1 {
        return Ok(f);
    }
    let survival = R::one() - rician_cdf(r, v0, sigma)?;
    let c = real::<R>(count as f64);
    Ok(c * survival.max(R::zero()).powi(count as i32 - 1) * f)
}

/// Density of a non-associated beacon's distance: the Rician law truncated
/// below the serving distance `s_b`.
pub fn nonassoc_pdf<R: Real>(r: R, v0: R, s_b: R, sigma: R) -> Result<R> {
    if r <= s_b {
        return Ok(R::zero());
    }
    let survival = rician_survival(s_b, v0, sigma)?;
    if !(survival > R::zero()) {
        return Err(Error::DegenerateTruncation {
            cut: s_b.to_f64().unwrap_or(f64::NAN),
            floor: survival.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(rician_pdf(r, v0, sigma) / survival)
}

/// Interior breakpoints that pin the density's peak for the adaptive
/// integrator (the Rician bump is centered near `v0` with width `sigma`).
pub(crate) fn density_breakpoints<R: Real>(v0: R, sigma: R) -> Vec<R> {
    let mut cuts = Vec::with_capacity(5);
    for k in [-4.0, -2.0, 0.0, 2.0, 4.0] {
        let c = v0 + real::<R>(k) * sigma;
        if c > R::zero() {
            cuts.push(c);
        }
    }
    cuts
}

/// Radius beyond which the remaining Rician mass is far below any tolerance
/// used in this crate (the Gaussian factor is `e^{−72}` at 12σ).
pub(crate) fn tail_cutoff<R: Real>(r: R, v0: R, sigma: R) -> R {
    (v0 + real::<R>(12.0) * sigma).max(r + real::<R>(12.0) * sigma)
}

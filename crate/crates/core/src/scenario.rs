//! Scenario description: every knob of the network, channel, and harvester
//! in one validated bundle, plus the quadrature controls the analytic engine
//! runs with.

use serde::Serialize;

use crate::channel::{AntennaArray, BlockageChannel, Harvester};
use crate::error::{Error, Result};
use crate::pointprocess::{MacroConfig, TierConfig};
use crate::real::{real, Real};
use crate::specfun::harmonic_normalizer;

/// Which beacon the user draws energy from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// A uniformly random beacon of the own cluster.
    Random,
    /// The closest beacon of the own cluster.
    Nearest,
}

/// Generalized-exponential approximation layer: order and its harmonic
/// normalizer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GEApproximation<R> {
    order: u32,
    normalizer: R,
}

/// Orders beyond this make the alternating binomial sum shed too many digits
/// to trust (the middle coefficients reach ~5e6 at 25 and keep squaring).
const MAX_GE_ORDER: u32 = 25;

impl<R: Real> GEApproximation<R> {
    pub fn new(order: u32) -> Result<Self> {
        if order > MAX_GE_ORDER {
            return Err(Error::Domain(format!(
                "approximation order {order} exceeds {MAX_GE_ORDER}; the alternating \
                 binomial sum loses all precision there"
            )));
        }
        Ok(Self {
            order,
            normalizer: harmonic_normalizer(order)?,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// The harmonic-number constant `a` scaling the exponential grid.
    pub fn normalizer(&self) -> R {
        self.normalizer
    }
}

/// Full network description consumed by both the analytic engine and the
/// simulator.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioConfig<R> {
    /// Beacon tiers (at least one).
    pub tiers: Vec<TierConfig<R>>,
    /// Macro-station tier.
    pub macro_tier: MacroConfig<R>,
    /// Blockage path loss and fading shapes, shared by all transmitters.
    pub channel: BlockageChannel<R>,
    /// Beacon antenna array (size and lobe-hit probability).
    pub pb_array: AntennaArray<R>,
    /// Macro-station antenna array.
    pub macro_array: AntennaArray<R>,
    /// Rectifier at the user.
    pub harvester: Harvester<R>,
    /// 1-based index of the tier hosting the reference user.
    pub typical_tier: usize,
    /// Beacon-association rule.
    pub strategy: Strategy,
    /// DC power the user must harvest to be covered, watts.
    pub energy_threshold: R,
    /// Approximation layer for the exponential-of-minimum trick.
    pub ge: GEApproximation<R>,
}

impl<R: Real> ScenarioConfig<R> {
    /// The reference two-tier urban configuration used by the examples and
    /// the validation suite: identical dense beacon tiers, a sparse
    /// high-power macro overlay, 16/64-element arrays, and millimeter-wave
    /// blockage with LOS out to 100 m and outage past 200 m.
    pub fn baseline() -> Self {
        let tier = TierConfig {
            parent_intensity: real(1e-3),
            pb_scatter: real(10.0),
            eu_scatter: real(10.0),
            mean_pb_count: real(5.0),
            mean_eu_count: real(5.0),
            pb_power: real(0.1),
        };
        Self {
            tiers: vec![tier, tier],
            macro_tier: MacroConfig {
                intensity: real(2e-4),
                power: real(10.0),
                array_size: 64,
            },
            channel: BlockageChannel::new(
                real(2.0),
                real(4.0),
                real(3.0),
                real(2.0),
                real(100.0),
                real(200.0),
            )
            .expect("baseline channel parameters are valid"),
            pb_array: AntennaArray::with_default_lobe(16)
                .expect("baseline beacon array is valid"),
            macro_array: AntennaArray::with_default_lobe(64)
                .expect("baseline macro array is valid"),
            harvester: Harvester::new(real(4.927e-3), real(6.4e-5), real(274.0), real(0.29))
                .expect("baseline harvester constants are valid"),
            typical_tier: 1,
            strategy: Strategy::Random,
            energy_threshold: real(1e-3),
            ge: GEApproximation::new(10).expect("baseline order is valid"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::Domain("at least one beacon tier is required".to_string()));
        }
        for tier in &self.tiers {
            tier.validate()?;
        }
        self.macro_tier.validate()?;
        if self.typical_tier == 0 || self.typical_tier > self.tiers.len() {
            return Err(Error::Domain(format!(
                "typical tier {} out of range 1..={}",
                self.typical_tier,
                self.tiers.len()
            )));
        }
        if !(self.energy_threshold > R::zero()) {
            return Err(Error::Domain(format!(
                "energy threshold must be positive, got {}",
                self.energy_threshold
            )));
        }
        if self.macro_array.size() != self.macro_tier.array_size {
            return Err(Error::Domain(format!(
                "macro array size {} disagrees with tier config {}",
                self.macro_array.size(),
                self.macro_tier.array_size
            )));
        }
        Ok(())
    }

    /// The tier hosting the reference user.
    pub fn typical(&self) -> &TierConfig<R> {
        &self.tiers[self.typical_tier - 1]
    }
}

/// Integration controls for the analytic engine.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureSpec<R> {
    /// Relative tolerance of each adaptive integral.
    pub rel_tol: R,
    /// Absolute floor for each adaptive integral.
    pub abs_tol: R,
    /// Structural radii where the integrands kink (path-loss breakpoints).
    pub breakpoints: Vec<R>,
    /// The outer user-distance integral stops at this many scatter widths.
    pub v0_cutoff_sigmas: R,
    /// Truncation radius of the other-cluster parent integral, meters.
    pub inter_cutoff: R,
    /// The cluster-size sum stops once the remaining Poisson mass drops
    /// below this.
    pub count_tail_mass: R,
}

impl<R: Real> QuadratureSpec<R> {
    pub fn defaults(scn: &ScenarioConfig<R>) -> Self {
        let r_max = scn.channel.r_max();
        let max_scatter = scn
            .tiers
            .iter()
            .map(|t| t.pb_scatter)
            .fold(R::zero(), |a, b| a.max(b));
        Self {
            rel_tol: real(1e-5),
            abs_tol: real(1e-9),
            breakpoints: vec![R::one(), scn.channel.r_min(), r_max],
            v0_cutoff_sigmas: real(8.0),
            inter_cutoff: r_max + real::<R>(8.0) * max_scatter,
            count_tail_mass: real(1e-10),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > R::zero()
            && self.abs_tol > R::zero()
            && self.v0_cutoff_sigmas > R::zero()
            && self.inter_cutoff > R::zero()
            && self.count_tail_mass > R::zero();
        if !ok {
            return Err(Error::Domain(format!(
                "quadrature controls must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

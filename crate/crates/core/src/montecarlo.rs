//! Ground-truth simulator: full network snapshots around the reference
//! user, the four received-power components, and coverage estimates with
//! confidence intervals.
//!
//! Determinism contract: trial `t` of a run seeded with `seed` always draws
//! from the ChaCha substream `(seed, t)`, geometry comes before channel
//! state, and the estimator reduces fixed-size trial chunks in index order
//! — so every result is bit-identical regardless of how many workers rayon
//! schedules.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{AntennaArray, BlockageChannel};
use crate::error::{Error, Result};
use crate::pointprocess::{
    sample_cluster, sample_ppp_disk, sample_typical_cluster, Point2, TypicalCluster,
};
use crate::real::{real, Real};
use crate::scenario::{QuadratureSpec, ScenarioConfig, Strategy};
use crate::stats::{wilson_interval, CompensatedSum};

/// Trials per work unit of the parallel estimator. Fixed so that the
/// reduction order — and therefore the compensated means — never depends on
/// the thread count.
const TRIAL_CHUNK: u64 = 1024;

/// Two-sided 95% normal critical value.
const Z95: f64 = 1.959963984540054;

/// Which substream a trial's draws came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngTrace {
    pub seed: u64,
    pub trial: u64,
}

/// Counter-mode generator pinned to one trial: stream `trial` of the cipher
/// keyed by `seed`. Trials are independent and reproducible in isolation,
/// which is what makes the estimator order- and parallelism-agnostic.
#[derive(Debug, Clone)]
pub struct TrialRng {
    rng: ChaCha8Rng,
    seed: u64,
    trial: u64,
}

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self { rng, seed, trial }
    }

    pub fn trace(&self) -> RngTrace {
        RngTrace {
            seed: self.seed,
            trial: self.trial,
        }
    }
}

impl RngCore for TrialRng {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// One sampled network snapshot around the reference user.
#[derive(Debug, Clone)]
pub struct Realization<R> {
    /// The user's own cluster: center at the origin, user at
    /// `(eu_distance, 0)`.
    pub typical: TypicalCluster<R>,
    /// Index of the serving beacon in `typical.pb_offsets`; `None` exactly
    /// when the cluster is empty.
    pub associated_index: Option<usize>,
    /// Per tier, the sampled parent centers with their beacon positions
    /// (absolute coordinates).
    pub other_clusters: Vec<Vec<(Point2<R>, Vec<Point2<R>>)>>,
    /// Macro-station positions inside the outage disk around the user.
    pub mbs_points: Vec<Point2<R>>,
    /// Which substream produced this snapshot.
    pub rng_trace: RngTrace,
}

/// The four received-power components of one trial, their sum, and the
/// rectified output.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerBreakdown<R> {
    /// Serving-beacon power, watts (zero when the cluster is empty or the
    /// serving beacon is in outage).
    pub p_asso: R,
    /// Power from the user's own cluster's other beacons.
    pub p_intra: R,
    /// Power from every other cluster, all tiers.
    pub p_inter: R,
    /// Macro-field power.
    pub p_mbs: R,
    /// Total RF input: exactly the sum of the four components.
    pub p_rf: R,
    /// Rectifier output for `p_rf`.
    pub p_dc: R,
}

impl<R: Real> PowerBreakdown<R> {
    fn components(&self) -> [R; 6] {
        [
            self.p_asso,
            self.p_intra,
            self.p_inter,
            self.p_mbs,
            self.p_rf,
            self.p_dc,
        ]
    }
}

/// Coverage estimate over a batch of trials.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageEstimate<R> {
    /// Fraction of trials whose rectified power beat the threshold.
    pub probability: R,
    /// 95% Wilson interval around `probability`.
    pub ci_low: R,
    pub ci_high: R,
    pub trials: u64,
    pub seed: u64,
    /// Per-component mean powers across all trials.
    pub mean_breakdown: PowerBreakdown<R>,
}

/// Sample one network snapshot.
///
/// Draw order is fixed: the typical cluster, the association pick, each
/// tier's parent field with its clusters in tier order, then the macro
/// field. The user's own parent is the typical cluster itself and is never
/// re-sampled; the remaining parents of its tier follow the same
/// homogeneous field as every other tier. Parent fields are truncated at
/// the analytic engine's default cutoff plus six scatter widths, beyond
/// which a cluster cannot reach inside the outage radius by more than the
/// Gaussian tail; macro stations beyond the outage radius contribute
/// nothing and are not sampled at all.
pub fn generate_realization<R: Real>(
    scn: &ScenarioConfig<R>,
    rng: &mut TrialRng,
) -> Realization<R> {
    let typical = sample_typical_cluster(scn.typical(), rng);
    let eu = typical.eu_position();
    let associated_index = match typical.pb_count() {
        0 => None,
        count => Some(match scn.strategy {
            Strategy::Random => rng.gen_range(0..count),
            Strategy::Nearest => {
                let mut best = 0;
                let mut best_d = typical.pb_offsets[0].distance_to(&eu);
                for (i, pb) in typical.pb_offsets.iter().enumerate().skip(1) {
                    let d = pb.distance_to(&eu);
                    if d < best_d {
                        best = i;
                        best_d = d;
                    }
                }
                best
            }
        }),
    };
    let window_base = QuadratureSpec::defaults(scn).inter_cutoff;
    let six = real::<R>(6.0);
    let other_clusters = scn
        .tiers
        .iter()
        .map(|tier| {
            sample_ppp_disk(
                tier.parent_intensity,
                eu,
                window_base + six * tier.pb_scatter,
                rng,
            )
            .into_iter()
            .map(|center| {
                let members = sample_cluster(tier.mean_pb_count, tier.pb_scatter, center, rng);
                (center, members)
            })
            .collect()
        })
        .collect();
    let mbs_points = sample_ppp_disk(scn.macro_tier.intensity, eu, scn.channel.r_max(), rng);
    Realization {
        typical,
        associated_index,
        other_clusters,
        mbs_points,
        rng_trace: rng.trace(),
    }
}

/// One interfering link: beam-orientation gain, then fading, then path
/// loss. Links at or beyond the outage radius draw nothing and contribute
/// zero, and a missed beam skips its fading draw.
fn interferer_power<R: Real>(
    position: &Point2<R>,
    eu: &Point2<R>,
    power: R,
    array: &AntennaArray<R>,
    channel: &BlockageChannel<R>,
    rng: &mut TrialRng,
) -> R {
    let d = position.distance_to(eu);
    if d >= channel.r_max() {
        return R::zero();
    }
    let gain = array.sample_interferer_gain(rng);
    if gain == R::zero() {
        return R::zero();
    }
    let h = channel
        .sample_fading(d, rng)
        .expect("distance checked against the outage radius");
    power * gain * h * channel.path_loss(d)
}

/// Accumulate the four power components of a snapshot.
///
/// Channel draws follow a fixed order: the serving link's fading first,
/// then non-associated co-cluster links in index order, other clusters in
/// tier/parent/member order, macro links last. The serving beacon is
/// perfectly aligned (full boresight gain); every other link draws an
/// orientation through the array's lobe model.
pub fn received_power<R: Real>(
    snapshot: &Realization<R>,
    scn: &ScenarioConfig<R>,
    rng: &mut TrialRng,
) -> PowerBreakdown<R> {
    let eu = snapshot.typical.eu_position();
    let channel = &scn.channel;
    let tier_j = scn.typical();

    let mut p_asso = R::zero();
    if let Some(serving) = snapshot.associated_index {
        let d = snapshot.typical.pb_offsets[serving].distance_to(&eu);
        if d < channel.r_max() {
            let h = channel
                .sample_fading(d, rng)
                .expect("distance checked against the outage radius");
            p_asso = tier_j.pb_power * scn.pb_array.boresight_gain() * h * channel.path_loss(d);
        }
    }

    let mut p_intra = R::zero();
    for (i, pb) in snapshot.typical.pb_offsets.iter().enumerate() {
        if Some(i) == snapshot.associated_index {
            continue;
        }
        p_intra += interferer_power(pb, &eu, tier_j.pb_power, &scn.pb_array, channel, rng);
    }

    let mut p_inter = R::zero();
    for (tier, clusters) in scn.tiers.iter().zip(&snapshot.other_clusters) {
        for (_, members) in clusters {
            for pb in members {
                p_inter += interferer_power(pb, &eu, tier.pb_power, &scn.pb_array, channel, rng);
            }
        }
    }

    let mut p_mbs = R::zero();
    for station in &snapshot.mbs_points {
        p_mbs += interferer_power(
            station,
            &eu,
            scn.macro_tier.power,
            &scn.macro_array,
            channel,
            rng,
        );
    }

    let p_rf = p_asso + p_intra + p_inter + p_mbs;
    PowerBreakdown {
        p_asso,
        p_intra,
        p_inter,
        p_mbs,
        p_rf,
        p_dc: scn.harvester.harvest_dc(p_rf),
    }
}

/// Run one full trial on its own substream.
pub fn simulate_trial<R: Real>(scn: &ScenarioConfig<R>, seed: u64, trial: u64) -> PowerBreakdown<R> {
    let mut rng = TrialRng::new(seed, trial);
    let snapshot = generate_realization(scn, &mut rng);
    received_power(&snapshot, scn, &mut rng)
}

struct ChunkStats<R> {
    covered: u64,
    sums: [CompensatedSum<R>; 6],
}

/// Estimate the energy-coverage probability over `trials` independent
/// snapshots. Deterministic for a given `(scn, trials, seed)` triple.
pub fn estimate_coverage<R: Real>(
    scn: &ScenarioConfig<R>,
    trials: u64,
    seed: u64,
) -> Result<CoverageEstimate<R>> {
    scn.validate()?;
    if trials == 0 {
        return Err(Error::Domain(
            "a coverage estimate needs at least one trial".to_string(),
        ));
    }
    let n_chunks = trials.div_ceil(TRIAL_CHUNK);
    let chunks: Vec<ChunkStats<R>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut covered = 0u64;
            let mut sums = [CompensatedSum::<R>::new(); 6];
            for t in c * TRIAL_CHUNK..((c + 1) * TRIAL_CHUNK).min(trials) {
                let b = simulate_trial(scn, seed, t);
                if b.p_dc > scn.energy_threshold {
                    covered += 1;
                }
                for (acc, v) in sums.iter_mut().zip(b.components()) {
                    acc.add(v);
                }
            }
            ChunkStats { covered, sums }
        })
        .collect();

    let mut covered = 0u64;
    let mut totals = [CompensatedSum::<R>::new(); 6];
    for chunk in &chunks {
        covered += chunk.covered;
        for (t, s) in totals.iter_mut().zip(&chunk.sums) {
            t.add(s.total());
        }
    }
    let n = real::<R>(trials as f64);
    let mean = |i: usize| totals[i].total() / n;
    let (ci_low, ci_high) = wilson_interval(covered, trials, real::<R>(Z95))?;
    Ok(CoverageEstimate {
        probability: real::<R>(covered as f64) / n,
        ci_low,
        ci_high,
        trials,
        seed,
        mean_breakdown: PowerBreakdown {
            p_asso: mean(0),
            p_intra: mean(1),
            p_inter: mean(2),
            p_mbs: mean(3),
            p_rf: mean(4),
            p_dc: mean(5),
        },
    })
}

/// Per-trial power records, in trial order — the diagnostic stream behind
/// the oracle comparisons and the optional CLI dump.
pub fn sample_breakdowns<R: Real>(
    scn: &ScenarioConfig<R>,
    trials: u64,
    seed: u64,
) -> Result<Vec<PowerBreakdown<R>>> {
    scn.validate()?;
    if trials == 0 {
        return Err(Error::Domain(
            "a diagnostic batch needs at least one trial".to_string(),
        ));
    }
    let n_chunks = trials.div_ceil(TRIAL_CHUNK);
    let per_chunk: Vec<Vec<PowerBreakdown<R>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            (c * TRIAL_CHUNK..((c + 1) * TRIAL_CHUNK).min(trials))
                .map(|t| simulate_trial(scn, seed, t))
                .collect()
        })
        .collect();
    Ok(per_chunk.into_iter().flatten().collect())
}

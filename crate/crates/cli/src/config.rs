//! Flat `key=value` configuration with explicit units in the key names.
//! Anything not set falls back to the reference urban scenario, powers are
//! converted to watts at the boundary, and every diagnostic names the key
//! it is complaining about.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use mmwpt_core::channel::AntennaArray;
use mmwpt_core::channel::{BlockageChannel, Harvester};
use mmwpt_core::scenario::{GEApproximation, Strategy};
use mmwpt_core::Scenario;
use serde::Serialize;

/// How the arrays' lobe-hit probability is derived from the element count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LobeProbMode {
    /// ρ = 1/(π·N), the sinusoidal boresight-offset model.
    PiN,
    /// ρ = 1/N, the sectorized approximation.
    OneOverN,
}

impl LobeProbMode {
    pub fn probability(self, size: u32) -> f64 {
        match self {
            LobeProbMode::PiN => 1.0 / (std::f64::consts::PI * f64::from(size)),
            LobeProbMode::OneOverN => 1.0 / f64::from(size),
        }
    }

    pub fn array(self, size: u32) -> Result<AntennaArray<f64>> {
        AntennaArray::with_lobe_probability(size, self.probability(size))
            .map_err(anyhow::Error::from)
    }
}

/// A fully resolved scenario plus the lobe convention it was built with
/// (recorded in every JSON report so analytic/simulated runs stay
/// auditable).
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub scenario: Scenario,
    pub lobe_prob_mode: LobeProbMode,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Load the configuration file (if any), apply `--set` overrides on top,
/// and build a validated scenario.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ResolvedConfig> {
    let mut entries = Vec::new();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            entries.push(
                split_entry(line)
                    .with_context(|| format!("{}:{}", path.display(), number + 1))?,
            );
        }
    }
    for item in overrides {
        entries.push(split_entry(item).context("in --set override")?);
    }
    build(entries)
}

fn split_entry(text: &str) -> Result<(String, String)> {
    match text.split_once('=') {
        Some((key, value)) => Ok((key.trim().to_string(), value.trim().to_string())),
        None => bail!("expected key=value, got '{text}'"),
    }
}

/// Keys whose bare form omits the unit; callers get told the spelled-out
/// variant instead of a generic unknown-key complaint.
fn unitless_power_hint(key: &str) -> Option<String> {
    match key {
        "gamma_th" => Some("gamma_th_mw".to_string()),
        "p_max" => Some("p_max_mw".to_string()),
        "p_th" => Some("p_th_mw".to_string()),
        "mbs.power" => Some("mbs.power_dbm".to_string()),
        _ if key.starts_with("tier") && key.ends_with(".pb_power") => {
            Some(format!("{key}_dbm"))
        }
        _ => None,
    }
}

struct KeyMap(BTreeMap<String, String>);

impl KeyMap {
    /// Remove and parse `key`, or return `None` when absent.
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(_) => bail!("key '{key}': cannot parse '{raw}' as a number"),
            },
        }
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }
}

fn build(entries: Vec<(String, String)>) -> Result<ResolvedConfig> {
    let mut map = KeyMap(BTreeMap::new());
    for (key, value) in entries {
        if let Some(hint) = unitless_power_hint(&key) {
            bail!("key '{key}' is missing its unit: use '{hint}'");
        }
        map.0.insert(key, value);
    }

    let mut scenario = Scenario::baseline();

    let k: usize = map.take("k")?.unwrap_or(scenario.tiers.len());
    if k == 0 || k > 64 {
        bail!("key 'k': tier count must lie in 1..=64, got {k}");
    }
    let template = scenario.tiers[0];
    scenario.tiers.resize(k, template);

    for i in 1..=k {
        let tier = &mut scenario.tiers[i - 1];
        if let Some(v) = map.take::<f64>(&format!("tier{i}.lambda_per_km2"))? {
            tier.parent_intensity = v * 1e-6;
        }
        if let Some(v) = map.take(&format!("tier{i}.sigma_b_m"))? {
            tier.pb_scatter = v;
        }
        if let Some(v) = map.take(&format!("tier{i}.sigma_u_m"))? {
            tier.eu_scatter = v;
        }
        if let Some(v) = map.take(&format!("tier{i}.mean_pb"))? {
            tier.mean_pb_count = v;
        }
        if let Some(v) = map.take(&format!("tier{i}.mean_eu"))? {
            tier.mean_eu_count = v;
        }
        if let Some(v) = map.take::<f64>(&format!("tier{i}.pb_power_dbm"))? {
            tier.pb_power = dbm_to_watts(v);
        }
    }
    // A tier key that survived the loop either points past k or misspells
    // the field; tell those cases apart.
    if let Some(key) = map.0.keys().find(|key| key.starts_with("tier")).cloned() {
        let indexed = key
            .strip_prefix("tier")
            .and_then(|rest| rest.split_once('.'))
            .and_then(|(index, field)| index.parse::<usize>().ok().map(|i| (i, field)));
        if let Some((index, field)) = indexed {
            if matches!(
                field,
                "lambda_per_km2" | "sigma_b_m" | "sigma_u_m" | "mean_pb" | "mean_eu"
                    | "pb_power_dbm"
            ) {
                bail!("key '{key}': tier index {index} out of range for k={k}");
            }
        }
        bail!("unknown key '{key}'");
    }

    if let Some(v) = map.take::<f64>("mbs.lambda_per_km2")? {
        scenario.macro_tier.intensity = v * 1e-6;
    }
    if let Some(v) = map.take::<f64>("mbs.power_dbm")? {
        scenario.macro_tier.power = dbm_to_watts(v);
    }

    let lobe_prob_mode = match map.take_raw("lobe_prob_mode").as_deref() {
        None | Some("pi_n") => LobeProbMode::PiN,
        Some("one_over_n") => LobeProbMode::OneOverN,
        Some(other) => {
            bail!("key 'lobe_prob_mode': expected pi_n or one_over_n, got '{other}'")
        }
    };
    let nb: u32 = map.take("nb")?.unwrap_or(scenario.pb_array.size());
    let nm: u32 = map.take("nm")?.unwrap_or(scenario.macro_array.size());
    scenario.pb_array = lobe_prob_mode.array(nb).context("key 'nb'")?;
    scenario.macro_array = lobe_prob_mode.array(nm).context("key 'nm'")?;
    scenario.macro_tier.array_size = nm;

    let alpha_los = map.take("alpha_los")?.unwrap_or(scenario.channel.alpha_los());
    let alpha_nlos = map.take("alpha_nlos")?.unwrap_or(scenario.channel.alpha_nlos());
    let m_los = map.take("m_los")?.unwrap_or(scenario.channel.m_los());
    let m_nlos = map.take("m_nlos")?.unwrap_or(scenario.channel.m_nlos());
    let r_min = map.take("r_min_m")?.unwrap_or(scenario.channel.r_min());
    let r_max = map.take("r_max_m")?.unwrap_or(scenario.channel.r_max());
    scenario.channel = BlockageChannel::new(alpha_los, alpha_nlos, m_los, m_nlos, r_min, r_max)
        .context("channel keys (alpha_*, m_*, r_*_m)")?;

    let p_max = map
        .take::<f64>("p_max_mw")?
        .map_or(scenario.harvester.p_max(), |v| v * 1e-3);
    let p_th = map
        .take::<f64>("p_th_mw")?
        .map_or(scenario.harvester.p_th(), |v| v * 1e-3);
    let c1 = map.take("c1")?.unwrap_or(274.0);
    let c2 = map.take("c2")?.unwrap_or(0.29);
    scenario.harvester =
        Harvester::new(p_max, p_th, c1, c2).context("harvester keys (p_*_mw, c1, c2)")?;

    if let Some(order) = map.take::<u32>("ge_L")? {
        scenario.ge = GEApproximation::new(order).context("key 'ge_L'")?;
    }
    if let Some(v) = map.take::<f64>("gamma_th_mw")? {
        scenario.energy_threshold = v * 1e-3;
    }
    if let Some(v) = map.take::<usize>("typical_tier")? {
        scenario.typical_tier = v;
    }
    match map.take_raw("strategy").as_deref() {
        None => {}
        Some("ra") => scenario.strategy = Strategy::Random,
        Some("na") => scenario.strategy = Strategy::Nearest,
        Some(other) => bail!("key 'strategy': expected ra or na, got '{other}'"),
    }

    if let Some(key) = map.0.keys().next() {
        bail!("unknown key '{key}'");
    }

    scenario.validate().context("invalid configuration")?;
    Ok(ResolvedConfig {
        scenario,
        lobe_prob_mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_pairs(pairs: &[&str]) -> Result<ResolvedConfig> {
        let overrides: Vec<String> = pairs.iter().map(|s| s.to_string()).collect();
        load_config(None, &overrides)
    }

    #[test]
    fn empty_input_is_the_reference_scenario() {
        let resolved = from_pairs(&[]).unwrap();
        let scn = &resolved.scenario;
        assert_eq!(scn.tiers.len(), 2);
        assert_eq!(scn.tiers[0].parent_intensity, 1e-3);
        assert_eq!(scn.macro_tier.power, 10.0);
        assert_eq!(scn.pb_array.size(), 16);
        assert_eq!(scn.energy_threshold, 1e-3);
        assert_eq!(resolved.lobe_prob_mode, LobeProbMode::PiN);
    }

    #[test]
    fn units_convert_at_the_boundary() {
        let resolved = from_pairs(&[
            "tier1.lambda_per_km2=1000",
            "tier2.pb_power_dbm=23",
            "mbs.power_dbm=46",
            "gamma_th_mw=2.5",
            "p_max_mw=4.927",
        ])
        .unwrap();
        let scn = &resolved.scenario;
        assert!((scn.tiers[0].parent_intensity - 1e-3).abs() < 1e-18);
        assert!((scn.tiers[1].pb_power - 0.1995262).abs() < 1e-6);
        assert!((scn.macro_tier.power - 39.8107).abs() < 1e-3);
        assert_eq!(scn.energy_threshold, 2.5e-3);
        assert_eq!(scn.harvester.p_max(), 4.927e-3);
    }

    #[test]
    fn tier_count_grows_and_shrinks() {
        let resolved = from_pairs(&["k=3", "tier3.sigma_b_m=25"]).unwrap();
        assert_eq!(resolved.scenario.tiers.len(), 3);
        assert_eq!(resolved.scenario.tiers[2].pb_scatter, 25.0);
        let one = from_pairs(&["k=1"]).unwrap();
        assert_eq!(one.scenario.tiers.len(), 1);
    }

    #[test]
    fn errors_name_the_offending_key() {
        let unknown = from_pairs(&["bandwidth=7"]).unwrap_err().to_string();
        assert!(unknown.contains("bandwidth"), "{unknown}");

        let unitless = from_pairs(&["tier1.pb_power=20"]).unwrap_err().to_string();
        assert!(
            unitless.contains("tier1.pb_power_dbm"),
            "should point at the unit-carrying key: {unitless}"
        );

        let mismatch = from_pairs(&["k=2", "tier3.mean_pb=4"]).unwrap_err().to_string();
        assert!(mismatch.contains("tier3.mean_pb") && mismatch.contains("k=2"), "{mismatch}");

        let bad_number = from_pairs(&["nb=many"]).unwrap_err().to_string();
        assert!(bad_number.contains("'nb'"), "{bad_number}");
    }

    #[test]
    fn lobe_mode_changes_the_hit_probability() {
        let pi_n = from_pairs(&[]).unwrap();
        let sector = from_pairs(&["lobe_prob_mode=one_over_n"]).unwrap();
        assert!(
            (pi_n.scenario.pb_array.lobe_hit_probability()
                - 1.0 / (std::f64::consts::PI * 16.0))
                .abs()
                < 1e-15
        );
        assert!((sector.scenario.pb_array.lobe_hit_probability() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn later_entries_override_earlier_ones() {
        let resolved = from_pairs(&["nb=8", "nb=32"]).unwrap();
        assert_eq!(resolved.scenario.pb_array.size(), 32);
    }

    #[test]
    fn strategy_and_typical_tier_apply() {
        let resolved = from_pairs(&["strategy=na", "typical_tier=2"]).unwrap();
        assert_eq!(resolved.scenario.strategy, Strategy::Nearest);
        assert_eq!(resolved.scenario.typical_tier, 2);
        assert!(from_pairs(&["typical_tier=5"]).is_err());
    }
}

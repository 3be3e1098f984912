//! Percentile bootstrap intervals.
//!
//! The resampling unit is the publication: group papers are drawn with
//! replacement and carry all of their strata with them. World papers
//! outside the group stay fixed unless `resample_world` is set; with an
//! inclusive world the resampled group is added back onto that fixed
//! complement, so the world always contains the group being evaluated.
//!
//! Replicate `i` draws from its own ChaCha8 stream seeded with
//! `seed ^ i`, so results do not depend on evaluation order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{estimate, prepare, AnalysisConfig};
use crate::cohort::PublicationRecord;
use crate::error::{Error, Result};
use crate::indicator::{
    emnpc, mhq, IndicatorEstimate, Method, Side, StratifiedTable, StratumCounts, StratumKey,
    WorldMode,
};
use crate::ingest::MentionSource;

/// Name of the generator recorded in reports.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha 0.3), replicate seed = seed XOR replicate index";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub resample_world: bool,
    pub ci_level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 1000,
            seed: 0,
            resample_world: false,
            ci_level: 0.95,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(Error::InvalidConfig(format!(
                "at least 100 replicates are required, got {}",
                self.replicates
            )));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ci_level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult {
    pub estimate: IndicatorEstimate,
    /// Indicator value of every computable replicate, in replicate order.
    pub replicates: Vec<f64>,
    pub failed: usize,
}

/// A paper reduced to what resampling needs.
struct Unit {
    strata: Vec<usize>,
    mentioned: bool,
}

fn units<'a>(
    records: impl Iterator<Item = &'a PublicationRecord>,
    index: &BTreeMap<&StratumKey, usize>,
    source: MentionSource,
) -> Vec<Unit> {
    records
        .map(|r| Unit {
            strata: r.strata().filter_map(|k| index.get(&k).copied()).collect(),
            mentioned: r.is_mentioned(source),
        })
        .collect()
}

#[derive(Clone)]
struct Cells {
    mentioned: Vec<u64>,
    total: Vec<u64>,
}

impl Cells {
    fn zeros(n: usize) -> Self {
        Self {
            mentioned: vec![0; n],
            total: vec![0; n],
        }
    }

    fn add(&mut self, unit: &Unit) {
        for &f in &unit.strata {
            self.mentioned[f] += unit.mentioned as u64;
            self.total[f] += 1;
        }
    }

    fn tally(units: &[Unit], n: usize) -> Self {
        let mut cells = Self::zeros(n);
        units.iter().for_each(|u| cells.add(u));
        cells
    }

    fn resample(units: &[Unit], n: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut cells = Self::zeros(n);
        for _ in 0..units.len() {
            cells.add(&units[rng.gen_range(0..units.len())]);
        }
        cells
    }
}

/// Percentile bootstrap interval for one indicator. The point value is the
/// closed-form estimate on the original data.
pub fn bootstrap_ci<F>(
    records: &[PublicationRecord],
    in_group: F,
    source: MentionSource,
    method: Method,
    analysis: &AnalysisConfig,
    config: &BootstrapConfig,
) -> Result<BootstrapResult>
where
    F: Fn(&PublicationRecord) -> bool,
{
    config.validate()?;
    let prepared = prepare(records, &in_group, source, analysis)?;
    let value = estimate(&prepared, method, analysis.z)?.value;

    let keys: Vec<&StratumKey> = prepared.filtered.keys().collect();
    let index: BTreeMap<&StratumKey, usize> =
        keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let group = units(records.iter().filter(|r| in_group(r)), &index, source);
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let complement = units(records.iter().filter(|r| !in_group(r)), &index, source);
    let fixed_complement = Cells::tally(&complement, keys.len());

    let mut values = Vec::with_capacity(config.replicates);
    let mut failed = 0;
    for i in 0..config.replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ i as u64);
        let g = Cells::resample(&group, keys.len(), &mut rng);
        let c = if config.resample_world && !complement.is_empty() {
            Cells::resample(&complement, keys.len(), &mut rng)
        } else {
            fixed_complement.clone()
        };
        match replicate_value(&keys, &g, &c, method, analysis) {
            Ok(v) if v.is_finite() => values.push(v),
            _ => failed += 1,
        }
    }
    if failed * 2 > config.replicates {
        return Err(Error::DegenerateReplicates {
            failed,
            total: config.replicates,
        });
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - config.ci_level;
    let lower = quantile(&sorted, alpha / 2.0);
    let upper = quantile(&sorted, 1.0 - alpha / 2.0);
    Ok(BootstrapResult {
        estimate: IndicatorEstimate::bootstrap(method, value, lower, upper)?,
        replicates: values,
        failed,
    })
}

fn replicate_value(
    keys: &[&StratumKey],
    group: &Cells,
    complement: &Cells,
    method: Method,
    analysis: &AnalysisConfig,
) -> Result<f64> {
    let inclusive = analysis.world == WorldMode::Inclusive;
    let mut strata = Vec::with_capacity(keys.len());
    for (f, key) in keys.iter().enumerate() {
        let (s_g, n_g) = (group.mentioned[f], group.total[f]);
        if n_g == 0 {
            continue;
        }
        let (mut s_w, mut n_w) = (complement.mentioned[f], complement.total[f]);
        if inclusive {
            s_w += s_g;
            n_w += n_g;
        }
        strata.push(((*key).clone(), StratumCounts::new(s_g, n_g, s_w, n_w)?));
    }
    let raw = StratifiedTable::from_strata(analysis.world, strata)?;
    let (table, _) = analysis.zero_policy.apply(&raw)?;
    match method {
        Method::Emnpc => Ok(emnpc(&table, analysis.z)?.value),
        Method::Mhq => Ok(mhq(&table, analysis.z)?.value),
        Method::Mnpc => {
            // per-paper mean with raw group mentions against the (possibly
            // corrected) world proportions
            let mut sum = 0.0;
            let mut papers = 0.0;
            for (key, c) in table.iter() {
                let raw_counts = raw.get(key).expect("policy only removes strata");
                let p_w = c.proportion(Side::World).unwrap_or(0.0);
                if p_w == 0.0 {
                    return Err(Error::ZeroWorldProportion(Some(key.clone())));
                }
                sum += raw_counts.s_g() / p_w;
                papers += raw_counts.n_g();
            }
            if papers == 0.0 {
                return Err(Error::EmptyGroup);
            }
            Ok(sum / papers)
        }
        Method::Proportion => Err(Error::InvalidConfig("unsupported indicator".into())),
    }
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

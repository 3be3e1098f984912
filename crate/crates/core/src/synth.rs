//! Synthetic zero-inflated datasets with planted quality tiers.
//!
//! Every synthetic paper belongs to one stratum and one tier. Its mention
//! indicator for each source is a Bernoulli draw with the tier's
//! probability; mention counts are therefore 0 or 1. Tier membership is
//! encoded the way real data encode it, through recommendation scores:
//! none for Q0, `[1]` for Q1 and `[2]` for Q2.
//!
//! Papers of a stratum beyond the three tier sizes are unrecommended
//! background papers drawn with the Q0 probability, so they end up in Q0.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::{PublicationRecord, QualityGroup};
use crate::error::{Error, Result};
use crate::ingest::MentionSource;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierSizes {
    pub q0: u64,
    pub q1: u64,
    pub q2: u64,
}

impl TierSizes {
    pub fn get(&self, tier: QualityGroup) -> u64 {
        match tier {
            QualityGroup::Q0 => self.q0,
            QualityGroup::Q1 => self.q1,
            QualityGroup::Q2 => self.q2,
        }
    }

    pub fn sum(&self) -> u64 {
        self.q0 + self.q1 + self.q2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierProbabilities {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
}

impl TierProbabilities {
    pub fn get(&self, tier: QualityGroup) -> f64 {
        match tier {
            QualityGroup::Q0 => self.q0,
            QualityGroup::Q1 => self.q1,
            QualityGroup::Q2 => self.q2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthStratum {
    pub category: String,
    pub year: i32,
    pub world_size: u64,
    pub tiers: TierSizes,
    /// Mention probability per tier for each source.
    pub probabilities: BTreeMap<MentionSource, TierProbabilities>,
}

impl SynthStratum {
    fn background(&self) -> u64 {
        self.world_size - self.tiers.sum()
    }

    /// Papers classified into `tier`, background included in Q0.
    fn tier_size(&self, tier: QualityGroup) -> u64 {
        match tier {
            QualityGroup::Q0 => self.tiers.q0 + self.background(),
            t => self.tiers.get(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub strata: Vec<SynthStratum>,
    /// Probability that a paper is also assigned to one other category of
    /// the same year. Zero gives single-category papers.
    #[serde(default)]
    pub extra_category_probability: f64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.strata.is_empty() {
            return invalid("no strata configured".into());
        }
        if !(0.0..=1.0).contains(&self.extra_category_probability) {
            return invalid(format!(
                "extra_category_probability {} is not a probability",
                self.extra_category_probability
            ));
        }
        let mut seen = BTreeSet::new();
        for s in &self.strata {
            if s.category.is_empty() || s.category.contains('|') {
                return invalid(format!("invalid category label '{}'", s.category));
            }
            if !seen.insert((s.category.as_str(), s.year)) {
                return invalid(format!("stratum {}/{} listed twice", s.category, s.year));
            }
            if s.tiers.sum() > s.world_size {
                return invalid(format!(
                    "stratum {}/{}: tier sizes sum to {} but the world has {}",
                    s.category,
                    s.year,
                    s.tiers.sum(),
                    s.world_size
                ));
            }
            for (source, p) in &s.probabilities {
                for tier in QualityGroup::ALL {
                    let pi = p.get(tier);
                    if !(0.0..=1.0).contains(&pi) {
                        return invalid(format!(
                            "stratum {}/{}: {source} probability {pi} for {tier} is not in [0, 1]",
                            s.category, s.year
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Sources configured in any stratum.
    pub fn sources(&self) -> Vec<MentionSource> {
        let set: BTreeSet<MentionSource> = self
            .strata
            .iter()
            .flat_map(|s| s.probabilities.keys().copied())
            .collect();
        set.into_iter().collect()
    }
}

/// Generates the dataset; identical configs give identical records.
pub fn generate(config: &SynthConfig) -> Result<Vec<PublicationRecord>> {
    config.validate()?;
    let sources = config.sources();
    let mut by_year: BTreeMap<i32, Vec<&str>> = BTreeMap::new();
    for s in &config.strata {
        by_year.entry(s.year).or_default().push(&s.category);
    }
    let mut out = Vec::with_capacity(config.strata.iter().map(|s| s.world_size as usize).sum());
    for (i, stratum) in config.strata.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ i as u64);
        let siblings: Vec<&str> = by_year[&stratum.year]
            .iter()
            .copied()
            .filter(|c| *c != stratum.category)
            .collect();
        let tiers = [
            (QualityGroup::Q0, stratum.tiers.q0, None),
            (QualityGroup::Q1, stratum.tiers.q1, Some(1u8)),
            (QualityGroup::Q2, stratum.tiers.q2, Some(2u8)),
            (QualityGroup::Q0, stratum.background(), None),
        ];
        let mut n = 0u64;
        for (tier, size, score) in tiers {
            for _ in 0..size {
                let mut categories = vec![stratum.category.clone()];
                if !siblings.is_empty() && rng.gen_bool(config.extra_category_probability) {
                    categories.push(siblings[rng.gen_range(0..siblings.len())].to_string());
                }
                let mut record = PublicationRecord::new(
                    format!("{}-{}-{:07}", stratum.category, stratum.year, n),
                    stratum.year,
                    categories,
                );
                for source in &sources {
                    let pi = stratum
                        .probabilities
                        .get(source)
                        .map_or(0.0, |p| p.get(tier));
                    record.mentions.insert(*source, rng.gen_bool(pi) as u64);
                }
                record.recommendation_scores.extend(score);
                out.push(record);
                n += 1;
            }
        }
    }
    Ok(out)
}

/// Population MHq of a tier against the inclusive world: the pooled odds
/// ratio evaluated on expected cell counts `n * pi`.
pub fn expected_mhq(
    config: &SynthConfig,
    tier: QualityGroup,
    source: MentionSource,
) -> Result<f64> {
    config.validate()?;
    let mut r = 0.0;
    let mut s = 0.0;
    for stratum in &config.strata {
        let p = stratum.probabilities.get(&source).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "stratum {}/{} has no probabilities for {source}",
                stratum.category, stratum.year
            ))
        })?;
        let n_g = stratum.tier_size(tier) as f64;
        if n_g == 0.0 {
            continue;
        }
        let s_g = n_g * p.get(tier);
        let n_w = stratum.world_size as f64;
        let s_w = QualityGroup::ALL
            .iter()
            .map(|&t| stratum.tier_size(t) as f64 * p.get(t))
            .sum::<f64>();
        let total = n_w + n_g;
        r += s_g * (n_w - s_w) / total;
        s += (n_g - s_g) * s_w / total;
    }
    if s == 0.0 {
        return Err(Error::InvalidConfig(format!(
            "expected MHq of {tier} for {source} is undefined (S = 0)"
        )));
    }
    Ok(r / s)
}

/// Calibration targets: group sizes per year and quality group, and the
/// percentage of papers never mentioned, per year, group and source.
pub mod calibration {
    use super::*;

    pub const YEARS: [i32; 4] = [2010, 2011, 2012, 2013];

    /// Papers per year in Q0, Q1, Q2 (citation data).
    pub const GROUP_SIZES: [(i32, [u64; 3]); 4] = [
        (2010, [628_862, 6_576, 4_368]),
        (2011, [681_749, 6_324, 4_418]),
        (2012, [733_813, 5_826, 5_042]),
        (2013, [785_961, 4_176, 6_361]),
    ];

    /// Percentage of unmentioned papers for Q0, Q1, Q2.
    pub fn unmentioned_percent(source: MentionSource, year: i32) -> Option<[f64; 3]> {
        let row = |v: [[f64; 3]; 4]| YEARS.iter().position(|&y| y == year).map(|i| v[i]);
        match source {
            MentionSource::Citations => row([
                [10.36, 0.84, 0.43],
                [10.61, 1.12, 0.68],
                [10.41, 1.08, 0.46],
                [10.84, 1.39, 0.50],
            ]),
            MentionSource::TwitterAll => row([
                [95.63, 86.50, 76.21],
                [87.99, 69.13, 51.91],
                [72.47, 38.47, 23.59],
                [68.12, 31.29, 21.10],
            ]),
            MentionSource::TwitterResearchers => row([
                [98.88, 95.31, 89.89],
                [97.04, 89.11, 76.74],
                [92.03, 75.74, 56.11],
                [89.21, 70.35, 50.58],
            ]),
            MentionSource::TwitterScienceCommunicators => row([
                [99.43, 98.32, 96.50],
                [98.69, 95.50, 90.21],
                [96.16, 84.76, 72.10],
                [94.33, 81.87, 69.30],
            ]),
            MentionSource::TwitterPractitioners => row([
                [99.08, 97.24, 94.49],
                [98.19, 93.94, 89.10],
                [95.68, 84.00, 75.94],
                [93.62, 77.79, 69.71],
            ]),
            MentionSource::TwitterPublic => row([
                [96.44, 88.95, 80.04],
                [89.96, 72.71, 56.25],
                [77.23, 44.78, 29.42],
                [73.53, 37.53, 26.87],
            ]),
        }
    }

    /// Mention probabilities `1 - unmentioned share` for one source and year.
    pub fn probabilities(source: MentionSource, year: i32) -> Option<TierProbabilities> {
        unmentioned_percent(source, year).map(|[q0, q1, q2]| TierProbabilities {
            q0: 1.0 - q0 / 100.0,
            q1: 1.0 - q1 / 100.0,
            q2: 1.0 - q2 / 100.0,
        })
    }

    /// A dataset with `world_per_year` papers in each calibrated year,
    /// spread evenly over `categories` categories, with quality groups in
    /// the calibrated proportions and all six sources.
    pub fn calibrated_config(
        world_per_year: u64,
        categories: usize,
        seed: u64,
    ) -> Result<SynthConfig> {
        if categories == 0 {
            return Err(Error::InvalidConfig(
                "at least one category is required".into(),
            ));
        }
        let mut strata = Vec::new();
        for (year, sizes) in GROUP_SIZES {
            let total: u64 = sizes.iter().sum();
            let q1 = (world_per_year as f64 * sizes[1] as f64 / total as f64).round() as u64;
            let q2 = (world_per_year as f64 * sizes[2] as f64 / total as f64).round() as u64;
            let q0 = world_per_year - q1 - q2;
            let split = |n: u64, c: usize| {
                n / categories as u64 + ((c as u64) < n % categories as u64) as u64
            };
            for c in 0..categories {
                let tiers = TierSizes {
                    q0: split(q0, c),
                    q1: split(q1, c),
                    q2: split(q2, c),
                };
                let probabilities = MentionSource::ALL
                    .iter()
                    .map(|&s| (s, probabilities(s, year).expect("calibrated year")))
                    .collect();
                strata.push(SynthStratum {
                    category: format!("C{:02}", c + 1),
                    year,
                    world_size: tiers.sum(),
                    tiers,
                    probabilities,
                });
            }
        }
        Ok(SynthConfig {
            seed,
            strata,
            extra_category_probability: 0.0,
        })
    }
}

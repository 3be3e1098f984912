//! Quality groups and stratum tabulation.
//!
//! Papers are grouped by their average peer recommendation score and
//! tabulated into one 2x2 table per category and year. A paper assigned to
//! several categories counts fully in each of them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicator::{PaperMention, Side, StratifiedTable, StratumCounts, StratumKey, WorldMode};
use crate::ingest::MentionSource;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub categories: Vec<String>,
    #[serde(default)]
    pub mentions: BTreeMap<MentionSource, u64>,
    #[serde(default)]
    pub recommendation_scores: Vec<u8>,
}

impl PublicationRecord {
    pub fn new(id: impl Into<String>, year: i32, categories: Vec<String>) -> Self {
        Self {
            id: id.into(),
            year,
            categories,
            mentions: BTreeMap::new(),
            recommendation_scores: Vec::new(),
        }
    }

    pub fn mention_count(&self, source: MentionSource) -> u64 {
        self.mentions.get(&source).copied().unwrap_or(0)
    }

    pub fn is_mentioned(&self, source: MentionSource) -> bool {
        self.mention_count(source) > 0
    }

    pub fn is_recommended(&self) -> bool {
        !self.recommendation_scores.is_empty()
    }

    pub fn quality_group(&self) -> Result<QualityGroup> {
        classify_quality_group(average_recommendation_score(&self.recommendation_scores)?)
    }

    /// Distinct strata of the paper, in category order.
    pub fn strata(&self) -> impl Iterator<Item = StratumKey> + '_ {
        let distinct: BTreeSet<&String> = self.categories.iter().collect();
        distinct
            .into_iter()
            .map(|c| StratumKey::new(c.clone(), self.year))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QualityGroup {
    Q0,
    Q1,
    Q2,
}

impl QualityGroup {
    pub const ALL: [QualityGroup; 3] = [QualityGroup::Q0, QualityGroup::Q1, QualityGroup::Q2];

    pub fn name(&self) -> &'static str {
        match self {
            QualityGroup::Q0 => "Q0",
            QualityGroup::Q1 => "Q1",
            QualityGroup::Q2 => "Q2",
        }
    }
}

impl fmt::Display for QualityGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QualityGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "Q0" => Ok(Self::Q0),
            "Q1" => Ok(Self::Q1),
            "Q2" => Ok(Self::Q2),
            _ => Err(format!("unknown quality group '{s}'")),
        }
    }
}

/// Mean recommendation score; 0 for a paper without recommendations.
pub fn average_recommendation_score(scores: &[u8]) -> Result<f64> {
    if let Some(&bad) = scores.iter().find(|s| !(1..=3).contains(*s)) {
        return Err(Error::InvalidScore(bad as i64));
    }
    if scores.is_empty() {
        return Ok(0.0);
    }
    let sum: u32 = scores.iter().map(|&s| s as u32).sum();
    Ok(sum as f64 / scores.len() as f64)
}

/// Q0 for unrecommended papers, Q1 up to and including an average of 1.0,
/// Q2 above.
pub fn classify_quality_group(ffa: f64) -> Result<QualityGroup> {
    if ffa.is_nan() || ffa < 0.0 {
        return Err(Error::NegativeScore(ffa));
    }
    Ok(if ffa == 0.0 {
        QualityGroup::Q0
    } else if ffa <= 1.0 {
        QualityGroup::Q1
    } else {
        QualityGroup::Q2
    })
}

/// Number of papers in each quality group.
pub fn quality_group_sizes(records: &[PublicationRecord]) -> Result<BTreeMap<QualityGroup, usize>> {
    let mut sizes: BTreeMap<QualityGroup, usize> =
        QualityGroup::ALL.iter().map(|&g| (g, 0)).collect();
    for r in records {
        *sizes.entry(r.quality_group()?).or_default() += 1;
    }
    Ok(sizes)
}

pub fn recommended_ids(records: &[PublicationRecord]) -> BTreeSet<String> {
    records
        .iter()
        .filter(|r| r.is_recommended())
        .map(|r| r.id.clone())
        .collect()
}

/// Categories carried by at least one recommended paper.
pub fn restrict_to_recommended_categories(
    records: &[PublicationRecord],
    recommended_ids: &BTreeSet<String>,
) -> BTreeSet<String> {
    records
        .iter()
        .filter(|r| recommended_ids.contains(&r.id))
        .flat_map(|r| r.categories.iter().cloned())
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct StrataOptions {
    pub world: WorldMode,
    /// When set, category assignments outside this set are ignored.
    pub categories: Option<BTreeSet<String>>,
}

impl StrataOptions {
    fn admits(&self, category: &str) -> bool {
        self.categories
            .as_ref()
            .is_none_or(|set| set.contains(category))
    }
}

/// Tabulates group and world cells per stratum.
///
/// Strata where the group has no papers are kept (with `n_g = 0`);
/// [`filter_strata`] removes them.
pub fn build_strata<F>(
    records: &[PublicationRecord],
    in_group: F,
    source: MentionSource,
    options: &StrataOptions,
) -> Result<StratifiedTable>
where
    F: Fn(&PublicationRecord) -> bool,
{
    if records.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut cells: BTreeMap<StratumKey, [u64; 4]> = BTreeMap::new();
    for record in records {
        let member = in_group(record);
        let mentioned = record.is_mentioned(source) as u64;
        for key in record.strata() {
            if !options.admits(&key.category) {
                continue;
            }
            let c = cells.entry(key).or_default();
            if member {
                c[0] += mentioned;
                c[1] += 1;
            }
            if !member || options.world == WorldMode::Inclusive {
                c[2] += mentioned;
                c[3] += 1;
            }
        }
    }
    StratifiedTable::from_strata(
        options.world,
        cells
            .into_iter()
            .map(|(k, [sg, ng, sw, nw])| StratumCounts::new(sg, ng, sw, nw).map(|c| (k, c)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Per-stratum mention counts of group papers, restricted to the strata of
/// `table`.
pub fn group_paper_mentions<F>(
    records: &[PublicationRecord],
    in_group: F,
    source: MentionSource,
    table: &StratifiedTable,
) -> Vec<PaperMention>
where
    F: Fn(&PublicationRecord) -> bool,
{
    records
        .iter()
        .filter(|r| in_group(r))
        .flat_map(|r| {
            let count = r.mention_count(source);
            r.strata()
                .filter(|k| table.get(k).is_some())
                .map(move |stratum| PaperMention {
                    stratum,
                    mention_count: count,
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_stratum_papers: u64,
    pub require_mixed_outcomes: bool,
    pub min_group_stratum_papers: u64,
    pub restrict_to_recommended_categories: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_stratum_papers: 10,
            require_mixed_outcomes: true,
            min_group_stratum_papers: 1,
            restrict_to_recommended_categories: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRule {
    MinStratumPapers,
    RequireMixedOutcomes,
    MinGroupStratumPapers,
    RestrictToRecommendedCategories,
    ZeroPolicyDrop,
}

impl FilterRule {
    pub fn name(&self) -> &'static str {
        match self {
            FilterRule::MinStratumPapers => "min_stratum_papers",
            FilterRule::RequireMixedOutcomes => "require_mixed_outcomes",
            FilterRule::MinGroupStratumPapers => "min_group_stratum_papers",
            FilterRule::RestrictToRecommendedCategories => "restrict_to_recommended_categories",
            FilterRule::ZeroPolicyDrop => "zero_policy_drop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedStratum {
    pub key: StratumKey,
    pub rule: FilterRule,
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub table: StratifiedTable,
    pub removed: Vec<RemovedStratum>,
}

/// Removes strata with too few world papers, without both mentioned and
/// unmentioned world papers, or with too few group papers. Each removal is
/// reported with the first rule that triggered it.
pub fn filter_strata(table: &StratifiedTable, config: &FilterConfig) -> Result<FilterOutcome> {
    if config.min_stratum_papers < 1 {
        return Err(Error::InvalidConfig(
            "min_stratum_papers must be at least 1".into(),
        ));
    }
    let mut out = table.clone();
    let mut removed = Vec::new();
    out.retain(|key, c| {
        let rule = if c.n_w() < config.min_stratum_papers as f64 {
            Some(FilterRule::MinStratumPapers)
        } else if config.require_mixed_outcomes && (c.s_w() == 0.0 || c.s_w() == c.n_w()) {
            Some(FilterRule::RequireMixedOutcomes)
        } else if c.total(Side::Group) < config.min_group_stratum_papers as f64 {
            Some(FilterRule::MinGroupStratumPapers)
        } else {
            None
        };
        match rule {
            Some(rule) => {
                removed.push(RemovedStratum {
                    key: key.clone(),
                    rule,
                });
                false
            }
            None => true,
        }
    });
    if out.is_empty() {
        return Err(Error::AllStrataRemoved);
    }
    Ok(FilterOutcome {
        table: out,
        removed,
    })
}

//! One group against the world for one mention source: tabulate, filter,
//! apply the zero policy, then compute indicators.

use serde::{Deserialize, Serialize};

use crate::cohort::{
    build_strata, filter_strata, group_paper_mentions, recommended_ids,
    restrict_to_recommended_categories, FilterConfig, FilterRule, PublicationRecord,
    RemovedStratum, StrataOptions,
};
use crate::error::{Error, Result};
use crate::indicator::{
    emnpc, mhq, mnpc, mnpc_ci, mnpc_scores, world_proportions, IndicatorEstimate, Method,
    PaperMention, StratifiedTable, WorldMode, ZeroPolicy, Z_95,
};
use crate::ingest::MentionSource;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub filter: FilterConfig,
    pub zero_policy: ZeroPolicy,
    pub world: WorldMode,
    pub z: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            filter: FilterConfig::default(),
            zero_policy: ZeroPolicy::default(),
            world: WorldMode::default(),
            z: Z_95,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.z.is_finite() && self.z > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "z must be positive, got {}",
                self.z
            )));
        }
        if self.filter.min_stratum_papers < 1 {
            return Err(Error::InvalidConfig(
                "min_stratum_papers must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A group's strata after filtering, before and after the zero policy.
#[derive(Debug, Clone)]
pub struct PreparedGroup {
    /// Filtered table with raw counts.
    pub filtered: StratifiedTable,
    /// Table the indicators are computed on.
    pub table: StratifiedTable,
    pub removed: Vec<RemovedStratum>,
    /// Group papers' mention counts, one entry per paper and kept stratum.
    pub mentions: Vec<PaperMention>,
}

pub fn prepare<F>(
    records: &[PublicationRecord],
    in_group: F,
    source: MentionSource,
    config: &AnalysisConfig,
) -> Result<PreparedGroup>
where
    F: Fn(&PublicationRecord) -> bool,
{
    config.validate()?;
    let mut removed = Vec::new();
    let categories = if config.filter.restrict_to_recommended_categories {
        let allowed = restrict_to_recommended_categories(records, &recommended_ids(records));
        let unrestricted = build_strata(
            records,
            &in_group,
            source,
            &StrataOptions {
                world: config.world,
                categories: None,
            },
        )?;
        removed.extend(
            unrestricted
                .keys()
                .filter(|k| !allowed.contains(&k.category))
                .map(|k| RemovedStratum {
                    key: k.clone(),
                    rule: FilterRule::RestrictToRecommendedCategories,
                }),
        );
        Some(allowed)
    } else {
        None
    };
    let options = StrataOptions {
        world: config.world,
        categories,
    };
    let table = build_strata(records, &in_group, source, &options)?;
    if table.is_empty() {
        return Err(Error::AllStrataRemoved);
    }
    let outcome = filter_strata(&table, &config.filter)?;
    removed.extend(outcome.removed);
    let (prepared, dropped) = config.zero_policy.apply(&outcome.table)?;
    removed.extend(dropped.into_iter().map(|key| RemovedStratum {
        key,
        rule: FilterRule::ZeroPolicyDrop,
    }));
    let mentions = group_paper_mentions(records, &in_group, source, &prepared);
    Ok(PreparedGroup {
        filtered: outcome.table,
        table: prepared,
        removed,
        mentions,
    })
}

/// Closed-form estimate of one indicator on a prepared group.
pub fn estimate(prepared: &PreparedGroup, method: Method, z: f64) -> Result<IndicatorEstimate> {
    match method {
        Method::Emnpc => emnpc(&prepared.table, z),
        Method::Mhq => mhq(&prepared.table, z),
        Method::Mnpc => {
            let scores = mnpc_scores(&prepared.mentions, &world_proportions(&prepared.table))?;
            let value = mnpc(&scores)?.value;
            mnpc_ci(&prepared.table, value, z)
        }
        Method::Proportion => Err(Error::InvalidConfig(
            "the pooled proportion is not a normalized indicator".into(),
        )),
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    log_ratio_half_width, IndicatorEstimate, Method, Side, StratifiedTable, StratumCounts,
    StratumKey,
};
use crate::error::{Error, Result};

/// A group paper's mention count in one stratum. A paper assigned to
/// several categories appears once per stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperMention {
    pub stratum: StratumKey,
    pub mention_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperScore {
    pub mention_count: u64,
    pub stratum: StratumKey,
    pub r: f64,
}

/// World mentioned proportion of every stratum with world papers.
pub fn world_proportions(table: &StratifiedTable) -> BTreeMap<StratumKey, f64> {
    table
        .iter()
        .filter_map(|(k, c)| c.proportion(Side::World).map(|p| (k.clone(), p)))
        .collect()
}

/// Replaces each mention count by 0 (unmentioned) or the reciprocal of the
/// world proportion of its stratum (mentioned at least once).
pub fn mnpc_scores(
    papers: &[PaperMention],
    world_proportions: &BTreeMap<StratumKey, f64>,
) -> Result<Vec<PaperScore>> {
    papers
        .iter()
        .map(|p| {
            let p_w = *world_proportions
                .get(&p.stratum)
                .ok_or_else(|| Error::MissingStratum(p.stratum.clone()))?;
            if p_w <= 0.0 {
                return Err(Error::ZeroWorldProportion(Some(p.stratum.clone())));
            }
            let r = if p.mention_count == 0 { 0.0 } else { 1.0 / p_w };
            Ok(PaperScore {
                mention_count: p.mention_count,
                stratum: p.stratum.clone(),
                r,
            })
        })
        .collect()
}

/// Mean of the per-paper scores.
pub fn mnpc(scores: &[PaperScore]) -> Result<IndicatorEstimate> {
    if scores.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let sum: f64 = scores.iter().map(|s| s.r).sum();
    IndicatorEstimate::point(Method::Mnpc, sum / scores.len() as f64)
}

/// MNPC computed from the table alone: the group-size weighted mean of the
/// per-stratum proportion ratios. Equal to [`mnpc`] over [`mnpc_scores`] on
/// an uncorrected table.
pub fn mnpc_weighted(table: &StratifiedTable) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let n_g = table.total(Side::Group);
    if n_g == 0.0 {
        return Err(Error::EmptyGroup);
    }
    let mut sum = 0.0;
    for (key, c) in table.iter() {
        if c.n_g() == 0.0 {
            continue;
        }
        let p_w = world_proportion(key, c)?;
        sum += (c.n_g() / n_g) * (c.s_g() / c.n_g()) / p_w;
    }
    Ok(sum)
}

/// Bailey limits of the proportion ratio within one stratum.
pub fn mnpc_stratum_ci(counts: &StratumCounts, z: f64) -> Result<(f64, f64)> {
    let p_g = counts.proportion(Side::Group).unwrap_or(0.0);
    let p_w = counts.proportion(Side::World).unwrap_or(0.0);
    if p_g == 0.0 || p_w == 0.0 {
        return Err(Error::ZeroProportion(None));
    }
    let ratio = p_g / p_w;
    let half = log_ratio_half_width(p_g, counts.n_g(), p_w, counts.n_w(), z);
    Ok((ratio * (-half).exp(), ratio * half.exp()))
}

/// Interval around an MNPC value built from the stratum intervals, each
/// weighted by the stratum's share of group papers.
pub fn mnpc_ci(table: &StratifiedTable, value: f64, z: f64) -> Result<IndicatorEstimate> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let n_g = table.total(Side::Group);
    if n_g == 0.0 {
        return Err(Error::EmptyGroup);
    }
    let mut parts = Vec::with_capacity(table.len());
    for (key, c) in table.iter() {
        if c.n_g() == 0.0 {
            continue;
        }
        let (lo, hi) = mnpc_stratum_ci(c, z).map_err(|e| match e {
            Error::ZeroProportion(None) => Error::ZeroProportion(Some(key.clone())),
            other => other,
        })?;
        let ratio = c.s_g() / c.n_g() / world_proportion(key, c)?;
        parts.push(WeightedInterval {
            weight: c.n_g() / n_g,
            ratio,
            lower: lo,
            upper: hi,
        });
    }
    let (lower, upper) = combine_stratum_intervals(value, &parts);
    IndicatorEstimate::closed_form(Method::Mnpc, value, lower, upper)
}

struct WeightedInterval {
    weight: f64,
    ratio: f64,
    lower: f64,
    upper: f64,
}

fn combine_stratum_intervals(value: f64, parts: &[WeightedInterval]) -> (f64, f64) {
    let below: f64 = parts.iter().map(|p| p.weight * (p.ratio - p.lower)).sum();
    let above: f64 = parts.iter().map(|p| p.weight * (p.upper - p.ratio)).sum();
    // the subtracted spread can exceed the value when the point estimate was
    // computed on uncorrected counts
    ((value - below).max(0.0), value + above)
}

fn world_proportion(key: &StratumKey, c: &StratumCounts) -> Result<f64> {
    match c.proportion(Side::World) {
        Some(p) if p > 0.0 => Ok(p),
        _ => Err(Error::ZeroWorldProportion(Some(key.clone()))),
    }
}

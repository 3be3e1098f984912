//! Indicator formulas for sparse mention data.
//!
//! Every indicator here compares a group of publications with the world
//! (the reference set) across strata, where a stratum is one subject
//! category and publication year combination. Each stratum is a 2x2 table:
//!
//! |        | mentioned | not mentioned |
//! |--------|-----------|---------------|
//! | group  | `s_g`     | `n_g - s_g`   |
//! | world  | `s_w`     | `n_w - s_w`   |
//!
//! Three indicators are provided: [`emnpc`] (ratio of equalized
//! proportions), [`mnpc`] (mean of per-paper reciprocal world proportions)
//! and [`mhq`] (Mantel-Haenszel pooled odds ratio), each with a closed-form
//! confidence interval.

mod emnpc;
mod estimate;
mod mhq;
mod mnpc;
mod proportion;
mod table;

pub use emnpc::emnpc;
pub use estimate::{CiKind, IndicatorEstimate, Method};
pub use mhq::{mh_auxiliaries, mhq, MhAuxiliaries, StratumAuxiliaries};
pub use mnpc::{
    mnpc, mnpc_ci, mnpc_scores, mnpc_stratum_ci, mnpc_weighted, world_proportions, PaperMention,
    PaperScore,
};
pub use proportion::{equalized_proportion, proportion_mentioned};
pub use table::{Side, StratifiedTable, StratumCounts, StratumKey, WorldMode, ZeroPolicy};

/// Normal quantile for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// Bailey's log-scale interval for a ratio of two proportions, returned as
/// the half-width in log space. Proportions must be positive.
pub(crate) fn log_ratio_half_width(p_g: f64, n_g: f64, p_w: f64, n_w: f64, z: f64) -> f64 {
    let var = (1.0 - p_g) / (p_g * n_g) + (1.0 - p_w) / (p_w * n_w);
    z * var.max(0.0).sqrt()
}

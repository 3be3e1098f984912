use super::{Side, StratifiedTable};
use crate::error::{Error, Result};

/// Pooled mentioned proportion: total mentioned over total papers.
pub fn proportion_mentioned(table: &StratifiedTable, side: Side) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let n = table.total(side);
    if n == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(table.mentioned(side) / n)
}

/// Unweighted mean of the per-stratum mentioned proportions, as if every
/// stratum held the same number of papers.
pub fn equalized_proportion(table: &StratifiedTable, side: Side) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut sum = 0.0;
    for (key, counts) in table.iter() {
        sum += counts
            .proportion(side)
            .ok_or_else(|| Error::ZeroStratumSize(key.clone()))?;
    }
    Ok(sum / table.len() as f64)
}

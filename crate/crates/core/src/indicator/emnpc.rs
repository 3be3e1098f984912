use super::{
    equalized_proportion, log_ratio_half_width, IndicatorEstimate, Method, Side, StratifiedTable,
};
use crate::error::{Error, Result};

/// Ratio of the group's to the world's equalized mentioned proportion.
///
/// The interval is Bailey's risk-ratio interval evaluated with the
/// equalized proportions and the total paper counts of each side, which
/// makes it an approximation.
pub fn emnpc(table: &StratifiedTable, z: f64) -> Result<IndicatorEstimate> {
    let p_g = equalized_proportion(table, Side::Group)?;
    let p_w = equalized_proportion(table, Side::World)?;
    if p_w == 0.0 {
        return Err(Error::ZeroWorldProportion(None));
    }
    if p_g == 0.0 {
        return IndicatorEstimate::point(Method::Emnpc, 0.0);
    }
    let value = p_g / p_w;
    let half = log_ratio_half_width(
        p_g,
        table.total(Side::Group),
        p_w,
        table.total(Side::World),
        z,
    );
    IndicatorEstimate::closed_form(
        Method::Emnpc,
        value,
        value * (-half).exp(),
        value * half.exp(),
    )
}

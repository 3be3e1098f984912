use serde::Serialize;

use super::{IndicatorEstimate, Method, StratifiedTable, StratumKey};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumAuxiliaries {
    pub key: StratumKey,
    pub r: f64,
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

/// Per-stratum Mantel-Haenszel terms and their sums `R` and `S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MhAuxiliaries {
    pub r: f64,
    pub s: f64,
    pub strata: Vec<StratumAuxiliaries>,
}

impl MhAuxiliaries {
    /// Robins-Breslow-Greenland estimate of the variance of `ln(R/S)`.
    /// Requires `R > 0` and `S > 0`.
    pub fn ln_variance(&self) -> f64 {
        let (r, s) = (self.r, self.s);
        let mut pr = 0.0;
        let mut mixed = 0.0;
        let mut qs = 0.0;
        for a in &self.strata {
            pr += a.p * a.r;
            mixed += a.p * a.s + a.q * a.r;
            qs += a.q * a.s;
        }
        0.5 * (pr / (r * r) + mixed / (r * s) + qs / (s * s))
    }
}

pub fn mh_auxiliaries(table: &StratifiedTable) -> Result<MhAuxiliaries> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut strata = Vec::with_capacity(table.len());
    let (mut r, mut s) = (0.0, 0.0);
    for (key, c) in table.iter() {
        let total = c.n_w() + c.n_g();
        let group_unmentioned = c.n_g() - c.s_g();
        let world_unmentioned = c.n_w() - c.s_w();
        let r_f = c.s_g() * world_unmentioned / total;
        let s_f = group_unmentioned * c.s_w() / total;
        let p_f = (c.s_g() + world_unmentioned) / total;
        r += r_f;
        s += s_f;
        strata.push(StratumAuxiliaries {
            key: key.clone(),
            r: r_f,
            s: s_f,
            p: p_f,
            q: 1.0 - p_f,
        });
    }
    Ok(MhAuxiliaries { r, s, strata })
}

/// Mantel-Haenszel quotient: the pooled odds ratio `R / S` of being
/// mentioned for group papers relative to world papers, with a log-scale
/// interval.
pub fn mhq(table: &StratifiedTable, z: f64) -> Result<IndicatorEstimate> {
    let aux = mh_auxiliaries(table)?;
    if aux.s == 0.0 {
        return Err(Error::ZeroDenominatorS);
    }
    if aux.r == 0.0 {
        return IndicatorEstimate::point(Method::Mhq, 0.0);
    }
    let value = aux.r / aux.s;
    let half = z * aux.ln_variance().sqrt();
    IndicatorEstimate::closed_form(
        Method::Mhq,
        value,
        value * (-half).exp(),
        value * half.exp(),
    )
}

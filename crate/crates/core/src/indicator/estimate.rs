use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Emnpc,
    Mnpc,
    Mhq,
    Proportion,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Emnpc => "EMNPC",
            Method::Mnpc => "MNPC",
            Method::Mhq => "MHq",
            Method::Proportion => "PROPORTION",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiKind {
    ClosedForm,
    Bootstrap,
    None,
}

impl CiKind {
    pub fn name(&self) -> &'static str {
        match self {
            CiKind::ClosedForm => "closed_form",
            CiKind::Bootstrap => "bootstrap",
            CiKind::None => "none",
        }
    }
}

/// A point estimate with its interval.
///
/// For `CiKind::None` the bounds equal the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorEstimate {
    pub value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub method: Method,
    pub ci_kind: CiKind,
}

impl IndicatorEstimate {
    pub fn point(method: Method, value: f64) -> Result<Self> {
        check_nonneg("value", value)?;
        Ok(Self {
            value,
            ci_lower: value,
            ci_upper: value,
            method,
            ci_kind: CiKind::None,
        })
    }

    pub fn closed_form(method: Method, value: f64, lower: f64, upper: f64) -> Result<Self> {
        check_nonneg("value", value)?;
        check_nonneg("lower bound", lower)?;
        check_nonneg("upper bound", upper)?;
        if !(lower <= value && value <= upper) {
            return Err(Error::InvalidCounts(format!(
                "{method} interval [{lower}, {upper}] does not contain {value}"
            )));
        }
        Ok(Self {
            value,
            ci_lower: lower,
            ci_upper: upper,
            method,
            ci_kind: CiKind::ClosedForm,
        })
    }

    /// Percentile intervals are reported as computed and may, for skewed
    /// replicate distributions, exclude the point estimate.
    pub fn bootstrap(method: Method, value: f64, lower: f64, upper: f64) -> Result<Self> {
        check_nonneg("value", value)?;
        check_nonneg("lower bound", lower)?;
        check_nonneg("upper bound", upper)?;
        if lower > upper {
            return Err(Error::InvalidCounts(format!(
                "{method} bootstrap interval [{lower}, {upper}] is reversed"
            )));
        }
        Ok(Self {
            value,
            ci_lower: lower,
            ci_upper: upper,
            method,
            ci_kind: CiKind::Bootstrap,
        })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_lower <= x && x <= self.ci_upper
    }

    /// True when the two intervals share at least one point.
    pub fn overlaps(&self, other: &IndicatorEstimate) -> bool {
        self.ci_lower <= other.ci_upper && other.ci_lower <= self.ci_upper
    }

    pub fn width(&self) -> f64 {
        self.ci_upper - self.ci_lower
    }
}

fn check_nonneg(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidCounts(format!(
            "{what} must be finite and non-negative, got {x}"
        )))
    }
}

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject category and publication year combination.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StratumKey {
    pub category: String,
    pub year: i32,
}

impl StratumKey {
    pub fn new(category: impl Into<String>, year: i32) -> Self {
        Self {
            category: category.into(),
            year,
        }
    }
}

impl fmt::Display for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.category, self.year)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Group,
    World,
}

/// Whether the world row of each stratum contains the group's own papers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorldMode {
    #[default]
    Inclusive,
    Exclusive,
}

impl FromStr for WorldMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inclusive" => Ok(Self::Inclusive),
            "exclusive" => Ok(Self::Exclusive),
            other => Err(format!("unknown world mode '{other}'")),
        }
    }
}

/// Cell counts of one stratum.
///
/// Counts are stored in half units so that continuity-corrected tables stay
/// exact: a raw count `c` is held as `2c`, and the correction adds 1 to each
/// mentioned cell and 2 to each total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StratumCounts {
    s_g: u64,
    n_g: u64,
    s_w: u64,
    n_w: u64,
}

impl StratumCounts {
    pub fn new(s_g: u64, n_g: u64, s_w: u64, n_w: u64) -> Result<Self> {
        Self::from_half_units(2 * s_g, 2 * n_g, 2 * s_w, 2 * n_w)
    }

    pub fn from_half_units(s_g: u64, n_g: u64, s_w: u64, n_w: u64) -> Result<Self> {
        if s_g > n_g || s_w > n_w {
            return Err(Error::InvalidCounts(format!(
                "mentioned exceeds total (s_g={}, n_g={}, s_w={}, n_w={})",
                s_g as f64 / 2.0,
                n_g as f64 / 2.0,
                s_w as f64 / 2.0,
                n_w as f64 / 2.0
            )));
        }
        if n_g + n_w == 0 {
            return Err(Error::InvalidCounts("stratum has no papers".into()));
        }
        Ok(Self { s_g, n_g, s_w, n_w })
    }

    /// `[s_g, n_g, s_w, n_w]` in half units.
    pub fn half_units(&self) -> [u64; 4] {
        [self.s_g, self.n_g, self.s_w, self.n_w]
    }

    pub fn s_g(&self) -> f64 {
        self.s_g as f64 / 2.0
    }

    pub fn n_g(&self) -> f64 {
        self.n_g as f64 / 2.0
    }

    pub fn s_w(&self) -> f64 {
        self.s_w as f64 / 2.0
    }

    pub fn n_w(&self) -> f64 {
        self.n_w as f64 / 2.0
    }

    pub fn mentioned(&self, side: Side) -> f64 {
        match side {
            Side::Group => self.s_g(),
            Side::World => self.s_w(),
        }
    }

    pub fn total(&self, side: Side) -> f64 {
        match side {
            Side::Group => self.n_g(),
            Side::World => self.n_w(),
        }
    }

    /// Mentioned proportion on one side, `None` when that side is empty.
    pub fn proportion(&self, side: Side) -> Option<f64> {
        let (s, n) = match side {
            Side::Group => (self.s_g, self.n_g),
            Side::World => (self.s_w, self.n_w),
        };
        (n > 0).then(|| s as f64 / n as f64)
    }

    pub fn is_group_subset_of_world(&self) -> bool {
        self.s_g <= self.s_w && self.n_g <= self.n_w
    }

    /// Multiplies all four cells by `k`.
    pub fn scaled(&self, k: u64) -> Result<Self> {
        Self::from_half_units(self.s_g * k, self.n_g * k, self.s_w * k, self.n_w * k)
    }

    fn continuity_corrected(&self) -> Self {
        Self {
            s_g: self.s_g + 1,
            n_g: self.n_g + 2,
            s_w: self.s_w + 1,
            n_w: self.n_w + 2,
        }
    }
}

/// All strata of one group compared against the world.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedTable {
    strata: BTreeMap<StratumKey, StratumCounts>,
    continuity_applied: bool,
    world: WorldMode,
}

impl Default for StratifiedTable {
    fn default() -> Self {
        Self::new(WorldMode::Inclusive)
    }
}

impl StratifiedTable {
    pub fn new(world: WorldMode) -> Self {
        Self {
            strata: BTreeMap::new(),
            continuity_applied: false,
            world,
        }
    }

    pub fn from_strata(
        world: WorldMode,
        strata: impl IntoIterator<Item = (StratumKey, StratumCounts)>,
    ) -> Result<Self> {
        let mut table = Self::new(world);
        for (key, counts) in strata {
            table.insert(key, counts)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, key: StratumKey, counts: StratumCounts) -> Result<()> {
        if key.category.is_empty() {
            return Err(Error::InvalidCounts("empty category label".into()));
        }
        if self.world == WorldMode::Inclusive && !counts.is_group_subset_of_world() {
            return Err(Error::InvalidCounts(format!(
                "stratum {key}: group cells exceed world cells under an inclusive world"
            )));
        }
        if self.strata.contains_key(&key) {
            return Err(Error::DuplicateStratum(key));
        }
        self.strata.insert(key, counts);
        Ok(())
    }

    pub fn get(&self, key: &StratumKey) -> Option<&StratumCounts> {
        self.strata.get(key)
    }

    pub fn remove(&mut self, key: &StratumKey) -> Option<StratumCounts> {
        self.strata.remove(key)
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&StratumKey, &StratumCounts) -> bool) {
        self.strata.retain(|k, c| keep(k, c));
    }

    /// Strata in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&StratumKey, &StratumCounts)> {
        self.strata.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &StratumKey> {
        self.strata.keys()
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn continuity_applied(&self) -> bool {
        self.continuity_applied
    }

    pub fn world_mode(&self) -> WorldMode {
        self.world
    }

    pub fn total(&self, side: Side) -> f64 {
        self.strata.values().map(|c| c.total(side)).sum()
    }

    pub fn mentioned(&self, side: Side) -> f64 {
        self.strata.values().map(|c| c.mentioned(side)).sum()
    }

    /// Adds 0.5 to the mentioned and the unmentioned cell of both rows in
    /// every stratum.
    pub fn apply_continuity_correction(&self) -> Result<Self> {
        if self.continuity_applied {
            return Err(Error::AlreadyApplied);
        }
        Ok(Self {
            strata: self
                .strata
                .iter()
                .map(|(k, c)| (k.clone(), c.continuity_corrected()))
                .collect(),
            continuity_applied: true,
            world: self.world,
        })
    }

    /// True when some stratum has a zero mentioned proportion on either side,
    /// or when the pooled Mantel-Haenszel numerator or denominator vanishes.
    pub fn has_zero_cells(&self) -> bool {
        let mut r = 0u128;
        let mut s = 0u128;
        for c in self.strata.values() {
            if c.s_g == 0 || c.s_w == 0 {
                return true;
            }
            // R_f and S_f share the positive denominator, so their numerators
            // decide whether the sums vanish.
            r += c.s_g as u128 * (c.n_w - c.s_w) as u128;
            s += (c.n_g - c.s_g) as u128 * c.s_w as u128;
        }
        r == 0 || s == 0
    }
}

/// Treatment of strata whose zero cells make an indicator undefined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    /// Continuity-correct every stratum once any zero cell is present.
    #[default]
    Continuity,
    /// Remove strata where either side has no mentioned papers.
    DropStratum,
    /// Leave the table alone; indicators report their own errors.
    Error,
}

impl FromStr for ZeroPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "continuity" => Ok(Self::Continuity),
            "drop" | "drop_stratum" => Ok(Self::DropStratum),
            "error" => Ok(Self::Error),
            other => Err(format!("unknown zero policy '{other}'")),
        }
    }
}

impl ZeroPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Continuity => "continuity",
            Self::DropStratum => "drop_stratum",
            Self::Error => "error",
        }
    }

    /// Returns the prepared table and the keys removed by the policy.
    pub fn apply(&self, table: &StratifiedTable) -> Result<(StratifiedTable, Vec<StratumKey>)> {
        match self {
            Self::Continuity => {
                if table.continuity_applied() || !table.has_zero_cells() {
                    Ok((table.clone(), Vec::new()))
                } else {
                    Ok((table.apply_continuity_correction()?, Vec::new()))
                }
            }
            Self::DropStratum => {
                let mut out = table.clone();
                let mut dropped = Vec::new();
                out.retain(|k, c| {
                    let keep = c.s_g > 0 && c.s_w > 0;
                    if !keep {
                        dropped.push(k.clone());
                    }
                    keep
                });
                if out.is_empty() {
                    return Err(Error::AllStrataRemoved);
                }
                Ok((out, dropped))
            }
            Self::Error => Ok((table.clone(), Vec::new())),
        }
    }
}

//! End-to-end runs behind the command-line tool.
//!
//! A run loads a dataset manifest, evaluates every requested group, source
//! and indicator, and collects the results in a [`RunReport`]. Reports are
//! byte-stable: rows are ordered by group, source and indicator, floats are
//! printed in shortest round-trip form, and the configuration is echoed
//! verbatim.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{estimate, prepare, AnalysisConfig};
use crate::bootstrap::{bootstrap_ci, BootstrapConfig, RNG_ALGORITHM};
use crate::cohort::{quality_group_sizes, PublicationRecord, QualityGroup};
use crate::error::{Error, Result};
use crate::indicator::{CiKind, IndicatorEstimate, Method};
use crate::ingest::{load_dataset, write_dataset, DatasetManifest, IngestReport, MentionSource};
use crate::synth::{generate, SynthConfig};

/// Which publications form the evaluated group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Quality(QualityGroup),
    /// An explicit id list, e.g. the papers of one institution.
    Ids {
        name: String,
        ids: BTreeSet<String>,
    },
}

impl GroupSpec {
    pub fn name(&self) -> String {
        match self {
            GroupSpec::Quality(q) => q.name().to_string(),
            GroupSpec::Ids { name, .. } => name.clone(),
        }
    }

    pub fn contains(&self, record: &PublicationRecord) -> bool {
        match self {
            GroupSpec::Quality(q) => record.quality_group().is_ok_and(|g| g == *q),
            GroupSpec::Ids { ids, .. } => ids.contains(&record.id),
        }
    }

    /// Reads one id per line; blank lines and `#` comments are skipped.
    pub fn from_id_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ids = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("custom")
            .to_string();
        Ok(GroupSpec::Ids { name, ids })
    }
}

#[derive(Debug, Clone)]
pub struct ComputeRequest {
    pub manifest: PathBuf,
    pub groups: Vec<GroupSpec>,
    /// `None` evaluates every source named in the manifest.
    pub sources: Option<Vec<MentionSource>>,
    pub indicators: Vec<Method>,
    pub analysis: AnalysisConfig,
    /// Bootstrap intervals replace the closed-form ones when set.
    pub bootstrap: Option<BootstrapConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub manifest: String,
    pub groups: Vec<String>,
    pub sources: Vec<MentionSource>,
    pub indicators: Vec<Method>,
    pub analysis: AnalysisConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub group: String,
    pub source: MentionSource,
    pub indicator: Method,
    pub value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub ci_kind: CiKind,
    pub strata: usize,
    pub continuity_applied: bool,
    pub display: String,
}

impl EstimateRow {
    pub fn estimate(&self) -> IndicatorEstimate {
        IndicatorEstimate {
            value: self.value,
            ci_lower: self.ci_lower,
            ci_upper: self.ci_upper,
            method: self.indicator,
            ci_kind: self.ci_kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterLogEntry {
    pub group: String,
    pub source: MentionSource,
    pub category: String,
    pub year: i32,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub dataset_fingerprint: String,
    pub ingest: IngestReport,
    pub estimates: Vec<EstimateRow>,
    pub filter_log: Vec<FilterLogEntry>,
}

/// SHA-256 over the manifest's files, each prefixed by its byte length.
pub fn dataset_fingerprint(manifest: &DatasetManifest) -> Result<String> {
    let mut hasher = Sha256::new();
    for path in manifest.files()? {
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

pub fn run_compute(request: &ComputeRequest) -> Result<RunReport> {
    request.analysis.validate()?;
    if let Some(b) = &request.bootstrap {
        b.validate()?;
    }
    if request.groups.is_empty() || request.indicators.is_empty() {
        return Err(Error::InvalidConfig(
            "no groups or indicators requested".into(),
        ));
    }
    let manifest = DatasetManifest::load(&request.manifest)?;
    let fingerprint = dataset_fingerprint(&manifest)?;
    let dataset = load_dataset(&manifest)?;
    if dataset.records.is_empty() {
        return Err(Error::EmptyTable);
    }
    // every record must classify before any group is evaluated
    quality_group_sizes(&dataset.records)?;

    let sources = match &request.sources {
        None => dataset.sources.clone(),
        Some(wanted) => {
            for s in wanted {
                if !dataset.sources.contains(s) {
                    return Err(Error::InvalidConfig(format!(
                        "source {s} is not named in the manifest"
                    )));
                }
            }
            let set: BTreeSet<MentionSource> = wanted.iter().copied().collect();
            set.into_iter().collect()
        }
    };
    if sources.is_empty() {
        return Err(Error::InvalidConfig(
            "the manifest names no mention sources".into(),
        ));
    }
    let indicators: Vec<Method> = request
        .indicators
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut estimates = Vec::new();
    let mut filter_log = Vec::new();
    for group in &request.groups {
        let in_group = |r: &PublicationRecord| group.contains(r);
        for &source in &sources {
            let prepared = prepare(&dataset.records, in_group, source, &request.analysis)?;
            filter_log.extend(prepared.removed.iter().map(|r| FilterLogEntry {
                group: group.name(),
                source,
                category: r.key.category.clone(),
                year: r.key.year,
                rule: r.rule.name().to_string(),
            }));
            for &method in &indicators {
                let est = match &request.bootstrap {
                    None => estimate(&prepared, method, request.analysis.z)?,
                    Some(cfg) => {
                        bootstrap_ci(
                            &dataset.records,
                            in_group,
                            source,
                            method,
                            &request.analysis,
                            cfg,
                        )?
                        .estimate
                    }
                };
                estimates.push(EstimateRow {
                    group: group.name(),
                    source,
                    indicator: method,
                    value: est.value,
                    ci_lower: est.ci_lower,
                    ci_upper: est.ci_upper,
                    ci_kind: est.ci_kind,
                    strata: prepared.table.len(),
                    continuity_applied: prepared.table.continuity_applied(),
                    display: display(&est),
                });
            }
        }
    }

    Ok(RunReport {
        config: ConfigEcho {
            command: if request.bootstrap.is_some() {
                "bootstrap"
            } else {
                "compute"
            }
            .into(),
            manifest: request.manifest.display().to_string(),
            groups: request.groups.iter().map(GroupSpec::name).collect(),
            sources,
            indicators,
            analysis: request.analysis,
            bootstrap: request.bootstrap,
            rng: request.bootstrap.map(|_| RNG_ALGORITHM.to_string()),
        },
        dataset_fingerprint: fingerprint,
        ingest: dataset.report,
        estimates,
        filter_log,
    })
}

fn display(e: &IndicatorEstimate) -> String {
    match e.ci_kind {
        CiKind::None => format!("{:.4}", e.value),
        _ => format!("{:.4} [{:.4}, {:.4}]", e.value, e.ci_lower, e.ci_upper),
    }
}

impl RunReport {
    pub fn estimates_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "group",
            "source",
            "indicator",
            "value",
            "ci_lower",
            "ci_upper",
            "ci_kind",
            "strata",
            "continuity_applied",
            "display",
        ])
        .expect("in-memory write");
        for row in &self.estimates {
            w.write_record([
                row.group.clone(),
                row.source.to_string(),
                row.indicator.to_string(),
                row.value.to_string(),
                row.ci_lower.to_string(),
                row.ci_upper.to_string(),
                row.ci_kind.name().to_string(),
                row.strata.to_string(),
                row.continuity_applied.to_string(),
                row.display.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 csv")
    }

    pub fn filter_log_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["group", "source", "category", "year", "rule"])
            .expect("in-memory write");
        for e in &self.filter_log {
            w.write_record([
                e.group.clone(),
                e.source.to_string(),
                e.category.clone(),
                e.year.to_string(),
                e.rule.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 csv")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `report.csv`, `filter_log.csv` and `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            ("report.csv", self.estimates_csv()),
            ("filter_log.csv", self.filter_log_csv()),
            ("report.json", self.to_json()),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn find(&self, group: &str, source: MentionSource, method: Method) -> Option<&EstimateRow> {
        self.estimates
            .iter()
            .find(|r| r.group == group && r.source == source && r.indicator == method)
    }
}

/// Generates a synthetic dataset and writes it with a manifest into `dir`.
pub fn run_simulate(config: &SynthConfig, dir: &Path) -> Result<DatasetManifest> {
    let records = generate(config)?;
    write_dataset(&records, &config.sources(), dir)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub manifest: String,
    pub dataset_fingerprint: String,
    pub ingest: IngestReport,
    pub quality_groups: BTreeMap<QualityGroup, usize>,
    pub years: BTreeMap<i32, usize>,
    pub categories: usize,
    pub recommended_categories: usize,
}

/// Parses and joins every file and summarizes the dataset without
/// computing indicators.
pub fn run_validate(manifest_path: &Path) -> Result<ValidationReport> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let fingerprint = dataset_fingerprint(&manifest)?;
    let dataset = load_dataset(&manifest)?;
    let quality_groups = quality_group_sizes(&dataset.records)?;
    let mut years = BTreeMap::new();
    let mut categories = BTreeSet::new();
    let mut recommended = BTreeSet::new();
    for r in &dataset.records {
        *years.entry(r.year).or_insert(0) += 1;
        categories.extend(r.categories.iter().cloned());
        if r.is_recommended() {
            recommended.extend(r.categories.iter().cloned());
        }
    }
    Ok(ValidationReport {
        manifest: manifest_path.display().to_string(),
        dataset_fingerprint: fingerprint,
        ingest: dataset.report,
        quality_groups,
        years,
        categories: categories.len(),
        recommended_categories: recommended.len(),
    })
}

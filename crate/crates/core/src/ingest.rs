//! Reading publication, mention and recommendation files.
//!
//! Three file kinds are supported, each either as delimited text (comma or
//! tab, detected from the header line) or as JSON lines (`.jsonl` /
//! `.ndjson`):
//!
//! * publications: `id`, `year`, `categories` (pipe-separated in delimited
//!   files, an array or pipe-separated string in JSON lines)
//! * mentions: `id`, `count`, one file per [`MentionSource`]
//! * recommendations: `id`, `score`, one row per recommendation
//!
//! Citation counts are expected to be pre-windowed (three years after the
//! publication year, excluding it); nothing here looks at citing dates.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cohort::PublicationRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MentionSource {
    Citations,
    TwitterAll,
    TwitterResearchers,
    TwitterScienceCommunicators,
    TwitterPractitioners,
    TwitterPublic,
}

impl MentionSource {
    pub const ALL: [MentionSource; 6] = [
        MentionSource::Citations,
        MentionSource::TwitterAll,
        MentionSource::TwitterResearchers,
        MentionSource::TwitterScienceCommunicators,
        MentionSource::TwitterPractitioners,
        MentionSource::TwitterPublic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MentionSource::Citations => "citations",
            MentionSource::TwitterAll => "twitter_all",
            MentionSource::TwitterResearchers => "twitter_researchers",
            MentionSource::TwitterScienceCommunicators => "twitter_science_communicators",
            MentionSource::TwitterPractitioners => "twitter_practitioners",
            MentionSource::TwitterPublic => "twitter_public",
        }
    }
}

impl fmt::Display for MentionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MentionSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownSource(s.to_string()))
    }
}

/// Paths of one dataset and the admitted publication years.
///
/// Stored as JSON:
///
/// ```json
/// {
///   "publications": "publications.csv",
///   "mentions": { "citations": "citations.csv", "twitter_all": "twitter_all.csv" },
///   "recommendations": "recommendations.csv",
///   "year_range": [2010, 2013]
/// }
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub publications: PathBuf,
    #[serde(default)]
    pub mentions: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recommendations: Option<PathBuf>,
    pub year_range: (i32, i32),
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::Json {
                path: path.to_path_buf(),
                source: e,
            })?;
        manifest.validate()?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        manifest.publications = base.join(&manifest.publications);
        for p in manifest.mentions.values_mut() {
            *p = base.join(&*p);
        }
        if let Some(r) = manifest.recommendations.as_mut() {
            *r = base.join(&*r);
        }
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.publications.as_os_str().is_empty() {
            return Err(Error::InvalidManifest("publications path is empty".into()));
        }
        if self.year_range.0 > self.year_range.1 {
            return Err(Error::InvalidManifest(format!(
                "year_range [{}, {}] is reversed",
                self.year_range.0, self.year_range.1
            )));
        }
        for name in self.mentions.keys() {
            name.parse::<MentionSource>()?;
        }
        Ok(())
    }

    pub fn sources(&self) -> Result<BTreeMap<MentionSource, PathBuf>> {
        self.mentions
            .iter()
            .map(|(k, v)| Ok((k.parse()?, v.clone())))
            .collect()
    }

    /// All files named by the manifest, in a fixed order.
    pub fn files(&self) -> Result<Vec<PathBuf>> {
        let mut files = vec![self.publications.clone()];
        files.extend(self.sources()?.into_values());
        files.extend(self.recommendations.clone());
        Ok(files)
    }
}

struct Row {
    line: u64,
    fields: Vec<String>,
}

fn is_json_lines(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl") | Some("ndjson")
    )
}

fn malformed(path: &Path, line: u64, reason: impl Into<String>) -> Error {
    Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Reads the named columns of every data row.
fn read_rows(path: &Path, columns: &[&str]) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    if is_json_lines(path) {
        read_json_rows(path, &text, columns)
    } else {
        read_delimited_rows(path, &text, columns)
    }
}

fn read_delimited_rows(path: &Path, text: &str, columns: &[&str]) -> Result<Vec<Row>> {
    let header = text.lines().next().unwrap_or("");
    let delimiter = if header.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| malformed(path, 1, e.to_string()))?
        .clone();
    let index: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.trim_start_matches('\u{feff}') == *c)
                .ok_or_else(|| malformed(path, 1, format!("missing column '{c}'")))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let fields = index
            .iter()
            .map(|&i| record.get(i).unwrap_or("").to_string())
            .collect();
        rows.push(Row { line, fields });
    }
    Ok(rows)
}

fn read_json_rows(path: &Path, text: &str, columns: &[&str]) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(raw).map_err(|e| malformed(path, line, e.to_string()))?;
        let object = value
            .as_object()
            .ok_or_else(|| malformed(path, line, "expected a JSON object"))?;
        let fields = columns
            .iter()
            .map(|c| match object.get(*c) {
                None | Some(serde_json::Value::Null) => Ok(String::new()),
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(serde_json::Value::Number(n)) => Ok(n.to_string()),
                Some(serde_json::Value::Array(items)) => items
                    .iter()
                    .map(|v| {
                        v.as_str().map(str::to_string).ok_or_else(|| {
                            malformed(path, line, format!("'{c}' must hold strings"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(|v| v.join("|")),
                Some(other) => Err(malformed(
                    path,
                    line,
                    format!("unexpected value for '{c}': {other}"),
                )),
            })
            .collect::<Result<_>>()?;
        rows.push(Row { line, fields });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Publications {
    pub records: Vec<PublicationRecord>,
    /// Rows whose year lies outside the admitted range.
    pub dropped_out_of_range: usize,
}

pub fn parse_publications(path: &Path, year_range: (i32, i32)) -> Result<Publications> {
    let rows = read_rows(path, &["id", "year", "categories"])?;
    let mut seen = HashSet::with_capacity(rows.len());
    let mut records = Vec::with_capacity(rows.len());
    let mut dropped = 0;
    for Row { line, fields } in rows {
        let [id, year, categories] = <[String; 3]>::try_from(fields).expect("three columns");
        if id.is_empty() {
            return Err(malformed(path, line, "missing id"));
        }
        let year: i32 = year
            .parse()
            .map_err(|_| malformed(path, line, format!("invalid year '{year}'")))?;
        let categories: Vec<String> = categories
            .split('|')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::to_string)
            .collect();
        if categories.is_empty() {
            return Err(malformed(path, line, "empty category list"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId {
                id,
                path: path.to_path_buf(),
                line,
            });
        }
        if year < year_range.0 || year > year_range.1 {
            dropped += 1;
            continue;
        }
        records.push(PublicationRecord::new(id, year, categories));
    }
    Ok(Publications {
        records,
        dropped_out_of_range: dropped,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct JoinStats {
    /// Records with at least one row in the mentions file.
    pub matched: usize,
    /// Records absent from the mentions file, given a count of zero.
    pub zero_filled: usize,
    /// Mention rows whose id matches no record.
    pub unmatched_rows: usize,
    /// Extra rows for an id already seen; their counts are summed.
    pub duplicate_rows: usize,
}

/// Left-joins mention counts onto the records by id.
pub fn join_mentions(
    records: &mut [PublicationRecord],
    source: MentionSource,
    path: &Path,
) -> Result<JoinStats> {
    let rows = read_rows(path, &["id", "count"])?;
    // id -> (summed count, number of rows)
    let mut counts: HashMap<String, (u64, usize)> = HashMap::with_capacity(rows.len());
    let mut stats = JoinStats::default();
    for Row { line, fields } in rows {
        let [id, count] = <[String; 2]>::try_from(fields).expect("two columns");
        if id.is_empty() {
            return Err(malformed(path, line, "missing id"));
        }
        let count: i64 = count
            .parse()
            .map_err(|_| malformed(path, line, format!("invalid count '{count}'")))?;
        if count < 0 {
            return Err(Error::NegativeCount {
                id,
                count,
                path: path.to_path_buf(),
                line,
            });
        }
        let entry = counts.entry(id).or_default();
        if entry.1 > 0 {
            stats.duplicate_rows += 1;
        }
        entry.0 += count as u64;
        entry.1 += 1;
    }
    for record in records.iter_mut() {
        let count = match counts.remove(&record.id) {
            Some((c, _)) => {
                stats.matched += 1;
                c
            }
            None => {
                stats.zero_filled += 1;
                0
            }
        };
        record.mentions.insert(source, count);
    }
    stats.unmatched_rows = counts.values().map(|&(_, rows)| rows).sum();
    Ok(stats)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RecommendationStats {
    pub matched_rows: usize,
    pub unmatched_rows: usize,
}

/// Appends recommendation scores to the matching records, in file order.
pub fn parse_recommendations(
    records: &mut [PublicationRecord],
    path: &Path,
) -> Result<RecommendationStats> {
    let rows = read_rows(path, &["id", "score"])?;
    let index: HashMap<String, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.clone(), i))
        .collect();
    let mut stats = RecommendationStats::default();
    for Row { line, fields } in rows {
        let [id, score] = <[String; 2]>::try_from(fields).expect("two columns");
        let score: i64 = score
            .parse()
            .map_err(|_| malformed(path, line, format!("invalid score '{score}'")))?;
        if !(1..=3).contains(&score) {
            return Err(Error::InvalidScore(score));
        }
        match index.get(&id) {
            Some(&i) => {
                records[i].recommendation_scores.push(score as u8);
                stats.matched_rows += 1;
            }
            None => stats.unmatched_rows += 1,
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub records: usize,
    pub dropped_out_of_range: usize,
    pub mentions: BTreeMap<MentionSource, JoinStats>,
    pub recommendations: Option<RecommendationStats>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<PublicationRecord>,
    pub sources: Vec<MentionSource>,
    pub report: IngestReport,
}

/// Parses and joins every file named in the manifest.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<Dataset> {
    let publications = parse_publications(&manifest.publications, manifest.year_range)?;
    let mut records = publications.records;
    let mut report = IngestReport {
        records: records.len(),
        dropped_out_of_range: publications.dropped_out_of_range,
        ..Default::default()
    };
    let sources = manifest.sources()?;
    for (source, path) in &sources {
        let stats = join_mentions(&mut records, *source, path)?;
        report.mentions.insert(*source, stats);
    }
    if let Some(path) = &manifest.recommendations {
        report.recommendations = Some(parse_recommendations(&mut records, path)?);
    }
    Ok(Dataset {
        records,
        sources: sources.into_keys().collect(),
        report,
    })
}

pub fn write_publications<W: Write>(records: &[PublicationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "year", "categories"])
        .map_err(csv_err)?;
    for r in records {
        w.write_record([r.id.as_str(), &r.year.to_string(), &r.categories.join("|")])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

/// Writes one row per record, including zero counts.
pub fn write_mentions<W: Write>(
    records: &[PublicationRecord],
    source: MentionSource,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "count"]).map_err(csv_err)?;
    for r in records {
        w.write_record([r.id.as_str(), &r.mention_count(source).to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

pub fn write_recommendations<W: Write>(records: &[PublicationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "score"]).map_err(csv_err)?;
    for r in records {
        for s in &r.recommendation_scores {
            w.write_record([r.id.as_str(), &s.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

/// Writes a complete dataset into `dir`: `publications.csv`, one
/// `mentions_<source>.csv` per source, `recommendations.csv` and a
/// `manifest.json` with relative paths. Returns the manifest as written.
pub fn write_dataset(
    records: &[PublicationRecord],
    sources: &[MentionSource],
    dir: &Path,
) -> Result<DatasetManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let create = |name: &str| -> Result<std::io::BufWriter<fs::File>> {
        let path = dir.join(name);
        fs::File::create(&path)
            .map(std::io::BufWriter::new)
            .map_err(|e| Error::io(&path, e))
    };
    write_publications(records, create("publications.csv")?)?;
    let mut mentions = BTreeMap::new();
    for &source in sources {
        let name = format!("mentions_{source}.csv");
        write_mentions(records, source, create(&name)?)?;
        mentions.insert(source.to_string(), PathBuf::from(name));
    }
    write_recommendations(records, create("recommendations.csv")?)?;
    let years = records.iter().map(|r| r.year);
    let year_range = match (years.clone().min(), years.max()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => (0, 0),
    };
    let manifest = DatasetManifest {
        publications: PathBuf::from("publications.csv"),
        mentions,
        recommendations: Some(PathBuf::from("recommendations.csv")),
        year_range,
    };
    let path = dir.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn csv_err(e: csv::Error) -> Error {
    Error::io("<output>", std::io::Error::other(e))
}

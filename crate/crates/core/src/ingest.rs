//! Contact logs from wearable proximity sensors.
//!
//! Each line records one active contact during a 20-second window as
//! tab-separated `timestamp id_a id_b` (or just `id_a id_b`, one file per
//! day). Lines starting with `#` are comments.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContactRecord {
    pub timestamp: i64,
    pub id_a: u64,
    pub id_b: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactFormat {
    /// `timestamp id_a id_b`
    #[default]
    ThreeColumn,
    /// `id_a id_b`; every record gets timestamp 0.
    TwoColumn,
}

impl ContactFormat {
    fn columns(self) -> usize {
        match self {
            ContactFormat::ThreeColumn => 3,
            ContactFormat::TwoColumn => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsedContacts {
    pub path: PathBuf,
    pub records: Vec<ContactRecord>,
    pub warnings: Vec<ParseWarning>,
}

/// Parses contact lines. Fields may be separated by tabs or spaces.
/// A line whose field count matches the other format is a hard format
/// error; other malformed lines and self-contacts become warnings.
pub fn parse_contacts_str(text: &str, path: &Path, format: ContactFormat) -> Result<ParsedContacts> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let other = match format {
        ContactFormat::ThreeColumn => ContactFormat::TwoColumn,
        ContactFormat::TwoColumn => ContactFormat::ThreeColumn,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != format.columns() {
            if fields.len() == other.columns() {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: format!(
                        "expected {} columns for {format:?}, found {}",
                        format.columns(),
                        fields.len()
                    ),
                });
            }
            warnings.push(ParseWarning {
                line: lineno,
                message: format!("expected {} fields, found {}", format.columns(), fields.len()),
            });
            continue;
        }
        let (ts, a, b) = match format {
            ContactFormat::ThreeColumn => (fields[0].parse::<i64>().ok(), fields[1], fields[2]),
            ContactFormat::TwoColumn => (Some(0), fields[0], fields[1]),
        };
        let (Some(timestamp), Ok(id_a), Ok(id_b)) = (ts, a.parse::<u64>(), b.parse::<u64>()) else {
            warnings.push(ParseWarning {
                line: lineno,
                message: format!("unparsable record {line:?}"),
            });
            continue;
        };
        if id_a == id_b {
            warnings.push(ParseWarning {
                line: lineno,
                message: format!("self-contact of {id_a}"),
            });
            continue;
        }
        records.push(ContactRecord {
            timestamp,
            id_a,
            id_b,
        });
    }
    if records.is_empty() {
        return Err(Error::ZeroRecords(path.to_path_buf()));
    }
    Ok(ParsedContacts {
        path: path.to_path_buf(),
        records,
        warnings,
    })
}

pub fn parse_contacts(path: &Path, format: ContactFormat) -> Result<ParsedContacts> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_contacts_str(&text, path, format)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DailyGraph {
    pub day: String,
    /// Nodes are ordered by external id; labels hold those ids.
    pub graph: Graph,
    pub id_map: BTreeMap<u64, usize>,
    /// Number of records behind each edge `(u, v)`, `u < v`, internal ids.
    pub weights: BTreeMap<(usize, usize), u32>,
}

impl DailyGraph {
    /// Collapses repeated contacts into single unweighted edges.
    pub fn from_records<'a, I>(day: impl Into<String>, records: I) -> Result<DailyGraph>
    where
        I: IntoIterator<Item = &'a ContactRecord>,
    {
        let mut pairs: BTreeMap<(u64, u64), u32> = BTreeMap::new();
        let mut ids = BTreeSet::new();
        for r in records {
            let key = (r.id_a.min(r.id_b), r.id_a.max(r.id_b));
            *pairs.entry(key).or_default() += 1;
            ids.insert(r.id_a);
            ids.insert(r.id_b);
        }
        let id_map: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let weights: BTreeMap<(usize, usize), u32> = pairs
            .iter()
            .map(|(&(a, b), &w)| ((id_map[&a], id_map[&b]), w))
            .collect();
        let graph = Graph::from_edges(Some(ids.len()), weights.keys().copied())
            .with_labels(ids.into_iter().collect())?;
        Ok(DailyGraph {
            day: day.into(),
            graph,
            id_map,
            weights,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DailyGraphSet {
    pub days: Vec<DailyGraph>,
}

/// Buckets records by `timestamp.div_euclid(day_length)`, one graph per
/// non-empty day, in day order.
pub fn build_daily_graphs(records: &[ContactRecord], day_length: i64) -> Result<DailyGraphSet> {
    if day_length <= 0 {
        return Err(Error::invalid("day length must be positive"));
    }
    if records.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut buckets: BTreeMap<i64, Vec<&ContactRecord>> = BTreeMap::new();
    for r in records {
        buckets.entry(r.timestamp.div_euclid(day_length)).or_default().push(r);
    }
    let days = buckets
        .into_iter()
        .map(|(day, recs)| DailyGraph::from_records(format!("day{day}"), recs))
        .collect::<Result<_>>()?;
    Ok(DailyGraphSet { days })
}

/// One graph per file, labelled by the file stem.
pub fn build_per_file(parsed: &[ParsedContacts]) -> Result<DailyGraphSet> {
    let days = parsed
        .iter()
        .map(|p| {
            let label = p
                .path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.path.display().to_string());
            DailyGraph::from_records(label, &p.records)
        })
        .collect::<Result<_>>()?;
    Ok(DailyGraphSet { days })
}

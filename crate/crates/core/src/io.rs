//! Dataset ingestion and report persistence.
//!
//! The canonical interchange format is a pair of UTF-8 CSV tables:
//!
//! * `vertices.csv` — header `id,orientation,detection_mode,detection_date,age_at_detection,region,declared_partners`.
//!   Only `id` is mandatory; any covariate column may be absent entirely and
//!   any cell may be empty (= missing). Orientation codes `F,HM,MSM,U`;
//!   detection-mode codes `RANDOM,CT,CAPT,U`; dates are ISO-8601.
//! * `edges.csv` — header `src,dst,named_by` with `named_by` optional
//!   (codes `SRC,DST,BOTH,U`, default `U`).

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ContactGraph, GraphError};

/// Gender / sexual-orientation stratum of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Woman,
    HeterosexualMan,
    Msm,
    Unknown,
}

impl Orientation {
    pub fn code(self) -> &'static str {
        match self {
            Orientation::Woman => "F",
            Orientation::HeterosexualMan => "HM",
            Orientation::Msm => "MSM",
            Orientation::Unknown => "U",
        }
    }

    pub const ALL: [Orientation; 4] = [
        Orientation::Woman,
        Orientation::HeterosexualMan,
        Orientation::Msm,
        Orientation::Unknown,
    ];
}

/// How the individual entered the detection system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectionMode {
    RandomScreening,
    ContactTracing,
    Captation,
    Unknown,
}

impl DetectionMode {
    pub fn code(self) -> &'static str {
        match self {
            DetectionMode::RandomScreening => "RANDOM",
            DetectionMode::ContactTracing => "CT",
            DetectionMode::Captation => "CAPT",
            DetectionMode::Unknown => "U",
        }
    }

    pub const ALL: [DetectionMode; 4] = [
        DetectionMode::RandomScreening,
        DetectionMode::ContactTracing,
        DetectionMode::Captation,
        DetectionMode::Unknown,
    ];
}

/// Which endpoint named the partnership during contact tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedBy {
    Src,
    Dst,
    Both,
    Unknown,
}

impl NamedBy {
    pub fn code(self) -> &'static str {
        match self {
            NamedBy::Src => "SRC",
            NamedBy::Dst => "DST",
            NamedBy::Both => "BOTH",
            NamedBy::Unknown => "U",
        }
    }
}

/// One row of the anonymized vertex table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub orientation: Orientation,
    pub detection_mode: DetectionMode,
    pub detection_date: Option<NaiveDate>,
    pub age_at_detection: Option<u32>,
    pub region: Option<String>,
    pub declared_partners: Option<u32>,
}

impl VertexRecord {
    /// A record carrying nothing but its id; used by synthetic fixtures.
    pub fn bare(id: impl Into<String>) -> Self {
        VertexRecord {
            id: id.into(),
            orientation: Orientation::Unknown,
            detection_mode: DetectionMode::Unknown,
            detection_date: None,
            age_at_detection: None,
            region: None,
            declared_partners: None,
        }
    }
}

/// One row of the edge table, endpoints as vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: String,
    pub dst: String,
    pub named_by: NamedBy,
}

/// Errors raised while loading or persisting a dataset. Row numbers are
/// 1-based line numbers in the offending file (the header is line 1).
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row}: duplicate vertex id `{id}`")]
    DuplicateVertexId { row: u64, id: String },
    #[error("row {row}: duplicate edge {a}--{b}")]
    DuplicateEdge { row: u64, a: String, b: String },
    #[error("row {row}: self-loop on `{id}`")]
    SelfLoop { row: u64, id: String },
    #[error("row {row}: edge endpoint `{id}` has no vertex record")]
    DanglingEndpoint { row: u64, id: String },
    #[error("row {row}: malformed row: {message}")]
    MalformedRow { row: u64, message: String },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn row_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn malformed(record: &csv::StringRecord, message: impl Into<String>) -> DatasetError {
    DatasetError::MalformedRow {
        row: row_of(record),
        message: message.into(),
    }
}

struct VertexColumns {
    id: usize,
    orientation: Option<usize>,
    detection_mode: Option<usize>,
    detection_date: Option<usize>,
    age_at_detection: Option<usize>,
    region: Option<usize>,
    declared_partners: Option<usize>,
}

fn cell<'r>(record: &'r csv::StringRecord, col: Option<usize>) -> Option<&'r str> {
    col.and_then(|c| record.get(c)).map(str::trim).filter(|s| !s.is_empty())
}

/// Parses the vertex and edge tables into a validated [`ContactGraph`].
///
/// Unknown enum labels map to the `Unknown` variant with a logged warning;
/// structural violations (self-loops, duplicates, dangling endpoints) are
/// hard errors carrying the offending row number.
pub fn load_dataset<RV: Read, RE: Read>(
    vertex_table: RV,
    edge_table: RE,
) -> Result<ContactGraph, DatasetError> {
    let vertices = read_vertices(vertex_table)?;
    let mut index: HashMap<&str, u32> = HashMap::with_capacity(vertices.len());
    for (i, (v, row)) in vertices.iter().enumerate() {
        if index.insert(v.id.as_str(), i as u32).is_some() {
            return Err(DatasetError::DuplicateVertexId {
                row: *row,
                id: v.id.clone(),
            });
        }
    }

    let mut edges: Vec<(u32, u32, NamedBy)> = Vec::new();
    let mut seen: HashMap<(u32, u32), u64> = HashMap::new();
    for (e, row) in read_edges(edge_table)? {
        let s = *index.get(e.src.as_str()).ok_or(DatasetError::DanglingEndpoint {
            row,
            id: e.src.clone(),
        })?;
        let d = *index.get(e.dst.as_str()).ok_or(DatasetError::DanglingEndpoint {
            row,
            id: e.dst.clone(),
        })?;
        if s == d {
            return Err(DatasetError::SelfLoop { row, id: e.src });
        }
        let key = (s.min(d), s.max(d));
        if seen.insert(key, row).is_some() {
            return Err(DatasetError::DuplicateEdge {
                row,
                a: e.src,
                b: e.dst,
            });
        }
        edges.push((s, d, e.named_by));
    }

    let records: Vec<VertexRecord> = vertices.into_iter().map(|(v, _)| v).collect();
    ContactGraph::new(records, edges).map_err(|e| match e {
        // construction re-checks what was validated above; unreachable in practice
        GraphError::SelfLoop { .. } | GraphError::DuplicateEdge { .. } | GraphError::BadEndpoint { .. } => {
            DatasetError::MalformedRow {
                row: 0,
                message: e.to_string(),
            }
        }
    })
}

/// Convenience wrapper over [`load_dataset`] for filesystem paths.
pub fn load_dataset_paths(
    vertices: &Path,
    edges: &Path,
) -> Result<ContactGraph, DatasetError> {
    let vf = File::open(vertices).map_err(|e| DatasetError::IoFailure {
        path: vertices.display().to_string(),
        source: e,
    })?;
    let ef = File::open(edges).map_err(|e| DatasetError::IoFailure {
        path: edges.display().to_string(),
        source: e,
    })?;
    load_dataset(vf, ef)
}

fn read_vertices<R: Read>(reader: R) -> Result<Vec<(VertexRecord, u64)>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DatasetError::MalformedRow {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let cols = VertexColumns {
        id: col("id").ok_or(DatasetError::MalformedRow {
            row: 1,
            message: "vertex table must have an `id` column".into(),
        })?,
        orientation: col("orientation"),
        detection_mode: col("detection_mode"),
        detection_date: col("detection_date"),
        age_at_detection: col("age_at_detection"),
        region: col("region"),
        declared_partners: col("declared_partners"),
    };

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| DatasetError::MalformedRow {
            row: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = row_of(&record);
        let id = cell(&record, Some(cols.id))
            .ok_or_else(|| malformed(&record, "empty id"))?
            .to_string();

        let orientation = match cell(&record, cols.orientation) {
            None => Orientation::Unknown,
            Some("F") => Orientation::Woman,
            Some("HM") => Orientation::HeterosexualMan,
            Some("MSM") => Orientation::Msm,
            Some("U") => Orientation::Unknown,
            Some(other) => {
                log::warn!("row {row}: unknown orientation label `{other}`, treated as U");
                Orientation::Unknown
            }
        };
        let detection_mode = match cell(&record, cols.detection_mode) {
            None => DetectionMode::Unknown,
            Some("RANDOM") => DetectionMode::RandomScreening,
            Some("CT") => DetectionMode::ContactTracing,
            Some("CAPT") => DetectionMode::Captation,
            Some("U") => DetectionMode::Unknown,
            Some(other) => {
                log::warn!("row {row}: unknown detection_mode label `{other}`, treated as U");
                DetectionMode::Unknown
            }
        };
        let detection_date = match cell(&record, cols.detection_date) {
            None => None,
            Some(s) => Some(
                NaiveDate::parse_from_str(s, "%Y-%m-%d")
                    .map_err(|e| malformed(&record, format!("bad detection_date `{s}`: {e}")))?,
            ),
        };
        let age_at_detection = match cell(&record, cols.age_at_detection) {
            None => None,
            Some(s) => Some(
                s.parse::<u32>()
                    .map_err(|_| malformed(&record, format!("bad age_at_detection `{s}`")))?,
            ),
        };
        let region = cell(&record, cols.region).map(str::to_string);
        let declared_partners = match cell(&record, cols.declared_partners) {
            None => None,
            Some(s) => Some(
                s.parse::<u32>()
                    .map_err(|_| malformed(&record, format!("bad declared_partners `{s}`")))?,
            ),
        };

        out.push((
            VertexRecord {
                id,
                orientation,
                detection_mode,
                detection_date,
                age_at_detection,
                region,
                declared_partners,
            },
            row,
        ));
    }
    Ok(out)
}

fn read_edges<R: Read>(reader: R) -> Result<Vec<(EdgeRecord, u64)>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DatasetError::MalformedRow {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (src_col, dst_col) = match (col("src"), col("dst")) {
        (Some(s), Some(d)) => (s, d),
        _ => {
            return Err(DatasetError::MalformedRow {
                row: 1,
                message: "edge table must have `src` and `dst` columns".into(),
            })
        }
    };
    let named_col = col("named_by");

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| DatasetError::MalformedRow {
            row: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = row_of(&record);
        let src = cell(&record, Some(src_col))
            .ok_or_else(|| malformed(&record, "empty src"))?
            .to_string();
        let dst = cell(&record, Some(dst_col))
            .ok_or_else(|| malformed(&record, "empty dst"))?
            .to_string();
        let named_by = match cell(&record, named_col) {
            None => NamedBy::Unknown,
            Some("SRC") => NamedBy::Src,
            Some("DST") => NamedBy::Dst,
            Some("BOTH") => NamedBy::Both,
            Some("U") => NamedBy::Unknown,
            Some(other) => {
                log::warn!("row {row}: unknown named_by label `{other}`, treated as U");
                NamedBy::Unknown
            }
        };
        out.push((EdgeRecord { src, dst, named_by }, row));
    }
    Ok(out)
}

/// Serializes `report` as pretty JSON and writes it atomically: the bytes go
/// to a sibling temp file which is then renamed over `path`.
pub fn write_report<T: Serialize>(report: &T, path: &Path) -> Result<(), DatasetError> {
    let io_err = |source: std::io::Error| DatasetError::IoFailure {
        path: path.display().to_string(),
        source,
    };
    let mut bytes = serde_json::to_vec_pretty(report).map_err(|e| DatasetError::IoFailure {
        path: path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })?;
    bytes.push(b'\n');

    let tmp = path.with_file_name(format!(
        "{}.tmp",
        path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
    ));
    {
        let mut f = File::create(&tmp).map_err(io_err)?;
        f.write_all(&bytes).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    std::fs::rename(&tmp, path).map_err(io_err)
}

/// Writes arbitrary text (CSV sidecars, SVG figures) atomically.
pub fn write_text(text: &str, path: &Path) -> Result<(), DatasetError> {
    let io_err = |source: std::io::Error| DatasetError::IoFailure {
        path: path.display().to_string(),
        source,
    };
    let tmp = path.with_file_name(format!(
        "{}.tmp",
        path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
    ));
    {
        let mut f = File::create(&tmp).map_err(io_err)?;
        f.write_all(text.as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    std::fs::rename(&tmp, path).map_err(io_err)
}

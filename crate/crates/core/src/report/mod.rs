//! Output bundle: CSV tables, `report.json`, GraphML networks and SVG
//! charts, plus a manifest written last.
//!
//! `report.json` is the machine-readable surface and carries everything
//! needed to regenerate the other formats.

mod charts;
mod graphml;
mod tables;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attributes::{MaintainerSet, PersonAttributes, WindowAttributes};
use crate::error::{Error, Result};
use crate::graph::{EdgeCounts, ReviewNetwork};
use crate::identity::{Person, PersonId};
use crate::ingest::{Attribution, Subsystem};
use crate::metrics::HomophilyReport;

pub use charts::{box_stats, emit_svg_charts, BoxStats, ChartOptions};
pub use graphml::emit_graphml;
pub use tables::{emit_tables, format_pct, AFFILIATIONS_HEADER, CELLS_HEADER, EDGES_HEADER, NODES_HEADER};

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Run parameters and input accounting recorded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub windows: Vec<String>,
    pub subsystems: Vec<Subsystem>,
    pub threshold: f64,
    pub attribution: Attribution,
    pub records_parsed: usize,
    pub records_malformed: usize,
    pub stream_truncated: bool,
    pub commits_in_scope: usize,
    pub unresolved_names: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub reviewer_id: PersonId,
    pub author_id: PersonId,
    pub weight: u64,
    pub signed: u64,
    pub acked: u64,
    pub reviewed: u64,
}

/// A network as stored in `report.json`. `edges` include the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub window: String,
    pub subsystem: Subsystem,
    pub nodes: Vec<PersonId>,
    pub edges: Vec<EdgeRow>,
    pub total_weight: u64,
    pub self_signoffs: u64,
}

impl NetworkRecord {
    pub fn from_network(net: &ReviewNetwork) -> Self {
        NetworkRecord {
            window: net.window.clone(),
            subsystem: net.subsystem.clone(),
            nodes: net.nodes().to_vec(),
            edges: net
                .edges()
                .map(|(r, a, c)| EdgeRow {
                    reviewer_id: r,
                    author_id: a,
                    weight: c.weight(),
                    signed: c.signed,
                    acked: c.acked,
                    reviewed: c.reviewed,
                })
                .collect(),
            total_weight: net.total_weight(),
            self_signoffs: net.diagonal().iter().sum(),
        }
    }

    pub fn to_network(&self) -> ReviewNetwork {
        ReviewNetwork::from_edges(
            self.window.clone(),
            self.subsystem.clone(),
            self.nodes.iter().copied(),
            self.edges.iter().map(|e| {
                (
                    e.reviewer_id,
                    e.author_id,
                    EdgeCounts {
                        signed: e.signed,
                        acked: e.acked,
                        reviewed: e.reviewed,
                    },
                )
            }),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub window: String,
    pub maintainers: Vec<PersonId>,
    pub attributes: Vec<PersonAttributes>,
}

impl WindowRecord {
    pub fn from_attributes(attrs: &WindowAttributes) -> Self {
        WindowRecord {
            window: attrs.window.clone(),
            maintainers: attrs.maintainers.members.iter().copied().collect(),
            attributes: attrs.records.values().cloned().collect(),
        }
    }

    pub fn to_attributes(&self) -> WindowAttributes {
        WindowAttributes {
            window: self.window.clone(),
            maintainers: MaintainerSet::new(self.window.clone(), self.maintainers.iter().copied()),
            records: self
                .attributes
                .iter()
                .map(|r| (r.person_id, r.clone()))
                .collect(),
        }
    }
}

/// Everything a mining run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub run: RunInfo,
    pub persons: Vec<Person>,
    pub windows: Vec<WindowRecord>,
    pub networks: Vec<NetworkRecord>,
    pub report: HomophilyReport,
}

impl Dataset {
    pub fn networks(&self) -> Vec<ReviewNetwork> {
        self.networks.iter().map(NetworkRecord::to_network).collect()
    }

    pub fn window_attributes(&self) -> BTreeMap<String, WindowAttributes> {
        self.windows
            .iter()
            .map(|w| (w.window.clone(), w.to_attributes()))
            .collect()
    }

    pub fn person_names(&self) -> HashMap<PersonId, &str> {
        self.persons
            .iter()
            .map(|p| (p.person_id, p.canonical_name.as_str()))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("dataset serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dataset: Dataset = serde_json::from_str(&text).map_err(|e| Error::BadReport {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if dataset.schema_version != SCHEMA_VERSION {
            return Err(Error::BadReport {
                path: path.to_path_buf(),
                message: format!(
                    "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                    dataset.schema_version
                ),
            });
        }
        Ok(dataset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Graphml,
    Svg,
    All,
}

impl Format {
    fn includes(self, other: Format) -> bool {
        self == Format::All || self == other
    }
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// File-system safe form of a label.
pub(crate) fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

/// Writes the requested formats into `out`, then refreshes the manifest.
pub fn write_bundle(dataset: &Dataset, out: &Path, format: Format, charts: &ChartOptions) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = Vec::new();

    if format.includes(Format::Json) {
        let path = out.join(REPORT_FILE);
        write_file(&path, dataset.to_json().as_bytes())?;
        written.push(path);
    }
    if format.includes(Format::Csv) {
        written.extend(emit_tables(dataset, out)?);
    }
    if format.includes(Format::Graphml) {
        let attrs = dataset.window_attributes();
        let names = dataset.person_names();
        let empty = WindowAttributes::default();
        for net in dataset.networks() {
            let doc = emit_graphml(&net, attrs.get(&net.window).unwrap_or(&empty), &names);
            let path = out
                .join("graphml")
                .join(format!("{}_{}.graphml", slug(net.subsystem.name()), slug(&net.window)));
            write_file(&path, doc.as_bytes())?;
            written.push(path);
        }
    }
    if format.includes(Format::Svg) {
        for (name, svg) in emit_svg_charts(&dataset.report, charts) {
            let path = out.join("charts").join(name);
            write_file(&path, svg.as_bytes())?;
            written.push(path);
        }
    }
    write_manifest(out)?;
    Ok(written)
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

fn collect_files(root: &Path, dir: &Path, acc: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(root, &path, acc)?;
        } else if path != root.join(MANIFEST_FILE) {
            acc.push(path);
        }
    }
    Ok(())
}

/// Lists every file in `out` with its size and SHA-256.
pub fn write_manifest(out: &Path) -> Result<()> {
    let mut files = Vec::new();
    collect_files(out, out, &mut files)?;
    files.sort();
    let mut entries = Vec::with_capacity(files.len());
    for path in files {
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let digest = Sha256::digest(&bytes);
        let rel = path
            .strip_prefix(out)
            .unwrap_or(&path)
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        entries.push(ManifestEntry {
            path: rel,
            bytes: bytes.len() as u64,
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        });
    }
    let mut text = serde_json::to_string_pretty(&entries).expect("manifest serializes");
    text.push('\n');
    write_file(&out.join(MANIFEST_FILE), text.as_bytes())
}

//! CSV tables. Floats carry exactly two decimals; undefined values are
//! written as empty fields.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::GroupStats;

use super::{write_file, Dataset};

pub const NODES_HEADER: [&str; 9] = [
    "window",
    "subsystem",
    "person_id",
    "canonical_name",
    "is_maintainer",
    "affiliation",
    "signed_commits",
    "out_strength",
    "in_strength",
];

pub const EDGES_HEADER: [&str; 8] = [
    "window",
    "subsystem",
    "reviewer_id",
    "author_id",
    "weight",
    "signed",
    "acked",
    "reviewed",
];

pub const CELLS_HEADER: [&str; 18] = [
    "window",
    "subsystem",
    "present",
    "node_count",
    "maintainer_count",
    "maintainer_share_pct",
    "mean_maintainer_ratio_pct",
    "sd_maintainer_ratio_pct",
    "maintainer_ratio_n",
    "maintainer_out_strength_mean",
    "maintainer_out_strength_sd",
    "developer_out_strength_mean",
    "developer_out_strength_sd",
    "review_weight",
    "self_signoffs",
    "at_or_above_table_mean",
    "at_or_above_subsystem_mean",
    "affiliated_organizations",
];

pub const AFFILIATIONS_HEADER: [&str; 6] = [
    "window",
    "subsystem",
    "organization",
    "members",
    "mean_ratio_pct",
    "sd_ratio_pct",
];

/// Two-decimal rendering used for every percentage in the tables.
pub fn format_pct(value: f64) -> String {
    format!("{value:.2}")
}

fn opt_pct(value: Option<f64>) -> String {
    value.map(format_pct).unwrap_or_default()
}

fn opt_bool(value: Option<bool>) -> String {
    value.map(|b| b.to_string()).unwrap_or_default()
}

fn stats_fields(s: &GroupStats) -> [String; 2] {
    [opt_pct(s.mean()), opt_pct(s.sd())]
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

/// Writes `nodes.csv`, `edges.csv`, `cells.csv` and `affiliations.csv`.
pub fn emit_tables(dataset: &Dataset, out: &Path) -> Result<Vec<PathBuf>> {
    if dataset.report.cells.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let names = dataset.person_names();
    let attrs = dataset.window_attributes();

    let mut node_rows = Vec::new();
    let mut edge_rows = Vec::new();
    for record in &dataset.networks {
        let net = record.to_network();
        let view = net.strip_diagonal();
        let (out_s, in_s) = view.strengths();
        let diagonal = net.diagonal();
        let window_attrs = attrs.get(&record.window);
        for (idx, &person) in net.nodes().iter().enumerate() {
            let (maintainer, affiliation) = match window_attrs {
                Some(a) => (a.is_maintainer(person), a.affiliation(person).to_string()),
                None => (false, crate::attributes::Affiliation::Unaffiliated.to_string()),
            };
            node_rows.push(vec![
                record.window.clone(),
                record.subsystem.to_string(),
                person.to_string(),
                names.get(&person).copied().unwrap_or("").to_string(),
                maintainer.to_string(),
                affiliation,
                diagonal[idx].to_string(),
                out_s[idx].to_string(),
                in_s[idx].to_string(),
            ]);
        }
        for e in &record.edges {
            edge_rows.push(vec![
                record.window.clone(),
                record.subsystem.to_string(),
                e.reviewer_id.to_string(),
                e.author_id.to_string(),
                e.weight.to_string(),
                e.signed.to_string(),
                e.acked.to_string(),
                e.reviewed.to_string(),
            ]);
        }
    }

    let mut cell_rows = Vec::new();
    let mut affiliation_rows = Vec::new();
    for cell in &dataset.report.cells {
        let mut row = vec![cell.window.clone(), cell.subsystem.to_string()];
        match &cell.metrics {
            None => {
                row.push("false".into());
                row.resize(CELLS_HEADER.len(), String::new());
            }
            Some(m) => {
                let [mean, sd] = stats_fields(&m.maintainer_ratio);
                row.extend([
                    "true".to_string(),
                    m.node_count.to_string(),
                    m.maintainer_count.to_string(),
                    opt_pct(m.maintainer_share_pct),
                    mean,
                    sd,
                    m.maintainer_ratio.n.to_string(),
                    format_pct(m.maintainer_out_strength.mean),
                    format_pct(m.maintainer_out_strength.sd),
                    format_pct(m.developer_out_strength.mean),
                    format_pct(m.developer_out_strength.sd),
                    m.review_weight.to_string(),
                    m.self_signoffs.to_string(),
                    opt_bool(m.at_or_above_table_mean),
                    opt_bool(m.at_or_above_subsystem_mean),
                    m.affiliation_ratio.len().to_string(),
                ]);
                for (org, stats) in &m.affiliation_ratio {
                    let [mean, sd] = stats_fields(stats);
                    affiliation_rows.push(vec![
                        cell.window.clone(),
                        cell.subsystem.to_string(),
                        org.clone(),
                        stats.n.to_string(),
                        mean,
                        sd,
                    ]);
                }
            }
        }
        cell_rows.push(row);
    }

    let files = [
        ("nodes.csv", csv_bytes(&NODES_HEADER, node_rows)),
        ("edges.csv", csv_bytes(&EDGES_HEADER, edge_rows)),
        ("cells.csv", csv_bytes(&CELLS_HEADER, cell_rows)),
        ("affiliations.csv", csv_bytes(&AFFILIATIONS_HEADER, affiliation_rows)),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = out.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

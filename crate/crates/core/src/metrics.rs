//! Homophily indices and descriptive statistics over review networks.
//!
//! The review ratio of a node is the share of its reviews (out-strength,
//! diagonal excluded) that target nodes sharing an attribute with it:
//! maintainership, or the same organization. It is only defined for nodes
//! carrying the attribute, and is 0 for qualifying nodes without reviews.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::attributes::{Affiliation, MaintainerSet, WindowAttributes};
use crate::error::{Error, Result};
use crate::graph::ReviewNetwork;
use crate::identity::PersonId;
use crate::ingest::Subsystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReviewRatio {
    pub person_id: PersonId,
    /// `None` when the node lacks the qualifying attribute.
    pub value: Option<f64>,
    /// Reviews the node performed on others.
    pub basis: u64,
    /// Of those, reviews that hit the target group.
    pub hits: u64,
}

impl ReviewRatio {
    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

fn review_ratio(
    net: &ReviewNetwork,
    person: PersonId,
    qualifies: bool,
    is_target: impl Fn(PersonId) -> bool,
) -> Result<ReviewRatio> {
    if !net.contains(person) {
        return Err(Error::UnknownNode(person.0));
    }
    let mut basis = 0;
    let mut hits = 0;
    for (author, weight) in net.row(person) {
        if author == person {
            continue;
        }
        basis += weight;
        if is_target(author) {
            hits += weight;
        }
    }
    let value = qualifies.then(|| if basis == 0 { 0.0 } else { hits as f64 / basis as f64 });
    Ok(ReviewRatio {
        person_id: person,
        value,
        basis,
        hits,
    })
}

/// Share of `person`'s reviews that target maintainers. Diagonal entries
/// are ignored.
pub fn maintainer_review_ratio(
    net: &ReviewNetwork,
    maintainers: &MaintainerSet,
    person: PersonId,
) -> Result<ReviewRatio> {
    review_ratio(net, person, maintainers.contains(person), |u| maintainers.contains(u))
}

/// Share of `person`'s reviews that target nodes of the same organization.
pub fn affiliation_review_ratio(
    net: &ReviewNetwork,
    attrs: &WindowAttributes,
    person: PersonId,
) -> Result<ReviewRatio> {
    let own = attrs.affiliation(person).clone();
    let qualifies = own.is_affiliated();
    review_ratio(net, person, qualifies, |u| qualifies && attrs.affiliation(u) == &own)
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary::default();
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    Summary { n, mean, sd }
}

/// Mean and sample standard deviation of fractions, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupStats {
    pub n: usize,
    pub mean_pct: f64,
    pub sd_pct: f64,
    /// No values: mean and sd are placeholders and must not be read as 0.
    pub empty: bool,
    /// Fewer than two values: the sd carries no information.
    pub degenerate: bool,
}

impl GroupStats {
    pub fn mean(&self) -> Option<f64> {
        (!self.empty).then_some(self.mean_pct)
    }

    pub fn sd(&self) -> Option<f64> {
        (!self.empty).then_some(self.sd_pct)
    }
}

pub fn group_stats(values: &[f64]) -> GroupStats {
    let s = summarize(values);
    GroupStats {
        n: s.n,
        mean_pct: s.mean * 100.0,
        sd_pct: s.sd * 100.0,
        empty: s.n == 0,
        degenerate: s.n < 2,
    }
}

/// Metrics of one (subsystem, window) network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub node_count: usize,
    pub maintainer_count: usize,
    /// `None` for a network without nodes.
    pub maintainer_share_pct: Option<f64>,
    pub maintainer_ratio: GroupStats,
    /// Per-organization affiliation review ratios over the organization's
    /// member nodes.
    pub affiliation_ratio: BTreeMap<String, GroupStats>,
    pub maintainer_out_strength: Summary,
    pub developer_out_strength: Summary,
    /// Weight after removing the diagonal.
    pub review_weight: u64,
    /// Diagonal total: self-sign-offs.
    pub self_signoffs: u64,
    /// Mean maintainer ratio ≥ the mean over all cells of the report.
    pub at_or_above_table_mean: Option<bool>,
    /// Mean maintainer ratio ≥ the mean over the cells of its subsystem.
    pub at_or_above_subsystem_mean: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub subsystem: Subsystem,
    pub window: String,
    /// `None` marks a grid cell without a network.
    pub metrics: Option<CellMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyReport {
    pub subsystems: Vec<Subsystem>,
    pub windows: Vec<String>,
    /// Subsystem-major order.
    pub cells: Vec<Cell>,
}

impl HomophilyReport {
    pub fn cell(&self, subsystem: &Subsystem, window: &str) -> Option<&CellMetrics> {
        self.cells
            .iter()
            .find(|c| &c.subsystem == subsystem && c.window == window)
            .and_then(|c| c.metrics.as_ref())
    }

    /// Organizations appearing in any cell, sorted.
    pub fn organizations(&self) -> BTreeSet<String> {
        self.cells
            .iter()
            .filter_map(|c| c.metrics.as_ref())
            .flat_map(|m| m.affiliation_ratio.keys().cloned())
            .collect()
    }
}

/// Computes the metrics of a single network. `net` may still carry its
/// diagonal; it only feeds the self-sign-off total.
pub fn cell_metrics(net: &ReviewNetwork, attrs: &WindowAttributes) -> Result<CellMetrics> {
    let self_signoffs: u64 = net.diagonal().iter().sum();
    let view = net.strip_diagonal();
    let (out, _) = view.strengths();

    let mut maintainer_ratios = Vec::new();
    let mut maintainer_out = Vec::new();
    let mut developer_out = Vec::new();
    let mut org_ratios: BTreeMap<String, Vec<f64>> = BTreeMap::new();

    for (idx, &person) in view.nodes().iter().enumerate() {
        let m = maintainer_review_ratio(&view, &attrs.maintainers, person)?;
        if let Some(v) = m.value {
            maintainer_ratios.push(v);
            maintainer_out.push(out[idx] as f64);
        } else {
            developer_out.push(out[idx] as f64);
        }
        let a = affiliation_review_ratio(&view, attrs, person)?;
        if let (Some(v), Affiliation::Org(org)) = (a.value, attrs.affiliation(person)) {
            org_ratios.entry(org.clone()).or_default().push(v);
        }
    }

    let node_count = view.node_count();
    let maintainer_count = maintainer_ratios.len();
    Ok(CellMetrics {
        node_count,
        maintainer_count,
        maintainer_share_pct: (node_count > 0)
            .then(|| maintainer_count as f64 / node_count as f64 * 100.0),
        maintainer_ratio: group_stats(&maintainer_ratios),
        affiliation_ratio: org_ratios
            .into_iter()
            .map(|(org, values)| (org, group_stats(&values)))
            .collect(),
        maintainer_out_strength: summarize(&maintainer_out),
        developer_out_strength: summarize(&developer_out),
        review_weight: view.total_weight(),
        self_signoffs,
        at_or_above_table_mean: None,
        at_or_above_subsystem_mean: None,
    })
}

/// Assembles the (subsystem × window) grid. Windows keep the order of first
/// appearance in `networks`; subsystems are sorted. Grid positions without
/// a network are kept with `metrics: None`. Attributes missing for a window
/// count as no maintainers and no affiliations.
pub fn trend_series(
    networks: &[ReviewNetwork],
    attrs: &BTreeMap<String, WindowAttributes>,
) -> Result<HomophilyReport> {
    if networks.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut windows: Vec<String> = Vec::new();
    for net in networks {
        if !windows.contains(&net.window) {
            windows.push(net.window.clone());
        }
    }
    let subsystems: Vec<Subsystem> = networks
        .iter()
        .map(|n| n.subsystem.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let empty = WindowAttributes::default();
    let mut cells = Vec::with_capacity(subsystems.len() * windows.len());
    for subsystem in &subsystems {
        for window in &windows {
            let net = networks
                .iter()
                .find(|n| &n.subsystem == subsystem && &n.window == window);
            let metrics = match net {
                Some(net) => Some(cell_metrics(net, attrs.get(window).unwrap_or(&empty))?),
                None => None,
            };
            cells.push(Cell {
                subsystem: subsystem.clone(),
                window: window.clone(),
                metrics,
            });
        }
    }
    mark_table_means(&mut cells);
    Ok(HomophilyReport {
        subsystems,
        windows,
        cells,
    })
}

fn mark_table_means(cells: &mut [Cell]) {
    let defined = |c: &Cell| c.metrics.as_ref().and_then(|m| m.maintainer_ratio.mean());
    let table: Vec<f64> = cells.iter().filter_map(defined).collect();
    let table_mean = (!table.is_empty()).then(|| table.iter().sum::<f64>() / table.len() as f64);

    let mut by_subsystem: BTreeMap<Subsystem, Vec<f64>> = BTreeMap::new();
    for cell in cells.iter() {
        if let Some(v) = defined(cell) {
            by_subsystem.entry(cell.subsystem.clone()).or_default().push(v);
        }
    }
    let column_mean: BTreeMap<Subsystem, f64> = by_subsystem
        .into_iter()
        .map(|(s, v)| (s, v.iter().sum::<f64>() / v.len() as f64))
        .collect();

    for cell in cells.iter_mut() {
        let subsystem = cell.subsystem.clone();
        if let Some(m) = cell.metrics.as_mut() {
            if let Some(v) = m.maintainer_ratio.mean() {
                m.at_or_above_table_mean = table_mean.map(|t| v >= t);
                m.at_or_above_subsystem_mean = column_mean.get(&subsystem).map(|c| v >= *c);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeCounts;
    use crate::trailers::TrailerKind;
    use std::collections::HashMap;

    const A: PersonId = PersonId(0);
    const B: PersonId = PersonId(1);
    const C: PersonId = PersonId(2);
    const D: PersonId = PersonId(3);

    fn worked_example() -> ReviewNetwork {
        ReviewNetwork::from_edges(
            "2006",
            Subsystem::from("arch"),
            [A, B, C, D],
            [
                (A, B, EdgeCounts::of_kind(TrailerKind::Signed, 4)),
                (A, C, EdgeCounts::of_kind(TrailerKind::Acked, 1)),
                (B, B, EdgeCounts::of_kind(TrailerKind::Signed, 4)),
            ],
        )
    }

    fn attrs(maintainers: &[PersonId], orgs: &[(PersonId, &str)]) -> WindowAttributes {
        let map = orgs
            .iter()
            .fold(crate::attributes::AffiliationMap::new(), |m, (_, org)| {
                m.with(&format!("{}.com", org.to_lowercase()), org)
            });
        let mut emails: HashMap<PersonId, Vec<String>> = HashMap::new();
        for p in [A, B, C, D] {
            emails.insert(p, vec![]);
        }
        for (p, org) in orgs {
            emails.insert(*p, vec![format!("x@{}.com", org.to_lowercase())]);
        }
        WindowAttributes::build("2006", MaintainerSet::new("2006", maintainers.iter().copied()), &emails, &map)
    }

    #[test]
    fn worked_example_ratios() {
        let net = worked_example().strip_diagonal();
        let m = MaintainerSet::new("2006", [A, B]);
        let a = maintainer_review_ratio(&net, &m, A).unwrap();
        assert_eq!(a.value, Some(0.8));
        assert_eq!(a.basis, 5);
        assert_eq!(maintainer_review_ratio(&net, &m, B).unwrap().value, Some(0.0));
        assert_eq!(maintainer_review_ratio(&net, &m, C).unwrap().value, None);
        assert_eq!(maintainer_review_ratio(&net, &m, D).unwrap().value, None);
        assert!(maintainer_review_ratio(&net, &m, PersonId(7)).is_err());
    }

    #[test]
    fn affiliation_ratio_counts() {
        // v reviews 3 same-org authors and 7 others
        let v = PersonId(10);
        let mut edges = Vec::new();
        let mut orgs = vec![(v, "Redhat")];
        for i in 0..3 {
            let p = PersonId(20 + i);
            edges.push((v, p, EdgeCounts::of_kind(TrailerKind::Reviewed, 1)));
            orgs.push((p, "Redhat"));
        }
        edges.push((v, PersonId(30), EdgeCounts::of_kind(TrailerKind::Acked, 5)));
        edges.push((v, PersonId(31), EdgeCounts::of_kind(TrailerKind::Acked, 2)));
        orgs.push((PersonId(31), "Intel"));
        let net = ReviewNetwork::from_edges("w", Subsystem::Root, [], edges);
        let map = crate::attributes::AffiliationMap::new()
            .with("redhat.com", "Red Hat")
            .with("intel.com", "Intel");
        let emails: HashMap<PersonId, Vec<String>> = orgs
            .iter()
            .map(|(p, o)| (*p, vec![format!("x@{}.com", o.to_lowercase())]))
            .collect();
        let attrs = WindowAttributes::build("w", MaintainerSet::default(), &emails, &map);
        let r = affiliation_review_ratio(&net, &attrs, v).unwrap();
        assert_eq!((r.hits, r.basis), (3, 10));
        assert_eq!(r.value, Some(3.0 / 10.0));
        assert_eq!(affiliation_review_ratio(&net, &attrs, PersonId(30)).unwrap().value, None);
        assert_eq!(affiliation_review_ratio(&net, &attrs, PersonId(20)).unwrap().value, Some(0.0));
    }

    #[test]
    fn affiliation_ratio_upper_bound() {
        let net = ReviewNetwork::from_edges(
            "w",
            Subsystem::Root,
            [],
            [(A, B, EdgeCounts::of_kind(TrailerKind::Reviewed, 2))],
        );
        let at = attrs(&[], &[(A, "Intel"), (B, "Intel")]);
        assert_eq!(affiliation_review_ratio(&net, &at, A).unwrap().value, Some(1.0));
    }

    #[test]
    fn stats_examples() {
        let s = group_stats(&[0.8, 0.0]);
        assert_eq!(s.mean_pct, 40.0);
        assert!((s.sd_pct - 56.568_542_494_923_8).abs() < 1e-9);
        assert!(!s.degenerate);

        let s = group_stats(&[0.25]);
        assert_eq!((s.mean_pct, s.sd_pct, s.degenerate), (25.0, 0.0, true));

        let s = group_stats(&[0.3, 0.3, 0.3]);
        assert!(s.sd_pct.abs() < 1e-12);

        let s = group_stats(&[]);
        assert!(s.empty);
        assert_eq!((s.mean_pct, s.sd_pct), (0.0, 0.0));
        assert_eq!(s.mean(), None);
    }

    #[test]
    fn worked_example_cell() {
        let at = attrs(&[A, B], &[]);
        let report = trend_series(&[worked_example()], &BTreeMap::from([("2006".to_string(), at)])).unwrap();
        let cell = report.cell(&Subsystem::from("arch"), "2006").unwrap();
        assert_eq!(cell.node_count, 4);
        assert_eq!(cell.maintainer_share_pct, Some(50.0));
        assert_eq!(cell.maintainer_ratio.mean(), Some(40.0));
        assert_eq!(cell.review_weight, 5);
        assert_eq!(cell.self_signoffs, 4);
        assert_eq!(cell.maintainer_out_strength, summarize(&[5.0, 0.0]));
        assert_eq!(cell.at_or_above_table_mean, Some(true));
    }

    #[test]
    fn cell_without_maintainers_is_undefined() {
        let report = trend_series(&[worked_example()], &BTreeMap::new()).unwrap();
        let cell = report.cell(&Subsystem::from("arch"), "2006").unwrap();
        assert_eq!(cell.maintainer_ratio.mean(), None);
        assert_eq!(cell.maintainer_share_pct, Some(0.0));
        assert_eq!(cell.at_or_above_table_mean, None);
    }

    #[test]
    fn grid_marks_missing_cells() {
        let mut other = worked_example();
        other.window = "2007".into();
        other.subsystem = Subsystem::from("net");
        let report = trend_series(&[worked_example(), other], &BTreeMap::new()).unwrap();
        assert_eq!(report.cells.len(), 4);
        assert!(report.cells.iter().filter(|c| c.metrics.is_none()).count() == 2);
        assert_eq!(report.windows, vec!["2006", "2007"]);
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(matches!(trend_series(&[], &BTreeMap::new()), Err(Error::EmptyGrid)));
    }

    #[test]
    fn decomposition_is_consistent() {
        let net = worked_example().strip_diagonal();
        let m = MaintainerSet::new("2006", [A, B]);
        let mut total = 0u64;
        for &p in &[A, B] {
            let r = maintainer_review_ratio(&net, &m, p).unwrap();
            total += r.hits;
            assert_eq!(r.value.unwrap() * r.basis as f64, r.hits as f64);
        }
        let mm: u64 = net
            .edges()
            .filter(|(r, a, _)| m.contains(*r) && m.contains(*a))
            .map(|(_, _, c)| c.weight())
            .sum();
        assert_eq!(total, mm);
    }

    #[test]
    fn ratios_are_scale_invariant() {
        let net = worked_example().strip_diagonal();
        let m = MaintainerSet::new("2006", [A, B]);
        for k in [2, 7] {
            let scaled = net.scaled(k);
            for p in [A, B, C, D] {
                assert_eq!(
                    maintainer_review_ratio(&net, &m, p).unwrap().value,
                    maintainer_review_ratio(&scaled, &m, p).unwrap().value
                );
            }
        }
    }
}

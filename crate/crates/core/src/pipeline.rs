//! End-to-end mining run: parsed commits in, [`Dataset`] out.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rayon::prelude::*;

use crate::attributes::{extract_maintainers, AffiliationMap, MaintainerSet, MaintainersHistory, WindowAttributes};
use crate::error::{Error, Result};
use crate::graph::{build_network, ReviewNetwork};
use crate::identity::{resolve_identities, AliasBook, IdentityTable, OverrideList, PersonId, DEFAULT_THRESHOLD};
use crate::ingest::{attributed_subsystems, filter_commits, Attribution, CommitRecord, DiagnosticKind, ParsedStream, Subsystem, Window};
use crate::metrics::trend_series;
use crate::report::{Dataset, NetworkRecord, RunInfo, WindowRecord, SCHEMA_VERSION};
use crate::trailers::{extract_trailers, Trailer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubsystemSelection {
    /// Every subsystem touched by an in-scope commit.
    All,
    Only(Vec<Subsystem>),
}

impl SubsystemSelection {
    pub fn parse(arg: &str) -> Result<Self> {
        if arg.trim() == "all" {
            return Ok(SubsystemSelection::All);
        }
        let list: Vec<Subsystem> = arg
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Subsystem::from)
            .collect();
        if list.is_empty() {
            return Err(Error::Config("empty subsystem list".into()));
        }
        if let Some(bad) = list.iter().find(|s| s.name().contains('/')) {
            return Err(Error::Config(format!("subsystem {bad} contains a path separator")));
        }
        Ok(SubsystemSelection::Only(list))
    }
}

#[derive(Debug, Clone)]
pub struct MineConfig {
    pub windows: Vec<Window>,
    pub subsystems: SubsystemSelection,
    pub threshold: f64,
    pub attribution: Attribution,
    pub affiliations: AffiliationMap,
    pub overrides: OverrideList,
    pub maintainers_dir: Option<PathBuf>,
}

impl MineConfig {
    pub fn yearly(from: i32, to: i32) -> Result<Self> {
        Ok(MineConfig {
            windows: Window::years(from, to)?,
            subsystems: SubsystemSelection::All,
            threshold: DEFAULT_THRESHOLD,
            attribution: Attribution::All,
            affiliations: AffiliationMap::new(),
            overrides: OverrideList::new(),
            maintainers_dir: None,
        })
    }
}

/// Commit with its extracted trailers.
struct Annotated<'a> {
    commit: &'a CommitRecord,
    trailers: Vec<Trailer>,
}

/// Everything resolved before networks are built; exposed for tests and
/// tooling that want the intermediate products.
pub struct Mined {
    pub identities: IdentityTable,
    pub networks: Vec<ReviewNetwork>,
    pub attributes: BTreeMap<String, WindowAttributes>,
    pub unresolved: u64,
    pub commits_in_scope: usize,
}

pub fn mine_networks(parsed: &ParsedStream, config: &MineConfig) -> Result<Mined> {
    if config.windows.is_empty() {
        return Err(Error::Config("no windows to analyse".into()));
    }

    let per_window: Vec<Vec<Annotated<'_>>> = config
        .windows
        .iter()
        .map(|window| {
            filter_commits(&parsed.records, window)
                .into_par_iter()
                .map(|commit| Annotated {
                    commit,
                    trailers: extract_trailers(&commit.body),
                })
                .collect()
        })
        .collect();

    let mut book = AliasBook::new();
    for annotated in per_window.iter().flatten() {
        book.observe(&annotated.commit.author_name, &annotated.commit.author_email);
        for t in &annotated.trailers {
            book.observe(&t.raw_name, &t.raw_email);
        }
    }
    let identities = resolve_identities(book.into_aliases(), config.threshold, &config.overrides)?;

    if config.maintainers_dir.is_none() {
        log::warn!("no maintainers directory given; every maintainer ratio will be undefined");
    }
    let mut attributes = BTreeMap::new();
    for (window, annotated) in config.windows.iter().zip(&per_window) {
        let mut emails: HashMap<PersonId, Vec<String>> = HashMap::new();
        for a in annotated {
            let mut note = |name: &str, email: &str| {
                if let Some(p) = identities.resolve(name) {
                    emails.entry(p).or_default().push(email.to_string());
                }
            };
            note(&a.commit.author_name, &a.commit.author_email);
            for t in &a.trailers {
                note(&t.raw_name, &t.raw_email);
            }
        }
        let maintainers = match &config.maintainers_dir {
            Some(dir) => {
                let history = MaintainersHistory::load(dir, &window.label)?;
                extract_maintainers(&history.snapshot, &history.added_lines, &identities, &window.label)
            }
            None => MaintainerSet::new(window.label.clone(), []),
        };
        attributes.insert(
            window.label.clone(),
            WindowAttributes::build(&window.label, maintainers, &emails, &config.affiliations),
        );
    }

    let subsystems: Vec<Subsystem> = match &config.subsystems {
        SubsystemSelection::Only(list) => list.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
        SubsystemSelection::All => per_window
            .iter()
            .flatten()
            .flat_map(|a| attributed_subsystems(a.commit, config.attribution))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };

    let slices: Vec<(usize, &Subsystem)> = (0..config.windows.len())
        .flat_map(|w| subsystems.iter().map(move |s| (w, s)))
        .collect();
    let built: Vec<(ReviewNetwork, u64)> = slices
        .par_iter()
        .map(|&(w, subsystem)| {
            let commits = per_window[w]
                .iter()
                .filter(|a| attributed_subsystems(a.commit, config.attribution).contains(subsystem))
                .map(|a| (a.commit, a.trailers.as_slice()));
            let (net, stats) = build_network(commits, &identities, subsystem.clone(), &config.windows[w].label);
            (net, stats.unresolved)
        })
        .collect();

    let unresolved = built.iter().map(|(_, u)| u).sum();
    let mut networks: Vec<ReviewNetwork> = built.into_iter().map(|(n, _)| n).collect();
    // window-major order matches the configured windows; subsystems sorted
    networks.sort_by_key(|n| {
        let w = config.windows.iter().position(|w| w.label == n.window).unwrap_or(usize::MAX);
        (w, n.subsystem.clone())
    });

    for net in &networks {
        let window_attrs = &attributes[&net.window];
        if let Some(p) = net.nodes().iter().find(|p| !window_attrs.records.contains_key(p)) {
            return Err(Error::Invariant(format!(
                "node {p} of {}/{} has no attribute record",
                net.subsystem, net.window
            )));
        }
    }

    Ok(Mined {
        identities,
        networks,
        attributes,
        unresolved,
        commits_in_scope: per_window.iter().map(Vec::len).sum(),
    })
}

/// Runs the whole analysis and packages it as a [`Dataset`].
pub fn mine(parsed: &ParsedStream, config: &MineConfig) -> Result<Dataset> {
    let mined = mine_networks(parsed, config)?;
    let report = trend_series(&mined.networks, &mined.attributes)?;

    Ok(Dataset {
        schema_version: SCHEMA_VERSION,
        run: RunInfo {
            windows: config.windows.iter().map(|w| w.label.clone()).collect(),
            subsystems: report.subsystems.clone(),
            threshold: config.threshold,
            attribution: config.attribution,
            records_parsed: parsed.records.len(),
            records_malformed: parsed.malformed_count(),
            stream_truncated: parsed
                .diagnostics
                .iter()
                .any(|d| d.kind == DiagnosticKind::TruncatedStream),
            commits_in_scope: mined.commits_in_scope,
            unresolved_names: mined.unresolved,
        },
        persons: mined.identities.persons().to_vec(),
        windows: mined.attributes.values().map(WindowRecord::from_attributes).collect(),
        networks: mined.networks.iter().map(NetworkRecord::from_network).collect(),
        report,
    })
}

//! Shared fixtures: a seeded synthetic corpus whose ground truth is known
//! by construction, and a naive recount of the review networks from that
//! ground truth.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, FixedOffset, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reviewnet::attributes::AffiliationMap;
use reviewnet::graph::{EdgeCounts, ReviewNetwork};
use reviewnet::identity::PersonId;
use reviewnet::ingest::{CommitRecord, Subsystem};
use reviewnet::trailers::TrailerKind;

pub const SUBSYSTEMS: [&str; 5] = ["arch", "drivers", "fs", "kernel", "net"];
pub const FIRST_YEAR: i32 = 2006;
pub const LAST_YEAR: i32 = 2008;

pub struct RosterEntry {
    pub name: &'static str,
    pub email: String,
    /// `None` for domains missing from the affiliation map.
    pub org: Option<&'static str>,
}

const NAMES: [&str; 16] = [
    "Alice Anderson",
    "Bogdan Kowalski",
    "Chiara Ferrante",
    "Dmitri Volkov",
    "Eun-ji Park",
    "Farouk Haddad",
    "Greta Lindqvist",
    "Hiroshi Tanaka",
    "Ingrid Solberg",
    "Jorge Mendoza",
    "Kwame Mensah",
    "Lucia Romero",
    "Mateusz Zielinski",
    "Nadia Petrenko",
    "Oskar Brandt",
    "Priya Raghunathan",
];

const DOMAINS: [(&str, Option<&str>); 5] = [
    ("intel.com", Some("Intel")),
    ("redhat.com", Some("Red Hat")),
    ("suse.de", Some("SUSE")),
    ("linux.vnet.ibm.com", Some("IBM")),
    ("gmail.com", None),
];

pub fn affiliation_map() -> AffiliationMap {
    AffiliationMap::new()
        .with("intel.com", "Intel")
        .with("redhat.com", "Red Hat")
        .with("suse.de", "SUSE")
        .with("ibm.com", "IBM")
}

pub fn roster() -> Vec<RosterEntry> {
    NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let (domain, org) = DOMAINS[i % DOMAINS.len()];
            let local: String = name
                .to_lowercase()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(".");
            RosterEntry {
                name,
                email: format!("{local}@{domain}"),
                org,
            }
        })
        .collect()
}

/// One planted trailer: who, and which kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Planted {
    pub person: usize,
    pub kind: TrailerKind,
}

pub struct Corpus {
    pub records: Vec<CommitRecord>,
    /// Ground truth per record: author roster index and planted trailers.
    pub truth: Vec<(usize, Vec<Planted>)>,
    /// Roster indices listed as maintainers, per year.
    pub maintainers: BTreeMap<i32, BTreeSet<usize>>,
    pub roster: Vec<RosterEntry>,
}

const SIGNED_FORMS: [&str; 7] = [
    "Signed-off-by: ",
    "signed-off-by: ",
    "SIGNED-OFF-BY: ",
    "Signed off by: ",
    "Signed-off-by; ",
    "Signed-of-by: ",
    "Signed-by: ",
];
const ACKED_FORMS: [&str; 5] = ["Acked-by: ", "acked by ", "Acked: ", "Acked-off-by: ", "ACKED-BY: "];
const REVIEWED_FORMS: [&str; 4] = ["Reviewed-by: ", "Reviewed: ", "reviewed by ", "Reviewed-By: "];
const IGNORED_FORMS: [&str; 4] = ["Tested-by: ", "Reported-by: ", "Cc: ", "Suggested-by: "];
const PROSE: [&str; 5] = [
    "Fix a use-after-free in the teardown path.",
    "The old code assumed the lock was held by the caller.",
    "Link: https://lore.example.org/r/1234",
    "This was found by a static checker.",
    "No functional change intended.",
];

/// Case and whitespace variants that normalize back to `name`.
fn spelled(rng: &mut ChaCha8Rng, name: &str) -> String {
    match rng.gen_range(0..6) {
        0 => name.to_uppercase(),
        1 => name.to_lowercase(),
        2 => name.replacen(' ', "  ", 1),
        _ => name.to_string(),
    }
}

fn random_date(rng: &mut ChaCha8Rng) -> DateTime<FixedOffset> {
    let start = Utc.with_ymd_and_hms(FIRST_YEAR, 1, 1, 0, 0, 0).unwrap();
    let end = Utc.with_ymd_and_hms(LAST_YEAR + 1, 1, 1, 0, 0, 0).unwrap();
    // land a share of commits within a day of a year boundary
    let utc = if rng.gen_bool(0.15) {
        let year = rng.gen_range(FIRST_YEAR..=LAST_YEAR + 1);
        let boundary = Utc.with_ymd_and_hms(year, 1, 1, 0, 0, 0).unwrap();
        (boundary + Duration::minutes(rng.gen_range(-720..720))).clamp(start, end - Duration::seconds(1))
    } else {
        start + Duration::seconds(rng.gen_range(0..(end - start).num_seconds()))
    };
    let offset = FixedOffset::east_opt(rng.gen_range(-11..=12) * 3600).unwrap();
    utc.with_timezone(&offset)
}

fn random_paths(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|i| {
            if rng.gen_bool(0.08) {
                "Makefile".to_string()
            } else {
                let dir = SUBSYSTEMS.choose(rng).unwrap();
                format!("{dir}/sub{}/file{i}.c", rng.gen_range(0..4))
            }
        })
        .collect()
}

pub fn synthetic_corpus(seed: u64, commits: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roster = roster();

    let mut maintainers = BTreeMap::new();
    for year in FIRST_YEAR..=LAST_YEAR {
        let set: BTreeSet<usize> = (0..roster.len()).filter(|_| rng.gen_bool(0.35)).collect();
        maintainers.insert(year, set);
    }

    let mut records = Vec::with_capacity(commits);
    let mut truth = Vec::with_capacity(commits);
    for i in 0..commits {
        let author = rng.gen_range(0..roster.len());
        let is_merge = rng.gen_bool(0.05);
        let mut body = vec![format!("subsys: change number {i}"), String::new()];
        for _ in 0..rng.gen_range(0..3) {
            body.push(PROSE.choose(&mut rng).unwrap().to_string());
        }
        body.push(String::new());

        let mut planted = Vec::new();
        let mut plant = |rng: &mut ChaCha8Rng, person: usize, kind: TrailerKind, body: &mut Vec<String>| {
            let forms: &[&str] = match kind {
                TrailerKind::Signed => &SIGNED_FORMS,
                TrailerKind::Acked => &ACKED_FORMS,
                TrailerKind::Reviewed => &REVIEWED_FORMS,
            };
            let entry = &roster[person];
            body.push(format!(
                "{}{} <{}>",
                forms.choose(rng).unwrap(),
                spelled(rng, entry.name),
                entry.email
            ));
            planted.push(Planted { person, kind });
        };

        if rng.gen_bool(0.9) {
            plant(&mut rng, author, TrailerKind::Signed, &mut body);
        }
        for _ in 0..rng.gen_range(0..4) {
            let person = rng.gen_range(0..roster.len());
            if rng.gen_bool(0.25) {
                let entry = &roster[person];
                body.push(format!(
                    "{}{} <{}>",
                    IGNORED_FORMS.choose(&mut rng).unwrap(),
                    entry.name,
                    entry.email
                ));
                continue;
            }
            let kind = *[TrailerKind::Signed, TrailerKind::Acked, TrailerKind::Reviewed]
                .choose(&mut rng)
                .unwrap();
            plant(&mut rng, person, kind, &mut body);
        }

        let author_date = random_date(&mut rng);
        let commit_date = random_date(&mut rng);
        records.push(CommitRecord {
            hash: format!("{:040x}", (seed as u128) << 64 | i as u128),
            author_name: spelled(&mut rng, roster[author].name),
            author_email: roster[author].email.clone(),
            author_date,
            commit_date,
            body,
            paths: random_paths(&mut rng),
            is_merge,
        });
        truth.push((author, planted));
    }

    Corpus {
        records,
        truth,
        maintainers,
        roster,
    }
}

impl Corpus {
    pub fn to_log(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.records {
            r.write_canonical(&mut out).unwrap();
        }
        out
    }

    /// Writes `<year>.snapshot` files listing each year's maintainers.
    pub fn write_maintainers(&self, dir: &Path) {
        std::fs::create_dir_all(dir).unwrap();
        for (year, set) in &self.maintainers {
            let mut text = String::from("LINUX KERNEL MAINTAINERS\n\n");
            for &p in set {
                let e = &self.roster[p];
                text.push_str(&format!("SOME DRIVER\nM:\t{} <{}>\nS:\tMaintained\n\n", e.name, e.email));
            }
            std::fs::write(dir.join(format!("{year}.snapshot")), text).unwrap();
        }
    }
}

/// Network recounted straight from the ground truth, keyed by roster index.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct NaiveNetwork {
    pub nodes: BTreeSet<usize>,
    /// (reviewer, author) -> [signed, acked, reviewed]
    pub cells: BTreeMap<(usize, usize), [u64; 3]>,
}

impl NaiveNetwork {
    pub fn weight(&self, r: usize, a: usize) -> u64 {
        self.cells.get(&(r, a)).map_or(0, |c| c.iter().sum())
    }

    pub fn diagonal(&self, p: usize) -> u64 {
        self.weight(p, p)
    }

    pub fn out_strength(&self, p: usize) -> u64 {
        self.cells
            .iter()
            .filter(|((r, a), _)| *r == p && *a != p)
            .map(|(_, c)| c.iter().sum::<u64>())
            .sum()
    }

    /// Off-diagonal share of `p`'s reviews whose author satisfies `target`.
    pub fn ratio(&self, p: usize, qualifies: bool, target: impl Fn(usize) -> bool) -> Option<f64> {
        if !qualifies {
            return None;
        }
        let mut basis = 0u64;
        let mut hits = 0u64;
        for a in &self.nodes {
            if *a == p {
                continue;
            }
            let w = self.weight(p, *a);
            basis += w;
            if target(*a) {
                hits += w;
            }
        }
        Some(if basis == 0 { 0.0 } else { hits as f64 / basis as f64 })
    }
}

fn kind_slot(kind: TrailerKind) -> usize {
    match kind {
        TrailerKind::Signed => 0,
        TrailerKind::Acked => 1,
        TrailerKind::Reviewed => 2,
    }
}

/// Recount keyed by (year, subsystem name) for every commit's touched
/// subsystems.
pub fn naive_recount(corpus: &Corpus) -> BTreeMap<(i32, String), NaiveNetwork> {
    let mut nets: BTreeMap<(i32, String), NaiveNetwork> = BTreeMap::new();
    for (record, (author, planted)) in corpus.records.iter().zip(&corpus.truth) {
        if record.is_merge {
            continue;
        }
        let year = record.commit_date.with_timezone(&Utc).year();
        if !(FIRST_YEAR..=LAST_YEAR).contains(&year) {
            continue;
        }
        let mut subsystems = BTreeSet::new();
        for path in &record.paths {
            match path.split_once('/') {
                Some((dir, _)) => subsystems.insert(dir.to_string()),
                None => subsystems.insert("ROOT".to_string()),
            };
        }
        for sub in subsystems {
            let net = nets.entry((year, sub)).or_default();
            net.nodes.insert(*author);
            for t in planted {
                net.nodes.insert(t.person);
                net.cells.entry((t.person, *author)).or_default()[kind_slot(t.kind)] += 1;
            }
        }
    }
    nets
}

/// Organization of each roster entry seen in `year`, as the oracle sees it.
pub fn naive_org(corpus: &Corpus, person: usize) -> Option<&'static str> {
    corpus.roster[person].org
}

/// Edge set of a pipeline network translated to roster indices.
pub fn translate(net: &ReviewNetwork, to_roster: &BTreeMap<PersonId, usize>) -> BTreeMap<(usize, usize), [u64; 3]> {
    net.edges()
        .map(|(r, a, c): (PersonId, PersonId, &EdgeCounts)| {
            (
                (to_roster[&r], to_roster[&a]),
                [c.signed, c.acked, c.reviewed],
            )
        })
        .collect()
}

pub fn subsystem_key(s: &Subsystem) -> String {
    s.name().to_string()
}

pub fn mine_config(maintainers_dir: &Path) -> reviewnet::pipeline::MineConfig {
    let mut config = reviewnet::pipeline::MineConfig::yearly(FIRST_YEAR, LAST_YEAR).unwrap();
    config.affiliations = affiliation_map();
    config.maintainers_dir = Some(maintainers_dir.to_path_buf());
    config
}

/// Runs the pipeline on `corpus` through its serialized log.
pub fn run_pipeline(corpus: &Corpus, scratch: &Path) -> reviewnet::pipeline::Mined {
    let dir = scratch.join("maintainers");
    corpus.write_maintainers(&dir);
    let parsed = reviewnet::ingest::parse_commit_stream(&corpus.to_log());
    assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
    reviewnet::pipeline::mine_networks(&parsed, &mine_config(&dir)).unwrap()
}

/// Compares every pipeline network entry for entry against the recount;
/// returns a description of each disagreement.
pub fn oracle_mismatches(corpus: &Corpus, mined: &reviewnet::pipeline::Mined) -> Vec<String> {
    use reviewnet::metrics::{affiliation_review_ratio, maintainer_review_ratio};

    let mut problems = Vec::new();
    let to_roster: BTreeMap<PersonId, usize> = corpus
        .roster
        .iter()
        .enumerate()
        .filter_map(|(i, e)| mined.identities.resolve(e.name).map(|p| (p, i)))
        .collect();
    if to_roster.len() != corpus.roster.len() || mined.identities.len() != corpus.roster.len() {
        problems.push(format!(
            "identity table has {} persons, roster has {}",
            mined.identities.len(),
            corpus.roster.len()
        ));
        return problems;
    }

    let expected = naive_recount(corpus);
    let empty = NaiveNetwork::default();
    let mut seen = BTreeSet::new();
    for net in &mined.networks {
        let year: i32 = net.window.parse().unwrap();
        let key = (year, subsystem_key(&net.subsystem));
        seen.insert(key.clone());
        let want = expected.get(&key).unwrap_or(&empty);
        let tag = format!("{}/{}", key.1, key.0);

        let nodes: BTreeSet<usize> = net.nodes().iter().map(|p| to_roster[p]).collect();
        if nodes != want.nodes {
            problems.push(format!("{tag}: node sets differ"));
            continue;
        }
        if translate(net, &to_roster) != want.cells {
            problems.push(format!("{tag}: adjacency differs"));
        }
        let view = net.strip_diagonal();
        let diagonal = net.diagonal();
        let (out, _) = view.strengths();
        let attrs = &mined.attributes[&net.window];
        let maintainers = &corpus.maintainers[&year];
        for (idx, p) in net.nodes().iter().enumerate() {
            let r = to_roster[p];
            if diagonal[idx] != want.diagonal(r) {
                problems.push(format!("{tag}: diagonal of {} differs", corpus.roster[r].name));
            }
            if out[idx] != want.out_strength(r) {
                problems.push(format!("{tag}: out-strength of {} differs", corpus.roster[r].name));
            }
            let m = maintainer_review_ratio(&view, &attrs.maintainers, *p).unwrap().value;
            let m_want = want.ratio(r, maintainers.contains(&r), |a| maintainers.contains(&a));
            if m != m_want {
                problems.push(format!("{tag}: maintainer ratio of {} is {m:?}, want {m_want:?}", corpus.roster[r].name));
            }
            let org = naive_org(corpus, r);
            let a = affiliation_review_ratio(&view, attrs, *p).unwrap().value;
            let a_want = want.ratio(r, org.is_some(), |x| org.is_some() && naive_org(corpus, x) == org);
            if a != a_want {
                problems.push(format!("{tag}: affiliation ratio of {} is {a:?}, want {a_want:?}", corpus.roster[r].name));
            }
        }
    }
    for key in expected.keys() {
        if !seen.contains(key) {
            problems.push(format!("{}/{}: missing from the pipeline output", key.1, key.0));
        }
    }
    problems
}

pub const ANNA: PersonId = PersonId(0);
pub const BORIS: PersonId = PersonId(1);
pub const CARL: PersonId = PersonId(2);
pub const DORA: PersonId = PersonId(3);

fn fixture_commit(n: u32, author: &str, email: &str, trailers: &[String], path: &str) -> CommitRecord {
    let date = DateTime::parse_from_rfc3339("2006-03-01T12:00:00+00:00").unwrap() + Duration::hours(n as i64);
    let mut body = vec![format!("arch: change {n}"), String::new()];
    body.extend(trailers.iter().cloned());
    CommitRecord {
        hash: format!("{n:040x}"),
        author_name: author.to_string(),
        author_email: email.to_string(),
        author_date: date,
        commit_date: date,
        body,
        paths: vec![path.to_string()],
        is_merge: false,
    }
}

/// Log and maintainers directory reproducing the four-node example: Anna
/// and Boris maintain; Anna reviews Boris four times and Carl once; Boris
/// signs his own four commits; Dora authors an unreviewed commit.
pub fn worked_example(dir: &Path) -> (Vec<CommitRecord>, std::path::PathBuf) {
    let anna = "Acked-by: Anna Adams <anna@intel.com>".to_string();
    let boris = "Signed-off-by: Boris Bauer <boris@redhat.com>".to_string();
    let mut records = Vec::new();
    for n in 0..4 {
        records.push(fixture_commit(n, "Boris Bauer", "boris@redhat.com", &[boris.clone(), anna.clone()], "arch/x86/mm.c"));
    }
    records.push(fixture_commit(4, "Carl Clarke", "carl@suse.de", &[anna], "arch/arm/irq.c"));
    records.push(fixture_commit(5, "Dora Diaz", "dora@gmail.com", &[], "arch/mips/setup.c"));

    let maintainers = dir.join("maintainers");
    std::fs::create_dir_all(&maintainers).unwrap();
    std::fs::write(
        maintainers.join("2006.snapshot"),
        "X86 MM\nM:\tAnna Adams <anna@intel.com>\n\nRH STUFF\nM:\tBoris Bauer <boris@redhat.com>\n",
    )
    .unwrap();
    (records, maintainers)
}

pub fn worked_example_dataset(dir: &Path) -> reviewnet::report::Dataset {
    let (records, maintainers) = worked_example(dir);
    let parsed = reviewnet::ingest::ParsedStream {
        records,
        diagnostics: vec![],
    };
    let mut config = reviewnet::pipeline::MineConfig::yearly(2006, 2006).unwrap();
    config.affiliations = affiliation_map();
    config.maintainers_dir = Some(maintainers);
    reviewnet::pipeline::mine(&parsed, &config).unwrap()
}

//! Node attributes: maintainership per window and organizational
//! affiliation derived from e-mail domains.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use aho_corasick::AhoCorasick;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identity::{IdentityTable, PersonId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Affiliation {
    Org(String),
    Unaffiliated,
}

impl Affiliation {
    pub const UNAFFILIATED_LABEL: &'static str = "UNAFFILIATED";

    pub fn org(&self) -> Option<&str> {
        match self {
            Affiliation::Org(name) => Some(name),
            Affiliation::Unaffiliated => None,
        }
    }

    pub fn is_affiliated(&self) -> bool {
        matches!(self, Affiliation::Org(_))
    }
}

impl fmt::Display for Affiliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Affiliation::Org(name) => f.write_str(name),
            Affiliation::Unaffiliated => f.write_str(Self::UNAFFILIATED_LABEL),
        }
    }
}

impl From<String> for Affiliation {
    fn from(s: String) -> Self {
        if s == Self::UNAFFILIATED_LABEL {
            Affiliation::Unaffiliated
        } else {
            Affiliation::Org(s)
        }
    }
}

impl From<Affiliation> for String {
    fn from(a: Affiliation) -> Self {
        a.to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AffiliationMap {
    domain_to_org: BTreeMap<String, String>,
}

impl AffiliationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, domain: &str, org: &str) -> Result<()> {
        let domain = domain.trim().to_lowercase();
        let org = org.trim();
        if domain.is_empty() || org.is_empty() {
            return Err(Error::Config(format!(
                "affiliation entry needs a domain and an organization: {domain:?} -> {org:?}"
            )));
        }
        self.domain_to_org.insert(domain, org.to_string());
        Ok(())
    }

    pub fn with(mut self, domain: &str, org: &str) -> Self {
        self.insert(domain, org).expect("valid affiliation entry");
        self
    }

    pub fn get(&self, domain: &str) -> Option<&str> {
        self.domain_to_org.get(domain).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.domain_to_org.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain_to_org.is_empty()
    }

    /// Parses `domain<TAB>organization` lines; `#` starts a comment.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut map = AffiliationMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::BadInputLine {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let (domain, org) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected domain<TAB>organization".into()))?;
            map.insert(domain, org).map_err(|e| bad(e.to_string()))?;
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// Organization owning the e-mail's domain: the last two domain labels are
/// looked up first, then the full domain.
pub fn extract_affiliation(email: &str, map: &AffiliationMap) -> Affiliation {
    let Some((_, domain)) = email.rsplit_once('@') else {
        log::warn!("e-mail {email:?} has no '@'; treated as unaffiliated");
        return Affiliation::Unaffiliated;
    };
    let domain = domain
        .trim()
        .trim_end_matches('>')
        .replace(',', ".")
        .to_lowercase();
    let labels: Vec<&str> = domain.split('.').filter(|l| !l.is_empty()).collect();
    if labels.is_empty() {
        return Affiliation::Unaffiliated;
    }
    let suffix = labels[labels.len().saturating_sub(2)..].join(".");
    let full = labels.join(".");
    map.get(&suffix)
        .or_else(|| map.get(&full))
        .map_or(Affiliation::Unaffiliated, |org| Affiliation::Org(org.to_string()))
}

/// Majority vote over the affiliations of a person's e-mails in a window.
/// Unaffiliated votes only count when no organization got any vote; ties go
/// to the lexicographically smallest organization.
pub fn assign_person_affiliation<'a, I>(window_emails: I, map: &AffiliationMap) -> Affiliation
where
    I: IntoIterator<Item = &'a str>,
{
    let mut votes: BTreeMap<String, usize> = BTreeMap::new();
    for email in window_emails {
        if let Affiliation::Org(org) = extract_affiliation(email, map) {
            *votes.entry(org).or_default() += 1;
        }
    }
    // max_by_key keeps the last maximum, so walk in reverse to prefer the smallest name
    votes
        .into_iter()
        .rev()
        .max_by_key(|(_, n)| *n)
        .map_or(Affiliation::Unaffiliated, |(org, _)| Affiliation::Org(org))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaintainerSet {
    pub window: String,
    pub members: BTreeSet<PersonId>,
}

impl MaintainerSet {
    pub fn new(window: impl Into<String>, members: impl IntoIterator<Item = PersonId>) -> Self {
        MaintainerSet {
            window: window.into(),
            members: members.into_iter().collect(),
        }
    }

    pub fn contains(&self, person: PersonId) -> bool {
        self.members.contains(&person)
    }
}

/// A person is a maintainer for the window when any of their aliases occurs,
/// case-insensitively, in the maintainers file as of the window's first
/// revision or in any line added to it during the window.
pub fn extract_maintainers<S: AsRef<str>>(
    first_snapshot: &str,
    added_lines: &[S],
    identities: &IdentityTable,
    window: &str,
) -> MaintainerSet {
    if first_snapshot.trim().is_empty() {
        log::warn!("window {window}: empty maintainers snapshot");
    }

    let mut pattern_owners: BTreeMap<String, BTreeSet<PersonId>> = BTreeMap::new();
    for person in identities.persons() {
        for alias in &person.aliases {
            let needle = alias.trim().to_lowercase();
            if !needle.is_empty() {
                pattern_owners.entry(needle).or_default().insert(person.person_id);
            }
        }
    }
    let mut members = BTreeSet::new();
    if pattern_owners.is_empty() {
        return MaintainerSet::new(window, members);
    }
    let patterns: Vec<&String> = pattern_owners.keys().collect();
    let owners: Vec<&BTreeSet<PersonId>> = pattern_owners.values().collect();
    let matcher = AhoCorasick::new(&patterns).expect("alias patterns build an automaton");

    let texts = std::iter::once(first_snapshot).chain(added_lines.iter().map(AsRef::as_ref));
    for text in texts {
        let haystack = text.to_lowercase();
        for hit in matcher.find_overlapping_iter(&haystack) {
            members.extend(owners[hit.pattern().as_usize()].iter().copied());
        }
    }
    MaintainerSet::new(window, members)
}

/// Maintainers-file history for one window, read from
/// `<dir>/<window>.snapshot` and `<dir>/<window>.added`.
#[derive(Debug, Clone, Default)]
pub struct MaintainersHistory {
    pub snapshot: String,
    pub added_lines: Vec<String>,
}

impl MaintainersHistory {
    pub fn load(dir: &Path, window: &str) -> Result<Self> {
        let read = |suffix: &str| -> Result<Option<String>> {
            let path: PathBuf = dir.join(format!("{window}.{suffix}"));
            match std::fs::read(&path) {
                Ok(bytes) => Ok(Some(String::from_utf8_lossy(&bytes).into_owned())),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    log::warn!("{} not found; treated as empty", path.display());
                    Ok(None)
                }
                Err(e) => Err(Error::io(path, e)),
            }
        };
        let snapshot = read("snapshot")?.unwrap_or_default();
        let added_lines = read("added")?
            .map(|text| text.lines().map(str::to_string).collect())
            .unwrap_or_default();
        Ok(MaintainersHistory {
            snapshot,
            added_lines,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonAttributes {
    pub person_id: PersonId,
    pub window: String,
    pub is_maintainer: bool,
    pub affiliation: Affiliation,
}

/// Attribute records of every person active in one window.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WindowAttributes {
    pub window: String,
    pub maintainers: MaintainerSet,
    pub records: BTreeMap<PersonId, PersonAttributes>,
}

impl WindowAttributes {
    /// Builds records for every person in `emails`, which maps each person
    /// active in the window to all e-mails seen for them there.
    pub fn build(
        window: &str,
        maintainers: MaintainerSet,
        emails: &HashMap<PersonId, Vec<String>>,
        map: &AffiliationMap,
    ) -> Self {
        let records = emails
            .iter()
            .map(|(&person_id, addrs)| {
                let record = PersonAttributes {
                    person_id,
                    window: window.to_string(),
                    is_maintainer: maintainers.contains(person_id),
                    affiliation: assign_person_affiliation(addrs.iter().map(String::as_str), map),
                };
                (person_id, record)
            })
            .collect();
        WindowAttributes {
            window: window.to_string(),
            maintainers,
            records,
        }
    }

    pub fn is_maintainer(&self, person: PersonId) -> bool {
        self.maintainers.contains(person)
    }

    pub fn affiliation(&self, person: PersonId) -> &Affiliation {
        static UNAFFILIATED: Affiliation = Affiliation::Unaffiliated;
        self.records
            .get(&person)
            .map_or(&UNAFFILIATED, |r| &r.affiliation)
    }
}

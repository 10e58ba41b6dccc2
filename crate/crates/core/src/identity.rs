//! Identity resolution: clusters raw contributor names into persons.
//!
//! Names are compared after case folding and whitespace collapsing. Two
//! names are linked when their normalized edit-distance similarity is
//! strictly greater than the threshold; persons are the transitive closure
//! of those links, adjusted by a manual override list.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersonId(pub u32);

impl fmt::Display for PersonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(s1: &str, s2: &str) -> usize {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(ca != cb);
            curr[j + 1] = substitution.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// `1 - L(s1, s2) / max(|s1|, |s2|)`, with two empty strings counted as
/// identical.
pub fn similarity(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    similarity_chars(&a, &b)
}

fn similarity_chars(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_chars(a, b) as f64 / longest as f64
}

/// Case-folds, trims and collapses internal whitespace runs to one space.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alias {
    pub raw_name: String,
    pub occurrence_count: u64,
    pub emails_seen: BTreeSet<String>,
}

/// Accumulates raw name observations.
#[derive(Debug, Default, Clone)]
pub struct AliasBook {
    aliases: BTreeMap<String, Alias>,
}

impl AliasBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, raw_name: &str, email: &str) {
        if raw_name.trim().is_empty() {
            return;
        }
        let alias = self
            .aliases
            .entry(raw_name.to_string())
            .or_insert_with(|| Alias {
                raw_name: raw_name.to_string(),
                occurrence_count: 0,
                emails_seen: BTreeSet::new(),
            });
        alias.occurrence_count += 1;
        if !email.is_empty() {
            alias.emails_seen.insert(email.to_string());
        }
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    pub fn into_aliases(self) -> Vec<Alias> {
        self.aliases.into_values().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Override {
    Merge(String, String),
    Split(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverrideList {
    /// Directives with their 1-based source line.
    pub directives: Vec<(usize, Override)>,
}

impl OverrideList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn merge(mut self, a: &str, b: &str) -> Self {
        let line = self.directives.len() + 1;
        self.directives.push((line, Override::Merge(a.into(), b.into())));
        self
    }

    pub fn split(mut self, a: &str) -> Self {
        let line = self.directives.len() + 1;
        self.directives.push((line, Override::Split(a.into())));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.directives.is_empty()
    }

    /// Parses `merge<TAB>a<TAB>b` / `split<TAB>a` lines; `#` starts a comment.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut directives = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let bad = |message: &str| Error::BadInputLine {
                path: path.to_path_buf(),
                line: line_no,
                message: message.to_string(),
            };
            let directive = match fields.as_slice() {
                ["merge", a, b] if !a.is_empty() && !b.is_empty() => {
                    Override::Merge(a.to_string(), b.to_string())
                }
                ["split", a] if !a.is_empty() => Override::Split(a.to_string()),
                ["merge", ..] => return Err(bad("expected merge<TAB>nameA<TAB>nameB")),
                ["split", ..] => return Err(bad("expected split<TAB>name")),
                _ => return Err(bad("unknown directive (expected merge or split)")),
            };
            directives.push((line_no, directive));
        }
        Ok(OverrideList { directives })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub person_id: PersonId,
    pub canonical_name: String,
    /// Raw aliases, sorted.
    pub aliases: Vec<String>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index becomes the root; keeps roots independent of link order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Partition of observed aliases into persons.
#[derive(Debug, Clone)]
pub struct IdentityTable {
    aliases: Vec<Alias>,
    /// Distinct normalized names, sorted.
    keys: Vec<String>,
    key_index: HashMap<String, usize>,
    /// Key index of each alias.
    alias_key: Vec<usize>,
    /// Automatic similarity links between keys, `(lo, hi)` sorted.
    links: Vec<(usize, usize)>,
    threshold: f64,
    overrides: OverrideList,
    persons: Vec<Person>,
    key_person: Vec<PersonId>,
}

impl IdentityTable {
    pub fn persons(&self) -> &[Person] {
        &self.persons
    }

    pub fn len(&self) -> usize {
        self.persons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn aliases(&self) -> &[Alias] {
        &self.aliases
    }

    pub fn person(&self, id: PersonId) -> Option<&Person> {
        self.persons.get(id.0 as usize)
    }

    pub fn canonical_name(&self, id: PersonId) -> &str {
        self.person(id).map_or("", |p| p.canonical_name.as_str())
    }

    /// Person a raw name resolves to, compared in normalized form.
    pub fn resolve(&self, raw_name: &str) -> Option<PersonId> {
        self.key_index
            .get(&normalize_name(raw_name))
            .map(|&k| self.key_person[k])
    }

    /// Cluster membership as sorted alias sets, for comparisons in tests.
    pub fn partition(&self) -> BTreeSet<BTreeSet<String>> {
        self.persons
            .iter()
            .map(|p| p.aliases.iter().cloned().collect())
            .collect()
    }

    fn rebuild(&mut self) -> Result<()> {
        let mut merges: Vec<(usize, usize)> = Vec::new();
        let mut split: BTreeSet<usize> = BTreeSet::new();
        let mut merge_lines: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut split_lines: BTreeMap<usize, usize> = BTreeMap::new();

        for (line, directive) in &self.overrides.directives {
            match directive {
                Override::Merge(a, b) => {
                    let ka = self.key_index.get(&normalize_name(a));
                    let kb = self.key_index.get(&normalize_name(b));
                    match (ka, kb) {
                        (Some(&ka), Some(&kb)) => {
                            merges.push((ka, kb));
                            merge_lines.entry(ka).or_default().push(*line);
                            merge_lines.entry(kb).or_default().push(*line);
                        }
                        _ => log::warn!("identity override line {line}: unknown alias in merge {a:?} / {b:?}, skipped"),
                    }
                }
                Override::Split(a) => match self.key_index.get(&normalize_name(a)) {
                    Some(&k) => {
                        split.insert(k);
                        split_lines.insert(k, *line);
                    }
                    None => log::warn!("identity override line {line}: unknown alias in split {a:?}, skipped"),
                },
            }
        }

        let conflicts: Vec<String> = split
            .iter()
            .filter_map(|k| {
                merge_lines.get(k).map(|lines| {
                    format!(
                        "{:?} is split on line {} but merged on line(s) {:?}",
                        self.keys[*k], split_lines[k], lines
                    )
                })
            })
            .collect();
        if !conflicts.is_empty() {
            return Err(Error::ConflictingOverride(conflicts.join("; ")));
        }

        let mut uf = UnionFind::new(self.keys.len());
        for &(a, b) in &self.links {
            if !split.contains(&a) && !split.contains(&b) {
                uf.union(a, b);
            }
        }
        for &(a, b) in &merges {
            uf.union(a, b);
        }

        let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (alias_idx, &key) in self.alias_key.iter().enumerate() {
            clusters.entry(uf.find(key)).or_default().push(alias_idx);
        }

        let mut drafts: Vec<(String, Vec<String>, usize)> = clusters
            .into_iter()
            .map(|(root, members)| {
                let canonical = members
                    .iter()
                    .map(|&i| &self.aliases[i])
                    .max_by(|x, y| {
                        x.occurrence_count
                            .cmp(&y.occurrence_count)
                            .then_with(|| y.raw_name.cmp(&x.raw_name))
                    })
                    .map(|a| a.raw_name.clone())
                    .unwrap_or_default();
                let mut names: Vec<String> =
                    members.iter().map(|&i| self.aliases[i].raw_name.clone()).collect();
                names.sort();
                (canonical, names, root)
            })
            .collect();
        drafts.sort_by(|a, b| a.0.cmp(&b.0));

        let mut root_person: HashMap<usize, PersonId> = HashMap::new();
        self.persons = drafts
            .into_iter()
            .enumerate()
            .map(|(idx, (canonical_name, aliases, root))| {
                let person_id = PersonId(idx as u32);
                root_person.insert(root, person_id);
                Person {
                    person_id,
                    canonical_name,
                    aliases,
                }
            })
            .collect();
        self.key_person = (0..self.keys.len())
            .map(|k| root_person[&uf.find(k)])
            .collect();
        Ok(())
    }
}

/// Links every pair of normalized names whose similarity exceeds
/// `threshold`, then applies `overrides`.
pub fn resolve_identities(
    aliases: impl IntoIterator<Item = Alias>,
    threshold: f64,
    overrides: &OverrideList,
) -> Result<IdentityTable> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config(format!(
            "similarity threshold {threshold} outside (0, 1]"
        )));
    }

    let mut merged: BTreeMap<String, Alias> = BTreeMap::new();
    for alias in aliases {
        if normalize_name(&alias.raw_name).is_empty() {
            continue;
        }
        match merged.get_mut(&alias.raw_name) {
            Some(existing) => {
                existing.occurrence_count += alias.occurrence_count;
                existing.emails_seen.extend(alias.emails_seen);
            }
            None => {
                merged.insert(alias.raw_name.clone(), alias);
            }
        }
    }
    let aliases: Vec<Alias> = merged.into_values().collect();

    let keys: Vec<String> = aliases
        .iter()
        .map(|a| normalize_name(&a.raw_name))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let key_index: HashMap<String, usize> =
        keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    let alias_key = aliases
        .iter()
        .map(|a| key_index[&normalize_name(&a.raw_name)])
        .collect();

    let chars: Vec<Vec<char>> = keys.iter().map(|k| k.chars().collect()).collect();
    let links: Vec<(usize, usize)> = (0..chars.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let chars = &chars;
            (i + 1..chars.len()).filter_map(move |j| {
                let (a, b) = (&chars[i], &chars[j]);
                let longest = a.len().max(b.len()) as f64;
                let best_case = 1.0 - a.len().abs_diff(b.len()) as f64 / longest;
                (best_case > threshold && similarity_chars(a, b) > threshold).then_some((i, j))
            })
        })
        .collect();

    let mut table = IdentityTable {
        aliases,
        keys,
        key_index,
        alias_key,
        links,
        threshold,
        overrides: OverrideList::new(),
        persons: Vec::new(),
        key_person: Vec::new(),
    };
    table.rebuild()?;
    apply_overrides(table, overrides)
}

/// Re-clusters with additional override directives. Overrides take
/// precedence over automatic links; unknown aliases are skipped with a
/// warning.
pub fn apply_overrides(mut table: IdentityTable, overrides: &OverrideList) -> Result<IdentityTable> {
    if overrides.is_empty() {
        return Ok(table);
    }
    table
        .overrides
        .directives
        .extend(overrides.directives.iter().cloned());
    table.rebuild()?;
    Ok(table)
}

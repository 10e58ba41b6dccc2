//! Peer-review keyword lines in commit bodies.
//!
//! A body line qualifies when, after Unicode lowercasing, it starts with one
//! of eight keyword alternatives and the rest of the line has the shape
//! `name <local@domain.tld>` (the closing `>` is optional). Keyword words
//! are joined by a space or a hyphen and terminated by a space, colon or
//! semicolon; `acked:` and `reviewed:` are complete keywords on their own.
//! Name and e-mail are taken from the original, non-lowercased line.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrailerKind {
    Signed,
    Acked,
    Reviewed,
}

impl TrailerKind {
    pub const ALL: [TrailerKind; 3] = [TrailerKind::Signed, TrailerKind::Acked, TrailerKind::Reviewed];

    pub fn as_str(self) -> &'static str {
        match self {
            TrailerKind::Signed => "signed",
            TrailerKind::Acked => "acked",
            TrailerKind::Reviewed => "reviewed",
        }
    }
}

impl fmt::Display for TrailerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trailer {
    pub kind: TrailerKind,
    pub raw_name: String,
    pub raw_email: String,
    pub line_index: usize,
}

enum Keyword {
    /// Words joined by space/hyphen, then a space, colon or semicolon.
    Words(&'static [&'static str]),
    /// Fixed text, terminator included.
    Literal(&'static str),
}

const KEYWORDS: [(TrailerKind, Keyword); 8] = [
    (TrailerKind::Signed, Keyword::Words(&["signed", "by"])),
    (TrailerKind::Signed, Keyword::Words(&["signed", "of", "by"])),
    (TrailerKind::Signed, Keyword::Words(&["signed", "off", "by"])),
    (TrailerKind::Acked, Keyword::Literal("acked:")),
    (TrailerKind::Acked, Keyword::Words(&["acked", "off", "by"])),
    (TrailerKind::Acked, Keyword::Words(&["acked", "by"])),
    (TrailerKind::Reviewed, Keyword::Literal("reviewed:")),
    (TrailerKind::Reviewed, Keyword::Words(&["reviewed", "by"])),
];

fn is_joiner(b: u8) -> bool {
    b == b' ' || b == b'-'
}

fn is_terminator(b: u8) -> bool {
    b == b' ' || b == b':' || b == b';'
}

impl Keyword {
    /// Byte length of the match at the start of `text`, if any.
    fn match_len(&self, text: &[u8]) -> Option<usize> {
        match self {
            Keyword::Literal(lit) => text.starts_with(lit.as_bytes()).then_some(lit.len()),
            Keyword::Words(words) => {
                let mut pos = 0;
                for (i, word) in words.iter().enumerate() {
                    if i > 0 {
                        if !text.get(pos).copied().is_some_and(is_joiner) {
                            return None;
                        }
                        pos += 1;
                    }
                    if !text[pos..].starts_with(word.as_bytes()) {
                        return None;
                    }
                    pos += word.len();
                }
                text.get(pos).copied().is_some_and(is_terminator).then_some(pos + 1)
            }
        }
    }
}

fn match_keyword(lower: &[u8]) -> Option<(TrailerKind, usize)> {
    KEYWORDS
        .iter()
        .find_map(|(kind, kw)| kw.match_len(lower).map(|len| (*kind, len)))
}

/// A line lowercased together with the original byte offset of every
/// lowercased byte, so matches found in the lowercase text can be mapped
/// back onto the original line.
struct Folded {
    lower: String,
    origin: Vec<usize>,
    original_len: usize,
}

impl Folded {
    fn new(line: &str) -> Self {
        let mut lower = String::with_capacity(line.len());
        let mut origin = Vec::with_capacity(line.len());
        for (idx, ch) in line.char_indices() {
            for lc in ch.to_lowercase() {
                let before = lower.len();
                lower.push(lc);
                origin.extend(std::iter::repeat_n(idx, lower.len() - before));
            }
        }
        Folded {
            lower,
            origin,
            original_len: line.len(),
        }
    }

    fn original_offset(&self, lower_offset: usize) -> usize {
        self.origin
            .get(lower_offset)
            .copied()
            .unwrap_or(self.original_len)
    }
}

fn skip_spaces(bytes: &[u8], mut pos: usize) -> usize {
    while bytes.get(pos).is_some_and(|b| *b == b' ' || *b == b'\t') {
        pos += 1;
    }
    pos
}

/// Removes keyword prefixes accidentally stacked after the leading keyword,
/// e.g. `Signed-off-by: Signed-off-by: A <a@b.c>`. The leftmost keyword is
/// kept. Lines not starting with a keyword are returned unchanged.
pub fn sanitize_trailers(raw_line: &str) -> String {
    let mut line = raw_line.to_string();
    loop {
        let folded = Folded::new(&line);
        let lower = folded.lower.as_bytes();
        let Some((_, first_end)) = match_keyword(lower) else {
            return line;
        };
        let second_start = skip_spaces(lower, first_end);
        let Some((_, second_len)) = match_keyword(&lower[second_start..]) else {
            return line;
        };
        let remove_end = skip_spaces(lower, second_start + second_len);
        let from = folded.original_offset(second_start);
        let to = folded.original_offset(remove_end);
        line.replace_range(from..to, "");
    }
}

/// Splits the text following a keyword into `(name, email)` when it has the
/// minimal `name <local@domain.tld>` shape. Wildcards match lazily: the name
/// ends at the first `<`, the local part at the first `@`, the domain label
/// at the first dot or comma, and the address at the first `>` (or the end
/// of the line when there is none).
fn split_name_email(rest: &str) -> Option<(String, String)> {
    let lt = rest.find('<')?;
    if lt == 0 {
        return None;
    }
    let name = rest[..lt]
        .trim()
        .trim_start_matches([':', ';'])
        .trim();
    if name.is_empty() {
        return None;
    }

    let addr = &rest[lt + 1..];
    let at = addr.find('@')?;
    if at == 0 {
        return None;
    }
    let domain = &addr[at + 1..];
    let sep = domain.find(['.', ','])?;
    if sep == 0 {
        return None;
    }
    let tail = &domain[sep + 1..];
    let first = tail.chars().next().filter(|c| *c != '>')?;
    let after_first = first.len_utf8();
    let tail_len = match tail[after_first..].find('>') {
        Some(gt) => after_first + gt,
        None => tail.len(),
    };
    let end = at + 1 + sep + 1 + tail_len;
    let email = addr[..end].trim();
    if email.matches('@').count() != 1 {
        return None;
    }
    Some((name.to_string(), email.to_string()))
}

/// Matches a single (already sanitized) line.
pub fn match_line(line: &str, line_index: usize) -> Option<Trailer> {
    let folded = Folded::new(line);
    let (kind, end) = match_keyword(folded.lower.as_bytes())?;
    let rest = &line[folded.original_offset(end)..];
    let (raw_name, raw_email) = split_name_email(rest)?;
    Some(Trailer {
        kind,
        raw_name,
        raw_email,
        line_index,
    })
}

pub fn extract_trailers<S: AsRef<str>>(body: &[S]) -> Vec<Trailer> {
    body.iter()
        .enumerate()
        .filter_map(|(idx, line)| match_line(&sanitize_trailers(line.as_ref()), idx))
        .collect()
}

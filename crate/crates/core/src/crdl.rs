//! Climbing route description documents.
//!
//! A document is an optional free-text header, a separator line made only of
//! hyphens (at least three, optionally space separated: `---`, `- - -`), and
//! then one hand move per line: a hand token (`L` or `R`, any case) followed
//! by a free-form description.
//!
//! ```text
//! Short warmup on the slab.
//! grade: 5.9
//! - - -
//! R jug
//! L match
//! R crimp sidepull
//! ```

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// The separator emitted by [`serialize_crdl`].
pub const SEPARATOR: &str = "- - -";

/// Reserved description marking a match move.
pub const MATCH_TOKEN: &str = "match";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hand {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl Hand {
    pub fn from_token(token: &str) -> Option<Hand> {
        match token {
            "L" | "l" => Some(Hand::Left),
            "R" | "r" => Some(Hand::Right),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Hand::Left => 'L',
            Hand::Right => 'R',
        }
    }

    pub fn other(self) -> Hand {
        match self {
            Hand::Left => Hand::Right,
            Hand::Right => Hand::Left,
        }
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One line of a route: which hand moves and how the author described it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMove {
    pub hand: Hand,
    pub text: String,
    pub is_match: bool,
}

impl RawMove {
    /// Builds a move from a description, trimming it and detecting the
    /// bare match token. Returns `None` for empty or multi-line text.
    pub fn new(hand: Hand, text: &str) -> Option<RawMove> {
        let text = text.trim();
        if text.is_empty() || text.contains(['\n', '\r']) {
            return None;
        }
        Some(RawMove {
            hand,
            is_match: is_match_text(text),
            text: text.to_string(),
        })
    }
}

/// True iff the description is exactly the match token (case-insensitive,
/// surrounding whitespace ignored). "match on crimp" is not a match move.
pub fn is_match_text(text: &str) -> bool {
    text.trim().eq_ignore_ascii_case(MATCH_TOKEN)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    /// Opaque identifier; empty for freshly parsed documents.
    #[serde(default)]
    pub id: String,
    pub header: String,
    pub moves: Vec<RawMove>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade: Option<String>,
}

impl Route {
    pub fn with_id(mut self, id: impl Into<String>) -> Route {
        self.id = id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrdlError {
    /// No separator line, and the first nonblank line is not a move.
    MissingSeparator,
    BadHandToken {
        line: usize,
        content: String,
    },
    EmptyDescription {
        line: usize,
    },
    EmptyRoute,
}

impl CrdlError {
    pub fn code(&self) -> &'static str {
        match self {
            CrdlError::MissingSeparator => "MissingSeparator",
            CrdlError::BadHandToken { .. } => "BadHandToken",
            CrdlError::EmptyDescription { .. } => "EmptyDescription",
            CrdlError::EmptyRoute => "EmptyRoute",
        }
    }

    /// 1-based line number the error points at, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            CrdlError::BadHandToken { line, .. } | CrdlError::EmptyDescription { line } => {
                Some(*line)
            }
            _ => None,
        }
    }
}

impl fmt::Display for CrdlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrdlError::MissingSeparator => {
                write!(
                    f,
                    "no separator line (---) and the first line is not a hand move"
                )
            }
            CrdlError::BadHandToken { line, content } => {
                write!(f, "line {line}: expected L or R hand token in {content:?}")
            }
            CrdlError::EmptyDescription { line } => {
                write!(f, "line {line}: move has no description")
            }
            CrdlError::EmptyRoute => write!(f, "route has no moves"),
        }
    }
}

impl core::error::Error for CrdlError {}

/// A line made solely of three or more hyphens, optionally separated by whitespace.
pub fn is_separator_line(line: &str) -> bool {
    let mut hyphens = 0;
    for c in line.chars() {
        match c {
            '-' => hyphens += 1,
            c if c.is_whitespace() => {}
            _ => return false,
        }
    }
    hyphens >= 3
}

fn split_hand(line: &str) -> (Option<Hand>, &str, &str) {
    let trimmed = line.trim_start();
    let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
    let (token, rest) = trimmed.split_at(end);
    (Hand::from_token(token), token, rest)
}

/// Normalized header: trailing whitespace stripped per line, leading and
/// trailing blank lines dropped.
pub fn normalize_header(header: &str) -> String {
    let lines: Vec<&str> = header.lines().map(str::trim_end).collect();
    let first = lines.iter().position(|l| !l.is_empty());
    let last = lines.iter().rposition(|l| !l.is_empty());
    match (first, last) {
        (Some(a), Some(b)) => lines[a..=b].join("\n"),
        _ => String::new(),
    }
}

fn header_grade(header: &str) -> Option<String> {
    header.lines().find_map(|line| {
        let line = line.trim();
        let (key, value) = line.split_once(':')?;
        if key.trim().eq_ignore_ascii_case("grade") {
            let value = value.trim();
            (!value.is_empty()).then(|| value.to_string())
        } else {
            None
        }
    })
}

pub fn parse_crdl(document: &str) -> Result<Route, CrdlError> {
    let document = document.strip_prefix('\u{feff}').unwrap_or(document);
    let lines: Vec<&str> = document
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();

    let (header_lines, body_start) = match lines.iter().position(|l| is_separator_line(l)) {
        Some(sep) => (&lines[..sep], sep + 1),
        None => {
            let first = lines.iter().find(|l| !l.trim().is_empty());
            match first {
                Some(line) if split_hand(line).0.is_some() => (&lines[..0], 0),
                None => return Err(CrdlError::EmptyRoute),
                Some(_) => return Err(CrdlError::MissingSeparator),
            }
        }
    };

    let mut moves = Vec::new();
    for (offset, line) in lines[body_start..].iter().enumerate() {
        let line_no = body_start + offset + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (hand, token, rest) = split_hand(line);
        let hand = hand.ok_or_else(|| CrdlError::BadHandToken {
            line: line_no,
            content: token.to_string(),
        })?;
        let mv = RawMove::new(hand, rest).ok_or(CrdlError::EmptyDescription { line: line_no })?;
        moves.push(mv);
    }
    if moves.is_empty() {
        return Err(CrdlError::EmptyRoute);
    }

    let header = normalize_header(&header_lines.join("\n"));
    Ok(Route {
        id: String::new(),
        grade: header_grade(&header),
        header,
        moves,
    })
}

/// Renders a route as a document. Always emits the `- - -` separator and LF
/// line endings.
pub fn serialize_crdl(route: &Route) -> String {
    let mut out = String::new();
    let header = normalize_header(&route.header);
    if !header.is_empty() {
        out.push_str(&header);
        out.push('\n');
    }
    out.push_str(SEPARATOR);
    out.push('\n');
    for mv in &route.moves {
        out.push(mv.hand.letter());
        out.push(' ');
        out.push_str(&mv.text);
        out.push('\n');
    }
    out
}

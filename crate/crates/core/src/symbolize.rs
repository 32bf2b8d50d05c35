//! Machine symbols for parsed moves.
//!
//! Four symbol sets of increasing specificity are derived from a
//! [`MoveFrame`]:
//!
//! | set | content | example |
//! |-----|---------|---------|
//! | S1  | hold types | `sloper` |
//! | S2  | hold types with size/shape descriptors | `edge-small-sloping` |
//! | S3  | S1 plus quality booleans | `pinch-(big move)-(good hold)` |
//! | S4  | S2 plus quality booleans | `pinch-small-sloping-(cross)` |
//!
//! Symbols use the matched surface words, so "crimper" and "crimp" stay
//! distinct. The hand is not part of a symbol.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::frameparse::{MoveFrame, Shape, Size};

/// Reserved symbol for a bare match move, shared by every set.
pub const MATCH_SYMBOL: &str = "match";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolSetId {
    S1,
    S2,
    S3,
    S4,
}

impl SymbolSetId {
    pub const ALL: [SymbolSetId; 4] = [
        SymbolSetId::S1,
        SymbolSetId::S2,
        SymbolSetId::S3,
        SymbolSetId::S4,
    ];

    pub fn has_descriptors(self) -> bool {
        matches!(self, SymbolSetId::S2 | SymbolSetId::S4)
    }

    pub fn has_booleans(self) -> bool {
        matches!(self, SymbolSetId::S3 | SymbolSetId::S4)
    }

    /// `coarser` keeps a subset of this set's components (and differs from it).
    pub fn is_coarsening(self, coarser: SymbolSetId) -> bool {
        self != coarser
            && (self.has_descriptors() || !coarser.has_descriptors())
            && (self.has_booleans() || !coarser.has_booleans())
    }

    pub fn parse(s: &str) -> Option<SymbolSetId> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s1" | "1" => Some(SymbolSetId::S1),
            "s2" | "2" => Some(SymbolSetId::S2),
            "s3" | "3" => Some(SymbolSetId::S3),
            "s4" | "4" => Some(SymbolSetId::S4),
            _ => None,
        }
    }
}

impl fmt::Display for SymbolSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SymbolSetId::S1 => "S1",
            SymbolSetId::S2 => "S2",
            SymbolSetId::S3 => "S3",
            SymbolSetId::S4 => "S4",
        };
        f.write_str(s)
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct QualityFlags {
    pub is_cross: bool,
    pub is_good: bool,
    pub is_big: bool,
}

/// One hold of a symbol: its type and, for descriptor sets, size then shape.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolHold {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub descriptors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MoveSymbol {
    pub set: SymbolSetId,
    pub text: String,
    pub holds: Vec<SymbolHold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<QualityFlags>,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub is_match: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolError {
    /// The frame has an action but no hold and is not a match.
    NoHold,
    NotCoarser {
        from: SymbolSetId,
        to: SymbolSetId,
    },
}

impl SymbolError {
    pub fn code(&self) -> &'static str {
        match self {
            SymbolError::NoHold => "NoHold",
            SymbolError::NotCoarser { .. } => "NotCoarser",
        }
    }
}

impl fmt::Display for SymbolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolError::NoHold => write!(f, "move frame has no hold to name"),
            SymbolError::NotCoarser { from, to } => write!(f, "{to} is not a coarsening of {from}"),
        }
    }
}

impl core::error::Error for SymbolError {}

fn hyphenate(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join("-")
}

/// The three difficulty booleans.
///
/// `is_good` needs strictly more positive descriptors (big size, good shape)
/// than negative ones (small size, bad shape). A `[Not]` match counts as the
/// class the grammar filed it under. `is_big` is set when the verb took any
/// size attribute or is a big verb.
pub fn quality_booleans(frame: &MoveFrame) -> QualityFlags {
    let mut balance: i64 = 0;
    for hold in &frame.holds {
        if let Some(size) = &hold.size {
            balance += if size.class == Size::Big { 1 } else { -1 };
        }
        if let Some(shape) = &hold.shape {
            balance += if shape.class == Shape::Good { 1 } else { -1 };
        }
    }
    let action = frame.action.as_ref();
    QualityFlags {
        is_cross: action.is_some_and(|a| a.is_cross),
        is_good: balance > 0,
        is_big: action.is_some_and(|a| a.size.is_some() || a.verb_class == Size::Big),
    }
}

fn render(holds: &[SymbolHold], features: Option<QualityFlags>, is_match: bool) -> String {
    let mut parts: Vec<String> = Vec::new();
    if is_match && holds.is_empty() {
        parts.push(MATCH_SYMBOL.to_string());
    }
    for h in holds {
        parts.push(h.kind.clone());
        parts.extend(h.descriptors.iter().cloned());
    }
    if let Some(q) = features {
        if q.is_cross {
            parts.push("(cross)".into());
        }
        if q.is_big {
            parts.push("(big move)".into());
        }
        if q.is_good {
            parts.push("(good hold)".into());
        }
    }
    parts.join("-")
}

fn build(
    set: SymbolSetId,
    holds: Vec<SymbolHold>,
    features: Option<QualityFlags>,
    is_match: bool,
) -> MoveSymbol {
    let features = if set.has_booleans() { features } else { None };
    let text = render(&holds, features, is_match);
    MoveSymbol {
        set,
        text,
        holds,
        features,
        is_match,
    }
}

/// A bare match frame becomes [`MATCH_SYMBOL`] in every set; a match frame
/// naming holds is symbolized through its holds.
pub fn extract_symbol(frame: &MoveFrame, set: SymbolSetId) -> Result<MoveSymbol, SymbolError> {
    if frame.holds.is_empty() {
        if frame.is_match {
            return Ok(MoveSymbol {
                set,
                text: MATCH_SYMBOL.into(),
                holds: Vec::new(),
                features: None,
                is_match: true,
            });
        }
        return Err(SymbolError::NoHold);
    }
    let holds = frame
        .holds
        .iter()
        .map(|h| SymbolHold {
            kind: hyphenate(&h.kind),
            descriptors: if set.has_descriptors() {
                h.size
                    .iter()
                    .map(|d| hyphenate(&d.text))
                    .chain(h.shape.iter().map(|d| hyphenate(&d.text)))
                    .collect()
            } else {
                Vec::new()
            },
        })
        .collect();
    Ok(build(
        set,
        holds,
        Some(quality_booleans(frame)),
        frame.is_match,
    ))
}

/// Drops the components `coarser` does not carry.
pub fn project(symbol: &MoveSymbol, coarser: SymbolSetId) -> Result<MoveSymbol, SymbolError> {
    if !symbol.set.is_coarsening(coarser) {
        return Err(SymbolError::NotCoarser {
            from: symbol.set,
            to: coarser,
        });
    }
    if symbol.holds.is_empty() {
        return Ok(MoveSymbol {
            set: coarser,
            ..symbol.clone()
        });
    }
    let holds = symbol
        .holds
        .iter()
        .map(|h| SymbolHold {
            kind: h.kind.clone(),
            descriptors: if coarser.has_descriptors() {
                h.descriptors.clone()
            } else {
                Vec::new()
            },
        })
        .collect();
    Ok(build(coarser, holds, symbol.features, symbol.is_match))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphabetEntry {
    pub symbol: MoveSymbol,
    pub count: usize,
}

/// Distinct symbols with counts, most frequent first, then by text. Frames
/// without a symbol (action only) are skipped.
pub fn alphabet(corpus: &[MoveFrame], set: SymbolSetId) -> Vec<AlphabetEntry> {
    let mut counts: BTreeMap<String, (MoveSymbol, usize)> = BTreeMap::new();
    for frame in corpus {
        if let Ok(sym) = extract_symbol(frame, set) {
            counts.entry(sym.text.clone()).or_insert((sym, 0)).1 += 1;
        }
    }
    let mut out: Vec<AlphabetEntry> = counts
        .into_values()
        .map(|(symbol, count)| AlphabetEntry { symbol, count })
        .collect();
    // BTreeMap order already sorts by text; the stable sort keeps it within a count
    out.sort_by_key(|e| core::cmp::Reverse(e.count));
    out
}

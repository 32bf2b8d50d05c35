use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::grammar::Grammar;
use super::parser::{parse_move, FrameNode, FrameParse};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Size {
    Big,
    Small,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Good,
    Bad,
}

/// Which `[HoldType]` alternative matched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoldClass {
    Plain,
    Sidepull,
    Undercling,
    Foothook,
    Layback,
    Mantle,
    Jib,
    Generic,
}

/// A size or shape word and the class the grammar filed it under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor<C> {
    pub class: C,
    pub text: String,
    /// The match went through a `[Not]` production ("not bad").
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub negated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldFrame {
    #[serde(rename = "type")]
    pub kind: String,
    pub class: HoldClass,
    pub size: Option<Descriptor<Size>>,
    pub shape: Option<Descriptor<Shape>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionFrame {
    pub verb: String,
    pub verb_class: Size,
    pub size: Option<Descriptor<Size>>,
    pub is_cross: bool,
}

/// Everything recognized in one move description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveFrame {
    pub action: Option<ActionFrame>,
    pub holds: Vec<HoldFrame>,
    pub is_match: bool,
    /// Every matched word in input order, hyphen-joined.
    pub hybrid: String,
}

impl MoveFrame {
    pub fn is_empty(&self) -> bool {
        self.action.is_none() && self.holds.is_empty() && !self.is_match
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrameError {
    EmptyParse,
}

impl FrameError {
    pub fn code(&self) -> &'static str {
        "EmptyParse"
    }
}

impl fmt::Display for FrameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "description produced no move frame")
    }
}

impl core::error::Error for FrameError {}

fn size_of(node: &FrameNode, big: &str, small: &str) -> Option<Descriptor<Size>> {
    let choice = node.first_node()?;
    let class = if choice.label == big {
        Size::Big
    } else if choice.label == small {
        Size::Small
    } else {
        return None;
    };
    Some(Descriptor {
        class,
        text: node.text(),
        negated: node.contains_label("Not"),
    })
}

fn shape_of(node: &FrameNode) -> Option<Descriptor<Shape>> {
    let choice = node.first_node()?;
    let class = match choice.label.as_str() {
        "HoldShapeGood" => Shape::Good,
        "HoldShapeBad" => Shape::Bad,
        _ => return None,
    };
    Some(Descriptor {
        class,
        text: node.text(),
        negated: node.contains_label("Not"),
    })
}

fn hold_of(node: &FrameNode) -> Option<HoldFrame> {
    let kind = node.child("HoldType")?;
    let class = match kind.first_node().map(|n| n.label.as_str()) {
        Some("SidePull") => HoldClass::Sidepull,
        Some("UnderCling") => HoldClass::Undercling,
        Some("FootHook") => HoldClass::Foothook,
        Some("Layback") => HoldClass::Layback,
        Some("Mantle") => HoldClass::Mantle,
        Some("Jib") => HoldClass::Jib,
        Some("GenericHold") => HoldClass::Generic,
        _ => HoldClass::Plain,
    };
    Some(HoldFrame {
        kind: kind.text(),
        class,
        size: node
            .child("HoldSize")
            .and_then(|n| size_of(n, "HoldSizeBig", "HoldSizeSmall")),
        shape: node.child("HoldShape").and_then(shape_of),
    })
}

fn action_of(node: &FrameNode) -> Option<ActionFrame> {
    let verb = node.child("ActionVerb")?;
    let verb_class = match verb.first_node().map(|n| n.label.as_str()) {
        Some("ActionVerbBig") => Size::Big,
        _ => Size::Small,
    };
    Some(ActionFrame {
        verb: verb.text(),
        verb_class,
        size: node
            .child("ActionSize")
            .and_then(|n| size_of(n, "ActionSizeBig", "ActionSizeSmall")),
        is_cross: verb.contains_label("Cross"),
    })
}

/// Folds the frames of one description into a single move.
///
/// Hold elements append to the hold list in input order, which is how
/// multi-frame descriptions ("crimp rail") become hybrid holds. The first
/// action is kept; later actions can only add a cross, a missing size, or a
/// big verb class to it.
pub fn merge_parses(frames: &[FrameParse]) -> Result<MoveFrame, FrameError> {
    let mut merged = MoveFrame {
        action: None,
        holds: Vec::new(),
        is_match: false,
        hybrid: String::new(),
    };
    let mut words: Vec<String> = Vec::new();
    for frame in frames {
        words.extend(frame.root.words().iter().map(|w| w.replace(' ', "-")));
        for element in frame.root.nodes() {
            match element.label.as_str() {
                "Match" => merged.is_match = true,
                "Hold" => merged.holds.extend(hold_of(element)),
                "Action" => {
                    if let Some(action) = action_of(element) {
                        match &mut merged.action {
                            None => merged.action = Some(action),
                            Some(first) => {
                                first.is_cross |= action.is_cross;
                                if first.size.is_none() {
                                    first.size = action.size;
                                }
                                if action.verb_class == Size::Big {
                                    first.verb_class = Size::Big;
                                }
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    if merged.is_empty() {
        return Err(FrameError::EmptyParse);
    }
    merged.hybrid = words.join("-");
    Ok(merged)
}

/// Parses and merges in one step.
pub fn frame_of(text: &str, grammar: &Grammar) -> Result<MoveFrame, FrameError> {
    merge_parses(&parse_move(text, grammar))
}

/// Fraction of descriptions with at least one frame match; 0 for an empty corpus.
pub fn coverage<S: AsRef<str>>(corpus: &[S], grammar: &Grammar) -> f64 {
    if corpus.is_empty() {
        return 0.0;
    }
    let parsed = corpus
        .iter()
        .filter(|t| !parse_move(t.as_ref(), grammar).is_empty())
        .count();
    parsed as f64 / corpus.len() as f64
}

impl fmt::Display for MoveFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if let Some(a) = &self.action {
            parts.push(alloc::format!("action={}", a.verb));
        }
        for h in &self.holds {
            parts.push(alloc::format!("hold={}", h.kind));
        }
        if self.is_match {
            parts.push("match".to_string());
        }
        write!(f, "{}", parts.join(" "))
    }
}

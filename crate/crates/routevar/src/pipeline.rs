//! Operations shared by the CLI and the HTTP API.

use std::collections::BTreeMap;

use routevar_core::chaos::{PlanSlot, VariationConfig, VariationPlan};
use routevar_core::crdl::{Hand, Route};
use routevar_core::frameparse::{frame_of, merge_parses, parse_move, Grammar, MoveFrame};
use routevar_core::icmap::{Axis, GridSpec, MetricRange, Slice};
use routevar_core::symbolize::{
    alphabet, extract_symbol, AlphabetEntry, SymbolSetId, MATCH_SYMBOL,
};
use routevar_core::vomm::{alphabet_of, train, VommModel};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

/// Version of every request and response schema.
pub const API_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParseResult {
    /// Leading hand token, when the text started with one.
    pub hand: Option<Hand>,
    /// The description after the hand token.
    pub text: String,
    /// Dotted paths of each frame match.
    pub parses: Vec<Vec<String>>,
    pub frame: MoveFrame,
    /// Symbol text per set; `None` when the frame has no hold to name.
    pub symbols: BTreeMap<String, Option<String>>,
}

/// Splits a leading `L`/`R` token off a move line.
pub fn strip_hand(line: &str) -> (Option<Hand>, &str) {
    let trimmed = line.trim();
    if let Some((first, rest)) = trimmed.split_once(char::is_whitespace) {
        if let Some(hand) = Hand::from_token(first) {
            if !rest.trim().is_empty() {
                return (Some(hand), rest.trim());
            }
        }
    }
    (None, trimmed)
}

pub fn parse_description(line: &str, grammar: &Grammar) -> Result<ParseResult> {
    let (hand, text) = strip_hand(line);
    let parses = parse_move(text, grammar);
    let frame = merge_parses(&parses)?;
    let symbols = SymbolSetId::ALL
        .iter()
        .map(|&set| {
            let symbol = extract_symbol(&frame, set).ok().map(|s| s.text);
            (set.to_string(), symbol)
        })
        .collect();
    Ok(ParseResult {
        hand,
        text: text.to_string(),
        parses: parses
            .iter()
            .map(|p| p.paths().iter().map(|x| x.dotted()).collect())
            .collect(),
        frame,
        symbols,
    })
}

/// Symbol of one move description; a bare match is [`MATCH_SYMBOL`].
pub fn symbol_of(
    text: &str,
    is_match: bool,
    grammar: &Grammar,
    set: SymbolSetId,
) -> Option<String> {
    if is_match {
        return Some(MATCH_SYMBOL.to_string());
    }
    let frame = frame_of(text, grammar).ok()?;
    extract_symbol(&frame, set).ok().map(|s| s.text)
}

/// Per-move symbols of a route; `None` for moves the grammar cannot name.
pub fn route_symbols(route: &Route, grammar: &Grammar, set: SymbolSetId) -> Vec<Option<String>> {
    route
        .moves
        .iter()
        .map(|m| symbol_of(&m.text, m.is_match, grammar, set))
        .collect()
}

/// Frames of every parseable move in the routes.
pub fn route_frames(routes: &[Route], grammar: &Grammar) -> Vec<MoveFrame> {
    routes
        .iter()
        .flat_map(|r| r.moves.iter())
        .filter_map(|m| frame_of(&m.text, grammar).ok())
        .collect()
}

pub fn route_alphabet(routes: &[Route], grammar: &Grammar, set: SymbolSetId) -> Vec<AlphabetEntry> {
    alphabet(&route_frames(routes, grammar), set)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub set: SymbolSetId,
    pub max_order: usize,
    pub alphabet: Vec<String>,
    pub sequences: usize,
    pub training_symbols: u64,
    /// Moves dropped because the grammar could not name them.
    pub skipped_moves: usize,
}

/// Trains on the symbol sequences of the routes. Unnameable moves are dropped
/// from their sequence. The alphabet is every symbol seen, sorted.
pub fn train_on_routes(
    routes: &[Route],
    grammar: &Grammar,
    set: SymbolSetId,
    order: usize,
    tag: &str,
) -> Result<(VommModel, TrainReport)> {
    let mut skipped = 0;
    let sequences: Vec<Vec<String>> = routes
        .iter()
        .map(|r| {
            let symbols = route_symbols(r, grammar, set);
            skipped += symbols.iter().filter(|s| s.is_none()).count();
            symbols.into_iter().flatten().collect()
        })
        .collect();
    train_on_sequences(&sequences, set, order, tag, skipped)
}

pub fn train_on_sequences(
    sequences: &[Vec<String>],
    set: SymbolSetId,
    order: usize,
    tag: &str,
    skipped_moves: usize,
) -> Result<(VommModel, TrainReport)> {
    let names = alphabet_of(sequences);
    let mut model = train(sequences, order, &names)?;
    model.set_trained_on(tag);
    let report = TrainReport {
        set,
        max_order: model.max_order(),
        alphabet: model.alphabet().to_vec(),
        sequences: sequences.len(),
        training_symbols: model.training_symbols(),
        skipped_moves,
    };
    Ok((model, report))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestedMove {
    pub hand: Hand,
    pub symbol: String,
    /// Always true: the hand is a presentation default, not a model output.
    pub suggestion: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    /// Insert after this slot of the plan (0-based).
    pub after: usize,
    pub moves: Vec<SuggestedMove>,
    pub bits: f64,
    pub baseline_bits: f64,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothReport {
    pub set: SymbolSetId,
    pub j_max: usize,
    /// Plan symbols, `None` for gaps and moves the grammar cannot name.
    pub symbols: Vec<Option<String>>,
    /// Adjacent symbol pairs searched.
    pub anchors: usize,
    pub suggestions: Vec<Suggestion>,
}

/// Searches every adjacent pair of named plan moves for a short insertion
/// that makes the sequence more likely under `model`.
///
/// Each pair is scored against the original plan, so suggestions are
/// independent and can be accepted or rejected one at a time. The context on
/// each side is the run of named moves around the pair; gaps and unnamed
/// moves end it. Inserted moves alternate hands starting from the hand
/// opposite the preceding move.
pub fn smooth_plan(
    plan: &VariationPlan,
    model: &VommModel,
    grammar: &Grammar,
    set: SymbolSetId,
    j_max: usize,
) -> Result<SmoothReport> {
    let symbols: Vec<Option<String>> = plan
        .moves
        .iter()
        .map(|slot| match slot {
            PlanSlot::Gap => None,
            // match moves carry the resolved hold text in a plan
            PlanSlot::Move(m) => symbol_of(&m.text, false, grammar, set),
        })
        .collect();
    let d = model.max_order();
    let mut anchors = 0;
    let mut suggestions = Vec::new();
    for i in 0..symbols.len().saturating_sub(1) {
        if symbols[i].is_none() || symbols[i + 1].is_none() {
            continue;
        }
        anchors += 1;
        let start = (0..=i)
            .rev()
            .take_while(|&k| symbols[k].is_some())
            .last()
            .unwrap_or(i)
            .max((i + 1).saturating_sub(d));
        let prefix: Vec<&str> = symbols[start..=i]
            .iter()
            .flatten()
            .map(String::as_str)
            .collect();
        let suffix: Vec<&str> = symbols[i + 1..]
            .iter()
            .take(d)
            .map_while(|s| s.as_deref())
            .collect();
        let found = model.interpolate(&prefix, &suffix, j_max)?;
        if found.insertion.is_empty() {
            continue;
        }
        let mut hand = match &plan.moves[i] {
            PlanSlot::Move(m) => m.hand,
            PlanSlot::Gap => unreachable!("gaps have no symbol"),
        };
        let moves = found
            .insertion
            .into_iter()
            .map(|symbol| {
                hand = hand.other();
                SuggestedMove {
                    hand,
                    symbol,
                    suggestion: true,
                }
            })
            .collect();
        suggestions.push(Suggestion {
            after: i,
            moves,
            bits: found.bits,
            baseline_bits: found.baseline_bits,
            candidates: found.candidates,
        });
    }
    Ok(SmoothReport {
        set,
        j_max,
        symbols,
        anchors,
        suggestions,
    })
}

/// Preset name or explicit configuration; neither means `default`.
pub fn resolve_config(
    preset: Option<&str>,
    config: Option<VariationConfig>,
) -> Result<VariationConfig> {
    match (preset, config) {
        (Some(_), Some(_)) => Err(Error::validation(
            "give either a preset or a config, not both",
        )),
        (None, Some(cfg)) => Ok(cfg),
        (name, None) => {
            let name = name.unwrap_or("default");
            VariationConfig::preset(name).ok_or_else(|| {
                Error::new(
                    crate::error::ErrorKind::Validation,
                    "UnknownPreset",
                    format!("unknown preset {name:?}"),
                )
                .with_detail(json!({ "presets": VariationConfig::PRESETS }))
            })
        }
    }
}

/// Parses `lo,hi`, `lo..hi` or a single value; open ends are written empty.
pub fn parse_range(text: &str) -> Result<MetricRange> {
    let bad = || Error::validation(format!("bad range {text:?}; expected lo,hi"));
    let bound = |s: &str, default: f64| -> Result<f64> {
        let s = s.trim();
        if s.is_empty() {
            Ok(default)
        } else {
            s.parse::<f64>().map_err(|_| bad())
        }
    };
    let parts = text.split_once(',').or_else(|| text.split_once(".."));
    let range = match parts {
        Some((lo, hi)) => {
            MetricRange::new(bound(lo, f64::NEG_INFINITY)?, bound(hi, f64::INFINITY)?)
        }
        None => {
            let v = bound(text, f64::NAN)?;
            if v.is_nan() {
                return Err(bad());
            }
            MetricRange::new(v, v)
        }
    };
    if range.lo.is_nan() || range.hi.is_nan() || range.lo > range.hi {
        return Err(bad());
    }
    Ok(range)
}

/// Parses `z=52` style slices.
pub fn parse_slice(text: &str) -> Result<Slice> {
    let bad = || {
        Error::validation(format!(
            "bad slice {text:?}; expected axis=value, e.g. z=52"
        ))
    };
    let (axis, value) = text.split_once('=').ok_or_else(bad)?;
    let axis = match axis.trim().to_ascii_lowercase().as_str() {
        "x" => Axis::X,
        "y" => Axis::Y,
        "z" => Axis::Z,
        _ => return Err(bad()),
    };
    let value = value.trim().parse::<f64>().map_err(|_| bad())?;
    Ok(Slice { axis, value })
}

/// Grid around `center`: the given slice, the z slice through the center by
/// default, or the full cube.
pub fn grid(
    center: routevar_core::chaos::State3,
    n: usize,
    spacing: f64,
    slice: Option<Slice>,
    full_3d: bool,
) -> Result<GridSpec> {
    if full_3d && slice.is_some() {
        return Err(Error::validation(
            "a slice and a full 3D sweep are exclusive",
        ));
    }
    Ok(match (slice, full_3d) {
        (_, true) => GridSpec {
            center,
            n_per_axis: n,
            spacing,
            slice: None,
        },
        (Some(slice), false) => GridSpec {
            center,
            n_per_axis: n,
            spacing,
            slice: Some(slice),
        },
        (None, false) => GridSpec::slice_through(center, n, spacing, Axis::Z),
    })
}

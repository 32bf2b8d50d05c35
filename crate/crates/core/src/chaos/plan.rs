use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{assignment, ChaosError, NnaMode, Plane, State3, VariationConfig};
use crate::crdl::{Hand, Route};
use crate::FORMAT_VERSION;

/// One output move and where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedMove {
    pub hand: Hand,
    pub text: String,
    pub source_route: String,
    /// Index into the concatenation of all input moves.
    pub source_index: usize,
    /// Index within `source_route`.
    pub source_move: usize,
    /// The output position drew a different input position.
    pub changed: bool,
    /// The symbol was a match move in its input route (rendered "(match?)").
    pub match_note: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanSlot {
    Move(PlannedMove),
    /// The directional x-axis search found no neighbour; left for the setter to fill in.
    Gap,
}

impl PlanSlot {
    pub fn as_move(&self) -> Option<&PlannedMove> {
        match self {
            PlanSlot::Move(m) => Some(m),
            PlanSlot::Gap => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteCount {
    pub route: String,
    /// Moves the route contributed to the input sequence.
    pub input_moves: usize,
    /// Output positions drawing from this route.
    pub drawn: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub total: usize,
    pub changed: usize,
    pub gaps: usize,
    pub routes: Vec<RouteCount>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationPlan {
    pub format_version: u32,
    pub inputs: Vec<String>,
    pub config: VariationConfig,
    pub moves: Vec<PlanSlot>,
    pub summary: PlanSummary,
}

impl VariationPlan {
    pub fn planned_moves(&self) -> impl Iterator<Item = &PlannedMove> {
        self.moves.iter().filter_map(PlanSlot::as_move)
    }
}

struct InputSymbol<'a> {
    hand: Hand,
    text: &'a str,
    route: usize,
    offset: usize,
    was_match: bool,
}

/// Flattens the routes in order, resolving every match move to the text of
/// the most recent earlier move by the other hand in the same route.
fn input_symbols(inputs: &[Route]) -> Result<Vec<InputSymbol<'_>>, ChaosError> {
    let mut symbols = Vec::new();
    for (route_idx, route) in inputs.iter().enumerate() {
        let mut last: [Option<&str>; 2] = [None, None];
        let slot = |h: Hand| match h {
            Hand::Left => 0,
            Hand::Right => 1,
        };
        for (offset, mv) in route.moves.iter().enumerate() {
            let text = if mv.is_match {
                last[slot(mv.hand.other())].ok_or_else(|| ChaosError::LeadingMatch {
                    route: route.id.clone(),
                    index: offset,
                })?
            } else {
                mv.text.as_str()
            };
            last[slot(mv.hand)] = Some(text);
            symbols.push(InputSymbol {
                hand: mv.hand,
                text,
                route: route_idx,
                offset,
                was_match: mv.is_match,
            });
        }
    }
    Ok(symbols)
}

pub fn generate_variation(
    inputs: &[Route],
    cfg: &VariationConfig,
) -> Result<VariationPlan, ChaosError> {
    let symbols = input_symbols(inputs)?;
    let n = symbols.len();
    if n == 0 {
        return Err(ChaosError::EmptyInput);
    }
    let assigned = assignment(cfg, n)?;

    let mut drawn = alloc::vec![0usize; inputs.len()];
    let mut changed = 0;
    let mut gaps = 0;
    let moves = assigned
        .iter()
        .enumerate()
        .map(|(j, k)| match *k {
            None => {
                gaps += 1;
                PlanSlot::Gap
            }
            Some(k) => {
                let sym = &symbols[k];
                drawn[sym.route] += 1;
                if k != j {
                    changed += 1;
                }
                PlanSlot::Move(PlannedMove {
                    hand: sym.hand,
                    text: sym.text.to_string(),
                    source_route: inputs[sym.route].id.clone(),
                    source_index: k,
                    source_move: sym.offset,
                    changed: k != j,
                    match_note: sym.was_match,
                })
            }
        })
        .collect();

    let routes = inputs
        .iter()
        .zip(&drawn)
        .map(|(r, &d)| RouteCount {
            route: r.id.clone(),
            input_moves: r.moves.len(),
            drawn: d,
        })
        .collect();
    Ok(VariationPlan {
        format_version: FORMAT_VERSION,
        inputs: inputs.iter().map(|r| r.id.clone()).collect(),
        config: *cfg,
        moves,
        summary: PlanSummary {
            total: n,
            changed,
            gaps,
            routes,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanFormat {
    Text,
    Json,
}

fn fmt_state(s: &State3) -> String {
    format!("({}, {}, {})", s.x, s.y, s.z)
}

fn nna_label(cfg: &VariationConfig) -> String {
    match cfg.nna_mode {
        NnaMode::Euclid3D => "euclid3d".into(),
        NnaMode::Euclid2D => {
            let plane = match cfg.plane {
                Plane::XY => "xy",
                Plane::XZ => "xz",
                Plane::YZ => "yz",
            };
            format!("euclid2d/{plane}")
        }
        NnaMode::DabbyX => match cfg.dabby_rule {
            super::DabbyRule::AtLeast => "dabby-x/at-least".into(),
            super::DabbyRule::AtMost => "dabby-x/at-most".into(),
        },
    }
}

fn render_text(plan: &VariationPlan) -> String {
    let cfg = &plan.config;
    let mut out = String::new();
    let _ = writeln!(out, "# Chaotic route plan");
    let inputs: Vec<String> = plan
        .summary
        .routes
        .iter()
        .map(|r| format!("{} ({} moves)", r.route, r.input_moves))
        .collect();
    let _ = writeln!(out, "# inputs: {}", inputs.join(", "));
    let _ = writeln!(
        out,
        "# ic_r {} ic_v {} h {} skip {} nna {}",
        fmt_state(&cfg.ic_r),
        fmt_state(&cfg.ic_v),
        cfg.h,
        cfg.skip,
        nna_label(cfg)
    );
    let _ = writeln!(
        out,
        "# varied: {} of {} moves",
        plan.summary.changed, plan.summary.total
    );
    if plan.summary.gaps > 0 {
        let _ = writeln!(out, "# gaps: {} (fill in the blanks)", plan.summary.gaps);
    }
    let _ = writeln!(out, "- - -");

    let lines: Vec<(String, String)> = plan
        .moves
        .iter()
        .map(|slot| match slot {
            PlanSlot::Gap => ("?".into(), "[gap]".into()),
            PlanSlot::Move(m) => {
                let mut body = format!("{} {}", m.hand, m.text);
                if m.match_note {
                    body.push_str(" (match?)");
                }
                let origin = format!("{} #{}", m.source_route, m.source_move + 1);
                let note = if m.changed {
                    format!("[changed: {origin}]")
                } else {
                    format!("[{origin}]")
                };
                (body, note)
            }
        })
        .collect();
    let width = lines
        .iter()
        .map(|(b, _)| b.chars().count())
        .max()
        .unwrap_or(0);
    for (body, note) in lines {
        let pad = width - body.chars().count();
        let _ = writeln!(out, "{body}{:pad$}  {note}", "");
    }
    out
}

pub fn render_plan(plan: &VariationPlan, format: PlanFormat) -> String {
    match format {
        PlanFormat::Text => render_text(plan),
        PlanFormat::Json => {
            let mut json = serde_json::to_string_pretty(plan).expect("plan serializes");
            json.push('\n');
            json
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crdl::parse_crdl;

    fn route(id: &str, doc: &str) -> Route {
        parse_crdl(doc).unwrap().with_id(id)
    }

    #[test]
    fn identity_config_reproduces_input() {
        let r = route("a", "---\nR jug\nL crimp\nR sloper\nL match\nR pinch");
        let cfg = VariationConfig::preset("identity").unwrap();
        let plan = generate_variation(&[r], &cfg).unwrap();
        assert_eq!(plan.summary.changed, 0);
        let texts: Vec<&str> = plan.planned_moves().map(|m| m.text.as_str()).collect();
        assert_eq!(texts, ["jug", "crimp", "sloper", "sloper", "pinch"]);
        let text = render_plan(&plan, PlanFormat::Text);
        assert!(!text.contains("changed"), "{text}");
        assert!(text.contains("L sloper (match?)"), "{text}");
    }

    #[test]
    fn single_move() {
        let plan =
            generate_variation(&[route("a", "---\nR jug")], &VariationConfig::default()).unwrap();
        assert_eq!(plan.moves.len(), 1);
        let m = plan.moves[0].as_move().unwrap();
        assert!(!m.changed);
        assert_eq!(m.text, "jug");
    }

    #[test]
    fn leading_match_is_rejected() {
        let err = generate_variation(&[route("a", "---\nR match\nL jug")], &Default::default())
            .unwrap_err();
        assert_eq!(
            err,
            ChaosError::LeadingMatch {
                route: "a".into(),
                index: 0
            }
        );
        // same hand before does not count
        let err = generate_variation(&[route("b", "---\nR jug\nR match")], &Default::default())
            .unwrap_err();
        assert_eq!(err.code(), "LeadingMatch");
    }

    #[test]
    fn match_resolution_chains_through_matches() {
        let r = route("a", "---\nR jug\nL match\nR match");
        let symbols = input_symbols(core::slice::from_ref(&r)).unwrap();
        let texts: Vec<&str> = symbols.iter().map(|s| s.text).collect();
        assert_eq!(texts, ["jug", "jug", "jug"]);
    }

    #[test]
    fn empty_input() {
        assert_eq!(
            generate_variation(&[], &Default::default()),
            Err(ChaosError::EmptyInput)
        );
    }

    #[test]
    fn json_round_trip() {
        let r = route(
            "a",
            "---\nR jug\nL crimp\nR sloper\nL match\nR pinch\nL edge",
        );
        let plan = generate_variation(&[r], &VariationConfig::default()).unwrap();
        let json = render_plan(&plan, PlanFormat::Json);
        let back: VariationPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn gaps_render_as_blanks() {
        let doc = "---\nR a\nL b\nR c\nL d\nR e\nL f\nR g\nL h\nR i\nL j\nR k\nL l";
        let cfg = VariationConfig {
            nna_mode: NnaMode::DabbyX,
            ..Default::default()
        };
        let plan = generate_variation(&[route("a", doc)], &cfg).unwrap();
        assert_eq!(plan.moves.len(), 12);
        let gaps = plan
            .moves
            .iter()
            .filter(|s| matches!(s, PlanSlot::Gap))
            .count();
        assert_eq!(gaps, plan.summary.gaps);
        if gaps > 0 {
            assert!(render_plan(&plan, PlanFormat::Text).contains("[gap]"));
        }
    }
}

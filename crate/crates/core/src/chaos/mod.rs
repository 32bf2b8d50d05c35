//! Chaotic variation of move sequences.
//!
//! Two trajectories of the Lorenz system are integrated, one from the
//! reference initial condition `ic_r` and one from the variation initial
//! condition `ic_v`. The input moves are attached, in order, to the points of
//! the reference trajectory. Stepping through the variation trajectory, each
//! point is mapped to its nearest reference point, and the move attached to
//! that reference point is emitted. Nearby initial conditions therefore yield
//! re-orderings that keep most of the input's local structure.

mod lorenz;
mod nna;
mod plan;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use lorenz::{integrate, lorenz_deriv, rk4_step, LorenzParams, State3, Trajectory};
pub use nna::{nearest_neighbor, DabbyRule, Nna, NnaMode, Plane};
pub use plan::{
    generate_variation, render_plan, PlanFormat, PlanSlot, PlanSummary, PlannedMove, RouteCount,
    VariationPlan,
};

pub const DEFAULT_IC_R: State3 = State3::new(-13.0, -12.0, 52.0);
pub const DEFAULT_IC_V: State3 = State3::new(-16.0, -12.0, 52.0);
pub const MORE_VARIATION_IC_V: State3 = State3::new(-16.0, -13.5, 52.0);
pub const DEFAULT_STEP: f64 = 0.015;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationConfig {
    pub params: LorenzParams,
    pub h: f64,
    pub ic_r: State3,
    pub ic_v: State3,
    /// Integration steps discarded before sampling, applied to both trajectories.
    #[serde(default)]
    pub skip: usize,
    #[serde(default)]
    pub nna_mode: NnaMode,
    #[serde(default)]
    pub plane: Plane,
    #[serde(default)]
    pub dabby_rule: DabbyRule,
}

impl Default for VariationConfig {
    fn default() -> Self {
        VariationConfig {
            params: LorenzParams::default(),
            h: DEFAULT_STEP,
            ic_r: DEFAULT_IC_R,
            ic_v: DEFAULT_IC_V,
            skip: 0,
            nna_mode: NnaMode::Euclid2D,
            plane: Plane::XY,
            dabby_rule: DabbyRule::AtLeast,
        }
    }
}

impl VariationConfig {
    pub fn nna(&self) -> Nna {
        Nna {
            mode: self.nna_mode,
            plane: self.plane,
            dabby_rule: self.dabby_rule,
        }
    }

    /// Named presets: `default`, `more-variation`, and `identity`
    /// (`ic_v == ic_r`, useful to check a pipeline end to end).
    pub fn preset(name: &str) -> Option<VariationConfig> {
        let normalized: String = name
            .chars()
            .map(|c| {
                if c == '_' || c == ' ' {
                    '-'
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect();
        match normalized.as_str() {
            "default" => Some(VariationConfig::default()),
            "more-variation" => Some(VariationConfig {
                ic_v: MORE_VARIATION_IC_V,
                skip: 100,
                ..Default::default()
            }),
            "identity" => Some(VariationConfig {
                ic_v: DEFAULT_IC_R,
                ..Default::default()
            }),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 3] = ["default", "more-variation", "identity"];
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChaosError {
    EmptyInput,
    /// A route's match move has no earlier move by the other hand to copy.
    LeadingMatch {
        route: String,
        index: usize,
    },
    /// The integration left the finite range at the given step.
    NonFiniteState {
        step: usize,
    },
    InvalidConfig(&'static str),
}

impl ChaosError {
    pub fn code(&self) -> &'static str {
        match self {
            ChaosError::EmptyInput => "EmptyInput",
            ChaosError::LeadingMatch { .. } => "LeadingMatch",
            ChaosError::NonFiniteState { .. } => "NonFiniteState",
            ChaosError::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

impl fmt::Display for ChaosError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChaosError::EmptyInput => write!(f, "no input moves"),
            ChaosError::LeadingMatch { route, index } => write!(
                f,
                "route {route:?} move {}: match has no preceding move by the other hand",
                index + 1
            ),
            ChaosError::NonFiniteState { step } => {
                write!(f, "trajectory diverged (non-finite state) at step {step}")
            }
            ChaosError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for ChaosError {}

/// For each variation point `j`, the index of its nearest reference point.
pub fn assign_indices(
    reference: &Trajectory,
    variation: &Trajectory,
    nna: &Nna,
) -> Vec<Option<usize>> {
    variation
        .points
        .iter()
        .map(|v| nearest_neighbor(v, &reference.points, nna))
        .collect()
}

/// Integrates both trajectories of length `n` and returns the assignment.
pub fn assignment(cfg: &VariationConfig, n: usize) -> Result<Vec<Option<usize>>, ChaosError> {
    let reference = integrate(cfg.ic_r, n, cfg)?;
    let variation = integrate(cfg.ic_v, n, cfg)?;
    Ok(assign_indices(&reference, &variation, &cfg.nna()))
}

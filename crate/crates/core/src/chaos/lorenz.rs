use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::{ChaosError, VariationConfig};

/// Coefficients of the Lorenz system `x' = a(y - x)`, `y' = x(r - z) - y`,
/// `z' = xy - bz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub a: f64,
    pub r: f64,
    pub b: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        LorenzParams {
            a: 16.0,
            r: 45.0,
            b: 4.0,
        }
    }
}

impl LorenzParams {
    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.r.is_finite() && self.b.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct State3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State3 {
    pub const fn new(x: f64, y: f64, z: f64) -> State3 {
        State3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for State3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        State3 { x, y, z }
    }
}

impl Add for State3 {
    type Output = State3;
    fn add(self, o: State3) -> State3 {
        State3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for State3 {
    type Output = State3;
    fn sub(self, o: State3) -> State3 {
        State3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<State3> for f64 {
    type Output = State3;
    fn mul(self, s: State3) -> State3 {
        State3::new(self * s.x, self * s.y, self * s.z)
    }
}

pub fn lorenz_deriv(s: State3, p: &LorenzParams) -> State3 {
    State3 {
        x: p.a * (s.y - s.x),
        y: s.x * (p.r - s.z) - s.y,
        z: s.x * s.y - p.b * s.z,
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step(s: State3, h: f64, p: &LorenzParams) -> State3 {
    let k1 = lorenz_deriv(s, p);
    let k2 = lorenz_deriv(s + (0.5 * h) * k1, p);
    let k3 = lorenz_deriv(s + (0.5 * h) * k2, p);
    let k4 = lorenz_deriv(s + h * k3, p);
    s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// A sampled trajectory: `points[0]` is the state after `skipped` steps from `ic`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<State3>,
    pub ic: State3,
    pub step: f64,
    pub skipped: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Discards `cfg.skip` steps from `ic`, then records `n` consecutive states.
pub fn integrate(ic: State3, n: usize, cfg: &VariationConfig) -> Result<Trajectory, ChaosError> {
    if n == 0 {
        return Err(ChaosError::EmptyInput);
    }
    if !(cfg.h > 0.0 && cfg.h.is_finite()) {
        return Err(ChaosError::InvalidConfig(
            "step size h must be positive and finite",
        ));
    }
    if !cfg.params.is_finite() {
        return Err(ChaosError::InvalidConfig(
            "Lorenz parameters must be finite",
        ));
    }
    if !ic.is_finite() {
        return Err(ChaosError::NonFiniteState { step: 0 });
    }
    let mut state = ic;
    for step in 1..=cfg.skip {
        state = rk4_step(state, cfg.h, &cfg.params);
        if !state.is_finite() {
            return Err(ChaosError::NonFiniteState { step });
        }
    }
    let mut points = Vec::with_capacity(n);
    points.push(state);
    for i in 1..n {
        state = rk4_step(state, cfg.h, &cfg.params);
        if !state.is_finite() {
            return Err(ChaosError::NonFiniteState { step: cfg.skip + i });
        }
        points.push(state);
    }
    Ok(Trajectory {
        points,
        ic,
        step: cfg.h,
        skipped: cfg.skip,
    })
}

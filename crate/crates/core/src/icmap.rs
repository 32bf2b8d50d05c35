//! Effect/change landscape over candidate variation initial conditions.
//!
//! For a reference initial condition `ic_r`, candidate `ic_v` values are laid
//! out on a regular grid around it. Each candidate is scored by two numbers
//! computed from the nearest-neighbour assignment on a length-`n` sequence:
//!
//! - *effect*: how many output positions draw a different input position;
//! - *change*: the mean index displacement `|k_j - j|` over those positions.
//!
//! Both depend only on the assignment, so the sweep uses the index sequence
//! `0..n` and never looks at move text.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::chaos::{assign_indices, integrate, ChaosError, State3, Trajectory, VariationConfig};
use crate::FORMAT_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn get(self, s: &State3) -> f64 {
        match self {
            Axis::X => s.x,
            Axis::Y => s.y,
            Axis::Z => s.z,
        }
    }

    fn set(self, s: &mut State3, v: f64) {
        match self {
            Axis::X => s.x = v,
            Axis::Y => s.y = v,
            Axis::Z => s.z = v,
        }
    }
}

/// Holds one axis at a fixed value, reducing the grid to a plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub axis: Axis,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: State3,
    pub n_per_axis: usize,
    pub spacing: f64,
    #[serde(default)]
    pub slice: Option<Slice>,
}

impl GridSpec {
    /// The 2D slice through the center, fixing `axis` at the center's value.
    pub fn slice_through(center: State3, n: usize, spacing: f64, axis: Axis) -> GridSpec {
        GridSpec {
            center,
            n_per_axis: n,
            spacing,
            slice: Some(Slice {
                axis,
                value: axis.get(&center),
            }),
        }
    }

    pub fn free_axes(&self) -> Vec<Axis> {
        Axis::ALL
            .into_iter()
            .filter(|a| self.slice.is_none_or(|s| s.axis != *a))
            .collect()
    }

    pub fn cell_count(&self) -> usize {
        self.n_per_axis.pow(self.free_axes().len() as u32)
    }

    fn validate(&self) -> Result<(), MapError> {
        if self.n_per_axis == 0 {
            return Err(MapError::InvalidSpec("n_per_axis must be at least 1"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(MapError::InvalidSpec("spacing must be positive and finite"));
        }
        if !self.center.is_finite() || self.slice.is_some_and(|s| !s.value.is_finite()) {
            return Err(MapError::InvalidSpec("grid coordinates must be finite"));
        }
        Ok(())
    }

    /// Coordinate of grid index `i` along a free axis.
    pub fn coordinate(&self, axis: Axis, i: usize) -> f64 {
        let half = (self.n_per_axis / 2) as f64;
        axis.get(&self.center) + self.spacing * (i as f64 - half)
    }

    /// Per-axis grid indices of a row-major cell index (last free axis fastest).
    pub fn unravel(&self, mut index: usize) -> Vec<usize> {
        let axes = self.free_axes().len();
        let mut out = alloc::vec![0; axes];
        for slot in out.iter_mut().rev() {
            *slot = index % self.n_per_axis;
            index /= self.n_per_axis;
        }
        out
    }

    pub fn ic_at(&self, index: usize) -> State3 {
        let mut ic = self.center;
        if let Some(s) = self.slice {
            s.axis.set(&mut ic, s.value);
        }
        for (axis, i) in self.free_axes().into_iter().zip(self.unravel(index)) {
            axis.set(&mut ic, self.coordinate(axis, i));
        }
        ic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub ic: State3,
    pub effect: usize,
    pub change: f64,
    /// The cell's trajectory diverged; metrics are zero and meaningless.
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub poisoned: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ICMap {
    pub format_version: u32,
    pub spec: GridSpec,
    pub sequence_length: usize,
    /// Sweep configuration; `ic_v` is set to `ic_r` and is not used.
    pub cfg: VariationConfig,
    pub cells: Vec<CellMetrics>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapError {
    InvalidSpec(&'static str),
    EmptySequence,
    Chaos(ChaosError),
    VersionMismatch { found: u32, expected: u32 },
    CorruptFile(String),
}

impl MapError {
    pub fn code(&self) -> &'static str {
        match self {
            MapError::InvalidSpec(_) => "InvalidSpec",
            MapError::EmptySequence => "EmptyInput",
            MapError::Chaos(e) => e.code(),
            MapError::VersionMismatch { .. } => "VersionMismatch",
            MapError::CorruptFile(_) => "CorruptFile",
        }
    }
}

impl From<ChaosError> for MapError {
    fn from(e: ChaosError) -> Self {
        MapError::Chaos(e)
    }
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapError::InvalidSpec(msg) => write!(f, "invalid grid: {msg}"),
            MapError::EmptySequence => write!(f, "sequence length must be at least 1"),
            MapError::Chaos(e) => write!(f, "{e}"),
            MapError::VersionMismatch { found, expected } => {
                write!(f, "map format version {found}, expected {expected}")
            }
            MapError::CorruptFile(msg) => write!(f, "corrupt map file: {msg}"),
        }
    }
}

impl core::error::Error for MapError {}

/// Effect and change of an assignment `k_j` over positions `j`.
/// Positions with no neighbour count towards effect but not towards change.
pub fn assignment_metrics(assigned: &[Option<usize>]) -> (usize, f64) {
    let mut effect = 0;
    let mut displaced = 0;
    let mut total = 0usize;
    for (j, k) in assigned.iter().enumerate() {
        match *k {
            Some(k) if k == j => {}
            Some(k) => {
                effect += 1;
                displaced += 1;
                total += k.abs_diff(j);
            }
            None => effect += 1,
        }
    }
    let change = if displaced == 0 {
        0.0
    } else {
        total as f64 / displaced as f64
    };
    (effect, change)
}

pub fn effect_change(
    ic_v: State3,
    cfg: &VariationConfig,
    n: usize,
) -> Result<CellMetrics, MapError> {
    if n == 0 {
        return Err(MapError::EmptySequence);
    }
    let reference = integrate(cfg.ic_r, n, cfg)?;
    let variation = integrate(ic_v, n, cfg)?;
    let (effect, change) = assignment_metrics(&assign_indices(&reference, &variation, &cfg.nna()));
    Ok(CellMetrics {
        ic: ic_v,
        effect,
        change,
        poisoned: false,
    })
}

/// Per-cell evaluator shared by serial and parallel map builds. The reference
/// trajectory is integrated once; [`MapBuilder::evaluate`] takes `&self` and
/// can be called from many threads.
pub struct MapBuilder {
    spec: GridSpec,
    cfg: VariationConfig,
    n: usize,
    reference: Trajectory,
}

impl MapBuilder {
    pub fn new(spec: GridSpec, cfg: &VariationConfig, n: usize) -> Result<MapBuilder, MapError> {
        spec.validate()?;
        if n == 0 {
            return Err(MapError::EmptySequence);
        }
        let cfg = VariationConfig {
            ic_v: cfg.ic_r,
            ..*cfg
        };
        let reference = integrate(cfg.ic_r, n, &cfg)?;
        Ok(MapBuilder {
            spec,
            cfg,
            n,
            reference,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.spec.cell_count()
    }

    pub fn evaluate(&self, index: usize) -> CellMetrics {
        let ic = self.spec.ic_at(index);
        match integrate(ic, self.n, &self.cfg) {
            Ok(variation) => {
                let assigned = assign_indices(&self.reference, &variation, &self.cfg.nna());
                let (effect, change) = assignment_metrics(&assigned);
                CellMetrics {
                    ic,
                    effect,
                    change,
                    poisoned: false,
                }
            }
            Err(_) => CellMetrics {
                ic,
                effect: 0,
                change: 0.0,
                poisoned: true,
            },
        }
    }

    pub fn finish(self, cells: Vec<CellMetrics>) -> ICMap {
        debug_assert_eq!(cells.len(), self.cell_count());
        ICMap {
            format_version: FORMAT_VERSION,
            spec: self.spec,
            sequence_length: self.n,
            cfg: self.cfg,
            cells,
        }
    }
}

/// Serial sweep over every grid cell in row-major order.
pub fn build_map(spec: GridSpec, cfg: &VariationConfig, n: usize) -> Result<ICMap, MapError> {
    let builder = MapBuilder::new(spec, cfg, n)?;
    let cells = (0..builder.cell_count())
        .map(|i| builder.evaluate(i))
        .collect();
    Ok(builder.finish(cells))
}

/// Inclusive metric range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRange {
    pub lo: f64,
    pub hi: f64,
}

impl MetricRange {
    pub fn new(lo: f64, hi: f64) -> MetricRange {
        MetricRange { lo, hi }
    }

    pub fn everything() -> MetricRange {
        MetricRange {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn midpoint(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo,
            (false, true) => self.hi,
            (false, false) => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Row-major cell index in the map.
    pub index: usize,
    pub cell: CellMetrics,
    /// Euclidean distance of (effect, change) to the range midpoints.
    pub distance: f64,
}

/// Up to `limit` non-poisoned cells inside both ranges, closest to the range
/// midpoints first; equal distances keep grid order.
pub fn pick_ic(
    map: &ICMap,
    effect: MetricRange,
    change: MetricRange,
    limit: usize,
) -> Vec<Candidate> {
    let (me, mc) = (effect.midpoint(), change.midpoint());
    let mut found: Vec<Candidate> = map
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            !c.poisoned && effect.contains(c.effect as f64) && change.contains(c.change)
        })
        .map(|(index, cell)| {
            let de = cell.effect as f64 - me;
            let dc = cell.change - mc;
            Candidate {
                index,
                cell: *cell,
                distance: libm::sqrt(de * de + dc * dc),
            }
        })
        .collect();
    found.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .unwrap_or(Ordering::Equal)
    });
    found.truncate(limit);
    found
}

impl ICMap {
    /// Index of the cell whose initial condition is the grid center.
    pub fn center_index(&self) -> usize {
        let half = self.spec.n_per_axis / 2;
        self.spec
            .free_axes()
            .iter()
            .fold(0, |acc, _| acc * self.spec.n_per_axis + half)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("map serializes")
    }

    pub fn from_json(text: &str) -> Result<ICMap, MapError> {
        #[derive(Deserialize)]
        struct VersionProbe {
            format_version: u32,
        }
        let probe: VersionProbe =
            serde_json::from_str(text).map_err(|e| MapError::CorruptFile(alloc::format!("{e}")))?;
        if probe.format_version != FORMAT_VERSION {
            return Err(MapError::VersionMismatch {
                found: probe.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let map: ICMap =
            serde_json::from_str(text).map_err(|e| MapError::CorruptFile(alloc::format!("{e}")))?;
        if map.spec.validate().is_err() || map.cells.len() != map.spec.cell_count() {
            return Err(MapError::CorruptFile(
                "cell count does not match grid".into(),
            ));
        }
        Ok(map)
    }
}

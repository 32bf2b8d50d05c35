//! Nearest-neighbour mapping from variation points back to reference points.

use serde::{Deserialize, Serialize};

use super::State3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NnaMode {
    /// Euclidean distance on a coordinate plane.
    #[default]
    #[serde(rename = "euclid2d")]
    Euclid2D,
    #[serde(rename = "euclid3d")]
    Euclid3D,
    /// Unidimensional, directional search along x; may find no neighbour.
    #[serde(rename = "dabby_x")]
    DabbyX,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    #[default]
    XY,
    XZ,
    YZ,
}

/// Which side of the target the directional x-axis search accepts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DabbyRule {
    /// Candidates with `x >= target.x`.
    #[default]
    AtLeast,
    /// Candidates with `x <= target.x`.
    AtMost,
}

/// A fully specified neighbour search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Nna {
    pub mode: NnaMode,
    pub plane: Plane,
    pub dabby_rule: DabbyRule,
}

impl Nna {
    fn project(&self, s: &State3) -> (f64, f64) {
        match self.plane {
            Plane::XY => (s.x, s.y),
            Plane::XZ => (s.x, s.z),
            Plane::YZ => (s.y, s.z),
        }
    }

    /// Comparable distance from `target` to `candidate`, or `None` if the
    /// candidate is not admissible. Squared for the Euclidean modes.
    fn distance(&self, target: &State3, candidate: &State3) -> Option<f64> {
        match self.mode {
            NnaMode::Euclid3D => {
                let d = *candidate - *target;
                Some(d.x * d.x + d.y * d.y + d.z * d.z)
            }
            NnaMode::Euclid2D => {
                let (tu, tv) = self.project(target);
                let (cu, cv) = self.project(candidate);
                let (du, dv) = (cu - tu, cv - tv);
                Some(du * du + dv * dv)
            }
            NnaMode::DabbyX => {
                let admissible = match self.dabby_rule {
                    DabbyRule::AtLeast => candidate.x >= target.x,
                    DabbyRule::AtMost => candidate.x <= target.x,
                };
                admissible.then(|| (candidate.x - target.x).abs())
            }
        }
    }
}

/// Index of the reference point nearest to `target`; ties go to the lowest index.
pub fn nearest_neighbor(target: &State3, reference: &[State3], nna: &Nna) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, candidate) in reference.iter().enumerate() {
        let Some(d) = nna.distance(target, candidate) else {
            continue;
        };
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn on_x(xs: &[f64]) -> Vec<State3> {
        xs.iter().map(|&x| State3::new(x, 0.0, 0.0)).collect()
    }

    #[test]
    fn dabby_picks_next_at_or_above() {
        let reference = on_x(&[1.0, 2.0, 3.0]);
        let nna = Nna {
            mode: NnaMode::DabbyX,
            ..Default::default()
        };
        assert_eq!(
            nearest_neighbor(&State3::new(2.5, 0.0, 0.0), &reference, &nna),
            Some(2)
        );
        assert_eq!(
            nearest_neighbor(&State3::new(2.0, 9.0, 9.0), &reference, &nna),
            Some(1)
        );
        assert_eq!(
            nearest_neighbor(&State3::new(3.5, 0.0, 0.0), &reference, &nna),
            None
        );
    }

    #[test]
    fn dabby_at_most_rule() {
        let reference = on_x(&[1.0, 2.0, 3.0]);
        let nna = Nna {
            mode: NnaMode::DabbyX,
            dabby_rule: DabbyRule::AtMost,
            ..Default::default()
        };
        assert_eq!(
            nearest_neighbor(&State3::new(2.5, 0.0, 0.0), &reference, &nna),
            Some(1)
        );
        assert_eq!(
            nearest_neighbor(&State3::new(0.5, 0.0, 0.0), &reference, &nna),
            None
        );
    }

    #[test]
    fn exact_hit() {
        let reference: Vec<State3> = (0..10)
            .map(|i| State3::new(i as f64, (i * i) as f64, -(i as f64)))
            .collect();
        for mode in [NnaMode::Euclid2D, NnaMode::Euclid3D] {
            for plane in [Plane::XY, Plane::XZ, Plane::YZ] {
                let nna = Nna {
                    mode,
                    plane,
                    ..Default::default()
                };
                for k in 0..10 {
                    assert_eq!(nearest_neighbor(&reference[k], &reference, &nna), Some(k));
                }
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let reference = on_x(&[0.0, 5.0, 2.0]);
        let target = State3::new(1.0, 0.0, 0.0);
        for mode in [NnaMode::Euclid2D, NnaMode::Euclid3D] {
            let nna = Nna {
                mode,
                ..Default::default()
            };
            assert_eq!(nearest_neighbor(&target, &reference, &nna), Some(0));
        }
    }

    #[test]
    fn plane_projection_ignores_third_axis() {
        let reference = [State3::new(0.0, 0.0, 100.0), State3::new(1.0, 1.0, 0.0)];
        let target = State3::new(0.0, 0.0, 0.0);
        let xy = Nna::default();
        let full = Nna {
            mode: NnaMode::Euclid3D,
            ..Default::default()
        };
        assert_eq!(nearest_neighbor(&target, &reference, &xy), Some(0));
        assert_eq!(nearest_neighbor(&target, &reference, &full), Some(1));
    }
}

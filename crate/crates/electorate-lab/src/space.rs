//! Policy-space geometry: positions, distances, and candidate placement.
//!
//! Positions are points in a d-dimensional Euclidean issue space. Everything
//! downstream (utility, choice, competition) consumes distances produced here,
//! so this module is the single place that defines how disagreement is measured.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point in the policy space, one coordinate per issue dimension.
pub type Position = Vec<f64>;

/// Errors from geometric operations.
#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{name} must be nonnegative, got {value}")]
    NegativeInput { name: &'static str, value: f64 },
    #[error("axis must be a unit vector, got norm {norm}")]
    NonUnitAxis { norm: f64 },
    #[error("position {coord} at index {index} outside bounds [{lo}, {hi}]")]
    OutOfBounds {
        index: usize,
        coord: f64,
        lo: f64,
        hi: f64,
    },
    #[error("policy space dimension must be >= 1")]
    ZeroDimension,
}

/// The ambient issue space: a dimension count plus optional per-axis bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpace {
    pub dimension: usize,
    /// Inclusive (lo, hi) interval per axis; `None` means unbounded.
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl PolicySpace {
    /// Unbounded space of the given dimension.
    pub fn unbounded(dimension: usize) -> Result<Self, SpaceError> {
        if dimension == 0 {
            return Err(SpaceError::ZeroDimension);
        }
        Ok(Self {
            dimension,
            bounds: None,
        })
    }

    /// Bounded space; one (lo, hi) interval per axis.
    pub fn bounded(bounds: Vec<(f64, f64)>) -> Result<Self, SpaceError> {
        if bounds.is_empty() {
            return Err(SpaceError::ZeroDimension);
        }
        Ok(Self {
            dimension: bounds.len(),
            bounds: Some(bounds),
        })
    }

    /// Checks that `p` has the right dimension and lies inside the bounds, if any.
    pub fn validate_position(&self, p: &[f64]) -> Result<(), SpaceError> {
        if p.len() != self.dimension {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dimension,
                got: p.len(),
            });
        }
        if let Some(bounds) = &self.bounds {
            for (i, (&coord, &(lo, hi))) in p.iter().zip(bounds.iter()).enumerate() {
                if coord < lo || coord > hi {
                    return Err(SpaceError::OutOfBounds {
                        index: i,
                        coord,
                        lo,
                        hi,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Euclidean distance between two positions of equal dimension.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64, SpaceError> {
    if a.len() != b.len() {
        return Err(SpaceError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sq.sqrt())
}

/// How a candidate moves relative to the voter-candidate axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    /// Straight away from the voter along the existing axis.
    Collinear,
    /// Perpendicular to the existing axis (requires >= 2 dimensions to realize,
    /// but the distance formula itself is dimension-free).
    Orthogonal,
}

/// Distance after a candidate at distance `delta0` moves `shift` further away.
///
/// Collinear moves add: delta0 + shift. Orthogonal moves combine by
/// Pythagoras: sqrt(delta0^2 + shift^2).
pub fn shift_away_distance(delta0: f64, shift: f64, mode: ShiftMode) -> Result<f64, SpaceError> {
    if delta0 < 0.0 {
        return Err(SpaceError::NegativeInput {
            name: "delta0",
            value: delta0,
        });
    }
    if shift < 0.0 {
        return Err(SpaceError::NegativeInput {
            name: "shift",
            value: shift,
        });
    }
    Ok(match mode {
        ShiftMode::Collinear => delta0 + shift,
        ShiftMode::Orthogonal => delta0.hypot(shift),
    })
}

/// Tolerance on the axis norm when checking it is a unit vector.
const UNIT_AXIS_TOL: f64 = 1e-9;

/// Places two candidates symmetrically about `center` along a unit `axis`:
/// (center - half_gap * axis, center + half_gap * axis).
pub fn polarize(
    center: &[f64],
    half_gap: f64,
    axis: &[f64],
) -> Result<(Position, Position), SpaceError> {
    if axis.len() != center.len() {
        return Err(SpaceError::DimensionMismatch {
            expected: center.len(),
            got: axis.len(),
        });
    }
    if half_gap < 0.0 {
        return Err(SpaceError::NegativeInput {
            name: "half_gap",
            value: half_gap,
        });
    }
    let norm: f64 = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_AXIS_TOL {
        return Err(SpaceError::NonUnitAxis { norm });
    }
    let lower: Position = center
        .iter()
        .zip(axis)
        .map(|(c, a)| c - half_gap * a)
        .collect();
    let upper: Position = center
        .iter()
        .zip(axis)
        .map(|(c, a)| c + half_gap * a)
        .collect();
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn distance_matches_pythagorean_triple() {
        assert_relative_eq!(distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn distance_rejects_dimension_mismatch() {
        assert_eq!(
            distance(&[0.0], &[1.0, 2.0]),
            Err(SpaceError::DimensionMismatch {
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn collinear_shift_adds_distances() {
        assert_relative_eq!(
            shift_away_distance(3.0, 1.0, ShiftMode::Collinear).unwrap(),
            4.0
        );
    }

    #[test]
    fn orthogonal_shift_uses_pythagoras() {
        assert_relative_eq!(
            shift_away_distance(3.0, 4.0, ShiftMode::Orthogonal).unwrap(),
            5.0
        );
    }

    #[test]
    fn shift_rejects_negative_inputs() {
        assert!(shift_away_distance(-1.0, 0.5, ShiftMode::Collinear).is_err());
        assert!(shift_away_distance(1.0, -0.5, ShiftMode::Orthogonal).is_err());
    }

    #[test]
    fn polarize_splits_symmetrically_along_axis() {
        let (lo, hi) = polarize(&[1.0, 1.0], 2.0, &[1.0, 0.0]).unwrap();
        assert_eq!(lo, vec![-1.0, 1.0]);
        assert_eq!(hi, vec![3.0, 1.0]);
    }

    #[test]
    fn polarize_rejects_non_unit_axis() {
        assert!(matches!(
            polarize(&[0.0, 0.0], 1.0, &[1.0, 1.0]),
            Err(SpaceError::NonUnitAxis { .. })
        ));
    }

    #[test]
    fn polarize_rejects_negative_half_gap() {
        assert!(matches!(
            polarize(&[0.0], -0.1, &[1.0]),
            Err(SpaceError::NegativeInput { .. })
        ));
    }

    #[test]
    fn bounded_space_validates_positions() {
        let space = PolicySpace::bounded(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert!(space.validate_position(&[0.5, 0.5]).is_ok());
        assert!(matches!(
            space.validate_position(&[0.5, 1.5]),
            Err(SpaceError::OutOfBounds { index: 1, .. })
        ));
        assert!(matches!(
            space.validate_position(&[0.5]),
            Err(SpaceError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_and_nonnegative(
            a in prop::collection::vec(-1e3..1e3f64, 1..4),
            shift in prop::collection::vec(-1e3..1e3f64, 1..4),
        ) {
            prop_assume!(a.len() == shift.len());
            let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
            let d_ab = distance(&a, &b).unwrap();
            let d_ba = distance(&b, &a).unwrap();
            prop_assert!(d_ab >= 0.0);
            prop_assert_eq!(d_ab.to_bits(), d_ba.to_bits());
        }

        #[test]
        fn distance_satisfies_triangle_inequality(
            a in prop::collection::vec(-1e3..1e3f64, 2),
            b in prop::collection::vec(-1e3..1e3f64, 2),
            c in prop::collection::vec(-1e3..1e3f64, 2),
        ) {
            let d_ac = distance(&a, &c).unwrap();
            let d_ab = distance(&a, &b).unwrap();
            let d_bc = distance(&b, &c).unwrap();
            prop_assert!(d_ac <= d_ab + d_bc + 1e-9);
        }

        #[test]
        fn orthogonal_shift_never_shrinks_distance(
            delta0 in 0.0..1e3f64,
            shift in 0.0..1e3f64,
        ) {
            let moved = shift_away_distance(delta0, shift, ShiftMode::Orthogonal).unwrap();
            prop_assert!(moved >= delta0);
            prop_assert!(moved >= shift);
            prop_assert!(moved <= delta0 + shift + 1e-9);
        }

        #[test]
        fn polarize_candidates_straddle_center(
            cx in -1e2..1e2f64,
            cy in -1e2..1e2f64,
            half_gap in 0.0..1e2f64,
            angle in 0.0..std::f64::consts::TAU,
        ) {
            let axis = [angle.cos(), angle.sin()];
            let (lo, hi) = polarize(&[cx, cy], half_gap, &axis).unwrap();
            let midpoint = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
            prop_assert!((midpoint[0] - cx).abs() < 1e-9);
            prop_assert!((midpoint[1] - cy).abs() < 1e-9);
            let gap = distance(&lo, &hi).unwrap();
            prop_assert!((gap - 2.0 * half_gap).abs() < 1e-9 * (1.0 + 2.0 * half_gap));
        }
    }
}

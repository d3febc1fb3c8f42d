//! Loss families mapping voter-candidate distance to utility.
//!
//! Four shapes cover the qualitative possibilities for how utility falls with
//! distance delta:
//!
//! - Linear:   u = -alpha * delta              (constant marginal loss)
//! - Concave:  u = -alpha * delta^beta, beta > 1  (accelerating loss)
//! - Convex:   u = -alpha * delta^beta, 0 < beta < 1  (decelerating loss)
//! - ReverseS: u = alpha * exp(-delta^2 / omega)  (concave near, convex far,
//!   inflection at t = sqrt(omega / 2))
//!
//! Indifference between two options is the negated absolute utility gap,
//! -|u(d1) - u(d2)|: 0 means perfectly indifferent, more negative means more
//! decided. How that quantity trends as candidates move is what separates the
//! families empirically.

use crate::space::Position;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The four loss shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFamily {
    Linear,
    Concave,
    Convex,
    ReverseS,
}

impl std::fmt::Display for LossFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            LossFamily::Linear => "linear",
            LossFamily::Concave => "concave",
            LossFamily::Convex => "convex",
            LossFamily::ReverseS => "reverse_s",
        };
        f.write_str(name)
    }
}

/// Errors from loss-spec validation and utility evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("{family} requires {requirement}, got beta = {beta}")]
    BadBeta {
        family: LossFamily,
        requirement: &'static str,
        beta: f64,
    },
    #[error("{family} does not use a beta exponent")]
    UnexpectedBeta { family: LossFamily },
    #[error("{family} requires a beta exponent")]
    MissingBeta { family: LossFamily },
    #[error("reverse_s requires positive omega, got {0:?}")]
    BadOmega(Option<f64>),
    #[error("{family} does not use an omega width")]
    UnexpectedOmega { family: LossFamily },
    #[error("distance must be nonnegative, got {0}")]
    NegativeDelta(f64),
    #[error("second difference requires 0 < h < delta, got delta = {delta}, h = {h}")]
    BadStep { delta: f64, h: f64 },
    #[error("curve tracing requires a 2-dimensional voter position, got {0} dimensions")]
    CurveDimension(usize),
    #[error("dimension mismatch: voter has {voter}, candidate has {candidate}")]
    DimensionMismatch { voter: usize, candidate: usize },
}

/// A parameterized loss function. Construct via the family helpers or
/// deserialize and call [`LossSpec::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub family: LossFamily,
    /// Overall scale, > 0.
    pub alpha: f64,
    /// Power-family exponent; required for Concave/Convex, fixed at 1 for Linear.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// ReverseS width; the inflection sits at sqrt(omega / 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

impl LossSpec {
    pub fn linear(alpha: f64) -> Result<Self, LossError> {
        let spec = Self {
            family: LossFamily::Linear,
            alpha,
            beta: Some(1.0),
            omega: None,
        };
        spec.validate().map(|()| spec)
    }

    pub fn concave(alpha: f64, beta: f64) -> Result<Self, LossError> {
        let spec = Self {
            family: LossFamily::Concave,
            alpha,
            beta: Some(beta),
            omega: None,
        };
        spec.validate().map(|()| spec)
    }

    pub fn convex(alpha: f64, beta: f64) -> Result<Self, LossError> {
        let spec = Self {
            family: LossFamily::Convex,
            alpha,
            beta: Some(beta),
            omega: None,
        };
        spec.validate().map(|()| spec)
    }

    pub fn reverse_s(alpha: f64, omega: f64) -> Result<Self, LossError> {
        let spec = Self {
            family: LossFamily::ReverseS,
            alpha,
            beta: None,
            omega: Some(omega),
        };
        spec.validate().map(|()| spec)
    }

    /// Checks the parameter constraints for the chosen family.
    pub fn validate(&self) -> Result<(), LossError> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(LossError::NonPositiveAlpha(self.alpha));
        }
        match self.family {
            LossFamily::Linear => {
                let beta = self.beta.unwrap_or(1.0);
                if beta != 1.0 {
                    return Err(LossError::BadBeta {
                        family: self.family,
                        requirement: "beta = 1",
                        beta,
                    });
                }
            }
            LossFamily::Concave => {
                let beta = self.beta.ok_or(LossError::MissingBeta {
                    family: self.family,
                })?;
                if !(beta > 1.0) || !beta.is_finite() {
                    return Err(LossError::BadBeta {
                        family: self.family,
                        requirement: "beta > 1",
                        beta,
                    });
                }
            }
            LossFamily::Convex => {
                let beta = self.beta.ok_or(LossError::MissingBeta {
                    family: self.family,
                })?;
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(LossError::BadBeta {
                        family: self.family,
                        requirement: "0 < beta < 1",
                        beta,
                    });
                }
            }
            LossFamily::ReverseS => {
                if let Some(beta) = self.beta {
                    return Err(LossError::BadBeta {
                        family: self.family,
                        requirement: "no beta",
                        beta,
                    });
                }
                match self.omega {
                    Some(w) if w > 0.0 && w.is_finite() => {}
                    other => return Err(LossError::BadOmega(other)),
                }
            }
        }
        if self.family != LossFamily::ReverseS && self.omega.is_some() {
            return Err(LossError::UnexpectedOmega {
                family: self.family,
            });
        }
        Ok(())
    }

    /// Utility of an option at distance `delta` from the voter's ideal point.
    pub fn utility(&self, delta: f64) -> Result<f64, LossError> {
        if delta < 0.0 || delta.is_nan() {
            return Err(LossError::NegativeDelta(delta));
        }
        Ok(self.utility_unchecked(delta))
    }

    /// Utility without the sign check; callers guarantee delta >= 0.
    /// Hot paths (simulation, competition grids) use this directly.
    #[inline]
    pub fn utility_unchecked(&self, delta: f64) -> f64 {
        match self.family {
            LossFamily::Linear => -self.alpha * delta,
            LossFamily::Concave | LossFamily::Convex => {
                -self.alpha * delta.powf(self.beta.unwrap_or(1.0))
            }
            LossFamily::ReverseS => self.alpha * (-delta * delta / self.omega.unwrap_or(1.0)).exp(),
        }
    }

    /// Indifference between options at distances `d1` and `d2`:
    /// -|u(d1) - u(d2)|. Always <= 0; equals 0 exactly when d1 == d2.
    pub fn indifference(&self, d1: f64, d2: f64) -> Result<f64, LossError> {
        let u1 = self.utility(d1)?;
        let u2 = self.utility(d2)?;
        Ok(-(u1 - u2).abs())
    }

    /// Distance of the ReverseS inflection point, sqrt(omega / 2); `None` for
    /// families with no curvature change.
    pub fn inflection(&self) -> Option<f64> {
        match self.family {
            LossFamily::ReverseS => self.omega.map(|w| (w / 2.0).sqrt()),
            _ => None,
        }
    }

    /// Sign of the centered second difference u(delta-h) - 2u(delta) + u(delta+h),
    /// classified against a curvature tolerance of 1e-9 * alpha.
    pub fn second_difference_sign(&self, delta: f64, h: f64) -> Result<CurvatureSign, LossError> {
        if !(h > 0.0 && h < delta) {
            return Err(LossError::BadStep { delta, h });
        }
        let d2 = self.utility(delta - h)? - 2.0 * self.utility(delta)? + self.utility(delta + h)?;
        let eps = 1e-9 * self.alpha;
        Ok(if d2 > eps {
            CurvatureSign::Positive
        } else if d2 < -eps {
            CurvatureSign::Negative
        } else {
            CurvatureSign::Zero
        })
    }

    /// Separable utility: the loss is applied per dimension to |voter_d - cand_d|
    /// and summed, instead of once to the Euclidean distance.
    pub fn issue_based_utility(&self, voter: &[f64], candidate: &[f64]) -> Result<f64, LossError> {
        if voter.len() != candidate.len() {
            return Err(LossError::DimensionMismatch {
                voter: voter.len(),
                candidate: candidate.len(),
            });
        }
        let mut total = 0.0;
        for (v, c) in voter.iter().zip(candidate) {
            total += self.utility_unchecked((v - c).abs());
        }
        Ok(total)
    }
}

/// Classified sign of a second difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurvatureSign {
    Negative,
    Zero,
    Positive,
}

/// Which utility aggregation an indifference curve is traced under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// u applied to the Euclidean distance; level sets are circles.
    Spatial,
    /// Per-dimension losses summed; level sets depend on the family.
    IssueBased,
}

/// Radius tolerance for the radial bisection.
const CURVE_BISECT_TOL: f64 = 1e-10;
/// Doubling cap while bracketing; past this the level is treated as unreachable.
const CURVE_MAX_DOUBLINGS: u32 = 70;

/// Traces the level set { p : U(p) = level } around a 2-dimensional voter by
/// radial bisection along `samples` evenly spaced rays, ordered by angle
/// starting from the positive x direction.
///
/// Returns an empty vector when the level is unreachable (above the utility at
/// the voter's own position, or at or below the infimum for ReverseS). Each
/// returned point p satisfies |U(p) - level| <= 1e-6 * max(|level|, 1).
pub fn indifference_curve(
    kind: CurveKind,
    spec: &LossSpec,
    voter: &[f64],
    level: f64,
    samples: usize,
) -> Result<Vec<Position>, LossError> {
    if voter.len() != 2 {
        return Err(LossError::CurveDimension(voter.len()));
    }
    spec.validate()?;

    let eval = |dir: &[f64; 2], r: f64| -> f64 {
        let p = [voter[0] + r * dir[0], voter[1] + r * dir[1]];
        match kind {
            CurveKind::Spatial => spec.utility_unchecked(r),
            CurveKind::IssueBased => {
                spec.utility_unchecked((p[0] - voter[0]).abs())
                    + spec.utility_unchecked((p[1] - voter[1]).abs())
            }
        }
    };

    let u_at_voter = eval(&[1.0, 0.0], 0.0);
    if level > u_at_voter {
        return Ok(Vec::new());
    }

    let mut points = Vec::with_capacity(samples);
    for j in 0..samples {
        let theta = std::f64::consts::TAU * j as f64 / samples as f64;
        let dir = [theta.cos(), theta.sin()];

        // U is strictly decreasing along every ray, so bracket then bisect.
        let mut r_hi = 1.0;
        let mut doublings = 0;
        while eval(&dir, r_hi) > level {
            r_hi *= 2.0;
            doublings += 1;
            if doublings > CURVE_MAX_DOUBLINGS {
                // Level below the utility's infimum on this ray: unreachable.
                return Ok(Vec::new());
            }
        }
        let mut lo = 0.0;
        let mut hi = r_hi;
        while hi - lo > CURVE_BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if eval(&dir, mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        points.push(vec![voter[0] + r * dir[0], voter[1] + r * dir[1]]);
    }
    Ok(points)
}

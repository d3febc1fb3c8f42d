//! Choice models: how utilities over two candidates become a vote or an abstention.
//!
//! Voting carries a cost c. Because abstaining yields the lottery payoff
//! (u1 + u2) / 2, a voter's gain from voting for the preferred candidate is
//! |u1 - u2| / 2 - c, so the decisive comparison is |u1 - u2| versus 2c.
//! The deterministic rule applies that comparison exactly; the probabilistic
//! rule passes the utility gap through a composite-shock CDF, giving each
//! option a probability instead.
//!
//! Three abstention formulations:
//! - Stakes: abstain when the utility gap is too small to justify the cost.
//! - Alienation: abstain when even the better candidate is too unattractive.
//! - ExpressiveConstant: abstention is an outside option with fixed payoff.

use serde::{Deserialize, Serialize};
use statrs::function::erf;
use thiserror::Error;

/// Outcome of a single two-candidate decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    VoteC1,
    VoteC2,
    Abstain,
}

/// Errors from choice-model validation and evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum ChoiceError {
    #[error("voting cost must be nonnegative and finite, got {0}")]
    BadCost(f64),
    #[error("noise scale must be positive and finite, got {0}")]
    BadNoiseScale(f64),
    #[error("alienation scale must be positive and finite, got {0}")]
    BadAlienationScale(f64),
    #[error("probabilistic mode requires a noise CDF")]
    MissingNoise,
    #[error("the expressive-constant formulation has no probabilistic form; use deterministic mode")]
    ProbabilisticExpressive,
}

/// Composite shock distribution for probabilistic choice, parameterized
/// directly as the CDF of the net shock on the utility comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseCdf {
    /// Linear ramp from 0 at -scale to 1 at +scale.
    UniformLinear { scale: f64 },
    /// Normal(0, scale).
    Normal { scale: f64 },
    /// Logistic with the given scale parameter.
    Logistic { scale: f64 },
}

impl NoiseCdf {
    pub fn validate(&self) -> Result<(), ChoiceError> {
        let s = self.scale();
        if s > 0.0 && s.is_finite() {
            Ok(())
        } else {
            Err(ChoiceError::BadNoiseScale(s))
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            NoiseCdf::UniformLinear { scale }
            | NoiseCdf::Normal { scale }
            | NoiseCdf::Logistic { scale } => scale,
        }
    }

    /// CDF value at `z`. Saturates to exactly 0.0 / 1.0 in the tails, which is
    /// what makes the small-scale limit agree exactly with deterministic choice.
    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            NoiseCdf::UniformLinear { scale } => {
                if z <= -scale {
                    0.0
                } else if z >= scale {
                    1.0
                } else {
                    (z + scale) / (2.0 * scale)
                }
            }
            NoiseCdf::Normal { scale } => {
                // Beyond 40 standard deviations the true CDF is closer to 0/1
                // than f64 can represent, so saturating is exact, and it keeps
                // the small-scale limit bit-identical to the hard rule.
                let standardized = z / scale;
                if standardized <= -40.0 {
                    0.0
                } else if standardized >= 40.0 {
                    1.0
                } else {
                    0.5 * erf::erfc(-standardized / std::f64::consts::SQRT_2)
                }
            }
            NoiseCdf::Logistic { scale } => 1.0 / (1.0 + (-z / scale).exp()),
        }
    }
}

/// Why a voter would abstain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Abstention {
    /// Indifference-driven: abstain when |u1 - u2| <= 2c.
    Stakes,
    /// Alienation-driven: abstain when the better candidate is still bad.
    /// Deterministic mode uses the hard threshold; probabilistic mode passes
    /// max(u1, u2) - threshold through a logistic link with `scale`.
    Alienation { threshold: f64, scale: f64 },
    /// Abstention as an outside option worth `payoff`, compared against the
    /// net payoff of voting. Deterministic only.
    ExpressiveConstant { payoff: f64 },
}

/// Whether decisions are hard rules or probability distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiceMode {
    Deterministic,
    Probabilistic,
}

/// A complete choice model: mode, voting cost, optional shock CDF, and the
/// abstention formulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceModel {
    pub mode: ChoiceMode,
    /// Voting cost c >= 0; enters decisions as the 2c stakes threshold.
    pub cost: f64,
    /// Required in probabilistic mode; ignored in deterministic mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseCdf>,
    pub abstention: Abstention,
}

impl ChoiceModel {
    pub fn validate(&self) -> Result<(), ChoiceError> {
        if !(self.cost >= 0.0) || !self.cost.is_finite() {
            return Err(ChoiceError::BadCost(self.cost));
        }
        if let Abstention::Alienation { scale, .. } = self.abstention {
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(ChoiceError::BadAlienationScale(scale));
            }
        }
        if self.mode == ChoiceMode::Probabilistic {
            match self.abstention {
                Abstention::ExpressiveConstant { .. } => {
                    return Err(ChoiceError::ProbabilisticExpressive)
                }
                _ => {}
            }
            self.noise.ok_or(ChoiceError::MissingNoise)?.validate()?;
        }
        Ok(())
    }

    /// Hard decision from the two utilities. Ties resolve Abstain over either
    /// vote, and VoteC1 over VoteC2.
    pub fn decide_deterministic(&self, u1: f64, u2: f64) -> Decision {
        match self.abstention {
            Abstention::Stakes => {
                let gap = u1 - u2;
                if gap > 2.0 * self.cost {
                    Decision::VoteC1
                } else if -gap > 2.0 * self.cost {
                    Decision::VoteC2
                } else {
                    Decision::Abstain
                }
            }
            Abstention::Alienation { threshold, .. } => {
                if u1.max(u2) < threshold {
                    Decision::Abstain
                } else if u1 >= u2 {
                    Decision::VoteC1
                } else {
                    Decision::VoteC2
                }
            }
            Abstention::ExpressiveConstant { payoff } => {
                let v1 = u1 - self.cost;
                let v2 = u2 - self.cost;
                let best_vote = v1.max(v2);
                if payoff >= best_vote {
                    Decision::Abstain
                } else if v1 >= v2 {
                    Decision::VoteC1
                } else {
                    Decision::VoteC2
                }
            }
        }
    }

    /// Probability distribution over the three decisions.
    ///
    /// Under Stakes, with gap = u2 - u1 and Phi the shock CDF:
    ///   p_c1 = 1 - Phi(gap + 2c), p_c2 = Phi(gap - 2c), p_abstain the rest.
    /// Under Alienation, p_abstain comes from the logistic link on
    /// max(u1, u2) - threshold and the residual mass splits between the
    /// candidates by the Stakes probabilities renormalized.
    pub fn decide_probabilistic(&self, u1: f64, u2: f64) -> Result<ChoiceDistribution, ChoiceError> {
        let noise = self.noise.ok_or(ChoiceError::MissingNoise)?;
        let gap = u2 - u1;
        let two_c = 2.0 * self.cost;
        let hi = noise.cdf(gap + two_c);
        let lo = noise.cdf(gap - two_c);
        let stakes_c1 = 1.0 - hi;
        let stakes_c2 = lo;
        match self.abstention {
            Abstention::Stakes => Ok(ChoiceDistribution {
                p_c1: stakes_c1,
                p_c2: stakes_c2,
                p_abstain: (hi - lo).max(0.0),
            }),
            Abstention::Alienation { threshold, scale } => {
                let p_abstain = 1.0 / (1.0 + ((u1.max(u2) - threshold) / scale).exp());
                let residual = 1.0 - p_abstain;
                let total = stakes_c1 + stakes_c2;
                // When stakes alone would force abstention the split is
                // undefined; give each candidate half the residual.
                let (w1, w2) = if total > 0.0 {
                    (stakes_c1 / total, stakes_c2 / total)
                } else {
                    (0.5, 0.5)
                };
                Ok(ChoiceDistribution {
                    p_c1: residual * w1,
                    p_c2: residual * w2,
                    p_abstain,
                })
            }
            Abstention::ExpressiveConstant { .. } => Err(ChoiceError::ProbabilisticExpressive),
        }
    }

    /// Forced two-way choice with no abstention: the rule behind binary
    /// measure responses. Ties go to option 1.
    pub fn forced_choice(u1: f64, u2: f64) -> Decision {
        if u1 >= u2 {
            Decision::VoteC1
        } else {
            Decision::VoteC2
        }
    }
}

/// Probabilities over the three decisions; sums to 1 within 1e-12.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiceDistribution {
    pub p_c1: f64,
    pub p_c2: f64,
    pub p_abstain: f64,
}

impl ChoiceDistribution {
    /// Maps a uniform draw in [0, 1) to a decision. The cumulative order is
    /// fixed (VoteC1, VoteC2, Abstain) so simulations are reproducible.
    pub fn sample(&self, uniform: f64) -> Decision {
        if uniform < self.p_c1 {
            Decision::VoteC1
        } else if uniform < self.p_c1 + self.p_c2 {
            Decision::VoteC2
        } else {
            Decision::Abstain
        }
    }

    /// The single most likely decision, with the deterministic tie order
    /// (Abstain over votes, VoteC1 over VoteC2).
    pub fn argmax(&self) -> Decision {
        if self.p_abstain >= self.p_c1 && self.p_abstain >= self.p_c2 {
            Decision::Abstain
        } else if self.p_c1 >= self.p_c2 {
            Decision::VoteC1
        } else {
            Decision::VoteC2
        }
    }
}

/// What abstaining is worth given the two candidate utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbstentionPayoff {
    /// Expected value of the coin-flip outcome: (u1 + u2) / 2. This is the
    /// variant embodied in the 2c stakes threshold.
    Lottery,
    /// Worst case: min(u1, u2).
    Pessimistic,
}

/// Payoff a voter assigns to abstaining under the chosen variant.
pub fn abstention_payoff(u1: f64, u2: f64, variant: AbstentionPayoff) -> f64 {
    match variant {
        AbstentionPayoff::Lottery => 0.5 * (u1 + u2),
        AbstentionPayoff::Pessimistic => u1.min(u2),
    }
}

//! Synthetic electorate and ballot generation.
//!
//! A seeded spec draws voter ideal points, derives per-measure party positions,
//! and simulates each voter's ballot: n binary measure responses (the basis for
//! voter groups) plus one choice per race. Every analysis quantity is
//! downstream of the ballot records produced here; the generative model itself
//! is harness machinery, since the real-world counterpart is observed data.
//!
//! Determinism contract: everything is a pure function of the spec's seed via
//! named stream families ("electorate", "measure-offsets", "measures", "votes",
//! "missing"), with one counter-indexed stream per voter, so records are
//! bitwise identical across runs and thread counts.

use crate::choice::{ChoiceError, ChoiceMode, ChoiceModel, Decision};
use crate::loss::{LossError, LossSpec};
use crate::rng::StreamFamily;
use crate::space::{Position, SpaceError};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Errors from spec validation and simulation.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("config: {0}")]
    Config(String),
    #[error("measure vector contains missing entries; group rank is undefined")]
    MissingMeasure,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Choice(#[from] ChoiceError),
}

/// Marginal distribution of voter ideal points, applied independently to each
/// dimension of the policy space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdealDistribution {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    BimodalMixture {
        mean1: f64,
        sd1: f64,
        mean2: f64,
        sd2: f64,
        /// Probability of drawing from the first component, in (0, 1).
        weight1: f64,
    },
    /// Piecewise-uniform: `edges` has one more entry than `weights`.
    Histogram {
        edges: Vec<f64>,
        weights: Vec<f64>,
    },
}

impl IdealDistribution {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            IdealDistribution::Uniform { lo, hi } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(SimError::Config(format!(
                        "electorate.ideal_distribution: uniform requires lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            IdealDistribution::Normal { sd, .. } => {
                if !(*sd > 0.0) || !sd.is_finite() {
                    return Err(SimError::Config(format!(
                        "electorate.ideal_distribution: normal requires sd > 0, got {sd}"
                    )));
                }
            }
            IdealDistribution::BimodalMixture {
                sd1, sd2, weight1, ..
            } => {
                if !(*sd1 > 0.0) || !(*sd2 > 0.0) {
                    return Err(SimError::Config(format!(
                        "electorate.ideal_distribution: mixture requires positive sds, got {sd1}, {sd2}"
                    )));
                }
                if !(*weight1 > 0.0 && *weight1 < 1.0) {
                    return Err(SimError::Config(format!(
                        "electorate.ideal_distribution: mixture weight must lie in (0,1), got {weight1}"
                    )));
                }
            }
            IdealDistribution::Histogram { edges, weights } => {
                if edges.len() != weights.len() + 1 || weights.is_empty() {
                    return Err(SimError::Config(
                        "electorate.ideal_distribution: histogram needs len(edges) == len(weights) + 1 >= 2"
                            .into(),
                    ));
                }
                if edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(SimError::Config(
                        "electorate.ideal_distribution: histogram edges must be strictly increasing"
                            .into(),
                    ));
                }
                if weights.iter().any(|w| *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
                    return Err(SimError::Config(
                        "electorate.ideal_distribution: histogram weights must be nonnegative with positive sum"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// One draw of a single coordinate.
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            IdealDistribution::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            IdealDistribution::Normal { mean, sd } => mean + sd * sample_standard_normal(rng),
            IdealDistribution::BimodalMixture {
                mean1,
                sd1,
                mean2,
                sd2,
                weight1,
            } => {
                if rng.gen::<f64>() < *weight1 {
                    mean1 + sd1 * sample_standard_normal(rng)
                } else {
                    mean2 + sd2 * sample_standard_normal(rng)
                }
            }
            IdealDistribution::Histogram { edges, weights } => {
                let total: f64 = weights.iter().sum();
                let mut target = rng.gen::<f64>() * total;
                let mut bin = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if target < *w {
                        bin = i;
                        break;
                    }
                    target -= w;
                }
                edges[bin] + (edges[bin + 1] - edges[bin]) * rng.gen::<f64>()
            }
        }
    }

    /// Interval effectively covered by the distribution; normal tails are cut
    /// at four standard deviations. Used to size platform grids.
    pub fn span(&self) -> (f64, f64) {
        match self {
            IdealDistribution::Uniform { lo, hi } => (*lo, *hi),
            IdealDistribution::Normal { mean, sd } => (mean - 4.0 * sd, mean + 4.0 * sd),
            IdealDistribution::BimodalMixture {
                mean1,
                sd1,
                mean2,
                sd2,
                ..
            } => (
                (mean1 - 4.0 * sd1).min(mean2 - 4.0 * sd2),
                (mean1 + 4.0 * sd1).max(mean2 + 4.0 * sd2),
            ),
            IdealDistribution::Histogram { edges, .. } => (edges[0], *edges.last().unwrap()),
        }
    }
}

/// Polar Box-Muller; two uniforms per accepted pair, one value kept.
/// Kept local so the draw sequence is pinned by this crate, not a dependency.
fn sample_standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

fn default_measure_spread() -> f64 {
    0.5
}

/// Everything needed to draw an electorate and its ballot measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectorateSpec {
    /// Master seed; all random streams derive from it.
    #[serde(default)]
    pub seed: u64,
    pub n_voters: u64,
    pub dimension: usize,
    pub ideal_distribution: IdealDistribution,
    pub n_measures: usize,
    /// Democratic party endpoint; measure positions offset from it.
    pub dem_position: Position,
    /// Republican party endpoint.
    pub rep_position: Position,
    /// Half-width of the uniform per-measure offset added to both party
    /// endpoints, so measures are informative but not identical.
    #[serde(default = "default_measure_spread")]
    pub measure_spread: f64,
    /// Probability a measure response is recorded as missing; default 0.
    #[serde(default)]
    pub missing_rate: f64,
}

impl ElectorateSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_voters == 0 {
            return Err(SimError::Config(
                "electorate.n_voters must be >= 1".into(),
            ));
        }
        if self.dimension == 0 {
            return Err(SimError::Config(
                "electorate.dimension must be >= 1".into(),
            ));
        }
        self.ideal_distribution.validate()?;
        if self.n_measures == 0 {
            return Err(SimError::Config(
                "electorate.n_measures must be >= 1".into(),
            ));
        }
        if self.n_measures > 48 {
            return Err(SimError::Config(format!(
                "electorate.n_measures must be <= 48 so subgroup ids fit an integer, got {}",
                self.n_measures
            )));
        }
        if self.dem_position.len() != self.dimension {
            return Err(SimError::Config(format!(
                "electorate.dem_position has {} coordinates, expected {}",
                self.dem_position.len(),
                self.dimension
            )));
        }
        if self.rep_position.len() != self.dimension {
            return Err(SimError::Config(format!(
                "electorate.rep_position has {} coordinates, expected {}",
                self.rep_position.len(),
                self.dimension
            )));
        }
        if self.dem_position == self.rep_position {
            return Err(SimError::Config(
                "electorate.dem_position and electorate.rep_position must differ".into(),
            ));
        }
        if !(self.measure_spread >= 0.0) || !self.measure_spread.is_finite() {
            return Err(SimError::Config(format!(
                "electorate.measure_spread must be nonnegative, got {}",
                self.measure_spread
            )));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(SimError::Config(format!(
                "electorate.missing_rate must lie in [0, 1), got {}",
                self.missing_rate
            )));
        }
        Ok(())
    }
}

/// Party label of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    D,
    R,
}

/// Office level of a race.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaceType {
    Presidential,
    UsHouse,
    StateSenate,
    StateHouse,
}

/// One two-candidate race. Same-party pairings (D-D, R-R) are allowed and are
/// the basis of the same-party abstention analyses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaceSpec {
    pub race_id: String,
    pub race_type: RaceType,
    pub cand1_party: Party,
    pub cand2_party: Party,
    pub cand1_pos: Position,
    pub cand2_pos: Position,
}

impl RaceSpec {
    pub fn validate(&self, dimension: usize) -> Result<(), SimError> {
        if self.race_id.is_empty() {
            return Err(SimError::Config("races: race_id must be nonempty".into()));
        }
        if self
            .race_id
            .contains(|ch| ch == ',' || ch == '\n' || ch == '\r')
        {
            return Err(SimError::Config(format!(
                "races: race_id {:?} contains a comma or newline and would break the CSV schema",
                self.race_id
            )));
        }
        for (name, pos) in [("cand1_pos", &self.cand1_pos), ("cand2_pos", &self.cand2_pos)] {
            if pos.len() != dimension {
                return Err(SimError::Config(format!(
                    "races.{}.{name} has {} coordinates, expected {dimension}",
                    self.race_id,
                    pos.len()
                )));
            }
        }
        Ok(())
    }

    /// True for D-R (or R-D) races; the races polarization is defined over.
    pub fn is_cross_party(&self) -> bool {
        self.cand1_party != self.cand2_party
    }
}

/// A single measure response on a ballot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureResponse {
    /// Aligned with the Democratic measure position.
    Zero,
    /// Aligned with the Republican measure position.
    One,
    Missing,
}

/// A single race choice on a ballot. Simulation emits only D, R, A; O and
/// Missing appear when ingesting externally produced records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Choice {
    D,
    R,
    /// Other-party / write-in.
    O,
    /// Abstained (roll-off): ballot cast, race left blank.
    A,
    Missing,
}

/// One voter's full ballot. `choices[i]` answers the i-th declared race, so a
/// record is only meaningful alongside its race-id list; keeping the mapping
/// positional lets millions of records share one set of race ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallotRecord {
    pub voter_id: u64,
    pub measures: Vec<MeasureResponse>,
    pub choices: Vec<Choice>,
}

/// Draws the electorate: voter ids 0..n_voters with ideal points sampled
/// per-dimension from the spec's distribution, deterministically in the seed.
pub fn generate_electorate(spec: &ElectorateSpec) -> Result<Vec<(u64, Position)>, SimError> {
    spec.validate()?;
    let mut rng = StreamFamily::new(spec.seed, "electorate").stream(0);
    let mut voters = Vec::with_capacity(spec.n_voters as usize);
    for voter_id in 0..spec.n_voters {
        let ideal: Position = (0..spec.dimension)
            .map(|_| spec.ideal_distribution.sample(&mut rng))
            .collect();
        voters.push((voter_id, ideal));
    }
    Ok(voters)
}

/// Per-measure (Democratic position, Republican position): the party
/// endpoints translated by one offset vector per measure, drawn once per spec
/// from Uniform(-measure_spread, +measure_spread) per dimension.
pub fn measure_positions(spec: &ElectorateSpec) -> Result<Vec<(Position, Position)>, SimError> {
    spec.validate()?;
    let mut rng = StreamFamily::new(spec.seed, "measure-offsets").stream(0);
    let mut out = Vec::with_capacity(spec.n_measures);
    for _ in 0..spec.n_measures {
        let offset: Vec<f64> = (0..spec.dimension)
            .map(|_| spec.measure_spread * (2.0 * rng.gen::<f64>() - 1.0))
            .collect();
        let dem: Position = spec
            .dem_position
            .iter()
            .zip(&offset)
            .map(|(p, o)| p + o)
            .collect();
        let rep: Position = spec
            .rep_position
            .iter()
            .zip(&offset)
            .map(|(p, o)| p + o)
            .collect();
        out.push((dem, rep));
    }
    Ok(out)
}

/// Euclidean distance with dimensions already validated.
#[inline]
fn dist_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sq.sqrt()
}

/// Measure responses with precomputed positions and a caller-supplied stream
/// family; the building block `simulate_election` shares across voters.
fn measure_responses_inner(
    positions: &[(Position, Position)],
    ideal: &[f64],
    voter_id: u64,
    family: &StreamFamily,
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Result<Vec<MeasureResponse>, SimError> {
    let mut rng = match model.mode {
        ChoiceMode::Probabilistic => Some(family.stream(voter_id)),
        ChoiceMode::Deterministic => None,
    };
    let mut out = Vec::with_capacity(positions.len());
    for (dem_pos, rep_pos) in positions {
        let u_dem = loss.utility_unchecked(dist_unchecked(ideal, dem_pos));
        let u_rep = loss.utility_unchecked(dist_unchecked(ideal, rep_pos));
        let response = match &mut rng {
            // Measures are two-option contests with abstention disabled:
            // zero-cost stakes, so the Republican side wins with probability
            // Phi(u_rep - u_dem) and nothing is left for abstention.
            Some(rng) => {
                let noise = model.noise.ok_or(ChoiceError::MissingNoise)?;
                let p_dem = 1.0 - noise.cdf(u_rep - u_dem);
                if rng.gen::<f64>() < p_dem {
                    MeasureResponse::Zero
                } else {
                    MeasureResponse::One
                }
            }
            // Deterministic ties go to the Democratic side (the VoteC1 rule
            // with c1 := D).
            None => match ChoiceModel::forced_choice(u_dem, u_rep) {
                Decision::VoteC1 => MeasureResponse::Zero,
                _ => MeasureResponse::One,
            },
        };
        out.push(response);
    }
    Ok(out)
}

/// A voter's n binary measure responses under the given loss and choice model.
/// Probabilistic draws come from the spec-seeded "measures" stream for this
/// voter id, so results match `simulate_election` exactly.
pub fn measure_responses(
    ideal: &[f64],
    voter_id: u64,
    spec: &ElectorateSpec,
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Result<Vec<MeasureResponse>, SimError> {
    loss.validate()?;
    model.validate()?;
    if ideal.len() != spec.dimension {
        return Err(SimError::Config(format!(
            "voter ideal has {} coordinates, expected {}",
            ideal.len(),
            spec.dimension
        )));
    }
    let positions = measure_positions(spec)?;
    let family = StreamFamily::new(spec.seed, "measures");
    measure_responses_inner(&positions, ideal, voter_id, &family, loss, model)
}

/// Voter Group rank k = sum of measure responses. Errors if any response is
/// missing, mirroring the sample restriction to complete measure vectors.
pub fn voter_group(measures: &[MeasureResponse]) -> Result<u32, SimError> {
    let mut k = 0;
    for m in measures {
        match m {
            MeasureResponse::One => k += 1,
            MeasureResponse::Zero => {}
            MeasureResponse::Missing => return Err(SimError::MissingMeasure),
        }
    }
    Ok(k)
}

/// Subgroup identifier: the measure vector read as a binary integer with the
/// first measure as the most significant bit. Two voters share a subgroup iff
/// their measure vectors are identical.
pub fn subgroup_id(measures: &[MeasureResponse]) -> Result<u64, SimError> {
    let mut id: u64 = 0;
    for m in measures {
        let bit = match m {
            MeasureResponse::One => 1,
            MeasureResponse::Zero => 0,
            MeasureResponse::Missing => return Err(SimError::MissingMeasure),
        };
        id = (id << 1) | bit;
    }
    Ok(id)
}

/// Simulates a full election: one BallotRecord per entry of `electorate`, with
/// measure responses and one choice per race, everything derived from the
/// spec's seed. `choices[i]` corresponds to `races[i]`; simulated choices are
/// always D, R, or A.
///
/// Draw discipline per voter: the "measures" stream supplies one uniform per
/// measure (probabilistic mode only), the "votes" stream one uniform per race
/// (probabilistic mode only), and the "missing" stream one uniform per measure
/// (only when missing_rate > 0). Voters are independent streams, so any
/// parallel schedule yields identical records.
pub fn simulate_election(
    spec: &ElectorateSpec,
    electorate: &[(u64, Position)],
    races: &[RaceSpec],
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Result<Vec<BallotRecord>, SimError> {
    spec.validate()?;
    loss.validate()?;
    model.validate()?;
    let mut seen_ids = std::collections::HashSet::new();
    for race in races {
        race.validate(spec.dimension)?;
        if !seen_ids.insert(race.race_id.as_str()) {
            return Err(SimError::Config(format!(
                "races: duplicate race_id {:?}",
                race.race_id
            )));
        }
    }

    let positions = measure_positions(spec)?;
    let measures_family = StreamFamily::new(spec.seed, "measures");
    let votes_family = StreamFamily::new(spec.seed, "votes");
    let missing_family = StreamFamily::new(spec.seed, "missing");

    let per_voter = |(voter_id, ideal): &(u64, Position)| -> Result<BallotRecord, SimError> {
        if ideal.len() != spec.dimension {
            return Err(SimError::Config(format!(
                "voter {voter_id} ideal has {} coordinates, expected {}",
                ideal.len(),
                spec.dimension
            )));
        }
        let mut measures =
            measure_responses_inner(&positions, ideal, *voter_id, &measures_family, loss, model)?;
        if spec.missing_rate > 0.0 {
            let mut rng = missing_family.stream(*voter_id);
            for m in &mut measures {
                if rng.gen::<f64>() < spec.missing_rate {
                    *m = MeasureResponse::Missing;
                }
            }
        }

        let mut vote_rng = match model.mode {
            ChoiceMode::Probabilistic => Some(votes_family.stream(*voter_id)),
            ChoiceMode::Deterministic => None,
        };
        let mut choices = Vec::with_capacity(races.len());
        for race in races {
            let u1 = loss.utility_unchecked(dist_unchecked(ideal, &race.cand1_pos));
            let u2 = loss.utility_unchecked(dist_unchecked(ideal, &race.cand2_pos));
            let decision = match &mut vote_rng {
                Some(rng) => model.decide_probabilistic(u1, u2)?.sample(rng.gen::<f64>()),
                None => model.decide_deterministic(u1, u2),
            };
            let choice = match decision {
                Decision::VoteC1 => party_choice(race.cand1_party),
                Decision::VoteC2 => party_choice(race.cand2_party),
                Decision::Abstain => Choice::A,
            };
            choices.push(choice);
        }
        Ok(BallotRecord {
            voter_id: *voter_id,
            measures,
            choices,
        })
    };

    #[cfg(feature = "parallel")]
    {
        electorate.par_iter().map(per_voter).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        electorate.iter().map(per_voter).collect()
    }
}

fn party_choice(party: Party) -> Choice {
    match party {
        Party::D => Choice::D,
        Party::R => Choice::R,
    }
}

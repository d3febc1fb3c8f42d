//! Two-candidate platform competition on a discretized one-dimensional
//! policy space: vote shares between platform pairs, Condorcet-winner search,
//! alternating best-response dynamics, and pure-equilibrium enumeration.
//!
//! Candidates are purely office-motivated, so the office rent only orders
//! outcomes and never needs a numeric value: every routine here maximizes the
//! vote-share margin. Support bands and abstention bands emerge from
//! evaluating the per-voter decision rule on the grid rather than from
//! root-finding band edges, so results are exact on the grid by construction.

use crate::choice::{ChoiceError, ChoiceMode, ChoiceModel, Decision};
use crate::electorate::IdealDistribution;
use crate::loss::{LossError, LossSpec};
use std::collections::HashMap;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Share differences smaller than this count as ties; ties are reported, not
/// broken.
pub const EPS_TIE: f64 = 1e-10;

/// Default number of platform grid points over a density's span.
pub const DEFAULT_PLATFORM_POINTS: usize = 201;

/// Errors from density construction and competition routines.
#[derive(Debug, Error)]
pub enum CompeteError {
    #[error("density grid must be strictly increasing and nonempty")]
    BadGrid,
    #[error("density weights must be nonnegative with a positive sum")]
    BadWeights,
    #[error("grid and weights lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("platform {platform} lies outside the grid span [{lo}, {hi}]")]
    PlatformOutsideSpan { platform: f64, lo: f64, hi: f64 },
    #[error("platform {0} is not a grid point")]
    PlatformNotOnGrid(f64),
    #[error("platform grid must be nonempty")]
    EmptyPlatformGrid,
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Choice(#[from] ChoiceError),
}

/// A discretized voter density: strictly increasing support points with
/// weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct VoterDensity {
    grid: Vec<f64>,
    weights: Vec<f64>,
}

impl VoterDensity {
    /// Builds a density, normalizing the weights; any nonnegative weight
    /// vector with positive mass is accepted.
    pub fn new(grid: Vec<f64>, weights: Vec<f64>) -> Result<Self, CompeteError> {
        if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CompeteError::BadGrid);
        }
        if grid.len() != weights.len() {
            return Err(CompeteError::LengthMismatch(grid.len(), weights.len()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(CompeteError::BadWeights);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(CompeteError::BadWeights);
        }
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(VoterDensity { grid, weights })
    }

    /// Uniform density over [lo, hi] on `cells` midpoint support points, so
    /// no voter sits exactly on an interval boundary.
    pub fn uniform(lo: f64, hi: f64, cells: usize) -> Result<Self, CompeteError> {
        if !(lo < hi) || cells == 0 {
            return Err(CompeteError::BadGrid);
        }
        let width = (hi - lo) / cells as f64;
        let grid = (0..cells)
            .map(|i| lo + width * (i as f64 + 0.5))
            .collect();
        VoterDensity::new(grid, vec![1.0; cells])
    }

    /// Discretizes an ideal-point distribution onto `cells` midpoint support
    /// points over its span, weighting each cell by the density at its
    /// midpoint.
    pub fn from_distribution(
        dist: &IdealDistribution,
        cells: usize,
    ) -> Result<Self, CompeteError> {
        let (lo, hi) = dist.span();
        if !(lo < hi) || cells == 0 {
            return Err(CompeteError::BadGrid);
        }
        let width = (hi - lo) / cells as f64;
        let grid: Vec<f64> = (0..cells)
            .map(|i| lo + width * (i as f64 + 0.5))
            .collect();
        let weights: Vec<f64> = grid.iter().map(|x| pdf(dist, *x)).collect();
        VoterDensity::new(grid, weights)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn span(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    /// Weighted median: the smallest support point whose cumulative weight
    /// reaches one half.
    pub fn median(&self) -> f64 {
        let mut cum = 0.0;
        for (x, w) in self.grid.iter().zip(&self.weights) {
            cum += w;
            if cum >= 0.5 - EPS_TIE {
                return *x;
            }
        }
        *self.grid.last().unwrap()
    }
}

fn pdf(dist: &IdealDistribution, x: f64) -> f64 {
    fn phi(z: f64) -> f64 {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }
    match dist {
        IdealDistribution::Uniform { lo, hi } => {
            if x >= *lo && x <= *hi {
                1.0 / (hi - lo)
            } else {
                0.0
            }
        }
        IdealDistribution::Normal { mean, sd } => phi((x - mean) / sd) / sd,
        IdealDistribution::BimodalMixture {
            mean1,
            sd1,
            mean2,
            sd2,
            weight1,
        } => {
            weight1 * phi((x - mean1) / sd1) / sd1
                + (1.0 - weight1) * phi((x - mean2) / sd2) / sd2
        }
        IdealDistribution::Histogram { edges, weights } => {
            let total: f64 = weights.iter().sum();
            for (i, w) in weights.iter().enumerate() {
                if x >= edges[i] && x < edges[i + 1] {
                    return w / (total * (edges[i + 1] - edges[i]));
                }
            }
            0.0
        }
    }
}

/// Which candidate won a contest, at the tie tolerance `EPS_TIE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Cand1,
    Cand2,
    Tie,
}

impl std::fmt::Display for Winner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Winner::Cand1 => "cand1",
            Winner::Cand2 => "cand2",
            Winner::Tie => "tie",
        };
        f.write_str(s)
    }
}

/// Result of one platform contest. Shares (including abstention) sum to one
/// up to float accumulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContestOutcome {
    pub share1: f64,
    pub share2: f64,
    pub abstain_share: f64,
    pub winner: Winner,
}

impl ContestOutcome {
    /// Candidate 1's vote-share margin, the payoff both dynamics maximize.
    pub fn margin(&self) -> f64 {
        self.share1 - self.share2
    }
}

fn check_span(density: &VoterDensity, platform: f64) -> Result<(), CompeteError> {
    let (lo, hi) = density.span();
    if platform < lo || platform > hi {
        return Err(CompeteError::PlatformOutsideSpan { platform, lo, hi });
    }
    Ok(())
}

fn outcome_from_shares(share1: f64, share2: f64, abstain_share: f64) -> ContestOutcome {
    let winner = if share1 > share2 + EPS_TIE {
        Winner::Cand1
    } else if share2 > share1 + EPS_TIE {
        Winner::Cand2
    } else {
        Winner::Tie
    };
    ContestOutcome {
        share1,
        share2,
        abstain_share,
        winner,
    }
}

/// Accumulates one voter's contribution given both utilities.
#[inline]
fn accumulate(
    model: &ChoiceModel,
    u1: f64,
    u2: f64,
    w: f64,
    shares: &mut (f64, f64, f64),
) -> Result<(), ChoiceError> {
    match model.mode {
        ChoiceMode::Deterministic => match model.decide_deterministic(u1, u2) {
            Decision::VoteC1 => shares.0 += w,
            Decision::VoteC2 => shares.1 += w,
            Decision::Abstain => shares.2 += w,
        },
        ChoiceMode::Probabilistic => {
            let dist = model.decide_probabilistic(u1, u2)?;
            shares.0 += w * dist.p_c1;
            shares.1 += w * dist.p_c2;
            shares.2 += w * dist.p_abstain;
        }
    }
    Ok(())
}

/// Runs one contest between platforms p1 and p2: integrates the per-voter
/// decision rule against the density. Probabilistic models integrate the
/// exact choice probabilities, so no sampling is involved.
pub fn contest(
    density: &VoterDensity,
    p1: f64,
    p2: f64,
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Result<ContestOutcome, CompeteError> {
    loss.validate()?;
    model.validate()?;
    check_span(density, p1)?;
    check_span(density, p2)?;
    let mut shares = (0.0, 0.0, 0.0);
    for (x, w) in density.grid.iter().zip(&density.weights) {
        let u1 = loss.utility_unchecked((x - p1).abs());
        let u2 = loss.utility_unchecked((x - p2).abs());
        accumulate(model, u1, u2, *w, &mut shares)?;
    }
    Ok(outcome_from_shares(shares.0, shares.1, shares.2))
}

/// Evenly spaced platform grid over a span, endpoints included.
pub fn platform_grid(span: (f64, f64), points: usize) -> Result<Vec<f64>, CompeteError> {
    let (lo, hi) = span;
    if points == 0 || !(lo < hi) {
        return Err(CompeteError::EmptyPlatformGrid);
    }
    if points == 1 {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    // Accumulated rounding can push the last point an ulp past hi; pin the
    // endpoint so every platform stays inside the span it was built from.
    grid[points - 1] = hi;
    Ok(grid)
}

/// The ordered margin matrix m[a][b] = candidate 1's margin when platform a
/// (as candidate 1) meets platform b (as candidate 2). Utilities are
/// precomputed per (platform, voter) so each cell is a single pass over the
/// density.
fn margin_matrix(
    density: &VoterDensity,
    platforms: &[f64],
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Result<Vec<Vec<f64>>, CompeteError> {
    loss.validate()?;
    model.validate()?;
    if platforms.is_empty() {
        return Err(CompeteError::EmptyPlatformGrid);
    }
    for p in platforms {
        check_span(density, *p)?;
    }
    let util: Vec<Vec<f64>> = platforms
        .iter()
        .map(|p| {
            density
                .grid
                .iter()
                .map(|x| loss.utility_unchecked((x - p).abs()))
                .collect()
        })
        .collect();

    let row = |a: usize| -> Result<Vec<f64>, CompeteError> {
        let mut out = Vec::with_capacity(platforms.len());
        for b in 0..platforms.len() {
            let mut shares = (0.0, 0.0, 0.0);
            for (v, w) in density.weights.iter().enumerate() {
                accumulate(model, util[a][v], util[b][v], *w, &mut shares)?;
            }
            out.push(shares.0 - shares.1);
        }
        Ok(out)
    };

    #[cfg(feature = "parallel")]
    {
        (0..platforms.len()).into_par_iter().map(row).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..platforms.len()).map(row).collect()
    }
}

/// Finds the platform never strictly beaten in any pairwise contest, in
/// either seating. When several grid points are unbeaten (dense grids can
/// tie), the one nearest the density median is returned, lower on ties.
pub fn condorcet_winner(
    density: &VoterDensity,
    platforms: &[f64],
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Result<Option<f64>, CompeteError> {
    let m = margin_matrix(density, platforms, loss, model)?;
    let n = platforms.len();
    let unbeaten: Vec<usize> = (0..n)
        .filter(|&a| {
            (0..n).all(|b| m[a][b] >= -EPS_TIE) && (0..n).all(|b| m[b][a] <= EPS_TIE)
        })
        .collect();
    if unbeaten.is_empty() {
        return Ok(None);
    }
    let median = density.median();
    let best = unbeaten
        .into_iter()
        .min_by(|&a, &b| {
            let da = (platforms[a] - median).abs();
            let db = (platforms[b] - median).abs();
            da.partial_cmp(&db)
                .expect("distances are finite")
                .then(a.cmp(&b))
        })
        .expect("nonempty by the check above");
    Ok(Some(platforms[best]))
}

/// All platform pairs where neither candidate can strictly improve its margin
/// by a unilateral grid deviation; empty when no pure equilibrium exists.
pub fn pure_equilibria(
    density: &VoterDensity,
    platforms: &[f64],
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Result<Vec<(f64, f64)>, CompeteError> {
    let m = margin_matrix(density, platforms, loss, model)?;
    let n = platforms.len();
    let mut col_max = vec![f64::NEG_INFINITY; n];
    let mut row_min = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in 0..n {
            col_max[j] = col_max[j].max(m[i][j]);
            row_min[i] = row_min[i].min(m[i][j]);
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] >= col_max[j] - EPS_TIE && m[i][j] <= row_min[i] + EPS_TIE {
                out.push((platforms[i], platforms[j]));
            }
        }
    }
    Ok(out)
}

/// Outcome of alternating best-response dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum BrdOutcome {
    /// Both candidates are mutually content; `iters` counts actual moves, so
    /// starting at a fixed point converges in zero.
    Converged { p1: f64, p2: f64, iters: usize },
    /// A state repeated: the distinct platforms visited around the cycle, in
    /// ascending order.
    Cycle { witness: Vec<f64> },
    /// No fixed point or cycle within the move budget.
    IterationCap,
}

fn grid_index(platforms: &[f64], p: f64) -> Result<usize, CompeteError> {
    platforms
        .iter()
        .position(|g| (g - p).abs() <= 1e-12 * g.abs().max(1.0))
        .ok_or(CompeteError::PlatformNotOnGrid(p))
}

/// Alternating exact best responses (candidate 1 first), each mover picking
/// the platform maximizing its own margin, lowest grid index on ties. Stops
/// at a mutual fixed point, a revisited state (a majority cycle), or after
/// `max_iters` moves.
pub fn best_response_dynamics(
    density: &VoterDensity,
    platforms: &[f64],
    loss: &LossSpec,
    model: &ChoiceModel,
    start: (f64, f64),
    max_iters: usize,
) -> Result<BrdOutcome, CompeteError> {
    let m = margin_matrix(density, platforms, loss, model)?;
    let n = platforms.len();
    let mut i = grid_index(platforms, start.0)?;
    let mut j = grid_index(platforms, start.1)?;
    let mut mover: u8 = 0;
    let mut moves = 0usize;
    let mut content_streak = 0u8;
    let mut seen: HashMap<(usize, usize, u8), usize> = HashMap::new();
    let mut trail: Vec<(usize, usize)> = vec![(i, j)];
    seen.insert((i, j, mover), 0);

    loop {
        if content_streak == 2 {
            return Ok(BrdOutcome::Converged {
                p1: platforms[i],
                p2: platforms[j],
                iters: moves,
            });
        }
        if moves >= max_iters {
            return Ok(BrdOutcome::IterationCap);
        }
        // The mover's payoff against the opponent's current platform.
        let payoff = |k: usize| if mover == 0 { m[k][j] } else { -m[i][k] };
        let current = payoff(if mover == 0 { i } else { j });
        let mut best_k = 0;
        let mut best_val = f64::NEG_INFINITY;
        for k in 0..n {
            let v = payoff(k);
            if v > best_val {
                best_val = v;
                best_k = k;
            }
        }
        if best_val <= current + EPS_TIE {
            content_streak += 1;
            mover ^= 1;
            continue;
        }
        if mover == 0 {
            i = best_k;
        } else {
            j = best_k;
        }
        moves += 1;
        content_streak = 0;
        mover ^= 1;
        if let Some(first) = seen.insert((i, j, mover), trail.len()) {
            let mut witness: Vec<f64> = trail[first..]
                .iter()
                .flat_map(|(a, b)| [platforms[*a], platforms[*b]])
                .collect();
            witness.sort_by(|a, b| a.partial_cmp(b).expect("platforms are finite"));
            witness.dedup();
            return Ok(BrdOutcome::Cycle { witness });
        }
        trail.push((i, j));
    }
}

/// Writes contest rows as CSV: `p1,p2,share1,share2,winner`.
pub fn write_contest_csv<W: std::io::Write>(
    rows: &[(f64, f64, ContestOutcome)],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "p1,p2,share1,share2,winner")?;
    for (p1, p2, outcome) in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            p1, p2, outcome.share1, outcome.share2, outcome.winner
        )?;
    }
    Ok(())
}

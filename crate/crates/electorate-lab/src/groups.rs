//! Group-level measurement: per-(group, race) counts, abstention rates, vote
//! predictability, across-race averages, polarization, moderate-group
//! identification, subgroup flip effects, and the abstention-predictability
//! correlation.
//!
//! Voters are bucketed by group rank k (the sum of their binary measure
//! responses); records with any missing measure are excluded from tabulation,
//! mirroring the restriction to voters with complete measure vectors.

use crate::electorate::{subgroup_id, voter_group, BallotRecord, Choice, RaceSpec, SimError};
use std::collections::BTreeMap;
use std::io::Write;
use thiserror::Error;

/// Errors from group-level aggregation and measurement.
#[derive(Debug, Error)]
pub enum GroupError {
    #[error("nothing to aggregate: {0}")]
    EmptyAggregation(String),
    #[error("polarization undefined: {0}")]
    PolarizationUndefined(String),
    #[error("no cross-party (D-R) race available")]
    NoCrossPartyRaces,
    #[error("no populated subgroup pair for measure {q}")]
    NoFlipPairs { q: usize },
    #[error("correlation needs at least 3 paired points, got {0}")]
    TooFewPoints(usize),
    #[error("correlation undefined: the {0} series has zero variance")]
    ZeroVariance(&'static str),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Counts for one (group, race) cell. `n_total` counts every recorded
/// response (votes, other-party votes, and abstentions); missing responses
/// never reach a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStats {
    pub group: u32,
    pub race_id: String,
    pub n_total: u64,
    pub n_dem: u64,
    pub n_rep: u64,
    pub n_abstain: u64,
    pub n_other: u64,
}

/// Tabulates records into (group, race) cells; only nonempty cells are
/// returned, ordered by (group, race position). `race_ids[j]` labels
/// `record.choices[j]`. Records with any missing measure are dropped
/// (their group rank is undefined); missing choices are skipped per race.
pub fn tabulate(
    records: &[BallotRecord],
    race_ids: &[String],
) -> Result<Vec<GroupStats>, GroupError> {
    let mut cells: BTreeMap<(u32, usize), [u64; 5]> = BTreeMap::new();
    for record in records {
        if record.choices.len() != race_ids.len() {
            return Err(GroupError::Shape(format!(
                "record for voter {} has {} choices, expected {}",
                record.voter_id,
                record.choices.len(),
                race_ids.len()
            )));
        }
        let k = match voter_group(&record.measures) {
            Ok(k) => k,
            Err(SimError::MissingMeasure) => continue,
            Err(e) => return Err(e.into()),
        };
        for (j, choice) in record.choices.iter().enumerate() {
            let counts = cells.entry((k, j)).or_insert([0; 5]);
            match choice {
                Choice::D => {
                    counts[0] += 1;
                    counts[1] += 1;
                }
                Choice::R => {
                    counts[0] += 1;
                    counts[2] += 1;
                }
                Choice::A => {
                    counts[0] += 1;
                    counts[3] += 1;
                }
                Choice::O => {
                    counts[0] += 1;
                    counts[4] += 1;
                }
                Choice::Missing => {}
            }
        }
    }
    Ok(cells
        .into_iter()
        .filter(|(_, c)| c[0] > 0)
        .map(|((group, j), c)| GroupStats {
            group,
            race_id: race_ids[j].clone(),
            n_total: c[0],
            n_dem: c[1],
            n_rep: c[2],
            n_abstain: c[3],
            n_other: c[4],
        })
        .collect())
}

/// Share of the cell that abstained. Requires `n_total > 0`, which `tabulate`
/// guarantees for every cell it emits.
pub fn abstention_rate(stats: &GroupStats) -> f64 {
    debug_assert!(stats.n_total > 0, "empty cells are excluded upstream");
    stats.n_abstain as f64 / stats.n_total as f64
}

/// Absolute D-R vote share margin of the cell: |n_dem - n_rep| / n_total.
/// Other-party votes dilute the margin (they count in the denominator only).
pub fn predictability(stats: &GroupStats) -> f64 {
    debug_assert!(stats.n_total > 0, "empty cells are excluded upstream");
    stats.n_dem.abs_diff(stats.n_rep) as f64 / stats.n_total as f64
}

/// Unweighted mean of `values` over `included` races; races absent from the
/// map (the group is empty there) are skipped. Errors when nothing remains.
pub fn across_race_average(
    values: &BTreeMap<String, f64>,
    included: &[String],
) -> Result<f64, GroupError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for race in included {
        if let Some(v) = values.get(race) {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(GroupError::EmptyAggregation(
            "no included race has a defined value".into(),
        ));
    }
    Ok(sum / n as f64)
}

/// Race polarization: Pr_{k=0}(D) x Pr_{k=n}(R), the product of the extreme
/// groups' loyalty shares. Both cells must be from the same race and nonempty.
pub fn polarization(stats_k0: &GroupStats, stats_kn: &GroupStats) -> Result<f64, GroupError> {
    if stats_k0.race_id != stats_kn.race_id {
        return Err(GroupError::PolarizationUndefined(format!(
            "cells come from different races {:?} and {:?}",
            stats_k0.race_id, stats_kn.race_id
        )));
    }
    if stats_k0.n_total == 0 || stats_kn.n_total == 0 {
        return Err(GroupError::PolarizationUndefined(format!(
            "an extreme group is empty in race {:?}",
            stats_k0.race_id
        )));
    }
    let pr_dem_0 = stats_k0.n_dem as f64 / stats_k0.n_total as f64;
    let pr_rep_n = stats_kn.n_rep as f64 / stats_kn.n_total as f64;
    Ok(pr_dem_0 * pr_rep_n)
}

/// Polarization for one race looked up from a tabulated table: the (k=0, race)
/// and (k=n_measures, race) cells. `None` when either extreme group is empty
/// there, which excludes the race from polarization analyses.
pub fn race_polarization(
    stats: &[GroupStats],
    race_id: &str,
    n_measures: usize,
) -> Option<f64> {
    let k0 = stats
        .iter()
        .find(|s| s.group == 0 && s.race_id == race_id)?;
    let kn = stats
        .iter()
        .find(|s| s.group as usize == n_measures && s.race_id == race_id)?;
    polarization(k0, kn).ok()
}

/// Per-group across-race averages of (abstention rate, predictability) over
/// the included races. Groups empty in every included race are absent.
pub fn group_profile(
    stats: &[GroupStats],
    included: &[String],
) -> Result<BTreeMap<u32, (f64, f64)>, GroupError> {
    let mut abst: BTreeMap<u32, BTreeMap<String, f64>> = BTreeMap::new();
    let mut pred: BTreeMap<u32, BTreeMap<String, f64>> = BTreeMap::new();
    for cell in stats {
        abst.entry(cell.group)
            .or_default()
            .insert(cell.race_id.clone(), abstention_rate(cell));
        pred.entry(cell.group)
            .or_default()
            .insert(cell.race_id.clone(), predictability(cell));
    }
    let mut out = BTreeMap::new();
    for (group, values) in &abst {
        let a = match across_race_average(values, included) {
            Ok(a) => a,
            Err(GroupError::EmptyAggregation(_)) => continue,
            Err(e) => return Err(e),
        };
        let p = across_race_average(&pred[group], included)?;
        out.insert(*group, (a, p));
    }
    if out.is_empty() {
        return Err(GroupError::EmptyAggregation(
            "no group has data in any included race".into(),
        ));
    }
    Ok(out)
}

/// The moderate group(s): the rank minimizing across-race-average
/// predictability over cross-party races. When the two lowest averages are
/// within `eps_mod` of each other there is no decidedly indifferent group and
/// both ranks are returned (ascending). Exact ties resolve to lower ranks.
pub fn moderate_groups(
    stats: &[GroupStats],
    races: &[RaceSpec],
    eps_mod: f64,
) -> Result<Vec<u32>, GroupError> {
    let cross: Vec<String> = races
        .iter()
        .filter(|r| r.is_cross_party())
        .map(|r| r.race_id.clone())
        .collect();
    if cross.is_empty() {
        return Err(GroupError::NoCrossPartyRaces);
    }
    let profile = group_profile(stats, &cross)?;
    let mut ranked: Vec<(f64, u32)> = profile.iter().map(|(k, (_, p))| (*p, *k)).collect();
    ranked.sort_by(|a, b| a.partial_cmp(b).expect("predictability is never NaN"));
    let mut out = vec![ranked[0].1];
    if ranked.len() > 1 && ranked[1].0 - ranked[0].0 <= eps_mod {
        out.push(ranked[1].1);
    }
    out.sort_unstable();
    Ok(out)
}

/// Outcome measured on each subgroup when estimating flip effects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipOutcome {
    /// Democratic votes over all recorded responses, pooled across the
    /// filtered races.
    DemShare,
    /// Abstentions over all recorded responses, pooled likewise.
    AbstentionRate,
}

/// Flip effect of measure `q` (0-based): for each group rank k, the mean over
/// subgroup pairs (sg- in k, sg+ in k+1) differing only in measure q of
/// outcome(sg-) - outcome(sg+), with outcomes pooled over `race_filter`.
/// Pairs with an empty side are skipped; ranks with no populated pair are
/// absent from the result; no populated pair anywhere is an error.
pub fn flip_effect(
    records: &[BallotRecord],
    race_ids: &[String],
    q: usize,
    outcome: FlipOutcome,
    race_filter: &[String],
) -> Result<BTreeMap<u32, f64>, GroupError> {
    let n_measures = match records.first() {
        Some(r) => r.measures.len(),
        None => return Err(GroupError::NoFlipPairs { q }),
    };
    if q >= n_measures {
        return Err(GroupError::Shape(format!(
            "measure index {q} out of range for {n_measures} measures"
        )));
    }
    let filter: Vec<usize> = race_ids
        .iter()
        .enumerate()
        .filter(|(_, id)| race_filter.contains(id))
        .map(|(j, _)| j)
        .collect();

    // Pooled (n_total, n_dem, n_abstain) per subgroup id.
    let mut pools: BTreeMap<u64, [u64; 3]> = BTreeMap::new();
    for record in records {
        if record.measures.len() != n_measures {
            return Err(GroupError::Shape(format!(
                "record for voter {} disagrees on measure count",
                record.voter_id
            )));
        }
        let sg = match subgroup_id(&record.measures) {
            Ok(sg) => sg,
            Err(SimError::MissingMeasure) => continue,
            Err(e) => return Err(e.into()),
        };
        let pool = pools.entry(sg).or_insert([0; 3]);
        for &j in &filter {
            match record.choices.get(j) {
                Some(Choice::Missing) | None => {}
                Some(Choice::D) => {
                    pool[0] += 1;
                    pool[1] += 1;
                }
                Some(Choice::A) => {
                    pool[0] += 1;
                    pool[2] += 1;
                }
                Some(Choice::R) | Some(Choice::O) => pool[0] += 1,
            }
        }
    }

    let measure_bit = 1u64 << (n_measures - 1 - q);
    let mut sums: BTreeMap<u32, (f64, u64)> = BTreeMap::new();
    for (sg, low_pool) in &pools {
        if sg & measure_bit != 0 {
            continue;
        }
        let Some(high_pool) = pools.get(&(sg | measure_bit)) else {
            continue;
        };
        if low_pool[0] == 0 || high_pool[0] == 0 {
            continue;
        }
        let value = |pool: &[u64; 3]| match outcome {
            FlipOutcome::DemShare => pool[1] as f64 / pool[0] as f64,
            FlipOutcome::AbstentionRate => pool[2] as f64 / pool[0] as f64,
        };
        let k = sg.count_ones();
        let entry = sums.entry(k).or_insert((0.0, 0));
        entry.0 += value(low_pool) - value(high_pool);
        entry.1 += 1;
    }
    if sums.is_empty() {
        return Err(GroupError::NoFlipPairs { q });
    }
    Ok(sums
        .into_iter()
        .map(|(k, (sum, n))| (k, sum / n as f64))
        .collect())
}

/// Pearson correlation between two indifference measures plus the two-sided
/// p-value from the t statistic r sqrt((n-2)/(1-r^2)) on n-2 degrees of
/// freedom. Needs at least 3 points and variance in both series.
pub fn indifference_correlation(x: &[f64], y: &[f64]) -> Result<(f64, f64), GroupError> {
    if x.len() != y.len() {
        return Err(GroupError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(GroupError::TooFewPoints(n));
    }
    let r = pearson(x, y)?;
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    let p = if denom <= 0.0 {
        0.0
    } else {
        let t = r.abs() * (df / denom).sqrt();
        let dist = statrs::distribution::StudentsT::new(0.0, 1.0, df)
            .expect("df >= 1 by the n >= 3 precondition");
        use statrs::distribution::ContinuousCDF;
        2.0 * (1.0 - dist.cdf(t))
    };
    Ok((r, p.clamp(0.0, 1.0)))
}

/// Plain Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, GroupError> {
    if x.len() != y.len() {
        return Err(GroupError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(GroupError::ZeroVariance("first"));
    }
    if syy == 0.0 {
        return Err(GroupError::ZeroVariance("second"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation with midranks for ties: Pearson on the ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, GroupError> {
    pearson(&midranks(x), &midranks(y))
}

fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("ranks need non-NaN"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // 1-based ranks; ties share the average rank of their block.
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Writes the per-(group, race) measure table as CSV with the fixed header
/// `group,race_id,n_total,n_dem,n_rep,n_abstain,abstention_rate,predictability,pol`.
/// The pol column repeats the race-level polarization on every row of the
/// race and is NA for races where it is undefined.
pub fn write_measures_csv<W: Write>(
    stats: &[GroupStats],
    n_measures: usize,
    mut out: W,
) -> Result<(), GroupError> {
    writeln!(
        out,
        "group,race_id,n_total,n_dem,n_rep,n_abstain,abstention_rate,predictability,pol"
    )?;
    let mut pol_cache: BTreeMap<&str, Option<f64>> = BTreeMap::new();
    for cell in stats {
        let pol = *pol_cache
            .entry(cell.race_id.as_str())
            .or_insert_with(|| race_polarization(stats, &cell.race_id, n_measures));
        let pol_text = match pol {
            Some(p) => format!("{p}"),
            None => "NA".into(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            cell.group,
            cell.race_id,
            cell.n_total,
            cell.n_dem,
            cell.n_rep,
            cell.n_abstain,
            abstention_rate(cell),
            predictability(cell),
            pol_text
        )?;
    }
    Ok(())
}

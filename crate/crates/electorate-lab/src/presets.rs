//! Reference scenarios: fully specified electorates, race ladders, and loss
//! curves that exercise the library's headline behaviors. The acceptance
//! suite freezes them; they also make convenient starting points for new
//! experiments.

use crate::choice::{Abstention, ChoiceMode, ChoiceModel, NoiseCdf};
use crate::electorate::{ElectorateSpec, IdealDistribution, Party, RaceSpec, RaceType};
use crate::loss::LossSpec;

/// A uniform electorate on [1.0, 2.5] facing three same-party races whose
/// candidates all sit far to its left, so every voter is 1 to 3 units from
/// both options and the races differ only in how far apart the two Democrats
/// are. Group rank then orders voters by distance from the candidates, which
/// is what makes abstention-by-rank informative about the loss curve's far
/// field.
pub fn same_party_scenario(
    seed: u64,
    n_voters: u64,
) -> (ElectorateSpec, Vec<RaceSpec>, ChoiceModel) {
    let electorate = ElectorateSpec {
        seed,
        n_voters,
        dimension: 1,
        ideal_distribution: IdealDistribution::Uniform { lo: 1.0, hi: 2.5 },
        n_measures: 10,
        dem_position: vec![0.75],
        rep_position: vec![2.75],
        measure_spread: 0.5,
        missing_rate: 0.0,
    };
    let races = [("dd_wide", -0.5), ("dd_mid", -0.19), ("dd_close", -0.09)]
        .into_iter()
        .map(|(id, left)| RaceSpec {
            race_id: id.to_string(),
            race_type: RaceType::StateHouse,
            cand1_party: Party::D,
            cand2_party: Party::D,
            cand1_pos: vec![left],
            cand2_pos: vec![-0.04],
        })
        .collect();
    let model = ChoiceModel {
        mode: ChoiceMode::Probabilistic,
        cost: 0.015,
        noise: Some(NoiseCdf::Normal { scale: 0.08 }),
        abstention: Abstention::Stakes,
    };
    (electorate, races, model)
}

/// Reverse-S curve scaled for [`same_party_scenario`]: the inflection at 1
/// puts every candidate distance in the convex far field, where wider gaps
/// leave voters more indifferent, not less.
pub fn same_party_reverse_s() -> LossSpec {
    LossSpec::reverse_s(1.0, 2.0).expect("constants are valid")
}

/// Concave contrast for [`same_party_scenario`], scaled so the utility gaps
/// straddle the abstention band at the scenario's distances.
pub fn same_party_concave() -> LossSpec {
    LossSpec::concave(0.1, 2.0).expect("constants are valid")
}

/// Half-separations for the cross-party sweep: twenty two-party races with
/// candidates at 5 - s and 5 + s, from nearly converged to nearly pinned at
/// the electorate's edges.
pub const SWEEP_SEPARATIONS: [f64; 20] = [
    0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5, 3.7,
    3.9, 4.05, 4.2,
];

/// A uniform electorate on [0, 10] facing twenty D-R races that fan out
/// symmetrically from the center, sweeping polarization from roughly 0.1 to
/// above 0.9. The moderate (middle-ranked) groups straddle the center, so
/// their stakes in race j scale with the loss curve's slope at distance s_j.
pub fn polarization_sweep_scenario(
    seed: u64,
    n_voters: u64,
) -> (ElectorateSpec, Vec<RaceSpec>, ChoiceModel) {
    let electorate = ElectorateSpec {
        seed,
        n_voters,
        dimension: 1,
        ideal_distribution: IdealDistribution::Uniform { lo: 0.0, hi: 10.0 },
        n_measures: 10,
        dem_position: vec![0.5],
        rep_position: vec![9.5],
        measure_spread: 4.2,
        missing_rate: 0.0,
    };
    let races = SWEEP_SEPARATIONS
        .iter()
        .enumerate()
        .map(|(i, s)| RaceSpec {
            race_id: format!("dr_{:02}", i + 1),
            race_type: RaceType::UsHouse,
            cand1_party: Party::D,
            cand2_party: Party::R,
            cand1_pos: vec![5.0 - s],
            cand2_pos: vec![5.0 + s],
        })
        .collect();
    let model = ChoiceModel {
        mode: ChoiceMode::Probabilistic,
        cost: 0.025,
        noise: Some(NoiseCdf::Normal { scale: 0.08 }),
        abstention: Abstention::Stakes,
    };
    (electorate, races, model)
}

/// Reverse-S curve scaled for [`polarization_sweep_scenario`]: the slope
/// peaks at distance sqrt(2), inside the sweep's separation range, so
/// moderate-group stakes rise and then fall as the candidates fan out.
pub fn sweep_reverse_s() -> LossSpec {
    LossSpec::reverse_s(1.0, 4.0).expect("constants are valid")
}

/// Concave contrast for [`polarization_sweep_scenario`]: stakes grow with
/// separation everywhere, so moderate abstention falls monotonically.
pub fn sweep_concave() -> LossSpec {
    LossSpec::concave(0.02, 2.0).expect("constants are valid")
}

/// A two-party platform contest with no Condorcet winner: a symmetric bimodal
/// electorate under a short-range reverse-S curve with costly voting. Each
/// mode's voters are nearly indifferent between any two far platforms, so a
/// platform can beat one rival at the opposite mode yet lose to another a few
/// grid steps away, and best-response dynamics falls into a three-platform
/// majority cycle (one platform at one mode, two at the other) instead of
/// settling anywhere.
pub fn no_condorcet_contest() -> (IdealDistribution, LossSpec, ChoiceModel) {
    let dist = IdealDistribution::BimodalMixture {
        mean1: -1.25,
        sd1: 0.5,
        mean2: 1.25,
        sd2: 0.5,
        weight1: 0.5,
    };
    let loss = LossSpec::reverse_s(1.0, 0.6).expect("constants are valid");
    let model = ChoiceModel {
        mode: ChoiceMode::Deterministic,
        cost: 0.06,
        noise: None,
        abstention: Abstention::Stakes,
    };
    (dist, loss, model)
}

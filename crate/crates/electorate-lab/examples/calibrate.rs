//! Prints the summary statistics behind the acceptance suite's thresholds:
//! group abstention ladders for the same-party scenario, polarization tables
//! and fitted slopes for the cross-party sweep, Condorcet/equilibrium checks
//! on random symmetric densities, a parameter search for a bimodal contest
//! with a majority cycle, and classifier containment under noise.
//!
//! Run all sections, or name some: `cargo run --example calibrate -- sweep cycle`.

use std::collections::BTreeMap;
use std::time::Instant;

use electorate_lab::choice::{Abstention, ChoiceMode, ChoiceModel};
use electorate_lab::compete::{
    best_response_dynamics, condorcet_winner, pure_equilibria, BrdOutcome, VoterDensity,
};
use electorate_lab::electorate::{
    generate_electorate, simulate_election, BallotRecord, ElectorateSpec, IdealDistribution,
    RaceSpec,
};
use electorate_lab::groups::{
    group_profile, moderate_groups, pearson, race_polarization, spearman, tabulate, GroupStats,
};
use electorate_lab::loss::{LossFamily, LossSpec};
use electorate_lab::presets;
use electorate_lab::regress::{
    classify_form, piecewise_polarization, quadratic_polarization, Dimensionality, FeSpec,
    TrendLabel,
};
use electorate_lab::rng::StreamFamily;
use electorate_lab::ChoiceDistribution;
use rand::Rng;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let want = |name: &str| args.is_empty() || args.iter().any(|a| a == name);

    if want("same_party") {
        section_same_party();
    }
    if want("sweep") {
        section_sweep();
    }
    if want("median") {
        section_median_benchmarks();
    }
    if want("cycle") {
        section_cycle_search();
    }
    if want("classifier") {
        section_classifier();
    }
    if want("limits") {
        section_deterministic_limit();
    }
    if want("scale") {
        section_scale();
    }
}

fn run_scenario(
    spec: &ElectorateSpec,
    races: &[RaceSpec],
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Vec<BallotRecord> {
    let voters = generate_electorate(spec).expect("scenario spec is valid");
    simulate_election(spec, &voters, races, loss, model).expect("scenario simulates")
}

/// Abstention and predictability averaged per group over the given races.
fn profile(
    records: &[BallotRecord],
    race_ids: &[String],
) -> (Vec<GroupStats>, BTreeMap<u32, (f64, f64)>) {
    let stats = tabulate(records, race_ids).expect("tabulation succeeds");
    let prof = group_profile(&stats, race_ids).expect("profile is nonempty");
    (stats, prof)
}

fn section_same_party() {
    println!("== same_party: group abstention ladder (100k voters, 3 D-D races) ==");
    let (spec, races, model) = presets::same_party_scenario(42, 100_000);
    let ids: Vec<String> = races.iter().map(|r| r.race_id.clone()).collect();
    for (name, loss) in [
        ("reverse_s", presets::same_party_reverse_s()),
        ("concave", presets::same_party_concave()),
    ] {
        let t0 = Instant::now();
        let records = run_scenario(&spec, &races, &loss, &model);
        let (_, prof) = profile(&records, &ids);
        let ks: Vec<f64> = prof.keys().map(|k| *k as f64).collect();
        let abst: Vec<f64> = prof.values().map(|(a, _)| *a).collect();
        let rho = spearman(&ks, &abst).expect("spearman defined");
        println!("[{name}] elapsed {:.2}s", t0.elapsed().as_secs_f64());
        for (k, (a, p)) in &prof {
            println!("  k={k:>2}  abstention={a:.4}  predictability={p:.4}");
        }
        let diffs: Vec<f64> = abst.windows(2).map(|w| w[1] - w[0]).collect();
        let min_diff = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("  spearman(k, abstention) = {rho:.4}  min adjacent diff = {min_diff:+.4}");
    }
}

/// Pooled moderate-group rows per cross-party race: (pol, abstention,
/// predictability), mirroring the CLI's Case 2 table.
fn moderate_rows(
    stats: &[GroupStats],
    races: &[RaceSpec],
    moderate: &[u32],
    n_measures: usize,
) -> Vec<(String, f64, f64, f64)> {
    let mut rows = Vec::new();
    for race in races.iter().filter(|r| r.is_cross_party()) {
        let Some(pol) = race_polarization(stats, &race.race_id, n_measures) else {
            continue;
        };
        let mut total = 0u64;
        let mut dem = 0u64;
        let mut rep = 0u64;
        let mut abstain = 0u64;
        for cell in stats
            .iter()
            .filter(|s| s.race_id == race.race_id && moderate.contains(&s.group))
        {
            total += cell.n_total;
            dem += cell.n_dem;
            rep += cell.n_rep;
            abstain += cell.n_abstain;
        }
        if total == 0 {
            continue;
        }
        let abst = abstain as f64 / total as f64;
        let pred = dem.abs_diff(rep) as f64 / total as f64;
        rows.push((race.race_id.clone(), pol, abst, pred));
    }
    rows
}

fn section_sweep() {
    println!("== sweep: cross-party polarization sweep (200k voters, 20 D-R races) ==");
    let (spec, races, model) = presets::polarization_sweep_scenario(2024, 200_000);
    let ids: Vec<String> = races.iter().map(|r| r.race_id.clone()).collect();
    for (name, loss) in [
        ("reverse_s", presets::sweep_reverse_s()),
        ("concave", presets::sweep_concave()),
    ] {
        let t0 = Instant::now();
        let records = run_scenario(&spec, &races, &loss, &model);
        let (stats, prof) = profile(&records, &ids);
        let moderate = moderate_groups(&stats, &races, 0.02).expect("moderates defined");
        let rows = moderate_rows(&stats, &races, &moderate, spec.n_measures);
        println!(
            "[{name}] elapsed {:.2}s  moderate groups {moderate:?}",
            t0.elapsed().as_secs_f64()
        );
        for (id, pol, abst, pred) in &rows {
            println!("  {id}  pol={pol:.4}  mod_abst={abst:.4}  mod_pred={pred:.4}");
        }
        let pol: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let abst: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let pred: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let pol_mean = pol.iter().sum::<f64>() / pol.len() as f64;
        println!(
            "  pol range [{:.4}, {:.4}]  mean {pol_mean:.4}",
            pol.iter().cloned().fold(f64::INFINITY, f64::min),
            pol.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let (lo, hi) = piecewise_polarization(&abst, &pol, pol_mean).expect("piecewise fits");
        println!(
            "  abstention piecewise slopes: low {:+.4} (se {:.4}), high {:+.4} (se {:.4})",
            lo.coefficient("pol"),
            lo.standard_error("pol"),
            hi.coefficient("pol"),
            hi.standard_error("pol"),
        );
        let quad = quadratic_polarization(&abst, &pol, FeSpec::None).expect("quadratic fits");
        println!(
            "  abstention pol2 = {:+.4} (se {:.4})",
            quad.coefficient("pol2"),
            quad.standard_error("pol2"),
        );
        let (plo, phi) = piecewise_polarization(&pred, &pol, pol_mean).expect("piecewise fits");
        let pquad = quadratic_polarization(&pred, &pol, FeSpec::None).expect("quadratic fits");
        println!(
            "  predictability piecewise slopes: low {:+.4}, high {:+.4}; pol2 = {:+.4} (se {:.4})",
            plo.coefficient("pol"),
            phi.coefficient("pol"),
            pquad.coefficient("pol2"),
            pquad.standard_error("pol2"),
        );
        let (abst_g, pred_g): (Vec<f64>, Vec<f64>) = prof.values().cloned().unzip();
        let r = pearson(&abst_g, &pred_g).expect("pearson defined");
        println!("  group-level pearson(abstention, predictability) = {r:+.4}");
    }
}

fn section_median_benchmarks() {
    println!("== median: concave loss on 20 random symmetric densities (G=201) ==");
    let loss = LossSpec::concave(1.0, 2.0).expect("valid");
    // Zero cost keeps every voter decisive, so the margin function has no
    // flat abstention plateau and the median is the unique attractor.
    let model = ChoiceModel {
        mode: ChoiceMode::Deterministic,
        cost: 0.0,
        noise: None,
        abstention: Abstention::Stakes,
    };
    let family = StreamFamily::new(7, "densities");
    let t0 = Instant::now();
    let mut all_ok = true;
    for trial in 0..20u64 {
        let mut rng = family.stream(trial);
        let dist = if trial % 2 == 0 {
            IdealDistribution::Normal {
                mean: -1.0 + 2.0 * rng.gen::<f64>(),
                sd: 0.4 + 1.1 * rng.gen::<f64>(),
            }
        } else {
            let center = -1.0 + 2.0 * rng.gen::<f64>();
            let half = 0.8 + 1.2 * rng.gen::<f64>();
            let edges: Vec<f64> = (0..7).map(|i| center - half + half / 3.0 * i as f64).collect();
            IdealDistribution::Histogram {
                edges,
                weights: vec![1.0, 2.0, 3.0, 3.0, 2.0, 1.0],
            }
        };
        let density = VoterDensity::from_distribution(&dist, 201).expect("density builds");
        let platforms: Vec<f64> = density.grid().to_vec();
        let median = density.median();
        let cw = condorcet_winner(&density, &platforms, &loss, &model).expect("condorcet runs");
        let start = (platforms[0], platforms[platforms.len() - 1]);
        let brd = best_response_dynamics(&density, &platforms, &loss, &model, start, 10_000)
            .expect("dynamics run");
        let brd_ok = matches!(brd, BrdOutcome::Converged { p1, p2, .. } if p1 == median && p2 == median);
        let cw_ok = cw == Some(median);
        if !(cw_ok && brd_ok) {
            all_ok = false;
            println!("  trial {trial}: cw={cw:?} median={median:.4} brd={brd:?}");
        }
    }
    println!(
        "  all 20 trials condorcet==median and brd->(median,median): {all_ok}  ({:.2}s)",
        t0.elapsed().as_secs_f64()
    );
}

fn section_cycle_search() {
    println!("== cycle: bimodal reverse-S search for a 3-platform majority cycle (G=201) ==");
    let t0 = Instant::now();
    let mut hits = 0;
    for b in [1.0, 1.25, 1.5] {
        for (sd1, sd2) in [(0.3, 0.3), (0.3, 0.5), (0.5, 0.3), (0.5, 0.5)] {
            for w1 in [0.45, 0.5, 0.55, 0.6] {
                for omega in [0.3, 0.6, 1.0, 1.5] {
                    for cost in [0.01, 0.03, 0.06] {
                        let dist = IdealDistribution::BimodalMixture {
                            mean1: -b,
                            sd1,
                            mean2: b,
                            sd2,
                            weight1: w1,
                        };
                        let loss = LossSpec::reverse_s(1.0, omega).expect("valid");
                        let model = ChoiceModel {
                            mode: ChoiceMode::Deterministic,
                            cost,
                            noise: None,
                            abstention: Abstention::Stakes,
                        };
                        let density =
                            VoterDensity::from_distribution(&dist, 201).expect("density builds");
                        let platforms: Vec<f64> = density.grid().to_vec();
                        let cw = condorcet_winner(&density, &platforms, &loss, &model)
                            .expect("condorcet runs");
                        if cw.is_some() {
                            continue;
                        }
                        let n = platforms.len();
                        let nearest = |x: f64| -> f64 {
                            *platforms
                                .iter()
                                .min_by(|p, q| {
                                    (*p - x).abs().partial_cmp(&(*q - x).abs()).unwrap()
                                })
                                .unwrap()
                        };
                        let starts = [
                            (platforms[0], platforms[n - 1]),
                            (nearest(-b), nearest(b)),
                            (platforms[n / 4], platforms[3 * n / 4]),
                        ];
                        for (si, start) in starts.iter().enumerate() {
                            let brd = best_response_dynamics(
                                &density, &platforms, &loss, &model, *start, 10_000,
                            )
                            .expect("dynamics run");
                            let BrdOutcome::Cycle { witness } = &brd else {
                                continue;
                            };
                            if witness.len() != 3 {
                                continue;
                            }
                            let left = witness.iter().filter(|p| **p < 0.0).count();
                            if left != 1 && left != 2 {
                                continue;
                            }
                            let eq = pure_equilibria(&density, &platforms, &loss, &model)
                                .expect("equilibria run");
                            if !eq.is_empty() {
                                continue;
                            }
                            hits += 1;
                            if hits <= 15 {
                                println!(
                                    "  HIT b={b} sd=({sd1},{sd2}) w1={w1} omega={omega} c={cost} start#{si}: witness {witness:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    println!("  {hits} three-platform hits  ({:.2}s)", t0.elapsed().as_secs_f64());
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Draws one synthetic indifference dataset for the given family index
/// (0=linear, 1=concave, 2=convex, 3=reverse_s): 26 proxy points on a grid
/// scaled to the curve's natural length, plus 2% relative noise.
fn classifier_dataset(family: usize, trial: u64) -> (LossFamily, Vec<(f64, f64)>) {
    let mut rng = StreamFamily::new(11, "classifier-params").stream(family as u64 * 1000 + trial);
    let alpha = 0.5 + 1.5 * rng.gen::<f64>();
    let gap = 0.2 + 0.6 * rng.gen::<f64>();
    let (truth, spec) = match family {
        0 => (LossFamily::Linear, LossSpec::linear(alpha).expect("valid")),
        1 => {
            let beta = 1.5 + 1.5 * rng.gen::<f64>();
            (LossFamily::Concave, LossSpec::concave(alpha, beta).expect("valid"))
        }
        2 => {
            let beta = 0.3 + 0.4 * rng.gen::<f64>();
            (LossFamily::Convex, LossSpec::convex(alpha, beta).expect("valid"))
        }
        _ => {
            let omega = 0.5 + 2.5 * rng.gen::<f64>();
            (LossFamily::ReverseS, LossSpec::reverse_s(alpha, omega).expect("valid"))
        }
    };
    let scale = spec.inflection().unwrap_or(1.0);
    let clean: Vec<(f64, f64)> = (0..26)
        .map(|i| {
            let m = 0.1 * i as f64 * scale;
            (m, spec.indifference(m, m + gap * scale).expect("defined"))
        })
        .collect();
    let y_scale = clean.iter().fold(0.0_f64, |m, (_, y)| m.max(y.abs()));
    let mut noise_rng = StreamFamily::new(11, "classifier-noise").stream(family as u64 * 1000 + trial);
    let noisy = clean
        .iter()
        .map(|(x, y)| (*x, y + 0.02 * y_scale * standard_normal(&mut noise_rng)))
        .collect();
    (truth, noisy)
}

fn section_classifier() {
    println!("== classifier: containment over 200 noisy datasets (50 per family) ==");
    let t0 = Instant::now();
    let mut contained = 0usize;
    let mut per_family = [0usize; 4];
    let mut ushape_unique = true;
    for family in 0..4usize {
        for trial in 0..50u64 {
            let (truth, points) = classifier_dataset(family, trial);
            let (label, families) =
                classify_form(&points, Dimensionality::Uni).expect("classifier runs");
            if label == TrendLabel::UShaped && families != vec![LossFamily::ReverseS] {
                ushape_unique = false;
            }
            if families.contains(&truth) {
                contained += 1;
                per_family[family] += 1;
            } else if per_family[family] >= 45 {
                println!("  miss: truth {truth:?} labeled {label:?} (family {family}, trial {trial})");
            }
        }
    }
    println!(
        "  contained {contained}/200  per family {per_family:?}  ushape_unique={ushape_unique}  ({:.2}s)",
        t0.elapsed().as_secs_f64()
    );
}

fn section_deterministic_limit() {
    println!("== limits: probabilistic normalization and deterministic limit ==");
    let family = StreamFamily::new(5, "limit-draws");
    let mut rng = family.stream(0);
    let kinds = [
        electorate_lab::NoiseCdf::UniformLinear { scale: 1e-6 },
        electorate_lab::NoiseCdf::Normal { scale: 1e-6 },
        electorate_lab::NoiseCdf::Logistic { scale: 1e-6 },
    ];
    let mut checked = 0;
    let mut exact = 0;
    while checked < 1000 {
        let u1 = -3.0 * rng.gen::<f64>();
        let u2 = -3.0 * rng.gen::<f64>();
        let c = 0.05;
        if (u1 - u2 - 2.0 * c).abs() < 1e-3 || (u1 - u2 + 2.0 * c).abs() < 1e-3 {
            continue;
        }
        checked += 1;
        for noise in kinds {
            let model = ChoiceModel {
                mode: ChoiceMode::Probabilistic,
                cost: c,
                noise: Some(noise),
                abstention: Abstention::Stakes,
            };
            let dist = model.decide_probabilistic(u1, u2).expect("valid inputs");
            let det = ChoiceModel {
                mode: ChoiceMode::Deterministic,
                cost: c,
                noise: None,
                abstention: Abstention::Stakes,
            }
            .decide_deterministic(u1, u2);
            let ChoiceDistribution { p_c1, p_c2, p_abstain } = dist;
            let point_mass = match det {
                electorate_lab::Decision::VoteC1 => p_c1,
                electorate_lab::Decision::VoteC2 => p_c2,
                electorate_lab::Decision::Abstain => p_abstain,
            };
            if point_mass == 1.0 {
                exact += 1;
            }
        }
    }
    println!("  exact point masses: {exact}/{}", checked * 3);
}

fn section_scale() {
    println!("== scale: 1M voters x 20 races, simulate + tabulate ==");
    let (mut spec, mut races, model) = presets::polarization_sweep_scenario(99, 1_000_000);
    spec.n_measures = 10;
    races.truncate(20);
    let loss = presets::sweep_reverse_s();
    let t0 = Instant::now();
    let voters = generate_electorate(&spec).expect("spec valid");
    let records = simulate_election(&spec, &voters, &races, &loss, &model).expect("simulates");
    let ids: Vec<String> = races.iter().map(|r| r.race_id.clone()).collect();
    let stats = tabulate(&records, &ids).expect("tabulates");
    println!(
        "  {} records, {} cells in {:.2}s",
        records.len(),
        stats.len(),
        t0.elapsed().as_secs_f64()
    );
}

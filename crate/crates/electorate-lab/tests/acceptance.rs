//! Acceptance suite: ten end-to-end checks, one per headline requirement,
//! each printing one `ACCEPTANCE n: PASS` line (run with `--nocapture` to see
//! them). Every tolerance and scenario constant is pinned here; the reference
//! scenarios live in `electorate_lab::presets`.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use electorate_lab::choice::{Abstention, ChoiceMode, ChoiceModel, NoiseCdf};
use electorate_lab::compete::{
    best_response_dynamics, condorcet_winner, pure_equilibria, BrdOutcome, VoterDensity,
};
use electorate_lab::cvr::{read_cvr, write_cvr, CvrFile};
use electorate_lab::electorate::{
    generate_electorate, simulate_election, subgroup_id, voter_group, BallotRecord,
    ElectorateSpec, IdealDistribution, MeasureResponse, RaceSpec,
};
use electorate_lab::groups::{
    group_profile, moderate_groups, pearson, race_polarization, spearman, tabulate, GroupStats,
};
use electorate_lab::loss::{LossFamily, LossSpec};
use electorate_lab::presets;
use electorate_lab::regress::{
    classify_form, ols, piecewise_polarization, predict_trend, quadratic_polarization,
    CaseSetting, Dimensionality, FeSpec, TrendLabel,
};
use electorate_lab::rng::StreamFamily;
use electorate_lab::{Choice, Decision};
use rand::Rng;

/// Noiseless regressions must recover coefficients this tightly.
const COEF_TOL: f64 = 1e-9;
/// Residuals must be orthogonal to the design within this bound.
const ORTHO_TOL: f64 = 1e-8;
/// Probabilistic choice masses must sum to one within this bound.
const NORM_TOL: f64 = 1e-12;
/// Spearman bound for the same-party abstention ladder.
const LADDER_RHO: f64 = 0.9;
/// Pearson bound for the abstention-predictability coupling.
const COUPLING_R: f64 = -0.5;
/// Classifier containment floor over the 200 noisy datasets.
const CONTAINMENT_FLOOR: usize = 190;

fn run_scenario(
    spec: &ElectorateSpec,
    races: &[RaceSpec],
    loss: &LossSpec,
    model: &ChoiceModel,
) -> Vec<BallotRecord> {
    let voters = generate_electorate(spec).expect("scenario spec is valid");
    simulate_election(spec, &voters, races, loss, model).expect("scenario simulates")
}

fn abstention_ladder(
    spec: &ElectorateSpec,
    races: &[RaceSpec],
    loss: &LossSpec,
    model: &ChoiceModel,
) -> BTreeMap<u32, (f64, f64)> {
    let ids: Vec<String> = races.iter().map(|r| r.race_id.clone()).collect();
    let records = run_scenario(spec, races, loss, model);
    let stats = tabulate(&records, &ids).expect("tabulation succeeds");
    group_profile(&stats, &ids).expect("profile is nonempty")
}

#[test]
fn criterion_01_trend_oracle_table() {
    let t0 = Instant::now();
    let uni: [(LossFamily, Option<f64>, TrendLabel); 5] = [
        (LossFamily::Linear, None, TrendLabel::Constant),
        (LossFamily::Concave, None, TrendLabel::Decreasing),
        (LossFamily::Concave, Some(2.0), TrendLabel::Decreasing),
        (LossFamily::Convex, Some(0.5), TrendLabel::Increasing),
        (LossFamily::ReverseS, None, TrendLabel::UShaped),
    ];
    let multi: [(LossFamily, Option<f64>, TrendLabel); 6] = [
        (LossFamily::Linear, None, TrendLabel::Increasing),
        (LossFamily::Concave, Some(2.0), TrendLabel::Constant),
        (LossFamily::Concave, Some(3.0), TrendLabel::Decreasing),
        (LossFamily::Concave, Some(1.5), TrendLabel::Increasing),
        (LossFamily::Convex, Some(0.5), TrendLabel::Increasing),
        (LossFamily::ReverseS, None, TrendLabel::UShaped),
    ];
    let mut rows = 0;
    for setting in [CaseSetting::Case1, CaseSetting::Case2] {
        for (family, beta, expect) in uni {
            let got = predict_trend(family, setting, Dimensionality::Uni, beta)
                .expect("uni-dimensional trends never need beta");
            assert_eq!(got, expect, "uni {family:?} beta {beta:?} under {setting:?}");
            rows += 1;
        }
        for (family, beta, expect) in multi {
            let got = predict_trend(family, setting, Dimensionality::Multi, beta)
                .expect("beta supplied where required");
            assert_eq!(got, expect, "multi {family:?} beta {beta:?} under {setting:?}");
            rows += 1;
        }
        assert!(
            predict_trend(LossFamily::Concave, setting, Dimensionality::Multi, None).is_err(),
            "multi-dimensional concave requires beta"
        );
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "trend table took {elapsed:.3}s, budget 1s");
    println!("ACCEPTANCE 1: PASS — {rows} trend rows match exactly in {elapsed:.3}s");
}

#[test]
fn criterion_02_same_party_abstention_ladder() {
    let t0 = Instant::now();
    let (spec, races, model) = presets::same_party_scenario(42, 100_000);

    let prof = abstention_ladder(&spec, &races, &presets::same_party_reverse_s(), &model);
    assert_eq!(prof.len(), 11, "all eleven group ranks populated");
    let ks: Vec<f64> = prof.keys().map(|k| *k as f64).collect();
    let abst: Vec<f64> = prof.values().map(|(a, _)| *a).collect();
    let rho_rs = spearman(&ks, &abst).expect("spearman defined");
    assert!(
        rho_rs >= LADDER_RHO,
        "reverse-S ladder should rise with group rank: spearman {rho_rs:.4} < {LADDER_RHO}"
    );
    assert!(
        abst.last() > abst.first(),
        "extreme groups order: k=10 abstains more than k=0 under reverse-S"
    );

    let prof = abstention_ladder(&spec, &races, &presets::same_party_concave(), &model);
    let ks: Vec<f64> = prof.keys().map(|k| *k as f64).collect();
    let abst: Vec<f64> = prof.values().map(|(a, _)| *a).collect();
    let rho_cc = spearman(&ks, &abst).expect("spearman defined");
    assert!(
        rho_cc <= -LADDER_RHO,
        "concave ladder should fall with group rank: spearman {rho_cc:.4} > -{LADDER_RHO}"
    );

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "same-party runs took {elapsed:.2}s, budget 30s");
    println!(
        "ACCEPTANCE 2: PASS — 100k-voter ladder: reverse-S spearman {rho_rs:.3}, concave {rho_cc:.3} in {elapsed:.2}s"
    );
}

/// Pooled moderate-group (pol, abstention, predictability) rows per
/// cross-party race, the Case 2 analysis table.
fn moderate_rows(
    stats: &[GroupStats],
    races: &[RaceSpec],
    moderate: &[u32],
    n_measures: usize,
) -> Vec<(f64, f64, f64)> {
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
        rows.push((
            pol,
            abstain as f64 / total as f64,
            dem.abs_diff(rep) as f64 / total as f64,
        ));
    }
    rows
}

struct SweepFits {
    pol_min: f64,
    pol_max: f64,
    abst_low: f64,
    abst_high: f64,
    abst_quad: f64,
    abst_quad_se: f64,
    pred_low: f64,
    pred_high: f64,
    pred_quad: f64,
}

fn sweep_fits(loss: &LossSpec) -> SweepFits {
    let (spec, races, model) = presets::polarization_sweep_scenario(2024, 200_000);
    let ids: Vec<String> = races.iter().map(|r| r.race_id.clone()).collect();
    let records = run_scenario(&spec, &races, loss, &model);
    let stats = tabulate(&records, &ids).expect("tabulation succeeds");
    let moderate = moderate_groups(&stats, &races, 0.02).expect("moderates defined");
    let rows = moderate_rows(&stats, &races, &moderate, spec.n_measures);
    assert_eq!(rows.len(), 20, "every race has defined polarization");

    let pol: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let abst: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let pred: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let pol_mean = pol.iter().sum::<f64>() / pol.len() as f64;
    let (alo, ahi) = piecewise_polarization(&abst, &pol, pol_mean).expect("piecewise fits");
    let aq = quadratic_polarization(&abst, &pol, FeSpec::None).expect("quadratic fits");
    let (plo, phi) = piecewise_polarization(&pred, &pol, pol_mean).expect("piecewise fits");
    let pq = quadratic_polarization(&pred, &pol, FeSpec::None).expect("quadratic fits");
    SweepFits {
        pol_min: pol.iter().cloned().fold(f64::INFINITY, f64::min),
        pol_max: pol.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        abst_low: alo.coefficient("pol"),
        abst_high: ahi.coefficient("pol"),
        abst_quad: aq.coefficient("pol2"),
        abst_quad_se: aq.standard_error("pol2"),
        pred_low: plo.coefficient("pol"),
        pred_high: phi.coefficient("pol"),
        pred_quad: pq.coefficient("pol2"),
    }
}

#[test]
fn criterion_03_cross_party_sign_pattern() {
    let t0 = Instant::now();

    let rs = sweep_fits(&presets::sweep_reverse_s());
    assert!(
        rs.pol_min <= 0.1 && rs.pol_max >= 0.9,
        "polarization must span [0.1, 0.9], got [{:.4}, {:.4}]",
        rs.pol_min,
        rs.pol_max
    );
    assert!(
        rs.abst_low < 0.0 && rs.abst_high > 0.0,
        "reverse-S moderate abstention slopes must flip (-,+), got ({:+.4}, {:+.4})",
        rs.abst_low,
        rs.abst_high
    );
    assert!(
        rs.abst_quad > rs.abst_quad_se,
        "reverse-S abstention curvature must be positive beyond one se: {:+.4} vs se {:.4}",
        rs.abst_quad,
        rs.abst_quad_se
    );
    assert!(
        rs.pred_low > 0.0 && rs.pred_high < 0.0 && rs.pred_quad < 0.0,
        "predictability must mirror the abstention pattern, got ({:+.4}, {:+.4}, quad {:+.4})",
        rs.pred_low,
        rs.pred_high,
        rs.pred_quad
    );

    let cc = sweep_fits(&presets::sweep_concave());
    assert!(
        cc.abst_low < 0.0 && cc.abst_high < 0.0,
        "concave moderate abstention must stay monotone (no sign flip), got ({:+.4}, {:+.4})",
        cc.abst_low,
        cc.abst_high
    );

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "sweep runs took {elapsed:.2}s, budget 60s");
    println!(
        "ACCEPTANCE 3: PASS — pol [{:.3}, {:.3}], reverse-S slopes ({:+.3}, {:+.3}) quad {:+.3}, concave ({:+.3}, {:+.3}) in {elapsed:.2}s",
        rs.pol_min, rs.pol_max, rs.abst_low, rs.abst_high, rs.abst_quad, cc.abst_low, cc.abst_high
    );
}

#[test]
fn criterion_04_probability_normalization_and_limit() {
    let family = StreamFamily::new(5, "normalization-draws");
    let mut rng = family.stream(0);
    let mut worst = 0.0_f64;
    for i in 0..100_000u32 {
        let u1 = -5.0 * rng.gen::<f64>();
        let u2 = -5.0 * rng.gen::<f64>();
        let cost = 0.5 * rng.gen::<f64>();
        let scale = 0.05 + 1.95 * rng.gen::<f64>();
        let noise = match i % 3 {
            0 => NoiseCdf::UniformLinear { scale },
            1 => NoiseCdf::Normal { scale },
            _ => NoiseCdf::Logistic { scale },
        };
        let model = ChoiceModel {
            mode: ChoiceMode::Probabilistic,
            cost,
            noise: Some(noise),
            abstention: Abstention::Stakes,
        };
        let d = model.decide_probabilistic(u1, u2).expect("inputs are valid");
        for p in [d.p_c1, d.p_c2, d.p_abstain] {
            assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
        }
        let gap = (d.p_c1 + d.p_c2 + d.p_abstain - 1.0).abs();
        worst = worst.max(gap);
        assert!(gap <= NORM_TOL, "masses sum to 1 + {gap:.3e} at draw {i}");
    }

    let mut rng = family.stream(1);
    let mut checked = 0;
    while checked < 1000 {
        let u1 = -3.0 * rng.gen::<f64>();
        let u2 = -3.0 * rng.gen::<f64>();
        let cost = 0.05;
        // Stay away from the two decision boundaries so the sharpened CDF
        // saturates exactly.
        if (u1 - u2 - 2.0 * cost).abs() < 1e-3 || (u1 - u2 + 2.0 * cost).abs() < 1e-3 {
            continue;
        }
        checked += 1;
        let det = ChoiceModel {
            mode: ChoiceMode::Deterministic,
            cost,
            noise: None,
            abstention: Abstention::Stakes,
        }
        .decide_deterministic(u1, u2);
        for noise in [
            NoiseCdf::UniformLinear { scale: 1e-6 },
            NoiseCdf::Normal { scale: 1e-6 },
            NoiseCdf::Logistic { scale: 1e-6 },
        ] {
            let model = ChoiceModel {
                mode: ChoiceMode::Probabilistic,
                cost,
                noise: Some(noise),
                abstention: Abstention::Stakes,
            };
            let d = model.decide_probabilistic(u1, u2).expect("inputs are valid");
            let mass = match det {
                Decision::VoteC1 => d.p_c1,
                Decision::VoteC2 => d.p_c2,
                Decision::Abstain => d.p_abstain,
            };
            assert_eq!(
                mass, 1.0,
                "at scale 1e-6 the distribution must be a point mass on {det:?}"
            );
        }
    }
    println!(
        "ACCEPTANCE 4: PASS — 100k draws normalized (worst gap {worst:.2e}), 3000 deterministic-limit masses exact"
    );
}

#[test]
fn criterion_05_abstention_predictability_coupling() {
    let (spec, races, model) = presets::polarization_sweep_scenario(2024, 200_000);
    let ids: Vec<String> = races.iter().map(|r| r.race_id.clone()).collect();
    let records = run_scenario(&spec, &races, &presets::sweep_reverse_s(), &model);
    let stats = tabulate(&records, &ids).expect("tabulation succeeds");
    let prof = group_profile(&stats, &ids).expect("profile is nonempty");
    let (abst, pred): (Vec<f64>, Vec<f64>) = prof.values().cloned().unzip();
    let r = pearson(&abst, &pred).expect("pearson defined");
    assert!(
        r <= COUPLING_R,
        "group abstention and predictability must couple negatively: r = {r:+.4} > {COUPLING_R}"
    );
    println!(
        "ACCEPTANCE 5: PASS — pearson(abstention, predictability) = {r:+.3} over {} groups",
        prof.len()
    );
}

#[test]
fn criterion_06_equilibrium_benchmarks() {
    // (a) Concave loss on symmetric unimodal densities: the grid median is
    // the Condorcet winner and the unique attractor of best-response
    // dynamics. Zero cost keeps every voter decisive, so the margin function
    // has no abstention plateau for dynamics to stall on.
    let loss = LossSpec::concave(1.0, 2.0).expect("valid");
    let model = ChoiceModel {
        mode: ChoiceMode::Deterministic,
        cost: 0.0,
        noise: None,
        abstention: Abstention::Stakes,
    };
    let family = StreamFamily::new(7, "densities");
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
            let edges: Vec<f64> =
                (0..7).map(|i| center - half + half / 3.0 * i as f64).collect();
            IdealDistribution::Histogram {
                edges,
                weights: vec![1.0, 2.0, 3.0, 3.0, 2.0, 1.0],
            }
        };
        let density = VoterDensity::from_distribution(&dist, 201).expect("density builds");
        let platforms: Vec<f64> = density.grid().to_vec();
        let median = density.median();
        let cw = condorcet_winner(&density, &platforms, &loss, &model).expect("condorcet runs");
        assert_eq!(
            cw,
            Some(median),
            "trial {trial}: concave symmetric density must crown the grid median"
        );
        let start = (platforms[0], platforms[platforms.len() - 1]);
        let brd = best_response_dynamics(&density, &platforms, &loss, &model, start, 10_000)
            .expect("dynamics run");
        assert!(
            matches!(brd, BrdOutcome::Converged { p1, p2, .. } if p1 == median && p2 == median),
            "trial {trial}: dynamics must converge to (median, median), got {brd:?}"
        );
    }

    // (b) The frozen bimodal reverse-S contest: no Condorcet winner, no pure
    // equilibrium, and dynamics locks into a majority cycle over exactly
    // three platforms, two near one mode and one near the other.
    let t0 = Instant::now();
    let (dist, loss, model) = presets::no_condorcet_contest();
    let density = VoterDensity::from_distribution(&dist, 201).expect("density builds");
    let platforms: Vec<f64> = density.grid().to_vec();
    let cw = condorcet_winner(&density, &platforms, &loss, &model).expect("condorcet runs");
    assert_eq!(cw, None, "the frozen bimodal contest has no Condorcet winner");
    let eq = pure_equilibria(&density, &platforms, &loss, &model).expect("equilibria run");
    assert!(eq.is_empty(), "the frozen bimodal contest has no pure equilibrium");
    let start = (platforms[0], platforms[platforms.len() - 1]);
    let brd = best_response_dynamics(&density, &platforms, &loss, &model, start, 10_000)
        .expect("dynamics run");
    let BrdOutcome::Cycle { witness } = brd else {
        panic!("dynamics must cycle on the frozen contest, got {brd:?}");
    };
    assert_eq!(witness.len(), 3, "the cycle visits exactly three platforms: {witness:?}");
    let left = witness.iter().filter(|p| **p < 0.0).count();
    assert!(
        left == 1 || left == 2,
        "cycle platforms must split across the two modes: {witness:?}"
    );
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "bimodal fixture took {elapsed:.2}s, budget 10s");
    println!(
        "ACCEPTANCE 6: PASS — 20 median benchmarks exact; frozen contest cycles over {witness:?} in {elapsed:.2}s"
    );
}

#[test]
fn criterion_07_regression_exactness() {
    // Plain OLS on a noiseless quadratic.
    let x: Vec<f64> = (0..30).map(|i| 0.37 * i as f64 - 5.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v - 1.5 * v * v).collect();
    let ones = vec![1.0; x.len()];
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let names: Vec<String> = ["intercept", "x", "x2"].iter().map(|s| s.to_string()).collect();
    let fit = ols(&y, &names, &[ones.clone(), x.clone(), x2.clone()]).expect("ols fits");
    for (term, want) in [("intercept", 2.0), ("x", 3.0), ("x2", -1.5)] {
        let got = fit.coefficient(term);
        assert!(
            (got - want).abs() <= COEF_TOL,
            "ols {term}: {got} vs {want} beyond {COEF_TOL:e}"
        );
    }
    let resid: Vec<f64> = (0..y.len())
        .map(|i| {
            y[i] - fit.coefficient("intercept") - fit.coefficient("x") * x[i]
                - fit.coefficient("x2") * x2[i]
        })
        .collect();
    for (name, col) in [("intercept", &ones), ("x", &x), ("x2", &x2)] {
        let dot: f64 = col.iter().zip(&resid).map(|(c, e)| c * e).sum();
        assert!(
            dot.abs() <= ORTHO_TOL,
            "ols residuals not orthogonal to {name}: {dot:.3e}"
        );
    }

    // Voter fixed effects on a noiseless quadratic with unit intercepts.
    let mut units = Vec::new();
    let mut pol = Vec::new();
    let mut yfe = Vec::new();
    for unit in 0..10u64 {
        let alpha = 0.7 * unit as f64 - 2.0;
        for t in 0..5 {
            let p = 0.1 * (t + 1) as f64 + 0.05 * unit as f64;
            units.push(unit);
            pol.push(p);
            yfe.push(alpha + 3.0 * p - 1.5 * p * p);
        }
    }
    let fit = quadratic_polarization(&yfe, &pol, FeSpec::Voter(&units)).expect("fe fits");
    for (term, want) in [("pol", 3.0), ("pol2", -1.5)] {
        let got = fit.coefficient(term);
        assert!(
            (got - want).abs() <= COEF_TOL,
            "voter-fe {term}: {got} vs {want} beyond {COEF_TOL:e}"
        );
    }
    // Orthogonality in the demeaned space the estimator actually solves.
    let mut sums: BTreeMap<u64, (f64, f64, f64, f64)> = BTreeMap::new();
    for i in 0..yfe.len() {
        let e = sums.entry(units[i]).or_insert((0.0, 0.0, 0.0, 0.0));
        e.0 += yfe[i];
        e.1 += pol[i];
        e.2 += pol[i] * pol[i];
        e.3 += 1.0;
    }
    let mut dot1 = 0.0;
    let mut dot2 = 0.0;
    for i in 0..yfe.len() {
        let (sy, sp, sp2, c) = sums[&units[i]];
        let yd = yfe[i] - sy / c;
        let p1 = pol[i] - sp / c;
        let p2 = pol[i] * pol[i] - sp2 / c;
        let e = yd - fit.coefficient("pol") * p1 - fit.coefficient("pol2") * p2;
        dot1 += p1 * e;
        dot2 += p2 * e;
    }
    assert!(dot1.abs() <= ORTHO_TOL, "fe residuals not orthogonal to pol: {dot1:.3e}");
    assert!(dot2.abs() <= ORTHO_TOL, "fe residuals not orthogonal to pol2: {dot2:.3e}");
    println!("ACCEPTANCE 7: PASS — noiseless OLS and voter-FE coefficients within 1e-9, orthogonality within 1e-8");
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

/// One synthetic indifference dataset (truth, 26 noisy points) for family
/// index 0..4 = linear, concave, convex, reverse-S. The proxy grid is scaled
/// to the curve's natural length and y carries 2% relative Gaussian noise.
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
    let mut noise_rng =
        StreamFamily::new(11, "classifier-noise").stream(family as u64 * 1000 + trial);
    let noisy = clean
        .iter()
        .map(|(x, y)| (*x, y + 0.02 * y_scale * standard_normal(&mut noise_rng)))
        .collect();
    (truth, noisy)
}

#[test]
fn criterion_08_classifier_containment() {
    let mut contained = 0usize;
    for family in 0..4usize {
        for trial in 0..50u64 {
            let (truth, points) = classifier_dataset(family, trial);
            let (label, families) =
                classify_form(&points, Dimensionality::Uni).expect("classifier runs");
            if label == TrendLabel::UShaped {
                assert_eq!(
                    families,
                    vec![LossFamily::ReverseS],
                    "a fired U-shape must identify reverse-S uniquely"
                );
            }
            if families.contains(&truth) {
                contained += 1;
            }
        }
    }
    assert!(
        contained >= CONTAINMENT_FLOOR,
        "classifier contained the truth on {contained}/200 datasets, floor {CONTAINMENT_FLOOR}"
    );
    println!(
        "ACCEPTANCE 8: PASS — containment {contained}/200, U-shape uniquely reverse-S"
    );
}

#[test]
fn criterion_09_combinatorial_identities() {
    // voter_group range and subgroup counts over every 10-measure pattern.
    let n = 10usize;
    let binomial = [1u64, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1];
    let mut subgroups: Vec<HashSet<u64>> = vec![HashSet::new(); n + 1];
    for bits in 0..(1u32 << n) {
        let measures: Vec<MeasureResponse> = (0..n)
            .map(|q| {
                if bits >> (n - 1 - q) & 1 == 1 {
                    MeasureResponse::One
                } else {
                    MeasureResponse::Zero
                }
            })
            .collect();
        let k = voter_group(&measures).expect("complete pattern");
        assert!(k as usize <= n, "group rank {k} exceeds measure count {n}");
        assert_eq!(k, bits.count_ones(), "rank counts the One responses");
        let id = subgroup_id(&measures).expect("complete pattern");
        subgroups[k as usize].insert(id);
    }
    for (k, seen) in subgroups.iter().enumerate() {
        assert_eq!(
            seen.len() as u64,
            binomial[k],
            "group {k} must contain C(10,{k}) subgroups"
        );
    }
    assert!(
        voter_group(&[MeasureResponse::One, MeasureResponse::Missing]).is_err(),
        "a missing response leaves the group rank undefined"
    );

    // Byte-identical CVR round-trip, first on a handcrafted file exercising
    // the full cell alphabet, then on a simulated file with missing entries.
    let hand = CvrFile {
        n_measures: 2,
        race_ids: vec!["gov".into(), "sen".into()],
        records: vec![
            BallotRecord {
                voter_id: 0,
                measures: vec![MeasureResponse::Zero, MeasureResponse::One],
                choices: vec![Choice::D, Choice::R],
            },
            BallotRecord {
                voter_id: 1,
                measures: vec![MeasureResponse::Missing, MeasureResponse::One],
                choices: vec![Choice::O, Choice::A],
            },
            BallotRecord {
                voter_id: 7,
                measures: vec![MeasureResponse::One, MeasureResponse::Zero],
                choices: vec![Choice::Missing, Choice::D],
            },
        ],
    };
    for (name, file) in [
        ("handcrafted", hand),
        ("simulated", {
            let (mut spec, races, model) = presets::same_party_scenario(7, 2_000);
            spec.missing_rate = 0.1;
            let records = run_scenario(&spec, &races, &presets::same_party_reverse_s(), &model);
            CvrFile {
                n_measures: spec.n_measures,
                race_ids: races.iter().map(|r| r.race_id.clone()).collect(),
                records,
            }
        }),
    ] {
        let mut first = Vec::new();
        write_cvr(&file, &mut first).expect("writes");
        let reread = read_cvr(&first[..]).expect("reads back");
        assert_eq!(reread, file, "{name}: parsed file differs from the original");
        let mut second = Vec::new();
        write_cvr(&reread, &mut second).expect("writes again");
        assert_eq!(first, second, "{name}: round-trip must be byte-identical");
    }
    println!("ACCEPTANCE 9: PASS — group ranks in range, subgroup counts binomial, CVR round-trips byte-identical");
}

#[test]
fn criterion_10_scale_and_thread_determinism() {
    let (spec, mut races, model) = presets::polarization_sweep_scenario(99, 1_000_000);
    races.truncate(20);
    let loss = presets::sweep_reverse_s();
    let ids: Vec<String> = races.iter().map(|r| r.race_id.clone()).collect();

    let sim_bytes = || -> Vec<u8> {
        let records = run_scenario(&spec, &races, &loss, &model);
        let file = CvrFile {
            n_measures: spec.n_measures,
            race_ids: ids.clone(),
            records,
        };
        let mut bytes = Vec::new();
        write_cvr(&file, &mut bytes).expect("writes");
        bytes
    };

    // Timed leg: simulate and tabulate on an eight-thread pool.
    let pool8 = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .expect("pool builds");
    let t0 = Instant::now();
    let bytes8 = pool8.install(sim_bytes);
    let file = read_cvr(&bytes8[..]).expect("reads back");
    let stats = tabulate(&file.records, &file.race_ids).expect("tabulates");
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(
        elapsed < 60.0,
        "1M x 20 simulate+tabulate took {elapsed:.1}s, budget 60s"
    );
    assert!(!stats.is_empty(), "tabulation yields cells");

    // Determinism leg: a single-thread pool must produce identical bytes.
    let pool1 = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool builds");
    let bytes1 = pool1.install(sim_bytes);
    assert!(
        bytes1 == bytes8,
        "single-thread and eight-thread runs must be bitwise identical"
    );
    println!(
        "ACCEPTANCE 10: PASS — 1M voters x 20 races in {elapsed:.1}s, 1-thread and 8-thread outputs identical ({} bytes)",
        bytes8.len()
    );
}

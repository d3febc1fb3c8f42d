//! Command-line front end: subcommands over a single JSON config, exit codes
//! that distinguish config, data, and analysis failures, and a lock file that
//! keeps runs from sharing an output directory.
//!
//! Exit codes: 0 success, 1 config error (the message names the offending
//! key), 2 data error (the message names the file and, for parse errors, the
//! line), 3 analysis precondition failure.

use crate::compete::{
    best_response_dynamics, condorcet_winner, contest, pure_equilibria, write_contest_csv,
    BrdOutcome, CompeteError, ContestOutcome, VoterDensity,
};
use crate::config::{load_config, ConfigError, ExperimentConfig};
use crate::cvr::{read_cvr_file, write_cvr_file, CvrFile};
use crate::electorate::{
    generate_electorate, simulate_election, Choice, RaceSpec, SimError,
};
use crate::groups::{
    group_profile, indifference_correlation, moderate_groups, race_polarization, tabulate,
    write_measures_csv, GroupError, GroupStats,
};
use crate::loss::LossFamily;
use crate::regress::{
    classify_form, piecewise_polarization, predict_trend, quadratic_polarization, write_regression_csv,
    CaseSetting, Dimensionality, FeSpec, RegressError, RegressionResult,
};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// A failure, categorized by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or flags; exit 1. The message names the key.
    Config(String),
    /// Unreadable or malformed files; exit 2. The message names the file.
    Data(String),
    /// The requested analysis has no valid inputs; exit 3.
    Analysis(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Analysis(m) => write!(f, "analysis error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Analysis(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(m) => CliError::Config(m),
            other => CliError::Analysis(other.to_string()),
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        CliError::Analysis(e.to_string())
    }
}

impl From<RegressError> for CliError {
    fn from(e: RegressError) -> Self {
        CliError::Analysis(e.to_string())
    }
}

impl From<CompeteError> for CliError {
    fn from(e: CompeteError) -> Self {
        CliError::Analysis(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "electorate-lab",
    version,
    about = "Spatial-voting simulations: synthetic cast-vote records, group diagnostics, abstention regressions, and platform competition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate ballots and write <out>/cvr.csv.
    Simulate(ConfigArgs),
    /// Tabulate a CVR into group-by-race tables and correlations.
    Analyze(CvrArgs),
    /// Fit piecewise and quadratic abstention regressions.
    Fit(CvrArgs),
    /// Print the predicted abstention trend table (no electorate needed).
    Predict(PredictArgs),
    /// Platform-competition benchmarks on the configured ideal distribution.
    Equilibrium(ConfigArgs),
    /// Classify the abstention-against-polarization functional form.
    Classify(CvrArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Dotted-path override, e.g. --set loss.family=concave (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed, overriding the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: ELECTORATE_LAB_THREADS, then all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Args)]
struct CvrArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Input CVR (default: <output_dir>/cvr.csv).
    #[arg(long, value_name = "PATH")]
    cvr: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Optional config; only output_dir is consulted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Dotted-path override (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Accepted for interface symmetry; predictions are seed-free.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Directory for trends.csv; omit to print only.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: ELECTORATE_LAB_THREADS, then all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => {
            init_threads(args.threads)?;
            let config = load(&args)?;
            let _lock = DirLock::acquire(&config.output_dir)?;
            cmd_simulate(&config)
        }
        Command::Analyze(args) => {
            init_threads(args.config.threads)?;
            let config = load(&args.config)?;
            let _lock = DirLock::acquire(&config.output_dir)?;
            cmd_analyze(&config, args.cvr.as_deref())
        }
        Command::Fit(args) => {
            init_threads(args.config.threads)?;
            let config = load(&args.config)?;
            let _lock = DirLock::acquire(&config.output_dir)?;
            cmd_fit(&config, args.cvr.as_deref())
        }
        Command::Predict(args) => {
            init_threads(args.threads)?;
            cmd_predict(&args)
        }
        Command::Equilibrium(args) => {
            init_threads(args.threads)?;
            let config = load(&args)?;
            let _lock = DirLock::acquire(&config.output_dir)?;
            cmd_equilibrium(&config)
        }
        Command::Classify(args) => {
            init_threads(args.config.threads)?;
            let config = load(&args.config)?;
            let _lock = DirLock::acquire(&config.output_dir)?;
            cmd_classify(&config, args.cvr.as_deref())
        }
    }
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig, CliError> {
    Ok(load_config(
        &args.config,
        &args.set,
        args.seed,
        args.out.as_deref(),
    )?)
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        return Ok(Some(n));
    }
    match std::env::var("ELECTORATE_LAB_THREADS") {
        Ok(s) => match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "ELECTORATE_LAB_THREADS must be a positive integer, got {s:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

#[cfg(feature = "parallel")]
fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = thread_count(flag)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    thread_count(flag)?;
    Ok(())
}

/// Exclusive claim on an output directory, held for the life of the run.
/// The lock file records the holder's pid and is removed on drop.
struct DirLock {
    path: PathBuf,
}

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(".electorate-lab.lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(CliError::Config(format!(
                    "output directory {} is in use by another run (remove {} if stale)",
                    dir.display(),
                    path.display()
                )))
            }
            Err(e) => Err(CliError::Data(format!(
                "cannot lock {}: {e}",
                dir.display()
            ))),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn cmd_simulate(config: &ExperimentConfig) -> Result<(), CliError> {
    let electorate = generate_electorate(&config.electorate)?;
    let records = simulate_election(
        &config.electorate,
        &electorate,
        &config.races,
        &config.loss,
        &config.choice,
    )?;
    let file = CvrFile {
        n_measures: config.electorate.n_measures,
        race_ids: config.races.iter().map(|r| r.race_id.clone()).collect(),
        records,
    };
    let path = config.output_dir.join("cvr.csv");
    write_cvr_file(&file, &path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    println!(
        "wrote {} ({} ballots, {} measures, {} races)",
        path.display(),
        file.records.len(),
        file.n_measures,
        file.race_ids.len()
    );
    Ok(())
}

/// Reads the CVR and checks it against the config: every race in the file
/// must be configured and the measure count must match, since group math and
/// polarization depend on both.
fn load_cvr(
    config: &ExperimentConfig,
    flag: Option<&Path>,
) -> Result<(CvrFile, Vec<RaceSpec>), CliError> {
    let path = flag
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output_dir.join("cvr.csv"));
    let file = read_cvr_file(&path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if file.n_measures != config.electorate.n_measures {
        return Err(CliError::Data(format!(
            "{}: file has {} measures but electorate.n_measures is {}",
            path.display(),
            file.n_measures,
            config.electorate.n_measures
        )));
    }
    let mut races = Vec::with_capacity(file.race_ids.len());
    for id in &file.race_ids {
        let spec = config
            .races
            .iter()
            .find(|r| &r.race_id == id)
            .ok_or_else(|| {
                CliError::Data(format!(
                    "{}: race {id:?} is not in the config's races",
                    path.display()
                ))
            })?;
        races.push(spec.clone());
    }
    Ok((file, races))
}

fn race_ids(races: &[RaceSpec], cross: bool) -> Vec<String> {
    races
        .iter()
        .filter(|r| r.is_cross_party() == cross)
        .map(|r| r.race_id.clone())
        .collect()
}

/// One cross-party race's polarization paired with the moderate groups'
/// pooled abstention rate and predictability in that race.
struct Case2Row {
    race_id: String,
    pol: f64,
    abstention: f64,
    predictability: f64,
}

fn case2_rows(
    stats: &[GroupStats],
    races: &[RaceSpec],
    moderate: &[u32],
    n_measures: usize,
) -> Result<Vec<Case2Row>, CliError> {
    let mut rows = Vec::new();
    for race in races.iter().filter(|r| r.is_cross_party()) {
        let Some(pol) = race_polarization(stats, &race.race_id, n_measures) else {
            continue;
        };
        let mut total = 0u64;
        let mut abstain = 0u64;
        let mut dem = 0u64;
        let mut rep = 0u64;
        for cell in stats
            .iter()
            .filter(|s| s.race_id == race.race_id && moderate.contains(&s.group))
        {
            total += cell.n_total;
            abstain += cell.n_abstain;
            dem += cell.n_dem;
            rep += cell.n_rep;
        }
        if total == 0 {
            continue;
        }
        rows.push(Case2Row {
            race_id: race.race_id.clone(),
            pol,
            abstention: abstain as f64 / total as f64,
            predictability: dem.abs_diff(rep) as f64 / total as f64,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Analysis(
            "polarization is undefined in every cross-party race (an extreme group is empty)"
                .into(),
        ));
    }
    Ok(rows)
}

fn cmd_analyze(config: &ExperimentConfig, cvr: Option<&Path>) -> Result<(), CliError> {
    let (file, races) = load_cvr(config, cvr)?;
    let stats = tabulate(&file.records, &file.race_ids)?;

    let measures_path = config.output_dir.join("measures.csv");
    let mut measures_out = Vec::new();
    write_measures_csv(&stats, file.n_measures, &mut measures_out)?;
    write_text(
        &measures_path,
        std::str::from_utf8(&measures_out).expect("csv output is ASCII"),
    )?;
    println!("wrote {} ({} cells)", measures_path.display(), stats.len());

    if config.analysis.case1 {
        let same_party = race_ids(&races, false);
        if same_party.is_empty() {
            return Err(CliError::Analysis(
                "case1 is requested but the config has no same-party races".into(),
            ));
        }
        let profile = group_profile(&stats, &same_party)?;
        let mut text = String::from("group,abstention_rate,predictability\n");
        for (group, (abstention, predictability)) in &profile {
            text.push_str(&format!("{group},{abstention},{predictability}\n"));
        }
        let path = config.output_dir.join("case1_abstention.csv");
        write_text(&path, &text)?;
        println!(
            "wrote {} ({} groups over {} same-party races)",
            path.display(),
            profile.len(),
            same_party.len()
        );
    }

    if config.analysis.case2 {
        let cross = race_ids(&races, true);
        if cross.is_empty() {
            return Err(CliError::Analysis(
                "case2 is requested but the config has no cross-party races".into(),
            ));
        }
        let moderate = moderate_groups(&stats, &races, config.analysis.eps_mod)?;
        let rows = case2_rows(&stats, &races, &moderate, file.n_measures)?;
        let mut text = String::from("race_id,pol,moderate_abstention,moderate_predictability\n");
        for row in &rows {
            text.push_str(&format!(
                "{},{},{},{}\n",
                row.race_id, row.pol, row.abstention, row.predictability
            ));
        }
        let path = config.output_dir.join("case2_pol.csv");
        write_text(&path, &text)?;
        let moderate_list = moderate
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join("+");
        println!(
            "wrote {} ({} races, moderate group {})",
            path.display(),
            rows.len(),
            moderate_list
        );

        let profile = group_profile(&stats, &cross)?;
        let abstention: Vec<f64> = profile.values().map(|(a, _)| *a).collect();
        let predictability: Vec<f64> = profile.values().map(|(_, p)| *p).collect();
        let (r, p) = indifference_correlation(&abstention, &predictability)?;
        let path = config.output_dir.join("correlation.csv");
        write_text(
            &path,
            &format!(
                "series_x,series_y,n,r,p\nabstention_rate,predictability,{},{r},{p}\n",
                profile.len()
            ),
        )?;
        println!(
            "abstention vs predictability across {} groups: r = {r:.4}, p = {p:.4}",
            profile.len()
        );
    }
    Ok(())
}

fn cmd_fit(config: &ExperimentConfig, cvr: Option<&Path>) -> Result<(), CliError> {
    let (file, races) = load_cvr(config, cvr)?;
    let stats = tabulate(&file.records, &file.race_ids)?;
    let moderate = moderate_groups(&stats, &races, config.analysis.eps_mod)?;
    let rows = case2_rows(&stats, &races, &moderate, file.n_measures)?;

    let pol: Vec<f64> = rows.iter().map(|r| r.pol).collect();
    let abstention: Vec<f64> = rows.iter().map(|r| r.abstention).collect();
    let predictability: Vec<f64> = rows.iter().map(|r| r.predictability).collect();
    let threshold = config
        .analysis
        .piecewise_threshold
        .unwrap_or_else(|| pol.iter().sum::<f64>() / pol.len() as f64);

    let (low, high) = piecewise_polarization(&abstention, &pol, threshold)?;
    let quad_abstention = quadratic_polarization(&abstention, &pol, FeSpec::None)?;
    let quad_predictability = quadratic_polarization(&predictability, &pol, FeSpec::None)?;

    // Voter-level abstention on the same races, absorbing a voter intercept.
    // Only moderate-group voters with at least two recorded choices identify
    // the within-voter slope, so the rest are dropped up front.
    let pol_by_race: BTreeMap<&str, f64> =
        rows.iter().map(|r| (r.race_id.as_str(), r.pol)).collect();
    let race_pol: Vec<Option<f64>> = file
        .race_ids
        .iter()
        .map(|id| pol_by_race.get(id.as_str()).copied())
        .collect();
    let mut micro: Vec<(u64, f64, f64)> = Vec::new();
    for record in &file.records {
        let Ok(group) = crate::electorate::voter_group(&record.measures) else {
            continue;
        };
        if !moderate.contains(&group) {
            continue;
        }
        let mut obs: Vec<(u64, f64, f64)> = Vec::new();
        for (j, choice) in record.choices.iter().enumerate() {
            let Some(pol_j) = race_pol[j] else { continue };
            let y = match choice {
                Choice::Missing => continue,
                Choice::A => 1.0,
                _ => 0.0,
            };
            obs.push((record.voter_id, pol_j, y));
        }
        if obs.len() >= 2 {
            micro.extend(obs);
        }
    }
    let fe_fit = if micro.is_empty() {
        None
    } else {
        let units: Vec<u64> = micro.iter().map(|(v, _, _)| *v).collect();
        let micro_pol: Vec<f64> = micro.iter().map(|(_, x, _)| *x).collect();
        let micro_y: Vec<f64> = micro.iter().map(|(_, _, y)| *y).collect();
        Some(quadratic_polarization(
            &micro_y,
            &micro_pol,
            FeSpec::Voter(&units),
        )?)
    };

    let mut fits: Vec<(&str, &RegressionResult)> = vec![
        ("piecewise_low", &low),
        ("piecewise_high", &high),
        ("quadratic_abstention", &quad_abstention),
        ("quadratic_predictability", &quad_predictability),
    ];
    if let Some(fit) = &fe_fit {
        fits.push(("quadratic_abstention_voter_fe", fit));
    }
    let mut out = Vec::new();
    write_regression_csv(&fits, &mut out)
        .map_err(|e| CliError::Data(format!("regressions.csv: {e}")))?;
    let path = config.output_dir.join("regressions.csv");
    write_text(&path, std::str::from_utf8(&out).expect("csv output is ASCII"))?;

    println!(
        "piecewise pol slopes (split {threshold:.4}): low {:.4}, high {:.4}",
        low.coefficient("pol"),
        high.coefficient("pol")
    );
    println!(
        "quadratic abstention: pol {:.4}, pol2 {:.4} (n = {})",
        quad_abstention.coefficient("pol"),
        quad_abstention.coefficient("pol2"),
        quad_abstention.n_obs
    );
    if let Some(fit) = &fe_fit {
        println!(
            "voter-FE abstention: pol {:.4}, pol2 {:.4} (n = {})",
            fit.coefficient("pol"),
            fit.coefficient("pol2"),
            fit.n_obs
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_classify(config: &ExperimentConfig, cvr: Option<&Path>) -> Result<(), CliError> {
    let (file, races) = load_cvr(config, cvr)?;
    let stats = tabulate(&file.records, &file.race_ids)?;
    let moderate = moderate_groups(&stats, &races, config.analysis.eps_mod)?;
    let rows = case2_rows(&stats, &races, &moderate, file.n_measures)?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.pol, r.abstention)).collect();
    let dims = if config.electorate.dimension == 1 {
        Dimensionality::Uni
    } else {
        Dimensionality::Multi
    };
    let (label, families) = classify_form(&points, dims)?;
    let family_list = families
        .iter()
        .map(LossFamily::to_string)
        .collect::<Vec<_>>()
        .join(";");
    let path = config.output_dir.join("classification.csv");
    write_text(
        &path,
        &format!("label,consistent_families\n{label},{family_list}\n"),
    )?;
    println!("form: {label}; consistent families: {family_list}");
    Ok(())
}

fn cmd_equilibrium(config: &ExperimentConfig) -> Result<(), CliError> {
    if config.electorate.dimension != 1 {
        return Err(CliError::Config(format!(
            "electorate.dimension must be 1 for equilibrium analysis, got {}",
            config.electorate.dimension
        )));
    }
    let density = VoterDensity::from_distribution(
        &config.electorate.ideal_distribution,
        config.analysis.platform_points,
    )?;
    let platforms = density.grid().to_vec();
    let loss = &config.loss;
    let model = &config.choice;

    let condorcet = condorcet_winner(&density, &platforms, loss, model)?;
    let equilibria = pure_equilibria(&density, &platforms, loss, model)?;
    let start = (platforms[0], platforms[platforms.len() - 1]);
    let dynamics = best_response_dynamics(
        &density,
        &platforms,
        loss,
        model,
        start,
        config.analysis.brd_max_iters,
    )?;

    let mut eq_rows: Vec<(f64, f64, ContestOutcome)> = Vec::new();
    for &(p1, p2) in &equilibria {
        eq_rows.push((p1, p2, contest(&density, p1, p2, loss, model)?));
    }
    let mut out = Vec::new();
    write_contest_csv(&eq_rows, &mut out)
        .map_err(|e| CliError::Data(format!("equilibria.csv: {e}")))?;
    let eq_path = config.output_dir.join("equilibria.csv");
    write_text(&eq_path, std::str::from_utf8(&out).expect("csv output is ASCII"))?;

    // Payoff landscape against a fixed reference: the Condorcet winner when
    // one exists, else the median voter.
    let reference = condorcet.unwrap_or_else(|| density.median());
    let mut sweep_rows: Vec<(f64, f64, ContestOutcome)> = Vec::new();
    for &p1 in &platforms {
        sweep_rows.push((p1, reference, contest(&density, p1, reference, loss, model)?));
    }
    let mut out = Vec::new();
    write_contest_csv(&sweep_rows, &mut out)
        .map_err(|e| CliError::Data(format!("contests.csv: {e}")))?;
    let sweep_path = config.output_dir.join("contests.csv");
    write_text(&sweep_path, std::str::from_utf8(&out).expect("csv output is ASCII"))?;

    match condorcet {
        Some(w) => println!("condorcet winner: {w}"),
        None => println!("condorcet winner: none"),
    }
    println!("pure equilibria: {} (see {})", equilibria.len(), eq_path.display());
    match dynamics {
        BrdOutcome::Converged { p1, p2, iters } => {
            println!("dynamics: converged at ({p1}, {p2}) after {iters} moves")
        }
        BrdOutcome::Cycle { witness } => {
            let list = witness
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(", ");
            println!("dynamics: cycle through [{list}]")
        }
        BrdOutcome::IterationCap => println!(
            "dynamics: no fixed point or cycle within {} moves",
            config.analysis.brd_max_iters
        ),
    }
    println!("wrote {}", sweep_path.display());
    Ok(())
}

/// Every (setting, dimensionality, family) line of the trend table; the
/// multi-dimensional concave family needs a beta, shown at a flat, a steeper,
/// and a shallower value.
fn trend_table() -> Result<String, RegressError> {
    let mut text = String::from("setting,dimensionality,family,beta,trend\n");
    for setting in [CaseSetting::Case1, CaseSetting::Case2] {
        let setting_name = match setting {
            CaseSetting::Case1 => "case1",
            CaseSetting::Case2 => "case2",
        };
        for dims in [Dimensionality::Uni, Dimensionality::Multi] {
            let dims_name = match dims {
                Dimensionality::Uni => "uni",
                Dimensionality::Multi => "multi",
            };
            for family in [
                LossFamily::Linear,
                LossFamily::Concave,
                LossFamily::Convex,
                LossFamily::ReverseS,
            ] {
                let betas: &[Option<f64>] =
                    if dims == Dimensionality::Multi && family == LossFamily::Concave {
                        &[Some(1.5), Some(2.0), Some(3.0)]
                    } else {
                        &[None]
                    };
                for &beta in betas {
                    let label = predict_trend(family, setting, dims, beta)?;
                    let beta_text = beta.map(|b| b.to_string()).unwrap_or_default();
                    text.push_str(&format!(
                        "{setting_name},{dims_name},{family},{beta_text},{label}\n"
                    ));
                }
            }
        }
    }
    Ok(text)
}

fn cmd_predict(args: &PredictArgs) -> Result<(), CliError> {
    let table = trend_table()?;
    print!("{table}");
    let out_dir = match (&args.out, &args.config) {
        (Some(dir), _) => Some(dir.clone()),
        (None, Some(config_path)) => {
            // Only output_dir matters here; predict must run without an
            // electorate section, so the file is read as plain JSON.
            let text = std::fs::read_to_string(config_path).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", config_path.display()))
            })?;
            let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("{} is not valid JSON: {e}", config_path.display()))
            })?;
            for assignment in &args.set {
                crate::config::apply_override(&mut value, assignment)?;
            }
            value
                .get("output_dir")
                .and_then(|v| v.as_str())
                .map(PathBuf::from)
        }
        (None, None) => None,
    };
    if let Some(dir) = out_dir {
        let _lock = DirLock::acquire(&dir)?;
        let path = dir.join("trends.csv");
        write_text(&path, &table)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Deterministic replay helper used by integration tests: simulate with the
/// exact pipeline the `simulate` subcommand runs, returning the CVR bytes.
pub fn simulate_to_bytes(config: &ExperimentConfig) -> Result<Vec<u8>, CliError> {
    let electorate = generate_electorate(&config.electorate)?;
    let records = simulate_election(
        &config.electorate,
        &electorate,
        &config.races,
        &config.loss,
        &config.choice,
    )?;
    let file = CvrFile {
        n_measures: config.electorate.n_measures,
        race_ids: config.races.iter().map(|r| r.race_id.clone()).collect(),
        records,
    };
    let mut bytes = Vec::new();
    crate::cvr::write_cvr(&file, &mut bytes)
        .map_err(|e| CliError::Data(format!("in-memory cvr: {e}")))?;
    Ok(bytes)
}

//! `mbrlab` command line.
//!
//! Exit codes: 0 success, 2 usage/config/input error, 1 internal error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::BoundReport;
use crate::config::Config;
use crate::decoding::{map_decode, mbr_decode_exact, mbr_decode_mc, run_trial, ModelSource, TrialSpec};
use crate::error::{Error, Result};
use crate::hypothesis_space::{sample, Categorical};
use crate::report::{self, FigureKind};
use crate::rng::{derive_seed, stream};
use crate::simulation::{run_crossover_study, run_observation1_probe, run_sweep, summarize};
use crate::transport::wasserstein;
use crate::utility::{default_cost, CostMode, LipschitzCost, MatrixUtility};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mbrlab", version, about = "MBR decoding regret experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file with `section.key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "mbrlab-out")]
    out: PathBuf,
    /// Override a config key (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set experiment.seeds=N`.
    #[arg(long, global = true, value_name = "N")]
    seeds: Option<usize>,
    /// Shorthand for `--set experiment.master_seed=N`.
    #[arg(long, global = true, value_name = "N")]
    master_seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decode one distribution with MBR and MAP and report regrets.
    Decode,
    /// Evaluate every regret bound that the given inputs allow.
    Bounds,
    /// Wasserstein distance between two distribution files.
    Wd,
    /// Run a regret-vs-bound sweep and write results, summary and figures.
    Simulate,
    /// Tabulate where the MBR bound drops below the MAP bound.
    Crossover,
    /// Recompute summary statistics from a results CSV.
    Report {
        /// Results CSV (defaults to `report.results`).
        results: Option<PathBuf>,
    },
}

/// Run the CLI with explicit streams; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_user_error() {
                EXIT_USER
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

fn load_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::new(),
    };
    for assignment in &common.overrides {
        cfg.set(assignment)?;
    }
    if let Some(n) = common.seeds {
        cfg.insert("experiment.seeds", &n.to_string())?;
    }
    if let Some(m) = common.master_seed {
        cfg.insert("experiment.master_seed", &m.to_string())?;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    let dir = &cli.common.out;
    match &cli.command {
        Command::Decode => cmd_decode(&cfg, dir, out),
        Command::Bounds => cmd_bounds(&cfg, out),
        Command::Wd => cmd_wd(&cfg, dir, out),
        Command::Simulate => cmd_simulate(&cfg, dir, out),
        Command::Crossover => cmd_crossover(&cfg, dir, out),
        Command::Report { results } => {
            let path = match results {
                Some(p) => p.clone(),
                None => cfg.require_path("report.results")?,
            };
            cmd_report(&path, dir, out)
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::File {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })
}

/// Short human-readable form: at most 10 decimals, trailing zeros dropped.
fn short(v: f64) -> String {
    let s = format!("{v:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn cmd_decode(cfg: &Config, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let model_path = cfg.require_path("decode.distribution")?;
    let model = Categorical::read_from(&model_path)?;
    let u_max = cfg.parsed("decode.u_max")?.unwrap_or(1.0);
    let utility_path = cfg.require_path("decode.utility")?;
    let utility = MatrixUtility::read_from(&utility_path, u_max)?;
    if crate::utility::Utility::size(&utility) != model.len() {
        return Err(Error::File {
            path: utility_path,
            message: format!(
                "utility has {} rows but the distribution has {} hypotheses",
                crate::utility::Utility::size(&utility),
                model.len()
            ),
        });
    }
    let n: usize = cfg.require("decode.n")?;
    let seed: u64 = cfg.parsed("decode.seed")?.unwrap_or(0);

    let exact = mbr_decode_exact(&utility, &model)?;
    writeln!(out, "mbr_exact chosen={} score={}", exact.chosen, short(exact.score))?;
    let map = map_decode(&model);
    writeln!(out, "map chosen={} score={}", map.chosen, short(map.score))?;

    match cfg.path("decode.human") {
        None => {
            let refs = sample(&model, n, derive_seed(seed, stream::REFS))?;
            let mc = mbr_decode_mc(&utility, &refs)?;
            writeln!(out, "mbr_mc n={n} seed={seed} chosen={} score={}", mc.chosen, short(mc.score))?;
            writeln!(out, "no human distribution given; regret not computed")?;
        }
        Some(human_path) => {
            let human = Categorical::read_from(&human_path)?;
            human.check_same_space(&model).map_err(|e| e.in_file(&human_path))?;
            let trial = TrialSpec::new(&human, &utility, ModelSource::Given(&model), n, seed);
            let outcome = run_trial(&trial)?;
            writeln!(
                out,
                "mbr_mc n={n} seed={seed} chosen={} score={}",
                outcome.mbr.chosen,
                short(outcome.mbr.score)
            )?;
            writeln!(
                out,
                "optimum chosen={} score={}",
                outcome.optimum.chosen,
                short(outcome.optimum.score)
            )?;
            let r = outcome.report;
            writeln!(out, "regret_n={} regret_map={}", short(r.regret_n), short(r.regret_map))?;
            ensure_dir(dir)?;
            let path = report::write_file(dir, "regret_report.csv", &report::regret_report_csv(&r)?)?;
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}

fn cmd_bounds(cfg: &Config, out: &mut dyn Write) -> Result<()> {
    let (inputs, form) = cfg.bound_inputs()?;
    let report = BoundReport::evaluate(&inputs, form)?;
    for v in &report.values {
        let terms: Vec<String> = v.terms.iter().map(|t| format!("{}={:.5}", t.label, t.value)).collect();
        writeln!(out, "{} = {:.5} [{}] exact={}", v.kind, v.value, terms.join(", "), v.value)?;
    }
    for (kind, reason) in &report.skipped {
        let reason = reason.strip_prefix("missing input: ").unwrap_or(reason);
        writeln!(out, "{kind} omitted: {reason}")?;
    }
    Ok(())
}

fn cmd_wd(cfg: &Config, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let nu_path = cfg.require_path("wd.nu")?;
    let mu_path = cfg.require_path("wd.mu")?;
    let nu = Categorical::read_from(&nu_path)?;
    let mu = Categorical::read_from(&mu_path)?;
    nu.check_same_space(&mu).map_err(|e| e.in_file(&mu_path))?;
    let cost = match (cfg.path("wd.cost"), cfg.path("wd.utility")) {
        (Some(p), _) => LipschitzCost::read_from(&p)?,
        (None, Some(p)) => {
            let u_max = cfg.parsed("wd.u_max")?.unwrap_or(1.0);
            let utility = MatrixUtility::read_from(&p, u_max)?;
            let mode = match cfg.get("wd.cost_mode") {
                Some(m) => CostMode::from_name(m)?,
                None => CostMode::Trivial,
            };
            default_cost(&utility, mode, crate::utility::DEFAULT_TIGHTENED_LIMIT).map_err(|e| e.in_file(&p))?
        }
        (None, None) => return Err(Error::Config("wd needs `wd.cost` or `wd.utility`".into())),
    };
    if cost.size() != nu.len() {
        return Err(Error::Config(format!(
            "cost matrix is {0}x{0} but the distributions have {1} hypotheses",
            cost.size(),
            nu.len()
        )));
    }
    let result = wasserstein(&nu, &mu, &cost)?;
    writeln!(
        out,
        "wd = {} (support {}x{}, {} pivots)",
        result.distance, result.stats.rows, result.stats.cols, result.stats.iterations
    )?;
    if cfg.flag("wd.dump_coupling")?.unwrap_or(false) {
        ensure_dir(dir)?;
        let path = report::write_file(dir, "coupling.txt", result.coupling.to_text(nu.len()).as_bytes())?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn cmd_simulate(cfg: &Config, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let spec = cfg.experiment_spec()?;
    let sweep = run_sweep(&spec)?;
    ensure_dir(dir)?;
    let mut written = vec![
        report::write_file(dir, "results.csv", &report::results_csv(&sweep.rows)?)?,
        report::write_file(dir, "summary.csv", &report::summary_csv(&sweep.summary)?)?,
    ];
    for kind in FigureKind::ALL {
        if let Some(table) = report::figure_table(&sweep.rows, kind) {
            let csv_name = format!("{}.csv", table.name);
            written.push(report::write_file(dir, &csv_name, &table.to_csv()?)?);
            let script = table.plot_script(&csv_name);
            written.push(report::write_file(dir, &format!("plot_{}.py", table.name), script.as_bytes())?);
        }
    }
    if cfg.flag("experiment.observation1")?.unwrap_or(false) {
        let rows = run_observation1_probe(&spec)?;
        written.push(report::write_file(dir, "observation1.csv", &report::observation_csv(&rows)?)?);
    }
    writeln!(
        out,
        "{} rows over {} grid points ({} seeds, master seed {})",
        sweep.rows.len(),
        sweep.summary.len(),
        spec.seeds,
        spec.master_seed
    )?;
    for s in sweep.summary.iter().filter(|s| s.temperature.is_none() && s.noise_scale.is_none()) {
        writeln!(
            out,
            "n={} D={} delta={} median_regret={} violation_rate={}",
            s.n,
            s.d_size,
            s.delta,
            short(s.median_regret_n),
            s.violation_rate_bound.map(short).unwrap_or_else(|| "-".into())
        )?;
    }
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

fn cmd_crossover(cfg: &Config, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let default_grid: Vec<usize> = (1..=20).map(|k| k * 25).collect();
    let n_grid = cfg.list("crossover.n_grid")?.unwrap_or_else(|| default_grid.clone());
    let d_grid = cfg.list("crossover.d_grid")?.unwrap_or(default_grid);
    let dim = cfg.parsed("crossover.dim")?.unwrap_or(4);
    let delta = cfg.parsed("crossover.delta")?.unwrap_or(0.1);
    let n_max = cfg.parsed("crossover.n_max")?.unwrap_or(1_000_000);
    let study = run_crossover_study(&n_grid, &d_grid, dim, delta, n_max)?;
    ensure_dir(dir)?;
    let csv = report::write_file(dir, "crossover.csv", &report::crossover_csv(&study)?)?;
    let script = report::write_file(
        dir,
        "plot_crossover.py",
        report::crossover_plot_script("crossover.csv").as_bytes(),
    )?;
    let mbr_smaller = study.rows.iter().filter(|r| r.case3).count();
    writeln!(
        out,
        "{} grid points, MBR bound smaller at {}, predicate disagreements {}",
        study.rows.len(),
        mbr_smaller,
        study.disagreements()
    )?;
    let scanned = study
        .case2_scanned
        .map(|n| n.to_string())
        .unwrap_or_else(|| format!("none up to {n_max}"));
    writeln!(
        out,
        "large-D threshold: analytic n={} scanned n={}",
        study.case2_analytic, scanned
    )?;
    writeln!(out, "wrote {}", csv.display())?;
    writeln!(out, "wrote {}", script.display())?;
    Ok(())
}

fn cmd_report(results: &Path, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let rows = report::read_results(results)?;
    let summary = summarize(&rows);
    writeln!(out, "{} rows, {} grid points", rows.len(), summary.len())?;
    for s in &summary {
        let rate = |v: Option<f64>| v.map(short).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "n={} D={} delta={} t={} noise={} median_regret={} bound={} bound3={} map_n={} map_nd={} temperature={} utility={}",
            s.n,
            s.d_size,
            s.delta,
            s.temperature.map(short).unwrap_or_else(|| "-".into()),
            s.noise_scale.map(short).unwrap_or_else(|| "-".into()),
            short(s.median_regret_n),
            rate(s.violation_rate_bound),
            rate(s.violation_rate_bound3),
            rate(s.violation_rate_map_n),
            rate(s.violation_rate_map_nd),
            rate(s.violation_rate_temperature),
            rate(s.violation_rate_utility),
        )?;
    }
    ensure_dir(dir)?;
    let path = report::write_file(dir, "summary.csv", &report::summary_csv(&summary)?)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

//! Command-line front end: every verification suite behind a subcommand,
//! reproducible from `(argv, config file, seed)` alone.
//!
//! Each run writes `raw.csv` (replication rows) and `summary.json` (moment
//! summary, resolved config echo, seed, git description, wall time) under
//! the output directory. Exit codes: 0 success, 1 failed checks or runtime
//! errors, 2 configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use berrylab::cov_theory::{self, SegmentPairConfig};
use berrylab::geometry::{self, signed_length, ChainSpec, PolygonalChain};
use berrylab::montecarlo::{
    boundary_sup_report, covariance_matrix_experiment, git_describe, persist_artifacts,
    resolved_plan, run_experiment, sup_moment_scan, ExperimentConfig, ExperimentKind,
};
use berrylab::nodal::mean_nodal_length;
use berrylab::{field, special, Error, Result};

#[derive(Parser)]
#[command(name = "berrylab", version, about = "Nodal statistics of random plane waves: samplers, measurements and oracle comparisons")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for raw.csv and summary.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment seed; every statistic is a pure function of it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = pool default). The THREADS variable overrides.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Validate the config and print the resolved plan without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Energy; repeat the flag for a scan.
    #[arg(long = "E", global = true)]
    energy: Vec<f64>,
    /// Replication count.
    #[arg(long = "n", global = true)]
    n_reps: Option<usize>,
    /// Plane-wave count override.
    #[arg(long = "M", global = true)]
    waves: Option<usize>,
    /// Marching-grid points per wavelength.
    #[arg(long, global = true)]
    ppw: Option<u32>,
    /// Dyadic partition level.
    #[arg(long = "K", global = true)]
    level: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a module's invariant suite and print PASS/FAIL lines.
    Selfcheck {
        #[arg(value_parser = ["special", "field", "geometry"])]
        module: String,
    },
    /// Raw nodal length over configured rectangles.
    NodalLength,
    /// Centered, variance-stabilized nodal length across rectangles.
    VarianceScan,
    /// Discretized partition field against the Wiener sheet covariance.
    SheetCov,
    /// Variance of the boundary chaos functional per chain.
    Chaos2Var,
    /// Covariance of the normalized chaos functional across a chain pair.
    Chaos2Cov,
    /// Chaos covariance matrix of a chain family with its limit.
    Disorder,
    /// Exact and asymptotic covariance tables over segment-pair grids.
    CovTable,
    /// Boundary supremum of the discretized partition field vs its limit law.
    SupDiscretized,
    /// Nodal measure paired with bump test functions vs inner products.
    Whitenoise,
    /// Growth of E[sup|B_E|] against sqrt(log E).
    SupMoment,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Selfcheck { module } => run_selfcheck(module),
        Cmd::NodalLength => run_kind(&cli.common, ExperimentKind::NodalLength),
        Cmd::VarianceScan => run_kind(&cli.common, ExperimentKind::VarianceScan),
        Cmd::SheetCov => run_kind(&cli.common, ExperimentKind::SheetCov),
        Cmd::Chaos2Var => run_kind(&cli.common, ExperimentKind::Chaos2Var),
        Cmd::Chaos2Cov => run_kind(&cli.common, ExperimentKind::Chaos2Cov),
        Cmd::Disorder => run_kind(&cli.common, ExperimentKind::Disorder),
        Cmd::CovTable => run_cov_table(&cli.common),
        Cmd::SupDiscretized => run_kind(&cli.common, ExperimentKind::SupDiscretized),
        Cmd::Whitenoise => run_kind(&cli.common, ExperimentKind::WhiteNoise),
        Cmd::SupMoment => run_kind(&cli.common, ExperimentKind::SupMoment),
    }
}

fn run_selfcheck(module: &str) -> Result<ExitCode> {
    let checks = match module {
        "special" => special::selfcheck(),
        "field" => field::selfcheck(),
        "geometry" => geometry::selfcheck(),
        other => return Err(Error::Config(format!("unknown selfcheck module {other}"))),
    };
    let mut all = true;
    for (name, pass) in &checks {
        println!("{} {name}", if *pass { "PASS" } else { "FAIL" });
        all &= *pass;
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
}

fn kind_slug(kind: ExperimentKind) -> String {
    match serde_json::to_value(kind) {
        Ok(Value::String(s)) => s,
        _ => "experiment".into(),
    }
}

fn base_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        energies: Vec::new(),
        waves: None,
        points_per_wavelength: 10,
        partition_level: None,
        n_reps: 0,
        seed: 0,
        domains: Vec::new(),
        chains: Vec::new(),
        sheet_points: Vec::new(),
        output: None,
        threads: 0,
    }
}

/// Config file first, explicit flags on top, defaults for the rest; the
/// merged result is what the run echoes.
fn load_config(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => read_json::<ExperimentConfig>(p)?,
        None => base_config(kind),
    };
    cfg.kind = kind;
    if !common.energy.is_empty() {
        cfg.energies = common.energy.clone();
    }
    if let Some(v) = common.n_reps {
        cfg.n_reps = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.waves {
        cfg.waves = Some(v);
    }
    if let Some(v) = common.ppw {
        cfg.points_per_wavelength = v;
    }
    if let Some(v) = common.level {
        cfg.partition_level = Some(v);
    }
    if let Some(v) = common.threads {
        cfg.threads = v;
    }
    if let Some(v) = &common.out {
        cfg.output = Some(v.clone());
    }
    if cfg.output.is_none() {
        cfg.output = Some(PathBuf::from("runs").join(format!("{}-seed{}", kind_slug(kind), cfg.seed)));
    }
    Ok(cfg)
}

fn run_kind(common: &Common, kind: ExperimentKind) -> Result<ExitCode> {
    let cfg = load_config(common, kind)?;
    if common.dry_run {
        println!("{}", serde_json::to_string_pretty(&resolved_plan(&cfg)?)?);
        return Ok(ExitCode::SUCCESS);
    }
    let (art, extra) = match kind {
        ExperimentKind::NodalLength => {
            let art = run_experiment(&cfg)?;
            let mut expected = Vec::new();
            let mut mean_z = Vec::new();
            let mut i = 0;
            for &e in &art.config.energies {
                for d in &art.config.domains {
                    let m = mean_nodal_length(e, d.area());
                    expected.push(m);
                    let se = art.summary.se_mean[i].max(f64::MIN_POSITIVE);
                    mean_z.push((art.summary.mean[i] - m) / se);
                    i += 1;
                }
            }
            let extra = json!({ "expected_mean": expected, "mean_z": mean_z });
            (art, extra)
        }
        ExperimentKind::VarianceScan => {
            let art = run_experiment(&cfg)?;
            let mut per_area = Vec::new();
            let mut i = 0;
            for _ in &art.config.energies {
                for d in &art.config.domains {
                    per_area.push(art.summary.variance[i] / d.area());
                    i += 1;
                }
            }
            let extra = json!({ "variance_per_area": per_area });
            (art, extra)
        }
        ExperimentKind::Chaos2Var => {
            let art = run_experiment(&cfg)?;
            let chains =
                art.config.chains.iter().map(ChainSpec::build).collect::<Result<Vec<_>>>()?;
            let mut empirical = Vec::new();
            let mut ratios = Vec::new();
            let mut limits = Vec::new();
            let mut i = 0;
            for &e in &art.config.energies {
                let scale = 16.0 * std::f64::consts::PI.powi(2) * e.sqrt();
                for c in &chains {
                    let lim = signed_length(c, c);
                    empirical.push(art.summary.variance[i]);
                    limits.push(lim);
                    ratios.push(scale * art.summary.variance[i] / lim);
                    i += 1;
                }
            }
            let extra = json!({
                "empirical_variance": empirical,
                "normalized_ratio": ratios,
                "limit_signed_length": limits,
            });
            (art, extra)
        }
        ExperimentKind::SheetCov | ExperimentKind::Chaos2Cov | ExperimentKind::WhiteNoise => {
            let (art, report) = covariance_matrix_experiment(&cfg)?;
            let extra = json!({ "covariance_report": report });
            (art, extra)
        }
        ExperimentKind::Disorder => {
            let (art, report) = covariance_matrix_experiment(&cfg)?;
            let chains =
                art.config.chains.iter().map(ChainSpec::build).collect::<Result<Vec<_>>>()?;
            let sigma = cov_theory::disorder_sigma(&chains)?;
            let extra = json!({ "covariance_report": report, "disorder_sigma": sigma });
            (art, extra)
        }
        ExperimentKind::SupDiscretized => {
            let art = run_experiment(&cfg)?;
            let report = boundary_sup_report(&art, &[0.5, 1.0, 1.5])?;
            let extra = json!({ "boundary_sup": report });
            (art, extra)
        }
        ExperimentKind::SupMoment => {
            let (art, fit) = sup_moment_scan(&cfg)?;
            let extra = json!({ "fit": fit });
            (art, extra)
        }
    };
    let dir = persist_artifacts(&art, extra)?;
    println!(
        "{} n={} wall={:.2}s -> {}",
        kind_slug(kind),
        art.summary.n,
        art.wall_seconds,
        dir.join("summary.json").display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Exact covariance tables over a grid of segment-pair configurations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovTableConfig {
    energies: Vec<f64>,
    pairs: Vec<SegmentPairConfig>,
    #[serde(default)]
    output: Option<PathBuf>,
}

fn run_cov_table(common: &Common) -> Result<ExitCode> {
    let start = Instant::now();
    let mut cfg: CovTableConfig = match &common.config {
        Some(p) => read_json(p)?,
        None => CovTableConfig {
            energies: Vec::new(),
            pairs: vec![SegmentPairConfig {
                lambda1: 1.0,
                lambda2: 1.0,
                theta: std::f64::consts::FRAC_PI_2,
                offset: [0.0, 0.0],
                parallel_gap: 0.0,
            }],
            output: None,
        },
    };
    if !common.energy.is_empty() {
        cfg.energies = common.energy.clone();
    }
    if let Some(o) = &common.out {
        cfg.output = Some(o.clone());
    }
    if cfg.output.is_none() {
        cfg.output = Some(PathBuf::from("runs").join("cov-table"));
    }
    if cfg.energies.is_empty() {
        return Err(Error::Config("cov-table needs at least one energy (--E)".into()));
    }
    if cfg.pairs.is_empty() {
        return Err(Error::Config("cov-table needs at least one segment pair".into()));
    }
    for p in &cfg.pairs {
        p.segments()?;
    }
    if common.dry_run {
        println!("{}", serde_json::to_string_pretty(&json!({ "config": cfg }))?);
        return Ok(ExitCode::SUCCESS);
    }
    let mut csv = String::from(
        "# schema_version=1\nenergy,pair,lambda1,lambda2,theta,offset_x,offset_y,parallel_gap,exact,normalized,limit\n",
    );
    for &e in &cfg.energies {
        let scale = 16.0 * std::f64::consts::PI.powi(2) * e.sqrt();
        for (i, pair) in cfg.pairs.iter().enumerate() {
            let (s1, s2) = pair.segments()?;
            let exact = cov_theory::exact_cov_segments(&s1, &s2, e)?;
            let c1 = PolygonalChain::new(vec![s1], false)?;
            let c2 = PolygonalChain::new(vec![s2], false)?;
            let limit = signed_length(&c1, &c2);
            csv.push_str(&format!(
                "{e},{i},{},{},{},{},{},{},{exact},{},{limit}\n",
                pair.lambda1,
                pair.lambda2,
                pair.theta,
                pair.offset[0],
                pair.offset[1],
                pair.parallel_gap,
                scale * exact,
            ));
        }
    }
    let dir = cfg.output.clone().expect("output directory was defaulted");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("cov_table.csv"), &csv)?;
    let summary = json!({
        "schema_version": 1,
        "kind": "cov-table",
        "config": cfg,
        "git": git_describe(),
        "wall_seconds": start.elapsed().as_secs_f64(),
        "rows": cfg.energies.len() * cfg.pairs.len(),
    });
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!(
        "cov-table rows={} wall={:.2}s -> {}",
        cfg.energies.len() * cfg.pairs.len(),
        start.elapsed().as_secs_f64(),
        dir.join("summary.json").display()
    );
    Ok(ExitCode::SUCCESS)
}

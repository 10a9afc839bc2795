//! `nlslab` — experiment driver for the focusing NLS laboratory.
//!
//! Subcommands: `ground-state`, `classify`, `evolve`, `sweep`,
//! `admissibility`, `report`. Exit codes: 0 success, 2 blowup detected
//! (informational), 1 error.

mod config;
mod manifest;
mod report;
mod runner;
mod series;
mod snapshot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use nlslab_core::ground::GroundSolveOptions;
use nlslab_exponents::{catalog_pairs, Rational};

use crate::config::load_config;
use crate::manifest::CACHE_DIR_NAME;
use crate::runner::{cached_ground_state, exit_code_for};

#[derive(Parser)]
#[command(
    name = "nlslab",
    version,
    about = "Numerical experiments for the focusing nonlinear Schrödinger equation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Experiment config (TOML).
    config: PathBuf,
    /// Override a config key, e.g. --set initial.c=0.8 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Remove a config key, e.g. --unset initial.c when switching the
    /// initial-data kind (repeatable, applied after --set).
    #[arg(long = "unset", value_name = "KEY")]
    unset: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Ground-state cache directory (default: <out>/gs_cache).
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl CommonRunArgs {
    fn cache_dir(&self) -> PathBuf {
        self.cache
            .clone()
            .unwrap_or_else(|| self.out.join(CACHE_DIR_NAME))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve (or reload) the ground state and report its norms and residuals.
    GroundState(CommonRunArgs),
    /// Classify the configured initial data from its conserved quantities.
    Classify(CommonRunArgs),
    /// Run one experiment: evolve, record series, snapshots, classification,
    /// manifest.
    Evolve(CommonRunArgs),
    /// Run one experiment per value of a swept config key.
    Sweep {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Dotted config key to sweep, e.g. initial.c or propagator.dt.
        #[arg(long)]
        axis: String,
        /// Comma-separated values for the axis.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Verify the space-time exponent catalog for (d, p) with exact
    /// rational arithmetic.
    Admissibility {
        /// Read d and p from this config instead of flags.
        config: Option<PathBuf>,
        /// Dimension (1, 2, 3, ...).
        #[arg(long)]
        d: Option<u32>,
        /// Nonlinearity exponent, e.g. 7 or 7/3.
        #[arg(long)]
        p: Option<String>,
        /// Also write the full report as JSON to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render summaries and plot CSVs from a stored run or sweep.
    Report {
        /// Run or sweep directory.
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::GroundState(args) => ground_state_cmd(&args),
        Cmd::Classify(args) => classify_cmd(&args),
        Cmd::Evolve(args) => evolve_cmd(&args),
        Cmd::Sweep {
            common,
            axis,
            values,
            jobs,
        } => sweep_cmd(&common, &axis, &values, jobs),
        Cmd::Admissibility { config, d, p, out } => {
            admissibility_cmd(config.as_deref(), d, p.as_deref(), out.as_deref())
        }
        Cmd::Report { dir } => {
            report::report(&dir)?;
            Ok(0)
        }
    }
}

fn base_dir_of(config_path: &Path) -> &Path {
    config_path.parent().unwrap_or_else(|| Path::new("."))
}

fn ground_state_cmd(args: &CommonRunArgs) -> Result<u8> {
    let (cfg, _) = load_config(&args.config, &args.set, &args.unset)?;
    let params = cfg.physical_params()?;
    let grid = cfg.grid()?;
    std::fs::create_dir_all(&args.out)?;
    let (profile, cache_hit) =
        cached_ground_state(&params, &grid, &GroundSolveOptions::default(), &args.cache_dir())?;

    snapshot::write_snapshot(&args.out.join("ground_state_q.nlsf"), &profile.q_field)?;
    snapshot::write_snapshot(&args.out.join("ground_state_uq.nlsf"), &profile.uq_field)?;

    let norms = profile.soliton_norms();
    let res = &profile.residuals;
    let report = serde_json::json!({
        "d": params.d,
        "p": params.p,
        "s": params.s,
        "grid_n": grid.dims(),
        "grid_l": grid.extents(),
        "cache_hit": cache_hit,
        "iterations": [profile.iterations.0, profile.iterations.1],
        "c_gn": profile.c_gn,
        "soliton": { "mass": norms.mass, "energy": norms.energy, "grad_sq": norms.grad_sq },
        "q_norms": {
            "l2_sq": profile.q_norms.l2_sq,
            "grad_sq": profile.q_norms.grad_sq,
            "potential": profile.q_norms.potential,
        },
        "residuals": {
            "equation_q": res.equation_q,
            "equation_uq": res.equation_uq,
            "pohozhaev_gradient_mass": res.pohozhaev_gradient_mass,
            "pohozhaev_scaling": res.pohozhaev_scaling,
            "energy_gradient_gap": res.energy_gradient_gap,
            "stabilizer_gap": res.stabilizer_gap,
        },
    });
    manifest::write_atomic(
        &args.out.join("ground_state.json"),
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;

    println!(
        "ground state d = {}, p = {} on {}^{} (L = {}){}",
        params.d,
        params.p,
        grid.dims()[0],
        params.d,
        grid.extents()[0],
        if cache_hit { "  [cache hit]" } else { "" }
    );
    println!(
        "  iterations {:?}   C_GN = {:.12}",
        profile.iterations, profile.c_gn
    );
    println!(
        "  M[u_Q] = {:.12}   E[u_Q] = {:.12}   ||grad u_Q||^2 = {:.12}",
        norms.mass, norms.energy, norms.grad_sq
    );
    println!(
        "  residuals: equation {:.3e} / {:.3e}, identities {:.3e} / {:.3e}, energy gap {:.3e}",
        res.equation_q,
        res.equation_uq,
        res.pohozhaev_gradient_mass,
        res.pohozhaev_scaling,
        res.energy_gradient_gap
    );
    println!("written to {}", args.out.display());
    Ok(0)
}

fn classify_cmd(args: &CommonRunArgs) -> Result<u8> {
    let (cfg, _) = load_config(&args.config, &args.set, &args.unset)?;
    let params = cfg.physical_params()?;
    let grid = cfg.grid()?;
    std::fs::create_dir_all(&args.out)?;
    let (profile, _) =
        cached_ground_state(&params, &grid, &GroundSolveOptions::default(), &args.cache_dir())?;
    let base_dir = base_dir_of(&args.config);
    let u0 = runner::build_initial_data(&cfg, &profile, base_dir)?;

    let mut ws = nlslab_core::spectral::SpectralWorkspace::new(&grid);
    let (report, class) = runner::classify_state(&u0, &params, &profile, &mut ws)?;
    let tb = nlslab_core::invariants::threshold_bounds(&report, &params);

    let json = serde_json::json!({
        "classification": format!("{class:?}"),
        "mass": report.mass,
        "energy": report.energy,
        "momentum": report.momentum,
        "renorm_gradient": report.renorm_gradient,
        "renorm_mass_energy": report.renorm_mass_energy,
        "reduced_gradient": report.reduced_gradient,
        "reduced_mass_energy": report.reduced_mass_energy,
        "threshold": {
            "lower": tb.lower, "value": tb.value, "upper": tb.upper,
            "violation": tb.violation(),
        },
    });
    manifest::write_atomic(
        &args.out.join("classification.json"),
        serde_json::to_string_pretty(&json)?.as_bytes(),
    )?;

    println!(
        "{class:?}   (G = {:.6}, ME = {}, reduced ME = {:.6})",
        report.renorm_gradient,
        report
            .renorm_mass_energy
            .map(|x| format!("{x:.6}"))
            .unwrap_or_else(|| "-".into()),
        report.reduced_mass_energy,
    );
    println!("written to {}", args.out.join("classification.json").display());
    Ok(0)
}

fn evolve_cmd(args: &CommonRunArgs) -> Result<u8> {
    let (cfg, _) = load_config(&args.config, &args.set, &args.unset)?;
    let base_dir = base_dir_of(&args.config);
    let out = runner::run(&cfg, base_dir, &args.out, &args.cache_dir())?;
    let m = &out.manifest;
    let when = m
        .outcome_time
        .map(|t| format!(" at t = {t:.6}"))
        .unwrap_or_default();
    println!(
        "{}{}   steps = {}   final G = {}   ME = {}",
        m.outcome,
        when,
        m.steps.map(|s| s.to_string()).unwrap_or_else(|| "-".into()),
        m.final_renorm_gradient
            .map(|x| format!("{x:.6}"))
            .unwrap_or_else(|| "-".into()),
        m.final_renorm_mass_energy
            .map(|x| format!("{x:.6}"))
            .unwrap_or_else(|| "-".into()),
    );
    println!("outputs in {}", out.out_dir.display());
    Ok(exit_code_for(&m.outcome))
}

fn sweep_cmd(common: &CommonRunArgs, axis: &str, values: &[String], jobs: usize) -> Result<u8> {
    let (_cfg, table) = load_config(&common.config, &common.set, &common.unset)?;
    let base_dir = base_dir_of(&common.config);
    let rows = runner::sweep(
        &table,
        base_dir,
        axis,
        values,
        &common.out,
        &common.cache_dir(),
        jobs,
    )?;
    println!("sweep over {axis}: {} run(s)", rows.len());
    for r in &rows {
        println!(
            "  {axis} = {:<10} {:<18} G = {}  ME = {}{}",
            r.value,
            r.outcome,
            r.final_g.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into()),
            r.final_me.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into()),
            r.error
                .as_deref()
                .map(|e| format!("  ({e})"))
                .unwrap_or_default(),
        );
    }
    println!("summary in {}", common.out.join("summary.csv").display());
    if rows.iter().any(|r| r.error.is_some()) {
        Ok(1)
    } else if rows.iter().any(|r| r.outcome == "blowup-detected") {
        Ok(2)
    } else {
        Ok(0)
    }
}

fn admissibility_cmd(
    config: Option<&Path>,
    d_flag: Option<u32>,
    p_flag: Option<&str>,
    out: Option<&Path>,
) -> Result<u8> {
    let (d, p) = match (d_flag, p_flag) {
        (Some(d), Some(p)) => (d, Rational::parse(p).map_err(|e| anyhow!(e))?),
        _ => {
            let path = config.context("pass a config file or both --d and --p")?;
            let (cfg, _) = load_config(path, &[], &[])?;
            let p = float_to_rational(cfg.params.p).with_context(|| {
                format!(
                    "p = {} is not a small rational; pass --p NUM/DEN explicitly",
                    cfg.params.p
                )
            })?;
            (cfg.params.d as u32, p)
        }
    };

    let report = catalog_pairs(d, &p)?;
    println!(
        "exponent catalog for d = {}, p = {}   (s = {})",
        report.d, report.p, report.s
    );
    println!(
        "{:<26} {:>8} {:>8}  {:<18} {:>8} {:>9} {:>10}",
        "pair", "q", "r", "claim", "identity", "lebesgue", "acceptable"
    );
    for row in &report.rows {
        println!(
            "{:<26} {:>8} {:>8}  {:<18} {:>8} {:>9} {:>10}",
            row.label,
            row.q.to_string(),
            row.r.to_string(),
            format!("{:?}", row.claim),
            if row.identity_ok { "ok" } else { "FAIL" },
            if row.lebesgue_ok { "ok" } else { "FAIL" },
            row.acceptable
                .map(|a| if a { "yes" } else { "no" }.to_string())
                .unwrap_or_else(|| "-".into()),
        );
        for note in &row.notes {
            println!("{:<26}   {note}", "");
        }
    }
    if !report.splits.is_empty() {
        println!("Hölder splits:");
        for split in &report.splits {
            let parts: Vec<String> = split
                .parts
                .iter()
                .map(|(e, m)| format!("{m}/({e})"))
                .collect();
            println!(
                "  {:<24} [{:?}] 1/({}) = {}   {}",
                split.label,
                split.side,
                split.target,
                parts.join(" + "),
                if split.ok { "ok" } else { "FAIL" }
            );
        }
    }
    println!(
        "identities: {}   splits: {}",
        if report.all_identities_hold { "all hold" } else { "FAILURES" },
        if report.all_splits_hold { "all hold" } else { "FAILURES" },
    );

    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        manifest::write_atomic(
            &dir.join("admissibility.json"),
            serde_json::to_string_pretty(&report)?.as_bytes(),
        )?;
        println!("written to {}", dir.join("admissibility.json").display());
    }

    Ok(if report.all_identities_hold && report.all_splits_hold {
        0
    } else {
        1
    })
}

/// Recover small rationals from an f64: accept num/den when its nearest
/// double is the given value (so `p = 2.3333333333333335` maps to 7/3). The
/// config stores p as a float but the catalog wants it exact.
fn float_to_rational(x: f64) -> Option<Rational> {
    for den in 1..=64i64 {
        let num = (x * den as f64).round();
        if num.abs() < 1e15 && num / den as f64 == x {
            return Some(Rational::new(num as i64, den));
        }
    }
    None
}

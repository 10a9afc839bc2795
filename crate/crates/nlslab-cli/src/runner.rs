//! Run orchestration: ground-state cache, initial data, evolution with
//! per-radius virial columns, persistence, and sweeps.
//!
//! A run directory ends up holding `initial.nlsf`, `final.nlsf`, any cadence
//! snapshots, `series.csv`, `classification.json`, optionally
//! `modulation.csv`, and `manifest.json` (written last, atomically; on
//! failure it records the error and whatever files were produced).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use nlslab_core::diagnostics::{
    localized_variance, soliton_distance, virial_rhs, ModulationFit, ModulationSearch,
};
use nlslab_core::evolve::{evolve, Observer, Outcome, PropagatorConfig};
use nlslab_core::ground::{
    reassemble_ground_state, solve_ground_state, FieldNorms, GroundSolveOptions,
    GroundStateProfile,
};
use nlslab_core::invariants::{invariant_report, threshold_bounds, InvariantReport};
use nlslab_core::spectral::SpectralWorkspace;
use nlslab_core::{
    classify, C64, Classification, ComplexField, Grid, PhysicalParams, ThresholdTolerance,
};

use crate::config::{self, ExperimentConfig, InitialData};
use crate::manifest::{
    self, config_hash, file_inventory, now_unix_ms, write_manifest_atomic, RunManifest,
};
use crate::series::{radius_column, write_series_csv};
use crate::snapshot::{read_snapshot, write_snapshot};

// ---------------------------------------------------------------------------
// ground-state cache

#[derive(Serialize, Deserialize)]
struct CacheMeta {
    q_solver_norms: [f64; 3],
    uq_solver_norms: [f64; 3],
    iterations: [usize; 2],
    stabilizer_gap: f64,
}

fn norms_to_array(n: &FieldNorms) -> [f64; 3] {
    [n.l2_sq, n.grad_sq, n.potential]
}

fn norms_from_array(a: [f64; 3]) -> FieldNorms {
    FieldNorms {
        l2_sq: a[0],
        grad_sq: a[1],
        potential: a[2],
    }
}

/// `{:?}` on f64 prints the shortest round-trip form, so the key is exact.
fn cache_key(params: &PhysicalParams, grid: &Grid, tol: f64) -> String {
    format!(
        "gs_d{}_p{:?}_n{}_L{:?}_tol{:?}",
        params.d,
        params.p,
        grid.dims()[0],
        grid.extents()[0],
        tol
    )
}

fn try_load_cached(
    params: &PhysicalParams,
    grid: &Grid,
    key: &str,
    cache_dir: &Path,
) -> Option<GroundStateProfile> {
    let meta_path = cache_dir.join(format!("{key}.json"));
    let meta: CacheMeta = serde_json::from_str(&fs::read_to_string(meta_path).ok()?).ok()?;
    let q = read_snapshot(&cache_dir.join(format!("{key}_q.nlsf"))).ok()?;
    let uq = read_snapshot(&cache_dir.join(format!("{key}_uq.nlsf"))).ok()?;
    if q.grid().dims() != grid.dims()
        || q.grid().extents() != grid.extents()
        || uq.grid().dims() != grid.dims()
    {
        return None;
    }
    reassemble_ground_state(
        params,
        grid,
        q,
        uq,
        norms_from_array(meta.q_solver_norms),
        norms_from_array(meta.uq_solver_norms),
        (meta.iterations[0], meta.iterations[1]),
        meta.stabilizer_gap,
    )
    .ok()
}

fn snapshot_atomic(path: &Path, u: &ComplexField) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().unwrap_or_default().to_string_lossy(),
        std::process::id()
    ));
    write_snapshot(&tmp, u).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Solve or reload the profile for `(d, p, N, L, tol)`. Cache writes go
/// through temp files with the meta file renamed last, so a concurrent
/// reader either sees a complete entry or none; racing writers produce
/// identical bytes (the solve is deterministic) and the last rename wins.
pub fn cached_ground_state(
    params: &PhysicalParams,
    grid: &Grid,
    opts: &GroundSolveOptions,
    cache_dir: &Path,
) -> Result<(GroundStateProfile, bool)> {
    let key = cache_key(params, grid, opts.tol);
    if let Some(profile) = try_load_cached(params, grid, &key, cache_dir) {
        return Ok((profile, true));
    }
    let profile = solve_ground_state(params, grid, opts)?;
    fs::create_dir_all(cache_dir)
        .with_context(|| format!("creating cache dir {}", cache_dir.display()))?;
    snapshot_atomic(&cache_dir.join(format!("{key}_q.nlsf")), &profile.q_field)?;
    snapshot_atomic(&cache_dir.join(format!("{key}_uq.nlsf")), &profile.uq_field)?;
    let meta = CacheMeta {
        q_solver_norms: norms_to_array(&profile.q_solver_norms),
        uq_solver_norms: norms_to_array(&profile.uq_solver_norms),
        iterations: [profile.iterations.0, profile.iterations.1],
        stabilizer_gap: profile.residuals.stabilizer_gap,
    };
    manifest::write_atomic(
        &cache_dir.join(format!("{key}.json")),
        serde_json::to_string_pretty(&meta)?.as_bytes(),
    )?;
    Ok((profile, false))
}

// ---------------------------------------------------------------------------
// initial data

pub fn build_initial_data(
    cfg: &ExperimentConfig,
    profile: &GroundStateProfile,
    base_dir: &Path,
) -> Result<ComplexField> {
    let grid = cfg.grid()?;
    match &cfg.initial {
        InitialData::SolitonMultiple { c } => {
            let mut u = profile.uq_field.scaled(C64::new(*c, 0.0));
            u.set_time_tag(0.0);
            Ok(u)
        }
        InitialData::Gaussian {
            amplitude,
            width,
            phase_frequency,
        } => {
            let a = *amplitude;
            let two_w_sq = 2.0 * width * width;
            let xi = phase_frequency.clone();
            Ok(ComplexField::from_fn(&grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let phase: f64 = x.iter().zip(&xi).map(|(v, k)| v * k).sum();
                C64::from_polar(1.0, phase) * (a * (-r2 / two_w_sq).exp())
            }))
        }
        InitialData::FromSnapshot { path } => {
            let resolved = config::resolve_path(base_dir, path);
            let u = read_snapshot(&resolved)?;
            if u.grid().dims() != grid.dims() || u.grid().extents() != grid.extents() {
                bail!(
                    "snapshot {} has grid {:?} x {:?}, config wants {:?} x {:?}",
                    resolved.display(),
                    u.grid().dims(),
                    u.grid().extents(),
                    grid.dims(),
                    grid.extents()
                );
            }
            Ok(u)
        }
    }
}

// ---------------------------------------------------------------------------
// observers

/// z and z'' per requested radius; all z columns first, then all z''.
struct VirialProbe {
    params: PhysicalParams,
    radii: Vec<f64>,
}

impl Observer for VirialProbe {
    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> =
            self.radii.iter().map(|&r| radius_column("z", r)).collect();
        cols.extend(self.radii.iter().map(|&r| radius_column("z_dprime", r)));
        cols
    }

    fn sample(&mut self, u: &ComplexField, ws: &mut SpectralWorkspace) -> Vec<f64> {
        let mut zs = Vec::with_capacity(self.radii.len());
        let mut zds = Vec::with_capacity(self.radii.len());
        for &r in &self.radii {
            // a corrupted state cannot be probed; NaN marks the cell
            zs.push(
                localized_variance(u, r, ws)
                    .map(|lv| lv.z)
                    .unwrap_or(f64::NAN),
            );
            zds.push(
                virial_rhs(u, &self.params, r, ws)
                    .map(|v| v.z_dprime)
                    .unwrap_or(f64::NAN),
            );
        }
        zs.extend(zds);
        zs
    }
}

/// Writes `snap_NNNNNN.nlsf` every `every`-th sample (the initial and final
/// fields are persisted separately, so sample 0 is skipped).
struct SnapshotSink<'a> {
    dir: &'a Path,
    every: usize,
    count: usize,
    error: Option<std::io::Error>,
}

impl Observer for SnapshotSink<'_> {
    fn columns(&self) -> Vec<String> {
        Vec::new()
    }

    fn sample(&mut self, u: &ComplexField, _ws: &mut SpectralWorkspace) -> Vec<f64> {
        if self.every > 0 && self.count > 0 && self.count % self.every == 0 {
            let path = self.dir.join(format!("snap_{:06}.nlsf", self.count));
            if let Err(e) = write_snapshot(&path, u) {
                self.error.get_or_insert(e);
            }
        }
        self.count += 1;
        Vec::new()
    }
}

/// Phase/shift/scale fit against the soliton orbit at the snapshot cadence
/// (every sample when the cadence is 0 would be too slow; then only the
/// first sample is fitted here and the final state afterwards).
struct ModulationSink<'a> {
    profile: &'a GroundStateProfile,
    search: ModulationSearch,
    every: usize,
    count: usize,
    rows: Vec<(f64, ModulationFit)>,
}

impl ModulationSink<'_> {
    fn fit(&mut self, u: &ComplexField) {
        if let Ok(fit) = soliton_distance(u, self.profile, &self.search) {
            self.rows.push((u.time_tag(), fit));
        }
    }
}

impl Observer for ModulationSink<'_> {
    fn columns(&self) -> Vec<String> {
        Vec::new()
    }

    fn sample(&mut self, u: &ComplexField, _ws: &mut SpectralWorkspace) -> Vec<f64> {
        let due = if self.every == 0 {
            self.count == 0
        } else {
            self.count % self.every == 0
        };
        if due {
            self.fit(u);
        }
        self.count += 1;
        Vec::new()
    }
}

fn write_modulation_csv(path: &Path, d: usize, rows: &[(f64, ModulationFit)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut headers = vec!["t".to_string(), "scale".into(), "theta".into()];
    headers.extend(["shift_x", "shift_y", "shift_z"][..d].iter().map(|s| s.to_string()));
    headers.push("residual_h1".into());
    headers.push("relative_residual".into());
    w.write_record(&headers)?;
    for (t, fit) in rows {
        let mut rec = vec![format!("{t}"), format!("{}", fit.scale), format!("{}", fit.theta)];
        rec.extend(fit.shift.iter().map(|s| format!("{s}")));
        rec.push(format!("{}", fit.residual_h1));
        rec.push(format!("{}", fit.relative_residual));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// classification JSON

#[derive(Serialize)]
struct StateReport {
    t: f64,
    mass: f64,
    energy: f64,
    momentum: Vec<f64>,
    grad_l2_sq: f64,
    potential_norm: f64,
    sup_abs: f64,
    renorm_gradient: f64,
    renorm_momentum: f64,
    renorm_mass_energy: Option<f64>,
    reduced_gradient: f64,
    reduced_mass_energy: f64,
    threshold_lower: f64,
    threshold_value: f64,
    threshold_upper: f64,
    threshold_violation: f64,
    classification: String,
}

#[derive(Serialize)]
struct GbgReport {
    window: [f64; 2],
    held: bool,
    /// `(t, G)` of the first sample outside the window.
    first_exit: Option<(f64, f64)>,
}

#[derive(Serialize)]
struct ClassificationFile {
    d: usize,
    p: f64,
    s: f64,
    soliton_mass: f64,
    soliton_energy: f64,
    soliton_grad_sq: f64,
    /// Recorded a-priori property selecting the blowup-side verdict.
    finite_variance_or_radial: bool,
    initial: StateReport,
    #[serde(rename = "final")]
    final_state: Option<StateReport>,
    gbg: Option<GbgReport>,
}

fn state_report(
    report: &InvariantReport,
    params: &PhysicalParams,
    classification: Classification,
) -> StateReport {
    let tb = threshold_bounds(report, params);
    StateReport {
        t: report.time_tag,
        mass: report.mass,
        energy: report.energy,
        momentum: report.momentum.clone(),
        grad_l2_sq: report.grad_l2_sq,
        potential_norm: report.potential_integral,
        sup_abs: report.sup_abs,
        renorm_gradient: report.renorm_gradient,
        renorm_momentum: report.renorm_momentum,
        renorm_mass_energy: report.renorm_mass_energy,
        reduced_gradient: report.reduced_gradient,
        reduced_mass_energy: report.reduced_mass_energy,
        threshold_lower: tb.lower,
        threshold_value: tb.value,
        threshold_upper: tb.upper,
        threshold_violation: tb.violation(),
        classification: format!("{classification:?}"),
    }
}

/// The initial-data families are radial or Schwartz-class, so the decay
/// hypothesis behind the finite-variance blowup verdict holds.
const FINITE_VARIANCE: bool = true;

pub fn classify_state(
    u: &ComplexField,
    params: &PhysicalParams,
    profile: &GroundStateProfile,
    ws: &mut SpectralWorkspace,
) -> nlslab_core::Result<(InvariantReport, Classification)> {
    let report = invariant_report(u, params, &profile.soliton_norms(), ws)?;
    let class = classify(
        &report,
        params,
        ThresholdTolerance::default(),
        FINITE_VARIANCE,
    );
    Ok((report, class))
}

// ---------------------------------------------------------------------------
// run

pub fn outcome_name(outcome: &Outcome) -> (&'static str, Option<f64>) {
    match outcome {
        Outcome::ReachedHorizon => ("reached-horizon", None),
        Outcome::BlowupDetected { t } => ("blowup-detected", Some(*t)),
        Outcome::Corrupted { t } => ("corrupted", Some(*t)),
    }
}

/// 0 for a completed run, 2 for detected blowup (informational), 1 otherwise.
pub fn exit_code_for(outcome: &str) -> u8 {
    match outcome {
        "reached-horizon" => 0,
        "blowup-detected" => 2,
        _ => 1,
    }
}

pub struct RunOutput {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
}

/// Execute one experiment into `out_dir`. On error the manifest still lands
/// (outcome `error`, partial file inventory) before the error propagates.
pub fn run(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    out_dir: &Path,
    cache_dir: &Path,
) -> Result<RunOutput> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let started = now_unix_ms();

    match run_inner(cfg, base_dir, out_dir, cache_dir) {
        Ok((outcome, steps, final_g, final_me)) => {
            let (name, time) = outcome_name(&outcome);
            let manifest = RunManifest {
                config_hash: config_hash(cfg),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix_ms: started,
                finished_unix_ms: now_unix_ms(),
                outcome: name.to_string(),
                outcome_time: time,
                steps: Some(steps),
                final_renorm_gradient: final_g,
                final_renorm_mass_energy: final_me,
                error: None,
                files: file_inventory(out_dir)?,
                config: cfg.clone(),
            };
            write_manifest_atomic(out_dir, &manifest)?;
            Ok(RunOutput {
                manifest,
                out_dir: out_dir.to_path_buf(),
            })
        }
        Err(e) => {
            let manifest = RunManifest {
                config_hash: config_hash(cfg),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix_ms: started,
                finished_unix_ms: now_unix_ms(),
                outcome: "error".to_string(),
                outcome_time: None,
                steps: None,
                final_renorm_gradient: None,
                final_renorm_mass_energy: None,
                error: Some(format!("{e:#}")),
                files: file_inventory(out_dir).unwrap_or_default(),
                config: cfg.clone(),
            };
            let _ = write_manifest_atomic(out_dir, &manifest);
            Err(e)
        }
    }
}

fn run_inner(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    out_dir: &Path,
    cache_dir: &Path,
) -> Result<(Outcome, usize, Option<f64>, Option<f64>)> {
    let params = cfg.physical_params()?;
    let grid = cfg.grid()?;
    let (profile, _cache_hit) =
        cached_ground_state(&params, &grid, &GroundSolveOptions::default(), cache_dir)?;

    let u0 = build_initial_data(cfg, &profile, base_dir)?;
    write_snapshot(&out_dir.join("initial.nlsf"), &u0)?;

    let mut ws = SpectralWorkspace::new(&grid);
    let (initial_report, initial_class) = classify_state(&u0, &params, &profile, &mut ws)?;
    let mut class_file = ClassificationFile {
        d: params.d,
        p: params.p,
        s: params.s,
        soliton_mass: profile.soliton_norms().mass,
        soliton_energy: profile.soliton_norms().energy,
        soliton_grad_sq: profile.soliton_norms().grad_sq,
        finite_variance_or_radial: FINITE_VARIANCE,
        initial: state_report(&initial_report, &params, initial_class),
        final_state: None,
        gbg: None,
    };
    manifest::write_atomic(
        &out_dir.join("classification.json"),
        serde_json::to_string_pretty(&class_file)?.as_bytes(),
    )?;

    let prop = &cfg.propagator;
    let prop_cfg = PropagatorConfig {
        dt: prop.dt,
        t_end: prop.t_end,
        adapt: prop.adapt,
        blowup_guard: prop.blowup_guard,
        sup_bound: prop.sup_bound,
        sample_every: prop.sample_every,
        dealias: prop.dealias,
        max_steps: prop.max_steps,
    };

    let mut virial = VirialProbe {
        params,
        radii: cfg.diagnostics.virial_radii.clone(),
    };
    let mut snapshots = SnapshotSink {
        dir: out_dir,
        every: cfg.diagnostics.snapshot_every,
        count: 0,
        error: None,
    };
    let mut modulation = cfg.diagnostics.modulation_fit.then(|| ModulationSink {
        profile: &profile,
        search: ModulationSearch::default(),
        every: cfg.diagnostics.snapshot_every,
        count: 0,
        rows: Vec::new(),
    });

    let result = {
        let mut observers: Vec<&mut dyn Observer> = vec![&mut virial, &mut snapshots];
        if let Some(sink) = modulation.as_mut() {
            observers.push(sink);
        }
        evolve(
            &u0,
            &params,
            &prop_cfg,
            Some(&profile.soliton_norms()),
            &mut observers,
        )?
    };
    if let Some(e) = snapshots.error {
        return Err(anyhow!(e).context("writing cadence snapshot"));
    }

    write_series_csv(
        &out_dir.join("series.csv"),
        &result.series,
        params.d,
        &cfg.diagnostics.virial_radii,
    )?;
    write_snapshot(&out_dir.join("final.nlsf"), &result.final_state)?;

    if let Some(mut sink) = modulation {
        let already = sink
            .rows
            .last()
            .is_some_and(|(t, _)| *t == result.final_state.time_tag());
        if !already && result.final_state.ensure_finite("modulation").is_ok() {
            sink.fit(&result.final_state);
        }
        write_modulation_csv(&out_dir.join("modulation.csv"), params.d, &sink.rows)?;
    }

    if !matches!(result.outcome, Outcome::Corrupted { .. }) {
        if let Ok((report, class)) = classify_state(&result.final_state, &params, &profile, &mut ws)
        {
            class_file.final_state = Some(state_report(&report, &params, class));
        }
    }
    if let Some([lo, hi]) = cfg.diagnostics.gbg_window {
        let window = nlslab_core::diagnostics::gradient_window(&result.series, lo, hi)?;
        class_file.gbg = Some(GbgReport {
            window: [lo, hi],
            held: window.held,
            first_exit: window.first_exit,
        });
    }
    manifest::write_atomic(
        &out_dir.join("classification.json"),
        serde_json::to_string_pretty(&class_file)?.as_bytes(),
    )?;

    let last = result.series.last();
    Ok((
        result.outcome,
        result.steps,
        last.and_then(|r| r.renorm_gradient),
        last.and_then(|r| r.renorm_mass_energy),
    ))
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub outcome: String,
    pub final_g: Option<f64>,
    pub final_me: Option<f64>,
    pub run_dir: Option<String>,
    pub error: Option<String>,
}

fn sanitize_component(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_alphanumeric() || ".-+".contains(c) { c } else { '_' })
        .collect()
}

pub fn write_summary_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["axis", "value", "outcome", "final_G", "final_ME", "error"])?;
    for row in rows {
        w.write_record([
            row.axis.as_str(),
            row.value.as_str(),
            row.outcome.as_str(),
            &row.final_g.map(|x| format!("{x}")).unwrap_or_default(),
            &row.final_me.map(|x| format!("{x}")).unwrap_or_default(),
            row.error.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Independent runs over `axis` ∈ `values`, each in its own subdirectory of
/// `out_root`, sharing one ground-state cache. Per-run failures land in the
/// summary and that run's manifest; the sweep itself keeps going.
pub fn sweep(
    base_table: &toml::Table,
    base_dir: &Path,
    axis: &str,
    values: &[String],
    out_root: &Path,
    cache_dir: &Path,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    fs::create_dir_all(out_root)
        .with_context(|| format!("creating sweep dir {}", out_root.display()))?;

    // settle each value's config up front; config errors become rows
    let mut jobs_list: Vec<(String, Result<(ExperimentConfig, PathBuf), String>)> = Vec::new();
    for value in values {
        let mut table = base_table.clone();
        let prepared = config::apply_override(&mut table, axis, value)
            .and_then(|()| config::table_to_config(&table, base_dir))
            .map(|cfg| {
                let dir = out_root.join(format!(
                    "{}={}",
                    sanitize_component(axis),
                    sanitize_component(value)
                ));
                (cfg, dir)
            })
            .map_err(|e| e.to_string());
        jobs_list.push((value.clone(), prepared));
    }

    // warm the cache once per distinct (params, grid) so parallel workers
    // don't all solve the same profile
    let mut seen = Vec::new();
    for (_, prepared) in &jobs_list {
        if let Ok((cfg, _)) = prepared {
            if let (Ok(params), Ok(grid)) = (cfg.physical_params(), cfg.grid()) {
                let key = cache_key(&params, &grid, GroundSolveOptions::default().tol);
                if !seen.contains(&key) {
                    seen.push(key);
                    cached_ground_state(&params, &grid, &GroundSolveOptions::default(), cache_dir)?;
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building sweep worker pool")?;
    let rows: Vec<SweepRow> = pool.install(|| {
        use rayon::prelude::*;
        jobs_list
            .par_iter()
            .map(|(value, prepared)| match prepared {
                Err(msg) => SweepRow {
                    axis: axis.to_string(),
                    value: value.clone(),
                    outcome: "error".into(),
                    final_g: None,
                    final_me: None,
                    run_dir: None,
                    error: Some(msg.clone()),
                },
                Ok((cfg, dir)) => match run(cfg, base_dir, dir, cache_dir) {
                    Ok(out) => SweepRow {
                        axis: axis.to_string(),
                        value: value.clone(),
                        outcome: out.manifest.outcome.clone(),
                        final_g: out.manifest.final_renorm_gradient,
                        final_me: out.manifest.final_renorm_mass_energy,
                        run_dir: Some(dir_name(dir)),
                        error: None,
                    },
                    Err(e) => SweepRow {
                        axis: axis.to_string(),
                        value: value.clone(),
                        outcome: "error".into(),
                        final_g: None,
                        final_me: None,
                        run_dir: Some(dir_name(dir)),
                        error: Some(format!("{e:#}")),
                    },
                },
            })
            .collect()
    });

    write_summary_csv(&out_root.join("summary.csv"), &rows)?;
    Ok(rows)
}

fn dir_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

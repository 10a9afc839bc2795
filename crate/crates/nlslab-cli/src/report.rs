//! `report`: re-render human-readable summaries and plot-ready CSVs from a
//! finished run or sweep directory, using only what is stored on disk.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::manifest::{read_manifest, RunManifest, MANIFEST_FILE};
use crate::runner::{write_summary_csv, SweepRow};
use crate::series::read_series_csv;

pub fn report(dir: &Path) -> Result<()> {
    if dir.join(MANIFEST_FILE).is_file() {
        report_run(dir)
    } else if dir.join("summary.csv").is_file() || has_run_subdirs(dir)? {
        report_sweep(dir)
    } else {
        bail!(
            "{}: neither a run directory (no {MANIFEST_FILE}) nor a sweep directory",
            dir.display()
        );
    }
}

fn has_run_subdirs(dir: &Path) -> Result<bool> {
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let entry = entry?;
        if entry.path().join(MANIFEST_FILE).is_file() {
            return Ok(true);
        }
    }
    Ok(false)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
}

fn print_manifest_line(m: &RunManifest) {
    let when = m
        .outcome_time
        .map(|t| format!(" at t = {t:.6}"))
        .unwrap_or_default();
    println!(
        "outcome: {}{when}   steps: {}   final G = {}   ME = {}",
        m.outcome,
        m.steps.map(|s| s.to_string()).unwrap_or_else(|| "-".into()),
        fmt_opt(m.final_renorm_gradient),
        fmt_opt(m.final_renorm_mass_energy),
    );
    if let Some(err) = &m.error {
        println!("error: {err}");
    }
}

/// Single run: manifest summary, drift numbers from the series, and
/// `plot/invariants.csv` + `plot/virial.csv` for external plotting.
fn report_run(dir: &Path) -> Result<()> {
    let m = read_manifest(dir)?;
    println!("run {}", dir.display());
    println!(
        "config {}   d = {}, p = {}",
        m.config_hash, m.config.params.d, m.config.params.p
    );
    print_manifest_line(&m);

    if let Ok(text) = fs::read_to_string(dir.join("classification.json")) {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
            if let Some(c) = v.pointer("/initial/classification").and_then(|x| x.as_str()) {
                println!("classification (initial data): {c}");
            }
            if let Some(g) = v.pointer("/gbg") {
                if !g.is_null() {
                    println!("gbg window: {g}");
                }
            }
        }
    }

    let series_path = dir.join("series.csv");
    if !series_path.is_file() {
        println!("no series.csv; skipping drift re-render");
        return Ok(());
    }
    let table = read_series_csv(&series_path)?;
    let t = table.dense_column("t")?;
    let mass = table.dense_column("mass")?;
    let energy = table.dense_column("energy")?;
    if t.is_empty() {
        bail!("{}: empty series", series_path.display());
    }
    let m0 = mass[0];
    let e0 = energy[0];
    let mass_drift: Vec<f64> = mass.iter().map(|&m| (m - m0).abs() / m0.abs()).collect();
    let energy_scale = e0.abs().max(1e-300);
    let energy_drift: Vec<f64> = energy.iter().map(|&e| (e - e0).abs() / energy_scale).collect();
    let worst_mass = mass_drift.iter().cloned().fold(0.0, f64::max);
    let worst_energy = energy_drift.iter().cloned().fold(0.0, f64::max);
    println!("relative drift over {} samples: mass {worst_mass:.3e}, energy {worst_energy:.3e}",
        t.len());

    let plot_dir = dir.join("plot");
    fs::create_dir_all(&plot_dir)?;

    let g = table.column("G")?;
    let me = table.column("ME")?;
    let sup = table.dense_column("sup_abs")?;
    let mut w = csv::Writer::from_path(plot_dir.join("invariants.csv"))?;
    w.write_record(["t", "mass_drift", "energy_drift", "G", "ME", "sup_abs"])?;
    for i in 0..t.len() {
        w.write_record([
            format!("{}", t[i]),
            format!("{}", mass_drift[i]),
            format!("{}", energy_drift[i]),
            g[i].map(|x| format!("{x}")).unwrap_or_default(),
            me[i].map(|x| format!("{x}")).unwrap_or_default(),
            format!("{}", sup[i]),
        ])?;
    }
    w.flush()?;

    let virial_cols: Vec<&String> = table
        .headers
        .iter()
        .filter(|h| h.starts_with("z_R") || h.starts_with("z_dprime_R"))
        .collect();
    if !virial_cols.is_empty() {
        let mut w = csv::Writer::from_path(plot_dir.join("virial.csv"))?;
        let mut headers = vec!["t".to_string()];
        headers.extend(virial_cols.iter().map(|h| (*h).clone()));
        w.write_record(&headers)?;
        let data: Vec<Vec<Option<f64>>> = virial_cols
            .iter()
            .map(|h| table.column(h))
            .collect::<Result<_>>()?;
        for i in 0..t.len() {
            let mut rec = vec![format!("{}", t[i])];
            rec.extend(
                data.iter()
                    .map(|col| col[i].map(|x| format!("{x}")).unwrap_or_default()),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    println!("plot data under {}", plot_dir.display());
    Ok(())
}

/// Sweep: rebuild summary.csv from the per-run manifests (the stored files
/// are the source of truth) and print the table.
fn report_sweep(dir: &Path) -> Result<()> {
    let mut rows = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.join(MANIFEST_FILE).is_file())
        .collect();
    entries.sort();
    for run_dir in &entries {
        let m = read_manifest(run_dir)?;
        let name = run_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let (axis, value) = name
            .split_once('=')
            .map(|(a, v)| (a.to_string(), v.to_string()))
            .unwrap_or((String::new(), name.clone()));
        rows.push(SweepRow {
            axis,
            value,
            outcome: m.outcome.clone(),
            final_g: m.final_renorm_gradient,
            final_me: m.final_renorm_mass_energy,
            run_dir: Some(name),
            error: m.error.clone(),
        });
    }
    if rows.is_empty() {
        println!("sweep {}: no finished runs", dir.display());
        return Ok(());
    }
    write_summary_csv(&dir.join("summary.csv"), &rows)?;
    println!("sweep {} ({} runs)", dir.display(), rows.len());
    println!("{:<24} {:>10} {:>18} {:>12} {:>12}", "run", "value", "outcome", "G", "ME");
    for r in &rows {
        println!(
            "{:<24} {:>10} {:>18} {:>12} {:>12}",
            r.run_dir.as_deref().unwrap_or("-"),
            r.value,
            r.outcome,
            fmt_opt(r.final_g),
            fmt_opt(r.final_me),
        );
    }
    println!("summary rewritten to {}", dir.join("summary.csv").display());
    Ok(())
}

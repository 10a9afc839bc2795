//! Time-series CSV with a fixed, documented column set:
//!
//! `t, mass, energy, px[, py, pz], grad_l2_sq, potential_norm, G, ME,
//! sup_abs`, then `z_R{r}` for every requested virial radius, then
//! `z_dprime_R{r}`.
//!
//! `potential_norm` is `∫|u|^{p+1}`; `G` and `ME` are the renormalized
//! gradient and mass-energy (`ME` empty when the energy is negative).
//! Floats are written in shortest round-trip form, so identical runs
//! produce byte-identical files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use nlslab_core::evolve::TimeSeries;

const MOMENTUM: [&str; 3] = ["px", "py", "pz"];

pub fn radius_column(kind: &str, radius: f64) -> String {
    format!("{kind}_R{radius}")
}

pub fn column_headers(d: usize, radii: &[f64]) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "mass".into(), "energy".into()];
    cols.extend(MOMENTUM[..d].iter().map(|s| s.to_string()));
    cols.extend(
        ["grad_l2_sq", "potential_norm", "G", "ME", "sup_abs"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.extend(radii.iter().map(|&r| radius_column("z", r)));
    cols.extend(radii.iter().map(|&r| radius_column("z_dprime", r)));
    cols
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// The virial observer emits all `z` columns then all `z_dprime` columns,
/// matching `column_headers`; anything else is a caller bug.
pub fn write_series_csv(
    path: &Path,
    series: &TimeSeries,
    d: usize,
    radii: &[f64],
) -> Result<()> {
    let headers = column_headers(d, radii);
    let expected_extra = &headers[headers.len() - 2 * radii.len()..];
    if series.extra_columns != expected_extra {
        bail!(
            "series extra columns {:?} do not match the virial layout {:?}",
            series.extra_columns,
            expected_extra
        );
    }
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&headers)?;
    for row in &series.rows {
        let mut rec: Vec<String> =
            vec![fmt(row.t), fmt(row.mass), fmt(row.energy)];
        rec.extend(row.momentum.iter().map(|&p| fmt(p)));
        rec.push(fmt(row.grad_l2_sq));
        rec.push(fmt(row.potential_integral));
        rec.push(fmt_opt(row.renorm_gradient));
        rec.push(fmt_opt(row.renorm_mass_energy));
        rec.push(fmt(row.sup_abs));
        rec.extend(row.extra.iter().map(|&x| fmt(x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A generic numeric CSV read back for reports and summaries. Empty cells
/// become `None`.
pub struct SeriesTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl SeriesTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self
            .column_index(name)
            .with_context(|| format!("series has no column `{name}`"))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Column with every cell present.
    pub fn dense_column(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.with_context(|| format!("column `{name}` empty at row {i}")))
            .collect()
    }
}

pub fn read_series_csv(path: &Path) -> Result<SeriesTable> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = r.headers()?.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        if record.len() != headers.len() {
            bail!(
                "{}: row has {} fields, header has {}",
                path.display(),
                record.len(),
                headers.len()
            );
        }
        let row: Vec<Option<f64>> = record
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).with_context(|| {
                        format!("{}: bad numeric cell `{cell}`", path.display())
                    })
                }
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Ok(SeriesTable { headers, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nlslab_core::evolve::SeriesRow;

    fn sample_series() -> TimeSeries {
        TimeSeries {
            extra_columns: vec!["z_R5".into(), "z_dprime_R5".into()],
            rows: vec![SeriesRow {
                t: 0.0,
                mass: 1.5,
                energy: -0.25,
                momentum: vec![0.125],
                grad_l2_sq: 2.0,
                potential_integral: 3.0,
                sup_abs: 1.25,
                renorm_gradient: Some(0.5),
                renorm_mass_energy: None,
                extra: vec![10.0, -4.0],
            }],
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        assert_eq!(
            column_headers(2, &[5.0, 2.5]),
            vec![
                "t", "mass", "energy", "px", "py", "grad_l2_sq", "potential_norm",
                "G", "ME", "sup_abs", "z_R5", "z_R2.5", "z_dprime_R5", "z_dprime_R2.5"
            ]
        );
    }

    #[test]
    fn negative_energy_leaves_me_empty_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("series.csv");
        write_series_csv(&p, &sample_series(), 1, &[5.0]).unwrap();
        let table = read_series_csv(&p).unwrap();
        assert_eq!(table.headers, column_headers(1, &[5.0]));
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.dense_column("mass").unwrap(), vec![1.5]);
        assert_eq!(table.column("ME").unwrap(), vec![None]);
        assert_eq!(table.dense_column("z_dprime_R5").unwrap(), vec![-4.0]);
    }

    #[test]
    fn mismatched_observer_columns_are_refused() {
        let mut series = sample_series();
        series.extra_columns = vec!["z_R5".into(), "z_dprime_R8".into()];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("series.csv");
        assert!(write_series_csv(&p, &series, 1, &[5.0]).is_err());
    }
}

//! Experiment configuration: TOML schema, `--set` overrides, and validation
//! that reports every violation at once instead of bailing at the first.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nlslab_core::PhysicalParams;
use serde::{Deserialize, Serialize};

/// One experiment, fully specified. Hashing the serialized form of this
/// struct (not the TOML text) is what makes the manifest hash insensitive
/// to key order and comments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamsSection,
    pub grid: GridSection,
    pub initial: InitialData,
    #[serde(default)]
    pub propagator: PropagatorSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    /// Reserved for randomized initial-data variants; part of the identity
    /// of a run either way.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub d: usize,
    pub p: f64,
}

/// Cubic periodic grid: `n` points per axis on `[-l, l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `c · u_Q` for the solved ground state.
    SolitonMultiple { c: f64 },
    /// `A exp(-|x|^2 / 2w^2) exp(i x·ξ)`.
    Gaussian {
        amplitude: f64,
        width: f64,
        /// ξ; empty means zero.
        #[serde(default)]
        phase_frequency: Vec<f64>,
    },
    /// Resume from a stored field. `t_end` counts from its time tag.
    FromSnapshot { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSection {
    pub dt: f64,
    /// Duration, added to the initial time tag.
    pub t_end: f64,
    pub adapt: bool,
    /// Gradient-growth factor that stops the run.
    pub blowup_guard: f64,
    pub sup_bound: Option<f64>,
    /// Series row every this many steps.
    pub sample_every: usize,
    pub dealias: bool,
    pub max_steps: usize,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            adapt: false,
            blowup_guard: 10.0,
            sup_bound: None,
            sample_every: 10,
            dealias: false,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Radii for the localized-variance columns (z and z'' per radius).
    pub virial_radii: Vec<f64>,
    /// Field snapshot every this many series samples; 0 keeps only the
    /// initial and final fields.
    pub snapshot_every: usize,
    /// `[lower, upper]` bounds the renormalized gradient is checked against
    /// after the run.
    pub gbg_window: Option<[f64; 2]>,
    /// Fit phase/shift/scale modulation parameters at the snapshot cadence.
    pub modulation_fit: bool,
}

impl ExperimentConfig {
    pub fn physical_params(&self) -> nlslab_core::Result<PhysicalParams> {
        PhysicalParams::new(self.params.d, self.params.p)
    }

    pub fn grid(&self) -> nlslab_core::Result<nlslab_core::Grid> {
        nlslab_core::Grid::cubic(self.params.d, self.grid.n, self.grid.l)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Syntax or shape error, with a position when the parser had one.
    Parse {
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },
    BadOverride {
        key: String,
        message: String,
    },
    /// Every semantic violation found, not just the first.
    Validation(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "cannot read config {}: {}", path.display(), source)
            }
            ConfigError::Parse {
                line: Some(l),
                column: Some(c),
                message,
            } => write!(f, "config parse error at line {l}, column {c}: {message}"),
            ConfigError::Parse { message, .. } => {
                write!(f, "config parse error: {message}")
            }
            ConfigError::BadOverride { key, message } => {
                write!(f, "bad --set override for `{key}`: {message}")
            }
            ConfigError::Validation(errors) => {
                writeln!(f, "invalid config ({} error(s)):", errors.len())?;
                for e in errors {
                    writeln!(f, "  - {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let clamped = offset.min(text.len());
    let mut line = 1;
    let mut col = 1;
    for ch in text[..clamped].chars() {
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn parse_error(text: &str, err: toml::de::Error) -> ConfigError {
    let (line, column) = match err.span() {
        Some(span) => {
            let (l, c) = line_col(text, span.start);
            (Some(l), Some(c))
        }
        None => (None, None),
    };
    ConfigError::Parse {
        line,
        column,
        message: err.message().to_string(),
    }
}

/// Parse the raw TOML to a table, keeping positions for syntax errors.
pub fn parse_table(text: &str) -> Result<toml::Table, ConfigError> {
    text.parse::<toml::Table>().map_err(|e| parse_error(text, e))
}

/// Interpret the value side of `--set key=value`. Tried as a TOML value
/// first (`0.5`, `true`, `[1.0, 2.0]`), falling back to a plain string so
/// `--set initial.kind=gaussian` works without quoting.
fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    if let Ok(t) = wrapped.parse::<toml::Table>() {
        if let Some(v) = t.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.to_string())
}

/// Set `table[a][b][c] = value` for the dotted `key` "a.b.c", creating
/// intermediate tables as needed.
pub fn apply_override(
    table: &mut toml::Table,
    key: &str,
    raw_value: &str,
) -> Result<(), ConfigError> {
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::BadOverride {
            key: key.to_string(),
            message: "empty path segment".into(),
        });
    }
    let mut current = table;
    for seg in &segments[..segments.len() - 1] {
        let entry = current
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = match entry {
            toml::Value::Table(t) => t,
            other => {
                return Err(ConfigError::BadOverride {
                    key: key.to_string(),
                    message: format!("`{seg}` is a {} value, not a table", other.type_str()),
                })
            }
        };
    }
    current.insert(
        segments[segments.len() - 1].to_string(),
        parse_override_value(raw_value),
    );
    Ok(())
}

/// Split a `KEY=VALUE` argument.
pub fn split_set_arg(arg: &str) -> Result<(&str, &str), ConfigError> {
    arg.split_once('=').ok_or_else(|| ConfigError::BadOverride {
        key: arg.to_string(),
        message: "expected KEY=VALUE".into(),
    })
}

/// Drop the dotted `key` if present (needed when an override switches the
/// initial-data kind and a stale variant field must go away).
pub fn remove_key(table: &mut toml::Table, key: &str) {
    let segments: Vec<&str> = key.split('.').collect();
    let mut current = table;
    for seg in &segments[..segments.len() - 1] {
        match current.get_mut(*seg) {
            Some(toml::Value::Table(t)) => current = t,
            _ => return,
        }
    }
    current.remove(segments[segments.len() - 1]);
}

/// Typed deserialization + validation of an override-patched table.
///
/// Deserializing goes through re-rendered TOML text so shape errors (missing
/// field, wrong type, unknown key) still carry a position — in the effective
/// config, which differs from the file only when overrides were applied.
pub fn table_to_config(
    table: &toml::Table,
    base_dir: &Path,
) -> Result<ExperimentConfig, ConfigError> {
    let text = toml::to_string(table).map_err(|e| ConfigError::Parse {
        line: None,
        column: None,
        message: e.to_string(),
    })?;
    let cfg: ExperimentConfig =
        toml::from_str(&text).map_err(|e| parse_error(&text, e))?;
    let errors = validate(&cfg, base_dir);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Validation(errors))
    }
}

/// Read, patch with overrides, deserialize, validate. Returns the config and
/// the patched table (sweeps re-patch the table per axis value).
pub fn load_config(
    path: &Path,
    set_args: &[String],
    unset_keys: &[String],
) -> Result<(ExperimentConfig, toml::Table), ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut table = parse_table(&text)?;
    for arg in set_args {
        let (key, value) = split_set_arg(arg)?;
        apply_override(&mut table, key, value)?;
    }
    for key in unset_keys {
        remove_key(&mut table, key);
    }
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    let cfg = table_to_config(&table, base_dir)?;
    Ok((cfg, table))
}

/// Every violation in the config, in declaration order. Relative paths are
/// resolved against `base_dir` (the config file's directory).
pub fn validate(cfg: &ExperimentConfig, base_dir: &Path) -> Vec<String> {
    let mut errors = Vec::new();

    if let Err(e) = PhysicalParams::new(cfg.params.d, cfg.params.p) {
        errors.push(format!("params: {e}"));
    }
    if cfg.params.d > 3 {
        errors.push(format!("params: grids support d = 1, 2, 3; got {}", cfg.params.d));
    }

    if !cfg.grid.n.is_power_of_two() || cfg.grid.n < 8 {
        errors.push(format!(
            "grid: n = {} must be a power of two and at least 8",
            cfg.grid.n
        ));
    }
    if !(cfg.grid.l.is_finite() && cfg.grid.l > 0.0) {
        errors.push(format!("grid: l = {} must be positive", cfg.grid.l));
    }

    match &cfg.initial {
        InitialData::SolitonMultiple { c } => {
            if !(c.is_finite() && *c > 0.0) {
                errors.push(format!("initial: c = {c} must be positive"));
            }
        }
        InitialData::Gaussian {
            amplitude,
            width,
            phase_frequency,
        } => {
            if !amplitude.is_finite() || *amplitude == 0.0 {
                errors.push(format!(
                    "initial: amplitude = {amplitude} must be finite and nonzero"
                ));
            }
            if !(width.is_finite() && *width > 0.0) {
                errors.push(format!("initial: width = {width} must be positive"));
            }
            if !phase_frequency.is_empty() && phase_frequency.len() != cfg.params.d {
                errors.push(format!(
                    "initial: phase_frequency has {} entries but d = {}",
                    phase_frequency.len(),
                    cfg.params.d
                ));
            }
        }
        InitialData::FromSnapshot { path } => {
            let resolved = resolve_path(base_dir, path);
            if !resolved.is_file() {
                errors.push(format!(
                    "initial: snapshot {} not found",
                    resolved.display()
                ));
            }
        }
    }

    let prop = &cfg.propagator;
    if !(prop.dt.is_finite() && prop.dt > 0.0) {
        errors.push(format!("propagator: dt = {} must be positive", prop.dt));
    }
    if !(prop.t_end.is_finite() && prop.t_end > 0.0) {
        errors.push(format!("propagator: t_end = {} must be positive", prop.t_end));
    }
    if !(prop.blowup_guard.is_finite() && prop.blowup_guard > 1.0) {
        errors.push(format!(
            "propagator: blowup_guard = {} must exceed 1",
            prop.blowup_guard
        ));
    }
    if let Some(cap) = prop.sup_bound {
        if !(cap.is_finite() && cap > 0.0) {
            errors.push(format!("propagator: sup_bound = {cap} must be positive"));
        }
    }
    if prop.sample_every == 0 {
        errors.push("propagator: sample_every must be at least 1".into());
    }
    if prop.max_steps == 0 {
        errors.push("propagator: max_steps must be at least 1".into());
    }

    for &r in &cfg.diagnostics.virial_radii {
        if !(r.is_finite() && r > 0.0) {
            errors.push(format!("diagnostics: virial radius {r} must be positive"));
        } else if 2.0 * r > cfg.grid.l {
            // the cutoff weight is supported on |x| <= 2R and must not wrap
            errors.push(format!(
                "diagnostics: virial radius {r} needs 2R <= l = {}",
                cfg.grid.l
            ));
        }
    }
    if let Some([lo, hi]) = cfg.diagnostics.gbg_window {
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            errors.push(format!(
                "diagnostics: gbg_window [{lo}, {hi}] needs 0 < lower < upper"
            ));
        }
    }

    errors
}

pub fn resolve_path(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [params]
        d = 1
        p = 7.0

        [grid]
        n = 256
        l = 20.0

        [initial]
        kind = "soliton-multiple"
        c = 1.0
    "#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let table = parse_table(MINIMAL).unwrap();
        let cfg = table_to_config(&table, Path::new(".")).unwrap();
        assert_eq!(cfg.params.d, 1);
        assert_eq!(cfg.initial, InitialData::SolitonMultiple { c: 1.0 });
        assert_eq!(cfg.propagator.dt, 1e-3);
        assert_eq!(cfg.propagator.sample_every, 10);
        assert!(!cfg.diagnostics.modulation_fit);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn syntax_error_reports_line_and_column() {
        let text = "[params]\nd = = 1\n";
        match parse_table(text) {
            Err(ConfigError::Parse { line, column, .. }) => {
                assert_eq!(line, Some(2));
                assert!(column.is_some());
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn validation_collects_every_violation() {
        let text = r#"
            [params]
            d = 3
            p = 2.0

            [grid]
            n = 1000
            l = 20.0

            [initial]
            kind = "soliton-multiple"
            c = -1.0

            [propagator]
            dt = 0.0
        "#;
        let table = parse_table(text).unwrap();
        match table_to_config(&table, Path::new(".")) {
            Err(ConfigError::Validation(errors)) => {
                assert!(errors.len() >= 4, "got {errors:?}");
                assert!(errors.iter().any(|e| e.contains("power of two")));
                assert!(errors.iter().any(|e| e.contains("c = -1")));
                assert!(errors.iter().any(|e| e.contains("dt = 0")));
                // p = 2, d = 3 puts the scaling index at s < 0
                assert!(errors.iter().any(|e| e.starts_with("params:")));
            }
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn overrides_patch_nested_keys_and_types() {
        let mut table = parse_table(MINIMAL).unwrap();
        apply_override(&mut table, "initial.c", "0.5").unwrap();
        apply_override(&mut table, "propagator.dt", "1e-4").unwrap();
        apply_override(&mut table, "diagnostics.virial_radii", "[5.0, 8.0]").unwrap();
        let cfg = table_to_config(&table, Path::new(".")).unwrap();
        assert_eq!(cfg.initial, InitialData::SolitonMultiple { c: 0.5 });
        assert_eq!(cfg.propagator.dt, 1e-4);
        assert_eq!(cfg.diagnostics.virial_radii, vec![5.0, 8.0]);
    }

    #[test]
    fn bare_string_override_reaches_enum_tags() {
        let mut table = parse_table(MINIMAL).unwrap();
        apply_override(&mut table, "initial.kind", "gaussian").unwrap();
        apply_override(&mut table, "initial.amplitude", "1.5").unwrap();
        apply_override(&mut table, "initial.width", "2.0").unwrap();
        // the soliton key must go away for the tagged enum to parse
        if let Some(toml::Value::Table(init)) = table.get_mut("initial") {
            init.remove("c");
        }
        let cfg = table_to_config(&table, Path::new(".")).unwrap();
        match cfg.initial {
            InitialData::Gaussian { amplitude, width, .. } => {
                assert_eq!(amplitude, 1.5);
                assert_eq!(width, 2.0);
            }
            other => panic!("expected gaussian, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[propagator]\ntimestep = 0.1\n");
        let table = parse_table(&text).unwrap();
        assert!(matches!(
            table_to_config(&table, Path::new(".")),
            Err(ConfigError::Parse { .. })
        ));
    }
}

//! Parameter sweeps, plot-ready tables and the regime-threshold checks.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asympt::{gamma_asympt, AsymptoticConstants};
use crate::exact::{gamma_exact, ExactConfig};
use crate::mc::{estimate_gamma_mc, McConfig};
use crate::model::{Sign, SpectralPoint};

/// Column order of every written table.
pub const COLUMNS: [&str; 6] = [
    "nu",
    "gamma_over_omega_exact",
    "gamma_over_omega_asympt",
    "gamma_over_omega_mc",
    "mc_std_error",
    "rel_err_exact_vs_asympt",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("writing {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Exact,
    Asympt,
    Mc,
}

impl std::str::FromStr for SweepMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "exact" => Ok(SweepMethod::Exact),
            "asympt" => Ok(SweepMethod::Asympt),
            "mc" => Ok(SweepMethod::Mc),
            other => Err(format!(
                "unknown method '{other}' (expected exact, asympt or mc)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

/// Monte Carlo settings applied to every sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSweepSettings {
    pub chains: usize,
    /// Chain length in units of the expected decay length `1/γ`.
    pub decay_lengths: f64,
    pub step_max: f64,
    pub seed: u64,
}

impl Default for McSweepSettings {
    fn default() -> Self {
        Self {
            chains: 64,
            decay_lengths: 1e4,
            step_max: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub sign: Sign,
    pub nu_grid: Vec<f64>,
    pub omega: f64,
    pub methods: BTreeSet<SweepMethod>,
    pub output_path: Option<PathBuf>,
    pub mc: McSweepSettings,
    /// Worker threads; `None` uses the global pool.
    pub parallelism: Option<usize>,
}

/// `n` log-spaced points from `lo` to `hi`, both endpoints exact.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut v: Vec<f64> = (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect();
            v[0] = lo;
            v[n - 1] = hi;
            v
        }
    }
}

impl SweepSpec {
    pub fn new(
        sign: Sign,
        nu_grid: Vec<f64>,
        methods: impl IntoIterator<Item = SweepMethod>,
    ) -> Self {
        Self {
            sign,
            nu_grid,
            omega: 1.0,
            methods: methods.into_iter().collect(),
            output_path: None,
            mc: McSweepSettings::default(),
            parallelism: None,
        }
    }

    /// Sweep over `points` log-spaced values in `[nu_min, nu_max]`.
    pub fn log_spaced(
        sign: Sign,
        nu_min: f64,
        nu_max: f64,
        points: usize,
        methods: impl IntoIterator<Item = SweepMethod>,
    ) -> Result<Self, ReportError> {
        if !(nu_min > 0.0 && nu_min < nu_max && nu_max.is_finite()) {
            return Err(ReportError::InvalidSpec(format!(
                "need 0 < nu_min < nu_max, got [{nu_min}, {nu_max}]"
            )));
        }
        if points < 2 {
            return Err(ReportError::InvalidSpec(format!(
                "need at least 2 points, got {points}"
            )));
        }
        let spec = Self::new(sign, log_spaced(nu_min, nu_max, points), methods);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::InvalidSpec(m));
        if self.sign == Sign::Zero {
            return bad("sweeps need a nonzero energy sign".into());
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return bad(format!(
                "omega must be finite and positive, got {}",
                self.omega
            ));
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if self.nu_grid.iter().any(|nu| !(nu.is_finite() && *nu > 0.0)) {
            return bad("grid values must be finite and positive".into());
        }
        if self.nu_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("grid must be strictly increasing".into());
        }
        if self.parallelism == Some(0) {
            return bad("parallelism must be positive".into());
        }
        if self.methods.contains(&SweepMethod::Mc) && self.mc.chains < 2 {
            return bad("Monte Carlo needs at least 2 chains".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nu: f64,
    pub gamma_over_omega_exact: Option<f64>,
    pub gamma_over_omega_asympt: Option<f64>,
    pub gamma_over_omega_mc: Option<f64>,
    pub mc_std_error: Option<f64>,
    pub rel_err_exact_vs_asympt: Option<f64>,
    /// Failures of individual methods at this point.
    #[serde(skip)]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Largest `rel_err_exact_vs_asympt` over the rows, if every row has one.
    pub fn max_rel_err(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.rel_err_exact_vs_asympt)
            .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)))
    }
}

fn sweep_point(
    spec: &SweepSpec,
    index: usize,
    nu: f64,
    cfg: &ExactConfig,
    constants: &AsymptoticConstants,
) -> SweepRow {
    let mut row = SweepRow {
        nu,
        gamma_over_omega_exact: None,
        gamma_over_omega_asympt: None,
        gamma_over_omega_mc: None,
        mc_std_error: None,
        rel_err_exact_vs_asympt: None,
        errors: Vec::new(),
    };
    let point = match SpectralPoint::from_omega_nu(spec.omega, spec.sign, nu) {
        Ok(p) => p,
        Err(e) => {
            row.errors.push(e.to_string());
            return row;
        }
    };
    let omega = point.omega();
    if spec.methods.contains(&SweepMethod::Exact) {
        match gamma_exact(&point, cfg) {
            Ok(g) => row.gamma_over_omega_exact = Some(g.gamma / omega),
            Err(e) => row.errors.push(format!("exact: {e}")),
        }
    }
    if spec.methods.contains(&SweepMethod::Asympt) {
        row.gamma_over_omega_asympt =
            Some(gamma_asympt(&point, constants.c_small_nu).gamma / omega);
    }
    if spec.methods.contains(&SweepMethod::Mc) {
        let guess = row
            .gamma_over_omega_exact
            .or(row.gamma_over_omega_asympt)
            .unwrap_or_else(|| gamma_asympt(&point, constants.c_small_nu).gamma / omega)
            * omega;
        let mc = McConfig::new(point)
            .with_length(spec.mc.decay_lengths / guess)
            .with_chains(spec.mc.chains)
            .with_step_max(spec.mc.step_max)
            .with_seed(spec.mc.seed.wrapping_add(index as u64));
        match estimate_gamma_mc(&mc) {
            Ok(r) => {
                row.gamma_over_omega_mc = Some(r.gamma_hat / omega);
                row.mc_std_error = Some(r.std_error / omega);
            }
            Err(e) => row.errors.push(format!("mc: {e}")),
        }
    }
    if let (Some(e), Some(a)) = (row.gamma_over_omega_exact, row.gamma_over_omega_asympt) {
        row.rel_err_exact_vs_asympt = Some((e - a).abs() / e);
    }
    row
}

/// Evaluates every requested method at every grid point. Failures are
/// recorded in the row and the sweep continues; rows come back in grid
/// order whatever the completion order.
pub fn run_sweep(
    spec: &SweepSpec,
    cfg: &ExactConfig,
    constants: &AsymptoticConstants,
) -> Result<SweepTable, ReportError> {
    spec.validate()?;
    let work = || -> Vec<SweepRow> {
        spec.nu_grid
            .par_iter()
            .enumerate()
            .map(|(i, &nu)| sweep_point(spec, i, nu, cfg, constants))
            .collect()
    };
    let rows = match spec.parallelism {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ReportError::Pool(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(SweepTable { rows })
}

/// Twelve significant digits.
fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

fn round12(v: f64) -> f64 {
    fmt12(v).parse().expect("formatted float parses")
}

fn csv_field(v: Option<f64>) -> String {
    v.map(fmt12).unwrap_or_default()
}

/// Writes the table as CSV (header plus one line per row) or as a JSON
/// array of row objects. Values carry twelve significant digits in both
/// formats; missing values are empty CSV fields and JSON `null`.
pub fn write_table(
    table: &SweepTable,
    path: &Path,
    format: TableFormat,
) -> Result<(), ReportError> {
    let file = File::create(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_rows(table, BufWriter::new(file), format, path)
}

/// [`write_table`] to an arbitrary writer; `label` names it in errors.
pub fn write_table_to<W: Write>(
    table: &SweepTable,
    writer: W,
    format: TableFormat,
    label: &Path,
) -> Result<(), ReportError> {
    write_rows(table, writer, format, label)
}

fn write_rows<W: Write>(
    table: &SweepTable,
    writer: W,
    format: TableFormat,
    path: &Path,
) -> Result<(), ReportError> {
    let io_err = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            let csv_err = |source| ReportError::Csv {
                path: path.to_path_buf(),
                source,
            };
            w.write_record(COLUMNS).map_err(csv_err)?;
            for r in &table.rows {
                w.write_record([
                    fmt12(r.nu),
                    csv_field(r.gamma_over_omega_exact),
                    csv_field(r.gamma_over_omega_asympt),
                    csv_field(r.gamma_over_omega_mc),
                    csv_field(r.mc_std_error),
                    csv_field(r.rel_err_exact_vs_asympt),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(io_err)?;
        }
        TableFormat::Json => {
            let rounded: Vec<SweepRow> = table
                .rows
                .iter()
                .map(|r| SweepRow {
                    nu: round12(r.nu),
                    gamma_over_omega_exact: r.gamma_over_omega_exact.map(round12),
                    gamma_over_omega_asympt: r.gamma_over_omega_asympt.map(round12),
                    gamma_over_omega_mc: r.gamma_over_omega_mc.map(round12),
                    mc_std_error: r.mc_std_error.map(round12),
                    rel_err_exact_vs_asympt: r.rel_err_exact_vs_asympt.map(round12),
                    errors: Vec::new(),
                })
                .collect();
            let mut w = writer;
            serde_json::to_writer_pretty(&mut w, &rounded).map_err(|source| ReportError::Json {
                path: path.to_path_buf(),
                source,
            })?;
            w.write_all(b"\n").map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
    /// A computation failed, so the claim could not be checked.
    Indeterminate,
}

/// One accuracy claim: on `nu_range`, the asymptote matches the
/// exact exponent to within `threshold` relative error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationClaim {
    pub regime: String,
    pub sign: Sign,
    pub nu_range: (f64, f64),
    pub points: usize,
    pub threshold: f64,
}

impl ValidationClaim {
    pub fn new(regime: &str, sign: Sign, nu_range: (f64, f64), threshold: f64) -> Self {
        Self {
            regime: regime.to_string(),
            sign,
            nu_range,
            points: 8,
            threshold,
        }
    }
}

/// The four regime claims on their default eight-point log grids.
pub fn default_claims() -> Vec<ValidationClaim> {
    vec![
        ValidationClaim::new("small_nu_pos", Sign::Positive, (1e-4, 1e-3), 0.007),
        ValidationClaim::new("large_nu_pos", Sign::Positive, (6.0, 100.0), 0.004),
        ValidationClaim::new("small_nu_neg", Sign::Negative, (1e-4, 1e-3), 0.008),
        ValidationClaim::new("large_nu_neg", Sign::Negative, (40.0, 1000.0), 0.007),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub regime: String,
    pub sign: Sign,
    pub nu_range: (f64, f64),
    pub max_rel_err_observed: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub status: ClaimStatus,
    /// Grid point with the largest error.
    pub worst_nu: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub tol_scale: f64,
    pub note: String,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.status == ClaimStatus::Pass)
    }
}

/// Checks the four default claims at their nominal thresholds.
pub fn validate_default_claims(
    cfg: &ExactConfig,
    constants: &AsymptoticConstants,
) -> ValidationReport {
    validate_claims(&default_claims(), cfg, constants, 1.0, None)
}

/// Checks each claim with its threshold multiplied by `tol_scale`.
pub fn validate_claims(
    claims: &[ValidationClaim],
    cfg: &ExactConfig,
    constants: &AsymptoticConstants,
    tol_scale: f64,
    parallelism: Option<usize>,
) -> ValidationReport {
    let rows = claims
        .iter()
        .map(|claim| {
            let threshold = claim.threshold * tol_scale;
            let mut row = ValidationRow {
                regime: claim.regime.clone(),
                sign: claim.sign,
                nu_range: claim.nu_range,
                max_rel_err_observed: None,
                threshold,
                pass: false,
                status: ClaimStatus::Indeterminate,
                worst_nu: None,
                errors: Vec::new(),
            };
            let mut spec = SweepSpec::new(
                claim.sign,
                log_spaced(claim.nu_range.0, claim.nu_range.1, claim.points),
                [SweepMethod::Exact, SweepMethod::Asympt],
            );
            spec.parallelism = parallelism;
            let table = match run_sweep(&spec, cfg, constants) {
                Ok(t) => t,
                Err(e) => {
                    row.errors.push(e.to_string());
                    return row;
                }
            };
            row.errors = table
                .rows
                .iter()
                .flat_map(|r| r.errors.iter().cloned())
                .collect();
            if let Some(max) = table.max_rel_err() {
                row.max_rel_err_observed = Some(max);
                row.worst_nu = table
                    .rows
                    .iter()
                    .find(|r| r.rel_err_exact_vs_asympt == Some(max))
                    .map(|r| r.nu);
                row.pass = max <= threshold;
                row.status = if row.pass {
                    ClaimStatus::Pass
                } else {
                    ClaimStatus::Fail
                };
            }
            row
        })
        .collect();
    ValidationReport {
        rows,
        tol_scale,
        note: "each claim is checked on eight log-spaced points spanning its regime window".into(),
    }
}

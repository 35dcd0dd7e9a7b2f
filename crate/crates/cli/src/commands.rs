use std::io::{self, Write};
use std::path::Path;

use lyapunov_core::asympt::{constant_c, gamma_asympt, gamma_uniform, AsymptoticConstants};
use lyapunov_core::exact::{gamma_exact, ExactConfig};
use lyapunov_core::mc::{estimate_gamma_mc, McConfig, McError};
use lyapunov_core::model::{GammaEstimate, Method, SpectralPoint};
use lyapunov_core::quad::QuadSpec;
use lyapunov_core::report::{
    default_claims, run_sweep, validate_claims, write_table, write_table_to, ClaimStatus,
    McSweepSettings, ReportError, SweepMethod, SweepSpec, TableFormat,
};
use serde_json::{json, Value};

use crate::cli::{
    ConstantArgs, FormatArg, GammaArgs, GammaMethod, McArgs, SignArg, SweepArgs, SweepMethodArg,
    TextFormat, ValidateArgs,
};
use crate::CliError;

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && (1e-15..=1e-2).contains(&tol) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--tol must lie in [1e-15, 1e-2], got {tol}"
        )))
    }
}

fn constants(tol: f64) -> Result<AsymptoticConstants, CliError> {
    if tol == QuadSpec::default().rel_tol {
        return AsymptoticConstants::standard()
            .cloned()
            .map_err(CliError::compute);
    }
    AsymptoticConstants::compute(&QuadSpec::default().with_rel_tol(tol)).map_err(CliError::compute)
}

fn sign_factor(s: SignArg) -> f64 {
    match s {
        SignArg::Pos => 1.0,
        SignArg::Neg => -1.0,
    }
}

/// Resolves (λ, σ) from either parameterization.
fn resolve_point(a: &GammaArgs) -> Result<SpectralPoint, CliError> {
    let usage = |m: &str| Err(CliError::Usage(m.into()));
    let lambda = match (a.lambda, a.omega, a.sign) {
        (Some(l), None, None) => l,
        (None, Some(w), Some(s)) => {
            if !(w.is_finite() && w > 0.0) {
                return usage("--omega must be finite and positive");
            }
            sign_factor(s) * w * w
        }
        (None, Some(_), None) | (None, None, Some(_)) => {
            return usage("--omega and --sign go together")
        }
        (None, None, None) => return usage("give --lambda, or --omega with --sign"),
        _ => return usage("--lambda excludes --omega and --sign"),
    };
    let sigma = match (a.sigma, a.nu) {
        (Some(s), None) => s,
        (None, Some(nu)) => {
            if !(nu.is_finite() && nu > 0.0) {
                return usage("--nu must be finite and positive");
            }
            if lambda == 0.0 {
                return usage("--nu is undefined at lambda = 0; give --sigma");
            }
            let omega = lambda.abs().sqrt();
            (2.0 * omega.powi(3) / nu).sqrt()
        }
        (None, None) => return usage("give --sigma or --nu"),
        (Some(_), Some(_)) => return usage("--sigma excludes --nu"),
    };
    SpectralPoint::new(lambda, sigma).map_err(|e| CliError::Usage(e.to_string()))
}

fn point_json(p: &SpectralPoint) -> Value {
    json!({
        "lambda": p.lambda(),
        "sigma": p.sigma(),
        "omega": p.omega(),
        "nu": p.nu(),
        "sign": p.sign().to_string(),
    })
}

fn mc_error(e: McError) -> CliError {
    match e {
        McError::InvalidConfig(m) => CliError::Usage(m),
        other => CliError::compute(other),
    }
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

pub fn gamma(a: &GammaArgs) -> Result<Value, CliError> {
    check_tol(a.tol)?;
    let p = resolve_point(a)?;
    let cfg = ExactConfig::default().with_rel_tol(a.tol);
    let mut extra = json!({});
    let est: GammaEstimate = match a.method {
        GammaMethod::Exact => gamma_exact(&p, &cfg).map_err(CliError::compute)?,
        GammaMethod::Asympt => gamma_asympt(&p, constants(a.tol)?.c_small_nu),
        GammaMethod::Uniform => {
            gamma_uniform(&p, &cfg, constants(a.tol)?.c_small_nu).map_err(CliError::compute)?
        }
        GammaMethod::Mc => {
            let mut mc = McConfig::new(p)
                .with_chains(a.chains)
                .with_seed(a.seed)
                .with_step_max(a.step);
            if let Some(len) = a.length {
                mc = mc.with_length(len);
            }
            let r = estimate_gamma_mc(&mc).map_err(mc_error)?;
            extra = json!({
                "std_error": r.std_error,
                "chains_used": r.chains_used,
                "chains_failed": r.chains_failed,
                "resets_total": r.resets_total,
                "seed": a.seed,
            });
            GammaEstimate::new(&p, r.gamma_hat, Method::MonteCarlo, r.std_error)
        }
    };
    let out = json!({
        "gamma": est.gamma,
        "gamma_over_omega": est.gamma_over_omega,
        "method": est.method.to_string(),
        "sub_method": est.sub_method.map(|m| m.to_string()),
        "abs_error": est.abs_error,
    });
    Ok(merge(merge(point_json(&p), out), extra))
}

fn report_error(e: ReportError) -> CliError {
    match e {
        ReportError::InvalidSpec(m) => CliError::Usage(m),
        other => CliError::compute(other),
    }
}

/// Runs the sweep, writing the table to `--output` or to standard output.
/// Returns the summary to print (if any) and whether every point succeeded.
pub fn sweep(a: &SweepArgs, parallelism: Option<usize>) -> Result<(Option<Value>, bool), CliError> {
    check_tol(a.tol)?;
    let sign = match a.sign {
        SignArg::Pos => lyapunov_core::model::Sign::Positive,
        SignArg::Neg => lyapunov_core::model::Sign::Negative,
    };
    let methods = a.methods.iter().map(|m| match m {
        SweepMethodArg::Exact => SweepMethod::Exact,
        SweepMethodArg::Asympt => SweepMethod::Asympt,
        SweepMethodArg::Mc => SweepMethod::Mc,
    });
    let mut spec =
        SweepSpec::log_spaced(sign, a.nu_min, a.nu_max, a.points, methods).map_err(report_error)?;
    spec.omega = a.omega;
    spec.output_path = a.output.clone();
    spec.parallelism = parallelism;
    spec.mc = McSweepSettings {
        chains: a.chains,
        decay_lengths: a.decay_lengths,
        step_max: a.step,
        seed: a.seed,
    };
    spec.validate().map_err(report_error)?;
    if !(a.decay_lengths.is_finite() && a.decay_lengths > 0.0) {
        return Err(CliError::Usage(
            "--decay-lengths must be finite and positive".into(),
        ));
    }

    let cfg = ExactConfig::default().with_rel_tol(a.tol);
    let table = run_sweep(&spec, &cfg, &constants(a.tol)?).map_err(report_error)?;
    let format = match a.format {
        FormatArg::Csv => TableFormat::Csv,
        FormatArg::Json => TableFormat::Json,
    };
    let mut clean = true;
    for row in &table.rows {
        for e in &row.errors {
            clean = false;
            eprintln!("nu = {:e}: {e}", row.nu);
        }
    }
    let summary = match &spec.output_path {
        Some(path) => {
            write_table(&table, path, format).map_err(report_error)?;
            Some(json!({
                "output": path.display().to_string(),
                "rows": table.rows.len(),
                "max_rel_err_exact_vs_asympt": table.max_rel_err(),
            }))
        }
        None => {
            let stdout = io::stdout().lock();
            write_table_to(&table, stdout, format, Path::new("<stdout>")).map_err(report_error)?;
            None
        }
    };
    Ok((summary, clean))
}

pub enum ValidateOutcome {
    Pass,
    Fail,
    Indeterminate,
}

pub fn validate(
    a: &ValidateArgs,
    parallelism: Option<usize>,
) -> Result<(Value, ValidateOutcome), CliError> {
    check_tol(a.tol)?;
    if !(a.tol_scale.is_finite() && a.tol_scale > 0.0) {
        return Err(CliError::Usage(format!(
            "--tol-scale must be finite and positive, got {}",
            a.tol_scale
        )));
    }
    let cfg = ExactConfig::default().with_rel_tol(a.tol);
    let report = validate_claims(
        &default_claims(),
        &cfg,
        &constants(a.tol)?,
        a.tol_scale,
        parallelism,
    );
    let outcome = if report
        .rows
        .iter()
        .any(|r| r.status == ClaimStatus::Indeterminate)
    {
        ValidateOutcome::Indeterminate
    } else if report.all_pass() {
        ValidateOutcome::Pass
    } else {
        ValidateOutcome::Fail
    };
    let value = serde_json::to_value(&report).map_err(CliError::compute)?;
    Ok((value, outcome))
}

pub fn constant(a: &ConstantArgs, out: &mut impl Write) -> Result<(), CliError> {
    check_tol(a.tol)?;
    let c = constant_c(&QuadSpec::default().with_rel_tol(a.tol)).map_err(CliError::compute)?;
    let scaled = 2f64.cbrt() * c;
    let written = match a.format {
        TextFormat::Text => writeln!(out, "c = {c:.15}\n2^(1/3) c = {scaled:.15}"),
        TextFormat::Json => writeln!(
            out,
            "{}",
            json!({ "c": c, "two_cbrt_c": scaled, "tol": a.tol })
        ),
    };
    written.map_err(CliError::compute)
}

pub fn mc(a: &McArgs) -> Result<Value, CliError> {
    let p = SpectralPoint::new(a.lambda, a.sigma).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut cfg = McConfig::new(p)
        .with_chains(a.chains)
        .with_seed(a.seed)
        .with_step_max(a.step)
        .with_step_halvings(a.step_halvings)
        .with_z0(a.z0)
        .with_z_reset(a.z_reset);
    if let Some(len) = a.length {
        cfg = cfg.with_length(len);
    }
    if let Some(b) = a.burn_in {
        cfg = cfg.with_burn_in(b);
    }
    cfg.validate().map_err(mc_error)?;
    let r = estimate_gamma_mc(&cfg).map_err(mc_error)?;
    let result = serde_json::to_value(r).map_err(CliError::compute)?;
    let extra = json!({
        "gamma_over_omega": r.gamma_hat / p.omega(),
        "seed": a.seed,
        "chains": a.chains,
        "length": cfg.length,
        "step": a.step,
    });
    Ok(merge(merge(point_json(&p), result), extra))
}

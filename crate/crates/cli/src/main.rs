//! Command-line front end: reads a JSON job description, runs synthesis,
//! phase computation or verification, and writes the results under the
//! job's output directory.
//!
//! Exit codes: 0 success, 1 config/validation error (machine-readable JSON
//! on stderr), 2 failed verification checks.

mod config;
mod expr;
mod output;

use std::path::PathBuf;

use clap::Parser;
use serde::Serialize;

use blochsynth::dilation::{h_ab_numeric, h_ab_richardson, preparation_kick, VSource};
use blochsynth::phase::{gamma_closed_form, geometric_phase, parallel_alphas, PhaseResult};
use blochsynth::unitary::{h_general, pulse_decompose, AlphaGauge};
use blochsynth::verify::{
    run_report, AlphaChoice, Provenance, ReportJob, Synthesis, VerificationReport,
};
use blochsynth::{PathKind, PathSpec, SynthError, TimeGrid};

use config::{AlphaSetting, CliError, Command, Format, JobConfig};

/// Synthesize and verify qubit Hamiltonians for prescribed Bloch
/// trajectories.
#[derive(Parser)]
#[command(name = "blochsynth", version, about)]
struct Cli {
    /// Job description file (JSON).
    job: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli.job));
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

fn emit_error(err: &CliError) {
    let body = ErrorJson {
        error: ErrorBody {
            kind: err.kind(),
            message: err.message(),
        },
    };
    eprintln!("{}", serde_json::to_string(&body).unwrap());
}

fn run(job_file: &PathBuf) -> i32 {
    match execute(job_file) {
        Ok(code) => code,
        Err(err) => {
            emit_error(&err);
            1
        }
    }
}

fn execute(job_file: &PathBuf) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(job_file)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", job_file.display())))?;
    let cfg: JobConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("job file: {e}")))?;
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output.dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.output.dir.display())))?;

    match cfg.command {
        Command::SynthUnitary => synth_unitary(&cfg),
        Command::SynthOpen => synth_open(&cfg),
        Command::Geomphase => geomphase(&cfg),
        Command::Verify => verify(&cfg),
    }
}

fn provenance(cfg: &JobConfig, path: &PathSpec, grid: &TimeGrid, alpha_label: &str) -> Provenance {
    Provenance {
        path_family: path.family().to_string(),
        path_kind: path.kind().to_string(),
        gauge_alpha: alpha_label.into(),
        gauge_w: cfg.w_label(),
        grid_n: grid.n(),
        tau: grid.tau(),
        fd_step: cfg.fd_step.unwrap_or(path.fd_step()),
        step_policy: "midpoint-exponential".into(),
    }
}

/// Resolve the alpha setting into a concrete gauge (the parallel gauge needs
/// the path and grid).
fn resolve_alpha(
    setting: AlphaSetting,
    path: &PathSpec,
    grid: &TimeGrid,
) -> Result<AlphaGauge, CliError> {
    Ok(match setting {
        AlphaSetting::Zero => AlphaGauge::zero(),
        AlphaSetting::Exprs(g) => g,
        AlphaSetting::Parallel => parallel_alphas(path, grid)?,
    })
}

fn synth_unitary(cfg: &JobConfig) -> Result<i32, CliError> {
    let path = cfg.build_path()?;
    if path.kind() != PathKind::Unitary {
        return Err(CliError::Config(
            "synth-unitary requires a constant-radius trajectory; use synth-open".into(),
        ));
    }
    // fails fast for the maximally mixed initial state
    path.spectral_init()?;
    let grid = cfg.build_grid()?;
    let setting = cfg.build_alpha()?;
    let label = setting.label();
    let gauge = resolve_alpha(setting, &path, &grid)?;

    let mut rows = Vec::with_capacity(grid.points().len());
    for &t in grid.points() {
        let h = h_general(&path, &gauge, t)?;
        rows.push(output::H2Row {
            t,
            pulse: pulse_decompose(&h, t)?,
            herm_residual: h.herm_defect(),
            h,
        });
    }

    let prov = provenance(cfg, &path, &grid, label);
    let dir = &cfg.output.dir;
    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        written.push(output::write_h2_csv(dir, &rows)?);
        written.push(output::write_path_csv(dir, &path, &grid)?);
    }
    if cfg.wants(Format::Json) {
        written.push(output::write_h2_json(dir, &rows, &prov)?);
    }
    println!(
        "synth-unitary: {} Hamiltonian samples for {} ({} gauge) -> {}",
        rows.len(),
        prov.path_family,
        label,
        describe(&written)
    );
    Ok(0)
}

fn synth_open(cfg: &JobConfig) -> Result<i32, CliError> {
    let path = cfg.build_path()?;
    let grid = cfg.build_grid()?;
    let setting = cfg.build_alpha()?;
    let label = setting.label();
    let v = v_source(&path, &grid, setting)?;
    let w = cfg.build_w()?;
    let fd = cfg.fd_step.unwrap_or(1e-5 * path.tau());

    let mut rows = Vec::with_capacity(grid.points().len());
    for &t in grid.points() {
        let nh = if cfg.fd_richardson {
            h_ab_richardson(&path, &w, &v, t, fd)?
        } else {
            h_ab_numeric(&path, &w, &v, t, fd)?
        };
        rows.push(output::H4Row {
            t,
            h: nh.matrix,
            skew_defect: nh.skew_defect,
        });
    }
    let kick = preparation_kick(&path, &w, &v)?;

    let mut prov = provenance(cfg, &path, &grid, label);
    prov.fd_step = fd;
    let dir = &cfg.output.dir;
    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        written.push(output::write_h4_csv(dir, &rows)?);
        written.push(output::write_kick_csv(dir, &kick)?);
        written.push(output::write_path_csv(dir, &path, &grid)?);
    }
    if cfg.wants(Format::Json) {
        written.push(output::write_h4_json(dir, &rows, &prov)?);
        written.push(output::write_kick_json(dir, &kick, &prov)?);
    }
    println!(
        "synth-open: {} combined-system samples for {} (W = {}) -> {}",
        rows.len(),
        prov.path_family,
        prov.gauge_w,
        describe(&written)
    );
    Ok(0)
}

/// The automatic V rule: alpha-driven whenever the spectral decomposition
/// exists, identity for the maximally mixed start.
fn v_source(
    path: &PathSpec,
    grid: &TimeGrid,
    setting: AlphaSetting,
) -> Result<VSource, CliError> {
    match path.spectral_init() {
        Ok(init) => Ok(VSource::alpha(init, resolve_alpha(setting, path, grid)?)),
        Err(SynthError::DegenerateInitialState { .. }) => {
            if !matches!(setting, AlphaSetting::Zero) {
                return Err(CliError::Config(
                    "alpha gauges require r0 > 0; the maximally mixed start admits only v = auto (identity)"
                        .into(),
                ));
            }
            Ok(VSource::Identity)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct PhaseDump<'a> {
    #[serde(flatten)]
    result: &'a PhaseResult,
    /// Circle closed form, present when the job is a full-period circle.
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
    provenance: &'a Provenance,
}

fn geomphase(cfg: &JobConfig) -> Result<i32, CliError> {
    let path = cfg.build_path()?;
    if path.kind() != PathKind::Unitary {
        return Err(CliError::Config(
            "geomphase applies to constant-radius trajectories".into(),
        ));
    }
    let init = path.spectral_init()?;
    let grid = cfg.build_grid()?;
    let setting = cfg.build_alpha()?;
    let label = setting.label();
    let gauge = resolve_alpha(setting, &path, &grid)?;

    let result = geometric_phase(&path, &init, &gauge, &grid)?;
    let closed_form = match *path.family() {
        blochsynth::path::Family::Circle { r0, theta0, omega }
            if (path.tau() - std::f64::consts::TAU / omega).abs() < 1e-9 =>
        {
            Some(gamma_closed_form(r0, theta0))
        }
        _ => None,
    };

    let prov = provenance(cfg, &path, &grid, label);
    output::write_json(
        &cfg.output.dir,
        "phase.json",
        &PhaseDump {
            result: &result,
            closed_form,
            provenance: &prov,
        },
    )?;
    match closed_form {
        Some(cf) => println!(
            "gamma = {:.10} rad (closed form {:.10}, difference {:.3e})",
            result.gamma,
            cf,
            (result.gamma - cf).abs()
        ),
        None => println!("gamma = {:.10} rad", result.gamma),
    }
    if result.branch_warning {
        println!("warning: gamma lies near the ±pi branch cut");
    }
    Ok(0)
}

fn verify(cfg: &JobConfig) -> Result<i32, CliError> {
    // Domain failures during construction are verification results, not
    // config errors: report them and exit 2.
    let built = (|| -> Result<(PathSpec, TimeGrid, AlphaChoice, _), CliError> {
        let path = cfg.build_path()?;
        let grid = cfg.build_grid()?;
        let alpha = match cfg.build_alpha()? {
            AlphaSetting::Zero => AlphaChoice::Zero,
            AlphaSetting::Parallel => AlphaChoice::Parallel,
            AlphaSetting::Exprs(g) => AlphaChoice::Custom(g),
        };
        let w = cfg.build_w()?;
        Ok((path, grid, alpha, w))
    })();

    let report = match built {
        Ok((path, grid, alpha, w)) => {
            let synthesis = match path.kind() {
                PathKind::Unitary => Synthesis::Unitary,
                PathKind::Open => Synthesis::Open,
            };
            let job = ReportJob {
                synthesis,
                alpha,
                w: Some(w),
                grid,
                fd_step: cfg.fd_step,
                fd_richardson: cfg.fd_richardson,
                sigma_x_injection: None,
            };
            run_report(&path, &job)
        }
        Err(CliError::Synth(e)) => {
            let family = match &cfg.path {
                config::PathConfig::Circle { .. } => "circle",
                config::PathConfig::Ellipse { .. } => "ellipse",
                config::PathConfig::Shrink { .. } => "shrink",
                config::PathConfig::Sampled { .. } => "sampled",
            };
            VerificationReport::from_failure(
                Provenance::minimal(family.into()),
                "construction",
                &e,
            )
        }
        Err(other) => return Err(other),
    };

    output::write_json(&cfg.output.dir, "report.json", &report)?;
    for check in &report.checks {
        match (check.residual, &check.error) {
            (Some(r), _) => println!(
                "{}: {} (residual {r:.3e}, tolerance {:.1e})",
                check.name,
                if check.pass { "pass" } else { "FAIL" },
                check.tolerance
            ),
            (None, Some(e)) => println!("{}: FAIL ({e})", check.name),
            (None, None) => println!("{}: FAIL", check.name),
        }
    }
    println!(
        "overall: {}",
        if report.overall_pass { "PASS" } else { "FAIL" }
    );
    Ok(if report.overall_pass { 0 } else { 2 })
}

fn describe(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

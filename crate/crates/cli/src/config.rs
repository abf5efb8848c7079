//! Job-file schema and construction of core objects from it.

use std::path::PathBuf;

use serde::Deserialize;

use blochsynth::dilation::WGauge;
use blochsynth::unitary::AlphaGauge;
use blochsynth::{PathSpec, SynthError, TimeGrid};

use crate::expr::TimeExpr;

/// Everything that can abort a CLI run, mapped to exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent job description (exit 1).
    Config(String),
    /// File-system failure (exit 1).
    Io(String),
    /// Domain error from the synthesis library; the `verify` command turns
    /// these into failed report entries (exit 2), other commands exit 1.
    Synth(SynthError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Io(_) => "IoError",
            CliError::Synth(e) => e.kind(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Io(m) => m.clone(),
            CliError::Synth(e) => e.to_string(),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> CliError {
        CliError::Synth(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub path: PathConfig,
    #[serde(default)]
    pub gauge: GaugeConfig,
    pub grid: GridConfig,
    pub output: OutputConfig,
    /// Override of the finite-difference step (absolute, in time units).
    #[serde(default)]
    pub fd_step: Option<f64>,
    /// Richardson-extrapolate the combined-system finite differences.
    #[serde(default)]
    pub fd_richardson: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SynthUnitary,
    SynthOpen,
    Geomphase,
    Verify,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathConfig {
    /// `θ = θ₀`, `φ = ωt`, constant `r₀`. Give exactly one of `theta0`
    /// (radians) or `cos_theta0`.
    Circle {
        r0: f64,
        #[serde(default)]
        theta0: Option<f64>,
        #[serde(default)]
        cos_theta0: Option<f64>,
        omega: f64,
    },
    /// `r_x² + 4 r_y² = 1` in the equatorial plane.
    Ellipse { omega: f64 },
    /// Polar-axis shrink with `r(t)` given as an expression in `t`.
    Shrink { r_expr: String },
    /// Table of `t,r,theta,phi` rows, spline interpolated.
    Sampled { csv_path: PathBuf },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    #[serde(default)]
    pub alpha1_expr: Option<String>,
    #[serde(default)]
    pub alpha2_expr: Option<String>,
    /// Use the dynamical-phase-cancelling gauge; excludes explicit alpha
    /// expressions.
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub w: WConfig,
    #[serde(default)]
    pub v: VConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum WConfig {
    #[default]
    Identity,
    /// `W(t) = exp(−i·angle(t)·n̂·σ/2)` — `SU(2)` by construction.
    Rotation { axis: [f64; 3], angle_expr: String },
}

/// The system-side gauge matrix is always derived automatically: alpha-driven
/// when `r₀ > 0`, identity for the maximally mixed start.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VConfig {
    #[default]
    Auto,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub tau: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Resolved alpha-gauge selection.
pub enum AlphaSetting {
    Zero,
    Parallel,
    Exprs(AlphaGauge),
}

impl AlphaSetting {
    pub fn label(&self) -> &'static str {
        match self {
            AlphaSetting::Zero => "zero",
            AlphaSetting::Parallel => "parallel",
            AlphaSetting::Exprs(_) => "expressions",
        }
    }
}

impl JobConfig {
    /// Structural validation beyond what serde enforces.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.gauge.parallel
            && (self.gauge.alpha1_expr.is_some() || self.gauge.alpha2_expr.is_some())
        {
            return Err(CliError::Config(
                "gauge.parallel = true forbids explicit alpha expressions".into(),
            ));
        }
        if self.output.formats.is_empty() {
            return Err(CliError::Config("output.formats must not be empty".into()));
        }
        if let PathConfig::Circle {
            theta0, cos_theta0, ..
        } = &self.path
        {
            match (theta0, cos_theta0) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Config(
                        "give exactly one of path.theta0 and path.cos_theta0".into(),
                    ))
                }
                (None, None) => {
                    return Err(CliError::Config(
                        "circle needs path.theta0 or path.cos_theta0".into(),
                    ))
                }
                _ => {}
            }
        }
        if self.command == Command::SynthOpen && self.gauge.parallel {
            return Err(CliError::Config(
                "the parallel gauge applies to unitary synthesis only".into(),
            ));
        }
        let VConfig::Auto = self.gauge.v; // the only supported V policy
        if !(self.grid.tau.is_finite() && self.grid.tau > 0.0) {
            return Err(CliError::Config(format!(
                "grid.tau = {} must be positive",
                self.grid.tau
            )));
        }
        Ok(())
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    /// Named constants available to expressions in this job.
    pub fn expr_params(&self) -> Vec<(&'static str, f64)> {
        let mut params = vec![("tau", self.grid.tau)];
        match &self.path {
            PathConfig::Circle {
                r0,
                theta0,
                cos_theta0,
                omega,
            } => {
                params.push(("omega", *omega));
                params.push(("r0", *r0));
                if let Some(th) = resolve_theta0(theta0, cos_theta0) {
                    params.push(("theta0", th));
                }
            }
            PathConfig::Ellipse { omega } => params.push(("omega", *omega)),
            PathConfig::Shrink { .. } | PathConfig::Sampled { .. } => {}
        }
        params
    }

    pub fn build_grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::new(self.grid.n, self.grid.tau)?)
    }

    pub fn build_path(&self) -> Result<PathSpec, CliError> {
        let tau = self.grid.tau;
        let mut path = match &self.path {
            PathConfig::Circle {
                r0,
                theta0,
                cos_theta0,
                omega,
            } => {
                let theta0 = resolve_theta0(theta0, cos_theta0).ok_or_else(|| {
                    CliError::Config("circle needs a valid theta0 or cos_theta0 in [-1, 1]".into())
                })?;
                PathSpec::family_circle(*r0, theta0, *omega, tau)?
            }
            PathConfig::Ellipse { omega } => PathSpec::family_ellipse(*omega, tau)?,
            PathConfig::Shrink { r_expr } => {
                let expr = TimeExpr::parse(r_expr, &self.expr_params())
                    .map_err(|e| CliError::Config(format!("path.r_expr: {e}")))?;
                PathSpec::family_shrink(move |t| expr.eval(t), None, tau)?
            }
            PathConfig::Sampled { csv_path } => {
                let file = std::fs::File::open(csv_path).map_err(|e| {
                    CliError::Io(format!("cannot open {}: {e}", csv_path.display()))
                })?;
                let path = PathSpec::family_sampled_csv(file)?;
                if (path.tau() - tau).abs() > 1e-9 * tau.max(1.0) {
                    return Err(CliError::Config(format!(
                        "grid.tau = {tau} does not match the sampled path duration {}",
                        path.tau()
                    )));
                }
                path
            }
        };
        if let Some(h) = self.fd_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(CliError::Config(format!("fd_step = {h} must be positive")));
            }
            path = path.with_fd_step(h);
        }
        Ok(path)
    }

    pub fn build_alpha(&self) -> Result<AlphaSetting, CliError> {
        if self.gauge.parallel {
            return Ok(AlphaSetting::Parallel);
        }
        if self.gauge.alpha1_expr.is_none() && self.gauge.alpha2_expr.is_none() {
            return Ok(AlphaSetting::Zero);
        }
        let params = self.expr_params();
        let compile = |src: &Option<String>, which: &str| -> Result<TimeExpr, CliError> {
            let src = src.as_deref().unwrap_or("0");
            TimeExpr::parse(src, &params)
                .map_err(|e| CliError::Config(format!("gauge.{which}: {e}")))
        };
        let a1 = compile(&self.gauge.alpha1_expr, "alpha1_expr")?;
        let a2 = compile(&self.gauge.alpha2_expr, "alpha2_expr")?;
        let gauge = AlphaGauge::new(move |t| a1.eval(t), move |t| a2.eval(t))?;
        Ok(AlphaSetting::Exprs(gauge))
    }

    pub fn build_w(&self) -> Result<WGauge, CliError> {
        match &self.gauge.w {
            WConfig::Identity => Ok(WGauge::identity()),
            WConfig::Rotation { axis, angle_expr } => {
                let expr = TimeExpr::parse(angle_expr, &self.expr_params())
                    .map_err(|e| CliError::Config(format!("gauge.w.rotation.angle_expr: {e}")))?;
                Ok(WGauge::rotation(*axis, move |t| expr.eval(t))?)
            }
        }
    }

    pub fn w_label(&self) -> String {
        match &self.gauge.w {
            WConfig::Identity => "identity".into(),
            WConfig::Rotation { axis, angle_expr } => {
                format!("rotation(axis=[{}, {}, {}], angle={angle_expr})", axis[0], axis[1], axis[2])
            }
        }
    }
}

fn resolve_theta0(theta0: &Option<f64>, cos_theta0: &Option<f64>) -> Option<f64> {
    match (theta0, cos_theta0) {
        (Some(th), None) => Some(*th),
        (None, Some(ct)) if (-1.0..=1.0).contains(ct) => Some(ct.acos()),
        _ => None,
    }
}

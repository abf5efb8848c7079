//! Prescribed Bloch trajectories.
//!
//! A [`PathSpec`] holds the three coordinate functions `r(t)`, `θ(t)`, `φ(t)`
//! on `[0, τ]`, optionally with analytic derivatives, and knows whether it
//! describes a unitary (constant `r`) or open (variable `r`) evolution. The
//! azimuth is stored *unwrapped* — continuous and free to leave `[0, 2π]` —
//! because the synthesis formulas consume `φ̇` and cumulative integrals of it,
//! which wrap-around jumps would corrupt.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::SynthError;
use crate::linalg::CMat2;
use crate::spline::CubicSpline;
use crate::tol;

pub(crate) type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Whether the trajectory preserves the Bloch radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    /// `r(t) ≡ r(0)`: realizable by a one-qubit Hamiltonian.
    Unitary,
    /// `r` varies: realizable on the system ⊗ ancilla extension only.
    Open,
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::Unitary => write!(f, "unitary"),
            PathKind::Open => write!(f, "open"),
        }
    }
}

/// Built-in trajectory families (kept for provenance and for checks that
/// only apply to a specific family).
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Circle { r0: f64, theta0: f64, omega: f64 },
    Ellipse { omega: f64 },
    Shrink,
    Sampled,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Circle { r0, theta0, omega } => {
                write!(f, "circle(r0={r0}, theta0={theta0}, omega={omega})")
            }
            Family::Ellipse { omega } => write!(f, "ellipse(omega={omega})"),
            Family::Shrink => write!(f, "shrink"),
            Family::Sampled => write!(f, "sampled"),
            Family::Custom => write!(f, "custom"),
        }
    }
}

#[derive(Clone)]
struct AnalyticDerivatives {
    r: TimeFn,
    theta: TimeFn,
    phi: TimeFn,
}

/// A prescribed trajectory `(r(t), θ(t), φ(t))` on `[0, τ]`.
#[derive(Clone)]
pub struct PathSpec {
    r: TimeFn,
    theta: TimeFn,
    phi: TimeFn,
    tau: f64,
    derivatives: Option<AnalyticDerivatives>,
    kind: PathKind,
    fd_step: f64,
    family: Family,
}

/// One row of a sampled trajectory table.
#[derive(Clone, Copy, Debug)]
pub struct PathSample {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

const VALIDATION_SAMPLES: usize = 256;

impl PathSpec {
    /// Custom trajectory from closures. Coordinates are validated on a
    /// uniform sample of `[0, τ]`; a path declared [`PathKind::Unitary`]
    /// must hold `r` constant to within [`tol::CONSTANT_R_TOL`].
    pub fn new(
        r: impl Fn(f64) -> f64 + Send + Sync + 'static,
        theta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tau: f64,
        kind: PathKind,
    ) -> Result<PathSpec, SynthError> {
        let path = PathSpec {
            r: Arc::new(r),
            theta: Arc::new(theta),
            phi: Arc::new(phi),
            tau,
            derivatives: None,
            kind,
            fd_step: tol::FD_STEP_FRACTION * tau,
            family: Family::Custom,
        };
        path.validate()?;
        Ok(path)
    }

    /// Attach analytic derivatives `(ṙ, θ̇, φ̇)`.
    pub fn with_derivatives(
        mut self,
        r_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        theta_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> PathSpec {
        self.derivatives = Some(AnalyticDerivatives {
            r: Arc::new(r_dot),
            theta: Arc::new(theta_dot),
            phi: Arc::new(phi_dot),
        });
        self
    }

    /// Override the default finite-difference step `τ·1e-6`.
    pub fn with_fd_step(mut self, h: f64) -> PathSpec {
        assert!(h > 0.0 && h.is_finite(), "fd step must be positive");
        self.fd_step = h;
        self
    }

    /// Circle at constant polar angle: `θ = θ₀`, `φ = ωt`, `r = r₀`, with
    /// `φ₀ = 0`. Unitary.
    pub fn family_circle(r0: f64, theta0: f64, omega: f64, tau: f64) -> Result<PathSpec, SynthError> {
        if !(0.0..=1.0).contains(&r0) {
            return Err(SynthError::InvalidFamilyParameter(format!(
                "circle r0 = {r0} outside [0, 1]"
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta0) {
            return Err(SynthError::InvalidFamilyParameter(format!(
                "circle theta0 = {theta0} outside [0, pi]"
            )));
        }
        if !omega.is_finite() {
            return Err(SynthError::InvalidFamilyParameter("circle omega must be finite".into()));
        }
        let mut path = PathSpec::new(
            move |_| r0,
            move |_| theta0,
            move |t| omega * t,
            tau,
            PathKind::Unitary,
        )?
        .with_derivatives(|_| 0.0, |_| 0.0, move |_| omega);
        path.family = Family::Circle { r0, theta0, omega };
        Ok(path)
    }

    /// Equatorial ellipse `r_x² + 4 r_y² = 1`:
    /// `r = (cos²ωt + 4 sin²ωt)^{-1/2}`, `θ = π/2`, `φ = ωt`. Open, starts
    /// pure at `(1, 0, 0)`.
    pub fn family_ellipse(omega: f64, tau: f64) -> Result<PathSpec, SynthError> {
        if !omega.is_finite() || omega == 0.0 {
            return Err(SynthError::InvalidFamilyParameter(
                "ellipse omega must be finite and nonzero".into(),
            ));
        }
        let r = move |t: f64| {
            let s = (omega * t).sin();
            (1.0 + 3.0 * s * s).powf(-0.5)
        };
        let r_dot = move |t: f64| {
            let s = (omega * t).sin();
            -1.5 * omega * (2.0 * omega * t).sin() * (1.0 + 3.0 * s * s).powf(-1.5)
        };
        let mut path = PathSpec::new(
            r,
            |_| std::f64::consts::FRAC_PI_2,
            move |t| omega * t,
            tau,
            PathKind::Open,
        )?
        .with_derivatives(r_dot, |_| 0.0, move |_| omega);
        path.family = Family::Ellipse { omega };
        Ok(path)
    }

    /// Pure shrinking along the polar axis: `θ = φ = 0`, `r` prescribed with
    /// `r(0) = 1` and `ṙ ≤ 0`. A path that starts exactly at the pole must
    /// leave it with zero radial speed, otherwise the combined-system
    /// Hamiltonian diverges at `t = 0`.
    pub fn family_shrink(
        r: impl Fn(f64) -> f64 + Send + Sync + 'static,
        r_dot: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
        tau: f64,
    ) -> Result<PathSpec, SynthError> {
        let mut path = PathSpec::new(r, |_| 0.0, |_| 0.0, tau, PathKind::Open)?;
        if let Some(rd) = r_dot {
            path.derivatives = Some(AnalyticDerivatives {
                r: Arc::from(rd),
                theta: Arc::new(|_| 0.0),
                phi: Arc::new(|_| 0.0),
            });
        }
        path.family = Family::Shrink;

        let r0 = path.r(0.0);
        if (r0 - 1.0).abs() > tol::CONSTANT_R_TOL {
            return Err(SynthError::InvalidFamilyParameter(format!(
                "shrink path must start at the pole: r(0) = {r0}"
            )));
        }
        let (rdot0, _, _) = path.derivatives_at(0.0, path.fd_step);
        if rdot0.abs() > tol::SHRINK_START_SLOPE_TOL {
            return Err(SynthError::SingularShrinkStart { rdot: rdot0 });
        }
        for i in 0..=VALIDATION_SAMPLES {
            let t = tau * i as f64 / VALIDATION_SAMPLES as f64;
            let (rdot, _, _) = path.derivatives_at(t, path.fd_step);
            if rdot > 1e-10 {
                return Err(SynthError::InvalidFamilyParameter(format!(
                    "shrink path must be nonincreasing: r_dot({t}) = {rdot:.3e}"
                )));
            }
        }
        Ok(path)
    }

    /// Trajectory interpolated from a sample table by natural cubic splines.
    /// `r` and `θ` are clamped to their valid ranges on evaluation (the
    /// interpolant may overshoot by its approximation error near extremes);
    /// derivative queries use the spline derivative.
    pub fn family_sampled(samples: &[PathSample]) -> Result<PathSpec, SynthError> {
        if samples.len() < 2 {
            return Err(SynthError::SampledPath("need at least two rows".into()));
        }
        if samples[0].t != 0.0 {
            return Err(SynthError::SampledPath(format!(
                "first row must have t = 0, got {}",
                samples[0].t
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(0.0 - tol::RANGE_SLACK..=1.0 + tol::RANGE_SLACK).contains(&s.r) {
                return Err(SynthError::SampledPath(format!("row {i}: r = {} outside [0, 1]", s.r)));
            }
            if !(-tol::RANGE_SLACK..=std::f64::consts::PI + tol::RANGE_SLACK).contains(&s.theta) {
                return Err(SynthError::SampledPath(format!(
                    "row {i}: theta = {} outside [0, pi]",
                    s.theta
                )));
            }
            if ![s.t, s.r, s.theta, s.phi].iter().all(|v| v.is_finite()) {
                return Err(SynthError::SampledPath(format!("row {i}: non-finite value")));
            }
        }
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let mk = |ys: Vec<f64>| CubicSpline::new(ts.clone(), ys).map_err(SynthError::SampledPath);
        let sr = mk(samples.iter().map(|s| s.r).collect())?;
        let st = mk(samples.iter().map(|s| s.theta).collect())?;
        let sp = mk(samples.iter().map(|s| s.phi).collect())?;
        let tau = *ts.last().unwrap();

        let r0 = samples[0].r;
        let kind = if samples.iter().all(|s| (s.r - r0).abs() <= tol::CONSTANT_R_TOL) {
            PathKind::Unitary
        } else {
            PathKind::Open
        };

        let (srd, std_, spd) = (sr.clone(), st.clone(), sp.clone());
        let mut path = PathSpec::new(
            move |t| sr.value(t).clamp(0.0, 1.0),
            move |t| st.value(t).clamp(0.0, std::f64::consts::PI),
            move |t| sp.value(t),
            tau,
            kind,
        )?
        .with_derivatives(
            move |t| srd.derivative(t),
            move |t| std_.derivative(t),
            move |t| spd.derivative(t),
        );
        path.family = Family::Sampled;
        Ok(path)
    }

    /// Sampled trajectory from CSV with header `t,r,theta,phi`, strictly
    /// increasing `t`, first row at `t = 0`.
    pub fn family_sampled_csv(reader: impl std::io::Read) -> Result<PathSpec, SynthError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| SynthError::SampledPath(format!("csv header: {e}")))?;
        let expect = ["t", "r", "theta", "phi"];
        let got: Vec<&str> = headers.iter().collect();
        if got != expect {
            return Err(SynthError::SampledPath(format!(
                "csv header must be `t,r,theta,phi`, got `{}`",
                got.join(",")
            )));
        }
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| SynthError::SampledPath(format!("row {i}: {e}")))?;
            let parse = |j: usize| -> Result<f64, SynthError> {
                rec.get(j)
                    .ok_or_else(|| SynthError::SampledPath(format!("row {i}: missing column {j}")))?
                    .parse::<f64>()
                    .map_err(|e| SynthError::SampledPath(format!("row {i}: {e}")))
            };
            samples.push(PathSample {
                t: parse(0)?,
                r: parse(1)?,
                theta: parse(2)?,
                phi: parse(3)?,
            });
        }
        PathSpec::family_sampled(&samples)
    }

    fn validate(&self) -> Result<(), SynthError> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(SynthError::InvalidFamilyParameter(format!(
                "tau = {} must be positive and finite",
                self.tau
            )));
        }
        let r0 = self.r(0.0);
        for i in 0..=VALIDATION_SAMPLES {
            let t = self.tau * i as f64 / VALIDATION_SAMPLES as f64;
            let (r, th) = (self.r(t), self.theta(t));
            if !r.is_finite() || !th.is_finite() || !self.phi(t).is_finite() {
                return Err(SynthError::InvalidFamilyParameter(format!(
                    "non-finite coordinate at t = {t}"
                )));
            }
            if !(-tol::RANGE_SLACK..=1.0 + tol::RANGE_SLACK).contains(&r) {
                return Err(SynthError::InvalidFamilyParameter(format!(
                    "r({t}) = {r} outside [0, 1]"
                )));
            }
            if !(-tol::RANGE_SLACK..=std::f64::consts::PI + tol::RANGE_SLACK).contains(&th) {
                return Err(SynthError::InvalidFamilyParameter(format!(
                    "theta({t}) = {th} outside [0, pi]"
                )));
            }
            if self.kind == PathKind::Unitary && (r - r0).abs() > tol::CONSTANT_R_TOL {
                return Err(SynthError::InvalidFamilyParameter(format!(
                    "path declared unitary but r({t}) - r(0) = {:.3e}",
                    r - r0
                )));
            }
        }
        Ok(())
    }

    pub fn r(&self, t: f64) -> f64 {
        (self.r)(t)
    }

    pub fn theta(&self, t: f64) -> f64 {
        (self.theta)(t)
    }

    pub fn phi(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    fn check_domain(&self, t: f64) -> Result<(), SynthError> {
        let slack = tol::RANGE_SLACK * self.tau.max(1.0);
        if !t.is_finite() || t < -slack || t > self.tau + slack {
            return Err(SynthError::DomainError { t, tau: self.tau });
        }
        Ok(())
    }

    /// The density matrix
    /// `ρ(t) = ½ [[1 + r cosθ, r sinθ e^{-iφ}], [r sinθ e^{iφ}, 1 − r cosθ]]`.
    pub fn rho_at(&self, t: f64) -> Result<CMat2, SynthError> {
        self.check_domain(t)?;
        let (r, th, ph) = (self.r(t), self.theta(t), self.phi(t));
        Ok(bloch_rho(r, th, ph))
    }

    /// The initial state `ρ(0)`.
    pub fn rho0(&self) -> CMat2 {
        bloch_rho(self.r(0.0), self.theta(0.0), self.phi(0.0))
    }

    /// Coordinate derivatives `(ṙ, θ̇, φ̇)` at `t`: analytic when attached,
    /// otherwise central differences with step `h` (one-sided second-order
    /// stencils at the domain endpoints).
    pub fn derivatives_at(&self, t: f64, h: f64) -> (f64, f64, f64) {
        if let Some(d) = &self.derivatives {
            return ((d.r)(t), (d.theta)(t), (d.phi)(t));
        }
        (
            fd_derivative(&*self.r, t, h, 0.0, self.tau),
            fd_derivative(&*self.theta, t, h, 0.0, self.tau),
            fd_derivative(&*self.phi, t, h, 0.0, self.tau),
        )
    }

    /// [`Self::derivatives_at`] with the path's default step.
    pub fn derivatives(&self, t: f64) -> (f64, f64, f64) {
        self.derivatives_at(t, self.fd_step)
    }

    /// Orthogonal decomposition `ρ(0) = w₁ ρ₁(0) + w₂ ρ₂(0)` into the
    /// projectors along `±n̂₀`. Unique only for `r₀ > 0`.
    pub fn spectral_init(&self) -> Result<SpectralInit, SynthError> {
        let r0 = self.r(0.0);
        if r0 <= tol::DEGENERATE_R0_TOL {
            return Err(SynthError::DegenerateInitialState { r0 });
        }
        let (th0, ph0) = (self.theta(0.0), self.phi(0.0));
        Ok(SpectralInit {
            w1: 0.5 * (1.0 + r0),
            w2: 0.5 * (1.0 - r0),
            rho1_0: bloch_rho(1.0, th0, ph0),
            rho2_0: bloch_rho(-1.0, th0, ph0),
            delta: (1.0, -1.0),
            r0,
        })
    }
}

impl fmt::Debug for PathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathSpec")
            .field("family", &self.family)
            .field("kind", &self.kind)
            .field("tau", &self.tau)
            .field("fd_step", &self.fd_step)
            .field("analytic_derivatives", &self.derivatives.is_some())
            .finish()
    }
}

/// `½ (I + r n̂·σ)` at polar angle `th`, azimuth `ph`. `r` may carry the sign
/// of the axis direction (`r = ±1` gives the two spectral projectors).
fn bloch_rho(r: f64, th: f64, ph: f64) -> CMat2 {
    let off = C64::from_polar(0.5 * r * th.sin(), -ph);
    CMat2([
        [C64::new(0.5 * (1.0 + r * th.cos()), 0.0), off],
        [off.conj(), C64::new(0.5 * (1.0 - r * th.cos()), 0.0)],
    ])
}

/// Weights and projectors of the orthogonal decomposition of `ρ(0)`.
#[derive(Clone, Debug)]
pub struct SpectralInit {
    pub w1: f64,
    pub w2: f64,
    pub rho1_0: CMat2,
    pub rho2_0: CMat2,
    /// Signs of the two projector axes.
    pub delta: (f64, f64),
    pub r0: f64,
}

impl SpectralInit {
    pub fn weight(&self, k: usize) -> f64 {
        match k {
            1 => self.w1,
            2 => self.w2,
            _ => panic!("k must be 1 or 2"),
        }
    }

    pub fn projector(&self, k: usize) -> &CMat2 {
        match k {
            1 => &self.rho1_0,
            2 => &self.rho2_0,
            _ => panic!("k must be 1 or 2"),
        }
    }
}

/// Uniform partition of `[0, τ]` into `n` steps (`n + 1` nodes). `n` is
/// rounded up to the next even value so that composite Simpson sums and
/// midpoint stepping share one grid.
#[derive(Clone, Debug)]
pub struct TimeGrid {
    n: usize,
    tau: f64,
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(n: usize, tau: f64) -> Result<TimeGrid, SynthError> {
        if n == 0 {
            return Err(SynthError::InvalidGrid("need at least one step".into()));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(SynthError::InvalidGrid(format!("tau = {tau} must be positive")));
        }
        let n = n + n % 2;
        let points = (0..=n).map(|i| tau * i as f64 / n as f64).collect();
        Ok(TimeGrid { n, tau, points })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step(&self) -> f64 {
        self.tau / self.n as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Bloch vector `(tr ρσ_x, tr ρσ_y, tr ρσ_z)` of a 2x2 Hermitian matrix.
pub fn bloch_vector(rho: &CMat2) -> [f64; 3] {
    [
        2.0 * rho.0[0][1].re,
        -2.0 * rho.0[0][1].im,
        rho.0[0][0].re - rho.0[1][1].re,
    ]
}

/// Spherical Bloch coordinates `(r, θ, φ)` with `φ ∈ (−π, π]`; `φ` is zero
/// at the poles where the azimuth is undefined.
pub fn bloch_angles(rho: &CMat2) -> (f64, f64, f64) {
    let [x, y, z] = bloch_vector(rho);
    let r = (x * x + y * y + z * z).sqrt();
    if r < 1e-15 {
        return (r, 0.0, 0.0);
    }
    let theta = (z / r).clamp(-1.0, 1.0).acos();
    let phi = if x == 0.0 && y == 0.0 { 0.0 } else { y.atan2(x) };
    (r, theta, phi)
}

/// Central difference with second-order one-sided stencils at the `[lo, hi]`
/// endpoints.
pub(crate) fn fd_derivative(f: &dyn Fn(f64) -> f64, t: f64, h: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(h > 0.0);
    if t - h < lo {
        (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h)
    } else if t + h > hi {
        (3.0 * f(t) - 4.0 * f(t - h) + f(t - 2.0 * h)) / (2.0 * h)
    } else {
        (f(t + h) - f(t - h)) / (2.0 * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_distance;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rho_at_trivial_points() {
        let north = PathSpec::new(|_| 1.0, |_| 0.0, |_| 0.3, 1.0, PathKind::Unitary).unwrap();
        let rho = north.rho_at(0.5).unwrap();
        assert!((rho - CMat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]])).fro_norm() < 1e-15);

        let mixed = PathSpec::new(|_| 0.0, |_| 1.0, |_| 2.0, 1.0, PathKind::Unitary).unwrap();
        let rho = mixed.rho_at(0.2).unwrap();
        assert!((rho - CMat2::IDENTITY * 0.5).fro_norm() < 1e-15);

        let equator = PathSpec::new(|_| 1.0, |_| FRAC_PI_2, |_| 0.0, 1.0, PathKind::Unitary).unwrap();
        let rho = equator.rho_at(0.0).unwrap();
        let expect = CMat2([[c(0.5, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.5, 0.0)]]);
        assert!((rho - expect).fro_norm() < 1e-15);
    }

    #[test]
    fn rho0_circle_family_value() {
        let theta0 = (2.0f64 / 3.0).acos();
        let path = PathSpec::family_circle(0.5, theta0, 1.0, 1.0).unwrap();
        let rho = path.rho0();
        let s5 = 5.0f64.sqrt();
        assert!((rho.0[0][0].re - 0.5 * (1.0 + 1.0 / 3.0)).abs() < 1e-15);
        assert!((rho.0[1][1].re - 0.5 * (1.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert!((rho.0[0][1] - c(0.5 * 0.5 * s5 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rho_at_rejects_out_of_domain() {
        let path = PathSpec::family_circle(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(path.rho_at(1.5), Err(SynthError::DomainError { .. })));
        assert!(matches!(path.rho_at(-0.5), Err(SynthError::DomainError { .. })));
    }

    #[test]
    fn derivatives_analytic_and_fd() {
        let omega = 2.7;
        let path = PathSpec::family_circle(0.8, 1.1, omega, 1.0).unwrap();
        let (_, _, phid) = path.derivatives(0.3);
        assert_eq!(phid, omega);

        // same path without analytic derivatives: linear phi is exact under
        // central differences
        let fd = PathSpec::new(|_| 0.8, |_| 1.1, move |t| omega * t, 1.0, PathKind::Unitary).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let (_, _, phid) = fd.derivatives_at(t, 1e-4);
            assert!((phid - omega).abs() < 1e-10, "t={t} phid={phid}");
        }

        // sin path against the analytic cosine
        let fd = PathSpec::new(|_| 0.8, |t| 0.5 + t.sin().abs() * 0.0 + t.sin() * 0.3, |_| 0.0, 1.0, PathKind::Unitary).unwrap();
        let (_, thd, _) = fd.derivatives_at(0.3, 1e-4);
        assert!((thd - 0.3 * (0.3f64).cos()).abs() < 1e-8);
    }

    #[test]
    fn spectral_init_polar_and_equatorial() {
        let path = PathSpec::new(|_| 0.5, |_| 0.0, |_| 0.0, 1.0, PathKind::Unitary).unwrap();
        let init = path.spectral_init().unwrap();
        assert_eq!((init.w1, init.w2), (0.75, 0.25));
        assert!((init.rho1_0.0[0][0].re - 1.0).abs() < 1e-15);
        assert!((init.rho2_0.0[1][1].re - 1.0).abs() < 1e-15);

        let path = PathSpec::new(|_| 1.0, |_| FRAC_PI_2, |_| 0.0, 1.0, PathKind::Unitary).unwrap();
        let init = path.spectral_init().unwrap();
        assert_eq!((init.w1, init.w2), (1.0, 0.0));
        let plus = CMat2([[c(0.5, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.5, 0.0)]]);
        let minus = CMat2([[c(0.5, 0.0), c(-0.5, 0.0)], [c(-0.5, 0.0), c(0.5, 0.0)]]);
        assert!((init.rho1_0 - plus).fro_norm() < 1e-15);
        assert!((init.rho2_0 - minus).fro_norm() < 1e-15);
    }

    #[test]
    fn spectral_init_degenerate() {
        let path = PathSpec::family_circle(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            path.spectral_init(),
            Err(SynthError::DegenerateInitialState { .. })
        ));
    }

    #[test]
    fn circle_family_at_zero() {
        let theta0 = (2.0f64 / 3.0).acos();
        let path = PathSpec::family_circle(0.5, theta0, 1.0, 2.0 * PI).unwrap();
        assert_eq!(path.r(0.0), 0.5);
        assert_eq!(path.theta(0.0), theta0);
        assert_eq!(path.phi(0.0), 0.0);
        assert_eq!(path.kind(), PathKind::Unitary);
    }

    #[test]
    fn ellipse_family_radius_and_constraint() {
        let omega = 1.3;
        let path = PathSpec::family_ellipse(omega, 2.0 * PI / omega).unwrap();
        // quarter period: r = (0 + 4)^{-1/2} = 1/2
        let t_quarter = PI / (2.0 * omega);
        assert!((path.r(t_quarter) - 0.5).abs() < 1e-12);
        // r_x^2 + 4 r_y^2 = 1 along the whole path
        let grid = TimeGrid::new(200, path.tau()).unwrap();
        for &t in grid.points() {
            let (r, _, ph) = (path.r(t), path.theta(t), path.phi(t));
            let (rx, ry) = (r * ph.cos(), r * ph.sin());
            assert!((rx * rx + 4.0 * ry * ry - 1.0).abs() < 1e-12, "t = {t}");
        }
        // analytic r_dot against finite differences
        for &t in &[0.1, 0.7, 2.0] {
            let (rd, _, _) = path.derivatives(t);
            let num = fd_derivative(&|x| path.r(x), t, 1e-6, 0.0, path.tau());
            assert!((rd - num).abs() < 1e-7);
        }
    }

    #[test]
    fn shrink_family_smooth_start_ok_linear_start_rejected() {
        let path = PathSpec::family_shrink(|t| 1.0 - t * t, Some(Box::new(|t| -2.0 * t)), 0.9).unwrap();
        assert_eq!(path.r(0.0), 1.0);
        assert_eq!(path.derivatives(0.0).0, 0.0);
        assert_eq!(path.kind(), PathKind::Open);

        assert!(matches!(
            PathSpec::family_shrink(|t| 1.0 - t, None, 0.9),
            Err(SynthError::SingularShrinkStart { .. })
        ));
        // growing r is not a shrink
        assert!(matches!(
            PathSpec::family_shrink(|t| 1.0 - (t - 0.5) * (t - 0.5) + 0.25, None, 0.9),
            Err(SynthError::InvalidFamilyParameter(_))
        ));
    }

    #[test]
    fn unitary_declaration_requires_constant_r() {
        let err = PathSpec::new(|t| 0.5 + 0.1 * t, |_| 1.0, |_| 0.0, 1.0, PathKind::Unitary);
        assert!(matches!(err, Err(SynthError::InvalidFamilyParameter(_))));
    }

    #[test]
    fn sampled_family_round_trips_a_circle() {
        let omega = 1.0;
        let circle = PathSpec::family_circle(0.7, 1.2, omega, 2.0 * PI).unwrap();
        let grid = TimeGrid::new(400, circle.tau()).unwrap();
        let samples: Vec<PathSample> = grid
            .points()
            .iter()
            .map(|&t| PathSample {
                t,
                r: circle.r(t),
                theta: circle.theta(t),
                phi: circle.phi(t),
            })
            .collect();
        let sampled = PathSpec::family_sampled(&samples).unwrap();
        assert_eq!(sampled.kind(), PathKind::Unitary);
        for k in 0..100 {
            let t = circle.tau() * (k as f64 + 0.5) / 100.0;
            assert!((sampled.r(t) - 0.7).abs() < 1e-9);
            assert!((sampled.phi(t) - omega * t).abs() < 1e-9);
            let (_, _, phid) = sampled.derivatives(t);
            assert!((phid - omega).abs() < 1e-6);
        }
    }

    #[test]
    fn sampled_csv_parses_and_validates() {
        let good = "t,r,theta,phi\n0.0,1.0,0.5,0.0\n0.5,0.9,0.6,0.4\n1.0,0.8,0.7,0.9\n";
        let path = PathSpec::family_sampled_csv(good.as_bytes()).unwrap();
        assert_eq!(path.kind(), PathKind::Open);
        assert_eq!(path.tau(), 1.0);

        let bad_header = "time,r,theta,phi\n0,1,0,0\n1,1,0,0\n";
        assert!(PathSpec::family_sampled_csv(bad_header.as_bytes()).is_err());
        let bad_start = "t,r,theta,phi\n0.1,1,0,0\n1,1,0,0\n";
        assert!(PathSpec::family_sampled_csv(bad_start.as_bytes()).is_err());
        let bad_range = "t,r,theta,phi\n0,1.5,0,0\n1,1,0,0\n";
        assert!(PathSpec::family_sampled_csv(bad_range.as_bytes()).is_err());
        let not_increasing = "t,r,theta,phi\n0,1,0,0\n0,1,0,0\n";
        assert!(PathSpec::family_sampled_csv(not_increasing.as_bytes()).is_err());
    }

    #[test]
    fn grid_rounds_to_even_and_validates() {
        let g = TimeGrid::new(999, 2.0).unwrap();
        assert_eq!(g.n(), 1000);
        assert_eq!(g.points().len(), 1001);
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(*g.points().last().unwrap(), 2.0);
        assert!(TimeGrid::new(0, 1.0).is_err());
        assert!(TimeGrid::new(10, 0.0).is_err());
    }

    proptest! {
        /// rho_at always yields a valid density matrix.
        #[test]
        fn rho_is_a_density_matrix(r in 0.0f64..1.0, th in 0.0f64..PI, ph in -10.0f64..10.0, t in 0.0f64..1.0) {
            let path = PathSpec::new(move |_| r, move |_| th, move |x| ph * x, 1.0, PathKind::Unitary).unwrap();
            let rho = path.rho_at(t).unwrap();
            prop_assert!(rho.herm_defect() < 1e-13);
            prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-13);
            let [lo, _] = rho.eigvals_hermitian();
            prop_assert!(lo >= -1e-12);
        }

        /// Bloch round trip away from the poles.
        #[test]
        fn bloch_round_trip(r in 0.05f64..1.0, th in 0.05f64..3.0, ph in -3.0f64..3.0) {
            let path = PathSpec::new(move |_| r, move |_| th, move |_| ph, 1.0, PathKind::Unitary).unwrap();
            let (rr, tt, pp) = bloch_angles(&path.rho_at(0.4).unwrap());
            prop_assert!((rr - r).abs() < 1e-10);
            prop_assert!((tt - th).abs() < 1e-10);
            let dphi = (pp - ph).rem_euclid(2.0 * PI).min((ph - pp).rem_euclid(2.0 * PI));
            prop_assert!(dphi < 1e-10);
        }

        /// Reconstruction and orthogonality of the spectral decomposition.
        #[test]
        fn spectral_init_reconstructs(r0 in 0.01f64..1.0, th in 0.0f64..PI, ph in -3.0f64..3.0) {
            let path = PathSpec::new(move |_| r0, move |_| th, move |_| ph, 1.0, PathKind::Unitary).unwrap();
            let init = path.spectral_init().unwrap();
            prop_assert!((init.w1 + init.w2 - 1.0).abs() < 1e-15);
            let recon = init.rho1_0 * init.w1 + init.rho2_0 * init.w2;
            prop_assert!((recon - path.rho0()).fro_norm() < 1e-13);
            let idem1 = init.rho1_0 * init.rho1_0 - init.rho1_0;
            let idem2 = init.rho2_0 * init.rho2_0 - init.rho2_0;
            prop_assert!(idem1.fro_norm() < 1e-12);
            prop_assert!(idem2.fro_norm() < 1e-12);
            prop_assert!((init.rho1_0 * init.rho2_0).trace().norm() < 1e-12);
            let sum = init.rho1_0 + init.rho2_0 - CMat2::IDENTITY;
            prop_assert!(sum.fro_norm() < 1e-13);
            // orthogonal pure states are at trace distance 1
            prop_assert!((trace_distance(&init.rho1_0, &init.rho2_0).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

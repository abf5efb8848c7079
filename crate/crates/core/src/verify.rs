//! Independent verification by numerical propagation.
//!
//! Synthesized Hamiltonians are fed to a midpoint-exponential integrator
//! (`U_step = exp(−i H(t_mid) Δt)`, second order, structurally unitary) and
//! the resulting states are compared against the prescribed trajectory. The
//! integrator preserves positivity and unitarity exactly, so any residual it
//! reports is synthesis error plus `O(Δt²)` stepping error, never integrator
//! drift. [`run_report`] bundles the applicable identity, realization, gauge
//! and phase checks into a serializable [`VerificationReport`].

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dilation::{
    dilation_general, h_ab_numeric, h_ab_richardson, kraus_general, preparation_kick, shrink_h_ab,
    VSource, WGauge,
};
use crate::error::SynthError;
use crate::linalg::{kron, partial_trace_b, trace_distance, CMat2, CMat4, SIGMA_X};
use crate::path::{Family, PathKind, PathSpec, TimeGrid};
use crate::phase::{connection_k, geometric_phase, parallel_alphas, gamma_closed_form};
use crate::tol;
use crate::unitary::{h_general, h_numeric, u_general, AlphaGauge};

/// States and defect extrema produced by one propagation.
#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub grid: TimeGrid,
    /// Reduced (2x2) state at every grid node, starting with the initial one.
    pub states: Vec<CMat2>,
    /// Max trace distance to the reference path; `NaN` until
    /// [`Self::with_reference`] supplies one.
    pub max_trace_distance: f64,
    /// Max Hermiticity defect among the sampled Hamiltonians.
    pub max_hermiticity_defect: f64,
    /// Max unitarity defect among the step propagators.
    pub max_unitarity_defect: f64,
}

impl PropagationResult {
    /// Fill `max_trace_distance` against the prescribed path.
    pub fn with_reference(mut self, path: &PathSpec) -> Result<PropagationResult, SynthError> {
        let mut max = 0.0f64;
        for (state, &t) in self.states.iter().zip(self.grid.points()) {
            max = max.max(trace_distance(state, &path.rho_at(t)?)?);
        }
        self.max_trace_distance = max;
        Ok(self)
    }

    /// Max pointwise trace distance to another propagation on the same grid.
    pub fn max_distance_to(&self, other: &PropagationResult) -> Result<f64, SynthError> {
        let mut max = 0.0f64;
        for (a, b) in self.states.iter().zip(&other.states) {
            max = max.max(trace_distance(a, b)?);
        }
        Ok(max)
    }
}

/// Midpoint-exponential propagation of a 2x2 density matrix under `h_fn`.
/// Rejects non-Hermitian samples, naming the offending time.
pub fn propagate_closed(
    h_fn: &dyn Fn(f64) -> Result<CMat2, SynthError>,
    rho0: &CMat2,
    grid: &TimeGrid,
) -> Result<PropagationResult, SynthError> {
    crate::linalg::check_hermitian2(rho0, None)?;
    let dt = grid.step();
    let mut states = Vec::with_capacity(grid.points().len());
    let mut rho = *rho0;
    states.push(rho);
    let mut max_herm = 0.0f64;
    let mut max_unit = 0.0f64;
    for w in grid.points().windows(2) {
        let t_mid = 0.5 * (w[0] + w[1]);
        let h = h_fn(t_mid)?;
        let defect = h.herm_defect();
        if defect > tol::HERMITICITY_TOL * h.fro_norm().max(1.0) {
            return Err(SynthError::NonHermitianInput {
                defect,
                at: Some(t_mid),
            });
        }
        max_herm = max_herm.max(defect);
        let u = h.expm_skew(dt)?;
        max_unit = max_unit.max(u.unitarity_defect());
        rho = u * rho * u.dagger();
        states.push(rho);
    }
    Ok(PropagationResult {
        grid: grid.clone(),
        states,
        max_trace_distance: f64::NAN,
        max_hermiticity_defect: max_herm,
        max_unitarity_defect: max_unit,
    })
}

/// Midpoint-exponential propagation of the combined system: the initial
/// state is `kick · (ρ₀ ⊗ |0⟩⟨0|) · kick†`, and the reduced state is recorded
/// at every node.
pub fn propagate_combined(
    h_ab_fn: &dyn Fn(f64) -> Result<CMat4, SynthError>,
    kick: &CMat4,
    rho0: &CMat2,
    grid: &TimeGrid,
) -> Result<PropagationResult, SynthError> {
    crate::linalg::check_hermitian2(rho0, None)?;
    let kick_defect = kick.unitarity_defect();
    if kick_defect > tol::UNITARITY_TOL {
        return Err(SynthError::GaugeMismatch(format!(
            "preparation kick is not unitary: defect {kick_defect:.3e}"
        )));
    }
    let anc0 = CMat2([[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]]);
    let mut combined = *kick * kron(rho0, &anc0) * kick.dagger();
    let dt = grid.step();
    let mut states = Vec::with_capacity(grid.points().len());
    states.push(partial_trace_b(&combined));
    let mut max_herm = 0.0f64;
    let mut max_unit = 0.0f64;
    for w in grid.points().windows(2) {
        let t_mid = 0.5 * (w[0] + w[1]);
        let h = h_ab_fn(t_mid)?;
        let defect = h.herm_defect();
        if defect > tol::HERMITICITY_TOL * h.fro_norm().max(1.0) {
            return Err(SynthError::NonHermitianInput {
                defect,
                at: Some(t_mid),
            });
        }
        max_herm = max_herm.max(defect);
        let u = h.expm_skew(dt)?;
        max_unit = max_unit.max(u.unitarity_defect());
        combined = u * combined * u.dagger();
        states.push(partial_trace_b(&combined));
    }
    Ok(PropagationResult {
        grid: grid.clone(),
        states,
        max_trace_distance: f64::NAN,
        max_hermiticity_defect: max_herm,
        max_unitarity_defect: max_unit,
    })
}

/// One named check inside a report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Measured residual; absent when the check failed structurally.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Run parameters recorded alongside every report.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub path_family: String,
    pub path_kind: String,
    pub gauge_alpha: String,
    pub gauge_w: String,
    pub grid_n: usize,
    pub tau: f64,
    pub fd_step: f64,
    pub step_policy: String,
}

impl Provenance {
    /// Provenance for a job that failed before a path existed.
    pub fn minimal(path_family: String) -> Provenance {
        Provenance {
            path_family,
            path_kind: "unknown".into(),
            gauge_alpha: "unknown".into(),
            gauge_w: "unknown".into(),
            grid_n: 0,
            tau: f64::NAN,
            fd_step: f64::NAN,
            step_policy: "midpoint-exponential".into(),
        }
    }
}

/// Aggregated outcome of a verification battery.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub overall_pass: bool,
    pub provenance: Provenance,
}

impl VerificationReport {
    /// A report carrying a single structural failure (used when synthesis
    /// cannot even start, e.g. a rejected trajectory family).
    pub fn from_failure(provenance: Provenance, name: &str, err: &SynthError) -> VerificationReport {
        VerificationReport {
            checks: vec![CheckResult {
                name: name.into(),
                residual: None,
                tolerance: 0.0,
                pass: false,
                error: Some(format!("{}: {err}", err.kind())),
            }],
            overall_pass: false,
            provenance,
        }
    }
}

/// Which synthesis route the report exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Synthesis {
    Unitary,
    Open,
}

/// Alpha-gauge selection for a report run.
#[derive(Clone, Debug)]
pub enum AlphaChoice {
    Zero,
    Parallel,
    Custom(AlphaGauge),
}

impl AlphaChoice {
    fn label(&self) -> &'static str {
        match self {
            AlphaChoice::Zero => "zero",
            AlphaChoice::Parallel => "parallel",
            AlphaChoice::Custom(_) => "custom",
        }
    }
}

/// Configuration of one verification run.
#[derive(Debug)]
pub struct ReportJob {
    pub synthesis: Synthesis,
    pub alpha: AlphaChoice,
    /// Ancilla gauge (open synthesis only); identity when absent.
    pub w: Option<WGauge>,
    pub grid: TimeGrid,
    /// Override of the finite-difference step for `i U̇ U†` Hamiltonians.
    pub fd_step: Option<f64>,
    /// Richardson-extrapolate the 4x4 finite differences.
    pub fd_richardson: bool,
    /// Fault-injection diagnostic: adds `ε·σ_x` to the synthesized 2x2
    /// Hamiltonian before propagation, to confirm the realization check
    /// discriminates a corrupted synthesis. Unitary route only.
    pub sigma_x_injection: Option<f64>,
}

impl ReportJob {
    pub fn new(synthesis: Synthesis, grid: TimeGrid) -> ReportJob {
        ReportJob {
            synthesis,
            alpha: AlphaChoice::Zero,
            w: None,
            grid,
            fd_step: None,
            fd_richardson: false,
            sigma_x_injection: None,
        }
    }
}

struct Battery {
    checks: Vec<CheckResult>,
}

impl Battery {
    fn new() -> Battery {
        Battery { checks: Vec::new() }
    }

    /// Run one check; an `Err` becomes a failed entry instead of aborting
    /// the battery.
    fn check(
        &mut self,
        name: &str,
        tolerance: f64,
        body: impl FnOnce() -> Result<f64, SynthError>,
    ) -> bool {
        let entry = match body() {
            Ok(residual) => CheckResult {
                name: name.into(),
                residual: Some(residual),
                tolerance,
                pass: residual <= tolerance,
                error: None,
            },
            Err(e) => CheckResult {
                name: name.into(),
                residual: None,
                tolerance,
                pass: false,
                error: Some(format!("{}: {e}", e.kind())),
            },
        };
        let pass = entry.pass;
        self.checks.push(entry);
        pass
    }
}

/// Execute the verification battery applicable to `job.synthesis` and
/// aggregate the outcomes. Sub-check failures become failed entries; the
/// report itself is always produced.
pub fn run_report(path: &PathSpec, job: &ReportJob) -> VerificationReport {
    let mut path = path.clone();
    if let Some(h) = job.fd_step {
        path = path.with_fd_step(h);
    }
    let mut battery = Battery::new();
    match job.synthesis {
        Synthesis::Unitary => unitary_battery(&path, job, &mut battery),
        Synthesis::Open => open_battery(&path, job, &mut battery),
    }
    let overall_pass = battery.checks.iter().all(|c| c.pass);
    VerificationReport {
        checks: battery.checks,
        overall_pass,
        provenance: Provenance {
            path_family: path.family().to_string(),
            path_kind: path.kind().to_string(),
            gauge_alpha: job.alpha.label().into(),
            gauge_w: job
                .w
                .as_ref()
                .map(|w| w.label().to_string())
                .unwrap_or_else(|| "identity".into()),
            grid_n: job.grid.n(),
            tau: job.grid.tau(),
            fd_step: job.fd_step.unwrap_or(path.fd_step()),
            step_policy: "midpoint-exponential".into(),
        },
    }
}

/// A fixed smooth nontrivial gauge used as the comparison point of the
/// gauge-invariance checks.
fn comparison_gauge() -> AlphaGauge {
    AlphaGauge::with_derivatives(
        |t| 0.37 * (1.3 * t).sin(),
        |t| -0.23 * ((0.8 * t).cos() - 1.0),
        |t| 0.481 * (1.3 * t).cos(),
        |t| 0.184 * (0.8 * t).sin(),
    )
    .expect("static gauge vanishes at t = 0")
}

fn unitary_battery(path: &PathSpec, job: &ReportJob, battery: &mut Battery) {
    let grid = &job.grid;

    if path.kind() != PathKind::Unitary {
        battery.check("synthesis(kind)", 0.0, || {
            Err(SynthError::KindMismatch {
                expected: PathKind::Unitary,
            })
        });
        return;
    }

    // foundation: the spectral decomposition (fails for r0 = 0)
    let mut init_slot = None;
    battery.check("spectral-decomposition", tol::REPRODUCTION_TOL, || {
        let init = path.spectral_init()?;
        let recon = init.rho1_0 * init.w1 + init.rho2_0 * init.w2;
        let residual = (recon - path.rho0()).fro_norm();
        init_slot = Some(init);
        Ok(residual)
    });
    let Some(init) = init_slot else { return };

    let gauge = match &job.alpha {
        AlphaChoice::Zero => AlphaGauge::zero(),
        AlphaChoice::Custom(g) => g.clone(),
        AlphaChoice::Parallel => {
            let mut slot = None;
            battery.check("gauge(parallel-construction)", 0.0, || {
                slot = Some(parallel_alphas(path, grid)?);
                Ok(0.0)
            });
            match slot {
                Some(g) => g,
                None => return,
            }
        }
    };

    battery.check("hamiltonian(hermiticity)", tol::SYNTH_HERMITICITY_TOL, || {
        let mut max = 0.0f64;
        for &t in grid.points() {
            max = max.max(h_general(path, &gauge, t)?.herm_defect());
        }
        Ok(max)
    });

    battery.check("hamiltonian(fd-cross-check)", tol::FD_CROSS_CHECK_TOL, || {
        let h = tol::FD_CROSS_CHECK_STEP_FRACTION * path.tau();
        let mut max = 0.0f64;
        for k in 1..13 {
            let t = path.tau() * k as f64 / 13.0;
            let numeric = h_numeric(|x| u_general(path, &init, &gauge, x).unwrap(), t, h);
            max = max.max((numeric.matrix - h_general(path, &gauge, t)?).fro_norm());
        }
        Ok(max)
    });

    let h_fn = |t: f64| -> Result<CMat2, SynthError> {
        let mut h = h_general(path, &gauge, t)?;
        if let Some(eps) = job.sigma_x_injection {
            h = h + SIGMA_X * eps;
        }
        Ok(h)
    };
    battery.check("realization(propagation)", tol::REALIZATION_TOL, || {
        let run = propagate_closed(&h_fn, &path.rho0(), grid)?.with_reference(path)?;
        Ok(run.max_trace_distance)
    });

    battery.check(
        "gauge-invariance(states)",
        tol::GAUGE_INVARIANCE_UNITARY_TOL,
        || {
            // both runs use a grid fine enough that their own stepping error
            // sits below the invariance budget being tested
            let fine = TimeGrid::new(grid.n().max(40_000), grid.tau())?;
            let alt = comparison_gauge();
            let mut runs = Vec::new();
            for gauge in [&gauge, &alt] {
                let h_fn = |t: f64| -> Result<CMat2, SynthError> {
                    let mut h = h_general(path, gauge, t)?;
                    if let Some(eps) = job.sigma_x_injection {
                        h = h + SIGMA_X * eps;
                    }
                    Ok(h)
                };
                runs.push(propagate_closed(&h_fn, &path.rho0(), &fine)?);
            }
            runs[0].max_distance_to(&runs[1])
        },
    );

    if matches!(job.alpha, AlphaChoice::Parallel) {
        battery.check(
            "parallel-transport(connection)",
            tol::PARALLEL_RESIDUAL_TOL,
            || {
                let mut max = 0.0f64;
                for &t in grid.points() {
                    for k in [1, 2] {
                        max = max.max(connection_k(path, &init, &gauge, t, k)?.norm());
                    }
                }
                Ok(max)
            },
        );
    }

    let mut gamma_slot = None;
    battery.check(
        "phase(gauge-independence)",
        tol::PHASE_GAUGE_INDEPENDENCE_TOL,
        || {
            let main = geometric_phase(path, &init, &gauge, grid)?;
            let alt = geometric_phase(path, &init, &comparison_gauge(), grid)?;
            let residual = (main.gamma - alt.gamma).abs();
            gamma_slot = Some(main.gamma);
            Ok(residual)
        },
    );

    if let Family::Circle { r0, theta0, omega } = *path.family() {
        let full_period = (path.tau() - 2.0 * std::f64::consts::PI / omega).abs() < 1e-9;
        if full_period && r0 > tol::DEGENERATE_R0_TOL {
            battery.check("phase(circle-closed-form)", tol::PHASE_CLOSED_FORM_TOL, || {
                let gamma = match gamma_slot {
                    Some(g) => g,
                    None => geometric_phase(path, &init, &gauge, grid)?.gamma,
                };
                Ok((gamma - gamma_closed_form(r0, theta0)).abs())
            });
        }
    }
}

fn open_battery(path: &PathSpec, job: &ReportJob, battery: &mut Battery) {
    let grid = &job.grid;
    let w = job.w.clone().unwrap_or_else(WGauge::identity);

    // V source: alpha-driven when the decomposition exists, identity for the
    // maximally mixed start (any unitary with V(0) = I is admissible there).
    let r0 = path.r(0.0);
    let v = if r0 > tol::DEGENERATE_R0_TOL {
        let gauge = match &job.alpha {
            AlphaChoice::Zero => AlphaGauge::zero(),
            AlphaChoice::Custom(g) => g.clone(),
            AlphaChoice::Parallel => {
                battery.check("gauge(parallel)", 0.0, || {
                    Err(SynthError::GaugeMismatch(
                        "the parallel gauge applies to unitary synthesis".into(),
                    ))
                });
                return;
            }
        };
        match path.spectral_init() {
            Ok(init) => VSource::alpha(init, gauge),
            Err(e) => {
                battery.check("spectral-decomposition", 0.0, || Err(e));
                return;
            }
        }
    } else {
        VSource::Identity
    };

    battery.check("kraus(completeness)", tol::COMPLETENESS_TOL, || {
        let mut max = 0.0f64;
        for &t in grid.points() {
            max = max.max(kraus_general(path, &w, &v, t)?.completeness_defect());
        }
        Ok(max)
    });

    battery.check("dilation(unitarity)", tol::UNITARITY_TOL, || {
        let mut max = 0.0f64;
        for &t in grid.points() {
            max = max.max(dilation_general(path, &w, &v, t)?.u_ab.unitarity_defect());
        }
        Ok(max)
    });

    battery.check("dilation(kraus-embedding)", tol::EMBEDDING_TOL, || {
        let mut max = 0.0f64;
        for &t in grid.points() {
            let d = dilation_general(path, &w, &v, t)?;
            let pair = kraus_general(path, &w, &v, t)?;
            for i in 0..2 {
                for j in 0..2 {
                    max = max.max((d.u_ab.0[2 * i][2 * j] - pair.m0.0[i][j]).norm());
                    max = max.max((d.u_ab.0[2 * i + 1][2 * j] - pair.m1.0[i][j]).norm());
                }
            }
        }
        Ok(max)
    });

    let anc0 = CMat2([[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]]);
    battery.check("dilation(reduced-state)", tol::REPRODUCTION_TOL, || {
        let rho0 = path.rho0();
        let mut max = 0.0f64;
        for &t in grid.points() {
            let u = dilation_general(path, &w, &v, t)?.u_ab;
            let reduced = partial_trace_b(&(u * kron(&rho0, &anc0) * u.dagger()));
            max = max.max((reduced - path.rho_at(t)?).fro_norm());
        }
        Ok(max)
    });

    let mut kick_slot = None;
    battery.check("kick(unitarity)", tol::UNITARITY_TOL, || {
        let kick = preparation_kick(path, &w, &v)?;
        let defect = kick.unitarity_defect();
        kick_slot = Some(kick);
        Ok(defect)
    });
    let Some(kick) = kick_slot else { return };

    battery.check("kick(reduced-state)", tol::REPRODUCTION_TOL, || {
        let rho0 = path.rho0();
        let after = partial_trace_b(&(kick * kron(&rho0, &anc0) * kick.dagger()));
        Ok((after - rho0).fro_norm())
    });

    let fd = job
        .fd_step
        .unwrap_or(tol::FD_CROSS_CHECK_STEP_FRACTION * path.tau());
    let h_ab_fn = |t: f64| -> Result<CMat4, SynthError> {
        Ok(if job.fd_richardson {
            h_ab_richardson(path, &w, &v, t, fd)?.matrix
        } else {
            h_ab_numeric(path, &w, &v, t, fd)?.matrix
        })
    };

    let mut main_run = None;
    battery.check(
        "realization(combined-propagation)",
        tol::COMBINED_REALIZATION_TOL,
        || {
            let run = propagate_combined(&h_ab_fn, &kick, &path.rho0(), grid)?.with_reference(path)?;
            let residual = run.max_trace_distance;
            main_run = Some(run);
            Ok(residual)
        },
    );

    battery.check(
        "gauge-invariance(reduced-states)",
        tol::GAUGE_INVARIANCE_OPEN_TOL,
        || {
            let main = main_run
                .as_ref()
                .ok_or_else(|| SynthError::GaugeMismatch("no propagation to compare".into()))?;
            let w_alt = WGauge::rotation([0.2, 0.5, -0.8], |t| 0.3 * t.sin())?;
            let v_alt = if r0 > tol::DEGENERATE_R0_TOL {
                VSource::alpha(path.spectral_init()?, comparison_gauge())
            } else {
                VSource::Identity
            };
            let alt_fn = |t: f64| -> Result<CMat4, SynthError> {
                Ok(if job.fd_richardson {
                    h_ab_richardson(path, &w_alt, &v_alt, t, fd)?.matrix
                } else {
                    h_ab_numeric(path, &w_alt, &v_alt, t, fd)?.matrix
                })
            };
            let kick_alt = preparation_kick(path, &w_alt, &v_alt)?;
            let alt_run = propagate_combined(&alt_fn, &kick_alt, &path.rho0(), grid)?;
            main.max_distance_to(&alt_run)
        },
    );

    let w_trivial = job.w.as_ref().is_none_or(|w| w.label() == "identity");
    if *path.family() == Family::Shrink && w_trivial && matches!(job.alpha, AlphaChoice::Zero) {
        battery.check("shrink(closed-form)", tol::FD_CROSS_CHECK_TOL, || {
            let mut max = 0.0f64;
            for &t in grid.points() {
                let numeric = h_ab_numeric(path, &w, &v, t, fd)?.matrix;
                max = max.max((numeric - shrink_h_ab(path, t)?).fro_norm());
            }
            Ok(max)
        });
    }
}

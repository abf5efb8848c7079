//! Mixed-state geometric phase and parallel transport.
//!
//! The phase functional is
//!
//! ```text
//! γ(τ) = arg{ Σ_k w_k tr[ρ_k(0) U(τ)] · exp(−∫₀^τ tr[ρ_k(0) U†U̇] dt) }
//! ```
//!
//! and is independent of the alpha gauge: the per-`k` connection shifts by
//! `iα̇_k`, which the trace factor cancels. Choosing
//! `α₁ = −α₂ = ½∫ cosθ φ̇ dt` nulls both connections (parallel transport), so
//! the total phase of the evolution *is* the geometric phase — that gauge
//! singles out the experimentally preferred Hamiltonian.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::SynthError;
use crate::linalg::CMat2;
use crate::path::{PathKind, PathSpec, SpectralInit, TimeGrid};
use crate::tol;
use crate::unitary::{u_general, u_general_dot, AlphaGauge};

/// Result of evaluating the phase functional on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseResult {
    /// Principal value in `(−π, π]`.
    pub gamma: f64,
    /// The integrals `∫₀^τ tr[ρ_k(0) U†U̇] dt` for `k = 1, 2`.
    pub per_k_connection_integrals: [C64; 2],
    /// Number of Simpson intervals used.
    pub grid_n: usize,
    /// Set when `γ` lies within [`tol::PHASE_BRANCH_MARGIN`] of the `±π`
    /// branch cut; values there are reported as-is, not unwrapped.
    pub branch_warning: bool,
}

/// The parallel-transport connection `tr[ρ_k(0) U(t)† U̇(t)]`, `k ∈ {1, 2}`.
/// `U̇` is assembled by the chain rule on `Ũ` and `V` (analytic coordinate
/// derivatives when the path carries them, central differences otherwise).
pub fn connection_k(
    path: &PathSpec,
    init: &SpectralInit,
    gauge: &AlphaGauge,
    t: f64,
    k: usize,
) -> Result<C64, SynthError> {
    assert!(k == 1 || k == 2, "k must be 1 or 2");
    let u = u_general(path, init, gauge, t)?;
    let udot = u_general_dot(path, init, gauge, t)?;
    let m = u.dagger() * udot;
    Ok((*init.projector(k) * m).trace())
}

/// Gauge functions `α₁ = −α₂ = ½ ∫₀^t cosθ φ̇ dt'` that cancel the dynamical
/// phase. Values are cumulative Simpson sums on the grid nodes (cubic-Hermite
/// interpolated in between); the derivative `α̇₁ = ½ cosθ φ̇` is attached
/// analytically.
pub fn parallel_alphas(path: &PathSpec, grid: &TimeGrid) -> Result<AlphaGauge, SynthError> {
    if path.kind() != PathKind::Unitary {
        return Err(SynthError::KindMismatch {
            expected: PathKind::Unitary,
        });
    }
    let integrand = {
        let path = path.clone();
        move |t: f64| {
            let (_, _, phid) = path.derivatives(t);
            0.5 * path.theta(t).cos() * phid
        }
    };
    let g: Vec<f64> = grid.points().iter().map(|&t| integrand(t)).collect();
    let values = cumulative_simpson(&g, grid.step());
    let h = grid.step();
    let n = grid.n();

    let eval = {
        let (values, g) = (values, g);
        move |t: f64| -> f64 {
            // cubic Hermite on the segment containing t, exact at the nodes
            let i = ((t / h).floor() as usize).min(n - 1);
            let u = (t - i as f64 * h) / h;
            let (u2, u3) = (u * u, u * u * u);
            (2.0 * u3 - 3.0 * u2 + 1.0) * values[i]
                + (u3 - 2.0 * u2 + u) * h * g[i]
                + (-2.0 * u3 + 3.0 * u2) * values[i + 1]
                + (u3 - u2) * h * g[i + 1]
        }
    };
    let a1 = eval.clone();
    let a2 = move |t: f64| -eval(t);
    let d1 = integrand.clone();
    let d2 = move |t: f64| -integrand(t);
    Ok(AlphaGauge::from_parts(
        [std::sync::Arc::new(a1), std::sync::Arc::new(a2)],
        Some([std::sync::Arc::new(d1), std::sync::Arc::new(d2)]),
    ))
}

/// Evaluate the phase functional with composite Simpson quadrature for the
/// connection integrals. Gauge-independent up to quadrature error.
pub fn geometric_phase(
    path: &PathSpec,
    init: &SpectralInit,
    gauge: &AlphaGauge,
    grid: &TimeGrid,
) -> Result<PhaseResult, SynthError> {
    if path.kind() != PathKind::Unitary {
        return Err(SynthError::KindMismatch {
            expected: PathKind::Unitary,
        });
    }
    if init.r0 <= tol::DEGENERATE_R0_TOL {
        return Err(SynthError::DegenerateInitialState { r0: init.r0 });
    }

    let mut conn = [Vec::with_capacity(grid.points().len()), Vec::with_capacity(grid.points().len())];
    for &t in grid.points() {
        let u = u_general(path, init, gauge, t)?;
        let udot = u_general_dot(path, init, gauge, t)?;
        let m = u.dagger() * udot;
        conn[0].push((init.rho1_0 * m).trace());
        conn[1].push((init.rho2_0 * m).trace());
    }
    let integrals = [
        simpson(&conn[0], grid.step()),
        simpson(&conn[1], grid.step()),
    ];

    let u_tau = u_general(path, init, gauge, grid.tau())?;
    let mut z = C64::new(0.0, 0.0);
    for (k, integral) in integrals.iter().enumerate() {
        let w = if k == 0 { init.w1 } else { init.w2 };
        let tr = (*init.projector(k + 1) * u_tau).trace();
        z += tr * w * (-integral).exp();
    }
    if z.norm() < tol::PHASE_UNDEFINED_CUTOFF {
        return Err(SynthError::UndefinedPhase { modulus: z.norm() });
    }
    let gamma = z.arg();
    Ok(PhaseResult {
        gamma,
        per_k_connection_integrals: integrals,
        grid_n: grid.n(),
        branch_warning: std::f64::consts::PI - gamma.abs() < tol::PHASE_BRANCH_MARGIN,
    })
}

/// Closed-form geometric phase for one full period of a circle at constant
/// polar angle: the principal value of `−atan(r₀ tan[π(1−cosθ₀)])` on the
/// branch the phase functional actually takes,
/// `−atan2(r₀ sin y, cos y)` with `y = π(1−cosθ₀)`. The `cosθ₀ = ½` pole of
/// the tangent is handled by the two-argument form (limit `−π/2` for any
/// `r₀ > 0`).
pub fn gamma_closed_form(r0: f64, theta0: f64) -> f64 {
    let y = std::f64::consts::PI * (1.0 - theta0.cos());
    -f64::atan2(r0 * y.sin(), y.cos())
}

/// The parallel-transport Hamiltonian (alpha gauge substituted into the
/// explicit family):
///
/// ```text
/// H = ½ [ φ̇ sin²θ                        (−iθ̇ − φ̇ sinθ cosθ) e^{-iφ} ]
///       [ (iθ̇ − φ̇ sinθ cosθ) e^{iφ}     −φ̇ sin²θ                     ]
/// ```
///
/// Traceless; generates the prescribed path with zero dynamical phase.
pub fn h_parallel(path: &PathSpec, t: f64) -> Result<CMat2, SynthError> {
    if path.kind() != PathKind::Unitary {
        return Err(SynthError::KindMismatch {
            expected: PathKind::Unitary,
        });
    }
    path.rho_at(t)?;
    let (th, ph) = (path.theta(t), path.phi(t));
    let (_, thd, phd) = path.derivatives(t);
    let (st, ct) = (th.sin(), th.cos());
    let diag = 0.5 * phd * st * st;
    let off = C64::new(-phd * st * ct, -thd) * C64::from_polar(0.5, -ph);
    Ok(CMat2([
        [C64::new(diag, 0.0), off],
        [off.conj(), C64::new(-diag, 0.0)],
    ]))
}

/// Closed-form parallel-transport Hamiltonian for the circle `θ = θ₀`,
/// `φ = ωt`:
///
/// ```text
/// H = (ω sinθ₀ / 2) [ sinθ₀                −cosθ₀ e^{-iωt} ]
///                   [ −cosθ₀ e^{iωt}       −sinθ₀          ]
/// ```
pub fn circle_h(theta0: f64, omega: f64, t: f64) -> CMat2 {
    let k = 0.5 * omega * theta0.sin();
    let off = -C64::from_polar(k * theta0.cos(), -omega * t);
    CMat2([
        [C64::new(k * theta0.sin(), 0.0), off],
        [off.conj(), C64::new(-k * theta0.sin(), 0.0)],
    ])
}

/// Composite Simpson on a uniform grid with an even interval count.
fn simpson(f: &[C64], h: f64) -> C64 {
    let n = f.len() - 1;
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let mut acc = f[0] + f[n];
    for (j, v) in f.iter().enumerate().take(n).skip(1) {
        acc += *v * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// Cumulative Simpson values at every node: each increment integrates the
/// parabola through the three nearest nodes, fourth-order like the composite
/// rule.
fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len() - 1;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    for j in 1..=n {
        let inc = if j < n {
            h / 12.0 * (5.0 * f[j - 1] + 8.0 * f[j] - f[j + 1])
        } else {
            h / 12.0 * (-f[n - 2] + 8.0 * f[n - 1] + 5.0 * f[n])
        };
        out.push(out[j - 1] + inc);
    }
    out
}

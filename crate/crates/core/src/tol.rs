//! Central table of numerical tolerances.
//!
//! Every residual threshold used by the library and its verification
//! batteries lives here, so that test calibration has a single knob per
//! failure mode. Values fall into three bands:
//!
//! * machine-precision identities (`1e-12`..`1e-13`) — algebraic facts that
//!   hold up to f64 rounding of small fixed-size products;
//! * discretization-limited checks (`1e-6`..`1e-8`) — second-order stepping
//!   or finite differences at their default resolutions;
//! * quadrature-limited checks (`1e-4`..`1e-6`) — Simpson sums of phase
//!   integrands on the default grids.

/// Relative Frobenius defect allowed on a generator passed to a matrix
/// exponential, and generally on anything claiming to be Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Hermiticity demanded of synthesized Hamiltonians (exact constructions).
pub const SYNTH_HERMITICITY_TOL: f64 = 1e-12;

/// Unitarity defect allowed on any constructed or exponentiated unitary.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Defect allowed on Kraus completeness `‖Σ M†M − I‖_F`.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// Defect allowed on analytic state reproduction (conjugation or reduced
/// dynamics evaluated without propagation).
pub const REPRODUCTION_TOL: f64 = 1e-12;

/// Agreement demanded between a dilation's embedded columns and the Kraus
/// pair computed in 2x2 arithmetic.
pub const EMBEDDING_TOL: f64 = 1e-13;

/// Commutation defect allowed between a gauge matrix `V(t)` and `ρ(0)`,
/// and the defect allowed on `SU(2)` membership of a `W(t)` sample.
pub const GAUGE_MATRIX_TOL: f64 = 1e-13;

/// Max trace distance to the prescribed path after closed (2x2) propagation
/// at the default 2000 midpoint-exponential steps.
pub const REALIZATION_TOL: f64 = 1e-6;

/// Max trace distance to the prescribed path after combined (4x4)
/// propagation at the default 4000 steps, Hamiltonian by finite differences.
pub const COMBINED_REALIZATION_TOL: f64 = 1e-5;

/// Pairwise agreement of propagated trajectories across alpha gauges.
pub const GAUGE_INVARIANCE_UNITARY_TOL: f64 = 1e-8;

/// Pairwise agreement of reduced trajectories across (W, V) gauge pairs.
pub const GAUGE_INVARIANCE_OPEN_TOL: f64 = 1e-5;

/// Magnitude bound on the parallel-transport connection under the
/// dynamical-phase-cancelling gauge.
pub const PARALLEL_RESIDUAL_TOL: f64 = 1e-8;

/// Agreement between the synthesized Hamiltonian and the finite-difference
/// `i U̇ U†` cross-check at step `1e-5·τ`.
pub const FD_CROSS_CHECK_TOL: f64 = 1e-6;

/// Agreement between the numeric geometric phase and the circle closed form
/// at 1e4 Simpson nodes.
pub const PHASE_CLOSED_FORM_TOL: f64 = 1e-4;

/// Gauge independence of the numeric geometric phase (quadrature-limited).
pub const PHASE_GAUGE_INDEPENDENCE_TOL: f64 = 1e-6;

/// Modulus below which the trace sum of the phase functional is considered
/// to have no well-defined argument.
pub const PHASE_UNDEFINED_CUTOFF: f64 = 1e-12;

/// Distance from the `±π` branch cut at which a phase result is flagged.
pub const PHASE_BRANCH_MARGIN: f64 = 1e-3;

/// Bloch-radius drift allowed on a path declared unitary.
pub const CONSTANT_R_TOL: f64 = 1e-12;

/// `r₀` at or below this is treated as the maximally mixed initial state,
/// for which the orthogonal decomposition is not unique.
pub const DEGENERATE_R0_TOL: f64 = 1e-12;

/// Radial speed allowed at a point where the shrink path touches `r = 1`.
pub const SHRINK_START_SLOPE_TOL: f64 = 1e-8;

/// `1 − r` below which the direct shrink coefficient `ṙ/(4√(1−r²))` loses
/// accuracy to cancellation and the curvature limit is used instead.
pub const SHRINK_POLE_REGION: f64 = 1e-10;

/// Slack allowed on range checks of sampled path coordinates.
pub const RANGE_SLACK: f64 = 1e-9;

/// Agreement between Eq.-of-motion matrices built by two algebraic routes
/// (e.g. explicit entries vs operator form, both exact).
pub const ALGEBRAIC_IDENTITY_TOL: f64 = 1e-10;

/// Default finite-difference step, as a fraction of `τ`.
pub const FD_STEP_FRACTION: f64 = 1e-6;

/// Finite-difference step used by the `i U̇ U†` cross-checks, as a fraction
/// of `τ`.
pub const FD_CROSS_CHECK_STEP_FRACTION: f64 = 1e-5;

/// Default step counts for the propagation verifier.
pub const DEFAULT_CLOSED_STEPS: usize = 2000;
pub const DEFAULT_COMBINED_STEPS: usize = 4000;

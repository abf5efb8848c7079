//! Hamiltonian synthesis for unitary (constant-`r`) prescribed evolutions.
//!
//! The construction runs: a reference unitary `Ũ(t)` that transports the
//! initial Bloch direction onto the prescribed one; a commuting gauge matrix
//! `V(t) = Σ_k e^{iα_k(t)} ρ_k(0)` built on the spectral projectors of
//! `ρ(0)`; the general unitary `U = Ũ V`; and the explicit Hamiltonian whose
//! entries involve only `θ, φ, θ̇, φ̇, α̇₁, α̇₂`. Every choice of the two gauge
//! functions realizes the same state trajectory with a different Hamiltonian.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::SynthError;
use crate::linalg::{check_hermitian2, CMat2, SIGMA_X, SIGMA_Y, SIGMA_Z};
use crate::path::{fd_derivative, PathKind, PathSpec, SpectralInit, TimeFn};

/// The two gauge functions `α₁(t), α₂(t)`, both vanishing at `t = 0`.
#[derive(Clone)]
pub struct AlphaGauge {
    a: [TimeFn; 2],
    d: Option<[TimeFn; 2]>,
}

impl AlphaGauge {
    /// Gauge from value functions; derivatives fall back to central
    /// differences with the caller's step policy.
    pub fn new(
        alpha1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<AlphaGauge, SynthError> {
        let g = AlphaGauge {
            a: [Arc::new(alpha1), Arc::new(alpha2)],
            d: None,
        };
        g.check_zero_at_origin()?;
        Ok(g)
    }

    /// Gauge with analytic derivatives attached.
    pub fn with_derivatives(
        alpha1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha1_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha2_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<AlphaGauge, SynthError> {
        let g = AlphaGauge {
            a: [Arc::new(alpha1), Arc::new(alpha2)],
            d: Some([Arc::new(alpha1_dot), Arc::new(alpha2_dot)]),
        };
        g.check_zero_at_origin()?;
        Ok(g)
    }

    pub(crate) fn from_parts(a: [TimeFn; 2], d: Option<[TimeFn; 2]>) -> AlphaGauge {
        AlphaGauge { a, d }
    }

    /// The trivial gauge `α₁ = α₂ = 0` (yields the reference unitary itself).
    pub fn zero() -> AlphaGauge {
        AlphaGauge {
            a: [Arc::new(|_| 0.0), Arc::new(|_| 0.0)],
            d: Some([Arc::new(|_| 0.0), Arc::new(|_| 0.0)]),
        }
    }

    fn check_zero_at_origin(&self) -> Result<(), SynthError> {
        for f in &self.a {
            let v = f(0.0);
            if v.abs() > 1e-12 {
                return Err(SynthError::NonzeroAlphaAtZero { value: v });
            }
        }
        Ok(())
    }

    /// `α_k(t)`, `k ∈ {1, 2}`.
    pub fn value(&self, k: usize, t: f64) -> f64 {
        self.a[k - 1](t)
    }

    /// `α̇_k(t)`: analytic when attached, otherwise a central difference with
    /// step `h` restricted to `[lo, hi]`.
    pub fn derivative(&self, k: usize, t: f64, h: f64, lo: f64, hi: f64) -> f64 {
        match &self.d {
            Some(d) => d[k - 1](t),
            None => fd_derivative(&*self.a[k - 1], t, h, lo, hi),
        }
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.d.is_some()
    }
}

impl fmt::Debug for AlphaGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlphaGauge")
            .field("analytic_derivatives", &self.d.is_some())
            .finish_non_exhaustive()
    }
}

/// The reference unitary transporting `(θ₀, φ₀)` to `(θ(t), φ(t))`:
///
/// ```text
/// Ũ = [ cos(Δθ/2) e^{-iΔφ/2}   −sin(Δθ/2) e^{-iΣφ/2} ]
///     [ sin(Δθ/2) e^{ iΣφ/2}    cos(Δθ/2) e^{ iΔφ/2} ]
/// ```
///
/// with `Δθ = θ−θ₀`, `Δφ = φ−φ₀`, `Σφ = φ+φ₀`. Identity at `t = 0`.
pub fn tilde_u(path: &PathSpec, t: f64) -> Result<CMat2, SynthError> {
    // reuse the domain check embedded in coordinate access
    path.rho_at(t)?;
    let (th0, ph0) = (path.theta(0.0), path.phi(0.0));
    let (th, ph) = (path.theta(t), path.phi(t));
    let (half, a, b) = (0.5 * (th - th0), 0.5 * (ph - ph0), 0.5 * (ph + ph0));
    let (c, s) = (half.cos(), half.sin());
    Ok(CMat2([
        [
            C64::from_polar(c, -a),
            -C64::from_polar(s, -b),
        ],
        [
            C64::from_polar(s, b),
            C64::from_polar(c, a),
        ],
    ]))
}

/// Time derivative of [`tilde_u`] by the chain rule on the entries, with
/// `(θ̇, φ̇)` analytic or finite-difference per the path's policy.
pub fn tilde_u_dot(path: &PathSpec, t: f64) -> Result<CMat2, SynthError> {
    path.rho_at(t)?;
    let (th0, ph0) = (path.theta(0.0), path.phi(0.0));
    let (th, ph) = (path.theta(t), path.phi(t));
    let (_, thd, phd) = path.derivatives(t);
    let (half, a, b) = (0.5 * (th - th0), 0.5 * (ph - ph0), 0.5 * (ph + ph0));
    let (c, s) = (half.cos(), half.sin());
    let (ht, hp) = (0.5 * thd, 0.5 * phd);
    Ok(CMat2([
        [
            C64::new(-s * ht, -c * hp) * C64::from_polar(1.0, -a),
            C64::new(-c * ht, s * hp) * C64::from_polar(1.0, -b),
        ],
        [
            C64::new(c * ht, s * hp) * C64::from_polar(1.0, b),
            C64::new(-s * ht, c * hp) * C64::from_polar(1.0, a),
        ],
    ]))
}

/// The commuting gauge matrix `V(t) = e^{iα₁} ρ₁(0) + e^{iα₂} ρ₂(0)`.
/// Unitary, commutes with `ρ(0)`, identity at `t = 0`.
pub fn v_gauge(init: &SpectralInit, gauge: &AlphaGauge, t: f64) -> CMat2 {
    let p1 = C64::from_polar(1.0, gauge.value(1, t));
    let p2 = C64::from_polar(1.0, gauge.value(2, t));
    init.rho1_0 * p1 + init.rho2_0 * p2
}

/// `V̇(t) = Σ_k iα̇_k e^{iα_k} ρ_k(0)`.
pub fn v_gauge_dot(init: &SpectralInit, gauge: &AlphaGauge, t: f64, h: f64, tau: f64) -> CMat2 {
    let mut out = CMat2::ZERO;
    for (k, rho) in [(1usize, &init.rho1_0), (2usize, &init.rho2_0)] {
        let ad = gauge.derivative(k, t, h, 0.0, tau);
        out = out + *rho * (C64::new(0.0, ad) * C64::from_polar(1.0, gauge.value(k, t)));
    }
    out
}

/// The general unitary `U(t) = Ũ(t) V(t)` realizing the prescribed
/// constant-`r` evolution for any gauge choice.
pub fn u_general(
    path: &PathSpec,
    init: &SpectralInit,
    gauge: &AlphaGauge,
    t: f64,
) -> Result<CMat2, SynthError> {
    require_unitary_kind(path)?;
    Ok(tilde_u(path, t)? * v_gauge(init, gauge, t))
}

/// `U̇ = Ũ̇ V + Ũ V̇` by the chain rule.
pub fn u_general_dot(
    path: &PathSpec,
    init: &SpectralInit,
    gauge: &AlphaGauge,
    t: f64,
) -> Result<CMat2, SynthError> {
    require_unitary_kind(path)?;
    let h = path.fd_step();
    let tau = path.tau();
    Ok(tilde_u_dot(path, t)? * v_gauge(init, gauge, t)
        + tilde_u(path, t)? * v_gauge_dot(init, gauge, t, h, tau))
}

/// The explicit gauge-family Hamiltonian for a constant-`r` path:
///
/// ```text
/// H = ½ [ φ̇ − α̇₁(1+cosθ) − α̇₂(1−cosθ)      (−iθ̇ + (α̇₂−α̇₁) sinθ) e^{-iφ} ]
///       [ conj                              −φ̇ − α̇₁(1−cosθ) − α̇₂(1+cosθ) ]
/// ```
///
/// Hermitian by construction; needs no operator differentiation.
pub fn h_general(path: &PathSpec, gauge: &AlphaGauge, t: f64) -> Result<CMat2, SynthError> {
    require_unitary_kind(path)?;
    path.rho_at(t)?;
    let (th, ph) = (path.theta(t), path.phi(t));
    let (_, thd, phd) = path.derivatives(t);
    let h = path.fd_step();
    let a1d = gauge.derivative(1, t, h, 0.0, path.tau());
    let a2d = gauge.derivative(2, t, h, 0.0, path.tau());
    let (ct, st) = (th.cos(), th.sin());
    let h11 = 0.5 * (phd - a1d * (1.0 + ct) - a2d * (1.0 - ct));
    let h22 = 0.5 * (-phd - a1d * (1.0 - ct) - a2d * (1.0 + ct));
    let h12 = C64::new((a2d - a1d) * st, -thd) * C64::from_polar(0.5, -ph);
    Ok(CMat2([
        [C64::new(h11, 0.0), h12],
        [h12.conj(), C64::new(h22, 0.0)],
    ]))
}

/// A finite-difference Hamiltonian together with the skew residue that the
/// Hermitization removed (numerical diagnostic, not physics).
#[derive(Clone, Copy, Debug)]
pub struct NumericHamiltonian<M> {
    pub matrix: M,
    pub skew_defect: f64,
}

/// Central-difference `i U̇(t) U(t)†`, Hermitized. Independent of the
/// synthesis formulas; used to cross-check them. The caller must keep
/// `t ± h` inside the domain of `u_fn`.
pub fn h_numeric(
    u_fn: impl Fn(f64) -> CMat2,
    t: f64,
    h: f64,
) -> NumericHamiltonian<CMat2> {
    let du = (u_fn(t + h) - u_fn(t - h)) * (0.5 / h);
    let raw = du * u_fn(t).dagger() * C64::new(0.0, 1.0);
    NumericHamiltonian {
        matrix: raw.hermitize(),
        skew_defect: raw.herm_defect(),
    }
}

/// A Hamiltonian sample decomposed as `H = B₀·I + B·σ/2`: the magnetic-field
/// pulse realizing it, in angular-frequency units.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct PulseSample {
    pub t: f64,
    pub b0: f64,
    pub b: [f64; 3],
}

/// Decompose a Hermitian `H` into its field components:
/// `B₀ = tr(H)/2`, `B_i = tr(H σ_i)`.
pub fn pulse_decompose(h: &CMat2, t: f64) -> Result<PulseSample, SynthError> {
    check_hermitian2(h, Some(t))?;
    Ok(PulseSample {
        t,
        b0: 0.5 * h.trace().re,
        b: [
            (*h * SIGMA_X).trace().re,
            (*h * SIGMA_Y).trace().re,
            (*h * SIGMA_Z).trace().re,
        ],
    })
}

fn require_unitary_kind(path: &PathSpec) -> Result<(), SynthError> {
    if path.kind() != PathKind::Unitary {
        return Err(SynthError::KindMismatch {
            expected: PathKind::Unitary,
        });
    }
    Ok(())
}

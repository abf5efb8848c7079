//! Realizing nonunitary (variable-`r`) evolutions on a two-qubit extension.
//!
//! A qubit whose Bloch radius changes cannot be driven by any one-qubit
//! Hamiltonian. It can always be driven on system ⊗ ancilla: a Kraus pair
//! `(M̃₀, M̃₁)` reproduces the prescribed `ρ(t)` from `ρ(0)`, embeds into a
//! 4x4 unitary `Ũ_ab` (columns 1 and 3 carry the Kraus entries; the ancilla
//! starts in `|0⟩⟨0|`), and the combined-system Hamiltonian follows as
//! `i U̇_ab U_ab†`. The gauge freedom is an ancilla-side `SU(2)` path `W(t)`
//! plus the same commuting `V(t)` as in the unitary case.
//!
//! `Ũ_ab(0)` is generally *not* the identity, while the evolution generated
//! by `H_ab` necessarily starts from it. The realized protocol is therefore
//! "kick, then evolve": apply `U_ab(0)` instantaneously at `t = 0` (it leaves
//! the reduced state at `ρ(0)`), then integrate `H_ab(t)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::SynthError;
use crate::linalg::{kron, CMat2, CMat4, SIGMA_X, SIGMA_Y};
use crate::path::{PathSpec, SpectralInit};
use crate::tol;
use crate::unitary::{v_gauge, AlphaGauge, NumericHamiltonian};

/// The two Kraus operators of a qubit channel sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrausPair {
    pub m0: CMat2,
    pub m1: CMat2,
}

impl KrausPair {
    /// `‖M₀†M₀ + M₁†M₁ − I‖_F`.
    pub fn completeness_defect(&self) -> f64 {
        (self.m0.dagger() * self.m0 + self.m1.dagger() * self.m1 - CMat2::IDENTITY).fro_norm()
    }

    /// `Σ_μ M_μ ρ M_μ†`.
    pub fn apply(&self, rho: &CMat2) -> CMat2 {
        self.m0 * *rho * self.m0.dagger() + self.m1 * *rho * self.m1.dagger()
    }
}

/// A 4x4 combined-system unitary at one time sample.
#[derive(Clone, Copy, Debug)]
pub struct DilationSample {
    pub t: f64,
    pub u_ab: CMat4,
}

/// Ancilla-side gauge: a time-dependent `SU(2)` matrix. Samples are
/// validated on every use.
#[derive(Clone)]
pub struct WGauge {
    f: Arc<dyn Fn(f64) -> CMat2 + Send + Sync>,
    label: String,
}

impl WGauge {
    /// `W ≡ I`, the canonical representative.
    pub fn identity() -> WGauge {
        WGauge {
            f: Arc::new(|_| CMat2::IDENTITY),
            label: "identity".into(),
        }
    }

    /// Arbitrary user-supplied gauge; each sample must pass `SU(2)`
    /// validation when used.
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(f64) -> CMat2 + Send + Sync + 'static,
    ) -> WGauge {
        WGauge {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// Rotation gauge `W(t) = exp(−i·angle(t)·n̂·σ/2)`, `SU(2)` by
    /// construction.
    pub fn rotation(
        axis: [f64; 3],
        angle: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<WGauge, SynthError> {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(SynthError::GaugeMismatch(
                "rotation axis must be finite and nonzero".into(),
            ));
        }
        let n = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
        let f = move |t: f64| {
            let half = 0.5 * angle(t);
            let (c, s) = (half.cos(), half.sin());
            CMat2([
                [
                    C64::new(c, -s * n[2]),
                    C64::new(-s * n[1], -s * n[0]),
                ],
                [
                    C64::new(s * n[1], -s * n[0]),
                    C64::new(c, s * n[2]),
                ],
            ])
        };
        Ok(WGauge {
            f: Arc::new(f),
            label: format!("rotation(axis=[{}, {}, {}])", n[0], n[1], n[2]),
        })
    }

    /// Sample `W(t)`, enforcing unitarity and unit determinant within
    /// [`tol::GAUGE_MATRIX_TOL`].
    pub fn sample(&self, t: f64) -> Result<CMat2, SynthError> {
        let w = (self.f)(t);
        let udef = w.unitarity_defect();
        if udef > tol::GAUGE_MATRIX_TOL {
            return Err(SynthError::GaugeMismatch(format!(
                "W({t}) is not unitary: defect {udef:.3e}"
            )));
        }
        let det = w.0[0][0] * w.0[1][1] - w.0[0][1] * w.0[1][0];
        if (det - C64::new(1.0, 0.0)).norm() > tol::GAUGE_MATRIX_TOL {
            return Err(SynthError::GaugeMismatch(format!(
                "W({t}) has det = {det}, not in SU(2)"
            )));
        }
        Ok(w)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for WGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WGauge").field("label", &self.label).finish_non_exhaustive()
    }
}

/// Source of the system-side gauge matrix `V(t)`.
///
/// For `r₀ > 0` the only admissible `V` are the commuting phase matrices
/// driven by an [`AlphaGauge`]; for `r₀ = 0` any unitary path with
/// `V(0) = I` qualifies.
#[derive(Clone)]
pub enum VSource {
    /// `V ≡ I`.
    Identity,
    /// `V(t) = Σ_k e^{iα_k(t)} ρ_k(0)`.
    Alpha { init: SpectralInit, gauge: AlphaGauge },
    /// Arbitrary unitary path (validated per sample; must commute with
    /// `ρ(0)` when `r₀ > 0`, and start at the identity).
    Custom {
        f: Arc<dyn Fn(f64) -> CMat2 + Send + Sync>,
        label: String,
    },
}

impl VSource {
    pub fn alpha(init: SpectralInit, gauge: AlphaGauge) -> VSource {
        VSource::Alpha { init, gauge }
    }

    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64) -> CMat2 + Send + Sync + 'static,
    ) -> VSource {
        VSource::Custom {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// Sample `V(t)` with validation against the path's initial state.
    pub fn sample(&self, path: &PathSpec, t: f64) -> Result<CMat2, SynthError> {
        match self {
            VSource::Identity => Ok(CMat2::IDENTITY),
            VSource::Alpha { init, gauge } => Ok(v_gauge(init, gauge, t)),
            VSource::Custom { f, .. } => {
                let v = f(t);
                let udef = v.unitarity_defect();
                if udef > tol::GAUGE_MATRIX_TOL {
                    return Err(SynthError::GaugeMismatch(format!(
                        "V({t}) is not unitary: defect {udef:.3e}"
                    )));
                }
                if t == 0.0 {
                    let dev = (v - CMat2::IDENTITY).fro_norm();
                    if dev > tol::GAUGE_MATRIX_TOL {
                        return Err(SynthError::GaugeMismatch(format!(
                            "V(0) must be the identity, deviation {dev:.3e}"
                        )));
                    }
                }
                if path.r(0.0) > tol::DEGENERATE_R0_TOL {
                    let rho0 = path.rho0();
                    let comm = (v * rho0 - rho0 * v).fro_norm();
                    if comm > tol::GAUGE_MATRIX_TOL {
                        return Err(SynthError::GaugeMismatch(format!(
                            "V({t}) does not commute with rho(0): residual {comm:.3e}"
                        )));
                    }
                }
                Ok(v)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            VSource::Identity => "identity".into(),
            VSource::Alpha { .. } => "alpha".into(),
            VSource::Custom { label, .. } => format!("custom({label})"),
        }
    }
}

impl fmt::Debug for VSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VSource({})", self.label())
    }
}

/// Trigonometric shorthand shared by the Kraus pair and the dilation so the
/// embedded columns agree bit-for-bit.
struct Shorthand {
    ss: f64,
    sc: f64,
    cs: f64,
    cc: f64,
    rp: f64,
    rm: f64,
    ph: f64,
    ph0: f64,
}

fn shorthand(path: &PathSpec, t: f64) -> Result<Shorthand, SynthError> {
    path.rho_at(t)?;
    let (r, th, ph) = (path.r(t), path.theta(t), path.phi(t));
    let (r0, th0, ph0) = (path.r(0.0), path.theta(0.0), path.phi(0.0));
    let (sh, ch) = ((0.5 * th).sin(), (0.5 * th).cos());
    let (sh0, ch0) = ((0.5 * th0).sin(), (0.5 * th0).cos());
    Ok(Shorthand {
        ss: sh * sh0,
        sc: sh * ch0,
        cs: ch * sh0,
        cc: ch * ch0,
        rp: ((r + r0) / (1.0 + r0)).max(0.0).sqrt(),
        rm: ((1.0 - r) / (1.0 + r0)).max(0.0).sqrt(),
        ph,
        ph0,
    })
}

fn kraus_from(s: &Shorthand) -> KrausPair {
    let m0 = CMat2([
        [
            C64::new(-s.cs, 0.0) - C64::from_polar(s.rm * s.sc, s.ph0 - s.ph),
            C64::from_polar(s.cc, -s.ph0) - C64::from_polar(s.rm * s.ss, -s.ph),
        ],
        [
            -C64::from_polar(s.ss, s.ph) + C64::from_polar(s.rm * s.cc, s.ph0),
            C64::from_polar(s.sc, s.ph - s.ph0) + C64::new(s.rm * s.cs, 0.0),
        ],
    ]);
    let m1 = CMat2([
        [
            C64::from_polar(s.rp * s.cc, s.ph0),
            C64::new(s.rp * s.cs, 0.0),
        ],
        [
            C64::from_polar(s.rp * s.sc, s.ph + s.ph0),
            C64::from_polar(s.rp * s.ss, s.ph),
        ],
    ]);
    KrausPair { m0, m1 }
}

/// The reference Kraus pair reproducing `ρ(t)` from `ρ(0)` for an arbitrary
/// (generally nonunitary) prescribed path.
pub fn kraus_tilde(path: &PathSpec, t: f64) -> Result<KrausPair, SynthError> {
    Ok(kraus_from(&shorthand(path, t)?))
}

/// The reference dilation `Ũ_ab(t)`: a 4x4 unitary whose columns 1 and 3
/// embed the Kraus pair (`(M_μ)_{ij} = ⟨i, μ|U_ab|j, 0⟩`); the remaining
/// columns complete it to a unitary.
pub fn dilation_tilde(path: &PathSpec, t: f64) -> Result<DilationSample, SynthError> {
    let s = shorthand(path, t)?;
    let k = kraus_from(&s);
    let z = C64::new(0.0, 0.0);
    let mut u = [[z; 4]; 4];
    // Kraus embedding (columns 0 and 2, rows interleaving mu)
    for i in 0..2 {
        for j in 0..2 {
            u[2 * i][2 * j] = k.m0.0[i][j];
            u[2 * i + 1][2 * j] = k.m1.0[i][j];
        }
    }
    // completion columns
    u[0][1] = -C64::from_polar(s.rp * s.ss, -s.ph);
    u[0][3] = C64::from_polar(s.rp * s.sc, -(s.ph + s.ph0));
    u[1][1] = -C64::from_polar(s.sc, s.ph0 - s.ph) - C64::new(s.rm * s.cs, 0.0);
    u[1][3] = -C64::from_polar(s.ss, -s.ph) + C64::from_polar(s.rm * s.cc, -s.ph0);
    u[2][1] = C64::new(s.rp * s.cs, 0.0);
    u[2][3] = -C64::from_polar(s.rp * s.cc, -s.ph0);
    u[3][1] = C64::from_polar(s.cc, s.ph0) - C64::from_polar(s.rm * s.ss, s.ph);
    u[3][3] = C64::new(s.cs, 0.0) + C64::from_polar(s.rm * s.sc, s.ph - s.ph0);
    Ok(DilationSample { t, u_ab: CMat4(u) })
}

/// The full Kraus gauge family `M_μ = Σ_ν W_{μν} M̃_ν V(t)`.
pub fn kraus_general(
    path: &PathSpec,
    w: &WGauge,
    v: &VSource,
    t: f64,
) -> Result<KrausPair, SynthError> {
    let k = kraus_tilde(path, t)?;
    let wm = w.sample(t)?;
    let vm = v.sample(path, t)?;
    Ok(KrausPair {
        m0: (k.m0 * wm.0[0][0] + k.m1 * wm.0[0][1]) * vm,
        m1: (k.m0 * wm.0[1][0] + k.m1 * wm.0[1][1]) * vm,
    })
}

/// The full dilation gauge family `U_ab = (I ⊗ W) Ũ_ab (V ⊗ I)`.
pub fn dilation_general(
    path: &PathSpec,
    w: &WGauge,
    v: &VSource,
    t: f64,
) -> Result<DilationSample, SynthError> {
    let tilde = dilation_tilde(path, t)?;
    let wm = w.sample(t)?;
    let vm = v.sample(path, t)?;
    let u_ab = kron(&CMat2::IDENTITY, &wm) * tilde.u_ab * kron(&vm, &CMat2::IDENTITY);
    Ok(DilationSample { t, u_ab })
}

/// `U_ab(0)` — the instantaneous preparation applied before the Hamiltonian
/// evolution. Leaves the reduced state at `ρ(0)`.
pub fn preparation_kick(path: &PathSpec, w: &WGauge, v: &VSource) -> Result<CMat4, SynthError> {
    Ok(dilation_general(path, w, v, 0.0)?.u_ab)
}

/// Combined-system Hamiltonian `i U̇_ab U_ab†` by central differences
/// (one-sided second-order stencils at the domain endpoints), Hermitized;
/// the skew residue is reported as a diagnostic.
pub fn h_ab_numeric(
    path: &PathSpec,
    w: &WGauge,
    v: &VSource,
    t: f64,
    h: f64,
) -> Result<NumericHamiltonian<CMat4>, SynthError> {
    let u = |x: f64| dilation_general(path, w, v, x).map(|d| d.u_ab);
    let udot = if t - h < 0.0 {
        (u(t)? * (-3.0) + u(t + h)? * 4.0 - u(t + 2.0 * h)?) * (0.5 / h)
    } else if t + h > path.tau() {
        (u(t)? * 3.0 - u(t - h)? * 4.0 + u(t - 2.0 * h)?) * (0.5 / h)
    } else {
        (u(t + h)? - u(t - h)?) * (0.5 / h)
    };
    let raw = udot * u(t)?.dagger() * C64::new(0.0, 1.0);
    Ok(NumericHamiltonian {
        matrix: raw.hermitize(),
        skew_defect: raw.herm_defect(),
    })
}

/// Richardson-extrapolated variant of [`h_ab_numeric`]: combines steps `h`
/// and `h/2`, cancelling the leading `O(h²)` error of the central
/// difference.
pub fn h_ab_richardson(
    path: &PathSpec,
    w: &WGauge,
    v: &VSource,
    t: f64,
    h: f64,
) -> Result<NumericHamiltonian<CMat4>, SynthError> {
    let coarse = h_ab_numeric(path, w, v, t, h)?;
    let fine = h_ab_numeric(path, w, v, t, 0.5 * h)?;
    Ok(NumericHamiltonian {
        matrix: fine.matrix * (4.0 / 3.0) - coarse.matrix * (1.0 / 3.0),
        skew_defect: fine.skew_defect.max(coarse.skew_defect),
    })
}

/// Closed-form combined Hamiltonian for pure shrinking along the polar axis:
///
/// ```text
/// H_ab = ṙ / (4√(1−r²)) · (σ_x ⊗ σ_y − σ_y ⊗ σ_x)
/// ```
///
/// Valid for polar-axis paths (`θ ≡ 0`) with `ṙ ≤ 0`. The coefficient is an
/// indeterminate `0/0` where the path touches `r = 1` with `ṙ = 0`; there the
/// one-sided limit `−√(−r̈)/4` is taken. Touching `r = 1` with `ṙ ≠ 0` makes
/// the coefficient diverge and is rejected.
pub fn shrink_h_ab(path: &PathSpec, t: f64) -> Result<CMat4, SynthError> {
    path.rho_at(t)?;
    let r = path.r(t);
    let (rdot, _, _) = path.derivatives(t);
    let coeff = if 1.0 - r > tol::SHRINK_POLE_REGION {
        rdot / (4.0 * ((1.0 - r) * (1.0 + r)).sqrt())
    } else {
        // At the pole the ratio is 0/0 with limit −√(−r̈)/4. A smooth touch
        // of r = 1 obeys ṙ² ≈ 2(−r̈)(1−r); a slope beyond that bound cannot
        // come from a regular touch, so the coefficient diverges.
        let d = 1e-3 * path.tau();
        let rf = |x: f64| path.r(x);
        let rddot = if t - 2.0 * d < 0.0 {
            (2.0 * rf(t) - 5.0 * rf(t + d) + 4.0 * rf(t + 2.0 * d) - rf(t + 3.0 * d)) / (d * d)
        } else if t + 2.0 * d > path.tau() {
            (2.0 * rf(t) - 5.0 * rf(t - d) + 4.0 * rf(t - 2.0 * d) - rf(t - 3.0 * d)) / (d * d)
        } else {
            (rf(t + d) - 2.0 * rf(t) + rf(t - d)) / (d * d)
        };
        let slope_bound = (2.0 * (-rddot).max(0.0) * (1.0 - r).max(0.0)).sqrt();
        if rdot.abs() > slope_bound + tol::SHRINK_START_SLOPE_TOL {
            return Err(SynthError::SingularShrinkStart { rdot });
        }
        -(-rddot).max(0.0).sqrt() / 4.0
    };
    Ok((kron(&SIGMA_X, &SIGMA_Y) - kron(&SIGMA_Y, &SIGMA_X)) * coeff)
}

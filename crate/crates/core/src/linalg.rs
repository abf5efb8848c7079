//! Complex linear algebra on fixed-size 2x2 and 4x4 matrices.
//!
//! Everything a one- and two-qubit synthesis needs and nothing more:
//! products, adjoints, tensor products, the ancilla partial trace, Hermitian
//! matrix exponentials, Frobenius norms and the trace distance. All types are
//! plain `Copy` value types and all operations are pure.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::error::SynthError;
use crate::tol;

/// A 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat2(pub [[C64; 2]; 2]);

/// A 4x4 complex matrix, row major. Composite basis order is
/// `|a b⟩ = |00⟩, |01⟩, |10⟩, |11⟩` (index `2a + b`): the system qubit is the
/// first tensor factor, the ancilla the second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat4(pub [[C64; 4]; 4]);

const C0: C64 = C64::new(0.0, 0.0);
const C1: C64 = C64::new(1.0, 0.0);

/// Pauli σ_x.
pub const SIGMA_X: CMat2 = CMat2([[C0, C1], [C1, C0]]);
/// Pauli σ_y.
pub const SIGMA_Y: CMat2 = CMat2([[C0, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), C0]]);
/// Pauli σ_z.
pub const SIGMA_Z: CMat2 = CMat2([[C1, C0], [C0, C64::new(-1.0, 0.0)]]);

impl CMat2 {
    pub const ZERO: CMat2 = CMat2([[C0; 2]; 2]);
    pub const IDENTITY: CMat2 = CMat2([[C1, C0], [C0, C1]]);

    pub fn dagger(&self) -> CMat2 {
        let m = &self.0;
        CMat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn fro_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖M − M†‖_F`.
    pub fn herm_defect(&self) -> f64 {
        (*self - self.dagger()).fro_norm()
    }

    /// `‖M M† − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.dagger() - CMat2::IDENTITY).fro_norm()
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitize(&self) -> CMat2 {
        (*self + self.dagger()) * C64::new(0.5, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Eigenvalues of a Hermitian 2x2 matrix, ascending.
    pub fn eigvals_hermitian(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let mid = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + self.0[0][1].norm_sqr()).sqrt();
        [mid - half, mid + half]
    }

    /// `exp(−i·H·dt)` for Hermitian `H`, by the Pauli-decomposition closed
    /// form. The generator is validated against
    /// [`tol::HERMITICITY_TOL`] and its Hermitian part is exponentiated.
    pub fn expm_skew(&self, dt: f64) -> Result<CMat2, SynthError> {
        check_hermitian2(self, None)?;
        let h = self.hermitize();
        // H = h0·I + hv·σ with real h0, hv.
        let h0 = 0.5 * (h.0[0][0].re + h.0[1][1].re);
        let hx = h.0[0][1].re;
        let hy = -h.0[0][1].im;
        let hz = 0.5 * (h.0[0][0].re - h.0[1][1].re);
        let nu = (hx * hx + hy * hy + hz * hz).sqrt();
        let phase = C64::from_polar(1.0, -h0 * dt);
        if nu == 0.0 {
            return Ok(CMat2::IDENTITY * phase);
        }
        let (c, s) = ((nu * dt).cos(), (nu * dt).sin());
        let (nx, ny, nz) = (hx / nu, hy / nu, hz / nu);
        // exp(−i ν dt n·σ) = cos·I − i sin·(n·σ)
        let m = CMat2([
            [
                C64::new(c, -s * nz),
                C64::new(-s * ny, -s * nx),
            ],
            [
                C64::new(s * ny, -s * nx),
                C64::new(c, s * nz),
            ],
        ]);
        Ok(m * phase)
    }
}

impl CMat4 {
    pub const ZERO: CMat4 = CMat4([[C0; 4]; 4]);
    pub const IDENTITY: CMat4 = CMat4([
        [C1, C0, C0, C0],
        [C0, C1, C0, C0],
        [C0, C0, C1, C0],
        [C0, C0, C0, C1],
    ]);

    pub fn dagger(&self) -> CMat4 {
        let mut out = [[C0; 4]; 4];
        for (i, row) in self.0.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                out[j][i] = z.conj();
            }
        }
        CMat4(out)
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn herm_defect(&self) -> f64 {
        (*self - self.dagger()).fro_norm()
    }

    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.dagger() - CMat4::IDENTITY).fro_norm()
    }

    pub fn hermitize(&self) -> CMat4 {
        (*self + self.dagger()) * C64::new(0.5, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `exp(−i·H·dt)` for Hermitian `H`, by eigendecomposition of the
    /// Hermitian part (validated first).
    pub fn expm_skew(&self, dt: f64) -> Result<CMat4, SynthError> {
        check_hermitian4(self, None)?;
        let h = self.hermitize();
        let na = Matrix4::from_fn(|i, j| h.0[i][j]);
        let eig = na.symmetric_eigen();
        let diag = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * dt)));
        let out = eig.eigenvectors * diag * eig.eigenvectors.adjoint();
        let mut m = [[C0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = out[(i, j)];
            }
        }
        Ok(CMat4(m))
    }
}

pub(crate) fn check_hermitian2(m: &CMat2, at: Option<f64>) -> Result<(), SynthError> {
    let defect = m.herm_defect();
    if defect > tol::HERMITICITY_TOL * m.fro_norm().max(1.0) {
        return Err(SynthError::NonHermitianInput { defect, at });
    }
    Ok(())
}

pub(crate) fn check_hermitian4(m: &CMat4, at: Option<f64>) -> Result<(), SynthError> {
    let defect = m.herm_defect();
    if defect > tol::HERMITICITY_TOL * m.fro_norm().max(1.0) {
        return Err(SynthError::NonHermitianInput { defect, at });
    }
    Ok(())
}

/// Tensor product with the system qubit as the first factor and the ancilla
/// as the second: the composite index is `2a + b`.
pub fn kron(a: &CMat2, b: &CMat2) -> CMat4 {
    let mut out = [[C0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    CMat4(out)
}

/// Trace over the second (ancilla) tensor factor, under the ordering fixed by
/// [`kron`]: `(tr_b M)_{ij} = Σ_b M_{2i+b, 2j+b}`.
pub fn partial_trace_b(m: &CMat4) -> CMat2 {
    let mut out = [[C0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m.0[2 * i][2 * j] + m.0[2 * i + 1][2 * j + 1];
        }
    }
    CMat2(out)
}

/// Trace distance `½ Σ |eig(A − B)|` between Hermitian 2x2 matrices.
pub fn trace_distance(a: &CMat2, b: &CMat2) -> Result<f64, SynthError> {
    check_hermitian2(a, None)?;
    check_hermitian2(b, None)?;
    let [lo, hi] = (*a - *b).hermitize().eigvals_hermitian();
    Ok(0.5 * (lo.abs() + hi.abs()))
}

macro_rules! impl_matrix_ops {
    ($ty:ident, $n:expr) => {
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                let mut out = self.0;
                for i in 0..$n {
                    for j in 0..$n {
                        out[i][j] += rhs.0[i][j];
                    }
                }
                $ty(out)
            }
        }

        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                let mut out = self.0;
                for i in 0..$n {
                    for j in 0..$n {
                        out[i][j] -= rhs.0[i][j];
                    }
                }
                $ty(out)
            }
        }

        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self * C64::new(-1.0, 0.0)
            }
        }

        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                let mut out = [[C64::new(0.0, 0.0); $n]; $n];
                for i in 0..$n {
                    for k in 0..$n {
                        let aik = self.0[i][k];
                        for j in 0..$n {
                            out[i][j] += aik * rhs.0[k][j];
                        }
                    }
                }
                $ty(out)
            }
        }

        impl Mul<C64> for $ty {
            type Output = $ty;
            fn mul(self, rhs: C64) -> $ty {
                let mut out = self.0;
                for i in 0..$n {
                    for j in 0..$n {
                        out[i][j] *= rhs;
                    }
                }
                $ty(out)
            }
        }

        impl Mul<f64> for $ty {
            type Output = $ty;
            fn mul(self, rhs: f64) -> $ty {
                self * C64::new(rhs, 0.0)
            }
        }
    };
}

impl_matrix_ops!(CMat2, 2);
impl_matrix_ops!(CMat4, 4);

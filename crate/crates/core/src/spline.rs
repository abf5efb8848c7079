//! Natural cubic spline interpolation for sampled trajectories.
//!
//! C² interpolants keep finite-difference Hamiltonians continuous, and the
//! spline's own derivative replaces finite differences of the raw samples.

/// Natural cubic spline through strictly increasing knots.
#[derive(Clone, Debug)]
pub(crate) struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots (natural: zero at both ends).
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, String> {
        let n = xs.len();
        if n != ys.len() {
            return Err("x and y lengths differ".into());
        }
        if n < 2 {
            return Err("need at least two samples".into());
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err("sample times must be strictly increasing".into());
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err("samples must be finite".into());
        }

        // Thomas solve of the tridiagonal system for interior second
        // derivatives; natural boundary conditions pin m[0] = m[n-1] = 0.
        let mut m = vec![0.0; n];
        if n > 2 {
            let rows = n - 2;
            let mut diag = vec![0.0; rows];
            let mut upper = vec![0.0; rows];
            let mut rhs = vec![0.0; rows];
            for i in 0..rows {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0;
            }
            for i in 1..rows {
                let lower = upper[i - 1]; // symmetric system
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[rows] = rhs[rows - 1] / diag[rows - 1];
            for i in (1..rows).rev() {
                m[i] = (rhs[i - 1] - upper[i - 1] * m[i + 1]) / diag[i - 1];
            }
        }
        Ok(CubicSpline { xs, ys, m })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        }
    }

    /// Spline value; arguments beyond the knot range evaluate the boundary
    /// cubic (callers clamp to the path domain anyway).
    pub fn value(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }
}

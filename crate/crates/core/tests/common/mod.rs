//! Randomized-but-reproducible trajectories and gauges for the
//! integration and acceptance suites.

// each integration test compiles this module separately and uses a subset
#![allow(dead_code)]

use blochsynth::dilation::WGauge;
use blochsynth::unitary::AlphaGauge;
use blochsynth::{PathKind, PathSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Low-order Fourier series `base + Σ_k a_k sin(2πk t/τ + p_k)` with its
/// derivative, as a pair of closures.
#[derive(Clone, Copy)]
pub struct Fourier {
    base: f64,
    drift: f64,
    amp: [f64; 3],
    phase: [f64; 3],
    tau: f64,
}

impl Fourier {
    fn sample(rng: &mut StdRng, base: f64, drift: f64, max_total_amp: f64, tau: f64) -> Fourier {
        let mut amp = [0.0; 3];
        let mut phase = [0.0; 3];
        let mut budget = max_total_amp;
        for k in 0..3 {
            amp[k] = rng.gen_range(-budget / (3 - k) as f64..budget / (3 - k) as f64);
            budget -= amp[k].abs();
            // damp high harmonics so stepping error stays second-order small
            amp[k] /= ((k + 1) * (k + 1)) as f64;
            phase[k] = rng.gen_range(0.0..std::f64::consts::TAU);
        }
        Fourier {
            base,
            drift,
            amp,
            phase,
            tau,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let w0 = std::f64::consts::TAU / self.tau;
        self.base
            + self.drift * t
            + (0..3)
                .map(|k| self.amp[k] * ((k + 1) as f64 * w0 * t + self.phase[k]).sin())
                .sum::<f64>()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let w0 = std::f64::consts::TAU / self.tau;
        self.drift
            + (0..3)
                .map(|k| {
                    let wk = (k + 1) as f64 * w0;
                    self.amp[k] * wk * (wk * t + self.phase[k]).cos()
                })
                .sum::<f64>()
    }
}

/// Random smooth constant-`r` path with analytic derivatives;
/// `r0 ∈ [0.2, 1.0]`, `θ` stays inside `(0.2, π − 0.2)`.
pub fn random_unitary_path(rng: &mut StdRng, tau: f64) -> PathSpec {
    let r0 = rng.gen_range(0.2..=1.0);
    let theta = Fourier::sample(rng, std::f64::consts::FRAC_PI_2, 0.0, 0.8, tau);
    let phi_drift = rng.gen_range(-1.0..1.0);
    let phi = Fourier::sample(rng, 0.0, phi_drift, 0.5, tau);
    let phi0 = phi.value(0.0);
    PathSpec::new(
        move |_| r0,
        move |t| theta.value(t),
        move |t| phi.value(t) - phi0,
        tau,
        PathKind::Unitary,
    )
    .expect("generated path is in range")
    .with_derivatives(|_| 0.0, move |t| theta.derivative(t), move |t| phi.derivative(t))
}

/// Random smooth open path (`r` varies inside `(0.1, 0.9)`).
pub fn random_open_path(rng: &mut StdRng, tau: f64) -> PathSpec {
    let r_base = rng.gen_range(0.45..0.55);
    let r = Fourier::sample(rng, r_base, 0.0, 0.35, tau);
    let theta = Fourier::sample(rng, std::f64::consts::FRAC_PI_2, 0.0, 1.1, tau);
    let phi_drift = rng.gen_range(-1.2..1.2);
    let phi = Fourier::sample(rng, 0.0, phi_drift, 0.8, tau);
    let phi0 = phi.value(0.0);
    PathSpec::new(
        move |t| r.value(t),
        move |t| theta.value(t),
        move |t| phi.value(t) - phi0,
        tau,
        PathKind::Open,
    )
    .expect("generated path is in range")
    .with_derivatives(
        move |t| r.derivative(t),
        move |t| theta.derivative(t),
        move |t| phi.derivative(t),
    )
}

/// Random smooth gauge functions vanishing at `t = 0`, with analytic
/// derivatives.
pub fn random_alpha_gauge(rng: &mut StdRng) -> AlphaGauge {
    let mut coeffs = || {
        (
            rng.gen_range(-0.45..0.45),
            rng.gen_range(0.5..2.0),
            rng.gen_range(-0.45..0.45),
            rng.gen_range(0.5..2.0),
        )
    };
    let (a1, w1, b1, v1) = coeffs();
    let (a2, w2, b2, v2) = coeffs();
    AlphaGauge::with_derivatives(
        move |t| a1 * (w1 * t).sin() + b1 * ((v1 * t).cos() - 1.0),
        move |t| a2 * (w2 * t).sin() + b2 * ((v2 * t).cos() - 1.0),
        move |t| a1 * w1 * (w1 * t).cos() - b1 * v1 * (v1 * t).sin(),
        move |t| a2 * w2 * (w2 * t).cos() - b2 * v2 * (v2 * t).sin(),
    )
    .expect("vanishes at t = 0")
}

/// Random SU(2) rotation gauge with a smooth angle profile.
pub fn random_w_gauge(rng: &mut StdRng) -> WGauge {
    let axis = [
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0f64),
    ];
    let axis = if axis.iter().map(|x| x * x).sum::<f64>() < 1e-3 {
        [1.0, 0.0, 0.0]
    } else {
        axis
    };
    let amp = rng.gen_range(-0.8..0.8);
    let freq = rng.gen_range(0.5..2.0);
    WGauge::rotation(axis, move |t| amp * (freq * t).sin()).expect("nonzero axis")
}

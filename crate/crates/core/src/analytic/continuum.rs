// SPDX-License-Identifier: Apache-2.0

//! Continuum-limit closed forms for a flat bath of density `rho` with one
//! extra resonant mode of coupling `gamma_bar`.
//!
//! Phases refer to frames rotating at `omega0` (system) and at each mode's
//! own frequency (bath), so only magnitudes compare directly with the lab
//! frame amplitudes of `model::Propagator`. Detunings are `domega = omega0 - omega`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::ModelConfig;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumParams {
    pub gamma: f64,
    pub rho_density: f64,
    pub gamma_bar: f64,
    /// Decay constant used by every closed form below.
    pub decay: f64,
    /// `sqrt((decay/4)^2 - gamma_bar^2)`, imaginary in the oscillating regime.
    pub omega: Complex64,
}

impl ContinuumParams {
    /// Parameters with the decay constant `4 pi gamma^2 rho`.
    pub fn new(gamma: f64, rho_density: f64, gamma_bar: f64) -> Self {
        Self::with_decay(gamma, rho_density, gamma_bar, 4.0 * PI * gamma * gamma * rho_density)
    }

    /// Parameters with the golden-rule amplitude decay constant
    /// `2 pi gamma^2 rho`, under which the closed forms solve the
    /// continuum equations of motion exactly.
    pub fn golden_rule(gamma: f64, rho_density: f64, gamma_bar: f64) -> Self {
        Self::with_decay(gamma, rho_density, gamma_bar, 2.0 * PI * gamma * gamma * rho_density)
    }

    pub fn with_decay(gamma: f64, rho_density: f64, gamma_bar: f64, decay: f64) -> Self {
        let q = decay / 4.0;
        let omega = Complex64::new(q * q - gamma_bar * gamma_bar, 0.0).sqrt();
        ContinuumParams {
            gamma,
            rho_density,
            gamma_bar,
            decay,
            omega,
        }
    }

    pub fn from_config(cfg: &ModelConfig) -> Self {
        Self::new(cfg.gamma, cfg.density(), cfg.resonant_coupling())
    }

    pub fn golden_rule_from_config(cfg: &ModelConfig) -> Self {
        Self::golden_rule(cfg.gamma, cfg.density(), cfg.resonant_coupling())
    }
}

/// `sinh(w t) / w`, continuous through `w = 0`.
fn sinhc(w: Complex64, t: f64) -> Complex64 {
    let x = w * t;
    if x.norm() < 1e-8 {
        Complex64::new(t, 0.0)
    } else {
        x.sinh() / w
    }
}

/// `(1 - exp(-x t)) / x`, continuous through `x = 0`.
fn ramp(x: Complex64, t: f64) -> Complex64 {
    if (x * t).norm() < 1e-8 {
        Complex64::new(t, 0.0) * (1.0 - 0.5 * x * t)
    } else {
        -(-x * t).exp_m1() / x
    }
}

/// Derivative of `ramp` with respect to `x`.
fn ramp_prime(x: Complex64, t: f64) -> Complex64 {
    let xt = x * t;
    if xt.norm() < 1.0 {
        // sum_{n>=1} (-1)^n n (xt)^{n-1} t^2 / (n+1)!
        let mut term = Complex64::new(-0.5 * t * t, 0.0);
        let mut acc = term;
        for n in 1..40u32 {
            let n = f64::from(n);
            term *= -xt * (n + 1.0) / (n * (n + 2.0));
            acc += term;
        }
        acc
    } else {
        (t * (-x * t).exp() * x - (1.0 - (-x * t).exp())) / (x * x)
    }
}

trait ExpM1 {
    fn exp_m1(self) -> Self;
}

impl ExpM1 for Complex64 {
    fn exp_m1(self) -> Complex64 {
        // exp(a + ib) - 1 = expm1(a) cos b + (cos b - 1) + i exp(a) sin b
        let (a, b) = (self.re, self.im);
        let cos_m1 = -2.0 * (0.5 * b).sin().powi(2);
        Complex64::new(a.exp_m1() * b.cos() + cos_m1, a.exp() * b.sin())
    }
}

/// System amplitude for a flat bath.
pub fn alpha_markov(p: &ContinuumParams, alpha0: Complex64, t: f64) -> Complex64 {
    alpha0 * (-0.5 * p.decay * t).exp()
}

/// Amplitude of a flat-bath mode at detuning `domega`. Vanishes at `t = 0`
/// and tends to `-i alpha0 gamma / (decay/2 + i domega)`.
pub fn lambda_markov(p: &ContinuumParams, alpha0: Complex64, domega: f64, t: f64) -> Complex64 {
    -I * alpha0 * p.gamma * ramp(Complex64::new(0.5 * p.decay, domega), t)
}

/// System amplitude with the resonant mode present:
/// `alpha0 e^{-decay t/4} (cosh(Omega t) - (decay/4) sinh(Omega t)/Omega)`.
pub fn alpha_nonmarkov(p: &ContinuumParams, alpha0: Complex64, t: f64) -> Complex64 {
    let q = p.decay / 4.0;
    let w = p.omega;
    alpha0 * (-q * t).exp() * ((w * t).cosh() - q * sinhc(w, t))
}

/// Amplitude of the resonant mode.
pub fn lambda0_nonmarkov(p: &ContinuumParams, alpha0: Complex64, t: f64) -> Complex64 {
    -I * alpha0 * p.gamma_bar * (-p.decay / 4.0 * t).exp() * sinhc(p.omega, t)
}

/// Amplitude of a flat-bath mode at detuning `domega` with the resonant
/// mode present.
pub fn lambda_nonmarkov(p: &ContinuumParams, alpha0: Complex64, domega: f64, t: f64) -> Complex64 {
    let q = p.decay / 4.0;
    let c = Complex64::new(q, domega);
    let w = p.omega;
    // (h(w) - h(-w)) / (2w) with h(w) = (q + w) ramp(c + w).
    let quotient = if (w * t.max(1.0 / c.norm())).norm() < 1e-5 {
        ramp(c, t) + q * ramp_prime(c, t)
    } else {
        ((q + w) * ramp(c + w, t) - (q - w) * ramp(c - w, t)) / (2.0 * w)
    };
    -I * alpha0 * p.gamma * quotient
}

/// Late-time excitation density of a flat bath per unit frequency,
/// normalized to `|alpha0|^2`.
pub fn markov_lorentzian(p: &ContinuumParams, alpha0: Complex64, domega: f64) -> f64 {
    let h = 0.5 * p.decay;
    alpha0.norm_sqr() * p.decay / (2.0 * PI) / (h * h + domega * domega)
}

/// Late-time density with the resonant mode present: `|lambda(t -> inf)|^2 rho`.
pub fn nonmarkov_density(p: &ContinuumParams, alpha0: Complex64, domega: f64) -> f64 {
    let gb2 = p.gamma_bar * p.gamma_bar;
    let d2 = domega * domega;
    let num = alpha0.norm_sqr() * p.gamma * p.gamma * p.rho_density * d2;
    num / ((gb2 - d2).powi(2) + d2 * p.decay * p.decay / 4.0)
}

/// Two Lorentzians of half-width `decay/4` at `domega = +-gamma_bar`,
/// together normalized to `|alpha0|^2`; the `gamma_bar >> decay` form of
/// `nonmarkov_density`.
pub fn nonmarkov_lorentzian_pair(p: &ContinuumParams, alpha0: Complex64, domega: f64) -> f64 {
    let q = p.decay / 4.0;
    let peak = |x: f64| 1.0 / (q * q + x * x);
    alpha0.norm_sqr() * p.decay / (8.0 * PI)
        * (peak(domega - p.gamma_bar) + peak(domega + p.gamma_bar))
}

// SPDX-License-Identifier: Apache-2.0

//! One main oscillator linearly coupled to a bath of `n_env` oscillators.
//!
//! With the bath in vacuum and the system in a coherent state the global
//! state stays a product of coherent states; their amplitudes
//! `v = (alpha, lambda_1, ..., lambda_N)` obey `dv/dt = -i M v` where `M` is
//! the one-excitation (arrowhead) coupling matrix. A single spectral
//! decomposition of `M` gives `v(t)` exactly at any time.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arrowhead;
use crate::error::{Error, Result};

/// How environment fragment sizes are laid out on the fraction axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FractionGrid {
    /// About 90 log-spaced sizes from 1 to N, plus N.
    #[default]
    Coarse,
    /// Every size 1..=N.
    Full,
}

/// Physical and numerical parameters of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n_env: usize,
    pub omega0: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub gamma: f64,
    /// Coupling of the bath oscillator nearest `omega0`; `None` means `gamma`.
    pub gamma_bar: Option<f64>,
    pub alpha0: Complex64,
    pub branch_a: Complex64,
    pub branch_b: Complex64,
    pub delta: f64,
    pub time_grid: Vec<f64>,
    pub mc_samples: usize,
    pub master_seed: u64,
    pub fraction_grid: FractionGrid,
    /// Number of sampled initial amplitudes for the non-Markovianity degree.
    pub nm_samples: usize,
    /// Variance of each real component of the sampled initial amplitudes.
    pub pair_variance: f64,
}

pub const DEFAULT_TIME_POINTS: usize = 600;
pub const DEFAULT_T_MAX_GAMMA: f64 = 10.0;

impl Default for ModelConfig {
    fn default() -> Self {
        let mut cfg = ModelConfig {
            n_env: 900,
            omega0: 1.0,
            omega_min: 0.1,
            omega_max: 1.9,
            gamma: 0.1 / 30.0,
            gamma_bar: None,
            alpha0: Complex64::new(3.0, 0.0),
            branch_a: Complex64::new(1.0, 0.0),
            branch_b: Complex64::new(1.0, 0.0),
            delta: 0.05,
            time_grid: Vec::new(),
            mc_samples: 100,
            master_seed: 20_190_905,
            fraction_grid: FractionGrid::Coarse,
            nm_samples: 1000,
            pair_variance: 1.0,
        };
        cfg.time_grid = cfg.uniform_time_grid(DEFAULT_TIME_POINTS, DEFAULT_T_MAX_GAMMA);
        cfg
    }
}

impl ModelConfig {
    pub fn resonant_coupling(&self) -> f64 {
        self.gamma_bar.unwrap_or(self.gamma)
    }

    pub fn bandwidth(&self) -> f64 {
        self.omega_max - self.omega_min
    }

    /// Bath oscillators per unit frequency, `N / (omega_max - omega_min)`.
    pub fn density(&self) -> f64 {
        self.n_env as f64 / self.bandwidth()
    }

    /// Continuum decay constant `4 pi gamma^2 N / bandwidth`; `1 / rate` is
    /// the time unit of every "Gamma t" axis.
    pub fn decay_rate(&self) -> f64 {
        4.0 * PI * self.gamma * self.gamma * self.density()
    }

    /// Finite-bath revival time scale `2 pi N / bandwidth`.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI * self.density()
    }

    /// True when the time grid reaches past half the recurrence time, where
    /// the finite bath stops behaving like a continuum.
    pub fn recurrence_warning(&self) -> bool {
        self.time_grid
            .last()
            .is_some_and(|&t| t > 0.5 * self.recurrence_time())
    }

    /// `points` uniform times covering `Gamma t` in `[0, t_max_gamma]`.
    pub fn uniform_time_grid(&self, points: usize, t_max_gamma: f64) -> Vec<f64> {
        let t_max = t_max_gamma / self.decay_rate();
        match points {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..points)
                .map(|i| t_max * i as f64 / (points - 1) as f64)
                .collect(),
        }
    }

    /// Bath frequencies, uniformly spaced with both endpoints included.
    /// A single oscillator sits at the band centre.
    pub fn frequency_grid(&self) -> Vec<f64> {
        let n = self.n_env;
        if n == 1 {
            return vec![0.5 * (self.omega_min + self.omega_max)];
        }
        let step = self.bandwidth() / (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.omega_max
                } else {
                    self.omega_min + step * k as f64
                }
            })
            .collect()
    }

    /// Zero-based bath index of the grid point nearest `omega0` (lower index
    /// on ties).
    pub fn resonant_index(&self) -> usize {
        nearest_index(&self.frequency_grid(), self.omega0)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_env < 1 {
            return fail("n_env must be at least 1".into());
        }
        let finite = [
            self.omega0,
            self.omega_min,
            self.omega_max,
            self.gamma,
            self.resonant_coupling(),
            self.delta,
            self.pair_variance,
            self.alpha0.re,
            self.alpha0.im,
            self.branch_a.re,
            self.branch_a.im,
            self.branch_b.re,
            self.branch_b.im,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("all numeric parameters must be finite".into());
        }
        if !(self.omega_min < self.omega0 && self.omega0 < self.omega_max) {
            return fail(format!(
                "need omega_min < omega0 < omega_max, got {} < {} < {}",
                self.omega_min, self.omega0, self.omega_max
            ));
        }
        if self.gamma <= 0.0 {
            return fail(format!("gamma must be positive, got {}", self.gamma));
        }
        if self.resonant_coupling() < 0.0 {
            return fail("gamma_bar must be non-negative".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.mc_samples < 1 {
            return fail("mc_samples must be at least 1".into());
        }
        if self.nm_samples < 2 {
            return fail("nm_samples must be at least 2".into());
        }
        if self.pair_variance <= 0.0 {
            return fail("pair_variance must be positive".into());
        }
        if self.branch_a.norm_sqr() + self.branch_b.norm_sqr() == 0.0 {
            return fail("branch coefficients cannot both vanish".into());
        }
        match self.time_grid.first() {
            None => return fail("time grid is empty".into()),
            Some(&t0) if t0 != 0.0 => {
                return fail(format!("time grid must start at 0, starts at {t0}"))
            }
            _ => {}
        }
        if let Some(w) = self.time_grid.windows(2).find(|w| !(w[1] > w[0])) {
            return fail(format!(
                "time grid must be strictly increasing ({} then {})",
                w[0], w[1]
            ));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the configuration.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex_digest(&json)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn nearest_index(grid: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (k, w) in grid.iter().enumerate() {
        if (w - target).abs() < (grid[best] - target).abs() {
            best = k;
        }
    }
    best
}

/// One-excitation sector of the Hamiltonian: `diagonal[0] = omega0`,
/// `diagonal[k] = omega_k`, `border[k-1] = gamma_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub diagonal: Vec<f64>,
    pub border: Vec<f64>,
}

impl CouplingMatrix {
    pub fn from_parts(diagonal: Vec<f64>, border: Vec<f64>) -> Result<Self> {
        if diagonal.len() != border.len() + 1 || border.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "arrowhead needs diagonal of length border+1 >= 2, got {} and {}",
                diagonal.len(),
                border.len()
            )));
        }
        Ok(CouplingMatrix { diagonal, border })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn n_env(&self) -> usize {
        self.border.len()
    }

    /// Structural nonzeros: the diagonal plus both copies of the border.
    pub fn structural_nonzeros(&self) -> usize {
        self.dim() + 2 * self.n_env()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            _ if i == j => self.diagonal[i],
            (0, j) => self.border[j - 1],
            (i, 0) => self.border[i - 1],
            _ => 0.0,
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.entry(i, j);
            }
        }
        out
    }
}

pub fn build_coupling_matrix(config: &ModelConfig) -> Result<CouplingMatrix> {
    config.validate()?;
    let freqs = config.frequency_grid();
    let resonant = nearest_index(&freqs, config.omega0);
    let mut border = vec![config.gamma; config.n_env];
    border[resonant] = config.resonant_coupling();
    let mut diagonal = Vec::with_capacity(config.n_env + 1);
    diagonal.push(config.omega0);
    diagonal.extend(freqs);
    CouplingMatrix::from_parts(diagonal, border)
}

/// Precomputed `M = Q diag(eigenvalues) Q^T`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    /// Row-major, columns are eigenvectors.
    vectors: Vec<f64>,
    config_hash: Option<String>,
}

pub fn diagonalize(m: &CouplingMatrix) -> Result<Propagator> {
    let eig = arrowhead::eigh(m.diagonal[0], &m.diagonal[1..], &m.border)?;
    Ok(Propagator {
        eigenvalues: eig.values,
        vectors: eig.vectors,
        config_hash: None,
    })
}

/// Builds and diagonalizes the coupling matrix of `config`.
pub fn propagator_for(config: &ModelConfig) -> Result<Propagator> {
    let mut p = diagonalize(&build_coupling_matrix(config)?)?;
    p.config_hash = Some(config.content_hash());
    Ok(p)
}

impl Propagator {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_env(&self) -> usize {
        self.dim() - 1
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Component `i` of eigenvector `j`.
    pub fn eigenvector_entry(&self, i: usize, j: usize) -> f64 {
        self.vectors[i * self.dim() + j]
    }

    pub fn config_hash(&self) -> Option<&str> {
        self.config_hash.as_deref()
    }

    /// Max-abs entry of `Q Lambda Q^T - M`.
    pub fn reconstruction_error(&self, m: &CouplingMatrix) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let qi = &self.vectors[i * n..(i + 1) * n];
                let mut row_worst: f64 = 0.0;
                for j in 0..n {
                    let qj = &self.vectors[j * n..(j + 1) * n];
                    let s: f64 = qi
                        .iter()
                        .zip(qj)
                        .zip(&self.eigenvalues)
                        .map(|((a, b), l)| a * b * l)
                        .sum();
                    row_worst = row_worst.max((s - m.entry(i, j)).abs());
                }
                row_worst
            })
            .collect();
        for r in rows {
            worst = worst.max(r);
        }
        worst
    }

    /// Max-abs entry of `Q^T Q - I`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|i| self.vectors[i * n + j]).collect())
            .collect();
        (0..n)
            .into_par_iter()
            .map(|a| {
                let mut worst: f64 = 0.0;
                for b in a..n {
                    let s: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((s - target).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `(0,0)` entry of `exp(-i M t)`: `alpha(t) = gain(t) * alpha0`.
    pub fn system_gain(&self, t: f64) -> Complex64 {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let q = self.vectors[j];
                Complex64::from_polar(q * q, -self.eigenvalues[j] * t)
            })
            .sum()
    }

    /// Amplitudes at time `t` for initial state `(alpha0, 0, ..., 0)`.
    pub fn evolve(&self, alpha0: Complex64, t: f64) -> ModeAmplitudes {
        let n = self.dim();
        let phased: Vec<Complex64> = (0..n)
            .map(|j| alpha0 * Complex64::from_polar(self.vectors[j], -self.eigenvalues[j] * t))
            .collect();
        let mut v = (0..n).map(|i| {
            let row = &self.vectors[i * n..(i + 1) * n];
            row.iter()
                .zip(&phased)
                .fold(Complex64::new(0.0, 0.0), |acc, (q, c)| acc + c * q)
        });
        let alpha = v.next().expect("dimension is at least 2");
        ModeAmplitudes {
            time: t,
            alpha,
            lambdas: v.collect(),
        }
    }

    /// `evolve` over many times, in parallel; output order follows `times`.
    pub fn evolve_many(&self, alpha0: Complex64, times: &[f64]) -> Vec<ModeAmplitudes> {
        times.par_iter().map(|&t| self.evolve(alpha0, t)).collect()
    }
}

/// Coherent amplitudes of the system and every bath mode at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub time: f64,
    pub alpha: Complex64,
    pub lambdas: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationProfile {
    pub system: f64,
    pub env_total: f64,
    pub per_mode: Vec<f64>,
}

impl ModeAmplitudes {
    /// Amplitude of site `j` (0 = system, `k` = bath mode `k`).
    pub fn site(&self, j: usize) -> Complex64 {
        if j == 0 {
            self.alpha
        } else {
            self.lambdas[j - 1]
        }
    }

    pub fn n_sites(&self) -> usize {
        self.lambdas.len() + 1
    }

    pub fn total_excitations(&self) -> f64 {
        self.alpha.norm_sqr() + self.lambdas.iter().map(|l| l.norm_sqr()).sum::<f64>()
    }

    pub fn excitation_profile(&self) -> ExcitationProfile {
        let per_mode: Vec<f64> = self.lambdas.iter().map(|l| l.norm_sqr()).collect();
        ExcitationProfile {
            system: self.alpha.norm_sqr(),
            env_total: per_mode.iter().sum(),
            per_mode,
        }
    }
}

pub fn excitation_profile(m: &ModeAmplitudes) -> ExcitationProfile {
    m.excitation_profile()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small(n_env: usize, lo: f64, hi: f64, gamma: f64) -> ModelConfig {
        let mut cfg = ModelConfig {
            n_env,
            omega_min: lo,
            omega_max: hi,
            gamma,
            ..ModelConfig::default()
        };
        cfg.time_grid = cfg.uniform_time_grid(50, 10.0);
        cfg
    }

    #[test]
    fn three_by_three_construction() {
        let cfg = small(2, 0.5, 1.5, 0.1);
        let m = build_coupling_matrix(&cfg).unwrap();
        assert_eq!(m.diagonal, vec![1.0, 0.5, 1.5]);
        assert_eq!(m.border, vec![0.1, 0.1]);
    }

    #[test]
    fn default_structure_and_resonant_entry() {
        let mut cfg = ModelConfig::default();
        let m = build_coupling_matrix(&cfg).unwrap();
        assert_eq!(m.dim(), 901);
        assert_eq!(m.structural_nonzeros(), 901 + 2 * 900);
        let dense = m.to_dense();
        let nonzero = dense.iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 901 + 2 * 900);

        cfg.gamma_bar = Some(50.0 * cfg.gamma);
        let m = build_coupling_matrix(&cfg).unwrap();
        let hits: Vec<usize> = (0..900)
            .filter(|&k| m.border[k] == 50.0 * cfg.gamma)
            .collect();
        assert_eq!(hits.len(), 1);
        let freqs = cfg.frequency_grid();
        let k = hits[0];
        assert!(freqs
            .iter()
            .all(|w| (w - 1.0).abs() >= (freqs[k] - 1.0).abs()));
    }

    #[test]
    fn ties_go_to_lower_index() {
        let cfg = small(2, 0.5, 1.5, 0.1);
        assert_eq!(cfg.resonant_index(), 0);
    }

    #[test]
    fn rejects_bad_configs() {
        let d = ModelConfig::default;
        let cfg = ModelConfig { omega0: 2.5, ..d() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(ModelConfig { time_grid: vec![0.0, 1.0, 1.0], ..d() }.validate().is_err());
        assert!(ModelConfig { time_grid: vec![0.5, 1.0], ..d() }.validate().is_err());
        assert!(ModelConfig { gamma: 0.0, ..d() }.validate().is_err());
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let m = CouplingMatrix::from_parts(vec![1.0, 1.0], vec![0.1]).unwrap();
        let p = diagonalize(&m).unwrap();
        assert!((p.eigenvalues()[0] - 0.9).abs() < 1e-14);
        assert!((p.eigenvalues()[1] - 1.1).abs() < 1e-14);
    }

    #[test]
    fn decoupled_phase_rotation() {
        let m = CouplingMatrix::from_parts(vec![1.0, 0.4, 1.7], vec![0.0, 0.0]).unwrap();
        let p = diagonalize(&m).unwrap();
        let mut ev = p.eigenvalues().to_vec();
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, vec![0.4, 1.0, 1.7]);
        let a0 = Complex64::new(0.3, -0.2);
        for t in [0.0, 1.3, 17.0] {
            let amps = p.evolve(a0, t);
            let expect = a0 * Complex64::from_polar(1.0, -t);
            assert!((amps.alpha - expect).norm() < 1e-14);
            assert!(amps.lambdas.iter().all(|l| l.norm() < 1e-14));
            assert!((p.system_gain(t) - Complex64::from_polar(1.0, -t)).norm() < 1e-14);
        }
    }

    #[test]
    fn default_spectrum_invariants() {
        let cfg = ModelConfig::default();
        let m = build_coupling_matrix(&cfg).unwrap();
        let p = diagonalize(&m).unwrap();
        assert!(p.reconstruction_error(&m) <= 1e-10);
        assert!(p.orthogonality_error() <= 1e-10);
        let trace: f64 = m.diagonal.iter().sum();
        let sum: f64 = p.eigenvalues().iter().sum();
        assert!((sum - trace).abs() <= 1e-8 * trace);
    }

    #[test]
    fn identity_at_time_zero() {
        let cfg = small(40, 0.1, 1.9, 0.02);
        let p = propagator_for(&cfg).unwrap();
        let amps = p.evolve(Complex64::new(3.0, 0.0), 0.0);
        assert!((amps.alpha - Complex64::new(3.0, 0.0)).norm() < 1e-13);
        assert!(amps.lambdas.iter().all(|l| l.norm() < 1e-13));
        let prof = amps.excitation_profile();
        assert!((prof.system - 9.0).abs() < 1e-12);
        assert!(prof.env_total < 1e-24);
    }

    #[test]
    fn recurrence_scale_of_default_grid() {
        let cfg = ModelConfig::default();
        assert!((cfg.recurrence_time() - 3141.59).abs() < 0.01);
        assert!(!cfg.recurrence_warning());
        let mut long = cfg.clone();
        long.time_grid = vec![0.0, 2000.0];
        assert!(long.recurrence_warning());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn conservation_linearity_unitarity(
            n_env in 2usize..30,
            gamma in 0.001f64..0.1,
            ratio in 1.0f64..60.0,
            re in -3.0f64..3.0,
            im in -3.0f64..3.0,
            cre in -2.0f64..2.0,
            cim in -2.0f64..2.0,
            t in 0.0f64..500.0,
        ) {
            let mut cfg = small(n_env, 0.1, 1.9, gamma);
            cfg.gamma_bar = Some(ratio * gamma);
            let p = propagator_for(&cfg).unwrap();
            let a0 = Complex64::new(re, im);
            let amps = p.evolve(a0, t);
            let n0 = a0.norm_sqr();
            prop_assert!((amps.total_excitations() - n0).abs() <= 1e-9 * n0.max(1e-300));

            let c = Complex64::new(cre, cim);
            let scaled = p.evolve(c * a0, t);
            let expect = c * amps.alpha;
            prop_assert!((scaled.alpha - expect).norm() <= 1e-12 * expect.norm().max(1e-12));

            let g = p.system_gain(t);
            prop_assert!(g.norm() <= 1.0 + 1e-10);
            prop_assert!((g * a0 - amps.alpha).norm() <= 1e-12 * a0.norm().max(1.0));
        }
    }
}

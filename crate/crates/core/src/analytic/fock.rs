// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference: the full Hamiltonian on a truncated Fock space.
//!
//! The Hamiltonian conserves the total excitation number, so the space of
//! states with at most `cutoff` excitations splits into blocks of fixed
//! total number. Each block is diagonalized once; evolution inside the
//! truncated space is then exact and the only error is the truncation of
//! the initial state. Intended for `n_env <= 3`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::branches::cat_normalization;
use crate::error::{Error, Result};
use crate::model::CouplingMatrix;

/// Largest environment the oracle accepts.
pub const MAX_ENV: usize = 3;
/// Initial-state norm deficit above which the cutoff is rejected.
pub const LEAK_LIMIT: f64 = 1e-8;

#[derive(Debug)]
struct Block {
    start: usize,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

#[derive(Debug)]
pub struct FockOracle {
    cutoff: usize,
    n_modes: usize,
    basis: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    blocks: Vec<Block>,
}

/// All occupation tuples over `modes` sites with exactly `total` quanta,
/// in lexicographic order.
fn compositions(modes: usize, total: usize) -> Vec<Vec<u8>> {
    if modes == 1 {
        return vec![vec![total as u8]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(modes - 1, total - first) {
            rest.insert(0, first as u8);
            out.push(rest);
        }
    }
    out
}

/// Squared norm lost when `a |alpha0> + b |-alpha0>` (normalized) is cut
/// off above `cutoff` quanta.
pub fn cat_truncation_deficit(
    a: Complex64,
    b: Complex64,
    alpha0: Complex64,
    cutoff: usize,
) -> Result<f64> {
    let g = cat_normalization(a, b, alpha0)?;
    let x = alpha0.norm_sqr();
    // Poisson weights p_n, summed from the top of the tail downwards.
    let mut p = (-x).exp();
    let mut tail = Vec::new();
    let mut n = 0usize;
    loop {
        if n > cutoff {
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            tail.push(g * g * (a + sign * b).norm_sqr() * p);
            if p < 1e-30 && n as f64 > 2.0 * x {
                break;
            }
        }
        n += 1;
        p *= x / n as f64;
    }
    Ok(tail.iter().rev().sum())
}

/// Smallest cutoff whose truncation deficit is below `tol`.
pub fn min_cutoff(a: Complex64, b: Complex64, alpha0: Complex64, tol: f64) -> Result<usize> {
    for k in 0..200 {
        if cat_truncation_deficit(a, b, alpha0, k)? < tol {
            return Ok(k);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no cutoff below 200 quanta resolves |alpha0|^2 = {}",
        alpha0.norm_sqr()
    )))
}

impl FockOracle {
    pub fn new(m: &CouplingMatrix, cutoff: usize) -> Result<Self> {
        if m.n_env() > MAX_ENV {
            return Err(Error::InvalidArgument(format!(
                "Fock oracle handles at most {MAX_ENV} environment modes, got {}",
                m.n_env()
            )));
        }
        if cutoff > u8::MAX as usize {
            return Err(Error::InvalidArgument(format!("cutoff {cutoff} too large")));
        }
        let n_modes = m.dim();
        let mut basis = Vec::new();
        let mut blocks = Vec::new();
        for total in 0..=cutoff {
            let states = compositions(n_modes, total);
            let start = basis.len();
            let local: HashMap<&Vec<u8>, usize> =
                states.iter().enumerate().map(|(i, s)| (s, i)).collect();
            let dim = states.len();
            let mut h = DMatrix::<f64>::zeros(dim, dim);
            for (i, s) in states.iter().enumerate() {
                h[(i, i)] = s
                    .iter()
                    .zip(&m.diagonal)
                    .map(|(n, w)| f64::from(*n) * w)
                    .sum();
                // a^dagger b_k moves one quantum from mode k to the system.
                for k in 1..n_modes {
                    if s[k] == 0 {
                        continue;
                    }
                    let mut t = s.clone();
                    t[k] -= 1;
                    t[0] += 1;
                    let j = local[&t];
                    let amp = m.border[k - 1] * (f64::from(t[0]) * f64::from(s[k])).sqrt();
                    h[(j, i)] += amp;
                    h[(i, j)] += amp;
                }
            }
            let eig = h.symmetric_eigen();
            blocks.push(Block {
                start,
                values: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            });
            basis.extend(states);
        }
        let index = basis.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(FockOracle {
            cutoff,
            n_modes,
            basis,
            index,
            blocks,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Truncated, renormalized cat `a |alpha0> + b |-alpha0>` on the system
    /// with the bath in vacuum.
    pub fn initial_cat(&self, a: Complex64, b: Complex64, alpha0: Complex64) -> Result<Vec<Complex64>> {
        let leak = cat_truncation_deficit(a, b, alpha0, self.cutoff)?;
        if leak > LEAK_LIMIT {
            return Err(Error::Truncation {
                leak,
                limit: LEAK_LIMIT,
            });
        }
        let g = cat_normalization(a, b, alpha0)?;
        let mut psi = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut coherent = Complex64::new((-0.5 * alpha0.norm_sqr()).exp(), 0.0);
        let mut occ = vec![0u8; self.n_modes];
        for n in 0..=self.cutoff {
            if n > 0 {
                coherent *= alpha0 / (n as f64).sqrt();
            }
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            occ[0] = n as u8;
            psi[self.index[&occ]] = g * (a + sign * b) * coherent;
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|z| *z /= norm);
        Ok(psi)
    }

    pub fn evolve(&self, psi0: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for blk in &self.blocks {
            let dim = blk.values.len();
            let v = &blk.vectors;
            let coeffs: Vec<Complex64> = (0..dim)
                .map(|j| {
                    let c: Complex64 = (0..dim).map(|i| v[(i, j)] * psi0[blk.start + i]).sum();
                    c * Complex64::from_polar(1.0, -blk.values[j] * t)
                })
                .collect();
            for i in 0..dim {
                out[blk.start + i] = (0..dim).map(|j| v[(i, j)] * coeffs[j]).sum();
            }
        }
        out
    }

    /// Evolved cat state at time `t`.
    pub fn state(&self, a: Complex64, b: Complex64, alpha0: Complex64, t: f64) -> Result<OracleState<'_>> {
        let psi0 = self.initial_cat(a, b, alpha0)?;
        Ok(OracleState {
            oracle: self,
            time: t,
            psi: self.evolve(&psi0, t),
        })
    }
}

pub struct OracleState<'a> {
    oracle: &'a FockOracle,
    pub time: f64,
    pub psi: Vec<Complex64>,
}

impl OracleState<'_> {
    /// `<psi|psi>`, the only nonzero eigenvalue of the global density matrix.
    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Density matrix of the modes in `subset` (0 = system), in the
    /// lexicographic order of their occupation tuples.
    pub fn reduced_density(&self, subset: &[usize]) -> Result<DMatrix<Complex64>> {
        let n = self.oracle.n_modes;
        if subset.iter().any(|&j| j >= n) {
            return Err(Error::InvalidArgument(format!(
                "mode index outside 0..{n}"
            )));
        }
        let keep: Vec<bool> = (0..n).map(|j| subset.contains(&j)).collect();
        let mut rows: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut groups: BTreeMap<Vec<u8>, Vec<(Vec<u8>, Complex64)>> = BTreeMap::new();
        for (occ, amp) in self.oracle.basis.iter().zip(&self.psi) {
            let x: Vec<u8> = (0..n).filter(|&j| keep[j]).map(|j| occ[j]).collect();
            let y: Vec<u8> = (0..n).filter(|&j| !keep[j]).map(|j| occ[j]).collect();
            rows.entry(x.clone()).or_insert(0);
            groups.entry(y).or_default().push((x, *amp));
        }
        for (i, v) in rows.values_mut().enumerate() {
            *v = i;
        }
        let d = rows.len();
        let mut rho = DMatrix::<Complex64>::zeros(d, d);
        for members in groups.values() {
            for (x, ax) in members {
                for (x2, ax2) in members {
                    rho[(rows[x], rows[x2])] += ax * ax2.conj();
                }
            }
        }
        Ok(rho)
    }

    /// Von Neumann entropy (nats) of the modes in `subset`.
    pub fn entropy(&self, subset: &[usize]) -> Result<f64> {
        let rho = self.reduced_density(subset)?;
        let eig = rho.symmetric_eigen();
        // Rounding can push the top eigenvalue of a pure state just past 1.
        let s: f64 = eig
            .eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum();
        Ok(s.max(0.0))
    }

    /// `I(S:F)` for bath modes `fragment` (indices `1..`).
    pub fn mutual_information(&self, fragment: &[usize]) -> Result<f64> {
        if fragment.contains(&0) {
            return Err(Error::InvalidArgument("fragment contains the system".into()));
        }
        let mut sf = vec![0];
        sf.extend_from_slice(fragment);
        Ok(self.entropy(&[0])? + self.entropy(fragment)? - self.entropy(&sf)?)
    }

    /// `<a_j>`; for a coherent (non-cat) initial state this is the coherent
    /// amplitude of mode `j`.
    pub fn mode_amplitude(&self, j: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (occ, amp) in self.oracle.basis.iter().zip(&self.psi) {
            if occ[j] == 0 {
                continue;
            }
            let mut lower = occ.clone();
            lower[j] -= 1;
            let k = self.oracle.index[&lower];
            acc += amp * self.psi[k].conj() * f64::from(occ[j]).sqrt();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_coupling_matrix, propagator_for, ModelConfig};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn config(n_env: usize, gamma: f64, alpha0: f64) -> ModelConfig {
        ModelConfig {
            n_env,
            gamma,
            alpha0: c(alpha0),
            time_grid: vec![0.0],
            ..ModelConfig::default()
        }
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(compositions(3, 2).len(), 6);
        let cfg = config(2, 0.1, 0.8);
        let oracle = FockOracle::new(&build_coupling_matrix(&cfg).unwrap(), 10).unwrap();
        // Sum over n <= 10 of C(n + 2, 2).
        assert_eq!(oracle.dim(), 286);
    }

    #[test]
    fn cutoff_selection() {
        let k = min_cutoff(c(1.0), c(1.0), c(0.8), 1e-10).unwrap();
        assert!(cat_truncation_deficit(c(1.0), c(1.0), c(0.8), k).unwrap() < 1e-10);
        assert!(cat_truncation_deficit(c(1.0), c(1.0), c(0.8), k - 1).unwrap() >= 1e-10);
        let cfg = config(1, 0.1, 0.8);
        let oracle = FockOracle::new(&build_coupling_matrix(&cfg).unwrap(), 3).unwrap();
        assert!(matches!(
            oracle.state(c(1.0), c(1.0), c(0.8), 0.0),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn decoupled_state_stays_product() {
        let mut cfg = config(2, 0.1, 0.8);
        cfg.gamma_bar = Some(0.0);
        let mut m = build_coupling_matrix(&cfg).unwrap();
        m.border = vec![0.0; 2];
        let k = min_cutoff(c(1.0), c(1.0), c(0.8), 1e-10).unwrap();
        let oracle = FockOracle::new(&m, k).unwrap();
        let st = oracle.state(c(1.0), c(1.0), c(0.8), 7.0).unwrap();
        assert!(st.mutual_information(&[1]).unwrap().abs() < 1e-12);
        assert!(st.mutual_information(&[1, 2]).unwrap().abs() < 1e-12);
        assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitudes_match_propagator() {
        for n_env in [2, 3] {
            let cfg = config(n_env, 0.15, 0.9);
            let p = propagator_for(&cfg).unwrap();
            let k = min_cutoff(c(1.0), c(0.0), cfg.alpha0, 1e-12).unwrap();
            let oracle = FockOracle::new(&build_coupling_matrix(&cfg).unwrap(), k).unwrap();
            for t in [0.0, 1.7, 9.0, 40.0] {
                let st = oracle.state(c(1.0), c(0.0), cfg.alpha0, t).unwrap();
                let amps = p.evolve(cfg.alpha0, t);
                assert!((st.norm_sqr() - 1.0).abs() < 1e-8);
                for j in 0..=n_env {
                    let diff = (st.mode_amplitude(j) - amps.site(j)).norm();
                    assert!(diff < 1e-6, "mode {j} at t={t}: {diff:e}");
                }
            }
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Fidelity-based non-Markovianity degree.
//!
//! With the bath in vacuum the system evolves as `alpha(t) = g(t) alpha0`,
//! so two coherent initial states stay coherent and their fidelity is
//! `exp(-|g(t)|^2 |alpha01 - alpha02|^2 / 2)`. The degree sums every drop
//! of the fidelity on the time grid and maximizes over sampled pairs.

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Propagator;
use crate::seeding::task_rng;

pub fn system_gain(p: &Propagator, t: f64) -> Complex64 {
    p.system_gain(t)
}

/// `|<alpha1|alpha2>|` for coherent states.
pub fn fidelity_pure(alpha1: Complex64, alpha2: Complex64) -> f64 {
    (-0.5 * (alpha1 - alpha2).norm_sqr()).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrajectory {
    pub pair: (Complex64, Complex64),
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
}

pub fn fidelity_trajectory(
    p: &Propagator,
    pair: (Complex64, Complex64),
    times: &[f64],
) -> FidelityTrajectory {
    let fidelity = times
        .iter()
        .map(|&t| {
            let g = p.system_gain(t);
            fidelity_pure(g * pair.0, g * pair.1)
        })
        .collect();
    FidelityTrajectory {
        pair,
        times: times.to_vec(),
        fidelity,
    }
}

/// Initial amplitudes with i.i.d. normal real and imaginary parts. Pairs
/// are formed lazily.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPairs {
    pub values: Vec<Complex64>,
}

impl SampledPairs {
    /// Number of unordered pairs.
    pub fn len(&self) -> usize {
        let n = self.values.len();
        n * n.saturating_sub(1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let v = &self.values;
        (0..v.len()).flat_map(move |i| ((i + 1)..v.len()).map(move |j| (v[i], v[j])))
    }

    /// The pair with the largest separation (first in pair order on ties).
    pub fn widest(&self) -> Option<(Complex64, Complex64)> {
        let mut best: Option<((Complex64, Complex64), f64)> = None;
        for pair in self.pairs() {
            let d = (pair.0 - pair.1).norm_sqr();
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((pair, d));
            }
        }
        best.map(|b| b.0)
    }
}

pub fn sample_pairs(count: usize, seed: u64, variance: f64) -> Result<SampledPairs> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples to form a pair, got {count}"
        )));
    }
    let normal = Normal::new(0.0, variance.sqrt())
        .map_err(|e| Error::InvalidArgument(format!("bad sampling variance {variance}: {e}")))?;
    let mut rng = task_rng(seed, &[]);
    let values = (0..count)
        .map(|_| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    Ok(SampledPairs { values })
}

/// Summed fidelity drops of one pair given `|g(t_i)|^2` on the grid and the
/// squared initial separation.
pub fn pair_contribution(gain_sq: &[f64], sep_sq: f64) -> f64 {
    let mut prev = (-0.5 * gain_sq[0] * sep_sq).exp();
    let mut acc = 0.0;
    for g in &gain_sq[1..] {
        let f = (-0.5 * g * sep_sq).exp();
        if f < prev {
            acc += prev - f;
        }
        prev = f;
    }
    acc
}

/// `|g(t)|^2` on a time grid.
pub fn gain_profile(p: &Propagator, times: &[f64]) -> Vec<f64> {
    times.par_iter().map(|&t| p.system_gain(t).norm_sqr()).collect()
}

/// Largest summed fidelity drop over all sampled pairs.
pub fn nm_degree(p: &Propagator, pairs: &SampledPairs, times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidArgument("time grid needs at least 2 points".into()));
    }
    let gain_sq = gain_profile(p, times);
    Ok(nm_degree_from_gains(&gain_sq, pairs))
}

pub fn nm_degree_from_gains(gain_sq: &[f64], pairs: &SampledPairs) -> f64 {
    let v = &pairs.values;
    (0..v.len())
        .into_par_iter()
        .map(|i| {
            ((i + 1)..v.len())
                .map(|j| pair_contribution(gain_sq, (v[i] - v[j]).norm_sqr()))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

// SPDX-License-Identifier: Apache-2.0

//! Diagnostics of the map from the system's initial cat state to the state
//! of an environment fragment.
//!
//! The fragment state is `p+ sigma+ + p- sigma- + (D |A_F><B_F| + h.c.)`
//! with `sigma+- = |A_F><A_F|, |B_F><B_F|`. Dropping the `D` terms leaves a
//! measure-and-prepare map; `mp_deviation` is the spectral radius of what is
//! dropped.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::branches::{coherent_overlap, BranchState};
use crate::darwinism::{binomial_capped, sample_fragments};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct BphReport {
    pub time: f64,
    pub fragment: Vec<usize>,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Complex coefficient `D` of `|A_F><B_F|`.
    pub cross: Complex64,
    /// `|D|`.
    pub cross_d: f64,
    /// `1 - <A_F|B_F>`.
    pub distinguishability: f64,
    pub mp_deviation: f64,
}

pub fn bph_report(bs: &BranchState, fragment: &[usize]) -> Result<BphReport> {
    if fragment.contains(&0) {
        return Err(Error::InvalidArgument("fragment contains the system".into()));
    }
    let rho = bs.reduced_state(fragment)?;
    let d = rho.cross;
    let s = rho.internal_overlap;
    // Eigenvalues of [[0, D], [D*, 0]] in the Gram metric [[1, s], [s*, 1]].
    let tau = 2.0 * (d * s.conj()).re;
    let det_gram = -(2.0 * rho.ln_internal).exp_m1();
    let mp = 0.5 * tau.abs() + (0.25 * tau * tau + d.norm_sqr() * det_gram).sqrt();
    Ok(BphReport {
        time: bs.time,
        fragment: fragment.to_vec(),
        p_plus: rho.weight_pp,
        p_minus: rho.weight_mm,
        cross: d,
        cross_d: d.norm(),
        distinguishability: -rho.ln_internal.exp_m1(),
        mp_deviation: mp,
    })
}

/// Exact Born weights `Tr(|+-alpha0><+-alpha0| rho)` of the initial cat.
pub fn born_weights_exact(
    a: Complex64,
    b: Complex64,
    g: f64,
    alpha0: Complex64,
) -> (f64, f64) {
    let s = coherent_overlap(alpha0, -alpha0);
    (
        g * g * (a + b * s).norm_sqr(),
        g * g * (b + a * s.conj()).norm_sqr(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguishabilityPoint {
    pub fraction: f64,
    pub size: usize,
    pub samples: usize,
    pub mean: f64,
    /// Zero when every fragment of this size was enumerated.
    pub stderr: f64,
    /// Largest `|D|` among the sampled fragments.
    pub max_cross: f64,
    /// Largest `mp_deviation` among the sampled fragments.
    pub max_mp_deviation: f64,
}

/// Mean fragment distinguishability per fragment size.
pub fn distinguishability_curve(
    bs: &BranchState,
    sizes: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<DistinguishabilityPoint>> {
    let n_env = bs.n_env();
    sizes
        .par_iter()
        .enumerate()
        .map(|(k, &size)| {
            let frags = sample_fragments(n_env, size, samples, derive_seed(seed, &[k as u64]))?;
            let exhaustive = binomial_capped(n_env, size, samples).is_some();
            let reports: Vec<BphReport> = frags
                .iter()
                .map(|f| bph_report(bs, f))
                .collect::<Result<_>>()?;
            let n = reports.len();
            let mean = reports.iter().map(|r| r.distinguishability).sum::<f64>() / n as f64;
            let stderr = if exhaustive || n < 2 {
                0.0
            } else {
                let var = reports
                    .iter()
                    .map(|r| (r.distinguishability - mean).powi(2))
                    .sum::<f64>()
                    / (n - 1) as f64;
                (var / n as f64).sqrt()
            };
            Ok(DistinguishabilityPoint {
                fraction: size as f64 / n_env as f64,
                size,
                samples: n,
                mean,
                stderr,
                max_cross: reports.iter().map(|r| r.cross_d).fold(0.0, f64::max),
                max_mp_deviation: reports.iter().map(|r| r.mp_deviation).fold(0.0, f64::max),
            })
        })
        .collect()
}

// SPDX-License-Identifier: Apache-2.0

//! Partial information plots and the redundancy measures built on them.
//!
//! Fragments are drawn uniformly at random per fragment size. Every sample
//! gets its own generator seeded from `(master_seed, t_index, size_index,
//! sample_index)`, so results do not depend on thread count or scheduling.

use itertools::Itertools;
use rand::seq::index;
use rayon::prelude::*;

use crate::branches::BranchState;
use crate::error::{Error, Result};
use crate::model::{FractionGrid, ModelConfig, Propagator};
use crate::seeding::{derive_seed, task_rng};

/// Entropies at or below this (nats) leave `f_delta` undefined.
pub const ENTROPY_FLOOR: f64 = 1e-9;
/// `I(S:E)` at or below this makes the normalized PIP undefined.
pub const MI_FLOOR: f64 = 1e-12;
pub const COARSE_POINTS: usize = 90;

/// Fragment sizes on the fraction axis, ascending, always ending at `n_env`.
pub fn fragment_sizes(n_env: usize, grid: FractionGrid) -> Vec<usize> {
    if n_env == 0 {
        return Vec::new();
    }
    match grid {
        FractionGrid::Full => (1..=n_env).collect(),
        FractionGrid::Coarse => {
            let top = (n_env as f64).ln();
            let mut sizes: Vec<usize> = (0..COARSE_POINTS)
                .map(|i| {
                    let x = top * i as f64 / (COARSE_POINTS - 1) as f64;
                    (x.exp().round() as usize).clamp(1, n_env)
                })
                .collect();
            sizes.push(n_env);
            sizes.dedup();
            sizes
        }
    }
}

/// `C(n, k)` if it does not exceed `cap`, otherwise `None`.
pub(crate) fn binomial_capped(n: usize, k: usize, cap: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// `count` fragments of `size` distinct indices from `1..=n_env`, each
/// sorted. When there are at most `count` distinct fragments, all of them
/// are returned once in lexicographic order instead.
pub fn sample_fragments(
    n_env: usize,
    size: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if size < 1 || size > n_env {
        return Err(Error::InvalidArgument(format!(
            "fragment size {size} outside 1..={n_env}"
        )));
    }
    if binomial_capped(n_env, size, count).is_some() {
        return Ok((1..=n_env).combinations(size).collect());
    }
    Ok((0..count)
        .map(|i| draw_fragment(n_env, size, derive_seed(seed, &[i as u64])))
        .collect())
}

fn draw_fragment(n_env: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut rng = task_rng(seed, &[]);
    let mut v: Vec<usize> = index::sample(&mut rng, n_env, size)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    v.sort_unstable();
    v
}

/// Averaged mutual information versus environment fraction at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PipCurve {
    pub time: f64,
    pub fractions: Vec<f64>,
    pub sizes: Vec<usize>,
    pub mean_mi: Vec<f64>,
    /// Zero where all fragments of that size were enumerated.
    pub stderr_mi: Vec<f64>,
    pub samples: Vec<usize>,
    pub h_system: f64,
    pub mi_full: f64,
}

/// Mean and standard error of `I(S:F)` over the fragments of one size.
pub fn fragment_statistics(
    bs: &BranchState,
    size: usize,
    count: usize,
    seed: u64,
) -> Result<(f64, f64, usize)> {
    let n_env = bs.n_env();
    if size < 1 || size > n_env {
        return Err(Error::InvalidArgument(format!(
            "fragment size {size} outside 1..={n_env}"
        )));
    }
    let exhaustive = binomial_capped(n_env, size, count).is_some();
    let values: Vec<f64> = if exhaustive {
        (1..=n_env)
            .combinations(size)
            .map(|frag| {
                let (ln_f, ln_rest) = bs.fragment_logs_unchecked(&frag);
                bs.mi_from_logs(ln_f, ln_rest)
            })
            .collect::<Result<_>>()?
    } else {
        (0..count)
            .map(|i| {
                let frag = draw_fragment(n_env, size, derive_seed(seed, &[i as u64]));
                let (ln_f, ln_rest) = bs.fragment_logs_unchecked(&frag);
                bs.mi_from_logs(ln_f, ln_rest)
            })
            .collect::<Result<_>>()?
    };
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let stderr = if exhaustive || n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Ok((mean, stderr, n))
}

/// PIP of `bs` on an explicit list of fragment sizes.
pub fn pip_with_sizes(
    bs: &BranchState,
    sizes: &[usize],
    samples: usize,
    seed: u64,
) -> Result<PipCurve> {
    let n_env = bs.n_env();
    let stats: Vec<(f64, f64, usize)> = sizes
        .par_iter()
        .enumerate()
        .map(|(k, &size)| fragment_statistics(bs, size, samples, derive_seed(seed, &[k as u64])))
        .collect::<Result<_>>()?;
    Ok(PipCurve {
        time: bs.time,
        fractions: sizes.iter().map(|&m| m as f64 / n_env as f64).collect(),
        sizes: sizes.to_vec(),
        mean_mi: stats.iter().map(|s| s.0).collect(),
        stderr_mi: stats.iter().map(|s| s.1).collect(),
        samples: stats.iter().map(|s| s.2).collect(),
        h_system: bs.system_entropy()?,
        mi_full: bs.mi_full()?,
    })
}

/// PIP on the configured fraction grid; `t_index` selects the seed stream.
pub fn pip_at_time(bs: &BranchState, cfg: &ModelConfig, t_index: usize) -> Result<PipCurve> {
    let sizes = fragment_sizes(bs.n_env(), cfg.fraction_grid);
    let seed = derive_seed(cfg.master_seed, &[t_index as u64]);
    pip_with_sizes(bs, &sizes, cfg.mc_samples, seed)
}

/// `mean_mi / I(f=1)`, or `None` for a curve without correlations.
pub fn normalized_pip(p: &PipCurve) -> Option<Vec<f64>> {
    let top = *p.mean_mi.last()?;
    if top <= MI_FLOOR {
        return None;
    }
    Some(p.mean_mi.iter().map(|m| m / top).collect())
}

/// Smallest grid fraction whose mean information exceeds `(1 - delta) H(S)`.
pub fn f_delta(p: &PipCurve, delta: f64) -> Option<f64> {
    if p.h_system <= ENTROPY_FLOOR {
        return None;
    }
    let target = (1.0 - delta) * p.h_system;
    p.mean_mi
        .iter()
        .position(|&m| m > target)
        .map(|i| p.fractions[i])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyTrace {
    pub times: Vec<f64>,
    pub gamma_times: Vec<f64>,
    pub h_system: Vec<f64>,
    pub mi_full: Vec<f64>,
    pub f_delta: Vec<Option<f64>>,
    pub r_delta: Vec<Option<f64>>,
    /// `R_delta * I(S:E)`, zero where `f_delta` is undefined.
    pub r_rel: Vec<f64>,
}

impl RedundancyTrace {
    pub fn from_curves(curves: &[PipCurve], delta: f64, decay_rate: f64) -> Self {
        let f: Vec<Option<f64>> = curves.iter().map(|c| f_delta(c, delta)).collect();
        let r_delta: Vec<Option<f64>> = f.iter().map(|x| x.map(f64::recip)).collect();
        RedundancyTrace {
            times: curves.iter().map(|c| c.time).collect(),
            gamma_times: curves.iter().map(|c| c.time * decay_rate).collect(),
            h_system: curves.iter().map(|c| c.h_system).collect(),
            mi_full: curves.iter().map(|c| c.mi_full).collect(),
            r_rel: r_delta
                .iter()
                .zip(curves)
                .map(|(r, c)| r.map_or(0.0, |r| r * c.mi_full))
                .collect(),
            f_delta: f,
            r_delta,
        }
    }
}

/// Branch state at every point of the configured time grid.
pub fn branch_states(p: &Propagator, cfg: &ModelConfig) -> Result<Vec<BranchState>> {
    cfg.time_grid
        .par_iter()
        .map(|&t| BranchState::new(cfg.branch_a, cfg.branch_b, cfg.alpha0, p.evolve(cfg.alpha0, t)))
        .collect()
}

/// One PIP per time-grid point.
pub fn pip_map(p: &Propagator, cfg: &ModelConfig) -> Result<Vec<PipCurve>> {
    cfg.validate()?;
    let states = branch_states(p, cfg)?;
    states
        .par_iter()
        .enumerate()
        .map(|(i, bs)| pip_at_time(bs, cfg, i))
        .collect()
}

pub fn redundancy_trace(p: &Propagator, cfg: &ModelConfig) -> Result<RedundancyTrace> {
    let curves = pip_map(p, cfg)?;
    Ok(RedundancyTrace::from_curves(&curves, cfg.delta, cfg.decay_rate()))
}

/// Time average of `R_r` over `[t_min, t_max]` by the trapezoidal rule on
/// the trace grid, with linear interpolation at the window edges.
pub fn averaged_relative_redundancy(
    trace: &RedundancyTrace,
    t_min: f64,
    t_max: f64,
) -> Result<f64> {
    let ts = &trace.times;
    let ys = &trace.r_rel;
    let (Some(&first), Some(&last)) = (ts.first(), ts.last()) else {
        return Err(Error::InvalidArgument("empty redundancy trace".into()));
    };
    let slack = 1e-12 * last.abs().max(1.0);
    if !(t_max > t_min) || t_min < first - slack || t_max > last + slack {
        return Err(Error::InvalidArgument(format!(
            "averaging window [{t_min}, {t_max}] is empty or outside [{first}, {last}]"
        )));
    }
    let (t_min, t_max) = (t_min.max(first), t_max.min(last));
    let at = |t: f64| -> f64 {
        let i = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
        let (t0, t1) = (ts[i - 1], ts[i]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        ys[i - 1] + w * (ys[i] - ys[i - 1])
    };
    let mut knots = vec![(t_min, at(t_min))];
    knots.extend(
        ts.iter()
            .zip(ys)
            .filter(|(t, _)| **t > t_min && **t < t_max)
            .map(|(t, y)| (*t, *y)),
    );
    knots.push((t_max, at(t_max)));
    let area: f64 = knots
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    Ok(area / (t_max - t_min))
}

/// Sum of the increases of `f_delta` between consecutive defined points.
pub fn non_monotonicity(trace: &RedundancyTrace) -> Option<f64> {
    non_monotonicity_of(&trace.f_delta)
}

pub fn non_monotonicity_of(series: &[Option<f64>]) -> Option<f64> {
    if series.iter().flatten().count() < 2 {
        return None;
    }
    Some(
        series
            .windows(2)
            .filter_map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => Some((b - a).max(0.0)),
                _ => None,
            })
            .sum(),
    )
}

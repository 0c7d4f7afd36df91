// SPDX-License-Identifier: Apache-2.0

//! Statistics of `X(F) = sum_{k in F} p_k` over uniformly random fragments
//! `F` of fixed size, and the two box-shaped excitation profiles used to
//! probe how `X` concentrates around `p f`.

use crate::darwinism::sample_fragments;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationStats {
    pub fraction: f64,
    pub size: usize,
    pub samples: usize,
    /// `p f`, the exact expectation of `X`.
    pub expected: f64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub stderr: f64,
    /// Largest `|X - p f|` among the samples.
    pub max_dev: f64,
}

/// Fragment size `f N`, which must be a positive integer up to rounding.
pub fn fraction_to_size(n: usize, f: f64) -> Result<usize> {
    let x = f * n as f64;
    let size = x.round();
    if !(size >= 1.0 && size <= n as f64) || (x - size).abs() > 1e-9 * x.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction {f} of {n} oscillators is not a positive whole number"
        )));
    }
    Ok(size as usize)
}

pub fn concentration_stats(
    profile: &[f64],
    f: f64,
    samples: usize,
    seed: u64,
) -> Result<ConcentrationStats> {
    if profile.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidArgument(
            "excitation profile must be finite and nonnegative".into(),
        ));
    }
    if samples < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let n = profile.len();
    let size = fraction_to_size(n, f)?;
    let total: f64 = profile.iter().sum();
    let expected = total * size as f64 / n as f64;
    let xs: Vec<f64> = sample_fragments(n, size, samples, seed)?
        .iter()
        .map(|frag| frag.iter().map(|&k| profile[k - 1]).sum())
        .collect();
    let m = xs.len();
    let mean = xs.iter().sum::<f64>() / m as f64;
    let variance = if m > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64
    } else {
        0.0
    };
    Ok(ConcentrationStats {
        fraction: f,
        size,
        samples: m,
        expected,
        mean,
        variance,
        stderr: (variance / m as f64).sqrt(),
        max_dev: xs.iter().map(|x| (x - expected).abs()).fold(0.0, f64::max),
    })
}

/// Total `p` spread evenly over the indices `k` (1-based) with
/// `|k/n - 1/2| < a/2`.
pub fn rectangular_profile(n: usize, a: f64, p: f64) -> Result<Vec<f64>> {
    box_profile(n, p, |x| (x - 0.5).abs() < a / 2.0, a)
}

/// Total `p` spread evenly over two boxes of width `a/2` centred at `n/4`
/// and `3n/4`.
pub fn double_rectangular_profile(n: usize, a: f64, p: f64) -> Result<Vec<f64>> {
    box_profile(
        n,
        p,
        |x| (x - 0.25).abs() < a / 4.0 || (x - 0.75).abs() < a / 4.0,
        a,
    )
}

fn box_profile(n: usize, p: f64, inside: impl Fn(f64) -> bool, a: f64) -> Result<Vec<f64>> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidArgument(format!("box width {a} outside (0, 1)")));
    }
    let mask: Vec<bool> = (1..=n).map(|k| inside(k as f64 / n as f64)).collect();
    let count = mask.iter().filter(|m| **m).count();
    if count == 0 {
        return Err(Error::InvalidArgument(format!(
            "box of width {a} holds no index out of {n}"
        )));
    }
    let height = p / count as f64;
    Ok(mask.iter().map(|&m| if m { height } else { 0.0 }).collect())
}

// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand. Each returns its tables plus an optional
//! failed check; tables are written even when a check fails so the numbers
//! behind the failure can be inspected.

use itertools::Itertools;

use super::config::RunConfig;
use super::output::{num, opt, Stopwatch, Table};
use crate::analytic::concentration::fraction_to_size;
use crate::analytic::{
    concentration_stats, double_rectangular_profile, min_cutoff, rectangular_profile,
    ConcentrationStats, FockOracle,
};
use crate::bph::distinguishability_curve;
use crate::branches::BranchState;
use crate::darwinism::{
    averaged_relative_redundancy, non_monotonicity, pip_map, RedundancyTrace,
};
use crate::error::Result;
use crate::model::{build_coupling_matrix, propagator_for, ModelConfig};
use crate::nonmarkov::{gain_profile, nm_degree_from_gains, sample_pairs};
use crate::seeding::derive_seed;

/// Relative tolerance of the excitation-number check.
pub const CONSERVATION_TOL: f64 = 1e-9;
/// Largest accepted disagreement between the branch formulas and the Fock
/// oracle.
pub const ORACLE_TOL: f64 = 1e-6;

#[derive(Debug)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Description of a failed consistency check, if any.
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(tables: Vec<Table>) -> Self {
        Outcome {
            tables,
            failure: None,
        }
    }
}

fn with_ratio(model: &ModelConfig, ratio: f64) -> ModelConfig {
    ModelConfig {
        gamma_bar: Some(ratio * model.gamma),
        ..model.clone()
    }
}

/// Sizes nearest `f * n`, at least one.
fn sizes_for(n: usize, fractions: &[f64]) -> Vec<usize> {
    fractions
        .iter()
        .map(|f| ((f * n as f64).round() as usize).clamp(1, n))
        .collect()
}

pub fn dynamics(cfg: &RunConfig, clock: &mut Stopwatch) -> Result<Outcome> {
    let m = &cfg.model;
    let p = propagator_for(m)?;
    clock.lap("diagonalize");
    let states = p.evolve_many(m.alpha0, &m.time_grid);
    clock.lap("evolve");
    let rate = m.decay_rate();
    let n0 = m.alpha0.norm_sqr();
    let mut table = Table::new(
        "dynamics.csv",
        &["t", "gamma_t", "system", "environment", "total"],
    );
    let mut worst = 0.0f64;
    for s in &states {
        let e = s.excitation_profile();
        let total = e.system + e.env_total;
        worst = worst.max((total - n0).abs());
        table.push(vec![
            num(s.time),
            num(s.time * rate),
            num(e.system),
            num(e.env_total),
            num(total),
        ]);
    }
    let mut modes = Table::new("modes.csv", &["t", "gamma_t", "k", "omega", "excitation"]);
    if let Some(last) = states.last() {
        for (k, (w, x)) in m
            .frequency_grid()
            .iter()
            .zip(last.excitation_profile().per_mode)
            .enumerate()
        {
            modes.push(vec![
                num(last.time),
                num(last.time * rate),
                (k + 1).to_string(),
                num(*w),
                num(x),
            ]);
        }
    }
    let failure = (worst > CONSERVATION_TOL * n0).then(|| {
        format!("excitation number drifts by {worst:e}, limit {:e}", CONSERVATION_TOL * n0)
    });
    Ok(Outcome {
        tables: vec![table, modes],
        failure,
    })
}

pub fn pip(cfg: &RunConfig, clock: &mut Stopwatch) -> Result<Outcome> {
    let m = &cfg.model;
    let p = propagator_for(m)?;
    clock.lap("diagonalize");
    let curves = pip_map(&p, m)?;
    clock.lap("pip");
    let rate = m.decay_rate();
    let mut table = Table::new(
        "pip.csv",
        &["t", "gamma_t", "f", "size", "samples", "mean_mi", "stderr", "h_system"],
    );
    for c in &curves {
        for i in 0..c.sizes.len() {
            table.push(vec![
                num(c.time),
                num(c.time * rate),
                num(c.fractions[i]),
                c.sizes[i].to_string(),
                c.samples[i].to_string(),
                num(c.mean_mi[i]),
                num(c.stderr_mi[i]),
                num(c.h_system),
            ]);
        }
    }
    Ok(Outcome::ok(vec![table]))
}

fn trace_table(file: &str, trace: &RedundancyTrace) -> Table {
    let mut table = Table::new(
        file,
        &["t", "gamma_t", "h_system", "mi_full", "f_delta", "r_delta", "r_rel"],
    );
    for i in 0..trace.times.len() {
        table.push(vec![
            num(trace.times[i]),
            num(trace.gamma_times[i]),
            num(trace.h_system[i]),
            num(trace.mi_full[i]),
            opt(trace.f_delta[i]),
            opt(trace.r_delta[i]),
            num(trace.r_rel[i]),
        ]);
    }
    table
}

pub fn redundancy(cfg: &RunConfig, clock: &mut Stopwatch) -> Result<Outcome> {
    let m = &cfg.model;
    let p = propagator_for(m)?;
    clock.lap("diagonalize");
    let curves = pip_map(&p, m)?;
    clock.lap("pip");
    let trace = RedundancyTrace::from_curves(&curves, m.delta, m.decay_rate());
    Ok(Outcome::ok(vec![trace_table("redundancy.csv", &trace)]))
}

pub fn nonmarkov(cfg: &RunConfig, clock: &mut Stopwatch) -> Result<Outcome> {
    let m = &cfg.model;
    // The same initial amplitudes serve every coupling.
    let pairs = sample_pairs(m.nm_samples, m.master_seed, m.pair_variance)?;
    let rate = m.decay_rate();
    let mut table = Table::new("nonmarkov.csv", &["gamma_bar_ratio", "gamma_bar", "nm_degree"]);
    let mut gains = Table::new("gain.csv", &["t", "gamma_t", "gamma_bar_ratio", "gain_sq"]);
    for &ratio in &cfg.sweep_ratios {
        let mr = with_ratio(m, ratio);
        let p = propagator_for(&mr)?;
        let g = gain_profile(&p, &mr.time_grid);
        let n = nm_degree_from_gains(&g, &pairs);
        clock.lap(&format!("ratio {ratio}"));
        table.push(vec![num(ratio), num(mr.resonant_coupling()), num(n)]);
        for (t, g) in mr.time_grid.iter().zip(&g) {
            gains.push(vec![num(*t), num(t * rate), num(ratio), num(*g)]);
        }
    }
    Ok(Outcome::ok(vec![table, gains]))
}

pub fn sweep(cfg: &RunConfig, clock: &mut Stopwatch) -> Result<Outcome> {
    let m = &cfg.model;
    let pairs = sample_pairs(m.nm_samples, m.master_seed, m.pair_variance)?;
    let t_end = *m.time_grid.last().expect("validated grid");
    let mut table = Table::new(
        "sweep.csv",
        &["gamma_bar_ratio", "gamma_bar", "nm_degree", "nm_qd", "rbar_r"],
    );
    let mut traces = Table::new(
        "sweep_traces.csv",
        &["gamma_bar_ratio", "t", "gamma_t", "f_delta", "r_delta", "r_rel"],
    );
    for &ratio in &cfg.sweep_ratios {
        let mr = with_ratio(m, ratio);
        let p = propagator_for(&mr)?;
        let n = nm_degree_from_gains(&gain_profile(&p, &mr.time_grid), &pairs);
        let curves = pip_map(&p, &mr)?;
        let trace = RedundancyTrace::from_curves(&curves, mr.delta, mr.decay_rate());
        let rbar = averaged_relative_redundancy(&trace, 0.0, t_end)?;
        clock.lap(&format!("ratio {ratio}"));
        table.push(vec![
            num(ratio),
            num(mr.resonant_coupling()),
            num(n),
            opt(non_monotonicity(&trace)),
            num(rbar),
        ]);
        for i in 0..trace.times.len() {
            traces.push(vec![
                num(ratio),
                num(trace.times[i]),
                num(trace.gamma_times[i]),
                opt(trace.f_delta[i]),
                opt(trace.r_delta[i]),
                num(trace.r_rel[i]),
            ]);
        }
    }
    Ok(Outcome::ok(vec![table, traces]))
}

pub fn bph(cfg: &RunConfig, clock: &mut Stopwatch) -> Result<Outcome> {
    let m = &cfg.model;
    let p = propagator_for(m)?;
    clock.lap("diagonalize");
    let rate = m.decay_rate();
    let sizes = sizes_for(m.n_env, &cfg.bph.fractions);
    let x0 = m.alpha0.norm_sqr();
    let mut table = Table::new(
        "bph.csv",
        &[
            "t",
            "gamma_t",
            "f",
            "size",
            "samples",
            "distinguishability",
            "stderr",
            "asymptote",
            "cross_d_max",
            "mp_deviation_max",
        ],
    );
    for (i, &tg) in cfg.bph.t_gamma.iter().enumerate() {
        let t = tg / rate;
        let bs = BranchState::new(m.branch_a, m.branch_b, m.alpha0, p.evolve(m.alpha0, t))?;
        let curve = distinguishability_curve(
            &bs,
            &sizes,
            m.mc_samples,
            derive_seed(m.master_seed, &[i as u64]),
        )?;
        for pt in curve {
            table.push(vec![
                num(t),
                num(tg),
                num(pt.fraction),
                pt.size.to_string(),
                pt.samples.to_string(),
                num(pt.mean),
                num(pt.stderr),
                num(-(-2.0 * x0 * pt.fraction).exp_m1()),
                num(pt.max_cross),
                num(pt.max_mp_deviation),
            ]);
        }
    }
    clock.lap("fragments");
    Ok(Outcome::ok(vec![table]))
}

pub fn concentration(cfg: &RunConfig, clock: &mut Stopwatch) -> Result<Outcome> {
    let c = &cfg.concentration;
    let m = &cfg.model;
    let mut table = Table::new(
        "concentration.csv",
        &[
            "profile", "n", "t", "gamma_t", "f", "size", "samples", "expected", "mean",
            "variance", "stderr", "max_dev",
        ],
    );
    let mut push = |name: &str, n: usize, time: Option<(f64, f64)>, s: ConcentrationStats| {
        table.push(vec![
            name.to_string(),
            n.to_string(),
            opt(time.map(|t| t.0)),
            opt(time.map(|t| t.1)),
            num(s.fraction),
            s.size.to_string(),
            s.samples.to_string(),
            num(s.expected),
            num(s.mean),
            num(s.variance),
            num(s.stderr),
            num(s.max_dev),
        ]);
    };
    for (j, &n) in c.sizes.iter().enumerate() {
        fraction_to_size(n, c.fraction)?;
        let rect = rectangular_profile(n, c.width, c.total)?;
        let seed = derive_seed(m.master_seed, &[0, j as u64]);
        push("rectangular", n, None, concentration_stats(&rect, c.fraction, c.samples, seed)?);
        let double = double_rectangular_profile(n, c.width, c.total)?;
        let seed = derive_seed(m.master_seed, &[1, j as u64]);
        push("double_rectangular", n, None, concentration_stats(&double, c.fraction, c.samples, seed)?);
    }
    clock.lap("prototypes");
    let p = propagator_for(m)?;
    let t = c.t_gamma / m.decay_rate();
    let profile = p.evolve(m.alpha0, t).excitation_profile().per_mode;
    let seed = derive_seed(m.master_seed, &[2]);
    push(
        "simulated",
        m.n_env,
        Some((t, c.t_gamma)),
        concentration_stats(&profile, c.fraction, c.samples, seed)?,
    );
    clock.lap("simulated");
    Ok(Outcome::ok(vec![table]))
}

pub fn oracle(cfg: &RunConfig, clock: &mut Stopwatch) -> Result<Outcome> {
    let om = cfg.oracle.model(&cfg.model);
    let (a, b, a0) = (om.branch_a, om.branch_b, om.alpha0);
    let cutoff = match cfg.oracle.cutoff {
        Some(k) => k,
        None => min_cutoff(a, b, a0, 1e-10)?,
    };
    let oracle = FockOracle::new(&build_coupling_matrix(&om)?, cutoff)?;
    let p = propagator_for(&om)?;
    clock.lap("setup");
    let rate = om.decay_rate();
    let fragments: Vec<Vec<usize>> = (1..=om.n_env)
        .powerset()
        .filter(|f| !f.is_empty())
        .collect();
    let mut table = Table::new(
        "oracle.csv",
        &[
            "t",
            "gamma_t",
            "fragment",
            "h_s_branch",
            "h_s_fock",
            "h_f_branch",
            "h_f_fock",
            "mi_branch",
            "mi_fock",
        ],
    );
    let mut worst = 0.0f64;
    for &t in &om.time_grid {
        let st = oracle.state(a, b, a0, t)?;
        let bs = BranchState::new(a, b, a0, p.evolve(a0, t))?;
        let hs = (bs.system_entropy()?, st.entropy(&[0])?);
        for f in &fragments {
            let hf = (bs.reduced_state(f)?.entropy()?, st.entropy(f)?);
            let mi = (bs.mutual_information(f)?, st.mutual_information(f)?);
            worst = worst
                .max((hs.0 - hs.1).abs())
                .max((hf.0 - hf.1).abs())
                .max((mi.0 - mi.1).abs());
            table.push(vec![
                num(t),
                num(t * rate),
                f.iter().join("+"),
                num(hs.0),
                num(hs.1),
                num(hf.0),
                num(hf.1),
                num(mi.0),
                num(mi.1),
            ]);
        }
    }
    clock.lap("compare");
    let failure = (worst > ORACLE_TOL).then(|| {
        format!("branch formulas and Fock oracle differ by {worst:e}, limit {ORACLE_TOL:e}")
    });
    Ok(Outcome {
        tables: vec![table],
        failure,
    })
}


// SPDX-License-Identifier: Apache-2.0

//! Two-branch pure states `G (a |A> + b |B>)` where `|A>` and `|B>` are
//! products of single-site states with real overlaps `s_j = <A_j|B_j>`.
//!
//! For the oscillator model `|A> = |alpha, lambda_1, ...>` and `|B>` is the
//! same with every amplitude negated, so `s_j = exp(-2 |amp_j|^2)`. Every
//! reduced state lives in the span of the two branch restrictions and is
//! fixed by two numbers: the overlap inside the subsystem and the overlap
//! of its complement. Overlaps are carried as logarithms so products like
//! `exp(-18)` and far smaller never underflow.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModeAmplitudes;

/// `<mu|nu>` for coherent states.
pub fn coherent_overlap(mu: Complex64, nu: Complex64) -> Complex64 {
    (-0.5 * mu.norm_sqr() - 0.5 * nu.norm_sqr() + mu.conj() * nu).exp()
}

/// Normalization `G` of `a |alpha0> + b |-alpha0>`.
pub fn cat_normalization(a: Complex64, b: Complex64, alpha0: Complex64) -> Result<f64> {
    norm_from_overlap(a, b, coherent_overlap(-alpha0, alpha0).re)
}

fn norm_from_overlap(a: Complex64, b: Complex64, overlap: f64) -> Result<f64> {
    let arg = a.norm_sqr() + b.norm_sqr() + 2.0 * (a * b.conj()).re * overlap;
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "branch superposition is not normalizable (norm^2 = {arg})"
        )));
    }
    Ok(arg.sqrt().recip())
}

/// Tolerance on reduced-state eigenvalues before they count as inconsistent.
pub const EIGENVALUE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct BranchState {
    pub coeff_a: Complex64,
    pub coeff_b: Complex64,
    pub norm_g: f64,
    pub time: f64,
    pub amplitudes: Option<ModeAmplitudes>,
    /// Entry `j` is `<A_j|B_j>`; index 0 is the system.
    pub per_site_overlap: Vec<f64>,
    ln_overlap: Vec<f64>,
    ln_env_total: f64,
}

impl BranchState {
    /// Branch state of the oscillator model, with `G` taken from the initial
    /// cat `a |alpha0> + b |-alpha0>`.
    pub fn new(
        a: Complex64,
        b: Complex64,
        alpha0: Complex64,
        amps: ModeAmplitudes,
    ) -> Result<Self> {
        let norm_g = cat_normalization(a, b, alpha0)?;
        let ln_overlap: Vec<f64> = std::iter::once(amps.alpha)
            .chain(amps.lambdas.iter().copied())
            .map(|z| -2.0 * z.norm_sqr())
            .collect();
        let mut bs = Self::assemble(a, b, norm_g, amps.time, ln_overlap);
        bs.amplitudes = Some(amps);
        Ok(bs)
    }

    /// Generic fixture from explicit per-site overlaps in `[0, 1]`
    /// (index 0 = system). `G` follows from their product.
    pub fn from_site_overlaps(
        a: Complex64,
        b: Complex64,
        overlaps: &[f64],
        time: f64,
    ) -> Result<Self> {
        if overlaps.len() < 2 {
            return Err(Error::InvalidArgument(
                "need a system site and at least one environment site".into(),
            ));
        }
        if let Some(x) = overlaps.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidArgument(format!(
                "site overlap {x} outside [0, 1]"
            )));
        }
        let ln_overlap: Vec<f64> = overlaps.iter().map(|x| x.ln()).collect();
        let total: f64 = ln_overlap.iter().sum();
        let norm_g = norm_from_overlap(a, b, total.exp())?;
        Ok(Self::assemble(a, b, norm_g, time, ln_overlap))
    }

    fn assemble(
        a: Complex64,
        b: Complex64,
        norm_g: f64,
        time: f64,
        ln_overlap: Vec<f64>,
    ) -> Self {
        let ln_env_total = ln_overlap[1..].iter().sum();
        BranchState {
            coeff_a: a,
            coeff_b: b,
            norm_g,
            time,
            amplitudes: None,
            per_site_overlap: ln_overlap.iter().map(|l| l.exp()).collect(),
            ln_overlap,
            ln_env_total,
        }
    }

    pub fn n_env(&self) -> usize {
        self.ln_overlap.len() - 1
    }

    pub fn n_sites(&self) -> usize {
        self.ln_overlap.len()
    }

    /// `ln <A_j|B_j>` for every site.
    pub fn ln_site_overlaps(&self) -> &[f64] {
        &self.ln_overlap
    }

    /// `ln` of the overlap of the whole environment.
    pub fn ln_env_overlap(&self) -> f64 {
        self.ln_env_total
    }

    fn check_subset(&self, subset: &[usize], env_only: bool) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.n_sites()];
        for &j in subset {
            if j >= self.n_sites() || (env_only && j == 0) {
                return Err(Error::InvalidArgument(format!(
                    "site index {j} outside {}..={}",
                    usize::from(env_only),
                    self.n_env()
                )));
            }
            if mask[j] {
                return Err(Error::InvalidArgument(format!("site index {j} repeated")));
            }
            mask[j] = true;
        }
        Ok(mask)
    }

    fn ln_sum(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&j| self.ln_overlap[j]).sum()
    }

    /// `prod_{j in subset} <A_j|B_j>`, summed in log space.
    pub fn branch_subset_overlap(&self, subset: &[usize]) -> Result<f64> {
        self.check_subset(subset, false)?;
        Ok(self.ln_sum(subset).exp())
    }

    /// Reduced state of the sites in `subset` (0 = system).
    pub fn reduced_state(&self, subset: &[usize]) -> Result<Rank2State> {
        let mask = self.check_subset(subset, false)?;
        let ln_in = self.ln_sum(subset);
        let ln_out = (0..self.n_sites())
            .filter(|&j| !mask[j])
            .map(|j| self.ln_overlap[j])
            .sum();
        Ok(self.rank2(ln_in, ln_out))
    }

    fn rank2(&self, ln_in: f64, ln_out: f64) -> Rank2State {
        let g2 = self.norm_g * self.norm_g;
        Rank2State {
            weight_pp: g2 * self.coeff_a.norm_sqr(),
            weight_mm: g2 * self.coeff_b.norm_sqr(),
            cross: g2 * self.coeff_a * self.coeff_b.conj() * ln_out.exp(),
            internal_overlap: Complex64::new(ln_in.exp(), 0.0),
            ln_internal: ln_in,
            ln_external: ln_out,
        }
    }

    /// Log overlaps of an environment fragment and of the remaining
    /// environment. Inputs are trusted to be distinct indices in `1..=n_env`.
    pub(crate) fn fragment_logs_unchecked(&self, fragment: &[usize]) -> (f64, f64) {
        let ln_f = self.ln_sum(fragment);
        if self.ln_env_total.is_finite() {
            return (ln_f, (self.ln_env_total - ln_f).min(0.0));
        }
        let mut mask = vec![false; self.n_sites()];
        fragment.iter().for_each(|&j| mask[j] = true);
        let rest = (1..self.n_sites())
            .filter(|&j| !mask[j])
            .map(|j| self.ln_overlap[j])
            .sum();
        (ln_f, rest)
    }

    /// `I(S:F)` from the log overlaps of the fragment and of the rest of the
    /// environment; depends on nothing else.
    pub fn mi_from_logs(&self, ln_f: f64, ln_rest: f64) -> Result<f64> {
        let ln_s = self.ln_overlap[0];
        let h_s = self.rank2(ln_s, ln_f + ln_rest).entropy()?;
        let h_f = self.rank2(ln_f, ln_s + ln_rest).entropy()?;
        let h_sf = self.rank2(ln_s + ln_f, ln_rest).entropy()?;
        Ok(h_s + h_f - h_sf)
    }

    /// `H(S)` in nats.
    pub fn system_entropy(&self) -> Result<f64> {
        self.rank2(self.ln_overlap[0], self.ln_env_total).entropy()
    }

    /// `I(S:E)`; equals `2 H(S)` since the global state is pure.
    pub fn mi_full(&self) -> Result<f64> {
        self.mi_from_logs(self.ln_env_total, 0.0)
    }

    /// `I(S:F) = H(S) + H(F) - H(SF)` for a fragment of environment modes.
    pub fn mutual_information(&self, fragment: &[usize]) -> Result<f64> {
        self.check_subset(fragment, true)?;
        let (ln_f, ln_rest) = self.fragment_logs_unchecked(fragment);
        self.mi_from_logs(ln_f, ln_rest)
    }
}

/// Reduced state `G^2 (|a|^2 |A><A| + |b|^2 |B><B| + c |A><B| + c* |B><A|)`
/// restricted to a subsystem `X`, with `s = <A_X|B_X>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank2State {
    pub weight_pp: f64,
    pub weight_mm: f64,
    pub cross: Complex64,
    pub internal_overlap: Complex64,
    /// `ln |s|`.
    pub ln_internal: f64,
    /// `ln` of the complement overlap that sets `|cross|`.
    pub ln_external: f64,
}

impl Rank2State {
    /// Eigenvalues of `S^{1/2} M S^{1/2}`, largest first, clamped to [0, 1].
    ///
    /// Equivalent to the spectrum of `M S`. Both determinants are formed as
    /// `1 - exp(2 ln x)` so nearly pure states keep their small eigenvalue.
    pub fn eigenvalues(&self) -> Result<[f64; 2]> {
        let (p, q) = (self.weight_pp, self.weight_mm);
        let s = self.internal_overlap;
        let trace = p + q + 2.0 * (self.cross * s.conj()).re;
        let det_gram = -(2.0 * self.ln_internal).exp_m1();
        let det_weights = p * q * -(2.0 * self.ln_external).exp_m1();
        let det = det_weights * det_gram;
        let disc = (trace * trace - 4.0 * det).max(0.0);
        let l1 = 0.5 * (trace + disc.sqrt());
        let l2 = if l1 > 0.0 { det / l1 } else { 0.0 };
        for l in [l1, l2] {
            if !(-EIGENVALUE_SLACK..=1.0 + EIGENVALUE_SLACK).contains(&l) {
                return Err(Error::Numerical(format!(
                    "reduced-state eigenvalue {l} outside [0, 1]"
                )));
            }
        }
        Ok([l1.clamp(0.0, 1.0), l2.clamp(0.0, 1.0)])
    }

    /// Von Neumann entropy in nats, evaluated through the small eigenvalue's
    /// share `e` of the trace as `-(1-e) ln(1-e) - e ln e`.
    pub fn entropy(&self) -> Result<f64> {
        let [l1, l2] = self.eigenvalues()?;
        let total = l1 + l2;
        if total <= 0.0 {
            return Ok(0.0);
        }
        let e = (l2 / total).min(0.5);
        if e <= 0.0 {
            return Ok(0.0);
        }
        Ok(-(1.0 - e) * (-e).ln_1p() - e * e.ln())
    }
}

pub fn entropy(rho: &Rank2State) -> Result<f64> {
    rho.entropy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{propagator_for, ModelConfig};
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ghz(n_env: usize) -> BranchState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        BranchState::from_site_overlaps(c(h), c(h), &vec![0.0; n_env + 1], 0.0).unwrap()
    }

    fn small_state(n_env: usize, alpha0: f64, gamma_t: f64) -> BranchState {
        let mut cfg = ModelConfig {
            n_env,
            gamma: 0.02,
            alpha0: c(alpha0),
            ..ModelConfig::default()
        };
        cfg.time_grid = vec![0.0];
        let p = propagator_for(&cfg).unwrap();
        let t = gamma_t / cfg.decay_rate();
        BranchState::new(cfg.branch_a, cfg.branch_b, cfg.alpha0, p.evolve(cfg.alpha0, t)).unwrap()
    }

    #[test]
    fn overlap_values() {
        let z = Complex64::new(0.4, -1.3);
        assert!((coherent_overlap(z, z) - c(1.0)).norm() < 1e-15);
        assert!((coherent_overlap(c(1.0), c(0.0)).re - (-0.5f64).exp()).abs() < 1e-15);
        let o = coherent_overlap(c(3.0), c(-3.0));
        assert!((o.re / (-18.0f64).exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normalization_values() {
        assert_eq!(cat_normalization(c(1.0), c(0.0), c(3.0)).unwrap(), 1.0);
        let g = cat_normalization(c(1.0), c(1.0), c(3.0)).unwrap();
        let expect = (2.0 * (1.0 + (-18.0f64).exp())).sqrt().recip();
        assert!((g - expect).abs() < 1e-15);
        let far = cat_normalization(c(1.0), c(1.0), c(30.0)).unwrap();
        assert!((far - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(cat_normalization(c(1.0), c(-1.0), c(0.0)).is_err());
    }

    #[test]
    fn subset_overlaps() {
        let bs = small_state(6, 3.0, 2.0);
        assert_eq!(bs.branch_subset_overlap(&[]).unwrap(), 1.0);
        let all: Vec<usize> = (0..7).collect();
        let ln_all = bs.branch_subset_overlap(&all).unwrap().ln();
        assert!((ln_all + 18.0).abs() < 1e-9 * 18.0);
        for (j, s) in bs.per_site_overlap.iter().enumerate() {
            let amp = bs.amplitudes.as_ref().unwrap().site(j);
            assert!((s - (-2.0 * amp.norm_sqr()).exp()).abs() < 1e-15);
        }

        let amps = ModeAmplitudes {
            time: 0.0,
            alpha: c(0.0),
            lambdas: vec![c(0.3), Complex64::new(0.0, 0.4), c(0.0)],
        };
        let bs = BranchState::new(c(1.0), c(1.0), c(0.5), amps).unwrap();
        let v = bs.branch_subset_overlap(&[1, 2]).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!(bs.branch_subset_overlap(&[4]).is_err());
        assert!(bs.branch_subset_overlap(&[1, 1]).is_err());
    }

    #[test]
    fn pure_global_and_ghz_reduced_states() {
        let bs = small_state(5, 3.0, 1.0);
        let all: Vec<usize> = (0..6).collect();
        let [l1, l2] = bs.reduced_state(&all).unwrap().eigenvalues().unwrap();
        assert!((l1 - 1.0).abs() < 1e-12 && l2.abs() < 1e-12);

        let g = ghz(4);
        for subset in [vec![0], vec![1, 3], vec![0, 2]] {
            let [l1, l2] = g.reduced_state(&subset).unwrap().eigenvalues().unwrap();
            assert!((l1 - 0.5).abs() < 1e-15 && (l2 - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn entropy_values() {
        let g = ghz(3);
        let h = g.reduced_state(&[0]).unwrap().entropy().unwrap();
        assert!((h - LN_2).abs() < 1e-15);
        let bs = small_state(3, 3.0, 0.0);
        assert!(bs.system_entropy().unwrap() < 1e-20);
    }

    #[test]
    fn rejects_inconsistent_spectrum() {
        let bad = Rank2State {
            weight_pp: 1.5,
            weight_mm: 0.2,
            cross: c(0.0),
            internal_overlap: c(0.0),
            ln_internal: f64::NEG_INFINITY,
            ln_external: f64::NEG_INFINITY,
        };
        assert!(matches!(bad.entropy(), Err(Error::Numerical(_))));
    }

    #[test]
    fn mutual_information_examples() {
        let bs = small_state(8, 3.0, 1.5);
        assert!(bs.mutual_information(&[]).unwrap().abs() < 1e-15);
        let env: Vec<usize> = (1..=8).collect();
        let h = bs.system_entropy().unwrap();
        assert!((bs.mutual_information(&env).unwrap() - 2.0 * h).abs() < 1e-12);
        assert!((bs.mi_full().unwrap() - 2.0 * h).abs() < 1e-12);
        assert!(bs.mutual_information(&[0]).is_err());

        let g = ghz(6);
        for frag in [vec![1], vec![2, 5], vec![1, 2, 3, 4, 5]] {
            assert!((g.mutual_information(&frag).unwrap() - LN_2).abs() < 1e-15);
        }
        let all: Vec<usize> = (1..=6).collect();
        assert!((g.mutual_information(&all).unwrap() - 2.0 * LN_2).abs() < 1e-15);
    }

    #[test]
    fn large_environment_system_entropy_is_ln2() {
        let cfg = ModelConfig::default();
        let p = propagator_for(&cfg).unwrap();
        let amps = p.evolve(cfg.alpha0, 1.0 / cfg.decay_rate());
        let bs = BranchState::new(cfg.branch_a, cfg.branch_b, cfg.alpha0, amps).unwrap();
        assert!((bs.system_entropy().unwrap() - LN_2).abs() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rank2_invariants(
            overlaps in proptest::collection::vec(0.0f64..=1.0, 2..12),
            are in -2.0f64..2.0, aim in -2.0f64..2.0,
            bre in -2.0f64..2.0, bim in -2.0f64..2.0,
            mask in proptest::collection::vec(any::<bool>(), 12),
        ) {
            let a = Complex64::new(are, aim);
            let b = Complex64::new(bre, bim);
            prop_assume!(a.norm() + b.norm() > 0.1);
            let Ok(bs) = BranchState::from_site_overlaps(a, b, &overlaps, 0.0) else {
                return Ok(());
            };
            let n = overlaps.len();
            let frag: Vec<usize> = (1..n).filter(|&j| mask[j]).collect();
            let rest: Vec<usize> = (1..n).filter(|&j| !mask[j]).collect();
            let mut sf = vec![0];
            sf.extend(&frag);

            let rho = bs.reduced_state(&sf).unwrap();
            let [l1, l2] = rho.eigenvalues().unwrap();
            prop_assert!((l1 + l2 - 1.0).abs() <= 1e-10);

            let h_sf = rho.entropy().unwrap();
            let h_rest = bs.reduced_state(&rest).unwrap().entropy().unwrap();
            prop_assert!((h_sf - h_rest).abs() <= 1e-9);
            prop_assert!((0.0..=LN_2 + 1e-12).contains(&h_sf));

            let mi = bs.mutual_information(&frag).unwrap();
            let hs = bs.system_entropy().unwrap();
            prop_assert!(mi >= -1e-9 && mi <= 2.0 * hs + 1e-9);
        }

        #[test]
        fn mi_depends_only_on_excitation_sum(
            x in 0.0f64..3.0, y in 0.0f64..3.0, z in 0.0f64..2.0, split in 0.05f64..0.95,
        ) {
            // Two fragments with the same excitation sum x + y.
            let lam = vec![
                c(x.sqrt()), c(y.sqrt()),
                c((split * (x + y)).sqrt()), c(((1.0 - split) * (x + y)).sqrt()),
                c(z.sqrt()),
            ];
            let alpha0 = (x + 2.0 * y + x + z + 0.5_f64).sqrt();
            let amps = ModeAmplitudes { time: 0.0, alpha: c(0.5f64.sqrt()), lambdas: lam };
            let bs = BranchState::new(c(1.0), c(1.0), c(alpha0), amps).unwrap();
            let m1 = bs.mutual_information(&[1, 2]).unwrap();
            let m2 = bs.mutual_information(&[3, 4]).unwrap();
            prop_assert!((m1 - m2).abs() <= 1e-12);
        }

        #[test]
        fn internal_overlap_decreases_with_excitations(e1 in 0.0f64..5.0, d in 1e-3f64..5.0) {
            let amps = ModeAmplitudes {
                time: 0.0,
                alpha: c(0.0),
                lambdas: vec![c(e1.sqrt()), c((e1 + d).sqrt())],
            };
            let bs = BranchState::new(c(1.0), c(1.0), c((2.0 * e1 + d).sqrt()), amps).unwrap();
            let s1 = bs.reduced_state(&[1]).unwrap().internal_overlap.re;
            let s2 = bs.reduced_state(&[2]).unwrap().internal_overlap.re;
            prop_assert!(s2 < s1);
        }
    }
}

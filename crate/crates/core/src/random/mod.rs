//! Random Landau Hamiltonians on the torus and Monte Carlo Wegner
//! statistics.

use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{thickness_scan, SetMask};
use crate::lattice::{assemble, count_in_window, MagneticOperator, TorusSetup};
use crate::stats::{linear_fit, mean, proportional_fit, std_error, LinearFit};

/// Distribution of the coupling constants `ω_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CouplingLaw {
    Uniform { lo: f64, hi: f64 },
}

impl CouplingLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CouplingLaw::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::invalid("uniform law needs m0 < M0"));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            CouplingLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

/// `s(ε)`; for the uniform law on `[m0, M0]` this is `min(ε/(M0 − m0), 1)`.
pub fn modulus_of_continuity(law: CouplingLaw, eps: f64) -> Result<f64> {
    law.validate()?;
    if !(eps > 0.0) {
        return Err(Error::invalid("ε must be positive"));
    }
    match law {
        CouplingLaw::Uniform { lo, hi } => Ok((eps / (hi - lo)).min(1.0)),
    }
}

/// Single-site profile `u(x − j)` on the offset `d = x − j ∈ [−½, ½]²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SiteProfile {
    /// `u = 1` on the whole unit cell, so `Σ_j u_j ≡ 1`.
    Cell,
    /// Indicator of a product of fat Cantor sets intersected with the disk
    /// `|d| ≤ radius`; a measurable set with empty interior in the limit.
    CantorDisk { radius: f64, levels: u32 },
}

/// Membership in the Smith–Volterra–Cantor construction after `levels`
/// steps; step `n` removes the open middle interval of length `4^{-n}` from
/// each of the `2^{n-1}` remaining pieces.
pub fn fat_cantor_contains(t: f64, levels: u32) -> bool {
    if !(0.0..=1.0).contains(&t) {
        return false;
    }
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for n in 1..=levels {
        let gap = 0.25f64.powi(n as i32);
        let mid = 0.5 * (a + b);
        let (g0, g1) = (mid - 0.5 * gap, mid + 0.5 * gap);
        if t > g0 && t < g1 {
            return false;
        }
        if t <= g0 {
            b = g0;
        } else {
            a = g1;
        }
    }
    true
}

impl SiteProfile {
    pub fn weight(&self, d: [f64; 2]) -> f64 {
        match *self {
            SiteProfile::Cell => 1.0,
            SiteProfile::CantorDisk { radius, levels } => {
                let inside = d[0] * d[0] + d[1] * d[1] <= radius * radius
                    && fat_cantor_contains(0.5 + 0.5 * d[0] / radius, levels)
                    && fat_cantor_contains(0.5 + 0.5 * d[1] / radius, levels);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Random Landau Hamiltonian on an integer torus with sites `ℤ² ∩ Λ_L`.
#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub setup: TorusSetup,
    pub profile: SiteProfile,
    pub law: CouplingLaw,
    pub seed: u64,
    sites: [usize; 2],
    /// Site index and weight of each grid point.
    assignment: Vec<(u32, f64)>,
    /// `ρ` of the support of `Σ u_j` at scale `(1, 1)`.
    pub support_density: f64,
}

impl EnsembleConfig {
    pub fn new(setup: TorusSetup, profile: SiteProfile, law: CouplingLaw, seed: u64) -> Result<Self> {
        setup.validate()?;
        law.validate()?;
        if let SiteProfile::CantorDisk { radius, .. } = profile {
            if !(radius > 0.0 && radius <= 0.5) {
                return Err(Error::invalid("bump radius must lie in (0, 1/2]"));
            }
        }
        let sites = [setup.l[0].round() as usize, setup.l[1].round() as usize];
        if sites[0] == 0 || sites[1] == 0 || (setup.l[0] - sites[0] as f64).abs() > 1e-9 || (setup.l[1] - sites[1] as f64).abs() > 1e-9 {
            return Err(Error::invalid("box sides must be positive integers"));
        }
        let h = setup.h();
        let mut assignment = Vec::with_capacity(setup.dim());
        for i2 in 0..setup.n[1] {
            for i1 in 0..setup.n[0] {
                let x = [i1 as f64 * h[0], i2 as f64 * h[1]];
                let j = [x[0].round(), x[1].round()];
                let site = [(j[0] as usize) % sites[0], (j[1] as usize) % sites[1]];
                let w = profile.weight([x[0] - j[0], x[1] - j[1]]);
                assignment.push(((site[1] * sites[0] + site[0]) as u32, w));
            }
        }
        let support = SetMask::on_torus(&setup, |i1, i2| assignment[i2 * setup.n[0] + i1].1 > 0.0)?;
        let rho = thickness_scan(&support, [1.0, 1.0])?.rho_lower;
        if !(rho > 0.0) {
            return Err(Error::invalid("Σ u_j must be positive on a thick set"));
        }
        Ok(Self { setup, profile, law, seed, sites, assignment, support_density: rho })
    }

    pub fn site_count(&self) -> usize {
        self.sites[0] * self.sites[1]
    }

    /// `ω` for one trial, from stream `trial` of the master seed.
    pub fn couplings(&self, trial: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        (0..self.site_count()).map(|_| self.law.draw(&mut rng)).collect()
    }

    /// `V_ω = Σ_j ω_j u_j` on the grid.
    pub fn potential(&self, omega: &[f64]) -> Result<Vec<f64>> {
        if omega.len() != self.site_count() {
            return Err(Error::invalid("one coupling per site expected"));
        }
        Ok(self.assignment.iter().map(|&(s, w)| if w > 0.0 { omega[s as usize] * w } else { 0.0 }).collect())
    }
}

/// `H_{B,L} + V_ω` for one trial; deterministic in `(config, trial)`.
pub fn sample_operator(config: &EnsembleConfig, trial: u64) -> Result<MagneticOperator> {
    let v = config.potential(&config.couplings(trial))?;
    assemble(&config.setup, Some(&v))
}

/// `Tr 1_{[E−ε, E+ε)}(H)` by inertia.
pub fn eigen_count_window(op: &MagneticOperator, e: f64, eps: f64) -> Result<usize> {
    count_in_window(op, e, eps)
}

/// Window counts for several half-widths sharing one banded matrix.
pub fn window_counts(op: &MagneticOperator, e: f64, eps: &[f64]) -> Result<Vec<u32>> {
    if eps.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::invalid("window half-widths must be non-negative"));
    }
    let (band, _) = op.to_banded();
    eps.iter()
        .map(|&w| {
            let hi = band.ldl(e + w)?.negative_count();
            let lo = band.ldl(e - w)?.negative_count();
            Ok(hi.saturating_sub(lo) as u32)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WegnerStats {
    pub l: [f64; 2],
    pub e: f64,
    pub eps: Vec<f64>,
    /// `counts[t][k]` for trial `t` and `eps[k]`.
    pub counts: Vec<Vec<u32>>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub s2eps: Vec<f64>,
    /// Least-squares slope of the mean count against `ε`.
    pub slope_vs_eps: LinearFit,
    /// Slope through the origin of the mean count against `s(2ε) L²`,
    /// an empirical `C_W`.
    pub c_w_fit: f64,
    /// `max_k mean_k / (s(2ε_k) L²)`.
    pub c_w_max: f64,
}

impl WegnerStats {
    pub fn trials(&self) -> usize {
        self.counts.len()
    }

    pub fn ratio(&self, k: usize) -> f64 {
        self.mean[k] / (self.s2eps[k] * self.l[0] * self.l[1])
    }

    /// Recomputes means and fits from per-trial counts.
    pub fn from_counts(l: [f64; 2], e: f64, eps: Vec<f64>, law: CouplingLaw, counts: Vec<Vec<u32>>) -> Result<Self> {
        if counts.is_empty() || eps.len() < 2 {
            return Err(Error::invalid("need at least one trial and two half-widths"));
        }
        let k = eps.len();
        let col = |j: usize| counts.iter().map(|c| c[j] as f64).collect::<Vec<f64>>();
        let mean_v: Vec<f64> = (0..k).map(|j| mean(&col(j))).collect();
        let stderr: Vec<f64> = (0..k).map(|j| std_error(&col(j))).collect();
        let s2eps: Vec<f64> = eps.iter().map(|x| modulus_of_continuity(law, 2.0 * x)).collect::<Result<_>>()?;
        let area = l[0] * l[1];
        let scaled: Vec<f64> = s2eps.iter().map(|s| s * area).collect();
        let slope_vs_eps = linear_fit(&eps, &mean_v)?;
        let c_w_fit = proportional_fit(&scaled, &mean_v)?;
        let c_w_max = mean_v.iter().zip(&scaled).map(|(m, s)| m / s).fold(0.0, f64::max);
        Ok(Self { l, e, eps, counts, mean: mean_v, stderr, s2eps, slope_vs_eps, c_w_fit, c_w_max })
    }
}

/// Monte Carlo estimate of `E[Tr 1_{[E−ε,E+ε]}(H_{ω,L})]` over trials
/// `0..trials`.
pub fn wegner_sweep(config: &EnsembleConfig, e: f64, eps: &[f64], trials: usize) -> Result<WegnerStats> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let counts = (0..trials as u64)
        .map(|t| window_counts(&sample_operator(config, t)?, e, eps))
        .collect::<Result<Vec<_>>>()?;
    WegnerStats::from_counts(config.setup.l, e, eps.to_vec(), config.law, counts)
}

/// Fit of `ln(mean count)` against `ln L`; the slope is the box exponent.
pub fn box_exponent(sizes: &[f64], means: &[f64]) -> Result<LinearFit> {
    if sizes.iter().chain(means).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("sizes and means must be positive"));
    }
    let x: Vec<f64> = sizes.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = means.iter().map(|v| v.ln()).collect();
    linear_fit(&x, &y)
}

#[cfg(test)]
mod tests;

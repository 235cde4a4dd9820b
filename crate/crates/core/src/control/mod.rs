//! Magnetic heat flow on a spectral subspace, observability and HUM
//! controls, and the control-cost bounds.
//!
//! States are coefficient vectors in the orthonormal eigenbasis of a
//! [`SpectralSubspace`]. The masked form is `M_S[k][l] = Σ_{p∈S} v̄_k v_l`;
//! the cell area cancels from every quotient and is left out.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::geometry::SetMask;
use crate::inequality::{traced_ln_m, ThmConstants};
use crate::lattice::SpectralSubspace;
use crate::linalg::{eigh, hpd_solve, norm, DMat};
use crate::quad::gauss_legendre_on;

type C = Complex64;

pub const DEFAULT_TIME_NODES: usize = 64;
pub const DEFAULT_EPS_TARGET: f64 = 1e-8;
pub const MAX_GRAMIAN_CONDITION: f64 = 1e14;

/// `e^{−λ_k t}` applied componentwise.
pub fn propagate(subspace: &SpectralSubspace, u0: &[C], t: f64) -> Result<Vec<C>> {
    propagate_values(&subspace.values, u0, t)
}

fn propagate_values(values: &[f64], u0: &[C], t: f64) -> Result<Vec<C>> {
    if !(t >= 0.0) {
        return Err(Error::invalid("time must be non-negative"));
    }
    if values.len() != u0.len() {
        return Err(Error::invalid("coefficient vector does not match the subspace"));
    }
    Ok(values.iter().zip(u0).map(|(l, c)| c * (-l * t).exp()).collect())
}

/// `M_S` in the eigenbasis.
pub fn masked_form(subspace: &SpectralSubspace, mask: &SetMask) -> Result<DMat> {
    if subspace.is_empty() {
        return Err(Error::invalid("subspace is empty"));
    }
    if mask.len() != subspace.dim() {
        return Err(Error::invalid("mask does not match the lattice grid"));
    }
    let k = subspace.len();
    let bits = mask.bits();
    let mut m = DMat::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let mut acc = C::zero();
            for (p, (a, b)) in subspace.vectors[i].iter().zip(&subspace.vectors[j]).enumerate() {
                if bits[p] {
                    acc += a.conj() * b;
                }
            }
            m[(i, j)] = acc;
            m[(j, i)] = acc.conj();
        }
    }
    Ok(m)
}

/// Controlled heat flow `∂_t u + H u = 1_S f` reduced to a subspace.
#[derive(Clone, Debug)]
pub struct HeatProblem {
    pub values: Vec<f64>,
    pub form: DMat,
    pub horizon: f64,
    pub u0: Vec<C>,
    /// Spectral cutoff of the subspace; `e^{−cutoff·T}` bounds the
    /// relative weight of discarded modes.
    pub cutoff: f64,
}

impl HeatProblem {
    pub fn new(subspace: &SpectralSubspace, mask: &SetMask, horizon: f64, u0: Vec<C>) -> Result<Self> {
        let form = masked_form(subspace, mask)?;
        Self::from_parts(subspace.values.clone(), form, horizon, u0, subspace.cutoff)
    }

    pub fn from_parts(values: Vec<f64>, form: DMat, horizon: f64, u0: Vec<C>, cutoff: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon T must be positive"));
        }
        if values.len() != u0.len() || form.rows != values.len() || form.cols != values.len() {
            return Err(Error::invalid("dimensions of values, form and u0 disagree"));
        }
        Ok(Self { values, form, horizon, u0, cutoff })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn with_initial(&self, u0: Vec<C>) -> Result<Self> {
        Self::from_parts(self.values.clone(), self.form.clone(), self.horizon, u0, self.cutoff)
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::from_parts(self.values.clone(), self.form.clone(), horizon, self.u0.clone(), self.cutoff)
    }

    pub fn truncation_factor(&self) -> f64 {
        (-self.cutoff * self.horizon).exp()
    }

    /// `G_T = ∫₀ᵀ e^{−sH} M_S e^{−sH} ds` by Gauss–Legendre in `s`.
    pub fn gramian(&self, nodes: usize) -> DMat {
        let k = self.dim();
        let (ts, ws) = gauss_legendre_on(nodes, 0.0, self.horizon);
        let mut g = DMat::zeros(k, k);
        for (s, w) in ts.iter().zip(&ws) {
            let e: Vec<f64> = self.values.iter().map(|l| (-l * s).exp()).collect();
            for j in 0..k {
                for i in 0..k {
                    g[(i, j)] += self.form[(i, j)] * (w * e[i] * e[j]);
                }
            }
        }
        g
    }

    /// Closed form `M_kl (1 − e^{−T(λ_k+λ_l)})/(λ_k+λ_l)`.
    pub fn gramian_exact(&self) -> DMat {
        let t = self.horizon;
        DMat::from_fn(self.dim(), self.dim(), |i, j| self.form[(i, j)] * exp_integral(self.values[i] + self.values[j], t))
    }
}

/// `∫₀ᵗ e^{−σs} ds`.
fn exp_integral(sigma: f64, t: f64) -> f64 {
    if (sigma * t).abs() < 1e-12 {
        t
    } else {
        -(-sigma * t).exp_m1() / sigma
    }
}

fn quad_form(a: &DMat, x: &[C]) -> f64 {
    let ax = a.matvec(x);
    x.iter().zip(&ax).map(|(xi, yi)| xi.conj() * yi).sum::<C>().re
}

/// `‖u(T)‖² / ∫₀ᵀ ‖u(t)‖²_S dt` for the uncontrolled flow.
pub fn observability_quotient(problem: &HeatProblem) -> Result<f64> {
    observability_quotient_with(problem, DEFAULT_TIME_NODES)
}

pub fn observability_quotient_with(problem: &HeatProblem, nodes: usize) -> Result<f64> {
    if norm(&problem.u0) == 0.0 {
        return Err(Error::invalid("u0 must be nonzero"));
    }
    let top = norm(&propagate_values(&problem.values, &problem.u0, problem.horizon)?).powi(2);
    let (ts, ws) = gauss_legendre_on(nodes, 0.0, problem.horizon);
    let mut bottom = 0.0;
    for (t, w) in ts.iter().zip(&ws) {
        let u = propagate_values(&problem.values, &problem.u0, *t)?;
        bottom += w * quad_form(&problem.form, &u);
    }
    if !(bottom > f64::MIN_POSITIVE * 1e10) || !(bottom > 1e-300 * top) {
        return Err(Error::numerical("observation integral underflows: S misses the subspace"));
    }
    Ok(top / bottom)
}

/// `sup_{u0} ‖u(T)‖²/∫‖u‖²_S`, the largest eigenvalue of
/// `e^{−TH} G_T^{-1} e^{−TH}`, which by duality is the squared worst-case
/// HUM cost per unit initial norm.
pub fn observability_constant_sq(problem: &HeatProblem, nodes: usize) -> Result<f64> {
    let g = problem.gramian(nodes);
    let (vals, vecs) = eigh(&g)?;
    let k = problem.dim();
    let lo = vals[0];
    let cond = if lo > 0.0 { vals[k - 1] / lo } else { f64::INFINITY };
    if !(cond <= MAX_GRAMIAN_CONDITION) {
        return Err(Error::IllConditioned { condition: cond, witness: vecs.col(0).to_vec() });
    }
    let e: Vec<f64> = problem.values.iter().map(|l| (-l * problem.horizon).exp()).collect();
    // e^{−TH} V diag(1/μ) Vᴴ e^{−TH}
    let a = DMat::from_fn(k, k, |i, j| {
        let mut acc = C::zero();
        for (q, mu) in vals.iter().enumerate() {
            acc += vecs[(i, q)] * vecs[(j, q)].conj() / *mu;
        }
        acc * (e[i] * e[j])
    });
    Ok(eigh(&a)?.0[k - 1])
}

/// Minimal-norm control `f(t) = 1_S Σ_k φ_k(t) v_k`, `φ(t) = e^{−(T−t)H} p`.
#[derive(Clone, Debug)]
pub struct HumResult {
    /// Gauss–Legendre time nodes on `(0, T)`.
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
    /// `φ(t_i)` per node.
    pub control: Vec<Vec<C>>,
    /// Adjoint final state `p` solving `G_T p = −e^{−TH} u0`.
    pub p: Vec<C>,
    /// `‖f‖_{L²((0,T)×S)}` by quadrature.
    pub cost: f64,
    /// `pᴴ G_T p`, which equals `cost²` up to rounding.
    pub gramian_energy: f64,
    /// `‖u(T)‖/‖u0‖` of the exactly integrated controlled flow.
    pub terminal_residual: f64,
    pub condition: f64,
    pub truncation_factor: f64,
}

impl HumResult {
    /// Controlled state at time `t`, integrated in closed form.
    pub fn state_at(&self, problem: &HeatProblem, t: f64) -> Result<Vec<C>> {
        if !(0.0..=problem.horizon).contains(&t) {
            return Err(Error::invalid("time outside [0, T]"));
        }
        let k = problem.dim();
        let big_t = problem.horizon;
        let mut u = propagate_values(&problem.values, &problem.u0, t)?;
        for (i, ui) in u.iter_mut().enumerate() {
            let li = problem.values[i];
            for j in 0..k {
                let lj = problem.values[j];
                // ∫₀ᵗ e^{−λ_i(t−s) − λ_j(T−s)} ds
                let w = (-lj * (big_t - t)).exp() * exp_integral(li + lj, t);
                *ui += problem.form[(i, j)] * self.p[j] * w;
            }
        }
        Ok(u)
    }
}

/// Re-integrates the Duhamel formula for `u(T)` with `panels` composite
/// Gauss–Legendre panels of `nodes` points, independently of the Gramian.
pub fn resimulate(problem: &HeatProblem, p: &[C], panels: usize, nodes: usize) -> Result<Vec<C>> {
    if panels == 0 || nodes == 0 || p.len() != problem.dim() {
        return Err(Error::invalid("need a nonempty rule and a matching adjoint state"));
    }
    let big_t = problem.horizon;
    let mut u = propagate_values(&problem.values, &problem.u0, big_t)?;
    let h = big_t / panels as f64;
    for k in 0..panels {
        let (ts, ws) = gauss_legendre_on(nodes, k as f64 * h, (k + 1) as f64 * h);
        for (t, w) in ts.iter().zip(&ws) {
            let phi = propagate_values(&problem.values, p, big_t - t)?;
            let src = problem.form.matvec(&phi);
            let back = propagate_values(&problem.values, &src, big_t - t)?;
            for (ui, bi) in u.iter_mut().zip(&back) {
                *ui += bi * *w;
            }
        }
    }
    Ok(u)
}

/// HUM control driving `u0` to (numerically) zero at `T`.
pub fn hum_control(problem: &HeatProblem, eps_target: f64) -> Result<HumResult> {
    hum_control_with(problem, eps_target, DEFAULT_TIME_NODES)
}

pub fn hum_control_with(problem: &HeatProblem, eps_target: f64, nodes: usize) -> Result<HumResult> {
    if !(eps_target > 0.0) {
        return Err(Error::invalid("ε_target must be positive"));
    }
    let k = problem.dim();
    let big_t = problem.horizon;
    let (times, weights) = gauss_legendre_on(nodes, 0.0, big_t);
    let u0_norm = norm(&problem.u0);
    if u0_norm == 0.0 {
        return Ok(HumResult {
            control: alloc::vec![alloc::vec![C::zero(); k]; times.len()],
            times,
            weights,
            p: alloc::vec![C::zero(); k],
            cost: 0.0,
            gramian_energy: 0.0,
            terminal_residual: 0.0,
            condition: 1.0,
            truncation_factor: problem.truncation_factor(),
        });
    }
    let g = problem.gramian(nodes);
    let rhs: Vec<C> = propagate_values(&problem.values, &problem.u0, big_t)?.iter().map(|c| -c).collect();
    let (p, condition) = hpd_solve(&g, &rhs, MAX_GRAMIAN_CONDITION)?;
    let control: Vec<Vec<C>> =
        times.iter().map(|t| propagate_values(&problem.values, &p, big_t - t)).collect::<Result<_>>()?;
    let cost_sq: f64 = control.iter().zip(&weights).map(|(phi, w)| w * quad_form(&problem.form, phi)).sum();
    let gramian_energy = quad_form(&g, &p);
    let mut out = HumResult {
        times,
        weights,
        control,
        p,
        cost: cost_sq.max(0.0).sqrt(),
        gramian_energy,
        terminal_residual: 0.0,
        condition,
        truncation_factor: problem.truncation_factor(),
    };
    let end = out.state_at(problem, big_t)?;
    out.terminal_residual = norm(&end) / u0_norm;
    if !(out.terminal_residual <= eps_target) {
        return Err(Error::numerical(alloc::format!(
            "terminal residual {:.3e} above target {:.1e}",
            out.terminal_residual, eps_target
        )));
    }
    Ok(out)
}

/// Coefficients of the unit vector in the span whose mass on `mask` is
/// largest.
pub fn concentrated_vector(subspace: &SpectralSubspace, mask: &SetMask) -> Result<Vec<C>> {
    let m = masked_form(subspace, mask)?;
    let (_, vecs) = eigh(&m)?;
    Ok(vecs.col(subspace.len() - 1).to_vec())
}

/// `(C5, C6, C7)` of the abstract control-cost estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostConstants {
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
}

impl Default for CostConstants {
    fn default() -> Self {
        Self { c5: 1.0, c6: 1.0, c7: 1.0 }
    }
}

/// `ln(1 + e^a)` without overflow.
fn ln1p_exp(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

/// `ln` of `(C5 d0/T)(2 d0‖X‖ + 1)^{C6} exp(C7 d1²/T)`, with `d0` given by
/// its logarithm.
pub fn abstract_cost_ln(ln_d0: f64, d1: f64, t: f64, norm_x: f64, c: CostConstants) -> Result<f64> {
    if !(t > 0.0) || !(d1 >= 0.0) || !(norm_x >= 0.0) || !ln_d0.is_finite() {
        return Err(Error::invalid("need T > 0, d1 ≥ 0, ‖X‖ ≥ 0 and finite d0"));
    }
    if !(c.c5 > 0.0 && c.c6 > 0.0 && c.c7 > 0.0) {
        return Err(Error::invalid("C5, C6, C7 must be positive"));
    }
    let growth = if norm_x > 0.0 { ln1p_exp((2.0 * norm_x).ln() + ln_d0) } else { 0.0 };
    Ok(c.c5.ln() + ln_d0 - t.ln() + c.c6 * growth + c.c7 * d1 * d1 / t)
}

pub fn abstract_cost(d0: f64, d1: f64, t: f64, norm_x: f64, c: CostConstants) -> Result<f64> {
    if !(d0 > 0.0) {
        return Err(Error::invalid("d0 must be positive"));
    }
    Ok(abstract_cost_ln(d0.ln(), d1, t, norm_x, c)?.exp())
}

/// `(ln d0, d1)` with `C(E) = d0 e^{d1 √E}` for the spectral-inequality
/// constant.
pub fn spectral_factors(rho: f64, l: [f64; 2], b: f64, c: ThmConstants) -> Result<(f64, f64)> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid("ρ must lie in (0, 1]"));
    }
    if !(b >= 0.0) || !(l[0] > 0.0 && l[1] > 0.0) {
        return Err(Error::invalid("need B ≥ 0 and positive ℓ"));
    }
    let l1 = l[0] + l[1];
    match c {
        ThmConstants::Traced => {
            // ln C = ln 4 + (2 ln M/ln 2 + 1) ln(96π/ρ), ln M affine in √E
            let base = (96.0 * core::f64::consts::PI / rho).ln();
            let ln_m0 = traced_ln_m(0.0, b, l);
            let ln_d0 = 4f64.ln() + (2.0 * ln_m0 / 2f64.ln() + 1.0) * base;
            let d1 = 2.0 * 240.0 * l1 / 2f64.ln() * base;
            Ok((ln_d0, d1))
        }
        ThmConstants::Structural { c1, c2, c3, c4 } => {
            if !(c1 > 0.0 && c2 >= 0.0 && c3 >= 0.0 && c4 >= 0.0) {
                return Err(Error::invalid("need C1 > 0 and C2, C3, C4 ≥ 0"));
            }
            let base = (c1 / rho).ln();
            Ok(((c2 + c4 * l1 * l1 * b) * base, c3 * l1 * base))
        }
    }
}

/// `ln` of the bound on `C_obs²`: the abstract estimate on `[T/2, T]` fed
/// with the spectral factors, times `e^{−BT}` from the free decay on
/// `[0, T/2]`.
pub fn cost_bound_ln(rho: f64, l: [f64; 2], b: f64, t: f64, thm: ThmConstants, c: CostConstants) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    let (ln_d0, d1) = spectral_factors(rho, l, b, thm)?;
    Ok(abstract_cost_ln(ln_d0, d1, 0.5 * t, 1.0, c)? - b * t)
}

/// `exp` of [`cost_bound_ln`]; may be `+∞`.
pub fn cost_bound(rho: f64, l: [f64; 2], b: f64, t: f64, thm: ThmConstants, c: CostConstants) -> Result<f64> {
    Ok(cost_bound_ln(rho, l, b, t, thm, c)?.exp())
}

/// `ln` of `C/(T ρ^{C + C|ℓ|₁²B}) exp(ln(C/ρ) C|ℓ|₁²/T − BT)` with a single
/// universal `C`.
pub fn cost_bound_single_ln(rho: f64, l: [f64; 2], b: f64, t: f64, c: f64) -> Result<f64> {
    if !(t > 0.0) || !(rho > 0.0 && rho <= 1.0) || !(c > 0.0) || !(b >= 0.0) {
        return Err(Error::invalid("need T > 0, ρ ∈ (0, 1], C > 0, B ≥ 0"));
    }
    let l1 = l[0] + l[1];
    Ok(c.ln() - t.ln() - (c + c * l1 * l1 * b) * rho.ln() + (c / rho).ln() * c * l1 * l1 / t - b * t)
}

#[cfg(test)]
mod tests;

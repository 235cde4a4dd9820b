//! Spectral-inequality constants: the bound traced through the proof, sharp
//! constants on computed subspaces, and the one-dimensional estimates the
//! proof rests on.

mod oned;
mod taylor;

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

pub use oned::{
    kovrijkine_check, max_on_circle, remez_bound, remez_check, sup_on, ComplexPoly, IntervalSet, KovrijkineOutcome,
    RemezOutcome, DEFAULT_SUP_GRID, SUP_TOL,
};
pub use taylor::{local_estimate_check, LocalEstimateOutcome, TaylorModel, DEFAULT_TAYLOR_DEGREE};

use crate::error::{Error, Result};
use crate::geometry::SetMask;
use crate::lattice::SpectralSubspace;
use crate::linalg::{cholesky, eigh, DMat};

type C = Complex64;

/// How the constants `C1..C4` of the spectral inequality are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThmConstants {
    /// `4 (96π/ρ)^{2 ln M/ln 2 + 1}` with
    /// `ln M ≤ ln 16 + 240|ℓ|₁√E + 2·240²(|ℓ|₁√B + |ℓ|₁²B)`.
    Traced,
    /// `(C1/ρ)^{C2 + C3|ℓ|₁√E + C4|ℓ|₁²B}`.
    Structural { c1: f64, c2: f64, c3: f64, c4: f64 },
}

fn check_inputs(e: f64, b: f64, l: [f64; 2], rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid("ρ must lie in (0, 1]"));
    }
    if !(b >= 0.0) || !(e >= 0.0) || (b > 0.0 && e < b) {
        return Err(Error::invalid("need E ≥ B > 0 or B = 0"));
    }
    if !(l[0] >= 0.0 && l[1] >= 0.0) {
        return Err(Error::invalid("window sides must be non-negative"));
    }
    Ok(())
}

/// Upper bound for `ln M_φ` along the proof.
pub fn traced_ln_m(e: f64, b: f64, l: [f64; 2]) -> f64 {
    let l1 = l[0] + l[1];
    16f64.ln() + 240.0 * l1 * e.sqrt() + 2.0 * 240.0 * 240.0 * (l1 * b.sqrt() + l1 * l1 * b)
}

/// Natural log of the spectral-inequality constant. The traced value
/// overflows `f64` for all but tiny windows, so comparisons use this form.
pub fn theoretical_constant_ln(e: f64, b: f64, l: [f64; 2], rho: f64, c: ThmConstants) -> Result<f64> {
    check_inputs(e, b, l, rho)?;
    let l1 = l[0] + l[1];
    match c {
        ThmConstants::Traced => {
            let expo = 2.0 * traced_ln_m(e, b, l) / 2f64.ln() + 1.0;
            Ok(4f64.ln() + expo * (96.0 * PI / rho).ln())
        }
        ThmConstants::Structural { c1, c2, c3, c4 } => {
            if !(c1 > 0.0 && c2 >= 0.0 && c3 >= 0.0 && c4 >= 0.0) {
                return Err(Error::invalid("need C1 > 0 and C2, C3, C4 ≥ 0"));
            }
            Ok((c2 + c3 * l1 * e.sqrt() + c4 * l1 * l1 * b) * (c1 / rho).ln())
        }
    }
}

/// `exp` of [`theoretical_constant_ln`]; may be `+∞`.
pub fn theoretical_constant(e: f64, b: f64, l: [f64; 2], rho: f64, c: ThmConstants) -> Result<f64> {
    Ok(theoretical_constant_ln(e, b, l, rho, c)?.exp())
}

/// Sharp constant of `‖f‖² ≤ C ‖f‖²_S` on the span of `vectors`.
#[derive(Clone, Debug, PartialEq)]
pub struct SharpConstant {
    pub value: f64,
    /// Smallest eigenvalue of the masked form relative to the full one.
    pub lambda_min: f64,
    /// Coefficients of a minimiser in the given spanning set.
    pub witness: Vec<C>,
}

/// Floor below which the masked form counts as singular.
pub const VOID_THRESHOLD: f64 = 1e-14;

/// `1/λ_min` of `G_S c = λ G c`, where `G` and `G_S` are the Gram matrices
/// of `vectors` over all points and over the points with `inside` set.
pub fn sharp_constant(vectors: &[Vec<C>], inside: &[bool]) -> Result<SharpConstant> {
    let k = vectors.len();
    if k == 0 {
        return Err(Error::invalid("spanning set is empty"));
    }
    let n = vectors[0].len();
    if inside.len() != n || vectors.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("mask and vectors must share the grid"));
    }
    let mut g = DMat::zeros(k, k);
    let mut gs = DMat::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let (mut full, mut part) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
            for (p, (a, b)) in vectors[i].iter().zip(&vectors[j]).enumerate() {
                let z = a.conj() * b;
                full += z;
                if inside[p] {
                    part += z;
                }
            }
            g[(i, j)] = full;
            g[(j, i)] = full.conj();
            gs[(i, j)] = part;
            gs[(j, i)] = part.conj();
        }
    }
    // L⁻¹ G_S L⁻ᴴ
    let l = cholesky(&g)?;
    let solve_lower = |b: &[C]| -> Vec<C> {
        let mut x = b.to_vec();
        for i in 0..k {
            let mut s = x[i];
            for j in 0..i {
                s -= l[(i, j)] * x[j];
            }
            x[i] = s / l[(i, i)];
        }
        x
    };
    let mut t = DMat::zeros(k, k);
    for j in 0..k {
        let col = solve_lower(gs.col(j));
        t.col_mut(j).copy_from_slice(&col);
    }
    let th = t.adjoint();
    let mut red = DMat::zeros(k, k);
    for j in 0..k {
        let col = solve_lower(th.col(j));
        red.col_mut(j).copy_from_slice(&col);
    }
    for i in 0..k {
        for j in 0..i {
            let avg = (red[(i, j)] + red[(j, i)].conj()) * 0.5;
            red[(i, j)] = avg;
            red[(j, i)] = avg.conj();
        }
    }
    let (vals, vecs) = eigh(&red)?;
    let lambda_min = vals[0];
    if !(lambda_min > VOID_THRESHOLD) {
        return Err(Error::numerical("inequality numerically void: the subspace concentrates off S"));
    }
    // back-transform y = L⁻ᴴ z
    let z = vecs.col(0).to_vec();
    let mut w = z.clone();
    for i in (0..k).rev() {
        let mut s = w[i];
        for j in i + 1..k {
            s -= l[(j, i)].conj() * w[j];
        }
        w[i] = s / l[(i, i)].conj();
    }
    Ok(SharpConstant { value: 1.0 / lambda_min, lambda_min, witness: w })
}

/// Sharp constant on a computed lattice subspace.
pub fn empirical_constant(subspace: &SpectralSubspace, mask: &SetMask) -> Result<f64> {
    Ok(empirical_constant_detail(subspace, mask)?.value)
}

pub fn empirical_constant_detail(subspace: &SpectralSubspace, mask: &SetMask) -> Result<SharpConstant> {
    if subspace.is_empty() {
        return Err(Error::invalid("subspace is empty"));
    }
    if mask.len() != subspace.dim() {
        return Err(Error::invalid("mask does not match the lattice grid"));
    }
    sharp_constant(&subspace.vectors, mask.bits())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOutcome {
    pub partial: f64,
    pub tail: f64,
    pub bound: f64,
    pub holds: bool,
}

fn ln_term(s: f64, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mf = m as f64;
    let ln_fact: f64 = (2..=m).map(|k| (k as f64).ln()).sum();
    mf * s.ln() + 0.5 * mf * mf.ln() - ln_fact
}

/// Ratio-test tail of `Σ_{m > M} (s√m)^m/m!`; `None` when the ratio bound
/// `s√e/√(M+2)` is not below one.
pub fn series_tail(s: f64, m_terms: usize) -> Option<f64> {
    if s == 0.0 {
        return Some(0.0);
    }
    let q = s * 0.5f64.exp() / ((m_terms + 2) as f64).sqrt();
    if q >= 1.0 {
        return None;
    }
    Some(ln_term(s, m_terms + 1).exp() / (1.0 - q))
}

/// Smallest `M` whose certified tail is below `1e-12` of the partial sum.
pub fn series_terms_for(s: f64) -> usize {
    let mut m = 1;
    loop {
        let partial: f64 = (0..=m).map(|k| ln_term(s, k).exp()).sum();
        if let Some(t) = series_tail(s, m) {
            if t < 1e-12 * partial {
                return m;
            }
        }
        m += 1;
    }
}

/// `Σ_{m≤M} (s√m)^m/m! + tail ≤ exp(2s² + s)`.
pub fn series_bound_check(s: f64, m_terms: usize) -> Result<SeriesOutcome> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::invalid("s must be a non-negative real"));
    }
    let partial: f64 = (0..=m_terms).map(|m| if s == 0.0 && m > 0 { 0.0 } else { ln_term(s, m).exp() }).sum();
    let tail = series_tail(s, m_terms).ok_or_else(|| Error::invalid("too few terms for a ratio-test tail"))?;
    if tail >= 1e-12 * partial {
        return Err(Error::invalid("too few terms: tail is not negligible"));
    }
    let bound = (2.0 * s * s + s).exp();
    Ok(SeriesOutcome { partial, tail, bound, holds: partial + tail <= bound })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NecessityReport {
    /// `‖f_y‖²_{L²(S)}`.
    pub value: f64,
    /// `vol(S ∩ B_n(y))`.
    pub ball_measure: f64,
    /// `1/n + (2π/B) e^{−Bn²/2}`.
    pub bound: f64,
    /// `1/n + (1/B) e^{−Bn²/2}`.
    pub bound_printed: f64,
}

fn box_mass(b: f64, y: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let s = (0.5 * b).sqrt();
    let p = |a: usize| 0.5 * (libm::erf(s * (hi[a] - y[a])) - libm::erf(s * (lo[a] - y[a])));
    2.0 * PI / b * p(0) * p(1)
}

/// `∫_S |f_y|²` with `|f_y|² = e^{−B|x−y|²/2}`. Inside the mask box the
/// cells are integrated by 4×4 Gauss–Legendre; everything outside the box
/// counts as part of `S` and is added in closed form.
pub fn necessity_decay(n: f64, b: f64, mask: &SetMask, y: [f64; 2]) -> Result<NecessityReport> {
    if !(n > 0.0 && b > 0.0) {
        return Err(Error::invalid("hole radius and field must be positive"));
    }
    let ext = mask.extent();
    if y[0] - n < ext.lo[0] || y[0] + n > ext.hi[0] || y[1] - n < ext.lo[1] || y[1] + n > ext.hi[1] {
        return Err(Error::invalid("the ball B_n(y) must lie inside the mask box"));
    }
    let (xs, ws) = crate::quad::gauss_legendre(4);
    let h = mask.h;
    let mut inside = 0.0;
    let mut ball = 0.0;
    for i2 in 0..mask.n[1] {
        for i1 in 0..mask.n[0] {
            if !mask.get(i1, i2) {
                continue;
            }
            let c = mask.center(i1, i2);
            let mut acc = 0.0;
            for (a, wa) in xs.iter().zip(&ws) {
                for (bb, wb) in xs.iter().zip(&ws) {
                    let x = [c[0] + 0.5 * h[0] * a, c[1] + 0.5 * h[1] * bb];
                    let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                    acc += wa * wb * (-0.5 * b * r2).exp();
                }
            }
            inside += acc * 0.25 * mask.cell_area();
            if (c[0] - y[0]).powi(2) + (c[1] - y[1]).powi(2) < n * n {
                ball += mask.cell_area();
            }
        }
    }
    if ball > 1.0 / n {
        return Err(Error::invalid("S meets the ball in more than 1/n"));
    }
    let outside = 2.0 * PI / b - box_mass(b, y, ext.lo, ext.hi);
    let tailterm = (-0.5 * b * n * n).exp();
    Ok(NecessityReport {
        value: inside + outside.max(0.0),
        ball_measure: ball,
        bound: 1.0 / n + 2.0 * PI / b * tailterm,
        bound_printed: 1.0 / n + tailterm / b,
    })
}

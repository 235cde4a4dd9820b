use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};

type C = Complex64;

/// Relative slack granted to grid suprema.
pub const SUP_TOL: f64 = 1e-8;

/// Finite union of closed intervals in `[0, 1]`, sorted and merged.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet {
    parts: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut parts: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &parts {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || !(a < b) {
                return Err(Error::invalid("intervals must satisfy 0 ≤ a < b ≤ 1"));
            }
        }
        if parts.is_empty() {
            return Err(Error::invalid("interval set must have positive length"));
        }
        parts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
        for (a, b) in parts {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { parts: merged })
    }

    pub fn unit() -> Self {
        Self { parts: alloc::vec![(0.0, 1.0)] }
    }

    pub fn parts(&self) -> &[(f64, f64)] {
        &self.parts
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(|(a, b)| b - a).sum()
    }
}

/// Complex polynomial `Σ c_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoly {
    pub coeffs: Vec<C>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<C>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, z: C) -> C {
        self.coeffs.iter().rev().fold(C::zero(), |acc, c| acc * z + c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    /// `T_n(2t/s − 1)`, the Chebyshev polynomial mapped to `[0, s]`.
    pub fn chebyshev_on(n: usize, s: f64) -> Self {
        // T_k(a t + b) by the three-term recurrence on coefficient vectors
        let (a, b) = (2.0 / s, -1.0);
        let mut prev = alloc::vec![C::new(1.0, 0.0)];
        if n == 0 {
            return Self::new(prev);
        }
        let mut cur = alloc::vec![C::new(b, 0.0), C::new(a, 0.0)];
        for _ in 1..n {
            let mut next = alloc::vec![C::zero(); cur.len() + 1];
            for (k, c) in cur.iter().enumerate() {
                next[k] += c * 2.0 * b;
                next[k + 1] += c * 2.0 * a;
            }
            for (k, c) in prev.iter().enumerate() {
                next[k] -= c;
            }
            prev = cur;
            cur = next;
        }
        Self::new(cur)
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
        if b - a < 1e-14 {
            break;
        }
    }
    f1.max(f2)
}

/// `sup_{t ∈ set} f(t)` on a grid of at least `n` points, refined by
/// golden-section search around the five best grid values.
pub fn sup_on(f: impl Fn(f64) -> f64, set: &IntervalSet, n: usize) -> f64 {
    let total = set.measure();
    let mut cands: Vec<(f64, f64, f64, f64)> = Vec::new(); // (value, t, lo, hi)
    for &(a, b) in set.parts() {
        let k = ((n as f64 * (b - a) / total).ceil() as usize).max(64);
        let step = (b - a) / k as f64;
        for i in 0..=k {
            let t = if i == k { b } else { a + i as f64 * step };
            cands.push((f(t), t, (t - step).max(a), (t + step).min(b)));
        }
    }
    cands.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut best = cands[0].0;
    for &(_, _, lo, hi) in cands.iter().take(5) {
        best = best.max(golden_max(&f, lo, hi));
    }
    best
}

/// `max_{|z| = r} f(z)` over a periodic angle grid with refinement.
pub fn max_on_circle(f: impl Fn(C) -> f64, r: f64, n: usize) -> f64 {
    let g = |th: f64| f(C::from_polar(r, th));
    let step = 2.0 * PI / n as f64;
    let mut vals: Vec<(f64, f64)> = (0..n).map(|i| (g(i as f64 * step), i as f64 * step)).collect();
    vals.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut best = vals[0].0;
    for &(_, th) in vals.iter().take(5) {
        best = best.max(golden_max(&g, th - step, th + step));
    }
    best
}

/// `(4/|E|)^n`.
pub fn remez_bound(n: u32, measure: f64) -> Result<f64> {
    if !(measure > 0.0 && measure <= 1.0) {
        return Err(Error::invalid("measure must lie in (0, 1]"));
    }
    Ok((4.0 / measure).powi(n as i32))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemezOutcome {
    pub sup_unit: f64,
    pub sup_set: f64,
    pub bound: f64,
    /// `sup_unit / sup_set`.
    pub ratio: f64,
    pub holds: bool,
}

pub const DEFAULT_SUP_GRID: usize = 10_000;

/// Both sides of the Remez inequality on grid suprema.
pub fn remez_check(p: &ComplexPoly, set: &IntervalSet) -> Result<RemezOutcome> {
    let f = |t: f64| p.eval(C::new(t, 0.0)).norm();
    let sup_unit = sup_on(f, &IntervalSet::unit(), DEFAULT_SUP_GRID);
    let sup_set = sup_on(f, set, DEFAULT_SUP_GRID);
    let bound = remez_bound(p.degree() as u32, set.measure())?;
    let ratio = if sup_set > 0.0 { sup_unit / sup_set } else if sup_unit > 0.0 { f64::INFINITY } else { 1.0 };
    Ok(RemezOutcome { sup_unit, sup_set, bound, ratio, holds: sup_unit <= bound * sup_set * (1.0 + SUP_TOL) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KovrijkineOutcome {
    /// `max_{|z| ≤ 4} |φ|`, attained on the circle.
    pub m_phi: f64,
    /// `2 log M / log 2`.
    pub exponent: f64,
    pub sup_unit: f64,
    pub sup_set: f64,
    /// `ln` of `(12/|E|)^exponent`.
    pub ln_factor: f64,
    pub holds: bool,
}

/// Checks `sup_{[0,1]}|φ| ≤ (12/|E|)^{2 log M/log 2} sup_E |φ|`.
pub fn kovrijkine_check(phi: &ComplexPoly, set: &IntervalSet) -> Result<KovrijkineOutcome> {
    if phi.eval(C::zero()).norm() < 1.0 - 1e-12 {
        return Err(Error::invalid("need |φ(0)| ≥ 1"));
    }
    let m_phi = max_on_circle(|z| phi.eval(z).norm(), 4.0, 4096).max(phi.eval(C::zero()).norm());
    let exponent = 2.0 * m_phi.ln().max(0.0) / 2f64.ln();
    let ln_factor = exponent * (12.0 / set.measure()).ln();
    let f = |t: f64| phi.eval(C::new(t, 0.0)).norm();
    let sup_unit = sup_on(f, &IntervalSet::unit(), DEFAULT_SUP_GRID);
    let sup_set = sup_on(f, set, DEFAULT_SUP_GRID);
    let holds = sup_unit.ln() <= ln_factor + sup_set.ln() + SUP_TOL;
    Ok(KovrijkineOutcome { m_phi, exponent, sup_unit, sup_set, ln_factor, holds })
}

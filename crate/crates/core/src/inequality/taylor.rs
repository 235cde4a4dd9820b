use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::geometry::{Rect, SetMask};
use crate::landau::{GridField, Symbolic};

type C = Complex64;

pub const DEFAULT_TAYLOR_DEGREE: usize = 24;

/// Degree-`D` Taylor polynomial of `|f|²` at `x0`, continued to `ℂ²`:
/// `G(x0 + w) = Σ_{a+b ≤ D} g[a][b] w1^a w2^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorModel {
    pub x0: [f64; 2],
    pub degree: usize,
    pub g: Vec<Vec<C>>,
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Series of `exp(l w − (B/4) w²)`.
fn gauss_series(l: C, b: f64, d: usize) -> Vec<C> {
    let mut e = alloc::vec![C::zero(); d + 1];
    e[0] = C::new(1.0, 0.0);
    if d >= 1 {
        e[1] = l;
    }
    for k in 1..d {
        e[k + 1] = (l * e[k] - e[k - 1] * (0.5 * b)) / (k + 1) as f64;
    }
    e
}

impl TaylorModel {
    pub fn of_density(sym: &Symbolic, x0: [f64; 2], degree: usize) -> Self {
        let d = degree;
        let b = sym.b;
        let mut f = alloc::vec![alloc::vec![C::zero(); d + 1]; d + 1];
        for (y, p) in &sym.terms {
            let dd = [x0[0] - y[0], x0[1] - y[1]];
            let c0 = C::new(-0.25 * b * (dd[0] * dd[0] + dd[1] * dd[1]), -0.5 * b * (x0[0] * y[1] - x0[1] * y[0])).exp();
            let e1 = gauss_series(C::new(-0.5 * b * dd[0], -0.5 * b * y[1]), b, d);
            let e2 = gauss_series(C::new(-0.5 * b * dd[1], 0.5 * b * y[0]), b, d);
            // p(dd + w)
            let mut shifted = alloc::vec![alloc::vec![C::zero(); d + 1]; d + 1];
            for (i, j, c) in p.nonzero() {
                for a in 0..=i.min(d) {
                    for bb in 0..=j.min(d) {
                        shifted[a][bb] +=
                            c * binom(i, a) * binom(j, bb) * dd[0].powi((i - a) as i32) * dd[1].powi((j - bb) as i32);
                    }
                }
            }
            for a in 0..=d {
                for bb in 0..=(d - a) {
                    let mut acc = C::zero();
                    for a2 in 0..=a {
                        for b2 in 0..=bb {
                            let s = shifted[a2][b2];
                            if !s.is_zero() {
                                acc += s * e1[a - a2] * e2[bb - b2];
                            }
                        }
                    }
                    f[a][bb] += c0 * acc;
                }
            }
        }
        // G = F · conj-coefficients(F)
        let mut g = alloc::vec![alloc::vec![C::zero(); d + 1]; d + 1];
        for a in 0..=d {
            for bb in 0..=(d - a) {
                let mut acc = C::zero();
                for a2 in 0..=a {
                    for b2 in 0..=bb {
                        acc += f[a2][b2] * f[a - a2][bb - b2].conj();
                    }
                }
                g[a][bb] = acc;
            }
        }
        Self { x0, degree: d, g }
    }

    pub fn eval(&self, w: [C; 2]) -> C {
        let mut out = C::zero();
        for a in (0..=self.degree).rev() {
            let mut row = C::zero();
            for bb in (0..=(self.degree - a)).rev() {
                row = row * w[1] + self.g[a][bb];
            }
            out = out * w[0] + row;
        }
        out
    }

    /// Shell sums `s_m = Σ_{a+b=m} |g_ab| r1^a r2^b`.
    pub fn shells(&self, r: [f64; 2]) -> Vec<f64> {
        (0..=self.degree)
            .map(|m| (0..=m).map(|a| self.g[a][m - a].norm() * r[0].powi(a as i32) * r[1].powi((m - a) as i32)).sum())
            .collect()
    }

    /// Upper bound for `sup_{|w_j| ≤ r_j} |G|`: the coefficient majorant
    /// plus a geometric tail fitted to the last shells of each parity
    /// (densities of single Gaussians have empty odd shells). Fails when
    /// the last shells are not contracting.
    pub fn majorant(&self, r: [f64; 2]) -> Result<f64> {
        let s = self.shells(r);
        let d = self.degree;
        if d < 4 {
            return Err(Error::invalid("Taylor degree too small for a tail estimate"));
        }
        let head: f64 = s.iter().sum();
        let ratio2 = |m: usize| {
            if s[m - 2] > 0.0 {
                s[m] / s[m - 2]
            } else if s[m] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        };
        let q2 = ratio2(d).max(ratio2(d - 1));
        if !(q2 < 1.0) {
            return Err(Error::numerical("M unbounded at truncation: Taylor shells do not contract"));
        }
        Ok(head + (s[d] + s[d - 1]) * q2 / (1.0 - q2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalEstimateOutcome {
    /// `‖g‖_{L¹(Q∩U)}`.
    pub lhs: f64,
    /// First lower bound of the lemma.
    pub rhs: f64,
    /// Second, weaker lower bound.
    pub rhs_weak: f64,
    pub m: f64,
    pub exponent: f64,
    pub holds: bool,
}

/// Both sides of the local lower bound for `g = |f|²` on `Q`, with `M`
/// taken from the Taylor model's majorant over `Q + D_{(4ℓ1, 4ℓ2)}`.
pub fn local_estimate_check(f: &GridField, q: Rect, u: &SetMask, a: [[f64; 2]; 2], degree: usize) -> Result<LocalEstimateOutcome> {
    let sym = f.tag.as_ref().ok_or_else(|| Error::invalid("field needs a closed form for the analytic model"))?;
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det.abs() > 0.0) {
        return Err(Error::invalid("A must be invertible"));
    }
    let g = f.grid;
    let area = g.cell_area();
    let (mut n_q, mut n_qu) = (0usize, 0usize);
    let (mut l1_q, mut l1_qu) = (0.0, 0.0);
    let mut min_g = f64::INFINITY;
    for i2 in 0..g.n[1] {
        for i1 in 0..g.n[0] {
            let x = g.point(i1, i2);
            if !q.contains(x) {
                continue;
            }
            let v = f.at(i1, i2).norm_sqr();
            min_g = min_g.min(v);
            n_q += 1;
            l1_q += v * area;
            if u.contains(x) {
                n_qu += 1;
                l1_qu += v * area;
            }
        }
    }
    if n_q == 0 {
        return Err(Error::invalid("rectangle contains no sample points"));
    }
    if !(min_g > 0.0) {
        return Err(Error::invalid("|f|² vanishes on Q"));
    }
    let l = q.sides();
    let vol_q = q.area();
    let frac = n_qu as f64 / n_q as f64;
    let x0 = [0.5 * (q.lo[0] + q.hi[0]), 0.5 * (q.lo[1] + q.hi[1])];
    let model = TaylorModel::of_density(sym, x0, degree);
    let sup_g = model.majorant([4.5 * l[0], 4.5 * l[1]])?;
    let m = (vol_q / l1_q * sup_g).max(1.0);
    let exponent = 2.0 * m.ln() / 2f64.ln();
    let apply = |v: [f64; 2]| [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]];
    let diam = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
    let diam_aq = diam(apply([l[0], l[1]])).max(diam(apply([l[0], -l[1]])));
    let base = det.abs() * frac * vol_q / (48.0 * PI * diam_aq * diam_aq);
    let rhs = 0.5 * base.powf(exponent) * frac * l1_q;
    let rhs_weak = 0.5 * base.powf(exponent + 1.0) * l1_q;
    Ok(LocalEstimateOutcome { lhs: l1_qu, rhs, rhs_weak, m, exponent, holds: l1_qu >= rhs && l1_qu >= rhs_weak })
}

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::MagneticOperator;
use crate::error::{Error, Result};
use crate::linalg::{dot, eigh, lowest_eigenpairs, norm, HermitianOp, KrylovOptions};

type C = Complex64;

/// Problems up to this dimension are diagonalized densely.
pub const DENSE_LIMIT: usize = 576;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    /// All eigenpairs with eigenvalue `≤ E`.
    Energy(f64),
    /// The lowest `k` eigenpairs.
    Count(usize),
}

#[derive(Clone, Debug)]
pub struct EigenConfig {
    pub dense_limit: usize,
    pub krylov: KrylovOptions,
    /// Accept cutoffs above the trustworthy band.
    pub allow_rough: bool,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self { dense_limit: DENSE_LIMIT, krylov: KrylovOptions::default(), allow_rough: false }
    }
}

/// Orthonormal eigenpairs below a cutoff. Vectors are unit in the plain
/// Euclidean norm of grid values; multiply by the cell area for L² norms.
#[derive(Clone, Debug)]
pub struct SpectralSubspace {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C>>,
    pub residuals: Vec<f64>,
    pub cutoff: f64,
    pub tolerance: f64,
    pub cell_area: f64,
}

impl SpectralSubspace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.len())
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - C::new(want, 0.0)).norm());
            }
        }
        worst
    }

    /// Keeps the pairs whose eigenvalue lies in `[lo, hi]`.
    pub fn select(&self, lo: f64, hi: f64) -> SpectralSubspace {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| self.values[k] >= lo && self.values[k] <= hi).collect();
        SpectralSubspace {
            values: keep.iter().map(|&k| self.values[k]).collect(),
            vectors: keep.iter().map(|&k| self.vectors[k].clone()).collect(),
            residuals: keep.iter().map(|&k| self.residuals[k]).collect(),
            cutoff: hi.min(self.cutoff),
            tolerance: self.tolerance,
            cell_area: self.cell_area,
        }
    }

    /// Groups eigenvalues into clusters separated by gaps wider than `gap`.
    pub fn clusters(&self, gap: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for k in 0..self.len() {
            match out.last_mut() {
                Some(c) if self.values[k] - self.values[*c.last().unwrap()] <= gap => c.push(k),
                _ => out.push(alloc::vec![k]),
            }
        }
        out
    }
}

fn shift_below(op: &MagneticOperator) -> f64 {
    let s = &op.setup;
    let lmax = s.l[0].max(s.l[1]);
    let scale = s.b.max((2.0 * core::f64::consts::PI / lmax).powi(2)).max(1e-3);
    op.min_potential() - 0.5 * scale
}

/// Number of eigenvalues strictly below `e`, by Sylvester inertia.
pub fn count_below(op: &MagneticOperator, e: f64) -> Result<usize> {
    let (band, _) = op.to_banded();
    Ok(band.ldl(e)?.negative_count())
}

/// `#{λ ∈ [e − eps, e + eps]}` from two inertia counts.
pub fn count_in_window(op: &MagneticOperator, e: f64, eps: f64) -> Result<usize> {
    if !(eps >= 0.0) {
        return Err(Error::invalid("window half-width must be non-negative"));
    }
    let (band, _) = op.to_banded();
    let hi = band.ldl(e + eps)?.negative_count();
    let lo = band.ldl(e - eps)?.negative_count();
    Ok(hi.saturating_sub(lo))
}

fn residual(op: &MagneticOperator, v: &[C], lam: f64) -> f64 {
    let mut hv = alloc::vec![C::new(0.0, 0.0); v.len()];
    op.apply(v, &mut hv);
    for (a, b) in hv.iter_mut().zip(v) {
        *a -= b * lam;
    }
    norm(&hv)
}

pub fn eigensolve(op: &MagneticOperator, cutoff: Cutoff, cfg: &EigenConfig) -> Result<SpectralSubspace> {
    let n = op.dim();
    if let Cutoff::Energy(e) = cutoff {
        if !cfg.allow_rough && e > op.setup.trustworthy_energy() {
            return Err(Error::invalid("cutoff lies above the grid's trustworthy band (0.1/h^2)"));
        }
    }
    let tol = cfg.krylov.tol;
    let (values, vectors, cut) = if n <= cfg.dense_limit {
        let (vals, vecs) = eigh(&op.to_dense())?;
        let k = match cutoff {
            Cutoff::Energy(e) => vals.iter().filter(|&&v| v <= e).count(),
            Cutoff::Count(k) => k.min(n),
        };
        let cut = match cutoff {
            Cutoff::Energy(e) => e,
            Cutoff::Count(_) => vals.get(k.saturating_sub(1)).copied().unwrap_or(f64::NEG_INFINITY),
        };
        (vals[..k].to_vec(), (0..k).map(|j| vecs.col(j).to_vec()).collect::<Vec<_>>(), cut)
    } else {
        let (band, perm) = op.to_banded();
        let k = match cutoff {
            Cutoff::Energy(e) => band.ldl(e)?.negative_count(),
            Cutoff::Count(k) => k.min(n),
        };
        let sigma = shift_below(op);
        let fac = band.ldl(sigma)?;
        if fac.negative_count() != 0 {
            return Err(Error::numerical("shift is not below the spectrum"));
        }
        // the factor lives in the folded ordering
        let inv = |x: &[C]| -> Vec<C> {
            let xp: Vec<C> = perm.iter().map(|&i| x[i]).collect();
            let yp = fac.solve(&xp);
            let mut y = alloc::vec![C::new(0.0, 0.0); n];
            for (p, &i) in perm.iter().enumerate() {
                y[i] = yp[p];
            }
            y
        };
        let (vals, vecs, _) = lowest_eigenpairs(op, inv, k, &cfg.krylov)?;
        let cut = match cutoff {
            Cutoff::Energy(e) => e,
            Cutoff::Count(_) => vals.last().copied().unwrap_or(f64::NEG_INFINITY),
        };
        (vals, vecs, cut)
    };
    let residuals: Vec<f64> = values.iter().zip(&vectors).map(|(l, v)| residual(op, v, *l)).collect();
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if residuals.iter().any(|r| *r > tol * scale * 10.0) {
        return Err(Error::numerical("eigenpair residual above tolerance"));
    }
    Ok(SpectralSubspace {
        values,
        vectors,
        residuals,
        cutoff: cut,
        tolerance: tol * scale * 10.0,
        cell_area: op.setup.cell_area(),
    })
}

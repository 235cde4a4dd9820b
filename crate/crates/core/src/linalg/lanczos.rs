use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{axpy, dot, eigh, norm, DMat};
use crate::error::{Error, Result};

type C = Complex64;

/// Hermitian operator acting on complex vectors.
pub trait HermitianOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C], y: &mut [C]);
}

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    /// Extra block columns beyond the number of wanted pairs.
    pub guard: usize,
    /// Number of blocks kept before a restart.
    pub blocks: usize,
    pub max_restarts: usize,
    /// Residual tolerance, relative to `max(1, |θ|)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { guard: 3, blocks: 6, max_restarts: 40, tol: 1e-9, seed: 0x5eed }
    }
}

/// Orthogonalizes `w` against `basis` twice (classical Gram–Schmidt).
fn cgs2(basis: &[Vec<C>], w: &mut [C]) {
    for _ in 0..2 {
        let coeffs: Vec<C> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, c) in basis.iter().zip(coeffs) {
            axpy(-c, v, w);
        }
    }
}

/// Appends the vectors in `block` to `basis` after orthogonalization,
/// dropping numerically dependent ones. Returns the accepted vectors.
fn extend_basis(basis: &mut Vec<Vec<C>>, block: Vec<Vec<C>>) -> Vec<Vec<C>> {
    let mut accepted = Vec::new();
    for mut w in block {
        let before = norm(&w);
        if before == 0.0 {
            continue;
        }
        cgs2(basis, &mut w);
        let after = norm(&w);
        if after <= 1e-10 * before {
            continue;
        }
        for z in &mut w {
            *z /= after;
        }
        basis.push(w.clone());
        accepted.push(w);
    }
    accepted
}

/// Lowest `nev` eigenpairs of `op`, using `inv` (an approximation of
/// `(op − σ)^{-1}` for a shift σ below the wanted eigenvalues) to build
/// restarted block Krylov spaces, followed by Rayleigh–Ritz with `op`.
pub fn lowest_eigenpairs<A, F>(
    op: &A,
    inv: F,
    nev: usize,
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, Vec<Vec<C>>, Vec<f64>)>
where
    A: HermitianOp,
    F: Fn(&[C]) -> Vec<C>,
{
    let n = op.dim();
    if nev == 0 {
        return Ok((Vec::new(), Vec::new(), Vec::new()));
    }
    if nev > n {
        return Err(Error::invalid("more eigenpairs requested than the dimension"));
    }
    let p = (nev + opts.guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<Vec<C>> = (0..p)
        .map(|_| (0..n).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect();
    let mut basis: Vec<Vec<C>> = Vec::new();
    let mut last = extend_basis(&mut basis, start);
    let max_basis = (p * opts.blocks).min(n);
    let mut hx = alloc::vec![C::zero(); n];
    for _restart in 0..=opts.max_restarts {
        while basis.len() < max_basis && !last.is_empty() {
            let room = max_basis - basis.len();
            let block: Vec<Vec<C>> = last.iter().take(room).map(|x| inv(x)).collect();
            last = extend_basis(&mut basis, block);
        }
        // Rayleigh–Ritz with op itself
        let k = basis.len();
        let mut hv: Vec<Vec<C>> = Vec::with_capacity(k);
        for v in &basis {
            op.apply(v, &mut hx);
            hv.push(hx.clone());
        }
        let g = DMat::from_fn(k, k, |i, j| dot(&basis[i], &hv[j]));
        let mut gh = g.clone();
        for i in 0..k {
            for j in 0..k {
                gh[(i, j)] = 0.5 * (g[(i, j)] + g[(j, i)].conj());
            }
        }
        let (theta, s) = eigh(&gh)?;
        let take = p.min(k);
        let mut vecs: Vec<Vec<C>> = Vec::with_capacity(take);
        let mut res: Vec<f64> = Vec::with_capacity(take);
        for j in 0..take {
            let mut y = alloc::vec![C::zero(); n];
            let mut r = alloc::vec![C::zero(); n];
            for (i, sij) in s.col(j).iter().enumerate() {
                axpy(*sij, &basis[i], &mut y);
                axpy(*sij, &hv[i], &mut r);
            }
            axpy(C::new(-theta[j], 0.0), &y, &mut r);
            res.push(norm(&r));
            vecs.push(y);
        }
        let converged = (0..nev.min(take)).all(|j| res[j] <= opts.tol * theta[j].abs().max(1.0));
        if converged && take >= nev {
            vecs.truncate(nev);
            res.truncate(nev);
            return Ok((theta[..nev].to_vec(), vecs, res));
        }
        basis.clear();
        last = extend_basis(&mut basis, vecs);
    }
    Err(Error::numerical("block Krylov eigensolver did not converge within the restart budget"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::banded::BandedHermitian;
    use crate::linalg::dense::eigvalsh;

    struct Band(BandedHermitian);

    impl HermitianOp for Band {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn apply(&self, x: &[C], y: &mut [C]) {
            self.0.matvec(x, y)
        }
    }

    #[test]
    fn finds_lowest_of_laplacian_chain() {
        // periodic chain with a flux: eigenvalues 2 − 2cos((2πk + φ)/n)
        let n = 200;
        let phi = 0.3;
        let mut a = BandedHermitian::zeros(n, n - 1);
        for i in 0..n {
            a.add(i, i, C::new(2.0, 0.0)).unwrap();
            let j = (i + 1) % n;
            let hop = if j == 0 { C::from_polar(-1.0, phi) } else { C::new(-1.0, 0.0) };
            a.add(j, i, hop).unwrap();
        }
        let dense = DMat::from_fn(n, n, |i, j| a.get(i, j));
        let exact = eigvalsh(&dense).unwrap();
        let f = a.ldl(-0.5).unwrap();
        let op = Band(a);
        let (vals, vecs, res) = lowest_eigenpairs(&op, |x| f.solve(x), 6, &KrylovOptions::default()).unwrap();
        for k in 0..6 {
            assert!((vals[k] - exact[k]).abs() < 1e-10, "k={k} {} {}", vals[k], exact[k]);
            assert!(res[k] < 1e-8);
        }
        for i in 0..6 {
            for j in 0..6 {
                let d = dot(&vecs[i], &vecs[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - C::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }
}

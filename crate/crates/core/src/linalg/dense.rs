use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};

type C = Complex64;

/// Dense complex matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: alloc::vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_columns(rows: usize, cols: &[Vec<C>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.col_mut(j).copy_from_slice(c);
        }
        m
    }

    pub fn col(&self, j: usize) -> &[C] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn adjoint(&self) -> DMat {
        DMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, o: &DMat) -> DMat {
        assert_eq!(self.cols, o.rows);
        let mut out = DMat::zeros(self.rows, o.cols);
        for j in 0..o.cols {
            for k in 0..self.cols {
                let s = o[(k, j)];
                if s == C::zero() {
                    continue;
                }
                let a = self.col(k);
                let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
                for (d, x) in dst.iter_mut().zip(a) {
                    *d += x * s;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[C]) -> Vec<C> {
        let mut y = alloc::vec![C::zero(); self.rows];
        for (k, &s) in x.iter().enumerate() {
            for (d, a) in y.iter_mut().zip(self.col(k)) {
                *d += a * s;
            }
        }
        y
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..self.rows {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl core::ops::Index<(usize, usize)> for DMat {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[j * self.rows + i]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[j * self.rows + i]
    }
}

pub fn dot(a: &[C], b: &[C]) -> C {
    // conjugate-linear in the first argument
    a.iter().zip(b).fold(C::zero(), |s, (x, y)| s + x.conj() * y)
}

pub fn norm(a: &[C]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(alpha: C, x: &[C], y: &mut [C]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Reduces a Hermitian matrix to real symmetric tridiagonal form.
/// Returns `(diag, offdiag, Q)` with `A = Q T Q^H`, `offdiag[k] = T[k+1,k]`.
fn tridiagonalize(a: &DMat, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<DMat>) {
    let n = a.rows;
    let mut a = a.clone();
    let mut reflectors: Vec<(usize, Vec<C>)> = Vec::new();
    let mut sub = alloc::vec![C::zero(); n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C> = (0..m).map(|i| a[(k + 1 + i, k)]).collect();
        let xn = norm(&x);
        if xn == 0.0 {
            sub[k] = C::zero();
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C::new(1.0, 0.0) };
        let alpha = -phase * xn;
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = norm(&v);
        if vn == 0.0 {
            sub[k] = x[0];
            continue;
        }
        for z in &mut v {
            *z /= vn;
        }
        // p = A22 v, K = v^H p, w = p - K v, A22 -= 2(v w^H + w v^H)
        let mut p = alloc::vec![C::zero(); m];
        for j in 0..m {
            let vj = v[j];
            for i in 0..m {
                p[i] += a[(k + 1 + i, k + 1 + j)] * vj;
            }
        }
        let kk = dot(&v, &p);
        let w: Vec<C> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for j in 0..m {
            let (vj, wj) = (v[j].conj(), w[j].conj());
            for i in 0..m {
                a[(k + 1 + i, k + 1 + j)] -= 2.0 * (v[i] * wj + w[i] * vj);
            }
        }
        sub[k] = alpha;
        for i in 1..m {
            a[(k + 1 + i, k)] = C::zero();
            a[(k, k + 1 + i)] = C::zero();
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        if want_q {
            reflectors.push((k + 1, v));
        }
    }
    if n >= 2 {
        sub[n - 2] = a[(n - 1, n - 2)];
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    // phase scaling D so that D^H T D is real with |sub| off the diagonal
    let mut d = alloc::vec![C::new(1.0, 0.0); n];
    let mut off = alloc::vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let r = sub[k].norm();
        off[k] = r;
        d[k + 1] = if r > 0.0 { d[k] * (sub[k] / r) } else { d[k] };
    }
    let q = if want_q {
        let mut q = DMat::identity(n);
        for (start, v) in reflectors.iter().rev() {
            // q <- (I - 2 v v^H) q on rows start..
            for j in 0..n {
                let col = q.col_mut(j);
                let s: C = v.iter().zip(&col[*start..]).fold(C::zero(), |s, (vi, ci)| s + vi.conj() * ci);
                if s == C::zero() {
                    continue;
                }
                for (ci, vi) in col[*start..].iter_mut().zip(v) {
                    *ci -= 2.0 * s * vi;
                }
            }
        }
        for j in 0..n {
            let dj = d[j];
            for z in q.col_mut(j) {
                *z *= dj;
            }
        }
        Some(q)
    } else {
        None
    };
    (diag, off, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[k] = T[k+1,k]`.
/// If `z` is given (row-major n×n), rotations are accumulated into it.
fn tql2(d: &mut [f64], e_in: &[f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut e = alloc::vec![0.0; n];
    e[..n - 1].copy_from_slice(e_in);
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::numerical("tridiagonal QL did not converge"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zk1 = z[k * n + i + 1];
                            let zk = z[k * n + i];
                            z[k * n + i + 1] = s * zk + c * zk1;
                            z[k * n + i] = c * zk - s * zk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn eigvalsh(a: &DMat) -> Result<Vec<f64>> {
    let (mut d, e, _) = tridiagonalize(a, false);
    tql2(&mut d, &e, None)?;
    d.sort_by(|x, y| x.total_cmp(y));
    Ok(d)
}

/// Full eigendecomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors as columns.
pub fn eigh(a: &DMat) -> Result<(Vec<f64>, DMat)> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let (mut d, e, q) = tridiagonalize(a, true);
    let q = q.expect("requested");
    let mut z = alloc::vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &e, Some(&mut z))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    // V = Q Z, columns permuted
    let mut v = DMat::zeros(n, n);
    for (jn, &jo) in order.iter().enumerate() {
        let dst = v.col_mut(jn);
        for k in 0..n {
            let s = z[k * n + jo];
            if s == 0.0 {
                continue;
            }
            for (di, qi) in dst.iter_mut().zip(q.col(k)) {
                *di += qi * s;
            }
        }
    }
    Ok((vals, v))
}

/// Cholesky factor `L` (lower) of a Hermitian positive definite matrix.
pub fn cholesky(a: &DMat) -> Result<DMat> {
    let n = a.rows;
    let mut l = DMat::zeros(n, n);
    for j in 0..n {
        let mut s = a[(j, j)].re;
        for k in 0..j {
            s -= l[(j, k)].norm_sqr();
        }
        if !(s > 0.0) {
            return Err(Error::numerical("matrix is not positive definite"));
        }
        let ljj = s.sqrt();
        l[(j, j)] = C::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut t = a[(i, j)];
            for k in 0..j {
                t -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = t / ljj;
        }
    }
    Ok(l)
}

/// Solves `L L^H x = b`.
pub fn cholesky_solve(l: &DMat, b: &[C]) -> Vec<C> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut t = y[i];
        for k in 0..i {
            t -= l[(i, k)] * y[k];
        }
        y[i] = t / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut t = y[i];
        for k in (i + 1)..n {
            t -= l[(k, i)].conj() * y[k];
        }
        y[i] = t / l[(i, i)];
    }
    y
}

/// Hermitian positive definite solve with a condition check and a few
/// rounds of iterative refinement.
pub fn hpd_solve(a: &DMat, b: &[C], max_condition: f64) -> Result<(Vec<C>, f64)> {
    let (vals, vecs) = eigh(a)?;
    let n = a.rows;
    if n == 0 {
        return Ok((Vec::new(), 1.0));
    }
    let lo = vals[0];
    let hi = vals[n - 1].abs().max(lo.abs());
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= max_condition) {
        return Err(Error::IllConditioned { condition: cond, witness: vecs.col(0).to_vec() });
    }
    let l = cholesky(a)?;
    let mut x = cholesky_solve(&l, b);
    for _ in 0..3 {
        let ax = a.matvec(&x);
        let r: Vec<C> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        if norm(&r) <= f64::EPSILON * norm(b) {
            break;
        }
        let dx = cholesky_solve(&l, &r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    Ok((x, cond))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> DMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DMat::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let z = if i == j {
                    C::new(rng.random_range(-1.0..1.0), 0.0)
                } else {
                    C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                };
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        a
    }

    #[test]
    fn eigh_reconstructs() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (17, 4), (40, 5)] {
            let a = random_hermitian(n, seed);
            let (vals, v) = eigh(&a).unwrap();
            for j in 0..n {
                let av = a.matvec(v.col(j));
                let r: f64 = av
                    .iter()
                    .zip(v.col(j))
                    .map(|(x, y)| (x - y * vals[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(r < 1e-12 * n as f64, "n={n} j={j} r={r}");
            }
            let g = v.adjoint().matmul(&v);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g[(i, j)] - C::new(want, 0.0)).norm() < 1e-12);
                }
            }
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
            let only = eigvalsh(&a).unwrap();
            for (x, y) in only.iter().zip(&vals) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigh_known_spectrum() {
        // path graph Laplacian-like tridiagonal with known eigenvalues
        let n = 12;
        let a = DMat::from_fn(n, n, |i, j| {
            if i == j {
                C::new(2.0, 0.0)
            } else if i + 1 == j {
                C::new(0.0, -1.0)
            } else if j + 1 == i {
                C::new(0.0, 1.0)
            } else {
                C::zero()
            }
        });
        let vals = eigvalsh(&a).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (core::f64::consts::PI * (k + 1) as f64 / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn hpd_solve_refines_and_flags() {
        let mut a = random_hermitian(8, 9);
        for i in 0..8 {
            a[(i, i)] += C::new(10.0, 0.0);
        }
        let b: Vec<C> = (0..8).map(|i| C::new(i as f64, 1.0)).collect();
        let (x, cond) = hpd_solve(&a, &b, 1e14).unwrap();
        assert!(cond < 10.0);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-12);
        }
        let mut s = DMat::identity(3);
        s[(2, 2)] = C::new(1e-16, 0.0);
        match hpd_solve(&s, &[C::new(1.0, 0.0); 3], 1e14) {
            Err(Error::IllConditioned { witness, .. }) => assert!((witness[2].norm() - 1.0).abs() < 1e-12),
            other => panic!("expected ill-conditioning, got {other:?}"),
        }
    }
}

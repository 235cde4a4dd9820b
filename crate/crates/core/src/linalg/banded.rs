use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

type C = Complex64;

/// Hermitian band matrix holding the lower triangle: entry `(i, j)` with
/// `i - bw <= j <= i` lives at `lower[i * (bw + 1) + (i - j)]`.
#[derive(Clone, Debug)]
pub struct BandedHermitian {
    n: usize,
    bw: usize,
    lower: Vec<C>,
}

impl BandedHermitian {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, lower: alloc::vec![C::zero(); n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Adds `v` at `(i, j)` and its conjugate at `(j, i)`. Diagonal entries
    /// receive only the real part.
    pub fn add(&mut self, i: usize, j: usize, v: C) -> Result<()> {
        let (r, c, v) = if i >= j { (i, j, v) } else { (j, i, v.conj()) };
        if r - c > self.bw {
            return Err(Error::invalid("entry outside band"));
        }
        let slot = &mut self.lower[r * (self.bw + 1) + (r - c)];
        if r == c {
            *slot += C::new(v.re, 0.0);
        } else {
            *slot += v;
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        let (r, c, conj) = if i >= j { (i, j, false) } else { (j, i, true) };
        if r - c > self.bw {
            return C::zero();
        }
        let v = self.lower[r * (self.bw + 1) + (r - c)];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    /// `L D L^H` factorization of `self - shift·I` without pivoting.
    pub fn ldl(&self, shift: f64) -> Result<LdlFactor> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut l = self.lower.clone();
        let mut d = alloc::vec![0.0f64; n];
        let tiny = f64::EPSILON * self.scale().max(shift.abs()).max(1.0);
        let mut t = alloc::vec![C::zero(); w];
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            // t_k = d_k conj(L_jk)
            for k in k0..j {
                t[j - k] = l[j * w + (j - k)].conj() * d[k];
            }
            let mut dj = l[j * w].re - shift;
            for k in k0..j {
                dj -= (l[j * w + (j - k)] * t[j - k]).re;
            }
            if dj.abs() < tiny {
                dj = if dj < 0.0 { -tiny } else { tiny };
            }
            d[j] = dj;
            let inv = 1.0 / dj;
            for i in (j + 1)..n.min(j + bw + 1) {
                let mut s = l[i * w + (i - j)];
                let ks = i.saturating_sub(bw).max(k0);
                for k in ks..j {
                    s -= l[i * w + (i - k)] * t[j - k];
                }
                l[i * w + (i - j)] = s * inv;
            }
        }
        if d.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical("non-finite pivot in band factorization"));
        }
        Ok(LdlFactor { n, bw, l, d })
    }

    fn scale(&self) -> f64 {
        self.lower.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[C], y: &mut [C]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for yi in y.iter_mut() {
            *yi = C::zero();
        }
        for i in 0..n {
            y[i] += C::new(self.lower[i * w].re, 0.0) * x[i];
            for j in i.saturating_sub(bw)..i {
                let a = self.lower[i * w + (i - j)];
                y[i] += a * x[j];
                y[j] += a.conj() * x[i];
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct LdlFactor {
    n: usize,
    bw: usize,
    l: Vec<C>,
    d: Vec<f64>,
}

impl LdlFactor {
    /// Number of negative pivots; by Sylvester's law this is the number of
    /// eigenvalues below the shift.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s;
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi /= di;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                s -= self.l[k * w + (k - i)].conj() * y[k];
            }
            y[i] = s;
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::{eigvalsh, DMat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, bw: usize, seed: u64) -> BandedHermitian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandedHermitian::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, C::new(rng.random_range(-2.0..2.0), 0.0)).unwrap();
            for j in i.saturating_sub(bw)..i {
                a.add(i, j, C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap();
            }
        }
        a
    }

    fn to_dense(a: &BandedHermitian) -> DMat {
        DMat::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
    }

    #[test]
    fn inertia_matches_dense() {
        for seed in 0..6 {
            let a = random_band(30, 4, seed);
            let vals = eigvalsh(&to_dense(&a)).unwrap();
            for &s in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
                let f = a.ldl(s).unwrap();
                let want = vals.iter().filter(|&&v| v < s).count();
                assert_eq!(f.negative_count(), want, "seed={seed} shift={s}");
            }
        }
    }

    #[test]
    fn solve_matches_matvec() {
        let a = random_band(25, 3, 11);
        let b: Vec<C> = (0..25).map(|i| C::new((i as f64).sin(), (i as f64).cos())).collect();
        let f = a.ldl(0.123).unwrap();
        let x = f.solve(&b);
        let mut y = alloc::vec![C::zero(); 25];
        a.matvec(&x, &mut y);
        for i in 0..25 {
            let r = y[i] - x[i] * 0.123 - b[i];
            assert!(r.norm() < 1e-9, "i={i} r={r}");
        }
    }

    #[test]
    fn out_of_band_rejected() {
        let mut a = BandedHermitian::zeros(5, 1);
        assert!(a.add(4, 0, C::new(1.0, 0.0)).is_err());
    }
}

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

type C = Complex64;

/// Complex polynomial in the offsets `(u1, u2)`; `c[i][j]` multiplies
/// `u1^i u2^j`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PolyU {
    c: Vec<Vec<C>>,
}

impl PolyU {
    pub fn constant(v: C) -> Self {
        Self { c: alloc::vec![alloc::vec![v]] }
    }

    pub fn from_coeffs(c: Vec<Vec<C>>) -> Self {
        let mut p = Self { c };
        p.trim();
        p
    }

    pub fn coeff(&self, i: usize, j: usize) -> C {
        self.c.get(i).and_then(|r| r.get(j)).copied().unwrap_or_else(C::zero)
    }

    /// Total degree bound (number of rows minus one).
    pub fn degree_u1(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    fn set(&mut self, i: usize, j: usize, v: C) {
        if self.c.len() <= i {
            self.c.resize(i + 1, Vec::new());
        }
        let row = &mut self.c[i];
        if row.len() <= j {
            row.resize(j + 1, C::zero());
        }
        row[j] = v;
    }

    fn add_at(&mut self, i: usize, j: usize, v: C) {
        let cur = self.coeff(i, j);
        self.set(i, j, cur + v);
    }

    fn trim(&mut self) {
        for row in &mut self.c {
            while row.last().is_some_and(|z| z.is_zero()) {
                row.pop();
            }
        }
        while self.c.last().is_some_and(|r| r.is_empty()) {
            self.c.pop();
        }
    }

    /// Nonzero coefficients as `(i, j, c)`.
    pub fn nonzero(&self) -> Vec<(usize, usize, C)> {
        let mut out = Vec::new();
        for (i, r) in self.c.iter().enumerate() {
            for (j, z) in r.iter().enumerate() {
                if !z.is_zero() {
                    out.push((i, j, *z));
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|r| r.iter().all(|z| z.is_zero()))
    }

    pub fn scale(&self, s: C) -> Self {
        Self::from_coeffs(self.c.iter().map(|r| r.iter().map(|z| z * s).collect()).collect())
    }

    pub fn add(&self, o: &PolyU) -> Self {
        let mut out = self.clone();
        for (i, r) in o.c.iter().enumerate() {
            for (j, z) in r.iter().enumerate() {
                out.add_at(i, j, *z);
            }
        }
        out.trim();
        out
    }

    pub fn d_u1(&self) -> Self {
        let mut out = PolyU::default();
        for (i, r) in self.c.iter().enumerate().skip(1) {
            for (j, z) in r.iter().enumerate() {
                out.add_at(i - 1, j, z * i as f64);
            }
        }
        out.trim();
        out
    }

    pub fn d_u2(&self) -> Self {
        let mut out = PolyU::default();
        for (i, r) in self.c.iter().enumerate() {
            for (j, z) in r.iter().enumerate().skip(1) {
                out.add_at(i, j - 1, z * j as f64);
            }
        }
        out.trim();
        out
    }

    /// Multiplies by `a·u1 + b·u2`.
    pub fn mul_linear(&self, a: C, b: C) -> Self {
        let mut out = PolyU::default();
        for (i, r) in self.c.iter().enumerate() {
            for (j, z) in r.iter().enumerate() {
                out.add_at(i + 1, j, z * a);
                out.add_at(i, j + 1, z * b);
            }
        }
        out.trim();
        out
    }

    pub fn mul(&self, o: &PolyU) -> Self {
        let mut out = PolyU::default();
        for (i1, r1) in self.c.iter().enumerate() {
            for (j1, z1) in r1.iter().enumerate() {
                for (i2, r2) in o.c.iter().enumerate() {
                    for (j2, z2) in r2.iter().enumerate() {
                        out.add_at(i1 + i2, j1 + j2, z1 * z2);
                    }
                }
            }
        }
        out.trim();
        out
    }

    pub fn eval(&self, u1: f64, u2: f64) -> C {
        let mut acc = C::zero();
        for r in self.c.iter().rev() {
            let mut inner = C::zero();
            for z in r.iter().rev() {
                inner = inner * u2 + z;
            }
            acc = acc * u1 + inner;
        }
        acc
    }
}

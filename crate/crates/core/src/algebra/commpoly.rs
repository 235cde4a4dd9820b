use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gauss::rat;

/// Polynomial in `t` whose coefficients are rational polynomials in `B`.
/// Keys are `(deg_t, deg_B)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CommPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl CommPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::term(0, 0, BigRational::one())
    }

    pub fn t() -> Self {
        Self::term(1, 0, BigRational::one())
    }

    pub fn term(dt: u32, db: u32, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(dt, db, c);
        p
    }

    fn add_term(&mut self, dt: u32, db: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((dt, db)).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(dt, db));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, dt: u32, db: u32) -> BigRational {
        self.terms.get(&(dt, db)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Degree in `t`.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    pub fn add(&self, o: &CommPoly) -> CommPoly {
        let mut out = self.clone();
        for (&(a, b), c) in &o.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn mul(&self, o: &CommPoly) -> CommPoly {
        let mut out = Self::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &o.terms {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, r: &BigRational) -> CommPoly {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, c * r);
        }
        out
    }

    /// Substitutes `t -> t + s·B` for an integer shift `s`.
    pub fn shift(&self, s: i64) -> CommPoly {
        let mut out = Self::zero();
        let sr = rat(s, 1);
        for (&(a, b), c) in &self.terms {
            // (t + sB)^a = Σ_k C(a,k) t^k (sB)^{a-k}
            let mut binom = BigInt::one();
            for k in (0..=a).rev() {
                let j = a - k;
                let mut sp = BigRational::one();
                for _ in 0..j {
                    sp *= &sr;
                }
                out.add_term(k, b + j, c * BigRational::from(binom.clone()) * sp);
                // C(a, k-1) = C(a, k) * k / (a - k + 1)
                if k > 0 {
                    binom = binom * BigInt::from(k) / BigInt::from(a - k + 1);
                }
            }
        }
        out
    }

    /// Substitutes `t = q·B` and returns the resulting polynomial in `B`
    /// as a map `deg_B -> coefficient`.
    pub fn at_multiple_of_b(&self, q: &BigRational) -> BTreeMap<u32, BigRational> {
        let mut out: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            let mut qp = BigRational::one();
            for _ in 0..a {
                qp *= q;
            }
            let e = out.entry(a + b).or_insert_with(BigRational::zero);
            *e += c * qp;
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Exact value at rational `t` and `B`.
    pub fn eval(&self, t: &BigRational, b: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(a, bb), c) in &self.terms {
            let mut v = c.clone();
            for _ in 0..a {
                v *= t;
            }
            for _ in 0..bb {
                v *= b;
            }
            acc += v;
        }
        acc
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, t: f64, b: f64) -> f64 {
        use num_traits::Float;
        self.terms
            .iter()
            .map(|(&(a, bb), c)| super::gauss::rat_to_f64(c) * t.powi(a as i32) * b.powi(bb as i32))
            .sum()
    }
}

fn fmt_coeff(r: &BigRational) -> String {
    if r.denom().is_one() {
        alloc::format!("{}", r.numer())
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CommPoly {
    /// Canonical form: descending powers of `t`, then of `B`, e.g.
    /// `t^3 + 10*t*B^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (&(a, b), c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if n == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mag = c.abs();
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || (a == 0 && b == 0) {
                parts.push(fmt_coeff(&mag));
            }
            match a {
                0 => {}
                1 => parts.push("t".into()),
                _ => parts.push(alloc::format!("t^{a}")),
            }
            match b {
                0 => {}
                1 => parts.push("B".into()),
                _ => parts.push(alloc::format!("B^{b}")),
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

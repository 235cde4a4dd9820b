use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt::{self, Write};
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact complex rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(rat(n, 1), BigRational::zero())
    }

    pub fn real(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }

    /// Lossy conversion for diagnostics.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        alloc::format!("{}", r.numer())
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => f.write_str(&fmt_rat(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    f.write_str("i")
                } else if (-self.im.clone()).is_one() {
                    f.write_str("-i")
                } else {
                    write!(f, "{}*i", fmt_rat(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "({} {} {}*i)", fmt_rat(&self.re), sign, fmt_rat(&self.im.abs()))
            }
        }
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

/// Exponent vector of a parameter monomial `B1^e0 B2^e1 B3^e2`.
pub type ParamExp = [u16; 3];

/// Polynomial in up to three field parameters with Gaussian-rational
/// coefficients. In the two-generator algebra only the first slot (`B`)
/// is used.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ParamPoly {
    terms: BTreeMap<ParamExp, GaussianRational>,
}

impl ParamPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn monomial(exp: ParamExp, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Self { terms }
    }

    /// `c · B` in the single-parameter setting.
    pub fn b_times(c: GaussianRational) -> Self {
        Self::monomial([1, 0, 0], c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ParamExp, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant coefficient if the polynomial has no parameter dependence.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => self.terms.get(&[0, 0, 0]).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, exp: ParamExp, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_default();
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn add_assign(&mut self, other: &ParamPoly) {
        for (e, c) in &other.terms {
            self.add_term(*e, c);
        }
    }

    pub fn add_scaled(&mut self, other: &ParamPoly, s: &ParamPoly) {
        for (e1, c1) in &other.terms {
            for (e2, c2) in &s.terms {
                self.add_term(add_exp(e1, e2), &(c1 * c2));
            }
        }
    }

    pub fn mul(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        out.add_scaled(self, other);
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, &(v * c));
        }
        out
    }

    pub fn neg(&self) -> ParamPoly {
        self.scale(&GaussianRational::from_int(-1))
    }

    /// Multiplies by a non-negative integer.
    pub fn times(&self, n: u32) -> ParamPoly {
        self.scale(&GaussianRational::from_int(i64::from(n)))
    }

    /// Substitutes rational values for the parameters.
    pub fn eval(&self, b: &[BigRational; 3]) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for (e, c) in &self.terms {
            let mut m = BigRational::one();
            for (k, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    m *= &b[k];
                }
            }
            acc = &acc + &c.scale(&m);
        }
        acc
    }
}

fn add_exp(a: &ParamExp, b: &ParamExp) -> ParamExp {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

const PARAM_NAMES: [&str; 3] = ["B", "B2", "B3"];

impl ParamPoly {
    /// Names used when the polynomial lives in the three-parameter setting.
    fn write_with(&self, names: &[&str; 3], f: &mut String) {
        if self.terms.is_empty() {
            f.push('0');
            return;
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                f.push_str(" + ");
            }
            first = false;
            let is_const = e.iter().all(|&x| x == 0);
            let coeff = alloc::format!("{c}");
            if is_const || coeff != "1" {
                f.push_str(&coeff);
            }
            for (k, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                if !f.ends_with(' ') && !f.is_empty() && !f.ends_with('(') {
                    f.push('*');
                }
                f.push_str(names[k]);
                if p > 1 {
                    let _ = write!(f, "^{p}");
                }
            }
        }
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_with(&PARAM_NAMES, &mut s);
        f.write_str(&s)
    }
}

/// Formats with explicit names (`B1, B2, B3` in the three-generator algebra).
pub fn format_param_poly(p: &ParamPoly, names: &[&str; 3]) -> String {
    let mut s = String::new();
    p.write_with(names, &mut s);
    s
}

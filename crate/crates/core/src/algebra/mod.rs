//! Exact covariant-derivative algebra and the polynomials `F_m`.
//!
//! Everything here is exact: coefficients are Gaussian rationals, the field
//! strength is either a symbolic parameter or a rational number.

mod commpoly;
mod gauss;
mod weyl;

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use commpoly::CommPoly;
pub use gauss::{rat, rat_to_f64, GaussianRational, ParamExp, ParamPoly};
pub use weyl::{normal_order, parse_word, Algebra, Mono, WeylPoly, WordPoly, DEFAULT_MAX_TERMS};

use crate::error::{Error, Result};

/// `F_m` from `F_0 = 1`, `F_{m+1}(t) = ½((t−B)F_m(t−2B) + (t+B)F_m(t+2B))`.
pub fn f_poly(m: u32) -> CommPoly {
    let half = rat(1, 2);
    let t_minus_b = CommPoly::t().add(&CommPoly::term(0, 1, rat(-1, 1)));
    let t_plus_b = CommPoly::t().add(&CommPoly::term(0, 1, rat(1, 1)));
    let mut f = CommPoly::one();
    for _ in 0..m {
        let lo = t_minus_b.mul(&f.shift(-2));
        let hi = t_plus_b.mul(&f.shift(2));
        f = lo.add(&hi).scale(&half);
    }
    f
}

/// All `F_0, …, F_m`.
pub fn f_polys(m: u32) -> Vec<CommPoly> {
    let mut out = Vec::with_capacity(m as usize + 1);
    out.push(CommPoly::one());
    let half = rat(1, 2);
    let t_minus_b = CommPoly::t().add(&CommPoly::term(0, 1, rat(-1, 1)));
    let t_plus_b = CommPoly::t().add(&CommPoly::term(0, 1, rat(1, 1)));
    for k in 0..m as usize {
        let f = &out[k];
        let next = t_minus_b.mul(&f.shift(-2)).add(&t_plus_b.mul(&f.shift(2))).scale(&half);
        out.push(next);
    }
    out
}

/// Substitutes the planar `H = d1² + d2²` for `t`, keeping `B` symbolic.
pub fn comm_at_h(p: &CommPoly, alg: &Arc<Algebra>) -> Result<WeylPoly> {
    let h = WeylPoly::hamiltonian(alg);
    let deg = p.degree().unwrap_or(0);
    let mut powers = Vec::with_capacity(deg as usize + 1);
    powers.push(WeylPoly::identity(alg));
    for j in 0..deg as usize {
        powers.push(powers[j].mul(&h)?);
    }
    let mut out = WeylPoly::zero(alg);
    for (&(a, b), c) in p.terms() {
        let s = ParamPoly::monomial([b as u16, 0, 0], GaussianRational::real(c.clone()));
        out = out.add(&powers[a as usize].scale(&s));
    }
    Ok(out)
}

/// `R^m(Id)` in the given algebra.
pub fn r_power_identity(alg: &Arc<Algebra>, m: u32) -> Result<WeylPoly> {
    let mut p = WeylPoly::identity(alg);
    for _ in 0..m {
        p = p.apply_r()?;
    }
    Ok(p)
}

/// Exact check that `R^m(Id) = F_m(H)` in the planar algebra.
pub fn verify_recursion(m: u32) -> Result<bool> {
    verify_recursion_capped(m, DEFAULT_MAX_TERMS)
}

pub fn verify_recursion_capped(m: u32, max_terms: usize) -> Result<bool> {
    let alg = Arc::new(Algebra::planar().with_max_terms(max_terms));
    let lhs = r_power_identity(&alg, m)?;
    let rhs = comm_at_h(&f_poly(m), &alg)?;
    Ok(lhs == rhs)
}

/// `Π_{j=1..m} (t + (2j−1)B)`.
pub fn level_product(m: u32) -> CommPoly {
    let mut p = CommPoly::one();
    for j in 1..=m {
        let f = CommPoly::t().add(&CommPoly::term(0, 1, rat(2 * i64::from(j) - 1, 1)));
        p = p.mul(&f);
    }
    p
}

/// `2^{-m} Π ≤ F_m(t) ≤ Π` at `t = (2k+1)B`, certified for all `B ≥ 0` by
/// non-negativity of every coefficient of both differences.
pub fn check_f_bounds(m: u32, k: u32) -> bool {
    let q = rat(2 * i64::from(k) + 1, 1);
    let f = f_poly(m).at_multiple_of_b(&q);
    let prod = level_product(m).at_multiple_of_b(&q);
    let mut scale = BigRational::one();
    for _ in 0..m {
        scale /= rat(2, 1);
    }
    let nonneg_diff = |hi: &alloc::collections::BTreeMap<u32, BigRational>,
                       lo: &alloc::collections::BTreeMap<u32, BigRational>,
                       lo_scale: &BigRational| {
        let mut keys: Vec<u32> = hi.keys().chain(lo.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.iter().all(|d| {
            let h = hi.get(d).cloned().unwrap_or_else(BigRational::zero);
            let l = lo.get(d).cloned().unwrap_or_else(BigRational::zero);
            !(h - l * lo_scale).is_negative()
        })
    };
    nonneg_diff(&f, &prod, &scale) && nonneg_diff(&prod, &f, &BigRational::one())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BernsteinVariant {
    L2,
    L1,
}

/// `(E + Bm)^m` for the L² inequality and `2^{3m/2}(E + Bm)^{m/2}` for the
/// L¹ one.
pub fn bernstein_constant(m: u32, e: f64, b: f64, variant: BernsteinVariant) -> Result<f64> {
    use num_traits::Float;
    if !(e >= 0.0) || !(b >= 0.0) {
        return Err(Error::invalid("E and B must be non-negative"));
    }
    let base = e + b * f64::from(m);
    let mf = f64::from(m);
    Ok(match variant {
        BernsteinVariant::L2 => base.powi(m as i32),
        BernsteinVariant::L1 => 2f64.powf(1.5 * mf) * base.powf(0.5 * mf),
    })
}

/// Result of trying to write `R_(3)^p(Id)` as a polynomial in
/// `H_(3) = d1² + d2² + d3²` for a fixed rational field.
#[derive(Clone, Debug)]
pub struct Weyl3dReport {
    pub power: u32,
    /// `R^p(Id)`.
    pub target: WeylPoly,
    /// Unique candidate coefficients `x_j` of `H^j`, from the unit-triangular
    /// system on the pure monomials `d1^{2j}`.
    pub coefficients: Vec<GaussianRational>,
    /// `R^p(Id) − Σ x_j H^j`; zero iff a polynomial in `H` exists.
    pub residual: WeylPoly,
    /// Leading monomial of the residual and its coefficient.
    pub witness: Option<(Mono, GaussianRational)>,
}

impl Weyl3dReport {
    /// True iff no polynomial in `H` reproduces `R^p(Id)`.
    pub fn is_counterexample(&self) -> bool {
        !self.residual.is_zero()
    }
}

/// Power of `R_(3)` examined by [`weyl3d_counterexample`].
pub const WEYL3D_DEFAULT_POWER: u32 = 2;

/// True iff `R_(3)^2(Id)` is not a polynomial in `H_(3)` for the field
/// `(b1, b2, b3)`.
pub fn weyl3d_counterexample(b1: &BigRational, b2: &BigRational, b3: &BigRational) -> Result<bool> {
    Ok(weyl3d_report(b1, b2, b3, WEYL3D_DEFAULT_POWER)?.is_counterexample())
}

pub fn weyl3d_report(
    b1: &BigRational,
    b2: &BigRational,
    b3: &BigRational,
    power: u32,
) -> Result<Weyl3dReport> {
    if b1.is_zero() && b2.is_zero() && b3.is_zero() {
        return Err(Error::invalid("field must not vanish"));
    }
    let alg = Arc::new(Algebra::spatial(b1, b2, b3));
    let target = r_power_identity(&alg, power)?;
    let h = WeylPoly::hamiltonian(&alg);
    let mut powers = Vec::with_capacity(power as usize + 1);
    powers.push(WeylPoly::identity(&alg));
    for j in 0..power as usize {
        powers.push(powers[j].mul(&h)?);
    }
    let scalar = |p: &WeylPoly, m: &Mono| -> Result<GaussianRational> {
        p.coeff(m)
            .as_constant()
            .ok_or_else(|| Error::numerical("coefficient not constant for a fixed field"))
    };
    // Equation on d1^{2j}: only H^i with i ≥ j contribute and H^j has
    // coefficient 1 there, so back substitution from the top is exact.
    let mut x = alloc::vec![GaussianRational::zero(); power as usize + 1];
    for j in (0..=power as usize).rev() {
        let mono = [2 * j as u32, 0, 0];
        let mut rhs = scalar(&target, &mono)?;
        for i in (j + 1)..=power as usize {
            rhs = &rhs - &(&x[i] * &scalar(&powers[i], &mono)?);
        }
        let lead = scalar(&powers[j], &mono)?;
        let inv = lead.inv().ok_or_else(|| Error::numerical("singular triangular system"))?;
        x[j] = &rhs * &inv;
    }
    let mut fit = WeylPoly::zero(&alg);
    for (j, p) in powers.iter().enumerate() {
        fit = fit.add(&p.scale(&ParamPoly::constant(x[j].clone())));
    }
    let residual = target.sub(&fit);
    let witness = residual
        .terms()
        .max_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            da.cmp(&db).then(a.0.cmp(b.0))
        })
        .map(|(m, c)| (*m, c.as_constant().unwrap_or_default()));
    Ok(Weyl3dReport { power, target, coefficients: x, residual, witness })
}

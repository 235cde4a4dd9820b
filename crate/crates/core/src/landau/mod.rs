//! Continuum Landau states in the symmetric gauge, the spectral projector
//! kernel, and quadrature for the magnetic Bernstein sums.

mod poly;

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Float, Zero};

pub use poly::PolyU;

use crate::algebra::f_poly;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre_on;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Gaussian lowest-level state centred at `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentState {
    pub y: [f64; 2],
    pub b: f64,
}

impl CoherentState {
    pub fn new(y: [f64; 2], b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::invalid("field strength must be positive"));
        }
        Ok(Self { y, b })
    }

    pub fn eval(&self, x: [f64; 2]) -> C {
        eval_coherent(self.y, self.b, x)
    }

    /// `2π/B`.
    pub fn norm_sqr(&self) -> f64 {
        2.0 * PI / self.b
    }
}

/// `exp(−(B/4)|x−y|² − i(B/2)(x1 y2 − x2 y1))`.
pub fn eval_coherent(y: [f64; 2], b: f64, x: [f64; 2]) -> C {
    let (u1, u2) = (x[0] - y[0], x[1] - y[1]);
    let re = -0.25 * b * (u1 * u1 + u2 * u2);
    let im = -0.5 * b * (x[0] * y[1] - x[1] * y[0]);
    C::from_polar(re.exp(), im)
}

/// `⟨f_y, f_z⟩ = (2π/B) exp(−(B/4)|y−z|² − i(B/2)(y1 z2 − y2 z1))`.
pub fn coherent_overlap(b: f64, y: [f64; 2], z: [f64; 2]) -> C {
    let d2 = (y[0] - z[0]).powi(2) + (y[1] - z[1]).powi(2);
    let ph = -0.5 * b * (y[0] * z[1] - y[1] * z[0]);
    C::from_polar(2.0 * PI / b * (-0.25 * b * d2).exp(), ph)
}

/// Laguerre polynomial `L_k(x)` by `(k+1)L_{k+1} = (2k+1−x)L_k − k L_{k−1}`.
pub fn laguerre(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut l0, mut l1) = (1.0, 1.0 - x);
    for j in 1..k {
        let jf = j as f64;
        let l2 = ((2.0 * jf + 1.0 - x) * l1 - jf * l0) / (jf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Integral kernel of the projector onto levels `(2k+1)B ≤ E`.
pub fn eval_kernel(e: f64, b: f64, x: [f64; 2], y: [f64; 2]) -> Result<C> {
    if !(b > 0.0) {
        return Err(Error::invalid("field strength must be positive"));
    }
    let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    let g = eval_coherent(y, b, x);
    let mut s = 0.0;
    let mut k = 0usize;
    while (2 * k + 1) as f64 * b <= e {
        s += laguerre(k, 0.5 * b * r2);
        k += 1;
    }
    Ok(g * (b / (2.0 * PI) * s))
}

/// `L_k((B/2)(u1² + u2²))` expanded as a polynomial in `u`.
fn laguerre_in_u(k: usize, b: f64) -> PolyU {
    // L_k(s) = Σ_j (−1)^j C(k,j) s^j / j!
    let mut out = PolyU::default();
    let r2 = PolyU::from_coeffs(alloc::vec![
        alloc::vec![C::zero(), C::zero(), C::new(1.0, 0.0)],
        alloc::vec![],
        alloc::vec![C::new(1.0, 0.0)],
    ]);
    let mut power = PolyU::constant(C::new(1.0, 0.0));
    let mut binom = 1.0;
    let mut fact = 1.0;
    for j in 0..=k {
        let c = if j % 2 == 0 { 1.0 } else { -1.0 } * binom / fact * (0.5 * b).powi(j as i32);
        out = out.add(&power.scale(C::new(c, 0.0)));
        power = power.mul(&r2);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
        fact *= (j + 1) as f64;
    }
    out
}

/// Closed form `Σ_j P_j(x − y_j) f_{y_j}(x)`, closed under the magnetic
/// derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbolic {
    pub b: f64,
    pub terms: Vec<([f64; 2], PolyU)>,
}

impl Symbolic {
    pub fn coherent(y: [f64; 2], b: f64) -> Self {
        Self { b, terms: alloc::vec![(y, PolyU::constant(C::new(1.0, 0.0)))] }
    }

    /// `(∂̃1 − i∂̃2)^k f_y`, an eigenfunction with eigenvalue `(2k+1)B`.
    pub fn landau_state(y: [f64; 2], k: usize, b: f64) -> Self {
        let mut s = Self::coherent(y, b);
        for _ in 0..k {
            s = s.raise();
        }
        s
    }

    /// `K_{E,B}(·, y)` as a closed form.
    pub fn kernel_column(e: f64, b: f64, y: [f64; 2]) -> Self {
        let mut p = PolyU::default();
        let mut k = 0;
        while (2 * k + 1) as f64 * b <= e {
            p = p.add(&laguerre_in_u(k, b));
            k += 1;
        }
        Self { b, terms: alloc::vec![(y, p.scale(C::new(b / (2.0 * PI), 0.0)))] }
    }

    pub fn eval(&self, x: [f64; 2]) -> C {
        self.terms
            .iter()
            .map(|(y, p)| p.eval(x[0] - y[0], x[1] - y[1]) * eval_coherent(*y, self.b, x))
            .fold(C::zero(), |a, b| a + b)
    }

    fn map(&self, f: impl Fn(&PolyU) -> PolyU) -> Self {
        Self { b: self.b, terms: self.terms.iter().map(|(y, p)| (*y, f(p))).collect() }
    }

    /// `∂̃_axis` with `axis ∈ {1, 2}`.
    pub fn magnetic(&self, axis: usize) -> Result<Self> {
        let hb = 0.5 * self.b;
        match axis {
            // i∂1P + P·(−i(B/2)u1 − (B/2)u2)
            1 => Ok(self.map(|p| p.d_u1().scale(I).add(&p.mul_linear(-I * hb, C::new(-hb, 0.0))))),
            // i∂2P + P·((B/2)u1 − i(B/2)u2)
            2 => Ok(self.map(|p| p.d_u2().scale(I).add(&p.mul_linear(C::new(hb, 0.0), -I * hb)))),
            _ => Err(Error::invalid("axis must be 1 or 2")),
        }
    }

    /// `∂̃1 − i∂̃2`.
    pub fn raise(&self) -> Self {
        let b = self.b;
        self.map(|p| {
            p.d_u1().scale(I).add(&p.d_u2()).add(&p.mul_linear(-I * b, C::new(-b, 0.0)))
        })
    }

    pub fn scale(&self, s: C) -> Self {
        self.map(|p| p.scale(s))
    }

    /// Concatenates term lists.
    pub fn add(&self, o: &Symbolic) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { b: self.b, terms }
    }

    pub fn centers(&self) -> Vec<[f64; 2]> {
        self.terms.iter().map(|t| t.0).collect()
    }
}

/// One summand `coeff · (∂̃1 − i∂̃2)^k f_y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelPart {
    pub y: [f64; 2],
    pub k: usize,
    pub coeff: C,
}

/// Finite combination of Landau states with exactly known level
/// decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCombination {
    pub b: f64,
    pub parts: Vec<LevelPart>,
}

impl LevelCombination {
    pub fn to_symbolic(&self) -> Symbolic {
        let mut s = Symbolic { b: self.b, terms: Vec::new() };
        for p in &self.parts {
            s = s.add(&Symbolic::landau_state(p.y, p.k, self.b).scale(p.coeff));
        }
        s
    }

    pub fn max_level(&self) -> usize {
        self.parts.iter().map(|p| p.k).max().unwrap_or(0)
    }

    /// Exact `‖f_k‖²` for every level `k` from coherent-state overlaps and
    /// `‖(a†)^k g‖² = (2B)^k k! ‖g‖²`.
    pub fn level_norms(&self) -> Vec<f64> {
        let top = self.max_level();
        let mut out = alloc::vec![0.0; top + 1];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut fact = 1.0;
            for j in 1..=k {
                fact *= j as f64;
            }
            let scale = (2.0 * self.b).powi(k as i32) * fact;
            let mut s = C::zero();
            for p in self.parts.iter().filter(|p| p.k == k) {
                for q in self.parts.iter().filter(|q| q.k == k) {
                    s += p.coeff.conj() * q.coeff * coherent_overlap(self.b, p.y, q.y);
                }
            }
            *slot = scale * s.re;
        }
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.level_norms().iter().sum()
    }

    /// `⟨f, F_m(H) f⟩ = Σ_k F_m((2k+1)B) ‖f_k‖²`.
    pub fn fm_expectation(&self, m: u32) -> f64 {
        let f = f_poly(m);
        self.level_norms()
            .iter()
            .enumerate()
            .map(|(k, n)| f.eval_f64((2 * k + 1) as f64 * self.b, self.b) * n)
            .sum()
    }
}

/// Uniform sampling grid; point `(i1, i2)` sits at `origin + (i1 h1, i2 h2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n: [usize; 2],
    pub origin: [f64; 2],
    pub h: [f64; 2],
}

impl GridSpec {
    pub fn new(n: [usize; 2], origin: [f64; 2], h: [f64; 2]) -> Result<Self> {
        if n[0] < 2 || n[1] < 2 {
            return Err(Error::invalid("grid needs at least 2 points per axis"));
        }
        if !(h[0] > 0.0 && h[1] > 0.0) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        Ok(Self { n, origin, h })
    }

    pub fn point(&self, i1: usize, i2: usize) -> [f64; 2] {
        [self.origin[0] + i1 as f64 * self.h[0], self.origin[1] + i2 as f64 * self.h[1]]
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.h[0] * self.h[1]
    }
}

/// Truncation box and spacing for trapezoid quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Margin added around the outermost centre.
    pub radius: f64,
    pub h: f64,
    pub tol: f64,
}

impl QuadratureSpec {
    /// Margin `12/√B`, 16 points per magnetic length, relative tolerance 1e-6.
    pub fn for_field(b: f64) -> Self {
        let lb = 1.0 / b.sqrt();
        Self { radius: 12.0 * lb, h: lb / 16.0, tol: 1e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius > 0.0 && self.h > 0.0 && self.tol > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("quadrature radius, spacing and tolerance must be positive"))
        }
    }

    /// Grid covering all `centers` with the margin.
    pub fn grid_around(&self, centers: &[[f64; 2]]) -> Result<GridSpec> {
        self.validate()?;
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for c in centers {
            for a in 0..2 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        if centers.is_empty() {
            lo = [0.0; 2];
            hi = [0.0; 2];
        }
        let mut n = [0usize; 2];
        let mut origin = [0.0; 2];
        for a in 0..2 {
            let lo_a = lo[a] - self.radius;
            let span = hi[a] + self.radius - lo_a;
            n[a] = (span / self.h).ceil() as usize + 1;
            origin[a] = lo_a;
        }
        GridSpec::new(n, origin, [self.h, self.h])
    }
}

/// Complex samples on a grid, optionally carrying their closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: GridSpec,
    /// Index `i2 * n1 + i1`.
    pub data: Vec<C>,
    pub tag: Option<Symbolic>,
}

impl GridField {
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> C) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i2 in 0..grid.n[1] {
            for i1 in 0..grid.n[0] {
                data.push(f(grid.point(i1, i2)));
            }
        }
        Self { grid, data, tag: None }
    }

    pub fn sample(sym: &Symbolic, grid: GridSpec) -> Self {
        let mut f = Self::from_fn(grid, |x| sym.eval(x));
        f.tag = Some(sym.clone());
        f
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, data: alloc::vec![C::zero(); grid.len()], tag: None }
    }

    pub fn at(&self, i1: usize, i2: usize) -> C {
        self.data[i2 * self.grid.n[0] + i1]
    }

    /// Trapezoid rule; the integrands used here vanish at the box edge.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    /// `Σ_{i ∈ mask} |f_i|² · cell area`.
    pub fn masked_norm_sqr(&self, inside: &[bool]) -> f64 {
        self.data
            .iter()
            .zip(inside)
            .filter(|(_, &m)| m)
            .map(|(z, _)| z.norm_sqr())
            .sum::<f64>()
            * self.grid.cell_area()
    }

    /// Fraction of `Σ|f|²` carried by the outer two-cell frame.
    pub fn boundary_fraction(&self) -> f64 {
        frame_fraction(&self.grid, |i| self.data[i].norm_sqr())
    }
}

fn frame_fraction(g: &GridSpec, w: impl Fn(usize) -> f64) -> f64 {
    let (n1, n2) = (g.n[0], g.n[1]);
    let mut total = 0.0;
    let mut edge = 0.0;
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let v = w(i2 * n1 + i1);
            total += v;
            if i1 < 2 || i2 < 2 || i1 + 2 >= n1 || i2 + 2 >= n2 {
                edge += v;
            }
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMethod {
    FiniteDifference,
    ClosedForm,
}

/// Centred second-order difference along `axis` (0 or 1), one-sided
/// second-order at the edges.
fn diff(f: &GridField, axis: usize) -> Vec<C> {
    let g = &f.grid;
    let (n1, n2) = (g.n[0], g.n[1]);
    let h = g.h[axis];
    let mut out = alloc::vec![C::zero(); g.len()];
    let stride = if axis == 0 { 1 } else { n1 };
    let len = g.n[axis];
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let idx = i2 * n1 + i1;
            let pos = if axis == 0 { i1 } else { i2 };
            let v = |off: isize| f.data[(idx as isize + off * stride as isize) as usize];
            out[idx] = if pos == 0 {
                (v(0) * -3.0 + v(1) * 4.0 - v(2)) / (2.0 * h)
            } else if pos + 1 == len {
                (v(0) * 3.0 - v(-1) * 4.0 + v(-2)) / (2.0 * h)
            } else {
                (v(1) - v(-1)) / (2.0 * h)
            };
        }
    }
    out
}

/// Samples of `∂̃_axis f` (axis 1 or 2).
pub fn magnetic_derivative(f: &GridField, axis: usize, b: f64, method: DerivativeMethod) -> Result<GridField> {
    if axis != 1 && axis != 2 {
        return Err(Error::invalid("axis must be 1 or 2"));
    }
    match method {
        DerivativeMethod::ClosedForm => {
            let sym = f
                .tag
                .as_ref()
                .ok_or_else(|| Error::invalid("closed-form derivative needs a symbolic field"))?;
            Ok(GridField::sample(&sym.magnetic(axis)?, f.grid))
        }
        DerivativeMethod::FiniteDifference => {
            let d = diff(f, axis - 1);
            let g = f.grid;
            let mut out = GridField::zeros(g);
            for i2 in 0..g.n[1] {
                for i1 in 0..g.n[0] {
                    let idx = i2 * g.n[0] + i1;
                    let x = g.point(i1, i2);
                    // ∂̃1 = i∂1 − (B/2)x2, ∂̃2 = i∂2 + (B/2)x1
                    let mult = if axis == 1 { -0.5 * b * x[1] } else { 0.5 * b * x[0] };
                    out.data[idx] = I * d[idx] + f.data[idx] * mult;
                }
            }
            Ok(out)
        }
    }
}

/// `H_B f` by composing finite-difference magnetic derivatives.
pub fn fd_hamiltonian(f: &GridField, b: f64) -> Result<GridField> {
    let fd = DerivativeMethod::FiniteDifference;
    let d11 = magnetic_derivative(&magnetic_derivative(f, 1, b, fd)?, 1, b, fd)?;
    let d22 = magnetic_derivative(&magnetic_derivative(f, 2, b, fd)?, 2, b, fd)?;
    let mut out = d11;
    for (o, x) in out.data.iter_mut().zip(&d22.data) {
        *o += x;
    }
    out.tag = None;
    Ok(out)
}

/// Value of a Bernstein-type sum together with a truncation diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumReport {
    pub value: f64,
    /// Largest fraction of any summand's mass in the outer grid frame.
    pub boundary_fraction: f64,
    /// Set when `boundary_fraction` exceeds the tolerance.
    pub truncation_warning: bool,
}

/// `Σ_{α ∈ {1,2}^m} ‖∂̃_α f‖²`, closed form when `f` is tagged.
pub fn bernstein_sum(f: &GridField, m: u32, b: f64, tol: f64) -> Result<SumReport> {
    if m == 0 {
        let bf = f.boundary_fraction();
        return Ok(SumReport { value: f.norm_sqr(), boundary_fraction: bf, truncation_warning: bf > tol });
    }
    if let Some(sym) = &f.tag {
        let mut words = alloc::vec![sym.clone()];
        for _ in 0..m {
            let mut next = Vec::with_capacity(words.len() * 2);
            for w in &words {
                next.push(w.magnetic(1)?);
                next.push(w.magnetic(2)?);
            }
            words = next;
        }
        return Ok(sum_of_squares_symbolic(&words, &f.grid, tol));
    }
    let mut words = alloc::vec![f.clone()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(words.len() * 2);
        for w in &words {
            next.push(magnetic_derivative(w, 1, b, DerivativeMethod::FiniteDifference)?);
            next.push(magnetic_derivative(w, 2, b, DerivativeMethod::FiniteDifference)?);
        }
        words = next;
    }
    let mut value = 0.0;
    let mut bf: f64 = 0.0;
    for w in &words {
        value += w.norm_sqr();
        bf = bf.max(w.boundary_fraction());
    }
    Ok(SumReport { value, boundary_fraction: bf, truncation_warning: bf > tol })
}

/// Evaluates `Σ_w ‖w‖²` over closed forms sharing one term layout.
fn sum_of_squares_symbolic(words: &[Symbolic], grid: &GridSpec, tol: f64) -> SumReport {
    let b = words[0].b;
    let centers = words[0].centers();
    let nt = centers.len();
    let mut totals = alloc::vec![0.0; words.len()];
    let mut edges = alloc::vec![0.0; words.len()];
    let mut g = alloc::vec![C::zero(); nt];
    let (n1, n2) = (grid.n[0], grid.n[1]);
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let x = grid.point(i1, i2);
            for (gj, y) in g.iter_mut().zip(&centers) {
                *gj = eval_coherent(*y, b, x);
            }
            let on_edge = i1 < 2 || i2 < 2 || i1 + 2 >= n1 || i2 + 2 >= n2;
            for (wi, w) in words.iter().enumerate() {
                let mut v = C::zero();
                for ((y, p), gj) in w.terms.iter().zip(&g) {
                    v += p.eval(x[0] - y[0], x[1] - y[1]) * gj;
                }
                let a = v.norm_sqr();
                totals[wi] += a;
                if on_edge {
                    edges[wi] += a;
                }
            }
        }
    }
    let area = grid.cell_area();
    let value = totals.iter().sum::<f64>() * area;
    let bf = totals
        .iter()
        .zip(&edges)
        .map(|(t, e)| if *t > 0.0 { e / t } else { 0.0 })
        .fold(0.0, f64::max);
    SumReport { value, boundary_fraction: bf, truncation_warning: bf > tol }
}

/// Fourth-order centred first derivative of a real field along `axis`,
/// treating values outside the grid as zero.
pub(crate) fn diff4_real(v: &[f64], g: &GridSpec, axis: usize) -> Vec<f64> {
    let (n1, n2) = (g.n[0], g.n[1]);
    let h = g.h[axis];
    let len = g.n[axis] as isize;
    let mut out = alloc::vec![0.0; v.len()];
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let pos = if axis == 0 { i1 } else { i2 } as isize;
            let get = |off: isize| -> f64 {
                let p = pos + off;
                if p < 0 || p >= len {
                    return 0.0;
                }
                let (j1, j2) = if axis == 0 { (p as usize, i2) } else { (i1, p as usize) };
                v[j2 * n1 + j1]
            };
            out[i2 * n1 + i1] = (get(-2) - 8.0 * get(-1) + 8.0 * get(1) - get(2)) / (12.0 * h);
        }
    }
    out
}

/// `Σ_{α ∈ {1,2}^m} ‖∂^α |f|²‖_{L¹}` with ordinary derivatives by centred
/// stencils. Derivatives commute, so each `(a, m−a)` enters `C(m, a)` times.
pub fn l1_bernstein_sum(f: &GridField, m: u32, tol: f64) -> SumReport {
    let g = f.grid;
    let dens: Vec<f64> = f.data.iter().map(|z| z.norm_sqr()).collect();
    let area = g.cell_area();
    let mut value = 0.0;
    let mut bf: f64 = 0.0;
    let mut binom = 1.0;
    for a in 0..=m {
        let mut d = dens.clone();
        for _ in 0..a {
            d = diff4_real(&d, &g, 0);
        }
        for _ in 0..(m - a) {
            d = diff4_real(&d, &g, 1);
        }
        let l1: f64 = d.iter().map(|x| x.abs()).sum::<f64>() * area;
        value += binom * l1;
        bf = bf.max(frame_fraction(&g, |i| d[i].abs()));
        binom = binom * (m - a) as f64 / (a + 1) as f64;
    }
    SumReport { value, boundary_fraction: bf, truncation_warning: bf > tol }
}

/// Same sum, enumerating all `2^m` words explicitly.
pub fn l1_bernstein_sum_words(f: &GridField, m: u32) -> f64 {
    let g = f.grid;
    let dens: Vec<f64> = f.data.iter().map(|z| z.norm_sqr()).collect();
    let mut words = alloc::vec![dens];
    for _ in 0..m {
        let mut next = Vec::new();
        for w in &words {
            next.push(diff4_real(w, &g, 0));
            next.push(diff4_real(w, &g, 1));
        }
        words = next;
    }
    words.iter().map(|w| w.iter().map(|x| x.abs()).sum::<f64>()).sum::<f64>() * g.cell_area()
}

/// `∫_{r0 ≤ |x−c| ≤ r1} |f|²` by Gauss–Legendre panels in the radius and the
/// trapezoid rule in the angle.
pub fn annulus_mass(f: impl Fn([f64; 2]) -> C, c: [f64; 2], r0: f64, r1: f64, panels: usize, nodes: usize, n_theta: usize) -> f64 {
    let mut total = 0.0;
    let width = (r1 - r0) / panels as f64;
    for p in 0..panels {
        let a = r0 + p as f64 * width;
        let (rs, ws) = gauss_legendre_on(nodes, a, a + width);
        for (r, w) in rs.iter().zip(&ws) {
            let mut ring = 0.0;
            for t in 0..n_theta {
                let th = 2.0 * PI * t as f64 / n_theta as f64;
                ring += f([c[0] + r * th.cos(), c[1] + r * th.sin()]).norm_sqr();
            }
            total += w * r * ring * 2.0 * PI / n_theta as f64;
        }
    }
    total
}

/// `∫_{|x − c| ≥ r} |f|²`, truncated `12/√B` beyond `r`.
pub fn exterior_mass(f: impl Fn([f64; 2]) -> C, c: [f64; 2], r: f64, b: f64) -> f64 {
    let reach = 12.0 / b.sqrt();
    let panels = (reach * b.sqrt()).ceil() as usize * 2;
    annulus_mass(f, c, r, r + reach, panels, 24, 256)
}

#[cfg(test)]
mod tests;

//! Finite-volume Landau operator on a flux-quantized torus.
//!
//! Landau gauge `A = (0, B x1)` with covariant derivative `∇ − iA`. Grid
//! point `(i1, i2)` sits at `(i1 h1, i2 h2)` and has index `i2 N1 + i1`.
//! Magnetic periodicity: `ψ(x + L1 e1) = e^{iB L1 x2} ψ(x)`,
//! `ψ(x + L2 e2) = ψ(x)`.

mod eigen;
mod translate;

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Float, Zero};

pub use eigen::{count_below, count_in_window, eigensolve, Cutoff, EigenConfig, SpectralSubspace, DENSE_LIMIT};
pub use translate::{commutation_check, is_admissible, magnetic_translate};

use crate::error::{Error, Result};
use crate::linalg::{BandedHermitian, DMat, HermitianOp};

type C = Complex64;

/// Which integer-flux rule the validator enforces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FluxRule {
    /// `B L1 L2 ∈ 2πℤ`, required by the torus closure.
    #[default]
    Area,
    /// `B (L2 − L1) ∈ 2πℤ`; checked in addition to the area rule.
    Difference,
}

const FLUX_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusSetup {
    pub l: [f64; 2],
    pub b: f64,
    pub n: [usize; 2],
    pub rule: FluxRule,
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() <= FLUX_TOL * x.abs().max(1.0) {
        Some(r as i64)
    } else {
        None
    }
}

impl TorusSetup {
    pub fn new(l: [f64; 2], b: f64, n: [usize; 2]) -> Result<Self> {
        Self::with_rule(l, b, n, FluxRule::Area)
    }

    pub fn with_rule(l: [f64; 2], b: f64, n: [usize; 2], rule: FluxRule) -> Result<Self> {
        let s = Self { l, b, n, rule };
        s.validate()?;
        Ok(s)
    }

    /// Square box of side `sqrt(2π n_phi / b)`.
    pub fn square_with_flux(n_phi: u32, b: f64, n: usize) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::invalid("field strength must be positive"));
        }
        let side = (2.0 * PI * f64::from(n_phi) / b).sqrt();
        Self::new([side, side], b, [n, n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n[0] < 4 || self.n[1] < 4 {
            return Err(Error::invalid("grid needs N1, N2 >= 4"));
        }
        if !(self.l[0] > 0.0 && self.l[1] > 0.0) {
            return Err(Error::invalid("box sides must be positive"));
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return Err(Error::invalid("field strength must be non-negative"));
        }
        self.flux_quanta()?;
        if self.rule == FluxRule::Difference
            && near_integer(self.b * (self.l[1] - self.l[0]) / (2.0 * PI)).is_none()
        {
            return Err(Error::invalid("B (L2 - L1) is not a multiple of 2π"));
        }
        Ok(())
    }

    /// `B L1 L2 / 2π`, required to be an integer.
    pub fn flux_quanta(&self) -> Result<i64> {
        near_integer(self.b * self.l[0] * self.l[1] / (2.0 * PI))
            .ok_or_else(|| Error::invalid("flux B L1 L2 is not a multiple of 2π"))
    }

    pub fn h(&self) -> [f64; 2] {
        [self.l[0] / self.n[0] as f64, self.l[1] / self.n[1] as f64]
    }

    pub fn dim(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h[0] * h[1]
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.h();
        [(idx % self.n[0]) as f64 * h[0], (idx / self.n[0]) as f64 * h[1]]
    }

    /// `h·√B`, the grid spacing in magnetic lengths.
    pub fn resolution(&self) -> f64 {
        let h = self.h();
        h[0].max(h[1]) * self.b.sqrt()
    }

    /// Energies above this are not represented faithfully by the grid.
    pub fn trustworthy_energy(&self) -> f64 {
        let h = self.h();
        0.1 / (h[0].max(h[1]) * h[0].max(h[1]))
    }
}

/// Nearest-neighbour Peierls operator with optional diagonal potential.
#[derive(Clone, Debug)]
pub struct MagneticOperator {
    pub setup: TorusSetup,
    diag: Vec<f64>,
    /// Hoppings to `+e1`, `+e2`, `−e1`, `−e2` neighbours.
    hops: Vec<[(u32, C); 4]>,
    potential: Option<Vec<f64>>,
}

/// Link variables of the discretization: the phase multiplying
/// `ψ(neighbour)` in `−(∇ − iA)²`.
fn link_phase(s: &TorusSetup, i1: usize, i2: usize, dir: usize) -> C {
    let h = s.h();
    let x1 = i1 as f64 * h[0];
    let x2 = i2 as f64 * h[1];
    match dir {
        // +e1: phase-free, except the closure ψ(L1, x2) = e^{iB L1 x2} ψ(0, x2)
        0 => {
            if i1 + 1 == s.n[0] {
                C::from_polar(1.0, s.b * s.l[0] * x2)
            } else {
                C::new(1.0, 0.0)
            }
        }
        // +e2: transporter e^{−iB x1 h2}; the x2 closure is plain
        1 => C::from_polar(1.0, -s.b * x1 * h[1]),
        _ => unreachable!(),
    }
}

/// Assembles `−(∇ − iA)² + V` on the torus.
pub fn assemble(setup: &TorusSetup, potential: Option<&[f64]>) -> Result<MagneticOperator> {
    setup.validate()?;
    let (n1, n2) = (setup.n[0], setup.n[1]);
    let n = setup.dim();
    if let Some(v) = potential {
        if v.len() != n {
            return Err(Error::invalid("potential length does not match the grid"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("potential must be finite"));
        }
    }
    let h = setup.h();
    let (c1, c2) = (1.0 / (h[0] * h[0]), 1.0 / (h[1] * h[1]));
    let mut diag = alloc::vec![2.0 * c1 + 2.0 * c2; n];
    if let Some(v) = potential {
        for (d, vi) in diag.iter_mut().zip(v) {
            *d += vi;
        }
    }
    let mut hops = alloc::vec![[(0u32, C::zero()); 4]; n];
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let idx = i2 * n1 + i1;
            let e1 = i2 * n1 + (i1 + 1) % n1;
            let e2 = ((i2 + 1) % n2) * n1 + i1;
            let u1 = link_phase(setup, i1, i2, 0);
            let u2 = link_phase(setup, i1, i2, 1);
            hops[idx][0] = (e1 as u32, -u1 * c1);
            hops[idx][1] = (e2 as u32, -u2 * c2);
            hops[e1][2] = (idx as u32, -u1.conj() * c1);
            hops[e2][3] = (idx as u32, -u2.conj() * c2);
        }
    }
    Ok(MagneticOperator { setup: *setup, diag, hops, potential: potential.map(|v| v.to_vec()) })
}

impl HermitianOp for MagneticOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[C], y: &mut [C]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = x[i] * self.diag[i];
            for &(j, v) in &self.hops[i] {
                s += v * x[j as usize];
            }
            *yi = s;
        }
    }
}

impl MagneticOperator {
    pub fn potential(&self) -> Option<&[f64]> {
        self.potential.as_deref()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Coordinate triplets `(row, col, value)`, row-major, columns ascending.
    /// Coinciding links (tiny grids) are summed.
    pub fn triplets(&self) -> Vec<(usize, usize, C)> {
        let mut out = Vec::with_capacity(self.diag.len() * 5);
        for (i, hop) in self.hops.iter().enumerate() {
            let mut row: Vec<(usize, C)> = alloc::vec![(i, C::new(self.diag[i], 0.0))];
            for &(j, v) in hop {
                match row.iter_mut().find(|e| e.0 == j as usize) {
                    Some(e) => e.1 += v,
                    None => row.push((j as usize, v)),
                }
            }
            row.sort_by_key(|e| e.0);
            out.extend(row.into_iter().map(|(j, v)| (i, j, v)));
        }
        out
    }

    pub fn to_dense(&self) -> DMat {
        let n = self.diag.len();
        let mut m = DMat::zeros(n, n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Row order `0, N2−1, 1, N2−2, …` of grid rows, which keeps both the
    /// interior and the wrap-around `x2` links within `2 N1` of the diagonal.
    pub fn folded_order(&self) -> Vec<usize> {
        let (n1, n2) = (self.setup.n[0], self.setup.n[1]);
        let mut rows = Vec::with_capacity(n2);
        let (mut lo, mut hi) = (0usize, n2 - 1);
        while lo <= hi {
            rows.push(lo);
            if hi != lo {
                rows.push(hi);
            }
            lo += 1;
            if hi == 0 {
                break;
            }
            hi -= 1;
        }
        let mut perm = Vec::with_capacity(n1 * n2);
        for r in rows {
            for i1 in 0..n1 {
                perm.push(r * n1 + i1);
            }
        }
        perm
    }

    /// Band form in the folded ordering: `(band, perm)` with
    /// `band[p][q] = H[perm[p]][perm[q]]`.
    pub fn to_banded(&self) -> (BandedHermitian, Vec<usize>) {
        let perm = self.folded_order();
        let mut pos = alloc::vec![0usize; perm.len()];
        for (p, &i) in perm.iter().enumerate() {
            pos[i] = p;
        }
        let trip = self.triplets();
        let bw = trip.iter().map(|&(i, j, _)| pos[i].abs_diff(pos[j])).max().unwrap_or(0);
        let mut band = BandedHermitian::zeros(perm.len(), bw);
        for (i, j, v) in trip {
            let (p, q) = (pos[i], pos[j]);
            if p >= q {
                band.add(p, q, v).expect("within computed bandwidth");
            }
        }
        (band, perm)
    }

    pub fn min_potential(&self) -> f64 {
        self.potential.as_ref().map(|v| v.iter().copied().fold(f64::INFINITY, f64::min)).unwrap_or(0.0)
    }

    /// Phase product around the plaquette with lower-left corner `(i1, i2)`.
    pub fn plaquette_phase(&self, i1: usize, i2: usize) -> C {
        let s = &self.setup;
        let (n1, n2) = (s.n[0], s.n[1]);
        let j1 = (i1 + 1) % n1;
        let j2 = (i2 + 1) % n2;
        let hop = |from: (usize, usize), to: (usize, usize)| -> C {
            let i = from.1 * n1 + from.0;
            let j = to.1 * n1 + to.0;
            let h = self.hops[i].iter().find(|e| e.0 as usize == j).expect("neighbour").1;
            h / h.norm()
        };
        // transporters are −h²·H_ij, i.e. the unit phases of −H_ij
        -hop((i1, i2), (j1, i2)) * -hop((j1, i2), (j1, j2)) * -hop((j1, j2), (i1, j2)) * -hop((i1, j2), (i1, i2))
    }
}

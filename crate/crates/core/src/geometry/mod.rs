//! Thick sets on grids, window scans, coverings and the good/bad split of
//! a covering for a given function.

use alloc::vec::Vec;

use num_traits::Float;

use crate::algebra::{bernstein_constant, BernsteinVariant};
use crate::error::{Error, Result};
use crate::landau::{diff4_real, GridField, GridSpec};
use crate::lattice::TorusSetup;

/// Boolean cell grid. Cell `(i1, i2)` is `[o + i h, o + (i+1) h)` per axis;
/// the set it describes is the union of the marked cells.
#[derive(Clone, Debug, PartialEq)]
pub struct SetMask {
    pub n: [usize; 2],
    pub h: [f64; 2],
    pub origin: [f64; 2],
    /// Windows wrap around the box when set.
    pub periodic: bool,
    bits: Vec<bool>,
}

impl SetMask {
    pub fn from_bits(n: [usize; 2], h: [f64; 2], origin: [f64; 2], periodic: bool, bits: Vec<bool>) -> Result<Self> {
        if n[0] == 0 || n[1] == 0 {
            return Err(Error::invalid("mask grid must be nonempty"));
        }
        if !(h[0] > 0.0 && h[1] > 0.0) {
            return Err(Error::invalid("mask cell spacing must be positive"));
        }
        if bits.len() != n[0] * n[1] {
            return Err(Error::invalid("mask bit count does not match the grid"));
        }
        Ok(Self { n, h, origin, periodic, bits })
    }

    pub fn full(n: [usize; 2], h: [f64; 2], origin: [f64; 2], periodic: bool) -> Result<Self> {
        Self::from_bits(n, h, origin, periodic, alloc::vec![true; n[0] * n[1]])
    }

    /// Marks the cells whose centre satisfies `pred`.
    pub fn from_fn(n: [usize; 2], h: [f64; 2], origin: [f64; 2], periodic: bool, pred: impl Fn([f64; 2]) -> bool) -> Result<Self> {
        let mut bits = Vec::with_capacity(n[0] * n[1]);
        for i2 in 0..n[1] {
            for i1 in 0..n[0] {
                bits.push(pred([origin[0] + (i1 as f64 + 0.5) * h[0], origin[1] + (i2 as f64 + 0.5) * h[1]]));
            }
        }
        Self::from_bits(n, h, origin, periodic, bits)
    }

    /// Periodic mask whose cell centres are the lattice points of `setup`.
    pub fn on_torus(setup: &TorusSetup, pred: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let h = setup.h();
        let n = setup.n;
        let mut bits = Vec::with_capacity(n[0] * n[1]);
        for i2 in 0..n[1] {
            for i1 in 0..n[0] {
                bits.push(pred(i1, i2));
            }
        }
        Self::from_bits(n, h, [-0.5 * h[0], -0.5 * h[1]], true, bits)
    }

    /// Stripes `width` cells wide repeating every `period` cells, normal to
    /// `axis` (0: vertical stripes).
    pub fn strips(n: [usize; 2], h: [f64; 2], width: usize, period: usize, axis: usize, periodic: bool) -> Result<Self> {
        if period == 0 || width > period || axis > 1 {
            return Err(Error::invalid("need 0 < width ≤ period and axis ∈ {0, 1}"));
        }
        let mut bits = Vec::with_capacity(n[0] * n[1]);
        for i2 in 0..n[1] {
            for i1 in 0..n[0] {
                let i = if axis == 0 { i1 } else { i2 };
                bits.push(i % period < width);
            }
        }
        Self::from_bits(n, h, [0.0, 0.0], periodic, bits)
    }

    /// Checkerboard of `block × block` cell squares.
    pub fn checkerboard(n: [usize; 2], h: [f64; 2], block: usize, periodic: bool) -> Result<Self> {
        if block == 0 {
            return Err(Error::invalid("block size must be positive"));
        }
        let mut bits = Vec::with_capacity(n[0] * n[1]);
        for i2 in 0..n[1] {
            for i1 in 0..n[0] {
                bits.push((i1 / block + i2 / block) % 2 == 0);
            }
        }
        Self::from_bits(n, h, [0.0, 0.0], periodic, bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i1: usize, i2: usize) -> bool {
        self.bits[i2 * self.n[0] + i1]
    }

    pub fn set(&mut self, i1: usize, i2: usize, v: bool) {
        let n1 = self.n[0];
        self.bits[i2 * n1 + i1] = v;
    }

    pub fn cell_area(&self) -> f64 {
        self.h[0] * self.h[1]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `vol(S)` as popcount times cell area.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.cell_area()
    }

    pub fn extent(&self) -> Rect {
        Rect {
            lo: self.origin,
            hi: [self.origin[0] + self.n[0] as f64 * self.h[0], self.origin[1] + self.n[1] as f64 * self.h[1]],
        }
    }

    pub fn center(&self, i1: usize, i2: usize) -> [f64; 2] {
        [self.origin[0] + (i1 as f64 + 0.5) * self.h[0], self.origin[1] + (i2 as f64 + 0.5) * self.h[1]]
    }

    /// Membership of a point; outside the box the mask is empty unless it is
    /// periodic.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        let mut idx = [0usize; 2];
        for a in 0..2 {
            let t = ((x[a] - self.origin[a]) / self.h[a]).floor() as i64;
            let n = self.n[a] as i64;
            if self.periodic {
                idx[a] = t.rem_euclid(n) as usize;
            } else if t < 0 || t >= n {
                return false;
            } else {
                idx[a] = t as usize;
            }
        }
        self.get(idx[0], idx[1])
    }

    pub fn is_subset_of(&self, other: &SetMask) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }

    pub fn union(&self, other: &SetMask) -> Result<SetMask> {
        if self.n != other.n {
            return Err(Error::invalid("masks live on different grids"));
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Self::from_bits(self.n, self.h, self.origin, self.periodic, bits)
    }

    pub fn complement(&self) -> SetMask {
        let bits = self.bits.iter().map(|b| !b).collect();
        Self { bits, ..self.clone() }
    }

    fn prefix(&self) -> Prefix {
        Prefix::new(self)
    }
}

/// Summed-area table. Periodic masks are tiled twice per axis so that
/// wrapped windows become plain rectangles.
struct Prefix {
    w: usize,
    n: [usize; 2],
    sums: Vec<u64>,
}

impl Prefix {
    fn new(mask: &SetMask) -> Self {
        let reps = if mask.periodic { 2 } else { 1 };
        let (n1, n2) = (mask.n[0], mask.n[1]);
        let (e1, e2) = (n1 * reps, n2 * reps);
        let w = e1 + 1;
        let mut sums = alloc::vec![0u64; w * (e2 + 1)];
        for j2 in 0..e2 {
            let mut row = 0u64;
            for j1 in 0..e1 {
                row += u64::from(mask.get(j1 % n1, j2 % n2));
                sums[(j2 + 1) * w + j1 + 1] = sums[j2 * w + j1 + 1] + row;
            }
        }
        Self { w, n: mask.n, sums }
    }

    /// Marked cells in `[s1, s1+k1) × [s2, s2+k2)` (extended coordinates).
    fn rect(&self, s: [usize; 2], k: [usize; 2]) -> u64 {
        if k[0] == 0 || k[1] == 0 {
            return 0;
        }
        let at = |a: usize, b: usize| self.sums[b * self.w + a];
        let (a0, a1, b0, b1) = (s[0], s[0] + k[0], s[1], s[1] + k[1]);
        at(a1, b1) + at(a0, b0) - at(a0, b1) - at(a1, b0)
    }
}

fn anchors(n: usize, span: usize, periodic: bool) -> usize {
    if periodic {
        n
    } else {
        n + 1 - span
    }
}

/// Minimum marked-cell count over grid-anchored `k1 × k2` windows, with the
/// first minimising anchor in row-major order.
pub fn window_min(mask: &SetMask, k: [usize; 2]) -> Result<(u64, [usize; 2])> {
    if k[0] == 0 || k[1] == 0 || k[0] > mask.n[0] || k[1] > mask.n[1] {
        return Err(Error::invalid("window must fit inside the mask grid"));
    }
    let p = mask.prefix();
    let mut best = (u64::MAX, [0, 0]);
    for s2 in 0..anchors(p.n[1], k[1], mask.periodic) {
        for s1 in 0..anchors(p.n[0], k[0], mask.periodic) {
            let c = p.rect([s1, s2], k);
            if c < best.0 {
                best = (c, [s1, s2]);
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThicknessReport {
    pub l: [f64; 2],
    /// `min vol(S ∩ Q)/vol(Q)` over all axis-parallel `ℓ1 × ℓ2` rectangles
    /// inside the box (or on the torus), for `S` the union of marked cells.
    pub rho_lower: f64,
    /// Lower-left corner of a minimising rectangle.
    pub anchor: [f64; 2],
    /// Window size in whole cells, `⌊ℓ/h⌋`.
    pub cells: [usize; 2],
    /// Minimum density over grid-anchored windows of `cells` cells.
    pub rho_grid: f64,
    pub grid_anchor: [usize; 2],
}

/// Density of the thinnest `ℓ`-rectangle.
///
/// Per axis, the overlap of a window `[a, a+ℓ]` with each cell is piecewise
/// linear in `a`, with breaks where an edge meets a grid line. The covered
/// volume is therefore bilinear between breaks and its minimum sits at a
/// window with one edge on a grid line in each direction. Enumerating those
/// windows gives the exact minimum over real anchors.
pub fn thickness_scan(mask: &SetMask, l: [f64; 2]) -> Result<ThicknessReport> {
    let mut k = [0usize; 2];
    let mut frac = [0.0f64; 2];
    for a in 0..2 {
        if !(l[a] > 0.0) || !l[a].is_finite() {
            return Err(Error::invalid("window sides must be positive"));
        }
        let side = mask.n[a] as f64 * mask.h[a];
        if l[a] > side * (1.0 + 1e-12) {
            return Err(Error::invalid("window side exceeds the domain"));
        }
        let r = l[a] / mask.h[a];
        let kk = (r + 1e-9).floor();
        k[a] = kk as usize;
        frac[a] = if r - kk > 1e-9 { r - kk } else { 0.0 };
        if k[a] < 2 {
            return Err(Error::invalid("window must span at least two cells"));
        }
        if k[a] > mask.n[a] {
            k[a] = mask.n[a];
            frac[a] = 0.0;
        }
    }
    let p = mask.prefix();
    let (gmin, ganchor) = {
        let mut best = (u64::MAX, [0, 0]);
        for s2 in 0..anchors(p.n[1], k[1], mask.periodic) {
            for s1 in 0..anchors(p.n[0], k[0], mask.periodic) {
                let c = p.rect([s1, s2], k);
                if c < best.0 {
                    best = (c, [s1, s2]);
                }
            }
        }
        best
    };
    let rho_grid = gmin as f64 / (k[0] * k[1]) as f64;

    // per axis: (full-run start offset, partial cell offset) for the
    // left-aligned and right-aligned profiles, all relative to the anchor s
    let profiles = |a: usize| -> Vec<(usize, Option<usize>)> {
        if frac[a] == 0.0 {
            alloc::vec![(0, None)]
        } else {
            alloc::vec![(0, Some(k[a])), (1, Some(0))]
        }
    };
    let span = |a: usize| if frac[a] == 0.0 { k[a] } else { k[a] + 1 };
    let cell_area = mask.cell_area();
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for &(f2, p2) in &profiles(1) {
        for &(f1, p1) in &profiles(0) {
            for s2 in 0..anchors(p.n[1], span(1), mask.periodic) {
                for s1 in 0..anchors(p.n[0], span(0), mask.periodic) {
                    let full = p.rect([s1 + f1, s2 + f2], k) as f64;
                    let mut v = full;
                    if let Some(o1) = p1 {
                        v += frac[0] * p.rect([s1 + o1, s2 + f2], [1, k[1]]) as f64;
                    }
                    if let Some(o2) = p2 {
                        v += frac[1] * p.rect([s1 + f1, s2 + o2], [k[0], 1]) as f64;
                    }
                    if let (Some(o1), Some(o2)) = (p1, p2) {
                        v += frac[0] * frac[1] * p.rect([s1 + o1, s2 + o2], [1, 1]) as f64;
                    }
                    if v < best.0 {
                        // left edge of the rectangle in cell units
                        let x1 = s1 as f64 + if f1 == 1 { 1.0 - frac[0] } else { 0.0 };
                        let x2 = s2 as f64 + if f2 == 1 { 1.0 - frac[1] } else { 0.0 };
                        best = (v, [mask.origin[0] + x1 * mask.h[0], mask.origin[1] + x2 * mask.h[1]]);
                    }
                }
            }
        }
    }
    let rho_lower = (best.0 * cell_area / (l[0] * l[1])).clamp(0.0, 1.0);
    Ok(ThicknessReport { l, rho_lower, anchor: best.1, cells: k, rho_grid, grid_anchor: ganchor })
}

/// Axis-parallel rectangle `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        if !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(Error::invalid("rectangle must have positive sides"));
        }
        Ok(Self { lo, hi })
    }

    pub fn sides(&self) -> [f64; 2] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]]
    }

    pub fn area(&self) -> f64 {
        let s = self.sides();
        s[0] * s[1]
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        x[0] >= self.lo[0] && x[0] < self.hi[0] && x[1] >= self.lo[1] && x[1] < self.hi[1]
    }

    pub fn contains_open(&self, x: [f64; 2]) -> bool {
        x[0] > self.lo[0] && x[0] < self.hi[0] && x[1] > self.lo[1] && x[1] < self.hi[1]
    }
}

/// The box of cells centred on the sample points of `grid`.
pub fn sample_domain(grid: &GridSpec) -> Rect {
    Rect {
        lo: [grid.origin[0] - 0.5 * grid.h[0], grid.origin[1] - 0.5 * grid.h[1]],
        hi: [
            grid.origin[0] + (grid.n[0] as f64 - 0.5) * grid.h[0],
            grid.origin[1] + (grid.n[1] as f64 - 0.5) * grid.h[1],
        ],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Covering {
    pub domain: Rect,
    pub l: [f64; 2],
    pub rects: Vec<Rect>,
    /// Worst-case number of rectangles containing a point: 1 when the sides
    /// divide evenly (up to shared edges), otherwise at most 4.
    pub overlap_bound: usize,
}

impl Covering {
    /// Number of (open) rectangles containing `x`.
    pub fn multiplicity(&self, x: [f64; 2]) -> usize {
        self.rects.iter().filter(|r| r.contains_open(x)).count()
    }
}

fn axis_starts(lo: f64, hi: f64, l: f64) -> (Vec<f64>, bool) {
    let tol = 1e-9 * (hi - lo);
    let mut out = Vec::new();
    let mut p = lo;
    while p + l < hi - tol {
        out.push(p);
        p += l;
    }
    let exact = (p + l - hi).abs() <= tol;
    out.push(if exact { p } else { hi - l });
    (out, exact)
}

/// Rows and columns of `ℓ`-rectangles; when a side does not divide evenly
/// the last row (column) is pushed back to end at the boundary.
pub fn build_covering(domain: Rect, l: [f64; 2]) -> Result<Covering> {
    let s = domain.sides();
    if !(l[0] > 0.0 && l[1] > 0.0) || l[0] > s[0] * (1.0 + 1e-12) || l[1] > s[1] * (1.0 + 1e-12) {
        return Err(Error::invalid("covering window must be positive and fit in the domain"));
    }
    let (xs, ex) = axis_starts(domain.lo[0], domain.hi[0], l[0]);
    let (ys, ey) = axis_starts(domain.lo[1], domain.hi[1], l[1]);
    let mut rects = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            rects.push(Rect { lo: [x, y], hi: [x + l[0], y + l[1]] });
        }
    }
    let overlap_bound = if ex && ey { 1 } else if ex || ey { 2 } else { 4 };
    Ok(Covering { domain, l, rects, overlap_bound })
}

pub const DEFAULT_M_MAX: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectVerdict {
    pub rect: Rect,
    pub good: bool,
    /// `‖f‖²_{L²(Q)}`.
    pub mass: f64,
    /// Largest `‖∂^α|f|²‖_{L¹(Q)} / (4^{m+1} C'_B(m) ‖f‖²_{L²(Q)})` seen.
    pub worst_ratio: f64,
    /// Order `m` at which `worst_ratio` occurs.
    pub worst_order: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodBadReport {
    pub verdicts: Vec<RectVerdict>,
    pub total_mass: f64,
    pub good_mass: f64,
    pub m_max: u32,
    /// Orders above `m_max` are not tested, so "good" only means "no
    /// violation up to `m_max`". Always set.
    pub truncated: bool,
}

impl GoodBadReport {
    pub fn good_fraction(&self) -> f64 {
        if self.total_mass > 0.0 {
            self.good_mass / self.total_mass
        } else {
            1.0
        }
    }

    pub fn bad_count(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.good).count()
    }
}

/// Labels each covering rectangle good or bad for `f` at energy `e`.
///
/// Derivatives of `|f|²` are taken with fourth-order centred differences.
/// A sample point belongs to every rectangle containing it; masses are sums
/// over member points times the cell area.
pub fn classify_good_bad(f: &GridField, covering: &Covering, e: f64, b: f64, m_max: u32) -> Result<GoodBadReport> {
    if m_max == 0 {
        return Err(Error::invalid("m_max must be at least 1"));
    }
    let g = f.grid;
    let area = g.cell_area();
    let dens: Vec<f64> = f.data.iter().map(|z| z.norm_sqr()).collect();
    let nr = covering.rects.len();
    // member indices per rectangle
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); nr];
    for i2 in 0..g.n[1] {
        for i1 in 0..g.n[0] {
            let x = g.point(i1, i2);
            for (r, rect) in covering.rects.iter().enumerate() {
                if rect.contains(x) {
                    members[r].push(i2 * g.n[0] + i1);
                }
            }
        }
    }
    let mass: Vec<f64> = members.iter().map(|m| m.iter().map(|&i| dens[i]).sum::<f64>() * area).collect();
    let mut worst = alloc::vec![(0.0f64, 0u32); nr];
    // level[a] = ∂1^a ∂2^{m−a} |f|²
    let mut level: Vec<Vec<f64>> = alloc::vec![dens.clone()];
    for m in 1..=m_max {
        let mut next = Vec::with_capacity(m as usize + 1);
        for a in 0..=m as usize {
            next.push(if a == 0 { diff4_real(&level[0], &g, 1) } else { diff4_real(&level[a - 1], &g, 0) });
        }
        level = next;
        let cap = 4f64.powi(m as i32 + 1) * bernstein_constant(m, e, b, BernsteinVariant::L1)?;
        for (r, mem) in members.iter().enumerate() {
            for d in &level {
                let l1 = mem.iter().map(|&i| d[i].abs()).sum::<f64>() * area;
                let ratio = if mass[r] > 0.0 {
                    l1 / (cap * mass[r])
                } else if l1 > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                if ratio > worst[r].0 {
                    worst[r] = (ratio, m);
                }
            }
        }
    }
    let verdicts: Vec<RectVerdict> = covering
        .rects
        .iter()
        .enumerate()
        .map(|(r, rect)| RectVerdict {
            rect: *rect,
            good: worst[r].0 <= 1.0,
            mass: mass[r],
            worst_ratio: worst[r].0,
            worst_order: worst[r].1,
        })
        .collect();
    let total_mass = f.norm_sqr();
    let good_mass = verdicts.iter().filter(|v| v.good).map(|v| v.mass).sum();
    Ok(GoodBadReport { verdicts, total_mass, good_mass, m_max, truncated: true })
}

#[cfg(test)]
mod tests;

use super::*;
use crate::landau::{eval_coherent, QuadratureSpec, Symbolic};
use alloc::vec::Vec;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_mask(rng: &mut ChaCha8Rng, n: [usize; 2], p: f64, periodic: bool) -> SetMask {
    let bits = (0..n[0] * n[1]).map(|_| rng.random_bool(p)).collect();
    SetMask::from_bits(n, [1.0, 1.0], [0.0, 0.0], periodic, bits).unwrap()
}

fn brute_window_min(mask: &SetMask, k: [usize; 2]) -> u64 {
    let (n1, n2) = (mask.n[0], mask.n[1]);
    let (a1, a2) = if mask.periodic { (n1, n2) } else { (n1 - k[0] + 1, n2 - k[1] + 1) };
    let mut best = u64::MAX;
    for s2 in 0..a2 {
        for s1 in 0..a1 {
            let mut c = 0;
            for d2 in 0..k[1] {
                for d1 in 0..k[0] {
                    c += u64::from(mask.get((s1 + d1) % n1, (s2 + d2) % n2));
                }
            }
            best = best.min(c);
        }
    }
    best
}

/// `vol(S ∩ [a, a+ℓ])` summed cell by cell.
fn covered(mask: &SetMask, a: [f64; 2], l: [f64; 2]) -> f64 {
    let ov = |lo: f64, hi: f64, c0: f64, c1: f64| (hi.min(c1) - lo.max(c0)).max(0.0);
    let mut v = 0.0;
    let reps: i64 = if mask.periodic { 1 } else { 0 };
    for i2 in 0..mask.n[1] {
        for i1 in 0..mask.n[0] {
            if !mask.get(i1, i2) {
                continue;
            }
            for w2 in 0..=reps {
                for w1 in 0..=reps {
                    let c1 = mask.origin[0] + (i1 as f64 + (w1 * mask.n[0] as i64) as f64) * mask.h[0];
                    let c2 = mask.origin[1] + (i2 as f64 + (w2 * mask.n[1] as i64) as f64) * mask.h[1];
                    v += ov(a[0], a[0] + l[0], c1, c1 + mask.h[0]) * ov(a[1], a[1] + l[1], c2, c2 + mask.h[1]);
                }
            }
        }
    }
    v
}

#[test]
fn full_mask_is_fully_thick() {
    let m = SetMask::full([16, 12], [0.5, 0.5], [0.0, 0.0], false).unwrap();
    for l in [[2.0, 2.0], [3.3, 1.7], [8.0, 6.0]] {
        let r = thickness_scan(&m, l).unwrap();
        assert!((r.rho_lower - 1.0).abs() < 1e-12);
        assert_eq!(r.rho_grid, 1.0);
    }
    assert_eq!(m.measure(), 16.0 * 12.0 * 0.25);
}

#[test]
fn strips_density() {
    let m = SetMask::strips([64, 64], [0.25, 0.25], 3, 8, 0, true).unwrap();
    let r = thickness_scan(&m, [2.0, 2.0]).unwrap();
    assert_eq!(r.cells, [8, 8]);
    assert!((r.rho_lower - 3.0 / 8.0).abs() < 1e-12);
    assert_eq!(r.rho_grid, 3.0 / 8.0);
    // off-grid window: within one cell layer of w/p
    let r = thickness_scan(&m, [2.1, 2.1]).unwrap();
    assert!((r.rho_lower - 3.0 / 8.0).abs() <= 1.0 / 8.0);
}

#[test]
fn disk_complement_density() {
    let r0 = 8.0;
    let m = SetMask::from_fn([64, 64], [1.0, 1.0], [0.0, 0.0], false, |x| {
        (x[0] - 32.0).powi(2) + (x[1] - 32.0).powi(2) > r0 * r0
    })
    .unwrap();
    let hole = m.complement().measure();
    let l = 4.0 * r0;
    let r = thickness_scan(&m, [l, l]).unwrap();
    assert!(r.rho_lower >= 1.0 - hole / (l * l) - 1e-12);
    assert!((1.0 - hole / (l * l) - (1.0 - core::f64::consts::PI / 16.0)).abs() < 0.01);
    assert!((r.rho_lower - (1.0 - hole / (l * l))).abs() < 1e-12);
}

#[test]
fn grid_windows_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in 0..12 {
        let periodic = t % 2 == 0;
        let n = [10 + rng.random_range(0..12), 8 + rng.random_range(0..12)];
        let mask = random_mask(&mut rng, n, 0.6, periodic);
        for _ in 0..4 {
            let k = [rng.random_range(2..=n[0]), rng.random_range(2..=n[1])];
            let r = thickness_scan(&mask, [k[0] as f64, k[1] as f64]).unwrap();
            let want = brute_window_min(&mask, k);
            assert_eq!(r.rho_grid, want as f64 / (k[0] * k[1]) as f64);
            assert_eq!(window_min(&mask, k).unwrap().0, want);
            // on whole cells the real-anchor minimum is the grid minimum
            assert!((r.rho_lower - r.rho_grid).abs() < 1e-12);
        }
    }
}

#[test]
fn real_anchors_match_dense_offset_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 0..6 {
        let periodic = t % 2 == 1;
        let mask = random_mask(&mut rng, [12, 10], 0.55, periodic);
        let l = [3.5, 4.25];
        let r = thickness_scan(&mask, l).unwrap();
        // offsets on a quarter-cell lattice hit every aligned window
        let mut best = f64::INFINITY;
        let steps = |n: usize, side: f64| if periodic { 4 * n } else { ((n as f64 - side) * 4.0).round() as usize + 1 };
        for q2 in 0..steps(10, l[1]) {
            for q1 in 0..steps(12, l[0]) {
                best = best.min(covered(&mask, [q1 as f64 * 0.25, q2 as f64 * 0.25], l));
            }
        }
        assert!((r.rho_lower - best / (l[0] * l[1])).abs() < 1e-12, "{} {}", r.rho_lower, best / (l[0] * l[1]));
        assert!((covered(&mask, r.anchor, l) / (l[0] * l[1]) - r.rho_lower).abs() < 1e-12);
    }
}

#[test]
fn scan_rejects_bad_windows() {
    let m = SetMask::full([16, 16], [1.0, 1.0], [0.0, 0.0], false).unwrap();
    assert!(thickness_scan(&m, [1.5, 4.0]).is_err());
    assert!(thickness_scan(&m, [17.0, 4.0]).is_err());
    assert!(thickness_scan(&m, [0.0, 4.0]).is_err());
    assert!(SetMask::from_bits([0, 3], [1.0, 1.0], [0.0, 0.0], false, Vec::new()).is_err());
}

#[test]
fn periodic_window_doubling_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..8 {
        let mask = random_mask(&mut rng, [24, 24], 0.7, true);
        for l in [2.0, 3.0, 2.5] {
            let a = thickness_scan(&mask, [l, l]).unwrap().rho_lower;
            let b = thickness_scan(&mask, [2.0 * l, 2.0 * l]).unwrap().rho_lower;
            assert!(b >= a - 1e-12);
        }
    }
}

#[test]
fn torus_mask_cells_are_centred_on_lattice_points() {
    let s = TorusSetup::square_with_flux(2, 1.0, 16).unwrap();
    let m = SetMask::on_torus(&s, |i1, _| i1 < 8).unwrap();
    let h = s.h();
    assert_eq!(m.center(3, 5), [3.0 * h[0], 5.0 * h[1]]);
    assert!(m.contains([7.0 * h[0], 0.0]));
    assert!(!m.contains([8.0 * h[0], 0.0]));
    assert!(m.contains([-h[0] * 9.0, 0.0]));
}

#[test]
fn covering_even_division() {
    let d = Rect::new([0.0, 0.0], [4.0, 6.0]).unwrap();
    let c = build_covering(d, [2.0, 3.0]).unwrap();
    assert_eq!(c.rects.len(), 4);
    assert_eq!(c.overlap_bound, 1);
    let total: f64 = c.rects.iter().map(|r| r.area()).sum();
    assert!((total - d.area()).abs() < 1e-12);
}

#[test]
fn covering_uneven_overlap_audit() {
    let l = [2.0, 1.5];
    let d = Rect::new([0.0, 0.0], [2.5 * l[0], 2.5 * l[1]]).unwrap();
    let c = build_covering(d, l).unwrap();
    assert_eq!(c.overlap_bound, 4);
    let n = 400;
    let mut worst = 0;
    for j in 0..n {
        for i in 0..n {
            let x = [(i as f64 + 0.5) / n as f64 * d.hi[0], (j as f64 + 0.5) / n as f64 * d.hi[1]];
            let k = c.multiplicity(x);
            assert!(k >= 1);
            worst = worst.max(k);
        }
    }
    assert!(worst <= 4);
    assert_eq!(worst, 4);
    assert!(build_covering(d, [6.0, 1.0]).is_err());
}

fn lll_field(centers: &[[f64; 2]], coeffs: &[C], b: f64) -> GridField {
    let mut sym = Symbolic::coherent(centers[0], b).scale(coeffs[0]);
    for (y, c) in centers.iter().zip(coeffs).skip(1) {
        sym = sym.add(&Symbolic::coherent(*y, b).scale(*c));
    }
    let q = QuadratureSpec::for_field(b);
    let grid = q.grid_around(centers).unwrap();
    GridField::sample(&sym, grid)
}

#[test]
fn coherent_state_good_near_centre() {
    let b = 1.0;
    let y = [0.3, -0.2];
    let f = lll_field(&[y], &[C::new(1.0, 0.0)], b);
    let cov = build_covering(sample_domain(&f.grid), [4.0, 4.0]).unwrap();
    let rep = classify_good_bad(&f, &cov, b, b, 3).unwrap();
    let v = rep.verdicts.iter().find(|v| v.rect.contains(y)).unwrap();
    assert!(v.good, "ratio {}", v.worst_ratio);
    assert!(rep.good_fraction() >= 0.5);
    assert!(rep.truncated);
}

#[test]
fn bad_rectangle_at_a_zero() {
    // f_{(a,0)} − f_{(−a,0)} vanishes linearly at the origin
    let (b, a) = (1.0, 1.0);
    let f = |x: [f64; 2]| eval_coherent([a, 0.0], b, x) - eval_coherent([-a, 0.0], b, x);
    let h = 1.0 / 128.0;
    let n = 161;
    let grid = GridSpec::new([n, n], [-(80.0 * h), -(80.0 * h)], [h, h]).unwrap();
    let field = GridField::from_fn(grid, f);
    let dom = Rect::new([-17.0 / 32.0; 2], [17.0 / 32.0; 2]).unwrap();
    let cov = build_covering(dom, [1.0 / 16.0, 1.0 / 16.0]).unwrap();
    let rep = classify_good_bad(&field, &cov, b, b, 2).unwrap();
    let v = rep.verdicts.iter().find(|v| v.rect.contains([0.0, 0.0]) && v.rect.contains([-1e-9, -1e-9])).unwrap();
    assert!(!v.good);
    assert_eq!(v.worst_order, 2);

    // independent evaluation on the central square: midpoint rule and
    // difference quotients of the closed form
    let eps = 1.0 / 16.0;
    let dens = |x: [f64; 2]| f(x).norm_sqr();
    let k = 64;
    let step = 1e-3;
    let (mut mass, mut d11) = (0.0, 0.0);
    for j in 0..k {
        for i in 0..k {
            let x = [-eps / 2.0 + (i as f64 + 0.5) * eps / k as f64, -eps / 2.0 + (j as f64 + 0.5) * eps / k as f64];
            mass += dens(x);
            let dd = (dens([x[0] + step, x[1]]) - 2.0 * dens(x) + dens([x[0] - step, x[1]])) / (step * step);
            d11 += dd.abs();
        }
    }
    let cell = (eps / k as f64).powi(2);
    let (mass, d11) = (mass * cell, d11 * cell);
    let cap = 64.0 * bernstein_constant(2, b, b, BernsteinVariant::L1).unwrap();
    assert!(d11 > cap * mass);
    assert!((v.mass - mass).abs() < 0.05 * mass);
}

#[test]
fn good_mass_at_least_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b = 1.0;
    for _ in 0..3 {
        let centers: Vec<[f64; 2]> = (0..3).map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let coeffs: Vec<C> = (0..3).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let f = lll_field(&centers, &coeffs, b);
        let cov = build_covering(sample_domain(&f.grid), [1.5, 1.5]).unwrap();
        let rep = classify_good_bad(&f, &cov, b, b, DEFAULT_M_MAX).unwrap();
        assert!(rep.good_mass >= 0.5 * rep.total_mass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn superset_never_thinner(seed in 0u64..1000, k in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_mask(&mut rng, [16, 16], 0.5, seed % 2 == 0);
        let extra = random_mask(&mut rng, [16, 16], 0.3, seed % 2 == 0);
        let b = a.union(&extra).unwrap();
        prop_assert!(a.is_subset_of(&b));
        let l = [k as f64 + 0.3, k as f64];
        let ra = thickness_scan(&a, l).unwrap().rho_lower;
        let rb = thickness_scan(&b, l).unwrap().rho_lower;
        prop_assert!(rb >= ra - 1e-12);
    }

    #[test]
    fn certified_rho_bounds_every_grid_window(seed in 0u64..1000, l1 in 2.0f64..7.9, l2 in 2.0f64..7.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_mask(&mut rng, [12, 12], 0.6, false);
        let r = thickness_scan(&m, [l1, l2]).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.rho_lower));
        for s in [[0.0, 0.0], [1.3, 2.7], [12.0 - l1, 12.0 - l2]] {
            prop_assert!(covered(&m, s, [l1, l2]) >= r.rho_lower * l1 * l2 - 1e-9);
        }
    }
}

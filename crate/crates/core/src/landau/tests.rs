use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn grid_for(sym: &Symbolic) -> GridSpec {
    QuadratureSpec::for_field(sym.b).grid_around(&sym.centers()).unwrap()
}

#[test]
fn coherent_point_values() {
    let s = CoherentState::new([0.7, -1.2], 2.0).unwrap();
    assert_eq!(s.eval([0.7, -1.2]), C::new(1.0, 0.0));
    let z = eval_coherent([0.0, 0.0], 1.5, [0.3, 0.4]);
    assert!(z.im == 0.0 && (z.re - (-1.5 * 0.25 * 0.25f64).exp()).abs() < 1e-15);
    assert!(CoherentState::new([0.0, 0.0], 0.0).is_err());
}

#[test]
fn coherent_norm_by_quadrature() {
    for &(y, b) in &[([0.0, 0.0], 1.0), ([1.5, -2.0], 1.0), ([0.3, 0.9], 2.5)] {
        let sym = Symbolic::coherent(y, b);
        let f = GridField::sample(&sym, grid_for(&sym));
        assert!(rel(f.norm_sqr(), 2.0 * PI / b) < 1e-6);
    }
}

#[test]
fn overlap_matches_quadrature() {
    let b = 1.3;
    let (y, z) = ([0.4, -0.2], [-0.5, 1.1]);
    let grid = QuadratureSpec::for_field(b).grid_around(&[y, z]).unwrap();
    let mut s = C::zero();
    for i2 in 0..grid.n[1] {
        for i1 in 0..grid.n[0] {
            let x = grid.point(i1, i2);
            s += eval_coherent(y, b, x).conj() * eval_coherent(z, b, x);
        }
    }
    s *= grid.cell_area();
    assert!((s - coherent_overlap(b, y, z)).norm() < 1e-10);
}

#[test]
fn laguerre_closed_forms() {
    for &x in &[0.0, 0.3, 1.7, 5.0] {
        assert_eq!(laguerre(0, x), 1.0);
        assert!((laguerre(1, x) - (1.0 - x)).abs() < 1e-14);
        assert!((laguerre(2, x) - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-13);
        assert!((laguerre(3, x) - (-x * x * x + 9.0 * x * x - 18.0 * x + 6.0) / 6.0).abs() < 1e-12);
    }
    for k in 0..6 {
        let p = laguerre_in_u(k, 1.4);
        let (u1, u2) = (0.6, -0.9);
        let want = laguerre(k, 0.7 * (u1 * u1 + u2 * u2));
        assert!((p.eval(u1, u2) - C::new(want, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn kernel_values() {
    let b = 1.0;
    assert_eq!(eval_kernel(0.5, b, [0.1, 0.2], [0.3, 0.4]).unwrap(), C::zero());
    let k = eval_kernel(2.0, b, [0.3, -0.1], [0.3, -0.1]).unwrap();
    assert!((k - C::new(b / (2.0 * PI), 0.0)).norm() < 1e-15);
    assert!(eval_kernel(2.0, 0.0, [0.0; 2], [0.0; 2]).is_err());
    // column closed form agrees with the pointwise kernel
    let col = Symbolic::kernel_column(5.5, 1.2, [0.2, 0.5]);
    for x in [[0.0, 0.0], [1.0, -0.4], [2.2, 1.3]] {
        let a = col.eval(x);
        let e = eval_kernel(5.5, 1.2, x, [0.2, 0.5]).unwrap();
        assert!((a - e).norm() < 1e-13);
    }
}

#[test]
fn kernel_reproduces_itself() {
    let b = 1.0;
    let e = 3.5;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..4 {
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let y = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let grid = QuadratureSpec { radius: 12.0, h: 0.125, tol: 1e-6 }.grid_around(&[x, y]).unwrap();
        let mut s = C::zero();
        for i2 in 0..grid.n[1] {
            for i1 in 0..grid.n[0] {
                let z = grid.point(i1, i2);
                s += eval_kernel(e, b, x, z).unwrap() * eval_kernel(e, b, z, y).unwrap();
            }
        }
        s *= grid.cell_area();
        let k = eval_kernel(e, b, x, y).unwrap();
        assert!((s - k).norm() < 1e-6 * (1.0 + k.norm()), "{s} {k}");
    }
}

#[test]
fn kernel_projects_levels() {
    // level-1 state is annihilated by the E = B projector and kept by E = 3B
    let b = 1.0;
    let f = Symbolic::landau_state([0.3, -0.2], 1, b);
    let grid = QuadratureSpec { radius: 12.0, h: 0.125, tol: 1e-6 }.grid_around(&[[0.3, -0.2]]).unwrap();
    let samples = GridField::sample(&f, grid);
    for x in [[0.0, 0.0], [0.8, 0.5]] {
        let mut p0 = C::zero();
        let mut p1 = C::zero();
        for i2 in 0..grid.n[1] {
            for i1 in 0..grid.n[0] {
                let z = grid.point(i1, i2);
                let v = samples.at(i1, i2);
                p0 += eval_kernel(1.5, b, x, z).unwrap() * v;
                p1 += eval_kernel(3.5, b, x, z).unwrap() * v;
            }
        }
        p0 *= grid.cell_area();
        p1 *= grid.cell_area();
        assert!(p0.norm() < 1e-9);
        assert!((p1 - f.eval(x)).norm() < 1e-8);
    }
}

#[test]
fn zero_field_derivative() {
    let g = GridSpec::new([8, 8], [0.0, 0.0], [0.1, 0.1]).unwrap();
    let z = GridField::zeros(g);
    let d = magnetic_derivative(&z, 1, 1.0, DerivativeMethod::FiniteDifference).unwrap();
    assert!(d.data.iter().all(|v| *v == C::zero()));
    assert!(magnetic_derivative(&z, 3, 1.0, DerivativeMethod::FiniteDifference).is_err());
    assert!(magnetic_derivative(&z, 1, 1.0, DerivativeMethod::ClosedForm).is_err());
}

fn fd_vs_closed(h: f64, axis: usize) -> f64 {
    let sym = Symbolic::coherent([0.4, -0.3], 1.0);
    let grid = QuadratureSpec { radius: 9.0, h, tol: 1e-6 }.grid_around(&sym.centers()).unwrap();
    let f = GridField::sample(&sym, grid);
    let a = magnetic_derivative(&f, axis, 1.0, DerivativeMethod::ClosedForm).unwrap();
    let b = magnetic_derivative(&f, axis, 1.0, DerivativeMethod::FiniteDifference).unwrap();
    let diff: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
    (diff * grid.cell_area()).sqrt()
}

#[test]
fn finite_difference_is_second_order() {
    for axis in [1, 2] {
        let e1 = fd_vs_closed(0.1, axis);
        let e2 = fd_vs_closed(0.05, axis);
        let ratio = e1 / e2;
        assert!(ratio > 3.6 && ratio < 4.4, "axis {axis}: ratio {ratio}");
    }
}

#[test]
fn closed_form_matches_spec_formula() {
    // ∂1 f_y = (−(B/2)(x1−y1) − i(B/2)y2) f_y, and ∂̃1 = i∂1 − (B/2)x2
    let (y, b) = ([0.7, 1.9], 1.6);
    let sym = Symbolic::coherent(y, b).magnetic(1).unwrap();
    for x in [[0.0, 0.0], [1.2, -0.3]] {
        let f = eval_coherent(y, b, x);
        let d1 = (C::new(-0.5 * b * (x[0] - y[0]), -0.5 * b * y[1])) * f;
        let want = I * d1 - f * (0.5 * b * x[1]);
        assert!((sym.eval(x) - want).norm() < 1e-14);
    }
}

#[test]
fn ordinary_derivative_grows_magnetic_does_not() {
    let b = 1.0;
    for &y2 in &[0.0, 3.0, 6.0, 10.0] {
        let y = [0.0, y2];
        let sym = Symbolic::coherent(y, b);
        let grid = grid_for(&sym);
        let mut ord = 0.0;
        for i2 in 0..grid.n[1] {
            for i1 in 0..grid.n[0] {
                let x = grid.point(i1, i2);
                let d1 = C::new(-0.5 * b * (x[0] - y[0]), -0.5 * b * y[1]) * eval_coherent(y, b, x);
                ord += d1.norm_sqr();
            }
        }
        ord *= grid.cell_area();
        let exact = 0.5 * PI * (1.0 + b * y2 * y2);
        assert!(rel(ord, exact) < 1e-8);
        assert!(ord >= PI * y2 * y2 / 2.0 - 4.0 * PI / b);
        let f = GridField::sample(&sym, grid);
        let mag = bernstein_sum(&f, 1, b, 1e-6).unwrap().value;
        assert!(rel(mag, 2.0 * PI) < 1e-8);
    }
}

#[test]
fn printed_ordinary_bound_fails_for_weak_fields() {
    // exact ‖∂1 f_y‖² = π/2 + πB y2²/2 drops below π y2²/2 − 4π/B once
    // y2²(1−B) > 1 + 8/B
    let b: f64 = 0.25;
    let y2: f64 = 8.0;
    let exact = 0.5 * PI * (1.0 + b * y2 * y2);
    assert!(exact < PI * y2 * y2 / 2.0 - 4.0 * PI / b);
}

#[test]
fn coherent_sums_small_m() {
    for &b in &[1.0, 2.0] {
        let sym = Symbolic::coherent([0.5, -0.5], b);
        let f = GridField::sample(&sym, grid_for(&sym));
        let s1 = bernstein_sum(&f, 1, b, 1e-6).unwrap();
        assert!(rel(s1.value, 2.0 * PI) < 1e-8);
        assert!(!s1.truncation_warning);
        let s2 = bernstein_sum(&f, 2, b, 1e-6).unwrap();
        assert!(rel(s2.value, 6.0 * PI * b) < 1e-8);
    }
}

#[test]
fn eigenfunction_residual_second_order() {
    let res = |h: f64, k: usize| {
        let b = 1.0;
        let sym = Symbolic::landau_state([0.2, 0.1], k, b);
        let grid = QuadratureSpec { radius: 10.0, h, tol: 1e-6 }.grid_around(&sym.centers()).unwrap();
        let f = GridField::sample(&sym, grid);
        let hf = fd_hamiltonian(&f, b).unwrap();
        let lam = (2 * k + 1) as f64 * b;
        let r: f64 = hf.data.iter().zip(&f.data).map(|(a, v)| (a - v * lam).norm_sqr()).sum();
        (r / f.data.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    };
    for k in 0..3 {
        let (a, c) = (res(0.1, k), res(0.05, k));
        assert!(c < 0.05, "k={k} residual {c}");
        assert!(a / c > 3.5, "k={k} ratio {}", a / c);
    }
}

fn random_combination(rng: &mut ChaCha8Rng, b: f64) -> LevelCombination {
    let n = rng.random_range(1..=4);
    let parts = (0..n)
        .map(|_| LevelPart {
            y: [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)],
            k: rng.random_range(0..=2),
            coeff: C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        })
        .collect();
    LevelCombination { b, parts }
}

#[test]
fn level_norms_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let lc = random_combination(&mut rng, 1.0);
        let norms = lc.level_norms();
        for (k, nk) in norms.iter().enumerate() {
            let only = LevelCombination { b: lc.b, parts: lc.parts.iter().copied().filter(|p| p.k == k).collect() };
            if only.parts.is_empty() {
                assert_eq!(*nk, 0.0);
                continue;
            }
            let sym = only.to_symbolic();
            let q = GridField::sample(&sym, grid_for(&sym)).norm_sqr();
            assert!(rel(q, *nk) < 1e-8, "k={k} {q} {nk}");
        }
    }
}

#[test]
fn integration_by_parts_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let lc = random_combination(&mut rng, 1.0);
        let sym = lc.to_symbolic();
        let f = GridField::sample(&sym, grid_for(&sym));
        for m in 1..=3 {
            let s = bernstein_sum(&f, m, 1.0, 1e-6).unwrap().value;
            let e = lc.fm_expectation(m);
            assert!(rel(s, e) < 1e-8, "m={m} {s} {e}");
        }
    }
}

#[test]
fn exterior_mass_closed_form() {
    for &r in &[1.0, 2.0, 4.0] {
        let m = exterior_mass(|x| eval_coherent([0.0, 0.0], 1.0, x), [0.0, 0.0], r, 1.0);
        let want = 2.0 * PI * (-r * r / 2.0f64).exp();
        assert!(rel(m, want) < 1e-10, "r={r} {m} {want}");
    }
}

#[test]
fn disk_mass_translation_invariant() {
    let b = 1.0;
    let base = annulus_mass(|x| eval_coherent([0.0, 0.0], b, x), [0.0, 0.0], 0.0, 1.5, 4, 24, 128);
    for y in [[2.0, -1.0], [-3.5, 0.7]] {
        let m = annulus_mass(|x| eval_coherent(y, b, x), y, 0.0, 1.5, 4, 24, 128);
        assert!(rel(m, base) < 1e-12);
    }
    assert!(rel(base, 2.0 * PI * (1.0 - (-1.125f64).exp())) < 1e-10);
}

#[test]
fn l1_sums() {
    let b = 1.0;
    let sym = Symbolic::coherent([0.2, 0.3], b);
    let f = GridField::sample(&sym, grid_for(&sym));
    let s0 = l1_bernstein_sum(&f, 0, 1e-6);
    assert!(rel(s0.value, f.norm_sqr()) < 1e-14);
    // ‖∂1|f|²‖₁ + ‖∂2|f|²‖₁ = 4√(2π/B)
    let s1 = l1_bernstein_sum(&f, 1, 1e-6);
    // |·| has a kink, so the trapezoid rule is only second order here
    assert!(rel(s1.value, 4.0 * (2.0 * PI / b).sqrt()) < 1e-3, "{}", s1.value);
    let c1 = crate::algebra::bernstein_constant(1, b, b, crate::algebra::BernsteinVariant::L1).unwrap();
    assert!(s1.value <= c1 * 2.0 * PI / b);
    for m in 0..=3 {
        let a = l1_bernstein_sum(&f, m, 1e-6).value;
        let w = l1_bernstein_sum_words(&f, m);
        assert!(rel(a, w) < 1e-12);
    }
}

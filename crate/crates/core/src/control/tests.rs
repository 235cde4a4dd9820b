use super::*;
use crate::inequality::theoretical_constant_ln;
use crate::lattice::{assemble, eigensolve, Cutoff, EigenConfig, TorusSetup};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice(n_phi: u32, b: f64, n: usize, levels: u32) -> (TorusSetup, SpectralSubspace) {
    let s = TorusSetup::square_with_flux(n_phi, b, n).unwrap();
    let op = assemble(&s, None).unwrap();
    let sub = eigensolve(&op, Cutoff::Count((n_phi * levels) as usize), &EigenConfig::default()).unwrap();
    (s, sub)
}

fn one_mode(lambda: f64, t: f64, u0: f64) -> HeatProblem {
    HeatProblem::from_parts(alloc::vec![lambda], DMat::identity(1), t, alloc::vec![C::new(u0, 0.0)], 10.0).unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng, k: usize) -> Vec<C> {
    let v: Vec<C> = (0..k).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let n = norm(&v);
    v.iter().map(|c| c / n).collect()
}

#[test]
fn propagate_is_diagonal() {
    let (_, sub) = lattice(2, 1.0, 16, 2);
    let u0: Vec<C> = (0..sub.len()).map(|k| C::new(1.0, k as f64)).collect();
    assert_eq!(propagate(&sub, &u0, 0.0).unwrap(), u0);
    let mut e = alloc::vec![C::zero(); sub.len()];
    e[3] = C::new(1.0, 0.0);
    let u = propagate(&sub, &e, 0.7).unwrap();
    assert!((u[3].re - (-sub.values[3] * 0.7).exp()).abs() < 1e-15 && norm(&u) == u[3].norm());
    let lo = sub.values[0];
    for t in [0.1, 1.0, 3.0] {
        assert!(norm(&propagate(&sub, &u0, t).unwrap()) <= (-lo * t).exp() * norm(&u0) * (1.0 + 1e-14));
    }
    assert!(propagate(&sub, &u0, -1.0).is_err());
}

#[test]
fn gramian_quadrature_matches_closed_form() {
    let (s, sub) = lattice(2, 1.0, 16, 2);
    let m = SetMask::on_torus(&s, |i1, _| i1 % 4 < 2).unwrap();
    for t in [0.05, 1.0, 10.0] {
        let p = HeatProblem::new(&sub, &m, t, alloc::vec![C::new(1.0, 0.0); sub.len()]).unwrap();
        let (a, b) = (p.gramian(DEFAULT_TIME_NODES), p.gramian_exact());
        let d: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(d < 1e-13 * b.frobenius(), "T={t}");
    }
}

#[test]
fn one_mode_quotient_closed_form() {
    for (l, t) in [(1.0, 0.5), (3.0, 2.0), (0.2, 0.1)] {
        let q = observability_quotient(&one_mode(l, t, 2.0)).unwrap();
        let want = (-2.0 * l * t).exp() / ((1.0 - (-2.0 * l * t).exp()) / (2.0 * l));
        assert!((q - want).abs() < 1e-12 * want);
    }
    assert!(observability_quotient(&one_mode(1.0, 1.0, 0.0)).is_err());
}

#[test]
fn quotient_with_full_mask_is_per_mode_bounded() {
    let (s, sub) = lattice(2, 1.0, 16, 2);
    let full = SetMask::on_torus(&s, |_, _| true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = 0.8;
    let worst = sub.values.iter().map(|l| 2.0 * l * (-2.0 * l * t).exp() / -(-2.0 * l * t).exp_m1()).fold(0.0, f64::max);
    for _ in 0..20 {
        let p = HeatProblem::new(&sub, &full, t, random_unit(&mut rng, sub.len())).unwrap();
        assert!(observability_quotient(&p).unwrap() <= worst * (1.0 + 1e-12));
    }
}

#[test]
fn missing_set_is_reported() {
    let (s, sub) = lattice(2, 1.0, 16, 1);
    let empty = SetMask::on_torus(&s, |_, _| false).unwrap();
    let p = HeatProblem::new(&sub, &empty, 1.0, alloc::vec![C::new(1.0, 0.0); sub.len()]).unwrap();
    assert!(matches!(observability_quotient(&p), Err(Error::Numerical(_))));
    match hum_control(&p, 1e-8) {
        Err(Error::IllConditioned { witness, .. }) => assert!((norm(&witness) - 1.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn hum_zero_state() {
    let r = hum_control(&one_mode(1.0, 1.0, 0.0), 1e-8).unwrap();
    assert_eq!(r.cost, 0.0);
    assert!(r.control.iter().all(|c| c.iter().all(|z| z.is_zero())));
}

#[test]
fn hum_one_mode_closed_form() {
    for (l, t, u) in [(1.0, 1.0, 1.0), (3.0, 0.3, -2.0), (0.5, 4.0, 0.7)] {
        let r = hum_control(&one_mode(l, t, u), 1e-8).unwrap();
        let g = (1.0 - (-2.0 * l * t).exp()) / (2.0 * l);
        let p = -(-l * t).exp() * u / g;
        let cost = (-l * t).exp() * u.abs() / g.sqrt();
        assert!((r.p[0].re - p).abs() < 1e-8 * p.abs());
        assert!((r.cost - cost).abs() < 1e-8 * cost);
        assert!((r.gramian_energy - cost * cost).abs() < 1e-8 * cost * cost);
        assert!(r.terminal_residual < 1e-12);
    }
}

#[test]
fn hum_on_thick_strips() {
    let b = 1.0;
    let (s, sub) = lattice(4, b, 24, 2);
    let m = SetMask::on_torus(&s, |i1, _| i1 % 6 < 3).unwrap();
    let l = [6.0 * s.h()[0], 6.0 * s.h()[1]];
    let rho = crate::geometry::thickness_scan(&m, l).unwrap().rho_lower;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for t in [0.2, 1.0, 4.0] {
        let u0 = random_unit(&mut rng, sub.len());
        let p = HeatProblem::new(&sub, &m, t, u0).unwrap();
        let r = hum_control(&p, DEFAULT_EPS_TARGET).unwrap();
        assert!(r.terminal_residual <= DEFAULT_EPS_TARGET);
        assert!((r.cost * r.cost - r.gramian_energy).abs() <= 1e-10 * r.gramian_energy);
        // independent re-integration on a finer composite rule
        let end = resimulate(&p, &r.p, 8, 64).unwrap();
        assert!(norm(&end) <= DEFAULT_EPS_TARGET);
        let bound = cost_bound_ln(rho, l, b, t, ThmConstants::Traced, CostConstants::default()).unwrap();
        assert!((r.cost * r.cost).ln() <= bound);
        // the controlled trajectory starts at u0
        let u = r.state_at(&p, 0.0).unwrap();
        assert!(u.iter().zip(&p.u0).all(|(a, b)| (a - b).norm() < 1e-14));
    }
}

#[test]
fn duality_between_quotient_and_cost() {
    let (s, sub) = lattice(2, 1.0, 16, 2);
    let m = SetMask::on_torus(&s, |i1, i2| (i1 / 4 + i2 / 4) % 2 == 0).unwrap();
    let base = HeatProblem::new(&sub, &m, 0.5, alloc::vec![C::zero(); sub.len()]).unwrap();
    let c_sq = observability_constant_sq(&base, DEFAULT_TIME_NODES).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut best_q: f64 = 0.0;
    for _ in 0..200 {
        let p = base.with_initial(random_unit(&mut rng, sub.len())).unwrap();
        let q = observability_quotient(&p).unwrap();
        let r = hum_control(&p, 1e-8).unwrap();
        assert!(r.cost * r.cost <= c_sq * (1.0 + 1e-9));
        best_q = best_q.max(q);
    }
    assert!(best_q <= c_sq * (1.0 + 1e-9));
    assert!(best_q > 0.0);
}

#[test]
fn larger_set_is_cheaper() {
    let (s, sub) = lattice(2, 1.0, 16, 2);
    let small = SetMask::on_torus(&s, |i1, _| i1 % 8 < 3).unwrap();
    let big = SetMask::on_torus(&s, |i1, i2| i1 % 8 < 3 || i2 % 8 < 2).unwrap();
    assert!(small.is_subset_of(&big));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in [0.3, 2.0] {
        for _ in 0..10 {
            let u0 = random_unit(&mut rng, sub.len());
            let a = hum_control(&HeatProblem::new(&sub, &small, t, u0.clone()).unwrap(), 1e-8).unwrap();
            let b = hum_control(&HeatProblem::new(&sub, &big, t, u0).unwrap(), 1e-8).unwrap();
            assert!(b.cost <= a.cost * (1.0 + 1e-10));
        }
    }
}

#[test]
fn quotient_blows_up_with_hole() {
    let b = 1.0;
    let (s, sub) = lattice(4, b, 32, 1);
    let c = [0.5 * s.l[0], 0.5 * s.l[1]];
    let disk = |r: f64| {
        SetMask::on_torus(&s, move |i1, i2| {
            let x = [i1 as f64 * s.h()[0] - c[0], i2 as f64 * s.h()[1] - c[1]];
            x[0] * x[0] + x[1] * x[1] < r * r
        })
        .unwrap()
    };
    let u0 = concentrated_vector(&sub, &disk(0.5)).unwrap();
    let mut prev = 0.0;
    for r in [0.5, 1.0, 1.5, 2.0] {
        let p = HeatProblem::new(&sub, &disk(r).complement(), 1.0, u0.clone()).unwrap();
        let q = observability_quotient(&p).unwrap();
        assert!(q > prev);
        prev = q;
    }
    let q1 = observability_quotient(&HeatProblem::new(&sub, &disk(1.0).complement(), 1.0, u0.clone()).unwrap()).unwrap();
    assert!(prev > 4.0 * q1);
}

#[test]
fn spectral_factors_reproduce_constant() {
    let l = [0.3, 0.2];
    for thm in [ThmConstants::Traced, ThmConstants::Structural { c1: 5.0, c2: 1.0, c3: 2.0, c4: 0.5 }] {
        let (ln_d0, d1) = spectral_factors(0.4, l, 1.5, thm).unwrap();
        for e in [1.5, 4.0, 30.0] {
            let want = theoretical_constant_ln(e, 1.5, l, 0.4, thm).unwrap();
            assert!((ln_d0 + d1 * e.sqrt() - want).abs() < 1e-9 * want.abs());
        }
    }
}

#[test]
fn cost_bound_chains_abstract_estimate() {
    let c = CostConstants { c5: 2.0, c6: 1.5, c7: 0.5 };
    let (ln_d0, d1) = spectral_factors(0.5, [1.0, 1.0], 1.0, ThmConstants::Traced).unwrap();
    let want = abstract_cost_ln(ln_d0, d1, 1.5, 1.0, c).unwrap() - 3.0;
    assert!((cost_bound_ln(0.5, [1.0, 1.0], 1.0, 3.0, ThmConstants::Traced, c).unwrap() - want).abs() < 1e-9 * want.abs());
    assert!(cost_bound(0.5, [1.0, 1.0], 1.0, 3.0, ThmConstants::Traced, c).unwrap().is_infinite());
    assert!(cost_bound_ln(0.5, [1.0, 1.0], 1.0, 0.0, ThmConstants::Traced, c).is_err());
    assert!(cost_bound_ln(1.5, [1.0, 1.0], 1.0, 1.0, ThmConstants::Traced, c).is_err());
}

#[test]
fn abstract_cost_shape() {
    let c = CostConstants::default();
    // d1 = 0: (d0/T)(2 d0 + 1)
    let v = abstract_cost(2.0, 0.0, 4.0, 1.0, c).unwrap();
    assert!((v - 0.5 * 5.0).abs() < 1e-12);
    assert!((abstract_cost(2.0, 0.0, 8.0, 1.0, c).unwrap() - v / 2.0).abs() < 1e-12);
    let e1 = abstract_cost_ln(1.0, 1.0, 1.0, 1.0, c).unwrap() - abstract_cost_ln(1.0, 0.0, 1.0, 1.0, c).unwrap();
    let e2 = abstract_cost_ln(1.0, 2.0, 1.0, 1.0, c).unwrap() - abstract_cost_ln(1.0, 0.0, 1.0, 1.0, c).unwrap();
    assert!((e2 - 4.0 * e1).abs() < 1e-12);
    // no overflow for astronomically large d0
    let big = abstract_cost_ln(1e5, 1.0, 1.0, 1.0, c).unwrap();
    assert!((big - (2e5 + 2f64.ln() + 1.0)).abs() < 1e-6);
    assert!(abstract_cost(0.0, 1.0, 1.0, 1.0, c).is_err());
}

#[test]
fn cost_bound_asymptotics() {
    let thm = ThmConstants::Structural { c1: 2.0, c2: 1.0, c3: 1.0, c4: 1.0 };
    let c = CostConstants::default();
    let f = |t: f64| cost_bound_ln(0.5, [1.0, 1.0], 2.0, t, thm, c).unwrap();
    // large T: slope −B
    let slope = (f(600.0) - f(400.0)) / 200.0;
    assert!((slope + 2.0).abs() < 0.01);
    // small T: T ln(bound) tends to the exponential rate
    let (_, d1) = spectral_factors(0.5, [1.0, 1.0], 2.0, thm).unwrap();
    let rate = 2.0 * d1 * d1;
    assert!((1e-4 * f(1e-4) - rate).abs() < 1e-2 * rate);
    // homogenization: B drops out as ℓ → 0
    let g = |b: f64| cost_bound_ln(0.5, [1e-6, 1e-6], b, 1.0, thm, c).unwrap() + b;
    assert!((g(0.5) - g(5.0)).abs() < 1e-9);
    let single = |t: f64| cost_bound_single_ln(0.5, [1.0, 1.0], 2.0, t, 3.0).unwrap();
    assert!(((single(600.0) - single(400.0)) / 200.0 + 2.0).abs() < 0.01);
    assert!(cost_bound_single_ln(0.5, [1.0, 1.0], 2.0, -1.0, 3.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn one_mode_hum_hits_zero(l in 0.1f64..5.0, t in 0.05f64..5.0, u in -3.0f64..3.0) {
        prop_assume!(u.abs() > 1e-3);
        let r = hum_control(&one_mode(l, t, u), 1e-8).unwrap();
        prop_assert!(r.terminal_residual <= 1e-10);
    }

    #[test]
    fn cost_bound_decreasing_in_rho(r1 in 0.05f64..1.0, r2 in 0.05f64..1.0, t in 0.1f64..5.0) {
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        prop_assume!(hi - lo > 1e-6);
        let c = CostConstants::default();
        let a = cost_bound_ln(lo, [0.5, 0.5], 1.0, t, ThmConstants::Traced, c).unwrap();
        let b = cost_bound_ln(hi, [0.5, 0.5], 1.0, t, ThmConstants::Traced, c).unwrap();
        prop_assert!(b < a);
    }
}

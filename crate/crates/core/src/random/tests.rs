use super::*;
use crate::lattice::count_below;
use core::f64::consts::PI;
use proptest::prelude::*;

fn setup(l: f64, n: usize) -> TorusSetup {
    TorusSetup::new([l, l], PI / 4.0, [n, n]).unwrap()
}

fn bump() -> SiteProfile {
    SiteProfile::CantorDisk { radius: 0.5, levels: 2 }
}

const LAW: CouplingLaw = CouplingLaw::Uniform { lo: 0.0, hi: 2.0 };

#[test]
fn modulus_examples() {
    let unit = CouplingLaw::Uniform { lo: 0.0, hi: 1.0 };
    assert!((modulus_of_continuity(unit, 0.1).unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(modulus_of_continuity(LAW, 2.0).unwrap(), 1.0);
    assert_eq!(modulus_of_continuity(LAW, 5.0).unwrap(), 1.0);
    let s = modulus_of_continuity(LAW, 0.05).unwrap();
    assert!((modulus_of_continuity(LAW, 0.1).unwrap() - 2.0 * s).abs() < 1e-15);
    assert!(modulus_of_continuity(LAW, 0.0).is_err());
    assert!(modulus_of_continuity(CouplingLaw::Uniform { lo: 1.0, hi: 1.0 }, 0.1).is_err());
}

#[test]
fn fat_cantor_measure() {
    let n = 1_000_000;
    for levels in [0u32, 1, 2, 4, 6] {
        let hits = (0..n).filter(|i| fat_cantor_contains((*i as f64 + 0.5) / n as f64, levels)).count();
        let want = 0.5 + 0.5f64.powi(levels as i32 + 1);
        assert!((hits as f64 / n as f64 - want).abs() < 1e-4, "levels={levels}");
    }
    assert!(!fat_cantor_contains(0.5, 1) && fat_cantor_contains(0.0, 8) && fat_cantor_contains(1.0, 8));
    assert!(!fat_cantor_contains(1.5, 0));
}

#[test]
fn config_validation() {
    assert!(EnsembleConfig::new(setup(4.0, 24), bump(), LAW, 1).is_ok());
    let odd = TorusSetup::new([2.5, 2.5 * 4.0 / 2.5], PI / 4.0, [24, 24]);
    if let Ok(s) = odd {
        assert!(EnsembleConfig::new(s, bump(), LAW, 1).is_err());
    }
    assert!(EnsembleConfig::new(setup(4.0, 24), SiteProfile::CantorDisk { radius: 0.7, levels: 1 }, LAW, 1).is_err());
    assert!(EnsembleConfig::new(setup(4.0, 24), bump(), CouplingLaw::Uniform { lo: 1.0, hi: 0.0 }, 1).is_err());
    // a radius too small to hit any grid point leaves nothing to perturb
    let tiny = SiteProfile::CantorDisk { radius: 0.05, levels: 0 };
    let c = EnsembleConfig::new(setup(4.0, 24), tiny, LAW, 1);
    assert!(c.is_ok());
    let hollow = SiteProfile::CantorDisk { radius: 0.1, levels: 1 };
    assert!(EnsembleConfig::new(setup(4.0, 24), hollow, LAW, 1).is_err());
    let full = EnsembleConfig::new(setup(4.0, 24), SiteProfile::Cell, LAW, 1).unwrap();
    assert_eq!(full.support_density, 1.0);
}

#[test]
fn bump_is_sparse_and_disjoint() {
    let c = EnsembleConfig::new(setup(4.0, 24), bump(), LAW, 1).unwrap();
    // 6 points per unit length: offsets (±1/6, ±1/6) survive two Cantor steps
    let v = c.potential(&alloc::vec![1.0; 16]).unwrap();
    assert_eq!(v.iter().filter(|x| **x > 0.0).count(), 16 * 4);
    assert!(v.iter().all(|x| *x == 0.0 || *x == 1.0));
    assert!((c.support_density - 4.0 / 36.0).abs() < 1e-12);
    // one site on at a time never overlaps another
    for s in 0..16 {
        let mut w = alloc::vec![0.0; 16];
        w[s] = 1.0;
        assert_eq!(c.potential(&w).unwrap().iter().filter(|x| **x > 0.0).count(), 4);
    }
}

#[test]
fn operators_are_deterministic() {
    let c = EnsembleConfig::new(setup(4.0, 24), bump(), LAW, 7).unwrap();
    assert_eq!(c.couplings(3), c.couplings(3));
    assert_ne!(c.couplings(3), c.couplings(4));
    let a = sample_operator(&c, 5).unwrap();
    let b = sample_operator(&c, 5).unwrap();
    assert_eq!(a.potential(), b.potential());
    assert!(c.couplings(0).iter().all(|w| (0.0..2.0).contains(w)));
    let other = EnsembleConfig::new(setup(4.0, 24), bump(), LAW, 8).unwrap();
    assert_ne!(c.couplings(0), other.couplings(0));
}

#[test]
fn zero_and_constant_couplings() {
    let s = setup(4.0, 24);
    let clean = assemble(&s, None).unwrap();
    let c = EnsembleConfig::new(s, SiteProfile::Cell, LAW, 1).unwrap();
    let zero = assemble(&s, Some(&c.potential(&alloc::vec![0.0; 16]).unwrap())).unwrap();
    let m0 = 2.0;
    let shifted = assemble(&s, Some(&c.potential(&alloc::vec![m0; 16]).unwrap())).unwrap();
    for e in [0.5, 0.9, 2.0, 3.0, 5.0] {
        let n = count_below(&clean, e).unwrap();
        assert_eq!(count_below(&zero, e).unwrap(), n);
        assert_eq!(count_below(&shifted, e + m0).unwrap(), n);
    }
}

#[test]
fn window_count_examples() {
    let s = setup(4.0, 24);
    let clean = assemble(&s, None).unwrap();
    let b = s.b;
    // the lowest cluster holds N_φ = 2 states
    assert_eq!(eigen_count_window(&clean, b, 0.5 * b).unwrap(), 2);
    let c = EnsembleConfig::new(s, bump(), LAW, 3).unwrap();
    let op = sample_operator(&c, 0).unwrap();
    assert_eq!(eigen_count_window(&op, b + 0.1, 0.0).unwrap(), 0);
    // small disorder keeps the gap between the first two clusters open
    let weak = EnsembleConfig::new(s, bump(), CouplingLaw::Uniform { lo: 0.0, hi: 0.2 }, 3).unwrap();
    for t in 0..5 {
        let op = sample_operator(&weak, t).unwrap();
        assert_eq!(eigen_count_window(&op, 2.0 * b, 0.3 * b).unwrap(), 0);
        assert_eq!(count_below(&op, 2.0 * b).unwrap(), 2);
    }
    let counts = window_counts(&op, b + 0.1, &[0.0, 0.1, 0.5, 5.0]).unwrap();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(counts[1] as usize, eigen_count_window(&op, b + 0.1, 0.1).unwrap());
}

#[test]
fn sweep_statistics() {
    let c = EnsembleConfig::new(setup(4.0, 24), bump(), LAW, 11).unwrap();
    let eps = [0.02, 0.05, 0.1, 0.2];
    let e = c.setup.b + 0.12;
    let w = wegner_sweep(&c, e, &eps, 40).unwrap();
    assert_eq!(w.trials(), 40);
    assert!(w.mean.windows(2).all(|m| m[0] <= m[1]));
    // means and errors from the raw counts
    let col: Vec<f64> = w.counts.iter().map(|r| r[2] as f64).collect();
    assert!((w.mean[2] - mean(&col)).abs() < 1e-15 && (w.stderr[2] - std_error(&col)).abs() < 1e-15);
    assert!((w.s2eps[1] - 0.05).abs() < 1e-15);
    for k in 0..eps.len() {
        assert!(w.ratio(k) <= w.c_w_max * (1.0 + 1e-12));
    }
    assert_eq!(w, wegner_sweep(&c, e, &eps, 40).unwrap());
    assert!(wegner_sweep(&c, e, &eps, 0).is_err());
}

#[test]
fn box_exponent_fit() {
    let f = box_exponent(&[4.0, 8.0, 16.0], &[3.0, 12.0, 48.0]).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-12);
    assert!(box_exponent(&[4.0, 8.0], &[0.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn counts_are_nested(trial in 0u64..1000, e in 0.5f64..2.0) {
        let c = EnsembleConfig::new(setup(4.0, 12), SiteProfile::CantorDisk { radius: 0.5, levels: 1 }, LAW, 5).unwrap();
        let op = sample_operator(&c, trial).unwrap();
        let n = window_counts(&op, e, &[0.01, 0.1, 0.3, 1.0]).unwrap();
        prop_assert!(n.windows(2).all(|w| w[0] <= w[1]));
    }
}

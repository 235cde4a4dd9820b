//! Cross-module checks through the public API only.

use magbern_core::algebra::{bernstein_constant, BernsteinVariant};
use magbern_core::geometry::{thickness_scan, SetMask};
use magbern_core::inequality::{empirical_constant, theoretical_constant_ln, ThmConstants};
use magbern_core::landau::{bernstein_sum, l1_bernstein_sum, GridField, LevelCombination, LevelPart, QuadratureSpec};
use magbern_core::lattice::{assemble, eigensolve, Cutoff, EigenConfig, TorusSetup};
use magbern_core::Complex64 as C;
use proptest::prelude::*;

fn combination(b: f64, parts: &[(f64, f64, usize, f64, f64)]) -> LevelCombination {
    LevelCombination {
        b,
        parts: parts.iter().map(|&(y1, y2, k, re, im)| LevelPart { y: [y1, y2], k, coeff: C::new(re, im) }).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bernstein_sums_sit_below_both_constants(
        b in 0.5f64..2.0,
        parts in prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5, 0usize..=1, -1.0f64..1.0, -1.0f64..1.0), 1..=3),
    ) {
        let lc = combination(b, &parts);
        let norm = lc.norm_sqr();
        prop_assume!(norm > 1e-3);
        let sym = lc.to_symbolic();
        let f = GridField::sample(&sym, QuadratureSpec::for_field(b).grid_around(&sym.centers()).unwrap());
        let e = 3.0 * b;
        for m in 0..=2 {
            let l2 = bernstein_sum(&f, m, b, 1e-8).unwrap().value;
            prop_assert!((l2 - lc.fm_expectation(m)).abs() <= 1e-6 * l2);
            prop_assert!(l2 <= bernstein_constant(m, e, b, BernsteinVariant::L2).unwrap() * norm * (1.0 + 1e-6));
            let l1 = l1_bernstein_sum(&f, m, 1e-8).value;
            prop_assert!(l1 <= bernstein_constant(m, e, b, BernsteinVariant::L1).unwrap() * norm * (1.0 + 1e-6));
        }
    }
}

#[test]
fn lattice_constant_stays_below_traced_bound() {
    let s = TorusSetup::square_with_flux(2, 1.0, 24).unwrap();
    let op = assemble(&s, None).unwrap();
    let sub = eigensolve(&op, Cutoff::Count(2), &EigenConfig::default()).unwrap();
    for period in [4usize, 6, 8] {
        let mask = SetMask::on_torus(&s, |i1, i2| (i1 + 2 * i2) % period < period / 2).unwrap();
        let l = [period as f64 * s.h()[0], period as f64 * s.h()[1]];
        let rho = thickness_scan(&mask, l).unwrap().rho_lower;
        assert!(rho > 0.0);
        let emp = empirical_constant(&sub, &mask).unwrap();
        let traced = theoretical_constant_ln(1.0, 1.0, l, rho, ThmConstants::Traced).unwrap();
        assert!(emp >= 1.0 && emp.ln() <= traced, "period {period}: {emp} vs ln {traced}");
    }
}

#[test]
fn full_mask_has_unit_constant() {
    let s = TorusSetup::square_with_flux(2, 1.0, 12).unwrap();
    let op = assemble(&s, None).unwrap();
    let sub = eigensolve(&op, Cutoff::Count(2), &EigenConfig::default()).unwrap();
    let mask = SetMask::on_torus(&s, |_, _| true).unwrap();
    assert_eq!(thickness_scan(&mask, [1.0, 1.0]).unwrap().rho_lower, 1.0);
    assert!((empirical_constant(&sub, &mask).unwrap() - 1.0).abs() < 1e-10);
}

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MagneticOperator, TorusSetup};
use crate::error::{Error, Result};
use crate::linalg::{norm, HermitianOp};

type C = Complex64;

fn is_multiple_of_2pi(x: f64) -> bool {
    let q = x / (2.0 * PI);
    (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
}

/// `T_y` preserves the boundary conditions (and commutes with the clean
/// operator) iff `B y1 L2 ∈ 2πℤ` and `B y2 L1 ∈ 2πℤ`.
pub fn is_admissible(setup: &TorusSetup, steps: [i64; 2]) -> bool {
    let h = setup.h();
    let y = [steps[0] as f64 * h[0], steps[1] as f64 * h[1]];
    is_multiple_of_2pi(setup.b * y[0] * setup.l[1]) && is_multiple_of_2pi(setup.b * y[1] * setup.l[0])
}

/// Value of the magnetic-periodic extension at integer grid coordinates.
fn extended(setup: &TorusSetup, f: &[C], j1: i64, j2: i64) -> C {
    let (n1, n2) = (setup.n[0] as i64, setup.n[1] as i64);
    let q = j1.div_euclid(n1);
    let r1 = j1.rem_euclid(n1) as usize;
    let r2 = j2.rem_euclid(n2) as usize;
    let x2 = r2 as f64 * setup.h()[1];
    let v = f[r2 * setup.n[0] + r1];
    if q == 0 {
        v
    } else {
        v * C::from_polar(1.0, setup.b * q as f64 * setup.l[0] * x2)
    }
}

/// `(T_y f)(x) = e^{iB y1 x2} f(x − y)` for the lattice vector
/// `y = (s1 h1, s2 h2)`.
pub fn magnetic_translate(setup: &TorusSetup, f: &[C], steps: [i64; 2]) -> Result<Vec<C>> {
    if f.len() != setup.dim() {
        return Err(Error::invalid("vector length does not match the grid"));
    }
    let h = setup.h();
    let y1 = steps[0] as f64 * h[0];
    let n1 = setup.n[0];
    let mut out = alloc::vec![C::new(0.0, 0.0); f.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let (i1, i2) = ((idx % n1) as i64, (idx / n1) as i64);
        let x2 = i2 as f64 * h[1];
        *o = C::from_polar(1.0, setup.b * y1 * x2) * extended(setup, f, i1 - steps[0], i2 - steps[1]);
    }
    Ok(out)
}

/// `max_v ‖(H T − T H) v‖ / (‖H‖ ‖v‖)` over seeded random probes.
pub fn commutation_check(op: &MagneticOperator, steps: [i64; 2]) -> Result<f64> {
    let s = &op.setup;
    if !is_admissible(s, steps) {
        return Err(Error::invalid("translation violates the flux condition"));
    }
    let n = op.dim();
    let h = s.h();
    let hnorm = op.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs())) + 2.0 / (h[0] * h[0]) + 2.0 / (h[1] * h[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE ^ (steps[0] as u64) ^ ((steps[1] as u64) << 20));
    let mut worst: f64 = 0.0;
    let mut a = alloc::vec![C::new(0.0, 0.0); n];
    for _ in 0..4 {
        let v: Vec<C> = (0..n).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let tv = magnetic_translate(s, &v, steps)?;
        op.apply(&tv, &mut a);
        let htv = a.clone();
        op.apply(&v, &mut a);
        let thv = magnetic_translate(s, &a, steps)?;
        let d: Vec<C> = htv.iter().zip(&thv).map(|(x, y)| x - y).collect();
        worst = worst.max(norm(&d) / (hnorm * norm(&v)));
    }
    Ok(worst)
}

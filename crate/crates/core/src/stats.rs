//! Small statistics helpers: moments, least squares and the bootstrap.

use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `n − 1` denominator.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ a + b x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::invalid("need at least two paired points"));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("abscissae are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept, slope_stderr, r_squared })
}

/// Least squares through the origin, `y ≈ b x`.
pub fn proportional_fit(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::invalid("need paired points"));
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("abscissae are all zero"));
    }
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx)
}

/// Percentile interval of `stat` over `reps` resamples of the rows of
/// `samples`, each row a trial.
pub fn bootstrap_interval<T>(
    samples: &[T],
    reps: usize,
    level: f64,
    seed: u64,
    stat: impl Fn(&[&T]) -> f64,
) -> Result<(f64, f64)> {
    if samples.is_empty() || reps < 2 || !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("bootstrap needs samples, at least two replicates and a level in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = samples.len();
    let mut vals: Vec<f64> = Vec::with_capacity(reps);
    let mut pick: Vec<&T> = Vec::with_capacity(n);
    for _ in 0..reps {
        pick.clear();
        for _ in 0..n {
            pick.push(&samples[rng.random_range(0..n)]);
        }
        vals.push(stat(&pick));
    }
    vals.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (reps - 1) as f64;
        let (i, f) = (pos.floor() as usize, pos - pos.floor());
        if i + 1 < reps {
            vals[i] * (1.0 - f) + vals[i + 1] * f
        } else {
            vals[reps - 1]
        }
    };
    let a = 0.5 * (1.0 - level);
    Ok((q(a), q(1.0 - a)))
}

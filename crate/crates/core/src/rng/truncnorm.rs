use std::f64::consts::SQRT_2;

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{domain, Result};

use super::RngState;

/// Standardised lower bound above which the exponential-proposal rejection
/// sampler replaces inversion.
const TAIL_SWITCH: f64 = 4.0;

/// A draw from `N(mean, variance)` conditioned on `value > lower`.
pub fn truncated_normal_sample(
    mean: f64,
    variance: f64,
    lower: f64,
    rng: &mut RngState,
) -> Result<f64> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(domain(
            "truncated_normal_sample",
            format!("variance must be positive, got {variance}"),
        ));
    }
    if !mean.is_finite() || lower.is_nan() {
        return Err(domain(
            "truncated_normal_sample",
            "mean and lower bound must be finite",
        ));
    }
    Ok(truncated_normal_unchecked(mean, variance, lower, rng))
}

pub(crate) fn truncated_normal_unchecked(
    mean: f64,
    variance: f64,
    lower: f64,
    rng: &mut RngState,
) -> f64 {
    let sd = variance.sqrt();
    let a = (lower - mean) / sd;
    loop {
        let z = standard_tail(a, rng);
        let x = mean + sd * z;
        if x > lower {
            return x;
        }
    }
}

/// `Z ~ N(0, 1)` conditioned on `Z > a`.
fn standard_tail(a: f64, rng: &mut RngState) -> f64 {
    if a > TAIL_SWITCH {
        // exponential proposal with the optimal rate
        let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
        loop {
            let z = a + rng.standard_exponential() / lambda;
            let d = z - lambda;
            if rng.uniform().ln() <= -0.5 * d * d {
                return z;
            }
        }
    } else if a == f64::NEG_INFINITY {
        rng.standard_normal()
    } else {
        // P(Z > z) = U P(Z > a)  ⇔  erfc(z/√2) = U erfc(a/√2)
        let tail = erfc(a / SQRT_2);
        loop {
            let z = SQRT_2 * erfc_inv(rng.uniform() * tail);
            if z > a && z.is_finite() {
                return z;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn half_normal_mean() {
        let mut rng = RngState::new(1);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| truncated_normal_sample(0.0, 1.0, 0.0, &mut rng).unwrap())
            .collect();
        let (m, se) = mean_and_se(&xs);
        assert!(
            (m - (2.0 / std::f64::consts::PI).sqrt()).abs() < 4.0 * se,
            "{m}"
        );
    }

    #[test]
    fn negligible_truncation() {
        let mut rng = RngState::new(2);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| truncated_normal_sample(5.0, 0.01, 0.0, &mut rng).unwrap())
            .collect();
        let (m, se) = mean_and_se(&xs);
        assert!((m - 5.0).abs() < 4.0 * se);
    }

    #[test]
    fn far_tail_stays_in_support() {
        let mut rng = RngState::new(3);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| truncated_normal_sample(-10.0, 1.0, 0.0, &mut rng).unwrap())
            .collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        // E[Z | Z > a] ≈ a + 1/a for large a: mean of x ≈ 1/10 - 2/10^3 + ...
        let (m, _) = mean_and_se(&xs);
        assert!((m - 0.098).abs() < 0.005, "{m}");
    }

    #[test]
    fn inversion_matches_tail_sampler_near_switch() {
        // mean of Z | Z > a is φ(a) / Q(a); compare both branches around a = 4
        let mut rng = RngState::new(4);
        for a in [3.9_f64, 4.1] {
            let xs: Vec<f64> = (0..200_000).map(|_| standard_tail(a, &mut rng)).collect();
            let (m, se) = mean_and_se(&xs);
            let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let q = 0.5 * erfc(a / SQRT_2);
            assert!((m - phi / q).abs() < 4.0 * se, "a = {a}");
        }
    }

    #[test]
    fn rejects_nonpositive_variance() {
        let mut rng = RngState::new(0);
        assert!(truncated_normal_sample(0.0, 0.0, 0.0, &mut rng).is_err());
        assert!(truncated_normal_sample(0.0, -1.0, 0.0, &mut rng).is_err());
    }
}

use crate::error::{domain, Result};

use super::gamma::standard_gamma_log;
use super::truncnorm::truncated_normal_unchecked;
use super::RngState;

/// A draw from the density `∝ x^power exp(-a x² + b x)` on `x > 0`.
///
/// With `power = 0` this is a normal with mean `b/(2a)` and variance `1/(2a)`
/// truncated to `x > 0`. Otherwise the sampler rejects from one of two
/// envelopes anchored at the mode `x*`: the tangent of `power·ln x` at `x*`
/// gives a truncated-normal envelope, the tangent of `-a x²` gives a gamma
/// envelope. The one that keeps the larger share of the curvature at the
/// mode is used.
pub fn power_normal_sample(power: f64, a: f64, b: f64, rng: &mut RngState) -> Result<f64> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(domain(
            "power_normal_sample",
            format!("power must be nonnegative, got {power}"),
        ));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(domain(
            "power_normal_sample",
            format!("quadratic coefficient must be positive, got {a}"),
        ));
    }
    if !b.is_finite() {
        return Err(domain(
            "power_normal_sample",
            "linear coefficient must be finite",
        ));
    }
    Ok(power_normal_unchecked(power, a, b, rng))
}

pub(crate) fn power_normal_unchecked(power: f64, a: f64, b: f64, rng: &mut RngState) -> f64 {
    if power == 0.0 {
        return truncated_normal_unchecked(b / (2.0 * a), 0.5 / a, 0.0, rng);
    }
    let disc = (b * b + 8.0 * a * power).sqrt();
    // mode, written to avoid cancellation when b < 0
    let x_star = if b >= 0.0 {
        (b + disc) / (4.0 * a)
    } else {
        2.0 * power / (disc - b)
    };
    if 2.0 * a >= power / (x_star * x_star) {
        let slope = power / x_star;
        loop {
            let x = truncated_normal_unchecked((b + slope) / (2.0 * a), 0.5 / a, 0.0, rng);
            let log_accept = power * ((x / x_star).ln() - (x - x_star) / x_star);
            if rng.uniform().ln() <= log_accept {
                return x;
            }
        }
    } else {
        // 2 a x* - b, rewritten like the mode
        let rate = 0.5 * (disc - b);
        loop {
            let x = (standard_gamma_log(power + 1.0, rng) - rate.ln()).exp();
            let d = x - x_star;
            if rng.uniform().ln() <= -a * d * d {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mean and sd by trapezoid quadrature of the unnormalised log density.
    fn quadrature_moments(power: f64, a: f64, b: f64) -> (f64, f64) {
        let log_f = |x: f64| power * x.ln() - a * x * x + b * x;
        let n = 400_000;
        let hi = 60.0 / a.sqrt() + b.abs() / a + 10.0;
        let h = hi / n as f64;
        let xs: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
        let max = xs
            .iter()
            .map(|&x| log_f(x))
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = xs.iter().map(|&x| (log_f(x) - max).exp()).collect();
        let z: f64 = w.iter().sum();
        let m1: f64 = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / z;
        let m2: f64 = xs.iter().zip(&w).map(|(x, w)| x * x * w).sum::<f64>() / z;
        (m1, (m2 - m1 * m1).sqrt())
    }

    #[test]
    fn matches_quadrature_in_both_envelopes() {
        let cases = [
            (0.0, 1.0, 0.5),
            (3.0, 5.0, 1.0),   // normal envelope
            (15.0, 2.0, -8.0), // gamma envelope
            (200.0, 50.0, 80.0),
            (456.0, 300.0, -900.0),
            (1.0, 0.2, 0.0),
        ];
        for (i, (power, a, b)) in cases.into_iter().enumerate() {
            let mut rng = RngState::new(20 + i as u64);
            let n = 200_000;
            let xs: Vec<f64> = (0..n)
                .map(|_| power_normal_sample(power, a, b, &mut rng).unwrap())
                .collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let (want, sd) = quadrature_moments(power, a, b);
            let se = sd / (n as f64).sqrt();
            assert!((mean - want).abs() < 4.0 * se, "case {i}: {mean} vs {want}");
            assert!(xs.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        let mut rng = RngState::new(0);
        assert!(power_normal_sample(-1.0, 1.0, 0.0, &mut rng).is_err());
        assert!(power_normal_sample(1.0, 0.0, 0.0, &mut rng).is_err());
        assert!(power_normal_sample(1.0, 1.0, f64::NAN, &mut rng).is_err());
    }
}

//! Posterior summaries: moments, type-7 quantiles, batch-means MCSE and an
//! initial-positive-sequence effective sample size.

use serde::{Deserialize, Serialize};

use crate::chain::{ChainMeta, PosteriorSamples};
use crate::error::{Error, Result};

/// Below this many draws only moments and quantiles are reported.
pub const MIN_DRAWS_FOR_MCSE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub parameter: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q975: f64,
    pub mcse: Option<f64>,
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub parameters: Vec<ParameterSummary>,
    pub meta: ChainMeta,
}

impl SummaryReport {
    pub fn from_samples(samples: &PosteriorSamples) -> Result<Self> {
        let parameters = samples
            .names
            .iter()
            .enumerate()
            .map(|(j, name)| summarize(name, &samples.column(j)))
            .collect::<Result<_>>()?;
        Ok(Self {
            parameters,
            meta: samples.meta.clone(),
        })
    }
}

pub fn summarize(name: &str, draws: &[f64]) -> Result<ParameterSummary> {
    if draws.is_empty() {
        return Err(Error::Data(format!("no draws for {name}")));
    }
    if let Some(x) = draws.iter().find(|x| !x.is_finite()) {
        return Err(Error::Data(format!("non-finite draw {x} for {name}")));
    }
    let mean = mean(draws);
    let sd = if draws.len() > 1 {
        variance(draws, mean).sqrt()
    } else {
        0.0
    };
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mcse, ess) = if draws.len() >= MIN_DRAWS_FOR_MCSE {
        (
            Some(batch_means_mcse(draws)),
            Some(effective_sample_size(draws)),
        )
    } else {
        (None, None)
    };
    Ok(ParameterSummary {
        parameter: name.into(),
        mean,
        sd,
        q025: quantile_sorted(&sorted, 0.025),
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        q975: quantile_sorted(&sorted, 0.975),
        mcse,
        ess,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64], mean: f64) -> f64 {
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Linear interpolation between order statistics (type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Standard error of the mean from `⌈√S⌉` contiguous batches.
///
/// Trailing draws that do not fill a batch are dropped.
pub fn batch_means_mcse(draws: &[f64]) -> f64 {
    let n = draws.len();
    let batches = (n as f64).sqrt().ceil() as usize;
    let size = n / batches;
    if size == 0 || batches < 2 {
        return 0.0;
    }
    let means: Vec<f64> = (0..batches)
        .map(|b| mean(&draws[b * size..(b + 1) * size]))
        .collect();
    let grand = mean(&means);
    (variance(&means, grand) / batches as f64).sqrt()
}

/// `S / (1 + 2 Σ ρ_t)` with the autocorrelation sum cut at the first
/// non-positive pair sum `ρ_{2m} + ρ_{2m+1}`; clamped to `[1, S]`.
pub fn effective_sample_size(draws: &[f64]) -> f64 {
    let n = draws.len();
    let m = mean(draws);
    let centered: Vec<f64> = draws.iter().map(|x| x - m).collect();
    let gamma0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if gamma0 == 0.0 {
        return n as f64;
    }
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    // Γ_m = ρ_{2m} + ρ_{2m+1}; τ = -1 + 2 Σ_m Γ_m
    let mut sum_pairs = 0.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / gamma0;
        if pair <= 0.0 {
            break;
        }
        sum_pairs += pair;
        lag += 2;
    }
    let tau = (2.0 * sum_pairs - 1.0).max(1.0 / n as f64);
    (n as f64 / tau).clamp(1.0, n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    #[test]
    fn constant_draws() {
        let s = summarize("x", &[2.5; 50]).unwrap();
        assert_eq!(s.sd, 0.0);
        for q in [s.q025, s.q25, s.q50, s.q75, s.q975] {
            assert_eq!(q, 2.5);
        }
        assert_eq!(s.mcse, Some(0.0));
        assert_eq!(s.ess, Some(50.0));
    }

    #[test]
    fn short_input_reports_moments_only() {
        let s = summarize("x", &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.q50, 2.0);
        assert_eq!(s.mcse, None);
        assert_eq!(s.ess, None);
        assert!(summarize("x", &[]).is_err());
    }

    #[test]
    fn type7_quantiles() {
        let sorted = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&sorted, 0.5), 2.5);
        assert_eq!(quantile_sorted(&sorted, 0.25), 1.75);
        assert_eq!(quantile_sorted(&sorted, 1.0), 4.0);
    }

    #[test]
    fn iid_normal_ess_and_mcse() {
        let mut rng = RngState::new(21);
        let n = 10_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let s = summarize("z", &draws).unwrap();
        let ess = s.ess.unwrap();
        assert!((ess - n as f64).abs() <= 0.15 * n as f64, "ess {ess}");
        let mcse = s.mcse.unwrap();
        assert!((mcse - 0.01).abs() < 0.003, "mcse {mcse}");
    }

    #[test]
    fn ar1_ess_is_reduced() {
        let mut rng = RngState::new(3);
        let rho: f64 = 0.9;
        let mut x = 0.0;
        let draws: Vec<f64> = (0..20_000)
            .map(|_| {
                x = rho * x + (1.0 - rho * rho).sqrt() * rng.standard_normal();
                x
            })
            .collect();
        // theoretical S (1-ρ)/(1+ρ) ≈ 1053
        let ess = effective_sample_size(&draws);
        assert!(ess > 700.0 && ess < 1500.0, "ess {ess}");
    }
}

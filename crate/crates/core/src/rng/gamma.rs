use crate::error::{domain, Result};

use super::RngState;

/// `ln G` for `G ~ Gamma(shape, 1)`, by Marsaglia–Tsang.
///
/// For `shape < 1` the boost `G(shape) = G(shape + 1) U^{1/shape}` is applied
/// in log scale, so the result stays finite when `G` underflows.
pub(crate) fn standard_gamma_log(shape: f64, rng: &mut RngState) -> f64 {
    if shape < 1.0 {
        let boost = rng.uniform().ln() / shape;
        return standard_gamma_log(shape + 1.0, rng) + boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d.ln() + v.ln();
        }
        let ln_v = v.ln();
        if u.ln() < 0.5 * x2 + d * (1.0 - v + ln_v) {
            return d.ln() + ln_v;
        }
    }
}

fn check_gamma(shape: f64, rate: f64) -> Result<()> {
    if !(shape.is_finite() && shape > 0.0) {
        return Err(domain(
            "gamma_sample",
            format!("shape must be positive, got {shape}"),
        ));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(domain(
            "gamma_sample",
            format!("rate must be positive, got {rate}"),
        ));
    }
    Ok(())
}

/// A draw from the gamma distribution with the given shape and rate (mean `shape / rate`).
pub fn gamma_sample(shape: f64, rate: f64, rng: &mut RngState) -> Result<f64> {
    check_gamma(shape, rate)?;
    Ok((standard_gamma_log(shape, rng) - rate.ln()).exp())
}

/// The log of a gamma draw; finite even when the draw itself underflows.
pub fn gamma_log_sample(shape: f64, rate: f64, rng: &mut RngState) -> Result<f64> {
    check_gamma(shape, rate)?;
    Ok(standard_gamma_log(shape, rng) - rate.ln())
}

/// A Dirichlet draw carried in both linear and log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletDraw {
    pub p: Vec<f64>,
    pub log_p: Vec<f64>,
}

/// Dirichlet via normalised gamma draws, normalised in log scale.
pub fn dirichlet_log_sample(conc: &[f64], rng: &mut RngState) -> Result<DirichletDraw> {
    if conc.is_empty() {
        return Err(domain("dirichlet_log_sample", "empty concentration vector"));
    }
    if let Some(bad) = conc.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(domain(
            "dirichlet_log_sample",
            format!("concentrations must be positive, got {bad}"),
        ));
    }
    Ok(dirichlet_log_sample_unchecked(conc, rng))
}

pub(crate) fn dirichlet_log_sample_unchecked(conc: &[f64], rng: &mut RngState) -> DirichletDraw {
    let mut log_p: Vec<f64> = conc.iter().map(|&c| standard_gamma_log(c, rng)).collect();
    let max = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + log_p.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    for l in log_p.iter_mut() {
        *l -= lse;
    }
    let p = log_p.iter().map(|l| l.exp()).collect();
    DirichletDraw { p, log_p }
}

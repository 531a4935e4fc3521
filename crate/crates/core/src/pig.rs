//! The Pólya-inverse Gamma class P-IG(d, c).
//!
//! A P-IG(d, 0) variable has Laplace transform
//! `E[e^{-ω t²}] = ∏_k (1 + |t|/d_k) e^{-|t|/d_k}` and is the infinite sum of
//! independent `GIG(-3/2, 1/(√2 d_k), 0)` (reciprocal gamma) terms.
//! Exponential tilting by `e^{-c² ω / 2}` gives P-IG(d, c), the same sum with
//! every term tilted to `GIG(-3/2, 1/(√2 d_k), |c|)`.
//!
//! Sampling truncates the sum after `K_T` exact terms and adds the mean of
//! the discarded tail. Transform evaluation is done in log space throughout.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::gamma::standard_gamma_log;
use crate::rng::{gig_sample, GigParams, RngState};
use crate::special::{digamma_unchecked, log_gamma_unchecked, trigamma_unchecked, EULER_GAMMA};

/// Default lower bound on `d_k / k` accepted for explicit sequences.
pub const DEFAULT_GROWTH_FLOOR: f64 = 1e-3;

/// The sequence `d = (d_1, d_2, ...)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DRule {
    /// `d_k = k`.
    Integer,
    /// `d_k = a + k - 1` with `a > 0`.
    Shifted(f64),
    /// A finite sequence; terms past its end are absent.
    Explicit(Vec<f64>),
}

impl DRule {
    /// `d_k` for `k >= 1`, or `None` past the end of an explicit list.
    pub fn term(&self, k: usize) -> Option<f64> {
        debug_assert!(k >= 1);
        match self {
            DRule::Integer => Some(k as f64),
            DRule::Shifted(a) => Some(a + k as f64 - 1.0),
            DRule::Explicit(d) => d.get(k - 1).copied(),
        }
    }

    /// Offset `s` with `d_k = k + s` for the arithmetic rules.
    fn offset(&self) -> Option<f64> {
        match self {
            DRule::Integer => Some(0.0),
            DRule::Shifted(a) => Some(a - 1.0),
            DRule::Explicit(_) => None,
        }
    }
}

/// One member of the P-IG(d, c) class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PigParams {
    rule: DRule,
    tilt: f64,
}

impl PigParams {
    pub fn new(rule: DRule, tilt: f64) -> Result<Self> {
        Self::with_growth_floor(rule, tilt, DEFAULT_GROWTH_FLOOR)
    }

    /// Like [`PigParams::new`], with an explicit floor `ε` for the
    /// `d_k >= ε k` check on explicit sequences.
    pub fn with_growth_floor(rule: DRule, tilt: f64, floor: f64) -> Result<Self> {
        if !tilt.is_finite() {
            return Err(domain(
                "PigParams",
                format!("tilt must be finite, got {tilt}"),
            ));
        }
        match &rule {
            DRule::Integer => {}
            DRule::Shifted(a) => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(domain(
                        "PigParams",
                        format!("shift must be positive, got {a}"),
                    ));
                }
            }
            DRule::Explicit(d) => {
                if d.is_empty() {
                    return Err(domain("PigParams", "explicit sequence is empty"));
                }
                if !(floor.is_finite() && floor > 0.0) {
                    return Err(domain(
                        "PigParams",
                        format!("growth floor must be positive, got {floor}"),
                    ));
                }
                for (i, &dk) in d.iter().enumerate() {
                    let k = (i + 1) as f64;
                    if !(dk.is_finite() && dk > 0.0) {
                        return Err(domain(
                            "PigParams",
                            format!("d_{} = {dk} is not positive", i + 1),
                        ));
                    }
                    if dk < floor * k {
                        return Err(domain(
                            "PigParams",
                            format!("d_{} = {dk} grows slower than {floor}·k", i + 1),
                        ));
                    }
                }
            }
        }
        Ok(Self { rule, tilt })
    }

    /// `d_k = k` with tilt `c`.
    pub fn integer(tilt: f64) -> Result<Self> {
        Self::new(DRule::Integer, tilt)
    }

    pub fn rule(&self) -> &DRule {
        &self.rule
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    /// The GIG law of the `k`-th summand, `GIG(-3/2, 1/(√2 d_k), |c|)`.
    pub fn term_law(&self, k: usize) -> Option<GigParams> {
        self.rule.term(k).map(|d| {
            GigParams::new(-1.5, FRAC_1_SQRT_2 / d, self.tilt.abs()).expect("valid by construction")
        })
    }
}

/// Truncation settings for [`pig_sample`] and [`pig_tail_mean_summed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PigSamplerConfig {
    /// Number of series terms drawn exactly.
    pub trunc_terms: usize,
    /// Last index summed term by term in the numeric tail.
    pub tail_horizon: usize,
}

impl PigSamplerConfig {
    pub const GIBBS: Self = Self {
        trunc_terms: 200,
        tail_horizon: 1_000_000,
    };
    pub const VALIDATION: Self = Self {
        trunc_terms: 1000,
        tail_horizon: 1_000_000,
    };

    pub fn new(trunc_terms: usize, tail_horizon: usize) -> Result<Self> {
        let config = Self {
            trunc_terms,
            tail_horizon,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_trunc(trunc_terms: usize) -> Result<Self> {
        Self::new(trunc_terms, Self::GIBBS.tail_horizon.max(trunc_terms))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trunc_terms < 1 {
            return Err(Error::Config("trunc_terms must be at least 1".into()));
        }
        if self.tail_horizon < self.trunc_terms {
            return Err(Error::Config(format!(
                "tail_horizon ({}) must be at least trunc_terms ({})",
                self.tail_horizon, self.trunc_terms
            )));
        }
        Ok(())
    }
}

impl Default for PigSamplerConfig {
    fn default() -> Self {
        Self::GIBBS
    }
}

/// `(u, v) = (√(t² + c²/2), |c|/√2)`.
fn transform_args(tilt: f64, t: f64) -> (f64, f64) {
    let v = tilt.abs() * FRAC_1_SQRT_2;
    ((t * t + v * v).sqrt(), v)
}

/// Log of the truncated product form of the Laplace transform,
/// `Σ_{k<=terms} [ln((d_k + u)/(d_k + v)) - (u - v)/d_k]`.
pub fn log_pig_laplace_product(params: &PigParams, t: f64, terms: usize) -> f64 {
    let (u, v) = transform_args(params.tilt, t);
    let du = u - v;
    let mut acc = 0.0;
    for k in 1..=terms {
        let Some(d) = params.rule.term(k) else { break };
        acc += (du / (d + v)).ln_1p() - du / d;
    }
    acc
}

/// The transform `E[e^{-ω t²}]` from the first `terms` factors of its product form.
pub fn pig_laplace_product(params: &PigParams, t: f64, terms: usize) -> f64 {
    log_pig_laplace_product(params, t, terms).exp()
}

/// `ln G_a(x)`, where `G_a(x) = ∏_{k>=1} (1 + x/(a+k-1)) e^{-x/(a+k-1)}
/// = e^{ψ(a) x} Γ(a) / Γ(a + x)`.
fn log_hadamard(a: f64, x: f64) -> f64 {
    if a == 1.0 {
        -EULER_GAMMA * x - log_gamma_unchecked(1.0 + x)
    } else {
        digamma_unchecked(a) * x + log_gamma_unchecked(a) - log_gamma_unchecked(a + x)
    }
}

/// Log of the closed-form transform; see [`pig_laplace_closed`].
pub fn log_pig_laplace_closed(params: &PigParams, t: f64) -> Result<f64> {
    let a = match params.rule {
        DRule::Integer => 1.0,
        DRule::Shifted(a) => a,
        DRule::Explicit(_) => return Err(Error::UnsupportedRule),
    };
    let (u, v) = transform_args(params.tilt, t);
    Ok(log_hadamard(a, u) - log_hadamard(a, v))
}

/// Closed-form transform `G_a(u) / G_a(v)` for the arithmetic rules, with
/// `u = √(t² + c²/2)`, `v = |c|/√2`; `a = 1` for the Integer rule.
pub fn pig_laplace_closed(params: &PigParams, t: f64) -> Result<f64> {
    log_pig_laplace_closed(params, t).map(f64::exp)
}

/// `Γ(a) / Γ(a + t)`, the exponential reciprocal gamma transform evaluated as a formula.
///
/// For `a = 1` this is `1/Γ(1 + t)`, which is not itself a Laplace transform
/// of a probability law (it exceeds 1 for `t ∈ (0, 1)`); the P-IG transform
/// for `d_k = k` carries the extra factor `e^{-γ t}`.
pub fn erg_laplace(a: f64, t: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(domain(
            "erg_laplace",
            format!("a must be positive, got {a}"),
        ));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain(
            "erg_laplace",
            format!("t must be nonnegative, got {t}"),
        ));
    }
    Ok((log_gamma_unchecked(a) - log_gamma_unchecked(a + t)).exp())
}

/// Mean of the `k`-th summand, `δ_k² / (1 + δ_k |c|)` with `δ_k = 1/(√2 d_k)`;
/// zero past the end of an explicit sequence.
pub fn gig_term_mean(params: &PigParams, k: usize) -> f64 {
    match params.rule.term(k) {
        Some(d) => {
            let delta = FRAC_1_SQRT_2 / d;
            delta * delta / (1.0 + delta * params.tilt.abs())
        }
        None => 0.0,
    }
}

/// Mean of the discarded tail `Σ_{k > K_T} E[term_k]`.
///
/// For the arithmetic rules the term means telescope: with `d_k = k + s` and
/// `c' = |c|/√2`, `E[term_k] = 1/(2 d_k (d_k + c'))`, so the tail equals
/// `(ψ(K_T + 1 + s + c') - ψ(K_T + 1 + s)) / (2c')`, or `ψ'(K_T + 1 + s)/2`
/// at `c = 0`. Explicit sequences use [`pig_tail_mean_summed`].
pub fn pig_tail_mean(params: &PigParams, config: &PigSamplerConfig) -> f64 {
    match params.rule.offset() {
        Some(s) => {
            let start = config.trunc_terms as f64 + 1.0 + s;
            let cp = params.tilt.abs() * FRAC_1_SQRT_2;
            // below this tilt the digamma difference loses digits; use the
            // first-order expansion ψ'(x)/2 + c' ψ''(x)/4
            if cp < 1e-5 {
                let h = 1e-3;
                let tetragamma =
                    (trigamma_unchecked(start + h) - trigamma_unchecked(start - h)) / (2.0 * h);
                0.5 * trigamma_unchecked(start) + 0.25 * cp * tetragamma
            } else {
                (digamma_unchecked(start + cp) - digamma_unchecked(start)) / (2.0 * cp)
            }
        }
        None => pig_tail_mean_summed(params, config),
    }
}

/// Tail mean by direct summation of term means up to `tail_horizon`, plus a
/// remainder for `k > tail_horizon`: the midpoint integral for the arithmetic
/// rules, the remaining entries for explicit sequences.
pub fn pig_tail_mean_summed(params: &PigParams, config: &PigSamplerConfig) -> f64 {
    let head = config.trunc_terms + 1;
    let horizon = config.tail_horizon;
    // sum small terms first
    let mut sum = 0.0;
    for k in (head..=horizon).rev() {
        sum += gig_term_mean(params, k);
    }
    let remainder = match (&params.rule, params.rule.offset()) {
        (_, Some(s)) => {
            let x = horizon as f64 + 0.5 + s;
            let cp = params.tilt.abs() * FRAC_1_SQRT_2;
            if cp == 0.0 {
                0.5 / x
            } else {
                (cp / x).ln_1p() / (2.0 * cp)
            }
        }
        (DRule::Explicit(d), None) => (horizon + 1..=d.len())
            .rev()
            .map(|k| gig_term_mean(params, k))
            .sum(),
        _ => unreachable!(),
    };
    sum + remainder
}

/// A P-IG(d, c) draw: `K_T` exact GIG terms plus the tail mean.
pub fn pig_sample(params: &PigParams, config: &PigSamplerConfig, rng: &mut RngState) -> f64 {
    let tilt = params.tilt.abs();
    let mut sum = 0.0;
    for k in 1..=config.trunc_terms {
        let Some(d) = params.rule.term(k) else { break };
        if tilt == 0.0 {
            // reciprocal gamma RΓ(3/2, 1/(4 d²))
            sum += (-(4.0 * d * d).ln() - standard_gamma_log(1.5, rng)).exp();
        } else {
            let law = GigParams::new(-1.5, FRAC_1_SQRT_2 / d, tilt).expect("valid by construction");
            sum += gig_sample(&law, rng);
        }
    }
    sum + pig_tail_mean(params, config)
}

/// Tilt `c = √2 |t|` that turns the factor `e^{-t² ω}` into P-IG(d, c).
pub fn tilt_for_shift(t: f64) -> f64 {
    SQRT_2 * t.abs()
}

//! Gibbs sampling for the shape `α` of a gamma likelihood with known rate
//! `β`, under the prior `p(α | a, b, c) ∝ a^{α-1} β^{cα} / Γ(α)^b`.
//!
//! For data `y_1..y_n` the posterior keeps the prior's form with
//! `a' = a ∏ y_i`, `b' = b + n`, `c' = c + n`:
//! `p(α | y) ∝ (β'_y)^α / Γ(α)^{b'}` with `β'_y = a' β^{c'}`. Each of the
//! `b'` factors `1/Γ(α)` is augmented with one P-IG auxiliary.
//!
//! * [`ShapeAugmentation::Unshifted`] writes
//!   `1/Γ(α) = α e^{γα} E[e^{-w α²}]`, so `w_j | α ~ P-IG(d, √2 α)` and
//!   `α | w ∝ α^{b'} exp((γ b' + ln β'_y) α - S α²)` with `S = Σ w_j`. Exact
//!   for every `α > 0`; the default.
//! * [`ShapeAugmentation::Shifted`] works with `α̃ = α - 1` and writes
//!   `1/Γ(α̃ + 1) = e^{γα̃} E[e^{-w α̃²}]`, giving `w_j ~ P-IG(d, √2 |α̃|)` and
//!   `α̃ ~ N((γ b' + ln β'_y)/(2S), 1/(2S))` truncated to `α̃ > -1`. The
//!   transform identity only holds for `α̃ >= 0`, so this chain is exact
//!   only when the posterior puts no mass below `α = 1`.

use serde::{Deserialize, Serialize};

use crate::chain::{chain_stream, ChainConfig, ChainMeta, PosteriorSamples, Stopwatch};
use crate::error::{domain, Error, Result};
use crate::pig::{pig_sample, PigParams, PigSamplerConfig};
use crate::quadrature::GridDensity;
use crate::rng::power_normal::power_normal_unchecked;
use crate::rng::truncnorm::truncated_normal_unchecked;
use crate::rng::RngState;
use crate::special::{log_gamma_unchecked, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaShapePrior {
    pub a: f64,
    pub b: u32,
    pub c: f64,
    /// Known rate of the gamma likelihood.
    pub beta: f64,
}

impl GammaShapePrior {
    pub fn new(a: f64, b: u32, c: f64, beta: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(domain(
                "GammaShapePrior",
                format!("a must be positive, got {a}"),
            ));
        }
        if !c.is_finite() {
            return Err(domain("GammaShapePrior", "c must be finite"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(domain(
                "GammaShapePrior",
                format!("beta must be positive, got {beta}"),
            ));
        }
        Ok(Self { a, b, c, beta })
    }
}

/// Posterior hyperparameters, all in log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeHyper {
    pub log_a: f64,
    pub b: u64,
    pub c: f64,
    pub log_beta_y: f64,
}

impl ShapeHyper {
    /// `α ln β'_y - b' ln Γ(α)`, the log posterior up to a constant.
    pub fn log_posterior(&self, alpha: f64) -> f64 {
        if !(alpha > 0.0) {
            return f64::NEG_INFINITY;
        }
        alpha * self.log_beta_y - self.b as f64 * log_gamma_unchecked(alpha)
    }
}

pub fn shape_hyper(y: &[f64], prior: &GammaShapePrior) -> Result<ShapeHyper> {
    if y.is_empty() {
        return Err(Error::Data("no observations".into()));
    }
    if let Some((i, v)) = y
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(Error::Data(format!(
            "observation {} is {v}, not positive",
            i + 1
        )));
    }
    let n = y.len();
    // sorted so that any permutation of y gives the same bits
    let mut logs: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    logs.sort_by(f64::total_cmp);
    let log_a = prior.a.ln() + logs.iter().sum::<f64>();
    let c = prior.c + n as f64;
    Ok(ShapeHyper {
        log_a,
        b: prior.b as u64 + n as u64,
        c,
        log_beta_y: log_a + c * prior.beta.ln(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ShapeAugmentation {
    /// Augment `1/Γ(α)` directly; exact for all `α > 0`.
    #[default]
    Unshifted,
    /// Augment `1/Γ(α̃ + 1)` with `α̃ = α - 1` and a truncated-normal update.
    Shifted,
}

impl ShapeAugmentation {
    pub fn name(self) -> &'static str {
        match self {
            ShapeAugmentation::Unshifted => "unshifted",
            ShapeAugmentation::Shifted => "shifted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaShapeChainState {
    /// `α - 1`.
    pub alpha_tilde: f64,
    pub w: Vec<f64>,
}

impl GammaShapeChainState {
    pub fn alpha(&self) -> f64 {
        self.alpha_tilde + 1.0
    }

    pub fn check_invariants(&self) -> Result<()> {
        if !(self.alpha_tilde.is_finite() && self.alpha_tilde > -1.0) {
            return Err(domain(
                "GammaShapeChainState",
                format!("alpha_tilde {} <= -1", self.alpha_tilde),
            ));
        }
        if let Some(w) = self.w.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(domain(
                "GammaShapeChainState",
                format!("w {w} is not positive"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShapeGibbs {
    hyper: ShapeHyper,
    augmentation: ShapeAugmentation,
    pig: PigSamplerConfig,
}

impl ShapeGibbs {
    pub fn new(
        hyper: ShapeHyper,
        augmentation: ShapeAugmentation,
        pig: PigSamplerConfig,
    ) -> Result<Self> {
        if hyper.b == 0 {
            return Err(Error::Config("b' must be at least 1".into()));
        }
        pig.validate()?;
        Ok(Self {
            hyper,
            augmentation,
            pig,
        })
    }

    pub fn hyper(&self) -> &ShapeHyper {
        &self.hyper
    }

    /// `α̃ = max(ȳβ - 1, -1/2)`, then one `w` pass.
    pub fn initial_state(
        &self,
        y_mean: f64,
        beta: f64,
        rng: &mut RngState,
    ) -> GammaShapeChainState {
        let mut state = GammaShapeChainState {
            alpha_tilde: (y_mean * beta - 1.0).max(-0.5),
            w: vec![1.0; self.hyper.b as usize],
        };
        self.update_w_shape(&mut state, rng);
        state
    }

    pub fn w_tilt(&self, alpha_tilde: f64) -> f64 {
        let shift = match self.augmentation {
            ShapeAugmentation::Unshifted => alpha_tilde + 1.0,
            ShapeAugmentation::Shifted => alpha_tilde,
        };
        std::f64::consts::SQRT_2 * shift.abs()
    }

    /// Redraw all `b'` auxiliaries.
    pub fn update_w_shape(&self, state: &mut GammaShapeChainState, rng: &mut RngState) {
        let params = PigParams::integer(self.w_tilt(state.alpha_tilde)).expect("finite tilt");
        for w in state.w.iter_mut() {
            *w = pig_sample(&params, &self.pig, rng);
        }
    }

    /// `(mean, variance)` of the truncated normal for `α̃` under the shifted scheme.
    pub fn shifted_conditional(&self, w_sum: f64) -> (f64, f64) {
        let b = self.hyper.b as f64;
        (
            (EULER_GAMMA * b + self.hyper.log_beta_y) / (2.0 * w_sum),
            0.5 / w_sum,
        )
    }

    pub fn update_alpha_shape(&self, state: &mut GammaShapeChainState, rng: &mut RngState) {
        let s: f64 = state.w.iter().sum();
        let b = self.hyper.b as f64;
        state.alpha_tilde = match self.augmentation {
            ShapeAugmentation::Shifted => {
                let (mean, var) = self.shifted_conditional(s);
                truncated_normal_unchecked(mean, var, -1.0, rng)
            }
            ShapeAugmentation::Unshifted => {
                let alpha =
                    power_normal_unchecked(b, s, EULER_GAMMA * b + self.hyper.log_beta_y, rng);
                alpha - 1.0
            }
        };
    }

    pub fn run(
        &self,
        y_mean: f64,
        beta: f64,
        config: &ChainConfig,
        mut rng: RngState,
    ) -> Result<PosteriorSamples> {
        config.validate()?;
        let clock = Stopwatch::start();
        let meta = ChainMeta::new("gamma-shape", self.augmentation.name(), config);
        let mut out = PosteriorSamples::new(vec!["alpha".into()], meta);
        let mut state = self.initial_state(y_mean, beta, &mut rng);
        let check_every = if cfg!(debug_assertions) { 1 } else { 100 };
        for iter in 1..=config.iterations {
            self.update_alpha_shape(&mut state, &mut rng);
            self.update_w_shape(&mut state, &mut rng);
            if iter % check_every == 0 {
                state.check_invariants()?;
            }
            if config.keeps(iter) {
                out.push(iter, vec![state.alpha()]);
            }
        }
        state.check_invariants()?;
        out.meta.wall_time_secs = clock.secs();
        Ok(out)
    }
}

/// One chain under the default augmentation, on stream 0 of `config.seed`.
pub fn run_shape_chain(
    y: &[f64],
    prior: &GammaShapePrior,
    config: &ChainConfig,
) -> Result<PosteriorSamples> {
    run_shape_chain_with(y, prior, config, ShapeAugmentation::default())
}

pub fn run_shape_chain_with(
    y: &[f64],
    prior: &GammaShapePrior,
    config: &ChainConfig,
    augmentation: ShapeAugmentation,
) -> Result<PosteriorSamples> {
    let hyper = shape_hyper(y, prior)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    ShapeGibbs::new(hyper, augmentation, config.pig_config)?.run(
        mean,
        prior.beta,
        config,
        chain_stream(config.seed, 0),
    )
}

/// Normalised posterior of `α` on `grid`.
pub fn shape_posterior_quadrature(
    y: &[f64],
    prior: &GammaShapePrior,
    grid: &[f64],
) -> Result<GridDensity> {
    let hyper = shape_hyper(y, prior)?;
    GridDensity::from_log_fn(grid, |a| hyper.log_posterior(a))
}

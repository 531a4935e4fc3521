//! Gibbs samplers for the concentration vector `α` of a multinomial-Dirichlet
//! model, with a shared-`α` variant, posterior-predictive simplex draws and
//! a grid oracle over the exact marginal posterior.
//!
//! Unit `m` contributes
//! `Γ(Σα)/Γ(Σα + n_m•) ∏_k Γ(n_mk + α_k)/Γ(α_k)` to the likelihood. Two
//! augmentations turn the `α` conditional into a closed form:
//!
//! * [`Augmentation::PriorNormalizer`] integrates `p_m` back in, writes
//!   `Γ(Σα)` as a gamma integral over `η_m` and
//!   `1/Γ(α_k) = α_k e^{γ α_k} E[e^{-w α_k²}]` with `w ~ P-IG(d, 0)`, `d_k = k`.
//!   Then `w_mk | α ~ P-IG(d, √2 α_k)`, `η_m | α ~ Γ(Σα, 1)` and
//!   `α_k ∝ α_k^M exp(-a α_k² + b α_k)` on `α_k > 0`. This is the default.
//! * [`Augmentation::PosteriorNormalizer`] tilts by `n_mk + α_k - 1` and draws
//!   `η_m ~ Γ(Σα + n_m•, 1)` and `α_k ~ TN(b/2a, 1/2a)` with
//!   `b = -2Σ_m (n_mk - 1) w_mk + Σ_m ln η_m + Mγ + Σ_m ln p_mk`. These are
//!   the conditionals of `π(α) ∏_m Dir(p_m | n_m + α)` times the auxiliaries,
//!   so the `α` marginal of this chain is the prior `π(α)`, whatever the
//!   counts. Kept for comparison.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::chain::{chain_stream, ChainConfig, ChainMeta, PosteriorSamples, Stopwatch};
use crate::error::{domain, Error, Result};
use crate::pig::{pig_sample, PigParams, PigSamplerConfig};
use crate::quadrature::{trapezoid, GridDensity};
use crate::rng::gamma::{dirichlet_log_sample_unchecked, standard_gamma_log};
use crate::rng::power_normal::power_normal_unchecked;
use crate::rng::truncnorm::truncated_normal_unchecked;
use crate::rng::RngState;
use crate::special::{log_gamma, log_gamma_unchecked, EULER_GAMMA};

/// Counts `n_mk` for `M` units over `K` categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountMatrix {
    counts: Vec<Vec<u64>>,
    unit_labels: Vec<String>,
    category_labels: Vec<String>,
    row_sums: Vec<u64>,
}

impl CountMatrix {
    /// Rejects ragged rows, label mismatches and rows that sum to zero.
    pub fn new(
        counts: Vec<Vec<u64>>,
        unit_labels: Vec<String>,
        category_labels: Vec<String>,
    ) -> Result<Self> {
        let k = category_labels.len();
        if k == 0 {
            return Err(Error::Data("at least one category is required".into()));
        }
        if unit_labels.len() != counts.len() {
            return Err(Error::Data(format!(
                "{} unit labels for {} rows",
                unit_labels.len(),
                counts.len()
            )));
        }
        let mut row_sums = Vec::with_capacity(counts.len());
        for (row, label) in counts.iter().zip(&unit_labels) {
            if row.len() != k {
                return Err(Error::Data(format!(
                    "unit {label} has {} counts, expected {k}",
                    row.len()
                )));
            }
            let s: u64 = row.iter().sum();
            if s == 0 {
                return Err(Error::Data(format!("unit {label} has no counts")));
            }
            row_sums.push(s);
        }
        Ok(Self {
            counts,
            unit_labels,
            category_labels,
            row_sums,
        })
    }

    /// Unlabelled units `unit_1..` and categories `alpha_1..`.
    pub fn from_rows(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.first().map_or(0, |r| r.len());
        let units = (1..=counts.len()).map(|m| format!("unit_{m}")).collect();
        let cats = (1..=k).map(|j| format!("category_{j}")).collect();
        Self::new(counts, units, cats)
    }

    pub fn n_units(&self) -> usize {
        self.counts.len()
    }

    pub fn n_categories(&self) -> usize {
        self.category_labels.len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row(&self, m: usize) -> &[u64] {
        &self.counts[m]
    }

    pub fn row_sum(&self, m: usize) -> u64 {
        self.row_sums[m]
    }

    pub fn unit_labels(&self) -> &[String] {
        &self.unit_labels
    }

    pub fn category_labels(&self) -> &[String] {
        &self.category_labels
    }

    /// The same data with categories reordered by `perm`.
    pub fn permute_categories(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_categories()];
        if perm.len() != seen.len()
            || perm
                .iter()
                .any(|&j| j >= seen.len() || std::mem::replace(&mut seen[j], true))
        {
            return Err(Error::Data("not a permutation of the categories".into()));
        }
        let counts = self
            .counts
            .iter()
            .map(|r| perm.iter().map(|&j| r[j]).collect())
            .collect();
        let cats = perm
            .iter()
            .map(|&j| self.category_labels[j].clone())
            .collect();
        Self::new(counts, self.unit_labels.clone(), cats)
    }
}

/// Half-normal prior `α_k ~ N(0, τ_k²)` truncated to `α_k > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPrior {
    tau: Vec<f64>,
}

impl AlphaPrior {
    pub fn shared(tau: f64) -> Result<Self> {
        Self::per_category(vec![tau])
    }

    pub fn per_category(tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(domain("AlphaPrior", "no scale given"));
        }
        if let Some(t) = tau.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(domain(
                "AlphaPrior",
                format!("tau must be positive, got {t}"),
            ));
        }
        Ok(Self { tau })
    }

    /// The shared prior whose mean is `mean`, i.e. `τ = mean·√(π/2)`.
    pub fn from_mean(mean: f64) -> Result<Self> {
        Self::shared(mean * (0.5 * PI).sqrt())
    }

    /// Prior mean `1/K`.
    pub fn default_for(categories: usize) -> Result<Self> {
        if categories == 0 {
            return Err(domain("AlphaPrior", "no categories"));
        }
        Self::from_mean(1.0 / categories as f64)
    }

    pub fn is_shared(&self) -> bool {
        self.tau.len() == 1
    }

    pub fn tau(&self, k: usize) -> f64 {
        if self.is_shared() {
            self.tau[0]
        } else {
            self.tau[k]
        }
    }

    pub fn taus(&self) -> &[f64] {
        &self.tau
    }

    /// `√(2/π)·τ_k`.
    pub fn prior_mean(&self, k: usize) -> f64 {
        FRAC_2_PI.sqrt() * self.tau(k)
    }

    /// `-α²/(2τ_k²)`, the log prior up to a constant.
    pub fn log_density(&self, k: usize, alpha: f64) -> f64 {
        let t = self.tau(k);
        -alpha * alpha / (2.0 * t * t)
    }

    fn check(&self, categories: usize, homogeneous: bool) -> Result<()> {
        if homogeneous && !self.is_shared() {
            return Err(Error::Config(
                "a shared concentration needs a single tau".into(),
            ));
        }
        if !self.is_shared() && self.tau.len() != categories {
            return Err(Error::Config(format!(
                "{} tau values for {categories} categories",
                self.tau.len()
            )));
        }
        Ok(())
    }
}

/// Which normaliser the auxiliary variables augment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Augmentation {
    /// Augment `Γ(Σα)/∏Γ(α_k)`; exact for the marginal posterior of `α`.
    #[default]
    PriorNormalizer,
    /// Augment with tilts `n_mk + α_k - 1` and `η_m ~ Γ(Σα + n_m•)`.
    PosteriorNormalizer,
}

impl Augmentation {
    pub fn name(self) -> &'static str {
        match self {
            Augmentation::PriorNormalizer => "prior-normalizer",
            Augmentation::PosteriorNormalizer => "posterior-normalizer",
        }
    }
}

/// Current `(α, p, w, η)`; `p` and `η` are held in log scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletChainState {
    pub alpha: Vec<f64>,
    pub log_p: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub log_eta: Vec<f64>,
}

impl DirichletChainState {
    pub fn eta(&self) -> Vec<f64> {
        self.log_eta.iter().map(|l| l.exp()).collect()
    }

    pub fn check_invariants(&self) -> Result<()> {
        let bad = |detail: String| Err(domain("DirichletChainState", detail));
        if let Some(a) = self.alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return bad(format!("alpha {a} is not positive"));
        }
        if let Some(l) = self.log_eta.iter().find(|l| !l.is_finite()) {
            return bad(format!("log eta {l} is not finite"));
        }
        for (m, (row, wrow)) in self.log_p.iter().zip(&self.w).enumerate() {
            let s: f64 = row.iter().map(|l| l.exp()).sum();
            if (s - 1.0).abs() > 1e-10 || row.iter().any(|l| l.is_nan()) {
                return bad(format!("row {m} of p sums to {s}"));
            }
            if let Some(w) = wrow.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return bad(format!("w {w} in row {m} is not positive"));
            }
        }
        Ok(())
    }
}

/// Coefficients of the `α` conditional `∝ α^power exp(-a α² + b α)` on `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaConditional {
    pub power: f64,
    pub a: f64,
    pub b: f64,
}

/// `ln[Γ(Σα)/Γ(Σα + n•) ∏_k Γ(n_k + α_k)/Γ(α_k)]`, the multinomial coefficient dropped.
pub fn marginal_log_likelihood(n: &[u64], alpha: &[f64]) -> Result<f64> {
    if n.len() != alpha.len() {
        return Err(domain(
            "marginal_log_likelihood",
            "counts and alpha differ in length",
        ));
    }
    let mut total = 0.0;
    let mut acc = 0.0;
    let mut n_total = 0u64;
    for (&nk, &ak) in n.iter().zip(alpha) {
        if !(ak.is_finite() && ak > 0.0) {
            return Err(domain(
                "marginal_log_likelihood",
                format!("alpha must be positive, got {ak}"),
            ));
        }
        total += ak;
        n_total += nk;
        if nk > 0 {
            acc += log_gamma_unchecked(nk as f64 + ak) - log_gamma_unchecked(ak);
        }
    }
    if n_total > 0 {
        acc += log_gamma(total)? - log_gamma(total + n_total as f64)?;
    }
    Ok(acc)
}

/// One model plus the choices that define a sampler for it.
#[derive(Debug, Clone)]
pub struct DirichletGibbs<'a> {
    counts: &'a CountMatrix,
    prior: &'a AlphaPrior,
    augmentation: Augmentation,
    homogeneous: bool,
    pig: PigSamplerConfig,
}

impl<'a> DirichletGibbs<'a> {
    pub fn new(
        counts: &'a CountMatrix,
        prior: &'a AlphaPrior,
        augmentation: Augmentation,
        homogeneous: bool,
        pig: PigSamplerConfig,
    ) -> Result<Self> {
        if counts.n_units() == 0 {
            return Err(Error::Data(
                "no units: the posterior would be the prior".into(),
            ));
        }
        prior.check(counts.n_categories(), homogeneous)?;
        pig.validate()?;
        Ok(Self {
            counts,
            prior,
            augmentation,
            homogeneous,
            pig,
        })
    }

    pub fn augmentation(&self) -> Augmentation {
        self.augmentation
    }

    /// `α` at its prior mean, `p` at smoothed proportions `(n + ½)/(n• + K/2)`,
    /// then one `w` pass and one `η` pass.
    pub fn initial_state(&self, rng: &mut RngState) -> DirichletChainState {
        let (m_units, k_cats) = (self.counts.n_units(), self.counts.n_categories());
        let alpha = (0..k_cats).map(|k| self.prior.prior_mean(k)).collect();
        let log_p = (0..m_units)
            .map(|m| {
                let denom = (self.counts.row_sum(m) as f64 + 0.5 * k_cats as f64).ln();
                self.counts
                    .row(m)
                    .iter()
                    .map(|&n| (n as f64 + 0.5).ln() - denom)
                    .collect()
            })
            .collect();
        let mut state = DirichletChainState {
            alpha,
            log_p,
            w: vec![vec![1.0; k_cats]; m_units],
            log_eta: vec![0.0; m_units],
        };
        self.update_w(&mut state, rng);
        self.update_eta(&mut state, rng);
        state
    }

    /// `η_m ~ Γ(Σα + n_m•, 1)`, or `Γ(Σα, 1)` under the prior-normalizer scheme.
    pub fn update_eta(&self, state: &mut DirichletChainState, rng: &mut RngState) {
        let total: f64 = state.alpha.iter().sum();
        for m in 0..self.counts.n_units() {
            let shape = match self.augmentation {
                Augmentation::PosteriorNormalizer => total + self.counts.row_sum(m) as f64,
                Augmentation::PriorNormalizer => total,
            };
            state.log_eta[m] = standard_gamma_log(shape, rng);
        }
    }

    /// P-IG tilt of `w_mk` for the current `α`.
    pub fn w_tilt(&self, m: usize, k: usize, alpha: &[f64]) -> f64 {
        let shift = match self.augmentation {
            Augmentation::PosteriorNormalizer => self.counts.row(m)[k] as f64 + alpha[k] - 1.0,
            Augmentation::PriorNormalizer => alpha[k],
        };
        std::f64::consts::SQRT_2 * shift.abs()
    }

    /// Redraw every `w_mk`; returns whether some `n_mk + α_k - 1` was negative.
    pub fn update_w(&self, state: &mut DirichletChainState, rng: &mut RngState) -> bool {
        let mut negative = false;
        for m in 0..self.counts.n_units() {
            for k in 0..self.counts.n_categories() {
                negative |= (self.counts.row(m)[k] as f64) + state.alpha[k] - 1.0 < 0.0;
                let params =
                    PigParams::integer(self.w_tilt(m, k, &state.alpha)).expect("finite tilt");
                state.w[m][k] = pig_sample(&params, &self.pig, rng);
            }
        }
        negative
    }

    /// `p_m ~ Dirichlet(n_m + α)`.
    pub fn update_p(&self, state: &mut DirichletChainState, rng: &mut RngState) {
        for m in 0..self.counts.n_units() {
            let conc: Vec<f64> = self
                .counts
                .row(m)
                .iter()
                .zip(&state.alpha)
                .map(|(&n, &a)| n as f64 + a)
                .collect();
            state.log_p[m] = dirichlet_log_sample_unchecked(&conc, rng).log_p;
        }
    }

    /// Conditional coefficients for each `α_k`, or a single entry when `α` is shared.
    pub fn alpha_conditionals(&self, state: &DirichletChainState) -> Vec<AlphaConditional> {
        let (m_units, k_cats) = (self.counts.n_units(), self.counts.n_categories());
        let sum_log_eta: f64 = state.log_eta.iter().sum();
        let per_category = |k: usize| {
            let mut a = 0.0;
            let mut b = sum_log_eta + m_units as f64 * EULER_GAMMA;
            for m in 0..m_units {
                let w = state.w[m][k];
                a += w;
                b += state.log_p[m][k];
                if self.augmentation == Augmentation::PosteriorNormalizer {
                    b -= 2.0 * (self.counts.row(m)[k] as f64 - 1.0) * w;
                }
            }
            (a, b)
        };
        let power_per_unit = match self.augmentation {
            Augmentation::PriorNormalizer => 1.0,
            Augmentation::PosteriorNormalizer => 0.0,
        };
        if self.homogeneous {
            let (mut a, mut b) = (0.0, 0.0);
            for k in 0..k_cats {
                let (ak, bk) = per_category(k);
                a += ak;
                b += bk;
            }
            let t = self.prior.tau(0);
            vec![AlphaConditional {
                power: power_per_unit * (m_units * k_cats) as f64,
                a: a + 1.0 / (2.0 * t * t),
                b,
            }]
        } else {
            (0..k_cats)
                .map(|k| {
                    let (a, b) = per_category(k);
                    let t = self.prior.tau(k);
                    AlphaConditional {
                        power: power_per_unit * m_units as f64,
                        a: a + 1.0 / (2.0 * t * t),
                        b,
                    }
                })
                .collect()
        }
    }

    pub fn update_alpha(&self, state: &mut DirichletChainState, rng: &mut RngState) {
        let conds = self.alpha_conditionals(state);
        let draws: Vec<f64> = conds
            .iter()
            .map(|c| match self.augmentation {
                Augmentation::PosteriorNormalizer => {
                    truncated_normal_unchecked(c.b / (2.0 * c.a), 0.5 / c.a, 0.0, rng)
                }
                Augmentation::PriorNormalizer => power_normal_unchecked(c.power, c.a, c.b, rng),
            })
            .collect();
        if self.homogeneous {
            state.alpha.iter_mut().for_each(|a| *a = draws[0]);
        } else {
            state.alpha = draws;
        }
    }

    /// `η`, `w`, `p`, `α` in that order; returns the negative-shift flag from the `w` pass.
    pub fn gibbs_sweep(&self, state: &mut DirichletChainState, rng: &mut RngState) -> bool {
        self.update_eta(state, rng);
        let negative = self.update_w(state, rng);
        self.update_p(state, rng);
        self.update_alpha(state, rng);
        negative
    }

    /// Run one chain on `rng`.
    pub fn run(&self, config: &ChainConfig, mut rng: RngState) -> Result<PosteriorSamples> {
        config.validate()?;
        let clock = Stopwatch::start();
        let names = if self.homogeneous {
            vec!["alpha".to_string()]
        } else {
            (1..=self.counts.n_categories())
                .map(|k| format!("alpha_{k}"))
                .collect()
        };
        let mut meta = ChainMeta::new("dirichlet", self.augmentation.name(), config);
        meta.homogeneous = self.homogeneous;
        let mut out = PosteriorSamples::new(names, meta);
        let mut state = self.initial_state(&mut rng);
        let check_every = if cfg!(debug_assertions) { 1 } else { 100 };
        let mut negative_sweeps = 0;
        for iter in 1..=config.iterations {
            if self.gibbs_sweep(&mut state, &mut rng) {
                negative_sweeps += 1;
            }
            if iter % check_every == 0 {
                state.check_invariants()?;
            }
            if config.keeps(iter) {
                let row = if self.homogeneous {
                    vec![state.alpha[0]]
                } else {
                    state.alpha.clone()
                };
                out.push(iter, row);
            }
        }
        state.check_invariants()?;
        out.meta.negative_shift_sweeps = Some(negative_sweeps);
        out.meta.wall_time_secs = clock.secs();
        Ok(out)
    }
}

/// One chain under the default augmentation, on stream 0 of `config.seed`.
pub fn run_chain(
    counts: &CountMatrix,
    prior: &AlphaPrior,
    config: &ChainConfig,
) -> Result<PosteriorSamples> {
    run_chain_with(counts, prior, config, Augmentation::default())
}

pub fn run_chain_with(
    counts: &CountMatrix,
    prior: &AlphaPrior,
    config: &ChainConfig,
    augmentation: Augmentation,
) -> Result<PosteriorSamples> {
    DirichletGibbs::new(
        counts,
        prior,
        augmentation,
        config.homogeneous,
        config.pig_config,
    )?
    .run(config, chain_stream(config.seed, 0))
}

/// [`run_chain`] with one concentration shared by every category.
pub fn run_chain_homogeneous(
    counts: &CountMatrix,
    prior: &AlphaPrior,
    config: &ChainConfig,
) -> Result<PosteriorSamples> {
    let config = ChainConfig {
        homogeneous: true,
        ..*config
    };
    run_chain(counts, prior, &config)
}

/// Unnormalised log posterior of a shared concentration `α`.
pub fn log_posterior_homogeneous(counts: &CountMatrix, prior: &AlphaPrior, alpha: f64) -> f64 {
    if !(alpha > 0.0) {
        return f64::NEG_INFINITY;
    }
    let alphas = vec![alpha; counts.n_categories()];
    let ll: f64 = counts
        .counts()
        .iter()
        .map(|n| marginal_log_likelihood(n, &alphas).expect("positive alpha"))
        .sum();
    ll + prior.log_density(0, alpha)
}

/// Normalised posterior of a shared concentration on `grid`.
pub fn quadrature_posterior(
    counts: &CountMatrix,
    prior: &AlphaPrior,
    grid: &[f64],
) -> Result<GridDensity> {
    if !prior.is_shared() {
        return Err(Error::Config("the grid oracle needs a shared tau".into()));
    }
    GridDensity::from_log_fn(grid, |a| log_posterior_homogeneous(counts, prior, a))
}

/// Marginal posteriors of `α_1` and `α_2` for two-category data, from the
/// joint posterior on `grid × grid`.
pub fn quadrature_pair_marginals(
    counts: &CountMatrix,
    prior: &AlphaPrior,
    grid: &[f64],
) -> Result<[GridDensity; 2]> {
    if counts.n_categories() != 2 {
        return Err(Error::Config(
            "pair marginals need exactly two categories".into(),
        ));
    }
    prior.check(2, false)?;
    let n = grid.len();
    let mut log_joint = vec![vec![0.0; n]; n];
    let mut peak = f64::NEG_INFINITY;
    for (i, &a1) in grid.iter().enumerate() {
        for (j, &a2) in grid.iter().enumerate() {
            let alpha = [a1, a2];
            let ll: f64 = counts
                .counts()
                .iter()
                .map(|row| marginal_log_likelihood(row, &alpha))
                .sum::<Result<f64>>()?;
            let v = ll + prior.log_density(0, a1) + prior.log_density(1, a2);
            log_joint[i][j] = v;
            peak = peak.max(v);
        }
    }
    let marginal = |first: bool| -> Result<GridDensity> {
        let log_m: Vec<f64> = (0..n)
            .map(|i| {
                let slice: Vec<f64> = (0..n)
                    .map(|j| {
                        let v = if first {
                            log_joint[i][j]
                        } else {
                            log_joint[j][i]
                        };
                        (v - peak).exp()
                    })
                    .collect();
                trapezoid(grid, &slice).ln()
            })
            .collect();
        GridDensity::from_log_density(grid, &log_m)
    };
    Ok([marginal(true)?, marginal(false)?])
}

/// `draws_per_sample` simplex draws from `Dirichlet(α^(s))` for every retained `α^(s)`.
///
/// A single-column (shared) sample is expanded to `categories` equal entries.
pub fn posterior_predictive(
    samples: &PosteriorSamples,
    categories: usize,
    draws_per_sample: usize,
    rng: &mut RngState,
) -> Result<Vec<Vec<f64>>> {
    if samples.is_empty() {
        return Err(Error::Data("no posterior samples".into()));
    }
    if categories < 2 {
        return Err(Error::Config(
            "the simplex needs at least two categories".into(),
        ));
    }
    let width = samples.n_params();
    if width != categories && width != 1 {
        return Err(Error::Data(format!(
            "samples have {width} columns but {categories} categories were requested"
        )));
    }
    let mut out = Vec::with_capacity(samples.len() * draws_per_sample);
    for row in &samples.draws {
        let conc: Vec<f64> = if width == 1 {
            vec![row[0]; categories]
        } else {
            row.clone()
        };
        if let Some(a) = conc.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Data(format!("concentration {a} is not positive")));
        }
        for _ in 0..draws_per_sample {
            out.push(dirichlet_log_sample_unchecked(&conc, rng).p);
        }
    }
    Ok(out)
}

//! Pólya-inverse Gamma (P-IG) random variates and the parameter-expanded
//! Gibbs samplers they enable: Dirichlet concentration inference for
//! multinomial-Dirichlet count data, and gamma shape inference.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`]: log-gamma, digamma, trigamma and `ln K_ν`.
//! * [`rng`]: the pinned generator and exact gamma, Dirichlet, truncated
//!   normal, GIG and power-weighted normal samplers.
//! * [`pig`]: the P-IG(d, c) class, its Laplace transforms and the
//!   truncated-convolution sampler.
//! * [`quadrature`]: grid normalisation, moments and KS distance.
//! * [`dirichlet`]: concentration samplers and their grid oracle.
//! * [`gamma_shape`]: the gamma shape sampler and its grid oracle.
//! * [`chain`]: chain configuration and multi-chain plumbing.
//! * [`summary`]: posterior summaries with batch-means MCSE and ESS.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod dirichlet;
pub mod error;
pub mod gamma_shape;
pub mod pig;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod summary;

pub use chain::{ChainConfig, ChainMeta, PosteriorSamples};
pub use dirichlet::{
    AlphaConditional, AlphaPrior, Augmentation, CountMatrix, DirichletChainState, DirichletGibbs,
};
pub use error::{Error, Result};
pub use gamma_shape::{
    GammaShapeChainState, GammaShapePrior, ShapeAugmentation, ShapeGibbs, ShapeHyper,
};
pub use pig::{DRule, PigParams, PigSamplerConfig};
pub use quadrature::GridDensity;
pub use rng::{GigParams, RngState};
pub use special::EULER_GAMMA;
pub use summary::{ParameterSummary, SummaryReport};

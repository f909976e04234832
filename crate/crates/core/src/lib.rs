//! Pricing workbench for vanilla and barrier options under the two-factor
//! Bergomi stochastic-volatility model.
//!
//! The crate has three layers:
//!
//! * closed forms and model state ([`analytic`], [`curve`], [`model`]) —
//!   Black-Scholes formulas, the forward-variance curve and the instantaneous
//!   variance of the two-factor model;
//! * the unsupervised solver ([`autodiff`], [`net`], [`sampler`], [`loss`],
//!   [`trainer`]) — networks with payoff-matched singular terms trained to
//!   satisfy the pricing PDE and its boundary conditions;
//! * benchmarks and reporting ([`mc`], [`report`], [`config`]) — Monte Carlo
//!   reference engines and the evaluation/export machinery behind the CLI.

pub mod analytic;
pub mod autodiff;
pub mod config;
pub mod curve;
pub mod error;
pub mod loss;
pub mod mc;
pub mod model;
pub mod net;
pub mod report;
pub mod sampler;
pub mod trainer;

pub use analytic::{bs_barrier, bs_digital, bs_vanilla, norm_cdf, norm_cdf_approx, BsInputs, OptionKind};
pub use curve::ForwardVarianceCurve;
pub use error::{Error, Result};
pub use model::{BergomiParams, ParamPoint};

//! Secure key rate of measurement-device-independent continuous-variable
//! QKD links that share their fiber with classical DWDM traffic.
//!
//! Noise from spontaneous Raman scattering, four-wave mixing and linear
//! crosstalk is converted to excess noise on each relay segment, folded into
//! an equivalent one-way Gaussian channel, and evaluated with the
//! Devetak-Winter rate against collective attacks.

// `!(x > 0.0)` is how validation rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel_plan;
pub mod config;
pub mod error;
pub mod noise;
#[cfg(feature = "cli")]
pub mod run;
pub mod scenario;
pub mod security;
pub mod units;

pub use channel_plan::{build_configuration, enumerate_fwm_triples, ChannelPlan, FwmTriple};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use noise::{NoiseBudget, RamanTable};
pub use scenario::{max_distance, rate_at, sweep, LinkScenario, SweepResult};
pub use security::{key_fraction, CovarianceState, EquivalentChannel, ProtocolParams, RateBreakdown};

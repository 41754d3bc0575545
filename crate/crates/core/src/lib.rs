//! Monte Carlo simulator for opportunistic network decoupling (OND) in the
//! `K x N x K` two-hop channel with interfering relays.
//!
//! The pipeline for one block is: [`channel::generate_realization`] draws
//! Rayleigh gains, [`selection::select`] picks the relay sets from local
//! interference metrics, and [`protocol::evaluate`] turns the resulting
//! SINRs into a decode-and-forward sum rate. [`analysis`] holds the
//! distribution and scaling-law machinery and [`harness`] runs sweeps and
//! writes CSV/JSON results.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the harness uses.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod protocol;
pub mod scalar;
pub mod selection;

pub use channel::{derive_seed, generate_realization, Convention, Scheme, SystemConfig};
pub use error::{Error, Result};
pub use metrics::MetricKind;
pub use scalar::Scalar;
pub use selection::Assignment;

pub type Realization = channel::ChannelRealization<f64>;
pub type Realization32 = channel::ChannelRealization<f32>;
pub type Table = metrics::MetricTable<f64>;
pub type Sinrs = protocol::SinrReport<f64>;
pub type Rates = protocol::RateReport<f64>;

//! Simulation laboratory for stochastic order-book models of price
//! fluctuations: five market models on an integer tick grid, estimators for
//! the statistics they produce, and a reproducible experiment runner.

pub mod book;
pub mod error;
pub mod models;
pub mod par;
pub mod path;
pub mod rng;
pub mod runner;
pub mod stats;

pub use book::{Book, Order, Side};
pub use error::{BookError, ConfigError, RunError, StatsError};
pub use path::{OrderEvent, PricePath, RemovalCause, Trade};
pub use rng::RngStream;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

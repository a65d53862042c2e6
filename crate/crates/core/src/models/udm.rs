//! Uniform deposition on a bounded segment with evaporation.
//!
//! Same event classes and probabilities as the adjacent-deposition model, but
//! a new limit order lands uniformly on `S = {-L/2, ..., L/2 - 1}` minus the
//! price tick, and its side follows from where it landed: above the price it
//! is an ask, below it a bid.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::models::maslov::{validate_event_params, EventMarket, Placement};
use crate::models::record;
use crate::path::{OrderEvent, PricePath};
use crate::rng::RngStream;

pub use crate::models::maslov::Event;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UdmConfig {
    /// Segment length `L`.
    pub length: i64,
    pub q: f64,
    pub n_bar: f64,
    pub steps: u64,
    pub burn_in: u64,
}

impl UdmConfig {
    pub fn new(length: i64, q: f64, n_bar: f64) -> Self {
        Self {
            length,
            q,
            n_bar,
            steps: 0,
            burn_in: Self::default_burn_in(q, n_bar),
        }
    }

    /// `10 / (1 - q) * N̄` steps.
    pub fn default_burn_in(q: f64, n_bar: f64) -> u64 {
        (10.0 / (1.0 - q) * n_bar).ceil() as u64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.length < 4 || self.length % 2 != 0 {
            return Err(ConfigError::invariant("length", "segment length L must be even and at least 4"));
        }
        validate_event_params(self.q, self.n_bar)
    }

    /// Lowest and highest tick of the segment.
    pub fn segment(&self) -> (i64, i64) {
        (-self.length / 2, self.length / 2 - 1)
    }
}

/// Empty book, price at the segment centre (0).
pub fn new_market(config: &UdmConfig) -> EventMarket {
    EventMarket::new(
        config.q,
        config.n_bar,
        None,
        Placement::Uniform {
            length: config.length,
        },
    )
}

pub fn run(config: &UdmConfig, rng: &mut RngStream) -> PricePath {
    let mut market = new_market(config);
    record(&mut market, rng, config.burn_in, config.steps, 1)
}

pub fn run_logged(config: &UdmConfig, rng: &mut RngStream) -> (PricePath, Vec<OrderEvent>) {
    let mut market = new_market(config);
    for _ in 0..config.burn_in {
        market.step(rng);
    }
    market.enable_event_log();
    let path = record(&mut market, rng, 0, config.steps, 1);
    (path, market.event_log())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::book::Side;

    fn bid_share(length: i64, price: i64, draws: usize) -> f64 {
        let cfg = UdmConfig::new(length, 0.5, 10.0);
        let mut rng = RngStream::new(17);
        let mut bids = 0;
        let mut deposits = 0;
        while deposits < draws {
            let mut m = new_market(&cfg);
            m.price = price;
            if let Event::Deposit(o) = m.step(&mut rng) {
                let (lo, hi) = cfg.segment();
                assert!(o.price >= lo && o.price <= hi && o.price != price);
                assert_eq!(o.side == Side::Ask, o.price > price);
                deposits += 1;
                if o.side == Side::Bid {
                    bids += 1;
                }
            }
        }
        bids as f64 / draws as f64
    }

    #[test]
    fn centre_price_splits_sides_by_tick_count() {
        // S = {-5..4}; price -1 leaves 4 ticks below and 5 above.
        let share = bid_share(10, -1, 200_000);
        assert!((share - 4.0 / 9.0).abs() < 0.005, "{share}");
    }

    #[test]
    fn left_edge_price_only_asks() {
        assert_eq!(bid_share(8, -4, 5_000), 0.0);
    }

    #[test]
    fn off_centre_bid_fraction() {
        // L = 8, S = {-4..3}, price 1: 5 of the 7 other ticks lie below.
        let share = bid_share(8, 1, 200_000);
        assert!((share - 5.0 / 7.0).abs() < 0.005, "{share}");
    }

    #[test]
    fn price_never_leaves_segment() {
        let mut cfg = UdmConfig::new(64, 0.8, 20.0);
        cfg.burn_in = 0;
        let mut m = new_market(&cfg);
        let mut rng = RngStream::new(4);
        for _ in 0..200_000 {
            m.step(&mut rng);
            assert!((-32..32).contains(&m.price));
            if let (Some(b), Some(a)) = (m.book.best_bid(), m.book.best_ask()) {
                assert!(b < a);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(UdmConfig::new(7, 0.5, 10.0).validate().is_err());
        assert!(UdmConfig::new(2, 0.5, 10.0).validate().is_err());
        assert!(UdmConfig::new(8, 1.0, 10.0).validate().is_err());
        assert!(UdmConfig::new(8, 0.9, 10.0).validate().is_ok());
    }
}

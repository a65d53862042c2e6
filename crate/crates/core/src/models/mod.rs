//! The six order-book models and the shared recording loop.

pub mod bps;
pub mod genoa;
pub mod maslov;
pub mod stigler;
pub mod udm;

use crate::path::{PricePath, Trade};
use crate::rng::RngStream;

/// A market that advances by elementary updates.
pub trait Market {
    fn price(&self) -> i64;

    /// Performs one elementary update; returns `true` when a trade happened.
    fn advance(&mut self, rng: &mut RngStream) -> bool;

    /// Elementary updates performed so far.
    fn updates(&self) -> u64;

    /// Best bid and best ask (highest bid-type and lowest ask-type position).
    fn quotes(&self) -> (Option<i64>, Option<i64>);

    /// Model time per elementary update.
    fn time_unit(&self) -> f64 {
        1.0
    }
}

/// Checks the strict bid-below-ask ordering.
pub fn quotes_ordered(quotes: (Option<i64>, Option<i64>)) -> bool {
    match quotes {
        (Some(b), Some(a)) => b < a,
        _ => true,
    }
}

/// Runs `burn_in` discarded updates, then `steps` recorded ones.
pub fn record<M: Market>(
    market: &mut M,
    rng: &mut RngStream,
    burn_in: u64,
    steps: u64,
    stride: u64,
) -> PricePath {
    record_with(market, rng, burn_in, steps, stride, |_| {})
}

/// Like [`record`], calling `observe` after every recorded update.
pub fn record_with<M: Market>(
    market: &mut M,
    rng: &mut RngStream,
    burn_in: u64,
    steps: u64,
    stride: u64,
    mut observe: impl FnMut(&M),
) -> PricePath {
    assert!(stride >= 1, "stride must be positive");
    for _ in 0..burn_in {
        market.advance(rng);
    }
    let mut x = Vec::with_capacity((steps / stride) as usize + 1);
    x.push(market.price());
    let mut trades = Vec::new();
    let start_step = market.updates();
    for k in 1..=steps {
        let before = market.price();
        if market.advance(rng) {
            let price = market.price();
            trades.push(Trade {
                step: market.updates(),
                price,
                ret: price - before,
            });
        }
        debug_assert!(quotes_ordered(market.quotes()), "crossed book");
        observe(market);
        if k % stride == 0 {
            x.push(market.price());
        }
    }
    PricePath {
        x,
        start_step,
        stride,
        time_unit: market.time_unit(),
        trades,
    }
}

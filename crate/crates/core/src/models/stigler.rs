//! Aging-order market with random deposition.
//!
//! Each step the order deposited `N` steps ago is dropped, then one new order
//! of a random side is placed. In the bounded variant its tick is uniform on
//! `1..=L`; in the free variant it is uniform on a width-`d` window whose
//! centre sits `s` ticks below (bids) or above (asks) the current price. A new
//! order that reaches the best opposite quote trades against it at the quote.

use serde::{Deserialize, Serialize};

use crate::book::{Book, Order, Side};
use crate::error::ConfigError;
use crate::models::{record, Market};
use crate::path::PricePath;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum StiglerVariant {
    /// Prices confined to `1..=length`.
    Bounded { length: i64 },
    /// Unbounded log-price axis with a deposition window of `width` ticks
    /// shifted by `shift` from the price.
    Free { shift: i64, width: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiglerConfig {
    #[serde(flatten)]
    pub variant: StiglerVariant,
    /// Order lifetime `N`, which is also the book capacity.
    pub lifetime: u64,
    pub steps: u64,
    pub burn_in: u64,
}

impl StiglerConfig {
    pub fn bounded(length: i64, lifetime: u64) -> Self {
        Self {
            variant: StiglerVariant::Bounded { length },
            lifetime,
            steps: 0,
            burn_in: 10 * lifetime,
        }
    }

    pub fn free(shift: i64, width: i64, lifetime: u64) -> Self {
        Self {
            variant: StiglerVariant::Free { shift, width },
            lifetime,
            steps: 0,
            burn_in: 10 * lifetime,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lifetime < 1 {
            return Err(ConfigError::invariant("lifetime", "order lifetime N must be at least 1"));
        }
        match self.variant {
            StiglerVariant::Bounded { length } if length < 2 => Err(ConfigError::invariant(
                "length",
                "price range L must be at least 2",
            )),
            StiglerVariant::Free { shift, width } => {
                if width < 1 {
                    Err(ConfigError::invariant("width", "window width d must be at least 1"))
                } else if shift < 0 {
                    Err(ConfigError::invariant("shift", "shift s must be non-negative"))
                } else if width < 2 * shift {
                    Err(ConfigError::invariant(
                        "width",
                        format!("need d >= 2s for any trade to happen (d={width}, s={shift})"),
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Inclusive tick range of the free-variant deposition window.
///
/// Bids satisfy `x - s - d/2 < c <= x - s + d/2`, asks
/// `x + s - d/2 <= c < x + s + d/2`, with `d/2` taken as a real number, so
/// both windows hold exactly `d` ticks for even and odd `d` alike.
pub fn free_window(price: i64, shift: i64, width: i64, side: Side) -> (i64, i64) {
    let half = width / 2;
    let odd = width % 2;
    match side {
        Side::Bid => {
            let centre = price - shift;
            (centre - half + 1 - odd, centre + half)
        }
        Side::Ask => {
            let centre = price + shift;
            (centre - half, centre + half - 1 + odd)
        }
    }
}

/// Rests `order` or matches it against the best opposite quote. Returns the
/// new price on a trade; the incoming order never rests when it trades.
pub(crate) fn place_or_match(book: &mut Book, order: Order) -> Option<(i64, Order)> {
    let opposite = order.side.opposite();
    let crosses = match (order.side, book.best(opposite)) {
        (Side::Bid, Some(ask)) => order.price >= ask,
        (Side::Ask, Some(bid)) => order.price <= bid,
        _ => false,
    };
    if crosses {
        let resting = book
            .remove_best(opposite)
            .expect("crossing implies a resting quote");
        Some((resting.price, resting))
    } else {
        book.insert(order);
        None
    }
}

#[derive(Debug, Clone)]
pub struct StiglerState {
    pub book: Book,
    pub price: i64,
    /// Steps performed; the next deposited order is born at this step.
    pub t: u64,
    variant: StiglerVariant,
    lifetime: u64,
}

impl StiglerState {
    /// Empty book; price `L/2` (bounded) or 0 (free).
    pub fn new(config: &StiglerConfig) -> Self {
        let price = match config.variant {
            StiglerVariant::Bounded { length } => length / 2,
            StiglerVariant::Free { .. } => 0,
        };
        Self {
            book: Book::with_aging(),
            price,
            t: 0,
            variant: config.variant,
            lifetime: config.lifetime,
        }
    }

    /// Expire, deposit, match. Returns the trade price if one happened.
    pub fn step(&mut self, rng: &mut RngStream) -> Option<i64> {
        let variant = self.variant;
        self.step_in(rng, |price, side, rng| match variant {
            StiglerVariant::Bounded { length } => rng.uniform_int(1, length),
            StiglerVariant::Free { shift, width } => {
                let (lo, hi) = free_window(price, shift, width, side);
                rng.uniform_int(lo, hi)
            }
        })
    }

    /// The step with a caller-chosen deposition rule.
    pub(crate) fn step_in(
        &mut self,
        rng: &mut RngStream,
        mut place: impl FnMut(i64, Side, &mut RngStream) -> i64,
    ) -> Option<i64> {
        let now = self.t;
        self.book.expire(now, self.lifetime);
        let side = if rng.coin() { Side::Bid } else { Side::Ask };
        let tick = place(self.price, side, rng);
        self.t += 1;
        let (price, _) = place_or_match(&mut self.book, Order::new(side, tick, now))?;
        self.price = price;
        Some(price)
    }
}

impl Market for StiglerState {
    fn price(&self) -> i64 {
        self.price
    }

    fn advance(&mut self, rng: &mut RngStream) -> bool {
        self.step(rng).is_some()
    }

    fn updates(&self) -> u64 {
        self.t
    }

    fn quotes(&self) -> (Option<i64>, Option<i64>) {
        (self.book.best_bid(), self.book.best_ask())
    }
}

pub fn run(config: &StiglerConfig, rng: &mut RngStream) -> PricePath {
    let mut state = StiglerState::new(config);
    record(&mut state, rng, config.burn_in, config.steps, 1)
}

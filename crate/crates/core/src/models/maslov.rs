//! Limit orders placed next to the price, market orders hitting the best
//! quote, and removal of resting orders either by uniform evaporation or by a
//! fixed lifetime.
//!
//! The event machinery here is shared with the uniform-deposition model,
//! which differs only in where new limit orders land.

use serde::{Deserialize, Serialize};

use crate::book::{Book, Order, Side};
use crate::error::ConfigError;
use crate::models::{record, Market};
use crate::path::{OrderEvent, PricePath, RemovalCause};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "removal", rename_all = "snake_case", deny_unknown_fields)]
pub enum Removal {
    /// Each step may evaporate a uniformly chosen order.
    Evaporation,
    /// Orders are dropped once their age reaches `lifetime`; no evaporation.
    FixedLifetime { lifetime: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaslovConfig {
    /// Evaporation probability `q`.
    pub q: f64,
    /// Order-number parameter `N̄`.
    pub n_bar: f64,
    #[serde(flatten)]
    pub removal: Removal,
    pub steps: u64,
    pub burn_in: u64,
}

impl MaslovConfig {
    pub fn new(q: f64, n_bar: f64) -> Self {
        Self {
            q,
            n_bar,
            removal: Removal::Evaporation,
            steps: 0,
            burn_in: (100.0 * n_bar) as u64,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        validate_event_params(self.q, self.n_bar)?;
        if let Removal::FixedLifetime { lifetime } = self.removal {
            if lifetime < 1 {
                return Err(ConfigError::invariant("lifetime", "must be at least 1"));
            }
        }
        Ok(())
    }
}

pub(crate) fn validate_event_params(q: f64, n_bar: f64) -> Result<(), ConfigError> {
    if !(0.0..1.0).contains(&q) {
        return Err(ConfigError::invariant("q", "evaporation probability must lie in [0, 1)"));
    }
    if !(n_bar >= 1.0) {
        return Err(ConfigError::invariant("n_bar", "average order number must be at least 1"));
    }
    Ok(())
}

/// Deposition, satisfaction and evaporation probabilities for a book of
/// `n_orders` orders.
pub fn event_probs(n_orders: usize, q: f64, n_bar: f64) -> (f64, f64, f64) {
    let ratio = n_orders as f64 / n_bar;
    let denom = 2.0 + q * (ratio - 1.0);
    let dep = 1.0 / denom;
    let sat = (1.0 - q) / denom;
    let eva = q * ratio / denom;
    (dep, sat, eva)
}

/// What one step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Deposit(Order),
    /// A market order on `side` (Bid = buy) hit the resting order.
    Satisfy { side: Side, hit: Order },
    /// A market order found the opposite side empty.
    Idle { side: Side },
    Evaporate(Order),
}

/// Where deposited limit orders land.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Placement {
    /// One tick below (bids) or above (asks) the price.
    Adjacent,
    /// Uniform on `{-L/2, ..., L/2 - 1}` minus the price tick.
    Uniform { length: i64 },
}

#[derive(Debug, Clone)]
pub struct EventMarket {
    pub book: Book,
    pub price: i64,
    pub t: u64,
    q: f64,
    n_bar: f64,
    lifetime: Option<u64>,
    placement: Placement,
    log: Option<Vec<OrderEvent>>,
}

impl EventMarket {
    pub(crate) fn new(q: f64, n_bar: f64, lifetime: Option<u64>, placement: Placement) -> Self {
        let book = if lifetime.is_some() {
            Book::with_aging()
        } else {
            Book::new()
        };
        Self {
            book,
            price: 0,
            t: 0,
            q,
            n_bar,
            lifetime,
            placement,
            log: None,
        }
    }

    /// Starts keeping order birth/death segments.
    pub fn enable_event_log(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    /// Closed segments so far plus the still-resting orders.
    pub fn event_log(&self) -> Vec<OrderEvent> {
        let mut events = self.log.clone().unwrap_or_default();
        let mut resting: Vec<OrderEvent> = self
            .book
            .orders()
            .map(|o| OrderEvent {
                birth: o.birth,
                death: None,
                tick: o.price,
                side: o.side,
                cause: RemovalCause::Resting,
            })
            .collect();
        resting.sort_by_key(|e| (e.birth, e.tick));
        events.extend(resting);
        events
    }

    fn log_death(&mut self, order: Order, cause: RemovalCause) {
        if let Some(log) = self.log.as_mut() {
            log.push(OrderEvent::closed(order, self.t, cause));
        }
    }

    pub fn event_probs(&self) -> (f64, f64, f64) {
        match self.lifetime {
            Some(_) => (0.5, 0.5, 0.0),
            None => event_probs(self.book.len(), self.q, self.n_bar),
        }
    }

    fn deposit_tick(&self, rng: &mut RngStream) -> (Side, i64) {
        match self.placement {
            Placement::Adjacent => {
                if rng.coin() {
                    (Side::Ask, self.price + 1)
                } else {
                    (Side::Bid, self.price - 1)
                }
            }
            Placement::Uniform { length } => {
                let lo = -length / 2;
                let mut c = lo + rng.below(length as usize - 1) as i64;
                if c >= self.price {
                    c += 1;
                }
                let side = if c > self.price { Side::Ask } else { Side::Bid };
                (side, c)
            }
        }
    }

    pub fn step(&mut self, rng: &mut RngStream) -> Event {
        let now = self.t;
        if let Some(lifetime) = self.lifetime {
            let mut expired = Vec::new();
            self.book.expire_each(now, lifetime, |o| expired.push(o));
            for o in expired {
                self.log_death(o, RemovalCause::Expired);
            }
        }
        let (dep, sat, eva) = self.event_probs();
        let u = rng.unit() * (dep + sat + eva);
        let event = if u < dep {
            let (side, tick) = self.deposit_tick(rng);
            let order = Order::new(side, tick, now);
            self.book.insert(order);
            Event::Deposit(order)
        } else if u < dep + sat {
            // Bid = buy market order, which takes the best ask.
            let side = if rng.coin() { Side::Bid } else { Side::Ask };
            match self.book.remove_best(side.opposite()) {
                Ok(hit) => {
                    self.price = hit.price;
                    self.log_death(hit, RemovalCause::Matched);
                    Event::Satisfy { side, hit }
                }
                Err(_) => Event::Idle { side },
            }
        } else {
            let gone = self
                .book
                .remove_uniform(rng)
                .expect("evaporation is only drawn for a non-empty book");
            self.log_death(gone, RemovalCause::Evaporated);
            Event::Evaporate(gone)
        };
        self.t += 1;
        event
    }
}

impl Market for EventMarket {
    fn price(&self) -> i64 {
        self.price
    }

    fn advance(&mut self, rng: &mut RngStream) -> bool {
        matches!(self.step(rng), Event::Satisfy { .. })
    }

    fn updates(&self) -> u64 {
        self.t
    }

    fn quotes(&self) -> (Option<i64>, Option<i64>) {
        (self.book.best_bid(), self.book.best_ask())
    }
}

/// Empty book at price 0.
pub fn new_market(config: &MaslovConfig) -> EventMarket {
    let lifetime = match config.removal {
        Removal::Evaporation => None,
        Removal::FixedLifetime { lifetime } => Some(lifetime),
    };
    EventMarket::new(config.q, config.n_bar, lifetime, Placement::Adjacent)
}

pub fn run(config: &MaslovConfig, rng: &mut RngStream) -> PricePath {
    let mut market = new_market(config);
    record(&mut market, rng, config.burn_in, config.steps, 1)
}

/// Like [`run`], also returning the order event log of the recorded window.
pub fn run_logged(config: &MaslovConfig, rng: &mut RngStream) -> (PricePath, Vec<OrderEvent>) {
    let mut market = new_market(config);
    for _ in 0..config.burn_in {
        market.step(rng);
    }
    market.enable_event_log();
    let path = record(&mut market, rng, 0, config.steps, 1);
    (path, market.event_log())
}

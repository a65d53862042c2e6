//! Unit-volume limit order book.
//!
//! Each side keeps an ordered map from tick to the FIFO of orders resting
//! there, so best-price queries and removals are `O(log n)`. A flat index of
//! live orders backs `O(1)` uniform removal (evaporation). Books created with
//! [`Book::with_aging`] also keep an insertion-ordered queue so expiry by age
//! costs amortized `O(1)` per removed order.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::BookError;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bid => "bid",
            Side::Ask => "ask",
        }
    }
}

/// One resting order: side, tick and the step at which it was deposited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Order {
    pub side: Side,
    pub price: i64,
    pub birth: u64,
}

impl Order {
    pub fn new(side: Side, price: i64, birth: u64) -> Self {
        Self { side, price, birth }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    order: Order,
    generation: u32,
    alive: bool,
    flat_pos: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Book {
    slots: Vec<Slot>,
    free: Vec<u32>,
    flat: Vec<u32>,
    bids: BTreeMap<i64, VecDeque<u32>>,
    asks: BTreeMap<i64, VecDeque<u32>>,
    n_bid: usize,
    n_ask: usize,
    aging: Option<VecDeque<(u32, u32)>>,
    last_birth: u64,
    spare: Vec<VecDeque<u32>>,
}

impl Book {
    pub fn new() -> Self {
        Self::default()
    }

    /// A book that tracks insertion order for cheap age-based expiry.
    /// Orders must then be inserted with non-decreasing birth steps.
    pub fn with_aging() -> Self {
        Self {
            aging: Some(VecDeque::new()),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.n_bid + self.n_ask
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn count(&self, side: Side) -> usize {
        match side {
            Side::Bid => self.n_bid,
            Side::Ask => self.n_ask,
        }
    }

    pub fn insert(&mut self, order: Order) {
        if self.aging.is_some() {
            debug_assert!(
                order.birth >= self.last_birth,
                "aging book needs non-decreasing births"
            );
        }
        self.last_birth = self.last_birth.max(order.birth);

        let flat_pos = self.flat.len() as u32;
        let id = match self.free.pop() {
            Some(id) => {
                let slot = &mut self.slots[id as usize];
                slot.order = order;
                slot.alive = true;
                slot.flat_pos = flat_pos;
                id
            }
            None => {
                self.slots.push(Slot {
                    order,
                    generation: 0,
                    alive: true,
                    flat_pos,
                });
                (self.slots.len() - 1) as u32
            }
        };
        self.flat.push(id);

        let spare = &mut self.spare;
        let level = match order.side {
            Side::Bid => {
                self.n_bid += 1;
                self.bids.entry(order.price)
            }
            Side::Ask => {
                self.n_ask += 1;
                self.asks.entry(order.price)
            }
        };
        level
            .or_insert_with(|| spare.pop().unwrap_or_default())
            .push_back(id);

        if let Some(queue) = self.aging.as_mut() {
            queue.push_back((id, self.slots[id as usize].generation));
        }
    }

    /// Highest bid or lowest ask tick.
    #[inline]
    pub fn best(&self, side: Side) -> Option<i64> {
        match side {
            Side::Bid => self.bids.keys().next_back().copied(),
            Side::Ask => self.asks.keys().next().copied(),
        }
    }

    pub fn best_bid(&self) -> Option<i64> {
        self.best(Side::Bid)
    }

    pub fn best_ask(&self) -> Option<i64> {
        self.best(Side::Ask)
    }

    /// Number of orders resting on `side` at `tick`.
    pub fn depth_at(&self, side: Side, tick: i64) -> usize {
        let map = match side {
            Side::Bid => &self.bids,
            Side::Ask => &self.asks,
        };
        map.get(&tick).map_or(0, VecDeque::len)
    }

    /// Removes one order at the best tick of `side`, oldest first.
    pub fn remove_best(&mut self, side: Side) -> Result<Order, BookError> {
        let map = match side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        };
        let mut entry = match side {
            Side::Bid => map.last_entry(),
            Side::Ask => map.first_entry(),
        }
        .ok_or(BookError::EmptySide(side))?;
        let id = entry
            .get_mut()
            .pop_front()
            .expect("price levels are never left empty");
        if entry.get().is_empty() {
            self.spare.push(entry.remove());
        }
        Ok(self.release(id))
    }

    /// Removes an order chosen uniformly among all resting orders.
    pub fn remove_uniform(&mut self, rng: &mut RngStream) -> Result<Order, BookError> {
        if self.flat.is_empty() {
            return Err(BookError::Empty);
        }
        let id = self.flat[rng.below(self.flat.len())];
        self.detach_from_level(id);
        Ok(self.release(id))
    }

    /// Removes every order with `birth <= now - lifetime`.
    pub fn expire(&mut self, now: u64, lifetime: u64) -> usize {
        self.expire_each(now, lifetime, |_| {})
    }

    /// Like [`Book::expire`], handing each removed order to `on_removed`.
    pub fn expire_each(
        &mut self,
        now: u64,
        lifetime: u64,
        mut on_removed: impl FnMut(Order),
    ) -> usize {
        assert!(lifetime >= 1, "lifetime must be at least one step");
        let Some(cutoff) = now.checked_sub(lifetime) else {
            return 0;
        };
        let mut removed = 0;
        match self.aging.take() {
            Some(mut queue) => {
                while let Some(&(id, generation)) = queue.front() {
                    let slot = &self.slots[id as usize];
                    if slot.alive && slot.generation == generation {
                        if slot.order.birth > cutoff {
                            break;
                        }
                        self.detach_from_level(id);
                        on_removed(self.release(id));
                        removed += 1;
                    }
                    queue.pop_front();
                }
                self.aging = Some(queue);
            }
            None => {
                let doomed: Vec<u32> = self
                    .flat
                    .iter()
                    .copied()
                    .filter(|&id| self.slots[id as usize].order.birth <= cutoff)
                    .collect();
                for id in doomed {
                    self.detach_from_level(id);
                    on_removed(self.release(id));
                    removed += 1;
                }
            }
        }
        removed
    }

    /// All resting orders, in no particular order.
    pub fn orders(&self) -> impl Iterator<Item = Order> + '_ {
        self.flat.iter().map(|&id| self.slots[id as usize].order)
    }

    fn detach_from_level(&mut self, id: u32) {
        let order = self.slots[id as usize].order;
        let map = match order.side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        };
        let level = map
            .get_mut(&order.price)
            .expect("live order has a price level");
        let pos = level
            .iter()
            .position(|&other| other == id)
            .expect("live order is queued at its level");
        level.remove(pos);
        if level.is_empty() {
            let level = map.remove(&order.price).unwrap_or_default();
            self.spare.push(level);
        }
    }

    /// Marks a slot dead and drops it from the flat index. The caller has
    /// already taken it off its price level.
    fn release(&mut self, id: u32) -> Order {
        let slot = &mut self.slots[id as usize];
        debug_assert!(slot.alive);
        slot.alive = false;
        slot.generation = slot.generation.wrapping_add(1);
        let order = slot.order;
        let pos = slot.flat_pos as usize;

        self.flat.swap_remove(pos);
        if let Some(&moved) = self.flat.get(pos) {
            self.slots[moved as usize].flat_pos = pos as u32;
        }
        self.free.push(id);
        match order.side {
            Side::Bid => self.n_bid -= 1,
            Side::Ask => self.n_ask -= 1,
        }
        order
    }
}

//! Price and trade recording plus the CSV forms used on disk.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::book::{Order, Side};

/// A completed transaction. `step` is the elementary update after which the
/// trade happened; `ret` is the price change it caused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trade {
    pub step: u64,
    pub price: i64,
    pub ret: i64,
}

/// Price series of one run over its measurement window.
///
/// `x[k]` is the price after `start_step + k * stride` elementary updates.
/// `time_unit` converts updates into model time (1 for the order-book
/// models, `1/(2N)` for the diffusing-particle model).
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    pub x: Vec<i64>,
    pub start_step: u64,
    pub stride: u64,
    pub time_unit: f64,
    pub trades: Vec<Trade>,
}

impl PricePath {
    /// A path sampled once per unit step, with no trade list.
    pub fn from_prices(x: Vec<i64>) -> Self {
        Self {
            x,
            start_step: 0,
            stride: 1,
            time_unit: 1.0,
            trades: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Model time between two consecutive samples.
    pub fn sample_dt(&self) -> f64 {
        self.stride as f64 * self.time_unit
    }

    /// One-sample returns `x[k] - x[k-1]`.
    pub fn returns(&self) -> Vec<i64> {
        self.x.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn trade_time(&self, trade: &Trade) -> f64 {
        trade.step as f64 * self.time_unit
    }

    /// Waiting times between consecutive trades, in model time.
    pub fn waiting_times(&self) -> Vec<f64> {
        self.trades
            .windows(2)
            .map(|w| (w[1].step - w[0].step) as f64 * self.time_unit)
            .collect()
    }

    fn format_time(&self, step: u64) -> String {
        if self.time_unit == 1.0 {
            step.to_string()
        } else {
            format!("{}", step as f64 * self.time_unit)
        }
    }

    /// `t,x` rows, one per sample.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        let mut buf = String::from("t,x\n");
        for (k, x) in self.x.iter().enumerate() {
            let step = self.start_step + k as u64 * self.stride;
            let _ = writeln!(buf, "{},{}", self.format_time(step), x);
            if buf.len() > 1 << 16 {
                out.write_all(buf.as_bytes())?;
                buf.clear();
            }
        }
        out.write_all(buf.as_bytes())
    }

    /// `t,price,return` rows, one per trade.
    pub fn write_trades_csv(&self, mut out: impl Write) -> io::Result<()> {
        let mut buf = String::from("t,price,return\n");
        for tr in &self.trades {
            let _ = writeln!(buf, "{},{},{}", self.format_time(tr.step), tr.price, tr.ret);
            if buf.len() > 1 << 16 {
                out.write_all(buf.as_bytes())?;
                buf.clear();
            }
        }
        out.write_all(buf.as_bytes())
    }

    /// Reads a `t,x` file. Samples are assumed evenly spaced; the spacing is
    /// taken from the first two time stamps.
    pub fn read_csv(input: impl BufRead) -> Result<Self, String> {
        let mut times = Vec::new();
        let mut x = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with('t')) {
                continue;
            }
            let (t, p) = line
                .split_once(',')
                .ok_or_else(|| format!("line {}: expected `t,x`", n + 1))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad time `{t}`", n + 1))?;
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad price `{p}`", n + 1))?;
            times.push(t);
            x.push(p);
        }
        if x.is_empty() {
            return Err("no samples".into());
        }
        let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
        if !(dt > 0.0) {
            return Err("time stamps must increase".into());
        }
        Ok(Self {
            x,
            start_step: 0,
            stride: 1,
            time_unit: dt,
            trades: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemovalCause {
    Matched,
    Expired,
    Evaporated,
    /// Still in the book when the run ended.
    Resting,
}

impl RemovalCause {
    pub fn as_str(self) -> &'static str {
        match self {
            RemovalCause::Matched => "matched",
            RemovalCause::Expired => "expired",
            RemovalCause::Evaporated => "evaporated",
            RemovalCause::Resting => "resting",
        }
    }
}

/// Lifetime segment of one order, for space-time charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderEvent {
    pub birth: u64,
    pub death: Option<u64>,
    pub tick: i64,
    pub side: Side,
    pub cause: RemovalCause,
}

impl OrderEvent {
    pub fn closed(order: Order, death: u64, cause: RemovalCause) -> Self {
        Self {
            birth: order.birth,
            death: Some(death),
            tick: order.price,
            side: order.side,
            cause,
        }
    }
}

/// `birth_t,death_t,tick,side,cause` rows; `death_t` is empty for orders
/// still resting at the end of the run.
pub fn write_event_log(events: &[OrderEvent], mut out: impl Write) -> io::Result<()> {
    let mut buf = String::from("birth_t,death_t,tick,side,cause\n");
    for e in events {
        let death = e.death.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(
            buf,
            "{},{},{},{},{}",
            e.birth,
            death,
            e.tick,
            e.side.as_str(),
            e.cause.as_str()
        );
        if buf.len() > 1 << 16 {
            out.write_all(buf.as_bytes())?;
            buf.clear();
        }
    }
    out.write_all(buf.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_prices() {
        let path = PricePath::from_prices(vec![0, 1, 1, -2, 5]);
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"t,x\n0,0\n1,1\n"));
        let back = PricePath::read_csv(&buf[..]).unwrap();
        assert_eq!(back.x, path.x);
        assert_eq!(back.sample_dt(), 1.0);
    }

    #[test]
    fn read_rejects_garbage() {
        assert!(PricePath::read_csv(&b"t,x\n0,abc\n"[..]).is_err());
        assert!(PricePath::read_csv(&b"t,x\n"[..]).is_err());
    }

    #[test]
    fn fractional_time_stamps() {
        let path = PricePath {
            x: vec![3, 3, 4],
            start_step: 4,
            stride: 2,
            time_unit: 0.25,
            trades: vec![Trade {
                step: 7,
                price: 4,
                ret: 1,
            }],
        };
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,x\n1,3\n1.5,3\n2,4\n");
        let mut buf = Vec::new();
        path.write_trades_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,price,return\n1.75,4,1\n");
    }

    #[test]
    fn event_log_format() {
        let events = [
            OrderEvent::closed(Order::new(Side::Bid, -1, 3), 9, RemovalCause::Matched),
            OrderEvent {
                birth: 5,
                death: None,
                tick: 2,
                side: Side::Ask,
                cause: RemovalCause::Resting,
            },
        ];
        let mut buf = Vec::new();
        write_event_log(&events, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "birth_t,death_t,tick,side,cause\n3,9,-1,bid,matched\n5,,2,ask,resting\n"
        );
    }
}

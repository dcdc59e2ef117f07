//! Simulated chain substrate: accounts, token gate, logical clock, event log.
//!
//! Time is an explicit logical clock advanced only by instructions; nothing
//! reads the wall clock. Currency enters the world only through explicit
//! `credit` calls issued by funding instructions, so conservation is exactly
//! checkable.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Account identity. Interned label; `0x0` is the reserved zero sentinel
/// (never a valid proposer or respondent, marks settled payment refs).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(String);

pub const ZERO_LABEL: &str = "0x0";

impl Address {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn zero() -> Self {
        Self(ZERO_LABEL.to_string())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == ZERO_LABEL
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    HipCreated,
    ResponseAccepted,
    PaymentSent,
    TxRejected,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::HipCreated => "HIP_CREATED",
            Self::ResponseAccepted => "RESPONSE_ACCEPTED",
            Self::PaymentSent => "PAYMENT_SENT",
            Self::TxRejected => "TX_REJECTED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "HIP_CREATED" => Some(Self::HipCreated),
            "RESPONSE_ACCEPTED" => Some(Self::ResponseAccepted),
            "PAYMENT_SENT" => Some(Self::PaymentSent),
            "TX_REJECTED" => Some(Self::TxRejected),
            _ => None,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One log entry. Sequence numbers are dense and strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub sequence: u64,
    pub time: u64,
    pub kind: EventKind,
    pub payload: BTreeMap<String, String>,
}

impl Event {
    /// Tab-separated `key=value` line with payload keys sorted.
    /// Payload keys must not contain `=` and values must not contain tabs.
    pub fn to_line(&self) -> String {
        let mut line = format!("seq={}\ttime={}\tkind={}", self.sequence, self.time, self.kind);
        for (k, v) in &self.payload {
            line.push('\t');
            line.push_str(k);
            line.push('=');
            line.push_str(v);
        }
        line
    }

    pub fn parse_line(line: &str) -> Option<Self> {
        let mut sequence = None;
        let mut time = None;
        let mut kind = None;
        let mut payload = BTreeMap::new();
        for field in line.split('\t') {
            let (k, v) = field.split_once('=')?;
            match k {
                "seq" => sequence = Some(v.parse().ok()?),
                "time" => time = Some(v.parse().ok()?),
                "kind" => kind = EventKind::parse(v),
                _ => {
                    payload.insert(k.to_string(), v.to_string());
                }
            }
        }
        Some(Self {
            sequence: sequence?,
            time: time?,
            kind: kind?,
            payload,
        })
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum LedgerError {
    #[error("clock overflow")]
    ClockOverflow,
    #[error("the zero address cannot be used")]
    ZeroAddress,
    #[error("insufficient balance")]
    InsufficientBalance,
    #[error("balance overflow")]
    BalanceOverflow,
}

/// The full simulated world: balances, simulated NFT holdings, the logical
/// clock, and the append-only event log.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldState {
    pub balances: BTreeMap<Address, u64>,
    pub token_holdings: BTreeMap<Address, u64>,
    pub now: u64,
    pub events: Vec<Event>,
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance_time(&mut self, delta: u64) -> Result<u64, LedgerError> {
        self.now = self.now.checked_add(delta).ok_or(LedgerError::ClockOverflow)?;
        Ok(self.now)
    }

    pub fn mint_token(&mut self, addr: &Address, count: u64) -> Result<(), LedgerError> {
        if addr.is_zero() {
            return Err(LedgerError::ZeroAddress);
        }
        let entry = self.token_holdings.entry(addr.clone()).or_insert(0);
        *entry = entry.checked_add(count).ok_or(LedgerError::BalanceOverflow)?;
        Ok(())
    }

    pub fn balance(&self, addr: &Address) -> u64 {
        self.balances.get(addr).copied().unwrap_or(0)
    }

    pub fn token_balance(&self, addr: &Address) -> u64 {
        self.token_holdings.get(addr).copied().unwrap_or(0)
    }

    pub fn credit(&mut self, addr: &Address, amount: u64) -> Result<(), LedgerError> {
        let entry = self.balances.entry(addr.clone()).or_insert(0);
        *entry = entry.checked_add(amount).ok_or(LedgerError::BalanceOverflow)?;
        Ok(())
    }

    pub fn debit(&mut self, addr: &Address, amount: u64) -> Result<(), LedgerError> {
        let entry = self
            .balances
            .get_mut(addr)
            .filter(|b| **b >= amount)
            .ok_or(LedgerError::InsufficientBalance)?;
        *entry -= amount;
        Ok(())
    }

    pub fn emit_event(&mut self, kind: EventKind, payload: BTreeMap<String, String>) -> u64 {
        let sequence = self.events.len() as u64;
        self.events.push(Event {
            sequence,
            time: self.now,
            kind,
            payload,
        });
        sequence
    }

    /// Sum of all account balances (contract holdings tracked separately).
    pub fn total_account_currency(&self) -> u128 {
        self.balances.values().map(|&b| b as u128).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn addr(s: &str) -> Address {
        Address::new(s)
    }

    #[test]
    fn clock_advances_and_overflows() {
        let mut w = WorldState::new();
        assert_eq!(w.advance_time(3600), Ok(3600));
        assert_eq!(w.advance_time(0), Ok(3600));
        w.now = u64::MAX - 1;
        assert_eq!(w.advance_time(2), Err(LedgerError::ClockOverflow));
        assert_eq!(w.now, u64::MAX - 1);
    }

    #[test]
    fn mint_token_rules() {
        let mut w = WorldState::new();
        w.mint_token(&addr("alice"), 1).unwrap();
        assert_eq!(w.token_balance(&addr("alice")), 1);
        w.mint_token(&addr("alice"), 0).unwrap();
        assert_eq!(w.token_balance(&addr("alice")), 1);
        assert_eq!(w.mint_token(&Address::zero(), 1), Err(LedgerError::ZeroAddress));
    }

    #[test]
    fn credit_debit() {
        let mut w = WorldState::new();
        w.credit(&addr("alice"), 100).unwrap();
        w.debit(&addr("alice"), 40).unwrap();
        assert_eq!(w.balance(&addr("alice")), 60);
        assert_eq!(w.debit(&addr("alice"), 61), Err(LedgerError::InsufficientBalance));
        assert_eq!(w.balance(&addr("alice")), 60);
        w.credit(&addr("alice"), 0).unwrap();
        assert_eq!(w.balance(&addr("alice")), 60);
        w.credit(&addr("bob"), u64::MAX).unwrap();
        assert_eq!(w.credit(&addr("bob"), 1), Err(LedgerError::BalanceOverflow));
    }

    #[test]
    fn events_are_dense_and_ordered() {
        let mut w = WorldState::new();
        assert_eq!(w.emit_event(EventKind::HipCreated, BTreeMap::new()), 0);
        w.advance_time(5).unwrap();
        assert_eq!(w.emit_event(EventKind::PaymentSent, BTreeMap::new()), 1);
        assert_eq!(w.events[0].sequence, 0);
        assert_eq!(w.events[1].sequence, 1);
        assert_eq!(w.events[1].time, 5);
    }

    #[test]
    fn event_line_round_trip() {
        let mut payload = BTreeMap::new();
        payload.insert("reason".to_string(), "User has already responded.".to_string());
        payload.insert("op".to_string(), "SUBMIT_RESPONSE".to_string());
        let ev = Event {
            sequence: 7,
            time: 42,
            kind: EventKind::TxRejected,
            payload,
        };
        let line = ev.to_line();
        assert_eq!(Event::parse_line(&line), Some(ev));
    }

    proptest! {
        #[test]
        fn event_payload_round_trips(
            mut entries in proptest::collection::btree_map("[a-z_]{1,8}", "[ -<>-~]{0,16}", 0..5),
            seq in 0u64..1000,
            time in 0u64..1000,
        ) {
            // keys avoid '=' and the reserved header names; values avoid tabs and '='
            for reserved in ["seq", "time", "kind"] {
                entries.remove(reserved);
            }
            let ev = Event { sequence: seq, time, kind: EventKind::ResponseAccepted, payload: entries };
            prop_assert_eq!(Event::parse_line(&ev.to_line()), Some(ev));
        }
    }
}

//! Deterministic simulator for an on-chain human-intelligence task protocol.
//!
//! A *HIP* (human intelligence primitive) solicits one preference structure —
//! a choice, ranking, sorting, or classification over `n` alternatives — from
//! token-gated respondents, who later split the proposer's fee equally via
//! pull payments. The crate provides:
//!
//! - [`model`]: the task taxonomy, task records, and the fee schedule.
//! - [`validation`]: per-type response validity rules and digit verifiers.
//! - [`ledger`]: a simulated chain substrate (balances, token gate, logical
//!   clock, event log).
//! - [`contract`]: the task contract as a deterministic state machine over
//!   the ledger.
//! - [`aggregation`]: off-chain aggregation of collected responses
//!   (plurality, Borda, score means/medians, per-item majority).
//! - [`scenario`] / [`runner`]: a line-delimited transcript format and a
//!   replay engine producing canonical, hashable reports.

pub mod aggregation;
pub mod contract;
pub mod export;
pub mod ledger;
pub mod model;
pub mod runner;
pub mod scenario;
pub mod validation;

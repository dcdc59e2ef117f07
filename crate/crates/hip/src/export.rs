//! Canonical state export and hashing.
//!
//! The export is key-sorted structured text covering balances, token
//! holdings, the clock, and the full contract storage. The event log is
//! deliberately excluded: a rejected transaction records an audit event but
//! must leave the state hash unchanged. Hash is SHA-256 of the export
//! bytes, so replay determinism reduces to one string equality.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::contract::ContractState;
use crate::ledger::{Address, WorldState};

fn join(values: &[u64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn canonical_export(world: &WorldState, contract: &ContractState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "now={}", world.now);

    let accounts: BTreeSet<&Address> = world
        .balances
        .keys()
        .chain(world.token_holdings.keys())
        .collect();
    for addr in accounts {
        let _ = writeln!(
            out,
            "account {} balance={} tokens={}",
            addr,
            world.balance(addr),
            world.token_balance(addr)
        );
    }

    let _ = writeln!(
        out,
        "contract owner={} token={} fees={} held_funds={}",
        contract.owner.as_ref().map(|a| a.to_string()).unwrap_or_else(|| "-".into()),
        contract.token_contract.as_deref().unwrap_or("-"),
        contract
            .fees
            .as_ref()
            .map(|f| join(f.as_array()))
            .unwrap_or_else(|| "-".into()),
        contract.held_funds,
    );

    for (i, p) in contract.proposers.iter().enumerate() {
        let _ = writeln!(out, "proposer {i} {p}");
    }
    for (proposer, specs) in &contract.hips {
        for (id, spec) in specs.iter().enumerate() {
            let _ = writeln!(
                out,
                "hip {proposer} {id} type={} n={} k={} created={} duration={} responses={}",
                spec.hip_type,
                spec.num_alternatives,
                spec.num_classes,
                spec.creation_date,
                spec.duration,
                spec.num_responses,
            );
        }
    }
    for ((proposer, id), records) in &contract.responses {
        for (i, record) in records.iter().enumerate() {
            let _ = writeln!(
                out,
                "response {proposer} {id} {i} respondent={} values={}",
                record.respondent,
                join(&record.response),
            );
        }
    }
    for (respondent, proposer, id) in &contract.responded {
        let _ = writeln!(out, "responded {respondent} {proposer} {id}");
    }
    for (respondent, refs) in &contract.response_refs {
        for (i, r) in refs.iter().enumerate() {
            let _ = writeln!(
                out,
                "ref {respondent} {i} proposer={} index={}",
                r.proposer, r.index
            );
        }
    }
    out
}

pub fn state_hash(world: &WorldState, contract: &ContractState) -> String {
    let export = canonical_export(world, contract);
    let digest = Sha256::digest(export.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

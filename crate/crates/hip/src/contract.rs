//! The task contract as a deterministic state machine over the ledger.
//!
//! Storage follows the four indexing requirements of the protocol:
//! proposer -> task list, (proposer, index) -> response list,
//! (respondent, proposer, index) -> responded flag, and
//! respondent -> payment refs. Fees are escrowed in `held_funds` and paid
//! out on request, split equally among respondents with integer division;
//! the remainder (dust) stays in the contract permanently.
//!
//! Every operation checks all guards before mutating anything, so a
//! rejection leaves the contract and world untouched.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ledger::{Address, EventKind, WorldState};
use crate::model::{validate_spec, FeeSchedule, HipSpec, HipType};
use crate::validation::validate_response_counted;

/// One accepted response: who answered and with what.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseRecord {
    pub respondent: Address,
    pub response: Vec<u64>,
}

/// Respondent-side pointer to a task they answered, kept for payouts.
/// A zeroed proposer marks the ref as settled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseRef {
    pub proposer: Address,
    pub index: u64,
}

impl ResponseRef {
    pub fn is_settled(&self) -> bool {
        self.proposer.is_zero()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContractError {
    #[error("User did not pay the right fee for this HIP type.")]
    WrongFee,
    #[error("User does not hold the right NFT.")]
    NoToken,
    #[error("User has already responded.")]
    AlreadyResponded,
    #[error("This HIP is no longer open for responses.")]
    HipClosed,
    #[error("Trivial or invalid HIP")]
    InvalidHip,
    #[error("Invalid response")]
    InvalidResponse,
    #[error("Failed to send Ether")]
    TransferFailed,
    #[error("Caller is not the owner.")]
    NotOwner,
    #[error("Fee schedule must have exactly 4 entries.")]
    BadFeeSchedule,
    #[error("Contract is not initialized.")]
    NotInitialized,
    #[error("Unknown HIP.")]
    UnknownHip,
    #[error("Insufficient balance.")]
    InsufficientBalance,
    #[error("Index out of range.")]
    OutOfRange,
}

/// Full contract storage. The owner is fixed by the first `initialize`
/// call (the deployment analogue); re-initialization by the owner is
/// permitted and replaces the token gate and fee schedule.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContractState {
    pub(crate) owner: Option<Address>,
    pub(crate) token_contract: Option<String>,
    pub(crate) fees: Option<FeeSchedule>,
    pub(crate) proposers: Vec<Address>,
    pub(crate) hips: BTreeMap<Address, Vec<HipSpec>>,
    pub(crate) responses: BTreeMap<(Address, u64), Vec<ResponseRecord>>,
    pub(crate) responded: BTreeSet<(Address, Address, u64)>,
    pub(crate) response_refs: BTreeMap<Address, Vec<ResponseRef>>,
    pub(crate) held_funds: u64,
}

/// Result of an accepted response: 1-based response count plus the
/// validation work units spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResponseReceipt {
    pub number: u64,
    pub work: u64,
}

impl ContractState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Contract with a pre-assigned owner, the deployed-by-constructor case.
    pub fn deployed_by(owner: Address) -> Self {
        Self {
            owner: Some(owner),
            ..Self::default()
        }
    }

    /// Set the token gate and fee schedule. The first caller becomes the
    /// owner; afterwards only the owner may call again. Returns true when
    /// this call replaced an existing configuration.
    pub fn initialize(
        &mut self,
        sender: &Address,
        token_contract: &str,
        fees: &[u64],
    ) -> Result<bool, ContractError> {
        match &self.owner {
            Some(owner) if owner != sender => return Err(ContractError::NotOwner),
            Some(_) => {}
            None => self.owner = Some(sender.clone()),
        }
        let schedule = FeeSchedule::from_slice(fees).map_err(|_| ContractError::BadFeeSchedule)?;
        let reinitialized = self.fees.is_some();
        self.token_contract = Some(token_contract.to_string());
        self.fees = Some(schedule);
        Ok(reinitialized)
    }

    /// Create a task. Charges exactly the scheduled fee for the type and
    /// escrows it; returns the new task's index in the sender's list.
    #[allow(clippy::too_many_arguments)] // mirrors the on-chain call shape
    pub fn submit_hip(
        &mut self,
        world: &mut WorldState,
        sender: &Address,
        hip_type: HipType,
        num_alternatives: u64,
        num_classes: u64,
        duration: u64,
        payment: u64,
        semantic_ref: Option<&str>,
    ) -> Result<u64, ContractError> {
        let fees = self.fees.as_ref().ok_or(ContractError::NotInitialized)?;
        if payment != fees.fee(hip_type) {
            return Err(ContractError::WrongFee);
        }
        validate_spec(hip_type, num_alternatives, num_classes)
            .map_err(|_| ContractError::InvalidHip)?;
        if world.balance(sender) < payment {
            return Err(ContractError::InsufficientBalance);
        }
        let new_held = self
            .held_funds
            .checked_add(payment)
            .ok_or(ContractError::TransferFailed)?;

        world.debit(sender, payment).expect("balance checked above");
        self.held_funds = new_held;
        let list = self.hips.entry(sender.clone()).or_default();
        if list.is_empty() {
            self.proposers.push(sender.clone());
        }
        let hip_id = list.len() as u64;
        list.push(HipSpec {
            hip_type,
            num_alternatives,
            num_classes,
            creation_date: world.now,
            duration,
            num_responses: 0,
        });

        let mut payload = BTreeMap::new();
        payload.insert("proposer".into(), sender.to_string());
        payload.insert("hip_id".into(), hip_id.to_string());
        payload.insert("type".into(), hip_type.to_string());
        payload.insert("n".into(), num_alternatives.to_string());
        payload.insert("k".into(), num_classes.to_string());
        payload.insert("duration".into(), duration.to_string());
        payload.insert("fee".into(), payment.to_string());
        if let Some(r) = semantic_ref {
            payload.insert("semantic_ref".into(), r.to_string());
        }
        world.emit_event(EventKind::HipCreated, payload);
        Ok(hip_id)
    }

    /// Record one response. Guards, in order: token gate, single-response
    /// flag, task existence, deadline (inclusive), then validity. Returns
    /// the 1-based response count after insertion.
    pub fn submit_response(
        &mut self,
        world: &mut WorldState,
        sender: &Address,
        proposer: &Address,
        hip_id: u64,
        response: &[u64],
    ) -> Result<ResponseReceipt, ContractError> {
        if world.token_balance(sender) == 0 {
            return Err(ContractError::NoToken);
        }
        if self
            .responded
            .contains(&(sender.clone(), proposer.clone(), hip_id))
        {
            return Err(ContractError::AlreadyResponded);
        }
        let spec = self
            .hips
            .get(proposer)
            .and_then(|v| v.get(hip_id as usize))
            .ok_or(ContractError::UnknownHip)?;
        if !spec.accepts_responses_at(world.now) {
            return Err(ContractError::HipClosed);
        }
        let (valid, work) = validate_response_counted(spec, response);
        valid.map_err(|_| ContractError::InvalidResponse)?;

        let spec = self
            .hips
            .get_mut(proposer)
            .and_then(|v| v.get_mut(hip_id as usize))
            .expect("existence checked above");
        spec.num_responses += 1;
        let number = spec.num_responses;
        self.responses
            .entry((proposer.clone(), hip_id))
            .or_default()
            .push(ResponseRecord {
                respondent: sender.clone(),
                response: response.to_vec(),
            });
        self.response_refs
            .entry(sender.clone())
            .or_default()
            .push(ResponseRef {
                proposer: proposer.clone(),
                index: hip_id,
            });
        self.responded
            .insert((sender.clone(), proposer.clone(), hip_id));

        let mut payload = BTreeMap::new();
        payload.insert("respondent".into(), sender.to_string());
        payload.insert("proposer".into(), proposer.to_string());
        payload.insert("hip_id".into(), hip_id.to_string());
        payload.insert("number".into(), number.to_string());
        world.emit_event(EventKind::ResponseAccepted, payload);
        Ok(ResponseReceipt { number, work })
    }

    /// Settle every unsettled ref of `sender` whose task is closed,
    /// crediting `floor(fee / num_responses)` per ref. Refs to still-open
    /// tasks are skipped and stay claimable.
    pub fn request_payment(
        &mut self,
        world: &mut WorldState,
        sender: &Address,
    ) -> Result<u64, ContractError> {
        let mut total: u64 = 0;
        let mut settle = Vec::new();
        if let Some(refs) = self.response_refs.get(sender) {
            for (i, r) in refs.iter().enumerate() {
                if r.is_settled() {
                    continue;
                }
                let spec = &self.hips[&r.proposer][r.index as usize];
                if spec.pays_out_at(world.now) {
                    assert!(spec.num_responses >= 1, "ref without a stored response");
                    let fee = self.fees.as_ref().expect("ref implies initialized").fee(spec.hip_type);
                    total = total
                        .checked_add(fee / spec.num_responses)
                        .ok_or(ContractError::TransferFailed)?;
                    settle.push(i);
                }
            }
        }
        if world.balance(sender).checked_add(total).is_none() {
            return Err(ContractError::TransferFailed);
        }
        // a raised fee schedule after re-initialization can outgrow escrow
        let new_held = self
            .held_funds
            .checked_sub(total)
            .ok_or(ContractError::TransferFailed)?;

        if let Some(refs) = self.response_refs.get_mut(sender) {
            for i in &settle {
                refs[*i].proposer = Address::zero();
            }
        }
        self.held_funds = new_held;
        world.credit(sender, total).expect("overflow checked above");

        let mut payload = BTreeMap::new();
        payload.insert("respondent".into(), sender.to_string());
        payload.insert("amount".into(), total.to_string());
        world.emit_event(EventKind::PaymentSent, payload);
        Ok(total)
    }

    /// The amount `request_payment` would pay right now, without settling.
    pub fn get_balance(&self, world: &WorldState, sender: &Address) -> u64 {
        let mut total: u64 = 0;
        if let Some(refs) = self.response_refs.get(sender) {
            for r in refs {
                if r.is_settled() {
                    continue;
                }
                let spec = &self.hips[&r.proposer][r.index as usize];
                if spec.pays_out_at(world.now) {
                    let fee = self.fees.as_ref().expect("ref implies initialized").fee(spec.hip_type);
                    total = total.saturating_add(fee / spec.num_responses);
                }
            }
        }
        total
    }

    pub fn get_num_proposers(&self) -> u64 {
        self.proposers.len() as u64
    }

    pub fn get_fee(&self, index: usize) -> Result<u64, ContractError> {
        self.fees
            .as_ref()
            .and_then(|f| f.get(index))
            .ok_or(ContractError::OutOfRange)
    }

    pub fn get_proposer(&self, index: usize) -> Result<&Address, ContractError> {
        self.proposers.get(index).ok_or(ContractError::OutOfRange)
    }

    pub fn get_hip_count(&self, proposer: &Address) -> u64 {
        self.hips.get(proposer).map(|v| v.len() as u64).unwrap_or(0)
    }

    pub fn get_hip(&self, proposer: &Address, hip_id: u64) -> Result<&HipSpec, ContractError> {
        self.hips
            .get(proposer)
            .and_then(|v| v.get(hip_id as usize))
            .ok_or(ContractError::UnknownHip)
    }

    pub fn get_response(
        &self,
        proposer: &Address,
        hip_index: u64,
        response_index: u64,
    ) -> Result<&[u64], ContractError> {
        self.responses
            .get(&(proposer.clone(), hip_index))
            .and_then(|v| v.get(response_index as usize))
            .map(|r| r.response.as_slice())
            .ok_or(ContractError::OutOfRange)
    }

    pub fn responses_for(
        &self,
        proposer: &Address,
        hip_index: u64,
    ) -> Result<&[ResponseRecord], ContractError> {
        // distinguish a known task with no responses from an unknown one
        self.get_hip(proposer, hip_index)?;
        Ok(self
            .responses
            .get(&(proposer.clone(), hip_index))
            .map(|v| v.as_slice())
            .unwrap_or(&[]))
    }

    pub fn response_refs_of(&self, respondent: &Address) -> &[ResponseRef] {
        self.response_refs
            .get(respondent)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn owner(&self) -> Option<&Address> {
        self.owner.as_ref()
    }

    pub fn token_contract(&self) -> Option<&str> {
        self.token_contract.as_deref()
    }

    pub fn fees(&self) -> Option<&FeeSchedule> {
        self.fees.as_ref()
    }

    pub fn held_funds(&self) -> u64 {
        self.held_funds
    }

    pub fn proposers(&self) -> &[Address] {
        &self.proposers
    }

    /// Total currency visible to the contract plus all accounts.
    pub fn total_currency(&self, world: &WorldState) -> u128 {
        world.total_account_currency() + self.held_funds as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::EventKind;

    fn addr(s: &str) -> Address {
        Address::new(s)
    }

    fn setup() -> (ContractState, WorldState) {
        let mut contract = ContractState::new();
        let mut world = WorldState::new();
        contract
            .initialize(&addr("owner"), "nft", &[10, 20, 30, 100])
            .unwrap();
        world.credit(&addr("prop"), 1_000).unwrap();
        (contract, world)
    }

    #[test]
    fn initialize_readback_and_guards() {
        let mut c = ContractState::new();
        assert_eq!(c.initialize(&addr("owner"), "nft", &[10, 20, 30, 40]), Ok(false));
        assert_eq!(c.get_fee(1), Ok(20));
        assert_eq!(c.owner(), Some(&addr("owner")));
        assert_eq!(
            c.initialize(&addr("mallory"), "nft", &[0, 0, 0, 0]),
            Err(ContractError::NotOwner)
        );
        assert_eq!(c.get_fee(0), Ok(10));
        assert_eq!(
            c.initialize(&addr("owner"), "nft", &[1, 2, 3]),
            Err(ContractError::BadFeeSchedule)
        );
        // owner may re-initialize
        assert_eq!(c.initialize(&addr("owner"), "nft2", &[1, 2, 3, 4]), Ok(true));
        assert_eq!(c.get_fee(1), Ok(2));
        assert_eq!(c.token_contract(), Some("nft2"));
    }

    #[test]
    fn submit_hip_appends_and_charges() {
        let (mut c, mut w) = setup();
        let id = c
            .submit_hip(&mut w, &addr("prop"), HipType::Classification, 4, 2, 86_400, 100, None)
            .unwrap();
        assert_eq!(id, 0);
        assert_eq!(w.balance(&addr("prop")), 900);
        assert_eq!(c.held_funds(), 100);
        assert_eq!(c.get_num_proposers(), 1);
        assert_eq!(c.get_proposer(0), Ok(&addr("prop")));

        let id = c
            .submit_hip(&mut w, &addr("prop"), HipType::Choice, 2, 0, 60, 10, None)
            .unwrap();
        assert_eq!(id, 1);
        assert_eq!(c.get_hip_count(&addr("prop")), 2);
        assert_eq!(c.get_num_proposers(), 1);
        assert_eq!(w.events.iter().filter(|e| e.kind == EventKind::HipCreated).count(), 2);
    }

    #[test]
    fn submit_hip_rejections_are_atomic() {
        let (mut c, mut w) = setup();
        let before = (c.clone(), w.clone());
        assert_eq!(
            c.submit_hip(&mut w, &addr("prop"), HipType::Choice, 2, 0, 60, 9, None),
            Err(ContractError::WrongFee)
        );
        assert_eq!(
            c.submit_hip(&mut w, &addr("prop"), HipType::Choice, 1, 0, 60, 10, None),
            Err(ContractError::InvalidHip)
        );
        assert_eq!(
            c.submit_hip(&mut w, &addr("pauper"), HipType::Choice, 2, 0, 60, 10, None),
            Err(ContractError::InsufficientBalance)
        );
        assert_eq!((c, w), before);
    }

    #[test]
    fn uninitialized_contract_rejects_hips() {
        let mut c = ContractState::new();
        let mut w = WorldState::new();
        w.credit(&addr("prop"), 100).unwrap();
        assert_eq!(
            c.submit_hip(&mut w, &addr("prop"), HipType::Choice, 2, 0, 60, 10, None),
            Err(ContractError::NotInitialized)
        );
    }

    #[test]
    fn submit_response_guards_and_receipt() {
        let (mut c, mut w) = setup();
        c.submit_hip(&mut w, &addr("prop"), HipType::Classification, 2, 2, 100, 100, None)
            .unwrap();

        // no token
        assert_eq!(
            c.submit_response(&mut w, &addr("bob"), &addr("prop"), 0, &[0, 1]),
            Err(ContractError::NoToken)
        );
        w.mint_token(&addr("bob"), 1).unwrap();

        // unknown task
        assert_eq!(
            c.submit_response(&mut w, &addr("bob"), &addr("prop"), 9, &[0, 1]),
            Err(ContractError::UnknownHip)
        );
        assert_eq!(
            c.submit_response(&mut w, &addr("bob"), &addr("ghost"), 0, &[0, 1]),
            Err(ContractError::UnknownHip)
        );

        // invalid vector
        assert_eq!(
            c.submit_response(&mut w, &addr("bob"), &addr("prop"), 0, &[0, 2]),
            Err(ContractError::InvalidResponse)
        );

        let receipt = c
            .submit_response(&mut w, &addr("bob"), &addr("prop"), 0, &[0, 1])
            .unwrap();
        assert_eq!(receipt.number, 1);
        assert!(receipt.work > 0);
        assert_eq!(c.get_response(&addr("prop"), 0, 0), Ok(&[0u64, 1][..]));

        // single response per (respondent, task)
        assert_eq!(
            c.submit_response(&mut w, &addr("bob"), &addr("prop"), 0, &[1, 1]),
            Err(ContractError::AlreadyResponded)
        );

        // second respondent gets 1-based count 2
        w.mint_token(&addr("eve"), 1).unwrap();
        let receipt = c
            .submit_response(&mut w, &addr("eve"), &addr("prop"), 0, &[1, 0])
            .unwrap();
        assert_eq!(receipt.number, 2);
        assert_eq!(c.get_hip(&addr("prop"), 0).unwrap().num_responses, 2);
    }

    #[test]
    fn deadline_is_inclusive_for_responses() {
        let (mut c, mut w) = setup();
        c.submit_hip(&mut w, &addr("prop"), HipType::Choice, 3, 0, 100, 10, None)
            .unwrap();
        w.mint_token(&addr("bob"), 1).unwrap();
        w.mint_token(&addr("eve"), 1).unwrap();

        w.advance_time(100).unwrap();
        assert!(c.submit_response(&mut w, &addr("bob"), &addr("prop"), 0, &[2]).is_ok());

        w.advance_time(1).unwrap();
        assert_eq!(
            c.submit_response(&mut w, &addr("eve"), &addr("prop"), 0, &[0]),
            Err(ContractError::HipClosed)
        );
    }

    #[test]
    fn payment_split_and_dust() {
        let (mut c, mut w) = setup();
        c.submit_hip(&mut w, &addr("prop"), HipType::Classification, 2, 2, 100, 100, None)
            .unwrap();
        for r in ["r1", "r2", "r3"] {
            w.mint_token(&addr(r), 1).unwrap();
            c.submit_response(&mut w, &addr(r), &addr("prop"), 0, &[0, 1]).unwrap();
        }
        // still open: nothing to claim, ref stays
        assert_eq!(c.get_balance(&w, &addr("r1")), 0);
        assert_eq!(c.request_payment(&mut w, &addr("r1")), Ok(0));
        assert!(!c.response_refs_of(&addr("r1"))[0].is_settled());

        w.advance_time(101).unwrap();
        for r in ["r1", "r2", "r3"] {
            assert_eq!(c.get_balance(&w, &addr(r)), 33);
            assert_eq!(c.request_payment(&mut w, &addr(r)), Ok(33));
            assert_eq!(w.balance(&addr(r)), 33);
            // settlement is idempotent
            assert_eq!(c.get_balance(&w, &addr(r)), 0);
            assert_eq!(c.request_payment(&mut w, &addr(r)), Ok(0));
        }
        assert_eq!(c.held_funds(), 1); // 100 - 3*33
        assert!(c.response_refs_of(&addr("r1"))[0].is_settled());
    }

    #[test]
    fn two_way_split_is_exact() {
        let (mut c, mut w) = setup();
        c.submit_hip(&mut w, &addr("prop"), HipType::Classification, 2, 2, 10, 100, None)
            .unwrap();
        for r in ["r1", "r2"] {
            w.mint_token(&addr(r), 1).unwrap();
            c.submit_response(&mut w, &addr(r), &addr("prop"), 0, &[1, 1]).unwrap();
        }
        w.advance_time(11).unwrap();
        assert_eq!(c.request_payment(&mut w, &addr("r1")), Ok(50));
        assert_eq!(c.request_payment(&mut w, &addr("r2")), Ok(50));
        assert_eq!(c.held_funds(), 0);
        assert_eq!(c.total_currency(&w), 1_000);
    }

    #[test]
    fn open_refs_survive_an_early_claim() {
        let (mut c, mut w) = setup();
        // one short task, one long one
        c.submit_hip(&mut w, &addr("prop"), HipType::Choice, 2, 0, 10, 10, None).unwrap();
        c.submit_hip(&mut w, &addr("prop"), HipType::Choice, 2, 0, 1_000, 10, None).unwrap();
        w.mint_token(&addr("bob"), 1).unwrap();
        c.submit_response(&mut w, &addr("bob"), &addr("prop"), 0, &[0]).unwrap();
        c.submit_response(&mut w, &addr("bob"), &addr("prop"), 1, &[1]).unwrap();

        w.advance_time(11).unwrap();
        assert_eq!(c.request_payment(&mut w, &addr("bob")), Ok(10));
        // the ref to the still-open task was skipped, not dropped
        assert!(!c.response_refs_of(&addr("bob"))[1].is_settled());

        w.advance_time(1_000).unwrap();
        assert_eq!(c.request_payment(&mut w, &addr("bob")), Ok(10));
        assert_eq!(w.balance(&addr("bob")), 20);
    }

    #[test]
    fn transfer_overflow_reports_failed_send() {
        let (mut c, mut w) = setup();
        c.submit_hip(&mut w, &addr("prop"), HipType::Choice, 2, 0, 10, 10, None).unwrap();
        w.mint_token(&addr("rich"), 1).unwrap();
        c.submit_response(&mut w, &addr("rich"), &addr("prop"), 0, &[0]).unwrap();
        w.credit(&addr("rich"), u64::MAX).unwrap();
        w.advance_time(11).unwrap();
        let before_refs = c.response_refs_of(&addr("rich")).to_vec();
        assert_eq!(
            c.request_payment(&mut w, &addr("rich")),
            Err(ContractError::TransferFailed)
        );
        // nothing settled, still claimable
        assert_eq!(c.response_refs_of(&addr("rich")), before_refs.as_slice());
        assert_eq!(c.held_funds(), 10);
    }

    #[test]
    fn getters_report_out_of_range() {
        let (c, _w) = setup();
        assert_eq!(c.get_fee(4), Err(ContractError::OutOfRange));
        assert_eq!(c.get_proposer(0), Err(ContractError::OutOfRange));
        assert_eq!(c.get_response(&addr("prop"), 0, 0), Err(ContractError::OutOfRange));
        assert_eq!(c.get_hip_count(&addr("nobody")), 0);
    }
}

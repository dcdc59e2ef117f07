//! Deterministic transcript replay.
//!
//! Executes a transcript strictly in order against one contract/world
//! pair. Rejected contract transactions mirror reverts: the pre-instruction
//! state is restored bit-for-bit, a TX_REJECTED audit event is appended,
//! and the run continues. The report has a stable field order, so repeated
//! runs of the same scenario are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::aggregation::{
    aggregate_ranking, aggregate_scores, majority_classify, plurality, MajorityOutcome,
};
use crate::contract::ContractState;
use crate::export::{canonical_export, state_hash};
use crate::ledger::{EventKind, Event, WorldState};
use crate::scenario::{AggregationMethod, Instruction, QueryKind, ScenarioTranscript};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record the state hash after every instruction.
    pub hash_per_instruction: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Ok(String),
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionOutcome {
    pub line: usize,
    pub op: &'static str,
    pub outcome: Outcome,
    pub work: u64,
    pub state_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub outcomes: Vec<InstructionOutcome>,
    pub events: Vec<Event>,
    pub aggregations: Vec<String>,
    pub final_export: String,
    pub state_hash: String,
    pub total_work: u64,
}

impl Report {
    /// Stable, diff-friendly text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# hip-sim report");
        let _ = writeln!(out, "instructions={}", self.outcomes.len());
        let _ = writeln!(out, "\n[outcomes]");
        for o in &self.outcomes {
            let _ = write!(out, "line={}\top={}", o.line, o.op);
            match &o.outcome {
                Outcome::Ok(detail) => {
                    let _ = write!(out, "\tstatus=ok\t{detail}");
                }
                Outcome::Rejected(reason) => {
                    let _ = write!(out, "\tstatus=rejected\treason={reason}");
                }
            }
            let _ = write!(out, "\twork={}", o.work);
            if let Some(hash) = &o.state_hash {
                let _ = write!(out, "\thash={hash}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "\n[events]");
        for e in &self.events {
            let _ = writeln!(out, "{}", e.to_line());
        }
        let _ = writeln!(out, "\n[aggregations]");
        for a in &self.aggregations {
            let _ = writeln!(out, "{a}");
        }
        let _ = writeln!(out, "\n[state]");
        out.push_str(&self.final_export);
        let _ = writeln!(out, "\n[summary]");
        let _ = writeln!(out, "total_work={}", self.total_work);
        let _ = writeln!(out, "state_hash={}", self.state_hash);
        out
    }
}

fn join(values: &[u64]) -> String {
    if values.is_empty() {
        return "-".to_string();
    }
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn render_aggregation(
    contract: &ContractState,
    instruction: &Instruction,
) -> Result<String, String> {
    let (proposer, hip_id, method) = match instruction {
        Instruction::Aggregate { proposer, hip_id, method } => (proposer, *hip_id, *method),
        _ => unreachable!("aggregation renderer on non-aggregate instruction"),
    };
    let spec = contract
        .get_hip(proposer, hip_id)
        .map_err(|e| e.to_string())?;
    let n = spec.num_alternatives;
    let k = spec.num_classes;
    let responses: Vec<Vec<u64>> = contract
        .responses_for(proposer, hip_id)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| r.response.clone())
        .collect();

    let detail = match method {
        AggregationMethod::Plurality => {
            let t = plurality(&responses, n).map_err(|e| e.to_string())?;
            format!("counts={} winners={}", join(&t.counts), join(&t.winners))
        }
        AggregationMethod::Borda => {
            let t = aggregate_ranking(&responses, n).map_err(|e| e.to_string())?;
            let order = if t.order.is_empty() {
                "-".to_string()
            } else {
                t.order
                    .iter()
                    .map(|tier| {
                        tier.iter()
                            .map(|a| a.to_string())
                            .collect::<Vec<_>>()
                            .join("=")
                    })
                    .collect::<Vec<_>>()
                    .join(">")
            };
            format!("scores={} order={order}", join(&t.scores))
        }
        AggregationMethod::Scores => {
            let t = aggregate_scores(&responses, n, k).map_err(|e| e.to_string())?;
            let means = t
                .means
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",");
            format!("means={means} medians={}", join(&t.medians))
        }
        AggregationMethod::Majority => {
            let t = majority_classify(&responses, n, k).map_err(|e| e.to_string())?;
            let classes = t
                .outcomes
                .iter()
                .map(|o| match o {
                    MajorityOutcome::Class(c) => c.to_string(),
                    MajorityOutcome::Tie(set) => format!(
                        "tie({})",
                        set.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("|")
                    ),
                })
                .collect::<Vec<_>>()
                .join(",");
            format!("classes={classes}")
        }
    };
    Ok(format!(
        "proposer={proposer} hip_id={hip_id} method={} {detail}",
        method.as_str()
    ))
}

fn apply(
    contract: &mut ContractState,
    world: &mut WorldState,
    instruction: &Instruction,
) -> Result<(String, u64), String> {
    match instruction {
        Instruction::Init { owner, token, fees } => {
            let reinit = contract
                .initialize(owner, token, fees)
                .map_err(|e| e.to_string())?;
            let detail = if reinit {
                "re-initialized (warning: token gate and fee schedule replaced)"
            } else {
                "initialized"
            };
            Ok((detail.to_string(), 0))
        }
        Instruction::MintToken { addr, count } => {
            world.mint_token(addr, *count).map_err(|e| e.to_string())?;
            Ok((format!("tokens={}", world.token_balance(addr)), 0))
        }
        Instruction::Fund { addr, amount } => {
            world.credit(addr, *amount).map_err(|e| e.to_string())?;
            Ok((format!("balance={}", world.balance(addr)), 0))
        }
        Instruction::Advance { seconds } => {
            let now = world.advance_time(*seconds).map_err(|e| e.to_string())?;
            Ok((format!("now={now}"), 0))
        }
        Instruction::SubmitHip {
            sender,
            hip_type,
            num_alternatives,
            num_classes,
            duration,
            payment,
            semantic_ref,
        } => {
            let hip_id = contract
                .submit_hip(
                    world,
                    sender,
                    *hip_type,
                    *num_alternatives,
                    *num_classes,
                    *duration,
                    *payment,
                    semantic_ref.as_deref(),
                )
                .map_err(|e| e.to_string())?;
            Ok((format!("hip_id={hip_id}"), 0))
        }
        Instruction::SubmitResponse { sender, proposer, hip_id, values } => {
            let receipt = contract
                .submit_response(world, sender, proposer, *hip_id, values)
                .map_err(|e| e.to_string())?;
            Ok((format!("response_number={}", receipt.number), receipt.work))
        }
        Instruction::RequestPayment { sender } => {
            let paid = contract
                .request_payment(world, sender)
                .map_err(|e| e.to_string())?;
            Ok((format!("paid={paid}"), 0))
        }
        Instruction::Query(query) => {
            let detail = match query {
                QueryKind::NumProposers => {
                    format!("num_proposers={}", contract.get_num_proposers())
                }
                QueryKind::Fee { index } => format!(
                    "fee={}",
                    contract.get_fee(*index as usize).map_err(|e| e.to_string())?
                ),
                QueryKind::Proposer { index } => format!(
                    "proposer={}",
                    contract
                        .get_proposer(*index as usize)
                        .map_err(|e| e.to_string())?
                ),
                QueryKind::HipCount { proposer } => {
                    format!("hip_count={}", contract.get_hip_count(proposer))
                }
                QueryKind::Response { proposer, hip_id, index } => {
                    let values = contract
                        .get_response(proposer, *hip_id, *index)
                        .map_err(|e| e.to_string())?;
                    format!("values={}", join(values))
                }
                QueryKind::Balance { sender } => {
                    format!("pending={}", contract.get_balance(world, sender))
                }
            };
            Ok((detail, 0))
        }
        Instruction::Aggregate { .. } => {
            let detail = render_aggregation(contract, instruction)?;
            Ok((detail, 0))
        }
    }
}

pub fn run(transcript: &ScenarioTranscript, options: &RunOptions) -> Report {
    let mut contract = ContractState::new();
    let mut world = WorldState::new();
    let mut outcomes = Vec::with_capacity(transcript.instructions.len());
    let mut aggregations = Vec::new();
    let mut total_work = 0u64;

    for (line, instruction) in &transcript.instructions {
        let snapshot = (contract.clone(), world.clone());
        let (outcome, work) = match apply(&mut contract, &mut world, instruction) {
            Ok((detail, work)) => {
                if matches!(instruction, Instruction::Aggregate { .. }) {
                    aggregations.push(format!("line={line} {detail}"));
                }
                (Outcome::Ok(detail), work)
            }
            Err(reason) => {
                (contract, world) = snapshot;
                let mut payload = BTreeMap::new();
                payload.insert("op".to_string(), instruction.kind().to_string());
                payload.insert("reason".to_string(), reason.clone());
                world.emit_event(EventKind::TxRejected, payload);
                (Outcome::Rejected(reason), 0)
            }
        };
        total_work += work;
        outcomes.push(InstructionOutcome {
            line: *line,
            op: instruction.kind(),
            outcome,
            work,
            state_hash: options
                .hash_per_instruction
                .then(|| state_hash(&world, &contract)),
        });
    }

    let final_export = canonical_export(&world, &contract);
    let hash = state_hash(&world, &contract);
    Report {
        outcomes,
        events: world.events.clone(),
        aggregations,
        final_export,
        state_hash: hash,
        total_work,
    }
}

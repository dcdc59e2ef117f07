//! Line-delimited scenario transcript format.
//!
//! One instruction per line: an uppercase kind followed by `key=value`
//! fields. `#` starts a comment, blank lines are skipped. Unknown kinds,
//! missing fields, and malformed values are load-time errors reported with
//! their line number. See docs/scenario-format.md for the grammar.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::ledger::Address;
use crate::model::HipType;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryKind {
    NumProposers,
    Fee { index: u64 },
    Proposer { index: u64 },
    HipCount { proposer: Address },
    Response { proposer: Address, hip_id: u64, index: u64 },
    Balance { sender: Address },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationMethod {
    Plurality,
    Borda,
    Scores,
    Majority,
}

impl AggregationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plurality => "plurality",
            Self::Borda => "borda",
            Self::Scores => "scores",
            Self::Majority => "majority",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plurality" => Some(Self::Plurality),
            "borda" => Some(Self::Borda),
            "scores" => Some(Self::Scores),
            "majority" => Some(Self::Majority),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Init {
        owner: Address,
        token: String,
        fees: Vec<u64>,
    },
    MintToken {
        addr: Address,
        count: u64,
    },
    Fund {
        addr: Address,
        amount: u64,
    },
    Advance {
        seconds: u64,
    },
    SubmitHip {
        sender: Address,
        hip_type: HipType,
        num_alternatives: u64,
        num_classes: u64,
        duration: u64,
        payment: u64,
        semantic_ref: Option<String>,
    },
    SubmitResponse {
        sender: Address,
        proposer: Address,
        hip_id: u64,
        values: Vec<u64>,
    },
    RequestPayment {
        sender: Address,
    },
    Query(QueryKind),
    Aggregate {
        proposer: Address,
        hip_id: u64,
        method: AggregationMethod,
    },
}

impl Instruction {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Init { .. } => "INIT",
            Self::MintToken { .. } => "MINT_TOKEN",
            Self::Fund { .. } => "FUND",
            Self::Advance { .. } => "ADVANCE",
            Self::SubmitHip { .. } => "SUBMIT_HIP",
            Self::SubmitResponse { .. } => "SUBMIT_RESPONSE",
            Self::RequestPayment { .. } => "REQUEST_PAYMENT",
            Self::Query(_) => "QUERY",
            Self::Aggregate { .. } => "AGGREGATE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioTranscript {
    /// (1-based source line, instruction)
    pub instructions: Vec<(usize, Instruction)>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: unknown instruction '{kind}'")]
    UnknownInstruction { line: usize, kind: String },
    #[error("line {line}: missing field '{field}'")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: bad value '{value}' for field '{field}'")]
    BadValue { line: usize, field: &'static str, value: String },
    #[error("line {line}: expected key=value, got '{token}'")]
    Malformed { line: usize, token: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

struct Fields<'a> {
    line: usize,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn opt(&self, field: &'static str) -> Option<&'a str> {
        self.map.get(field).copied()
    }

    fn req(&self, field: &'static str) -> Result<&'a str, ScenarioError> {
        self.opt(field)
            .ok_or(ScenarioError::MissingField { line: self.line, field })
    }

    fn req_u64(&self, field: &'static str) -> Result<u64, ScenarioError> {
        let raw = self.req(field)?;
        raw.parse().map_err(|_| ScenarioError::BadValue {
            line: self.line,
            field,
            value: raw.to_string(),
        })
    }

    fn req_addr(&self, field: &'static str) -> Result<Address, ScenarioError> {
        Ok(Address::new(self.req(field)?))
    }

    fn req_u64_list(&self, field: &'static str) -> Result<Vec<u64>, ScenarioError> {
        let raw = self.req(field)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|part| {
                part.parse().map_err(|_| ScenarioError::BadValue {
                    line: self.line,
                    field,
                    value: raw.to_string(),
                })
            })
            .collect()
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioTranscript, ScenarioError> {
    let mut instructions = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let kind = tokens.next().expect("non-empty line");
        let mut map = BTreeMap::new();
        for token in tokens {
            let (k, v) = token.split_once('=').ok_or_else(|| ScenarioError::Malformed {
                line,
                token: token.to_string(),
            })?;
            map.insert(k, v);
        }
        let fields = Fields { line, map };
        let instruction = parse_instruction(kind, &fields)?;
        instructions.push((line, instruction));
    }
    Ok(ScenarioTranscript { instructions })
}

fn parse_instruction(kind: &str, f: &Fields<'_>) -> Result<Instruction, ScenarioError> {
    match kind {
        "INIT" => Ok(Instruction::Init {
            owner: f.req_addr("owner")?,
            token: f.opt("token").unwrap_or("nft").to_string(),
            fees: f.req_u64_list("fees")?,
        }),
        "MINT_TOKEN" => Ok(Instruction::MintToken {
            addr: f.req_addr("addr")?,
            count: f.req_u64("count")?,
        }),
        "FUND" => Ok(Instruction::Fund {
            addr: f.req_addr("addr")?,
            amount: f.req_u64("amount")?,
        }),
        "ADVANCE" => Ok(Instruction::Advance {
            seconds: f.req_u64("seconds")?,
        }),
        "SUBMIT_HIP" => {
            let raw_type = f.req("type")?;
            let hip_type = HipType::parse(raw_type).ok_or_else(|| ScenarioError::BadValue {
                line: f.line,
                field: "type",
                value: raw_type.to_string(),
            })?;
            Ok(Instruction::SubmitHip {
                sender: f.req_addr("sender")?,
                hip_type,
                num_alternatives: f.req_u64("n")?,
                num_classes: f.req_u64("k")?,
                duration: f.req_u64("duration")?,
                payment: f.req_u64("payment")?,
                semantic_ref: f.opt("semantic_ref").map(str::to_string),
            })
        }
        "SUBMIT_RESPONSE" => Ok(Instruction::SubmitResponse {
            sender: f.req_addr("sender")?,
            proposer: f.req_addr("proposer")?,
            hip_id: f.req_u64("hip_id")?,
            values: f.req_u64_list("values")?,
        }),
        "REQUEST_PAYMENT" => Ok(Instruction::RequestPayment {
            sender: f.req_addr("sender")?,
        }),
        "QUERY" => {
            let raw_kind = f.req("kind")?;
            let query = match raw_kind {
                "num_proposers" => QueryKind::NumProposers,
                "fee" => QueryKind::Fee { index: f.req_u64("index")? },
                "proposer" => QueryKind::Proposer { index: f.req_u64("index")? },
                "hip_count" => QueryKind::HipCount { proposer: f.req_addr("proposer")? },
                "response" => QueryKind::Response {
                    proposer: f.req_addr("proposer")?,
                    hip_id: f.req_u64("hip_id")?,
                    index: f.req_u64("index")?,
                },
                "balance" => QueryKind::Balance { sender: f.req_addr("sender")? },
                other => {
                    return Err(ScenarioError::BadValue {
                        line: f.line,
                        field: "kind",
                        value: other.to_string(),
                    })
                }
            };
            Ok(Instruction::Query(query))
        }
        "AGGREGATE" => {
            let raw_method = f.req("method")?;
            let method =
                AggregationMethod::parse(raw_method).ok_or_else(|| ScenarioError::BadValue {
                    line: f.line,
                    field: "method",
                    value: raw_method.to_string(),
                })?;
            Ok(Instruction::Aggregate {
                proposer: f.req_addr("proposer")?,
                hip_id: f.req_u64("hip_id")?,
                method,
            })
        }
        other => Err(ScenarioError::UnknownInstruction {
            line: f.line,
            kind: other.to_string(),
        }),
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioTranscript, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

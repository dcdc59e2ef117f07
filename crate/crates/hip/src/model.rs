//! Task domain model: preference types, the task record, and the fee schedule.

use std::fmt;

use thiserror::Error;

/// Upper bound on alternative and class counts accepted at task creation.
pub const DEFAULT_DIMENSION_LIMIT: u64 = 10_000;

/// The four preference structures a task can solicit.
///
/// Ordinal codes are stable and index the fee schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HipType {
    Choice = 0,
    Ranking = 1,
    Sorting = 2,
    Classification = 3,
}

impl HipType {
    pub const ALL: [HipType; 4] = [
        HipType::Choice,
        HipType::Ranking,
        HipType::Sorting,
        HipType::Classification,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(code: u64) -> Option<Self> {
        match code {
            0 => Some(Self::Choice),
            1 => Some(Self::Ranking),
            2 => Some(Self::Sorting),
            3 => Some(Self::Classification),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Choice => "CHOICE",
            Self::Ranking => "RANKING",
            Self::Sorting => "SORTING",
            Self::Classification => "CLASSIFICATION",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "CHOICE" => Some(Self::Choice),
            "RANKING" => Some(Self::Ranking),
            "SORTING" => Some(Self::Sorting),
            "CLASSIFICATION" => Some(Self::Classification),
            _ => None,
        }
    }

    /// Whether the class count is semantically meaningful for this type.
    /// Choices and rankings store a class count but never check it.
    pub fn uses_classes(self) -> bool {
        matches!(self, Self::Sorting | Self::Classification)
    }
}

impl fmt::Display for HipType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The on-chain record of one task.
///
/// `creation_date` and `duration` are fixed at creation; only
/// `num_responses` changes afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HipSpec {
    pub hip_type: HipType,
    pub num_alternatives: u64,
    pub num_classes: u64,
    pub creation_date: u64,
    pub duration: u64,
    pub num_responses: u64,
}

impl HipSpec {
    /// Last second (inclusive) at which responses are accepted.
    pub fn deadline(&self) -> u128 {
        self.creation_date as u128 + self.duration as u128
    }

    /// Response gate: inclusive of the deadline itself.
    pub fn accepts_responses_at(&self, now: u64) -> bool {
        (now as u128) <= self.deadline()
    }

    /// Payout gate: strictly after the deadline.
    pub fn pays_out_at(&self, now: u64) -> bool {
        (now as u128) > self.deadline()
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SpecError {
    /// Matches the contract revert reason for a degenerate task.
    #[error("Trivial or invalid HIP")]
    Invalid,
}

/// Well-formedness of a `(type, n, k)` triplet, with the default size limit.
pub fn validate_spec(
    hip_type: HipType,
    num_alternatives: u64,
    num_classes: u64,
) -> Result<(), SpecError> {
    validate_spec_bounded(hip_type, num_alternatives, num_classes, DEFAULT_DIMENSION_LIMIT)
}

/// Well-formedness with an explicit upper bound on `n` and `k`.
///
/// `n >= 2` always; `k >= 2` only for sorting and classification. The class
/// count is otherwise ignored (it is stored verbatim but never checked for
/// choices and rankings), except that oversized values are rejected for
/// every type to keep validation costs bounded.
pub fn validate_spec_bounded(
    hip_type: HipType,
    num_alternatives: u64,
    num_classes: u64,
    limit: u64,
) -> Result<(), SpecError> {
    if num_alternatives < 2 || num_alternatives > limit || num_classes > limit {
        return Err(SpecError::Invalid);
    }
    if hip_type.uses_classes() && num_classes < 2 {
        return Err(SpecError::Invalid);
    }
    Ok(())
}

/// Per-type fee table, fixed at initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeeSchedule([u64; 4]);

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("fee schedule must have exactly 4 entries")]
pub struct FeeScheduleLength;

impl FeeSchedule {
    pub fn new(fees: [u64; 4]) -> Self {
        Self(fees)
    }

    pub fn from_slice(fees: &[u64]) -> Result<Self, FeeScheduleLength> {
        let arr: [u64; 4] = fees.try_into().map_err(|_| FeeScheduleLength)?;
        Ok(Self(arr))
    }

    pub fn fee(&self, hip_type: HipType) -> u64 {
        self.0[hip_type.ordinal()]
    }

    pub fn get(&self, index: usize) -> Option<u64> {
        self.0.get(index).copied()
    }

    pub fn as_array(&self) -> &[u64; 4] {
        &self.0
    }
}

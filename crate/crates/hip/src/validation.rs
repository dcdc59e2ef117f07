//! Response validity rules.
//!
//! A response is an array `R` of unsigned integers. Per task type:
//!
//! - choice: `len(R) == 1` and `R[0] < n`
//! - ranking: `len(R) == n` and `R` is a permutation of `0..n`
//! - sorting / classification: `len(R) == n` and every element `< k`
//!
//! The permutation check uses a visited-flag array of size `bound`, one pass
//! over the input. Each function also reports abstract work units (array
//! elements touched, plus the flag allocation) so asymptotic behavior is
//! measurable without gas.

use thiserror::Error;

use crate::model::{HipSpec, HipType};

/// Raw submitted preference structure.
pub type ResponseVector = Vec<u64>;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ResponseError {
    /// Matches the contract revert reason.
    #[error("Invalid response")]
    Invalid,
}

/// True iff every element is strictly below `bound`.
pub fn right_digits(response: &[u64], bound: u64) -> bool {
    right_digits_counted(response, bound).0
}

pub fn right_digits_counted(response: &[u64], bound: u64) -> (bool, u64) {
    let mut work = 0u64;
    for &r in response {
        work += 1;
        if r >= bound {
            return (false, work);
        }
    }
    (true, work)
}

/// True iff every element is strictly below `bound` and all are distinct.
pub fn unique_digits(response: &[u64], bound: u64) -> bool {
    unique_digits_counted(response, bound).0
}

pub fn unique_digits_counted(response: &[u64], bound: u64) -> (bool, u64) {
    let mut visited = vec![false; bound as usize];
    let mut work = bound; // flag array allocation
    for &r in response {
        work += 1;
        if r >= bound || visited[r as usize] {
            return (false, work);
        }
        visited[r as usize] = true;
    }
    (true, work)
}

/// Whether `response` is a valid answer to the task described by `spec`.
pub fn validate_response(spec: &HipSpec, response: &[u64]) -> Result<(), ResponseError> {
    validate_response_counted(spec, response).0
}

pub fn validate_response_counted(
    spec: &HipSpec,
    response: &[u64],
) -> (Result<(), ResponseError>, u64) {
    let n = spec.num_alternatives;
    let (ok, work) = match spec.hip_type {
        HipType::Choice => (
            response.len() == 1 && response[0] < n,
            1,
        ),
        HipType::Ranking => {
            if response.len() as u64 != n {
                (false, 0)
            } else {
                unique_digits_counted(response, n)
            }
        }
        HipType::Sorting | HipType::Classification => {
            if response.len() as u64 != n {
                (false, 0)
            } else {
                right_digits_counted(response, spec.num_classes)
            }
        }
    };
    if ok {
        (Ok(()), work)
    } else {
        (Err(ResponseError::Invalid), work)
    }
}

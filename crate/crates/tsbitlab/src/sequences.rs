//! Constructors and predicates for extremal bit sequences.
//!
//! A worst-case sequence follows the ratio rule bit by bit: after a prefix
//! with counts `(O, Z)` the admissible next bits are determined by comparing
//! `(O+1)/(Z+1)` against `q/(1-q)`. The head of a sequence is its longest
//! admissible prefix; a sequence is worst-case when everything after the head
//! is a constant run. Best-case sequences are the block sequences
//! `1^n 0^m` / `0^m 1^n`.
//!
//! All ratio comparisons are exact integer cross-multiplications.

use crate::error::Error;
use crate::prediction::{BitSequence, TradeoffParameter};

/// Set of bits that keep a prefix on the worst-case track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqVerdict {
    Zero,
    One,
    Both,
}

impl HqVerdict {
    pub fn allows(&self, bit: u8) -> bool {
        matches!(
            (self, bit),
            (HqVerdict::Zero, 0) | (HqVerdict::One, 1) | (HqVerdict::Both, _)
        )
    }
}

/// Admissible next bits after a prefix with counts `(ones, zeros)`:
/// `{0}` if `(O+1)/(Z+1) > q/(1-q)`, `{1}` if `<`, both if equal.
pub fn hq(ones: u64, zeros: u64, q: TradeoffParameter) -> Result<HqVerdict, Error> {
    if q.is_one() {
        return Err(Error::Domain("q = 1 makes the ratio q/(1-q) undefined".into()));
    }
    // (O+1)(1-q) vs (Z+1) q, cross-multiplied.
    let lhs = (ones as u128 + 1) * (q.denom() - q.numer()) as u128;
    let rhs = (zeros as u128 + 1) * q.numer() as u128;
    Ok(match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => HqVerdict::Zero,
        std::cmp::Ordering::Less => HqVerdict::One,
        std::cmp::Ordering::Equal => HqVerdict::Both,
    })
}

/// Head/tail split of a sequence and the worst-case predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceDecomposition {
    /// Length of the longest admissible prefix.
    pub head_len: usize,
    /// The constant tail bit, when the sequence is worst-case and the tail is
    /// nonempty.
    pub tail_bit: Option<u8>,
    pub is_worst_case: bool,
}

/// Compute the head length and worst-case predicate of `seq` under `q`.
pub fn decompose(seq: &BitSequence, q: TradeoffParameter) -> Result<SequenceDecomposition, Error> {
    let mut head_len = seq.len();
    for t in 1..=seq.len() {
        let verdict = hq(seq.ones(t - 1), seq.zeros(t - 1), q)?;
        if !verdict.allows(seq.bit(t)) {
            head_len = t - 1;
            break;
        }
    }
    let tail = &seq.bits()[head_len..];
    let is_worst_case = tail.windows(2).all(|w| w[0] == w[1]);
    let tail_bit = if is_worst_case { tail.first().copied() } else { None };
    Ok(SequenceDecomposition { head_len, tail_bit, is_worst_case })
}

/// Tail bit of a worst-case sequence of length `t_len` with `k` zeros:
/// ones iff `k <= (1-q) t_len - q`, by exact comparison
/// `k q_den <= (q_den - q_num) t_len - q_num`.
pub fn tail_fill_bit(t_len: u64, k: u64, q: TradeoffParameter) -> u8 {
    let lhs = k as u128 * q.denom() as u128;
    let rhs = (q.denom() - q.numer()) as u128 * t_len as u128;
    if lhs + q.numer() as u128 <= rhs {
        1
    } else {
        0
    }
}

/// Build a worst-case sequence of length `t_len` with exactly `k` zeros.
///
/// The head follows the ratio rule, taking `tie_choice` whenever both bits are
/// admissible, until the budget of the bit complementary to the tail is
/// exhausted; the remainder is padded with the tail bit. Surfaces an error if
/// no such prefix point exists within `t_len` steps or the construction fails
/// validation.
pub fn gen_worst(
    t_len: u64,
    k: u64,
    q: TradeoffParameter,
    tie_choice: u8,
) -> Result<BitSequence, Error> {
    if q.is_zero() || q.is_one() {
        return Err(Error::Domain(
            "worst-case generation requires q strictly inside (0,1)".into(),
        ));
    }
    if k > t_len {
        return Err(Error::Domain(format!("k={k} exceeds T={t_len}")));
    }
    if tie_choice > 1 {
        return Err(Error::Domain(format!("tie_choice must be 0 or 1, got {tie_choice}")));
    }
    let tail_bit = tail_fill_bit(t_len, k, q);
    // Budget of the bit the tail will not supply.
    let budget = if tail_bit == 1 { k } else { t_len - k };
    let mut bits = Vec::with_capacity(t_len as usize);
    let (mut ones, mut zeros) = (0u64, 0u64);
    let mut scarce_used = 0u64;
    while scarce_used < budget {
        if bits.len() as u64 >= t_len {
            return Err(Error::Infeasible(format!(
                "head did not exhaust the budget of {budget} within T={t_len} (T={t_len}, k={k}, q={q})"
            )));
        }
        let bit = match hq(ones, zeros, q)? {
            HqVerdict::Zero => 0,
            HqVerdict::One => 1,
            HqVerdict::Both => tie_choice,
        };
        bits.push(bit);
        if bit == 1 {
            ones += 1;
        } else {
            zeros += 1;
        }
        if bit != tail_bit {
            scarce_used += 1;
        }
    }
    bits.resize(t_len as usize, tail_bit);
    let seq = BitSequence::new(bits)?;
    // The stopping rule realizes the sequence constructively; certify it.
    if seq.total_zeros() != k {
        return Err(Error::Infeasible(format!(
            "construction for (T={t_len}, k={k}, q={q}) produced {} zeros",
            seq.total_zeros()
        )));
    }
    if !decompose(&seq, q)?.is_worst_case {
        return Err(Error::Infeasible(format!(
            "construction for (T={t_len}, k={k}, q={q}) is not a worst-case sequence"
        )));
    }
    Ok(seq)
}

/// Lowest-regret block sequence: `1^(T-k) 0^k` when `q k <= (1-q)(T-k)`,
/// otherwise `0^k 1^(T-k)`.
pub fn gen_best(t_len: u64, k: u64, q: TradeoffParameter) -> Result<BitSequence, Error> {
    if k > t_len {
        return Err(Error::Domain(format!("k={k} exceeds T={t_len}")));
    }
    let n = t_len - k;
    let ones_first =
        q.numer() as u128 * k as u128 <= (q.denom() - q.numer()) as u128 * n as u128;
    let mut bits = Vec::with_capacity(t_len as usize);
    if ones_first {
        bits.extend(std::iter::repeat(1u8).take(n as usize));
        bits.extend(std::iter::repeat(0u8).take(k as usize));
    } else {
        bits.extend(std::iter::repeat(0u8).take(k as usize));
        bits.extend(std::iter::repeat(1u8).take(n as usize));
    }
    BitSequence::new(bits)
}

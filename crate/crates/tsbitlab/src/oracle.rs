//! Exact-rational brute-force ground truth at desk scale.
//!
//! Enumerates every sequence of a given length and zero count in a fixed
//! lexicographic order, evaluates the exact rational regret of each, and
//! certifies the characterization claims (extremal sets, the swap sign rule,
//! the closed-form swap delta) with no epsilon anywhere.

use itertools::Itertools;
use num_rational::BigRational;

use crate::error::Error;
use crate::prediction::{
    effect_of_difference, regret_exact, swap_comparison, swap_delta_closed_form_exact,
    BitSequence, TradeoffParameter,
};
use crate::sequences::decompose;

/// Hard cap on the number of sequences a single enumeration may scan.
pub const ENUMERATION_BUDGET: u64 = 2_000_000;

/// Extremal sequences among all length-`t_len` sequences with `k` zeros.
#[derive(Debug, Clone)]
pub struct ExtremalReport {
    pub t_len: u64,
    pub k: u64,
    pub q: TradeoffParameter,
    /// All sequences attaining the maximum regret, in lexicographic order.
    pub argmax_set: Vec<BitSequence>,
    pub argmin_set: Vec<BitSequence>,
    pub max_regret: BigRational,
    pub min_regret: BigRational,
    pub sequences_scanned: u64,
}

fn binomial_count(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Visit every sequence of length `t_len` with `k` zeros, lexicographically.
fn for_each_sequence<F>(t_len: u64, k: u64, mut f: F) -> Result<u64, Error>
where
    F: FnMut(&BitSequence) -> Result<(), Error>,
{
    let mut scanned = 0u64;
    // Combinations of zero positions, in a fixed deterministic order;
    // extremal sets are sorted afterwards so results never depend on it.
    for zero_positions in (0..t_len as usize).combinations(k as usize) {
        let mut bits = vec![1u8; t_len as usize];
        for &p in &zero_positions {
            bits[p] = 0;
        }
        let seq = BitSequence::new(bits)?;
        f(&seq)?;
        scanned += 1;
    }
    Ok(scanned)
}

/// Enumerate all sequences with `k` zeros and report the exact extremal sets.
pub fn enumerate_extremal(
    t_len: u64,
    k: u64,
    q: TradeoffParameter,
) -> Result<ExtremalReport, Error> {
    if k > t_len {
        return Err(Error::Domain(format!("k={k} exceeds T={t_len}")));
    }
    let candidates = binomial_count(t_len, k);
    if candidates > ENUMERATION_BUDGET {
        return Err(Error::Budget { candidates, budget: ENUMERATION_BUDGET });
    }
    let mut max_regret: Option<BigRational> = None;
    let mut min_regret: Option<BigRational> = None;
    let mut argmax: Vec<BitSequence> = Vec::new();
    let mut argmin: Vec<BitSequence> = Vec::new();
    let scanned = for_each_sequence(t_len, k, |seq| {
        let r = regret_exact(seq, q)?.regret;
        match &max_regret {
            Some(m) if &r < m => {}
            Some(m) if &r == m => argmax.push(seq.clone()),
            _ => {
                max_regret = Some(r.clone());
                argmax = vec![seq.clone()];
            }
        }
        match &min_regret {
            Some(m) if &r > m => {}
            Some(m) if &r == m => argmin.push(seq.clone()),
            _ => {
                min_regret = Some(r);
                argmin = vec![seq.clone()];
            }
        }
        Ok(())
    })?;
    if scanned == 0 {
        return Err(Error::Domain(format!("no sequences of length {t_len} with {k} zeros")));
    }
    argmax.sort();
    argmin.sort();
    Ok(ExtremalReport {
        t_len,
        k,
        q,
        argmax_set: argmax,
        argmin_set: argmin,
        max_regret: max_regret.expect("nonempty scan"),
        min_regret: min_regret.expect("nonempty scan"),
        sequences_scanned: scanned,
    })
}

/// Outcome of a characterization check: either everything matched, or the
/// first offending sequence is returned.
#[derive(Debug, Clone)]
pub struct Verification {
    pub ok: bool,
    pub counterexample: Option<BitSequence>,
    pub detail: String,
}

impl Verification {
    fn pass(detail: impl Into<String>) -> Self {
        Self { ok: true, counterexample: None, detail: detail.into() }
    }

    fn fail(seq: &BitSequence, detail: impl Into<String>) -> Self {
        Self { ok: false, counterexample: Some(seq.clone()), detail: detail.into() }
    }
}

/// Check that the exact argmax set equals the worst-case predicate set and
/// that all its members share one exact regret.
pub fn verify_worst_characterization(
    t_len: u64,
    k: u64,
    q: TradeoffParameter,
) -> Result<Verification, Error> {
    let report = enumerate_extremal(t_len, k, q)?;
    let mut predicate_set: Vec<BitSequence> = Vec::new();
    for_each_sequence(t_len, k, |seq| {
        if decompose(seq, q)?.is_worst_case {
            predicate_set.push(seq.clone());
        }
        Ok(())
    })?;
    predicate_set.sort();
    if report.argmax_set != predicate_set {
        let offender = predicate_set
            .iter()
            .find(|s| !report.argmax_set.contains(s))
            .or_else(|| report.argmax_set.iter().find(|s| !predicate_set.contains(s)))
            .cloned()
            .unwrap_or_else(|| report.argmax_set[0].clone());
        return Ok(Verification::fail(
            &offender,
            format!(
                "argmax set ({} members) differs from worst-case predicate set ({} members) at T={t_len}, k={k}, q={q}",
                report.argmax_set.len(),
                predicate_set.len()
            ),
        ));
    }
    // Members of one argmax set share the max regret by construction; the
    // predicate set equaling it is the equal-regret claim.
    Ok(Verification::pass(format!(
        "argmax set = worst-case set ({} sequences, regret {})",
        report.argmax_set.len(),
        report.max_regret
    )))
}

/// Exhaustively check the swap sign rule and the closed-form delta over all
/// sequences of length `t_len` and all swap positions with unequal neighbors.
pub fn verify_swap_lemma(t_len: u64, q: TradeoffParameter) -> Result<Verification, Error> {
    if t_len > 16 {
        return Err(Error::Domain(format!("exhaustive swap check capped at T=16, got {t_len}")));
    }
    let mut pairs_checked = 0u64;
    for mask in 0..(1u64 << t_len) {
        let bits: Vec<u8> = (0..t_len).map(|i| ((mask >> i) & 1) as u8).collect();
        let seq = BitSequence::new(bits)?;
        let base = regret_exact(&seq, q)?.regret;
        for t in 1..t_len as usize {
            let (a, b) = (seq.bit(t), seq.bit(t + 1));
            if a == b {
                continue;
            }
            let swapped = seq.swap(t)?;
            let swapped_regret = regret_exact(&swapped, q)?.regret;
            let diff = &swapped_regret - &base;
            let predicted = swap_comparison(seq.ones(t - 1), seq.zeros(t - 1), q, a)?;
            if effect_of_difference(&diff) != predicted {
                return Ok(Verification::fail(
                    &seq,
                    format!(
                        "sign rule mismatch at t={t}: predicted {predicted:?}, regrets {base} vs {swapped_regret}"
                    ),
                ));
            }
            // base - swapped must equal the closed form exactly.
            let closed = swap_delta_closed_form_exact(seq.ones(t - 1), seq.zeros(t - 1), q, a)?;
            if closed != -&diff {
                return Ok(Verification::fail(
                    &seq,
                    format!("closed-form delta {closed} != recomputed {} at t={t}", -&diff),
                ));
            }
            pairs_checked += 1;
        }
    }
    Ok(Verification::pass(format!(
        "{pairs_checked} swap positions checked over all {} sequences",
        1u64 << t_len
    )))
}

//! Loss model and exact expected regret of TS(q) on a fixed bit sequence.
//!
//! The per-step error probability of Thompson sampling with a `beta(1,1)`
//! prior is `F_beta(O+1, Z+1)(q)` when the observed bit is 1 and its
//! complement when the bit is 0, where `O`, `Z` are the prefix counts before
//! the step. Expected loss weights false positives by `q` and false negatives
//! by `1-q`; regret subtracts the best static prediction
//! `min(q Z_T, (1-q) O_T)`.
//!
//! Two engines are provided: a float engine driven by the incremental CDF
//! recurrences (O(T), scales to millions of steps) and an exact rational
//! engine (needed because the characterization theorems involve exact ties
//! that floats cannot certify).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::beta_math::{beta_cdf, BetaParams, IncrementalBetaCdf};
use crate::error::Error;

/// A fixed adversarial bit sequence with cached prefix counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitSequence {
    bits: Vec<u8>,
    /// ones[t] = number of ones among the first t bits, t = 0..=T.
    ones: Vec<u32>,
}

impl BitSequence {
    pub fn new(bits: Vec<u8>) -> Result<Self, Error> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Domain("bits must be 0 or 1".into()));
        }
        let mut ones = Vec::with_capacity(bits.len() + 1);
        let mut acc = 0u32;
        ones.push(0);
        for &b in &bits {
            acc += b as u32;
            ones.push(acc);
        }
        Ok(Self { bits, ones })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Bit at position `t`, 1-indexed.
    pub fn bit(&self, t: usize) -> u8 {
        self.bits[t - 1]
    }

    /// Number of ones among the first `t` bits.
    pub fn ones(&self, t: usize) -> u64 {
        self.ones[t] as u64
    }

    /// Number of zeros among the first `t` bits.
    pub fn zeros(&self, t: usize) -> u64 {
        t as u64 - self.ones[t] as u64
    }

    pub fn total_ones(&self) -> u64 {
        self.ones(self.len())
    }

    pub fn total_zeros(&self) -> u64 {
        self.zeros(self.len())
    }

    /// Exchange bits `t` and `t+1` (1-indexed, `1 <= t <= T-1`).
    pub fn swap(&self, t: usize) -> Result<Self, Error> {
        if t < 1 || t >= self.len() {
            return Err(Error::Index { index: t, len: self.len() });
        }
        let mut bits = self.bits.clone();
        bits.swap(t - 1, t);
        Self::new(bits)
    }

    /// Bitwise complement.
    pub fn flip(&self) -> Self {
        Self::new(self.bits.iter().map(|&b| 1 - b).collect()).expect("bits stay binary")
    }
}

impl FromStr for BitSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Parse(format!("invalid bit character '{other}'"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(bits)
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// The trade-off parameter `q` as a reduced rational with a float view.
///
/// Kept rational so every ratio comparison against `(O+1)/(Z+1)` can be done
/// by integer cross-multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TradeoffParameter {
    num: u64,
    den: u64,
}

impl TradeoffParameter {
    pub fn new(num: u64, den: u64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::Domain("denominator must be nonzero".into()));
        }
        if num > den {
            return Err(Error::Domain(format!("q = {num}/{den} must lie in [0,1]")));
        }
        if num == 0 {
            return Ok(Self { num: 0, den: 1 });
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn half() -> Self {
        Self { num: 1, den: 2 }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn as_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// `1 - q`.
    pub fn complement(&self) -> Self {
        Self { num: self.den - self.num, den: self.den }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl FromStr for TradeoffParameter {
    type Err = Error;

    /// Accepts `"num/den"` or a decimal literal, which is converted to an
    /// exact rational (e.g. `"0.3"` becomes 3/10).
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num: u64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator in '{s}'")))?;
            let den: u64 = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in '{s}'")))?;
            Self::new(num, den)
        } else if let Some((int, frac)) = s.split_once('.') {
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| Error::Parse(format!("bad decimal '{s}'")))?
            };
            if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Parse(format!("bad decimal '{s}'")));
            }
            let scale = 10u64.pow(frac.len() as u32);
            let frac: u64 = frac.parse().map_err(|_| Error::Parse(format!("bad decimal '{s}'")))?;
            let num = int
                .checked_mul(scale)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(|| Error::Parse(format!("decimal '{s}' overflows")))?;
            Self::new(num, scale)
        } else {
            let num: u64 = s.parse().map_err(|_| Error::Parse(format!("bad q '{s}'")))?;
            Self::new(num, 1)
        }
    }
}

impl fmt::Display for TradeoffParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Evaluation mode for regret computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Float,
    Rational,
}

/// Per-step error probabilities, expected loss, benchmark and regret.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretBreakdown<V> {
    pub per_step_error_prob: Vec<V>,
    pub expected_loss: V,
    pub static_benchmark: V,
    pub regret: V,
}

/// Probability that TS(q) errs at a step with prefix counts `(ones, zeros)`
/// and observed bit `bit` (float route).
pub fn step_error_prob(ones: u64, zeros: u64, bit: u8, q: TradeoffParameter) -> Result<f64, Error> {
    let cdf = beta_cdf(BetaParams::new(ones + 1, zeros + 1)?, q.as_f64())?;
    Ok(if bit == 1 { cdf } else { 1.0 - cdf })
}

/// Exact-rational counterpart of [`step_error_prob`].
pub fn step_error_prob_exact(
    ones: u64,
    zeros: u64,
    bit: u8,
    q: TradeoffParameter,
) -> Result<BigRational, Error> {
    let cdf =
        crate::beta_math::beta_cdf_rational(BetaParams::new(ones + 1, zeros + 1)?, &q.as_rational())?;
    Ok(if bit == 1 { cdf } else { BigRational::one() - cdf })
}

/// Best static prediction loss `min(q Z_T, (1-q) O_T)`.
pub fn static_benchmark(seq: &BitSequence, q: TradeoffParameter) -> f64 {
    let fp = q.as_f64() * seq.total_zeros() as f64;
    let fnn = (1.0 - q.as_f64()) * seq.total_ones() as f64;
    fp.min(fnn)
}

/// Exact-rational counterpart of [`static_benchmark`].
pub fn static_benchmark_exact(seq: &BitSequence, q: TradeoffParameter) -> BigRational {
    let q = q.as_rational();
    let fp = &q * BigRational::from(BigInt::from(seq.total_zeros()));
    let fnn = (BigRational::one() - &q) * BigRational::from(BigInt::from(seq.total_ones()));
    fp.min(fnn)
}

/// Expected regret of TS(q), float engine: one incremental CDF walk, O(T).
pub fn regret_float(seq: &BitSequence, q: TradeoffParameter) -> Result<RegretBreakdown<f64>, Error> {
    let qf = q.as_f64();
    let mut cdf = IncrementalBetaCdf::new(qf)?;
    let mut per_step = Vec::with_capacity(seq.len());
    let mut loss = 0.0f64;
    for &bit in seq.bits() {
        let err = if bit == 1 { cdf.cdf() } else { 1.0 - cdf.cdf() };
        let weight = if bit == 1 { 1.0 - qf } else { qf };
        per_step.push(err);
        loss += weight * err;
        if bit == 1 {
            cdf.inc_a();
        } else {
            cdf.inc_b();
        }
    }
    let benchmark = static_benchmark(seq, q);
    Ok(RegretBreakdown {
        per_step_error_prob: per_step,
        expected_loss: loss,
        static_benchmark: benchmark,
        regret: loss - benchmark,
    })
}

/// Expected regret of TS(q), exact rational engine.
///
/// Walks the same CDF recurrences as the float engine but in big rationals:
/// the running CDF starts at `F_beta(1,1)(q) = q` with kernel `q(1-q)` and is
/// updated exactly, so the result is the true rational regret.
pub fn regret_exact(
    seq: &BitSequence,
    q: TradeoffParameter,
) -> Result<RegretBreakdown<BigRational>, Error> {
    let qr = q.as_rational();
    let one_minus_q = BigRational::one() - &qr;
    let mut cdf = qr.clone();
    let mut kernel = &qr * &one_minus_q;
    let (mut a, mut b) = (1u64, 1u64);
    let mut per_step = Vec::with_capacity(seq.len());
    let mut loss = BigRational::zero();
    for &bit in seq.bits() {
        let err = if bit == 1 {
            cdf.clone()
        } else {
            BigRational::one() - &cdf
        };
        let weight = if bit == 1 { &one_minus_q } else { &qr };
        loss += weight * &err;
        per_step.push(err);
        let ab = BigRational::from(BigInt::from(a + b));
        if bit == 1 {
            cdf -= &kernel / BigRational::from(BigInt::from(a));
            kernel = kernel * &qr * &ab / BigRational::from(BigInt::from(a));
            a += 1;
        } else {
            cdf += &kernel / BigRational::from(BigInt::from(b));
            kernel = kernel * &one_minus_q * &ab / BigRational::from(BigInt::from(b));
            b += 1;
        }
    }
    let benchmark = static_benchmark_exact(seq, q);
    let regret = &loss - &benchmark;
    Ok(RegretBreakdown {
        per_step_error_prob: per_step,
        expected_loss: loss,
        static_benchmark: benchmark,
        regret,
    })
}

/// Mode-dispatching regret evaluation.
#[derive(Debug, Clone)]
pub enum RegretResult {
    Float(RegretBreakdown<f64>),
    Exact(RegretBreakdown<BigRational>),
}

pub fn regret(seq: &BitSequence, q: TradeoffParameter, mode: Mode) -> Result<RegretResult, Error> {
    match mode {
        Mode::Float => Ok(RegretResult::Float(regret_float(seq, q)?)),
        Mode::Rational => Ok(RegretResult::Exact(regret_exact(seq, q)?)),
    }
}

/// Effect of swapping an adjacent `(bit_t, bit_{t+1})` pair on the regret.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapEffect {
    /// `regret(Swap(seq, t)) > regret(seq)`
    Increases,
    /// `regret(Swap(seq, t)) < regret(seq)`
    Decreases,
    /// exact tie
    Equal,
}

/// Closed-form `regret(seq) - regret(Swap(seq, t))` from the prefix counts
/// before position `t`, exact rational route.
///
/// For `(bit_t, bit_{t+1}) = (0, 1)` the difference is
/// `q^(O+1) (1-q)^(Z+1) / B(O+1, Z+1) * ((1-q)/(Z+1) - q/(O+1))`;
/// the `(1, 0)` case is its negation.
pub fn swap_delta_closed_form_exact(
    ones: u64,
    zeros: u64,
    q: TradeoffParameter,
    first_bit: u8,
) -> Result<BigRational, Error> {
    let qr = q.as_rational();
    let one_minus_q = BigRational::one() - &qr;
    // q^(O+1) (1-q)^(Z+1) / B(O+1,Z+1) with B(a,b) = (a-1)!(b-1)!/(a+b-1)!
    let mut kernel = BigRational::one();
    for _ in 0..ones + 1 {
        kernel *= &qr;
    }
    for _ in 0..zeros + 1 {
        kernel *= &one_minus_q;
    }
    let mut beta_inv = BigInt::one(); // (O+Z+1)! / (O! Z!)
    for i in 1..=(ones + zeros + 1) {
        beta_inv *= BigInt::from(i);
    }
    for i in 1..=ones {
        beta_inv /= BigInt::from(i);
    }
    for i in 1..=zeros {
        beta_inv /= BigInt::from(i);
    }
    kernel *= BigRational::from(beta_inv);
    let bracket = &one_minus_q / BigRational::from(BigInt::from(zeros + 1))
        - &qr / BigRational::from(BigInt::from(ones + 1));
    let delta = kernel * bracket;
    Ok(match first_bit {
        0 => delta,
        1 => -delta,
        other => return Err(Error::Domain(format!("bit must be 0 or 1, got {other}"))),
    })
}

/// Float view of [`swap_delta_closed_form_exact`].
pub fn swap_delta_closed_form(
    ones: u64,
    zeros: u64,
    q: TradeoffParameter,
    first_bit: u8,
) -> Result<f64, Error> {
    use num_traits::ToPrimitive;
    let exact = swap_delta_closed_form_exact(ones, zeros, q, first_bit)?;
    exact
        .to_f64()
        .ok_or_else(|| Error::Domain("closed-form delta not representable as f64".into()))
}

/// Sign rule of the Swapping Lemma by integer cross-multiplication:
/// for `(0,1)` pairs the swap increases regret iff
/// `q/(1-q) > (O+1)/(Z+1)`, i.e. `q_num (Z+1) > (q_den - q_num)(O+1)`;
/// for `(1,0)` pairs the inequality is reversed. No floating point, no ties
/// misclassified.
pub fn swap_comparison(
    ones: u64,
    zeros: u64,
    q: TradeoffParameter,
    first_bit: u8,
) -> Result<SwapEffect, Error> {
    let lhs = q.numer() as u128 * (zeros as u128 + 1);
    let rhs = (q.denom() - q.numer()) as u128 * (ones as u128 + 1);
    let effect = match (first_bit, lhs.cmp(&rhs)) {
        (_, std::cmp::Ordering::Equal) => SwapEffect::Equal,
        (0, std::cmp::Ordering::Greater) | (1, std::cmp::Ordering::Less) => SwapEffect::Increases,
        (0, std::cmp::Ordering::Less) | (1, std::cmp::Ordering::Greater) => SwapEffect::Decreases,
        (other, _) => return Err(Error::Domain(format!("bit must be 0 or 1, got {other}"))),
    };
    Ok(effect)
}

/// Sign of an exact regret difference, for matching against [`SwapEffect`].
pub fn effect_of_difference(swapped_minus_original: &BigRational) -> SwapEffect {
    if swapped_minus_original.is_zero() {
        SwapEffect::Equal
    } else if swapped_minus_original.is_positive() {
        SwapEffect::Increases
    } else {
        SwapEffect::Decreases
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn seq(s: &str) -> BitSequence {
        s.parse().unwrap()
    }

    fn q(n: u64, d: u64) -> TradeoffParameter {
        TradeoffParameter::new(n, d).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn prefix_counts() {
        let s = seq("0110");
        assert_eq!(s.ones(0), 0);
        assert_eq!(s.zeros(0), 0);
        assert_eq!(s.ones(3), 2);
        assert_eq!(s.zeros(4), 2);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("01x1".parse::<BitSequence>().is_err());
    }

    #[test]
    fn tradeoff_parsing() {
        assert_eq!("1/2".parse::<TradeoffParameter>().unwrap(), q(1, 2));
        assert_eq!("0.3".parse::<TradeoffParameter>().unwrap(), q(3, 10));
        assert_eq!("0.25".parse::<TradeoffParameter>().unwrap(), q(1, 4));
        assert_eq!("1".parse::<TradeoffParameter>().unwrap(), q(1, 1));
        assert!("3/2".parse::<TradeoffParameter>().is_err());
        assert!("-1/2".parse::<TradeoffParameter>().is_err());
    }

    #[test]
    fn step_error_examples() {
        assert!((step_error_prob(0, 0, 0, q(1, 2)).unwrap() - 0.5).abs() < 1e-15);
        assert!((step_error_prob(1, 0, 1, q(1, 2)).unwrap() - 0.25).abs() < 1e-12);
        assert!((step_error_prob(0, 1, 1, q(1, 2)).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn static_benchmark_examples() {
        assert_eq!(static_benchmark_exact(&seq("110"), q(1, 3)), rat(1, 3));
        assert_eq!(static_benchmark_exact(&seq("01"), q(1, 2)), rat(1, 2));
        assert_eq!(static_benchmark_exact(&seq("1111111000"), q(1, 2)), rat(3, 2));
    }

    #[test]
    fn regret_hand_values() {
        assert_eq!(regret_exact(&seq("01"), q(1, 2)).unwrap().regret, rat(1, 8));
        assert_eq!(regret_exact(&seq("10"), q(1, 2)).unwrap().regret, rat(1, 8));
        assert_eq!(regret_exact(&seq("110"), q(1, 2)).unwrap().regret, rat(5, 16));
        assert_eq!(
            regret_exact(&seq("110"), q(1, 2)).unwrap().expected_loss,
            rat(13, 16)
        );
    }

    #[test]
    fn swap_examples() {
        assert_eq!(seq("0110").swap(1).unwrap(), seq("1010"));
        assert_eq!(seq("0110").swap(2).unwrap(), seq("0110"));
        assert_eq!(seq("01").swap(1).unwrap(), seq("10"));
        assert!(seq("01").swap(2).is_err());
        assert!(seq("01").swap(0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert!(swap_delta_closed_form_exact(0, 0, q(1, 2), 0).unwrap().is_zero());
        // (0,0,q=1/3,first=0): (1/3)(2/3) * 1 * (2/3 - 1/3) > 0
        let d = swap_delta_closed_form_exact(0, 0, q(1, 3), 0).unwrap();
        assert!(d.is_positive());
        // (2,0,q=1/2,first=1): the sequence loses regret by swapping late;
        // equivalently the swapped version has more.
        let d = swap_delta_closed_form_exact(2, 0, q(1, 2), 1).unwrap();
        assert!(d.is_negative());
    }

    #[test]
    fn closed_form_cross_check_against_full_regret() {
        // 110: swap at t=2 has prefix (1,0), pair (1,0).
        let g = seq("110");
        let d = swap_delta_closed_form_exact(1, 0, q(1, 2), 1).unwrap();
        let full = regret_exact(&g, q(1, 2)).unwrap().regret
            - regret_exact(&g.swap(2).unwrap(), q(1, 2)).unwrap().regret;
        assert_eq!(d, full);
    }

    #[test]
    fn comparison_examples() {
        assert_eq!(swap_comparison(0, 0, q(1, 2), 0).unwrap(), SwapEffect::Equal);
        assert_eq!(swap_comparison(0, 1, q(1, 2), 0).unwrap(), SwapEffect::Increases);
        assert_eq!(swap_comparison(2, 0, q(1, 2), 1).unwrap(), SwapEffect::Increases);
    }

    #[test]
    fn flip_symmetry_small() {
        for s in ["0110", "111", "010011", "1"] {
            let s = seq(s);
            let r1 = regret_exact(&s, q(1, 3)).unwrap().regret;
            let r2 = regret_exact(&s.flip(), q(2, 3)).unwrap().regret;
            assert_eq!(r1, r2, "seq={s}");
        }
    }

    #[test]
    fn half_loss_is_half_error_count() {
        // at q=1/2, expected loss = (1/2) * expected number of errors
        let s = seq("0110101");
        let r = regret_exact(&s, q(1, 2)).unwrap();
        let err_count: BigRational = r.per_step_error_prob.iter().sum();
        assert_eq!(r.expected_loss, err_count * rat(1, 2));
    }

    proptest! {
        #[test]
        fn float_and_exact_engines_agree(
            bits in proptest::collection::vec(0..=1u8, 1..60),
            qn in 0..=10u64,
        ) {
            let s = BitSequence::new(bits).unwrap();
            let q = TradeoffParameter::new(qn, 10).unwrap();
            let rf = regret_float(&s, q).unwrap();
            let re = regret_exact(&s, q).unwrap();
            prop_assert!((rf.regret - re.regret.to_f64().unwrap()).abs() < 1e-8);
        }

        #[test]
        fn closed_form_matches_recompute(
            bits in proptest::collection::vec(0..=1u8, 2..12),
            t in 1usize..11,
            qsel in 0usize..3,
        ) {
            let s = BitSequence::new(bits).unwrap();
            prop_assume!(t < s.len());
            let (a, b) = (s.bit(t), s.bit(t + 1));
            prop_assume!(a != b);
            let q = [q(1, 2), q(1, 3), q(2, 5)][qsel];
            let delta = swap_delta_closed_form_exact(s.ones(t - 1), s.zeros(t - 1), q, a).unwrap();
            let full = regret_exact(&s, q).unwrap().regret
                - regret_exact(&s.swap(t).unwrap(), q).unwrap().regret;
            prop_assert_eq!(delta, full);
        }
    }
}

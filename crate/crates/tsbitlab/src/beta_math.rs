//! Beta and Binomial CDF machinery with integer parameters.
//!
//! Everything here reduces to the identity `F_beta(a,b)(p) = 1 - F_Bin(a+b-1,p)(a-1)`,
//! which holds for positive integer `a`, `b`. It gives us three evaluation routes:
//!
//! - a numerically stable float route (binomial summation over the smaller tail),
//! - an exact rational route (arbitrary-precision binomial sum),
//! - an O(1)-per-update incremental route driven by the CDF recurrences
//!   `F_beta(a+1,b)(x) = F_beta(a,b)(x) - x^a (1-x)^b / (a B(a,b))` and
//!   `F_beta(a,b+1)(x) = F_beta(a,b)(x) + x^a (1-x)^b / (b B(a,b))`.
//!
//! The module also evaluates the tail sums `sum_i F_beta(i+1,n+1)(p)` and the
//! related exponential sum, and the binomial point mass `Pr[Bin(floor(n/p),p) = n]`
//! with its Stirling estimate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Error;

/// Integer parameters of a `beta(a, b)` distribution.
///
/// In the prediction setting `a = ones observed + 1` and `b = zeros observed + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BetaParams {
    pub a: u64,
    pub b: u64,
}

impl BetaParams {
    pub fn new(a: u64, b: u64) -> Result<Self, Error> {
        if a < 1 || b < 1 {
            return Err(Error::Domain(format!(
                "beta parameters must be >= 1, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b })
    }
}

/// Natural log of `k!`.
///
/// Exact accumulation below the table limit, Stirling series above it. The
/// series error at k >= 256 is far below 1e-14 relative.
pub fn ln_factorial(k: u64) -> f64 {
    const TABLE_LIMIT: u64 = 256;
    if k < TABLE_LIMIT {
        // Small values accumulate exactly; cache would be overkill at this scale.
        let mut acc = 0.0f64;
        for i in 2..=k {
            acc += (i as f64).ln();
        }
        acc
    } else {
        let x = k as f64 + 1.0;
        // Stirling series for ln Gamma(x).
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        (x - 0.5) * x.ln() - x
            + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
    }
}

/// Natural log of the binomial coefficient C(n, k).
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `F_beta(a,b)(x)` via the Beta-Binomial identity.
///
/// Returns `1 - F_Bin(a+b-1, x)(a-1)`, i.e. the upper binomial tail
/// `sum_{j=a}^{a+b-1} C(n,j) x^j (1-x)^(n-j)` with `n = a+b-1`. Whichever of
/// the two tails is smaller is the one actually summed, so the subtraction
/// from one never cancels significant digits.
pub fn beta_cdf(params: BetaParams, x: f64) -> Result<f64, Error> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x must be in [0,1], got {x}")));
    }
    let BetaParams { a, b } = params;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let n = a + b - 1;
    // Upper tail has b terms (j = a..=n), lower tail has a terms (j = 0..a).
    // The mean of Bin(n, x) is n*x; the tail not containing the mean is the
    // light one. Fall back to term count when both contain it.
    let mean = n as f64 * x;
    let sum_upper = if (a as f64) > mean {
        true
    } else if (a as f64 - 1.0) < mean - (b as f64) {
        false
    } else {
        b <= a
    };
    if sum_upper {
        Ok(binomial_tail_sum(n, x, a, n))
    } else {
        Ok(1.0 - binomial_tail_sum(n, x, 0, a - 1))
    }
}

/// Sum of `C(n,j) x^j (1-x)^(n-j)` for `j in [lo, hi]`, accumulated outward
/// from the dominant term so that small terms are added first.
fn binomial_tail_sum(n: u64, x: f64, lo: u64, hi: u64) -> f64 {
    debug_assert!(lo <= hi && hi <= n);
    // Mode of the pmf restricted to [lo, hi].
    let mode = ((n + 1) as f64 * x).floor() as u64;
    let peak = mode.clamp(lo, hi);
    let ln_x = x.ln();
    let ln_1mx = (1.0 - x).ln();
    let ln_pmf =
        |j: u64| ln_binomial(n, j) + j as f64 * ln_x + (n - j) as f64 * ln_1mx;
    let peak_ln = ln_pmf(peak);
    // Terms decay monotonically away from the peak; stop once they cannot
    // affect the sum at 1e-18 relative.
    let cutoff = peak_ln - 45.0;
    let mut below = 0.0f64;
    let mut j = peak;
    while j > lo {
        j -= 1;
        let l = ln_pmf(j);
        below += l.exp();
        if l < cutoff {
            break;
        }
    }
    let mut above = 0.0f64;
    let mut j = peak;
    while j < hi {
        j += 1;
        let l = ln_pmf(j);
        above += l.exp();
        if l < cutoff {
            break;
        }
    }
    below + above + peak_ln.exp()
}

/// Exact binomial coefficient C(n, k) as a big integer.
pub fn binomial_exact(n: u64, k: u64) -> BigInt {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Exact `F_beta(a,b)(q)` for rational `q`: the binomial sum
/// `sum_{j=a}^{a+b-1} C(a+b-1, j) q^j (1-q)^(a+b-1-j)` in big rationals.
pub fn beta_cdf_rational(params: BetaParams, q: &BigRational) -> Result<BigRational, Error> {
    if q < &BigRational::zero() || q > &BigRational::one() {
        return Err(Error::Domain(format!("q must be in [0,1], got {q}")));
    }
    let BetaParams { a, b } = params;
    let n = a + b - 1;
    let one_minus_q = BigRational::one() - q;
    // q^a * (1-q)^(n-a) as the starting term, then multiply by the pmf ratio.
    let mut power = pow_rational(q, a) * pow_rational(&one_minus_q, n - a);
    let mut total = BigRational::zero();
    for j in a..=n {
        total += BigRational::from(binomial_exact(n, j)) * &power;
        if j < n && !q.is_zero() && !one_minus_q.is_zero() {
            power = power * q / &one_minus_q;
        } else if j < n {
            power = pow_rational(q, j + 1) * pow_rational(&one_minus_q, n - j - 1);
        }
    }
    Ok(total)
}

fn pow_rational(x: &BigRational, e: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = x.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

// Below this value the multiplicative kernel switches to log-space tracking.
const KERNEL_UNDERFLOW: f64 = 1e-300;

/// Running value of `F_beta(a,b)(x)` with O(1) parameter increments.
///
/// Tracks the CDF together with the kernel `x^a (1-x)^b / B(a,b)`; the
/// recurrence steps are `cdf -= kernel/a` (on `inc_a`) and `cdf += kernel/b`
/// (on `inc_b`), with the kernel itself updated multiplicatively via
/// `B(a+1,b) = B(a,b) a/(a+b)` and `B(a,b+1) = B(a,b) b/(a+b)`.
#[derive(Debug, Clone)]
pub struct IncrementalBetaCdf {
    params: BetaParams,
    x: f64,
    cdf: f64,
    kernel: f64,
    /// log of the kernel, carried in parallel; authoritative once the linear
    /// value underflows.
    log_kernel: f64,
}

impl IncrementalBetaCdf {
    /// Start at `beta(1,1)`, where the CDF is `x` and the kernel is `x(1-x)`.
    pub fn new(x: f64) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x must be in [0,1], got {x}")));
        }
        let kernel = x * (1.0 - x);
        Ok(Self {
            params: BetaParams { a: 1, b: 1 },
            x,
            cdf: x,
            kernel,
            log_kernel: if kernel > 0.0 { kernel.ln() } else { f64::NEG_INFINITY },
        })
    }

    pub fn params(&self) -> BetaParams {
        self.params
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Current `F_beta(a,b)(x)`.
    pub fn cdf(&self) -> f64 {
        self.cdf
    }

    /// Current kernel `x^a (1-x)^b / B(a,b)`.
    pub fn kernel(&self) -> f64 {
        if self.kernel >= KERNEL_UNDERFLOW {
            self.kernel
        } else {
            self.log_kernel.exp()
        }
    }

    /// Move from `beta(a,b)` to `beta(a+1,b)` (one more observed one).
    pub fn inc_a(&mut self) {
        let BetaParams { a, b } = self.params;
        self.cdf = (self.cdf - self.kernel() / a as f64).clamp(0.0, 1.0);
        // K(a+1,b) = K(a,b) * x * (a+b)/a
        let factor = self.x * (a + b) as f64 / a as f64;
        self.kernel *= factor;
        self.log_kernel += factor.ln();
        self.resync();
        self.params.a += 1;
    }

    /// Move from `beta(a,b)` to `beta(a,b+1)` (one more observed zero).
    pub fn inc_b(&mut self) {
        let BetaParams { a, b } = self.params;
        self.cdf = (self.cdf + self.kernel() / b as f64).clamp(0.0, 1.0);
        let factor = (1.0 - self.x) * (a + b) as f64 / b as f64;
        self.kernel *= factor;
        self.log_kernel += factor.ln();
        self.resync();
        self.params.b += 1;
    }

    /// Below the underflow threshold the linear kernel bottoms out in the
    /// subnormal range and stops tracking further decay; rebuild it from the
    /// log so it comes back correct when the kernel grows again.
    fn resync(&mut self) {
        if self.kernel < KERNEL_UNDERFLOW {
            self.kernel = self.log_kernel.exp();
        }
    }
}

/// Truncated tail sum `sum_i F_beta(i+1, n+1)(p)` starting at
/// `i = floor(p/(1-p) * n) + 1`.
#[derive(Debug, Clone, Copy)]
pub struct TailSumQuery {
    pub n: u64,
    pub p: f64,
    /// Hard cap on the number of summands.
    pub terms: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct TailSumResult {
    pub value: f64,
    /// Number of summands actually accumulated.
    pub terms_used: u64,
    /// Bound on the mass beyond the truncation point: last term times a
    /// geometric tail estimate from the observed decay ratio.
    pub truncation_bound: f64,
}

// Summands below this are dropped and folded into the truncation bound.
const TAIL_TERM_EPS: f64 = 1e-15;

/// Evaluate the tail sum adaptively: stop at the `terms` cap or once a summand
/// drops below 1e-15, whichever comes first.
pub fn tail_sum(query: TailSumQuery) -> Result<TailSumResult, Error> {
    let TailSumQuery { n, p, terms } = query;
    if n < 1 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    if !(0.0 < p && p < 1.0) || terms < 1 {
        return Err(Error::Domain(format!(
            "need p in (0,1) and terms >= 1, got p={p}, terms={terms}"
        )));
    }
    let start = (p / (1.0 - p) * n as f64).floor() as u64 + 1;
    // Walk F_beta(i+1, n+1)(p) upward in i with O(1) increments.
    let mut cdf = IncrementalBetaCdf::new(p)?;
    for _ in 0..start {
        cdf.inc_a();
    }
    for _ in 0..n {
        cdf.inc_b();
    }
    debug_assert_eq!(cdf.params(), BetaParams { a: start + 1, b: n + 1 });
    let mut value = 0.0f64;
    let mut used = 0u64;
    let mut last = 0.0f64;
    let mut prev = f64::INFINITY;
    let mut ratio = 0.0f64;
    for _ in 0..terms {
        let term = cdf.cdf();
        value += term;
        used += 1;
        if prev.is_finite() && prev > 0.0 {
            ratio = term / prev;
        }
        last = term;
        prev = term;
        if term < TAIL_TERM_EPS {
            break;
        }
        cdf.inc_a();
    }
    // Geometric bound on the remainder; the decay ratio is < 1 once i is past
    // p/(1-p)*(n+1), which the start index guarantees within one step.
    let r = ratio.clamp(0.0, 0.999_999);
    let truncation_bound = last / (1.0 - r);
    Ok(TailSumResult {
        value,
        terms_used: used,
        truncation_bound,
    })
}

/// `sum_{i=n+1}^inf exp(-(i-(n+1))^2 / (2(i+n+1)))`, summed until the additive
/// terms fall below 1e-15.
pub fn exp_sum(n: u64) -> Result<f64, Error> {
    if n < 1 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let mut total = 0.0f64;
    let mut i = n + 1;
    loop {
        let d = (i - (n + 1)) as f64;
        let term = (-d * d / (2.0 * (i + n + 1) as f64)).exp();
        total += term;
        if term < 1e-15 {
            break;
        }
        i += 1;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
pub struct BinomPointMass {
    /// Exact pmf `Pr[Bin(floor(n/p), p) = n]`, evaluated through log factorials.
    pub pmf: f64,
    /// The same quantity with C(m,n) replaced by its Stirling approximation.
    pub stirling_estimate: f64,
    /// pmf / stirling_estimate.
    pub ratio: f64,
}

/// Point mass of `Bin(floor(n/p), p)` at `n`, plus its Stirling estimate.
pub fn binom_point_mass(n: u64, p: f64) -> Result<BinomPointMass, Error> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Domain(format!("p must be in (0,1), got {p}")));
    }
    // multiplied-out form of n >= 2p/(1-p), with slack so boundary cases
    // (e.g. n=18, p=0.9) are not rejected by roundoff
    if n as f64 * (1.0 - p) + 1e-9 < 2.0 * p {
        return Err(Error::Domain(format!(
            "n={n} below the validity threshold 2p/(1-p) = {}",
            2.0 * p / (1.0 - p)
        )));
    }
    let m = (n as f64 / p).floor() as u64;
    let ln_pmf = ln_binomial(m, n) + n as f64 * p.ln() + (m - n) as f64 * (1.0 - p).ln();
    let pmf = ln_pmf.exp();
    // C(m,n) ~ sqrt(m / (2 pi n (m-n))) (m/n)^n (m/(m-n))^(m-n)
    let mf = m as f64;
    let nf = n as f64;
    let ln_stirling_binom = 0.5 * (mf / (2.0 * std::f64::consts::PI * nf * (mf - nf))).ln()
        + nf * (mf / nf).ln()
        + (mf - nf) * (mf / (mf - nf)).ln();
    let stirling_estimate =
        (ln_stirling_binom + nf * p.ln() + (mf - nf) * (1.0 - p).ln()).exp();
    Ok(BinomPointMass {
        pmf,
        stirling_estimate,
        ratio: pmf / stirling_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn beta_cdf_symmetric_midpoint() {
        let v = beta_cdf(BetaParams { a: 2, b: 2 }, 0.5).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn beta_cdf_power_law_case() {
        // F_beta(a,1)(p) = p^a
        let v = beta_cdf(BetaParams { a: 2, b: 1 }, 0.5).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn beta_cdf_hand_derived() {
        // F_beta(1,2)(1/4) = 1 - F_Bin(2,1/4)(0) = 1 - (3/4)^2 = 7/16
        let v = beta_cdf(BetaParams { a: 1, b: 2 }, 0.25).unwrap();
        assert!((v - 7.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn beta_cdf_rejects_out_of_range() {
        assert!(beta_cdf(BetaParams { a: 1, b: 1 }, 1.5).is_err());
        assert!(beta_cdf(BetaParams { a: 1, b: 1 }, -0.1).is_err());
    }

    #[test]
    fn rational_uniform_cdf() {
        let v = beta_cdf_rational(BetaParams { a: 1, b: 1 }, &rat(3, 7)).unwrap();
        assert_eq!(v, rat(3, 7));
    }

    #[test]
    fn rational_power_law() {
        let v = beta_cdf_rational(BetaParams { a: 2, b: 1 }, &rat(1, 2)).unwrap();
        assert_eq!(v, rat(1, 4));
    }

    #[test]
    fn rational_two_term_sum() {
        // sum_{j=3}^{4} C(4,j) (1/3)^j (2/3)^(4-j) = 8/81 + 1/81 = 1/9
        let v = beta_cdf_rational(BetaParams { a: 3, b: 2 }, &rat(1, 3)).unwrap();
        assert_eq!(v, rat(1, 9));
    }

    #[test]
    fn incremental_matches_hand_values() {
        let s = IncrementalBetaCdf::new(0.5).unwrap();
        assert!((s.cdf() - 0.5).abs() < 1e-15);

        let mut s = IncrementalBetaCdf::new(0.5).unwrap();
        s.inc_b();
        // F_beta(1,2)(1/2) = 1 - (1/2)^2 = 3/4
        assert!((s.cdf() - 0.75).abs() < 1e-12);

        let mut s = IncrementalBetaCdf::new(0.5).unwrap();
        s.inc_a();
        // F_beta(2,1)(1/2) = (1/2)^2 = 1/4
        assert!((s.cdf() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn incremental_no_nan_on_long_one_run() {
        // a grows to 5000 at x=1/2; kernel underflows long before that.
        let mut s = IncrementalBetaCdf::new(0.5).unwrap();
        for _ in 0..5000 {
            s.inc_a();
            assert!(!s.cdf().is_nan());
            assert!(s.kernel() >= 0.0);
        }
        assert!(s.cdf() >= 0.0 && s.cdf() <= 1.0);
    }

    #[test]
    fn symmetry_identity_grid() {
        // F_beta(a,b)(p) + F_beta(b,a)(1-p) = 1
        for a in [1u64, 2, 7, 50, 200] {
            for b in [1u64, 3, 20, 200] {
                for i in 1..100 {
                    let x = i as f64 / 100.0;
                    let lhs = beta_cdf(BetaParams { a, b }, x).unwrap()
                        + beta_cdf(BetaParams { a: b, b: a }, 1.0 - x).unwrap();
                    assert!(
                        (lhs - 1.0).abs() < 1e-10,
                        "a={a} b={b} x={x}: {lhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn power_law_up_to_100() {
        for a in 1..=100u64 {
            for &x in &[0.1, 0.5, 0.93] {
                let v = beta_cdf(BetaParams { a, b: 1 }, x).unwrap();
                assert!((v - x.powi(a as i32)).abs() < 1e-12, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn monotone_in_x() {
        let p = BetaParams { a: 5, b: 3 };
        let mut prev = 0.0;
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let v = beta_cdf(p, x).unwrap();
            assert!(v + 1e-12 >= prev);
            if x > 0.0 && x < 1.0 {
                assert!(v > 0.0 && v < 1.0);
            }
            prev = v;
        }
    }

    #[test]
    fn tail_sum_first_summand_lower_bound() {
        // n=1, p=1/2: first summand is F_beta(3,2)(1/2) = 5/16
        let r = tail_sum(TailSumQuery { n: 1, p: 0.5, terms: 10_000 }).unwrap();
        assert!(r.value >= 5.0 / 16.0);
        assert!(r.truncation_bound < 1e-12);
    }

    #[test]
    fn tail_sum_sqrt_band_n100() {
        let r = tail_sum(TailSumQuery { n: 100, p: 0.5, terms: 100_000 }).unwrap();
        let scaled = r.value / (100.0f64).sqrt();
        assert!((0.5..=5.0).contains(&scaled), "scaled={scaled}");
    }

    #[test]
    fn tail_sum_general_p_upper_bound() {
        // p >= 1/2 branch of the generalized bound.
        let n = 100u64;
        let p = 0.9f64;
        let r = tail_sum(TailSumQuery { n, p, terms: 1_000_000 }).unwrap();
        let bound = 1.0 + p / (1.0 - p)
            + (std::f64::consts::PI * p * (n + 1) as f64).sqrt() / (1.0 - p)
            + 4.0 * p / (1.0 - p);
        assert!(r.value.is_finite());
        assert!(r.value <= bound, "value={} bound={}", r.value, bound);
    }

    #[test]
    fn exp_sum_bounds() {
        for n in [1u64, 10, 100] {
            let v = exp_sum(n).unwrap();
            let lo = (std::f64::consts::PI * (n + 1) as f64).sqrt();
            let hi = 1.0
                + (2.0 * std::f64::consts::PI * (n + 1) as f64).sqrt()
                + 1.0 / (1.0 - (-0.25f64).exp());
            assert!(v >= lo && v <= hi, "n={n} v={v} lo={lo} hi={hi}");
        }
    }

    #[test]
    fn exp_sum_n100_band() {
        // The two closed-form bounds evaluated at n=100.
        let v = exp_sum(100).unwrap();
        assert!((17.81..=30.72).contains(&v), "v={v}");
    }

    #[test]
    fn binom_point_mass_central() {
        // C(2000,1000)/2^2000 ~ 0.01784
        let r = binom_point_mass(1000, 0.5).unwrap();
        assert!((r.pmf - 0.01784).abs() < 2e-5, "pmf={}", r.pmf);
    }

    #[test]
    fn binom_point_mass_domain_guard() {
        // p=0.9 needs n >= 18
        assert!(binom_point_mass(10, 0.9).is_err());
        assert!(binom_point_mass(18, 0.9).is_ok());
    }

    #[test]
    fn stirling_ratio_near_one() {
        let r = binom_point_mass(50, 0.5).unwrap(); // m = 100
        assert!((r.ratio - 1.0).abs() < 0.01, "ratio={}", r.ratio);
    }

    proptest! {
        #[test]
        fn incremental_random_walk_matches_direct(
            steps in proptest::collection::vec(any::<bool>(), 0..2000),
            xi in 1..99u32,
        ) {
            let x = xi as f64 / 100.0;
            let mut inc = IncrementalBetaCdf::new(x).unwrap();
            for &one in &steps {
                if one { inc.inc_a() } else { inc.inc_b() }
            }
            let direct = beta_cdf(inc.params(), x).unwrap();
            let denom = direct.abs().max(1e-30);
            prop_assert!(
                ((inc.cdf() - direct) / denom).abs() < 1e-10
                    || (inc.cdf() - direct).abs() < 1e-14,
                "params={:?} inc={} direct={}", inc.params(), inc.cdf(), direct
            );
        }

        #[test]
        fn rational_and_float_agree(a in 1..40u64, b in 1..20u64, num in 0..30i64) {
            let q = rat(num, 30);
            let exact = beta_cdf_rational(BetaParams { a, b }, &q).unwrap();
            let float = beta_cdf(BetaParams { a, b }, num as f64 / 30.0).unwrap();
            let exact_f = exact.to_f64().unwrap();
            prop_assert!((exact_f - float).abs() <= 1e-10, "exact={exact_f} float={float}");
        }
    }
}

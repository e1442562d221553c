//! Bounds for the longest continuously increasing subsequence `L_{m,n}`.
//!
//! Upper side: `Pr[L(π; W) ≥ k] ≤ |W_k| m^k / k!` for prefix-closed word
//! families, and the resulting bound on `E[L]` near `Γ⁻¹(N)`. Lower side:
//! Hamming-distance codes in `[m]^n` feeding a Bonferroni bound on
//! `Pr[L = n]`, and independent disjoint blocks for `Pr[L ≥ k]`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::combin::{binomial, factorial, factorial_ratio};
use crate::error::{Error, Result};
use crate::exact::{complete_prob, rational_to_f64};
use crate::words::{Word, DEFAULT_ENUMERATION_CAP};

/// Inverse of `Γ` on its increasing branch `[2, ∞) → [1, ∞)`.
pub fn inverse_gamma(y: f64) -> Result<f64> {
    if !(y >= 1.0) || !y.is_finite() {
        return Err(Error::Domain(format!("inverse_gamma needs finite y >= 1, got {y}")));
    }
    inverse_gamma_ln(y.ln())
}

/// Solves `ln Γ(x) = ln_y` for `x >= 2`; lets callers pass `ln y` for
/// arguments far beyond `f64` range.
pub fn inverse_gamma_ln(ln_y: f64) -> Result<f64> {
    if !(ln_y >= 0.0) || !ln_y.is_finite() {
        return Err(Error::Domain(format!("inverse_gamma needs ln y >= 0, got {ln_y}")));
    }
    if ln_y == 0.0 {
        return Ok(2.0);
    }
    let f = |x: f64| ln_gamma(x) - ln_y;
    let mut lo = 2.0;
    let mut hi = 4.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Newton on the convex, increasing ln Γ, falling back to bisection when a
    // step leaves the bracket.
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / digamma(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x {
            return Ok(snap_to_factorial(next, ln_y));
        }
        x = next;
    }
    Err(Error::NoConvergence {
        what: "inverse_gamma",
        iterations: 200,
    })
}

/// Returns the integer `k` when `x` is within rounding of it and `ln y` is
/// exactly `ln (k-1)!`, so factorial inputs invert to exact integers.
fn snap_to_factorial(x: f64, ln_y: f64) -> f64 {
    let k = x.round();
    if (x - k).abs() > 1e-9 || k > 171.0 {
        return x;
    }
    let fact: f64 = (2..k as u64).map(|i| i as f64).product();
    if fact.ln() == ln_y {
        k
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorialThreshold {
    pub k: u64,
    /// `C` after the minimal upward adjustment making `k` an integer.
    pub c_adjusted: f64,
    /// `k! >= t! · m^{Ct}`.
    pub lower_ok: bool,
    /// `k! <= t! · 1.1^k · m^{Ct}`; only evaluated when `t >= m^{10C}`.
    pub upper_ok: Option<bool>,
}

/// Checks both factorial inequalities for `k = t + (C log m / log t)·t`.
///
/// After the adjustment `m^{Ct} = t^{k-t}` holds exactly, so both sides are
/// compared as integers: `k!/t!` against `t^{k-t}`, and `10^k k!/t!` against
/// `11^k t^{k-t}`. The condition `t >= m^{10C}` becomes `10(k-t) <= t`.
pub fn factorial_threshold(m: u64, t: u64, c: f64) -> Result<FactorialThreshold> {
    if m < 1 || t < 2 || !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "factorial_threshold needs m >= 1, t >= 2, C > 0 (got m={m}, t={t}, C={c})"
        )));
    }
    let (k, c_adjusted) = if m == 1 {
        (t, c)
    } else {
        let (lm, lt) = ((m as f64).ln(), (t as f64).ln());
        let raw = t as f64 + c * lm / lt * t as f64;
        // Snap values within rounding noise of an integer before taking the ceiling.
        let k = if (raw - raw.round()).abs() < 1e-9 * raw {
            raw.round() as u64
        } else {
            raw.ceil() as u64
        };
        (k, (k - t) as f64 * lt / (t as f64 * lm))
    };
    let ratio = factorial_ratio(k, t);
    let power = BigUint::from(t).pow((k - t) as u32);
    let lower_ok = ratio >= power;
    let upper_ok = (10 * (k - t) <= t).then(|| {
        BigUint::from(10u32).pow(k as u32) * &ratio <= BigUint::from(11u32).pow(k as u32) * &power
    });
    Ok(FactorialThreshold {
        k,
        c_adjusted,
        lower_ok,
        upper_ok,
    })
}

/// Prefix-closed families of words over `[n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordFamily {
    /// Words `i (i+1) ... j`.
    ContinuousRuns { n: u32 },
    /// Increasing arithmetic progressions `a, a+d, a+2d, ...` with `d >= 1`.
    ArithmeticProgressions { n: u32 },
}

impl WordFamily {
    pub fn n(&self) -> u32 {
        match *self {
            WordFamily::ContinuousRuns { n } | WordFamily::ArithmeticProgressions { n } => n,
        }
    }

    /// `|W_k|`, the number of members of length `k`.
    pub fn size_at(&self, k: u32) -> BigUint {
        let n = self.n() as u64;
        let k = k as u64;
        if k == 0 {
            return BigUint::one();
        }
        if k > n {
            return BigUint::zero();
        }
        match self {
            WordFamily::ContinuousRuns { .. } => BigUint::from(n - k + 1),
            WordFamily::ArithmeticProgressions { .. } => {
                if k == 1 {
                    return BigUint::from(n);
                }
                let max_d = (n - 1) / (k - 1);
                BigUint::from((1..=max_d).map(|d| n - (k - 1) * d).sum::<u64>())
            }
        }
    }

    /// Every member of length `k`, for small-instance checks.
    pub fn members(&self, k: u32) -> Vec<Vec<u32>> {
        let n = self.n();
        if k == 0 {
            return vec![vec![]];
        }
        let steps: Vec<u32> = match self {
            WordFamily::ContinuousRuns { .. } => vec![1],
            WordFamily::ArithmeticProgressions { .. } if k == 1 => vec![1],
            WordFamily::ArithmeticProgressions { .. } => (1..n.max(1)).collect(),
        };
        let mut out = Vec::new();
        for &d in &steps {
            for a in 1..=n {
                let last = a as u64 + (k as u64 - 1) * d as u64;
                if last <= n as u64 {
                    out.push((0..k).map(|i| a + i * d).collect());
                }
            }
        }
        out
    }

    /// `L(π; W)`: the longest member occurring as a subsequence of `word`.
    pub fn longest_in(&self, word: &Word) -> u32 {
        match self {
            WordFamily::ContinuousRuns { .. } => word.l_max(),
            WordFamily::ArithmeticProgressions { n } => {
                let mut best = 0;
                for d in 1..(*n).max(2) {
                    for a in 1..=*n {
                        let mut target = a;
                        let mut len = 0;
                        for &x in word.letters() {
                            if x == target {
                                len += 1;
                                target += d;
                                if target > *n {
                                    break;
                                }
                            }
                        }
                        best = best.max(len);
                    }
                }
                best
            }
        }
    }
}

/// `min(1, |W_k| m^k / k!)`, an upper bound on `Pr[L(π; W) ≥ k]`.
pub fn tail_bound(family: &WordFamily, m: u32, k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::InvalidArgument("tail_bound needs k >= 1".into()));
    }
    let numer = family.size_at(k) * BigUint::from(m).pow(k);
    let bound = BigRational::new(BigInt::from(numer), BigInt::from(factorial(k as u64)));
    Ok(bound.min(BigRational::one()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationUpper {
    /// The integer with `(t-1)! < N <= t!`.
    pub t: u64,
    /// `⌈t + (2 log m / log t) t⌉`.
    pub k: u64,
    /// `t + (2 log m / log t) t + 2`.
    pub bound: f64,
    /// Whether `2m <= k <= 2t`, the regime the bound is proved in.
    pub regime_ok: bool,
}

/// Upper bound on `E[L(π; W)]` when `|W_k| <= N` for every `k`.
pub fn expectation_upper(m: u32, family_cap: &BigUint) -> Result<ExpectationUpper> {
    if m < 1 || *family_cap < BigUint::from(2u32) {
        return Err(Error::InvalidArgument(
            "expectation_upper needs m >= 1 and N >= 2".into(),
        ));
    }
    let mut t = 1u64;
    let mut fact = BigUint::one();
    while fact < *family_cap {
        t += 1;
        fact *= t;
    }
    let excess = 2.0 * (m as f64).ln() / (t as f64).ln() * t as f64;
    let raw = t as f64 + excess;
    let k = if (raw - raw.round()).abs() < 1e-9 * raw {
        raw.round() as u64
    } else {
        raw.ceil() as u64
    };
    Ok(ExpectationUpper {
        t,
        k,
        bound: raw + 2.0,
        regime_ok: 2 * m as u64 <= k && k <= 2 * t,
    })
}

/// Cap on `m^n` for [`greedy_code`].
pub const CODE_SPACE_CAP: u64 = DEFAULT_ENUMERATION_CAP;

/// A set of tuples in `[m]^n` (entries `1..=m`) with pairwise Hamming
/// distance at least `min_distance`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeBook {
    pub m: u32,
    pub n: u32,
    pub min_distance: u32,
    pub words: Vec<Vec<u32>>,
}

pub fn hamming(x: &[u32], y: &[u32]) -> u32 {
    x.iter().zip(y).filter(|(a, b)| a != b).count() as u32
}

impl CodeBook {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `m^n / (δ C(n,δ) (m-1)^δ)`.
    pub fn gv_bound(&self) -> BigRational {
        gv_bound(self.m, self.n, self.min_distance)
    }

    /// Exhaustive check that no two distinct members are closer than
    /// `min_distance`: scans the radius-`(δ-1)` ball around every member.
    /// Cost is `|T|·|ball|` rather than `|T|²`.
    pub fn min_distance_holds(&self) -> bool {
        let space = (self.m as usize).pow(self.n);
        let place = place_values(self.m, self.n);
        let index = |w: &[u32]| w.iter().zip(&place).map(|(&d, p)| (d - 1) as usize * p).sum::<usize>();
        let mut member = vec![false; space];
        for w in &self.words {
            let i = index(w);
            if member[i] {
                return false;
            }
            member[i] = true;
        }
        let radius = self.min_distance.saturating_sub(1);
        self.words.iter().all(|w| {
            let i = index(w);
            let mut digits: Vec<u32> = w.iter().map(|d| d - 1).collect();
            let mut clash = false;
            visit_ball(i, &mut digits, &place, self.m, 0, radius, &mut |j| clash |= j != i && member[j]);
            !clash
        })
    }

    /// Smallest pairwise distance by comparing all pairs (`None` below two words).
    pub fn min_pairwise_distance(&self) -> Option<u32> {
        let mut best: Option<u32> = None;
        for i in 0..self.words.len() {
            for j in i + 1..self.words.len() {
                let d = hamming(&self.words[i], &self.words[j]);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}

pub fn gv_bound(m: u32, n: u32, delta: u32) -> BigRational {
    let numer = BigUint::from(m).pow(n);
    let denom = BigUint::from(delta) * binomial(n as u64, delta as u64) * BigUint::from(m - 1).pow(delta);
    BigRational::new(numer.into(), denom.into())
}

/// Greedy lexicographic code: scan `[m]^n` in lexicographic order and admit a
/// tuple iff it is at distance `>= δ` from everything admitted so far.
///
/// Admission marks the radius-`(δ-1)` ball around the new word, so a later
/// tuple is admissible exactly when it is still unmarked.
pub fn greedy_code(m: u32, n: u32, delta: u32) -> Result<CodeBook> {
    if m < 2 || delta < 1 || 2 * delta > n {
        return Err(Error::InvalidArgument(format!(
            "greedy_code needs m >= 2 and 1 <= δ <= n/2 (m={m}, n={n}, δ={delta})"
        )));
    }
    let space = (m as u64)
        .checked_pow(n)
        .filter(|&s| s <= CODE_SPACE_CAP)
        .ok_or_else(|| Error::SpaceTooLarge {
            size: BigUint::from(m).pow(n).to_string(),
            cap: CODE_SPACE_CAP,
        })? as usize;

    let place = place_values(m, n);
    let mut covered = vec![false; space];
    let mut words = Vec::new();
    let mut digits = vec![0u32; n as usize];
    for idx in 0..space {
        if !covered[idx] {
            let mut rest = idx;
            for (d, p) in digits.iter_mut().zip(&place) {
                *d = (rest / p) as u32;
                rest %= p;
            }
            visit_ball(idx, &mut digits, &place, m, 0, delta - 1, &mut |j| covered[j] = true);
            words.push(digits.iter().map(|d| d + 1).collect());
        }
    }
    Ok(CodeBook {
        m,
        n,
        min_distance: delta,
        words,
    })
}

/// Calls `f` on every index within Hamming distance `radius` of `idx`
/// (including `idx`), changing only positions `from..`. `digits` is restored.
fn visit_ball(
    idx: usize,
    digits: &mut [u32],
    place: &[usize],
    m: u32,
    from: usize,
    radius: u32,
    f: &mut impl FnMut(usize),
) {
    f(idx);
    if radius == 0 {
        return;
    }
    for pos in from..digits.len() {
        let orig = digits[pos];
        let base = idx - orig as usize * place[pos];
        for v in (0..m).filter(|&v| v != orig) {
            digits[pos] = v;
            visit_ball(base + v as usize * place[pos], digits, place, m, pos + 1, radius - 1, f);
        }
        digits[pos] = orig;
    }
}

fn place_values(m: u32, n: u32) -> Vec<usize> {
    // Position 0 is the most significant digit.
    let mut place = vec![1usize; n as usize];
    for i in (0..n as usize).rev().skip(1) {
        place[i] = place[i + 1] * m as usize;
    }
    place
}

/// `max(0, |T|/n! · (1 - (|T|-1)/δ!))`, a lower bound on `Pr[L_{m,n} = n]`
/// when a distance-`δ` code of size `|T|` exists in `[m]^n`.
///
/// Bonferroni with the exact count `|T|(|T|-1)` of ordered distinct pairs,
/// each contributing at most `1/(δ! n!)`. A singleton code therefore gives
/// exactly `1/n!`.
pub fn completion_lower(m: u32, n: u32, t_size: u64, delta: u32) -> Result<BigRational> {
    if m < 1 || n < 1 || t_size < 1 || delta < 1 {
        return Err(Error::InvalidArgument(
            "completion_lower needs m, n, |T|, δ >= 1".into(),
        ));
    }
    let t = BigInt::from(t_size);
    let first = BigRational::new(t.clone(), factorial(n as u64).into());
    let second = BigRational::one() - BigRational::new(t - 1, factorial(delta as u64).into());
    let bound = first * second;
    Ok(if bound < BigRational::zero() {
        BigRational::zero()
    } else {
        bound
    })
}

/// `(m/1.03)^n / (2n · n!)`, kept in log space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogBound {
    pub ln_value: f64,
    pub value: f64,
    /// The bound only holds for `n` large enough in terms of `m`.
    pub asymptotic: bool,
}

pub fn lower_cont_asymptotic(m: u32, n: u32) -> Result<LogBound> {
    if m < 2 {
        return Err(Error::Domain("lower_cont_asymptotic requires m >= 2".into()));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let (m, n) = (m as f64, n as f64);
    let ln_value = n * (m / 1.03).ln() - (2.0 * n).ln() - ln_gamma(n + 1.0);
    Ok(LogBound {
        ln_value,
        value: ln_value.exp(),
        asymptotic: true,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyCheck {
    pub binomial: BigUint,
    pub log2_binomial: f64,
    /// `n · H(δ/n)` in bits.
    pub entropy_bits: f64,
    pub holds: bool,
}

/// Binary entropy with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// `C(n,δ) <= 2^{n H(δ/n)}`, decided exactly through the identity
/// `2^{n H(δ/n)} = n^n / (δ^δ (n-δ)^{n-δ})`.
pub fn entropy_binom_check(n: u32, delta: u32) -> Result<EntropyCheck> {
    if delta > n || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "entropy_binom_check needs 0 <= δ <= n, n >= 1 (n={n}, δ={delta})"
        )));
    }
    let c = binomial(n as u64, delta as u64);
    let pow = |b: u32, e: u32| BigUint::from(b).pow(e);
    let holds = &c * pow(delta, delta) * pow(n - delta, n - delta) <= pow(n, n);
    let log2_binomial = c.to_f64().map_or(f64::INFINITY, f64::log2);
    Ok(EntropyCheck {
        log2_binomial,
        binomial: c,
        entropy_bits: n as f64 * binary_entropy(delta as f64 / n as f64),
        holds,
    })
}

fn block_inputs(m: u32, n: u32, k: u32) -> Result<BigRational> {
    if m < 1 || k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "block_lower_bound needs m >= 1 and 1 <= k <= n (m={m}, n={n}, k={k})"
        )));
    }
    complete_prob(m, k)
}

/// `1 - (1 - p_k)^{⌊n/k⌋}` with `p_k = Pr[L¹_{m,k} = k] <= Pr[L_{m,k} = k]`;
/// a lower bound on `Pr[L_{m,n} ≥ k]` from `⌊n/k⌋` disjoint value blocks.
pub fn block_lower_bound(m: u32, n: u32, k: u32) -> Result<f64> {
    let p = rational_to_f64(&block_inputs(m, n, k)?);
    if p >= 1.0 {
        return Ok(1.0);
    }
    let blocks = (n / k) as f64;
    Ok(-(blocks * (-p).ln_1p()).exp_m1())
}

/// Exact counterpart of [`block_lower_bound`]; practical for small `⌊n/k⌋`.
pub fn block_lower_bound_exact(m: u32, n: u32, k: u32) -> Result<BigRational> {
    let p = block_inputs(m, n, k)?;
    let miss = BigRational::one() - p;
    Ok(BigRational::one() - num_traits::pow(miss, (n / k) as usize))
}

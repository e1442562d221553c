//! Exact rational engine for complete-subsequence counts.
//!
//! Two independent routes compute `Pr[L¹_{m,n} = n] = h_m(n) / |S_{m,n}|`:
//!
//! * the Horton–Kurn sum over weak compositions ([`horton_kurn_h`]), and
//! * the generating-function route: raise `q_{m,1}(x) = -m! Σ_{j=1}^m x^j/(m-j)!`
//!   to the `n`-th power, apply `Φ: x^l ↦ x^l / l!`, evaluate at `x = -1`
//!   ([`p_value`]).
//!
//! Everything stays in exact arithmetic; floats only appear in reports.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combin::factorial_table;
use crate::error::{Error, Result};
use crate::words::multiset_count;

pub type ExactRational = BigRational;

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders as `p/q`, or `p` when the denominator is one.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("not a rational: {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Dense polynomial with rational coefficients, lowest degree first.
/// The last stored coefficient is non-zero; the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        let mut p = RationalPolynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(coeffs: I) -> Self {
        Self::new(
            coeffs
                .into_iter()
                .map(|c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        RationalPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        RationalPolynomial {
            coeffs: vec![BigRational::one()],
        }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn pow(&self, e: u32) -> Self {
        // Repeated multiplication; degrees stay in the low hundreds.
        let mut acc = RationalPolynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `Φ(x^l) = x^l / l!`.
    pub fn phi_apply(&self) -> Self {
        let fact = factorial_table(self.coeffs.len());
        Self::new(
            self.coeffs
                .iter()
                .zip(&fact)
                .map(|(c, f)| c / BigRational::from_integer(BigInt::from(f.clone())))
                .collect(),
        )
    }

    /// Inverse of [`phi_apply`](Self::phi_apply): `x^l ↦ l! x^l`.
    pub fn phi_inverse(&self) -> Self {
        let fact = factorial_table(self.coeffs.len());
        Self::new(
            self.coeffs
                .iter()
                .zip(&fact)
                .map(|(c, f)| c * BigRational::from_integer(BigInt::from(f.clone())))
                .collect(),
        )
    }
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn add(self, rhs: Self) -> RationalPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPolynomial::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn sub(self, rhs: Self) -> RationalPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPolynomial::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn neg(self) -> RationalPolynomial {
        RationalPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn mul(self, rhs: Self) -> RationalPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return RationalPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPolynomial::new(out)
    }
}

/// A tuple `(i_1, ..., i_m)` of non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeakComposition {
    pub parts: Vec<u32>,
}

impl WeakComposition {
    pub fn total(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// `l = Σ_j j · i_j` (1-based `j`).
    pub fn weight(&self) -> u64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(j, &p)| (j as u64 + 1) * p as u64)
            .sum()
    }
}

/// All weak compositions of `n` into `m` parts, starting from `(n, 0, ..., 0)`.
pub fn weak_compositions(n: u32, m: u32) -> WeakCompositions {
    assert!(m >= 1, "weak_compositions: m must be positive");
    let mut first = vec![0; m as usize];
    first[0] = n;
    WeakCompositions { next: Some(first) }
}

pub struct WeakCompositions {
    next: Option<Vec<u32>>,
}

impl Iterator for WeakCompositions {
    type Item = WeakComposition;

    fn next(&mut self) -> Option<WeakComposition> {
        let current = self.next.take()?;
        let last = current.len() - 1;
        // Move one unit out of the rightmost non-empty part before `last`,
        // gathering everything in `last` into the slot just after it.
        if let Some(k) = (0..last).rev().find(|&k| current[k] > 0) {
            let mut succ = current.clone();
            succ[k] -= 1;
            if k + 1 == last {
                succ[last] += 1;
            } else {
                succ[k + 1] = succ[last] + 1;
                succ[last] = 0;
            }
            self.next = Some(succ);
        }
        Some(WeakComposition { parts: current })
    }
}

/// Number of words in `S_{m,n}` containing `1 2 ... n` as a subsequence,
/// from the Horton–Kurn formula
///
/// `h_m(n) = Σ_{i ∈ W(n,m)} multinom(n; i) · (mn)!/l! · (-1)^{l-n} / Π_j (m-j)!^{i_j}`.
pub fn horton_kurn_h(m: u32, n: u32) -> Result<BigUint> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be positive".into()));
    }
    let mn = m as usize * n as usize;
    let fact = factorial_table(mn.max(m as usize));
    let to_int = |u: &BigUint| BigInt::from(u.clone());

    let mut total = BigRational::zero();
    for comp in weak_compositions(n, m) {
        let l = comp.weight() as usize;
        let mut denom = BigInt::one();
        for (idx, &part) in comp.parts.iter().enumerate() {
            let j = idx + 1;
            denom *= to_int(&fact[part as usize]);
            denom *= to_int(&fact[m as usize - j]).pow(part);
        }
        // n! (mn)! / l!  is integral since l <= mn.
        let mut numer = to_int(&fact[n as usize]) * to_int(&fact[mn]) / to_int(&fact[l]);
        if (l - n as usize) % 2 == 1 {
            numer = -numer;
        }
        total += BigRational::new(numer, denom);
    }
    if !total.is_integer() || total.is_negative() {
        return Err(Error::InternalInconsistency(format!(
            "Horton–Kurn sum for m={m}, n={n} is {total}, not a non-negative integer"
        )));
    }
    Ok(total.to_integer().to_biguint().expect("checked non-negative"))
}

/// `h_m(n) / |S_{m,n}|`, which also equals `Pr[L¹_{m,N} ≥ n]` for every `N ≥ n`.
pub fn complete_prob(m: u32, n: u32) -> Result<BigRational> {
    let h = horton_kurn_h(m, n)?;
    Ok(BigRational::new(h.into(), multiset_count(m, n).into()))
}

/// `q_{m,1}(x) = -m! Σ_{j=1}^m x^j / (m-j)!`; every coefficient is an integer.
pub fn q_poly(m: u32) -> RationalPolynomial {
    RationalPolynomial::new(
        q_integer_coeffs(m)
            .into_iter()
            .map(BigRational::from_integer)
            .collect(),
    )
}

fn q_integer_coeffs(m: u32) -> Vec<BigInt> {
    let fact = factorial_table(m as usize);
    let mut coeffs = vec![BigInt::zero(); m as usize + 1];
    for j in 1..=m as usize {
        coeffs[j] = -BigInt::from(&fact[m as usize] / &fact[m as usize - j]);
    }
    coeffs
}

pub fn phi_apply(p: &RationalPolynomial) -> RationalPolynomial {
    p.phi_apply()
}

pub fn phi_inverse(p: &RationalPolynomial) -> RationalPolynomial {
    p.phi_inverse()
}

/// `p_{m,n}(-1) = Φ(q_{m,1}^n)(-1)`.
pub fn p_value(m: u32, n: u32) -> Result<BigRational> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be positive".into()));
    }
    let p = q_poly(m).pow(n).phi_apply();
    Ok(p.eval(&-BigRational::one()))
}

/// Yields `p_{m,1}(-1), p_{m,2}(-1), ...` keeping `q_{m,1}^n` as an integer
/// polynomial that is multiplied by `q_{m,1}` once per step.
pub struct CompletionProbabilities {
    q: Vec<BigInt>,
    power: Vec<BigInt>,
    fact: Vec<BigUint>,
    m: u32,
    n: u32,
}

impl CompletionProbabilities {
    pub fn new(m: u32) -> Self {
        assert!(m >= 1);
        CompletionProbabilities {
            q: q_integer_coeffs(m),
            power: vec![BigInt::one()],
            fact: factorial_table(0),
            m,
            n: 0,
        }
    }
}

impl Iterator for CompletionProbabilities {
    type Item = BigRational;

    fn next(&mut self) -> Option<BigRational> {
        let mut next = vec![BigInt::zero(); self.power.len() + self.q.len() - 1];
        for (i, a) in self.power.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in self.q.iter().enumerate().skip(1) {
                next[i + j] += a * b;
            }
        }
        self.power = next;
        self.n += 1;

        let top = self.power.len() - 1;
        while self.fact.len() <= top {
            let k = self.fact.len();
            let f = &self.fact[k - 1] * k;
            self.fact.push(f);
        }
        // Σ_l c_l (-1)^l / l!  =  (Σ_l c_l (-1)^l top!/l!) / top!
        let top_fact = BigInt::from(self.fact[top].clone());
        let mut numer = BigInt::zero();
        for (l, c) in self.power.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scale = &top_fact / BigInt::from(self.fact[l].clone());
            if l % 2 == 0 {
                numer += c * scale;
            } else {
                numer -= c * scale;
            }
        }
        debug_assert!(self.m >= 1);
        Some(BigRational::new(numer, top_fact))
    }
}

/// Truncated value of `Σ_{n≥1} h_m(n) / |S_{m,n}|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSum {
    pub sum: BigRational,
    pub value: f64,
    pub terms_used: u32,
    /// The last term added; the discarded tail is of this order.
    pub truncation_bound: f64,
}

/// Sums terms until, at some index `n ≥ 3m+3`, the term is below `eps` and the
/// last four terms are non-increasing. The terms rise up to `n ≈ m` before
/// decaying, so the index guard keeps the rule from firing early.
pub fn l1_series(m: u32, eps: f64, max_n: u32) -> Result<SeriesSum> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let guard = 3 * m + 3;
    let mut sum = BigRational::zero();
    let mut recent: Vec<f64> = Vec::new();
    for (idx, term) in CompletionProbabilities::new(m).take(max_n as usize).enumerate() {
        let n = idx as u32 + 1;
        let t = rational_to_f64(&term);
        sum += term;
        recent.push(t);
        let settled = recent.len() >= 4
            && recent[recent.len() - 4..].windows(2).all(|w| w[0] >= w[1]);
        if n >= guard && t < eps && settled {
            return Ok(SeriesSum {
                value: rational_to_f64(&sum),
                sum,
                terms_used: n,
                truncation_bound: t,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "l1_series",
        iterations: max_n as usize,
    })
}

/// Exact `E[L¹_{m,n}] = Σ_{k=1}^n Pr[L¹_{m,n} ≥ k]` at finite `n`.
pub fn finite_l1_expectation(m: u32, n: u32) -> BigRational {
    CompletionProbabilities::new(m)
        .take(n as usize)
        .fold(BigRational::zero(), |acc, t| acc + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use crate::words::count_complete_bruteforce;

    fn gcd_reduce_check(r: &BigRational) -> bool {
        r.numer().gcd(r.denom()).is_one() && r.denom().is_positive()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn compositions_small() {
        let got: Vec<Vec<u32>> = weak_compositions(2, 2).map(|c| c.parts).collect();
        assert_eq!(got, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let got: Vec<Vec<u32>> = weak_compositions(0, 3).map(|c| c.parts).collect();
        assert_eq!(got, vec![vec![0, 0, 0]]);
        assert_eq!(weak_compositions(4, 3).count(), 15);
        assert_eq!(weak_compositions(5, 1).count(), 1);
        for c in weak_compositions(6, 4) {
            assert_eq!(c.total(), 6);
        }
        let distinct: std::collections::HashSet<_> = weak_compositions(6, 4).collect();
        assert_eq!(distinct.len(), 84); // C(9,3)
    }

    #[test]
    fn horton_kurn_small() {
        assert_eq!(horton_kurn_h(1, 5).unwrap(), BigUint::from(1u32));
        assert_eq!(horton_kurn_h(2, 2).unwrap(), BigUint::from(5u32));
        assert_eq!(horton_kurn_h(2, 3).unwrap(), count_complete_bruteforce(2, 3).unwrap());
        assert!(horton_kurn_h(0, 3).is_err());
    }

    #[test]
    fn completion_probabilities() {
        assert_eq!(complete_prob(2, 2).unwrap(), q(5, 6));
        assert_eq!(complete_prob(1, 4).unwrap(), q(1, 24));
        assert_eq!(complete_prob(2, 1).unwrap(), q(1, 1));
        assert!(gcd_reduce_check(&complete_prob(3, 4).unwrap()));
    }

    #[test]
    fn q_polynomials() {
        assert_eq!(q_poly(1), RationalPolynomial::from_integers([0, -1]));
        assert_eq!(q_poly(2), RationalPolynomial::from_integers([0, -2, -2]));
        assert_eq!(q_poly(3), RationalPolynomial::from_integers([0, -3, -6, -6]));
    }

    #[test]
    fn phi_examples() {
        let x2 = RationalPolynomial::from_integers([0, 0, 1]);
        assert_eq!(phi_apply(&x2), RationalPolynomial::new(vec![q(0, 1), q(0, 1), q(1, 2)]));
        assert_eq!(phi_apply(&RationalPolynomial::one()), RationalPolynomial::one());
        assert!(phi_apply(&RationalPolynomial::zero()).is_zero());
    }

    #[test]
    fn p_value_examples() {
        // Φ((−2x−2x²)²) = 2x² + (4/3)x³ + x⁴/6
        let p = q_poly(2).pow(2).phi_apply();
        assert_eq!(
            p,
            RationalPolynomial::new(vec![q(0, 1), q(0, 1), q(2, 1), q(4, 3), q(1, 6)])
        );
        assert_eq!(p_value(2, 2).unwrap(), q(5, 6));
        assert_eq!(p_value(1, 3).unwrap(), q(1, 6));
        assert_eq!(p_value(3, 3).unwrap(), complete_prob(3, 3).unwrap());
    }

    #[test]
    fn incremental_generator_matches_p_value() {
        for m in 1..=4 {
            for (idx, t) in CompletionProbabilities::new(m).take(8).enumerate() {
                assert_eq!(t, p_value(m, idx as u32 + 1).unwrap(), "m={m} n={}", idx + 1);
            }
        }
    }

    #[test]
    fn series_closed_values() {
        let s = l1_series(1, 1e-12, 500).unwrap();
        assert!((s.value - (std::f64::consts::E - 1.0)).abs() < 1e-9);
        assert!(s.terms_used >= 6);
        let e = std::f64::consts::E;
        let s = l1_series(2, 1e-12, 500).unwrap();
        assert!((s.value - (e * (1f64.cos() + 1f64.sin()) - 1.0)).abs() < 1e-9);
        assert!(s.truncation_bound < 1e-12);
    }

    #[test]
    fn series_errors() {
        assert!(matches!(l1_series(3, 1e-12, 5), Err(Error::NoConvergence { .. })));
        assert!(l1_series(3, 0.0, 100).is_err());
        assert!(l1_series(0, 1e-3, 100).is_err());
    }

    #[test]
    fn rational_strings() {
        let r = q(10, 12);
        assert_eq!(rational_to_string(&r), "5/6");
        assert_eq!(parse_rational("5/6").unwrap(), r);
        assert_eq!(rational_to_string(&q(4, 2)), "2");
        assert!(parse_rational("1/0").is_err());
    }
}

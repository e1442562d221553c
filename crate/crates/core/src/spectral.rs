//! Zeros of the truncated exponential `E_m(x) = Σ_{k≤m} x^k/k!` and the
//! closed form `lim_n E[L¹_{m,n}] = -1 - Σ_i α_i⁻¹ e^{-α_i}` built on them.
//!
//! Also hosts the diagnostics around that formula: inverse power sums of the
//! zeros (checked both numerically and through Newton's identities), the
//! coefficients of `x^{m+1} / ((m+1)! R_m(x))` with `R_m = e^x - E_m`, and the
//! split of the zeros by real part.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::combin::factorial_table;
use crate::error::{Error, Result};
use crate::exact::{rational_to_f64, RationalPolynomial};
use crate::precision::{BigComplex, BigFloat};

pub const DEFAULT_BITS: u32 = 128;
const MAX_ITERATIONS: usize = 500;

/// Defaults for `root_partition_diagnostic`, inside `(0, 1 - ln 2)`.
pub const DEFAULT_GAMMAS: (f64, f64, f64) = (0.15, 0.22, 0.29);

pub fn truncated_exp(m: u32) -> RationalPolynomial {
    let fact = factorial_table(m as usize);
    RationalPolynomial::new(
        fact.into_iter()
            .map(|f| BigRational::new(BigInt::one(), f.into()))
            .collect(),
    )
}

/// Certified zeros of `E_m`.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub m: u32,
    /// Requested precision in bits.
    pub bits: u32,
    /// Precision the roots are carried at (requested plus guard bits).
    pub working_bits: u32,
    pub roots: Vec<BigComplex>,
    /// `|E_m(α_i)|` evaluated at the working precision.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl RootSet {
    /// Residual ceiling used for certification: `10^-(bits/4)`.
    pub fn tolerance(&self) -> f64 {
        certification_tolerance(self.bits)
    }

    pub fn roots_f64(&self) -> Vec<(f64, f64)> {
        self.roots.iter().map(BigComplex::to_f64_pair).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let pts = self.roots_f64();
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.min((pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1));
            }
        }
        best
    }

    /// Every root with a non-negligible imaginary part has its conjugate in the set.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        let pts = self.roots_f64();
        pts.iter().all(|&(re, im)| {
            im.abs() <= tol
                || pts
                    .iter()
                    .any(|&(r2, i2)| (r2 - re).abs() <= tol && (i2 + im).abs() <= tol)
        })
    }

    fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.roots.len() != self.m as usize {
            return Err(format!("{} roots for degree {}", self.roots.len(), self.m));
        }
        let tol = self.tolerance();
        if let Some(r) = self.residuals.iter().find(|&&r| !(r < tol)) {
            return Err(format!("residual {r:e} above tolerance {tol:e}"));
        }
        if self.m > 1 && !(self.min_pairwise_distance() > 1e-6 * self.m as f64) {
            return Err("roots are not pairwise distinct".into());
        }
        if !self.is_conjugate_closed(1e-9 * self.m.max(1) as f64) {
            return Err("roots are not closed under conjugation".into());
        }
        Ok(())
    }
}

pub fn certification_tolerance(bits: u32) -> f64 {
    10f64.powf(-(bits as f64) / 4.0)
}

fn working_bits(m: u32, bits: u32) -> u32 {
    // Evaluating near |x| ~ m cancels about 1.44·|x| bits.
    bits + 32 + 2 * m
}

/// Evaluates `p(z)` and `p'(z)` by Horner's scheme.
fn eval_with_derivative(coeffs: &[BigFloat], z: &BigComplex) -> (BigComplex, BigComplex) {
    let prec = z.precision();
    let mut p = BigComplex::zero(prec);
    let mut dp = BigComplex::zero(prec);
    for c in coeffs.iter().rev() {
        dp = &(&dp * z) + &p;
        p = &p * z;
        p.re = &p.re + c;
    }
    (p, dp)
}

fn eval(coeffs: &[BigFloat], z: &BigComplex) -> BigComplex {
    let prec = z.precision();
    let mut p = BigComplex::zero(prec);
    for c in coeffs.iter().rev() {
        p = &p * z;
        p.re = &p.re + c;
    }
    p
}

/// Finds all `m` zeros of `E_m` by Aberth–Ehrlich simultaneous iteration on
/// `m!·E_m`, started from equally spaced points on the circle `|z| = m/2`,
/// followed by two Newton polishing steps per root.
pub fn find_roots(m: u32, bits: u32) -> Result<RootSet> {
    if m == 0 {
        return Err(Error::InvalidArgument("E_0 = 1 has no zeros".into()));
    }
    let wp = working_bits(m, bits);
    let fact = factorial_table(m as usize);
    // m!·E_m(x) = Σ_k (m!/k!) x^k, integer and monic.
    let monic: Vec<BigFloat> = fact
        .iter()
        .map(|f| BigFloat::from_bigint(BigInt::from(&fact[m as usize] / f), wp))
        .collect();

    let radius = m as f64 / 2.0;
    let offset = std::f64::consts::PI / m as f64;
    let mut z: Vec<BigComplex> = (0..m)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64 + offset;
            BigComplex::from_f64(radius * theta.cos(), radius * theta.sin(), wp)
        })
        .collect();

    let one = BigFloat::one(wp);
    let target = -(wp as i64) + 12;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut worst = i64::MIN;
        let mut next = Vec::with_capacity(z.len());
        for i in 0..z.len() {
            let (p, dp) = eval_with_derivative(&monic, &z[i]);
            if p.is_zero() {
                next.push(z[i].clone());
                continue;
            }
            let ratio = &p / &dp;
            let mut repulsion = BigComplex::zero(wp);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    repulsion = &repulsion + &(&z[i] - zj).recip();
                }
            }
            let mut denom = &ratio * &repulsion;
            denom = BigComplex::new(&one - &denom.re, -&denom.im);
            let step = &ratio / &denom;
            worst = worst.max(step.magnitude() - z[i].magnitude());
            next.push(&z[i] - &step);
        }
        z = next;
        if worst < target {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "find_roots",
            iterations,
        });
    }

    for root in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = eval_with_derivative(&monic, root);
            if p.is_zero() {
                break;
            }
            *root = &*root - &(&p / &dp);
        }
    }

    // Report in a fixed order: by real part, then imaginary part.
    z.sort_by(|a, b| {
        let (ar, ai) = a.to_f64_pair();
        let (br, bi) = b.to_f64_pair();
        ar.total_cmp(&br).then(ai.total_cmp(&bi))
    });

    let e_coeffs: Vec<BigFloat> = truncated_exp(m)
        .coeffs()
        .iter()
        .map(|c| BigFloat::from_rational(c, wp))
        .collect();
    let residuals = z.iter().map(|r| eval(&e_coeffs, r).abs().to_f64()).collect();

    let set = RootSet {
        m,
        bits,
        working_bits: wp,
        roots: z,
        residuals,
        iterations,
    };
    set.check_invariants().map_err(|_| Error::NoConvergence {
        what: "find_roots certification",
        iterations,
    })?;
    Ok(set)
}

/// Value of `-1 - Σ α⁻¹ e^{-α}` with the leftover imaginary part.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub m: u32,
    pub value: BigFloat,
    pub imaginary_residue: f64,
}

impl ClosedForm {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

pub fn l1_closed_form(m: u32, bits: u32) -> Result<ClosedForm> {
    let roots = find_roots(m, bits)?;
    Ok(closed_form_from_roots(&roots))
}

pub fn closed_form_from_roots(roots: &RootSet) -> ClosedForm {
    let wp = roots.working_bits;
    let mut total = BigComplex::zero(wp);
    for alpha in &roots.roots {
        let term = &(-alpha).exp() / alpha;
        total = &total + &term;
    }
    let value = &(-&BigFloat::one(wp)) - &total.re;
    ClosedForm {
        m: roots.m,
        value: value.with_precision(roots.bits),
        imaginary_residue: total.im.to_f64().abs(),
    }
}

/// `m + 1 - 1/(m+2)`.
pub fn approx_l1(m: u32) -> f64 {
    m as f64 + 1.0 - 1.0 / (m as f64 + 2.0)
}

/// Exact `Σ_i α_i^{-t}` for `t = 1..=t_max`, from Newton's identities on
/// `m! x^m E_m(1/x)`, whose zeros are the `α_i⁻¹`. No root finding involved.
pub fn newton_inverse_power_sums(m: u32, t_max: u32) -> Vec<BigRational> {
    let fact = factorial_table(m as usize);
    // Monic x^m + a_1 x^{m-1} + ... + a_m with a_j = 1/j!.
    let a: Vec<BigRational> = fact
        .iter()
        .map(|f| BigRational::new(BigInt::one(), f.clone().into()))
        .collect();
    let mut p: Vec<BigRational> = vec![BigRational::zero()]; // p[0] unused
    for t in 1..=t_max as usize {
        let mut acc = BigRational::zero();
        for j in 1..t.min(m as usize + 1) {
            acc += &a[j] * &p[t - j];
        }
        if t <= m as usize {
            acc += BigRational::from_integer(BigInt::from(t)) * &a[t];
        }
        p.push(-acc);
    }
    p.remove(0);
    p
}

/// Known values of `Σ α_i^{-t}` for `t = 1..=m+2`.
pub fn expected_inverse_power_sum(m: u32, t: u32) -> BigRational {
    let inv_fact = || BigRational::new(BigInt::one(), crate::combin::factorial(m as u64).into());
    match t {
        1 => -BigRational::one(),
        t if t <= m => BigRational::zero(),
        t if t == m + 1 => inv_fact(),
        t if t == m + 2 => -inv_fact(),
        _ => panic!("no tabulated inverse power sum for t = {t} > m + 2"),
    }
}

#[derive(Clone, Debug)]
pub struct PowerSumRow {
    pub t: u32,
    pub computed: (f64, f64),
    pub expected: BigRational,
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct PowerSumReport {
    pub m: u32,
    pub rows: Vec<PowerSumRow>,
    pub max_deviation: f64,
}

/// Sums `α_i^{-t}` over the root set for `t = 1..=m+2` and compares with the
/// tabulated values `-1, 0, ..., 0, 1/m!, -1/m!`.
pub fn power_sum_check(roots: &RootSet) -> PowerSumReport {
    let m = roots.m;
    let wp = roots.working_bits;
    let inverses: Vec<BigComplex> = roots.roots.iter().map(BigComplex::recip).collect();
    let mut powers = inverses.clone();
    let mut rows = Vec::new();
    for t in 1..=m + 2 {
        if t > 1 {
            for (pw, inv) in powers.iter_mut().zip(&inverses) {
                *pw = &*pw * inv;
            }
        }
        let sum = powers
            .iter()
            .fold(BigComplex::zero(wp), |acc, x| &acc + x);
        let expected = expected_inverse_power_sum(m, t);
        let diff_re = &sum.re - &BigFloat::from_rational(&expected, wp);
        let deviation = diff_re.to_f64().hypot(sum.im.to_f64());
        rows.push(PowerSumRow {
            t,
            computed: sum.to_f64_pair(),
            expected,
            deviation,
        });
    }
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    PowerSumReport {
        m,
        rows,
        max_deviation,
    }
}

/// Coefficients `c_0..c_K` of `x^{m+1} / ((m+1)! R_m(x)) = 1 + Σ c_k x^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReciprocalSeries {
    pub m: u32,
    pub coefficients: Vec<BigRational>,
}

impl ReciprocalSeries {
    pub fn c(&self, k: usize) -> f64 {
        rational_to_f64(&self.coefficients[k])
    }

    /// `|c_k| <= ½ (2/(m+2))^k` for every `k >= 1`, compared exactly.
    pub fn within_envelope(&self) -> bool {
        self.envelope_violations().is_empty()
    }

    pub fn envelope_violations(&self) -> Vec<usize> {
        let base = BigRational::new(BigInt::from(2), BigInt::from(self.m + 2));
        let mut bound = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut bad = Vec::new();
        for (k, c) in self.coefficients.iter().enumerate().skip(1) {
            bound = &bound * &base;
            if c.abs() > bound {
                bad.push(k);
            }
        }
        bad
    }
}

/// Series reciprocal of `1 + (m+1)! Σ_{k≥1} x^k/(m+1+k)!`, exact.
pub fn reciprocal_series(m: u32, k_max: usize) -> Result<ReciprocalSeries> {
    if k_max < 2 {
        return Err(Error::InvalidArgument("reciprocal_series needs K >= 2".into()));
    }
    let fact = factorial_table(m as usize + 1 + k_max);
    let base = BigInt::from(fact[m as usize + 1].clone());
    let a: Vec<BigRational> = (0..=k_max)
        .map(|k| {
            if k == 0 {
                BigRational::one()
            } else {
                BigRational::new(base.clone(), fact[m as usize + 1 + k].clone().into())
            }
        })
        .collect();
    let mut c = vec![BigRational::one()];
    for k in 1..=k_max {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            acc += &a[j] * &c[k - j];
        }
        c.push(-acc);
    }
    Ok(ReciprocalSeries { m, coefficients: c })
}

#[derive(Clone, Debug)]
pub struct PartitionReport {
    pub m: u32,
    pub gammas: (f64, f64, f64),
    /// Indices into the root set with `Re α <= γm`.
    pub small: Vec<usize>,
    /// Indices with `Re α > γm`.
    pub large: Vec<usize>,
    /// `|α| >= m e^{γ⁻-1}` on the large part.
    pub large_magnitude_ok: bool,
    /// `|α| <= m e^{γ⁺-1}` on the small part.
    pub small_magnitude_ok: bool,
    /// `|α| < m/2` on the small part.
    pub small_half_ok: bool,
    pub large_sum_abs: f64,
    pub large_sum_bound: f64,
    pub large_sum_ok: bool,
}

impl PartitionReport {
    pub fn all_ok(&self) -> bool {
        self.large_magnitude_ok && self.small_magnitude_ok && self.small_half_ok && self.large_sum_ok
    }
}

/// Splits the zeros by real part at `γm` and checks the magnitude bounds on
/// each side together with `|Σ_{large} α⁻¹ e^{-α}| <= γ⁻¹ e^{-γm}`. The
/// magnitude bounds are asymptotic, so failures at small `m` are reported
/// rather than raised.
pub fn root_partition_diagnostic(
    roots: &RootSet,
    gamma_minus: f64,
    gamma: f64,
    gamma_plus: f64,
) -> Result<PartitionReport> {
    let ceiling = 1.0 - std::f64::consts::LN_2;
    if !(0.0 < gamma_minus && gamma_minus < gamma && gamma < gamma_plus && gamma_plus < ceiling) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < γ⁻ < γ < γ⁺ < 1 - ln 2, got ({gamma_minus}, {gamma}, {gamma_plus})"
        )));
    }
    let m = roots.m as f64;
    let wp = roots.working_bits;
    let threshold = gamma * m;
    let (mut small, mut large) = (Vec::new(), Vec::new());
    for (i, r) in roots.roots.iter().enumerate() {
        if r.re.to_f64() <= threshold {
            small.push(i);
        } else {
            large.push(i);
        }
    }
    let abs = |i: usize| roots.roots[i].abs().to_f64();
    let large_magnitude_ok = large.iter().all(|&i| abs(i) >= m * (gamma_minus - 1.0).exp());
    let small_magnitude_ok = small.iter().all(|&i| abs(i) <= m * (gamma_plus - 1.0).exp());
    let small_half_ok = small.iter().all(|&i| abs(i) < m / 2.0);
    let mut sum = BigComplex::zero(wp);
    for &i in &large {
        let alpha = &roots.roots[i];
        sum = &sum + &(&(-alpha).exp() / alpha);
    }
    let large_sum_abs = sum.abs().to_f64();
    let large_sum_bound = (-gamma * m).exp() / gamma;
    Ok(PartitionReport {
        m: roots.m,
        gammas: (gamma_minus, gamma, gamma_plus),
        small,
        large,
        large_magnitude_ok,
        small_magnitude_ok,
        small_half_ok,
        large_sum_abs,
        large_sum_bound,
        large_sum_ok: large_sum_abs <= large_sum_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_exponentials() {
        assert_eq!(truncated_exp(0), RationalPolynomial::from_integers([1]));
        assert_eq!(truncated_exp(1), RationalPolynomial::from_integers([1, 1]));
        let e2 = truncated_exp(2);
        assert_eq!(e2.coeff(2), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn roots_for_small_m() {
        let r1 = find_roots(1, 128).unwrap();
        let (re, im) = r1.roots_f64()[0];
        assert!((re + 1.0).abs() < 1e-30 && im.abs() < 1e-30);

        let r2 = find_roots(2, 128).unwrap();
        let pts = r2.roots_f64();
        assert!((pts[0].0 + 1.0).abs() < 1e-15 && (pts[0].1 + 1.0).abs() < 1e-15);
        assert!((pts[1].0 + 1.0).abs() < 1e-15 && (pts[1].1 - 1.0).abs() < 1e-15);

        // Real root of x³ + 3x² + 6x + 6, located independently by bisection.
        let cubic = |x: f64| ((x + 3.0) * x + 6.0) * x + 6.0;
        let (mut lo, mut hi) = (-2.0f64, -1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cubic(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r3 = find_roots(3, 128).unwrap();
        let real: Vec<_> = r3.roots_f64().into_iter().filter(|p| p.1.abs() < 1e-20).collect();
        assert_eq!(real.len(), 1);
        assert!((real[0].0 - lo).abs() < 1e-14);
        assert!((lo + 1.5961).abs() < 1e-4);
    }

    #[test]
    fn root_set_invariants() {
        for m in [1, 5, 12, 20] {
            let rs = find_roots(m, 128).unwrap();
            assert_eq!(rs.roots.len(), m as usize);
            assert!(rs.max_residual() < 1e-32, "m={m}: {}", rs.max_residual());
            assert!(rs.is_conjugate_closed(1e-12));
            assert!(m == 1 || rs.min_pairwise_distance() > 1e-6 * m as f64);
        }
        let low = find_roots(10, 53).unwrap();
        assert!(low.max_residual() < certification_tolerance(53));
        assert!(find_roots(0, 64).is_err());
    }

    #[test]
    fn closed_form_small_m() {
        let e = std::f64::consts::E;
        let c1 = l1_closed_form(1, 128).unwrap();
        assert!((c1.to_f64() - (e - 1.0)).abs() < 1e-15);
        assert_eq!(c1.value.to_decimal_string(25), "1.7182818284590452353602875");
        let c2 = l1_closed_form(2, 128).unwrap();
        assert!((c2.to_f64() - (e * (1f64.cos() + 1f64.sin()) - 1.0)).abs() < 1e-14);
        assert!(c2.imaginary_residue < 1e-30);
    }

    #[test]
    fn approximation_values() {
        assert_eq!(approx_l1(2), 2.75);
        assert!((approx_l1(1) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(approx_l1(10), 11.0 - 1.0 / 12.0);
        let gap = (std::f64::consts::E - 1.0) - approx_l1(1);
        assert!((gap - 0.0516).abs() < 1e-3);
    }

    #[test]
    fn newton_sums_match_table() {
        for m in 1..=12 {
            let sums = newton_inverse_power_sums(m, m + 2);
            for t in 1..=m + 2 {
                assert_eq!(sums[t as usize - 1], expected_inverse_power_sum(m, t), "m={m} t={t}");
            }
        }
    }

    #[test]
    fn power_sums_m2_by_hand() {
        let report = power_sum_check(&find_roots(2, 128).unwrap());
        assert!((report.rows[0].computed.0 + 1.0).abs() < 1e-15);
        assert!((report.rows[2].computed.0 - 0.5).abs() < 1e-15);
        assert!(report.max_deviation < 1e-30);
    }

    #[test]
    fn reciprocal_series_examples() {
        let s = reciprocal_series(2, 5).unwrap();
        assert_eq!(s.coefficients[0], BigRational::one());
        assert_eq!(s.coefficients[1], BigRational::new((-1).into(), 4.into()));
        let s = reciprocal_series(4, 8).unwrap();
        assert!(s.within_envelope());
        assert!(reciprocal_series(4, 1).is_err());
    }

    #[test]
    fn partition_diagnostic_shapes() {
        let r1 = find_roots(1, 128).unwrap();
        let rep = root_partition_diagnostic(&r1, 0.15, 0.22, 0.29).unwrap();
        assert_eq!(rep.small.len() + rep.large.len(), 1);
        assert_eq!(rep.small, vec![0]);
        assert!(root_partition_diagnostic(&r1, 0.2, 0.1, 0.29).is_err());
        assert!(root_partition_diagnostic(&r1, 0.1, 0.2, 0.31).is_err());

        let r12 = find_roots(12, 128).unwrap();
        let rep = root_partition_diagnostic(&r12, 0.15, 0.22, 0.29).unwrap();
        assert!(rep.large_sum_ok, "{} > {}", rep.large_sum_abs, rep.large_sum_bound);
    }
}

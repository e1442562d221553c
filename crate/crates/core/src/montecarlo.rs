//! Seeded Monte Carlo estimators.
//!
//! Trial `i` draws its word from `RandomSource::new(seed, offset + i)`, so the
//! sample does not depend on how trials are scheduled. Every statistic here is
//! a function of an integer-valued outcome, so workers accumulate integer
//! histograms and merge them by addition. The merge is exact and
//! order-independent: results are bitwise identical for any thread count.

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::combin::{binomial, factorial};
use crate::error::{Error, Result};
use crate::exact::{complete_prob, rational_to_f64};
use crate::words::{check_shape, fill_uniform, l_max_of, l_start_of, lis_of, RandomSource};

/// Longest word sampled per trial.
pub const MAX_TRIAL_LENGTH: u64 = 100_000_000;
/// Largest moment order accepted by [`moments`].
pub const MAX_MOMENT_ORDER: u32 = 8;
/// Stream offset for the second, independent sample in the observation checks.
pub const SECONDARY_STREAM: u64 = 1 << 62;

/// Trials per work unit: at most 256, and small enough that runs with few,
/// expensive trials still split into about 64 units.
fn chunk_size(trials: u64) -> u64 {
    (trials / 64).clamp(1, 256)
}

/// How trials are spread over threads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool; sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

/// Counts of integer outcomes; `counts[v]` trials produced `v`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn record(&mut self, value: u32) {
        let v = value as usize;
        if v >= self.counts.len() {
            self.counts.resize(v + 1, 0);
        }
        self.counts[v] += 1;
    }

    pub fn merge(mut self, other: Histogram) -> Histogram {
        if other.counts.len() > self.counts.len() {
            return other.merge(self);
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (v as f64, c as f64))
    }

    /// Exact sample mean up to the final division.
    pub fn mean(&self) -> f64 {
        let sum: u128 = self.counts.iter().enumerate().map(|(v, &c)| v as u128 * c as u128).sum();
        sum as f64 / self.total() as f64
    }

    /// Sample mean of `f(outcome)` together with its standard error.
    fn mean_of(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let t = self.total() as f64;
        let mean = self.iter().map(|(v, c)| c * f(v)).sum::<f64>() / t;
        let ss = self.iter().map(|(v, c)| c * (f(v) - mean).powi(2)).sum::<f64>();
        let se = if t > 1.0 { (ss / (t - 1.0)).sqrt() / t.sqrt() } else { 0.0 };
        (mean, se)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub ci95: (f64, f64),
}

impl Estimate {
    pub fn new(mean: f64, std_error: f64, trials: u64, seed: u64) -> Self {
        let half = 1.96 * std_error;
        Estimate {
            mean,
            std_error,
            trials,
            seed,
            ci95: (mean - half, mean + half),
        }
    }

    pub fn from_histogram(h: &Histogram, seed: u64) -> Self {
        let (_, se) = h.mean_of(|v| v);
        Estimate::new(h.mean(), se, h.total(), seed)
    }

    /// `|mean - target|` in standard errors (0 when both agree exactly).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Trial count, master seed and execution mode shared by all estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub trials: u64,
    pub seed: u64,
    pub execution: Execution,
}

impl MonteCarlo {
    pub fn new(trials: u64, seed: u64) -> Self {
        MonteCarlo {
            trials,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub(crate) fn validate(&self, m: u32, n: u32) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::InvalidArgument("at least 2 trials are required".into()));
        }
        check_shape(m, n)?;
        if m as u64 * n as u64 > MAX_TRIAL_LENGTH {
            return Err(Error::InvalidArgument(format!(
                "m*n = {} exceeds the per-trial limit {MAX_TRIAL_LENGTH}",
                m as u64 * n as u64
            )));
        }
        Ok(())
    }

    /// Runs `trial` on streams `offset..offset + trials` and histograms the results.
    pub fn histogram<F>(&self, offset: u64, trial: F) -> Histogram
    where
        F: Fn(&mut ChaCha8Rng, &mut Vec<u32>) -> u32 + Sync,
    {
        let chunk = chunk_size(self.trials);
        let chunks = self.trials.div_ceil(chunk);
        let run_chunk = |c: u64| {
            let mut h = Histogram::default();
            let mut buf = Vec::new();
            for i in c * chunk..((c + 1) * chunk).min(self.trials) {
                let mut rng = RandomSource::new(self.seed, offset.wrapping_add(i)).rng();
                h.record(trial(&mut rng, &mut buf));
            }
            h
        };
        match self.execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..chunks)
                    .into_par_iter()
                    .map(run_chunk)
                    .reduce(Histogram::default, Histogram::merge)
            }
            _ => (0..chunks).map(run_chunk).fold(Histogram::default(), Histogram::merge),
        }
    }

    fn word_statistic(&self, m: u32, n: u32, offset: u64, stat: fn(&[u32], u32) -> u32) -> Result<Histogram> {
        self.validate(m, n)?;
        Ok(self.histogram(offset, |rng, buf| {
            fill_uniform(buf, m, n, rng);
            stat(buf, n)
        }))
    }

    pub fn l1_histogram(&self, m: u32, n: u32) -> Result<Histogram> {
        self.word_statistic(m, n, 0, |w, n| l_start_of(w, 1, n))
    }

    pub fn lmax_histogram(&self, m: u32, n: u32) -> Result<Histogram> {
        self.word_statistic(m, n, 0, l_max_of)
    }

    pub fn lis_histogram(&self, m: u32, n: u32) -> Result<Histogram> {
        self.word_statistic(m, n, 0, |w, _| lis_of(w))
    }

    pub fn estimate_l1(&self, m: u32, n: u32) -> Result<Estimate> {
        Ok(Estimate::from_histogram(&self.l1_histogram(m, n)?, self.seed))
    }

    pub fn estimate_lmax(&self, m: u32, n: u32) -> Result<Estimate> {
        Ok(Estimate::from_histogram(&self.lmax_histogram(m, n)?, self.seed))
    }

    pub fn estimate_lis(&self, m: u32, n: u32) -> Result<Estimate> {
        Ok(Estimate::from_histogram(&self.lis_histogram(m, n)?, self.seed))
    }

    pub fn moments(&self, m: u32, n: u32, r_max: u32) -> Result<MomentReport> {
        if !(2..=MAX_MOMENT_ORDER).contains(&r_max) {
            return Err(Error::InvalidArgument(format!(
                "r_max must lie in 2..={MAX_MOMENT_ORDER}, got {r_max}"
            )));
        }
        let h = self.l1_histogram(m, n)?;
        let mu = Estimate::from_histogram(&h, self.seed);
        let row = |r: u32, f: &dyn Fn(f64) -> f64, target: f64| {
            let (mean, se) = h.mean_of(f);
            MomentRow {
                r,
                estimate: Estimate::new(mean, se, self.trials, self.seed),
                target,
            }
        };
        let central = (2..=r_max)
            .map(|r| {
                let target = central_coefficient(r) * (m as f64).powi(r as i32 / 2);
                row(r, &|v| (v - mu.mean).powi(r as i32), target)
            })
            .collect();
        let raw = (1..=r_max)
            .map(|r| row(r, &|v| v.powi(r as i32), raw_moment_target(m, r)))
            .collect();
        Ok(MomentReport {
            m,
            n,
            trials: self.trials,
            seed: self.seed,
            mu,
            central,
            raw,
        })
    }

    /// Compares `Pr[L¹_{m,n} ≥ k]` with `Pr[L¹_{m,k} = k]` on independent samples.
    pub fn check_observation1(&self, m: u32, n: u32, k: u32) -> Result<ObservationReport> {
        if k < 1 || k > n {
            return Err(Error::InvalidArgument(format!("need 1 <= k <= n (k={k}, n={n})")));
        }
        self.validate(m, n)?;
        let left = self.histogram(0, |rng, buf| {
            fill_uniform(buf, m, n, rng);
            (l_start_of(buf, 1, n) >= k) as u32
        });
        let right = self.histogram(SECONDARY_STREAM, |rng, buf| {
            fill_uniform(buf, m, k, rng);
            (l_start_of(buf, 1, k) == k) as u32
        });
        let exact = complete_prob(m, k)?;
        Ok(ObservationReport::new(&left, &right, Some(exact)))
    }

    /// Compares `Pr[π ⊇ w]` over `S_{m,n}` with `Pr[τ has a type-w subsequence]`
    /// over labeled permutations, on independent samples. Letters of `w` must
    /// be distinct, which makes greedy earliest matching exact.
    pub fn check_observation2(&self, m: u32, n: u32, w: &[u32]) -> Result<ObservationReport> {
        self.validate(m, n)?;
        if w.is_empty() || w.iter().any(|&x| x == 0 || x > n) {
            return Err(Error::InvalidArgument(format!(
                "w must be a nonempty word over [1, {n}]"
            )));
        }
        let mut sorted = w.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidArgument("letters of w must be distinct".into()));
        }
        let plain = self.histogram(0, |rng, buf| {
            fill_uniform(buf, m, n, rng);
            greedy_contains(buf.iter().copied(), w) as u32
        });
        let labeled = self.histogram(SECONDARY_STREAM, |rng, buf| {
            // Card `c` is copy `c % m` of value `c / m + 1`.
            buf.clear();
            buf.extend(0..m * n);
            buf.shuffle(rng);
            greedy_contains(buf.iter().map(|&c| c / m + 1), w) as u32
        });
        Ok(ObservationReport::new(&plain, &labeled, None))
    }
}

fn greedy_contains(values: impl Iterator<Item = u32>, w: &[u32]) -> bool {
    let mut next = 0;
    for v in values {
        if v == w[next] {
            next += 1;
            if next == w.len() {
                return true;
            }
        }
    }
    false
}

/// `c_r`: `r!/(2^{r/2}(r/2)!)` for even `r`, `r!/(3·2^{(r-1)/2}((r-3)/2)!)`
/// for odd `r >= 3`, and 0 for `r = 1`.
pub fn central_coefficient(r: u32) -> f64 {
    let r64 = r as u64;
    let (num, den) = if r % 2 == 0 {
        (factorial(r64), (num_bigint::BigUint::from(1u32) << (r / 2)) * factorial(r64 / 2))
    } else if r >= 3 {
        (
            factorial(r64),
            (num_bigint::BigUint::from(3u32) << ((r - 1) / 2)) * factorial((r64 - 3) / 2),
        )
    } else {
        return 0.0;
    };
    rational_to_f64(&BigRational::new(num.into(), den.into()))
}

/// `m^r + C(r+1, 2) m^{r-1}`.
pub fn raw_moment_target(m: u32, r: u32) -> f64 {
    let m = m as f64;
    let c: f64 = rational_to_f64(&BigRational::from_integer(binomial(r as u64 + 1, 2).into()));
    m.powi(r as i32) + c * m.powi(r as i32 - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentRow {
    pub r: u32,
    pub estimate: Estimate,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub m: u32,
    pub n: u32,
    pub trials: u64,
    pub seed: u64,
    pub mu: Estimate,
    /// `E[(L¹ - μ)^r]` for `r = 2..=r_max`, against `c_r m^{⌊r/2⌋}`.
    pub central: Vec<MomentRow>,
    /// `E[(L¹)^r]` for `r = 1..=r_max`, against `m^r + C(r+1,2) m^{r-1}`.
    pub raw: Vec<MomentRow>,
}

impl MomentReport {
    pub const CAVEAT: &'static str =
        "central moments use the sample mean in place of the true mean (bias O(1/trials))";
}

/// Two empirical frequencies of events that should have equal probability.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationReport {
    pub left: Estimate,
    pub right: Estimate,
    pub difference: f64,
    pub pooled_std_error: f64,
    /// `|difference| / pooled_std_error`; 0 when the samples agree exactly.
    pub z: f64,
    pub exact: Option<BigRational>,
}

impl ObservationReport {
    fn new(left: &Histogram, right: &Histogram, exact: Option<BigRational>) -> Self {
        let (l, r) = (Estimate::from_histogram(left, 0), Estimate::from_histogram(right, 0));
        let (tl, tr) = (l.trials as f64, r.trials as f64);
        let pooled = (l.mean * tl + r.mean * tr) / (tl + tr);
        let pooled_std_error = (pooled * (1.0 - pooled) * (1.0 / tl + 1.0 / tr)).sqrt();
        let difference = l.mean - r.mean;
        let z = if difference == 0.0 {
            0.0
        } else {
            difference.abs() / pooled_std_error
        };
        ObservationReport {
            left: l,
            right: r,
            difference,
            pooled_std_error,
            z,
            exact,
        }
    }
}

pub fn estimate_l1(m: u32, n: u32, trials: u64, seed: u64) -> Result<Estimate> {
    MonteCarlo::new(trials, seed).estimate_l1(m, n)
}

pub fn estimate_lmax(m: u32, n: u32, trials: u64, seed: u64) -> Result<Estimate> {
    MonteCarlo::new(trials, seed).estimate_lmax(m, n)
}

pub fn estimate_lis(m: u32, n: u32, trials: u64, seed: u64) -> Result<Estimate> {
    MonteCarlo::new(trials, seed).estimate_lis(m, n)
}

pub fn moments(m: u32, n: u32, r_max: u32, trials: u64, seed: u64) -> Result<MomentReport> {
    MonteCarlo::new(trials, seed).moments(m, n, r_max)
}

pub fn check_observation1(m: u32, n: u32, k: u32, trials: u64, seed: u64) -> Result<ObservationReport> {
    MonteCarlo::new(trials, seed).check_observation1(m, n, k)
}

pub fn check_observation2(m: u32, n: u32, w: &[u32], trials: u64, seed: u64) -> Result<ObservationReport> {
    MonteCarlo::new(trials, seed).check_observation2(m, n, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::finite_l1_expectation;

    #[test]
    fn coefficients() {
        assert_eq!(central_coefficient(2), 1.0);
        assert_eq!(central_coefficient(3), 1.0);
        assert_eq!(central_coefficient(4), 3.0);
        assert_eq!(central_coefficient(5), 10.0);
        assert_eq!(central_coefficient(6), 15.0);
        assert_eq!(raw_moment_target(5, 1), 6.0);
        assert_eq!(raw_moment_target(2, 2), 4.0 + 3.0 * 2.0);
    }

    #[test]
    fn histogram_merge_is_exact() {
        let mut a = Histogram::default();
        let mut b = Histogram::default();
        for v in [1, 3, 3, 7] {
            a.record(v);
        }
        for v in [2, 9] {
            b.record(v);
        }
        let ab = a.clone().merge(b.clone());
        assert_eq!(ab, b.merge(a));
        assert_eq!(ab.total(), 6);
        assert_eq!(ab.mean(), 25.0 / 6.0);
    }

    #[test]
    fn n_one_is_degenerate() {
        for est in [
            estimate_l1(3, 1, 50, 1).unwrap(),
            estimate_lmax(3, 1, 50, 1).unwrap(),
            estimate_lis(3, 1, 50, 1).unwrap(),
        ] {
            assert_eq!(est.mean, 1.0);
            assert_eq!(est.std_error, 0.0);
            assert_eq!(est.ci95, (1.0, 1.0));
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(estimate_l1(2, 5, 1, 0).is_err());
        assert!(estimate_l1(0, 5, 10, 0).is_err());
        assert!(moments(2, 5, 9, 10, 0).is_err());
        assert!(check_observation1(2, 5, 6, 10, 0).is_err());
        assert!(check_observation2(2, 5, &[1, 1], 10, 0).is_err());
        assert!(check_observation2(2, 5, &[6], 10, 0).is_err());
    }

    #[test]
    fn execution_modes_agree() {
        let mc = MonteCarlo::new(3000, 42);
        let seq = mc.with_execution(Execution::Sequential).estimate_l1(3, 12).unwrap();
        let par = mc.with_execution(Execution::Parallel).estimate_l1(3, 12).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.mean.to_bits(), par.mean.to_bits());
    }

    #[test]
    fn l1_matches_finite_expectation() {
        let est = estimate_l1(2, 10, 40_000, 7).unwrap();
        let exact = rational_to_f64(&finite_l1_expectation(2, 10));
        assert!(est.z_score(exact) < 4.0, "{est:?} vs {exact}");
    }

    #[test]
    fn lmax_dominates_l1() {
        let mc = MonteCarlo::new(2000, 5);
        let a = mc.l1_histogram(2, 8).unwrap();
        let b = mc.lmax_histogram(2, 8).unwrap();
        assert!(b.mean() >= a.mean());
    }

    #[test]
    fn moment_consistency() {
        let report = moments(3, 30, 4, 5000, 11).unwrap();
        let raw2 = report.raw[1].estimate.mean;
        let c2 = report.central[0].estimate.mean;
        let mean = report.mu.mean;
        assert!(c2 >= 0.0);
        assert!(((raw2 - mean * mean) - c2).abs() <= 1e-6 * c2);
        assert_eq!(report.raw[0].estimate.mean, mean);
    }

    #[test]
    fn observation_trivial_cases() {
        let r = check_observation1(2, 6, 1, 100, 3).unwrap();
        assert_eq!((r.left.mean, r.right.mean, r.z), (1.0, 1.0, 0.0));
        let r = check_observation2(2, 4, &[3], 100, 3).unwrap();
        assert_eq!((r.left.mean, r.right.mean, r.z), (1.0, 1.0, 0.0));
    }

    #[test]
    fn observation_checks_agree() {
        let r = check_observation1(2, 6, 2, 20_000, 9).unwrap();
        assert!(r.z < 4.0, "{r:?}");
        assert!((r.left.mean - 5.0 / 6.0).abs() < 0.02);
        let r = check_observation2(2, 3, &[1, 2], 20_000, 9).unwrap();
        assert!(r.z < 4.0, "{r:?}");
        assert!((r.right.mean - 5.0 / 6.0).abs() < 0.02);
    }
}

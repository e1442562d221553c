//! The thirteen acceptance criteria, shared by `cis verify-all` and the
//! `acceptance` test target.
//!
//! `Level::Full` runs every criterion at its stated scale. `Level::Quick`
//! shrinks enumeration limits and trial counts by 10×; the statistical bands
//! are the same, so they widen with the smaller samples.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use cis_core::bounds::{self, WordFamily};
use cis_core::cardgame::{self, StrategyKind};
use cis_core::exact;
use cis_core::montecarlo::{Execution, MonteCarlo};
use cis_core::spectral;
use cis_core::words::{self, sample_uniform, RandomSource};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::args::Level;

/// Fixed master seed for every statistical criterion.
pub const SEED: u64 = 20_240_611;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] C{} {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

struct Settings {
    enum_limit: u64,
    code_limit: u64,
    /// Divides every Monte Carlo trial count.
    scale: u64,
}

impl Settings {
    fn new(level: Level) -> Self {
        match level {
            Level::Full => Settings {
                enum_limit: 1_000_000,
                code_limit: 100_000,
                scale: 1,
            },
            Level::Quick => Settings {
                enum_limit: 100_000,
                code_limit: 10_000,
                scale: 10,
            },
        }
    }

    fn trials(&self, full: u64) -> u64 {
        (full / self.scale).max(2)
    }
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: cis_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Runs every criterion in order, reporting each result as it completes.
pub fn run(level: Level, exe: Option<&Path>, mut on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let s = Settings::new(level);
    let criteria: Vec<(u32, &'static str, Box<dyn Fn() -> Check + '_>)> = vec![
        (1, "closed-form exactness", Box::new(|| c1_closed_form(exe))),
        (2, "triple-engine agreement", Box::new(c2_engines)),
        (3, "brute-force oracle", Box::new(|| c3_bruteforce(&s))),
        (4, "approximation decay", Box::new(c4_approximation)),
        (5, "spectral identities", Box::new(c5_spectral)),
        (6, "bounds sandwich", Box::new(|| c6_sandwich(&s))),
        (7, "GV codes", Box::new(|| c7_codes(&s))),
        (8, "Monte Carlo vs closed form", Box::new(|| c8_monte_carlo(&s))),
        (9, "E[L] band around inverse gamma", Box::new(|| c9_lmax_band(&s))),
        (10, "card game", Box::new(|| c10_card_game(&s))),
        (11, "observation checks", Box::new(|| c11_observations(&s))),
        (12, "LIS probe", Box::new(|| c12_lis(&s))),
        (13, "determinism", Box::new(|| c13_determinism(exe))),
    ];
    let mut results = Vec::new();
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let r = CriterionResult {
            id,
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        };
        on_result(&r);
        results.push(r);
    }
    results
}

/// Every `(m, n)` with `|S_{m,n}| <= limit`, for `m <= 12`.
pub fn enumerable_instances(limit: u64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for m in 1..=12u32 {
        for n in 1.. {
            if words::multiset_count(m, n) > limit.into() {
                break;
            }
            out.push((m, n));
        }
    }
    out
}

fn spawn_json(exe: &Path, args: &[&str], threads: Option<&str>) -> Result<String, String> {
    let mut cmd = Command::new(exe);
    cmd.args(["--format", "json", "--no-cache"]).args(args);
    if let Some(t) = threads {
        cmd.env(crate::THREADS_ENV, t);
    }
    let out = cmd.output().map_err(|e| format!("spawning {}: {e}", exe.display()))?;
    if !out.status.success() {
        return Err(format!(
            "`cis {}` exited with {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn c1_closed_form(exe: Option<&Path>) -> Check {
    let e = std::f64::consts::E;
    let targets = [(1u32, e - 1.0), (2, e * (1f64.cos() + 1f64.sin()) - 1.0)];
    let mut detail = Vec::new();
    for (m, target) in targets {
        let v = core(spectral::l1_closed_form(m, spectral::DEFAULT_BITS))?.to_f64();
        ensure((v - target).abs() < 1e-10, || format!("m={m}: {v} vs {target}"))?;
        if let Some(exe) = exe {
            let text = spawn_json(exe, &["l1-closed", "--m", &m.to_string()], None)?;
            let rec: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let cli = rec["value"].as_f64().ok_or("l1-closed value is not a number")?;
            ensure((cli - target).abs() < 1e-10, || format!("cis l1-closed --m {m}: {cli} vs {target}"))?;
        }
        detail.push(format!("m={m}: {v:.12}"));
    }
    if exe.is_some() {
        detail.push("CLI agrees".into());
    }
    Ok(detail.join(", "))
}

fn c2_engines() -> Check {
    let mut worst: f64 = 0.0;
    for m in 1..=6 {
        let series = core(exact::l1_series(m, 1e-12, 5000))?.value;
        let closed = core(spectral::l1_closed_form(m, spectral::DEFAULT_BITS))?.to_f64();
        let diff = (series - closed).abs();
        ensure(diff < 1e-8, || format!("m={m}: series {series} vs closed {closed}"))?;
        worst = worst.max(diff);
    }
    for m in 1..=5 {
        for n in 1..=12 {
            let gf = core(exact::p_value(m, n))?;
            let hk = core(exact::complete_prob(m, n))?;
            ensure(gf == hk, || format!("p_value({m},{n}) = {gf} but complete_prob = {hk}"))?;
        }
    }
    Ok(format!("max |series - closed| = {worst:.1e} for m<=6; p_value = complete_prob on 60 instances"))
}

fn c3_bruteforce(s: &Settings) -> Check {
    let instances = enumerable_instances(s.enum_limit);
    for &(m, n) in &instances {
        let hk = core(exact::horton_kurn_h(m, n))?;
        let brute = core(words::count_complete_bruteforce(m, n))?;
        ensure(hk == brute, || format!("h_{m}({n}): formula {hk}, enumeration {brute}"))?;
        if m == 1 {
            ensure(hk.is_one(), || format!("h_1({n}) = {hk}"))?;
        }
    }
    let h22 = core(exact::horton_kurn_h(2, 2))?;
    ensure(h22 == 5u32.into(), || format!("h_2(2) = {h22}"))?;
    Ok(format!("{} instances with |S| <= {}", instances.len(), s.enum_limit))
}

fn c4_approximation() -> Check {
    let err = |m: u32| -> Result<f64, String> {
        Ok((core(spectral::l1_closed_form(m, spectral::DEFAULT_BITS))?.to_f64() - spectral::approx_l1(m)).abs())
    };
    let (e4, e12) = (err(4)?, err(12)?);
    ensure(e12 < 0.05 && e12 < e4, || format!("error at m=12 {e12:.3e}, at m=4 {e4:.3e}"))?;
    Ok(format!("error {e4:.3e} at m=4, {e12:.3e} at m=12"))
}

fn c5_spectral() -> Check {
    let mut worst: f64 = 0.0;
    for m in 1..=12 {
        let roots = core(spectral::find_roots(m, spectral::DEFAULT_BITS))?;
        let report = spectral::power_sum_check(&roots);
        ensure(report.max_deviation < 1e-9, || format!("m={m}: power sums off by {:.3e}", report.max_deviation))?;
        worst = worst.max(report.max_deviation);
        let series = core(spectral::reciprocal_series(m, 40))?;
        let c1 = BigRational::new((-1).into(), (m + 2).into());
        ensure(series.coefficients[0].is_one(), || format!("m={m}: c_0 = {}", series.coefficients[0]))?;
        ensure(series.coefficients[1] == c1, || format!("m={m}: c_1 = {}", series.coefficients[1]))?;
        ensure(series.within_envelope(), || {
            format!("m={m}: envelope violated at k = {:?}", series.envelope_violations())
        })?;
    }
    Ok(format!("m=1..12: max power-sum deviation {worst:.1e}; c_0, c_1 exact; envelope holds for k<=40"))
}

/// `counts[v]` = number of words in `S_{m,n}` with `L = v`.
fn lmax_distribution(m: u32, n: u32) -> Result<Vec<u64>, String> {
    let mut counts = vec![0u64; n as usize + 1];
    for w in core(words::enumerate_words(m, n))? {
        counts[w.l_max() as usize] += 1;
    }
    Ok(counts)
}

fn c6_sandwich(s: &Settings) -> Check {
    let instances = enumerable_instances(s.enum_limit);
    let mut checks = 0usize;
    for &(m, n) in &instances {
        let counts = lmax_distribution(m, n)?;
        let total: u64 = counts.iter().sum();
        let prob = |c: u64| BigRational::new(c.into(), total.into());
        let family = WordFamily::ContinuousRuns { n };
        for k in 1..=n {
            let ge_k = prob(counts[k as usize..].iter().sum());
            let tail = core(bounds::tail_bound(&family, m, k))?;
            ensure(ge_k <= tail, || format!("m={m} n={n} k={k}: Pr[L>=k] = {ge_k} > tail bound {tail}"))?;
            let block = core(bounds::block_lower_bound_exact(m, n, k))?;
            ensure(block <= ge_k, || format!("m={m} n={n} k={k}: block bound {block} > Pr[L>=k] = {ge_k}"))?;
            checks += 2;
        }
        let eq_n = prob(counts[n as usize]);
        let mut best = core(bounds::completion_lower(m, n, 1, 1))?;
        if m >= 2 {
            for delta in 1..=n / 2 {
                let code = core(bounds::greedy_code(m, n, delta))?;
                best = best.max(core(bounds::completion_lower(m, n, code.len() as u64, delta))?);
            }
        }
        ensure(best <= eq_n, || format!("m={m} n={n}: completion bound {best} > Pr[L=n] = {eq_n}"))?;
        ensure(!best.is_zero(), || format!("m={m} n={n}: best completion bound is 0"))?;
        checks += 1;
    }
    Ok(format!("{} instances, {checks} inequalities", instances.len()))
}

fn c7_codes(s: &Settings) -> Check {
    let mut count = 0usize;
    for m in 2u32.. {
        if (m as u64).pow(2) > s.code_limit {
            break;
        }
        for n in 2u32.. {
            if (m as u64).pow(n) > s.code_limit {
                break;
            }
            for delta in 1..=n / 2 {
                let code = core(bounds::greedy_code(m, n, delta))?;
                let size = BigRational::from_integer(code.len().into());
                ensure(size >= code.gv_bound(), || {
                    format!("m={m} n={n} δ={delta}: size {} below GV bound {}", code.len(), code.gv_bound())
                })?;
                ensure(code.min_distance_holds(), || format!("m={m} n={n} δ={delta}: distance below δ"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} (m, n, δ) triples with m^n <= {}", s.code_limit))
}

fn c8_monte_carlo(s: &Settings) -> Check {
    let target = 2.756_051_6;
    let est = core(MonteCarlo::new(s.trials(200_000), SEED).estimate_l1(2, 50))?;
    let z = est.z_score(target);
    ensure(z < 4.0, || format!("mean {} ± {} is {z:.2} SE from {target}", est.mean, est.std_error))?;
    Ok(format!("mean {:.5} ± {:.5} ({} trials), z = {z:.2}", est.mean, est.std_error, est.trials))
}

fn c9_lmax_band(s: &Settings) -> Check {
    let n = 100_000;
    let g = core(bounds::inverse_gamma(n as f64))?;
    let trials = s.trials(500);
    let a = core(MonteCarlo::new(trials, SEED).estimate_lmax(1, n))?.mean;
    let b = core(MonteCarlo::new(trials, SEED).estimate_lmax(2, n))?.mean;
    ensure((g - 3.0..=g + 3.0).contains(&a), || format!("m=1: {a} outside [{:.2}, {:.2}]", g - 3.0, g + 3.0))?;
    ensure((g - 2.0..=3.0 * g).contains(&b), || format!("m=2: {b} outside [{:.2}, {:.2}]", g - 2.0, 3.0 * g))?;
    Ok(format!("Γ⁻¹(1e5) = {g:.4}; E[L] ≈ {a:.3} (m=1), {b:.3} (m=2)"))
}

fn c10_card_game(s: &Settings) -> Check {
    let (m, n) = (2, 100);
    let trivial = core(cardgame::expected_score(m, n, StrategyKind::Trivial, s.trials(10_000), SEED))?;
    ensure(trivial.mean == m as f64 && trivial.std_error == 0.0, || {
        format!("trivial mean {} ± {}", trivial.mean, trivial.std_error)
    })?;
    let checked = s.trials(10_000);
    for i in 0..checked {
        let w = sample_uniform(m, n, &RandomSource::new(SEED, i));
        let score = cardgame::play(&w, StrategyKind::Shifting).score;
        ensure(score >= w.l1(), || format!("trial {i}: shifting score {score} < l1 {}", w.l1()))?;
    }

    let trials = s.trials(100_000);
    let score = |m: u32, kind: StrategyKind| core(cardgame::expected_score(m, n, kind, trials, SEED));
    let safe_target = |m: u32| m as f64 + 1.0 - 1.0 / (m as f64 + 1.0);
    let mut failures = Vec::new();
    let mut parts = vec![format!("trivial ≡ {m}"), format!("shifting ≥ l1 on {checked} decks")];
    for (kind, target) in [
        (StrategyKind::Safe, safe_target(m)),
        (StrategyKind::Shifting, spectral::approx_l1(m)),
    ] {
        let e = score(m, kind)?;
        let tol = 4.0 * e.std_error + 0.02;
        let part = format!("{} {:.4} vs {target:.4} ± {tol:.4}", kind.name(), e.mean);
        if (e.mean - target).abs() > tol {
            failures.push(part.clone());
        }
        parts.push(part);
    }
    // Diagnostic only: the safe benchmark's error term shrinks exponentially
    // in m, so it is met at m=6 even where it is missed at m=2.
    let safe6 = score(6, StrategyKind::Safe)?;
    parts.push(format!("safe at m=6 {:.4} vs {:.4}", safe6.mean, safe_target(6)));
    if failures.is_empty() {
        Ok(parts.join("; "))
    } else {
        Err(format!("out of band: {} [{}]", failures.join(", "), parts.join("; ")))
    }
}

fn c11_observations(s: &Settings) -> Check {
    let mc = MonteCarlo::new(s.trials(100_000), SEED);
    let mut worst: f64 = 0.0;
    for (m, n, k) in [(2, 6, 1), (2, 6, 2), (2, 8, 3)] {
        let r = core(mc.check_observation1(m, n, k))?;
        ensure(r.z < 4.0, || format!("obs1 m={m} n={n} k={k}: z = {:.2}", r.z))?;
        if k == 1 {
            ensure(r.left.mean == 1.0 && r.right.mean == 1.0, || "obs1 k=1 frequencies differ from 1".into())?;
        }
        worst = worst.max(r.z);
    }
    for (m, n, w) in [(2, 3, vec![1]), (2, 3, vec![1, 2]), (2, 4, vec![2, 4])] {
        let r = core(mc.check_observation2(m, n, &w))?;
        ensure(r.z < 4.0, || format!("obs2 m={m} n={n} w={w:?}: z = {:.2}", r.z))?;
        worst = worst.max(r.z);
    }
    Ok(format!("6 instances at {} trials, max z = {worst:.2}", mc.trials))
}

fn c12_lis(s: &Settings) -> Check {
    let n = 10_000u32;
    let est = core(MonteCarlo::new(s.trials(200), SEED).estimate_lis(1, n))?;
    let target = 2.0 * (n as f64).sqrt();
    let rel = (est.mean - target).abs() / target;
    ensure(rel < 0.1, || format!("mean {} is {:.1}% from {target}", est.mean, rel * 100.0))?;
    Ok(format!("mean {:.2} vs 2√n = {target} ({:.1}% off)", est.mean, rel * 100.0))
}

/// Pretty JSON minus the timestamp line.
fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn c13_determinism(exe: Option<&Path>) -> Check {
    // In-process: sequential and parallel schedules must agree bit for bit.
    let mc = MonteCarlo::new(5_000, SEED);
    let seq = mc.with_execution(Execution::Sequential);
    let par = mc.with_execution(Execution::Parallel);
    ensure(core(seq.estimate_l1(3, 20))? == core(par.estimate_l1(3, 20))?, || "l1 differs".into())?;
    ensure(core(seq.estimate_lmax(3, 20))? == core(par.estimate_lmax(3, 20))?, || "lmax differs".into())?;
    ensure(core(seq.moments(3, 20, 6))? == core(par.moments(3, 20, 6))?, || "moments differ".into())?;

    let Some(exe) = exe else {
        return Ok("sequential = parallel in process (binary not available)".into());
    };
    let common = ["--m", "2", "--n", "40", "--trials", "20000", "--seed", "77"];
    let commands: Vec<Vec<&str>> = vec![
        vec!["mc", "l1"],
        vec!["mc", "lmax"],
        vec!["mc", "lis"],
        vec!["mc", "moments", "--r-max", "6"],
        vec!["mc", "obs1", "--k", "3"],
        vec!["mc", "obs2", "--w", "2,4"],
        vec!["cardgame", "--strategy", "trivial"],
        vec!["cardgame", "--strategy", "safe"],
        vec!["cardgame", "--strategy", "shifting"],
    ];
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().chain(&common).copied().collect();
        let runs: Vec<String> = [Some("1"), Some("8"), Some("8")]
            .into_iter()
            .map(|t| spawn_json(exe, &args, t).map(|s| strip_timestamp(&s)))
            .collect::<Result<_, _>>()?;
        ensure(runs.iter().all(|r| r == &runs[0]), || {
            format!("`cis {}` output depends on CIS_THREADS or repetition", args.join(" "))
        })?;
    }
    Ok(format!("{} commands identical across CIS_THREADS=1/8 and repeats", commands.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_grid() {
        let grid = enumerable_instances(1_000_000);
        assert!(grid.contains(&(1, 9)) && !grid.contains(&(1, 10)));
        assert!(grid.contains(&(2, 5)) && !grid.contains(&(2, 6)));
        assert!(grid.contains(&(3, 4)) && grid.contains(&(5, 3)) && grid.contains(&(11, 2)));
        assert!(!grid.contains(&(12, 2)));
    }

    #[test]
    fn timestamp_is_stripped() {
        let a = "{\n  \"value\": 1,\n  \"meta\": {\n    \"timestamp\": 5\n  }\n}";
        let b = a.replace("5", "6");
        assert_eq!(strip_timestamp(a), strip_timestamp(&b));
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use cis_core::bounds::{self, WordFamily};
use cis_core::cardgame::{self, StrategyKind};
use cis_core::exact::{self, rational_to_f64, rational_to_string};
use cis_core::montecarlo::{MomentReport, MonteCarlo, ObservationReport};
use cis_core::spectral::{self, DEFAULT_GAMMAS};
use cis_core::words::{self, Word};
use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::acceptance::{self, CriterionResult};
use crate::args::{BoundsCommand, Command, Engine, Family, Level, McCommand, SampleArgs, Strategy};
use crate::cache::Cache;
use crate::record::ResultRecord;
use crate::CliError;

/// What a command produced, plus whether it counts as a failure (verify-all).
pub struct Outcome {
    pub record: ResultRecord,
    pub failed: bool,
}

impl From<ResultRecord> for Outcome {
    fn from(record: ResultRecord) -> Self {
        Outcome { record, failed: false }
    }
}

pub struct Context<'a> {
    pub cache: Option<&'a Cache>,
    /// The running executable, for checks that spawn it.
    pub exe: Option<&'a Path>,
}

type Params = BTreeMap<String, Value>;

fn params<const N: usize>(pairs: [(&str, Value); N]) -> Params {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

impl Context<'_> {
    /// Looks `quantity(params)` up in the cache, computing and storing it on a miss.
    fn cached(
        &self,
        quantity: &str,
        params: Params,
        compute: impl FnOnce() -> Result<ResultRecord, CliError>,
    ) -> Result<ResultRecord, CliError> {
        let version = crate::record::TOOL_VERSION;
        if let Some(hit) = self.cache.and_then(|c| c.get(quantity, &params, version)) {
            return Ok(hit);
        }
        let mut rec = compute()?;
        rec.quantity = quantity.to_string();
        rec.params = params;
        if let Some(cache) = self.cache {
            if let Err(e) = cache.put(&rec) {
                eprintln!("warning: could not write cache entry in {}: {e}", cache.dir().display());
            }
        }
        Ok(rec)
    }

    fn uncached(&self, quantity: &str, params: Params, rec: ResultRecord) -> ResultRecord {
        ResultRecord {
            quantity: quantity.to_string(),
            params,
            ..rec
        }
    }
}

pub fn execute(command: &Command, ctx: &Context) -> Result<Outcome, CliError> {
    let rec = match command {
        Command::L1Exact { m, eps, max_n } => {
            let p = params([("m", json!(m)), ("eps", json!(eps)), ("max_n", json!(max_n))]);
            ctx.cached("l1-exact", p, || {
                let s = exact::l1_series(*m, *eps, *max_n)?;
                Ok(ResultRecord::new("", s.value).engine("series").detail(json!({
                    "terms_used": s.terms_used,
                    "truncation_bound": s.truncation_bound,
                    "partial_sum": rational_to_string(&s.sum),
                })))
            })?
        }
        Command::L1Closed { m, bits } => {
            let p = params([("m", json!(m)), ("bits", json!(bits))]);
            ctx.cached("l1-closed", p, || {
                let c = spectral::l1_closed_form(*m, *bits)?;
                let digits = (*bits as f64 * std::f64::consts::LOG10_2) as usize - 2;
                Ok(ResultRecord::new("", c.to_f64()).bits(*bits).engine("spectral").detail(json!({
                    "decimal": c.value.to_decimal_string(digits),
                    "imaginary_residue": c.imaginary_residue,
                })))
            })?
        }
        Command::L1Approx { m } => {
            positive("m", *m)?;
            ctx.uncached("l1-approx", params([("m", json!(m))]), ResultRecord::new("", spectral::approx_l1(*m)))
        }
        Command::ProbComplete { m, n, engine } => {
            let name = match engine {
                Engine::Hk => "hk",
                Engine::Gf => "gf",
                Engine::Brute => "brute",
            };
            let p = params([("m", json!(m)), ("n", json!(n)), ("engine", json!(name))]);
            ctx.cached("prob-complete", p, || {
                let (prob, count) = match engine {
                    Engine::Hk => {
                        let h = exact::horton_kurn_h(*m, *n)?;
                        (exact::complete_prob(*m, *n)?, Some(h))
                    }
                    Engine::Gf => (exact::p_value(*m, *n)?, None),
                    Engine::Brute => {
                        let h = words::count_complete_bruteforce(*m, *n)?;
                        let total = words::multiset_count(*m, *n);
                        (num_rational::BigRational::new(h.clone().into(), total.into()), Some(h))
                    }
                };
                let mut detail = json!({"approx": rational_to_f64(&prob)});
                if let Some(h) = count {
                    detail["count"] = json!(h.to_string());
                    detail["total"] = json!(words::multiset_count(*m, *n).to_string());
                }
                Ok(ResultRecord::new("", rational_to_string(&prob)).engine(name).detail(detail))
            })?
        }
        Command::Roots { m, bits, check_power_sums, partition } => {
            let p = params([
                ("m", json!(m)),
                ("bits", json!(bits)),
                ("check_power_sums", json!(check_power_sums)),
                ("partition", json!(partition)),
            ]);
            ctx.cached("roots", p, || roots(*m, *bits, *check_power_sums, *partition))?
        }
        Command::RecipSeries { m, k } => {
            positive("m", *m)?;
            let p = params([("m", json!(m)), ("k", json!(k))]);
            ctx.cached("recip-series", p, || {
                let s = spectral::reciprocal_series(*m, *k)?;
                let rows: Vec<Value> = s
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, c)| json!({"k": i, "c": rational_to_string(c), "approx": rational_to_f64(c)}))
                    .collect();
                Ok(ResultRecord::new("", rows).engine("exact").detail(json!({
                    "within_envelope": s.within_envelope(),
                    "envelope_violations": s.envelope_violations(),
                })))
            })?
        }
        Command::Invgamma { y } => ctx.uncached(
            "invgamma",
            params([("y", json!(y))]),
            ResultRecord::new("", bounds::inverse_gamma(*y)?),
        ),
        Command::Bounds(b) => return bounds_command(b, ctx).map(Outcome::from),
        Command::Mc(mc) => return mc_command(mc, ctx).map(Outcome::from),
        Command::Cardgame { strategy, sample, word } => cardgame_command(*strategy, sample, word.as_deref(), ctx)?,
        Command::VerifyAll { level } => return Ok(verify_all(*level, ctx)),
    };
    Ok(rec.into())
}

fn positive(name: &str, v: u32) -> Result<(), CliError> {
    if v == 0 {
        return Err(CliError::usage(format!("--{name} must be positive")));
    }
    Ok(())
}

fn roots(m: u32, bits: u32, check_power_sums: bool, partition: bool) -> Result<ResultRecord, CliError> {
    let set = spectral::find_roots(m, bits)?;
    let rows: Vec<Value> = set
        .roots_f64()
        .iter()
        .zip(&set.residuals)
        .enumerate()
        .map(|(i, ((re, im), res))| json!({"index": i, "re": re, "im": im, "residual": res}))
        .collect();
    let mut detail = json!({
        "max_residual": set.max_residual(),
        "min_pairwise_distance": set.min_pairwise_distance(),
        "conjugate_closed": set.is_conjugate_closed(set.tolerance()),
        "iterations": set.iterations,
    });
    if check_power_sums {
        let report = spectral::power_sum_check(&set);
        let sums: Vec<Value> = report
            .rows
            .iter()
            .map(|r| {
                json!({
                    "t": r.t,
                    "re": r.computed.0,
                    "im": r.computed.1,
                    "expected": rational_to_string(&r.expected),
                    "deviation": r.deviation,
                })
            })
            .collect();
        detail["power_sums"] = json!(sums);
        detail["power_sum_max_deviation"] = json!(report.max_deviation);
    }
    if partition {
        let (gm, g, gp) = DEFAULT_GAMMAS;
        let r = spectral::root_partition_diagnostic(&set, gm, g, gp)?;
        detail["partition"] = json!({
            "gammas": [gm, g, gp],
            "small": r.small.len(),
            "large": r.large.len(),
            "large_magnitude_ok": r.large_magnitude_ok,
            "small_magnitude_ok": r.small_magnitude_ok,
            "small_half_ok": r.small_half_ok,
            "large_sum_abs": r.large_sum_abs,
            "large_sum_bound": r.large_sum_bound,
            "large_sum_ok": r.large_sum_ok,
            "all_ok": r.all_ok(),
        });
    }
    Ok(ResultRecord::new("", rows).bits(bits).engine("aberth").detail(detail))
}

fn bounds_command(cmd: &BoundsCommand, ctx: &Context) -> Result<ResultRecord, CliError> {
    Ok(match cmd {
        BoundsCommand::Tail { family, m, n, k } => {
            let (fam, name) = match family {
                Family::Runs => (WordFamily::ContinuousRuns { n: *n }, "runs"),
                Family::Ap => (WordFamily::ArithmeticProgressions { n: *n }, "ap"),
            };
            let b = bounds::tail_bound(&fam, *m, *k)?;
            ctx.uncached(
                "bounds-tail",
                params([("family", json!(name)), ("m", json!(m)), ("n", json!(n)), ("k", json!(k))]),
                ResultRecord::new("", rational_to_string(&b)).detail(json!({
                    "approx": rational_to_f64(&b),
                    "family_size": fam.size_at(*k).to_string(),
                })),
            )
        }
        BoundsCommand::ExpectationUpper { m, cap } => {
            let n: BigUint = cap
                .parse()
                .map_err(|_| CliError::usage(format!("--cap must be a non-negative integer, got `{cap}`")))?;
            let r = bounds::expectation_upper(*m, &n)?;
            ctx.uncached(
                "bounds-expectation-upper",
                params([("m", json!(m)), ("cap", json!(cap))]),
                ResultRecord::new("", r.bound).detail(json!({"t": r.t, "k": r.k, "regime_ok": r.regime_ok})),
            )
        }
        BoundsCommand::BlockLower { m, n, k, exact } => {
            let p = params([("m", json!(m)), ("n", json!(n)), ("k", json!(k)), ("exact", json!(exact))]);
            ctx.cached("bounds-block-lower", p, || {
                Ok(if *exact {
                    let b = bounds::block_lower_bound_exact(*m, *n, *k)?;
                    ResultRecord::new("", rational_to_string(&b)).detail(json!({"approx": rational_to_f64(&b)}))
                } else {
                    ResultRecord::new("", bounds::block_lower_bound(*m, *n, *k)?)
                })
            })?
        }
        BoundsCommand::GvCode { m, n, delta, list } => {
            let p = params([("m", json!(m)), ("n", json!(n)), ("delta", json!(delta)), ("list", json!(list))]);
            ctx.cached("bounds-gv-code", p, || {
                let code = bounds::greedy_code(*m, *n, *delta)?;
                let gv = code.gv_bound();
                let mut detail = json!({
                    "gv_bound": rational_to_string(&gv),
                    "gv_bound_approx": rational_to_f64(&gv),
                    "meets_gv": num_rational::BigRational::from_integer(code.len().into()) >= gv,
                    "min_distance_ok": code.min_distance_holds(),
                });
                if *list {
                    detail["words"] = json!(code.words);
                }
                Ok(ResultRecord::new("", code.len()).engine("greedy-lex").detail(detail))
            })?
        }
        BoundsCommand::CompletionLower { m, n, t_size, delta } => {
            let b = bounds::completion_lower(*m, *n, *t_size, *delta)?;
            ctx.uncached(
                "bounds-completion-lower",
                params([("m", json!(m)), ("n", json!(n)), ("t_size", json!(t_size)), ("delta", json!(delta))]),
                ResultRecord::new("", rational_to_string(&b)).detail(json!({"approx": rational_to_f64(&b)})),
            )
        }
        BoundsCommand::FactorialThreshold { m, t, c } => {
            let r = bounds::factorial_threshold(*m, *t, *c)?;
            ctx.uncached(
                "bounds-factorial-threshold",
                params([("m", json!(m)), ("t", json!(t)), ("c", json!(c))]),
                ResultRecord::new("", r.k).detail(json!({
                    "c_adjusted": r.c_adjusted,
                    "lower_ok": r.lower_ok,
                    "upper_ok": r.upper_ok,
                })),
            )
        }
        BoundsCommand::LowerCont { m, n } => {
            let b = bounds::lower_cont_asymptotic(*m, *n)?;
            ctx.uncached(
                "bounds-lower-cont",
                params([("m", json!(m)), ("n", json!(n))]),
                ResultRecord::new("", b.value).detail(json!({"ln_value": b.ln_value, "asymptotic": b.asymptotic})),
            )
        }
        BoundsCommand::Entropy { n, delta } => {
            let r = bounds::entropy_binom_check(*n, *delta)?;
            ctx.uncached(
                "bounds-entropy",
                params([("n", json!(n)), ("delta", json!(delta))]),
                ResultRecord::new("", r.holds).detail(json!({
                    "binomial": r.binomial.to_string(),
                    "log2_binomial": r.log2_binomial,
                    "entropy_bits": r.entropy_bits,
                })),
            )
        }
    })
}

fn sample_params(s: &SampleArgs, seed: u64) -> Params {
    params([("m", json!(s.m)), ("n", json!(s.n)), ("trials", json!(s.trials)), ("seed", json!(seed))])
}

/// Runs a sampling command, caching only when the seed was given explicitly.
fn sampled(
    ctx: &Context,
    quantity: &str,
    s: &SampleArgs,
    extra: Params,
    compute: impl FnOnce(MonteCarlo) -> Result<ResultRecord, CliError>,
) -> Result<ResultRecord, CliError> {
    let seed = s.seed.unwrap_or_else(entropy_seed);
    let mut p = sample_params(s, seed);
    p.extend(extra);
    let mc = MonteCarlo::new(s.trials, seed);
    let run = || compute(mc).map(|r| r.seed(seed).trials(s.trials));
    if s.seed.is_some() {
        ctx.cached(quantity, p, run)
    } else {
        Ok(ctx.uncached(quantity, p, run()?))
    }
}

fn entropy_seed() -> u64 {
    use std::hash::{BuildHasher, Hasher};
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    h.write_u128(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos()),
    );
    h.finish()
}

fn estimate_record(e: cis_core::montecarlo::Estimate) -> ResultRecord {
    ResultRecord::new("", e.mean)
        .stderr(e.std_error)
        .engine("monte-carlo")
        .detail(json!({"ci95": [e.ci95.0, e.ci95.1]}))
}

fn observation_record(r: ObservationReport) -> ResultRecord {
    let mut detail = json!({
        "left": r.left.mean,
        "left_stderr": r.left.std_error,
        "right": r.right.mean,
        "right_stderr": r.right.std_error,
        "pooled_stderr": r.pooled_std_error,
        "z": r.z,
    });
    if let Some(exact) = &r.exact {
        detail["exact"] = json!(rational_to_string(exact));
        detail["exact_approx"] = json!(rational_to_f64(exact));
    }
    ResultRecord::new("", r.difference)
        .stderr(r.pooled_std_error)
        .engine("monte-carlo")
        .detail(detail)
}

fn moment_rows(r: &MomentReport) -> Vec<Value> {
    let row = |kind: &str, m: &cis_core::montecarlo::MomentRow| {
        json!({
            "kind": kind,
            "r": m.r,
            "estimate": m.estimate.mean,
            "stderr": m.estimate.std_error,
            "target": m.target,
        })
    };
    r.raw
        .iter()
        .map(|m| row("raw", m))
        .chain(r.central.iter().map(|m| row("central", m)))
        .collect()
}

fn mc_command(cmd: &McCommand, ctx: &Context) -> Result<ResultRecord, CliError> {
    match cmd {
        McCommand::L1(s) => sampled(ctx, "mc-l1", s, Params::new(), |mc| Ok(estimate_record(mc.estimate_l1(s.m, s.n)?))),
        McCommand::Lmax(s) => {
            sampled(ctx, "mc-lmax", s, Params::new(), |mc| Ok(estimate_record(mc.estimate_lmax(s.m, s.n)?)))
        }
        McCommand::Lis(s) => sampled(ctx, "mc-lis", s, Params::new(), |mc| Ok(estimate_record(mc.estimate_lis(s.m, s.n)?))),
        McCommand::Moments { sample, r_max } => {
            sampled(ctx, "mc-moments", sample, params([("r_max", json!(r_max))]), |mc| {
                let r = mc.moments(sample.m, sample.n, *r_max)?;
                Ok(ResultRecord::new("", moment_rows(&r)).engine("monte-carlo").detail(json!({
                    "mean": r.mu.mean,
                    "mean_stderr": r.mu.std_error,
                    "caveat": MomentReport::CAVEAT,
                })))
            })
        }
        McCommand::Obs1 { sample, k } => sampled(ctx, "mc-obs1", sample, params([("k", json!(k))]), |mc| {
            Ok(observation_record(mc.check_observation1(sample.m, sample.n, *k)?))
        }),
        McCommand::Obs2 { sample, w } => {
            let letters = parse_letters(w)?;
            sampled(ctx, "mc-obs2", sample, params([("w", json!(letters))]), |mc| {
                Ok(observation_record(mc.check_observation2(sample.m, sample.n, &letters)?))
            })
        }
    }
}

fn parse_letters(text: &str) -> Result<Vec<u32>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| CliError::usage(format!("bad letter `{s}` in `{text}`"))))
        .collect()
}

fn strategy_kind(s: Strategy) -> StrategyKind {
    match s {
        Strategy::Trivial => StrategyKind::Trivial,
        Strategy::Safe => StrategyKind::Safe,
        Strategy::Shifting => StrategyKind::Shifting,
    }
}

fn cardgame_command(
    strategy: Strategy,
    s: &SampleArgs,
    word: Option<&str>,
    ctx: &Context,
) -> Result<ResultRecord, CliError> {
    let kind = strategy_kind(strategy);
    if let Some(text) = word {
        let w = Word::parse(text, s.m, s.n)?;
        let t = cardgame::play(&w, kind);
        let feedback: String = t.feedback.iter().map(|&b| if b { 'T' } else { 'F' }).collect();
        return Ok(ctx.uncached(
            "cardgame-play",
            params([("strategy", json!(kind.name())), ("m", json!(s.m)), ("n", json!(s.n)), ("word", json!(text))]),
            ResultRecord::new("", t.score).detail(json!({
                "guesses": t.guesses,
                "feedback": feedback,
                "l1": w.l1(),
            })),
        ));
    }
    sampled(ctx, "cardgame", s, params([("strategy", json!(kind.name()))]), |mc| {
        let e = cardgame::expected_score_with(&mc, s.m, s.n, kind)?;
        Ok(estimate_record(e))
    })
}

fn verify_all(level: Level, ctx: &Context) -> Outcome {
    let results: Vec<CriterionResult> = acceptance::run(level, ctx.exe, |r| eprintln!("{}", r.line()));
    let failed = results.iter().any(|r| !r.passed);
    let rows: Vec<Value> = results
        .iter()
        .map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail, "seconds": r.seconds}))
        .collect();
    let level_name = match level {
        Level::Quick => "quick",
        Level::Full => "full",
    };
    let record = ResultRecord::new("verify-all", rows)
        .param("level", level_name)
        .detail(json!({"passed": results.iter().filter(|r| r.passed).count(), "total": results.len()}));
    Outcome { record, failed }
}

//! Numerical checks of the identities and inequalities the library relies on,
//! run on suites of random micro instances. Each check reports the worst
//! deviation it saw and whether it stayed within tolerance.

use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{AdviceFamily, RegisterLayout, StrategyCircuit};
use crate::altmeas::{
    closed_form_winprob, conditional_from_pairs, conditional_probs, exact_post_state, joint_fidelity,
    leftover_prediction, run_alternating, AltMode,
};
use crate::bfqrom::{build_prefix_from_altmeas, run_bf_game};
use crate::bounds::{
    application_bound, gamma_inequality_holds, jensen_bound, moment_ratio_sequence, reweight_check, Application,
    BoundParams, WeightedValues,
};
use crate::error::{Error, Result};
use crate::game::{owf_game, YzCode};
use crate::instances::{random_instance, InstanceLimits, MicroInstance};
use crate::linalg::{quadratic_form, C64};
use crate::oracle::{enumerate_oracles, OracleAccess};
use crate::separation::{
    counting_bound, good_set, optimal_classical_advice, yz_fixing_check, CoverageInstance, CoverageMethod, ListRecoveryInstance,
};
use crate::spectral::{compressed_operator, decompose, game_povm_lean, oracle_spectra, optimal_nonuniform_value, success_probability};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub max_error: f64,
    pub elapsed: Duration,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {} cases, max deviation {:.3e}, {:.2?}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_error,
            self.elapsed,
            if self.detail.is_empty() { String::new() } else { format!(" ({})", self.detail) }
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Instances for the moment, leftover, Jensen and reduction checks.
    pub instances: usize,
    pub monotonicity_instances: usize,
    pub fuzz_samples: usize,
    pub k_max: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 2024, instances: 20, monotonicity_instances: 100, fuzz_samples: 1000, k_max: 6 }
    }
}

/// The shared suite: `N, M ≤ 4`, `D ≤ 64`.
pub fn micro_suite(seed: u64, count: usize) -> Result<Vec<MicroInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_instance(&mut rng, &InstanceLimits::default())).collect()
}

struct Tracker {
    name: &'static str,
    start: Instant,
    cases: usize,
    max_error: f64,
    failures: Vec<String>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self { name, start: Instant::now(), cases: 0, max_error: 0.0, failures: Vec::new() }
    }

    /// Records a deviation that must stay at or below `tol`.
    fn record(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        if err.is_nan() || err > self.max_error {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
        }
        if (err.is_nan() || err > tol) && self.failures.len() < 5 {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    fn finish(self, time_limit: Option<Duration>, note: &str) -> CheckResult {
        let elapsed = self.start.elapsed();
        let mut detail = note.to_string();
        let mut passed = self.failures.is_empty() && self.cases > 0;
        if let Some(limit) = time_limit {
            if elapsed > limit {
                passed = false;
                detail = format!("{detail}; exceeded {limit:?}");
            }
        }
        if !self.failures.is_empty() {
            detail = format!("{detail}; {}", self.failures.join("; "));
        }
        CheckResult { name: self.name, passed, cases: self.cases, max_error: self.max_error, elapsed, detail: detail.trim_start_matches("; ").to_string() }
    }
}

fn guard(name: &'static str, f: impl FnOnce(&mut Tracker) -> Result<()>) -> CheckResult {
    let mut t = Tracker::new(name);
    let limit = match name {
        MOMENT => Some(Duration::from_secs(60)),
        FUZZ => Some(Duration::from_secs(10)),
        _ => None,
    };
    if let Err(e) = f(&mut t) {
        t.fail(format!("error: {e}"));
    }
    t.finish(limit, "")
}

pub const MOMENT: &str = "moment identity";
pub const LEFTOVER: &str = "leftover-state law";
pub const MONOTONE: &str = "conditional monotonicity";
pub const JENSEN: &str = "Jensen step";
pub const REDUCTION: &str = "reduction equality";
pub const GUESSING: &str = "advice-guessing factor";
pub const GROUND: &str = "ground-truth scalars";
pub const FUZZ: &str = "inequality fuzz";
pub const BOUNDS: &str = "bound calculators";
pub const SEPARATION: &str = "separation skeleton";

/// Exact alternating runs against `Σ w |α|² p^k`, `k = 1..=k_max`.
pub fn check_moment_identity(suite: &[MicroInstance], k_max: usize) -> CheckResult {
    guard(MOMENT, |t| {
        for inst in suite {
            let spectra = oracle_spectra(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble)?;
            for k in 1..=k_max {
                let run = run_alternating(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble, k, AltMode::Exact)?;
                let err = (run.value - closed_form_winprob(&spectra, k as u32)).abs();
                t.record(err, 1e-9, || format!("{} k={k}: {err:.3e}", inst.label));
            }
        }
        Ok(())
    })
}

/// Post-state after `k` zero outcomes against `Σ α p^{k/2} (v⁰ | w⁰)`.
pub fn check_leftover_law(suite: &[MicroInstance], k_max: usize) -> CheckResult {
    guard(LEFTOVER, |t| {
        for inst in suite {
            let layout = inst.strategy.layout();
            for h in inst.ensemble.tables() {
                let psi = crate::adversary::prepare_start_state(&inst.advice, layout, h)?;
                let psi = psi.branches()[0].1.clone();
                let data = decompose(&game_povm_lean(&inst.game, h, &inst.strategy)?, &psi)?;
                for k in 1..=k_max {
                    let post = exact_post_state(&inst.game, h, &inst.strategy, &psi, k)?;
                    if post.norm_sqr() < 1e-20 {
                        continue;
                    }
                    let pred = leftover_prediction(&inst.game, h, &inst.strategy, &data, &psi, k)?;
                    let err = 1.0 - joint_fidelity(&post, &pred)?;
                    t.record(err, 1e-9, || format!("{} H={:?} k={k}: 1-F={err:.3e}", inst.label, h.entries()));
                }
            }
        }
        Ok(())
    })
}

/// `ε^(t+1) ≥ ε^(t)` for `t < t_max` on fresh random instances.
pub fn check_conditional_monotonicity(seed: u64, count: usize, t_max: usize) -> CheckResult {
    guard(MONOTONE, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lim = InstanceLimits { max_domain: 3, max_range: 3, max_dim: 32, max_oracles: 64, ..Default::default() };
        let mut skipped = 0;
        for _ in 0..count {
            let inst = random_instance(&mut rng, &lim)?;
            let spectra = oracle_spectra(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble)?;
            let seq = match conditional_probs(&spectra, t_max) {
                Ok(s) => s,
                Err(Error::ZeroSuccess) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let drop = seq.values.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
            t.record(drop, 1e-12, || format!("{}: drop {drop:.3e}", inst.label));
        }
        if skipped > 0 {
            t.fail(format!("{skipped} instances had zero success probability"));
        }
        Ok(())
    })
}

/// `success_probability ≤ (Σ w|α|²p^k)^{1/k}` for `k ≤ k_max`.
pub fn check_jensen(suite: &[MicroInstance], k_max: usize) -> CheckResult {
    guard(JENSEN, |t| {
        for inst in suite {
            let sp = success_probability(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble)?;
            let spectra = oracle_spectra(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble)?;
            for k in 1..=k_max {
                let root = closed_form_winprob(&spectra, k as u32).powf(1.0 / k as f64);
                let excess = sp - root;
                t.record(excess, 1e-12, || format!("{} k={k}: {sp} > {root}", inst.label));
            }
        }
        Ok(())
    })
}

/// Conditional value of the bit-fixing reduction against `ε^(k)` for odd `k`.
pub fn check_reduction_equality(suite: &[MicroInstance], ks: &[usize]) -> CheckResult {
    guard(REDUCTION, |t| {
        let k_max = ks.iter().copied().max().unwrap_or(1);
        for inst in suite {
            let spectra = oracle_spectra(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble)?;
            let seq = match conditional_probs(&spectra, k_max) {
                Ok(s) => s,
                Err(Error::ZeroSuccess) => continue,
                Err(e) => return Err(e),
            };
            for &k in ks {
                let Some(&eps) = seq.values.get(k - 1) else { continue };
                let bf = build_prefix_from_altmeas(&inst.advice, &inst.strategy, &inst.game, k)?;
                let out = run_bf_game(&bf, &inst.game, &inst.ensemble)?;
                let err = (out.conditional - eps).abs();
                t.record(err, 1e-9, || format!("{} k={k}: {} vs {eps}", inst.label, out.conditional));
                let over = out.prefix_queries.saturating_sub(bf.prefix_budget) as f64;
                t.record(over, 0.0, || format!("{} k={k}: prefix exceeds its budget", inst.label));
            }
        }
        Ok(())
    })
}

/// Running on the maximally mixed advice register: the mixture identity and the `2^{-S}` factor.
pub fn check_advice_guessing(seed: u64, per_s: usize) -> CheckResult {
    guard(GUESSING, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in 1..=3u32 {
            let lim = InstanceLimits { max_domain: 2, max_range: 2, advice_qubits: Some(s), ..Default::default() };
            for _ in 0..per_s {
                let inst = random_instance(&mut rng, &lim)?;
                let AdviceFamily::Explicit(fam) = &inst.advice else { continue };
                let layout = inst.strategy.layout();
                let d = layout.advice_dim();
                let explicit = success_probability(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble)?;
                let mixed = AdviceFamily::MaximallyMixedRun(Box::new(inst.advice.clone()));
                let mm = success_probability(&mixed, &inst.strategy, &inst.game, &inst.ensemble)?;
                // I/d = (1/d)|σ⟩⟨σ| + (1 − 1/d) ρ_⊥ on the advice register
                let mut identity = 0.0;
                for (h, w) in inst.ensemble.iter() {
                    let q = compressed_operator(&game_povm_lean(&inst.game, h, &inst.strategy)?, layout)?;
                    let sigma = fam.get(h)?;
                    let p = quadratic_form(&q, sigma);
                    let sig = nalgebra::DVector::from_column_slice(sigma);
                    let perp = (crate::linalg::CMatrix::identity(d, d) - &sig * sig.adjoint()) / C64::new((d - 1) as f64, 0.0);
                    let q_perp = (perp * &q).trace().re;
                    identity += w * (p / d as f64 + (1.0 - 1.0 / d as f64) * q_perp);
                }
                let err = (mm - identity).abs();
                t.record(err, 1e-12, || format!("S={s} {}: mixture {mm} vs {identity}", inst.label));
                let deficit = explicit / d as f64 - mm;
                t.record(deficit, 1e-12, || format!("S={s} {}: {mm} < {explicit}/{d}", inst.label));
            }
        }
        Ok(())
    })
}

fn rat(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// OWF `N = M = 2` values and the `(1/2, 5/8, 7/10)` conditional sequence, against exact rationals.
pub fn check_ground_truths() -> CheckResult {
    guard(GROUND, |t| {
        let g = owf_game(2, 2)?;
        let e = enumerate_oracles(2, 2)?;
        let id = StrategyCircuit::identity(RegisterLayout::answer_only(2)?);

        // answer 0 for every challenge, counted over 4 oracles × 2 coins
        let mut wins = Rational64::from_integer(0);
        let mut best = Rational64::from_integer(0);
        for h in e.tables() {
            let hit = |a: usize| (0..2).filter(|&x| h.query(a) == h.query(x)).count() as i64;
            wins += Rational64::new(hit(0), 8);
            best += Rational64::new(hit(0).max(hit(1)), 8);
        }
        let trivial = success_probability(&AdviceFamily::Uniform, &id, &g, &e)?;
        t.record((trivial - rat(wins)).abs(), 1e-15, || format!("trivial adversary {trivial}"));
        t.record((rat(wins) - 0.75).abs(), 0.0, || "rational count is not 3/4".into());
        let opt = optimal_nonuniform_value(&g, &id, &e)?;
        t.record((opt - rat(best)).abs(), 1e-12, || format!("optimal T=0 advice {opt}"));
        t.record((rat(best) - 0.75).abs(), 0.0, || "rational optimum is not 3/4".into());

        let seq = conditional_from_pairs(&[(0.5, 0.25), (0.5, 0.75)], 3)?;
        let half = Rational64::new(1, 2);
        let (p1, p2) = (Rational64::new(1, 4), Rational64::new(3, 4));
        let moment = |k: i32| half * p1.pow(k) + half * p2.pow(k);
        for (i, v) in seq.values.iter().enumerate() {
            let exact = moment(i as i32 + 1) / moment(i as i32);
            t.record((v - rat(exact)).abs(), 1e-15, || format!("ε^({}) = {v}", i + 1));
        }
        let expected = [Rational64::new(1, 2), Rational64::new(5, 8), Rational64::new(7, 10)];
        for (i, q) in expected.iter().enumerate() {
            let exact = moment(i as i32 + 1) / moment(i as i32);
            t.record(if exact == *q { 0.0 } else { 1.0 }, 0.0, || format!("rational ε^({}) = {exact}", i + 1));
        }
        Ok(())
    })
}

fn random_weighted<R: Rng + ?Sized>(rng: &mut R) -> Result<WeightedValues> {
    let len = rng.random_range(1..=8);
    let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let drift: f64 = 1.0 - weights.iter().sum::<f64>();
    weights[0] += drift;
    let values = (0..len).map(|_| rng.random::<f64>()).collect();
    WeightedValues::new(weights, values)
}

/// Reweighting, ratio monotonicity and Jensen on random inputs, plus `2 ≤ (1+γ)^{1/γ}`.
pub fn check_lemma_fuzz(seed: u64, samples: usize) -> CheckResult {
    guard(FUZZ, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let wv = random_weighted(&mut rng)?;
            let (before, after) = reweight_check(&wv)?;
            t.record(before - after, 1e-12, || format!("reweight {before} > {after}"));
        }
        for _ in 0..samples {
            let wv = random_weighted(&mut rng)?;
            let seq = moment_ratio_sequence(&wv, 8)?;
            let drop = seq.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
            t.record(drop, 1e-12, || format!("ratio sequence drops by {drop}"));
        }
        for _ in 0..samples {
            let wv = random_weighted(&mut rng)?;
            for g in 1..=10 {
                let (mean, root) = jensen_bound(&wv, g)?;
                t.record(mean - root, 1e-12, || format!("Jensen g={g}: {mean} > {root}"));
            }
        }
        for i in 1..=samples {
            let gamma = i as f64 / samples as f64;
            t.record(if gamma_inequality_holds(gamma) { 0.0 } else { 1.0 }, 0.0, || format!("γ = {gamma}"));
        }
        Ok(())
    })
}

/// The three worked calculator examples.
pub fn check_bound_calculators() -> CheckResult {
    guard(BOUNDS, |t| {
        let base = BoundParams { s: Some(4.0), t: Some(2.0), n: Some(1024.0), m: Some(1024.0), ..BoundParams::new() };
        let owf = application_bound(Application::Owf, &base)?.value;
        // P = 4·(2+1+2) = 20, δ = 2·(20 + 4)/1024
        t.record((owf - 0.046875).abs(), 1e-15, || format!("OWF {owf}"));
        let prg = application_bound(Application::Prg, &base)?.value;
        t.record((prg - 0.76093).abs(), 1e-5, || format!("PRG {prg}"));
        let salt = BoundParams {
            s: Some(8.0),
            t: Some(2.0),
            k: Some(256.0),
            t_samp: Some(1.0),
            t_verify: Some(1.0),
            nu: Some(0.1),
            ..BoundParams::new()
        };
        let sg = application_bound(Application::SaltGeneral, &salt)?.value;
        t.record((sg - 0.525).abs(), 1e-15, || format!("salting {sg}"));
        Ok(())
    })
}

fn brute_good_count(code: &YzCode, lists: &[Vec<usize>], zeta: f64) -> usize {
    let n = code.n();
    code.codewords()
        .iter()
        .filter(|w| {
            let misses = (0..n).filter(|&i| !lists[i].contains(&w[i])).count();
            misses as f64 <= zeta * n as f64 + 1e-12
        })
        .count()
}

/// Good-set counts on random toy codes, greedy coverage against exact, counting-bound
/// arithmetic, and the best response after every small classical fixing of a toy code.
pub fn check_separation_skeleton(seed: u64, codes: usize) -> CheckResult {
    guard(SEPARATION, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..codes {
            let n = rng.random_range(1..=4);
            let sigma = rng.random_range(2..=3usize);
            let all = YzCode::full(n, sigma)?;
            let words: Vec<Vec<usize>> = all.codewords().iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
            let words = if words.is_empty() { vec![all.codewords()[0].clone()] } else { words };
            let code = YzCode::new(n, sigma, words)?;
            let ell = rng.random_range(0..=sigma);
            let lists: Vec<Vec<usize>> = (0..n)
                .map(|_| {
                    let mut l: Vec<usize> = (0..sigma).filter(|_| rng.random_bool(0.5)).collect();
                    l.truncate(ell);
                    l
                })
                .collect();
            let zeta = [0.0, 0.25, 0.5, 1.0][rng.random_range(0..4)];
            let inst = ListRecoveryInstance::new(code.clone(), lists.clone(), zeta, ell)?;
            let (_, count) = good_set(&inst);
            let brute = brute_good_count(&code, &lists, zeta);
            t.record(count.abs_diff(brute) as f64, 0.0, || format!("good set {count} vs {brute}"));
        }
        let ratio = 1.0 - (-1.0f64).exp();
        for _ in 0..codes {
            let oracles = rng.random_range(1..=6);
            let maps = rng.random_range(2..=7);
            let win: Vec<Vec<f64>> = (0..oracles).map(|_| (0..maps).map(|_| rng.random::<f64>()).collect()).collect();
            let cov = CoverageInstance::new(vec![1.0 / oracles as f64; oracles], (0..maps).map(|m| vec![m]).collect(), win)?;
            for s in 0..=2 {
                let exact = optimal_classical_advice(&cov, s, CoverageMethod::Exact { cap: 1 << 20 })?.value;
                let greedy = optimal_classical_advice(&cov, s, CoverageMethod::Greedy)?.value;
                t.record(ratio * exact - greedy, 1e-12, || format!("greedy {greedy} vs exact {exact}"));
                t.record(greedy - exact, 1e-12, || format!("greedy {greedy} beats exact {exact}"));
            }
        }
        let toy = YzCode::full(2, 2)?;
        for fixing in crate::bfqrom::all_fixings(4, 2, 2, 1 << 12)? {
            for zeta in [0.0, 0.5, 1.0] {
                let check = yz_fixing_check(&toy, &fixing, zeta, 1 << 12)?;
                let excess = check.optimal_value - check.bound;
                t.record(excess, 1e-12, || format!("fixing {:?} ζ={zeta}: {check:?}", fixing.points()));
            }
        }
        for (l, n, zeta, expected) in [(1, 2, 0.5, 0.75), (0, 2, 0.0, 1.0), (0, 20, 1.0, 2f64.powi(-20)), (3, 4, 0.5, 0.4375)] {
            let got = counting_bound(l, n, zeta);
            t.record(if got == expected { 0.0 } else { (got - expected).abs().max(f64::MIN_POSITIVE) }, 0.0, || {
                format!("counting_bound({l}, {n}, {zeta}) = {got}")
            });
        }
        Ok(())
    })
}

/// Runs every check with the given configuration.
pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let suite = micro_suite(cfg.seed, cfg.instances)?;
    let moment = {
        let start = Instant::now();
        let mut r = check_moment_identity(&suite, cfg.k_max);
        r.elapsed = start.elapsed();
        r
    };
    Ok(vec![
        moment,
        check_leftover_law(&suite, cfg.k_max),
        check_conditional_monotonicity(cfg.seed ^ 0x5eed, cfg.monotonicity_instances, 8),
        check_jensen(&suite, 8),
        check_reduction_equality(&suite, &[1, 3, 5]),
        check_advice_guessing(cfg.seed ^ 0xad, 4),
        check_ground_truths(),
        check_lemma_fuzz(cfg.seed ^ 0xf22, cfg.fuzz_samples),
        check_bound_calculators(),
        check_separation_skeleton(cfg.seed ^ 0x5e9, 12),
    ])
}

//! The experiment registry. Every experiment turns a config into one table.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qrom_core::adversary::{AdviceFamily, RegisterLayout, Step, StrategyCircuit, Subsystem};
use qrom_core::altmeas::{closed_form_winprob, conditional_probs, run_alternating, AltMode};
use qrom_core::bfqrom::{build_prefix_from_altmeas, estimate_nu, fixing_candidates, run_bf_game, Online};
use qrom_core::bounds::{
    application_bound, bound_record, main_theorem_bound, Application, BoundMode, BoundParams, BoundReport,
    BOUND_CSV_HEADER,
};
use qrom_core::game::{Game, YzCode};
use qrom_core::instances::{random_instance, InstanceLimits};
use qrom_core::linalg::random_unitary;
use qrom_core::oracle::OracleEnsemble;
use qrom_core::separation::{
    all_response_maps, counting_bound, good_set, quantum_vs_classical_report, yz_fixing_check, ListRecoveryInstance,
};
use qrom_core::spectral::optimal_advice_family;
use qrom_core::verify::{self, SuiteConfig};
use qrom_core::Error;

use crate::config::{AdviceSpec, EnsembleSpec, ExperimentConfig};
use crate::error::{CliError, CliResult};

/// Column names plus stringified rows; the runner appends the config hash.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Floats are written in Rust's shortest round-trip form.
fn f(x: f64) -> String {
    format!("{x}")
}

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    pub run: fn(&ExperimentConfig) -> CliResult<Table>,
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "verify-lemmas",
        description: "run every identity and inequality check on the random micro suite",
        run: verify_lemmas,
    },
    Experiment {
        name: "altmeas-sweep",
        description: "alternating-measurement win probability against k, exact and sampled",
        run: altmeas_sweep,
    },
    Experiment {
        name: "conditional-monotonicity",
        description: "conditional success sequence on random instances",
        run: conditional_monotonicity,
    },
    Experiment {
        name: "reduction-equality",
        description: "bit-fixing reduction value against the conditional sequence for odd k",
        run: reduction_equality,
    },
    Experiment { name: "bound-calculator", description: "closed-form security bounds for one parameter set", run: bound_calculator },
    Experiment { name: "bound-sweep", description: "closed-form bounds as the advice size S varies", run: bound_sweep },
    Experiment {
        name: "advice-optimum-curve",
        description: "best quantum and classical advice value against S for zero-query strategies",
        run: advice_optimum_curve,
    },
    Experiment {
        name: "bfqrom-estimate",
        description: "presampling value over classical fixings and response maps",
        run: bfqrom_estimate,
    },
    Experiment {
        name: "separation-report",
        description: "good-set counts and post-fixing best responses on a toy code",
        run: separation_report,
    },
];

pub fn find(name: &str) -> CliResult<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name).collect();
        CliError::Config(format!("unknown experiment `{name}`; registered: {}", names.join(", ")))
    })
}

/// The game, ensemble, strategy and advice named by the config.
struct Setup {
    game: Game,
    ensemble: OracleEnsemble,
    strategy: StrategyCircuit,
    advice: AdviceFamily,
}

fn setup(cfg: &ExperimentConfig) -> CliResult<Setup> {
    let game = Game::parse_selector(&cfg.game.selector, cfg.game.n, cfg.game.m)?;
    let ensemble = setup_ensemble(cfg, &game)?;
    let strategy = match &cfg.strategy {
        Some(path) => StrategyCircuit::load(path)?,
        None => StrategyCircuit::identity(RegisterLayout::answer_only(game.answer_count())?),
    };
    strategy.layout().check_against(&game)?;
    let advice = match cfg.advice {
        AdviceSpec::Uniform => AdviceFamily::Uniform,
        AdviceSpec::Optimal => AdviceFamily::Explicit(optimal_advice_family(&game, &strategy, &ensemble)?.0),
    };
    Ok(Setup { game, ensemble, strategy, advice })
}

fn verify_lemmas(cfg: &ExperimentConfig) -> CliResult<Table> {
    let defaults = SuiteConfig::default();
    let suite = SuiteConfig {
        seed: cfg.seed,
        instances: cfg.params.instances.unwrap_or(defaults.instances),
        fuzz_samples: cfg.params.fuzz_samples.unwrap_or(defaults.fuzz_samples),
        k_max: cfg.params.k_max.unwrap_or(defaults.k_max),
        ..defaults
    };
    let results = verify::run_all(&suite)?;
    let mut table = Table::new(&["criterion", "name", "passed", "cases", "max_error"]);
    for (i, r) in results.iter().enumerate() {
        table.push(vec![(i + 1).to_string(), r.name.into(), r.passed.to_string(), r.cases.to_string(), f(r.max_error)]);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        for r in results.iter().filter(|r| !r.passed) {
            eprintln!("{}", r.line());
        }
        return Err(CliError::ChecksFailed { failed, total: results.len() });
    }
    Ok(table)
}

fn altmeas_sweep(cfg: &ExperimentConfig) -> CliResult<Table> {
    let s = setup(cfg)?;
    let k_max = cfg.params.k_max.unwrap_or(6);
    let samples = cfg.params.samples.unwrap_or(2000);
    let spectra = qrom_core::spectral::oracle_spectra(&s.advice, &s.strategy, &s.game, &s.ensemble)?;
    let mut table = Table::new(&["k", "exact_winprob", "closed_form", "trajectory_estimate", "stderr"]);
    for k in 1..=k_max {
        let exact = run_alternating(&s.advice, &s.strategy, &s.game, &s.ensemble, k, AltMode::Exact)?;
        let mode = AltMode::Trajectory { samples, seed: cfg.seed.wrapping_add(k as u64) };
        let sampled = run_alternating(&s.advice, &s.strategy, &s.game, &s.ensemble, k, mode)?;
        table.push(vec![
            k.to_string(),
            f(exact.value),
            f(closed_form_winprob(&spectra, k as u32)),
            f(sampled.value),
            f(sampled.stderr.unwrap_or(0.0)),
        ]);
    }
    Ok(table)
}

fn small_limits() -> InstanceLimits {
    InstanceLimits { max_domain: 3, max_range: 3, max_dim: 32, max_oracles: 64, ..Default::default() }
}

fn conditional_monotonicity(cfg: &ExperimentConfig) -> CliResult<Table> {
    let count = cfg.params.instances.unwrap_or(100);
    let t_max = cfg.params.k_max.unwrap_or(8);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new(&["instance", "label", "t", "epsilon", "step"]);
    for i in 0..count {
        let inst = random_instance(&mut rng, &small_limits())?;
        let spectra = qrom_core::spectral::oracle_spectra(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble)?;
        let seq = match conditional_probs(&spectra, t_max) {
            Ok(seq) => seq,
            Err(Error::ZeroSuccess) => continue,
            Err(e) => return Err(e.into()),
        };
        for (t, eps) in seq.values.iter().enumerate() {
            let step = if t == 0 { 0.0 } else { eps - seq.values[t - 1] };
            table.push(vec![i.to_string(), inst.label.clone(), (t + 1).to_string(), f(*eps), f(step)]);
        }
    }
    Ok(table)
}

fn reduction_equality(cfg: &ExperimentConfig) -> CliResult<Table> {
    let count = cfg.params.instances.unwrap_or(20);
    let suite = verify::micro_suite(cfg.seed, count)?;
    let mut table = Table::new(&[
        "instance",
        "k",
        "bf_conditional",
        "epsilon",
        "abs_error",
        "bf_joint",
        "accept_rate",
        "prefix_queries",
        "prefix_budget",
    ]);
    for (i, inst) in suite.iter().enumerate() {
        let spectra = qrom_core::spectral::oracle_spectra(&inst.advice, &inst.strategy, &inst.game, &inst.ensemble)?;
        let seq = match conditional_probs(&spectra, 5) {
            Ok(seq) => seq,
            Err(Error::ZeroSuccess) => continue,
            Err(e) => return Err(e.into()),
        };
        for k in [1usize, 3, 5] {
            let Some(&eps) = seq.values.get(k - 1) else { continue };
            let bf = build_prefix_from_altmeas(&inst.advice, &inst.strategy, &inst.game, k)?;
            let out = run_bf_game(&bf, &inst.game, &inst.ensemble)?;
            table.push(vec![
                i.to_string(),
                k.to_string(),
                f(out.conditional),
                f(eps),
                f((out.conditional - eps).abs()),
                f(out.joint),
                f(out.accept_rate),
                out.prefix_queries.to_string(),
                bf.prefix_budget.to_string(),
            ]);
        }
    }
    Ok(table)
}

fn bound_params(cfg: &ExperimentConfig) -> BoundParams {
    let p = &cfg.params;
    BoundParams {
        s: p.s,
        t: p.t,
        n: p.n,
        m: p.m,
        k: p.k,
        t_samp: p.t_samp,
        t_verify: p.t_verify,
        nu: p.nu,
        c: p.c.unwrap_or(1.0),
        trusted_constant: p.trusted_constant.unwrap_or(false),
    }
}

/// `owf`, `prg`, `salt_general`, `salt_decision`, `classical_general`, or `main_general` /
/// `main_decision`: the main theorem applied to the OWF presampling bound `c(P + T²)/min(N, M)`.
fn one_bound(which: &str, params: &BoundParams, grid: &[f64]) -> CliResult<BoundReport> {
    let main = match which {
        "main_general" => Some(BoundMode::General),
        "main_decision" => Some(BoundMode::Decision { grid: grid.to_vec(), refine: true }),
        _ => None,
    };
    let Some(mode) = main else {
        return Ok(application_bound(Application::parse(which)?, params)?);
    };
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::Config(format!("{which} needs `{name}`")));
    let (n, m) = (need(params.n, "n")?, need(params.m, "m")?);
    let c = params.c;
    let nu = move |p: f64, t: f64| c * (p + t * t) / n.min(m);
    let mut report = main_theorem_bound(
        &nu,
        need(params.s, "s")?,
        need(params.t, "t")?,
        params.t_samp.unwrap_or(1.0),
        params.t_verify.unwrap_or(2.0),
        &mode,
    )?;
    report.params.n = params.n;
    report.params.m = params.m;
    report.params.c = c;
    report.name = which.into();
    Ok(report)
}

fn default_grid() -> Vec<f64> {
    (1..=100).map(|i| i as f64 / 100.0).collect()
}

fn bound_table(reports: &[BoundReport]) -> Table {
    let mut table = Table::new(&BOUND_CSV_HEADER);
    for r in reports {
        table.push(bound_record(r));
    }
    table
}

fn bound_calculator(cfg: &ExperimentConfig) -> CliResult<Table> {
    let params = bound_params(cfg);
    let which = cfg.params.which.clone().unwrap_or_else(|| vec!["owf".into()]);
    let grid = cfg.params.gamma_grid.clone().unwrap_or_else(default_grid);
    let reports = which.iter().map(|w| one_bound(w, &params, &grid)).collect::<CliResult<Vec<_>>>()?;
    Ok(bound_table(&reports))
}

fn bound_sweep(cfg: &ExperimentConfig) -> CliResult<Table> {
    let base = bound_params(cfg);
    let which = cfg.params.which.clone().unwrap_or_else(|| vec!["owf".into(), "prg".into()]);
    let grid = cfg.params.gamma_grid.clone().unwrap_or_else(default_grid);
    let s_values = cfg.params.s_values.clone().unwrap_or_else(|| (0..=20).map(|i| 2f64.powi(i)).collect());
    let mut reports = Vec::new();
    for w in &which {
        for &s in &s_values {
            reports.push(one_bound(w, &BoundParams { s: Some(s), ..base.clone() }, &grid)?);
        }
    }
    Ok(bound_table(&reports))
}

/// A zero-query strategy on `adv ⊗ ans` with a random unitary per challenge.
fn random_zero_query_strategy(game: &Game, s: u32, rng: &mut ChaCha8Rng) -> CliResult<StrategyCircuit> {
    let (d, a) = (1usize << s, game.answer_count());
    let layout = RegisterLayout::new(
        vec![Subsystem::new("adv", d), Subsystem::new("ans", a)],
        vec!["adv".into()],
        vec!["ans".into()],
        "ans",
    )?;
    let programs: BTreeMap<usize, Vec<Step>> = (0..game.challenge_count())
        .map(|ch| (ch, vec![Step::Unitary { targets: vec!["adv".into(), "ans".into()], matrix: random_unitary(d * a, rng) }]))
        .collect();
    Ok(StrategyCircuit::new(layout, programs, None)?)
}

fn advice_optimum_curve(cfg: &ExperimentConfig) -> CliResult<Table> {
    let s_max = cfg.params.s_max.unwrap_or(3);
    let trials = cfg.params.trials.unwrap_or(8);
    let game = Game::parse_selector(&cfg.game.selector, cfg.game.n, cfg.game.m)?;
    let ensemble = setup_ensemble(cfg, &game)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new(&[
        "S",
        "trials",
        "best_quantum",
        "classical_same_strategy",
        "classical_any_map",
        "any_map_exact",
    ]);
    for s in 0..=s_max {
        let mut best: Option<qrom_core::separation::SeparationRow> = None;
        for _ in 0..trials {
            let strat = random_zero_query_strategy(&game, s, &mut rng)?;
            let row = quantum_vs_classical_report(&game, &strat, &ensemble, s)?;
            if best.as_ref().is_none_or(|b| row.quantum_value > b.quantum_value) {
                best = Some(row);
            }
        }
        let b = best.expect("trials > 0");
        table.push(vec![
            s.to_string(),
            trials.to_string(),
            f(b.quantum_value),
            f(b.classical_value),
            f(b.classical_any_map),
            b.any_map_exact.to_string(),
        ]);
    }
    Ok(table)
}

fn setup_ensemble(cfg: &ExperimentConfig, game: &Game) -> CliResult<OracleEnsemble> {
    Ok(match cfg.ensemble {
        EnsembleSpec::Exhaustive { cap } => OracleEnsemble::exhaustive(game.oracle_domain(), game.oracle_range(), cap as u128)?,
        EnsembleSpec::Sampled { count } => OracleEnsemble::sampled(game.oracle_domain(), game.oracle_range(), count, cfg.seed)?,
    })
}

fn bfqrom_estimate(cfg: &ExperimentConfig) -> CliResult<Table> {
    let game = Game::parse_selector(&cfg.game.selector, cfg.game.n, cfg.game.m)?;
    let ensemble = setup_ensemble(cfg, &game)?;
    let p = cfg.params.p.unwrap_or(1);
    let cap = match cfg.ensemble {
        EnsembleSpec::Exhaustive { cap } => cap as u128,
        EnsembleSpec::Sampled { .. } => qrom_core::oracle::DEFAULT_ENUMERATION_CAP,
    };
    let prefixes = fixing_candidates(game.oracle_domain(), game.oracle_range(), p, cap)?;
    let onlines: Vec<Online> = all_response_maps(&game, cap)?.into_iter().map(Online::ResponseMap).collect();
    let est = estimate_nu(&game, &prefixes, &onlines, &ensemble, p, 0)?;
    let mut table = Table::new(&["P", "T", "family_id", "online_id", "joint", "conditional", "accept_rate"]);
    for r in &est.rows {
        table.push(vec![
            p.to_string(),
            "0".into(),
            r.prefix_id.clone(),
            r.online_id.to_string(),
            f(r.joint),
            f(r.conditional),
            f(r.accept_rate),
        ]);
    }
    eprintln!(
        "best conditional {} best joint {}{}",
        est.best_conditional,
        est.best_joint,
        if est.semantics_differ() { " (the two readings of the value differ)" } else { "" }
    );
    Ok(table)
}

fn separation_report(cfg: &ExperimentConfig) -> CliResult<Table> {
    let code = match cfg.game.selector.strip_prefix("yz:") {
        Some(path) => YzCode::load(path)?,
        None => YzCode::full(cfg.params.code_n.unwrap_or(2), cfg.params.code_sigma.unwrap_or(2))?,
    };
    let p = cfg.params.p.unwrap_or(2);
    let zetas = cfg.params.zeta.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0]);
    let domain = code.n() * code.sigma();
    let cap = qrom_core::oracle::DEFAULT_ENUMERATION_CAP;
    let mut table = Table::new(&[
        "fixing",
        "zeta",
        "fixed_points",
        "good_count",
        "counting_bound",
        "best_response",
        "holds",
    ]);
    for cand in fixing_candidates(domain, 2, p, cap)? {
        let fixing = match cand.prefix {
            qrom_core::bfqrom::Prefix::Fixing(f) => f,
            _ => qrom_core::bfqrom::ClassicalFixing::new(Vec::new())?,
        };
        let fixing = &fixing;
        for &zeta in &zetas {
            let inst = ListRecoveryInstance::from_fixing(code.clone(), fixing, zeta)?;
            let (_, good) = good_set(&inst);
            let check = yz_fixing_check(&code, fixing, zeta, cap)?;
            debug_assert_eq!(good, check.good_count);
            table.push(vec![
                cand.id.clone(),
                f(zeta),
                fixing.len().to_string(),
                good.to_string(),
                f(counting_bound(good, code.n(), zeta)),
                f(check.optimal_value),
                check.holds().to_string(),
            ]);
        }
    }
    Ok(table)
}

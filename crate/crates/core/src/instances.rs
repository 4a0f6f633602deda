//! Random micro-scale instances: a game, a query-making strategy, an advice
//! family and an exhaustive (or sampled) oracle ensemble.

use std::collections::BTreeMap;

use rand::Rng;

use crate::adversary::{AdviceFamily, ExplicitAdvice, RegisterLayout, Step, StrategyCircuit, Subsystem};
use crate::error::Result;
use crate::game::{owf_game, prg_game, salt_game, Game};
use crate::linalg::{random_state, random_unitary};
use crate::oracle::OracleEnsemble;

/// Size limits for [`random_instance`].
#[derive(Clone, Copy, Debug)]
pub struct InstanceLimits {
    pub max_domain: usize,
    pub max_range: usize,
    pub max_dim: usize,
    pub max_queries: usize,
    /// Ensembles larger than this are sampled instead of enumerated.
    pub max_oracles: usize,
    /// Forces an advice register of exactly `2^S` dimensions.
    pub advice_qubits: Option<u32>,
}

impl Default for InstanceLimits {
    fn default() -> Self {
        Self { max_domain: 4, max_range: 4, max_dim: 64, max_queries: 2, max_oracles: 256, advice_qubits: None }
    }
}

#[derive(Clone, Debug)]
pub struct MicroInstance {
    pub game: Game,
    pub strategy: StrategyCircuit,
    pub advice: AdviceFamily,
    pub ensemble: OracleEnsemble,
    pub label: String,
}

fn pick_game<R: Rng + ?Sized>(rng: &mut R, lim: &InstanceLimits) -> Result<Game> {
    loop {
        let n = rng.random_range(2..=lim.max_domain.max(2));
        let m = rng.random_range(2..=lim.max_range.max(2));
        let game = match rng.random_range(0..4) {
            0 | 1 => owf_game(n, m)?,
            2 => prg_game(n.min(3), m.min(3))?,
            _ => salt_game(owf_game(2, 2)?, 2)?,
        };
        let aux = lim.advice_qubits.map_or(1, |s| 1usize << s);
        if base_dim(&game) * aux <= lim.max_dim {
            return Ok(game);
        }
    }
}

fn is_owf(game: &Game) -> bool {
    matches!(game, Game::Owf { .. })
}

/// Answer register, query register (shared with the answer for OWF) and oracle output register.
fn base_dim(game: &Game) -> usize {
    let q = if is_owf(game) { 1 } else { game.oracle_domain() };
    game.answer_count() * q * game.oracle_range()
}

/// Draws one instance; the oracle-call count per challenge is uniform in `0..=max_queries`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, lim: &InstanceLimits) -> Result<MicroInstance> {
    let game = pick_game(rng, lim)?;
    let base = base_dim(&game);
    let aux_dim = match lim.advice_qubits {
        Some(s) => 1usize << s,
        None if base * 2 <= lim.max_dim && rng.random_bool(0.5) => 2,
        None => 1,
    };
    let mut subs = vec![Subsystem::new("ans", game.answer_count())];
    let query_label = if is_owf(&game) {
        "ans"
    } else {
        subs.push(Subsystem::new("q", game.oracle_domain()));
        "q"
    };
    subs.push(Subsystem::new("y", game.oracle_range()));
    if aux_dim > 1 {
        subs.push(Subsystem::new("aux", aux_dim));
    }
    let labels: Vec<String> = subs.iter().map(|s| s.label.clone()).collect();
    let (advice, work): (Vec<String>, Vec<String>) = if lim.advice_qubits.is_some() {
        labels.iter().cloned().partition(|l| l == "aux")
    } else if aux_dim > 1 && rng.random_bool(0.5) {
        labels.iter().cloned().partition(|l| l == "ans" || l == "aux")
    } else {
        labels.iter().cloned().partition(|l| l == "ans")
    };
    let layout = RegisterLayout::new(subs.clone(), advice, work, "ans")?;
    let dim = layout.total_dim();

    let queries = rng.random_range(0..=lim.max_queries);
    let pre_targets: Vec<String> = labels.iter().filter(|l| *l != "y").cloned().collect();
    let pre_dim: usize = subs.iter().filter(|s| s.label != "y").map(|s| s.dim).product();
    let mut programs = BTreeMap::new();
    for ch in 0..game.challenge_count() {
        let mut steps = Vec::new();
        for _ in 0..queries {
            steps.push(Step::Unitary { targets: pre_targets.clone(), matrix: random_unitary(pre_dim, rng) });
            steps.push(Step::OracleCall { x: query_label.into(), y: "y".into() });
        }
        steps.push(Step::Unitary { targets: labels.clone(), matrix: random_unitary(dim, rng) });
        programs.insert(ch, steps);
    }
    let strategy = StrategyCircuit::new(layout, programs, None)?;

    let count = (game.oracle_range() as u128).checked_pow(game.oracle_domain() as u32).unwrap_or(u128::MAX);
    let ensemble = if count <= lim.max_oracles as u128 {
        OracleEnsemble::exhaustive(game.oracle_domain(), game.oracle_range(), lim.max_oracles as u128)?
    } else {
        OracleEnsemble::sampled(game.oracle_domain(), game.oracle_range(), lim.max_oracles, rng.random())?
    };
    let ds = strategy.layout().advice_dim();
    let advice = if rng.random_bool(0.8) {
        AdviceFamily::Explicit(ExplicitAdvice::from_fn(&ensemble, ds, |_| random_state(ds, rng))?)
    } else {
        AdviceFamily::Uniform
    };
    let label = format!("{game} D={dim} d_S={ds} T={queries} |H|={}", ensemble.len());
    Ok(MicroInstance { game, strategy, advice, ensemble, label })
}

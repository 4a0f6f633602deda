//! The `(S, T)` adversary model: labeled registers, per-challenge strategy
//! circuits, oracle-dependent advice, and zero-query classical adversaries.

mod advice;
mod classical;
mod layout;
mod strategy;

pub use advice::{embed, prepare_start_state, AdviceFamily, ExplicitAdvice, StartState};
pub use classical::{classical_run, classical_value, ClassicalAdversary};
pub use layout::{RegisterLayout, Subsystem, DEFAULT_MAX_DIM};
pub use strategy::{Step, StrategyCircuit};

use rand::Rng;

use crate::error::Result;
use crate::game::{Game, Outcome};
use crate::linalg::{StateVector, C64};
use crate::oracle::{OracleAccess, OracleTable};

/// Applies `U_ch` for `challenge` to `state`.
pub fn apply_strategy(
    strat: &StrategyCircuit,
    challenge: usize,
    h: &dyn OracleAccess,
    state: &[C64],
) -> Result<StateVector> {
    strat.apply(challenge, h, state)
}

/// Born distribution of the answer register after running `U_ch` on `state`.
pub fn answer_distribution(
    strat: &StrategyCircuit,
    challenge: usize,
    h: &dyn OracleAccess,
    state: &[C64],
    answers: usize,
) -> Result<Vec<f64>> {
    let out = strat.apply(challenge, h, state)?;
    let layout = strat.layout();
    let mut dist = vec![0.0; answers];
    for (idx, amp) in out.iter().enumerate() {
        dist[layout.answer_of(idx)] += amp.norm_sqr();
    }
    Ok(dist)
}

/// One sampled play: prepare the start state, run the strategy on `Samp(r)`,
/// measure the answer register, and verify.
pub fn run_and_measure<R: Rng + ?Sized>(
    adv: &AdviceFamily,
    strat: &StrategyCircuit,
    game: &Game,
    h: &OracleTable,
    coin: usize,
    rng: &mut R,
) -> Result<(usize, Outcome)> {
    strat.layout().check_against(game)?;
    let start = prepare_start_state(adv, strat.layout(), h)?;
    let branches = start.branches();
    let mut u: f64 = rng.random();
    let mut chosen = branches[branches.len() - 1].1;
    for (w, psi) in &branches {
        if u < *w {
            chosen = psi;
            break;
        }
        u -= w;
    }
    let ch = game.samp(h, coin);
    let dist = answer_distribution(strat, ch, h, chosen, game.answer_count())?;
    let mut u: f64 = rng.random::<f64>() * dist.iter().sum::<f64>();
    let mut ans = dist.len() - 1;
    for (a, p) in dist.iter().enumerate() {
        if u < *p {
            ans = a;
            break;
        }
        u -= p;
    }
    Ok((ans, game.evaluate(h, coin, ans)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{owf_game, prg_game};
    use crate::oracle::enumerate_oracles;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_owf_single_play() {
        let g = owf_game(2, 2).unwrap();
        let s = StrategyCircuit::identity(RegisterLayout::answer_only(2).unwrap());
        let h = OracleTable::new(2, vec![1, 0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(run_and_measure(&AdviceFamily::Uniform, &s, &g, &h, 0, &mut rng).unwrap(), (0, Outcome::Win));
    }

    #[test]
    fn identity_owf_empirical_rate() {
        let g = owf_game(2, 2).unwrap();
        let s = StrategyCircuit::identity(RegisterLayout::answer_only(2).unwrap());
        let ens = enumerate_oracles(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples = 20_000;
        let mut wins = 0;
        for _ in 0..samples {
            let h = &ens.tables()[rng.random_range(0..ens.len())];
            let r = rng.random_range(0..g.coin_count());
            if run_and_measure(&AdviceFamily::Uniform, &s, &g, h, r, &mut rng).unwrap().1.is_win() {
                wins += 1;
            }
        }
        let rate = wins as f64 / samples as f64;
        let sigma = (0.75 * 0.25 / samples as f64).sqrt();
        assert!((rate - 0.75).abs() < 4.0 * sigma, "rate {rate}");
    }

    #[test]
    fn prg_constant_answer_is_half() {
        let g = prg_game(2, 2).unwrap();
        let s = StrategyCircuit::identity(RegisterLayout::answer_only(2).unwrap());
        let ens = enumerate_oracles(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples = 20_000;
        let mut wins = 0;
        for _ in 0..samples {
            let h = &ens.tables()[rng.random_range(0..ens.len())];
            let r = rng.random_range(0..g.coin_count());
            wins += run_and_measure(&AdviceFamily::Uniform, &s, &g, h, r, &mut rng).unwrap().1.is_win() as usize;
        }
        let rate = wins as f64 / samples as f64;
        assert!((rate - 0.5).abs() < 4.0 * (0.25 / samples as f64).sqrt());
    }
}

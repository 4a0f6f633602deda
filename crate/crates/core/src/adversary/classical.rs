use crate::game::{Game, Outcome};
use crate::oracle::{OracleEnsemble, OracleTable};

type AdviceFn = Box<dyn Fn(&OracleTable) -> u64 + Send + Sync>;
type ResponseFn = Box<dyn Fn(u64, usize) -> usize + Send + Sync>;

/// A zero-query adversary with `S` bits of classical advice.
pub struct ClassicalAdversary {
    advice_bits: u32,
    advice_fn: AdviceFn,
    response: ResponseFn,
}

impl ClassicalAdversary {
    /// Advice values are masked to `advice_bits` bits.
    pub fn new(
        advice_bits: u32,
        advice_fn: impl Fn(&OracleTable) -> u64 + Send + Sync + 'static,
        response: impl Fn(u64, usize) -> usize + Send + Sync + 'static,
    ) -> Self {
        Self { advice_bits, advice_fn: Box::new(advice_fn), response: Box::new(response) }
    }

    /// Ignores the oracle: an `S = 0` uniform adversary.
    pub fn uniform(response: impl Fn(usize) -> usize + Send + Sync + 'static) -> Self {
        Self::new(0, |_| 0, move |_, ch| response(ch))
    }

    pub fn advice_bits(&self) -> u32 {
        self.advice_bits
    }

    pub fn advice(&self, h: &OracleTable) -> u64 {
        let mask = if self.advice_bits >= 64 { u64::MAX } else { (1u64 << self.advice_bits) - 1 };
        (self.advice_fn)(h) & mask
    }

    pub fn respond(&self, advice: u64, challenge: usize) -> usize {
        (self.response)(advice, challenge)
    }
}

/// `Verify(r, response(advice(H), Samp(r)))`.
pub fn classical_run(adv: &ClassicalAdversary, game: &Game, h: &OracleTable, coin: usize) -> Outcome {
    let ch = game.samp(h, coin);
    game.verify(h, coin, adv.respond(adv.advice(h), ch))
}

/// Exact expected win probability over the ensemble and all coins.
pub fn classical_value(adv: &ClassicalAdversary, game: &Game, ensemble: &OracleEnsemble) -> f64 {
    let coins = game.coin_count();
    ensemble
        .iter()
        .map(|(h, w)| {
            let wins = (0..coins).filter(|&r| classical_run(adv, game, h, r).is_win()).count();
            w * wins as f64 / coins as f64
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{owf_game, yz_game, YzCode};
    use crate::oracle::enumerate_oracles;

    #[test]
    fn always_zero_owf() {
        let g = owf_game(2, 2).unwrap();
        let v = classical_value(&ClassicalAdversary::uniform(|_| 0), &g, &enumerate_oracles(2, 2).unwrap());
        assert!((v - 0.75).abs() < 1e-12);
    }

    #[test]
    fn yz_one_bit_advice_toy() {
        // n = 1, C = Σ = {0,1}; advice = H(0,0); answer 0 if advice == y else 1.
        // Exhaustive over 4 oracles × 2 challenges: the two constant oracles lose one
        // challenge each, the two balanced ones win both, so the value is 3/4.
        let code = YzCode::full(1, 2).unwrap();
        let g = yz_game(code);
        let adv = ClassicalAdversary::new(1, |h| h.entries()[0] as u64, |a, y| usize::from(a != y as u64));
        let v = classical_value(&adv, &g, &enumerate_oracles(2, 2).unwrap());
        assert!((v - 0.75).abs() < 1e-12);
    }

    #[test]
    fn ignoring_advice_is_uniform() {
        let g = owf_game(3, 2).unwrap();
        let ens = enumerate_oracles(3, 2).unwrap();
        let with = ClassicalAdversary::new(2, |h| h.entries()[1] as u64, |_, ch| ch % 3);
        let without = ClassicalAdversary::uniform(|ch| ch % 3);
        assert_eq!(classical_value(&with, &g, &ens), classical_value(&without, &g, &ens));
    }
}

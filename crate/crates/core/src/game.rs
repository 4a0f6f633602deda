//! Security games `G = (Samp, Verify)` over a random oracle.
//!
//! Coins, challenges and answers are all encoded as indices into finite
//! spaces so strategies and projectors can be keyed on plain integers:
//!
//! | game   | coin                      | challenge            | answer              |
//! |--------|---------------------------|----------------------|---------------------|
//! | OWF    | `x ∈ [N]`                 | `H(x) ∈ [M]`         | `x' ∈ [N]`          |
//! | PRG    | `b·N·M + x·M + y`         | `H(x)` or `y`        | `b' ∈ {0,1}`        |
//! | salted | `s·|R| + r`               | `s·|Ch| + ch`        | inner answer        |
//! | YZ     | `y ∈ {0,1}^n`, MSB = y₀   | `y`                  | `Σ^n`, MSB = c₀     |

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{CountingOracle, OracleAccess, SaltSlice};

/// Outcome of `Verify`. The bit convention is `0` for a win.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Win,
    Lose,
}

impl Outcome {
    pub fn bit(self) -> u8 {
        match self {
            Outcome::Win => 0,
            Outcome::Lose => 1,
        }
    }

    pub fn is_win(self) -> bool {
        self == Outcome::Win
    }

    fn from_win(win: bool) -> Self {
        if win {
            Outcome::Win
        } else {
            Outcome::Lose
        }
    }
}

/// An error-correcting code `C ⊆ Σ^n` for the YZ game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCode", into = "RawCode")]
pub struct YzCode {
    n: usize,
    sigma: usize,
    codewords: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashSet<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawCode {
    n: usize,
    sigma: usize,
    codewords: Vec<Vec<usize>>,
}

impl TryFrom<RawCode> for YzCode {
    type Error = Error;
    fn try_from(raw: RawCode) -> Result<Self> {
        YzCode::new(raw.n, raw.sigma, raw.codewords)
    }
}

impl From<YzCode> for RawCode {
    fn from(c: YzCode) -> Self {
        RawCode { n: c.n, sigma: c.sigma, codewords: c.codewords }
    }
}

impl YzCode {
    pub fn new(n: usize, sigma: usize, codewords: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || sigma == 0 {
            return Err(Error::InvalidCode("n and |Σ| must be positive".into()));
        }
        if n >= 63 {
            return Err(Error::InvalidCode("n must be below 63 to encode challenges".into()));
        }
        let mut index = HashSet::new();
        for c in &codewords {
            if c.len() != n {
                return Err(Error::InvalidCode(format!("codeword {c:?} does not have length {n}")));
            }
            if c.iter().any(|&s| s >= sigma) {
                return Err(Error::InvalidCode(format!("codeword {c:?} leaves the alphabet")));
            }
            if !index.insert(c.clone()) {
                return Err(Error::InvalidCode(format!("duplicate codeword {c:?}")));
            }
        }
        Ok(Self { n, sigma, codewords, index })
    }

    /// The full space `Σ^n`.
    pub fn full(n: usize, sigma: usize) -> Result<Self> {
        let total = sigma
            .checked_pow(n as u32)
            .ok_or_else(|| Error::InvalidCode("Σ^n overflows".into()))?;
        let words = (0..total).map(|i| decode_word(i, n, sigma)).collect();
        Self::new(n, sigma, words)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    pub fn contains(&self, word: &[usize]) -> bool {
        self.index.contains(word)
    }

    /// Index of the oracle point `(i, c)`.
    pub fn point(&self, i: usize, c: usize) -> usize {
        i * self.sigma + c
    }

    pub fn encode_word(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &c| acc * self.sigma + c)
    }

    pub fn decode_word(&self, index: usize) -> Vec<usize> {
        decode_word(index, self.n, self.sigma)
    }
}

fn decode_word(mut index: usize, n: usize, sigma: usize) -> Vec<usize> {
    let mut w = vec![0; n];
    for slot in w.iter_mut().rev() {
        *slot = index % sigma;
        index /= sigma;
    }
    w
}

/// `y ∈ {0,1}^n` with `y₀` as the most significant bit.
pub fn yz_bit(y: usize, n: usize, i: usize) -> usize {
    (y >> (n - 1 - i)) & 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Game {
    /// Function inversion: find any preimage of `H(x)`.
    Owf { n: usize, m: usize },
    /// Distinguish `H(x)` from a uniform `y`.
    Prg { n: usize, m: usize },
    /// Every run bound to a uniform salt `s` and the slice `H(s, ·)`.
    Salted { inner: Box<Game>, salts: usize },
    /// Invert `f(c) = H(0,c₀)‖…‖H(n−1,c_{n−1})` on codewords.
    Yz(YzCode),
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Game::Owf { .. } => write!(f, "owf"),
            Game::Prg { .. } => write!(f, "prg"),
            Game::Salted { inner, salts } => write!(f, "salted:{inner}:{salts}"),
            Game::Yz(code) => write!(f, "yz(n={},sigma={},|C|={})", code.n, code.sigma, code.codewords.len()),
        }
    }
}

pub fn owf_game(n: usize, m: usize) -> Result<Game> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("OWF needs N, M ≥ 1".into()));
    }
    Ok(Game::Owf { n, m })
}

pub fn prg_game(n: usize, m: usize) -> Result<Game> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("PRG needs N, M ≥ 1".into()));
    }
    Ok(Game::Prg { n, m })
}

pub fn salt_game(inner: Game, salts: usize) -> Result<Game> {
    if salts == 0 {
        return Err(Error::InvalidParameter("salt space must be non-empty".into()));
    }
    Ok(Game::Salted { inner: Box::new(inner), salts })
}

pub fn yz_game(code: YzCode) -> Game {
    Game::Yz(code)
}

impl Game {
    /// Parses `owf`, `prg`, `salted:<inner>:<K>` or `yz:<code-file>`.
    /// `n`, `m` size the (inner) oracle for OWF and PRG.
    pub fn parse_selector(selector: &str, n: usize, m: usize) -> Result<Game> {
        match selector {
            "owf" => owf_game(n, m),
            "prg" => prg_game(n, m),
            s if s.starts_with("salted:") => {
                let rest = &s["salted:".len()..];
                let (inner, k) = rest
                    .rsplit_once(':')
                    .ok_or_else(|| Error::UnknownGame(selector.to_string()))?;
                let k: usize = k.parse().map_err(|_| Error::UnknownGame(selector.to_string()))?;
                salt_game(Game::parse_selector(inner, n, m)?, k)
            }
            s if s.starts_with("yz:") => Ok(yz_game(YzCode::load(&s["yz:".len()..])?)),
            _ => Err(Error::UnknownGame(selector.to_string())),
        }
    }

    /// Domain size of the oracle the game is played against.
    pub fn oracle_domain(&self) -> usize {
        match self {
            Game::Owf { n, .. } | Game::Prg { n, .. } => *n,
            Game::Salted { inner, salts } => salts * inner.oracle_domain(),
            Game::Yz(code) => code.n * code.sigma,
        }
    }

    pub fn oracle_range(&self) -> usize {
        match self {
            Game::Owf { m, .. } | Game::Prg { m, .. } => *m,
            Game::Salted { inner, .. } => inner.oracle_range(),
            Game::Yz(_) => 2,
        }
    }

    pub fn coin_count(&self) -> usize {
        match self {
            Game::Owf { n, .. } => *n,
            Game::Prg { n, m } => 2 * n * m,
            Game::Salted { inner, salts } => salts * inner.coin_count(),
            Game::Yz(code) => 1 << code.n,
        }
    }

    pub fn challenge_count(&self) -> usize {
        match self {
            Game::Owf { m, .. } | Game::Prg { m, .. } => *m,
            Game::Salted { inner, salts } => salts * inner.challenge_count(),
            Game::Yz(code) => 1 << code.n,
        }
    }

    pub fn answer_count(&self) -> usize {
        match self {
            Game::Owf { n, .. } => *n,
            Game::Prg { .. } => 2,
            Game::Salted { inner, .. } => inner.answer_count(),
            Game::Yz(code) => code.sigma.pow(code.n as u32),
        }
    }

    pub fn t_samp(&self) -> usize {
        match self {
            Game::Owf { .. } | Game::Prg { .. } => 1,
            Game::Salted { inner, .. } => inner.t_samp(),
            Game::Yz(_) => 0,
        }
    }

    /// OWF compares `H(x')` with `H(x)`, so it is charged two queries.
    pub fn t_verify(&self) -> usize {
        match self {
            Game::Owf { .. } => 2,
            Game::Prg { .. } => 0,
            Game::Salted { inner, .. } => inner.t_verify(),
            Game::Yz(code) => code.n,
        }
    }

    /// Whether the answer is a single bit guess (PRG-like decision games).
    pub fn is_decision(&self) -> bool {
        match self {
            Game::Prg { .. } => true,
            Game::Salted { inner, .. } => inner.is_decision(),
            _ => false,
        }
    }

    /// `(b, x, y)` for a PRG coin.
    pub fn prg_coin(n: usize, m: usize, coin: usize) -> (usize, usize, usize) {
        (coin / (n * m), (coin / m) % n, coin % m)
    }

    pub fn samp(&self, h: &dyn OracleAccess, coin: usize) -> usize {
        match self {
            Game::Owf { .. } => h.query(coin),
            Game::Prg { n, m } => {
                let (b, x, y) = Self::prg_coin(*n, *m, coin);
                if b == 0 {
                    h.query(x)
                } else {
                    y
                }
            }
            Game::Salted { inner, .. } => {
                let (s, r) = (coin / inner.coin_count(), coin % inner.coin_count());
                let view = SaltSlice { composite: h, salt: s, slice_domain: inner.oracle_domain() };
                s * inner.challenge_count() + inner.samp(&view, r)
            }
            Game::Yz(_) => coin,
        }
    }

    pub fn verify(&self, h: &dyn OracleAccess, coin: usize, answer: usize) -> Outcome {
        match self {
            Game::Owf { .. } => Outcome::from_win(h.query(answer) == h.query(coin)),
            Game::Prg { n, m } => Outcome::from_win(Self::prg_coin(*n, *m, coin).0 == answer),
            Game::Salted { inner, .. } => {
                let (s, r) = (coin / inner.coin_count(), coin % inner.coin_count());
                let view = SaltSlice { composite: h, salt: s, slice_domain: inner.oracle_domain() };
                inner.verify(&view, r, answer)
            }
            Game::Yz(code) => {
                let word = code.decode_word(answer);
                if !code.contains(&word) {
                    return Outcome::Lose;
                }
                let win = word
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| h.query(code.point(i, c)) == yz_bit(coin, code.n, i));
                Outcome::from_win(win)
            }
        }
    }

    pub(crate) fn check_oracle(&self, h: &dyn OracleAccess) -> Result<()> {
        if h.domain_size() != self.oracle_domain() || h.range_size() != self.oracle_range() {
            return Err(Error::DimensionMismatch(format!(
                "game {self} expects an oracle [{}]→[{}], got [{}]→[{}]",
                self.oracle_domain(),
                self.oracle_range(),
                h.domain_size(),
                h.range_size()
            )));
        }
        Ok(())
    }

    /// `Verify^H(r, ans)` after range checks.
    pub fn evaluate(&self, h: &dyn OracleAccess, coin: usize, answer: usize) -> Result<Outcome> {
        Ok(self.evaluate_counted(h, coin, answer)?.outcome)
    }

    /// Plays one full `(Samp, Verify)` round and reports the instrumented query counts.
    pub fn evaluate_counted(&self, h: &dyn OracleAccess, coin: usize, answer: usize) -> Result<Evaluation> {
        self.check_oracle(h)?;
        if coin >= self.coin_count() {
            return Err(Error::CoinOutOfRange { coin, coins: self.coin_count() });
        }
        if answer >= self.answer_count() {
            return Err(Error::AnswerOutOfRange { answer, answers: self.answer_count() });
        }
        let counter = CountingOracle::new(h);
        let challenge = self.samp(&counter, coin);
        let samp_queries = counter.count();
        counter.reset();
        let outcome = self.verify(&counter, coin, answer);
        let verify_queries = counter.count();
        Ok(Evaluation { challenge, outcome, samp_queries, verify_queries })
    }

    /// Exact win probability of a deterministic `challenge ↦ answer` map, averaged over coins.
    pub fn map_value(&self, h: &dyn OracleAccess, response: &[usize]) -> f64 {
        let coins = self.coin_count();
        let wins = (0..coins)
            .filter(|&r| self.verify(h, r, response[self.samp(h, r)]).is_win())
            .count();
        wins as f64 / coins as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub challenge: usize,
    pub outcome: Outcome,
    pub samp_queries: usize,
    pub verify_queries: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_oracles, OracleTable};

    fn table(m: usize, e: &[usize]) -> OracleTable {
        OracleTable::new(m, e.to_vec()).unwrap()
    }

    #[test]
    fn owf_examples() {
        let g = owf_game(2, 2).unwrap();
        let h = table(2, &[1, 0]);
        assert_eq!(g.samp(&h, 0), 1);
        assert_eq!(g.evaluate(&h, 0, 0).unwrap(), Outcome::Win);
        assert_eq!(g.evaluate(&h, 0, 1).unwrap(), Outcome::Lose);
        let c = table(2, &[0, 0]);
        for r in 0..2 {
            for a in 0..2 {
                assert!(g.evaluate(&c, r, a).unwrap().is_win());
            }
        }
    }

    #[test]
    fn owf_matches_brute_force_comparison() {
        for n in 1..=3 {
            let g = owf_game(n, n).unwrap();
            for h in enumerate_oracles(n, n).unwrap().tables() {
                for r in 0..n {
                    for a in 0..n {
                        let direct = h.entries()[a] == h.entries()[r];
                        assert_eq!(g.evaluate(h, r, a).unwrap().is_win(), direct);
                    }
                }
            }
        }
    }

    #[test]
    fn prg_examples() {
        let g = prg_game(2, 4).unwrap();
        let h = table(4, &[2, 1]);
        // b = 1, x = 0, y = 3
        let coin = 8 + 3;
        assert_eq!(g.samp(&h, coin), 3);
        assert!(g.evaluate(&h, coin, 1).unwrap().is_win());
        assert!(!g.evaluate(&h, coin, 0).unwrap().is_win());
        // b = 0, x = 1 → H(1)
        assert_eq!(g.samp(&h, 4 + 1), 1);
        let wins = (0..g.coin_count()).filter(|&r| g.verify(&h, r, 0).is_win()).count();
        assert_eq!(wins * 2, g.coin_count());
    }

    #[test]
    fn query_budgets_hold_exhaustively() {
        let code = YzCode::new(2, 2, vec![vec![0, 1], vec![1, 1]]).unwrap();
        let games = [
            owf_game(2, 3).unwrap(),
            prg_game(2, 2).unwrap(),
            salt_game(owf_game(2, 2).unwrap(), 2).unwrap(),
            yz_game(code),
        ];
        for g in &games {
            let ens = enumerate_oracles(g.oracle_domain(), g.oracle_range()).unwrap();
            for h in ens.tables() {
                for r in 0..g.coin_count() {
                    for a in 0..g.answer_count() {
                        let e = g.evaluate_counted(h, r, a).unwrap();
                        assert!(e.samp_queries <= g.t_samp(), "{g}");
                        assert!(e.verify_queries <= g.t_verify(), "{g}");
                    }
                }
            }
        }
    }

    #[test]
    fn salted_owf_trivial_adversary_wins_three_quarters() {
        let g = salt_game(owf_game(2, 2).unwrap(), 2).unwrap();
        let ens = enumerate_oracles(4, 2).unwrap();
        assert_eq!(ens.len(), 16);
        let mut total = 0.0;
        for (h, w) in ens.iter() {
            for r in 0..g.coin_count() {
                // challenge carries the salt first
                assert_eq!(g.samp(h, r) / 2, r / 2);
                if g.evaluate(h, r, 0).unwrap().is_win() {
                    total += w / g.coin_count() as f64;
                }
            }
        }
        assert!((total - 0.75).abs() < 1e-12);
    }

    #[test]
    fn one_salt_matches_unsalted() {
        let inner = owf_game(3, 2).unwrap();
        let g = salt_game(inner.clone(), 1).unwrap();
        for h in enumerate_oracles(3, 2).unwrap().tables() {
            for map in [[0, 0], [1, 2], [2, 1]] {
                assert_eq!(g.map_value(h, &map), inner.map_value(h, &map));
            }
        }
    }

    #[test]
    fn yz_examples() {
        let code = YzCode::new(2, 2, vec![vec![0, 0]]).unwrap();
        let g = yz_game(code.clone());
        for h in enumerate_oracles(4, 2).unwrap().tables() {
            let y = h.entries()[code.point(0, 0)] * 2 + h.entries()[code.point(1, 0)];
            for coin in 0..4 {
                assert_eq!(g.evaluate(h, coin, 0).unwrap().is_win(), coin == y);
                // (1,1) is not a codeword
                assert!(!g.evaluate(h, coin, 3).unwrap().is_win());
            }
        }

        let g = yz_game(YzCode::full(1, 2).unwrap());
        let ens = enumerate_oracles(2, 2).unwrap();
        let mut value = 0.0;
        for (h, w) in ens.iter() {
            value += w * g.map_value(h, &[0, 0]);
        }
        assert!((value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coin_and_answer_ranges_checked() {
        let g = owf_game(2, 2).unwrap();
        let h = table(2, &[0, 1]);
        assert!(matches!(g.evaluate(&h, 2, 0), Err(Error::CoinOutOfRange { .. })));
        assert!(matches!(g.evaluate(&h, 0, 5), Err(Error::AnswerOutOfRange { .. })));
        assert!(matches!(g.evaluate(&table(2, &[0, 1, 1]), 0, 0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn selectors_parse() {
        assert_eq!(Game::parse_selector("owf", 2, 3).unwrap(), Game::Owf { n: 2, m: 3 });
        let g = Game::parse_selector("salted:prg:4", 2, 2).unwrap();
        assert_eq!(g.oracle_domain(), 8);
        assert_eq!(g.to_string(), "salted:prg:4");
        assert!(matches!(Game::parse_selector("sha", 1, 1), Err(Error::UnknownGame(_))));
    }

    #[test]
    fn code_validation() {
        assert!(YzCode::new(2, 2, vec![vec![0, 2]]).is_err());
        assert!(YzCode::new(2, 2, vec![vec![0]]).is_err());
        assert!(YzCode::new(2, 2, vec![vec![0, 1], vec![0, 1]]).is_err());
        let c: YzCode = serde_json::from_str(r#"{"n":2,"sigma":3,"codewords":[[0,2],[1,1]]}"#).unwrap();
        assert!(c.contains(&[1, 1]));
        assert_eq!(c.decode_word(c.encode_word(&[0, 2])), vec![0, 2]);
    }
}

//! Classical versus quantum advice at `T = 0`: list recovery and the counting
//! bound for the YZ game, optimal `S`-bit classical advice as max coverage, and
//! the spectral quantum-advice optimum for comparison.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::bfqrom::{binomial, subsets, ClassicalFixing};
use crate::error::{Error, Result};
use crate::game::{Game, YzCode};
use crate::oracle::{OracleEnsemble, DEFAULT_ENUMERATION_CAP};
use crate::spectral::{compressed_operator, game_povm_lean, optimal_nonuniform_value};
use crate::adversary::StrategyCircuit;

/// A code with per-coordinate lists `S_1..S_n` and mismatch fraction `ζ`.
#[derive(Clone, Debug)]
pub struct ListRecoveryInstance {
    code: YzCode,
    lists: Vec<Vec<bool>>,
    zeta: f64,
    ell: usize,
}

impl ListRecoveryInstance {
    pub fn new(code: YzCode, lists: Vec<Vec<usize>>, zeta: f64, ell: usize) -> Result<Self> {
        if lists.len() != code.n() {
            return Err(Error::InvalidParameter(format!("{} lists for a length-{} code", lists.len(), code.n())));
        }
        if !(0.0..=1.0).contains(&zeta) {
            return Err(Error::InvalidParameter(format!("ζ = {zeta} outside [0,1]")));
        }
        let mut masks = Vec::with_capacity(lists.len());
        for (i, list) in lists.iter().enumerate() {
            let mut mask = vec![false; code.sigma()];
            for &c in list {
                if c >= code.sigma() {
                    return Err(Error::InvalidParameter(format!("list {i} has symbol {c} outside Σ")));
                }
                mask[c] = true;
            }
            if mask.iter().filter(|&&b| b).count() > ell {
                return Err(Error::InvalidParameter(format!("list {i} is longer than ℓ = {ell}")));
            }
            masks.push(mask);
        }
        Ok(Self { code, lists: masks, zeta, ell })
    }

    /// Lists are the symbols whose oracle positions a fixing pins down.
    pub fn from_fixing(code: YzCode, fixing: &ClassicalFixing, zeta: f64) -> Result<Self> {
        let mut lists = vec![Vec::new(); code.n()];
        for &(x, _) in fixing.points() {
            let (i, c) = (x / code.sigma(), x % code.sigma());
            if i >= code.n() {
                return Err(Error::InvalidParameter(format!("fixed point {x} outside the code's oracle domain")));
            }
            lists[i].push(c);
        }
        let ell = lists.iter().map(Vec::len).max().unwrap_or(0);
        Self::new(code, lists, zeta, ell)
    }

    pub fn code(&self) -> &YzCode {
        &self.code
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn in_list(&self, i: usize, c: usize) -> bool {
        self.lists[i][c]
    }
}

/// Codewords with `|{i : c_i ∈ S_i}| ≥ (1−ζ)n`.
pub fn good_set(inst: &ListRecoveryInstance) -> (Vec<Vec<usize>>, usize) {
    let n = inst.code.n() as f64;
    let need = (1.0 - inst.zeta) * n;
    let good: Vec<Vec<usize>> = inst
        .code
        .codewords()
        .iter()
        .filter(|w| {
            let hits = w.iter().enumerate().filter(|&(i, &c)| inst.lists[i][c]).count();
            hits as f64 >= need - 1e-12
        })
        .cloned()
        .collect();
    let count = good.len();
    (good, count)
}

/// `min(1, L/2^n + 2^{−ζn})`.
pub fn counting_bound(l_count: usize, n: usize, zeta: f64) -> f64 {
    let n = n as f64;
    (l_count as f64 / n.exp2() + (-zeta * n).exp2()).min(1.0)
}

/// Every `challenge → answer` map of a game.
pub fn all_response_maps(game: &Game, cap: u128) -> Result<Vec<Vec<usize>>> {
    let (ch, a) = (game.challenge_count(), game.answer_count());
    let count = (a as u128).checked_pow(ch as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::CapExceeded { requested: count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut cur = vec![0usize; ch];
    loop {
        out.push(cur.clone());
        let mut i = ch;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < a {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Oracle weights, candidate response maps, and `w[H][map]`.
#[derive(Clone, Debug)]
pub struct CoverageInstance {
    weights: Vec<f64>,
    maps: Vec<Vec<usize>>,
    win: Vec<Vec<f64>>,
}

impl CoverageInstance {
    pub fn new(weights: Vec<f64>, maps: Vec<Vec<usize>>, win: Vec<Vec<f64>>) -> Result<Self> {
        if win.len() != weights.len() || win.iter().any(|row| row.len() != maps.len()) {
            return Err(Error::DimensionMismatch("win matrix does not match weights × maps".into()));
        }
        if win.iter().flatten().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidParameter("win entries must lie in [0,1]".into()));
        }
        Ok(Self { weights, maps, win })
    }

    pub fn from_game(game: &Game, ensemble: &OracleEnsemble, maps: Vec<Vec<usize>>) -> Result<Self> {
        for m in &maps {
            if m.len() != game.challenge_count() || m.iter().any(|&a| a >= game.answer_count()) {
                return Err(Error::InvalidParameter("response map does not fit the game".into()));
            }
        }
        let win = ensemble
            .tables()
            .par_iter()
            .map(|h| maps.iter().map(|m| game.map_value(h, m)).collect())
            .collect();
        Self::new(ensemble.weights().to_vec(), maps, win)
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    /// `Σ_H w_H max_{m ∈ chosen} w[H][m]`.
    pub fn value(&self, chosen: &[usize]) -> f64 {
        self.weights
            .iter()
            .zip(&self.win)
            .map(|(w, row)| w * chosen.iter().map(|&m| row[m]).fold(0.0, f64::max))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverageMethod {
    /// All subsets of `min(2^S, |maps|)` maps; fails past `cap` subsets.
    Exact { cap: u128 },
    Greedy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageResult {
    pub chosen: Vec<usize>,
    pub value: f64,
}

/// Best set of at most `2^S` response maps: each oracle's advice names its best map.
pub fn optimal_classical_advice(cov: &CoverageInstance, s: u32, method: CoverageMethod) -> Result<CoverageResult> {
    let budget = 1usize.checked_shl(s).unwrap_or(usize::MAX).min(cov.maps.len());
    match method {
        CoverageMethod::Exact { cap } => {
            let count = binomial(cov.maps.len(), budget);
            if count > cap {
                return Err(Error::CapExceeded { requested: count, cap });
            }
            let best = subsets(cov.maps.len(), budget)
                .into_par_iter()
                .map(|c| {
                    let v = cov.value(&c);
                    CoverageResult { chosen: c, value: v }
                })
                .reduce_with(|a, b| if b.value > a.value + 1e-15 || (b.value >= a.value - 1e-15 && b.chosen < a.chosen) { b } else { a });
            Ok(best.unwrap_or(CoverageResult { chosen: vec![], value: 0.0 }))
        }
        CoverageMethod::Greedy => {
            let mut chosen: Vec<usize> = Vec::new();
            let mut value = 0.0;
            for _ in 0..budget {
                let mut best: Option<(usize, f64)> = None;
                for m in 0..cov.maps.len() {
                    if chosen.contains(&m) {
                        continue;
                    }
                    chosen.push(m);
                    let v = cov.value(&chosen);
                    chosen.pop();
                    if best.is_none_or(|(_, bv)| v > bv + 1e-15) {
                        best = Some((m, v));
                    }
                }
                let Some((m, v)) = best else { break };
                chosen.push(m);
                value = v;
            }
            Ok(CoverageResult { chosen, value })
        }
    }
}

/// One row of the quantum-versus-classical comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationRow {
    pub s: u32,
    /// Best quantum advice of dimension `2^S` for the fixed strategy.
    pub quantum_value: f64,
    /// Best basis-state advice for the same strategy.
    pub classical_value: f64,
    pub gap: f64,
    /// Best `2^S` response maps with no strategy constraint; may exceed `quantum_value`.
    pub classical_any_map: f64,
    pub any_map_exact: bool,
}

/// Compares the spectral optimum with classical advice at `T = 0`.
pub fn quantum_vs_classical_report(
    game: &Game,
    strat: &StrategyCircuit,
    ensemble: &OracleEnsemble,
    s: u32,
) -> Result<SeparationRow> {
    let layout = strat.layout();
    if strat.query_count() != 0 {
        return Err(Error::InvalidParameter("the separation report is for T = 0 strategies".into()));
    }
    if Some(layout.advice_dim()) != 1usize.checked_shl(s) {
        return Err(Error::DimensionMismatch(format!(
            "advice register has dimension {}, S = {s} needs {}",
            layout.advice_dim(),
            1u128 << s
        )));
    }
    let quantum_value = optimal_nonuniform_value(game, strat, ensemble)?;
    let diag = ensemble
        .tables()
        .par_iter()
        .map(|h| {
            let q = compressed_operator(&game_povm_lean(game, h, strat)?, layout)?;
            Ok((0..q.nrows()).map(|a| q[(a, a)].re).fold(0.0, f64::max))
        })
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let classical_value: f64 = diag.iter().zip(ensemble.weights()).map(|(d, w)| d * w).sum();
    let maps = all_response_maps(game, DEFAULT_ENUMERATION_CAP)?;
    let cov = CoverageInstance::from_game(game, ensemble, maps)?;
    let (any, exact) = match optimal_classical_advice(&cov, s, CoverageMethod::Exact { cap: DEFAULT_ENUMERATION_CAP }) {
        Ok(r) => (r.value, true),
        Err(Error::CapExceeded { .. }) => (optimal_classical_advice(&cov, s, CoverageMethod::Greedy)?.value, false),
        Err(e) => return Err(e),
    };
    Ok(SeparationRow {
        s,
        quantum_value,
        classical_value,
        gap: quantum_value - classical_value,
        classical_any_map: any,
        any_map_exact: exact,
    })
}

/// The counting argument checked on one fixing of a YZ oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct FixingCheck {
    /// `(1/2^n) Σ_y max_c Pr_{H | fixing}[f_H(c) = y]`, exhaustive over consistent oracles.
    pub optimal_value: f64,
    pub good_count: usize,
    pub bound: f64,
}

impl FixingCheck {
    pub fn holds(&self) -> bool {
        self.optimal_value <= self.bound + 1e-12
    }
}

/// Best `T = 0` response to a YZ challenge after conditioning on `fixing`, against the counting bound.
pub fn yz_fixing_check(code: &YzCode, fixing: &ClassicalFixing, zeta: f64, cap: u128) -> Result<FixingCheck> {
    let game = Game::Yz(code.clone());
    let all = OracleEnsemble::exhaustive(game.oracle_domain(), 2, cap)?;
    let mut accepted = Vec::new();
    for h in all.tables() {
        if fixing.accepts(h)? {
            accepted.push(h);
        }
    }
    if accepted.is_empty() {
        return Err(Error::NeverAccepts);
    }
    let coins = game.coin_count();
    let mut total = 0.0;
    for y in 0..coins {
        let best = (0..game.answer_count())
            .map(|a| accepted.iter().filter(|h| game.verify(**h, y, a).is_win()).count())
            .max()
            .unwrap_or(0);
        total += best as f64 / accepted.len() as f64;
    }
    let inst = ListRecoveryInstance::from_fixing(code.clone(), fixing, zeta)?;
    let (_, good_count) = good_set(&inst);
    Ok(FixingCheck { optimal_value: total / coins as f64, good_count, bound: counting_bound(good_count, code.n(), zeta) })
}

/// Writes `S,quantum_value,classical_value,gap,classical_any_map` rows.
pub fn write_separation_csv<W: Write>(out: W, rows: &[SeparationRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["S", "quantum_value", "classical_value", "gap", "classical_any_map"])?;
    for r in rows {
        w.write_record([
            r.s.to_string(),
            format!("{:.12}", r.quantum_value),
            format!("{:.12}", r.classical_value),
            format!("{:.12}", r.gap),
            format!("{:.12}", r.classical_any_map),
        ])?;
    }
    w.flush()?;
    Ok(())
}

//! The alternating-measurement game on `R ⊗ A`.
//!
//! Starting from `|1_R⟩ ⊗ ψ`, odd rounds measure the controlled projection
//! `CP = {CP_0, CP_1}` with `CP_0 = Σ_r |r⟩⟨r| ⊗ P_r` and even rounds measure
//! `IsUniform = {|1_R⟩⟨1_R| ⊗ I, rest}`. The game is won when every outcome is 0,
//! which happens with probability `Σ_i |α_i|² p_i^k`.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{prepare_start_state, AdviceFamily, StrategyCircuit};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::linalg::{add_assign, apply_matrix, distance, inner, norm, norm_sqr, normalized, scaled, StateVector, C64, ZERO};
use crate::oracle::{OracleEnsemble, OracleTable};
use crate::spectral::{GamePovm, SpectralData, WeightedSpectrum};

/// Largest `k` accepted in exact mode.
pub const MAX_EXACT_ROUNDS: usize = 64;
/// Denominators below this end the conditional sequence.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

/// A (possibly sub-normalized) vector on `R ⊗ A`; index `r·D + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    coins: usize,
    dim: usize,
    amps: StateVector,
}

impl JointState {
    pub fn new(coins: usize, dim: usize, amps: StateVector) -> Result<Self> {
        if amps.len() != coins * dim {
            return Err(Error::DimensionMismatch(format!(
                "joint vector has length {}, expected {coins}·{dim}",
                amps.len()
            )));
        }
        Ok(Self { coins, dim, amps })
    }

    /// `|1_R⟩ ⊗ φ` with `|1_R⟩ = |R|^{-1/2} Σ_r |r⟩`.
    pub fn uniform_product(coins: usize, phi: &[C64]) -> Self {
        let s = C64::new(1.0 / (coins as f64).sqrt(), 0.0);
        let mut amps = Vec::with_capacity(coins * phi.len());
        for _ in 0..coins {
            amps.extend(phi.iter().map(|a| a * s));
        }
        Self { coins, dim: phi.len(), amps }
    }

    pub fn coins(&self) -> usize {
        self.coins
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn block(&self, r: usize) -> &[C64] {
        &self.amps[r * self.dim..(r + 1) * self.dim]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn normalized(&self) -> Option<Self> {
        normalized(&self.amps).map(|amps| Self { amps, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { amps: crate::linalg::sub(&self.amps, &other.amps), ..*self }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.coins != other.coins || self.dim != other.dim {
            return Err(Error::DimensionMismatch("joint states differ in shape".into()));
        }
        Ok(())
    }
}

/// Which outcome of a two-outcome projective measurement to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Zero,
    One,
}

impl Branch {
    pub fn bit(self) -> u8 {
        match self {
            Branch::Zero => 0,
            Branch::One => 1,
        }
    }
}

/// Oracle calls made by one coherent `CP` application.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CpCost {
    /// Calls through `U` and `U†`, maximized over coin blocks.
    pub strategy_calls: usize,
    pub samp_calls: usize,
    pub verify_calls: usize,
}

impl CpCost {
    pub fn total(&self) -> usize {
        self.strategy_calls + self.samp_calls + self.verify_calls
    }
}

/// `CP_b` applied coin-block-wise: run `U`, keep or drop winning answers, run `U†`.
pub fn cp_project(
    game: &Game,
    h: &OracleTable,
    strat: &StrategyCircuit,
    joint: &JointState,
    branch: Branch,
) -> Result<JointState> {
    Ok(cp_project_counted(game, h, strat, joint, branch)?.0)
}

pub fn cp_project_counted(
    game: &Game,
    h: &OracleTable,
    strat: &StrategyCircuit,
    joint: &JointState,
    branch: Branch,
) -> Result<(JointState, CpCost)> {
    let layout = strat.layout();
    layout.check_against(game)?;
    if joint.coins != game.coin_count() || joint.dim != layout.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "joint state is {}×{}, game and layout need {}×{}",
            joint.coins,
            joint.dim,
            game.coin_count(),
            layout.total_dim()
        )));
    }
    let answer_of: Vec<usize> = (0..joint.dim).map(|i| layout.answer_of(i)).collect();
    let mut amps = Vec::with_capacity(joint.amps.len());
    let mut calls = 0;
    for r in 0..joint.coins {
        let block = joint.block(r);
        let ch = game.samp(h, r);
        let wins: Vec<bool> = (0..game.answer_count()).map(|a| game.verify(h, r, a).is_win()).collect();
        let (mut out, c1) = strat.apply_counted(ch, h, block, false)?;
        for (amp, a) in out.iter_mut().zip(&answer_of) {
            if !wins[*a] {
                *amp = ZERO;
            }
        }
        let (back, c2) = strat.apply_counted(ch, h, &out, true)?;
        calls = calls.max(c1 + c2);
        match branch {
            Branch::Zero => amps.extend(back),
            Branch::One => amps.extend(crate::linalg::sub(block, &back)),
        }
    }
    let cost = CpCost { strategy_calls: calls, samp_calls: game.t_samp(), verify_calls: game.t_verify() };
    Ok((JointState { amps, ..*joint }, cost))
}

/// `IsUniform_b`: project the coin register onto `|1_R⟩` (branch 0) or its complement.
pub fn isuniform_project(joint: &JointState, branch: Branch) -> JointState {
    let mut mean = vec![ZERO; joint.dim];
    for r in 0..joint.coins {
        add_assign(&mut mean, joint.block(r));
    }
    let mean = scaled(&mean, C64::new(1.0 / joint.coins as f64, 0.0));
    let mut amps = Vec::with_capacity(joint.amps.len());
    for r in 0..joint.coins {
        match branch {
            Branch::Zero => amps.extend_from_slice(&mean),
            Branch::One => amps.extend(crate::linalg::sub(joint.block(r), &mean)),
        }
    }
    JointState { amps, ..*joint }
}

/// Round `i` (1-based) of the game: `CP` when odd, `IsUniform` when even.
pub fn round_projection(
    game: &Game,
    h: &OracleTable,
    strat: &StrategyCircuit,
    joint: &JointState,
    round: usize,
    branch: Branch,
) -> Result<JointState> {
    if round % 2 == 1 {
        cp_project(game, h, strat, joint, branch)
    } else {
        Ok(isuniform_project(joint, branch))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AltMode {
    /// Sub-normalized projection onto all-zero outcomes.
    Exact,
    /// Born-rule sampling of every outcome, `samples` independent plays.
    Trajectory { samples: usize, seed: u64 },
}

/// One play (trajectory mode) or the all-zeros branch (exact mode) for one oracle.
#[derive(Clone, Debug)]
pub struct AltMeasTranscript {
    pub oracle_index: usize,
    /// Ensemble weight times mixture-branch weight.
    pub weight: f64,
    pub outcomes: Vec<u8>,
    pub win_probability: Option<f64>,
    pub realized_win: Option<bool>,
    /// Exact mode only: the sub-normalized state after `k` zero outcomes.
    pub post_state: Option<JointState>,
}

#[derive(Clone, Debug)]
pub struct AltMeasRun {
    pub k: usize,
    pub mode: AltMode,
    pub transcripts: Vec<AltMeasTranscript>,
    /// Exact value, or the empirical all-zeros frequency.
    pub value: f64,
    /// Binomial standard error in trajectory mode.
    pub stderr: Option<f64>,
}

/// All-zero-outcome state after `k` rounds, starting from `|1_R⟩ ⊗ ψ`.
pub fn exact_post_state(
    game: &Game,
    h: &OracleTable,
    strat: &StrategyCircuit,
    psi: &[C64],
    k: usize,
) -> Result<JointState> {
    let mut joint = JointState::uniform_product(game.coin_count(), psi);
    for round in 1..=k {
        joint = round_projection(game, h, strat, &joint, round, Branch::Zero)?;
    }
    Ok(joint)
}

fn trajectory<R: Rng + ?Sized>(
    game: &Game,
    h: &OracleTable,
    strat: &StrategyCircuit,
    psi: &[C64],
    k: usize,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let mut joint = JointState::uniform_product(game.coin_count(), psi);
    let mut outcomes = Vec::with_capacity(k);
    for round in 1..=k {
        let zero = round_projection(game, h, strat, &joint, round, Branch::Zero)?;
        let p0 = zero.norm_sqr() / joint.norm_sqr();
        let next = if rng.random::<f64>() < p0 {
            outcomes.push(0);
            zero.normalized()
        } else {
            outcomes.push(1);
            joint.sub(&zero).normalized()
        };
        joint = next.ok_or_else(|| Error::InvalidParameter("measurement branch with zero norm".into()))?;
    }
    Ok(outcomes)
}

struct Start {
    oracle_index: usize,
    weight: f64,
    psi: StateVector,
}

fn starts(adv: &AdviceFamily, strat: &StrategyCircuit, ensemble: &OracleEnsemble) -> Result<Vec<Start>> {
    let mut out = Vec::new();
    for (i, (h, w)) in ensemble.iter().enumerate() {
        let st = prepare_start_state(adv, strat.layout(), h)?;
        for (wb, psi) in st.branches() {
            out.push(Start { oracle_index: i, weight: w * wb, psi: psi.clone() });
        }
    }
    Ok(out)
}

/// Plays the `k`-round game for every oracle in the ensemble.
pub fn run_alternating(
    adv: &AdviceFamily,
    strat: &StrategyCircuit,
    game: &Game,
    ensemble: &OracleEnsemble,
    k: usize,
    mode: AltMode,
) -> Result<AltMeasRun> {
    if k == 0 {
        return Err(Error::InvalidParameter("the alternating game needs k ≥ 1".into()));
    }
    strat.layout().check_against(game)?;
    let starts = starts(adv, strat, ensemble)?;
    let tables = ensemble.tables();
    match mode {
        AltMode::Exact => {
            if k > MAX_EXACT_ROUNDS {
                return Err(Error::InvalidParameter(format!("exact mode supports k ≤ {MAX_EXACT_ROUNDS}")));
            }
            let transcripts = starts
                .par_iter()
                .map(|s| {
                    let post = exact_post_state(game, &tables[s.oracle_index], strat, &s.psi, k)?;
                    Ok(AltMeasTranscript {
                        oracle_index: s.oracle_index,
                        weight: s.weight,
                        outcomes: vec![0; k],
                        win_probability: Some(post.norm_sqr()),
                        realized_win: None,
                        post_state: Some(post),
                    })
                })
                .collect::<Vec<Result<_>>>()
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let value = transcripts.iter().map(|t| t.weight * t.win_probability.unwrap_or(0.0)).sum();
            Ok(AltMeasRun { k, mode, transcripts, value, stderr: None })
        }
        AltMode::Trajectory { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("trajectory mode needs at least one sample".into()));
            }
            let pick = WeightedIndex::new(starts.iter().map(|s| s.weight))
                .map_err(|e| Error::InvalidParameter(format!("start weights: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut transcripts = Vec::with_capacity(samples);
            let mut wins = 0usize;
            for _ in 0..samples {
                let s = &starts[pick.sample(&mut rng)];
                let outcomes = trajectory(game, &tables[s.oracle_index], strat, &s.psi, k, &mut rng)?;
                let won = outcomes.iter().all(|&b| b == 0);
                wins += won as usize;
                transcripts.push(AltMeasTranscript {
                    oracle_index: s.oracle_index,
                    weight: 1.0 / samples as f64,
                    outcomes,
                    win_probability: None,
                    realized_win: Some(won),
                    post_state: None,
                });
            }
            let value = wins as f64 / samples as f64;
            let stderr = (value * (1.0 - value) / samples as f64).sqrt();
            Ok(AltMeasRun { k, mode, transcripts, value, stderr: Some(stderr) })
        }
    }
}

/// `Σ_H w_H Σ_i |α_i|² p_i^k`.
pub fn closed_form_winprob(spectra: &[WeightedSpectrum], k: u32) -> f64 {
    spectra.iter().map(|s| s.weight * s.data.moment(k)).sum()
}

/// Natural log of [`closed_form_winprob`], accumulated in log space so large `k` does not underflow.
pub fn closed_form_log_winprob(spectra: &[WeightedSpectrum], k: u32) -> f64 {
    let logs: Vec<f64> = spectra
        .iter()
        .flat_map(|s| {
            s.data.spaces().iter().filter(|e| e.overlap > 0.0 && e.eigenvalue > 0.0 && s.weight > 0.0).map(
                move |e| s.weight.ln() + e.overlap.ln() + k as f64 * e.eigenvalue.ln(),
            )
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// `ε^(1), ε^(2), …` until `k_max` or a vanishing denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalSequence {
    pub values: Vec<f64>,
    /// Set when the sequence stopped early because `Σ|α|²p^{t−1}` vanished.
    pub degenerate_tail: bool,
}

/// `ε^(t) = Σ w|α|²p^t / Σ w|α|²p^{t−1}` for `t = 1..=k_max`.
pub fn conditional_probs(spectra: &[WeightedSpectrum], k_max: usize) -> Result<ConditionalSequence> {
    let pairs: Vec<(f64, f64)> = spectra
        .iter()
        .flat_map(|s| s.data.spaces().iter().map(move |e| (s.weight * e.overlap, e.eigenvalue)))
        .collect();
    conditional_from_pairs(&pairs, k_max)
}

/// Same as [`conditional_probs`] over bare `(weight, value)` pairs.
pub fn conditional_from_pairs(pairs: &[(f64, f64)], k_max: usize) -> Result<ConditionalSequence> {
    let moment = |t: usize| pairs.iter().map(|(c, p)| c * p.powi(t as i32)).sum::<f64>();
    if moment(1) <= DEGENERATE_DENOMINATOR {
        return Err(Error::ZeroSuccess);
    }
    let mut values = Vec::with_capacity(k_max);
    let mut prev = moment(0);
    for t in 1..=k_max {
        if prev <= DEGENERATE_DENOMINATOR {
            return Ok(ConditionalSequence { values, degenerate_tail: true });
        }
        let next = moment(t);
        values.push(next / prev);
        prev = next;
    }
    Ok(ConditionalSequence { values, degenerate_tail: false })
}

/// `Σ_i p_i^{k/2} v⁰_i` (k even) or `Σ_i p_i^{k/2} w⁰_i` (k odd), each term scaled by `α_i`.
///
/// `data` must come from decomposing `P_H` against `psi`.
pub fn leftover_prediction(
    game: &Game,
    h: &OracleTable,
    strat: &StrategyCircuit,
    data: &SpectralData,
    psi: &[C64],
    k: usize,
) -> Result<JointState> {
    let coins = game.coin_count();
    let mut acc = vec![ZERO; coins * psi.len()];
    for space in data.spaces() {
        let component = space.project(psi);
        let v0 = JointState::uniform_product(coins, &component);
        let term = if k.is_multiple_of(2) {
            scaled(&v0.amps, C64::new(space.eigenvalue.powf(k as f64 / 2.0), 0.0))
        } else {
            // p^{k/2} w⁰ with w⁰ = CP_0 v⁰ / √p
            let w = cp_project(game, h, strat, &v0, Branch::Zero)?;
            scaled(&w.amps, C64::new(space.eigenvalue.powf((k as f64 - 1.0) / 2.0), 0.0))
        };
        add_assign(&mut acc, &term);
    }
    JointState::new(coins, psi.len(), acc)
}

/// `|⟨a|b⟩|²` of the normalized joint states.
pub fn joint_fidelity(a: &JointState, b: &JointState) -> Result<f64> {
    a.same_shape(b)?;
    Ok(crate::linalg::fidelity(&a.amps, &b.amps))
}

/// The two-dimensional invariant subspace of an eigenvector `φ` of `P_H`.
#[derive(Clone, Debug)]
pub struct MwStates {
    pub eigenvalue: f64,
    pub v0: JointState,
    pub w0: JointState,
    /// Undefined when `p = 1`.
    pub w1: Option<JointState>,
    pub v1: Option<JointState>,
    pub residuals: MwResiduals,
}

/// Deviations from the defining identities; all should be ~0.
#[derive(Clone, Debug, Default)]
pub struct MwResiduals {
    pub norms: f64,
    pub cp0_fixes_w0: f64,
    pub cp1_kills_w0: f64,
    pub isuniform_fixes_v0: f64,
    pub cp0_kills_w1: f64,
    pub isuniform_kills_v1: f64,
    pub w0_w1_overlap: f64,
    pub blockwise_matches_povm: f64,
}

impl MwResiduals {
    pub fn max(&self) -> f64 {
        [
            self.norms,
            self.cp0_fixes_w0,
            self.cp1_kills_w0,
            self.isuniform_fixes_v0,
            self.cp0_kills_w1,
            self.isuniform_kills_v1,
            self.w0_w1_overlap,
            self.blockwise_matches_povm,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

const DEGENERATE_P: f64 = 1e-12;

/// Builds `v⁰ = |1_R⟩φ`, `w⁰ = (p|R|)^{-1/2} Σ_r |r⟩ P_r φ` and the complementary
/// `v¹`, `w¹` from `w⁰ = √p v⁰ + √(1−p) v¹` and `v⁰ = √p w⁰ + √(1−p) w¹`, then
/// checks every identity.
pub fn mw_state_family(
    povm: &GamePovm,
    phi: &[C64],
    game: &Game,
    h: &OracleTable,
    strat: &StrategyCircuit,
) -> Result<MwStates> {
    if phi.len() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvector has dimension {}, POVM {}",
            phi.len(),
            povm.dim()
        )));
    }
    if (norm(phi) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("eigenvector has norm {}", norm(phi))));
    }
    let p_phi = apply_matrix(povm.matrix(), phi);
    let p = inner(phi, &p_phi).re;
    if distance(&p_phi, &scaled(phi, C64::new(p, 0.0))) > 1e-8 {
        return Err(Error::InvalidParameter("vector is not an eigenvector of the POVM".into()));
    }
    if p < DEGENERATE_P {
        return Err(Error::DegenerateEigenvalue(p));
    }
    let p = p.min(1.0);
    let coins = game.coin_count();
    let v0 = JointState::uniform_product(coins, phi);
    let cp = cp_project(game, h, strat, &v0, Branch::Zero)?;
    let w0 = JointState { amps: scaled(&cp.amps, C64::new(1.0 / p.sqrt(), 0.0)), ..cp };

    let mut res = MwResiduals::default();
    if let Some(per_coin) = povm.per_coin() {
        let s = C64::new(1.0 / (p * coins as f64).sqrt(), 0.0);
        let mut direct = Vec::with_capacity(coins * phi.len());
        for pr in per_coin {
            direct.extend(scaled(&apply_matrix(pr, phi), s));
        }
        res.blockwise_matches_povm = distance(&direct, &w0.amps);
    }
    let mut norm_err = (norm(&v0.amps) - 1.0).abs().max((norm(&w0.amps) - 1.0).abs());
    res.cp0_fixes_w0 = distance(&cp_project(game, h, strat, &w0, Branch::Zero)?.amps, &w0.amps);
    res.cp1_kills_w0 = norm(&cp_project(game, h, strat, &w0, Branch::One)?.amps);
    res.isuniform_fixes_v0 = distance(&isuniform_project(&v0, Branch::Zero).amps, &v0.amps);

    let (w1, v1) = if p < 1.0 - DEGENERATE_P {
        let (sp, sq) = (C64::new(p.sqrt(), 0.0), C64::new(1.0 / (1.0 - p).sqrt(), 0.0));
        let w1 = scaled(&crate::linalg::sub(&v0.amps, &scaled(&w0.amps, sp)), sq);
        let v1 = scaled(&crate::linalg::sub(&w0.amps, &scaled(&v0.amps, sp)), sq);
        let w1 = JointState { amps: w1, ..v0 };
        let v1 = JointState { amps: v1, ..v0 };
        norm_err = norm_err.max((norm(&w1.amps) - 1.0).abs()).max((norm(&v1.amps) - 1.0).abs());
        res.cp0_kills_w1 = norm(&cp_project(game, h, strat, &w1, Branch::Zero)?.amps);
        res.isuniform_kills_v1 = norm(&isuniform_project(&v1, Branch::Zero).amps);
        res.w0_w1_overlap = inner(&w0.amps, &w1.amps).norm();
        (Some(w1), Some(v1))
    } else {
        (None, None)
    };
    res.norms = norm_err;
    Ok(MwStates { eigenvalue: p, v0, w0, w1, v1, residuals: res })
}

/// Writes `oracle_index,t,epsilon` rows, one conditional sequence per oracle spectrum.
pub fn write_conditional_csv<W: Write>(out: W, spectra: &[WeightedSpectrum], k_max: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["oracle_index", "t", "epsilon"])?;
    for s in spectra {
        let pairs: Vec<(f64, f64)> = s.data.spaces().iter().map(|e| (e.overlap, e.eigenvalue)).collect();
        let seq = match conditional_from_pairs(&pairs, k_max) {
            Ok(seq) => seq,
            Err(Error::ZeroSuccess) => continue,
            Err(e) => return Err(e),
        };
        for (t, eps) in seq.values.iter().enumerate() {
            w.write_record([s.oracle_index.to_string(), (t + 1).to_string(), format!("{eps:.12}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row of a `k` sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub exact_winprob: f64,
    pub trajectory_estimate: Option<f64>,
    pub stderr: Option<f64>,
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "exact_winprob", "trajectory_estimate", "stderr"])?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.12}")).unwrap_or_default();
    for r in rows {
        w.write_record([r.k.to_string(), format!("{:.12}", r.exact_winprob), opt(r.trajectory_estimate), opt(r.stderr)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{ExplicitAdvice, RegisterLayout};
    use crate::game::owf_game;
    use crate::linalg::{basis_state, random_state};
    use crate::oracle::enumerate_oracles;
    use crate::spectral::{decompose, game_povm, oracle_spectra, success_probability};
    use num_rational::Rational64;

    fn table(m: usize, e: &[usize]) -> OracleTable {
        OracleTable::new(m, e.to_vec()).unwrap()
    }

    fn identity2() -> StrategyCircuit {
        StrategyCircuit::identity(RegisterLayout::answer_only(2).unwrap())
    }

    fn random_joint(coins: usize, dim: usize, seed: u64) -> JointState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        JointState::new(coins, dim, random_state(coins * dim, &mut rng)).unwrap()
    }

    #[test]
    fn cp_on_eigenvector() {
        let g = owf_game(2, 2).unwrap();
        let h = table(2, &[1, 0]);
        let joint = JointState::uniform_product(2, &basis_state(2, 0));
        let out = cp_project(&g, &h, &identity2(), &joint, Branch::Zero).unwrap();
        assert!((out.norm_sqr() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cp_is_identity_for_constant_oracle() {
        let g = owf_game(2, 2).unwrap();
        let x = random_joint(2, 2, 1);
        let out = cp_project(&g, &table(2, &[1, 1]), &identity2(), &x, Branch::Zero).unwrap();
        assert!(distance(out.amplitudes(), x.amplitudes()) < 1e-14);
    }

    #[test]
    fn cp_and_isuniform_completeness() {
        let g = owf_game(2, 2).unwrap();
        for seed in 0..10 {
            let x = random_joint(2, 2, seed);
            let a = cp_project(&g, &table(2, &[1, 0]), &identity2(), &x, Branch::Zero).unwrap();
            let b = cp_project(&g, &table(2, &[1, 0]), &identity2(), &x, Branch::One).unwrap();
            assert!((a.norm_sqr() + b.norm_sqr() - x.norm_sqr()).abs() < 1e-10);
            let a = isuniform_project(&x, Branch::Zero);
            let b = isuniform_project(&x, Branch::One);
            assert!((a.norm_sqr() + b.norm_sqr() - x.norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn isuniform_examples() {
        let phi = random_state(3, &mut ChaCha8Rng::seed_from_u64(3));
        let u = JointState::uniform_product(4, &phi);
        assert!(distance(isuniform_project(&u, Branch::Zero).amplitudes(), u.amplitudes()) < 1e-14);
        assert!(isuniform_project(&u, Branch::One).norm_sqr() < 1e-28);
        let mut amps = vec![ZERO; 12];
        amps[2 * 3..3 * 3].copy_from_slice(&phi);
        let basis = JointState::new(4, 3, amps).unwrap();
        assert!((isuniform_project(&basis, Branch::Zero).norm_sqr() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn k1_matches_success_probability() {
        let g = owf_game(2, 2).unwrap();
        let e = enumerate_oracles(2, 2).unwrap();
        let run = run_alternating(&AdviceFamily::Uniform, &identity2(), &g, &e, 1, AltMode::Exact).unwrap();
        let sp = success_probability(&AdviceFamily::Uniform, &identity2(), &g, &e).unwrap();
        assert!((run.value - sp).abs() < 1e-12 && (sp - 0.75).abs() < 1e-12);
    }

    #[test]
    fn k2_matches_spectral_moment() {
        let g = owf_game(2, 2).unwrap();
        let e = enumerate_oracles(2, 2).unwrap();
        let s = identity2();
        let run = run_alternating(&AdviceFamily::Uniform, &s, &g, &e, 2, AltMode::Exact).unwrap();
        let spectra = oracle_spectra(&AdviceFamily::Uniform, &s, &g, &e).unwrap();
        assert!((run.value - closed_form_winprob(&spectra, 2)).abs() < 1e-9);
        // two constant oracles contribute 1, the two balanced ones 1/4 each
        assert!((run.value - 0.625).abs() < 1e-12);
    }

    #[test]
    fn eigenvector_advice_gives_pk() {
        // single oracle, P_H with an eigenvalue 3/4: OWF N=4, M=2, H = [0,0,0,1]
        // under the identity strategy with answer 0 has P_H = diag(3/4, 3/4, 3/4, 1/4).
        let g = owf_game(4, 2).unwrap();
        let h = table(2, &[0, 0, 0, 1]);
        let s = StrategyCircuit::identity(RegisterLayout::answer_only(4).unwrap());
        let e = OracleEnsemble::single(h.clone());
        let p = game_povm(&g, &h, &s).unwrap();
        assert!((p.matrix()[(0, 0)].re - 0.75).abs() < 1e-12);
        let run = run_alternating(&AdviceFamily::Uniform, &s, &g, &e, 2, AltMode::Exact).unwrap();
        assert!((run.value - 9.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_edge_cases() {
        let single = vec![WeightedSpectrum { oracle_index: 0, weight: 1.0, data: SpectralData::from_pairs(&[(0.3, 1.0)]) }];
        assert_eq!(closed_form_winprob(&single, 0), 1.0);
        assert!((closed_form_winprob(&single, 5) - 0.3f64.powi(5)).abs() < 1e-15);
        assert!((closed_form_log_winprob(&single, 5) - 5.0 * 0.3f64.ln()).abs() < 1e-12);
        assert!(closed_form_log_winprob(&single, 2000).is_finite());
    }

    #[test]
    fn conditional_example_exact() {
        let seq = conditional_from_pairs(&[(0.5, 0.25), (0.5, 0.75)], 3).unwrap();
        // ε^(t) = (1 + 3^t) / (4 (1 + 3^{t-1})) in exact arithmetic
        for (t, v) in seq.values.iter().enumerate() {
            let t = t as u32 + 1;
            let q = Rational64::new(1 + 3i64.pow(t), 4 * (1 + 3i64.pow(t - 1)));
            assert!((v - *q.numer() as f64 / *q.denom() as f64).abs() < 1e-14);
        }
        assert!((seq.values[0] - 0.5).abs() < 1e-15);
        assert!((seq.values[1] - 0.625).abs() < 1e-15);
        assert!((seq.values[2] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn conditional_degenerate_cases() {
        let seq = conditional_from_pairs(&[(1.0, 0.4)], 6).unwrap();
        assert!(seq.values.iter().all(|v| (v - 0.4).abs() < 1e-15));
        assert!(matches!(conditional_from_pairs(&[(1.0, 0.0)], 3), Err(Error::ZeroSuccess)));
        let tiny = conditional_from_pairs(&[(1.0, 1e-5)], 6).unwrap();
        assert!(tiny.degenerate_tail && tiny.values.len() < 6);
    }

    #[test]
    fn conditional_telescopes() {
        let pairs = [(0.2, 0.1), (0.5, 0.6), (0.3, 0.95)];
        let spectra = vec![WeightedSpectrum {
            oracle_index: 0,
            weight: 1.0,
            data: SpectralData::from_pairs(&pairs.iter().map(|&(c, p)| (p, c)).collect::<Vec<_>>()),
        }];
        let seq = conditional_probs(&spectra, 8).unwrap();
        let mut prod = 1.0;
        for (t, v) in seq.values.iter().enumerate() {
            prod *= v;
            assert!((prod - closed_form_winprob(&spectra, t as u32 + 1)).abs() < 1e-10);
        }
    }

    #[test]
    fn leftover_law_on_owf() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = owf_game(2, 2).unwrap();
        let s = identity2();
        let h = table(2, &[1, 0]);
        let psi = random_state(2, &mut rng);
        let data = decompose(&game_povm(&g, &h, &s).unwrap(), &psi).unwrap();
        for k in 1..=5 {
            let post = exact_post_state(&g, &h, &s, &psi, k).unwrap();
            let pred = leftover_prediction(&g, &h, &s, &data, &psi, k).unwrap();
            assert!(distance(post.amplitudes(), pred.amplitudes()) < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn mw_family_half() {
        let g = owf_game(2, 2).unwrap();
        let h = table(2, &[1, 0]);
        let s = identity2();
        let p = game_povm(&g, &h, &s).unwrap();
        let mw = mw_state_family(&p, &basis_state(2, 0), &g, &h, &s).unwrap();
        assert!((mw.eigenvalue - 0.5).abs() < 1e-12);
        assert!(mw.residuals.max() < 1e-9, "{:?}", mw.residuals);
        assert!(mw.w1.is_some());
    }

    #[test]
    fn mw_family_p_one() {
        let g = owf_game(2, 2).unwrap();
        let h = table(2, &[0, 0]);
        let s = identity2();
        let p = game_povm(&g, &h, &s).unwrap();
        let mw = mw_state_family(&p, &basis_state(2, 1), &g, &h, &s).unwrap();
        assert!(distance(mw.w0.amplitudes(), mw.v0.amplitudes()) < 1e-14);
        assert!(mw.w1.is_none());
    }

    #[test]
    fn mw_family_rejects_zero_eigenvalue() {
        let g = owf_game(2, 2).unwrap();
        let h = table(2, &[1, 0]);
        let s = identity2();
        let zero = GamePovm::from_matrix(crate::linalg::CMatrix::zeros(2, 2));
        assert!(matches!(mw_state_family(&zero, &basis_state(2, 0), &g, &h, &s), Err(Error::DegenerateEigenvalue(_))));
    }

    #[test]
    fn trajectory_agrees_with_exact() {
        let g = owf_game(2, 2).unwrap();
        let e = enumerate_oracles(2, 2).unwrap();
        let s = identity2();
        let exact = run_alternating(&AdviceFamily::Uniform, &s, &g, &e, 3, AltMode::Exact).unwrap();
        let traj = run_alternating(&AdviceFamily::Uniform, &s, &g, &e, 3, AltMode::Trajectory { samples: 10_000, seed: 9 }).unwrap();
        let sigma = (exact.value * (1.0 - exact.value) / 10_000.0).sqrt();
        assert!((traj.value - exact.value).abs() < 4.0 * sigma);
    }

    #[test]
    fn explicit_advice_runs() {
        let g = owf_game(2, 2).unwrap();
        let e = enumerate_oracles(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let adv = AdviceFamily::Explicit(ExplicitAdvice::from_fn(&e, 2, |_| random_state(2, &mut rng)).unwrap());
        let spectra = oracle_spectra(&adv, &identity2(), &g, &e).unwrap();
        for k in 1..=6 {
            let run = run_alternating(&adv, &identity2(), &g, &e, k, AltMode::Exact).unwrap();
            assert!((run.value - closed_form_winprob(&spectra, k as u32)).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_writers() {
        let spectra = vec![WeightedSpectrum { oracle_index: 3, weight: 1.0, data: SpectralData::from_pairs(&[(0.5, 1.0)]) }];
        let mut buf = Vec::new();
        write_conditional_csv(&mut buf, &spectra, 2).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[SweepRow { k: 1, exact_winprob: 0.5, trajectory_estimate: None, stderr: None }]).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("k,exact_winprob"));
    }
}

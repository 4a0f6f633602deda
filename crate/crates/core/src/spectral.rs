//! Win projectors, the game POVM, its eigendecomposition against a start
//! state, and spectral optimization of bounded advice.
//!
//! For a fixed oracle `H` and strategy `{U_ch}`:
//!
//! * `V_r` is the diagonal projector onto answers that pass `Verify^H(r, ·)`;
//! * `P_r = U_{Samp(r)}† V_r U_{Samp(r)}` is again a projector;
//! * `P_H = (1/|R|) Σ_r P_r` satisfies `0 ⪯ P_H ⪯ I`, and the win probability of
//!   a start state `ψ` is `⟨ψ|P_H|ψ⟩ = Σ_i |α_i|² p_i` over the eigenspaces of `P_H`.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::linalg::SymmetricEigen;
use rayon::prelude::*;

use crate::adversary::{embed, prepare_start_state, AdviceFamily, ExplicitAdvice, RegisterLayout, StrategyCircuit};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::linalg::{apply_matrix, basis_state, norm, norm_sqr, quadratic_form, CMatrix, StateVector, C64, ZERO};
use crate::oracle::{OracleEnsemble, OracleTable};

/// Eigenvalues closer than this are merged into one eigenspace.
pub const EIGEN_GROUP_TOL: f64 = 1e-9;

/// `V_r`: diagonal in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct WinProjector {
    coin: usize,
    mask: Vec<bool>,
}

impl WinProjector {
    pub fn coin(&self) -> usize {
        self.coin
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn rank(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn apply(&self, state: &[C64]) -> StateVector {
        state.iter().zip(&self.mask).map(|(a, &keep)| if keep { *a } else { ZERO }).collect()
    }

    pub fn matrix(&self) -> CMatrix {
        let d = self.mask.len();
        CMatrix::from_fn(d, d, |i, j| if i == j && self.mask[i] { C64::new(1.0, 0.0) } else { ZERO })
    }
}

/// Answer values `a` with `Verify^H(r, a) = win`, lifted to the full register.
pub fn win_projector(game: &Game, h: &OracleTable, coin: usize, layout: &RegisterLayout) -> Result<WinProjector> {
    layout.check_against(game)?;
    game.check_oracle(h)?;
    if coin >= game.coin_count() {
        return Err(Error::CoinOutOfRange { coin, coins: game.coin_count() });
    }
    let wins: Vec<bool> = (0..game.answer_count()).map(|a| game.verify(h, coin, a).is_win()).collect();
    let mask = (0..layout.total_dim()).map(|i| wins[layout.answer_of(i)]).collect();
    Ok(WinProjector { coin, mask })
}

/// `P_H` and, optionally, the per-coin projectors `P_r`.
#[derive(Clone, Debug)]
pub struct GamePovm {
    matrix: CMatrix,
    per_coin: Option<Vec<CMatrix>>,
}

impl GamePovm {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn per_coin(&self) -> Option<&[CMatrix]> {
        self.per_coin.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Wraps an arbitrary Hermitian contraction (for testing the decomposition machinery).
    pub fn from_matrix(matrix: CMatrix) -> Self {
        Self { matrix, per_coin: None }
    }
}

/// Matrix of `U_ch`, column `j` being `U_ch |j⟩`.
pub fn strategy_matrix(strat: &StrategyCircuit, challenge: usize, h: &OracleTable) -> Result<CMatrix> {
    let d = strat.layout().total_dim();
    let mut u = CMatrix::zeros(d, d);
    for j in 0..d {
        let col = strat.apply(challenge, h, &basis_state(d, j))?;
        for (i, a) in col.into_iter().enumerate() {
            u[(i, j)] = a;
        }
    }
    Ok(u)
}

fn conjugated_projector(u: &CMatrix, mask: &[bool]) -> CMatrix {
    let mut masked = u.clone();
    for (i, keep) in mask.iter().enumerate() {
        if !keep {
            masked.row_mut(i).fill(ZERO);
        }
    }
    masked.adjoint() * masked
}

/// Builds `P_H`, retaining every `P_r`.
pub fn game_povm(game: &Game, h: &OracleTable, strat: &StrategyCircuit) -> Result<GamePovm> {
    build_povm(game, h, strat, true)
}

/// Builds `P_H` only, grouping coins that share a challenge and win set.
pub fn game_povm_lean(game: &Game, h: &OracleTable, strat: &StrategyCircuit) -> Result<GamePovm> {
    build_povm(game, h, strat, false)
}

fn build_povm(game: &Game, h: &OracleTable, strat: &StrategyCircuit, keep: bool) -> Result<GamePovm> {
    let layout = strat.layout();
    layout.check_against(game)?;
    game.check_oracle(h)?;
    let d = layout.total_dim();
    let coins = game.coin_count();
    let mut unitaries: HashMap<usize, CMatrix> = HashMap::new();
    let mut groups: HashMap<(usize, Vec<bool>), usize> = HashMap::new();
    let mut per_coin = Vec::new();
    for r in 0..coins {
        let ch = game.samp(h, r);
        if let std::collections::hash_map::Entry::Vacant(e) = unitaries.entry(ch) {
            e.insert(strategy_matrix(strat, ch, h)?);
        }
        let wins: Vec<bool> = (0..game.answer_count()).map(|a| game.verify(h, r, a).is_win()).collect();
        if keep {
            let mask: Vec<bool> = (0..d).map(|i| wins[layout.answer_of(i)]).collect();
            per_coin.push(conjugated_projector(&unitaries[&ch], &mask));
        } else {
            *groups.entry((ch, wins)).or_default() += 1;
        }
    }
    let matrix = if keep {
        let mut sum = CMatrix::zeros(d, d);
        for p in &per_coin {
            sum += p;
        }
        sum / C64::new(coins as f64, 0.0)
    } else {
        let mut sum = CMatrix::zeros(d, d);
        let mut keys: Vec<_> = groups.into_iter().collect();
        keys.sort();
        for ((ch, wins), count) in keys {
            let mask: Vec<bool> = (0..d).map(|i| wins[layout.answer_of(i)]).collect();
            sum += conjugated_projector(&unitaries[&ch], &mask) * C64::new(count as f64, 0.0);
        }
        sum / C64::new(coins as f64, 0.0)
    };
    Ok(GamePovm { matrix, per_coin: keep.then_some(per_coin) })
}

#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub eigenvalue: f64,
    /// Orthonormal columns spanning the eigenspace.
    pub basis: CMatrix,
    /// `‖Π ψ‖²` for the start state `ψ`.
    pub overlap: f64,
}

impl Eigenspace {
    pub fn multiplicity(&self) -> usize {
        self.basis.ncols()
    }

    /// `Π ψ`.
    pub fn project(&self, psi: &[C64]) -> StateVector {
        let coeffs: Vec<C64> = (0..self.basis.ncols())
            .map(|c| self.basis.column(c).iter().zip(psi).map(|(b, x)| b.conj() * x).sum())
            .collect();
        (0..self.basis.nrows())
            .map(|i| coeffs.iter().enumerate().map(|(c, k)| self.basis[(i, c)] * k).sum())
            .collect()
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

/// Eigenvalues `p_i` (descending, clamped to `[0,1]`) and weights `|α_i|²` of a start state.
#[derive(Clone, Debug)]
pub struct SpectralData {
    spaces: Vec<Eigenspace>,
}

impl SpectralData {
    pub fn spaces(&self) -> &[Eigenspace] {
        &self.spaces
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spaces.iter().map(|s| s.eigenvalue).collect()
    }

    pub fn overlaps(&self) -> Vec<f64> {
        self.spaces.iter().map(|s| s.overlap).collect()
    }

    /// `Σ_i p_i Π_i`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.spaces.first().map_or(0, |s| s.basis.nrows());
        let mut m = CMatrix::zeros(d, d);
        for s in &self.spaces {
            m += s.projector() * C64::new(s.eigenvalue, 0.0);
        }
        m
    }

    /// `Σ_i |α_i|² p_i^k`.
    pub fn moment(&self, k: u32) -> f64 {
        self.spaces.iter().map(|s| s.overlap * s.eigenvalue.powi(k as i32)).sum()
    }

    /// Builds data directly from `(eigenvalue, overlap)` pairs; eigenspaces carry no basis.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            spaces: pairs
                .iter()
                .map(|&(p, a)| Eigenspace { eigenvalue: p, basis: CMatrix::zeros(0, 0), overlap: a })
                .collect(),
        }
    }
}

fn eigen(m: &CMatrix) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::EigensolverFailure)
}

pub fn decompose(p: &GamePovm, start: &[C64]) -> Result<SpectralData> {
    decompose_matrix(&p.matrix, start)
}

/// Hermitian eigendecomposition of `m`, grouped at [`EIGEN_GROUP_TOL`], with overlaps of `start`.
pub fn decompose_matrix(m: &CMatrix, start: &[C64]) -> Result<SpectralData> {
    if start.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "start state has dimension {}, operator {}",
            start.len(),
            m.nrows()
        )));
    }
    if (norm(start) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("start state has norm {}", norm(start))));
    }
    let eig = eigen(m)?;
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut spaces: Vec<Eigenspace> = Vec::new();
    let mut group: Vec<usize> = Vec::new();
    let flush = |group: &mut Vec<usize>, spaces: &mut Vec<Eigenspace>| {
        if group.is_empty() {
            return;
        }
        let mean = group.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / group.len() as f64;
        let basis = CMatrix::from_fn(m.nrows(), group.len(), |r, c| eig.eigenvectors[(r, group[c])]);
        let mut space = Eigenspace { eigenvalue: mean.clamp(0.0, 1.0), basis, overlap: 0.0 };
        space.overlap = norm_sqr(&space.project(start));
        spaces.push(space);
        group.clear();
    };
    for &i in &order {
        if let Some(&last) = group.last() {
            if (eig.eigenvalues[last] - eig.eigenvalues[i]).abs() > EIGEN_GROUP_TOL {
                flush(&mut group, &mut spaces);
            }
        }
        group.push(i);
    }
    flush(&mut group, &mut spaces);
    Ok(SpectralData { spaces })
}

/// `Q[a,b] = ⟨a, 0_work| P_H |b, 0_work⟩` on the advice register.
pub fn compressed_operator(p: &GamePovm, layout: &RegisterLayout) -> Result<CMatrix> {
    if p.dim() != layout.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "POVM has dimension {}, layout {}",
            p.dim(),
            layout.total_dim()
        )));
    }
    let ds = layout.advice_dim();
    let idx: Vec<usize> = (0..ds).map(|a| layout.embed_advice(a)).collect();
    Ok(CMatrix::from_fn(ds, ds, |a, b| p.matrix[(idx[a], idx[b])]))
}

/// Top eigenvector and `λ_max` of `Q`: the best advice state for a fixed strategy.
pub fn optimal_advice(q: &CMatrix) -> Result<(StateVector, f64)> {
    let eig = eigen(q)?;
    let top = (0..q.nrows())
        .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .ok_or_else(|| Error::InvalidParameter("empty operator".into()))?;
    let v: StateVector = eig.eigenvectors.column(top).iter().cloned().collect();
    Ok((v, eig.eigenvalues[top].clamp(0.0, 1.0)))
}

/// Per-oracle (or per-branch) spectrum with its ensemble weight.
#[derive(Clone, Debug)]
pub struct WeightedSpectrum {
    pub oracle_index: usize,
    pub weight: f64,
    pub data: SpectralData,
}

fn per_oracle<T: Send>(
    ensemble: &OracleEnsemble,
    f: impl Fn(&OracleTable) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    ensemble.tables().par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

/// `Σ_H w_H ⟨σ_H,0|P_H|σ_H,0⟩`, averaged over mixture branches.
pub fn success_probability(
    adv: &AdviceFamily,
    strat: &StrategyCircuit,
    game: &Game,
    ensemble: &OracleEnsemble,
) -> Result<f64> {
    let values = per_oracle(ensemble, |h| {
        let p = game_povm_lean(game, h, strat)?;
        let start = prepare_start_state(adv, strat.layout(), h)?;
        Ok(start.branches().iter().map(|(w, psi)| w * quadratic_form(&p.matrix, psi)).sum::<f64>())
    })?;
    Ok(values.iter().zip(ensemble.weights()).map(|(v, w)| v * w).sum())
}

/// Spectra of every oracle's POVM against its start state(s).
pub fn oracle_spectra(
    adv: &AdviceFamily,
    strat: &StrategyCircuit,
    game: &Game,
    ensemble: &OracleEnsemble,
) -> Result<Vec<WeightedSpectrum>> {
    let per = per_oracle(ensemble, |h| {
        let p = game_povm_lean(game, h, strat)?;
        let start = prepare_start_state(adv, strat.layout(), h)?;
        start
            .branches()
            .iter()
            .map(|(w, psi)| Ok((*w, decompose(&p, psi)?)))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per
        .into_iter()
        .zip(ensemble.weights())
        .enumerate()
        .flat_map(|(i, (branches, wh))| {
            branches
                .into_iter()
                .map(move |(wb, data)| WeightedSpectrum { oracle_index: i, weight: wh * wb, data })
        })
        .collect())
}

/// `Σ_H w_H Σ_i |α_i|² p_i`.
pub fn success_probability_by_overlaps(
    adv: &AdviceFamily,
    strat: &StrategyCircuit,
    game: &Game,
    ensemble: &OracleEnsemble,
) -> Result<f64> {
    Ok(oracle_spectra(adv, strat, game, ensemble)?.iter().map(|s| s.weight * s.data.moment(1)).sum())
}

/// `Σ_H w_H λ_max(Q_H)` together with the advice family attaining it.
pub fn optimal_advice_family(
    game: &Game,
    strat: &StrategyCircuit,
    ensemble: &OracleEnsemble,
) -> Result<(ExplicitAdvice, f64)> {
    let layout = strat.layout();
    let per = per_oracle(ensemble, |h| {
        let p = game_povm_lean(game, h, strat)?;
        optimal_advice(&compressed_operator(&p, layout)?)
    })?;
    let mut family = ExplicitAdvice::new(layout.advice_dim());
    let mut value = 0.0;
    for ((h, w), (sigma, lambda)) in ensemble.iter().zip(per) {
        family.insert(h.clone(), sigma)?;
        value += w * lambda;
    }
    Ok((family, value))
}

/// The best value any explicit advice family achieves with this strategy.
pub fn optimal_nonuniform_value(game: &Game, strat: &StrategyCircuit, ensemble: &OracleEnsemble) -> Result<f64> {
    Ok(optimal_advice_family(game, strat, ensemble)?.1)
}

/// `⟨σ|Q|σ⟩` for an advice-register vector, computed through the full POVM.
pub fn advice_quadratic_form(p: &GamePovm, layout: &RegisterLayout, sigma: &[C64]) -> f64 {
    quadratic_form(&p.matrix, &embed(layout, sigma))
}

/// Writes `oracle_index,weight,eigenvalue,multiplicity,overlap` rows.
pub fn write_spectra_csv<W: Write>(out: W, spectra: &[WeightedSpectrum]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["oracle_index", "eigenvalue", "overlap", "weight", "multiplicity"])?;
    for s in spectra {
        for e in s.data.spaces() {
            w.write_record([
                s.oracle_index.to_string(),
                format!("{:.12}", e.eigenvalue),
                format!("{:.12}", e.overlap),
                format!("{:.12}", s.weight),
                e.multiplicity().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `(1/|R|) Σ_r ‖V_r U_{Samp(r)} ψ‖²`, straight from the definition.
pub fn direct_win_probability(game: &Game, h: &OracleTable, strat: &StrategyCircuit, psi: &[C64]) -> Result<f64> {
    let coins = game.coin_count();
    let mut total = 0.0;
    for r in 0..coins {
        let out = strat.apply(game.samp(h, r), h, psi)?;
        total += norm_sqr(&win_projector(game, h, r, strat.layout())?.apply(&out));
    }
    Ok(total / coins as f64)
}

#[allow(dead_code)]
pub(crate) fn apply_povm(p: &GamePovm, psi: &[C64]) -> StateVector {
    apply_matrix(&p.matrix, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{Step, Subsystem};
    use crate::game::{owf_game, prg_game};
    use crate::linalg::{hermiticity_error, operator_norm, random_contraction, random_state, random_unitary};
    use crate::oracle::enumerate_oracles;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(m: usize, e: &[usize]) -> OracleTable {
        OracleTable::new(m, e.to_vec()).unwrap()
    }

    fn identity2() -> StrategyCircuit {
        StrategyCircuit::identity(RegisterLayout::answer_only(2).unwrap())
    }

    /// OWF strategy on registers x (answer, dim n) and y (dim m) with one real query.
    fn querying_strategy(n: usize, m: usize, rng: &mut ChaCha8Rng) -> StrategyCircuit {
        let layout = RegisterLayout::new(
            vec![Subsystem::new("x", n), Subsystem::new("y", m)],
            vec!["x".into()],
            vec!["y".into()],
            "x",
        )
        .unwrap();
        let mut programs = std::collections::BTreeMap::new();
        for ch in 0..m {
            programs.insert(
                ch,
                vec![
                    Step::Unitary { targets: vec!["x".into()], matrix: random_unitary(n, rng) },
                    Step::OracleCall { x: "x".into(), y: "y".into() },
                    Step::Unitary { targets: vec!["x".into(), "y".into()], matrix: random_unitary(n * m, rng) },
                ],
            );
        }
        StrategyCircuit::new(layout, programs, None).unwrap()
    }

    #[test]
    fn win_projector_examples() {
        let g = owf_game(2, 2).unwrap();
        let l = RegisterLayout::answer_only(2).unwrap();
        for r in 0..2 {
            assert_eq!(win_projector(&g, &table(2, &[0, 0]), r, &l).unwrap().rank(), 2);
        }
        assert_eq!(win_projector(&g, &table(2, &[1, 0]), 0, &l).unwrap().mask(), &[true, false]);
        let p = prg_game(2, 2).unwrap();
        // coin with b = 1
        assert_eq!(win_projector(&p, &table(2, &[0, 1]), 5, &l).unwrap().mask(), &[false, true]);
    }

    #[test]
    fn povm_examples() {
        let g = owf_game(2, 2).unwrap();
        let p = game_povm(&g, &table(2, &[0, 0]), &identity2()).unwrap();
        assert!((p.matrix() - CMatrix::identity(2, 2)).norm() < 1e-14);
        let p = game_povm(&g, &table(2, &[1, 0]), &identity2()).unwrap();
        let half = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!((p.matrix() - &half).norm() < 1e-14);
        for pr in p.per_coin().unwrap() {
            assert!((pr * pr - pr).norm() < 1e-9);
        }
    }

    #[test]
    fn povm_invariants_with_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = owf_game(3, 2).unwrap();
        let s = querying_strategy(3, 2, &mut rng);
        for h in enumerate_oracles(3, 2).unwrap().tables() {
            let p = game_povm(&g, h, &s).unwrap();
            assert!(hermiticity_error(p.matrix()) < 1e-12);
            let mut avg = CMatrix::zeros(6, 6);
            for pr in p.per_coin().unwrap() {
                assert!(operator_norm(&(pr * pr - pr)) < 1e-9);
                avg += pr;
            }
            assert!((avg / C64::new(3.0, 0.0) - p.matrix()).norm() < 1e-12);
            let lean = game_povm_lean(&g, h, &s).unwrap();
            assert!((lean.matrix() - p.matrix()).norm() < 1e-12);
            let eig = p.matrix().clone().symmetric_eigen();
            assert!(eig.eigenvalues.iter().all(|&l| l > -1e-9 && l < 1.0 + 1e-9));
        }
    }

    #[test]
    fn decompose_examples() {
        let id = GamePovm::from_matrix(CMatrix::identity(3, 3));
        let d = decompose(&id, &basis_state(3, 1)).unwrap();
        assert_eq!(d.eigenvalues(), vec![1.0]);
        assert!((d.overlaps()[0] - 1.0).abs() < 1e-12);

        let g = owf_game(2, 2).unwrap();
        let p = game_povm(&g, &table(2, &[1, 0]), &identity2()).unwrap();
        let d = decompose(&p, &basis_state(2, 0)).unwrap();
        assert_eq!(d.spaces().len(), 1);
        assert!((d.eigenvalues()[0] - 0.5).abs() < 1e-12 && (d.overlaps()[0] - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 4, 7] {
            let m = random_contraction(dim, &mut rng);
            let psi = random_state(dim, &mut rng);
            let d = decompose_matrix(&m, &psi).unwrap();
            assert!((d.overlaps().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(operator_norm(&(d.reconstruct() - &m)) < 1e-8);
            assert!(d.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn degenerate_eigenvalues_merge() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [0.3, 0.3 + 1e-12, 0.7, 0.7].iter().map(|&x| C64::new(x, 0.0)).collect(),
        ));
        let d = decompose_matrix(&m, &random_state(4, &mut ChaCha8Rng::seed_from_u64(1))).unwrap();
        assert_eq!(d.spaces().len(), 2);
        assert_eq!(d.spaces()[0].multiplicity(), 2);
    }

    #[test]
    fn compressed_operator_examples() {
        let g = owf_game(2, 2).unwrap();
        let h = table(2, &[1, 0]);
        let p = game_povm(&g, &h, &identity2()).unwrap();
        let q = compressed_operator(&p, identity2().layout()).unwrap();
        assert_eq!(&q, p.matrix());
        let (_, v) = optimal_advice(&q).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let (_, v) = optimal_advice(&CMatrix::identity(3, 3)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compressed_operator_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = owf_game(3, 2).unwrap();
        let s = querying_strategy(3, 2, &mut rng);
        let h = table(2, &[0, 1, 1]);
        let p = game_povm(&g, &h, &s).unwrap();
        let q = compressed_operator(&p, s.layout()).unwrap();
        assert!(hermiticity_error(&q) < 1e-12);
        for _ in 0..100 {
            let sigma = random_state(3, &mut rng);
            assert!((quadratic_form(&q, &sigma) - advice_quadratic_form(&p, s.layout(), &sigma)).abs() < 1e-10);
        }
    }

    #[test]
    fn rayleigh_sampling_never_beats_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let q = random_contraction(5, &mut rng);
        let (top, v) = optimal_advice(&q).unwrap();
        assert!((quadratic_form(&q, &top) - v).abs() < 1e-10);
        for _ in 0..1000 {
            assert!(quadratic_form(&q, &random_state(5, &mut rng)) <= v + 1e-12);
        }
    }

    #[test]
    fn owf_identity_values() {
        let g = owf_game(2, 2).unwrap();
        let e = enumerate_oracles(2, 2).unwrap();
        let s = identity2();
        let v = success_probability(&AdviceFamily::Uniform, &s, &g, &e).unwrap();
        assert!((v - 0.75).abs() < 1e-12);
        assert!((success_probability_by_overlaps(&AdviceFamily::Uniform, &s, &g, &e).unwrap() - 0.75).abs() < 1e-12);
        assert!((optimal_nonuniform_value(&g, &s, &e).unwrap() - 0.75).abs() < 1e-12);
        let only_const = e.restrict(|h| h.entries()[0] == h.entries()[1]).unwrap();
        assert!((optimal_nonuniform_value(&g, &s, &only_const).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prg_challenge_blind_strategy_is_half() {
        let g = prg_game(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let layout = RegisterLayout::answer_only(2).unwrap();
        let s = StrategyCircuit::uniform(layout, vec![Step::Unitary { targets: vec!["ans".into()], matrix: random_unitary(2, &mut rng) }]).unwrap();
        let v = success_probability(&AdviceFamily::Uniform, &s, &g, &enumerate_oracles(2, 3).unwrap()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn three_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let g = owf_game(3, 2).unwrap();
        let s = querying_strategy(3, 2, &mut rng);
        let e = enumerate_oracles(3, 2).unwrap();
        let adv = ExplicitAdvice::from_fn(&e, 3, |_| random_state(3, &mut rng)).unwrap();
        let adv = AdviceFamily::Explicit(adv);
        let a = success_probability(&adv, &s, &g, &e).unwrap();
        let b = success_probability_by_overlaps(&adv, &s, &g, &e).unwrap();
        let direct: f64 = e
            .iter()
            .map(|(h, w)| {
                let psi = embed(s.layout(), &adv.advice_vector(h, 3).unwrap());
                w * direct_win_probability(&g, h, &s, &psi).unwrap()
            })
            .sum();
        assert!((a - b).abs() < 1e-9 && (a - direct).abs() < 1e-9);
        let best = optimal_nonuniform_value(&g, &s, &e).unwrap();
        for _ in 0..50 {
            let fam = ExplicitAdvice::from_fn(&e, 3, |_| random_state(3, &mut rng)).unwrap();
            assert!(success_probability(&AdviceFamily::Explicit(fam), &s, &g, &e).unwrap() <= best + 1e-12);
        }
    }

    #[test]
    fn top_eigenvector_advice_with_full_register() {
        let g = owf_game(2, 2).unwrap();
        let e = enumerate_oracles(2, 2).unwrap();
        let s = identity2();
        let (fam, v) = optimal_advice_family(&g, &s, &e).unwrap();
        let got = success_probability(&AdviceFamily::Explicit(fam), &s, &g, &e).unwrap();
        assert!((got - v).abs() < 1e-12 && (v - 0.75).abs() < 1e-12);
    }

    #[test]
    fn spectra_csv_has_header() {
        let g = owf_game(2, 2).unwrap();
        let spectra = oracle_spectra(&AdviceFamily::Uniform, &identity2(), &g, &enumerate_oracles(2, 2).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_spectra_csv(&mut buf, &spectra).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("oracle_index,eigenvalue,overlap"));
        assert_eq!(text.lines().count(), 1 + 4);
    }
}

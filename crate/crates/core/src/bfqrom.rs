//! Games with a bit-fixing prefix: an offline procedure `f` with `P` queries
//! conditions the oracle (`f^H = 0`) before an online algorithm `B` with `T`
//! queries plays. Conditioning is exact over the enumerated ensemble.

use std::io::Write;

use rayon::prelude::*;

use crate::adversary::{prepare_start_state, AdviceFamily, StrategyCircuit};
use crate::altmeas::{cp_project_counted, isuniform_project, Branch, JointState};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::linalg::basis_state;
use crate::oracle::{OracleAccess, OracleEnsemble, OracleTable};
use crate::spectral::direct_win_probability;

/// Accept only oracles that agree with every listed `(input, output)` pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClassicalFixing {
    points: Vec<(usize, usize)>,
}

impl ClassicalFixing {
    pub fn new(points: Vec<(usize, usize)>) -> Result<Self> {
        let mut xs: Vec<usize> = points.iter().map(|p| p.0).collect();
        xs.sort_unstable();
        if xs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("fixing lists an input twice".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(usize, usize)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn accepts(&self, h: &OracleTable) -> Result<bool> {
        let (n, m) = (h.entries().len(), h.range_size());
        for &(x, v) in &self.points {
            if x >= n || v >= m {
                return Err(Error::InvalidParameter(format!("fixing point ({x}, {v}) outside [{n}]×[{m}]")));
            }
        }
        Ok(self.points.iter().all(|&(x, v)| h.entries()[x] == v))
    }
}

/// Every fixing of at most `p` distinct points of `[n] → [m]`, smallest first.
pub fn all_fixings(n: usize, m: usize, p: usize, cap: u128) -> Result<Vec<ClassicalFixing>> {
    let mut count: u128 = 0;
    for size in 0..=p.min(n) {
        count = count.saturating_add(binomial(n, size).saturating_mul((m as u128).saturating_pow(size as u32)));
    }
    if count > cap {
        return Err(Error::CapExceeded { requested: count, cap });
    }
    let mut out = Vec::new();
    for size in 0..=p.min(n) {
        for xs in subsets(n, size) {
            let mut vals = vec![0usize; size];
            loop {
                out.push(ClassicalFixing { points: xs.iter().cloned().zip(vals.iter().cloned()).collect() });
                let mut i = size;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    vals[i] += 1;
                    if vals[i] < m {
                        break;
                    }
                    vals[i] = 0;
                    if i == 0 {
                        i = usize::MAX;
                        break;
                    }
                }
                if size == 0 || i == usize::MAX {
                    break;
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    if size > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - size + i {
                cur[i] += 1;
                for j in i + 1..size {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The offline part `f`.
#[derive(Clone, Debug)]
pub enum Prefix {
    /// `f ≡ 0` without queries.
    Empty,
    Fixing(ClassicalFixing),
    /// Run `rounds` rounds of the alternating game for `A = (adv, strat)`; accept on all zeros.
    AltMeas { adv: Box<AdviceFamily>, strat: Box<StrategyCircuit>, rounds: usize },
}

/// The online part `B`.
#[derive(Clone, Debug)]
pub enum Online {
    /// Runs the strategy on the prefix's leftover state (or on `|0⟩` after a classical prefix).
    Quantum { strategy: StrategyCircuit },
    /// A zero-query classical answer per challenge.
    ResponseMap(Vec<usize>),
}

impl Online {
    pub fn query_count(&self) -> usize {
        match self {
            Online::Quantum { strategy } => strategy.query_count(),
            Online::ResponseMap(_) => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BfAlgorithm {
    pub prefix: Prefix,
    pub online: Online,
    /// Declared `P`.
    pub prefix_budget: usize,
    /// Declared `T`.
    pub online_budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfOutcome {
    /// `Pr[f = 0 ∧ B wins]`.
    pub joint: f64,
    /// `Pr[B wins | f = 0]`.
    pub conditional: f64,
    pub accept_rate: f64,
    /// Largest instrumented prefix query count over the ensemble.
    pub prefix_queries: usize,
}

struct PerOracle {
    accept: f64,
    joint: f64,
    queries: usize,
}

fn online_value(game: &Game, h: &OracleTable, online: &Online, start: &[crate::linalg::C64]) -> Result<f64> {
    match online {
        Online::Quantum { strategy } => direct_win_probability(game, h, strategy, start),
        Online::ResponseMap(map) => {
            if map.len() != game.challenge_count() || map.iter().any(|&a| a >= game.answer_count()) {
                return Err(Error::InvalidParameter("response map does not fit the game".into()));
            }
            Ok(game.map_value(h, map))
        }
    }
}

fn evaluate(bf: &BfAlgorithm, game: &Game, h: &OracleTable) -> Result<PerOracle> {
    match &bf.prefix {
        Prefix::Empty | Prefix::Fixing(_) => {
            let (ok, queries) = match &bf.prefix {
                Prefix::Fixing(f) => (f.accepts(h)?, f.len()),
                _ => (true, 0),
            };
            if !ok {
                return Ok(PerOracle { accept: 0.0, joint: 0.0, queries });
            }
            let joint = match &bf.online {
                Online::Quantum { strategy } => {
                    let start = basis_state(strategy.layout().total_dim(), 0);
                    online_value(game, h, &bf.online, &start)?
                }
                Online::ResponseMap(_) => online_value(game, h, &bf.online, &[])?,
            };
            Ok(PerOracle { accept: 1.0, joint, queries })
        }
        Prefix::AltMeas { adv, strat, rounds } => {
            let Online::Quantum { strategy } = &bf.online else {
                return Err(Error::InvalidParameter("a quantum prefix needs a quantum online part".into()));
            };
            if strategy.layout().total_dim() != strat.layout().total_dim() {
                return Err(Error::DimensionMismatch("online strategy does not act on the prefix register".into()));
            }
            let start = prepare_start_state(adv, strat.layout(), h)?;
            let (mut accept, mut joint, mut queries) = (0.0, 0.0, 0);
            for (w, psi) in start.branches() {
                let mut tau = JointState::uniform_product(game.coin_count(), psi);
                let mut used = 0;
                for round in 1..=*rounds {
                    tau = if round % 2 == 1 {
                        let (next, cost) = cp_project_counted(game, h, strat, &tau, Branch::Zero)?;
                        used += cost.total();
                        next
                    } else {
                        isuniform_project(&tau, Branch::Zero)
                    };
                }
                queries = queries.max(used);
                accept += w * tau.norm_sqr();
                for r in 0..tau.coins() {
                    joint += w * direct_win_probability(game, h, strategy, tau.block(r))?;
                }
            }
            Ok(PerOracle { accept, joint, queries })
        }
    }
}

/// Exact `Pr[f=0 ∧ win]`, `Pr[win | f=0]` and `Pr[f=0]` over the ensemble.
pub fn run_bf_game(bf: &BfAlgorithm, game: &Game, ensemble: &OracleEnsemble) -> Result<BfOutcome> {
    let online_queries = bf.online.query_count();
    if online_queries > bf.online_budget {
        return Err(Error::InvalidParameter(format!(
            "online part makes {online_queries} queries, budget {}",
            bf.online_budget
        )));
    }
    let per = ensemble
        .tables()
        .par_iter()
        .map(|h| evaluate(bf, game, h))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (mut accept, mut joint, mut queries) = (0.0, 0.0, 0);
    for (p, w) in per.iter().zip(ensemble.weights()) {
        accept += w * p.accept;
        joint += w * p.joint;
        queries = queries.max(p.queries);
    }
    if queries > bf.prefix_budget {
        return Err(Error::InvalidParameter(format!(
            "prefix makes {queries} queries, budget {}",
            bf.prefix_budget
        )));
    }
    if accept <= 0.0 {
        return Err(Error::NeverAccepts);
    }
    Ok(BfOutcome { joint, conditional: (joint / accept).min(1.0), accept_rate: accept, prefix_queries: queries })
}

/// Prefix: `k−1` alternating rounds of `A`; online: `A`'s own strategy on the leftover state.
///
/// Declared budgets are `P = (k−1)(T + T_Samp + T_Verify)` and `T`.
pub fn build_prefix_from_altmeas(
    adv: &AdviceFamily,
    strat: &StrategyCircuit,
    game: &Game,
    k: usize,
) -> Result<BfAlgorithm> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if k.is_multiple_of(2) {
        return Err(Error::EvenRounds(k));
    }
    strat.layout().check_against(game)?;
    let t = strat.query_count();
    // zero rounds is the empty prefix; the leftover state is then the start state itself
    let prefix = Prefix::AltMeas { adv: Box::new(adv.clone()), strat: Box::new(strat.clone()), rounds: k - 1 };
    let online = Online::Quantum { strategy: strat.clone() };
    Ok(BfAlgorithm {
        prefix,
        online,
        prefix_budget: (k - 1) * (t + game.t_samp() + game.t_verify()),
        online_budget: t,
    })
}

/// A candidate prefix for [`estimate_nu`].
#[derive(Clone, Debug)]
pub struct PrefixCandidate {
    pub id: String,
    pub prefix: Prefix,
    /// Instrumented query count; computed by [`estimate_nu`] when `None`.
    pub queries: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NuRow {
    pub prefix_id: String,
    pub online_id: usize,
    pub joint: f64,
    pub conditional: f64,
    pub accept_rate: f64,
}

/// Best values found over finite families; both are lower bounds on `ν(P, T)`.
#[derive(Clone, Debug)]
pub struct NuEstimate {
    pub p: usize,
    pub t: usize,
    pub best_conditional: f64,
    pub best_joint: f64,
    pub rows: Vec<NuRow>,
}

impl NuEstimate {
    /// True when the joint and conditional readings of `ν` disagree on this family.
    pub fn semantics_differ(&self) -> bool {
        self.best_conditional > self.best_joint + 1e-12
    }
}

/// Searches every (prefix, online) pair within budget; never-accepting prefixes are skipped.
pub fn estimate_nu(
    game: &Game,
    prefixes: &[PrefixCandidate],
    onlines: &[Online],
    ensemble: &OracleEnsemble,
    p: usize,
    t: usize,
) -> Result<NuEstimate> {
    let pairs: Vec<(usize, usize)> = (0..prefixes.len())
        .flat_map(|i| (0..onlines.len()).map(move |j| (i, j)))
        .filter(|&(_, j)| onlines[j].query_count() <= t)
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(i, j)| {
            let bf = BfAlgorithm {
                prefix: prefixes[i].prefix.clone(),
                online: onlines[j].clone(),
                prefix_budget: prefixes[i].queries.unwrap_or(usize::MAX),
                online_budget: t,
            };
            match run_bf_game(&bf, game, ensemble) {
                Ok(o) if o.prefix_queries <= p && prefixes[i].queries.is_none_or(|q| q <= p) => Ok(Some(NuRow {
                    prefix_id: prefixes[i].id.clone(),
                    online_id: j,
                    joint: o.joint,
                    conditional: o.conditional,
                    accept_rate: o.accept_rate,
                })),
                Ok(_) | Err(Error::NeverAccepts) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Vec<Result<Option<NuRow>>>>();
    let rows: Vec<NuRow> = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let best_conditional = rows.iter().map(|r| r.conditional).fold(0.0, f64::max);
    let best_joint = rows.iter().map(|r| r.joint).fold(0.0, f64::max);
    Ok(NuEstimate { p, t, best_conditional, best_joint, rows })
}

/// Classical fixings of at most `p` points, as prefix candidates.
pub fn fixing_candidates(n: usize, m: usize, p: usize, cap: u128) -> Result<Vec<PrefixCandidate>> {
    Ok(all_fixings(n, m, p, cap)?
        .into_iter()
        .map(|f| {
            let id = if f.is_empty() {
                "empty".to_string()
            } else {
                f.points().iter().map(|(x, v)| format!("{x}={v}")).collect::<Vec<_>>().join(";")
            };
            let q = f.len();
            PrefixCandidate { id, prefix: if q == 0 { Prefix::Empty } else { Prefix::Fixing(f) }, queries: Some(q) }
        })
        .collect())
}

/// Writes `P,T,family_id,joint,conditional,accept_rate` rows.
pub fn write_nu_csv<W: Write>(out: W, est: &NuEstimate) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["P", "T", "family_id", "joint", "conditional", "accept_rate"])?;
    for r in &est.rows {
        w.write_record([
            est.p.to_string(),
            est.t.to_string(),
            format!("{}/{}", r.prefix_id, r.online_id),
            format!("{:.12}", r.joint),
            format!("{:.12}", r.conditional),
            format!("{:.12}", r.accept_rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

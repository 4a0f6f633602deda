//! Random oracles as explicit tables, salted views, lazily sampled oracles,
//! ensembles to average over, and the oracle-access unitary
//! `|x, y⟩ ↦ |x, y + H(x) mod M⟩`.

use std::cell::Cell;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64, ZERO};

/// Default bound on the number of tables an exhaustive ensemble may hold.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Classical query access to a function `[N] → [M]`.
pub trait OracleAccess {
    fn domain_size(&self) -> usize;
    fn range_size(&self) -> usize;
    fn query(&self, x: usize) -> usize;
}

/// An explicit function `H: [N] → [M]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct OracleTable {
    range: usize,
    entries: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    n: usize,
    m: usize,
    entries: Vec<usize>,
}

impl TryFrom<RawTable> for OracleTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        if raw.entries.len() != raw.n {
            return Err(Error::InvalidOracle(format!(
                "n = {} but {} entries given",
                raw.n,
                raw.entries.len()
            )));
        }
        OracleTable::new(raw.m, raw.entries)
    }
}

impl From<OracleTable> for RawTable {
    fn from(t: OracleTable) -> Self {
        RawTable {
            n: t.entries.len(),
            m: t.range,
            entries: t.entries,
        }
    }
}

impl OracleTable {
    pub fn new(range: usize, entries: Vec<usize>) -> Result<Self> {
        if range == 0 || entries.is_empty() {
            return Err(Error::InvalidOracle("domain and range must be non-empty".into()));
        }
        if let Some(bad) = entries.iter().find(|&&v| v >= range) {
            return Err(Error::InvalidOracle(format!("entry {bad} not below range {range}")));
        }
        Ok(Self { range, entries })
    }

    pub fn constant(domain: usize, range: usize, value: usize) -> Result<Self> {
        Self::new(range, vec![value; domain])
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl OracleAccess for OracleTable {
    fn domain_size(&self) -> usize {
        self.entries.len()
    }

    fn range_size(&self) -> usize {
        self.range
    }

    fn query(&self, x: usize) -> usize {
        self.entries[x]
    }
}

/// A salted oracle `H: [K] × [N] → [M]` stored flat at index `s·N + x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaltedOracleTable {
    salts: usize,
    inner: OracleTable,
}

impl SaltedOracleTable {
    pub fn new(salts: usize, inner: OracleTable) -> Result<Self> {
        if salts == 0 || !inner.domain_size().is_multiple_of(salts) {
            return Err(Error::InvalidOracle(format!(
                "domain {} is not a multiple of salt space {salts}",
                inner.domain_size()
            )));
        }
        Ok(Self { salts, inner })
    }

    pub fn salts(&self) -> usize {
        self.salts
    }

    /// Per-salt domain size `N`.
    pub fn slice_domain(&self) -> usize {
        self.inner.domain_size() / self.salts
    }

    pub fn inner(&self) -> &OracleTable {
        &self.inner
    }
}

/// The oracle `H_s = H(s, ·)` as an owned table.
pub fn salted_view(h: &SaltedOracleTable, s: usize) -> Result<OracleTable> {
    if s >= h.salts {
        return Err(Error::SaltOutOfRange { salt: s, salts: h.salts });
    }
    let n = h.slice_domain();
    OracleTable::new(h.inner.range, h.inner.entries[s * n..(s + 1) * n].to_vec())
}

/// Borrowed salted view; queries pass through to the composite oracle.
pub struct SaltSlice<'a> {
    pub(crate) composite: &'a dyn OracleAccess,
    pub(crate) salt: usize,
    pub(crate) slice_domain: usize,
}

impl<'a> SaltSlice<'a> {
    pub fn new(composite: &'a dyn OracleAccess, salt: usize, slice_domain: usize) -> Result<Self> {
        let salts = composite.domain_size() / slice_domain.max(1);
        if slice_domain == 0 || salt >= salts {
            return Err(Error::SaltOutOfRange { salt, salts });
        }
        Ok(Self { composite, salt, slice_domain })
    }
}

impl OracleAccess for SaltSlice<'_> {
    fn domain_size(&self) -> usize {
        self.slice_domain
    }

    fn range_size(&self) -> usize {
        self.composite.range_size()
    }

    fn query(&self, x: usize) -> usize {
        self.composite.query(self.salt * self.slice_domain + x)
    }
}

/// Wraps an oracle and counts queries.
pub struct CountingOracle<'a> {
    inner: &'a dyn OracleAccess,
    count: Cell<usize>,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inner: &'a dyn OracleAccess) -> Self {
        Self { inner, count: Cell::new(0) }
    }

    pub fn count(&self) -> usize {
        self.count.get()
    }

    pub fn reset(&self) {
        self.count.set(0);
    }
}

impl OracleAccess for CountingOracle<'_> {
    fn domain_size(&self) -> usize {
        self.inner.domain_size()
    }

    fn range_size(&self) -> usize {
        self.inner.range_size()
    }

    fn query(&self, x: usize) -> usize {
        self.count.set(self.count.get() + 1);
        self.inner.query(x)
    }
}

/// A random oracle whose values are drawn on first query.
///
/// Values come from one ChaCha stream consumed in query order, so a fixed
/// seed and a fixed query sequence always replay the same transcript.
#[derive(Clone, Debug)]
pub struct LazyOracle {
    domain: usize,
    range: usize,
    seed: u64,
    rng: ChaCha8Rng,
    assigned: BTreeMap<usize, usize>,
}

impl LazyOracle {
    pub fn new(domain: usize, range: usize, seed: u64) -> Self {
        assert!(domain > 0 && range > 0, "lazy oracle needs a non-empty domain and range");
        Self {
            domain,
            range,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            assigned: BTreeMap::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Pins `x ↦ value` before any sampling; used to model bit-fixing.
    pub fn fix(&mut self, x: usize, value: usize) -> Result<()> {
        if x >= self.domain || value >= self.range {
            return Err(Error::InvalidOracle(format!("fixing ({x}, {value}) out of range")));
        }
        match self.assigned.get(&x) {
            Some(&v) if v != value => Err(Error::InvalidOracle(format!(
                "point {x} already assigned {v}"
            ))),
            _ => {
                self.assigned.insert(x, value);
                Ok(())
            }
        }
    }

    /// Panics if `x` is outside the domain.
    pub fn query(&mut self, x: usize) -> usize {
        assert!(x < self.domain, "query {x} outside domain {}", self.domain);
        if let Some(&v) = self.assigned.get(&x) {
            return v;
        }
        let v = self.rng.random_range(0..self.range);
        self.assigned.insert(x, v);
        v
    }

    pub fn peek(&self, x: usize) -> Option<usize> {
        self.assigned.get(&x).copied()
    }

    pub fn assigned(&self) -> &BTreeMap<usize, usize> {
        &self.assigned
    }

    pub fn domain_size(&self) -> usize {
        self.domain
    }

    pub fn range_size(&self) -> usize {
        self.range
    }

    /// Samples every remaining point in increasing order and returns the full table.
    pub fn into_table(mut self) -> OracleTable {
        for x in 0..self.domain {
            self.query(x);
        }
        let entries = self.assigned.into_values().collect();
        OracleTable { range: self.range, entries }
    }
}

/// How an ensemble was produced. This is what gets serialized; the table list never is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EnsembleMode {
    Exhaustive { n: usize, m: usize },
    Sampled { n: usize, m: usize, count: usize, seed: u64 },
    /// Hand-built ensembles (restrictions, single oracles). Not reconstructible from the mode alone.
    Custom { count: usize },
}

/// A finite distribution over oracle tables realizing `E_H`.
#[derive(Clone, Debug, Serialize)]
#[serde(into = "EnsembleMode")]
pub struct OracleEnsemble {
    mode: EnsembleMode,
    tables: Vec<OracleTable>,
    weights: Vec<f64>,
}

impl From<OracleEnsemble> for EnsembleMode {
    fn from(e: OracleEnsemble) -> Self {
        e.mode
    }
}

/// All `M^N` tables `[N] → [M]` in lexicographic order, each with weight `M^{-N}`.
pub fn enumerate_oracles(n: usize, m: usize) -> Result<OracleEnsemble> {
    OracleEnsemble::exhaustive(n, m, DEFAULT_ENUMERATION_CAP)
}

impl OracleEnsemble {
    pub fn exhaustive(n: usize, m: usize, cap: u128) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidOracle("domain and range must be non-empty".into()));
        }
        let count = (m as u128)
            .checked_pow(n as u32)
            .filter(|&c| c <= cap)
            .ok_or(Error::CapExceeded {
                requested: (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX),
                cap,
            })?;
        let count = count as usize;
        let mut tables = Vec::with_capacity(count);
        let mut entries = vec![0usize; n];
        for _ in 0..count {
            tables.push(OracleTable { range: m, entries: entries.clone() });
            // odometer, last entry fastest
            for slot in entries.iter_mut().rev() {
                *slot += 1;
                if *slot < m {
                    break;
                }
                *slot = 0;
            }
        }
        let weights = vec![1.0 / count as f64; count];
        Ok(Self { mode: EnsembleMode::Exhaustive { n, m }, tables, weights })
    }

    pub fn sampled(n: usize, m: usize, count: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 || count == 0 {
            return Err(Error::InvalidOracle("sampled ensemble needs n, m, count > 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables = (0..count)
            .map(|_| OracleTable {
                range: m,
                entries: (0..n).map(|_| rng.random_range(0..m)).collect(),
            })
            .collect();
        let weights = vec![1.0 / count as f64; count];
        Ok(Self { mode: EnsembleMode::Sampled { n, m, count, seed }, tables, weights })
    }

    pub fn from_mode(mode: &EnsembleMode, cap: u128) -> Result<Self> {
        match *mode {
            EnsembleMode::Exhaustive { n, m } => Self::exhaustive(n, m, cap),
            EnsembleMode::Sampled { n, m, count, seed } => Self::sampled(n, m, count, seed),
            EnsembleMode::Custom { .. } => Err(Error::InvalidParameter(
                "custom ensembles cannot be rebuilt from their description".into(),
            )),
        }
    }

    /// Weights are normalized to sum to one.
    pub fn custom(tables: Vec<OracleTable>, weights: Vec<f64>) -> Result<Self> {
        if tables.is_empty() || tables.len() != weights.len() {
            return Err(Error::InvalidParameter("tables and weights must be non-empty and aligned".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("weights sum to zero".into()));
        }
        let shape = (tables[0].domain_size(), tables[0].range_size());
        if tables.iter().any(|t| (t.domain_size(), t.range_size()) != shape) {
            return Err(Error::InvalidParameter("tables in an ensemble must share a shape".into()));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { mode: EnsembleMode::Custom { count: tables.len() }, tables, weights })
    }

    pub fn single(table: OracleTable) -> Self {
        Self {
            mode: EnsembleMode::Custom { count: 1 },
            tables: vec![table],
            weights: vec![1.0],
        }
    }

    /// Keeps the tables satisfying `keep`, renormalizing their weights.
    pub fn restrict(&self, keep: impl Fn(&OracleTable) -> bool) -> Result<Self> {
        let (tables, weights): (Vec<_>, Vec<_>) = self
            .iter()
            .filter(|(t, _)| keep(t))
            .map(|(t, w)| (t.clone(), w))
            .unzip();
        Self::custom(tables, weights)
    }

    pub fn mode(&self) -> &EnsembleMode {
        &self.mode
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn tables(&self) -> &[OracleTable] {
        &self.tables
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OracleTable, f64)> {
        self.tables.iter().zip(self.weights.iter().copied())
    }

    pub fn domain_size(&self) -> usize {
        self.tables[0].domain_size()
    }

    pub fn range_size(&self) -> usize {
        self.tables[0].range_size()
    }
}

/// Applies `U_H` (or its inverse) in place on the `x`/`y` subsystems of `layout`.
pub(crate) fn apply_oracle(
    h: &dyn OracleAccess,
    state: &[C64],
    x_stride: usize,
    x_dim: usize,
    y_stride: usize,
    y_dim: usize,
    inverse: bool,
) -> StateVector {
    let mut out = vec![ZERO; state.len()];
    for (idx, amp) in state.iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let x = (idx / x_stride) % x_dim;
        let y = (idx / y_stride) % y_dim;
        let shift = h.query(x) % y_dim;
        let y_new = if inverse { (y + y_dim - shift) % y_dim } else { (y + shift) % y_dim };
        let target = idx - y * y_stride + y_new * y_stride;
        out[target] = *amp;
    }
    out
}

/// `|x, y⟩ ↦ |x, (y + H(x)) mod M⟩` on the labeled subsystems, identity elsewhere.
pub fn oracle_unitary_step(
    h: &dyn OracleAccess,
    state: &[C64],
    layout: &RegisterLayout,
    x_label: &str,
    y_label: &str,
) -> Result<StateVector> {
    let (x_stride, x_dim) = layout.stride_and_dim(x_label)?;
    let (y_stride, y_dim) = layout.stride_and_dim(y_label)?;
    check_oracle_dims(h, x_label, x_dim, y_label, y_dim)?;
    if state.len() != layout.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, layout {}",
            state.len(),
            layout.total_dim()
        )));
    }
    Ok(apply_oracle(h, state, x_stride, x_dim, y_stride, y_dim, false))
}

pub(crate) fn check_oracle_dims(
    h: &dyn OracleAccess,
    x_label: &str,
    x_dim: usize,
    y_label: &str,
    y_dim: usize,
) -> Result<()> {
    if x_dim != h.domain_size() || y_dim != h.range_size() {
        return Err(Error::DimensionMismatch(format!(
            "oracle [{}]→[{}] called on `{x_label}` (dim {x_dim}) and `{y_label}` (dim {y_dim})",
            h.domain_size(),
            h.range_size()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{RegisterLayout, Subsystem};
    use crate::linalg::{basis_state, norm, random_state};

    fn xy_layout(n: usize, m: usize) -> RegisterLayout {
        RegisterLayout::new(
            vec![Subsystem::new("x", n), Subsystem::new("y", m)],
            vec!["x".into(), "y".into()],
            vec![],
            "x",
        )
        .unwrap()
    }

    #[test]
    fn enumerates_in_lexicographic_order() {
        let e = enumerate_oracles(2, 2).unwrap();
        let got: Vec<_> = e.tables().iter().map(|t| t.entries().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(enumerate_oracles(1, 3).unwrap().len(), 3);
        let e = enumerate_oracles(3, 2).unwrap();
        assert_eq!(e.len(), 8);
        assert!(e.weights().iter().all(|&w| w == 0.125));
    }

    #[test]
    fn exhaustive_weights_sum_to_one() {
        for (n, m) in [(1, 1), (3, 3), (4, 4), (5, 2)] {
            let s: f64 = enumerate_oracles(n, m).unwrap().weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            OracleEnsemble::exhaustive(3, 3, 26),
            Err(Error::CapExceeded { requested: 27, cap: 26 })
        ));
        assert!(matches!(enumerate_oracles(40, 2), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn sampled_is_reproducible() {
        let a = OracleEnsemble::sampled(4, 3, 10, 99).unwrap();
        let b = OracleEnsemble::sampled(4, 3, 10, 99).unwrap();
        assert_eq!(a.tables(), b.tables());
        assert!(a.weights().iter().all(|&w| (w - 0.1).abs() < 1e-15));
    }

    #[test]
    fn ensemble_serializes_mode_only() {
        let e = OracleEnsemble::sampled(3, 2, 5, 11).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"mode":"sampled","n":3,"m":2,"count":5,"seed":11}"#);
        let mode: EnsembleMode = serde_json::from_str(&json).unwrap();
        assert_eq!(
            OracleEnsemble::from_mode(&mode, DEFAULT_ENUMERATION_CAP).unwrap().tables(),
            e.tables()
        );
    }

    #[test]
    fn table_json_shape() {
        let t = OracleTable::new(4, vec![3, 1, 0]).unwrap();
        assert_eq!(t.to_json().unwrap(), r#"{"n":3,"m":4,"entries":[3,1,0]}"#);
        assert_eq!(OracleTable::from_json(&t.to_json().unwrap()).unwrap(), t);
        assert!(OracleTable::from_json(r#"{"n":2,"m":2,"entries":[0,2]}"#).is_err());
        assert!(OracleTable::from_json(r#"{"n":3,"m":2,"entries":[0,1]}"#).is_err());
    }

    #[test]
    fn oracle_step_examples() {
        let h = OracleTable::new(2, vec![1, 0]).unwrap();
        let layout = xy_layout(2, 2);
        // index = x * 2 + y
        let out = oracle_unitary_step(&h, &basis_state(4, 0), &layout, "x", "y").unwrap();
        assert_eq!(out, basis_state(4, 1));
        let out = oracle_unitary_step(&h, &basis_state(4, 3), &layout, "x", "y").unwrap();
        assert_eq!(out, basis_state(4, 3));
    }

    #[test]
    fn oracle_step_is_involution_for_binary_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = xy_layout(3, 2);
        for h in enumerate_oracles(3, 2).unwrap().tables() {
            let psi = random_state(6, &mut rng);
            let once = oracle_unitary_step(h, &psi, &layout, "x", "y").unwrap();
            let twice = oracle_unitary_step(h, &once, &layout, "x", "y").unwrap();
            assert!(crate::linalg::distance(&twice, &psi) < 1e-14);
            assert!((norm(&once) - norm(&psi)).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_step_is_a_permutation_matrix() {
        let layout = xy_layout(2, 3);
        for h in enumerate_oracles(2, 3).unwrap().tables() {
            let mut hit = [false; 6];
            for col in 0..6 {
                let out = oracle_unitary_step(h, &basis_state(6, col), &layout, "x", "y").unwrap();
                let ones: Vec<_> = out.iter().enumerate().filter(|(_, a)| a.norm() > 0.5).collect();
                assert_eq!(ones.len(), 1);
                assert!(out.iter().all(|a| *a == ZERO || (*a - crate::linalg::ONE).norm() < 1e-15));
                assert!(!hit[ones[0].0]);
                hit[ones[0].0] = true;
            }
        }
    }

    #[test]
    fn oracle_step_rejects_wrong_dims() {
        let h = OracleTable::new(2, vec![1, 0, 1]).unwrap();
        let layout = xy_layout(2, 2);
        assert!(matches!(
            oracle_unitary_step(&h, &basis_state(4, 0), &layout, "x", "y"),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn salted_view_slices() {
        let inner = OracleTable::new(4, vec![3, 1, 0, 2]).unwrap();
        let h = SaltedOracleTable::new(2, inner.clone()).unwrap();
        assert_eq!(salted_view(&h, 1).unwrap().entries(), &[0, 2]);
        assert_eq!(salted_view(&h, 0).unwrap().entries(), &[3, 1]);
        assert!(matches!(salted_view(&h, 2), Err(Error::SaltOutOfRange { .. })));
        let one = SaltedOracleTable::new(1, inner.clone()).unwrap();
        assert_eq!(salted_view(&one, 0).unwrap(), inner);
        let slice = SaltSlice::new(&inner, 1, 2).unwrap();
        assert_eq!((slice.query(0), slice.query(1)), (0, 2));
    }

    #[test]
    fn lazy_oracle_is_consistent_and_replayable() {
        let mut o = LazyOracle::new(50, 7, 5);
        let a = o.query(3);
        assert_eq!(o.query(3), a);
        assert_eq!(o.assigned().len(), 1);
        for x in [10, 11, 12, 3, 10] {
            o.query(x);
        }
        assert_eq!(o.assigned().len(), 4);
        assert_eq!(o.peek(40), None);

        let run = |seed| {
            let mut o = LazyOracle::new(50, 7, seed);
            [4, 9, 4, 1].map(|x| o.query(x))
        };
        assert_eq!(run(17), run(17));
    }

    #[test]
    fn lazy_fixings_are_respected() {
        let mut o = LazyOracle::new(4, 2, 0);
        o.fix(2, 1).unwrap();
        assert_eq!(o.query(2), 1);
        assert!(o.fix(2, 0).is_err());
        let t = o.into_table();
        assert_eq!(t.entries()[2], 1);
        assert_eq!(t.domain_size(), 4);
    }
}

use std::collections::HashMap;

use super::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{basis_state, norm, StateVector, C64, ZERO};
use crate::oracle::{OracleEnsemble, OracleTable};

const UNIT_TOL: f64 = 1e-10;

/// Oracle-dependent advice `H ↦ |σ_H⟩` on the advice labels.
#[derive(Clone, Debug)]
pub enum AdviceFamily {
    /// `|0…0⟩` for every oracle: a uniform algorithm.
    Uniform,
    Explicit(ExplicitAdvice),
    /// Guess the advice: run on the maximally mixed state over the advice register.
    /// The wrapped family is the one being guessed; it does not change the run.
    MaximallyMixedRun(Box<AdviceFamily>),
}

/// An explicit table of advice vectors, keyed by oracle.
#[derive(Clone, Debug)]
pub struct ExplicitAdvice {
    dim: usize,
    states: HashMap<OracleTable, StateVector>,
}

impl ExplicitAdvice {
    pub fn new(dim: usize) -> Self {
        Self { dim, states: HashMap::new() }
    }

    pub fn insert(&mut self, h: OracleTable, state: StateVector) -> Result<()> {
        if state.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "advice vector has dimension {}, expected {}",
                state.len(),
                self.dim
            )));
        }
        if (norm(&state) - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidAdvice(format!("advice vector has norm {}", norm(&state))));
        }
        self.states.insert(h, state);
        Ok(())
    }

    /// Builds advice for every oracle in `ensemble` from `f`.
    pub fn from_fn(
        ensemble: &OracleEnsemble,
        dim: usize,
        mut f: impl FnMut(&OracleTable) -> StateVector,
    ) -> Result<Self> {
        let mut adv = Self::new(dim);
        for h in ensemble.tables() {
            adv.insert(h.clone(), f(h))?;
        }
        Ok(adv)
    }

    /// `|0⟩` for every oracle in `ensemble`; equivalent to [`AdviceFamily::Uniform`].
    pub fn constant_zero(ensemble: &OracleEnsemble, dim: usize) -> Result<Self> {
        Self::from_fn(ensemble, dim, |_| basis_state(dim, 0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, h: &OracleTable) -> Result<&StateVector> {
        self.states
            .get(h)
            .ok_or_else(|| Error::InvalidAdvice(format!("no advice for oracle {:?}", h.entries())))
    }
}

impl AdviceFamily {
    /// `|σ_H⟩` on the advice register, for pure families.
    pub fn advice_vector(&self, h: &OracleTable, advice_dim: usize) -> Result<StateVector> {
        match self {
            AdviceFamily::Uniform => Ok(basis_state(advice_dim, 0)),
            AdviceFamily::Explicit(e) => {
                if e.dim != advice_dim {
                    return Err(Error::DimensionMismatch(format!(
                        "advice family has dimension {}, layout advice register {advice_dim}",
                        e.dim
                    )));
                }
                e.get(h).cloned()
            }
            AdviceFamily::MaximallyMixedRun(_) => Err(Error::InvalidAdvice(
                "maximally mixed advice has no single vector".into(),
            )),
        }
    }
}

/// A start state of `A`: pure, or a classical mixture of pure branches.
#[derive(Clone, Debug, PartialEq)]
pub enum StartState {
    Pure(StateVector),
    Mixture(Vec<(f64, StateVector)>),
}

impl StartState {
    pub fn branches(&self) -> Vec<(f64, &StateVector)> {
        match self {
            StartState::Pure(v) => vec![(1.0, v)],
            StartState::Mixture(b) => b.iter().map(|(w, v)| (*w, v)).collect(),
        }
    }
}

/// `|σ_H⟩ ⊗ |0…0⟩_work`, or the `d_S`-branch mixture for a maximally mixed run.
pub fn prepare_start_state(
    adv: &AdviceFamily,
    layout: &RegisterLayout,
    h: &OracleTable,
) -> Result<StartState> {
    let d_s = layout.advice_dim();
    match adv {
        AdviceFamily::MaximallyMixedRun(inner) => {
            if let AdviceFamily::Explicit(e) = inner.as_ref() {
                if e.dim != d_s {
                    return Err(Error::DimensionMismatch(format!(
                        "wrapped advice has dimension {}, layout advice register {d_s}",
                        e.dim
                    )));
                }
            }
            let w = 1.0 / d_s as f64;
            Ok(StartState::Mixture(
                (0..d_s).map(|a| (w, basis_state(layout.total_dim(), layout.embed_advice(a)))).collect(),
            ))
        }
        _ => {
            let sigma = adv.advice_vector(h, d_s)?;
            Ok(StartState::Pure(embed(layout, &sigma)))
        }
    }
}

/// Embeds an advice-register vector as `σ ⊗ |0…0⟩_work`.
pub fn embed(layout: &RegisterLayout, sigma: &[C64]) -> StateVector {
    let mut psi = vec![ZERO; layout.total_dim()];
    for (a, amp) in sigma.iter().enumerate() {
        psi[layout.embed_advice(a)] = *amp;
    }
    psi
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game;

/// Largest total register dimension the dense simulator accepts.
pub const DEFAULT_MAX_DIM: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self { label: label.into(), dim }
    }
}

/// Labeled subsystems of the adversary's register `A`.
///
/// Basis indices are mixed-radix with the first subsystem most significant.
/// Advice labels hold `|σ_H⟩`; work labels start in `|0…0⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout", into = "RawLayout")]
pub struct RegisterLayout {
    subsystems: Vec<Subsystem>,
    advice: Vec<String>,
    work: Vec<String>,
    answer: String,
    strides: Vec<usize>,
    total: usize,
}

#[derive(Serialize, Deserialize)]
struct RawLayout {
    subsystems: Vec<Subsystem>,
    advice: Vec<String>,
    #[serde(default)]
    work: Vec<String>,
    answer: String,
}

impl TryFrom<RawLayout> for RegisterLayout {
    type Error = Error;
    fn try_from(r: RawLayout) -> Result<Self> {
        RegisterLayout::new(r.subsystems, r.advice, r.work, &r.answer)
    }
}

impl From<RegisterLayout> for RawLayout {
    fn from(l: RegisterLayout) -> Self {
        RawLayout { subsystems: l.subsystems, advice: l.advice, work: l.work, answer: l.answer }
    }
}

impl RegisterLayout {
    pub fn new(
        subsystems: Vec<Subsystem>,
        advice: Vec<String>,
        work: Vec<String>,
        answer: &str,
    ) -> Result<Self> {
        Self::with_max_dim(subsystems, advice, work, answer, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(
        subsystems: Vec<Subsystem>,
        advice: Vec<String>,
        work: Vec<String>,
        answer: &str,
        max_dim: usize,
    ) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::InvalidLayout("no subsystems".into()));
        }
        let mut labels: Vec<&str> = subsystems.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidLayout("duplicate labels".into()));
        }
        if let Some(s) = subsystems.iter().find(|s| s.dim == 0) {
            return Err(Error::InvalidLayout(format!("subsystem `{}` has dimension 0", s.label)));
        }
        let mut assigned: Vec<&str> = advice.iter().chain(work.iter()).map(String::as_str).collect();
        assigned.sort_unstable();
        if assigned != labels {
            return Err(Error::InvalidLayout(
                "advice and work labels must partition the subsystems".into(),
            ));
        }
        if !labels.contains(&answer) {
            return Err(Error::InvalidLayout(format!("answer label `{answer}` is not a subsystem")));
        }
        let mut total: usize = 1;
        for s in &subsystems {
            total = total
                .checked_mul(s.dim)
                .filter(|&t| t <= max_dim)
                .ok_or(Error::CapExceeded { requested: u128::MAX, cap: max_dim as u128 })?;
        }
        let mut strides = vec![1; subsystems.len()];
        for i in (0..subsystems.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * subsystems[i + 1].dim;
        }
        Ok(Self { subsystems, advice, work, answer: answer.to_string(), strides, total })
    }

    /// A single subsystem that is both the advice and the answer register.
    pub fn answer_only(dim: usize) -> Result<Self> {
        Self::new(vec![Subsystem::new("ans", dim)], vec!["ans".into()], vec![], "ans")
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn advice_labels(&self) -> &[String] {
        &self.advice
    }

    pub fn work_labels(&self) -> &[String] {
        &self.work
    }

    pub fn answer_label(&self) -> &str {
        &self.answer
    }

    /// `D = d_S · d_L`.
    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// `d_S`.
    pub fn advice_dim(&self) -> usize {
        self.advice.iter().map(|l| self.dim_of(l).unwrap()).product()
    }

    /// `d_L`.
    pub fn work_dim(&self) -> usize {
        self.work.iter().map(|l| self.dim_of(l).unwrap()).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::InvalidLayout(format!("unknown label `{label}`")))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    pub fn stride_and_dim(&self, label: &str) -> Result<(usize, usize)> {
        let p = self.position(label)?;
        Ok((self.strides[p], self.subsystems[p].dim))
    }

    pub fn digit(&self, index: usize, label: &str) -> Result<usize> {
        let (stride, dim) = self.stride_and_dim(label)?;
        Ok((index / stride) % dim)
    }

    pub fn answer_of(&self, index: usize) -> usize {
        self.digit(index, &self.answer).unwrap()
    }

    /// Full index of `|a⟩_advice ⊗ |0…0⟩_work`, where `a` is mixed-radix over the advice labels.
    pub fn embed_advice(&self, mut a: usize) -> usize {
        let mut idx = 0;
        for label in self.advice.iter().rev() {
            let (stride, dim) = self.stride_and_dim(label).unwrap();
            idx += (a % dim) * stride;
            a /= dim;
        }
        idx
    }

    pub fn check_against(&self, game: &Game) -> Result<()> {
        let dim = self.dim_of(&self.answer)?;
        if dim != game.answer_count() {
            return Err(Error::DimensionMismatch(format!(
                "answer register `{}` has dimension {dim}, game {game} has {} answers",
                self.answer,
                game.answer_count()
            )));
        }
        Ok(())
    }
}

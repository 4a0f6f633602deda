use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{unitarity_error, CMatrix, StateVector, C64, ZERO};
use crate::oracle::{apply_oracle, check_oracle_dims, OracleAccess};

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// A local gate on the listed subsystems; the first target is the most significant.
    Unitary { targets: Vec<String>, matrix: CMatrix },
    /// `U_H` with query input `x` and output `y`.
    OracleCall { x: String, y: String },
}

#[derive(Clone, Debug)]
enum Compiled {
    Unitary { offsets: Vec<usize>, bases: Vec<usize>, matrix: Vec<C64>, adjoint: Vec<C64> },
    Oracle { x_stride: usize, x_dim: usize, y_stride: usize, y_dim: usize, x: String, y: String },
}

#[derive(Clone, Debug)]
struct Program {
    steps: Vec<Step>,
    compiled: Vec<Compiled>,
    queries: usize,
}

/// An adversary's per-challenge unitaries `U_ch` as explicit gate lists.
#[derive(Clone, Debug)]
pub struct StrategyCircuit {
    layout: RegisterLayout,
    programs: BTreeMap<usize, Program>,
    default: Option<Program>,
}

impl StrategyCircuit {
    pub fn new(
        layout: RegisterLayout,
        programs: BTreeMap<usize, Vec<Step>>,
        default: Option<Vec<Step>>,
    ) -> Result<Self> {
        let programs = programs
            .into_iter()
            .map(|(ch, steps)| Ok((ch, compile(&layout, steps)?)))
            .collect::<Result<_>>()?;
        let default = default.map(|s| compile(&layout, s)).transpose()?;
        Ok(Self { layout, programs, default })
    }

    /// The empty program for every challenge: the answer is read straight off the start state.
    pub fn identity(layout: RegisterLayout) -> Self {
        Self::new(layout, BTreeMap::new(), Some(vec![])).unwrap()
    }

    /// The same step list for every challenge.
    pub fn uniform(layout: RegisterLayout, steps: Vec<Step>) -> Result<Self> {
        Self::new(layout, BTreeMap::new(), Some(steps))
    }

    /// Zero-query lookup: registers `adv` (advice, dim `advice_dim`) and `ans` (work, dim
    /// `answer_dim`); on challenge `ch` it maps `|a, z⟩ ↦ |a, z + table[ch][a] mod A⟩`.
    pub fn lookup(advice_dim: usize, answer_dim: usize, table: &[Vec<usize>]) -> Result<Self> {
        let layout = RegisterLayout::new(
            vec![super::Subsystem::new("adv", advice_dim), super::Subsystem::new("ans", answer_dim)],
            vec!["adv".into()],
            vec!["ans".into()],
            "ans",
        )?;
        let dim = advice_dim * answer_dim;
        let mut programs = BTreeMap::new();
        for (ch, row) in table.iter().enumerate() {
            if row.len() != advice_dim {
                return Err(Error::InvalidParameter(format!(
                    "lookup row for challenge {ch} has {} entries, expected {advice_dim}",
                    row.len()
                )));
            }
            let mut m = CMatrix::zeros(dim, dim);
            for a in 0..advice_dim {
                for z in 0..answer_dim {
                    let to = a * answer_dim + (z + row[a]) % answer_dim;
                    m[(to, a * answer_dim + z)] = C64::new(1.0, 0.0);
                }
            }
            programs.insert(
                ch,
                vec![Step::Unitary { targets: vec!["adv".into(), "ans".into()], matrix: m }],
            );
        }
        Self::new(layout, programs, None)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    /// `T`: the largest number of oracle calls over all programs.
    pub fn query_count(&self) -> usize {
        self.programs
            .values()
            .chain(self.default.iter())
            .map(|p| p.queries)
            .max()
            .unwrap_or(0)
    }

    pub fn queries_for(&self, challenge: usize) -> Result<usize> {
        Ok(self.program(challenge)?.queries)
    }

    pub fn steps_for(&self, challenge: usize) -> Result<&[Step]> {
        Ok(&self.program(challenge)?.steps)
    }

    fn program(&self, challenge: usize) -> Result<&Program> {
        self.programs
            .get(&challenge)
            .or(self.default.as_ref())
            .ok_or(Error::UnknownChallenge(challenge))
    }

    /// Applies `U_ch` to `state`.
    pub fn apply(&self, challenge: usize, h: &dyn OracleAccess, state: &[C64]) -> Result<StateVector> {
        Ok(self.run(challenge, h, state, false)?.0)
    }

    /// Applies `U_ch†`: steps in reverse order, gates conjugate-transposed, oracle inverted.
    pub fn apply_adjoint(&self, challenge: usize, h: &dyn OracleAccess, state: &[C64]) -> Result<StateVector> {
        Ok(self.run(challenge, h, state, true)?.0)
    }

    /// Like [`apply`](Self::apply) but also returns the number of coherent oracle calls executed.
    pub fn apply_counted(
        &self,
        challenge: usize,
        h: &dyn OracleAccess,
        state: &[C64],
        adjoint: bool,
    ) -> Result<(StateVector, usize)> {
        self.run(challenge, h, state, adjoint)
    }

    fn run(
        &self,
        challenge: usize,
        h: &dyn OracleAccess,
        state: &[C64],
        adjoint: bool,
    ) -> Result<(StateVector, usize)> {
        let program = self.program(challenge)?;
        if state.len() != self.layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "state has dimension {}, layout {}",
                state.len(),
                self.layout.total_dim()
            )));
        }
        let mut psi = state.to_vec();
        let mut calls = 0;
        let mut apply_step = |step: &Compiled| -> Result<()> {
            psi = match step {
                Compiled::Unitary { offsets, bases, matrix, adjoint: adj } => {
                    apply_local(&psi, offsets, bases, if adjoint { adj } else { matrix })
                }
                Compiled::Oracle { x_stride, x_dim, y_stride, y_dim, x, y } => {
                    check_oracle_dims(h, x, *x_dim, y, *y_dim)?;
                    calls += 1;
                    apply_oracle(h, &psi, *x_stride, *x_dim, *y_stride, *y_dim, adjoint)
                }
            };
            Ok(())
        };
        if adjoint {
            program.compiled.iter().rev().try_for_each(&mut apply_step)?;
        } else {
            program.compiled.iter().try_for_each(&mut apply_step)?;
        }
        Ok((psi, calls))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StrategyFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&StrategyFile::from(self))?)
    }
}

fn apply_local(psi: &[C64], offsets: &[usize], bases: &[usize], matrix: &[C64]) -> StateVector {
    let k = offsets.len();
    let mut out = vec![ZERO; psi.len()];
    let mut gathered = vec![ZERO; k];
    for &base in bases {
        for (g, off) in gathered.iter_mut().zip(offsets) {
            *g = psi[base + off];
        }
        for (i, off) in offsets.iter().enumerate() {
            let row = &matrix[i * k..(i + 1) * k];
            out[base + off] = row.iter().zip(&gathered).map(|(m, v)| m * v).sum();
        }
    }
    out
}

fn compile(layout: &RegisterLayout, steps: Vec<Step>) -> Result<Program> {
    let mut compiled = Vec::with_capacity(steps.len());
    let mut queries = 0;
    for step in &steps {
        compiled.push(match step {
            Step::Unitary { targets, matrix } => {
                let mut seen = targets.clone();
                seen.sort();
                seen.dedup();
                if seen.len() != targets.len() || targets.is_empty() {
                    return Err(Error::InvalidLayout("gate targets must be distinct and non-empty".into()));
                }
                let sd: Vec<(usize, usize)> =
                    targets.iter().map(|t| layout.stride_and_dim(t)).collect::<Result<_>>()?;
                let k: usize = sd.iter().map(|&(_, d)| d).product();
                if matrix.nrows() != k || matrix.ncols() != k {
                    return Err(Error::DimensionMismatch(format!(
                        "gate on {targets:?} needs a {k}×{k} matrix, got {}×{}",
                        matrix.nrows(),
                        matrix.ncols()
                    )));
                }
                let err = unitarity_error(matrix);
                if err > UNITARY_TOL {
                    return Err(Error::NotUnitary(err));
                }
                let offsets: Vec<usize> = (0..k)
                    .map(|mut t| {
                        let mut off = 0;
                        for &(stride, dim) in sd.iter().rev() {
                            off += (t % dim) * stride;
                            t /= dim;
                        }
                        off
                    })
                    .collect();
                let bases = (0..layout.total_dim())
                    .filter(|&i| sd.iter().all(|&(stride, dim)| (i / stride) % dim == 0))
                    .collect();
                let row_major = |m: &CMatrix| {
                    (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
                };
                Compiled::Unitary {
                    offsets,
                    bases,
                    matrix: row_major(matrix),
                    adjoint: row_major(&matrix.adjoint()),
                }
            }
            Step::OracleCall { x, y } => {
                if x == y {
                    return Err(Error::InvalidLayout("oracle input and output must differ".into()));
                }
                let (x_stride, x_dim) = layout.stride_and_dim(x)?;
                let (y_stride, y_dim) = layout.stride_and_dim(y)?;
                queries += 1;
                Compiled::Oracle { x_stride, x_dim, y_stride, y_dim, x: x.clone(), y: y.clone() }
            }
        });
    }
    Ok(Program { steps, compiled, queries })
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    #[serde(flatten)]
    layout: RegisterLayout,
    programs: BTreeMap<String, Vec<StepFile>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum StepFile {
    /// Row-major `[re, im]` pairs.
    Unitary { targets: Vec<String>, matrix: Vec<[f64; 2]> },
    Oracle { x: String, y: String },
}

impl TryFrom<StrategyFile> for StrategyCircuit {
    type Error = Error;

    fn try_from(file: StrategyFile) -> Result<Self> {
        let convert = |steps: Vec<StepFile>| -> Result<Vec<Step>> {
            steps
                .into_iter()
                .map(|s| match s {
                    StepFile::Oracle { x, y } => Ok(Step::OracleCall { x, y }),
                    StepFile::Unitary { targets, matrix } => {
                        let k = (matrix.len() as f64).sqrt().round() as usize;
                        if k * k != matrix.len() {
                            return Err(Error::DimensionMismatch(format!(
                                "gate matrix has {} entries, not a square",
                                matrix.len()
                            )));
                        }
                        let m = CMatrix::from_row_iterator(
                            k,
                            k,
                            matrix.iter().map(|[re, im]| C64::new(*re, *im)),
                        );
                        Ok(Step::Unitary { targets, matrix: m })
                    }
                })
                .collect()
        };
        let mut programs = BTreeMap::new();
        let mut default = None;
        for (key, steps) in file.programs {
            let steps = convert(steps)?;
            if key == "default" {
                default = Some(steps);
            } else {
                let ch: usize = key
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("program key `{key}` is not a challenge")))?;
                programs.insert(ch, steps);
            }
        }
        StrategyCircuit::new(file.layout, programs, default)
    }
}

impl From<&StrategyCircuit> for StrategyFile {
    fn from(s: &StrategyCircuit) -> Self {
        let convert = |p: &Program| {
            p.steps
                .iter()
                .map(|step| match step {
                    Step::OracleCall { x, y } => StepFile::Oracle { x: x.clone(), y: y.clone() },
                    Step::Unitary { targets, matrix } => StepFile::Unitary {
                        targets: targets.clone(),
                        matrix: (0..matrix.nrows())
                            .flat_map(|i| (0..matrix.ncols()).map(move |j| (i, j)))
                            .map(|(i, j)| [matrix[(i, j)].re, matrix[(i, j)].im])
                            .collect(),
                    },
                })
                .collect()
        };
        let mut programs: BTreeMap<String, Vec<StepFile>> =
            s.programs.iter().map(|(ch, p)| (ch.to_string(), convert(p))).collect();
        if let Some(d) = &s.default {
            programs.insert("default".into(), convert(d));
        }
        StrategyFile { layout: s.layout.clone(), programs }
    }
}

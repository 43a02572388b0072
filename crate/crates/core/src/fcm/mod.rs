//! Fuzzy cognitive maps: a directed graph of concepts whose edge weights in
//! [-1, 1] encode causal influence, iterated as
//! `C_j(t+1) = sigmoid(lambda * sum_i w[i][j] * C_i(t))`.
//!
//! Row `i` of the cognitive matrix is the cause and column `j` the effect.

mod linguistic;
mod scenario;

pub use linguistic::LinguisticScale;
pub use scenario::{scenario_compare, ScenarioComparison};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::sigmoid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: usize,
    pub name: String,
}

impl Concept {
    pub fn new(id: usize, name: impl Into<String>) -> Self {
        Concept { id, name: name.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FcmConfig {
    /// Steepness of the squashing sigmoid.
    pub lambda: f64,
    pub allow_self_loops: bool,
    /// Convergence tolerance on the max-abs change between states.
    pub eps: f64,
    pub max_iters: usize,
}

impl Default for FcmConfig {
    fn default() -> Self {
        FcmConfig {
            lambda: 1.0,
            allow_self_loops: false,
            eps: 1e-6,
            max_iters: 100,
        }
    }
}

impl FcmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Validation(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Validation(format!("eps must be positive, got {}", self.eps)));
        }
        Ok(())
    }
}

/// Square weight matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CognitiveMatrix {
    n: usize,
    weights: Vec<f64>,
}

impl CognitiveMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Validation("cognitive matrix must have at least one concept".into()));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Validation(format!(
                "cognitive matrix is not square: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Ok(CognitiveMatrix {
            n,
            weights: rows.concat(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Influence of concept `cause` on concept `effect`.
    pub fn get(&self, cause: usize, effect: usize) -> f64 {
        self.weights[cause * self.n + effect]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks_exact(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// Concept activity levels, each in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ActivationVector(Vec<f64>);

impl ActivationVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("activation {i} = {v} is outside [0, 1]")));
        }
        Ok(ActivationVector(values))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        ActivationVector::new(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs_diff(&self, other: &ActivationVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Copy with component `index` replaced.
    pub fn with(&self, index: usize, value: f64) -> Result<Self> {
        if index >= self.0.len() {
            return Err(Error::Input(format!("concept index {index} out of range for {} concepts", self.0.len())));
        }
        let mut v = self.0.clone();
        v[index] = value;
        ActivationVector::new(v)
    }
}

impl TryFrom<Vec<f64>> for ActivationVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ActivationVector::new(v)
    }
}

impl From<ActivationVector> for Vec<f64> {
    fn from(v: ActivationVector) -> Self {
        v.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FixedPoint,
    /// Current state revisits the state `period` steps earlier.
    LimitCycle(usize),
    Exhausted,
}

impl Verdict {
    pub fn is_fixed_point(&self) -> bool {
        matches!(self, Verdict::FixedPoint)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `C(0), C(1), ...`
    pub states: Vec<ActivationVector>,
    pub verdict: Verdict,
}

impl Trajectory {
    pub fn final_state(&self) -> &ActivationVector {
        self.states.last().expect("a trajectory always holds its initial state")
    }

    pub fn iterations(&self) -> usize {
        self.states.len() - 1
    }
}

/// Validated map `G = {E, W}` plus its simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Fcm {
    concepts: Vec<Concept>,
    matrix: CognitiveMatrix,
    config: FcmConfig,
}

impl Fcm {
    /// Validates concept ids, squareness, the [-1, 1] weight range and the
    /// zero-diagonal rule (unless self-loops are enabled).
    pub fn build(concepts: Vec<Concept>, weights: &[Vec<f64>], config: FcmConfig) -> Result<Self> {
        config.validate()?;
        for (i, c) in concepts.iter().enumerate() {
            if c.id != i {
                return Err(Error::Validation(format!(
                    "concept ids must be 0..n in order; position {i} has id {}",
                    c.id
                )));
            }
            if c.name.trim().is_empty() {
                return Err(Error::Validation(format!("concept {i} has an empty name")));
            }
        }
        let matrix = CognitiveMatrix::from_rows(weights)?;
        if matrix.size() != concepts.len() {
            return Err(Error::Validation(format!(
                "{} concepts but the matrix is {n}x{n}",
                concepts.len(),
                n = matrix.size()
            )));
        }
        let n = matrix.size();
        for row in 0..n {
            for col in 0..n {
                let value = matrix.get(row, col);
                if !(-1.0..=1.0).contains(&value) {
                    return Err(Error::WeightOutOfRange { row, col, value });
                }
            }
        }
        if !config.allow_self_loops {
            if let Some(index) = (0..n).find(|&i| matrix.get(i, i) != 0.0) {
                return Err(Error::SelfLoop {
                    index,
                    value: matrix.get(index, index),
                });
            }
        }
        Ok(Fcm { concepts, matrix, config })
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn matrix(&self) -> &CognitiveMatrix {
        &self.matrix
    }

    pub fn config(&self) -> &FcmConfig {
        &self.config
    }

    pub fn size(&self) -> usize {
        self.concepts.len()
    }

    /// Same map with different simulation settings.
    pub fn with_config(&self, config: FcmConfig) -> Result<Self> {
        Fcm::build(self.concepts.clone(), &self.matrix.rows(), config)
    }

    pub fn concept_index(&self, name: &str) -> Option<usize> {
        self.concepts.iter().position(|c| c.name == name)
    }

    fn check_state(&self, state: &ActivationVector) -> Result<()> {
        if state.len() != self.size() {
            return Err(Error::dim(
                "fcm state",
                format!("map has {} concepts, state has {}", self.size(), state.len()),
            ));
        }
        Ok(())
    }

    /// One synchronous update of every concept.
    pub fn step(&self, state: &ActivationVector) -> Result<ActivationVector> {
        self.check_state(state)?;
        let n = self.size();
        let c = state.values();
        let next = (0..n)
            .map(|j| {
                let input: f64 = (0..n).map(|i| self.matrix.get(i, j) * c[i]).sum();
                sigmoid(self.config.lambda * input)
            })
            .collect();
        Ok(ActivationVector(next))
    }

    /// Iterates from `initial` for at most `max_iters` steps, stopping at
    /// the first fixed point or revisited state.
    pub fn run(&self, initial: &ActivationVector) -> Result<Trajectory> {
        self.check_state(initial)?;
        let eps = self.config.eps;
        let mut states = vec![initial.clone()];
        for _ in 0..self.config.max_iters {
            let current = states.last().expect("non-empty");
            let next = self.step(current)?;
            if next.max_abs_diff(current) < eps {
                states.push(next);
                return Ok(Trajectory {
                    states,
                    verdict: Verdict::FixedPoint,
                });
            }
            let len = states.len();
            // states[len - 1] is the predecessor, already ruled out above
            let revisit = states[..len - 1].iter().position(|s| next.max_abs_diff(s) < eps);
            states.push(next);
            if let Some(k) = revisit {
                return Ok(Trajectory {
                    states,
                    verdict: Verdict::LimitCycle(len - k),
                });
            }
        }
        Ok(Trajectory {
            states,
            verdict: Verdict::Exhausted,
        })
    }
}

//! Single hidden layer networks with bipolar semi-linear units, built from
//! logic programs so that a forward pass computes one step of the program's
//! immediate consequence operator.

mod recurrent;
mod translate;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::CompileError;

pub use recurrent::{recurrent_run, FeedbackMap, RecurrentOutcome};
pub use translate::{
    cilp_translate, cilp_translate_onto, cilp_translate_recurrent, cilp_weight, literal_label,
    min_activation_bound, ncilp_translate, ncilp_translate_onto, CilpParams, NetworkSchema,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("DimensionMismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("UnknownLabel: no neuron labeled `{0}`")]
    UnknownLabel(String),
    #[error("DuplicateFeedback: `{0}` appears in more than one feedback pair")]
    DuplicateFeedback(String),
    #[error("NonConvergence: no stable state after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("Oscillation: the state repeats with period {period}")]
    Oscillation { period: usize },
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("MalformedNetwork: {0}")]
    MalformedNetwork(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

impl NeuralError {
    pub fn name(&self) -> &'static str {
        match self {
            NeuralError::DimensionMismatch { .. } => "DimensionMismatch",
            NeuralError::UnknownLabel(_) => "UnknownLabel",
            NeuralError::DuplicateFeedback(_) => "DuplicateFeedback",
            NeuralError::NonConvergence { .. } => "NonConvergence",
            NeuralError::Oscillation { .. } => "Oscillation",
            NeuralError::InvalidParameter(_) => "InvalidParameter",
            NeuralError::MalformedNetwork(_) => "MalformedNetwork",
            NeuralError::Compile(e) => e.name(),
        }
    }
}

/// Bipolar semi-linear activation, `2 / (1 + e^(-beta x)) - 1`.
pub fn bipolar(beta: f64, x: f64) -> f64 {
    2.0 / (1.0 + (-beta * x).exp()) - 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub input_labels: Vec<String>,
    pub hidden_labels: Vec<String>,
    pub output_labels: Vec<String>,
    /// `w_ih[h][i]`: input `i` to hidden `h`.
    pub w_ih: Vec<Vec<f64>>,
    /// `w_ho[o][h]`: hidden `h` to output `o`.
    pub w_ho: Vec<Vec<f64>>,
    pub theta_h: Vec<f64>,
    pub theta_o: Vec<f64>,
    pub beta: f64,
    pub a_min: f64,
    /// Body size of the clause behind each hidden neuron.
    #[serde(default)]
    pub body_sizes: Vec<usize>,
    /// Number of clauses with each output as head.
    #[serde(default)]
    pub head_multiplicity: Vec<usize>,
    /// SHA-256 of the source program text.
    #[serde(default)]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub hidden: Vec<f64>,
    pub raw: Vec<f64>,
    pub crisp: Vec<f64>,
}

impl Network {
    pub fn n_inputs(&self) -> usize {
        self.input_labels.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_labels.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.output_labels.len()
    }

    pub fn input_index(&self, label: &str) -> Option<usize> {
        self.input_labels.iter().position(|l| l == label)
    }

    pub fn output_index(&self, label: &str) -> Option<usize> {
        self.output_labels.iter().position(|l| l == label)
    }

    /// Dimensions agree with the label lists and parameters are in range.
    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: String| Err(NeuralError::MalformedNetwork(m));
        let (ni, nh, no) = (self.n_inputs(), self.n_hidden(), self.n_outputs());
        if self.w_ih.len() != nh || self.w_ih.iter().any(|r| r.len() != ni) {
            return bad(format!("w_ih must be {nh} x {ni}"));
        }
        if self.w_ho.len() != no || self.w_ho.iter().any(|r| r.len() != nh) {
            return bad(format!("w_ho must be {no} x {nh}"));
        }
        if self.theta_h.len() != nh || self.theta_o.len() != no {
            return bad("threshold lengths must match layer sizes".into());
        }
        if !self.body_sizes.is_empty() && self.body_sizes.len() != nh {
            return bad("body_sizes must have one entry per hidden neuron".into());
        }
        if !self.head_multiplicity.is_empty() && self.head_multiplicity.len() != no {
            return bad("head_multiplicity must have one entry per output".into());
        }
        if !(self.beta > 0.0) {
            return bad("beta must be positive".into());
        }
        if !(self.a_min > 0.0 && self.a_min < 1.0) {
            return bad("a_min must lie strictly between 0 and 1".into());
        }
        Ok(())
    }

    /// 1 above `a_min`, -1 below `-a_min`, 0 in between.
    pub fn discretize(&self, x: f64) -> f64 {
        if x > self.a_min {
            1.0
        } else if x < -self.a_min {
            -1.0
        } else {
            0.0
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Forward, NeuralError> {
        if input.len() != self.n_inputs() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.n_inputs(),
                found: input.len(),
            });
        }
        let hidden: Vec<f64> = self
            .w_ih
            .iter()
            .zip(&self.theta_h)
            .map(|(row, t)| bipolar(self.beta, dot(row, input) - t))
            .collect();
        let raw: Vec<f64> = self
            .w_ho
            .iter()
            .zip(&self.theta_o)
            .map(|(row, t)| bipolar(self.beta, dot(row, &hidden) - t))
            .collect();
        let crisp = raw.iter().map(|&x| self.discretize(x)).collect();
        Ok(Forward { hidden, raw, crisp })
    }

    /// Same labels and shape, every weight and threshold drawn uniformly
    /// from `[-scale, scale]`.
    pub fn randomized(&self, seed: u64, scale: f64) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = self.clone();
        let mut draw = |x: &mut f64| *x = rng.gen_range(-scale..=scale);
        net.w_ih.iter_mut().flatten().for_each(&mut draw);
        net.w_ho.iter_mut().flatten().for_each(&mut draw);
        net.theta_h.iter_mut().for_each(&mut draw);
        net.theta_o.iter_mut().for_each(&mut draw);
        net.provenance = None;
        net
    }

    /// Add uniform noise from `[-scale, scale]` to every weight and
    /// threshold.
    pub fn perturbed(&self, seed: u64, scale: f64) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = self.clone();
        if scale > 0.0 {
            let mut nudge = |x: &mut f64| *x += rng.gen_range(-scale..=scale);
            net.w_ih.iter_mut().flatten().for_each(&mut nudge);
            net.w_ho.iter_mut().flatten().for_each(&mut nudge);
            net.theta_h.iter_mut().for_each(&mut nudge);
            net.theta_o.iter_mut().for_each(&mut nudge);
        }
        net
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("networks serialize")
    }

    pub fn from_json(s: &str) -> Result<Network, NeuralError> {
        let net: Network =
            serde_json::from_str(s).map_err(|e| NeuralError::MalformedNetwork(e.to_string()))?;
        net.validate()?;
        Ok(net)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

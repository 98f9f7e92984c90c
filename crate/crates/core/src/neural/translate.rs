use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Network, NeuralError};
use crate::compiler::{compile_with, Compilation, CompileOptions, NormativeCode};
use crate::logic::{ExtendedProgram, Literal};

/// Neuron label of a literal: the atom name, primed when classically negated.
pub fn literal_label(l: &Literal) -> String {
    if l.negated {
        format!("{}'", l.atom)
    } else {
        l.atom.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CilpParams {
    pub beta: f64,
    /// Requested activation threshold. Raised when too small for the
    /// program's largest fan-in.
    pub a_min: f64,
    /// Weight multiplier over the lower bound, at least 1.
    pub weight_margin: f64,
}

impl Default for CilpParams {
    fn default() -> Self {
        CilpParams {
            beta: 1.0,
            a_min: 0.5,
            weight_margin: 1.05,
        }
    }
}

/// Smallest admissible activation threshold for fan-in `m`, exclusive.
pub fn min_activation_bound(m: usize) -> f64 {
    let m = m.max(1) as f64;
    (m - 1.0) / (m + 1.0)
}

/// Lower bound on the shared weight magnitude for which units with fan-in
/// at most `m` behave as conjunctions and disjunctions.
pub fn cilp_weight(beta: f64, a_min: f64, m: usize) -> f64 {
    let m = m.max(1) as f64;
    (2.0 / beta) * ((1.0 + a_min).ln() - (1.0 - a_min).ln()) / (m * (a_min - 1.0) + a_min + 1.0)
}

/// The input and output label lists a network is laid out on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSchema {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

fn push_unique(v: &mut Vec<String>, s: String) {
    if !v.contains(&s) {
        v.push(s);
    }
}

impl NetworkSchema {
    /// Body literals as inputs and heads as outputs, in order of first
    /// appearance.
    pub fn of_program(p: &ExtendedProgram) -> Self {
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for c in &p.clauses {
            push_unique(&mut outputs, literal_label(&c.head));
            for b in &c.body {
                push_unique(&mut inputs, literal_label(&b.literal));
            }
        }
        NetworkSchema { inputs, outputs }
    }

    /// Every literal of the program both as input and as output.
    pub fn complete(p: &ExtendedProgram) -> Self {
        let mut labels = Vec::new();
        for c in &p.clauses {
            push_unique(&mut labels, literal_label(&c.head));
            for b in &c.body {
                push_unique(&mut labels, literal_label(&b.literal));
            }
        }
        NetworkSchema {
            inputs: labels.clone(),
            outputs: labels,
        }
    }
}

fn check_params(p: &CilpParams) -> Result<(), NeuralError> {
    if !(p.beta > 0.0 && p.beta.is_finite()) {
        return Err(NeuralError::InvalidParameter(format!("beta must be positive, got {}", p.beta)));
    }
    if !(p.a_min > 0.0 && p.a_min < 1.0) {
        return Err(NeuralError::InvalidParameter(format!(
            "a_min must lie strictly between 0 and 1, got {}",
            p.a_min
        )));
    }
    if !(p.weight_margin >= 1.0 && p.weight_margin.is_finite()) {
        return Err(NeuralError::InvalidParameter(format!(
            "weight margin must be at least 1, got {}",
            p.weight_margin
        )));
    }
    Ok(())
}

/// One hidden neuron per clause, wired from its body literals (negatively
/// for default negation) to its head. All units share the weight magnitude
/// `W`; hidden thresholds are `(1 + A)(k - 1) W / 2` for body size `k`,
/// output thresholds `(1 + A)(1 - mu) W / 2` for `mu` defining clauses.
pub fn cilp_translate_onto(
    p: &ExtendedProgram,
    schema: &NetworkSchema,
    params: &CilpParams,
) -> Result<Network, NeuralError> {
    check_params(params)?;
    let index = |labels: &[String], l: &str| {
        labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| NeuralError::UnknownLabel(l.to_string()))
    };
    let body_sizes: Vec<usize> = p.clauses.iter().map(|c| c.body.len()).collect();
    let mut head_multiplicity = vec![0usize; schema.outputs.len()];
    let mut heads = Vec::with_capacity(p.clauses.len());
    for c in &p.clauses {
        let o = index(&schema.outputs, &literal_label(&c.head))?;
        head_multiplicity[o] += 1;
        heads.push(o);
    }
    let fan_in = body_sizes
        .iter()
        .chain(&head_multiplicity)
        .copied()
        .max()
        .unwrap_or(1)
        .max(1);
    let bound = min_activation_bound(fan_in);
    let a = if params.a_min > bound {
        params.a_min
    } else {
        (bound + 1.0) / 2.0
    };
    let w = cilp_weight(params.beta, a, fan_in) * params.weight_margin;

    let mut w_ih = vec![vec![0.0; schema.inputs.len()]; p.clauses.len()];
    let mut theta_h = Vec::with_capacity(p.clauses.len());
    for (h, c) in p.clauses.iter().enumerate() {
        for b in &c.body {
            let i = index(&schema.inputs, &literal_label(&b.literal))?;
            w_ih[h][i] += if b.default_negated { -w } else { w };
        }
        theta_h.push((1.0 + a) * (c.body.len() as f64 - 1.0) / 2.0 * w);
    }
    let mut w_ho = vec![vec![0.0; p.clauses.len()]; schema.outputs.len()];
    for (h, &o) in heads.iter().enumerate() {
        w_ho[o][h] = w;
    }
    let theta_o = head_multiplicity
        .iter()
        .map(|&mu| (1.0 + a) * (1.0 - mu as f64) / 2.0 * w)
        .collect();
    let hidden_labels = p
        .clauses
        .iter()
        .enumerate()
        .map(|(i, c)| c.label.clone().unwrap_or_else(|| format!("N{}", i + 1)))
        .collect();
    let digest = Sha256::digest(p.to_string().as_bytes());
    let net = Network {
        input_labels: schema.inputs.clone(),
        hidden_labels,
        output_labels: schema.outputs.clone(),
        w_ih,
        w_ho,
        theta_h,
        theta_o,
        beta: params.beta,
        a_min: a,
        body_sizes,
        head_multiplicity,
        provenance: Some(hex::encode(digest)),
    };
    net.validate()?;
    Ok(net)
}

/// Inputs are the body literals and outputs the heads, in order of first
/// appearance.
pub fn cilp_translate(p: &ExtendedProgram, params: &CilpParams) -> Result<Network, NeuralError> {
    cilp_translate_onto(p, &NetworkSchema::of_program(p), params)
}

/// Every literal of the program gets an input and an output neuron, so the
/// network can be run recurrently with same-label feedback.
pub fn cilp_translate_recurrent(p: &ExtendedProgram, params: &CilpParams) -> Result<Network, NeuralError> {
    cilp_translate_onto(p, &NetworkSchema::complete(p), params)
}

/// Compile a normative code and translate the resulting program. Input and
/// output atoms stay in separate namespaces, so there is no feedback.
pub fn ncilp_translate(code: &NormativeCode, params: &CilpParams) -> Result<(Network, Compilation), NeuralError> {
    let c = compile_with(code, &CompileOptions::default())?;
    let net = cilp_translate(&c.program, params)?;
    Ok((net, c))
}

/// As [`ncilp_translate`], laid out on a wider schema; neurons the code
/// does not mention are left unconnected.
pub fn ncilp_translate_onto(
    code: &NormativeCode,
    opts: &CompileOptions,
    schema: &NetworkSchema,
    params: &CilpParams,
) -> Result<(Network, Compilation), NeuralError> {
    let c = compile_with(code, opts)?;
    let net = cilp_translate_onto(&c.program, schema, params)?;
    Ok((net, c))
}

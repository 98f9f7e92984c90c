use std::collections::HashMap;

use super::{Network, NeuralError};

/// Output neurons copied back onto input neurons between passes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeedbackMap {
    /// `(output index, input index)`.
    pub pairs: Vec<(usize, usize)>,
}

impl FeedbackMap {
    pub fn empty() -> Self {
        FeedbackMap::default()
    }

    /// Every output that has an input of the same label feeds it.
    pub fn same_label(net: &Network) -> Self {
        let pairs = net
            .output_labels
            .iter()
            .enumerate()
            .filter_map(|(o, l)| net.input_index(l).map(|i| (o, i)))
            .collect();
        FeedbackMap { pairs }
    }

    pub fn from_labels(net: &Network, pairs: &[(String, String)]) -> Result<Self, NeuralError> {
        let mut out = Vec::new();
        for (o, i) in pairs {
            let oi = net.output_index(o).ok_or_else(|| NeuralError::UnknownLabel(o.clone()))?;
            let ii = net.input_index(i).ok_or_else(|| NeuralError::UnknownLabel(i.clone()))?;
            if out.iter().any(|&(x, _)| x == oi) {
                return Err(NeuralError::DuplicateFeedback(o.clone()));
            }
            if out.iter().any(|&(_, y)| y == ii) {
                return Err(NeuralError::DuplicateFeedback(i.clone()));
            }
            out.push((oi, ii));
        }
        Ok(FeedbackMap { pairs: out })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentOutcome {
    /// Crisp output of the stable state.
    pub output: Vec<f64>,
    /// Crisp input of the stable state.
    pub input: Vec<f64>,
    pub iterations: usize,
}

/// Run forward passes, copying crisp outputs through `fb` into the next
/// input, until the input stops changing. Inputs not fed back keep their
/// initial value. A return to an earlier, different input is reported as
/// an oscillation.
pub fn recurrent_run(
    net: &Network,
    fb: &FeedbackMap,
    initial: &[f64],
    max_iters: usize,
) -> Result<RecurrentOutcome, NeuralError> {
    if initial.len() != net.n_inputs() {
        return Err(NeuralError::DimensionMismatch {
            expected: net.n_inputs(),
            found: initial.len(),
        });
    }
    for &(o, i) in &fb.pairs {
        if o >= net.n_outputs() || i >= net.n_inputs() {
            return Err(NeuralError::UnknownLabel(format!("feedback pair ({o}, {i})")));
        }
    }
    let key = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut input = initial.to_vec();
    for step in 1..=max_iters {
        seen.insert(key(&input), step);
        let out = net.forward(&input)?.crisp;
        let mut next = input.clone();
        for &(o, i) in &fb.pairs {
            next[i] = out[o];
        }
        if next == input {
            return Ok(RecurrentOutcome {
                output: out,
                input,
                iterations: step,
            });
        }
        if let Some(&first) = seen.get(&key(&next)) {
            return Err(NeuralError::Oscillation {
                period: step + 1 - first,
            });
        }
        input = next;
    }
    Err(NeuralError::NonConvergence {
        iterations: max_iters,
    })
}

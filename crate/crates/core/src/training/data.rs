use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TrainingError;
use crate::logic::{AnswerSetSolver, Atom, ExtendedProgram, Literal, LiteralSet};
use crate::neural::{literal_label, NetworkSchema};

/// Largest number of atoms [`enumerate_worlds`] will enumerate.
pub const WORLD_LIMIT: usize = 24;

/// A crisp input vector and its target, valued in `{-1, 0, 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl Example {
    pub fn new(input: Vec<f64>, target: Vec<f64>) -> Self {
        Example { input, target }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub examples: Vec<Example>,
}

fn crisp(x: f64) -> Option<i8> {
    if x == 1.0 {
        Some(1)
    } else if x == 0.0 {
        Some(0)
    } else if x == -1.0 {
        Some(-1)
    } else {
        None
    }
}

impl Dataset {
    /// Header cells `in:<label>` and `out:<label>`, one example per row.
    pub fn to_csv(&self) -> Result<String, TrainingError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| TrainingError::MalformedDataset(e.to_string());
        let header: Vec<String> = self
            .input_labels
            .iter()
            .map(|l| format!("in:{l}"))
            .chain(self.output_labels.iter().map(|l| format!("out:{l}")))
            .collect();
        w.write_record(&header).map_err(err)?;
        for ex in &self.examples {
            let mut row = Vec::with_capacity(header.len());
            for &x in ex.input.iter().chain(&ex.target) {
                let v = crisp(x).ok_or_else(|| TrainingError::MalformedDataset(format!("value {x} is not crisp")))?;
                row.push(v.to_string());
            }
            w.write_record(&row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| TrainingError::MalformedDataset(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii output"))
    }

    pub fn from_csv(text: &str) -> Result<Dataset, TrainingError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let bad = |m: String| TrainingError::MalformedDataset(m);
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        let mut columns = Vec::new();
        let (mut input_labels, mut output_labels) = (Vec::new(), Vec::new());
        for cell in header.iter() {
            if let Some(l) = cell.strip_prefix("in:") {
                columns.push(true);
                input_labels.push(l.to_string());
            } else if let Some(l) = cell.strip_prefix("out:") {
                columns.push(false);
                output_labels.push(l.to_string());
            } else {
                return Err(bad(format!("header cell `{cell}` lacks an `in:` or `out:` prefix")));
            }
        }
        let mut examples = Vec::new();
        for (row_no, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let mut ex = Example::new(Vec::new(), Vec::new());
            for (cell, &is_in) in rec.iter().zip(&columns) {
                let x: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("row {}: `{cell}` is not a number", row_no + 2)))?;
                if crisp(x).is_none() {
                    return Err(bad(format!("row {}: {x} is not one of -1, 0, 1", row_no + 2)));
                }
                if is_in {
                    ex.input.push(x);
                } else {
                    ex.target.push(x);
                }
            }
            examples.push(ex);
        }
        Ok(Dataset {
            input_labels,
            output_labels,
            examples,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub dataset: Dataset,
    /// Contexts without a consistent answer set: index and reason.
    pub skipped: Vec<(usize, String)>,
}

/// One example per context. The input is 1 at every context literal and
/// -1 elsewhere; the target is 1 at every output literal in the answer set
/// of the program plus the context as facts, and -1 elsewhere. Contexts
/// whose answer set is inconsistent are skipped and listed.
pub fn generate_dataset(
    program: &ExtendedProgram,
    contexts: &[LiteralSet],
    schema: &NetworkSchema,
) -> Result<GeneratedDataset, TrainingError> {
    let solver = AnswerSetSolver::new(program)?;
    let index = |labels: &[String]| -> HashMap<String, usize> {
        labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect()
    };
    let (in_ix, out_ix) = (index(&schema.inputs), index(&schema.outputs));
    let rows: Vec<Result<Example, String>> = contexts
        .par_iter()
        .map(|ctx| {
            let mut input = vec![-1.0; schema.inputs.len()];
            for l in ctx {
                if let Some(&i) = in_ix.get(&literal_label(l)) {
                    input[i] = 1.0;
                }
            }
            match solver.solve_with(ctx) {
                Ok(set) => {
                    let mut target = vec![-1.0; schema.outputs.len()];
                    for l in &set {
                        if let Some(&o) = out_ix.get(&literal_label(l)) {
                            target[o] = 1.0;
                        }
                    }
                    Ok(Example::new(input, target))
                }
                Err(e) => Err(e.to_string()),
            }
        })
        .collect();
    let mut examples = Vec::new();
    let mut skipped = Vec::new();
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok(ex) => examples.push(ex),
            Err(reason) => skipped.push((i, reason)),
        }
    }
    Ok(GeneratedDataset {
        dataset: Dataset {
            input_labels: schema.inputs.clone(),
            output_labels: schema.outputs.clone(),
            examples,
        },
        skipped,
    })
}

/// The total world given by `bits`: bit `i` set makes `atoms[i]` true,
/// clear makes its classical negation true.
pub fn world_context(atoms: &[Atom], bits: u64) -> LiteralSet {
    atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if bits >> i & 1 == 1 {
                Literal::pos(a.clone())
            } else {
                Literal::neg(a.clone())
            }
        })
        .collect()
}

/// All `2^n` total worlds over `atoms`, in binary counting order.
pub fn enumerate_worlds(atoms: &[Atom]) -> Result<Vec<LiteralSet>, TrainingError> {
    if atoms.len() > WORLD_LIMIT {
        return Err(TrainingError::InvalidConfig(format!(
            "{} atoms is too many to enumerate (limit {WORLD_LIMIT})",
            atoms.len()
        )));
    }
    Ok((0..1u64 << atoms.len()).map(|b| world_context(atoms, b)).collect())
}

/// `n` worlds drawn uniformly, with replacement.
pub fn sample_worlds<R: Rng>(atoms: &[Atom], n: usize, rng: &mut R) -> Vec<LiteralSet> {
    (0..n)
        .map(|_| {
            let bits = if atoms.len() >= 64 { rng.gen() } else { rng.gen_range(0..1u64 << atoms.len()) };
            world_context(atoms, bits)
        })
        .collect()
}

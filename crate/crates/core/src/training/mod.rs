//! Backpropagation with momentum, the tot/part accuracy measures,
//! cross-validation, and example generation from logic programs.

mod data;
mod metrics;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::LogicError;
use crate::neural::{Network, NeuralError};

pub use data::{
    enumerate_worlds, generate_dataset, sample_worlds, world_context, Dataset, Example, GeneratedDataset,
};
pub use metrics::{cross_validate, evaluate, partition, CvReport, FoldResult, Metrics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainingError {
    #[error("DimensionMismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("TooFewExamples: {n} examples cannot be split into {folds} folds")]
    TooFewExamples { n: usize, folds: usize },
    #[error("MalformedDataset: {0}")]
    MalformedDataset(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

impl TrainingError {
    pub fn name(&self) -> &'static str {
        match self {
            TrainingError::DimensionMismatch { .. } => "DimensionMismatch",
            TrainingError::InvalidConfig(_) => "InvalidConfig",
            TrainingError::TooFewExamples { .. } => "TooFewExamples",
            TrainingError::MalformedDataset(_) => "MalformedDataset",
            TrainingError::Neural(e) => e.name(),
            TrainingError::Logic(e) => e.name(),
        }
    }
}

/// Which parameter groups gradient steps may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainableMask {
    pub w_ih: bool,
    pub w_ho: bool,
    pub theta_h: bool,
    pub theta_o: bool,
}

impl Default for TrainableMask {
    fn default() -> Self {
        TrainableMask {
            w_ih: true,
            w_ho: true,
            theta_h: true,
            theta_o: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub eta: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
    pub mask: TrainableMask,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 0.1,
            momentum: 0.5,
            epochs: 100,
            seed: 0,
            mask: TrainableMask::default(),
        }
    }
}

impl TrainConfig {
    /// The learning rate must lie in (0, 1). Momentum is allowed to be zero,
    /// which turns the update into plain gradient descent.
    pub fn validate(&self) -> Result<(), TrainingError> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(TrainingError::InvalidConfig(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.momentum >= 0.0 && self.momentum < 1.0) {
            return Err(TrainingError::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// Partial derivatives of the squared error, laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub w_ih: Vec<Vec<f64>>,
    pub w_ho: Vec<Vec<f64>>,
    pub theta_h: Vec<f64>,
    pub theta_o: Vec<f64>,
}

impl Gradient {
    fn zeros(net: &Network) -> Self {
        Gradient {
            w_ih: vec![vec![0.0; net.n_inputs()]; net.n_hidden()],
            w_ho: vec![vec![0.0; net.n_hidden()]; net.n_outputs()],
            theta_h: vec![0.0; net.n_hidden()],
            theta_o: vec![0.0; net.n_outputs()],
        }
    }
}

fn check_example(net: &Network, ex: &Example) -> Result<(), TrainingError> {
    if ex.input.len() != net.n_inputs() {
        return Err(TrainingError::DimensionMismatch {
            expected: net.n_inputs(),
            found: ex.input.len(),
        });
    }
    if ex.target.len() != net.n_outputs() {
        return Err(TrainingError::DimensionMismatch {
            expected: net.n_outputs(),
            found: ex.target.len(),
        });
    }
    Ok(())
}

/// `E = sum_o (y_o - t_o)^2` on raw outputs.
pub fn squared_error(net: &Network, ex: &Example) -> Result<f64, TrainingError> {
    check_example(net, ex)?;
    let f = net.forward(&ex.input)?;
    Ok(f.raw.iter().zip(&ex.target).map(|(y, t)| (y - t) * (y - t)).sum())
}

/// Error and its gradient for one example. Thresholds enter each unit's net
/// input with sign minus, like a weight on a constant input of -1.
pub fn gradient(net: &Network, ex: &Example) -> Result<(f64, Gradient), TrainingError> {
    check_example(net, ex)?;
    let f = net.forward(&ex.input)?;
    let beta = net.beta;
    let mut g = Gradient::zeros(net);
    let mut error = 0.0;
    let mut delta_o = vec![0.0; net.n_outputs()];
    for o in 0..net.n_outputs() {
        let (y, t) = (f.raw[o], ex.target[o]);
        error += (y - t) * (y - t);
        delta_o[o] = beta * (y - t) * (1.0 - y * y);
        for h in 0..net.n_hidden() {
            g.w_ho[o][h] = delta_o[o] * f.hidden[h];
        }
        g.theta_o[o] = -delta_o[o];
    }
    for h in 0..net.n_hidden() {
        let a = f.hidden[h];
        let back: f64 = (0..net.n_outputs()).map(|o| delta_o[o] * net.w_ho[o][h]).sum();
        let delta = back * beta / 2.0 * (1.0 - a * a);
        for (gi, x) in g.w_ih[h].iter_mut().zip(&ex.input) {
            *gi = delta * x;
        }
        g.theta_h[h] = -delta;
    }
    Ok((error, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Sum of per-example errors seen during the epoch.
    pub error: f64,
    /// Accuracy on the validation examples, when given.
    pub tot: Option<f64>,
    pub part: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub network: Network,
    pub history: Vec<EpochRecord>,
}

impl TrainOutcome {
    pub fn history_csv(&self) -> String {
        let mut s = String::from("epoch,error,tot,part\n");
        for r in &self.history {
            let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", r.epoch, r.error, opt(r.tot), opt(r.part)));
        }
        s
    }
}

fn step(param: &mut f64, velocity: &mut f64, grad: f64, cfg: &TrainConfig) {
    let mut d = -cfg.eta * grad;
    if cfg.momentum != 0.0 {
        d += cfg.momentum * *velocity;
    }
    *velocity = d;
    *param += d;
}

/// Per-example gradient descent with momentum,
/// `dW_t = -eta grad E + momentum dW_(t-1)`, visiting the examples in a
/// fresh seed-determined order every epoch.
pub fn train(net: &Network, data: &[Example], cfg: &TrainConfig) -> Result<TrainOutcome, TrainingError> {
    train_with_validation(net, data, None, cfg)
}

pub fn train_with_validation(
    net: &Network,
    data: &[Example],
    validation: Option<&[Example]>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainingError> {
    cfg.validate()?;
    for ex in data.iter().chain(validation.into_iter().flatten()) {
        check_example(net, ex)?;
    }
    let mut net = net.clone();
    let mut vel = Gradient::zeros(&net);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (e, g) = gradient(&net, &data[i])?;
            total += e;
            if cfg.mask.w_ho {
                for (row, (vrow, grow)) in net.w_ho.iter_mut().zip(vel.w_ho.iter_mut().zip(&g.w_ho)) {
                    for ((p, v), d) in row.iter_mut().zip(vrow.iter_mut()).zip(grow) {
                        step(p, v, *d, cfg);
                    }
                }
            }
            if cfg.mask.theta_o {
                for ((p, v), d) in net.theta_o.iter_mut().zip(vel.theta_o.iter_mut()).zip(&g.theta_o) {
                    step(p, v, *d, cfg);
                }
            }
            if cfg.mask.w_ih {
                for (row, (vrow, grow)) in net.w_ih.iter_mut().zip(vel.w_ih.iter_mut().zip(&g.w_ih)) {
                    for ((p, v), d) in row.iter_mut().zip(vrow.iter_mut()).zip(grow) {
                        step(p, v, *d, cfg);
                    }
                }
            }
            if cfg.mask.theta_h {
                for ((p, v), d) in net.theta_h.iter_mut().zip(vel.theta_h.iter_mut()).zip(&g.theta_h) {
                    step(p, v, *d, cfg);
                }
            }
        }
        let (tot, part) = match validation {
            Some(v) => {
                let m = evaluate(&net, v)?;
                (Some(m.tot), Some(m.part))
            }
            None => (None, None),
        };
        history.push(EpochRecord {
            epoch,
            error: total,
            tot,
            part,
        });
    }
    Ok(TrainOutcome { network: net, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_program;
    use crate::neural::{cilp_translate, CilpParams};

    fn small_net() -> Network {
        let p = parse_program("a <- b, not c.\nd <- c.").unwrap();
        cilp_translate(&p, &CilpParams::default()).unwrap().randomized(7, 0.5)
    }

    #[test]
    fn zero_epochs_is_identity() {
        let net = small_net();
        let data = vec![Example::new(vec![1.0, -1.0], vec![1.0, -1.0])];
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let out = train(&net, &data, &cfg).unwrap();
        assert_eq!(out.network, net);
        assert!(out.history.is_empty());
    }

    #[test]
    fn single_example_error_drops() {
        let net = small_net();
        let ex = Example::new(vec![1.0, -1.0], vec![0.9, -0.9]);
        let before = squared_error(&net, &ex).unwrap();
        let cfg = TrainConfig {
            eta: 0.1,
            momentum: 0.0,
            epochs: 500,
            ..TrainConfig::default()
        };
        let out = train(&net, std::slice::from_ref(&ex), &cfg).unwrap();
        let after = squared_error(&out.network, &ex).unwrap();
        assert!(after < 0.01 * before, "{after} vs {before}");
    }

    #[test]
    fn plain_descent_when_momentum_is_zero() {
        let net = small_net();
        let ex = Example::new(vec![1.0, 1.0], vec![-1.0, 1.0]);
        let cfg = TrainConfig {
            eta: 0.1,
            momentum: 0.0,
            epochs: 1,
            ..TrainConfig::default()
        };
        let (_, g) = gradient(&net, &ex).unwrap();
        let trained = train(&net, std::slice::from_ref(&ex), &cfg).unwrap().network;
        assert_eq!(trained.w_ho[0][0], net.w_ho[0][0] - 0.1 * g.w_ho[0][0]);
        assert_eq!(trained.theta_o[1], net.theta_o[1] - 0.1 * g.theta_o[1]);
    }

    #[test]
    fn mask_freezes_groups() {
        let net = small_net();
        let ex = Example::new(vec![1.0, 1.0], vec![-1.0, 1.0]);
        let cfg = TrainConfig {
            epochs: 5,
            mask: TrainableMask {
                w_ih: false,
                theta_h: false,
                ..TrainableMask::default()
            },
            ..TrainConfig::default()
        };
        let t = train(&net, std::slice::from_ref(&ex), &cfg).unwrap().network;
        assert_eq!(t.w_ih, net.w_ih);
        assert_eq!(t.theta_h, net.theta_h);
        assert_ne!(t.w_ho, net.w_ho);
    }

    #[test]
    fn config_and_dimension_checks() {
        let net = small_net();
        let bad = TrainConfig {
            eta: 1.5,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&net, &[], &bad), Err(TrainingError::InvalidConfig(_))));
        let ex = Example::new(vec![1.0], vec![1.0, 1.0]);
        assert!(matches!(
            train(&net, &[ex], &TrainConfig::default()),
            Err(TrainingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn history_csv_has_header() {
        let net = small_net();
        let ex = Example::new(vec![1.0, 1.0], vec![-1.0, 1.0]);
        let cfg = TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        };
        let out = train_with_validation(&net, std::slice::from_ref(&ex), Some(std::slice::from_ref(&ex)), &cfg).unwrap();
        let csv = out.history_csv();
        assert!(csv.starts_with("epoch,error,tot,part\n1,"));
        assert_eq!(csv.lines().count(), 3);
    }
}

//! Full-batch gradient descent with a monotone-loss safeguard.
//!
//! A step that would raise the training loss (or make it non-finite) is
//! retried from the same parameters at half the learning rate, and the
//! reduced rate is kept for later epochs. Accepted losses therefore never
//! increase. With a validation set the parameters with the best validation
//! accuracy are returned, and training stops after `patience` epochs
//! without improvement.

use serde::{Deserialize, Serialize};

use super::{LinearStack, TrainConfig};
use crate::error::{Error, Result};
use crate::graph::GraphBundle;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Training loss before the first step and after every accepted step.
    pub losses: Vec<f64>,
    /// Validation accuracy per epoch (empty without a validation set).
    pub val_accuracy: Vec<f64>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub final_learning_rate: f64,
}

pub fn train(g: &GraphBundle, config: &TrainConfig) -> Result<LinearStack> {
    train_with_trace(g, config).map(|(m, _)| m)
}

pub fn train_with_trace(g: &GraphBundle, config: &TrainConfig) -> Result<(LinearStack, TrainTrace)> {
    let train = g.train_nodes()?;
    let mut model = LinearStack::init(g.feature_dim(), g.num_classes(), config)?;
    let x = model.input_features(g);
    let labels = g.labels();
    let pick = |nodes: &[usize]| (x.select_rows(nodes), nodes.iter().map(|&i| labels[i]).collect::<Vec<_>>());
    let (xtr, ytr) = pick(train);
    let val = g.masks().map(|m| m.val.as_slice()).unwrap_or(&[]);
    let validation = (!val.is_empty()).then(|| pick(val));
    let trace = fit(&mut model, &xtr, &ytr, validation.as_ref().map(|(x, y)| (x, y.as_slice())))?;
    Ok((model, trace))
}

/// Train on explicit feature rows; `hops` in the config is recorded but no
/// aggregation is applied.
pub fn train_on_features(
    x: &Matrix,
    y: &[usize],
    num_classes: usize,
    validation: Option<(&Matrix, &[usize])>,
    config: &TrainConfig,
) -> Result<(LinearStack, TrainTrace)> {
    if x.rows() == 0 {
        return Err(Error::EmptyTrainMask);
    }
    if y.len() != x.rows() || y.iter().any(|&c| c >= num_classes) {
        return Err(Error::invalid("labels do not match feature rows or class count"));
    }
    let mut model = LinearStack::init(x.cols(), num_classes, config)?;
    let trace = fit(&mut model, x, y, validation)?;
    Ok((model, trace))
}

fn accuracy(model: &LinearStack, x: &Matrix, y: &[usize]) -> f64 {
    let hits = model.predict(x).iter().zip(y).filter(|(p, t)| p == t).count();
    hits as f64 / y.len() as f64
}

fn fit(model: &mut LinearStack, x: &Matrix, y: &[usize], validation: Option<(&Matrix, &[usize])>) -> Result<TrainTrace> {
    let cfg = model.config.clone();
    let mut lr = cfg.learning_rate;
    let mut trace = TrainTrace::default();
    let mut best: Option<(f64, LinearStack)> = None;
    let mut stale = 0usize;

    let (mut loss, mut grads) = model.loss_and_gradient(x, y, cfg.l2);
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: 0 });
    }
    trace.losses.push(loss);
    if let Some((xv, yv)) = validation {
        best = Some((accuracy(model, xv, yv), model.clone()));
    }

    for epoch in 1..=cfg.epochs {
        let mut accepted = None;
        let mut last_finite = true;
        for _ in 0..=cfg.max_halvings {
            let candidate = model.step(&grads, lr);
            let (l, g) = candidate.loss_and_gradient(x, y, cfg.l2);
            last_finite = l.is_finite();
            if last_finite && l <= loss {
                accepted = Some((candidate, l, g));
                break;
            }
            lr *= 0.5;
        }
        let Some((next, l, g)) = accepted else {
            if !last_finite {
                return Err(Error::NonFiniteLoss { epoch });
            }
            break;
        };
        *model = next;
        loss = l;
        grads = g;
        trace.losses.push(loss);
        trace.epochs_run = epoch;

        if let Some((xv, yv)) = validation {
            let acc = accuracy(model, xv, yv);
            trace.val_accuracy.push(acc);
            let (best_acc, _) = best.as_ref().expect("initialized with validation");
            if acc > *best_acc {
                best = Some((acc, model.clone()));
                trace.best_epoch = epoch;
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
        }
    }
    if validation.is_none() {
        trace.best_epoch = trace.epochs_run;
    }
    trace.final_learning_rate = lr;
    if let Some((_, m)) = best {
        *model = m;
    }
    Ok(trace)
}

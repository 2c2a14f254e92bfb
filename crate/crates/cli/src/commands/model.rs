use std::path::PathBuf;

use clap::Args;
use gsd_core::models::{compare, evaluate_with, train_with_trace, EvalOptions, LinearStack};
use gsd_core::theory::{bound_terms, BoundParams};

use super::{read_bundle, read_json, ModelArgs, RoleArgs};
use crate::error::CliResult;
use crate::output::{opt, Outputs};

fn read_model(path: &std::path::Path) -> CliResult<LinearStack> {
    let model: LinearStack = read_json(path)?;
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Args)]
pub struct Train {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Aggregation hops; 0 gives an MLP on raw features.
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: u64,
    /// Trained model JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV `epoch,loss,val_accuracy`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

impl Train {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let (model, trace) = train_with_trace(&g, &self.model.config(self.hops, self.seed))?;
        eprintln!("trained {} epochs, best epoch {}", trace.epochs_run, trace.best_epoch);
        out.json(&self.out, &model)?;
        if let Some(path) = &self.trace {
            let rows = trace
                .losses
                .iter()
                .enumerate()
                .map(|(i, loss)| {
                    let val = i.checked_sub(1).and_then(|e| trace.val_accuracy.get(e)).copied();
                    vec![i.to_string(), loss.to_string(), opt(val)]
                })
                .collect();
            out.csv(path, &["epoch", "loss", "val_accuracy"], rows)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct Eval {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Margin for the empirical margin loss.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Disparity bins; 0 disables them.
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
    #[arg(long, default_value_t = 2)]
    pub hop: usize,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV `lo,hi,count,correct,accuracy` per homophily range.
    #[arg(long)]
    pub bins_csv: Option<PathBuf>,
}

impl Eval {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let model = read_model(&self.model)?;
        let opts = EvalOptions {
            gamma: self.gamma,
            disparity_bins: self.bins,
            disparity_hop: self.hop,
        };
        let report = evaluate_with(&model, &g, &opts)?;
        eprintln!("accuracy {:.4} over {} nodes", report.accuracy, report.evaluated);
        out.json(&self.out, &report)?;
        if let Some(path) = &self.bins_csv {
            let rows = report
                .homophily_bins
                .iter()
                .map(|b| vec![b.lo.to_string(), b.hi.to_string(), b.count.to_string(), b.correct.to_string(), opt(b.accuracy)])
                .collect();
            out.csv(path, &["lo", "hi", "count", "correct", "accuracy"], rows)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct Compare {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Hops of model A (default SGC).
    #[arg(long, default_value_t = 2)]
    pub a_hops: usize,
    /// Hops of model B (default MLP).
    #[arg(long, default_value_t = 0)]
    pub b_hops: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: u64,
    /// CSV `lo,hi,count,accuracy_a,accuracy_b,gap` with gap = B − A.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

impl Compare {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let report = compare(
            &g,
            &self.model.config(self.a_hops, self.seed),
            &self.model.config(self.b_hops, self.seed),
        )?;
        let rows = report
            .bins
            .iter()
            .map(|b| {
                vec![
                    b.lo.to_string(),
                    b.hi.to_string(),
                    b.count.to_string(),
                    opt(b.accuracy_a),
                    opt(b.accuracy_b),
                    opt(b.gap),
                ]
            })
            .collect();
        out.csv(&self.out, &["lo", "hi", "count", "accuracy_a", "accuracy_b", "gap"], rows)?;
        if let Some(path) = &self.summary {
            out.json(path, &report)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct Bound {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Fixed class-mean separation instead of the plug-in estimate.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[command(flatten)]
    pub roles: RoleArgs,
    #[arg(long)]
    pub out: PathBuf,
}

impl Bound {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let model = read_model(&self.model)?;
        let roles = self.roles.assign(&g)?;
        let params = BoundParams {
            gamma: self.gamma,
            alpha: self.alpha,
            delta: self.delta,
            rho: self.rho,
            sigma: self.sigma,
        };
        let groups = vec![("majority".to_string(), roles.majority), ("minority".to_string(), roles.minority)];
        let report = bound_terms(&g, &model, &groups, &params)?;
        out.json(&self.out, &report)
    }
}

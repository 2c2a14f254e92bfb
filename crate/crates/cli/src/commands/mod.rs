use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use gsd_core::aggregate::AggregationMode;
use gsd_core::metrics::{MajorityRule, MajoritySide, RoleAssignment};
use gsd_core::models::TrainConfig;
use gsd_core::{load_bundle, node_homophily, GraphBundle};

use crate::error::{CliError, CliResult};
use crate::output::Outputs;

mod graph;
mod metrics;
mod model;
mod theory;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a CSBM-S graph into a bundle directory.
    GenCsbm(graph::GenCsbm),
    /// Per-node k-hop homophily ratios.
    Homophily(graph::Homophily),
    /// k-hop aggregated features.
    Aggregate(graph::Aggregate),
    /// Targeted homophilic or heterophilous edge addition.
    Perturb(graph::Perturb),
    /// Structural OOD split or its i.i.d. control.
    OodSplit(graph::OodSplit),
    /// Train an SGC / MLP / logistic model.
    Train(model::Train),
    /// Accuracy per homophily range and disparity bin, plus margin loss.
    Eval(model::Eval),
    /// Per-homophily-range accuracy gap between two trained models.
    Compare(model::Compare),
    /// Generalization-bound terms for majority and minority test nodes.
    Bound(model::Bound),
    /// Disparity scores and score bins of the test nodes.
    Disparity(metrics::Disparity),
    /// Relative discriminative ratio of class prototypes.
    Protoratio(metrics::Protoratio),
    /// Local agreement ratio and accuracy.
    Agree(metrics::Agree),
    /// Multi-bandwidth Gaussian-kernel MMD between two point sets.
    Mmd(metrics::Mmd),
    /// Random check of the posterior-difference inequality.
    Lemma1Sweep(theory::Lemma1Sweep),
    /// Logistic-regression accuracy table over homophilic/heterophilic mixtures.
    TableD2(theory::TableD2),
    /// Execute a JSON recipe of stages and write a manifest.
    Run(crate::recipe::Run),
}

/// Subcommands that draw random numbers and therefore take `--seed`.
pub const STOCHASTIC: &[&str] = &["gen-csbm", "perturb", "ood-split", "train", "compare", "lemma1-sweep"];

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenCsbm(_) => "gen-csbm",
            Command::Homophily(_) => "homophily",
            Command::Aggregate(_) => "aggregate",
            Command::Perturb(_) => "perturb",
            Command::OodSplit(_) => "ood-split",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Compare(_) => "compare",
            Command::Bound(_) => "bound",
            Command::Disparity(_) => "disparity",
            Command::Protoratio(_) => "protoratio",
            Command::Agree(_) => "agree",
            Command::Mmd(_) => "mmd",
            Command::Lemma1Sweep(_) => "lemma1-sweep",
            Command::TableD2(_) => "table-d2",
            Command::Run(_) => "run",
        }
    }

    pub fn execute(self, out: &mut Outputs) -> CliResult<()> {
        match self {
            Command::GenCsbm(a) => a.run(out),
            Command::Homophily(a) => a.run(out),
            Command::Aggregate(a) => a.run(out),
            Command::Perturb(a) => a.run(out),
            Command::OodSplit(a) => a.run(out),
            Command::Train(a) => a.run(out),
            Command::Eval(a) => a.run(out),
            Command::Compare(a) => a.run(out),
            Command::Bound(a) => a.run(out),
            Command::Disparity(a) => a.run(out),
            Command::Protoratio(a) => a.run(out),
            Command::Agree(a) => a.run(out),
            Command::Mmd(a) => a.run(out),
            Command::Lemma1Sweep(a) => a.run(out),
            Command::TableD2(a) => a.run(out),
            Command::Run(a) => a.run(out),
        }
    }
}

pub fn read_bundle(path: &Path) -> CliResult<GraphBundle> {
    if !path.exists() {
        return Err(CliError::validation(format!("bundle {} does not exist", path.display())));
    }
    Ok(load_bundle(path)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn parse_mode(s: &str) -> Result<AggregationMode, String> {
    s.parse()
}

/// Model hyperparameters shared by `train` and `compare`.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Comma-separated hidden widths.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    pub hidden: Vec<usize>,
    /// No hidden layer (logistic regression head).
    #[arg(long)]
    pub linear: bool,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 50)]
    pub patience: usize,
    /// `self-loop` or `plain`.
    #[arg(long, default_value = "self-loop", value_parser = parse_mode)]
    pub mode: AggregationMode,
}

impl ModelArgs {
    pub fn config(&self, hops: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            hops,
            hidden: if self.linear { Vec::new() } else { self.hidden.clone() },
            learning_rate: self.lr,
            epochs: self.epochs,
            l2: self.l2,
            patience: self.patience,
            seed,
            mode: self.mode,
            ..TrainConfig::default()
        }
    }
}

/// Majority/minority assignment by 1-hop homophily.
#[derive(Debug, Clone, Args)]
pub struct RoleArgs {
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// `auto`, `homo` or `hetero`.
    #[arg(long, default_value = "auto")]
    pub side: MajoritySide,
}

impl RoleArgs {
    /// Roles of the evaluation (test) nodes.
    pub fn assign(&self, g: &GraphBundle) -> CliResult<RoleAssignment> {
        let rule = MajorityRule {
            threshold: self.threshold,
            side: self.side,
        };
        let profile = node_homophily(g, 1)?;
        Ok(rule.assign(&profile, &g.eval_nodes())?)
    }
}

pub fn require_path(path: &Path, what: &str) -> CliResult<PathBuf> {
    if path.exists() {
        Ok(path.to_path_buf())
    } else {
        Err(CliError::validation(format!("{what} {} does not exist", path.display())))
    }
}

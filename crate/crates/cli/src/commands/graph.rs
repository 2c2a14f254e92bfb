use std::path::PathBuf;

use clap::Args;
use gsd_core::aggregate::{aggregate, AggregationMode};
use gsd_core::csbm::{generate, CsbmSpec};
use gsd_core::experiments::synthetic_family;
use gsd_core::metrics::{MajorityRule, MajoritySide};
use gsd_core::models::TrainConfig;
use gsd_core::ood::{make_split, ood_report, random_split, SplitMode, SplitSpec};
use gsd_core::perturb::{add_edges, sweep, PerturbMode, PerturbPlan};
use gsd_core::rng::derive_seed;
use gsd_core::node_homophily;

use super::{parse_mode, read_bundle, read_json, require_path};
use crate::error::{CliError, CliResult};
use crate::output::{opt, Outputs};

#[derive(Debug, Args)]
pub struct GenCsbm {
    /// CsbmSpec JSON; without it the two-pattern synthetic family is used.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub nodes: usize,
    /// Share of homophilic nodes in the synthetic family.
    #[arg(long, default_value_t = 0.8)]
    pub pr_homo: f64,
    #[arg(long)]
    pub seed: u64,
    /// Random train,val fractions; the rest becomes the test mask.
    #[arg(long, value_delimiter = ',')]
    pub split: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

impl GenCsbm {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let spec = match &self.spec {
            Some(path) => read_json::<CsbmSpec>(path)?.with_seed(self.seed),
            None => synthetic_family(self.nodes, self.pr_homo, self.seed),
        };
        let mut g = generate(&spec)?;
        if let Some(fr) = &self.split {
            if fr.len() != 2 {
                return Err(CliError::validation("--split takes two fractions: train,val"));
            }
            let masks = random_split(g.num_nodes(), fr[0], fr[1], derive_seed(self.seed, "split"))?;
            g = g.with_masks(masks)?;
        }
        eprintln!("generated {} nodes, {} edges", g.num_nodes(), g.num_edges());
        out.bundle(&g, &self.out)
    }
}

#[derive(Debug, Args)]
pub struct Homophily {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub hops: Vec<usize>,
    /// Per-node CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Graph-level JSON summary per hop.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

impl Homophily {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let profiles = self
            .hops
            .iter()
            .map(|&k| node_homophily(&g, k))
            .collect::<Result<Vec<_>, _>>()?;
        let mut header = vec!["node".to_string(), "label".to_string()];
        header.extend(self.hops.iter().map(|k| format!("h{k}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = (0..g.num_nodes())
            .map(|i| {
                let mut row = vec![i.to_string(), g.labels()[i].to_string()];
                row.extend(profiles.iter().map(|p| opt(p.per_node[i])));
                row
            })
            .collect();
        out.csv(&self.out, &header, rows)?;
        if let Some(path) = &self.summary {
            let summary: Vec<_> = profiles
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "hop": p.hop,
                        "graph": p.graph,
                        "defined": p.defined_count(),
                        "undefined": g.num_nodes() - p.defined_count(),
                    })
                })
                .collect();
            out.json(path, &summary)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct Aggregate {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    #[arg(long, default_value = "self-loop", value_parser = parse_mode)]
    pub mode: AggregationMode,
    /// Feature CSV with header `f0,f1,...`.
    #[arg(long)]
    pub out: PathBuf,
}

impl Aggregate {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let f = aggregate(&g, self.hops, self.mode).features;
        let header: Vec<String> = (0..f.cols()).map(|j| format!("f{j}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = f.row_iter().map(|r| r.iter().map(f64::to_string).collect()).collect();
        out.csv(&self.out, &header, rows)
    }
}

#[derive(Debug, Args)]
pub struct Perturb {
    #[arg(long)]
    pub bundle: PathBuf,
    /// JSON array of target node ids.
    #[arg(long, conflicts_with = "minority_targets")]
    pub targets: Option<PathBuf>,
    /// Target the minority-pattern nodes among all nodes.
    #[arg(long)]
    pub minority_targets: bool,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value = "auto")]
    pub side: MajoritySide,
    #[arg(long)]
    pub budget: usize,
    /// `homo` or `hetero`.
    #[arg(long)]
    pub mode: PerturbMode,
    /// JSON K×K partner-label distribution for heterophilous mode.
    #[arg(long)]
    pub target_dist: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// TSV of added edges `step, u, v`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Ascending budgets at which to report targeted homophily.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<usize>>,
    /// CSV `budget,h_targeted` for the checkpoints.
    #[arg(long, requires = "checkpoints")]
    pub sweep: Option<PathBuf>,
}

impl Perturb {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let targets: Vec<usize> = match (&self.targets, self.minority_targets) {
            (Some(path), _) => read_json(path)?,
            (None, true) => {
                let rule = MajorityRule {
                    threshold: self.threshold,
                    side: self.side,
                };
                let all: Vec<usize> = (0..g.num_nodes()).collect();
                rule.assign(&node_homophily(&g, 1)?, &all)?.minority
            }
            (None, false) => return Err(CliError::validation("give --targets or --minority-targets")),
        };
        let plan = PerturbPlan {
            target_dist: self.target_dist.as_deref().map(read_json).transpose()?,
            ..PerturbPlan::new(targets, self.budget, self.mode, self.seed)
        };
        let result = add_edges(&g, &plan)?;
        out.bundle(&result.graph, &self.out)?;
        if let Some(path) = &self.trace {
            let rows = result
                .trace
                .iter()
                .enumerate()
                .map(|(step, (u, v))| vec![(step + 1).to_string(), u.to_string(), v.to_string()])
                .collect();
            out.tsv(path, &["step", "u", "v"], rows)?;
        }
        if let (Some(path), Some(checkpoints)) = (&self.sweep, &self.checkpoints) {
            let rows = sweep(&g, &plan, checkpoints)?
                .into_iter()
                .map(|p| vec![p.budget.to_string(), opt(p.h_targeted)])
                .collect();
            out.csv(path, &["budget", "h_targeted"], rows)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct OodSplit {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    /// `ood` or `iid`.
    #[arg(long, default_value = "ood")]
    pub mode: SplitMode,
    #[arg(long, default_value = "auto")]
    pub side: MajoritySide,
    #[arg(long)]
    pub seed: u64,
    /// Bundle with the new masks.
    #[arg(long)]
    pub out: PathBuf,
    /// Train SGC under both splits and write the OOD report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
}

impl OodSplit {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        require_path(&self.bundle, "bundle")?;
        let g = read_bundle(&self.bundle)?;
        let spec = SplitSpec {
            threshold: self.threshold,
            val_fraction: self.val_fraction,
            mode: self.mode,
            side: self.side,
            seed: self.seed,
        };
        let masks = make_split(&g, &spec)?;
        eprintln!("split sizes train {} val {} test {}", masks.train.len(), masks.val.len(), masks.test.len());
        out.bundle(&g.clone().with_masks(masks)?, &self.out)?;
        if let Some(path) = &self.report {
            let report = ood_report(&g, &TrainConfig::sgc(self.hops, derive_seed(self.seed, "train")), &spec)?;
            out.json(path, &report)?;
        }
        Ok(())
    }
}

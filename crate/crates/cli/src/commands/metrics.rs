use std::path::{Path, PathBuf};

use clap::Args;
use gsd_core::aggregate::aggregate;
use gsd_core::aggregate::AggregationMode;
use gsd_core::metrics::agreement::DEFAULT_KNN;
use gsd_core::metrics::disparity::partition_bins_by;
use gsd_core::metrics::{discriminative_ratio, disparity_scores, hop_homophily_gap, local_agreement, mmd, ScoreVariant, DEFAULT_SIGMAS};
use gsd_core::models::LinearStack;
use gsd_core::Matrix;

use super::{read_bundle, read_json, RoleArgs};
use crate::error::{CliError, CliResult};
use crate::output::{opt, Outputs};

#[derive(Debug, Args)]
pub struct Disparity {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub hop: usize,
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
    /// `combined`, `distance` or `homophily`.
    #[arg(long, default_value = "combined")]
    pub variant: ScoreVariant,
    /// Trained model used to fill per-bin accuracy.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Per-node CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-bin JSON summary.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// CSV of mean k-hop homophily gaps to the nearest train node for k = 1..=kmax.
    #[arg(long)]
    pub hop_profile: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
}

impl Disparity {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let mut report = partition_bins_by(disparity_scores(&g, self.hop)?, self.bins, self.variant)?;
        let predictions = match &self.model {
            Some(path) => {
                let model: LinearStack = read_json(path)?;
                model.validate()?;
                Some(model.predict(&model.input_features(&g)))
            }
            None => None,
        };
        if let Some(pred) = &predictions {
            report.record_predictions(pred, g.labels());
        }
        let rows = report
            .entries
            .iter()
            .map(|e| {
                let correct = predictions
                    .as_ref()
                    .map(|p| u8::from(p[e.node] == g.labels()[e.node]).to_string())
                    .unwrap_or_default();
                vec![
                    e.node.to_string(),
                    e.nearest.to_string(),
                    e.distance.to_string(),
                    e.hom_gap.to_string(),
                    e.score.to_string(),
                    e.bin.map(|b| b.to_string()).unwrap_or_default(),
                    correct,
                ]
            })
            .collect();
        out.csv(&self.out, &["node", "nearest", "distance", "hom_gap", "score", "bin", "correct"], rows)?;
        if report.undefined_pairs > 0 {
            eprintln!("{} pairs had an undefined {}-hop ratio; their gap was set to 0", report.undefined_pairs, self.hop);
        }
        if let Some(path) = &self.summary {
            out.json(
                path,
                &serde_json::json!({
                    "hop": report.hop,
                    "variant": report.variant,
                    "undefined_pairs": report.undefined_pairs,
                    "bins": report.bins,
                }),
            )?;
        }
        if let Some(path) = &self.hop_profile {
            let rows = hop_homophily_gap(&g, &g.eval_nodes(), self.kmax, self.hop)?
                .into_iter()
                .map(|h| vec![h.hop.to_string(), opt(h.mean_gap), h.counted.to_string(), h.undefined.to_string()])
                .collect();
            out.csv(path, &["hop", "mean_gap", "counted", "undefined"], rows)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct Protoratio {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub hop: usize,
    /// Divide the ratio by the number of included classes.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub roles: RoleArgs,
    #[arg(long)]
    pub out: PathBuf,
}

impl Protoratio {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let roles = self.roles.assign(&g)?;
        let report = discriminative_ratio(&g, self.hop, &roles.majority, &roles.minority, self.normalize)?;
        eprintln!("relative discriminative ratio {:.4}", report.ratio);
        out.json(&self.out, &report)
    }
}

#[derive(Debug, Args)]
pub struct Agree {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub hop: usize,
    #[arg(long, default_value_t = DEFAULT_KNN)]
    pub knn: usize,
    #[command(flatten)]
    pub roles: RoleArgs,
    #[arg(long)]
    pub out: PathBuf,
}

impl Agree {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let g = read_bundle(&self.bundle)?;
        let roles = self.roles.assign(&g)?;
        let report = local_agreement(&g, self.hop, self.knn, &roles.majority, &roles.minority)?;
        out.json(&self.out, &report)
    }
}

#[derive(Debug, Args)]
pub struct Mmd {
    /// Point set CSV with a header row.
    #[arg(long, requires = "y", conflicts_with = "bundle")]
    pub x: Option<PathBuf>,
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Compare two masks of a bundle on aggregated features instead.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[arg(long, default_value = "train")]
    pub from: String,
    #[arg(long, default_value = "test")]
    pub to: String,
    #[arg(long, default_value_t = 2)]
    pub hop: usize,
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

fn read_points(path: &Path) -> CliResult<Matrix> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok(Matrix::from_rows(&rows)?)
}

impl Mmd {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let (x, y) = match (&self.x, &self.y, &self.bundle) {
            (Some(x), Some(y), None) => (read_points(x)?, read_points(y)?),
            (None, None, Some(bundle)) => {
                let g = read_bundle(bundle)?;
                let masks = g.masks().ok_or_else(|| CliError::validation("bundle has no masks"))?;
                let pick = |name: &str| {
                    masks
                        .get(name)
                        .map(<[usize]>::to_vec)
                        .ok_or_else(|| CliError::validation(format!("unknown mask `{name}`")))
                };
                let (a, b) = (pick(&self.from)?, pick(&self.to)?);
                let f = aggregate(&g, self.hop, AggregationMode::SelfLoop).features;
                (f.select_rows(&a), f.select_rows(&b))
            }
            _ => return Err(CliError::validation("give either --x and --y or --bundle")),
        };
        let sigmas = self.sigmas.clone().unwrap_or_else(|| DEFAULT_SIGMAS.to_vec());
        let value = mmd(&x, &y, &sigmas)?;
        out.json(
            &self.out,
            &serde_json::json!({ "mmd": value, "sigmas": sigmas, "n_x": x.rows(), "n_y": y.rows() }),
        )
    }
}

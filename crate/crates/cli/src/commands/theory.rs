use std::path::PathBuf;

use clap::Args;
use gsd_core::experiments::{table_d2, D2Config};
use gsd_core::theory::lemma1_sweep;

use super::read_json;
use crate::error::CliResult;
use crate::output::Outputs;

#[derive(Debug, Args)]
pub struct Lemma1Sweep {
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

impl Lemma1Sweep {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let stats = lemma1_sweep(self.trials, self.dim, self.seed)?;
        eprintln!("violation rate {:.4}", stats.violation_rate);
        out.json(&self.out, &stats)
    }
}

#[derive(Debug, Args)]
pub struct TableD2 {
    /// Number of seeds per cell.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// First seed; cells use seeds `first..first+seeds`.
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    /// D2Config JSON overriding the default grid.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wide CSV with `mean±std` cells.
    #[arg(long)]
    pub out: PathBuf,
    /// Long CSV with one row per cell and seed.
    #[arg(long)]
    pub long: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl TableD2 {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let mut cfg: D2Config = match &self.config {
            Some(path) => read_json(path)?,
            None => D2Config::default(),
        };
        cfg.seeds = (self.first_seed..self.first_seed + self.seeds).collect();
        let table = table_d2(&cfg)?;

        let mut header = vec!["heterophilic \\ homophilic".to_string()];
        header.extend(table.col_labels.iter().cloned());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = table
            .row_labels
            .iter()
            .enumerate()
            .map(|(r, label)| {
                let mut row = vec![label.clone()];
                row.extend((0..table.col_labels.len()).map(|c| {
                    table
                        .cell(r, c)
                        .map(|cell| format!("{:.2}±{:.2}", cell.mean, cell.std))
                        .unwrap_or_else(|| "-".to_string())
                }));
                row
            })
            .collect();
        out.csv(&self.out, &header, rows)?;

        if let Some(path) = &self.long {
            let mut rows = Vec::new();
            for cell in &table.cells {
                for (seed, acc) in cfg.seeds.iter().zip(&cell.accuracies) {
                    rows.push(vec![
                        table.row_labels[cell.row].clone(),
                        table.col_labels[cell.col].clone(),
                        seed.to_string(),
                        acc.to_string(),
                    ]);
                }
            }
            out.csv(path, &["heterophilic", "homophilic", "seed", "accuracy"], rows)?;
        }
        if let Some(path) = &self.json {
            out.json(path, &table)?;
        }
        Ok(())
    }
}

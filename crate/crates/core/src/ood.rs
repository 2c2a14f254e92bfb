//! Structural distribution-shift splits.
//!
//! The structural split trains and validates on majority-pattern nodes and
//! tests on minority-pattern nodes. The i.i.d. control draws sets of the
//! same sizes uniformly from all nodes.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBundle, Masks};
use crate::homophily::node_homophily;
use crate::metrics::{mmd, MajorityRule, MajoritySide, DEFAULT_SIGMAS};
use crate::models::{evaluate_with, train, EvalOptions, LinearStack, TrainConfig};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    #[default]
    StructuralOod,
    IidControl,
}

impl std::str::FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ood" | "structural-ood" | "structural" => Ok(SplitMode::StructuralOod),
            "iid" | "iid-control" => Ok(SplitMode::IidControl),
            other => Err(Error::invalid(format!("unknown split mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub threshold: f64,
    pub val_fraction: f64,
    pub mode: SplitMode,
    #[serde(default)]
    pub side: MajoritySide,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(mode: SplitMode, seed: u64) -> Self {
        SplitSpec {
            threshold: 0.5,
            val_fraction: 0.2,
            mode,
            side: MajoritySide::Auto,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid("threshold must lie in (0,1)"));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::invalid("validation fraction must lie in (0,1)"));
        }
        Ok(())
    }

    fn rule(&self) -> MajorityRule {
        MajorityRule {
            threshold: self.threshold,
            side: self.side,
        }
    }
}

/// Set sizes `(train, val, test)` of the structural split, plus its masks.
fn structural(g: &GraphBundle, spec: &SplitSpec) -> Result<Masks> {
    let h = node_homophily(g, 1)?;
    let all: Vec<usize> = (0..g.num_nodes()).collect();
    let roles = spec.rule().assign(&h, &all)?;
    if roles.minority.is_empty() {
        return Err(Error::EmptyMinority);
    }
    let mut majority = roles.majority;
    majority.shuffle(&mut substream(spec.seed, "ood-split"));
    let n_val = (spec.val_fraction * majority.len() as f64).round() as usize;
    let val = majority[..n_val].to_vec();
    let train = majority[n_val..].to_vec();
    Ok(Masks::new(train, val, roles.minority))
}

pub fn make_split(g: &GraphBundle, spec: &SplitSpec) -> Result<Masks> {
    spec.validate()?;
    let ood = structural(g, spec)?;
    match spec.mode {
        SplitMode::StructuralOod => Ok(ood),
        SplitMode::IidControl => random_split_sizes(
            g.num_nodes(),
            [ood.train.len(), ood.val.len(), ood.test.len()],
            spec.seed,
        ),
    }
}

/// Uniform random split into sets of the given sizes.
pub fn random_split_sizes(n: usize, sizes: [usize; 3], seed: u64) -> Result<Masks> {
    if sizes.iter().sum::<usize>() > n {
        return Err(Error::invalid("split sizes exceed node count"));
    }
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut substream(seed, "iid-split"));
    let (a, rest) = nodes.split_at(sizes[0]);
    let (b, rest) = rest.split_at(sizes[1]);
    Ok(Masks::new(a.to_vec(), b.to_vec(), rest[..sizes[2]].to_vec()))
}

/// Uniform random split by fractions; the test set takes the remainder.
pub fn random_split(n: usize, train_frac: f64, val_frac: f64, seed: u64) -> Result<Masks> {
    if !(train_frac >= 0.0 && val_frac >= 0.0 && train_frac + val_frac <= 1.0) {
        return Err(Error::invalid("split fractions must be non-negative and sum to at most 1"));
    }
    let n_train = (train_frac * n as f64).round() as usize;
    let n_val = ((val_frac * n as f64).round() as usize).min(n - n_train);
    random_split_sizes(n, [n_train, n_val, n - n_train - n_val], seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdTable {
    pub iid_val: f64,
    pub iid_test: f64,
    pub ood_val: f64,
    pub ood_test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodReport {
    pub acc_iid: f64,
    pub acc_ood: f64,
    pub sizes: [usize; 3],
    pub mmd: MmdTable,
}

fn run_split(g: &GraphBundle, masks: Masks, config: &TrainConfig) -> Result<(f64, f64, f64)> {
    let g = g.clone().with_masks(masks)?;
    let model = train(&g, config)?;
    let acc = evaluate_with(
        &model,
        &g,
        &EvalOptions {
            disparity_bins: 0,
            ..EvalOptions::default()
        },
    )?
    .accuracy;
    let (to_val, to_test) = representation_mmd(&model, &g)?;
    Ok((acc, to_val, to_test))
}

/// MMD from the train set to the validation and test sets on the model's
/// last hidden representation.
pub fn representation_mmd(model: &LinearStack, g: &GraphBundle) -> Result<(f64, f64)> {
    let masks = g.masks().ok_or(Error::EmptyTrainMask)?;
    let z = model.hidden_representation(&model.input_features(g));
    let tr = z.select_rows(&masks.train);
    Ok((
        mmd(&tr, &z.select_rows(&masks.val), &DEFAULT_SIGMAS)?,
        mmd(&tr, &z.select_rows(&masks.test), &DEFAULT_SIGMAS)?,
    ))
}

/// Train `config` under the structural split and its size-matched control.
pub fn ood_report(g: &GraphBundle, config: &TrainConfig, spec: &SplitSpec) -> Result<OodReport> {
    let ood = make_split(g, &SplitSpec { mode: SplitMode::StructuralOod, ..spec.clone() })?;
    let iid = make_split(g, &SplitSpec { mode: SplitMode::IidControl, ..spec.clone() })?;
    let sizes = [ood.train.len(), ood.val.len(), ood.test.len()];
    let (acc_ood, ood_val, ood_test) = run_split(g, ood, config)?;
    let (acc_iid, iid_val, iid_test) = run_split(g, iid, config)?;
    Ok(OodReport {
        acc_iid,
        acc_ood,
        sizes,
        mmd: MmdTable {
            iid_val,
            iid_test,
            ood_val,
            ood_test,
        },
    })
}

//! `gsd run`: a JSON recipe is a list of stages, each naming a subcommand
//! and its flags.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "stages": [
//!     {"stage": "gen-csbm", "args": {"nodes": 500, "split": [0.48, 0.32], "out": "graph"}},
//!     {"stage": "train", "args": {"bundle": "graph", "out": "model.json"}}
//!   ]
//! }
//! ```
//!
//! Argument keys are flag names (underscores become hyphens); `true` is a
//! bare switch, arrays are joined with commas. Stages that draw random
//! numbers and do not set `seed` get one derived from the recipe seed and
//! the stage position. Relative paths resolve against the working
//! directory, which defaults to the directory holding the recipe.

use std::path::{Path, PathBuf};

use clap::{Args, Parser};
use gsd_core::rng::derive_seed;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::commands::{Command, STOCHASTIC};
use crate::error::{CliError, CliResult};
use crate::output::{hash_tree, json_bytes, Outputs};
use crate::Cli;

#[derive(Debug, Args)]
pub struct Run {
    #[arg(long)]
    pub recipe: PathBuf,
    /// Overrides the recipe seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `STAGE.KEY=VALUE`, where STAGE is a stage name or position; repeatable.
    #[arg(long = "set", value_name = "STAGE.KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Directory relative paths resolve against.
    #[arg(long)]
    pub workdir: Option<PathBuf>,
    /// Manifest path, relative to the working directory.
    #[arg(long, default_value = "manifest.json")]
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    #[serde(default)]
    pub seed: Option<u64>,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub stage: String,
    #[serde(default)]
    pub args: Map<String, Value>,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    seed: Option<u64>,
    recipe_sha256: String,
    stages: Vec<StageRecord>,
}

#[derive(Debug, Serialize)]
struct StageRecord {
    index: usize,
    stage: String,
    seed: Option<u64>,
    argv: Vec<String>,
    outputs: Vec<OutputRecord>,
}

#[derive(Debug, Serialize)]
struct OutputRecord {
    path: String,
    sha256: String,
}

fn flag_value(v: &Value) -> CliResult<Option<String>> {
    Ok(match v {
        Value::Null | Value::Bool(false) => None,
        Value::Bool(true) => Some(String::new()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|x| match x {
                    Value::Number(n) => Ok(n.to_string()),
                    Value::String(s) => Ok(s.clone()),
                    other => Err(CliError::validation(format!("unsupported list item {other}"))),
                })
                .collect::<CliResult<Vec<_>>>()?;
            Some(parts.join(","))
        }
        Value::Object(_) => return Err(CliError::validation("nested objects are not valid flag values")),
    })
}

/// Command-line words for one stage, with keys in recipe order.
pub fn stage_argv(stage: &Stage) -> CliResult<Vec<String>> {
    let mut argv = vec!["gsd".to_string(), stage.stage.clone()];
    for (key, value) in &stage.args {
        if let Some(v) = flag_value(value)? {
            argv.push(format!("--{}", key.replace('_', "-")));
            if !matches!(value, Value::Bool(true)) {
                argv.push(v);
            }
        }
    }
    Ok(argv)
}

fn apply_override(recipe: &mut Recipe, spec: &str) -> CliResult<()> {
    let bad = || CliError::validation(format!("override `{spec}` is not STAGE.KEY=VALUE"));
    let (lhs, value) = spec.split_once('=').ok_or_else(bad)?;
    let (stage, key) = lhs.split_once('.').ok_or_else(bad)?;
    let value: Value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    let mut hit = false;
    for (i, s) in recipe.stages.iter_mut().enumerate() {
        if s.stage == stage || stage.parse::<usize>() == Ok(i) {
            s.args.insert(key.to_string(), value.clone());
            hit = true;
        }
    }
    if hit {
        Ok(())
    } else {
        Err(CliError::validation(format!("override `{spec}` matches no stage")))
    }
}

fn display_path(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

impl Run {
    pub fn run(self, out: &mut Outputs) -> CliResult<()> {
        let recipe_bytes = std::fs::read(&self.recipe)
            .map_err(|e| CliError::validation(format!("cannot read recipe {}: {e}", self.recipe.display())))?;
        let mut recipe: Recipe = serde_json::from_slice(&recipe_bytes)
            .map_err(|e| CliError::validation(format!("recipe {}: {e}", self.recipe.display())))?;
        for spec in &self.overrides {
            apply_override(&mut recipe, spec)?;
        }
        let seed = self.seed.or(recipe.seed);
        let workdir = match &self.workdir {
            Some(dir) => dir.clone(),
            None => self.recipe.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        if !workdir.as_os_str().is_empty() {
            std::env::set_current_dir(&workdir)
                .map_err(|e| CliError::validation(format!("working directory {}: {e}", workdir.display())))?;
        }

        let mut records = Vec::with_capacity(recipe.stages.len());
        for (index, stage) in recipe.stages.iter().enumerate() {
            let label = format!("{index}:{}", stage.stage);
            let mut stage = stage.clone();
            let stochastic = STOCHASTIC.contains(&stage.stage.as_str());
            if stochastic && !stage.args.contains_key("seed") {
                let master = seed.ok_or_else(|| {
                    CliError::validation("stochastic stage without a seed; set `seed` in the recipe or pass --seed")
                        .in_stage(&label)
                })?;
                let derived = derive_seed(master, &format!("stage/{index}/{}", stage.stage));
                stage.args.insert("seed".to_string(), Value::from(derived));
            }
            let stage_seed = stage.args.get("seed").and_then(Value::as_u64);
            let argv = stage_argv(&stage).map_err(|e| e.in_stage(&label))?;
            let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::validation(e.to_string().trim_end()).in_stage(&label))?;
            if matches!(cli.command, Command::Run(_)) {
                return Err(CliError::validation("recipes cannot nest `run`").in_stage(&label));
            }
            eprintln!("[{label}] {}", argv[1..].join(" "));
            let mut stage_out = Outputs::default();
            cli.command.execute(&mut stage_out).map_err(|e| e.in_stage(&label))?;
            let mut outputs = Vec::new();
            for path in &stage_out.paths {
                for (file, sha256) in hash_tree(path)? {
                    outputs.push(OutputRecord {
                        path: display_path(&file),
                        sha256,
                    });
                }
            }
            records.push(StageRecord {
                index,
                stage: stage.stage.clone(),
                seed: stage_seed,
                argv: argv[1..].to_vec(),
                outputs,
            });
        }

        let manifest = Manifest {
            tool: "gsd",
            version: env!("CARGO_PKG_VERSION"),
            core_version: gsd_core::VERSION,
            seed,
            recipe_sha256: hex::encode(Sha256::digest(&recipe_bytes)),
            stages: records,
        };
        out.write(&self.manifest, &json_bytes(&manifest)?)
    }
}

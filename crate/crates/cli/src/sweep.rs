//! Parameter sweeps: one scenario field stepped over a list of values, for
//! each scheme and seed, fanned out over a worker pool.
//!
//! ```json
//! {
//!   "scenario": "base.json",
//!   "parameter": "thresholds.clutter_gain_db.0",
//!   "values": [5.0, 10.0, 15.0],
//!   "schemes": ["aware", "random"],
//!   "seeds": [0, 1]
//! }
//! ```
//!
//! `scenario` is resolved relative to the sweep file and defaults to the
//! reference scenario; `schemes` defaults to `["aware"]`, `seeds` to the
//! `--seed` value.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use holo_isac_core::optimize::AlgorithmConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::files::{apply_override, CouplingChoice, ScenarioFile};
use crate::output::write_records;
use crate::run::{run_to_dir, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default)]
    pub scenario: Option<PathBuf>,
    pub parameter: String,
    pub values: Vec<serde_json::Value>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<String>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

fn default_schemes() -> Vec<String> {
    vec!["aware".into()]
}

impl SweepFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut sweep: SweepFile = serde_json::from_str(&text).with_context(|| format!("parsing sweep {}", path.display()))?;
        if let (Some(s), Some(dir)) = (&sweep.scenario, path.parent()) {
            if s.is_relative() {
                sweep.scenario = Some(dir.join(s));
            }
        }
        Ok(sweep)
    }
}

/// Scheme by command-line name. The phased array needs its own geometry and
/// is not available in sweeps.
pub fn scheme_by_name(name: &str) -> Result<Scheme> {
    Ok(match name {
        "aware" => Scheme::Aware,
        "unaware" => Scheme::Unaware,
        "random" => Scheme::Random,
        "midpoint" => Scheme::Midpoint,
        other => bail!("unknown scheme '{other}' (aware, unaware, random, midpoint)"),
    })
}

struct Job {
    dir: String,
    value: String,
    scheme: Scheme,
    seed: u64,
    file: ScenarioFile,
}

/// Runs every point and writes `summary.csv`. A failed point is recorded
/// in the summary and does not stop the others.
pub fn run_sweep(
    sweep: &SweepFile,
    coupling: &CouplingChoice,
    algo: &AlgorithmConfig,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<PathBuf> {
    if sweep.values.is_empty() {
        bail!("sweep has no values");
    }
    let base = match &sweep.scenario {
        Some(p) => ScenarioFile::load(p)?,
        None => ScenarioFile::reference(),
    };
    let seeds = if sweep.seeds.is_empty() {
        vec![algo.seed]
    } else {
        sweep.seeds.clone()
    };
    let mut work = Vec::new();
    for (i, value) in sweep.values.iter().enumerate() {
        let text = value.to_string();
        let file = apply_override(&base, &format!("{}={text}", sweep.parameter))?;
        for name in &sweep.schemes {
            let scheme = scheme_by_name(name)?;
            for &seed in &seeds {
                work.push(Job {
                    dir: format!("{name}-{i}-s{seed}"),
                    value: text.clone(),
                    scheme: scheme.clone(),
                    seed,
                    file: file.clone(),
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let rows: Vec<Vec<String>> = pool.install(|| {
        work.into_par_iter()
            .map(|job| {
                let algo = AlgorithmConfig { seed: job.seed, ..*algo };
                let outcome = run_to_dir(&job.file, coupling, &algo, &job.scheme, &out_dir.join(&job.dir));
                let mut row = vec![job.dir.clone(), job.value, job.scheme.name().into(), job.seed.to_string()];
                match outcome {
                    Ok(r) => row.extend([
                        format!("{}", r.report.min_rate),
                        r.report.sidelobe_level_db.map_or_else(String::new, |v| format!("{v}")),
                        r.report.satisfied.to_string(),
                        String::new(),
                    ]),
                    Err(e) => {
                        log::warn!("{}: {e:#}", job.dir);
                        row.extend([String::new(), String::new(), "false".into(), format!("{e:#}")]);
                    }
                }
                row
            })
            .collect()
    });
    let header: Vec<String> = ["run", "value", "scheme", "seed", "min_rate_bps_hz", "sll_db", "satisfied", "error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let path = out_dir.join("summary.csv");
    write_records(&path, &header, &rows)?;
    Ok(path)
}

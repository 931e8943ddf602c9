use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use holo_isac::files::{apply_override, CouplingChoice, ScenarioFile, StateFile};
use holo_isac::output::{write_beampattern, write_json, write_table};
use holo_isac::recipes::{run_experiment, Experiment};
use holo_isac::run::{grid_sidelobe, run_to_dir, state_beamformer, Scheme};
use holo_isac::sweep::{run_sweep, scheme_by_name, SweepFile};
use holo_isac_core::optimize::{AlgorithmConfig, PhasedArrayConfig};
use holo_isac_core::scenario::beampattern_grid;

#[derive(Parser)]
#[command(name = "holo-isac", version, about = "Holographic ISAC beamforming with mutual coupling")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Random seed (random-pattern baseline, sweeps).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for result files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Coupling model: `synthetic`, `zero`, or a coupling file.
    #[arg(long, global = true, default_value = "synthetic")]
    coupling: String,
    /// Outer stopping threshold on the worst rate, bps/Hz.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Holographic step scale.
    #[arg(long, global = true)]
    eta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Coupling-aware joint design.
    Optimize {
        scenario: PathBuf,
        /// Scenario override, `path.to.field=value` (repeatable).
        #[arg(long = "set")]
        overrides: Vec<String>,
    },
    /// Baseline design: unaware, random, midpoint or phased-array.
    Baseline {
        name: String,
        scenario: PathBuf,
        #[arg(long = "set")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 6)]
        pa_rows: usize,
        #[arg(long, default_value_t = 6)]
        pa_cols: usize,
        /// Phased-array spacing in wavelengths.
        #[arg(long, default_value_t = 0.5)]
        pa_spacing: f64,
        #[arg(long, default_value_t = 1.0)]
        pa_gain: f64,
    },
    /// Beampattern grid and SLL of a saved state.
    Beampattern {
        state: PathBuf,
        /// Grid step, degrees.
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
        /// Main-lobe exclusion radius for the SLL, degrees.
        #[arg(long, default_value_t = 10.0)]
        exclusion: f64,
    },
    /// Named experiment (fig-beampattern, fig-iteration-gains,
    /// fig-rate-vs-threshold, fig-neumann-convergence).
    Experiment {
        recipe: String,
        /// Base scenario; the reference scenario when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long = "set")]
        overrides: Vec<String>,
    },
    /// Parameter sweep described by a JSON file.
    Sweep {
        sweep: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Writes the reference scenario file.
    Reference {
        #[arg(default_value = "scenario.json")]
        path: PathBuf,
    },
}

impl Common {
    fn algo(&self) -> Result<AlgorithmConfig> {
        let mut algo = AlgorithmConfig {
            seed: self.seed,
            ..AlgorithmConfig::default()
        };
        if let Some(e) = self.epsilon {
            algo.epsilon = e;
        }
        if let Some(eta) = self.eta {
            algo.holo.eta = eta;
        }
        algo.validate()?;
        Ok(algo)
    }

    fn coupling(&self) -> CouplingChoice {
        self.coupling.parse().expect("infallible")
    }
}

fn load_scenario(path: Option<&Path>, overrides: &[String]) -> Result<ScenarioFile> {
    let mut file = match path {
        Some(p) => ScenarioFile::load(p)?,
        None => ScenarioFile::reference(),
    };
    for o in overrides {
        file = apply_override(&file, o)?;
    }
    Ok(file)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let common = &cli.common;
    let out = &common.out_dir;
    match &cli.command {
        Command::Optimize { scenario, overrides } => {
            let file = load_scenario(Some(scenario), overrides)?;
            run_to_dir(&file, &common.coupling(), &common.algo()?, &Scheme::Aware, out)?;
        }
        Command::Baseline {
            name,
            scenario,
            overrides,
            pa_rows,
            pa_cols,
            pa_spacing,
            pa_gain,
        } => {
            let file = load_scenario(Some(scenario), overrides)?;
            let scheme = if name == "phased-array" || name == "phased_array" {
                Scheme::PhasedArray(PhasedArrayConfig {
                    rows: *pa_rows,
                    cols: *pa_cols,
                    spacing: *pa_spacing,
                    element_gain: *pa_gain,
                })
            } else {
                scheme_by_name(name).context("baseline names: unaware, random, midpoint, phased-array")?
            };
            run_to_dir(&file, &common.coupling(), &common.algo()?, &scheme, out)?;
        }
        Command::Beampattern {
            state,
            resolution,
            exclusion,
        } => {
            let saved = StateFile::load(state)?;
            let coupling = (common.coupling != "synthetic").then(|| common.coupling());
            let (cfg, b) = state_beamformer(&saved, coupling.as_ref())?;
            let grid = beampattern_grid(&b, &saved.state.covariance(), &cfg, *resolution)?;
            write_beampattern(&out.join("beampattern.csv"), &grid)?;
            let sll = grid_sidelobe(&grid, &saved.scenario, *exclusion);
            let cell = match &sll {
                Ok(v) => format!("{v}"),
                Err(e) => {
                    log::warn!("SLL: {e:#}");
                    String::new()
                }
            };
            write_table(&out.join("sll.csv"), &["exclusion_deg", "sll_db"], [(*exclusion, cell)])?;
            if let Ok(v) = sll {
                log::info!("SLL {v:.2} dB");
            }
        }
        Command::Experiment {
            recipe,
            scenario,
            overrides,
        } => {
            let exp = Experiment {
                scenario: load_scenario(scenario.as_deref(), overrides)?,
                coupling: common.coupling(),
                algo: common.algo()?,
                out_dir: out.clone(),
            };
            for path in run_experiment(recipe, &exp)? {
                log::info!("wrote {}", path.display());
            }
        }
        Command::Sweep { sweep, jobs } => {
            let file = SweepFile::load(sweep)?;
            let path = run_sweep(&file, &common.coupling(), &common.algo()?, out, *jobs)?;
            log::info!("wrote {}", path.display());
        }
        Command::Reference { path } => write_json(path, &ScenarioFile::reference())?,
    }
    Ok(())
}

//! One optimization or baseline run and the files it leaves behind.

use std::path::Path;

use anyhow::{Context, Result};
use holo_isac_core::linalg::CMat;
use holo_isac_core::optimize::{
    alternating_optimize, baseline_phased_array, baseline_random, baseline_unaware, fixed_pattern, mainlobe_directions, AlgorithmConfig,
    PhasedArrayConfig, RunReport,
};
use holo_isac_core::rhs::{build_reference_wave, holographic_beamformer, RhsConfig};
use holo_isac_core::scenario::{beampattern_grid, sidelobe_level, BeamformingState, BeampatternGrid};
use serde::{Deserialize, Serialize};

use crate::files::{CouplingChoice, ScenarioFile, StateFile};
use crate::output::{write_beampattern, write_json, write_run_log, write_trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum Scheme {
    /// Joint design with the coupling model.
    Aware,
    /// Joint design with the coupling ignored, evaluated with it.
    Unaware,
    /// Random pattern, digital design only.
    Random,
    /// Midpoint pattern, digital design only.
    Midpoint,
    PhasedArray(PhasedArrayConfig),
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Aware => "aware",
            Scheme::Unaware => "unaware",
            Scheme::Random => "random",
            Scheme::Midpoint => "midpoint",
            Scheme::PhasedArray(_) => "phased_array",
        }
    }
}

/// Everything a run produces, before it is written out.
pub struct RunResult {
    pub report: RunReport,
    pub state: StateFile,
    pub grid: BeampatternGrid,
}

/// Beamformer of a saved state under its recorded surface and coupling
/// (or phased array).
pub fn state_beamformer(state: &StateFile, coupling: Option<&CouplingChoice>) -> Result<(RhsConfig, CMat)> {
    if let Some(pa) = &state.phased_array {
        return Ok((pa.geometry(state.surface.wavelength)?, pa.beamformer()));
    }
    let cfg = state.surface.build()?;
    let (stored, params) = CouplingChoice::from_source(&state.coupling);
    let model = coupling.unwrap_or(&stored).build(&cfg, &params)?;
    let reference = build_reference_wave(&cfg)?;
    let b = holographic_beamformer(&state.state.pattern, &cfg, &model, &reference)?;
    Ok((cfg, b))
}

pub fn execute(file: &ScenarioFile, coupling: &CouplingChoice, algo: &AlgorithmConfig, scheme: &Scheme) -> Result<RunResult> {
    let scenario = file.scenario()?;
    let cfg = file.surface()?;
    let model = coupling.build(&cfg, &file.coupling)?;
    let name = scheme.name();
    let (state, report): (BeamformingState, RunReport) = match scheme {
        Scheme::Aware => alternating_optimize(&scenario, &cfg, &model, algo),
        Scheme::Unaware => baseline_unaware(&scenario, &cfg, &model, algo),
        Scheme::Random => baseline_random(&scenario, &cfg, &model, algo, algo.seed),
        Scheme::Midpoint => fixed_pattern(&scenario, &cfg, &model, algo, cfg.midpoint_pattern(), "midpoint"),
        Scheme::PhasedArray(pa) => baseline_phased_array(&scenario, pa, cfg.wavelength, algo),
    }
    .with_context(|| format!("{name} run"))?;
    let saved = StateFile {
        surface: file.surface.clone(),
        coupling: model.source.clone(),
        phased_array: match scheme {
            Scheme::PhasedArray(pa) => Some(*pa),
            _ => None,
        },
        scenario: file.clone(),
        state,
    };
    let (grid_cfg, b) = state_beamformer(&saved, None)?;
    let grid = beampattern_grid(&b, &saved.state.covariance(), &grid_cfg, algo.grid_resolution_deg)?;
    Ok(RunResult {
        report,
        state: saved,
        grid,
    })
}

/// Writes `scenario.json`, `report.json`, `state.json`, `beampattern.csv`,
/// `trace.csv`, `run.jsonl` and `timings.json` into `dir`.
pub fn write_result(dir: &Path, result: &RunResult) -> Result<()> {
    write_json(&dir.join("scenario.json"), &result.state.scenario)?;
    write_json(&dir.join("report.json"), &result.report)?;
    write_json(&dir.join("state.json"), &result.state)?;
    write_beampattern(&dir.join("beampattern.csv"), &result.grid)?;
    write_trace(&dir.join("trace.csv"), &result.report)?;
    write_run_log(&dir.join("run.jsonl"), &result.report)?;
    write_json(&dir.join("timings.json"), &result.report.timings)?;
    Ok(())
}

pub fn run_to_dir(
    file: &ScenarioFile,
    coupling: &CouplingChoice,
    algo: &AlgorithmConfig,
    scheme: &Scheme,
    dir: &Path,
) -> Result<RunResult> {
    let result = execute(file, coupling, algo, scheme)?;
    write_result(dir, &result)?;
    log::info!(
        "{}: worst rate {:.4} bps/Hz, SLL {}, constraints {}",
        scheme.name(),
        result.report.min_rate,
        result
            .report
            .sidelobe_level_db
            .map_or("undefined".to_string(), |v| format!("{v:.2} dB")),
        if result.report.satisfied { "met" } else { "VIOLATED" }
    );
    Ok(result)
}

/// SLL of a beampattern grid around the scenario's main lobes.
pub fn grid_sidelobe(grid: &BeampatternGrid, file: &ScenarioFile, exclusion_deg: f64) -> Result<f64> {
    let scenario = file.scenario()?;
    Ok(sidelobe_level(grid, &mainlobe_directions(&scenario), exclusion_deg)?)
}

//! Named experiments. Each writes a scenario snapshot plus one run directory
//! per scheme (report, state, beampattern, trace), and a small summary table.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use holo_isac_core::linalg::CVec;
use holo_isac_core::math::linear_to_db;
use holo_isac_core::optimize::AlgorithmConfig;
use holo_isac_core::rhs::{build_reference_wave, holographic_beamformer, neumann_decomposition};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::files::{apply_override, CouplingChoice, ScenarioFile};
use crate::output::{write_json, write_records, write_table};
use crate::run::{grid_sidelobe, run_to_dir, RunResult, Scheme};

pub const RECIPES: &[&str] = &[
    "fig-beampattern",
    "fig-iteration-gains",
    "fig-rate-vs-threshold",
    "fig-neumann-convergence",
];

/// Clutter ceilings swept by `fig-rate-vs-threshold`, dB.
pub const CLUTTER_SWEEP_DB: &[f64] = &[4.0, 7.0, 10.0, 13.0, 16.0];

/// Series lengths evaluated by `fig-neumann-convergence`.
pub const NEUMANN_MAX_TERMS: usize = 20;

#[derive(Debug, Clone)]
pub struct Experiment {
    pub scenario: ScenarioFile,
    pub coupling: CouplingChoice,
    pub algo: AlgorithmConfig,
    pub out_dir: PathBuf,
}

/// Runs `recipe` and returns the files it wrote (summary tables only; run
/// directories are listed by their report).
pub fn run_experiment(recipe: &str, exp: &Experiment) -> Result<Vec<PathBuf>> {
    if !RECIPES.contains(&recipe) {
        bail!("unknown recipe '{recipe}' (known: {})", RECIPES.join(", "));
    }
    write_json(&exp.out_dir.join("scenario.json"), &exp.scenario)?;
    match recipe {
        "fig-beampattern" => beampattern(exp),
        "fig-iteration-gains" => iteration_gains(exp),
        "fig-rate-vs-threshold" => rate_vs_threshold(exp),
        _ => neumann_convergence(exp),
    }
}

fn run(exp: &Experiment, file: &ScenarioFile, scheme: Scheme, dir: &Path) -> Result<RunResult> {
    run_to_dir(file, &exp.coupling, &exp.algo, &scheme, dir)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

fn beampattern(exp: &Experiment) -> Result<Vec<PathBuf>> {
    let (aware, unaware) = rayon::join(
        || run(exp, &exp.scenario, Scheme::Aware, &exp.out_dir.join("aware")),
        || run(exp, &exp.scenario, Scheme::Unaware, &exp.out_dir.join("unaware")),
    );
    let mut rows = Vec::new();
    for (name, result) in [("aware", aware?), ("unaware", unaware?)] {
        let sll = grid_sidelobe(&result.grid, &exp.scenario, exp.algo.sidelobe_exclusion_deg).ok();
        rows.push((name, fmt_opt(sll), result.report.min_rate, result.report.satisfied));
    }
    let path = exp.out_dir.join("sll.csv");
    write_table(&path, &["scheme", "sll_db", "min_rate_bps_hz", "satisfied"], rows)?;
    Ok(vec![path])
}

fn iteration_gains(exp: &Experiment) -> Result<Vec<PathBuf>> {
    let result = run(exp, &exp.scenario, Scheme::Aware, &exp.out_dir.join("aware"))?;
    let iters = &result.report.iterations;
    let ns = iters.first().map_or(0, |r| r.sensing_gains.len());
    let nc = iters.first().map_or(0, |r| r.clutter_gains.len());
    let mut header = vec!["iter".to_string()];
    header.extend((0..ns).map(|d| format!("sensing_{d}_db")));
    header.extend((0..nc).map(|w| format!("clutter_{w}_db")));
    let rows: Vec<Vec<String>> = iters
        .iter()
        .map(|r| {
            let mut row = vec![r.iter.to_string()];
            row.extend(
                r.sensing_gains
                    .iter()
                    .chain(&r.clutter_gains)
                    .map(|g| format!("{}", linear_to_db(*g))),
            );
            row
        })
        .collect();
    let path = exp.out_dir.join("gains.csv");
    write_records(&path, &header, &rows)?;
    Ok(vec![path])
}

fn rate_vs_threshold(exp: &Experiment) -> Result<Vec<PathBuf>> {
    let nc = exp.scenario.clutterers.len();
    if nc == 0 {
        bail!("fig-rate-vs-threshold needs at least one clutterer");
    }
    let mut points = Vec::new();
    for (i, &db) in CLUTTER_SWEEP_DB.iter().enumerate() {
        let mut file = exp.scenario.clone();
        for w in 0..nc {
            file = apply_override(&file, &format!("thresholds.clutter_gain_db.{w}={db}"))?;
        }
        for scheme in [Scheme::Aware, Scheme::Random] {
            points.push((i, db, scheme, file.clone()));
        }
    }
    let outcomes: Vec<(f64, &'static str, Result<RunResult>)> = points
        .into_par_iter()
        .map(|(i, db, scheme, file)| {
            let dir = exp.out_dir.join(format!("{}-{i}", scheme.name()));
            let name = scheme.name();
            (db, name, run(exp, &file, scheme, &dir))
        })
        .collect();
    let mut rows = Vec::new();
    for (db, name, result) in outcomes {
        match result {
            Ok(r) => rows.push(vec![
                format!("{db}"),
                name.to_string(),
                format!("{}", r.report.min_rate),
                r.report.satisfied.to_string(),
                String::new(),
            ]),
            Err(e) => {
                log::warn!("{name} at {db} dB: {e:#}");
                rows.push(vec![
                    format!("{db}"),
                    name.to_string(),
                    String::new(),
                    "false".into(),
                    format!("{e:#}"),
                ]);
            }
        }
    }
    let header: Vec<String> = ["clutter_gain_db", "scheme", "min_rate_bps_hz", "satisfied", "error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let path = exp.out_dir.join("rate.csv");
    write_records(&path, &header, &rows)?;
    Ok(vec![path])
}

fn neumann_convergence(exp: &Experiment) -> Result<Vec<PathBuf>> {
    let result = run(exp, &exp.scenario, Scheme::Aware, &exp.out_dir.join("aware"))?;
    let cfg = exp.scenario.surface()?;
    let model = exp.coupling.build(&cfg, &exp.scenario.coupling)?;
    let reference = build_reference_wave(&cfg)?;
    let pattern = &result.state.state.pattern;
    let b = holographic_beamformer(pattern, &cfg, &model, &reference)?;
    let m = cfg.num_feeds();
    let u = CVec::from_element(m, Complex64::new(1.0 / (m as f64).sqrt(), 0.0));
    let exact = &b * &u;
    let mut rows = Vec::new();
    for terms in 1..=NEUMANN_MAX_TERMS {
        let series = neumann_decomposition(pattern, &cfg, &model, &reference, &u, terms)?;
        rows.push((terms, (&exact - &series.sum).norm(), series.tail_bound(), series.contraction));
    }
    let series_path = exp.out_dir.join("neumann.csv");
    write_table(&series_path, &["terms", "truncation_error", "tail_bound", "contraction"], rows)?;

    let holo = result.report.holo_trace.iter().map(|h| {
        (
            h.outer,
            h.inner,
            h.delta,
            h.slack,
            h.min_sinr,
            h.max_violation,
            h.eigen_ratio,
            h.accepted,
        )
    });
    let trace_path = exp.out_dir.join("holo_trace.csv");
    write_table(
        &trace_path,
        &[
            "outer",
            "inner",
            "delta",
            "slack",
            "min_sinr",
            "max_violation",
            "eigen_ratio",
            "accepted",
        ],
        holo,
    )?;
    Ok(vec![series_path, trace_path])
}

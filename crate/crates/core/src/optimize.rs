//! Joint design by alternating digital and holographic stages, the
//! comparison schemes, and the reference scenario.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digital::{digital_fp_loop, matched_precoder, DigitalOptions};
use crate::error::{Error, Result};
use crate::holo::{holographic_bf_loop, HoloContext, HoloOptions, HoloTraceEntry};
use crate::linalg::{CMat, ONE};
use crate::math::dbm_to_watts;
#[allow(unused_imports)]
use crate::math::Float;
use crate::rhs::{build_reference_wave, holographic_beamformer, CouplingModel, GridSpec, HolographicPattern, RhsConfig};
use crate::scenario::{
    beampattern_grid, evaluate, sidelobe_level, BeamformingState, Direction, Evaluation, Links, Scenario, Thresholds, User, Violation,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    /// Outer loop stops when the worst rate changes by less than this (bps/Hz).
    pub epsilon: f64,
    pub max_outer: usize,
    pub digital: DigitalOptions,
    pub holo: HoloOptions,
    pub seed: u64,
    /// Beampattern grid step for the sidelobe report, degrees.
    pub grid_resolution_deg: f64,
    /// Main-lobe exclusion radius for the sidelobe report, degrees.
    pub sidelobe_exclusion_deg: f64,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig {
            epsilon: 1e-3,
            max_outer: 30,
            digital: DigitalOptions::default(),
            holo: HoloOptions::default(),
            seed: 0,
            grid_resolution_deg: 1.0,
            sidelobe_exclusion_deg: 10.0,
        }
    }
}

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("eta", self.holo.eta),
            ("solver tolerance", self.digital.solver.tol),
            ("grid resolution", self.grid_resolution_deg),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_outer == 0 || self.holo.inner_max == 0 || self.holo.outer_max == 0 || self.digital.max_iter == 0 {
            return Err(Error::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// One outer iteration of the joint design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub min_rate_bps_hz: f64,
    /// Worst fractional-programming slack of the digital stage.
    pub slack: f64,
    pub max_violation: f64,
    pub digital_iterations: usize,
    pub holo_steps: usize,
    pub sensing_gains: Vec<f64>,
    pub clutter_gains: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub total_s: f64,
    pub digital_s: f64,
    pub holo_s: f64,
}

/// Everything reported about one run, evaluated under the true coupling model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scheme: String,
    /// Worst rate of the starting point (which need not be feasible).
    pub initial_min_rate: f64,
    pub iterations: Vec<IterationRecord>,
    pub holo_trace: Vec<HoloTraceEntry>,
    pub min_rate: f64,
    pub rates: Vec<f64>,
    pub sensing_gains: Vec<f64>,
    pub clutter_gains: Vec<f64>,
    pub power: f64,
    pub sidelobe_level_db: Option<f64>,
    pub violations: Vec<Violation>,
    pub satisfied: bool,
    #[serde(skip)]
    pub timings: Timings,
}

impl RunReport {
    pub fn min_rate_trace(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.min_rate_bps_hz).collect()
    }
}

#[cfg(feature = "std")]
struct Clock(std::time::Instant);
#[cfg(feature = "std")]
impl Clock {
    fn start() -> Self {
        Clock(std::time::Instant::now())
    }
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
#[cfg(not(feature = "std"))]
struct Clock;
#[cfg(not(feature = "std"))]
impl Clock {
    fn start() -> Self {
        Clock
    }
    fn seconds(&self) -> f64 {
        0.0
    }
}

/// Main lobes for the sidelobe report: users and sensing directions.
pub fn mainlobe_directions(scenario: &Scenario) -> Vec<Direction> {
    scenario
        .users
        .iter()
        .map(|u| u.direction)
        .chain(scenario.sensing_dirs.iter().copied())
        .collect()
}

fn sidelobe(b: &CMat, state: &BeamformingState, scenario: &Scenario, cfg: &RhsConfig, algo: &AlgorithmConfig) -> Result<Option<f64>> {
    let grid = beampattern_grid(b, &state.covariance(), cfg, algo.grid_resolution_deg)?;
    match sidelobe_level(&grid, &mainlobe_directions(scenario), algo.sidelobe_exclusion_deg) {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedSidelobe(why)) => {
            log::warn!("sidelobe level undefined: {why}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

struct Finished {
    scheme: String,
    initial_min_rate: f64,
    iterations: Vec<IterationRecord>,
    holo_trace: Vec<HoloTraceEntry>,
    timings: Timings,
}

fn report(f: Finished, eval: Evaluation, sll: Option<f64>) -> RunReport {
    let satisfied = eval.satisfied();
    RunReport {
        scheme: f.scheme,
        initial_min_rate: f.initial_min_rate,
        iterations: f.iterations,
        holo_trace: f.holo_trace,
        min_rate: eval.min_rate,
        rates: eval.rates,
        sensing_gains: eval.sensing_gains,
        clutter_gains: eval.clutter_gains,
        power: eval.power,
        sidelobe_level_db: sll,
        violations: eval.violations,
        satisfied,
        timings: f.timings,
    }
}

/// Alternates the digital and holographic stages from the midpoint pattern
/// and conjugate-matched beams until the worst rate settles.
pub fn alternating_optimize(
    scenario: &Scenario,
    cfg: &RhsConfig,
    coupling: &CouplingModel,
    algo: &AlgorithmConfig,
) -> Result<(BeamformingState, RunReport)> {
    let (state, finished) = alternate(scenario, cfg, coupling, algo, "aware")?;
    let links = Links::new(scenario, cfg)?;
    let b = holographic_beamformer(&state.pattern, cfg, coupling, &build_reference_wave(cfg)?)?;
    let eval = evaluate(scenario, cfg, &links, &b, &state)?;
    let sll = sidelobe(&b, &state, scenario, cfg, algo)?;
    Ok((state, report(finished, eval, sll)))
}

fn alternate(
    scenario: &Scenario,
    cfg: &RhsConfig,
    coupling: &CouplingModel,
    algo: &AlgorithmConfig,
    scheme: &str,
) -> Result<(BeamformingState, Finished)> {
    scenario.validate()?;
    cfg.validate()?;
    algo.validate()?;
    let clock = Clock::start();
    let links = Links::new(scenario, cfg)?;
    let reference = build_reference_wave(cfg)?;
    let ctx = HoloContext {
        scenario,
        cfg,
        coupling,
        reference: &reference,
        links: &links,
    };
    let l = scenario.users.len();
    let mut state = BeamformingState {
        v_c: CMat::zeros(reference.0.ncols(), l),
        v_s: CMat::zeros(reference.0.ncols(), scenario.num_waveforms),
        pattern: cfg.midpoint_pattern(),
    };
    let mut b = holographic_beamformer(&state.pattern, cfg, coupling, &reference)?;
    let v0 = matched_precoder(scenario, &links, &b);
    state.v_c = v0.columns(0, l).into_owned();
    let mut eval = evaluate(scenario, cfg, &links, &b, &state)?;
    let initial = eval.min_rate;
    let mut prev = initial;
    let mut records = Vec::new();
    let mut holo_trace = Vec::new();
    let mut timings = Timings::default();
    for iter in 1..=algo.max_outer {
        let t0 = clock.seconds();
        let digital = digital_fp_loop(scenario, &links, &b, &state.precoder(), &algo.digital).map_err(|e| {
            if iter == 1 {
                e.context("initial digital design")
            } else {
                e.context(format!("outer iteration {iter}, digital stage"))
            }
        })?;
        let candidate = BeamformingState {
            v_c: digital.v_c,
            v_s: digital.v_s,
            pattern: state.pattern.clone(),
        };
        let cand_eval = evaluate(scenario, cfg, &links, &b, &candidate)?;
        // Keep the incumbent when a feasible one is not beaten.
        if iter == 1 || !eval.satisfied() || cand_eval.min_rate >= eval.min_rate {
            state = candidate;
        } else {
            log::debug!("digital stage did not improve the incumbent; keeping it");
        }
        let t1 = clock.seconds();
        timings.digital_s += t1 - t0;
        let holo =
            holographic_bf_loop(&state, &ctx, &algo.holo).map_err(|e| e.context(format!("outer iteration {iter}, holographic stage")))?;
        timings.holo_s += clock.seconds() - t1;
        let steps = holo.trace.len();
        holo_trace.extend(holo.trace.into_iter().map(|mut t| {
            t.outer += (iter - 1) * algo.holo.outer_max;
            t
        }));
        state.pattern = holo.pattern;
        b = holo.beamformer;
        eval = holo.evaluation;
        records.push(IterationRecord {
            iter,
            min_rate_bps_hz: eval.min_rate,
            slack: digital.auxiliaries.slack,
            max_violation: eval.max_violation(),
            digital_iterations: digital.iterations,
            holo_steps: steps,
            sensing_gains: eval.sensing_gains.clone(),
            clutter_gains: eval.clutter_gains.clone(),
        });
        log::info!("{scheme} iteration {iter}: worst rate {:.6} bps/Hz", eval.min_rate);
        let change = (eval.min_rate - prev).abs();
        prev = eval.min_rate;
        if change < algo.epsilon {
            break;
        }
    }
    timings.total_s = clock.seconds();
    Ok((
        state,
        Finished {
            scheme: scheme.to_string(),
            initial_min_rate: initial,
            iterations: records,
            holo_trace,
            timings,
        },
    ))
}

/// Designs with the coupling ignored, then evaluates under the true model.
pub fn baseline_unaware(
    scenario: &Scenario,
    cfg: &RhsConfig,
    coupling: &CouplingModel,
    algo: &AlgorithmConfig,
) -> Result<(BeamformingState, RunReport)> {
    let zero = CouplingModel::zero(cfg.num_elements());
    let (state, finished) = alternate(scenario, cfg, &zero, algo, "unaware")?;
    let links = Links::new(scenario, cfg)?;
    let b = holographic_beamformer(&state.pattern, cfg, coupling, &build_reference_wave(cfg)?)?;
    let eval = evaluate(scenario, cfg, &links, &b, &state)?;
    if !eval.satisfied() {
        log::warn!(
            "coupling-unaware design violates {} constraints under the true model",
            eval.failures().len()
        );
    }
    let sll = sidelobe(&b, &state, scenario, cfg, algo)?;
    Ok((state, report(finished, eval, sll)))
}

/// Uniformly random pattern in the polarizability range; only the digital
/// beamformers are optimized.
pub fn baseline_random(
    scenario: &Scenario,
    cfg: &RhsConfig,
    coupling: &CouplingModel,
    algo: &AlgorithmConfig,
    seed: u64,
) -> Result<(BeamformingState, RunReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pattern = HolographicPattern(
        (0..cfg.num_elements())
            .map(|_| {
                if cfg.theta_min < cfg.theta_max {
                    rng.random_range(cfg.theta_min..=cfg.theta_max)
                } else {
                    cfg.theta_min
                }
            })
            .collect(),
    );
    fixed_pattern(scenario, cfg, coupling, algo, pattern, "random")
}

/// Digital design only, for a given pattern.
pub fn fixed_pattern(
    scenario: &Scenario,
    cfg: &RhsConfig,
    coupling: &CouplingModel,
    algo: &AlgorithmConfig,
    pattern: HolographicPattern,
    scheme: &str,
) -> Result<(BeamformingState, RunReport)> {
    scenario.validate()?;
    cfg.check_pattern(&pattern)?;
    let clock = Clock::start();
    let links = Links::new(scenario, cfg)?;
    let b = holographic_beamformer(&pattern, cfg, coupling, &build_reference_wave(cfg)?)?;
    digital_only(scenario, cfg, &links, &b, pattern, algo, scheme, clock)
}

#[allow(clippy::too_many_arguments)]
fn digital_only(
    scenario: &Scenario,
    cfg: &RhsConfig,
    links: &Links,
    b: &CMat,
    pattern: HolographicPattern,
    algo: &AlgorithmConfig,
    scheme: &str,
    clock: Clock,
) -> Result<(BeamformingState, RunReport)> {
    let v0 = matched_precoder(scenario, links, b);
    let l = scenario.users.len();
    let start = BeamformingState {
        v_c: v0.columns(0, l).into_owned(),
        v_s: v0.columns(l, scenario.num_waveforms).into_owned(),
        pattern: pattern.clone(),
    };
    let initial = evaluate(scenario, cfg, links, b, &start)?.min_rate;
    let digital = digital_fp_loop(scenario, links, b, &v0, &algo.digital)?;
    let state = BeamformingState {
        v_c: digital.v_c,
        v_s: digital.v_s,
        pattern,
    };
    let eval = evaluate(scenario, cfg, links, b, &state)?;
    let digital_s = clock.seconds();
    let record = IterationRecord {
        iter: 1,
        min_rate_bps_hz: eval.min_rate,
        slack: digital.auxiliaries.slack,
        max_violation: eval.max_violation(),
        digital_iterations: digital.iterations,
        holo_steps: 0,
        sensing_gains: eval.sensing_gains.clone(),
        clutter_gains: eval.clutter_gains.clone(),
    };
    let sll = sidelobe(b, &state, scenario, cfg, algo)?;
    let finished = Finished {
        scheme: scheme.to_string(),
        initial_min_rate: initial,
        iterations: alloc::vec![record],
        holo_trace: Vec::new(),
        timings: Timings {
            total_s: clock.seconds(),
            digital_s,
            holo_s: 0.0,
        },
    };
    Ok((state, report(finished, eval, sll)))
}

/// Conventional array with one digitally driven port per antenna.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasedArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// Spacing in wavelengths.
    pub spacing: f64,
    /// Amplitude gain of each antenna port.
    pub element_gain: f64,
}

impl Default for PhasedArrayConfig {
    fn default() -> Self {
        PhasedArrayConfig {
            rows: 2,
            cols: 2,
            spacing: 0.5,
            element_gain: 1.0,
        }
    }
}

impl PhasedArrayConfig {
    /// Antenna positions as a surface description (one port per antenna).
    pub fn geometry(&self, wavelength: f64) -> Result<RhsConfig> {
        if !(self.element_gain > 0.0) {
            return Err(Error::Config(format!("element gain {} must be positive", self.element_gain)));
        }
        let n = self.rows * self.cols;
        let mut spec = GridSpec::new(self.rows, self.cols, n);
        spec.spacing = self.spacing;
        spec.wavelength = wavelength;
        spec.build()
    }

    /// `g I`
    pub fn beamformer(&self) -> CMat {
        let n = self.rows * self.cols;
        CMat::identity(n, n) * (ONE * self.element_gain)
    }
}

/// Digital beamforming on a phased array: the beamformer is `g I`.
pub fn baseline_phased_array(
    scenario: &Scenario,
    pa: &PhasedArrayConfig,
    wavelength: f64,
    algo: &AlgorithmConfig,
) -> Result<(BeamformingState, RunReport)> {
    let cfg = pa.geometry(wavelength)?;
    let clock = Clock::start();
    let links = Links::new(scenario, &cfg)?;
    let b = pa.beamformer();
    let pattern = HolographicPattern::uniform(cfg.num_elements(), cfg.theta_max);
    digital_only(scenario, &cfg, &links, &b, pattern, algo, "phased_array", clock)
}

/// Reference operating point at 30 GHz: 43 dBm budget, -96 dBm noise, one
/// user, two sensing targets and one clutterer around a 6×6 surface.
pub fn reference_scenario() -> Scenario {
    Scenario {
        users: alloc::vec![User {
            direction: Direction::new(20.0, 80.0),
            range_m: 20.0,
        }],
        sensing_dirs: alloc::vec![Direction::new(20.0, 260.0), Direction::new(20.0, 170.0)],
        clutterers: alloc::vec![Direction::new(90.0, 14.0)],
        thresholds: Thresholds {
            g_th_d: alloc::vec![REFERENCE_SENSING_GAIN; 2],
            g_th_w: alloc::vec![REFERENCE_CLUTTER_GAIN],
            r_th_l: alloc::vec![1.0],
            gamma_l_d: alloc::vec![0.9],
            gamma_u_d: alloc::vec![1.1],
        },
        p_max: dbm_to_watts(43.0),
        noise_var: dbm_to_watts(-96.0),
        num_waveforms: 4,
    }
}

/// Beampattern gain floor per target in the reference scenario.
pub const REFERENCE_SENSING_GAIN: f64 = 40.0;
/// Beampattern gain ceiling toward the clutterer in the reference scenario.
pub const REFERENCE_CLUTTER_GAIN: f64 = 10.0;

/// Surface of the reference scenario.
pub fn reference_surface() -> Result<RhsConfig> {
    GridSpec::new(6, 6, 4).build()
}

/// Reference scenario with every direction jittered by up to `jitter_deg`.
pub fn jittered_reference(seed: u64, jitter_deg: f64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = reference_scenario();
    let mut jitter = |d: &mut Direction| {
        d.theta_deg = (d.theta_deg + rng.random_range(-jitter_deg..=jitter_deg)).clamp(0.0, 90.0);
        d.phi_deg += rng.random_range(-jitter_deg..=jitter_deg);
        d.phi_deg -= 360.0 * (d.phi_deg / 360.0).floor();
    };
    for u in s.users.iter_mut() {
        jitter(&mut u.direction);
    }
    for d in s.sensing_dirs.iter_mut().chain(s.clutterers.iter_mut()) {
        jitter(d);
    }
    s
}

//! Holographic pattern design for fixed digital beamformers.
//!
//! Each step perturbs the reciprocal pattern, `Θ_k^{-1} = Θ_{k-1}^{-1} - δ Θ̃`,
//! linearizes the beamformer in `Θ̃` with a first-order Neumann expansion and
//! solves the resulting lifted QCQP over `Ξ = [Θ̃; 1][Θ̃; 1]^T` by
//! semidefinite relaxation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::digital::{rho_from_response, surrogate};
use crate::error::{ConstraintFamily, Error, Result};
use crate::linalg::{inverse, quad_form, spectral_norm, symmetric_eigen, CMat, CVec, RMat, RVec};
#[allow(unused_imports)]
use crate::math::Float;
use crate::rhs::{holographic_beamformer, system_matrix, CouplingModel, HolographicPattern, ReferenceWave, RhsConfig};
use crate::scenario::{evaluate, feed_response, BeamformingState, Evaluation, Links, Scenario};
use crate::sdp::{self, BlockKind, Coefficient, LinearForm, Relation, ScalarKind, SdpProblem, SdpStatus, Sense, SolverOptions};

/// `S = e^{-jτ} ((e^{jτ} Θ)^{-1} - G)^{-1}` at the current pattern.
pub fn compute_s_k(pattern: &HolographicPattern, cfg: &RhsConfig, coupling: &CouplingModel) -> Result<CMat> {
    let m = system_matrix(pattern, cfg, coupling)?;
    Ok(inverse(&m)? / cfg.phase_factor())
}

/// `δ = η / ‖S‖₂`
pub fn step_length(s: &CMat, eta: f64) -> Result<f64> {
    let norm = spectral_norm(s);
    if !(norm > 0.0) || !(eta > 0.0) {
        return Err(Error::Numeric(format!("step length needs ‖S‖ > 0 and η > 0, got {norm} and {eta}")));
    }
    Ok(eta / norm)
}

/// Linearization point of one pattern update.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannStep {
    pub s_k: CMat,
    pub delta: f64,
    /// `κ = k e^{jτ}`
    pub scale: Complex64,
    /// `S F_ref`
    pub sf: CMat,
}

impl NeumannStep {
    pub fn new(
        pattern: &HolographicPattern,
        cfg: &RhsConfig,
        coupling: &CouplingModel,
        reference: &ReferenceWave,
        eta: f64,
    ) -> Result<Self> {
        let s_k = compute_s_k(pattern, cfg, coupling)?;
        let delta = step_length(&s_k, eta)?;
        let sf = &s_k * &reference.0;
        Ok(NeumannStep {
            s_k,
            delta,
            scale: cfg.k_const * cfg.phase_factor(),
            sf,
        })
    }

    /// Beamformer at the linearization point.
    pub fn base(&self) -> CMat {
        &self.sf * self.scale
    }

    /// `κ (S F + δ S Θ̃ S F)`
    pub fn approx(&self, perturbation: &[f64]) -> CMat {
        let mut inner = self.sf.clone();
        for (n, &p) in perturbation.iter().enumerate() {
            inner.row_mut(n).scale_mut(self.delta * p);
        }
        (&self.sf + &self.s_k * inner) * self.scale
    }
}

/// First-order beamformer `k e^{jτ} (S + δ S Θ̃ S) F_ref`.
pub fn approx_beamformer(s_k: &CMat, delta: f64, perturbation: &[f64], cfg: &RhsConfig, reference: &ReferenceWave) -> Result<CMat> {
    let n = s_k.nrows();
    if perturbation.len() != n || reference.0.nrows() != n {
        return Err(Error::Dimension(format!(
            "{} perturbations, S is {n}x{n}, reference has {} rows",
            perturbation.len(),
            reference.0.nrows()
        )));
    }
    let step = NeumannStep {
        s_k: s_k.clone(),
        delta,
        scale: cfg.k_const * cfg.phase_factor(),
        sf: s_k * &reference.0,
    };
    Ok(step.approx(perturbation))
}

/// Applies `θ_k^{-1} = θ_{k-1}^{-1} - δ Θ̃_n` per element and clamps to the
/// configured range; returns the number of clamped entries.
pub fn update_pattern(pattern: &HolographicPattern, delta: f64, perturbation: &[f64], cfg: &RhsConfig) -> (HolographicPattern, usize) {
    let mut next = HolographicPattern(
        pattern
            .0
            .iter()
            .zip(perturbation)
            .map(|(&t, &p)| {
                let recip = 1.0 / t - delta * p;
                if recip > 0.0 {
                    1.0 / recip
                } else {
                    f64::INFINITY
                }
            })
            .collect(),
    );
    let moved = next.project(cfg.theta_min, cfg.theta_max);
    if moved > 0 {
        log::warn!("pattern update left the polarizability range at {moved} elements; clamped");
    }
    (next, moved)
}

/// Feasible interval of `Θ̃_n` keeping `θ_k` inside `[θ_min, θ_max]`.
pub fn perturbation_bounds(pattern: &HolographicPattern, delta: f64, cfg: &RhsConfig) -> (Vec<f64>, Vec<f64>) {
    let lo = pattern
        .0
        .iter()
        .map(|&t| ((1.0 / t - 1.0 / cfg.theta_min) / delta).clamp(-1.0, 1.0))
        .collect();
    let hi = pattern
        .0
        .iter()
        .map(|&t| ((1.0 / t - 1.0 / cfg.theta_max) / delta).clamp(-1.0, 1.0))
        .collect();
    (lo, hi)
}

/// `θ̃^T U θ̃ + 2 c^T θ̃ + b`, written as `Tr(M Ξ)` with `M = [[U, c], [c^T, b]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedForm {
    pub quad: RMat,
    pub linear: RVec,
    pub constant: f64,
}

impl LiftedForm {
    /// Real quadratic form of `g(θ̃)^H M g(θ̃)` with `g(θ̃) = g0 + J θ̃`.
    fn hermitian(m: &CMat, g0: &CVec, jac: &CMat) -> Self {
        let mj = m * jac;
        LiftedForm {
            quad: (jac.adjoint() * &mj).map(|z| z.re),
            linear: (jac.adjoint() * (m * g0)).map(|z| z.re),
            constant: g0.dotc(&(m * g0)).re,
        }
    }

    pub fn matrix(&self) -> RMat {
        let n = self.linear.len();
        let mut out = RMat::zeros(n + 1, n + 1);
        out.view_mut((0, 0), (n, n)).copy_from(&crate::linalg::symmetric_part(&self.quad));
        for i in 0..n {
            out[(i, n)] = self.linear[i];
            out[(n, i)] = self.linear[i];
        }
        out[(n, n)] = self.constant;
        out
    }

    pub fn eval(&self, perturbation: &[f64]) -> f64 {
        let x = RVec::from_column_slice(perturbation);
        x.dot(&(&self.quad * &x)) + 2.0 * self.linear.dot(&x) + self.constant
    }

    fn scaled(&self, s: f64) -> Self {
        LiftedForm {
            quad: &self.quad * s,
            linear: &self.linear * s,
            constant: self.constant * s,
        }
    }

    fn add(&self, other: &LiftedForm) -> Self {
        LiftedForm {
            quad: &self.quad + &other.quad,
            linear: &self.linear + &other.linear,
            constant: self.constant + other.constant,
        }
    }
}

/// Lifted data of the holographic QCQP at one linearization point.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloQcqpData {
    pub num_elements: usize,
    pub delta: f64,
    /// Surrogate of each user: `2 Re(ρ* v^H g) - |ρ|² (g^H Q_{-l} g + σ²)`.
    pub surrogate: Vec<LiftedForm>,
    /// `g^H (v v^H - (2^R - 1) Q_{-l}) g`, compared against `(2^R - 1) σ²`.
    pub rate: Vec<LiftedForm>,
    /// Beampattern gain per sensing direction.
    pub sensing: Vec<LiftedForm>,
    /// Beampattern gain per clutterer.
    pub clutter: Vec<LiftedForm>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Jacobian of `g = B^H conj(w)` in `Θ̃` under the first-order beamformer.
fn response_jacobian(step: &NeumannStep, w: &CVec) -> CMat {
    let n = step.s_k.nrows();
    let t = step.sf.ncols();
    // (S^H conj(w))_n
    let sw = step.s_k.adjoint() * w.conjugate();
    let kc = (step.scale * step.delta).conj();
    CMat::from_fn(t, n, |ti, ni| kc * sw[ni] * step.sf[(ni, ti)].conj())
}

/// `C_n`: selector with `Tr(C_n Ξ) = Θ̃_n t` for the lifted variable.
pub fn selector(n: usize, num_elements: usize) -> RMat {
    let mut c = RMat::zeros(num_elements + 1, num_elements + 1);
    c[(n, num_elements)] = 0.5;
    c[(num_elements, n)] = 0.5;
    c
}

pub fn build_holo_qcqp(
    v: &CMat,
    pattern: &HolographicPattern,
    step: &NeumannStep,
    scenario: &Scenario,
    links: &Links,
    rho: &[Complex64],
    cfg: &RhsConfig,
) -> Result<HoloQcqpData> {
    let n = step.s_k.nrows();
    let l_count = scenario.users.len();
    if pattern.len() != n || v.nrows() != step.sf.ncols() || rho.len() != l_count || links.users.len() != l_count {
        return Err(Error::Dimension(format!(
            "pattern {}, S {n}x{n}, precoder {}x{}, {} auxiliaries for {} users",
            pattern.len(),
            v.nrows(),
            v.ncols(),
            rho.len(),
            l_count
        )));
    }
    let b0 = step.base();
    let q = v * v.adjoint();
    let noise = scenario.noise_var;
    let gain_form = |w: &CVec| LiftedForm::hermitian(&q, &feed_response(&b0, w), &response_jacobian(step, w));

    let mut surrogate_forms = Vec::with_capacity(l_count);
    let mut rate_forms = Vec::with_capacity(l_count);
    for (l, h) in links.users.iter().enumerate() {
        let g0 = feed_response(&b0, h);
        let jac = response_jacobian(step, h);
        let vl = v.column(l).into_owned();
        let q_other = &q - &vl * vl.adjoint();
        let r = rho[l];
        let interference = LiftedForm::hermitian(&q_other, &g0, &jac);
        // 2 Re(ρ* v^H (g0 + J θ̃))
        let lin_g0 = 2.0 * (r.conj() * vl.dotc(&g0)).re;
        let lin_j = (jac.adjoint() * &vl).map(|z| (z.conj() * r.conj()).re);
        let signal = LiftedForm {
            quad: RMat::zeros(n, n),
            linear: lin_j,
            constant: lin_g0,
        };
        let mut s = signal.add(&interference.scaled(-r.norm_sqr()));
        s.constant -= r.norm_sqr() * noise;
        surrogate_forms.push(s);

        let need = 2f64.powf(scenario.thresholds.r_th_l[l]) - 1.0;
        let m = &vl * vl.adjoint() - q_other * Complex64::new(need, 0.0);
        rate_forms.push(LiftedForm::hermitian(&m, &g0, &jac));
    }
    let (lower, upper) = perturbation_bounds(pattern, step.delta, cfg);
    Ok(HoloQcqpData {
        num_elements: n,
        delta: step.delta,
        surrogate: surrogate_forms,
        rate: rate_forms,
        sensing: links.sensing.iter().map(gain_form).collect(),
        clutter: links.clutter.iter().map(gain_form).collect(),
        lower,
        upper,
    })
}

/// Relaxed solution of the holographic QCQP and candidate perturbations.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloRelaxation {
    pub xi: RMat,
    pub slack: f64,
    /// `λ₂ / λ₁` of `Ξ`.
    pub eigen_ratio: f64,
    /// First-moment and principal-eigenvector readings of `Ξ`, clamped to the bounds.
    pub candidates: Vec<Vec<f64>>,
}

/// Quantity entering a threshold row of the holographic problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Sensing(usize),
    Clutter(usize),
    Rate(usize),
}

/// Threshold constraint `Σ w_i q_i (≤ | ≥) rhs` over lifted quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardedRow {
    pub family: ConstraintFamily,
    pub label: String,
    terms: Vec<(Quantity, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl HoloQcqpData {
    fn quantity(&self, q: Quantity) -> &LiftedForm {
        match q {
            Quantity::Sensing(d) => &self.sensing[d],
            Quantity::Clutter(w) => &self.clutter[w],
            Quantity::Rate(l) => &self.rate[l],
        }
    }

    /// Lifted form of a row's left-hand side.
    pub fn row_form(&self, row: &GuardedRow) -> LiftedForm {
        let n = self.num_elements;
        let zero = LiftedForm {
            quad: RMat::zeros(n, n),
            linear: RVec::zeros(n),
            constant: 0.0,
        };
        row.terms.iter().fold(zero, |acc, &(q, w)| acc.add(&self.quantity(q).scaled(w)))
    }

    /// Clutter, balance, gain and rate rows, in a fixed order.
    pub fn guarded_rows(&self, scenario: &Scenario) -> Vec<GuardedRow> {
        let th = &scenario.thresholds;
        let mut rows = Vec::new();
        for w in 0..self.clutter.len() {
            rows.push(GuardedRow {
                family: ConstraintFamily::ClutterLeakage,
                label: format!("clutter[{w}]"),
                terms: alloc::vec![(Quantity::Clutter(w), 1.0)],
                relation: Relation::Le,
                rhs: th.g_th_w[w],
            });
        }
        for d in 1..self.sensing.len() {
            for (bound, relation, tag) in [(th.gamma_l_d[d - 1], Relation::Ge, "lo"), (th.gamma_u_d[d - 1], Relation::Le, "hi")] {
                rows.push(GuardedRow {
                    family: ConstraintFamily::SensingBalance,
                    label: format!("balance_{tag}[{d}]"),
                    terms: alloc::vec![(Quantity::Sensing(d), 1.0), (Quantity::Sensing(0), -bound)],
                    relation,
                    rhs: 0.0,
                });
            }
        }
        for d in 0..self.sensing.len() {
            if th.g_th_d[d] > 0.0 {
                rows.push(GuardedRow {
                    family: ConstraintFamily::SensingGain,
                    label: format!("gain[{d}]"),
                    terms: alloc::vec![(Quantity::Sensing(d), 1.0)],
                    relation: Relation::Ge,
                    rhs: th.g_th_d[d],
                });
            }
        }
        for l in 0..self.rate.len() {
            let need = 2f64.powf(th.r_th_l[l]) - 1.0;
            if need > 0.0 {
                rows.push(GuardedRow {
                    family: ConstraintFamily::UserRate,
                    label: format!("rate[{l}]"),
                    terms: alloc::vec![(Quantity::Rate(l), 1.0)],
                    relation: Relation::Ge,
                    rhs: need * scenario.noise_var,
                });
            }
        }
        rows
    }
}

/// `curvature[i]` tightens guarded row `i` by `curvature[i] · Σ_n Ξ_nn`,
/// i.e. by a multiple of `‖Θ̃‖²` on rank-one points.
fn holo_problem(data: &HoloQcqpData, scenario: &Scenario, slack_scale: f64, curvature: &[f64]) -> SdpProblem {
    let n = data.num_elements;
    let mut p = SdpProblem::new(Sense::Maximize);
    let xi = p.add_block(BlockKind::Symmetric, n + 1);
    let slack = p.add_scalar(ScalarKind::Free);
    p.objective = LinearForm::new().scalar(slack, slack_scale);
    for (l, f) in data.surrogate.iter().enumerate() {
        let form = LinearForm::new()
            .block(xi, Coefficient::Real(f.matrix()))
            .scalar(slack, -slack_scale);
        p.constrain_unguarded(form, Relation::Ge, 0.0, format!("surrogate[{l}]"));
    }
    for (i, row) in data.guarded_rows(scenario).iter().enumerate() {
        let mut m = data.row_form(row).matrix();
        let mu = curvature.get(i).copied().unwrap_or(0.0);
        let sign = if row.relation == Relation::Le { 1.0 } else { -1.0 };
        for k in 0..n {
            m[(k, k)] += sign * mu;
        }
        p.constrain(
            LinearForm::new().block(xi, Coefficient::Real(m)),
            row.relation,
            row.rhs,
            row.label.clone(),
        );
    }
    for i in 0..n {
        let (lo, hi) = (data.lower[i], data.upper[i]);
        let moment = || LinearForm::new().block(xi, Coefficient::Entries(alloc::vec![(i, n, 0.5.into()), (n, i, 0.5.into())]));
        p.constrain_unguarded(moment(), Relation::Ge, lo, format!("lower[{i}]"));
        p.constrain_unguarded(moment(), Relation::Le, hi, format!("upper[{i}]"));
        // (θ̃ - lo)(hi - θ̃) ≥ 0 lifted: (lo + hi) θ̃ - Ξ_ii ≥ lo·hi
        let cut = LinearForm::new().block(
            xi,
            Coefficient::Entries(alloc::vec![
                (i, i, (-1.0).into()),
                (i, n, (0.5 * (lo + hi)).into()),
                (n, i, (0.5 * (lo + hi)).into()),
            ]),
        );
        p.constrain_unguarded(cut, Relation::Ge, lo * hi, format!("interval[{i}]"));
    }
    p.constrain_unguarded(
        LinearForm::new().block(xi, Coefficient::entry(n, n, 1.0)),
        Relation::Eq,
        1.0,
        "corner",
    );
    p
}

/// Solves the relaxed holographic QCQP. `slack_hint` sets the scale of the
/// epigraph variable, typically the current worst surrogate value;
/// `curvature` holds per-row tightening weights (empty for none).
pub fn solve_holo_qcqp(
    data: &HoloQcqpData,
    scenario: &Scenario,
    slack_hint: f64,
    curvature: &[f64],
    opts: &SolverOptions,
) -> Result<HoloRelaxation> {
    let n = data.num_elements;
    let slack_scale = slack_hint.abs().max(1e-12);
    let sol = sdp::solve(&holo_problem(data, scenario, slack_scale, curvature), opts)?;
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible => {
            return Err(Error::Infeasible(crate::error::InfeasibilityReport {
                families: Vec::new(),
                detail: format!("holographic step with δ = {:.3e} has no feasible perturbation", data.delta),
            }))
        }
        SdpStatus::Unbounded => return Err(Error::Unbounded("holographic relaxation".into())),
        SdpStatus::MaxIter => {
            if sol.primal_residual > opts.margin.max(opts.tol) {
                return Err(Error::Solver(format!(
                    "holographic relaxation stopped after {} iterations (residual {:.2e})",
                    sol.iterations, sol.primal_residual
                )));
            }
        }
    }
    let xi = sol.real_block(0);
    let clamp = |v: Vec<f64>| -> Vec<f64> { v.iter().enumerate().map(|(i, &x)| x.clamp(data.lower[i], data.upper[i])).collect() };
    let mut candidates = alloc::vec![clamp((0..n).map(|i| xi[(i, n)] / xi[(n, n)].max(1e-300)).collect())];
    let (vals, vecs) = symmetric_eigen(&xi);
    let ratio = if vals[0] > 0.0 {
        vals.get(1).map_or(0.0, |v| v.max(0.0) / vals[0])
    } else {
        1.0
    };
    let u = vecs.column(0);
    if u[n].abs() > 1e-12 {
        candidates.push(clamp((0..n).map(|i| u[i] / u[n]).collect()));
    }
    Ok(HoloRelaxation {
        xi,
        slack: sol.scalars[0] * slack_scale,
        eigen_ratio: ratio,
        candidates,
    })
}

/// Gaussian randomization of a relaxed solution: draws from
/// `N(m, Ξ₁₁/Ξ_NN - m m^T)` with `m` the first moment, clamped to the bounds.
pub fn randomized_candidates(xi: &RMat, lower: &[f64], upper: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = xi.nrows() - 1;
    let w = xi[(n, n)].max(1e-300);
    let mean: RVec = RVec::from_iterator(n, (0..n).map(|i| xi[(i, n)] / w));
    let cov = xi.view((0, 0), (n, n)) / w - &mean * mean.transpose();
    let (vals, vecs) = symmetric_eigen(&((cov.clone() + cov.transpose()) * 0.5));
    let factor = RMat::from_fn(n, n, |i, j| vecs[(i, j)] * vals[j].max(0.0).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z = RVec::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let x = &mean + &factor * z;
            x.iter().enumerate().map(|(i, &v)| v.clamp(lower[i], upper[i])).collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoloOptions {
    pub eta: f64,
    pub max_halvings: usize,
    /// Re-solves per step after recalibrating the curvature tightening.
    pub max_corrections: usize,
    pub tol: f64,
    pub inner_max: usize,
    pub outer_max: usize,
    /// Gaussian draws audited when the relaxation is not rank one.
    #[serde(default = "default_randomizations")]
    pub randomizations: usize,
    pub solver: SolverOptions,
}

fn default_randomizations() -> usize {
    32
}

impl Default for HoloOptions {
    fn default() -> Self {
        HoloOptions {
            eta: 0.05,
            max_halvings: 5,
            max_corrections: 3,
            tol: 1e-4,
            inner_max: 50,
            outer_max: 10,
            randomizations: default_randomizations(),
            solver: SolverOptions {
                margin: 5e-7,
                ..SolverOptions::default()
            },
        }
    }
}

/// One inner iteration of the holographic stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoloTraceEntry {
    pub outer: usize,
    pub inner: usize,
    pub delta: f64,
    pub slack: f64,
    pub min_sinr: f64,
    pub max_violation: f64,
    pub eigen_ratio: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoloOutcome {
    pub pattern: HolographicPattern,
    pub beamformer: CMat,
    pub evaluation: Evaluation,
    pub trace: Vec<HoloTraceEntry>,
    pub sdp_solves: usize,
}

/// Context shared by the pattern search of one holographic stage.
pub struct HoloContext<'a> {
    pub scenario: &'a Scenario,
    pub cfg: &'a RhsConfig,
    pub coupling: &'a CouplingModel,
    pub reference: &'a ReferenceWave,
    pub links: &'a Links,
}

struct Point {
    pattern: HolographicPattern,
    b: CMat,
    eval: Evaluation,
    slack: f64,
}

/// Exact counterparts of the lifted quantities for fixed beamformers.
struct ExactQuantities {
    q: CMat,
    rate: Vec<CMat>,
}

impl ExactQuantities {
    fn new(v: &CMat, scenario: &Scenario) -> Self {
        let q = v * v.adjoint();
        let rate = (0..scenario.users.len())
            .map(|l| {
                let vl = v.column(l).into_owned();
                let qv = &vl * vl.adjoint();
                let need = 2f64.powf(scenario.thresholds.r_th_l[l]) - 1.0;
                &qv - (&q - &qv) * Complex64::new(need, 0.0)
            })
            .collect();
        ExactQuantities { q, rate }
    }

    fn value(&self, quantity: Quantity, b: &CMat, links: &Links) -> f64 {
        match quantity {
            Quantity::Sensing(d) => quad_form(&self.q, &feed_response(b, &links.sensing[d])),
            Quantity::Clutter(w) => quad_form(&self.q, &feed_response(b, &links.clutter[w])),
            Quantity::Rate(l) => quad_form(&self.rate[l], &feed_response(b, &links.users[l])),
        }
    }

    fn row(&self, row: &GuardedRow, b: &CMat, links: &Links) -> f64 {
        row.terms.iter().map(|&(q, w)| w * self.value(q, b, links)).sum()
    }
}

fn worst_surrogate(ctx: &HoloContext, b: &CMat, v: &CMat, rho: &[Complex64]) -> f64 {
    ctx.links
        .users
        .iter()
        .enumerate()
        .map(|(l, h)| surrogate(&feed_response(b, h), v, l, rho[l], ctx.scenario.noise_var))
        .fold(f64::INFINITY, f64::min)
}

fn min_sinr(e: &Evaluation) -> f64 {
    e.sinr.iter().copied().fold(f64::INFINITY, f64::min)
}

fn point(ctx: &HoloContext, pattern: HolographicPattern, v: &CMat, state: &BeamformingState, rho: &[Complex64]) -> Result<Point> {
    let b = holographic_beamformer(&pattern, ctx.cfg, ctx.coupling, ctx.reference)?;
    let probe = BeamformingState {
        v_c: state.v_c.clone(),
        v_s: state.v_s.clone(),
        pattern: pattern.clone(),
    };
    let eval = evaluate(ctx.scenario, ctx.cfg, ctx.links, &b, &probe)?;
    let slack = worst_surrogate(ctx, &b, v, rho);
    Ok(Point { pattern, b, eval, slack })
}

/// A candidate is admissible when it satisfies the audited constraints (or is
/// no worse than the current point, if that one is not feasible yet).
fn admissible(candidate: &Evaluation, current: &Evaluation) -> bool {
    candidate.satisfied() || (!current.satisfied() && candidate.max_violation() <= current.max_violation())
}

struct StepResult {
    accepted: Option<Point>,
    delta: f64,
    eigen_ratio: f64,
    solves: usize,
}

struct Stage<'a, 'b> {
    ctx: &'a HoloContext<'b>,
    opts: &'a HoloOptions,
    state: &'a BeamformingState,
    v: CMat,
    exact: ExactQuantities,
}

impl Stage<'_, '_> {
    /// One linearized step: solve, audit candidates exactly, recalibrate the
    /// curvature tightening on violations and retry; shrink δ on infeasibility.
    fn step(&self, cur: &Point, rho: &[Complex64], curvature: &mut Vec<f64>) -> Result<StepResult> {
        let ctx = self.ctx;
        let mut eta = self.opts.eta;
        let mut out = StepResult {
            accepted: None,
            delta: 0.0,
            eigen_ratio: 1.0,
            solves: 0,
        };
        for halving in 0..=self.opts.max_halvings {
            let step = NeumannStep::new(&cur.pattern, ctx.cfg, ctx.coupling, ctx.reference, eta)?;
            out.delta = step.delta;
            let data = build_holo_qcqp(&self.v, &cur.pattern, &step, ctx.scenario, ctx.links, rho, ctx.cfg)?;
            let rows = data.guarded_rows(ctx.scenario);
            curvature.resize(rows.len(), 0.0);
            let mut solved = false;
            for _ in 0..=self.opts.max_corrections {
                out.solves += 1;
                let relax = match solve_holo_qcqp(&data, ctx.scenario, cur.slack, curvature, &self.opts.solver) {
                    Ok(r) => r,
                    Err(Error::Infeasible(_)) | Err(Error::Solver(_)) => break,
                    Err(e) => return Err(e),
                };
                solved = true;
                out.eigen_ratio = relax.eigen_ratio;
                if relax.eigen_ratio > 1e-6 {
                    log::debug!(
                        "holographic relaxation not rank one (λ₂/λ₁ = {:.2e}); auditing candidates",
                        relax.eigen_ratio
                    );
                }
                let mut candidates = relax.candidates.clone();
                if relax.eigen_ratio > 1e-6 {
                    let seed = (halving * (self.opts.max_corrections + 1)) as u64 + out.solves as u64;
                    candidates.extend(randomized_candidates(
                        &relax.xi,
                        &data.lower,
                        &data.upper,
                        self.opts.randomizations,
                        seed,
                    ));
                }
                let mut best: Option<Point> = None;
                let mut probe: Option<(Vec<f64>, CMat)> = None;
                for cand in &candidates {
                    let mut scale = 1.0;
                    for _ in 0..4 {
                        let pert: Vec<f64> = cand.iter().map(|x| x * scale).collect();
                        let (pattern, _) = update_pattern(&cur.pattern, step.delta, &pert, ctx.cfg);
                        let p = point(ctx, pattern, &self.v, self.state, rho)?;
                        if admissible(&p.eval, &cur.eval) && p.slack > cur.slack {
                            if best.as_ref().is_none_or(|b| p.slack > b.slack) {
                                best = Some(p);
                            }
                            break;
                        }
                        if probe.is_none() {
                            probe = Some((pert, p.b.clone()));
                        }
                        scale *= 0.5;
                    }
                }
                if best.is_some() {
                    out.accepted = best;
                    for mu in curvature.iter_mut() {
                        *mu *= 0.8;
                    }
                    return Ok(out);
                }
                let Some((pert, b)) = probe else { break };
                if !self.recalibrate(&data, &rows, &pert, &b, curvature) {
                    break;
                }
            }
            if solved {
                break;
            }
            log::debug!("holographic step infeasible at halving {halving}; shrinking δ");
            eta *= 0.5;
        }
        Ok(out)
    }

    /// Raises the tightening of every row the exact beamformer violates where
    /// the linear model was optimistic. Returns whether anything changed.
    fn recalibrate(&self, data: &HoloQcqpData, rows: &[GuardedRow], pert: &[f64], b: &CMat, curvature: &mut [f64]) -> bool {
        let norm2: f64 = pert.iter().map(|x| x * x).sum();
        if !(norm2 > 0.0) {
            return false;
        }
        let mut changed = false;
        for (i, row) in rows.iter().enumerate() {
            let model = data.row_form(row).eval(pert);
            let exact = self.exact.row(row, b, self.ctx.links);
            let (violated, optimism) = match row.relation {
                Relation::Ge => (exact < row.rhs, model - exact),
                _ => (exact > row.rhs, exact - model),
            };
            if violated && optimism > 0.0 {
                let mu = 2.0 * optimism / norm2;
                if mu > curvature[i] {
                    curvature[i] = mu;
                    changed = true;
                }
            }
        }
        changed
    }
}

/// Holographic stage: outer updates of the auxiliaries, inner linearized
/// pattern steps with exact audits and monotone acceptance.
pub fn holographic_bf_loop(state: &BeamformingState, ctx: &HoloContext, opts: &HoloOptions) -> Result<HoloOutcome> {
    ctx.cfg.check_pattern(&state.pattern)?;
    let v = state.precoder();
    let stage = Stage {
        ctx,
        opts,
        state,
        exact: ExactQuantities::new(&v, ctx.scenario),
        v,
    };
    let l_count = ctx.scenario.users.len();
    let rho_at = |b: &CMat| -> Result<Vec<Complex64>> {
        (0..l_count)
            .map(|l| rho_from_response(&feed_response(b, &ctx.links.users[l]), &stage.v, l, ctx.scenario.noise_var))
            .collect()
    };
    let b = holographic_beamformer(&state.pattern, ctx.cfg, ctx.coupling, ctx.reference)?;
    let mut rho = rho_at(&b)?;
    let mut cur = point(ctx, state.pattern.clone(), &stage.v, state, &rho)?;
    let mut trace = Vec::new();
    let mut solves = 0;
    let mut curvature = Vec::new();
    let mut outer_value = min_sinr(&cur.eval);
    for outer in 0..opts.outer_max.max(1) {
        if outer > 0 {
            rho = rho_at(&cur.b)?;
            cur.slack = worst_surrogate(ctx, &cur.b, &stage.v, &rho);
        }
        for inner in 0..opts.inner_max.max(1) {
            let step = stage
                .step(&cur, &rho, &mut curvature)
                .map_err(|e| e.context(format!("holographic outer {outer}, inner {inner}")))?;
            solves += step.solves;
            let accepted = step.accepted.is_some();
            let improvement = match step.accepted {
                Some(p) => {
                    let gain = (p.slack - cur.slack) / cur.slack.abs().max(1e-300);
                    cur = p;
                    gain
                }
                None => 0.0,
            };
            trace.push(HoloTraceEntry {
                outer,
                inner,
                delta: step.delta,
                slack: cur.slack,
                min_sinr: min_sinr(&cur.eval),
                max_violation: cur.eval.max_violation(),
                eigen_ratio: step.eigen_ratio,
                accepted,
            });
            if improvement < opts.tol {
                break;
            }
        }
        let value = min_sinr(&cur.eval);
        let gain = (value - outer_value) / outer_value.abs().max(1e-300);
        outer_value = value;
        if gain < opts.tol {
            break;
        }
    }
    Ok(HoloOutcome {
        pattern: cur.pattern,
        beamformer: cur.b,
        evaluation: cur.eval,
        trace,
        sdp_solves: solves,
    })
}

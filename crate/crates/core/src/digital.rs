//! Digital beamforming for a fixed holographic pattern: fractional
//! programming on the SINRs, a lifted semidefinite relaxation of the
//! resulting QCQP, and closed-form rank-one recovery.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ConstraintFamily, Error, InfeasibilityReport, Result};
use crate::linalg::{hermitian_eigen, outer, psd_factor, trace_product, CMat, CVec, ONE};
#[allow(unused_imports)]
use crate::math::Float;
use crate::scenario::{feed_response, BeamformingState, Links, Scenario};
use crate::sdp::{
    self, BlockKind, Coefficient, LinearForm, Relation, ScalarKind, SdpProblem, SdpSolution, SdpStatus, Sense, SolverOptions,
};

/// Interference-plus-noise seen by user `l` under precoder `v`, given its
/// feed-domain response `a = B^H h*`.
fn interference(a: &CVec, v: &CMat, l: usize, noise_var: f64) -> f64 {
    (0..v.ncols())
        .filter(|&c| c != l)
        .map(|c| v.column(c).dotc(a).norm_sqr())
        .sum::<f64>()
        + noise_var
}

/// `ρ = v_l^H a / (interference + σ²)`, maximizer of the quadratic-transform surrogate.
pub fn rho_from_response(a: &CVec, v: &CMat, l: usize, noise_var: f64) -> Result<Complex64> {
    let denom = interference(a, v, l, noise_var);
    if !(denom > 0.0) {
        return Err(Error::Numeric(format!("surrogate denominator {denom} is not positive")));
    }
    Ok(v.column(l).dotc(a) / denom)
}

/// Optimal auxiliary variable of user `l` for the state's precoder.
pub fn optimal_rho(h: &CVec, b: &CMat, state: &BeamformingState, l: usize, noise_var: f64) -> Result<Complex64> {
    rho_from_response(&feed_response(b, h), &state.precoder(), l, noise_var)
}

/// `2 Re(ρ* v_l^H a) - |ρ|² (interference + σ²)`; equals the SINR at the optimal `ρ`.
pub fn surrogate(a: &CVec, v: &CMat, l: usize, rho: Complex64, noise_var: f64) -> f64 {
    2.0 * (rho.conj() * v.column(l).dotc(a)).re - rho.norm_sqr() * interference(a, v, l, noise_var)
}

/// Auxiliary variables of the fractional-programming step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpAuxiliaries {
    pub rho: Vec<Complex64>,
    pub slack: f64,
}

/// Constant matrices of the lifted digital QCQP.
///
/// A lifted user variable is `Q̃_l = [v_l; 1][v_l; 1]^H`; the full covariance
/// is `Q = S + Σ_l E Q̃_l E^T` with the sensing part `S ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalQcqpData {
    pub num_feeds: usize,
    /// `B^H h_l*` per user.
    pub user_response: Vec<CVec>,
    /// `A_l = (B^H h_l*)(B^H h_l*)^H`
    pub user_forms: Vec<CMat>,
    /// `A(θ_d, φ_d)` per sensing direction.
    pub sensing_forms: Vec<CMat>,
    /// `A(θ_w, φ_w)` per clutterer.
    pub clutter_forms: Vec<CMat>,
    /// `Ã_l = E^T A_l E`, (T+1)×(T+1).
    pub lifted_user_forms: Vec<CMat>,
    /// `C̃_l = [[|ρ|² A_l, ρ* a_l], [ρ a_l^H, 0]]`
    pub surrogate_forms: Vec<CMat>,
    /// `[I_T, 0]`, T×(T+1).
    pub selector: CMat,
    /// Corner selector, (T+1)×(T+1).
    pub corner: CMat,
    pub rho: Vec<Complex64>,
}

impl DigitalQcqpData {
    /// `E^T M E`
    pub fn lift(&self, m: &CMat) -> CMat {
        self.selector.transpose() * m * &self.selector
    }

    /// `Q = S + Σ E Q̃_l E^T`
    pub fn covariance(&self, s: &CMat, lifted: &[CMat]) -> CMat {
        let mut q = s.clone();
        for ql in lifted {
            q += &self.selector * ql * self.selector.transpose();
        }
        q
    }

    /// `Tr(Q̃_l C̃_l) - |ρ_l|² Tr(Q A_l) - |ρ_l|² σ²`
    pub fn slack_value(&self, l: usize, q: &CMat, lifted_l: &CMat, noise_var: f64) -> f64 {
        let r2 = self.rho[l].norm_sqr();
        trace_product(lifted_l, &self.surrogate_forms[l]) - r2 * trace_product(q, &self.user_forms[l]) - r2 * noise_var
    }
}

pub fn build_digital_qcqp(scenario: &Scenario, links: &Links, b: &CMat, rho: &[Complex64]) -> Result<DigitalQcqpData> {
    let t = b.ncols();
    if links.users.len() != scenario.users.len() || rho.len() != scenario.users.len() {
        return Err(Error::Dimension(format!(
            "{} users, {} channels, {} auxiliaries",
            scenario.users.len(),
            links.users.len(),
            rho.len()
        )));
    }
    if let Some(h) = links
        .users
        .iter()
        .chain(&links.sensing)
        .chain(&links.clutter)
        .find(|h| h.len() != b.nrows())
    {
        return Err(Error::Dimension(format!(
            "link of length {} for a {}-element surface",
            h.len(),
            b.nrows()
        )));
    }
    let form = |w: &CVec| outer(&feed_response(b, w));
    let user_response: Vec<CVec> = links.users.iter().map(|h| feed_response(b, h)).collect();
    let user_forms: Vec<CMat> = user_response.iter().map(outer).collect();
    let mut selector = CMat::zeros(t, t + 1);
    for i in 0..t {
        selector[(i, i)] = ONE;
    }
    let mut corner = CMat::zeros(t + 1, t + 1);
    corner[(t, t)] = ONE;
    let lift = |m: &CMat| selector.transpose() * m * &selector;
    let lifted_user_forms: Vec<CMat> = user_forms.iter().map(lift).collect();
    let surrogate_forms = user_response
        .iter()
        .zip(rho)
        .map(|(a, &r)| {
            let mut c = lift(&outer(a)) * Complex64::new(r.norm_sqr(), 0.0);
            for i in 0..t {
                c[(i, t)] = r.conj() * a[i];
                c[(t, i)] = r * a[i].conj();
            }
            c
        })
        .collect();
    Ok(DigitalQcqpData {
        num_feeds: t,
        user_response,
        user_forms,
        sensing_forms: links.sensing.iter().map(form).collect(),
        clutter_forms: links.clutter.iter().map(form).collect(),
        lifted_user_forms,
        surrogate_forms,
        selector,
        corner,
        rho: rho.to_vec(),
    })
}

/// Solver-side layout of the relaxed problem.
struct DigitalLayout {
    sensing_block: usize,
    user_blocks: Vec<usize>,
    slack: usize,
    /// `slack = slack_scale × slack variable`
    slack_scale: f64,
    power: f64,
}

/// Variables are scaled so that `S = P S'` and `Q̃_l = D Q̃'_l D` with
/// `D = diag(√P 1_T, 1)`; every block entry is then of order one.
fn digital_problem(data: &DigitalQcqpData, scenario: &Scenario, include: &dyn Fn(ConstraintFamily) -> bool) -> (SdpProblem, DigitalLayout) {
    let t = data.num_feeds;
    let l_count = data.user_forms.len();
    let pm = scenario.p_max;
    let noise = scenario.noise_var;
    let th = &scenario.thresholds;
    let mut p = SdpProblem::new(Sense::Maximize);
    let sensing_block = p.add_block(BlockKind::Hermitian, t);
    let user_blocks: Vec<usize> = (0..l_count).map(|_| p.add_block(BlockKind::Hermitian, t + 1)).collect();
    let slack = p.add_scalar(ScalarKind::Free);
    let slack_scale = data
        .user_response
        .iter()
        .map(|a| pm * a.norm_squared() / noise)
        .fold(f64::INFINITY, f64::min)
        .max(1e-12);
    let mut dscale = CMat::identity(t + 1, t + 1);
    for i in 0..t {
        dscale[(i, i)] = Complex64::new(pm.sqrt(), 0.0);
    }
    let scaled = |m: &CMat| &dscale * m * &dscale;
    // Tr(Q M) as a form over the scaled blocks.
    let q_form = |m: &CMat, weight: f64| -> LinearForm {
        let mut f = LinearForm::new().block(sensing_block, Coefficient::Complex(m * Complex64::new(pm * weight, 0.0)));
        let lifted = data.lift(m) * Complex64::new(pm * weight, 0.0);
        for &ub in &user_blocks {
            f = f.block(ub, Coefficient::Complex(lifted.clone()));
        }
        f
    };
    let add = |a: LinearForm, b: LinearForm| -> LinearForm {
        let mut out = a;
        out.blocks.extend(b.blocks);
        out.scalars.extend(b.scalars);
        out
    };

    p.objective = LinearForm::new().scalar(slack, slack_scale);
    for l in 0..l_count {
        let r2 = data.rho[l].norm_sqr();
        let form = add(
            LinearForm::new().block(user_blocks[l], Coefficient::Complex(scaled(&data.surrogate_forms[l]))),
            q_form(&data.user_forms[l], -r2),
        )
        .scalar(slack, -slack_scale);
        p.constrain_unguarded(form, Relation::Ge, r2 * noise, format!("surrogate[{l}]"));
    }
    if include(ConstraintFamily::ClutterLeakage) {
        for (w, a) in data.clutter_forms.iter().enumerate() {
            p.constrain(q_form(a, 1.0), Relation::Le, th.g_th_w[w], format!("clutter[{w}]"));
        }
    }
    if include(ConstraintFamily::SensingBalance) {
        let a1 = &data.sensing_forms[0];
        for d in 1..data.sensing_forms.len() {
            let ad = &data.sensing_forms[d];
            let lo = add(q_form(ad, 1.0), q_form(a1, -th.gamma_l_d[d - 1]));
            let hi = add(q_form(ad, 1.0), q_form(a1, -th.gamma_u_d[d - 1]));
            p.constrain(lo, Relation::Ge, 0.0, format!("balance_lo[{d}]"));
            p.constrain(hi, Relation::Le, 0.0, format!("balance_hi[{d}]"));
        }
    }
    if include(ConstraintFamily::SensingGain) {
        for (d, a) in data.sensing_forms.iter().enumerate() {
            if th.g_th_d[d] > 0.0 {
                p.constrain(q_form(a, 1.0), Relation::Ge, th.g_th_d[d], format!("gain[{d}]"));
            }
        }
    }
    if include(ConstraintFamily::UserRate) {
        for l in 0..l_count {
            let r = th.r_th_l[l];
            if r <= 0.0 {
                continue;
            }
            let growth = 2f64.powf(r);
            let factor = growth / (growth - 1.0);
            let lifted = data.lifted_user_forms[l].clone();
            let form = add(
                LinearForm::new().block(user_blocks[l], Coefficient::Complex(scaled(&lifted) * Complex64::new(factor, 0.0))),
                q_form(&data.user_forms[l], -1.0),
            );
            p.constrain(form, Relation::Ge, noise, format!("rate[{l}]"));
        }
    }
    if include(ConstraintFamily::TransmitPower) {
        let eye = CMat::identity(t, t);
        p.constrain(q_form(&eye, 1.0), Relation::Le, pm, "power");
    }
    for (l, &ub) in user_blocks.iter().enumerate() {
        p.constrain(
            LinearForm::new().block(ub, Coefficient::Complex(data.corner.clone())),
            Relation::Eq,
            1.0,
            format!("corner[{l}]"),
        );
    }
    (
        p,
        DigitalLayout {
            sensing_block,
            user_blocks,
            slack,
            slack_scale,
            power: pm,
        },
    )
}

/// Relaxed solution of the lifted problem, in unscaled units.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedDigital {
    pub q: CMat,
    pub sensing: CMat,
    pub lifted: Vec<CMat>,
    pub slack: f64,
    pub primal_residual: f64,
    pub iterations: usize,
}

fn unscale(sol: &SdpSolution, layout: &DigitalLayout, t: usize) -> (CMat, Vec<CMat>, f64) {
    let pm = layout.power;
    let sensing = &sol.blocks[layout.sensing_block] * Complex64::new(pm, 0.0);
    let mut dscale = CMat::identity(t + 1, t + 1);
    for i in 0..t {
        dscale[(i, i)] = Complex64::new(pm.sqrt(), 0.0);
    }
    let lifted = layout.user_blocks.iter().map(|&b| &dscale * &sol.blocks[b] * &dscale).collect();
    (sensing, lifted, sol.scalars[layout.slack] * layout.slack_scale)
}

/// Solves the relaxed lifted problem with the rank constraints dropped.
pub fn solve_digital_sdr(data: &DigitalQcqpData, scenario: &Scenario, opts: &SolverOptions) -> Result<RelaxedDigital> {
    let (problem, layout) = digital_problem(data, scenario, &|_| true);
    let sol = sdp::solve(&problem, opts)?;
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible => return Err(Error::Infeasible(diagnose(data, scenario, opts))),
        SdpStatus::Unbounded => return Err(Error::Unbounded("digital relaxation".into())),
        SdpStatus::MaxIter => {
            if sol.primal_residual > opts.margin.max(opts.tol) {
                return Err(Error::Solver(format!(
                    "digital relaxation stopped after {} iterations (residual {:.2e}, gap {:.2e})",
                    sol.iterations, sol.primal_residual, sol.gap
                )));
            }
            log::warn!("digital relaxation hit the iteration cap with gap {:.2e}", sol.gap);
        }
    }
    let (sensing, lifted, slack) = unscale(&sol, &layout, data.num_feeds);
    let q = data.covariance(&sensing, &lifted);
    Ok(RelaxedDigital {
        q,
        sensing,
        lifted,
        slack,
        primal_residual: sol.primal_residual,
        iterations: sol.iterations,
    })
}

/// Names the constraint families behind an infeasible digital problem.
pub fn diagnose(data: &DigitalQcqpData, scenario: &Scenario, opts: &SolverOptions) -> InfeasibilityReport {
    let th = &scenario.thresholds;
    let pm = scenario.p_max;
    let mut families = Vec::new();
    let mut notes = Vec::new();
    for (d, a) in data.sensing_forms.iter().enumerate() {
        let best = pm * hermitian_eigen(a).0[0];
        if th.g_th_d[d] > best {
            notes.push(format!(
                "sensing gain {d} needs {:.3e} but at most {best:.3e} is reachable",
                th.g_th_d[d]
            ));
            if !families.contains(&ConstraintFamily::SensingGain) {
                families.push(ConstraintFamily::SensingGain);
            }
        }
    }
    for (l, a) in data.user_response.iter().enumerate() {
        let best = pm * a.norm_squared() / scenario.noise_var;
        let need = 2f64.powf(th.r_th_l[l]) - 1.0;
        if need > best {
            notes.push(format!("user {l} needs SINR {need:.3e} but at most {best:.3e} is reachable"));
            if !families.contains(&ConstraintFamily::UserRate) {
                families.push(ConstraintFamily::UserRate);
            }
        }
    }
    if families.is_empty() {
        let present = [
            ConstraintFamily::ClutterLeakage,
            ConstraintFamily::SensingBalance,
            ConstraintFamily::SensingGain,
            ConstraintFamily::UserRate,
            ConstraintFamily::TransmitPower,
        ];
        for fam in present {
            let (problem, _) = digital_problem(data, scenario, &|f| f != fam);
            if let Ok(sol) = sdp::solve(&problem, opts) {
                if sol.status == SdpStatus::Optimal {
                    families.push(fam);
                }
            }
        }
        if families.is_empty() {
            notes.push("no single family restores feasibility".into());
            families.extend(present);
        } else {
            notes.push("dropping any listed family restores feasibility".into());
        }
    }
    InfeasibilityReport {
        families,
        detail: notes.join("; "),
    }
}

/// Rank-one lifted variables recovered from a relaxed solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredDigital {
    pub q: CMat,
    pub lifted: Vec<CMat>,
    pub beams: Vec<CVec>,
    pub slack: f64,
    /// Slack of the relaxed solution, for comparison.
    pub relaxed_slack: f64,
}

/// Closed-form rank-one recovery.
///
/// With `X_l` the top-left block of the relaxed `Q̃_l` and `a_l = B^H h_l*`,
/// the user beam is `v_l = X_l a_l / √(a_l^H X_l a_l)`, rotated so that
/// `ρ_l* v_l^H a_l ≥ 0`. Then `v_l v_l^H ⪯ X_l`, `|a_l^H v_l|² = a_l^H X_l a_l`
/// and the covariance `Q` is kept, so every constraint stays satisfied and
/// the slack does not decrease.
pub fn recover_rank_one(relaxed: &RelaxedDigital, data: &DigitalQcqpData, noise_var: f64) -> Result<RecoveredDigital> {
    let t = data.num_feeds;
    let mut lifted = Vec::with_capacity(relaxed.lifted.len());
    let mut beams = Vec::with_capacity(relaxed.lifted.len());
    for (l, ql) in relaxed.lifted.iter().enumerate() {
        let top = hermitian_eigen(ql).0[0];
        if !(top > 0.0) {
            return Err(Error::Numeric(format!("relaxed user block {l} has no positive eigenvalue")));
        }
        let x = ql.view((0, 0), (t, t)).into_owned();
        let a = &data.user_response[l];
        let xa = &x * a;
        let energy = a.dotc(&xa).re;
        let v = if energy > 0.0 {
            let phase = Complex64::from_polar(1.0, -data.rho[l].arg());
            xa * (phase / energy.sqrt())
        } else {
            CVec::zeros(t)
        };
        let mut w = CVec::from_element(t + 1, ONE);
        w.rows_mut(0, t).copy_from(&v);
        lifted.push(outer(&w));
        beams.push(v);
    }
    let slack = (0..lifted.len())
        .map(|l| data.slack_value(l, &relaxed.q, &lifted[l], noise_var))
        .fold(f64::INFINITY, f64::min);
    Ok(RecoveredDigital {
        q: relaxed.q.clone(),
        lifted,
        beams,
        slack,
        relaxed_slack: relaxed.slack,
    })
}

/// Splits `Q` into user beams and at most `max_sensing` sensing columns.
///
/// The sensing part is an eigen-factorization of `Q - Σ v_l v_l^H`; when its
/// rank exceeds `max_sensing` the dominant directions are kept and rescaled
/// to preserve the trace.
pub fn extract_beamformers(q: &CMat, beams: &[CVec], max_sensing: usize) -> Result<(CMat, CMat)> {
    let t = q.nrows();
    let mut v_c = CMat::zeros(t, beams.len());
    let mut residual = q.clone();
    for (l, v) in beams.iter().enumerate() {
        v_c.set_column(l, v);
        residual -= outer(v);
    }
    let (vals, _) = hermitian_eigen(&residual);
    let scale = q.norm().max(f64::MIN_POSITIVE);
    if !vals.is_empty() && vals[vals.len() - 1] < -1e-8 * scale {
        return Err(Error::Numeric(format!(
            "sensing covariance has eigenvalue {:.3e} (scale {scale:.3e})",
            vals[vals.len() - 1]
        )));
    }
    let floor = 1e-9 * scale;
    let mut v_s = CMat::zeros(t, max_sensing);
    let factor = psd_factor(&residual, max_sensing, floor);
    if factor.ncols() > 0 {
        let kept = factor.norm_squared();
        let total: f64 = vals.iter().filter(|&&x| x > floor).sum();
        let f = if kept > 0.0 {
            factor * Complex64::new((total / kept).sqrt(), 0.0)
        } else {
            factor
        };
        v_s.columns_mut(0, f.ncols()).copy_from(&f);
    }
    Ok((v_c, v_s))
}

/// Equal-power conjugate-matched user beams, no sensing power.
pub fn matched_precoder(scenario: &Scenario, links: &Links, b: &CMat) -> CMat {
    let t = b.ncols();
    let l = scenario.users.len();
    let k = scenario.num_waveforms;
    let per_user = scenario.p_max / l as f64;
    let mut v = CMat::zeros(t, l + k);
    for (i, h) in links.users.iter().enumerate() {
        let a = feed_response(b, h);
        let n = a.norm();
        let col = if n > 0.0 {
            a * Complex64::new(per_user.sqrt() / n, 0.0)
        } else {
            CVec::from_element(t, Complex64::new((per_user / t as f64).sqrt(), 0.0))
        };
        v.set_column(i, &col);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitalOptions {
    pub solver: SolverOptions,
    /// Relative slack improvement below which the loop stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DigitalOptions {
    fn default() -> Self {
        DigitalOptions {
            solver: SolverOptions {
                margin: 1e-6,
                ..SolverOptions::default()
            },
            tol: 1e-4,
            max_iter: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalOutcome {
    pub v_c: CMat,
    pub v_s: CMat,
    pub auxiliaries: FpAuxiliaries,
    /// Worst user SINR after every iteration.
    pub min_sinr_trace: Vec<f64>,
    /// Recovered minus relaxed slack, per iteration.
    pub slack_delta: Vec<f64>,
    pub iterations: usize,
}

fn min_sinr(responses: &[CVec], v: &CMat, noise_var: f64) -> f64 {
    responses
        .iter()
        .enumerate()
        .map(|(l, a)| v.column(l).dotc(a).norm_sqr() / interference(a, v, l, noise_var))
        .fold(f64::INFINITY, f64::min)
}

fn stack(v_c: &CMat, v_s: &CMat) -> CMat {
    let t = v_c.nrows();
    let mut v = CMat::zeros(t, v_c.ncols() + v_s.ncols());
    v.columns_mut(0, v_c.ncols()).copy_from(v_c);
    if v_s.ncols() > 0 {
        v.columns_mut(v_c.ncols(), v_s.ncols()).copy_from(v_s);
    }
    v
}

/// Alternates the optimal auxiliaries with the relaxed solve until the slack
/// stops improving.
pub fn digital_fp_loop(scenario: &Scenario, links: &Links, b: &CMat, start: &CMat, opts: &DigitalOptions) -> Result<DigitalOutcome> {
    let l_count = scenario.users.len();
    let responses: Vec<CVec> = links.users.iter().map(|h| feed_response(b, h)).collect();
    let mut v = start.clone();
    let mut best: Option<(CMat, CMat, FpAuxiliaries)> = None;
    let mut trace = Vec::new();
    let mut deltas = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut iterations = 0;
    for it in 0..opts.max_iter.max(1) {
        iterations = it + 1;
        let rho: Vec<Complex64> = (0..l_count)
            .map(|l| rho_from_response(&responses[l], &v, l, scenario.noise_var))
            .collect::<Result<_>>()?;
        let data = build_digital_qcqp(scenario, links, b, &rho)?;
        let relaxed =
            solve_digital_sdr(&data, scenario, &opts.solver).map_err(|e| e.context(format!("fractional-programming iteration {it}")))?;
        let rec = recover_rank_one(&relaxed, &data, scenario.noise_var)?;
        let (v_c, mut v_s) = extract_beamformers(&rec.q, &rec.beams, scenario.num_waveforms)?;
        let mut v_c = v_c;
        let power = v_c.norm_squared() + v_s.norm_squared();
        if power > scenario.p_max {
            let s = Complex64::new((scenario.p_max / power).sqrt(), 0.0);
            v_c *= s;
            v_s *= s;
        }
        v = stack(&v_c, &v_s);
        let value = min_sinr(&responses, &v, scenario.noise_var);
        trace.push(value);
        deltas.push(rec.slack - rec.relaxed_slack);
        log::debug!(
            "fp iteration {it}: relaxed slack {:.6e}, recovered {:.6e}, worst sinr {value:.6e}",
            rec.relaxed_slack,
            rec.slack
        );
        best = Some((v_c, v_s, FpAuxiliaries { rho, slack: rec.slack }));
        let slack = rec.slack;
        if slack - prev < opts.tol * prev.abs().max(1e-12) {
            break;
        }
        prev = slack;
    }
    let (v_c, v_s, auxiliaries) = best.ok_or_else(|| Error::Solver("no iteration ran".into()))?;
    Ok(DigitalOutcome {
        v_c,
        v_s,
        auxiliaries,
        min_sinr_trace: trace,
        slack_delta: deltas,
        iterations,
    })
}

//! Primal-dual interior-point method (HKM direction, Mehrotra
//! predictor-corrector) for the standard form
//!
//! ```text
//! min <C, X> + c_f·u   s.t.  A(X) + A_f u = b,  X in product of PSD blocks and R^n_+
//! ```
//!
//! Hermitian blocks are embedded as real symmetric blocks of twice the size.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Cholesky;
use num_complex::Complex64;

use super::problem::{BlockKind, Coefficient, Relation, ScalarKind, SdpProblem, SdpSolution, SdpStatus, Sense, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat, RVec};
#[allow(unused_imports)]
use crate::math::Float;

#[derive(Debug, Clone)]
enum Coef {
    Dense(RMat),
    /// Full list of nonzeros (both triangles).
    Sparse(Vec<(usize, usize, f64)>),
}

impl Coef {
    fn dot(&self, x: &RMat) -> f64 {
        match self {
            Coef::Dense(a) => a.dot(x),
            Coef::Sparse(e) => e.iter().map(|&(r, c, v)| v * x[(r, c)]).sum(),
        }
    }

    fn add_to(&self, acc: &mut RMat, s: f64) {
        match self {
            Coef::Dense(a) => *acc += a * s,
            Coef::Sparse(e) => {
                for &(r, c, v) in e {
                    acc[(r, c)] += v * s;
                }
            }
        }
    }

    fn norm_sq(&self) -> f64 {
        match self {
            Coef::Dense(a) => a.norm_squared(),
            Coef::Sparse(e) => e.iter().map(|&(_, _, v)| v * v).sum(),
        }
    }

    fn scale(&mut self, s: f64) {
        match self {
            Coef::Dense(a) => *a *= s,
            Coef::Sparse(e) => e.iter_mut().for_each(|t| t.2 *= s),
        }
    }
}

fn merge_terms(terms: Vec<(usize, Coef)>, dims: &[usize]) -> Vec<(usize, Coef)> {
    let mut out: Vec<(usize, Coef)> = Vec::with_capacity(terms.len());
    for (blk, c) in terms {
        match out.iter_mut().find(|t| t.0 == blk) {
            Some((_, prev)) => {
                let mut acc = RMat::zeros(dims[blk], dims[blk]);
                prev.add_to(&mut acc, 1.0);
                c.add_to(&mut acc, 1.0);
                *prev = Coef::Dense(acc);
            }
            None => out.push((blk, c)),
        }
    }
    out
}

fn merge_scalars(mut v: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    v.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(v.len());
    for (k, x) in v {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += x,
            _ => out.push((k, x)),
        }
    }
    out
}

fn merge_entries(mut e: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    e.sort_by_key(|a| (a.0, a.1));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(e.len());
    for (r, c, v) in e {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|t| t.2 != 0.0);
    out
}

/// Internal real symmetric coefficient for a caller's block coefficient.
fn embed(coef: &Coefficient, kind: BlockKind, n: usize) -> Result<Coef> {
    let check = |r: usize, c: usize| {
        if r >= n || c >= n {
            Err(Error::Dimension(format!("entry ({r}, {c}) outside {n}x{n} block")))
        } else {
            Ok(())
        }
    };
    match (coef, kind) {
        (Coefficient::Entries(list), BlockKind::Symmetric) => {
            let mut e = Vec::with_capacity(2 * list.len());
            for &(r, c, v) in list {
                check(r, c)?;
                e.push((r, c, 0.5 * v.re));
                e.push((c, r, 0.5 * v.re));
            }
            Ok(Coef::Sparse(merge_entries(e)))
        }
        (Coefficient::Entries(list), BlockKind::Hermitian) => {
            // Hermitian part h = (C + C^H)/2, embedded as ½[[Re h, -Im h], [Im h, Re h]].
            let mut e = Vec::with_capacity(8 * list.len());
            for &(r, c, v) in list {
                check(r, c)?;
                for (i, j, z) in [(r, c, v * 0.5), (c, r, v.conj() * 0.5)] {
                    e.push((i, j, 0.5 * z.re));
                    e.push((i + n, j + n, 0.5 * z.re));
                    e.push((i, j + n, -0.5 * z.im));
                    e.push((i + n, j, 0.5 * z.im));
                }
            }
            Ok(Coef::Sparse(merge_entries(e)))
        }
        (Coefficient::Real(m), BlockKind::Symmetric) => {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!(
                    "{}x{} coefficient for {n}x{n} block",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(Coef::Dense((m + m.transpose()) * 0.5))
        }
        (Coefficient::Complex(m), BlockKind::Symmetric) => {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!(
                    "{}x{} coefficient for {n}x{n} block",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let re = m.map(|z| z.re);
            Ok(Coef::Dense((&re + re.transpose()) * 0.5))
        }
        (Coefficient::Real(m), BlockKind::Hermitian) => {
            let c = m.map(|x| Complex64::new(x, 0.0));
            embed(&Coefficient::Complex(c), kind, n)
        }
        (Coefficient::Complex(m), BlockKind::Hermitian) => {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!(
                    "{}x{} coefficient for {n}x{n} block",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
            let mut e = RMat::zeros(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    let z = h[(i, j)];
                    e[(i, j)] = 0.5 * z.re;
                    e[(i + n, j + n)] = 0.5 * z.re;
                    e[(i, j + n)] = -0.5 * z.im;
                    e[(i + n, j)] = 0.5 * z.im;
                }
            }
            Ok(Coef::Dense(e))
        }
    }
}

fn decode(y: &RMat, kind: BlockKind, n: usize) -> CMat {
    match kind {
        BlockKind::Symmetric => y.map(|v| Complex64::new(v, 0.0)),
        BlockKind::Hermitian => CMat::from_fn(n, n, |i, j| {
            Complex64::new(0.5 * (y[(i, j)] + y[(i + n, j + n)]), 0.5 * (y[(i + n, j)] - y[(i, j + n)]))
        }),
    }
}

/// Standard-form data after embedding, slack insertion and scaling.
struct Standard {
    dims: Vec<usize>,
    /// Per block: `(row, coefficient)`.
    block_rows: Vec<Vec<(usize, Coef)>>,
    c: Vec<RMat>,
    a_lp: RMat,
    c_lp: RVec,
    a_free: RMat,
    c_free: RVec,
    b: RVec,
    /// Row scale factors applied (original row = scaled row × factor).
    row_scale: Vec<f64>,
    obj_scale: f64,
    /// Caller scalar index → (is_free, internal index).
    scalar_map: Vec<(bool, usize)>,
    /// Caller constraint → internal row, `None` when dropped as trivially satisfied.
    row_map: Vec<Option<usize>>,
}

fn standardize(p: &SdpProblem, margin: f64) -> Result<core::result::Result<Standard, usize>> {
    let dims: Vec<usize> = p
        .blocks
        .iter()
        .map(|&(k, n)| if k == BlockKind::Hermitian { 2 * n } else { n })
        .collect();
    let mut scalar_map = Vec::with_capacity(p.scalars.len());
    let (mut n_free, mut n_lp) = (0, 0);
    for k in &p.scalars {
        match k {
            ScalarKind::Free => {
                scalar_map.push((true, n_free));
                n_free += 1;
            }
            ScalarKind::NonNegative => {
                scalar_map.push((false, n_lp));
                n_lp += 1;
            }
        }
    }
    let check_form = |form: &super::problem::LinearForm| -> Result<()> {
        for (b, _) in &form.blocks {
            if *b >= p.blocks.len() {
                return Err(Error::Dimension(format!("block {b} does not exist")));
            }
        }
        for (s, _) in &form.scalars {
            if *s >= p.scalars.len() {
                return Err(Error::Dimension(format!("scalar {s} does not exist")));
            }
        }
        Ok(())
    };

    // Rows: embedded coefficients and their norms.
    struct RawRow {
        terms: Vec<(usize, Coef)>,
        lp: Vec<(usize, f64)>,
        free: Vec<(usize, f64)>,
        b: f64,
        relation: Relation,
    }
    let mut raw = Vec::new();
    let mut row_map = Vec::with_capacity(p.constraints.len());
    for (ci, con) in p.constraints.iter().enumerate() {
        check_form(&con.form)?;
        let mut terms = Vec::new();
        for (b, coef) in &con.form.blocks {
            let (kind, n) = p.blocks[*b];
            terms.push((*b, embed(coef, kind, n)?));
        }
        let mut lp = Vec::new();
        let mut free = Vec::new();
        for &(s, v) in &con.form.scalars {
            let (is_free, idx) = scalar_map[s];
            if is_free {
                free.push((idx, v));
            } else {
                lp.push((idx, v));
            }
        }
        // One coefficient per block and scalar, so the norm sees cancellations.
        let mut terms = merge_terms(terms, &dims);
        let mut lp = merge_scalars(lp);
        let mut free = merge_scalars(free);
        let norm = (terms.iter().map(|(_, c)| c.norm_sq()).sum::<f64>()
            + lp.iter().map(|t| t.1 * t.1).sum::<f64>()
            + free.iter().map(|t| t.1 * t.1).sum::<f64>())
        .sqrt();
        if !con.rhs.is_finite() || !norm.is_finite() {
            return Err(Error::Numeric(format!("constraint '{}' has non-finite data", con.label)));
        }
        if norm == 0.0 {
            let ok = match con.relation {
                Relation::Le => 0.0 <= con.rhs,
                Relation::Ge => 0.0 >= con.rhs,
                Relation::Eq => con.rhs == 0.0,
            };
            if !ok {
                return Ok(Err(ci));
            }
            row_map.push(None);
            continue;
        }
        let s = 1.0 / norm;
        for (_, c) in terms.iter_mut() {
            c.scale(s);
        }
        lp.iter_mut().for_each(|t| t.1 *= s);
        free.iter_mut().for_each(|t| t.1 *= s);
        row_map.push(Some(raw.len()));
        let shift = if con.guarded { margin * (norm + con.rhs.abs()) } else { 0.0 };
        let rhs = match con.relation {
            Relation::Le => con.rhs - shift,
            Relation::Ge => con.rhs + shift,
            Relation::Eq => con.rhs,
        };
        raw.push((
            RawRow {
                terms,
                lp,
                free,
                b: rhs * s,
                relation: con.relation,
            },
            norm,
        ));
    }
    let m = raw.len();
    let n_slack = raw.iter().filter(|(r, _)| r.relation != Relation::Eq).count();
    let total_lp = n_lp + n_slack;
    let mut a_lp = RMat::zeros(m, total_lp);
    let mut a_free = RMat::zeros(m, n_free);
    let mut b = RVec::zeros(m);
    let mut block_rows: Vec<Vec<(usize, Coef)>> = vec![Vec::new(); dims.len()];
    let mut row_scale = Vec::with_capacity(m);
    let mut slack = n_lp;
    for (i, (row, norm)) in raw.into_iter().enumerate() {
        for (blk, c) in row.terms {
            block_rows[blk].push((i, c));
        }
        for (k, v) in row.lp {
            a_lp[(i, k)] += v;
        }
        for (k, v) in row.free {
            a_free[(i, k)] += v;
        }
        match row.relation {
            Relation::Le => {
                a_lp[(i, slack)] = 1.0;
                slack += 1;
            }
            Relation::Ge => {
                a_lp[(i, slack)] = -1.0;
                slack += 1;
            }
            Relation::Eq => {}
        }
        b[i] = row.b;
        row_scale.push(norm);
    }
    check_form(&p.objective)?;
    let sign = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut c: Vec<RMat> = dims.iter().map(|&n| RMat::zeros(n, n)).collect();
    for (blk, coef) in &p.objective.blocks {
        let (kind, n) = p.blocks[*blk];
        embed(coef, kind, n)?.add_to(&mut c[*blk], sign);
    }
    let mut c_lp = RVec::zeros(total_lp);
    let mut c_free = RVec::zeros(n_free);
    for &(s, v) in &p.objective.scalars {
        let (is_free, idx) = scalar_map[s];
        if is_free {
            c_free[idx] += sign * v;
        } else {
            c_lp[idx] += sign * v;
        }
    }
    let cn = (c.iter().map(|m| m.norm_squared()).sum::<f64>() + c_lp.norm_squared() + c_free.norm_squared()).sqrt();
    let obj_scale = if cn > 0.0 { cn } else { 1.0 };
    for m in c.iter_mut() {
        *m /= obj_scale;
    }
    c_lp /= obj_scale;
    c_free /= obj_scale;

    Ok(Ok(Standard {
        dims,
        block_rows,
        c,
        a_lp,
        c_lp,
        a_free,
        c_free,
        b,
        row_scale,
        obj_scale,
        scalar_map,
        row_map,
    }))
}

struct Iterate {
    x: Vec<RMat>,
    z: Vec<RMat>,
    x_lp: RVec,
    z_lp: RVec,
    y: RVec,
    u: RVec,
}

struct Direction {
    x: Vec<RMat>,
    z: Vec<RMat>,
    x_lp: RVec,
    z_lp: RVec,
    y: RVec,
    u: RVec,
}

impl Standard {
    fn m(&self) -> usize {
        self.b.len()
    }
    /// `A(X)` over blocks and the LP part (free part excluded).
    fn apply(&self, x: &[RMat], x_lp: &RVec) -> RVec {
        let mut out = &self.a_lp * x_lp;
        for (blk, rows) in self.block_rows.iter().enumerate() {
            for (i, c) in rows {
                out[*i] += c.dot(&x[blk]);
            }
        }
        out
    }

    /// `A*(y)` per block and for the LP part.
    fn adjoint(&self, y: &RVec) -> (Vec<RMat>, RVec) {
        let mut blocks: Vec<RMat> = self.dims.iter().map(|&n| RMat::zeros(n, n)).collect();
        for (blk, rows) in self.block_rows.iter().enumerate() {
            for (i, c) in rows {
                if y[*i] != 0.0 {
                    c.add_to(&mut blocks[blk], y[*i]);
                }
            }
        }
        (blocks, self.a_lp.transpose() * y)
    }

    fn schur(&self, x: &[RMat], zinv: &[RMat], lp_ratio: &RVec) -> RMat {
        let mut mat = &self.a_lp * RMat::from_diagonal(lp_ratio) * self.a_lp.transpose();
        for (blk, rows) in self.block_rows.iter().enumerate() {
            let (xb, zb) = (&x[blk], &zinv[blk]);
            let n = self.dims[blk];
            let dense_limit = n;
            let is_dense = |c: &Coef| match c {
                Coef::Dense(_) => true,
                Coef::Sparse(e) => e.len() > dense_limit,
            };
            let mut done = vec![false; rows.len()];
            for (a, (i, ci)) in rows.iter().enumerate() {
                if !is_dense(ci) {
                    continue;
                }
                let mut w = RMat::zeros(n, n);
                let mut xa = RMat::zeros(n, n);
                match ci {
                    Coef::Dense(d) => xa.gemm(1.0, xb, d, 0.0),
                    Coef::Sparse(e) => {
                        for &(r, c, v) in e {
                            for k in 0..n {
                                xa[(k, c)] += xb[(k, r)] * v;
                            }
                        }
                    }
                }
                w.gemm(1.0, &xa, zb, 0.0);
                for (j, cj) in rows.iter() {
                    mat[(*i, *j)] += cj.dot(&w);
                }
                done[a] = true;
            }
            // Sparse rows against sparse rows; pairs with a dense row were
            // filled from the dense side (both orderings).
            for (a, (i, ci)) in rows.iter().enumerate() {
                if done[a] {
                    continue;
                }
                let ei = match ci {
                    Coef::Sparse(e) => e,
                    Coef::Dense(_) => unreachable!(),
                };
                for (bidx, (j, cj)) in rows.iter().enumerate() {
                    if done[bidx] {
                        // symmetric entry already written when the dense row was processed
                        mat[(*i, *j)] = mat[(*j, *i)];
                        continue;
                    }
                    let ej = match cj {
                        Coef::Sparse(e) => e,
                        Coef::Dense(_) => unreachable!(),
                    };
                    let mut acc = 0.0;
                    for &(p, q, v) in ei {
                        for &(r, s, w) in ej {
                            acc += v * w * xb[(r, p)] * zb[(q, s)];
                        }
                    }
                    mat[(*i, *j)] += acc;
                }
            }
        }
        mat
    }
}

fn chol(m: &RMat) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(m.clone())
}

fn sym(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

/// Largest step keeping `x + α dx` positive definite (infinite if unbounded).
fn max_step_psd(l: &RMat, dx: &RMat) -> f64 {
    let n = l.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    let Some(a) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(s) = l.solve_lower_triangular(&a.transpose()) else {
        return 0.0;
    };
    let lam = sym(&s).symmetric_eigenvalues().min();
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn max_step_lp(x: &RVec, dx: &RVec) -> f64 {
    let mut a = f64::INFINITY;
    for k in 0..x.len() {
        if dx[k] < 0.0 {
            a = a.min(-x[k] / dx[k]);
        }
    }
    a
}

/// Cholesky with growing diagonal regularization.
fn robust_chol(m: &RMat) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = chol(m) {
        return Ok(c);
    }
    let scale = m.diagonal().iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
    let mut reg = 1e-14 * scale;
    for _ in 0..12 {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += reg;
        }
        if let Some(c) = chol(&r) {
            return Ok(c);
        }
        reg *= 100.0;
    }
    Err(Error::Solver("Schur complement is not positive definite".into()))
}

pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let std = match standardize(problem, opts.margin)? {
        Ok(s) => s,
        Err(row) => {
            log::debug!("constraint '{}' is constant and violated", problem.constraints[row].label);
            return Ok(infeasible_solution(problem));
        }
    };
    let m = std.m();
    let nb = std.dims.len();
    let n_lp = std.c_lp.len();
    let n_free = std.c_free.len();
    let nu = (std.dims.iter().sum::<usize>() + n_lp).max(1) as f64;

    // Initial point.
    let b_norm = std.b.norm();
    let mut it = Iterate {
        x: Vec::with_capacity(nb),
        z: Vec::with_capacity(nb),
        x_lp: RVec::zeros(n_lp),
        z_lp: RVec::zeros(n_lp),
        y: RVec::zeros(m),
        u: RVec::zeros(n_free),
    };
    for (blk, &n) in std.dims.iter().enumerate() {
        let nf = n as f64;
        let mut xi: f64 = 10f64.max(nf.sqrt());
        let mut eta: f64 = 10f64.max(nf.sqrt()).max(std.c[blk].norm());
        for (i, c) in &std.block_rows[blk] {
            let an = c.norm_sq().sqrt();
            xi = xi.max(nf * (1.0 + std.b[*i].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        it.x.push(RMat::identity(n, n) * xi);
        it.z.push(RMat::identity(n, n) * eta);
    }
    if n_lp > 0 {
        let xi = 10f64.max(1.0 + b_norm);
        let eta = 10f64.max(1.0 + std.c_lp.amax());
        it.x_lp.fill(xi);
        it.z_lp.fill(eta);
    }

    let c_norm = (std.c.iter().map(|c| c.norm_squared()).sum::<f64>() + std.c_lp.norm_squared() + std.c_free.norm_squared()).sqrt();
    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut last_step = 1.0f64;
    let mut stall = 0;
    let mut relp;
    let mut reld = f64::INFINITY;
    let mut relgap = f64::INFINITY;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        // Residuals.
        let ax = std.apply(&it.x, &it.x_lp) + &std.a_free * &it.u;
        let rp = &std.b - &ax;
        let (aty, aty_lp) = std.adjoint(&it.y);
        let rd: Vec<RMat> = (0..nb).map(|b| &std.c[b] - &aty[b] - &it.z[b]).collect();
        let rd_lp = &std.c_lp - &aty_lp - &it.z_lp;
        let rf = &std.c_free - std.a_free.transpose() * &it.y;

        let pobj = (0..nb).map(|b| std.c[b].dot(&it.x[b])).sum::<f64>() + std.c_lp.dot(&it.x_lp) + std.c_free.dot(&it.u);
        let dobj = std.b.dot(&it.y);
        let xz = (0..nb).map(|b| it.x[b].dot(&it.z[b])).sum::<f64>() + it.x_lp.dot(&it.z_lp);
        let mu = xz / nu;

        relp = (0..m).map(|i| rp[i].abs() / (1.0 + std.b[i].abs())).fold(0.0, f64::max);
        let rd_norm = (rd.iter().map(|r| r.norm_squared()).sum::<f64>() + rd_lp.norm_squared() + rf.norm_squared()).sqrt();
        reld = rd_norm / (1.0 + c_norm);
        relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        log::trace!("ipm {iter}: pobj {pobj:.9e} dobj {dobj:.9e} relp {relp:.2e} reld {reld:.2e} gap {relgap:.2e} mu {mu:.2e}");

        if relp <= opts.tol && reld <= opts.tol && relgap <= opts.tol {
            status = SdpStatus::Optimal;
            break;
        }
        // Farkas-type certificates from diverging iterates.
        if dobj > 0.0 {
            let ay_z = ((0..nb).map(|b| (&std.c[b] - &rd[b]).norm_squared()).sum::<f64>()
                + (&std.c_lp - &rd_lp).norm_squared()
                + (&std.c_free - &rf).norm_squared())
            .sqrt();
            if ay_z / dobj < 1e-8 && dobj > 1e6 {
                status = SdpStatus::Infeasible;
                break;
            }
        }
        if pobj < 0.0 && ax.norm() / (-pobj) < 1e-8 && -pobj > 1e6 {
            status = SdpStatus::Unbounded;
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        if stall >= 6 {
            break;
        }

        // Factorizations.
        let mut lx = Vec::with_capacity(nb);
        let mut lz = Vec::with_capacity(nb);
        let mut zinv = Vec::with_capacity(nb);
        for b in 0..nb {
            let (Some(cx), Some(cz)) = (chol(&sym(&it.x[b])), chol(&sym(&it.z[b]))) else {
                // Rounding pushed an iterate onto the cone boundary; keep the
                // current point and let the residual checks judge it.
                log::debug!("iterate lost definiteness at iteration {iter}");
                break;
            };
            lx.push(cx.l());
            lz.push(cz.l());
            zinv.push(sym(&cz.inverse()));
        }
        if lx.len() < nb {
            break;
        }
        let lp_ratio = it.x_lp.component_div(&it.z_lp);
        let schur = std.schur(&it.x, &zinv, &lp_ratio);
        let mchol = robust_chol(&sym(&schur))?;
        // Free variables: eliminate through the Schur complement of M.
        let minv_af = if n_free > 0 { mchol.solve(&std.a_free) } else { RMat::zeros(m, 0) };
        let kchol = if n_free > 0 {
            Some(robust_chol(&sym(&(std.a_free.transpose() * &minv_af)))?)
        } else {
            None
        };

        // A(X Rd Z^{-1}), shared by both solves.
        let xrz: Vec<RMat> = (0..nb).map(|b| &it.x[b] * &rd[b] * &zinv[b]).collect();
        let xrz_lp = it.x_lp.component_mul(&rd_lp).component_div(&it.z_lp);
        let base = &rp + std.apply(&xrz, &xrz_lp);

        let direction = |g: &[RMat], g_lp: &RVec| -> Direction {
            let h = &base - std.apply(g, g_lp);
            let mut rhs = h.clone();
            let du = if let Some(kc) = &kchol {
                let minv_h = mchol.solve(&h);
                let du = kc.solve(&(std.a_free.transpose() * minv_h - &rf));
                rhs -= &std.a_free * &du;
                du
            } else {
                RVec::zeros(0)
            };
            let dy = mchol.solve(&rhs);
            let (atdy, atdy_lp) = std.adjoint(&dy);
            let dz: Vec<RMat> = (0..nb).map(|b| &rd[b] - &atdy[b]).collect();
            let dz_lp = &rd_lp - atdy_lp;
            let dx: Vec<RMat> = (0..nb).map(|b| &g[b] - sym(&(&it.x[b] * &dz[b] * &zinv[b]))).collect();
            let dx_lp = g_lp - it.x_lp.component_mul(&dz_lp).component_div(&it.z_lp);
            Direction {
                x: dx,
                z: dz,
                x_lp: dx_lp,
                z_lp: dz_lp,
                y: dy,
                u: du,
            }
        };
        let steps = |d: &Direction| -> (f64, f64) {
            let mut ap = max_step_lp(&it.x_lp, &d.x_lp);
            let mut ad = max_step_lp(&it.z_lp, &d.z_lp);
            for b in 0..nb {
                ap = ap.min(max_step_psd(&lx[b], &d.x[b]));
                ad = ad.min(max_step_psd(&lz[b], &d.z[b]));
            }
            (ap, ad)
        };

        // Predictor.
        let g_pred: Vec<RMat> = it.x.iter().map(|x| -x).collect();
        let g_pred_lp = -&it.x_lp;
        let pred = direction(&g_pred, &g_pred_lp);
        let (ap, ad) = steps(&pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let xz_aff = (0..nb)
            .map(|b| (&it.x[b] + &pred.x[b] * ap).dot(&(&it.z[b] + &pred.z[b] * ad)))
            .sum::<f64>()
            + (&it.x_lp + &pred.x_lp * ap).dot(&(&it.z_lp + &pred.z_lp * ad));
        let ratio = (xz_aff / xz).clamp(0.0, 1.0);
        let sigma = ratio.powi(3);

        // Corrector.
        let g_corr: Vec<RMat> = (0..nb)
            .map(|b| &zinv[b] * (sigma * mu) - &it.x[b] - sym(&(&pred.x[b] * &pred.z[b] * &zinv[b])))
            .collect();
        let g_corr_lp = RVec::from_fn(n_lp, |k, _| (sigma * mu - pred.x_lp[k] * pred.z_lp[k]) / it.z_lp[k] - it.x_lp[k]);
        let corr = direction(&g_corr, &g_corr_lp);
        let (ap_max, ad_max) = steps(&corr);
        let gamma = 0.9 + 0.09 * last_step;
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);
        last_step = ap.min(ad);
        if last_step < 1e-8 {
            stall += 1;
        } else {
            stall = 0;
        }

        for b in 0..nb {
            it.x[b] = sym(&(&it.x[b] + &corr.x[b] * ap));
            it.z[b] = sym(&(&it.z[b] + &corr.z[b] * ad));
        }
        it.x_lp += &corr.x_lp * ap;
        it.z_lp += &corr.z_lp * ad;
        it.u += &corr.u * ap;
        it.y += &corr.y * ad;
    }

    Ok(finish(problem, &std, &it, status, iterations, reld, relgap))
}

fn infeasible_solution(problem: &SdpProblem) -> SdpSolution {
    SdpSolution {
        status: SdpStatus::Infeasible,
        blocks: problem.blocks.iter().map(|&(_, n)| CMat::zeros(n, n)).collect(),
        scalars: vec![0.0; problem.scalars.len()],
        objective: f64::NAN,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        gap: f64::INFINITY,
        duals: vec![0.0; problem.constraints.len()],
        dual_bound: None,
        iterations: 0,
    }
}

fn finish(problem: &SdpProblem, std: &Standard, it: &Iterate, status: SdpStatus, iterations: usize, reld: f64, relgap: f64) -> SdpSolution {
    let blocks: Vec<CMat> = problem
        .blocks
        .iter()
        .enumerate()
        .map(|(b, &(kind, n))| decode(&it.x[b], kind, n))
        .collect();
    let scalars: Vec<f64> = std
        .scalar_map
        .iter()
        .map(|&(is_free, k)| if is_free { it.u[k] } else { it.x_lp[k] })
        .collect();
    let objective = problem.objective.eval(&blocks, &scalars);

    // Row-relative violations at the returned point.
    let mut primal_residual = 0.0f64;
    for (ci, con) in problem.constraints.iter().enumerate() {
        let v = con.form.eval(&blocks, &scalars);
        let viol = match con.relation {
            Relation::Le => (v - con.rhs).max(0.0),
            Relation::Ge => (con.rhs - v).max(0.0),
            Relation::Eq => (v - con.rhs).abs(),
        };
        let scale = match std.row_map[ci] {
            Some(r) => std.row_scale[r] + con.rhs.abs(),
            None => 1.0 + con.rhs.abs(),
        };
        primal_residual = primal_residual.max(viol / scale);
    }

    let sign = if problem.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let duals: Vec<f64> = std
        .row_map
        .iter()
        .map(|r| match r {
            Some(i) => sign * it.y[*i] * std.obj_scale / std.row_scale[*i],
            None => 0.0,
        })
        .collect();

    SdpSolution {
        status,
        blocks,
        scalars,
        objective,
        primal_residual,
        dual_residual: reld,
        gap: relgap,
        duals,
        dual_bound: dual_bound(std, &it.y).map(|v| sign * v * std.obj_scale),
        iterations,
    }
}

/// `b^T y` for a multiplier made exactly dual feasible, if possible.
fn dual_bound(std: &Standard, y: &RVec) -> Option<f64> {
    let mut y = y.clone();
    let n_free = std.c_free.len();
    if n_free > 0 {
        let rf = &std.c_free - std.a_free.transpose() * &y;
        let gram = std.a_free.transpose() * &std.a_free;
        let corr = gram.cholesky()?.solve(&rf);
        y += &std.a_free * corr;
        let rf2 = &std.c_free - std.a_free.transpose() * &y;
        if rf2.amax() > 1e-12 * (1.0 + std.c_free.amax()) {
            return None;
        }
    }
    let (aty, aty_lp) = std.adjoint(&y);
    for (b, c) in std.c.iter().enumerate() {
        let z = sym(&(c - &aty[b]));
        if z.nrows() > 0 && z.symmetric_eigenvalues().min() < 0.0 {
            return None;
        }
    }
    if (&std.c_lp - aty_lp).iter().any(|&v| v < 0.0) {
        return None;
    }
    Some(std.b.dot(&y))
}

//! Dense complex/real helpers on top of nalgebra.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const J: Complex64 = Complex64::new(0.0, 1.0);

/// Conditions beyond this are logged when a system is solved.
pub const CONDITION_WARN: f64 = 1e8;

#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::new(phase.cos(), phase.sin())
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn symmetric_part(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted in
/// descending order with eigenvectors as matching columns.
pub fn hermitian_eigen(m: &CMat) -> (RVec, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (RVec::zeros(0), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Real symmetric counterpart of [`hermitian_eigen`].
pub fn symmetric_eigen(m: &RMat) -> (RVec, RMat) {
    let n = m.nrows();
    if n == 0 {
        return (RVec::zeros(0), RMat::zeros(0, 0));
    }
    let eig = symmetric_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = RMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    hermitian_part(m).symmetric_eigenvalues().min()
}

pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Ratio of largest to smallest singular value; infinite for singular input.
pub fn condition_number(m: &CMat) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let (hi, lo) = (sv.max(), sv.min());
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Solves `a x = b` by LU and checks the relative residual.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "solve: {}x{} system with {}x{} right-hand side",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let lu = a.clone().lu();
    let x = match lu.solve(b) {
        Some(x) => x,
        None => {
            return Err(Error::Singular {
                condition: condition_number(a),
            })
        }
    };
    let scale = a.norm() * x.norm() + b.norm();
    let residual = (a * &x - b).norm();
    if !residual.is_finite() || residual > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Singular {
            condition: condition_number(a),
        });
    }
    let u = lu.u();
    let (mut dmax, mut dmin) = (0.0f64, f64::INFINITY);
    for i in 0..u.nrows() {
        let d = u[(i, i)].norm();
        dmax = dmax.max(d);
        dmin = dmin.min(d);
    }
    // The pivot spread is a cheap lower bound on the condition number.
    if dmax > CONDITION_WARN * dmin {
        log::warn!("ill-conditioned solve, condition estimate {:.3e}", condition_number(a));
    }
    Ok(x)
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &CMat::identity(a.nrows(), a.nrows()))
}

/// `Re(g^H q g)`.
pub fn quad_form(q: &CMat, g: &CVec) -> f64 {
    g.dotc(&(q * g)).re
}

/// `Re Tr(a b)`.
pub fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

pub fn real_trace_product(a: &RMat, b: &RMat) -> f64 {
    a.component_mul(&b.transpose()).sum()
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Factor of a Hermitian PSD matrix keeping the `max_cols` largest
/// eigen-directions with eigenvalue above `floor`.
pub fn psd_factor(m: &CMat, max_cols: usize, floor: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > floor).take(max_cols).collect();
    let mut f = CMat::zeros(m.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = Complex64::new(vals[i].sqrt(), 0.0);
        f.set_column(c, &(vecs.column(i) * s));
    }
    f
}

/// Serde adapter storing a complex matrix as rows of `[re, im]` pairs.
pub mod serde_rows {
    use alloc::vec::Vec;

    use num_complex::Complex64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::CMat;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Complex64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows: Vec<Vec<Complex64>> = Vec::deserialize(d)?;
        to_matrix(rows).map_err(D::Error::custom)
    }

    pub fn to_matrix(rows: Vec<Vec<Complex64>>) -> Result<CMat, &'static str> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows");
        }
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        Ok(CMat::from_row_slice(nrows, ncols, &flat))
    }
}

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::config::{distance, HolographicPattern, RhsConfig};
use super::coupling::CouplingModel;
use crate::error::{Error, Result};
use crate::linalg::{solve, spectral_norm, CMat, CVec};
#[allow(unused_imports)]
use crate::math::Float;

/// Feed-generated wave at every element, one column per feed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceWave(pub CMat);

impl ReferenceWave {
    pub fn matrix(&self) -> &CMat {
        &self.0
    }
}

/// Phase-only propagation from every feed to every element:
/// entry `(n, t) = exp(-j k_s ‖r_t - r_n‖)`.
pub fn build_reference_wave(cfg: &RhsConfig) -> Result<ReferenceWave> {
    let n = cfg.num_elements();
    let t = cfg.num_feeds();
    let mut f = CMat::zeros(n, t);
    for (i, e) in cfg.element_positions.iter().enumerate() {
        for (k, p) in cfg.feed_positions.iter().enumerate() {
            let r = distance(e, p);
            if r <= 0.0 {
                return Err(Error::Config(format!("feed {k} coincides with element {i}")));
            }
            f[(i, k)] = Complex64::from_polar(1.0, -cfg.guided_wavenumber * r);
        }
    }
    Ok(ReferenceWave(f))
}

fn check_dims(pattern: &HolographicPattern, cfg: &RhsConfig, coupling: &CouplingModel, reference: Option<&ReferenceWave>) -> Result<()> {
    let n = cfg.num_elements();
    if pattern.len() != n || coupling.num_elements() != n {
        return Err(Error::Dimension(format!(
            "pattern {} / coupling {} / surface {n} element counts differ",
            pattern.len(),
            coupling.num_elements()
        )));
    }
    if let Some(r) = reference {
        if r.0.nrows() != n {
            return Err(Error::Dimension(format!(
                "reference wave has {} rows for {n} elements",
                r.0.nrows()
            )));
        }
    }
    Ok(())
}

/// `e^{jτ} Θ` as a dense diagonal.
pub fn polarizability(pattern: &HolographicPattern, cfg: &RhsConfig) -> CMat {
    let e = cfg.phase_factor();
    CMat::from_diagonal(&CVec::from_iterator(pattern.len(), pattern.0.iter().map(|&t| e * t)))
}

/// `(e^{jτ} Θ)^{-1} - G`
pub fn system_matrix(pattern: &HolographicPattern, cfg: &RhsConfig, coupling: &CouplingModel) -> Result<CMat> {
    check_dims(pattern, cfg, coupling, None)?;
    let e = cfg.phase_factor();
    let mut m = -coupling.matrix.clone();
    for (i, &t) in pattern.0.iter().enumerate() {
        if !(t > 0.0) {
            return Err(Error::Config(format!("pattern entry {i} = {t} is not positive")));
        }
        m[(i, i)] += Complex64::new(1.0 / t, 0.0) / e;
    }
    Ok(m)
}

/// `B = k ((e^{jτ} Θ)^{-1} - G)^{-1} F_ref`, computed by a linear solve.
pub fn holographic_beamformer(
    pattern: &HolographicPattern,
    cfg: &RhsConfig,
    coupling: &CouplingModel,
    reference: &ReferenceWave,
) -> Result<CMat> {
    check_dims(pattern, cfg, coupling, Some(reference))?;
    let a = system_matrix(pattern, cfg, coupling)?;
    Ok(solve(&a, &reference.0)? * cfg.k_const)
}

/// `B = diag(amplitudes) F_ref`: the surface without coupling.
pub fn ideal_beamformer(amplitudes: &[f64], reference: &ReferenceWave) -> Result<CMat> {
    let f = &reference.0;
    if amplitudes.len() != f.nrows() {
        return Err(Error::Dimension(format!(
            "{} amplitudes for {} elements",
            amplitudes.len(),
            f.nrows()
        )));
    }
    if let Some(i) = amplitudes.iter().position(|&a| !(a >= 0.0)) {
        return Err(Error::Config(format!("amplitude {i} is negative")));
    }
    let mut b = f.clone();
    for (i, &a) in amplitudes.iter().enumerate() {
        b.row_mut(i).scale_mut(a);
    }
    Ok(b)
}

/// `‖e^{jτ} Θ G‖₂`: contraction factor of the coupling series.
pub fn coupling_strength(pattern: &HolographicPattern, cfg: &RhsConfig, coupling: &CouplingModel) -> f64 {
    spectral_norm(&(polarizability(pattern, cfg) * &coupling.matrix))
}

fn convergent_strength(pattern: &HolographicPattern, cfg: &RhsConfig, coupling: &CouplingModel) -> Result<f64> {
    let q = coupling_strength(pattern, cfg, coupling);
    if !(q < 1.0) {
        return Err(Error::Divergent { norm: q });
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeumannTerms {
    /// `x_1 .. x_m`
    pub terms: Vec<CVec>,
    pub sum: CVec,
    /// `‖e^{jτ} Θ G‖₂`
    pub contraction: f64,
}

impl NeumannTerms {
    /// Bound on `‖B u - sum‖`: `q^m / (1 - q) ‖x_1‖`.
    pub fn tail_bound(&self) -> f64 {
        let m = self.terms.len() as i32;
        let x1 = self.terms.first().map(|x| x.norm()).unwrap_or(0.0);
        self.contraction.powi(m) / (1.0 - self.contraction) * x1
    }
}

/// First `m` terms of the coupling series for the transmitted signal:
/// `x_1 = k e^{jτ} Θ F_ref u`, `x_{i+1} = e^{jτ} Θ G x_i`.
pub fn neumann_decomposition(
    pattern: &HolographicPattern,
    cfg: &RhsConfig,
    coupling: &CouplingModel,
    reference: &ReferenceWave,
    u: &CVec,
    m: usize,
) -> Result<NeumannTerms> {
    check_dims(pattern, cfg, coupling, Some(reference))?;
    if u.len() != reference.0.ncols() {
        return Err(Error::Dimension(format!(
            "input has {} entries for {} feeds",
            u.len(),
            reference.0.ncols()
        )));
    }
    let q = convergent_strength(pattern, cfg, coupling)?;
    let p = polarizability(pattern, cfg);
    let step = &p * &coupling.matrix;
    let mut terms = Vec::with_capacity(m);
    let mut sum = CVec::zeros(pattern.len());
    if m > 0 {
        let mut x = &p * (&reference.0 * u) * cfg.k_const;
        for i in 0..m {
            if i > 0 {
                x = &step * &x;
            }
            sum += &x;
            terms.push(x.clone());
        }
    }
    Ok(NeumannTerms {
        terms,
        sum,
        contraction: q,
    })
}

/// `Σ_{i=0}^{m} (G e^{jτ} Θ)^i F_ref`.
///
/// `k e^{jτ} Θ` times this matrix times `u` equals the `(m + 1)`-term sum of
/// [`neumann_decomposition`].
pub fn equivalent_reference_wave(
    pattern: &HolographicPattern,
    cfg: &RhsConfig,
    coupling: &CouplingModel,
    reference: &ReferenceWave,
    m: usize,
) -> Result<CMat> {
    check_dims(pattern, cfg, coupling, Some(reference))?;
    convergent_strength(pattern, cfg, coupling)?;
    let step = &coupling.matrix * polarizability(pattern, cfg);
    let mut term = reference.0.clone();
    let mut acc = term.clone();
    for _ in 0..m {
        term = &step * &term;
        acc += &term;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::math::{PI, TAU};
    use crate::rhs::config::GridSpec;
    use crate::rhs::coupling::CouplingSource;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two_element(g: f64) -> (RhsConfig, CouplingModel, ReferenceWave) {
        let mut cfg = GridSpec::new(1, 2, 1).build().unwrap();
        cfg.polarizability_phase = 0.0;
        cfg.theta_max = 3.0;
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c(g);
        m[(1, 0)] = c(g);
        let coupling = CouplingModel {
            matrix: m,
            source: CouplingSource::Zero,
        };
        let f = ReferenceWave(CMat::from_element(2, 1, ONE));
        (cfg, coupling, f)
    }

    #[test]
    fn reference_wave_full_period() {
        let mut cfg = GridSpec::new(1, 1, 1).build().unwrap();
        cfg.guided_wavenumber = TAU / cfg.wavelength;
        cfg.feed_positions[0] = [0.0, cfg.wavelength, 0.0];
        let f = build_reference_wave(&cfg).unwrap();
        assert!((f.0[(0, 0)] - ONE).norm() < 1e-12);
    }

    #[test]
    fn reference_wave_half_period() {
        let mut cfg = GridSpec::new(1, 1, 1).build().unwrap();
        let lambda = cfg.wavelength;
        cfg.feed_positions[0] = [0.0, 0.0, lambda / (2.0 * 3f64.sqrt())];
        let f = build_reference_wave(&cfg).unwrap();
        assert!((f.0[(0, 0)] + ONE).norm() < 1e-12);
    }

    #[test]
    fn reference_wave_matches_scalar_loop() {
        let cfg = GridSpec::new(2, 2, 2).build().unwrap();
        let f = build_reference_wave(&cfg).unwrap();
        let ks = 3f64.sqrt() * 2.0 * PI / cfg.wavelength;
        for n in 0..4 {
            for t in 0..2 {
                let e = cfg.element_positions[n];
                let p = cfg.feed_positions[t];
                let r = ((e[0] - p[0]).powi(2) + (e[1] - p[1]).powi(2) + (e[2] - p[2]).powi(2)).sqrt();
                let want = Complex64::new(0.0, -ks * r).exp();
                assert!((f.0[(n, t)] - want).norm() < 1e-12);
                assert!((f.0[(n, t)].norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reference_wave_rejects_coincident_feed() {
        let mut cfg = GridSpec::new(1, 1, 1).build().unwrap();
        cfg.feed_positions[0] = cfg.element_positions[0];
        assert!(matches!(build_reference_wave(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn two_by_two_closed_form() {
        let (cfg, coupling, f) = two_element(0.1);
        let pattern = HolographicPattern(alloc::vec![1.0, 1.0]);
        let b = holographic_beamformer(&pattern, &cfg, &coupling, &f).unwrap();
        assert!((b[(0, 0)] - c(10.0 / 9.0)).norm() < 1e-14);
        assert!((b[(1, 0)] - c(10.0 / 9.0)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_scaling_without_coupling() {
        let (cfg, _, f) = two_element(0.0);
        let pattern = HolographicPattern(alloc::vec![2.0, 3.0]);
        let b = holographic_beamformer(&pattern, &cfg, &CouplingModel::zero(2), &f).unwrap();
        assert!((b[(0, 0)] - c(2.0)).norm() < 1e-14);
        assert!((b[(1, 0)] - c(3.0)).norm() < 1e-14);
    }

    #[test]
    fn ideal_cases() {
        let cfg = GridSpec::new(2, 2, 2).build().unwrap();
        let f = build_reference_wave(&cfg).unwrap();
        assert_eq!(ideal_beamformer(&[1.0; 4], &f).unwrap(), f.0);
        assert_eq!(ideal_beamformer(&[0.0; 4], &f).unwrap(), CMat::zeros(4, 2));
        let amps = [0.3, 0.5, 0.7, 0.9];
        let mut cfg0 = cfg.clone();
        cfg0.polarizability_phase = 0.0;
        let b = holographic_beamformer(&HolographicPattern(amps.to_vec()), &cfg0, &CouplingModel::zero(4), &f).unwrap();
        assert!((b - ideal_beamformer(&amps, &f).unwrap()).norm() < 1e-12);
        assert!(ideal_beamformer(&[1.0; 3], &f).is_err());
    }

    #[test]
    fn neumann_two_by_two_terms() {
        let (cfg, coupling, f) = two_element(0.1);
        let pattern = HolographicPattern(alloc::vec![1.0, 1.0]);
        let u = CVec::from_element(1, ONE);
        let terms = neumann_decomposition(&pattern, &cfg, &coupling, &f, &u, 3).unwrap();
        for (i, want) in [1.0, 0.1, 0.01].iter().enumerate() {
            assert!((terms.terms[i][0] - c(*want)).norm() < 1e-15);
            assert!((terms.terms[i][1] - c(*want)).norm() < 1e-15);
        }
        assert!((terms.sum[0] - c(1.11)).norm() < 1e-14);
    }

    #[test]
    fn neumann_rejects_divergent() {
        let (cfg, coupling, f) = two_element(1.5);
        let pattern = HolographicPattern(alloc::vec![1.0, 1.0]);
        let u = CVec::from_element(1, ONE);
        assert!(matches!(
            neumann_decomposition(&pattern, &cfg, &coupling, &f, &u, 3),
            Err(Error::Divergent { .. })
        ));
    }

    #[test]
    fn equivalent_wave_cases() {
        let (cfg, coupling, f) = two_element(0.1);
        let pattern = HolographicPattern(alloc::vec![1.0, 1.0]);
        let e0 = equivalent_reference_wave(&pattern, &cfg, &CouplingModel::zero(2), &f, 5).unwrap();
        assert_eq!(e0, f.0);
        let e1 = equivalent_reference_wave(&pattern, &cfg, &coupling, &f, 1).unwrap();
        let direct = &f.0 + &coupling.matrix * polarizability(&pattern, &cfg) * &f.0;
        assert!((e1 - direct).norm() < 1e-15);
        let e_inf = equivalent_reference_wave(&pattern, &cfg, &coupling, &f, 200).unwrap();
        assert!((e_inf[(0, 0)] - c(10.0 / 9.0)).norm() < 1e-14);
    }
}

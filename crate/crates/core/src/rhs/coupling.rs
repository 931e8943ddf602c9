use alloc::format;
use alloc::string::String;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{distance, RhsConfig};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, CMat, ZERO};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::{PI, TAU};

/// Parameters of the synthetic coupling kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCoupling {
    /// Weight of the guided (surface-wave) term relative to the radiated one.
    pub guided_weight: f64,
    /// Target spectral norm of `e^{jτ} θ_max G`.
    pub rho_cap: f64,
}

impl Default for SyntheticCoupling {
    fn default() -> Self {
        SyntheticCoupling {
            guided_weight: 0.1,
            rho_cap: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CouplingSource {
    Synthetic(SyntheticCoupling),
    File { path: String },
    Zero,
}

/// Coupling matrix between surface elements plus where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingModel {
    pub matrix: CMat,
    pub source: CouplingSource,
}

/// Kernel value for a pair at distance `r` (in wavelengths).
///
/// `guided_index` is the ratio of guided to free-space wavenumber.
pub fn synthetic_kernel(r: f64, guided_index: f64, guided_weight: f64) -> Complex64 {
    let beta = TAU;
    let phase = Complex64::from_polar(1.0, -beta * r);
    let radiated = phase * Complex64::new(beta * beta - 1.0 / (r * r), beta / r) / (4.0 * PI * r);
    let guided = Complex64::from_polar(guided_weight / r.sqrt(), -guided_index * beta * r);
    radiated + guided
}

impl CouplingModel {
    pub fn zero(n: usize) -> Self {
        CouplingModel {
            matrix: CMat::zeros(n, n),
            source: CouplingSource::Zero,
        }
    }

    pub fn num_elements(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == ZERO)
    }

    /// Synthetic kernel on every element pair, rescaled so that
    /// `‖e^{jτ} θ_max G‖₂ = rho_cap`.
    pub fn synthetic(cfg: &RhsConfig, params: &SyntheticCoupling) -> Result<Self> {
        if !(params.rho_cap > 0.0) || params.rho_cap >= 1.0 {
            return Err(Error::Config(format!("rho_cap must lie in (0, 1), got {}", params.rho_cap)));
        }
        if !(params.guided_weight >= 0.0) {
            return Err(Error::Config("guided_weight must be non-negative".into()));
        }
        let n = cfg.num_elements();
        let lambda = cfg.wavelength;
        let index = cfg.guided_wavenumber / cfg.free_wavenumber();
        let mut g = CMat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let r = distance(&cfg.element_positions[i], &cfg.element_positions[j]) / lambda;
                if r <= 0.0 {
                    return Err(Error::Config(format!("elements {i} and {j} coincide")));
                }
                let v = synthetic_kernel(r, index, params.guided_weight);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let strength = cfg.theta_max * spectral_norm(&g);
        if strength > 0.0 {
            g *= Complex64::new(params.rho_cap / strength, 0.0);
        }
        Ok(CouplingModel {
            matrix: g,
            source: CouplingSource::Synthetic(params.clone()),
        })
    }

    /// Wraps an externally supplied matrix. The diagonal must be zero; if the
    /// matrix is stronger than `rho_cap` it is scaled down to it.
    pub fn from_matrix(cfg: &RhsConfig, matrix: CMat, source: CouplingSource, rho_cap: f64) -> Result<Self> {
        let n = cfg.num_elements();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Format(format!(
                "coupling matrix is {}x{}, surface has {n} elements",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !(rho_cap > 0.0) || rho_cap >= 1.0 {
            return Err(Error::Config(format!("rho_cap must lie in (0, 1), got {rho_cap}")));
        }
        for i in 0..n {
            if matrix[(i, i)] != ZERO {
                return Err(Error::Format(format!("coupling diagonal entry {i} is nonzero")));
            }
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("coupling matrix has non-finite entries".into()));
        }
        let mut matrix = matrix;
        let strength = cfg.theta_max * spectral_norm(&matrix);
        if strength > rho_cap {
            log::warn!("coupling strength {strength:.4} exceeds cap {rho_cap}; rescaling");
            matrix *= Complex64::new(rho_cap / strength, 0.0);
        }
        Ok(CouplingModel { matrix, source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhs::config::GridSpec;

    #[test]
    fn zero_model() {
        let g = CouplingModel::zero(4);
        assert!(g.is_zero());
    }

    #[test]
    fn synthetic_is_symmetric_with_zero_diagonal_and_capped() {
        let cfg = GridSpec::new(3, 3, 2).build().unwrap();
        let g = CouplingModel::synthetic(&cfg, &SyntheticCoupling::default()).unwrap();
        for i in 0..9 {
            assert_eq!(g.matrix[(i, i)], ZERO);
            for j in 0..9 {
                assert_eq!(g.matrix[(i, j)], g.matrix[(j, i)]);
            }
        }
        let q = cfg.theta_max * spectral_norm(&g.matrix);
        assert!((q - 0.5).abs() < 1e-12);
    }

    #[test]
    fn line_array_matches_per_pair_kernel() {
        let mut spec = GridSpec::new(1, 4, 1);
        spec.spacing = 0.3;
        let cfg = spec.build().unwrap();
        let params = SyntheticCoupling {
            guided_weight: 0.2,
            rho_cap: 0.4,
        };
        let g = CouplingModel::synthetic(&cfg, &params).unwrap();
        // independent evaluation of the kernel, distances in wavelengths
        let beta = 2.0 * core::f64::consts::PI;
        let ks = 3f64.sqrt() * beta;
        let mut raw = CMat::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let r = 0.3 * (i as f64 - j as f64).abs();
                let e = Complex64::new(0.0, -beta * r).exp();
                let free = e * (Complex64::new(beta * beta, 0.0) + Complex64::new(0.0, beta / r) - Complex64::new(1.0 / (r * r), 0.0))
                    / Complex64::new(4.0 * core::f64::consts::PI * r, 0.0);
                let guided = Complex64::new(0.0, -ks * r).exp() * 0.2 / r.sqrt();
                raw[(i, j)] = free + guided;
            }
        }
        let scale = 0.4 / (cfg.theta_max * spectral_norm(&raw));
        let expected = raw * Complex64::new(scale, 0.0);
        assert!((expected - &g.matrix).norm() < 1e-12 * g.matrix.norm());
    }

    #[test]
    fn magnitude_falls_off_with_distance() {
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let r = 0.23 * i as f64 * 0.05 + 0.2;
            let v = synthetic_kernel(r, 3f64.sqrt(), 0.1).norm();
            assert!(v <= prev, "kernel magnitude rose at r = {r}");
            prev = v;
        }
    }

    #[test]
    fn file_matrix_validation() {
        let cfg = GridSpec::new(1, 2, 1).build().unwrap();
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = Complex64::new(3.0, 0.0);
        m[(1, 0)] = Complex64::new(3.0, 0.0);
        let g = CouplingModel::from_matrix(&cfg, m.clone(), CouplingSource::Zero, 0.5).unwrap();
        assert!((cfg.theta_max * spectral_norm(&g.matrix) - 0.5).abs() < 1e-12);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(CouplingModel::from_matrix(&cfg, m, CouplingSource::Zero, 0.5).is_err());
        let wrong = CMat::zeros(3, 3);
        assert!(matches!(
            CouplingModel::from_matrix(&cfg, wrong, CouplingSource::Zero, 0.5),
            Err(Error::Format(_))
        ));
    }
}

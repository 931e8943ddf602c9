use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{outer, serde_rows, CMat};
use crate::math::rad;
#[allow(unused_imports)]
use crate::math::Float;
use crate::rhs::HolographicPattern;

/// Far-field direction. `theta_deg` is measured from the surface normal
/// (the x-axis), `phi_deg` is the azimuth within the yoz plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl Direction {
    pub const fn new(theta_deg: f64, phi_deg: f64) -> Self {
        Direction { theta_deg, phi_deg }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (t, p) = (rad(self.theta_deg), rad(self.phi_deg));
        [t.cos(), t.sin() * p.cos(), t.sin() * p.sin()]
    }

    /// Great-circle separation in degrees.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
        dot.acos() * 180.0 / core::f64::consts::PI
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=90.0).contains(&self.theta_deg) && (0.0..360.0).contains(&self.phi_deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub direction: Direction,
    pub range_m: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum beampattern gain per sensing direction.
    pub g_th_d: Vec<f64>,
    /// Maximum beampattern gain per clutterer.
    pub g_th_w: Vec<f64>,
    /// Minimum rate per user, bps/Hz.
    pub r_th_l: Vec<f64>,
    /// Lower gain ratio bound for sensing directions 2..D relative to direction 1.
    pub gamma_l_d: Vec<f64>,
    /// Upper gain ratio bound for sensing directions 2..D relative to direction 1.
    pub gamma_u_d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub users: Vec<User>,
    pub sensing_dirs: Vec<Direction>,
    #[serde(default)]
    pub clutterers: Vec<Direction>,
    pub thresholds: Thresholds,
    /// Watts.
    pub p_max: f64,
    /// Watts.
    pub noise_var: f64,
    pub num_waveforms: usize,
}

impl Scenario {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (l, d, w) = (self.users.len(), self.sensing_dirs.len(), self.clutterers.len());
        if l == 0 || d == 0 {
            return Err(Error::Config("scenario needs at least one user and one sensing direction".into()));
        }
        let th = &self.thresholds;
        let check_len = |name: &str, got: usize, want: usize| {
            if got != want {
                Err(Error::Config(format!("{name} has {got} entries, expected {want}")))
            } else {
                Ok(())
            }
        };
        check_len("g_th_d", th.g_th_d.len(), d)?;
        check_len("g_th_w", th.g_th_w.len(), w)?;
        check_len("r_th_l", th.r_th_l.len(), l)?;
        check_len("gamma_l_d", th.gamma_l_d.len(), d - 1)?;
        check_len("gamma_u_d", th.gamma_u_d.len(), d - 1)?;
        let all = th.g_th_d.iter().chain(&th.g_th_w).chain(&th.r_th_l);
        if all.into_iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Config("thresholds must be finite and non-negative".into()));
        }
        for (lo, hi) in th.gamma_l_d.iter().zip(&th.gamma_u_d) {
            if !(*lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::Config(format!("gain ratio bounds need 0 < {lo} <= {hi}")));
            }
        }
        if !(self.p_max > 0.0) || !(self.noise_var > 0.0) {
            return Err(Error::Config("p_max and noise_var must be positive".into()));
        }
        let dirs = self
            .users
            .iter()
            .map(|u| u.direction)
            .chain(self.sensing_dirs.iter().copied())
            .chain(self.clutterers.iter().copied());
        for dir in dirs {
            if !dir.is_valid() {
                return Err(Error::Config(format!(
                    "direction ({}, {}) outside theta in [0, 90], phi in [0, 360)",
                    dir.theta_deg, dir.phi_deg
                )));
            }
        }
        if let Some(u) = self.users.iter().find(|u| !(u.range_m > 0.0)) {
            return Err(Error::Config(format!("user range {} must be positive", u.range_m)));
        }
        Ok(())
    }
}

/// Digital beamformers and the holographic pattern they were designed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamformingState {
    /// One column per user.
    #[serde(with = "serde_rows")]
    pub v_c: CMat,
    /// One column per dedicated sensing waveform.
    #[serde(with = "serde_rows")]
    pub v_s: CMat,
    pub pattern: HolographicPattern,
}

impl BeamformingState {
    pub fn num_feeds(&self) -> usize {
        self.v_c.nrows()
    }

    /// Full digital precoder `[V_c, V_s]`.
    pub fn precoder(&self) -> CMat {
        let t = self.v_c.nrows();
        let (l, k) = (self.v_c.ncols(), self.v_s.ncols());
        let mut v = CMat::zeros(t, l + k);
        v.columns_mut(0, l).copy_from(&self.v_c);
        if k > 0 {
            v.columns_mut(l, k).copy_from(&self.v_s);
        }
        v
    }

    /// `Q = V V^H`
    pub fn covariance(&self) -> CMat {
        let v = self.precoder();
        &v * v.adjoint()
    }

    /// `Q_l = v_l v_l^H`
    pub fn user_covariance(&self, l: usize) -> CMat {
        outer(&self.v_c.column(l).into_owned())
    }

    pub fn power(&self) -> f64 {
        self.v_c.norm_squared() + self.v_s.norm_squared()
    }

    pub fn scale_power(&mut self, factor: f64) {
        let s = Complex64::new(factor.sqrt(), 0.0);
        self.v_c *= s;
        self.v_s *= s;
    }
}

/// Beampattern samples on a regular (θ, φ) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeampatternGrid {
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
    /// `power[i][j]` is the gain at `(theta_deg[i], phi_deg[j])`, linear units.
    pub power: Vec<Vec<f64>>,
}

impl BeampatternGrid {
    pub fn iter(&self) -> impl Iterator<Item = (Direction, f64)> + '_ {
        self.theta_deg.iter().enumerate().flat_map(move |(i, &t)| {
            self.phi_deg
                .iter()
                .enumerate()
                .map(move |(j, &p)| (Direction::new(t, p), self.power[i][j]))
        })
    }

    pub fn peak(&self) -> Option<(Direction, f64)> {
        self.iter().fold(None, |best, (d, p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((d, p)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    pub gain: Complex64,
    pub direction: Direction,
}

/// Far-field geometric channel made of discrete paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipathChannel {
    pub paths: Vec<PathComponent>,
}

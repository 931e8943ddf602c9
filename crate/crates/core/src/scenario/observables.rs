use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::types::{BeamformingState, BeampatternGrid, Direction, MultipathChannel, Scenario, User};
use crate::error::{Error, Result};
use crate::linalg::{quad_form, CMat, CVec};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::{linear_to_db, PI, TAU};
use crate::rhs::RhsConfig;

/// `a_n = exp(-j (2π/λ) û(θ, φ) · r_n)`
pub fn steering_vector(dir: &Direction, cfg: &RhsConfig) -> CVec {
    let u = dir.unit_vector();
    let k0 = TAU / cfg.wavelength;
    CVec::from_iterator(
        cfg.num_elements(),
        cfg.element_positions.iter().map(|r| {
            let proj = u[0] * r[0] + u[1] * r[1] + u[2] * r[2];
            Complex64::from_polar(1.0, -k0 * proj)
        }),
    )
}

/// Free-space gain `(λ / (4π r))²`.
pub fn free_space_gain(range_m: f64, wavelength: f64) -> f64 {
    let a = wavelength / (4.0 * PI * range_m);
    a * a
}

/// Line-of-sight channel `√g a(θ, φ)`.
pub fn los_channel(user: &User, cfg: &RhsConfig) -> Result<CVec> {
    if !(user.range_m > 0.0) {
        return Err(Error::Config(format!("user range {} must be positive", user.range_m)));
    }
    let g = free_space_gain(user.range_m, cfg.wavelength);
    Ok(steering_vector(&user.direction, cfg) * Complex64::new(g.sqrt(), 0.0))
}

/// `B^H conj(w)`: feed-domain image of a channel or steering vector `w`,
/// so that `w^T B x = g^H x`.
pub fn feed_response(b: &CMat, w: &CVec) -> CVec {
    b.adjoint() * w.conjugate()
}

/// SINR of user `l` given its feed-domain response `g = B^H h*`.
pub fn sinr_from_response(g: &CVec, v: &CMat, l: usize, noise_var: f64) -> Result<f64> {
    let gains: Vec<f64> = (0..v.ncols()).map(|c| v.column(c).dotc(g).norm_sqr()).collect();
    let signal = gains[l];
    let interference: f64 = gains.iter().enumerate().filter(|&(c, _)| c != l).map(|(_, x)| x).sum();
    let denom = interference + noise_var;
    if !(denom > 0.0) {
        return Err(Error::Numeric(format!("SINR denominator {denom} is not positive")));
    }
    Ok(signal / denom)
}

/// SINR of user `l`: own-stream power over all other streams plus noise.
pub fn user_sinr(h: &CVec, b: &CMat, state: &BeamformingState, l: usize, noise_var: f64) -> Result<f64> {
    if l >= state.v_c.ncols() {
        return Err(Error::Dimension(format!("user {l} out of {} columns", state.v_c.ncols())));
    }
    if b.nrows() != h.len() || b.ncols() != state.num_feeds() {
        return Err(Error::Dimension(format!(
            "beamformer {}x{} against channel {} and {} feeds",
            b.nrows(),
            b.ncols(),
            h.len(),
            state.num_feeds()
        )));
    }
    let g = feed_response(b, h);
    sinr_from_response(&g, &state.precoder(), l, noise_var)
}

pub fn user_rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// `a^T B Q B^H a*`
pub fn beampattern(b: &CMat, q: &CMat, dir: &Direction, cfg: &RhsConfig) -> f64 {
    let a = steering_vector(dir, cfg);
    quad_form(q, &feed_response(b, &a)).max(0.0)
}

/// Beampattern over θ ∈ [0°, 90°], φ ∈ [0°, 360°) at `resolution_deg`.
pub fn beampattern_grid(b: &CMat, q: &CMat, cfg: &RhsConfig, resolution_deg: f64) -> Result<BeampatternGrid> {
    if !(resolution_deg > 0.0) || resolution_deg > 90.0 {
        return Err(Error::Config(format!("grid resolution {resolution_deg} must lie in (0, 90]")));
    }
    let nt = (90.0 / resolution_deg + 1e-9).floor() as usize + 1;
    let np = (360.0 / resolution_deg - 1e-9).ceil() as usize;
    let theta: Vec<f64> = (0..nt).map(|i| i as f64 * resolution_deg).collect();
    let phi: Vec<f64> = (0..np).map(|j| j as f64 * resolution_deg).collect();
    let m = b * q * b.adjoint();
    let power = theta
        .iter()
        .map(|&t| {
            phi.iter()
                .map(|&p| {
                    let a = steering_vector(&Direction::new(t, p), cfg).conjugate();
                    a.dotc(&(&m * &a)).re.max(0.0)
                })
                .collect()
        })
        .collect();
    Ok(BeampatternGrid {
        theta_deg: theta,
        phi_deg: phi,
        power,
    })
}

/// Radiation pattern of feed `t` alone: `a^T b_t b_t^H a*`.
pub fn per_feed_pattern(b: &CMat, t: usize, dir: &Direction, cfg: &RhsConfig) -> f64 {
    let a = steering_vector(dir, cfg);
    b.column(t).dot(&a).norm_sqr()
}

/// `Σ_p α_p B^T a(θ_p, φ_p)`
pub fn equivalent_channel(mp: &MultipathChannel, b: &CMat, cfg: &RhsConfig) -> Result<CVec> {
    if mp.paths.is_empty() {
        return Err(Error::Config("multipath channel has no paths".into()));
    }
    let mut h = CVec::zeros(b.ncols());
    for p in &mp.paths {
        h += b.transpose() * steering_vector(&p.direction, cfg) * p.gain;
    }
    Ok(h)
}

/// Strongest grid sample outside all exclusion disks relative to the
/// strongest inside them, in dB. All-zero sidelobes give `-inf`.
pub fn sidelobe_level(grid: &BeampatternGrid, mainlobe_dirs: &[Direction], exclusion_deg: f64) -> Result<f64> {
    if grid.theta_deg.is_empty() || grid.phi_deg.is_empty() {
        return Err(Error::UndefinedSidelobe("empty grid".into()));
    }
    if mainlobe_dirs.is_empty() {
        return Err(Error::UndefinedSidelobe("no main-lobe directions".into()));
    }
    let mut inside = f64::NEG_INFINITY;
    let mut outside = f64::NEG_INFINITY;
    for (dir, p) in grid.iter() {
        let near = mainlobe_dirs.iter().any(|m| m.angle_to(&dir) <= exclusion_deg);
        if near {
            inside = inside.max(p);
        } else {
            outside = outside.max(p);
        }
    }
    if outside == f64::NEG_INFINITY {
        return Err(Error::UndefinedSidelobe("every grid point lies inside an exclusion disk".into()));
    }
    if !(inside > 0.0) {
        return Err(Error::UndefinedSidelobe("no main-lobe power".into()));
    }
    if outside <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(linear_to_db(outside / inside))
}

/// Channels and steering vectors of a scenario on one surface.
#[derive(Debug, Clone)]
pub struct Links {
    pub users: Vec<CVec>,
    pub sensing: Vec<CVec>,
    pub clutter: Vec<CVec>,
}

impl Links {
    pub fn new(scenario: &Scenario, cfg: &RhsConfig) -> Result<Self> {
        Ok(Links {
            users: scenario.users.iter().map(|u| los_channel(u, cfg)).collect::<Result<_>>()?,
            sensing: scenario.sensing_dirs.iter().map(|d| steering_vector(d, cfg)).collect(),
            clutter: scenario.clutterers.iter().map(|d| steering_vector(d, cfg)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{outer, ONE};
    use crate::rhs::GridSpec;

    fn line_z(spacing_wl: f64) -> RhsConfig {
        let mut spec = GridSpec::new(2, 1, 1);
        spec.spacing = spacing_wl;
        spec.build().unwrap()
    }

    #[test]
    fn boresight_is_all_ones() {
        let cfg = GridSpec::default().build().unwrap();
        let a = steering_vector(&Direction::new(0.0, 123.0), &cfg);
        assert!(a.iter().all(|z| (z - ONE).norm() < 1e-14));
    }

    #[test]
    fn half_wave_endfire_phase() {
        let cfg = line_z(0.5);
        let a = steering_vector(&Direction::new(90.0, 90.0), &cfg);
        let diff = (a[1] / a[0]).arg().abs();
        assert!((diff - PI).abs() < 1e-12);
    }

    #[test]
    fn friis_gain() {
        let cfg = GridSpec::default().build().unwrap();
        let u = User {
            direction: Direction::new(0.0, 0.0),
            range_m: 1.0,
        };
        let h = los_channel(&u, &cfg).unwrap();
        let g = h[0].norm_sqr();
        assert!((g - 6.332573977646111e-7).abs() < 1e-18);
        let far = los_channel(&User { range_m: 2.0, ..u }, &cfg).unwrap();
        assert!((far[0].norm_sqr() * 4.0 - g).abs() < 1e-20);
        assert!(los_channel(&User { range_m: 0.0, ..u }, &cfg).is_err());
    }

    #[test]
    fn scalar_link_sinr() {
        let h = CVec::from_element(1, ONE);
        let b = CMat::from_element(1, 1, ONE);
        let state = BeamformingState {
            v_c: CMat::from_element(1, 1, Complex64::new(2.0f64.sqrt(), 0.0)),
            v_s: CMat::zeros(1, 0),
            pattern: crate::rhs::HolographicPattern(alloc::vec![1.0]),
        };
        let s = user_sinr(&h, &b, &state, 0, 0.5).unwrap();
        assert!((s - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rates() {
        assert_eq!(user_rate(0.0), 0.0);
        assert!((user_rate(1.0) - 1.0).abs() < 1e-15);
        assert!((user_rate(3.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn matched_beam_gain_is_n_squared() {
        let cfg = GridSpec::new(3, 3, 1).build().unwrap();
        let dir = Direction::new(30.0, 45.0);
        let a = steering_vector(&dir, &cfg);
        let b = CMat::from_column_slice(9, 1, a.conjugate().as_slice());
        let q = CMat::from_element(1, 1, ONE);
        assert!((beampattern(&b, &q, &dir, &cfg) - 81.0).abs() < 1e-10);
        assert!((per_feed_pattern(&b, 0, &dir, &cfg) - 81.0).abs() < 1e-10);
    }

    #[test]
    fn single_path_equivalent_channel_magnitude() {
        let cfg = GridSpec::new(2, 3, 2).build().unwrap();
        let b = CMat::from_fn(6, 2, |i, j| Complex64::new(0.1 * i as f64 - 0.2, 0.3 * j as f64 + 0.05 * i as f64));
        let dir = Direction::new(25.0, 200.0);
        let mp = MultipathChannel {
            paths: alloc::vec![super::super::types::PathComponent { gain: ONE, direction: dir }],
        };
        let h = equivalent_channel(&mp, &b, &cfg).unwrap();
        for t in 0..2 {
            let want = per_feed_pattern(&b, t, &dir, &cfg).sqrt();
            assert!((h[t].norm() - want).abs() < 1e-10 * want.max(1.0));
        }
    }

    #[test]
    fn grid_axes_and_homogeneity() {
        let cfg = GridSpec::new(2, 2, 1).build().unwrap();
        let b = CMat::from_element(4, 1, ONE);
        let q = outer(&CVec::from_element(1, ONE));
        let g1 = beampattern_grid(&b, &q, &cfg, 10.0).unwrap();
        assert_eq!(g1.theta_deg.len(), 10);
        assert_eq!(g1.phi_deg.len(), 36);
        let b2 = CMat::from_fn(4, 2, |i, j| Complex64::new(0.3 * i as f64 + 0.1, 0.2 * j as f64 - 0.25 * i as f64));
        let q2 = CMat::from_fn(2, 2, |i, j| {
            Complex64::new(1.0 + (i == j) as u8 as f64, 0.4 * (i as f64 - j as f64))
        });
        let g2 = beampattern_grid(&b2, &q2, &cfg, 15.0).unwrap();
        for (dir, p) in g2.iter() {
            let want = beampattern(&b2, &q2, &dir, &cfg);
            assert!((p - want).abs() <= 1e-12 * want.max(1.0));
        }
        let g3 = beampattern_grid(&b, &(q * Complex64::new(3.0, 0.0)), &cfg, 10.0).unwrap();
        for (r1, r3) in g1.power.iter().zip(&g3.power) {
            for (a, c) in r1.iter().zip(r3) {
                assert!((3.0 * a - c).abs() <= 1e-12 * c.max(1.0));
            }
        }
    }

    fn toy_grid(f: impl Fn(Direction) -> f64) -> BeampatternGrid {
        let theta: Vec<f64> = (0..=18).map(|i| i as f64 * 5.0).collect();
        let phi: Vec<f64> = (0..72).map(|j| j as f64 * 5.0).collect();
        let power = theta
            .iter()
            .map(|&t| phi.iter().map(|&p| f(Direction::new(t, p))).collect())
            .collect();
        BeampatternGrid {
            theta_deg: theta,
            phi_deg: phi,
            power,
        }
    }

    #[test]
    fn sidelobe_ratio_by_hand() {
        let main = Direction::new(30.0, 90.0);
        let side = Direction::new(60.0, 270.0);
        let grid = toy_grid(|d| {
            if d == main {
                100.0
            } else if d == side {
                10.0
            } else {
                1.0
            }
        });
        let sll = sidelobe_level(&grid, &[main], 10.0).unwrap();
        assert!((sll + 10.0).abs() < 1e-12);
    }

    #[test]
    fn sidelobe_sentinel_and_errors() {
        let main = Direction::new(30.0, 90.0);
        let grid = toy_grid(|d| if main.angle_to(&d) <= 10.0 { 5.0 } else { 0.0 });
        assert_eq!(sidelobe_level(&grid, &[main], 10.0).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(sidelobe_level(&grid, &[main], 180.0), Err(Error::UndefinedSidelobe(_))));
    }

    #[test]
    fn two_gaussian_pattern() {
        let a = Direction::new(20.0, 80.0);
        let b = Direction::new(60.0, 250.0);
        let grid = toy_grid(|d| {
            let da = a.angle_to(&d);
            let db = b.angle_to(&d);
            3.0 * (-(da * da) / 50.0).exp() + 0.7 * (-(db * db) / 50.0).exp()
        });
        let sll = sidelobe_level(&grid, &[a], 10.0).unwrap();
        let (mut inside, mut outside) = (0.0f64, 0.0f64);
        for (d, p) in grid.iter() {
            if a.angle_to(&d) <= 10.0 {
                inside = inside.max(p);
            } else {
                outside = outside.max(p);
            }
        }
        assert!((sll - 10.0 * (outside / inside).log10()).abs() < 1e-12);
        assert!(sll < -5.0 && sll > -7.0);
    }
}

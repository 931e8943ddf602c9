//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use holo_isac_core::linalg::{RMat, RVec};
use holo_isac_core::sdp::{BlockKind, Coefficient, LinearForm, Relation, SdpProblem, Sense};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `min <C, X>  s.t.  Tr X = 1,  <A_i, X> <= b_i,  X ⪰ 0`.
pub struct SpectraplexProblem {
    pub c: RMat,
    pub a: Vec<RMat>,
    pub b: Vec<f64>,
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> RMat {
    let m = RMat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

impl SpectraplexProblem {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, rows: usize) -> Self {
        let c = random_symmetric(rng, n) + RMat::identity(n, n) * 3.0;
        let mut a = Vec::new();
        let mut b = Vec::new();
        let center = RMat::identity(n, n) / n as f64;
        for _ in 0..rows {
            let ai = random_symmetric(rng, n);
            let slack = rng.random_range(0.02..0.4) * ai.norm();
            b.push(ai.dot(&center) + slack);
            a.push(ai);
        }
        SpectraplexProblem { c, a, b }
    }

    pub fn to_sdp(&self) -> SdpProblem {
        let n = self.c.nrows();
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block(BlockKind::Symmetric, n);
        p.objective = LinearForm::new().block(x, Coefficient::Real(self.c.clone()));
        p.constrain(
            LinearForm::new().block(x, Coefficient::Real(RMat::identity(n, n))),
            Relation::Eq,
            1.0,
            "trace",
        );
        for (ai, bi) in self.a.iter().zip(&self.b) {
            p.constrain(LinearForm::new().block(x, Coefficient::Real(ai.clone())), Relation::Le, *bi, "cut");
        }
        p
    }

    /// Augmented-Lagrangian projected gradient on the unit-trace spectraplex.
    pub fn first_order_value(&self) -> f64 {
        let n = self.c.nrows();
        let penalty = 20.0;
        let lip = penalty * self.a.iter().map(|a| a.norm_squared()).sum::<f64>() + 1e-12;
        let step = 1.0 / lip;
        let mut x = RMat::identity(n, n) / n as f64;
        let mut lam = vec![0.0; self.a.len()];
        for _ in 0..400 {
            // accelerated inner loop
            let mut y = x.clone();
            let mut t = 1.0f64;
            for _ in 0..400 {
                let mut grad = self.c.clone();
                for (i, ai) in self.a.iter().enumerate() {
                    let w = (lam[i] + penalty * (ai.dot(&y) - self.b[i])).max(0.0);
                    grad += ai * w;
                }
                let next = project_spectraplex(&(&y - grad * step));
                let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
                y = &next + (&next - &x) * ((t - 1.0) / t_next);
                x = next;
                t = t_next;
            }
            for (i, ai) in self.a.iter().enumerate() {
                lam[i] = (lam[i] + penalty * (ai.dot(&x) - self.b[i])).max(0.0);
            }
        }
        self.c.dot(&x)
    }
}

/// Euclidean projection onto `{X ⪰ 0, Tr X = 1}`.
pub fn project_spectraplex(m: &RMat) -> RMat {
    let eig = ((m + m.transpose()) * 0.5).symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let proj = project_simplex(&vals);
    let d = RMat::from_diagonal(&RVec::from_vec(proj));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> num_complex::Complex64 {
    num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_cvec(rng: &mut ChaCha8Rng, n: usize) -> holo_isac_core::linalg::CVec {
    holo_isac_core::linalg::CVec::from_fn(n, |_, _| random_complex(rng))
}

pub fn random_cmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> holo_isac_core::linalg::CMat {
    holo_isac_core::linalg::CMat::from_fn(r, c, |_, _| random_complex(rng))
}

/// `B^H conj(w)` written out from the definition `w^T B x = g^H x`.
pub fn response(b: &holo_isac_core::linalg::CMat, w: &holo_isac_core::linalg::CVec) -> holo_isac_core::linalg::CVec {
    (b.transpose() * w).conjugate()
}

/// Best `|a^H v|² / σ²` over `v = r (cos α, sin α e^{jφ})` with
/// `‖v‖² ≤ p` and `|c^H v|² ≤ ceiling`, on an `steps × steps` grid.
pub fn two_feed_grid_snr(
    a: &holo_isac_core::linalg::CVec,
    c: &holo_isac_core::linalg::CVec,
    p: f64,
    ceiling: f64,
    noise: f64,
    steps: usize,
) -> f64 {
    let mut best = 0.0f64;
    for i in 0..=steps {
        let alpha = core::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
        for j in 0..steps {
            let phi = core::f64::consts::TAU * j as f64 / steps as f64;
            let u0 = num_complex::Complex64::new(alpha.cos(), 0.0);
            let u1 = num_complex::Complex64::from_polar(alpha.sin(), phi);
            let gain = |x: &holo_isac_core::linalg::CVec| (x[0].conj() * u0 + x[1].conj() * u1).norm_sqr();
            let leak = gain(c);
            let r2 = if leak > 0.0 { p.min(ceiling / leak) } else { p };
            best = best.max(r2 * gain(a) / noise);
        }
    }
    best
}

pub fn random_surface(rng: &mut ChaCha8Rng) -> holo_isac_core::rhs::RhsConfig {
    let mut spec = holo_isac_core::rhs::GridSpec::new(rng.random_range(1..=5), rng.random_range(2..=5), rng.random_range(1..=4));
    spec.spacing = rng.random_range(0.15..0.5);
    spec.polarizability_phase = rng.random_range(0.0..std::f64::consts::TAU);
    spec.k_const = random_complex(rng) * 3.0;
    spec.theta_min = rng.random_range(0.01..0.3);
    spec.theta_max = rng.random_range(0.5..2.0);
    spec.build().unwrap()
}

pub fn random_pattern(rng: &mut ChaCha8Rng, cfg: &holo_isac_core::rhs::RhsConfig) -> holo_isac_core::rhs::HolographicPattern {
    holo_isac_core::rhs::HolographicPattern(
        (0..cfg.num_elements())
            .map(|_| rng.random_range(cfg.theta_min..=cfg.theta_max))
            .collect(),
    )
}

pub fn random_direction(rng: &mut ChaCha8Rng) -> holo_isac_core::scenario::Direction {
    holo_isac_core::scenario::Direction::new(rng.random_range(0.0..80.0), rng.random_range(0.0..359.0))
}

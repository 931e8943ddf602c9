use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::{PI, TAU};

pub type Point = [f64; 3];

/// Geometry and element physics of a holographic surface.
///
/// Elements lie in the `x = 0` plane; feeds sit on the same plane, outside
/// the element grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsConfig {
    /// Grid shape, when the elements come from [`GridSpec`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<(usize, usize)>,
    pub element_positions: Vec<Point>,
    pub feed_positions: Vec<Point>,
    pub wavelength: f64,
    pub guided_wavenumber: f64,
    pub polarizability_phase: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub k_const: Complex64,
}

/// Rectangular element grid with a column of feeds along one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub num_feeds: usize,
    pub wavelength: f64,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    /// Feed separation in wavelengths.
    pub feed_spacing: f64,
    /// Ratio of the guided wavenumber to the free-space wavenumber.
    pub guided_index: f64,
    pub polarizability_phase: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub k_const: Complex64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            rows: 6,
            cols: 6,
            num_feeds: 4,
            wavelength: 0.01,
            spacing: 0.23,
            feed_spacing: 0.23,
            guided_index: 3f64.sqrt(),
            polarizability_phase: PI / 2.0,
            theta_min: 0.01,
            theta_max: 1.0,
            k_const: Complex64::new(1.0, 0.0),
        }
    }
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, num_feeds: usize) -> Self {
        GridSpec {
            rows,
            cols,
            num_feeds,
            ..GridSpec::default()
        }
    }

    pub fn build(&self) -> Result<RhsConfig> {
        if self.rows == 0 || self.cols == 0 || self.num_feeds == 0 {
            return Err(Error::Config(format!(
                "grid needs positive rows/cols/feeds, got {}x{} with {} feeds",
                self.rows, self.cols, self.num_feeds
            )));
        }
        if !(self.spacing > 0.0) || !(self.feed_spacing > 0.0) || !(self.wavelength > 0.0) {
            return Err(Error::Config("spacings and wavelength must be positive".into()));
        }
        let d = self.spacing * self.wavelength;
        let (rows, cols) = (self.rows, self.cols);
        let mut elements = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let y = (c as f64 - (cols as f64 - 1.0) / 2.0) * d;
                let z = (r as f64 - (rows as f64 - 1.0) / 2.0) * d;
                elements.push([0.0, y, z]);
            }
        }
        let y_feed = -((cols as f64 - 1.0) / 2.0) * d - d;
        let df = self.feed_spacing * self.wavelength;
        let t = self.num_feeds as f64;
        let feeds = (0..self.num_feeds)
            .map(|i| [0.0, y_feed, (i as f64 - (t - 1.0) / 2.0) * df])
            .collect();
        let cfg = RhsConfig {
            grid: Some((rows, cols)),
            element_positions: elements,
            feed_positions: feeds,
            wavelength: self.wavelength,
            guided_wavenumber: self.guided_index * TAU / self.wavelength,
            polarizability_phase: self.polarizability_phase,
            theta_min: self.theta_min,
            theta_max: self.theta_max,
            k_const: self.k_const,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RhsConfig {
    pub fn num_elements(&self) -> usize {
        self.element_positions.len()
    }

    pub fn num_feeds(&self) -> usize {
        self.feed_positions.len()
    }

    pub fn free_wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// `e^{jτ}`
    pub fn phase_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.polarizability_phase)
    }

    pub fn midpoint_pattern(&self) -> HolographicPattern {
        HolographicPattern(alloc::vec![
            0.5 * (self.theta_min + self.theta_max);
            self.num_elements()
        ])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_elements();
        if n == 0 || self.num_feeds() == 0 {
            return Err(Error::Config("surface needs at least one element and one feed".into()));
        }
        if let Some((r, c)) = self.grid {
            if r * c != n {
                return Err(Error::Config(format!("grid {r}x{c} does not match {n} element positions")));
            }
        }
        if !(self.wavelength > 0.0) || !self.guided_wavenumber.is_finite() {
            return Err(Error::Config("wavelength must be positive".into()));
        }
        if !(self.theta_min > 0.0 && self.theta_min <= self.theta_max) || !self.theta_max.is_finite() {
            return Err(Error::Config(format!(
                "polarizability bounds need 0 < theta_min <= theta_max, got [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        if !(self.k_const.norm() > 0.0) || !self.polarizability_phase.is_finite() {
            return Err(Error::Config("k_const must be nonzero and the phase finite".into()));
        }
        for (i, p) in self.element_positions.iter().enumerate() {
            if p[0] != 0.0 {
                return Err(Error::Config(format!("element {i} is off the yoz plane (x = {})", p[0])));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if distance(&self.element_positions[i], &self.element_positions[j]) <= 0.0 {
                    return Err(Error::Config(format!("elements {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn min_element_spacing(&self) -> f64 {
        let n = self.num_elements();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min(distance(&self.element_positions[i], &self.element_positions[j]));
            }
        }
        best
    }

    pub fn check_pattern(&self, pattern: &HolographicPattern) -> Result<()> {
        if pattern.len() != self.num_elements() {
            return Err(Error::Dimension(format!(
                "pattern has {} entries for {} elements",
                pattern.len(),
                self.num_elements()
            )));
        }
        let tol = 1e-9 * self.theta_max;
        for (i, &t) in pattern.0.iter().enumerate() {
            if !(t >= self.theta_min - tol && t <= self.theta_max + tol) {
                return Err(Error::Config(format!(
                    "pattern entry {i} = {t} outside [{}, {}]",
                    self.theta_min, self.theta_max
                )));
            }
        }
        Ok(())
    }
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Polarizability magnitudes of the surface elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HolographicPattern(pub Vec<f64>);

impl HolographicPattern {
    pub fn uniform(n: usize, value: f64) -> Self {
        HolographicPattern(alloc::vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Clamps every entry to `[lo, hi]`, returning how many were moved.
    pub fn project(&mut self, lo: f64, hi: f64) -> usize {
        let mut moved = 0;
        for t in self.0.iter_mut() {
            let c = t.clamp(lo, hi);
            if c != *t {
                moved += 1;
                *t = c;
            }
        }
        moved
    }
}

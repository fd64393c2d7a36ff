use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::Domain;
use crate::{Error, Result};

/// A uniform frequency lattice ξ₀ + Δξ·{0,…,N−1}ⁿ and its dual spatial grid
/// x₀ + Δx·{0,…,N−1}ⁿ with Δx = 2π/(NΔξ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n: usize,
    pub resolution: usize,
    pub spacing: f64,
    pub origin: Vec<f64>,
    pub x_origin: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(n: usize, origin: Vec<f64>, resolution: usize, spacing: f64, x_origin: Vec<f64>) -> Result<Self> {
        let bad = |detail: String| Error::Parameter { op: "freewave::grid", detail };
        if !resolution.is_power_of_two() || resolution < 2 {
            return Err(bad(format!("resolution {resolution} is not a power of two")));
        }
        if !(spacing > 0.0) {
            return Err(bad("spacing must be positive".into()));
        }
        if origin.len() != n || x_origin.len() != n {
            return Err(bad("origin dimension mismatch".into()));
        }
        Ok(FrequencyGrid { n, resolution, spacing, origin, x_origin })
    }

    /// Smallest power-of-two grid with spacing `spacing` covering `domain`
    /// with two cells of padding, centred on the domain; the spatial window
    /// is centred on `x_center`.
    pub fn covering(domain: &Domain, spacing: f64, min_resolution: usize, x_center: &[f64]) -> Result<Self> {
        let (lo, hi) = domain.bounding_box();
        let cells = lo.iter().zip(&hi).map(|(a, b)| ((b - a) / spacing).ceil() as usize + 5).max().unwrap_or(8);
        let resolution = cells.max(min_resolution).next_power_of_two();
        Self::centered(domain.center(), resolution, spacing, x_center)
    }

    /// Grid of the given resolution centred on `center` in frequency and
    /// `x_center` in space.
    pub fn centered(center: &[f64], resolution: usize, spacing: f64, x_center: &[f64]) -> Result<Self> {
        let half = (resolution / 2) as f64 * spacing;
        let period = TAU / spacing;
        Self::new(
            center.len(),
            center.iter().map(|c| c - half).collect(),
            resolution,
            spacing,
            x_center.iter().map(|c| c - 0.5 * period).collect(),
        )
    }

    pub fn dx(&self) -> f64 {
        TAU / (self.resolution as f64 * self.spacing)
    }

    /// Spatial period L = NΔx = 2π/Δξ.
    pub fn period(&self) -> f64 {
        TAU / self.spacing
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn xi(&self, axis: usize, k: i64) -> f64 {
        self.origin[axis] + k as f64 * self.spacing
    }

    pub fn x(&self, axis: usize, j: usize) -> f64 {
        self.x_origin[axis] + j as f64 * self.dx()
    }

    /// Cell volume Δξⁿ.
    pub fn cell(&self) -> f64 {
        self.spacing.powi(self.n as i32)
    }

    /// Whether the grid box covers `domain` with `pad` cells to spare.
    pub fn covers(&self, domain: &Domain, pad: f64) -> bool {
        let (lo, hi) = domain.bounding_box();
        (0..self.n).all(|a| {
            let top = self.xi(a, self.resolution as i64 - 1);
            lo[a] >= self.origin[a] + pad * self.spacing - 1e-12 && hi[a] <= top - pad * self.spacing + 1e-12
        })
    }

    /// Whether both grids induce the same spatial sampling.
    pub fn same_spatial(&self, other: &FrequencyGrid) -> bool {
        let tol = 1e-9 * self.period();
        self.n == other.n
            && self.resolution == other.resolution
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && self.x_origin.iter().zip(&other.x_origin).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Same lattice: spacing equal and origins differing by whole cells.
    pub fn same_lattice(&self, other: &FrequencyGrid) -> bool {
        if self.n != other.n || (self.spacing - other.spacing).abs() > 1e-12 * self.spacing {
            return false;
        }
        self.origin.iter().zip(&other.origin).all(|(a, b)| {
            let k = (a - b) / self.spacing;
            (k - k.round()).abs() < 1e-6
        })
    }
}

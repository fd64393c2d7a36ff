use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// A ball or an axis-aligned box in frequency space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Ball { center: Vec<f64>, radius: f64 },
    Box { center: Vec<f64>, half_widths: Vec<f64> },
}

impl Domain {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Domain::Ball { center: center.to_vec(), radius }
    }

    pub fn cube(center: &[f64], half_width: f64) -> Self {
        Domain::Box { center: center.to_vec(), half_widths: vec![half_width; center.len()] }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Domain::Ball { center, .. } | Domain::Box { center, .. } => center,
        }
    }

    /// Radius of the smallest ball about the center containing the domain.
    pub fn radius(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => *radius,
            Domain::Box { half_widths, .. } => half_widths.iter().map(|h| h * h).sum::<f64>().sqrt(),
        }
    }

    /// Signed distance to the complement: positive inside, negative outside.
    /// For boxes the exterior value is the Chebyshev-type lower bound.
    pub fn depth(&self, xi: &[f64]) -> f64 {
        match self {
            Domain::Ball { center, radius } => {
                let d: f64 = xi.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                radius - d
            }
            Domain::Box { center, half_widths } => xi
                .iter()
                .zip(center)
                .zip(half_widths)
                .map(|((a, c), h)| h - (a - c).abs())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        self.depth(xi) >= -1e-12
    }

    /// The domain thickened by `margin` in every direction (boxes stay boxes).
    pub fn enlarged(&self, margin: f64) -> Domain {
        match self {
            Domain::Ball { center, radius } => Domain::Ball { center: center.clone(), radius: radius + margin },
            Domain::Box { center, half_widths } => Domain::Box {
                center: center.clone(),
                half_widths: half_widths.iter().map(|h| h + margin).collect(),
            },
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Domain::Box { center, half_widths } => (
                center.iter().zip(half_widths).map(|(c, h)| c - h).collect(),
                center.iter().zip(half_widths).map(|(c, h)| c + h).collect(),
            ),
        }
    }

    /// Sample points: a tensor grid with `k` points per axis clipped to the
    /// domain, plus boundary points for balls and the center.
    pub fn sample_points(&self, k: usize) -> Vec<DVector<f64>> {
        let n = self.dim();
        let k = k.max(2);
        let (lo, hi) = self.bounding_box();
        let mut pts = vec![DVector::from_column_slice(self.center())];
        let total = k.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = DVector::zeros(n);
            for a in 0..n {
                let i = rem % k;
                rem /= k;
                p[a] = lo[a] + (hi[a] - lo[a]) * i as f64 / (k - 1) as f64;
            }
            if self.contains(p.as_slice()) {
                pts.push(p);
            }
        }
        if let Domain::Ball { center, radius } = self {
            let c = DVector::from_column_slice(center);
            if n == 2 {
                let m = 4 * k;
                for i in 0..m {
                    let a = std::f64::consts::TAU * i as f64 / m as f64;
                    pts.push(&c + DVector::from_vec(vec![a.cos(), a.sin()]) * *radius);
                }
            } else {
                for a in 0..n {
                    for s in [-1.0, 1.0] {
                        let mut p = c.clone();
                        p[a] += s * radius;
                        pts.push(p);
                    }
                }
            }
        }
        pts
    }
}

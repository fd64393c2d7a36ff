use serde::Serialize;

use crate::freewave::CubeRegion;
use crate::quad::midpoints;

/// The 2^{(n+1)j} congruent subcubes Q_j(Q), indexed with time slowest and
/// the last spatial axis fastest.
#[derive(Clone, Debug, Serialize)]
pub struct CubePartition {
    pub parent: CubeRegion,
    pub depth: u32,
}

impl CubePartition {
    pub fn new(parent: CubeRegion, depth: u32) -> Self {
        CubePartition { parent, depth }
    }

    pub fn per_axis(&self) -> usize {
        1usize << self.depth
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.parent.center.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn child_side(&self) -> f64 {
        self.parent.effective_side() / self.per_axis() as f64
    }

    /// Per-axis cell indices of child `q`, in space-then-time order.
    pub fn child_cell(&self, mut q: usize) -> Vec<usize> {
        let d = self.parent.center.len();
        let k = self.per_axis();
        let mut out = vec![0; d];
        for a in 0..d - 1 {
            out[d - 2 - a] = q % k;
            q /= k;
        }
        out[d - 1] = q % k;
        out
    }

    pub fn child_index(&self, cell: &[usize]) -> usize {
        let d = cell.len();
        let k = self.per_axis();
        let mut q = cell[d - 1];
        for &c in &cell[..d - 1] {
            q = q * k + c;
        }
        q
    }

    pub fn child(&self, q: usize) -> CubeRegion {
        let cell = self.child_cell(q);
        let s = self.child_side();
        let center = cell.iter().enumerate().map(|(a, &i)| self.parent.lower(a) + (i as f64 + 0.5) * s).collect();
        CubeRegion { center, side: s, dilation: 1.0 }
    }

    pub fn children(&self) -> Vec<CubeRegion> {
        (0..self.len()).map(|q| self.child(q)).collect()
    }

    /// Index of the child containing (x, t), using half-open cells.
    pub fn locate(&self, x: &[f64], t: f64) -> Option<usize> {
        let n = x.len();
        let s = self.child_side();
        let k = self.per_axis();
        let mut cell = vec![0; n + 1];
        for a in 0..=n {
            let v = if a < n { x[a] } else { t };
            let u = ((v - self.parent.lower(a)) / s).floor();
            if u < 0.0 || u >= k as f64 {
                return None;
            }
            cell[a] = u as usize;
        }
        Some(self.child_index(&cell))
    }
}

/// The (c, j) interior ∪_{q ∈ Q_j(Q)} (1−c)q on a tensor midpoint grid with
/// `m_sub` nodes per child axis. Each node carries the exact fraction of its
/// cell lying inside the interior, so the complement volume is exact.
#[derive(Clone, Debug, Serialize)]
pub struct InteriorMask {
    pub nodes: Vec<Vec<f64>>,
    pub fractions: Vec<Vec<f64>>,
    pub cell_volume: f64,
}

pub fn interior(q: &CubeRegion, c: f64, j: u32, m_sub: usize) -> InteriorMask {
    let part = CubePartition::new(q.clone(), j);
    let k = part.per_axis();
    let m = k * m_sub.max(1);
    let side = q.effective_side();
    let h = side / m as f64;
    let child = part.child_side();
    let d = q.center.len();
    let mut nodes = Vec::with_capacity(d);
    let mut fractions = Vec::with_capacity(d);
    for a in 0..d {
        let lo = q.lower(a);
        let xs = midpoints(lo, q.upper(a), m);
        let fr = xs
            .iter()
            .map(|&x| {
                let i = (((x - lo) / child).floor() as usize).min(k - 1);
                let centre = lo + (i as f64 + 0.5) * child;
                let (a0, a1) = (centre - 0.5 * (1.0 - c) * child, centre + 0.5 * (1.0 - c) * child);
                let (b0, b1) = (x - 0.5 * h, x + 0.5 * h);
                ((a1.min(b1) - a0.max(b0)).max(0.0) / h).min(1.0)
            })
            .collect();
        nodes.push(xs);
        fractions.push(fr);
    }
    InteriorMask { nodes, fractions, cell_volume: h.powi(d as i32) }
}

impl InteriorMask {
    pub fn len(&self) -> usize {
        self.nodes.iter().map(|v| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fraction at a flat node index (time axis slowest, like the partition).
    pub fn fraction(&self, flat: usize) -> f64 {
        let d = self.nodes.len();
        let mut rem = flat;
        let mut f = 1.0;
        for a in (0..d - 1).rev() {
            let m = self.nodes[a].len();
            f *= self.fractions[a][rem % m];
            rem /= m;
        }
        f * self.fractions[d - 1][rem]
    }

    pub fn volume(&self) -> f64 {
        self.fractions.iter().map(|f| f.iter().sum::<f64>()).product::<f64>() * self.cell_volume
    }

    pub fn total_volume(&self) -> f64 {
        self.len() as f64 * self.cell_volume
    }
}

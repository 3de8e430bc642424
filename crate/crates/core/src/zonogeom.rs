//! Axis-aligned boxes, zonotopes, and reachable sets of the switched affine
//! dynamics.
//!
//! Every reachable set is carried as a [`Zonotope`]: boxes convert to
//! zonotopes exactly, affine maps and Minkowski sums stay inside the class,
//! and the interval hull gives the tight per-axis bounds used by the
//! abstraction's overlap and containment tests.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::plant::{DiscretePlant, Switch};

/// A closed axis-aligned box `[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        for (axis, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidBox(format!("non-finite bound on axis {axis}")));
            }
            if l > h {
                return Err(Error::InvalidBox(format!(
                    "lower bound {l} exceeds upper bound {h} on axis {axis}"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self> {
        let (lo, hi) = intervals.iter().copied().unzip();
        Self::new(lo, hi)
    }

    /// Degenerate box holding a single point.
    pub fn point(p: &[f64]) -> Result<Self> {
        Self::new(p.to_vec(), p.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn interval(&self, axis: usize) -> (f64, f64) {
        (self.lo[axis], self.hi[axis])
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *l <= *x && *x <= *h)
    }

    /// `other ⊆ self`, boundaries inclusive.
    pub fn contains(&self, other: &AxisBox) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Closed-set intersection test: boxes sharing only a face intersect.
    pub fn intersects(&self, other: &AxisBox) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= other.hi[i] && other.lo[i] <= self.hi[i])
    }
}

/// How `Zonotope::intersects_box` decides overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntersectMode {
    /// Interval hull against the box. Over-approximates, which only ever adds
    /// transitions to an abstraction.
    #[default]
    Hull,
    /// Exact convex test by separating axes (two dimensions only).
    Exact,
}

/// `{ c + G·ξ : ξ ∈ [-1, 1]^m }` with generators stored as the columns of `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    center: DVector<f64>,
    generators: DMatrix<f64>,
}

impl Zonotope {
    pub fn new(center: DVector<f64>, generators: DMatrix<f64>) -> Result<Self> {
        if generators.nrows() != center.len() && generators.ncols() > 0 {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                found: generators.nrows(),
            });
        }
        if center.iter().chain(generators.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "zonotope",
                reason: "non-finite entry".into(),
            });
        }
        Ok(Self::pruned(center, generators))
    }

    fn pruned(center: DVector<f64>, generators: DMatrix<f64>) -> Self {
        let n = center.len();
        let keep: Vec<usize> = (0..generators.ncols())
            .filter(|&j| generators.column(j).iter().any(|v| *v != 0.0))
            .collect();
        let generators = if keep.len() == generators.ncols() && generators.nrows() == n {
            generators
        } else {
            DMatrix::from_fn(n, keep.len(), |i, j| generators[(i, keep[j])])
        };
        Self { center, generators }
    }

    pub fn point(center: &[f64]) -> Self {
        Self {
            center: DVector::from_column_slice(center),
            generators: DMatrix::zeros(center.len(), 0),
        }
    }

    /// Center at the box midpoint, one axis-aligned generator per
    /// non-degenerate axis.
    pub fn from_box(b: &AxisBox) -> Self {
        let n = b.dim();
        let center = DVector::from_vec(b.center());
        let generators = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.5 * (b.hi[i] - b.lo[i])
            } else {
                0.0
            }
        });
        Self::pruned(center, generators)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    /// `{ A z + K : z ∈ Z }`.
    pub fn affine_image(&self, a: &DMatrix<f64>, k: &DVector<f64>) -> Result<Self> {
        let n = self.dim();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if k.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: k.len(),
            });
        }
        let center = a * &self.center + k;
        let generators = if self.generators.ncols() == 0 {
            DMatrix::zeros(a.nrows(), 0)
        } else {
            a * &self.generators
        };
        Ok(Self::pruned(center, generators))
    }

    pub fn minkowski_sum(&self, other: &Zonotope) -> Result<Self> {
        let n = self.dim();
        if other.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: other.dim(),
            });
        }
        let (m1, m2) = (self.num_generators(), other.num_generators());
        let generators = DMatrix::from_fn(n, m1 + m2, |i, j| {
            if j < m1 {
                self.generators[(i, j)]
            } else {
                other.generators[(i, j - m1)]
            }
        });
        Ok(Self {
            center: &self.center + &other.center,
            generators,
        })
    }

    /// Tightest axis-aligned box containing the zonotope.
    pub fn interval_hull(&self) -> AxisBox {
        let n = self.dim();
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            let radius: f64 = self.generators.row(i).iter().map(|g| g.abs()).sum();
            lo.push(self.center[i] - radius);
            hi.push(self.center[i] + radius);
        }
        AxisBox { lo, hi }
    }

    /// `max { <dir, z> : z ∈ Z }`.
    pub fn support(&self, dir: &[f64]) -> f64 {
        let d = DVector::from_column_slice(dir);
        let spread: f64 = (0..self.num_generators())
            .map(|j| self.generators.column(j).dot(&d).abs())
            .sum();
        self.center.dot(&d) + spread
    }

    pub fn intersects_box(&self, b: &AxisBox, mode: IntersectMode) -> Result<bool> {
        if b.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.dim(),
            });
        }
        match mode {
            IntersectMode::Hull => Ok(self.interval_hull().intersects(b)),
            IntersectMode::Exact => {
                if self.dim() != 2 {
                    return Err(Error::ExactRequires2d(self.dim()));
                }
                Ok(self.intersects_box_exact(b))
            }
        }
    }

    // Two convex polygons in the plane are disjoint iff some edge normal of one
    // of them separates them; the edge normals of a zonotope are the normals of
    // its generators.
    fn intersects_box_exact(&self, b: &AxisBox) -> bool {
        if !self.interval_hull().intersects(b) {
            return false;
        }
        for j in 0..self.num_generators() {
            let g = self.generators.column(j);
            let normal = [-g[1], g[0]];
            let z_hi = self.support(&normal);
            let z_lo = -self.support(&[-normal[0], -normal[1]]);
            let mut b_lo = 0.0;
            let mut b_hi = 0.0;
            for (axis, n) in normal.iter().enumerate() {
                let (a, c) = (n * b.lo[axis], n * b.hi[axis]);
                b_lo += a.min(c);
                b_hi += a.max(c);
            }
            if z_hi < b_lo || b_hi < z_lo {
                return false;
            }
        }
        true
    }

    /// `Z ⊆ b`; exact because the interval hull is tight on every axis.
    pub fn contained_in_box(&self, b: &AxisBox) -> Result<bool> {
        if b.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.dim(),
            });
        }
        Ok(b.contains(&self.interval_hull()))
    }

    /// Vertices of a planar zonotope in counter-clockwise order.
    pub fn vertices(&self) -> Result<Vec<[f64; 2]>> {
        if self.dim() != 2 {
            return Err(Error::ExactRequires2d(self.dim()));
        }
        let c = [self.center[0], self.center[1]];
        if self.num_generators() == 0 {
            return Ok(vec![c]);
        }
        // orient every generator into the upper half-plane, then sort by angle
        let mut gens: Vec<[f64; 2]> = (0..self.num_generators())
            .map(|j| {
                let (x, y) = (self.generators[(0, j)], self.generators[(1, j)]);
                if y < 0.0 || (y == 0.0 && x < 0.0) {
                    [-x, -y]
                } else {
                    [x, y]
                }
            })
            .collect();
        gens.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
        let mut p = gens
            .iter()
            .fold(c, |acc, g| [acc[0] - g[0], acc[1] - g[1]]);
        let mut out = Vec::with_capacity(2 * gens.len());
        for g in gens.iter() {
            out.push(p);
            p = [p[0] + 2.0 * g[0], p[1] + 2.0 * g[1]];
        }
        for g in gens.iter() {
            out.push(p);
            p = [p[0] - 2.0 * g[0], p[1] - 2.0 * g[1]];
        }
        Ok(out)
    }
}

/// Disturbance set `D = { d ∈ R^2 : ‖d‖₁ ≤ radius }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceBall {
    radius: f64,
}

impl DisturbanceBall {
    pub fn new(radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidParameter {
                name: "disturbance_radius",
                reason: format!("must be finite and non-negative, got {radius}"),
            });
        }
        Ok(Self { radius })
    }

    pub fn zero() -> Self {
        Self { radius: 0.0 }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, d: &[f64]) -> bool {
        d.iter().map(|v| v.abs()).sum::<f64>() <= self.radius
    }

    /// The 2-D 1-norm ball is the diamond spanned by `(r/2, r/2)` and
    /// `(r/2, -r/2)`.
    pub fn zonotope(&self) -> Zonotope {
        let h = 0.5 * self.radius;
        Zonotope::pruned(
            DVector::zeros(2),
            DMatrix::from_column_slice(2, 2, &[h, h, h, -h]),
        )
    }
}

/// One reach step `{ A_s x + K_s + d : x ∈ Z, d ∈ D }`.
pub fn reach_step(z: &Zonotope, switch: Switch, plant: &DiscretePlant) -> Result<Zonotope> {
    let (a, k) = plant.affine_parts(switch);
    z.affine_image(&a, &k)?
        .minkowski_sum(&plant.disturbance().zonotope())
}

/// All intermediate sets `Reach^1 .. Reach^steps` from `start` under a fixed
/// switch position.
pub fn reach_sequence(
    start: &Zonotope,
    switch: Switch,
    steps: usize,
    plant: &DiscretePlant,
) -> Result<Vec<Zonotope>> {
    let mut out = Vec::with_capacity(steps);
    let mut z = start.clone();
    for _ in 0..steps {
        z = reach_step(&z, switch, plant)?;
        out.push(z.clone());
    }
    Ok(out)
}

/// `Reach^k(b0, s)`, the k-fold composition of the one-step reach map.
pub fn reach_k(b0: &AxisBox, switch: Switch, k: usize, plant: &DiscretePlant) -> Result<Zonotope> {
    if k == 0 {
        return Err(Error::ZeroHorizon);
    }
    let mut z = Zonotope::from_box(b0);
    for _ in 0..k {
        z = reach_step(&z, switch, plant)?;
    }
    Ok(z)
}

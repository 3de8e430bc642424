use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zonogeom::AxisBox;

/// Index of a closed grid cell: `(column along x1, row along x2)`.
pub type Cell = (u32, u32);

/// Rectangular partition of a 2-D domain given by strictly increasing
/// breakpoints on each axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x1: Vec<f64>,
    x2: Vec<f64>,
}

impl Grid {
    pub fn from_breakpoints(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        for (name, b) in [("x1", &x1), ("x2", &x2)] {
            if b.len() < 2 {
                return Err(Error::Grid(format!("{name} needs at least two breakpoints")));
            }
            if b.iter().any(|v| !v.is_finite()) || b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Grid(format!("{name} breakpoints must be finite and strictly increasing")));
            }
            if b.len() - 1 > u32::MAX as usize {
                return Err(Error::Grid(format!("too many {name} cells")));
            }
        }
        Ok(Self { x1, x2 })
    }

    /// Uniform `n1 × n2` partition of `domain`, refined so the target bounds
    /// are breakpoints.
    pub fn build(domain: &AxisBox, target: &AxisBox, n1: usize, n2: usize) -> Result<Self> {
        if domain.dim() != 2 || target.dim() != 2 {
            return Err(Error::Grid("domain and target must be 2-D".into()));
        }
        if n1 == 0 || n2 == 0 {
            return Err(Error::Grid("cell counts must be positive".into()));
        }
        if !domain.contains(target) {
            return Err(Error::Grid("target is not contained in the domain".into()));
        }
        let axis = |ax: usize, n: usize| -> Result<Vec<f64>> {
            let (lo, hi) = domain.interval(ax);
            if lo >= hi {
                return Err(Error::Grid(format!("domain axis {ax} is degenerate")));
            }
            let mut b: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
            *b.last_mut().unwrap() = hi;
            let tol = 1e-9 * (hi - lo);
            let (tlo, thi) = target.interval(ax);
            for t in [tlo, thi] {
                match b.iter().position(|&v| (v - t).abs() <= tol) {
                    Some(i) => b[i] = t,
                    None => {
                        let i = b.partition_point(|&v| v < t);
                        b.insert(i, t);
                    }
                }
            }
            b.dedup();
            if b.windows(2).any(|w| w[1] - w[0] <= tol) {
                return Err(Error::Grid(format!("target bound on axis {ax} leaves a sliver cell")));
            }
            Ok(b)
        };
        Self::from_breakpoints(axis(0, n1)?, axis(1, n2)?)
    }

    pub fn breakpoints(&self, axis: usize) -> &[f64] {
        if axis == 0 {
            &self.x1
        } else {
            &self.x2
        }
    }

    pub fn n_cols(&self) -> u32 {
        (self.x1.len() - 1) as u32
    }

    pub fn n_rows(&self) -> u32 {
        (self.x2.len() - 1) as u32
    }

    pub fn n_cells(&self) -> usize {
        self.n_cols() as usize * self.n_rows() as usize
    }

    pub fn cell_index(&self, c: Cell) -> usize {
        c.0 as usize * self.n_rows() as usize + c.1 as usize
    }

    pub fn col_interval(&self, i: u32) -> (f64, f64) {
        (self.x1[i as usize], self.x1[i as usize + 1])
    }

    pub fn row_interval(&self, j: u32) -> (f64, f64) {
        (self.x2[j as usize], self.x2[j as usize + 1])
    }

    pub fn cell_box(&self, c: Cell) -> AxisBox {
        let (a, b) = self.col_interval(c.0);
        let (p, q) = self.row_interval(c.1);
        AxisBox::from_intervals(&[(a, b), (p, q)]).expect("grid cells are valid boxes")
    }

    /// Box covering the index rectangle `[i_lo, i_hi] × [j_lo, j_hi]`.
    pub fn range_box(&self, i_lo: u32, i_hi: u32, j_lo: u32, j_hi: u32) -> AxisBox {
        AxisBox::from_intervals(&[
            (self.x1[i_lo as usize], self.x1[i_hi as usize + 1]),
            (self.x2[j_lo as usize], self.x2[j_hi as usize + 1]),
        ])
        .expect("grid ranges are valid boxes")
    }

    pub fn domain(&self) -> AxisBox {
        self.range_box(0, self.n_cols() - 1, 0, self.n_rows() - 1)
    }

    /// Closed cells along `axis` that meet `[lo, hi]`, as an inclusive index
    /// range; `None` if the interval misses the domain.
    pub fn hit_range(&self, axis: usize, lo: f64, hi: f64) -> Option<(u32, u32)> {
        let b = self.breakpoints(axis);
        let n = b.len() - 1;
        if hi < b[0] || lo > b[n] || lo > hi {
            return None;
        }
        // first cell whose upper end reaches lo, last cell whose lower end is <= hi
        let first = b[1..].partition_point(|&v| v < lo);
        let last = b[..n].partition_point(|&v| v <= hi) - 1;
        Some((first as u32, last as u32))
    }

    /// Cells along `axis` containing `v` (two on a shared breakpoint).
    pub fn cells_at(&self, axis: usize, v: f64) -> Option<(u32, u32)> {
        self.hit_range(axis, v, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(iv: &[(f64, f64)]) -> AxisBox {
        AxisBox::from_intervals(iv).unwrap()
    }

    #[test]
    fn default_grid_resolution() {
        let g = Grid::build(&b(&[(0.0, 80.0), (0.0, 25.0)]), &b(&[(0.0, 80.0), (24.0, 25.0)]), 40, 50).unwrap();
        assert_eq!(g.n_cols(), 40);
        assert_eq!(g.n_rows(), 50);
        assert_eq!(g.col_interval(0), (0.0, 2.0));
        assert_eq!(g.row_interval(48), (24.0, 24.5));
        assert_eq!(g.row_interval(49), (24.5, 25.0));
    }

    #[test]
    fn single_cell() {
        let d = b(&[(0.0, 1.0), (0.0, 1.0)]);
        let g = Grid::build(&d, &d, 1, 1).unwrap();
        assert_eq!(g.n_cells(), 1);
    }

    #[test]
    fn refinement_inserts_target_bounds() {
        let g = Grid::build(&b(&[(0.0, 80.0), (0.0, 25.0)]), &b(&[(0.0, 80.0), (24.2, 25.0)]), 4, 5).unwrap();
        assert!(g.breakpoints(1).contains(&24.2));
        assert_eq!(g.n_rows(), 6);
        assert!(Grid::build(&b(&[(0.0, 1.0), (0.0, 1.0)]), &b(&[(0.0, 2.0), (0.0, 1.0)]), 2, 2).is_err());
    }

    #[test]
    fn hit_ranges_are_closed() {
        let g = Grid::from_breakpoints(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(g.hit_range(0, 1.0, 1.0), Some((0, 1)));
        assert_eq!(g.hit_range(0, 0.2, 0.8), Some((0, 0)));
        assert_eq!(g.hit_range(0, -5.0, 0.0), Some((0, 0)));
        assert_eq!(g.hit_range(0, 2.5, 9.0), Some((2, 2)));
        assert_eq!(g.hit_range(0, 3.1, 9.0), None);
        assert_eq!(g.hit_range(0, -1.0, 10.0), Some((0, 2)));
    }
}

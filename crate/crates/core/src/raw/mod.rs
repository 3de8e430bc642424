//! Finite abstraction over pairs (true-state cell, measured-voltage row).
//!
//! Action 1 is abstracted as a whole on-then-off cycle, action 2 as a single
//! off step. Reach sets are computed once per x-cell and shared by every
//! measurement row, since the dynamics do not depend on the measurement.

mod grid;

pub use grid::{Cell, Grid};

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::Action;
use crate::ltl::Label;
use crate::plant::{DiscretePlant, Switch};
use crate::zonogeom::{reach_sequence, reach_step, AxisBox, IntersectMode, Zonotope};

/// Raw abstraction state. `meas` is the row of the measured voltage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RawState {
    Out,
    In { cell: Cell, meas: u32 },
}

impl RawState {
    pub fn new(cell: Cell, meas: u32) -> Self {
        RawState::In { cell, meas }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionOptions {
    pub intersect: IntersectMode,
    /// Successor cells of a cycle must meet any intermediate set rather than
    /// only the final one.
    pub literal_eq9: bool,
    /// Also send a cycle to `Out` when some intermediate set meets the target
    /// and a later one leaves it.
    pub strict_exit: bool,
}

impl Default for AbstractionOptions {
    fn default() -> Self {
        Self {
            intersect: IntersectMode::Hull,
            literal_eq9: false,
            strict_exit: true,
        }
    }
}

/// Reach sets of one cycle from an x-cell.
#[derive(Debug, Clone)]
pub struct ModeOneSets {
    /// `N_dwell` on-reaches followed by `N_grace` off-continuations.
    pub inter: Vec<Zonotope>,
    /// Voltage interval at the measurement instant.
    pub mid_x2: (f64, f64),
    pub final_set: Zonotope,
}

/// Successor structure of an x-cell under one action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSummary {
    pub exits: bool,
    /// Successor x-cells, sorted.
    pub hits: Vec<Cell>,
    /// Rows the measured voltage may fall in (action 1 only).
    pub mid_rows: Option<(u32, u32)>,
}

impl CellSummary {
    /// Inclusive index hull of `hits`.
    pub fn hit_hull(&self) -> Option<(u32, u32, u32, u32)> {
        let first = self.hits.first()?;
        let mut h = (first.0, first.0, first.1, first.1);
        for &(i, j) in &self.hits {
            h.0 = h.0.min(i);
            h.1 = h.1.max(i);
            h.2 = h.2.min(j);
            h.3 = h.3.max(j);
        }
        Some(h)
    }
}

pub struct RawAbstraction {
    plant: DiscretePlant,
    grid: Grid,
    target: AxisBox,
    options: AbstractionOptions,
    target_cell: Vec<bool>,
    touch_cell: Vec<bool>,
    hold: Vec<OnceLock<CellSummary>>,
    cycle: Vec<OnceLock<CellSummary>>,
}

impl RawAbstraction {
    /// The domain is the grid's extent.
    pub fn new(plant: DiscretePlant, grid: Grid, target: AxisBox, options: AbstractionOptions) -> Result<Self> {
        if target.dim() != 2 || !grid.domain().contains(&target) {
            return Err(Error::Grid("target must be a 2-D box inside the grid domain".into()));
        }
        let n = grid.n_cells();
        let mut target_cell = vec![false; n];
        let mut touch_cell = vec![false; n];
        for i in 0..grid.n_cols() {
            for j in 0..grid.n_rows() {
                let b = grid.cell_box((i, j));
                let idx = grid.cell_index((i, j));
                target_cell[idx] = target.contains(&b);
                touch_cell[idx] = target_cell[idx] || interiors_overlap(&b, &target);
            }
        }
        Ok(Self {
            plant,
            grid,
            target,
            options,
            target_cell,
            touch_cell,
            hold: (0..n).map(|_| OnceLock::new()).collect(),
            cycle: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn plant(&self) -> &DiscretePlant {
        &self.plant
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn target(&self) -> &AxisBox {
        &self.target
    }

    pub fn options(&self) -> AbstractionOptions {
        self.options
    }

    /// Number of raw states including `Out`.
    pub fn num_states(&self) -> usize {
        self.grid.n_cells() * self.grid.n_rows() as usize + 1
    }

    pub fn is_target_cell(&self, c: Cell) -> bool {
        self.target_cell[self.grid.cell_index(c)]
    }

    /// The cell's interior meets the target.
    pub fn touches_target_cell(&self, c: Cell) -> bool {
        self.touch_cell[self.grid.cell_index(c)]
    }

    pub fn label(&self, q: RawState) -> Label {
        match q {
            RawState::Out => Label::EMPTY,
            RawState::In { cell, .. } => Label::new(true, self.is_target_cell(cell)),
        }
    }

    pub fn mode1_sets(&self, c: Cell) -> ModeOneSets {
        let plant = &self.plant;
        let start = Zonotope::from_box(&self.grid.cell_box(c));
        let mut inter = reach_sequence(&start, Switch::On, plant.n_dwell(), plant).expect("2-D sets");
        let on_end = inter.last().expect("n_dwell >= 1").clone();
        inter.extend(reach_sequence(&on_end, Switch::Off, plant.n_grace(), plant).expect("2-D sets"));
        let mid_x2 = inter[plant.n_grace() - 1].interval_hull().interval(1);
        let final_set = inter.last().unwrap().clone();
        ModeOneSets {
            inter,
            mid_x2,
            final_set,
        }
    }

    pub fn hold_summary(&self, c: Cell) -> &CellSummary {
        self.hold[self.grid.cell_index(c)].get_or_init(|| self.compute_hold(c))
    }

    pub fn cycle_summary(&self, c: Cell) -> &CellSummary {
        self.cycle[self.grid.cell_index(c)].get_or_init(|| self.compute_cycle(c))
    }

    pub fn summary(&self, c: Cell, a: Action) -> &CellSummary {
        match a {
            Action::Cycle => self.cycle_summary(c),
            Action::Hold => self.hold_summary(c),
        }
    }

    fn compute_hold(&self, c: Cell) -> CellSummary {
        let z = reach_step(&Zonotope::from_box(&self.grid.cell_box(c)), Switch::Off, &self.plant)
            .expect("2-D sets");
        let exits = !self.inside(&z, &self.grid.domain());
        CellSummary {
            exits,
            hits: self.hit_cells(std::slice::from_ref(&z)),
            mid_rows: None,
        }
    }

    fn compute_cycle(&self, c: Cell) -> CellSummary {
        let sets = self.mode1_sets(c);
        let domain = self.grid.domain();
        let exits = if self.is_target_cell(c) {
            sets.inter.iter().any(|z| !self.inside(z, &self.target))
        } else {
            let leaves_domain = sets.inter.iter().any(|z| !self.inside(z, &domain));
            let first_hit = sets.inter.iter().position(|z| self.meets(z, &self.target));
            let final_out = !self.inside(&sets.final_set, &self.target);
            let enter_then_exit = first_hit.is_some() && final_out;
            let strict = self.options.strict_exit
                && first_hit.is_some_and(|f| sets.inter[f + 1..].iter().any(|z| !self.inside(z, &self.target)));
            leaves_domain || enter_then_exit || strict
        };
        let hits = if self.options.literal_eq9 {
            self.hit_cells(&sets.inter)
        } else {
            self.hit_cells(std::slice::from_ref(&sets.final_set))
        };
        CellSummary {
            exits,
            hits,
            mid_rows: self.grid.hit_range(1, sets.mid_x2.0, sets.mid_x2.1),
        }
    }

    fn inside(&self, z: &Zonotope, b: &AxisBox) -> bool {
        z.contained_in_box(b).expect("2-D sets")
    }

    fn meets(&self, z: &Zonotope, b: &AxisBox) -> bool {
        z.intersects_box(b, self.options.intersect).expect("2-D sets")
    }

    fn hit_cells(&self, sets: &[Zonotope]) -> Vec<Cell> {
        let mut out = Vec::new();
        for z in sets {
            let h = z.interval_hull();
            let (x1, x2) = (h.interval(0), h.interval(1));
            let (Some(cols), Some(rows)) = (self.grid.hit_range(0, x1.0, x1.1), self.grid.hit_range(1, x2.0, x2.1))
            else {
                continue;
            };
            for i in cols.0..=cols.1 {
                for j in rows.0..=rows.1 {
                    if self.options.intersect == IntersectMode::Hull || self.meets(z, &self.grid.cell_box((i, j))) {
                        out.push((i, j));
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `τ(q, a)`, sorted with `Out` first when present.
    pub fn successors(&self, q: RawState, a: Action) -> Vec<RawState> {
        let RawState::In { cell, meas } = q else {
            return vec![RawState::Out];
        };
        let s = self.summary(cell, a);
        let mut out = Vec::new();
        if s.exits {
            out.push(RawState::Out);
        }
        match a {
            Action::Hold => out.extend(s.hits.iter().map(|&c| RawState::new(c, meas))),
            Action::Cycle => {
                if let Some((lo, hi)) = s.mid_rows {
                    for &c in &s.hits {
                        out.extend((lo..=hi).map(|m| RawState::new(c, m)));
                    }
                }
            }
        }
        if out.is_empty() {
            out.push(RawState::Out);
        }
        out.sort_unstable();
        out
    }

    pub fn successors_action1(&self, q: RawState) -> Vec<RawState> {
        self.successors(q, Action::Cycle)
    }

    pub fn successors_action2(&self, q: RawState) -> Vec<RawState> {
        self.successors(q, Action::Hold)
    }

    /// Cells meeting `x_init`, each paired with its own row as measurement.
    pub fn initial_states(&self, x_init: &AxisBox) -> Result<Vec<RawState>> {
        if x_init.dim() != 2 || !self.grid.domain().contains(x_init) {
            return Err(Error::InitOutsideDomain);
        }
        let (a, b) = x_init.interval(0);
        let (c, d) = x_init.interval(1);
        let cols = self.grid.hit_range(0, a, b).ok_or(Error::InitOutsideDomain)?;
        let rows = self.grid.hit_range(1, c, d).ok_or(Error::InitOutsideDomain)?;
        let mut out = Vec::new();
        for i in cols.0..=cols.1 {
            for j in rows.0..=rows.1 {
                out.push(RawState::new((i, j), j));
            }
        }
        Ok(out)
    }

    /// Raw states reachable from `init` under both actions.
    pub fn reachable(&self, init: &[RawState]) -> Vec<RawState> {
        let mut seen: std::collections::BTreeSet<RawState> = init.iter().copied().collect();
        let mut stack: Vec<RawState> = seen.iter().copied().collect();
        while let Some(q) = stack.pop() {
            for a in Action::ALL {
                for s in self.successors(q, a) {
                    if seen.insert(s) {
                        stack.push(s);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }
}

fn interiors_overlap(a: &AxisBox, b: &AxisBox) -> bool {
    (0..a.dim()).all(|ax| {
        let (p, q) = a.interval(ax);
        let (r, s) = b.interval(ax);
        p.max(r) < q.min(s)
    })
}

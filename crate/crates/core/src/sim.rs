//! Closed-loop simulation of the plant under the runtime controller, with
//! ground-truth checks of the tracked belief.

use nalgebra::Vector2;
use rand::Rng;

use crate::belief::{BeliefAbstraction, BeliefKey};
use crate::game::ControllerTable;
use crate::hybrid::{hybrid_step, Action, HybridState, HybridTrace, TraceRecord};
use crate::ltl::{Label, ObservationMap};
use crate::raw::{Grid, RawAbstraction};
use crate::runtime::{Runtime, RuntimeError};

/// Uniform sample from the 1-norm ball of radius `r`.
pub fn sample_disturbance<R: Rng + ?Sized>(rng: &mut R, r: f64) -> Vector2<f64> {
    if r == 0.0 {
        return Vector2::zeros();
    }
    loop {
        let d = Vector2::new(rng.random_range(-r..=r), rng.random_range(-r..=r));
        if d.abs().sum() <= r {
            return d;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionRecord {
    pub k: usize,
    pub belief: u32,
    pub action: Action,
}

#[derive(Debug, Clone)]
pub struct ClosedLoopRun {
    pub trace: HybridTrace,
    pub decisions: Vec<DecisionRecord>,
    /// Decision instants where the true cell or measured row fell outside the
    /// tracked belief, or the tracked belief was `Out`.
    pub belief_misses: usize,
    pub fault: Option<RuntimeError>,
}

impl ClosedLoopRun {
    pub fn labels(&self, map: &ObservationMap) -> Vec<Label> {
        self.trace.states().map(|x| map.label(x.as_slice())).collect()
    }

    pub fn max_x2(&self) -> f64 {
        self.trace.states().map(|x| x[1]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The pieces a closed loop needs; the plant and grid come from `raw`.
#[derive(Clone, Copy)]
pub struct ClosedLoop<'a> {
    pub raw: &'a RawAbstraction,
    pub belief: &'a BeliefAbstraction,
    pub table: &'a ControllerTable,
}

impl ClosedLoop<'_> {
    pub fn observation_map(&self) -> ObservationMap {
        observation_map(self.raw)
    }

    /// Runs `horizon` steps from `x_init`. A model-violation fault ends the
    /// run early and is reported in the result.
    pub fn run<R: Rng + ?Sized>(&self, x_init: [f64; 2], horizon: usize, rng: &mut R) -> Result<ClosedLoopRun, RuntimeError> {
        let rt = Runtime::init(self.belief, self.table, self.raw.grid(), x_init)?;
        Ok(drive(self.raw, rt, x_init, horizon, rng, |rt| rt.decide()))
    }
}

/// Open-loop driver: one cycle followed by `holds` off steps, repeated, with
/// the belief tracked alongside. Needs no controller table.
#[derive(Clone, Copy)]
pub struct PeriodicLoop<'a> {
    pub raw: &'a RawAbstraction,
    pub belief: &'a BeliefAbstraction,
    pub holds: usize,
}

impl PeriodicLoop<'_> {
    pub fn run<R: Rng + ?Sized>(&self, x_init: [f64; 2], horizon: usize, rng: &mut R) -> Result<ClosedLoopRun, RuntimeError> {
        let rt = Runtime::track(self.belief, self.raw.grid(), x_init)?;
        let period = self.holds + 1;
        let mut n = 0usize;
        Ok(drive(self.raw, rt, x_init, horizon, rng, |rt| {
            let a = if n.is_multiple_of(period) { Action::Cycle } else { Action::Hold };
            n += 1;
            rt.commit(a);
            Ok(a)
        }))
    }
}

/// A plant-plus-belief execution that the theorem harness can replay.
pub trait Execution: Sync {
    fn raw(&self) -> &RawAbstraction;
    fn belief(&self) -> &BeliefAbstraction;
    fn execute(&self, x_init: [f64; 2], horizon: usize, rng: &mut dyn rand::RngCore) -> Result<ClosedLoopRun, RuntimeError>;
}

impl Execution for ClosedLoop<'_> {
    fn raw(&self) -> &RawAbstraction {
        self.raw
    }
    fn belief(&self) -> &BeliefAbstraction {
        self.belief
    }
    fn execute(&self, x_init: [f64; 2], horizon: usize, rng: &mut dyn rand::RngCore) -> Result<ClosedLoopRun, RuntimeError> {
        self.run(x_init, horizon, rng)
    }
}

impl Execution for PeriodicLoop<'_> {
    fn raw(&self) -> &RawAbstraction {
        self.raw
    }
    fn belief(&self) -> &BeliefAbstraction {
        self.belief
    }
    fn execute(&self, x_init: [f64; 2], horizon: usize, rng: &mut dyn rand::RngCore) -> Result<ClosedLoopRun, RuntimeError> {
        self.run(x_init, horizon, rng)
    }
}

pub fn observation_map(raw: &RawAbstraction) -> ObservationMap {
    ObservationMap {
        domain: raw.grid().domain(),
        target: raw.target().clone(),
    }
}

fn drive<R: Rng + ?Sized>(
    raw: &RawAbstraction,
    mut rt: Runtime<'_>,
    x_init: [f64; 2],
    horizon: usize,
    rng: &mut R,
    mut choose: impl FnMut(&mut Runtime<'_>) -> Result<Action, RuntimeError>,
) -> ClosedLoopRun {
    let plant = raw.plant();
    let grid = raw.grid();
    let radius = plant.disturbance().radius();
    let mut h = HybridState::initial(Vector2::new(x_init[0], x_init[1]), plant);
    let mut run = ClosedLoopRun {
        trace: HybridTrace::default(),
        decisions: Vec::new(),
        belief_misses: 0,
        fault: None,
    };
    for k in 0..horizon {
        let mut action = None;
        let mut key = None;
        if h.at_decision(plant) {
            if k > 0 {
                if let Err(e) = rt.observe_measurement(grid, [h.x_hat[0], h.x_hat[1]]) {
                    run.fault = Some(e);
                    break;
                }
            }
            let p = rt.current_state().key().copied();
            if !p.is_some_and(|p| belief_holds(grid, &p, &h)) {
                run.belief_misses += 1;
            }
            let a = match choose(&mut rt) {
                Ok(a) => a,
                Err(e) => {
                    run.fault = Some(e);
                    break;
                }
            };
            run.decisions.push(DecisionRecord {
                k,
                belief: rt.current(),
                action: a,
            });
            action = Some(a);
            key = p;
        }
        let d = sample_disturbance(rng, radius);
        let (next, switch) = hybrid_step(&h, action, d, plant).expect("disturbance sampled inside the ball");
        run.trace.records.push(TraceRecord {
            k,
            mode: next.mode,
            switch,
            action,
            x: h.x,
            x_hat: h.x_hat,
            t_d: h.t_d,
            belief: key,
        });
        h = next;
    }
    run
}

fn belief_holds(grid: &Grid, p: &BeliefKey, h: &HybridState) -> bool {
    let (Some(cols), Some(rows), Some(meas)) = (
        grid.cells_at(0, h.x[0]),
        grid.cells_at(1, h.x[1]),
        grid.cells_at(1, h.x_hat[1]),
    ) else {
        return false;
    };
    let in_range = |lo: u32, hi: u32, r: (u32, u32)| r.0 <= hi && lo <= r.1;
    in_range(p.i_lo, p.i_hi, cols) && in_range(p.j_lo, p.j_hi, rows) && (meas.0..=meas.1).contains(&p.m)
}

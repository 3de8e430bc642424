//! Discrete-time semantics of the two-mode converter automaton: a decision is
//! taken only when the dwell counter sits at `N1 = N_dwell + N_grace`.
//! Action 1 starts a constant on-time cycle of `N1` autonomous steps, action 2
//! applies a single off step with a fresh current measurement.

use std::fmt;
use std::io::Write;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::belief::BeliefKey;
use crate::error::{Error, Result};
use crate::plant::{DiscretePlant, Switch};

/// Controller actions, which double as automaton modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    /// Action/mode 1: one full on-then-off cycle.
    Cycle,
    /// Action/mode 2: one off step.
    Hold,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Cycle, Action::Hold];

    /// 1 or 2.
    pub fn number(self) -> u8 {
        match self {
            Action::Cycle => 1,
            Action::Hold => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Action::Cycle),
            2 => Some(Action::Hold),
            _ => None,
        }
    }

    /// Position in per-action arrays.
    pub fn index(self) -> usize {
        self.number() as usize - 1
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridState {
    pub x: Vector2<f64>,
    pub x_hat: Vector2<f64>,
    pub t_d: usize,
    pub mode: Action,
}

impl HybridState {
    /// Fully measured start in mode 2.
    pub fn initial(x: Vector2<f64>, plant: &DiscretePlant) -> Self {
        Self {
            x,
            x_hat: x,
            t_d: plant.cycle(),
            mode: Action::Hold,
        }
    }

    pub fn at_decision(&self, plant: &DiscretePlant) -> bool {
        self.t_d == plant.cycle()
    }
}

/// One step of the automaton. `a` must be given exactly at decision instants.
/// Returns the successor and the switch position used for this step.
pub fn hybrid_step(
    h: &HybridState,
    a: Option<Action>,
    d: Vector2<f64>,
    plant: &DiscretePlant,
) -> Result<(HybridState, Switch)> {
    let n1 = plant.cycle();
    let mut next = *h;
    match (h.t_d == n1, a) {
        (true, None) => return Err(Error::MissingAction),
        (false, Some(_)) => return Err(Error::ActionMidCycle { t_d: h.t_d }),
        (true, Some(Action::Hold)) => {
            next.x = plant.step(h.x, Switch::Off, d)?;
            next.x_hat[0] = next.x[0];
            next.mode = Action::Hold;
            return Ok((next, Switch::Off));
        }
        (true, Some(Action::Cycle)) => {
            next.x_hat[0] = h.x[0];
            next.t_d = 0;
            next.mode = Action::Cycle;
        }
        (false, None) => {}
    }
    let s = next.t_d + 1;
    let switch = if s <= plant.n_dwell() { Switch::On } else { Switch::Off };
    next.x = plant.step(next.x, switch, d)?;
    next.t_d = s;
    if s == plant.n_grace() {
        next.x_hat[1] = next.x[1];
    }
    Ok((next, switch))
}

/// True iff every maximal run of 1s that is followed by a 2 has a length
/// divisible by `cycle_len`. A trailing run is cut by the window and exempt.
pub fn is_admissible(actions: &[Action], cycle_len: usize) -> bool {
    let mut run = 0usize;
    for a in actions {
        match a {
            Action::Cycle => run += 1,
            Action::Hold => {
                if run > 0 && (cycle_len == 0 || !run.is_multiple_of(cycle_len)) {
                    return false;
                }
                run = 0;
            }
        }
    }
    true
}

/// One row of a trace. `x`/`x_hat`/`t_d`/`mode` describe the state at step
/// `k` before the step is applied; `switch` is the position used from `k` to
/// `k + 1` and `action` is set at decision instants.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub mode: Action,
    pub switch: Switch,
    pub action: Option<Action>,
    pub x: Vector2<f64>,
    pub x_hat: Vector2<f64>,
    pub t_d: usize,
    pub belief: Option<BeliefKey>,
}

pub const TRACE_HEADER: &str = "k,mode,switch,action,x1,x2,xhat1,xhat2,t_d,belief_I_lo,belief_I_hi,belief_J_lo,belief_J_hi,belief_m";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HybridTrace {
    pub records: Vec<TraceRecord>,
}

impl HybridTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Per-step mode sequence, i.e. the action sequence of the execution.
    pub fn actions(&self) -> Vec<Action> {
        self.records.iter().map(|r| r.mode).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = Vector2<f64>> + '_ {
        self.records.iter().map(|r| r.x)
    }

    /// Writes the CSV body followed by `# key=value` footer lines.
    pub fn write_csv<W: Write>(&self, mut w: W, footer: &[(&str, String)]) -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for r in &self.records {
            let action = r.action.map_or("-".to_string(), |a| a.to_string());
            write!(
                w,
                "{},{},{},{},{},{},{},{},{},",
                r.k,
                r.mode,
                r.switch.as_str(),
                action,
                r.x[0],
                r.x[1],
                r.x_hat[0],
                r.x_hat[1],
                r.t_d
            )?;
            match r.belief {
                Some(b) => writeln!(w, "{},{},{},{},{}", b.i_lo, b.i_hi, b.j_lo, b.j_hi, b.m)?,
                None => writeln!(w, ",,,,")?,
            }
        }
        for (key, value) in footer {
            writeln!(w, "# {key}={value}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, footer: &[(&str, String)]) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, footer).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Runs the automaton open loop. `policy` is queried at decision instants and
/// `disturbance` once per step.
pub fn simulate<P, D>(
    start: HybridState,
    horizon: usize,
    plant: &DiscretePlant,
    mut policy: P,
    mut disturbance: D,
) -> Result<HybridTrace>
where
    P: FnMut(&HybridState) -> Action,
    D: FnMut() -> Vector2<f64>,
{
    let mut h = start;
    let mut trace = HybridTrace::default();
    for k in 0..horizon {
        let a = h.at_decision(plant).then(|| policy(&h));
        let (next, switch) = hybrid_step(&h, a, disturbance(), plant)?;
        trace.records.push(TraceRecord {
            k,
            mode: next.mode,
            switch,
            action: a,
            x: h.x,
            x_hat: h.x_hat,
            t_d: h.t_d,
            belief: None,
        });
        h = next;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{discretize, CircuitParams, DwellTiming};
    use crate::zonogeom::DisturbanceBall;

    fn buck() -> DiscretePlant {
        discretize(&CircuitParams::default(), DwellTiming::default(), DisturbanceBall::zero()).unwrap()
    }

    #[test]
    fn hold_at_origin_is_fixed() {
        let p = buck();
        let h = HybridState::initial(Vector2::zeros(), &p);
        let (n, s) = hybrid_step(&h, Some(Action::Hold), Vector2::zeros(), &p).unwrap();
        assert_eq!(s, Switch::Off);
        assert_eq!(n.x, Vector2::zeros());
        assert_eq!(n.x_hat[0], 0.0);
        assert_eq!(n.t_d, 52);
    }

    #[test]
    fn cycle_matches_composed_steps() {
        let p = buck();
        let x0 = Vector2::new(3.0, 7.0);
        let mut h = HybridState::initial(x0, &p);
        let mut a = Some(Action::Cycle);
        let mut log = Vec::new();
        for _ in 0..52 {
            let (n, _) = hybrid_step(&h, a.take(), Vector2::zeros(), &p).unwrap();
            log.push(n.x);
            h = n;
        }
        let mut x = x0;
        for s in 1..=52 {
            x = p.step_nominal(x, if s <= 48 { Switch::On } else { Switch::Off });
        }
        assert_eq!(h.x, x);
        assert_eq!(h.x_hat[1], log[3][1]);
        assert_eq!(h.x_hat[0], x0[0]);
        assert!(h.at_decision(&p));
        assert_eq!(h.mode, Action::Cycle);
    }

    #[test]
    fn action_contract() {
        let p = buck();
        let h = HybridState::initial(Vector2::zeros(), &p);
        assert!(matches!(hybrid_step(&h, None, Vector2::zeros(), &p), Err(Error::MissingAction)));
        let (mid, _) = hybrid_step(&h, Some(Action::Cycle), Vector2::zeros(), &p).unwrap();
        assert!(matches!(
            hybrid_step(&mid, Some(Action::Hold), Vector2::zeros(), &p),
            Err(Error::ActionMidCycle { t_d: 1 })
        ));
    }

    #[test]
    fn admissibility() {
        use Action::{Cycle as C, Hold as H};
        let seq = |n: usize| {
            let mut v = vec![H];
            v.extend(std::iter::repeat_n(C, n));
            v.push(H);
            v
        };
        assert!(is_admissible(&[H; 5], 52));
        assert!(is_admissible(&seq(52), 52));
        assert!(!is_admissible(&seq(51), 52));
        assert!(is_admissible(&seq(104), 52));
        assert!(is_admissible(&[H, C, C], 52));
    }

    #[test]
    fn csv_layout() {
        let p = buck();
        let trace = simulate(
            HybridState::initial(Vector2::zeros(), &p),
            3,
            &p,
            |_| Action::Hold,
            Vector2::zeros,
        )
        .unwrap();
        let csv = trace.to_csv_string(&[("verdict", "undetermined".into())]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines[1], "0,2,off,2,0,0,0,0,52,,,,,");
        assert_eq!(lines[4], "# verdict=undetermined");
        assert!(!csv.contains('\r'));
    }
}

//! Online controller: tracks the belief state between decision instants and
//! picks actions from the synthesized table.

use thiserror::Error;

use crate::belief::{BeliefAbstraction, BeliefKey, BeliefState, Observation, OUT_ID};
use crate::game::{ControllerTable, LOSING_RANK};
use crate::hybrid::Action;
use crate::raw::Grid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("initial state ({0}, {1}) is outside the domain")]
    OutsideDomain(f64, f64),
    #[error("initial state ({x1}, {x2}) has no winning belief")]
    NotWinning { x1: f64, x2: f64 },
    #[error("observation {observation:?} matches no predicted successor of {from:?} under action {action}")]
    ModelViolation {
        from: BeliefKey,
        action: Action,
        observation: Vec<Observation>,
    },
    #[error("observe called without a pending action")]
    NoPendingAction,
    #[error("belief {0} has no allowed action")]
    NoAllowedAction(u32),
}

#[derive(Debug, Clone)]
pub struct Runtime<'a> {
    belief: &'a BeliefAbstraction,
    table: Option<&'a ControllerTable>,
    current: u32,
    pending: Option<Action>,
    history: Vec<Action>,
}

impl<'a> Runtime<'a> {
    /// Starts from a fully measured point.
    pub fn init(
        belief: &'a BeliefAbstraction,
        table: &'a ControllerTable,
        grid: &Grid,
        x_init: [f64; 2],
    ) -> Result<Self, RuntimeError> {
        let id = start_belief(belief, grid, x_init, |id| table.winning[id as usize])?;
        Ok(Self {
            belief,
            table: Some(table),
            current: id,
            pending: None,
            history: Vec::new(),
        })
    }

    /// Belief tracking without a controller; actions come from [`commit`].
    ///
    /// [`commit`]: Runtime::commit
    pub fn track(belief: &'a BeliefAbstraction, grid: &Grid, x_init: [f64; 2]) -> Result<Self, RuntimeError> {
        let id = start_belief(belief, grid, x_init, |_| true)?;
        Ok(Self {
            belief,
            table: None,
            current: id,
            pending: None,
            history: Vec::new(),
        })
    }

    pub fn current(&self) -> u32 {
        self.current
    }

    pub fn current_state(&self) -> &BeliefState {
        self.belief.state(self.current)
    }

    /// Panics once the tracked belief is `Out`.
    pub fn current_key(&self) -> BeliefKey {
        *self.current_state().key().expect("tracked belief is Out")
    }

    pub fn history(&self) -> &[Action] {
        &self.history
    }

    /// Records an externally chosen action as pending.
    pub fn commit(&mut self, a: Action) {
        self.pending = Some(a);
        self.history.push(a);
    }

    /// Chooses the next action and records it as pending.
    ///
    /// Panics when the runtime was created by [`Runtime::track`].
    pub fn decide(&mut self) -> Result<Action, RuntimeError> {
        let table = self.table.expect("decide needs a controller table");
        let allowed = table.allowed[self.current as usize];
        if allowed.is_empty() {
            return Err(RuntimeError::NoAllowedAction(self.current));
        }
        let choice = if allowed.len() == 1 {
            allowed.iter().next().unwrap()
        } else {
            match pattern_preference(&self.history) {
                Some(a) if allowed.contains(a) => a,
                _ => self.min_rank_action(allowed.iter()),
            }
        };
        self.commit(choice);
        Ok(choice)
    }

    fn min_rank_action(&self, actions: impl Iterator<Item = Action>) -> Action {
        let table = self.table.expect("controller table");
        let worst = |a: Action| {
            self.belief
                .successors(self.current, a)
                .iter()
                .map(|&s| table.rank[s as usize])
                .max()
                .unwrap_or(LOSING_RANK)
        };
        // Cycle comes first, so ties keep it
        actions.min_by_key(|&a| worst(a)).expect("nonempty action set")
    }

    /// Resolves the successor whose observable equals one of `candidates`
    /// (several when the measurement sits on a grid line). With no match,
    /// a predicted `Out` absorbs the run, since exits collapse every other
    /// successor into it.
    pub fn observe(&mut self, candidates: &[Observation]) -> Result<u32, RuntimeError> {
        let a = self.pending.take().ok_or(RuntimeError::NoPendingAction)?;
        if self.current == OUT_ID {
            return Ok(OUT_ID);
        }
        let hit = self
            .belief
            .successors(self.current, a)
            .iter()
            .copied()
            .find(|&s| match self.belief.state(s) {
                BeliefState::In(k) => candidates.contains(&k.observable(a)),
                BeliefState::Out => false,
            });
        match hit {
            Some(s) => {
                self.current = s;
                Ok(s)
            }
            None if self.belief.successors(self.current, a).contains(&OUT_ID) => {
                self.current = OUT_ID;
                Ok(OUT_ID)
            }
            None => Err(RuntimeError::ModelViolation {
                from: self.current_key(),
                action: a,
                observation: candidates.to_vec(),
            }),
        }
    }

    /// Observes the measurement vector at a decision instant.
    pub fn observe_measurement(&mut self, grid: &Grid, x_hat: [f64; 2]) -> Result<u32, RuntimeError> {
        let a = self.pending.ok_or(RuntimeError::NoPendingAction)?;
        let candidates: Vec<Observation> = match a {
            Action::Hold => grid
                .cells_at(0, x_hat[0])
                .map(|(lo, hi)| (lo..=hi).map(Observation::Column).collect())
                .unwrap_or_default(),
            Action::Cycle => grid
                .cells_at(1, x_hat[1])
                .map(|(lo, hi)| (lo..=hi).map(Observation::Row).collect())
                .unwrap_or_default(),
        };
        self.observe(&candidates)
    }
}

fn start_belief(
    belief: &BeliefAbstraction,
    grid: &Grid,
    x_init: [f64; 2],
    accept: impl Fn(u32) -> bool,
) -> Result<u32, RuntimeError> {
    let (Some(cols), Some(rows)) = (grid.cells_at(0, x_init[0]), grid.cells_at(1, x_init[1])) else {
        return Err(RuntimeError::OutsideDomain(x_init[0], x_init[1]));
    };
    for i in cols.0..=cols.1 {
        for j in rows.0..=rows.1 {
            let p = BeliefState::In(BeliefKey::singleton((i, j), j));
            if let Some(id) = belief.id_of(&p).filter(|&id| accept(id)) {
                return Ok(id);
            }
        }
    }
    Err(RuntimeError::NotWinning {
        x1: x_init[0],
        x2: x_init[1],
    })
}

/// Keeps the last on/off pattern: with `g` holds between the last two
/// cycles and `c` holds since the last one, prefer a cycle once `c ≥ g`.
pub fn pattern_preference(history: &[Action]) -> Option<Action> {
    let mut cycles = history.iter().enumerate().rev().filter(|(_, a)| **a == Action::Cycle).map(|(i, _)| i);
    let last = cycles.next()?;
    let prev = cycles.next()?;
    let gap = last - prev - 1;
    let since = history.len() - last - 1;
    Some(if since >= gap { Action::Cycle } else { Action::Hold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Action::{Cycle as C, Hold as H};

    #[test]
    fn pattern_examples() {
        assert_eq!(pattern_preference(&[]), None);
        assert_eq!(pattern_preference(&[C, H]), None);
        assert_eq!(pattern_preference(&[C, H, H, H, C, H, H, H]), Some(C));
        assert_eq!(pattern_preference(&[C, H, H, H, C, H]), Some(H));
        assert_eq!(pattern_preference(&[C, C]), Some(C));
    }
}

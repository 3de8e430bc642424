//! Belief abstraction: sets of raw states that the controller cannot tell
//! apart, over-approximated by an index rectangle of x-cells paired with the
//! measured-voltage row.

pub mod stages;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::Action;
use crate::ltl::Label;
use crate::raw::{Cell, RawAbstraction, RawState};

/// Inclusive x-cell index rectangle `I × J` and measured row `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeliefKey {
    pub i_lo: u32,
    pub i_hi: u32,
    pub j_lo: u32,
    pub j_hi: u32,
    pub m: u32,
}

impl BeliefKey {
    pub fn singleton(cell: Cell, m: u32) -> Self {
        Self {
            i_lo: cell.0,
            i_hi: cell.0,
            j_lo: cell.1,
            j_hi: cell.1,
            m,
        }
    }

    pub fn contains_cell(&self, c: Cell) -> bool {
        (self.i_lo..=self.i_hi).contains(&c.0) && (self.j_lo..=self.j_hi).contains(&c.1)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.i_lo..=self.i_hi).flat_map(move |i| (self.j_lo..=self.j_hi).map(move |j| (i, j)))
    }

    pub fn num_cells(&self) -> usize {
        (self.i_hi - self.i_lo + 1) as usize * (self.j_hi - self.j_lo + 1) as usize
    }

    /// Smallest rectangle covering both.
    pub fn join_cells(&mut self, c: Cell) {
        self.i_lo = self.i_lo.min(c.0);
        self.i_hi = self.i_hi.max(c.0);
        self.j_lo = self.j_lo.min(c.1);
        self.j_hi = self.j_hi.max(c.1);
    }

    /// The measurement that identifies this state among the successors of an
    /// `a` step.
    pub fn observable(&self, a: Action) -> Observation {
        match a {
            Action::Hold => Observation::Column(self.i_lo),
            Action::Cycle => Observation::Row(self.m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BeliefState {
    Out,
    In(BeliefKey),
}

impl BeliefState {
    pub fn key(&self) -> Option<&BeliefKey> {
        match self {
            BeliefState::Out => None,
            BeliefState::In(k) => Some(k),
        }
    }
}

/// Fresh measurement available at the next decision instant: the current
/// column after action 2, the voltage row after action 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observation {
    Column(u32),
    Row(u32),
}

/// How raw states are grouped into belief states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Current column and measured row both known (start, after action 2).
    ColumnAndRow,
    /// Only the measured row is fresh (after action 1).
    Row,
}

/// Groups raw states by their observable and replaces each group's cells by
/// their index rectangle. `Out` maps to `Out`.
pub fn beta(states: &[RawState], grouping: Grouping) -> Vec<BeliefState> {
    let mut groups: BTreeMap<(u32, u32), BeliefKey> = BTreeMap::new();
    let mut out = false;
    for q in states {
        match *q {
            RawState::Out => out = true,
            RawState::In { cell, meas } => {
                let g = match grouping {
                    Grouping::ColumnAndRow => (cell.0, meas),
                    Grouping::Row => (0, meas),
                };
                groups
                    .entry(g)
                    .and_modify(|k| k.join_cells(cell))
                    .or_insert_with(|| BeliefKey::singleton(cell, meas));
            }
        }
    }
    let mut result: Vec<BeliefState> = out.then_some(BeliefState::Out).into_iter().collect();
    result.extend(groups.into_values().map(BeliefState::In));
    result.sort_unstable();
    result
}

/// `σ(p, a)`. Any exit among the raw successors collapses the result to
/// `{Out}`.
pub fn successors_belief(raw: &RawAbstraction, p: &BeliefState, a: Action) -> Vec<BeliefState> {
    let BeliefState::In(key) = p else {
        return vec![BeliefState::Out];
    };
    let mut acc: BTreeMap<u32, BeliefKey> = BTreeMap::new();
    for cell in key.cells() {
        let s = raw.summary(cell, a);
        if s.exits {
            return vec![BeliefState::Out];
        }
        match a {
            Action::Hold => {
                for &c in &s.hits {
                    acc.entry(c.0)
                        .and_modify(|k| k.join_cells(c))
                        .or_insert_with(|| BeliefKey::singleton(c, key.m));
                }
            }
            Action::Cycle => {
                let (Some((lo, hi)), Some(h)) = (s.mid_rows, s.hit_hull()) else {
                    return vec![BeliefState::Out];
                };
                for m in lo..=hi {
                    let k = acc.entry(m).or_insert(BeliefKey {
                        i_lo: h.0,
                        i_hi: h.1,
                        j_lo: h.2,
                        j_hi: h.3,
                        m,
                    });
                    k.join_cells((h.0, h.2));
                    k.join_cells((h.1, h.3));
                }
            }
        }
    }
    if acc.is_empty() {
        return vec![BeliefState::Out];
    }
    acc.into_values().map(BeliefState::In).collect()
}

/// Labels of a belief state: `target` only if every member cell is a target
/// cell, `touches` if some member cell's interior meets the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefLabel {
    pub label: Label,
    pub touches_target: bool,
}

pub fn belief_label(raw: &RawAbstraction, p: &BeliefState) -> BeliefLabel {
    match p {
        BeliefState::Out => BeliefLabel {
            label: Label::EMPTY,
            touches_target: false,
        },
        BeliefState::In(k) => {
            let b = raw.grid().range_box(k.i_lo, k.i_hi, k.j_lo, k.j_hi);
            let target = raw.target().contains(&b);
            let touches = target || k.cells().any(|c| raw.touches_target_cell(c));
            BeliefLabel {
                label: Label::new(true, target),
                touches_target: touches,
            }
        }
    }
}

/// The explored belief transition system. State 0 is always `Out`.
#[derive(Debug, Clone)]
pub struct BeliefAbstraction {
    states: Vec<BeliefState>,
    index: HashMap<BeliefState, u32>,
    succ: Vec<[Vec<u32>; 2]>,
    labels: Vec<BeliefLabel>,
    initial: Vec<u32>,
}

pub const OUT_ID: u32 = 0;

impl BeliefAbstraction {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BeliefState] {
        &self.states
    }

    pub fn state(&self, id: u32) -> &BeliefState {
        &self.states[id as usize]
    }

    pub fn id_of(&self, p: &BeliefState) -> Option<u32> {
        self.index.get(p).copied()
    }

    pub fn successors(&self, id: u32, a: Action) -> &[u32] {
        &self.succ[id as usize][a.index()]
    }

    pub fn transitions(&self) -> &[[Vec<u32>; 2]] {
        &self.succ
    }

    pub fn label(&self, id: u32) -> BeliefLabel {
        self.labels[id as usize]
    }

    pub fn labels(&self) -> &[BeliefLabel] {
        &self.labels
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    /// Reassembles an abstraction from its parts, e.g. after loading.
    pub fn from_parts(
        states: Vec<BeliefState>,
        succ: Vec<[Vec<u32>; 2]>,
        labels: Vec<BeliefLabel>,
        initial: Vec<u32>,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 || states[0] != BeliefState::Out || succ.len() != n || labels.len() != n {
            return Err(Error::Config("inconsistent belief abstraction".into()));
        }
        let bad = |v: &u32| *v as usize >= n;
        if initial.iter().any(bad) || succ.iter().flatten().flatten().any(bad) {
            return Err(Error::Config("belief transition index out of range".into()));
        }
        if succ.iter().flatten().any(|s| s.is_empty()) {
            return Err(Error::Config("belief transition with no successor".into()));
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
        Ok(Self {
            states,
            index,
            succ,
            labels,
            initial,
        })
    }
}

/// Breadth-first closure of `β(init)` under both actions. Frontier states
/// are expanded in parallel; ids are assigned in frontier order so the result
/// does not depend on scheduling.
pub fn construct_belief(raw: &RawAbstraction, init: &[RawState], max_states: Option<usize>) -> Result<BeliefAbstraction> {
    if init.is_empty() {
        return Err(Error::InitOutsideDomain);
    }
    let mut states = vec![BeliefState::Out];
    let mut index: HashMap<BeliefState, u32> = HashMap::from([(BeliefState::Out, OUT_ID)]);
    let mut succ: Vec<[Vec<u32>; 2]> = vec![[vec![OUT_ID], vec![OUT_ID]]];
    let mut initial = Vec::new();
    let mut frontier = Vec::new();

    let mut intern = |p: BeliefState, states: &mut Vec<BeliefState>, frontier: &mut Vec<u32>| -> Result<u32> {
        if let Some(&id) = index.get(&p) {
            return Ok(id);
        }
        let id = states.len() as u32;
        if max_states.is_some_and(|cap| states.len() >= cap) {
            return Err(Error::StateLimit(max_states.unwrap()));
        }
        index.insert(p, id);
        states.push(p);
        frontier.push(id);
        Ok(id)
    };

    for p in beta(init, Grouping::ColumnAndRow) {
        let id = intern(p, &mut states, &mut frontier)?;
        initial.push(id);
    }
    initial.sort_unstable();
    initial.dedup();

    while !frontier.is_empty() {
        let expanded: Vec<[Vec<BeliefState>; 2]> = frontier
            .par_iter()
            .map(|&id| {
                let p = states[id as usize];
                [
                    successors_belief(raw, &p, Action::Cycle),
                    successors_belief(raw, &p, Action::Hold),
                ]
            })
            .collect();
        let current = std::mem::take(&mut frontier);
        for (id, [s1, s2]) in current.into_iter().zip(expanded) {
            let mut ids = [Vec::with_capacity(s1.len()), Vec::with_capacity(s2.len())];
            for (slot, list) in ids.iter_mut().zip([s1, s2]) {
                for p in list {
                    slot.push(intern(p, &mut states, &mut frontier)?);
                }
            }
            if succ.len() <= id as usize {
                succ.resize(id as usize + 1, [Vec::new(), Vec::new()]);
            }
            succ[id as usize] = ids;
        }
    }
    succ.resize(states.len(), [Vec::new(), Vec::new()]);
    let labels = states.par_iter().map(|p| belief_label(raw, p)).collect();
    let index = states.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
    Ok(BeliefAbstraction {
        states,
        index,
        succ,
        labels,
        initial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_basics() {
        assert!(beta(&[], Grouping::Row).is_empty());
        assert_eq!(beta(&[RawState::Out], Grouping::Row), vec![BeliefState::Out]);
        let q = RawState::new((2, 3), 1);
        assert_eq!(
            beta(&[q], Grouping::Row),
            vec![BeliefState::In(BeliefKey::singleton((2, 3), 1))]
        );
        let hull = beta(&[RawState::new((1, 1), 0), RawState::new((3, 3), 0)], Grouping::Row);
        let BeliefState::In(k) = hull[0] else { panic!() };
        assert_eq!((k.i_lo, k.i_hi, k.j_lo, k.j_hi), (1, 3, 1, 3));
        assert_eq!(k.num_cells(), 9);
    }

    #[test]
    fn grouping_by_column() {
        let s = [RawState::new((1, 1), 0), RawState::new((2, 1), 0), RawState::new((1, 2), 0)];
        let g = beta(&s, Grouping::ColumnAndRow);
        assert_eq!(g.len(), 2);
        let g = beta(&s, Grouping::Row);
        assert_eq!(g.len(), 1);
    }
}

//! Reach-avoid-stay games on finite nondeterministic transition systems with
//! two actions.
//!
//! The stay core is the largest set of target states that some action keeps
//! inside itself. The reach phase is the attractor of the core through
//! transient states, with ranks counting guaranteed steps to the core.

use serde::{Deserialize, Serialize};

use crate::belief::{BeliefAbstraction, BeliefKey, BeliefState};
use crate::hybrid::Action;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    /// `succ[s][a]`, nonempty for every pair.
    pub succ: Vec<[Vec<u32>; 2]>,
    pub safe: Vec<bool>,
    pub target: Vec<bool>,
    /// States that may contain a target point; never larger than needed for
    /// `target` (every target state touches).
    pub touches: Vec<bool>,
}

impl GameGraph {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn from_belief(belief: &BeliefAbstraction) -> Self {
        let labels = belief.labels();
        Self {
            succ: belief.transitions().to_vec(),
            safe: labels.iter().map(|l| l.label.safe()).collect(),
            target: labels.iter().map(|l| l.label.target()).collect(),
            touches: labels.iter().map(|l| l.touches_target || l.label.target()).collect(),
        }
    }

    fn all_in(&self, s: usize, a: usize, w: &[bool]) -> bool {
        self.succ[s][a].iter().all(|&t| w[t as usize])
    }
}

/// `{s : ∃a. succ(s, a) ⊆ W}`.
pub fn controllable_pre(g: &GameGraph, w: &[bool]) -> Vec<bool> {
    (0..g.len()).map(|s| (0..2).any(|a| g.all_in(s, a, w))).collect()
}

/// Greatest fixpoint `W = target ∩ CPre(W)`, restricted to safe states.
pub fn solve_stay(g: &GameGraph) -> Vec<bool> {
    let mut w: Vec<bool> = g.target.iter().zip(&g.safe).map(|(t, s)| *t && *s).collect();
    loop {
        let pre = controllable_pre(g, &w);
        let next: Vec<bool> = w.iter().zip(&pre).map(|(a, b)| *a && *b).collect();
        if next == w {
            return w;
        }
        w = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Stay,
    Reach,
    Losing,
}

/// Allowed actions as a two-bit mask indexed by [`Action::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActionSet(u8);

impl ActionSet {
    pub fn insert(&mut self, a: Action) {
        self.0 |= 1 << a.index();
    }

    pub fn contains(self, a: Action) -> bool {
        self.0 & (1 << a.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Action> {
        Action::ALL.into_iter().filter(move |a| self.contains(*a))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
}

pub const LOSING_RANK: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerTable {
    pub winning: Vec<bool>,
    pub allowed: Vec<ActionSet>,
    pub rank: Vec<u32>,
    pub phase: Vec<Phase>,
}

impl ControllerTable {
    pub fn len(&self) -> usize {
        self.winning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.winning.is_empty()
    }

    pub fn num_winning(&self) -> usize {
        self.winning.iter().filter(|w| **w).count()
    }
}

/// Attractor of `core` through transient states. With `strict_transient`
/// a transient state must not touch the target at all; otherwise it only
/// must not be target-labelled.
pub fn solve_reach(g: &GameGraph, core: &[bool], strict_transient: bool) -> ControllerTable {
    let n = g.len();
    let transient: Vec<bool> = (0..n)
        .map(|s| g.safe[s] && !g.target[s] && !(strict_transient && g.touches[s]))
        .collect();
    let mut rank = vec![LOSING_RANK; n];
    let mut win = core.to_vec();
    for s in 0..n {
        if win[s] {
            rank[s] = 0;
        }
    }
    let mut k = 0;
    loop {
        k += 1;
        let added: Vec<usize> = (0..n)
            .filter(|&s| !win[s] && transient[s] && (0..2).any(|a| g.all_in(s, a, &win)))
            .collect();
        if added.is_empty() {
            break;
        }
        for s in added {
            win[s] = true;
            rank[s] = k;
        }
    }
    let mut allowed = vec![ActionSet::default(); n];
    let mut phase = vec![Phase::Losing; n];
    for s in 0..n {
        if !win[s] {
            continue;
        }
        for a in Action::ALL {
            let ok = g.succ[s][a.index()].iter().all(|&t| {
                let t = t as usize;
                if rank[s] == 0 {
                    rank[t] == 0
                } else {
                    win[t] && rank[t] < rank[s]
                }
            });
            if ok {
                allowed[s].insert(a);
            }
        }
        phase[s] = if rank[s] == 0 { Phase::Stay } else { Phase::Reach };
    }
    ControllerTable {
        winning: win,
        allowed,
        rank,
        phase,
    }
}

/// Result of synthesis on a belief abstraction.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub table: ControllerTable,
    pub core_size: usize,
    /// Initial belief states outside the winning set.
    pub uncovered: Vec<BeliefKey>,
}

impl Synthesis {
    pub fn success(&self) -> bool {
        self.uncovered.is_empty()
    }
}

pub fn synthesize(belief: &BeliefAbstraction, strict_transient: bool) -> Synthesis {
    let g = GameGraph::from_belief(belief);
    let core = solve_stay(&g);
    let table = solve_reach(&g, &core, strict_transient);
    let uncovered = belief
        .initial()
        .iter()
        .filter(|&&id| !table.winning[id as usize])
        .filter_map(|&id| match belief.state(id) {
            BeliefState::In(k) => Some(*k),
            BeliefState::Out => None,
        })
        .collect();
    Synthesis {
        core_size: core.iter().filter(|c| **c).count(),
        table,
        uncovered,
    }
}

/// Checks the table against the graph: winning states have an allowed
/// action, allowed actions stay winning, ranks drop strictly outside the
/// core and stay zero inside it. Returns the offending states.
pub fn audit(g: &GameGraph, t: &ControllerTable) -> Vec<u32> {
    let mut bad = Vec::new();
    for s in 0..g.len() {
        if !t.winning[s] {
            continue;
        }
        let mut ok = g.safe[s] && !t.allowed[s].is_empty();
        if t.rank[s] == 0 {
            ok &= g.target[s];
        }
        for a in t.allowed[s].iter() {
            for &u in &g.succ[s][a.index()] {
                let u = u as usize;
                ok &= t.winning[u];
                ok &= if t.rank[s] == 0 { t.rank[u] == 0 } else { t.rank[u] < t.rank[s] };
            }
        }
        if !ok {
            bad.push(s as u32);
        }
    }
    bad
}

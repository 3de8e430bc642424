//! Belief-space size under progressively stronger reductions, explored with
//! explicit cell sets. Used for reporting only; synthesis runs on the fully
//! reduced abstraction of the parent module.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::Serialize;

use crate::hybrid::Action;
use crate::raw::{Cell, RawAbstraction, RawState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageOptions {
    /// Keep the measured current as a separate, independently reachable
    /// component.
    pub keep_xhat1: bool,
    /// Replace every cell set by its index rectangle.
    pub rectangular: bool,
    /// Collapse any successor set containing `Out` to `{Out}`.
    pub collapse_out: bool,
}

impl StageOptions {
    pub const NONE: StageOptions = StageOptions {
        keep_xhat1: true,
        rectangular: false,
        collapse_out: false,
    };
    pub const COLLAPSE_OUT: StageOptions = StageOptions {
        keep_xhat1: true,
        rectangular: false,
        collapse_out: true,
    };
    pub const DROP_XHAT1: StageOptions = StageOptions {
        keep_xhat1: false,
        rectangular: false,
        collapse_out: true,
    };
    pub const RECTANGULAR: StageOptions = StageOptions {
        keep_xhat1: false,
        rectangular: true,
        collapse_out: true,
    };
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct StageCount {
    pub name: &'static str,
    pub options: StageOptions,
    /// Explored states including `Out`; a lower bound when `capped`.
    pub states: usize,
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum SetBelief {
    Out,
    In {
        cells: Vec<Cell>,
        xhat1: Option<u32>,
        m: u32,
    },
}

fn finish(cells: Vec<Cell>, rectangular: bool) -> Vec<Cell> {
    if !rectangular {
        return cells;
    }
    let (mut a, mut b, mut c, mut d) = (u32::MAX, 0, u32::MAX, 0);
    for &(i, j) in &cells {
        a = a.min(i);
        b = b.max(i);
        c = c.min(j);
        d = d.max(j);
    }
    (a..=b).flat_map(|i| (c..=d).map(move |j| (i, j))).collect()
}

fn successors(raw: &RawAbstraction, p: &SetBelief, a: Action, opt: StageOptions) -> Vec<SetBelief> {
    let SetBelief::In { cells, xhat1, m } = p else {
        return vec![SetBelief::Out];
    };
    let mut groups: BTreeMap<(Option<u32>, u32), Vec<Cell>> = BTreeMap::new();
    let mut out = false;
    for &c in cells {
        let s = raw.summary(c, a);
        out |= s.exits;
        match a {
            Action::Hold => {
                if opt.keep_xhat1 {
                    let Some(h) = s.hit_hull() else { continue };
                    for col in h.0..=h.1 {
                        groups.entry((Some(col), *m)).or_default().extend(&s.hits);
                    }
                } else {
                    for &h in &s.hits {
                        groups.entry((Some(h.0), *m)).or_default().push(h);
                    }
                }
            }
            Action::Cycle => {
                let Some((lo, hi)) = s.mid_rows else { continue };
                for row in lo..=hi {
                    groups.entry((*xhat1, row)).or_default().extend(&s.hits);
                }
            }
        }
    }
    if out && opt.collapse_out {
        return vec![SetBelief::Out];
    }
    let mut result: Vec<SetBelief> = out.then_some(SetBelief::Out).into_iter().collect();
    for ((col, row), mut cs) in groups {
        cs.sort_unstable();
        cs.dedup();
        result.push(SetBelief::In {
            cells: finish(cs, opt.rectangular),
            xhat1: if opt.keep_xhat1 { col.or(*xhat1) } else { None },
            m: row,
        });
    }
    if result.is_empty() {
        result.push(SetBelief::Out);
    }
    result
}

/// Explores the belief space from `init` under `opt`, stopping after `cap`
/// states.
pub fn count_stage(raw: &RawAbstraction, init: &[RawState], opt: StageOptions, cap: usize) -> (usize, bool) {
    let mut seen: HashSet<SetBelief> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut groups: BTreeMap<(u32, u32), Vec<Cell>> = BTreeMap::new();
    for q in init {
        match *q {
            RawState::Out => {
                seen.insert(SetBelief::Out);
            }
            RawState::In { cell, meas } => groups.entry((cell.0, meas)).or_default().push(cell),
        }
    }
    for ((col, m), cells) in groups {
        let p = SetBelief::In {
            cells: finish(cells, opt.rectangular),
            xhat1: opt.keep_xhat1.then_some(col),
            m,
        };
        if seen.insert(p.clone()) {
            queue.push_back(p);
        }
    }
    seen.insert(SetBelief::Out);
    while let Some(p) = queue.pop_front() {
        for a in Action::ALL {
            for s in successors(raw, &p, a, opt) {
                if seen.len() >= cap {
                    return (seen.len(), true);
                }
                if seen.insert(s.clone()) {
                    queue.push_back(s);
                }
            }
        }
    }
    (seen.len(), false)
}

/// Counts for: no reduction, exits collapsed, measured current dropped, and
/// rectangular sets.
pub fn reduction_stages(raw: &RawAbstraction, init: &[RawState], cap: usize) -> Vec<StageCount> {
    [
        ("unreduced", StageOptions::NONE),
        ("collapse-out", StageOptions::COLLAPSE_OUT),
        ("drop-xhat1", StageOptions::DROP_XHAT1),
        ("rectangular", StageOptions::RECTANGULAR),
    ]
    .into_iter()
    .map(|(name, options)| {
        let (states, capped) = count_stage(raw, init, options, cap);
        StageCount {
            name,
            options,
            states,
            capped,
        }
    })
    .collect()
}

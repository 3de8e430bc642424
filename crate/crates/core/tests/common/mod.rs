//! Independent oracles shared by the integration suites. Nothing here calls
//! the production code path it is compared against.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use beliefsynth::belief::{BeliefKey, BeliefState};
use beliefsynth::hybrid::Action;
use beliefsynth::raw::{RawAbstraction, RawState};
use rand::Rng;

pub type M3 = [[f64; 3]; 3];

fn mul3(a: &M3, b: &M3) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// exp(m) from 50 Taylor terms on `m / 2^s` (infinity norm below 1/8),
/// squared back `s` times.
pub fn expm_taylor50(m: &M3) -> M3 {
    let norm = m.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.125 {
        s += 1;
    }
    let scale = 2f64.powi(s);
    let a: M3 = m.map(|r| r.map(|v| v / scale));
    let mut term = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut sum = term;
    for n in 1..=50 {
        term = mul3(&term, &a).map(|r| r.map(|v| v / n as f64));
        for i in 0..3 {
            for j in 0..3 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        sum = mul3(&sum, &sum);
    }
    sum
}

/// Discrete on/off matrices of the buck converter from its circuit values,
/// written out from the inductor and capacitor equations:
/// `L dI/dt = u·V_in − V`, `C dV/dt = I − V/R`.
pub struct OracleDiscretization {
    pub a_on: [[f64; 2]; 2],
    pub k_on: [f64; 2],
    pub a_off: [[f64; 2]; 2],
    pub k_off: [f64; 2],
}

pub fn buck_oracle(c: f64, l: f64, r: f64, v: f64, t: f64) -> OracleDiscretization {
    let mode = |u: f64| {
        let m: M3 = [
            [0.0, -t / l, u * v * t / l],
            [t / c, -t / (r * c), 0.0],
            [0.0, 0.0, 0.0],
        ];
        let e = expm_taylor50(&m);
        ([[e[0][0], e[0][1]], [e[1][0], e[1][1]]], [e[0][2], e[1][2]])
    };
    let (a_on, k_on) = mode(1.0);
    let (a_off, k_off) = mode(0.0);
    OracleDiscretization { a_on, k_on, a_off, k_off }
}

pub fn rel_err(x: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        x.abs()
    } else {
        ((x - reference) / reference).abs()
    }
}

/// A disturbance in the 1-norm ball; a quarter of the draws are ball
/// vertices so the extreme directions get exercised.
pub fn draw_disturbance<R: Rng>(rng: &mut R, r: f64) -> [f64; 2] {
    if r == 0.0 {
        return [0.0, 0.0];
    }
    if rng.random_bool(0.25) {
        return match rng.random_range(0..4) {
            0 => [r, 0.0],
            1 => [-r, 0.0],
            2 => [0.0, r],
            _ => [0.0, -r],
        };
    }
    loop {
        let d = [rng.random_range(-r..=r), rng.random_range(-r..=r)];
        if d[0].abs() + d[1].abs() <= r {
            return d;
        }
    }
}

/// A point of the box; a tenth of the draws are corners.
pub fn draw_point<R: Rng>(rng: &mut R, x1: (f64, f64), x2: (f64, f64)) -> [f64; 2] {
    if rng.random_bool(0.1) {
        let a = if rng.random_bool(0.5) { x1.0 } else { x1.1 };
        let b = if rng.random_bool(0.5) { x2.0 } else { x2.1 };
        return [a, b];
    }
    [rng.random_range(x1.0..=x1.1), rng.random_range(x2.0..=x2.1)]
}

pub fn affine(a: &[[f64; 2]; 2], k: &[f64; 2], x: [f64; 2], d: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1] + k[0] + d[0],
        a[1][0] * x[0] + a[1][1] * x[1] + k[1] + d[1],
    ]
}

/// Belief abstraction rebuilt by plain subset construction over raw states.
/// A belief is the raw-state set `cells(rect) × {m}`; its successors are the
/// union of the raw successors, grouped by what the next decision observes
/// (the column after a hold, the measured row after a cycle) and replaced by
/// the index rectangle of each group. A set containing `Out` becomes `{Out}`.
pub struct OracleBelief {
    pub states: BTreeSet<BeliefState>,
    pub succ: HashMap<(BeliefState, Action), BTreeSet<BeliefState>>,
    pub target: HashMap<BeliefState, bool>,
}

fn rect_of(cells: &[(u32, u32)], m: u32) -> BeliefKey {
    BeliefKey {
        i_lo: cells.iter().map(|c| c.0).min().unwrap(),
        i_hi: cells.iter().map(|c| c.0).max().unwrap(),
        j_lo: cells.iter().map(|c| c.1).min().unwrap(),
        j_hi: cells.iter().map(|c| c.1).max().unwrap(),
        m,
    }
}

pub fn oracle_belief(raw: &RawAbstraction, init: &[RawState]) -> OracleBelief {
    let members = |p: &BeliefState| -> Vec<RawState> {
        match p {
            BeliefState::Out => vec![RawState::Out],
            BeliefState::In(k) => {
                let mut v = Vec::new();
                for i in k.i_lo..=k.i_hi {
                    for j in k.j_lo..=k.j_hi {
                        v.push(RawState::new((i, j), k.m));
                    }
                }
                v
            }
        }
    };
    let group = |qs: &BTreeSet<RawState>, by_column: bool| -> BTreeSet<BeliefState> {
        if qs.contains(&RawState::Out) {
            return BTreeSet::from([BeliefState::Out]);
        }
        let mut groups: BTreeMap<(u32, u32), Vec<(u32, u32)>> = BTreeMap::new();
        for q in qs {
            if let RawState::In { cell, meas } = *q {
                let key = if by_column { (cell.0, meas) } else { (u32::MAX, meas) };
                groups.entry(key).or_default().push(cell);
            }
        }
        groups
            .into_iter()
            .map(|((_, m), cells)| BeliefState::In(rect_of(&cells, m)))
            .collect()
    };

    let init_set: BTreeSet<RawState> = init.iter().copied().collect();
    let start = group(&init_set, true);
    let mut states: BTreeSet<BeliefState> = start.clone();
    states.insert(BeliefState::Out);
    let mut queue: VecDeque<BeliefState> = states.iter().copied().collect();
    let mut succ = HashMap::new();
    while let Some(p) = queue.pop_front() {
        for a in Action::ALL {
            let mut next: BTreeSet<RawState> = BTreeSet::new();
            for q in members(&p) {
                next.extend(raw.successors(q, a));
            }
            let s = group(&next, a == Action::Hold);
            for t in &s {
                if states.insert(*t) {
                    queue.push_back(*t);
                }
            }
            succ.insert((p, a), s);
        }
    }
    let target = states
        .iter()
        .map(|p| {
            let t = match p {
                BeliefState::Out => false,
                BeliefState::In(_) => members(p).iter().all(|q| raw.label(*q).target()),
            };
            (*p, t)
        })
        .collect();
    OracleBelief { states, succ, target }
}

/// Random game graph with up to `max_n` states.
pub struct RandomGame {
    pub succ: Vec<[Vec<u32>; 2]>,
    pub safe: Vec<bool>,
    pub target: Vec<bool>,
    pub touches: Vec<bool>,
}

pub fn random_game<R: Rng>(rng: &mut R, max_n: usize) -> RandomGame {
    let n = rng.random_range(1..=max_n);
    let fanout = rng.random_range(1..=3usize);
    let succ = (0..n)
        .map(|_| {
            let mut pick = || {
                let k = rng.random_range(1..=fanout.min(n));
                let mut v: Vec<u32> = (0..k).map(|_| rng.random_range(0..n as u32)).collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            [pick(), pick()]
        })
        .collect();
    let safe: Vec<bool> = (0..n).map(|_| rng.random_bool(0.8)).collect();
    let target: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
    let touches = target.iter().map(|&t| t || rng.random_bool(0.3)).collect();
    RandomGame { succ, safe, target, touches }
}

/// Winning set and ranks by enumerating every memoryless strategy.
///
/// The stay region of a strategy is the set of states from which every
/// strategy-consistent path stays in safe target states; the core is the
/// union over strategies. A state then wins if some strategy makes every path
/// reach the core through transient states only; its rank is the least, over
/// strategies, of the longest such path.
pub fn exhaustive_game(g: &RandomGame, strict: bool) -> (Vec<bool>, Vec<u32>) {
    let n = g.succ.len();
    let good: Vec<bool> = (0..n).map(|s| g.safe[s] && g.target[s]).collect();
    let transient: Vec<bool> = (0..n)
        .map(|s| g.safe[s] && !g.target[s] && !(strict && g.touches[s]))
        .collect();
    let strategies = 1u32 << n;
    let act = |sigma: u32, s: usize| ((sigma >> s) & 1) as usize;

    let mut core = vec![false; n];
    for sigma in 0..strategies {
        for s0 in 0..n {
            if core[s0] {
                continue;
            }
            let mut seen = vec![false; n];
            let mut stack = vec![s0];
            seen[s0] = true;
            let mut ok = true;
            while let Some(s) = stack.pop() {
                if !good[s] {
                    ok = false;
                    break;
                }
                for &t in &g.succ[s][act(sigma, s)] {
                    if !seen[t as usize] {
                        seen[t as usize] = true;
                        stack.push(t as usize);
                    }
                }
            }
            if ok {
                core[s0] = true;
            }
        }
    }

    let mut rank = vec![u32::MAX; n];
    for sigma in 0..strategies {
        let mut depth: Vec<Option<u32>> = (0..n).map(|s| core[s].then_some(0)).collect();
        for _ in 0..n {
            for s in 0..n {
                if depth[s].is_some() || !transient[s] {
                    continue;
                }
                let ds: Option<Vec<u32>> = g.succ[s][act(sigma, s)].iter().map(|&t| depth[t as usize]).collect();
                if let Some(ds) = ds {
                    depth[s] = Some(1 + ds.into_iter().max().unwrap());
                }
            }
        }
        for s in 0..n {
            if let Some(d) = depth[s] {
                rank[s] = rank[s].min(d);
            }
        }
    }
    (rank.iter().map(|&r| r != u32::MAX).collect(), rank)
}

pub mod soundness {
    use super::*;
    use beliefsynth::plant::{DiscretePlant, Switch};
    use beliefsynth::raw::Grid;
    use beliefsynth::zonogeom::reach_k;

    fn mats(plant: &DiscretePlant, s: Switch) -> ([[f64; 2]; 2], [f64; 2]) {
        let a = plant.a(s);
        let k = plant.k(s);
        ([[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]], [k[0], k[1]])
    }

    fn random_cell<R: Rng>(rng: &mut R, grid: &Grid) -> (u32, u32) {
        (rng.random_range(0..grid.n_cols()), rng.random_range(0..grid.n_rows()))
    }

    /// Monte-Carlo endpoints outside the interval hull of `reach_k`, for
    /// `cells` random cells, both switch positions and the given step counts.
    pub fn reach_misses(plant: &DiscretePlant, grid: &Grid, cells: usize, trajectories: usize, ks: &[usize], seed: u64) -> usize {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let r = plant.disturbance().radius();
        let horizon = *ks.iter().max().unwrap();
        let mut misses = 0;
        for _ in 0..cells {
            let c = random_cell(&mut rng, grid);
            let cell = grid.cell_box(c);
            for s in [Switch::On, Switch::Off] {
                let (a, k) = mats(plant, s);
                let hulls: Vec<_> = ks.iter().map(|&n| reach_k(&cell, s, n, plant).unwrap().interval_hull()).collect();
                for _ in 0..trajectories {
                    let mut x = draw_point(&mut rng, cell.interval(0), cell.interval(1));
                    for step in 1..=horizon {
                        x = affine(&a, &k, x, draw_disturbance(&mut rng, r));
                        if let Some(i) = ks.iter().position(|&n| n == step) {
                            let h = &hulls[i];
                            let inside = (0..2).all(|ax| {
                                let (lo, hi) = h.interval(ax);
                                let slack = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
                                x[ax] >= lo - slack && x[ax] <= hi + slack
                            });
                            if !inside {
                                misses += 1;
                            }
                        }
                    }
                }
            }
        }
        misses
    }

    #[derive(Debug, Default)]
    pub struct RawCheck {
        pub samples: usize,
        pub misses: usize,
        pub exits_seen: usize,
        pub first_miss: Option<String>,
    }

    fn candidates(grid: &Grid, x: [f64; 2]) -> Option<Vec<(u32, u32)>> {
        let cols = grid.cells_at(0, x[0])?;
        let rows = grid.cells_at(1, x[1])?;
        Some((cols.0..=cols.1).flat_map(|i| (rows.0..=rows.1).map(move |j| (i, j))).collect())
    }

    /// Concrete macro-steps from random points of random cells: the landing
    /// raw state must be a returned successor, and `Out` must be returned
    /// whenever the step leaves the domain, or leaves the target from a
    /// target cell during a cycle.
    pub fn raw_misses(raw: &RawAbstraction, samples: usize, seed: u64) -> RawCheck {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let plant = raw.plant();
        let grid = raw.grid();
        let domain = grid.domain();
        let target = raw.target();
        let r = plant.disturbance().radius();
        let (a_on, k_on) = mats(plant, Switch::On);
        let (a_off, k_off) = mats(plant, Switch::Off);
        let mut out = RawCheck {
            samples,
            ..RawCheck::default()
        };
        for _ in 0..samples {
            let c = random_cell(&mut rng, grid);
            let m = rng.random_range(0..grid.n_rows());
            let action = if rng.random_bool(0.5) { Action::Cycle } else { Action::Hold };
            let cell = grid.cell_box(c);
            let x0 = draw_point(&mut rng, cell.interval(0), cell.interval(1));
            let mut path = Vec::new();
            let mut x = x0;
            match action {
                Action::Hold => {
                    x = affine(&a_off, &k_off, x, draw_disturbance(&mut rng, r));
                    path.push(x);
                }
                Action::Cycle => {
                    for step in 0..plant.cycle() {
                        let (a, k) = if step < plant.n_dwell() { (&a_on, &k_on) } else { (&a_off, &k_off) };
                        x = affine(a, k, x, draw_disturbance(&mut rng, r));
                        path.push(x);
                    }
                }
            }
            let left_domain = path.iter().any(|p| !domain.contains_point(p));
            let left_target = action == Action::Cycle && raw.is_target_cell(c) && path.iter().any(|p| !target.contains_point(p));
            let succ = raw.successors(RawState::new(c, m), action);
            let mut ok = true;
            if left_domain || left_target {
                out.exits_seen += 1;
                ok &= succ.contains(&RawState::Out);
            }
            if let Some(cells) = candidates(grid, x) {
                let rows: Vec<u32> = match action {
                    Action::Hold => vec![m],
                    Action::Cycle => match grid.cells_at(1, path[plant.n_grace() - 1][1]) {
                        Some((lo, hi)) => (lo..=hi).collect(),
                        None => Vec::new(),
                    },
                };
                if !rows.is_empty() {
                    ok &= cells.iter().any(|&cc| rows.iter().any(|&mm| succ.contains(&RawState::new(cc, mm))));
                }
            }
            if !ok {
                out.misses += 1;
                if out.first_miss.is_none() {
                    out.first_miss = Some(format!("cell {c:?} meas {m} action {action} from {x0:?} to {x:?}"));
                }
            }
        }
        out
    }
}

//! Solves a hand-made reach-avoid-stay game and audits the ranks.
//!
//! cargo run --example game_solving

use beliefsynth::game::{audit, solve_reach, solve_stay, GameGraph};

fn main() {
    // 0 unsafe sink, 1 and 2 target, 3 and 4 reach the target through
    // action 1 and 2 respectively, 5 has no safe way in.
    let g = GameGraph {
        succ: vec![
            [vec![0], vec![0]],
            [vec![2], vec![0, 1]],
            [vec![1], vec![2]],
            [vec![1], vec![3]],
            [vec![0, 1], vec![3]],
            [vec![0, 5], vec![4, 5]],
        ],
        safe: vec![false, true, true, true, true, true],
        target: vec![false, true, true, false, false, false],
        touches: vec![false, true, true, false, false, false],
    };
    let core = solve_stay(&g);
    let table = solve_reach(&g, &core, true);
    for (s, in_core) in core.iter().enumerate() {
        let actions: Vec<String> = table.allowed[s].iter().map(|a| a.to_string()).collect();
        println!(
            "state {s}: core {}, phase {:?}, rank {}, allowed [{}]",
            in_core,
            table.phase[s],
            table.rank[s],
            actions.join(", ")
        );
    }
    println!("audit violations: {:?}", audit(&g, &table));
}

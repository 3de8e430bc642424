//! Labels, bad prefixes, specification verdicts and the cycle projection.
//!
//! cargo run --example ltl_words

use beliefsynth::ltl::{bad_prefix, check_phi, decision_positions, proj, Label, Word};
use beliefsynth::Action::{Cycle as C, Hold as H};

fn main() -> beliefsynth::Result<()> {
    let s = Label::SAFE;
    let st = Label::SAFE_TARGET;
    let e = Label::EMPTY;

    let settles = Word::lasso([s, s, st], [st])?;
    let leaves = Word::lasso([s, st], [st, s])?;
    let crashes = Word::finite([s, st, e, st]);
    for (name, w) in [("settles", &settles), ("leaves", &leaves), ("crashes", &crashes)] {
        println!("{name}: verdict {}, bad prefix {:?}", check_phi(w, 2).as_str(), bad_prefix(w));
    }

    let actions = [H, C, C, C, C, C, C, H];
    let labels = [s, s, s, st, s, st, st, st];
    let (pa, pl) = proj(&actions, &labels, 3)?;
    println!("decision positions {:?}", decision_positions(&actions, 3));
    println!("projected actions {pa:?}");
    println!("projected labels {}", pl.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "));
    Ok(())
}

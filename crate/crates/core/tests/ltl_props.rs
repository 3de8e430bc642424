use beliefsynth::hybrid::{is_admissible, Action};
use beliefsynth::ltl::{bad_prefix, check_phi, first_safety_violation, proj, BadPrefix, Label, Verdict, Word};
use proptest::prelude::*;

use Action::{Cycle as C, Hold as H};

const S: Label = Label::SAFE;
const ST: Label = Label::SAFE_TARGET;
const E: Label = Label::EMPTY;

fn label(bits: u8) -> Label {
    Label::new(bits & 1 != 0, bits & 2 != 0)
}

// Half unstructured, half "safe approach then settle" so satisfying words
// show up often.
fn lasso() -> impl Strategy<Value = (Vec<Label>, Vec<Label>)> {
    let random = (prop::collection::vec(0u8..4, 0..16), prop::collection::vec(0u8..4, 1..8))
        .prop_map(|(p, c)| (p.into_iter().map(label).collect(), c.into_iter().map(label).collect()));
    let settling = (0usize..10, 0usize..6, 1usize..6, any::<bool>()).prop_map(|(approach, inside, cyc, glitch)| {
        let mut p = vec![S; approach];
        p.extend(vec![ST; inside]);
        let mut c = vec![ST; cyc];
        if glitch {
            c[cyc - 1] = S;
        }
        (p, c)
    });
    prop_oneof![random, settling]
}

fn unroll(p: &[Label], c: &[Label], n: usize) -> Vec<Label> {
    (0..n).map(|i| if i < p.len() { p[i] } else { c[(i - p.len()) % c.len()] }).collect()
}

// First 1-based violating position of an explicit letter sequence.
fn scan(ls: &[Label]) -> Option<usize> {
    for (i, l) in ls.iter().enumerate() {
        if !l.safe() || (i > 0 && ls[i - 1].target() && !l.target()) {
            return Some(i + 1);
        }
    }
    None
}

fn admissible_sequence(n1: usize) -> impl Strategy<Value = Vec<Action>> {
    prop::collection::vec(prop_oneof![Just(None), (1usize..4).prop_map(Some)], 0..30).prop_map(move |blocks| {
        let mut a = Vec::new();
        for b in blocks {
            match b {
                None => a.push(H),
                Some(l) => a.extend(std::iter::repeat_n(C, l * n1)),
            }
        }
        a
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bad_prefix_whole_iff_safety_holds((p, c) in lasso()) {
        let w = Word::lasso(p.clone(), c.clone()).unwrap();
        let unrolled = unroll(&p, &c, 3 * (p.len() + c.len()));
        let safe = scan(&unrolled).is_none();
        let bp = bad_prefix(&w);
        prop_assert_eq!(bp.is_whole(), safe);
        if let BadPrefix::Finite(prefix) = bp {
            let k = scan(&unrolled).unwrap();
            prop_assert_eq!(prefix, unrolled[..k].to_vec());
        }
    }

    #[test]
    fn lasso_verdict_matches_unrolling((p, c) in lasso()) {
        let w = Word::lasso(p.clone(), c.clone()).unwrap();
        let unrolled = unroll(&p, &c, 3 * (p.len() + c.len()));
        let expected = match scan(&unrolled) {
            Some(k) => Verdict::ViolatedAt(k),
            None => {
                let first = unrolled.iter().position(|l| l.target());
                let settles = first.is_some_and(|s| unrolled[s..].iter().all(|l| l.target())) && c.iter().all(|l| l.target());
                if settles { Verdict::Satisfied } else { Verdict::LivenessViolated }
            }
        };
        prop_assert_eq!(check_phi(&w, 53), expected);
    }

    #[test]
    fn finite_words_report_first_violation(ls in prop::collection::vec(0u8..4, 0..40)) {
        let ls: Vec<Label> = ls.into_iter().map(label).collect();
        let w = Word::finite(ls.clone());
        prop_assert_eq!(first_safety_violation(&w), scan(&ls));
        if let Some(k) = scan(&ls) {
            prop_assert_eq!(check_phi(&w, 3), Verdict::ViolatedAt(k));
        }
    }

    #[test]
    fn projection_length_counts_collapsed_cycles((n1, a) in (1usize..6).prop_flat_map(|n| (Just(n), admissible_sequence(n)))) {
        prop_assert!(is_admissible(&a, n1));
        let labels = vec![S; a.len()];
        let (pa, pw) = proj(&a, &labels, n1).unwrap();
        let count = a.iter().filter(|x| **x == C).count();
        prop_assert_eq!(pa.len(), a.len() - count * (n1 - 1) / n1);
        prop_assert_eq!(pw.len(), pa.len());
        prop_assert_eq!(pa.iter().filter(|x| **x == H).count(), a.len() - count);
    }

    #[test]
    fn projection_keeps_liveness(a in admissible_sequence(4), bits in prop::collection::vec(0u8..4, 120)) {
        let labels: Vec<Label> = (0..a.len()).map(|i| label(bits[i % bits.len()])).collect();
        let (_, pw) = proj(&a, &labels, 4).unwrap();
        if pw.iter().any(|l| l.target()) {
            prop_assert!(labels.iter().any(|l| l.target()));
        }
        // projected letters are a subsequence of the original word
        let mut it = labels.iter();
        for l in &pw {
            prop_assert!(it.any(|x| x == l));
        }
    }
}

#[test]
fn verdict_examples() {
    let w = Word::lasso([S, S], [ST]).unwrap();
    assert_eq!(check_phi(&w, 0), Verdict::Satisfied);
    assert_eq!(check_phi(&Word::finite([ST, S, S]), 0), Verdict::ViolatedAt(2));
    assert_eq!(check_phi(&Word::finite([E, S]), 0), Verdict::ViolatedAt(1));
    assert_eq!(check_phi(&Word::lasso([S], [S]).unwrap(), 0), Verdict::LivenessViolated);
    assert_eq!(check_phi(&Word::finite([S, ST, ST, ST]), 3), Verdict::SatisfiedAtDeskScale);
    assert_eq!(check_phi(&Word::finite([S, S, ST, ST]), 3), Verdict::Undetermined);
    assert_eq!(check_phi(&Word::finite([]), 3), Verdict::Undetermined);
}

#[test]
fn bad_prefix_examples() {
    let always = Word::lasso([], [ST]).unwrap();
    assert_eq!(bad_prefix(&always), BadPrefix::Whole(always.clone()));
    assert_eq!(bad_prefix(&Word::finite([S, ST, S])), BadPrefix::Finite(vec![S, ST, S]));
}

#[test]
fn projection_examples() {
    let a = [H, C, C, C, C, C, C, H];
    let (pa, _) = proj(&a, &[S; 8], 3).unwrap();
    assert_eq!(pa, vec![H, C, C, H]);
    let all_holds = [H; 5];
    assert_eq!(proj(&all_holds, &[ST; 5], 3).unwrap().0, all_holds.to_vec());
    assert!(proj(&[C, C, H], &[S; 3], 3).is_err());
    assert!(proj(&[H], &[S; 2], 3).is_err());
}

#[test]
fn admissibility_examples() {
    assert!(is_admissible(&[C, C, C, H, C, C, C, H], 3));
    assert!(is_admissible(&[H, H, C, C], 3));
    assert!(!is_admissible(&[C, C, H], 3));
    assert!(is_admissible(&[], 3));
}

//! Executable semantics of the reach-avoid-stay objective
//! `□safe ∧ (¬target U □target)` over finite and lasso words, together with
//! the bad-prefix operator and the projection that collapses constant-on
//! cycles into single decision steps.

pub mod harness;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::{is_admissible, Action};
use crate::zonogeom::AxisBox;

/// A subset of the atomic propositions `{safe, target}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(u8);

impl Label {
    const SAFE_BIT: u8 = 0b01;
    const TARGET_BIT: u8 = 0b10;

    pub const EMPTY: Label = Label(0);
    pub const SAFE: Label = Label(Self::SAFE_BIT);
    pub const TARGET: Label = Label(Self::TARGET_BIT);
    pub const SAFE_TARGET: Label = Label(Self::SAFE_BIT | Self::TARGET_BIT);

    pub fn new(safe: bool, target: bool) -> Self {
        Label((safe as u8) | ((target as u8) << 1))
    }

    pub fn safe(self) -> bool {
        self.0 & Self::SAFE_BIT != 0
    }

    pub fn target(self) -> bool {
        self.0 & Self::TARGET_BIT != 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    fn from_bits(bits: u8) -> Self {
        Label(bits & 0b11)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.safe(), self.target()) {
            (false, false) => write!(f, "{{}}"),
            (true, false) => write!(f, "{{safe}}"),
            (false, true) => write!(f, "{{target}}"),
            (true, true) => write!(f, "{{safe,target}}"),
        }
    }
}

/// The observation map `ℓ`: `safe` iff inside the domain, `target` iff inside
/// the target box.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMap {
    pub domain: AxisBox,
    pub target: AxisBox,
}

impl ObservationMap {
    pub fn label(&self, x: &[f64]) -> Label {
        Label::new(self.domain.contains_point(x), self.target.contains_point(x))
    }
}

/// Labels packed four to a byte.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PackedLabels {
    bytes: Vec<u8>,
    len: usize,
}

impl PackedLabels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: Label) {
        let (byte, shift) = (self.len / 4, 2 * (self.len % 4));
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        self.bytes[byte] |= label.bits() << shift;
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> Option<Label> {
        (i < self.len).then(|| Label::from_bits(self.bytes[i / 4] >> (2 * (i % 4))))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.len).map(|i| self.get(i).unwrap())
    }

    pub fn to_vec(&self) -> Vec<Label> {
        self.iter().collect()
    }
}

impl FromIterator<Label> for PackedLabels {
    fn from_iter<T: IntoIterator<Item = Label>>(iter: T) -> Self {
        let mut out = PackedLabels::new();
        for l in iter {
            out.push(l);
        }
        out
    }
}

/// A finite word, or a lasso `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    prefix: PackedLabels,
    cycle: Option<PackedLabels>,
}

impl Word {
    pub fn finite(labels: impl IntoIterator<Item = Label>) -> Self {
        Self {
            prefix: labels.into_iter().collect(),
            cycle: None,
        }
    }

    pub fn lasso(
        prefix: impl IntoIterator<Item = Label>,
        cycle: impl IntoIterator<Item = Label>,
    ) -> Result<Self> {
        let cycle: PackedLabels = cycle.into_iter().collect();
        if cycle.is_empty() {
            return Err(Error::InvalidParameter {
                name: "cycle",
                reason: "a lasso word needs a nonempty cycle".into(),
            });
        }
        Ok(Self {
            prefix: prefix.into_iter().collect(),
            cycle: Some(cycle),
        })
    }

    pub fn is_infinite(&self) -> bool {
        self.cycle.is_some()
    }

    pub fn prefix(&self) -> &PackedLabels {
        &self.prefix
    }

    pub fn cycle(&self) -> Option<&PackedLabels> {
        self.cycle.as_ref()
    }

    /// Number of positions for finite words, `None` for lassos.
    pub fn len(&self) -> Option<usize> {
        match self.cycle {
            None => Some(self.prefix.len()),
            Some(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Letter at 0-based position `i`, unrolling the cycle as needed.
    pub fn at(&self, i: usize) -> Option<Label> {
        if i < self.prefix.len() {
            return self.prefix.get(i);
        }
        let cycle = self.cycle.as_ref()?;
        cycle.get((i - self.prefix.len()) % cycle.len())
    }

    // Positions that must be scanned to see every distinct (w(k-1), w(k)) pair.
    fn scan_len(&self) -> usize {
        match &self.cycle {
            None => self.prefix.len(),
            Some(c) => self.prefix.len() + c.len() + 1,
        }
    }
}

/// 1-based index `k*` of the first position that is unsafe or leaves the
/// target right after being in it; `None` when no such position exists.
pub fn first_safety_violation(w: &Word) -> Option<usize> {
    let mut prev: Option<Label> = None;
    for i in 0..w.scan_len() {
        let cur = w.at(i)?;
        if !cur.safe() || prev.is_some_and(|p| p.target() && !cur.target()) {
            return Some(i + 1);
        }
        prev = Some(cur);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BadPrefix {
    /// `w(1) .. w(k*)`.
    Finite(Vec<Label>),
    /// No violation: the bad prefix is the word itself.
    Whole(Word),
}

impl BadPrefix {
    pub fn is_whole(&self) -> bool {
        matches!(self, BadPrefix::Whole(_))
    }
}

pub fn bad_prefix(w: &Word) -> BadPrefix {
    match first_safety_violation(w) {
        Some(k) => BadPrefix::Finite((0..k).map(|i| w.at(i).unwrap()).collect()),
        None => BadPrefix::Whole(w.clone()),
    }
}

/// Outcome of checking the objective on a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Exact verdict on a lasso word.
    Satisfied,
    /// Finite word without violation whose trailing settling window is all
    /// target.
    SatisfiedAtDeskScale,
    /// First violation at this 1-based position.
    ViolatedAt(usize),
    /// Lasso that never settles in the target.
    LivenessViolated,
    Undetermined,
}

impl Verdict {
    pub fn is_violation(self) -> bool {
        matches!(self, Verdict::ViolatedAt(_) | Verdict::LivenessViolated)
    }

    pub fn as_str(self) -> String {
        match self {
            Verdict::Satisfied => "satisfied".into(),
            Verdict::SatisfiedAtDeskScale => "satisfied-at-desk-scale".into(),
            Verdict::ViolatedAt(k) => format!("violated-at-{k}"),
            Verdict::LivenessViolated => "liveness-violated".into(),
            Verdict::Undetermined => "undetermined".into(),
        }
    }
}

/// Checks `□safe ∧ (¬target U □target)`. Finite words settle once their last
/// `settle_window` letters are all target.
pub fn check_phi(w: &Word, settle_window: usize) -> Verdict {
    if let Some(k) = first_safety_violation(w) {
        return Verdict::ViolatedAt(k);
    }
    match w.cycle() {
        // no target exit anywhere, so the cycle is uniformly labelled
        Some(cycle) => {
            if cycle.get(0).unwrap().target() {
                Verdict::Satisfied
            } else {
                Verdict::LivenessViolated
            }
        }
        None => {
            let n = w.prefix().len();
            if n == 0 || settle_window == 0 || n < settle_window {
                return Verdict::Undetermined;
            }
            if (n - settle_window..n).all(|i| w.at(i).unwrap().target()) {
                Verdict::SatisfiedAtDeskScale
            } else {
                Verdict::Undetermined
            }
        }
    }
}

/// Collapses every constant-on cycle of `cycle_len` steps to its first step,
/// in both the action sequence and the aligned word.
pub fn proj(actions: &[Action], labels: &[Label], cycle_len: usize) -> Result<(Vec<Action>, Vec<Label>)> {
    if actions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: actions.len(),
            found: labels.len(),
        });
    }
    if !is_admissible(actions, cycle_len) {
        return Err(Error::NotAdmissible);
    }
    let keep = decision_positions(actions, cycle_len);
    Ok((
        keep.iter().map(|&k| actions[k]).collect(),
        keep.iter().map(|&k| labels[k]).collect(),
    ))
}

/// Positions kept by [`proj`]: every hold step and the first step of every
/// cycle.
pub fn decision_positions(actions: &[Action], cycle_len: usize) -> Vec<usize> {
    let mut keep = Vec::new();
    let mut k = 0;
    while k < actions.len() {
        keep.push(k);
        k += match actions[k] {
            Action::Hold => 1,
            Action::Cycle => cycle_len.max(1),
        };
    }
    keep
}

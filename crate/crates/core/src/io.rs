//! JSON documents for abstractions and controllers. Every document carries
//! the schema version, the config digest and a checksum over its compact
//! canonical form (keys sorted, checksum removed). Files are streamed to a
//! temporary sibling and renamed into place.
//!
//! The large documents are plain structs whose fields are declared in
//! sorted order, so their compact serialization is already canonical and
//! never has to be materialized as a `serde_json::Value`.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::belief::{BeliefAbstraction, BeliefKey, BeliefLabel, BeliefState};
use crate::error::{Error, Result};
use crate::game::{ActionSet, ControllerTable, Phase};
use crate::hybrid::Action;
use crate::ltl::Label;
use crate::raw::{Grid, RawAbstraction, RawState};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("checksum mismatch")]
    Checksum,
    #[error("digest mismatch: file {found}, config {expected}")]
    Digest { expected: String, found: String },
}

fn write_atomic_with(path: &Path, fill: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Config(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let mut w = BufWriter::new(fs::File::create(&tmp)?);
    fill(&mut w)?;
    w.flush()?;
    drop(w);
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    write_atomic_with(path, |w| Ok(w.write_all(contents)?))
}

struct HashWriter(Sha256);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

fn checksum_of<T: Serialize + ?Sized>(doc: &T) -> String {
    let mut h = HashWriter(Sha256::new());
    serde_json::to_writer(&mut h, doc).expect("documents serialize");
    h.0.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// A serializable document with a checksum slot.
pub trait Document: Serialize {
    fn set_checksum(&mut self, sum: Option<String>);
}

impl Document for Value {
    fn set_checksum(&mut self, sum: Option<String>) {
        let obj = self.as_object_mut().expect("document body is an object");
        match sum {
            Some(s) => obj.insert("checksum".into(), json!(s)),
            None => obj.remove("checksum"),
        };
    }
}

/// Adds `v` and `digest` to an object body.
pub fn envelope(digest: &str, mut body: Value) -> Value {
    let obj = body.as_object_mut().expect("document body is an object");
    obj.insert("v".into(), json!(SCHEMA_VERSION));
    obj.insert("digest".into(), json!(digest));
    body
}

/// Checksums `doc` and streams it to `path` as one line of compact JSON.
pub fn write_document<D: Document>(path: &Path, doc: &mut D) -> Result<()> {
    doc.set_checksum(None);
    let sum = checksum_of(doc);
    doc.set_checksum(Some(sum));
    write_atomic_with(path, |w| {
        serde_json::to_writer(&mut *w, doc)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn check_digest(found: &str, expected: Option<&str>) -> Result<(), LoadError> {
    match expected {
        Some(e) if e != found => Err(LoadError::Digest {
            expected: e.to_string(),
            found: found.to_string(),
        }),
        _ => Ok(()),
    }
}

/// Reads any document, verifying version, checksum and (when given) digest.
pub fn read_document(path: &Path, expected_digest: Option<&str>) -> Result<Value, LoadError> {
    let text = fs::read_to_string(path)?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| LoadError::Malformed(e.to_string()))?;
    let obj = doc.as_object_mut().ok_or_else(|| LoadError::Malformed("not an object".into()))?;
    let sum = obj
        .remove("checksum")
        .and_then(|v| v.as_str().map(str::to_string))
        .ok_or_else(|| LoadError::Malformed("missing checksum".into()))?;
    if checksum_of(&doc) != sum {
        return Err(LoadError::Checksum);
    }
    if doc.get("v").and_then(Value::as_u64) != Some(SCHEMA_VERSION) {
        return Err(LoadError::Malformed("unsupported schema version".into()));
    }
    check_digest(doc.get("digest").and_then(Value::as_str).unwrap_or_default(), expected_digest)?;
    Ok(doc)
}

#[derive(Serialize)]
struct GridRef<'a> {
    x1: &'a [f64],
    x2: &'a [f64],
}

impl<'a> GridRef<'a> {
    fn new(grid: &'a Grid) -> Self {
        Self {
            x1: grid.breakpoints(0),
            x2: grid.breakpoints(1),
        }
    }
}

#[derive(Serialize)]
struct RawLabelDoc {
    safe: bool,
    target: bool,
}

#[derive(Serialize)]
#[serde(untagged)]
enum RawStateDoc {
    Out(&'static str),
    In([u32; 3]),
}

/// Raw states reachable from the initial states, their labels and both
/// successor lists (action 1 first).
#[derive(Serialize)]
pub struct RawDocument<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    checksum: Option<String>,
    digest: &'a str,
    grid: GridRef<'a>,
    initial: Vec<usize>,
    kind: &'static str,
    labels: Vec<RawLabelDoc>,
    states: Vec<RawStateDoc>,
    transitions: Vec<[Vec<usize>; 2]>,
    v: u64,
}

impl RawDocument<'_> {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }
}

impl Document for RawDocument<'_> {
    fn set_checksum(&mut self, sum: Option<String>) {
        self.checksum = sum;
    }
}

pub fn raw_document<'a>(raw: &'a RawAbstraction, init: &[RawState], digest: &'a str) -> RawDocument<'a> {
    let states = raw.reachable(init);
    let index: std::collections::HashMap<RawState, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let transitions = states
        .iter()
        .map(|q| Action::ALL.map(|a| raw.successors(*q, a).iter().map(|s| index[s]).collect()))
        .collect();
    RawDocument {
        checksum: None,
        digest,
        grid: GridRef::new(raw.grid()),
        initial: init.iter().map(|q| index[q]).collect(),
        kind: "raw",
        labels: states
            .iter()
            .map(|q| {
                let l = raw.label(*q);
                RawLabelDoc {
                    safe: l.safe(),
                    target: l.target(),
                }
            })
            .collect(),
        states: states
            .iter()
            .map(|q| match q {
                RawState::Out => RawStateDoc::Out("out"),
                RawState::In { cell, meas } => RawStateDoc::In([cell.0, cell.1, *meas]),
            })
            .collect(),
        transitions,
        v: SCHEMA_VERSION,
    }
}

#[derive(Serialize, Deserialize)]
struct LabelDoc {
    safe: bool,
    target: bool,
    touches: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateDoc {
    Out(String),
    In([u32; 5]),
}

/// Belief transition system, optionally with a controller table. The
/// controller fields are absent from plain belief documents.
#[derive(Serialize)]
pub struct BeliefDocument<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    actions: Option<Vec<Vec<u8>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    checksum: Option<String>,
    digest: &'a str,
    grid: GridRef<'a>,
    initial: &'a [u32],
    kind: &'static str,
    labels: Vec<LabelDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phases: Option<&'a [Phase]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ranks: Option<&'a [u32]>,
    states: Vec<StateDoc>,
    transitions: &'a [[Vec<u32>; 2]],
    v: u64,
}

impl Document for BeliefDocument<'_> {
    fn set_checksum(&mut self, sum: Option<String>) {
        self.checksum = sum;
    }
}

pub fn belief_document<'a>(belief: &'a BeliefAbstraction, grid: &'a Grid, digest: &'a str) -> BeliefDocument<'a> {
    BeliefDocument {
        actions: None,
        checksum: None,
        digest,
        grid: GridRef::new(grid),
        initial: belief.initial(),
        kind: "belief",
        labels: belief
            .labels()
            .iter()
            .map(|l| LabelDoc {
                safe: l.label.safe(),
                target: l.label.target(),
                touches: l.touches_target,
            })
            .collect(),
        phases: None,
        ranks: None,
        states: belief
            .states()
            .iter()
            .map(|p| match p {
                BeliefState::Out => StateDoc::Out("out".into()),
                BeliefState::In(k) => StateDoc::In([k.i_lo, k.i_hi, k.j_lo, k.j_hi, k.m]),
            })
            .collect(),
        transitions: belief.transitions(),
        v: SCHEMA_VERSION,
    }
}

/// Controller table plus the belief transition system it runs on.
pub fn controller_document<'a>(
    belief: &'a BeliefAbstraction,
    table: &'a ControllerTable,
    grid: &'a Grid,
    digest: &'a str,
) -> BeliefDocument<'a> {
    let mut doc = belief_document(belief, grid, digest);
    doc.kind = "controller";
    doc.actions = Some(table.allowed.iter().map(|s| s.iter().map(Action::number).collect()).collect());
    doc.phases = Some(&table.phase);
    doc.ranks = Some(&table.rank);
    doc
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    x1: Vec<f64>,
    x2: Vec<f64>,
}

// Field order and types mirror `BeliefDocument` with the controller fields
// present, so re-serializing a parsed file reproduces the checksummed bytes.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerFile {
    actions: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    checksum: Option<String>,
    digest: String,
    grid: GridDoc,
    initial: Vec<u32>,
    kind: String,
    labels: Vec<LabelDoc>,
    phases: Vec<Phase>,
    ranks: Vec<u32>,
    states: Vec<StateDoc>,
    transitions: Vec<[Vec<u32>; 2]>,
    v: u64,
}

pub struct LoadedController {
    pub grid: Grid,
    pub belief: BeliefAbstraction,
    pub table: ControllerTable,
}

pub fn load_controller(path: &Path, expected_digest: &str) -> Result<LoadedController, LoadError> {
    let bad = |e: String| LoadError::Malformed(e);
    let reader = BufReader::new(fs::File::open(path)?);
    let mut d: ControllerFile = serde_json::from_reader(reader).map_err(|e| bad(e.to_string()))?;
    let sum = d.checksum.take().ok_or_else(|| bad("missing checksum".into()))?;
    if checksum_of(&d) != sum {
        return Err(LoadError::Checksum);
    }
    if d.v != SCHEMA_VERSION {
        return Err(bad("unsupported schema version".into()));
    }
    if d.kind != "controller" {
        return Err(bad(format!("expected a controller document, found {}", d.kind)));
    }
    check_digest(&d.digest, Some(expected_digest))?;
    let grid = Grid::from_breakpoints(d.grid.x1, d.grid.x2).map_err(|e| bad(e.to_string()))?;
    let states = d
        .states
        .into_iter()
        .map(|s| match s {
            StateDoc::Out(tag) if tag == "out" => Ok(BeliefState::Out),
            StateDoc::Out(tag) => Err(bad(format!("unknown state tag {tag}"))),
            StateDoc::In(k) => Ok(BeliefState::In(BeliefKey {
                i_lo: k[0],
                i_hi: k[1],
                j_lo: k[2],
                j_hi: k[3],
                m: k[4],
            })),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels = d
        .labels
        .into_iter()
        .map(|l| BeliefLabel {
            label: Label::new(l.safe, l.target),
            touches_target: l.touches,
        })
        .collect();
    let n = states.len();
    let belief = BeliefAbstraction::from_parts(states, d.transitions, labels, d.initial).map_err(|e| bad(e.to_string()))?;
    if d.actions.len() != n || d.ranks.len() != n || d.phases.len() != n {
        return Err(bad("controller arrays disagree in length".into()));
    }
    let mut allowed = Vec::with_capacity(n);
    for list in &d.actions {
        let mut set = ActionSet::default();
        for &a in list {
            set.insert(Action::from_number(a).ok_or_else(|| bad(format!("unknown action {a}")))?);
        }
        allowed.push(set);
    }
    let winning = d.phases.iter().map(|p| *p != Phase::Losing).collect();
    Ok(LoadedController {
        grid,
        belief,
        table: ControllerTable {
            winning,
            allowed,
            rank: d.ranks,
            phase: d.phases,
        },
    })
}

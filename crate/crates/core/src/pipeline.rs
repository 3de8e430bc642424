//! End-to-end commands: abstraction, synthesis, closed-loop simulation and
//! the periodic baseline. Each writes its artifacts into the configured
//! output directory.

use std::path::{Path, PathBuf};

use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::baseline::{line_search_noff, simulate_baseline, LineSearch};
use crate::belief::stages::{reduction_stages, StageCount};
use crate::belief::{construct_belief, BeliefAbstraction, BeliefKey};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::game::{synthesize, Synthesis};
use crate::io::{belief_document, controller_document, envelope, load_controller, raw_document, write_atomic, write_document, LoadError};
use crate::ltl::{check_phi, Verdict, Word};
use crate::raw::{RawAbstraction, RawState};
use crate::runtime::RuntimeError;
use crate::sim::{ClosedLoop, ClosedLoopRun};
use crate::zonogeom::AxisBox;

pub const RAW_FILE: &str = "raw_abstraction.json";
pub const BELIEF_FILE: &str = "belief_abstraction.json";
pub const STATS_FILE: &str = "stats.json";
pub const CONTROLLER_FILE: &str = "controller.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const BASELINE_REPORT_FILE: &str = "baseline_report.json";
pub const BASELINE_TRACE_FILE: &str = "baseline_trace.csv";

/// Raw and belief abstraction for a validated configuration.
pub struct Built {
    pub config: RunConfig,
    pub raw: RawAbstraction,
    pub init: Vec<RawState>,
    pub belief: BeliefAbstraction,
}

pub fn build_raw(config: &RunConfig) -> Result<(RawAbstraction, Vec<RawState>)> {
    config.validate()?;
    let raw = RawAbstraction::new(config.plant()?, config.grid()?, config.target()?, config.abstraction_options())?;
    let init = raw.initial_states(&AxisBox::point(&config.x_init)?)?;
    Ok((raw, init))
}

pub fn build(config: &RunConfig) -> Result<Built> {
    let (raw, init) = build_raw(config)?;
    let belief = construct_belief(&raw, &init, Some(config.max_belief_states))?;
    Ok(Built {
        config: config.clone(),
        raw,
        init,
        belief,
    })
}

impl Built {
    pub fn synthesize(&self) -> Synthesis {
        synthesize(&self.belief, self.config.strict_transient)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AbstractionStats {
    pub digest: String,
    pub grid_cells: usize,
    pub raw_states_total: usize,
    pub raw_states_reachable: usize,
    pub belief_states: usize,
    pub stages: Vec<StageCount>,
}

pub fn cmd_abstract(config: &RunConfig) -> Result<AbstractionStats> {
    let built = build(config)?;
    let digest = config.digest();
    let dir = &config.output_dir;
    let mut raw_doc = raw_document(&built.raw, &built.init, &digest);
    let raw_states_reachable = raw_doc.num_states();
    write_document(&dir.join(RAW_FILE), &mut raw_doc)?;
    drop(raw_doc);
    write_document(&dir.join(BELIEF_FILE), &mut belief_document(&built.belief, built.raw.grid(), &digest))?;
    let stats = AbstractionStats {
        digest: digest.clone(),
        grid_cells: built.raw.grid().n_cells(),
        raw_states_total: built.raw.num_states(),
        raw_states_reachable,
        belief_states: built.belief.len(),
        stages: reduction_stages(&built.raw, &built.init, config.stage_cap),
    };
    write_document(&dir.join(STATS_FILE), &mut envelope(&digest, serde_json::to_value(&stats)?))?;
    Ok(stats)
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthesisOutcome {
    pub digest: String,
    pub belief_states: usize,
    pub core_states: usize,
    pub winning_states: usize,
    pub uncovered: Vec<BeliefKey>,
}

impl SynthesisOutcome {
    pub fn success(&self) -> bool {
        self.uncovered.is_empty()
    }
}

pub fn cmd_synthesize(config: &RunConfig) -> Result<SynthesisOutcome> {
    let built = build(config)?;
    let syn = built.synthesize();
    let digest = config.digest();
    write_document(
        &config.output_dir.join(CONTROLLER_FILE),
        &mut controller_document(&built.belief, &syn.table, built.raw.grid(), &digest),
    )?;
    Ok(SynthesisOutcome {
        digest,
        belief_states: built.belief.len(),
        core_states: syn.core_size,
        winning_states: syn.table.num_winning(),
        uncovered: syn.uncovered,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum SimulateError {
    #[error(transparent)]
    Config(#[from] Error),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Refused(RuntimeError),
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub verdict: Verdict,
    pub fault: Option<RuntimeError>,
    pub belief_misses: usize,
    pub steps: usize,
    pub max_x2: f64,
    pub trace_path: PathBuf,
}

/// Finite-trace verdict of a run.
pub fn run_verdict(lp: &ClosedLoop<'_>, run: &ClosedLoopRun, settle_window: usize) -> Verdict {
    check_phi(&Word::finite(run.labels(&lp.observation_map())), settle_window)
}

pub fn cmd_simulate(config: &RunConfig, controller: Option<&Path>) -> Result<SimulateOutcome, SimulateError> {
    let (raw, _) = build_raw(config)?;
    let default_path = config.output_dir.join(CONTROLLER_FILE);
    let path = controller.unwrap_or(&default_path);
    let loaded = load_controller(path, &config.digest())?;
    if &loaded.grid != raw.grid() {
        return Err(LoadError::Malformed("controller grid differs from the configured grid".into()).into());
    }
    let lp = ClosedLoop {
        raw: &raw,
        belief: &loaded.belief,
        table: &loaded.table,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let run = lp.run(config.x_init, config.horizon, &mut rng).map_err(SimulateError::Refused)?;
    let verdict = run_verdict(&lp, &run, config.settle_window());
    let trace_path = config.output_dir.join(TRACE_FILE);
    let mut footer = vec![
        ("digest", config.digest()),
        ("seed", config.seed.to_string()),
        ("verdict", verdict.as_str()),
    ];
    if let Some(f) = &run.fault {
        footer.push(("fault", f.to_string().replace('\n', " ")));
    }
    write_atomic(&trace_path, run.trace.to_csv_string(&footer).as_bytes()).map_err(SimulateError::Config)?;
    Ok(SimulateOutcome {
        verdict,
        fault: run.fault.clone(),
        belief_misses: run.belief_misses,
        steps: run.trace.len(),
        max_x2: run.max_x2(),
        trace_path,
    })
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub search: LineSearch,
    pub max_x2: Option<f64>,
}

pub fn cmd_baseline(config: &RunConfig) -> Result<BaselineOutcome> {
    config.validate()?;
    let plant = config.plant()?;
    let search = line_search_noff(
        config.baseline_n_on,
        config.baseline_n_off_min..=config.baseline_n_off_max,
        &plant,
        (config.target_x2[0], config.target_x2[1]),
    )?;
    let digest = config.digest();
    write_document(
        &config.output_dir.join(BASELINE_REPORT_FILE),
        &mut envelope(&digest, json!({ "kind": "baseline", "search": search })),
    )?;
    let mut max_x2 = None;
    if let Some(n_off) = search.chosen {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let x0 = Vector2::new(config.x_init[0], config.x_init[1]);
        let trace = simulate_baseline(config.baseline_n_on, n_off, &plant, x0, config.baseline_horizon, &mut rng);
        max_x2 = trace.states().map(|x| x[1]).reduce(f64::max);
        let footer = [
            ("digest", digest.clone()),
            ("seed", config.seed.to_string()),
            ("n_on", config.baseline_n_on.to_string()),
            ("n_off", n_off.to_string()),
        ];
        write_atomic(
            &config.output_dir.join(BASELINE_TRACE_FILE),
            trace.to_csv_string(&footer).as_bytes(),
        )?;
    }
    Ok(BaselineOutcome { search, max_x2 })
}

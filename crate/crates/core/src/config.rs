//! Run configuration: a flat TOML table whose keys double as `--kebab-case`
//! command-line flags.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::plant::{discretize, CircuitParams, DiscretePlant, DwellTiming};
use crate::raw::{AbstractionOptions, Grid};
use crate::zonogeom::{AxisBox, DisturbanceBall, IntersectMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub c_out: f64,
    pub l_out: f64,
    pub r_load: f64,
    pub v_in: f64,
    pub t_sample: f64,
    pub n_dwell: usize,
    pub n_grace: usize,
    pub disturbance_radius: f64,
    /// Row-major discrete matrices replacing the discretized circuit.
    pub a_on: Option<[f64; 4]>,
    pub a_off: Option<[f64; 4]>,
    pub k_on: Option<[f64; 2]>,

    pub domain_x1: [f64; 2],
    pub domain_x2: [f64; 2],
    pub target_x1: [f64; 2],
    pub target_x2: [f64; 2],
    pub x_init: [f64; 2],
    pub grid_n1: usize,
    pub grid_n2: usize,

    pub literal_eq9: bool,
    pub strict_transient: bool,
    pub strict_exit: bool,
    pub exact_intersection: bool,
    pub max_belief_states: usize,
    pub stage_cap: usize,

    pub horizon: usize,
    pub seed: u64,
    /// Trailing all-target steps needed for a settled finite trace; 0 means
    /// one full cycle plus one.
    pub settle_window: usize,
    pub output_dir: PathBuf,

    pub baseline_n_on: usize,
    pub baseline_n_off_min: usize,
    pub baseline_n_off_max: usize,
    pub baseline_horizon: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = CircuitParams::default();
        let t = DwellTiming::default();
        Self {
            c_out: c.c_out,
            l_out: c.l_out,
            r_load: c.r_load,
            v_in: c.v_in,
            t_sample: c.t_sample,
            n_dwell: t.n_dwell,
            n_grace: t.n_grace,
            disturbance_radius: 0.0,
            a_on: None,
            a_off: None,
            k_on: None,
            domain_x1: [0.0, 80.0],
            domain_x2: [0.0, 25.0],
            target_x1: [0.0, 80.0],
            target_x2: [24.0, 25.0],
            x_init: [0.0, 0.0],
            grid_n1: 40,
            grid_n2: 50,
            literal_eq9: false,
            strict_transient: true,
            strict_exit: true,
            exact_intersection: false,
            max_belief_states: 5_000_000,
            stage_cap: 1_000_000,
            horizon: 40_000,
            seed: 1,
            settle_window: 0,
            output_dir: PathBuf::from("out"),
            baseline_n_on: 10,
            baseline_n_off_min: 1,
            baseline_n_off_max: 100,
            baseline_horizon: 40_000,
        }
    }
}

// Fields that determine the abstraction and controller.
#[derive(Serialize)]
struct ModelKey<'a> {
    circuit: [f64; 5],
    timing: [usize; 2],
    disturbance_radius: f64,
    a_on: &'a Option<[f64; 4]>,
    a_off: &'a Option<[f64; 4]>,
    k_on: &'a Option<[f64; 2]>,
    domain: [[f64; 2]; 2],
    target: [[f64; 2]; 2],
    x_init: [f64; 2],
    grid: [usize; 2],
    flags: [bool; 4],
}

impl RunConfig {
    /// Small contractive plant on a 6×6 grid over [0, 6]², with one on step
    /// and one grace step per cycle. Both actions are needed to stay in
    /// the target band.
    pub fn toy() -> Self {
        Self {
            n_dwell: 1,
            n_grace: 1,
            disturbance_radius: 0.05,
            a_on: Some([0.78, 0.03, -0.1, 0.58]),
            a_off: Some([0.79, 0.19, 0.18, 0.69]),
            k_on: Some([1.76, 1.8]),
            domain_x1: [0.0, 6.0],
            domain_x2: [0.0, 6.0],
            target_x1: [0.0, 6.0],
            target_x2: [1.0, 4.0],
            x_init: [0.3, 0.3],
            grid_n1: 6,
            grid_n2: 6,
            horizon: 2_000,
            baseline_n_on: 1,
            baseline_n_off_max: 20,
            baseline_horizon: 2_000,
            ..Default::default()
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// All keys, in declaration order.
    pub fn keys() -> Vec<String> {
        match toml::Value::try_from(RunConfig {
            a_on: Some([0.0; 4]),
            a_off: Some([0.0; 4]),
            k_on: Some([0.0; 2]),
            ..Default::default()
        }) {
            Ok(toml::Value::Table(t)) => t.keys().cloned().collect(),
            _ => unreachable!("config is a table"),
        }
    }

    /// Applies `key = value` overrides; values use TOML syntax, with bare
    /// words taken as strings and `a,b` as arrays.
    pub fn with_overrides<'a>(&self, overrides: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut table = match toml::Value::try_from(self).map_err(|e| Error::Config(e.to_string()))? {
            toml::Value::Table(t) => t,
            _ => unreachable!("config is a table"),
        };
        for (key, raw) in overrides {
            let key = key.replace('-', "_");
            let value = parse_value(raw)?;
            table.insert(key, value);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit().validate()?;
        self.timing().validate()?;
        DisturbanceBall::new(self.disturbance_radius)?;
        let domain = self.domain()?;
        let target = self.target()?;
        if !domain.contains(&target) {
            return Err(Error::Config("target is not contained in the domain".into()));
        }
        if !domain.contains_point(&self.x_init) {
            return Err(Error::Config("x_init is outside the domain".into()));
        }
        if self.grid_n1 == 0 || self.grid_n2 == 0 {
            return Err(Error::Config("grid sizes must be positive".into()));
        }
        if self.baseline_n_on == 0 || self.baseline_n_off_min == 0 || self.baseline_n_off_min > self.baseline_n_off_max {
            return Err(Error::Config("baseline search needs 1 <= n_off_min <= n_off_max and n_on >= 1".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !self.a_on.is_none_or(|m| finite(&m)) || !self.a_off.is_none_or(|m| finite(&m)) || !self.k_on.is_none_or(|k| finite(&k)) {
            return Err(Error::Config("plant overrides must be finite".into()));
        }
        self.grid()?;
        Ok(())
    }

    pub fn circuit(&self) -> CircuitParams {
        CircuitParams {
            c_out: self.c_out,
            l_out: self.l_out,
            r_load: self.r_load,
            v_in: self.v_in,
            t_sample: self.t_sample,
        }
    }

    pub fn timing(&self) -> DwellTiming {
        DwellTiming {
            n_dwell: self.n_dwell,
            n_grace: self.n_grace,
        }
    }

    pub fn domain(&self) -> Result<AxisBox> {
        AxisBox::from_intervals(&[
            (self.domain_x1[0], self.domain_x1[1]),
            (self.domain_x2[0], self.domain_x2[1]),
        ])
    }

    pub fn target(&self) -> Result<AxisBox> {
        AxisBox::from_intervals(&[
            (self.target_x1[0], self.target_x1[1]),
            (self.target_x2[0], self.target_x2[1]),
        ])
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::build(&self.domain()?, &self.target()?, self.grid_n1, self.grid_n2)
    }

    pub fn plant(&self) -> Result<DiscretePlant> {
        let radius = DisturbanceBall::new(self.disturbance_radius)?;
        let base = discretize(&self.circuit(), self.timing(), radius)?;
        let m = |v: [f64; 4]| Matrix2::new(v[0], v[1], v[2], v[3]);
        let a_on = self.a_on.map(m).unwrap_or(*base.a(crate::plant::Switch::On));
        let a_off = self.a_off.map(m).unwrap_or(*base.a(crate::plant::Switch::Off));
        let k_on = self
            .k_on
            .map(|k| Vector2::new(k[0], k[1]))
            .unwrap_or(base.k(crate::plant::Switch::On));
        DiscretePlant::new(a_on, a_off, k_on, self.timing(), radius)
    }

    pub fn abstraction_options(&self) -> AbstractionOptions {
        AbstractionOptions {
            intersect: if self.exact_intersection {
                IntersectMode::Exact
            } else {
                IntersectMode::Hull
            },
            literal_eq9: self.literal_eq9,
            strict_exit: self.strict_exit,
        }
    }

    pub fn settle_window(&self) -> usize {
        if self.settle_window == 0 {
            self.n_dwell + self.n_grace + 1
        } else {
            self.settle_window
        }
    }

    /// 64-bit hex digest of the fields that determine abstraction and
    /// controller.
    pub fn digest(&self) -> String {
        let key = ModelKey {
            circuit: [self.c_out, self.l_out, self.r_load, self.v_in, self.t_sample],
            timing: [self.n_dwell, self.n_grace],
            disturbance_radius: self.disturbance_radius,
            a_on: &self.a_on,
            a_off: &self.a_off,
            k_on: &self.k_on,
            domain: [self.domain_x1, self.domain_x2],
            target: [self.target_x1, self.target_x2],
            x_init: self.x_init,
            grid: [self.grid_n1, self.grid_n2],
            flags: [self.literal_eq9, self.strict_transient, self.strict_exit, self.exact_intersection],
        };
        hex64(serde_json::to_string(&key).expect("key serializes").as_bytes())
    }
}

/// First 8 bytes of the SHA-256 of `bytes`, as lowercase hex.
pub fn hex64(bytes: &[u8]) -> String {
    Sha256::digest(bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_value(raw: &str) -> Result<toml::Value> {
    let try_parse = |s: &str| -> Option<toml::Value> {
        let t: toml::Table = toml::from_str(&format!("v = {s}")).ok()?;
        t.get("v").cloned()
    };
    if let Some(v) = try_parse(raw) {
        return Ok(v);
    }
    if raw.contains(',') {
        if let Some(v) = try_parse(&format!("[{raw}]")) {
            return Ok(v);
        }
    }
    Ok(toml::Value::String(raw.to_string()))
}

//! Buck converter circuit model and its exact zero-order-hold discretization.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zonogeom::DisturbanceBall;

/// Position of the two power switches: `On` closes S1 (input connected),
/// `Off` closes S2 (freewheeling).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn as_str(self) -> &'static str {
        match self {
            Switch::On => "on",
            Switch::Off => "off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Output capacitance (F).
    pub c_out: f64,
    /// Output inductance (H).
    pub l_out: f64,
    /// Load resistance (Ω).
    pub r_load: f64,
    /// Input voltage (V).
    pub v_in: f64,
    /// Sampling period (s).
    pub t_sample: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            c_out: 2.5e-3,
            l_out: 2e-4,
            r_load: 0.5,
            v_in: 100.0,
            t_sample: 250e-9,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c_out", self.c_out),
            ("l_out", self.l_out),
            ("r_load", self.r_load),
            ("v_in", self.v_in),
            ("t_sample", self.t_sample),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and strictly positive, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Continuous-time state matrix for the state `(I, V)`.
    pub fn state_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(
            0.0,
            -1.0 / self.l_out,
            1.0 / self.c_out,
            -1.0 / (self.r_load * self.c_out),
        )
    }

    /// Continuous-time input offset; zero in the off position.
    pub fn offset(&self, switch: Switch) -> Vector2<f64> {
        match switch {
            Switch::On => Vector2::new(self.v_in / self.l_out, 0.0),
            Switch::Off => Vector2::zeros(),
        }
    }
}

/// Lengths (in samples) of the constant on-time and of the settling window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DwellTiming {
    pub n_dwell: usize,
    pub n_grace: usize,
}

impl Default for DwellTiming {
    fn default() -> Self {
        Self {
            n_dwell: 48,
            n_grace: 4,
        }
    }
}

impl DwellTiming {
    pub fn validate(&self) -> Result<()> {
        if self.n_grace < 1 || self.n_dwell < self.n_grace {
            return Err(Error::InvalidParameter {
                name: "n_dwell/n_grace",
                reason: format!(
                    "need n_dwell >= n_grace >= 1, got {}/{}",
                    self.n_dwell, self.n_grace
                ),
            });
        }
        Ok(())
    }

    /// Length of one full mode-1 cycle, `N_dwell + N_grace`.
    pub fn cycle(&self) -> usize {
        self.n_dwell + self.n_grace
    }
}

/// The switched discrete-time system `x(k+1) = A_s x(k) + K_s + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePlant {
    a_on: Matrix2<f64>,
    a_off: Matrix2<f64>,
    k_on: Vector2<f64>,
    timing: DwellTiming,
    disturbance: DisturbanceBall,
}

impl DiscretePlant {
    /// Builds a plant from explicit discrete matrices. The off offset is zero.
    pub fn new(
        a_on: Matrix2<f64>,
        a_off: Matrix2<f64>,
        k_on: Vector2<f64>,
        timing: DwellTiming,
        disturbance: DisturbanceBall,
    ) -> Result<Self> {
        timing.validate()?;
        if a_on.iter().chain(a_off.iter()).chain(k_on.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "plant",
                reason: "non-finite matrix entry".into(),
            });
        }
        Ok(Self {
            a_on,
            a_off,
            k_on,
            timing,
            disturbance,
        })
    }

    pub fn a(&self, switch: Switch) -> &Matrix2<f64> {
        match switch {
            Switch::On => &self.a_on,
            Switch::Off => &self.a_off,
        }
    }

    pub fn k(&self, switch: Switch) -> Vector2<f64> {
        match switch {
            Switch::On => self.k_on,
            Switch::Off => Vector2::zeros(),
        }
    }

    pub fn timing(&self) -> DwellTiming {
        self.timing
    }

    pub fn n_dwell(&self) -> usize {
        self.timing.n_dwell
    }

    pub fn n_grace(&self) -> usize {
        self.timing.n_grace
    }

    pub fn cycle(&self) -> usize {
        self.timing.cycle()
    }

    pub fn disturbance(&self) -> DisturbanceBall {
        self.disturbance
    }

    pub fn with_disturbance(mut self, disturbance: DisturbanceBall) -> Self {
        self.disturbance = disturbance;
        self
    }

    pub fn with_timing(mut self, timing: DwellTiming) -> Result<Self> {
        timing.validate()?;
        self.timing = timing;
        Ok(self)
    }

    pub(crate) fn affine_parts(&self, switch: Switch) -> (DMatrix<f64>, DVector<f64>) {
        let a = self.a(switch);
        let k = self.k(switch);
        (
            DMatrix::from_column_slice(2, 2, a.as_slice()),
            DVector::from_column_slice(k.as_slice()),
        )
    }

    /// One step of the switched dynamics. Rejects disturbances outside `D`.
    pub fn step(&self, x: Vector2<f64>, switch: Switch, d: Vector2<f64>) -> Result<Vector2<f64>> {
        if !self.disturbance.contains(d.as_slice()) {
            return Err(Error::DisturbanceOutsideBall {
                norm: d.abs().sum(),
                radius: self.disturbance.radius(),
            });
        }
        Ok(self.a(switch) * x + self.k(switch) + d)
    }

    /// Disturbance-free step.
    pub fn step_nominal(&self, x: Vector2<f64>, switch: Switch) -> Vector2<f64> {
        self.a(switch) * x + self.k(switch)
    }
}

/// Exact discretization at `t_sample`: `A_s = exp(A_c T)` and
/// `K_s = ∫₀ᵀ exp(A_c τ) dτ · B_s`, both read off one augmented exponential.
pub fn discretize(
    params: &CircuitParams,
    timing: DwellTiming,
    disturbance: DisturbanceBall,
) -> Result<DiscretePlant> {
    params.validate()?;
    let (a_on, k_on) = discretize_mode(params, Switch::On);
    let (a_off, _) = discretize_mode(params, Switch::Off);
    DiscretePlant::new(a_on, a_off, k_on, timing, disturbance)
}

fn discretize_mode(params: &CircuitParams, switch: Switch) -> (Matrix2<f64>, Vector2<f64>) {
    let a = params.state_matrix();
    let b = params.offset(switch);
    let t = params.t_sample;
    let aug = Matrix3::new(
        a[(0, 0)] * t,
        a[(0, 1)] * t,
        b[0] * t,
        a[(1, 0)] * t,
        a[(1, 1)] * t,
        b[1] * t,
        0.0,
        0.0,
        0.0,
    );
    let e = expm3(&aug);
    (
        Matrix2::new(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]),
        Vector2::new(e[(0, 2)], e[(1, 2)]),
    )
}

const TAYLOR_TERMS: usize = 18;

/// Matrix exponential by scaling and squaring with a fixed-length Taylor
/// series on the scaled matrix.
pub fn expm3(m: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = (0..3)
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings);
    let mut term = Matrix3::identity();
    let mut sum = Matrix3::identity();
    for i in 1..=TAYLOR_TERMS {
        term = term * scaled / i as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Largest eigenvalue modulus of a real 2x2 matrix.
pub fn spectral_radius2(m: &Matrix2<f64>) -> f64 {
    let tr = m.trace();
    let det = m.determinant();
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (0.5 * tr + s).abs().max((0.5 * tr - s).abs())
    } else {
        det.sqrt()
    }
}

//! Open-loop periodic switching: `N_on` on steps followed by `N_off` off
//! steps, analysed through the lifted periodic system whose state stacks the
//! plant state at every phase of the period.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hybrid::{Action, HybridTrace, TraceRecord};
use crate::plant::{spectral_radius2, DiscretePlant, Switch};
use crate::sim::sample_disturbance;

/// Switch position at absolute step `j` (1-based) of a period starting with
/// the on phase.
pub fn phase_switch(j: usize, n_on: usize, n_p: usize) -> Switch {
    if (j - 1) % n_p < n_on {
        Switch::On
    } else {
        Switch::Off
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPeriodicSystem {
    pub n_on: usize,
    pub n_off: usize,
    /// One-period map starting at phase `k + 1`.
    pub a_bar: Vec<Matrix2<f64>>,
    pub k_bar: Vec<Vector2<f64>>,
}

pub fn build_lifted(n_on: usize, n_off: usize, plant: &DiscretePlant) -> Result<LiftedPeriodicSystem> {
    if n_on == 0 || n_off == 0 {
        return Err(Error::InvalidParameter {
            name: "n_on/n_off",
            reason: "both phases need at least one step".into(),
        });
    }
    let n_p = n_on + n_off;
    let mut a_bar = Vec::with_capacity(n_p);
    let mut k_bar = Vec::with_capacity(n_p);
    for k in 1..=n_p {
        let mut a = Matrix2::identity();
        let mut c = Vector2::zeros();
        for j in k..k + n_p {
            let s = phase_switch(j, n_on, n_p);
            a = plant.a(s) * a;
            c = plant.a(s) * c + plant.k(s);
        }
        a_bar.push(a);
        k_bar.push(c);
    }
    Ok(LiftedPeriodicSystem {
        n_on,
        n_off,
        a_bar,
        k_bar,
    })
}

impl LiftedPeriodicSystem {
    pub fn period(&self) -> usize {
        self.n_on + self.n_off
    }

    /// Block-diagonal lifted matrix.
    pub fn lifted_matrix(&self) -> DMatrix<f64> {
        let n = 2 * self.period();
        let mut m = DMatrix::zeros(n, n);
        for (k, a) in self.a_bar.iter().enumerate() {
            m.fixed_view_mut::<2, 2>(2 * k, 2 * k).copy_from(a);
        }
        m
    }

    pub fn lifted_offset(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.period(), self.k_bar.iter().flat_map(|k| [k[0], k[1]]))
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius2(&self.a_bar[0])
    }

    /// Solves `(I - A) ξ = K`; returns `ξ` and the residual's max norm.
    pub fn equilibrium(&self) -> Result<(DVector<f64>, f64)> {
        let a = self.lifted_matrix();
        let k = self.lifted_offset();
        let lhs = DMatrix::identity(a.nrows(), a.ncols()) - &a;
        let xi = lhs.clone().lu().solve(&k).ok_or_else(|| Error::InvalidParameter {
            name: "n_off",
            reason: "lifted system has no unique equilibrium".into(),
        })?;
        let residual = (&lhs * &xi - &k).amax();
        Ok((xi, residual))
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CandidateReport {
    pub n_off: usize,
    pub spectral_radius: f64,
    pub stable: bool,
    pub eq_x2_min: Option<f64>,
    pub eq_x2_max: Option<f64>,
    pub residual: Option<f64>,
    pub in_target: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LineSearch {
    pub n_on: usize,
    /// Smallest feasible `N_off`, if any.
    pub chosen: Option<usize>,
    pub candidates: Vec<CandidateReport>,
}

/// Evaluates every `N_off` in `range`: stable one-period map and all
/// equilibrium voltages inside `[target_lo, target_hi]`.
pub fn line_search_noff(
    n_on: usize,
    range: std::ops::RangeInclusive<usize>,
    plant: &DiscretePlant,
    target_x2: (f64, f64),
) -> Result<LineSearch> {
    let candidates: Vec<CandidateReport> = range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n_off| -> Result<CandidateReport> {
            let sys = build_lifted(n_on, n_off, plant)?;
            let rho = sys.spectral_radius();
            let mut rep = CandidateReport {
                n_off,
                spectral_radius: rho,
                stable: rho < 1.0,
                eq_x2_min: None,
                eq_x2_max: None,
                residual: None,
                in_target: false,
            };
            if rep.stable {
                let (xi, res) = sys.equilibrium()?;
                let v: Vec<f64> = xi.iter().skip(1).step_by(2).copied().collect();
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                rep.eq_x2_min = Some(lo);
                rep.eq_x2_max = Some(hi);
                rep.residual = Some(res);
                rep.in_target = lo >= target_x2.0 && hi <= target_x2.1;
            }
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    let chosen = candidates.iter().find(|c| c.in_target).map(|c| c.n_off);
    Ok(LineSearch {
        n_on,
        chosen,
        candidates,
    })
}

/// Open-loop periodic switching from `x0`, starting with the on phase.
/// Rows use mode 1 for on steps and 2 for off steps; `t_d` holds the phase
/// position.
pub fn simulate_baseline<R: Rng + ?Sized>(
    n_on: usize,
    n_off: usize,
    plant: &DiscretePlant,
    x0: Vector2<f64>,
    horizon: usize,
    rng: &mut R,
) -> HybridTrace {
    let n_p = n_on + n_off;
    let r = plant.disturbance().radius();
    let mut x = x0;
    let mut trace = HybridTrace::default();
    for k in 0..horizon {
        let s = phase_switch(k + 1, n_on, n_p);
        trace.records.push(TraceRecord {
            k,
            mode: if s == Switch::On { Action::Cycle } else { Action::Hold },
            switch: s,
            action: None,
            x,
            x_hat: x,
            t_d: k % n_p + 1,
            belief: None,
        });
        x = plant.step_nominal(x, s) + sample_disturbance(rng, r);
    }
    trace
}

//! Splitting integrator for the nonlinear model and its linearization on
//! `T x [-P, P]`.

pub mod collision;
pub mod transport;

pub use crate::field::{DistributionField, PerturbationField, PhaseGrid};
pub use collision::step_collision;
pub use transport::{step_transport, Reconstruction};

use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsRecorder, DiagnosticsSeries};
use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use collision::{bernoulli_slope, interface_coefficients, Tridiagonal};
use transport::{advance_column, LinearFlux};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Splitting {
    /// `T(dt) C(dt)`.
    #[serde(rename = "splitting_order1")]
    Lie,
    /// `T(dt/2) C(dt) T(dt/2)`.
    #[default]
    #[serde(rename = "strang")]
    Strang,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Splitting,
    pub cfl_safety: f64,
    /// Diagnostics are recorded every `output_stride` steps.
    pub output_stride: usize,
    /// Fields are kept every `snapshot_stride` steps; `0` keeps none.
    pub snapshot_stride: usize,
    pub reconstruction: Reconstruction,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            t_end: 6.0,
            scheme: Splitting::Strang,
            cfl_safety: 0.9,
            output_stride: 10,
            snapshot_stride: 0,
            reconstruction: Reconstruction::FirstOrder,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if self.output_stride == 0 {
            return Err(Error::Config("output_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    fn step_size(&self, step: usize) -> f64 {
        (self.t_end - step as f64 * self.dt).min(self.dt)
    }

    /// Pre-run CFL check against a bound on the transport speed.
    pub fn check_cfl(&self, max_speed: f64, hx: f64) -> Result<()> {
        let cfl = self.dt * max_speed / hx;
        if cfl > self.cfl_safety {
            return Err(Error::Config(format!(
                "dt = {} violates the transport CFL condition (number {cfl:.4} > {})",
                self.dt, self.cfl_safety
            )));
        }
        Ok(())
    }
}

/// Linearization of the collision step at `f_inf`: the implicit matrix at
/// equilibrium plus the explicit variation of the frozen coefficients.
struct LinearCollision {
    m: Vec<f64>,
    z: Vec<f64>,
    lag: Vec<f64>,
    response: Vec<f64>,
}

impl LinearCollision {
    fn new(prof: &EquilibriumProfile, h: f64) -> Self {
        let kappa = prof.params.kappa();
        let f = &prof.f_inf;
        let (m, z) = interface_coefficients(f, &prof.p_grid, kappa);
        let lag = (0..m.len())
            .map(|k| m[k] / h * (-bernoulli_slope(-z[k]) * f[k + 1] - bernoulli_slope(z[k]) * f[k]))
            .collect();
        let response = f.iter().map(|f| kappa / (1.0 + kappa * f)).collect();
        LinearCollision { m, z, lag, response }
    }

    fn step_row(&self, delta: &mut [f64], weights: &[f64], h: f64, dt: f64) -> Result<()> {
        let n = delta.len();
        let mut jump = vec![0.0; n - 1];
        for k in 0..n - 1 {
            let dz = -(self.response[k + 1] * delta[k + 1] - self.response[k] * delta[k]);
            jump[k] = self.lag[k] * dz;
        }
        for i in 0..n {
            let right = if i + 1 < n { jump[i] } else { 0.0 };
            let left = if i > 0 { jump[i - 1] } else { 0.0 };
            delta[i] = weights[i] * delta[i] + dt * (right - left);
        }
        Tridiagonal::implicit(weights, &self.m, &self.z, h, dt).solve(delta)
    }
}

/// One splitting step for either flow.
pub struct Stepper<'a> {
    pub prof: &'a EquilibriumProfile,
    pub grid: &'a PhaseGrid,
    pub cfg: &'a SolverConfig,
    linear: LinearCollision,
    speeds: Vec<f64>,
    weights: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(prof: &'a EquilibriumProfile, grid: &'a PhaseGrid, cfg: &'a SolverConfig) -> Result<Self> {
        cfg.validate()?;
        grid.check_profile(prof)?;
        let sk = prof.params.sigma() * prof.params.kappa();
        let speeds = prof
            .p_grid
            .iter()
            .zip(&prof.f_inf)
            .map(|(p, f)| p * (1.0 + 2.0 * sk * f))
            .collect();
        Ok(Stepper {
            prof,
            grid,
            cfg,
            linear: LinearCollision::new(prof, grid.p.spacing()),
            speeds,
            weights: grid.p.weights(),
        })
    }

    fn sigma_kappa(&self) -> f64 {
        self.prof.params.sigma() * self.prof.params.kappa()
    }

    fn transport(&self, f: &DistributionField, dt: f64) -> Result<DistributionField> {
        step_transport(f, self.grid, self.sigma_kappa(), dt, self.cfg.cfl_safety, self.cfg.reconstruction)
    }

    pub fn step_nonlinear(&self, f: &DistributionField, dt: f64) -> Result<DistributionField> {
        let kappa = self.prof.params.kappa();
        let wrap = |e: Error| match e {
            Error::Abort(_) => e,
            other => Error::abort(f.time, other.to_string(), Some(f.clone())),
        };
        let mut next = match self.cfg.scheme {
            Splitting::Lie => {
                let t = self.transport(f, dt).map_err(wrap)?;
                step_collision(&t, self.grid, kappa, dt).map_err(wrap)?
            }
            Splitting::Strang => {
                let t = self.transport(f, 0.5 * dt).map_err(wrap)?;
                let c = step_collision(&t, self.grid, kappa, dt).map_err(wrap)?;
                self.transport(&c, 0.5 * dt).map_err(wrap)?
            }
        };
        next.time = f.time + dt;
        if let Err(e) = next.check_invariants(&self.prof.params) {
            return Err(Error::abort(next.time, e.to_string(), Some(f.clone())));
        }
        Ok(next)
    }

    fn transport_linear(&self, g: &mut PerturbationField, dt: f64) -> Result<()> {
        let hx = self.grid.x.spacing();
        let vmax = self.speeds.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cfl = dt * vmax / hx;
        if cfl > self.cfg.cfl_safety {
            return Err(Error::abort(0.0, format!("CFL violation: {cfl:.4} > {}", self.cfg.cfl_safety), None));
        }
        let ratio = dt / hx;
        let recon = self.cfg.reconstruction;
        g.values
            .axis_iter_mut(Axis(1))
            .into_par_iter()
            .enumerate()
            .for_each(|(j, mut col)| {
                let mut u = col.to_vec();
                advance_column(&mut u, &LinearFlux { v: self.speeds[j] }, ratio, recon);
                for (c, v) in col.iter_mut().zip(u) {
                    *c = v;
                }
            });
        Ok(())
    }

    fn collide_linear(&self, g: &mut PerturbationField, dt: f64) -> Result<()> {
        let s = &self.prof.sqrt_mu_inf;
        let h = self.grid.p.spacing();
        g.values.axis_iter_mut(Axis(0)).into_par_iter().try_for_each(|mut row| {
            let row = row.as_slice_mut().expect("standard layout");
            for (v, s) in row.iter_mut().zip(s) {
                *v *= s;
            }
            self.linear.step_row(row, &self.weights, h, dt)?;
            for (v, s) in row.iter_mut().zip(s) {
                *v /= s;
            }
            Ok(())
        })
    }

    pub fn step_linear(&self, g: &mut PerturbationField, dt: f64) -> Result<()> {
        match self.cfg.scheme {
            Splitting::Lie => {
                self.transport_linear(g, dt)?;
                self.collide_linear(g, dt)?;
            }
            Splitting::Strang => {
                self.transport_linear(g, 0.5 * dt)?;
                self.collide_linear(g, dt)?;
                self.transport_linear(g, 0.5 * dt)?;
            }
        }
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite perturbation value".into()));
        }
        Ok(())
    }
}

/// Output of [`evolve`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<DistributionField>,
    pub diagnostics: DiagnosticsSeries,
    pub final_state: DistributionField,
}

/// Output of [`evolve_linearized`].
#[derive(Clone, Debug)]
pub struct LinearTrajectory {
    pub snapshots: Vec<(f64, PerturbationField)>,
    pub diagnostics: DiagnosticsSeries,
    pub final_state: PerturbationField,
}

/// Runs the nonlinear model from `f0` to `cfg.t_end`. On failure the returned
/// [`Error::Abort`] carries the last valid state.
pub fn evolve(
    f0: &DistributionField,
    cfg: &SolverConfig,
    prof: &EquilibriumProfile,
    grid: &PhaseGrid,
    recorder: &DiagnosticsRecorder,
) -> Result<Trajectory> {
    let stepper = Stepper::new(prof, grid, cfg)?;
    f0.check_invariants(&prof.params)?;
    let mut f = f0.clone();
    let mut series = DiagnosticsSeries::default();
    let mut snapshots = Vec::new();
    recorder.record_nonlinear(&mut series, &f)?;
    if cfg.snapshot_stride > 0 {
        snapshots.push(f.clone());
    }
    let n = cfg.n_steps();
    for step in 0..n {
        let dt = cfg.step_size(step);
        f = stepper.step_nonlinear(&f, dt)?;
        let done = step + 1;
        if done % cfg.output_stride == 0 || done == n {
            recorder.record_nonlinear(&mut series, &f)?;
        }
        if cfg.snapshot_stride > 0 && (done % cfg.snapshot_stride == 0 || done == n) {
            snapshots.push(f.clone());
        }
    }
    Ok(Trajectory {
        snapshots,
        diagnostics: series,
        final_state: f,
    })
}

/// Runs `g_t + (1 + 2 sigma kappa f_inf) p g_x = L g` from `g0`.
pub fn evolve_linearized(
    g0: &PerturbationField,
    cfg: &SolverConfig,
    prof: &EquilibriumProfile,
    grid: &PhaseGrid,
    recorder: &DiagnosticsRecorder,
) -> Result<LinearTrajectory> {
    let stepper = Stepper::new(prof, grid, cfg)?;
    grid.check_shape(&g0.values)?;
    let g_inf = g0.global_equilibrium(grid, prof);
    let mut g = g0.clone();
    let mut t = 0.0;
    let mut series = DiagnosticsSeries::default();
    let mut snapshots = Vec::new();
    recorder.record_linear(&mut series, t, &g, &g_inf)?;
    if cfg.snapshot_stride > 0 {
        snapshots.push((t, g.clone()));
    }
    let n = cfg.n_steps();
    for step in 0..n {
        let dt = cfg.step_size(step);
        stepper.step_linear(&mut g, dt).map_err(|e| match e {
            Error::Abort(mut a) => {
                a.time = t;
                Error::Abort(a)
            }
            other => Error::abort(t, other.to_string(), None),
        })?;
        t += dt;
        let done = step + 1;
        if done % cfg.output_stride == 0 || done == n {
            recorder.record_linear(&mut series, t, &g, &g_inf)?;
        }
        if cfg.snapshot_stride > 0 && (done % cfg.snapshot_stride == 0 || done == n) {
            snapshots.push((t, g.clone()));
        }
    }
    Ok(LinearTrajectory {
        snapshots,
        diagnostics: series,
        final_state: g,
    })
}

//! Conservative periodic finite-volume transport in `x`, one momentum column at a time.

use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DistributionField, PhaseGrid};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    /// Piecewise constant states: first-order local Lax-Friedrichs.
    #[default]
    FirstOrder,
    /// Minmod-limited linear states with a two-stage SSP Runge-Kutta step.
    Minmod,
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Flux `F(u)` and local wave speed `|F'(u)|` of one column.
pub(crate) trait ColumnFlux: Sync {
    fn flux(&self, u: f64) -> f64;
    fn speed(&self, u: f64) -> f64;
}

/// `p (u + sigma kappa u^2)`.
pub(crate) struct QuantumFlux {
    pub p: f64,
    pub sk: f64,
}

impl ColumnFlux for QuantumFlux {
    fn flux(&self, u: f64) -> f64 {
        self.p * (u + self.sk * u * u)
    }
    fn speed(&self, u: f64) -> f64 {
        (self.p * (1.0 + 2.0 * self.sk * u)).abs()
    }
}

/// `v u`.
pub(crate) struct LinearFlux {
    pub v: f64,
}

impl ColumnFlux for LinearFlux {
    fn flux(&self, u: f64) -> f64 {
        self.v * u
    }
    fn speed(&self, _u: f64) -> f64 {
        self.v.abs()
    }
}

/// `u - dt/h (F_{i+1/2} - F_{i-1/2})` with the local Lax-Friedrichs interface flux.
fn llf_update<F: ColumnFlux>(u: &[f64], out: &mut [f64], flux: &F, ratio: f64, recon: Reconstruction) {
    let n = u.len();
    let at = |i: isize| u[i.rem_euclid(n as isize) as usize];
    let interface = |i: isize| -> f64 {
        // states left and right of the interface i + 1/2
        let (l, r) = match recon {
            Reconstruction::FirstOrder => (at(i), at(i + 1)),
            Reconstruction::Minmod => (
                at(i) + 0.5 * minmod(at(i) - at(i - 1), at(i + 1) - at(i)),
                at(i + 1) - 0.5 * minmod(at(i + 1) - at(i), at(i + 2) - at(i + 1)),
            ),
        };
        let alpha = flux.speed(l).max(flux.speed(r));
        0.5 * (flux.flux(l) + flux.flux(r)) - 0.5 * alpha * (r - l)
    };
    let fluxes: Vec<f64> = (0..n as isize).map(interface).collect();
    for i in 0..n {
        let left = fluxes[(i + n - 1) % n];
        out[i] = u[i] - ratio * (fluxes[i] - left);
    }
}

pub(crate) fn advance_column<F: ColumnFlux>(u: &mut [f64], flux: &F, ratio: f64, recon: Reconstruction) {
    let mut stage = vec![0.0; u.len()];
    llf_update(u, &mut stage, flux, ratio, recon);
    match recon {
        Reconstruction::FirstOrder => u.copy_from_slice(&stage),
        Reconstruction::Minmod => {
            let mut second = vec![0.0; u.len()];
            llf_update(&stage, &mut second, flux, ratio, recon);
            for (v, s) in u.iter_mut().zip(&second) {
                *v = 0.5 * (*v + s);
            }
        }
    }
}

/// Largest `|p (1 + 2 sigma kappa f)|` over the field.
pub fn max_speed(f: &DistributionField, grid: &PhaseGrid, sigma_kappa: f64) -> f64 {
    let p = grid.p.nodes();
    f.values
        .indexed_iter()
        .map(|((_, j), v)| (p[j] * (1.0 + 2.0 * sigma_kappa * v)).abs())
        .fold(0.0, f64::max)
}

/// Transport step for `f_t + p (f + sigma kappa f^2)_x = 0`. Aborts when the
/// CFL number `dt max|F'| / h_x` exceeds `cfl_safety`.
pub fn step_transport(
    f: &DistributionField,
    grid: &PhaseGrid,
    sigma_kappa: f64,
    dt: f64,
    cfl_safety: f64,
    recon: Reconstruction,
) -> Result<DistributionField> {
    grid.check_shape(&f.values)?;
    let hx = grid.x.spacing();
    let cfl = dt * max_speed(f, grid, sigma_kappa) / hx;
    if !(cfl <= cfl_safety) {
        return Err(Error::abort(
            f.time,
            format!("CFL violation: dt max|F'| / h_x = {cfl:.4} > {cfl_safety}"),
            Some(f.clone()),
        ));
    }
    let p = grid.p.nodes();
    let ratio = dt / hx;
    let mut values = f.values.clone();
    values
        .axis_iter_mut(Axis(1))
        .into_par_iter()
        .enumerate()
        .for_each(|(j, mut col)| {
            let mut u = col.to_vec();
            advance_column(&mut u, &QuantumFlux { p: p[j], sk: sigma_kappa }, ratio, recon);
            for (c, v) in col.iter_mut().zip(u) {
                *c = v;
            }
        });
    Ok(DistributionField { time: f.time, values })
}

//! Implicit Chang-Cooper step for `(f_p + p f (1 + kappa f))_p` on each spatial row.
//!
//! The interface flux is written as
//! `J = m [B(-z) f_{k+1} - B(z) f_k] / h` with the Bernoulli function `B`,
//! mobility `m = 1 + kappa (f_k + f_{k+1}) / 2` and the potential jump
//! `z = (p_{k+1}^2 - p_k^2)/2 - ln((1 + kappa f_{k+1})/(1 + kappa f_k))`,
//! where `m` and the logarithm are frozen at the old time level. `J` vanishes
//! identically on every sampled equilibrium, so the whole family of discrete
//! equilibria is stationary, and the implicit matrix is an M-matrix whose
//! column sums equal the trapezoid weights.

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{DistributionField, PhaseGrid};

/// `z / (e^z - 1)`.
pub fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// `B'(z)`.
pub fn bernoulli_slope(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        -0.5 + z / 6.0
    } else {
        let e = z.exp_m1();
        (e - z * (e + 1.0)) / (e * e)
    }
}

/// Interface coefficients frozen at one state: `(m, z)` per interface.
pub(crate) fn interface_coefficients(f: &[f64], p: &[f64], kappa: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let mut m = Vec::with_capacity(n - 1);
    let mut z = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        m.push(1.0 + 0.5 * kappa * (f[k] + f[k + 1]));
        let log_jump = if kappa == 0.0 {
            0.0
        } else {
            (kappa * f[k + 1]).ln_1p() - (kappa * f[k]).ln_1p()
        };
        z.push(0.5 * (p[k + 1] * p[k + 1] - p[k] * p[k]) - log_jump);
    }
    (m, z)
}

/// Tridiagonal system `A x = d` of one implicit step, stored by diagonals.
pub(crate) struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    /// `W - dt D` where `(D f)_i = J_{i+1/2} - J_{i-1/2}` with zero flux at the ends.
    pub fn implicit(weights: &[f64], m: &[f64], z: &[f64], h: f64, dt: f64) -> Self {
        let n = weights.len();
        let mut lower = vec![0.0; n];
        let mut diag = weights.to_vec();
        let mut upper = vec![0.0; n];
        for k in 0..n - 1 {
            let plus = dt * m[k] * bernoulli(-z[k]) / h;
            let minus = dt * m[k] * bernoulli(z[k]) / h;
            // J_k = plus/dt f_{k+1} - minus/dt f_k enters row k with +, row k+1 with -
            diag[k] += minus;
            upper[k] = -plus;
            diag[k + 1] += plus;
            lower[k + 1] = -minus;
        }
        Tridiagonal { lower, diag, upper }
    }

    /// Thomas algorithm; fails on a vanishing pivot.
    pub fn solve(&self, rhs: &mut [f64]) -> Result<()> {
        let n = rhs.len();
        let mut c = vec![0.0; n];
        let mut beta = self.diag[0];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Domain("singular collision matrix".into()));
        }
        rhs[0] /= beta;
        for i in 1..n {
            c[i - 1] = self.upper[i - 1] / beta;
            beta = self.diag[i] - self.lower[i] * c[i - 1];
            if beta == 0.0 || !beta.is_finite() {
                return Err(Error::Domain(format!("singular collision matrix at row {i}")));
            }
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= c[i] * rhs[i + 1];
        }
        Ok(())
    }
}

/// Collision step for one spatial row, in place.
pub fn collide_row(row: &mut [f64], p: &[f64], weights: &[f64], h: f64, kappa: f64, dt: f64) -> Result<()> {
    if kappa < 0.0 {
        if let Some(j) = row.iter().position(|&v| v >= 1.0) {
            return Err(Error::Domain(format!("fermionic occupation {} >= 1 at momentum node {j}", row[j])));
        }
    }
    let (m, z) = interface_coefficients(row, p, kappa);
    let a = Tridiagonal::implicit(weights, &m, &z, h, dt);
    for (v, w) in row.iter_mut().zip(weights) {
        *v *= w;
    }
    a.solve(row)
}

/// Applies [`collide_row`] to every row. Rows are independent, so the result
/// does not depend on the thread count.
pub fn step_collision(f: &DistributionField, grid: &PhaseGrid, kappa: f64, dt: f64) -> Result<DistributionField> {
    grid.check_shape(&f.values)?;
    let p = grid.p.nodes();
    let weights = grid.p.weights();
    let h = grid.p.spacing();
    let mut values: Array2<f64> = f.values.clone();
    values
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .try_for_each(|mut row| collide_row(row.as_slice_mut().expect("standard layout"), p, &weights, h, kappa, dt))?;
    Ok(DistributionField {
        time: f.time + dt,
        values,
    })
}

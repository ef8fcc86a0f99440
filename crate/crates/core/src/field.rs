//! Phase-space grids and fields on `T^1_x x [-P, P]_p`, stored x-major.

use ndarray::{Array1, Array2, Axis, Zip};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::grid::{MomentumGrid, TorusGrid};
use crate::params::ModelParams;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub x: TorusGrid,
    pub p: MomentumGrid,
}

impl PhaseGrid {
    pub fn new(n_x: usize, n_p: usize, params: &ModelParams) -> Result<Self> {
        Ok(PhaseGrid {
            x: TorusGrid::new(n_x, params.torus_length)?,
            p: MomentumGrid::uniform(n_p, params.p_max)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.len(), self.p.len())
    }

    pub fn check_shape(&self, values: &Array2<f64>) -> Result<()> {
        if values.dim() != self.shape() {
            return Err(Error::GridMismatch(format!(
                "field shape {:?} does not match grid {:?}",
                values.dim(),
                self.shape()
            )));
        }
        Ok(())
    }

    pub fn check_profile(&self, prof: &EquilibriumProfile) -> Result<()> {
        if prof.p_grid.as_slice() != self.p.nodes() {
            return Err(Error::GridMismatch("profile was tabulated on a different momentum grid".into()));
        }
        Ok(())
    }

    /// Trapezoid-in-p, rectangle-in-x quadrature (exact for trigonometric polynomials in x).
    pub fn integrate(&self, values: &Array2<f64>) -> f64 {
        let hx = self.x.spacing();
        values
            .axis_iter(Axis(0))
            .map(|row| self.p.integrate(row.as_slice().expect("standard layout")))
            .sum::<f64>()
            * hx
    }

    pub fn dot(&self, a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let hx = self.x.spacing();
        a.axis_iter(Axis(0))
            .zip(b.axis_iter(Axis(0)))
            .map(|(ra, rb)| self.p.dot(ra.as_slice().unwrap(), rb.as_slice().unwrap()))
            .sum::<f64>()
            * hx
    }

    pub fn norm_sq(&self, a: &Array2<f64>) -> f64 {
        self.dot(a, a)
    }

    /// Spectral `d/dx` applied to every momentum column.
    pub fn x_derivative(&self, values: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(values.dim());
        for (col, mut dst) in values.axis_iter(Axis(1)).zip(out.axis_iter_mut(Axis(1))) {
            let d = self.x.derivative(&col.to_vec());
            dst.assign(&Array1::from(d));
        }
        out
    }

    /// Stencil `d/dp` applied to every spatial row.
    pub fn p_derivative(&self, values: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(values.dim());
        for (row, mut dst) in values.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            self.p
                .derivative_into(row.as_slice().unwrap(), dst.as_slice_mut().unwrap());
        }
        out
    }
}

/// Particle distribution `f(t, x, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionField {
    pub time: f64,
    pub values: Array2<f64>,
}

impl DistributionField {
    pub fn equilibrium(prof: &EquilibriumProfile, grid: &PhaseGrid) -> Self {
        let (nx, np) = grid.shape();
        let f = Array1::from(prof.f_inf.clone());
        let mut values = Array2::zeros((nx, np));
        for mut row in values.axis_iter_mut(Axis(0)) {
            row.assign(&f);
        }
        DistributionField { time: 0.0, values }
    }

    /// Discrete mass `sum f w_x w_p`.
    pub fn mass(&self, grid: &PhaseGrid) -> f64 {
        grid.integrate(&self.values)
    }

    /// Nonnegativity, finiteness and the fermionic bound `f < 1`.
    pub fn check_invariants(&self, params: &ModelParams) -> Result<()> {
        let fermion = params.kappa() < 0.0;
        for ((i, j), &v) in self.values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::Domain(format!("non-finite value at cell ({i}, {j})")));
            }
            if v < 0.0 {
                return Err(Error::Domain(format!("negative density {v:e} at cell ({i}, {j})")));
            }
            if fermion && v >= 1.0 {
                return Err(Error::Domain(format!("fermionic occupation {v} >= 1 at cell ({i}, {j})")));
            }
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DistributionField) -> f64 {
        Zip::from(&self.values)
            .and(&other.values)
            .fold(0.0f64, |m, a, b| m.max((a - b).abs()))
    }
}

/// Weighted perturbation `g = mu_inf^{-1/2} (f - f_inf)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationField {
    pub values: Array2<f64>,
}

impl PerturbationField {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        PerturbationField {
            values: Array2::zeros(grid.shape()),
        }
    }

    pub fn from_distribution(f: &DistributionField, prof: &EquilibriumProfile) -> Self {
        let mut values = f.values.clone();
        for mut row in values.axis_iter_mut(Axis(0)) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - prof.f_inf[j]) / prof.sqrt_mu_inf[j];
            }
        }
        PerturbationField { values }
    }

    /// `f_inf + amplitude * sqrt(mu_inf) * g`.
    pub fn to_distribution(&self, prof: &EquilibriumProfile, amplitude: f64, time: f64) -> DistributionField {
        let mut values = self.values.clone();
        for mut row in values.axis_iter_mut(Axis(0)) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = prof.f_inf[j] + amplitude * prof.sqrt_mu_inf[j] * *v;
            }
        }
        DistributionField { time, values }
    }

    /// `cos(k x) He_n(p) sqrt(mu_inf(p))`, scaled to unit phase-space `L^2` norm.
    /// For `k >= 1` the weighted mass vanishes.
    pub fn fourier_hermite_mode(grid: &PhaseGrid, prof: &EquilibriumProfile, k: usize, n: usize) -> Self {
        let x = grid.x.nodes();
        let wave = 2.0 * std::f64::consts::PI * k as f64 / grid.x.length();
        let mut values = Array2::zeros(grid.shape());
        for (i, mut row) in values.axis_iter_mut(Axis(0)).enumerate() {
            let cx = (wave * x[i]).cos();
            for (j, v) in row.iter_mut().enumerate() {
                *v = cx * hermite(n, prof.p_grid[j]) * prof.sqrt_mu_inf[j];
            }
        }
        let mut g = PerturbationField { values };
        let norm = grid.norm_sq(&g.values).sqrt();
        g.values /= norm;
        g
    }

    /// `sum g sqrt(mu_inf) w_x w_p`, conserved by the linearized flow.
    pub fn weighted_mass(&self, grid: &PhaseGrid, prof: &EquilibriumProfile) -> f64 {
        let hx = grid.x.spacing();
        self.values
            .axis_iter(Axis(0))
            .map(|row| grid.p.dot(row.as_slice().unwrap(), &prof.sqrt_mu_inf))
            .sum::<f64>()
            * hx
    }

    /// Global equilibrium of the linearized flow: the constant multiple of
    /// `sqrt(mu_inf)` carrying the same weighted mass.
    pub fn global_equilibrium(&self, grid: &PhaseGrid, prof: &EquilibriumProfile) -> Self {
        let rho = grid.p.norm_sq(&prof.sqrt_mu_inf);
        let c = self.weighted_mass(grid, prof) / (rho * grid.x.length());
        let mut values = Array2::zeros(grid.shape());
        for mut row in values.axis_iter_mut(Axis(0)) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = c * prof.sqrt_mu_inf[j];
            }
        }
        PerturbationField { values }
    }

    /// Removes the global equilibrium component in place.
    pub fn remove_global_equilibrium(&mut self, grid: &PhaseGrid, prof: &EquilibriumProfile) {
        let eq = self.global_equilibrium(grid, prof);
        self.values -= &eq.values;
    }

    /// Zero-mean constraint `|sum g sqrt(mu) w| <= tol * ||g||`.
    pub fn is_mean_free(&self, grid: &PhaseGrid, prof: &EquilibriumProfile, tol: f64) -> bool {
        self.weighted_mass(grid, prof).abs() <= tol * grid.norm_sq(&self.values).sqrt()
    }
}

/// `sqrt(mu)(p) * sum_k c_k He_k(p) / sqrt(k!)` with standard normal `c_k`, `k <= degree`.
pub fn smooth_random_slice<R: Rng + ?Sized>(rng: &mut R, p: &[f64], sqrt_mu: &[f64], degree: usize) -> Vec<f64> {
    let coeffs: Vec<f64> = (0..=degree)
        .scan(1.0f64, |fact, k| {
            if k > 0 {
                *fact *= k as f64;
            }
            let c: f64 = rng.sample(StandardNormal);
            Some(c / fact.sqrt())
        })
        .collect();
    p.iter()
        .zip(sqrt_mu)
        .map(|(&p, s)| s * coeffs.iter().enumerate().map(|(k, c)| c * hermite(k, p)).sum::<f64>())
        .collect()
}

/// Probabilists' Hermite polynomial `He_n`.
pub fn hermite(n: usize, p: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, p);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = p * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

//! Entropy, norms, the hypocoercivity functional and decay-rate fits.

mod fit;
mod functional;

pub use fit::{fit_decay_rate, DecayReport, FitWindow};
pub use functional::{
    check_constraints, eval_functional, hypocoercivity_constants, monitor_hypocoercivity, select_coefficients,
    FunctionalCoefficients, HypocoercivityConstants, MonitorSample,
};

use std::io::{Read, Write};

use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::field::{DistributionField, PerturbationField, PhaseGrid};
use crate::linop::lambda_norm_sq_field;
use crate::params::ModelParams;

/// Entropy density without the kinetic term: `f ln f - kappa (1 + kappa f) ln(1 + kappa f)`.
fn entropy_density(f: f64, kappa: f64) -> f64 {
    let a = 1.0 + kappa * f;
    let fl = if f > 0.0 { f * f.ln() } else { 0.0 };
    let al = if a > 0.0 { a * a.ln() } else { 0.0 };
    fl - kappa * al
}

fn check_cell(v: f64, kappa: f64, i: usize, j: usize) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Domain(format!("invalid density {v} at cell ({i}, {j})")));
    }
    if kappa < 0.0 && v >= 1.0 {
        return Err(Error::Domain(format!("fermionic occupation {v} >= 1 at cell ({i}, {j})")));
    }
    Ok(())
}

/// `H[f] = sum (p^2/2 f + f ln f - kappa (1 + kappa f) ln(1 + kappa f)) w_x w_p`, with `0 ln 0 = 0`.
pub fn entropy(f: &DistributionField, grid: &PhaseGrid, params: &ModelParams) -> Result<f64> {
    grid.check_shape(&f.values)?;
    let kappa = params.kappa();
    let p = grid.p.nodes();
    let mut total = 0.0;
    for ((i, j), &v) in f.values.indexed_iter() {
        check_cell(v, kappa, i, j)?;
        total += grid.p.weight(j) * (0.5 * p[j] * p[j] * v + entropy_density(v, kappa));
    }
    Ok(total * grid.x.spacing())
}

/// `y ((1 + r) ln(1 + r) - r)` with `r = x/y - 1`, i.e. `x ln(x/y) - x + y`.
fn kl_term(x: f64, y: f64) -> f64 {
    let r = (x - y) / y;
    if r.abs() < 1e-2 {
        // sum_{n >= 2} (-r)^n / (n (n - 1))
        let mut acc = 0.0;
        let mut pow = r * r;
        for n in 2..12 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * pow / (n * (n - 1)) as f64;
            pow *= r;
        }
        y * acc
    } else if x == 0.0 {
        y
    } else {
        x * (x / y).ln() - x + y
    }
}

/// Relative entropy in Bregman form,
/// `sum [KL(f | f_inf) - kappa KL(1 + kappa f | 1 + kappa f_inf)] w_x w_p`.
/// Equals `H[f] - H[f_inf]` whenever both carry the same mass; every cell
/// contributes a nonnegative amount.
pub fn relative_entropy(f: &DistributionField, prof: &EquilibriumProfile, grid: &PhaseGrid) -> Result<f64> {
    grid.check_shape(&f.values)?;
    let kappa = prof.params.kappa();
    let mut total = 0.0;
    for ((i, j), &v) in f.values.indexed_iter() {
        check_cell(v, kappa, i, j)?;
        let fi = prof.f_inf[j];
        let mut d = kl_term(v, fi);
        if kappa != 0.0 {
            d -= kappa * kl_term(1.0 + kappa * v, 1.0 + kappa * fi);
        }
        total += grid.p.weight(j) * d;
    }
    Ok(total * grid.x.spacing())
}

/// `||mu_inf^{-1/2} (f - f_inf)||_{L^2}`.
pub fn weighted_l2(f: &DistributionField, prof: &EquilibriumProfile, grid: &PhaseGrid) -> Result<f64> {
    grid.check_shape(&f.values)?;
    let g = PerturbationField::from_distribution(f, prof);
    Ok(grid.norm_sq(&g.values).sqrt())
}

/// `||g||^2 + ||g_x||^2 + ||g_p||^2`.
pub fn h1_norm_sq(g: &PerturbationField, grid: &PhaseGrid) -> f64 {
    let gx = grid.x_derivative(&g.values);
    let gp = grid.p_derivative(&g.values);
    grid.norm_sq(&g.values) + grid.norm_sq(&gx) + grid.norm_sq(&gp)
}

pub const CSV_HEADER: [&str; 8] = ["t", "mass", "entropy", "rel_entropy", "w_l2", "h1", "lambda", "F"];

/// Time series recorded along a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub entropy: Vec<f64>,
    pub rel_entropy: Vec<f64>,
    pub w_l2: Vec<f64>,
    pub h1: Vec<f64>,
    pub lambda_n: Vec<f64>,
    pub f_functional: Vec<f64>,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn columns(&self) -> [&Vec<f64>; 8] {
        [
            &self.times,
            &self.mass,
            &self.entropy,
            &self.rel_entropy,
            &self.w_l2,
            &self.h1,
            &self.lambda_n,
            &self.f_functional,
        ]
    }

    fn columns_mut(&mut self) -> [&mut Vec<f64>; 8] {
        [
            &mut self.times,
            &mut self.mass,
            &mut self.entropy,
            &mut self.rel_entropy,
            &mut self.w_l2,
            &mut self.h1,
            &mut self.lambda_n,
            &mut self.f_functional,
        ]
    }

    /// Column by its CSV header name.
    pub fn column(&self, name: &str) -> Result<&[f64]> {
        CSV_HEADER
            .iter()
            .position(|h| *h == name)
            .map(|k| self.columns()[k].as_slice())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown diagnostics column {name:?}")))
    }

    pub fn push_row(&mut self, row: [f64; 8]) -> Result<()> {
        if let Some(k) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite diagnostic {} = {}", CSV_HEADER[k], row[k])));
        }
        for (col, v) in self.columns_mut().into_iter().zip(row) {
            col.push(v);
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let cols = self.columns();
        for i in 0..self.len() {
            w.write_record(cols.iter().map(|c| format!("{:.16e}", c[i])))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.iter().map(str::trim).ne(CSV_HEADER.iter().copied()) {
            return Err(Error::Parse(format!("unexpected diagnostics header {:?}", header)));
        }
        let mut series = DiagnosticsSeries::default();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let mut row = [0.0; 8];
            if rec.len() != 8 {
                return Err(Error::Parse(format!("row {} has {} fields", line + 2, rec.len())));
            }
            for (k, field) in rec.iter().enumerate() {
                row[k] = field
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("row {}, column {}: {e}", line + 2, CSV_HEADER[k])))?;
            }
            series.push_row(row)?;
        }
        Ok(series)
    }
}

/// Evaluates one diagnostics row for either flow.
pub struct DiagnosticsRecorder<'a> {
    pub prof: &'a EquilibriumProfile,
    pub grid: &'a PhaseGrid,
    pub coeffs: FunctionalCoefficients,
    /// `H[f_inf]` on the grid.
    pub h_inf: f64,
}

impl<'a> DiagnosticsRecorder<'a> {
    pub fn new(prof: &'a EquilibriumProfile, grid: &'a PhaseGrid, coeffs: FunctionalCoefficients) -> Result<Self> {
        grid.check_profile(prof)?;
        let eq = DistributionField::equilibrium(prof, grid);
        let h_inf = entropy(&eq, grid, &prof.params)?;
        Ok(DiagnosticsRecorder {
            prof,
            grid,
            coeffs,
            h_inf,
        })
    }

    fn norms(&self, g: &PerturbationField) -> Result<[f64; 4]> {
        let l2 = self.grid.norm_sq(&g.values).sqrt();
        let h1 = h1_norm_sq(g, self.grid).sqrt();
        let lam = lambda_norm_sq_field(&g.values, self.prof, self.grid)?.sqrt();
        let func = eval_functional(g, &self.coeffs, self.grid);
        Ok([l2, h1, lam, func])
    }

    /// Row for a state of the nonlinear model; the perturbation is measured against `f_inf`.
    pub fn record_nonlinear(&self, series: &mut DiagnosticsSeries, f: &DistributionField) -> Result<()> {
        let mass = f.mass(self.grid);
        let h = entropy(f, self.grid, &self.prof.params)?;
        let rel = relative_entropy(f, self.prof, self.grid)?;
        let g = PerturbationField::from_distribution(f, self.prof);
        let [l2, h1, lam, func] = self.norms(&g)?;
        series.push_row([f.time, mass, h, rel, l2, h1, lam, func])
    }

    /// Row for the linearized flow. Entropies are the quadratic entropy
    /// `H[f_inf] + ||g - g_inf||^2 / 2`; norms are those of `g - g_inf`, and the
    /// mass column is the conserved `sum g sqrt(mu_inf)`.
    pub fn record_linear(
        &self,
        series: &mut DiagnosticsSeries,
        t: f64,
        g: &PerturbationField,
        g_inf: &PerturbationField,
    ) -> Result<()> {
        let mass = g.weighted_mass(self.grid, self.prof);
        let d = PerturbationField {
            values: &g.values - &g_inf.values,
        };
        let [l2, h1, lam, func] = self.norms(&d)?;
        let rel = 0.5 * l2 * l2;
        series.push_row([t, mass, self.h_inf + rel, rel, l2, h1, lam, func])
    }
}

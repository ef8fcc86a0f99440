//! Linearized collision operator `L`, kernel projection, `Lambda_p` norms and
//! the quadratic remainder `Q` on the momentum grid.
//!
//! Slice operators act on one momentum row `g(x_i, .)`. Quadratic forms are
//! evaluated on interface midpoints (staggered differences), which keeps the
//! assembled matrices free of the checkerboard null mode of centered stencils.

mod gap;

pub use gap::{estimate_spectral_gap, CoercivityReport, GapRefinement, QuadraticForms};

use ndarray::{Array2, Axis};

use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::field::{PerturbationField, PhaseGrid};
use crate::grid::MomentumGrid;

fn check_slice(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<()> {
    if g.len() != grid.len() || prof.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "slice of length {} on a grid of {} nodes with a profile of {}",
            g.len(),
            grid.len(),
            prof.len()
        )));
    }
    if prof.p_grid.as_slice() != grid.nodes() {
        return Err(Error::GridMismatch("profile was tabulated on a different momentum grid".into()));
    }
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite value at momentum node {i}")));
    }
    Ok(())
}

/// Zeroth-order coefficient `d/2 eta - p^2 (1/4 + 2 kappa mu)`.
pub fn potential(prof: &EquilibriumProfile) -> Vec<f64> {
    let kappa = prof.params.kappa();
    let half_d = 0.5 * prof.params.dim as f64;
    prof.p_grid
        .iter()
        .zip(prof.mu_inf.iter().zip(&prof.eta_inf))
        .map(|(p, (mu, eta))| half_d * eta - p * p * (0.25 + 2.0 * kappa * mu))
        .collect()
}

/// `L g = g'' + V g`.
pub fn apply_l(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<Vec<f64>> {
    check_slice(g, prof, grid)?;
    let mut out = grid.second_derivative(g);
    for ((o, v), gi) in out.iter_mut().zip(potential(prof)).zip(g) {
        *o += v * gi;
    }
    Ok(out)
}

/// Divergence form `mu^{-1/2} (u' + p eta u)'` with `u = g sqrt(mu)`.
pub fn apply_l_divergence(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<Vec<f64>> {
    check_slice(g, prof, grid)?;
    let u: Vec<f64> = g.iter().zip(&prof.sqrt_mu_inf).map(|(g, s)| g * s).collect();
    let mut flux = grid.derivative(&u);
    for (i, fl) in flux.iter_mut().enumerate() {
        *fl += prof.p_grid[i] * prof.eta_inf[i] * u[i];
    }
    let div = grid.derivative(&flux);
    Ok(div.iter().zip(&prof.sqrt_mu_inf).map(|(d, s)| d / s).collect())
}

/// `-int |g' + (p/2) eta g|^2 dp`, evaluated on interfaces.
pub fn dirichlet_form(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<f64> {
    check_slice(g, prof, grid)?;
    let h = grid.spacing();
    let sum: f64 = g
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let r = (w[1] - w[0]) / h + 0.25 * prof.p_half[k] * prof.eta_half[k] * (w[0] + w[1]);
            r * r
        })
        .sum();
    Ok(-h * sum)
}

/// `-int |(g / sqrt(mu))'|^2 mu dp`, evaluated on interfaces.
pub fn weighted_dirichlet_form(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<f64> {
    check_slice(g, prof, grid)?;
    let h = grid.spacing();
    let u: Vec<f64> = g.iter().zip(&prof.sqrt_mu_inf).map(|(g, s)| g / s).collect();
    let sum: f64 = u
        .windows(2)
        .zip(&prof.mu_half)
        .map(|(w, mu)| {
            let d = (w[1] - w[0]) / h;
            mu * d * d
        })
        .sum();
    Ok(-h * sum)
}

/// Discrete `rho = <sqrt(mu), sqrt(mu)>`, so that the projection fixes `sqrt(mu)` exactly.
pub fn discrete_rho(prof: &EquilibriumProfile, grid: &MomentumGrid) -> f64 {
    grid.norm_sq(&prof.sqrt_mu_inf)
}

/// Orthogonal projection onto `span{sqrt(mu_inf)}`.
pub fn project_pi(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<Vec<f64>> {
    check_slice(g, prof, grid)?;
    let c = grid.dot(g, &prof.sqrt_mu_inf) / discrete_rho(prof, grid);
    Ok(prof.sqrt_mu_inf.iter().map(|s| c * s).collect())
}

/// `||g'||^2 + ||p eta g||^2`, derivative part on interfaces.
pub fn lambda_norm_sq(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<f64> {
    check_slice(g, prof, grid)?;
    let h = grid.spacing();
    let grad: f64 = g.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>() / h;
    let weighted: f64 = (0..g.len())
        .map(|i| {
            let v = prof.p_grid[i] * prof.eta_inf[i] * g[i];
            grid.weight(i) * v * v
        })
        .sum();
    Ok(grad + weighted)
}

pub fn lambda_norm(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<f64> {
    lambda_norm_sq(g, prof, grid).map(f64::sqrt)
}

/// Bilinear form `-<L h, g>` matching [`dirichlet_form`].
pub fn dirichlet_bilinear(h_: &[f64], g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<f64> {
    check_slice(h_, prof, grid)?;
    check_slice(g, prof, grid)?;
    let h = grid.spacing();
    let sum: f64 = (0..g.len() - 1)
        .map(|k| {
            let c = 0.5 * prof.p_half[k] * prof.eta_half[k];
            let a = (h_[k + 1] - h_[k]) / h + 0.5 * c * (h_[k] + h_[k + 1]);
            let b = (g[k + 1] - g[k]) / h + 0.5 * c * (g[k] + g[k + 1]);
            a * b
        })
        .sum();
    Ok(h * sum)
}

/// `V'` on interface midpoints.
pub(crate) fn potential_slope_half(prof: &EquilibriumProfile) -> Vec<f64> {
    let kappa = prof.params.kappa();
    let d = prof.params.dim as f64;
    (0..prof.p_half.len())
        .map(|k| {
            let (p, mu, eta) = (prof.p_half[k], prof.mu_half[k], prof.eta_half[k]);
            -d * kappa * p * mu - 0.5 * p - 4.0 * kappa * p * mu + 2.0 * kappa * p.powi(3) * mu * eta
        })
        .collect()
}

pub(crate) fn potential_half(prof: &EquilibriumProfile) -> Vec<f64> {
    let kappa = prof.params.kappa();
    let half_d = 0.5 * prof.params.dim as f64;
    (0..prof.p_half.len())
        .map(|k| {
            let p = prof.p_half[k];
            half_d * prof.eta_half[k] - p * p * (0.25 + 2.0 * kappa * prof.mu_half[k])
        })
        .collect()
}

/// Compact second difference with zero ghost values beyond `+-P`.
pub(crate) fn dirichlet_second_difference(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let at = |i: isize| if i < 0 || i >= n as isize { 0.0 } else { g[i as usize] };
    (0..n as isize)
        .map(|i| (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h))
        .collect()
}

/// `<(L g)', g'>` in symmetric form:
/// `-||g''||^2 + int V |g'|^2 + int V' g g'`.
pub fn mixed_form(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<f64> {
    check_slice(g, prof, grid)?;
    let h = grid.spacing();
    let d2 = dirichlet_second_difference(g, h);
    let curvature: f64 = (0..g.len()).map(|i| grid.weight(i) * d2[i] * d2[i]).sum();
    let v = potential_half(prof);
    let dv = potential_slope_half(prof);
    let rest: f64 = g
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let d = (w[1] - w[0]) / h;
            h * v[k] * d * d + 0.5 * dv[k] * (w[1] * w[1] - w[0] * w[0])
        })
        .sum();
    Ok(-curvature + rest)
}

/// `<(L g)', g'>` computed directly from [`apply_l`] on interfaces.
pub fn mixed_form_direct(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<f64> {
    let lg = apply_l(g, prof, grid)?;
    let h = grid.spacing();
    Ok((0..g.len() - 1)
        .map(|k| (lg[k + 1] - lg[k]) * (g[k + 1] - g[k]) / h)
        .sum())
}

/// `Lambda_p` norm of the interface gradient, the left side of the mixed bound.
pub fn gradient_lambda_norm_sq(g: &[f64], prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<f64> {
    check_slice(g, prof, grid)?;
    let h = grid.spacing();
    let grad = grid.interface_difference(g);
    let curv: f64 = grad.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>() / h;
    let weighted: f64 = grad
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let v = prof.p_half[k] * prof.eta_half[k] * d;
            h * v * v
        })
        .sum();
    Ok(curv + weighted)
}

fn for_each_row(g: &Array2<f64>, mut f: impl FnMut(&[f64], &mut [f64]) -> Result<()>) -> Result<Array2<f64>> {
    let mut out = Array2::zeros(g.dim());
    for (row, mut dst) in g.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
        f(row.as_slice().expect("standard layout"), dst.as_slice_mut().expect("standard layout"))?;
    }
    Ok(out)
}

/// [`apply_l`] on every spatial row.
pub fn apply_l_field(g: &Array2<f64>, prof: &EquilibriumProfile, grid: &PhaseGrid) -> Result<Array2<f64>> {
    grid.check_shape(g)?;
    for_each_row(g, |row, dst| {
        dst.copy_from_slice(&apply_l(row, prof, &grid.p)?);
        Ok(())
    })
}

/// Phase-space `Lambda` norm squared: the `L^2_x` aggregate of [`lambda_norm_sq`].
pub fn lambda_norm_sq_field(g: &Array2<f64>, prof: &EquilibriumProfile, grid: &PhaseGrid) -> Result<f64> {
    grid.check_shape(g)?;
    let mut total = 0.0;
    for row in g.axis_iter(Axis(0)) {
        total += lambda_norm_sq(row.as_slice().unwrap(), prof, &grid.p)?;
    }
    Ok(total * grid.x.spacing())
}

/// `Q(g) = (kappa / sqrt(mu)) ((p mu g^2)_p - sigma mu p (g^2)_x)`.
pub fn apply_q(g: &PerturbationField, prof: &EquilibriumProfile, grid: &PhaseGrid) -> Result<Array2<f64>> {
    grid.check_shape(&g.values)?;
    grid.check_profile(prof)?;
    let kappa = prof.params.kappa();
    let sigma = prof.params.sigma();
    if kappa == 0.0 {
        return Ok(Array2::zeros(g.values.dim()));
    }
    let sq = g.values.mapv(|v| v * v);
    let mut out = for_each_row(&sq, |row, dst| {
        let flux: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, v)| prof.p_grid[j] * prof.mu_inf[j] * v)
            .collect();
        grid.p.derivative_into(&flux, dst);
        for (j, d) in dst.iter_mut().enumerate() {
            *d *= kappa / prof.sqrt_mu_inf[j];
        }
        Ok(())
    })?;
    if sigma != 0.0 {
        let dx = grid.x_derivative(&sq);
        for (((_, j), o), d) in out.indexed_iter_mut().zip(dx.iter()) {
            *o -= kappa * sigma * prof.sqrt_mu_inf[j] * prof.p_grid[j] * d;
        }
    }
    Ok(out)
}

/// Right side of the full model, `(f_p + p f (1 + kappa f))_p - p (f + sigma kappa f^2)_x`.
pub fn model_rhs(f: &Array2<f64>, prof: &EquilibriumProfile, grid: &PhaseGrid) -> Result<Array2<f64>> {
    grid.check_shape(f)?;
    grid.check_profile(prof)?;
    let kappa = prof.params.kappa();
    let sigma = prof.params.sigma();
    let p = grid.p.nodes();
    let mut out = for_each_row(f, |row, dst| {
        let drift: Vec<f64> = row.iter().zip(p).map(|(f, p)| p * f * (1.0 + kappa * f)).collect();
        grid.p.second_derivative_into(row, dst);
        let dd = grid.p.derivative(&drift);
        for (d, e) in dst.iter_mut().zip(dd) {
            *d += e;
        }
        Ok(())
    })?;
    let flux = f.mapv(|v| v + sigma * kappa * v * v);
    let dx = grid.x_derivative(&flux);
    for ((o, d), j) in out.iter_mut().zip(dx.iter()).zip((0..f.len()).map(|k| k % grid.p.len())) {
        *o -= p[j] * d;
    }
    Ok(out)
}

/// `-(1 + 2 sigma kappa f_inf) p g_x + L g + Q g`.
pub fn perturbation_rhs(g: &PerturbationField, prof: &EquilibriumProfile, grid: &PhaseGrid) -> Result<Array2<f64>> {
    let mut out = apply_l_field(&g.values, prof, grid)?;
    out += &apply_q(g, prof, grid)?;
    let kappa = prof.params.kappa();
    let sigma = prof.params.sigma();
    let dx = grid.x_derivative(&g.values);
    let np = grid.p.len();
    for (k, (o, d)) in out.iter_mut().zip(dx.iter()).enumerate() {
        let j = k % np;
        *o -= (1.0 + 2.0 * sigma * kappa * prof.f_inf[j]) * prof.p_grid[j] * d;
    }
    Ok(out)
}

/// `mu^{-1/2} N(f_inf + sqrt(mu) g) - [-(1 + 2 sigma kappa f) p g_x + L g + Q g]`,
/// where `N` is [`model_rhs`]. Vanishes up to truncation error for smooth `g`.
pub fn linearization_residual(g: &PerturbationField, prof: &EquilibriumProfile, grid: &PhaseGrid) -> Result<Array2<f64>> {
    let f = g.to_distribution(prof, 1.0, 0.0);
    let mut full = model_rhs(&f.values, prof, grid)?;
    let np = grid.p.len();
    for (k, v) in full.iter_mut().enumerate() {
        *v /= prof.sqrt_mu_inf[k % np];
    }
    Ok(full - perturbation_rhs(g, prof, grid)?)
}

#[cfg(test)]
mod tests;

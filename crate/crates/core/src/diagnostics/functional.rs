//! The mixed functional `F[g] = a||g||^2 + b||g_x||^2 + c||g_p||^2 + d<g_x, g_p>`
//! and the ordered search for its coefficients.

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::field::{PerturbationField, PhaseGrid};
use crate::linop::{lambda_norm_sq_field, CoercivityReport};
use crate::threshold::damping_floor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Young parameter splitting the mixed term; not part of `F` itself.
    pub eta: f64,
}

impl FunctionalCoefficients {
    /// `F = ||g||^2_{H^1}` with no mixed term; used when no admissible set exists.
    pub const UNIT: FunctionalCoefficients = FunctionalCoefficients {
        alpha: 1.0,
        beta: 1.0,
        gamma: 1.0,
        delta: 0.0,
        eta: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.gamma, self.eta];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("coefficients must be positive: {self:?}")));
        }
        if !(self.delta * self.delta < self.beta * self.gamma) {
            return Err(Error::InvalidParameter(format!(
                "mixed coefficient too large: delta^2 = {} >= beta gamma = {}",
                self.delta * self.delta,
                self.beta * self.gamma
            )));
        }
        Ok(())
    }

    /// Same coefficients with `alpha, beta, gamma, delta` multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        FunctionalCoefficients {
            alpha: s * self.alpha,
            beta: s * self.beta,
            gamma: s * self.gamma,
            delta: s * self.delta,
            eta: self.eta,
        }
    }

    /// `(c_lo, c_hi)` with `c_lo ||g||^2_{H^1} <= F[g] <= c_hi ||g||^2_{H^1}`.
    pub fn equivalence_bounds(&self) -> (f64, f64) {
        // eigenvalues of [[beta, delta/2], [delta/2, gamma]]
        let mean = 0.5 * (self.beta + self.gamma);
        let rad = (0.25 * (self.beta - self.gamma).powi(2) + 0.25 * self.delta * self.delta).sqrt();
        (self.alpha.min(mean - rad), self.alpha.max(mean + rad))
    }
}

/// Discrete `F[g]` with spectral `x` and stencil `p` derivatives.
pub fn eval_functional(g: &PerturbationField, c: &FunctionalCoefficients, grid: &PhaseGrid) -> f64 {
    let gx = grid.x_derivative(&g.values);
    let gp = grid.p_derivative(&g.values);
    c.alpha * grid.norm_sq(&g.values)
        + c.beta * grid.norm_sq(&gx)
        + c.gamma * grid.norm_sq(&gp)
        + c.delta * grid.dot(&gx, &gp)
}

/// Derived constants entering the sign conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypocoercivityConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// `max_p |4 kappa sigma mu p^2 - 2 eta (1 + 2 kappa sigma f)|`.
    pub kc: f64,
    /// Torus Poincare constant `(L / 2 pi)^2`.
    pub c_t: f64,
}

pub fn hypocoercivity_constants(report: &CoercivityReport, prof: &EquilibriumProfile) -> Result<HypocoercivityConstants> {
    let params = &prof.params;
    let ks = params.kappa() * params.sigma();
    let kc = (0..prof.len())
        .map(|j| {
            let p = prof.p_grid[j];
            (4.0 * ks * prof.mu_inf[j] * p * p - 2.0 * prof.eta_inf[j] * (1.0 + 2.0 * ks * prof.f_inf[j])).abs()
        })
        .fold(0.0, f64::max);
    let c_t = (params.torus_length / (2.0 * std::f64::consts::PI)).powi(2);
    let k1 = report.c1;
    let k2 = kc * kc * report.l2_control / (4.0 * k1);
    let k3 = k2 + 2.0 * report.c2.max(0.0) * c_t;
    let k4 = damping_floor(params)?;
    Ok(HypocoercivityConstants { k1, k2, k3, k4, kc, c_t })
}

/// Re-checks the five sign conditions and names the first violated one.
pub fn check_constraints(
    c: &FunctionalCoefficients,
    report: &CoercivityReport,
    k: &HypocoercivityConstants,
) -> Result<()> {
    let checks = [
        (report.lambda * c.alpha - report.c2 * c.gamma, "lambda alpha - C2 gamma > 0"),
        (c.beta * report.lambda - report.c3 * c.eta * c.delta, "beta lambda - C3 eta delta > 0"),
        (k.k1 * c.gamma - 2.0 * report.c3 * c.delta / c.eta, "K1 gamma - 2 C3 delta / eta > 0"),
        (k.k4 * c.delta - k.k3 * c.gamma, "K4 delta - K3 gamma > 0"),
        (c.beta * c.gamma - c.delta * c.delta, "delta^2 < beta gamma"),
    ];
    for (i, (value, text)) in checks.iter().enumerate() {
        if !(*value > 0.0) {
            return Err(Error::Infeasible {
                index: i + 1,
                description: format!("{text} fails with value {value:e}"),
            });
        }
    }
    Ok(())
}

/// Ordered search: `gamma = 1`, then `delta`, `eta`, `beta`, `alpha`, each set
/// to twice its lower bound.
pub fn select_coefficients(report: &CoercivityReport, prof: &EquilibriumProfile) -> Result<FunctionalCoefficients> {
    let k = hypocoercivity_constants(report, prof)?;
    if !(k.k4 > 0.0) {
        return Err(Error::Infeasible {
            index: 4,
            description: format!(
                "K4 = {:e} is not positive: the transport damping floor vanishes (theta <= theta*)",
                k.k4
            ),
        });
    }
    if !(report.lambda > 0.0) {
        return Err(Error::Infeasible {
            index: 1,
            description: format!("spectral gap lambda = {:e} is not positive", report.lambda),
        });
    }
    if !(k.k1 > 0.0) {
        return Err(Error::Infeasible {
            index: 3,
            description: format!("K1 = {:e} is not positive", k.k1),
        });
    }
    let gamma = 1.0;
    let delta = if k.k3 > 0.0 { 2.0 * k.k3 * gamma / k.k4 } else { gamma };
    let eta = if report.c3 > 0.0 { 4.0 * report.c3 * delta / (k.k1 * gamma) } else { 1.0 };
    let beta = 2.0 * (report.c3 * eta * delta / report.lambda).max(delta * delta / gamma);
    let alpha = if report.c2 > 0.0 { 2.0 * report.c2 * gamma / report.lambda } else { 1.0 };
    let c = FunctionalCoefficients {
        alpha,
        beta,
        gamma,
        delta,
        eta,
    };
    check_constraints(&c, report, &k)?;
    Ok(c)
}

/// One interval of the hypocoercivity monitor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    /// Interval midpoint.
    pub t: f64,
    /// `F` at the right end of the interval.
    pub functional: f64,
    pub dfdt: f64,
    /// Mean of `||g||^2_Lambda + ||g_x||^2_Lambda + ||g_p||^2_Lambda` at the two ends.
    pub dissipation: f64,
    /// `-dF/dt / dissipation`.
    pub c_tilde: f64,
}

/// Finite-difference `dF/dt` between consecutive snapshots of a linearized run,
/// measured on `g - g_inf`.
pub fn monitor_hypocoercivity(
    snapshots: &[(f64, PerturbationField)],
    coeffs: &FunctionalCoefficients,
    prof: &EquilibriumProfile,
    grid: &PhaseGrid,
) -> Result<Vec<MonitorSample>> {
    let Some((_, first)) = snapshots.first() else {
        return Ok(Vec::new());
    };
    let g_inf = first.global_equilibrium(grid, prof);
    let eval = |g: &PerturbationField| -> Result<(f64, f64)> {
        let d = PerturbationField {
            values: &g.values - &g_inf.values,
        };
        let gx = grid.x_derivative(&d.values);
        let gp = grid.p_derivative(&d.values);
        let diss = lambda_norm_sq_field(&d.values, prof, grid)?
            + lambda_norm_sq_field(&gx, prof, grid)?
            + lambda_norm_sq_field(&gp, prof, grid)?;
        Ok((eval_functional(&d, coeffs, grid), diss))
    };
    let values = snapshots
        .iter()
        .map(|(t, g)| eval(g).map(|v| (*t, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(values
        .windows(2)
        .map(|w| {
            let (t0, (f0, d0)) = w[0];
            let (t1, (f1, d1)) = w[1];
            let dfdt = (f1 - f0) / (t1 - t0);
            let dissipation = 0.5 * (d0 + d1);
            MonitorSample {
                t: 0.5 * (t0 + t1),
                functional: f1,
                dfdt,
                dissipation,
                c_tilde: if dissipation > 0.0 { -dfdt / dissipation } else { 0.0 },
            }
        })
        .collect())
}

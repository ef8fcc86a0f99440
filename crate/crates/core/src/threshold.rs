//! Transport damping coefficient `Psi_kappa(p; theta) = 1 + 2 kappa f_inf - 2 kappa mu_inf |p|^2`
//! and the bosonic threshold `theta*` above which it stays positive.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::equilibrium::{occupation, scaling_weight};
use crate::error::{Error, Result};
use crate::params::{ModelParams, Statistics, Transport};

/// Scan range in `u = |p|^2`.
pub const SCAN_U_MAX: f64 = 50.0;
/// Scan resolution before local refinement.
pub const SCAN_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub theta_star: f64,
    /// `|p|^2` at which `Psi_1(.; theta*)` touches zero.
    pub tangent_p2: f64,
    /// The `theta` at which `psi_min` and `k4` were evaluated.
    pub theta: f64,
    pub psi_min: f64,
    /// Lower bound for `Psi` over all momenta at `theta`; positive means damping.
    #[serde(rename = "K4")]
    pub k4: f64,
}

impl ThresholdReport {
    /// Re-evaluates the infimum of `Psi_1` at another `theta`.
    pub fn at(&self, theta: f64) -> Result<Self> {
        let (psi_min, _) = psi_infimum(theta, Statistics::Boson)?;
        Ok(ThresholdReport {
            theta,
            psi_min,
            k4: certified_floor(psi_min),
            ..*self
        })
    }
}

fn check_inputs(theta: f64, statistics: Statistics) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("theta must be finite, got {theta}")));
    }
    if statistics == Statistics::Boson && theta <= 0.0 {
        return Err(Error::Domain(format!("Psi_1 needs theta > 0, got {theta}")));
    }
    Ok(())
}

fn psi_of_u(u: f64, theta: f64, kappa: f64) -> f64 {
    let f = occupation(0.5 * u + theta, kappa);
    1.0 + 2.0 * kappa * f - 2.0 * kappa * scaling_weight(f, kappa) * u
}

pub fn eval_psi(p: f64, theta: f64, statistics: Statistics) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::Domain(format!("momentum must be finite, got {p}")));
    }
    check_inputs(theta, statistics)?;
    Ok(psi_of_u(p * p, theta, statistics.kappa()))
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Dense scan of `h` on `u in [0, SCAN_U_MAX]` followed by golden-section
/// refinement around the smallest sample.
fn scan_min<F: Fn(f64) -> f64>(h: F) -> (f64, f64) {
    let du = SCAN_U_MAX / (SCAN_POINTS - 1) as f64;
    let (k, _) = (0..SCAN_POINTS)
        .map(|k| (k, h(k as f64 * du)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    let lo = k.saturating_sub(1) as f64 * du;
    let hi = ((k + 1).min(SCAN_POINTS - 1)) as f64 * du;
    let (u, v) = golden_min(&h, lo, hi);
    let at_node = h(k as f64 * du);
    if at_node < v {
        (k as f64 * du, at_node)
    } else {
        (u, v)
    }
}

/// Global infimum of `Psi_kappa(.; theta)`; returns `(psi_min, argmin |p|)`.
pub fn psi_infimum(theta: f64, statistics: Statistics) -> Result<(f64, f64)> {
    check_inputs(theta, statistics)?;
    let kappa = statistics.kappa();
    if kappa == 0.0 {
        return Ok((1.0, 0.0));
    }
    let (u, v) = scan_min(|u| psi_of_u(u, theta, kappa));
    Ok((v, u.sqrt()))
}

fn certified_floor(psi_min: f64) -> f64 {
    psi_min - 1e-9 * psi_min.abs().max(1.0)
}

/// `g(u, theta) = e^{u/2 + theta} - u - sqrt(u^2 + 1)`; `Psi_1` vanishes exactly where `g` does.
fn tangency_map(u: f64, theta: f64) -> f64 {
    (0.5 * u + theta).exp() - u - (u * u + 1.0).sqrt()
}

/// Newton iteration on `{g = 0, dg/du = 0}` from `(u, theta)`.
fn tangency_newton(mut u: f64, mut theta: f64) -> Option<(f64, f64)> {
    for _ in 0..60 {
        let e = (0.5 * u + theta).exp();
        let r = (u * u + 1.0).sqrt();
        let g = e - u - r;
        let gu = 0.5 * e - 1.0 - u / r;
        let (guu, gut, gt) = (0.25 * e - 1.0 / (r * r * r), 0.5 * e, e);
        let det = gu * gut - gt * guu;
        if !det.is_finite() || det == 0.0 {
            return None;
        }
        let du = (g * gut - gt * gu) / det;
        let dt = (gu * gu - guu * g) / det;
        u -= du;
        theta -= dt;
        if !(u.is_finite() && theta.is_finite()) || u < 0.0 {
            return None;
        }
        if du.abs() < 1e-15 * (1.0 + u) && dt.abs() < 1e-15 {
            return Some((u, theta));
        }
    }
    None
}

/// Fallback: bisection on `theta -> min_u g(u, theta)`, which changes sign at `theta*`.
pub fn theta_star_by_bisection() -> (f64, f64) {
    let (mut lo, mut hi) = (0.01, 2.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if scan_min(|u| tangency_map(u, mid)).1 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    (scan_min(|u| tangency_map(u, theta)).0, theta)
}

/// Solves for the bosonic critical `theta*`.
///
/// Along `g = 0` one has `theta = asinh(u) - u/2`; maximizing that reduced
/// map on the scan grid brackets the tangency, and a two-dimensional Newton
/// step on `(g, dg/du)` polishes it.
pub fn compute_theta_star() -> Result<ThresholdReport> {
    let (u0, neg_theta) = scan_min(|u| -(u.asinh() - 0.5 * u));
    let (u, theta_star) = tangency_newton(u0, -neg_theta).unwrap_or_else(theta_star_by_bisection);
    if !(theta_star > 0.0 && u > 0.0) {
        return Err(Error::RootFinding(format!("tangency solve returned u = {u}, theta = {theta_star}")));
    }
    let (psi_min, _) = psi_infimum(theta_star, Statistics::Boson)?;
    Ok(ThresholdReport {
        theta_star,
        tangent_p2: u,
        theta: theta_star,
        psi_min,
        k4: certified_floor(psi_min),
    })
}

/// Cached `theta*`.
pub fn theta_star() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| compute_theta_star().expect("theta* solve").theta_star)
}

/// Lower bound `K4` of `1 + 2 kappa sigma f_inf - 2 kappa sigma mu_inf |p|^2`,
/// the coefficient that damps `grad_x g` through the mixed term.
pub fn damping_floor(params: &ModelParams) -> Result<f64> {
    if params.transport == Transport::Linear || params.statistics == Statistics::Classical {
        return Ok(1.0);
    }
    let (psi_min, _) = psi_infimum(params.theta, params.statistics)?;
    Ok(certified_floor(psi_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Stationary point of `asinh(u) - u/2` is `u = sqrt 3`.
    fn closed_form() -> (f64, f64) {
        let u = 3f64.sqrt();
        (u, (2.0 + u).ln() - 0.5 * u)
    }

    /// Brute-force minimum over `10^5` nodes on `|p| in [0, sqrt 50]`.
    fn dense_min(theta: f64, kappa: f64) -> f64 {
        let n = 100_000;
        (0..n)
            .map(|k| {
                let p = 50f64.sqrt() * k as f64 / (n - 1) as f64;
                let f = 1.0 / ((0.5 * p * p + theta).exp() - kappa);
                1.0 + 2.0 * kappa * f - 2.0 * kappa * f * (1.0 + kappa * f) * p * p
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn psi_point_values() {
        assert_eq!(eval_psi(0.0, 0.0, Statistics::Fermion).unwrap(), 0.0);
        for &theta in &[0.1, 1.0, 3.0] {
            let far = eval_psi(8.0, theta, Statistics::Boson).unwrap();
            assert!((far - 1.0).abs() < 1e-8);
            assert!((eval_psi(8.0, theta, Statistics::Fermion).unwrap() - 1.0).abs() < 1e-8);
        }
        assert!(eval_psi(0.0, 0.0, Statistics::Boson).is_err());
        assert!(eval_psi(f64::INFINITY, 1.0, Statistics::Boson).is_err());
    }

    #[test]
    fn fermionic_psi_is_positive() {
        for k in 0..2000 {
            let p = 10.0 * k as f64 / 1999.0;
            assert!(eval_psi(p, 1.0, Statistics::Fermion).unwrap() > 0.0);
        }
        let (min, arg) = psi_infimum(0.5, Statistics::Fermion).unwrap();
        assert_eq!(arg, 0.0);
        assert_relative_eq!(min, 1.0 - 2.0 / (0.5f64.exp() + 1.0), max_relative = 1e-14);
    }

    #[test]
    fn bosonic_infimum_against_dense_scan() {
        let (at_one, _) = psi_infimum(1.0, Statistics::Boson).unwrap();
        assert!(at_one > 0.0 && dense_min(1.0, 1.0) > 0.0);
        assert!((at_one - dense_min(1.0, 1.0)).abs() < 1e-6);
        let (at_low, _) = psi_infimum(0.3, Statistics::Boson).unwrap();
        assert!(at_low < 0.0 && dense_min(0.3, 1.0) < 0.0);
        assert!(at_low <= dense_min(0.3, 1.0) + 1e-12);
    }

    #[test]
    fn theta_star_matches_tangency() {
        let report = compute_theta_star().unwrap();
        let (u, theta) = closed_form();
        assert!((report.theta_star - theta).abs() < 1e-12);
        assert!((report.tangent_p2 - u).abs() < 1e-9);
        assert!((report.theta_star - 0.451).abs() <= 0.002);
        assert!(report.psi_min.abs() < 1e-9);
        let (u_b, theta_b) = theta_star_by_bisection();
        assert!((theta_b - theta).abs() < 1e-10);
        assert!((u_b - u).abs() < 1e-4);
    }

    #[test]
    fn sign_change_at_theta_star() {
        let ts = theta_star();
        for delta in [1e-3, 1e-6] {
            assert!(psi_infimum(ts + delta, Statistics::Boson).unwrap().0 > 0.0);
            assert!(psi_infimum(ts - delta, Statistics::Boson).unwrap().0 < 0.0);
        }
        assert!(dense_min(ts + 1e-3, 1.0) > 0.0);
        assert!(dense_min(ts - 1e-3, 1.0) < 0.0);
    }

    #[test]
    fn report_at_other_theta() {
        let base = compute_theta_star().unwrap();
        let r = base.at(1.0).unwrap();
        assert_eq!(r.theta_star, base.theta_star);
        assert!(r.k4 > 0.0 && r.k4 <= r.psi_min && r.psi_min <= 1.0);
        assert!(base.at(0.4).unwrap().k4 < 0.0);
    }

    #[test]
    fn damping_floor_by_regime() {
        let linear = ModelParams::new(Statistics::Boson, Transport::Linear, 0.2);
        assert_eq!(damping_floor(&linear).unwrap(), 1.0);
        let hot = ModelParams::new(Statistics::Boson, Transport::Nonlinear, 1.0);
        assert!(damping_floor(&hot).unwrap() > 0.0);
        let cold = ModelParams::new(Statistics::Boson, Transport::Nonlinear, 0.4);
        assert!(damping_floor(&cold).unwrap() < 0.0);
        let fermi = ModelParams::new(Statistics::Fermion, Transport::Nonlinear, 0.1);
        assert!(damping_floor(&fermi).unwrap() > 0.0);
    }
}

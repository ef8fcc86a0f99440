//! Steady states of the kinetic model: Fermi-Dirac, regular Bose-Einstein and
//! Maxwellian profiles, the mass/theta correspondence and the bosonic
//! critical mass.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ui};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{ModelParams, Statistics};
use crate::quadrature::integrate;

const MASS_REL_TOL: f64 = 1e-10;

/// `1 / (exp(x) - kappa)` evaluated without cancellation near `x = 0` for bosons.
pub fn occupation(x: f64, kappa: f64) -> f64 {
    if kappa > 0.0 {
        1.0 / x.exp_m1()
    } else if kappa < 0.0 {
        1.0 / (x.exp() + 1.0)
    } else {
        (-x).exp()
    }
}

/// `f (1 + kappa f)`, the scaling weight `mu_inf` as a function of the occupation.
pub fn scaling_weight(f: f64, kappa: f64) -> f64 {
    f * (1.0 + kappa * f)
}

/// Equilibrium occupation at momentum `p`.
///
/// For `kappa = 0` the constant `theta` stands for `-log(M (2 pi)^(-d/2))` and the
/// result is the normalized Maxwellian. Fermions accept any real `theta` here;
/// evolution runs additionally require `theta > 0`.
pub fn eval_f_inf(p: &[f64], params: &ModelParams) -> Result<f64> {
    if p.len() != params.dim {
        return Err(Error::InvalidParameter(format!(
            "momentum has {} components, model dimension is {}",
            p.len(),
            params.dim
        )));
    }
    if !params.theta.is_finite() || p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite input to f_inf".into()));
    }
    if params.statistics == Statistics::Boson && params.theta <= 0.0 {
        return Err(Error::Domain(format!(
            "bosonic equilibrium is singular at p = 0 for theta = {} <= 0",
            params.theta
        )));
    }
    let p2: f64 = p.iter().map(|v| v * v).sum();
    Ok(occupation(0.5 * p2 + params.theta, params.kappa()))
}

fn sphere_area(dim: usize) -> f64 {
    let half = 0.5 * dim as f64;
    2.0 * PI.powf(half) / gamma(half)
}

/// `int_R^inf r^(d-1) exp(-k r^2 / 2) dr`.
fn gaussian_tail(dim: usize, k: f64, radius: f64) -> f64 {
    let half = 0.5 * dim as f64;
    0.5 * (2.0 / k).powf(half) * gamma_ui(half, 0.5 * k * radius * radius)
}

/// Radial integral `|S^(d-1)| int_0^inf r^(d-1) w(r^2/2 + theta) dr` where `w`
/// is the occupation (`power = 1`) or the scaling weight (`power = 2`).
///
/// Adaptive panels cover `[0, R]`; beyond `R` the geometric series of
/// Gaussians is summed in closed form.
fn radial_moment(theta: f64, params: &ModelParams, weight: Weight) -> Result<f64> {
    let kappa = params.kappa();
    let dim = params.dim;
    let radius = params.p_max.max((2.0 * (40.0 - theta)).max(0.0).sqrt());
    let d1 = (dim - 1) as i32;
    let integrand = |r: f64| {
        let f = occupation(0.5 * r * r + theta, kappa);
        let w = match weight {
            Weight::Occupation => f,
            Weight::Scaling => scaling_weight(f, kappa),
        };
        r.powi(d1) * w
    };
    let bulk = integrate(integrand, 0.0, radius, 0.1 * MASS_REL_TOL, 0.0)?;

    // f = sum_k kappa^(k-1) e^{-k x};  f(1 + kappa f) = sum_k k kappa^(k-1) e^{-k x}
    let mut tail = 0.0;
    for k in 1..=60 {
        let kf = k as f64;
        let coeff = match weight {
            Weight::Occupation => 1.0,
            Weight::Scaling => kf,
        } * kappa.powi(k - 1)
            * (-kf * theta).exp();
        let term = coeff * gaussian_tail(dim, kf, radius);
        tail += term;
        if kappa == 0.0 || term.abs() <= 1e-18 * bulk.value.abs() {
            break;
        }
    }
    Ok(sphere_area(dim) * (bulk.value + tail))
}

#[derive(Clone, Copy)]
enum Weight {
    Occupation,
    Scaling,
}

fn check_integrable(theta: f64, params: &ModelParams) -> Result<()> {
    params.check_basic_shape()?;
    if !theta.is_finite() {
        return Err(Error::Domain(format!("theta must be finite, got {theta}")));
    }
    if params.statistics == Statistics::Boson {
        let ok = theta > 0.0 || (theta == 0.0 && params.dim >= 3);
        if !ok {
            return Err(Error::Domain(format!(
                "bosonic mass integral diverges for theta = {theta} in dimension {}",
                params.dim
            )));
        }
    }
    Ok(())
}

/// Total phase-space mass `|T|^d int f_inf dp` of the equilibrium with constant `theta`.
pub fn mass_of_theta(theta: f64, params: &ModelParams) -> Result<f64> {
    check_integrable(theta, params)?;
    Ok(params.torus_volume() * radial_moment(theta, params, Weight::Occupation)?)
}

/// `rho_inf = int mu_inf dp`; also `-dM/dtheta` per unit torus volume.
pub fn rho_of_theta(theta: f64, params: &ModelParams) -> Result<f64> {
    check_integrable(theta, params)?;
    radial_moment(theta, params, Weight::Scaling)
}

/// Inverts [`mass_of_theta`]: bracketing bisection to `1e-6`, then a
/// safeguarded Newton polish to `1e-12`.
pub fn theta_of_mass(mass: f64, params: &ModelParams) -> Result<f64> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
    }
    params.check_basic_shape()?;
    let (mut lo, mut hi) = match params.statistics {
        Statistics::Boson => {
            if let CriticalMass::Finite(critical) = critical_mass(params)? {
                if mass >= critical {
                    return Err(Error::SupercriticalMass { mass, critical });
                }
                (0.0, 50.0)
            } else {
                (1e-10, 50.0)
            }
        }
        _ => (-50.0, 50.0),
    };
    let residual = |theta: f64| mass_of_theta(theta, params).map(|m| m - mass);
    let (mut r_lo, mut r_hi) = (residual(lo)?, residual(hi)?);
    // widen the bracket for very dense fermionic or very dilute states
    while r_hi > 0.0 && hi < 700.0 {
        lo = hi;
        hi = (2.0 * hi).min(700.0);
        r_hi = residual(hi)?;
    }
    while r_lo < 0.0 && params.statistics != Statistics::Boson && lo > -1e5 {
        hi = lo;
        lo *= 4.0;
        r_lo = residual(lo)?;
    }
    if r_lo < 0.0 || r_hi > 0.0 {
        return Err(Error::RootFinding(format!(
            "mass {mass} outside the bracket theta in [{lo}, {hi}]"
        )));
    }
    while hi - lo > 1e-6 * hi.abs().max(lo.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if residual(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..100 {
        let r = residual(theta)?;
        if r == 0.0 {
            return Ok(theta);
        }
        if r > 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let slope = -params.torus_volume() * rho_of_theta(theta, params)?;
        let mut next = theta - r / slope;
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - theta).abs();
        theta = next;
        if step <= 1e-13 * theta.abs().max(1.0) || hi - lo <= 1e-14 * theta.abs().max(1.0) {
            return Ok(theta);
        }
    }
    Err(Error::RootFinding(format!("Newton polish did not converge for mass {mass}")))
}

/// Largest mass a regular Bose-Einstein profile can carry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CriticalMass {
    Finite(f64),
    Infinite,
}

pub fn critical_mass(params: &ModelParams) -> Result<CriticalMass> {
    if params.statistics != Statistics::Boson {
        return Err(Error::InvalidParameter("critical mass is defined for bosons only".into()));
    }
    if params.dim <= 2 {
        return Ok(CriticalMass::Infinite);
    }
    mass_of_theta(0.0, params).map(CriticalMass::Finite)
}

/// Tabulated equilibrium on a symmetric momentum grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    pub params: ModelParams,
    pub p_grid: Vec<f64>,
    pub f_inf: Vec<f64>,
    pub mu_inf: Vec<f64>,
    pub eta_inf: Vec<f64>,
    pub sqrt_mu_inf: Vec<f64>,
    /// `int mu_inf dp` from adaptive quadrature.
    pub rho_inf: f64,
    /// Uniformly convex part `|p|^2 / 2` of `-ln mu_inf`.
    pub log_weight_convex: Vec<f64>,
    /// Bounded remainder of `-ln mu_inf`.
    pub log_weight_bounded: Vec<f64>,
    /// Interface midpoints and the equilibrium evaluated there.
    pub p_half: Vec<f64>,
    pub f_half: Vec<f64>,
    pub mu_half: Vec<f64>,
    pub eta_half: Vec<f64>,
}

impl EquilibriumProfile {
    pub fn build(params: &ModelParams, p_grid: &[f64]) -> Result<Self> {
        params.check_basic()?;
        if params.dim != 1 {
            return Err(Error::InvalidParameter(format!(
                "tabulated profiles are one-dimensional, got dim = {}",
                params.dim
            )));
        }
        let n = p_grid.len();
        if n < 4 {
            return Err(Error::GridMismatch(format!("need at least 4 momentum nodes, got {n}")));
        }
        if p_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch("momentum grid must be strictly increasing".into()));
        }
        let scale = p_grid[n - 1].abs().max(1.0);
        if (0..n).any(|i| (p_grid[i] + p_grid[n - 1 - i]).abs() > 1e-12 * scale) {
            return Err(Error::GridMismatch("momentum grid must be symmetric about 0".into()));
        }
        let kappa = params.kappa();
        let theta = params.theta;
        let at = |p: f64| {
            let f = occupation(0.5 * p * p + theta, kappa);
            (f, scaling_weight(f, kappa), 1.0 + 2.0 * kappa * f)
        };

        let mut prof = EquilibriumProfile {
            params: *params,
            p_grid: p_grid.to_vec(),
            f_inf: Vec::with_capacity(n),
            mu_inf: Vec::with_capacity(n),
            eta_inf: Vec::with_capacity(n),
            sqrt_mu_inf: Vec::with_capacity(n),
            rho_inf: rho_of_theta(theta, params)?,
            log_weight_convex: Vec::with_capacity(n),
            log_weight_bounded: Vec::with_capacity(n),
            p_half: Vec::with_capacity(n - 1),
            f_half: Vec::with_capacity(n - 1),
            mu_half: Vec::with_capacity(n - 1),
            eta_half: Vec::with_capacity(n - 1),
        };
        for &p in p_grid {
            let (f, mu, eta) = at(p);
            let x = 0.5 * p * p + theta;
            prof.f_inf.push(f);
            prof.mu_inf.push(mu);
            prof.eta_inf.push(eta);
            prof.sqrt_mu_inf.push(mu.sqrt());
            prof.log_weight_convex.push(0.5 * p * p);
            prof.log_weight_bounded.push(theta + 2.0 * log_one_minus(kappa, x));
        }
        for w in p_grid.windows(2) {
            let p = 0.5 * (w[0] + w[1]);
            let (f, mu, eta) = at(p);
            prof.p_half.push(p);
            prof.f_half.push(f);
            prof.mu_half.push(mu);
            prof.eta_half.push(eta);
        }
        Ok(prof)
    }

    pub fn len(&self) -> usize {
        self.p_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_grid.is_empty()
    }

    /// `min_p (1/4 + 2 kappa mu_inf)` over the grid.
    pub fn quarter_shift_min(&self) -> f64 {
        let kappa = self.params.kappa();
        self.mu_inf
            .iter()
            .map(|mu| 0.25 + 2.0 * kappa * mu)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `ln(1 - kappa e^{-x})`.
fn log_one_minus(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        (-(-x).exp_m1()).ln()
    } else if kappa < 0.0 {
        (-x).exp().ln_1p()
    } else {
        0.0
    }
}

impl ModelParams {
    pub(crate) fn check_basic_shape(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(self.p_max.is_finite() && self.p_max > 0.0) {
            return Err(Error::InvalidParameter(format!("p_max must be positive, got {}", self.p_max)));
        }
        if !(self.torus_length.is_finite() && self.torus_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "torus_length must be positive, got {}",
                self.torus_length
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Transport;
    use approx::assert_relative_eq;

    const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

    fn params(stats: Statistics, theta: f64) -> ModelParams {
        ModelParams::new(stats, Transport::Linear, theta)
    }

    /// `|T| sqrt(2 pi) sum_k kappa^(k-1) e^{-k theta} / sqrt(k)` in one dimension.
    fn polylog_mass(kappa: f64, theta: f64, volume: f64) -> f64 {
        let mut sum = 0.0;
        for k in 1..400 {
            let kf = k as f64;
            sum += kappa.powi(k - 1) * (-kf * theta).exp() / kf.sqrt();
        }
        volume * SQRT_2PI * sum
    }

    #[test]
    fn pointwise_values() {
        let fermi = params(Statistics::Fermion, 0.0);
        assert_eq!(eval_f_inf(&[0.0], &fermi).unwrap(), 0.5);
        let bose = params(Statistics::Boson, 1.0);
        assert_relative_eq!(eval_f_inf(&[0.0], &bose).unwrap(), 1.0 / (1f64.exp() - 1.0), max_relative = 1e-15);
        assert_relative_eq!(eval_f_inf(&[0.0], &bose).unwrap(), 0.5820, epsilon = 1e-4);
        // M = (2 pi)^(1/2) per unit torus volume gives theta = 0 and f(0) = 1
        let maxwell = params(Statistics::Classical, 0.0);
        assert_eq!(eval_f_inf(&[0.0], &maxwell).unwrap(), 1.0);
        let p = 1.3;
        assert_relative_eq!(
            eval_f_inf(&[p], &maxwell).unwrap(),
            (-0.5 * p * p).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn pointwise_errors() {
        let bose = params(Statistics::Boson, 0.0);
        assert!(matches!(eval_f_inf(&[0.3], &bose), Err(Error::Domain(_))));
        let fermi = params(Statistics::Fermion, 1.0);
        assert!(eval_f_inf(&[f64::NAN], &fermi).is_err());
        assert!(eval_f_inf(&[0.0, 1.0], &fermi).is_err());
        // fermions accept theta <= 0 for pointwise evaluation
        assert!(eval_f_inf(&[0.0], &params(Statistics::Fermion, -3.0)).unwrap() > 0.9);
    }

    #[test]
    fn maxwellian_mass() {
        let p = params(Statistics::Classical, 0.0);
        let m = mass_of_theta(0.0, &p).unwrap();
        assert_relative_eq!(m, 2.0 * PI * SQRT_2PI, max_relative = 1e-12);
    }

    #[test]
    fn bosonic_mass_matches_polylog_series() {
        let p = params(Statistics::Boson, 1.0);
        let oracle = polylog_mass(1.0, 1.0, 2.0 * PI);
        let m = mass_of_theta(1.0, &p).unwrap();
        assert_relative_eq!(m, oracle, max_relative = 1e-10);
        // fixture T1, frozen from a 30-digit polylog evaluation
        assert_relative_eq!(m, 7.969_777_008_785_903, max_relative = 1e-10);
    }

    #[test]
    fn fermionic_mass_matches_polylog_series() {
        for &theta in &[0.2, 1.0, 3.0] {
            let p = params(Statistics::Fermion, theta);
            let oracle = polylog_mass(-1.0, theta, 2.0 * PI);
            assert_relative_eq!(mass_of_theta(theta, &p).unwrap(), oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn mass_is_decreasing_in_theta() {
        for stats in [Statistics::Fermion, Statistics::Boson, Statistics::Classical] {
            let p = params(stats, 1.0);
            let thetas = [0.05, 0.5, 1.0, 2.0, 7.0];
            let masses: Vec<f64> = thetas.iter().map(|&t| mass_of_theta(t, &p).unwrap()).collect();
            assert!(masses.windows(2).all(|w| w[0] > w[1]), "{stats:?}: {masses:?}");
        }
    }

    #[test]
    fn theta_round_trip() {
        let bose = params(Statistics::Boson, 1.0);
        let t1 = mass_of_theta(1.0, &bose).unwrap();
        let theta = theta_of_mass(t1, &bose).unwrap();
        assert!((theta - 1.0).abs() <= 1e-8);
        for stats in [Statistics::Fermion, Statistics::Boson, Statistics::Classical] {
            let p = params(stats, 1.0);
            for &m in &[0.3, 4.0, 40.0, 300.0] {
                let theta = theta_of_mass(m, &p).unwrap();
                let back = mass_of_theta(theta, &p).unwrap();
                assert!(((back - m) / m).abs() <= 1e-8, "{stats:?} M={m}: {back}");
            }
        }
    }

    #[test]
    fn maxwellian_theta_closed_form() {
        let p = params(Statistics::Classical, 0.0).with_torus_length(1.0);
        for &m in &[0.1, 1.0, SQRT_2PI, 17.0] {
            let theta = theta_of_mass(m, &p).unwrap();
            assert!((theta + (m / SQRT_2PI).ln()).abs() < 1e-9, "{m}: {theta} vs {}", -(m / SQRT_2PI).ln());
        }
        assert!(theta_of_mass(SQRT_2PI, &p).unwrap().abs() < 1e-9);
    }

    #[test]
    fn fermions_reach_negative_theta() {
        let p = params(Statistics::Fermion, 1.0);
        let big = mass_of_theta(-5.0, &p).unwrap();
        assert!((theta_of_mass(big, &p).unwrap() + 5.0).abs() < 1e-8);
        assert!(theta_of_mass(0.0, &p).is_err());
        assert!(theta_of_mass(-1.0, &p).is_err());
    }

    #[test]
    fn critical_mass_by_dimension() {
        let p1 = params(Statistics::Boson, 1.0);
        assert_eq!(critical_mass(&p1).unwrap(), CriticalMass::Infinite);
        assert_eq!(critical_mass(&p1.with_dim(2)).unwrap(), CriticalMass::Infinite);
        assert!(critical_mass(&params(Statistics::Fermion, 1.0)).is_err());
        // (2 pi)^3 (2 pi)^(3/2) zeta(3/2)
        const ZETA_3_2: f64 = 2.612_375_348_685_488_3;
        let expected = (2.0 * PI).powi(3) * (2.0 * PI).powf(1.5) * ZETA_3_2;
        match critical_mass(&p1.with_dim(3)).unwrap() {
            CriticalMass::Finite(m) => assert_relative_eq!(m, expected, max_relative = 1e-8),
            CriticalMass::Infinite => panic!("finite in 3D"),
        }
    }

    #[test]
    fn supercritical_mass_is_rejected() {
        let p = params(Statistics::Boson, 1.0).with_dim(3);
        let CriticalMass::Finite(mc) = critical_mass(&p).unwrap() else { unreachable!() };
        assert!(matches!(theta_of_mass(1.01 * mc, &p), Err(Error::SupercriticalMass { .. })));
        let theta = theta_of_mass(0.5 * mc, &p).unwrap();
        assert!(theta > 0.0);
    }

    #[test]
    fn boson_divergence_is_a_domain_error() {
        let p = params(Statistics::Boson, 1.0);
        assert!(matches!(mass_of_theta(0.0, &p), Err(Error::Domain(_))));
        assert!(matches!(mass_of_theta(-0.1, &p.with_dim(3)), Err(Error::Domain(_))));
    }

    fn odd_grid(n: usize, p_max: f64) -> Vec<f64> {
        (0..n).map(|i| -p_max + 2.0 * p_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn profile_fields() {
        let grid = odd_grid(129, 8.0);
        let prof = EquilibriumProfile::build(&params(Statistics::Fermion, 0.0).with_p_max(8.0), &grid);
        // theta = 0 fermions: still tabulated (pointwise use), centre node
        let prof = prof.unwrap();
        assert_eq!(prof.f_inf[64], 0.5);
        assert_eq!(prof.mu_inf[64], 0.25);
        assert_eq!(prof.eta_inf[64], 0.0);

        let bose = EquilibriumProfile::build(&params(Statistics::Boson, 1.0), &grid).unwrap();
        assert!(bose.eta_inf.iter().all(|&e| e > 1.0));
        assert!(bose.f_inf.iter().all(|&f| f > 0.0));
    }

    #[test]
    fn log_weight_decomposition() {
        let grid = odd_grid(257, 8.0);
        for (stats, theta) in [(Statistics::Fermion, 0.7), (Statistics::Boson, 0.3), (Statistics::Classical, 1.2)] {
            let prof = EquilibriumProfile::build(&params(stats, theta), &grid).unwrap();
            for i in 0..grid.len() {
                let a = -prof.mu_inf[i].ln();
                let sum = prof.log_weight_convex[i] + prof.log_weight_bounded[i];
                assert!(((sum - a) / a.abs().max(1e-300)).abs() <= 1e-12, "{stats:?} p={}", grid[i]);
            }
            let tail = *prof.log_weight_bounded.last().unwrap();
            assert!((tail - theta).abs() < 1e-8);
            assert!(prof.log_weight_bounded.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn fermionic_bounds_on_refined_grids() {
        for n in [65, 257, 1025] {
            let grid = odd_grid(n, 8.0);
            let prof = EquilibriumProfile::build(&params(Statistics::Fermion, 0.4), &grid).unwrap();
            let fmax = prof.f_inf.iter().cloned().fold(0.0, f64::max);
            let emin = prof.eta_inf.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(fmax, prof.f_inf[n / 2]);
            assert!(fmax < 0.5 && emin > 0.0);
            assert_eq!(emin, prof.eta_inf[n / 2]);
        }
    }

    #[test]
    fn quarter_shift_positivity() {
        let grid = odd_grid(257, 8.0);
        for (stats, theta) in [(Statistics::Boson, 0.1), (Statistics::Boson, 1.0), (Statistics::Classical, 0.0), (Statistics::Fermion, 2.0)] {
            let prof = EquilibriumProfile::build(&params(stats, theta), &grid).unwrap();
            assert!(prof.quarter_shift_min() > 0.0, "{stats:?} {theta}");
        }
        // 1/4 - 2 mu_inf(0) changes sign at theta = ln(3 + 2 sqrt 2) for fermions
        let edge = (3.0 + 2.0 * 2f64.sqrt()).ln();
        let below = EquilibriumProfile::build(&params(Statistics::Fermion, edge - 1e-3), &grid).unwrap();
        let above = EquilibriumProfile::build(&params(Statistics::Fermion, edge + 1e-3), &grid).unwrap();
        assert!(below.quarter_shift_min() < 0.0 && above.quarter_shift_min() > 0.0);
    }

    #[test]
    fn profile_rejects_bad_grids() {
        let p = params(Statistics::Fermion, 1.0);
        assert!(EquilibriumProfile::build(&p, &[-1.0, 0.0, 0.5, 1.0]).is_err());
        assert!(EquilibriumProfile::build(&p, &[-1.0, 0.0, 0.0, 1.0]).is_err());
        let rho = EquilibriumProfile::build(&p, &odd_grid(33, 8.0)).unwrap().rho_inf;
        assert!(rho > 0.0);
    }
}

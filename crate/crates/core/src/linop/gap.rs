//! Dense assembly of the discrete quadratic forms and the generalized
//! eigenproblems behind the coercivity constants.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{potential_half, potential_slope_half};
use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::grid::MomentumGrid;
use crate::params::ModelParams;

/// Fixed mixed-bound constant: half of the large-`|p|` ratio `1/4` between
/// `-<(Lg)', g'>` and `||g'||^2_Lambda`.
pub const MIXED_C1: f64 = 0.125;

/// Symmetric matrices of the momentum quadratic forms. All vectors are nodal
/// values `g_0 .. g_{N-1}`.
#[derive(Clone, Debug)]
pub struct QuadraticForms {
    /// `-<L g, g>` (interface form).
    pub dissipation: DMatrix<f64>,
    /// `||g||^2_Lambda`.
    pub lambda: DMatrix<f64>,
    /// Trapezoid weights, the `L^2` Gram matrix diagonal.
    pub mass: DVector<f64>,
    /// `int |(g / sqrt(mu))'|^2 mu`.
    pub poincare: DMatrix<f64>,
    /// `<(L g)', g'>`.
    pub mixed: DMatrix<f64>,
    /// `||g'||^2_Lambda`.
    pub gradient_lambda: DMatrix<f64>,
}

fn add_outer(m: &mut DMatrix<f64>, idx: &[usize], coef: &[f64], weight: f64) {
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            m[(i, j)] += weight * coef[a] * coef[b];
        }
    }
}

impl QuadraticForms {
    pub fn assemble(prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<Self> {
        if prof.p_grid.as_slice() != grid.nodes() {
            return Err(Error::GridMismatch("profile was tabulated on a different momentum grid".into()));
        }
        let n = grid.len();
        let h = grid.spacing();
        let inv = 1.0 / h;
        let mass = DVector::from_vec(grid.weights());
        let v_half = potential_half(prof);
        let dv_half = potential_slope_half(prof);

        let mut dissipation = DMatrix::zeros(n, n);
        let mut lambda = DMatrix::zeros(n, n);
        let mut poincare = DMatrix::zeros(n, n);
        let mut mixed = DMatrix::zeros(n, n);
        let mut gradient_lambda = DMatrix::zeros(n, n);

        for k in 0..n - 1 {
            let idx = [k, k + 1];
            let c = 0.25 * prof.p_half[k] * prof.eta_half[k];
            add_outer(&mut dissipation, &idx, &[-inv + c, inv + c], h);
            add_outer(&mut lambda, &idx, &[-inv, inv], h);
            let (s0, s1) = (prof.sqrt_mu_inf[k], prof.sqrt_mu_inf[k + 1]);
            add_outer(&mut poincare, &idx, &[-inv / s0, inv / s1], h * prof.mu_half[k]);
            add_outer(&mut mixed, &idx, &[-inv, inv], h * v_half[k]);
            mixed[(k, k)] -= 0.5 * dv_half[k];
            mixed[(k + 1, k + 1)] += 0.5 * dv_half[k];
            let pe = prof.p_half[k] * prof.eta_half[k];
            add_outer(&mut gradient_lambda, &idx, &[-inv, inv], h * pe * pe);
        }
        for i in 0..n {
            let pe = prof.p_grid[i] * prof.eta_inf[i];
            lambda[(i, i)] += mass[i] * pe * pe;
            // compact second difference with zero ghosts
            let inv2 = inv * inv;
            match i {
                0 => add_outer(&mut mixed, &[0, 1], &[-2.0 * inv2, inv2], -mass[i]),
                _ if i == n - 1 => add_outer(&mut mixed, &[n - 2, n - 1], &[inv2, -2.0 * inv2], -mass[i]),
                _ => add_outer(&mut mixed, &[i - 1, i, i + 1], &[inv2, -2.0 * inv2, inv2], -mass[i]),
            }
        }
        for k in 0..n - 2 {
            // interface gradients G_k = (g_{k+1} - g_k)/h; difference of consecutive G
            add_outer(&mut gradient_lambda, &[k, k + 1, k + 2], &[inv, -2.0 * inv, inv], 1.0 / h);
        }
        Ok(QuadraticForms {
            dissipation,
            lambda,
            mass,
            poincare,
            mixed,
            gradient_lambda,
        })
    }

    pub fn mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.mass)
    }
}

/// Eigenvalues of `A x = t B x` for symmetric `A` and symmetric positive definite `B`, ascending.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Eigen("right-hand form is not positive definite (grid too coarse?)".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let mut eig: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    if eig.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Restriction `Z^T M Z` where the columns of `Z` are an orthonormal basis of
/// `c^perp`, built from the Householder reflector exchanging `c/|c|` and `e_0`.
fn restrict_to_complement(m: &DMatrix<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut v = c.normalize();
    v[0] -= 1.0;
    let nv = v.norm();
    if nv < 1e-14 {
        return m.view((1, 1), (n - 1, n - 1)).into_owned();
    }
    v /= nv;
    // H M H with H = I - 2 v v^T
    let mv = m * &v;
    let vmv = v.dot(&mv);
    let mut hmh = m.clone();
    hmh -= (&v * mv.transpose()) * 2.0;
    hmh -= (&mv * v.transpose()) * 2.0;
    hmh += (&v * v.transpose()) * (4.0 * vmv);
    hmh.view((1, 1), (n - 1, n - 1)).into_owned()
}

/// Numerically estimated coercivity constants of the discrete operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub kappa: f64,
    pub theta: f64,
    pub n_p: usize,
    pub p_max: f64,
    /// `-<Lg, g> >= lambda ||g - Pi g||^2_Lambda`.
    pub lambda: f64,
    /// Poincare constant of the measure `mu_inf / rho_inf`.
    pub poincare_const: f64,
    pub c1: f64,
    pub c2: f64,
    /// `|<L h, g>| <= c3 ||h||_Lambda ||g||_Lambda`.
    pub c3: f64,
    /// `||g||^2 <= l2_control ||g||^2_Lambda`.
    pub l2_control: f64,
}

/// Two-grid refinement of the spectral gap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapRefinement {
    pub coarse: CoercivityReport,
    pub fine: CoercivityReport,
    /// `|lambda_fine - lambda_coarse| / lambda_coarse`.
    pub relative_change: f64,
}

pub fn estimate_spectral_gap(prof: &EquilibriumProfile, grid: &MomentumGrid) -> Result<CoercivityReport> {
    let params = &prof.params;
    if params.kappa() != 0.0 && !(params.theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spectral gap requires theta > 0, got {}",
            params.theta
        )));
    }
    let forms = QuadraticForms::assemble(prof, grid)?;
    let w = forms.mass_matrix();
    let c = forms.mass.component_mul(&DVector::from_column_slice(&prof.sqrt_mu_inf));

    let b = restrict_to_complement(&forms.dissipation, &c);
    let s = restrict_to_complement(&forms.lambda, &c);
    let lambda = generalized_eigenvalues(&b, &s)?[0];

    let a = restrict_to_complement(&forms.poincare, &c);
    let wz = restrict_to_complement(&w, &c);
    let poincare_const = 1.0 / generalized_eigenvalues(&a, &wz)?[0];

    let c3 = *generalized_eigenvalues(&forms.dissipation, &forms.lambda)?
        .last()
        .expect("non-empty spectrum");
    let l2_control = 1.0 / generalized_eigenvalues(&forms.lambda, &w)?[0];
    let shifted = &forms.mixed + &forms.gradient_lambda * MIXED_C1;
    let c2 = *generalized_eigenvalues(&shifted, &w)?.last().expect("non-empty spectrum");

    Ok(CoercivityReport {
        kappa: params.kappa(),
        theta: params.theta,
        n_p: grid.len(),
        p_max: grid.p_max(),
        lambda,
        poincare_const,
        c1: MIXED_C1,
        c2,
        c3,
        l2_control,
    })
}

impl CoercivityReport {
    /// Builds the grid and profile and estimates the constants.
    pub fn compute(params: &ModelParams, n_p: usize) -> Result<Self> {
        let grid = MomentumGrid::uniform(n_p, params.p_max)?;
        let prof = EquilibriumProfile::build(params, grid.nodes())?;
        estimate_spectral_gap(&prof, &grid)
    }

    pub fn refine(params: &ModelParams, n_p: usize) -> Result<GapRefinement> {
        let coarse = Self::compute(params, n_p)?;
        let fine = Self::compute(params, 2 * n_p)?;
        let relative_change = (fine.lambda - coarse.lambda).abs() / coarse.lambda.abs();
        Ok(GapRefinement {
            coarse,
            fine,
            relative_change,
        })
    }
}

//! Smoothing primitives: the smoothed dual `d(y; beta1)`, the penalty
//! smoother `psi(x; beta2)`, primal proximal/gradient mappings and the dual
//! gradient mapping.
//!
//! Per-component solves run on the rayon pool; every reduction afterwards is
//! accumulated sequentially in component order so results are bitwise
//! independent of the worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inner::{self, Subproblem};
use crate::linalg::{dot, norm, norm_sq, BlockVector};
use crate::objective::Objective;
use crate::problem::{rhs_share, ComponentSpec, SeparableProblem, SmoothingConstants};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedDualEval {
    pub value: f64,
    pub minimizers: BlockVector,
    /// `A x*(y; beta1) - b`.
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyEval {
    pub psi_value: f64,
    /// `y*(x; beta2) = (Ax - b) / beta2`.
    pub multiplier: Vec<f64>,
    pub f_value: f64,
    pub phi_value: f64,
    pub residual: Vec<f64>,
}

fn solve_component(
    index: usize,
    c: &ComponentSpec,
    objective: &Objective,
    linear: &[f64],
    q: f64,
    center: &[f64],
    tolerance: f64,
) -> Result<Vec<f64>> {
    let sp = Subproblem {
        objective,
        linear,
        quad_weight: q,
        center,
        lower: &c.lower,
        upper: &c.upper,
    };
    inner::solve(&sp, tolerance).map_err(|e| e.at_component(index))
}

fn collect_blocks<F>(problem: &SeparableProblem, f: F) -> Result<BlockVector>
where
    F: Fn(usize, &ComponentSpec) -> Result<Vec<f64>> + Sync,
{
    problem
        .components()
        .par_iter()
        .enumerate()
        .map(|(i, c)| f(i, c))
        .collect()
}

/// `d(y; beta1) = sum_i min_{x_i in X_i} [phi_i + y^T A_i x_i + beta1 p_i] - b^T y`.
///
/// `beta1 = 0` gives the plain Lagrange dual, which is only well posed when
/// every objective is strongly convex.
pub fn smoothed_dual(
    problem: &SeparableProblem,
    y: &[f64],
    beta1: f64,
    tolerance: f64,
) -> Result<SmoothedDualEval> {
    if !(beta1 >= 0.0) {
        return Err(Error::Config(format!("beta1 must be nonnegative, got {beta1}")));
    }
    let minimizers = collect_blocks(problem, |i, c| {
        let linear = c.block.apply_transpose(y);
        let q = beta1 * c.prox.scale;
        if q == 0.0 && c.sigma_phi <= 0.0 {
            return Err(Error::NotStronglyConvex { component: i });
        }
        solve_component(i, c, &c.objective, &linear, q, &c.prox.center, tolerance)
    })?;
    let share = rhs_share(problem, y);
    let mut value = 0.0;
    for (c, x) in problem.components().iter().zip(&minimizers) {
        let coupling = dot(y, &c.block.apply(x));
        value += c.objective.value(x)? + coupling + beta1 * c.prox.value(x) - share;
    }
    let gradient = problem.residual(&minimizers);
    Ok(SmoothedDualEval {
        value,
        minimizers,
        gradient,
    })
}

/// The unsmoothed dual `d(y)` for strongly convex objectives.
pub fn lagrange_dual(problem: &SeparableProblem, y: &[f64], tolerance: f64) -> Result<SmoothedDualEval> {
    smoothed_dual(problem, y, 0.0, tolerance)
}

/// Maximum relative error between the assembled gradient of `d(.; beta1)` and
/// central finite differences with step `h` (default `1e-5 (1 + ||y||)`).
pub fn smoothed_dual_gradient_check(
    problem: &SeparableProblem,
    y: &[f64],
    beta1: f64,
    h: Option<f64>,
    tolerance: f64,
) -> Result<f64> {
    let h = h.unwrap_or(1e-5 * (1.0 + norm(y)));
    let eval = smoothed_dual(problem, y, beta1, tolerance)?;
    let mut worst = 0.0_f64;
    for r in 0..y.len() {
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[r] += h;
        ym[r] -= h;
        let fd = (smoothed_dual(problem, &yp, beta1, tolerance)?.value
            - smoothed_dual(problem, &ym, beta1, tolerance)?.value)
            / (2.0 * h);
        let g = eval.gradient[r];
        worst = worst.max((fd - g).abs() / g.abs().max(1.0));
    }
    Ok(worst)
}

pub fn penalty_eval(problem: &SeparableProblem, x: &BlockVector, beta2: f64) -> Result<PenaltyEval> {
    if !(beta2 > 0.0) {
        return Err(Error::Config(format!("beta2 must be positive, got {beta2}")));
    }
    let residual = problem.residual(x);
    let psi_value = norm_sq(&residual) / (2.0 * beta2);
    let multiplier = residual.iter().map(|r| r / beta2).collect();
    let phi_value = problem.objective_value(x)?;
    Ok(PenaltyEval {
        psi_value,
        multiplier,
        f_value: phi_value + psi_value,
        phi_value,
        residual,
    })
}

/// Per-component curvature constants `c_i` with `L_i^psi(beta2) = c_i / beta2`.
/// Defaults to `M ||A_i||^2`.
pub fn default_psi_constants(constants: &SmoothingConstants) -> Vec<f64> {
    let m = constants.num_components() as f64;
    constants.block_norms.iter().map(|a| m * a * a).collect()
}

/// How each component's primal update is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimalMapKind {
    Proximal,
    Gradient,
}

/// Primal mapping at `x_hat`: each component uses the proximal map or, where
/// `kinds[i]` asks for it, the gradient map with `L_phi_i = lipschitz[i]`.
pub fn primal_map(
    problem: &SeparableProblem,
    psi_constants: &[f64],
    x_hat: &BlockVector,
    beta2: f64,
    kinds: &[PrimalMapKind],
    lipschitz: &[f64],
    tolerance: f64,
) -> Result<BlockVector> {
    if !(beta2 > 0.0) {
        return Err(Error::Config(format!("beta2 must be positive, got {beta2}")));
    }
    let residual = problem.residual(x_hat);
    let multiplier: Vec<f64> = residual.iter().map(|r| r / beta2).collect();
    collect_blocks(problem, |i, c| {
        let mut linear = c.block.apply_transpose(&multiplier);
        let q = psi_constants[i] / beta2;
        match kinds[i] {
            PrimalMapKind::Proximal => {
                // phi_i(x) + y^T A_i (x - x_hat) + (q/2)||x - x_hat||^2; the constant
                // -y^T A_i x_hat does not move the minimizer.
                solve_component(i, c, &c.objective, &linear, q, &x_hat[i], tolerance)
            }
            PrimalMapKind::Gradient => {
                let g = c
                    .objective
                    .gradient(&x_hat[i])
                    .ok_or(Error::NonsmoothComponent { component: i })?;
                for (l, gj) in linear.iter_mut().zip(g) {
                    *l += gj;
                }
                solve_component(i, c, &Objective::Zero, &linear, lipschitz[i] + q, &x_hat[i], tolerance)
            }
        }
    })
}

/// `P(x_hat; beta2)` with the default `L_i^psi`.
pub fn proximal_map(
    problem: &SeparableProblem,
    constants: &SmoothingConstants,
    x_hat: &BlockVector,
    beta2: f64,
    tolerance: f64,
) -> Result<BlockVector> {
    let kinds = vec![PrimalMapKind::Proximal; problem.num_components()];
    let zeros = vec![0.0; problem.num_components()];
    primal_map(
        problem,
        &default_psi_constants(constants),
        x_hat,
        beta2,
        &kinds,
        &zeros,
        tolerance,
    )
}

/// Gradient-mapping Lipschitz constant of a component: the declared value, or
/// the box bound of the oracle when none was declared.
pub fn component_gradient_lipschitz(index: usize, c: &ComponentSpec) -> Result<f64> {
    if let Some(l) = c.gradient_lipschitz {
        return Ok(l);
    }
    c.objective
        .gradient_lipschitz_on_box(&c.lower, &c.upper)
        .ok_or(Error::NonsmoothComponent { component: index })
}

/// `G(x_hat; beta2)` on every component, with `L_hat_i = L_phi_i + M ||A_i||^2 / beta2`.
pub fn gradient_map(
    problem: &SeparableProblem,
    constants: &SmoothingConstants,
    x_hat: &BlockVector,
    beta2: f64,
    tolerance: f64,
) -> Result<BlockVector> {
    let lipschitz = problem
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| component_gradient_lipschitz(i, c))
        .collect::<Result<Vec<_>>>()?;
    let kinds = vec![PrimalMapKind::Gradient; problem.num_components()];
    primal_map(
        problem,
        &default_psi_constants(constants),
        x_hat,
        beta2,
        &kinds,
        &lipschitz,
        tolerance,
    )
}

/// `G(y_hat; beta1) = y_hat + (A x*(y_hat; beta1) - b) / L^d(beta1)`, returned
/// together with the evaluation it was built from.
pub fn dual_gradient_map(
    problem: &SeparableProblem,
    constants: &SmoothingConstants,
    y_hat: &[f64],
    beta1: f64,
    tolerance: f64,
) -> Result<(Vec<f64>, SmoothedDualEval)> {
    let eval = smoothed_dual(problem, y_hat, beta1, tolerance)?;
    let step = 1.0 / constants.dual_lipschitz(beta1);
    Ok((gradient_step(y_hat, &eval.gradient, step), eval))
}

pub(crate) fn gradient_step(y: &[f64], gradient: &[f64], step: f64) -> Vec<f64> {
    y.iter().zip(gradient).map(|(a, g)| a + step * g).collect()
}

/// Running maxima behind the stopping estimates: `D_hat_i = max_j p_i(x_i^j) + omega`
/// and `y_hat = max_j ||y^j|| + omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiameterTracker {
    max_prox: Vec<f64>,
    max_dual_norm: f64,
}

impl DiameterTracker {
    pub fn new(num_components: usize) -> Self {
        DiameterTracker {
            max_prox: vec![0.0; num_components],
            max_dual_norm: 0.0,
        }
    }

    pub fn observe(&mut self, problem: &SeparableProblem, x: &BlockVector, y: &[f64]) {
        for ((m, c), xi) in self.max_prox.iter_mut().zip(problem.components()).zip(x) {
            *m = m.max(c.prox.value(xi));
        }
        self.max_dual_norm = self.max_dual_norm.max(norm(y));
    }

    pub fn estimates(&self, omega: f64) -> (Vec<f64>, f64) {
        (
            self.max_prox.iter().map(|p| p + omega).collect(),
            self.max_dual_norm + omega,
        )
    }
}

/// `(D_hat_i^k, y_hat^k)` over the visited iterates.
pub fn prox_diameter_estimates(
    problem: &SeparableProblem,
    primal: &[BlockVector],
    dual: &[Vec<f64>],
    omega: f64,
) -> (Vec<f64>, f64) {
    let mut tracker = DiameterTracker::new(problem.num_components());
    for (x, y) in primal.iter().zip(dual) {
        tracker.observe(problem, x, y);
    }
    tracker.estimates(omega)
}

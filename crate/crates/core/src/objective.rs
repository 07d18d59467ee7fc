//! Per-component objective oracles `phi_i`.

use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigenvalues};

/// Convex quadratic `1/2 x^T Q x + c^T x` with cached spectral bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    dim: usize,
    hessian: Vec<f64>,
    linear: Vec<f64>,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
    diagonal: bool,
}

impl Quadratic {
    /// Builds the oracle from a row-major `Q`. `Q` must be symmetric positive
    /// semidefinite (checked up to rounding).
    pub fn new(hessian: Vec<Vec<f64>>, linear: Vec<f64>) -> std::result::Result<Self, String> {
        let dim = linear.len();
        if hessian.len() != dim || hessian.iter().any(|row| row.len() != dim) {
            return Err(format!("Q must be {dim}x{dim}"));
        }
        let flat: Vec<f64> = hessian.into_iter().flatten().collect();
        let scale = flat.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..dim {
            for j in 0..i {
                if (flat[i * dim + j] - flat[j * dim + i]).abs() > 1e-12 * scale {
                    return Err("Q is not symmetric".into());
                }
            }
        }
        let eig = symmetric_eigenvalues(&flat, dim);
        let (lo, hi) = match (eig.first(), eig.last()) {
            (Some(lo), Some(hi)) => (*lo, *hi),
            _ => (0.0, 0.0),
        };
        if lo < -1e-10 * scale {
            return Err(format!("Q is not positive semidefinite (min eigenvalue {lo:e})"));
        }
        let diagonal = (0..dim).all(|i| (0..dim).all(|j| i == j || flat[i * dim + j] == 0.0));
        Ok(Quadratic {
            dim,
            hessian: flat,
            linear,
            min_eigenvalue: lo.max(0.0),
            max_eigenvalue: hi.max(0.0),
            diagonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hessian_row(&self, i: usize) -> &[f64] {
        &self.hessian[i * self.dim..(i + 1) * self.dim]
    }

    pub fn hessian_entry(&self, i: usize, j: usize) -> f64 {
        self.hessian[i * self.dim + j]
    }

    pub fn hessian_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.hessian_row(i).to_vec()).collect()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    fn value(&self, x: &[f64]) -> f64 {
        let quad: f64 = (0..self.dim).map(|i| x[i] * dot(self.hessian_row(i), x)).sum();
        0.5 * quad + dot(&self.linear, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| dot(self.hessian_row(i), x) + self.linear[i])
            .collect()
    }
}

/// The objective kinds a component may carry.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `sum_j w_j |x_j - a_j|`.
    WeightedAbs { weights: Vec<f64>, anchors: Vec<f64> },
    /// `a^T x - w ln(1 + b^T x)`.
    LinearMinusLog {
        linear: Vec<f64>,
        weight: f64,
        direction: Vec<f64>,
    },
    Quadratic(Quadratic),
    /// Identically zero (slack components).
    Zero,
}

impl Objective {
    /// Dimension the oracle was built for; `None` for the dimension-free zero objective.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Objective::WeightedAbs { weights, .. } => Some(weights.len()),
            Objective::LinearMinusLog { linear, .. } => Some(linear.len()),
            Objective::Quadratic(q) => Some(q.dim()),
            Objective::Zero => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Objective::WeightedAbs { .. } => "weighted_abs",
            Objective::LinearMinusLog { .. } => "linear_minus_log",
            Objective::Quadratic(_) => "convex_quadratic",
            Objective::Zero => "zero",
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, Objective::WeightedAbs { .. })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Objective::WeightedAbs { weights, anchors } => Ok(weights
                .iter()
                .zip(anchors)
                .zip(x)
                .map(|((w, a), v)| w * (v - a).abs())
                .sum()),
            Objective::LinearMinusLog {
                linear,
                weight,
                direction,
            } => {
                let arg = 1.0 + dot(direction, x);
                if arg <= 0.0 {
                    return Err(Error::Domain(format!("1 + b^T x = {arg:e} <= 0")));
                }
                Ok(dot(linear, x) - weight * arg.ln())
            }
            Objective::Quadratic(q) => Ok(q.value(x)),
            Objective::Zero => Ok(0.0),
        }
    }

    /// Gradient for the differentiable kinds; `None` for `WeightedAbs`.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            Objective::WeightedAbs { .. } => None,
            Objective::LinearMinusLog {
                linear,
                weight,
                direction,
            } => {
                let coef = weight / (1.0 + dot(direction, x));
                Some(
                    linear
                        .iter()
                        .zip(direction)
                        .map(|(a, b)| a - coef * b)
                        .collect(),
                )
            }
            Objective::Quadratic(q) => Some(q.gradient(x)),
            Objective::Zero => Some(vec![0.0; x.len()]),
        }
    }

    /// Lipschitz constant of the gradient over the box, or `None` when nonsmooth.
    pub fn gradient_lipschitz_on_box(&self, lower: &[f64], upper: &[f64]) -> Option<f64> {
        match self {
            Objective::WeightedAbs { .. } => None,
            Objective::LinearMinusLog {
                weight, direction, ..
            } => {
                let s_min = min_linear_on_box(direction, lower, upper);
                let denom = 1.0 + s_min;
                Some(weight * dot(direction, direction) / (denom * denom))
            }
            Objective::Quadratic(q) => Some(q.max_eigenvalue()),
            Objective::Zero => Some(0.0),
        }
    }

    /// Strong-convexity modulus of the objective itself.
    pub fn strong_convexity(&self) -> f64 {
        match self {
            Objective::Quadratic(q) => q.min_eigenvalue(),
            _ => 0.0,
        }
    }
}

/// `min_{lower <= x <= upper} c^T x`.
pub fn min_linear_on_box(c: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    c.iter()
        .zip(lower.iter().zip(upper))
        .map(|(c, (l, u))| if *c >= 0.0 { c * l } else { c * u })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_abs_value() {
        let f = Objective::WeightedAbs {
            weights: vec![1.0, 2.0],
            anchors: vec![1.0, 2.0],
        };
        assert_eq!(f.value(&[-4.0, 2.0]).unwrap(), 5.0);
    }

    #[test]
    fn log_domain_violation() {
        let f = Objective::LinearMinusLog {
            linear: vec![0.0],
            weight: 1.0,
            direction: vec![1.0],
        };
        assert!(matches!(f.value(&[-2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn quadratic_rejects_indefinite() {
        assert!(Quadratic::new(vec![vec![1.0, 0.0], vec![0.0, -1.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn log_gradient_matches_finite_difference() {
        let f = Objective::LinearMinusLog {
            linear: vec![1.0, 0.5],
            weight: 2.0,
            direction: vec![3.0, 1.0],
        };
        let x = [0.3, 0.6];
        let g = f.gradient(&x).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (f.value(&xp).unwrap() - f.value(&xm).unwrap()) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-8);
        }
    }
}

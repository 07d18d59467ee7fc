//! High-accuracy reference solutions used to check the main algorithms.
//!
//! For `m <= 2` the dual of `d(.; 1e-9)` is maximized by nested bisection on
//! the sign of its partial derivatives; a primal point is recovered exactly by
//! combining the two minimizers at the ends of each final bracket. Larger `m`
//! falls back on subgradient ascent followed by accelerated gradient polish.

use crate::error::{Error, Result};
use crate::inner::DEFAULT_INNER_TOLERANCE;
use crate::linalg::{flatten, norm, BlockVector};
use crate::problem::SeparableProblem;
use crate::smoothing::{smoothed_dual, SmoothedDualEval};

/// Smoothing weight that stands in for the nonsmooth dual.
pub const REFERENCE_BETA: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMethod {
    Bisection,
    NestedBisection,
    SubgradientPolish,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x_star: BlockVector,
    pub y_star: Vec<f64>,
    pub phi_star: f64,
    /// Upper bound on both `||Ax* - b||` and `|phi(x*) - d(y*)|`, including
    /// the `beta1 * sum D_i` smoothing error.
    pub certified_tolerance: f64,
    pub method: ReferenceMethod,
}

impl ReferenceSolution {
    pub fn y_norm(&self) -> f64 {
        norm(&self.y_star)
    }
}

struct Oracle<'a> {
    problem: &'a SeparableProblem,
}

/// A dual point together with a primal point whose residual is (near) zero in
/// the coordinates already fixed by bisection.
struct Probe {
    y: Vec<f64>,
    x: BlockVector,
    residual: Vec<f64>,
}

impl Oracle<'_> {
    fn eval(&self, y: &[f64]) -> Result<SmoothedDualEval> {
        smoothed_dual(self.problem, y, REFERENCE_BETA, DEFAULT_INNER_TOLERANCE)
    }

    /// Solves for coordinates `0..=level` of `y` (others held at `y`'s values),
    /// returning a primal point with zero residual in those coordinates.
    fn solve_level(&self, y: &mut Vec<f64>, level: usize) -> Result<Probe> {
        let probe = |t: f64, y: &mut Vec<f64>| -> Result<Probe> {
            y[level] = t;
            if level == 0 {
                let e = self.eval(y)?;
                Ok(Probe {
                    y: y.clone(),
                    x: e.minimizers,
                    residual: e.gradient,
                })
            } else {
                self.solve_level(y, level - 1)
            }
        };
        let start = y[level];
        let first = probe(start, y)?;
        let g0 = first.residual[level];
        if g0 == 0.0 {
            return Ok(first);
        }
        // d is concave, so the partial derivative decreases in y[level]:
        // move up while it is positive, down while negative.
        let dir = g0.signum();
        let mut step = 1.0_f64.max(start.abs());
        let mut near = first;
        let mut far;
        loop {
            far = probe(start + dir * step, y)?;
            if far.residual[level] == 0.0 {
                return Ok(far);
            }
            if far.residual[level].signum() != dir {
                break;
            }
            near = far;
            step *= 2.0;
            if step > 1e12 {
                return Err(Error::Reference(format!(
                    "no sign change of dual derivative {level} up to |y| = 1e12"
                )));
            }
        }
        let (mut pos, mut neg) = if dir > 0.0 { (near, far) } else { (far, near) };
        for _ in 0..2000 {
            let mid = 0.5 * (pos.y[level] + neg.y[level]);
            if mid == pos.y[level] || mid == neg.y[level] {
                break;
            }
            let p = probe(mid, y)?;
            let g = p.residual[level];
            if g == 0.0 {
                return Ok(p);
            }
            if g > 0.0 {
                pos = p;
            } else {
                neg = p;
            }
        }
        let gp = pos.residual[level];
        let gn = neg.residual[level];
        let theta = gp / (gp - gn);
        let x: BlockVector = pos
            .x
            .iter()
            .zip(&neg.x)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (1.0 - theta) * u + theta * v).collect())
            .collect();
        let residual = self.problem.residual(&x);
        let mut ym: Vec<f64> = pos.y.clone();
        for (v, w) in ym.iter_mut().zip(&neg.y) {
            *v = 0.5 * (*v + w);
        }
        y.copy_from_slice(&ym);
        Ok(Probe { y: ym, x, residual })
    }
}

/// High-accuracy solution with a checked optimality certificate.
///
/// Fails with [`Error::Reference`] when the certificate is not within `tol`.
pub fn reference_solve(problem: &SeparableProblem, tol: f64) -> Result<ReferenceSolution> {
    let m = problem.num_rows();
    let oracle = Oracle { problem };
    let (y, x, method) = if m <= 2 {
        let mut y = vec![0.0; m];
        let p = oracle.solve_level(&mut y, m - 1)?;
        let method = if m == 1 {
            ReferenceMethod::Bisection
        } else {
            ReferenceMethod::NestedBisection
        };
        (p.y, p.x, method)
    } else {
        let (y, x) = subgradient_polish(&oracle, tol)?;
        (y, x, ReferenceMethod::SubgradientPolish)
    };
    certify(problem, x, y, method, tol)
}

fn certify(
    problem: &SeparableProblem,
    x: BlockVector,
    y: Vec<f64>,
    method: ReferenceMethod,
    tol: f64,
) -> Result<ReferenceSolution> {
    let constants = problem.compute_constants()?;
    let phi = problem.objective_value(&x)?;
    let feas = norm(&problem.residual(&x));
    let dual = smoothed_dual(problem, &y, REFERENCE_BETA, DEFAULT_INNER_TOLERANCE)?.value;
    let gap = (phi - dual).abs();
    let certified = feas.max(gap) + REFERENCE_BETA * constants.sum_diameters();
    if !(certified <= tol) {
        return Err(Error::Reference(format!(
            "certificate {certified:e} exceeds tolerance {tol:e} (feasibility {feas:e}, gap {gap:e})"
        )));
    }
    Ok(ReferenceSolution {
        x_star: x,
        y_star: y,
        phi_star: phi,
        certified_tolerance: certified,
        method,
    })
}

/// Diminishing-step subgradient ascent followed by restarted accelerated
/// ascent on `d(.; 1e-9)` with primal averaging over the final phase.
fn subgradient_polish(oracle: &Oracle<'_>, tol: f64) -> Result<(Vec<f64>, BlockVector)> {
    let problem = oracle.problem;
    let m = problem.num_rows();
    let constants = problem.compute_constants()?;
    let lipschitz: f64 = problem
        .components()
        .iter()
        .zip(&constants.block_norms)
        .map(|(c, a)| a * a / (c.sigma_phi + REFERENCE_BETA * c.prox.scale))
        .sum();

    let mut y = vec![0.0; m];
    let mut best = oracle.eval(&y)?;
    let mut best_y = y.clone();
    for j in 0..2000 {
        let e = oracle.eval(&y)?;
        if e.value > best.value {
            best_y = y.clone();
            best = e.clone();
        }
        let g = norm(&e.gradient);
        if g == 0.0 {
            break;
        }
        let step = 1.0 / ((j + 1) as f64).sqrt() / g;
        for (v, gi) in y.iter_mut().zip(&e.gradient) {
            *v += step * gi;
        }
    }

    let mut y = best_y;
    let mut z = y.clone();
    let mut t = 1.0_f64;
    let mut last = oracle.eval(&y)?;
    for _ in 0..200_000 {
        let e = oracle.eval(&z)?;
        let y_next: Vec<f64> = z.iter().zip(&e.gradient).map(|(v, g)| v + g / lipschitz).collect();
        let next = oracle.eval(&y_next)?;
        if norm(&next.gradient) <= 0.25 * tol {
            return Ok((y_next, next.minimizers));
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if next.value < last.value {
            // restart on non-monotone progress
            t = 1.0;
            z = y.clone();
            continue;
        }
        z = y_next
            .iter()
            .zip(&y)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        y = y_next;
        t = t_next;
        last = next;
    }
    Ok((y, last.minimizers))
}

/// Exhaustive grid search for problems with at most four variables.
///
/// Keeps grid points with `||Ax - b||_inf <= grid_step * n`, then polishes the
/// best one by compass search on an exact penalty. Returns `(x*, phi*)`.
pub fn brute_force_tiny(problem: &SeparableProblem, grid_step: f64) -> Result<(BlockVector, f64)> {
    let n = problem.num_vars();
    if n > 4 {
        return Err(Error::Config(format!("brute force needs n <= 4, got {n}")));
    }
    if !(grid_step > 0.0) {
        return Err(Error::Config(format!("grid step must be positive, got {grid_step}")));
    }
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for c in problem.components() {
        lower.extend_from_slice(&c.lower);
        upper.extend_from_slice(&c.upper);
    }
    let counts: Vec<usize> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| ((u - l) / grid_step).floor() as usize + 1)
        .collect();
    let grid = |j: usize, i: usize| (lower[j] + i as f64 * grid_step).min(upper[j]);
    let tolerance = grid_step * n as f64;

    let mut index = vec![0usize; n];
    let mut flat = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    'outer: loop {
        for j in 0..n {
            flat[j] = grid(j, index[j]);
        }
        let x = split(problem, &flat);
        let r = problem.residual(&x);
        if r.iter().all(|v| v.abs() <= tolerance) {
            if let Ok(phi) = problem.objective_value(&x) {
                if best.as_ref().map_or(true, |(b, _)| phi < *b) {
                    best = Some((phi, flat.clone()));
                }
            }
        }
        for j in 0..n {
            index[j] += 1;
            if index[j] < counts[j] {
                continue 'outer;
            }
            index[j] = 0;
        }
        break;
    }
    let Some((_, start)) = best else {
        return Err(Error::Infeasible(format!(
            "no grid point within residual {tolerance:e} of the coupling constraint"
        )));
    };
    let x = compass_polish(problem, start, &lower, &upper, grid_step);
    let x = split(problem, &x);
    let phi = problem.objective_value(&x)?;
    Ok((x, phi))
}

fn split(problem: &SeparableProblem, flat: &[f64]) -> BlockVector {
    let mut out = Vec::with_capacity(problem.num_components());
    let mut at = 0;
    for c in problem.components() {
        out.push(flat[at..at + c.dim()].to_vec());
        at += c.dim();
    }
    out
}

fn compass_polish(problem: &SeparableProblem, start: Vec<f64>, lower: &[f64], upper: &[f64], step0: f64) -> Vec<f64> {
    let n = start.len();
    let weight = 1e3;
    let merit = |flat: &[f64]| -> f64 {
        let x = split(problem, flat);
        let r: f64 = problem.residual(&x).iter().map(|v| v.abs()).sum();
        problem.objective_value(&x).map_or(f64::INFINITY, |phi| phi + weight * r)
    };
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        directions.push(e);
        for j in (i + 1)..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e[j] = s;
                directions.push(e);
            }
        }
    }
    directions.extend(null_space(problem, n));

    let mut x = start;
    let mut best = merit(&x);
    let mut step = step0;
    while step > 1e-12 {
        let mut improved = false;
        for d in &directions {
            for s in [step, -step] {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(d)
                    .enumerate()
                    .map(|(j, (v, dv))| (v + s * dv).clamp(lower[j], upper[j]))
                    .collect();
                let value = merit(&trial);
                if value < best {
                    best = value;
                    x = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    x
}

/// Orthonormal basis of the null space of the stacked coupling matrix.
fn null_space(problem: &SeparableProblem, n: usize) -> Vec<Vec<f64>> {
    let m = problem.num_rows();
    let mut rows: Vec<Vec<f64>> = vec![Vec::with_capacity(n); m];
    for c in problem.components() {
        for (r, row) in rows.iter_mut().enumerate() {
            for j in 0..c.dim() {
                row.push(c.block.entry(r, j));
            }
        }
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        add_orthonormal(&mut basis, r);
    }
    let rank = basis.len();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        add_orthonormal(&mut basis, e);
    }
    basis.split_off(rank)
}

fn add_orthonormal(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) {
    for b in basis.iter() {
        let p: f64 = b.iter().zip(&v).map(|(a, c)| a * c).sum();
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi -= p * bi;
        }
    }
    let nv = norm(&v);
    if nv > 1e-10 {
        basis.push(v.into_iter().map(|c| c / nv).collect());
    }
}

/// Flattened reference primal, convenient for distance computations.
pub fn flat_x(solution: &ReferenceSolution) -> Vec<f64> {
    flatten(&solution.x_star)
}

//! Small dense linear-algebra kernels.
//!
//! Everything here works on plain `f64` slices and accumulates in a fixed
//! order, so results do not depend on how the caller schedules work.

use crate::error::{Error, Result};

/// One vector per component, in component order.
pub type BlockVector = Vec<Vec<f64>>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `(1 - t) * a + t * b`, elementwise.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

pub fn lerp_blocks(a: &BlockVector, b: &BlockVector, t: f64) -> BlockVector {
    a.iter().zip(b).map(|(x, y)| lerp(x, y, t)).collect()
}

pub fn clip(value: f64, lo: f64, hi: f64) -> f64 {
    value.max(lo).min(hi)
}

pub fn flatten(blocks: &BlockVector) -> Vec<f64> {
    blocks.iter().flatten().copied().collect()
}

/// Coupling block `A_i`: an `m x n_i` matrix, or the identity tag when `m = n_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Identity(usize),
    Dense {
        rows: usize,
        cols: usize,
        /// Row-major entries.
        data: Vec<f64>,
    },
}

impl Block {
    pub fn dense(rows: Vec<Vec<f64>>) -> Block {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Block::Dense {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Block::Identity(n) => *n,
            Block::Dense { rows, .. } => *rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Block::Identity(n) => *n,
            Block::Dense { cols, .. } => *cols,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Block::Identity(_) => false,
            Block::Dense { data, .. } => data.iter().all(|v| *v == 0.0),
        }
    }

    /// `out += A x`.
    pub fn apply_add(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Block::Identity(_) => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o += v;
                }
            }
            Block::Dense { rows, cols, data } => {
                for r in 0..*rows {
                    out[r] += dot(&data[r * cols..(r + 1) * cols], x);
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.apply_add(x, &mut out);
        out
    }

    /// `A^T y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Block::Identity(_) => y.to_vec(),
            Block::Dense { rows, cols, data } => {
                let mut out = vec![0.0; *cols];
                for r in 0..*rows {
                    let yr = y[r];
                    for (o, a) in out.iter_mut().zip(&data[r * cols..(r + 1) * cols]) {
                        *o += a * yr;
                    }
                }
                out
            }
        }
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        match self {
            Block::Identity(_) => {
                if r == c {
                    1.0
                } else {
                    0.0
                }
            }
            Block::Dense { cols, data, .. } => data[r * cols + c],
        }
    }

    /// Spectral norm `||A||_2`; the identity tag short-circuits to exactly 1.
    pub fn spectral_norm(&self) -> Result<f64> {
        match self {
            Block::Identity(_) => Ok(1.0),
            Block::Dense { .. } => power_iteration_norm(self, 1e-10, 10_000),
        }
    }
}

/// Largest singular value via power iteration on `A^T A`.
///
/// Convergence is judged on the Rayleigh quotient `||A v||^2` with `||v|| = 1`.
pub fn power_iteration_norm(block: &Block, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let n = block.cols();
    if n == 0 || block.is_zero() {
        return Ok(0.0);
    }
    // Deterministic start with no special alignment to any axis.
    let mut v: Vec<f64> = (0..n)
        .map(|j| 1.0 + 0.37 * ((j as f64 + 1.0) * 0.618_033_988_75).fract())
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut previous = f64::NAN;
    for _ in 0..max_iter {
        let av = block.apply(&v);
        let rayleigh = norm_sq(&av);
        let mut w = block.apply_transpose(&av);
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        w.iter_mut().for_each(|x| *x /= nw);
        v = w;
        if (rayleigh - previous).abs() <= rel_tol * rayleigh {
            let av = block.apply(&v);
            return Ok(norm_sq(&av).max(rayleigh).sqrt());
        }
        previous = rayleigh;
    }
    Err(Error::PowerIteration {
        estimate: previous.sqrt(),
        iterations: max_iter,
    })
}

/// Eigenvalues of a symmetric `n x n` row-major matrix by cyclic Jacobi sweeps,
/// returned in ascending order.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Vec<f64> {
    let mut a = matrix.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

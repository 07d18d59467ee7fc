//! Test-side oracles, written without reference to the library's own solvers.
#![allow(dead_code)]

use egap::linalg::BlockVector;
use egap::{Block, ComponentSpec, Coupling, Objective, ProxFunction, Quadratic, SeparableProblem};

/// Solves `M x = r` by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-13 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (r[row] - s) / m[row][row];
    }
    Some(x)
}

/// Characteristic polynomial coefficients of a square matrix by
/// Faddeev-LeVerrier, highest degree first (`c[0] = 1`).
pub fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![1.0];
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let prev = mk.clone();
        for i in 0..n {
            for j in 0..n {
                mk[i][j] = (0..n).map(|l| a[i][l] * prev[l][j]).sum::<f64>();
            }
            mk[i][i] += coeffs[k - 1];
        }
        let am: f64 = (0..n).map(|i| (0..n).map(|l| a[i][l] * mk[l][i]).sum::<f64>()).sum();
        coeffs.push(-am / k as f64);
    }
    coeffs
}

fn poly_eval(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ci in c {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

/// Newton on the characteristic polynomial started outside the spectrum
/// (all roots real for symmetric input, so the iteration is monotone).
fn newton_root(c: &[f64], mut x: f64) -> f64 {
    for _ in 0..500 {
        let (p, dp) = poly_eval(c, x);
        if dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

pub fn largest_eigenvalue(a: &[Vec<f64>]) -> f64 {
    let bound: f64 = a.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    newton_root(&char_poly(a), bound + 1.0)
}

pub fn smallest_eigenvalue(a: &[Vec<f64>]) -> f64 {
    let bound: f64 = a.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    newton_root(&char_poly(a), -bound - 1.0)
}

pub fn gram(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows[0].len();
    (0..n)
        .map(|i| (0..n).map(|j| rows.iter().map(|r| r[i] * r[j]).sum()).collect())
        .collect()
}

/// Minimizer of a strictly convex 1-D function on `[lo, hi]` by ternary search.
pub fn ternary_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, resolution: f64) -> f64 {
    while hi - lo > resolution {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// `min 1/2 x^T Q x + c^T x` s.t. `E x = e`, `lo <= x <= hi` by enumerating all
/// `3^n` active sets and keeping the KKT point. `Q` positive definite.
pub fn kkt_enumeration(q: &[Vec<f64>], c: &[f64], eq: &[Vec<f64>], e: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = c.len();
    let m = e.len();
    let total = 3usize.pow(n as u32);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..total {
        // 0 = at lower, 1 = at upper, 2 = free
        let status: Vec<usize> = (0..n).map(|j| (code / 3usize.pow(j as u32)) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&j| status[j] == 2).collect();
        let mut x = vec![0.0; n];
        for j in 0..n {
            match status[j] {
                0 => x[j] = lo[j],
                1 => x[j] = hi[j],
                _ => {}
            }
        }
        let nf = free.len();
        let dim = nf + m;
        let mut mat = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                mat[a][b] = q[i][j];
            }
            for r in 0..m {
                mat[a][nf + r] = eq[r][i];
                mat[nf + r][a] = eq[r][i];
            }
            let fixed: f64 = (0..n).filter(|j| status[*j] != 2).map(|j| q[i][j] * x[j]).sum();
            rhs[a] = -c[i] - fixed;
        }
        for r in 0..m {
            let fixed: f64 = (0..n).filter(|j| status[*j] != 2).map(|j| eq[r][j] * x[j]).sum();
            rhs[nf + r] = e[r] - fixed;
        }
        let Some(sol) = (if dim == 0 { Some(vec![]) } else { solve_linear(mat, rhs) }) else {
            continue;
        };
        for (a, &i) in free.iter().enumerate() {
            x[i] = sol[a];
        }
        let lam = &sol[nf..];
        let tol = 1e-9;
        if free.iter().any(|&i| x[i] < lo[i] - tol || x[i] > hi[i] + tol) {
            continue;
        }
        if (0..m).any(|r| ((0..n).map(|j| eq[r][j] * x[j]).sum::<f64>() - e[r]).abs() > 1e-8) {
            continue;
        }
        // gradient of the Lagrangian must point into the box at bound coordinates
        let ok = (0..n).filter(|j| status[*j] != 2).all(|j| {
            let g = (0..n).map(|l| q[j][l] * x[l]).sum::<f64>() + c[j] + (0..m).map(|r| eq[r][j] * lam[r]).sum::<f64>();
            if status[j] == 0 {
                g >= -tol
            } else {
                g <= tol
            }
        });
        if !ok {
            continue;
        }
        let val = 0.5 * (0..n).map(|i| x[i] * (0..n).map(|j| q[i][j] * x[j]).sum::<f64>()).sum::<f64>()
            + (0..n).map(|i| c[i] * x[i]).sum::<f64>();
        if best.as_ref().map_or(true, |(v, _)| val < *v) {
            best = Some((val, x));
        }
    }
    best.expect("a strictly convex feasible QP has a KKT point").1
}

pub fn flat(x: &BlockVector) -> Vec<f64> {
    x.iter().flatten().copied().collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

pub fn vnorm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Deterministic pseudo-random stream for tests (SplitMix64).
pub struct Stream(u64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

pub fn component(objective: Objective, lower: Vec<f64>, upper: Vec<f64>, block: Block) -> ComponentSpec {
    let center = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let sigma_phi = objective.strong_convexity();
    ComponentSpec {
        objective,
        lower,
        upper,
        block,
        prox: ProxFunction { center, scale: 1.0 },
        sigma_phi,
        gradient_lipschitz: None,
    }
}

/// Example-1 restricted to its first `m` components with right-hand side `b`.
pub fn example1_truncated(m: usize, b: f64) -> SeparableProblem {
    let comps = (1..=m)
        .map(|i| {
            let v = i as f64;
            component(
                Objective::WeightedAbs {
                    weights: vec![v],
                    anchors: vec![v],
                },
                vec![-5.0],
                vec![7.0],
                Block::Identity(1),
            )
        })
        .collect();
    SeparableProblem::new(comps, vec![b], Coupling::Equality).unwrap()
}

/// Three 2-D strongly convex quadratic components with identity blocks (n = 6, m = 2).
pub fn random_quadratic_problem(seed: u64) -> (SeparableProblem, Vec<Vec<Vec<f64>>>, Vec<Vec<f64>>) {
    let mut s = Stream::new(seed);
    let mut comps = Vec::new();
    let mut hs = Vec::new();
    let mut cs = Vec::new();
    let mut b = vec![0.0; 2];
    for _ in 0..3 {
        let a = s.range(-1.0, 1.0);
        let h = vec![vec![1.0 + s.unit(), 0.3 * a], vec![0.3 * a, 1.0 + s.unit()]];
        let c = vec![s.range(-2.0, 2.0), s.range(-2.0, 2.0)];
        for bj in b.iter_mut() {
            *bj += s.range(-0.8, 0.8);
        }
        let q = Quadratic::new(h.clone(), c.clone()).unwrap();
        comps.push(component(Objective::Quadratic(q), vec![-1.0; 2], vec![1.0; 2], Block::Identity(2)));
        hs.push(h);
        cs.push(c);
    }
    (SeparableProblem::new(comps, b, Coupling::Equality).unwrap(), hs, cs)
}

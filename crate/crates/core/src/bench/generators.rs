//! Benchmark instance families.
//!
//! Random families draw from ChaCha8 seeded with the 64-bit seed; uniform reals
//! use the 53-bit mantissa convention of `rand`'s `Standard` distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Block;
use crate::objective::{Objective, Quadratic};
use crate::problem::{ComponentSpec, Coupling, ProxFunction, SeparableProblem};

fn unit_box_component(objective: Objective, n: usize, gradient_lipschitz: Option<f64>, sigma_phi: f64) -> ComponentSpec {
    ComponentSpec {
        objective,
        lower: vec![0.0; n],
        upper: vec![1.0; n],
        block: Block::Identity(n),
        prox: ProxFunction {
            center: vec![0.5; n],
            scale: 1.0,
        },
        sigma_phi,
        gradient_lipschitz,
    }
}

/// Five scalar components `phi_i(x) = i |x - i|` on `[-5, 7]` with
/// `sum_i x_i = 10`.
pub fn generate_example1() -> SeparableProblem {
    let components = (1..=5)
        .map(|i| {
            let v = i as f64;
            ComponentSpec {
                objective: Objective::WeightedAbs {
                    weights: vec![v],
                    anchors: vec![v],
                },
                lower: vec![-5.0],
                upper: vec![7.0],
                block: Block::Identity(1),
                prox: ProxFunction {
                    center: vec![1.0],
                    scale: 1.0,
                },
                sigma_phi: 0.0,
                gradient_lipschitz: None,
            }
        })
        .collect();
    SeparableProblem::new(components, vec![10.0], Coupling::Equality).expect("example instance is valid")
}

/// Known solution of [`generate_example1`].
pub const EXAMPLE1_SOLUTION: [f64; 5] = [-4.0, 2.0, 3.0, 4.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AllocationOptions {
    /// Force every log weight to zero, leaving linear objectives.
    pub zero_weights: bool,
}

/// Interior anchor points `t_i` used to build a feasible right-hand side.
fn anchor(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| 0.1 + 0.8 * rng.gen::<f64>()).collect()
}

fn check_sizes(m: usize, n_x: usize) -> Result<()> {
    if m < 2 || n_x < 1 {
        return Err(Error::Config(format!("need M >= 2 and n_x >= 1, got M={m}, n_x={n_x}")));
    }
    Ok(())
}

/// `phi_i(x) = a_i^T x - w_i ln(1 + b_i^T x)` on `[0,1]^{n_x}`, identity
/// blocks, `sum_i x_i = b` with `b = sum_i t_i` for interior points `t_i`.
pub fn generate_random_allocation(seed: u64, m: usize, n_x: usize) -> Result<SeparableProblem> {
    generate_random_allocation_with(seed, m, n_x, AllocationOptions::default())
}

pub fn generate_random_allocation_with(
    seed: u64,
    m: usize,
    n_x: usize,
    options: AllocationOptions,
) -> Result<SeparableProblem> {
    check_sizes(m, n_x)?;
    let (components, anchors) = random_allocation_parts(seed, m, n_x, options);
    let rhs = sum_anchors(&anchors, n_x);
    SeparableProblem::new(components, rhs, Coupling::Equality)
}

/// Components and anchor points of the allocation family, in draw order.
pub fn random_allocation_parts(
    seed: u64,
    m: usize,
    n_x: usize,
    options: AllocationOptions,
) -> (Vec<ComponentSpec>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components = Vec::with_capacity(m);
    let mut anchors = Vec::with_capacity(m);
    for _ in 0..m {
        let linear: Vec<f64> = (0..n_x).map(|_| 5.0 * rng.gen::<f64>()).collect();
        let direction: Vec<f64> = (0..n_x).map(|_| 10.0 * rng.gen::<f64>()).collect();
        let drawn = 5.0 * rng.gen::<f64>();
        let weight = if options.zero_weights { 0.0 } else { drawn };
        anchors.push(anchor(&mut rng, n_x));
        let lipschitz = options.zero_weights.then_some(0.0);
        components.push(unit_box_component(
            Objective::LinearMinusLog {
                linear,
                weight,
                direction,
            },
            n_x,
            lipschitz,
            0.0,
        ));
    }
    (components, anchors)
}

fn sum_anchors(anchors: &[Vec<f64>], n_x: usize) -> Vec<f64> {
    let mut b = vec![0.0; n_x];
    for t in anchors {
        for (bj, tj) in b.iter_mut().zip(t) {
            *bj += tj;
        }
    }
    b
}

/// Quadratics `1/2 x^T Q_i x + q_i^T x` with `Q_i = diag(d_i) + u_i u_i^T`,
/// `d_i >= sigma_min`, on `[0,1]^{n_x}` with the allocation coupling.
/// `sigma_phi_i` is the computed smallest eigenvalue of `Q_i`.
pub fn generate_strongly_convex(seed: u64, m: usize, n_x: usize, sigma_min: f64) -> Result<SeparableProblem> {
    check_sizes(m, n_x)?;
    if !(sigma_min > 0.0) {
        return Err(Error::Config(format!("sigma_min must be positive, got {sigma_min}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components = Vec::with_capacity(m);
    let mut anchors = Vec::with_capacity(m);
    for i in 0..m {
        let diag: Vec<f64> = (0..n_x).map(|_| sigma_min + rng.gen::<f64>()).collect();
        let u: Vec<f64> = (0..n_x).map(|_| rng.gen::<f64>() - 0.5).collect();
        let q: Vec<f64> = (0..n_x).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        anchors.push(anchor(&mut rng, n_x));
        let hessian: Vec<Vec<f64>> = (0..n_x)
            .map(|r| {
                (0..n_x)
                    .map(|c| u[r] * u[c] + if r == c { diag[r] } else { 0.0 })
                    .collect()
            })
            .collect();
        let quad = Quadratic::new(hessian, q).map_err(|detail| Error::InvalidObjective { component: i, detail })?;
        let sigma = quad.min_eigenvalue();
        let lipschitz = quad.max_eigenvalue();
        components.push(unit_box_component(
            Objective::Quadratic(quad),
            n_x,
            Some(lipschitz),
            sigma,
        ));
    }
    let rhs = sum_anchors(&anchors, n_x);
    SeparableProblem::new(components, rhs, Coupling::Equality)
}

/// Anchor points of the strongly convex family (the same draws as the generator).
pub fn strongly_convex_anchors(seed: u64, m: usize, n_x: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            for _ in 0..3 * n_x {
                rng.gen::<f64>();
            }
            anchor(&mut rng, n_x)
        })
        .collect()
}

/// Problem sizes of the desk-scale family.
pub const DESK_SIZES: [(usize, usize); 6] = [(10, 5), (10, 20), (50, 5), (50, 20), (200, 5), (200, 20)];

/// The ten-seed desk-scale family: seed `s` uses size `DESK_SIZES[s % 6]`.
pub fn desk_family() -> Vec<String> {
    (0..10u64)
        .map(|s| {
            let (m, n) = DESK_SIZES[s as usize % DESK_SIZES.len()];
            format!("gen:alloc:{s}:{m}:{n}")
        })
        .collect()
}

/// Where a problem comes from: a JSON file or a generator spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemSource {
    File(std::path::PathBuf),
    Example1,
    Allocation { seed: u64, m: usize, n_x: usize },
    StronglyConvex { seed: u64, m: usize, n_x: usize },
}

/// Smallest eigenvalue floor of the strongly convex generator when driven from a source string.
pub const DEFAULT_SIGMA_MIN: f64 = 0.5;

impl ProblemSource {
    pub fn parse(text: &str) -> Result<Self> {
        let Some(rest) = text.strip_prefix("gen:") else {
            return Ok(ProblemSource::File(text.into()));
        };
        let parts: Vec<&str> = rest.split(':').collect();
        let bad = || Error::Config(format!("unrecognized generator spec '{text}'"));
        let nums = |p: &[&str]| -> Result<(u64, usize, usize)> {
            match p {
                [s, m, n] => Ok((
                    s.parse().map_err(|_| bad())?,
                    m.parse().map_err(|_| bad())?,
                    n.parse().map_err(|_| bad())?,
                )),
                _ => Err(bad()),
            }
        };
        match parts.as_slice() {
            ["example1"] => Ok(ProblemSource::Example1),
            ["alloc", p @ ..] => {
                let (seed, m, n_x) = nums(p)?;
                Ok(ProblemSource::Allocation { seed, m, n_x })
            }
            ["sconvex", p @ ..] => {
                let (seed, m, n_x) = nums(p)?;
                Ok(ProblemSource::StronglyConvex { seed, m, n_x })
            }
            _ => Err(bad()),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ProblemSource::Allocation { seed, .. } | ProblemSource::StronglyConvex { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn load(&self) -> Result<SeparableProblem> {
        match self {
            ProblemSource::File(path) => SeparableProblem::from_json(&std::fs::read_to_string(path)?),
            ProblemSource::Example1 => Ok(generate_example1()),
            ProblemSource::Allocation { seed, m, n_x } => generate_random_allocation(*seed, *m, *n_x),
            ProblemSource::StronglyConvex { seed, m, n_x } => {
                generate_strongly_convex(*seed, *m, *n_x, DEFAULT_SIGMA_MIN)
            }
        }
    }
}

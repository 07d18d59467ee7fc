//! Separable problem instances: validation, structural constants and the JSON
//! problem document.
//!
//! A problem is `min sum_i phi_i(x_i)` subject to `x_i in [l_i, u_i]` and the
//! coupling constraint `sum_i A_i x_i = b` (or `<= b` before slacking).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, Block, BlockVector};
use crate::objective::{min_linear_on_box, Objective, Quadratic};

/// Quadratic prox-function `p(x) = (rho/2) ||x - center||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxFunction {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl ProxFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        0.5 * self.scale * d2
    }

    /// Convexity parameter `sigma_i`; equals the scale for the quadratic form.
    pub fn convexity(&self) -> f64 {
        self.scale
    }

    /// `max_{x in box} p(x)`, attained at the farthest corner.
    pub fn diameter_on_box(&self, lower: &[f64], upper: &[f64]) -> f64 {
        let s: f64 = self
            .center
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(c, (l, u))| {
                let d = (u - c).max(c - l);
                d * d
            })
            .sum();
        0.5 * self.scale * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub objective: Objective,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub block: Block,
    pub prox: ProxFunction,
    /// Strong convexity of `phi_i` itself (0 when merely convex).
    pub sigma_phi: f64,
    /// Declared Lipschitz constant of `grad phi_i`; enables the gradient mapping.
    pub gradient_lipschitz: Option<f64>,
}

impl ComponentSpec {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn box_center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(*l).min(*u);
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    #[serde(rename = "eq")]
    Equality,
    #[serde(rename = "le")]
    Inequality,
}

/// Validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableProblem {
    components: Vec<ComponentSpec>,
    rhs: Vec<f64>,
    coupling: Coupling,
}

/// Returned by [`SeparableProblem::add_slack_component`] when there was nothing to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlackWarning {
    AlreadyEquality,
}

impl std::fmt::Display for SlackWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlackWarning::AlreadyEquality => {
                write!(f, "problem is already equality-coupled; slack not added")
            }
        }
    }
}

impl SeparableProblem {
    pub fn new(components: Vec<ComponentSpec>, rhs: Vec<f64>, coupling: Coupling) -> Result<Self> {
        let problem = SeparableProblem {
            components,
            rhs,
            coupling,
        };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::EmptyProblem);
        }
        let m = self.rhs.len();
        for (i, c) in self.components.iter().enumerate() {
            let n = c.lower.len();
            let mismatch = |detail: String| Error::DimensionMismatch {
                component: i,
                detail,
            };
            if c.upper.len() != n {
                return Err(mismatch(format!(
                    "lower has {n} entries, upper has {}",
                    c.upper.len()
                )));
            }
            if c.block.rows() != m {
                return Err(mismatch(format!(
                    "coupling block has {} rows but b has length {m}",
                    c.block.rows()
                )));
            }
            if c.block.cols() != n {
                return Err(mismatch(format!(
                    "coupling block has {} columns but the box has dimension {n}",
                    c.block.cols()
                )));
            }
            if let Some(d) = c.objective.dim() {
                if d != n {
                    return Err(mismatch(format!("objective has dimension {d}, box has {n}")));
                }
            }
            if c.prox.center.len() != n {
                return Err(mismatch("prox center length differs from box".into()));
            }
            if c.lower.iter().chain(&c.upper).any(|v| !v.is_finite()) {
                return Err(Error::UnboundedBox { component: i });
            }
            if let Some(j) = (0..n).find(|&j| c.lower[j] > c.upper[j]) {
                return Err(Error::EmptyBox {
                    component: i,
                    coordinate: j,
                });
            }
            if !(c.prox.scale > 0.0 && c.prox.scale.is_finite()) {
                return Err(Error::NonpositiveProxScale {
                    component: i,
                    rho: c.prox.scale,
                });
            }
            if !c.contains(&c.prox.center, 0.0) {
                return Err(Error::InvalidObjective {
                    component: i,
                    detail: "prox center lies outside the box".into(),
                });
            }
            if c.block.is_zero() {
                return Err(Error::ZeroBlock { component: i });
            }
            validate_objective(i, c)?;
        }
        Ok(())
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Number of coupling rows `m`.
    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Total variable dimension `n`.
    pub fn num_vars(&self) -> usize {
        self.components.iter().map(ComponentSpec::dim).sum()
    }

    pub fn prox_centers(&self) -> BlockVector {
        self.components.iter().map(|c| c.prox.center.clone()).collect()
    }

    /// `phi(x) = sum_i phi_i(x_i)`.
    pub fn objective_value(&self, x: &BlockVector) -> Result<f64> {
        let mut total = 0.0;
        for (c, xi) in self.components.iter().zip(x) {
            total += c.objective.value(xi)?;
        }
        Ok(total)
    }

    /// `A x - b`, accumulated block by block in component order.
    pub fn residual(&self, x: &BlockVector) -> Vec<f64> {
        let mut r: Vec<f64> = vec![0.0; self.rhs.len()];
        for (c, xi) in self.components.iter().zip(x) {
            c.block.apply_add(xi, &mut r);
        }
        for (ri, bi) in r.iter_mut().zip(&self.rhs) {
            *ri -= bi;
        }
        r
    }

    /// Relative feasibility gap `||Ax - b|| / ||b||` (denominator 1 when `b = 0`).
    pub fn relative_feasibility(&self, residual_norm: f64) -> f64 {
        let nb = norm_sq(&self.rhs).sqrt();
        residual_norm / if nb > 0.0 { nb } else { 1.0 }
    }

    /// Converts `sum_i A_i x_i <= b` into an equality by appending a slack
    /// component with zero objective, identity block and box `[0, b - min_X sum A_i x_i]`
    /// (clipped at 0).
    pub fn add_slack_component(&self) -> (SeparableProblem, Option<SlackWarning>) {
        if self.coupling == Coupling::Equality {
            return (self.clone(), Some(SlackWarning::AlreadyEquality));
        }
        let m = self.rhs.len();
        let mut upper = self.rhs.clone();
        for c in &self.components {
            for (r, u) in upper.iter_mut().enumerate() {
                let row: Vec<f64> = (0..c.dim()).map(|j| c.block.entry(r, j)).collect();
                *u -= min_linear_on_box(&row, &c.lower, &c.upper);
            }
        }
        upper.iter_mut().for_each(|u| *u = u.max(0.0));
        let lower = vec![0.0; m];
        let center = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
        let mut components = self.components.clone();
        components.push(ComponentSpec {
            objective: Objective::Zero,
            lower,
            upper,
            block: Block::Identity(m),
            prox: ProxFunction { center, scale: 1.0 },
            sigma_phi: 0.0,
            gradient_lipschitz: None,
        });
        let problem = SeparableProblem {
            components,
            rhs: self.rhs.clone(),
            coupling: Coupling::Equality,
        };
        (problem, None)
    }

    pub fn compute_constants(&self) -> Result<SmoothingConstants> {
        SmoothingConstants::new(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProblemDocument = serde_json::from_str(text)?;
        build_problem(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("problem documents always serialize")
    }

    pub fn to_document(&self) -> ProblemDocument {
        ProblemDocument {
            components: self.components.iter().map(component_document).collect(),
            b: self.rhs.clone(),
            coupling: self.coupling,
        }
    }
}

fn validate_objective(i: usize, c: &ComponentSpec) -> Result<()> {
    let invalid = |detail: &str| Error::InvalidObjective {
        component: i,
        detail: detail.to_string(),
    };
    match &c.objective {
        Objective::WeightedAbs { weights, anchors } => {
            if anchors.len() != weights.len() {
                return Err(Error::DimensionMismatch {
                    component: i,
                    detail: "weights and anchors differ in length".into(),
                });
            }
            if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
                return Err(invalid("weights must be nonnegative"));
            }
        }
        Objective::LinearMinusLog {
            linear,
            weight,
            direction,
        } => {
            if direction.len() != linear.len() {
                return Err(Error::DimensionMismatch {
                    component: i,
                    detail: "a and b differ in length".into(),
                });
            }
            if *weight < 0.0 || !weight.is_finite() {
                return Err(invalid("weight must be nonnegative"));
            }
            if direction.iter().any(|b| *b < 0.0) {
                return Err(invalid("log direction b must be nonnegative"));
            }
            if 1.0 + min_linear_on_box(direction, &c.lower, &c.upper) <= 0.0 {
                return Err(invalid("1 + b^T x must stay positive on the box"));
            }
        }
        Objective::Quadratic(q) => {
            if c.sigma_phi > q.min_eigenvalue() * (1.0 + 1e-9) + 1e-12 {
                return Err(invalid("sigma_phi exceeds the smallest eigenvalue of Q"));
            }
        }
        Objective::Zero => {}
    }
    if c.sigma_phi < 0.0 || !c.sigma_phi.is_finite() {
        return Err(invalid("sigma_phi must be nonnegative"));
    }
    if c.sigma_phi > 0.0 && !matches!(c.objective, Objective::Quadratic(_)) {
        return Err(invalid("only quadratic objectives may declare sigma_phi > 0"));
    }
    if let Some(l) = c.gradient_lipschitz {
        if !c.objective.is_differentiable() {
            return Err(invalid("gradient_lipschitz given for a nonsmooth objective"));
        }
        if l < 0.0 || !l.is_finite() {
            return Err(invalid("gradient_lipschitz must be nonnegative"));
        }
    }
    Ok(())
}

/// Structural constants derived from the problem and the prox-functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingConstants {
    /// `||A_i||` per component.
    pub block_norms: Vec<f64>,
    /// `sigma_i` of each prox-function.
    pub prox_sigma: Vec<f64>,
    /// `sigma_phi_i` of each objective.
    pub objective_sigma: Vec<f64>,
    /// `D_i = max_{X_i} p_i`.
    pub prox_diameters: Vec<f64>,
    /// `L_bar_M = M max_i ||A_i||^2 / sigma_i`.
    pub lbar: f64,
    /// `sum_i ||A_i||^2 / sigma_i`.
    pub coupling_weight: f64,
}

impl SmoothingConstants {
    pub fn new(problem: &SeparableProblem) -> Result<Self> {
        let block_norms = problem
            .components()
            .iter()
            .map(|c| c.block.spectral_norm())
            .collect::<Result<Vec<_>>>()?;
        let prox_sigma: Vec<f64> = problem.components().iter().map(|c| c.prox.convexity()).collect();
        let objective_sigma = problem.components().iter().map(|c| c.sigma_phi).collect();
        let prox_diameters = problem
            .components()
            .iter()
            .map(|c| c.prox.diameter_on_box(&c.lower, &c.upper))
            .collect();
        let ratios = block_norms.iter().zip(&prox_sigma).map(|(a, s)| a * a / s);
        let max_ratio = ratios.clone().fold(0.0_f64, f64::max);
        let coupling_weight = ratios.sum();
        Ok(SmoothingConstants {
            lbar: problem.num_components() as f64 * max_ratio,
            block_norms,
            prox_sigma,
            objective_sigma,
            prox_diameters,
            coupling_weight,
        })
    }

    pub fn num_components(&self) -> usize {
        self.block_norms.len()
    }

    pub fn sum_diameters(&self) -> f64 {
        self.prox_diameters.iter().sum()
    }

    /// `L^d(beta1) = (1/beta1) sum_i ||A_i||^2 / sigma_i`.
    pub fn dual_lipschitz(&self, beta1: f64) -> f64 {
        self.coupling_weight / beta1
    }

    /// `L_i^psi(beta2) = M ||A_i||^2 / beta2`.
    pub fn psi_lipschitz(&self, component: usize, beta2: f64) -> f64 {
        let a = self.block_norms[component];
        self.num_components() as f64 * a * a / beta2
    }

    /// `L^phi = sum_i ||A_i||^2 / sigma_phi_i`, defined only when every objective
    /// is strongly convex.
    pub fn smooth_dual_grad_lipschitz(&self) -> Result<f64> {
        let mut total = 0.0;
        for (i, (a, s)) in self.block_norms.iter().zip(&self.objective_sigma).enumerate() {
            if *s <= 0.0 {
                return Err(Error::NotStronglyConvex { component: i });
            }
            total += a * a / s;
        }
        Ok(total)
    }
}

// --------------------------------------------------------------------------
// JSON document
// --------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub components: Vec<ComponentDocument>,
    pub b: Vec<f64>,
    #[serde(default = "default_coupling")]
    pub coupling: Coupling,
}

fn default_coupling() -> Coupling {
    Coupling::Equality
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDocument {
    pub objective: ObjectiveDocument,
    #[serde(rename = "box")]
    pub bounds: BoxDocument,
    pub block: BlockDocument,
    #[serde(default)]
    pub prox: ProxDocument,
    #[serde(default)]
    pub sigma_phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ObjectiveDocument {
    WeightedAbs {
        w: Vec<f64>,
        a: Vec<f64>,
    },
    LinearMinusLog {
        a: Vec<f64>,
        w: f64,
        b: Vec<f64>,
    },
    ConvexQuadratic {
        #[serde(rename = "Q")]
        hessian: Vec<Vec<f64>>,
        q: Vec<f64>,
    },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDocument {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockDocument {
    Tag(BlockTag),
    Dense { dense: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockTag {
    #[serde(rename = "identity")]
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxDocument {
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

fn default_rho() -> f64 {
    1.0
}

impl Default for ProxDocument {
    fn default() -> Self {
        ProxDocument {
            rho: 1.0,
            center: None,
        }
    }
}

/// Validates a parsed document and builds the problem. Identity blocks stay tags.
pub fn build_problem(doc: &ProblemDocument) -> Result<SeparableProblem> {
    let mut components = Vec::with_capacity(doc.components.len());
    for (i, c) in doc.components.iter().enumerate() {
        let n = c.bounds.lower.len();
        let objective = match &c.objective {
            ObjectiveDocument::WeightedAbs { w, a } => Objective::WeightedAbs {
                weights: w.clone(),
                anchors: a.clone(),
            },
            ObjectiveDocument::LinearMinusLog { a, w, b } => Objective::LinearMinusLog {
                linear: a.clone(),
                weight: *w,
                direction: b.clone(),
            },
            ObjectiveDocument::ConvexQuadratic { hessian, q } => Objective::Quadratic(
                Quadratic::new(hessian.clone(), q.clone()).map_err(|detail| {
                    Error::InvalidObjective {
                        component: i,
                        detail,
                    }
                })?,
            ),
            ObjectiveDocument::Zero => Objective::Zero,
        };
        let block = match &c.block {
            BlockDocument::Tag(BlockTag::Identity) => Block::Identity(n),
            BlockDocument::Dense { dense } => {
                if dense.iter().any(|row| row.len() != n) {
                    return Err(Error::DimensionMismatch {
                        component: i,
                        detail: format!("dense block rows must have {n} entries"),
                    });
                }
                Block::dense(dense.clone())
            }
        };
        let center = c.prox.center.clone().unwrap_or_else(|| {
            c.bounds
                .lower
                .iter()
                .zip(&c.bounds.upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect()
        });
        components.push(ComponentSpec {
            objective,
            lower: c.bounds.lower.clone(),
            upper: c.bounds.upper.clone(),
            block,
            prox: ProxFunction {
                center,
                scale: c.prox.rho,
            },
            sigma_phi: c.sigma_phi,
            gradient_lipschitz: c.gradient_lipschitz,
        });
    }
    SeparableProblem::new(components, doc.b.clone(), doc.coupling)
}

fn component_document(c: &ComponentSpec) -> ComponentDocument {
    let objective = match &c.objective {
        Objective::WeightedAbs { weights, anchors } => ObjectiveDocument::WeightedAbs {
            w: weights.clone(),
            a: anchors.clone(),
        },
        Objective::LinearMinusLog {
            linear,
            weight,
            direction,
        } => ObjectiveDocument::LinearMinusLog {
            a: linear.clone(),
            w: *weight,
            b: direction.clone(),
        },
        Objective::Quadratic(q) => ObjectiveDocument::ConvexQuadratic {
            hessian: q.hessian_rows(),
            q: q.linear().to_vec(),
        },
        Objective::Zero => ObjectiveDocument::Zero,
    };
    let block = match &c.block {
        Block::Identity(_) => BlockDocument::Tag(BlockTag::Identity),
        Block::Dense { rows, cols, data } => BlockDocument::Dense {
            dense: (0..*rows).map(|r| data[r * cols..(r + 1) * cols].to_vec()).collect(),
        },
    };
    let center = if c.prox.center == c.box_center() {
        None
    } else {
        Some(c.prox.center.clone())
    };
    ComponentDocument {
        objective,
        bounds: BoxDocument {
            lower: c.lower.clone(),
            upper: c.upper.clone(),
        },
        block,
        prox: ProxDocument {
            rho: c.prox.scale,
            center,
        },
        sigma_phi: c.sigma_phi,
        gradient_lipschitz: c.gradient_lipschitz,
    }
}

/// `(1/M) b^T y`: the share of the linear dual term each component owns.
pub(crate) fn rhs_share(problem: &SeparableProblem, y: &[f64]) -> f64 {
    dot(problem.rhs(), y) / problem.num_components() as f64
}

//! Step-size (`tau`) schedules and their closed forms.

/// `tau / (tau + 1)`: the primal-update schedule.
pub fn tau_next_alg1(tau: f64) -> f64 {
    tau / (tau + 1.0)
}

/// `(tau/2) (sqrt(tau^2 + 4) - tau)`, the largest root of
/// `t^2 + tau^2 t - tau^2 <= 0`.
///
/// Evaluated as `tau / (sqrt(tau^2/4 + 1) + tau/2)`, which has no cancellation.
pub fn tau_next_alg2(tau: f64) -> f64 {
    let h = 0.5 * tau;
    tau / ((h * h + 1.0).sqrt() + h)
}

/// `tau_k = tau0 / (1 + tau0 k)`.
pub fn tau_alg1_closed_form(tau0: f64, k: usize) -> f64 {
    tau0 / (1.0 + tau0 * k as f64)
}

/// `beta_k` for `beta_{k+1} = (1 - tau_k) beta_k`: the product telescopes to
/// `beta0 (1 - tau0) / (1 + tau0 (k - 1))` for `k >= 1`.
///
/// This sits below `beta0 / (tau0 k + 1)`, which is only an upper bound.
pub fn beta_alg1_closed_form(beta0: f64, tau0: f64, k: usize) -> f64 {
    if k == 0 {
        return beta0;
    }
    beta0 * (1.0 - tau0) / (1.0 + tau0 * (k as f64 - 1.0))
}

/// Both schedule maps at `tau`.
pub fn xi_comparison(tau: f64) -> (f64, f64) {
    (tau_next_alg1(tau), tau_next_alg2(tau))
}

/// How `tau_k` evolves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    /// The algorithm's own tightest recurrence.
    Tightest,
    /// `tau_k = a / (k + 1)` (primal-update algorithm, `0 < a <= 1/2`).
    Harmonic { a: f64 },
    /// `tau_k = a / (k + b)` with `a in (3/2, 2)`, `b >= (a - 1)/(2 - a)`.
    Shifted { a: f64, b: f64 },
}

impl TauRule {
    /// `tau_0` implied by a closed-form rule, if any.
    pub fn initial(&self) -> Option<f64> {
        match *self {
            TauRule::Tightest => None,
            TauRule::Harmonic { a } => Some(a),
            TauRule::Shifted { a, b } => Some(a / b),
        }
    }

    /// `tau_{k+1}` from `tau_k`; `next` is the tightest recurrence of the algorithm.
    pub fn advance(&self, tau: f64, k: usize, next: fn(f64) -> f64) -> f64 {
        match *self {
            TauRule::Tightest => next(tau),
            TauRule::Harmonic { a } => a / (k as f64 + 2.0),
            TauRule::Shifted { a, b } => a / (k as f64 + 1.0 + b),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            TauRule::Tightest => Ok(()),
            TauRule::Harmonic { a } => {
                if a > 0.0 && a <= 0.5 {
                    Ok(())
                } else {
                    Err(format!("harmonic rule needs 0 < a <= 1/2, got {a}"))
                }
            }
            TauRule::Shifted { a, b } => {
                if a > 1.5 && a < 2.0 && b >= (a - 1.0) / (2.0 - a) {
                    Ok(())
                } else {
                    Err(format!("shifted rule needs a in (3/2, 2) and b >= (a-1)/(2-a), got a={a}, b={b}"))
                }
            }
        }
    }
}

//! Hamiltonian Monte Carlo with per-coordinate leapfrog stepsizes.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_positive, Error, Result};

/// `|Delta H|` beyond which a trajectory is treated as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1000.0;

/// Potential energy `U(q)` with gradient.
pub trait Potential {
    /// Returns `U(q)` and writes `dU/dq` into `grad`.
    fn evaluate(&mut self, q: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> Potential for F
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    fn evaluate(&mut self, q: &[f64], grad: &mut [f64]) -> f64 {
        self(q, grad)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HmcConfig {
    /// Number of leapfrog steps per update.
    pub trajectory_length: usize,
    /// Multiplier applied to the base stepsizes `1 / sqrt(curvature)`.
    pub stepsize_adjust: f64,
}

impl HmcConfig {
    pub fn new(trajectory_length: usize, stepsize_adjust: f64) -> Self {
        Self {
            trajectory_length,
            stepsize_adjust,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectory_length == 0 {
            return Err(Error::InvalidParameter {
                name: "trajectory_length",
                value: 0.0,
            });
        }
        check_positive("stepsize_adjust", self.stepsize_adjust)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmcOutcome {
    pub new_position: Vec<f64>,
    pub accepted: bool,
    /// `H(q*, p*) - H(q, p)`; non-finite when the trajectory blew up.
    pub delta_h: f64,
    pub trajectory_length_used: usize,
    pub divergent: bool,
}

fn check_gradient(grad: &[f64]) -> Result<()> {
    match grad.iter().position(|g| !g.is_finite()) {
        Some(index) => Err(Error::NonFiniteGradient { index }),
        None => Ok(()),
    }
}

/// Runs `steps` leapfrog transformations starting from a known gradient at `q`.
/// On return `grad` holds the gradient at the final position; the final potential
/// is returned. `completed` counts finished steps even on error.
fn integrate<P: Potential + ?Sized>(
    q: &mut [f64],
    p: &mut [f64],
    grad: &mut [f64],
    stepsizes: &[f64],
    potential: &mut P,
    steps: usize,
    completed: &mut usize,
) -> Result<f64> {
    let mut u = f64::NAN;
    for _ in 0..steps {
        for i in 0..q.len() {
            p[i] -= 0.5 * stepsizes[i] * grad[i];
            q[i] += stepsizes[i] * p[i];
        }
        u = potential.evaluate(q, grad);
        check_gradient(grad)?;
        for i in 0..q.len() {
            p[i] -= 0.5 * stepsizes[i] * grad[i];
        }
        *completed += 1;
    }
    Ok(u)
}

/// Applies `steps` leapfrog transformations to `(q, p)` in place, each coordinate
/// with its own stepsize:
///
/// ```text
/// p_i <- p_i - (e_i / 2) dU/dq_i
/// q_i <- q_i + e_i p_i
/// p_i <- p_i - (e_i / 2) dU/dq_i
/// ```
pub fn leapfrog<P: Potential + ?Sized>(
    q: &mut [f64],
    p: &mut [f64],
    stepsizes: &[f64],
    potential: &mut P,
    steps: usize,
) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::dims("momentum", q.len(), p.len()));
    }
    if stepsizes.len() != q.len() {
        return Err(Error::dims("stepsizes", q.len(), stepsizes.len()));
    }
    if let Some(&bad) = stepsizes.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "stepsize",
            value: bad,
        });
    }
    let mut grad = vec![0.0; q.len()];
    potential.evaluate(q, &mut grad);
    check_gradient(&grad)?;
    let mut completed = 0;
    integrate(q, p, &mut grad, stepsizes, potential, steps, &mut completed).map(|_| ())
}

/// One HMC update of `q` targeting `exp(-U)`.
///
/// Momenta are standard normal, stepsizes are `eps / sqrt(curvature_i)`, and the
/// proposal from `trajectory_length` leapfrog steps is accepted with probability
/// `min(1, exp(-Delta H))`. A non-finite gradient or `|Delta H| > 1000` yields a
/// rejection flagged as divergent. A rejected update returns `q` unchanged.
pub fn hmc_update<P, R>(
    q: &[f64],
    potential: &mut P,
    config: &HmcConfig,
    base_curvatures: &[f64],
    rng: &mut R,
) -> Result<HmcOutcome>
where
    P: Potential + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    if base_curvatures.len() != q.len() {
        return Err(Error::dims("curvatures", q.len(), base_curvatures.len()));
    }
    if let Some(&bad) = base_curvatures
        .iter()
        .find(|c| !(**c > 0.0 && c.is_finite()))
    {
        return Err(Error::InvalidParameter {
            name: "curvature",
            value: bad,
        });
    }
    let stepsizes: Vec<f64> = base_curvatures
        .iter()
        .map(|c| config.stepsize_adjust / c.sqrt())
        .collect();

    let mut grad = vec![0.0; q.len()];
    let u0 = potential.evaluate(q, &mut grad);
    check_gradient(&grad)?;
    if !u0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "initial potential",
            value: u0,
        });
    }

    let mut p: Vec<f64> = (0..q.len()).map(|_| StandardNormal.sample(rng)).collect();
    let k0 = 0.5 * p.iter().map(|v| v * v).sum::<f64>();

    let mut q_new = q.to_vec();
    let mut completed = 0;
    let rejected = |delta_h: f64, completed: usize| HmcOutcome {
        new_position: q.to_vec(),
        accepted: false,
        delta_h,
        trajectory_length_used: completed,
        divergent: true,
    };
    let u1 = match integrate(
        &mut q_new,
        &mut p,
        &mut grad,
        &stepsizes,
        potential,
        config.trajectory_length,
        &mut completed,
    ) {
        Ok(u) => u,
        Err(Error::NonFiniteGradient { .. }) => return Ok(rejected(f64::INFINITY, completed)),
        Err(e) => return Err(e),
    };
    let k1 = 0.5 * p.iter().map(|v| v * v).sum::<f64>();
    let delta_h = (u1 + k1) - (u0 + k0);
    if !delta_h.is_finite() || delta_h.abs() > DIVERGENCE_THRESHOLD {
        return Ok(rejected(delta_h, completed));
    }

    let accepted = delta_h <= 0.0 || rng.random::<f64>() < (-delta_h).exp();
    Ok(HmcOutcome {
        new_position: if accepted { q_new } else { q.to_vec() },
        accepted,
        delta_h,
        trajectory_length_used: completed,
        divergent: false,
    })
}

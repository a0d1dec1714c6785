//! Damped-least-squares inverse kinematics with joint-limit projection and
//! random restarts.

use nalgebra::{DVector, Matrix6, Matrix6xX, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics, pose_and_jacobian, pose_error, Pose};
use crate::model::{JointAxis, RobotDesign};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkConfig {
    /// Damping factor λ; must be strictly positive.
    pub damping: f64,
    /// Iteration budget per restart.
    pub max_iterations: usize,
    /// Stop a restart once the (projected) step is shorter than this.
    pub step_tolerance: f64,
    /// Stop a restart once the residual norm falls below this.
    pub residual_tolerance: f64,
    /// Number of attempts; the first starts from the straight-line pose.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self {
            damping: 0.1,
            max_iterations: 200,
            step_tolerance: 1e-8,
            residual_tolerance: 1e-4,
            restarts: 20,
            seed: 0,
        }
    }
}

impl IkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping.is_finite() && self.damping > 0.0) {
            return Err(Error::config("ik.damping", "must be finite and > 0"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("ik.max_iterations", "must be at least 1"));
        }
        if !(self.step_tolerance.is_finite() && self.step_tolerance > 0.0) {
            return Err(Error::config("ik.step_tolerance", "must be finite and > 0"));
        }
        if !(self.residual_tolerance.is_finite() && self.residual_tolerance > 0.0) {
            return Err(Error::config("ik.residual_tolerance", "must be finite and > 0"));
        }
        if self.restarts == 0 {
            return Err(Error::config("ik.restarts", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Partial IK settings, as found in scenario files and request bodies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IkOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

impl IkOverrides {
    pub fn apply(&self, base: IkConfig) -> IkConfig {
        IkConfig {
            damping: self.damping.unwrap_or(base.damping),
            max_iterations: self.max_iterations.unwrap_or(base.max_iterations),
            step_tolerance: self.step_tolerance.unwrap_or(base.step_tolerance),
            residual_tolerance: self.residual_tolerance.unwrap_or(base.residual_tolerance),
            restarts: self.restarts.unwrap_or(base.restarts),
            seed: base.seed,
        }
    }

    /// Fields set in `other` win.
    pub fn merge(&self, other: &IkOverrides) -> IkOverrides {
        IkOverrides {
            damping: other.damping.or(self.damping),
            max_iterations: other.max_iterations.or(self.max_iterations),
            step_tolerance: other.step_tolerance.or(self.step_tolerance),
            residual_tolerance: other.residual_tolerance.or(self.residual_tolerance),
            restarts: other.restarts.or(self.restarts),
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == IkOverrides::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IkResult {
    pub q: Vec<f64>,
    pub residual: [f64; 6],
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations_used: usize,
}

struct Attempt {
    q: Vec<f64>,
    residual: Vector6<f64>,
    norm: f64,
    iterations: usize,
}

fn descend(
    design: &RobotDesign,
    root: &Pose,
    target: &Pose,
    axes: &[JointAxis],
    mut q: Vec<f64>,
    cfg: &IkConfig,
) -> Attempt {
    let damping_sq = cfg.damping * cfg.damping;
    let mut best: Option<Attempt> = None;
    let mut iterations = 0;
    loop {
        let (pose, jac) = pose_and_jacobian(design, root, &q).expect("joint vector sized from design");
        let e = pose_error(target, &pose);
        let norm = e.norm();
        if best.as_ref().is_none_or(|b| norm < b.norm) {
            best = Some(Attempt {
                q: q.clone(),
                residual: e,
                norm,
                iterations,
            });
        }
        if norm < cfg.residual_tolerance || iterations >= cfg.max_iterations {
            break;
        }
        iterations += 1;

        let Some(step) = projected_step(&jac, &e, &q, axes, damping_sq) else {
            break;
        };

        let mut moved_sq = 0.0;
        for ((value, axis), delta) in q.iter_mut().zip(axes).zip(step.iter()) {
            let updated = axis.clamp(*value + delta);
            moved_sq += (updated - *value).powi(2);
            *value = updated;
        }
        if moved_sq.sqrt() < cfg.step_tolerance {
            break;
        }
    }
    best.expect("at least one evaluation")
}

fn dls_step(jac: &Matrix6xX<f64>, e: &Vector6<f64>, damping_sq: f64) -> Option<DVector<f64>> {
    let gram: Matrix6<f64> = jac * jac.transpose() + Matrix6::identity() * damping_sq;
    let chol = gram.cholesky()?;
    Some(jac.transpose() * chol.solve(e))
}

/// Damped least-squares step restricted to the joints that can move: a joint
/// resting on a limit with the step pushing it outward is frozen and the step
/// recomputed for the others.
fn projected_step(
    jac: &Matrix6xX<f64>,
    e: &Vector6<f64>,
    q: &[f64],
    axes: &[JointAxis],
    damping_sq: f64,
) -> Option<DVector<f64>> {
    let mut active = jac.clone();
    let mut frozen = vec![false; q.len()];
    loop {
        let mut step = dls_step(&active, e, damping_sq)?;
        let mut changed = false;
        for k in 0..q.len() {
            if frozen[k] {
                step[k] = 0.0;
                continue;
            }
            let at_lower = q[k] <= axes[k].lower && step[k] < 0.0;
            let at_upper = q[k] >= axes[k].upper && step[k] > 0.0;
            if at_lower || at_upper {
                frozen[k] = true;
                active.column_mut(k).fill(0.0);
                changed = true;
            }
        }
        if !changed {
            return Some(step);
        }
    }
}

/// Solves for joint values bringing the tip of `design` (mounted at `root`)
/// to `target`. Never fails: a target that cannot be reached yields the best
/// residual found with `converged == false`.
pub fn solve_ik(design: &RobotDesign, root: &Pose, target: &Pose, cfg: &IkConfig) -> IkResult {
    let axes = design.axes();
    if axes.is_empty() {
        let pose = forward_kinematics(design, root, &[]).expect("zero-dof design");
        let e = pose_error(target, &pose);
        let norm = e.norm();
        return IkResult {
            q: Vec::new(),
            residual: e.into(),
            residual_norm: norm,
            converged: norm < cfg.residual_tolerance,
            iterations_used: 0,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Attempt> = None;
    for restart in 0..cfg.restarts.max(1) {
        let start = if restart == 0 {
            vec![0.0; axes.len()]
        } else {
            axes.iter()
                .map(|a| {
                    if a.upper > a.lower {
                        rng.random_range(a.lower..=a.upper)
                    } else {
                        a.lower
                    }
                })
                .collect()
        };
        let attempt = descend(design, root, target, &axes, start, cfg);
        if best.as_ref().is_none_or(|b| attempt.norm < b.norm) {
            best = Some(attempt);
        }
        if best.as_ref().is_some_and(|b| b.norm < cfg.residual_tolerance) {
            break;
        }
    }
    let best = best.expect("restarts >= 1");
    IkResult {
        converged: best.norm < cfg.residual_tolerance,
        residual: best.residual.into(),
        residual_norm: best.norm,
        iterations_used: best.iterations,
        q: best.q,
    }
}

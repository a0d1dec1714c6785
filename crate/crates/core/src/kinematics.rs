//! Forward kinematics, geometric Jacobian and pose error for decoded designs.

use nalgebra::{
    DMatrix, Isometry3, Matrix6xX, Translation3, Unit, UnitQuaternion, Vector3, Vector6,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{JointKind, LocalAxis, Motion, RobotDesign};

/// Position in meters and unit-quaternion orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "PoseRepr", into = "PoseRepr")]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    position: [f64; 3],
    /// `[w, x, y, z]`
    orientation: [f64; 4],
}

impl From<PoseRepr> for Pose {
    fn from(r: PoseRepr) -> Self {
        let [w, x, y, z] = r.orientation;
        Pose::new(
            Vector3::from(r.position),
            normalize_quaternion(nalgebra::Quaternion::new(w, x, y, z)),
        )
    }
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        let q = p.orientation.quaternion();
        PoseRepr {
            position: p.position.into(),
            orientation: [q.w, q.i, q.j, q.k],
        }
    }
}

/// Normalizes a quaternion unless it is already unit to within a few ulps, so
/// that already-normalized values survive a save/load cycle bit-for-bit.
pub fn normalize_quaternion(q: nalgebra::Quaternion<f64>) -> UnitQuaternion<f64> {
    if (q.norm_squared() - 1.0).abs() <= 4.0 * f64::EPSILON {
        UnitQuaternion::new_unchecked(q)
    } else {
        UnitQuaternion::from_quaternion(q)
    }
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Vector3::zeros(), UnitQuaternion::identity())
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        Self::new(iso.translation.vector, iso.rotation)
    }

    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

/// World-frame description of one actuated axis at the current configuration.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxisFrame {
    pub origin: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub rotational: bool,
}

fn local_unit(axis: LocalAxis) -> Unit<Vector3<f64>> {
    match axis {
        LocalAxis::X => Vector3::x_axis(),
        LocalAxis::Y => Vector3::y_axis(),
        LocalAxis::Z => Vector3::z_axis(),
    }
}

fn check_dof(design: &RobotDesign, q: &[f64]) -> Result<()> {
    let expected = design.dof();
    if q.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            given: q.len(),
        });
    }
    Ok(())
}

fn advance(frame: &mut Isometry3<f64>, distance: f64) {
    frame.translation.vector += frame.rotation * Vector3::new(0.0, 0.0, distance);
}

fn rotate(frame: &mut Isometry3<f64>, axis: LocalAxis, angle: f64) {
    frame.rotation *= UnitQuaternion::from_axis_angle(&local_unit(axis), angle);
    frame.rotation.renormalize();
}

/// Walks the chain, reporting every actuated axis, and returns the tip frame.
/// `q` must already have the right length.
pub(crate) fn walk_chain(
    design: &RobotDesign,
    root: &Pose,
    q: &[f64],
    mut on_axis: impl FnMut(AxisFrame),
) -> Isometry3<f64> {
    let mut frame = root.to_isometry();
    let mut next = q.iter().copied();
    for module in &design.modules {
        let half = 0.5 * module.length;
        match module.kind {
            JointKind::Fixed => advance(&mut frame, module.length),
            JointKind::Prismatic => {
                let extension = next.next().unwrap_or(0.0);
                on_axis(AxisFrame {
                    origin: frame.translation.vector,
                    direction: frame.rotation * Vector3::z(),
                    rotational: false,
                });
                advance(&mut frame, module.length + extension);
            }
            _ => {
                advance(&mut frame, half);
                for axis in module.axes() {
                    let Motion::Rotation(local) = axis.motion else {
                        unreachable!("rotational module with a translational axis")
                    };
                    on_axis(AxisFrame {
                        origin: frame.translation.vector,
                        direction: frame.rotation * local_unit(local).into_inner(),
                        rotational: true,
                    });
                    rotate(&mut frame, local, next.next().unwrap_or(0.0));
                }
                advance(&mut frame, half);
            }
        }
    }
    frame
}

/// End-effector pose of `design` mounted at `root` with joint values `q`.
pub fn forward_kinematics(design: &RobotDesign, root: &Pose, q: &[f64]) -> Result<Pose> {
    check_dof(design, q)?;
    Ok(Pose::from_isometry(&walk_chain(design, root, q, |_| {})))
}

/// End-effector pose together with the 6×n geometric Jacobian (linear rows first).
pub fn pose_and_jacobian(
    design: &RobotDesign,
    root: &Pose,
    q: &[f64],
) -> Result<(Pose, Matrix6xX<f64>)> {
    check_dof(design, q)?;
    let mut axes = Vec::with_capacity(q.len());
    let tip = walk_chain(design, root, q, |a| axes.push(a));
    let p_ee = tip.translation.vector;
    let mut jac = Matrix6xX::zeros(axes.len());
    for (k, axis) in axes.iter().enumerate() {
        let (linear, angular) = if axis.rotational {
            (axis.direction.cross(&(p_ee - axis.origin)), axis.direction)
        } else {
            (axis.direction, Vector3::zeros())
        };
        jac.fixed_view_mut::<3, 1>(0, k).copy_from(&linear);
        jac.fixed_view_mut::<3, 1>(3, k).copy_from(&angular);
    }
    Ok((Pose::from_isometry(&tip), jac))
}

/// Geometric Jacobian as a dynamically sized 6×n matrix.
pub fn jacobian(design: &RobotDesign, root: &Pose, q: &[f64]) -> Result<DMatrix<f64>> {
    let (_, jac) = pose_and_jacobian(design, root, q)?;
    Ok(DMatrix::from_column_slice(6, jac.ncols(), jac.as_slice()))
}

/// Six-vector error: positional difference on top, axis-angle of
/// `target · actual⁻¹` (angle in `[0, π]`) below.
pub fn pose_error(target: &Pose, actual: &Pose) -> Vector6<f64> {
    let dp = target.position - actual.position;
    let dr = if target.orientation == actual.orientation {
        Vector3::zeros()
    } else {
        (target.orientation * actual.orientation.inverse()).scaled_axis()
    };
    Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
}

/// Upper bound on the distance the tip can reach from the root.
pub fn chain_reach(design: &RobotDesign) -> f64 {
    design.modules.iter().map(|m| m.max_extent()).sum()
}

mod support;

use morphoforge_core::{chain_reach, forward_kinematics, jacobian, pose_error, random_genome, Pose};
use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use proptest::prelude::*;
use rand::Rng;
use support::{designs_covering_all_kinds, random_design, random_q, rng};

fn random_pose(r: &mut impl Rng) -> Pose {
    Pose::new(
        Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
        UnitQuaternion::from_euler_angles(r.random_range(-3.1..3.1), r.random_range(-1.5..1.5), r.random_range(-3.1..3.1)),
    )
}

#[test]
fn jacobian_matches_central_differences() {
    let mut r = rng(11);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for design in designs_covering_all_kinds(&mut r, 100) {
        let root = random_pose(&mut r);
        let q = random_q(&mut r, &design);
        let j = jacobian(&design, &root, &q).unwrap();
        assert_eq!(j.ncols(), design.dof());
        for k in 0..design.dof() {
            let mut plus = q.clone();
            let mut minus = q.clone();
            plus[k] += h;
            minus[k] -= h;
            let fp = forward_kinematics(&design, &root, &plus).unwrap();
            let fm = forward_kinematics(&design, &root, &minus).unwrap();
            let dp = (fp.position - fm.position) / (2.0 * h);
            let dw = (fp.orientation * fm.orientation.inverse()).scaled_axis() / (2.0 * h);
            for row in 0..3 {
                worst = worst.max((j[(row, k)] - dp[row]).abs());
                worst = worst.max((j[(row + 3, k)] - dw[row]).abs());
            }
        }
    }
    assert!(worst < 1e-5, "max deviation {worst:e}");
}

#[test]
fn zero_pose_is_a_straight_line_from_the_root() {
    let mut r = rng(3);
    for seed in 0..1000 {
        let design = random_genome(seed).decode().unwrap();
        let root = random_pose(&mut r);
        let tip = forward_kinematics(&design, &root, &vec![0.0; design.dof()]).unwrap();
        let expected = root.position + root.orientation * Vector3::z() * design.total_length();
        assert!((tip.position - expected).amax() < 1e-12);
        assert!(tip.orientation.angle_to(&root.orientation) < 1e-12);
    }
}

#[test]
fn tip_never_exceeds_the_reach_bound() {
    let mut r = rng(8);
    for _ in 0..1000 {
        let design = random_design(&mut r, 6);
        let q = random_q(&mut r, &design);
        let tip = forward_kinematics(&design, &Pose::identity(), &q).unwrap();
        assert!(tip.position.norm() <= chain_reach(&design) + 1e-12);
    }
}

#[test]
fn wrong_joint_count_is_rejected() {
    let d = random_design(&mut rng(1), 6);
    assert!(forward_kinematics(&d, &Pose::identity(), &vec![0.0; d.dof() + 1]).is_err());
    assert!(jacobian(&d, &Pose::identity(), &vec![0.0; d.dof() + 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pose_error_is_invariant_under_a_common_rigid_motion(
        seed in any::<u64>(),
        tx in -2.0..2.0f64, ty in -2.0..2.0f64, tz in -2.0..2.0f64,
        rr in -3.0..3.0f64, rp in -1.5..1.5f64, ry in -3.0..3.0f64,
    ) {
        let mut r = rng(seed);
        let a = random_pose(&mut r);
        let b = random_pose(&mut r);
        let g = Isometry3::from_parts(
            Translation3::new(tx, ty, tz),
            UnitQuaternion::from_euler_angles(rr, rp, ry),
        );
        let moved = |p: &Pose| Pose::from_isometry(&(g * p.to_isometry()));
        let before = pose_error(&a, &b);
        let after = pose_error(&moved(&a), &moved(&b));
        // positions rotate with the frame, so compare norms per block
        prop_assert!((before.fixed_rows::<3>(0).norm() - after.fixed_rows::<3>(0).norm()).abs() < 1e-9);
        prop_assert!((before.fixed_rows::<3>(3).norm() - after.fixed_rows::<3>(3).norm()).abs() < 1e-9);
    }

    #[test]
    fn pose_error_vanishes_only_on_equal_poses(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_pose(&mut r);
        prop_assert_eq!(pose_error(&a, &a).norm(), 0.0);
        let b = random_pose(&mut r);
        prop_assert!(pose_error(&a, &b).norm() > 0.0);
    }
}

mod support;

use std::f64::consts::PI;

use morphoforge_core::model::Motion;
use morphoforge_core::{export_urdf, forward_kinematics, JointKind, Pose, RobotDesign};
use support::{designs_covering_all_kinds, max_abs_diff, quat_to_mat, random_q, rng, walk_urdf};

#[test]
fn walked_urdf_matches_forward_kinematics() {
    let mut r = rng(42);
    for (i, design) in designs_covering_all_kinds(&mut r, 50).iter().enumerate() {
        let chain = walk_urdf(&export_urdf(design, &format!("design{i}")));
        assert_eq!(chain.movable().count(), design.dof());
        for _ in 0..5 {
            let q = random_q(&mut r, design);
            let (rot, pos) = chain.tip(&q);
            let fk = forward_kinematics(design, &Pose::identity(), &q).unwrap();
            let o = fk.orientation;
            let fk_rot = quat_to_mat([o.w, o.i, o.j, o.k]);
            for k in 0..3 {
                assert!((pos[k] - fk.position[k]).abs() < 1e-9, "{design}: {pos:?} vs {}", fk.position);
            }
            assert!(max_abs_diff(&rot, &fk_rot) < 1e-9, "{design}");
        }
    }
}

#[test]
fn exported_limits_match_the_module_limits() {
    let mut r = rng(9);
    for design in designs_covering_all_kinds(&mut r, 50) {
        let chain = walk_urdf(&export_urdf(&design, "limits"));
        let axes = design.axes();
        for (joint, axis) in chain.movable().zip(&axes) {
            let (lower, upper) = joint.limits.expect("movable joints carry limits");
            assert_eq!((lower, upper), (axis.lower, axis.upper), "{}", joint.name);
            match axis.motion {
                Motion::Rotation(_) => assert_eq!(joint.kind, "revolute"),
                Motion::Translation(_) => assert_eq!(joint.kind, "prismatic"),
            }
        }
    }
}

#[test]
fn limits_by_kind() {
    let design: RobotDesign = "R:0.2,P:0.2,Y:0.2,O:0.2,S:0.3,F:0.1".parse().unwrap();
    let chain = walk_urdf(&export_urdf(&design, "kinds"));
    let limits: Vec<(f64, f64)> = chain.movable().map(|j| j.limits.unwrap()).collect();
    let rp = (-0.75 * PI, 0.75 * PI);
    assert_eq!(limits, vec![rp, rp, (-2.0 * PI, 2.0 * PI), rp, rp, (0.0, 0.3)]);
    assert_eq!(chain.joints.iter().filter(|j| j.kind == "fixed").count(), 6);
}

#[test]
fn fixed_chain_extends_along_z() {
    let design = RobotDesign::new(vec![morphoforge_core::JointModule::new(JointKind::Fixed, 0.2).unwrap(); 6]).unwrap();
    let chain = walk_urdf(&export_urdf(&design, "fixed"));
    assert_eq!(chain.movable().count(), 0);
    let (_, tip) = chain.tip(&[]);
    assert!(tip[0].abs() < 1e-12 && tip[1].abs() < 1e-12);
    assert!((tip[2] - 1.2).abs() < 1e-12);
}

//! URDF export of a design in its straight-line zero pose.
//!
//! Every module starts with a fixed `mount` joint onto the previous segment.
//! Rotational modules split into a proximal and a distal half-link around
//! their revolute joint(s); an orthogonal module inserts a zero-length link
//! between its roll and pitch axes. Prismatic modules slide a zero-length
//! carriage along the end of their base link. Segment lengths are carried by
//! the cylinder visuals, so the tip sits at the far end of the last link.

use std::fmt::Write as _;

use crate::model::{JointKind, LocalAxis, Motion, RobotDesign};

const LINK_RADIUS: f64 = 0.02;
const PLACEHOLDER_MASS: f64 = 0.01;
const PLACEHOLDER_INERTIA: f64 = 1e-6;
const EFFORT_LIMIT: f64 = 100.0;
const VELOCITY_LIMIT: f64 = 1.0;

struct Emitter {
    out: String,
    parent: String,
    parent_length: f64,
}

impl Emitter {
    fn link(&mut self, name: &str, length: f64) {
        let _ = writeln!(self.out, "  <link name=\"{name}\">");
        if length > 0.0 {
            let _ = writeln!(
                self.out,
                "    <visual>\n      <origin xyz=\"0 0 {}\" rpy=\"0 0 0\"/>\n      <geometry>\n        <cylinder radius=\"{LINK_RADIUS}\" length=\"{length}\"/>\n      </geometry>\n    </visual>",
                length / 2.0
            );
        }
        let _ = writeln!(
            self.out,
            "    <inertial>\n      <origin xyz=\"0 0 {}\" rpy=\"0 0 0\"/>\n      <mass value=\"{PLACEHOLDER_MASS}\"/>\n      <inertia ixx=\"{PLACEHOLDER_INERTIA}\" ixy=\"0\" ixz=\"0\" iyy=\"{PLACEHOLDER_INERTIA}\" iyz=\"0\" izz=\"{PLACEHOLDER_INERTIA}\"/>\n    </inertial>",
            length / 2.0
        );
        self.out.push_str("  </link>\n");
    }

    /// Attaches `child` (a segment of `length`) to the current parent, with
    /// the joint origin `offset` along the parent's +z.
    fn joint(
        &mut self,
        name: &str,
        kind: &str,
        offset: f64,
        axis: Option<(LocalAxis, f64, f64)>,
        child: &str,
        length: f64,
    ) {
        let _ = writeln!(self.out, "  <joint name=\"{name}\" type=\"{kind}\">");
        let _ = writeln!(self.out, "    <parent link=\"{}\"/>", self.parent);
        let _ = writeln!(self.out, "    <child link=\"{child}\"/>");
        let _ = writeln!(self.out, "    <origin xyz=\"0 0 {offset}\" rpy=\"0 0 0\"/>");
        if let Some((axis, lower, upper)) = axis {
            let [x, y, z] = axis.unit();
            let _ = writeln!(self.out, "    <axis xyz=\"{x} {y} {z}\"/>");
            let _ = writeln!(
                self.out,
                "    <limit lower=\"{lower}\" upper=\"{upper}\" effort=\"{EFFORT_LIMIT}\" velocity=\"{VELOCITY_LIMIT}\"/>"
            );
        }
        self.out.push_str("  </joint>\n");
        self.link(child, length);
        self.parent = child.to_string();
        self.parent_length = length;
    }

    fn mount(&mut self, prefix: &str, child: &str, length: f64) {
        let offset = self.parent_length;
        self.joint(&format!("{prefix}_mount"), "fixed", offset, None, child, length);
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// Renders `design` as a URDF document rooted at `base_link`.
pub fn export_urdf(design: &RobotDesign, name: &str) -> String {
    let mut e = Emitter {
        out: String::new(),
        parent: "base_link".to_string(),
        parent_length: 0.0,
    };
    e.out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(e.out, "<robot name=\"{}\">", escape(name));
    let _ = writeln!(e.out, "  <!-- design: {} -->", design);
    e.link("base_link", 0.0);

    for (i, module) in design.modules.iter().enumerate() {
        let prefix = format!("m{}", i + 1);
        let length = module.length;
        match module.kind {
            JointKind::Fixed => e.mount(&prefix, &format!("{prefix}_link"), length),
            JointKind::Prismatic => {
                let axis = module.axes()[0];
                e.mount(&prefix, &format!("{prefix}_base"), length);
                e.joint(
                    &format!("{prefix}_slide"),
                    "prismatic",
                    length,
                    Some((LocalAxis::Z, axis.lower, axis.upper)),
                    &format!("{prefix}_slider"),
                    0.0,
                );
            }
            _ => {
                let half = length / 2.0;
                e.mount(&prefix, &format!("{prefix}_proximal"), half);
                let axes = module.axes();
                let names: &[&str] = if module.kind == JointKind::Orthogonal {
                    &["roll", "pitch"]
                } else {
                    &["joint"]
                };
                for (k, (axis, joint_name)) in axes.iter().zip(names).enumerate() {
                    let Motion::Rotation(local) = axis.motion else {
                        unreachable!("rotational module")
                    };
                    let last = k + 1 == axes.len();
                    let (child, child_len) = if last {
                        (format!("{prefix}_distal"), half)
                    } else {
                        (format!("{prefix}_axis"), 0.0)
                    };
                    let offset = if k == 0 { half } else { 0.0 };
                    e.joint(
                        &format!("{prefix}_{joint_name}"),
                        "revolute",
                        offset,
                        Some((local, axis.lower, axis.upper)),
                        &child,
                        child_len,
                    );
                }
            }
        }
    }
    e.out.push_str("</robot>\n");
    e.out
}

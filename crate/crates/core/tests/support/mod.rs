//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls into the kinematics or sorting code it is used to check.
#![allow(dead_code)]

use std::collections::HashMap;

use morphoforge_core::{Genome, JointKind, RobotDesign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat3 = [[f64; 3]; 3];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat_vec(a: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
}

const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Rodrigues' formula for a unit axis.
fn axis_angle(axis: [f64; 3], angle: f64) -> Mat3 {
    let [x, y, z] = axis;
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// URDF fixed-axis roll-pitch-yaw: Rz(yaw) * Ry(pitch) * Rx(roll).
fn rpy(r: f64, p: f64, y: f64) -> Mat3 {
    let rx = axis_angle([1.0, 0.0, 0.0], r);
    let ry = axis_angle([0.0, 1.0, 0.0], p);
    let rz = axis_angle([0.0, 0.0, 1.0], y);
    mat_mul(&rz, &mat_mul(&ry, &rx))
}

fn parse3(s: &str) -> [f64; 3] {
    let v: Vec<f64> = s.split_whitespace().map(|t| t.parse().unwrap()).collect();
    [v[0], v[1], v[2]]
}

#[derive(Debug, Clone)]
pub struct UrdfJoint {
    pub name: String,
    pub kind: String,
    pub parent: String,
    pub child: String,
    pub xyz: [f64; 3],
    pub rpy: [f64; 3],
    pub axis: [f64; 3],
    pub limits: Option<(f64, f64)>,
}

#[derive(Debug)]
pub struct UrdfChain {
    pub joints: Vec<UrdfJoint>,
    pub tip_length: f64,
}

impl UrdfChain {
    pub fn movable(&self) -> impl Iterator<Item = &UrdfJoint> {
        self.joints.iter().filter(|j| j.kind != "fixed")
    }

    /// Tip rotation (row-major) and position for the movable joint values `q`.
    pub fn tip(&self, q: &[f64]) -> (Mat3, [f64; 3]) {
        let mut rot = IDENTITY;
        let mut pos = [0.0; 3];
        let mut values = q.iter();
        for j in &self.joints {
            let offset = mat_vec(&rot, j.xyz);
            pos = [0, 1, 2].map(|i| pos[i] + offset[i]);
            rot = mat_mul(&rot, &rpy(j.rpy[0], j.rpy[1], j.rpy[2]));
            match j.kind.as_str() {
                "revolute" | "continuous" => {
                    rot = mat_mul(&rot, &axis_angle(j.axis, *values.next().unwrap()));
                }
                "prismatic" => {
                    let d = *values.next().unwrap();
                    let slide = mat_vec(&rot, j.axis);
                    pos = [0, 1, 2].map(|i| pos[i] + d * slide[i]);
                }
                _ => {}
            }
        }
        let end = mat_vec(&rot, [0.0, 0.0, self.tip_length]);
        (rot, [0, 1, 2].map(|i| pos[i] + end[i]))
    }
}

/// Parses an exported URDF into its serial joint sequence, root to leaf.
pub fn walk_urdf(xml: &str) -> UrdfChain {
    let doc = roxmltree::Document::parse(xml).expect("well-formed XML");
    let robot = doc.root_element();
    assert_eq!(robot.tag_name().name(), "robot");
    let mut by_parent: HashMap<String, UrdfJoint> = HashMap::new();
    let mut children = std::collections::HashSet::new();
    let mut cylinder: HashMap<String, f64> = HashMap::new();
    let mut links = Vec::new();
    for node in robot.children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "link" => {
                let name = node.attribute("name").unwrap().to_string();
                if let Some(c) = node.descendants().find(|n| n.has_tag_name("cylinder")) {
                    cylinder.insert(name.clone(), c.attribute("length").unwrap().parse().unwrap());
                }
                links.push(name);
            }
            "joint" => {
                let child_attr = |tag: &str, attr: &str| {
                    node.children()
                        .find(|n| n.has_tag_name(tag))
                        .and_then(|n| n.attribute(attr).map(str::to_string))
                };
                let joint = UrdfJoint {
                    name: node.attribute("name").unwrap().to_string(),
                    kind: node.attribute("type").unwrap().to_string(),
                    parent: child_attr("parent", "link").unwrap(),
                    child: child_attr("child", "link").unwrap(),
                    xyz: child_attr("origin", "xyz").map_or([0.0; 3], |s| parse3(&s)),
                    rpy: child_attr("origin", "rpy").map_or([0.0; 3], |s| parse3(&s)),
                    axis: child_attr("axis", "xyz").map_or([1.0, 0.0, 0.0], |s| parse3(&s)),
                    limits: child_attr("limit", "lower")
                        .zip(child_attr("limit", "upper"))
                        .map(|(l, u)| (l.parse().unwrap(), u.parse().unwrap())),
                };
                children.insert(joint.child.clone());
                assert!(
                    by_parent.insert(joint.parent.clone(), joint).is_none(),
                    "exported URDF must be a serial chain"
                );
            }
            _ => {}
        }
    }
    let roots: Vec<&String> = links.iter().filter(|l| !children.contains(*l)).collect();
    assert_eq!(roots.len(), 1, "exactly one root link");
    let mut current = roots[0].clone();
    let mut joints = Vec::new();
    while let Some(j) = by_parent.remove(&current) {
        current = j.child.clone();
        joints.push(j);
    }
    assert!(by_parent.is_empty(), "all joints reachable from the root");
    UrdfChain {
        joints,
        tip_length: cylinder.get(&current).copied().unwrap_or(0.0),
    }
}

/// Row-major rotation matrix of a `[w, x, y, z]` unit quaternion.
pub fn quat_to_mat(q: [f64; 4]) -> Mat3 {
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn max_abs_diff(a: &Mat3, b: &Mat3) -> f64 {
    (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| (a[i][j] - b[i][j]).abs())
        .fold(0.0, f64::max)
}

/// O(n²·m) front classification straight from the definition of dominance.
pub fn brute_force_fronts(points: &[Vec<f64>]) -> Vec<usize> {
    let dominates = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
    };
    let mut rank = vec![usize::MAX; points.len()];
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut level = 0;
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        for &i in &front {
            rank[i] = level;
        }
        remaining.retain(|i| !front.contains(i));
        level += 1;
    }
    rank
}

pub fn random_design(rng: &mut impl Rng, n_modules: usize) -> RobotDesign {
    Genome::random(n_modules, rng).decode().unwrap()
}

/// Random 6-module design whose DOF lies in `dof_range`.
pub fn random_design_with_dof(rng: &mut impl Rng, dof_range: std::ops::RangeInclusive<usize>) -> RobotDesign {
    loop {
        let d = random_design(rng, 6);
        if dof_range.contains(&d.dof()) {
            return d;
        }
    }
}

/// Random design in which every kind appears at least once among `n` designs.
pub fn designs_covering_all_kinds(rng: &mut impl Rng, n: usize) -> Vec<RobotDesign> {
    let mut designs: Vec<RobotDesign> = (0..n).map(|_| random_design(rng, 6)).collect();
    for (i, kind) in JointKind::ALL.into_iter().enumerate() {
        designs[i].modules[0].kind = kind;
        designs[i].modules[0].length = kind.decode_length(0.5);
    }
    designs
}

pub fn random_q(rng: &mut impl Rng, design: &RobotDesign) -> Vec<f64> {
    design
        .axes()
        .iter()
        .map(|a| {
            if a.upper > a.lower {
                rng.random_range(a.lower..=a.upper)
            } else {
                a.lower
            }
        })
        .collect()
}

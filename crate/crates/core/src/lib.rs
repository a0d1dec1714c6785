//! Automatic design of modular serial robots.
//!
//! A robot is a chain of joint modules (roll, pitch, yaw, orthogonal two-axis,
//! prismatic and fixed), each with one length parameter. [`nsga2`] searches
//! over module kinds and lengths to trade off how well the robot reaches a set
//! of target poses ([`objectives::eval_task`]) against how many joints and how
//! much link length it needs ([`objectives::eval_design`]).

pub mod archive;
pub mod error;
pub mod ik;
pub mod kinematics;
pub mod model;
pub mod nsga2;
pub mod objectives;
pub mod scenario;
pub mod urdf;

pub use archive::{extract_pareto, hypervolume_2d, ArchiveRecord, ParetoArchive, RunSnapshot};
pub use error::{Error, ErrorKind, Result};
pub use ik::{solve_ik, IkConfig, IkOverrides, IkResult};
pub use kinematics::{chain_reach, forward_kinematics, jacobian, pose_error, Pose};
pub use model::{
    decode_genome, design_dof, random_genome, Genome, JointKind, JointModule, RobotDesign,
    DEFAULT_MODULE_COUNT,
};
pub use nsga2::{Optimizer, OptimizerConfig, ProgressEvent, ProgressSink};
pub use objectives::{eval_design, eval_task, evaluate, EvaluationResult, Evaluator};
pub use scenario::{builtin_scenario, builtin_scenarios, load_scenario, resolve_scenario, save_scenario, Scenario};
pub use urdf::export_urdf;

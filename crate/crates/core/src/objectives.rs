//! The two minimization objectives: task error and design cost.

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::ik::{solve_ik, IkConfig, IkResult};
use crate::kinematics::Pose;
use crate::model::{Genome, JointKind, RobotDesign};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub e_task: f64,
    pub e_design: f64,
    pub per_target: Vec<f64>,
    pub e_design_joint: u32,
    pub e_design_length: f64,
}

impl EvaluationResult {
    pub fn objectives(&self) -> [f64; 2] {
        [self.e_task, self.e_design]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignCost {
    pub e_design: f64,
    pub joint: u32,
    pub length: f64,
}

/// Weighted joint count (orthogonal modules count twice) plus total length.
pub fn eval_design(design: &RobotDesign) -> DesignCost {
    let joint = design
        .modules
        .iter()
        .map(|m| match m.kind {
            JointKind::Orthogonal => 2,
            JointKind::Fixed => 0,
            _ => 1,
        })
        .sum::<u32>();
    let length = design.modules.iter().map(|m| m.length).sum::<f64>();
    DesignCost {
        e_design: joint as f64 + length,
        joint,
        length,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEvaluation {
    pub e_task: f64,
    pub solutions: Vec<IkResult>,
}

impl TaskEvaluation {
    pub fn per_target(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.residual_norm).collect()
    }
}

/// Deterministic 64-bit seed from arbitrary byte strings.
pub fn derive_seed(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest is 32 bytes"))
}

fn pose_bytes(pose: &Pose) -> Vec<u8> {
    pose.position
        .iter()
        .chain(pose.orientation.coords.iter())
        .flat_map(|v| v.to_bits().to_le_bytes())
        .collect()
}

/// Sum in ascending order, so the total does not depend on target order.
fn ordered_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().sum()
}

/// Solves IK for every target independently and sums the residual norms.
///
/// Each target's IK seed is derived from `ik.seed` and the target pose itself,
/// which makes the result independent of target order.
pub fn eval_task(design: &RobotDesign, scenario: &Scenario, ik: &IkConfig) -> TaskEvaluation {
    let base = ik.seed.to_le_bytes();
    let solutions: Vec<IkResult> = scenario
        .targets
        .iter()
        .map(|target| {
            let cfg = ik.with_seed(derive_seed(&[&base, &pose_bytes(target)]));
            solve_ik(design, &scenario.root, target, &cfg)
        })
        .collect();
    let norms: Vec<f64> = solutions.iter().map(|s| s.residual_norm).collect();
    TaskEvaluation {
        e_task: ordered_sum(&norms),
        solutions,
    }
}

/// Evaluates genomes against one scenario with a fixed run seed.
///
/// Per-genome IK seeds come from the run seed and the genome's canonical
/// bytes, so results never depend on evaluation order or thread count.
pub struct Evaluator {
    scenario: Scenario,
    ik: IkConfig,
    cache: Option<DashMap<Vec<u8>, EvaluationResult>>,
}

impl Evaluator {
    pub fn new(scenario: Scenario, ik: IkConfig) -> Result<Self> {
        scenario.validate()?;
        ik.validate()?;
        Ok(Self {
            scenario,
            ik,
            cache: None,
        })
    }

    /// Memoize results by genome. Only affects speed.
    pub fn with_cache(mut self) -> Self {
        self.cache = Some(DashMap::new());
        self
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn ik_config(&self) -> &IkConfig {
        &self.ik
    }

    pub fn genome_ik_config(&self, genome: &Genome) -> IkConfig {
        let seed = derive_seed(&[&self.ik.seed.to_le_bytes(), &genome.canonical_bytes()]);
        self.ik.with_seed(seed)
    }

    pub fn evaluate(&self, genome: &Genome) -> Result<EvaluationResult> {
        let key = genome.canonical_bytes();
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            return Ok(hit.clone());
        }
        let design = genome.decode()?;
        let task = eval_task(&design, &self.scenario, &self.genome_ik_config(genome));
        let cost = eval_design(&design);
        let result = EvaluationResult {
            e_task: task.e_task,
            per_target: task.per_target(),
            e_design: cost.e_design,
            e_design_joint: cost.joint,
            e_design_length: cost.length,
        };
        if let Some(cache) = &self.cache {
            cache.insert(key, result.clone());
        }
        Ok(result)
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.as_ref().map_or(0, DashMap::len)
    }
}

/// Convenience wrapper around [`Evaluator`] for a single genome.
pub fn evaluate(genome: &Genome, scenario: &Scenario, ik: &IkConfig) -> Result<EvaluationResult> {
    Evaluator::new(scenario.clone(), *ik)?.evaluate(genome)
}

//! Scenario definition, file loading/saving and the builtin target sets.
//!
//! Scenario files are TOML:
//!
//! ```toml
//! name = "my-task"
//! n_modules = 6
//!
//! [root]
//! xyz = [0.0, 0.0, 0.0]
//! rpy = [0.0, 0.0, 0.0]        # or quat = [w, x, y, z]
//!
//! [[targets]]
//! xyz = [0.4, 0.0, 0.3]
//! quat = [1.0, 0.0, 0.0, 0.0]
//!
//! [ik]                         # optional, any subset of IkConfig fields
//! restarts = 5
//! ```

use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ik::{IkConfig, IkOverrides};
use crate::kinematics::{normalize_quaternion, Pose};
use crate::model::DEFAULT_MODULE_COUNT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioDoc", into = "ScenarioDoc")]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub root: Pose,
    pub targets: Vec<Pose>,
    pub n_modules: usize,
    pub ik: IkOverrides,
}

impl Scenario {
    pub fn new(name: impl Into<String>, root: Pose, targets: Vec<Pose>) -> Result<Self> {
        let scenario = Self {
            name: name.into(),
            description: None,
            root,
            targets,
            n_modules: DEFAULT_MODULE_COUNT,
            ik: IkOverrides::default(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must be non-empty"));
        }
        if self.targets.is_empty() {
            return Err(Error::config("targets", "targets must be non-empty"));
        }
        if self.n_modules == 0 {
            return Err(Error::config("n_modules", "must be at least 1"));
        }
        let finite = |p: &Pose| {
            p.position.iter().all(|v| v.is_finite())
                && p.orientation.coords.iter().all(|v| v.is_finite())
        };
        if !finite(&self.root) {
            return Err(Error::config("root", "contains non-finite values"));
        }
        if let Some(i) = self.targets.iter().position(|t| !finite(t)) {
            return Err(Error::config(format!("targets[{i}]"), "contains non-finite values"));
        }
        self.ik.apply(IkConfig::default()).validate()
    }

    /// IK settings for this scenario: defaults, then the scenario's own overrides.
    pub fn ik_config(&self) -> IkConfig {
        self.ik.apply(IkConfig::default())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&ScenarioDoc::from(self.clone())).expect("scenario documents always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: ScenarioDoc = toml::from_str(text).map_err(|e| Error::ScenarioParse(e.to_string()))?;
        Scenario::try_from(doc)
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_toml(&text).map_err(|e| match e {
        Error::ScenarioParse(msg) => Error::ScenarioParse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario.to_toml()).map_err(|e| Error::io(path, e))
}

const BUILTIN_SOURCES: [(&str, &str); 3] = [
    ("target-arm", include_str!("../data/target-arm.toml")),
    ("target-leg", include_str!("../data/target-leg.toml")),
    ("target-wide", include_str!("../data/target-wide.toml")),
];

/// The approximate ARM, LEG and WIDE target sets shipped with the crate.
pub fn builtin_scenarios() -> Vec<Scenario> {
    BUILTIN_SOURCES
        .iter()
        .map(|(name, src)| {
            Scenario::from_toml(src).unwrap_or_else(|e| panic!("builtin scenario {name}: {e}"))
        })
        .collect()
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    BUILTIN_SOURCES
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, src)| Scenario::from_toml(src).expect("builtin scenarios are valid"))
}

/// Builtin name if it matches one, otherwise a path to a scenario file.
pub fn resolve_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = builtin_scenario(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::UnknownScenario(name_or_path.to_string()));
    }
    load_scenario(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseDoc {
    xyz: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rpy: Option<[f64; 3]>,
    /// `[w, x, y, z]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quat: Option<[f64; 4]>,
}

impl PoseDoc {
    fn into_pose(self, field: &str) -> Result<Pose> {
        let orientation = match (self.rpy, self.quat) {
            (Some(_), Some(_)) => {
                return Err(Error::config(field, "give either rpy or quat, not both"));
            }
            (Some([r, p, y]), None) => UnitQuaternion::from_euler_angles(r, p, y),
            (None, Some([w, x, y, z])) => {
                let q = Quaternion::new(w, x, y, z);
                if !(q.norm() > 1e-12) {
                    return Err(Error::config(field, "quaternion must be non-zero"));
                }
                normalize_quaternion(q)
            }
            (None, None) => UnitQuaternion::identity(),
        };
        Ok(Pose::new(Vector3::from(self.xyz), orientation))
    }
}

impl From<&Pose> for PoseDoc {
    fn from(p: &Pose) -> Self {
        let q = p.orientation.quaternion();
        PoseDoc {
            xyz: p.position.into(),
            rpy: None,
            quat: Some([q.w, q.i, q.j, q.k]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(default = "default_modules")]
    n_modules: usize,
    root: PoseDoc,
    #[serde(default)]
    targets: Vec<PoseDoc>,
    #[serde(default, skip_serializing_if = "IkOverrides::is_empty")]
    ik: IkOverrides,
}

fn default_modules() -> usize {
    DEFAULT_MODULE_COUNT
}

impl TryFrom<ScenarioDoc> for Scenario {
    type Error = Error;

    fn try_from(doc: ScenarioDoc) -> Result<Self> {
        let root = doc.root.into_pose("root")?;
        let targets = doc
            .targets
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.into_pose(&format!("targets[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let scenario = Scenario {
            name: doc.name,
            description: doc.description,
            root,
            targets,
            n_modules: doc.n_modules,
            ik: doc.ik,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl From<Scenario> for ScenarioDoc {
    fn from(s: Scenario) -> Self {
        ScenarioDoc {
            name: s.name,
            description: s.description,
            n_modules: s.n_modules,
            root: PoseDoc::from(&s.root),
            targets: s.targets.iter().map(PoseDoc::from).collect(),
            ik: s.ik,
        }
    }
}

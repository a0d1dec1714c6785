//! Joint modules, the design genome and decoding between the two.
//!
//! A robot is a serial chain of joint modules laid out along the local +z
//! axis. Every module has a single length parameter `L`; how that length is
//! split around the joint depends on the module kind:
//!
//! | kind | axes | geometry at zero |
//! |------|------|------------------|
//! | `R` roll | rotation about local +x | `L/2`, joint, `L/2` |
//! | `P` pitch | rotation about local +y | `L/2`, joint, `L/2` |
//! | `Y` yaw | rotation about local +z | `L/2`, joint, `L/2` |
//! | `O` orthogonal | roll then pitch, co-located | `L/2`, joints, `L/2` |
//! | `S` prismatic | translation along local +z | `L`, extends up to `2L` |
//! | `F` fixed | none | rigid link of length `L` |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of modules per robot used throughout the original experiments.
pub const DEFAULT_MODULE_COUNT: usize = 6;

const ROLL_PITCH_LIMIT: f64 = 0.75 * PI;
const YAW_LIMIT: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JointKind {
    #[serde(rename = "R")]
    Roll,
    #[serde(rename = "P")]
    Pitch,
    #[serde(rename = "Y")]
    Yaw,
    #[serde(rename = "O")]
    Orthogonal,
    #[serde(rename = "S")]
    Prismatic,
    #[serde(rename = "F")]
    Fixed,
}

impl JointKind {
    pub const ALL: [JointKind; 6] = [
        JointKind::Roll,
        JointKind::Pitch,
        JointKind::Yaw,
        JointKind::Orthogonal,
        JointKind::Prismatic,
        JointKind::Fixed,
    ];

    pub fn letter(self) -> char {
        match self {
            JointKind::Roll => 'R',
            JointKind::Pitch => 'P',
            JointKind::Yaw => 'Y',
            JointKind::Orthogonal => 'O',
            JointKind::Prismatic => 'S',
            JointKind::Fixed => 'F',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        JointKind::ALL
            .into_iter()
            .find(|k| k.letter() == c.to_ascii_uppercase())
    }

    /// Position of the kind in [`JointKind::ALL`]; used as the categorical gene value.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Admissible module length `[L^min, L^max]` in meters.
    pub fn length_range(self) -> (f64, f64) {
        match self {
            JointKind::Yaw | JointKind::Fixed => (0.01, 0.5),
            JointKind::Roll | JointKind::Pitch | JointKind::Orthogonal | JointKind::Prismatic => {
                (0.1, 0.5)
            }
        }
    }

    pub fn dof(self) -> usize {
        match self {
            JointKind::Fixed => 0,
            JointKind::Orthogonal => 2,
            _ => 1,
        }
    }

    /// Maps a coefficient in `[0, 1]` onto this kind's length range.
    pub fn decode_length(self, coefficient: f64) -> f64 {
        let (min, max) = self.length_range();
        ((max - min) * coefficient + min).clamp(min, max)
    }

    /// Inverse of [`JointKind::decode_length`].
    pub fn encode_length(self, length: f64) -> f64 {
        let (min, max) = self.length_range();
        ((length - min) / (max - min)).clamp(0.0, 1.0)
    }
}

impl fmt::Display for JointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Local coordinate axis of a module frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalAxis {
    X,
    Y,
    Z,
}

impl LocalAxis {
    pub fn unit(self) -> [f64; 3] {
        match self {
            LocalAxis::X => [1.0, 0.0, 0.0],
            LocalAxis::Y => [0.0, 1.0, 0.0],
            LocalAxis::Z => [0.0, 0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    Rotation(LocalAxis),
    Translation(LocalAxis),
}

/// One actuated degree of freedom with its admissible interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAxis {
    pub motion: Motion,
    pub lower: f64,
    pub upper: f64,
}

impl JointAxis {
    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.lower, self.upper)
    }

    pub fn is_rotational(&self) -> bool {
        matches!(self.motion, Motion::Rotation(_))
    }
}

/// A joint module instantiated with a concrete length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointModule {
    pub kind: JointKind,
    pub length: f64,
}

impl JointModule {
    /// Builds a module, rejecting lengths outside the kind's admissible range.
    pub fn new(kind: JointKind, length: f64) -> Result<Self> {
        let (min, max) = kind.length_range();
        if !(min..=max).contains(&length) {
            return Err(Error::LengthOutOfRange {
                index: 0,
                kind,
                length,
                min,
                max,
            });
        }
        Ok(Self { kind, length })
    }

    /// Actuated axes, proximal first. `O` yields roll then pitch.
    pub fn axes(&self) -> Vec<JointAxis> {
        let rot = |axis, limit: f64| JointAxis {
            motion: Motion::Rotation(axis),
            lower: -limit,
            upper: limit,
        };
        match self.kind {
            JointKind::Roll => vec![rot(LocalAxis::X, ROLL_PITCH_LIMIT)],
            JointKind::Pitch => vec![rot(LocalAxis::Y, ROLL_PITCH_LIMIT)],
            JointKind::Yaw => vec![rot(LocalAxis::Z, YAW_LIMIT)],
            JointKind::Orthogonal => vec![
                rot(LocalAxis::X, ROLL_PITCH_LIMIT),
                rot(LocalAxis::Y, ROLL_PITCH_LIMIT),
            ],
            JointKind::Prismatic => vec![JointAxis {
                motion: Motion::Translation(LocalAxis::Z),
                lower: 0.0,
                upper: self.length,
            }],
            JointKind::Fixed => Vec::new(),
        }
    }

    /// Motion range of the module. A fixed module reports the degenerate `[0, 0]`.
    pub fn limits(&self) -> Vec<(f64, f64)> {
        match self.kind {
            JointKind::Fixed => vec![(0.0, 0.0)],
            _ => self.axes().iter().map(|a| (a.lower, a.upper)).collect(),
        }
    }

    /// Largest distance between the module's two ends over its motion range.
    pub fn max_extent(&self) -> f64 {
        match self.kind {
            JointKind::Prismatic => 2.0 * self.length,
            _ => self.length,
        }
    }
}

/// Search representation: one categorical and one continuous gene per module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub kinds: Vec<JointKind>,
    pub coefficients: Vec<f64>,
}

impl Genome {
    pub fn new(kinds: Vec<JointKind>, coefficients: Vec<f64>) -> Result<Self> {
        let genome = Self {
            kinds,
            coefficients,
        };
        genome.validate()?;
        Ok(genome)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinds.len() != self.coefficients.len() {
            return Err(Error::GenomeShape {
                kinds: self.kinds.len(),
                coefficients: self.coefficients.len(),
            });
        }
        for (index, &value) in self.coefficients.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::GeneOutOfRange { index, value });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// Canonical byte encoding used for seeding and memoization.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * 9);
        for (kind, c) in self.kinds.iter().zip(&self.coefficients) {
            out.push(kind.index() as u8);
            // +0.0 and -0.0 decode identically
            let c = if *c == 0.0 { 0.0f64 } else { *c };
            out.extend_from_slice(&c.to_bits().to_le_bytes());
        }
        out
    }

    pub fn random(n_modules: usize, rng: &mut impl Rng) -> Self {
        let kinds = (0..n_modules)
            .map(|_| JointKind::ALL[rng.random_range(0..JointKind::ALL.len())])
            .collect();
        let coefficients = (0..n_modules).map(|_| rng.random_range(0.0..=1.0)).collect();
        Self {
            kinds,
            coefficients,
        }
    }

    pub fn decode(&self) -> Result<RobotDesign> {
        decode_genome(self)
    }
}

/// Uniformly random genome of [`DEFAULT_MODULE_COUNT`] modules, deterministic in `seed`.
pub fn random_genome(seed: u64) -> Genome {
    Genome::random(DEFAULT_MODULE_COUNT, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn decode_genome(genome: &Genome) -> Result<RobotDesign> {
    genome.validate()?;
    let modules = genome
        .kinds
        .iter()
        .zip(&genome.coefficients)
        .map(|(&kind, &c)| JointModule {
            kind,
            length: kind.decode_length(c),
        })
        .collect();
    Ok(RobotDesign { modules })
}

/// A concrete serial robot, modules ordered from root to tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotDesign {
    pub modules: Vec<JointModule>,
}

impl RobotDesign {
    pub fn new(modules: Vec<JointModule>) -> Result<Self> {
        for (index, m) in modules.iter().enumerate() {
            let (min, max) = m.kind.length_range();
            if !(min..=max).contains(&m.length) {
                return Err(Error::LengthOutOfRange {
                    index,
                    kind: m.kind,
                    length: m.length,
                    min,
                    max,
                });
            }
        }
        Ok(Self { modules })
    }

    pub fn dof(&self) -> usize {
        design_dof(self)
    }

    pub fn total_length(&self) -> f64 {
        self.modules.iter().map(|m| m.length).sum()
    }

    /// All actuated axes in proximal-to-distal order.
    pub fn axes(&self) -> Vec<JointAxis> {
        self.modules.iter().flat_map(|m| m.axes()).collect()
    }

    /// Kind letters concatenated, e.g. `YPSFFF`.
    pub fn kind_string(&self) -> String {
        self.modules.iter().map(|m| m.kind.letter()).collect()
    }

    pub fn to_genome(&self) -> Genome {
        Genome {
            kinds: self.modules.iter().map(|m| m.kind).collect(),
            coefficients: self
                .modules
                .iter()
                .map(|m| m.kind.encode_length(m.length))
                .collect(),
        }
    }
}

pub fn design_dof(design: &RobotDesign) -> usize {
    design.modules.iter().map(|m| m.kind.dof()).sum()
}

impl fmt::Display for RobotDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.modules.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", m.kind, m.length)?;
        }
        Ok(())
    }
}

/// Parses `KIND:LENGTH,...`, e.g. `Y:0.3,P:0.25,S:0.2,F:0.01`.
impl FromStr for RobotDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut modules = Vec::new();
        let mut column = 1;
        for (entry, raw) in s.split(',').enumerate() {
            let err = |message: String| Error::DesignParse {
                entry: entry + 1,
                column,
                message,
            };
            let item = raw.trim();
            let (kind, length) = item
                .split_once(':')
                .ok_or_else(|| err(format!("expected KIND:LENGTH, found `{item}`")))?;
            let kind = match kind.trim() {
                k if k.chars().count() == 1 => JointKind::from_letter(k.chars().next().unwrap()),
                _ => None,
            }
            .ok_or_else(|| err(format!("unknown joint kind `{}`", kind.trim())))?;
            let length: f64 = length
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid length `{}`", length.trim())))?;
            let (min, max) = kind.length_range();
            if !(min..=max).contains(&length) {
                return Err(err(format!(
                    "length {length} m for {kind} is outside [{min}, {max}]"
                )));
            }
            modules.push(JointModule { kind, length });
            column += raw.len() + 1;
        }
        Ok(Self { modules })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(kind: JointKind, c: f64) -> JointModule {
        decode_genome(&Genome::new(vec![kind], vec![c]).unwrap()).unwrap().modules[0]
    }

    fn design(kinds: &str) -> RobotDesign {
        RobotDesign {
            modules: kinds
                .chars()
                .map(|c| {
                    let kind = JointKind::from_letter(c).unwrap();
                    JointModule {
                        kind,
                        length: kind.length_range().0,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn decode_uses_kind_specific_ranges() {
        assert_eq!(single(JointKind::Roll, 0.0).length, 0.1);
        assert_eq!(single(JointKind::Yaw, 0.0).length, 0.01);
        let s = single(JointKind::Prismatic, 1.0);
        assert_eq!(s.length, 0.5);
        assert_eq!(s.limits(), vec![(0.0, 0.5)]);
        let f = single(JointKind::Fixed, 0.5);
        assert!((f.length - 0.255).abs() < 1e-15);
        assert_eq!(f.limits(), vec![(0.0, 0.0)]);
    }

    #[test]
    fn decode_rejects_out_of_range_gene() {
        let g = Genome {
            kinds: vec![JointKind::Roll, JointKind::Pitch],
            coefficients: vec![0.5, 1.2],
        };
        match decode_genome(&g) {
            Err(Error::GeneOutOfRange { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        let g = Genome {
            kinds: vec![JointKind::Roll],
            coefficients: vec![f64::NAN],
        };
        assert!(decode_genome(&g).is_err());
    }

    #[test]
    fn dof_counts_orthogonal_twice() {
        assert_eq!(design_dof(&design("FFFFFF")), 0);
        assert_eq!(design_dof(&design("OOOFFF")), 6);
        assert_eq!(design_dof(&design("YPSFFF")), 3);
    }

    #[test]
    fn limits_by_kind() {
        let limits = |k: &str| design(k).modules[0].limits();
        let rp = 0.75 * PI;
        assert_eq!(limits("R"), vec![(-rp, rp)]);
        assert_eq!(limits("P"), vec![(-rp, rp)]);
        assert_eq!(limits("O"), vec![(-rp, rp), (-rp, rp)]);
        assert_eq!(limits("Y"), vec![(-2.0 * PI, 2.0 * PI)]);
        assert_eq!(limits("F"), vec![(0.0, 0.0)]);
        let axes = design("O").modules[0].axes();
        assert_eq!(axes[0].motion, Motion::Rotation(LocalAxis::X));
        assert_eq!(axes[1].motion, Motion::Rotation(LocalAxis::Y));
    }

    #[test]
    fn zero_configuration_is_admissible_for_every_kind() {
        for kind in JointKind::ALL {
            for (lo, hi) in (JointModule { kind, length: 0.3 }).limits() {
                assert!(lo <= 0.0 && 0.0 <= hi, "{kind}");
            }
        }
    }

    #[test]
    fn random_genome_is_deterministic() {
        assert_eq!(random_genome(42), random_genome(42));
        assert_ne!(random_genome(1), random_genome(2));
        random_genome(7).validate().unwrap();
    }

    #[test]
    fn random_genome_kind_frequencies_are_uniform() {
        let mut counts = [0usize; 6];
        let mut total = 0usize;
        for seed in 0..10_000u64 {
            for k in random_genome(seed).kinds {
                counts[k.index()] += 1;
                total += 1;
            }
        }
        let expected = total as f64 / 6.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 5 degrees of freedom, p = 0.001 critical value
        assert!(chi2 < 20.52, "chi2 = {chi2}, counts = {counts:?}");
        for c in counts {
            let freq = c as f64 / total as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.02, "{freq}");
        }
    }

    #[test]
    fn design_string_round_trip() {
        let d: RobotDesign = "Y:0.3,P:0.25,S:0.2,F:0.01,F:0.01,F:0.01".parse().unwrap();
        assert_eq!(d.kind_string(), "YPSFFF");
        assert_eq!(d.dof(), 3);
        let again: RobotDesign = d.to_string().parse().unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn design_string_errors_name_the_entry() {
        match "Y:0.3,P:0.05".parse::<RobotDesign>() {
            Err(Error::DesignParse { entry, column, message }) => {
                assert_eq!(entry, 2);
                assert_eq!(column, 7);
                assert!(message.contains("[0.1, 0.5]"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!("Q:0.3".parse::<RobotDesign>().is_err());
        assert!("R0.3".parse::<RobotDesign>().is_err());
        assert!("R:abc".parse::<RobotDesign>().is_err());
    }

    #[test]
    fn genome_design_round_trip() {
        let g = random_genome(3);
        let back = g.decode().unwrap().to_genome();
        for (a, b) in g.coefficients.iter().zip(&back.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(g.kinds, back.kinds);
    }
}

//! Run archive, Pareto extraction and the CSV/JSON export formats.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ik::IkConfig;
use crate::model::{Genome, RobotDesign};
use crate::nsga2::{non_dominated_sort, OptimizerConfig};
use crate::objectives::eval_design;

pub const ARCHIVE_HEADER: &str = "eval_index,e_task,e_design,dof,total_length,joints,lengths";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub optimizer: OptimizerConfig,
    pub ik: IkConfig,
    pub n_modules: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveRecord {
    pub eval_index: usize,
    pub genome: Genome,
    pub e_task: f64,
    pub e_design: f64,
    /// Non-domination front of this record within the whole archive.
    pub rank: usize,
}

impl ArchiveRecord {
    pub fn objectives(&self) -> [f64; 2] {
        [self.e_task, self.e_design]
    }

    pub fn design(&self) -> RobotDesign {
        self.genome
            .decode()
            .expect("archived genomes were validated when evaluated")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    pub scenario: String,
    pub seed: u64,
    pub config: RunSnapshot,
    pub records: Vec<ArchiveRecord>,
}

impl ParetoArchive {
    /// Builds an archive, checking that evaluation indices run `0..n` in
    /// order and assigning each record its front over the whole archive.
    pub fn new(
        scenario: String,
        seed: u64,
        config: RunSnapshot,
        mut records: Vec<ArchiveRecord>,
    ) -> Result<Self> {
        if let Some((pos, r)) = records
            .iter()
            .enumerate()
            .find(|(pos, r)| r.eval_index != *pos)
        {
            return Err(Error::Internal(format!(
                "archive record at position {pos} has evaluation index {}",
                r.eval_index
            )));
        }
        let points: Vec<[f64; 2]> = records.iter().map(ArchiveRecord::objectives).collect();
        for (rank, front) in non_dominated_sort(&points).into_iter().enumerate() {
            for i in front {
                records[i].rank = rank;
            }
        }
        Ok(Self {
            scenario,
            seed,
            config,
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        records_csv(self.records.iter(), false)
    }

    pub fn pareto_csv(&self) -> String {
        records_csv(extract_pareto(self).into_iter(), true)
    }

    pub fn pareto_json(&self) -> String {
        let doc = ParetoDoc {
            scenario: &self.scenario,
            seed: self.seed,
            solutions: extract_pareto(self).into_iter().map(Solution::from).collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("pareto records serialize");
        text.push('\n');
        text
    }
}

/// The maximal non-dominated subset of the archive, ordered by evaluation
/// index; records sharing an objective pair appear once (earliest wins).
pub fn extract_pareto(archive: &ParetoArchive) -> Vec<&ArchiveRecord> {
    let mut seen = HashSet::new();
    archive
        .records
        .iter()
        .filter(|r| r.rank == 0)
        .filter(|r| seen.insert((r.e_task.to_bits(), r.e_design.to_bits())))
        .collect()
}

/// Area dominated by `points` and bounded by `reference` (minimization).
/// Points not strictly better than the reference in both objectives add nothing.
pub fn hypervolume_2d(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut inside: Vec<[f64; 2]> = points
        .iter()
        .copied()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    inside.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut staircase: Vec<[f64; 2]> = Vec::with_capacity(inside.len());
    for p in inside {
        if staircase.last().is_none_or(|last| p[1] < last[1]) {
            staircase.push(p);
        }
    }
    staircase
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let next_x = staircase.get(i + 1).map_or(reference[0], |q| q[0]);
            (next_x - p[0]) * (reference[1] - p[1])
        })
        .sum()
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..9).contains(&exponent) {
        let decimals = (8 - exponent) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn records_csv<'a>(records: impl Iterator<Item = &'a ArchiveRecord>, with_rank: bool) -> String {
    let mut out = String::from(ARCHIVE_HEADER);
    if with_rank {
        out.push_str(",rank");
    }
    out.push('\n');
    for r in records {
        let design = r.design();
        let lengths: Vec<String> = design.modules.iter().map(|m| format_sig9(m.length)).collect();
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            r.eval_index,
            format_sig9(r.e_task),
            format_sig9(r.e_design),
            design.dof(),
            format_sig9(design.total_length()),
            design.kind_string(),
            lengths.join(";"),
        );
        if with_rank {
            let _ = write!(out, ",{}", r.rank);
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ParetoDoc<'a> {
    scenario: &'a str,
    seed: u64,
    solutions: Vec<Solution>,
}

/// One Pareto solution as written to `pareto.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub eval_index: usize,
    pub e_task: f64,
    pub e_design: f64,
    pub e_design_joint: u32,
    pub e_design_length: f64,
    pub dof: usize,
    pub joints: String,
    pub lengths: Vec<f64>,
    pub design: String,
    pub rank: usize,
}

impl From<&ArchiveRecord> for Solution {
    fn from(r: &ArchiveRecord) -> Self {
        let design = r.design();
        let cost = eval_design(&design);
        Solution {
            eval_index: r.eval_index,
            e_task: r.e_task,
            e_design: r.e_design,
            e_design_joint: cost.joint,
            e_design_length: cost.length,
            dof: design.dof(),
            joints: design.kind_string(),
            lengths: design.modules.iter().map(|m| m.length).collect(),
            design: design.to_string(),
            rank: r.rank,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn export_csv(archive: &ParetoArchive, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &archive.to_csv())
}

pub fn export_pareto(archive: &ParetoArchive, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &archive.pareto_csv())
}

pub fn export_pareto_json(archive: &ParetoArchive, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &archive.pareto_json())
}

/// gnuplot script drawing every sample in grey and the Pareto set in red,
/// reading `archive.csv` and `pareto.csv` from the working directory.
pub fn gnuplot_script(title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel 'E_task'\n\
         set ylabel 'E_design'\n\
         set grid\n\
         plot 'archive.csv' using 2:3 with points pt 7 ps 0.3 lc rgb '#999999' title 'samples', \\\n     \
         'pareto.csv' using 2:3 with points pt 7 ps 0.8 lc rgb '#d62728' title 'pareto'\n"
    )
}

mod support;

use morphoforge_core::archive::{export_csv, export_pareto, export_pareto_json, Solution};
use morphoforge_core::objectives::eval_design;
use morphoforge_core::{
    extract_pareto, hypervolume_2d, ArchiveRecord, Genome, IkConfig, OptimizerConfig, ParetoArchive, RunSnapshot,
};
use rand::Rng;
use support::rng;

fn snapshot() -> RunSnapshot {
    RunSnapshot {
        optimizer: OptimizerConfig::default(),
        ik: IkConfig::default(),
        n_modules: 6,
    }
}

/// Archive of random genomes with their true design cost and a random task error.
fn random_archive(seed: u64, n: usize) -> ParetoArchive {
    let mut r = rng(seed);
    let records = (0..n)
        .map(|i| {
            let genome = Genome::random(6, &mut r);
            let e_design = eval_design(&genome.decode().unwrap()).e_design;
            // coarse task values create ties and duplicated objective pairs
            let e_task = if r.random_bool(0.2) {
                r.random_range(0..4) as f64
            } else {
                r.random_range(0.0..4.0)
            };
            ArchiveRecord {
                eval_index: i,
                genome,
                e_task,
                e_design,
                rank: 0,
            }
        })
        .collect();
    ParetoArchive::new("random".into(), seed, snapshot(), records).unwrap()
}

fn dominates(a: &ArchiveRecord, b: &ArchiveRecord) -> bool {
    a.e_task <= b.e_task && a.e_design <= b.e_design && (a.e_task < b.e_task || a.e_design < b.e_design)
}

#[test]
fn pareto_extraction_matches_pairwise_filter() {
    for seed in 0..5 {
        let archive = random_archive(seed, 500);
        let mut expected = Vec::new();
        let mut seen = Vec::new();
        for r in &archive.records {
            let pair = (r.e_task, r.e_design);
            if !archive.records.iter().any(|o| dominates(o, r)) && !seen.contains(&pair) {
                seen.push(pair);
                expected.push(r.eval_index);
            }
        }
        let got: Vec<usize> = extract_pareto(&archive).iter().map(|r| r.eval_index).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn dominating_record_yields_a_singleton_front() {
    let mut archive = random_archive(9, 50);
    archive.records[17].e_task = -1.0;
    archive.records[17].e_design = -1.0;
    let archive = ParetoArchive::new(archive.scenario, 9, snapshot(), archive.records).unwrap();
    let front = extract_pareto(&archive);
    assert_eq!(front.len(), 1);
    assert_eq!(front[0].eval_index, 17);
}

#[test]
fn non_contiguous_indices_are_an_internal_error() {
    let mut records = random_archive(1, 3).records;
    records[1].eval_index = 5;
    let err = ParetoArchive::new("x".into(), 0, snapshot(), records).unwrap_err();
    assert_eq!(err.kind(), morphoforge_core::ErrorKind::Internal);
}

#[test]
fn csv_parses_back_to_nine_significant_digits() {
    let archive = random_archive(3, 200);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("archive.csv");
    export_csv(&archive, &path).unwrap();

    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, ["eval_index", "e_task", "e_design", "dof", "total_length", "joints", "lengths"]);
    let close = |a: f64, b: f64| a == b || (a - b).abs() <= 5e-9 * b.abs().max(a.abs());
    for (row, rec) in reader.records().zip(&archive.records) {
        let row = row.unwrap();
        let design = rec.design();
        assert_eq!(row[0].parse::<usize>().unwrap(), rec.eval_index);
        assert!(close(row[1].parse().unwrap(), rec.e_task));
        assert!(close(row[2].parse().unwrap(), rec.e_design));
        assert_eq!(row[3].parse::<usize>().unwrap(), design.dof());
        assert!(close(row[4].parse().unwrap(), design.total_length()));
        assert_eq!(&row[5], design.kind_string());
        let lengths: Vec<f64> = row[6].split(';').map(|s| s.parse().unwrap()).collect();
        assert_eq!(lengths.len(), 6);
        for (l, m) in lengths.iter().zip(&design.modules) {
            assert!(close(*l, m.length));
        }
    }

    let again = dir.path().join("again.csv");
    export_csv(&archive, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn pareto_exports_agree() {
    let archive = random_archive(5, 300);
    let dir = tempfile::tempdir().unwrap();
    export_pareto(&archive, dir.path().join("pareto.csv")).unwrap();
    export_pareto_json(&archive, dir.path().join("pareto.json")).unwrap();

    let mut reader = csv::Reader::from_path(dir.path().join("pareto.csv")).unwrap();
    assert_eq!(reader.headers().unwrap().iter().last(), Some("rank"));
    let csv_indices: Vec<usize> = reader.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pareto.json")).unwrap()).unwrap();
    assert_eq!(doc["scenario"], "random");
    let solutions: Vec<Solution> = serde_json::from_value(doc["solutions"].clone()).unwrap();
    let json_indices: Vec<usize> = solutions.iter().map(|s| s.eval_index).collect();
    assert_eq!(csv_indices, json_indices);
    for s in &solutions {
        let rec = &archive.records[s.eval_index];
        assert_eq!((s.e_task, s.e_design, s.rank), (rec.e_task, rec.e_design, 0));
        assert_eq!(s.design.parse::<morphoforge_core::RobotDesign>().unwrap(), rec.design());
    }
}

#[test]
fn export_to_missing_directory_names_the_path() {
    let archive = random_archive(2, 5);
    let path = std::path::Path::new("/nonexistent-dir/archive.csv");
    let err = export_csv(&archive, path).unwrap_err();
    assert_eq!(err.kind(), morphoforge_core::ErrorKind::Io);
    assert!(err.to_string().contains("/nonexistent-dir/archive.csv"));
}

#[test]
fn hypervolume_of_a_staircase() {
    let points = [[1.0, 3.0], [2.0, 2.0], [3.0, 1.0], [2.5, 2.5]];
    assert!((hypervolume_2d(&points, [4.0, 4.0]) - 6.0).abs() < 1e-12);
    assert_eq!(hypervolume_2d(&[[5.0, 0.0]], [4.0, 4.0]), 0.0);
}

//! End-to-end pipeline tests on the fixture dataset: payload sanity, file
//! emission, degradation on missing covariates, and binary exit codes.

mod common;

use std::process::Command;

use tracenet_cli::config::{DegreeSourceArg, PipelineConfig};
use tracenet_cli::pipeline;

#[test]
fn summary_counts_components_and_isolates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::fixture_config(dir.path());
    std::fs::create_dir_all(&cfg.out).unwrap();
    let s = pipeline::run_summary(&cfg).unwrap();
    assert_eq!(s.n_vertices, 15);
    assert_eq!(s.n_edges, 17);
    assert_eq!(s.giant_vertices, 12);
    assert_eq!(s.giant_edges, 17);
    assert_eq!(s.isolated_vertices, 3);
    assert_eq!(s.component_count, 4);
    assert_eq!(s.orientation_counts["MSM"], 7);
    assert_eq!(s.orientation_counts["F"], 4);
    assert!(cfg.out.join("summary.json").is_file());
}

#[test]
fn summary_with_empty_edge_file_marks_all_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let (vertices, _) = common::write_fixture(dir.path());
    let edges = dir.path().join("empty_edges.csv");
    std::fs::write(&edges, "src,dst\n").unwrap();
    let cfg = PipelineConfig {
        edges,
        vertices,
        out: dir.path().join("out"),
        ..common::fixture_config(dir.path())
    };
    std::fs::create_dir_all(&cfg.out).unwrap();
    let s = pipeline::run_summary(&cfg).unwrap();
    assert_eq!(s.isolated_vertices, 15);
    assert_eq!(s.component_count, 15);
}

#[test]
fn degrees_produces_strata_and_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::fixture_config(dir.path());
    std::fs::create_dir_all(&cfg.out).unwrap();
    let d = pipeline::run_degrees(&cfg).unwrap();
    let names: Vec<&str> = d.strata.iter().map(|s| s.name.as_str()).collect();
    assert!(names.contains(&"pooled"));
    assert!(names.contains(&"pooled_observed"));
    assert!(names.contains(&"women"));
    assert!(names.contains(&"msm"));
    for s in &d.strata {
        assert!(cfg.out.join(&s.k0_scan_csv).is_file());
        assert!(cfg.out.join(&s.hill_scan_csv).is_file());
    }
    assert!(d.joint.is_some());
    assert!(!d.anova.is_empty());
}

#[test]
fn degrees_degrades_without_declared_column() {
    let dir = tempfile::tempdir().unwrap();
    let vertices = dir.path().join("v.csv");
    std::fs::write(&vertices, "id,orientation\na,MSM\nb,MSM\nc,F\n").unwrap();
    let edges = dir.path().join("e.csv");
    std::fs::write(&edges, "src,dst\na,b\nb,c\n").unwrap();
    let cfg = PipelineConfig {
        vertices,
        edges,
        out: dir.path().join("out"),
        degree_source: DegreeSourceArg::Declared,
        ..common::fixture_config(dir.path())
    };
    std::fs::create_dir_all(&cfg.out).unwrap();
    let d = pipeline::run_degrees(&cfg).unwrap();
    // declared strata degrade; the observed pooled stratum still runs
    assert!(d.strata.iter().any(|s| s.name == "pooled_observed"));
    assert!(d.strata.iter().all(|s| s.name != "pooled"));
    assert!(d.notes.iter().any(|n| n.contains("declared_partners")));
}

#[test]
fn structure_on_path_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let vertices = dir.path().join("v.csv");
    std::fs::write(&vertices, "id\na\nb\nc\n").unwrap();
    let edges = dir.path().join("e.csv");
    std::fs::write(&edges, "src,dst\na,b\nb,c\n").unwrap();
    let cfg = PipelineConfig {
        vertices,
        edges,
        out: dir.path().join("out"),
        covariates: vec!["orientation".into()],
        ..common::fixture_config(dir.path())
    };
    std::fs::create_dir_all(&cfg.out).unwrap();
    let s = pipeline::run_structure(&cfg).unwrap();
    assert_eq!(s.geodesics.diameter, 2);
    assert_eq!(s.articulation_ids, vec!["b".to_string()]);
    // all vertices share the unknown orientation: assortativity degenerate
    assert!(s.mixing[0].degenerate);
}

#[test]
fn structure_reports_mixing_and_lags_on_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::fixture_config(dir.path());
    std::fs::create_dir_all(&cfg.out).unwrap();
    let s = pipeline::run_structure(&cfg).unwrap();
    assert_eq!(s.giant_vertices, 12);
    assert!(s.geodesics_oriented.is_some());
    let lag = s.detection_lag.as_ref().unwrap();
    assert!(lag.edges_with_dates > 0);
    assert_eq!(s.mixing.len(), 4);
    let orient = &s.mixing[0];
    assert_eq!(orient.covariate, "orientation");
    // matrix CSV block embeds one header line plus one row per label
    assert_eq!(orient.matrix_csv.lines().count(), orient.labels.len() + 1);
    assert!(s.clustering_coefficient.is_some());
    assert!(s.cliques.count > 0);
}

#[test]
fn communities_produces_partition_null_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::fixture_config(dir.path());
    std::fs::create_dir_all(&cfg.out).unwrap();
    let c = pipeline::run_communities(&cfg).unwrap();
    assert_eq!(c.giant_vertices, 12);
    assert!(c.cluster_count >= 2, "expected a split, got {}", c.cluster_count);
    assert_eq!(c.null.replicates, 6);
    assert_eq!(c.clusters.len(), c.cluster_count);
    assert!(cfg.out.join(&c.partition_csv).is_file());
    assert!(cfg.out.join(&c.null_samples_csv).is_file());
    for f in &c.figures {
        assert!(cfg.out.join(f).is_file(), "missing figure {f}");
    }
    assert!(c.figures.contains(&"clusters_pies.svg".to_string()));
    // partition sidecar has one row per giant vertex
    let partition = std::fs::read_to_string(cfg.out.join(&c.partition_csv)).unwrap();
    assert_eq!(partition.lines().count(), 12 + 1);
    // null sidecar: header plus one sample per replicate
    let nulls = std::fs::read_to_string(cfg.out.join(&c.null_samples_csv)).unwrap();
    assert_eq!(nulls.lines().count(), 6 + 1);
}

#[test]
fn render_emits_layout_figure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::fixture_config(dir.path());
    std::fs::create_dir_all(&cfg.out).unwrap();
    let r = pipeline::run_render(&cfg).unwrap();
    assert_eq!(r.vertices, 12);
    let svg = std::fs::read_to_string(cfg.out.join(&r.figure)).unwrap();
    assert_eq!(svg.matches("<circle").count(), 12);
    assert_eq!(svg.matches("<line").count(), 17);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tracenet"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (v, e) = common::write_fixture(dir.path());
    let out = dir.path().join("out");

    // success
    let ok = bin()
        .args(["summary", "--vertices"])
        .arg(&v)
        .arg("--edges")
        .arg(&e)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));

    // validation error: replicates = 0
    let bad_cfg = bin()
        .args(["communities", "--replicates", "0", "--vertices"])
        .arg(&v)
        .arg("--edges")
        .arg(&e)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(bad_cfg.code(), Some(2));

    // data error: missing input file
    let missing = bin()
        .args(["summary", "--vertices", "nope.csv", "--edges"])
        .arg(&e)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(3));

    // data error: corrupt edge endpoint
    let bad_edges = dir.path().join("bad_edges.csv");
    std::fs::write(&bad_edges, "src,dst\nm1,ghost\n").unwrap();
    let dangling = bin()
        .args(["summary", "--vertices"])
        .arg(&v)
        .arg("--edges")
        .arg(&bad_edges)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(dangling.code(), Some(3));
}

#[test]
fn config_file_drives_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let (v, e) = common::write_fixture(dir.path());
    let out = dir.path().join("out_cfg");
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        format!(
            "vertices = {:?}\nedges = {:?}\nout = {:?}\nseed = 5\nreplicates = 4\nrestarts = 2\n",
            v, e, out
        ),
    )
    .unwrap();
    let status = bin()
        .args(["summary", "--config"])
        .arg(&cfg_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"]["seed"], 5);
    assert_eq!(report["payload"]["n_vertices"], 15);
}

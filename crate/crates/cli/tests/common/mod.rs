//! Shared fixture dataset for pipeline tests: two communities bridged by a
//! single edge, plus satellites and isolated vertices, with covariates
//! exercising every column.

use std::path::{Path, PathBuf};

pub const VERTICES_CSV: &str = "\
id,orientation,detection_mode,detection_date,age_at_detection,region,declared_partners
m1,MSM,CT,1995-03-01,25,Havana,4
m2,MSM,RANDOM,1996-07-12,31,Havana,2
m3,MSM,CT,1997-01-20,28,Havana,5
m4,MSM,CAPT,1997-11-02,24,Havana,3
m5,MSM,RANDOM,1998-05-15,35,Havana,2
m6,MSM,CT,1999-02-27,29,Havana,6
w1,F,CT,1996-04-18,22,Pinar,3
w2,F,RANDOM,1997-09-09,27,Pinar,2
w3,F,CAPT,1998-12-01,,Pinar,1
h1,HM,RANDOM,1997-03-14,30,Pinar,2
h2,HM,CT,1999-08-23,33,Pinar,4
m7,MSM,CT,1999-10-05,26,Pinar,3
i1,F,RANDOM,2000-01-30,21,Havana,0
i2,HM,CAPT,2000-06-06,38,,1
i3,U,U,,,,
";

pub const EDGES_CSV: &str = "\
src,dst,named_by
m1,m2,SRC
m1,m3,SRC
m2,m3,U
m3,m4,DST
m4,m5,U
m5,m6,BOTH
m4,m6,U
m1,m6,U
w1,h1,SRC
w1,h2,U
w2,h1,DST
w2,h2,U
w3,h1,U
w1,w2,U
m7,w1,SRC
m7,h2,U
m6,m7,SRC
";

pub fn write_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let v = dir.join("vertices.csv");
    let e = dir.join("edges.csv");
    std::fs::write(&v, VERTICES_CSV).unwrap();
    std::fs::write(&e, EDGES_CSV).unwrap();
    (v, e)
}

pub fn fixture_config(dir: &Path) -> tracenet_cli::PipelineConfig {
    let (vertices, edges) = write_fixture(dir);
    tracenet_cli::PipelineConfig {
        vertices,
        edges,
        out: dir.join("out"),
        seed: 7,
        replicates: 6,
        restarts: 3,
        covariates: vec![
            "orientation".into(),
            "detection_mode".into(),
            "region".into(),
            "age".into(),
        ],
        oriented: true,
        degree_source: tracenet_cli::config::DegreeSourceArg::Declared,
        delta: 1.0,
        layout_iterations: 80,
    }
}

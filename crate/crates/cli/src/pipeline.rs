//! Pipeline orchestration: each subcommand loads the dataset, runs its
//! analyses, and writes a JSON report (plus CSV sidecars and SVG figures)
//! into the output directory. All randomness derives from the config seed
//! through named substreams, so reruns are byte-identical.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use tracenet::community::{
    atypicality_report, cluster_graph, greedy_modularity_multistart, group_connectivity,
    recursive_subclustering, resolution_limit, ClusterGroup,
};
use tracenet::degree::{
    degree_distribution, degree_distribution_filtered, hill_scan, joint_degree_analysis, k0_scan,
    DegreeDistribution, DegreeError, DegreeSource, ScanEntry,
};
use tracenet::graph::{
    articulation_points, clustering_coefficient, connected_components, geodesic_summary,
    giant_component, maximal_cliques, GeodesicSummary,
};
use tracenet::io::{load_dataset_paths, write_report, write_text, Orientation};
use tracenet::layout::{minimize_layout, minimize_points, LayoutConfig};
use tracenet::mixing::{
    assortativity, detection_lag, mixing_matrix, modularity, CovariatePartition,
    DetectionLagReport, MixingError,
};
use tracenet::nullmodel::{null_modularity, significance, SwapChainConfig};
use tracenet::report::{Real, ReportEnvelope};
use tracenet::rng::derive;
use tracenet::stats::one_way_anova;
use tracenet::svg::{render_cluster_groups_svg, render_cluster_svg, render_vertex_svg};
use tracenet::ContactGraph;

use crate::config::{Command, DegreeSourceArg, PipelineConfig};
use crate::error::CliError;

pub fn run(command: &Command) -> Result<(), CliError> {
    let cfg = PipelineConfig::resolve(command.args())?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", cfg.out.display())))?;
    match command {
        Command::Summary(_) => {
            run_summary(&cfg)?;
        }
        Command::Degrees(_) => {
            run_degrees(&cfg)?;
        }
        Command::Structure(_) => {
            run_structure(&cfg)?;
        }
        Command::Communities(_) => {
            run_communities(&cfg)?;
        }
        Command::Render(_) => {
            run_render(&cfg)?;
        }
        Command::All(_) => {
            run_summary(&cfg)?;
            run_degrees(&cfg)?;
            run_structure(&cfg)?;
            run_communities(&cfg)?;
            run_render(&cfg)?;
        }
    }
    Ok(())
}

fn load(cfg: &PipelineConfig) -> Result<ContactGraph, CliError> {
    load_dataset_paths(&cfg.vertices, &cfg.edges).map_err(|e| CliError::Data(e.to_string()))
}

fn write_json<T: Serialize>(cfg: &PipelineConfig, kind: &str, payload: &T) -> Result<(), CliError> {
    let envelope = ReportEnvelope::new(kind, cfg.as_json(), payload);
    let path = cfg.out.join(format!("{kind}.json"));
    write_report(&envelope, &path).map_err(|e| CliError::Internal(e.to_string()))
}

fn write_sidecar(cfg: &PipelineConfig, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = cfg.out.join(name);
    write_text(text, &path).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(path)
}

// ---------------------------------------------------------------- summary

#[derive(Debug, Serialize)]
pub struct SummaryPayload {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub orientation_counts: BTreeMap<String, u64>,
    pub detection_mode_counts: BTreeMap<String, u64>,
    pub region_counts: BTreeMap<String, u64>,
    pub component_count: usize,
    pub component_sizes: Vec<usize>,
    pub giant_vertices: usize,
    pub giant_edges: usize,
    pub isolated_vertices: usize,
}

pub fn run_summary(cfg: &PipelineConfig) -> Result<SummaryPayload, CliError> {
    let g = load(cfg)?;
    let payload = summarize(&g);
    write_json(cfg, "summary", &payload)?;
    Ok(payload)
}

fn summarize(g: &ContactGraph) -> SummaryPayload {
    let mut orientation_counts = BTreeMap::new();
    let mut detection_mode_counts = BTreeMap::new();
    let mut region_counts = BTreeMap::new();
    for v in g.vertices() {
        *orientation_counts
            .entry(v.orientation.code().to_string())
            .or_insert(0) += 1;
        *detection_mode_counts
            .entry(v.detection_mode.code().to_string())
            .or_insert(0) += 1;
        *region_counts
            .entry(v.region.clone().unwrap_or_else(|| "U".into()))
            .or_insert(0) += 1;
    }
    let components = connected_components(g);
    let isolated = (0..g.n() as u32).filter(|&v| g.degree(v) == 0).count();
    let (giant_vertices, giant_edges) = if g.n() > 0 {
        let giant = giant_component(g).expect("non-empty");
        (giant.n(), giant.m())
    } else {
        (0, 0)
    };
    SummaryPayload {
        n_vertices: g.n(),
        n_edges: g.m(),
        orientation_counts,
        detection_mode_counts,
        region_counts,
        component_count: components.count(),
        component_sizes: components.sizes.clone(),
        giant_vertices,
        giant_edges,
        isolated_vertices: isolated,
    }
}

// ---------------------------------------------------------------- degrees

#[derive(Debug, Serialize)]
pub struct ScanRow {
    pub k0: u32,
    pub alpha: Option<f64>,
    pub kl_value: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct DegreeStratumPayload {
    pub name: String,
    pub source: String,
    pub n: u64,
    pub excluded_missing: u64,
    pub zero_degree_count: u64,
    pub max_degree: u32,
    pub k0_scan: Vec<ScanRow>,
    pub k0_scan_csv: String,
    pub hill_scan_csv: String,
}

#[derive(Debug, Serialize)]
pub struct JointPayload {
    pub correlation: Real,
    pub chi2_statistic: Real,
    pub chi2_dof: u64,
    pub chi2_pvalue: Real,
    pub permutation_pvalue: Real,
    pub bin_labels: Vec<String>,
    pub small_expected: bool,
}

#[derive(Debug, Serialize)]
pub struct AnovaRow {
    pub covariate: String,
    pub f_stat: Real,
    pub df_between: u64,
    pub df_within: u64,
    pub pvalue: Real,
}

#[derive(Debug, Serialize)]
pub struct DegreesPayload {
    pub strata: Vec<DegreeStratumPayload>,
    pub joint: Option<JointPayload>,
    pub anova: Vec<AnovaRow>,
    pub notes: Vec<String>,
}

fn scan_rows(scan: &[ScanEntry]) -> Vec<ScanRow> {
    scan.iter()
        .map(|e| ScanRow {
            k0: e.k0,
            alpha: e.alpha,
            kl_value: e.kl_value,
            flag: e.flag.map(|f| format!("{f:?}")),
        })
        .collect()
}

fn scan_csv(scan: &[ScanEntry]) -> String {
    let mut out = String::from("k0,alpha\n");
    for e in scan {
        match e.alpha {
            Some(a) => out.push_str(&format!("{},{}\n", e.k0, a)),
            None => out.push_str(&format!("{},\n", e.k0)),
        }
    }
    out
}

fn hill_csv(d: &DegreeDistribution) -> String {
    let mut out = String::from("m,alpha_paper,alpha_log\n");
    for e in hill_scan(d) {
        let log = if e.alpha_log.is_finite() {
            format!("{}", e.alpha_log)
        } else {
            String::new()
        };
        out.push_str(&format!("{},{},{log}\n", e.m, e.alpha_paper));
    }
    out
}

fn stratum_payload(
    cfg: &PipelineConfig,
    name: &str,
    d: &DegreeDistribution,
) -> Result<DegreeStratumPayload, CliError> {
    let scan = k0_scan(d);
    let scan_name = format!("k0_scan_{name}.csv");
    let hill_name = format!("hill_scan_{name}.csv");
    write_sidecar(cfg, &scan_name, &scan_csv(&scan))?;
    write_sidecar(cfg, &hill_name, &hill_csv(d))?;
    Ok(DegreeStratumPayload {
        name: name.to_string(),
        source: format!("{:?}", d.source),
        n: d.n_total,
        excluded_missing: d.excluded_missing,
        zero_degree_count: d.counts.get(&0).copied().unwrap_or(0),
        max_degree: d.max_degree(),
        k0_scan: scan_rows(&scan),
        k0_scan_csv: scan_name,
        hill_scan_csv: hill_name,
    })
}

pub fn run_degrees(cfg: &PipelineConfig) -> Result<DegreesPayload, CliError> {
    let g = load(cfg)?;
    let mut notes = Vec::new();
    let mut strata = Vec::new();

    let source = match cfg.degree_source {
        DegreeSourceArg::Declared => DegreeSource::Declared,
        DegreeSourceArg::Observed => DegreeSource::Observed,
    };

    // pooled distribution in the configured source, plus the observed pooled
    // distribution when the primary source is declared
    match degree_distribution(&g, source) {
        Ok(d) => strata.push(stratum_payload(cfg, "pooled", &d)?),
        Err(DegreeError::MissingCovariate(c)) => {
            notes.push(format!("pooled stratum skipped: covariate `{c}` missing"));
        }
        Err(e) => return Err(CliError::Data(e.to_string())),
    }
    if source == DegreeSource::Declared {
        let observed = degree_distribution(&g, DegreeSource::Observed)
            .expect("observed degrees always exist");
        strata.push(stratum_payload(cfg, "pooled_observed", &observed)?);
    }

    // per-orientation strata
    for (label, orientation) in [
        ("women", Orientation::Woman),
        ("heterosexual_men", Orientation::HeterosexualMan),
        ("msm", Orientation::Msm),
    ] {
        let members: Vec<u32> = (0..g.n() as u32)
            .filter(|&v| g.vertex(v).orientation == orientation)
            .collect();
        if members.is_empty() {
            notes.push(format!("stratum {label} empty"));
            continue;
        }
        match degree_distribution_filtered(&g, source, &members) {
            Ok(d) => strata.push(stratum_payload(cfg, label, &d)?),
            Err(DegreeError::MissingCovariate(c)) => {
                notes.push(format!("stratum {label} skipped: covariate `{c}` missing"));
            }
            Err(e) => return Err(CliError::Data(e.to_string())),
        }
    }

    let joint = match joint_degree_analysis(&g) {
        Ok(t) => Some(JointPayload {
            correlation: Real(t.correlation),
            chi2_statistic: Real(t.chi2.statistic),
            chi2_dof: t.chi2.dof,
            chi2_pvalue: Real(t.chi2.pvalue),
            permutation_pvalue: Real(t.chi2.permutation_pvalue),
            bin_labels: t.chi2.bin_labels.clone(),
            small_expected: t.chi2.small_expected,
        }),
        Err(e) => {
            notes.push(format!("joint degree analysis skipped: {e}"));
            None
        }
    };

    let anova = anova_rows(&g, &mut notes);
    let payload = DegreesPayload {
        strata,
        joint,
        anova,
        notes,
    };
    write_json(cfg, "degrees", &payload)?;
    Ok(payload)
}

fn anova_rows(g: &ContactGraph, notes: &mut Vec<String>) -> Vec<AnovaRow> {
    let declared: Vec<Option<u32>> = g
        .vertices()
        .iter()
        .map(|v| v.declared_partners)
        .collect();
    if declared.iter().all(Option::is_none) {
        notes.push("anova skipped: declared_partners missing".into());
        return Vec::new();
    }
    let mut rows = Vec::new();
    let partitions: Vec<(&str, CovariatePartition)> = vec![
        ("orientation", CovariatePartition::by_orientation(g)),
        ("detection_mode", CovariatePartition::by_detection_mode(g)),
        ("region", CovariatePartition::by_region(g)),
        ("age", CovariatePartition::by_age_bins(g)),
    ];
    for (name, p) in partitions {
        let mut groups = vec![Vec::new(); p.group_count()];
        for (v, d) in declared.iter().enumerate() {
            if let Some(d) = d {
                groups[p.assignment[v]].push(*d as f64);
            }
        }
        match one_way_anova(&groups) {
            Ok(r) => rows.push(AnovaRow {
                covariate: name.to_string(),
                f_stat: Real(r.f_stat),
                df_between: r.df_between,
                df_within: r.df_within,
                pvalue: Real(r.pvalue),
            }),
            Err(e) => notes.push(format!("anova on {name} skipped: {e}")),
        }
    }
    rows
}

// ---------------------------------------------------------------- structure

#[derive(Debug, Serialize)]
pub struct GeodesicPayload {
    pub oriented: bool,
    pub mean_paper: Real,
    pub mean_conventional: Real,
    pub harmonic_mean: Real,
    pub diameter: u32,
    pub reachable_ordered_pairs: u64,
    pub histogram: BTreeMap<u32, u64>,
}

impl GeodesicPayload {
    fn from_summary(s: &GeodesicSummary, oriented: bool) -> Self {
        GeodesicPayload {
            oriented,
            mean_paper: Real(s.mean_paper),
            mean_conventional: Real(s.mean_conventional),
            harmonic_mean: Real(s.harmonic_mean),
            diameter: s.diameter,
            reachable_ordered_pairs: s.reachable_ordered_pairs,
            histogram: s.histogram.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MixingPayload {
    pub covariate: String,
    pub labels: Vec<String>,
    pub matrix_csv: String,
    pub modularity: Real,
    pub assortativity: Option<Real>,
    pub degenerate: bool,
}

#[derive(Debug, Serialize)]
pub struct CliquesPayload {
    pub count: usize,
    pub size_histogram: BTreeMap<usize, u64>,
    /// Cliques of at least three vertices, as id lists.
    pub size_ge3: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct StructurePayload {
    pub giant_vertices: usize,
    pub giant_edges: usize,
    pub geodesics: GeodesicPayload,
    pub geodesics_oriented: Option<GeodesicPayload>,
    pub articulation_count: usize,
    pub articulation_ids: Vec<String>,
    pub clustering_coefficient: Option<Real>,
    pub cliques: CliquesPayload,
    pub mixing: Vec<MixingPayload>,
    pub detection_lag: Option<DetectionLagReport>,
    pub notes: Vec<String>,
}

pub fn run_structure(cfg: &PipelineConfig) -> Result<StructurePayload, CliError> {
    let g = load(cfg)?;
    if g.n() == 0 {
        return Err(CliError::Data("empty vertex table".into()));
    }
    let mut notes = Vec::new();
    let giant = giant_component(&g).expect("non-empty");
    let geodesics = GeodesicPayload::from_summary(
        &geodesic_summary(&giant, false).expect("non-empty"),
        false,
    );
    let geodesics_oriented = if cfg.oriented {
        Some(GeodesicPayload::from_summary(
            &geodesic_summary(&giant, true).expect("non-empty"),
            true,
        ))
    } else {
        None
    };

    let articulation = articulation_points(&g);
    let articulation_ids: Vec<String> = articulation
        .iter()
        .map(|&v| g.vertex_id(v).to_string())
        .collect();

    let clustering = match clustering_coefficient(&g) {
        Ok(c) => Some(Real(c)),
        Err(e) => {
            notes.push(format!("clustering coefficient unavailable: {e}"));
            None
        }
    };

    let cliques = maximal_cliques(&g);
    let mut size_histogram: BTreeMap<usize, u64> = BTreeMap::new();
    for c in &cliques {
        *size_histogram.entry(c.len()).or_insert(0) += 1;
    }
    let size_ge3: Vec<Vec<String>> = cliques
        .iter()
        .filter(|c| c.len() >= 3)
        .map(|c| c.iter().map(|&v| g.vertex_id(v).to_string()).collect())
        .collect();
    let cliques_payload = CliquesPayload {
        count: cliques.len(),
        size_histogram,
        size_ge3,
    };

    let mut mixing = Vec::new();
    for name in &cfg.covariates {
        let partition = match name.as_str() {
            "orientation" => CovariatePartition::by_orientation(&g),
            "detection_mode" => CovariatePartition::by_detection_mode(&g),
            "region" => CovariatePartition::by_region(&g),
            "age" => CovariatePartition::by_age_bins(&g),
            _ => unreachable!("validated covariate"),
        };
        match mixing_matrix(&g, &partition) {
            Ok(mm) => {
                let (r, degenerate) = match assortativity(&mm) {
                    Ok(r) => (Some(Real(r)), false),
                    Err(MixingError::DegenerateMatrix) => (None, true),
                    Err(e) => return Err(CliError::Internal(e.to_string())),
                };
                mixing.push(MixingPayload {
                    covariate: name.clone(),
                    labels: mm.labels.clone(),
                    matrix_csv: mm.to_csv_block(),
                    modularity: Real(modularity(&mm)),
                    assortativity: r,
                    degenerate,
                });
            }
            Err(MixingError::EmptyGraph) => {
                notes.push(format!("mixing on {name} skipped: graph has no edges"));
            }
            Err(e) => return Err(CliError::Internal(e.to_string())),
        }
    }

    let lag = match detection_lag(&g) {
        Ok(l) => Some(l),
        Err(MixingError::MissingCovariate(c)) => {
            notes.push(format!("detection lag skipped: covariate `{c}` missing"));
            None
        }
        Err(e) => return Err(CliError::Internal(e.to_string())),
    };

    let payload = StructurePayload {
        giant_vertices: giant.n(),
        giant_edges: giant.m(),
        geodesics,
        geodesics_oriented,
        articulation_count: articulation_ids.len(),
        articulation_ids,
        clustering_coefficient: clustering,
        cliques: cliques_payload,
        mixing,
        detection_lag: lag,
        notes,
    };
    write_json(cfg, "structure", &payload)?;
    Ok(payload)
}

// ---------------------------------------------------------------- communities

#[derive(Debug, Serialize)]
pub struct NullPayload {
    pub replicates: u32,
    pub mean: Real,
    pub max: Real,
}

#[derive(Debug, Serialize)]
pub struct ClusterRow {
    pub index: usize,
    pub size: u64,
    pub edges: u64,
    pub orientation_counts: BTreeMap<String, u64>,
    pub homogeneity_pvalue: Option<Real>,
    pub homogeneity_mc_pvalue: Option<Real>,
    pub small_expected: bool,
    pub group: Option<String>,
    pub below_resolution: bool,
    /// Sub-cluster count when the recursive split is significant.
    pub subclusters: Option<usize>,
    pub sub_q: Option<Real>,
    pub sub_null_mean: Real,
    pub sub_null_max: Real,
}

#[derive(Debug, Serialize)]
pub struct GroupsPayload {
    pub msm_clusters: u64,
    pub msm_persons: u64,
    pub mixed_clusters: u64,
    pub mixed_persons: u64,
    pub msm_internal: u64,
    pub mixed_internal: u64,
    pub msm_between_clusters: u64,
    pub mixed_between_clusters: u64,
    pub between_groups: u64,
    pub msm_to_typical: u64,
    pub mixed_to_typical: u64,
}

#[derive(Debug, Serialize)]
pub struct CommunitiesPayload {
    pub giant_vertices: usize,
    pub giant_edges: usize,
    pub restarts: u32,
    pub q: Real,
    pub cluster_count: usize,
    pub resolution_limit: Real,
    pub inter_cluster_edges: u64,
    pub multiplicity_one_links: u64,
    pub null: NullPayload,
    pub significant: bool,
    pub exceedance: Real,
    pub atypical_count: Option<usize>,
    pub clusters: Vec<ClusterRow>,
    pub groups: Option<GroupsPayload>,
    pub partition_csv: String,
    pub null_samples_csv: String,
    pub figures: Vec<String>,
    pub notes: Vec<String>,
}

pub fn run_communities(cfg: &PipelineConfig) -> Result<CommunitiesPayload, CliError> {
    let g = load(cfg)?;
    if g.n() == 0 {
        return Err(CliError::Data("empty vertex table".into()));
    }
    let giant = giant_component(&g).expect("non-empty");
    if giant.m() == 0 {
        return Err(CliError::Data(
            "giant component has no edges; nothing to cluster".into(),
        ));
    }
    let mut notes = Vec::new();

    let partition = greedy_modularity_multistart(&giant, cfg.seed, cfg.restarts)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let cg = cluster_graph(&giant, &partition);

    let null_cfg = SwapChainConfig::defaults(
        giant.m(),
        cfg.replicates,
        derive(cfg.seed, &[0x6e75_6c6c]),
    );
    let nd = null_modularity(&giant, &null_cfg).map_err(|e| CliError::Data(e.to_string()))?;
    let verdict = significance(partition.q, &nd);

    let atypicality = match atypicality_report(&giant, &partition) {
        Ok(a) => Some(a),
        Err(e) => {
            notes.push(format!("atypicality skipped: {e}"));
            None
        }
    };
    let groups_vec: Option<Vec<ClusterGroup>> = atypicality
        .as_ref()
        .map(|a| a.clusters.iter().map(|c| c.group).collect());

    let sub = recursive_subclustering(&giant, &partition, cfg.replicates, derive(cfg.seed, &[0x73_7562]));

    let mut clusters = Vec::with_capacity(partition.j);
    for c in 0..partition.j {
        let node = &cg.nodes[c];
        let (hp, mcp, small) = match &atypicality {
            Some(a) => {
                let h = &a.clusters[c].homogeneity;
                (
                    Some(Real(h.pvalue)),
                    h.mc_pvalue.map(Real),
                    h.small_expected,
                )
            }
            None => (None, None, false),
        };
        let group = groups_vec.as_ref().map(|gv| format!("{:?}", gv[c]));
        let s = &sub[c];
        clusters.push(ClusterRow {
            index: c,
            size: node.size,
            edges: node.intra_edges,
            orientation_counts: node.orientation_counts.clone(),
            homogeneity_pvalue: hp,
            homogeneity_mc_pvalue: mcp,
            small_expected: small,
            group,
            below_resolution: s.below_resolution,
            subclusters: if s.significant {
                s.subpartition.as_ref().map(|p| p.j)
            } else {
                None
            },
            sub_q: s.subpartition.as_ref().map(|p| Real(p.q)),
            sub_null_mean: Real(s.null_mean),
            sub_null_max: Real(s.null_max),
        });
    }

    let groups_payload = match (&atypicality, &groups_vec) {
        (Some(_), Some(gv)) => {
            let gc = group_connectivity(&giant, &partition, gv);
            Some(GroupsPayload {
                msm_clusters: gc.msm_clusters,
                msm_persons: gc.msm_persons,
                mixed_clusters: gc.mixed_clusters,
                mixed_persons: gc.mixed_persons,
                msm_internal: gc.msm_internal,
                mixed_internal: gc.mixed_internal,
                msm_between_clusters: gc.msm_between_clusters,
                mixed_between_clusters: gc.mixed_between_clusters,
                between_groups: gc.between_groups,
                msm_to_typical: gc.msm_to_typical,
                mixed_to_typical: gc.mixed_to_typical,
            })
        }
        _ => None,
    };

    // sidecars
    let mut partition_csv = String::from("vertex_id,cluster\n");
    for (v, &c) in partition.assignment.iter().enumerate() {
        partition_csv.push_str(&format!("{},{}\n", giant.vertex_id(v as u32), c));
    }
    let partition_name = "partition.csv";
    write_sidecar(cfg, partition_name, &partition_csv)?;
    let mut null_csv = String::from("q\n");
    for q in &nd.samples {
        null_csv.push_str(&format!("{q}\n"));
    }
    let null_name = "null_samples.csv";
    write_sidecar(cfg, null_name, &null_csv)?;

    // quotient layout and figures
    let quotient_edges: Vec<(u32, u32)> = cg
        .links
        .iter()
        .map(|l| (l.a as u32, l.b as u32))
        .collect();
    let mut figures = Vec::new();
    if partition.j >= 2 {
        let layout_cfg = LayoutConfig {
            delta: cfg.delta,
            max_iterations: cfg.layout_iterations,
            gradient_tolerance: 1e-6,
            seed: derive(cfg.seed, &[0x7169_6f74]),
        };
        let pos = minimize_points(partition.j, &quotient_edges, &layout_cfg)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let pies = render_cluster_svg(&cg, &pos.coordinates, None);
        write_sidecar(cfg, "clusters_pies.svg", &pies)?;
        figures.push("clusters_pies.svg".into());
        if let Some(a) = &atypicality {
            let pvals: Vec<f64> = a.clusters.iter().map(|c| c.homogeneity.pvalue).collect();
            let grayscale = render_cluster_svg(&cg, &pos.coordinates, Some(&pvals));
            write_sidecar(cfg, "clusters_pvalues.svg", &grayscale)?;
            figures.push("clusters_pvalues.svg".into());
            let groups_svg =
                render_cluster_groups_svg(&cg, &pos.coordinates, groups_vec.as_ref().unwrap());
            write_sidecar(cfg, "clusters_groups.svg", &groups_svg)?;
            figures.push("clusters_groups.svg".into());
        }
    } else {
        notes.push("single cluster: quotient figures skipped".into());
    }

    let payload = CommunitiesPayload {
        giant_vertices: giant.n(),
        giant_edges: giant.m(),
        restarts: cfg.restarts,
        q: Real(partition.q),
        cluster_count: partition.j,
        resolution_limit: Real(resolution_limit(giant.m() as u64)),
        inter_cluster_edges: cg.inter_cluster_edges(),
        multiplicity_one_links: cg.links.iter().filter(|l| l.multiplicity == 1).count() as u64,
        null: NullPayload {
            replicates: cfg.replicates,
            mean: Real(nd.mean),
            max: Real(nd.max),
        },
        significant: verdict.significant,
        exceedance: Real(verdict.exceedance),
        atypical_count: atypicality.as_ref().map(|a| {
            a.clusters
                .iter()
                .filter(|c| c.group != ClusterGroup::Typical)
                .count()
        }),
        clusters,
        groups: groups_payload,
        partition_csv: partition_name.into(),
        null_samples_csv: null_name.into(),
        figures,
        notes,
    };
    write_json(cfg, "communities", &payload)?;
    Ok(payload)
}

// ---------------------------------------------------------------- render

#[derive(Debug, Serialize)]
pub struct RenderPayload {
    pub vertices: usize,
    pub edges: usize,
    pub converged: bool,
    pub final_energy: Real,
    pub figure: String,
}

pub fn run_render(cfg: &PipelineConfig) -> Result<RenderPayload, CliError> {
    let g = load(cfg)?;
    if g.n() == 0 {
        return Err(CliError::Data("empty vertex table".into()));
    }
    let giant = giant_component(&g).expect("non-empty");
    if giant.n() < 2 {
        return Err(CliError::Data(
            "giant component has fewer than two vertices; nothing to draw".into(),
        ));
    }
    let layout_cfg = LayoutConfig {
        delta: cfg.delta,
        max_iterations: cfg.layout_iterations,
        gradient_tolerance: 1e-6,
        seed: derive(cfg.seed, &[0x6c61_79]),
    };
    let pos = minimize_layout(&giant, &layout_cfg).map_err(|e| CliError::Internal(e.to_string()))?;
    let svg = render_vertex_svg(&giant, &pos.coordinates, cfg.wants("orientation"));
    write_sidecar(cfg, "layout_vertices.svg", &svg)?;
    let payload = RenderPayload {
        vertices: giant.n(),
        edges: giant.m(),
        converged: pos.converged,
        final_energy: Real(pos.final_energy),
        figure: "layout_vertices.svg".into(),
    };
    write_json(cfg, "render", &payload)?;
    Ok(payload)
}

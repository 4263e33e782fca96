//! Covariate mixing analysis: mixing matrices over vertex partitions,
//! modularity and assortativity coefficients, χ² homogeneity tests, and
//! detection-lag statistics along edges.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::ContactGraph;
use crate::io::NamedBy;
use crate::rng::substream;
use crate::stats;

/// Fixed stream for the homogeneity Monte Carlo p-value.
const MONTE_CARLO_SEED: u64 = 0x686f_6d6f_6765_6e31;
const MONTE_CARLO_DRAWS: u32 = 10_000;

#[derive(Debug, Error)]
pub enum MixingError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("vertex {0} has no group assignment")]
    UnassignedVertex(u32),
    #[error("assignment length {got} does not match vertex count {expected}")]
    BadAssignment { got: usize, expected: usize },
    #[error("‖M²‖ = 1: assortativity undefined (single effective group)")]
    DegenerateMatrix,
    #[error("no observations")]
    EmptyObservation,
    #[error("reference proportions must sum to 1 (got {0})")]
    BadReference(f64),
    #[error("covariate `{0}` is missing for every vertex")]
    MissingCovariate(&'static str),
}

/// A stratification of the vertex set into J named groups.
#[derive(Debug, Clone, Serialize)]
pub struct CovariatePartition {
    pub labels: Vec<String>,
    pub assignment: Vec<usize>,
}

impl CovariatePartition {
    pub fn new(labels: Vec<String>, assignment: Vec<usize>) -> Self {
        debug_assert!(assignment.iter().all(|&g| g < labels.len()));
        CovariatePartition { labels, assignment }
    }

    pub fn group_count(&self) -> usize {
        self.labels.len()
    }

    /// Groups by gender/sexual orientation.
    pub fn by_orientation(g: &ContactGraph) -> Self {
        let labels: Vec<String> = crate::io::Orientation::ALL
            .iter()
            .map(|o| o.code().to_string())
            .collect();
        let assignment = g
            .vertices()
            .iter()
            .map(|v| {
                crate::io::Orientation::ALL
                    .iter()
                    .position(|o| *o == v.orientation)
                    .expect("orientation enum covered")
            })
            .collect();
        CovariatePartition::new(labels, assignment)
    }

    /// Groups by detection mode.
    pub fn by_detection_mode(g: &ContactGraph) -> Self {
        let labels: Vec<String> = crate::io::DetectionMode::ALL
            .iter()
            .map(|m| m.code().to_string())
            .collect();
        let assignment = g
            .vertices()
            .iter()
            .map(|v| {
                crate::io::DetectionMode::ALL
                    .iter()
                    .position(|m| *m == v.detection_mode)
                    .expect("detection mode enum covered")
            })
            .collect();
        CovariatePartition::new(labels, assignment)
    }

    /// Groups by region label; missing regions form a `U` group.
    pub fn by_region(g: &ContactGraph) -> Self {
        let mut labels: Vec<String> = g
            .vertices()
            .iter()
            .filter_map(|v| v.region.clone())
            .collect();
        labels.sort();
        labels.dedup();
        labels.push("U".to_string());
        let unknown = labels.len() - 1;
        let assignment = g
            .vertices()
            .iter()
            .map(|v| match &v.region {
                Some(r) => labels.binary_search(r).unwrap_or(unknown),
                None => unknown,
            })
            .collect();
        CovariatePartition::new(labels, assignment)
    }

    /// Groups by age at detection in 5-year bins [15,20) … [60,65), with
    /// catch-all groups below, above, and for missing ages.
    pub fn by_age_bins(g: &ContactGraph) -> Self {
        let mut labels: Vec<String> = vec!["<15".to_string()];
        for lo in (15..65).step_by(5) {
            labels.push(format!("[{},{})", lo, lo + 5));
        }
        labels.push(">=65".to_string());
        labels.push("U".to_string());
        let unknown = labels.len() - 1;
        let assignment = g
            .vertices()
            .iter()
            .map(|v| match v.age_at_detection {
                None => unknown,
                Some(a) if a < 15 => 0,
                Some(a) if a >= 65 => labels.len() - 2,
                Some(a) => 1 + ((a - 15) / 5) as usize,
            })
            .collect();
        CovariatePartition::new(labels, assignment)
    }
}

/// Symmetric J×J matrix of edge fractions between groups; ‖M‖ = 1.
#[derive(Debug, Clone, Serialize)]
pub struct MixingMatrix {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<f64>>,
    pub row_sums: Vec<f64>,
}

impl MixingMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Σ entries of M², which for the symmetric edge-fraction matrix equals
    /// Σ row sums squared.
    pub fn m2_norm(&self) -> f64 {
        self.row_sums.iter().map(|a| a * a).sum()
    }

    /// Labeled CSV block (header row of labels, then one row per group) for
    /// embedding in reports.
    pub fn to_csv_block(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(",{}\n", self.labels.join(",")));
        for (label, row) in self.labels.iter().zip(&self.entries) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&format!("{label},{}\n", cells.join(",")));
        }
        out
    }
}

/// Edge-fraction mixing matrix of a partition: a within-group edge adds 1/m
/// to its diagonal cell, a between-group edge adds 1/(2m) to each of the two
/// mirror cells.
pub fn mixing_matrix(
    g: &ContactGraph,
    p: &CovariatePartition,
) -> Result<MixingMatrix, MixingError> {
    if p.assignment.len() != g.n() {
        return Err(MixingError::BadAssignment {
            got: p.assignment.len(),
            expected: g.n(),
        });
    }
    let m = g.m();
    if m == 0 {
        return Err(MixingError::EmptyGraph);
    }
    let j = p.group_count();
    for (v, &grp) in p.assignment.iter().enumerate() {
        if grp >= j {
            return Err(MixingError::UnassignedVertex(v as u32));
        }
    }
    let mut entries = vec![vec![0.0f64; j]; j];
    let full = 1.0 / m as f64;
    let half = 0.5 / m as f64;
    for &(s, d, _) in g.edges() {
        let a = p.assignment[s as usize];
        let b = p.assignment[d as usize];
        if a == b {
            entries[a][a] += full;
        } else {
            entries[a][b] += half;
            entries[b][a] += half;
        }
    }
    let row_sums = entries.iter().map(|r| r.iter().sum()).collect();
    Ok(MixingMatrix {
        labels: p.labels.clone(),
        entries,
        row_sums,
    })
}

/// Modularity Q = Tr(M) − ‖M²‖ = Σᵢ [mᵢᵢ − (Σⱼ mᵢⱼ)²].
pub fn modularity(mm: &MixingMatrix) -> f64 {
    let trace: f64 = (0..mm.size()).map(|i| mm.entries[i][i]).sum();
    trace - mm.m2_norm()
}

/// Assortativity r = Q / (1 − ‖M²‖); 1 for perfectly assortative mixing,
/// 0 for random mixing.
pub fn assortativity(mm: &MixingMatrix) -> Result<f64, MixingError> {
    let m2 = mm.m2_norm();
    if (1.0 - m2).abs() < 1e-12 {
        return Err(MixingError::DegenerateMatrix);
    }
    Ok(modularity(mm) / (1.0 - m2))
}

/// χ² homogeneity of observed category counts against reference proportions.
#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityResult {
    pub statistic: f64,
    pub dof: u64,
    pub pvalue: f64,
    pub expected: Vec<f64>,
    pub observed: Vec<u64>,
    /// Some expected count fell below 5; the Monte Carlo p-value is then
    /// attached as a cross-check.
    pub small_expected: bool,
    pub mc_pvalue: Option<f64>,
}

/// Goodness-of-fit test of `observed` against `reference` proportions.
/// Categories with zero reference mass are excluded from the degrees of
/// freedom; expected counts under 5 trigger a multinomial Monte Carlo
/// p-value alongside the asymptotic one.
pub fn homogeneity_test(
    observed: &[u64],
    reference: &[f64],
) -> Result<HomogeneityResult, MixingError> {
    if observed.len() != reference.len() {
        return Err(MixingError::BadAssignment {
            got: observed.len(),
            expected: reference.len(),
        });
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(MixingError::EmptyObservation);
    }
    let ref_sum: f64 = reference.iter().sum();
    if reference.iter().any(|&p| p < 0.0) || (ref_sum - 1.0).abs() > 1e-9 {
        return Err(MixingError::BadReference(ref_sum));
    }
    let expected: Vec<f64> = reference.iter().map(|&p| p * total as f64).collect();
    let statistic = stats::gof_statistic(observed, &expected);
    let nonempty = reference.iter().filter(|&&p| p > 0.0).count() as u64;
    let dof = nonempty.saturating_sub(1);
    let pvalue = stats::chi2_sf(statistic, dof);
    let small_expected = expected.iter().any(|&e| e > 0.0 && e < 5.0);
    let mc_pvalue = if small_expected && statistic.is_finite() {
        let mut rng = substream(MONTE_CARLO_SEED, &[total, observed.len() as u64]);
        let mut at_least = 0u32;
        for _ in 0..MONTE_CARLO_DRAWS {
            let draw = stats::multinomial_draw(&mut rng, total, reference);
            if stats::gof_statistic(&draw, &expected) >= statistic - 1e-12 {
                at_least += 1;
            }
        }
        Some((1 + at_least) as f64 / (1 + MONTE_CARLO_DRAWS) as f64)
    } else {
        None
    };
    Ok(HomogeneityResult {
        statistic,
        dof,
        pvalue,
        expected,
        observed: observed.to_vec(),
        small_expected,
        mc_pvalue,
    })
}

/// Per-stratum summary of detection lags along edges.
#[derive(Debug, Clone, Serialize)]
pub struct LagSummary {
    pub edges: u64,
    pub mean_days: f64,
    pub median_days: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionLagReport {
    /// Keyed by the ego's detection-mode code.
    pub per_stratum: BTreeMap<String, LagSummary>,
    pub edges_with_dates: u64,
    pub edges_excluded: u64,
}

/// Detection lag along each edge with both endpoint dates: the ego is the
/// naming endpoint when `named_by` is directional, otherwise the
/// later-detected endpoint; lag = |date(ego) − date(alter)| in days,
/// summarized by the ego's detection mode.
pub fn detection_lag(g: &ContactGraph) -> Result<DetectionLagReport, MixingError> {
    let mut lags: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut with_dates = 0u64;
    let mut excluded = 0u64;
    for &(s, d, nb) in g.edges() {
        let (vs, vd) = (g.vertex(s), g.vertex(d));
        let (ds, dd) = match (vs.detection_date, vd.detection_date) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                excluded += 1;
                continue;
            }
        };
        with_dates += 1;
        let ego = match nb {
            NamedBy::Src => vs,
            NamedBy::Dst => vd,
            NamedBy::Both | NamedBy::Unknown => {
                if ds >= dd {
                    vs
                } else {
                    vd
                }
            }
        };
        let lag = (ds - dd).num_days().abs() as f64;
        lags.entry(ego.detection_mode.code().to_string())
            .or_default()
            .push(lag);
    }
    if with_dates == 0 {
        return Err(MixingError::MissingCovariate("detection_date"));
    }
    let per_stratum = lags
        .into_iter()
        .map(|(mode, mut v)| {
            v.sort_by(f64::total_cmp);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let median = if v.len() % 2 == 1 {
                v[v.len() / 2]
            } else {
                0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
            };
            (
                mode,
                LagSummary {
                    edges: v.len() as u64,
                    mean_days: mean,
                    median_days: median,
                },
            )
        })
        .collect();
    Ok(DetectionLagReport {
        per_stratum,
        edges_with_dates: with_dates,
        edges_excluded: excluded,
    })
}

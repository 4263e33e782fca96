//! Degree distributions and heavy-tail analysis: KL-divergence power-law
//! fitting with threshold scans, Hill estimation, and joint degree
//! (ego/alter) dependence.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::graph::ContactGraph;
use crate::rng::substream;
use crate::stats::{self, StatsError};

/// Fixed stream for the joint-degree permutation test.
const PERMUTATION_SEED: u64 = 0x6a6f_696e_745f_6467;
const PERMUTATION_ROUNDS: u32 = 10_000;

#[derive(Debug, Error)]
pub enum DegreeError {
    #[error("covariate `{0}` is missing for every vertex")]
    MissingCovariate(&'static str),
    #[error("alpha must be finite and > 1 (got {0})")]
    AlphaOutOfRange(f64),
    #[error("threshold k0 must be ≥ 1")]
    BadThreshold,
    #[error("no degree mass at or above k0 = {0}")]
    EmptyTail(u32),
    #[error("tail at k0 = {0} has a single support point; any exponent fits equally")]
    DegenerateTail(u32),
    #[error("m = {m} outside 1..={max}")]
    BadM { m: usize, max: usize },
    #[error("degree variance across edge endpoints is zero")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegreeSource {
    Declared,
    Observed,
}

/// Empirical degree frequencies.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeDistribution {
    pub source: DegreeSource,
    pub counts: BTreeMap<u32, u64>,
    pub n_total: u64,
    /// Vertices skipped because the declared count was missing.
    pub excluded_missing: u64,
}

impl DegreeDistribution {
    pub fn from_values(
        source: DegreeSource,
        values: impl IntoIterator<Item = u32>,
        excluded_missing: u64,
    ) -> Self {
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        let mut n_total = 0;
        for v in values {
            *counts.entry(v).or_insert(0) += 1;
            n_total += 1;
        }
        DegreeDistribution {
            source,
            counts,
            n_total,
            excluded_missing,
        }
    }

    /// Relative frequency p_k.
    pub fn p(&self, k: u32) -> f64 {
        if self.n_total == 0 {
            return 0.0;
        }
        *self.counts.get(&k).unwrap_or(&0) as f64 / self.n_total as f64
    }

    pub fn max_degree(&self) -> u32 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// Positive degrees sorted descending, with multiplicity.
    pub fn positive_degrees_desc(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (&k, &c) in self.counts.iter().rev() {
            if k > 0 {
                out.extend(std::iter::repeat(k).take(c as usize));
            }
        }
        out
    }

    /// Tail mass c_{p,k0} = Σ_{k≥k0} p_k.
    pub fn tail_mass(&self, k0: u32) -> f64 {
        if self.n_total == 0 {
            return 0.0;
        }
        let tail: u64 = self.counts.range(k0..).map(|(_, &c)| c).sum();
        tail as f64 / self.n_total as f64
    }

    fn tail_support_points(&self, k0: u32) -> usize {
        self.counts.range(k0..).filter(|(_, &c)| c > 0).count()
    }
}

/// Degree distribution of a graph, either observed (graph degree) or declared
/// (reported partner counts; vertices missing the value are excluded and
/// tallied).
pub fn degree_distribution(
    g: &ContactGraph,
    source: DegreeSource,
) -> Result<DegreeDistribution, DegreeError> {
    let all: Vec<u32> = (0..g.n() as u32).collect();
    degree_distribution_filtered(g, source, &all)
}

/// Same as [`degree_distribution`] restricted to a vertex subset (stratum).
pub fn degree_distribution_filtered(
    g: &ContactGraph,
    source: DegreeSource,
    vertices: &[u32],
) -> Result<DegreeDistribution, DegreeError> {
    match source {
        DegreeSource::Observed => Ok(DegreeDistribution::from_values(
            source,
            vertices.iter().map(|&v| g.degree(v) as u32),
            0,
        )),
        DegreeSource::Declared => {
            let mut values = Vec::new();
            let mut excluded = 0;
            for &v in vertices {
                match g.vertex(v).declared_partners {
                    Some(d) => values.push(d),
                    None => excluded += 1,
                }
            }
            if values.is_empty() {
                return Err(DegreeError::MissingCovariate("declared_partners"));
            }
            Ok(DegreeDistribution::from_values(source, values, excluded))
        }
    }
}

/// C_α = Σ_{k≥k0} k^{-α}, evaluated as a direct sum up to a cutoff plus an
/// Euler–Maclaurin remainder; absolute error stays below 1e-12 for α > 1.01.
pub fn zeta_tail(alpha: f64, k0: u32) -> f64 {
    debug_assert!(alpha > 1.0 && k0 >= 1);
    const CUTOFF: u64 = 1024;
    let n = CUTOFF.max(k0 as u64);
    // ascending magnitude to limit accumulation error
    let mut sum = 0.0;
    let mut k = n - 1;
    while k >= k0 as u64 {
        sum += (k as f64).powf(-alpha);
        if k == k0 as u64 {
            break;
        }
        k -= 1;
    }
    let nf = n as f64;
    let tail = nf.powf(1.0 - alpha) / (alpha - 1.0) + nf.powf(-alpha) / 2.0
        + alpha * nf.powf(-alpha - 1.0) / 12.0
        - alpha * (alpha + 1.0) * (alpha + 2.0) * nf.powf(-alpha - 3.0) / 720.0;
    sum + tail
}

/// Outcome of a KL evaluation; when no empirical mass lies at or beyond the
/// threshold the divergence is zero by convention and `empty_tail` is set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KlDivergence {
    pub value: f64,
    pub empty_tail: bool,
}

/// Dissimilarity between the conditional empirical tail (degrees ≥ k0) and
/// the power law k^{-α}: Σ_{k≥k0} (p_k/c)·ln(C_α·p_k / (c·k^{-α})).
pub fn kl_divergence(
    d: &DegreeDistribution,
    k0: u32,
    alpha: f64,
) -> Result<KlDivergence, DegreeError> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(DegreeError::AlphaOutOfRange(alpha));
    }
    if k0 < 1 {
        return Err(DegreeError::BadThreshold);
    }
    let c = d.tail_mass(k0);
    if c <= 0.0 {
        return Ok(KlDivergence {
            value: 0.0,
            empty_tail: true,
        });
    }
    let c_alpha = zeta_tail(alpha, k0);
    Ok(KlDivergence {
        value: kl_with_normalizer(d, k0, alpha, c_alpha),
        empty_tail: false,
    })
}

/// KL evaluation with an injected power-law normalizer; exposing this allows
/// checking the zero-divergence case where the theoretical law is restricted
/// to the empirical support.
pub fn kl_with_normalizer(d: &DegreeDistribution, k0: u32, alpha: f64, c_alpha: f64) -> f64 {
    let c = d.tail_mass(k0);
    let mut value = 0.0;
    for (&k, &count) in d.counts.range(k0..) {
        if count == 0 {
            continue;
        }
        let p = count as f64 / d.n_total as f64;
        let cond = p / c;
        // ln(C_α · p_k / (c · k^{-α})) = ln C_α + ln p_k − ln c + α ln k
        value += cond * (c_alpha.ln() + p.ln() - c.ln() + alpha * (k as f64).ln());
    }
    value
}

/// A fitted power-law tail.
#[derive(Debug, Clone, Serialize)]
pub struct PowerLawFit {
    pub k0: u32,
    pub alpha: f64,
    pub kl_value: f64,
    /// c_{p,k0}: empirical mass at or above the threshold.
    pub tail_mass: f64,
    /// C_α at the fitted exponent.
    pub normalizer: f64,
}

const ALPHA_MIN: f64 = 1.0 + 1e-6;
const ALPHA_MAX: f64 = 20.0;

/// Minimum-KL exponent for a fixed threshold: bracketing grid plus
/// golden-section refinement to |Δα| < 1e-4.
pub fn fit_alpha(d: &DegreeDistribution, k0: u32) -> Result<PowerLawFit, DegreeError> {
    if k0 < 1 {
        return Err(DegreeError::BadThreshold);
    }
    match d.tail_support_points(k0) {
        0 => return Err(DegreeError::EmptyTail(k0)),
        1 => return Err(DegreeError::DegenerateTail(k0)),
        _ => {}
    }
    let kl = |alpha: f64| kl_with_normalizer(d, k0, alpha, zeta_tail(alpha, k0));

    const GRID: usize = 96;
    let mut best = (0usize, f64::INFINITY);
    let at = |i: usize| ALPHA_MIN + (ALPHA_MAX - ALPHA_MIN) * i as f64 / (GRID - 1) as f64;
    for i in 0..GRID {
        let v = kl(at(i));
        if v < best.1 {
            best = (i, v);
        }
    }
    let mut lo = at(best.0.saturating_sub(1));
    let mut hi = at((best.0 + 1).min(GRID - 1));
    // golden-section: KL is strictly convex in α for a ≥2-point tail
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = kl(x1);
    let mut f2 = kl(x2);
    while hi - lo > 1e-5 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = kl(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = kl(x2);
        }
    }
    let alpha = 0.5 * (lo + hi);
    Ok(PowerLawFit {
        k0,
        alpha,
        kl_value: kl(alpha),
        tail_mass: d.tail_mass(k0),
        normalizer: zeta_tail(alpha, k0),
    })
}

/// Reason a scan threshold produced no estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanFlag {
    EmptyTail,
    DegenerateTail,
}

/// One threshold of the {(k0, α̂_{k0})} selection scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub k0: u32,
    pub alpha: Option<f64>,
    pub kl_value: Option<f64>,
    pub flag: Option<ScanFlag>,
}

/// Exponent estimates for every threshold 1..=k_max; infeasible thresholds
/// yield flagged gap entries. The output feeds the plateau-selection plot.
pub fn k0_scan(d: &DegreeDistribution) -> Vec<ScanEntry> {
    let k_max = d.max_degree();
    (1..=k_max)
        .map(|k0| match fit_alpha(d, k0) {
            Ok(fit) => ScanEntry {
                k0,
                alpha: Some(fit.alpha),
                kl_value: Some(fit.kl_value),
                flag: None,
            },
            Err(DegreeError::EmptyTail(_)) => ScanEntry {
                k0,
                alpha: None,
                kl_value: None,
                flag: Some(ScanFlag::EmptyTail),
            },
            Err(DegreeError::DegenerateTail(_)) => ScanEntry {
                k0,
                alpha: None,
                kl_value: None,
                flag: Some(ScanFlag::DegenerateTail),
            },
            Err(_) => unreachable!("fit_alpha with k0 ≥ 1 only fails on tail shape"),
        })
        .collect()
}

/// Hill tail-index estimates from the m largest degrees.
///
/// `alpha_paper` is the plain ratio form [ (1/m) Σ k_(j)/k_(m) ]^{-1};
/// `alpha_log` is the classical logarithmic variant shifted for a discrete
/// density exponent, 1 + m / Σ ln(k_(j)/k_(m)).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HillEstimate {
    pub m: usize,
    pub alpha_paper: f64,
    pub alpha_log: f64,
}

pub fn hill_estimator(d: &DegreeDistribution, m: usize) -> Result<HillEstimate, DegreeError> {
    let degrees = d.positive_degrees_desc();
    if m < 1 || m > degrees.len() {
        return Err(DegreeError::BadM {
            m,
            max: degrees.len(),
        });
    }
    let km = degrees[m - 1] as f64;
    let mut ratio_sum = 0.0;
    let mut log_sum = 0.0;
    for &k in &degrees[..m] {
        ratio_sum += k as f64 / km;
        log_sum += (k as f64 / km).ln();
    }
    let alpha_paper = m as f64 / ratio_sum;
    let alpha_log = if log_sum > 0.0 {
        1.0 + m as f64 / log_sum
    } else {
        f64::INFINITY
    };
    Ok(HillEstimate {
        m,
        alpha_paper,
        alpha_log,
    })
}

/// Hill estimates for every valid order-statistic count m.
pub fn hill_scan(d: &DegreeDistribution) -> Vec<HillEstimate> {
    let degrees = d.positive_degrees_desc();
    let n = degrees.len();
    if n == 0 {
        return Vec::new();
    }
    let mut prefix_ratio = Vec::with_capacity(n);
    let mut prefix_log = Vec::with_capacity(n);
    let mut sr = 0.0;
    let mut sl = 0.0;
    for &k in &degrees {
        sr += k as f64;
        sl += (k as f64).ln();
        prefix_ratio.push(sr);
        prefix_log.push(sl);
    }
    (1..=n)
        .map(|m| {
            let km = degrees[m - 1] as f64;
            let ratio_sum = prefix_ratio[m - 1] / km;
            let log_sum = prefix_log[m - 1] - m as f64 * km.ln();
            HillEstimate {
                m,
                alpha_paper: m as f64 / ratio_sum,
                alpha_log: if log_sum > 0.0 {
                    1.0 + m as f64 / log_sum
                } else {
                    f64::INFINITY
                },
            }
        })
        .collect()
}

/// Binned χ² independence test over the joint table.
#[derive(Debug, Clone, Serialize)]
pub struct JointChi2 {
    pub bin_labels: Vec<String>,
    pub observed: Vec<Vec<u64>>,
    pub expected: Vec<Vec<f64>>,
    pub statistic: f64,
    pub dof: u64,
    pub pvalue: f64,
    pub permutation_pvalue: f64,
    /// Set when pooling could not raise every expected cell to 5.
    pub small_expected: bool,
}

/// Joint degree distribution over ordered edge endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct JointDegreeTable {
    pub cells: BTreeMap<(u32, u32), u64>,
    pub correlation: f64,
    pub chi2: JointChi2,
}

/// Builds the symmetric ego/alter degree table over the 2m ordered endpoint
/// pairs, with Pearson correlation and a binned χ² independence test
/// (asymptotic plus permutation p-value).
pub fn joint_degree_analysis(g: &ContactGraph) -> Result<JointDegreeTable, DegreeError> {
    let mut cells: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut egos = Vec::with_capacity(2 * g.m());
    let mut alters = Vec::with_capacity(2 * g.m());
    for &(s, t, _) in g.edges() {
        let ds = g.degree(s) as u32;
        let dt = g.degree(t) as u32;
        *cells.entry((ds, dt)).or_insert(0) += 1;
        *cells.entry((dt, ds)).or_insert(0) += 1;
        egos.push(ds as f64);
        alters.push(dt as f64);
        egos.push(dt as f64);
        alters.push(ds as f64);
    }
    let correlation = stats::pearson(&egos, &alters).map_err(|e| match e {
        StatsError::ZeroVariance | StatsError::EmptyObservation => DegreeError::ZeroVariance,
        other => panic!("unexpected pearson failure: {other}"),
    })?;
    let chi2 = joint_chi2(&egos, &alters);
    Ok(JointDegreeTable {
        cells,
        correlation,
        chi2,
    })
}

/// Degree bins for the independence test: {1},{2},{3},{4},{5},{6–10},{11+},
/// greedily pooled until every expected count reaches 5.
fn initial_bins() -> Vec<(u32, u32)> {
    vec![
        (1, 1),
        (2, 2),
        (3, 3),
        (4, 4),
        (5, 5),
        (6, 10),
        (11, u32::MAX),
    ]
}

fn bin_label(lo: u32, hi: u32) -> String {
    if hi == u32::MAX {
        format!("{lo}+")
    } else if lo == hi {
        format!("{lo}")
    } else {
        format!("{lo}-{hi}")
    }
}

fn bin_of(bins: &[(u32, u32)], k: u32) -> usize {
    bins.iter()
        .position(|&(lo, hi)| k >= lo && k <= hi)
        .unwrap_or(0)
}

fn joint_chi2(egos: &[f64], alters: &[f64]) -> JointChi2 {
    let n = egos.len() as f64;
    let mut bins = initial_bins();

    // pool bins (rows and columns together, keeping the table square) until
    // every expected count is at least 5 or only two bins remain
    let (ego_bins, alter_bins, observed, expected) = loop {
        let b = bins.len();
        let ego_idx: Vec<usize> = egos.iter().map(|&k| bin_of(&bins, k as u32)).collect();
        let alter_idx: Vec<usize> = alters.iter().map(|&k| bin_of(&bins, k as u32)).collect();
        let mut observed = vec![vec![0u64; b]; b];
        for (&i, &j) in ego_idx.iter().zip(&alter_idx) {
            observed[i][j] += 1;
        }
        let row: Vec<f64> = observed
            .iter()
            .map(|r| r.iter().sum::<u64>() as f64)
            .collect();
        let col: Vec<f64> = (0..b)
            .map(|j| observed.iter().map(|r| r[j] as f64).sum())
            .collect();
        let expected: Vec<Vec<f64>> = (0..b)
            .map(|i| (0..b).map(|j| row[i] * col[j] / n).collect())
            .collect();
        let min_expected = expected
            .iter()
            .flatten()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_expected >= 5.0 || b <= 2 {
            break (ego_idx, alter_idx, observed, expected);
        }
        // merge the bin with the smallest margin into its lighter neighbor
        let smallest = (0..b)
            .min_by(|&a, &c| row[a].total_cmp(&row[c]).then(a.cmp(&c)))
            .expect("at least one bin");
        let merge_into = if smallest == 0 {
            1
        } else if smallest == b - 1 {
            b - 2
        } else if row[smallest - 1] <= row[smallest + 1] {
            smallest - 1
        } else {
            smallest + 1
        };
        let (a, c) = (smallest.min(merge_into), smallest.max(merge_into));
        bins[a] = (bins[a].0, bins[c].1);
        bins.remove(c);
    };

    let b = bins.len();
    let flat_obs: Vec<u64> = observed.iter().flatten().copied().collect();
    let flat_exp: Vec<f64> = expected.iter().flatten().copied().collect();
    let statistic = stats::gof_statistic(&flat_obs, &flat_exp);
    let dof = ((b - 1) * (b - 1)) as u64;
    let pvalue = stats::chi2_sf(statistic, dof);
    let small_expected = flat_exp.iter().any(|&e| e > 0.0 && e < 5.0);

    // permutation test: shuffle the alter column; margins are invariant so
    // the binning and expected table stay fixed
    let mut rng = substream(PERMUTATION_SEED, &[egos.len() as u64]);
    let mut perm = alter_bins.clone();
    let mut at_least = 0u32;
    for _ in 0..PERMUTATION_ROUNDS {
        perm.shuffle(&mut rng);
        let mut obs = vec![vec![0u64; b]; b];
        for (&i, &j) in ego_bins.iter().zip(&perm) {
            obs[i][j] += 1;
        }
        let flat: Vec<u64> = obs.iter().flatten().copied().collect();
        if stats::gof_statistic(&flat, &flat_exp) >= statistic - 1e-12 {
            at_least += 1;
        }
    }
    let permutation_pvalue = (1 + at_least) as f64 / (1 + PERMUTATION_ROUNDS) as f64;

    JointChi2 {
        bin_labels: bins.iter().map(|&(lo, hi)| bin_label(lo, hi)).collect(),
        observed,
        expected,
        statistic,
        dof,
        pvalue,
        permutation_pvalue,
        small_expected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dist(pairs: &[(u32, u64)]) -> DegreeDistribution {
        let mut counts = BTreeMap::new();
        let mut n = 0;
        for &(k, c) in pairs {
            counts.insert(k, c);
            n += c;
        }
        DegreeDistribution {
            source: DegreeSource::Observed,
            counts,
            n_total: n,
            excluded_missing: 0,
        }
    }

    #[test]
    fn observed_distribution_of_path() {
        let g = ContactGraph::synthetic(3, &[(0, 1), (1, 2)]);
        let d = degree_distribution(&g, DegreeSource::Observed).unwrap();
        assert!((d.p(1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.p(2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn declared_all_missing_is_an_error() {
        let g = ContactGraph::synthetic(3, &[(0, 1), (1, 2)]);
        assert!(matches!(
            degree_distribution(&g, DegreeSource::Declared),
            Err(DegreeError::MissingCovariate(_))
        ));
    }

    #[test]
    fn zeta_tail_reproduces_basel() {
        assert!((zeta_tail(2.0, 1) - PI * PI / 6.0).abs() < 1e-9);
    }

    #[test]
    fn kl_two_point_hand_value() {
        // p ∝ (1, 1/8) at k ∈ {1,2}: p = (8/9, 1/9); α = 2, C_α = π²/6.
        // Direct arithmetic on the tail formula:
        //   (8/9)·ln(C·(8/9)/1) + (1/9)·ln(C·(1/9)/(1/4))
        let d = dist(&[(1, 8), (2, 1)]);
        let c = PI * PI / 6.0;
        let expected = (8.0 / 9.0) * (c * (8.0 / 9.0)).ln() + (1.0 / 9.0) * (c * (4.0 / 9.0)).ln();
        let got = kl_divergence(&d, 1, 2.0).unwrap();
        assert!(!got.empty_tail);
        assert!((got.value - expected).abs() < 1e-12, "got {}", got.value);
    }

    #[test]
    fn kl_above_max_degree_is_zero_and_flagged() {
        let d = dist(&[(1, 3), (2, 1)]);
        let got = kl_divergence(&d, 5, 2.0).unwrap();
        assert!(got.empty_tail);
        assert_eq!(got.value, 0.0);
    }

    #[test]
    fn kl_zero_for_exact_truncated_law() {
        // counts exactly ∝ k^{-2} on {1,2,4} scaled by 16: 16, 4, 1
        let d = dist(&[(1, 16), (2, 4), (4, 1)]);
        let support_norm = 1.0 + 0.25 + 1.0 / 16.0;
        let v = kl_with_normalizer(&d, 1, 2.0, support_norm);
        assert!(v.abs() < 1e-12, "got {v}");
    }

    #[test]
    fn kl_rejects_bad_alpha() {
        let d = dist(&[(1, 1), (2, 1)]);
        assert!(matches!(
            kl_divergence(&d, 1, 1.0),
            Err(DegreeError::AlphaOutOfRange(_))
        ));
        assert!(matches!(
            kl_divergence(&d, 1, f64::NAN),
            Err(DegreeError::AlphaOutOfRange(_))
        ));
    }

    #[test]
    fn fit_alpha_errors_on_degenerate_tails() {
        let d = dist(&[(3, 10)]);
        assert!(matches!(fit_alpha(&d, 1), Err(DegreeError::DegenerateTail(1))));
        assert!(matches!(fit_alpha(&d, 4), Err(DegreeError::EmptyTail(4))));
    }

    #[test]
    fn fit_alpha_is_a_local_minimum() {
        let d = dist(&[(2, 50), (3, 20), (5, 8), (9, 2), (20, 1)]);
        let fit = fit_alpha(&d, 2).unwrap();
        let kl = |a: f64| kl_with_normalizer(&d, 2, a, zeta_tail(a, 2));
        assert!(kl(fit.alpha - 1e-3) >= fit.kl_value - 1e-12);
        assert!(kl(fit.alpha + 1e-3) >= fit.kl_value - 1e-12);
    }

    #[test]
    fn k0_scan_flags_single_support() {
        let d = dist(&[(4, 9)]);
        let scan = k0_scan(&d);
        assert_eq!(scan.len(), 4);
        assert!(scan.iter().all(|e| e.flag == Some(ScanFlag::DegenerateTail)));
    }

    #[test]
    fn hill_paper_formula_fixtures() {
        let d = dist(&[(8, 1), (4, 1), (2, 1), (1, 1)]);
        let h4 = hill_estimator(&d, 4).unwrap();
        assert!((h4.alpha_paper - 4.0 / 15.0).abs() < 1e-15);
        let h2 = hill_estimator(&d, 2).unwrap();
        assert!((h2.alpha_paper - 2.0 / 3.0).abs() < 1e-15);
        // all top-m equal → every ratio 1
        let flat = dist(&[(7, 5)]);
        let h = hill_estimator(&flat, 3).unwrap();
        assert!((h.alpha_paper - 1.0).abs() < 1e-15);
        assert!(h.alpha_log.is_infinite());
    }

    #[test]
    fn hill_rejects_bad_m() {
        let d = dist(&[(2, 2)]);
        assert!(matches!(hill_estimator(&d, 0), Err(DegreeError::BadM { .. })));
        assert!(matches!(hill_estimator(&d, 3), Err(DegreeError::BadM { .. })));
    }

    #[test]
    fn hill_is_scale_free_in_degrees() {
        let base = dist(&[(8, 1), (4, 2), (2, 3), (1, 6)]);
        let scaled = dist(&[(24, 1), (12, 2), (6, 3), (3, 6)]);
        for m in 1..=12 {
            let a = hill_estimator(&base, m).unwrap().alpha_paper;
            let b = hill_estimator(&scaled, m).unwrap().alpha_paper;
            assert!((a - b).abs() < 1e-12, "m={m}: {a} vs {b}");
        }
    }

    #[test]
    fn hill_scan_matches_pointwise_and_starts_at_one() {
        let d = dist(&[(9, 2), (5, 3), (3, 1), (1, 4)]);
        let scan = hill_scan(&d);
        assert_eq!(scan.len(), 10);
        assert!((scan[0].alpha_paper - 1.0).abs() < 1e-15);
        for e in &scan {
            let direct = hill_estimator(&d, e.m).unwrap();
            assert!((e.alpha_paper - direct.alpha_paper).abs() < 1e-12);
            assert_eq!(e.alpha_log.is_finite(), direct.alpha_log.is_finite());
            if e.alpha_log.is_finite() {
                assert!((e.alpha_log - direct.alpha_log).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn joint_star_correlation_is_minus_one() {
        let g = ContactGraph::synthetic(4, &[(0, 1), (0, 2), (0, 3)]);
        let t = joint_degree_analysis(&g).unwrap();
        assert!((t.correlation + 1.0).abs() < 1e-12);
        // symmetric cells
        assert_eq!(t.cells[&(3, 1)], 3);
        assert_eq!(t.cells[&(1, 3)], 3);
    }

    #[test]
    fn joint_regular_graph_has_zero_variance() {
        let square = ContactGraph::synthetic(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(matches!(
            joint_degree_analysis(&square),
            Err(DegreeError::ZeroVariance)
        ));
    }

    #[test]
    fn joint_table_is_symmetric() {
        let g = ContactGraph::synthetic(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5)]);
        let t = joint_degree_analysis(&g).unwrap();
        for (&(a, b), &c) in &t.cells {
            assert_eq!(t.cells[&(b, a)], c);
        }
        assert!(t.correlation >= -1.0 && t.correlation <= 1.0);
        assert!(t.chi2.pvalue >= 0.0 && t.chi2.pvalue <= 1.0);
    }
}

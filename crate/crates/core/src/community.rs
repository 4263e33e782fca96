//! Connectivity-constrained maximal-modularity clustering with automatic
//! cluster count, quotient-graph construction, resolution-limit annotation,
//! recursive sub-clustering gated by a configuration-model null, and
//! per-cluster covariate atypicality.

use std::collections::{BTreeMap, BinaryHeap};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::ContactGraph;
use crate::io::Orientation;
use crate::mixing::{self, CovariatePartition, HomogeneityResult, MixingError};
use crate::nullmodel::{self, SwapChainConfig};
use crate::rng::substream;

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("covariate `{0}` is missing for every vertex")]
    MissingCovariate(&'static str),
    #[error(transparent)]
    Mixing(#[from] MixingError),
}

/// A clustering of the vertex set. Every cluster is internally connected;
/// indices are dense 0..J−1 in order of first appearance by vertex index.
#[derive(Debug, Clone, Serialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub j: usize,
    pub q: f64,
}

impl Partition {
    /// Member vertex indices of one cluster, ascending.
    pub fn members(&self, cluster: usize) -> Vec<u32> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(v, _)| v as u32)
            .collect()
    }

    pub fn as_covariate_partition(&self) -> CovariatePartition {
        CovariatePartition::new(
            (0..self.j).map(|c| format!("{c}")).collect(),
            self.assignment.clone(),
        )
    }
}

/// Modularity of an assignment, computed through the mixing-matrix path so
/// the clustering and mixing modules can never disagree.
pub fn partition_modularity(g: &ContactGraph, assignment: &[usize], j: usize) -> f64 {
    let p = CovariatePartition::new((0..j).map(|c| format!("{c}")).collect(), assignment.to_vec());
    let mm = mixing::mixing_matrix(g, &p).expect("non-empty graph with full assignment");
    mixing::modularity(&mm)
}

const REFINE_MIN_GAIN: f64 = 1e-12;

/// Greedy agglomerative modularity maximization restricted to edge-adjacent
/// merges, followed by a local-move refinement that rejects moves
/// disconnecting their source cluster. Deterministic for a given
/// (graph, seed); the seed permutes the initial vertex ordering.
pub fn greedy_modularity(g: &ContactGraph, seed: u64) -> Result<Partition, CommunityError> {
    let n = g.n();
    let m = g.m();
    if m == 0 {
        return Err(CommunityError::EmptyGraph);
    }

    // permuted labels: position in `perm` is the working index
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(&mut substream(seed, &[0x6d65_7267]));
    let mut pos = vec![0u32; n];
    for (i, &v) in perm.iter().enumerate() {
        pos[v as usize] = i as u32;
    }

    let two_m = 2.0 * m as f64;
    // cluster state in permuted space; cluster ids start as vertex labels
    let mut alive = vec![true; n];
    let mut stamp = vec![0u64; n];
    let mut row_sum: Vec<f64> = vec![0.0; n];
    let mut weights: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for &(s, d, _) in g.edges() {
        let a = pos[s as usize] as usize;
        let b = pos[d as usize] as usize;
        *weights[a].entry(b).or_insert(0.0) += 1.0 / two_m;
        *weights[b].entry(a).or_insert(0.0) += 1.0 / two_m;
        row_sum[a] += 1.0 / two_m;
        row_sum[b] += 1.0 / two_m;
    }

    #[derive(PartialEq)]
    struct Cand {
        dq: f64,
        i: usize,
        j: usize,
        si: u64,
        sj: u64,
    }
    impl Eq for Cand {}
    impl Ord for Cand {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // max-heap: largest gain first, ties to the smallest (i, j)
            self.dq
                .total_cmp(&other.dq)
                .then_with(|| other.i.cmp(&self.i))
                .then_with(|| other.j.cmp(&self.j))
        }
    }
    impl PartialOrd for Cand {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut heap = BinaryHeap::new();
    for i in 0..n {
        for (&j, &w) in &weights[i] {
            if i < j {
                heap.push(Cand {
                    dq: 2.0 * (w - row_sum[i] * row_sum[j]),
                    i,
                    j,
                    si: 0,
                    sj: 0,
                });
            }
        }
    }

    let mut cluster_of: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();

    while let Some(c) = heap.pop() {
        if !alive[c.i] || !alive[c.j] || stamp[c.i] != c.si || stamp[c.j] != c.sj {
            continue;
        }
        if c.dq <= 0.0 {
            break;
        }
        let (keep, gone) = (c.i, c.j);
        // merge `gone` into `keep`
        row_sum[keep] += row_sum[gone];
        alive[gone] = false;
        stamp[keep] += 1;
        stamp[gone] += 1;
        let gone_members = std::mem::take(&mut members[gone]);
        for &v in &gone_members {
            cluster_of[v] = keep;
        }
        members[keep].extend(gone_members);

        let gone_weights = std::mem::take(&mut weights[gone]);
        weights[keep].remove(&gone);
        for (k, w) in gone_weights {
            if k == keep {
                continue;
            }
            *weights[keep].entry(k).or_insert(0.0) += w;
            let wk = &mut weights[k];
            wk.remove(&gone);
            *wk.entry(keep).or_insert(0.0) += w;
        }
        for (&k, &w) in &weights[keep] {
            let (lo, hi) = (keep.min(k), keep.max(k));
            heap.push(Cand {
                dq: 2.0 * (w - row_sum[keep] * row_sum[k]),
                i: lo,
                j: hi,
                si: stamp[lo],
                sj: stamp[hi],
            });
        }
    }

    // vertex-level assignment in permuted space
    let mut assignment: Vec<usize> = (0..n).map(|i| cluster_of[i]).collect();
    refine_local_moves(g, &perm, &pos, &mut assignment, m);

    // map back to original labels and canonicalize cluster ids by first
    // appearance in vertex order
    let mut raw = vec![usize::MAX; n];
    for v in 0..n {
        raw[v] = assignment[pos[v] as usize];
    }
    let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
    let mut canonical = vec![0usize; n];
    for v in 0..n {
        let next = relabel.len();
        let id = *relabel.entry(raw[v]).or_insert(next);
        canonical[v] = id;
    }
    let j = relabel.len();
    let q = partition_modularity(g, &canonical, j);
    Ok(Partition {
        assignment: canonical,
        j,
        q,
    })
}

/// Single-vertex reassignment sweeps in permuted order; a move is applied
/// when it improves Q by more than `REFINE_MIN_GAIN`, targets an adjacent
/// cluster, and leaves the source cluster connected.
fn refine_local_moves(
    g: &ContactGraph,
    perm: &[u32],
    pos: &[u32],
    assignment: &mut [usize],
    m: usize,
) {
    let n = g.n();
    let mf = m as f64;
    let mut degree_sum: BTreeMap<usize, f64> = BTreeMap::new();
    let mut size: BTreeMap<usize, usize> = BTreeMap::new();
    for w in 0..n {
        let c = assignment[w];
        *degree_sum.entry(c).or_insert(0.0) += g.degree(perm[w]) as f64;
        *size.entry(c).or_insert(0) += 1;
    }

    loop {
        let mut moved = false;
        for w in 0..n {
            let v = perm[w];
            let home = assignment[w];
            let deg_v = g.degree(v) as f64;
            // edges from v into each adjacent cluster
            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            for &u in g.neighbors(v) {
                *links.entry(assignment[pos[u as usize] as usize]).or_insert(0.0) += 1.0;
            }
            let d_home = links.get(&home).copied().unwrap_or(0.0);
            let ds_home = degree_sum[&home];
            let mut best: Option<(f64, usize)> = None;
            for (&target, &d_target) in &links {
                if target == home {
                    continue;
                }
                let ds_target = degree_sum[&target];
                let dq = (d_target - d_home) / mf
                    - deg_v * (ds_target - ds_home + deg_v) / (2.0 * mf * mf);
                if dq > REFINE_MIN_GAIN
                    && best.map_or(true, |(bq, bt)| dq > bq || (dq == bq && target < bt))
                {
                    best = Some((dq, target));
                }
            }
            let Some((_, target)) = best else { continue };
            if size[&home] > 1 && !connected_without(g, perm, pos, assignment, home, w) {
                continue;
            }
            assignment[w] = target;
            *degree_sum.get_mut(&home).unwrap() -= deg_v;
            *degree_sum.get_mut(&target).unwrap() += deg_v;
            let sh = size.get_mut(&home).unwrap();
            *sh -= 1;
            if *sh == 0 {
                size.remove(&home);
                degree_sum.remove(&home);
            }
            *size.get_mut(&target).unwrap() += 1;
            moved = true;
        }
        if !moved {
            break;
        }
    }
}

/// Is cluster `c` still connected after removing working-index `skip`?
fn connected_without(
    g: &ContactGraph,
    perm: &[u32],
    pos: &[u32],
    assignment: &[usize],
    c: usize,
    skip: usize,
) -> bool {
    let members: Vec<usize> = (0..assignment.len())
        .filter(|&w| assignment[w] == c && w != skip)
        .collect();
    if members.len() <= 1 {
        return true;
    }
    let mut seen: BTreeMap<usize, bool> = members.iter().map(|&w| (w, false)).collect();
    let mut stack = vec![members[0]];
    *seen.get_mut(&members[0]).unwrap() = true;
    let mut visited = 1;
    while let Some(w) = stack.pop() {
        for &u in g.neighbors(perm[w]) {
            let uw = pos[u as usize] as usize;
            if let Some(flag) = seen.get_mut(&uw) {
                if !*flag {
                    *flag = true;
                    visited += 1;
                    stack.push(uw);
                }
            }
        }
    }
    visited == members.len()
}

/// Best-of-R restarts of [`greedy_modularity`]; ties resolve to the lowest
/// restart index. Restarts run in parallel on independent derived streams.
pub fn greedy_modularity_multistart(
    g: &ContactGraph,
    seed: u64,
    restarts: u32,
) -> Result<Partition, CommunityError> {
    if restarts == 0 {
        return Err(CommunityError::EmptyGraph);
    }
    let runs: Vec<Result<Partition, CommunityError>> = (0..restarts)
        .into_par_iter()
        .map(|r| greedy_modularity(g, crate::rng::derive(seed, &[0x7265_7374, r as u64])))
        .collect();
    let mut best: Option<Partition> = None;
    for run in runs {
        let p = run?;
        if best.as_ref().map_or(true, |b| p.q > b.q) {
            best = Some(p);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Quotient-graph node: one cluster with its size, internal edge count and
/// orientation tallies (pie-chart data).
#[derive(Debug, Clone, Serialize)]
pub struct ClusterNode {
    pub size: u64,
    pub intra_edges: u64,
    pub orientation_counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClusterLink {
    pub a: usize,
    pub b: usize,
    pub multiplicity: u64,
}

/// Quotient graph of a partition: nodes carry covariate tallies, links carry
/// exact inter-cluster edge multiplicities.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterGraph {
    pub nodes: Vec<ClusterNode>,
    pub links: Vec<ClusterLink>,
}

impl ClusterGraph {
    pub fn inter_cluster_edges(&self) -> u64 {
        self.links.iter().map(|l| l.multiplicity).sum()
    }
}

pub fn cluster_graph(g: &ContactGraph, p: &Partition) -> ClusterGraph {
    let mut nodes: Vec<ClusterNode> = (0..p.j)
        .map(|_| ClusterNode {
            size: 0,
            intra_edges: 0,
            orientation_counts: BTreeMap::new(),
        })
        .collect();
    for (v, &c) in p.assignment.iter().enumerate() {
        nodes[c].size += 1;
        *nodes[c]
            .orientation_counts
            .entry(g.vertex(v as u32).orientation.code().to_string())
            .or_insert(0) += 1;
    }
    let mut link_map: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for &(s, d, _) in g.edges() {
        let a = p.assignment[s as usize];
        let b = p.assignment[d as usize];
        if a == b {
            nodes[a].intra_edges += 1;
        } else {
            *link_map.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let links = link_map
        .into_iter()
        .map(|((a, b), multiplicity)| ClusterLink { a, b, multiplicity })
        .collect();
    ClusterGraph { nodes, links }
}

/// Resolution limit of modularity maximization: √(2m). Clusters with fewer
/// internal edges cannot be ruled out as unresolved substructure.
pub fn resolution_limit(m: u64) -> f64 {
    (2.0 * m as f64).sqrt()
}

/// Sub-structure verdict for one cluster.
#[derive(Debug, Clone, Serialize)]
pub struct SubclusterReport {
    pub parent_cluster: usize,
    pub subpartition: Option<Partition>,
    pub null_mean: f64,
    pub null_max: f64,
    pub significant: bool,
    /// Cluster edge count is under √(2m) of the parent graph.
    pub below_resolution: bool,
}

/// Tests every cluster for sub-structure: rerun the clustering on the
/// induced subgraph and compare its modularity against the maximum over
/// degree-matched rewired replicates. One recursion level only.
pub fn recursive_subclustering(
    g: &ContactGraph,
    p: &Partition,
    null_replicates: u32,
    seed: u64,
) -> Vec<SubclusterReport> {
    let limit = resolution_limit(g.m() as u64);
    (0..p.j)
        .into_par_iter()
        .map(|c| {
            let members = p.members(c);
            let sub = g.induced_subgraph(&members);
            let m_c = sub.m();
            let below_resolution = (m_c as f64) < limit;
            if m_c == 0 {
                return SubclusterReport {
                    parent_cluster: c,
                    subpartition: None,
                    null_mean: f64::NAN,
                    null_max: f64::NAN,
                    significant: false,
                    below_resolution,
                };
            }
            let subpartition =
                greedy_modularity(&sub, crate::rng::derive(seed, &[0x7375_62, c as u64, 1]))
                    .expect("cluster subgraph has edges");
            if m_c < 2 {
                return SubclusterReport {
                    parent_cluster: c,
                    subpartition: Some(subpartition),
                    null_mean: f64::NAN,
                    null_max: f64::NAN,
                    significant: false,
                    below_resolution,
                };
            }
            let cfg = SwapChainConfig::defaults(
                m_c,
                null_replicates,
                crate::rng::derive(seed, &[0x7375_62, c as u64, 2]),
            );
            let nd = nullmodel::null_modularity(&sub, &cfg).expect("m_c >= 2");
            let significant = subpartition.q > nd.max;
            SubclusterReport {
                parent_cluster: c,
                subpartition: Some(subpartition),
                null_mean: nd.mean,
                null_max: nd.max,
                significant,
                below_resolution,
            }
        })
        .collect()
}

/// Group label of a cluster after the homogeneity screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClusterGroup {
    /// Homogeneity p ≥ 0.05: covariate mix matches the component.
    Typical,
    /// Atypical with MSM share above the component share.
    MsmGroup,
    /// Atypical with MSM share at or below the component share.
    MixedGroup,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterAtypicality {
    pub cluster: usize,
    pub homogeneity: HomogeneityResult,
    pub group: ClusterGroup,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtypicalityReport {
    pub categories: Vec<String>,
    pub reference: Vec<f64>,
    pub msm_reference_share: f64,
    pub clusters: Vec<ClusterAtypicality>,
}

/// Per-cluster χ² homogeneity of the orientation mix against the
/// whole-graph distribution. Clusters with p < 0.05 (strict) are atypical
/// and split into MSM-dominated vs mixed by their MSM share.
pub fn atypicality_report(
    g: &ContactGraph,
    p: &Partition,
) -> Result<AtypicalityReport, CommunityError> {
    if g.vertices().iter().all(|v| v.orientation == Orientation::Unknown) {
        return Err(CommunityError::MissingCovariate("orientation"));
    }
    let categories: Vec<String> = Orientation::ALL.iter().map(|o| o.code().to_string()).collect();
    let idx_of = |o: Orientation| Orientation::ALL.iter().position(|&x| x == o).unwrap();
    let n = g.n() as f64;
    let mut totals = vec![0u64; categories.len()];
    for v in g.vertices() {
        totals[idx_of(v.orientation)] += 1;
    }
    let reference: Vec<f64> = totals.iter().map(|&c| c as f64 / n).collect();
    let msm_reference_share = totals[idx_of(Orientation::Msm)] as f64 / n;

    let mut clusters = Vec::with_capacity(p.j);
    for c in 0..p.j {
        let mut observed = vec![0u64; categories.len()];
        let mut size = 0u64;
        for (v, &cl) in p.assignment.iter().enumerate() {
            if cl == c {
                observed[idx_of(g.vertex(v as u32).orientation)] += 1;
                size += 1;
            }
        }
        let homogeneity = mixing::homogeneity_test(&observed, &reference)?;
        let group = if homogeneity.pvalue < 0.05 {
            let msm_share = observed[idx_of(Orientation::Msm)] as f64 / size as f64;
            if msm_share > msm_reference_share {
                ClusterGroup::MsmGroup
            } else {
                ClusterGroup::MixedGroup
            }
        } else {
            ClusterGroup::Typical
        };
        clusters.push(ClusterAtypicality {
            cluster: c,
            homogeneity,
            group,
        });
    }
    Ok(AtypicalityReport {
        categories,
        reference,
        msm_reference_share,
        clusters,
    })
}

/// Edge bookkeeping between the two atypical cluster groups and the rest.
#[derive(Debug, Clone, Serialize)]
pub struct GroupConnectivity {
    pub msm_clusters: u64,
    pub msm_persons: u64,
    pub mixed_clusters: u64,
    pub mixed_persons: u64,
    /// Edges with both endpoints in MSM-group clusters (intra + inter).
    pub msm_internal: u64,
    pub mixed_internal: u64,
    /// Within-group edges joining two distinct clusters.
    pub msm_between_clusters: u64,
    pub mixed_between_clusters: u64,
    /// Edges joining the MSM group to the mixed group.
    pub between_groups: u64,
    pub msm_to_typical: u64,
    pub mixed_to_typical: u64,
}

pub fn group_connectivity(
    g: &ContactGraph,
    p: &Partition,
    groups: &[ClusterGroup],
) -> GroupConnectivity {
    let mut out = GroupConnectivity {
        msm_clusters: 0,
        msm_persons: 0,
        mixed_clusters: 0,
        mixed_persons: 0,
        msm_internal: 0,
        mixed_internal: 0,
        msm_between_clusters: 0,
        mixed_between_clusters: 0,
        between_groups: 0,
        msm_to_typical: 0,
        mixed_to_typical: 0,
    };
    for (c, &grp) in groups.iter().enumerate() {
        let size = p.assignment.iter().filter(|&&x| x == c).count() as u64;
        match grp {
            ClusterGroup::MsmGroup => {
                out.msm_clusters += 1;
                out.msm_persons += size;
            }
            ClusterGroup::MixedGroup => {
                out.mixed_clusters += 1;
                out.mixed_persons += size;
            }
            ClusterGroup::Typical => {}
        }
    }
    for &(s, d, _) in g.edges() {
        let (ca, cb) = (p.assignment[s as usize], p.assignment[d as usize]);
        match (groups[ca], groups[cb]) {
            (ClusterGroup::MsmGroup, ClusterGroup::MsmGroup) => {
                out.msm_internal += 1;
                if ca != cb {
                    out.msm_between_clusters += 1;
                }
            }
            (ClusterGroup::MixedGroup, ClusterGroup::MixedGroup) => {
                out.mixed_internal += 1;
                if ca != cb {
                    out.mixed_between_clusters += 1;
                }
            }
            (ClusterGroup::MsmGroup, ClusterGroup::MixedGroup)
            | (ClusterGroup::MixedGroup, ClusterGroup::MsmGroup) => out.between_groups += 1,
            (ClusterGroup::MsmGroup, ClusterGroup::Typical)
            | (ClusterGroup::Typical, ClusterGroup::MsmGroup) => out.msm_to_typical += 1,
            (ClusterGroup::MixedGroup, ClusterGroup::Typical)
            | (ClusterGroup::Typical, ClusterGroup::MixedGroup) => out.mixed_to_typical += 1,
            (ClusterGroup::Typical, ClusterGroup::Typical) => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles_bridge() -> ContactGraph {
        ContactGraph::synthetic(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    }

    #[test]
    fn recovers_bridged_triangles_exactly() {
        let g = two_triangles_bridge();
        for seed in 0..6 {
            let p = greedy_modularity(&g, seed).unwrap();
            assert_eq!(p.j, 2, "seed {seed}");
            assert!((p.q - 5.0 / 14.0).abs() < 1e-12, "seed {seed}: q={}", p.q);
            assert_eq!(p.assignment[0], p.assignment[1]);
            assert_eq!(p.assignment[1], p.assignment[2]);
            assert_eq!(p.assignment[3], p.assignment[4]);
            assert_eq!(p.assignment[4], p.assignment[5]);
            assert_ne!(p.assignment[0], p.assignment[3]);
        }
    }

    #[test]
    fn single_edge_collapses_to_one_cluster() {
        let g = ContactGraph::synthetic(2, &[(0, 1)]);
        let p = greedy_modularity(&g, 3).unwrap();
        assert_eq!(p.j, 1);
        assert!(p.q.abs() < 1e-15);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = ContactGraph::synthetic(3, &[]);
        assert!(matches!(
            greedy_modularity(&g, 0),
            Err(CommunityError::EmptyGraph)
        ));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = two_triangles_bridge();
        let a = greedy_modularity(&g, 17).unwrap();
        let b = greedy_modularity(&g, 17).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.q, b.q);
    }

    #[test]
    fn q_matches_mixing_matrix_path() {
        let g = ContactGraph::synthetic(
            7,
            &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 6)],
        );
        let p = greedy_modularity(&g, 5).unwrap();
        let q = partition_modularity(&g, &p.assignment, p.j);
        assert!((p.q - q).abs() < 1e-12);
    }

    #[test]
    fn clusters_are_connected() {
        let g = ContactGraph::synthetic(
            10,
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3), (6, 7), (8, 9), (7, 8)],
        );
        let p = greedy_modularity(&g, 11).unwrap();
        for c in 0..p.j {
            let members = p.members(c);
            let sub = g.induced_subgraph(&members);
            let idx = crate::graph::connected_components(&sub);
            assert_eq!(idx.count(), 1, "cluster {c} is disconnected");
        }
    }

    #[test]
    fn multistart_picks_best_q() {
        let g = two_triangles_bridge();
        let best = greedy_modularity_multistart(&g, 1, 4).unwrap();
        assert!((best.q - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn cluster_graph_on_fixture() {
        let g = two_triangles_bridge();
        let p = greedy_modularity(&g, 0).unwrap();
        let cg = cluster_graph(&g, &p);
        assert_eq!(cg.nodes.len(), 2);
        assert_eq!(cg.links.len(), 1);
        assert_eq!(cg.links[0].multiplicity, 1);
        assert_eq!(cg.nodes[0].intra_edges + cg.nodes[1].intra_edges, 6);
    }

    #[test]
    fn cluster_graph_single_cluster() {
        let g = ContactGraph::synthetic(3, &[(0, 1), (1, 2), (0, 2)]);
        let p = Partition {
            assignment: vec![0, 0, 0],
            j: 1,
            q: 0.0,
        };
        let cg = cluster_graph(&g, &p);
        assert_eq!(cg.nodes.len(), 1);
        assert!(cg.links.is_empty());
        assert_eq!(cg.nodes[0].intra_edges, 3);
    }

    #[test]
    fn cluster_graph_conserves_edges() {
        let g = ContactGraph::synthetic(
            8,
            &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (3, 4), (1, 6)],
        );
        let p = greedy_modularity(&g, 2).unwrap();
        let cg = cluster_graph(&g, &p);
        let intra: u64 = cg.nodes.iter().map(|n| n.intra_edges).sum();
        assert_eq!(intra + cg.inter_cluster_edges(), g.m() as u64);
    }

    #[test]
    fn resolution_limit_values() {
        assert!((resolution_limit(2) - 2.0).abs() < 1e-15);
        assert!((resolution_limit(50) - 10.0).abs() < 1e-15);
        assert!((resolution_limit(3168) - 79.598).abs() < 1e-3);
    }

    #[test]
    fn clique_has_no_significant_substructure() {
        // K5 as a single cluster of a larger graph: subclustering must not
        // report significance (any split lowers Q below the null max)
        let mut edges = Vec::new();
        for i in 0..5u32 {
            for j in (i + 1)..5 {
                edges.push((i, j));
            }
        }
        let g = ContactGraph::synthetic(5, &edges);
        let p = Partition {
            assignment: vec![0; 5],
            j: 1,
            q: 0.0,
        };
        let reports = recursive_subclustering(&g, &p, 20, 9);
        assert_eq!(reports.len(), 1);
        assert!(!reports[0].significant);
        let sub = reports[0].subpartition.as_ref().unwrap();
        assert!(sub.q <= reports[0].null_max + 1e-12);
    }

    #[test]
    fn subclustering_flags_resolution() {
        let g = two_triangles_bridge();
        let p = greedy_modularity(&g, 0).unwrap();
        let reports = recursive_subclustering(&g, &p, 5, 1);
        // both triangle clusters have 3 edges < √14 ≈ 3.74
        assert!(reports.iter().all(|r| r.below_resolution));
        // significance implies a present subpartition beating the null max
        for r in &reports {
            if r.significant {
                let sp = r.subpartition.as_ref().unwrap();
                assert!(sp.q > r.null_max);
            }
        }
    }

    fn oriented_graph(kinds: &[Orientation], edges: &[(u32, u32)]) -> ContactGraph {
        let vertices = kinds
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                let mut v = crate::io::VertexRecord::bare(format!("v{i}"));
                v.orientation = o;
                v
            })
            .collect();
        let edges = edges
            .iter()
            .map(|&(a, b)| (a, b, crate::io::NamedBy::Unknown))
            .collect();
        ContactGraph::new(vertices, edges).unwrap()
    }

    #[test]
    fn atypicality_equal_mix_is_typical() {
        use Orientation::{Msm, Woman};
        // two clusters, each half women half MSM, same as global mix
        let g = oriented_graph(
            &[Woman, Msm, Woman, Msm],
            &[(0, 1), (2, 3), (1, 2)],
        );
        let p = Partition {
            assignment: vec![0, 0, 1, 1],
            j: 2,
            q: 0.0,
        };
        let report = atypicality_report(&g, &p).unwrap();
        for c in &report.clusters {
            assert_eq!(c.group, ClusterGroup::Typical);
            assert!((c.homogeneity.pvalue - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn atypicality_threshold_is_strict() {
        let r = HomogeneityResult {
            statistic: 0.0,
            dof: 1,
            pvalue: 0.05,
            expected: vec![],
            observed: vec![],
            small_expected: false,
            mc_pvalue: None,
        };
        // the gate is p < 0.05: exactly 0.05 stays typical
        assert!(!(r.pvalue < 0.05));
    }

    #[test]
    fn atypicality_requires_orientation() {
        let g = ContactGraph::synthetic(3, &[(0, 1), (1, 2)]);
        let p = Partition {
            assignment: vec![0, 0, 0],
            j: 1,
            q: 0.0,
        };
        assert!(matches!(
            atypicality_report(&g, &p),
            Err(CommunityError::MissingCovariate(_))
        ));
    }

    #[test]
    fn group_connectivity_counts_edges() {
        use ClusterGroup::*;
        let g = ContactGraph::synthetic(
            6,
            &[(0, 1), (2, 3), (4, 5), (1, 2), (3, 4), (0, 5)],
        );
        let p = Partition {
            assignment: vec![0, 0, 1, 1, 2, 2],
            j: 3,
            q: 0.0,
        };
        let groups = [MsmGroup, MixedGroup, Typical];
        let gc = group_connectivity(&g, &p, &groups);
        assert_eq!(gc.msm_internal, 1);
        assert_eq!(gc.mixed_internal, 1);
        assert_eq!(gc.between_groups, 1);
        assert_eq!(gc.mixed_to_typical, 1);
        assert_eq!(gc.msm_to_typical, 1);
        assert_eq!(gc.msm_persons, 2);
        assert_eq!(gc.mixed_persons, 2);
    }
}

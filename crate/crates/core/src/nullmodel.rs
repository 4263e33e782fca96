//! Degree-preserving random graphs via double-edge-swap MCMC, and the null
//! distribution of maximal modularity used to gate community significance.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::community::greedy_modularity;
use crate::graph::ContactGraph;
use crate::io::NamedBy;
use crate::rng::{derive, substream};

#[derive(Debug, Error)]
pub enum NullModelError {
    #[error("rewiring needs at least two edges (got {0})")]
    TooFewEdges(usize),
    #[error("invalid chain config: {0}")]
    BadConfig(&'static str),
}

/// Swap-chain parameters. Swap counts are attempted proposals, so chain
/// length does not depend on the rejection rate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SwapChainConfig {
    pub burn_in_swaps: u64,
    pub thinning_swaps: u64,
    pub replicates: u32,
    pub seed: u64,
}

impl SwapChainConfig {
    /// Standard mixing heuristics: burn-in 20·m, thinning 5·m.
    pub fn defaults(m: usize, replicates: u32, seed: u64) -> Self {
        SwapChainConfig {
            burn_in_swaps: 20 * m as u64,
            thinning_swaps: 5 * m as u64,
            replicates,
            seed,
        }
    }

    fn validate(&self) -> Result<(), NullModelError> {
        if self.burn_in_swaps == 0 || self.thinning_swaps == 0 || self.replicates == 0 {
            return Err(NullModelError::BadConfig(
                "burn_in_swaps, thinning_swaps and replicates must be positive",
            ));
        }
        Ok(())
    }
}

/// Attempts `swaps` double-edge swaps on an edge list: pick two distinct
/// edges (a,b),(c,d) uniformly, propose (a,c),(b,d) or (a,d),(b,c) with equal
/// probability, reject any proposal creating a self-loop or duplicate edge.
/// Preserves every vertex degree.
pub(crate) fn swap_edges<R: Rng>(
    edges: &mut [(u32, u32)],
    edge_set: &mut HashSet<(u32, u32)>,
    swaps: u64,
    rng: &mut R,
) {
    let m = edges.len();
    let key = |a: u32, b: u32| (a.min(b), a.max(b));
    for _ in 0..swaps {
        let e1 = rng.gen_range(0..m);
        let e2 = rng.gen_range(0..m);
        if e1 == e2 {
            continue;
        }
        let (a, b) = edges[e1];
        let (c, d) = edges[e2];
        // pairing 0: (a,c),(b,d); pairing 1: (a,d),(b,c)
        let (n1, n2) = if rng.gen::<bool>() {
            ((a, d), (b, c))
        } else {
            ((a, c), (b, d))
        };
        if n1.0 == n1.1 || n2.0 == n2.1 {
            continue;
        }
        let k1 = key(n1.0, n1.1);
        let k2 = key(n2.0, n2.1);
        if k1 == k2 || edge_set.contains(&k1) || edge_set.contains(&k2) {
            continue;
        }
        edge_set.remove(&key(a, b));
        edge_set.remove(&key(c, d));
        edge_set.insert(k1);
        edge_set.insert(k2);
        edges[e1] = n1;
        edges[e2] = n2;
    }
}

/// Degree-matched random graph: the configuration-model sampler. Covariates
/// carry over unchanged; rewired edges lose their naming direction.
pub fn rewire(g: &ContactGraph, swaps: u64, seed: u64) -> Result<ContactGraph, NullModelError> {
    if g.m() < 2 {
        return Err(NullModelError::TooFewEdges(g.m()));
    }
    let mut edges: Vec<(u32, u32)> = g.edges().iter().map(|&(s, d, _)| (s, d)).collect();
    let mut edge_set: HashSet<(u32, u32)> =
        edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut rng = substream(seed, &[0x7377_6170]);
    swap_edges(&mut edges, &mut edge_set, swaps, &mut rng);
    let rewired = g
        .with_edges(edges.into_iter().map(|(a, b)| (a, b, NamedBy::Unknown)).collect())
        .expect("swap moves preserve simplicity");
    Ok(rewired)
}

/// Sampled maximal modularities of degree-matched random graphs.
#[derive(Debug, Clone, Serialize)]
pub struct NullModularityDistribution {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub max: f64,
}

/// For each replicate r (1-based): rewire a fresh copy with
/// burn_in + r·thinning attempted swaps on an independent stream, run the
/// greedy clustering, and record its modularity.
pub fn null_modularity(
    g: &ContactGraph,
    cfg: &SwapChainConfig,
) -> Result<NullModularityDistribution, NullModelError> {
    cfg.validate()?;
    if g.m() < 2 {
        return Err(NullModelError::TooFewEdges(g.m()));
    }
    let samples: Vec<f64> = (1..=cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let swaps = cfg.burn_in_swaps + r * cfg.thinning_swaps;
            let rewired = rewire(g, swaps, derive(cfg.seed, &[0x7265_70, r]))
                .expect("edge count checked above");
            greedy_modularity(&rewired, derive(cfg.seed, &[0x6772_65, r]))
                .expect("rewired graph keeps its edges")
                .q
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(NullModularityDistribution { samples, mean, max })
}

/// Verdict of the observed modularity against the null distribution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignificanceVerdict {
    /// Observed Q strictly exceeds the null maximum.
    pub significant: bool,
    /// Fraction of null samples at or above the observed Q.
    pub exceedance: f64,
}

pub fn significance(observed_q: f64, nd: &NullModularityDistribution) -> SignificanceVerdict {
    let at_least = nd.samples.iter().filter(|&&q| q >= observed_q).count();
    SignificanceVerdict {
        significant: observed_q > nd.max,
        exceedance: at_least as f64 / nd.samples.len() as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degree_multiset(g: &ContactGraph) -> Vec<usize> {
        let mut d: Vec<usize> = (0..g.n() as u32).map(|v| g.degree(v)).collect();
        d.sort_unstable();
        d
    }

    #[test]
    fn forced_swap_on_two_disjoint_edges() {
        let g = ContactGraph::synthetic(4, &[(0, 1), (2, 3)]);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..40 {
            let r = rewire(&g, 50, seed).unwrap();
            let mut pairs: Vec<(u32, u32)> = r
                .edges()
                .iter()
                .map(|&(a, b, _)| (a.min(b), a.max(b)))
                .collect();
            pairs.sort_unstable();
            seen.insert(pairs);
        }
        // the only degree-matched simple graphs on this sequence
        let valid: std::collections::BTreeSet<Vec<(u32, u32)>> = [
            vec![(0, 1), (2, 3)],
            vec![(0, 2), (1, 3)],
            vec![(0, 3), (1, 2)],
        ]
        .into_iter()
        .collect();
        assert!(seen.iter().all(|s| valid.contains(s)));
        assert!(seen.len() > 1, "chain never moved");
    }

    #[test]
    fn rewire_preserves_degrees_and_simplicity() {
        let g = ContactGraph::synthetic(
            8,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 7), (1, 5), (2, 6)],
        );
        let before = degree_multiset(&g);
        for seed in 0..10 {
            let r = rewire(&g, 200, seed).unwrap();
            assert_eq!(degree_multiset(&r), before);
            assert_eq!(r.m(), g.m());
        }
    }

    #[test]
    fn triangle_is_invariant_under_swaps() {
        let g = ContactGraph::synthetic(3, &[(0, 1), (1, 2), (0, 2)]);
        let r = rewire(&g, 1000, 5).unwrap();
        let mut pairs: Vec<(u32, u32)> = r
            .edges()
            .iter()
            .map(|&(a, b, _)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn star_chain_never_moves_all_samples_equal() {
        let star = ContactGraph::synthetic(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let cfg = SwapChainConfig::defaults(star.m(), 6, 3);
        let nd = null_modularity(&star, &cfg).unwrap();
        assert!(nd.samples.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(nd.mean, nd.max);
    }

    #[test]
    fn rewire_needs_two_edges() {
        let g = ContactGraph::synthetic(2, &[(0, 1)]);
        assert!(matches!(rewire(&g, 10, 0), Err(NullModelError::TooFewEdges(1))));
    }

    #[test]
    fn null_modularity_is_reproducible() {
        let g = ContactGraph::synthetic(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        );
        let cfg = SwapChainConfig::defaults(g.m(), 8, 21);
        let a = null_modularity(&g, &cfg).unwrap();
        let b = null_modularity(&g, &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert!(a.mean <= a.max + 1e-15);
    }

    #[test]
    fn four_cycle_sample_within_modularity_bounds() {
        let g = ContactGraph::synthetic(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let cfg = SwapChainConfig::defaults(g.m(), 1, 2);
        let nd = null_modularity(&g, &cfg).unwrap();
        assert_eq!(nd.samples.len(), 1);
        assert!(nd.samples[0] >= -0.5 && nd.samples[0] <= 0.5);
    }

    #[test]
    fn significance_verdicts() {
        let nd = NullModularityDistribution {
            samples: vec![0.70, 0.72, 0.7435],
            mean: 0.721,
            max: 0.7435,
        };
        let v = significance(0.8522, &nd);
        assert!(v.significant);
        assert_eq!(v.exceedance, 0.0);
        // equal to the max: strict inequality fails
        let v = significance(0.7435, &nd);
        assert!(!v.significant);
        assert!((v.exceedance - 1.0 / 3.0).abs() < 1e-15);
        // below the whole distribution
        let v = significance(0.5, &nd);
        assert!(!v.significant);
        assert_eq!(v.exceedance, 1.0);
    }

    #[test]
    fn bad_config_is_rejected() {
        let g = ContactGraph::synthetic(4, &[(0, 1), (2, 3)]);
        let cfg = SwapChainConfig {
            burn_in_swaps: 10,
            thinning_swaps: 5,
            replicates: 0,
            seed: 0,
        };
        assert!(matches!(
            null_modularity(&g, &cfg),
            Err(NullModelError::BadConfig(_))
        ));
    }
}

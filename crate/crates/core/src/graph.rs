//! Immutable contact graph and structural algorithms: components, geodesics,
//! articulation points, transitivity, maximal cliques.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::io::{NamedBy, VertexRecord};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on vertex index {v}")]
    SelfLoop { v: u32 },
    #[error("duplicate edge {a}-{b}")]
    DuplicateEdge { a: u32, b: u32 },
    #[error("edge endpoint {v} out of range (n = {n})")]
    BadEndpoint { v: u32, n: usize },
}

#[derive(Debug, Error)]
#[error("operation requires a non-empty graph")]
pub struct EmptyGraph;

/// Undirected simple graph over [`VertexRecord`]s with optional per-edge
/// naming orientation.
///
/// Immutable after construction; adjacency lists are sorted, so neighbor
/// iteration order is deterministic everywhere.
#[derive(Debug, Clone)]
pub struct ContactGraph {
    vertices: Vec<VertexRecord>,
    adjacency: Vec<Vec<u32>>,
    edges: Vec<(u32, u32, NamedBy)>,
}

impl ContactGraph {
    /// Builds a graph, validating simplicity (no self-loops, no duplicate
    /// unordered pairs, endpoints in range).
    pub fn new(
        vertices: Vec<VertexRecord>,
        edges: Vec<(u32, u32, NamedBy)>,
    ) -> Result<Self, GraphError> {
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen: HashMap<(u32, u32), ()> = HashMap::with_capacity(edges.len());
        for &(s, d, _) in &edges {
            if s as usize >= n {
                return Err(GraphError::BadEndpoint { v: s, n });
            }
            if d as usize >= n {
                return Err(GraphError::BadEndpoint { v: d, n });
            }
            if s == d {
                return Err(GraphError::SelfLoop { v: s });
            }
            let key = (s.min(d), s.max(d));
            if seen.insert(key, ()).is_some() {
                return Err(GraphError::DuplicateEdge { a: key.0, b: key.1 });
            }
            adjacency[s as usize].push(d);
            adjacency[d as usize].push(s);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(ContactGraph {
            vertices,
            adjacency,
            edges,
        })
    }

    /// Test/fixture constructor: `n` bare vertices named `v0..v{n-1}` plus
    /// unoriented edges.
    pub fn synthetic(n: usize, edges: &[(u32, u32)]) -> Self {
        let vertices = (0..n).map(|i| VertexRecord::bare(format!("v{i}"))).collect();
        let edges = edges.iter().map(|&(a, b)| (a, b, NamedBy::Unknown)).collect();
        ContactGraph::new(vertices, edges).expect("synthetic fixture must be simple")
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn vertex(&self, v: u32) -> &VertexRecord {
        &self.vertices[v as usize]
    }

    pub fn vertex_id(&self, v: u32) -> &str {
        &self.vertices[v as usize].id
    }

    pub fn vertices(&self) -> &[VertexRecord] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(u32, u32, NamedBy)] {
        &self.edges
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    /// Induced subgraph on `keep` (indices into this graph), preserving
    /// vertex records and edge naming. Vertices are reindexed in the order
    /// given by `keep`.
    pub fn induced_subgraph(&self, keep: &[u32]) -> ContactGraph {
        let mut remap: HashMap<u32, u32> = HashMap::with_capacity(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            remap.insert(old, new as u32);
        }
        let vertices = keep.iter().map(|&v| self.vertices[v as usize].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|&(s, d, nb)| match (remap.get(&s), remap.get(&d)) {
                (Some(&ns), Some(&nd)) => Some((ns, nd, nb)),
                _ => None,
            })
            .collect();
        ContactGraph::new(vertices, edges).expect("induced subgraph of a simple graph is simple")
    }

    /// Same vertex set, different edges; used by the degree-preserving
    /// rewiring chain.
    pub fn with_edges(&self, edges: Vec<(u32, u32, NamedBy)>) -> Result<Self, GraphError> {
        ContactGraph::new(self.vertices.clone(), edges)
    }

    /// Out-neighbor lists under naming orientation: `Src` edges are walked
    /// src→dst, `Dst` edges dst→src, `Both`/`Unknown` both ways.
    fn oriented_out(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.n()];
        for &(s, d, nb) in &self.edges {
            match nb {
                NamedBy::Src => out[s as usize].push(d),
                NamedBy::Dst => out[d as usize].push(s),
                NamedBy::Both | NamedBy::Unknown => {
                    out[s as usize].push(d);
                    out[d as usize].push(s);
                }
            }
        }
        for list in &mut out {
            list.sort_unstable();
        }
        out
    }
}

/// Vertex-to-component labeling with component sizes sorted descending.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentIndex {
    pub component_id: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl ComponentIndex {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

/// Breadth-first component labeling; ids are assigned in order of the
/// smallest vertex index in each component.
pub fn connected_components(g: &ContactGraph) -> ComponentIndex {
    let n = g.n();
    let mut component_id = vec![usize::MAX; n];
    let mut raw_sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if component_id[start] != usize::MAX {
            continue;
        }
        let id = raw_sizes.len();
        let mut size = 0usize;
        component_id[start] = id;
        queue.push_back(start as u32);
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(v) {
                if component_id[w as usize] == usize::MAX {
                    component_id[w as usize] = id;
                    queue.push_back(w);
                }
            }
        }
        raw_sizes.push(size);
    }
    let mut sizes = raw_sizes;
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ComponentIndex { component_id, sizes }
}

/// Induced subgraph on the largest component. Ties are broken in favor of
/// the component containing the smallest vertex index, which is the first
/// one discovered by the breadth-first labeling.
pub fn giant_component(g: &ContactGraph) -> Result<ContactGraph, EmptyGraph> {
    if g.n() == 0 {
        return Err(EmptyGraph);
    }
    let idx = connected_components(g);
    let mut per_id_sizes = vec![0usize; idx.count()];
    for &c in &idx.component_id {
        per_id_sizes[c] += 1;
    }
    let best = per_id_sizes
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .expect("non-empty graph has a component");
    let keep: Vec<u32> = (0..g.n() as u32)
        .filter(|&v| idx.component_id[v as usize] == best)
        .collect();
    Ok(g.induced_subgraph(&keep))
}

/// Geodesic statistics from one breadth-first sweep per source vertex.
///
/// `mean_paper` uses the 1/(n(n+1)) normalization over reachable ordered
/// pairs including self-pairs; `mean_conventional` uses 1/(n(n−1)) over
/// reachable ordered distinct pairs. The harmonic mean counts unreachable
/// pairs as zero contribution.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicSummary {
    pub mean_paper: f64,
    pub mean_conventional: f64,
    pub harmonic_mean: f64,
    pub diameter: u32,
    pub histogram: BTreeMap<u32, u64>,
    pub reachable_ordered_pairs: u64,
}

/// Kahan-compensated accumulator; keeps parallel and sequential reductions
/// bit-identical when applied in index order.
#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// All-pairs breadth-first geodesic summary. With `oriented` set, edges are
/// traversed along their naming direction (`Both`/`Unknown` edges both ways).
pub fn geodesic_summary(g: &ContactGraph, oriented: bool) -> Result<GeodesicSummary, EmptyGraph> {
    let n = g.n();
    if n == 0 {
        return Err(EmptyGraph);
    }
    let oriented_adj;
    let adj: &[Vec<u32>] = if oriented {
        oriented_adj = g.oriented_out();
        &oriented_adj
    } else {
        &g.adjacency
    };

    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    let mut dist_sum: u64 = 0;
    let mut harmonic = Kahan::default();
    let mut diameter = 0u32;
    let mut reachable_pairs: u64 = n as u64; // self-pairs, d = 0

    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for src in 0..n as u32 {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            for &w in &adj[v as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dv + 1;
                    queue.push_back(w);
                }
            }
        }
        for (v, &d) in dist.iter().enumerate() {
            if v as u32 == src || d == u32::MAX {
                continue;
            }
            reachable_pairs += 1;
            dist_sum += d as u64;
            harmonic.add(1.0 / d as f64);
            diameter = diameter.max(d);
            *histogram.entry(d).or_insert(0) += 1;
        }
    }

    let nf = n as f64;
    let mean_paper = dist_sum as f64 / (nf * (nf + 1.0));
    let mean_conventional = if n > 1 {
        dist_sum as f64 / (nf * (nf - 1.0))
    } else {
        0.0
    };
    let harmonic_mean = if n > 1 && harmonic.sum > 0.0 {
        (nf * (nf - 1.0)) / harmonic.sum
    } else {
        f64::INFINITY
    };
    Ok(GeodesicSummary {
        mean_paper,
        mean_conventional,
        harmonic_mean,
        diameter,
        histogram,
        reachable_ordered_pairs: reachable_pairs,
    })
}

/// Articulation points: vertices whose removal increases the component
/// count. Iterative low-link computation; output sorted by vertex index.
pub fn articulation_points(g: &ContactGraph) -> Vec<u32> {
    let n = g.n();
    let mut disc = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut parent = vec![u32::MAX; n];
    let mut is_art = vec![false; n];
    let mut timer = 0u32;

    // explicit stack of (vertex, index into its adjacency list)
    let mut stack: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if disc[root as usize] != u32::MAX {
            continue;
        }
        let mut root_children = 0u32;
        disc[root as usize] = timer;
        low[root as usize] = timer;
        timer += 1;
        stack.push((root, 0));
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let adj = g.neighbors(v);
            if *next < adj.len() {
                let w = adj[*next];
                *next += 1;
                if disc[w as usize] == u32::MAX {
                    parent[w as usize] = v;
                    if v == root {
                        root_children += 1;
                    }
                    disc[w as usize] = timer;
                    low[w as usize] = timer;
                    timer += 1;
                    stack.push((w, 0));
                } else if w != parent[v as usize] {
                    low[v as usize] = low[v as usize].min(disc[w as usize]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    low[p as usize] = low[p as usize].min(low[v as usize]);
                    if p != root && low[v as usize] >= disc[p as usize] {
                        is_art[p as usize] = true;
                    }
                }
            }
        }
        if root_children > 1 {
            is_art[root as usize] = true;
        }
    }
    (0..n as u32).filter(|&v| is_art[v as usize]).collect()
}

#[derive(Debug, Error)]
#[error("graph has no connected triple (no path of length 2)")]
pub struct NoTriples;

/// Global transitivity: 3·(triangles) / (paths of length two), in [0,1].
pub fn clustering_coefficient(g: &ContactGraph) -> Result<f64, NoTriples> {
    let triples: u64 = (0..g.n() as u32)
        .map(|v| {
            let d = g.degree(v) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    if triples == 0 {
        return Err(NoTriples);
    }
    // each triangle is seen once per edge, i.e. three times in total
    let mut tri3: u64 = 0;
    for &(s, d, _) in g.edges() {
        tri3 += sorted_intersection_len(g.neighbors(s), g.neighbors(d));
    }
    Ok(tri3 as f64 / triples as f64)
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// All maximal cliques via pivoted Bron–Kerbosch. Each clique is sorted by
/// vertex index; the list is ordered by (size descending, lexicographic).
pub fn maximal_cliques(g: &ContactGraph) -> Vec<Vec<u32>> {
    let mut cliques = Vec::new();
    let p: Vec<u32> = (0..g.n() as u32).collect();
    let mut r = Vec::new();
    bron_kerbosch(g, &mut r, p, Vec::new(), &mut cliques);
    cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    cliques
}

fn bron_kerbosch(
    g: &ContactGraph,
    r: &mut Vec<u32>,
    p: Vec<u32>,
    x: Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if p.is_empty() && x.is_empty() {
        if !r.is_empty() {
            let mut clique = r.clone();
            clique.sort_unstable();
            out.push(clique);
        }
        return;
    }
    // pivot: vertex of P ∪ X maximizing |P ∩ N(u)|, smallest index on ties
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| (sorted_intersection_len(&p, g.neighbors(u)), std::cmp::Reverse(u)))
        .expect("P ∪ X non-empty");
    let mut p = p;
    let mut x = x;
    let candidates: Vec<u32> = p
        .iter()
        .copied()
        .filter(|&v| !g.has_edge(pivot, v))
        .collect();
    for v in candidates {
        let nv = g.neighbors(v);
        let new_p: Vec<u32> = p.iter().copied().filter(|&w| nv.binary_search(&w).is_ok()).collect();
        let new_x: Vec<u32> = x.iter().copied().filter(|&w| nv.binary_search(&w).is_ok()).collect();
        r.push(v);
        bron_kerbosch(g, r, new_p, new_x, out);
        r.pop();
        let pos = p.binary_search(&v).expect("v drawn from P");
        p.remove(pos);
        let ins = x.binary_search(&v).unwrap_err();
        x.insert(ins, v);
    }
}

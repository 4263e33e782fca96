//! Force-directed placement: cubic attraction along edges plus logarithmic
//! all-pairs repulsion, minimized by gradient descent with backtracking.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::ContactGraph;
use crate::rng::substream;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("vertices {a} and {b} coincide; energy is singular")]
    CoincidentVertices { a: usize, b: usize },
    #[error("graph must be connected for layout (apply per component)")]
    NotConnected,
    #[error("layout needs at least two vertices")]
    TooFewVertices,
    #[error("positions length {got} does not match vertex count {expected}")]
    BadPositions { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LayoutConfig {
    /// Target spacing parameter δ; roughly the expected average distance.
    pub delta: f64,
    pub max_iterations: u32,
    pub gradient_tolerance: f64,
    pub seed: u64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            delta: 1.0,
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexPositions {
    pub coordinates: Vec<(f64, f64)>,
    pub final_energy: f64,
    pub converged: bool,
}

const MIN_SEPARATION_FACTOR: f64 = 1e-9;

fn check_positions(n: usize, pos: &[(f64, f64)]) -> Result<(), LayoutError> {
    if pos.len() != n {
        return Err(LayoutError::BadPositions {
            got: pos.len(),
            expected: n,
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pos[i].0 - pos[j].0;
            let dy = pos[i].1 - pos[j].1;
            if dx * dx + dy * dy == 0.0 {
                return Err(LayoutError::CoincidentVertices { a: i, b: j });
            }
        }
    }
    Ok(())
}

/// Layout energy over ordered vertex pairs:
/// Σ_{i≠j} [ a_ij·‖zᵢ−zⱼ‖³/(3δ) − δ²·ln‖zᵢ−zⱼ‖ ].
pub fn layout_energy(
    g: &ContactGraph,
    pos: &[(f64, f64)],
    delta: f64,
) -> Result<f64, LayoutError> {
    check_positions(g.n(), pos)?;
    Ok(energy_unchecked(g.n(), &g.edges_plain(), pos, delta))
}

/// Exact gradient of [`layout_energy`] with respect to each position.
pub fn layout_gradient(
    g: &ContactGraph,
    pos: &[(f64, f64)],
    delta: f64,
) -> Result<Vec<(f64, f64)>, LayoutError> {
    check_positions(g.n(), pos)?;
    Ok(gradient_unchecked(g.n(), &g.edges_plain(), pos, delta))
}

impl ContactGraph {
    fn edges_plain(&self) -> Vec<(u32, u32)> {
        self.edges().iter().map(|&(a, b, _)| (a, b)).collect()
    }
}

fn energy_unchecked(n: usize, edges: &[(u32, u32)], pos: &[(f64, f64)], delta: f64) -> f64 {
    // repulsion over unordered pairs (each ordered pair counted twice)
    let mut repulsion = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pos[i].0 - pos[j].0;
            let dy = pos[i].1 - pos[j].1;
            let r2 = dx * dx + dy * dy;
            repulsion += r2.ln(); // 2·ln r
        }
    }
    let mut attraction = 0.0;
    for &(a, b) in edges {
        let dx = pos[a as usize].0 - pos[b as usize].0;
        let dy = pos[a as usize].1 - pos[b as usize].1;
        let r = (dx * dx + dy * dy).sqrt();
        attraction += 2.0 * r * r * r / (3.0 * delta);
    }
    attraction - delta * delta * repulsion
}

fn gradient_unchecked(
    n: usize,
    edges: &[(u32, u32)],
    pos: &[(f64, f64)],
    delta: f64,
) -> Vec<(f64, f64)> {
    let mut grad = vec![(0.0f64, 0.0f64); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pos[i].0 - pos[j].0;
            let dy = pos[i].1 - pos[j].1;
            let r2 = dx * dx + dy * dy;
            // repulsive part: −2δ²(zᵢ−zⱼ)/r² on i, mirrored on j
            let c = -2.0 * delta * delta / r2;
            grad[i].0 += c * dx;
            grad[i].1 += c * dy;
            grad[j].0 -= c * dx;
            grad[j].1 -= c * dy;
        }
    }
    for &(a, b) in edges {
        let (a, b) = (a as usize, b as usize);
        let dx = pos[a].0 - pos[b].0;
        let dy = pos[a].1 - pos[b].1;
        let r = (dx * dx + dy * dy).sqrt();
        // attractive part: 2(zᵢ−zⱼ)·r/δ
        let c = 2.0 * r / delta;
        grad[a].0 += c * dx;
        grad[a].1 += c * dy;
        grad[b].0 -= c * dx;
        grad[b].1 -= c * dy;
    }
    grad
}

fn min_separation(pos: &[(f64, f64)]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pos.len() {
        for j in (i + 1)..pos.len() {
            let dx = pos[i].0 - pos[j].0;
            let dy = pos[i].1 - pos[j].1;
            best = best.min((dx * dx + dy * dy).sqrt());
        }
    }
    best
}

/// Gradient descent on the layout energy from a seeded uniform-random start
/// in a square of side δ·√n. Steps are accepted only when they decrease the
/// energy and keep every pair at least 1e-9·δ apart.
pub fn minimize_layout(
    g: &ContactGraph,
    cfg: &LayoutConfig,
) -> Result<VertexPositions, LayoutError> {
    if g.n() >= 2 && crate::graph::connected_components(g).count() != 1 {
        return Err(LayoutError::NotConnected);
    }
    minimize_points(g.n(), &g.edges_plain(), cfg)
}

/// Layout of an arbitrary (n, edges) graph; used directly for quotient
/// graphs whose nodes are clusters.
pub fn minimize_points(
    n: usize,
    edges: &[(u32, u32)],
    cfg: &LayoutConfig,
) -> Result<VertexPositions, LayoutError> {
    if n < 2 {
        return Err(LayoutError::TooFewVertices);
    }
    let delta = cfg.delta;
    let side = delta * (n as f64).sqrt();
    let mut rng = substream(cfg.seed, &[0x6c61_796f_7574]);
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect();
    // re-jitter coincident starts by up to 1e-6·δ
    loop {
        let mut clean = true;
        for i in 0..n {
            for j in (i + 1)..n {
                if pos[i] == pos[j] {
                    pos[j].0 += (rng.gen::<f64>() - 0.5) * 2e-6 * delta;
                    pos[j].1 += (rng.gen::<f64>() - 0.5) * 2e-6 * delta;
                    clean = false;
                }
            }
        }
        if clean {
            break;
        }
    }

    let min_sep = MIN_SEPARATION_FACTOR * delta;
    let mut energy = energy_unchecked(n, edges, &pos, delta);
    let mut step = delta * 0.1;
    let mut converged = false;

    for _ in 0..cfg.max_iterations {
        let grad = gradient_unchecked(n, edges, &pos, delta);
        let gmax = grad
            .iter()
            .map(|&(x, y)| (x * x + y * y).sqrt())
            .fold(0.0, f64::max);
        if gmax < cfg.gradient_tolerance {
            converged = true;
            break;
        }
        // backtracking from an adaptive step, accepting only decreases
        let mut t = step * 2.0;
        let mut accepted = false;
        while t > 1e-16 * delta {
            let candidate: Vec<(f64, f64)> = pos
                .iter()
                .zip(&grad)
                .map(|(&(x, y), &(gx, gy))| (x - t * gx, y - t * gy))
                .collect();
            if min_separation(&candidate) >= min_sep {
                let e = energy_unchecked(n, edges, &candidate, delta);
                if e < energy {
                    pos = candidate;
                    energy = e;
                    step = t;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(VertexPositions {
        coordinates: pos,
        final_energy: energy,
        converged,
    })
}

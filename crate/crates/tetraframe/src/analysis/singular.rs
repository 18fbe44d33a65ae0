//! Singular-set extraction by thresholding the potential `W`.

use crate::field::{Target, TensorField};

/// Half the potential at the origin: `512/243` (tetrahedral) or `81/64` (Mercedes-Benz).
pub fn default_threshold(target: Target) -> f64 {
    0.5 * target.w_at_zero()
}

/// Tetrahedral point defects in planar domains keep a non-zero core tensor
/// (peak `W` near a quarter of `W(0)`), so they are thresholded lower.
pub const PLANAR_TETRA_FRACTION: f64 = 0.1;

/// Default threshold for a field: [`default_threshold`], or
/// `PLANAR_TETRA_FRACTION · W(0)` for tetrahedral fields on planar domains.
pub fn field_threshold(field: &TensorField) -> f64 {
    match (field.target, field.domain.dim) {
        (Target::Tetra, 2) => PLANAR_TETRA_FRACTION * field.target.w_at_zero(),
        (t, _) => default_threshold(t),
    }
}

/// Connected component of singular nodes.
#[derive(Clone, Debug)]
pub struct Cluster {
    /// Active ordinals, ascending.
    pub nodes: Vec<usize>,
    pub centroid: [f64; 3],
    pub peak_w: f64,
    /// Ordinal of the node with the largest `W`.
    pub peak_node: usize,
    /// Some member is a boundary node or a neighbour of one.
    pub touches_boundary: bool,
}

/// Nodes with `W > threshold`, clustered by grid adjacency (full `3ᵈ−1` neighbourhood).
#[derive(Clone, Debug)]
pub struct SingularSet {
    pub threshold: f64,
    pub nodes: Vec<usize>,
    pub clusters: Vec<Cluster>,
}

impl SingularSet {
    pub fn interior_clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().filter(|c| !c.touches_boundary)
    }
}

pub fn singular_cells(field: &TensorField, threshold: f64) -> SingularSet {
    let n = field.n_nodes();
    let w: Vec<f64> = (0..n).map(|o| field.potential(o)).collect();
    let flagged: Vec<bool> = w.iter().map(|v| *v > threshold).collect();
    let nodes: Vec<usize> = (0..n).filter(|&o| flagged[o]).collect();
    let mut seen = vec![false; n];
    let mut clusters = Vec::new();
    for &start in &nodes {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![];
        let mut stack = vec![start];
        while let Some(o) = stack.pop() {
            members.push(o);
            for nb in field.domain.moore_neighbors(o) {
                if flagged[nb] && !seen[nb] {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        members.sort_unstable();
        let mut centroid = [0.0; 3];
        for &o in &members {
            let p = field.domain.active_position(o);
            (0..3).for_each(|k| centroid[k] += p[k] / members.len() as f64);
        }
        let peak_node = *members.iter().max_by(|a, b| w[**a].total_cmp(&w[**b])).expect("cluster is non-empty");
        // Strong boundary nodes sit on the variety, so corner defects stop one node short of them.
        let touches_boundary = members
            .iter()
            .any(|&o| field.domain.is_boundary(o) || field.domain.moore_neighbors(o).iter().any(|&nb| field.domain.is_boundary(nb)));
        clusters.push(Cluster { peak_w: w[peak_node], peak_node, centroid, touches_boundary, nodes: members });
    }
    SingularSet { threshold, nodes, clusters }
}

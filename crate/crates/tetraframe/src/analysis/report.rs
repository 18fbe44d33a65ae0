//! Combined post-processing report of a relaxed field.

use std::fmt::Write as _;

use crate::analysis::singular::{field_threshold, singular_cells, SingularSet};
use crate::analysis::surface::{junction_report, surface_mb_reduction, JunctionArm, SurfaceReport};
use crate::analysis::winding::{
    circle_loop, classes_compose_to, classify_node_loop, loop_around_cluster, winding_index_2d, ThirdIndex,
};
use crate::field::{BcMode, Target, TensorField};
use crate::grid::Shape;
use crate::quaternion::ConjugacyClass;

/// Smallest and largest ring radius (in cells) tried around a planar cluster.
pub const RING_RANGE: (i64, i64) = (2, 16);

#[derive(Clone, Debug)]
pub struct ClusterReport {
    pub centroid: [f64; 3],
    pub size: usize,
    pub peak_w: f64,
    pub touches_boundary: bool,
    /// Mercedes-Benz index around the cluster.
    pub winding: Option<ThirdIndex>,
    /// Homotopy class of a loop around the cluster (planar tetrahedral fields).
    pub class: Option<ConjugacyClass>,
    /// Why no loop quantity was computed.
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct FieldReport {
    pub target: Target,
    pub dim: usize,
    pub threshold: f64,
    pub n_singular_nodes: usize,
    pub clusters: Vec<ClusterReport>,
    pub max_w: f64,
    pub max_norm: f64,
    /// `max{8/3, (8γ/3)^{1/3}}` in weak mode.
    pub amplitude_bound: Option<f64>,
    /// Sum of interior cluster windings (Mercedes-Benz).
    pub winding_sum: Option<ThirdIndex>,
    /// Winding along a circle just outside an excised hole.
    pub hole_winding: Option<ThirdIndex>,
    /// Class of a loop just inside a disk boundary (planar tetrahedral fields).
    pub boundary_class: Option<ConjugacyClass>,
    /// Whether the interior cluster classes compose to `boundary_class`.
    pub classes_compose: Option<bool>,
    pub surface: Option<SurfaceReport>,
    pub junctions: Vec<JunctionArm>,
}

impl FieldReport {
    pub fn interior_clusters(&self) -> impl Iterator<Item = &ClusterReport> {
        self.clusters.iter().filter(|c| !c.touches_boundary)
    }

    /// `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let target = match self.target {
            Target::Mb => "mb",
            Target::Tetra => "tetra",
        };
        writeln!(s, "target={target}").unwrap();
        writeln!(s, "dim={}", self.dim).unwrap();
        writeln!(s, "threshold={}", self.threshold).unwrap();
        writeln!(s, "singular_nodes={}", self.n_singular_nodes).unwrap();
        writeln!(s, "clusters={}", self.clusters.len()).unwrap();
        writeln!(s, "interior_clusters={}", self.interior_clusters().count()).unwrap();
        writeln!(s, "max_w={}", self.max_w).unwrap();
        writeln!(s, "max_norm={}", self.max_norm).unwrap();
        if let Some(b) = self.amplitude_bound {
            writeln!(s, "amplitude_bound={b}").unwrap();
        }
        for (i, c) in self.clusters.iter().enumerate() {
            let p = c.centroid;
            write!(s, "cluster.{i}.centroid={},{},{}", p[0], p[1], p[2]).unwrap();
            write!(s, "\ncluster.{i}.size={}\ncluster.{i}.peak_w={}\ncluster.{i}.boundary={}", c.size, c.peak_w, c.touches_boundary)
                .unwrap();
            if let Some(w) = c.winding {
                write!(s, "\ncluster.{i}.winding={w}").unwrap();
            }
            if let Some(cl) = c.class {
                write!(s, "\ncluster.{i}.class={cl}").unwrap();
            }
            if let Some(n) = &c.note {
                write!(s, "\ncluster.{i}.note={n}").unwrap();
            }
            s.push('\n');
        }
        if let Some(w) = self.winding_sum {
            writeln!(s, "winding_sum={w}").unwrap();
        }
        if let Some(w) = self.hole_winding {
            writeln!(s, "hole_winding={w}").unwrap();
        }
        if let Some(c) = self.boundary_class {
            writeln!(s, "boundary_class={c}").unwrap();
        }
        if let Some(b) = self.classes_compose {
            writeln!(s, "classes_compose={b}").unwrap();
        }
        if let Some(r) = &self.surface {
            writeln!(s, "surface.genus={}", r.genus).unwrap();
            writeln!(s, "surface.expected={}", r.expected).unwrap();
            writeln!(s, "surface.index_sum={}", r.index_sum).unwrap();
            writeln!(s, "surface.mesh_level={}", r.mesh_level).unwrap();
            let charged: Vec<_> = r.charged_clusters().collect();
            writeln!(s, "surface.clusters={}", charged.len()).unwrap();
            for (i, c) in charged.iter().enumerate() {
                let d = c.direction;
                writeln!(s, "surface.cluster.{i}.direction={},{},{}", d[0], d[1], d[2]).unwrap();
                writeln!(s, "surface.cluster.{i}.index={}", c.index).unwrap();
            }
        }
        for a in &self.junctions {
            writeln!(s, "junction.{}.size={}", a.cluster, a.size).unwrap();
            writeln!(s, "junction.{}.degree={}", a.cluster, a.degree()).unwrap();
            for (k, c) in a.contacts.iter().enumerate() {
                let label = c.loop_class.as_ref().map(|l| l.class.to_string()).unwrap_or_else(|| "unresolved".into());
                writeln!(s, "junction.{}.contact.{k}.class={label}", a.cluster).unwrap();
            }
        }
        s
    }
}

fn cluster_loop_quantities(field: &TensorField, set: &SingularSet, i: usize) -> (Option<ThirdIndex>, Option<ConjugacyClass>, Option<String>) {
    // Rings close to a core can fail to lift; larger admissible rings are tried in turn.
    let mut k = RING_RANGE.0;
    let mut note = String::from("no admissible ring");
    while let Some(ring) = loop_around_cluster(field, set, i, k, RING_RANGE.1) {
        let result = match field.target {
            Target::Mb => winding_index_2d(field, &ring).map(|w| (Some(w), None)),
            Target::Tetra => classify_node_loop(field, &ring).map(|c| (None, Some(c.class))),
        };
        match result {
            Ok((w, c)) => return (w, c, None),
            Err(e) => note = e.to_string(),
        }
        k = ring.len() as i64 / 8 + 1;
    }
    (None, None, Some(note))
}

fn circle_samples(radius: f64, h: f64) -> usize {
    ((std::f64::consts::TAU * radius / (0.5 * h)).ceil() as usize).max(16)
}

/// Singular set, loop indices and classes, and the boundary bookkeeping that
/// applies to the field's domain.
pub fn analyze_field(field: &TensorField, threshold: Option<f64>) -> FieldReport {
    let threshold = threshold.unwrap_or_else(|| field_threshold(field));
    let set = singular_cells(field, threshold);
    let dim = field.domain.dim;
    let h = field.domain.h;
    let clusters: Vec<ClusterReport> = (0..set.clusters.len())
        .map(|i| {
            let c = &set.clusters[i];
            let (winding, class, note) = if dim == 2 && !c.touches_boundary {
                cluster_loop_quantities(field, &set, i)
            } else {
                (None, None, None)
            };
            ClusterReport {
                centroid: c.centroid,
                size: c.nodes.len(),
                peak_w: c.peak_w,
                touches_boundary: c.touches_boundary,
                winding,
                class,
                note,
            }
        })
        .collect();
    let mut report = FieldReport {
        target: field.target,
        dim,
        threshold,
        n_singular_nodes: set.nodes.len(),
        max_w: field.max_potential(),
        max_norm: field.max_norm(),
        amplitude_bound: (field.bc_mode == BcMode::Weak).then(|| field.params.amplitude_bound()),
        winding_sum: None,
        hole_winding: None,
        boundary_class: None,
        classes_compose: None,
        surface: None,
        junctions: Vec::new(),
        clusters,
    };
    if dim == 2 && field.target == Target::Mb {
        let interior: Vec<_> = report.interior_clusters().collect();
        if interior.iter().all(|c| c.winding.is_some()) {
            report.winding_sum = Some(interior.iter().filter_map(|c| c.winding).sum());
        }
        if let Shape::TriangleWithHole { hole_radius, hole_center, .. } = field.domain.shape {
            let r = hole_radius + 2.0 * h;
            report.hole_winding = circle_loop(&field.domain, hole_center, r, circle_samples(r, h))
                .and_then(|l| winding_index_2d(field, &l).ok());
        }
    }
    if dim == 2 && field.target == Target::Tetra {
        if let Shape::Disk { radius } = field.domain.shape {
            let r = radius - 2.0 * h;
            report.boundary_class = circle_loop(&field.domain, [0.0, 0.0], r, circle_samples(r, h))
                .and_then(|l| classify_node_loop(field, &l).ok())
                .map(|c| c.class);
        }
        let classes: Option<Vec<ConjugacyClass>> = report.interior_clusters().map(|c| c.class).collect();
        if let (Some(classes), Some(target)) = (classes, report.boundary_class) {
            report.classes_compose = Some(classes_compose_to(&classes, target));
        }
    }
    if dim == 3 && field.target == Target::Tetra && field.domain.shape.boundary_genus().is_some() {
        report.surface = surface_mb_reduction(field).ok();
        report.junctions = junction_report(field, &set, 3.0 * h).unwrap_or_default();
    }
    report
}

//! Reduction of a spatial tetrahedral field to a tangential Mercedes-Benz field
//! on the domain boundary, with Poincaré-Hopf bookkeeping.
//!
//! The boundary is tessellated by a geodesic triangle mesh; each mesh vertex
//! takes the tensor of the nearest boundary node. Inside a triangle the
//! tangential phase `arg(Q111 − 3Q122, 3Q112 − Q222)` is measured in tangent
//! frames built from one fixed reference axis, so its winding around the
//! triangle counts the three-fold singularities inside. For a closed surface
//! of genus `g` the windings add up to `3(2 − 2g)`.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::analysis::singular::SingularSet;
use crate::analysis::winding::{wrap_angle, ThirdIndex, FIELD_RECOVERY_TOL};
use crate::error::{invalid, Result};
use crate::field::{Target, TensorField};
use crate::grid::{Shape, NONE};
use crate::quaternion::{classify_loop_with, LiftOptions, LoopClassification};
use crate::tensor::{tangent_basis, tangential_phase_pair_with_reference};

/// Geodesic triangle mesh of the unit sphere with outward-oriented faces.
#[derive(Clone, Debug)]
pub struct SphereMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
}

impl SphereMesh {
    /// Icosahedron subdivided `level` times.
    pub fn icosphere(level: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let mut vertices: Vec<Vector3<f64>> = raw.iter().map(|v| Vector3::from(*v).normalize()).collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
            let mut mid = |a: usize, b: usize, vs: &mut Vec<Vector3<f64>>| -> usize {
                let key = (a.min(b), a.max(b));
                *cache.entry(key).or_insert_with(|| {
                    vs.push(((vs[a] + vs[b]) / 2.0).normalize());
                    vs.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut vertices);
                let bc = mid(b, c, &mut vertices);
                let ca = mid(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        for f in faces.iter_mut() {
            let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
            if (b - a).cross(&(c - a)).dot(&a) < 0.0 {
                f.swap(1, 2);
            }
        }
        Self { vertices, faces }
    }

    /// Mean edge length on the unit sphere.
    pub fn mean_edge(&self) -> f64 {
        let total: f64 = self
            .faces
            .iter()
            .map(|f| (0..3).map(|k| (self.vertices[f[k]] - self.vertices[f[(k + 1) % 3]]).norm()).sum::<f64>())
            .sum();
        total / (3 * self.faces.len()) as f64
    }
}

/// Group of boundary triangles with non-zero winding.
#[derive(Clone, Debug)]
pub struct SurfaceCluster {
    pub faces: Vec<usize>,
    /// Unit direction of the cluster centre.
    pub direction: [f64; 3],
    pub index: ThirdIndex,
}

/// Index bookkeeping of the tangential field on a closed boundary.
#[derive(Clone, Debug)]
pub struct SurfaceReport {
    pub genus: usize,
    /// `2 − 2g`.
    pub expected: ThirdIndex,
    pub index_sum: ThirdIndex,
    pub clusters: Vec<SurfaceCluster>,
    pub n_faces: usize,
    pub mesh_level: usize,
}

impl SurfaceReport {
    pub fn matches_euler_characteristic(&self) -> bool {
        self.index_sum == self.expected
    }

    /// Clusters with non-zero net index.
    pub fn charged_clusters(&self) -> impl Iterator<Item = &SurfaceCluster> {
        self.clusters.iter().filter(|c| c.index.0 != 0)
    }
}

fn ball_radius(field: &TensorField) -> Result<f64> {
    if field.target != Target::Tetra || field.domain.dim != 3 {
        return invalid("surface reduction needs a tetrahedral field on a spatial domain");
    }
    match (&field.domain.shape, field.domain.shape.boundary_genus()) {
        (Shape::Ball { radius }, Some(_)) => Ok(*radius),
        _ => invalid("surface reduction needs a closed star-shaped boundary (ball); this shell is not closed"),
    }
}

/// Nearest boundary node to a point within two grid cells.
fn nearest_boundary_node(field: &TensorField, p: &Vector3<f64>) -> Option<usize> {
    let d = &field.domain;
    let c = d.coords(d.nearest_index(&[p[0], p[1], p[2]]));
    let mut best: Option<(f64, usize)> = None;
    for dz in -2i64..=2 {
        for dy in -2i64..=2 {
            for dx in -2i64..=2 {
                let q = [c[0] as i64 + dx, c[1] as i64 + dy, c[2] as i64 + dz];
                if (0..3).any(|k| q[k] < 0 || q[k] >= d.dims[k] as i64) {
                    continue;
                }
                let o = d.ordinal[d.index([q[0] as usize, q[1] as usize, q[2] as usize])];
                if o == NONE || !d.is_boundary(o as usize) {
                    continue;
                }
                let x = d.active_position(o as usize);
                let dist = (Vector3::from(x) - p).norm();
                if best.is_none_or(|(b, _)| dist < b) {
                    best = Some((dist, o as usize));
                }
            }
        }
    }
    best.map(|(_, o)| o)
}

/// Coarsest icosphere whose edges are at most `2.5 h` on a sphere of radius `r`.
pub fn mesh_level_for(r: f64, h: f64) -> usize {
    let mut level = 0;
    while 1.05 * r / f64::powi(2.0, level as i32) > 2.5 * h && level < 9 {
        level += 1;
    }
    level
}

pub fn surface_mb_reduction(field: &TensorField) -> Result<SurfaceReport> {
    let r = ball_radius(field)?;
    let level = mesh_level_for(r, field.domain.h);
    let mesh = SphereMesh::icosphere(level);
    let samples: Vec<usize> = mesh
        .vertices
        .iter()
        .map(|v| nearest_boundary_node(field, &(v * r)).ok_or_else(|| crate::Error::InvalidArgument("boundary shell has gaps".into())))
        .collect::<Result<_>>()?;
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let mut windings = Vec::with_capacity(mesh.faces.len());
    for f in &mesh.faces {
        let n = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]).normalize();
        let reference = *axes.iter().min_by(|a, b| a.dot(&n).abs().total_cmp(&b.dot(&n).abs())).unwrap();
        let phases: Vec<f64> = f
            .iter()
            .map(|&vi| {
                let o = samples[vi];
                let nu = Vector3::from(field.domain.normals[o]);
                let (x, y) = tangential_phase_pair_with_reference(&field.tensor3(o)?, &nu, &reference);
                Ok(y.atan2(x))
            })
            .collect::<Result<_>>()?;
        let turns: f64 = (0..3).map(|k| wrap_angle(phases[(k + 1) % 3] - phases[k])).sum::<f64>() / std::f64::consts::TAU;
        windings.push(turns.round() as i64);
    }
    let index_sum = ThirdIndex(windings.iter().sum());
    let clusters = cluster_faces(&mesh, &windings);
    let genus = field.domain.shape.boundary_genus().unwrap_or(0);
    Ok(SurfaceReport {
        genus,
        expected: ThirdIndex(3 * (2 - 2 * genus as i64)),
        index_sum,
        clusters,
        n_faces: mesh.faces.len(),
        mesh_level: level,
    })
}

fn cluster_faces(mesh: &SphereMesh, windings: &[i64]) -> Vec<SurfaceCluster> {
    let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); mesh.vertices.len()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        if windings[fi] != 0 {
            f.iter().for_each(|&v| by_vertex[v].push(fi));
        }
    }
    let mut seen = vec![false; mesh.faces.len()];
    let mut out = Vec::new();
    for start in 0..mesh.faces.len() {
        if windings[start] == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut faces = Vec::new();
        while let Some(fi) = stack.pop() {
            faces.push(fi);
            for &v in &mesh.faces[fi] {
                for &nb in &by_vertex[v] {
                    if !seen[nb] {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }
        faces.sort_unstable();
        let c: Vector3<f64> = faces.iter().flat_map(|&fi| mesh.faces[fi].iter().map(|&v| mesh.vertices[v])).sum();
        let c = c.normalize();
        let index = ThirdIndex(faces.iter().map(|&fi| windings[fi]).sum());
        out.push(SurfaceCluster { faces, direction: [c[0], c[1], c[2]], index });
    }
    out
}

/// Tensors of the nearest boundary nodes along a small circle on the sphere
/// of radius `r` around `direction` (angular radius `radius / r`).
pub fn surface_loop_nodes(field: &TensorField, direction: &[f64; 3], radius: f64, samples: usize) -> Result<Vec<usize>> {
    let r = ball_radius(field)?;
    let n = Vector3::from(*direction).normalize();
    let (t1, t2) = tangent_basis(&n);
    let alpha = radius / r;
    let mut out: Vec<usize> = Vec::new();
    for s in 0..samples {
        let phi = std::f64::consts::TAU * s as f64 / samples as f64;
        let p = (n * alpha.cos() + (t1 * phi.cos() + t2 * phi.sin()) * alpha.sin()) * r;
        let o = nearest_boundary_node(field, &p).ok_or_else(|| crate::Error::InvalidArgument("boundary shell has gaps".into()))?;
        if out.last() != Some(&o) {
            out.push(o);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    Ok(out)
}

/// One endpoint of a bulk singular cluster on the boundary.
#[derive(Clone, Debug)]
pub struct Contact {
    pub nodes: Vec<usize>,
    pub centroid: [f64; 3],
    /// Class of a boundary loop around the contact, when the loop lifts cleanly.
    pub loop_class: Option<LoopClassification>,
}

/// Descriptive junction graph: every bulk singular cluster with its boundary contacts.
#[derive(Clone, Debug)]
pub struct JunctionArm {
    pub cluster: usize,
    pub size: usize,
    pub centroid: [f64; 3],
    pub contacts: Vec<Contact>,
}

impl JunctionArm {
    pub fn degree(&self) -> usize {
        self.contacts.len()
    }
}

/// Groups boundary nodes of each singular cluster into contacts and classifies
/// a boundary loop of radius `loop_radius` around each contact.
pub fn junction_report(field: &TensorField, set: &SingularSet, loop_radius: f64) -> Result<Vec<JunctionArm>> {
    ball_radius(field)?;
    let mut arms = Vec::new();
    for (ci, c) in set.clusters.iter().enumerate() {
        let on_boundary: Vec<usize> = c.nodes.iter().copied().filter(|&o| field.domain.is_boundary(o)).collect();
        let mut seen: HashMap<usize, bool> = on_boundary.iter().map(|&o| (o, false)).collect();
        let mut contacts = Vec::new();
        for &start in &on_boundary {
            if seen[&start] {
                continue;
            }
            seen.insert(start, true);
            let mut stack = vec![start];
            let mut nodes = Vec::new();
            while let Some(o) = stack.pop() {
                nodes.push(o);
                for nb in field.domain.moore_neighbors(o) {
                    if seen.get(&nb) == Some(&false) {
                        seen.insert(nb, true);
                        stack.push(nb);
                    }
                }
            }
            nodes.sort_unstable();
            let mut centroid = [0.0; 3];
            for &o in &nodes {
                let p = field.domain.active_position(o);
                (0..3).for_each(|k| centroid[k] += p[k] / nodes.len() as f64);
            }
            let loop_nodes = surface_loop_nodes(field, &centroid, loop_radius, 256)?;
            let tensors = loop_nodes.iter().map(|&o| field.tensor3(o)).collect::<Result<Vec<_>>>()?;
            let loop_class = classify_loop_with(&tensors, &LiftOptions { recovery_tol: FIELD_RECOVERY_TOL, ..Default::default() }).ok();
            contacts.push(Contact { nodes, centroid, loop_class });
        }
        arms.push(JunctionArm { cluster: ci, size: c.nodes.len(), centroid: c.centroid, contacts });
    }
    Ok(arms)
}

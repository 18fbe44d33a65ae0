//! Uniform Cartesian grids masked by the signed distance function of a domain.
//!
//! Nodes sit at integer multiples of the spacing `h`. A node is active when
//! the signed distance (negative inside) is `≤ 0`; an active node with an
//! inactive axis neighbour is a boundary node and carries the outward unit
//! normal of the analytic shape.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Analytic domain shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// Disk of the given radius centred at the origin.
    Disk { radius: f64 },
    /// Ball of the given radius centred at the origin.
    Ball { radius: f64 },
    /// Axis-aligned rectangle `[min, max]`.
    Rectangle { min: [f64; 2], max: [f64; 2] },
    /// Equilateral triangle centred at the origin (one vertex on the positive
    /// `y` axis) with a disk removed.
    TriangleWithHole { circumradius: f64, hole_radius: f64, hole_center: [f64; 2] },
    /// Cube `[-half_width, half_width]³` with a centred ball removed.
    BoxMinusBall { half_width: f64, radius: f64 },
}

fn box_sdf(p: &[f64], half: &[f64], center: &[f64]) -> f64 {
    let mut outside = 0.0;
    let mut inside = f64::NEG_INFINITY;
    for k in 0..p.len() {
        let d = (p[k] - center[k]).abs() - half[k];
        outside += d.max(0.0).powi(2);
        inside = inside.max(d);
    }
    if outside > 0.0 {
        outside.sqrt()
    } else {
        inside
    }
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Disk { .. } | Shape::Rectangle { .. } | Shape::TriangleWithHole { .. } => 2,
            Shape::Ball { .. } | Shape::BoxMinusBall { .. } => 3,
        }
    }

    /// Rejects degenerate parameters.
    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, msg: &str| if c { Ok(()) } else { invalid(msg.to_string()) };
        match self {
            Shape::Disk { radius } | Shape::Ball { radius } => ok(*radius > 0.0 && radius.is_finite(), "radius must be positive"),
            Shape::Rectangle { min, max } => ok(min[0] < max[0] && min[1] < max[1], "rectangle needs min < max"),
            Shape::TriangleWithHole { circumradius, hole_radius, hole_center } => {
                ok(*circumradius > 0.0 && *hole_radius > 0.0, "triangle and hole radii must be positive")?;
                let tri = triangle_sdf(&[hole_center[0], hole_center[1]], *circumradius);
                ok(tri + hole_radius < 0.0, "hole must lie strictly inside the triangle")
            }
            Shape::BoxMinusBall { half_width, radius } => {
                ok(*radius > 0.0 && radius < half_width, "ball must fit strictly inside the box")
            }
        }
    }

    /// Signed distance (negative inside); exact inside the domain.
    pub fn sdf(&self, p: &[f64; 3]) -> f64 {
        match self {
            Shape::Disk { radius } => (p[0] * p[0] + p[1] * p[1]).sqrt() - radius,
            Shape::Ball { radius } => (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - radius,
            Shape::Rectangle { min, max } => {
                let half = [(max[0] - min[0]) / 2.0, (max[1] - min[1]) / 2.0];
                let c = [(max[0] + min[0]) / 2.0, (max[1] + min[1]) / 2.0];
                box_sdf(&p[..2], &half, &c)
            }
            Shape::TriangleWithHole { circumradius, hole_radius, hole_center } => {
                let hole = hole_radius - ((p[0] - hole_center[0]).powi(2) + (p[1] - hole_center[1]).powi(2)).sqrt();
                triangle_sdf(&[p[0], p[1]], *circumradius).max(hole)
            }
            Shape::BoxMinusBall { half_width, radius } => {
                let b = box_sdf(p, &[*half_width; 3], &[0.0; 3]);
                b.max(radius - (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            Shape::Disk { radius } => ([-radius, -radius, 0.0], [*radius, *radius, 0.0]),
            Shape::Ball { radius } => ([-radius; 3], [*radius; 3]),
            Shape::Rectangle { min, max } => ([min[0], min[1], 0.0], [max[0], max[1], 0.0]),
            Shape::TriangleWithHole { circumradius, .. } => {
                let r = *circumradius;
                ([-r * 3f64.sqrt() / 2.0, -r / 2.0, 0.0], [r * 3f64.sqrt() / 2.0, r, 0.0])
            }
            Shape::BoxMinusBall { half_width, .. } => ([-half_width; 3], [*half_width; 3]),
        }
    }

    /// Outward unit normal from the normalized SDF gradient.
    pub fn normal(&self, p: &[f64; 3]) -> [f64; 3] {
        let step = 1e-7;
        let mut g = [0.0; 3];
        for k in 0..self.dim() {
            let mut a = *p;
            let mut b = *p;
            a[k] += step;
            b[k] -= step;
            g[k] = (self.sdf(&a) - self.sdf(&b)) / (2.0 * step);
        }
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        if n < 1e-12 {
            // Medial point of the shape; any unit direction is as good as another.
            let mut e = [0.0; 3];
            e[0] = 1.0;
            return e;
        }
        g.map(|x| x / n)
    }

    /// Genus of each boundary component, when the boundary is a closed surface.
    pub fn boundary_genus(&self) -> Option<usize> {
        match self {
            Shape::Ball { .. } => Some(0),
            _ => None,
        }
    }
}

/// Outward normals of the triangle sides at angles −90°, 30°, 150°.
fn triangle_sdf(p: &[f64; 2], circumradius: f64) -> f64 {
    let inradius = circumradius / 2.0;
    [-90f64, 30.0, 150.0]
        .iter()
        .map(|deg| {
            let t = deg.to_radians();
            p[0] * t.cos() + p[1] * t.sin() - inradius
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Classification of a grid node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Exterior,
    Interior,
    Boundary,
}

/// Sentinel for "no active node".
pub const NONE: u32 = u32::MAX;

/// Masked uniform grid.
#[derive(Clone, Debug)]
pub struct GridDomain {
    pub shape: Shape,
    pub dim: usize,
    pub h: f64,
    /// Node counts per axis (`1` along unused axes).
    pub dims: [usize; 3],
    /// Integer coordinates of node `(0,0,0)`; position is `h·(origin + index)`.
    pub origin: [i64; 3],
    /// Signed distance per grid node.
    pub sdf: Vec<f64>,
    pub kind: Vec<NodeKind>,
    /// Grid indices of active nodes, in grid order.
    pub active: Vec<usize>,
    /// Active ordinal of each grid node or [`NONE`].
    pub ordinal: Vec<u32>,
    /// Active ordinals of the axis neighbours of each active node ([`NONE`] if absent).
    pub neighbors: Vec<[u32; 6]>,
    /// Outward unit normal per active node (zero away from the boundary).
    pub normals: Vec<[f64; 3]>,
    /// Active ordinals of boundary nodes.
    pub boundary: Vec<u32>,
}

/// Builds the masked grid for `shape` with spacing `h`.
pub fn build_domain(shape: &Shape, h: f64) -> Result<GridDomain> {
    if !(h > 0.0 && h.is_finite()) {
        return invalid(format!("grid spacing must be positive, got {h}"));
    }
    shape.validate()?;
    let dim = shape.dim();
    let (lo, hi) = shape.bounds();
    let mut origin = [0i64; 3];
    let mut dims = [1usize; 3];
    for k in 0..dim {
        let a = (lo[k] / h).floor() as i64 - 2;
        let b = (hi[k] / h).ceil() as i64 + 2;
        origin[k] = a;
        dims[k] = (b - a + 1) as usize;
    }
    let total = dims[0] * dims[1] * dims[2];
    if total > 400_000_000 {
        return invalid(format!("grid with {total} nodes is too large"));
    }
    let pos = |idx: usize| -> [f64; 3] {
        let (i, j, k) = (idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1]));
        [(origin[0] + i as i64) as f64 * h, (origin[1] + j as i64) as f64 * h, (origin[2] + k as i64) as f64 * h]
    };
    let sdf: Vec<f64> = (0..total).map(|idx| shape.sdf(&pos(idx))).collect();
    let mut ordinal = vec![NONE; total];
    let mut active = Vec::new();
    for (idx, d) in sdf.iter().enumerate() {
        if *d <= 0.0 {
            ordinal[idx] = active.len() as u32;
            active.push(idx);
        }
    }
    if active.is_empty() {
        return invalid("domain contains no grid nodes; refine h");
    }
    let strides = [1isize, dims[0] as isize, (dims[0] * dims[1]) as isize];
    let mut neighbors = Vec::with_capacity(active.len());
    let mut kind = vec![NodeKind::Exterior; total];
    let mut normals = Vec::with_capacity(active.len());
    let mut boundary = Vec::new();
    for (ord, &idx) in active.iter().enumerate() {
        let c = [idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])];
        let mut nb = [NONE; 6];
        let mut is_boundary = false;
        for axis in 0..dim {
            for (slot, dir) in [(2 * axis, -1isize), (2 * axis + 1, 1)] {
                let inside = if dir < 0 { c[axis] > 0 } else { c[axis] + 1 < dims[axis] };
                let o = if inside { ordinal[(idx as isize + dir * strides[axis]) as usize] } else { NONE };
                nb[slot] = o;
                is_boundary |= o == NONE;
            }
        }
        neighbors.push(nb);
        if is_boundary {
            kind[idx] = NodeKind::Boundary;
            normals.push(shape.normal(&pos(idx)));
            boundary.push(ord as u32);
        } else {
            kind[idx] = NodeKind::Interior;
            normals.push([0.0; 3]);
        }
    }
    Ok(GridDomain { shape: shape.clone(), dim, h, dims, origin, sdf, kind, active, ordinal, neighbors, normals, boundary })
}

impl GridDomain {
    pub fn n_nodes(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    /// Grid coordinates `(i, j, k)` of a grid index.
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        [idx % self.dims[0], (idx / self.dims[0]) % self.dims[1], idx / (self.dims[0] * self.dims[1])]
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    /// Position of a grid index.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        std::array::from_fn(|k| (self.origin[k] + c[k] as i64) as f64 * self.h)
    }

    /// Position of an active node.
    pub fn active_position(&self, ord: usize) -> [f64; 3] {
        self.position(self.active[ord])
    }

    pub fn is_boundary(&self, ord: usize) -> bool {
        self.kind[self.active[ord]] == NodeKind::Boundary
    }

    /// `hᵈ` times the number of active nodes.
    pub fn volume(&self) -> f64 {
        self.active.len() as f64 * self.h.powi(self.dim as i32)
    }

    /// Grid index of the node nearest to `p` (clamped to the grid).
    pub fn nearest_index(&self, p: &[f64; 3]) -> usize {
        let c: [usize; 3] = std::array::from_fn(|k| {
            if k >= self.dim {
                return 0;
            }
            let i = (p[k] / self.h).round() as i64 - self.origin[k];
            i.clamp(0, self.dims[k] as i64 - 1) as usize
        });
        self.index(c)
    }

    /// Active ordinal of the node nearest to `p`, if that node is active.
    pub fn nearest_active(&self, p: &[f64; 3]) -> Option<usize> {
        let o = self.ordinal[self.nearest_index(p)];
        (o != NONE).then_some(o as usize)
    }

    /// Active ordinal at integer grid offset from an active node.
    pub fn offset(&self, ord: usize, d: [i64; 3]) -> Option<usize> {
        let c = self.coords(self.active[ord]);
        let mut out = [0usize; 3];
        for k in 0..3 {
            let v = c[k] as i64 + d[k];
            if v < 0 || v >= self.dims[k] as i64 {
                return None;
            }
            out[k] = v as usize;
        }
        let o = self.ordinal[self.index(out)];
        (o != NONE).then_some(o as usize)
    }

    /// Active ordinals of the full `3ᵈ − 1` neighbourhood.
    pub fn moore_neighbors(&self, ord: usize) -> Vec<usize> {
        let r = |k: usize| if k < self.dim { -1..=1 } else { 0..=0 };
        let mut out = Vec::new();
        for dz in r(2) {
            for dy in r(1) {
                for dx in r(0) {
                    if (dx, dy, dz) != (0, 0, 0) {
                        if let Some(o) = self.offset(ord, [dx, dy, dz]) {
                            out.push(o);
                        }
                    }
                }
            }
        }
        out
    }
}

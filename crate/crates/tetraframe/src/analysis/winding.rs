//! Winding indices of planar fields and homotopy classes of loops.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::analysis::singular::SingularSet;
use crate::error::{invalid, Error, Result};
use crate::field::{Target, TensorField};
use crate::grid::GridDomain;
use crate::quaternion::{classify_loop_with, BinaryTetraElement, ConjugacyClass, LiftOptions, LoopClassification};

/// A rational index `k/3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ThirdIndex(pub i64);

impl ThirdIndex {
    pub fn value(&self) -> f64 {
        self.0 as f64 / 3.0
    }
}

impl std::ops::Add for ThirdIndex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ThirdIndex(self.0 + o.0)
    }
}

impl std::iter::Sum for ThirdIndex {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ThirdIndex(0), |a, b| a + b)
    }
}

impl fmt::Display for ThirdIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 3 == 0 {
            write!(f, "{}", self.0 / 3)
        } else {
            write!(f, "{}/3", self.0)
        }
    }
}

/// Wraps an angle difference into `(−π, π]`.
pub fn wrap_angle(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Largest admissible phase jump between consecutive loop samples.
pub const MAX_PHASE_STEP: f64 = 0.9 * PI;
/// Largest admissible distance of a winding from the nearest multiple of `1/3`.
pub const SNAP_TOL: f64 = 0.1;

/// Total unwrapped change of a cyclic phase sequence, in turns.
pub fn phase_turns(phases: &[f64]) -> Result<f64> {
    if phases.len() < 3 {
        return invalid("a loop needs at least three samples");
    }
    let mut total = 0.0;
    for k in 0..phases.len() {
        let d = wrap_angle(phases[(k + 1) % phases.len()] - phases[k]);
        if d.abs() > MAX_PHASE_STEP {
            return Err(Error::Winding(format!("phase step {d:.3} rad between samples {k} and {}", k + 1)));
        }
        total += d;
    }
    Ok(total / TAU)
}

/// Index of a Mercedes-Benz field along a closed node cycle: phase winding of
/// `(q1, q2)` divided by three.
pub fn winding_index_2d(field: &TensorField, nodes: &[usize]) -> Result<ThirdIndex> {
    if field.target != Target::Mb {
        return invalid("winding indices are defined for Mercedes-Benz fields");
    }
    let phases: Vec<f64> = nodes.iter().map(|&o| field.tensor2(o).map(|t| t.phase())).collect::<Result<_>>()?;
    let turns = phase_turns(&phases)?;
    let k = turns.round();
    if (turns - k).abs() > SNAP_TOL * 3.0 {
        return Err(Error::Winding(format!("winding {turns:.3} turns is not an integer")));
    }
    Ok(ThirdIndex(k as i64))
}

/// Counter-clockwise square ring of active nodes at Chebyshev distance `k` from `center`.
pub fn ring_loop(domain: &GridDomain, center: usize, k: i64) -> Option<Vec<usize>> {
    if domain.dim != 2 || k < 1 {
        return None;
    }
    let mut offsets = Vec::with_capacity(8 * k as usize);
    for i in -k..k {
        offsets.push([i, -k]);
    }
    for j in -k..k {
        offsets.push([k, j]);
    }
    for i in (-k + 1..=k).rev() {
        offsets.push([i, k]);
    }
    for j in (-k + 1..=k).rev() {
        offsets.push([-k, j]);
    }
    offsets.iter().map(|d| domain.offset(center, [d[0], d[1], 0])).collect()
}

/// Counter-clockwise circle of nearest active nodes (consecutive duplicates removed).
pub fn circle_loop(domain: &GridDomain, center: [f64; 2], radius: f64, samples: usize) -> Option<Vec<usize>> {
    let mut out: Vec<usize> = Vec::with_capacity(samples);
    for s in 0..samples {
        let t = TAU * s as f64 / samples as f64;
        let o = domain.nearest_active(&[center[0] + radius * t.cos(), center[1] + radius * t.sin(), 0.0])?;
        if out.last() != Some(&o) {
            out.push(o);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    Some(out)
}

/// Smallest ring around the cluster's peak node that stays in the domain, avoids
/// singular nodes and encloses no other cluster.
pub fn loop_around_cluster(field: &TensorField, set: &SingularSet, cluster: usize, k_min: i64, k_max: i64) -> Option<Vec<usize>> {
    let c = &set.clusters[cluster];
    let h = field.domain.h;
    for k in k_min..=k_max {
        let Some(ring) = ring_loop(&field.domain, c.peak_node, k) else { continue };
        if ring.iter().any(|&o| field.potential(o) > set.threshold) {
            continue;
        }
        let p0 = field.domain.active_position(c.peak_node);
        let encloses_other = set.clusters.iter().enumerate().any(|(j, other)| {
            j != cluster
                && other.nodes.iter().any(|&o| {
                    let p = field.domain.active_position(o);
                    ((p[0] - p0[0]) / h).abs().round() as i64 <= k && ((p[1] - p0[1]) / h).abs().round() as i64 <= k
                })
        });
        if !encloses_other {
            return Some(ring);
        }
    }
    None
}

/// Recovery tolerance for tensors sampled from relaxed fields; samples are
/// projected to the variety before recovery.
pub const FIELD_RECOVERY_TOL: f64 = 0.5;

/// Homotopy class of a tetrahedral field along a node cycle.
pub fn classify_node_loop(field: &TensorField, nodes: &[usize]) -> Result<LoopClassification> {
    let tensors = nodes.iter().map(|&o| field.tensor3(o)).collect::<Result<Vec<_>>>()?;
    classify_loop_with(&tensors, &LiftOptions { recovery_tol: FIELD_RECOVERY_TOL, ..Default::default() })
}

/// Whether some choice of representatives of `classes` multiplies into `target`.
/// Products of conjugacy classes commute as sets, so the order is irrelevant.
pub fn classes_compose_to(classes: &[ConjugacyClass], target: ConjugacyClass) -> bool {
    let all = BinaryTetraElement::all();
    let mut reachable = vec![BinaryTetraElement::one()];
    for c in classes {
        let members: Vec<_> = all.iter().filter(|g| ConjugacyClass::of(g) == *c).copied().collect();
        let mut next: Vec<BinaryTetraElement> = Vec::new();
        for r in &reachable {
            for m in &members {
                let p = *r * *m;
                if !next.contains(&p) {
                    next.push(p);
                }
            }
        }
        reachable = next;
    }
    reachable.iter().any(|g| ConjugacyClass::of(g) == target)
}

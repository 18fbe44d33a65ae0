//! Tensor fields on masked grids.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::GridDomain;
use crate::tensor::{TracelessSymTensor2, TracelessSymTensor3, METRIC2};

/// Value space of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `H_trace(2,3)`, two coordinates per node (planar domains only).
    Mb,
    /// `H_trace(3,3)`, seven coordinates per node (planar or spatial domains).
    Tetra,
}

impl Target {
    pub const fn stride(self) -> usize {
        match self {
            Target::Mb => 2,
            Target::Tetra => 7,
        }
    }

    /// Potential `W` at the origin.
    pub fn w_at_zero(self) -> f64 {
        match self {
            Target::Mb => 2.0 * crate::tensor::LAMBDA2_SQ.powi(2),
            Target::Tetra => 3.0 * crate::tensor::LAMBDA3_SQ.powi(2),
        }
    }

    pub fn potential(self, q: &[f64]) -> f64 {
        match self {
            Target::Mb => TracelessSymTensor2::new([q[0], q[1]]).potential_w(),
            Target::Tetra => tensor3(q).potential_w(),
        }
    }

    /// Full Frobenius norm `‖A‖`.
    pub fn norm(self, q: &[f64]) -> f64 {
        match self {
            Target::Mb => (METRIC2 * (q[0] * q[0] + q[1] * q[1])).sqrt(),
            Target::Tetra => tensor3(q).norm(),
        }
    }

    /// Boundary penalty `V(A, ν)`.
    pub fn boundary_v(self, q: &[f64], nu: &[f64; 3]) -> Result<f64> {
        match self {
            Target::Mb => TracelessSymTensor2::new([q[0], q[1]]).boundary_v(&Vector2::new(nu[0], nu[1])),
            Target::Tetra => tensor3(q).boundary_v(&Vector3::from(*nu)),
        }
    }
}

pub(crate) fn tensor3(q: &[f64]) -> TracelessSymTensor3 {
    TracelessSymTensor3::new(std::array::from_fn(|a| q[a]))
}

/// Boundary condition treatment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMode {
    /// Boundary nodes hold fixed Dirichlet data.
    Strong,
    /// Boundary nodes are free and penalized by `V/δ₁² + W/δ₂²`.
    Weak,
}

/// Length scales of the relaxed energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub eps: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl FieldParams {
    pub fn new(eps: f64, delta1: f64, delta2: f64) -> Self {
        Self { eps, delta1, delta2 }
    }

    pub fn validate(&self, mode: BcMode) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return invalid(format!("eps must be positive, got {}", self.eps));
        }
        if mode == BcMode::Weak && !(self.delta1 > 0.0 && self.delta2 > 0.0) {
            return invalid("weak boundary conditions need positive delta1 and delta2");
        }
        Ok(())
    }

    /// `γ = δ₂²/δ₁²`.
    pub fn gamma(&self) -> f64 {
        (self.delta2 / self.delta1).powi(2)
    }

    /// Amplitude bound `max{8/3, (8γ/3)^{1/3}}` for critical points in weak mode.
    pub fn amplitude_bound(&self) -> f64 {
        (8.0f64 / 3.0).max((8.0 * self.gamma() / 3.0).cbrt())
    }
}

/// Nodal tensor field over the active nodes of a grid.
#[derive(Clone, Debug)]
pub struct TensorField {
    pub domain: GridDomain,
    pub target: Target,
    pub params: FieldParams,
    pub bc_mode: BcMode,
    /// `stride` coordinates per active node, in active order.
    pub values: Vec<f64>,
    /// Nodes held fixed by strong boundary conditions.
    pub fixed: Vec<bool>,
}

impl TensorField {
    /// Zero field; in strong mode every boundary node is marked fixed.
    pub fn zeros(domain: GridDomain, target: Target, params: FieldParams, bc_mode: BcMode) -> Result<Self> {
        params.validate(bc_mode)?;
        if target == Target::Mb && domain.dim != 2 {
            return invalid("Mercedes-Benz fields live on planar domains");
        }
        let n = domain.n_active();
        let mut fixed = vec![false; n];
        if bc_mode == BcMode::Strong {
            for &b in &domain.boundary {
                fixed[b as usize] = true;
            }
        }
        Ok(Self { values: vec![0.0; n * target.stride()], fixed, domain, target, params, bc_mode })
    }

    pub fn stride(&self) -> usize {
        self.target.stride()
    }

    pub fn n_nodes(&self) -> usize {
        self.domain.n_active()
    }

    pub fn node(&self, ord: usize) -> &[f64] {
        let s = self.stride();
        &self.values[ord * s..(ord + 1) * s]
    }

    pub fn node_mut(&mut self, ord: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.values[ord * s..(ord + 1) * s]
    }

    pub fn tensor3(&self, ord: usize) -> Result<TracelessSymTensor3> {
        match self.target {
            Target::Tetra => Ok(tensor3(self.node(ord))),
            Target::Mb => invalid("field holds two-dimensional tensors"),
        }
    }

    pub fn tensor2(&self, ord: usize) -> Result<TracelessSymTensor2> {
        match self.target {
            Target::Mb => {
                let q = self.node(ord);
                Ok(TracelessSymTensor2::new([q[0], q[1]]))
            }
            Target::Tetra => invalid("field holds three-dimensional tensors"),
        }
    }

    pub fn potential(&self, ord: usize) -> f64 {
        self.target.potential(self.node(ord))
    }

    pub fn max_potential(&self) -> f64 {
        (0..self.n_nodes()).map(|o| self.potential(o)).fold(0.0, f64::max)
    }

    /// `max_x ‖A(x)‖`.
    pub fn max_norm(&self) -> f64 {
        (0..self.n_nodes()).map(|o| self.target.norm(self.node(o))).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    /// Normal of an active node as a vector in the target space.
    pub fn normal(&self, ord: usize) -> [f64; 3] {
        self.domain.normals[ord]
    }
}

//! Nodal solution fields on 1d/radial meshes and the boundary-profile view
//! that rate extraction consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::problem::{DomainSpec, ProblemSpec};

/// One continuation step of the regularized solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub eps: f64,
    pub newton_iterations: usize,
    pub picard_iterations: usize,
    pub residual: f64,
}

/// Provenance carried by every computed field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SolveMeta {
    pub problem: Option<ProblemSpec>,
    /// Regularization at convergence; 0 for synthetic fields.
    pub eps_final: f64,
    /// Imposed boundary trace eps^(p/(gamma+p-1)).
    pub eps_boundary: f64,
    pub tolerance: f64,
    pub continuation: Vec<ContinuationStep>,
}

/// Mesh, nodal values and derived gradient samples for a computed or
/// synthetic profile u(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub mesh: Mesh1D,
    pub domain: DomainSpec,
    pub values: Vec<f64>,
    pub gradient: Vec<f64>,
    pub meta: SolveMeta,
}

impl SolutionField {
    pub fn new(mesh: Mesh1D, domain: DomainSpec, values: Vec<f64>, meta: SolveMeta) -> Self {
        let gradient = mesh.gradient_of(&values);
        SolutionField { mesh, domain, values, gradient, meta }
    }

    /// Synthetic field from a closure; gradient by the mesh stencils.
    pub fn from_fn(mesh: Mesh1D, domain: DomainSpec, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = mesh.nodes.iter().map(|&x| f(x)).collect();
        Self::new(mesh, domain, values, SolveMeta::default())
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.mesh.interpolate(&self.values, x)
    }

    pub fn gradient_at(&self, x: f64) -> f64 {
        self.mesh.interpolate(&self.gradient, x)
    }

    pub fn min_interior(&self) -> f64 {
        let n = self.mesh.n_cells();
        self.values[1..n].iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Resample onto another mesh over the same coordinate range.
    pub fn resampled(&self, mesh: &Mesh1D) -> Result<SolutionField> {
        if mesh.lo() < self.mesh.lo() - 1e-12 || mesh.hi() > self.mesh.hi() + 1e-12 {
            return Err(Error::MeshMismatch);
        }
        let values: Vec<f64> = mesh.nodes.iter().map(|&x| self.value_at(x)).collect();
        Ok(SolutionField::new(
            mesh.clone(),
            self.domain.clone(),
            values,
            self.meta.clone(),
        ))
    }
}

/// Which boundary component a layer window hangs off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Left end of an interval / inner circle of an annulus.
    Lower,
    /// Right end / outer circle / the sphere of a ball.
    Upper,
}

/// A sample of the profile at distance d from the chosen boundary:
/// (d, u, du/d(distance)), with the derivative taken in the inward direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSample {
    pub d: f64,
    pub u: f64,
    pub du: f64,
}

/// Read-only view of a field as a function of distance-to-boundary on one
/// side; implemented by nodal fields and by synthetic closures.
pub trait BoundaryProfile {
    /// Largest admissible distance (inradius for nodal fields).
    fn max_distance(&self, side: Side) -> f64;

    /// Distance below which samples are not trusted (resolved-region floor:
    /// nodal fields exclude the two cells next to the boundary).
    fn resolution_floor(&self, side: Side) -> f64;

    /// Nodal distances available in [d_min, d_max] on the side, ascending.
    /// Synthetic profiles return an empty list (any distance is admissible).
    fn node_distances(&self, side: Side, d_min: f64, d_max: f64) -> Vec<f64>;

    fn sample(&self, side: Side, d: f64) -> LayerSample;
}

impl BoundaryProfile for SolutionField {
    fn max_distance(&self, _side: Side) -> f64 {
        self.domain.inradius()
    }

    fn resolution_floor(&self, side: Side) -> f64 {
        let n = self.mesh.n_cells();
        match side {
            Side::Lower => self.mesh.nodes[2] - self.mesh.lo(),
            Side::Upper => self.mesh.hi() - self.mesh.nodes[n - 2],
        }
    }

    fn node_distances(&self, side: Side, d_min: f64, d_max: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for &x in &self.mesh.nodes {
            let d = match side {
                Side::Lower => x - self.mesh.lo(),
                Side::Upper => self.mesh.hi() - x,
            };
            if d >= d_min && d <= d_max {
                out.push(d);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    fn sample(&self, side: Side, d: f64) -> LayerSample {
        let (x, orient) = match side {
            Side::Lower => (self.mesh.lo() + d, 1.0),
            Side::Upper => (self.mesh.hi() - d, -1.0),
        };
        LayerSample {
            d,
            u: self.value_at(x),
            du: orient * self.gradient_at(x),
        }
    }
}

/// Synthetic profile u(d) given directly as a function of the distance;
/// the derivative closure is in the distance variable as well.
pub struct SyntheticProfile<F, G>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    pub u: F,
    pub du: G,
    pub inradius: f64,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> BoundaryProfile for SyntheticProfile<F, G> {
    fn max_distance(&self, _side: Side) -> f64 {
        self.inradius
    }

    fn resolution_floor(&self, _side: Side) -> f64 {
        0.0
    }

    fn node_distances(&self, _side: Side, _d_min: f64, _d_max: f64) -> Vec<f64> {
        Vec::new()
    }

    fn sample(&self, _side: Side, d: f64) -> LayerSample {
        LayerSample { d, u: (self.u)(d), du: (self.du)(d) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh1D;

    #[test]
    fn nodal_sampling_matches_both_sides() {
        let mesh = Mesh1D::graded_for(&DomainSpec::Interval { r: 1.0 }, 512).unwrap();
        let f = SolutionField::from_fn(mesh, DomainSpec::Interval { r: 1.0 }, |x| {
            let d = x.min(1.0 - x);
            d * (2.0 - d)
        });
        let lo = f.sample(Side::Lower, 0.01);
        let hi = f.sample(Side::Upper, 0.01);
        assert!((lo.u - hi.u).abs() < 1e-10);
        assert!((lo.u - 0.01 * 1.99).abs() < 1e-6);
        // inward derivative has the same sign seen from both sides
        assert!((lo.du - hi.du).abs() < 1e-6);
        assert!(lo.du > 0.0);
    }

    #[test]
    fn resolution_floor_excludes_two_cells() {
        let mesh = Mesh1D::graded_for(&DomainSpec::Interval { r: 1.0 }, 256).unwrap();
        let h0 = mesh.cell_size(0);
        let h1 = mesh.cell_size(1);
        let f = SolutionField::from_fn(mesh, DomainSpec::Interval { r: 1.0 }, |x| x);
        assert!((f.resolution_floor(Side::Lower) - (h0 + h1)).abs() < 1e-18);
    }
}

//! Double-layer `W[μ](x) = Σ_k s₁^{2α} μ_k ∂q₁(s_k, x)/∂n w_k` and simple-layer
//! `V[ρ](x) = Σ_k ρ_k q₁(s_k, x) w_k` potentials, evaluated by plain quadrature
//! off the surface and through the limit relations on it.
//!
//! Sums run in node order on every target so results do not depend on the
//! thread count.

use std::ops::Deref;

use rayon::prelude::*;

use crate::bie::{check_mesh_params, DiscreteOperator};
use crate::error::{Error, Result};
use crate::kernel::{dq1_dn, grad_q1_into, q1, Params};
use crate::surface::SurfaceMesh;

/// Node samples of a layer density.
#[derive(Debug, Clone, PartialEq)]
pub struct Density(Vec<f64>);

impl Density {
    pub fn new(values: Vec<f64>, mesh: &SurfaceMesh) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::DimensionMismatch { expected: mesh.len(), got: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("density sample {v} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn constant(mesh: &SurfaceMesh, value: f64) -> Self {
        Self(vec![value; mesh.len()])
    }

    pub fn from_fn(mesh: &SurfaceMesh, f: impl Fn(&[f64; 3]) -> f64) -> Result<Self> {
        Self::new(mesh.nodes().iter().map(f).collect(), mesh)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Density {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

fn check_density(mesh: &SurfaceMesh, d: &[f64]) -> Result<()> {
    if d.len() != mesh.len() {
        return Err(Error::DimensionMismatch { expected: mesh.len(), got: d.len() });
    }
    Ok(())
}

fn check_target(x: &[f64]) -> Result<()> {
    if x.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: x.len() });
    }
    if !(x[0] >= 0.0) {
        return Err(Error::OutsideHalfSpace(x[0]));
    }
    Ok(())
}

/// Double-layer potential off the surface; refuses targets at or near a node.
pub fn double_layer(mesh: &SurfaceMesh, mu: &[f64], x: &[f64], p: &Params) -> Result<f64> {
    check_target(x)?;
    mesh.check_off_surface(x)?;
    double_layer_unchecked(mesh, mu, x, p)
}

/// Double-layer quadrature sum without the near-surface guard.
pub fn double_layer_unchecked(mesh: &SurfaceMesh, mu: &[f64], x: &[f64], p: &Params) -> Result<f64> {
    check_mesh_params(mesh, p)?;
    check_density(mesh, mu)?;
    check_target(x)?;
    let (nodes, normals, w, x1w) = (mesh.nodes(), mesh.normals(), mesh.weights(), mesh.x1w());
    let mut s = 0.0;
    for k in 0..mesh.len() {
        if mu[k] == 0.0 || x1w[k] == 0.0 {
            continue;
        }
        let dn = match dq1_dn(&nodes[k], &normals[k], x, p) {
            Err(Error::CoincidentPoints) => return Err(Error::AtNode { node: k }),
            r => r?,
        };
        s += x1w[k] * mu[k] * dn * w[k];
    }
    Ok(s)
}

/// [`double_layer`] over many targets in parallel.
pub fn double_layer_many(mesh: &SurfaceMesh, mu: &[f64], xs: &[[f64; 3]], p: &Params) -> Result<Vec<f64>> {
    xs.par_iter().map(|x| double_layer(mesh, mu, x, p)).collect()
}

/// Limit of the double layer at the nodes from the chosen side: `∓½μ + Kμ`.
pub fn double_layer_trace(op: &DiscreteOperator, mu: &[f64], side: Side) -> Result<Vec<f64>> {
    let k_mu = op.apply(mu)?;
    let sign = match side {
        Side::Interior => -0.5,
        Side::Exterior => 0.5,
    };
    Ok(mu.iter().zip(&k_mu).map(|(m, k)| sign * m + k).collect())
}

/// Simple-layer potential off the surface; refuses targets at or near a node.
pub fn simple_layer(mesh: &SurfaceMesh, rho: &[f64], x: &[f64], p: &Params) -> Result<f64> {
    check_target(x)?;
    mesh.check_off_surface(x)?;
    simple_layer_unchecked(mesh, rho, x, p)
}

/// Simple-layer quadrature sum without the near-surface guard.
pub fn simple_layer_unchecked(mesh: &SurfaceMesh, rho: &[f64], x: &[f64], p: &Params) -> Result<f64> {
    check_mesh_params(mesh, p)?;
    check_density(mesh, rho)?;
    check_target(x)?;
    let (nodes, w) = (mesh.nodes(), mesh.weights());
    let mut s = 0.0;
    for k in 0..mesh.len() {
        if rho[k] == 0.0 {
            continue;
        }
        let q = match q1(&nodes[k], x, p) {
            Err(Error::CoincidentPoints) => return Err(Error::AtNode { node: k }),
            r => r?,
        };
        s += rho[k] * q * w[k];
    }
    Ok(s)
}

/// [`simple_layer`] over many targets in parallel.
pub fn simple_layer_many(mesh: &SurfaceMesh, rho: &[f64], xs: &[[f64; 3]], p: &Params) -> Result<Vec<f64>> {
    xs.par_iter().map(|x| simple_layer(mesh, rho, x, p)).collect()
}

/// Gradient of the simple layer with respect to the target point.
pub fn simple_layer_grad(mesh: &SurfaceMesh, rho: &[f64], x: &[f64], p: &Params) -> Result<[f64; 3]> {
    check_mesh_params(mesh, p)?;
    check_density(mesh, rho)?;
    check_target(x)?;
    mesh.check_off_surface(x)?;
    let (nodes, w) = (mesh.nodes(), mesh.weights());
    let mut g = [0.0; 3];
    let mut gk = [0.0; 3];
    for k in 0..mesh.len() {
        if rho[k] == 0.0 {
            continue;
        }
        grad_q1_into(x, &nodes[k], p, &mut gk)?;
        for i in 0..3 {
            g[i] += rho[k] * gk[i] * w[k];
        }
    }
    Ok(g)
}

/// Weighted normal-derivative trace `t₁^{2α} ∂V[ρ]/∂n` from the chosen side:
/// `±½ρ + Aρ` with `A` the weighted adjoint of the double-layer operator.
pub fn simple_layer_dn_trace(op: &DiscreteOperator, rho: &[f64], side: Side) -> Result<Vec<f64>> {
    let a_rho = op.apply_adjoint(rho)?;
    let sign = match side {
        Side::Interior => 0.5,
        Side::Exterior => -0.5,
    };
    Ok(rho.iter().zip(&a_rho).map(|(r, a)| sign * r + a).collect())
}

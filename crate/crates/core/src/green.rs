//! Green's function `G₁(x; ξ) = q₁(x, ξ) + v₁(x; ξ)` of the Holmgren problem:
//! `G₁ = 0` on `Γ` and `∂G₁/∂x₁ = 0` on `x₁ = 0`.
//!
//! The regular part `v₁` is a double layer with density `μ`,
//! `(I − 2K)μ = 2q₁(·, ξ)`, or equivalently a simple layer with density `ρ`,
//! `(I − 2A)ρ = 2 s₁^{2α} ∂q₁(s, ξ)/∂n_s`. With this `ρ` the weighted normal
//! derivative of `G₁` on `Γ` is `ρ` itself.
//!
//! On the hemisphere `|x| < a` the Green's function is the Kelvin image
//! `G₀₁(x; ξ) = q₁(x, ξ) − (a/|ξ|)^{2α+m−2} q₁(x, a²ξ/|ξ|²)`.

use crate::bie::{assemble, check_mesh_params, DiscreteOperator, SecondKindSolver};
use crate::error::{Error, Result};
use crate::kernel::{dq1_dn, grad_q1_into, q1, Params};
use crate::potentials::{double_layer, simple_layer, Density};
use crate::surface::{dist, Point3, SurfaceMesh};

/// Densities of the regular part for one pole.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenParts {
    pub pole: Point3,
    pub mu: Density,
    pub rho: Density,
}

/// Which layer representation of `v₁` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Double,
    Simple,
}

/// Factorised `I − 2K` for a mesh, reusable across poles.
#[derive(Debug, Clone)]
pub struct GreenSolver<'m> {
    mesh: &'m SurfaceMesh,
    p: Params,
    op: DiscreteOperator,
    solver: SecondKindSolver,
}

impl<'m> GreenSolver<'m> {
    pub fn new(mesh: &'m SurfaceMesh, p: &Params) -> Result<Self> {
        let op = assemble(mesh, p)?;
        Self::from_operator(mesh, op, p)
    }

    pub fn from_operator(mesh: &'m SurfaceMesh, op: DiscreteOperator, p: &Params) -> Result<Self> {
        check_mesh_params(mesh, p)?;
        if op.len() != mesh.len() {
            return Err(Error::DimensionMismatch { expected: mesh.len(), got: op.len() });
        }
        let solver = SecondKindSolver::new(&op, 2.0)?;
        Ok(Self { mesh, p: *p, op, solver })
    }

    pub fn mesh(&self) -> &'m SurfaceMesh {
        self.mesh
    }

    pub fn params(&self) -> &Params {
        &self.p
    }

    pub fn operator(&self) -> &DiscreteOperator {
        &self.op
    }

    pub fn solver(&self) -> &SecondKindSolver {
        &self.solver
    }

    fn check_pole(&self, pole: &Point3) -> Result<()> {
        if !(pole[0] > 0.0) {
            return Err(Error::OutsideHalfSpace(pole[0]));
        }
        self.mesh.check_off_surface(pole)
    }

    /// `ρ` only; the holmgren solver needs nothing else per target.
    pub fn simple_density(&self, pole: &Point3) -> Result<Vec<f64>> {
        self.check_pole(pole)?;
        let rhs = weighted_dn_q1(self.mesh, pole, &self.p)?;
        let rhs: Vec<f64> = rhs.iter().map(|v| 2.0 * v).collect();
        self.solver.solve_adjoint(&rhs)
    }

    pub fn double_density(&self, pole: &Point3) -> Result<Vec<f64>> {
        self.check_pole(pole)?;
        let rhs = self.mesh.nodes().iter().map(|t| Ok(2.0 * q1(t, pole, &self.p)?)).collect::<Result<Vec<f64>>>()?;
        self.solver.solve(&rhs)
    }

    pub fn densities(&self, pole: &Point3) -> Result<GreenParts> {
        let mu = Density::new(self.double_density(pole)?, self.mesh)?;
        let rho = Density::new(self.simple_density(pole)?, self.mesh)?;
        Ok(GreenParts { pole: *pole, mu, rho })
    }
}

/// `s₁^{2α} ∂q₁(s, ξ)/∂n_s` at every node.
pub fn weighted_dn_q1(mesh: &SurfaceMesh, xi: &[f64], p: &Params) -> Result<Vec<f64>> {
    let (nodes, normals, x1w) = (mesh.nodes(), mesh.normals(), mesh.x1w());
    (0..mesh.len())
        .map(|k| if x1w[k] == 0.0 { Ok(0.0) } else { Ok(x1w[k] * dq1_dn(&nodes[k], &normals[k], xi, p)?) })
        .collect()
}

/// Assembles the operator and solves for both densities of one pole.
pub fn green_densities(mesh: &SurfaceMesh, pole: &Point3, p: &Params) -> Result<GreenParts> {
    GreenSolver::new(mesh, p)?.densities(pole)
}

/// `v₁(x; ξ)` from the chosen representation.
pub fn green_regular_part(parts: &GreenParts, mesh: &SurfaceMesh, x: &[f64], p: &Params, via: Layer) -> Result<f64> {
    match via {
        Layer::Double => double_layer(mesh, &parts.mu, x, p),
        Layer::Simple => simple_layer(mesh, &parts.rho, x, p),
    }
}

/// `G₁(x; ξ) = q₁(x, ξ) + v₁(x; ξ)`.
pub fn green_function(parts: &GreenParts, mesh: &SurfaceMesh, x: &[f64], p: &Params, via: Layer) -> Result<f64> {
    Ok(q1(x, &parts.pole, p)? + green_regular_part(parts, mesh, x, p, via)?)
}

/// Image point `a²ξ/|ξ|²` and image strength `(a/|ξ|)^{2α+m−2}`.
pub fn kelvin_image(xi: &[f64], a: f64, p: &Params) -> Result<(Vec<f64>, f64)> {
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::InvalidParams("pole at the origin has no Kelvin image".into()));
    }
    let s = a * a / r2;
    Ok((xi.iter().map(|v| s * v).collect(), (a / r2.sqrt()).powf(p.kelvin_exponent())))
}

/// Closed-form Green's function of the hemisphere of radius `a`.
pub fn green_hemisphere(x: &[f64], xi: &[f64], a: f64, p: &Params) -> Result<f64> {
    let (image, strength) = kelvin_image(xi, a, p)?;
    Ok(q1(x, xi, p)? - strength * q1(x, &image, p)?)
}

/// Gradient of [`green_hemisphere`] with respect to `x`.
pub fn green_hemisphere_grad(x: &[f64], xi: &[f64], a: f64, p: &Params) -> Result<Vec<f64>> {
    let (image, strength) = kelvin_image(xi, a, p)?;
    let mut g = vec![0.0; x.len()];
    let mut gi = vec![0.0; x.len()];
    grad_q1_into(x, xi, p, &mut g)?;
    grad_q1_into(x, &image, p, &mut gi)?;
    for (a, b) in g.iter_mut().zip(&gi) {
        *a -= strength * b;
    }
    Ok(g)
}

/// `H₁(x; ξ) = ∫_Γ G₀₁(t; ξ) ρ(t; x) dΓ`, where `parts` carries the simple-layer
/// density for the pole `x`. For a domain inside the hemisphere of radius `a`,
/// `G₁(x; ξ) = G₀₁(x; ξ) + H₁(x; ξ)`.
pub fn h1_correction(mesh: &SurfaceMesh, parts: &GreenParts, x: &[f64], xi: &[f64], a: f64, p: &Params) -> Result<f64> {
    if dist(x, &parts.pole) != 0.0 {
        return Err(Error::InvalidParams("densities were computed for a different pole than x".into()));
    }
    mesh.check_off_surface(xi)?;
    let mut s = 0.0;
    for (k, t) in mesh.nodes().iter().enumerate() {
        s += green_hemisphere(t, xi, a, p)? * parts.rho[k] * mesh.weights()[k];
    }
    Ok(s)
}

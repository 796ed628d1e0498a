//! The Holmgren problem: `H(u) = 0` in `Ω`, `u = φ` on `Γ`, and
//! `lim_{x₁→0} x₁^{2α} ∂u/∂x₁ = ν` on the base `Γ₁`.
//!
//! The solution is
//! `u(x₀) = −∫_{Γ₁} ν G₁((0,x′); x₀) dx′ − ∫_Γ φ x₁^{2α} ∂G₁(x; x₀)/∂n dΓ`.
//! With the simple-layer density `ρ(·; x₀)` of [`crate::green`], the weighted
//! normal derivative of `G₁` on `Γ` is `ρ`, and `G₁` on the base is
//! `q₁ + Σ_k ρ_k q₁(t_k, ·) w_k`.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::bie::check_mesh_params;
use crate::error::{Error, Result};
use crate::green::{green_hemisphere, green_hemisphere_grad, GreenSolver};
use crate::kernel::{grad_q1, q1, Params};
use crate::potentials::double_layer_unchecked;
use crate::quadrature::{gauss_legendre, periodic};
use crate::residual::{operator_residual, FdOrder};
use crate::surface::{csv_err, dist, parse_row, BaseDisk, Point3, SurfaceMesh};

/// Dirichlet samples on `Γ` nodes and weighted-flux samples on base nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    phi: Vec<f64>,
    nu: Vec<f64>,
}

impl BoundaryData {
    pub fn from_samples(mesh: &SurfaceMesh, base: &BaseDisk, phi: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if phi.len() != mesh.len() {
            return Err(Error::DimensionMismatch { expected: mesh.len(), got: phi.len() });
        }
        if nu.len() != base.len() {
            return Err(Error::DimensionMismatch { expected: base.len(), got: nu.len() });
        }
        if phi.iter().chain(&nu).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("boundary data contains non-finite samples".into()));
        }
        Ok(Self { phi, nu })
    }

    pub fn from_fns(
        mesh: &SurfaceMesh,
        base: &BaseDisk,
        phi: impl Fn(&Point3) -> f64,
        nu: impl Fn(&Point3) -> f64,
    ) -> Result<Self> {
        Self::from_samples(mesh, base, mesh.nodes().iter().map(phi).collect(), base.nodes().iter().map(nu).collect())
    }

    pub fn zero(mesh: &SurfaceMesh, base: &BaseDisk) -> Self {
        Self { phi: vec![0.0; mesh.len()], nu: vec![0.0; base.len()] }
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Sample-wise `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.phi.len() != other.phi.len() || self.nu.len() != other.nu.len() {
            return Err(Error::DimensionMismatch { expected: self.phi.len(), got: other.phi.len() });
        }
        Ok(Self {
            phi: self.phi.iter().zip(&other.phi).map(|(a, b)| a + b).collect(),
            nu: self.nu.iter().zip(&other.nu).map(|(a, b)| a + b).collect(),
        })
    }

    /// `theta,phi_angle,value` rows for `Γ`, in mesh order.
    pub fn write_gamma_csv<W: Write>(&self, mesh: &SurfaceMesh, out: W) -> Result<()> {
        let rows = (0..mesh.len()).map(|k| {
            let (t, f) = mesh.angles(k);
            [t, f, self.phi[k]]
        });
        write_triples(out, ["theta", "phi_angle", "value"], rows)
    }

    /// `r,phi_angle,value` rows for the base, in node order.
    pub fn write_base_csv<W: Write>(&self, base: &BaseDisk, out: W) -> Result<()> {
        let rows = (0..base.len()).map(|k| {
            let (r, f) = base.polar(k);
            [r, f, self.nu[k]]
        });
        write_triples(out, ["r", "phi_angle", "value"], rows)
    }

    /// Reads the two files written above. Node positions in the files must match
    /// the meshes.
    pub fn read_csv<R1: Read, R2: Read>(mesh: &SurfaceMesh, base: &BaseDisk, gamma: R1, base_file: R2) -> Result<Self> {
        let g = read_triples(gamma, ["theta", "phi_angle", "value"])?;
        let b = read_triples(base_file, ["r", "phi_angle", "value"])?;
        if g.len() != mesh.len() {
            return Err(Error::DimensionMismatch { expected: mesh.len(), got: g.len() });
        }
        if b.len() != base.len() {
            return Err(Error::DimensionMismatch { expected: base.len(), got: b.len() });
        }
        for (k, row) in g.iter().enumerate() {
            let (t, f) = mesh.angles(k);
            if (t - row[0]).abs() > 1e-9 || angle_gap(f, row[1]) > 1e-9 {
                return Err(Error::Parse(format!("Γ row {k} does not match mesh node angles")));
            }
        }
        for (k, row) in b.iter().enumerate() {
            let (r, f) = base.polar(k);
            if (r - row[0]).abs() > 1e-9 || angle_gap(f, row[1]) > 1e-9 {
                return Err(Error::Parse(format!("base row {k} does not match disk node positions")));
            }
        }
        Self::from_samples(mesh, base, g.iter().map(|r| r[2]).collect(), b.iter().map(|r| r[2]).collect())
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    d.min(2.0 * std::f64::consts::PI - d)
}

fn write_triples<W: Write>(out: W, header: [&str; 3], rows: impl Iterator<Item = [f64; 3]>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(header).map_err(csv_err)?;
    for r in rows {
        wtr.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

fn read_triples<R: Read>(input: R, header: [&str; 3]) -> Result<Vec<[f64; 3]>> {
    let mut rdr = csv::Reader::from_reader(input);
    let h = rdr.headers().map_err(csv_err)?;
    if h.iter().map(str::trim).ne(header) {
        return Err(Error::Parse(format!("expected header {}", header.join(","))));
    }
    rdr.records()
        .map(|rec| {
            let v = parse_row(&rec.map_err(csv_err)?, 3)?;
            Ok([v[0], v[1], v[2]])
        })
        .collect()
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Result<[f64; 3]> + Send + Sync>;

/// An exact solution with its gradient and base flux `ν(x′) = lim x₁^{2α} u_{x₁}`.
#[derive(Clone)]
pub struct ManufacturedSolution {
    name: String,
    u: ScalarFn,
    grad: VectorFn,
    nu: ScalarFn,
}

impl std::fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedSolution").field("name", &self.name).finish_non_exhaustive()
    }
}

impl ManufacturedSolution {
    pub fn new<U, G, N>(name: impl Into<String>, u: U, grad: G, nu: N) -> Self
    where
        U: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Result<[f64; 3]> + Send + Sync + 'static,
        N: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self { name: name.into(), u: Arc::new(u), grad: Arc::new(grad), nu: Arc::new(nu) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        (self.u)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<[f64; 3]> {
        (self.grad)(x)
    }

    pub fn base_flux(&self, x: &[f64]) -> Result<f64> {
        (self.nu)(x)
    }

    /// Boundary data sampled at the quadrature nodes.
    pub fn data(&self, mesh: &SurfaceMesh, base: &BaseDisk) -> Result<BoundaryData> {
        let phi = mesh.nodes().iter().map(|x| self.value(x)).collect::<Result<Vec<_>>>()?;
        let nu = base.nodes().iter().map(|x| self.base_flux(x)).collect::<Result<Vec<_>>>()?;
        BoundaryData::from_samples(mesh, base, phi, nu)
    }

    /// Largest normalised fourth-order residual over `probes`.
    pub fn max_residual(&self, probes: &[Point3], alpha: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for x in probes {
            let r = operator_residual(|y| self.value(y), x, alpha, 1e-3, FdOrder::Fourth, 1.0)?;
            worst = worst.max(r.normalised());
        }
        Ok(worst)
    }
}

pub const REGISTRATION_GATE: f64 = 1e-6;

/// Exterior pole of the registered fundamental-solution case.
pub const EXTERIOR_POLE: Point3 = [0.5, 1.5, 0.3];

/// Deterministic probe points in `{|x| ≤ 0.8, x₁ ≥ 0.1}` (Halton sequence).
pub fn probe_points(n: usize) -> Vec<Point3> {
    fn halton(mut i: usize, b: usize) -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        r
    }
    let mut out = Vec::with_capacity(n);
    let mut i = 1;
    while out.len() < n {
        let p = [0.1 + 0.7 * halton(i, 2), 1.6 * halton(i, 3) - 0.8, 1.6 * halton(i, 5) - 0.8];
        if p.iter().map(|v| v * v).sum::<f64>() <= 0.64 {
            out.push(p);
        }
        i += 1;
    }
    out
}

/// The catalogue `1, x₂, x₃, x₂x₃, x₂²−x₃², x₁^{1−2α}, x₁^{1−2α}x₂` and
/// `q₁(·, ξ)` for an exterior pole, each checked against the residual gate.
pub fn register_manufactured(p: &Params) -> Result<Vec<ManufacturedSolution>> {
    if p.m() != 3 {
        return Err(Error::InvalidParams("manufactured solutions are three-dimensional".into()));
    }
    let a = p.alpha();
    let e = 1.0 - 2.0 * a;
    let zero = |_: &[f64]| Ok(0.0);
    let pc = *p;
    let list = vec![
        ManufacturedSolution::new("one", |_| Ok(1.0), |_| Ok([0.0; 3]), zero),
        ManufacturedSolution::new("x2", |x| Ok(x[1]), |_| Ok([0.0, 1.0, 0.0]), zero),
        ManufacturedSolution::new("x3", |x| Ok(x[2]), |_| Ok([0.0, 0.0, 1.0]), zero),
        ManufacturedSolution::new("x2x3", |x| Ok(x[1] * x[2]), |x| Ok([0.0, x[2], x[1]]), zero),
        ManufacturedSolution::new(
            "x2^2-x3^2",
            |x| Ok(x[1] * x[1] - x[2] * x[2]),
            |x| Ok([0.0, 2.0 * x[1], -2.0 * x[2]]),
            zero,
        ),
        ManufacturedSolution::new(
            "x1^(1-2a)",
            move |x| Ok(x[0].powf(e)),
            move |x| Ok([e * x[0].powf(-2.0 * a), 0.0, 0.0]),
            move |_| Ok(e),
        ),
        ManufacturedSolution::new(
            "x1^(1-2a)x2",
            move |x| Ok(x[0].powf(e) * x[1]),
            move |x| Ok([e * x[0].powf(-2.0 * a) * x[1], x[0].powf(e), 0.0]),
            move |x| Ok(e * x[1]),
        ),
        ManufacturedSolution::new(
            "q1_exterior",
            move |x| q1(x, &EXTERIOR_POLE, &pc),
            move |x| {
                let g = grad_q1(x, &EXTERIOR_POLE, &pc)?;
                Ok([g[0], g[1], g[2]])
            },
            zero,
        ),
    ];
    let probes = probe_points(12);
    for s in &list {
        let r = s.max_residual(&probes, a)?;
        if !(r <= REGISTRATION_GATE) {
            return Err(Error::RegistrationGate { name: s.name.clone(), residual: r });
        }
    }
    Ok(list)
}

fn check_data(mesh: &SurfaceMesh, base: &BaseDisk, data: &BoundaryData) -> Result<()> {
    if data.phi.len() != mesh.len() {
        return Err(Error::DimensionMismatch { expected: mesh.len(), got: data.phi.len() });
    }
    if data.nu.len() != base.len() {
        return Err(Error::DimensionMismatch { expected: base.len(), got: data.nu.len() });
    }
    Ok(())
}

/// BEM solver for a general surface of revolution: one factorisation of
/// `I − 2K` and the base-to-surface kernel matrix, shared by all targets.
pub struct HolmgrenSolver<'m> {
    base: &'m BaseDisk,
    green: GreenSolver<'m>,
    /// `q₁(t_k, b)` for base node `b` (row) and surface node `t_k` (column).
    base_kernel: Vec<f64>,
}

impl<'m> HolmgrenSolver<'m> {
    pub fn new(mesh: &'m SurfaceMesh, base: &'m BaseDisk, p: &Params) -> Result<Self> {
        Self::from_green(GreenSolver::new(mesh, p)?, base)
    }

    pub fn from_green(green: GreenSolver<'m>, base: &'m BaseDisk) -> Result<Self> {
        let mesh = green.mesh();
        let p = *green.params();
        let n = mesh.len();
        let mut base_kernel = vec![0.0; base.len() * n];
        base_kernel.par_chunks_mut(n.max(1)).zip(base.nodes().par_iter()).try_for_each(|(row, b)| {
            for (v, t) in row.iter_mut().zip(mesh.nodes()) {
                *v = q1(t, b, &p)?;
            }
            Ok::<(), Error>(())
        })?;
        Ok(Self { base, green, base_kernel })
    }

    pub fn green(&self) -> &GreenSolver<'m> {
        &self.green
    }

    fn check_target(&self, x: &Point3) -> Result<()> {
        if !(x[0] > 0.0) {
            return Err(Error::OutsideHalfSpace(x[0]));
        }
        self.green.mesh().check_off_surface(x)
    }

    /// Solution at each target; densities are solved per target.
    pub fn solve(&self, data: &BoundaryData, targets: &[Point3]) -> Result<Vec<f64>> {
        let mesh = self.green.mesh();
        check_data(mesh, self.base, data)?;
        let p = self.green.params();
        let n = mesh.len();
        targets
            .par_iter()
            .map(|x0| {
                self.check_target(x0)?;
                let rho = self.green.simple_density(x0)?;
                let w = mesh.weights();
                let mut gamma_term = 0.0;
                for k in 0..n {
                    gamma_term += data.phi[k] * rho[k] * w[k];
                }
                let rho_w: Vec<f64> = rho.iter().zip(w).map(|(r, w)| r * w).collect();
                let mut base_term = 0.0;
                for (b, (xb, wb)) in self.base.nodes().iter().zip(self.base.weights()).enumerate() {
                    if data.nu[b] == 0.0 {
                        continue;
                    }
                    let row = &self.base_kernel[b * n..(b + 1) * n];
                    let v1: f64 = row.iter().zip(&rho_w).map(|(q, r)| q * r).sum();
                    base_term += data.nu[b] * (q1(xb, x0, p)? + v1) * wb;
                }
                Ok(-base_term - gamma_term)
            })
            .collect()
    }

    /// Same discrete solution by one solve: with `g(y) = Σ_b ν_b w_b q₁(b, y)`
    /// and `(I − 2K)θ = 2(φ + g|_Γ)`, `u(x₀) = −g(x₀) − W[θ](x₀)`.
    pub fn solve_dual(&self, data: &BoundaryData, targets: &[Point3]) -> Result<Vec<f64>> {
        let mesh = self.green.mesh();
        check_data(mesh, self.base, data)?;
        let p = self.green.params();
        let n = mesh.len();
        let mut g_gamma = vec![0.0; n];
        for (b, wb) in self.base.weights().iter().enumerate() {
            let c = data.nu[b] * wb;
            if c == 0.0 {
                continue;
            }
            for (g, q) in g_gamma.iter_mut().zip(&self.base_kernel[b * n..(b + 1) * n]) {
                *g += c * q;
            }
        }
        let rhs: Vec<f64> = data.phi.iter().zip(&g_gamma).map(|(f, g)| 2.0 * (f + g)).collect();
        let theta = self.green.solver().solve(&rhs)?;
        targets
            .par_iter()
            .map(|x0| {
                self.check_target(x0)?;
                let mut g0 = 0.0;
                for (b, (xb, wb)) in self.base.nodes().iter().zip(self.base.weights()).enumerate() {
                    if data.nu[b] != 0.0 {
                        g0 += data.nu[b] * wb * q1(xb, x0, p)?;
                    }
                }
                Ok(-g0 - double_layer_unchecked(mesh, &theta, x0, p)?)
            })
            .collect()
    }
}

/// Convenience wrapper: build a [`HolmgrenSolver`] and solve once.
pub fn solve(
    mesh: &SurfaceMesh,
    base: &BaseDisk,
    data: &BoundaryData,
    targets: &[Point3],
    p: &Params,
) -> Result<Vec<f64>> {
    HolmgrenSolver::new(mesh, base, p)?.solve(data, targets)
}

/// Solution on the hemisphere of radius `a` from the closed-form Green's
/// function; no density solves.
pub fn solve_hemisphere(
    a: f64,
    base: &BaseDisk,
    mesh: &SurfaceMesh,
    data: &BoundaryData,
    targets: &[Point3],
    p: &Params,
) -> Result<Vec<f64>> {
    check_mesh_params(mesh, p)?;
    check_data(mesh, base, data)?;
    if (base.radius() - a).abs() > 1e-12 * a {
        return Err(Error::InvalidMesh(format!("base radius {} differs from hemisphere radius {a}", base.radius())));
    }
    if let Some(k) = mesh.nodes().iter().position(|x| (dist(x, &[0.0; 3]) - a).abs() > 1e-10 * a) {
        return Err(Error::InvalidMesh(format!("node {k} is not on the hemisphere of radius {a}")));
    }
    targets
        .par_iter()
        .map(|x0| {
            if !(x0[0] > 0.0) || dist(x0, &[0.0; 3]) >= a {
                return Err(Error::InvalidParams(format!("target {x0:?} is not inside the hemisphere")));
            }
            mesh.check_off_surface(x0)?;
            let mut base_term = 0.0;
            for (b, (xb, wb)) in base.nodes().iter().zip(base.weights()).enumerate() {
                if data.nu[b] != 0.0 {
                    base_term += data.nu[b] * green_hemisphere(xb, x0, a, p)? * wb;
                }
            }
            let mut gamma_term = 0.0;
            for (k, (x, nrm)) in mesh.nodes().iter().zip(mesh.normals()).enumerate() {
                if data.phi[k] == 0.0 || mesh.x1w()[k] == 0.0 {
                    continue;
                }
                let g = green_hemisphere_grad(x, x0, a, p)?;
                let dn = g[0] * nrm[0] + g[1] * nrm[1] + g[2] * nrm[2];
                gamma_term += data.phi[k] * mesh.x1w()[k] * dn * mesh.weights()[k];
            }
            Ok(-base_term - gamma_term)
        })
        .collect()
}

/// Both sides of the energy identity on the hemisphere of radius `base.radius()`:
/// `lhs = ∫_Ω x₁^{2α}|∇u|² dx` and `rhs = ∫_Γ x₁^{2α} u ∂u/∂n dΓ − ∫_{Γ₁} u ν dx′`.
///
/// The volume rule is Gauss–Legendre in `r`, Gauss–Legendre in
/// `s = cos^{1−2α}θ` (which absorbs the `x₁^{−2α}` growth of `|∇u|²` for
/// `x₁`-power solutions), and periodic in `φ`, with `n × n × 2n` points.
pub fn energy_identity_check(
    mesh: &SurfaceMesh,
    base: &BaseDisk,
    u: &ManufacturedSolution,
    p: &Params,
    volume_resolution: usize,
) -> Result<(f64, f64)> {
    check_mesh_params(mesh, p)?;
    if volume_resolution < 2 {
        return Err(Error::InvalidParams("volume resolution must be at least 2".into()));
    }
    let a = base.radius();
    let alpha = p.alpha();
    let e = 1.0 - 2.0 * alpha;
    let n = volume_resolution;
    let (rs, wr) = gauss_legendre(n, 0.0, a);
    let (ss, ws) = gauss_legendre(n, 0.0, 1.0);
    let (phis, hphi) = periodic(2 * n);
    let mut lhs = 0.0;
    for (r, wr) in rs.iter().zip(&wr) {
        for (s, ws) in ss.iter().zip(&ws) {
            // cosθ = s^{1/(1−2α)}, d(cosθ) = cos^{2α}θ ds / (1−2α)
            let c = s.powf(1.0 / e);
            let st = (1.0 - c * c).max(0.0).sqrt();
            let jac = r * r * c.powf(2.0 * alpha) / e;
            let x1 = r * c;
            for phi in &phis {
                let x = [x1, r * st * phi.cos(), r * st * phi.sin()];
                let g = u.gradient(&x)?;
                let g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
                lhs += x1.powf(2.0 * alpha) * g2 * jac * wr * ws * hphi;
            }
        }
    }
    let mut rhs = 0.0;
    for (k, (x, nrm)) in mesh.nodes().iter().zip(mesh.normals()).enumerate() {
        let g = u.gradient(x)?;
        let dn = g[0] * nrm[0] + g[1] * nrm[1] + g[2] * nrm[2];
        rhs += mesh.x1w()[k] * u.value(x)? * dn * mesh.weights()[k];
    }
    for (x, w) in base.nodes().iter().zip(base.weights()) {
        rhs -= u.value(x)? * u.base_flux(x)? * w;
    }
    Ok((lhs, rhs))
}

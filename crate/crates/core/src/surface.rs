//! Quadrature meshes for the curved boundary `Γ` (a surface of revolution
//! about the `x₁` axis that meets `x₁ = 0` at a right angle) and the flat base
//! `Γ₁`. Three dimensions only.
//!
//! Nodes are laid out row-major: polar index outer, azimuthal index inner.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, graded_polar, periodic};

pub type Point3 = [f64; 3];

type CurveFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Meridian `t ↦ (x₁(t), ρ(t))`, `t ∈ [0, 1]`, from the axis (`t = 0`) down to
/// the base plane (`t = 1`).
pub struct GeneratorCurve {
    x1: CurveFn,
    rho: CurveFn,
    dx1: CurveFn,
    drho: CurveFn,
}

impl std::fmt::Debug for GeneratorCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratorCurve")
            .field("top", &(self.x1(0.0), self.rho(0.0)))
            .field("rim", &(self.x1(1.0), self.rho(1.0)))
            .finish()
    }
}

impl GeneratorCurve {
    const CLOSURE_TOL: f64 = 1e-12;

    pub fn new<A, B, C, D>(x1: A, rho: B, dx1: C, drho: D) -> Result<Self>
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g = Self { x1: Box::new(x1), rho: Box::new(rho), dx1: Box::new(dx1), drho: Box::new(drho) };
        let scale = g.x1(0.0).abs().max(g.rho(1.0).abs()).max(1.0);
        if g.rho(0.0).abs() > Self::CLOSURE_TOL * scale {
            return Err(Error::InvalidMesh(format!("generator does not close on the axis: rho(0) = {}", g.rho(0.0))));
        }
        if g.x1(1.0).abs() > Self::CLOSURE_TOL * scale {
            return Err(Error::InvalidMesh(format!("generator does not reach x1 = 0: x1(1) = {}", g.x1(1.0))));
        }
        if g.dx1(1.0) == 0.0 || g.rho(1.0) <= 0.0 || g.x1(0.0) <= 0.0 {
            return Err(Error::InvalidMesh(
                "generator must leave the axis at x1 > 0 and meet the base transversally".into(),
            ));
        }
        Ok(g)
    }

    /// Quarter circle of radius `a`.
    pub fn hemisphere(a: f64) -> Result<Self> {
        Self::half_spheroid(a, a)
    }

    /// Half of the spheroid with semi-axis `c` along `x₁` and equatorial radius `a`.
    pub fn half_spheroid(c: f64, a: f64) -> Result<Self> {
        if !(c > 0.0 && a > 0.0) {
            return Err(Error::InvalidMesh(format!("spheroid semi-axes must be positive, got {c}, {a}")));
        }
        let h = 0.5 * PI;
        Self::new(
            move |t| if t == 1.0 { 0.0 } else { c * (h * t).cos() },
            move |t| a * (h * t).sin(),
            move |t| -c * h * (h * t).sin(),
            move |t| a * h * (h * t).cos(),
        )
    }

    pub fn x1(&self, t: f64) -> f64 {
        (self.x1)(t)
    }

    pub fn rho(&self, t: f64) -> f64 {
        (self.rho)(t)
    }

    pub fn dx1(&self, t: f64) -> f64 {
        (self.dx1)(t)
    }

    pub fn drho(&self, t: f64) -> f64 {
        (self.drho)(t)
    }
}

/// Quadrature on `Γ`. `x1w[k]` caches `s₁^{2α}` for the `α` the mesh was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    nodes: Vec<Point3>,
    normals: Vec<Point3>,
    weights: Vec<f64>,
    x1w: Vec<f64>,
    alpha: f64,
    shape: (usize, usize),
}

fn check_grid(n_polar: usize, n_phi: usize, grading: f64) -> Result<()> {
    if n_polar < 4 || n_phi < 4 {
        return Err(Error::InvalidMesh(format!("mesh needs at least 4x4 nodes, got {n_polar}x{n_phi}")));
    }
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(Error::InvalidMesh(format!("grading exponent must be >= 1, got {grading}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && 2.0 * alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha must satisfy 0 < 2*alpha < 1, got {alpha}")));
    }
    Ok(())
}

/// Polar nodes `u ↦ t(u)` on `[0, 1]` after the grading map, with weights
/// including its Jacobian. Returned in the normalised variable `t = 2θ/π`.
fn graded_parameter(n: usize, grading: f64) -> Vec<(f64, f64)> {
    let (u, wu) = gauss_legendre(n, 0.0, 1.0);
    u.iter()
        .zip(&wu)
        .map(|(&u, &w)| {
            let (theta, dtheta) = graded_polar(u, grading);
            (theta / (0.5 * PI), w * dtheta / (0.5 * PI))
        })
        .collect()
}

impl SurfaceMesh {
    pub fn from_parts(nodes: Vec<Point3>, normals: Vec<Point3>, weights: Vec<f64>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let n = nodes.len();
        if normals.len() != n || weights.len() != n {
            return Err(Error::InvalidMesh("nodes, normals and weights differ in length".into()));
        }
        for (k, (p, nrm)) in nodes.iter().zip(&normals).enumerate() {
            let len = (nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]).sqrt();
            if (len - 1.0).abs() > 1e-10 || !(p[0] >= 0.0) || !(weights[k] > 0.0) {
                return Err(Error::InvalidMesh(format!("node {k} is invalid")));
            }
        }
        let x1w = nodes.iter().map(|p| p[0].powf(2.0 * alpha)).collect();
        Ok(Self { nodes, normals, weights, x1w, alpha, shape: (n, 1) })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn normals(&self) -> &[Point3] {
        &self.normals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn x1w(&self) -> &[f64] {
        &self.x1w
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(polar rows, azimuthal columns)`; a loaded mesh reports `(N, 1)`.
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Local node spacing `√w_k`.
    pub fn spacing(&self, k: usize) -> f64 {
        self.weights[k].sqrt()
    }

    /// Index and distance of the node closest to `x`.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (k, p) in self.nodes.iter().enumerate() {
            let d = dist(p, x);
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }

    /// Rejects evaluation points that coincide with a node or lie within half
    /// the local spacing of one.
    pub fn check_off_surface(&self, x: &[f64]) -> Result<()> {
        let (k, d) = self.nearest(x);
        if d == 0.0 {
            return Err(Error::AtNode { node: k });
        }
        let h = self.spacing(k);
        if d < 0.5 * h {
            return Err(Error::NearSurface { distance: d, spacing: h });
        }
        Ok(())
    }

    /// Polar angle from the `x₁` axis and azimuth in `[0, 2π)` of node `k`.
    pub fn angles(&self, k: usize) -> (f64, f64) {
        let p = &self.nodes[k];
        let theta = p[1].hypot(p[2]).atan2(p[0]);
        (theta, p[2].atan2(p[1]).rem_euclid(2.0 * PI))
    }

    /// Writes columns `x1,x2,x3,n1,n2,n3,w,x1w`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["x1", "x2", "x3", "n1", "n2", "n3", "w", "x1w"]).map_err(csv_err)?;
        for k in 0..self.len() {
            let p = &self.nodes[k];
            let n = &self.normals[k];
            let row = [p[0], p[1], p[2], n[0], n[1], n[2], self.weights[k], self.x1w[k]];
            wtr.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the format of [`SurfaceMesh::write_csv`]; the `x1w` column must
    /// agree with `alpha`.
    pub fn read_csv<R: Read>(input: R, alpha: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let (mut nodes, mut normals, mut weights, mut x1w) = (vec![], vec![], vec![], vec![]);
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let v = parse_row(&rec, 8)?;
            nodes.push([v[0], v[1], v[2]]);
            normals.push([v[3], v[4], v[5]]);
            weights.push(v[6]);
            x1w.push(v[7]);
        }
        let mesh = Self::from_parts(nodes, normals, weights, alpha)?;
        for (k, (a, b)) in mesh.x1w.iter().zip(&x1w).enumerate() {
            if (a - b).abs() > 1e-12 * a.max(1.0) {
                return Err(Error::InvalidMesh(format!("x1w column disagrees with alpha = {alpha} at row {k}")));
            }
        }
        Ok(mesh)
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub(crate) fn parse_row(rec: &csv::StringRecord, width: usize) -> Result<Vec<f64>> {
    if rec.len() != width {
        return Err(Error::Parse(format!("expected {width} columns, found {}", rec.len())));
    }
    rec.iter().map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{f:?}: {e}")))).collect()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Hemisphere `|x| = a`, `x₁ > 0`, with polar angle graded toward the
/// equator: `θ(u) = (π/2)(1 − (1−u)^grading)` on a Gauss–Legendre rule in `u`.
pub fn hemisphere_mesh(a: f64, n_theta: usize, n_phi: usize, grading: f64, alpha: f64) -> Result<SurfaceMesh> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidMesh(format!("radius must be positive, got {a}")));
    }
    check_grid(n_theta, n_phi, grading)?;
    check_alpha(alpha)?;
    let (phis, hphi) = periodic(n_phi);
    let rows = graded_parameter(n_theta, grading);
    let n = n_theta * n_phi;
    let mut mesh = SurfaceMesh {
        nodes: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        x1w: Vec::with_capacity(n),
        alpha,
        shape: (n_theta, n_phi),
    };
    for &(t, wt) in &rows {
        let theta = 0.5 * PI * t;
        let (st, ct) = theta.sin_cos();
        let w = a * a * st * wt * 0.5 * PI * hphi;
        for &phi in &phis {
            let (sp, cp) = phi.sin_cos();
            let nrm = [ct, st * cp, st * sp];
            let p = [a * nrm[0], a * nrm[1], a * nrm[2]];
            mesh.x1w.push(p[0].powf(2.0 * alpha));
            mesh.nodes.push(p);
            mesh.normals.push(nrm);
            mesh.weights.push(w);
        }
    }
    Ok(mesh)
}

/// Surface of revolution of `g`, graded toward the rim like [`hemisphere_mesh`].
pub fn revolve_mesh(g: &GeneratorCurve, n_t: usize, n_phi: usize, grading: f64, alpha: f64) -> Result<SurfaceMesh> {
    check_grid(n_t, n_phi, grading)?;
    check_alpha(alpha)?;
    let (phis, hphi) = periodic(n_phi);
    let rows = graded_parameter(n_t, grading);
    let reference = [0.5 * g.x1(0.0), 0.0, 0.0];
    let n = n_t * n_phi;
    let mut mesh = SurfaceMesh {
        nodes: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        x1w: Vec::with_capacity(n),
        alpha,
        shape: (n_t, n_phi),
    };
    let mut flip = None;
    for &(t, wt) in &rows {
        let (x1, rho, dx1, drho) = (g.x1(t), g.rho(t), g.dx1(t), g.drho(t));
        let speed = dx1.hypot(drho);
        if !(x1 > 0.0) || !(rho > 0.0) || speed == 0.0 {
            return Err(Error::InvalidMesh(format!("generator degenerates at t = {t}")));
        }
        let w = rho * speed * wt * hphi;
        for &phi in &phis {
            let (sp, cp) = phi.sin_cos();
            let p = [x1, rho * cp, rho * sp];
            let mut nrm = [drho / speed, -dx1 / speed * cp, -dx1 / speed * sp];
            let outward = (0..3).map(|i| nrm[i] * (p[i] - reference[i])).sum::<f64>() > 0.0;
            let f = *flip.get_or_insert(!outward);
            if f {
                nrm = [-nrm[0], -nrm[1], -nrm[2]];
            }
            mesh.x1w.push(x1.powf(2.0 * alpha));
            mesh.nodes.push(p);
            mesh.normals.push(nrm);
            mesh.weights.push(w);
        }
    }
    Ok(mesh)
}

/// Quadrature on the disk `{x₁ = 0, |x′| < radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseDisk {
    radius: f64,
    nodes: Vec<Point3>,
    weights: Vec<f64>,
    shape: (usize, usize),
}

impl BaseDisk {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Polar radius and azimuth in `[0, 2π)` of node `k`.
    pub fn polar(&self, k: usize) -> (f64, f64) {
        let p = &self.nodes[k];
        (p[1].hypot(p[2]), p[2].atan2(p[1]).rem_euclid(2.0 * PI))
    }
}

/// Gauss–Legendre in `r` times the periodic rule in angle.
pub fn base_disk(radius: f64, n_r: usize, n_phi: usize) -> Result<BaseDisk> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidMesh(format!("radius must be positive, got {radius}")));
    }
    check_grid(n_r, n_phi, 1.0)?;
    let (rs, wr) = gauss_legendre(n_r, 0.0, radius);
    let (phis, hphi) = periodic(n_phi);
    let mut nodes = Vec::with_capacity(n_r * n_phi);
    let mut weights = Vec::with_capacity(n_r * n_phi);
    for (r, w) in rs.iter().zip(&wr) {
        for &phi in &phis {
            let (sp, cp) = phi.sin_cos();
            nodes.push([0.0, r * cp, r * sp]);
            weights.push(r * w * hphi);
        }
    }
    Ok(BaseDisk { radius, nodes, weights, shape: (n_r, n_phi) })
}

/// Weighted flux `∫_Γ s₁^{2α} ∂u/∂n dΓ` plus the base contribution. On the
/// base the outward normal is `−e₁` and the weight vanishes, so the base term
/// is `−∫ ν` when the weighted limit `ν` is supplied and zero otherwise.
pub fn weighted_flux<G>(
    mesh: &SurfaceMesh,
    base: &BaseDisk,
    grad_u: G,
    nu: Option<&dyn Fn(&Point3) -> f64>,
) -> Result<f64>
where
    G: Fn(&Point3) -> Result<Point3>,
{
    let mut total = 0.0;
    for k in 0..mesh.len() {
        let g = grad_u(&mesh.nodes[k])?;
        let n = &mesh.normals[k];
        total += mesh.x1w[k] * (g[0] * n[0] + g[1] * n[1] + g[2] * n[2]) * mesh.weights[k];
    }
    if let Some(nu) = nu {
        for (p, w) in base.nodes.iter().zip(&base.weights) {
            total -= nu(p) * w;
        }
    }
    Ok(total)
}

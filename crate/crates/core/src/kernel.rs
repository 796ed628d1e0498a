//! Fundamental solutions of `Σ u_{xᵢxᵢ} + (2α/x₁) u_{x₁} = 0` and their derivatives.
//!
//! All evaluators take coordinate slices so they can run in tight quadrature
//! loops; [`HalfSpacePoint`] derefs to `[f64]` for validated inputs. `q1` and its
//! gradient are even in `x₁` and accept points on either side of `x₁ = 0`,
//! which lets finite-difference checks straddle the degenerate plane.

use std::f64::consts::PI;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::specfun::{gamma, gauss_2f1, gauss_2f1_unit, SeriesControl};

/// Spatial dimension `m` and singularity exponent `α`, with the cached
/// normalisation constants `k₁`, `k₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    m: usize,
    alpha: f64,
    k1: f64,
    k2: f64,
    series: SeriesControl,
}

impl Params {
    pub fn new(m: usize, alpha: f64) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParams(format!("dimension m must be >= 3, got {m}")));
        }
        if !(alpha > 0.0 && 2.0 * alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha must satisfy 0 < 2*alpha < 1, got {alpha}")));
        }
        let mf = m as f64;
        let k1 = gamma(alpha)? * gamma(alpha + (mf - 2.0) / 2.0)?
            / (4f64.powf(1.0 - alpha) * PI.powf(mf / 2.0) * gamma(2.0 * alpha)?);
        let k2 = gamma(1.0 - alpha)? * gamma(mf / 2.0 - alpha)?
            / (4f64.powf(alpha) * PI.powf(mf / 2.0) * gamma(2.0 - 2.0 * alpha)?);
        Ok(Self { m, alpha, k1, k2, series: SeriesControl::default() })
    }

    pub fn with_series(mut self, series: SeriesControl) -> Self {
        self.series = series;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn series(&self) -> SeriesControl {
        self.series
    }

    /// `2α + m − 2`, the recurring prefactor of the gradient formulas and the
    /// Kelvin-image exponent.
    pub fn kelvin_exponent(&self) -> f64 {
        2.0 * self.alpha + self.m as f64 - 2.0
    }
}

/// Normalisation constants `(k₁, k₂)`.
pub fn constants(p: &Params) -> (f64, f64) {
    (p.k1, p.k2)
}

/// A point of the closed half-space `x₁ >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePoint(Vec<f64>);

impl HalfSpacePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams(format!("invalid coordinates {coords:?}")));
        }
        if coords[0] < 0.0 {
            return Err(Error::OutsideHalfSpace(coords[0]));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for HalfSpacePoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Squared distance `r²`, squared distance to the mirror image `r₁²`, and the
/// hypergeometric argument `ζ = 1 − r₁²/r²` for a pair of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub r2: f64,
    pub r12: f64,
    pub zeta: f64,
}

impl PairGeometry {
    /// `4x₁ξ₁/r₁²`, the argument of the transformed representation.
    pub fn w(&self) -> f64 {
        -self.zeta * (self.r2 / self.r12)
    }

    /// `1 − w = r²/r₁²`, computed without cancellation.
    pub fn w_complement(&self) -> f64 {
        self.r2 / self.r12
    }
}

fn check_dims(x: &[f64], xi: &[f64]) -> Result<()> {
    if x.len() != xi.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: xi.len() });
    }
    Ok(())
}

#[inline]
fn geometry_parts(x: &[f64], xi: &[f64]) -> (f64, f64) {
    let mut tail = 0.0;
    for i in 1..x.len() {
        let d = x[i] - xi[i];
        tail += d * d;
    }
    let d1 = x[0] - xi[0];
    let s1 = x[0] + xi[0];
    (d1 * d1 + tail, s1 * s1 + tail)
}

pub fn pair_geometry(x: &[f64], xi: &[f64]) -> Result<PairGeometry> {
    check_dims(x, xi)?;
    let (r2, r12) = geometry_parts(x, xi);
    if r2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let zeta = -4.0 * x[0] * xi[0] / r2;
    Ok(PairGeometry { r2, r12, zeta })
}

#[inline]
fn f21(a: f64, b: f64, c: f64, g: &PairGeometry, ctl: SeriesControl) -> Result<f64> {
    let w = g.w();
    if w >= 0.0 {
        gauss_2f1_unit(a, b, c, w, g.w_complement(), ctl)
    } else {
        gauss_2f1(a, b, c, w, ctl)
    }
}

/// First fundamental solution `q₁(x, ξ)`, evaluated through the transformed
/// representation `k₁ (r²)^{−(m−2)/2} (r₁²)^{−α} F(α−(m−2)/2, α; 2α; 1 − r²/r₁²)`.
pub fn q1(x: &[f64], xi: &[f64], p: &Params) -> Result<f64> {
    let g = pair_geometry(x, xi)?;
    let half = (p.m as f64 - 2.0) / 2.0;
    let a = p.alpha;
    let f = f21(a - half, a, 2.0 * a, &g, p.series)?;
    Ok(bound_from_geometry(&g, p) * f)
}

/// `q₁` straight from its defining hypergeometric form with argument `ζ <= 0`
/// (Pfaff-mapped inside [`gauss_2f1`]). Cross-check path only.
pub fn q1_raw(x: &[f64], xi: &[f64], p: &Params) -> Result<f64> {
    let g = pair_geometry(x, xi)?;
    let half = (p.m as f64 - 2.0) / 2.0;
    let a = p.alpha;
    let f = gauss_2f1(a + half, a, 2.0 * a, g.zeta, p.series)?;
    Ok(p.k1 * g.r2.powf(-a - half) * f)
}

fn bound_from_geometry(g: &PairGeometry, p: &Params) -> f64 {
    let half = (p.m as f64 - 2.0) / 2.0;
    p.k1 * g.r2.powf(-half) * g.r12.powf(-p.alpha)
}

/// The majorant `k₁ r₁^{−2α} / r^{m−2}` of `|q₁|`.
pub fn q1_bound(x: &[f64], xi: &[f64], p: &Params) -> Result<f64> {
    Ok(bound_from_geometry(&pair_geometry(x, xi)?, p))
}

/// Second fundamental solution `q₂(x, ξ)`; vanishes on `x₁ = 0`.
pub fn q2(x: &[f64], xi: &[f64], p: &Params) -> Result<f64> {
    let g = pair_geometry(x, xi)?;
    if x[0] < 0.0 {
        return Err(Error::OutsideHalfSpace(x[0]));
    }
    if xi[0] < 0.0 {
        return Err(Error::OutsideHalfSpace(xi[0]));
    }
    let a = p.alpha;
    let mf = p.m as f64;
    let weight = (x[0] * xi[0]).powf(1.0 - 2.0 * a);
    if weight == 0.0 {
        return Ok(0.0);
    }
    // Pfaff on the smaller parameter 1 − α
    let f = f21(2.0 - a - mf / 2.0, 1.0 - a, 2.0 - 2.0 * a, &g, p.series)?;
    Ok(p.k2 * g.r2.powf(a - mf / 2.0) * weight * g.w_complement().powf(1.0 - a) * f)
}

/// The two radial profiles of the gradient formulas:
/// `P₁ = (r²)^{−α−m/2} F(α+m/2, α; 2α; ζ)` and
/// `P₂ = (r²)^{−α−m/2} F(α+m/2, 1+α; 1+2α; ζ)`.
#[inline]
fn gradient_profiles(g: &PairGeometry, p: &Params) -> Result<(f64, f64)> {
    let a = p.alpha;
    let half_m = p.m as f64 / 2.0;
    let f1 = f21(a - half_m, a, 2.0 * a, g, p.series)?;
    let f2 = f21(1.0 + a - half_m, 1.0 + a, 1.0 + 2.0 * a, g, p.series)?;
    let r2_pow = g.r2.powf(-half_m);
    let r12_pow = g.r12.powf(-a);
    let p1 = r2_pow * r12_pow * f1;
    let p2 = r2_pow * g.w_complement() * r12_pow * f2;
    Ok((p1, p2))
}

/// Gradient of `q₁(ξ, x)` with respect to `ξ`, written into `out`.
pub fn grad_q1_into(xi: &[f64], x: &[f64], p: &Params, out: &mut [f64]) -> Result<()> {
    check_dims(xi, x)?;
    if out.len() != xi.len() {
        return Err(Error::DimensionMismatch { expected: xi.len(), got: out.len() });
    }
    let g = pair_geometry(xi, x)?;
    let (p1, p2) = gradient_profiles(&g, p)?;
    let scale = -p.k1 * p.kelvin_exponent();
    out[0] = scale * ((xi[0] - x[0]) * p1 + x[0] * p2);
    for i in 1..xi.len() {
        out[i] = scale * (xi[i] - x[i]) * p1;
    }
    Ok(())
}

/// Gradient of `q₁(ξ, x)` with respect to `ξ`.
pub fn grad_q1(xi: &[f64], x: &[f64], p: &Params) -> Result<Vec<f64>> {
    let mut out = vec![0.0; xi.len()];
    grad_q1_into(xi, x, p, &mut out)?;
    Ok(out)
}

/// Normal derivative `∂q₁(ξ, x)/∂n_ξ`, i.e. the gradient dotted with `normal`.
pub fn dq1_dn(xi: &[f64], normal: &[f64], x: &[f64], p: &Params) -> Result<f64> {
    check_dims(xi, x)?;
    check_dims(xi, normal)?;
    let g = pair_geometry(xi, x)?;
    let (p1, p2) = gradient_profiles(&g, p)?;
    let mut radial = 0.0;
    for i in 0..xi.len() {
        radial += (xi[i] - x[i]) * normal[i];
    }
    Ok(-p.k1 * p.kelvin_exponent() * (radial * p1 + x[0] * normal[0] * p2))
}

/// Literal transcription of the normal-derivative formula in terms of
/// `∂(1/r)/∂n` and `cos(n, ξ₁)`, using the raw `ζ` arguments. Kept as an
/// independent check of [`dq1_dn`].
pub fn dq1_dn_direct(xi: &[f64], normal: &[f64], x: &[f64], p: &Params) -> Result<f64> {
    check_dims(xi, x)?;
    check_dims(xi, normal)?;
    let g = pair_geometry(xi, x)?;
    let a = p.alpha;
    let mf = p.m as f64;
    let c = p.kelvin_exponent();
    let r = g.r2.sqrt();
    let dot: f64 = (0..xi.len()).map(|i| (xi[i] - x[i]) * normal[i]).sum();
    let d_inv_r_dn = -dot / (r * r * r);
    let big = gauss_2f1(a + mf / 2.0, a, 2.0 * a, g.zeta, p.series)?;
    let small = gauss_2f1(a + mf / 2.0, 1.0 + a, 1.0 + 2.0 * a, g.zeta, p.series)?;
    Ok(c * p.k1 * g.r2.powf(-a - (mf - 3.0) / 2.0) * big * d_inv_r_dn
        - c * p.k1 * x[0] * g.r2.powf(-a - mf / 2.0) * small * normal[0])
}

/// Weighted double-layer kernel `K₁(s, t) = s₁^{2α} ∂q₁(s, t)/∂n_s`.
pub fn kernel_k1(s: &[f64], normal_s: &[f64], t: &[f64], p: &Params) -> Result<f64> {
    if s[0] < 0.0 {
        return Err(Error::OutsideHalfSpace(s[0]));
    }
    let weight = s[0].powf(2.0 * p.alpha);
    let dn = dq1_dn(s, normal_s, t, p)?;
    if weight == 0.0 {
        return Ok(0.0);
    }
    Ok(weight * dn)
}

//! One-dimensional rules that the surface and volume meshes are built from.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[lo, hi]`, nodes ascending.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = mid - half * z;
        x[n - 1 - i] = mid + half * z;
        w[i] = half * wi;
        w[n - 1 - i] = half * wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Periodic trapezoid rule on `[0, 2π)`, nodes offset by half a step so that
/// no node sits on `φ = 0`.
pub fn periodic(n: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * PI / n as f64;
    ((0..n).map(|j| (j as f64 + 0.5) * h).collect(), h)
}

/// Grading map `θ(u) = (π/2)(1 − (1 − u)^p)` on `u ∈ [0, 1]` with its
/// derivative; clusters nodes toward `θ = π/2` for `p > 1`.
pub fn graded_polar(u: f64, p: f64) -> (f64, f64) {
    let s = 1.0 - u;
    (0.5 * PI * (1.0 - s.powf(p)), 0.5 * PI * p * s.powf(p - 1.0))
}

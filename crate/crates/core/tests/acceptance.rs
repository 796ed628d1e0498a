//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use axipot::bie::{assemble, check_lambda2, DiscreteOperator, LAMBDA2_FLOOR};
use axipot::green::{green_function, green_hemisphere, green_regular_part, kelvin_image, GreenSolver, Layer};
use axipot::holmgren::{energy_identity_check, register_manufactured, solve_hemisphere, BoundaryData, HolmgrenSolver};
use axipot::kernel::{grad_q1, q1, q1_bound, q2};
use axipot::potentials::{
    double_layer, double_layer_trace, double_layer_unchecked, simple_layer_dn_trace, simple_layer_grad, Density, Side,
};
use axipot::residual::{operator_residual, FdOrder};
use axipot::specfun::{gamma, gauss_2f1, gauss_2f1_pfaff, gauss_2f1_series, SeriesControl};
use axipot::surface::{base_disk, hemisphere_mesh, weighted_flux, Point3, SurfaceMesh};
use axipot::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHAS: [f64; 4] = [0.1, 0.25, 0.3, 0.45];
const GRADING: f64 = 3.0;

type Outcome = (bool, String);

fn params(alpha: f64) -> Params {
    Params::new(3, alpha).unwrap()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Uniform point of `{|x| ≤ rmax, x₁ ≥ x1min}`.
fn interior(rng: &mut ChaCha8Rng, rmax: f64, x1min: f64) -> Point3 {
    loop {
        let p = [rng.random_range(x1min..rmax), rng.random_range(-rmax..rmax), rng.random_range(-rmax..rmax)];
        if norm(&p) <= rmax {
            return p;
        }
    }
}

fn exterior(rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let p = [rng.random_range(0.05..2.5), rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5)];
        let r = norm(&p);
        if (1.2..=2.5).contains(&r) {
            return p;
        }
    }
}

fn interior_pairs(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> Vec<(Point3, Point3)> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (x, xi) = (interior(rng, rmax, 0.1), interior(rng, rmax, 0.1));
        if dist(&x, &xi) >= 0.1 {
            out.push((x, xi));
        }
    }
    out
}

// 1 --------------------------------------------------------------------------

fn gauge_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut e_in, mut e_out, mut e_base, mut e_rim) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for alpha in ALPHAS {
        let p = params(alpha);
        let (nt, np) = (32, 64);
        let mesh = hemisphere_mesh(1.0, nt, np, GRADING, alpha).unwrap();
        let one = Density::constant(&mesh, 1.0);
        for _ in 0..20 {
            let x = interior(&mut rng, 0.8, 0.05);
            e_in = e_in.max((double_layer(&mesh, &one, &x, &p).unwrap() + 1.0).abs());
            let x = exterior(&mut rng);
            e_out = e_out.max(double_layer(&mesh, &one, &x, &p).unwrap().abs());
        }
        for _ in 0..10 {
            let y = interior(&mut rng, 0.8, 0.0);
            let x = [0.0, y[1], y[2]];
            e_base = e_base.max((double_layer(&mesh, &one, &x, &p).unwrap() + 1.0).abs());
        }
        // rim probes sit midway between azimuthal columns
        for j in 0..8 {
            let phi = 2.0 * PI * (8 * j) as f64 / np as f64;
            let x = [0.0, phi.cos(), phi.sin()];
            e_rim = e_rim.max((double_layer_unchecked(&mesh, &one, &x, &p).unwrap() + 0.5).abs());
        }
    }
    let pass = e_in <= 1e-3 && e_out <= 1e-3 && e_base <= 1e-2 && e_rim <= 5e-2;
    (pass, format!("max |err| interior {e_in:.2e}, exterior {e_out:.2e}, base {e_base:.2e}, rim {e_rim:.2e}"))
}

// 2 --------------------------------------------------------------------------

fn discrete_gauge(ops: &[(f64, DiscreteOperator)]) -> Outcome {
    let mut bad = 0;
    for (_, op) in ops {
        let ones = vec![1.0; op.len()];
        let k1 = op.apply(&ones).unwrap();
        for (j, v) in k1.iter().enumerate() {
            if op.row_sum(j) != -0.5 || *v != -0.5 || 1.0 - 2.0 * v != 2.0 {
                bad += 1;
            }
        }
    }
    (bad == 0, format!("{} operators, {bad} rows off -1/2 or (I-2K)1 != 2", ops.len()))
}

// 3 --------------------------------------------------------------------------

fn flux_identities() -> Outcome {
    let (mut e_ext, mut e_int) = (0.0f64, 0.0f64);
    let base = base_disk(1.0, 32, 64).unwrap();
    for alpha in ALPHAS {
        let p = params(alpha);
        let mesh = hemisphere_mesh(1.0, 32, 64, GRADING, alpha).unwrap();
        let flux = |xi: Point3| {
            weighted_flux(
                &mesh,
                &base,
                |x| {
                    let g = grad_q1(x, &xi, &p)?;
                    Ok([g[0], g[1], g[2]])
                },
                None,
            )
            .unwrap()
        };
        for xi in [[0.5, 1.5, 0.3], [1.2, -0.4, 0.9], [0.2, 0.0, -1.6]] {
            e_ext = e_ext.max(flux(xi).abs());
        }
        for xi in [[0.3, 0.2, -0.1], [0.6, -0.3, 0.2], [0.15, 0.4, 0.4]] {
            e_int = e_int.max((flux(xi) + 1.0).abs());
        }
    }
    (e_ext <= 1e-4 && e_int <= 1e-3, format!("max |flux| exterior {e_ext:.2e}, max |flux+1| interior {e_int:.2e}"))
}

// 4 --------------------------------------------------------------------------

fn kernel_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut total = 0;
    let mut tightest = 0.0f64;
    for alpha in ALPHAS {
        let p = params(alpha);
        for i in 0..10_000 {
            let x = [rng.random_range(0.0..2.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let mut xi = [rng.random_range(0.0..2.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            match i % 4 {
                0 => xi = [x[0] + 1e-3 * xi[0], x[1] + 1e-3 * xi[1], x[2]],
                1 => xi[0] = 0.0,
                _ => {}
            }
            if x == xi {
                continue;
            }
            let q = q1(&x, &xi, &p).unwrap();
            let b = q1_bound(&x, &xi, &p).unwrap();
            total += 1;
            if !(q > 0.0 && q <= b) {
                violations += 1;
            }
            tightest = tightest.max(q / b);
        }
    }
    (violations == 0, format!("{violations} violations in {total} pairs, max q1/bound {tightest:.6}"))
}

// 5 --------------------------------------------------------------------------

fn gradient_formulas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let h = 1e-5;
    for i in 0..100 {
        let m = if i % 3 == 2 { 4 } else { 3 };
        let p = Params::new(m, ALPHAS[i % 4]).unwrap();
        let (xi, x) = loop {
            let mut a = vec![rng.random_range(0.05..1.5)];
            let mut b = vec![rng.random_range(0.05..1.5)];
            for _ in 1..m {
                a.push(rng.random_range(-1.0..1.0));
                b.push(rng.random_range(-1.0..1.0));
            }
            if dist(&a, &b) >= 0.1 {
                break (a, b);
            }
        };
        let g = grad_q1(&xi, &x, &p).unwrap();
        let scale = g.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for k in 0..m {
            let (mut a, mut b) = (xi.clone(), xi.clone());
            a[k] += h;
            b[k] -= h;
            let fd = (q1(&a, &x, &p).unwrap() - q1(&b, &x, &p).unwrap()) / (2.0 * h);
            worst = worst.max((fd - g[k]).abs() / scale);
        }
    }
    (worst <= 1e-6, format!("max relative error {worst:.2e} over 100 configurations"))
}

// 6 --------------------------------------------------------------------------

fn pde_residuals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut r1, mut r2, mut rm) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    for alpha in ALPHAS {
        let p = params(alpha);
        for _ in 0..25 {
            let (x, xi) = loop {
                let x = [rng.random_range(0.05..1.5), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let xi = [rng.random_range(0.0..1.5), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if dist(&x, &xi) >= 0.1 {
                    break (x, xi);
                }
            };
            let a = operator_residual(|y| q1(y, &xi, &p), &x, alpha, 1e-3, FdOrder::Second, 1.0).unwrap();
            let b = operator_residual(|y| q2(y, &xi, &p), &x, alpha, 1e-3, FdOrder::Second, 1.0).unwrap();
            r1 = r1.max(a.normalised());
            r2 = r2.max(b.normalised());
        }
        for sol in register_manufactured(&p).unwrap() {
            cases += 1;
            for _ in 0..10 {
                let x = interior(&mut rng, 0.9, 0.05);
                let r = operator_residual(|y| sol.value(y), &x, alpha, 1e-3, FdOrder::Second, 1.0).unwrap();
                rm = rm.max(r.normalised());
            }
        }
    }
    let pass = r1 <= 1e-4 && r2 <= 1e-4 && rm <= 1e-4;
    (pass, format!("max normalised residual q1 {r1:.2e}, q2 {r2:.2e}, manufactured ({cases} registered) {rm:.2e}"))
}

// 7 --------------------------------------------------------------------------

fn jump_relations(ops: &[(f64, SurfaceMesh, DiscreteOperator)]) -> Outcome {
    let mut exact_ok = true;
    let mut worst_consistency = 0.0f64;
    for (alpha, mesh, op) in ops {
        let p = params(*alpha);
        let mu = Density::from_fn(mesh, |x| 1.0 + x[1] - x[0] * x[2]).unwrap();
        let rho = Density::from_fn(mesh, |x| 1.0 + 0.5 * x[2] + x[0] * x[1]).unwrap();
        let k_mu = op.apply(&mu).unwrap();
        let a_rho = op.apply_adjoint(&rho).unwrap();
        let wi = double_layer_trace(op, &mu, Side::Interior).unwrap();
        let we = double_layer_trace(op, &mu, Side::Exterior).unwrap();
        let si = simple_layer_dn_trace(op, &rho, Side::Interior).unwrap();
        let se = simple_layer_dn_trace(op, &rho, Side::Exterior).unwrap();
        for k in 0..mu.len() {
            let u1 = 4.0 * f64::EPSILON * (mu[k].abs() + k_mu[k].abs());
            let u2 = 4.0 * f64::EPSILON * (rho[k].abs() + a_rho[k].abs());
            exact_ok &= (we[k] - wi[k] - mu[k]).abs() <= u1 && (si[k] - se[k] - rho[k]).abs() <= u2;
        }

        // off-surface limits on a much finer quadrature of the same densities,
        // measured against the jump size |density(t)|
        let fine = hemisphere_mesh(1.0, 256, 512, GRADING, *alpha).unwrap();
        let mu_fine = Density::from_fn(&fine, |x| 1.0 + x[1] - x[0] * x[2]).unwrap();
        let rho_fine = Density::from_fn(&fine, |x| 1.0 + 0.5 * x[2] + x[0] * x[1]).unwrap();
        let (nt, np) = mesh.shape();
        for j in [(nt / 2) * np + 3, (nt / 4) * np + 17] {
            let t = mesh.nodes()[j];
            let n = mesh.normals()[j];
            let at = |eps: f64| [t[0] - eps * n[0], t[1] - eps * n[1], t[2] - eps * n[2]];
            let dn = |eps: f64| {
                let g = simple_layer_grad(&fine, &rho_fine, &at(eps), &p).unwrap();
                mesh.x1w()[j] * (g[0] * n[0] + g[1] * n[1] + g[2] * n[2])
            };
            let dl = |eps: f64| double_layer(&fine, &mu_fine, &at(eps), &p).unwrap();
            // eps > 0 is inside; limits extrapolated from 0.08, 0.04, 0.02
            let limit = |f: &dyn Fn(f64) -> f64, s: f64| (8.0 * f(s * 0.02) - 6.0 * f(s * 0.04) + f(s * 0.08)) / 3.0;
            for (lim, trace, scale) in [
                (limit(&dn, 1.0), si[j], rho[j]),
                (limit(&dn, -1.0), se[j], rho[j]),
                (limit(&dl, 1.0), wi[j], mu[j]),
                (limit(&dl, -1.0), we[j], mu[j]),
            ] {
                worst_consistency = worst_consistency.max((lim - trace).abs() / scale.abs());
            }
        }
    }
    let pass = exact_ok && worst_consistency <= 1e-2;
    (
        pass,
        format!(
            "discrete jumps exact to rounding: {exact_ok}; off-surface extrapolation rel err {worst_consistency:.2e}"
        ),
    )
}

// 8 --------------------------------------------------------------------------

fn non_eigenvalue(margins: &[(f64, f64, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for &(alpha, coarse, fine) in margins {
        let ratio = (coarse / fine).max(fine / coarse);
        pass &= coarse > LAMBDA2_FLOOR && fine > LAMBDA2_FLOOR && ratio <= 2.0;
        parts.push(format!("a={alpha}: {coarse:.3}/{fine:.3}"));
    }
    (pass, format!("sigma_min(I-2K) 16x32/32x64 {}", parts.join(", ")))
}

// 9 --------------------------------------------------------------------------

fn hemisphere_green() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut vanish, mut dx1, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    let a = 1.0;
    for alpha in ALPHAS {
        let p = params(alpha);
        for _ in 0..50 {
            let xi = interior(&mut rng, 0.9, 0.05);
            let th = rng.random_range(0.0..0.5 * PI);
            let ph = rng.random_range(0.0..2.0 * PI);
            let x = [a * th.cos(), a * th.sin() * ph.cos(), a * th.sin() * ph.sin()];
            vanish = vanish.max(green_hemisphere(&x, &xi, a, &p).unwrap().abs() / q1(&x, &xi, &p).unwrap());
        }
        for _ in 0..20 {
            let xi = interior(&mut rng, 0.9, 0.05);
            let y = interior(&mut rng, 0.9, 0.0);
            let g = |x1: f64| green_hemisphere(&[x1, y[1], y[2]], &xi, a, &p).unwrap();
            let h = 1e-4;
            // one-sided second order, exact on the even quadratic part
            let d = (-3.0 * g(0.0) + 4.0 * g(h) - g(2.0 * h)) / (2.0 * h);
            dx1 = dx1.max(d.abs());
        }
        for (x, xi) in interior_pairs(&mut rng, 20, 0.9) {
            let g1 = green_hemisphere(&x, &xi, a, &p).unwrap();
            let g2 = green_hemisphere(&xi, &x, a, &p).unwrap();
            sym = sym.max((g1 - g2).abs() / g1.abs());
        }
    }
    let pass = vanish <= 1e-10 && dx1 <= 1e-6 && sym <= 1e-12;
    (pass, format!("sphere |G01|/q1 {vanish:.2e}, |dG01/dx1| at base {dx1:.2e}, symmetry {sym:.2e}"))
}

// 10-12 ----------------------------------------------------------------------

struct BemResults {
    v1_err_fine: f64,
    v1_err_coarse: f64,
    sym: f64,
    solve_err: f64,
    cross: f64,
    homogeneous: f64,
}

fn v1_errors(gs: &GreenSolver, pairs: &[(Point3, Point3)], p: &Params) -> f64 {
    let mesh = gs.mesh();
    let mut worst = 0.0f64;
    for (x, xi) in pairs {
        let parts = gs.densities(xi).unwrap();
        let (image, strength) = kelvin_image(xi, 1.0, p).unwrap();
        let exact = -strength * q1(x, &image, p).unwrap();
        for via in [Layer::Double, Layer::Simple] {
            let v = green_regular_part(&parts, mesh, x, p, via).unwrap();
            worst = worst.max((v - exact).abs() / exact.abs());
        }
    }
    worst
}

fn bem_suite(alpha: f64, coarse: &GreenSolver, fine: &GreenSolver, seed: u64) -> BemResults {
    let p = params(alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = interior_pairs(&mut rng, 20, 0.6);
    let v1_err_fine = v1_errors(fine, &pairs, &p);
    let v1_err_coarse = v1_errors(coarse, &pairs, &p);

    let mesh = fine.mesh();
    let mut sym = 0.0f64;
    for (x, xi) in &pairs {
        let a = green_function(&fine.densities(xi).unwrap(), mesh, x, &p, Layer::Simple).unwrap();
        let b = green_function(&fine.densities(x).unwrap(), mesh, xi, &p, Layer::Simple).unwrap();
        sym = sym.max((a - b).abs() / a.abs());
    }

    let base = base_disk(1.0, 32, 64).unwrap();
    let solver = HolmgrenSolver::from_green(fine.clone(), &base).unwrap();
    let targets: Vec<Point3> = (0..20).map(|_| interior(&mut rng, 0.6, 0.1)).collect();
    let cat = register_manufactured(&p).unwrap();
    let (mut solve_err, mut cross) = (0.0f64, 0.0f64);
    for name in ["one", "x2", "x2^2-x3^2", "x1^(1-2a)", "x1^(1-2a)x2"] {
        let sol = cat.iter().find(|s| s.name() == name).unwrap();
        let data = sol.data(mesh, &base).unwrap();
        let u = solver.solve(&data, &targets).unwrap();
        let uh = solve_hemisphere(1.0, &base, mesh, &data, &targets, &p).unwrap();
        let exact: Vec<f64> = targets.iter().map(|x| sol.value(x).unwrap()).collect();
        let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..targets.len() {
            solve_err = solve_err.max((u[k] - exact[k]).abs() / scale);
            cross = cross.max((u[k] - uh[k]).abs() / scale);
        }
    }
    let zero = BoundaryData::zero(mesh, &base);
    let homogeneous = solver.solve(&zero, &targets).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    BemResults { v1_err_fine, v1_err_coarse, sym, solve_err, cross, homogeneous }
}

// 13 -------------------------------------------------------------------------

fn energy_identity() -> Outcome {
    let base = base_disk(1.0, 32, 64).unwrap();
    let mut worst = 0.0f64;
    let mut parts = vec![];
    for alpha in ALPHAS {
        let p = params(alpha);
        let mesh = hemisphere_mesh(1.0, 32, 64, GRADING, alpha).unwrap();
        for sol in register_manufactured(&p).unwrap() {
            if sol.name() != "x2" && sol.name() != "x1^(1-2a)" {
                continue;
            }
            let (l, r) = energy_identity_check(&mesh, &base, &sol, &p, 32).unwrap();
            let rel = (l - r).abs() / l.abs();
            worst = worst.max(rel);
            // closed forms: ∫ x1^{2a} dx and (1-2a)^2 ∫ x1^{-2a} dx over the unit hemisphere
            let oracle = match sol.name() {
                "x2" => 2.0 * PI / ((1.0 + 2.0 * alpha) * (3.0 + 2.0 * alpha)),
                _ => (1.0 - 2.0 * alpha).powi(2) * 2.0 * PI / ((1.0 - 2.0 * alpha) * (3.0 - 2.0 * alpha)),
            };
            worst = worst.max((l - oracle).abs() / oracle);
            parts.push(format!("{}@{alpha}: {l:.6}/{r:.6}", sol.name()));
        }
    }
    (worst <= 1e-2, format!("max rel mismatch {worst:.2e} (lhs/rhs {})", parts.join(", ")))
}

// 14 -------------------------------------------------------------------------

fn special_functions() -> Outcome {
    let ctl = SeriesControl::default();
    let mut pfaff = 0.0f64;
    for &(a, b, c) in &[(0.75, 0.25, 0.5), (1.8, 0.3, 0.6), (0.25, 1.25, 2.5), (-0.35, 0.3, 0.6)] {
        for z in [-0.9, -0.5, -0.1] {
            let d = gauss_2f1_series(a, b, c, z, ctl).unwrap();
            let t = gauss_2f1_pfaff(a, b, c, z, ctl).unwrap();
            pfaff = pfaff.max((d - t).abs() / d.abs());
        }
    }
    let mut summation = 0.0f64;
    for &(a, b, c) in &[(0.25, 0.25, 2.0), (0.3, -0.2, 1.4), (1.1, 0.4, 2.7)] {
        let g = |x: f64| statrs::function::gamma::gamma(x);
        let oracle = g(c) * g(c - a - b) / (g(c - a) * g(c - b));
        summation = summation.max((gauss_2f1(a, b, c, 1.0, ctl).unwrap() - oracle).abs() / oracle);
    }
    let reference = gauss_2f1(0.25, 0.25, 2.0, 1.0, ctl).unwrap();
    let mut duplication = 0.0f64;
    for a in [0.25, 0.7, 1.3] {
        let lhs = gamma(2.0 * a).unwrap();
        let rhs = 2f64.powf(2.0 * a - 1.0) / PI.sqrt() * gamma(a).unwrap() * gamma(a + 0.5).unwrap();
        duplication = duplication.max((lhs - rhs).abs() / lhs);
    }
    let mut contiguity = 0.0f64;
    let (a, b, c) = (0.8, 0.3, 0.6);
    for z in [-2.0, -0.5, 0.3] {
        let h = 1e-5;
        let fd = (gauss_2f1(a, b, c, z + h, ctl).unwrap() - gauss_2f1(a, b, c, z - h, ctl).unwrap()) / (2.0 * h);
        let exact = a * b / c * gauss_2f1(a + 1.0, b + 1.0, c + 1.0, z, ctl).unwrap();
        contiguity = contiguity.max((fd - exact).abs() / exact.abs());
    }
    let pass = pfaff <= 1e-12
        && summation <= 1e-12
        && duplication <= 1e-12
        && contiguity <= 1e-6
        && (reference - 1.04919).abs() < 1e-5;
    (
        pass,
        format!(
            "Pfaff {pfaff:.2e}, Gauss summation {summation:.2e} (F(1/4,1/4;2;1) = {reference:.6}), \
             duplication {duplication:.2e}, contiguity {contiguity:.2e}"
        ),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "gauge suite", guarded(gauge_suite)),
        (3, "flux identities", guarded(flux_identities)),
        (4, "kernel bound", guarded(kernel_bound)),
        (5, "gradient formulas", guarded(gradient_formulas)),
        (6, "PDE residuals", guarded(pde_residuals)),
        (9, "hemisphere Green's function", guarded(hemisphere_green)),
        (13, "energy identity", guarded(energy_identity)),
        (14, "special functions", guarded(special_functions)),
    ];

    // operator-based criteria share one assembly per mesh and alpha
    let mut gauge_ops = vec![];
    let mut jump_ops = vec![];
    let mut margins = vec![];
    let mut bem = vec![];
    let bem_outcome = guarded(|| {
        for (i, alpha) in ALPHAS.into_iter().enumerate() {
            let p = params(alpha);
            let coarse_mesh = hemisphere_mesh(1.0, 16, 32, GRADING, alpha).unwrap();
            let fine_mesh = hemisphere_mesh(1.0, 32, 64, GRADING, alpha).unwrap();
            let coarse_op = assemble(&coarse_mesh, &p).unwrap();
            let fine_op = assemble(&fine_mesh, &p).unwrap();
            margins.push((alpha, check_lambda2(&coarse_op).unwrap(), check_lambda2(&fine_op).unwrap()));
            gauge_ops.push((alpha, coarse_op.clone()));
            if alpha == 0.3 || alpha == 0.1 {
                jump_ops.push((alpha, fine_mesh.clone(), fine_op.clone()));
            }
            let coarse = GreenSolver::from_operator(&coarse_mesh, coarse_op, &p).unwrap();
            let fine = GreenSolver::from_operator(&fine_mesh, fine_op, &p).unwrap();
            bem.push((alpha, bem_suite(alpha, &coarse, &fine, 100 + i as u64)));
        }
        (true, String::new())
    });
    if !bem_outcome.0 {
        for (n, name) in [
            (2, "discrete gauge"),
            (7, "jump relations"),
            (8, "non-eigenvalue"),
            (10, "BEM vs closed form"),
            (11, "Green symmetry"),
            (12, "Holmgren solver"),
        ] {
            results.push((n, name, bem_outcome.clone()));
        }
    } else {
        results.push((2, "discrete gauge", guarded(|| discrete_gauge(&gauge_ops))));
        results.push((7, "jump relations", guarded(|| jump_relations(&jump_ops))));
        results.push((8, "non-eigenvalue", guarded(|| non_eigenvalue(&margins))));

        let mut c10 = (true, vec![]);
        let mut c11 = (true, vec![]);
        let mut c12 = (true, vec![]);
        for (alpha, r) in &bem {
            let ratio = r.v1_err_coarse / r.v1_err_fine;
            c10.0 &= r.v1_err_fine <= 1e-2 && ratio >= 2.0;
            c10.1.push(format!("a={alpha}: {:.1e} (ratio {ratio:.1})", r.v1_err_fine));
            c11.0 &= r.sym <= 1e-2;
            c11.1.push(format!("a={alpha}: {:.1e}", r.sym));
            c12.0 &= r.solve_err <= 1e-2 && r.cross <= 1e-2 && r.homogeneous <= 1e-3;
            c12.1.push(format!("a={alpha}: err {:.1e} cross {:.1e} hom {:.1e}", r.solve_err, r.cross, r.homogeneous));
        }
        results.push((10, "BEM vs closed form", (c10.0, format!("max rel err v1 {}", c10.1.join(", ")))));
        results.push((11, "Green symmetry", (c11.0, format!("max rel asymmetry {}", c11.1.join(", ")))));
        results.push((12, "Holmgren solver", (c12.0, c12.1.join(", "))));
    }

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, (pass, detail)) in &results {
        println!("criterion {n:>2} [{name}]: {} - {detail}", if *pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

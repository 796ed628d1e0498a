use std::f64::consts::PI;
use std::fs::File;
use std::path::{Path, PathBuf};

use axipot::bie::assemble;
use axipot::green::{green_function, green_regular_part, kelvin_image, GreenSolver, Layer};
use axipot::holmgren::{
    energy_identity_check, register_manufactured, solve_hemisphere, BoundaryData, HolmgrenSolver, ManufacturedSolution,
};
use axipot::kernel::{grad_q1, pair_geometry, q1, q1_bound, q2};
use axipot::potentials::{double_layer, double_layer_unchecked, Density};
use axipot::surface::{base_disk, hemisphere_mesh, weighted_flux, BaseDisk, Point3, SurfaceMesh};
use axipot::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;

/// CSV text plus whether every tolerance check passed.
pub struct Report {
    pub csv: String,
    pub passed: bool,
}

type CmdResult = Result<Report, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

struct Table(csv::Writer<Vec<u8>>);

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Table(w)
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        self.0.write_record(fields.into_iter().collect::<Vec<_>>()).expect("in-memory write");
    }

    fn finish(self, passed: bool) -> Report {
        let bytes = self.0.into_inner().expect("in-memory flush");
        Report { csv: String::from_utf8(bytes).expect("ascii"), passed }
    }
}

fn meshes(cfg: &RunConfig) -> Result<(SurfaceMesh, BaseDisk), String> {
    let mesh = hemisphere_mesh(cfg.radius, cfg.n_theta, cfg.n_phi, cfg.grading, cfg.alpha).map_err(err)?;
    let base = base_disk(cfg.radius, cfg.n_r, cfg.n_phi).map_err(err)?;
    Ok((mesh, base))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Uniform point with `lo ≤ |x| ≤ hi` and `x₁ ≥ x1min` (all scaled by `a`).
fn sample(rng: &mut ChaCha8Rng, a: f64, lo: f64, hi: f64, x1min: f64) -> Point3 {
    loop {
        let p = [rng.random_range(x1min..hi), rng.random_range(-hi..hi), rng.random_range(-hi..hi)];
        let r = norm(&p);
        if r >= lo && r <= hi {
            return [a * p[0], a * p[1], a * p[2]];
        }
    }
}

/// Targets far enough from the surface for the coarsest ladder mesh.
fn interior_targets(cfg: &RunConfig, n: usize) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..n).map(|_| sample(&mut rng, cfg.radius, 0.0, 0.4, 0.1)).collect()
}

pub fn kernel_eval(cfg: &RunConfig, x: &[f64], xi: &[f64]) -> CmdResult {
    if x.len() != xi.len() {
        return Err(format!("x has {} coordinates but xi has {}", x.len(), xi.len()));
    }
    let p = Params::new(x.len(), cfg.alpha).map_err(err)?;
    let g = pair_geometry(x, xi).map_err(err)?;
    let v1 = q1(x, xi, &p).map_err(err)?;
    let v2 = q2(x, xi, &p).map_err(err)?;
    let grad = grad_q1(x, xi, &p).map_err(err)?;
    let bound = q1_bound(x, xi, &p).map_err(err)?;
    let ok = v1 <= bound;
    let mut t = Table::new(&["quantity", "value"]);
    t.row(["r2".into(), num(g.r2)]);
    t.row(["r1_2".into(), num(g.r12)]);
    t.row(["zeta".into(), num(g.zeta)]);
    t.row(["q1".into(), num(v1)]);
    t.row(["q2".into(), num(v2)]);
    for (i, v) in grad.iter().enumerate() {
        t.row([format!("dq1_dx{}", i + 1), num(*v)]);
    }
    t.row(["q1_bound".into(), num(bound)]);
    t.row(["bound_ok".into(), u8::from(ok).to_string()]);
    Ok(t.finish(ok))
}

pub fn gauge(cfg: &RunConfig) -> CmdResult {
    let p = cfg.params();
    let (mesh, _) = meshes(cfg)?;
    let one = Density::constant(&mesh, 1.0);
    let a = cfg.radius;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut probes: Vec<(Point3, &str, f64, f64)> = vec![];
    for _ in 0..20 {
        probes.push((sample(&mut rng, a, 0.0, 0.8, 0.05), "interior", -1.0, cfg.tol));
    }
    for _ in 0..20 {
        probes.push((sample(&mut rng, a, 1.2, 2.5, 0.05), "exterior", 0.0, cfg.tol));
    }
    for _ in 0..10 {
        let y = sample(&mut rng, a, 0.0, 0.8, 0.0);
        probes.push(([0.0, y[1], y[2]], "base", -1.0, 10.0 * cfg.tol));
    }
    // rim points midway between azimuthal node columns
    for j in 0..8 {
        let phi = 2.0 * PI * (j * cfg.n_phi / 8) as f64 / cfg.n_phi as f64;
        probes.push(([0.0, a * phi.cos(), a * phi.sin()], "rim", -0.5, 50.0 * cfg.tol));
    }
    let mut t = Table::new(&["x1", "x2", "x3", "location_class", "value", "expected", "abs_error"]);
    let mut passed = true;
    for (x, class, expected, tol) in probes {
        let v = if class == "rim" {
            double_layer_unchecked(&mesh, &one, &x, &p)
        } else {
            double_layer(&mesh, &one, &x, &p)
        }
        .map_err(err)?;
        let e = (v - expected).abs();
        passed &= e <= tol;
        t.row([num(x[0]), num(x[1]), num(x[2]), class.into(), num(v), num(expected), num(e)]);
    }
    Ok(t.finish(passed))
}

pub fn flux(cfg: &RunConfig) -> CmdResult {
    let p = cfg.params();
    let (mesh, base) = meshes(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut poles: Vec<(Point3, &str, f64)> = vec![];
    for _ in 0..5 {
        poles.push((sample(&mut rng, cfg.radius, 0.0, 0.7, 0.1), "interior", -1.0));
    }
    for _ in 0..5 {
        poles.push((sample(&mut rng, cfg.radius, 1.3, 2.5, 0.05), "exterior", 0.0));
    }
    let mut t = Table::new(&["xi1", "xi2", "xi3", "location_class", "flux", "expected", "abs_error"]);
    let mut passed = true;
    for (xi, class, expected) in poles {
        let f = weighted_flux(
            &mesh,
            &base,
            |x| {
                let g = grad_q1(x, &xi, &p)?;
                Ok([g[0], g[1], g[2]])
            },
            None,
        )
        .map_err(err)?;
        let e = (f - expected).abs();
        passed &= e <= cfg.tol;
        t.row([num(xi[0]), num(xi[1]), num(xi[2]), class.into(), num(f), num(expected), num(e)]);
    }
    Ok(t.finish(passed))
}

/// Where the boundary data of `solve` comes from.
pub enum DataSource {
    Files { gamma: PathBuf, base: PathBuf },
    Case(String),
}

pub struct SolveArgs {
    pub targets: PathBuf,
    pub data: DataSource,
    pub mesh: Option<PathBuf>,
    pub write_mesh: Option<PathBuf>,
    pub write_operator: Option<PathBuf>,
    pub write_data: Option<(PathBuf, PathBuf)>,
}

fn open(path: &Path) -> Result<File, String> {
    File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))
}

fn create(path: &Path) -> Result<File, String> {
    File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))
}

fn read_targets(path: &Path) -> Result<Vec<Point3>, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let header = rdr.headers().map_err(err)?.clone();
    if header.iter().collect::<Vec<_>>() != ["x1", "x2", "x3"] {
        return Err(format!("{}: expected header x1,x2,x3", path.display()));
    }
    let mut out = vec![];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(err)?;
        let mut p = [0.0; 3];
        for (k, v) in p.iter_mut().enumerate() {
            *v = rec
                .get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("{}: bad number in row {}", path.display(), i + 1))?;
        }
        out.push(p);
    }
    Ok(out)
}

fn find_case(p: &Params, name: &str) -> Result<ManufacturedSolution, String> {
    let cases = register_manufactured(p).map_err(err)?;
    let names: Vec<String> = cases.iter().map(|c| c.name().to_string()).collect();
    cases
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| format!("unknown case `{name}`; available: {}", names.join(", ")))
}

pub fn solve(cfg: &RunConfig, args: &SolveArgs) -> CmdResult {
    let p = cfg.params();
    let targets = read_targets(&args.targets)?;
    let (generated, base) = meshes(cfg)?;
    let mesh = match &args.mesh {
        Some(path) => SurfaceMesh::read_csv(open(path)?, cfg.alpha).map_err(err)?,
        None => generated,
    };
    let data = match &args.data {
        DataSource::Files { gamma, base: b } => {
            BoundaryData::read_csv(&mesh, &base, open(gamma)?, open(b)?).map_err(err)?
        }
        DataSource::Case(name) => find_case(&p, name)?.data(&mesh, &base).map_err(err)?,
    };
    if let Some(path) = &args.write_mesh {
        mesh.write_csv(create(path)?).map_err(err)?;
    }
    if let Some((g, b)) = &args.write_data {
        data.write_gamma_csv(&mesh, create(g)?).map_err(err)?;
        data.write_base_csv(&base, create(b)?).map_err(err)?;
    }
    if let Some(path) = &args.write_operator {
        assemble(&mesh, &p).map_err(err)?.write_csv(create(path)?).map_err(err)?;
    }

    let mut t = Table::new(&["x1", "x2", "x3", "u_bem", "u_hemisphere", "abs_diff"]);
    if targets.is_empty() {
        return Ok(t.finish(true));
    }
    let u = HolmgrenSolver::new(&mesh, &base, &p).and_then(|s| s.solve(&data, &targets)).map_err(err)?;
    let closed = match solve_hemisphere(cfg.radius, &base, &mesh, &data, &targets, &p) {
        Ok(v) => Some(v),
        Err(axipot::Error::InvalidMesh(_)) => None,
        Err(e) => return Err(err(e)),
    };
    let mut passed = true;
    for (k, x) in targets.iter().enumerate() {
        let (uh, diff) = match &closed {
            Some(v) => {
                let d = (u[k] - v[k]).abs();
                passed &= d <= cfg.tol;
                (num(v[k]), num(d))
            }
            None => (String::new(), String::new()),
        };
        t.row([num(x[0]), num(x[1]), num(x[2]), num(u[k]), uh, diff]);
    }
    Ok(t.finish(passed))
}

pub fn green_check(cfg: &RunConfig, pairs: usize) -> CmdResult {
    let p = cfg.params();
    let (mesh, _) = meshes(cfg)?;
    let gs = GreenSolver::new(&mesh, &p).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new(&[
        "x1",
        "x2",
        "x3",
        "xi1",
        "xi2",
        "xi3",
        "v1_double",
        "v1_simple",
        "v1_exact",
        "rel_error",
        "symmetry_error",
    ]);
    let mut passed = true;
    let mut done = 0;
    while done < pairs {
        let x = sample(&mut rng, cfg.radius, 0.0, 0.6, 0.1);
        let xi = sample(&mut rng, cfg.radius, 0.0, 0.6, 0.1);
        if norm(&[x[0] - xi[0], x[1] - xi[1], x[2] - xi[2]]) < 0.1 * cfg.radius {
            continue;
        }
        done += 1;
        let parts = gs.densities(&xi).map_err(err)?;
        let (image, strength) = kelvin_image(&xi, cfg.radius, &p).map_err(err)?;
        let exact = -strength * q1(&x, &image, &p).map_err(err)?;
        let vd = green_regular_part(&parts, &mesh, &x, &p, Layer::Double).map_err(err)?;
        let vs = green_regular_part(&parts, &mesh, &x, &p, Layer::Simple).map_err(err)?;
        let rel = (vd - exact).abs().max((vs - exact).abs()) / exact.abs();
        let g = green_function(&parts, &mesh, &x, &p, Layer::Simple).map_err(err)?;
        let swapped = green_function(&gs.densities(&x).map_err(err)?, &mesh, &xi, &p, Layer::Simple).map_err(err)?;
        let sym = (g - swapped).abs() / g.abs();
        passed &= rel <= cfg.tol && sym <= cfg.tol;
        t.row([x[0], x[1], x[2], xi[0], xi[1], xi[2], vd, vs, exact, rel, sym].map(num));
    }
    Ok(t.finish(passed))
}

/// Errors below this are treated as converged when checking monotonicity.
const ERROR_FLOOR: f64 = 1e-12;

pub fn convergence(cfg: &RunConfig, levels: usize, cases: &[String]) -> CmdResult {
    if levels < 2 {
        return Err("convergence needs at least 2 levels".into());
    }
    let p = cfg.params();
    let all = register_manufactured(&p).map_err(err)?;
    let selected: Vec<&ManufacturedSolution> = if cases.is_empty() {
        all.iter().collect()
    } else {
        cases
            .iter()
            .map(|name| all.iter().find(|c| c.name() == name).ok_or_else(|| format!("unknown case `{name}`")))
            .collect::<Result<_, _>>()?
    };
    let targets = interior_targets(cfg, 20);
    let mut errors = vec![vec![]; selected.len()];
    let mut t = Table::new(&["n_theta", "n_phi", "case_name", "max_rel_error"]);
    for level in 0..levels {
        let scale = 1 << level;
        let sub =
            RunConfig { n_theta: cfg.n_theta * scale, n_phi: cfg.n_phi * scale, n_r: cfg.n_r * scale, ..cfg.clone() };
        let (mesh, base) = meshes(&sub)?;
        let solver = HolmgrenSolver::new(&mesh, &base, &p).map_err(err)?;
        for (c, sol) in selected.iter().enumerate() {
            let u = solver.solve(&sol.data(&mesh, &base).map_err(err)?, &targets).map_err(err)?;
            let exact: Vec<f64> = targets.iter().map(|x| sol.value(x)).collect::<Result<_, _>>().map_err(err)?;
            let s = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let e = u.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / s;
            errors[c].push(e);
            t.row([sub.n_theta.to_string(), sub.n_phi.to_string(), sol.name().to_string(), num(e)]);
        }
    }
    let monotone = errors.iter().all(|e| e.windows(2).all(|w| w[1] <= w[0] || w[0] <= ERROR_FLOOR));
    t.row(["all".into(), "all".into(), "monotone_decrease".into(), u8::from(monotone).to_string()]);
    Ok(t.finish(monotone))
}

pub fn energy_check(cfg: &RunConfig, cases: &[String]) -> CmdResult {
    let p = cfg.params();
    let (mesh, base) = meshes(cfg)?;
    let names: Vec<String> = if cases.is_empty() { vec!["x2".into(), "x1^(1-2a)".into()] } else { cases.to_vec() };
    let mut t = Table::new(&["case_name", "lhs", "rhs", "rel_error"]);
    let mut passed = true;
    for name in &names {
        let sol = find_case(&p, name)?;
        let (l, r) = energy_identity_check(&mesh, &base, &sol, &p, cfg.n_theta).map_err(err)?;
        let rel = (l - r).abs() / l.abs().max(f64::MIN_POSITIVE);
        passed &= rel <= cfg.tol;
        t.row([name.clone(), num(l), num(r), num(rel)]);
    }
    Ok(t.finish(passed))
}

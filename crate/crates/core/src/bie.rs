//! Nyström discretisation of the weighted double-layer operator
//! `(Kμ)(t) = ∫_Γ K₁(s, t) μ(s) dΓ_s` and dense second-kind solves.
//!
//! Entry `(j, k)` is `K₁(s_k, t_j)·w_k`. The singular diagonal is never
//! evaluated: it is fixed so that every row sums to `−½`, the exact value of
//! the continuous operator on constants. Products with a vector accumulate the
//! off-diagonal entries in column order and add the diagonal last, so the row
//! sums hold bitwise.
//!
//! The adjoint with respect to the `w`-weighted inner product is
//! `A = W⁻¹KᵀW`, i.e. `(Aρ)(t_j) = Σ_k K₁(t_j, s_k) ρ_k w_k`, the operator of
//! the simple-layer normal-derivative traces.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{dq1_dn, Params};
use crate::linalg::{Lu, Matrix};
use crate::surface::SurfaceMesh;

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: Matrix,
    weights: Vec<f64>,
}

pub(crate) fn check_mesh_params(mesh: &SurfaceMesh, p: &Params) -> Result<()> {
    if p.m() != 3 {
        return Err(Error::InvalidParams(format!("surface meshes are three-dimensional, got m = {}", p.m())));
    }
    if mesh.alpha() != p.alpha() {
        return Err(Error::InvalidParams(format!(
            "mesh was built for alpha = {}, parameters have alpha = {}",
            mesh.alpha(),
            p.alpha()
        )));
    }
    Ok(())
}

fn gauge_diagonal(off: f64) -> f64 {
    // d with fl(off + d) == -1/2 exactly
    let mut d = -0.5 - off;
    for _ in 0..8 {
        let t = off + d;
        if t == -0.5 {
            break;
        }
        d += -0.5 - t;
    }
    d
}

pub fn assemble(mesh: &SurfaceMesh, p: &Params) -> Result<DiscreteOperator> {
    check_mesh_params(mesh, p)?;
    let n = mesh.len();
    let nodes = mesh.nodes();
    let normals = mesh.normals();
    let weights = mesh.weights();
    let x1w = mesh.x1w();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n.max(1)).enumerate().try_for_each(|(j, row)| -> Result<()> {
        let t = &nodes[j];
        let mut off = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let v = if x1w[k] == 0.0 { 0.0 } else { x1w[k] * dq1_dn(&nodes[k], &normals[k], t, p)? * weights[k] };
            row[k] = v;
            off += v;
        }
        row[j] = gauge_diagonal(off);
        Ok(())
    })?;
    Ok(DiscreteOperator { matrix: Matrix::from_rows(n, data)?, weights: weights.to_vec() })
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.matrix.get(j, k)
    }

    fn row_dot(&self, j: usize, x: &[f64]) -> f64 {
        let row = self.matrix.row(j);
        let mut s = 0.0;
        for (k, (a, b)) in row.iter().zip(x).enumerate() {
            if k != j {
                s += a * b;
            }
        }
        s + row[j] * x[j]
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        Ok(())
    }

    /// `Kμ` at every node.
    pub fn apply(&self, mu: &[f64]) -> Result<Vec<f64>> {
        self.check_len(mu)?;
        Ok((0..self.len()).into_par_iter().map(|j| self.row_dot(j, mu)).collect())
    }

    /// `Aρ = W⁻¹KᵀWρ` at every node.
    pub fn apply_adjoint(&self, rho: &[f64]) -> Result<Vec<f64>> {
        self.check_len(rho)?;
        let wr: Vec<f64> = rho.iter().zip(&self.weights).map(|(r, w)| r * w).collect();
        let kt = self.matrix.tr_mul_vec(&wr);
        Ok(kt.iter().zip(&self.weights).map(|(v, w)| v / w).collect())
    }

    /// `Σ_k K[j][k]` in the order used by [`DiscreteOperator::apply`].
    pub fn row_sum(&self, j: usize) -> f64 {
        let row = self.matrix.row(j);
        let off: f64 = row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| v).sum();
        off + row[j]
    }

    /// Writes `row,col,value` triples.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(out);
        writeln!(out, "row,col,value")?;
        for (j, row) in self.matrix.rows().enumerate() {
            for (k, v) in row.iter().enumerate() {
                writeln!(out, "{j},{k},{v:e}")?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Factorisation of `I − λK`, shared by the system and its adjoint
/// `I − λA = W⁻¹(I − λK)ᵀW`.
#[derive(Debug, Clone)]
pub struct SecondKindSolver {
    lambda: f64,
    lu: Lu,
    weights: Vec<f64>,
}

impl SecondKindSolver {
    pub fn new(op: &DiscreteOperator, lambda: f64) -> Result<Self> {
        let lu = Lu::factor(op.matrix.shifted_identity(lambda))?;
        Ok(Self { lambda, lu, weights: op.weights.clone() })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.lu.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `μ − λKμ = f`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.lu.solve(rhs)
    }

    /// `ρ − λAρ = g`.
    pub fn solve_adjoint(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let wr: Vec<f64> = rhs.iter().zip(&self.weights).map(|(g, w)| g * w).collect();
        let y = self.lu.solve_transpose(&wr)?;
        Ok(y.iter().zip(&self.weights).map(|(v, w)| v / w).collect())
    }

    pub fn min_pivot(&self) -> f64 {
        self.lu.min_pivot()
    }

    pub fn min_singular_value(&self) -> Result<f64> {
        self.lu.min_singular_value(300)
    }
}

/// One-shot solve of `(I − λK)μ = rhs`, or of the adjoint system when
/// `transpose` is set.
pub fn solve_second_kind(op: &DiscreteOperator, lambda: f64, rhs: &[f64], transpose: bool) -> Result<Vec<f64>> {
    op.check_len(rhs)?;
    let s = SecondKindSolver::new(op, lambda)?;
    if transpose {
        s.solve_adjoint(rhs)
    } else {
        s.solve(rhs)
    }
}

/// Smallest singular value of `I − λK`.
pub fn nonsingularity_margin(op: &DiscreteOperator, lambda: f64) -> Result<f64> {
    match SecondKindSolver::new(op, lambda) {
        Ok(s) => s.min_singular_value(),
        Err(Error::Singular { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Margin by which `λ = 2` stays away from the spectrum of the discrete operator.
pub fn check_lambda2(op: &DiscreteOperator) -> Result<f64> {
    nonsingularity_margin(op, 2.0)
}

pub const LAMBDA2_FLOOR: f64 = 1e-3;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::hemisphere_mesh;

    fn small() -> (SurfaceMesh, Params) {
        let p = Params::new(3, 0.3).unwrap();
        (hemisphere_mesh(1.0, 8, 16, 3.0, 0.3).unwrap(), p)
    }

    #[test]
    fn rows_sum_to_minus_half_bitwise() {
        let (mesh, p) = small();
        let op = assemble(&mesh, &p).unwrap();
        let ones = vec![1.0; op.len()];
        for j in 0..op.len() {
            assert_eq!(op.row_sum(j), -0.5);
        }
        assert!(op.apply(&ones).unwrap().iter().all(|&v| v == -0.5));
        let img: Vec<f64> = op.apply(&ones).unwrap().iter().map(|v| 1.0 - 2.0 * v).collect();
        assert!(img.iter().all(|&v| v == 2.0));
    }

    #[test]
    fn diagonal_bounded_by_row() {
        let (mesh, p) = small();
        let op = assemble(&mesh, &p).unwrap();
        for j in 0..op.len() {
            let off: f64 = (0..op.len()).filter(|&k| k != j).map(|k| op.get(j, k).abs()).sum();
            assert!(op.get(j, j).abs() <= off + 0.5 + 1e-12);
        }
    }

    #[test]
    fn round_trip_and_adjoint_pairing() {
        let (mesh, p) = small();
        let op = assemble(&mesh, &p).unwrap();
        let mu: Vec<f64> = mesh.nodes().iter().map(|x| x[1] + x[0] * x[2]).collect();
        let k_mu = op.apply(&mu).unwrap();
        let f: Vec<f64> = mu.iter().zip(&k_mu).map(|(m, k)| m - 2.0 * k).collect();
        let back = solve_second_kind(&op, 2.0, &f, false).unwrap();
        for (a, b) in back.iter().zip(&mu) {
            assert!((a - b).abs() < 1e-10);
        }
        let zero = solve_second_kind(&op, 2.0, &vec![0.0; op.len()], false).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));

        // <(I-2K)mu, rho>_w = <mu, (I-2A)rho>_w
        let rho: Vec<f64> = mesh.nodes().iter().map(|x| (3.0 * x[2]).cos()).collect();
        let a_rho = op.apply_adjoint(&rho).unwrap();
        let w = mesh.weights();
        let lhs: f64 = (0..op.len()).map(|k| f[k] * rho[k] * w[k]).sum();
        let rhs: f64 = (0..op.len()).map(|k| mu[k] * (rho[k] - 2.0 * a_rho[k]) * w[k]).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));

        let g: Vec<f64> = rho.iter().zip(&a_rho).map(|(r, a)| r - 2.0 * a).collect();
        let back = solve_second_kind(&op, 2.0, &g, true).unwrap();
        for (a, b) in back.iter().zip(&rho) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn lambda_two_is_regular_and_minus_two_is_not() {
        let (mesh, p) = small();
        let op = assemble(&mesh, &p).unwrap();
        assert!(check_lambda2(&op).unwrap() > LAMBDA2_FLOOR);
        // K·1 = -1/2·1, so constants span the null space of I + 2K
        assert!(nonsingularity_margin(&op, -2.0).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_mismatched_alpha() {
        let (mesh, _) = small();
        assert!(assemble(&mesh, &Params::new(3, 0.25).unwrap()).is_err());
        assert!(assemble(&mesh, &Params::new(4, 0.3).unwrap()).is_err());
    }

    #[test]
    fn csv_dump() {
        let (mesh, p) = small();
        let op = assemble(&mesh, &p).unwrap();
        let mut buf = Vec::new();
        op.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + op.len() * op.len());
        assert!(text.starts_with("row,col,value\n0,0,"));
    }
}

//! Dense square matrices and LU factorisation with partial pivoting.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, xi) in self.rows().zip(x) {
            for (o, a) in out.iter_mut().zip(r) {
                *o += a * xi;
            }
        }
        out
    }

    /// `I − λ·self`.
    pub fn shifted_identity(&self, lambda: f64) -> Self {
        let mut m = Self { n: self.n, data: self.data.iter().map(|v| -lambda * v).collect() };
        for i in 0..self.n {
            m.data[i * self.n + i] += 1.0;
        }
        m
    }
}

/// `PA = LU` with unit lower `L`, stored in place.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    min_pivot: f64,
}

impl Lu {
    pub fn factor(a: Matrix) -> Result<Self> {
        let n = a.n;
        let mut lu = a.data;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = scale * n as f64 * f64::EPSILON;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pv) =
                (k..n).map(|i| (i, lu[i * n + k].abs())).fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(pv > floor) {
                return Err(Error::Singular { pivot: pv, column: k });
            }
            min_pivot = min_pivot.min(pv);
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let inv = 1.0 / pivot_row[k];
            tail.par_chunks_exact_mut(n).for_each(|row| {
                let l = row[k] * inv;
                row[k] = l;
                if l != 0.0 {
                    for (r, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= l * u;
                    }
                }
            });
        }
        Ok(Self { n, lu, perm, min_pivot })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest pivot magnitude encountered.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    /// Solves `Aᵀx = b` with the same factorisation.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        // Uᵀ y = b, then Lᵀ z = y, then x = Pᵀ z
        let mut y = b.to_vec();
        for i in 0..n {
            y[i] /= self.lu[i * n + i];
            let yi = y[i];
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            for (yj, u) in y[i + 1..].iter_mut().zip(row) {
                *yj -= u * yi;
            }
        }
        for i in (0..n).rev() {
            let yi = y[i];
            let row = &self.lu[i * n..i * n + i];
            for (yj, l) in y[..i].iter_mut().zip(row) {
                *yj -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }

    /// Smallest singular value of the factored matrix by inverse iteration on
    /// `AᵀA`.
    pub fn min_singular_value(&self, iterations: usize) -> Result<f64> {
        let n = self.n;
        if n == 0 {
            return Ok(f64::INFINITY);
        }
        let mut x: Vec<f64> = (0..n).map(|k| 1.0 + ((k * 7919) % 101) as f64 / 101.0).collect();
        normalise(&mut x);
        let mut estimate = 0.0;
        for _ in 0..iterations.max(1) {
            let y = self.solve_transpose(&x)?;
            let mut z = self.solve(&y)?;
            let growth = normalise(&mut z);
            let next = 1.0 / growth.sqrt();
            let done = (next - estimate).abs() <= 1e-10 * next;
            estimate = next;
            x = z;
            if done {
                break;
            }
        }
        Ok(estimate)
    }
}

fn normalise(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
    norm
}

//! Finite-difference evaluation of `H(u) = Σ u_{xᵢxᵢ} + (2α/x₁) u_{x₁}`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    Second,
    Fourth,
}

/// Discrete operator value and the magnitude of the terms it cancels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    /// `|H_h u|` relative to `Σ|u_{xᵢxᵢ}| + |2α u_{x₁}/x₁| + |∇u|/ℓ + |u|/ℓ²`.
    pub fn normalised(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

/// Central-difference evaluation of `H(u)` at `x` with step `h`. `length` is
/// the problem length scale used to weigh the lower-order terms of the
/// normalisation.
pub fn operator_residual<F>(u: F, x: &[f64], alpha: f64, h: f64, order: FdOrder, length: f64) -> Result<Residual>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if x.is_empty() || !(x[0] > 0.0) {
        return Err(Error::OutsideHalfSpace(x.first().copied().unwrap_or(f64::NAN)));
    }
    if !(h > 0.0) || (order == FdOrder::Fourth && 2.0 * h >= x[0]) || h >= x[0] {
        return Err(Error::InvalidParams(format!("step {h} too large for x1 = {}", x[0])));
    }
    let u0 = u(x)?;
    let mut probe = x.to_vec();
    let mut at = |i: usize, d: f64| -> Result<f64> {
        probe[i] = x[i] + d;
        let v = u(&probe);
        probe[i] = x[i];
        v
    };
    let mut laplace = 0.0;
    let mut abs_second = 0.0;
    let mut grad2 = 0.0;
    let mut d1 = 0.0;
    for i in 0..x.len() {
        let (first, second) = match order {
            FdOrder::Second => {
                let (p, m) = (at(i, h)?, at(i, -h)?);
                ((p - m) / (2.0 * h), (p - 2.0 * u0 + m) / (h * h))
            }
            FdOrder::Fourth => {
                let (p1, m1, p2, m2) = (at(i, h)?, at(i, -h)?, at(i, 2.0 * h)?, at(i, -2.0 * h)?);
                (
                    (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h),
                    (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * u0) / (12.0 * h * h),
                )
            }
        };
        if i == 0 {
            d1 = first;
        }
        laplace += second;
        abs_second += second.abs();
        grad2 += first * first;
    }
    let drift = 2.0 * alpha / x[0] * d1;
    Ok(Residual {
        value: laplace + drift,
        scale: abs_second + drift.abs() + grad2.sqrt() / length + u0.abs() / (length * length),
    })
}

//! Gamma, Pochhammer and Gauss hypergeometric functions on the real line.
//!
//! The hypergeometric evaluator is tuned for the arguments produced by the
//! kernels: negative arguments are folded into `[0, 1)` by the Pfaff
//! transformation, the power series is summed directly for `w <= 1/2`, and the
//! `1 - w` connection formulas (including the logarithmic integer cases) take
//! over closer to `w = 1`, where the direct series converges too slowly.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Termination control for hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    tol: f64,
    max_terms: usize,
}

impl SeriesControl {
    pub fn new(tol: f64, max_terms: usize) -> Result<Self> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::InvalidParams(format!("series tolerance must be > 0, got {tol}")));
        }
        if max_terms == 0 {
            return Err(Error::InvalidParams("max_terms must be >= 1".into()));
        }
        Ok(Self { tol, max_terms })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { tol: 1e-14, max_terms: 10_000 }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `sin(pi x)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let f = x - n;
    let s = (PI * f).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

fn gamma_unchecked(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=171.0).contains(&x) {
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        PI / (sin_pi(x) * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        // split the power so Γ stays finite up to the f64 limit
        let half = t.powf(0.5 * (x + 0.5));
        (2.0 * PI).sqrt() * half * (half * (-t).exp()) * acc
    }
}

/// The Gamma function Γ(x) for real `x` away from the poles.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidParams(format!("gamma of non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(x));
    }
    Ok(gamma_unchecked(x))
}

/// Reciprocal Gamma 1/Γ(x), entire: zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / gamma_unchecked(x)
    }
}

/// Digamma ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(x));
    }
    Ok(digamma_unchecked(x))
}

fn digamma_unchecked(mut x: f64) -> f64 {
    if x < 0.0 {
        // reflection: ψ(x) = ψ(1 - x) - π cot(πx)
        return digamma_unchecked(1.0 - x) - PI * cos_pi(x) / sin_pi(x);
    }
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let f = 1.0 / (x * x);
    let tail = f
        * (-1.0 / 12.0
            + f * (1.0 / 120.0
                + f * (-1.0 / 252.0
                    + f * (1.0 / 240.0 + f * (-1.0 / 132.0 + f * (691.0 / 32_760.0 + f * (-1.0 / 12.0)))))));
    x.ln() - 0.5 / x + tail + shift
}

/// Rising factorial (κ)_n = κ(κ+1)⋯(κ+n−1), with (κ)_0 = 1.
pub fn pochhammer(kappa: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (kappa + k as f64))
}

/// F(a, b; c; 1) = Γ(c)Γ(c−a−b) / (Γ(c−a)Γ(c−b)), valid for c − a − b > 0.
pub fn gauss_summation(a: f64, b: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    let s = c - a - b;
    if !(s > 0.0) {
        return Err(Error::Divergent(s));
    }
    Ok(gamma_unchecked(c) * gamma_unchecked(s) * rgamma(c - a) * rgamma(c - b))
}

fn check_c(c: f64) -> Result<()> {
    if !c.is_finite() || is_nonpositive_integer(c) {
        return Err(Error::HypergeometricParameter(format!("c = {c} must not be a non-positive integer")));
    }
    Ok(())
}

fn is_polynomial(a: f64, b: f64) -> bool {
    is_nonpositive_integer(a) || is_nonpositive_integer(b)
}

/// Direct power series Σ (a)_n (b)_n / (n! (c)_n) zⁿ for |z| < 1, or any `z`
/// when `a` or `b` is a non-positive integer (terminating series).
pub fn gauss_2f1_series(a: f64, b: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<f64> {
    check_c(c)?;
    if !(z.abs() < 1.0) && !is_polynomial(a, b) {
        return Err(Error::ArgumentRange(z));
    }
    series_unchecked(a, b, c, z, ctl)
}

fn series_unchecked(a: f64, b: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<f64> {
    let mut sum = 1.0;
    let mut term = 1.0;
    // conservative tail allowance for geometric decay
    let shrink = (1.0 - z.abs()).clamp(1e-3, 1.0);
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 || term.abs() <= ctl.tol * shrink * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { terms: ctl.max_terms })
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for real `z <= 1`.
///
/// `z = 1` uses Gauss's summation (requires c − a − b > 0). `z < 0` is mapped
/// into `[0, 1)` by the Pfaff transformation applied to the smaller of `a`, `b`,
/// which keeps the result exactly symmetric in `a` and `b`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<f64> {
    check_c(c)?;
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::HypergeometricParameter(format!("non-finite input a={a} b={b} z={z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if is_polynomial(a, b) {
        return series_unchecked(a, b, c, z, ctl);
    }
    if z == 1.0 {
        return gauss_summation(a, b, c);
    }
    if z > 1.0 {
        return Err(Error::ArgumentRange(z));
    }
    if z > 0.0 {
        return unit_interval(a, b, c, z, 1.0 - z, ctl);
    }
    pfaff(a, b, c, z, ctl)
}

/// Pfaff route for z < 0: F(a,b;c;z) = (1−z)^{−b} F(c−a, b; c; z/(z−1)), with
/// `b` the smaller parameter.
pub fn gauss_2f1_pfaff(a: f64, b: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<f64> {
    check_c(c)?;
    if !(z < 0.0) {
        return Err(Error::ArgumentRange(z));
    }
    pfaff(a, b, c, z, ctl)
}

fn pfaff(a: f64, b: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<f64> {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let one_minus_z = 1.0 - z;
    let w = -z / one_minus_z;
    let wc = 1.0 / one_minus_z;
    Ok(one_minus_z.powf(-lo) * unit_interval(c - hi, lo, c, w, wc, ctl)?)
}

/// ₂F₁(a, b; c; w) for `w` in `[0, 1)` given both `w` and its complement
/// `wc = 1 − w`. Callers that know `1 − w` more accurately than the
/// subtraction (e.g. as a ratio of squared distances) should pass it here.
pub fn gauss_2f1_unit(a: f64, b: f64, c: f64, w: f64, wc: f64, ctl: SeriesControl) -> Result<f64> {
    check_c(c)?;
    if !(0.0..1.0).contains(&w) || !(wc > 0.0) {
        return Err(Error::ArgumentRange(w));
    }
    unit_interval(a, b, c, w, wc, ctl)
}

fn unit_interval(a: f64, b: f64, c: f64, w: f64, wc: f64, ctl: SeriesControl) -> Result<f64> {
    if w <= 0.5 || is_polynomial(a, b) {
        return series_unchecked(a, b, c, w, ctl);
    }
    let s = c - a - b;
    let n = s.round();
    if (s - n).abs() <= 1e-12 * s.abs().max(1.0) {
        if n >= 0.0 {
            return integer_connection(a, b, c, n as u32, wc, ctl);
        }
        // Euler: F(a,b;c;w) = (1−w)^{c−a−b} F(c−a, c−b; c; w)
        return Ok(wc.powf(s) * integer_connection(c - a, c - b, c, (-n) as u32, wc, ctl)?);
    }
    if (s - n).abs() < 1e-4 {
        // near-integer exponent: the connection formula cancels badly
        return series_unchecked(a, b, c, w, ctl);
    }
    // Γ(c)Γ(s)/(Γ(c−a)Γ(c−b)) F(a,b;1−s;1−w) + (1−w)^s Γ(c)Γ(−s)/(Γ(a)Γ(b)) F(c−a,c−b;1+s;1−w)
    let gc = gamma_unchecked(c);
    let left_coef = gc * gamma_unchecked(s) * rgamma(c - a) * rgamma(c - b);
    let right_coef = gc * gamma_unchecked(-s) * rgamma(a) * rgamma(b);
    let left = if left_coef == 0.0 { 0.0 } else { left_coef * series_unchecked(a, b, 1.0 - s, wc, ctl)? };
    let right = if right_coef == 0.0 {
        0.0
    } else {
        right_coef * wc.powf(s) * series_unchecked(c - a, c - b, 1.0 + s, wc, ctl)?
    };
    Ok(left + right)
}

/// Connection formula for c = a + b + n with integer n >= 0 (logarithmic case).
fn integer_connection(a: f64, b: f64, c: f64, n: u32, wc: f64, ctl: SeriesControl) -> Result<f64> {
    let ln_wc = wc.ln();
    let shrink = (1.0 - wc).clamp(1e-3, 1.0);
    if n == 0 {
        let prefactor = gamma_unchecked(c) * rgamma(a) * rgamma(b);
        let mut coef = 1.0;
        let mut psi_k1 = digamma_unchecked(1.0);
        let mut psi_a = digamma_unchecked(a);
        let mut psi_b = digamma_unchecked(b);
        let mut sum = 0.0;
        for k in 0..ctl.max_terms {
            let kf = k as f64;
            let term = coef * (2.0 * psi_k1 - psi_a - psi_b - ln_wc);
            sum += term;
            if k > 0 && term.abs() <= ctl.tol * shrink * sum.abs() {
                return Ok(prefactor * sum);
            }
            coef *= (a + kf) * (b + kf) / ((kf + 1.0) * (kf + 1.0)) * wc;
            psi_k1 += 1.0 / (kf + 1.0);
            psi_a += 1.0 / (a + kf);
            psi_b += 1.0 / (b + kf);
        }
        return Err(Error::NonConvergence { terms: ctl.max_terms });
    }

    let nf = n as f64;
    // finite part
    let mut finite = 0.0;
    let mut coef = 1.0;
    for k in 0..n {
        let kf = k as f64;
        finite += coef;
        coef *= (a + kf) * (b + kf) / ((kf + 1.0) * (1.0 - nf + kf)) * wc;
    }
    let finite = gamma_unchecked(nf) * gamma_unchecked(c) * rgamma(a + nf) * rgamma(b + nf) * finite;

    // logarithmic part
    let prefactor = gamma_unchecked(c) * rgamma(a) * rgamma(b);
    if prefactor == 0.0 {
        return Ok(finite);
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut coef = 1.0 / gamma_unchecked(nf + 1.0);
    let mut psi_k1 = digamma_unchecked(1.0);
    let mut psi_kn1 = digamma_unchecked(nf + 1.0);
    let mut psi_a = digamma_unchecked(a + nf);
    let mut psi_b = digamma_unchecked(b + nf);
    let mut sum = 0.0;
    let mut done = false;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        let term = coef * (ln_wc - psi_k1 - psi_kn1 + psi_a + psi_b);
        sum += term;
        if k > 0 && term.abs() <= ctl.tol * shrink * sum.abs() {
            done = true;
            break;
        }
        coef *= (a + nf + kf) * (b + nf + kf) / ((kf + 1.0) * (kf + nf + 1.0)) * wc;
        psi_k1 += 1.0 / (kf + 1.0);
        psi_kn1 += 1.0 / (kf + nf + 1.0);
        psi_a += 1.0 / (a + nf + kf);
        psi_b += 1.0 / (b + nf + kf);
    }
    if !done {
        return Err(Error::NonConvergence { terms: ctl.max_terms });
    }
    Ok(finite - sign * wc.powi(n as i32) * prefactor * sum)
}

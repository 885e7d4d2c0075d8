//! Odd Chebyshev approximations of `(μ/2)/x`.
//!
//! The smoothed reciprocal `h_b(x) = (1 - (1 - x²)^b)/x` has the exact
//! expansion `4 Σ_j (-1)^j [Σ_{i>j} C(2b, b+i)/4^b] T_{2j+1}(x)`. Truncating
//! that series gives a bounded polynomial close to `1/x` away from zero.
//! When `(μ/2) h_b` overshoots 1 near the origin the squared smoothing
//! `(1 - (1 - x²)^b)²/x = 2 h_b - h_{2b}` is used instead; it has a lower peak
//! and the same error contract, so no rescaling is needed.

use serde::{Deserialize, Serialize};

use crate::error::{QusoError, Result};

/// Default cap on the polynomial degree.
pub const DEFAULT_DEGREE_CAP: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyOptions {
    pub degree_cap: usize,
    /// Points on `[0, 1]` used to measure the peak and the error.
    pub grid_points: usize,
}

impl Default for PolyOptions {
    fn default() -> Self {
        Self {
            degree_cap: DEFAULT_DEGREE_CAP,
            grid_points: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionPolynomial {
    pub mu: f64,
    pub epsilon: f64,
    /// `coefficients[j]` multiplies `T_{2j+1}`.
    pub coefficients: Vec<f64>,
    pub degree: usize,
    /// `max |P|` on `[-1, 1]`, measured on the grid.
    pub max_abs: f64,
    /// `max |P(x) - (μ/2)/x|` over the grid on `[μ, 1]`.
    pub max_error: f64,
    /// 1 for `h_b`, 2 for the squared smoothing.
    pub smoothing_power: u32,
    pub b: usize,
    /// Factor applied to bring `max |P|` under 1 (1 when untouched).
    pub scale: f64,
}

impl InversionPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        chebyshev_odd_eval(&self.coefficients, x)
    }

    /// Target value `(μ/2)/x`.
    pub fn target(&self, x: f64) -> f64 {
        self.mu / 2.0 / x
    }

    /// Effective constant `C_p` in `P(x) ≈ C_p/x`.
    pub fn c_p(&self) -> f64 {
        self.mu / 2.0 * self.scale
    }
}

/// `Σ_j c[j] T_{2j+1}(x)` by Clenshaw recurrence.
pub fn chebyshev_odd_eval(c: &[f64], x: f64) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let n = 2 * c.len();
    let coef = |k: usize| if k % 2 == 1 { c[k / 2] } else { 0.0 };
    let (mut b1, mut b2) = (0.0, 0.0);
    for k in (1..n).rev() {
        let b0 = coef(k) + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2
}

/// Chebyshev coefficients of `h_b` on `T_1, T_3, …, T_{2b-1}`.
pub fn smoothed_reciprocal_coefficients(b: usize) -> Vec<f64> {
    if b == 0 {
        return Vec::new();
    }
    // p_i = C(2b, b+i) / 4^b for i = 0..=b, built from log p_0 by ratios.
    let bf = b as f64;
    let mut log_p0 = -2.0 * bf * std::f64::consts::LN_2;
    for t in 1..=b {
        log_p0 += ((bf + t as f64) / t as f64).ln();
    }
    let mut p = Vec::with_capacity(b + 1);
    let mut log_p = log_p0;
    p.push(log_p0.exp());
    for i in 0..b {
        log_p += ((bf - i as f64) / (bf + i as f64 + 1.0)).ln();
        p.push(log_p.exp());
    }
    // tail[j] = Σ_{i > j} p_i, summed from the small end
    let mut coeffs = vec![0.0; b];
    let mut acc = 0.0;
    for j in (0..b).rev() {
        acc += p[j + 1];
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[j] = 4.0 * sign * acc;
    }
    coeffs
}

/// Smallest `b` with `(1 - μ²)^b <= r`.
fn smoothing_order(mu: f64, r: f64) -> usize {
    let b = (r.ln() / (1.0 - mu * mu).ln()).ceil();
    (b.max(1.0)) as usize
}

fn grid_stats(coeffs: &[f64], mu: f64, points: usize) -> (f64, f64) {
    let mut max_abs = 0.0f64;
    let mut max_err = 0.0f64;
    for i in 0..=points {
        let x = i as f64 / points as f64;
        let v = chebyshev_odd_eval(coeffs, x);
        max_abs = max_abs.max(v.abs());
        let xe = mu + (1.0 - mu) * i as f64 / points as f64;
        let e = (chebyshev_odd_eval(coeffs, xe) - mu / 2.0 / xe).abs();
        max_err = max_err.max(e);
    }
    (max_abs, max_err)
}

fn candidate(mu: f64, eps: f64, power: u32, opts: &PolyOptions) -> Result<InversionPolynomial> {
    let (b, full) = if power == 1 {
        let b = smoothing_order(mu, eps * mu / 2.0);
        let c: Vec<f64> = smoothed_reciprocal_coefficients(b)
            .into_iter()
            .map(|v| v * mu / 2.0)
            .collect();
        (b, c)
    } else {
        let b = smoothing_order(mu, eps * mu / 4.0);
        let hb = smoothed_reciprocal_coefficients(b);
        let h2b = smoothed_reciprocal_coefficients(2 * b);
        let c: Vec<f64> = h2b
            .iter()
            .enumerate()
            .map(|(j, v)| (2.0 * hb.get(j).copied().unwrap_or(0.0) - v) * mu / 2.0)
            .collect();
        (b, c)
    };
    let budget = eps * mu / 8.0;
    let mut keep = full.len();
    let mut tail = 0.0;
    while keep > 1 && tail + full[keep - 1].abs() <= budget {
        tail += full[keep - 1].abs();
        keep -= 1;
    }
    let degree = 2 * keep - 1;
    if degree > opts.degree_cap {
        return Err(QusoError::ResourceLimit(format!(
            "inversion polynomial for mu={mu}, eps={eps} needs degree {degree} > cap {}",
            opts.degree_cap
        )));
    }
    let coefficients = full[..keep].to_vec();
    let (max_abs, max_error) = grid_stats(&coefficients, mu, opts.grid_points);
    Ok(InversionPolynomial {
        mu,
        epsilon: eps,
        coefficients,
        degree,
        max_abs,
        max_error,
        smoothing_power: power,
        b,
        scale: 1.0,
    })
}

pub fn build_inversion_polynomial(mu: f64, eps: f64) -> Result<InversionPolynomial> {
    build_inversion_polynomial_with(mu, eps, &PolyOptions::default())
}

pub fn build_inversion_polynomial_with(
    mu: f64,
    eps: f64,
    opts: &PolyOptions,
) -> Result<InversionPolynomial> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(QusoError::InvalidArgument(format!("mu must lie in (0, 1), got {mu}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(QusoError::InvalidArgument(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let mut poly = candidate(mu, eps, 1, opts)?;
    if poly.max_abs > 1.0 {
        poly = candidate(mu, eps, 2, opts)?;
    }
    if poly.max_abs > 1.0 {
        let s = 1.0 / poly.max_abs;
        for c in &mut poly.coefficients {
            *c *= s;
        }
        let (max_abs, max_error) = grid_stats(&poly.coefficients, mu, opts.grid_points);
        poly.max_abs = max_abs;
        poly.max_error = max_error;
        poly.scale = s;
    }
    Ok(poly)
}

/// Largest `ε` on a fine logarithmic scan whose polynomial has exactly
/// `degree` at threshold `μ`.
pub fn epsilon_for_degree(mu: f64, degree: usize) -> Result<f64> {
    let opts = PolyOptions {
        grid_points: 2_000,
        ..PolyOptions::default()
    };
    for step in 1..4000 {
        let eps = 10f64.powf(-(step as f64) / 200.0);
        match build_inversion_polynomial_with(mu, eps, &opts) {
            Ok(p) if p.degree == degree => return Ok(eps),
            Ok(p) if p.degree > degree => break,
            Ok(_) => {}
            Err(QusoError::ResourceLimit(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Err(QusoError::InvalidArgument(format!(
        "no epsilon gives degree {degree} at mu = {mu}"
    )))
}

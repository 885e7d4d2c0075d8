//! Phase angles for quantum signal processing.
//!
//! The circuit convention evaluated by [`evaluate_qsp_scalar`] is
//!
//! ```text
//! Re <0| e^{iφ_1 Z} R(x) e^{iφ_2 Z} R(x) ⋯ e^{iφ_d Z} R(x) |0>,
//! R(x) = [[x, √(1-x²)], [√(1-x²), -x]]
//! ```
//!
//! with no extra leading phase. Angles are found in the equivalent
//! `W(x) = e^{i arccos(x) X}` convention with a symmetric phase vector
//! `Ψ = (ψ_0, …, ψ_d)`, solving `Re <0|U_Ψ(x_j)|0> = P(x_j)` on the positive
//! Chebyshev nodes by damped Newton iteration, then converted with
//! `R(x) = -i e^{iπZ/4} W(x) e^{iπZ/4}`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::poly::{chebyshev_odd_eval, InversionPolynomial};
use crate::error::{QusoError, Result};
use crate::C64;

/// Tag for the circuit convention above.
pub const CONVENTION: &str = "reflection-real-part";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSequence {
    pub phases: Vec<f64>,
    pub convention: String,
    /// Max deviation from the target on the verification grid.
    pub max_error: f64,
    pub iterations: usize,
}

impl PhaseSequence {
    pub fn degree(&self) -> usize {
        self.phases.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    pub max_iterations: usize,
    /// Stop once the max residual on the nodes falls below this.
    pub residual_tolerance: f64,
    /// Required max error on the verification grid.
    pub verify_tolerance: f64,
    /// Chebyshev nodes on `[-1, 1]` used for verification.
    pub verify_points: usize,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            residual_tolerance: 1e-13,
            verify_tolerance: 1e-8,
            verify_points: 1000,
        }
    }
}

/// Real part of the `(0,0)` entry of the circuit-convention QSP product.
/// An empty phase list gives 1.
pub fn evaluate_qsp_scalar(phases: &[f64], x: f64) -> f64 {
    qsp_amplitude(phases, x).re
}

/// Full complex `(0,0)` entry of the circuit-convention QSP product.
pub fn qsp_amplitude(phases: &[f64], x: f64) -> C64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    // row vector <0| times the product, left to right
    let mut r0 = C64::new(1.0, 0.0);
    let mut r1 = C64::new(0.0, 0.0);
    for &phi in phases {
        let e = C64::from_polar(1.0, phi);
        let (a0, a1) = (r0 * e, r1 * e.conj());
        r0 = a0 * x + a1 * s;
        r1 = a0 * s - a1 * x;
    }
    r0
}

/// `<0|U_Ψ(x)|0>` in the `W(x)` convention.
pub fn wx_amplitude(psi: &[f64], x: f64) -> C64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let is = C64::new(0.0, s);
    let mut r0 = C64::from_polar(1.0, psi[0]);
    let mut r1 = C64::new(0.0, 0.0);
    for &p in &psi[1..] {
        let (a0, a1) = (r0 * x + r1 * is, r0 * is + r1 * x);
        let e = C64::from_polar(1.0, p);
        r0 = a0 * e;
        r1 = a1 * e.conj();
    }
    r0
}

/// Converts a `W(x)` phase vector of length `d + 1` to circuit phases.
pub fn wx_to_circuit(psi: &[f64]) -> Vec<f64> {
    let d = psi.len() - 1;
    let mut out = Vec::with_capacity(d);
    if d == 0 {
        return out;
    }
    let shift = (d % 4) as f64 * FRAC_PI_2;
    out.push(wrap(psi[0] + psi[d] - FRAC_PI_2 + shift));
    for &p in &psi[1..d] {
        out.push(wrap(p - FRAC_PI_2));
    }
    out
}

fn wrap(a: f64) -> f64 {
    let t = a.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Value and gradient of `Re <0|U_Ψ(x)|0>` with respect to the free
/// half of a symmetric `Ψ`.
fn value_and_gradient(psi: &[f64], half: usize, x: f64, grad: &mut [f64]) -> f64 {
    let d = psi.len() - 1;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let is = C64::new(0.0, s);
    let w = |v: [C64; 2]| [v[0] * x + v[1] * is, v[0] * is + v[1] * x];
    let ph = |v: [C64; 2], p: f64| {
        let e = C64::from_polar(1.0, p);
        [v[0] * e, v[1] * e.conj()]
    };
    // rows[k] = <0| (product of factors before phase k); cols[k] = (phase k and after)|0>
    let mut rows = vec![[C64::new(0.0, 0.0); 2]; d + 1];
    rows[0] = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    for k in 0..d {
        // row-vector times e^{iψZ} W; W is symmetric so the same update applies
        rows[k + 1] = w(ph(rows[k], psi[k]));
    }
    let mut cols = vec![[C64::new(0.0, 0.0); 2]; d + 1];
    cols[d] = ph([C64::new(1.0, 0.0), C64::new(0.0, 0.0)], psi[d]);
    for k in (0..d).rev() {
        cols[k] = ph(w(cols[k + 1]), psi[k]);
    }
    let value = rows[0][0] * cols[0][0] + rows[0][1] * cols[0][1];
    for g in grad.iter_mut() {
        *g = 0.0;
    }
    for k in 0..=d {
        let r = rows[k];
        let c = cols[k];
        let deriv = C64::new(0.0, 1.0) * (r[0] * c[0] - r[1] * c[1]);
        let idx = if k < half { k } else { d - k };
        grad[idx] += deriv.re;
    }
    value.re
}

/// Positive Chebyshev nodes `cos((2j-1)π/(4n))`, `j = 1..=n`.
fn positive_nodes(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| ((2 * j - 1) as f64 * PI / (4 * n) as f64).cos())
        .collect()
}

/// Phases for an odd polynomial given by its Chebyshev coefficients on
/// `T_1, T_3, …`. Requires `max |P| < 1`.
pub fn find_phases_odd(coefficients: &[f64], opts: &PhaseOptions) -> Result<PhaseSequence> {
    let half = coefficients.len();
    if half == 0 {
        return Err(QusoError::InvalidArgument("empty polynomial".into()));
    }
    let d = 2 * half - 1;
    let nodes = positive_nodes(half);
    let target: Vec<f64> = nodes.iter().map(|&x| chebyshev_odd_eval(coefficients, x)).collect();

    let expand = |theta: &[f64]| -> Vec<f64> {
        let mut psi = vec![0.0; d + 1];
        for (k, &t) in theta.iter().enumerate() {
            psi[k] = t;
            psi[d - k] = t;
        }
        psi
    };
    let residual = |theta: &[f64], jac: Option<&mut DMatrix<f64>>| -> DVector<f64> {
        let psi = expand(theta);
        let mut grad = vec![0.0; half];
        let mut r = DVector::zeros(half);
        match jac {
            Some(j) => {
                for (row, &x) in nodes.iter().enumerate() {
                    r[row] = value_and_gradient(&psi, half, x, &mut grad) - target[row];
                    for (col, g) in grad.iter().enumerate() {
                        j[(row, col)] = *g;
                    }
                }
            }
            None => {
                for (row, &x) in nodes.iter().enumerate() {
                    r[row] = wx_amplitude(&psi, x).re - target[row];
                }
            }
        }
        r
    };

    let mut theta = vec![0.0; half];
    theta[0] = FRAC_PI_4;
    let mut jac = DMatrix::zeros(half, half);
    let mut r = residual(&theta, Some(&mut jac));
    let mut iterations = 0;
    while r.amax() > opts.residual_tolerance {
        if iterations >= opts.max_iterations {
            return Err(QusoError::NoConvergence {
                iterations,
                residual: r.amax(),
            });
        }
        iterations += 1;
        let step = jac.clone().lu().solve(&(-&r)).ok_or(QusoError::NoConvergence {
            iterations,
            residual: r.amax(),
        })?;
        let current = r.norm();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let rt = residual(&trial, None);
            if rt.norm() < current {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => theta = next,
            // no decrease possible: at the floating-point floor
            None => break,
        }
        r = residual(&theta, Some(&mut jac));
    }

    let phases = wx_to_circuit(&expand(&theta));
    let max_error = verify(&phases, coefficients, opts.verify_points);
    if !(max_error <= opts.verify_tolerance) {
        return Err(QusoError::NoConvergence {
            iterations,
            residual: max_error,
        });
    }
    Ok(PhaseSequence {
        phases,
        convention: CONVENTION.to_string(),
        max_error,
        iterations,
    })
}

/// Max `|QSP(x) - P(x)|` over `points` Chebyshev nodes on `[-1, 1]`.
pub fn verify(phases: &[f64], coefficients: &[f64], points: usize) -> f64 {
    (0..points)
        .map(|j| {
            let x = ((2 * j + 1) as f64 * PI / (2 * points) as f64).cos();
            (evaluate_qsp_scalar(phases, x) - chebyshev_odd_eval(coefficients, x)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn find_phases(poly: &InversionPolynomial) -> Result<PhaseSequence> {
    find_phases_odd(&poly.coefficients, &PhaseOptions::default())
}

//! Matrix inversion by quantum singular value transformation.

mod cache;
mod circuit;
mod phases;
mod poly;

pub use cache::{PhaseCache, CODE_VERSION};
pub use circuit::{
    branch_amplitudes, build_qsvt_circuit, build_vb, c_b, projector_phase, solver_layout,
    LinearSolver, SolverConstants, BLOCK_ANCILLAS,
};
pub use phases::{
    evaluate_qsp_scalar, find_phases, find_phases_odd, qsp_amplitude, verify, wx_amplitude,
    wx_to_circuit, PhaseOptions, PhaseSequence, CONVENTION,
};
pub use poly::{
    build_inversion_polynomial, build_inversion_polynomial_with, chebyshev_odd_eval,
    epsilon_for_degree, smoothed_reciprocal_coefficients, InversionPolynomial, PolyOptions,
    DEFAULT_DEGREE_CAP,
};

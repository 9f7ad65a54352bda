//! Twist-operator overlaps and geometric phases for two-band lattice models.
//!
//! The central quantity is the ground-state expectation value of the lattice
//! twist operator, `z = <g| exp((2πi/N) Σ_x x n_x) |g>`, evaluated exactly for
//! translation-invariant two-band Hamiltonians `H(k) = Σ_μ R_μ(k) σ_μ` with the
//! lower band filled. Its argument is the geometric phase `γ_g = Arg z`, and
//! the nodal structure of `z` (parameter regions where it vanishes) tracks the
//! phase diagram of the underlying model.
//!
//! When the Bloch vector satisfies `R_y(k) = -R_y(-k)`, the overlap factorises
//! over grid momenta. Each mode contributes the diagonal matrix element of a
//! 2×2 unitary generated by the band couplings `(K', K)`, and the full `z` is
//! the product of those factors accumulated in the log domain.
//!
//! Modules:
//! - [`grid`]: periodic momentum grids closed under `k ↔ -k`.
//! - [`bloch`]: Bloch vectors, band geometry, and the `(K', K)` couplings.
//! - [`models`]: closed-form model families (free fermion, dimerized chain,
//!   tabulated) with analytic couplings.
//! - [`symmetry`]: the `R_y` antisymmetry precondition check.
//! - [`engine`]: per-mode factors, stable product accumulation, evaluation.
//! - [`oracle`]: independent brute-force validators (numerical 2×2 matrix
//!   exponential, finite-difference couplings, a real-space many-body
//!   determinant) and the variant-comparison report.
//!
//! ```
//! use twistz::{evaluate, ModelSpec, MomentumGrid};
//!
//! // dimerized chain in the phase with a ±π geometric-phase plateau
//! let model = ModelSpec::ssh(-0.5)?;
//! let grid = MomentumGrid::build(&[1001])?;
//! let result = evaluate(&model, &grid, 0)?;
//! assert!(result.abs_z() > 0.99);
//! assert!((result.geometric_phase().unwrap().abs() - std::f64::consts::PI).abs() < 0.05);
//! # Ok::<(), twistz::TwistError>(())
//! ```

pub mod bloch;
pub mod engine;
pub mod error;
pub mod grid;
pub mod models;
pub mod oracle;
pub mod symmetry;

pub use bloch::{mode_angles, mode_couplings, BlochVector, ModeCouplings, ModeGeometry};
pub use engine::{
    accumulate, evaluate, evaluate_with, mode_factor, mode_factor_spectral, principal_angle,
    EvalOptions, ModeFactor, NConvention, TwistResult, DEFAULT_ILL_DEFINED_THRESHOLD,
};
pub use error::TwistError;
pub use grid::{Momentum, MomentumGrid};
pub use models::{min_gap, Dispersion, GapReport, ModelSpec};
pub use symmetry::{check_twist_symmetry, SymmetryReport};

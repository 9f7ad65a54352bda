use thiserror::Error;

use crate::grid::Momentum;

/// Errors raised across the crate.
///
/// `SingularMode`, `GapClosure` and `Stencil` carry the offending momentum;
/// the evaluation pipeline records such modes instead of aborting, while all
/// other variants are hard failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwistError {
    #[error("invalid grid dimensions: {0}")]
    InvalidDimensions(String),

    /// `(R_x, R_y) = (0, 0)`: the in-plane angle of the Bloch vector is
    /// undefined at this momentum.
    #[error("singular mode at k = {k}: (R_x, R_y) = (0, 0)")]
    SingularMode { k: Momentum },

    /// `|R| = 0`: the two bands touch at this momentum.
    #[error("gap closure at k = {k}: |R(k)| = 0")]
    GapClosure { k: Momentum },

    /// Free-fermion pairing γ = 0 makes the Hamiltonian commute with the
    /// twist, so the overlap carries no information.
    #[error("trivial twist: free-fermion pairing gamma = 0 commutes with the twist operator")]
    TrivialTwist,

    /// `R_y(k) = -R_y(-k)` fails somewhere on the grid; the per-mode
    /// factorisation of z does not hold and evaluation refuses to proceed.
    #[error(
        "R_y antisymmetry violated: max |R_y(k) + R_y(-k)| = {residual:.3e} \
         (energy scale {scale:.3e}, worst k = {worst_k})"
    )]
    SymmetryViolation {
        residual: f64,
        scale: f64,
        worst_k: Momentum,
    },

    #[error("every grid mode is singular; the overlap is undefined")]
    AllModesSingular,

    /// Spectral-expansion coefficient `C±²` vanished with `|K| > 0`.
    #[error("degenerate spectral coefficient: C+^2 or C-^2 = 0 with |K| > 0")]
    DegenerateCoefficient,

    /// The half-filled Fermi sea is not unique: an orbital sits at zero energy.
    #[error("degenerate half filling: orbital at |E| = {energy:.3e}")]
    DegenerateHalfFilling { energy: f64 },

    /// A finite-difference stencil reached into a singular mode.
    #[error("finite-difference stencil crosses a singular mode near k = {k}")]
    Stencil { k: Momentum },

    /// The model does not admit smooth band angles, so finite differences on
    /// them are meaningless (piecewise-constant gauge angle, or no off-grid
    /// Bloch vector at all).
    #[error("finite differences unsupported for this model: {0}")]
    UnsupportedDerivatives(&'static str),

    #[error("custom model table: {0}")]
    Table(String),

    #[error("{0}")]
    Domain(String),
}

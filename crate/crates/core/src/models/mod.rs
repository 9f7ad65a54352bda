//! Closed-form two-band models and their analytic twist couplings.
//!
//! Two built-in families plus tabulated custom models:
//!
//! - [`FreeFermion`]: D-dimensional nearest-neighbor hopping with pairing
//!   `gamma` and chemical potential `lambda`. The Bloch vector has `R_x ≡ 0`,
//!   so the azimuthal angle is piecewise constant and the generic
//!   angle-derivative pipeline does not apply; the coupling along the twist
//!   axis is supplied in closed form instead, with `K' = 0`.
//! - [`Ssh`]: the dimerized two-site chain. `R_z ≡ 0`, so `θ ≡ π/2` and
//!   `|K| = |K'|`; the coupling comes from a closed form for `K'`.
//! - [`CustomModel`]: a Bloch vector tabulated on the full grid, with
//!   couplings from nearest-branch central differences at grid spacing.
//!
//! Both built-in families satisfy `R_y(k) = -R_y(-k)` on every grid, which is
//! the precondition for the per-mode factorisation of the twist overlap.

mod custom;
mod free_fermion;
mod ssh;

pub use custom::CustomModel;
pub use free_fermion::{free_fermion_dispersion, free_fermion_k_mu, free_fermion_r, FreeFermion};
pub use ssh::{ssh_factor_from_kprime, ssh_k_prime, ssh_r, Ssh};

use crate::bloch::{BlochVector, ModeCouplings};
use crate::error::TwistError;
use crate::grid::{Momentum, MomentumGrid};

/// Relative threshold below which a mode counts as singular (gap closure or
/// undefined in-plane angle), measured against the model's energy scale.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

/// A two-band model that can be evaluated on a momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    FreeFermion(FreeFermion),
    Ssh(Ssh),
    Custom(CustomModel),
}

impl ModelSpec {
    /// Free-fermion model with `dim ∈ {1, 2, 3}`.
    pub fn free_fermion(dim: usize, lambda: f64, gamma: f64) -> Result<Self, TwistError> {
        Ok(ModelSpec::FreeFermion(FreeFermion::new(
            dim, lambda, gamma,
        )?))
    }

    /// Dimerized chain with `|phi| <= 1`.
    pub fn ssh(phi: f64) -> Result<Self, TwistError> {
        Ok(ModelSpec::Ssh(Ssh::new(phi)?))
    }

    pub fn custom(model: CustomModel) -> Self {
        ModelSpec::Custom(model)
    }

    /// Number of spatial dimensions.
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::FreeFermion(m) => m.dim,
            ModelSpec::Ssh(_) => 1,
            ModelSpec::Custom(m) => m.dim(),
        }
    }

    /// Upper bound on `|R(k)|`, used to scale singularity thresholds.
    pub fn energy_scale(&self) -> f64 {
        match self {
            ModelSpec::FreeFermion(m) => m.energy_scale(),
            ModelSpec::Ssh(_) => 2.0,
            ModelSpec::Custom(m) => m.energy_scale(),
        }
    }

    /// True when the twist commutes with the Hamiltonian and the overlap is
    /// uninformative (free-fermion with `gamma = 0`).
    pub fn trivial_twist(&self) -> bool {
        matches!(self, ModelSpec::FreeFermion(m) if m.gamma == 0.0)
    }

    /// Check that a grid is compatible with this model.
    pub fn validate_grid(&self, grid: &MomentumGrid) -> Result<(), TwistError> {
        match self {
            ModelSpec::Custom(m) => m.validate_grid(grid),
            _ => {
                if grid.dim() != self.dim() {
                    return Err(TwistError::Domain(format!(
                        "model is {}-dimensional but grid has {} axes",
                        self.dim(),
                        grid.dim()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Bloch vector at a momentum.
    ///
    /// For custom models the momentum must be a point of the tabulated grid.
    pub fn bloch(&self, k: &Momentum) -> Result<BlochVector, TwistError> {
        match self {
            ModelSpec::FreeFermion(m) => Ok(free_fermion_r(k, m)),
            ModelSpec::Ssh(m) => Ok(ssh_r(k, m)),
            ModelSpec::Custom(m) => m.lookup(k),
        }
    }

    /// Twist couplings `(K', K)` at grid point `index`, twist along `axis`.
    ///
    /// Singular modes surface as [`TwistError::SingularMode`] /
    /// [`TwistError::GapClosure`] / [`TwistError::Stencil`] carrying the
    /// momentum; the engine records those rather than aborting.
    pub fn couplings(
        &self,
        grid: &MomentumGrid,
        index: usize,
        axis: usize,
    ) -> Result<ModeCouplings, TwistError> {
        match self {
            ModelSpec::FreeFermion(m) => m.couplings(grid.point(index), axis),
            ModelSpec::Ssh(m) => m.couplings(grid.point(index)),
            ModelSpec::Custom(m) => m.couplings(grid, index, axis),
        }
    }
}

/// Gapped dispersion data of the free-fermion model at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    /// `t_k = Σ_α cos k_α - λ`
    pub t_k: f64,
    /// `Δ_k = γ Σ_α sin k_α`
    pub delta_k: f64,
}

impl Dispersion {
    /// Quasiparticle energy `Λ_k = sqrt(t_k² + Δ_k²)`.
    pub fn lambda_k(&self) -> f64 {
        self.t_k.hypot(self.delta_k)
    }
}

/// Minimum of `|R(k)|` over the grid (the quasiparticle gap scale).
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub min: f64,
    pub argmin: Momentum,
}

/// Scan `|R(k)|` over the grid and report the minimum and its momentum.
///
/// For the free-fermion model `|R(k)| = Λ_k`, so this locates gapless modes;
/// the same scan annotates gapped/gapless regions for any model.
pub fn min_gap(model: &ModelSpec, grid: &MomentumGrid) -> Result<GapReport, TwistError> {
    model.validate_grid(grid)?;
    let mut best = f64::INFINITY;
    let mut argmin = grid.point(0);
    for k in grid.points() {
        let mag = model.bloch(k)?.magnitude();
        if mag < best {
            best = mag;
            argmin = *k;
        }
    }
    Ok(GapReport { min: best, argmin })
}

//! D-dimensional free-fermion model: nearest-neighbor hopping, pairing
//! `gamma`, chemical potential `lambda`.
//!
//! In momentum space `R(k) = (0, γ Σ_α sin k_α, λ - Σ_α cos k_α)` and
//! `|R(k)| = Λ_k`, the quasiparticle energy. The spectrum is gapless on grids
//! that hit `Λ_k = 0`; the critical couplings are `λ_c = D` (and `λ = 0` for
//! `D = 2`, which the overlap cannot see — that transition deforms the Fermi
//! surface without closing the gap at the twist-relevant modes).
//!
//! Because `R_x ≡ 0` the azimuthal angle is `±π/2` with jumps at the zeros of
//! `R_y`, so angle derivatives are distributional and the generic pipeline is
//! disabled; the twist coupling along axis `μ` comes in closed form with
//! `K' = 0`:
//!
//! ```text
//! K_μ = -iγ t (cos k_μ · t - sin k_μ · Σ_α sin k_α) / (2 Λ_k³),   t = λ - Σ_α cos k_α
//! ```
//!
//! With `K' = 0` the per-mode factor reduces to `cos(2π|K_μ|/N)`, which is
//! real, so `z` is real and the geometric phase is exactly 0 or π.

use num_complex::Complex64;

use super::SINGULAR_REL_TOL;
use crate::bloch::{BlochVector, ModeCouplings};
use crate::error::TwistError;
use crate::grid::Momentum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFermion {
    pub dim: usize,
    pub lambda: f64,
    pub gamma: f64,
}

impl FreeFermion {
    pub fn new(dim: usize, lambda: f64, gamma: f64) -> Result<Self, TwistError> {
        if !(1..=3).contains(&dim) {
            return Err(TwistError::Domain(format!(
                "free-fermion dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if !lambda.is_finite() || !gamma.is_finite() {
            return Err(TwistError::Domain(
                "free-fermion parameters must be finite".into(),
            ));
        }
        Ok(FreeFermion { dim, lambda, gamma })
    }

    /// Upper bound on `|R(k)|`.
    pub fn energy_scale(&self) -> f64 {
        let d = self.dim as f64;
        (self.lambda.abs() + d) + self.gamma.abs() * d
    }

    pub(super) fn couplings(&self, k: Momentum, axis: usize) -> Result<ModeCouplings, TwistError> {
        if self.gamma == 0.0 {
            return Err(TwistError::TrivialTwist);
        }
        if axis >= self.dim {
            return Err(TwistError::Domain(format!(
                "twist axis {axis} out of range for a {}-dimensional model",
                self.dim
            )));
        }
        let r = free_fermion_r(&k, self);
        if r.magnitude() <= SINGULAR_REL_TOL * self.energy_scale() {
            return Err(TwistError::GapClosure { k });
        }
        Ok(ModeCouplings::new(
            Complex64::new(0.0, 0.0),
            free_fermion_k_mu(&k, self, axis),
        ))
    }
}

/// Bloch vector `R(k) = (0, γ Σ sin k_α, λ - Σ cos k_α)`, `R_0 = 0`.
pub fn free_fermion_r(k: &Momentum, m: &FreeFermion) -> BlochVector {
    BlochVector::new(0.0, 0.0, m.gamma * k.sum_sin(), m.lambda - k.sum_cos())
}

/// Closed-form twist coupling `K_μ` along `axis`.
///
/// Only meaningful away from gap closures (`Λ_k > 0`); callers check first.
pub fn free_fermion_k_mu(k: &Momentum, m: &FreeFermion, axis: usize) -> Complex64 {
    let s_cos = k.sum_cos();
    let s_sin = k.sum_sin();
    let t = m.lambda - s_cos;
    let k_mu = k.get(axis);
    let numerator = m.gamma * t * (k_mu.cos() * t - k_mu.sin() * s_sin);
    let lam_sq = m.gamma * m.gamma * s_sin * s_sin + t * t;
    Complex64::new(0.0, -numerator / (2.0 * lam_sq.powf(1.5)))
}

/// Dispersion data `t_k = Σ cos k_α - λ`, `Δ_k = γ Σ sin k_α`.
pub fn free_fermion_dispersion(k: &Momentum, m: &FreeFermion) -> super::Dispersion {
    super::Dispersion {
        t_k: k.sum_cos() - m.lambda,
        delta_k: m.gamma * k.sum_sin(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    #[test]
    fn bloch_vector_substitutions() {
        let m = FreeFermion::new(1, 0.0, 1.0).unwrap();
        let r = free_fermion_r(&Momentum::new(&[FRAC_PI_2]), &m);
        assert_relative_eq!(r.rx, 0.0);
        assert_relative_eq!(r.ry, 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.rz, 0.0, epsilon = 1e-15);

        let m2 = FreeFermion::new(2, 2.0, 1.0).unwrap();
        let r2 = free_fermion_r(&Momentum::new(&[PI, PI]), &m2);
        assert_relative_eq!(r2.ry, 0.0, epsilon = 1e-15);
        assert_relative_eq!(r2.rz, 4.0, max_relative = 1e-15);
    }

    #[test]
    fn gap_closes_at_critical_mode() {
        let m = FreeFermion::new(1, 1.0, 1.0).unwrap();
        let r = free_fermion_r(&Momentum::new(&[TAU]), &m);
        assert!(r.ry.abs() < 1e-15);
        assert!(r.rz.abs() < 1e-15);
        assert!(matches!(
            m.couplings(Momentum::new(&[TAU]), 0),
            Err(TwistError::GapClosure { .. })
        ));
    }

    #[test]
    fn coupling_spot_values() {
        // λ=0, γ=1, k=2π: K = -i/2
        let m = FreeFermion::new(1, 0.0, 1.0).unwrap();
        let k = free_fermion_k_mu(&Momentum::new(&[TAU]), &m, 0);
        assert_relative_eq!(k.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(k.im, -0.5, max_relative = 1e-14);

        // λ=0, γ=1, k=π/2: the t factor vanishes, K = 0
        let k = free_fermion_k_mu(&Momentum::new(&[FRAC_PI_2]), &m, 0);
        assert!(k.norm() < 1e-15);

        // λ=2, γ=1, k=π: numerator 9i over 54, K = i/6
        let m2 = FreeFermion::new(1, 2.0, 1.0).unwrap();
        let k = free_fermion_k_mu(&Momentum::new(&[PI]), &m2, 0);
        assert_relative_eq!(k.im, 1.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(k.re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn coupling_magnitude_is_even_in_k() {
        let m = FreeFermion::new(1, 0.7, 0.8).unwrap();
        for kk in [0.3, 1.1, 2.5] {
            let a = free_fermion_k_mu(&Momentum::new(&[kk]), &m, 0).norm();
            let b = free_fermion_k_mu(&Momentum::new(&[TAU - kk]), &m, 0).norm();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn dispersion_invariants() {
        let m = FreeFermion::new(2, 0.5, 0.7).unwrap();
        let k = Momentum::new(&[1.0, 2.0]);
        let d = free_fermion_dispersion(&k, &m);
        assert!(d.lambda_k() >= d.t_k.abs());
        assert!(d.lambda_k() >= d.delta_k.abs());
        let r = free_fermion_r(&k, &m);
        assert_relative_eq!(d.lambda_k(), r.magnitude(), max_relative = 1e-14);
    }

    #[test]
    fn zero_pairing_refused() {
        let m = FreeFermion::new(2, 1.0, 0.0).unwrap();
        assert!(matches!(
            m.couplings(Momentum::new(&[1.0, 1.0]), 0),
            Err(TwistError::TrivialTwist)
        ));
    }
}

//! Dimerized two-site chain (polyacetylene-type hopping).
//!
//! Unit cells pair sites `(c_l, c_{l+1})` with intra-cell hopping `-(1+φ)` and
//! inter-cell hopping `-(1-φ)`, so the momentum grid indexes cells and the
//! twist phase counts cells. The Bloch vector is
//!
//! ```text
//! R(k) = (-(1+φ) - (1-φ) cos k,  -(1-φ) sin k,  0)
//! ```
//!
//! `R_z ≡ 0` gives `θ ≡ π/2`, hence `|K| = |K'|`, `Ω = √2 |K'|`, and a closed
//! form for the purely imaginary `K'`:
//!
//! ```text
//! K' = -(i/2) [(1-φ)² + (1-φ²) cos k] / [(1-φ)² sin²k + (1+φ+(1-φ) cos k)²]
//! ```
//!
//! The denominator is `R_x² + R_y²`, which vanishes only at `φ = 0, k = π`
//! (the gap closure of the uniform chain). The two gapped phases are told
//! apart by the geometric phase plateau: `±π` for `φ < 0`, `0` for `φ > 0`.

use num_complex::Complex64;

use super::SINGULAR_REL_TOL;
use crate::bloch::{BlochVector, ModeCouplings};
use crate::error::TwistError;
use crate::grid::Momentum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ssh {
    pub phi: f64,
}

impl Ssh {
    pub fn new(phi: f64) -> Result<Self, TwistError> {
        if !phi.is_finite() || phi.abs() > 1.0 {
            return Err(TwistError::Domain(format!(
                "dimerization must satisfy |phi| <= 1, got {phi}"
            )));
        }
        Ok(Ssh { phi })
    }

    pub(super) fn couplings(&self, k: Momentum) -> Result<ModeCouplings, TwistError> {
        let r = ssh_r(&k, self);
        // scale 2 = max |R| over the whole family
        if r.magnitude() <= SINGULAR_REL_TOL * 2.0 {
            return Err(TwistError::GapClosure { k });
        }
        let kprime = ssh_k_prime(&k, self)?;
        // θ ≡ π/2 and ∂θ = 0, so K = -e^{iγ} K' with γ = atan2(R_y, R_x)
        let phase = Complex64::new(r.rx, r.ry) / r.magnitude();
        Ok(ModeCouplings::new(kprime, -phase * kprime))
    }
}

/// Bloch vector of the dimerized chain; `R_z = 0` always.
pub fn ssh_r(k: &Momentum, m: &Ssh) -> BlochVector {
    let kk = k.get(0);
    BlochVector::new(
        0.0,
        -(1.0 + m.phi) - (1.0 - m.phi) * kk.cos(),
        -(1.0 - m.phi) * kk.sin(),
        0.0,
    )
}

/// Closed-form `K'(k)`, purely imaginary.
///
/// Fails only where the denominator `R_x² + R_y²` vanishes (`φ = 0, k = π`).
pub fn ssh_k_prime(k: &Momentum, m: &Ssh) -> Result<Complex64, TwistError> {
    let kk = k.get(0);
    let one_minus = 1.0 - m.phi;
    let numerator = one_minus * one_minus + (1.0 - m.phi * m.phi) * kk.cos();
    let s = one_minus * kk.sin();
    let c = 1.0 + m.phi + one_minus * kk.cos();
    let denominator = s * s + c * c;
    if denominator <= (SINGULAR_REL_TOL * 2.0) * (SINGULAR_REL_TOL * 2.0) {
        return Err(TwistError::SingularMode { k: *k });
    }
    Ok(Complex64::new(0.0, -0.5 * numerator / denominator))
}

/// Per-mode factor written directly in terms of `K'`, using `|K| = |K'|`:
/// `cos(2√2 π |K'| / N) - i (Im K' / (√2 |K'|)) sin(2√2 π |K'| / N)`.
///
/// Provided as an independent arithmetic route for cross-checks; agrees with
/// the generic per-mode factor at every non-singular momentum.
pub fn ssh_factor_from_kprime(kprime: Complex64, n_total: usize) -> Complex64 {
    let a = kprime.norm();
    if a == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let x = 2.0 * 2.0_f64.sqrt() * std::f64::consts::PI * a / n_total as f64;
    Complex64::new(x.cos(), -kprime.im / (2.0_f64.sqrt() * a) * x.sin())
}

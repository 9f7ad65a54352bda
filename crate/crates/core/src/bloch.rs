//! Bloch vectors, band geometry, and twist couplings.
//!
//! A two-band Hamiltonian at one momentum is `H(k) = Σ_μ R_μ(k) σ_μ` with
//! `σ_0 = I` and the Pauli matrices `σ_{x,y,z}`. Diagonalising `R·σ` gives the
//! band eigenvectors `ν_±` and energies `E_∓ = R_0 ∓ R`. The twist operator,
//! rewritten in the band basis, couples the two bands of each mode through
//!
//! ```text
//! K' = -i sin²(θ/2) ∂γ,    K = (e^{iγ}/2)(∂θ + i sin θ ∂γ),
//! ```
//!
//! where `cos θ = R_z/R`, `γ = atan2(R_y, R_x)` and the derivatives are taken
//! along the twist direction. `γ` uses the quadrant-aware two-argument form:
//! `R_x < 0` occurs in the dimerized chain and a single-argument arctangent
//! would lose the quadrant.

use num_complex::Complex64;

/// Pauli coefficients of a two-band Hamiltonian at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub r0: f64,
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    pub fn new(r0: f64, rx: f64, ry: f64, rz: f64) -> Self {
        BlochVector { r0, rx, ry, rz }
    }

    /// `R = |(R_x, R_y, R_z)|`, half the band gap.
    pub fn magnitude(&self) -> f64 {
        (self.rx * self.rx + self.ry * self.ry + self.rz * self.rz).sqrt()
    }

    /// Norm of the in-plane part `(R_x, R_y)`.
    pub fn xy_norm(&self) -> f64 {
        self.rx.hypot(self.ry)
    }
}

/// Why band angles could not be computed at a momentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleIssue {
    /// `(R_x, R_y) = (0, 0)`: the azimuthal angle is undefined.
    SingularXy,
    /// `R = 0`: the bands touch.
    GapClosure,
}

/// Band geometry at one momentum: angles, energies, eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeometry {
    /// Polar angle in `[0, π]`, `cos θ = R_z / R`.
    pub theta: f64,
    /// Azimuthal angle in `(-π, π]`, `atan2(R_y, R_x)`.
    pub gamma_angle: f64,
    /// Lower band energy `R_0 - R`.
    pub e_minus: f64,
    /// Upper band energy `R_0 + R`.
    pub e_plus: f64,
    /// Normalized lower-band eigenvector of `R·σ` (eigenvalue `-R`).
    pub nu_minus: [Complex64; 2],
    /// Normalized upper-band eigenvector of `R·σ` (eigenvalue `+R`).
    pub nu_plus: [Complex64; 2],
}

/// Band angles, energies and eigenvectors of `R·σ`.
///
/// Fails with [`AngleIssue::GapClosure`] when `R = 0` and with
/// [`AngleIssue::SingularXy`] when `(R_x, R_y) = (0, 0)`; callers translate
/// these into momentum-carrying errors.
pub fn mode_angles(r: &BlochVector) -> Result<ModeGeometry, AngleIssue> {
    let mag = r.magnitude();
    if mag == 0.0 {
        return Err(AngleIssue::GapClosure);
    }
    if r.xy_norm() == 0.0 {
        return Err(AngleIssue::SingularXy);
    }
    let theta = (r.rz / mag).clamp(-1.0, 1.0).acos();
    let mut gamma_angle = r.ry.atan2(r.rx);
    if gamma_angle <= -std::f64::consts::PI {
        gamma_angle = std::f64::consts::PI;
    }
    let xy = Complex64::new(r.rx, -r.ry);
    let norm_minus = (2.0 * mag * (mag + r.rz)).sqrt();
    let norm_plus = (2.0 * mag * (mag - r.rz)).sqrt();
    Ok(ModeGeometry {
        theta,
        gamma_angle,
        e_minus: r.r0 - mag,
        e_plus: r.r0 + mag,
        nu_minus: [
            xy / norm_minus,
            Complex64::new(-mag - r.rz, 0.0) / norm_minus,
        ],
        nu_plus: [xy / norm_plus, Complex64::new(mag - r.rz, 0.0) / norm_plus],
    })
}

/// Band-basis generator entries of the twist at one momentum.
///
/// `kprime` is purely imaginary by construction; `omega` is the rotation rate
/// `sqrt(|K'|² + |K|²)` of the per-mode 2×2 generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCouplings {
    pub kprime: Complex64,
    pub kbig: Complex64,
}

impl ModeCouplings {
    pub fn new(kprime: Complex64, kbig: Complex64) -> Self {
        ModeCouplings { kprime, kbig }
    }

    /// `Ω = sqrt(|K'|² + |K|²)`.
    pub fn omega(&self) -> f64 {
        (self.kprime.norm_sqr() + self.kbig.norm_sqr()).sqrt()
    }
}

/// Couplings from band angles and their derivatives along the twist direction.
pub fn mode_couplings(theta: f64, gamma: f64, dtheta: f64, dgamma: f64) -> ModeCouplings {
    let half_sin = (theta / 2.0).sin();
    let kprime = Complex64::new(0.0, -half_sin * half_sin * dgamma);
    let kbig =
        0.5 * Complex64::from_polar(1.0, gamma) * Complex64::new(dtheta, theta.sin() * dgamma);
    ModeCouplings { kprime, kbig }
}

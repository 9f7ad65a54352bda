//! Independent brute-force validators.
//!
//! Everything here recomputes quantities the closed forms claim, by a
//! different route:
//!
//! - [`exp_factor_oracle`]: numerically exponentiates the per-mode 2×2
//!   generator (scaling-and-squaring plus Taylor) instead of using the
//!   closed-form matrix element.
//! - [`fd_couplings`]: central differences of the band angles of the
//!   continuous Bloch vector, instead of analytic derivatives.
//! - [`ssh_determinant_z`]: evaluates the many-body overlap from first
//!   principles as a Slater determinant in real space — diagonalise the
//!   hopping matrix, fill the negative-energy orbitals, apply the diagonal
//!   twist phases, take the determinant.
//! - [`compare_variants`]: tabulates the closed form, its spectral-expansion
//!   variant, the numerical exponential, and the model-specialised form at
//!   every non-singular grid point, flagging pairs that deviate.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::bloch::{mode_angles, mode_couplings, AngleIssue, ModeCouplings};
use crate::engine::{
    accumulate, mode_factor, mode_factor_spectral, principal_angle, ModeFactor, TwistResult,
};
use crate::error::TwistError;
use crate::grid::{Momentum, MomentumGrid};
use crate::models::{ssh_factor_from_kprime, ssh_k_prime, ssh_r, ModelSpec, SINGULAR_REL_TOL};

/// Pairs flagged by [`compare_variants`] when they deviate beyond this.
pub const FLAG_TOLERANCE: f64 = 1e-9;

/// Dense-determinant path is capped here; it is a desk-scale validator.
pub const MAX_DETERMINANT_CELLS: usize = 512;

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_norm(a: &Mat2) -> f64 {
    a.iter().flatten().map(|c| c.norm()).fold(0.0f64, f64::max)
}

/// `exp(A)` for a 2×2 complex matrix by scaling-and-squaring with a Taylor
/// core, touching none of the closed forms it is meant to check.
fn expm_2x2(a: &Mat2) -> Mat2 {
    let norm = mat_norm(a);
    let squarings = if norm > 0.03125 {
        (norm / 0.03125).log2().ceil() as u32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings as i32);
    let scaled = [
        [a[0][0] * scale, a[0][1] * scale],
        [a[1][0] * scale, a[1][1] * scale],
    ];
    let mut result = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let mut term = result;
    for order in 1..=24 {
        term = mat_mul(&term, &scaled);
        let inv = 1.0 / order as f64;
        for row in term.iter_mut() {
            for entry in row.iter_mut() {
                *entry *= inv;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                result[i][j] += term[i][j];
            }
        }
        if mat_norm(&term) < 1e-30 {
            break;
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

/// Numerically exponentiated per-mode factor: the `(β₋, β₋)` element of
/// `exp(-(2π/N) M)` with `M = [[K', K], [-K*, K'*]]`.
pub fn exp_factor_oracle(c: &ModeCouplings, n_total: usize) -> Complex64 {
    let step = -TAU / n_total as f64;
    let m: Mat2 = [
        [step * c.kprime, step * c.kbig],
        [step * -c.kbig.conj(), step * c.kprime.conj()],
    ];
    expm_2x2(&m)[0][0]
}

/// Twist couplings from central differences of the band angles at `k ± h ê_μ`.
///
/// Angle differences are taken on the nearest branch, so winding gauges pose
/// no problem as long as `h` is small. Models whose gauge angle is not smooth
/// (free-fermion: piecewise constant, jumps at the zeros of `R_y`) or that
/// carry no off-grid Bloch vector (tabulated) are refused.
pub fn fd_couplings(
    model: &ModelSpec,
    k: &Momentum,
    axis: usize,
    h: f64,
) -> Result<ModeCouplings, TwistError> {
    if h <= 0.0 {
        return Err(TwistError::Domain("step h must be positive".into()));
    }
    let bloch_of = |kk: &Momentum| match model {
        ModelSpec::FreeFermion(_) => Err(TwistError::UnsupportedDerivatives(
            "free-fermion gauge angle is piecewise constant; use the analytic coupling",
        )),
        ModelSpec::Custom(_) => Err(TwistError::UnsupportedDerivatives(
            "tabulated models have no off-grid Bloch vector",
        )),
        ModelSpec::Ssh(m) => Ok(ssh_r(kk, m)),
    };
    if axis >= model.dim() {
        return Err(TwistError::Domain(format!(
            "axis {axis} out of range for a {}-dimensional model",
            model.dim()
        )));
    }
    let shifted = |sign: f64| {
        let mut comps: Vec<f64> = k.components().to_vec();
        comps[axis] += sign * h;
        Momentum::new(&comps)
    };
    let scale = model.energy_scale();
    let angles = |kk: &Momentum| -> Result<(f64, f64), TwistError> {
        let r = bloch_of(kk)?;
        if r.magnitude() <= SINGULAR_REL_TOL * scale || r.xy_norm() <= SINGULAR_REL_TOL * scale {
            return Err(TwistError::Stencil { k: *k });
        }
        match mode_angles(&r) {
            Ok(g) => Ok((g.theta, g.gamma_angle)),
            Err(AngleIssue::GapClosure) | Err(AngleIssue::SingularXy) => {
                Err(TwistError::Stencil { k: *k })
            }
        }
    };
    let center = angles(k)?;
    let plus = angles(&shifted(1.0))?;
    let minus = angles(&shifted(-1.0))?;
    let dtheta = (plus.0 - minus.0) / (2.0 * h);
    let dgamma = principal_angle(plus.1 - minus.1) / (2.0 * h);
    Ok(mode_couplings(center.0, center.1, dtheta, dgamma))
}

/// Many-body twist overlap of the dimerized chain from first principles.
///
/// Builds the `2n × 2n` real hopping matrix (intra-cell `-(1+φ)`, inter-cell
/// `-(1-φ)`, periodic), fills every negative-energy orbital, and returns
/// `det(U_occ† T U_occ)` with `T = diag(exp(2πi x / n))`, both sites of cell
/// `x` sharing the phase. Half filling is defined spectrally; an orbital at
/// zero energy (the `φ = 0` gap closure with `k = π` on-grid) is a
/// degeneracy error.
pub fn ssh_determinant_z(phi: f64, n_cells: usize) -> Result<Complex64, TwistError> {
    if !(2..=MAX_DETERMINANT_CELLS).contains(&n_cells) || !n_cells.is_multiple_of(2) {
        return Err(TwistError::Domain(format!(
            "determinant oracle needs an even cell count in 2..={MAX_DETERMINANT_CELLS}, got {n_cells}"
        )));
    }
    if !phi.is_finite() || phi.abs() > 1.0 {
        return Err(TwistError::Domain(format!(
            "dimerization must satisfy |phi| <= 1, got {phi}"
        )));
    }
    let n_sites = 2 * n_cells;
    let mut h = DMatrix::<f64>::zeros(n_sites, n_sites);
    for i in 0..n_sites {
        // bond i joins sites i, i+1; odd site labels (1-based) start a cell
        let t = if i.is_multiple_of(2) {
            -1.0 - phi
        } else {
            -1.0 + phi
        };
        let j = (i + 1) % n_sites;
        h[(i, j)] += t;
        h[(j, i)] += t;
    }
    let eig = SymmetricEigen::new(h);
    let max_abs = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e.abs()));
    let zero_tol = 1e-8 * max_abs.max(1.0);
    if let Some(&e) = eig.eigenvalues.iter().find(|e| e.abs() < zero_tol) {
        return Err(TwistError::DegenerateHalfFilling { energy: e });
    }
    let occupied: Vec<usize> = (0..n_sites).filter(|&i| eig.eigenvalues[i] < 0.0).collect();
    if occupied.len() != n_cells {
        return Err(TwistError::Domain(format!(
            "expected {n_cells} occupied orbitals, found {}",
            occupied.len()
        )));
    }
    // overlap[a][b] = <ψ_a| T |ψ_b> with T diagonal in real space
    let phases: Vec<Complex64> = (0..n_sites)
        .map(|site| Complex64::from_polar(1.0, TAU * ((site / 2 + 1) as f64) / n_cells as f64))
        .collect();
    let mut overlap = DMatrix::<Complex<f64>>::zeros(n_cells, n_cells);
    for (a, &oa) in occupied.iter().enumerate() {
        for (b, &ob) in occupied.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (site, phase) in phases.iter().enumerate() {
                acc += eig.eigenvectors[(site, oa)] * phase * eig.eigenvectors[(site, ob)];
            }
            overlap[(a, b)] = acc;
        }
    }
    Ok(overlap.determinant())
}

/// One grid mode of a [`ComparisonReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub k: Momentum,
    /// Closed-form factor ([`mode_factor`]).
    pub canonical: Complex64,
    /// Spectral-expansion variant ([`mode_factor_spectral`]).
    pub spectral: Complex64,
    /// Numerically exponentiated generator ([`exp_factor_oracle`]).
    pub oracle: Complex64,
    /// Model-specialised arithmetic route, when the model has one.
    pub model_form: Option<Complex64>,
    /// Largest pairwise deviation among the columns above.
    pub max_deviation: f64,
}

/// Per-pair summary of a variant comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSummary {
    pub label: &'static str,
    pub max_deviation: f64,
    pub flagged: bool,
}

/// Cross-check of the accumulated product against the many-body determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantCross {
    pub n_cells: usize,
    pub determinant_z: Complex64,
    pub product_z: Complex64,
    /// `||z_det| - |z_prod||`; shrinks as the grid refines (the per-mode
    /// closed form is the continuum limit of the discrete overlap product).
    pub abs_z_deviation: f64,
}

/// Report from [`compare_variants`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub pairs: Vec<PairSummary>,
    pub tolerance: f64,
    pub n_singular: usize,
    pub determinant: Option<DeterminantCross>,
    pub product: TwistResult,
}

impl ComparisonReport {
    pub fn flagged_pairs(&self) -> impl Iterator<Item = &PairSummary> {
        self.pairs.iter().filter(|p| p.flagged)
    }

    pub fn pair(&self, label: &str) -> Option<&PairSummary> {
        self.pairs.iter().find(|p| p.label == label)
    }
}

/// Evaluate every per-mode factor variant over the grid and report pairwise
/// deviations (flag threshold [`FLAG_TOLERANCE`]); for the dimerized chain on
/// an even grid within the determinant cap, also cross-check the accumulated
/// product against [`ssh_determinant_z`].
pub fn compare_variants(
    model: &ModelSpec,
    grid: &MomentumGrid,
) -> Result<ComparisonReport, TwistError> {
    if model.trivial_twist() {
        return Err(TwistError::TrivialTwist);
    }
    model.validate_grid(grid)?;
    let n_total = grid.total_modes();
    let mut rows = Vec::new();
    let mut factors: Vec<ModeFactor> = Vec::new();
    let mut n_singular = 0usize;
    let mut dev_canon_oracle = 0.0f64;
    let mut dev_spectral_oracle = 0.0f64;
    let mut dev_canon_spectral = 0.0f64;
    let mut dev_model_canon = 0.0f64;
    for (i, k) in grid.points().iter().enumerate() {
        let couplings = match model.couplings(grid, i, 0) {
            Ok(c) => c,
            Err(TwistError::SingularMode { .. })
            | Err(TwistError::GapClosure { .. })
            | Err(TwistError::Stencil { .. }) => {
                n_singular += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let canonical = mode_factor(&couplings, n_total, *k);
        let spectral = mode_factor_spectral(&couplings, n_total)?;
        let oracle = exp_factor_oracle(&couplings, n_total);
        let model_form = match model {
            ModelSpec::Ssh(m) => Some(ssh_factor_from_kprime(ssh_k_prime(k, m)?, n_total)),
            ModelSpec::FreeFermion(_) => {
                // with K' = 0 the factor is the plain cosine of the coupling
                let x = TAU * couplings.kbig.norm() / n_total as f64;
                Some(Complex64::new(x.cos(), 0.0))
            }
            ModelSpec::Custom(_) => None,
        };
        let co = (canonical.value - oracle).norm();
        let so = (spectral - oracle).norm();
        let cs = (canonical.value - spectral).norm();
        let mc = model_form
            .map(|mf| (mf - canonical.value).norm())
            .unwrap_or(0.0);
        dev_canon_oracle = dev_canon_oracle.max(co);
        dev_spectral_oracle = dev_spectral_oracle.max(so);
        dev_canon_spectral = dev_canon_spectral.max(cs);
        dev_model_canon = dev_model_canon.max(mc);
        rows.push(ComparisonRow {
            k: *k,
            canonical: canonical.value,
            spectral,
            oracle,
            model_form,
            max_deviation: co.max(so).max(cs).max(mc),
        });
        factors.push(canonical);
    }
    if factors.is_empty() {
        return Err(TwistError::AllModesSingular);
    }
    let product = accumulate(factors);
    let determinant = match model {
        ModelSpec::Ssh(m)
            if grid.dim() == 1
                && grid.dims()[0].is_multiple_of(2)
                && grid.dims()[0] <= MAX_DETERMINANT_CELLS =>
        {
            match ssh_determinant_z(m.phi, grid.dims()[0]) {
                Ok(det) => Some(DeterminantCross {
                    n_cells: grid.dims()[0],
                    determinant_z: det,
                    product_z: product.z,
                    abs_z_deviation: (det.norm() - product.abs_z()).abs(),
                }),
                Err(TwistError::DegenerateHalfFilling { .. }) => None,
                Err(e) => return Err(e),
            }
        }
        _ => None,
    };
    let pairs = vec![
        PairSummary {
            label: "canonical vs exponential oracle",
            max_deviation: dev_canon_oracle,
            flagged: dev_canon_oracle > FLAG_TOLERANCE,
        },
        PairSummary {
            label: "spectral vs exponential oracle",
            max_deviation: dev_spectral_oracle,
            flagged: dev_spectral_oracle > FLAG_TOLERANCE,
        },
        PairSummary {
            label: "canonical vs spectral",
            max_deviation: dev_canon_spectral,
            flagged: dev_canon_spectral > FLAG_TOLERANCE,
        },
        PairSummary {
            label: "model form vs canonical",
            max_deviation: dev_model_canon,
            flagged: dev_model_canon > FLAG_TOLERANCE,
        },
    ];
    Ok(ComparisonReport {
        rows,
        pairs,
        tolerance: FLAG_TOLERANCE,
        n_singular,
        determinant,
        product,
    })
}

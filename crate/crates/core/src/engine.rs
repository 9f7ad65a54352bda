//! Per-mode twist factors, stable product accumulation, and evaluation.
//!
//! Each grid mode contributes the `(β₋, β₋)` diagonal element of
//! `exp(-(2π/N) M)` with the anti-Hermitian generator
//!
//! ```text
//! M = [ K'   K  ]
//!     [ -K*  K'* ]
//! ```
//!
//! `M` is traceless (`K'` purely imaginary) with `M² = -Ω² I`,
//! `Ω² = |K'|² + |K|²`, so the element has the closed form
//!
//! ```text
//! f = cos(2πΩ/N) - (K'/Ω) sin(2πΩ/N)
//! ```
//!
//! with `|f| <= 1` (unitarity) and the exact reductions
//! `f(K'=0) = cos(2π|K|/N)` and `f(K=0) = exp(-2πK'/N)`.
//!
//! The full overlap is `z = Π_k f_k`, accumulated in the log domain:
//! `log|z| = Σ log|f_k|` survives underflow, and the phase is the sum of
//! per-mode arguments reduced to its principal value once at the end (per-step
//! clipping would corrupt sums of many small arguments). Summation order is
//! fixed by grid order, so results do not depend on how the factor map is
//! parallelised.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use crate::bloch::ModeCouplings;
use crate::error::TwistError;
use crate::grid::{Momentum, MomentumGrid};
use crate::models::ModelSpec;
use crate::symmetry::check_twist_symmetry;

/// `|z|` below this counts as a node: the overlap vanishes and the geometric
/// phase is ill-defined. Chosen to separate genuine nodal structure from
/// floating-point noise; configurable through [`EvalOptions`].
pub const DEFAULT_ILL_DEFINED_THRESHOLD: f64 = 1e-12;

/// Below this rotation rate the factor switches to its first-order series;
/// the quadratic remainder is below representable precision at that scale.
const OMEGA_SERIES_CUTOFF: f64 = 1e-12;

/// Reduce an angle to the principal branch `(-π, π]`.
pub fn principal_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// One per-mode factor together with its log-domain pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFactor {
    pub value: Complex64,
    pub k: Momentum,
    /// `ln |value|`; `-inf` when the factor vanishes exactly.
    pub log_abs: f64,
    /// `Arg value` in `(-π, π]`.
    pub arg: f64,
}

impl ModeFactor {
    pub fn new(value: Complex64, k: Momentum) -> Self {
        ModeFactor {
            value,
            k,
            log_abs: value.norm().ln(),
            arg: value.arg(),
        }
    }
}

/// Closed-form per-mode factor for couplings `c` on an `n_total`-mode grid.
///
/// When the couplings are real-free (`K' = 0`) the value is exactly
/// `cos(2π|K|/N)` with a bit-zero imaginary part, so products of such factors
/// stay exactly real.
pub fn mode_factor(c: &ModeCouplings, n_total: usize, k: Momentum) -> ModeFactor {
    let omega = c.omega();
    let step = TAU / n_total as f64;
    let value = if omega < OMEGA_SERIES_CUTOFF {
        Complex64::new(1.0, 0.0) - step * c.kprime
    } else {
        let x = step * omega;
        Complex64::new(x.cos(), 0.0) - (c.kprime / omega) * x.sin()
    };
    ModeFactor::new(value, k)
}

/// Spectral-expansion variant of the per-mode factor.
///
/// Expands the same matrix element over the generator eigenvalues
/// `λ± = ±iΩ` with coefficients `C±² = -|K|² + (λ± - K')²`:
///
/// ```text
/// f = 1 - (|K|²/C₊²)(e^{2πλ₊/N} - 1) - (|K|²/C₋²)(e^{2πλ₋/N} - 1)
/// ```
///
/// This route agrees with [`mode_factor`] when `K' = 0` but yields the
/// complex conjugate phase whenever `K' ≠ 0`, and collapses to `1` in the
/// `K = 0` limit where the true factor is the pure phase `exp(-2πK'/N)`.
/// It is kept as a comparison target; [`crate::oracle::compare_variants`]
/// quantifies the divergence.
pub fn mode_factor_spectral(c: &ModeCouplings, n_total: usize) -> Result<Complex64, TwistError> {
    let k2 = c.kbig.norm_sqr();
    if k2 == 0.0 {
        // both correction terms carry a |K|² factor and vanish identically
        return Ok(Complex64::new(1.0, 0.0));
    }
    let omega = c.omega();
    let step = TAU / n_total as f64;
    let one = Complex64::new(1.0, 0.0);
    let mut value = one;
    for sign in [1.0, -1.0] {
        let lambda = Complex64::new(0.0, sign * omega);
        let d = lambda - c.kprime;
        let c_sq = d * d - k2;
        if c_sq.norm() == 0.0 {
            return Err(TwistError::DegenerateCoefficient);
        }
        value -= (k2 / c_sq) * ((step * lambda).exp() - one);
    }
    Ok(value)
}

/// Overlap `z`, its geometric phase, and evaluation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistResult {
    pub z: Complex64,
    /// `Arg z` in `(-π, π]`, or `None` when `|z|` sits below the ill-defined
    /// threshold (nodal structure: the phase carries no information there).
    pub gamma_g: Option<f64>,
    /// `Σ_k ln |f_k|`; finite even when `z` itself underflows.
    pub log_abs_z: f64,
    /// Number of modes included in the product.
    pub n_modes: usize,
    /// Grid momenta excluded as singular (gap closure or undefined angle).
    pub singular_modes: Vec<Momentum>,
    /// The per-mode factors, in grid order.
    pub factors: Vec<ModeFactor>,
}

impl TwistResult {
    /// `|z|` recovered from the log-domain accumulator.
    pub fn abs_z(&self) -> f64 {
        self.log_abs_z.exp()
    }

    /// Geometric phase, `None` when ill-defined.
    pub fn geometric_phase(&self) -> Option<f64> {
        self.gamma_g
    }

    pub fn ill_defined(&self) -> bool {
        self.gamma_g.is_none()
    }
}

/// Accumulate factors (in the given order) with the default threshold.
pub fn accumulate(factors: Vec<ModeFactor>) -> TwistResult {
    accumulate_with_threshold(factors, DEFAULT_ILL_DEFINED_THRESHOLD)
}

/// Accumulate factors in the log domain.
///
/// `log|z|` and the argument sum are plain ordered sums over the input, so
/// the result is bit-identical no matter how the factors were produced.
pub fn accumulate_with_threshold(factors: Vec<ModeFactor>, threshold: f64) -> TwistResult {
    let mut log_abs_z = 0.0f64;
    let mut arg_sum = 0.0f64;
    for f in &factors {
        log_abs_z += f.log_abs;
        arg_sum += f.arg;
    }
    let gamma = principal_angle(arg_sum);
    let z = Complex64::from_polar(log_abs_z.exp(), gamma);
    // compare in the log domain so underflowed |z| is still classified right
    let well_defined = log_abs_z >= threshold.ln();
    TwistResult {
        z,
        gamma_g: if well_defined { Some(gamma) } else { None },
        log_abs_z,
        n_modes: factors.len(),
        singular_modes: Vec::new(),
        factors,
    }
}

/// Which mode count enters the twist phase `2π/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NConvention {
    /// `N` = total number of grid modes (default).
    #[default]
    TotalModes,
    /// `N` = linear size along the twist axis (sensitivity studies).
    LinearSize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub threshold: f64,
    pub n_convention: NConvention,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            threshold: DEFAULT_ILL_DEFINED_THRESHOLD,
            n_convention: NConvention::TotalModes,
        }
    }
}

/// Evaluate the twist overlap of `model` on `grid`, twisting along `axis`.
pub fn evaluate(
    model: &ModelSpec,
    grid: &MomentumGrid,
    axis: usize,
) -> Result<TwistResult, TwistError> {
    evaluate_with(model, grid, axis, &EvalOptions::default())
}

/// [`evaluate`] with explicit options.
///
/// Refuses trivial twists and grids violating the `R_y` antisymmetry.
/// Singular grid modes are recorded on the result (the product then runs over
/// the remaining modes); only an entirely singular grid is an error. Mode
/// factors are computed in parallel and accumulated in grid order, so the
/// outcome is independent of scheduling.
pub fn evaluate_with(
    model: &ModelSpec,
    grid: &MomentumGrid,
    axis: usize,
    options: &EvalOptions,
) -> Result<TwistResult, TwistError> {
    if axis >= grid.dim() {
        return Err(TwistError::Domain(format!(
            "twist axis {axis} out of range for a {}-axis grid",
            grid.dim()
        )));
    }
    if model.trivial_twist() {
        return Err(TwistError::TrivialTwist);
    }
    model.validate_grid(grid)?;
    let report = check_twist_symmetry(model, grid)?;
    if !report.pass {
        return Err(TwistError::SymmetryViolation {
            residual: report.residual,
            scale: report.scale,
            worst_k: report.worst_k,
        });
    }
    let n_twist = match options.n_convention {
        NConvention::TotalModes => grid.total_modes(),
        NConvention::LinearSize => grid.dims()[axis],
    };
    let outcomes: Vec<Result<ModeFactor, TwistError>> = grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, k)| {
            model
                .couplings(grid, i, axis)
                .map(|c| mode_factor(&c, n_twist, *k))
        })
        .collect();
    let mut factors = Vec::with_capacity(outcomes.len());
    let mut singular = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(f) => factors.push(f),
            Err(TwistError::SingularMode { k })
            | Err(TwistError::GapClosure { k })
            | Err(TwistError::Stencil { k }) => singular.push(k),
            Err(e) => return Err(e),
        }
    }
    if factors.is_empty() {
        return Err(TwistError::AllModesSingular);
    }
    let mut result = accumulate_with_threshold(factors, options.threshold);
    result.singular_modes = singular;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn k0() -> Momentum {
        Momentum::new(&[0.0])
    }

    #[test]
    fn factor_identity_generator() {
        let c = ModeCouplings::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for n in [2usize, 4, 1_000_000] {
            let f = mode_factor(&c, n, k0());
            assert_eq!(f.value, Complex64::new(1.0, 0.0));
            assert_eq!(f.arg, 0.0);
            assert_eq!(f.log_abs, 0.0);
        }
    }

    #[test]
    fn factor_pure_band_mixing() {
        // K' = 0, |K| = 1/2, N = 4: cos(π/4)
        let c = ModeCouplings::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.5));
        let f = mode_factor(&c, 4, k0());
        assert_relative_eq!(f.value.re, FRAC_PI_4.cos(), max_relative = 1e-15);
        assert_eq!(f.value.im, 0.0);
    }

    #[test]
    fn factor_pure_phase() {
        // K' = i/2, K = 0, N = 4: exp(-iπ/4), modulus exactly 1
        let c = ModeCouplings::new(Complex64::new(0.0, 0.5), Complex64::new(0.0, 0.0));
        let f = mode_factor(&c, 4, k0());
        let want = Complex64::from_polar(1.0, -FRAC_PI_4);
        assert_relative_eq!(f.value.re, want.re, max_relative = 1e-15);
        assert_relative_eq!(f.value.im, want.im, max_relative = 1e-15);
        assert_relative_eq!(f.value.norm(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn factor_series_branch_matches_closed_form() {
        let eps = 1e-13;
        let c = ModeCouplings::new(Complex64::new(0.0, -eps), Complex64::new(0.0, 0.0));
        let f = mode_factor(&c, 100, k0());
        // first-order series: 1 - (2π/N) K'
        assert_relative_eq!(f.value.re, 1.0);
        assert_relative_eq!(f.value.im, TAU / 100.0 * eps, max_relative = 1e-12);
    }

    #[test]
    fn spectral_variant_reductions() {
        // K' = 0 case agrees with the closed form
        let c = ModeCouplings::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.5));
        let v = mode_factor_spectral(&c, 4).unwrap();
        assert_relative_eq!(v.re, FRAC_PI_4.cos(), max_relative = 1e-12);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);

        // K = 0 collapses to 1, losing the phase the closed form keeps
        let c = ModeCouplings::new(Complex64::new(0.0, 0.5), Complex64::new(0.0, 0.0));
        let v = mode_factor_spectral(&c, 4).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
        let f = mode_factor(&c, 4, k0());
        assert!((v - f.value).norm() > 0.7);

        // identity generator
        let c = ModeCouplings::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(
            mode_factor_spectral(&c, 7).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn accumulate_unit_factors() {
        let fs: Vec<ModeFactor> = (0..5)
            .map(|_| ModeFactor::new(Complex64::new(1.0, 0.0), k0()))
            .collect();
        let r = accumulate(fs);
        assert_eq!(r.z, Complex64::new(1.0, 0.0));
        assert_eq!(r.gamma_g, Some(0.0));
        assert_eq!(r.n_modes, 5);
    }

    #[test]
    fn accumulate_phase_addition() {
        let fs: Vec<ModeFactor> = (0..2)
            .map(|_| ModeFactor::new(Complex64::new(0.0, 1.0), k0()))
            .collect();
        let r = accumulate(fs);
        assert_relative_eq!(r.z.re, -1.0, max_relative = 1e-15);
        assert_relative_eq!(r.z.im, 0.0, epsilon = 1e-15);
        assert_eq!(r.gamma_g, Some(std::f64::consts::PI));
    }

    #[test]
    fn accumulate_small_factors_in_log_domain() {
        let fs: Vec<ModeFactor> = (0..1000)
            .map(|_| ModeFactor::new(Complex64::new(0.99, 0.0), k0()))
            .collect();
        let r = accumulate(fs);
        assert_relative_eq!(r.log_abs_z, 1000.0 * 0.99f64.ln(), max_relative = 1e-12);
        // oracle: direct product
        let direct = (0..1000).fold(1.0f64, |acc, _| acc * 0.99);
        assert_relative_eq!(r.abs_z(), direct, max_relative = 1e-11);
        assert!(!r.ill_defined());
        assert_eq!(r.gamma_g, Some(0.0));
    }

    #[test]
    fn geometric_phase_principal_values() {
        let r = accumulate(vec![ModeFactor::new(Complex64::new(-1.0, 0.0), k0())]);
        assert_eq!(r.geometric_phase(), Some(std::f64::consts::PI));

        let r = accumulate(vec![ModeFactor::new(Complex64::new(1.0, -1.0), k0())]);
        assert_relative_eq!(
            r.geometric_phase().unwrap(),
            -FRAC_PI_4,
            max_relative = 1e-15
        );
    }

    #[test]
    fn geometric_phase_ill_defined_below_threshold() {
        let r = accumulate(vec![ModeFactor::new(Complex64::new(1e-16, 0.0), k0())]);
        assert!(r.ill_defined());
        assert_eq!(r.geometric_phase(), None);
        // the log-domain magnitude is still recoverable
        assert_relative_eq!(r.log_abs_z, 1e-16f64.ln());
    }

    #[test]
    fn principal_angle_branch() {
        assert_eq!(principal_angle(0.0), 0.0);
        assert_eq!(principal_angle(PI), PI);
        assert_eq!(principal_angle(-PI), PI);
        assert_relative_eq!(principal_angle(1.5 * PI), -0.5 * PI, max_relative = 1e-15);
        assert_relative_eq!(principal_angle(TAU), 0.0, epsilon = 1e-15);
        assert_relative_eq!(principal_angle(-7.0 * PI), PI, max_relative = 1e-12);
    }

    #[test]
    fn evaluate_fully_dimerized_chain() {
        // φ = 1: K' vanishes identically, every factor is 1
        let m = ModelSpec::ssh(1.0).unwrap();
        let g = MomentumGrid::build(&[51]).unwrap();
        let r = evaluate(&m, &g, 0).unwrap();
        assert_eq!(r.z, Complex64::new(1.0, 0.0));
        assert_eq!(r.gamma_g, Some(0.0));
        assert!(r.singular_modes.is_empty());
    }

    #[test]
    fn evaluate_free_fermion_real_positive() {
        // λ=0: |K| = |cos k|/2, every factor cos(π |cos k| / N) > 0
        let m = ModelSpec::free_fermion(1, 0.0, 1.0).unwrap();
        let g = MomentumGrid::build(&[101]).unwrap();
        let r = evaluate(&m, &g, 0).unwrap();
        assert_eq!(r.z.im, 0.0);
        assert!(r.z.re > 0.0);
        assert_eq!(r.gamma_g, Some(0.0));
        // frozen against an independent implementation of the same product
        assert_relative_eq!(r.abs_z(), 0.9758633925557613, max_relative = 1e-10);
    }

    #[test]
    fn evaluate_near_critical_smaller_than_midphase() {
        let g = MomentumGrid::build(&[2001]).unwrap();
        let near = evaluate(&ModelSpec::free_fermion(1, 0.99, 1.0).unwrap(), &g, 0).unwrap();
        let mid = evaluate(&ModelSpec::free_fermion(1, 0.5, 1.0).unwrap(), &g, 0).unwrap();
        assert!(near.abs_z() < mid.abs_z());
    }

    #[test]
    fn evaluate_refuses_trivial_twist() {
        let m = ModelSpec::free_fermion(2, 1.0, 0.0).unwrap();
        let g = MomentumGrid::build(&[8, 8]).unwrap();
        assert!(matches!(evaluate(&m, &g, 0), Err(TwistError::TrivialTwist)));
    }

    #[test]
    fn evaluate_refuses_broken_symmetry() {
        use crate::bloch::BlochVector;
        use crate::models::CustomModel;
        let dims = [16usize];
        let m = ModelSpec::custom(CustomModel::from_fn(&dims, |k| {
            BlochVector::new(0.0, 1.5, k.get(0).cos(), 0.0)
        }));
        let g = MomentumGrid::build(&dims).unwrap();
        assert!(matches!(
            evaluate(&m, &g, 0),
            Err(TwistError::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn evaluate_records_singular_modes() {
        // λ = 1 puts the gap closure exactly on the k = 2π grid point
        let m = ModelSpec::free_fermion(1, 1.0, 1.0).unwrap();
        let g = MomentumGrid::build(&[101]).unwrap();
        let r = evaluate(&m, &g, 0).unwrap();
        assert_eq!(r.singular_modes.len(), 1);
        assert_eq!(r.n_modes, 100);
        assert!((r.singular_modes[0].get(0) - TAU).abs() < 1e-12);
    }

    #[test]
    fn linear_size_convention_changes_phase_step() {
        let m = ModelSpec::free_fermion(2, 2.5, 1.0).unwrap();
        let g = MomentumGrid::build(&[9, 9]).unwrap();
        let total = evaluate(&m, &g, 0).unwrap();
        let linear = evaluate_with(
            &m,
            &g,
            0,
            &EvalOptions {
                n_convention: NConvention::LinearSize,
                ..EvalOptions::default()
            },
        )
        .unwrap();
        // coarser phase step -> smaller overlap
        assert!(linear.abs_z() < total.abs_z());
    }
}

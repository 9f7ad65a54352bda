//! Twist-symmetry precondition: `R_y(k) = -R_y(-k)` on the grid.
//!
//! The per-mode factorisation of the twist overlap relies on the derivative
//! terms of the momentum-space twist cancelling between `k` and `-k`, which
//! requires the `R_y` antisymmetry. When it fails the engine refuses to
//! evaluate rather than approximate.

use crate::error::TwistError;
use crate::grid::{Momentum, MomentumGrid};
use crate::models::ModelSpec;

/// Residual of the `R_y(k) + R_y(-k)` scan over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    /// `max_k |R_y(k) + R_y(-k)|`
    pub residual: f64,
    /// Largest `|R(k)|` seen, the scale the residual is judged against.
    pub scale: f64,
    /// Momentum achieving the residual.
    pub worst_k: Momentum,
    pub pass: bool,
}

const PASS_REL_TOL: f64 = 1e-12;

/// Scan the grid for violations of `R_y(k) = -R_y(-k)`.
///
/// Passes when the residual is at most `1e-12` times the largest `|R(k)|` on
/// the grid. A failing report blocks evaluation downstream.
pub fn check_twist_symmetry(
    model: &ModelSpec,
    grid: &MomentumGrid,
) -> Result<SymmetryReport, TwistError> {
    model.validate_grid(grid)?;
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    let mut worst_k = grid.point(0);
    for (i, k) in grid.points().iter().enumerate() {
        let r = model.bloch(k)?;
        scale = scale.max(r.magnitude());
        let partner = model.bloch(&grid.point(grid.partner_index(i)))?;
        let v = (r.ry + partner.ry).abs();
        if v > residual {
            residual = v;
            worst_k = *k;
        }
    }
    let pass = residual <= PASS_REL_TOL * scale || (scale == 0.0 && residual == 0.0);
    Ok(SymmetryReport {
        residual,
        scale,
        worst_k,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BlochVector;
    use crate::models::CustomModel;

    #[test]
    fn free_fermion_passes() {
        let m = ModelSpec::free_fermion(1, 0.5, 1.0).unwrap();
        let g = MomentumGrid::build(&[101]).unwrap();
        let rep = check_twist_symmetry(&m, &g).unwrap();
        assert!(rep.pass, "residual {} scale {}", rep.residual, rep.scale);
        assert!(rep.residual <= 1e-12 * rep.scale);
    }

    #[test]
    fn ssh_passes() {
        let m = ModelSpec::ssh(0.3).unwrap();
        let g = MomentumGrid::build(&[100]).unwrap();
        let rep = check_twist_symmetry(&m, &g).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn higher_dimensional_grids_pass() {
        let m = ModelSpec::free_fermion(2, 1.3, 0.7).unwrap();
        let g = MomentumGrid::build(&[12, 9]).unwrap();
        assert!(check_twist_symmetry(&m, &g).unwrap().pass);
    }

    #[test]
    fn even_r_y_fails_with_residual_two() {
        // R_y = cos k: R_y(k) + R_y(-k) = 2 cos k, maximal (= 2) at k = 2π
        let dims = [50usize];
        let m = ModelSpec::custom(CustomModel::from_fn(&dims, |k| {
            BlochVector::new(0.0, 1.0, k.get(0).cos(), 0.0)
        }));
        let g = MomentumGrid::build(&dims).unwrap();
        let rep = check_twist_symmetry(&m, &g).unwrap();
        assert!(!rep.pass);
        approx::assert_relative_eq!(rep.residual, 2.0, max_relative = 1e-12);
        // the residual peaks where |cos k| = 1 (k = π and k = 2π)
        approx::assert_relative_eq!(rep.worst_k.get(0).cos().abs(), 1.0, max_relative = 1e-12);
    }
}

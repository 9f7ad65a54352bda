//! Bloch vectors tabulated on a grid.
//!
//! Text format: one row per grid point, whitespace-separated columns
//! `n_1 .. n_D  r0 rx ry rz`, with `#` starting a comment. The table must
//! cover every point of the declared grid exactly once.
//!
//! Tabulated models carry no off-grid information, so twist couplings are
//! formed from nearest-branch central differences of the band angles between
//! neighboring grid points along the twist axis (step `2π/L`). That is the
//! only derivative available on a table; closed-form models use analytic
//! derivatives instead, which is why the built-ins do not go through this
//! path.

use std::f64::consts::TAU;

use crate::bloch::{mode_angles, mode_couplings, AngleIssue, BlochVector, ModeCouplings};
use crate::engine::principal_angle;
use crate::error::TwistError;
use crate::grid::{Momentum, MomentumGrid};

use super::SINGULAR_REL_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct CustomModel {
    dims: Vec<usize>,
    rows: Vec<BlochVector>,
    scale: f64,
}

impl CustomModel {
    /// Parse a table against the declared grid sizes.
    pub fn parse(text: &str, dims: &[usize]) -> Result<Self, TwistError> {
        let grid = MomentumGrid::build(dims)
            .map_err(|e| TwistError::Table(format!("bad dims for table: {e}")))?;
        let d = dims.len();
        let total = grid.total_modes();
        let mut rows: Vec<Option<BlochVector>> = vec![None; total];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != d + 4 {
                return Err(TwistError::Table(format!(
                    "line {}: expected {} columns (n_1..n_{d} r0 rx ry rz), got {}",
                    lineno + 1,
                    d + 4,
                    fields.len()
                )));
            }
            let mut digits = Vec::with_capacity(d);
            for (a, f) in fields[..d].iter().enumerate() {
                let n: usize = f.parse().map_err(|_| {
                    TwistError::Table(format!("line {}: bad index {f:?}", lineno + 1))
                })?;
                if n < 1 || n > dims[a] {
                    return Err(TwistError::Table(format!(
                        "line {}: index n_{} = {n} outside 1..={}",
                        lineno + 1,
                        a + 1,
                        dims[a]
                    )));
                }
                digits.push(n);
            }
            let mut vals = [0.0f64; 4];
            for (v, f) in vals.iter_mut().zip(&fields[d..]) {
                *v = f.parse().map_err(|_| {
                    TwistError::Table(format!("line {}: bad value {f:?}", lineno + 1))
                })?;
            }
            let idx = grid.digits_index(&digits);
            if rows[idx].is_some() {
                return Err(TwistError::Table(format!(
                    "line {}: duplicate grid point",
                    lineno + 1
                )));
            }
            rows[idx] = Some(BlochVector::new(vals[0], vals[1], vals[2], vals[3]));
        }
        let missing = rows.iter().filter(|r| r.is_none()).count();
        if missing > 0 {
            return Err(TwistError::Table(format!(
                "table covers {} of {total} grid points ({missing} missing)",
                total - missing
            )));
        }
        let rows: Vec<BlochVector> = rows.into_iter().map(|r| r.unwrap()).collect();
        let scale = rows.iter().map(|r| r.magnitude()).fold(0.0, f64::max);
        Ok(CustomModel {
            dims: dims.to_vec(),
            rows,
            scale,
        })
    }

    /// Build directly from a closure sampled on a grid (used by tests).
    pub fn from_fn(dims: &[usize], f: impl Fn(&Momentum) -> BlochVector) -> Self {
        let grid = MomentumGrid::build(dims).expect("valid dims");
        let rows: Vec<BlochVector> = grid.points().iter().map(&f).collect();
        let scale = rows.iter().map(|r| r.magnitude()).fold(0.0, f64::max);
        CustomModel {
            dims: dims.to_vec(),
            rows,
            scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn energy_scale(&self) -> f64 {
        self.scale
    }

    pub(super) fn validate_grid(&self, grid: &MomentumGrid) -> Result<(), TwistError> {
        if grid.dims() != self.dims.as_slice() {
            return Err(TwistError::Table(format!(
                "table dims {:?} do not match grid dims {:?}",
                self.dims,
                grid.dims()
            )));
        }
        Ok(())
    }

    fn index_of(&self, k: &Momentum) -> Option<usize> {
        if k.dim() != self.dims.len() {
            return None;
        }
        let mut idx = 0usize;
        for (a, &l) in self.dims.iter().enumerate() {
            let frac = k.get(a) * l as f64 / TAU;
            let n = frac.round();
            if (frac - n).abs() > 1e-9 || n < 1.0 || n > l as f64 {
                return None;
            }
            idx = idx * l + (n as usize - 1);
        }
        Some(idx)
    }

    pub(super) fn lookup(&self, k: &Momentum) -> Result<BlochVector, TwistError> {
        self.index_of(k)
            .map(|i| self.rows[i])
            .ok_or_else(|| TwistError::Table(format!("momentum {k} is not a tabulated grid point")))
    }

    pub(super) fn couplings(
        &self,
        grid: &MomentumGrid,
        index: usize,
        axis: usize,
    ) -> Result<ModeCouplings, TwistError> {
        self.validate_grid(grid)?;
        let k = grid.point(index);
        if axis >= self.dims.len() {
            return Err(TwistError::Domain(format!(
                "twist axis {axis} out of range for a {}-dimensional table",
                self.dims.len()
            )));
        }
        let center = self.angles_at(grid, index, k)?;
        let l = self.dims[axis];
        let digits = grid.index_digits(index);
        let mut fwd = digits.clone();
        fwd[axis] = digits[axis] % l + 1;
        let mut bwd = digits;
        bwd[axis] = (bwd[axis] + l - 2) % l + 1;
        let fwd_idx = grid.digits_index(&fwd);
        let bwd_idx = grid.digits_index(&bwd);
        let plus = self
            .angles_at(grid, fwd_idx, grid.point(fwd_idx))
            .map_err(|_| TwistError::Stencil { k })?;
        let minus = self
            .angles_at(grid, bwd_idx, grid.point(bwd_idx))
            .map_err(|_| TwistError::Stencil { k })?;
        let h = TAU / l as f64;
        let dtheta = (plus.0 - minus.0) / (2.0 * h);
        let dgamma = principal_angle(plus.1 - minus.1) / (2.0 * h);
        Ok(mode_couplings(center.0, center.1, dtheta, dgamma))
    }

    fn angles_at(
        &self,
        _grid: &MomentumGrid,
        index: usize,
        k: Momentum,
    ) -> Result<(f64, f64), TwistError> {
        let r = self.rows[index];
        if r.magnitude() <= SINGULAR_REL_TOL * self.scale {
            return Err(TwistError::GapClosure { k });
        }
        if r.xy_norm() <= SINGULAR_REL_TOL * self.scale {
            return Err(TwistError::SingularMode { k });
        }
        match mode_angles(&r) {
            Ok(g) => Ok((g.theta, g.gamma_angle)),
            Err(AngleIssue::GapClosure) => Err(TwistError::GapClosure { k }),
            Err(AngleIssue::SingularXy) => Err(TwistError::SingularMode { k }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parse_round_trip() {
        let text = "\
# a 4-point chain
1 0 0.5 0.1 0.0
2 0 0.0 1.0 0.0   # interior point
3 0 -0.5 0.1 0.0
4 0 1.0 0.0 0.0
";
        let m = CustomModel::parse(text, &[4]).unwrap();
        assert_eq!(m.dim(), 1);
        let grid = MomentumGrid::build(&[4]).unwrap();
        let r = m.lookup(&grid.point(1)).unwrap();
        assert_relative_eq!(r.ry, 1.0);
    }

    #[test]
    fn parse_rejects_incomplete_cover() {
        let text = "1 0 1 0 0\n2 0 1 0 0\n";
        let err = CustomModel::parse(text, &[3]).unwrap_err();
        assert!(matches!(err, TwistError::Table(_)));
        assert!(err.to_string().contains("missing"));
    }

    #[test]
    fn parse_rejects_duplicates_and_bad_rows() {
        assert!(CustomModel::parse("1 0 1 0 0\n1 0 2 0 0\n", &[2]).is_err());
        assert!(CustomModel::parse("1 0 x 0 0\n", &[2]).is_err());
        assert!(CustomModel::parse("5 0 1 0 0\n", &[2]).is_err());
        assert!(CustomModel::parse("1 0 1 0\n", &[2]).is_err());
    }

    #[test]
    fn lookup_rejects_off_grid_momentum() {
        let m = CustomModel::from_fn(&[4], |_| BlochVector::new(0.0, 1.0, 0.0, 0.0));
        assert!(m.lookup(&Momentum::new(&[0.1])).is_err());
    }

    #[test]
    fn finite_difference_couplings_match_smooth_model() {
        // circle winding once: R = (cos k, sin k, 0) has ∂γ = 1, θ = π/2,
        // so K' = -i/2 at every grid point
        let dims = [64usize];
        let m = CustomModel::from_fn(&dims, |k| {
            BlochVector::new(0.0, k.get(0).cos(), k.get(0).sin(), 0.0)
        });
        let grid = MomentumGrid::build(&dims).unwrap();
        for idx in [0usize, 10, 31, 63] {
            let c = m.couplings(&grid, idx, 0).unwrap();
            assert_relative_eq!(c.kprime.im, -0.5, max_relative = 1e-3);
            assert_relative_eq!(c.kprime.re, 0.0, epsilon = 1e-15);
        }
    }
}

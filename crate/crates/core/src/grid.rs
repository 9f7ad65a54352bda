//! Periodic momentum grids.
//!
//! A grid with linear sizes `L_1 .. L_D` holds the momenta
//! `k_α = 2π n_α / L_α` with `n_α ∈ {1, .., L_α}`, in lexicographic order of
//! `(n_1, .., n_D)`. Every component lies in `(0, 2π]`, and the grid is closed
//! under `k ↔ -k` (modulo 2π), which is what the twist-symmetry check and the
//! pairwise cancellation arguments rely on.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::TwistError;

/// Maximum number of spatial dimensions supported.
pub const MAX_DIM: usize = 3;

/// One grid momentum. Cheap to copy; components beyond `dim` are unused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum {
    comps: [f64; MAX_DIM],
    dim: usize,
}

impl Momentum {
    /// Build from a slice of components (1 to `MAX_DIM` entries).
    pub fn new(components: &[f64]) -> Self {
        assert!(
            !components.is_empty() && components.len() <= MAX_DIM,
            "momentum must have 1..={MAX_DIM} components"
        );
        let mut comps = [0.0; MAX_DIM];
        comps[..components.len()].copy_from_slice(components);
        Momentum {
            comps,
            dim: components.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.comps[..self.dim]
    }

    /// Component along `axis` (0-based).
    pub fn get(&self, axis: usize) -> f64 {
        self.components()[axis]
    }

    /// Sum of `cos k_α` over all components.
    pub fn sum_cos(&self) -> f64 {
        self.components().iter().map(|k| k.cos()).sum()
    }

    /// Sum of `sin k_α` over all components.
    pub fn sum_sin(&self) -> f64 {
        self.components().iter().map(|k| k.sin()).sum()
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.6}")?;
        }
        write!(f, ")")
    }
}

/// Momentum grid over a `D`-dimensional periodic lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    dims: Vec<usize>,
    points: Vec<Momentum>,
}

impl MomentumGrid {
    /// Build a grid from per-axis linear sizes.
    ///
    /// Requires `1 <= D <= 3` and every `L_α >= 2`.
    pub fn build(dims: &[usize]) -> Result<Self, TwistError> {
        if dims.is_empty() || dims.len() > MAX_DIM {
            return Err(TwistError::InvalidDimensions(format!(
                "need 1..={} axes, got {}",
                MAX_DIM,
                dims.len()
            )));
        }
        if let Some(&bad) = dims.iter().find(|&&l| l < 2) {
            return Err(TwistError::InvalidDimensions(format!(
                "every linear size must be >= 2, got {bad}"
            )));
        }
        let total: usize = dims.iter().product();
        let d = dims.len();
        let mut points = Vec::with_capacity(total);
        let mut digits = vec![1usize; d];
        for _ in 0..total {
            let mut comps = [0.0; MAX_DIM];
            for (a, (&n, &l)) in digits.iter().zip(dims.iter()).enumerate() {
                comps[a] = TAU * n as f64 / l as f64;
            }
            points.push(Momentum { comps, dim: d });
            // lexicographic increment, last axis fastest
            for a in (0..d).rev() {
                if digits[a] < dims[a] {
                    digits[a] += 1;
                    break;
                }
                digits[a] = 1;
            }
        }
        Ok(MomentumGrid {
            dims: dims.to_vec(),
            points,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of grid modes, `N = Π L_α`.
    pub fn total_modes(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Momentum] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Momentum {
        self.points[index]
    }

    /// Lexicographic digits `(n_1, .., n_D)` of a flat index.
    pub fn index_digits(&self, index: usize) -> Vec<usize> {
        let mut digits = vec![0usize; self.dims.len()];
        let mut rem = index;
        for a in (0..self.dims.len()).rev() {
            digits[a] = rem % self.dims[a] + 1;
            rem /= self.dims[a];
        }
        digits
    }

    /// Flat index of lexicographic digits.
    pub fn digits_index(&self, digits: &[usize]) -> usize {
        let mut idx = 0usize;
        for (a, &n) in digits.iter().enumerate() {
            idx = idx * self.dims[a] + (n - 1);
        }
        idx
    }

    /// Index of the `k ↔ -k` partner point.
    ///
    /// Componentwise, `n` maps to `L - n` (and `n = L`, i.e. `k = 2π`, maps to
    /// itself). An involution.
    pub fn partner_index(&self, index: usize) -> usize {
        let digits = self.index_digits(index);
        let partner: Vec<usize> = digits
            .iter()
            .zip(self.dims.iter())
            .map(|(&n, &l)| if n == l { l } else { l - n })
            .collect();
        self.digits_index(&partner)
    }
}

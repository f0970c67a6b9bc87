//! Numerical knobs threaded through the pipelines.

use serde::{Deserialize, Serialize};

use crate::C;

/// Which pre-renormalization recursion to use for one-dimensional pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `(η, ξ) -> (η^a ∘ ξ, η)`, the word convention.
    #[default]
    Words,
    /// `(η, ξ) -> (ξ, ξ^{-a} ∘ η)`, the mirrored convention with inverse letters.
    Mirrored,
}

/// Which equations the commutation projection imposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CommutationReading {
    /// Jets `i ∈ {0, 2}` plus normalization; unknowns `(a, b, c)`.
    #[default]
    Three,
    /// Jets `i ∈ {0, 1, 2}` plus normalization; adds `d·x⁵`.
    Four,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Settings {
    /// Relative slack allowed when a range is checked against a domain.
    pub slack: f64,
    /// Floor on |f'(base)| for local inverses.
    pub derivative_floor: f64,
    /// Coefficients above this modulus are rejected.
    pub coeff_ceiling: f64,
    /// Residual tolerance for Newton solves on coefficients.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Extra radius (in rescaled units) kept around the output domain so
    /// that unit translations stay inside.
    pub shift_margin: f64,
    /// If set, the pre-renormalization is computed on a disk of this radius
    /// around 0 instead of the rescaled input domain.
    pub pr_radius: Option<f64>,
    /// Seed for the root of `a(x, 0) = 0` used to pull back; defaults to a
    /// Newton start at the translation estimate.
    pub pullback_seed: Option<C<f64>>,
    /// Radius of the disk searched for critical points.
    pub q_radius: f64,
    /// Floor on |ℓ_n| before rescaling.
    pub scale_floor: f64,
    pub convention: Convention,
    pub commutation: CommutationReading,
    /// Minimum modulus of the partial quotient used by `renorm1` when no
    /// rotation number is carried.
    pub rational_floor: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            slack: 1.05,
            derivative_floor: 1e-8,
            coeff_ceiling: 1e12,
            newton_tol: 1e-13,
            max_newton: 40,
            shift_margin: 1.5,
            pr_radius: None,
            pullback_seed: None,
            q_radius: 0.05,
            scale_floor: 1e-6,
            convention: Convention::Words,
            commutation: CommutationReading::Three,
            rational_floor: 1000,
        }
    }
}

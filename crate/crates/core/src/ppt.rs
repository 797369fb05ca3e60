//! Partial transposes of the symmetric states.
//!
//! Transposing the `(B, B′)` factors maps `S ↦ (I + dΦ)/2` and
//! `A ↦ (I − dΦ)/2` on each pair, with `Φ` the maximally entangled
//! projector. So `ξ^Γ` is diagonal in the four blocks
//! `(Φ | Φ^⊥)_{AB} ⊗ (Φ | Φ^⊥)_{A′B′}`:
//!
//! | block          | eigenvalue                 | multiplicity   |
//! |----------------|----------------------------|----------------|
//! | `(Φ, Φ)`       | `μ^(1)·λ / d²`             | 1              |
//! | `(Φ, Φ^⊥)`     | `μ^(3)·λ / (d²(d²−1))`     | `d² − 1`       |
//! | `(Φ^⊥, Φ)`     | `μ^(2)·λ / (d²(d²−1))`     | `d² − 1`       |
//! | `(Φ^⊥, Φ^⊥)`   | positive combination of λ  | `(d² − 1)²`    |

use serde::Serialize;

use crate::choi::{choi_state, CovariantMap, LambdaVec};
use crate::error::{Error, Result};
use crate::tensor::{partial_transpose, spectral, SubsystemShape};
use crate::BOUNDARY_TOL;

/// Largest `d` accepted by [`ppt_spectrum_numeric`].
pub const MAX_NUMERIC_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PptBlock {
    PhiPhi,
    PhiPerp,
    PerpPhi,
    PerpPerp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockEigenvalue {
    pub block: PptBlock,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

/// Analytic spectrum of `ξ^Γ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptSpectrum {
    pub d: usize,
    pub blocks: [BlockEigenvalue; 4],
}

impl PptSpectrum {
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ multiplicity · eigenvalue`, which is `tr ξ^Γ = 1`.
    pub fn weighted_sum(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.multiplicity as f64 * b.eigenvalue)
            .sum()
    }

    /// All `d⁴` eigenvalues, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.eigenvalue, b.multiplicity))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn block(&self, block: PptBlock) -> f64 {
        self.blocks
            .iter()
            .find(|b| b.block == block)
            .map(|b| b.eigenvalue)
            .expect("all four blocks present")
    }
}

pub fn ppt_spectrum(lambda: &LambdaVec, d: usize) -> Result<PptSpectrum> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    let df = d as f64;
    // eigenvalues of Â^Γ and Ŝ^Γ on Φ and Φ^⊥
    let a = [-1.0 / df, 1.0 / (df * (df - 1.0))];
    let s = [1.0 / df, 1.0 / (df * (df + 1.0))];
    let eig = |x: usize, y: usize| {
        lambda[0] * a[x] * a[y]
            + lambda[1] * a[x] * s[y]
            + lambda[2] * s[x] * a[y]
            + lambda[3] * s[x] * s[y]
    };
    let perp = d * d - 1;
    Ok(PptSpectrum {
        d,
        blocks: [
            BlockEigenvalue {
                block: PptBlock::PhiPhi,
                eigenvalue: eig(0, 0),
                multiplicity: 1,
            },
            BlockEigenvalue {
                block: PptBlock::PhiPerp,
                eigenvalue: eig(0, 1),
                multiplicity: perp,
            },
            BlockEigenvalue {
                block: PptBlock::PerpPhi,
                eigenvalue: eig(1, 0),
                multiplicity: perp,
            },
            BlockEigenvalue {
                block: PptBlock::PerpPerp,
                eigenvalue: eig(1, 1),
                multiplicity: perp * perp,
            },
        ],
    })
}

/// Which party's factors are transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransposeSide {
    /// `(A, A′)`
    First,
    /// `(B, B′)`
    Second,
}

/// Spectrum of `ξ^Γ` by building `ξ` and diagonalizing its partial
/// transpose (transposing `(B, B′)`).
pub fn ppt_spectrum_numeric(lambda: &LambdaVec, d: usize) -> Result<Vec<f64>> {
    ppt_spectrum_numeric_on(lambda, d, TransposeSide::Second)
}

pub fn ppt_spectrum_numeric_on(
    lambda: &LambdaVec,
    d: usize,
    side: TransposeSide,
) -> Result<Vec<f64>> {
    if d > MAX_NUMERIC_DIM {
        return Err(Error::DimensionTooLarge(d, MAX_NUMERIC_DIM));
    }
    let xi = choi_state(&CovariantMap::new(d, *lambda)?);
    let factors: &[usize] = match side {
        TransposeSide::First => &[0, 2],
        TransposeSide::Second => &[1, 3],
    };
    let pt = partial_transpose(&xi, &SubsystemShape::four_party(d), factors)?;
    spectral(&pt)
}

/// Positive partial transpose, judged on the analytic spectrum.
pub fn is_ppt(lambda: &LambdaVec, d: usize) -> Result<bool> {
    Ok(ppt_spectrum(lambda, d)?.min_eigenvalue() >= -BOUNDARY_TOL)
}

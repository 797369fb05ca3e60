//! Choi states of `U⊗U`-covariant maps and their action on inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmetric::normalized_projectors;
use crate::tensor::{
    identity, kron, max_abs_diff, partial_trace, ComplexMatrix, SubsystemShape, C64,
};
use crate::{BOUNDARY_TOL, DEFAULT_TOL};

/// Weights `(λ1, λ2, λ3, λ4)` on `Â⊗Â, Â⊗Ŝ, Ŝ⊗Â, Ŝ⊗Ŝ`; nonnegative and
/// summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct LambdaVec([f64; 4]);

impl LambdaVec {
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < -BOUNDARY_TOL) {
            return Err(Error::NegativeWeight(weights));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::Unnormalized(sum));
        }
        Ok(Self(weights.map(|w| w.max(0.0))))
    }

    /// Scales nonnegative weights to unit sum, returning the original sum.
    pub fn normalize(weights: [f64; 4]) -> Result<(Self, f64)> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NegativeWeight(weights));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::Unnormalized(sum));
        }
        Ok((Self(weights.map(|w| w / sum)), sum))
    }

    /// `(νμ, ν(1−μ), (1−ν)μ, (1−ν)(1−μ))`, the weights of `ω_ν ⊗ ω_μ`.
    pub fn werner_product(nu: f64, mu: f64) -> Result<Self> {
        Self::new([
            nu * mu,
            nu * (1.0 - mu),
            (1.0 - nu) * mu,
            (1.0 - nu) * (1.0 - mu),
        ])
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn dot(&self, other: &[f64; 4]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

impl TryFrom<[f64; 4]> for LambdaVec {
    type Error = Error;

    fn try_from(value: [f64; 4]) -> Result<Self> {
        Self::new(value)
    }
}

impl From<LambdaVec> for [f64; 4] {
    fn from(value: LambdaVec) -> Self {
        value.0
    }
}

impl std::ops::Index<usize> for LambdaVec {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// A completely-positive map on `C^d ⊗ C^d` commuting with every `U⊗U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariantMap {
    d: usize,
    lambda: LambdaVec,
}

impl CovariantMap {
    pub fn new(d: usize, lambda: LambdaVec) -> Result<Self> {
        if d < 2 {
            return Err(Error::Dimension(d));
        }
        Ok(Self { d, lambda })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> &LambdaVec {
        &self.lambda
    }
}

/// `ξ = λ1 Â⊗Â + λ2 Â⊗Ŝ + λ3 Ŝ⊗Â + λ4 Ŝ⊗Ŝ` on `(A, B, A′, B′)`.
pub fn choi_state(m: &CovariantMap) -> ComplexMatrix {
    let (s_hat, a_hat) = normalized_projectors(m.d).expect("CovariantMap holds d >= 2");
    let blocks = [
        (&a_hat, &a_hat),
        (&a_hat, &s_hat),
        (&s_hat, &a_hat),
        (&s_hat, &s_hat),
    ];
    let n = m.d.pow(4);
    blocks
        .iter()
        .zip(m.lambda.as_array())
        .filter(|(_, &w)| w != 0.0)
        .fold(ComplexMatrix::zeros(n, n), |acc, ((x, y), &w)| {
            acc + kron(x, y) * C64::new(w, 0.0)
        })
}

/// Normalized output of a map together with its pre-normalization trace.
#[derive(Debug, Clone)]
pub struct MapOutput {
    pub state: ComplexMatrix,
    pub success_weight: f64,
}

/// `E(ρ) = tr_{AB}[ξ (ρᵀ ⊗ I_{A′B′})]` for a Choi state on `(A, B, A′, B′)`.
///
/// The output is renormalized; its trace before renormalization is the
/// success weight.
pub fn apply_via_choi(xi: &ComplexMatrix, rho_in: &ComplexMatrix, d: usize) -> Result<MapOutput> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    let pair = d * d;
    if xi.nrows() != pair * pair || xi.ncols() != pair * pair {
        return Err(Error::ShapeMismatch {
            side: xi.nrows(),
            dims: vec![d; 4],
        });
    }
    if rho_in.nrows() != pair || rho_in.ncols() != pair {
        return Err(Error::ShapeMismatch {
            side: rho_in.nrows(),
            dims: vec![d; 2],
        });
    }
    let tr_in = rho_in.trace();
    if (tr_in - C64::new(1.0, 0.0)).norm() > DEFAULT_TOL {
        return Err(Error::TraceNotUnit(tr_in.re));
    }
    let rho_t = rho_in.transpose();
    // out[x, y] = Σ_{m,n} ξ[(m,x),(n,y)] ρᵀ[n,m]
    let out = ComplexMatrix::from_fn(pair, pair, |x, y| {
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..pair {
            for n in 0..pair {
                acc += xi[(m * pair + x, n * pair + y)] * rho_t[(n, m)];
            }
        }
        acc
    });
    let weight = out.trace().re;
    if weight <= DEFAULT_TOL {
        return Err(Error::Annihilated(weight));
    }
    Ok(MapOutput {
        state: out / C64::new(weight, 0.0),
        success_weight: weight,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePreservation {
    pub preserving: bool,
    /// Largest entry of `|tr_out ξ − I/d²|`.
    pub residual: f64,
}

/// Whether `tr_{A′B′} ξ ∝ I`, i.e. the map succeeds with certainty.
pub fn is_trace_preserving(m: &CovariantMap) -> TracePreservation {
    let xi = choi_state(m);
    let shape = SubsystemShape::four_party(m.d);
    let reduced = partial_trace(&xi, &shape, &[0, 1]).expect("four-party shape");
    let pair = m.d * m.d;
    let target = identity(pair) / C64::new(pair as f64, 0.0);
    let residual = max_abs_diff(&reduced, &target);
    TracePreservation {
        preserving: residual <= DEFAULT_TOL,
        residual,
    }
}

/// `(d+1)(λ1+λ2) − (d−1)(λ3+λ4)`; zero exactly for trace-preserving maps.
pub fn trace_preservation_defect(lambda: &LambdaVec, d: usize) -> f64 {
    let df = d as f64;
    (df + 1.0) * (lambda[0] + lambda[1]) - (df - 1.0) * (lambda[2] + lambda[3])
}

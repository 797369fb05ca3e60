//! The witnesses dual to the non-positivity facets of the polytope, and
//! their minimization over product states of `(A A′) | (B B′)`.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::witness_facet;
use crate::symmetric::{flip, projectors};
use crate::tensor::{
    ginibre, identity, kron, permute_subsystems, ComplexMatrix, ComplexVector, SubsystemShape, C64,
};

/// Permutation taking `(A, B, A′, B′)` to `(A, A′, B, B′)`; its own inverse.
pub const REGROUP: [usize; 4] = [0, 2, 1, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Witness {
    /// `F⊗F`
    W1,
    /// `d I⊗F − F⊗F`
    W2,
    /// `d F⊗I − F⊗F`
    W3,
}

impl Witness {
    pub const ALL: [Witness; 3] = [Witness::W1, Witness::W2, Witness::W3];

    pub fn index(self) -> usize {
        match self {
            Witness::W1 => 1,
            Witness::W2 => 2,
            Witness::W3 => 3,
        }
    }
}

impl TryFrom<usize> for Witness {
    type Error = Error;

    fn try_from(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Witness::W1),
            2 => Ok(Witness::W2),
            3 => Ok(Witness::W3),
            _ => Err(Error::WitnessIndex(i)),
        }
    }
}

/// The rescaled witness `W^(i)` on `(A, B, A′, B′)`.
pub fn witness_operator(w: Witness, d: usize) -> Result<ComplexMatrix> {
    let f = flip(d)?;
    let id = identity(d * d);
    let ff = kron(&f, &f);
    let df = C64::new(d as f64, 0.0);
    Ok(match w {
        Witness::W1 => ff,
        Witness::W2 => kron(&id, &f) * df - ff,
        Witness::W3 => kron(&f, &id) * df - ff,
    })
}

/// `W_μ = μ1 A⊗A + μ2 A⊗S + μ3 S⊗A + μ4 S⊗S`, so that `tr ξ W_μ = λ·μ`.
pub fn facet_operator(mu: &[f64; 4], d: usize) -> Result<ComplexMatrix> {
    let (s, a) = projectors(d)?;
    let blocks = [kron(&a, &a), kron(&a, &s), kron(&s, &a), kron(&s, &s)];
    let n = d.pow(4);
    Ok(blocks
        .iter()
        .zip(mu)
        .fold(ComplexMatrix::zeros(n, n), |acc, (b, &m)| {
            acc + b * C64::new(m, 0.0)
        }))
}

/// `W_μ` for `μ^(i)`; equal to `W^(i)` with unit proportionality factor.
pub fn witness_facet_operator(w: Witness, d: usize) -> Result<ComplexMatrix> {
    facet_operator(&witness_facet(w.index(), d)?, d)
}

/// `|α⟩_{AA′} ⊗ |β⟩_{BB′}` with `|α⟩ = Σ α_ij |i⟩_A|j⟩_{A′}`; both factors
/// have unit Frobenius norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductVector {
    #[serde(skip)]
    alpha: ComplexMatrix,
    #[serde(skip)]
    beta: ComplexMatrix,
}

impl ProductVector {
    /// Normalizes both coefficient matrices.
    pub fn new(alpha: ComplexMatrix, beta: ComplexMatrix) -> Result<Self> {
        let d = alpha.nrows();
        for m in [&alpha, &beta] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::ShapeMismatch {
                    side: m.nrows(),
                    dims: vec![d, d],
                });
            }
        }
        let (na, nb) = (alpha.norm(), beta.norm());
        if na == 0.0 || nb == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            alpha: alpha / C64::new(na, 0.0),
            beta: beta / C64::new(nb, 0.0),
        })
    }

    /// Gaussian coefficients, normalized.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self::new(ginibre(d, d, rng), ginibre(d, d, rng)).expect("Gaussian matrices are nonzero")
    }

    pub fn d(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn alpha(&self) -> &ComplexMatrix {
        &self.alpha
    }

    pub fn beta(&self) -> &ComplexMatrix {
        &self.beta
    }

    /// `γ = α β†`.
    pub fn gamma(&self) -> ComplexMatrix {
        &self.alpha * self.beta.adjoint()
    }

    /// State vector in `(A, A′, B, B′)` order.
    pub fn vector(&self) -> ComplexVector {
        let d = self.d();
        let flat = |m: &ComplexMatrix| ComplexVector::from_fn(d * d, |k, _| m[(k / d, k % d)]);
        flat(&self.alpha).kronecker(&flat(&self.beta))
    }
}

/// `⟨I⊗F⟩ = tr(α†α β†β)`, `⟨F⊗I⟩ = tr(αα† ββ†)`, `⟨F⊗F⟩ = |tr αβ†|²` on a
/// (not necessarily normalized) product vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceIdentities {
    pub id_flip: f64,
    pub flip_id: f64,
    pub flip_flip: f64,
}

pub fn trace_identities(alpha: &ComplexMatrix, beta: &ComplexMatrix) -> TraceIdentities {
    let aa = alpha.adjoint() * alpha;
    let bb = beta.adjoint() * beta;
    let aa_r = alpha * alpha.adjoint();
    let bb_r = beta * beta.adjoint();
    let id_flip = crate::tensor::trace_product(&aa, &bb).re;
    let flip_id = crate::tensor::trace_product(&aa_r, &bb_r).re;
    let overlap: C64 = alpha
        .iter()
        .zip(beta.iter())
        .map(|(a, b)| a * b.conj())
        .sum();
    TraceIdentities {
        id_flip,
        flip_id,
        flip_flip: overlap.norm_sqr(),
    }
}

/// `⟨αβ|W^(i)|αβ⟩` assembled from [`trace_identities`]; the matrices need
/// not be normalized.
pub fn identity_expectation(w: Witness, alpha: &ComplexMatrix, beta: &ComplexMatrix) -> f64 {
    let d = alpha.nrows() as f64;
    let t = trace_identities(alpha, beta);
    match w {
        Witness::W1 => t.flip_flip,
        Witness::W2 => d * t.id_flip - t.flip_flip,
        Witness::W3 => d * t.flip_id - t.flip_flip,
    }
}

pub fn product_expectation(w: Witness, p: &ProductVector) -> f64 {
    identity_expectation(w, &p.alpha, &p.beta)
}

/// `⟨v| P W^(i) P† |v⟩` with the witness regrouped to `(A, A′, B, B′)`.
pub fn full_matrix_expectation(w: Witness, p: &ProductVector) -> Result<f64> {
    let regrouped = regrouped_witness(w, p.d())?;
    Ok(expectation_with(&regrouped, p))
}

/// `W^(i)` permuted to `(A, A′, B, B′)`.
pub fn regrouped_witness(w: Witness, d: usize) -> Result<ComplexMatrix> {
    permute_subsystems(
        &witness_operator(w, d)?,
        &SubsystemShape::four_party(d),
        &REGROUP,
    )
}

/// `⟨v|M|v⟩` for an operator already in `(A, A′, B, B′)` order.
pub fn expectation_with(regrouped: &ComplexMatrix, p: &ProductVector) -> f64 {
    let v = p.vector();
    (v.adjoint() * regrouped * &v)[(0, 0)].re
}

/// `d tr(γ†γ) − |tr γ|²`, nonnegative by Cauchy–Schwarz.
pub fn cauchy_schwarz_gap(gamma: &ComplexMatrix) -> f64 {
    let d = gamma.nrows() as f64;
    d * gamma.norm_squared() - gamma.trace().norm_sqr()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductMinimum {
    pub value: f64,
    #[serde(skip)]
    pub argmin: ProductVector,
}

/// Smallest witness expectation over `samples` random product vectors.
pub fn random_product_min<R: Rng + ?Sized>(
    w: Witness,
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<ProductMinimum> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let mut best: Option<ProductMinimum> = None;
    for _ in 0..samples {
        let p = ProductVector::random(d, rng);
        let value = product_expectation(w, &p);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(ProductMinimum { value, argmin: p });
        }
    }
    Ok(best.expect("samples >= 1"))
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub value: f64,
    pub point: ProductVector,
    /// Objective after each iteration, starting with the initial value.
    pub history: Vec<f64>,
}

/// Derivative-free descent on the product manifold: Gaussian perturbation of
/// both factors, renormalization, accept only on strict improvement. The
/// step grows on success and shrinks on failure.
pub fn refine_min<R: Rng + ?Sized>(
    w: Witness,
    start: &ProductVector,
    iterations: usize,
    rng: &mut R,
) -> Refinement {
    let d = start.d();
    let mut point = start.clone();
    let mut value = product_expectation(w, &point);
    let mut step = 0.3;
    let mut history = Vec::with_capacity(iterations + 1);
    history.push(value);
    for _ in 0..iterations {
        let s = C64::new(step, 0.0);
        let alpha = point.alpha() + ginibre(d, d, rng) * s;
        let beta = point.beta() + ginibre(d, d, rng) * s;
        if let Ok(candidate) = ProductVector::new(alpha, beta) {
            let v = product_expectation(w, &candidate);
            if v < value {
                point = candidate;
                value = v;
                step = (step * 1.5).min(1.0);
            } else {
                step = (step * 0.9).max(1e-8);
            }
        }
        history.push(value);
    }
    Refinement {
        value,
        point,
        history,
    }
}

/// Runs [`refine_min`] from `starts` random points in parallel. Start `k`
/// uses its own generator seeded with `seed + k`, so the result does not
/// depend on scheduling.
pub fn multi_start_refine<R>(
    w: Witness,
    d: usize,
    starts: usize,
    iterations: usize,
    seed: u64,
) -> Vec<Refinement>
where
    R: Rng + SeedableRng,
{
    (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = R::seed_from_u64(seed.wrapping_add(k as u64));
            let start = ProductVector::random(d, &mut rng);
            refine_min(w, &start, iterations, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choi::{choi_state, CovariantMap, LambdaVec};
    use crate::polytope::random_simplex_point;
    use crate::tensor::{max_abs_diff, trace_product};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn witness_traces_and_linearity() {
        for d in 2..=3 {
            let w1 = witness_operator(Witness::W1, d).unwrap();
            assert_eq!(w1.trace().re, (d * d) as f64);
            let f = flip(d).unwrap();
            let id = identity(d * d);
            let sum = witness_operator(Witness::W2, d).unwrap()
                + witness_operator(Witness::W3, d).unwrap();
            let expected = (kron(&id, &f) + kron(&f, &id)) * C64::new(d as f64, 0.0)
                - kron(&f, &f) * C64::new(2.0, 0.0);
            assert!(max_abs_diff(&sum, &expected) < 1e-14);
        }
        assert_eq!(Witness::try_from(4), Err(Error::WitnessIndex(4)));
    }

    #[test]
    fn facet_operators_equal_rescaled_witnesses() {
        // proportionality factor between W_μ and W^(i) is exactly 1
        for d in 2..=3 {
            for w in Witness::ALL {
                let a = witness_facet_operator(w, d).unwrap();
                let b = witness_operator(w, d).unwrap();
                assert!(max_abs_diff(&a, &b) < 1e-13, "{w:?} d={d}");
            }
        }
    }

    #[test]
    fn facet_operator_pairs_with_choi_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..=3 {
            for _ in 0..20 {
                let lam = random_simplex_point(&mut rng);
                let xi = choi_state(&CovariantMap::new(d, lam).unwrap());
                for w in Witness::ALL {
                    let mu = witness_facet(w.index(), d).unwrap();
                    let t = trace_product(&xi, &witness_facet_operator(w, d).unwrap()).re;
                    assert!((t - lam.dot(&mu)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_examples() {
        for d in 2..=4 {
            let id = identity(d);
            let df = (d * d) as f64;
            assert!((identity_expectation(Witness::W1, &id, &id) - df).abs() < 1e-12);
            assert!(identity_expectation(Witness::W2, &id, &id).abs() < 1e-12);
            assert!(identity_expectation(Witness::W3, &id, &id).abs() < 1e-12);
            let p = ProductVector::new(id.clone(), id.clone()).unwrap();
            assert!((product_expectation(Witness::W1, &p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identities_match_full_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 2..=4 {
            let ops: Vec<_> = Witness::ALL
                .iter()
                .map(|&w| regrouped_witness(w, d).unwrap())
                .collect();
            for _ in 0..100 {
                let p = ProductVector::random(d, &mut rng);
                for (w, op) in Witness::ALL.iter().zip(&ops) {
                    let a = product_expectation(*w, &p);
                    let b = expectation_with(op, &p);
                    assert!((a - b).abs() < 1e-10, "{w:?} d={d}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn witness_two_is_cauchy_schwarz_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = ProductVector::random(3, &mut rng);
            let gap = cauchy_schwarz_gap(&p.gamma());
            assert!((gap - product_expectation(Witness::W2, &p)).abs() < 1e-12);
            assert!(gap >= -1e-12);
        }
    }

    #[test]
    fn product_vector_validation() {
        let z = ComplexMatrix::zeros(2, 2);
        assert_eq!(
            ProductVector::new(z.clone(), identity(2)),
            Err(Error::ZeroVector)
        );
        assert!(ProductVector::new(identity(2), identity(3)).is_err());
        let p = ProductVector::new(identity(2), identity(2)).unwrap();
        assert!((p.alpha().norm() - 1.0).abs() < 1e-15);
        assert!((p.vector().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_min_nonnegative_and_deterministic() {
        let a =
            random_product_min(Witness::W2, 2, 2000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b =
            random_product_min(Witness::W2, 2, 2000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.value >= -1e-10);
        let w1 =
            random_product_min(Witness::W1, 3, 2000, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert!(w1.value >= 0.0);
        assert!(random_product_min(Witness::W1, 3, 0, &mut ChaCha8Rng::seed_from_u64(6)).is_err());
    }

    #[test]
    fn refinement_stays_at_equality_point() {
        for d in 2..=3 {
            let id = identity(d);
            let start = ProductVector::new(id.clone(), id).unwrap();
            let r = refine_min(Witness::W2, &start, 500, &mut ChaCha8Rng::seed_from_u64(7));
            assert!(r.value.abs() < 1e-9);
        }
    }

    #[test]
    fn refinement_is_monotone_and_nonnegative() {
        for d in 2..=3 {
            for w in [Witness::W2, Witness::W3] {
                let runs = multi_start_refine::<ChaCha8Rng>(w, d, 8, 400, 11);
                for r in runs {
                    assert!(r.history.windows(2).all(|h| h[1] <= h[0]));
                    assert!(r.value >= -1e-9);
                    assert!(r.value < r.history[0] || r.history[0] == r.value);
                }
            }
        }
    }

    #[test]
    fn witness_detects_states_outside_polytope() {
        let d = 2;
        let lam = LambdaVec::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        let xi = choi_state(&CovariantMap::new(d, lam).unwrap());
        let t = trace_product(&xi, &witness_operator(Witness::W2, d).unwrap()).re;
        assert!((t + 3.0).abs() < 1e-12);
    }
}

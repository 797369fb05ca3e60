//! The commutant of `U⊗U`: flip, symmetric and antisymmetric projectors,
//! Werner states, and the single- and two-pair twirls.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::choi::LambdaVec;
use crate::error::{Error, Result};
use crate::tensor::{
    apply_factor, conjugate_factor, haar_unitary, identity, kron, trace_product, ComplexMatrix,
    ComplexVector, SubsystemShape, C64,
};
use crate::DEFAULT_TOL;

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::Dimension(d))
    } else {
        Ok(())
    }
}

fn check_unit_trace(rho: &ComplexMatrix) -> Result<()> {
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > DEFAULT_TOL {
        return Err(Error::TraceNotUnit(tr.re));
    }
    Ok(())
}

fn check_side(rho: &ComplexMatrix, side: usize) -> Result<()> {
    if rho.nrows() != side || rho.ncols() != side {
        return Err(Error::ShapeMismatch {
            side: rho.nrows(),
            dims: vec![side],
        });
    }
    Ok(())
}

/// Werner state label `(d, ν)`; `ν` is the weight on the antisymmetric state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WernerParam {
    d: usize,
    nu: f64,
}

impl WernerParam {
    pub fn new(d: usize, nu: f64) -> Result<Self> {
        check_dim(d)?;
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::WernerParameter(nu));
        }
        Ok(Self { d, nu })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Werner states are separable exactly for `ν ≤ 1/2`.
    pub fn is_separable(&self) -> bool {
        self.nu <= 0.5
    }
}

/// The swap `F|i⟩|j⟩ = |j⟩|i⟩` on `C^d ⊗ C^d`.
pub fn flip(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let n = d * d;
    let mut f = ComplexMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = C64::new(1.0, 0.0);
        }
    }
    Ok(f)
}

/// `(S, A) = ((I + F)/2, (I − F)/2)`.
pub fn projectors(d: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let f = flip(d)?;
    let id = identity(d * d);
    let half = C64::new(0.5, 0.0);
    Ok(((&id + &f) * half, (&id - &f) * half))
}

/// `tr S = d(d+1)/2`.
pub fn sym_dim(d: usize) -> f64 {
    (d * (d + 1)) as f64 / 2.0
}

/// `tr A = d(d−1)/2`.
pub fn anti_dim(d: usize) -> f64 {
    (d * (d - 1)) as f64 / 2.0
}

/// Normalized states `(Ŝ, Â)`.
pub fn normalized_projectors(d: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (s, a) = projectors(d)?;
    Ok((
        s / C64::new(sym_dim(d), 0.0),
        a / C64::new(anti_dim(d), 0.0),
    ))
}

/// `ω_ν = ν Â + (1 − ν) Ŝ`.
pub fn werner_state(p: &WernerParam) -> ComplexMatrix {
    let (s_hat, a_hat) = normalized_projectors(p.d).expect("WernerParam holds d >= 2");
    a_hat * C64::new(p.nu, 0.0) + s_hat * C64::new(1.0 - p.nu, 0.0)
}

/// Exact `U⊗U` twirl of a unit-trace state on `d²`: returns `ν = tr(ρA)`.
pub fn twirl_exact(rho: &ComplexMatrix, d: usize) -> Result<WernerParam> {
    check_dim(d)?;
    check_side(rho, d * d)?;
    check_unit_trace(rho)?;
    let (_, a) = projectors(d)?;
    let nu = trace_product(rho, &a).re;
    // absorb rounding at the ends of the interval
    let nu = if (-DEFAULT_TOL..0.0).contains(&nu) {
        0.0
    } else if (1.0..=1.0 + DEFAULT_TOL).contains(&nu) {
        1.0
    } else {
        nu
    };
    WernerParam::new(d, nu)
}

/// Monte-Carlo average together with its sample spread.
#[derive(Debug, Clone)]
pub struct TwirlEstimate {
    pub mean: ComplexMatrix,
    /// `sqrt(mean_j ‖X_j − mean‖_F²)` over the conjugated samples `X_j`.
    pub spread: f64,
    pub samples: usize,
}

impl TwirlEstimate {
    /// Estimated standard error of `mean` in Frobenius norm.
    pub fn standard_error(&self) -> f64 {
        self.spread / (self.samples as f64).sqrt()
    }
}

fn haar_average<R, F>(
    rho: &ComplexMatrix,
    shape: &SubsystemShape,
    samples: usize,
    rng: &mut R,
    mut conjugate: F,
) -> Result<TwirlEstimate>
where
    R: Rng + ?Sized,
    F: FnMut(&ComplexMatrix, &mut R) -> Result<ComplexMatrix>,
{
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let n = shape.total();
    check_side(rho, n)?;
    let mut acc = ComplexMatrix::zeros(n, n);
    let mut sq = 0.0;
    for _ in 0..samples {
        let x = conjugate(rho, rng)?;
        sq += x.norm_squared();
        acc += x;
    }
    let mean = acc / C64::new(samples as f64, 0.0);
    let var = (sq / samples as f64 - mean.norm_squared()).max(0.0);
    Ok(TwirlEstimate {
        mean,
        spread: var.sqrt(),
        samples,
    })
}

/// Average of `(U⊗U) ρ (U⊗U)†` over `samples` Haar unitaries.
pub fn twirl_mc<R: Rng + ?Sized>(
    rho: &ComplexMatrix,
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    Ok(twirl_mc_estimate(rho, d, samples, rng)?.mean)
}

pub fn twirl_mc_estimate<R: Rng + ?Sized>(
    rho: &ComplexMatrix,
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<TwirlEstimate> {
    check_dim(d)?;
    let shape = SubsystemShape::pair(d);
    haar_average(rho, &shape, samples, rng, |m, rng| {
        let u = haar_unitary(d, rng);
        let m = conjugate_factor(m, &shape, 0, &u)?;
        conjugate_factor(&m, &shape, 1, &u)
    })
}

/// The four commutant projectors of `U⊗U⊗V⊗V` in `(A, B, A′, B′)` order:
/// `A⊗A, A⊗S, S⊗A, S⊗S`.
pub fn commutant_projectors(d: usize) -> Result<[ComplexMatrix; 4]> {
    let (s, a) = projectors(d)?;
    Ok([kron(&a, &a), kron(&a, &s), kron(&s, &a), kron(&s, &s)])
}

/// Exact double twirl `Δ`: projects a unit-trace state on `d⁴` onto the
/// commutant, returning `λ_i = tr(ρ P_i)`.
pub fn double_twirl(rho4: &ComplexMatrix, d: usize) -> Result<LambdaVec> {
    check_dim(d)?;
    check_side(rho4, d.pow(4))?;
    check_unit_trace(rho4)?;
    let p = commutant_projectors(d)?;
    let w = [0, 1, 2, 3].map(|i| trace_product(rho4, &p[i]).re);
    LambdaVec::new(w)
}

/// Monte-Carlo `Δ`: average of `(U⊗U⊗V⊗V) ρ (U⊗U⊗V⊗V)†`.
pub fn double_twirl_mc<R: Rng + ?Sized>(
    rho4: &ComplexMatrix,
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<TwirlEstimate> {
    check_dim(d)?;
    let shape = SubsystemShape::four_party(d);
    haar_average(rho4, &shape, samples, rng, |m, rng| {
        let u = haar_unitary(d, rng);
        let v = haar_unitary(d, rng);
        let mut out = m.clone();
        for (factor, w) in [(0, &u), (1, &u), (2, &v), (3, &v)] {
            out = conjugate_factor(&out, &shape, factor, w)?;
        }
        Ok(out)
    })
}

/// Monte-Carlo `Δ` of a pure state `|v⟩⟨v|`, rotating the vector instead of
/// the density matrix.
pub fn double_twirl_mc_pure<R: Rng + ?Sized>(
    v: &ComplexVector,
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<TwirlEstimate> {
    check_dim(d)?;
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let shape = SubsystemShape::four_party(d);
    let n = shape.total();
    if v.len() != n {
        return Err(Error::ShapeMismatch {
            side: v.len(),
            dims: shape.dims().to_vec(),
        });
    }
    let norm = v.norm_squared();
    let mut acc = ComplexMatrix::zeros(n, n);
    for _ in 0..samples {
        let u = haar_unitary(d, rng);
        let w = haar_unitary(d, rng);
        let mut x = v.clone();
        for (factor, g) in [(0, &u), (1, &u), (2, &w), (3, &w)] {
            x = apply_factor(&x, &shape, factor, g)?;
        }
        acc.ger(
            C64::new(1.0 / norm, 0.0),
            &x,
            &x.conjugate(),
            C64::new(1.0, 0.0),
        );
    }
    let mean = acc / C64::new(samples as f64, 0.0);
    // every sample is a rank-one projector with ‖X_j‖_F = 1
    let var = (1.0 - mean.norm_squared()).max(0.0);
    Ok(TwirlEstimate {
        mean,
        spread: var.sqrt(),
        samples,
    })
}

/// Root-mean-square Frobenius error of [`twirl_mc`] against the exact twirl,
/// over independent repetitions.
pub fn twirl_mc_rms_error<R: Rng + ?Sized>(
    rho: &ComplexMatrix,
    d: usize,
    samples: usize,
    repetitions: usize,
    rng: &mut R,
) -> Result<f64> {
    if repetitions == 0 {
        return Err(Error::NoSamples);
    }
    let exact = werner_state(&twirl_exact(rho, d)?);
    let mut sq = 0.0;
    for _ in 0..repetitions {
        let est = twirl_mc(rho, d, samples, rng)?;
        sq += (est - &exact).norm_squared();
    }
    Ok((sq / repetitions as f64).sqrt())
}

/// `Σ_{k,s} |ks⟩_{AB} ⊗ |ks⟩_{A′B′}`, unnormalized (squared norm `d²`).
pub fn product_input_vector(d: usize) -> Result<ComplexVector> {
    check_dim(d)?;
    let mut v = ComplexVector::zeros(d.pow(4));
    for k in 0..d {
        for s in 0..d {
            let m = k * d + s;
            v[m * d * d + m] = C64::new(1.0, 0.0);
        }
    }
    Ok(v)
}

/// The product input `Σ_{k,s} |ks⟩_{AB} ⊗ |ks⟩_{A′B′}`, normalized to a unit
/// trace state on `(A, B, A′, B′)`.
///
/// Across `(A A′) | (B B′)` this is `|Φ⁺⟩_{AA′} ⊗ |Φ⁺⟩_{BB′}`.
pub fn product_input_state(d: usize) -> Result<ComplexMatrix> {
    let v = product_input_vector(d)?;
    let proj = &v * v.adjoint();
    let tr = proj.trace();
    Ok(proj / tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{
        frobenius_distance, max_abs_diff, partial_transpose, random_density_matrix, spectral,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flip_d2_swaps_01_and_10() {
        let f = flip(2).unwrap();
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(f[(r, c)].re, expected[r][c]);
                assert_eq!(f[(r, c)].im, 0.0);
            }
        }
    }

    #[test]
    fn flip_squares_to_identity_with_trace_d() {
        for d in 2..=4 {
            let f = flip(d).unwrap();
            assert_eq!(&f * &f, identity(d * d));
            assert_eq!(f.trace().re, d as f64);
        }
        assert_eq!(flip(1), Err(Error::Dimension(1)));
    }

    #[test]
    fn projector_algebra() {
        for d in 2..=4 {
            let (s, a) = projectors(d).unwrap();
            assert_eq!(&s + &a, identity(d * d));
            assert_eq!(&s * &a, ComplexMatrix::zeros(d * d, d * d));
            assert_eq!(&s * &s, s);
            assert_eq!(&a * &a, a);
            assert_eq!(s.trace().re, sym_dim(d));
            assert_eq!(a.trace().re, anti_dim(d));
        }
        let (s, a) = projectors(3).unwrap();
        assert_eq!((s.trace().re, a.trace().re), (6.0, 3.0));
    }

    #[test]
    fn projector_ranks() {
        for d in 2..=3 {
            let (s, a) = projectors(d).unwrap();
            let count = |m: &ComplexMatrix| {
                spectral(m)
                    .unwrap()
                    .iter()
                    .filter(|&&x| (x - 1.0).abs() < 1e-10)
                    .count()
            };
            assert_eq!(count(&s), d * (d + 1) / 2);
            assert_eq!(count(&a), d * (d - 1) / 2);
        }
        let spec_s = spectral(&projectors(2).unwrap().0).unwrap();
        let spec_a = spectral(&projectors(2).unwrap().1).unwrap();
        for (got, want) in spec_s.iter().zip([0.0, 1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in spec_a.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_is_antisymmetric_projector() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = nalgebra::DVector::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
            C64::new(-h, 0.0),
            C64::new(0.0, 0.0),
        ]);
        let singlet = &v * v.adjoint();
        let (_, a) = projectors(2).unwrap();
        assert!(max_abs_diff(&a, &singlet) < 1e-15);
        let w = werner_state(&WernerParam::new(2, 1.0).unwrap());
        assert!(max_abs_diff(&w, &singlet) < 1e-15);
    }

    #[test]
    fn werner_param_validation() {
        assert!(WernerParam::new(2, 1.2).is_err());
        assert!(WernerParam::new(2, -0.1).is_err());
        assert!(WernerParam::new(1, 0.5).is_err());
        assert!(WernerParam::new(3, 0.5).unwrap().is_separable());
        assert!(!WernerParam::new(3, 0.51).unwrap().is_separable());
    }

    #[test]
    fn werner_state_weight_on_antisymmetric() {
        for d in 2..=4 {
            let (_, a) = projectors(d).unwrap();
            for nu in [0.0, 0.2, 0.5, 0.77, 1.0] {
                let w = werner_state(&WernerParam::new(d, nu).unwrap());
                assert!((w.trace().re - 1.0).abs() < 1e-12);
                assert!((trace_product(&w, &a).re - nu).abs() < 1e-12);
                assert!(spectral(&w).unwrap()[0] > -1e-12);
            }
        }
    }

    #[test]
    fn werner_state_is_uu_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=4 {
            let w = werner_state(&WernerParam::new(d, 0.3).unwrap());
            let u = haar_unitary(d, &mut rng);
            let uu = kron(&u, &u);
            let rotated = &uu * &w * uu.adjoint();
            assert!(max_abs_diff(&rotated, &w) <= 1e-10);
        }
    }

    #[test]
    fn werner_ppt_boundary_at_half() {
        // min eigenvalue of ω_ν^Γ is (1 − 2ν)/d at d=2 on the Φ direction
        let w = werner_state(&WernerParam::new(2, 0.5).unwrap());
        let pt = partial_transpose(&w, &SubsystemShape::pair(2), &[1]).unwrap();
        assert!(spectral(&pt).unwrap()[0].abs() < 1e-12);
        for d in 2..=3 {
            for nu in [0.1, 0.45, 0.55, 0.9] {
                let p = WernerParam::new(d, nu).unwrap();
                let pt =
                    partial_transpose(&werner_state(&p), &SubsystemShape::pair(d), &[1]).unwrap();
                let ppt = spectral(&pt).unwrap()[0] >= -1e-12;
                assert_eq!(ppt, p.is_separable(), "d={d} nu={nu}");
            }
        }
    }

    #[test]
    fn twirl_exact_examples() {
        // maximally entangled |Φ⟩ lies in the symmetric subspace
        for d in 2..=3 {
            let mut v = nalgebra::DVector::<C64>::zeros(d * d);
            for k in 0..d {
                v[k * d + k] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
            }
            let phi = &v * v.adjoint();
            assert!(twirl_exact(&phi, d).unwrap().nu().abs() < 1e-15);
        }
        // ⟨01|A|01⟩ = 1/2
        let mut e01 = ComplexMatrix::zeros(4, 4);
        e01[(1, 1)] = C64::new(1.0, 0.0);
        assert!((twirl_exact(&e01, 2).unwrap().nu() - 0.5).abs() < 1e-15);

        for nu in [0.0, 0.3, 1.0] {
            let w = werner_state(&WernerParam::new(3, nu).unwrap());
            assert!((twirl_exact(&w, 3).unwrap().nu() - nu).abs() < 1e-14);
        }
        assert!(matches!(
            twirl_exact(&(e01.clone() * C64::new(2.0, 0.0)), 2),
            Err(Error::TraceNotUnit(_))
        ));
    }

    #[test]
    fn twirl_exact_idempotent_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 2..=3 {
            for _ in 0..100 {
                let rho = random_density_matrix(d * d, &mut rng);
                let p = twirl_exact(&rho, d).unwrap();
                let again = twirl_exact(&werner_state(&p), d).unwrap();
                assert!((p.nu() - again.nu()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn twirl_mc_identity_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mixed = identity(9) / C64::new(9.0, 0.0);
        let out = twirl_mc(&mixed, 3, 1, &mut rng).unwrap();
        assert!(max_abs_diff(&out, &mixed) < 1e-15);
    }

    #[test]
    fn twirl_mc_converges_on_product_basis_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut e01 = ComplexMatrix::zeros(4, 4);
        e01[(1, 1)] = C64::new(1.0, 0.0);
        let est = twirl_mc_estimate(&e01, 2, 10_000, &mut rng).unwrap();
        let target = werner_state(&WernerParam::new(2, 0.5).unwrap());
        let err = frobenius_distance(&est.mean, &target);
        assert!(err <= 0.05, "err = {err}");
        assert!(err <= 5.0 * est.standard_error());
    }

    #[test]
    fn twirl_mc_is_deterministic() {
        let rho = random_density_matrix(4, &mut ChaCha8Rng::seed_from_u64(0));
        let a = twirl_mc(&rho, 2, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = twirl_mc(&rho, 2, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            twirl_mc(&rho, 2, 0, &mut ChaCha8Rng::seed_from_u64(9)),
            Err(Error::NoSamples)
        );
    }

    #[test]
    fn double_twirl_examples() {
        // product input → depolarizing vertex
        for d in 2..=4 {
            let lam = double_twirl(&product_input_state(d).unwrap(), d).unwrap();
            let df = d as f64;
            let expected = [0.5 - 0.5 / df, 0.0, 0.0, 0.5 + 0.5 / df];
            for (got, want) in lam.as_array().iter().zip(expected) {
                assert!((got - want).abs() < 1e-12);
            }
        }
        // invariant product input
        for (nu, mu) in [(0.3, 0.8), (1.0, 0.0), (0.5, 0.5)] {
            let d = 3;
            let rho = kron(
                &werner_state(&WernerParam::new(d, nu).unwrap()),
                &werner_state(&WernerParam::new(d, mu).unwrap()),
            );
            let lam = double_twirl(&rho, d).unwrap();
            let expected = [
                nu * mu,
                nu * (1.0 - mu),
                (1.0 - nu) * mu,
                (1.0 - nu) * (1.0 - mu),
            ];
            for (got, want) in lam.as_array().iter().zip(expected) {
                assert!((got - want).abs() < 1e-12);
            }
        }
        // maximally mixed state: block dimensions 1, 3, 3, 9 over 16
        let mixed = identity(16) / C64::new(16.0, 0.0);
        let lam = double_twirl(&mixed, 2).unwrap();
        for (got, want) in lam.as_array().iter().zip([1.0, 3.0, 3.0, 9.0]) {
            assert!((got - want / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn double_twirl_random_states_are_probability_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=3_usize {
            for _ in 0..20 {
                let rho = random_density_matrix(d.pow(4), &mut rng);
                let lam = double_twirl(&rho, d).unwrap();
                assert!(lam.as_array().iter().all(|&x| x >= 0.0));
                assert!((lam.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn double_twirl_mc_agrees_with_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = 2;
        let rho = product_input_state(d).unwrap();
        let est = double_twirl_mc(&rho, d, 4000, &mut rng).unwrap();
        let exact = crate::choi::choi_state(
            &crate::CovariantMap::new(d, double_twirl(&rho, d).unwrap()).unwrap(),
        );
        let err = frobenius_distance(&est.mean, &exact);
        assert!(
            err <= 5.0 * est.standard_error(),
            "{err} vs {}",
            est.standard_error()
        );

        let pure =
            double_twirl_mc_pure(&product_input_vector(d).unwrap(), d, 4000, &mut rng).unwrap();
        let err = frobenius_distance(&pure.mean, &exact);
        assert!(
            err <= 5.0 * pure.standard_error(),
            "{err} vs {}",
            pure.standard_error()
        );
        assert!((pure.spread - est.spread).abs() < 0.05);
    }

    #[test]
    fn twirl_error_decays_like_inverse_sqrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho = random_density_matrix(4, &mut rng);
        let e1 = twirl_mc_rms_error(&rho, 2, 100, 16, &mut rng).unwrap();
        let e2 = twirl_mc_rms_error(&rho, 2, 1000, 16, &mut rng).unwrap();
        let ratio = e1 / e2;
        assert!(
            ratio > 10f64.sqrt() / 2.0 && ratio < 2.0 * 10f64.sqrt(),
            "{ratio}"
        );
    }
}

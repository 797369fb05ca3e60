//! Dense complex matrices with explicit tensor-factor bookkeeping.
//!
//! Multi-indices are row-major: the first factor of a [`SubsystemShape`] is
//! the most significant digit, which matches the Kronecker product
//! convention `(X⊗Y)[(i·n+k),(j·n+l)] = X[i,j]·Y[k,l]`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Ordered local dimensions (with names) of the tensor factors of a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemShape {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        let labels = (0..dims.len()).map(|i| format!("S{i}")).collect();
        Self::with_labels(dims, labels)
    }

    pub fn with_labels(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) || labels.len() != dims.len() {
            return Err(Error::ShapeMismatch { side: 0, dims });
        }
        Ok(Self { dims, labels })
    }

    /// Two factors `(A, B)` of dimension `d`.
    pub fn pair(d: usize) -> Self {
        Self {
            dims: vec![d; 2],
            labels: vec!["A".into(), "B".into()],
        }
    }

    /// Four factors `(A, B, A′, B′)` of dimension `d`.
    pub fn four_party(d: usize) -> Self {
        Self {
            dims: vec![d; 4],
            labels: ["A", "B", "A'", "B'"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Side length of the matrices this shape describes.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// The shape after reordering factors so that output factor `k` is input
    /// factor `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        self.check_permutation(perm)?;
        Ok(Self {
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
        })
    }

    fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() != self.total() {
            return Err(Error::ShapeMismatch {
                side: m.nrows(),
                dims: self.dims.clone(),
            });
        }
        Ok(())
    }

    fn check_indices(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| i >= self.len()) {
            Some(&index) => Err(Error::SubsystemIndex {
                index,
                count: self.len(),
            }),
            None => Ok(()),
        }
    }

    fn check_permutation(&self, perm: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() {
            return Err(Error::BadPermutation(perm.to_vec()));
        }
        for &p in perm {
            if p >= self.len() || seen[p] {
                return Err(Error::BadPermutation(perm.to_vec()));
            }
            seen[p] = true;
        }
        Ok(())
    }

    fn digits(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
    }

    fn compose(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&digit, &d)| acc * d + digit)
    }
}

pub fn kron(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    x.kronecker(y)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = match iter.next() {
        Some(m) => (*m).clone(),
        None => return ComplexMatrix::identity(1, 1),
    };
    iter.fold(first, |acc, m| acc.kronecker(*m))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::new(v, 0.0)),
    ))
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
///
/// Equivalent to conjugating by the permutation unitary of the factors.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    shape: &SubsystemShape,
    perm: &[usize],
) -> Result<ComplexMatrix> {
    shape.check_matrix(m)?;
    let target = shape.permuted(perm)?;
    let n = shape.total();
    let mut src = vec![0; shape.len()];
    let mut dst = vec![0; shape.len()];
    // source index for every target index
    let map: Vec<usize> = (0..n)
        .map(|t| {
            target.digits(t, &mut dst);
            for (k, &p) in perm.iter().enumerate() {
                src[p] = dst[k];
            }
            shape.compose(&src)
        })
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| m[(map[r], map[c])]))
}

/// Traces out every factor not listed in `keep`; kept factors retain their
/// relative order.
pub fn partial_trace(
    m: &ComplexMatrix,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    shape.check_matrix(m)?;
    shape.check_indices(keep)?;
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let kept: Vec<usize> = (0..shape.len()).filter(|i| keep.contains(i)).collect();
    let traced: Vec<usize> = (0..shape.len()).filter(|i| !keep.contains(i)).collect();
    let kept_shape = SubsystemShape::new(kept.iter().map(|&i| shape.dims[i]).collect())?;
    let n_keep = kept_shape.total();
    let n_trace: usize = traced.iter().map(|&i| shape.dims[i]).product();
    let traced_shape = if traced.is_empty() {
        None
    } else {
        Some(SubsystemShape::new(
            traced.iter().map(|&i| shape.dims[i]).collect(),
        )?)
    };

    // full[k][t] = full index of (kept multi-index k, traced multi-index t)
    let mut full = vec![0usize; n_keep * n_trace];
    let mut digits = vec![0; shape.len()];
    let mut kd = vec![0; kept.len()];
    let mut td = vec![0; traced.len()];
    for k in 0..n_keep {
        kept_shape.digits(k, &mut kd);
        for t in 0..n_trace {
            if let Some(ts) = &traced_shape {
                ts.digits(t, &mut td);
            }
            for (slot, &i) in kept.iter().enumerate() {
                digits[i] = kd[slot];
            }
            for (slot, &i) in traced.iter().enumerate() {
                digits[i] = td[slot];
            }
            full[k * n_trace + t] = shape.compose(&digits);
        }
    }

    Ok(ComplexMatrix::from_fn(n_keep, n_keep, |r, c| {
        (0..n_trace)
            .map(|t| m[(full[r * n_trace + t], full[c * n_trace + t])])
            .sum()
    }))
}

/// Transposes the row/column indices of the listed factors.
pub fn partial_transpose(
    m: &ComplexMatrix,
    shape: &SubsystemShape,
    subsystems: &[usize],
) -> Result<ComplexMatrix> {
    shape.check_matrix(m)?;
    shape.check_indices(subsystems)?;
    let n = shape.total();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut rd = vec![0; shape.len()];
    let mut cd = vec![0; shape.len()];
    for r in 0..n {
        for c in 0..n {
            shape.digits(r, &mut rd);
            shape.digits(c, &mut cd);
            for &s in subsystems {
                std::mem::swap(&mut rd[s], &mut cd[s]);
            }
            out[(shape.compose(&rd), shape.compose(&cd))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// `(I ⊗ U ⊗ I) M (I ⊗ U ⊗ I)†` with `U` acting on factor `factor`.
pub fn conjugate_factor(
    m: &ComplexMatrix,
    shape: &SubsystemShape,
    factor: usize,
    u: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    shape.check_matrix(m)?;
    shape.check_indices(&[factor])?;
    let d = shape.dims[factor];
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::ShapeMismatch {
            side: u.nrows(),
            dims: vec![d],
        });
    }
    let n = shape.total();
    let post: usize = shape.dims[factor + 1..].iter().product();
    let pre = n / (d * post);

    let mut left = ComplexMatrix::zeros(n, n);
    for a in 0..pre {
        for b in 0..post {
            for i in 0..d {
                let row = (a * d + i) * post + b;
                for j in 0..d {
                    let uij = u[(i, j)];
                    let src = (a * d + j) * post + b;
                    for c in 0..n {
                        left[(row, c)] += uij * m[(src, c)];
                    }
                }
            }
        }
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for a in 0..pre {
        for b in 0..post {
            for i in 0..d {
                let col = (a * d + i) * post + b;
                for j in 0..d {
                    let uij = u[(i, j)].conj();
                    let src = (a * d + j) * post + b;
                    for r in 0..n {
                        out[(r, col)] += left[(r, src)] * uij;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `(I ⊗ U ⊗ I)|v⟩` with `U` acting on factor `factor`.
pub fn apply_factor(
    v: &ComplexVector,
    shape: &SubsystemShape,
    factor: usize,
    u: &ComplexMatrix,
) -> Result<ComplexVector> {
    shape.check_indices(&[factor])?;
    let d = shape.dims[factor];
    if v.len() != shape.total() || u.nrows() != d || u.ncols() != d {
        return Err(Error::ShapeMismatch {
            side: v.len(),
            dims: shape.dims.clone(),
        });
    }
    let post: usize = shape.dims[factor + 1..].iter().product();
    let pre = shape.total() / (d * post);
    let mut out = ComplexVector::zeros(v.len());
    for a in 0..pre {
        for b in 0..post {
            for i in 0..d {
                let row = (a * d + i) * post + b;
                out[row] = (0..d).map(|j| u[(i, j)] * v[(a * d + j) * post + b]).sum();
            }
        }
    }
    Ok(out)
}

/// Largest entry of `|M − M†|`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Largest entry-wise modulus of `X − Y`.
pub fn max_abs_diff(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius_distance(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    (x - y).norm()
}

/// `tr(X·Y)` without forming the product.
pub fn trace_product(x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    let n = x.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// Ascending eigenvalues of a Hermitian matrix (default tolerance).
pub fn spectral(m: &ComplexMatrix) -> Result<Vec<f64>> {
    spectral_with_tol(m, crate::DEFAULT_TOL)
}

pub fn spectral_with_tol(m: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let dev = hermitian_deviation(m);
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(spectral(m)?[0])
}

pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(m)? >= -tol)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed `d × d` unitary.
///
/// QR of a complex Gaussian matrix, with the phases of `R`'s diagonal moved
/// into `Q` so the factorization is unique.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let z = ginibre(d, d, rng);
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        let rkk = r[(k, k)];
        let norm = rkk.norm();
        if norm > 0.0 {
            col *= rkk / norm;
        }
    }
    q
}

/// Random density matrix `G G† / tr(G G†)` from a square Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

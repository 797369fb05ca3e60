//! The separability polytope `P ⊂ {λ ≥ 0, Σλ = 1}`: its five vertices, its
//! facets, membership, convex decomposition, and a brute-force facet oracle.

use itertools::Itertools;
use nalgebra::{DMatrix, Matrix4, Vector4};
use rand::Rng;
use serde::Serialize;

use crate::choi::LambdaVec;
use crate::error::{Error, Result};
use crate::BOUNDARY_TOL;

/// Where a facet comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "index", rename_all = "snake_case")]
pub enum FacetKind {
    /// One of the three witness facets `μ^(1)`, `μ^(2)`, `μ^(3)`.
    Witness(u8),
    /// `λ_i ≥ 0` (1-based `i`).
    Positivity(u8),
    /// Found by enumeration and not recognized as either of the above.
    Other,
}

/// A supporting inequality `μ·λ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FacetVec {
    pub mu: [f64; 4],
    pub kind: FacetKind,
}

impl FacetVec {
    pub fn margin(&self, lambda: &LambdaVec) -> f64 {
        lambda.dot(&self.mu)
    }

    /// Primitive integer representative of the ray through `mu`, if it has
    /// one with small denominators.
    pub fn integer_form(&self) -> Option<Vec<i64>> {
        integer_form(&self.mu)
    }

    pub fn name(&self) -> String {
        match self.kind {
            FacetKind::Witness(i) => format!("mu{i}"),
            FacetKind::Positivity(i) => format!("lambda{i}>=0"),
            FacetKind::Other => format!("{:?}", self.mu),
        }
    }
}

/// `μ^(1) = (1,−1,−1,1)`, `μ^(2) = (−d−1, d+1, −d+1, d−1)`,
/// `μ^(3) = (−d−1, −d+1, d+1, d−1)`.
pub fn witness_facet(i: usize, d: usize) -> Result<[f64; 4]> {
    let df = d as f64;
    match i {
        1 => Ok([1.0, -1.0, -1.0, 1.0]),
        2 => Ok([-df - 1.0, df + 1.0, -df + 1.0, df - 1.0]),
        3 => Ok([-df - 1.0, -df + 1.0, df + 1.0, df - 1.0]),
        _ => Err(Error::WitnessIndex(i)),
    }
}

/// The five extreme points of `P`.
pub fn vertices(d: usize) -> Result<[LambdaVec; 5]> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    let inv = 1.0 / (2.0 * d as f64);
    Ok([
        LambdaVec::new([0.0, 0.0, 0.0, 1.0])?,
        LambdaVec::new([0.0, 0.5, 0.0, 0.5])?,
        LambdaVec::new([0.0, 0.0, 0.5, 0.5])?,
        LambdaVec::new([0.25; 4])?,
        LambdaVec::new([0.5 - inv, 0.0, 0.0, 0.5 + inv])?,
    ])
}

/// Witness facets `μ^(1..3)` followed by the positivity constraints that are
/// facets of `P` according to [`derive_facets_bruteforce`].
pub fn facets(d: usize) -> Result<Vec<FacetVec>> {
    let mut out = (1..=3)
        .map(|i| {
            Ok(FacetVec {
                mu: witness_facet(i, d)?,
                kind: FacetKind::Witness(i as u8),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let derived = derive_facets_bruteforce(&vertices(d)?)?;
    let mut positivity: Vec<FacetVec> = derived
        .into_iter()
        .filter(|f| matches!(f.kind, FacetKind::Positivity(_)))
        .collect();
    positivity.sort_by_key(|f| match f.kind {
        FacetKind::Positivity(i) => i,
        _ => 0,
    });
    out.extend(positivity);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FacetMargin {
    pub facet: FacetVec,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Membership {
    pub member: bool,
    /// One entry per facet, in [`facets`] order.
    pub margins: Vec<FacetMargin>,
}

impl Membership {
    pub fn worst(&self) -> Option<&FacetMargin> {
        self.margins
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn margin_of(&self, kind: FacetKind) -> Option<f64> {
        self.margins
            .iter()
            .find(|m| m.facet.kind == kind)
            .map(|m| m.margin)
    }
}

pub fn is_member(lambda: &LambdaVec, d: usize) -> Result<Membership> {
    Ok(membership_against(lambda, &facets(d)?))
}

/// Membership against a precomputed facet list; avoids re-enumerating facets
/// in scans.
pub fn membership_against(lambda: &LambdaVec, facets: &[FacetVec]) -> Membership {
    let margins: Vec<FacetMargin> = facets
        .iter()
        .map(|f| FacetMargin {
            facet: *f,
            margin: f.margin(lambda),
        })
        .collect();
    Membership {
        member: margins.iter().all(|m| m.margin >= -BOUNDARY_TOL),
        margins,
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Decomposition {
    /// Convex weights over [`vertices`].
    Feasible { weights: [f64; 5], residual: f64 },
    /// `λ ∉ P`; the most violated facet.
    Infeasible { certificate: FacetVec, margin: f64 },
}

impl Decomposition {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Decomposition::Feasible { .. })
    }
}

/// Writes `λ` as a convex combination of the five vertices.
///
/// Enumerates the basic solutions of `Σ w_v λ^(v) = λ` (one per choice of
/// four vertices) and returns the first nonnegative one.
pub fn decompose(lambda: &LambdaVec, d: usize) -> Result<Decomposition> {
    let verts = vertices(d)?;
    let target = Vector4::from_column_slice(lambda.as_array());
    for basis in (0..5).combinations(4) {
        let m = Matrix4::from_columns(
            &basis
                .iter()
                .map(|&v| Vector4::from_column_slice(verts[v].as_array()))
                .collect::<Vec<_>>(),
        );
        let Some(sol) = m.lu().solve(&target) else {
            continue;
        };
        if sol.iter().any(|&w| w < -BOUNDARY_TOL) {
            continue;
        }
        let mut weights = [0.0; 5];
        for (slot, &v) in basis.iter().enumerate() {
            weights[v] = sol[slot].max(0.0);
        }
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= sum);
        let residual = (0..4)
            .map(|k| {
                let recon: f64 = weights.iter().zip(&verts).map(|(w, v)| w * v[k]).sum();
                (recon - lambda[k]).abs()
            })
            .fold(0.0, f64::max);
        if residual <= crate::DEFAULT_TOL {
            return Ok(Decomposition::Feasible { weights, residual });
        }
    }
    let membership = is_member(lambda, d)?;
    let worst = membership
        .worst()
        .expect("facet list is never empty")
        .clone();
    Ok(Decomposition::Infeasible {
        certificate: worst.facet,
        margin: worst.margin,
    })
}

const ORACLE_TOL: f64 = 1e-9;

/// Facets of the cone over a point set.
///
/// Every point lives in `R^n` and the points span it linearly (they sit on an
/// affine hyperplane away from the origin, e.g. `Σx = 1`). Each `(n−1)`-subset
/// of points determines a hyperplane through the origin; it is kept when all
/// points lie on one side. Returned normals point inward, are deduplicated up
/// to positive scale and canonicalized (primitive integers when possible,
/// otherwise unit max-entry).
pub fn enumerate_facets(points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = points.first().map(Vec::len).unwrap_or(0);
    if n < 2 || points.len() < n || points.iter().any(|p| p.len() != n) {
        return Err(Error::Degenerate(format!(
            "need at least {n} points of equal length {n}"
        )));
    }
    let mat = DMatrix::from_fn(points.len(), n, |r, c| points[r][c]);
    if mat.rank(ORACLE_TOL) < n {
        return Err(Error::Degenerate(
            "points do not span a full-dimensional cone".into(),
        ));
    }

    let mut found: Vec<Vec<f64>> = Vec::new();
    for subset in (0..points.len()).combinations(n - 1) {
        let Some(normal) =
            cofactor_normal(&subset.iter().map(|&i| &points[i][..]).collect::<Vec<_>>())
        else {
            continue;
        };
        let sides: Vec<f64> = points.iter().map(|p| dot(&normal, p)).collect();
        let oriented = if sides.iter().all(|&s| s >= -ORACLE_TOL) {
            normal
        } else if sides.iter().all(|&s| s <= ORACLE_TOL) {
            normal.iter().map(|x| -x).collect()
        } else {
            continue;
        };
        let canon = canonicalize(&oriented);
        if !found.iter().any(|f| same_ray(f, &canon)) {
            found.push(canon);
        }
    }
    Ok(found)
}

/// [`enumerate_facets`] on points of the `λ` simplex, labelling positivity
/// facets.
pub fn derive_facets_bruteforce(points: &[LambdaVec]) -> Result<Vec<FacetVec>> {
    if points.len() < 4 {
        return Err(Error::Degenerate(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    let raw: Vec<Vec<f64>> = points.iter().map(|p| p.as_array().to_vec()).collect();
    Ok(enumerate_facets(&raw)?
        .into_iter()
        .map(|v| {
            let mu = [v[0], v[1], v[2], v[3]];
            let kind = match positivity_index(&mu) {
                Some(i) => FacetKind::Positivity(i as u8 + 1),
                None => FacetKind::Other,
            };
            FacetVec { mu, kind }
        })
        .collect())
}

fn positivity_index(mu: &[f64; 4]) -> Option<usize> {
    let nonzero: Vec<usize> = (0..4).filter(|&i| mu[i].abs() > ORACLE_TOL).collect();
    match nonzero.as_slice() {
        [i] if mu[*i] > 0.0 => Some(*i),
        _ => None,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generalized cross product of `n−1` vectors in `R^n`.
fn cofactor_normal(rows: &[&[f64]]) -> Option<Vec<f64>> {
    let n = rows.len() + 1;
    let normal: Vec<f64> = (0..n)
        .map(|k| {
            let minor =
                DMatrix::from_fn(n - 1, n - 1, |r, c| rows[r][if c < k { c } else { c + 1 }]);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * minor.determinant()
        })
        .collect();
    let scale = normal.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let size = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(1.0);
    if scale <= ORACLE_TOL * size.powi(n as i32 - 1) {
        None
    } else {
        Some(normal.iter().map(|x| x / scale).collect())
    }
}

fn canonicalize(v: &[f64]) -> Vec<f64> {
    match integer_form(v) {
        Some(ints) => ints.into_iter().map(|x| x as f64).collect(),
        None => {
            let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            v.iter().map(|x| x / scale).collect()
        }
    }
}

fn same_ray(a: &[f64], b: &[f64]) -> bool {
    let sa = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let sb = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    a.iter()
        .zip(b)
        .all(|(x, y)| (x / sa - y / sb).abs() <= ORACLE_TOL)
}

/// The primitive integer vector on the ray through `v` (entries coprime),
/// if one exists with denominators up to 1000.
pub fn integer_form(v: &[f64]) -> Option<Vec<i64>> {
    let smallest = v
        .iter()
        .map(|x| x.abs())
        .filter(|&x| x > ORACLE_TOL)
        .fold(f64::INFINITY, f64::min);
    if !smallest.is_finite() {
        return None;
    }
    let unit: Vec<f64> = v.iter().map(|x| x / smallest).collect();
    for k in 1..=1000 {
        let scaled: Vec<f64> = unit.iter().map(|x| x * k as f64).collect();
        if scaled
            .iter()
            .all(|x| (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0))
        {
            let ints: Vec<i64> = scaled.iter().map(|x| x.round() as i64).collect();
            let g = ints.iter().fold(0_i64, |g, &x| gcd(g, x.abs()));
            return Some(ints.into_iter().map(|x| x / g).collect());
        }
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Uniform point of the probability simplex.
pub fn random_simplex_point<R: Rng + ?Sized>(rng: &mut R) -> LambdaVec {
    loop {
        let w: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
        if let Ok((l, _)) = LambdaVec::normalize(w) {
            return l;
        }
    }
}

/// Uniform point of `P` by rejection from the simplex; also returns the
/// number of simplex draws used.
pub fn random_polytope_point<R: Rng + ?Sized>(
    facets: &[FacetVec],
    rng: &mut R,
) -> (LambdaVec, usize) {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let l = random_simplex_point(rng);
        if membership_against(&l, facets).member {
            return (l, attempts);
        }
    }
}

/// All points `(i, j, k, steps−i−j−k)/steps` of the simplex.
pub fn simplex_grid(steps: usize) -> Vec<LambdaVec> {
    let s = steps as f64;
    let mut out = Vec::new();
    for i in 0..=steps {
        for j in 0..=steps - i {
            for k in 0..=steps - i - j {
                let l = steps - i - j - k;
                out.push(
                    LambdaVec::new([i as f64 / s, j as f64 / s, k as f64 / s, l as f64 / s])
                        .expect("grid point lies on the simplex"),
                );
            }
        }
    }
    out
}

//! Action of covariant maps on Werner states, and the statement that
//! separable ones never raise `ν` once `ν ≥ 1/2`.
//!
//! A map with weights `λ` sends `ω_ν` to (unnormalized)
//! `a(λ1 Â + λ2 Ŝ) + b(λ3 Â + λ4 Ŝ)` with `a = 2ν/(d(d−1))` and
//! `b = 2(1−ν)/(d(d+1))`. With `η = (1−ν)/ν`, `ν′ ≤ ν` is equivalent to
//! `g(η) = (d−1)(ηλ4 − η²λ3) + (d+1)(λ2 − ηλ1) ≥ 0`. `g` is concave in `η`,
//! `g(0) = (d+1)λ2 ≥ 0` and `g(1) = μ^(2)·λ`, so membership in the polytope
//! gives `g ≥ 0` on all of `η ∈ [0, 1]`.

use rand::Rng;
use serde::Serialize;

use crate::choi::LambdaVec;
use crate::error::{Error, Result};
use crate::polytope::{facets, membership_against, random_polytope_point, simplex_grid, FacetVec};
use crate::BOUNDARY_TOL;

/// Slack allowed on `ν′ ≤ ν` and on the equivalent inequality.
pub const MONOTONICITY_TOL: f64 = 1e-12;

fn check(nu: f64, d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::WernerParameter(nu));
    }
    Ok(())
}

/// Trace of the output on the `Â` block and the total output trace.
pub fn output_weights(lambda: &LambdaVec, nu: f64, d: usize) -> Result<(f64, f64)> {
    check(nu, d)?;
    let df = d as f64;
    let a = 2.0 * nu / (df * (df - 1.0));
    let b = 2.0 * (1.0 - nu) / (df * (df + 1.0));
    let numerator = a * lambda[0] + b * lambda[2];
    let denominator = a * (lambda[0] + lambda[1]) + b * (lambda[2] + lambda[3]);
    Ok((numerator, denominator))
}

/// Werner parameter of the normalized output on input `ω_ν`.
pub fn nu_prime(lambda: &LambdaVec, nu: f64, d: usize) -> Result<f64> {
    let (numerator, denominator) = output_weights(lambda, nu, d)?;
    if denominator <= 0.0 {
        return Err(Error::Annihilated(denominator));
    }
    Ok(numerator / denominator)
}

/// `(1 − ν)/ν`, undefined at `ν = 0`.
pub fn eta(nu: f64) -> Option<f64> {
    (nu > 0.0).then(|| (1.0 - nu) / nu)
}

/// `(d−1)(ηλ4 − η²λ3) + (d+1)(λ2 − ηλ1)`.
pub fn derived_inequality(lambda: &LambdaVec, eta: f64, d: usize) -> f64 {
    let df = d as f64;
    (df - 1.0) * (eta * lambda[3] - eta * eta * lambda[2])
        + (df + 1.0) * (lambda[1] - eta * lambda[0])
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityRecord {
    pub d: usize,
    pub lambda: LambdaVec,
    pub nu: f64,
    pub nu_prime: f64,
    pub success_weight: f64,
    pub eta: Option<f64>,
    pub member: bool,
    /// Facet margins in [`facets`] order.
    pub margins: Vec<f64>,
}

impl MonotonicityRecord {
    pub fn new(lambda: LambdaVec, nu: f64, d: usize) -> Result<Self> {
        Self::with_facets(lambda, nu, d, &facets(d)?)
    }

    fn with_facets(lambda: LambdaVec, nu: f64, d: usize, facets: &[FacetVec]) -> Result<Self> {
        let (numerator, denominator) = output_weights(&lambda, nu, d)?;
        if denominator <= 0.0 {
            return Err(Error::Annihilated(denominator));
        }
        let membership = membership_against(&lambda, facets);
        Ok(Self {
            d,
            lambda,
            nu,
            nu_prime: numerator / denominator,
            success_weight: denominator,
            eta: eta(nu),
            member: membership.member,
            margins: membership.margins.iter().map(|m| m.margin).collect(),
        })
    }

    pub fn increases(&self) -> bool {
        self.nu_prime > self.nu + MONOTONICITY_TOL
    }

    pub fn mu2_margin(&self) -> f64 {
        // witness facets come first in `facets` order
        self.margins[1]
    }
}

/// Aggregate of a monotonicity scan; [`MonotonicityReport::merge`] is
/// associative so partial scans can be combined in any grouping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub d: usize,
    /// Records checked (λ ∈ P, ν ∈ [1/2, 1]).
    pub checked: usize,
    /// Simplex points drawn (or grid points visited).
    pub simplex_draws: usize,
    /// Simplex points that were inside `P`.
    pub accepted: usize,
    /// Inputs the map annihilates; skipped.
    pub annihilated: usize,
    pub violations: usize,
    /// Largest `ν′ − ν` seen.
    pub worst_excess: f64,
    /// Smallest value of the equivalent inequality seen.
    pub worst_inequality: f64,
    pub inequality_failures: usize,
}

impl MonotonicityReport {
    pub fn empty(d: usize) -> Self {
        Self {
            d,
            checked: 0,
            simplex_draws: 0,
            accepted: 0,
            annihilated: 0,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
            worst_inequality: f64::INFINITY,
            inequality_failures: 0,
        }
    }

    pub fn merge(mut self, other: &Self) -> Self {
        self.checked += other.checked;
        self.simplex_draws += other.simplex_draws;
        self.accepted += other.accepted;
        self.annihilated += other.annihilated;
        self.violations += other.violations;
        self.worst_excess = self.worst_excess.max(other.worst_excess);
        self.worst_inequality = self.worst_inequality.min(other.worst_inequality);
        self.inequality_failures += other.inequality_failures;
        self
    }

    /// Fraction of simplex draws that landed in `P`.
    pub fn acceptance_rate(&self) -> f64 {
        if self.simplex_draws == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.simplex_draws as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.inequality_failures == 0
    }

    fn record(&mut self, lambda: &LambdaVec, nu: f64, d: usize) {
        match nu_prime(lambda, nu, d) {
            Ok(np) => {
                self.checked += 1;
                let excess = np - nu;
                self.worst_excess = self.worst_excess.max(excess);
                if excess > MONOTONICITY_TOL {
                    self.violations += 1;
                }
                let g = derived_inequality(lambda, eta(nu).expect("nu >= 1/2"), d);
                self.worst_inequality = self.worst_inequality.min(g);
                if g < -MONOTONICITY_TOL {
                    self.inequality_failures += 1;
                }
            }
            Err(_) => self.annihilated += 1,
        }
    }
}

/// Draws `λ` uniformly from `P` and `ν` uniformly from `[1/2, 1]`.
pub fn verify_monotonicity<R: Rng + ?Sized>(
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<MonotonicityReport> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let facets = facets(d)?;
    let mut report = MonotonicityReport::empty(d);
    for _ in 0..samples {
        let (lambda, attempts) = random_polytope_point(&facets, rng);
        report.simplex_draws += attempts;
        report.accepted += 1;
        let nu = rng.random_range(0.5..=1.0);
        report.record(&lambda, nu, d);
    }
    Ok(report)
}

/// Every simplex grid point inside `P` against `nu_steps + 1` evenly spaced
/// `ν ∈ [1/2, 1]`, endpoints included.
pub fn scan_monotonicity_grid(
    d: usize,
    lambda_steps: usize,
    nu_steps: usize,
) -> Result<MonotonicityReport> {
    let facets = facets(d)?;
    let mut report = MonotonicityReport::empty(d);
    for lambda in simplex_grid(lambda_steps) {
        report.simplex_draws += 1;
        if !membership_against(&lambda, &facets).member {
            continue;
        }
        report.accepted += 1;
        for k in 0..=nu_steps {
            let nu = 0.5 + 0.5 * k as f64 / nu_steps.max(1) as f64;
            report.record(&lambda, nu, d);
        }
    }
    Ok(report)
}

/// The map onto `Â⊗Â`: outside `P`, and it sends every `ω_ν` with `ν > 0`
/// to `Â`. Evaluated at `ν = 3/5`.
pub fn find_violation_outside(d: usize) -> Result<MonotonicityRecord> {
    MonotonicityRecord::new(LambdaVec::new([1.0, 0.0, 0.0, 0.0])?, 0.6, d)
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessityPoint {
    /// Position on the segment from the depolarizing vertex (`t = 0`) to
    /// `(1, 0, 0, 0)` (`t = 1`).
    pub t: f64,
    pub mu2_margin: f64,
    pub nu_prime: f64,
    pub increases: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessityScan {
    pub d: usize,
    pub nu: f64,
    pub points: Vec<NecessityPoint>,
    /// Smallest `t` at which `ν′ > ν`.
    pub onset: Option<f64>,
    /// Whether `ν′ > ν` held exactly where `μ^(2)·λ < 0`.
    pub matches_facet: bool,
}

/// Walks from the depolarizing vertex out of `P` towards `(1, 0, 0, 0)`.
pub fn necessity_scan(d: usize, nu: f64, steps: usize) -> Result<NecessityScan> {
    check(nu, d)?;
    let facets = facets(d)?;
    let start = crate::polytope::vertices(d)?[4];
    let mut points = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 / steps.max(1) as f64;
        let lambda = LambdaVec::new([(1.0 - t) * start[0] + t, 0.0, 0.0, (1.0 - t) * start[3]])?;
        let rec = MonotonicityRecord::with_facets(lambda, nu, d, &facets)?;
        points.push(NecessityPoint {
            t,
            mu2_margin: rec.mu2_margin(),
            nu_prime: rec.nu_prime,
            increases: rec.increases(),
        });
    }
    let onset = points.iter().find(|p| p.increases).map(|p| p.t);
    let matches_facet = points
        .iter()
        .all(|p| p.increases == (p.mu2_margin < -BOUNDARY_TOL));
    Ok(NecessityScan {
        d,
        nu,
        points,
        onset,
        matches_facet,
    })
}

//! The verification checks, one function per invariant and dimension.
//!
//! Every check takes its sample counts explicitly so the same code runs at
//! CLI scale and at acceptance scale.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use werner_maps::choi::{apply_via_choi, choi_state, is_trace_preserving};
use werner_maps::monotonicity::{
    find_violation_outside, necessity_scan, nu_prime, scan_monotonicity_grid, verify_monotonicity,
    MONOTONICITY_TOL,
};
use werner_maps::polytope::{
    derive_facets_bruteforce, facets, integer_form, membership_against, random_simplex_point,
    simplex_grid, vertices, witness_facet, FacetKind,
};
use werner_maps::ppt::{is_ppt, ppt_spectrum, ppt_spectrum_numeric};
use werner_maps::symmetric::{
    double_twirl, double_twirl_mc_pure, normalized_projectors, product_input_state,
    product_input_vector, twirl_exact, twirl_mc_rms_error, werner_state,
};
use werner_maps::tensor::{
    frobenius_distance, kron, max_abs_diff, random_density_matrix, trace_product,
};
use werner_maps::witness::{
    facet_operator, full_matrix_expectation, multi_start_refine, product_expectation,
    random_product_min, ProductVector, Witness,
};
use werner_maps::{CovariantMap, LambdaVec, WernerParam, BOUNDARY_TOL, DEFAULT_TOL};

use crate::report::{Bound, Check};

/// Lower bound accepted for witness expectations on product states.
pub const WITNESS_FLOOR: f64 = -1e-9;
/// Exact-path agreement tolerance.
pub const EXACT_TOL: f64 = 1e-12;
/// Allowed multiplicative deviation of the Monte-Carlo error ratio from `√10`.
pub const CONVERGENCE_FACTOR: f64 = 2.0;

/// Sample counts for one run of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
}

/// Independent generator for check `id` at dimension `d`.
pub fn rng_for(seed: u64, d: usize, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((d as u64) << 16) | id);
    rng
}

const CHECKS: usize = 14;

/// Runs every check for dimension `d`; the order of the result is fixed.
pub fn run_dimension(d: usize, cfg: SuiteConfig) -> Vec<Check> {
    let n = cfg.samples.max(1);
    (0..CHECKS)
        .into_par_iter()
        .map(|id| {
            let mut rng = rng_for(cfg.seed, d, id as u64);
            match id {
                0 => facet_recovery(d),
                1 => ppt_equivalence(d, 50, n, &mut rng),
                2 => ppt_spectrum_agreement(d, numeric_cases(d, n), &mut rng),
                3 => witness_positivity(d, n, 50, 200, rng.random()),
                4 => witness_identity_consistency(d, n.min(100), &mut rng),
                5 => witness_duality(d, n, n.min(20), &mut rng),
                6 => depolarization_exact(d),
                7 => depolarization_monte_carlo(d, if d <= 3 { n } else { n.min(2_000) }, &mut rng),
                8 => depolarization_fixed_point(d),
                9 => choi_round_trip(d, n.min(100), &mut rng),
                10 => monotonicity(d, n, 50, 20, &mut rng),
                11 => closed_form_agreement(
                    d,
                    if d <= 4 { n.min(1_000) } else { n.min(100) },
                    &mut rng,
                ),
                12 => necessity(d),
                _ => twirl_convergence(d, 16, &mut rng),
            }
        })
        .collect()
}

fn numeric_cases(d: usize, n: usize) -> usize {
    match d {
        2 | 3 => n.min(100),
        4 => n.min(20),
        _ => n.min(3),
    }
}

macro_rules! tri {
    ($name:expr, $d:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return Check::errored($name, $d, err),
        }
    };
}

/// Brute-force facet enumeration of the five vertices recovers the three
/// witness facets as primitive integer vectors, plus only positivity facets.
pub fn facet_recovery(d: usize) -> Check {
    const NAME: &str = "facet_recovery";
    let start = Instant::now();
    let verts = tri!(NAME, d, vertices(d));
    let derived = tri!(NAME, d, derive_facets_bruteforce(&verts));
    let elapsed = start.elapsed().as_secs_f64();
    let forms: Vec<Option<Vec<i64>>> = derived.iter().map(|f| f.integer_form()).collect();
    let mut expected = Vec::new();
    let mut missing = Vec::new();
    for i in 1..=3 {
        let form = integer_form(&tri!(NAME, d, witness_facet(i, d)));
        if form.is_none() || !forms.contains(&form) {
            missing.push(format!("mu{i}"));
        }
        expected.push(form);
    }
    let positivity = |f: &Option<Vec<i64>>| {
        f.as_ref().is_some_and(|v| {
            v.iter().filter(|&&x| x == 1).count() == 1 && v.iter().all(|&x| x == 0 || x == 1)
        })
    };
    let unknown = forms
        .iter()
        .filter(|f| !expected.contains(f) && !positivity(f))
        .count();
    let names: Vec<String> = forms
        .iter()
        .map(|f| {
            f.as_ref()
                .map(|v| format!("{v:?}"))
                .unwrap_or_else(|| "irrational".into())
        })
        .collect();
    let detail = format!(
        "{} facets {}; missing [{}]; {:.1} ms",
        derived.len(),
        names.join(" "),
        missing.join(" "),
        elapsed * 1e3
    );
    Check::new(
        NAME,
        d,
        "missing or unrecognized facets",
        (missing.len() + unknown) as f64,
        Bound::AtMost,
        0.0,
        1e-9,
    )
    .with_detail(detail)
}

/// Analytic PPT test and facet membership agree on a simplex grid and on
/// random simplex points.
pub fn ppt_equivalence<R: Rng + ?Sized>(
    d: usize,
    grid_steps: usize,
    random: usize,
    rng: &mut R,
) -> Check {
    const NAME: &str = "ppt_equals_polytope";
    let facet_list = tri!(NAME, d, facets(d));
    let mut points = simplex_grid(grid_steps);
    let grid = points.len();
    points.extend((0..random).map(|_| random_simplex_point(rng)));
    let mut disagreements = 0usize;
    let mut members = 0usize;
    for lambda in &points {
        let member = membership_against(lambda, &facet_list).member;
        members += member as usize;
        if tri!(NAME, d, is_ppt(lambda, d)) != member {
            disagreements += 1;
        }
    }
    Check::new(
        NAME,
        d,
        "disagreements",
        disagreements as f64,
        Bound::AtMost,
        0.0,
        BOUNDARY_TOL,
    )
    .with_detail(format!(
        "{} points ({grid} grid, {random} random), {members} in P",
        points.len()
    ))
}

/// Closed-form block spectrum of `ξ^Γ` against dense diagonalization.
pub fn ppt_spectrum_agreement<R: Rng + ?Sized>(d: usize, cases: usize, rng: &mut R) -> Check {
    const NAME: &str = "ppt_spectrum_numeric";
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let lambda = random_simplex_point(rng);
        let mut analytic = tri!(NAME, d, ppt_spectrum(&lambda, d)).expanded();
        analytic.sort_by(f64::total_cmp);
        let numeric = tri!(NAME, d, ppt_spectrum_numeric(&lambda, d));
        for (a, b) in analytic.iter().zip(&numeric) {
            worst = worst.max((a - b).abs());
        }
    }
    Check::new(
        NAME,
        d,
        "max |eigenvalue difference|",
        worst,
        Bound::AtMost,
        DEFAULT_TOL,
        DEFAULT_TOL,
    )
    .with_detail(format!("{cases} random lambda"))
}

/// Minimum of each rescaled witness over random product vectors and over
/// multi-start local refinement.
pub fn witness_positivity(
    d: usize,
    samples: usize,
    starts: usize,
    iterations: usize,
    seed: u64,
) -> Check {
    const NAME: &str = "witness_positivity";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for w in Witness::ALL {
        let sampled = tri!(NAME, d, random_product_min(w, d, samples, &mut rng)).value;
        let refined = multi_start_refine::<ChaCha8Rng>(w, d, starts, iterations, rng.random())
            .iter()
            .map(|r| r.value)
            .fold(f64::INFINITY, f64::min);
        worst = worst.min(sampled).min(refined);
        parts.push(format!("W{}: {sampled:.3e}/{refined:.3e}", w.index()));
    }
    Check::new(
        NAME,
        d,
        "min expectation",
        worst,
        Bound::AtLeast,
        WITNESS_FLOOR,
        -WITNESS_FLOOR,
    )
    .with_detail(format!(
        "{samples} samples + {starts}x{iterations} refinement; sampled/refined {}",
        parts.join(", ")
    ))
}

/// Trace-identity expectations against the regrouped full witness matrix.
pub fn witness_identity_consistency<R: Rng + ?Sized>(d: usize, cases: usize, rng: &mut R) -> Check {
    const NAME: &str = "witness_identity_consistency";
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let p = ProductVector::random(d, rng);
        for w in Witness::ALL {
            let full = tri!(NAME, d, full_matrix_expectation(w, &p));
            worst = worst.max((full - product_expectation(w, &p)).abs());
        }
    }
    Check::new(
        NAME,
        d,
        "max |identity - full|",
        worst,
        Bound::AtMost,
        DEFAULT_TOL,
        DEFAULT_TOL,
    )
    .with_detail(format!("{cases} random product vectors x 3 witnesses"))
}

/// For λ outside `P`, some `tr(ξ W_μ)` is negative and equals the facet
/// margin. `tr(ξ W_μ)` is linear in λ, so the four block traces are taken
/// from dense matrices once; `direct` cases also build `ξ` in full.
pub fn witness_duality<R: Rng + ?Sized>(
    d: usize,
    outside: usize,
    direct: usize,
    rng: &mut R,
) -> Check {
    const NAME: &str = "witness_duality";
    let facet_list = tri!(NAME, d, facets(d));
    let (s_hat, a_hat) = tri!(NAME, d, normalized_projectors(d));
    let blocks = [
        kron(&a_hat, &a_hat),
        kron(&a_hat, &s_hat),
        kron(&s_hat, &a_hat),
        kron(&s_hat, &s_hat),
    ];
    let mut ops = Vec::new();
    let mut table = Vec::new();
    for i in 1..=3 {
        let mu = tri!(NAME, d, witness_facet(i, d));
        let op = tri!(NAME, d, facet_operator(&mu, d));
        table.push(
            blocks
                .iter()
                .map(|b| trace_product(b, &op).re)
                .collect::<Vec<f64>>(),
        );
        ops.push(op);
    }

    let mut worst = 0.0f64;
    let mut uncertified = 0usize;
    let mut drawn = 0usize;
    let mut found = 0usize;
    while found < outside {
        drawn += 1;
        let lambda = random_simplex_point(rng);
        let membership = membership_against(&lambda, &facet_list);
        if membership.member {
            continue;
        }
        let values: Vec<f64> = if found < direct {
            let xi = choi_state(&CovariantMap::new(d, lambda).expect("valid"));
            ops.iter().map(|op| trace_product(&xi, op).re).collect()
        } else {
            table
                .iter()
                .map(|t| lambda.dot(&[t[0], t[1], t[2], t[3]]))
                .collect()
        };
        for (i, v) in values.iter().enumerate() {
            let margin = membership
                .margin_of(FacetKind::Witness(i as u8 + 1))
                .expect("witness facets are listed");
            worst = worst.max((v - margin).abs());
        }
        // outside P through a positivity facet is impossible on the simplex
        if values.iter().all(|&v| v >= -BOUNDARY_TOL) {
            uncertified += 1;
        }
        found += 1;
    }
    Check::new(NAME, d, "max |tr(xi W) - margin|", worst, Bound::AtMost, DEFAULT_TOL, DEFAULT_TOL)
        .and(uncertified == 0)
        .with_detail(format!(
            "{outside} points outside P ({drawn} drawn, {direct} with full xi); {uncertified} without a negative witness"
        ))
}

/// Exact double twirl of the product input is the depolarizing vertex, and
/// that map is trace preserving.
pub fn depolarization_exact(d: usize) -> Check {
    const NAME: &str = "depolarization_exact";
    let rho = tri!(NAME, d, product_input_state(d));
    let lambda = tri!(NAME, d, double_twirl(&rho, d));
    let target = tri!(NAME, d, vertices(d))[4];
    let worst = (0..4)
        .map(|k| (lambda[k] - target[k]).abs())
        .fold(0.0, f64::max);
    let tp = is_trace_preserving(&tri!(NAME, d, CovariantMap::new(d, target)));
    Check::new(
        NAME,
        d,
        "max |lambda - lambda5|",
        worst,
        Bound::AtMost,
        EXACT_TOL,
        EXACT_TOL,
    )
    .and(tp.preserving)
    .with_detail(format!(
        "lambda = {:?}; trace-preserving residual {:.1e}",
        lambda.as_array(),
        tp.residual
    ))
}

/// Monte-Carlo double twirl of the product input against the exact result,
/// in units of its standard error.
pub fn depolarization_monte_carlo<R: Rng + ?Sized>(d: usize, samples: usize, rng: &mut R) -> Check {
    const NAME: &str = "depolarization_monte_carlo";
    let v = tri!(NAME, d, product_input_vector(d));
    let est = tri!(NAME, d, double_twirl_mc_pure(&v, d, samples, rng));
    let exact = choi_state(&tri!(
        NAME,
        d,
        CovariantMap::new(d, tri!(NAME, d, vertices(d))[4])
    ));
    let err = frobenius_distance(&est.mean, &exact);
    let se = est.standard_error();
    Check::new(
        NAME,
        d,
        "error / standard error",
        err / se,
        Bound::AtMost,
        5.0,
        0.0,
    )
    .with_detail(format!(
        "N = {samples}; error {err:.3e}, standard error {se:.3e}"
    ))
}

/// The depolarizing map fixes Werner states.
pub fn depolarization_fixed_point(d: usize) -> Check {
    const NAME: &str = "depolarization_fixed_point";
    let map = tri!(NAME, d, CovariantMap::new(d, tri!(NAME, d, vertices(d))[4]));
    let xi = choi_state(&map);
    let mut worst = 0.0f64;
    for nu in [0.0, 0.3, 0.5, 1.0] {
        let omega = werner_state(&tri!(NAME, d, WernerParam::new(d, nu)));
        let out = tri!(NAME, d, apply_via_choi(&xi, &omega, d));
        worst = worst.max(max_abs_diff(&out.state, &omega));
    }
    Check::new(
        NAME,
        d,
        "max |E(omega) - omega|",
        worst,
        Bound::AtMost,
        EXACT_TOL,
        EXACT_TOL,
    )
    .with_detail("nu in {0, 0.3, 0.5, 1}")
}

/// `Δ(choi_state(λ)) = λ` for random λ.
pub fn choi_round_trip<R: Rng + ?Sized>(d: usize, cases: usize, rng: &mut R) -> Check {
    const NAME: &str = "choi_round_trip";
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let lambda = random_simplex_point(rng);
        let back = tri!(
            NAME,
            d,
            double_twirl(&choi_state(&tri!(NAME, d, CovariantMap::new(d, lambda))), d)
        );
        worst = (0..4).fold(worst, |w, k| w.max((back[k] - lambda[k]).abs()));
    }
    Check::new(
        NAME,
        d,
        "max |lambda' - lambda|",
        worst,
        Bound::AtMost,
        EXACT_TOL,
        EXACT_TOL,
    )
    .with_detail(format!("{cases} random lambda"))
}

/// No separable map raises `ν ≥ 1/2`: random draws from `P` plus a grid.
pub fn monotonicity<R: Rng + ?Sized>(
    d: usize,
    samples: usize,
    grid_steps: usize,
    nu_steps: usize,
    rng: &mut R,
) -> Check {
    const NAME: &str = "monotonicity";
    let random = tri!(NAME, d, verify_monotonicity(d, samples, rng));
    let grid = tri!(NAME, d, scan_monotonicity_grid(d, grid_steps, nu_steps));
    let total = random.clone().merge(&grid);
    Check::new(NAME, d, "max (nu' - nu)", total.worst_excess, Bound::AtMost, MONOTONICITY_TOL, MONOTONICITY_TOL)
        .and(total.passed())
        .with_detail(format!(
            "{} records ({} annihilated); {} violations; min derived inequality {:.3e}; acceptance rate {:.4}",
            total.checked,
            total.annihilated,
            total.violations + total.inequality_failures,
            total.worst_inequality,
            random.acceptance_rate()
        ))
}

/// Closed-form `ν′` against applying the Choi state and twirling.
pub fn closed_form_agreement<R: Rng + ?Sized>(d: usize, cases: usize, rng: &mut R) -> Check {
    const NAME: &str = "closed_form_vs_choi";
    let mut worst = 0.0f64;
    let mut annihilated = 0usize;
    for _ in 0..cases {
        let lambda: LambdaVec = random_simplex_point(rng);
        let nu: f64 = rng.random_range(0.0..=1.0);
        let xi = choi_state(&tri!(NAME, d, CovariantMap::new(d, lambda)));
        let omega = werner_state(&tri!(NAME, d, WernerParam::new(d, nu)));
        match (apply_via_choi(&xi, &omega, d), nu_prime(&lambda, nu, d)) {
            (Ok(out), Ok(np)) => {
                let via = tri!(NAME, d, twirl_exact(&out.state, d)).nu();
                worst = worst.max((via - np).abs());
            }
            (Err(_), Err(_)) => annihilated += 1,
            (a, b) => {
                return Check::errored(
                    NAME,
                    d,
                    format!(
                        "paths disagree on annihilation: {:?} vs {:?}",
                        a.err(),
                        b.err()
                    ),
                )
            }
        }
    }
    Check::new(
        NAME,
        d,
        "max |nu' closed - nu' choi|",
        worst,
        Bound::AtMost,
        EXACT_TOL,
        EXACT_TOL,
    )
    .with_detail(format!(
        "{cases} random (lambda, nu); {annihilated} annihilated"
    ))
}

/// Outside `P` the Werner parameter can increase, and along the segment from
/// the depolarizing vertex to `(1,0,0,0)` it does so exactly past `μ^(2)`.
pub fn necessity(d: usize) -> Check {
    const NAME: &str = "necessity_outside";
    let rec = tri!(NAME, d, find_violation_outside(d));
    let scan = tri!(NAME, d, necessity_scan(d, 0.75, 200));
    let worst = (rec.nu_prime - 1.0).abs();
    Check::new(
        NAME,
        d,
        "|nu' - 1| at lambda = (1,0,0,0)",
        worst,
        Bound::AtMost,
        EXACT_TOL,
        EXACT_TOL,
    )
    .and(!rec.member && rec.mu2_margin() < 0.0 && scan.matches_facet)
    .with_detail(format!(
        "nu = {}, nu' = {}, mu2 margin {}; segment onset t = {:?}, matches mu2 = {}",
        rec.nu,
        rec.nu_prime,
        rec.mu2_margin(),
        scan.onset,
        scan.matches_facet
    ))
}

/// RMS Frobenius error of the Monte-Carlo twirl at `N = 10², 10³, 10⁴`;
/// successive ratios should be `√10` up to [`CONVERGENCE_FACTOR`].
pub fn twirl_convergence<R: Rng + ?Sized>(d: usize, repetitions: usize, rng: &mut R) -> Check {
    const NAME: &str = "twirl_convergence";
    let rho = random_density_matrix(d * d, rng);
    let mut errors = Vec::new();
    for n in [100, 1_000, 10_000] {
        errors.push(tri!(
            NAME,
            d,
            twirl_mc_rms_error(&rho, d, n, repetitions, rng)
        ));
    }
    let target = 10f64.sqrt();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let worst = ratios
        .iter()
        .map(|r| (r / target).max(target / r))
        .fold(0.0, f64::max);
    Check::new(
        NAME,
        d,
        "max factor off sqrt(10)",
        worst,
        Bound::AtMost,
        CONVERGENCE_FACTOR,
        0.0,
    )
    .with_detail(format!(
        "rms errors {:.3e} {:.3e} {:.3e} over {repetitions} repetitions; ratios {:.3} {:.3}",
        errors[0], errors[1], errors[2], ratios[0], ratios[1]
    ))
}

use serde::Serialize;
use serde_json::{json, Value};

use werner_maps::choi::{
    apply_via_choi, choi_state, is_trace_preserving, trace_preservation_defect,
};
use werner_maps::monotonicity::{nu_prime, output_weights, MONOTONICITY_TOL};
use werner_maps::polytope::{decompose, is_member, FacetKind, FacetMargin};
use werner_maps::ppt::ppt_spectrum;
use werner_maps::symmetric::{twirl_exact, werner_state};
use werner_maps::{CovariantMap, Error, LambdaVec, WernerParam, BOUNDARY_TOL, DEFAULT_TOL};

use crate::report::{Bound, Check};
use crate::suite::EXACT_TOL;

/// Rejected command-line input; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Parsed `--lambda`, with the sum it had before normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaInput {
    pub lambda: LambdaVec,
    pub input_sum: f64,
}

impl LambdaInput {
    pub fn normalized(&self) -> bool {
        (self.input_sum - 1.0).abs() > DEFAULT_TOL
    }
}

/// Validates four nonnegative weights and scales them to sum to one.
pub fn parse_lambda(values: &[f64]) -> Result<LambdaInput, UsageError> {
    let weights: [f64; 4] = values
        .try_into()
        .map_err(|_| UsageError(format!("--lambda needs 4 values, got {}", values.len())))?;
    if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(UsageError(format!(
            "--lambda entries must be nonnegative, got {bad}"
        )));
    }
    match LambdaVec::normalize(weights) {
        Ok((lambda, input_sum)) => Ok(LambdaInput { lambda, input_sum }),
        Err(e) => Err(UsageError(format!("--lambda: {e}"))),
    }
}

#[derive(Serialize)]
struct MarginRow {
    facet: String,
    mu: [f64; 4],
    margin: f64,
    active: bool,
}

fn margin_rows(margins: &[FacetMargin]) -> Vec<MarginRow> {
    margins
        .iter()
        .map(|m| MarginRow {
            facet: m.facet.name(),
            mu: m.facet.mu,
            margin: m.margin,
            active: m.margin.abs() <= BOUNDARY_TOL,
        })
        .collect()
}

/// Membership, margins, PPT spectrum, trace preservation and either a
/// convex decomposition or the violated facet.
pub fn classify(input: &LambdaInput, d: usize) -> Result<Value, Error> {
    let lambda = input.lambda;
    let membership = is_member(&lambda, d)?;
    let spectrum = ppt_spectrum(&lambda, d)?;
    let map = CovariantMap::new(d, lambda)?;
    let tp = is_trace_preserving(&map);
    let decomposition = decompose(&lambda, d)?;
    let active: Vec<String> = membership
        .margins
        .iter()
        .filter(|m| m.margin.abs() <= BOUNDARY_TOL)
        .map(|m| m.facet.name())
        .collect();
    let min_eig = spectrum.min_eigenvalue();
    Ok(json!({
        "d": d,
        "lambda": lambda.as_array(),
        "input_sum": input.input_sum,
        "normalized": input.normalized(),
        "member": membership.member,
        "separable": membership.member,
        "active_facets": active,
        "margins": margin_rows(&membership.margins),
        "ppt": {
            "ppt": min_eig >= -BOUNDARY_TOL,
            "min_eigenvalue": min_eig,
            "blocks": spectrum.blocks,
        },
        "trace_preserving": {
            "preserving": tp.preserving,
            "residual": tp.residual,
            "defect": trace_preservation_defect(&lambda, d),
        },
        "decomposition": decomposition,
        "tolerances": {
            "membership": BOUNDARY_TOL,
            "ppt": BOUNDARY_TOL,
            "trace_preserving": DEFAULT_TOL,
        },
    }))
}

/// Outcome of `apply`: the JSON result plus checks that decide the exit code.
pub struct Applied {
    pub result: Value,
    pub checks: Vec<Check>,
}

/// Applies the map to `ω_ν` through the closed form and through its Choi
/// state.
pub fn apply(input: &LambdaInput, nu: f64, d: usize) -> Result<Applied, Error> {
    let lambda = input.lambda;
    let param = WernerParam::new(d, nu)?;
    let membership = is_member(&lambda, d)?;
    let (_, weight) = output_weights(&lambda, nu, d)?;
    let mu2 = membership
        .margin_of(FacetKind::Witness(2))
        .expect("witness facets are listed");
    let mut flags = Vec::new();
    if !membership.member {
        flags.push("non-separable map");
    }
    let base = json!({
        "d": d,
        "lambda": lambda.as_array(),
        "input_sum": input.input_sum,
        "normalized": input.normalized(),
        "nu": nu,
        "separable_map": membership.member,
        "mu2_margin": mu2,
        "flags": flags,
    });

    let closed = nu_prime(&lambda, nu, d);
    let choi = apply_via_choi(
        &choi_state(&CovariantMap::new(d, lambda)?),
        &werner_state(&param),
        d,
    );
    let mut result = base;
    let obj = result.as_object_mut().expect("object literal");
    let mut checks = Vec::new();
    match (closed, choi) {
        (Ok(np), Ok(out)) => {
            let via = twirl_exact(&out.state, d)?.nu();
            let gap = (np - via).abs();
            obj.insert("status".into(), json!("ok"));
            obj.insert("nu_prime".into(), json!(np));
            obj.insert("nu_prime_choi".into(), json!(via));
            obj.insert("success_weight".into(), json!(out.success_weight));
            obj.insert("success_weight_closed_form".into(), json!(weight));
            obj.insert("nu_prime_le_nu".into(), json!(np <= nu + MONOTONICITY_TOL));
            obj.insert("entangled_in".into(), json!(nu > 0.5));
            obj.insert("entangled_out".into(), json!(np > 0.5));
            checks.push(
                Check::new(
                    "closed_form_vs_choi",
                    d,
                    "|nu' closed - nu' choi|",
                    gap,
                    Bound::AtMost,
                    EXACT_TOL,
                    EXACT_TOL,
                )
                .with_detail(format!("nu' = {np}")),
            );
        }
        (Err(Error::Annihilated(_)), _) | (_, Err(Error::Annihilated(_))) => {
            obj.insert("status".into(), json!("annihilated"));
            obj.insert("nu_prime".into(), Value::Null);
            obj.insert("success_weight".into(), json!(weight));
            checks.push(
                Check::new(
                    "map_succeeds",
                    d,
                    "success weight",
                    weight,
                    Bound::AtLeast,
                    DEFAULT_TOL,
                    DEFAULT_TOL,
                )
                .with_detail("annihilating map: zero success weight on this input")
                .and(false),
            );
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    }
    obj.insert(
        "tolerances".into(),
        json!({ "monotonicity": MONOTONICITY_TOL, "agreement": EXACT_TOL, "membership": BOUNDARY_TOL }),
    );
    Ok(Applied { result, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_parsing() {
        assert!(parse_lambda(&[1.0, 0.0, 0.0]).is_err());
        assert!(parse_lambda(&[-0.1, 0.5, 0.3, 0.3]).is_err());
        assert!(parse_lambda(&[0.0; 4]).is_err());
        let p = parse_lambda(&[2.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(p.normalized());
        assert_eq!(p.lambda.as_array(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn classify_depolarizer_d2() {
        let v = classify(&parse_lambda(&[0.25, 0.0, 0.0, 0.75]).unwrap(), 2).unwrap();
        assert_eq!(v["member"], true);
        assert_eq!(v["trace_preserving"]["preserving"], true);
        let active: Vec<&str> = v["active_facets"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_str().unwrap())
            .collect();
        assert!(active.contains(&"mu2") && active.contains(&"mu3"));
    }

    #[test]
    fn classify_projector_d3() {
        let v = classify(&parse_lambda(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 3).unwrap();
        assert_eq!(v["member"], false);
        assert_eq!(v["ppt"]["ppt"], false);
        assert_eq!(v["decomposition"]["status"], "infeasible");
        assert_eq!(v["decomposition"]["certificate"]["kind"]["index"], 2);
    }

    #[test]
    fn classify_uniform_is_vertex_four() {
        let v = classify(&parse_lambda(&[0.25; 4]).unwrap(), 2).unwrap();
        let w = v["decomposition"]["weights"].as_array().unwrap();
        assert!((w[3].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_examples() {
        let depol = apply(&parse_lambda(&[0.25, 0.0, 0.0, 0.75]).unwrap(), 0.8, 2).unwrap();
        assert!((depol.result["nu_prime"].as_f64().unwrap() - 0.8).abs() < 1e-12);
        assert!(depol.checks.iter().all(|c| c.passed));

        let proj = apply(&parse_lambda(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.6, 2).unwrap();
        assert!((proj.result["nu_prime"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(proj.result["flags"][0], "non-separable map");
        assert_eq!(proj.result["nu_prime_le_nu"], false);

        let sym = apply(&parse_lambda(&[0.0, 0.0, 0.0, 1.0]).unwrap(), 0.9, 2).unwrap();
        assert!(sym.result["nu_prime"].as_f64().unwrap().abs() < 1e-12);
    }

    #[test]
    fn annihilation_is_reported() {
        // Â⊗Â applied to the symmetric state
        let out = apply(&parse_lambda(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0, 2).unwrap();
        assert_eq!(out.result["status"], "annihilated");
        assert!(!out.checks[0].passed);
    }
}

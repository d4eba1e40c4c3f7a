//! Named, parameterized reproductions of the worked examples.
//!
//! Every scenario sweeps `2ωt` over [0, 2π] (400 points unless `points` is
//! given) for the Heisenberg-coupled qubit pair and returns curves, a few
//! representative matrices and string verdicts.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteState;
use crate::error::{Error, Result};
use crate::io::square_matrix;
use crate::linalg::{c, eigenvalues_desc, max_abs_diff, pauli, trace, BlochVector, CMatrix, DensityMatrix, UnitaryOperator};
use crate::maps::{self, compatibility_check, SuperOp};
use crate::mmap::{
    build_mmap, contract_with_preparation, memory_matrix, mmap_tomography, projection_set,
    sum_rule_check, MMapProtocol, Verdict,
};
use crate::models::{
    axis_state, bloch_state, default_grid, heisenberg_unitary, standard_inputs,
    standard_projective_preps, standard_stochastic_preps, stochastic_preps_for,
    DEFAULT_GRID_POINTS,
};
use crate::prep::{control_error_rotation, pseudo_pure_input_set, PreparationMap};
use crate::random;
use crate::tomo::{
    dual_set_of_states, reconstruct_linear_map, reconstruct_with_duals, simulate_prepared,
    simulate_process, Protocol, TomographyRecord,
};

pub const CATALOG: [&str; 9] = [
    "fig2_1",
    "fig5_1",
    "fig5_2",
    "fig5_3",
    "control_error",
    "pseudo_pure",
    "swap_nonlinearity",
    "memory_extraction",
    "mmap_tomography_roundtrip",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// 2ωt.
    pub x: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixValue(#[serde(with = "square_matrix")] pub CMatrix);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    /// Resolved parameters, defaults included.
    pub params: BTreeMap<String, f64>,
    /// Names of the entries of each curve point's `values`.
    pub columns: Vec<String>,
    pub curves: Vec<CurvePoint>,
    pub matrices: BTreeMap<String, MatrixValue>,
    pub verdicts: BTreeMap<String, String>,
}

impl ScenarioResult {
    fn new(name: &str, params: BTreeMap<String, f64>, columns: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            params,
            columns,
            curves: Vec::new(),
            matrices: BTreeMap::new(),
            verdicts: BTreeMap::new(),
        }
    }

    /// Minimum over every curve value.
    pub fn min_value(&self) -> f64 {
        self.curves
            .iter()
            .flat_map(|p| p.values.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    fn matrix(&mut self, key: &str, m: CMatrix) {
        self.matrices.insert(key.to_string(), MatrixValue(m));
    }

    fn verdict(&mut self, key: &str, v: impl ToString) {
        self.verdicts.insert(key.to_string(), v.to_string());
    }
}

fn lambda_columns(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("lambda_{j}")).collect()
}

/// Merge overrides into defaults, rejecting unknown keys and non-finite values.
fn resolve(
    name: &str,
    defaults: &[(&str, f64)],
    overrides: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, f64> = defaults
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .chain(std::iter::once(("points".to_string(), DEFAULT_GRID_POINTS as f64)))
        .collect();
    for (k, v) in overrides {
        if !out.contains_key(k) {
            let allowed: Vec<&String> = out.keys().collect();
            return Err(Error::InvalidParameter(format!(
                "scenario `{name}` has no parameter `{k}` (allowed: {allowed:?})"
            )));
        }
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("parameter `{k}` must be finite")));
        }
        out.insert(k.clone(), *v);
    }
    let points = out["points"];
    if points < 2.0 || points.fract() != 0.0 || points > 1e6 {
        return Err(Error::InvalidParameter(format!(
            "`points` must be an integer >= 2, got {points}"
        )));
    }
    Ok(out)
}

fn grid(params: &BTreeMap<String, f64>) -> Vec<f64> {
    default_grid(params["points"] as usize)
}

fn a_vector(params: &BTreeMap<String, f64>) -> [f64; 3] {
    [params["a1"], params["a2"], params["a3"]]
}

/// Correlated family with compatibility enforced for the system state.
fn family(params: &BTreeMap<String, f64>) -> Result<BipartiteState> {
    let a = a_vector(params);
    let c23 = params["c23"];
    let rho = BipartiteState::correlated_family(a, c23)?;
    let bloch = BlochVector::try_from(a)?;
    if !compatibility_check(&rho, &bloch) {
        return Err(Error::Incompatible(f64::NAN));
    }
    Ok(rho)
}

pub fn run_scenario(name: &str, params: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    match name {
        "fig2_1" => fig2_1(params),
        "fig5_1" => fig5_1(params),
        "fig5_2" => fig5_2(params),
        "fig5_3" => fig5_3(params),
        "control_error" => control_error(params),
        "pseudo_pure" => pseudo_pure(params),
        "swap_nonlinearity" => swap_nonlinearity(params),
        "memory_extraction" => memory_extraction(params),
        "mmap_tomography_roundtrip" => mmap_roundtrip(params),
        _ => Err(Error::UnknownScenario {
            name: name.to_string(),
            catalog: CATALOG.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// Eigenvalues within solver roundoff of zero are reported as exactly zero,
/// so an analytic zero never prints as a negative number.
const EIGEN_ZERO: f64 = 1e-13;

fn snap_zero(v: f64) -> f64 {
    if v.abs() < EIGEN_ZERO {
        0.0
    } else {
        v
    }
}

const FAMILY_DEFAULTS: [(&str, f64); 4] = [("c23", 0.5), ("a1", 0.0), ("a2", 0.0), ("a3", 0.0)];

fn eigen_scenario(
    name: &str,
    params: BTreeMap<String, f64>,
    build: impl Fn(f64) -> Result<SuperOp>,
) -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new(name, params.clone(), lambda_columns(4));
    let mut negative = 0usize;
    for x in grid(&params) {
        let map = build(x)?;
        let ev: Vec<f64> = map.eigenvalues().into_iter().map(snap_zero).collect();
        if ev.iter().any(|&l| l < -1e-10) {
            negative += 1;
        }
        res.curves.push(CurvePoint { x, values: ev });
    }
    res.matrix("map_at_pi_4", build(FRAC_PI_4)?.b_matrix());
    res.matrix("map_at_pi_2", build(FRAC_PI_2)?.b_matrix());
    res.verdict("negative_points", negative);
    res.verdict(
        "completely_positive_everywhere",
        negative == 0,
    );
    Ok(res)
}

/// Dynamical map of the correlated family (linear extension of the
/// embedding).
pub fn correlated_dynamical_map(two_omega_t: f64, rho_se: &BipartiteState) -> Result<SuperOp> {
    maps::dynamical_map(&heisenberg_unitary(two_omega_t), rho_se)
}

fn fig2_1(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let params = resolve("fig2_1", &FAMILY_DEFAULTS, overrides)?;
    let rho = family(&params)?;
    eigen_scenario("fig2_1", params, |x| correlated_dynamical_map(x, &rho))
}

/// Pin to |0⟩ and rotate onto P(1,−), P(1,+), P(2,+), P(3,+).
pub fn stochastic_record(two_omega_t: f64, rho_se: &BipartiteState) -> Result<TomographyRecord> {
    simulate_process(&heisenberg_unitary(two_omega_t), rho_se, &standard_stochastic_preps())
}

fn fig5_1(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let params = resolve("fig5_1", &FAMILY_DEFAULTS, overrides)?;
    let rho = family(&params)?;
    eigen_scenario("fig5_1", params, |x| reconstruct_linear_map(&stochastic_record(x, &rho)?))
}

/// Inputs ½𝕀, P(1,+), P(2,+), P(3,+), where ½𝕀 comes from a different pin
/// that leaves the environment in ½(𝕀+σ3) and the others leave it in ½𝕀.
pub fn multiple_stochastic_preps() -> Vec<PreparationMap> {
    let mixed = DensityMatrix::maximally_mixed(2);
    let up = axis_state(3, true);
    let mut preps = vec![PreparationMap::pin_with_environment(mixed, up)];
    let inputs = standard_inputs();
    let half = DensityMatrix::maximally_mixed(2);
    for p in &inputs[1..] {
        preps.push(PreparationMap::pin_with_environment(p.clone(), half.clone()));
    }
    preps
}

pub fn multiple_stochastic_record(two_omega_t: f64) -> Result<TomographyRecord> {
    let rho = BipartiteState::product(&DensityMatrix::maximally_mixed(2), &DensityMatrix::maximally_mixed(2));
    simulate_process(&heisenberg_unitary(two_omega_t), &rho, &multiple_stochastic_preps())
}

/// Q^(−1) = 2Q^(𝕀) − Q^(1,+), the output the linear map assigns to P(1,−).
pub fn swap_q_minus(record: &TomographyRecord) -> Result<CMatrix> {
    let out = record.outputs()?;
    Ok(out[0] * c(2.0, 0.0) - out[1])
}

fn fig5_2(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let params = resolve("fig5_2", &[], overrides)?;
    eigen_scenario("fig5_2", params, |x| reconstruct_linear_map(&multiple_stochastic_record(x)?))
}

pub fn projective_record(two_omega_t: f64, rho_se: &BipartiteState) -> Result<TomographyRecord> {
    simulate_process(&heisenberg_unitary(two_omega_t), rho_se, &standard_projective_preps())
}

fn fig5_3(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let params = resolve("fig5_3", &FAMILY_DEFAULTS, overrides)?;
    let rho = family(&params)?;
    eigen_scenario("fig5_3", params, |x| reconstruct_linear_map(&projective_record(x, &rho)?))
}

/// Stochastic preparations whose P(1,−) rotation is off by ε, with outputs
/// interpreted against the nominal inputs.
pub fn control_error_map(two_omega_t: f64, epsilon: f64, rho_se: &BipartiteState) -> Result<SuperOp> {
    let zero = DensityMatrix::basis_state(2, 0);
    let mut preps = vec![PreparationMap::stochastic(zero, control_error_rotation(epsilon)?)?];
    preps.extend(stochastic_preps_for(&standard_inputs()[1..]));
    let record = simulate_process(&heisenberg_unitary(two_omega_t), rho_se, &preps)?;
    let duals = dual_set_of_states(&standard_inputs())?;
    reconstruct_with_duals(&record.outputs()?, &duals.duals)
}

fn control_error(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let mut defaults = FAMILY_DEFAULTS.to_vec();
    defaults.push(("eps", 0.1));
    let params = resolve("control_error", &defaults, overrides)?;
    let rho = family(&params)?;
    let eps = params["eps"];
    let mut res = eigen_scenario("control_error", params.clone(), |x| control_error_map(x, eps, &rho))?;
    let quarter = res
        .curves
        .iter()
        .filter(|p| p.x > 0.0 && p.x < FRAC_PI_2)
        .flat_map(|p| p.values.iter().copied())
        .fold(f64::INFINITY, f64::min);
    res.verdict("min_eigenvalue_first_quadrant", format!("{quarter:.12e}"));
    Ok(res)
}

/// Radius-p inputs reconstructed with their own duals and with the pure-state
/// duals. Returns (correct-dual map, pure-dual map, reference map).
pub fn pseudo_pure_maps(
    two_omega_t: f64,
    p: f64,
    rho_se: &BipartiteState,
    correlated: bool,
) -> Result<(SuperOp, SuperOp, SuperOp)> {
    let u = heisenberg_unitary(two_omega_t);
    let prepared = pseudo_pure_input_set(p, rho_se, correlated)?;
    let labels: Vec<String> = ["P(1,-)", "P(1,+)", "P(2,+)", "P(3,+)"]
        .iter()
        .map(|l| format!("pseudo-pure {l} p={p}"))
        .collect();
    let record = simulate_prepared(&u, &prepared, &labels, Protocol::PseudoPure)?;
    let correct = reconstruct_linear_map(&record)?;
    let pure_duals = dual_set_of_states(&standard_inputs())?;
    let wrong = reconstruct_with_duals(&record.outputs()?, &pure_duals.duals)?;
    let reference = if correlated {
        maps::dynamical_map(&u, rho_se)?
    } else {
        maps::map_from_contraction(&u, &rho_se.reduced_environment())?
    };
    Ok((correct, wrong, reference))
}

fn pseudo_pure(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let params = resolve(
        "pseudo_pure",
        &[("p", 0.8), ("c23", 0.1), ("correlated", 0.0), ("a1", 0.0), ("a2", 0.0), ("a3", 0.0)],
        overrides,
    )?;
    let rho = family(&params)?;
    let p = params["p"];
    let correlated = params["correlated"] != 0.0;
    let mut res = ScenarioResult::new(
        "pseudo_pure",
        params.clone(),
        vec!["error_matched_duals".into(), "error_pure_duals".into()],
    );
    let (mut worst_ok, mut worst_bad) = (0.0f64, 0.0f64);
    for x in grid(&params) {
        let (good, bad, reference) = pseudo_pure_maps(x, p, &rho, correlated)?;
        let e1 = max_abs_diff(&good.b_matrix(), &reference.b_matrix());
        let e2 = max_abs_diff(&bad.b_matrix(), &reference.b_matrix());
        worst_ok = worst_ok.max(e1);
        worst_bad = worst_bad.max(e2);
        res.curves.push(CurvePoint { x, values: vec![e1, e2] });
    }
    let (good, bad, _) = pseudo_pure_maps(FRAC_PI_4, p, &rho, correlated)?;
    res.matrix("matched_duals_map_at_pi_4", good.b_matrix());
    res.matrix("pure_duals_map_at_pi_4", bad.b_matrix());
    res.verdict("recovered", worst_ok <= 1e-10);
    res.verdict("max_error_matched_duals", format!("{worst_ok:.3e}"));
    res.verdict("max_error_pure_duals", format!("{worst_bad:.6e}"));
    Ok(res)
}

/// Twelve-projection record of pin preparations: the (j,−) states come from a
/// pin that leaves the environment in ½(𝕀+σ3), the (j,+) states from one
/// that leaves it in ½𝕀.
pub fn swap_twelve_record(two_omega_t: f64) -> Result<TomographyRecord> {
    let rho = BipartiteState::product(&DensityMatrix::maximally_mixed(2), &DensityMatrix::maximally_mixed(2));
    let preps: Vec<PreparationMap> = projection_set(MMapProtocol::Twelve)
        .into_iter()
        .map(|(label, a)| {
            let env = if label.ends_with("-)") {
                axis_state(3, true)
            } else {
                DensityMatrix::maximally_mixed(2)
            };
            PreparationMap::pin_with_environment(bloch_state(a), env)
        })
        .collect();
    simulate_process(&heisenberg_unitary(two_omega_t), &rho, &preps)
}

/// Twelve-projection record with one preparation map kind for all rows.
pub fn twelve_record(
    two_omega_t: f64,
    rho_se: &BipartiteState,
    projective: bool,
) -> Result<TomographyRecord> {
    let targets: Vec<DensityMatrix> = projection_set(MMapProtocol::Twelve)
        .into_iter()
        .map(|(_, a)| bloch_state(a))
        .collect();
    let preps = if projective {
        crate::models::projective_preps_for(&targets)
    } else {
        stochastic_preps_for(&targets)
    };
    simulate_process(&heisenberg_unitary(two_omega_t), rho_se, &preps)
}

fn swap_nonlinearity(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let params = resolve("swap_nonlinearity", &[], overrides)?;
    let mut res = ScenarioResult::new(
        "swap_nonlinearity",
        params.clone(),
        vec![
            "lambda_1".into(),
            "lambda_2".into(),
            "max_linear_rule_residual".into(),
            "max_mmap_rule_residual".into(),
        ],
    );
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for x in grid(&params) {
        let q = swap_q_minus(&multiple_stochastic_record(x)?)?;
        let ev = eigenvalues_desc(&q);
        let report = sum_rule_check(&swap_twelve_record(x)?)?;
        let lin = report.linear_rules.iter().map(|r| r.residual).fold(0.0, f64::max);
        let mm = report.mmap_rules.iter().map(|r| r.residual).fold(0.0, f64::max);
        *counts.entry(verdict_name(report.verdict)).or_default() += 1;
        res.curves.push(CurvePoint {
            x,
            values: vec![ev[0], ev[1], lin, mm],
        });
    }
    let q = swap_q_minus(&multiple_stochastic_record(FRAC_PI_2)?)?;
    res.matrix("q_minus_at_pi_2", q);
    let v = sum_rule_check(&swap_twelve_record(FRAC_PI_2)?)?.verdict;
    res.verdict("verdict_at_pi_2", verdict_name(v));
    for (k, n) in counts {
        res.verdict(&format!("{k}_points"), n);
    }
    Ok(res)
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Linear => "Linear",
        Verdict::MMap => "MMap",
        Verdict::Neither => "Neither",
    }
}

fn memory_extraction(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let params = resolve("memory_extraction", &FAMILY_DEFAULTS, overrides)?;
    let rho = family(&params)?;
    let mut res = ScenarioResult::new(
        "memory_extraction",
        params.clone(),
        vec![
            "chi_sigma1".into(),
            "chi_sigma2".into(),
            "chi_sigma3".into(),
            "memory_norm".into(),
        ],
    );
    let mut worst_cross: f64 = 0.0;
    for x in grid(&params) {
        let u = heisenberg_unitary(x);
        let report = memory_matrix(&build_mmap(&u, &rho)?);
        worst_cross = worst_cross.max(max_abs_diff(
            &report.chi_s_t,
            &crate::mmap::evolved_correlation(&u, &rho)?,
        ));
        let coeff = |j: usize| trace(&(&report.chi_s_t * pauli(j))).re / 2.0;
        res.curves.push(CurvePoint {
            x,
            values: vec![coeff(1), coeff(2), coeff(3), report.norm],
        });
    }
    let report = memory_matrix(&build_mmap(&heisenberg_unitary(FRAC_PI_4), &rho)?);
    res.matrix("chi_s_at_pi_4", report.chi_s_t);
    res.verdict("max_cross_check_deviation", format!("{worst_cross:.3e}"));
    Ok(res)
}

fn mmap_roundtrip(overrides: &BTreeMap<String, f64>) -> Result<ScenarioResult> {
    let mut defaults = FAMILY_DEFAULTS.to_vec();
    defaults.push(("probes", 50.0));
    defaults.push(("seed", 7.0));
    let params = resolve("mmap_tomography_roundtrip", &defaults, overrides)?;
    let rho = family(&params)?;
    let probes = params["probes"].max(0.0) as usize;
    let mut rng = random::seeded(params["seed"].max(0.0) as u64);
    let probe_axes: Vec<[f64; 3]> = (0..probes).map(|_| random::unit_vector3(&mut rng)).collect();

    let mut res = ScenarioResult::new(
        "mmap_tomography_roundtrip",
        params.clone(),
        vec!["nine_max_deviation".into(), "twelve_max_deviation".into(), "twelve_fit_residual".into()],
    );
    for x in grid(&params) {
        let u = heisenberg_unitary(x);
        let m = build_mmap(&u, &rho)?;
        let oracle = simulation_oracle(&u, &rho);
        let nine = mmap_tomography(&oracle, MMapProtocol::Nine)?;
        let twelve = mmap_tomography(&oracle, MMapProtocol::Twelve)?;
        let (mut e9, mut e12) = (0.0f64, 0.0f64);
        for a in &probe_axes {
            let prep = PreparationMap::projective(bloch_state(*a))?;
            let direct = match contract_with_preparation(&m, &prep) {
                Ok((q, r)) => q.into_matrix() * c(r, 0.0),
                Err(Error::ZeroProbability { .. }) => CMatrix::zeros(2, 2),
                Err(e) => return Err(e),
            };
            e9 = e9.max(max_abs_diff(&nine.predict(*a)?, &direct));
            e12 = e12.max(max_abs_diff(&twelve.predict(*a)?, &direct));
        }
        res.curves.push(CurvePoint {
            x,
            values: vec![e9, e12, twelve.residual],
        });
    }
    let u = heisenberg_unitary(FRAC_PI_4);
    let proj = sum_rule_check(&twelve_record(FRAC_PI_4, &rho, true)?)?;
    let stoch = sum_rule_check(&twelve_record(FRAC_PI_4, &rho, false)?)?;
    res.verdict("projective_verdict_at_pi_4", verdict_name(proj.verdict));
    res.verdict("stochastic_verdict_at_pi_4", verdict_name(stoch.verdict));
    let nine = mmap_tomography(simulation_oracle(&u, &rho), MMapProtocol::Nine)?;
    res.matrix("f23_at_pi_4", nine.f23);
    Ok(res)
}

/// Oracle that simulates a projective preparation on `rho_se` followed by U.
pub fn simulation_oracle<'a>(
    u: &'a UnitaryOperator,
    rho_se: &'a BipartiteState,
) -> impl Fn(&DensityMatrix) -> Result<(f64, CMatrix)> + 'a {
    move |p: &DensityMatrix| {
        let prep = PreparationMap::projective(p.clone())?;
        let record = simulate_process(u, rho_se, std::slice::from_ref(&prep))?;
        let row = &record.rows()[0];
        Ok((row.probability, row.output.clone().expect("simulated rows carry outputs")))
    }
}

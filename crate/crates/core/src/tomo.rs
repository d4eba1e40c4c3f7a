//! State and process tomography.
//!
//! Process reconstruction uses dual matrices: with inputs P_m and Gram matrix
//! `G_mn = Tr[P_m† P_n]`, the duals `P̃_m = Σ_n (G⁻¹)_nm P_n` satisfy
//! `Tr[P̃_m† P_n] = δ_mn`, and
//! `Λ[flat(r,r'), flat(s,s')] = Σ_m Q_m[r,s]·conj(P̃_m[r',s'])`
//! interpolates every recorded pair, `Λ(P_m) = Q_m`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteState;
use crate::error::{Error, Result};
use crate::io::{option_square_matrix, square_matrix};
use crate::linalg::{
    self, c, hermitian_eig, hs_inner, identity, kron, max_abs_diff, partial_trace_matrix, trace,
    validate_unit_trace_hermitian, CMatrix, DensityMatrix, Subsystem, UnitaryOperator,
};
use crate::maps::{evolve_and_reduce, numerical_rank, vec_columns, Form, SuperOp};
use crate::prep::{apply_preparation, PreparationKind, PreparationMap, PreparedState};
use crate::tolerance::{self, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Stochastic,
    Projective,
    AncillaAssisted,
    PseudoPure,
    /// Data taken elsewhere and ingested.
    External,
}

/// One preparation with its probability, input estimate and output estimate.
///
/// Inputs and outputs are Hermitian unit-trace matrices; they are estimates
/// and need not be positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomographyRow {
    pub prep: PreparationMap,
    #[serde(rename = "r")]
    pub probability: f64,
    #[serde(with = "square_matrix")]
    pub input: CMatrix,
    #[serde(default, with = "option_square_matrix", skip_serializing_if = "Option::is_none")]
    pub output: Option<CMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RecordJson", into = "RecordJson")]
pub struct TomographyRecord {
    pub protocol: Protocol,
    rows: Vec<TomographyRow>,
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    protocol: Protocol,
    rows: Vec<TomographyRow>,
}

impl TryFrom<RecordJson> for TomographyRecord {
    type Error = Error;
    fn try_from(j: RecordJson) -> Result<Self> {
        TomographyRecord::new(j.protocol, j.rows)
    }
}

impl From<TomographyRecord> for RecordJson {
    fn from(r: TomographyRecord) -> Self {
        RecordJson {
            protocol: r.protocol,
            rows: r.rows,
        }
    }
}

impl TomographyRecord {
    pub fn new(protocol: Protocol, rows: Vec<TomographyRow>) -> Result<Self> {
        Self::new_with(protocol, rows, &tolerance::current())
    }

    pub fn new_with(protocol: Protocol, rows: Vec<TomographyRow>, tol: &ToleranceConfig) -> Result<Self> {
        let d = rows.first().map(|r| r.input.nrows());
        for (k, row) in rows.iter().enumerate() {
            let dk = validate_unit_trace_hermitian(&row.input, tol)
                .map_err(|e| Error::Malformed(format!("row {k} input: {e}")))?;
            if Some(dk) != d {
                return Err(Error::Malformed(format!("row {k} has dimension {dk}")));
            }
            if let Some(out) = &row.output {
                let dk = validate_unit_trace_hermitian(out, tol)
                    .map_err(|e| Error::Malformed(format!("row {k} output: {e}")))?;
                if Some(dk) != d {
                    return Err(Error::Malformed(format!("row {k} output has dimension {dk}")));
                }
            }
            if !(row.probability.is_finite() && row.probability >= 0.0) {
                return Err(Error::Malformed(format!(
                    "row {k} probability {} is not a probability",
                    row.probability
                )));
            }
        }
        Ok(Self { protocol, rows })
    }

    pub fn rows(&self) -> &[TomographyRow] {
        &self.rows
    }

    pub fn dim(&self) -> Option<usize> {
        self.rows.first().map(|r| r.input.nrows())
    }

    pub fn inputs(&self) -> Vec<&CMatrix> {
        self.rows.iter().map(|r| &r.input).collect()
    }

    pub fn outputs(&self) -> Result<Vec<&CMatrix>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(k, r)| r.output.as_ref().ok_or(Error::MissingOutput { row: k }))
            .collect()
    }
}

/// State estimate; positivity is reported, not enforced.
#[derive(Debug, Clone)]
pub struct StateEstimate {
    pub matrix: CMatrix,
    /// Expectation values Tr[ρB_j] over [`linalg::pauli_basis`].
    pub coefficients: Vec<f64>,
    pub is_psd: bool,
}

/// ρ = 𝕀/d + ½ Σ_j a_j B_j with a_j = Tr[ρB_j] over the Gell-Mann basis (for
/// a qubit this is ½(𝕀 + Σ a_j σ_j)).
///
/// With `shots`, each a_j is estimated by measuring B_j in its eigenbasis
/// `shots` times: outcome counts are drawn multinomially (as a chain of
/// binomials) from a ChaCha8 generator seeded with `seed` (default 0).
pub fn state_tomography(rho: &DensityMatrix, shots: Option<u64>, seed: Option<u64>) -> Result<StateEstimate> {
    let d = rho.dim();
    let basis = linalg::pauli_basis(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let mut coefficients = Vec::with_capacity(basis.len());
    for b in &basis {
        let exact = trace(&(rho.matrix() * b)).re;
        let a = match shots {
            None => exact,
            Some(0) => return Err(Error::InvalidParameter("shots must be positive".into())),
            Some(n) => {
                let eig = hermitian_eig(b)?;
                let probs: Vec<f64> = (0..d)
                    .map(|k| {
                        let v = eig.eigenvectors.column(k);
                        (v.adjoint() * rho.matrix() * v)[(0, 0)].re.clamp(0.0, 1.0)
                    })
                    .collect();
                let counts = multinomial(n, &probs, &mut rng)?;
                counts
                    .iter()
                    .zip(&eig.eigenvalues)
                    .map(|(&k, &mu)| k as f64 * mu)
                    .sum::<f64>()
                    / n as f64
            }
        };
        coefficients.push(a);
    }
    let mut m = identity(d) / c(d as f64, 0.0);
    for (a, b) in coefficients.iter().zip(&basis) {
        m += b * c(0.5 * a, 0.0);
    }
    let is_psd = linalg::min_eigenvalue(&m) >= tolerance::current().psd;
    Ok(StateEstimate {
        matrix: m,
        coefficients,
        is_psd,
    })
}

fn multinomial(n: u64, probs: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let mut remaining = n;
    let mut mass = probs.iter().sum::<f64>();
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() {
            out.push(remaining);
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidParameter(format!("binomial sampling: {e}")))?
            .sample(rng);
        out.push(draw);
        remaining -= draw;
        mass -= p;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DualSet {
    pub duals: Vec<CMatrix>,
}

impl DualSet {
    /// max |Tr[P̃_m† P_n] − δ_mn|.
    pub fn biorthogonality_residual(&self, inputs: &[&CMatrix]) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, dual) in self.duals.iter().enumerate() {
            for (n, p) in inputs.iter().enumerate() {
                let target = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(dual, p) - c(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Duals by Gram inversion. Needs at least d² inputs spanning the full
/// operator space; with more than d² inputs the canonical dual frame (Gram
/// pseudo-inverse) is returned, which reproduces least-squares
/// reconstruction but is not biorthogonal.
pub fn dual_set(inputs: &[&CMatrix]) -> Result<DualSet> {
    let d = inputs.first().map_or(0, |p| p.nrows());
    let required = d * d;
    let n = inputs.len();
    let rank = numerical_rank(&vec_columns(inputs.iter().copied(), required));
    if d == 0 || rank < required {
        return Err(Error::LinearDependence { rank, required });
    }
    let gram = CMatrix::from_fn(n, n, |m, k| hs_inner(inputs[m], inputs[k]));
    let ginv = if n == required {
        gram.clone()
            .try_inverse()
            .ok_or(Error::LinearDependence { rank, required })?
    } else {
        gram.clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
    };
    let duals = (0..n)
        .map(|m| {
            (0..n).fold(CMatrix::zeros(d, d), |acc, k| acc + inputs[k] * ginv[(k, m)])
        })
        .collect();
    Ok(DualSet { duals })
}

/// Convenience wrapper for density-matrix inputs.
pub fn dual_set_of_states(inputs: &[DensityMatrix]) -> Result<DualSet> {
    let refs: Vec<&CMatrix> = inputs.iter().map(|p| p.matrix()).collect();
    dual_set(&refs)
}

fn infer_protocol(preps: &[PreparationMap]) -> Protocol {
    fn is_projective(p: &PreparationMap) -> bool {
        match p.kind() {
            PreparationKind::Projective { .. } => true,
            PreparationKind::Composite { steps } => steps.iter().any(is_projective),
            _ => false,
        }
    }
    if preps.iter().any(is_projective) {
        Protocol::Projective
    } else {
        Protocol::Stochastic
    }
}

fn simulate_row(u: &UnitaryOperator, rho_se: &BipartiteState, prep: &PreparationMap) -> Result<TomographyRow> {
    let PreparedState {
        total,
        probability,
        input,
    } = apply_preparation(prep, rho_se)?;
    let output = evolve_and_reduce(u, total.matrix(), rho_se.d_s(), rho_se.d_e());
    Ok(TomographyRow {
        prep: prep.clone(),
        probability,
        input: input.into_matrix(),
        output: Some(output),
    })
}

fn check_u(u: &UnitaryOperator, rho_se: &BipartiteState) -> Result<()> {
    if u.dim() != rho_se.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_se.dim(),
            found: u.dim(),
        });
    }
    Ok(())
}

/// Q_m = (1/r_m)·Tr_E[U·(𝒫_m ρ^SE)·U†] for each preparation. The protocol
/// is `Projective` if any preparation contains a projection, else
/// `Stochastic`.
pub fn simulate_process(
    u: &UnitaryOperator,
    rho_se: &BipartiteState,
    preps: &[PreparationMap],
) -> Result<TomographyRecord> {
    check_u(u, rho_se)?;
    let rows = preps
        .iter()
        .map(|p| simulate_row(u, rho_se, p))
        .collect::<Result<Vec<_>>>()?;
    TomographyRecord::new(infer_protocol(preps), rows)
}

/// As [`simulate_process`], with each output replaced by a shot-noise state
/// estimate (row k uses seed `seed + k`).
pub fn simulate_process_with_shots(
    u: &UnitaryOperator,
    rho_se: &BipartiteState,
    preps: &[PreparationMap],
    shots: u64,
    seed: u64,
) -> Result<TomographyRecord> {
    let exact = simulate_process(u, rho_se, preps)?;
    let protocol = exact.protocol;
    let mut rows = exact.rows;
    for (k, row) in rows.iter_mut().enumerate() {
        let q = row.output.take().expect("simulated rows carry outputs");
        let est = state_tomography(&DensityMatrix::from_trusted(q), Some(shots), Some(seed.wrapping_add(k as u64)))?;
        row.output = Some(est.matrix);
    }
    TomographyRecord::new(protocol, rows)
}

/// Simulate already-prepared total states (e.g. pseudo-pure inputs) under U.
pub fn simulate_prepared(
    u: &UnitaryOperator,
    prepared: &[PreparedState],
    labels: &[String],
    protocol: Protocol,
) -> Result<TomographyRecord> {
    let rows = prepared
        .iter()
        .enumerate()
        .map(|(k, ps)| {
            check_u(u, &ps.total)?;
            let label = labels.get(k).cloned().unwrap_or_else(|| format!("input {k}"));
            Ok(TomographyRow {
                prep: PreparationMap::external(label),
                probability: ps.probability,
                input: ps.input.matrix().clone(),
                output: Some(evolve_and_reduce(u, ps.total.matrix(), ps.total.d_s(), ps.total.d_e())),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TomographyRecord::new(protocol, rows)
}

/// Λ from outputs and explicitly supplied duals (one per output).
pub fn reconstruct_with_duals(outputs: &[&CMatrix], duals: &[CMatrix]) -> Result<SuperOp> {
    if outputs.len() != duals.len() || outputs.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: duals.len(),
            found: outputs.len(),
        });
    }
    let d = outputs[0].nrows();
    let mut b = CMatrix::zeros(d * d, d * d);
    for (q, dual) in outputs.iter().zip(duals) {
        for r in 0..d {
            for rp in 0..d {
                for s in 0..d {
                    for sp in 0..d {
                        b[(d * r + rp, d * s + sp)] += q[(r, s)] * dual[(rp, sp)].conj();
                    }
                }
            }
        }
    }
    SuperOp::new(d, Form::BForm, b)
}

/// B-form Λ interpolating every (input, output) pair of the record.
pub fn reconstruct_linear_map(record: &TomographyRecord) -> Result<SuperOp> {
    let outputs = record.outputs()?;
    let duals = dual_set(&record.inputs())?;
    reconstruct_with_duals(&outputs, &duals.duals)
}

/// max over rows of |Λ(P_m) − Q_m|.
pub fn interpolation_residual(map: &SuperOp, record: &TomographyRecord) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (row, q) in record.rows().iter().zip(record.outputs()?) {
        worst = worst.max(max_abs_diff(&map.apply_matrix(&row.input)?, q));
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct LinearityReport {
    /// Λ applied to the probe's input, Λ reconstructed from the family.
    pub predicted: CMatrix,
    /// The probe actually simulated.
    pub actual: DensityMatrix,
    pub probability: f64,
    /// max |predicted − actual|.
    pub deviation: f64,
    pub map: SuperOp,
}

pub fn linearity_check(
    u: &UnitaryOperator,
    rho_se: &BipartiteState,
    family: &[PreparationMap],
    probe: &PreparationMap,
) -> Result<LinearityReport> {
    let record = simulate_process(u, rho_se, family)?;
    let map = reconstruct_linear_map(&record)?;
    let row = simulate_row(u, rho_se, probe)?;

    let d = row.input.nrows();
    let v = vec_columns(record.inputs().into_iter(), d * d);
    let p = vec_columns(std::iter::once(&row.input), d * d);
    let coeffs = v
        .clone()
        .svd(true, true)
        .solve(&p, 1e-12)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let span_residual = linalg::max_abs(&(&v * coeffs - &p));
    if span_residual > 1e-9 {
        return Err(Error::OutsideSpan(span_residual));
    }

    let predicted = map.apply_matrix(&row.input)?;
    let actual_m = row.output.expect("simulated rows carry outputs");
    let deviation = max_abs_diff(&predicted, &actual_m);
    Ok(LinearityReport {
        predicted,
        actual: DensityMatrix::from_trusted(actual_m),
        probability: row.probability,
        deviation,
        map,
    })
}

/// Ancilla-assisted tomography: ρ^AS = V(ρ^A⊗ρ^S)V†, the environment starts
/// uncorrelated, U acts on S⊗E, and the ancilla is projected on each J_m.
#[derive(Debug, Clone)]
pub struct AncillaProtocol {
    pub entangler: UnitaryOperator,
    pub ancilla_state: DensityMatrix,
    pub system_state: DensityMatrix,
    /// Rank-1 projectors on the ancilla.
    pub measurements: Vec<DensityMatrix>,
}

impl AncillaProtocol {
    /// Qubit ancilla and system in |0⟩, V = CNOT·(H⊗𝕀) producing
    /// (|00⟩+|11⟩)/√2, and J_m = P_mᵀ so the conditional system inputs are
    /// exactly the given P_m.
    pub fn bell_pair(targets: &[DensityMatrix]) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        let mut cnot = CMatrix::zeros(4, 4);
        for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cnot[(row, col)] = c(1.0, 0.0);
        }
        let v = cnot * kron(&had, &identity(2));
        Self {
            entangler: UnitaryOperator::new(v).expect("CNOT·H is unitary"),
            ancilla_state: DensityMatrix::basis_state(2, 0),
            system_state: DensityMatrix::basis_state(2, 0),
            measurements: targets
                .iter()
                .map(|t| DensityMatrix::from_trusted(t.matrix().transpose()))
                .collect(),
        }
    }

    pub fn with_ancilla_state(mut self, rho_a: DensityMatrix) -> Self {
        self.ancilla_state = rho_a;
        self
    }

    pub fn entangled_state(&self) -> CMatrix {
        self.entangler
            .conjugate(&kron(self.ancilla_state.matrix(), self.system_state.matrix()))
    }
}

pub fn ancilla_assisted_qpt(
    protocol: &AncillaProtocol,
    u: &UnitaryOperator,
    rho_e: &DensityMatrix,
) -> Result<TomographyRecord> {
    let tol = tolerance::current();
    let (d_a, d_s, d_e) = (
        protocol.ancilla_state.dim(),
        protocol.system_state.dim(),
        rho_e.dim(),
    );
    if protocol.entangler.dim() != d_a * d_s {
        return Err(Error::DimensionMismatch {
            expected: d_a * d_s,
            found: protocol.entangler.dim(),
        });
    }
    if u.dim() != d_s * d_e {
        return Err(Error::DimensionMismatch {
            expected: d_s * d_e,
            found: u.dim(),
        });
    }
    let rho_as = protocol.entangled_state();
    let total = kron(&rho_as, rho_e.matrix());
    let evolved = kron(&identity(d_a), u.matrix());
    let evolved_total = &evolved * &total * evolved.adjoint();
    let mut rows = Vec::with_capacity(protocol.measurements.len());
    for (m, j) in protocol.measurements.iter().enumerate() {
        let jm = j.matrix();
        let resid = max_abs_diff(&(jm * jm), jm);
        if resid > 1e-9 || (trace(jm).re - 1.0).abs() > 1e-9 {
            return Err(Error::NotRankOneProjector(resid));
        }
        let label = format!("ancilla J({m})");
        let jas = kron(jm, &identity(d_s));
        let probability = trace(&(&jas * &rho_as)).re;
        if probability.is_nan() || probability <= tol.zero_prob {
            return Err(Error::ZeroProbability { label, probability });
        }
        let cond = &jas * &rho_as * &jas;
        let input = partial_trace_matrix(&cond, d_a, d_s, Subsystem::System)? / c(probability, 0.0);

        let jase = kron(jm, &identity(d_s * d_e));
        let proj = &jase * &evolved_total * &jase;
        let se = partial_trace_matrix(&proj, d_a, d_s * d_e, Subsystem::System)?;
        let output = partial_trace_matrix(&se, d_s, d_e, Subsystem::Environment)? / c(probability, 0.0);
        rows.push(TomographyRow {
            prep: PreparationMap::external(label),
            probability,
            input,
            output: Some(output),
        });
    }
    TomographyRecord::new(Protocol::AncillaAssisted, rows)
}

/// Max entrywise error of the map reconstructed from the record's outputs
/// when the experimenter assumes the `nominal` inputs instead of the actual
/// conditional ones.
pub fn nominal_reconstruction_error(
    record: &TomographyRecord,
    nominal: &[DensityMatrix],
    true_map: &SuperOp,
) -> Result<f64> {
    let duals = dual_set_of_states(nominal)?;
    let map = reconstruct_with_duals(&record.outputs()?, &duals.duals)?;
    Ok(max_abs_diff(&map.b_matrix(), &true_map.b_matrix()))
}

//! Preparation procedures acting on the system factor of a bipartite state.
//!
//! A preparation is a completely positive map 𝒫 on the system; applied to a
//! correlated state it acts as 𝒫⊗ℐ_E:
//! `R[(r,α),(s,β)] = Σ 𝒫[flat(r,r'), flat(s,s')]·ρ^SE[(r',α),(s',β)]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteState;
use crate::error::{Error, Result};
use crate::linalg::{
    self, bloch_to_density, c, hermitian_eig, kron, max_abs_diff, trace, BlochVector,
    CMatrix, CVector, DensityMatrix, UnitaryOperator, ONE, ZERO,
};
use crate::maps::{self, Form, SuperOp};
use crate::tolerance::{self, ToleranceConfig};

/// How a system state is prepared. Serialized with a `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreparationKind {
    /// Leave the state untouched.
    Identity { dim: usize },
    /// Replace the system by `target`; the environment becomes Tr_S ρ^SE, or
    /// `environment` when given explicitly.
    Pin {
        target: DensityMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        environment: Option<DensityMatrix>,
    },
    /// Local unitary V·ρ·V†.
    Rotation { unitary: UnitaryOperator },
    /// Rank-1 projection P·ρ·P, not trace preserving.
    Projective { state: DensityMatrix },
    /// Steps applied in order, first to last.
    Composite { steps: Vec<PreparationMap> },
    /// A preparation performed outside this library (experimental data,
    /// pseudo-pure or ancilla-conditioned inputs). It has no superoperator.
    External {
        label: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        observations: BTreeMap<String, f64>,
    },
}

/// A validated preparation together with its B-form superoperator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PreparationKind", into = "PreparationKind")]
pub struct PreparationMap {
    kind: PreparationKind,
    superop: Option<SuperOp>,
}

impl TryFrom<PreparationKind> for PreparationMap {
    type Error = Error;
    fn try_from(kind: PreparationKind) -> Result<Self> {
        PreparationMap::from_kind(kind)
    }
}

impl From<PreparationMap> for PreparationKind {
    fn from(p: PreparationMap) -> Self {
        p.kind
    }
}

fn b_entry(d: usize, f: impl Fn(usize, usize, usize, usize) -> num_complex::Complex64) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |row, col| f(row / d, row % d, col / d, col % d))
}

impl PreparationMap {
    pub fn from_kind(kind: PreparationKind) -> Result<Self> {
        let superop = match &kind {
            PreparationKind::Identity { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidDimension(0));
                }
                Some(SuperOp::new(
                    *dim,
                    Form::BForm,
                    b_entry(*dim, |r, rp, s, sp| if r == rp && s == sp { ONE } else { ZERO }),
                )?)
            }
            PreparationKind::Pin {
                target,
                environment: _,
            } => {
                let t = target.matrix();
                Some(SuperOp::new(
                    target.dim(),
                    Form::BForm,
                    b_entry(target.dim(), |r, rp, s, sp| if rp == sp { t[(r, s)] } else { ZERO }),
                )?)
            }
            PreparationKind::Rotation { unitary } => Some(SuperOp::from_unitary(unitary)),
            PreparationKind::Projective { state } => {
                let p = state.matrix();
                let resid = max_abs_diff(&(p * p), p);
                if resid > tolerance::current().herm.max(1e-9) {
                    return Err(Error::NotRankOneProjector(resid));
                }
                Some(SuperOp::new(
                    state.dim(),
                    Form::BForm,
                    b_entry(state.dim(), |r, rp, s, sp| p[(r, rp)] * p[(s, sp)].conj()),
                )?)
            }
            PreparationKind::Composite { steps } => {
                let mut acc: Option<SuperOp> = None;
                for step in steps {
                    let s = step.superop.clone().ok_or_else(|| {
                        Error::UnsupportedPreparation(format!(
                            "composite step `{}` has no superoperator",
                            step.label()
                        ))
                    })?;
                    acc = Some(match acc {
                        None => s,
                        Some(prev) => maps::compose(&s, &prev)?.to_form(Form::BForm),
                    });
                }
                Some(acc.ok_or_else(|| {
                    Error::InvalidParameter("composite preparation needs at least one step".into())
                })?)
            }
            PreparationKind::External { .. } => None,
        };
        Ok(Self { kind, superop })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kind(PreparationKind::Identity { dim }).expect("dim > 0")
    }

    pub fn pin(target: DensityMatrix) -> Self {
        Self::from_kind(PreparationKind::Pin {
            target,
            environment: None,
        })
        .expect("pin superoperator is always well formed")
    }

    /// Pin whose post-preparation environment is given explicitly instead of
    /// being inherited from the correlated state.
    pub fn pin_with_environment(target: DensityMatrix, environment: DensityMatrix) -> Self {
        Self::from_kind(PreparationKind::Pin {
            target,
            environment: Some(environment),
        })
        .expect("pin superoperator is always well formed")
    }

    pub fn rotation(unitary: UnitaryOperator) -> Self {
        Self::from_kind(PreparationKind::Rotation { unitary }).expect("unitary is validated")
    }

    pub fn projective(state: DensityMatrix) -> Result<Self> {
        Self::from_kind(PreparationKind::Projective { state })
    }

    pub fn composite(steps: Vec<PreparationMap>) -> Result<Self> {
        Self::from_kind(PreparationKind::Composite { steps })
    }

    /// Pin to `pin_target`, then rotate with `v`.
    pub fn stochastic(pin_target: DensityMatrix, v: UnitaryOperator) -> Result<Self> {
        Self::composite(vec![Self::pin(pin_target), Self::rotation(v)])
    }

    pub fn external(label: impl Into<String>) -> Self {
        Self {
            kind: PreparationKind::External {
                label: label.into(),
                observations: BTreeMap::new(),
            },
            superop: None,
        }
    }

    pub fn kind(&self) -> &PreparationKind {
        &self.kind
    }

    /// B-form superoperator; `None` for external preparations.
    pub fn superop(&self) -> Option<&SuperOp> {
        self.superop.as_ref()
    }

    pub fn dim(&self) -> Option<usize> {
        self.superop.as_ref().map(|s| s.dim())
    }

    /// Whether any step carries an explicit environment override.
    pub fn overrides_environment(&self) -> bool {
        match &self.kind {
            PreparationKind::Pin { environment, .. } => environment.is_some(),
            PreparationKind::Composite { steps } => steps.iter().any(|s| s.overrides_environment()),
            _ => false,
        }
    }

    /// Short human-readable description used in error messages.
    pub fn label(&self) -> String {
        fn state_label(rho: &DensityMatrix) -> String {
            match linalg::density_to_bloch(rho) {
                Ok(b) => {
                    let [x, y, z] = b.components();
                    format!("bloch=[{x:.4}, {y:.4}, {z:.4}]")
                }
                Err(_) => format!("dim={}", rho.dim()),
            }
        }
        match &self.kind {
            PreparationKind::Identity { .. } => "identity".into(),
            PreparationKind::Pin { target, .. } => format!("pin({})", state_label(target)),
            PreparationKind::Rotation { .. } => "rotation".into(),
            PreparationKind::Projective { state } => format!("projective({})", state_label(state)),
            PreparationKind::Composite { steps } => {
                let parts: Vec<String> = steps.iter().map(|s| s.label()).collect();
                format!("composite[{}]", parts.join(" -> "))
            }
            PreparationKind::External { label, .. } => label.clone(),
        }
    }
}

/// Normalized prepared total state with its probability and reduced input.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub total: BipartiteState,
    pub probability: f64,
    pub input: DensityMatrix,
}

/// (𝒫⊗ℐ)·X for a B-form 𝒫.
pub(crate) fn apply_superop_to_system(b: &SuperOp, x: &CMatrix, d_e: usize) -> CMatrix {
    let d = b.dim();
    let bm = b.b_matrix();
    let n = d * d_e;
    let mut out = CMatrix::zeros(n, n);
    for r in 0..d {
        for s in 0..d {
            for rp in 0..d {
                for sp in 0..d {
                    let w = bm[(d * r + rp, d * s + sp)];
                    if w == ZERO {
                        continue;
                    }
                    for a in 0..d_e {
                        for bb in 0..d_e {
                            out[(r * d_e + a, s * d_e + bb)] += w * x[(rp * d_e + a, sp * d_e + bb)];
                        }
                    }
                }
            }
        }
    }
    out
}

fn apply_unnormalized(prep: &PreparationMap, x: &CMatrix, d_e: usize) -> Result<CMatrix> {
    match &prep.kind {
        PreparationKind::External { label, .. } => Err(Error::UnsupportedPreparation(format!(
            "external preparation `{label}` cannot be simulated"
        ))),
        PreparationKind::Pin {
            target,
            environment: Some(env),
        } => {
            if env.dim() != d_e {
                return Err(Error::DimensionMismatch {
                    expected: d_e,
                    found: env.dim(),
                });
            }
            Ok(kron(target.matrix(), env.matrix()) * trace(x))
        }
        PreparationKind::Composite { steps } => steps
            .iter()
            .try_fold(x.clone(), |acc, s| apply_unnormalized(s, &acc, d_e)),
        _ => {
            let b = prep.superop.as_ref().expect("non-external kinds carry a superop");
            Ok(apply_superop_to_system(b, x, d_e))
        }
    }
}

pub fn apply_preparation(prep: &PreparationMap, rho_se: &BipartiteState) -> Result<PreparedState> {
    apply_preparation_with(prep, rho_se, &tolerance::current())
}

pub fn apply_preparation_with(
    prep: &PreparationMap,
    rho_se: &BipartiteState,
    tol: &ToleranceConfig,
) -> Result<PreparedState> {
    let (d_s, d_e) = (rho_se.d_s(), rho_se.d_e());
    if let Some(d) = prep.dim() {
        if d != d_s {
            return Err(Error::DimensionMismatch {
                expected: d_s,
                found: d,
            });
        }
    }
    if matches!(prep.kind, PreparationKind::Identity { .. }) {
        return Ok(PreparedState {
            total: rho_se.clone(),
            probability: 1.0,
            input: rho_se.reduced_system(),
        });
    }
    let raw = apply_unnormalized(prep, rho_se.matrix(), d_e)?;
    let probability = trace(&raw).re;
    if probability.is_nan() || probability <= tol.zero_prob {
        return Err(Error::ZeroProbability {
            label: prep.label(),
            probability,
        });
    }
    let total = BipartiteState::from_trusted(raw / c(probability, 0.0), d_s, d_e);
    let input = total.reduced_system();
    Ok(PreparedState {
        total,
        probability,
        input,
    })
}

/// Pin to a pure state, then apply each rotation in turn (one prepared state
/// per rotation; the pin target alone when `rotations` is empty).
pub fn stochastic_input_set(
    pin_target: &DensityMatrix,
    rotations: &[UnitaryOperator],
    rho_se: &BipartiteState,
) -> Result<Vec<PreparedState>> {
    let purity = pin_target.purity();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::MixedPinTarget(purity));
    }
    if rotations.is_empty() {
        return Ok(vec![apply_preparation(
            &PreparationMap::pin(pin_target.clone()),
            rho_se,
        )?]);
    }
    rotations
        .iter()
        .map(|v| {
            let prep = PreparationMap::stochastic(pin_target.clone(), v.clone())?;
            apply_preparation(&prep, rho_se)
        })
        .collect()
}

/// Bloch vectors of the four standard inputs P(1,−), P(1,+), P(2,+), P(3,+).
pub const STANDARD_INPUT_AXES: [[f64; 3]; 4] = [
    [-1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

/// The four standard inputs shrunk to Bloch radius `p`.
///
/// Uncorrelated: each total state is P⊗ρ^E. Correlated: each input is
/// embedded with [`BipartiteState::embed`], so the totals carry the
/// correlation content of `rho_se` while their reduced states equal the
/// uncorrelated ones.
pub fn pseudo_pure_input_set(
    p: f64,
    rho_se: &BipartiteState,
    correlated: bool,
) -> Result<Vec<PreparedState>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("pseudo-pure radius must lie in (0, 1], got {p}")));
    }
    if rho_se.d_s() != 2 {
        return Err(Error::UnsupportedDimension(rho_se.d_s()));
    }
    let tol = tolerance::current();
    let rho_e = rho_se.reduced_environment();
    STANDARD_INPUT_AXES
        .iter()
        .map(|axis| {
            let a = BlochVector::new(p * axis[0], p * axis[1], p * axis[2])?;
            let input = bloch_to_density(&a);
            let total = if correlated {
                let m = rho_se.embed(input.matrix());
                let min = linalg::min_eigenvalue(&m);
                if min < tol.psd {
                    return Err(Error::Incompatible(min));
                }
                BipartiteState::from_trusted(m, 2, rho_se.d_e())
            } else {
                BipartiteState::product(&input, &rho_e)
            };
            Ok(PreparedState {
                total,
                probability: 1.0,
                input,
            })
        })
        .collect()
}

/// Rotation that should take |0⟩ to the P(1,−) state but is off by ε:
/// `V|0⟩ = (√(1+ε)|0⟩ − √(1−ε)|1⟩)/√2`, so the prepared state is
/// ½{𝕀 + εσ3 − √(1−ε²)σ1}. Real entries, V[0,0] ≥ 0.
pub fn control_error_rotation(epsilon: f64) -> Result<UnitaryOperator> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "control error must satisfy 0 <= eps < 1, got {epsilon}"
        )));
    }
    let a = ((1.0 + epsilon) / 2.0).sqrt();
    let b = ((1.0 - epsilon) / 2.0).sqrt();
    UnitaryOperator::new(CMatrix::from_row_slice(
        2,
        2,
        &[c(a, 0.0), c(b, 0.0), c(-b, 0.0), c(a, 0.0)],
    ))
}

/// Eigenvector of the largest eigenvalue, i.e. |ψ⟩ for a pure state.
pub fn dominant_ket(rho: &DensityMatrix) -> Result<CVector> {
    let eig = hermitian_eig(rho.matrix())?;
    Ok(eig.eigenvectors.column(0).into_owned())
}

/// Orthonormal basis whose first vector is `v`, completed by Gram–Schmidt
/// over the canonical basis.
fn completed_basis(v: &CVector) -> Vec<CVector> {
    let d = v.len();
    let mut basis = vec![v / c(v.norm(), 0.0)];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut e = CVector::zeros(d);
        e[k] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&e);
                e -= b * proj;
            }
        }
        let n = e.norm();
        if n > 1e-8 {
            basis.push(e / c(n, 0.0));
        }
    }
    basis
}

/// A unitary V with V|from⟩ = |to⟩.
pub fn rotation_between(from: &CVector, to: &CVector) -> Result<UnitaryOperator> {
    if from.len() != to.len() {
        return Err(Error::DimensionMismatch {
            expected: from.len(),
            found: to.len(),
        });
    }
    let f = completed_basis(from);
    let t = completed_basis(to);
    let d = from.len();
    let v = f
        .iter()
        .zip(&t)
        .fold(CMatrix::zeros(d, d), |acc, (fk, tk)| acc + tk * fk.adjoint());
    UnitaryOperator::new(v)
}

/// Rotation carrying the pure state `from` to the pure state `to`.
pub fn rotation_to_state(from: &DensityMatrix, to: &DensityMatrix) -> Result<UnitaryOperator> {
    rotation_between(&dominant_ket(from)?, &dominant_ket(to)?)
}

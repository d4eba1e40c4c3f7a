//! Superoperators in A-form and B-form.
//!
//! For a system of dimension d and `flat(r, s) = d·r + s`:
//!
//! * A-form acts on the row-major vectorization, `vec(ρ')= A·vec(ρ)`, so
//!   `ρ'[r,s] = Σ A[flat(r,s), flat(r',s')]·ρ[r',s']`.
//! * B-form is the reshuffle `B[flat(r,r'), flat(s,s')] = A[flat(r,s),
//!   flat(r',s')]`. It is Hermitian for Hermiticity-preserving maps and
//!   positive semidefinite exactly for completely positive ones.

use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteState;
use crate::error::{Error, Result};
use crate::io::{entries_to_matrix, matrix_to_entries, Entries};
use crate::linalg::{
    self, c, hermitian_eig_with, identity, kron, max_abs_diff,
    partial_trace_matrix, pauli_combination, CMatrix, CVector, DensityMatrix, Subsystem,
    UnitaryOperator, ONE, ZERO,
};
use crate::random;
use crate::tolerance::{self, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    AForm,
    BForm,
}

/// d²×d² matrix of a linear map on d×d matrices, tagged with its form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SuperOpJson", into = "SuperOpJson")]
pub struct SuperOp {
    dim: usize,
    form: Form,
    matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct SuperOpJson {
    dim: usize,
    form: Form,
    entries: Entries,
}

impl TryFrom<SuperOpJson> for SuperOp {
    type Error = Error;
    fn try_from(j: SuperOpJson) -> Result<Self> {
        let n = j.dim * j.dim;
        SuperOp::new(j.dim, j.form, entries_to_matrix(&j.entries, n, n)?)
    }
}

impl From<SuperOp> for SuperOpJson {
    fn from(s: SuperOp) -> Self {
        SuperOpJson {
            dim: s.dim,
            form: s.form,
            entries: matrix_to_entries(&s.matrix),
        }
    }
}

fn reshuffle_matrix(m: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |row, col| {
        let (r, rp) = (row / d, row % d);
        let (s, sp) = (col / d, col % d);
        m[(d * r + s, d * rp + sp)]
    })
}

impl SuperOp {
    pub fn new(dim: usize, form: Form, matrix: CMatrix) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let n = linalg::square_dim(&matrix)?;
        if n != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: n,
            });
        }
        Ok(Self { dim, form, matrix })
    }

    /// Identity map (A-form 𝕀_{d²}).
    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            form: Form::AForm,
            matrix: identity(d * d),
        }
    }

    /// ρ ↦ UρU† in B-form.
    pub fn from_unitary(u: &UnitaryOperator) -> Self {
        let d = u.dim();
        let m = u.matrix();
        let v = CVector::from_iterator(d * d, m.transpose().iter().copied());
        Self {
            dim: d,
            form: Form::BForm,
            matrix: &v * v.adjoint(),
        }
    }

    /// ρ ↦ ρᵀ (positive, not completely positive).
    pub fn transpose_map(d: usize) -> Self {
        let m = CMatrix::from_fn(d * d, d * d, |row, col| {
            let (r, rp) = (row / d, row % d);
            let (s, sp) = (col / d, col % d);
            if r == sp && s == rp {
                ONE
            } else {
                ZERO
            }
        });
        Self {
            dim: d,
            form: Form::BForm,
            matrix: m,
        }
    }

    /// ρ ↦ Tr[ρ]·𝕀/d.
    pub fn depolarizing(d: usize) -> Self {
        let m = CMatrix::from_fn(d * d, d * d, |row, col| {
            let (r, rp) = (row / d, row % d);
            let (s, sp) = (col / d, col % d);
            if r == s && rp == sp {
                c(1.0 / d as f64, 0.0)
            } else {
                ZERO
            }
        });
        Self {
            dim: d,
            form: Form::BForm,
            matrix: m,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn to_form(&self, form: Form) -> SuperOp {
        if self.form == form {
            self.clone()
        } else {
            reshuffle(self)
        }
    }

    pub fn b_matrix(&self) -> CMatrix {
        match self.form {
            Form::BForm => self.matrix.clone(),
            Form::AForm => reshuffle_matrix(&self.matrix, self.dim),
        }
    }

    pub fn a_matrix(&self) -> CMatrix {
        match self.form {
            Form::AForm => self.matrix.clone(),
            Form::BForm => reshuffle_matrix(&self.matrix, self.dim),
        }
    }

    /// ρ'[r,s] = Σ B[flat(r,r'), flat(s,s')]·ρ[r',s'] for any d×d matrix.
    pub fn apply_matrix(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.dim;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.nrows(),
            });
        }
        let a = self.a_matrix();
        let v = CVector::from_iterator(d * d, rho.transpose().iter().copied());
        let out = a * v;
        Ok(CMatrix::from_row_slice(d, d, out.as_slice()))
    }

    /// max |Σ_n B[flat(n,r'), flat(n,s')] − δ_{r's'}|.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim;
        let b = self.b_matrix();
        let t = CMatrix::from_fn(d, d, |rp, sp| (0..d).map(|n| b[(d * n + rp, d * n + sp)]).sum());
        max_abs_diff(&t, &identity(d))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_residual() <= tol
    }

    /// Hermiticity residual of the B-form.
    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(&self.b_matrix())
    }

    /// Eigenvalues of the (Hermitian part of the) B-form, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigenvalues_desc(&self.b_matrix())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.b_matrix())
    }
}

/// Toggle A-form ↔ B-form.
pub fn reshuffle(s: &SuperOp) -> SuperOp {
    SuperOp {
        dim: s.dim,
        form: match s.form {
            Form::AForm => Form::BForm,
            Form::BForm => Form::AForm,
        },
        matrix: reshuffle_matrix(&s.matrix, s.dim),
    }
}

/// Image of a state; not required to be positive.
pub fn apply(s: &SuperOp, rho: &DensityMatrix) -> Result<CMatrix> {
    s.apply_matrix(rho.matrix())
}

/// S2∘S1, returned in the form of `s2`.
pub fn compose(s2: &SuperOp, s1: &SuperOp) -> Result<SuperOp> {
    if s2.dim != s1.dim {
        return Err(Error::DimensionMismatch {
            expected: s2.dim,
            found: s1.dim,
        });
    }
    let a = SuperOp {
        dim: s2.dim,
        form: Form::AForm,
        matrix: s2.a_matrix() * s1.a_matrix(),
    };
    Ok(a.to_form(s2.form))
}

#[derive(Debug, Clone)]
pub struct KrausSet {
    pub operators: Vec<CMatrix>,
}

impl KrausSet {
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.operators
            .iter()
            .fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
                acc + k * rho * k.adjoint()
            })
    }

    /// max |Σ C†C − 𝕀|.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.operators.first().map_or(0, |k| k.nrows());
        let s = self
            .operators
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&s, &identity(d))
    }

    /// B-form map Σ_m vec(C_m) vec(C_m)†.
    pub fn to_superop(&self) -> SuperOp {
        let d = self.operators.first().map_or(1, |k| k.nrows());
        let mut b = CMatrix::zeros(d * d, d * d);
        for k in &self.operators {
            let v = CVector::from_iterator(d * d, k.transpose().iter().copied());
            b += &v * v.adjoint();
        }
        SuperOp {
            dim: d,
            form: Form::BForm,
            matrix: b,
        }
    }
}

pub fn kraus_decompose(s: &SuperOp) -> Result<KrausSet> {
    kraus_decompose_with(s, &tolerance::current())
}

/// C_m = √λ_m·reshape(v_m) for every eigenpair with λ_m > |tol.psd|; the
/// reshape is row-major, C[r,r'] = v[flat(r,r')].
pub fn kraus_decompose_with(s: &SuperOp, tol: &ToleranceConfig) -> Result<KrausSet> {
    let d = s.dim;
    let eig = hermitian_eig_with(&s.b_matrix(), tol)?;
    let min = eig.min();
    if min < tol.psd {
        return Err(Error::NotCompletelyPositive { eigenvalue: min });
    }
    let cutoff = tol.psd.abs();
    let operators = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cutoff)
        .map(|(k, &l)| {
            let v = eig.eigenvectors.column(k);
            CMatrix::from_fn(d, d, |r, rp| v[d * r + rp] * l.sqrt())
        })
        .collect();
    Ok(KrausSet { operators })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositivityTag {
    CompletelyPositive,
    PositiveNotCP,
    Negative,
}

/// Positivity class of a map.
///
/// `PositiveNotCP` versus `Negative` is decided on a finite probe set, so a
/// `PositiveNotCP` verdict means no probe state was mapped to a non-positive
/// matrix, not that none exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityClass {
    pub tag: PositivityTag,
    /// Smallest eigenvalue of the B-form.
    pub min_eigenvalue: f64,
    /// First probe state whose image has a negative eigenvalue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<DensityMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_image_min_eigenvalue: Option<f64>,
    /// Smallest image eigenvalue over all probes (absent when the map is CP
    /// and no probing was needed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_image_eigenvalue: Option<f64>,
    pub probes: usize,
}

pub const DEFAULT_POSITIVITY_SAMPLES: usize = 2048;
const HAAR_PROBE_SEED: u64 = 0x005e_ed0f_9a7e;

/// Six axis states in the order P(1,−), P(1,+), P(2,+), P(3,+), P(2,−), P(3,−).
pub fn axis_probe_states() -> Vec<[f64; 3]> {
    vec![
        [-1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
    ]
}

/// Fibonacci lattice of `n` points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

fn probe_states(d: usize, samples: usize) -> Vec<DensityMatrix> {
    if d == 2 {
        axis_probe_states()
            .into_iter()
            .chain(fibonacci_sphere(samples))
            .map(|a| {
                DensityMatrix::from_trusted((identity(2) + pauli_combination(&a)) * c(0.5, 0.0))
            })
            .collect()
    } else {
        let mut rng = random::seeded(HAAR_PROBE_SEED);
        (0..d)
            .map(|k| DensityMatrix::basis_state(d, k))
            .chain((0..samples).map(|_| random::haar_pure_state(d, &mut rng)))
            .collect()
    }
}

pub fn classify_positivity(s: &SuperOp, samples: usize) -> PositivityClass {
    classify_positivity_with(s, samples, &tolerance::current())
}

/// CP iff the B-form's smallest eigenvalue is ≥ `tol.psd`. Otherwise pure
/// probe states are mapped: six axis states then a Fibonacci grid for
/// qubits, computational basis states then seeded Haar states for d > 2.
pub fn classify_positivity_with(
    s: &SuperOp,
    samples: usize,
    tol: &ToleranceConfig,
) -> PositivityClass {
    let min_eigenvalue = s.min_eigenvalue();
    if min_eigenvalue >= tol.psd {
        return PositivityClass {
            tag: PositivityTag::CompletelyPositive,
            min_eigenvalue,
            witness: None,
            witness_image_min_eigenvalue: None,
            min_image_eigenvalue: None,
            probes: 0,
        };
    }
    let a = s.to_form(Form::AForm);
    let probes = probe_states(s.dim, samples);
    let mut witness: Option<(DensityMatrix, f64)> = None;
    let mut global = f64::INFINITY;
    for p in &probes {
        let img = a.apply_matrix(p.matrix()).expect("probe dimension matches map");
        let m = linalg::min_eigenvalue(&img);
        global = global.min(m);
        if witness.is_none() && m < tol.psd {
            witness = Some((p.clone(), m));
        }
    }
    let tag = if witness.is_some() {
        PositivityTag::Negative
    } else {
        PositivityTag::PositiveNotCP
    };
    let (witness, witness_image_min_eigenvalue) = match witness {
        Some((w, m)) => (Some(w), Some(m)),
        None => (None, None),
    };
    PositivityClass {
        tag,
        min_eigenvalue,
        witness,
        witness_image_min_eigenvalue,
        min_image_eigenvalue: Some(global),
        probes: probes.len(),
    }
}

fn split_dims(total: usize, d_e: usize) -> Result<usize> {
    if d_e == 0 || !total.is_multiple_of(d_e) {
        return Err(Error::DimensionMismatch {
            expected: d_e,
            found: total,
        });
    }
    Ok(total / d_e)
}

/// B[flat(r,r'), flat(s,s')] = Σ_{ε,α,β} U[(r,ε),(r',α)]·ρ^E[α,β]·conj(U[(s,ε),(s',β)]).
pub fn map_from_contraction(u: &UnitaryOperator, rho_e: &DensityMatrix) -> Result<SuperOp> {
    let d_e = rho_e.dim();
    let d = split_dims(u.dim(), d_e)?;
    let um = u.matrix();
    // W[(r,ε),(r',β)] = Σ_α U[(r,ε),(r',α)]·ρ^E[α,β]
    let w = um * kron(&identity(d), rho_e.matrix());
    let mut b = CMatrix::zeros(d * d, d * d);
    for r in 0..d {
        for rp in 0..d {
            for s in 0..d {
                for sp in 0..d {
                    let mut acc = ZERO;
                    for eps in 0..d_e {
                        for beta in 0..d_e {
                            acc += w[(r * d_e + eps, rp * d_e + beta)]
                                * um[(s * d_e + eps, sp * d_e + beta)].conj();
                        }
                    }
                    b[(d * r + rp, d * s + sp)] = acc;
                }
            }
        }
    }
    SuperOp::new(d, Form::BForm, b)
}

fn check_dims(u: &UnitaryOperator, rho_se: &BipartiteState) -> Result<()> {
    if u.dim() != rho_se.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_se.dim(),
            found: u.dim(),
        });
    }
    Ok(())
}

/// Tr_E[U·X·U†] for a total-space operator X.
pub(crate) fn evolve_and_reduce(u: &UnitaryOperator, x: &CMatrix, d_s: usize, d_e: usize) -> CMatrix {
    partial_trace_matrix(&u.conjugate(x), d_s, d_e, Subsystem::Environment)
        .expect("dimensions checked by caller")
}

/// Linear extension of X ↦ Tr_E[U·E(X)·U†] with the embedding of
/// [`BipartiteState::embed`], in B-form. No compatibility check is made:
/// outside the compatibility domain the map still exists as a linear map but
/// its images need not be states.
pub fn dynamical_map(u: &UnitaryOperator, rho_se: &BipartiteState) -> Result<SuperOp> {
    check_dims(u, rho_se)?;
    let (d, d_e) = (rho_se.d_s(), rho_se.d_e());
    let mut b = CMatrix::zeros(d * d, d * d);
    for rp in 0..d {
        for sp in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(rp, sp)] = ONE;
            let out = evolve_and_reduce(u, &rho_se.embed(&e), d, d_e);
            for r in 0..d {
                for s in 0..d {
                    b[(d * r + rp, d * s + sp)] = out[(r, s)];
                }
            }
        }
    }
    SuperOp::new(d, Form::BForm, b)
}

/// A-form map fixed by the images of d² linearly independent inputs, each
/// embedded with [`BipartiteState::embed`], evolved, and reduced.
pub fn map_from_correlated_state(
    u: &UnitaryOperator,
    rho_se: &BipartiteState,
    basis_inputs: &[DensityMatrix],
) -> Result<SuperOp> {
    map_from_correlated_state_with(u, rho_se, basis_inputs, &tolerance::current())
}

pub fn map_from_correlated_state_with(
    u: &UnitaryOperator,
    rho_se: &BipartiteState,
    basis_inputs: &[DensityMatrix],
    tol: &ToleranceConfig,
) -> Result<SuperOp> {
    check_dims(u, rho_se)?;
    let (d, d_e) = (rho_se.d_s(), rho_se.d_e());
    let n = d * d;
    for p in basis_inputs {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
    }
    let vin = vec_columns(basis_inputs.iter().map(|p| p.matrix()), n);
    let rank = numerical_rank(&vin);
    if basis_inputs.len() != n || rank < n {
        return Err(Error::LinearDependence { rank, required: n });
    }
    let mut outs = Vec::with_capacity(n);
    for p in basis_inputs {
        let total = rho_se.embed(p.matrix());
        let min = linalg::min_eigenvalue(&total);
        if min < tol.psd {
            return Err(Error::Incompatible(min));
        }
        outs.push(evolve_and_reduce(u, &total, d, d_e));
    }
    let vout = vec_columns(outs.iter(), n);
    let inv = vin
        .try_inverse()
        .ok_or(Error::LinearDependence { rank, required: n })?;
    SuperOp::new(d, Form::AForm, vout * inv)
}

/// Columns are the row-major vectorizations of the given d×d matrices.
pub(crate) fn vec_columns<'a>(ms: impl Iterator<Item = &'a CMatrix>, n: usize) -> CMatrix {
    let cols: Vec<CVector> = ms
        .map(|m| CVector::from_iterator(n, m.transpose().iter().copied()))
        .collect();
    CMatrix::from_columns(&cols)
}

/// Number of singular values above 1e-10 relative to the largest.
pub(crate) fn numerical_rank(m: &CMatrix) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-10 * max.max(1e-300)).count()
}

/// Whether the qubit state with Bloch vector `a` lies in the compatibility
/// domain of `rho_se`.
///
/// For the structured family with only c23 nonzero this is the inequality
/// `1 ≥ a1² + (|a2| + |c23|)² + a3²`; otherwise the embedded total state is
/// tested for positivity.
pub fn compatibility_check(rho_se: &BipartiteState, a: &linalg::BlochVector) -> bool {
    let [a1, a2, a3] = a.components();
    match rho_se.params() {
        Some(p) if p.is_c23_family() => {
            a1 * a1 + (a2.abs() + p.c23().abs()).powi(2) + a3 * a3 <= 1.0 + 1e-12
        }
        _ => {
            if rho_se.d_s() != 2 {
                return false;
            }
            let x = linalg::bloch_to_density(a);
            linalg::min_eigenvalue(&rho_se.embed(x.matrix())) >= tolerance::current().psd
        }
    }
}

/// Stinespring dilation with a d²-dimensional environment in |0⟩⟨0|:
/// `U[(r,ε),(r',0)] = C_ε[r,r']`, remaining columns completed by Gram–Schmidt
/// over the canonical basis in index order.
pub fn minimal_dilation(s: &SuperOp) -> Result<(UnitaryOperator, DensityMatrix)> {
    let tol = tolerance::current();
    let d = s.dim;
    let kraus = kraus_decompose_with(s, &tol)?;
    let tp = s.trace_preservation_residual();
    if tp > tol.trace {
        return Err(Error::InvalidParameter(format!(
            "dilation needs a trace-preserving map (residual {tp:e})"
        )));
    }
    let d_e = d * d;
    let n = d * d_e;
    let mut u = CMatrix::zeros(n, n);
    for (eps, k) in kraus.operators.iter().enumerate() {
        for r in 0..d {
            for rp in 0..d {
                u[(r * d_e + eps, rp * d_e)] = k[(r, rp)];
            }
        }
    }
    let fixed: Vec<usize> = (0..d).map(|rp| rp * d_e).collect();
    let mut basis: Vec<CVector> = fixed.iter().map(|&j| u.column(j).into_owned()).collect();
    let free: Vec<usize> = (0..n).filter(|j| !fixed.contains(j)).collect();
    let mut candidates = 0..n;
    for &col in &free {
        let v = loop {
            let k = candidates
                .next()
                .expect("canonical basis spans the space, so completion terminates");
            let mut v = CVector::zeros(n);
            v[k] = ONE;
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dotc(&v);
                    v -= b * proj;
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                break v / c(norm, 0.0);
            }
        };
        u.set_column(col, &v);
        basis.push(v);
    }
    let env = DensityMatrix::basis_state(d_e, 0);
    Ok((UnitaryOperator::new_with(u, &tol)?, env))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, pauli, BlochVector};
    use crate::models::{axis_state, bloch_state, heisenberg_unitary};
    use crate::scenarios::multiple_stochastic_record;
    use crate::tomo::reconstruct_linear_map;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn c23_family(c23: f64) -> BipartiteState {
        BipartiteState::correlated_family([0.0; 3], c23).unwrap()
    }

    fn mixed_inputs(radius: f64) -> Vec<DensityMatrix> {
        crate::prep::STANDARD_INPUT_AXES
            .iter()
            .map(|a| bloch_state([radius * a[0], radius * a[1], radius * a[2]]))
            .collect()
    }

    fn sact(x: f64) -> CMatrix {
        let cc = x.cos().powi(2);
        let mut b = CMatrix::zeros(4, 4);
        b[(0, 0)] = c((1.0 + cc) / 2.0, 0.0);
        b[(3, 3)] = b[(0, 0)];
        b[(1, 1)] = c((1.0 - cc) / 2.0, 0.0);
        b[(2, 2)] = b[(1, 1)];
        b[(0, 3)] = c(cc, 0.0);
        b[(3, 0)] = c(cc, 0.0);
        b
    }

    #[test]
    fn reshuffle_layout_and_involution() {
        let a = CMatrix::from_fn(4, 4, |i, j| c((4 * i + j + 1) as f64, 0.0));
        let s = SuperOp::new(2, Form::AForm, a.clone()).unwrap();
        let b = reshuffle(&s);
        let row: Vec<f64> = (0..4).map(|j| b.matrix()[(0, j)].re).collect();
        assert_eq!(row, vec![1.0, 2.0, 5.0, 6.0]);
        assert_eq!(reshuffle(&b).matrix(), &a);

        let id_b = SuperOp::identity(2).b_matrix();
        let mut expected = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(i, j)] = c(1.0, 0.0);
        }
        assert_eq!(id_b, expected);
    }

    #[test]
    fn apply_identity_and_correlated_family() {
        let rho = bloch_state([0.2, -0.1, 0.3]);
        let out = apply(&SuperOp::identity(2), &rho).unwrap();
        assert!(max_abs_diff(&out, rho.matrix()) < 1e-15);

        let x = 0.9f64;
        let (s, cc) = x.sin_cos();
        let map = dynamical_map(&heisenberg_unitary(x), &c23_family(0.5)).unwrap();
        let a = [0.1, 0.2, -0.1];
        let out = apply(&map, &bloch_state(a)).unwrap();
        let mut expected = pauli(0) - pauli(1) * c(0.5 * cc * s, 0.0);
        for (j, aj) in a.iter().enumerate() {
            expected += pauli(j + 1) * c(cc * cc * aj, 0.0);
        }
        assert!(max_abs_diff(&out, &(expected * c(0.5, 0.0))) < 1e-12);
    }

    #[test]
    fn swap_record_map_sends_p1_minus_outside_state_space() {
        let map = reconstruct_linear_map(&multiple_stochastic_record(FRAC_PI_2).unwrap()).unwrap();
        let out = apply(&map, &axis_state(1, false)).unwrap();
        assert!(linalg::min_eigenvalue(&out) < -0.1);
        assert!((linalg::trace(&out).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composition() {
        let mut rng = random::seeded(11);
        let s = map_from_contraction(&random::haar_unitary(4, &mut rng), &random::random_density(2, &mut rng)).unwrap();
        assert!(max_abs_diff(&compose(&s, &SuperOp::identity(2)).unwrap().b_matrix(), &s.b_matrix()) < 1e-14);

        let a = s.a_matrix();
        let mut power = SuperOp::identity(2);
        for _ in 0..3 {
            power = compose(&s, &power).unwrap();
        }
        assert!(max_abs_diff(&power.a_matrix(), &(&a * &a * &a)) < 1e-12);

        for _ in 0..20 {
            let u1 = random::haar_unitary(2, &mut rng);
            let u2 = random::haar_unitary(2, &mut rng);
            let both = compose(&SuperOp::from_unitary(&u2), &SuperOp::from_unitary(&u1)).unwrap();
            let direct = SuperOp::from_unitary(&u2.compose(&u1));
            assert!(max_abs_diff(&both.b_matrix(), &direct.b_matrix()) < 1e-12);
        }
        assert!(compose(&s, &SuperOp::identity(3)).is_err());
    }

    #[test]
    fn kraus_forms() {
        let mut rng = random::seeded(12);
        let u = random::haar_unitary(2, &mut rng);
        let k = kraus_decompose(&SuperOp::from_unitary(&u)).unwrap();
        assert_eq!(k.operators.len(), 1);
        let ratio = k.operators[0].clone() * u.matrix().adjoint();
        assert!(max_abs_diff(&(&ratio * ratio.adjoint()), &linalg::identity(2)) < 1e-10);
        assert!((ratio[(0, 1)]).norm() < 1e-10);

        let half = DensityMatrix::maximally_mixed(2);
        let s = map_from_contraction(&heisenberg_unitary(FRAC_PI_3), &half).unwrap();
        assert!(max_abs_diff(&s.b_matrix(), &sact(FRAC_PI_3)) < 1e-12);
        let k = kraus_decompose(&s).unwrap();
        assert_eq!(k.operators.len(), 4);
        assert!(max_abs_diff(&k.to_superop().b_matrix(), &s.b_matrix()) < 1e-10);
        assert!(k.completeness_residual() < 1e-9);

        let bad = dynamical_map(&heisenberg_unitary(0.3), &c23_family(0.5)).unwrap();
        match kraus_decompose(&bad) {
            Err(Error::NotCompletelyPositive { eigenvalue }) => assert!((eigenvalue + 0.027).abs() < 1e-3),
            other => panic!("expected NotCompletelyPositive, got {other:?}"),
        }
    }

    #[test]
    fn positivity_classes() {
        let mut rng = random::seeded(13);
        let u = random::haar_unitary(2, &mut rng);
        let cp = classify_positivity(&SuperOp::from_unitary(&u), DEFAULT_POSITIVITY_SAMPLES);
        assert_eq!(cp.tag, PositivityTag::CompletelyPositive);

        let t = classify_positivity(&SuperOp::transpose_map(2), DEFAULT_POSITIVITY_SAMPLES);
        assert_eq!(t.tag, PositivityTag::PositiveNotCP);
        assert!((t.min_eigenvalue + 1.0).abs() < 1e-12);

        let ms = reconstruct_linear_map(&multiple_stochastic_record(FRAC_PI_2).unwrap()).unwrap();
        let n = classify_positivity(&ms, DEFAULT_POSITIVITY_SAMPLES);
        assert_eq!(n.tag, PositivityTag::Negative);
        let w = n.witness.unwrap();
        assert!(max_abs_diff(w.matrix(), axis_state(1, false).matrix()) < 1e-12);
        assert!((n.witness_image_min_eigenvalue.unwrap() + 0.5).abs() < 1e-10);
    }

    #[test]
    fn contraction_maps() {
        let half = DensityMatrix::maximally_mixed(2);
        let id = map_from_contraction(&UnitaryOperator::identity(4), &half).unwrap();
        assert!(max_abs_diff(&id.b_matrix(), &SuperOp::identity(2).b_matrix()) < 1e-15);
        for x in [0.0, FRAC_PI_4, 1.7] {
            let s = map_from_contraction(&heisenberg_unitary(x), &half).unwrap();
            assert!(max_abs_diff(&s.b_matrix(), &sact(x)) < 1e-10);
        }
        assert!(map_from_contraction(&UnitaryOperator::identity(4), &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn correlated_construction() {
        let x = FRAC_PI_4;
        let u = heisenberg_unitary(x);
        let rho = c23_family(0.5);
        let a = map_from_correlated_state(&u, &rho, &mixed_inputs(0.4)).unwrap();
        assert_eq!(a.form(), Form::AForm);
        let b = dynamical_map(&u, &rho).unwrap();
        assert!(max_abs_diff(&a.b_matrix(), &b.b_matrix()) < 1e-10);
        let ev = a.eigenvalues();
        for (got, want) in ev.iter().zip([1.2654, 0.3750, 0.2346, 0.1250]) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }

        let plain = map_from_correlated_state(&u, &c23_family(0.0), &mixed_inputs(1.0)).unwrap();
        let reference = map_from_contraction(&u, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(max_abs_diff(&plain.b_matrix(), &reference.b_matrix()) < 1e-10);

        assert!(matches!(
            map_from_correlated_state(&u, &rho, &mixed_inputs(1.0)),
            Err(Error::Incompatible(_))
        ));
        let dependent = vec![bloch_state([0.1, 0.0, 0.0]); 4];
        assert!(matches!(
            map_from_correlated_state(&u, &rho, &dependent),
            Err(Error::LinearDependence { .. })
        ));
    }

    #[test]
    fn compatibility_domain() {
        let rho = c23_family(0.5);
        assert!(compatibility_check(&rho, &BlochVector::new(0.0, 0.0, 0.0).unwrap()));
        assert!(!compatibility_check(&rho, &BlochVector::new(0.0, 1.0, 0.0).unwrap()));
        assert!(compatibility_check(&rho, &BlochVector::new(0.0, 0.5, 0.0).unwrap()));
        assert!(compatibility_check(&rho, &BlochVector::new(0.0, -0.5, 0.0).unwrap()));

        let mut rng = random::seeded(14);
        let generic = random::random_bipartite(2, 2, &mut rng);
        assert!(compatibility_check(&generic, &linalg::density_to_bloch(&generic.reduced_system()).unwrap()));
    }

    #[test]
    fn dilation_round_trips() {
        let cases = vec![
            SuperOp::identity(2),
            map_from_contraction(&heisenberg_unitary(FRAC_PI_3), &DensityMatrix::maximally_mixed(2)).unwrap(),
            SuperOp::depolarizing(2),
            SuperOp::depolarizing(3),
        ];
        for s in cases {
            let (u, rho_e) = minimal_dilation(&s).unwrap();
            let d = s.dim();
            assert_eq!(u.dim(), d * d * d);
            assert!((rho_e.purity() - 1.0).abs() < 1e-12);
            let back = map_from_contraction(&u, &rho_e).unwrap();
            assert!(max_abs_diff(&back.b_matrix(), &s.b_matrix()) < 1e-9);
        }
        assert!(minimal_dilation(&SuperOp::transpose_map(2)).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = SuperOp::depolarizing(2);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"form\""));
        let back: SuperOp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}

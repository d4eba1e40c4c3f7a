//! Dense complex matrix layer.
//!
//! Composite indices are system-major throughout the crate: for a pair of
//! factors of dimensions `(d_a, d_b)` the flat index of `(i, j)` is
//! `d_b * i + j`, which is exactly the layout produced by [`kron`].

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteState;
use crate::error::{Error, Result};
use crate::tolerance::{self, ToleranceConfig};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const IM: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max |m[r,s] − conj(m[s,r])|.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for s in r..n {
            worst = worst.max((m[(r, s)] - m[(s, r)].conj()).norm());
        }
    }
    worst
}

/// Max |U†U − 𝕀| entry.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()))
}

/// Hilbert–Schmidt product Tr[A† B].
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub(crate) fn square_dim(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

/// Pauli matrix σ_j for j = 1, 2, 3; `pauli(0)` is the 2×2 identity.
pub fn pauli(j: usize) -> CMatrix {
    match j {
        0 => identity(2),
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ZERO, -IM, IM, ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index must be 0..=3, got {j}"),
    }
}

/// Σ_j a_j σ_j.
pub fn pauli_combination(a: &[f64; 3]) -> CMatrix {
    (1..=3).fold(CMatrix::zeros(2, 2), |acc, j| acc + pauli(j) * c(a[j - 1], 0.0))
}

/// Traceless Hermitian basis with Tr[B_i B_j] = 2δ_ij.
///
/// Generalized Gell-Mann order: all symmetric `E_jk + E_kj` (j<k, row-major
/// pair order), then all antisymmetric `−iE_jk + iE_kj`, then the diagonal
/// ones. For `dim = 2` this is σ1, σ2, σ3.
pub fn pauli_basis(dim: usize) -> Result<Vec<CMatrix>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|j| ((j + 1)..dim).map(move |k| (j, k)))
        .collect();
    let mut basis = Vec::with_capacity(dim * dim - 1);
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(dim, dim);
        m[(j, k)] = ONE;
        m[(k, j)] = ONE;
        basis.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(dim, dim);
        m[(j, k)] = -IM;
        m[(k, j)] = IM;
        basis.push(m);
    }
    for l in 1..dim {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..l {
            m[(j, j)] = c(norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * norm, 0.0);
        basis.push(m);
    }
    Ok(basis)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Which factor of a bipartite matrix to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    System,
    Environment,
}

/// Partial trace of a `(d_s·d_e)`-square matrix over the factor `which`.
pub fn partial_trace_matrix(
    m: &CMatrix,
    d_s: usize,
    d_e: usize,
    which: Subsystem,
) -> Result<CMatrix> {
    let n = square_dim(m)?;
    if n != d_s * d_e {
        return Err(Error::DimensionMismatch {
            expected: d_s * d_e,
            found: n,
        });
    }
    Ok(match which {
        Subsystem::Environment => CMatrix::from_fn(d_s, d_s, |r, s| {
            (0..d_e).map(|a| m[(r * d_e + a, s * d_e + a)]).sum()
        }),
        Subsystem::System => CMatrix::from_fn(d_e, d_e, |a, b| {
            (0..d_s).map(|r| m[(r * d_e + a, r * d_e + b)]).sum()
        }),
    })
}

/// Reduced state of a bipartite density matrix after tracing out `which`.
pub fn partial_trace(rho: &BipartiteState, which: Subsystem) -> DensityMatrix {
    let m = partial_trace_matrix(rho.matrix(), rho.d_s(), rho.d_e(), which)
        .expect("bipartite state dimensions are validated at construction");
    DensityMatrix::from_trusted(m)
}

/// d×d Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::new_with(m, &tolerance::current())
    }

    pub fn new_with(m: CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        validate_unit_trace_hermitian(&m, tol)?;
        let min = min_eigenvalue(&m);
        if min < tol.psd {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { matrix: m })
    }

    /// Wrap a matrix that is a density matrix by construction (reduced states,
    /// normalized projections).
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        debug_assert!(m.nrows() == m.ncols());
        Self { matrix: m }
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) nonzero ket.
    pub fn from_ket(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidParameter("ket must be nonzero and finite".into()));
        }
        let v = psi / c(norm, 0.0);
        Ok(Self::from_trusted(&v * v.adjoint()))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_trusted(identity(d) / c(d as f64, 0.0))
    }

    /// Computational basis projector |k⟩⟨k|.
    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = ONE;
        Self::from_trusted(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Tr[ρ²].
    pub fn purity(&self) -> f64 {
        hs_inner(&self.matrix, &self.matrix).re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }
}

/// Hermitian and unit-trace within tolerance; positivity is not checked.
pub fn validate_unit_trace_hermitian(m: &CMatrix, tol: &ToleranceConfig) -> Result<usize> {
    let d = square_dim(m)?;
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let h = hermiticity_residual(m);
    if h > tol.herm {
        return Err(Error::NotHermitian(h));
    }
    let tr = trace(m).re;
    if (tr - 1.0).abs() > tol.trace {
        return Err(Error::InvalidTrace(tr));
    }
    Ok(d)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of the Hermitian part of `m`, sorted descending.
pub fn eigenvalues_desc(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Qubit Bloch vector, |a| ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        Self::try_from([a1, a2, a3])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2: f64 = a.iter().map(|x| x * x).sum();
        if n2 > 1.0 + 1e-12 {
            return Err(Error::NonPhysicalBloch(n2.sqrt()));
        }
        Ok(Self(a))
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(b: BlochVector) -> Self {
        b.0
    }
}

/// ½(𝕀 + Σ a_j σ_j).
pub fn bloch_to_density(a: &BlochVector) -> DensityMatrix {
    DensityMatrix::from_trusted((identity(2) + pauli_combination(&a.0)) * c(0.5, 0.0))
}

/// a_j = Tr[ρ σ_j].
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    let mut a = [0.0; 3];
    for (j, slot) in a.iter_mut().enumerate() {
        let z = trace(&(rho.matrix() * pauli(j + 1)));
        if z.im.abs() > 1e-9 {
            return Err(Error::NotHermitian(z.im.abs()));
        }
        *slot = z.re;
    }
    BlochVector::try_from(a)
}

/// Square matrix with U†U = 𝕀.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: CMatrix,
}

impl UnitaryOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::new_with(m, &tolerance::current())
    }

    pub fn new_with(m: CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        square_dim(&m)?;
        let r = unitarity_residual(&m);
        if r > tol.unitary {
            return Err(Error::NotUnitary(r));
        }
        Ok(Self { matrix: m })
    }

    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self { matrix: m }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_trusted(identity(d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::from_trusted(self.matrix.adjoint())
    }

    pub fn compose(&self, other: &UnitaryOperator) -> Self {
        Self::from_trusted(&self.matrix * &other.matrix)
    }

    /// U ρ U† for any square matrix of matching size.
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        &self.matrix * m * self.matrix.adjoint()
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.eigenvectors.ncols();
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(
            d,
            self.eigenvalues.iter().map(|&x| c(x, 0.0)),
        ));
        &self.eigenvectors * diag * self.eigenvectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }
}

pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    hermitian_eig_with(m, &tolerance::current())
}

/// Eigenvalues sorted descending. Within a cluster of eigenvalues equal to
/// within `tol.herm`, eigenvectors are ordered lexicographically by their
/// components after rotating each vector's phase so that its first nonzero
/// component is real and positive.
pub fn hermitian_eig_with(m: &CMatrix, tol: &ToleranceConfig) -> Result<HermitianEigen> {
    let d = square_dim(m)?;
    let h = hermiticity_residual(m);
    if h > tol.herm {
        return Err(Error::NotHermitian(h));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let vecs: Vec<CVector> = (0..d)
        .map(|k| phase_normalize(eig.eigenvectors.column(k).into_owned()))
        .collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d
            && (eig.eigenvalues[order[start]] - eig.eigenvalues[order[end]]).abs() <= tol.herm
        {
            end += 1;
        }
        order[start..end].sort_by(|&i, &j| lex_cmp(&vecs[i], &vecs[j]));
        start = end;
    }

    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let cols: Vec<CVector> = order.iter().map(|&k| vecs[k].clone()).collect();
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: CMatrix::from_columns(&cols),
    })
}

fn phase_normalize(v: CVector) -> CVector {
    let pivot = v.iter().find(|z| z.norm() > 1e-12).copied();
    match pivot {
        Some(z) => v * (z.conj() / z.norm()),
        None => v,
    }
}

fn lex_cmp(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// exp(−iHt) through the eigendecomposition of H.
pub fn expm_hermitian_generator(h: &CMatrix, t: f64) -> Result<UnitaryOperator> {
    let eig = hermitian_eig(h)?;
    let d = eig.eigenvalues.len();
    let phases = CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
    ));
    let u = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
    UnitaryOperator::new(u)
}

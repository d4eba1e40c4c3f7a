//! System–environment states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, identity, kron, max_abs, partial_trace, pauli, pauli_combination, trace, CMatrix,
    DensityMatrix, Subsystem,
};
use crate::tolerance::{self, ToleranceConfig};

/// Coefficients of ¼{𝕀⊗𝕀 + a_j σ_j⊗𝕀 + b_k 𝕀⊗σ_k + c_jk σ_j⊗σ_k}.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoQubitParams {
    #[serde(default)]
    pub a: [f64; 3],
    #[serde(default)]
    pub b: [f64; 3],
    /// `c[j][k]` multiplies σ_{j+1}⊗σ_{k+1}.
    #[serde(default)]
    pub c: [[f64; 3]; 3],
}

impl TwoQubitParams {
    /// Only c23 nonzero among the correlations, no environment polarization.
    pub fn correlated_family(a: [f64; 3], c23: f64) -> Self {
        let mut c = [[0.0; 3]; 3];
        c[1][2] = c23;
        Self { a, b: [0.0; 3], c }
    }

    pub fn c23(&self) -> f64 {
        self.c[1][2]
    }

    /// True when every correlation other than c23, and every b_k, vanishes.
    pub fn is_c23_family(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0)
            && (0..3).all(|j| (0..3).all(|k| (j, k) == (1, 2) || self.c[j][k] == 0.0))
    }

    pub fn matrix(&self) -> CMatrix {
        let mut m = identity(4);
        m += kron(&pauli_combination(&self.a), &identity(2));
        m += kron(&identity(2), &pauli_combination(&self.b));
        m += self.correlation_operator();
        m * c(0.25, 0.0)
    }

    /// b_k 𝕀⊗σ_k + c_jk σ_j⊗σ_k, the part kept fixed when the system state is
    /// replaced.
    fn environment_and_correlation_operator(&self) -> CMatrix {
        kron(&identity(2), &pauli_combination(&self.b)) + self.correlation_operator()
    }

    fn correlation_operator(&self) -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        for j in 0..3 {
            for k in 0..3 {
                if self.c[j][k] != 0.0 {
                    m += kron(&pauli(j + 1), &pauli(k + 1)) * c(self.c[j][k], 0.0);
                }
            }
        }
        m
    }
}

/// Density matrix on a `d_s·d_e` space, system factor first.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    d_s: usize,
    d_e: usize,
    state: DensityMatrix,
    params: Option<TwoQubitParams>,
}

impl BipartiteState {
    pub fn new(m: CMatrix, d_s: usize, d_e: usize) -> Result<Self> {
        Self::new_with(m, d_s, d_e, &tolerance::current())
    }

    pub fn new_with(m: CMatrix, d_s: usize, d_e: usize, tol: &ToleranceConfig) -> Result<Self> {
        if d_s == 0 || d_e == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if m.nrows() != d_s * d_e {
            return Err(Error::DimensionMismatch {
                expected: d_s * d_e,
                found: m.nrows(),
            });
        }
        Ok(Self {
            d_s,
            d_e,
            state: DensityMatrix::new_with(m, tol)?,
            params: None,
        })
    }

    pub fn product(rho_s: &DensityMatrix, rho_e: &DensityMatrix) -> Self {
        Self {
            d_s: rho_s.dim(),
            d_e: rho_e.dim(),
            state: DensityMatrix::from_trusted(kron(rho_s.matrix(), rho_e.matrix())),
            params: None,
        }
    }

    /// Structured two-qubit state; fails if the coefficients give a
    /// non-positive matrix.
    pub fn two_qubit(params: TwoQubitParams) -> Result<Self> {
        let mut s = Self::new(params.matrix(), 2, 2)?;
        s.params = Some(params);
        Ok(s)
    }

    /// ¼{𝕀⊗𝕀 + a_j σ_j⊗𝕀 + c23 σ2⊗σ3}.
    pub fn correlated_family(a: [f64; 3], c23: f64) -> Result<Self> {
        Self::two_qubit(TwoQubitParams::correlated_family(a, c23))
    }

    pub(crate) fn from_trusted(m: CMatrix, d_s: usize, d_e: usize) -> Self {
        Self {
            d_s,
            d_e,
            state: DensityMatrix::from_trusted(m),
            params: None,
        }
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn dim(&self) -> usize {
        self.d_s * self.d_e
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn matrix(&self) -> &CMatrix {
        self.state.matrix()
    }

    pub fn params(&self) -> Option<&TwoQubitParams> {
        self.params.as_ref()
    }

    /// ρ^S = Tr_E ρ^SE.
    pub fn reduced_system(&self) -> DensityMatrix {
        partial_trace(self, Subsystem::Environment)
    }

    /// ρ^E = Tr_S ρ^SE.
    pub fn reduced_environment(&self) -> DensityMatrix {
        partial_trace(self, Subsystem::System)
    }

    /// χ = ρ^SE − ρ^S⊗ρ^E.
    pub fn correlation_matrix(&self) -> CMatrix {
        self.matrix() - kron(self.reduced_system().matrix(), self.reduced_environment().matrix())
    }

    pub fn is_product(&self, tol: f64) -> bool {
        max_abs(&self.correlation_matrix()) <= tol
    }

    /// Linear embedding of a system operator X into the total space keeping
    /// the environment and correlation content of this state:
    /// `E(X) = X⊗τ + Tr(X)·Δ`.
    ///
    /// For structured two-qubit states τ = ½𝕀 and Δ = ¼(b_k 𝕀⊗σ_k + c_jk
    /// σ_j⊗σ_k), i.e. the Bloch vector a is replaced and b, c are kept.
    /// Otherwise τ = ρ^E and Δ = χ. In both cases E(ρ^S) = ρ^SE.
    pub fn embed(&self, x: &CMatrix) -> CMatrix {
        let tr = trace(x);
        match &self.params {
            Some(p) => {
                kron(x, &(identity(2) * c(0.5, 0.0)))
                    + p.environment_and_correlation_operator() * (tr * 0.25)
            }
            None => kron(x, self.reduced_environment().matrix()) + self.correlation_matrix() * tr,
        }
    }
}

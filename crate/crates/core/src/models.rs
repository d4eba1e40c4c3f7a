//! The two-qubit toy model used by the scenarios: a Heisenberg exchange
//! coupling between a system qubit and an environment qubit, and the standard
//! set of qubit preparations.

use crate::error::Result;
use crate::linalg::{
    bloch_to_density, expm_hermitian_generator, kron, pauli, BlochVector, CMatrix,
    DensityMatrix, UnitaryOperator,
};
use crate::prep::{rotation_to_state, PreparationMap, STANDARD_INPUT_AXES};

/// H = Σ_j σ_j⊗σ_j (ω = 1).
pub fn heisenberg_hamiltonian() -> CMatrix {
    (1..=3).fold(CMatrix::zeros(4, 4), |acc, j| acc + kron(&pauli(j), &pauli(j)))
}

/// exp(−iωtH) with the argument given as `2ωt`.
pub fn heisenberg_unitary(two_omega_t: f64) -> UnitaryOperator {
    expm_hermitian_generator(&heisenberg_hamiltonian(), two_omega_t / 2.0)
        .expect("Heisenberg generator is Hermitian")
}

/// Bloch vector of P(j,±): j = 1..3 are the coordinate axes, j = 4, 5, 6 the
/// diagonals (σ1+σ2)/√2, (σ1+σ3)/√2, (σ2+σ3)/√2.
pub fn axis_bloch(j: usize, plus: bool) -> [f64; 3] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = match j {
        1 => [1.0, 0.0, 0.0],
        2 => [0.0, 1.0, 0.0],
        3 => [0.0, 0.0, 1.0],
        4 => [h, h, 0.0],
        5 => [h, 0.0, h],
        6 => [0.0, h, h],
        _ => panic!("axis index must be 1..=6, got {j}"),
    };
    if plus {
        v
    } else {
        [-v[0], -v[1], -v[2]]
    }
}

/// P(j,±) = ½(𝕀 ± n_j·σ).
pub fn axis_state(j: usize, plus: bool) -> DensityMatrix {
    bloch_state(axis_bloch(j, plus))
}

/// Panics when |a| > 1; meant for literal vectors.
pub fn bloch_state(a: [f64; 3]) -> DensityMatrix {
    bloch_to_density(&BlochVector::try_from(a).expect("Bloch vector of length <= 1"))
}

/// P(1,−), P(1,+), P(2,+), P(3,+).
pub fn standard_inputs() -> Vec<DensityMatrix> {
    STANDARD_INPUT_AXES.iter().map(|&a| bloch_state(a)).collect()
}

/// Pin to |0⟩ then rotate onto each standard input.
pub fn standard_stochastic_preps() -> Vec<PreparationMap> {
    stochastic_preps_for(&standard_inputs())
}

pub fn stochastic_preps_for(targets: &[DensityMatrix]) -> Vec<PreparationMap> {
    let zero = DensityMatrix::basis_state(2, 0);
    targets
        .iter()
        .map(|t| {
            let v = rotation_to_state(&zero, t).expect("pure qubit states");
            PreparationMap::stochastic(zero.clone(), v).expect("valid composite")
        })
        .collect()
}

pub fn standard_projective_preps() -> Vec<PreparationMap> {
    projective_preps_for(&standard_inputs())
}

pub fn projective_preps_for(targets: &[DensityMatrix]) -> Vec<PreparationMap> {
    targets
        .iter()
        .map(|t| PreparationMap::projective(t.clone()).expect("pure state is a rank-1 projector"))
        .collect()
}

/// `n` equally spaced points on [0, 2π], endpoints included.
pub fn default_grid(n: usize) -> Vec<f64> {
    let top = 2.0 * std::f64::consts::PI;
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|k| top * k as f64 / (n - 1) as f64).collect(),
    }
}

pub const DEFAULT_GRID_POINTS: usize = 400;

/// ½(𝕀 + εσ3 − √(1−ε²)σ1).
pub fn control_error_state(epsilon: f64) -> Result<DensityMatrix> {
    let v = crate::prep::control_error_rotation(epsilon)?;
    let zero = DensityMatrix::basis_state(2, 0);
    DensityMatrix::new(v.conjugate(zero.matrix()))
}

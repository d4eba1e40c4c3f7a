//! Seeded random states, unitaries and correlated states for tests and probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bipartite::BipartiteState;
use crate::linalg::{c, trace, CMatrix, CVector, DensityMatrix, UnitaryOperator};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of independent standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase of R's
/// diagonal absorbed into Q).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryOperator {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    UnitaryOperator::from_trusted(q)
}

pub fn haar_ket<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let g = ginibre(d, 1, rng);
    let v = CVector::from_column_slice(g.as_slice());
    let n = v.norm();
    v / c(n, 0.0)
}

pub fn haar_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let v = haar_ket(d, rng);
    DensityMatrix::from_trusted(&v * v.adjoint())
}

/// Hilbert–Schmidt random mixed state G G† / Tr[G G†].
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let tr = trace(&m);
    DensityMatrix::from_trusted(m / tr)
}

/// Random (generally correlated) bipartite state of full rank.
pub fn random_bipartite<R: Rng + ?Sized>(d_s: usize, d_e: usize, rng: &mut R) -> BipartiteState {
    let rho = random_density(d_s * d_e, rng);
    BipartiteState::from_trusted(rho.into_matrix(), d_s, d_e)
}

/// Uniformly random point of the unit sphere.
pub fn unit_vector3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Random Hermitian matrix (GUE-like scaling).
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

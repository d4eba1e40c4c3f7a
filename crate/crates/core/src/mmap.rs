//! The M-map: the rank-6 tensor that maps any preparation to its output.
//!
//! Storage is a d³×d³ matrix with `flat3(r, r', r'') = d²·r + d·r' + r''`:
//!
//! `T[flat3(r,r',r''), flat3(s,s',s'')] =
//!   Σ_{ε,α,β} U[(r,ε),(r',α)]·ρ^SE[(r'',α),(s'',β)]·conj(U[(s,ε),(s',β)])`.
//!
//! Contracting the (r', r''; s', s'') legs with a preparation's B-form gives
//! the unnormalized output `Q̃[r,s]`, whose trace is the preparation
//! probability.

use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteState;
use crate::error::{Error, Result};
use crate::io::{entries_to_matrix, matrix_to_entries, square_matrix, Entries};
use crate::linalg::{
    self, c, density_to_bloch, identity, max_abs, max_abs_diff, pauli, trace, CMatrix,
    DensityMatrix, UnitaryOperator, ZERO,
};
use crate::maps::{evolve_and_reduce, Form, SuperOp};
use crate::models::{axis_bloch, bloch_state};
use crate::prep::PreparationMap;
use crate::tolerance::{self, ToleranceConfig};
use crate::tomo::TomographyRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MMapJson", into = "MMapJson")]
pub struct MMapTensor {
    dim: usize,
    tensor: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct MMapJson {
    dim: usize,
    entries: Entries,
}

impl TryFrom<MMapJson> for MMapTensor {
    type Error = Error;
    fn try_from(j: MMapJson) -> Result<Self> {
        let n = j.dim.pow(3);
        MMapTensor::from_matrix(j.dim, entries_to_matrix(&j.entries, n, n)?)
    }
}

impl From<MMapTensor> for MMapJson {
    fn from(m: MMapTensor) -> Self {
        MMapJson {
            dim: m.dim,
            entries: matrix_to_entries(&m.tensor),
        }
    }
}

impl MMapTensor {
    /// Wrap a d³×d³ matrix. Structural properties are not enforced, since the
    /// same layout holds ℒ and the memory matrix 𝒦.
    pub fn from_matrix(dim: usize, tensor: CMatrix) -> Result<Self> {
        let n = linalg::square_dim(&tensor)?;
        if dim == 0 || n != dim.pow(3) {
            return Err(Error::DimensionMismatch {
                expected: dim.pow(3),
                found: n,
            });
        }
        Ok(Self { dim, tensor })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.tensor
    }

    fn idx(&self, r: usize, rp: usize, rpp: usize) -> usize {
        let d = self.dim;
        d * d * r + d * rp + rpp
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(&self.tensor)
    }

    pub fn trace(&self) -> f64 {
        trace(&self.tensor).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.tensor)
    }

    /// Q̃[r,s] = Σ T[flat3(r,r',r''), flat3(s,s',s'')]·B[flat(r',r''), flat(s',s'')].
    pub fn contract(&self, prep_b: &SuperOp) -> Result<CMatrix> {
        let d = self.dim;
        if prep_b.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: prep_b.dim(),
            });
        }
        let b = prep_b.b_matrix();
        let mut q = CMatrix::zeros(d, d);
        for r in 0..d {
            for s in 0..d {
                let mut acc = ZERO;
                for rp in 0..d {
                    for rpp in 0..d {
                        for sp in 0..d {
                            for spp in 0..d {
                                let w = b[(d * rp + rpp, d * sp + spp)];
                                if w != ZERO {
                                    acc += self.tensor[(self.idx(r, rp, rpp), self.idx(s, sp, spp))] * w;
                                }
                            }
                        }
                    }
                }
                q[(r, s)] = acc;
            }
        }
        Ok(q)
    }

    /// ⟨X|M|Y⟩[r,s] = Σ T[flat3(r,r',r''), flat3(s,s',s'')]·X[r',r'']·conj(Y[s',s'']).
    pub fn bracket(&self, x: &CMatrix, y: &CMatrix) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |r, s| {
            let mut acc = ZERO;
            for rp in 0..d {
                for rpp in 0..d {
                    for sp in 0..d {
                        for spp in 0..d {
                            acc += self.tensor[(self.idx(r, rp, rpp), self.idx(s, sp, spp))]
                                * x[(rp, rpp)]
                                * y[(sp, spp)].conj();
                        }
                    }
                }
            }
            acc
        })
    }
}

pub fn build_mmap(u: &UnitaryOperator, rho_se: &BipartiteState) -> Result<MMapTensor> {
    if u.dim() != rho_se.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_se.dim(),
            found: u.dim(),
        });
    }
    let (d, d_e) = (rho_se.d_s(), rho_se.d_e());
    let um = u.matrix();
    let rho = rho_se.matrix();
    // Z[(r,ε,r'), (r'',s'',β)] = Σ_α U[(r,ε),(r',α)]·ρ[(r'',α),(s'',β)]
    let mut z = CMatrix::zeros(d * d_e * d, d * d * d_e);
    for r in 0..d {
        for eps in 0..d_e {
            for rp in 0..d {
                let row = (r * d_e + eps) * d + rp;
                for rpp in 0..d {
                    for spp in 0..d {
                        for beta in 0..d_e {
                            let mut acc = ZERO;
                            for alpha in 0..d_e {
                                acc += um[(r * d_e + eps, rp * d_e + alpha)]
                                    * rho[(rpp * d_e + alpha, spp * d_e + beta)];
                            }
                            z[(row, (rpp * d + spp) * d_e + beta)] = acc;
                        }
                    }
                }
            }
        }
    }
    let n = d * d * d;
    let mut t = CMatrix::zeros(n, n);
    for r in 0..d {
        for rp in 0..d {
            for rpp in 0..d {
                for s in 0..d {
                    for sp in 0..d {
                        for spp in 0..d {
                            let mut acc = ZERO;
                            for eps in 0..d_e {
                                let row = (r * d_e + eps) * d + rp;
                                for beta in 0..d_e {
                                    acc += z[(row, (rpp * d + spp) * d_e + beta)]
                                        * um[(s * d_e + eps, sp * d_e + beta)].conj();
                                }
                            }
                            t[(d * d * r + d * rp + rpp, d * d * s + d * sp + spp)] = acc;
                        }
                    }
                }
            }
        }
    }
    MMapTensor::from_matrix(d, t)
}

pub fn contract_with_preparation(m: &MMapTensor, prep: &PreparationMap) -> Result<(DensityMatrix, f64)> {
    contract_with_preparation_with(m, prep, &tolerance::current())
}

/// Output state and probability of `prep`. Preparations with an explicit
/// environment override are rejected: the M-map only knows the original
/// environment.
pub fn contract_with_preparation_with(
    m: &MMapTensor,
    prep: &PreparationMap,
    tol: &ToleranceConfig,
) -> Result<(DensityMatrix, f64)> {
    if prep.overrides_environment() {
        return Err(Error::UnsupportedPreparation(format!(
            "`{}` replaces the environment, which the M-map cannot express",
            prep.label()
        )));
    }
    let b = prep.superop().ok_or_else(|| {
        Error::UnsupportedPreparation(format!("`{}` has no superoperator", prep.label()))
    })?;
    let q = m.contract(b)?;
    let probability = trace(&q).re;
    if probability.is_nan() || probability <= tol.zero_prob {
        return Err(Error::ZeroProbability {
            label: prep.label(),
            probability,
        });
    }
    Ok((DensityMatrix::from_trusted(q / c(probability, 0.0)), probability))
}

/// ρ^S[r'',s''] = (1/d)·Σ_{r,r'} T[flat3(r,r',r''), flat3(r,r',s'')].
pub fn initial_state_from_mmap(m: &MMapTensor) -> DensityMatrix {
    let d = m.dim;
    let rho = CMatrix::from_fn(d, d, |rpp, spp| {
        let mut acc = ZERO;
        for r in 0..d {
            for rp in 0..d {
                acc += m.tensor[(m.idx(r, rp, rpp), m.idx(r, rp, spp))];
            }
        }
        acc / c(d as f64, 0.0)
    });
    DensityMatrix::from_trusted(rho)
}

/// Λ[flat(r,r'), flat(s,s')] = Σ_{r''} T[flat3(r,r',r''), flat3(s,s',r'')]:
/// the process seen by an ideal pin-and-rotate preparation.
pub fn stochastic_map_from_mmap(m: &MMapTensor) -> SuperOp {
    let d = m.dim;
    let b = CMatrix::from_fn(d * d, d * d, |row, col| {
        let (r, rp) = (row / d, row % d);
        let (s, sp) = (col / d, col % d);
        (0..d).map(|k| m.tensor[(m.idx(r, rp, k), m.idx(s, sp, k))]).sum()
    });
    SuperOp::new(d, Form::BForm, b).expect("d²×d² by construction")
}

/// ℒ[flat3(r,r',r''), flat3(s,s',s'')] = Λ[flat(r,r'), flat(s,s')]·ρ^S[r'',s''].
pub fn uncorrelated_reference(m: &MMapTensor) -> MMapTensor {
    let d = m.dim;
    let lam = stochastic_map_from_mmap(m).b_matrix();
    let rho = initial_state_from_mmap(m);
    let rho = rho.matrix();
    let n = d * d * d;
    let t = CMatrix::from_fn(n, n, |row, col| {
        let (rr, rpp) = (row / d, row % d);
        let (ss, spp) = (col / d, col % d);
        lam[(rr, ss)] * rho[(rpp, spp)]
    });
    MMapTensor { dim: d, tensor: t }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemoryReport {
    /// 𝒦 = ℳ − ℒ in M-map layout.
    #[serde(with = "square_matrix")]
    pub k: CMatrix,
    /// χ^S(t): the identity-preparation contraction of 𝒦.
    #[serde(with = "square_matrix")]
    pub chi_s_t: CMatrix,
    /// max |𝒦|.
    pub norm: f64,
}

pub fn memory_matrix(m: &MMapTensor) -> MemoryReport {
    let l = uncorrelated_reference(m);
    let k = &m.tensor - &l.tensor;
    let km = MMapTensor { dim: m.dim, tensor: k };
    let chi = km
        .contract(PreparationMap::identity(m.dim).superop().expect("identity has a superop"))
        .expect("dimensions agree");
    let norm = max_abs(&km.tensor);
    MemoryReport {
        k: km.tensor,
        chi_s_t: chi,
        norm,
    }
}

/// Tr_E[U·χ·U†] with χ = ρ^SE − ρ^S⊗ρ^E, computed directly.
pub fn evolved_correlation(u: &UnitaryOperator, rho_se: &BipartiteState) -> Result<CMatrix> {
    if u.dim() != rho_se.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_se.dim(),
            found: u.dim(),
        });
    }
    Ok(evolve_and_reduce(
        u,
        &rho_se.correlation_matrix(),
        rho_se.d_s(),
        rho_se.d_e(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MMapProtocol {
    Nine,
    Twelve,
}

/// Labels and Bloch vectors of the twelve projections: the first nine are the
/// nine-projection protocol.
pub fn projection_set(protocol: MMapProtocol) -> Vec<(String, [f64; 3])> {
    let order: [(usize, bool); 12] = [
        (1, true),
        (1, false),
        (2, true),
        (2, false),
        (3, true),
        (3, false),
        (4, true),
        (5, true),
        (6, true),
        (4, false),
        (5, false),
        (6, false),
    ];
    let n = match protocol {
        MMapProtocol::Nine => 9,
        MMapProtocol::Twelve => 12,
    };
    order[..n]
        .iter()
        .map(|&(j, plus)| (format!("P({j},{})", if plus { '+' } else { '-' }), axis_bloch(j, plus)))
        .collect()
}

/// The qubit M-map combinations reachable with pure projective preparations:
/// `d_j = ⟨𝕀|ℳ|𝕀⟩ + ⟨σ_j|ℳ|σ_j⟩`, `e_j = ⟨𝕀|ℳ|σ_j⟩ + ⟨σ_j|ℳ|𝕀⟩` and
/// `f_jk = ⟨σ_j|ℳ|σ_k⟩ + ⟨σ_k|ℳ|σ_j⟩`. ⟨𝕀|ℳ|𝕀⟩ alone is not resolved, so
/// only pure preparations can be predicted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialMMap {
    pub protocol: Option<MMapProtocol>,
    #[serde(with = "square_matrix")]
    pub d1: CMatrix,
    #[serde(with = "square_matrix")]
    pub d2: CMatrix,
    #[serde(with = "square_matrix")]
    pub d3: CMatrix,
    #[serde(with = "square_matrix")]
    pub e1: CMatrix,
    #[serde(with = "square_matrix")]
    pub e2: CMatrix,
    #[serde(with = "square_matrix")]
    pub e3: CMatrix,
    #[serde(with = "square_matrix")]
    pub f12: CMatrix,
    #[serde(with = "square_matrix")]
    pub f13: CMatrix,
    #[serde(with = "square_matrix")]
    pub f23: CMatrix,
    /// Least-squares residual of the projection equations (max-abs).
    pub residual: f64,
}

impl PartialMMap {
    fn from_blocks(blocks: Vec<CMatrix>, protocol: Option<MMapProtocol>, residual: f64) -> Self {
        let mut it = blocks.into_iter();
        let mut next = || it.next().expect("nine blocks");
        Self {
            protocol,
            d1: next(),
            d2: next(),
            d3: next(),
            e1: next(),
            e2: next(),
            e3: next(),
            f12: next(),
            f13: next(),
            f23: next(),
            residual,
        }
    }

    pub fn blocks(&self) -> [&CMatrix; 9] {
        [
            &self.d1, &self.d2, &self.d3, &self.e1, &self.e2, &self.e3, &self.f12, &self.f13,
            &self.f23,
        ]
    }

    /// The combinations computed directly from a full qubit M-map.
    pub fn from_mmap(m: &MMapTensor) -> Result<Self> {
        if m.dim != 2 {
            return Err(Error::UnsupportedDimension(m.dim));
        }
        let id = identity(2);
        let ii = m.bracket(&id, &id);
        let mut blocks = Vec::with_capacity(9);
        for j in 1..=3 {
            blocks.push(&ii + m.bracket(&pauli(j), &pauli(j)));
        }
        for j in 1..=3 {
            blocks.push(m.bracket(&id, &pauli(j)) + m.bracket(&pauli(j), &id));
        }
        for (j, k) in [(1, 2), (1, 3), (2, 3)] {
            blocks.push(m.bracket(&pauli(j), &pauli(k)) + m.bracket(&pauli(k), &pauli(j)));
        }
        Ok(Self::from_blocks(blocks, None, 0.0))
    }

    /// r·Q for the pure projective preparation with Bloch vector `a`:
    /// `4rQ = Σ a_j² d_j + Σ a_j e_j + Σ_{j<k} a_j a_k f_jk`.
    pub fn predict(&self, a: [f64; 3]) -> Result<CMatrix> {
        let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::MixedPreparation(n));
        }
        let coeffs = design_row(a);
        let mut out = CMatrix::zeros(2, 2);
        for (w, b) in coeffs.iter().zip(self.blocks()) {
            out += b * c(*w, 0.0);
        }
        Ok(out * c(0.25, 0.0))
    }
}

fn design_row(a: [f64; 3]) -> [f64; 9] {
    [
        a[0] * a[0],
        a[1] * a[1],
        a[2] * a[2],
        a[0],
        a[1],
        a[2],
        a[0] * a[1],
        a[0] * a[2],
        a[1] * a[2],
    ]
}

/// Recover a [`PartialMMap`] from an oracle that performs the projective
/// preparation onto the given pure state and returns `(r, Q)`.
///
/// The projection equations are solved by least squares (SVD), separately
/// for the real and imaginary part of each output entry.
pub fn mmap_tomography<F>(mut oracle: F, protocol: MMapProtocol) -> Result<PartialMMap>
where
    F: FnMut(&DensityMatrix) -> Result<(f64, CMatrix)>,
{
    let tol = tolerance::current();
    let projections = projection_set(protocol);
    let n = projections.len();
    let mut design = nalgebra::DMatrix::<f64>::zeros(n, 9);
    let mut rhs = nalgebra::DMatrix::<f64>::zeros(n, 8);
    for (m, (label, a)) in projections.iter().enumerate() {
        let (r, q) = oracle(&bloch_state(*a))?;
        if q.nrows() != 2 || q.ncols() != 2 {
            return Err(Error::UnsupportedDimension(q.nrows()));
        }
        if r.is_nan() || r <= tol.zero_prob {
            return Err(Error::ZeroProbability {
                label: label.clone(),
                probability: r,
            });
        }
        for (k, w) in design_row(*a).iter().enumerate() {
            design[(m, k)] = *w;
        }
        for (e, z) in q.transpose().iter().enumerate() {
            rhs[(m, 2 * e)] = 4.0 * r * z.re;
            rhs[(m, 2 * e + 1)] = 4.0 * r * z.im;
        }
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
    if rank < 9 {
        return Err(Error::ProtocolDegenerate(rank));
    }
    let x = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let residual = (&design * &x - &rhs).abs().max();
    let blocks = (0..9)
        .map(|k| {
            CMatrix::from_fn(2, 2, |r, s| {
                let e = 2 * r + s;
                c(x[(k, 2 * e)], x[(k, 2 * e + 1)])
            })
        })
        .collect();
    Ok(PartialMMap::from_blocks(blocks, Some(protocol), residual))
}

/// Oracle that contracts a known M-map with projective preparations.
pub fn mmap_oracle(m: &MMapTensor) -> impl FnMut(&DensityMatrix) -> Result<(f64, CMatrix)> + '_ {
    move |p: &DensityMatrix| {
        let prep = PreparationMap::projective(p.clone())?;
        let (q, r) = contract_with_preparation(m, &prep)?;
        Ok((r, q.into_matrix()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Linear,
    MMap,
    Neither,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleResult {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SumRuleReport {
    pub linear_rules: Vec<RuleResult>,
    pub mmap_rules: Vec<RuleResult>,
    /// |r(j,+) + r(j,−) − 1| for j = 1..6; reported, not part of the verdict.
    pub probability_completeness: Vec<f64>,
    pub verdict: Verdict,
}

pub const SUM_RULE_TOLERANCE: f64 = 1e-8;

/// Evaluate the eight linear sum rules and the three M-map rules on a
/// twelve-projection record. Rows are matched to projections by their input
/// Bloch vector (within 1e-6).
///
/// With `Σ_j = Q(j,+) + Q(j,−)` and `h = 1/√2` the linear rules are
/// `Σ1 = Σ2`, `Σ2 = Σ3`,
/// `Q(4,+) = (½ − h)Σ1 + h(Q(1,+) + Q(2,+))` and likewise for 5 (1, 3) and
/// 6 (2, 3), and `Σ_k = Σ1` for k = 4, 5, 6. The M-map rules are
/// `√2(r₄₊Q(4,+) − r₄₋Q(4,−)) = r₁₊Q(1,+) − r₁₋Q(1,−) + r₂₊Q(2,+) − r₂₋Q(2,−)`
/// and likewise for 5 (1, 3) and 6 (2, 3).
pub fn sum_rule_check(record: &TomographyRecord) -> Result<SumRuleReport> {
    if record.dim() != Some(2) {
        return Err(Error::UnsupportedDimension(record.dim().unwrap_or(0)));
    }
    let mut q: Vec<Option<(f64, CMatrix)>> = vec![None; 12];
    let projections = projection_set(MMapProtocol::Twelve);
    for row in record.rows() {
        let Ok(b) = density_to_bloch(&DensityMatrix::from_trusted(row.input.clone())) else {
            continue;
        };
        let a = b.components();
        if let Some(k) = projections
            .iter()
            .position(|(_, p)| (0..3).all(|i| (p[i] - a[i]).abs() <= 1e-6))
        {
            if q[k].is_none() {
                if let Some(out) = &row.output {
                    q[k] = Some((row.probability, out.clone()));
                }
            }
        }
    }
    let missing: Vec<&str> = projections
        .iter()
        .zip(&q)
        .filter(|(_, v)| v.is_none())
        .map(|((l, _), _)| l.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingRows(missing.join(", ")));
    }
    let q: Vec<(f64, CMatrix)> = q.into_iter().map(|v| v.expect("checked")).collect();
    // indices in projection_set order
    let pos = |j: usize| match j {
        1 => 0,
        2 => 2,
        3 => 4,
        4 => 6,
        5 => 7,
        6 => 8,
        _ => unreachable!(),
    };
    let neg = |j: usize| match j {
        1 => 1,
        2 => 3,
        3 => 5,
        4 => 9,
        5 => 10,
        6 => 11,
        _ => unreachable!(),
    };
    let qp = |j: usize| &q[pos(j)].1;
    let qm = |j: usize| &q[neg(j)].1;
    let sigma = |j: usize| qp(j) + qm(j);
    let h = std::f64::consts::FRAC_1_SQRT_2;

    let rule = |name: String, lhs: CMatrix, rhs: CMatrix| {
        let residual = max_abs_diff(&lhs, &rhs);
        RuleResult {
            name,
            residual,
            pass: residual <= SUM_RULE_TOLERANCE,
        }
    };

    let mut linear_rules = vec![
        rule("Q(1,+)+Q(1,-) = Q(2,+)+Q(2,-)".into(), sigma(1), sigma(2)),
        rule("Q(2,+)+Q(2,-) = Q(3,+)+Q(3,-)".into(), sigma(2), sigma(3)),
    ];
    for (k, (a, b)) in [(4, (1, 2)), (5, (1, 3)), (6, (2, 3))] {
        linear_rules.push(rule(
            format!("Q({k},+) = (1/2-1/sqrt2)(Q(1,+)+Q(1,-)) + (Q({a},+)+Q({b},+))/sqrt2"),
            qp(k).clone(),
            sigma(1) * c(0.5 - h, 0.0) + (qp(a) + qp(b)) * c(h, 0.0),
        ));
    }
    for k in 4..=6 {
        linear_rules.push(rule(
            format!("Q({k},+)+Q({k},-) = Q(1,+)+Q(1,-)"),
            sigma(k),
            sigma(1),
        ));
    }

    let diff = |j: usize| &q[pos(j)].1 * c(q[pos(j)].0, 0.0) - &q[neg(j)].1 * c(q[neg(j)].0, 0.0);
    let mmap_rules: Vec<RuleResult> = [(4, (1, 2)), (5, (1, 3)), (6, (2, 3))]
        .into_iter()
        .map(|(k, (a, b))| {
            rule(
                format!("sqrt2(rQ({k},+) - rQ({k},-)) = rQ({a},+) - rQ({a},-) + rQ({b},+) - rQ({b},-)"),
                diff(k) * c(std::f64::consts::SQRT_2, 0.0),
                diff(a) + diff(b),
            )
        })
        .collect();

    let probability_completeness = (1..=6)
        .map(|j| (q[pos(j)].0 + q[neg(j)].0 - 1.0).abs())
        .collect();

    let verdict = if linear_rules.iter().all(|r| r.pass) {
        Verdict::Linear
    } else if mmap_rules.iter().all(|r| r.pass) {
        Verdict::MMap
    } else {
        Verdict::Neither
    };
    Ok(SumRuleReport {
        linear_rules,
        mmap_rules,
        probability_completeness,
        verdict,
    })
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Reference values are written out here from closed forms rather
//! than taken from the library.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

use num_complex::Complex64;
use qproc_core::bipartite::BipartiteState;
use qproc_core::linalg::{max_abs, max_abs_diff, pauli, trace, CMatrix, DensityMatrix};
use qproc_core::maps::dynamical_map;
use qproc_core::mmap::{
    build_mmap, contract_with_preparation, memory_matrix, mmap_oracle, mmap_tomography,
    sum_rule_check, MMapProtocol, Verdict,
};
use qproc_core::models::{
    axis_state, bloch_state, heisenberg_unitary, standard_inputs, standard_projective_preps,
};
use qproc_core::prep::{PreparationMap, STANDARD_INPUT_AXES};
use qproc_core::random;
use qproc_core::scenarios::{
    control_error_map, multiple_stochastic_record, projective_record, pseudo_pure_maps,
    stochastic_record, swap_q_minus, twelve_record,
};
use qproc_core::tomo::{dual_set_of_states, linearity_check, reconstruct_linear_map, simulate_process};

const GOLDEN_TIMES: [f64; 5] = [0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, FRAC_PI_2];

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / (n - 1) as f64).collect()
}

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn half_of(rows: [[Complex64; 4]; 4]) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| rows[i][j] * 0.5)
}

fn dynamical_closed_form(x: f64, c23: f64) -> CMatrix {
    let (s, c) = x.sin_cos();
    let k = z(-c23 * c * s, 0.0);
    let o = z(0.0, 0.0);
    half_of([
        [z(1.0 + c * c, 0.0), o, k, z(2.0 * c * c, 0.0)],
        [o, z(1.0 - c * c, 0.0), o, k],
        [k, o, z(1.0 - c * c, 0.0), o],
        [z(2.0 * c * c, 0.0), k, o, z(1.0 + c * c, 0.0)],
    ])
}

fn stochastic_closed_form(x: f64) -> CMatrix {
    dynamical_closed_form(x, 0.0)
}

fn multiple_stochastic_closed_form(x: f64) -> CMatrix {
    let (s, c) = x.sin_cos();
    let (c2, s2) = (c * c, s * s);
    let o = z(0.0, 0.0);
    half_of([
        [z(1.0 + c2, 0.0), z(-s2, -s2), o, z(2.0 * c2, 0.0)],
        [z(-s2, s2), z(1.0 - c2 + 2.0 * s2, 0.0), o, o],
        [o, o, z(1.0 - c2, 0.0), z(s2, s2)],
        [z(2.0 * c2, 0.0), o, z(s2, -s2), z(1.0 + c2 - 2.0 * s2, 0.0)],
    ])
}

fn projective_closed_form(x: f64, cp: f64) -> CMatrix {
    let (s, c) = x.sin_cos();
    let (c2, s2) = (c * c, s * s);
    let o = z(0.0, 0.0);
    half_of([
        [z(1.0 + c2, 0.0), z(0.0, cp * s2), o, z(2.0 * c2, -cp * c * s)],
        [z(0.0, -cp * s2), z(1.0 - c2, 0.0), z(0.0, cp * c * s), o],
        [o, z(0.0, -cp * c * s), z(1.0 - c2, 0.0), z(0.0, -cp * s2)],
        [z(2.0 * c2, cp * c * s), o, z(0.0, cp * s2), z(1.0 + c2, 0.0)],
    ])
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn closed_form_eigenvalues(x: f64, c23: f64) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let root = c * (4.0 * c * c + c23 * c23 * s * s).sqrt();
    sorted_desc(vec![
        0.5 * (1.0 - c * c + c23 * c * s),
        0.5 * (1.0 - c * c - c23 * c * s),
        0.5 * (1.0 + c * c + root),
        0.5 * (1.0 + c * c - root),
    ])
}

fn sigma_coefficient(m: &CMatrix, j: usize) -> f64 {
    trace(&(m * pauli(j))).re
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_eigenvalue_formulas() -> Outcome {
    let mut worst: f64 = 0.0;
    for c23 in [0.0, 0.25, 0.5, 1.0] {
        let rho = BipartiteState::correlated_family([0.0; 3], c23).map_err(|e| e.to_string())?;
        for x in grid(400) {
            let ev = dynamical_map(&heisenberg_unitary(x), &rho).map_err(|e| e.to_string())?.eigenvalues();
            let expect = closed_form_eigenvalues(x, c23);
            for (a, b) in ev.iter().zip(&expect) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(worst <= 1e-10, format!("max eigenvalue deviation {worst:.2e}"))
}

fn c2_negativity_region() -> Outcome {
    let c23 = 0.5;
    let rho = BipartiteState::correlated_family([0.0; 3], c23).map_err(|e| e.to_string())?;
    let xs = grid(400);
    let expected: Vec<bool> = xs
        .iter()
        .map(|x| {
            let (s, c) = x.sin_cos();
            // λ_min = ½(S² − |c23·C·S|); compare on the same scale as the
            // eigenvalue threshold so sin(2π) ≈ −2e-16 does not count.
            0.5 * (s * s - (c23 * c * s).abs()) < -1e-12
        })
        .collect();
    let mut mismatches = Vec::new();
    for (k, x) in xs.iter().enumerate() {
        let min = dynamical_map(&heisenberg_unitary(*x), &rho).map_err(|e| e.to_string())?.min_eigenvalue();
        let negative = min < -1e-12;
        if negative != expected[k] {
            let at_boundary = (k > 0 && expected[k - 1] != expected[k])
                || (k + 1 < xs.len() && expected[k + 1] != expected[k]);
            if !at_boundary {
                mismatches.push(*x);
            }
        }
    }
    let count = expected.iter().filter(|&&b| b).count();
    check(
        mismatches.is_empty() && count > 0,
        format!("{count} negative grid points, off-boundary mismatches at {mismatches:?}"),
    )
}

fn c3_golden_matrices() -> Outcome {
    let half = DensityMatrix::maximally_mixed(2);
    let product = BipartiteState::product(&half, &half);
    let family = BipartiteState::correlated_family([0.0; 3], 0.5).map_err(|e| e.to_string())?;
    let (mut es, mut ems, mut ep): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for x in GOLDEN_TIMES {
        let ls = reconstruct_linear_map(&stochastic_record(x, &product).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let lms = reconstruct_linear_map(&multiple_stochastic_record(x).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let lp = reconstruct_linear_map(&projective_record(x, &family).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        es = es.max(max_abs_diff(&ls.b_matrix(), &stochastic_closed_form(x)));
        ems = ems.max(max_abs_diff(&lms.b_matrix(), &multiple_stochastic_closed_form(x)));
        ep = ep.max(max_abs_diff(&lp.b_matrix(), &projective_closed_form(x, 0.5)));
    }
    check(
        es <= 1e-12 && ems <= 1e-12 && ep <= 1e-12,
        format!("deviations: stochastic {es:.2e}, multiple stochastic {ems:.2e}, projective {ep:.2e}"),
    )
}

fn c4_nonlinearity_witness() -> Outcome {
    let mut worst: f64 = 0.0;
    let probe = PreparationMap::projective(axis_state(2, false)).map_err(|e| e.to_string())?;
    for a2 in [0.0, 0.3, -0.2] {
        let c23 = 0.5;
        let rho = BipartiteState::correlated_family([0.0, a2, 0.0], c23).map_err(|e| e.to_string())?;
        let (cp, cpp) = (c23 / (1.0 + a2), c23 / (1.0 - a2));
        for x in grid(40) {
            let rep = linearity_check(&heisenberg_unitary(x), &rho, &standard_projective_preps(), &probe)
                .map_err(|e| e.to_string())?;
            let (s, c) = x.sin_cos();
            worst = worst
                .max((sigma_coefficient(&rep.predicted, 1) - cp * c * s).abs())
                .max((sigma_coefficient(rep.actual.matrix(), 1) + cpp * c * s).abs());
        }
    }
    check(worst <= 1e-10, format!("max σ1-coefficient deviation {worst:.2e}"))
}

fn c5_swap_gate() -> Outcome {
    let q = swap_q_minus(&multiple_stochastic_record(FRAC_PI_2).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let min = qproc_core::linalg::min_eigenvalue(&q);
    check((min + 0.5).abs() <= 1e-10, format!("min eigenvalue {min:.12}"))
}

fn c6_mmap_structure() -> Outcome {
    let mut rng = random::seeded(6);
    let (mut herm, mut tr, mut min): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for _ in 0..50 {
        let u = random::haar_unitary(4, &mut rng);
        let rho = random::random_bipartite(2, 2, &mut rng);
        let m = build_mmap(&u, &rho).map_err(|e| e.to_string())?;
        herm = herm.max(m.hermiticity_residual());
        tr = tr.max((m.trace() - 2.0).abs());
        min = min.min(m.min_eigenvalue());
    }
    check(
        herm <= 1e-9 && tr <= 1e-9 && min >= -1e-10,
        format!("hermiticity {herm:.2e}, |Tr-2| {tr:.2e}, min eigenvalue {min:.2e}"),
    )
}

fn c7_memory() -> Outcome {
    let mut rng = random::seeded(7);
    let mut k_max: f64 = 0.0;
    for _ in 0..20 {
        let u = random::haar_unitary(4, &mut rng);
        let rs = random::random_density(2, &mut rng);
        let re = random::random_density(2, &mut rng);
        let m = build_mmap(&u, &BipartiteState::product(&rs, &re)).map_err(|e| e.to_string())?;
        k_max = k_max.max(max_abs(&memory_matrix(&m).k));
    }
    let c23 = 0.5;
    let rho = BipartiteState::correlated_family([0.0; 3], c23).map_err(|e| e.to_string())?;
    let mut chi_dev: f64 = 0.0;
    for x in grid(400) {
        let report = memory_matrix(&build_mmap(&heisenberg_unitary(x), &rho).map_err(|e| e.to_string())?);
        let (s, c) = x.sin_cos();
        let expected = pauli(1) * z(-0.5 * c23 * c * s, 0.0);
        chi_dev = chi_dev.max(max_abs_diff(&report.chi_s_t, &expected));
    }
    check(
        k_max <= 1e-12 && chi_dev <= 1e-10,
        format!("product-state max|K| {k_max:.2e}, χS deviation {chi_dev:.2e}"),
    )
}

fn c8_bridge() -> Outcome {
    let mut rng = random::seeded(8);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..20 {
        let u = random::haar_unitary(4, &mut rng);
        let rho = random::random_bipartite(2, 2, &mut rng);
        let v = random::haar_unitary(2, &mut rng);
        let target = random::haar_pure_state(2, &mut rng);
        let proj = PreparationMap::projective(random::haar_pure_state(2, &mut rng)).map_err(|e| e.to_string())?;
        let preps = vec![
            PreparationMap::identity(2),
            PreparationMap::pin(target.clone()),
            PreparationMap::rotation(v.clone()),
            proj.clone(),
            PreparationMap::stochastic(target, v.clone()).map_err(|e| e.to_string())?,
            PreparationMap::composite(vec![proj, PreparationMap::rotation(v)]).map_err(|e| e.to_string())?,
        ];
        let m = build_mmap(&u, &rho).map_err(|e| e.to_string())?;
        for p in &preps {
            let (q, r) = contract_with_preparation(&m, p).map_err(|e| e.to_string())?;
            let rec = simulate_process(&u, &rho, std::slice::from_ref(p)).map_err(|e| e.to_string())?;
            let row = &rec.rows()[0];
            worst = worst
                .max(max_abs_diff(q.matrix(), row.output.as_ref().unwrap()))
                .max((r - row.probability).abs());
            cases += 1;
        }
    }
    check(worst <= 1e-10, format!("{cases} cases, max deviation {worst:.2e}"))
}

fn c9_mmap_tomography() -> Outcome {
    let mut rng = random::seeded(9);
    let rho = BipartiteState::correlated_family([0.0; 3], 0.5).map_err(|e| e.to_string())?;
    let u = heisenberg_unitary(0.7);
    let m = build_mmap(&u, &rho).map_err(|e| e.to_string())?;
    let partial = mmap_tomography(mmap_oracle(&m), MMapProtocol::Nine).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = random::unit_vector3(&mut rng);
        let prep = PreparationMap::projective(bloch_state(a)).map_err(|e| e.to_string())?;
        let (q, r) = contract_with_preparation(&m, &prep).map_err(|e| e.to_string())?;
        let predicted = partial.predict(a).map_err(|e| e.to_string())?;
        worst = worst.max(max_abs_diff(&predicted, &(q.matrix() * z(r, 0.0))));
    }
    let half = DensityMatrix::maximally_mixed(2);
    let product = BipartiteState::product(&half, &half);
    let uncorrelated = BipartiteState::correlated_family([0.0; 3], 0.0).map_err(|e| e.to_string())?;
    let mut verdicts_ok = true;
    for x in [FRAC_PI_6, FRAC_PI_4, 1.0, 2.0] {
        let v = |rho: &BipartiteState, projective: bool| {
            twelve_record(x, rho, projective).and_then(|r| sum_rule_check(&r)).map(|r| r.verdict)
        };
        verdicts_ok &= v(&product, false).map_err(|e| e.to_string())? == Verdict::Linear;
        verdicts_ok &= v(&rho, false).map_err(|e| e.to_string())? == Verdict::Linear;
        verdicts_ok &= v(&rho, true).map_err(|e| e.to_string())? == Verdict::MMap;
        verdicts_ok &= v(&uncorrelated, true).map_err(|e| e.to_string())? == Verdict::Linear;
    }
    check(
        worst <= 1e-9 && verdicts_ok,
        format!("max probe deviation {worst:.2e}, verdicts as expected: {verdicts_ok}"),
    )
}

fn printed_duals(p: f64) -> Vec<CMatrix> {
    let i = pauli(0);
    let (s1, s2, s3) = (pauli(1), pauli(2), pauli(3));
    let k = z(0.5 / p, 0.0);
    vec![
        (&i * z(p, 0.0) - &s1 - &s2 - &s3) * k,
        (&i * z(p, 0.0) + &s1 - &s2 - &s3) * k,
        &s2 * z(1.0 / p, 0.0),
        &s3 * z(1.0 / p, 0.0),
    ]
}

fn c10_duals() -> Outcome {
    let mut worst: f64 = 0.0;
    let pure = dual_set_of_states(&standard_inputs()).map_err(|e| e.to_string())?;
    for (d, e) in pure.duals.iter().zip(printed_duals(1.0)) {
        worst = worst.max(max_abs_diff(d, &e));
    }
    for p in [0.5, 0.8, 1.0] {
        let inputs: Vec<DensityMatrix> = STANDARD_INPUT_AXES
            .iter()
            .map(|a| bloch_state([p * a[0], p * a[1], p * a[2]]))
            .collect();
        let duals = dual_set_of_states(&inputs).map_err(|e| e.to_string())?;
        for (d, e) in duals.duals.iter().zip(printed_duals(p)) {
            worst = worst.max(max_abs_diff(d, &e));
        }
    }
    check(worst <= 1e-12, format!("max dual deviation {worst:.2e}"))
}

fn c11_pseudo_pure() -> Outcome {
    let half = DensityMatrix::maximally_mixed(2);
    let product = BipartiteState::product(&half, &half);
    let c23 = 0.15;
    let family = BipartiteState::correlated_family([0.0; 3], c23).map_err(|e| e.to_string())?;
    let (mut recover, mut witness_ok) = (0.0f64, true);
    for p in [0.5, 0.8] {
        for (rho, correlated) in [(&product, false), (&family, true)] {
            let mut worst_wrong: f64 = 0.0;
            for x in grid(100) {
                let (good, wrong, _) = pseudo_pure_maps(x, p, rho, correlated).map_err(|e| e.to_string())?;
                let expected = if correlated { dynamical_closed_form(x, c23) } else { stochastic_closed_form(x) };
                recover = recover.max(max_abs_diff(&good.b_matrix(), &expected));
                worst_wrong = worst_wrong.max(max_abs_diff(&wrong.b_matrix(), &expected));
            }
            witness_ok &= worst_wrong >= (1.0 - p) / 2.0;
        }
    }
    check(
        recover <= 1e-10 && witness_ok,
        format!("recovery deviation {recover:.2e}, pure-dual error witness holds: {witness_ok}"),
    )
}

fn c12_control_error() -> Outcome {
    let half = DensityMatrix::maximally_mixed(2);
    let product = BipartiteState::product(&half, &half);
    let mut min = f64::INFINITY;
    for x in grid(400).into_iter().filter(|&x| x > 0.0 && x < FRAC_PI_2) {
        let map = control_error_map(x, 0.1, &product).map_err(|e| e.to_string())?;
        min = min.min(map.min_eigenvalue());
    }
    check(min < -1e-4, format!("min eigenvalue on (0, π/2): {min:.6}"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("eigenvalue formulas of the correlated dynamical map", c1_eigenvalue_formulas),
        ("negativity region of the correlated dynamical map", c2_negativity_region),
        ("golden process maps for three preparation schemes", c3_golden_matrices),
        ("nonlinearity witness for projective preparations", c4_nonlinearity_witness),
        ("swap-gate nonphysical linear prediction", c5_swap_gate),
        ("M-map Hermitian, trace 2, positive", c6_mmap_structure),
        ("memory matrix and correlation term", c7_memory),
        ("M-map contraction equals direct simulation", c8_bridge),
        ("M-map tomography round trip and sum-rule verdicts", c9_mmap_tomography),
        ("dual sets for pure and pseudo-pure inputs", c10_duals),
        ("pseudo-pure recovery and pure-dual error", c11_pseudo_pure),
        ("control-error negativity", c12_control_error),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = run();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({ms:.0} ms)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({ms:.0} ms)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

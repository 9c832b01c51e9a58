//! Acceptance suite: one line per criterion, every tolerance pinned below.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num::traits::{One, Zero};
use num::{BigInt, BigRational};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orthotensor::cumulants::{affine_equivariance_check, bootstrap_normalized_norm, cumulant_tensor, normalized_cumulant_norm, SampleMatrix};
use orthotensor::decomposition::{column_match_error, decompose, decompose_sym, StructuredDecomposition};
use orthotensor::manifold::{compare_with_odeco, euclidean_gradient, minimize, objective_unchecked, ObjectiveSpec, OptimizerConfig};
use orthotensor::pattern::pattern_v;
use orthotensor::random::{gaussian_matrix, gaussian_tensor, haar_orthogonal};
use orthotensor::spectral::{
    binary_label_bases, build_mq, codim_table_check, four_bases, grid_search_222, odeco222, odeco222_tuples, orthogonal_pairs,
    same_basis, svt_residual, SvTuple,
};
use orthotensor::synth::{sample_instance, Instance};
use orthotensor::tensor::{group_action, OrthTuple, SymTensor};
use orthotensor::variety::{degree_check, dim_check, expected_dim, membership_value, DEFAULT_BUDGET};
use orthotensor::DenseTensor;

// Criterion 1
const TUPLE_RESIDUAL: f64 = 1e-12;
const ORTHOGONALITY: f64 = 1e-12;
const GRID_PITCH: f64 = 1e-3;
const GRID_ACCEPT: f64 = 1e-6;
const SAME_DIRECTION: f64 = 1e-6;
// Criterion 2
const BASIS_RESIDUAL: f64 = 1e-10;
const BINARY_INSTANCES: usize = 25;
// Criterion 4
const QUADRIC_POINTS: usize = 50;
const QUARTIC_POINTS: usize = 100;
// Criterion 7
const RECOVERY_INSTANCES: usize = 20;
const RECOVERY_STARTS: usize = 20;
const RECOVERY_DISTANCE: f64 = 1e-8;
const DIAGONAL_ERROR: f64 = 1e-6;
// Criterion 8
const COLUMN_AGREEMENT: f64 = 1e-5;
// Criterion 9
const DOMINANCE_SLACK: f64 = 1e-8;
const DENSE_INSTANCES: usize = 20;
// Criterion 10
const ORACLE_AGREEMENT: f64 = 1e-10;
const EQUIVARIANCE: f64 = 1e-8;
const NULL_OBSERVATIONS: usize = 100_000;
const NULL_BOUND: f64 = 0.05;
const BOOTSTRAP_REPS: usize = 30;
// Criterion 11
const PROPERTY_CASES: u32 = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let criteria: Vec<(&str, Duration, fn() -> Outcome)> = vec![
        ("binary 2x2x2 tuples", Duration::from_secs(10), criterion_1),
        ("binary order-4 bases", Duration::from_secs(30), criterion_2),
        ("M_Q golden matrix and rank table", Duration::from_secs(5), criterion_3),
        ("binary symmetric implicit equation", Duration::from_secs(60), criterion_4),
        ("degree of the implicit equation", Duration::from_secs(60), criterion_5),
        ("dimension formulas", Duration::from_secs(60), criterion_6),
        ("construct-then-recover", Duration::from_secs(300), criterion_7),
        ("uniqueness across seeds", Duration::from_secs(300), criterion_8),
        ("odeco dominance", Duration::from_secs(300), criterion_9),
        ("cumulant pipeline", Duration::from_secs(120), criterion_10),
        ("invariant property suites", Duration::from_secs(120), criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut out = f();
        let elapsed = start.elapsed();
        if elapsed > limit {
            out.pass = false;
            out.detail = format!("{}; over time limit {:?}", out.detail, limit);
        }
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {:<38} {:>8.2}s  {}",
            i + 1,
            if out.pass { "PASS" } else { "FAIL" },
            name,
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
}

fn criterion_1() -> Outcome {
    let t = odeco222(2.0, 1.0);
    let tuples = odeco222_tuples(2.0, 1.0).expect("nonzero values");
    let worst = tuples
        .iter()
        .map(|tp| svt_residual(&t, &tp.vectors).expect("order 3").residual)
        .fold(0.0, f64::max);
    let pairs = orthogonal_pairs(&tuples, ORTHOGONALITY);
    let found = grid_search_222(&t, GRID_PITCH, GRID_ACCEPT).expect("2x2x2");
    let extra = found
        .iter()
        .filter(|f| !tuples.iter().any(|tp| tp.same_direction(f, SAME_DIRECTION)))
        .count();
    let missed = tuples
        .iter()
        .filter(|tp| !found.iter().any(|f| tp.same_direction(f, SAME_DIRECTION)))
        .count();
    let pass = tuples.len() == 6 && worst <= TUPLE_RESIDUAL && pairs == vec![(0, 1)] && extra == 0 && missed == 0;
    outcome(
        pass,
        format!(
            "tuples={} max_residual={worst:.1e} orthogonal_pairs={} grid_found={} extra={extra} missed={missed}",
            tuples.len(),
            pairs.len(),
            found.len()
        ),
    )
}

fn e_basis(d: usize) -> [SvTuple; 2] {
    let e = |j: usize| {
        let mut v = DVector::zeros(2);
        v[j] = 1.0;
        v
    };
    [
        SvTuple { vectors: vec![e(0); d], value: None },
        SvTuple { vectors: vec![e(1); d], value: None },
    ]
}

fn basis_passes(t: &DenseTensor, basis: &[SvTuple; 2]) -> bool {
    basis
        .iter()
        .all(|tp| svt_residual(t, &tp.vectors).map(|r| r.residual <= BASIS_RESIDUAL).unwrap_or(false))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut four_ok = 0;
    let bases = four_bases(&e_basis(4)).expect("orthogonal input");
    for _ in 0..BINARY_INSTANCES {
        let s = pattern_v(&[2; 4]).unwrap().project(&gaussian_tensor(&[2; 4], &mut rng)).unwrap();
        if bases.iter().all(|b| basis_passes(&s, b)) {
            four_ok += 1;
        }
    }
    let mut only_e = 0;
    let mut spurious = 0;
    let candidates = binary_label_bases(5);
    for _ in 0..BINARY_INSTANCES {
        let s = pattern_v(&[2; 5]).unwrap().project(&gaussian_tensor(&[2; 5], &mut rng)).unwrap();
        // each string i and its complement name the same basis, so all 2^5 strings are covered
        let passing: Vec<&Vec<u8>> = candidates
            .iter()
            .filter(|(_, b)| basis_passes(&s, b))
            .map(|(bits, _)| bits)
            .collect();
        spurious += passing.iter().filter(|b| b.iter().any(|&x| x == 1)).count();
        if passing.len() == 1 && passing[0].iter().all(|&x| x == 0) {
            only_e += 1;
        }
    }
    outcome(
        four_ok == BINARY_INSTANCES && only_e == BINARY_INSTANCES,
        format!(
            "d=4 all four bases {four_ok}/{BINARY_INSTANCES}; d=5 only e-basis {only_e}/{BINARY_INSTANCES} ({} candidate bases, spurious passes {spurious})",
            candidates.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let id = DMatrix::<f64>::identity(2, 2);
    let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let m = build_mq(&[p, id.clone(), id.clone(), id]).expect("binary factors");
    #[rustfmt::skip]
    let golden = DMatrix::from_row_slice(8, 8, &[
        0., 0., 0., 0., 1., 0., 0., 0.,
        0., 0., 0., 0., 0., 1., 0., 0.,
        0., 0., 0., 0., 0., 0., 1., 0.,
        0., 0., 0., 0., 0., 0., 0., 1.,
        1., 0., 0., 0., 0., 0., 0., 0.,
        0., 1., 0., 0., 0., 0., 0., 0.,
        0., 0., 1., 0., 0., 0., 0., 0.,
        0., 0., 0., 1., 0., 0., 0., 0.,
    ]);
    let labels_ok = m.row_labels() == ["0000", "0011", "0101", "0110", "1001", "1010", "1100", "1111"]
        && m.col_labels() == ["0001", "0010", "0100", "0111", "1000", "1011", "1101", "1110"];
    let golden_ok = labels_ok && m.matrix == golden;
    let mut mismatched = Vec::new();
    let mut checked = 0;
    for d in 4..=8 {
        let table = codim_table_check(d).expect("order in range");
        checked += table.rows.len() + table.symmetric.len();
        if !table.all_match() {
            mismatched.push(d);
        }
    }
    outcome(
        golden_ok && mismatched.is_empty(),
        format!("golden={golden_ok} rank tables d=4..8 checked={checked} mismatched orders={mismatched:?}"),
    )
}

fn rational<R: Rng>(rng: &mut R) -> BigRational {
    BigRational::new(BigInt::from(rng.random_range(-30i64..=30)), BigInt::from(rng.random_range(1i64..=9)))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let quadric = |t: &[BigRational]| {
        t[1].clone() * t[1].clone() - t[0].clone() * t[2].clone() + t[2].clone() * t[2].clone() - t[1].clone() * t[3].clone()
    };
    let mut on_zero = 0;
    let mut off_nonzero = 0;
    let mut ratios = Vec::new();
    while on_zero + off_nonzero < 2 * QUADRIC_POINTS {
        let mut t: Vec<BigRational> = (0..4).map(|_| rational(&mut rng)).collect();
        if on_zero < QUADRIC_POINTS {
            if t[1].is_zero() {
                continue;
            }
            t[3] = (t[1].clone() * t[1].clone() - t[0].clone() * t[2].clone() + t[2].clone() * t[2].clone()) / t[1].clone();
            let m = membership_value(&t, DEFAULT_BUDGET).expect("exact");
            if m.zero_polynomial || m.denominator.is_zero() {
                continue;
            }
            on_zero += usize::from(m.value.is_zero());
            if !m.value.is_zero() {
                return outcome(false, format!("nonzero value {} on the quadric at {t:?}", m.value));
            }
        } else {
            let q = quadric(&t);
            let m = membership_value(&t, DEFAULT_BUDGET).expect("exact");
            if q.is_zero() || m.denominator.is_zero() {
                continue;
            }
            if m.value.is_zero() {
                return outcome(false, format!("zero value off the quadric at {t:?}"));
            }
            ratios.push(m.value / (q.clone() * q));
            off_nonzero += 1;
        }
    }
    let quadric_square = ratios.windows(2).all(|w| w[0] == w[1]);

    // the printed quartic-variety cubic is linear in t_2
    let cubic = |t: &[BigRational]| {
        let c = |k: i64| BigRational::from_integer(BigInt::from(k));
        let (t0, t1, t2, t3, t4) = (&t[0], &t[1], &t[2], &t[3], &t[4]);
        c(2) * t1 * t1 * t1 - c(3) * t0 * t1 * t2 + t0 * t0 * t3 + c(2) * t1 * t1 * t3 - c(3) * t0 * t2 * t3
            - c(2) * t1 * t3 * t3
            - c(2) * t3 * t3 * t3
            + t0 * t1 * t4
            + c(3) * t1 * t2 * t4
            - t0 * t3 * t4
            + c(3) * t2 * t3 * t4
            - t1 * t4 * t4
    };
    let mut agree = 0;
    let mut total = 0;
    let mut on_points = 0;
    let mut cubic_ratios = Vec::new();
    while total < QUARTIC_POINTS {
        let mut t: Vec<BigRational> = (0..5).map(|_| rational(&mut rng)).collect();
        if total % 2 == 0 {
            let mut at = t.clone();
            at[2] = BigRational::zero();
            let constant = cubic(&at);
            at[2] = BigRational::one();
            let slope = cubic(&at) - constant.clone();
            if slope.is_zero() {
                continue;
            }
            t[2] = -constant / slope;
        }
        let m = membership_value(&t, DEFAULT_BUDGET).expect("exact");
        if m.zero_polynomial || m.denominator.is_zero() {
            continue;
        }
        let p = cubic(&t);
        total += 1;
        on_points += usize::from(p.is_zero());
        if p.is_zero() == m.value.is_zero() {
            agree += 1;
        }
        if !p.is_zero() {
            cubic_ratios.push(m.value / (p.clone() * p));
        }
    }
    let cubic_square = cubic_ratios.windows(2).all(|w| w[0] == w[1]);
    outcome(
        on_zero == QUADRIC_POINTS && off_nonzero == QUADRIC_POINTS && agree == QUARTIC_POINTS,
        format!(
            "d=3 zero on {on_zero}/{QUADRIC_POINTS}, nonzero off {off_nonzero}/{QUADRIC_POINTS}, r/quadric^2 constant={quadric_square} ({}); d=4 verdicts agree {agree}/{QUARTIC_POINTS} ({on_points} on the zero set), r/cubic^2 constant={cubic_square}",
            ratios.first().map(ToString::to_string).unwrap_or_default()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut parts = Vec::new();
    let mut pass = true;
    for d in 3..=6 {
        match degree_check(d, &mut rng, DEFAULT_BUDGET) {
            Ok(r) => {
                pass &= r.degree == 2 * (d - 1) && r.root_degree == Some(d - 1);
                parts.push(format!("d={d}: deg r={} root={:?}", r.degree, r.root_degree));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("d={d}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let cases: [(&[usize], bool, usize); 4] = [(&[3, 3, 3], false, 18), (&[2, 3, 4], false, 21), (&[3, 3, 3, 3], true, 12), (&[2, 2, 2], false, 5)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (shape, sym, formula) in cases {
        let r = dim_check(shape, sym, &mut rng).expect("desk-scale shape");
        pass &= r.expected == formula && r.measured == r.expected && expected_dim(shape, sym).unwrap() == formula;
        parts.push(format!("{shape:?}{}: {} vs {}", if sym { "sym" } else { "" }, r.expected, r.measured));
    }
    outcome(pass, parts.join("; "))
}

struct Case {
    label: &'static str,
    shape: &'static [usize],
    symmetric: bool,
}

const RECOVERY_CASES: [Case; 4] = [
    Case { label: "3x4x5", shape: &[3, 4, 5], symmetric: false },
    Case { label: "4x4x4", shape: &[4, 4, 4], symmetric: false },
    Case { label: "sym 3^3", shape: &[3, 3, 3], symmetric: true },
    Case { label: "sym 3^4", shape: &[3, 3, 3, 3], symmetric: true },
];

fn instance(case: &Case, i: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(7000 + 100 * case.shape.len() as u64 + i as u64);
    sample_instance(case.shape, case.symmetric, &mut rng).expect("valid case")
}

fn recover(case: &Case, inst: &Instance, seed: u64) -> StructuredDecomposition {
    let config = OptimizerConfig {
        starts: RECOVERY_STARTS,
        seed,
        ..Default::default()
    };
    if case.symmetric {
        decompose_sym(&SymTensor::new(inst.tensor.clone(), &Default::default()).unwrap(), &config).unwrap()
    } else {
        decompose(&inst.tensor, &config).unwrap()
    }
}

fn recovered(inst: &Instance, dec: &StructuredDecomposition) -> bool {
    let diag = inst.diagonal();
    let err = diag
        .iter()
        .zip(&dec.singular_values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    dec.residual <= RECOVERY_DISTANCE && err <= DIAGONAL_ERROR
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in &RECOVERY_CASES {
        let mut ok = 0;
        let mut worst: f64 = 0.0;
        for i in 0..RECOVERY_INSTANCES {
            let inst = instance(case, i);
            let dec = recover(case, &inst, i as u64);
            worst = worst.max(dec.residual);
            ok += usize::from(recovered(&inst, &dec));
        }
        pass &= ok == RECOVERY_INSTANCES;
        parts.push(format!("{}: {ok}/{RECOVERY_INSTANCES} (worst {worst:.1e})", case.label));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in &RECOVERY_CASES {
        let mut agree = 0;
        let n1 = case.shape[0];
        for i in 0..RECOVERY_INSTANCES {
            let inst = instance(case, i);
            let a = recover(case, &inst, i as u64);
            let b = recover(case, &inst, 10_000 + i as u64);
            let columns = a
                .q
                .matrices()
                .iter()
                .zip(b.q.matrices())
                .map(|(x, y)| column_match_error(x, y, n1))
                .fold(0.0, f64::max);
            if recovered(&inst, &a) && recovered(&inst, &b) && columns <= COLUMN_AGREEMENT {
                agree += 1;
            }
        }
        pass &= agree == RECOVERY_INSTANCES;
        parts.push(format!("{}: {agree}/{RECOVERY_INSTANCES}", case.label));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let mut binary = 0;
    for i in 0..RECOVERY_INSTANCES {
        let core = pattern_v(&[2; 4]).unwrap().project(&gaussian_tensor(&[2; 4], &mut rng)).unwrap();
        let q = OrthTuple::from_matrices_unchecked((0..4).map(|_| haar_orthogonal(2, &mut rng)).collect());
        let t = q.act(&core).unwrap();
        let config = |seed| OptimizerConfig { starts: RECOVERY_STARTS, seed, ..Default::default() };
        let a = decompose(&t, &config(i as u64)).unwrap();
        let b = decompose(&t, &config(10_000 + i as u64)).unwrap();
        let basis = |dec: &StructuredDecomposition| -> [SvTuple; 2] {
            let tuple = |j: usize| SvTuple {
                vectors: dec.q.matrices().iter().map(|m| m.column(j).into_owned()).collect(),
                value: None,
            };
            [tuple(0), tuple(1)]
        };
        let (ba, bb) = (basis(&a), basis(&b));
        let classes = four_bases(&bb).unwrap();
        if a.residual <= RECOVERY_DISTANCE
            && b.residual <= RECOVERY_DISTANCE
            && classes.iter().any(|c| same_basis(&ba, c, COLUMN_AGREEMENT))
        {
            binary += 1;
        }
    }
    pass &= binary == RECOVERY_INSTANCES;
    parts.push(format!("2x2x2x2 modulo four bases: {binary}/{RECOVERY_INSTANCES}"));
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let config = OptimizerConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, shape, symmetric) in [("3x3x3", [3usize, 3, 3], false), ("sym 4^3", [4, 4, 4], true)] {
        let mut ok = 0;
        let mut gap_sum = 0.0;
        for _ in 0..DENSE_INSTANCES {
            let raw = gaussian_tensor(&shape, &mut rng);
            let t = if symmetric { SymTensor::symmetrize(&raw).unwrap().into_dense() } else { raw };
            let cmp = compare_with_odeco(&t, symmetric, &config).unwrap();
            if cmp.structured.relative_distance <= cmp.odeco.relative_distance + DOMINANCE_SLACK {
                ok += 1;
            }
            gap_sum += cmp.odeco.relative_distance - cmp.structured.relative_distance;
        }
        pass &= ok == DENSE_INSTANCES;
        parts.push(format!("{label}: {ok}/{DENSE_INSTANCES} (mean gap {:.3})", gap_sum / DENSE_INSTANCES as f64));
    }
    outcome(pass, parts.join("; "))
}

fn partitions(r: usize) -> Vec<Vec<usize>> {
    // block sizes of every set partition of 0..r
    fn rec(r: usize) -> Vec<Vec<Vec<usize>>> {
        if r == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in rec(r - 1) {
            for b in 0..p.len() {
                let mut q = p.clone();
                q[b].push(r - 1);
                out.push(q);
            }
            let mut q = p;
            q.push(vec![r - 1]);
            out.push(q);
        }
        out
    }
    rec(r).into_iter().map(|p| p.iter().map(Vec::len).collect()).collect()
}

fn u_statistic(x: &[f64], sizes: &[usize], used: &mut Vec<usize>) -> (f64, usize) {
    if used.len() == sizes.len() {
        return (used.iter().zip(sizes).map(|(&i, &s)| x[i].powi(s as i32)).product(), 1);
    }
    let (mut total, mut count) = (0.0, 0);
    for i in 0..x.len() {
        if !used.contains(&i) {
            used.push(i);
            let (t, c) = u_statistic(x, sizes, used);
            total += t;
            count += c;
            used.pop();
        }
    }
    (total, count)
}

fn k_oracle(x: &[f64], r: usize) -> f64 {
    partitions(r)
        .iter()
        .map(|sizes| {
            let b = sizes.len();
            let coef = (1..b).product::<usize>() as f64 * if b % 2 == 1 { 1.0 } else { -1.0 };
            let (t, c) = u_statistic(x, sizes, &mut Vec::new());
            coef * t / c as f64
        })
        .sum()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let x: Vec<f64> = (0..9).map(|_| rng.random::<f64>().powi(2) * 3.0 - 0.5).collect();
    let dup = SampleMatrix::from_rows(&x.iter().map(|&v| vec![v, v]).collect::<Vec<_>>()).unwrap();
    let mut oracle_err: f64 = 0.0;
    for order in 2..=4 {
        let expected = k_oracle(&x, order);
        let k = cumulant_tensor(&dup, order).unwrap();
        for v in k.as_dense().as_slice() {
            oracle_err = oracle_err.max((v - expected).abs() / expected.abs().max(1.0));
        }
    }

    let skewed = gaussian_matrix(200, 3, &mut rng).map(|v: f64| v.exp());
    let sample = SampleMatrix::new(skewed, None).unwrap();
    let rot = haar_orthogonal(3, &mut rng);
    let mut equiv: f64 = 0.0;
    for order in 2..=4 {
        equiv = equiv.max(affine_equivariance_check(&sample, &rot, order).unwrap().relative_error);
        let general = gaussian_matrix(3, 3, &mut rng);
        equiv = equiv.max(affine_equivariance_check(&sample, &general, order).unwrap().relative_error);
    }

    let gauss = SampleMatrix::new(gaussian_matrix(NULL_OBSERVATIONS, 3, &mut rng), None).unwrap();
    let mut null_ok = true;
    let mut null_parts = Vec::new();
    for order in [3, 4] {
        let ratio = normalized_cumulant_norm(&gauss, order).unwrap();
        let boot = bootstrap_normalized_norm(&gauss, order, BOOTSTRAP_REPS, &mut rng).unwrap();
        let mean = boot.iter().sum::<f64>() / boot.len() as f64;
        let sd = (boot.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt();
        null_ok &= ratio <= NULL_BOUND && 3.0 * sd <= NULL_BOUND;
        null_parts.push(format!("K{order}={ratio:.4} (3sd {:.4})", 3.0 * sd));
    }
    outcome(
        oracle_err <= ORACLE_AGREEMENT && equiv <= EQUIVARIANCE && null_ok,
        format!("oracle err {oracle_err:.1e}; equivariance {equiv:.1e}; gaussian null {}", null_parts.join(", ")),
    )
}

fn seeded(min_dim: usize) -> impl Strategy<Value = (Vec<usize>, u64)> {
    let shape = proptest::collection::vec(min_dim..4, 2..=4).prop_map(|mut s| {
        s.sort_unstable();
        s
    });
    (shape, any::<u64>())
}

fn random_tuple(shape: &[usize], rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
    shape.iter().map(|&n| haar_orthogonal(n, rng)).collect()
}

fn direct_action(mats: &[DMatrix<f64>], t: &DenseTensor) -> DenseTensor {
    let out_shape: Vec<usize> = mats.iter().map(|m| m.nrows()).collect();
    DenseTensor::from_fn(&out_shape, |i| {
        t.indices()
            .map(|j| t.get(&j) * (0..j.len()).map(|k| mats[k][(i[k], j[k])]).product::<f64>())
            .sum()
    })
    .unwrap()
}

fn run_property<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn criterion_11() -> Outcome {
    let results = [
        run_property("composition", seeded(1), |(shape, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = gaussian_tensor(&shape, &mut rng);
            let (a, b) = (random_tuple(&shape, &mut rng), random_tuple(&shape, &mut rng));
            let nested = group_action(&a, &group_action(&b, &t).unwrap()).unwrap();
            let ab: Vec<DMatrix<f64>> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
            let once = group_action(&ab, &t).unwrap();
            prop_assert!(nested.max_abs_diff(&once).unwrap() <= 1e-10 * t.norm().max(1.0));
            Ok(())
        }),
        run_property("isometry", seeded(1), |(shape, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = gaussian_tensor(&shape, &mut rng);
            let moved = group_action(&random_tuple(&shape, &mut rng), &t).unwrap();
            prop_assert!((moved.norm() - t.norm()).abs() <= 1e-10 * t.norm().max(1.0));
            Ok(())
        }),
        run_property("summation oracle", seeded(1), |(shape, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = gaussian_tensor(&shape, &mut rng);
            let mats: Vec<DMatrix<f64>> = shape.iter().map(|&n| gaussian_matrix(n + 1, n, &mut rng)).collect();
            prop_assert!(group_action(&mats, &t).unwrap().max_abs_diff(&direct_action(&mats, &t)).unwrap() <= 1e-12 * t.norm().max(1.0) * 10.0);
            Ok(())
        }),
        run_property("pattern pythagoras", seeded(2), |(shape, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = gaussian_tensor(&shape, &mut rng);
            let p = pattern_v(&shape).unwrap();
            let proj = p.project(&t).unwrap();
            let lhs = t.norm().powi(2);
            let rhs = proj.norm().powi(2) + p.distance_sq(&t).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
            prop_assert_eq!(p.project(&proj).unwrap(), proj);
            Ok(())
        }),
        run_property("descent and orthogonality", (proptest::sample::select(vec![vec![2usize, 2, 2], vec![2, 3, 3], vec![3, 3, 3]]), any::<u64>()), |(shape, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = ObjectiveSpec::structured(gaussian_tensor(&shape, &mut rng), false).unwrap();
            let config = OptimizerConfig { starts: 2, max_iters: 60, seed, ..Default::default() };
            let res = minimize(&spec, &config).unwrap();
            for rec in &res.starts {
                prop_assert!(rec.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15));
            }
            prop_assert!(res.q.max_orthogonality_defect() <= 1e-10);
            Ok(())
        }),
        run_property("gradient finite differences", seeded(2), |(shape, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = ObjectiveSpec::structured(gaussian_tensor(&shape, &mut rng), false).unwrap();
            let mats = random_tuple(&shape, &mut rng);
            let g = euclidean_gradient(&mats, &spec).unwrap();
            let dir: Vec<DMatrix<f64>> = mats.iter().map(|m| gaussian_matrix(m.nrows(), m.ncols(), &mut rng)).collect();
            let h = 1e-6;
            let shifted = |s: f64| -> Vec<DMatrix<f64>> { mats.iter().zip(&dir).map(|(m, e)| m + e * (s * h)).collect() };
            let fd = (objective_unchecked(&shifted(1.0), &spec).unwrap() - objective_unchecked(&shifted(-1.0), &spec).unwrap()) / (2.0 * h);
            let analytic: f64 = g.iter().zip(&dir).map(|(a, b)| a.dot(b)).sum();
            prop_assert!((fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0));
            Ok(())
        }),
    ];
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    outcome(
        failures.is_empty(),
        format!(
            "{} suites x {PROPERTY_CASES} cases; failures: {}",
            results.len(),
            if failures.is_empty() { "none".to_string() } else { failures.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" | ") }
        ),
    )
}


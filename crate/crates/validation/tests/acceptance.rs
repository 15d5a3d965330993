//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rotsynth::circuit::{Circuit, Gate, Registers};
use rotsynth::rus::{monte_carlo_with, MonteCarloConfig};
use rotsynth::sim::{global_phase_between, ConditionalOperator};
use rotsynth::synthesis::ancilla_count;
use rotsynth::{
    build_comparator, build_rotation_circuit, conditional_operators, oracle_ge_k, resources,
    synthesize, Mat2, StateVector, SynthesisParams,
};

const OPERATOR_TOL: f64 = 1e-10;
const PROBABILITY_TOL: f64 = 1e-12;
const RANDOM_CASES: usize = 200;
const MAX_RANDOM_N: u32 = 12;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Case {
    theta: f64,
    epsilon: f64,
    params: SynthesisParams,
    ops: Vec<ConditionalOperator>,
}

fn random_cases() -> Vec<Case> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
    let mut cases = Vec::with_capacity(RANDOM_CASES);
    while cases.len() < RANDOM_CASES {
        let theta = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
        let bits = rng.random_range(0.2..(MAX_RANDOM_N - 1) as f64);
        let epsilon = (2.0f64).powf(-bits);
        let params = synthesize(theta, epsilon).expect("valid parameters");
        // theta* = 0 runs no circuit at all, so there is no branch to check
        if params.n > MAX_RANDOM_N || params.is_identity() {
            continue;
        }
        let circuit = build_rotation_circuit(&params).expect("circuit builds");
        let ops = conditional_operators(&circuit).expect("simulation fits");
        cases.push(Case {
            theta,
            epsilon,
            params,
            ops,
        });
    }
    cases
}

fn zero_outcome(ops: &[ConditionalOperator]) -> Result<&ConditionalOperator, String> {
    ops.iter()
        .find(|op| op.outcome.is_zero())
        .ok_or_else(|| "no all-zero outcome".to_string())
}

fn t_gate_regression() -> Check {
    let p = synthesize(FRAC_PI_4, 1e-2).map_err(|e| e.to_string())?;
    ensure(p.n == 8 && p.k == 181, || format!("n={} k={}", p.n, p.k))?;
    let exact = p.success_fraction();
    ensure(exact.num == 19193 && exact.den == 32768, || {
        format!("P = {exact}")
    })?;
    let circuit = build_rotation_circuit(&p).map_err(|e| e.to_string())?;
    let ops = conditional_operators(&circuit).map_err(|e| e.to_string())?;
    let simulated = zero_outcome(&ops)?.probability;
    ensure(
        (simulated - 19193.0 / 32768.0).abs() <= PROBABILITY_TOL,
        || format!("simulated P = {simulated}"),
    )?;
    let err = (FRAC_PI_4 - p.theta_star).abs();
    ensure((err - 2.579e-4).abs() <= 1e-7, || {
        format!("|pi/4 - theta*| = {err:e}")
    })?;
    Ok(format!(
        "n=8 k=181 P=19193/32768 (simulated {simulated:.15}) error={err:.4e}"
    ))
}

fn two_control_regression() -> Check {
    let p = SynthesisParams::from_nk(2, 3, 0).map_err(|e| e.to_string())?;
    let circuit = build_rotation_circuit(&p).map_err(|e| e.to_string())?;
    let ops = conditional_operators(&circuit).map_err(|e| e.to_string())?;
    let success = zero_outcome(&ops)?;
    let m = success.matrix.0;
    let ratio = m[1][1] / m[0][0];
    ensure(
        (ratio.re - 0.6).abs() <= OPERATOR_TOL && (ratio.im - 0.8).abs() <= OPERATOR_TOL,
        || format!("e^(i theta*) = {ratio}"),
    )?;
    ensure(
        m[0][1].norm() <= OPERATOR_TOL && m[1][0].norm() <= OPERATOR_TOL,
        || "success operator is not diagonal".to_string(),
    )?;
    ensure(
        (success.probability - 0.625).abs() <= PROBABILITY_TOL,
        || format!("P = {}", success.probability),
    )?;
    Ok(format!(
        "cos={:.12} sin={:.12} P={:.15}",
        ratio.re, ratio.im, success.probability
    ))
}

fn success_operators(cases: &[Case]) -> Check {
    let mut worst_op = 0.0f64;
    let mut worst_dist = 0.0f64;
    for (i, c) in cases.iter().enumerate() {
        let p = &c.params;
        let expected = Mat2::rz(p.theta_star).scale(Complex64::from_polar(1.0, p.global_phase()));
        let op = zero_outcome(&c.ops)?;
        let err = op.matrix.minus(expected).frobenius();
        let k = p.k as f64;
        let v = ((2.0f64).powi(p.n as i32) - k).atan2(k);
        ensure((v - p.global_phase()).abs() <= 1e-15, || {
            format!("case {i}: phase {v}")
        })?;
        ensure(err <= OPERATOR_TOL, || {
            format!(
                "case {i} theta={} eps={} n={} k={}: error {err:e}",
                c.theta, c.epsilon, p.n, p.k
            )
        })?;
        let dist = Mat2::rz(c.theta)
            .minus(Mat2::rz(p.theta_star))
            .operator_norm();
        let formula = 2.0 * ((c.theta - p.theta_star) / 2.0).sin().abs();
        ensure((dist - formula).abs() <= 1e-14 && dist <= c.epsilon, || {
            format!(
                "case {i}: distance {dist:e} formula {formula:e} eps {:e}",
                c.epsilon
            )
        })?;
        worst_op = worst_op.max(err);
        worst_dist = worst_dist.max(dist / c.epsilon);
    }
    let ns: Vec<u32> = cases.iter().map(|c| c.params.n).collect();
    Ok(format!(
        "{} cases, n in {}..={}, max operator error {worst_op:.2e}, max distance/eps {worst_dist:.3}",
        cases.len(),
        ns.iter().min().unwrap(),
        ns.iter().max().unwrap()
    ))
}

fn failure_operators(cases: &[Case]) -> Check {
    let mut worst_op = 0.0f64;
    let mut worst_prob = 0.0f64;
    let mut outcomes = 0usize;
    for (i, c) in cases.iter().enumerate() {
        let mut total = 0.0;
        for op in c.ops.iter().filter(|op| !op.outcome.is_zero()) {
            let (_, err) = global_phase_between(&op.matrix, &Mat2::z())
                .ok_or_else(|| format!("case {i}: zero operator at {}", op.outcome))?;
            ensure(err <= OPERATOR_TOL, || {
                format!("case {i} outcome {}: error {err:e}", op.outcome)
            })?;
            worst_op = worst_op.max(err);
            total += op.probability;
            outcomes += 1;
        }
        let t = c.params.tan_half_star.to_f64();
        let expected = (1.0 - t * t) / 2.0;
        let diff = (total - expected).abs();
        ensure(diff <= OPERATOR_TOL, || {
            format!("case {i}: failure mass {total} vs {expected}")
        })?;
        worst_prob = worst_prob.max(diff);
    }
    Ok(format!(
        "{outcomes} failure outcomes, max Z error {worst_op:.2e}, max mass error {worst_prob:.2e}"
    ))
}

/// Places the comparator's controls at their full-register bit positions so
/// it can be compared against the oracle on all `n` bits.
fn embed(circuit: &Circuit, n: usize) -> (Circuit, usize, usize) {
    let r = circuit.registers;
    let t = circuit.dropped_low_bits as usize;
    let map = |q: usize| q + t;
    let gates: Vec<Gate> = circuit
        .gates
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.target = map(g.target);
            for c in &mut g.controls {
                c.qubit = map(c.qubit);
            }
            g
        })
        .collect();
    let regs = Registers {
        controls: n,
        internal: r.internal,
        target: 1,
    };
    let embedded = Circuit::new(regs, 0, gates, None).expect("embedding is valid");
    (embedded, n + r.internal, r.internal)
}

fn comparator_equivalence() -> Check {
    let mut checked = 0u64;
    for n in 2..=6u32 {
        for k in 1..(1u64 << n) {
            let built = build_comparator(n, k).map_err(|e| e.to_string())?;
            let (circuit, target, internal) = embed(&built, n as usize);
            let width = circuit.num_qubits;
            let controls: Vec<usize> = (0..n as usize).collect();
            for x in 0..(1usize << n) {
                for y in 0..2usize {
                    let index = x | (y << target);
                    let mut got = StateVector::basis(width, index);
                    got.apply_circuit(&circuit).map_err(|e| e.to_string())?;
                    let mut want = StateVector::basis(width, index);
                    oracle_ge_k(&mut want, &controls, k, target).map_err(|e| e.to_string())?;
                    ensure(got == want, || {
                        format!("n={n} k={k} x={x} target={y} internal={internal}")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "{checked} basis states across n=2..6, zero failures"
    ))
}

fn resource_bounds(cases: &[Case]) -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut extra = Vec::new();
    for _ in 0..2000 {
        let theta = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
        let epsilon = (2.0f64).powf(-rng.random_range(0.2..60.0));
        extra.push((theta, epsilon));
    }
    let all = cases
        .iter()
        .map(|c| (c.theta, c.epsilon))
        .chain(extra)
        .chain([(FRAC_PI_4, 1e-2), (2.0 * 0.5f64.atan(), 0.5)]);
    let mut general = 0;
    let mut count = 0;
    for (theta, epsilon) in all {
        let p = synthesize(theta, epsilon).map_err(|e| e.to_string())?;
        let circuit = build_rotation_circuit(&p).map_err(|e| e.to_string())?;
        let r = resources(&circuit);
        let log_inv_eps = ancilla_count(epsilon).map_err(|e| e.to_string())? - 1;
        count += 1;
        if p.is_trivial_comparison() || p.is_identity() {
            ensure(r.toffoli_count == 0, || {
                format!("theta={theta} eps={epsilon}: trivial path uses Toffolis")
            })?;
            continue;
        }
        general += 1;
        let tz = p.k.trailing_zeros();
        let formula = 2 * (p.n - 1 - tz) as usize;
        ensure(r.toffoli_count == formula, || {
            format!(
                "n={} k={}: {} Toffolis, formula {formula}",
                p.n, p.k, r.toffoli_count
            )
        })?;
        ensure(r.toffoli_count <= 2 * log_inv_eps as usize, || {
            format!(
                "n={} k={}: {} Toffolis above bound",
                p.n, p.k, r.toffoli_count
            )
        })?;
        ensure(r.gate_depth == r.toffoli_count + 3, || {
            format!(
                "n={} k={}: depth {} vs {}",
                p.n,
                p.k,
                r.gate_depth,
                r.toffoli_count + 3
            )
        })?;
    }
    Ok(format!(
        "{count} circuits, {general} general-case, all match 2(n-1-tz(k)) and depth+3"
    ))
}

fn repetition_statistics() -> Check {
    let p = synthesize(FRAC_PI_4, 1e-2).map_err(|e| e.to_string())?;
    let r =
        monte_carlo_with(&p, &MonteCarloConfig::new(100_000, 2025)).map_err(|e| e.to_string())?;
    let expected = 32768.0 / 19193.0;
    let sigma = r.mean_repetitions_sigma;
    ensure((r.mean_repetitions - expected).abs() <= 3.0 * sigma, || {
        format!("mean {} vs {expected} (sigma {sigma})", r.mean_repetitions)
    })?;
    for m in 1..=10u64 {
        let tail = *r.tail_counts.get(&m).unwrap_or(&0) as f64 / r.trials as f64;
        let bound = 0.5f64.powi(m as i32);
        let s = (bound * (1.0 - bound) / r.trials as f64).sqrt();
        ensure(tail <= bound + 3.0 * s, || {
            format!("P(X>{m}) = {tail} above {bound}")
        })?;
    }
    let log_inv_eps = (1.0f64 / 1e-2).log2().ceil();
    ensure(r.mean_toffoli < 4.0 * log_inv_eps, || {
        format!("mean Toffoli {}", r.mean_toffoli)
    })?;
    ensure(r.mean_depth < 4.0 * log_inv_eps + 6.0, || {
        format!("mean depth {}", r.mean_depth)
    })?;
    ensure(r.operator_checks_passed == r.operator_checks, || {
        format!(
            "{} of {} full simulations failed",
            r.operator_checks - r.operator_checks_passed,
            r.operator_checks
        )
    })?;
    Ok(format!(
        "mean {:.5} vs {expected:.5} (3 sigma {:.5}), mean Toffoli {:.3} < {}, mean depth {:.3} < {}",
        r.mean_repetitions,
        3.0 * sigma,
        r.mean_toffoli,
        4.0 * log_inv_eps,
        r.mean_depth,
        4.0 * log_inv_eps + 6.0
    ))
}

fn dyadic_exactness() -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    for i in 0..50 {
        let m = rng.random_range(0..=10u32);
        let scale = 1i64 << m;
        let j = rng.random_range(-scale..=scale);
        let theta = 2.0 * (j as f64 / scale as f64).atan();
        let n = m + 1;
        let eps = (2.0f64).powi(-(m as i32));
        let got = ancilla_count(eps).map_err(|e| e.to_string())?;
        ensure(got == n, || format!("case {i}: eps {eps} selects n={got}"))?;
        let p = synthesize(theta, eps).map_err(|e| e.to_string())?;
        ensure((p.theta_star - theta).abs() <= PROBABILITY_TOL, || {
            format!(
                "case {i}: j={j} m={m} theta*={} theta={theta}",
                p.theta_star
            )
        })?;
    }
    let mut last = f64::INFINITY;
    for n in 1..=62u32 {
        let b = SynthesisParams::from_nk(n, 1 << (n - 1), 0)
            .map_err(|e| e.to_string())?
            .error_bound();
        ensure(b < last && b == (2.0f64).powi(1 - n as i32), || {
            format!("bound at n={n} is {b}")
        })?;
        last = b;
    }
    Ok("50 dyadic angles exact at n=m+1; 2^(1-n) strictly decreasing for n=1..62".to_string())
}

fn sweep_regression() -> Check {
    let n = ancilla_count(3.8e-9).map_err(|e| e.to_string())?;
    let alt = 1e-4 / 2.7e5;
    let n_alt = ancilla_count(alt).map_err(|e| e.to_string())?;
    let context = format!("(eps={alt:.3e} gives n={n_alt})");
    ensure(n == 33, || {
        format!("eps=3.8e-9 yields n={n}, expected 33 {context}")
    })?;
    Ok(format!("eps=3.8e-9 yields n=33 {context}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cases = random_cases();
    let simulated = start.elapsed();
    let criteria: Vec<Criterion> = vec![
        ("T-gate regression", Box::new(t_gate_regression)),
        (
            "two-control regression (n=2, k=3)",
            Box::new(two_control_regression),
        ),
        (
            "success-branch operator",
            Box::new(|| success_operators(&cases)),
        ),
        (
            "failure-branch operators",
            Box::new(|| failure_operators(&cases)),
        ),
        (
            "comparator oracle equivalence",
            Box::new(comparator_equivalence),
        ),
        ("resource formulas", Box::new(|| resource_bounds(&cases))),
        ("repetition statistics", Box::new(repetition_statistics)),
        (
            "dyadic exactness and bound monotonicity",
            Box::new(dyadic_exactness),
        ),
        ("epsilon sweep", Box::new(sweep_regression)),
    ];
    println!(
        "simulated {} random circuits in {:.1?}",
        cases.len(),
        simulated
    );
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (status, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{status} [{}] {name}: {detail} ({:.1?})",
            i + 1,
            t.elapsed()
        );
    }
    println!(
        "{} of {} criteria passed in {:.1?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! The repeat-until-success loop: run the attempt circuit, measure the
//! controls, undo the `Z` on failure, repeat until the outcome is all zero.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`). Monte Carlo trial `i`
//! uses the generator seeded with the report seed and switched to stream
//! `i`, so every trial is reproducible on its own and reports do not depend
//! on how trials are scheduled across threads.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_rotation_circuit, resources, Circuit, ResourceReport};
use crate::error::{Error, Result};
use crate::sim::{
    conditional_operators_with_cap, sample_index, states_equal_up_to_phase, Mat2, Outcome,
    StateVector, DEFAULT_MAX_QUBITS,
};
use crate::synthesis::{expected_repetitions, Fraction, SynthesisParams};
use crate::tolerance;

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

pub const DEFAULT_CHECK_TRIALS: u64 = 100;

/// Amplitudes of the rotation target.
pub type TargetState = [Complex64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub repetitions: u64,
    pub total_toffoli: u64,
    pub total_depth: u64,
    /// Final target equals `R_theta_star` applied to the initial target, up to phase.
    pub final_operator_check: bool,
    pub failed_outcomes: BTreeMap<String, u64>,
    pub final_state: TargetState,
}

/// Owns the attempt circuit for one parameter set.
#[derive(Debug, Clone)]
pub struct RusRunner {
    params: SynthesisParams,
    circuit: Circuit,
    resources: ResourceReport,
    max_qubits: usize,
    max_attempts: u64,
}

impl RusRunner {
    pub fn new(params: SynthesisParams) -> Result<Self> {
        let circuit = build_rotation_circuit(&params)?;
        let resources = resources(&circuit);
        Ok(Self {
            params,
            circuit,
            resources,
            max_qubits: DEFAULT_MAX_QUBITS,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        })
    }

    pub fn with_max_qubits(mut self, max_qubits: usize) -> Self {
        self.max_qubits = max_qubits;
        self
    }

    pub fn with_max_attempts(mut self, max_attempts: u64) -> Self {
        self.max_attempts = max_attempts;
        self
    }

    pub fn params(&self) -> &SynthesisParams {
        &self.params
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn resources(&self) -> &ResourceReport {
        &self.resources
    }

    /// One attempt: fresh `|0>^n` controls, full circuit simulation,
    /// sampled measurement of the controls, `Z` on a nonzero outcome.
    pub fn run_once<R: Rng + ?Sized>(
        &self,
        state: TargetState,
        rng: &mut R,
    ) -> Result<(Outcome, TargetState)> {
        let regs = self.circuit.registers;
        if self.params.is_identity() {
            return Ok((Outcome { bits: 0, width: 0 }, state));
        }
        if self.circuit.num_qubits > self.max_qubits {
            return Err(Error::SimulationCap {
                qubits: self.circuit.num_qubits,
                cap: self.max_qubits,
            });
        }
        let mut sv = StateVector::with_target(self.circuit.num_qubits, state);
        sv.apply_circuit(&self.circuit)?;
        let controls: Vec<usize> = (0..regs.controls).collect();
        let bits = sv.measure(&controls, rng);
        let outcome = Outcome {
            bits,
            width: regs.controls as u32,
        };

        let amps = sv.amplitudes();
        let base = bits as usize;
        let mut out = [amps[base], amps[base | 1 << self.circuit.target()]];
        let norm = (out[0].norm_sqr() + out[1].norm_sqr()).sqrt();
        out.iter_mut().for_each(|a| *a /= norm);
        if !outcome.is_zero() {
            out[1] = -out[1];
        }
        Ok((outcome, out))
    }

    pub fn run_until_success<R: Rng + ?Sized>(
        &self,
        initial: TargetState,
        rng: &mut R,
    ) -> Result<RunStats> {
        let mut state = initial;
        let mut repetitions = 0u64;
        let mut failed_outcomes = BTreeMap::new();
        if !self.params.is_identity() {
            loop {
                if repetitions >= self.max_attempts {
                    return Err(Error::Runaway {
                        cap: self.max_attempts,
                    });
                }
                let (outcome, next) = self.run_once(state, rng)?;
                repetitions += 1;
                state = next;
                if outcome.is_zero() {
                    break;
                }
                *failed_outcomes.entry(outcome.to_string()).or_insert(0) += 1;
            }
        }
        let expected = Mat2::rz(self.params.theta_star).apply(initial);
        Ok(RunStats {
            repetitions,
            total_toffoli: repetitions * self.resources.toffoli_count as u64,
            total_depth: repetitions * self.resources.gate_depth as u64,
            final_operator_check: states_equal_up_to_phase(state, expected, tolerance::FINAL_STATE),
            failed_outcomes,
            final_state: state,
        })
    }

    /// Exact per-attempt success probability, read off the simulated outcome
    /// distribution.
    pub fn simulated_success_probability(&self) -> Result<f64> {
        if self.params.is_identity() {
            return Ok(1.0);
        }
        let ops = conditional_operators_with_cap(&self.circuit, self.max_qubits)?;
        Ok(ops
            .iter()
            .filter(|op| op.outcome.is_zero())
            .map(|op| op.probability)
            .sum())
    }
}

pub fn run_once<R: Rng + ?Sized>(
    params: &SynthesisParams,
    state: TargetState,
    rng: &mut R,
) -> Result<(Outcome, TargetState)> {
    RusRunner::new(*params)?.run_once(state, rng)
}

pub fn run_until_success<R: Rng + ?Sized>(
    params: &SynthesisParams,
    state: TargetState,
    rng: &mut R,
) -> Result<RunStats> {
    RusRunner::new(*params)?.run_until_success(state, rng)
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Haar-ish random target: uniform point on the Bloch sphere.
pub fn random_target<R: Rng + ?Sized>(rng: &mut R) -> TargetState {
    let cos_t: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let half = cos_t.acos() / 2.0;
    [
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), phi),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    /// Leading trials that replay the full circuit and check the final state.
    pub check_trials: u64,
    pub max_qubits: usize,
    pub max_attempts: u64,
}

impl MonteCarloConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            check_trials: DEFAULT_CHECK_TRIALS,
            max_qubits: DEFAULT_MAX_QUBITS,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub seed: u64,
    pub trials: u64,
    pub n: u32,
    pub k: u64,
    pub success_probability: f64,
    pub success_fraction: Fraction,
    pub expected_repetitions: f64,
    /// Theoretical upper bound on the mean number of attempts.
    pub repetitions_bound: f64,
    pub mean_repetitions: f64,
    /// Standard error of `mean_repetitions` under the geometric law.
    pub mean_repetitions_sigma: f64,
    pub toffoli_per_attempt: usize,
    pub depth_per_attempt: usize,
    pub mean_toffoli: f64,
    pub mean_depth: f64,
    /// `4 ceil(log2(1/epsilon)) = 4 (n - 1)`.
    pub toffoli_bound: f64,
    /// `4 ceil(log2(1/epsilon)) + 6`.
    pub depth_bound: f64,
    /// Number of trials with `X = m`.
    pub histogram: BTreeMap<u64, u64>,
    /// Number of trials with `X > m`, for `m = 1 ..= max(10, max X)`.
    pub tail_counts: BTreeMap<u64, u64>,
    pub operator_checks: u64,
    pub operator_checks_passed: u64,
}

pub fn monte_carlo(params: &SynthesisParams, trials: u64, seed: u64) -> Result<MonteCarloReport> {
    monte_carlo_with(params, &MonteCarloConfig::new(trials, seed))
}

pub fn monte_carlo_with(
    params: &SynthesisParams,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloReport> {
    if cfg.trials == 0 {
        return Err(crate::error::invalid("at least one trial is required"));
    }
    let runner = RusRunner::new(*params)?
        .with_max_qubits(cfg.max_qubits)
        .with_max_attempts(cfg.max_attempts);
    let identity = params.is_identity();
    let p_success = runner.simulated_success_probability()?;
    let probs = [p_success, (1.0 - p_success).max(0.0)];

    let samples: Vec<(u64, Option<bool>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, Option<bool>)> {
            if identity {
                return Ok((0, None));
            }
            let mut rng = trial_rng(cfg.seed, trial);
            if trial < cfg.check_trials {
                let initial = random_target(&mut rng);
                let stats = runner.run_until_success(initial, &mut rng)?;
                return Ok((stats.repetitions, Some(stats.final_operator_check)));
            }
            let mut x = 0u64;
            loop {
                if x >= cfg.max_attempts {
                    return Err(Error::Runaway {
                        cap: cfg.max_attempts,
                    });
                }
                x += 1;
                if sample_index(&probs, &mut rng) == 0 {
                    return Ok((x, None));
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut histogram = BTreeMap::new();
    let mut total = 0u64;
    let mut checks = 0u64;
    let mut passed = 0u64;
    for &(x, check) in &samples {
        *histogram.entry(x).or_insert(0) += 1;
        total += x;
        if let Some(ok) = check {
            checks += 1;
            passed += ok as u64;
        }
    }
    let max_x = histogram.keys().next_back().copied().unwrap_or(0);
    let tail_counts = (1..=max_x.max(10))
        .map(|m| (m, histogram.range(m + 1..).map(|(_, c)| c).sum()))
        .collect();

    let res = runner.resources();
    let mean = total as f64 / cfg.trials as f64;
    let p = params.success_probability();
    let sigma = if identity {
        0.0
    } else {
        (1.0 - p).sqrt() / p / (cfg.trials as f64).sqrt()
    };
    let log_inv_eps = (params.n - 1) as f64;
    Ok(MonteCarloReport {
        seed: cfg.seed,
        trials: cfg.trials,
        n: params.n,
        k: params.k,
        success_probability: p,
        success_fraction: params.success_fraction(),
        expected_repetitions: expected_repetitions(params),
        repetitions_bound: 2.0,
        mean_repetitions: mean,
        mean_repetitions_sigma: sigma,
        toffoli_per_attempt: res.toffoli_count,
        depth_per_attempt: res.gate_depth,
        mean_toffoli: mean * res.toffoli_count as f64,
        mean_depth: mean * res.gate_depth as f64,
        toffoli_bound: 4.0 * log_inv_eps,
        depth_bound: 4.0 * log_inv_eps + 6.0,
        histogram,
        tail_counts,
        operator_checks: checks,
        operator_checks_passed: passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::synthesize;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn plus() -> TargetState {
        [
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ]
    }

    #[test]
    fn identity_path_is_noop() {
        let p = synthesize(0.0, 1e-3).unwrap();
        let mut rng = trial_rng(1, 0);
        let (o, s) = run_once(&p, plus(), &mut rng).unwrap();
        assert_eq!(o.width, 0);
        assert_eq!(s, plus());
        let stats = run_until_success(&p, plus(), &mut rng).unwrap();
        assert_eq!(stats.repetitions, 0);
        assert!(stats.final_operator_check);
    }

    #[test]
    fn quarter_turn_succeeds_first_time() {
        let p = synthesize(FRAC_PI_2, 1e-4).unwrap();
        let mut rng = trial_rng(2, 0);
        let stats = run_until_success(&p, plus(), &mut rng).unwrap();
        assert_eq!(stats.repetitions, 1);
        assert!(stats.final_operator_check);
        let expected = Complex64::new(0.0, FRAC_1_SQRT_2);
        assert!(
            (stats.final_state[1] / stats.final_state[0] * FRAC_1_SQRT_2 - expected).norm() < 1e-12
        );
    }

    #[test]
    fn two_control_success_state() {
        let p = synthesize(2.0 * 0.5f64.atan(), 0.5).unwrap();
        let runner = RusRunner::new(p).unwrap();
        let mut successes = 0;
        for trial in 0..400 {
            let mut rng = trial_rng(3, trial);
            let (o, s) = runner.run_once(plus(), &mut rng).unwrap();
            if o.is_zero() {
                successes += 1;
                let ratio = s[1] / s[0];
                assert!((ratio - Complex64::new(0.6, 0.8)).norm() < 1e-12);
            } else {
                // Z was undone, so the target is back to |+> up to phase.
                assert!(states_equal_up_to_phase(s, plus(), 1e-12));
            }
        }
        // 400 draws at p = 5/8: mean 250, sd ~9.7.
        assert!((200..300).contains(&successes), "{successes}");
    }

    #[test]
    fn t_gate_final_state_always_matches() {
        let p = synthesize(FRAC_PI_4, 1e-2).unwrap();
        let runner = RusRunner::new(p).unwrap();
        for trial in 0..30 {
            let mut rng = trial_rng(11, trial);
            let initial = random_target(&mut rng);
            let stats = runner.run_until_success(initial, &mut rng).unwrap();
            assert!(stats.repetitions >= 1);
            assert!(stats.final_operator_check);
            assert_eq!(stats.total_toffoli, stats.repetitions * 14);
            assert_eq!(stats.total_depth, stats.repetitions * 17);
        }
    }

    #[test]
    fn attempt_cap_reports_runaway() {
        let p = synthesize(FRAC_PI_4, 1e-2).unwrap();
        let runner = RusRunner::new(p).unwrap().with_max_attempts(1);
        let failing = (0..200)
            .find_map(|trial| {
                let mut rng = trial_rng(5, trial);
                runner.run_until_success(plus(), &mut rng).err()
            })
            .expect("some trial fails its first attempt");
        assert_eq!(failing, Error::Runaway { cap: 1 });
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let p = synthesize(FRAC_PI_4, 1e-2).unwrap();
        let mut cfg = MonteCarloConfig::new(2000, 99);
        cfg.check_trials = 5;
        let a = monte_carlo_with(&p, &cfg).unwrap();
        let b = monte_carlo_with(&p, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.operator_checks, 5);
        assert_eq!(a.operator_checks_passed, 5);
        assert!(a.mean_repetitions >= 1.0);
        assert_eq!(a.histogram.values().sum::<u64>(), 2000);
    }

    #[test]
    fn monte_carlo_identity_and_guards() {
        let p = synthesize(0.0, 1e-2).unwrap();
        let r = monte_carlo(&p, 100, 0).unwrap();
        assert_eq!(r.mean_repetitions, 0.0);
        assert!(monte_carlo(&p, 0, 0).is_err());
    }

    #[test]
    fn quarter_turn_mean_is_exactly_one() {
        let p = synthesize(FRAC_PI_2, 1e-6).unwrap();
        let r = monte_carlo(&p, 1000, 4).unwrap();
        assert_eq!(r.mean_repetitions, 1.0);
        assert_eq!(r.tail_counts[&1], 0);
    }
}

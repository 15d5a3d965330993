//! Dense statevector simulation.
//!
//! Amplitude index bit `q` is qubit `q`, so qubit 0 is the least significant
//! bit of both the index and the control-register integer.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{invalid, Error, Result};
use crate::tolerance;

/// Default refusal threshold: `2^26` complex doubles is about 1 GiB.
pub const DEFAULT_MAX_QUBITS: usize = 26;

const PAR_THRESHOLD: usize = 1 << 14;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(invalid(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let state = Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > tolerance::NORM {
            return Err(invalid(format!(
                "state has squared norm {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    /// Product state with `target` on the last qubit and every other qubit in `|0>`.
    pub fn with_target(num_qubits: usize, target: [Complex64; 2]) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = target[0];
        amplitudes[1 << (num_qubits - 1)] = target[1];
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate()?;
        if let Some(q) = gate.qubits().find(|&q| q >= self.num_qubits) {
            return Err(invalid(format!(
                "gate {gate} touches qubit {q} on a {}-qubit state",
                self.num_qubits
            )));
        }
        let t = gate.target;
        match gate.kind {
            GateKind::H => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                self.for_each_pair(t, |_, a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * h;
                    *b = (x - y) * h;
                });
            }
            GateKind::S => self.phase(t, I),
            GateKind::SDagger => self.phase(t, -I),
            GateKind::Z => self.phase(t, -ONE),
            GateKind::X | GateKind::Cnot | GateKind::Toffoli => {
                let (mask, value) = gate.controls.iter().fold((0usize, 0usize), |(m, v), c| {
                    let bit = 1usize << c.qubit;
                    (m | bit, if c.polarity.active_bit() { v | bit } else { v })
                });
                self.for_each_pair(t, |i, a, b| {
                    if i & mask == value {
                        std::mem::swap(a, b);
                    }
                });
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits != self.num_qubits {
            return Err(invalid(format!(
                "circuit has {} qubits, state has {}",
                circuit.num_qubits, self.num_qubits
            )));
        }
        circuit.gates.iter().try_for_each(|g| self.apply_gate(g))
    }

    fn phase(&mut self, target: usize, factor: Complex64) {
        self.for_each_pair(target, |_, _, b| *b *= factor);
    }

    /// Visits every amplitude pair differing only in `target`; `i` is the
    /// index with the target bit clear.
    fn for_each_pair<F>(&mut self, target: usize, f: F)
    where
        F: Fn(usize, &mut Complex64, &mut Complex64) + Sync,
    {
        let stride = 1usize << target;
        let block = stride << 1;
        let visit = |(b, chunk): (usize, &mut [Complex64])| {
            let (lo, hi) = chunk.split_at_mut(stride);
            let base = b * block;
            for (o, (a, c)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                f(base + o, a, c);
            }
        };
        if self.amplitudes.len() >= PAR_THRESHOLD {
            let min_len = (PAR_THRESHOLD / block).max(1);
            self.amplitudes
                .par_chunks_mut(block)
                .enumerate()
                .with_min_len(min_len)
                .for_each(visit);
        } else {
            self.amplitudes
                .chunks_mut(block)
                .enumerate()
                .for_each(visit);
        }
    }

    /// Marginal distribution of `qubits`; entry `x` has bit `j` = qubit `qubits[j]`.
    pub fn marginal(&self, qubits: &[usize]) -> Vec<f64> {
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[extract(i, qubits)] += a.norm_sqr();
        }
        probs
    }

    /// Samples `qubits`, collapses the state onto the outcome and renormalizes.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> u64 {
        let probs = self.marginal(qubits);
        let outcome = sample_index(&probs, rng);
        let keep = probs[outcome].sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if extract(i, qubits) == outcome {
                *a /= keep;
            } else {
                *a = ZERO;
            }
        }
        outcome as u64
    }
}

fn extract(index: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((index >> q) & 1) << j))
}

/// Inverse-CDF sampling over an (approximately) normalized distribution.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        if u < p {
            return i;
        }
        u -= p;
    }
    last
}

/// Flips `target` on every basis state whose `control` register encodes an
/// integer `>= k`; `control[j]` holds bit `j`.
pub fn oracle_ge_k(
    state: &mut StateVector,
    control: &[usize],
    k: u64,
    target: usize,
) -> Result<()> {
    if control.len() > 63 || k > 1u64 << control.len() {
        return Err(invalid(format!(
            "k = {k} out of range for a {}-qubit register",
            control.len()
        )));
    }
    if control
        .iter()
        .chain([&target])
        .any(|&q| q >= state.num_qubits)
    {
        return Err(invalid("oracle qubit out of range"));
    }
    let tbit = 1usize << target;
    for i in 0..state.amplitudes.len() {
        if i & tbit == 0 && extract(i, control) as u64 >= k {
            state.amplitudes.swap(i, i | tbit);
        }
    }
    Ok(())
}

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Self::diag(ONE, ONE)
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn z() -> Self {
        Self::diag(ONE, -ONE)
    }

    /// `R_theta = diag(1, e^{i theta})`.
    pub fn rz(theta: f64) -> Self {
        Self::diag(ONE, Complex64::from_polar(1.0, theta))
    }

    pub fn scale(self, s: Complex64) -> Self {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn minus(self, other: Self) -> Self {
        let (a, b) = (self.0, other.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }

    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.0.iter().flatten().copied()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm, from the largest eigenvalue of `A^dagger A`.
    pub fn operator_norm(&self) -> f64 {
        let m = self.0;
        let a = m[0][0].norm_sqr() + m[1][0].norm_sqr();
        let d = m[0][1].norm_sqr() + m[1][1].norm_sqr();
        let b = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
        let half = (a - d) / 2.0;
        ((a + d) / 2.0 + (half * half + b.norm_sqr()).sqrt())
            .max(0.0)
            .sqrt()
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

/// True iff some unit-modulus `lambda` gives `||a - lambda b||_F <= tol`.
///
/// `lambda` is taken from the ratio of the entries where `b` is largest.
pub fn equal_up_to_global_phase(a: &Mat2, b: &Mat2, tol: f64) -> Result<bool> {
    if a.frobenius() == 0.0 || b.frobenius() == 0.0 {
        return Err(invalid("global-phase comparison of a zero matrix"));
    }
    Ok(global_phase_between(a, b).is_some_and(|(_, dist)| dist <= tol))
}

/// Best phase `lambda` with `a ~ lambda b`, and the residual `||a - lambda b||_F`.
pub fn global_phase_between(a: &Mat2, b: &Mat2) -> Option<(Complex64, f64)> {
    let (idx, pivot) = b
        .entries()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))?;
    let ratio = a.entries().nth(idx)? / pivot;
    if ratio.norm() == 0.0 || !ratio.norm().is_finite() {
        return Some((ONE, a.minus(*b).frobenius()));
    }
    let lambda = ratio / ratio.norm();
    Some((lambda, a.minus(b.scale(lambda)).frobenius()))
}

/// True iff two single-qubit states agree up to a global phase.
pub fn states_equal_up_to_phase(a: [Complex64; 2], b: [Complex64; 2], tol: f64) -> bool {
    let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
    let lambda = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    let d0 = a[0] * lambda - b[0];
    let d1 = a[1] * lambda - b[1];
    (d0.norm_sqr() + d1.norm_sqr()).sqrt() <= tol
}

/// Measurement outcome of the control register; bit `j` is control qubit `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Outcome {
    pub bits: u64,
    pub width: u32,
}

impl Outcome {
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width == 0 {
            return f.write_str("-");
        }
        write!(f, "{:0width$b}", self.bits, width = self.width as usize)
    }
}

/// Normalized operator applied to the target for one control outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalOperator {
    pub outcome: Outcome,
    pub matrix: Mat2,
    /// Outcome probability with the target prepared in `|0>`.
    pub probability: f64,
    /// `|P(x | target |0>) - P(x | target |1>)|`; zero for a sound circuit.
    pub input_dependence: f64,
}

fn check_cap(circuit: &Circuit, max_qubits: usize) -> Result<()> {
    if circuit.num_qubits > max_qubits {
        return Err(Error::SimulationCap {
            qubits: circuit.num_qubits,
            cap: max_qubits,
        });
    }
    Ok(())
}

/// Runs `circuit` on `|0..0> (x) target`.
pub fn simulate(
    circuit: &Circuit,
    target: [Complex64; 2],
    max_qubits: usize,
) -> Result<StateVector> {
    check_cap(circuit, max_qubits)?;
    let mut state = StateVector::with_target(circuit.num_qubits, target);
    state.apply_circuit(circuit)?;
    Ok(state)
}

pub fn conditional_operators(circuit: &Circuit) -> Result<Vec<ConditionalOperator>> {
    conditional_operators_with_cap(circuit, DEFAULT_MAX_QUBITS)
}

/// Simulates `circuit` with the target in `|0>` and in `|1>` (all ancillas
/// `|0>`) and assembles, per control outcome, the 2x2 map on the target.
///
/// Fails with [`Error::ConstructionBug`] if any weight is left on the
/// internal ancillas.
pub fn conditional_operators_with_cap(
    circuit: &Circuit,
    max_qubits: usize,
) -> Result<Vec<ConditionalOperator>> {
    let runs = [
        simulate(circuit, [ONE, ZERO], max_qubits)?,
        simulate(circuit, [ZERO, ONE], max_qubits)?,
    ];
    let regs = circuit.registers;
    let width = regs.controls as u32;
    let control_mask = (1usize << regs.controls) - 1;
    let tbit = 1usize << circuit.target();

    for run in &runs {
        let mut worst = (0.0f64, 0usize);
        let mut residual = 0.0;
        for (i, a) in run.amplitudes.iter().enumerate() {
            if (i & !tbit) >> regs.controls != 0 {
                residual += a.norm_sqr();
                if a.norm_sqr() > worst.0 {
                    worst = (a.norm_sqr(), i);
                }
            }
        }
        if residual > tolerance::ANCILLA_RESIDUAL {
            let outcome = Outcome {
                bits: (worst.1 & control_mask) as u64,
                width,
            };
            return Err(Error::ConstructionBug {
                outcome: outcome.to_string(),
                residual,
            });
        }
    }

    let mut ops = Vec::new();
    for x in 0..=control_mask {
        let col = |r: &StateVector| [r.amplitudes[x], r.amplitudes[x | tbit]];
        let (c0, c1) = (col(&runs[0]), col(&runs[1]));
        let p0 = c0[0].norm_sqr() + c0[1].norm_sqr();
        let p1 = c1[0].norm_sqr() + c1[1].norm_sqr();
        if p0.max(p1) < tolerance::NEGLIGIBLE_PROBABILITY {
            continue;
        }
        let norm = ((p0 + p1) / 2.0).sqrt();
        let matrix = Mat2([[c0[0], c1[0]], [c0[1], c1[1]]]).scale(Complex64::new(1.0 / norm, 0.0));
        ops.push(ConditionalOperator {
            outcome: Outcome {
                bits: x as u64,
                width,
            },
            matrix,
            probability: p0,
            input_dependence: (p0 - p1).abs(),
        });
    }
    Ok(ops)
}

/// Distribution of control outcomes for an arbitrary target input.
pub fn outcome_distribution(
    circuit: &Circuit,
    target: [Complex64; 2],
    max_qubits: usize,
) -> Result<Vec<f64>> {
    let state = simulate(circuit, target, max_qubits)?;
    let controls: Vec<usize> = (0..circuit.registers.controls).collect();
    Ok(state.marginal(&controls))
}

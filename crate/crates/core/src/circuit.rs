//! Gate arrays over Clifford+Toffoli: the classical-constant `>= k`
//! comparator and the rotation circuit built around it.
//!
//! Qubit layout is fixed: the control register first (least significant
//! bit at qubit 0), then the comparator's internal carry ancillas, then the
//! rotation target as the last qubit.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::synthesis::{SynthesisParams, MAX_N};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    S,
    #[serde(rename = "SDG")]
    SDagger,
    X,
    Z,
    #[serde(rename = "CX")]
    Cnot,
    #[serde(rename = "CCX")]
    Toffoli,
}

impl GateKind {
    pub fn control_count(self) -> usize {
        match self {
            GateKind::Cnot => 1,
            GateKind::Toffoli => 2,
            _ => 0,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::SDagger => "SDG",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Cnot => "CX",
            GateKind::Toffoli => "CCX",
        }
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "H" => GateKind::H,
            "S" => GateKind::S,
            "SDG" => GateKind::SDagger,
            "X" => GateKind::X,
            "Z" => GateKind::Z,
            "CX" => GateKind::Cnot,
            "CCX" => GateKind::Toffoli,
            other => return Err(format!("unknown gate kind `{other}`")),
        })
    }
}

/// Which basis state of a control qubit makes the gate fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    /// Control value that fires the gate.
    pub fn active_bit(self) -> bool {
        self == Polarity::Positive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Positive,
        }
    }

    pub fn neg(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub controls: Vec<Control>,
    pub target: usize,
}

impl Gate {
    pub fn new(kind: GateKind, controls: Vec<Control>, target: usize) -> Result<Self> {
        let gate = Self {
            kind,
            controls,
            target,
        };
        gate.validate()?;
        Ok(gate)
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        debug_assert_eq!(kind.control_count(), 0);
        Self {
            kind,
            controls: Vec::new(),
            target,
        }
    }

    pub fn cnot(control: Control, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            controls: vec![control],
            target,
        }
    }

    pub fn toffoli(a: Control, b: Control, target: usize) -> Self {
        Self {
            kind: GateKind::Toffoli,
            controls: vec![a, b],
            target,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.controls.len() != self.kind.control_count() {
            return Err(invalid(format!(
                "{} takes {} controls, got {}",
                self.kind.mnemonic(),
                self.kind.control_count(),
                self.controls.len()
            )));
        }
        let mut seen = vec![self.target];
        for c in &self.controls {
            if seen.contains(&c.qubit) {
                return Err(invalid(format!(
                    "qubit {} appears twice in one {} gate",
                    c.qubit,
                    self.kind.mnemonic()
                )));
            }
            seen.push(c.qubit);
        }
        Ok(())
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls
            .iter()
            .map(|c| c.qubit)
            .chain(std::iter::once(self.target))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.mnemonic())?;
        for c in &self.controls {
            let bang = if c.polarity == Polarity::Negative {
                "!"
            } else {
                ""
            };
            write!(f, " {bang}q{}", c.qubit)?;
        }
        write!(f, " q{}", self.target)
    }
}

/// Register sizes; `target` is always one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registers {
    pub controls: usize,
    pub internal: usize,
    pub target: usize,
}

impl Registers {
    pub fn total(&self) -> usize {
        self.controls + self.internal + self.target
    }

    pub fn control(&self, i: usize) -> usize {
        debug_assert!(i < self.controls);
        i
    }

    pub fn internal(&self, i: usize) -> usize {
        debug_assert!(i < self.internal);
        self.controls + i
    }

    pub fn target_qubit(&self) -> usize {
        self.controls + self.internal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub registers: Registers,
    /// Least significant comparison bits removed from the control register
    /// because the corresponding bits of `k` are zero.
    pub dropped_low_bits: u32,
    pub gates: Vec<Gate>,
    pub metadata: Option<SynthesisParams>,
}

impl Circuit {
    pub fn new(
        registers: Registers,
        dropped_low_bits: u32,
        gates: Vec<Gate>,
        metadata: Option<SynthesisParams>,
    ) -> Result<Self> {
        let c = Self {
            num_qubits: registers.total(),
            registers,
            dropped_low_bits,
            gates,
            metadata,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.registers.target != 1 {
            return Err(invalid("target register must hold exactly one qubit"));
        }
        if self.num_qubits != self.registers.total() {
            return Err(invalid(format!(
                "num_qubits = {} but registers add up to {}",
                self.num_qubits,
                self.registers.total()
            )));
        }
        for (i, g) in self.gates.iter().enumerate() {
            g.validate()?;
            if let Some(q) = g.qubits().find(|&q| q >= self.num_qubits) {
                return Err(invalid(format!(
                    "gate {i} ({g}) touches qubit {q} >= {}",
                    self.num_qubits
                )));
            }
        }
        Ok(())
    }

    pub fn target(&self) -> usize {
        self.registers.target_qubit()
    }

    pub fn toffoli_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| g.kind == GateKind::Toffoli)
            .count()
    }

    /// Data-dependency layering with unit depth per gate.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for g in &self.gates {
            let d = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
            for q in g.qubits() {
                level[q] = d;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Clifford gates that complete the requested rotation after success.
    pub fn correction_gates(&self) -> Vec<Gate> {
        let target = self.target();
        match self.metadata.map_or(0, |p| p.clifford_power) {
            1 => vec![Gate::single(GateKind::S, target)],
            2 => vec![Gate::single(GateKind::Z, target)],
            -1 => vec![Gate::single(GateKind::SDagger, target)],
            _ => Vec::new(),
        }
    }

    /// Test hook: copy of the circuit with one control polarity inverted.
    pub fn with_flipped_polarity(&self, gate: usize, control: usize) -> Result<Self> {
        let mut out = self.clone();
        let c = out
            .gates
            .get_mut(gate)
            .and_then(|g| g.controls.get_mut(control))
            .ok_or_else(|| invalid(format!("no control {control} on gate {gate}")))?;
        c.polarity = c.polarity.flipped();
        Ok(out)
    }

    /// Index of the first gate that has at least one control.
    pub fn first_controlled_gate(&self) -> Option<usize> {
        self.gates.iter().position(|g| !g.controls.is_empty())
    }
}

/// Which half of the `>= k` test to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Compute the carries into the internal ancillas, then flip the target.
    Compute,
    /// Flip the target, then uncompute the carries in reverse order.
    Uncompute,
}

/// Qubit assignment of a comparator against the classical constant `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComparatorLayout {
    pub n: u32,
    pub k: u64,
    /// Index of the least significant set bit of `k`.
    pub lowest_set_bit: u32,
    pub registers: Registers,
}

impl ComparatorLayout {
    pub fn new(n: u32, k: u64) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(invalid(format!("n must lie in 1..={MAX_N}, got {n}")));
        }
        if k == 0 || k >= 1u64 << n {
            return Err(invalid(format!(
                "comparator needs 0 < k < 2^{n}, got k = {k}"
            )));
        }
        let t = k.trailing_zeros();
        let controls = (n - t) as usize;
        // One fresh ancilla per bit strictly between the lowest set bit and the top bit.
        let internal = controls.saturating_sub(2);
        Ok(Self {
            n,
            k,
            lowest_set_bit: t,
            registers: Registers {
                controls,
                internal,
                target: 1,
            },
        })
    }

    /// Qubit holding comparison bit `j` (`j >= lowest_set_bit`).
    pub fn bit_qubit(&self, j: u32) -> usize {
        self.registers.control((j - self.lowest_set_bit) as usize)
    }

    /// Ancilla receiving the carry out of bit `j` (`lowest_set_bit < j < n-1`).
    pub fn carry_qubit(&self, j: u32) -> usize {
        self.registers
            .internal((j - self.lowest_set_bit - 1) as usize)
    }

    fn k_bit(&self, j: u32) -> bool {
        (self.k >> j) & 1 == 1
    }

    /// Gates of the compute half. Every gate is self-inverse, so the
    /// uncompute half is this list reversed.
    ///
    /// The carry into bit `j` is `c = [x mod 2^j >= k mod 2^j]`. With
    /// carry-in 1 the bits below the lowest set bit keep `c = 1` and need no
    /// gates; the lowest set bit hands the carry to its own wire. A stored
    /// carry may hold `c` or `!c`, tracked as the polarity with which it
    /// fires: `k_j = 1` stores `x_j AND c`, `k_j = 0` stores
    /// `!(x_j OR c) = !x_j AND !c`, each one Toffoli.
    fn compute_gates(&self) -> Vec<Gate> {
        let n = self.n;
        let t = self.lowest_set_bit;
        let target = self.registers.target_qubit();
        let top = n - 1;

        if t == top {
            return vec![Gate::cnot(Control::pos(self.bit_qubit(top)), target)];
        }

        let mut gates = Vec::new();
        let mut carry = Control::pos(self.bit_qubit(t));
        for j in t + 1..top {
            let x = self.bit_qubit(j);
            let anc = self.carry_qubit(j);
            if self.k_bit(j) {
                gates.push(Gate::toffoli(carry, Control::pos(x), anc));
                carry = Control::pos(anc);
            } else {
                let not_carry = Control {
                    qubit: carry.qubit,
                    polarity: carry.polarity.flipped(),
                };
                gates.push(Gate::toffoli(not_carry, Control::neg(x), anc));
                carry = Control::neg(anc);
            }
        }

        let x = self.bit_qubit(top);
        if self.k_bit(top) {
            gates.push(Gate::toffoli(carry, Control::pos(x), target));
        } else {
            // target ^= x OR c  ==  X; target ^= (!x AND !c). The X commutes
            // with the Toffoli so it sits at the front, alongside the H layer.
            let not_carry = Control {
                qubit: carry.qubit,
                polarity: carry.polarity.flipped(),
            };
            gates.insert(0, Gate::single(GateKind::X, target));
            gates.push(Gate::toffoli(not_carry, Control::neg(x), target));
        }
        gates
    }
}

/// One half of the `>= k` test: `Compute` leaves the carries dirty in the
/// internal ancillas, `Uncompute` reuses them and cleans them up.
pub fn build_ge_k_test(n: u32, k: u64, direction: Direction) -> Result<Circuit> {
    let layout = ComparatorLayout::new(n, k)?;
    let mut gates = layout.compute_gates();
    if direction == Direction::Uncompute {
        gates.reverse();
    }
    Circuit::new(layout.registers, layout.lowest_set_bit, gates, None)
}

/// Standalone comparator that flips the target iff `x >= k` and leaves
/// every internal ancilla clean: carries, target flip, carries undone.
pub fn build_comparator(n: u32, k: u64) -> Result<Circuit> {
    let layout = ComparatorLayout::new(n, k)?;
    let mut gates = layout.compute_gates();
    let flip_at = gates
        .iter()
        .rposition(|g| g.target == layout.registers.target_qubit() && g.kind != GateKind::X)
        .expect("comparator always flips its target");
    let carries: Vec<Gate> = gates[..flip_at]
        .iter()
        .filter(|g| g.target != layout.registers.target_qubit())
        .cloned()
        .collect();
    gates.extend(carries.into_iter().rev());
    Circuit::new(layout.registers, layout.lowest_set_bit, gates, None)
}

/// The repeat-until-success attempt for `0 < k < 2^n`:
/// `H^n`, compute half, `S` on target, uncompute half, `H^n`.
pub fn build_rus_circuit(n: u32, k: u64) -> Result<Circuit> {
    let layout = ComparatorLayout::new(n, k)?;
    let regs = layout.registers;
    let target = regs.target_qubit();
    let compute = layout.compute_gates();

    let hadamards = (0..regs.controls).map(|i| Gate::single(GateKind::H, regs.control(i)));
    let mut gates: Vec<Gate> = hadamards.clone().collect();
    gates.extend(compute.iter().cloned());
    gates.push(Gate::single(GateKind::S, target));
    gates.extend(compute.into_iter().rev());
    gates.extend(hadamards);
    Circuit::new(regs, layout.lowest_set_bit, gates, None)
}

/// Circuit for one attempt of the rotation described by `params`.
///
/// `theta_star = 0` yields an empty circuit, `k = 2^n` a bare `S`, and
/// `k = 0` the constant comparator `X S X` (which is `S^dagger` up to the
/// global phase `i`).
pub fn build_rotation_circuit(params: &SynthesisParams) -> Result<Circuit> {
    let trivial = Registers {
        controls: 0,
        internal: 0,
        target: 1,
    };
    let full = 1u64 << params.n;
    let mut circuit = if params.is_identity() {
        Circuit::new(trivial, params.n, Vec::new(), None)?
    } else if params.k == full {
        Circuit::new(trivial, params.n, vec![Gate::single(GateKind::S, 0)], None)?
    } else if params.k == 0 {
        let gates = vec![
            Gate::single(GateKind::X, 0),
            Gate::single(GateKind::S, 0),
            Gate::single(GateKind::X, 0),
        ];
        Circuit::new(trivial, params.n, gates, None)?
    } else {
        build_rus_circuit(params.n, params.k)?
    };
    circuit.metadata = Some(*params);
    Ok(circuit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub toffoli_count: usize,
    pub gate_depth: usize,
    pub control_ancillas: usize,
    pub internal_ancillas: usize,
    pub total_ancillas: usize,
    /// Control bits removed because the low bits of `k` are zero.
    pub dropped_controls: u32,
}

pub fn resources(circuit: &Circuit) -> ResourceReport {
    let regs = circuit.registers;
    ResourceReport {
        toffoli_count: circuit.toffoli_count(),
        gate_depth: circuit.depth(),
        control_ancillas: regs.controls,
        internal_ancillas: regs.internal,
        total_ancillas: regs.controls + regs.internal,
        dropped_controls: if regs.controls == 0 {
            0
        } else {
            circuit.dropped_low_bits
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected text or json)")),
        }
    }
}

pub fn export_circuit(circuit: &Circuit, format: Format) -> Vec<u8> {
    match format {
        Format::Text => to_text(circuit).into_bytes(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(circuit).expect("circuit serializes");
            s.push('\n');
            s.into_bytes()
        }
    }
}

pub fn to_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    if let Some(p) = circuit.metadata {
        let _ = writeln!(out, "params {} {} {}", p.n, p.k, p.clifford_power);
    }
    let regs = circuit.registers;
    let _ = writeln!(out, "controls {}", regs.controls);
    let _ = writeln!(out, "internal {}", regs.internal);
    let _ = writeln!(out, "target {}", regs.target);
    if circuit.dropped_low_bits != 0 {
        let _ = writeln!(out, "dropped {}", circuit.dropped_low_bits);
    }
    for g in &circuit.gates {
        let _ = writeln!(out, "{g}");
    }
    out
}

pub fn parse_circuit(bytes: &[u8], format: Format) -> Result<Circuit> {
    let s = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        msg: e.to_string(),
    })?;
    match format {
        Format::Text => parse_text(s),
        Format::Json => {
            let c: Circuit = serde_json::from_str(s).map_err(|e| Error::Parse {
                line: e.line(),
                msg: e.to_string(),
            })?;
            c.validate()?;
            Ok(c)
        }
    }
}

pub fn parse_text(s: &str) -> Result<Circuit> {
    let mut metadata = None;
    let mut controls = None;
    let mut internal = None;
    let mut target = None;
    let mut dropped = 0u32;
    let mut gates = Vec::new();

    for (idx, raw) in s.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();
        let int = |w: &str| -> Result<i64> {
            w.parse::<i64>()
                .map_err(|_| err(format!("expected an integer, got `{w}`")))
        };
        match head {
            "params" => {
                let [n, k, m] = rest[..] else {
                    return Err(err("params takes n, k and clifford power".into()));
                };
                let p = SynthesisParams::from_nk(int(n)? as u32, int(k)? as u64, int(m)? as i8)
                    .map_err(|e| err(e.to_string()))?;
                metadata = Some(p);
            }
            "controls" | "internal" | "target" | "dropped" => {
                let [v] = rest[..] else {
                    return Err(err(format!("{head} takes one value")));
                };
                let v = int(v)?;
                if v < 0 {
                    return Err(err(format!("{head} must be non-negative")));
                }
                match head {
                    "controls" => controls = Some(v as usize),
                    "internal" => internal = Some(v as usize),
                    "target" => target = Some(v as usize),
                    _ => dropped = v as u32,
                }
            }
            kind => {
                let kind = GateKind::from_str(kind).map_err(err)?;
                let mut qubits = Vec::with_capacity(rest.len());
                for w in &rest {
                    let (polarity, body) = match w.strip_prefix('!') {
                        Some(b) => (Polarity::Negative, b),
                        None => (Polarity::Positive, *w),
                    };
                    let q = body
                        .strip_prefix('q')
                        .and_then(|d| d.parse::<usize>().ok())
                        .ok_or_else(|| err(format!("bad qubit `{w}`")))?;
                    qubits.push(Control { qubit: q, polarity });
                }
                let Some(t) = qubits.pop() else {
                    return Err(err("gate without target".into()));
                };
                if t.polarity == Polarity::Negative {
                    return Err(err("target cannot carry a polarity".into()));
                }
                let gate = Gate::new(kind, qubits, t.qubit).map_err(|e| err(e.to_string()))?;
                gates.push(gate);
            }
        }
    }

    let missing = |name: &str| Error::Parse {
        line: 0,
        msg: format!("missing `{name}` header"),
    };
    let registers = Registers {
        controls: controls.ok_or_else(|| missing("controls"))?,
        internal: internal.ok_or_else(|| missing("internal"))?,
        target: target.ok_or_else(|| missing("target"))?,
    };
    Circuit::new(registers, dropped, gates, metadata)
}

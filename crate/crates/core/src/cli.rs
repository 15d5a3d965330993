//! `rotsynth` command line. Every subcommand builds a serializable report;
//! `--format json` prints it as JSON, `--format text` renders the same fields.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::circuit::{build_rotation_circuit, export_circuit, resources, Circuit, Format};
use crate::error::Result;
use crate::expr::parse_expr;
use crate::rus::{monte_carlo_with, MonteCarloConfig, MonteCarloReport, DEFAULT_CHECK_TRIALS};
use crate::sim::DEFAULT_MAX_QUBITS;
use crate::synthesis::{
    distance_bound, expected_repetitions, reduce_angle, synthesize, SynthesisParams,
};
use crate::verify::{verify_circuit, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rotsynth",
    version,
    about = "Clifford+Toffoli synthesis of z-rotations"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Target {
    /// Rotation angle in radians; accepts expressions like `pi/4` or `2*atan(1/2)`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub theta: f64,

    /// Operator-norm accuracy.
    #[arg(long, value_parser = parse_epsilon)]
    pub epsilon: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute n, k, theta*, probabilities and resources.
    Synth(Target),
    /// Print the attempt circuit.
    Emit(Target),
    /// Simulate the circuit and check both measurement branches.
    Verify {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
        max_qubits: usize,
        /// Invert one control polarity before verifying (negative test).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Monte Carlo run of the repeat-until-success loop.
    Rus {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trials replayed with full simulation and a final-state check.
        #[arg(long, default_value_t = DEFAULT_CHECK_TRIALS)]
        check_trials: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
        max_qubits: usize,
    },
    /// One synth row per accuracy.
    Sweep {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
        theta: f64,
        /// Comma-separated accuracies, e.g. `1e-1,1e-2,3.8e-9`.
        #[arg(long, value_delimiter = ',', value_parser = parse_epsilon, required = true)]
        epsilons: Vec<f64>,
    },
}

fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    parse_expr(s).map_err(|e| e.to_string())
}

fn parse_epsilon(s: &str) -> std::result::Result<f64, String> {
    let v = parse_expr(s).map_err(|e| e.to_string())?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("epsilon must be positive, got {v}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthReport {
    pub theta: f64,
    pub theta_reduced: f64,
    pub clifford_power: i8,
    pub clifford_correction: &'static str,
    pub epsilon: f64,
    pub n: u32,
    pub k: u64,
    pub k_binary: String,
    /// `identity`, `s`, `s_dagger` or `repeat_until_success`.
    pub path: &'static str,
    pub theta_star: f64,
    pub tan_half_star: String,
    pub success_probability_fraction: String,
    pub success_probability: f64,
    /// `|theta_reduced - theta_star|`.
    pub angle_error: f64,
    /// `||R_theta - R_theta_star|| = 2|sin((theta - theta_star)/2)|`.
    pub operator_distance: f64,
    /// `2^(1-n)`, guaranteed at most epsilon.
    pub error_bound: f64,
    pub toffoli_count: usize,
    pub gate_depth: usize,
    pub control_ancillas: usize,
    pub internal_ancillas: usize,
    pub total_ancillas: usize,
    pub dropped_controls: u32,
    pub expected_repetitions: f64,
}

impl SynthReport {
    pub fn new(theta: f64, epsilon: f64) -> Result<Self> {
        let (theta_reduced, _) = reduce_angle(theta)?;
        let params = synthesize(theta, epsilon)?;
        let circuit = build_rotation_circuit(&params)?;
        Ok(Self::from_parts(
            theta,
            theta_reduced,
            epsilon,
            &params,
            &circuit,
        ))
    }

    fn from_parts(
        theta: f64,
        theta_reduced: f64,
        epsilon: f64,
        p: &SynthesisParams,
        circuit: &Circuit,
    ) -> Self {
        let r = resources(circuit);
        let path = if p.is_identity() {
            "identity"
        } else if p.k == 1u64 << p.n {
            "s"
        } else if p.k == 0 {
            "s_dagger"
        } else {
            "repeat_until_success"
        };
        let (frac, prob) = if p.is_identity() {
            ("1/1".to_string(), 1.0)
        } else {
            (p.success_fraction().to_string(), p.success_probability())
        };
        Self {
            theta,
            theta_reduced,
            clifford_power: p.clifford_power,
            clifford_correction: match p.clifford_power {
                1 => "S",
                2 => "Z",
                -1 => "SDG",
                _ => "none",
            },
            epsilon,
            n: p.n,
            k: p.k,
            k_binary: format!("{:b}", p.k),
            path,
            theta_star: p.theta_star,
            tan_half_star: p.tan_half_star.to_string(),
            success_probability_fraction: frac,
            success_probability: prob,
            angle_error: (theta_reduced - p.theta_star).abs(),
            operator_distance: distance_bound(theta_reduced, p.theta_star),
            error_bound: p.error_bound(),
            toffoli_count: r.toffoli_count,
            gate_depth: r.gate_depth,
            control_ancillas: r.control_ancillas,
            internal_ancillas: r.internal_ancillas,
            total_ancillas: r.total_ancillas,
            dropped_controls: r.dropped_controls,
            expected_repetitions: expected_repetitions(p),
        }
    }

    fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "theta                 {}", self.theta);
        let _ = writeln!(
            s,
            "reduced theta         {} (clifford correction {})",
            self.theta_reduced, self.clifford_correction
        );
        let _ = writeln!(s, "epsilon               {:e}", self.epsilon);
        let _ = writeln!(s, "path                  {}", self.path);
        let _ = writeln!(s, "n                     {}", self.n);
        let _ = writeln!(s, "k                     {} = {}_2", self.k, self.k_binary);
        let _ = writeln!(s, "theta*                {}", self.theta_star);
        let _ = writeln!(s, "tan(theta*/2)         {}", self.tan_half_star);
        let _ = writeln!(
            s,
            "success probability   {} ~ {:.6}",
            self.success_probability_fraction, self.success_probability
        );
        let _ = writeln!(s, "|theta - theta*|      {:.6e}", self.angle_error);
        let _ = writeln!(s, "operator distance     {:.6e}", self.operator_distance);
        let _ = writeln!(s, "error bound 2^(1-n)   {:.6e}", self.error_bound);
        let _ = writeln!(s, "toffoli count         {}", self.toffoli_count);
        let _ = writeln!(s, "gate depth            {}", self.gate_depth);
        let _ = writeln!(
            s,
            "ancillas              {} ({} control, {} internal, {} control bits dropped)",
            self.total_ancillas,
            self.control_ancillas,
            self.internal_ancillas,
            self.dropped_controls
        );
        let _ = writeln!(s, "expected repetitions  {:.6}", self.expected_repetitions);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub theta: f64,
    pub rows: Vec<SynthReport>,
}

impl SweepReport {
    pub fn new(theta: f64, epsilons: &[f64]) -> Result<Self> {
        let rows = epsilons
            .iter()
            .map(|&e| SynthReport::new(theta, e))
            .collect::<Result<_>>()?;
        Ok(Self { theta, rows })
    }

    fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>10} {:>3} {:>22} {:>8} {:>6} {:>9} {:>12} {:>12}",
            "epsilon", "n", "k", "toffoli", "depth", "ancillas", "probability", "error"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>10.3e} {:>3} {:>22} {:>8} {:>6} {:>9} {:>12.8} {:>12.4e}",
                r.epsilon,
                r.n,
                r.k,
                r.toffoli_count,
                r.gate_depth,
                r.total_ancillas,
                r.success_probability,
                r.angle_error
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RusReport {
    #[serde(flatten)]
    pub monte_carlo: MonteCarloReport,
    pub mean_within_3_sigma: bool,
    pub mean_below_bound: bool,
    pub toffoli_below_bound: bool,
    pub depth_below_bound: bool,
}

impl RusReport {
    fn new(mc: MonteCarloReport) -> Self {
        let three_sigma = 3.0 * mc.mean_repetitions_sigma;
        let identity = mc.expected_repetitions == 0.0;
        Self {
            mean_within_3_sigma: (mc.mean_repetitions - mc.expected_repetitions).abs()
                <= three_sigma,
            mean_below_bound: mc.mean_repetitions < mc.repetitions_bound,
            toffoli_below_bound: identity || mc.mean_toffoli < mc.toffoli_bound,
            depth_below_bound: identity || mc.mean_depth < mc.depth_bound,
            monte_carlo: mc,
        }
    }

    fn render(&self) -> String {
        let m = &self.monte_carlo;
        let mut s = String::new();
        let _ = writeln!(s, "seed                  {}", m.seed);
        let _ = writeln!(s, "trials                {}", m.trials);
        let _ = writeln!(s, "n, k                  {}, {}", m.n, m.k);
        let _ = writeln!(
            s,
            "success probability   {} ~ {:.6}",
            m.success_fraction, m.success_probability
        );
        let _ = writeln!(
            s,
            "mean repetitions      {:.6} (expected {:.6} +- {:.2e}, bound {})",
            m.mean_repetitions,
            m.expected_repetitions,
            m.mean_repetitions_sigma,
            m.repetitions_bound
        );
        let _ = writeln!(
            s,
            "mean toffoli          {:.4} (bound {})",
            m.mean_toffoli, m.toffoli_bound
        );
        let _ = writeln!(
            s,
            "mean depth            {:.4} (bound {})",
            m.mean_depth, m.depth_bound
        );
        let _ = writeln!(
            s,
            "operator checks       {}/{} passed",
            m.operator_checks_passed, m.operator_checks
        );
        let _ = writeln!(s, "tail P(X > m):");
        for (mm, c) in &m.tail_counts {
            let _ = writeln!(
                s,
                "  m={mm:<3} {:.6} (bound {:.6})",
                *c as f64 / m.trials as f64,
                0.5f64.powi(*mm as i32)
            );
        }
        let _ = writeln!(s, "within 3 sigma        {}", self.mean_within_3_sigma);
        s
    }
}

fn render_verify(r: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "result                {}",
        if r.passed { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(s, "n, k                  {}, {}", r.n, r.k);
    let _ = writeln!(s, "theta*                {}", r.theta_star);
    let _ = writeln!(s, "global phase v        {}", r.global_phase);
    let _ = writeln!(
        s,
        "success probability   {:.15} (exact {} = {:.15})",
        r.measured_success_probability, r.expected_success, r.expected_success_probability
    );
    let _ = writeln!(s, "outcomes checked      {}", r.outcomes_checked);
    let _ = writeln!(s, "success op error      {:.3e}", r.success_operator_error);
    let _ = writeln!(s, "failure op error      {:.3e}", r.failure_operator_error);
    for f in &r.failures {
        let _ = writeln!(s, "failure at outcome {}: {}", f.outcome, f.reason);
    }
    s
}

fn emit<T: Serialize>(format: OutputFormat, report: &T, text: impl FnOnce(&T) -> String) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Text => text(report),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cfg) {
        Ok((code, text)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                crate::Error::InvalidArgument(_) | crate::Error::Capacity { .. } => EXIT_USAGE,
                _ => EXIT_FAILED,
            }
        }
    }
}

pub fn execute(cfg: &CliConfig) -> Result<(i32, String)> {
    let fmt = cfg.format;
    match &cfg.command {
        Command::Synth(t) => {
            let r = SynthReport::new(t.theta, t.epsilon)?;
            Ok((EXIT_OK, emit(fmt, &r, SynthReport::render)))
        }
        Command::Emit(t) => {
            let params = synthesize(t.theta, t.epsilon)?;
            let circuit = build_rotation_circuit(&params)?;
            let format = match fmt {
                OutputFormat::Text => Format::Text,
                OutputFormat::Json => Format::Json,
            };
            let bytes = export_circuit(&circuit, format);
            Ok((
                EXIT_OK,
                String::from_utf8(bytes).expect("exports are UTF-8"),
            ))
        }
        Command::Verify {
            target,
            max_qubits,
            corrupt,
        } => {
            let params = synthesize(target.theta, target.epsilon)?;
            let mut circuit = build_rotation_circuit(&params)?;
            if *corrupt {
                if let Some(g) = circuit.first_controlled_gate() {
                    circuit = circuit.with_flipped_polarity(g, 0)?;
                }
            }
            let r = verify_circuit(&circuit, &params, *max_qubits)?;
            let code = if r.passed { EXIT_OK } else { EXIT_FAILED };
            Ok((code, emit(fmt, &r, render_verify)))
        }
        Command::Rus {
            target,
            trials,
            seed,
            check_trials,
            max_qubits,
        } => {
            let params = synthesize(target.theta, target.epsilon)?;
            let mut mc = MonteCarloConfig::new(*trials, *seed);
            mc.check_trials = *check_trials;
            mc.max_qubits = *max_qubits;
            let r = RusReport::new(monte_carlo_with(&params, &mc)?);
            let code = if r.monte_carlo.operator_checks_passed == r.monte_carlo.operator_checks {
                EXIT_OK
            } else {
                EXIT_FAILED
            };
            Ok((code, emit(fmt, &r, RusReport::render)))
        }
        Command::Sweep { theta, epsilons } => {
            let r = SweepReport::new(*theta, epsilons)?;
            Ok((EXIT_OK, emit(fmt, &r, SweepReport::render)))
        }
    }
}

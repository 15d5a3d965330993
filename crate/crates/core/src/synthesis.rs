//! Parameter selection for the ancilla-controlled z-rotation.
//!
//! A request `(theta, epsilon)` is turned into an ancilla count `n` and a
//! classical comparison constant `k`. The rotation that is actually applied,
//! `theta_star`, satisfies `tan(theta_star / 2) = (k - 2^(n-1)) / 2^(n-1)`,
//! which is kept as an exact dyadic rational so probabilities stay exact.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest ancilla count whose `2^n` still fits a `u64` comfortably.
pub const MAX_N: u32 = 62;

/// Relative tolerance used by [`is_exact`] on `2^(n-1) tan(theta/2)`.
pub const EXACT_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

const RANGE_SLACK: f64 = 1e-12;

/// A requested z-rotation `R_theta = diag(1, e^{i theta})` and accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub theta: f64,
    pub epsilon: f64,
}

impl RotationSpec {
    pub fn new(theta: f64, epsilon: f64) -> Result<Self> {
        let spec = Self { theta, epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(invalid(format!("theta must be finite, got {}", self.theta)));
        }
        if self.epsilon <= 0.0 || !self.epsilon.is_finite() {
            return Err(invalid(format!(
                "epsilon must be a finite positive number, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Exact value `num / 2^exp`, always stored in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dyadic {
    pub num: i64,
    pub exp: u32,
}

impl Dyadic {
    pub fn new(num: i64, exp: u32) -> Self {
        if num == 0 {
            return Self { num: 0, exp: 0 };
        }
        let shift = num.trailing_zeros().min(exp);
        Self {
            num: num >> shift,
            exp: exp - shift,
        }
    }

    pub fn denominator(&self) -> u64 {
        1u64 << self.exp
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.denominator() as f64
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.denominator())
    }
}

/// Non-negative rational in lowest terms with a power-of-two denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u128,
    pub den: u128,
}

impl Fraction {
    fn reduced(num: u128, den: u128) -> Self {
        let shift = num.trailing_zeros().min(den.trailing_zeros());
        Self {
            num: num >> shift,
            den: den >> shift,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Compiled parameters of one rotation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct SynthesisParams {
    pub n: u32,
    pub k: u64,
    pub theta_star: f64,
    pub tan_half_star: Dyadic,
    /// `m` such that the requested angle is `theta_reduced + m * pi/2 (mod 2 pi)`;
    /// the residual Clifford correction is `S^m`.
    pub clifford_power: i8,
}

impl SynthesisParams {
    /// Rebuilds the parameters from `(n, k)` alone.
    pub fn from_nk(n: u32, k: u64, clifford_power: i8) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(invalid(format!("n must lie in 1..={MAX_N}, got {n}")));
        }
        if k > 1u64 << n {
            return Err(invalid(format!("k = {k} out of range 0..=2^{n}")));
        }
        if !(-1..=2).contains(&clifford_power) {
            return Err(invalid(format!(
                "clifford power must lie in -1..=2, got {clifford_power}"
            )));
        }
        let half = 1i64 << (n - 1);
        let tan_half_star = Dyadic::new(k as i64 - half, n - 1);
        Ok(Self {
            n,
            k,
            theta_star: 2.0 * tan_half_star.to_f64().atan(),
            tan_half_star,
            clifford_power,
        })
    }

    pub fn halfway(&self) -> u64 {
        1u64 << (self.n - 1)
    }

    pub fn is_identity(&self) -> bool {
        self.k == self.halfway()
    }

    /// `k = 0` or `k = 2^n`: the comparison is constant, `S^dagger` or `S` with probability one.
    pub fn is_trivial_comparison(&self) -> bool {
        self.k == 0 || self.k == 1u64 << self.n
    }

    /// Upper bound `2^(1-n)` on `|theta - theta_star|`.
    pub fn error_bound(&self) -> f64 {
        (2.0f64).powi(1 - self.n as i32)
    }

    pub fn success_fraction(&self) -> Fraction {
        success_fraction(self)
    }

    pub fn success_probability(&self) -> f64 {
        success_probability(self)
    }

    /// Global phase `v = arg(k + i(2^n - k))` attached to the success branch.
    pub fn global_phase(&self) -> f64 {
        global_phase(self.n, self.k)
    }

    pub fn trailing_zeros(&self) -> u32 {
        if self.k == 0 {
            self.n
        } else {
            self.k.trailing_zeros().min(self.n)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n: u32,
    k: u64,
    theta_star: f64,
    tan_half_star: Dyadic,
    clifford_power: i8,
}

impl From<SynthesisParams> for ParamsRepr {
    fn from(p: SynthesisParams) -> Self {
        Self {
            n: p.n,
            k: p.k,
            theta_star: p.theta_star,
            tan_half_star: p.tan_half_star,
            clifford_power: p.clifford_power,
        }
    }
}

impl TryFrom<ParamsRepr> for SynthesisParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        let p = SynthesisParams::from_nk(r.n, r.k, r.clifford_power)?;
        if p.tan_half_star != r.tan_half_star || p.theta_star != r.theta_star {
            return Err(invalid("tan_half_star/theta_star inconsistent with (n, k)"));
        }
        Ok(p)
    }
}

/// Folds an arbitrary angle into `[-pi/2, pi/2]`, returning the number of
/// quarter turns `m` that were split off as the Clifford `S^m`.
///
/// Angles already in range keep `m = 0`; otherwise the nearest quarter
/// turn is split off, ties (odd multiples of `pi/4`) keeping the smaller `|m|`.
pub fn reduce_angle(theta_raw: f64) -> Result<(f64, i8)> {
    if !theta_raw.is_finite() {
        return Err(invalid(format!("theta must be finite, got {theta_raw}")));
    }
    if theta_raw.abs() <= FRAC_PI_2 {
        return Ok((theta_raw, 0));
    }
    let mut t = theta_raw.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t.abs() <= FRAC_PI_2 {
        return Ok((t, 0));
    }
    let q = t / FRAC_PI_2;
    let mut m = if (q.fract().abs() - 0.5).abs() < 1e-12 {
        q.trunc()
    } else {
        q.round()
    } as i8;
    let theta = (t - m as f64 * FRAC_PI_2).clamp(-FRAC_PI_2, FRAC_PI_2);
    if m == -2 {
        m = 2;
    }
    Ok((theta, m))
}

/// Chooses `n = 1 + ceil(log2(1/epsilon))` and
/// `k = 2^(n-1) + floor(2^(n-1) tan(theta/2) + 1/2)`.
///
/// `spec.theta` must already lie in `[-pi/2, pi/2]`; see [`synthesize`] for
/// arbitrary angles.
pub fn choose_parameters(spec: &RotationSpec) -> Result<SynthesisParams> {
    spec.validate()?;
    if spec.theta.abs() > FRAC_PI_2 + RANGE_SLACK {
        return Err(invalid(format!(
            "theta = {} outside [-pi/2, pi/2]; reduce it first",
            spec.theta
        )));
    }
    let n = ancilla_count(spec.epsilon)?;
    let half = 1i64 << (n - 1);
    let scaled = half as f64 * (spec.theta / 2.0).tan();
    let rounded = ((scaled + 0.5).floor() as i64).clamp(-half, half);
    SynthesisParams::from_nk(n, (half + rounded) as u64, 0)
}

/// Reduces an arbitrary angle and synthesizes it.
pub fn synthesize(theta_raw: f64, epsilon: f64) -> Result<SynthesisParams> {
    let (theta, m) = reduce_angle(theta_raw)?;
    let mut params = choose_parameters(&RotationSpec::new(theta, epsilon)?)?;
    params.clifford_power = m;
    Ok(params)
}

/// `n = 1 + ceil(log2(1/epsilon))`, floored at 1.
pub fn ancilla_count(epsilon: f64) -> Result<u32> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = 1 + ((1.0 / epsilon).log2().ceil() as i64);
    let n = n.max(1);
    if n > MAX_N as i64 {
        return Err(Error::Capacity {
            requested: n,
            max: MAX_N,
        });
    }
    Ok(n as u32)
}

/// `2 arctan(k / 2^(n-1) - 1)`.
pub fn theta_star_of(n: u32, k: u64) -> Result<f64> {
    Ok(SynthesisParams::from_nk(n, k, 0)?.theta_star)
}

/// Exact `(1 + tan^2(theta_star/2)) / 2`.
pub fn success_fraction(params: &SynthesisParams) -> Fraction {
    let t = params.tan_half_star;
    let den_sq = 1u128 << (2 * t.exp);
    let num_sq = (t.num.unsigned_abs() as u128).pow(2);
    Fraction::reduced(den_sq + num_sq, den_sq << 1)
}

pub fn success_probability(params: &SynthesisParams) -> f64 {
    success_fraction(params).to_f64()
}

/// Operator-norm distance `||R_a - R_b|| = 2 |sin((a - b)/2)|`.
pub fn distance_bound(theta: f64, theta_star: f64) -> f64 {
    2.0 * ((theta - theta_star) / 2.0).sin().abs()
}

/// Whether `2^(n-1) tan(theta/2)` is an integer, so synthesis at `n` is exact.
pub fn is_exact(theta: f64, n: u32) -> bool {
    let scaled = (2.0f64).powi(n as i32 - 1) * (theta / 2.0).tan();
    (scaled - scaled.round()).abs() < EXACT_TOLERANCE * scaled.abs().max(1.0)
}

/// Mean attempts of the repeat-until-success loop; zero on the identity path.
pub fn expected_repetitions(params: &SynthesisParams) -> f64 {
    if params.is_identity() {
        0.0
    } else {
        1.0 / success_probability(params)
    }
}

/// `v = arg(k + i(2^n - k))`, in `[0, pi/2]`.
pub fn global_phase(n: u32, k: u64) -> f64 {
    let full = (1u64 << n) as f64;
    (full - k as f64).atan2(k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reduce_angle_examples() {
        assert_eq!(reduce_angle(FRAC_PI_4).unwrap(), (FRAC_PI_4, 0));
        let (t, m) = reduce_angle(PI).unwrap();
        assert_eq!(m, 2);
        assert!(close(t, 0.0, 1e-15));
        let (t, m) = reduce_angle(3.0 * FRAC_PI_4).unwrap();
        assert_eq!(m, 1);
        assert!(close(t, FRAC_PI_4, 1e-15));
        let (t, m) = reduce_angle(-3.0 * FRAC_PI_4).unwrap();
        assert_eq!(m, -1);
        assert!(close(t, -FRAC_PI_4, 1e-15));
        assert!(reduce_angle(f64::NAN).is_err());
        assert!(reduce_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn t_gate_parameters() {
        let p = choose_parameters(&RotationSpec::new(FRAC_PI_4, 1e-2).unwrap()).unwrap();
        assert_eq!((p.n, p.k), (8, 181));
        assert_eq!(format!("{:b}", p.k), "10110101");
        assert_eq!(p.tan_half_star, Dyadic { num: 53, exp: 7 });
        assert_eq!(
            p.success_fraction(),
            Fraction {
                num: 19193,
                den: 32768
            }
        );
        assert!(close(p.theta_star, 0.785141, 1e-6));
        assert!(close(expected_repetitions(&p), 32768.0 / 19193.0, 1e-15));
        assert!(!is_exact(FRAC_PI_4, 8));
        let err = FRAC_PI_4 - p.theta_star;
        assert!(close(err, 2.579e-4, 1e-7));
        assert!(distance_bound(FRAC_PI_4, p.theta_star) <= err);
    }

    #[test]
    fn zero_angle_is_identity() {
        let p = choose_parameters(&RotationSpec::new(0.0, 0.1).unwrap()).unwrap();
        assert_eq!(p.k, p.halfway());
        assert_eq!(p.theta_star, 0.0);
        assert!(p.is_identity());
        assert_eq!(p.success_probability(), 0.5);
        assert_eq!(expected_repetitions(&p), 0.0);
        assert!(is_exact(0.0, 17));
    }

    #[test]
    fn two_control_special_case() {
        let theta = 2.0 * 0.5f64.atan();
        let p = choose_parameters(&RotationSpec::new(theta, 0.5).unwrap()).unwrap();
        assert_eq!((p.n, p.k), (2, 3));
        assert!(close(p.theta_star.cos(), 0.6, 1e-15));
        assert!(close(p.theta_star.sin(), 0.8, 1e-15));
        assert_eq!(p.success_fraction(), Fraction { num: 5, den: 8 });
        assert!(is_exact(theta, 2));
    }

    #[test]
    fn quarter_turn_is_trivial() {
        let p = choose_parameters(&RotationSpec::new(FRAC_PI_2, 1e-3).unwrap()).unwrap();
        assert_eq!(p.k, 1 << p.n);
        assert!(close(p.theta_star, FRAC_PI_2, 1e-15));
        assert_eq!(p.success_probability(), 1.0);
        assert_eq!(expected_repetitions(&p), 1.0);

        let p = choose_parameters(&RotationSpec::new(-FRAC_PI_2, 1e-3).unwrap()).unwrap();
        assert_eq!(p.k, 0);
        assert!(p.is_trivial_comparison());
    }

    #[test]
    fn theta_star_of_examples() {
        assert!(close(
            theta_star_of(8, 181).unwrap(),
            2.0 * (53.0f64 / 128.0).atan(),
            0.0
        ));
        assert!(close(theta_star_of(5, 0).unwrap(), -FRAC_PI_2, 1e-15));
        assert!(theta_star_of(3, 9).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance_bound(0.3, 0.3), 0.0);
        assert!(close(distance_bound(FRAC_PI_2, -FRAC_PI_2), 2.0, 1e-15));
    }

    #[test]
    fn epsilon_validation_and_capacity() {
        assert!(RotationSpec::new(0.1, 0.0).is_err());
        assert!(RotationSpec::new(0.1, -1.0).is_err());
        assert!(matches!(
            choose_parameters(&RotationSpec {
                theta: 0.1,
                epsilon: 1e-30
            }),
            Err(Error::Capacity { max: MAX_N, .. })
        ));
        assert_eq!(ancilla_count(2f64.powi(-61)).unwrap(), 62);
        assert_eq!(ancilla_count(4.0).unwrap(), 1);
        assert!(choose_parameters(&RotationSpec {
            theta: 2.0,
            epsilon: 0.1
        })
        .is_err());
    }

    #[test]
    fn synthesize_carries_clifford_power() {
        let p = synthesize(3.0 * FRAC_PI_4, 1e-2).unwrap();
        assert_eq!((p.n, p.k, p.clifford_power), (8, 181, 1));
        let p = synthesize(PI, 1e-2).unwrap();
        assert!(p.is_identity());
        assert_eq!(p.clifford_power, 2);
    }

    #[test]
    fn params_json_rejects_inconsistent_fields() {
        let p = synthesize(FRAC_PI_4, 1e-2).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<SynthesisParams>(&json).unwrap(), p);
        let bad = json.replace("\"k\":181", "\"k\":180");
        assert!(serde_json::from_str::<SynthesisParams>(&bad).is_err());
    }

    #[test]
    fn global_phase_range() {
        assert_eq!(global_phase(4, 16), 0.0);
        assert!(close(global_phase(4, 0), FRAC_PI_2, 1e-15));
        assert!(close(global_phase(4, 8), FRAC_PI_4, 1e-15));
    }
}

//! Scalar constitutive laws for capacitors, inductors and resistors.
//!
//! Every law is a strictly increasing map through the origin. Capacitors map a
//! branch voltage to a charge, inductors a branch current to a flux, resistors
//! a branch voltage to a current. Storage laws also provide their inverse and
//! the stored energy `V(s) = ∫₀ˢ f⁻¹(σ) dσ`, whose derivative is the inverse law.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LawError {
    #[error("invalid law parameter: {0}")]
    InvalidParameter(String),
    #[error("inverse did not converge for target {target}: x = {x}, residual {residual:.3e}")]
    NonConvergence { target: f64, x: f64, residual: f64 },
    #[error("target {target} lies outside the range of the law")]
    OutOfRange { target: f64 },
    #[error("quadrature failed on [0, {upper}]: error estimate {estimate:.3e}")]
    Quadrature { upper: f64, estimate: f64 },
}

/// A strictly increasing scalar map with `f(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarLaw {
    /// `f(x) = slope·x`
    Linear { slope: f64 },
    /// `f(x) = c1·x + c3·x³`
    Cubic { c1: f64, c3: f64 },
    /// `f(x) = is·(exp(x/vt) − 1)`
    Diode { is: f64, vt: f64 },
}

impl ScalarLaw {
    pub fn validate(&self) -> Result<(), LawError> {
        let ok = |v: f64| v.is_finite();
        match *self {
            Self::Linear { slope } if ok(slope) && slope > 0.0 => Ok(()),
            Self::Cubic { c1, c3 } if ok(c1) && ok(c3) && c1 > 0.0 && c3 >= 0.0 => Ok(()),
            Self::Diode { is, vt } if ok(is) && ok(vt) && is > 0.0 && vt > 0.0 => Ok(()),
            other => Err(LawError::InvalidParameter(format!("{other:?}"))),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Self::Linear { .. } | Self::Cubic { c3: 0.0, .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Linear { slope } => slope * x,
            Self::Cubic { c1, c3 } => x * (c1 + c3 * x * x),
            Self::Diode { is, vt } => is * (x / vt).exp_m1(),
        }
    }

    pub fn jacobian(&self, x: f64) -> f64 {
        match *self {
            Self::Linear { slope } => slope,
            Self::Cubic { c1, c3 } => c1 + 3.0 * c3 * x * x,
            Self::Diode { is, vt } => is / vt * (x / vt).exp(),
        }
    }

    /// Solves `f(x) = y` by Newton's method safeguarded with a bisection bracket.
    pub fn invert(&self, y: f64) -> Result<f64, LawError> {
        match *self {
            Self::Linear { slope } => return Ok(y / slope),
            Self::Cubic { c1, c3: 0.0 } => return Ok(y / c1),
            Self::Diode { is, vt } => {
                return if y > -is {
                    Ok(vt * (y / is).ln_1p())
                } else {
                    Err(LawError::OutOfRange { target: y })
                };
            }
            Self::Cubic { .. } => {}
        }
        if !y.is_finite() {
            return Err(LawError::OutOfRange { target: y });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = self.bracket(y)?;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = self.eval(x) - y;
            if r == 0.0 {
                return Ok(x);
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - r / self.jacobian(x);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                x = next;
                break;
            }
            x = next;
        }
        let residual = (self.eval(x) - y).abs();
        if residual <= inverse_tolerance(y) {
            Ok(x)
        } else {
            Err(LawError::NonConvergence { target: y, x, residual })
        }
    }

    fn bracket(&self, y: f64) -> Result<(f64, f64), LawError> {
        let mut b = match *self {
            Self::Cubic { c1, .. } => y.abs() / c1,
            _ => y.abs().max(1.0),
        };
        for _ in 0..2000 {
            if self.eval(b.copysign(y)).abs() >= y.abs() {
                return Ok(if y > 0.0 { (0.0, b) } else { (-b, 0.0) });
            }
            b *= 2.0;
        }
        Err(LawError::OutOfRange { target: y })
    }

    /// `∫₀ˢ f⁻¹(σ) dσ`, closed form for linear laws and adaptive Gauss–Kronrod otherwise.
    pub fn energy(&self, s: f64) -> Result<f64, LawError> {
        if s == 0.0 {
            return Ok(0.0);
        }
        match *self {
            Self::Linear { slope } => Ok(s * s / (2.0 * slope)),
            Self::Cubic { c1, c3: 0.0 } => Ok(s * s / (2.0 * c1)),
            _ => {
                let inv = |sigma: f64| self.invert(sigma);
                adaptive_gauss_kronrod(&inv, 0.0, s, ENERGY_TOL)
            }
        }
    }
}

impl fmt::Display for ScalarLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Linear { slope } => write!(f, "linear({slope})"),
            Self::Cubic { c1, c3 } => write!(f, "poly({c1},{c3})"),
            Self::Diode { is, vt } => write!(f, "diode({is},{vt})"),
        }
    }
}

/// Residual tolerance of [`ScalarLaw::invert`], relative once `|y| > 1`.
pub fn inverse_tolerance(y: f64) -> f64 {
    1e-12 * y.abs().max(1.0)
}

const ENERGY_TOL: f64 = 1e-12;

/// Capacitor: charge as a function of branch voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitorLaw(pub ScalarLaw);

/// Inductor: flux as a function of branch current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InductorLaw(pub ScalarLaw);

/// Resistor: current as a function of branch voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistorLaw(pub ScalarLaw);

impl CapacitorLaw {
    pub fn linear(capacitance: f64) -> Self {
        Self(ScalarLaw::Linear { slope: capacitance })
    }
    pub fn charge(&self, u: f64) -> f64 {
        self.0.eval(u)
    }
    pub fn capacitance(&self, u: f64) -> f64 {
        self.0.jacobian(u)
    }
    pub fn voltage(&self, q: f64) -> Result<f64, LawError> {
        self.0.invert(q)
    }
    pub fn stored_energy(&self, q: f64) -> Result<f64, LawError> {
        self.0.energy(q)
    }
}

impl InductorLaw {
    pub fn linear(inductance: f64) -> Self {
        Self(ScalarLaw::Linear { slope: inductance })
    }
    pub fn flux(&self, j: f64) -> f64 {
        self.0.eval(j)
    }
    pub fn inductance(&self, j: f64) -> f64 {
        self.0.jacobian(j)
    }
    pub fn current(&self, phi: f64) -> Result<f64, LawError> {
        self.0.invert(phi)
    }
    pub fn stored_energy(&self, phi: f64) -> Result<f64, LawError> {
        self.0.energy(phi)
    }
}

impl ResistorLaw {
    pub fn resistance(r: f64) -> Self {
        Self(ScalarLaw::Linear { slope: 1.0 / r })
    }
    pub fn current(&self, u: f64) -> f64 {
        self.0.eval(u)
    }
    pub fn conductance(&self, u: f64) -> f64 {
        self.0.jacobian(u)
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

type Integrand<'a> = dyn Fn(f64) -> Result<f64, LawError> + 'a;

fn gk15(f: &Integrand<'_>, a: f64, b: f64) -> Result<(f64, f64), LawError> {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = hw * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kronrod * hw, ((kronrod - gauss) * hw).abs()))
}

/// Adaptive Gauss–Kronrod quadrature with absolute tolerance `tol·max(1, |I|)`.
pub fn adaptive_gauss_kronrod(
    f: &Integrand<'_>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, LawError> {
    let mut intervals = vec![(a, b, gk15(f, a, b)?)];
    for _ in 0..500 {
        let total: f64 = intervals.iter().map(|iv| iv.2 .0).sum();
        let err: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        if err <= tol * total.abs().max(1.0) {
            return Ok(total);
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("non-empty interval list");
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        intervals.push((lo, mid, gk15(f, lo, mid)?));
        intervals.push((mid, hi, gk15(f, mid, hi)?));
    }
    let estimate = intervals.iter().map(|iv| iv.2 .1).sum();
    Err(LawError::Quadrature { upper: b, estimate })
}

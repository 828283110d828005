//! Wavemaker profiles `h` on `[-1, 0]` and the controllability criteria built
//! from their strategic integrals `I_k = int h(y) cosh(k (y + 1)) dy`.
//!
//! All verdicts here are finite-range certificates: they inspect
//! `k = 1..=kmax` and report tail behaviour, never the full infinite sequence.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::boundary::{side_basis, SideCoefficients};
use crate::error::{Error, Result};
use crate::hyperbolic::cosh_depth_ratio;
use crate::io::read_float_csv;
use crate::quadrature::GaussLegendre;

/// Below this `|mean|` a profile conserves water volume.
pub const ZERO_MEAN_TOL: f64 = 1e-10;
/// `|I_k| <= STRATEGIC_ATOL * cosh k` counts as a vanishing strategic integral.
pub const STRATEGIC_ATOL: f64 = 1e-11;
/// Gauss–Legendre order for smooth profiles on the whole interval.
const SMOOTH_NODES: usize = 128;
/// Gauss–Legendre order per segment of a tabulated profile.
const SEGMENT_NODES: usize = 16;
/// Panels per unit length for side-basis projections.
const PROJECTION_PANELS_PER_UNIT: f64 = 64.0;

fn smooth_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(SMOOTH_NODES))
}

fn segment_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(SEGMENT_NODES))
}

fn h1(y: f64) -> f64 {
    y + 0.5
}

fn h2(y: f64) -> f64 {
    (0.5 * PI * (y + 1.5)).cos()
}

/// `I_1(h2) / I_1(h1)`, the multiple of `h1` removed from `h2` to build the
/// non-strategic profile.
pub fn nonstrategic_ratio() -> f64 {
    static RATIO: OnceLock<f64> = OnceLock::new();
    *RATIO.get_or_init(|| {
        let rule = smooth_rule();
        let i2 = rule.integrate(-1.0, 0.0, |y| h2(y) * cosh_depth_ratio(1.0, y));
        let i1 = rule.integrate(-1.0, 0.0, |y| h1(y) * cosh_depth_ratio(1.0, y));
        i2 / i1
    })
}

#[derive(Clone)]
enum Shape {
    Linear,
    Cosine,
    NonStrategic { ratio: f64 },
    Tabulated { ys: Vec<f64>, hs: Vec<f64> },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Control profile `h` on `[-1, 0]`.
#[derive(Clone)]
pub struct WavemakerProfile {
    name: String,
    shape: Shape,
    derivative_sup: Option<f64>,
    value_at_zero: f64,
    /// Panel boundaries for quadrature; kinks of `h` may only sit here.
    breakpoints: Vec<f64>,
}

impl fmt::Debug for WavemakerProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WavemakerProfile")
            .field("name", &self.name)
            .field("derivative_sup", &self.derivative_sup)
            .field("value_at_zero", &self.value_at_zero)
            .finish()
    }
}

impl WavemakerProfile {
    /// `h1(y) = y + 1/2`.
    pub fn linear() -> Self {
        Self {
            name: "h1".into(),
            shape: Shape::Linear,
            derivative_sup: Some(1.0),
            value_at_zero: 0.5,
            breakpoints: vec![-1.0, 0.0],
        }
    }

    /// `h2(y) = cos((pi/2)(y + 3/2))`.
    pub fn cosine() -> Self {
        Self {
            name: "h2".into(),
            shape: Shape::Cosine,
            derivative_sup: Some(0.5 * PI),
            value_at_zero: h2(0.0),
            breakpoints: vec![-1.0, 0.0],
        }
    }

    /// `h2 - (I_1(h2) / I_1(h1)) h1`: zero mean, with `I_1 = 0` by construction.
    pub fn nonstrategic() -> Self {
        let ratio = nonstrategic_ratio();
        // h' = h2' - ratio with h2' ranging over [-pi/2, -pi/(2 sqrt 2)]
        let lo = -0.5 * PI - ratio;
        let hi = -0.5 * PI / 2f64.sqrt() - ratio;
        Self {
            name: "nonstrategic".into(),
            shape: Shape::NonStrategic { ratio },
            derivative_sup: Some(lo.abs().max(hi.abs())),
            value_at_zero: h2(0.0) - ratio * h1(0.0),
            breakpoints: vec![-1.0, 0.0],
        }
    }

    /// Piecewise-linear interpolant of samples on an ascending grid spanning
    /// exactly `[-1, 0]`.
    pub fn tabulated(ys: Vec<f64>, hs: Vec<f64>) -> Result<Self> {
        if ys.len() != hs.len() {
            return Err(Error::Profile(format!(
                "profile has {} y values but {} h values",
                ys.len(),
                hs.len()
            )));
        }
        if ys.len() < 2 {
            return Err(Error::Profile("tabulated profile needs at least 2 samples".into()));
        }
        if ys.iter().chain(&hs).any(|v| !v.is_finite()) {
            return Err(Error::Profile("tabulated profile contains non-finite samples".into()));
        }
        if (ys[0] + 1.0).abs() > 1e-12 || ys[ys.len() - 1].abs() > 1e-12 {
            return Err(Error::Profile(format!(
                "tabulated profile must span [-1, 0] exactly, got [{}, {}]",
                ys[0],
                ys[ys.len() - 1]
            )));
        }
        if ys.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Profile("tabulated y values must be strictly ascending".into()));
        }
        let mut ys = ys;
        let last = ys.len() - 1;
        ys[0] = -1.0;
        ys[last] = 0.0;
        let derivative_sup = ys
            .windows(2)
            .zip(hs.windows(2))
            .map(|(y, h)| ((h[1] - h[0]) / (y[1] - y[0])).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            name: "tabulated".into(),
            value_at_zero: hs[last],
            derivative_sup: Some(derivative_sup),
            breakpoints: ys.clone(),
            shape: Shape::Tabulated { ys, hs },
        })
    }

    /// Reads a `y,h` CSV.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let (headers, rows) = read_float_csv(path)?;
        if headers != ["y", "h"] {
            return Err(Error::Profile(format!(
                "{}: expected header 'y,h', got '{}'",
                path.display(),
                headers.join(",")
            )));
        }
        let mut ys = Vec::with_capacity(rows.len());
        let mut hs = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != 2 {
                return Err(Error::Profile(format!(
                    "{}: row {} needs 2 fields",
                    path.display(),
                    i + 1
                )));
            }
            ys.push(row[0]);
            hs.push(row[1]);
        }
        let mut p = Self::tabulated(ys, hs)?;
        p.name = path.display().to_string();
        Ok(p)
    }

    /// Smooth profile given by a closure. `derivative_sup = None` leaves the
    /// sufficient condition undecidable.
    pub fn from_fn<F>(name: impl Into<String>, f: F, derivative_sup: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let value_at_zero = f(0.0);
        Self {
            name: name.into(),
            shape: Shape::Function(Arc::new(f)),
            derivative_sup,
            value_at_zero,
            breakpoints: vec![-1.0, 0.0],
        }
    }

    /// `alpha * h`, keeping the quadrature breakpoints.
    pub fn scaled(&self, alpha: f64) -> Self {
        let inner = self.clone();
        Self {
            name: format!("{alpha}*{}", self.name),
            shape: Shape::Function(Arc::new(move |y| alpha * inner.eval(y))),
            derivative_sup: self.derivative_sup.map(|d| alpha.abs() * d),
            value_at_zero: alpha * self.value_at_zero,
            breakpoints: self.breakpoints.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn derivative_sup(&self) -> Option<f64> {
        self.derivative_sup
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.shape {
            Shape::Linear => h1(y),
            Shape::Cosine => h2(y),
            Shape::NonStrategic { ratio } => h2(y) - ratio * h1(y),
            Shape::Tabulated { ys, hs } => {
                let i = ys.partition_point(|&v| v <= y).clamp(1, ys.len() - 1);
                let t = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
                hs[i - 1] + t * (hs[i] - hs[i - 1])
            }
            Shape::Function(f) => f(y),
        }
    }

    /// `int_{-1}^0 h(y) g(y) dy`.
    pub fn integrate_against<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        if self.breakpoints.len() == 2 {
            smooth_rule().integrate(-1.0, 0.0, |y| self.eval(y) * g(y))
        } else {
            self.breakpoints
                .windows(2)
                .map(|w| segment_rule().integrate(w[0], w[1], |y| self.eval(y) * g(y)))
                .sum()
        }
    }

    /// Errors unless `|int h| <= ZERO_MEAN_TOL`.
    pub fn ensure_zero_mean(&self) -> Result<()> {
        let m = mean_residual(self);
        if m.abs() > ZERO_MEAN_TOL {
            return Err(Error::Profile(format!(
                "profile '{}' violates volume conservation: integral of h over [-1, 0] is {m:e}",
                self.name
            )));
        }
        Ok(())
    }

    /// Projection onto the first `k` side basis functions `psi_k`.
    pub fn side_coefficients(&self, k: usize) -> SideCoefficients {
        let rule = segment_rule();
        let coeffs = (1..=k)
            .map(|m| {
                self.breakpoints
                    .windows(2)
                    .map(|w| {
                        let panels = ((w[1] - w[0]) * PROJECTION_PANELS_PER_UNIT).ceil().max(1.0) as usize;
                        rule.integrate_composite(w[0], w[1], panels, |y| self.eval(y) * side_basis(m, y))
                    })
                    .sum()
            })
            .collect();
        SideCoefficients::new(coeffs).expect("finite profile gives finite projections")
    }
}

/// `int_{-1}^0 h(y) dy`.
pub fn mean_residual(h: &WavemakerProfile) -> f64 {
    h.integrate_against(|_| 1.0)
}

/// `I_k / cosh k`, computed without forming `cosh k`.
pub fn scaled_strategic_integral(h: &WavemakerProfile, k: usize) -> f64 {
    let kf = k as f64;
    h.integrate_against(|y| cosh_depth_ratio(kf, y))
}

/// Strategic integral `I_k = int h(y) cosh(k (y + 1)) dy`.
pub fn strategic_integral(h: &WavemakerProfile, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::domain("strategic integrals are indexed by k >= 1"));
    }
    Ok(scaled_strategic_integral(h, k) * (k as f64).cosh())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum StrategicVerdict {
    StrategicOnRange { kmax: usize },
    FailsAt { kmax: usize, modes: Vec<usize> },
}

impl StrategicVerdict {
    pub fn is_strategic(&self) -> bool {
        matches!(self, StrategicVerdict::StrategicOnRange { .. })
    }
}

/// Lists every `k <= kmax` whose strategic integral vanishes to `STRATEGIC_ATOL`.
pub fn strategic_check(h: &WavemakerProfile, kmax: usize) -> Result<StrategicVerdict> {
    if kmax < 1 {
        return Err(Error::domain("strategic check needs kmax >= 1"));
    }
    let modes: Vec<usize> = (1..=kmax)
        .filter(|&k| scaled_strategic_integral(h, k).abs() <= STRATEGIC_ATOL)
        .collect();
    Ok(if modes.is_empty() {
        StrategicVerdict::StrategicOnRange { kmax }
    } else {
        StrategicVerdict::FailsAt { kmax, modes }
    })
}

/// Margins `m_k = (k / cosh k) |I_k|` behind the smooth-data decay criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UssdMargins {
    pub margins: Vec<f64>,
    pub min: f64,
    pub argmin: usize,
    /// `m_kmax`, the last margin computed.
    pub tail: f64,
    /// `|h(0)|`, the heuristic limit of `m_k` for profiles that are smooth
    /// at the surface. Reported, not certified.
    pub tail_limit_hint: f64,
}

pub fn ussd_margin(h: &WavemakerProfile, kmax: usize) -> Result<UssdMargins> {
    if kmax < 1 {
        return Err(Error::domain("USSD margins need kmax >= 1"));
    }
    let margins: Vec<f64> = (1..=kmax)
        .map(|k| k as f64 * scaled_strategic_integral(h, k).abs())
        .collect();
    let (argmin, min) = margins.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(ai, am), (i, &m)| if m < am { (i, m) } else { (ai, am) },
    );
    Ok(UssdMargins {
        tail: margins[kmax - 1],
        tail_limit_hint: h.value_at_zero().abs(),
        argmin: argmin + 1,
        min,
        margins,
    })
}

/// `tanh(1) / (1 - 2/e)`.
pub fn sc_constant() -> f64 {
    1f64.tanh() / (1.0 - 2.0 / std::f64::consts::E)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScOutcome {
    Pass,
    Fail,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScVerdict {
    pub outcome: ScOutcome,
    /// `||h'||_inf`, when known.
    pub lhs: Option<f64>,
    /// `(1 - eps) tanh(1) / (1 - 2/e) |h(0)|`.
    pub rhs: f64,
}

/// Sufficient condition `||h'||_inf < (1 - eps) tanh(1) / (1 - 2/e) |h(0)|`.
pub fn sc_check(h: &WavemakerProfile, eps: f64) -> Result<ScVerdict> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!(
            "sufficient condition needs 0 < eps < 1, got {eps}"
        )));
    }
    let rhs = (1.0 - eps) * sc_constant() * h.value_at_zero().abs();
    let outcome = match h.derivative_sup() {
        None => ScOutcome::Unknown,
        Some(d) if d < rhs => ScOutcome::Pass,
        Some(_) => ScOutcome::Fail,
    };
    Ok(ScVerdict {
        outcome,
        lhs: h.derivative_sup(),
        rhs,
    })
}

/// Truncated coefficients of the control operator.
///
/// `b` is the second-order form, `B_0 1 = sum_k b_k phi_k`, so the collocated
/// output is `B* z = sum_k b_k w_k`. `beta = b / sqrt 2` gives `B* phi_k` on
/// the eigenvectors of the first-order generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingVector {
    b: Vec<f64>,
    beta: Vec<f64>,
}

impl CouplingVector {
    pub fn from_b(b: Vec<f64>) -> Self {
        let beta = b.iter().map(|v| v / 2f64.sqrt()).collect();
        Self { b, beta }
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn n_modes(&self) -> usize {
        self.b.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.b.iter().map(|v| v * v).sum()
    }
}

/// `b_k = -sqrt(2/pi) I_k / cosh k` for `k = 1..=n`.
pub fn coupling_vector(h: &WavemakerProfile, n: usize) -> Result<CouplingVector> {
    if n < 1 {
        return Err(Error::domain("coupling vector needs at least one mode"));
    }
    let c = FRAC_2_PI.sqrt();
    Ok(CouplingVector::from_b(
        (1..=n).map(|k| -c * scaled_strategic_integral(h, k)).collect(),
    ))
}

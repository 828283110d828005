use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InputForm {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * cos(omega t + phase)`, with `t` the absolute time.
    Sinusoid {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
}

impl InputForm {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            InputForm::Zero => 0.0,
            InputForm::Constant { value } => value,
            InputForm::Sinusoid {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).cos(),
        }
    }

    /// The same form delayed by `tau`: `t -> f(t - tau)`.
    fn delayed(&self, tau: f64) -> Self {
        match *self {
            InputForm::Sinusoid {
                amplitude,
                omega,
                phase,
            } => InputForm::Sinusoid {
                amplitude,
                omega,
                phase: phase - omega * tau,
            },
            other => other,
        }
    }
}

/// One interval `[t_start, t_end)` of a piecewise input. `t_end = None`
/// leaves the piece open to the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputPiece {
    pub t_start: f64,
    #[serde(default)]
    pub t_end: Option<f64>,
    pub form: InputForm,
}

impl InputPiece {
    fn end(&self) -> f64 {
        self.t_end.unwrap_or(f64::INFINITY)
    }
}

/// Scalar control signal `u(t)` described piecewise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputSignal {
    pieces: Vec<InputPiece>,
}

const JOIN_TOL: f64 = 1e-12;

impl InputSignal {
    pub fn new(pieces: Vec<InputPiece>) -> Result<Self> {
        let s = Self { pieces };
        s.check_structure()?;
        Ok(s)
    }

    pub fn zero() -> Self {
        Self::uniform(InputForm::Zero)
    }

    pub fn constant(value: f64) -> Self {
        Self::uniform(InputForm::Constant { value })
    }

    pub fn sinusoid(amplitude: f64, omega: f64, phase: f64) -> Self {
        Self::uniform(InputForm::Sinusoid {
            amplitude,
            omega,
            phase,
        })
    }

    fn uniform(form: InputForm) -> Self {
        Self {
            pieces: vec![InputPiece {
                t_start: 0.0,
                t_end: None,
                form,
            }],
        }
    }

    pub fn pieces(&self) -> &[InputPiece] {
        &self.pieces
    }

    fn check_structure(&self) -> Result<()> {
        let first = self
            .pieces
            .first()
            .ok_or_else(|| Error::Input("input signal has no pieces".into()))?;
        if first.t_start.abs() > JOIN_TOL {
            return Err(Error::Input(format!(
                "input signal must start at t = 0, starts at {}",
                first.t_start
            )));
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if !(p.end() > p.t_start) {
                return Err(Error::Input(format!("input piece {i} has empty interval")));
            }
            if i + 1 < self.pieces.len() && p.t_end.is_none() {
                return Err(Error::Input(format!("input piece {i} is open-ended but not last")));
            }
        }
        for (i, w) in self.pieces.windows(2).enumerate() {
            let gap = w[1].t_start - w[0].end();
            if gap < -JOIN_TOL {
                return Err(Error::Input(format!(
                    "input pieces {i} and {} overlap on [{}, {}]",
                    i + 1,
                    w[1].t_start,
                    w[0].end()
                )));
            }
            if gap > JOIN_TOL {
                return Err(Error::Input(format!(
                    "input pieces {i} and {} leave a gap on [{}, {}]",
                    i + 1,
                    w[0].end(),
                    w[1].t_start
                )));
            }
        }
        Ok(())
    }

    /// Checks that the pieces cover `[0, t_final]`.
    pub fn validate(&self, t_final: f64) -> Result<()> {
        self.check_structure()?;
        let end = self.pieces.last().expect("non-empty").end();
        if end < t_final - JOIN_TOL {
            return Err(Error::Input(format!(
                "input signal ends at {end} before t_final = {t_final}"
            )));
        }
        Ok(())
    }

    /// `u(t)`; zero outside the described intervals.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.pieces.partition_point(|p| p.t_start <= t);
        if i == 0 {
            return 0.0;
        }
        let p = &self.pieces[i - 1];
        if t < p.end() || (i == self.pieces.len() && t <= p.end()) {
            p.form.eval(t)
        } else {
            0.0
        }
    }

    /// `tau`-concatenation: `self` on `[0, tau)`, then `next(t - tau)`.
    pub fn concat(&self, tau: f64, next: &InputSignal) -> Result<InputSignal> {
        if !(tau >= 0.0) {
            return Err(Error::Input(format!("concatenation time must be >= 0, got {tau}")));
        }
        let mut pieces: Vec<InputPiece> = self
            .pieces
            .iter()
            .filter(|p| p.t_start < tau)
            .map(|p| InputPiece {
                t_end: Some(p.end().min(tau)),
                ..*p
            })
            .collect();
        pieces.extend(next.pieces.iter().map(|p| InputPiece {
            t_start: p.t_start + tau,
            t_end: p.t_end.map(|e| e + tau),
            form: p.form.delayed(tau),
        }));
        InputSignal::new(pieces)
    }
}

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, read_float_csv};

/// Sampled trajectory of a simulation run.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub x_norm: Vec<f64>,
    pub energy: Vec<f64>,
    pub u: Vec<f64>,
    /// Per-sample `(zeta_k, w_k)` for the first few modes; empty when not
    /// recorded.
    pub modes: Vec<Vec<(f64, f64)>>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn recorded_modes(&self) -> usize {
        self.modes.first().map_or(0, Vec::len)
    }

    pub(crate) fn push(&mut self, t: f64, energy: f64, u: f64, modes: Vec<(f64, f64)>) {
        self.t.push(t);
        self.x_norm.push(energy.sqrt());
        self.energy.push(energy);
        self.u.push(u);
        if !modes.is_empty() {
            self.modes.push(modes);
        }
    }

    /// Builds a series from plain columns, checking the invariants.
    pub fn from_columns(t: Vec<f64>, x_norm: Vec<f64>) -> Result<Self> {
        let energy = x_norm.iter().map(|x| x * x).collect();
        let u = vec![0.0; t.len()];
        let s = Self {
            t,
            x_norm,
            energy,
            u,
            modes: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if self.x_norm.len() != n || self.energy.len() != n || self.u.len() != n {
            return Err(Error::Input("time series columns have unequal lengths".into()));
        }
        if !self.modes.is_empty() && self.modes.len() != n {
            return Err(Error::Input("time series mode samples have the wrong length".into()));
        }
        if let Some(i) = self.t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Input(format!(
                "time series t is not strictly increasing at row {}",
                i + 2
            )));
        }
        Ok(())
    }

    /// Trapezoid rule for `int u^2 dt` over the samples.
    pub fn integral_u_squared(&self) -> f64 {
        self.t
            .windows(2)
            .zip(self.u.windows(2))
            .map(|(t, u)| 0.5 * (t[1] - t[0]) * (u[0] * u[0] + u[1] * u[1]))
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = self.recorded_modes();
        let mut header = String::from("t,x_norm,energy,u");
        for k in 1..=m {
            header.push_str(&format!(",zeta_{k},w_{k}"));
        }
        writeln!(out, "{header}")?;
        for i in 0..self.len() {
            let mut line = format!(
                "{},{},{},{}",
                fmt_f64(self.t[i]),
                fmt_f64(self.x_norm[i]),
                fmt_f64(self.energy[i]),
                fmt_f64(self.u[i])
            );
            if m > 0 {
                for (z, w) in &self.modes[i] {
                    line.push_str(&format!(",{},{}", fmt_f64(*z), fmt_f64(*w)));
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads a series file. Only `t` and `x_norm` are required; missing
    /// `energy` is derived and missing `u` is zero.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let (headers, rows) = read_float_csv(path)?;
        let col = |name: &str| headers.iter().position(|h| h == name);
        let missing = |name: &str| Error::Parse(format!("{}: missing column '{name}'", path.display()));
        let ti = col("t").ok_or_else(|| missing("t"))?;
        let xi = col("x_norm").ok_or_else(|| missing("x_norm"))?;
        let ei = col("energy");
        let ui = col("u");
        let mut mode_cols = Vec::new();
        for k in 1.. {
            match (col(&format!("zeta_{k}")), col(&format!("w_{k}"))) {
                (Some(z), Some(w)) => mode_cols.push((z, w)),
                _ => break,
            }
        }
        let mut s = TimeSeries::default();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != headers.len() {
                return Err(Error::Parse(format!(
                    "{}: row {} has {} fields",
                    path.display(),
                    r + 1,
                    row.len()
                )));
            }
            let x = row[xi];
            s.t.push(row[ti]);
            s.x_norm.push(x);
            s.energy.push(ei.map_or(x * x, |i| row[i]));
            s.u.push(ui.map_or(0.0, |i| row[i]));
            if !mode_cols.is_empty() {
                s.modes.push(mode_cols.iter().map(|&(z, w)| (row[z], row[w])).collect());
            }
        }
        s.validate()?;
        Ok(s)
    }
}

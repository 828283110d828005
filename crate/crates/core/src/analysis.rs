//! Decay diagnostics for closed-loop trajectories.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::fmt_f64;
use crate::profile::{coupling_vector, CouplingVector, WavemakerProfile};
use crate::simulator::{simulate_closed_with, Feedback, ModalState, SimConfig, TimeSeries};
use crate::spectral::{lambda_unchecked, SpectralTruncation};

pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayModel {
    /// `log x_norm` against `t`; the fitted value is the rate `sigma`.
    Exponential,
    /// `log x_norm` against `log(1 + t)`; the fitted value is the slope `p`.
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub window: (f64, f64),
    pub model: DecayModel,
    pub fitted_value: f64,
    pub residual_rms: f64,
    pub samples: usize,
}

/// Window spanning the last half of the samples.
pub fn tail_window(series: &TimeSeries) -> Result<(f64, f64)> {
    let n = series.len();
    if n < 2 {
        return Err(Error::domain("series too short for a tail window"));
    }
    Ok((series.t[n / 2], series.t[n - 1]))
}

/// Least-squares decay fit on the samples with `t_lo <= t <= t_hi`.
pub fn decay_fit(series: &TimeSeries, window: (f64, f64), model: DecayModel) -> Result<DecayFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo < t_hi) {
        return Err(Error::domain(format!(
            "fit window needs t_lo < t_hi, got [{t_lo}, {t_hi}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &x) in series.t.iter().zip(&series.x_norm) {
        if t < t_lo || t > t_hi {
            continue;
        }
        if !(x > 0.0) {
            return Err(Error::domain(format!("x_norm = {x} at t = {t} inside the fit window")));
        }
        xs.push(match model {
            DecayModel::Exponential => t,
            DecayModel::PowerLaw => t.ln_1p(),
        });
        ys.push(x.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::domain(format!(
            "fit window [{t_lo}, {t_hi}] holds {} samples, need at least {MIN_FIT_SAMPLES}",
            xs.len()
        )));
    }
    let y0 = ys[0];
    ys.iter_mut().for_each(|y| *y -= y0);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - my - slope * (x - mx);
            r * r
        })
        .sum();
    let fitted_value = match model {
        DecayModel::Exponential => -slope,
        DecayModel::PowerLaw => slope,
    };
    Ok(DecayFit {
        window,
        model,
        fitted_value,
        residual_rms: (rss / n).sqrt(),
        samples: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeReport {
    #[serde(rename = "M_min")]
    pub m_min: f64,
    pub attained_at: f64,
}

/// Smallest `M` with `x_norm(t) <= M (1+t)^{-1/6} domain_norm0` on every
/// sample.
pub fn envelope_check(series: &TimeSeries, domain_norm0: f64) -> Result<EnvelopeReport> {
    if !(domain_norm0 > 0.0) {
        return Err(Error::domain(format!(
            "domain_norm0 must be positive, got {domain_norm0}"
        )));
    }
    let mut report = EnvelopeReport {
        m_min: 0.0,
        attained_at: series.t.first().copied().unwrap_or(0.0),
    };
    for (&t, &x) in series.t.iter().zip(&series.x_norm) {
        let m = x * (1.0 + t).powf(1.0 / 6.0) / domain_norm0;
        if m > report.m_min {
            report = EnvelopeReport {
                m_min: m,
                attained_at: t,
            };
        }
    }
    Ok(report)
}

/// `zeta_k = k^{-decay_power}`, `w = 0`, scaled to unit domain norm.
pub fn smooth_initial_state(n: usize, decay_power: f64) -> Result<ModalState> {
    if n == 0 {
        return Err(Error::domain("smooth initial state needs at least one mode"));
    }
    if !(decay_power >= 2.0) {
        return Err(Error::domain(format!("decay_power must be >= 2, got {decay_power}")));
    }
    let zeta = (1..=n).map(|k| (k as f64).powf(-decay_power)).collect();
    let mut s = ModalState::new(zeta, vec![0.0; n])?;
    let d = s.domain_norm();
    s.scale(1.0 / d);
    Ok(s)
}

/// Largest real part of the eigenvalues of `[[0, I], [-Lambda, -b b^T]]`,
/// negated: the exponential decay rate of the truncated closed loop.
pub fn spectral_abscissa_rate(b: &CouplingVector) -> f64 {
    let n = b.n_modes();
    let lambda = SpectralTruncation::new(n).map(|t| t.lambdas()).unwrap_or_default();
    let bv = b.b();
    let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) if j - n == i => 1.0,
        (false, true) if j == i - n => -lambda[j],
        (false, false) => -bv[i - n] * bv[j - n],
        _ => 0.0,
    });
    let top = m
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    -top
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub rate: f64,
    pub residual_rms: f64,
    /// Dense-eigensolve rate for the same truncation.
    pub oracle_rate: f64,
    /// `min_k |beta_k| (mu_k + 1)^2` over the retained modes.
    pub gamma_product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
}

impl RateStudy {
    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rate).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].rate < w[0].rate)
    }

    pub fn all_positive(&self) -> bool {
        self.rows.iter().all(|r| r.rate > 0.0)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "N,rate,residual_rms")?;
        for r in &self.rows {
            writeln!(out, "{},{},{}", r.n, fmt_f64(r.rate), fmt_f64(r.residual_rms))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Base configuration used by [`rate_vs_n_study`] when none is supplied: long
/// enough that the slowest eigenmode dominates the tail window.
pub fn default_rate_config() -> SimConfig {
    SimConfig::new(2, 2.0e5).with_dt(1e-2).with_sample_every(100)
}

/// For each `N`, runs the closed loop from `zeta_k = w_k = 1/sqrt N` and fits
/// the exponential rate on the last half of the samples. `n_modes` and
/// `feedback` of `base` are overridden.
pub fn rate_vs_n_study(h: &WavemakerProfile, ns: &[usize], base: &SimConfig, exec: Execution) -> Result<RateStudy> {
    if ns.is_empty() {
        return Err(Error::domain("rate study needs at least one truncation size"));
    }
    if ns.iter().any(|&n| n < 2) {
        return Err(Error::domain("rate study truncation sizes must be >= 2"));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("rate study truncation sizes must be strictly increasing"));
    }
    let runs = exec.map_slice(ns, |&n| -> Result<RateRow> {
        let mut config = *base;
        config.n_modes = n;
        config.feedback = Feedback::Collocated;
        let b = coupling_vector(h, n)?;
        let v = 1.0 / (n as f64).sqrt();
        let state0 = ModalState::new(vec![v; n], vec![v; n])?;
        let run = simulate_closed_with(&state0, &b, &config)?;
        let fit = decay_fit(&run.series, tail_window(&run.series)?, DecayModel::Exponential)?;
        let gamma_product = b
            .beta()
            .iter()
            .enumerate()
            .map(|(i, beta)| beta.abs() * (lambda_unchecked(i + 1).sqrt() + 1.0).powi(2))
            .fold(f64::INFINITY, f64::min);
        Ok(RateRow {
            n,
            rate: fit.fitted_value,
            residual_rms: fit.residual_rms,
            oracle_rate: spectral_abscissa_rate(&b),
            gamma_product,
        })
    });
    Ok(RateStudy {
        rows: runs.into_iter().collect::<Result<_>>()?,
    })
}

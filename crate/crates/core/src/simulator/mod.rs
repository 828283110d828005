//! Time integration of the truncated modal system
//! `zeta_k'' = -lambda_k zeta_k + b_k u(t)`, open loop or closed with the
//! collocated feedback `u = -sum_k b_k w_k`.
//!
//! The default integrator is a Strang splitting of the exact per-mode
//! rotation and the exact rank-one damping flow. Internally each mode is
//! carried as `(mu_k zeta_k, w_k)`, so a rotation touches the pair through one
//! orthogonal 2x2 matrix and the energy is `sum (mu zeta)^2 + w^2`.

mod input;
mod series;
mod state;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use input::{InputForm, InputPiece, InputSignal};
pub use series::TimeSeries;
pub use state::ModalState;

use crate::error::{Error, Result};
use crate::profile::{coupling_vector, CouplingVector, WavemakerProfile};
use crate::spectral::lambda_unchecked;

pub const DEFAULT_N_MODES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feedback {
    #[default]
    Collocated,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Splitting,
    Rk4Crosscheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_modes: usize,
    pub dt: f64,
    pub t_final: f64,
    pub feedback: Feedback,
    pub integrator: Integrator,
    pub sample_every: usize,
    /// Number of leading modes whose `(zeta_k, w_k)` are recorded per sample.
    #[serde(default)]
    pub record_modes: usize,
}

/// `min(1e-2, 0.1 / mu_N)`.
pub fn default_dt(n_modes: usize) -> f64 {
    let mu_n = lambda_unchecked(n_modes.max(1)).sqrt();
    (0.1 / mu_n).min(1e-2)
}

impl SimConfig {
    pub fn new(n_modes: usize, t_final: f64) -> Self {
        Self {
            n_modes,
            dt: default_dt(n_modes),
            t_final,
            feedback: Feedback::Collocated,
            integrator: Integrator::Splitting,
            sample_every: 1,
            record_modes: 0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_feedback(mut self, feedback: Feedback) -> Self {
        self.feedback = feedback;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_sample_every(mut self, sample_every: usize) -> Self {
        self.sample_every = sample_every;
        self
    }

    pub fn with_record_modes(mut self, record_modes: usize) -> Self {
        self.record_modes = record_modes;
        self
    }

    /// Number of steps; `dt` is shrunk so that they land exactly on `t_final`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn dt_effective(&self) -> f64 {
        self.t_final / self.steps() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::Config("n_modes must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.t_final.is_finite() || !(self.t_final >= self.dt) {
            return Err(Error::Config(format!(
                "t_final must be at least dt = {}, got {}",
                self.dt, self.t_final
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        if self.record_modes > self.n_modes {
            return Err(Error::Config(format!(
                "record_modes = {} exceeds n_modes = {}",
                self.record_modes, self.n_modes
            )));
        }
        if self.integrator == Integrator::Rk4Crosscheck {
            let mu_n = lambda_unchecked(self.n_modes).sqrt();
            let h = self.dt_effective() * mu_n;
            if h > 0.5 {
                return Err(Error::Config(format!(
                    "rk4-crosscheck needs dt * mu_N <= 0.5, got {h:.4}; use dt <= {:.6e}",
                    0.5 / mu_n
                )));
            }
        }
        Ok(())
    }
}

/// Output of one run.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub series: TimeSeries,
    pub final_state: ModalState,
    pub dt_effective: f64,
    pub steps: usize,
    /// Samples at which roundoff had to be trimmed to keep the closed-loop
    /// norm non-increasing.
    pub norm_guard_hits: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub x_norm: f64,
    pub domain_norm: f64,
}

impl Norms {
    pub fn of(state: &ModalState) -> Self {
        Self {
            x_norm: state.x_norm(),
            domain_norm: state.domain_norm(),
        }
    }
}

/// JSON summary written next to an exported series.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: SimConfig,
    pub dt_effective: f64,
    pub steps: usize,
    pub samples: usize,
    pub initial: Norms,
    #[serde(rename = "final")]
    pub final_norms: Norms,
    pub norm_guard_hits: usize,
    pub wall_time: f64,
}

impl RunSummary {
    pub fn new(config: &SimConfig, state0: &ModalState, run: &SimulationRun) -> Self {
        Self {
            config: *config,
            dt_effective: run.dt_effective,
            steps: run.steps,
            samples: run.series.len(),
            initial: Norms::of(state0),
            final_norms: Norms::of(&run.final_state),
            norm_guard_hits: run.norm_guard_hits,
            wall_time: run.wall_time,
        }
    }
}

// ---------------------------------------------------------------------------
// substeps

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `c^2 + s^2 - 1`, accurate far below one ulp.
fn unit_defect(c: f64, s: f64) -> f64 {
    let (cc, cl) = two_prod(c, c);
    let (ss, sl) = two_prod(s, s);
    let (big, small) = if cc >= ss { (cc, ss) } else { (ss, cc) };
    ((big - 1.0) + small) + (cl + sl)
}

fn ulp_step(x: f64, n: i64) -> f64 {
    let mut v = x;
    for _ in 0..n.abs() {
        v = if n > 0 { v.next_up() } else { v.next_down() };
    }
    v
}

/// `sqrt(1 - x^2)` with sign `sign`, refined by one Newton step in
/// double-double so that small partners are accurate to within an ulp.
fn unit_partner(x: f64, sign: f64) -> f64 {
    let (xx, xl) = two_prod(x, x);
    let (hi, lo) = (1.0 - xx, -xl);
    let mut y = (hi + lo).max(0.0).sqrt();
    if y > 0.0 {
        let (yy, yl) = two_prod(y, y);
        y += ((hi - yy) + (lo - yl)) / (2.0 * y);
    }
    y.copysign(sign)
}

/// `(cos theta, sin theta)` adjusted within a few ulps so that `c^2 + s^2` is
/// as close to 1 as the format allows. The larger component is nudged and the
/// smaller one recomputed from it. Repeated application then drifts the
/// energy only through unbiased rounding.
fn balanced_rotation(theta: f64) -> (f64, f64) {
    const REACH: i64 = 16;
    let (s0, c0) = theta.sin_cos();
    let swap = c0.abs() < s0.abs();
    let (x0, y0) = if swap { (s0, c0) } else { (c0, s0) };
    let mut best = (x0, y0);
    let mut best_key = (unit_defect(x0, y0).abs(), 0);
    for i in -REACH..=REACH {
        let x = ulp_step(x0, i);
        let y = unit_partner(x, y0);
        for j in -1..=1 {
            let y = ulp_step(y, j);
            let key = (unit_defect(x, y).abs(), i.abs() + j.abs());
            if key < best_key {
                best_key = key;
                best = (x, y);
            }
        }
    }
    if swap {
        (best.1, best.0)
    } else {
        best
    }
}

fn rotation_table(mus: &[f64], tau: f64) -> Vec<(f64, f64)> {
    mus.iter().map(|&mu| balanced_rotation(mu * tau)).collect()
}

fn rotate(p: &mut [f64], w: &mut [f64], table: &[(f64, f64)]) {
    for ((p, w), &(c, s)) in p.iter_mut().zip(w.iter_mut()).zip(table) {
        let (p0, w0) = (*p, *w);
        *p = c.mul_add(p0, s * w0);
        *w = c.mul_add(w0, -(s * p0));
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(e^{-q tau} - 1) / q` with `q = |b|^2`; zero when `b = 0`.
fn damping_factor(q: f64, tau: f64) -> f64 {
    if q > 0.0 {
        (-q * tau).exp_m1() / q
    } else {
        0.0
    }
}

fn damp(w: &mut [f64], b: &[f64], factor: f64) {
    let s = dot(b, w) * factor;
    for (w, b) in w.iter_mut().zip(b) {
        *w = b.mul_add(s, *w);
    }
}

fn check_modes(state: &ModalState, n: usize, what: &str) -> Result<()> {
    state.validate()?;
    if state.n_modes() != n {
        return Err(Error::Config(format!(
            "{what} has {} modes, expected {n}",
            state.n_modes()
        )));
    }
    Ok(())
}

/// Exact free evolution over `tau`: each mode rotates by angle `mu_k tau`.
pub fn rotation_substep(state: &ModalState, tau: f64) -> ModalState {
    let mut e = Scaled::from_state(state);
    rotate(&mut e.p, &mut e.w, &rotation_table(&e.mu, tau));
    e.to_state()
}

/// Exact solution of `w' = -b (b^T w)` over `tau`; `zeta` is untouched.
pub fn damping_substep(state: &ModalState, b: &CouplingVector, tau: f64) -> ModalState {
    assert_eq!(b.n_modes(), state.n_modes(), "coupling and state sizes differ");
    let mut out = state.clone();
    damp(&mut out.w, b.b(), damping_factor(b.norm_squared(), tau.max(0.0)));
    out
}

/// State in `(mu zeta, w)` coordinates.
struct Scaled {
    mu: Vec<f64>,
    p: Vec<f64>,
    w: Vec<f64>,
}

impl Scaled {
    fn from_state(state: &ModalState) -> Self {
        let mu = state.truncation().mus();
        let p = state.zeta.iter().zip(&mu).map(|(z, m)| z * m).collect();
        Self {
            mu,
            p,
            w: state.w.clone(),
        }
    }

    fn to_state(&self) -> ModalState {
        ModalState {
            zeta: self.p.iter().zip(&self.mu).map(|(p, m)| p / m).collect(),
            w: self.w.clone(),
        }
    }

    fn energy(&self) -> f64 {
        dot(&self.p, &self.p) + dot(&self.w, &self.w)
    }

    fn modes(&self, m: usize) -> Vec<(f64, f64)> {
        (0..m).map(|i| (self.p[i] / self.mu[i], self.w[i])).collect()
    }

    fn scale(&mut self, f: f64) {
        self.p.iter_mut().chain(self.w.iter_mut()).for_each(|v| *v *= f);
    }
}

// ---------------------------------------------------------------------------
// drivers

enum Drive<'a> {
    Closed,
    Open(&'a InputSignal),
}

fn is_sample(step: usize, steps: usize, every: usize) -> bool {
    step.is_multiple_of(every) || step == steps
}

/// Strang splitting `R(dt/2) F(dt) R(dt/2)` with `F` the damping flow or the
/// midpoint forcing kick. The carried state sits half a rotation ahead of the
/// grid, so consecutive half turns fuse into one and each sample is a copy
/// turned back into place; sampling never feeds roundoff into the trajectory.
fn run_splitting(state0: &ModalState, b: &[f64], drive: Drive<'_>, config: &SimConfig) -> SimulationRun {
    let start = Instant::now();
    let steps = config.steps();
    let dt = config.dt_effective();
    let mut y = Scaled::from_state(state0);
    let half = rotation_table(&y.mu, 0.5 * dt);
    let full = rotation_table(&y.mu, dt);
    let factor = damping_factor(dot(b, b), dt);
    let output = |e: &Scaled, t: f64| match drive {
        Drive::Closed => -dot(b, &e.w),
        Drive::Open(u) => u.eval(t),
    };

    let mut series = TimeSeries::default();
    series.push(0.0, y.energy(), output(&y, 0.0), y.modes(config.record_modes));
    let mut z = Scaled {
        mu: y.mu.clone(),
        p: y.p.clone(),
        w: y.w.clone(),
    };
    let mut guard_hits = 0;
    rotate(&mut y.p, &mut y.w, &half);
    for step in 1..=steps {
        match drive {
            Drive::Closed => damp(&mut y.w, b, factor),
            Drive::Open(u) => {
                let kick = dt * u.eval((step as f64 - 0.5) * dt);
                for (w, b) in y.w.iter_mut().zip(b) {
                    *w = b.mul_add(kick, *w);
                }
            }
        }
        if is_sample(step, steps, config.sample_every) {
            z.p.copy_from_slice(&y.p);
            z.w.copy_from_slice(&y.w);
            rotate(&mut z.p, &mut z.w, &half);
            let mut energy = z.energy();
            let prev = *series.x_norm.last().expect("initial sample");
            if matches!(drive, Drive::Closed) && energy.sqrt() > prev {
                guard_hits += 1;
                let mut f = (prev * prev / energy).sqrt();
                loop {
                    let mut trial = Scaled {
                        mu: Vec::new(),
                        p: z.p.clone(),
                        w: z.w.clone(),
                    };
                    trial.scale(f);
                    energy = trial.energy();
                    if energy.sqrt() <= prev {
                        z.p = trial.p;
                        z.w = trial.w;
                        y.scale(f);
                        break;
                    }
                    f *= 1.0 - f64::EPSILON;
                }
            }
            let t = if step == steps {
                config.t_final
            } else {
                step as f64 * dt
            };
            series.push(t, energy, output(&z, t), z.modes(config.record_modes));
        }
        if step < steps {
            rotate(&mut y.p, &mut y.w, &full);
        }
    }
    SimulationRun {
        series,
        final_state: z.to_state(),
        dt_effective: dt,
        steps,
        norm_guard_hits: guard_hits,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

fn run_rk4(state0: &ModalState, b: &[f64], drive: Drive<'_>, config: &SimConfig) -> SimulationRun {
    let start = Instant::now();
    let steps = config.steps();
    let dt = config.dt_effective();
    let n = state0.n_modes();
    let lambda = state0.truncation().lambdas();
    let input = |w: &[f64], t: f64| match drive {
        Drive::Closed => -dot(b, w),
        Drive::Open(u) => u.eval(t),
    };
    let rhs = |z: &[f64], w: &[f64], t: f64, dz: &mut [f64], dw: &mut [f64]| {
        let u = input(w, t);
        for k in 0..n {
            dz[k] = w[k];
            dw[k] = -lambda[k] * z[k] + b[k] * u;
        }
    };
    let energy =
        |z: &[f64], w: &[f64]| -> f64 { z.iter().zip(&lambda).map(|(z, l)| l * z * z).sum::<f64>() + dot(w, w) };
    let record = |series: &mut TimeSeries, z: &[f64], w: &[f64], t: f64| {
        let modes = (0..config.record_modes).map(|i| (z[i], w[i])).collect();
        series.push(t, energy(z, w), input(w, t), modes);
    };

    let mut z = state0.zeta.clone();
    let mut w = state0.w.clone();
    let mut k = [(); 4].map(|_| (vec![0.0; n], vec![0.0; n]));
    let (mut zt, mut wt) = (vec![0.0; n], vec![0.0; n]);
    let mut series = TimeSeries::default();
    record(&mut series, &z, &w, 0.0);
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        let stages = [(0.0, 0.0), (0.5, 0.5), (0.5, 0.5), (1.0, 1.0)];
        for s in 0..4 {
            let (a, c) = stages[s];
            if s == 0 {
                zt.copy_from_slice(&z);
                wt.copy_from_slice(&w);
            } else {
                let (pz, pw) = &k[s - 1];
                for i in 0..n {
                    zt[i] = z[i] + a * dt * pz[i];
                    wt[i] = w[i] + a * dt * pw[i];
                }
            }
            let (dz, dw) = &mut k[s];
            rhs(&zt, &wt, t + c * dt, dz, dw);
        }
        for i in 0..n {
            z[i] += dt / 6.0 * (k[0].0[i] + 2.0 * k[1].0[i] + 2.0 * k[2].0[i] + k[3].0[i]);
            w[i] += dt / 6.0 * (k[0].1[i] + 2.0 * k[1].1[i] + 2.0 * k[2].1[i] + k[3].1[i]);
        }
        if is_sample(step, steps, config.sample_every) {
            let t = if step == steps {
                config.t_final
            } else {
                step as f64 * dt
            };
            record(&mut series, &z, &w, t);
        }
    }
    SimulationRun {
        series,
        final_state: ModalState { zeta: z, w },
        dt_effective: dt,
        steps,
        norm_guard_hits: 0,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Closed loop `u = -sum b_k w_k` with the coupling of profile `h`.
pub fn simulate_closed(state0: &ModalState, h: &WavemakerProfile, config: &SimConfig) -> Result<SimulationRun> {
    config.validate()?;
    let b = coupling_vector(h, config.n_modes)?;
    simulate_closed_with(state0, &b, config)
}

pub fn simulate_closed_with(state0: &ModalState, b: &CouplingVector, config: &SimConfig) -> Result<SimulationRun> {
    config.validate()?;
    if config.feedback != Feedback::Collocated {
        return Err(Error::Config(
            "closed-loop simulation needs feedback = collocated".into(),
        ));
    }
    check_modes(state0, config.n_modes, "initial state")?;
    if b.n_modes() != config.n_modes {
        return Err(Error::Config(format!(
            "coupling has {} modes, expected {}",
            b.n_modes(),
            config.n_modes
        )));
    }
    Ok(match config.integrator {
        Integrator::Splitting => run_splitting(state0, b.b(), Drive::Closed, config),
        Integrator::Rk4Crosscheck => run_rk4(state0, b.b(), Drive::Closed, config),
    })
}

/// Open loop driven by the input signal `u`.
pub fn simulate_open(
    state0: &ModalState,
    h: &WavemakerProfile,
    u: &InputSignal,
    config: &SimConfig,
) -> Result<SimulationRun> {
    config.validate()?;
    let b = coupling_vector(h, config.n_modes)?;
    simulate_open_with(state0, &b, u, config)
}

pub fn simulate_open_with(
    state0: &ModalState,
    b: &CouplingVector,
    u: &InputSignal,
    config: &SimConfig,
) -> Result<SimulationRun> {
    config.validate()?;
    if config.feedback != Feedback::None {
        return Err(Error::Config("open-loop simulation needs feedback = none".into()));
    }
    check_modes(state0, config.n_modes, "initial state")?;
    if b.n_modes() != config.n_modes {
        return Err(Error::Config(format!(
            "coupling has {} modes, expected {}",
            b.n_modes(),
            config.n_modes
        )));
    }
    u.validate(config.t_final)?;
    Ok(match config.integrator {
        Integrator::Splitting => run_splitting(state0, b.b(), Drive::Open(u), config),
        Integrator::Rk4Crosscheck => run_rk4(state0, b.b(), Drive::Open(u), config),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use nalgebra::Complex;

    use super::*;

    fn max_diff(a: &ModalState, b: &ModalState) -> f64 {
        a.zeta
            .iter()
            .zip(&b.zeta)
            .chain(a.w.iter().zip(&b.w))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn spread(n: usize) -> ModalState {
        let v = 1.0 / (n as f64).sqrt();
        ModalState::new(vec![v; n], vec![v; n]).unwrap()
    }

    #[test]
    fn balanced_coefficients_are_unit() {
        for &theta in &[1e-3, 5e-4, 0.005, 0.37, 0.785, 1.0, 2.5, -0.8, 3.1] {
            let (c, s) = balanced_rotation(theta);
            let (c0, s0) = (theta.cos(), theta.sin());
            assert!((c - c0).abs() <= 8.0 * f64::EPSILON);
            assert!((s - s0).abs() <= 8.0 * f64::EPSILON * (c0 / s0).abs().max(1.0));
            assert!(unit_defect(c, s).abs() <= unit_defect(c0, s0).abs());
            if theta.abs() < 0.1 {
                assert!(unit_defect(c, s).abs() < 1e-19, "{theta}: {:e}", unit_defect(c, s));
            }
        }
    }

    #[test]
    fn rotation_examples() {
        let s = spread(5);
        assert_eq!(rotation_substep(&s, 0.0), s);
        let one = ModalState::single_mode(1, 1, 1.0, 0.0);
        let mu1 = lambda_unchecked(1).sqrt();
        let back = rotation_substep(&one, 2.0 * PI / mu1);
        assert!(max_diff(&back, &one) < 1e-12);
        let r = rotation_substep(&s, 0.37);
        assert!(((r.x_norm() - s.x_norm()) / s.x_norm()).abs() < 1e-13);
    }

    #[test]
    fn rotation_acts_diagonally_on_eigen_coordinates() {
        let s = ModalState::single_mode(2, 1, 0.3, -1.1);
        let tau = 0.9;
        let c0 = s.to_eigen_coordinates();
        let c1 = rotation_substep(&s, tau).to_eigen_coordinates();
        for (k, ((p0, m0), (p1, m1))) in c0.iter().zip(&c1).enumerate() {
            let mu = lambda_unchecked(k + 1).sqrt();
            let phase = Complex::new(0.0, mu * tau).exp();
            assert!((p1 - p0 * phase).norm() < 1e-14);
            assert!((m1 - m0 * phase.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn damping_examples() {
        let s = spread(3);
        let zero = CouplingVector::from_b(vec![0.0; 3]);
        assert_eq!(damping_substep(&s, &zero, 1.0), s);

        let b = CouplingVector::from_b(vec![0.3, -0.2, 0.1]);
        let q = b.norm_squared();
        let on_b = ModalState::new(vec![0.5; 3], b.b().to_vec()).unwrap();
        let d = damping_substep(&on_b, &b, 0.7);
        for (w, bk) in d.w.iter().zip(b.b()) {
            assert!((w - (-q * 0.7f64).exp() * bk).abs() < 1e-16);
        }
        assert_eq!(d.zeta, on_b.zeta);

        let perp = ModalState::new(vec![0.0; 3], vec![0.2, 0.3, 0.0]).unwrap();
        let d = damping_substep(&perp, &b, 5.0);
        assert!(max_diff(&d, &perp) < 1e-17);
        assert!(damping_substep(&s, &b, 2.0).x_norm() <= s.x_norm());
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(4, 1.0).validate().is_ok());
        assert!(SimConfig::new(4, 1.0).with_dt(0.0).validate().is_err());
        assert!(SimConfig::new(4, 1e-4).with_dt(1e-3).validate().is_err());
        assert!(SimConfig::new(4, 1.0).with_sample_every(0).validate().is_err());
        let rk = SimConfig::new(100, 1.0)
            .with_dt(0.1)
            .with_integrator(Integrator::Rk4Crosscheck);
        assert!(matches!(rk.validate(), Err(Error::Config(_))));
        assert!((default_dt(32) - 0.01).abs() < 1e-18);
        assert!((default_dt(200) - 0.1 / lambda_unchecked(200).sqrt()).abs() < 1e-18);
        let c = SimConfig::new(2, 1.0).with_dt(0.3);
        assert_eq!(c.steps(), 4);
        assert!((c.dt_effective() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn zero_state_stays_zero() {
        let h = WavemakerProfile::linear();
        let run = simulate_closed(&ModalState::zeros(6), &h, &SimConfig::new(6, 5.0)).unwrap();
        assert!(run.series.x_norm.iter().all(|&x| x == 0.0));
        assert!(run.series.u.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn single_damped_oscillator_rate() {
        let h = WavemakerProfile::linear();
        let b1 = coupling_vector(&h, 1).unwrap().b()[0];
        let cfg = SimConfig::new(1, 2000.0).with_dt(0.01).with_sample_every(100);
        let run = simulate_closed(&ModalState::single_mode(1, 1, 1.0, 0.0), &h, &cfg).unwrap();
        let e = &run.series.energy;
        let rate = -(e[e.len() - 1] / e[0]).ln() / 2000.0;
        assert!(
            ((rate - b1 * b1) / (b1 * b1)).abs() < 1e-3,
            "rate {rate} vs {}",
            b1 * b1
        );
    }

    #[test]
    fn resonant_growth() {
        let h = WavemakerProfile::linear();
        let b1 = coupling_vector(&h, 1).unwrap().b()[0];
        let mu1 = lambda_unchecked(1).sqrt();
        let cfg = SimConfig::new(1, 400.0)
            .with_dt(0.005)
            .with_feedback(Feedback::None)
            .with_sample_every(200);
        let u = InputSignal::sinusoid(1.0, mu1, 0.0);
        let run = simulate_open(&ModalState::zeros(1), &h, &u, &cfg).unwrap();
        // x^2 = (b^2/4) (t^2 + sin^2(mu t)/lambda + t sin(2 mu t)/mu)
        for (t, e) in run.series.t.iter().zip(&run.series.energy).skip(1) {
            let (s, l) = ((mu1 * t).sin(), mu1 * mu1);
            let exact = 0.25 * b1 * b1 * (t * t + s * s / l + t * (2.0 * mu1 * t).sin() / mu1);
            assert!(((e - exact) / exact).abs() < 1e-4, "t = {t}: {e} vs {exact}");
        }
        let last = run.series.len() - 1;
        let slope = run.series.x_norm[last] / run.series.t[last];
        assert!((slope - b1.abs() / 2.0).abs() < 5e-3 * b1.abs(), "slope {slope}");
    }

    #[test]
    fn open_and_closed_require_matching_feedback() {
        let h = WavemakerProfile::linear();
        let s = ModalState::zeros(2);
        let cfg = SimConfig::new(2, 1.0);
        assert!(simulate_open(&s, &h, &InputSignal::zero(), &cfg).is_err());
        assert!(simulate_closed(&s, &h, &cfg.with_feedback(Feedback::None)).is_err());
        assert!(simulate_closed(&ModalState::zeros(3), &h, &cfg).is_err());
    }

    #[test]
    fn sampling_does_not_change_the_trajectory() {
        let h = WavemakerProfile::linear();
        let s = spread(4);
        let a = simulate_closed(&s, &h, &SimConfig::new(4, 3.0).with_dt(0.01)).unwrap();
        let b = simulate_closed(&s, &h, &SimConfig::new(4, 3.0).with_dt(0.01).with_sample_every(30)).unwrap();
        assert_eq!(b.series.len(), 11);
        assert!(max_diff(&a.final_state, &b.final_state) < 1e-13);
    }
}

//! Eigenstructure of the Dirichlet-to-Neumann operator and of the wave
//! generator built on it.
//!
//! The surface operator is diagonal in the cosine basis with eigenvalues
//! `lambda_k = k tanh k`. The first-order generator has purely imaginary
//! eigenvalues `i mu_k`, `mu_k = sqrt(lambda_k)`, extended to negative indices
//! by `mu_{-k} = -mu_k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;

/// One spectral index with its eigenvalue and frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub k: u64,
    pub lambda: f64,
    pub mu: f64,
}

impl Mode {
    pub fn new(k: i64) -> Result<Self> {
        let lambda = lambda(k)?;
        Ok(Self {
            k: k as u64,
            lambda,
            mu: lambda.sqrt(),
        })
    }
}

/// Number of retained modes `k = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpectralTruncation {
    n_modes: usize,
}

impl SpectralTruncation {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::domain("truncation must retain at least one mode"));
        }
        Ok(Self { n_modes })
    }

    pub fn n_modes(self) -> usize {
        self.n_modes
    }

    pub fn modes(self) -> impl Iterator<Item = Mode> {
        (1..=self.n_modes as i64).map(|k| Mode::new(k).expect("positive index"))
    }

    pub fn lambdas(self) -> Vec<f64> {
        (1..=self.n_modes).map(lambda_unchecked).collect()
    }

    pub fn mus(self) -> Vec<f64> {
        (1..=self.n_modes).map(|k| lambda_unchecked(k).sqrt()).collect()
    }
}

pub(crate) fn lambda_unchecked(k: usize) -> f64 {
    let kf = k as f64;
    kf * kf.tanh()
}

/// Eigenvalue `k tanh k` of the Dirichlet-to-Neumann operator.
pub fn lambda(k: i64) -> Result<f64> {
    if k < 1 {
        return Err(Error::domain(format!("eigenvalues are indexed by k >= 1, got k = {k}")));
    }
    Ok(lambda_unchecked(k as usize))
}

/// Frequency of mode `k`, odd in `k`.
pub fn mu(k: i64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("frequencies are indexed by nonzero k"));
    }
    let m = lambda_unchecked(k.unsigned_abs() as usize).sqrt();
    Ok(if k < 0 { -m } else { m })
}

/// `lambda_{k+1} - lambda_k`, without cancellation:
/// `tanh(k+1) + k sinh(1) / (cosh k cosh(k+1))`.
fn lambda_step(k: usize) -> f64 {
    let kf = k as f64;
    (kf + 1.0).tanh() + kf * 1f64.sinh() / kf.cosh() / (kf + 1.0).cosh()
}

/// Gap products `mu_k (mu_{k+1} - mu_k)` for `k = 1..kmax-1`.
pub fn gap_products(kmax: usize) -> Result<Vec<f64>> {
    if kmax < 2 {
        return Err(Error::domain(format!("gap products need kmax >= 2, got {kmax}")));
    }
    Ok((1..kmax)
        .map(|k| {
            let mk = lambda_unchecked(k).sqrt();
            let mk1 = lambda_unchecked(k + 1).sqrt();
            mk * lambda_step(k) / (mk + mk1)
        })
        .collect())
}

/// Outcome of a wave-package lookup at frequency `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavePackageResult {
    pub center_s: f64,
    pub width_delta: f64,
    /// Signed mode index whose frequency lies within the window, if any.
    pub member: Option<i64>,
}

/// Table of positive frequencies `mu_1 < mu_2 < ...` used for fast lookups.
#[derive(Debug, Clone)]
pub struct Spectrum {
    mus: Vec<f64>,
}

impl Spectrum {
    /// Table long enough to contain every frequency up to `reach` plus one
    /// extra mode above it.
    pub fn covering(reach: f64) -> Self {
        let mut mus = Vec::new();
        let mut k = 1;
        loop {
            let m = lambda_unchecked(k).sqrt();
            mus.push(m);
            if m > reach {
                break;
            }
            k += 1;
        }
        Self { mus }
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    fn reach(&self) -> f64 {
        *self.mus.last().expect("non-empty table")
    }

    /// Positive indices `k` with `|mu_k - x| < delta`.
    fn positive_members(&self, x: f64, delta: f64, out: &mut Vec<i64>, sign: i64) {
        if x + delta <= 0.0 {
            return;
        }
        let start = self.mus.partition_point(|&m| m <= x - delta);
        for (i, &m) in self.mus.iter().enumerate().skip(start) {
            if m >= x + delta {
                break;
            }
            if (m - x).abs() < delta {
                out.push(sign * (i as i64 + 1));
            }
        }
    }

    /// All signed indices with `|mu_k - s| < delta`, in increasing order.
    pub fn members(&self, s: f64, delta: f64) -> Vec<i64> {
        debug_assert!(s.abs() + delta < self.reach());
        let mut out = Vec::new();
        self.positive_members(-s, delta, &mut out, -1);
        out.reverse();
        self.positive_members(s, delta, &mut out, 1);
        out
    }

    pub fn wave_package(&self, s: f64, eps: f64) -> Result<WavePackageResult> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("wave-package width needs eps > 0, got {eps}")));
        }
        let delta = eps / (s.abs() + 1.0);
        if s.abs() + delta >= self.reach() {
            return Spectrum::covering(s.abs() + delta).wave_package(s, eps);
        }
        let members = self.members(s, delta);
        match members.as_slice() {
            [] => Ok(WavePackageResult {
                center_s: s,
                width_delta: delta,
                member: None,
            }),
            [k] => Ok(WavePackageResult {
                center_s: s,
                width_delta: delta,
                member: Some(*k),
            }),
            _ => Err(Error::GapViolation {
                center: s,
                width: delta,
                indices: members,
            }),
        }
    }
}

/// Wave package of frequency `s` and width `eps / (|s| + 1)`.
pub fn wave_package(s: f64, eps: f64) -> Result<WavePackageResult> {
    let delta = if eps > 0.0 { eps / (s.abs() + 1.0) } else { 0.0 };
    Spectrum::covering(s.abs() + delta).wave_package(s, eps)
}

/// Separation constant found by [`gap_certificate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapCertificate {
    pub kmax: usize,
    pub eps0: f64,
    pub grid_step: f64,
    pub resolution: f64,
    pub grid_points: usize,
}

/// Largest `eps` (to within `resolution`) for which no grid point of
/// `[-mu_kmax - 1, mu_kmax + 1]` sees two frequencies inside its wave package.
pub fn gap_certificate(kmax: usize, grid_step: f64, resolution: f64) -> Result<GapCertificate> {
    gap_certificate_with(kmax, grid_step, resolution, Execution::default())
}

pub fn gap_certificate_with(kmax: usize, grid_step: f64, resolution: f64, exec: Execution) -> Result<GapCertificate> {
    if kmax < 1 || !(grid_step > 0.0) || !(resolution > 0.0) {
        return Err(Error::domain(
            "gap certificate needs kmax >= 1, grid_step > 0, resolution > 0",
        ));
    }
    let smax = lambda_unchecked(kmax).sqrt() + 1.0;
    let n = (2.0 * smax / grid_step).floor() as usize + 1;
    // eps never exceeds 2 during the search, so the window reach is below smax + 2
    let table = Spectrum::covering(smax + 2.0);
    const CHUNK: usize = 4096;
    let chunks = n.div_ceil(CHUNK);
    let passes = |eps: f64| {
        exec.map_range(chunks, |c| {
            (c * CHUNK..((c + 1) * CHUNK).min(n)).all(|i| {
                let s = -smax + i as f64 * grid_step;
                table.members(s, eps / (s.abs() + 1.0)).len() <= 1
            })
        })
        .into_iter()
        .all(|ok| ok)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while passes(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 2.0 {
            return Err(Error::domain("gap certificate search did not bracket a failure"));
        }
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(GapCertificate {
        kmax,
        eps0: lo,
        grid_step,
        resolution,
        grid_points: n,
    })
}

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{lambda_unchecked, SpectralTruncation};

/// Truncated modal coefficients of the state `(zeta, zeta_dot)`.
///
/// `zeta[k-1]` is the surface-elevation coefficient on `phi_k`, `w[k-1]` the
/// matching velocity coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalState {
    pub zeta: Vec<f64>,
    pub w: Vec<f64>,
}

impl ModalState {
    pub fn new(zeta: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let s = Self { zeta, w };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.zeta.len() != self.w.len() {
            return Err(Error::Input(format!(
                "state has {} zeta and {} w coefficients",
                self.zeta.len(),
                self.w.len()
            )));
        }
        if self.zeta.is_empty() {
            return Err(Error::Input("state has no modes".into()));
        }
        if self.zeta.iter().chain(&self.w).any(|v| !v.is_finite()) {
            return Err(Error::Input("state contains non-finite coefficients".into()));
        }
        Ok(())
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            zeta: vec![0.0; n],
            w: vec![0.0; n],
        }
    }

    /// State carried by mode `k` alone.
    pub fn single_mode(n: usize, k: usize, zeta_k: f64, w_k: f64) -> Self {
        assert!(k >= 1 && k <= n, "mode {k} outside 1..={n}");
        let mut s = Self::zeros(n);
        s.zeta[k - 1] = zeta_k;
        s.w[k - 1] = w_k;
        s
    }

    pub fn n_modes(&self) -> usize {
        self.zeta.len()
    }

    pub fn truncation(&self) -> SpectralTruncation {
        SpectralTruncation::new(self.n_modes()).expect("validated state is non-empty")
    }

    /// `lambda_k zeta_k^2 + w_k^2` for each mode.
    pub fn mode_energies(&self) -> Vec<f64> {
        self.zeta
            .iter()
            .zip(&self.w)
            .enumerate()
            .map(|(i, (z, w))| lambda_unchecked(i + 1) * z * z + w * w)
            .collect()
    }

    /// Energy norm `sqrt(sum lambda_k zeta_k^2 + sum w_k^2)`.
    pub fn x_norm(&self) -> f64 {
        self.mode_energies().iter().sum::<f64>().sqrt()
    }

    /// Graph norm of the generator: `x_norm^2 + sum (lambda_k w_k^2 + lambda_k^2 zeta_k^2)`.
    pub fn domain_norm(&self) -> f64 {
        let extra: f64 = self
            .zeta
            .iter()
            .zip(&self.w)
            .enumerate()
            .map(|(i, (z, w))| {
                let l = lambda_unchecked(i + 1);
                l * w * w + l * l * z * z
            })
            .sum();
        (self.x_norm().powi(2) + extra).sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        self.zeta.iter_mut().chain(self.w.iter_mut()).for_each(|v| *v *= factor);
    }

    /// Coefficients on the orthonormal eigenvectors of the wave generator.
    ///
    /// Returns `(c_k, c_{-k})` per mode with
    /// `c_{+-k} = (i mu_k zeta_k +- w_k) / sqrt 2`, so that
    /// `z = sum_{k != 0} c_k phi_k` and `|z|_X^2 = sum |c_k|^2`.
    pub fn to_eigen_coordinates(&self) -> Vec<(Complex<f64>, Complex<f64>)> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        self.zeta
            .iter()
            .zip(&self.w)
            .enumerate()
            .map(|(i, (&z, &w))| {
                let mu = lambda_unchecked(i + 1).sqrt();
                (Complex::new(w * r, mu * z * r), Complex::new(-w * r, mu * z * r))
            })
            .collect()
    }

    /// Inverse of [`ModalState::to_eigen_coordinates`]. Imaginary residue of
    /// non-conjugate-symmetric input is dropped.
    pub fn from_eigen_coordinates(c: &[(Complex<f64>, Complex<f64>)]) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (zeta, w) = c
            .iter()
            .enumerate()
            .map(|(i, (cp, cm))| {
                let mu = lambda_unchecked(i + 1).sqrt();
                let sum = cp + cm;
                let diff = cp - cm;
                (sum.im * r / mu, diff.re * r)
            })
            .unzip();
        Self { zeta, w }
    }
}

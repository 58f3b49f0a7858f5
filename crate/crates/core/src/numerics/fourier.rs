//! Discrete Fourier transform pair and Fourier spectral differentiation.
//!
//! Convention: `dft(v)_m = Σ_j v_j e^{-2πi jm/n}` (unnormalized) and
//! `idft(V)_j = (1/n) Σ_m V_m e^{+2πi jm/n}`, so `idft(dft(v)) = v` and
//! `Σ|v_j|² = (1/n) Σ|V_m|²`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numerics::eigen::SquareMatrix;

/// Forward transform (no normalization).
pub fn dft(values: &[Complex64]) -> Result<Vec<Complex64>> {
    check_even(values.len())?;
    let mut out = values.to_vec();
    FftPlanner::new().plan_fft_forward(out.len()).process(&mut out);
    Ok(out)
}

/// Inverse transform, normalized by `1/n`.
pub fn idft(values: &[Complex64]) -> Result<Vec<Complex64>> {
    check_even(values.len())?;
    let mut out = values.to_vec();
    FftPlanner::new().plan_fft_inverse(out.len()).process(&mut out);
    let s = 1.0 / out.len() as f64;
    out.iter_mut().for_each(|z| *z *= s);
    Ok(out)
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Usage(format!("DFT length must be even and positive, got {n}")));
    }
    Ok(())
}

/// Signed integer mode index of FFT bin `m` (`n/2` maps to `+n/2`).
pub fn mode_index(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Planned transforms plus angular wavenumbers for one periodic grid.
#[derive(Clone)]
pub struct SpectralOps {
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `κ_m = 2π m / period` in FFT order; the Nyquist bin carries `+n/2`.
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for SpectralOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOps").field("n", &self.n).field("period", &self.period).finish()
    }
}

impl SpectralOps {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        check_even(n)?;
        let mut planner = FftPlanner::new();
        let scale = 2.0 * PI / period;
        Ok(Self {
            n,
            period,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            wavenumbers: (0..n).map(|m| scale * mode_index(m, n) as f64).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.n / 2
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    pub fn forward(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = v.to_vec();
        self.forward_in_place(&mut out);
        out
    }

    pub fn inverse(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = v.to_vec();
        self.inverse_in_place(&mut out);
        out
    }

    /// `order`-th spectral derivative of complex samples. Odd orders drop the
    /// Nyquist mode so real data stays real.
    pub fn derivative(&self, v: &[Complex64], order: u32) -> Vec<Complex64> {
        let mut hat = self.forward(v);
        let i = Complex64::new(0.0, 1.0);
        for (m, z) in hat.iter_mut().enumerate() {
            if order % 2 == 1 && self.is_nyquist(m) {
                *z = Complex64::new(0.0, 0.0);
            } else {
                *z *= (i * self.wavenumbers[m]).powu(order);
            }
        }
        self.inverse_in_place(&mut hat);
        hat
    }

    pub fn derivative_real(&self, v: &[f64], order: u32) -> Vec<f64> {
        let c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.derivative(&c, order).into_iter().map(|z| z.re).collect()
    }

    /// `Σ_m w(κ_m) |v̂_m|² · (period / n²)`: the grid L² form weighted by `w`.
    pub fn weighted_energy(&self, hat: &[Complex64], weight: impl Fn(f64) -> f64) -> f64 {
        let s = self.period / (self.n as f64 * self.n as f64);
        hat.iter()
            .zip(&self.wavenumbers)
            .map(|(z, &k)| weight(k) * z.norm_sqr())
            .sum::<f64>()
            * s
    }
}

/// Exact first-derivative matrix for trigonometric interpolation on `n`
/// equispaced nodes of a torus with the given period.
pub fn fourier_d1_matrix(n: usize, period: f64) -> SquareMatrix {
    let h = 2.0 * PI / n as f64;
    let scale = 2.0 * PI / period;
    SquareMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            let d = i as i64 - j as i64;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            scale * 0.5 * sign / (0.5 * d as f64 * h).tan()
        }
    })
}

/// Exact second-derivative matrix (symbol `−κ²`, Nyquist included).
pub fn fourier_d2_matrix(n: usize, period: f64) -> SquareMatrix {
    let h = 2.0 * PI / n as f64;
    let scale = (2.0 * PI / period).powi(2);
    SquareMatrix::from_fn(n, |i, j| {
        if i == j {
            scale * (-PI * PI / (3.0 * h * h) - 1.0 / 6.0)
        } else {
            let d = i as i64 - j as i64;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            scale * (-0.5 * sign / (0.5 * d as f64 * h).sin().powi(2))
        }
    })
}

//! Fourier analysis of samples on a uniform grid of the circle.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Fourier coefficients `c_k`, `k = −N/2 … N/2 − 1`, of `N` uniform samples.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleSpectrum {
    coeffs: Vec<Complex64>,
}

impl CircleSpectrum {
    /// Builds a spectrum from coefficients listed for modes `−N/2 … N/2 − 1`.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        CircleSpectrum { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_mode(&self) -> i64 {
        -(self.coeffs.len() as i64 / 2)
    }

    pub fn max_mode(&self) -> i64 {
        self.coeffs.len() as i64 / 2 - 1
    }

    /// `c_k`, or zero outside the computed band.
    pub fn get(&self, k: i64) -> Complex64 {
        if k < self.min_mode() || k > self.max_mode() {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k - self.min_mode()) as usize]
    }

    /// Coefficients in ascending mode order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let lo = self.min_mode();
        self.coeffs.iter().enumerate().map(move |(i, c)| (lo + i as i64, *c))
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::Parameter(format!("circle FFT needs a power-of-two length ≥ 8 (got {n})")));
    }
    Ok(())
}

/// `c_k = (1/N) Σ_j s_j e^{−ik θ_j}` with `θ_j = 2πj/N`.
pub fn circle_fft(samples: &[Complex64]) -> Result<CircleSpectrum> {
    let n = samples.len();
    check_len(n)?;
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let half = n / 2;
    // Reorder from FFT layout (0 … N−1) to (−N/2 … N/2−1).
    let coeffs = (0..n).map(|i| buf[(i + half) % n] * scale).collect();
    Ok(CircleSpectrum { coeffs })
}

/// Inverse of [`circle_fft`]: samples of `Σ c_k e^{ikθ}` on the same grid.
pub fn inverse_circle_fft(spectrum: &CircleSpectrum) -> Result<Vec<Complex64>> {
    let n = spectrum.len();
    check_len(n)?;
    let half = n / 2;
    let mut buf: Vec<Complex64> = (0..n).map(|i| spectrum.coeffs[(i + half) % n]).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    Ok(buf)
}

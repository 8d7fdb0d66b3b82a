//! Causal Savitzky-Golay smoothing and differentiation.

use nalgebra::DMatrix;

/// Filter output; `filtered` is false when the buffer was shorter than the
/// window and the value was passed through.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgOutput {
    pub value: f64,
    pub filtered: bool,
}

/// Least-squares polynomial fit over the last `window` samples, evaluated
/// at the newest one.
#[derive(Clone, Debug, PartialEq)]
pub struct SavitzkyGolay {
    pub window: usize,
    pub order: usize,
    /// Weights for the value, oldest sample first.
    pub value: Vec<f64>,
    /// Weights for the slope per sample.
    pub slope: Vec<f64>,
}

impl SavitzkyGolay {
    pub fn new(window: usize, order: usize) -> Option<Self> {
        if window % 2 == 0 || order == 0 || order >= window {
            return None;
        }
        let v = DMatrix::from_fn(window, order + 1, |k, i| (k as f64 - (window - 1) as f64).powi(i as i32));
        let pinv = (v.transpose() * &v).try_inverse()? * v.transpose();
        Some(Self {
            window,
            order,
            value: pinv.row(0).iter().copied().collect(),
            slope: pinv.row(1).iter().copied().collect(),
        })
    }

    /// Output variance over input variance for white noise.
    pub fn noise_gain(&self) -> f64 {
        self.value.iter().map(|c| c * c).sum()
    }

    fn apply(weights: &[f64], buffer: &[f64]) -> f64 {
        let tail = &buffer[buffer.len() - weights.len()..];
        weights.iter().zip(tail).map(|(c, y)| c * y).sum()
    }

    pub fn smooth(&self, buffer: &[f64]) -> SgOutput {
        match buffer.len() {
            n if n >= self.window => SgOutput { value: Self::apply(&self.value, buffer), filtered: true },
            0 => SgOutput { value: 0.0, filtered: false },
            n => SgOutput { value: buffer[n - 1], filtered: false },
        }
    }

    /// Slope with sample spacing `dt`. Short buffers fall back to a
    /// backward difference (zero for a single sample).
    pub fn derivative(&self, buffer: &[f64], dt: f64) -> SgOutput {
        match buffer.len() {
            n if n >= self.window => SgOutput { value: Self::apply(&self.slope, buffer) / dt, filtered: true },
            n if n >= 2 => SgOutput { value: (buffer[n - 1] - buffer[n - 2]) / dt, filtered: false },
            _ => SgOutput { value: 0.0, filtered: false },
        }
    }
}

/// Smoothed newest value of `buffer`. An invalid window or order passes the
/// newest sample through.
pub fn sg_filter(buffer: &[f64], window: usize, order: usize) -> SgOutput {
    match SavitzkyGolay::new(window, order) {
        Some(f) => f.smooth(buffer),
        None => SgOutput { value: buffer.last().copied().unwrap_or(0.0), filtered: false },
    }
}

/// Derivative at the newest sample of `buffer`, spaced `dt` apart.
pub fn sg_derivative(buffer: &[f64], window: usize, order: usize, dt: f64) -> SgOutput {
    match SavitzkyGolay::new(window, order) {
        Some(f) => f.derivative(buffer, dt),
        None => SgOutput { value: 0.0, filtered: false },
    }
}

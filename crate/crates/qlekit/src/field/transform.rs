//! Real trigonometric transforms via complex FFTs.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// DST-I of length m: y_k = Σ_{j=1}^{m} x_j sin(π j k/(m+1)), k = 1..m.
/// Applying it twice multiplies by (m+1)/2.
pub struct Dst1 {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Dst1 {
    pub fn new(m: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(2 * (m + 1));
        Self { m, fft }
    }

    pub fn apply(&self, x: &mut [f64], buf: &mut Vec<Complex64>) {
        let len = 2 * (self.m + 1);
        buf.clear();
        buf.resize(len, Complex64::new(0.0, 0.0));
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1].re = v;
        }
        self.fft.process(buf);
        for (k, y) in x.iter_mut().enumerate() {
            *y = buf[k + 1].im;
        }
    }
}

/// Cosine synthesis of length n: y_i = Σ_{a=0}^{n−1} c_a cos(π a (i+½)/n).
pub struct Dct3 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex64>,
}

impl Dct3 {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(2 * n);
        let twiddle = (0..n)
            .map(|a| Complex64::from_polar(1.0, std::f64::consts::PI * a as f64 / (2.0 * n as f64)))
            .collect();
        Self { n, fft, twiddle }
    }

    pub fn apply(&self, x: &mut [f64], buf: &mut Vec<Complex64>) {
        buf.clear();
        buf.resize(2 * self.n, Complex64::new(0.0, 0.0));
        for a in 0..self.n {
            buf[a] = self.twiddle[a] * x[a];
        }
        self.fft.process(buf);
        for (i, y) in x.iter_mut().enumerate() {
            *y = buf[i].re;
        }
    }
}

/// Applies a 1-D transform along both axes of a square row-major array.
pub fn apply_2d(values: &mut [f64], n: usize, f: impl Fn(&mut [f64], &mut Vec<Complex64>)) {
    let mut buf = Vec::new();
    for row in values.chunks_mut(n) {
        f(row, &mut buf);
    }
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = values[i * n + j];
        }
        f(&mut col, &mut buf);
        for i in 0..n {
            values[i * n + j] = col[i];
        }
    }
}

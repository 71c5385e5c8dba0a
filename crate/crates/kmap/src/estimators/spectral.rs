//! Normalized spectral entropy of a byte signal.
//!
//! Bytes are taken as real samples, mean-removed, zero-padded to the next
//! power of two, and pushed through an FFT. The entropy of the normalized
//! power spectrum over the positive-frequency bins, divided by its maximum
//! log2(M), lands in [0,1]: a pure tone scores near 0, white noise near 1.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// Normalized spectral entropy of `data` in [0,1]. Zero for inputs whose
/// mean-removed spectrum is empty or has a single usable bin.
pub fn spectral_entropy(data: &[u8]) -> f64 {
    let len = data.len();
    if len == 0 {
        return 0.0;
    }
    let mean = data.iter().map(|&b| f64::from(b)).sum::<f64>() / len as f64;
    let n = len.next_power_of_two();
    let m = n / 2;
    if m < 2 {
        return 0.0;
    }
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(n);
    buf.extend(data.iter().map(|&b| Complex::new(f64::from(b) - mean, 0.0)));
    buf.resize(n, Complex::new(0.0, 0.0));
    plan(n).process(&mut buf);

    let mut total = 0.0;
    for c in &buf[1..=m] {
        total += c.norm_sqr();
    }
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in &buf[1..=m] {
        let p = c.norm_sqr() / total;
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    (h / (m as f64).log2()).clamp(0.0, 1.0)
}

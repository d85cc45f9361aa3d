//! Linear convolution with a fixed kernel, FFT-backed for large sizes.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Computes `c[m] = Σ_q kernel[m - q] · signal[q]` for `m` in a fixed output
/// range, for signals of a fixed maximum length.
#[derive(Clone)]
pub struct Convolver {
    kernel: Vec<f64>,
    signal_len: usize,
    out_lo: usize,
    out_hi: usize,
    fft: Option<FftPlan>,
}

#[derive(Clone)]
struct FftPlan {
    size: usize,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver")
            .field("kernel_len", &self.kernel.len())
            .field("signal_len", &self.signal_len)
            .field("out", &(self.out_lo..self.out_hi))
            .field("fft", &self.fft.as_ref().map(|p| p.size))
            .finish()
    }
}

// below this many multiply-adds the direct sum wins
const DIRECT_LIMIT: usize = 1 << 15;

impl Convolver {
    pub fn new(kernel: Vec<f64>, signal_len: usize, out: std::ops::Range<usize>) -> Self {
        let work = (out.end - out.start).saturating_mul(signal_len.min(kernel.len()));
        let fft = if work > DIRECT_LIMIT {
            let size = (kernel.len() + signal_len).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut kernel_hat: Vec<Complex64> = kernel.iter().map(|&k| Complex64::new(k, 0.0)).collect();
            kernel_hat.resize(size, Complex64::new(0.0, 0.0));
            forward.process(&mut kernel_hat);
            Some(FftPlan { size, kernel_hat, forward, inverse })
        } else {
            None
        };
        Self {
            kernel,
            signal_len,
            out_lo: out.start,
            out_hi: out.end,
            fft,
        }
    }

    pub fn output_len(&self) -> usize {
        self.out_hi - self.out_lo
    }

    pub fn apply(&self, signal: &[f64]) -> Vec<f64> {
        assert!(signal.len() <= self.signal_len, "signal longer than planned");
        match &self.fft {
            Some(plan) => self.apply_fft(plan, signal),
            None => self.apply_direct(signal),
        }
    }

    fn apply_direct(&self, signal: &[f64]) -> Vec<f64> {
        (self.out_lo..self.out_hi)
            .map(|m| {
                let q_lo = (m + 1).saturating_sub(self.kernel.len());
                let q_hi = signal.len().min(m + 1);
                (q_lo..q_hi).map(|q| self.kernel[m - q] * signal[q]).sum()
            })
            .collect()
    }

    fn apply_fft(&self, plan: &FftPlan, signal: &[f64]) -> Vec<f64> {
        // an all-zero kernel must give exact zeros
        if plan.kernel_hat.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            return vec![0.0; self.output_len()];
        }
        let mut buf: Vec<Complex64> = signal.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        buf.resize(plan.size, Complex64::new(0.0, 0.0));
        plan.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&plan.kernel_hat) {
            *b *= k;
        }
        plan.inverse.process(&mut buf);
        let scale = 1.0 / plan.size as f64;
        buf[self.out_lo..self.out_hi].iter().map(|c| c.re * scale).collect()
    }
}

//! Two-dimensional FFT helpers on a square torus.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct TorusFft {
    side: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TorusFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusFft").field("side", &self.side).finish()
    }
}

impl TorusFft {
    pub fn new(side: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(side);
        Self { side, fft }
    }

    /// Full forward transform in place (row-major `side x side`).
    pub fn forward(&self, buf: &mut [Complex64]) {
        let m = self.side;
        assert_eq!(buf.len(), m * m);
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(buf, &mut scratch);
        let mut column = vec![Complex64::default(); m];
        for j in 0..m {
            for i in 0..m {
                column[i] = buf[i * m + j];
            }
            self.fft.process_with_scratch(&mut column, &mut scratch);
            for i in 0..m {
                buf[i * m + j] = column[i];
            }
        }
    }

    /// Forward transform that only materializes the leading `n x n` block.
    ///
    /// Returns the real and imaginary parts of that block, row-major.
    pub fn forward_block(&self, buf: &mut [Complex64], n: usize) -> (Vec<f64>, Vec<f64>) {
        let m = self.side;
        assert!(n <= m && buf.len() == m * m);
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(buf, &mut scratch);
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        let mut column = vec![Complex64::default(); m];
        for j in 0..n {
            for i in 0..m {
                column[i] = buf[i * m + j];
            }
            self.fft.process_with_scratch(&mut column, &mut scratch);
            for i in 0..n {
                re[i * n + j] = column[i].re;
                im[i * n + j] = column[i].im;
            }
        }
        (re, im)
    }
}

//! Two-dimensional complex FFTs on square row-major buffers.
//!
//! Plans are cached per `(n, direction)` behind a mutex and shared as
//! `Arc<dyn Fft>`; each call allocates its own scratch, so concurrent
//! transforms from many workers never share mutable state.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<PlanCache> = OnceLock::new();
    let forward = matches!(direction, FftDirection::Forward);
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

fn transpose(n: usize, data: &mut [Complex64]) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn transform(n: usize, data: &mut [Complex64], direction: FftDirection) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    transpose(n, data);
    fft.process_with_scratch(data, &mut scratch);
    transpose(n, data);
}

/// Physical values to Fourier-series coefficients: `c(k) = n^-2 sum_x f(x) e^{-i k x}`.
pub(crate) fn forward(n: usize, data: &mut [Complex64]) {
    transform(n, data, FftDirection::Forward);
    let scale = 1.0 / (n * n) as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

/// Fourier-series coefficients to physical values: `f(x) = sum_k c(k) e^{i k x}`.
pub(crate) fn inverse(n: usize, data: &mut [Complex64]) {
    transform(n, data, FftDirection::Inverse);
}

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::tensor::{strides_of, Tensor};

/// In-place n-dimensional DFT over a row-major buffer. The inverse is unnormalised.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let strides = strides_of(shape);
    let total: usize = shape.iter().product();
    for (axis, &n) in shape.iter().enumerate() {
        if n == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let stride = strides[axis];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        // Every line start is a flat index whose coordinate along `axis` is zero.
        for start in 0..total {
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[start + k * stride];
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                data[start + k * stride] = *v;
            }
        }
    }
}

/// Zero-pad (or keep) a tensor into a complex buffer of `shape`.
pub(crate) fn to_complex_padded(t: &Tensor, shape: &[usize]) -> Vec<Complex64> {
    let total: usize = shape.iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    let strides = strides_of(shape);
    for k in 0..t.len() {
        let flat: usize = t.unravel(k).iter().zip(&strides).map(|(i, s)| i * s).sum();
        out[flat] = Complex64::new(t.get_f64(k), 0.0);
    }
    out
}

/// Magnitudes of the DFT at the tensor's native size.
pub fn dft_magnitudes(a: &Tensor) -> Tensor {
    let mut buf = to_complex_padded(a, a.shape());
    fft_nd(&mut buf, a.shape(), false);
    Tensor::from_reals(a.shape(), buf.iter().map(|z| z.norm()).collect()).expect("shape already validated")
}

/// Circular auto-correlation at native size, zero shift at flat index 0.
pub fn periodic_autocorrelation(a: &Tensor) -> Tensor {
    let mut buf = to_complex_padded(a, a.shape());
    fft_nd(&mut buf, a.shape(), false);
    for z in buf.iter_mut() {
        *z = Complex64::new(z.norm_sqr(), 0.0);
    }
    fft_nd(&mut buf, a.shape(), true);
    let n = a.len() as f64;
    Tensor::from_reals(a.shape(), buf.iter().map(|z| z.re / n).collect()).expect("shape already validated")
}

//! Dense integer/real tensors and the aperiodic correlation engine.
//!
//! Correlation follows `C(s) = sum_r a(r) b(r + s)`. The output has extent
//! `Na + Nb - 1` per axis and zero shift sits at index `Na - 1`.

mod correlate;
mod fft;
pub mod io;
mod tensor;

pub use correlate::{
    convolve, convolve_with, correlate, correlate_with, correlation_values, flip, outer_product, support_edge_shifts,
    Backend, CorrelationResult, FFT_MIN_EXTENT,
};
pub use fft::{dft_magnitudes, fft_nd, periodic_autocorrelation};
pub use tensor::{Elements, Scalar, Tensor};

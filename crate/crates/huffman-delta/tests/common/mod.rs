//! Seeded property suites shared by the property tests and the acceptance runner.

#![allow(dead_code)]

use huffman_delta::construct::{fibonacci_huffman, generalized_fibonacci};
use huffman_delta::lattice::{correlate, correlate_with, fft_nd, flip, Backend, Scalar};
use huffman_delta::metrics::{classify, Classification, QualityReport};
use huffman_delta::project::{project, ProjectionDirection};
use huffman_delta::Tensor;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const CASES: u32 = 500;

pub fn runner(seed: u8) -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// Integer tensors of rank 1 or 2 with extents up to `max` and small signed values.
pub fn int_tensor(max: usize) -> impl Strategy<Value = Tensor> {
    (1usize..=2)
        .prop_flat_map(move |nd| prop::collection::vec(1usize..=max, nd))
        .prop_flat_map(|shape| {
            let n: usize = shape.iter().product();
            (Just(shape), prop::collection::vec(-20i64..=20, n))
        })
        .prop_map(|(shape, v)| Tensor::from_ints(&shape, &v).expect("consistent shape"))
}

fn matrix(max: usize) -> impl Strategy<Value = Tensor> {
    (1usize..=max, 1usize..=max)
        .prop_flat_map(|(r, c)| (Just([r, c]), prop::collection::vec(-9i64..=9, r * c)))
        .prop_map(|(shape, v)| Tensor::from_ints(&shape, &v).expect("consistent shape"))
}

fn direction() -> impl Strategy<Value = ProjectionDirection> {
    (-3i64..=3, -3i64..=3).prop_filter_map("coprime", |(p, q)| ProjectionDirection::new(p, q).ok())
}

fn report<E: std::fmt::Debug>(name: &str, r: Result<(), E>) -> Result<(), String> {
    r.map_err(|e| format!("{name}: {e:?}"))
}

/// FFT and direct correlation agree, and the padded spectrum's squared magnitude
/// is the transform of the circularly arranged auto-correlation.
pub fn correlation_theorem() -> Result<(), String> {
    let r = runner(1).run(&int_tensor(9), |a| {
        let direct = correlate_with(&a, &a, Backend::Direct).expect("correlate");
        let fft = correlate_with(&a, &a, Backend::Fft).expect("correlate");
        prop_assert_eq!(direct.values.shape(), fft.values.shape());
        for (x, y) in direct.values.to_f64_vec().iter().zip(fft.values.to_f64_vec()) {
            prop_assert!((x - y).abs() <= 1e-9 * direct.peak.to_f64().max(1.0), "{} vs {}", x, y);
        }

        let shape = direct.values.shape().to_vec();
        let total: usize = shape.iter().product();
        let zero = Complex64::new(0.0, 0.0);
        let mut spectrum = vec![zero; total];
        let mut wrapped = vec![zero; total];
        let strides: Vec<usize> = (0..shape.len()).map(|k| shape[k + 1..].iter().product()).collect();
        for k in 0..a.len() {
            let flat: usize = a.unravel(k).iter().zip(&strides).map(|(i, s)| i * s).sum();
            spectrum[flat] = Complex64::new(a.get_f64(k), 0.0);
        }
        for k in 0..total {
            let shift = direct.shift_of(k);
            let flat: usize = shift
                .iter()
                .zip(&shape)
                .zip(&strides)
                .map(|((&s, &n), st)| (s.rem_euclid(n as isize) as usize) * st)
                .sum();
            wrapped[flat] = Complex64::new(direct.values.get_f64(k), 0.0);
        }
        fft_nd(&mut spectrum, &shape, false);
        fft_nd(&mut wrapped, &shape, false);
        let scale = direct.peak.to_f64().max(1.0) * total as f64;
        for (s, w) in spectrum.iter().zip(&wrapped) {
            prop_assert!(
                (s.norm_sqr() - w.re).abs() <= 1e-9 * scale,
                "{} vs {}",
                s.norm_sqr(),
                w.re
            );
            prop_assert!(w.im.abs() <= 1e-9 * scale);
        }
        Ok(())
    });
    report("correlation theorem", r)
}

/// Projecting the auto-correlation equals auto-correlating the projection.
pub fn projection_commutes() -> Result<(), String> {
    let r = runner(2).run(&(matrix(8), direction()), |(a, d)| {
        let c = correlate(&a, &a).expect("correlate").values;
        let lhs = project(&c, d).expect("project");
        let pa = project(&a, d).expect("project");
        let rhs = correlate(&pa, &pa).expect("correlate").values;
        prop_assert_eq!(lhs, rhs, "direction {}", d);
        Ok(())
    });
    report("projection commutation", r)
}

/// `u_i u_j - u_k u_l = (-1)^r (u_{i-r} u_{j-r} - u_{k-r} u_{l-r})` when `i + j = k + l`.
pub fn bilinear_identity() -> Result<(), String> {
    let strategy = (
        prop::sample::select(vec![2i64, 4, 6]),
        -12i64..=12,
        -12i64..=12,
        -12i64..=12,
        -12i64..=12,
    );
    let r = runner(3).run(&strategy, |(b, i, j, k, r)| {
        let l = i + j - k;
        prop_assume!(l.abs() <= 12);
        let u = |n: i64| generalized_fibonacci(b, n).expect("in range");
        let lhs = u(i) * u(j) - u(k) * u(l);
        let sign = if r.rem_euclid(2) == 0 { 1 } else { -1 };
        let rhs = sign * (u(i - r) * u(j - r) - u(k - r) * u(l - r));
        prop_assert_eq!(lhs, rhs, "b={} i={} j={} k={} l={} r={}", b, i, j, k, l, r);
        Ok(())
    });
    report("bilinear identity", r)
}

/// Every generated sequence is canonical with `R = C0` and `M = C0^2 / 2`.
pub fn fibonacci_canonical() -> Result<(), String> {
    let strategy = (
        prop::sample::select(vec![7usize, 11, 15, 19, 23, 27]),
        prop::sample::select(vec![2i64, 4, 6]),
    );
    let r = runner(4).run(&strategy, |(len, b)| {
        let h = fibonacci_huffman(len, b).expect("construct");
        let rep = classify(&h).expect("classify");
        let c0 = rep.c0.to_f64();
        prop_assert_eq!(rep.classification, Classification::Canonical, "N={} b={}", len, b);
        prop_assert_eq!(rep.r, c0);
        prop_assert_eq!(rep.m, c0 * c0 / 2.0);
        Ok(())
    });
    report("canonical classification", r)
}

fn same_f64(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn same_report(a: &QualityReport, b: &QualityReport) -> bool {
    let abs = |s: Scalar| s.abs();
    same_f64(a.m, b.m)
        && same_f64(a.r, b.r)
        && same_f64(a.e, b.e)
        && same_f64(a.p, b.p)
        && same_f64(a.s, b.s)
        && a.c0 == b.c0
        && abs(a.c_edge) == abs(b.c_edge)
        && a.op == b.op
        && a.off_peak_max == b.off_peak_max
        && a.bits == b.bits
        && a.classification == b.classification
}

/// Flipping or negating an array leaves every metric unchanged.
pub fn metric_invariance() -> Result<(), String> {
    let r = runner(5).run(&int_tensor(8), |a| {
        let base = classify(&a).expect("classify");
        let flipped = classify(&flip(&a)).expect("classify");
        let negated = classify(&a.negate()).expect("classify");
        prop_assert!(same_report(&base, &flipped), "flip: {:?} vs {:?}", base, flipped);
        prop_assert!(same_report(&base, &negated), "negate: {:?} vs {:?}", base, negated);
        Ok(())
    });
    report("metric invariance", r)
}

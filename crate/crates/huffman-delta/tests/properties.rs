mod common;

use huffman_delta::construct::catalog;
use huffman_delta::imaging::{encode, min_pedestal, pedestal_pair, watermark_embed, watermark_locate};
use huffman_delta::lattice::{convolve, correlate, flip, outer_product};
use huffman_delta::project::{project, twin, ProjectionDirection};
use huffman_delta::Tensor;
use proptest::prelude::*;

#[test]
fn correlation_theorem() {
    common::correlation_theorem().unwrap();
}

#[test]
fn projection_commutes_with_correlation() {
    common::projection_commutes().unwrap();
}

#[test]
fn bilinear_fibonacci_identity() {
    common::bilinear_identity().unwrap();
}

#[test]
fn generated_sequences_are_canonical() {
    common::fibonacci_canonical().unwrap();
}

#[test]
fn metrics_ignore_flip_and_negation() {
    common::metric_invariance().unwrap();
}

fn small_matrix() -> impl Strategy<Value = Tensor> {
    (1usize..=6, 1usize..=6)
        .prop_flat_map(|(r, c)| (Just([r, c]), prop::collection::vec(-9i64..=9, r * c)))
        .prop_map(|(s, v)| Tensor::from_ints(&s, &v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn twin_is_an_involution(a in common::int_tensor(8)) {
        prop_assert_eq!(twin(&twin(&a)), a.clone());
        let (c, t) = (correlate(&a, &a).unwrap(), correlate(&twin(&a), &twin(&a)).unwrap());
        let mags = |v: &Tensor| v.to_f64_vec().iter().map(|x| x.abs()).collect::<Vec<_>>();
        prop_assert_eq!(mags(&c.values), mags(&t.values));
    }

    #[test]
    fn projection_preserves_sum_and_length(a in small_matrix(), p in -3i64..=3, q in -3i64..=3) {
        prop_assume!(ProjectionDirection::new(p, q).is_ok());
        let d = ProjectionDirection::new(p, q).unwrap();
        let out = project(&a, d).unwrap();
        prop_assert_eq!(out.sum().unwrap(), a.sum().unwrap());
        let (rows, cols) = (a.shape()[0] as i64, a.shape()[1] as i64);
        prop_assert_eq!(out.len() as i64, q.abs() * (cols - 1) + p.abs() * (rows - 1) + 1);
    }

    #[test]
    fn correlation_is_convolution_with_flip(a in small_matrix(), b in small_matrix()) {
        let c = correlate(&a, &b).unwrap().values;
        prop_assert_eq!(c, convolve(&flip(&a), &b).unwrap());
    }

    #[test]
    fn pedestal_difference_is_exact(o in small_matrix(), extra in 0i64..50) {
        let h9 = catalog("H9").unwrap();
        let h = outer_product(&[h9.clone(), h9]).unwrap();
        let pair = pedestal_pair(&o, &h, min_pedestal(&h) + extra as f64).unwrap();
        prop_assert_eq!(pair.combined, encode(&o, &h).unwrap().scale_int(2).unwrap());
    }

    #[test]
    fn watermark_location_follows_offset(seed in 0u64..1000, r in -11isize..=11, c in -11isize..=11) {
        let h9 = catalog("H9").unwrap();
        let mark = outer_product(&[h9.clone(), h9]).unwrap();
        let host = huffman_delta::imaging::random_image(&[31, 31], 0, 31, seed).unwrap();
        let found = watermark_locate(&watermark_embed(&host, &mark, &[r, c]).unwrap(), &mark).unwrap();
        prop_assert_eq!(found.offset, vec![r, c]);
    }
}

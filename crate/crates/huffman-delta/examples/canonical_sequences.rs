//! Canonical Huffman sequences from the generalized Fibonacci recurrence.

use huffman_delta::construct::{fibonacci_huffman, generalized_fibonacci, h5_family};
use huffman_delta::metrics::classify;
use huffman_delta::{correlate, Result};

fn main() -> Result<()> {
    for b in [2, 4, 6] {
        let terms: Vec<i128> = (0..8).map(|n| generalized_fibonacci(b, n)).collect::<Result<_>>()?;
        println!("b = {b}: {terms:?}");
    }
    let h15 = fibonacci_huffman(15, 2)?;
    println!("H15 = {:?}", h15.to_i64_vec()?);
    let c = correlate(&h15, &h15)?;
    println!("autocorrelation = {:?}", c.values.to_i64_vec()?);
    for len in [7, 11, 15, 19, 23, 27] {
        let r = classify(&fibonacci_huffman(len, 2)?)?;
        println!(
            "N = {len:2}  C0 = {:>10}  R = {:>10}  class = {}",
            r.c0, r.r, r.classification
        );
    }
    for n in 1..=3 {
        println!("H5 family n = {n}: {:?}", h5_family(n)?.to_i64_vec()?);
    }
    Ok(())
}

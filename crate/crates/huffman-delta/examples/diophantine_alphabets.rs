//! Alphabets that make the 5x5 and 7x7 diamond templates quasi-Huffman.

use huffman_delta::construct::{build_diamond, diamond5_solve, diamond7_closed_form, diamond7_solve, DEFAULT_BOUND};
use huffman_delta::metrics::classify;
use huffman_delta::Result;

fn main() -> Result<()> {
    println!("5x5 with [a, b, c] = [0, 1, 4]:");
    for s in diamond5_solve([0, 1, 4], None, DEFAULT_BOUND)? {
        println!("  {:?}  C_edge = {}", s.alphabet, s.c_edge);
    }
    let unique = diamond7_solve(1, (1, 64))?;
    println!(
        "7x7 with e = 1: {:?}",
        unique.iter().map(|s| &s.alphabet[5..]).collect::<Vec<_>>()
    );
    for f in [4, 10, 20] {
        let (g, h) = diamond7_closed_form(f).expect("even f");
        let t = build_diamond(7, &[1, 3, f, g, h])?;
        let r = classify(&t)?;
        println!(
            "f = {f:2} g = {g:3} h = {h:4}  R = {:.1}  M = {:.3e}  bits = {}",
            r.r, r.m, r.bits
        );
    }
    Ok(())
}

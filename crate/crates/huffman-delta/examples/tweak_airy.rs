//! Quantise a sampled Airy probe to 7 bits and tweak it one unit at a time.

use huffman_delta::continuum::{discretize_and_tweak, synthesize_probe, Objective, ProbeSpec};
use huffman_delta::Result;

fn main() -> Result<()> {
    let probe = synthesize_probe(&ProbeSpec::airy_1d(64, 1.0))?;
    let out = discretize_and_tweak(&probe, 7, Objective::M, 500)?;
    if let (Some(a), Some(b)) = (&out.initial, &out.report) {
        println!("rounded: M = {:.1} R = {:.1} S = {:.3e}", a.m, a.r, a.s);
        println!(
            "tweaked: M = {:.1} R = {:.1} S = {:.3e} after {} changes",
            b.m, b.r, b.s, out.iterations
        );
    }
    println!("{:?}", out.array.to_i64_vec()?);
    Ok(())
}

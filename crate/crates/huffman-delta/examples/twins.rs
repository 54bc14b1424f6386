//! Alternating-sign twins share auto-correlation metrics and barely cross-correlate.

use huffman_delta::construct::catalog;
use huffman_delta::metrics::{classify, cross_metrics};
use huffman_delta::project::twin;
use huffman_delta::Result;

fn main() -> Result<()> {
    for key in ["H9", "H15", "H8"] {
        let h = catalog(key)?;
        let t = twin(&h);
        let (a, b) = (classify(&h)?, classify(&t)?);
        let x = cross_metrics(&h, &t)?;
        println!("{key}: twin {:?}", t.to_i64_vec()?);
        println!(
            "  R {} / {}  M {} / {}  cross R = {:.3} M = {:.3}",
            a.r, b.r, a.m, b.m, x.r, x.m
        );
    }
    Ok(())
}

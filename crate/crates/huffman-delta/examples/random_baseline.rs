//! How random 5x5 arrangements of distinct integers score.

use huffman_delta::imaging::random_baseline;
use huffman_delta::Result;

fn main() -> Result<()> {
    let pool: Vec<i64> = (-12..=13).collect();
    let s = random_baseline(&[5, 5], &pool, 10_000, 2024)?;
    println!("R min {:.2} mean {:.2} max {:.2}", s.r.min, s.r.mean, s.r.max);
    println!("M min {:.2} mean {:.2} max {:.2}", s.m.min, s.m.mean, s.m.max);
    Ok(())
}

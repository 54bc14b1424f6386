//! Hide a 9x9 mask in random hosts and find it with one cross-correlation.

use huffman_delta::construct::catalog;
use huffman_delta::imaging::{random_image, watermark_embed, watermark_locate};
use huffman_delta::lattice::outer_product;
use huffman_delta::rng::splitmix64;
use huffman_delta::Result;

fn main() -> Result<()> {
    let h9 = catalog("H9")?;
    let mark = outer_product(&[h9.clone(), h9])?;
    let (mut hits, mut false_alarms) = (0, 0);
    for t in 0..100u64 {
        let host = random_image(&[31, 31], 0, 31, splitmix64(t))?;
        let found = watermark_locate(&watermark_embed(&host, &mark, &[5, 5])?, &mark)?;
        hits += (found.offset == [5, 5] && found.detected) as u32;
        false_alarms += watermark_locate(&host, &mark)?.detected as u32;
    }
    println!("located {hits}/100, unmarked hosts over threshold {false_alarms}/100");
    Ok(())
}

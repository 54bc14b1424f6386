//! Two non-negative exposures whose difference is twice the signed blur.

use huffman_delta::construct::catalog;
use huffman_delta::imaging::{encode, min_pedestal, pedestal_pair, random_image};
use huffman_delta::lattice::outer_product;
use huffman_delta::Result;

fn main() -> Result<()> {
    let h9 = catalog("H9")?;
    let mask = outer_product(&[h9.clone(), h9])?;
    let object = random_image(&[16, 16], 0, 255, 1)?;
    let kappa = min_pedestal(&mask);
    let twice = encode(&object, &mask)?.scale_int(2)?;
    for k in [kappa, kappa + 10.0, kappa * 4.0] {
        let pair = pedestal_pair(&object, &mask, k)?;
        println!(
            "kappa = {k:5}: min exposure {} / {}, difference exact = {}",
            pair.plus.min_max().0,
            pair.minus.min_max().0,
            pair.combined == twice
        );
    }
    Ok(())
}

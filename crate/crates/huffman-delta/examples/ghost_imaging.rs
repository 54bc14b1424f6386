//! Scan one pedestal-lifted mask over an object and reconstruct from bucket totals.

use huffman_delta::construct::catalog;
use huffman_delta::imaging::{ghost_image, max_abs_error, random_image, KappaMode};
use huffman_delta::lattice::outer_product;
use huffman_delta::{Result, Tensor};

fn main() -> Result<()> {
    let h9 = catalog("H9")?;
    let mask = outer_product(&[h9.clone(), h9])?;
    let object = Tensor::zeros_int(&[31, 31])?.paste(&random_image(&[21, 21], 0, 31, 3)?, &[5, 5])?;
    let kappa = -mask.min_max().0;
    for mode in [KappaMode::Exact, KappaMode::Boundary] {
        let g = ghost_image(&object, &mask, kappa, None, mode)?;
        println!(
            "{mode:?}: kappa' = {:.1}, max error {:.3}",
            g.kappa_prime,
            max_abs_error(&g.reconstruction, &object)?
        );
    }
    let partial = ghost_image(&object, &mask, kappa, Some((&[8, 8], &[30, 30])), KappaMode::Exact)?;
    println!("partial scan flagged: {}", partial.partial);
    Ok(())
}

//! Raster versus diffuse acquisition at equal per-measurement noise.

use huffman_delta::construct::catalog;
use huffman_delta::imaging::{multiplex_noise_study, random_image};
use huffman_delta::lattice::outer_product;
use huffman_delta::{Result, Tensor};

fn main() -> Result<()> {
    let h9 = catalog("H9")?;
    let mask = outer_product(&[h9.clone(), h9])?;
    let object = random_image(&[31, 31], 0, 31, 11)?;
    for sigma in [0.1, 1.0, 10.0] {
        let r = multiplex_noise_study(&object, &mask, sigma, 200, 5)?;
        println!(
            "sigma {sigma:4}: raster MSE {:.4e}, diffuse MSE {:.4e}, ratio {:.1} (elements {})",
            r.mse_delta, r.mse_diffuse, r.ratio, r.elements
        );
    }
    let delta = multiplex_noise_study(&object, &Tensor::impulse(2), 1.0, 50, 5)?;
    println!("delta mask ratio {:.3}", delta.ratio);
    Ok(())
}

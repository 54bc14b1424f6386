//! Blur a random image with a 9x9 mask, decode, and remove the aliases.

use huffman_delta::construct::catalog;
use huffman_delta::imaging::{deblur, deblur_with, decode, encode, max_abs_error, random_image, DeblurOptions};
use huffman_delta::lattice::{io, outer_product};
use huffman_delta::Result;

fn main() -> Result<()> {
    let h9 = catalog("H9")?;
    let mask = outer_product(&[h9.clone(), h9])?;
    let object = random_image(&[31, 31], 0, 31, 7)?;
    let blurred = encode(&object, &mask)?;
    let o1 = decode(&blurred, &mask)?.scale(1.0 / 4096.0);
    println!("decode only: max error {:.4}", max_abs_error(&o1, &object)?);
    for p in 2..=10 {
        let est = deblur(&blurred, &mask, p)?.estimate;
        println!("p = {p:2}: max error {:.3e}", max_abs_error(&est, &object)?);
    }
    let snapped = deblur_with(
        &blurred,
        &mask,
        2,
        DeblurOptions {
            snap: true,
            ..Default::default()
        },
    )?;
    println!("one step, snapped to integers: exact = {}", snapped.estimate == object);

    let dir = std::env::temp_dir().join("huffman-deblur");
    std::fs::create_dir_all(&dir)?;
    io::write_pgm(&dir.join("blurred.pgm"), &blurred, 255, io::PgmMapping::Stretch)?;
    io::write_pgm(
        &dir.join("recovered.pgm"),
        &snapped.estimate,
        31,
        io::PgmMapping::Direct,
    )?;
    println!("images in {}", dir.display());
    Ok(())
}

//! Spectrally equivalent arrays by discrete projection of outer products.

use huffman_delta::construct::{fibonacci_huffman, tensor_huffman, HuffmanSpec};
use huffman_delta::lattice::outer_product;
use huffman_delta::metrics::classify;
use huffman_delta::project::{
    default_directions, diagonal_metrics, project, project3, spectrally_equivalent_family, ProjectionDirection,
};
use huffman_delta::Result;

fn main() -> Result<()> {
    let h27 = fibonacci_huffman(27, 2)?;
    let square = outer_product(&[h27.clone(), h27.clone()])?;
    let h53 = project(&square, ProjectionDirection::new(1, -1)?)?;
    let r = classify(&h53)?;
    let (r_diag, m_diag) = diagonal_metrics(classify(&h27)?.c0.to_f64());
    println!(
        "(1:-1) length {}  R = {:.4}  predicted {r_diag:.4}  M = {:.4e}  predicted {m_diag:.4e}",
        h53.len(),
        r.r,
        r.m
    );

    for m in spectrally_equivalent_family(&fibonacci_huffman(7, 2)?, &default_directions(3))? {
        println!(
            "{:>5}  length {:2}  R = {:8.3}  class {}",
            m.direction,
            m.array.len(),
            m.report.r,
            m.report.classification
        );
    }

    let seed = HuffmanSpec::FibonacciBinet { len: 7, b: 2 };
    let cube = tensor_huffman(&[seed.clone(), seed.clone(), seed])?;
    let plane = project3(&cube, ProjectionDirection::new3(1, 1, 0)?)?;
    println!(
        "H7 cube along (1:1:0) -> {:?}, R = {:.3}",
        plane.shape(),
        classify(&plane)?.r
    );
    Ok(())
}

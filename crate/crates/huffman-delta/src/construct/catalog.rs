use crate::error::{Error, Result};
use crate::lattice::Tensor;

/// A stored array and a one-line description of what makes it interesting.
pub struct CatalogEntry {
    pub key: &'static str,
    pub note: &'static str,
    pub shape: &'static [usize],
    pub values: &'static [i64],
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        key: "H9",
        note: "quasi-Huffman, off-peak values in {-1,0,1}, C0 = 64",
        shape: &[9],
        values: &[1, 3, 4, 2, -2, -2, 4, -3, 1],
    },
    CatalogEntry {
        key: "H8",
        note: "even-length 3-bit quasi-Huffman",
        shape: &[8],
        values: &[1, 3, 4, 0, -3, 3, -2, 1],
    },
    CatalogEntry {
        key: "H15",
        note: "canonical, Fibonacci alphabet, C0 = 843",
        shape: &[15],
        values: &[1, 2, 2, 4, 6, 10, 16, -3, -16, 10, -6, 4, -2, 2, -1],
    },
    CatalogEntry {
        key: "H8x8",
        note: "hand-tuned outer product of H8, edge correlation 34",
        shape: &[8, 8],
        values: &[
            1, 3, 4, 0, -3, 3, -2, 1, //
            3, 11, 13, 0, -10, 10, -6, 2, //
            4, 13, 15, 0, -12, 12, -7, 3, //
            0, 0, 0, 0, 0, 0, 0, 0, //
            -3, -10, -12, 0, 9, -9, 6, -2, //
            3, 10, 12, 0, -9, 10, -6, 2, //
            -2, -6, -7, 0, 6, -6, 3, -1, //
            1, 2, 3, 0, -2, 2, -1, 1,
        ],
    },
    CatalogEntry {
        key: "H5x5",
        note: "5-bit 5x5 quasi-Huffman, alphabet [0,1,2,4,7,13]",
        shape: &[5, 5],
        values: &[
            0, 1, 2, -1, 0, //
            1, 4, 7, -4, 1, //
            2, 7, 13, -7, 2, //
            -1, -4, -7, 4, -1, //
            0, 1, 2, -1, 0,
        ],
    },
    CatalogEntry {
        key: "H7x7A",
        note: "diffuse 7x7 diamond, alphabet [0,0,1,2,6,7,17,20]",
        shape: &[7, 7],
        values: &[
            0, 0, 1, 2, -1, 0, 0, //
            0, 2, 6, 7, -6, 2, 0, //
            1, 6, 16, 17, -16, 6, -1, //
            2, 7, 17, 20, -17, 7, -2, //
            -1, -6, -16, -17, 16, -6, 1, //
            0, 2, 6, 7, -6, 2, 0, //
            0, 0, -1, -2, 1, 0, 0,
        ],
    },
    CatalogEntry {
        key: "H7x7B",
        note: "compact 7x7 diamond, alphabet [0,0,0,1,3,6,20,36]",
        shape: &[7, 7],
        values: &[
            0, 0, 0, 1, 0, 0, 0, //
            0, 0, 3, 6, -3, 0, 0, //
            0, 3, 12, 20, -12, 3, 0, //
            1, 6, 20, 36, -20, 6, -1, //
            0, -3, -12, -20, 12, -3, 0, //
            0, 0, 3, 6, -3, 0, 0, //
            0, 0, 0, -1, 0, 0, 0,
        ],
    },
];

pub fn catalog_entries() -> &'static [CatalogEntry] {
    ENTRIES
}

/// Stored array by key (`H9`, `H8`, `H15`, `H8x8`, `H5x5`, `H7x7A`, `H7x7B`).
pub fn catalog(key: &str) -> Result<Tensor> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.key.eq_ignore_ascii_case(key))
        .ok_or_else(|| Error::InvalidSpec(format!("unknown catalog key {key:?}")))?;
    Tensor::from_ints(entry.shape, entry.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::flip;

    #[test]
    fn every_entry_loads() {
        for e in catalog_entries() {
            let t = catalog(e.key).unwrap();
            assert_eq!(t.shape(), e.shape);
        }
        assert!(catalog("H10").is_err());
    }

    #[test]
    fn square_entries_are_transpose_symmetric() {
        for key in ["H8x8", "H5x5", "H7x7A", "H7x7B"] {
            let t = catalog(key).unwrap();
            let n = t.shape()[0];
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(t.at(&[i, j]), t.at(&[j, i]), "{key} at {i},{j}");
                }
            }
        }
    }

    #[test]
    fn h15_is_not_centro_symmetric() {
        let h = catalog("H15").unwrap();
        assert_ne!(flip(&h), h);
    }
}

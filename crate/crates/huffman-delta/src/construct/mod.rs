//! Canonical and quasi-Huffman sequences and arrays.

mod catalog;
pub mod diophantine;
mod fibonacci;
mod spec;

pub use catalog::{catalog, catalog_entries, CatalogEntry};
pub use diophantine::{
    build_diamond, diamond5_solve, diamond7_closed_form, diamond7_solve, diamond7_solve_with, solve_quasi,
    AlphabetSolution, Template, DEFAULT_BOUND,
};
pub use fibonacci::{binet, fibonacci_huffman, generalized_fibonacci, h5_family, h5_family_odd};
pub use spec::{tensor_huffman, HuffmanSpec};

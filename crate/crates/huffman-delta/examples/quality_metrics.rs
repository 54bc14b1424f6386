//! Quality reports for the stored arrays, as JSON and as CSV rows.

use huffman_delta::construct::{catalog, catalog_entries};
use huffman_delta::metrics::{classify, QualityReport};
use huffman_delta::Result;

fn main() -> Result<()> {
    println!("key,{}", QualityReport::CSV_HEADER.join(","));
    for entry in catalog_entries() {
        let r = classify(&catalog(entry.key)?)?;
        println!("{},{}", entry.key, r.csv_row().join(","));
    }
    println!("{}", classify(&catalog("H9")?)?.to_json());
    Ok(())
}

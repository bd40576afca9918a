use std::io::Write;

use super::skyline::SymSkylineMatrix;
use crate::error::Result;

/// Writes the lower triangle in Matrix Market `coordinate real symmetric` format.
pub fn write_matrix_market<W: Write>(m: &SymSkylineMatrix, mut out: W) -> Result<()> {
    let entries: Vec<_> = m.lower_entries().collect();
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", m.dim(), m.dim(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

//! Uncompressed COCO-style run-length encoding.
//!
//! Pixels are visited in column-major order; runs alternate between
//! background and foreground, starting with background (so a mask whose
//! first pixel is foreground starts with a zero-length run).

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// Decodes runs over a `height × width` mask.
pub fn decode_rle(height: u32, width: u32, counts: &[u64]) -> Result<BinaryMask> {
    let expected = u64::from(height) * u64::from(width);
    let sum = counts.iter().try_fold(0u64, |acc, &c| acc.checked_add(c)).unwrap_or(u64::MAX);
    if sum != expected {
        return Err(Error::RleLengthMismatch { sum, expected });
    }
    let mut mask = BinaryMask::empty(width, height)?;
    let mut k = 0u64;
    for (run, &count) in counts.iter().enumerate() {
        if run % 2 == 1 {
            for j in k..k + count {
                let (row, col) = ((j % u64::from(height)) as u32, (j / u64::from(height)) as u32);
                mask.set(col, row, true);
            }
        }
        k += count;
    }
    Ok(mask)
}

/// Canonical encoding: leading background run (possibly 0), no other
/// zero-length runs. Returns `(height, width, counts)`.
pub fn encode_rle(mask: &BinaryMask) -> (u32, u32, Vec<u64>) {
    let (w, h) = mask.dims();
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for col in 0..w {
        for row in 0..h {
            let v = mask.get(col, row);
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    (h, w, counts)
}

//! Row-major bit matrix packed into 64-bit words, LSB-first within a word.

/// A rows × cols bit matrix. Column count need not be word-aligned; bits past
/// `cols` in the last word of each row are kept zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            data: vec![0u64; rows * words_per_row],
        }
    }

    /// Build from row-major bytes, LSB-first within each byte, `cols` bits per
    /// row and `cols.div_ceil(8)` bytes per row.
    pub fn from_row_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Self {
        let bytes_per_row = cols.div_ceil(8);
        assert_eq!(bytes.len(), rows * bytes_per_row, "payload length mismatch");
        let mut m = BitMatrix::zero(rows, cols);
        for r in 0..rows {
            let src = &bytes[r * bytes_per_row..(r + 1) * bytes_per_row];
            let dst = &mut m.data[r * m.words_per_row..(r + 1) * m.words_per_row];
            for (i, b) in src.iter().enumerate() {
                dst[i / 8] |= (*b as u64) << (8 * (i % 8));
            }
        }
        m.mask_tails();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Width in bits.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[inline]
    pub fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words_per_row + c / 64];
        if v {
            *w |= 1u64 << (c % 64);
        } else {
            *w &= !(1u64 << (c % 64));
        }
    }

    /// Row as bytes, LSB-first, exactly `cols.div_ceil(8)` bytes.
    pub fn row_bytes(&self, r: usize) -> Vec<u8> {
        let n = self.cols.div_ceil(8);
        let mut out = vec![0u8; n];
        for (i, b) in out.iter_mut().enumerate() {
            let w = self.data[r * self.words_per_row + i / 8];
            *b = (w >> (8 * (i % 8))) as u8;
        }
        out
    }

    /// Whole payload as row-major bytes.
    pub fn to_row_major_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rows * self.cols.div_ceil(8));
        for r in 0..self.rows {
            out.extend_from_slice(&self.row_bytes(r));
        }
        out
    }

    pub fn set_row_bytes(&mut self, r: usize, bytes: &[u8]) {
        assert_eq!(bytes.len(), self.cols.div_ceil(8));
        let dst = &mut self.data[r * self.words_per_row..(r + 1) * self.words_per_row];
        dst.fill(0);
        for (i, b) in bytes.iter().enumerate() {
            dst[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        self.mask_tail_of_row(r);
    }

    fn mask_tails(&mut self) {
        for r in 0..self.rows {
            self.mask_tail_of_row(r);
        }
    }

    fn mask_tail_of_row(&mut self, r: usize) {
        let tail = self.cols % 64;
        if tail != 0 {
            let idx = r * self.words_per_row + self.words_per_row - 1;
            self.data[idx] &= (1u64 << tail) - 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_roundtrip() {
        let bytes: Vec<u8> = (0..2 * 5).map(|i| i as u8).collect();
        let m = BitMatrix::from_row_bytes(2, 40, &bytes);
        assert_eq!(m.to_row_major_bytes(), bytes);
        assert_eq!(m.words_per_row(), 1);
    }

    #[test]
    fn set_get() {
        let mut m = BitMatrix::zero(1, 100);
        m.set(0, 99, true);
        assert!(m.get(0, 99));
        assert!(!m.get(0, 98));
    }
}

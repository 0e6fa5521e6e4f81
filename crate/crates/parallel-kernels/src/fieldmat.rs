//! Row-major matrix of prime-field elements stored as u32 words.

/// rows × cols matrix over Z_p, entries reduced mod `modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    modulus: u64,
    data: Vec<u32>,
}

impl FieldMatrix {
    pub fn zero(rows: usize, cols: usize, modulus: u64) -> Self {
        FieldMatrix {
            rows,
            cols,
            modulus,
            data: vec![0u32; rows * cols],
        }
    }

    pub fn from_data(rows: usize, cols: usize, modulus: u64, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|&x| (x as u64) < modulus));
        FieldMatrix { rows, cols, modulus, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        debug_assert!((v as u64) < self.modulus);
        self.data[r * self.cols + c] = v;
    }
}

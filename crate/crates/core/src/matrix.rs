//! Binary Bott matrices: strictly upper triangular square matrices over {0,1}.
//!
//! A matrix of size `n` encodes an n-dimensional real Bott manifold. Column
//! `j` records which earlier circle factors twist the `j`-th fiber, so every
//! nonzero entry sits strictly above the diagonal. Matrices are ordered and
//! identified by a canonical key: the `n(n-1)/2` above-diagonal bits read
//! row-major, most significant bit first.

use std::fmt;

use thiserror::Error;

/// Largest supported matrix size.
pub const MAX_DIM: usize = 8;

/// Errors produced while constructing or parsing a matrix.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension {0} is out of range (supported: 1..={MAX_DIM})")]
    UnsupportedDimension(usize),
    #[error("missing dimension line")]
    MissingDimension,
    #[error("invalid dimension line {0:?}")]
    InvalidDimension(String),
    #[error("missing row {row} (expected {expected} rows)")]
    MissingRow { row: usize, expected: usize },
    #[error("row {row} has {got} characters, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {row}, column {col}: invalid character {ch:?}")]
    InvalidEntry { row: usize, col: usize, ch: char },
    #[error("row {row}, column {col}: nonzero entry on or below the diagonal")]
    BelowDiagonal { row: usize, col: usize },
    #[error("unexpected content after row {0}")]
    TrailingContent(usize),
    #[error("key {key} is out of range for dimension {n}")]
    KeyOutOfRange { n: usize, key: u64 },
    #[error("index {0} is out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),
    #[error("image {0:?} is not a permutation")]
    NotAPermutation(Vec<usize>),
}

/// Strictly upper triangular (0,1)-matrix. Rows and columns are 0-based.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BottMatrix {
    n: u8,
    /// Bit `j` of `rows[i]` is the entry in row `i`, column `j`.
    rows: [u8; MAX_DIM],
}

impl BottMatrix {
    /// The zero matrix of size `n` (an n-torus).
    pub fn zero(n: usize) -> Result<Self, MatrixError> {
        if n == 0 || n > MAX_DIM {
            return Err(MatrixError::UnsupportedDimension(n));
        }
        Ok(BottMatrix {
            n: n as u8,
            rows: [0; MAX_DIM],
        })
    }

    /// Builds a matrix from a list of above-diagonal positions `(row, col)`.
    pub fn from_entries(n: usize, entries: &[(usize, usize)]) -> Result<Self, MatrixError> {
        let mut m = Self::zero(n)?;
        for &(i, j) in entries {
            if i >= n || j >= n {
                return Err(MatrixError::IndexOutOfRange(i.max(j), n));
            }
            if i >= j {
                return Err(MatrixError::BelowDiagonal {
                    row: i + 1,
                    col: j + 1,
                });
            }
            m.rows[i] |= 1 << j;
        }
        Ok(m)
    }

    /// Reconstructs a matrix from its canonical key.
    pub fn from_key(n: usize, key: u64) -> Result<Self, MatrixError> {
        if n == 0 || n > MAX_DIM {
            return Err(MatrixError::UnsupportedDimension(n));
        }
        let bits = n * (n - 1) / 2;
        if bits < 64 && key >= 1 << bits {
            return Err(MatrixError::KeyOutOfRange { n, key });
        }
        let mut m = Self::zero(n)?;
        let mut shift = bits;
        for i in 0..n {
            for j in i + 1..n {
                shift -= 1;
                if key >> shift & 1 == 1 {
                    m.rows[i] |= 1 << j;
                }
            }
        }
        Ok(m)
    }

    /// Parses the text format: a dimension line followed by `n` rows of
    /// `n` characters from {0,1}. A trailing newline is optional.
    pub fn parse(text: &str) -> Result<Self, MatrixError> {
        let mut lines = text.lines();
        let dim_line = lines.next().ok_or(MatrixError::MissingDimension)?;
        let n: usize = dim_line
            .trim()
            .parse()
            .map_err(|_| MatrixError::InvalidDimension(dim_line.to_string()))?;
        if n == 0 || n > MAX_DIM {
            return Err(MatrixError::UnsupportedDimension(n));
        }
        let mut m = Self::zero(n)?;
        for i in 0..n {
            let line = lines.next().ok_or(MatrixError::MissingRow {
                row: i + 1,
                expected: n,
            })?;
            let got = line.chars().count();
            if got != n {
                return Err(MatrixError::RowLength {
                    row: i + 1,
                    expected: n,
                    got,
                });
            }
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' if j > i => m.rows[i] |= 1 << j,
                    '1' => {
                        return Err(MatrixError::BelowDiagonal {
                            row: i + 1,
                            col: j + 1,
                        })
                    }
                    _ => {
                        return Err(MatrixError::InvalidEntry {
                            row: i + 1,
                            col: j + 1,
                            ch,
                        })
                    }
                }
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(MatrixError::TrailingContent(n));
        }
        Ok(m)
    }

    /// Matrix size.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Entry in row `i`, column `j`.
    pub fn entry(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n() && j < self.n());
        self.rows[i] >> j & 1 == 1
    }

    /// Row `i` as a bitmask over columns.
    pub fn row_mask(&self, i: usize) -> u8 {
        self.rows[i]
    }

    /// Column `j` as a bitmask over rows.
    pub fn col_mask(&self, j: usize) -> u8 {
        let mut mask = 0;
        for i in 0..self.n() {
            mask |= (self.rows[i] >> j & 1) << i;
        }
        mask
    }

    /// Positions of the nonzero entries, row-major.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                if self.entry(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Canonical key: above-diagonal bits row-major, first bit most
    /// significant.
    pub fn key(&self) -> u64 {
        let mut key = 0u64;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                key = key << 1 | (self.rows[i] >> j & 1) as u64;
            }
        }
        key
    }

    /// Canonical key as a bit string of length `n(n-1)/2`.
    pub fn key_string(&self) -> String {
        let n = self.n();
        let bits = n * (n - 1) / 2;
        let mut s = String::with_capacity(bits);
        for i in 0..n {
            for j in i + 1..n {
                s.push(if self.entry(i, j) { '1' } else { '0' });
            }
        }
        s
    }

    /// A real Bott manifold is orientable exactly when every row of its
    /// matrix has an even number of ones.
    pub fn is_orientable(&self) -> bool {
        self.rows[..self.n()]
            .iter()
            .all(|r| r.count_ones() % 2 == 0)
    }

    /// Partitions the indices into stages: stage `k` removes the surviving
    /// indices whose column, restricted to the surviving rows, is zero.
    /// These are the index sets of the iterated square-zero subspaces of the
    /// cohomology ring.
    pub fn stage_sets(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut surviving: u8 = if n == 8 { !0 } else { (1 << n) - 1 };
        let mut stages = Vec::new();
        while surviving != 0 {
            let mut removed: u8 = 0;
            for j in 0..n {
                if surviving >> j & 1 == 1 && self.col_mask(j) & surviving == 0 {
                    removed |= 1 << j;
                }
            }
            debug_assert!(removed != 0, "the smallest surviving index always drops");
            stages.push((0..n).filter(|&j| removed >> j & 1 == 1).collect());
            surviving &= !removed;
        }
        stages
    }

    /// Stage sizes `(n_1, ..., n_q)`. Isomorphic cohomology rings share the
    /// same type signature.
    pub fn type_signature(&self) -> TypeSignature {
        TypeSignature {
            parts: self.stage_sets().iter().map(Vec::len).collect(),
        }
    }

    /// Conjugates by a permutation: the result has the entry of `(i, j)` at
    /// `(sigma(i), sigma(j))`. Returns `None` when the result is not
    /// strictly upper triangular.
    pub fn conjugate(&self, sigma: &Permutation) -> Option<BottMatrix> {
        let n = self.n();
        debug_assert_eq!(sigma.len(), n);
        let mut out = BottMatrix {
            n: self.n,
            rows: [0; MAX_DIM],
        };
        for i in 0..n {
            for j in i + 1..n {
                if self.entry(i, j) {
                    let (a, b) = (sigma.apply(i), sigma.apply(j));
                    if a >= b {
                        return None;
                    }
                    out.rows[a] |= 1 << b;
                }
            }
        }
        Some(out)
    }

    /// Normal form: the stable permutation conjugate whose stage sets are
    /// consecutive index ranges, so the diagonal blocks of the block
    /// decomposition are zero. Stage members keep their relative order.
    /// Returns the conjugated matrix together with the permutation `sigma`
    /// mapping original indices to their new positions.
    pub fn normal_form(&self) -> (BottMatrix, Permutation) {
        let mut image = vec![0usize; self.n()];
        let mut next = 0;
        for stage in self.stage_sets() {
            for j in stage {
                image[j] = next;
                next += 1;
            }
        }
        let sigma = Permutation { image };
        let nf = self
            .conjugate(&sigma)
            .expect("stage order conjugation stays upper triangular");
        (nf, sigma)
    }

    /// Whether the matrix equals its own normal form.
    pub fn is_normal_form(&self) -> bool {
        self.normal_form().0 == *self
    }

    /// All permutation conjugates that remain strictly upper triangular,
    /// sorted by key. Always contains the matrix itself.
    pub fn permutation_orbit(&self) -> Vec<BottMatrix> {
        let mut orbit: Vec<BottMatrix> = permutations(self.n())
            .iter()
            .filter_map(|sigma| self.conjugate(sigma))
            .collect();
        orbit.sort_by_key(BottMatrix::key);
        orbit.dedup();
        orbit
    }

    /// The permutation conjugates that are again in normal form, sorted by
    /// key. For a matrix in normal form this is its conjugacy class within
    /// normal forms, the unit a classification table lists once.
    pub fn normal_form_orbit(&self) -> Vec<BottMatrix> {
        let mut orbit: Vec<BottMatrix> = permutations(self.n())
            .iter()
            .filter_map(|sigma| self.conjugate(sigma))
            .filter(BottMatrix::is_normal_form)
            .collect();
        orbit.sort_by_key(BottMatrix::key);
        orbit.dedup();
        orbit
    }
}

impl fmt::Display for BottMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n())?;
        for i in 0..self.n() {
            for j in 0..self.n() {
                write!(f, "{}", u8::from(self.entry(i, j)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BottMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BottMatrix(n={}, key={})", self.n(), self.key_string())
    }
}

impl PartialOrd for BottMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BottMatrix {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.key()).cmp(&(other.n, other.key()))
    }
}

/// Stage sizes of a matrix, compared lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeSignature {
    parts: Vec<usize>,
}

impl TypeSignature {
    pub fn new(parts: Vec<usize>) -> Self {
        TypeSignature { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Total size, the sum of the parts.
    pub fn dim(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Half-open index ranges of the consecutive blocks.
    pub fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.parts
            .iter()
            .map(|&p| {
                let r = start..start + p;
                start += p;
                r
            })
            .collect()
    }

    /// Block index of a matrix position, for a matrix in normal form.
    pub fn block_of(&self, index: usize) -> usize {
        let mut end = 0;
        for (k, &p) in self.parts.iter().enumerate() {
            end += p;
            if index < end {
                return k;
            }
        }
        panic!("index {index} out of range for type {self}");
    }
}

impl fmt::Display for TypeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Permutation of `{0, ..., n-1}`, stored as its image array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    pub fn from_image(image: Vec<usize>) -> Result<Self, MatrixError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(MatrixError::NotAPermutation(image));
            }
            seen[v] = true;
        }
        Ok(Permutation { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            image[v] = i;
        }
        Permutation { image }
    }

    /// Composition `self` after `other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.len(), other.len());
        Permutation {
            image: (0..self.len())
                .map(|i| self.apply(other.apply(i)))
                .collect(),
        }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }
}

/// All permutations of `{0, ..., n-1}`.
pub fn permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    fn go(current: &mut Vec<usize>, k: usize, out: &mut Vec<Permutation>) {
        if k == current.len() {
            out.push(Permutation {
                image: current.clone(),
            });
            return;
        }
        for i in k..current.len() {
            current.swap(k, i);
            go(current, k + 1, out);
            current.swap(k, i);
        }
    }
    go(&mut current, 0, &mut out);
    out
}

/// Iterates every matrix of size `n` in ascending canonical-key order.
pub fn enumerate_all(n: usize) -> Result<impl Iterator<Item = BottMatrix>, MatrixError> {
    if n == 0 || n > MAX_DIM {
        return Err(MatrixError::UnsupportedDimension(n));
    }
    let bits = n * (n - 1) / 2;
    Ok((0..1u64 << bits)
        .map(move |key| BottMatrix::from_key(n, key).expect("keys below 2^bits are valid")))
}

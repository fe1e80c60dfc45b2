//! Mod 2 cohomology rings of real Bott manifolds and graded-ring
//! isomorphism testing.
//!
//! For a matrix `A` the ring is `Z/2[x_0, ..., x_{n-1}]` modulo the
//! relations `x_j^2 = x_j * (sum of x_i over rows i with A[i][j] = 1)`.
//! The square-free monomials form a basis of size `2^n`, so elements are
//! stored as bit sets indexed by generator subsets. Deciding diffeomorphism
//! of two manifolds reduces to deciding graded isomorphism of these rings.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::matrix::{BottMatrix, Permutation, MAX_DIM};

/// Errors from ring arithmetic and isomorphism searches.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("ambient dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("generator index {index} is out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("generator index {0} repeats in a square-free monomial")]
    DuplicateIndex(usize),
    #[error("matrix is not in normal form; normalize before searching")]
    NotNormalForm,
    #[error("exhaustive search over invertible {0}x{0} matrices is too large")]
    SearchTooLarge(usize),
}

/// Bit set over the `2^n <= 256` square-free monomials; bit index is the
/// generator subset mask.
type Bits = [u64; 4];

const NO_BITS: Bits = [0; 4];

#[inline]
fn bit_get(bits: &Bits, idx: usize) -> bool {
    bits[idx >> 6] >> (idx & 63) & 1 == 1
}

#[inline]
fn bit_toggle(bits: &mut Bits, idx: usize) {
    bits[idx >> 6] ^= 1 << (idx & 63);
}

#[inline]
fn bits_xor(acc: &mut Bits, other: &Bits) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

fn bits_indices(bits: &Bits) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &word) in bits.iter().enumerate() {
        let mut word = word;
        while word != 0 {
            out.push(w * 64 + word.trailing_zeros() as usize);
            word &= word - 1;
        }
    }
    out
}

/// Element of the cohomology ring: a sum of square-free monomials in the
/// degree-one generators.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingElement {
    n: u8,
    bits: Bits,
}

impl RingElement {
    pub fn zero(n: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&n));
        RingElement {
            n: n as u8,
            bits: NO_BITS,
        }
    }

    /// The multiplicative unit (the empty monomial).
    pub fn one(n: usize) -> Self {
        let mut e = Self::zero(n);
        bit_toggle(&mut e.bits, 0);
        e
    }

    /// The degree-one generator `x_i`.
    pub fn generator(n: usize, i: usize) -> Result<Self, RingError> {
        if i >= n {
            return Err(RingError::IndexOutOfRange { index: i, n });
        }
        let mut e = Self::zero(n);
        bit_toggle(&mut e.bits, 1 << i);
        Ok(e)
    }

    /// A single square-free monomial given by distinct generator indices.
    pub fn monomial(n: usize, indices: &[usize]) -> Result<Self, RingError> {
        let mut mask = 0usize;
        for &i in indices {
            if i >= n {
                return Err(RingError::IndexOutOfRange { index: i, n });
            }
            if mask >> i & 1 == 1 {
                return Err(RingError::DuplicateIndex(i));
            }
            mask |= 1 << i;
        }
        let mut e = Self::zero(n);
        bit_toggle(&mut e.bits, mask);
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn is_zero(&self) -> bool {
        self.bits == NO_BITS
    }

    /// Sum in characteristic two: the symmetric difference of monomials.
    pub fn add(&self, other: &RingElement) -> Result<RingElement, RingError> {
        if self.n != other.n {
            return Err(RingError::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        let mut out = *self;
        bits_xor(&mut out.bits, &other.bits);
        Ok(out)
    }

    /// Number of monomials with nonzero coefficient.
    pub fn monomial_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Monomials as sorted index lists, in ascending subset-mask order.
    pub fn monomials(&self) -> Vec<Vec<usize>> {
        bits_indices(&self.bits)
            .into_iter()
            .map(|mask| (0..self.n()).filter(|i| mask >> i & 1 == 1).collect())
            .collect()
    }

    /// Whether the monomial on the given indices has coefficient one.
    pub fn contains(&self, indices: &[usize]) -> bool {
        let mut mask = 0usize;
        for &i in indices {
            mask |= 1 << i;
        }
        bit_get(&self.bits, mask)
    }

    /// The component spanned by monomials of the given degree.
    pub fn degree_component(&self, degree: usize) -> RingElement {
        let mut out = Self::zero(self.n());
        for mask in bits_indices(&self.bits) {
            if mask.count_ones() as usize == degree {
                bit_toggle(&mut out.bits, mask);
            }
        }
        out
    }

    pub(crate) fn from_bits(n: usize, bits: Bits) -> Self {
        RingElement { n: n as u8, bits }
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for mask in bits_indices(&self.bits) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mask == 0 {
                write!(f, "1")?;
            } else {
                let mut head = true;
                for i in 0..self.n() {
                    if mask >> i & 1 == 1 {
                        if !head {
                            write!(f, "*")?;
                        }
                        head = false;
                        write!(f, "x{}", i + 1)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement({self})")
    }
}

/// Multiplier for the ring of one matrix. Monomial reductions are memoized,
/// so repeated products against the same matrix stay cheap.
pub struct Ring<'a> {
    matrix: &'a BottMatrix,
    memo: RefCell<HashMap<u64, Bits>>,
}

impl<'a> Ring<'a> {
    pub fn new(matrix: &'a BottMatrix) -> Self {
        Ring {
            matrix,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn matrix(&self) -> &BottMatrix {
        self.matrix
    }

    /// Product of two elements, reduced to the square-free basis.
    pub fn mul(&self, u: &RingElement, v: &RingElement) -> Result<RingElement, RingError> {
        let n = self.matrix.n();
        for e in [u, v] {
            if e.n() != n {
                return Err(RingError::DimensionMismatch {
                    expected: n,
                    got: e.n(),
                });
            }
        }
        let mut acc = NO_BITS;
        for s in bits_indices(&u.bits) {
            for t in bits_indices(&v.bits) {
                let product = self.monomial_product(s, t);
                bits_xor(&mut acc, &product);
            }
        }
        Ok(RingElement::from_bits(n, acc))
    }

    /// Square of an element. Squaring is additive in characteristic two.
    pub fn square(&self, u: &RingElement) -> Result<RingElement, RingError> {
        self.mul(u, u)
    }

    fn monomial_product(&self, s: usize, t: usize) -> Bits {
        if s & t == 0 {
            let mut out = NO_BITS;
            bit_toggle(&mut out, s | t);
            return out;
        }
        let mut exps = [0u8; MAX_DIM];
        for (i, e) in exps.iter_mut().enumerate() {
            *e = (s >> i & 1) as u8 + (t >> i & 1) as u8;
        }
        self.reduce(exps)
    }

    /// Rewrites `x_j^2` into `x_j * (column j of the matrix)` until the
    /// monomial is square-free. Each rewrite trades an index for a strictly
    /// smaller one, so the recursion terminates.
    fn reduce(&self, exps: [u8; MAX_DIM]) -> Bits {
        let n = self.matrix.n();
        let repeated = (0..n).rev().find(|&j| exps[j] >= 2);
        let j = match repeated {
            Some(j) => j,
            None => {
                let mut mask = 0usize;
                for (i, &e) in exps.iter().enumerate() {
                    if e == 1 {
                        mask |= 1 << i;
                    }
                }
                let mut out = NO_BITS;
                bit_toggle(&mut out, mask);
                return out;
            }
        };
        let key = u64::from_le_bytes(exps);
        if let Some(hit) = self.memo.borrow().get(&key) {
            return *hit;
        }
        let mut acc = NO_BITS;
        let col = self.matrix.col_mask(j);
        for i in 0..j {
            if col >> i & 1 == 1 {
                let mut next = exps;
                next[j] -= 1;
                next[i] += 1;
                let reduced = self.reduce(next);
                bits_xor(&mut acc, &reduced);
            }
        }
        self.memo.borrow_mut().insert(key, acc);
        acc
    }
}

/// Product in the cohomology ring of `matrix`.
pub fn multiply(
    matrix: &BottMatrix,
    u: &RingElement,
    v: &RingElement,
) -> Result<RingElement, RingError> {
    Ring::new(matrix).mul(u, v)
}

/// Degree-one substitution candidate between two rings: column `j` holds
/// the coefficients of the image of `x_j` in the target generators, so
/// entry `(i, j)` is the coefficient of `y_i` in the image of `x_j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneratorMap {
    n: u8,
    /// Bit `j` of `rows[i]` is the entry in row `i`, column `j`.
    rows: [u8; MAX_DIM],
}

impl GeneratorMap {
    pub fn zero(n: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&n));
        GeneratorMap {
            n: n as u8,
            rows: [0; MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.rows[i] = 1 << i;
        }
        m
    }

    /// Builds a map from row bitmasks; bit `j` of `rows[i]` is entry `(i, j)`.
    pub fn from_row_masks(n: usize, rows: &[u8]) -> Self {
        debug_assert_eq!(rows.len(), n);
        let mut m = Self::zero(n);
        m.rows[..n].copy_from_slice(rows);
        m
    }

    /// Builds a map from its nonzero positions `(row, col)`.
    pub fn from_entries(n: usize, entries: &[(usize, usize)]) -> Result<Self, RingError> {
        let mut m = Self::zero(n);
        for &(i, j) in entries {
            if i >= n || j >= n {
                return Err(RingError::IndexOutOfRange { index: i.max(j), n });
            }
            m.rows[i] |= 1 << j;
        }
        Ok(m)
    }

    /// Row masks of a Bott matrix viewed as a map over Z/2.
    pub fn from_matrix(a: &BottMatrix) -> Self {
        let mut m = Self::zero(a.n());
        for i in 0..a.n() {
            m.rows[i] = a.row_mask(i);
        }
        m
    }

    /// Permutation matrix sending basis column `j` to row `sigma(j)`.
    pub fn from_permutation(sigma: &Permutation) -> Self {
        let mut m = Self::zero(sigma.len());
        for j in 0..sigma.len() {
            m.rows[sigma.apply(j)] |= 1 << j;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n() && j < self.n());
        self.rows[i] >> j & 1 == 1
    }

    pub fn set_entry(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.n() && j < self.n());
        if value {
            self.rows[i] |= 1 << j;
        } else {
            self.rows[i] &= !(1 << j);
        }
    }

    pub fn row_mask(&self, i: usize) -> u8 {
        self.rows[i]
    }

    pub fn col_mask(&self, j: usize) -> u8 {
        let mut mask = 0;
        for i in 0..self.n() {
            mask |= (self.rows[i] >> j & 1) << i;
        }
        mask
    }

    /// Matrix times column vector over Z/2, both as bitmasks.
    pub fn apply_col(&self, v: u8) -> u8 {
        let mut out = 0;
        for i in 0..self.n() {
            out |= (((self.rows[i] & v).count_ones() & 1) as u8) << i;
        }
        out
    }

    /// Row vector times matrix over Z/2, both as bitmasks.
    pub fn apply_row(&self, v: u8) -> u8 {
        let mut out = 0;
        for j in 0..self.n() {
            out |= (((self.col_mask(j) & v).count_ones() & 1) as u8) << j;
        }
        out
    }

    /// Matrix product over Z/2.
    pub fn matmul(&self, other: &GeneratorMap) -> GeneratorMap {
        debug_assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n());
        for j in 0..self.n() {
            let col = self.apply_col(other.col_mask(j));
            for i in 0..self.n() {
                out.rows[i] |= (col >> i & 1) << j;
            }
        }
        out
    }

    pub fn transpose(&self) -> GeneratorMap {
        let mut out = Self::zero(self.n());
        for i in 0..self.n() {
            for j in 0..self.n() {
                if self.entry(i, j) {
                    out.rows[j] |= 1 << i;
                }
            }
        }
        out
    }

    pub fn is_invertible(&self) -> bool {
        invertible_rows(&self.rows, self.n())
    }

    pub fn inverse(&self) -> Option<GeneratorMap> {
        let n = self.n();
        let mut rows = self.rows;
        let mut inv = Self::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n).find(|&r| rows[r] >> col & 1 == 1)?;
            rows.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && rows[r] >> col & 1 == 1 {
                    rows[r] ^= rows[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Some(GeneratorMap {
            n: self.n,
            rows: inv,
        })
    }

    /// Determinant of the entries lifted to the integers.
    pub fn det_int(&self) -> i64 {
        let n = self.n();
        let mut dp = vec![0i64; 1 << n];
        dp[0] = 1;
        for s in 1usize..1 << n {
            let k = s.count_ones() as usize;
            // expansion along row k-1: cofactor sign is (-1)^(row + column position)
            let mut sign = if (k - 1).is_multiple_of(2) {
                1i64
            } else {
                -1i64
            };
            let mut acc = 0i64;
            for j in 0..n {
                if s >> j & 1 == 1 {
                    if self.entry(k - 1, j) {
                        acc += sign * dp[s & !(1 << j)];
                    }
                    sign = -sign;
                }
            }
            dp[s] = acc;
        }
        dp[(1 << n) - 1]
    }

    /// Whether all entries below the diagonal blocks of the given type are
    /// zero.
    pub fn is_block_upper_triangular(&self, ty: &crate::matrix::TypeSignature) -> bool {
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if self.entry(i, j) && ty.block_of(i) > ty.block_of(j) {
                    return false;
                }
            }
        }
        true
    }

    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.n()).all(|i| self.entry(i, i))
    }

    /// The image of `x_j`: column `j` as a degree-one element.
    pub fn image_of_generator(&self, j: usize) -> RingElement {
        let mut e = RingElement::zero(self.n());
        let col = self.col_mask(j);
        for i in 0..self.n() {
            if col >> i & 1 == 1 {
                e = e
                    .add(&RingElement::generator(self.n(), i).expect("index in range"))
                    .expect("same dimension");
            }
        }
        e
    }
}

impl fmt::Display for GeneratorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            for j in 0..self.n() {
                write!(f, "{}", u8::from(self.entry(i, j)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for GeneratorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n())
            .map(|i| {
                (0..self.n())
                    .map(|j| if self.entry(i, j) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        write!(f, "GeneratorMap[{}]", rows.join("|"))
    }
}

fn invertible_rows(rows: &[u8; MAX_DIM], n: usize) -> bool {
    let mut rows = *rows;
    for col in 0..n {
        let pivot = match (col..n).find(|&r| rows[r] >> col & 1 == 1) {
            Some(r) => r,
            None => return false,
        };
        rows.swap(col, pivot);
        for r in col + 1..n {
            if rows[r] >> col & 1 == 1 {
                rows[r] ^= rows[col];
            }
        }
    }
    true
}

/// Precomputed generator products in the target ring, for bulk candidate
/// checking. Both search strategies validate candidates through this one
/// predicate.
pub struct IsomorphismChecker {
    n: usize,
    a_cols: [u8; MAX_DIM],
    /// `pair[i][k]` is the reduced product `y_i * y_k`; the diagonal holds
    /// the reduced squares.
    pair: [[Bits; MAX_DIM]; MAX_DIM],
}

impl IsomorphismChecker {
    pub fn new(a: &BottMatrix, b: &BottMatrix) -> Result<Self, RingError> {
        if a.n() != b.n() {
            return Err(RingError::DimensionMismatch {
                expected: a.n(),
                got: b.n(),
            });
        }
        let n = a.n();
        let ring = Ring::new(b);
        let mut pair = [[NO_BITS; MAX_DIM]; MAX_DIM];
        for (i, row) in pair.iter_mut().enumerate().take(n) {
            for (k, cell) in row.iter_mut().enumerate().take(n) {
                *cell = ring.monomial_product(1 << i, 1 << k);
            }
        }
        let mut a_cols = [0u8; MAX_DIM];
        for (j, col) in a_cols.iter_mut().enumerate().take(n) {
            *col = a.col_mask(j);
        }
        Ok(IsomorphismChecker { n, a_cols, pair })
    }

    /// Image of the defining relation of `x_j` under the candidate map,
    /// reduced in the target ring.
    fn relation_bits(&self, p: &GeneratorMap, j: usize) -> Bits {
        let c = p.col_mask(j);
        let mut d = 0u8;
        let mut col = self.a_cols[j];
        while col != 0 {
            let k = col.trailing_zeros() as usize;
            col &= col - 1;
            d ^= p.col_mask(k);
        }
        let mut acc = NO_BITS;
        for i in 0..self.n {
            if c >> i & 1 == 0 {
                continue;
            }
            // the square of the image plus the image times the relation target
            bits_xor(&mut acc, &self.pair[i][i]);
            for k in 0..self.n {
                if d >> k & 1 == 1 {
                    bits_xor(&mut acc, &self.pair[i][k]);
                }
            }
        }
        acc
    }

    /// Whether every defining relation maps to zero under the candidate.
    pub fn relations_hold(&self, p: &GeneratorMap) -> bool {
        (0..self.n).all(|j| self.relation_bits(p, j) == NO_BITS)
    }

    /// Relations hold and the candidate is invertible over Z/2.
    pub fn is_isomorphism(&self, p: &GeneratorMap) -> bool {
        p.is_invertible() && self.relations_hold(p)
    }
}

/// Image in the ring of `b` of the defining relation of `x_j` in the ring
/// of `a`, under the substitution `p`. The zero element exactly when the
/// relation is respected.
pub fn relation_image(
    a: &BottMatrix,
    b: &BottMatrix,
    p: &GeneratorMap,
    j: usize,
) -> Result<RingElement, RingError> {
    if a.n() != b.n() || p.n() != a.n() {
        return Err(RingError::DimensionMismatch {
            expected: a.n(),
            got: if a.n() != b.n() { b.n() } else { p.n() },
        });
    }
    if j >= a.n() {
        return Err(RingError::IndexOutOfRange { index: j, n: a.n() });
    }
    let ring = Ring::new(b);
    let image_j = p.image_of_generator(j);
    let mut target = RingElement::zero(b.n());
    for i in 0..a.n() {
        if a.entry(i, j) {
            target = target.add(&p.image_of_generator(i))?;
        }
    }
    let square = ring.square(&image_j)?;
    let cross = ring.mul(&image_j, &target)?;
    square.add(&cross)
}

/// Whether `p` defines a graded-ring isomorphism from the ring of `a` to
/// the ring of `b`: it must be invertible and send every defining relation
/// to zero. Invertibility makes the induced map surjective in degree one,
/// and equal total dimensions force bijectivity.
pub fn is_isomorphism(a: &BottMatrix, b: &BottMatrix, p: &GeneratorMap) -> Result<bool, RingError> {
    let checker = IsomorphismChecker::new(a, b)?;
    if p.n() != a.n() {
        return Err(RingError::DimensionMismatch {
            expected: a.n(),
            got: p.n(),
        });
    }
    Ok(checker.is_isomorphism(p))
}

type GlTable = Arc<Vec<[u8; MAX_DIM]>>;

static GL_CACHE: OnceLock<Mutex<HashMap<usize, GlTable>>> = OnceLock::new();

/// All invertible `k x k` matrices over Z/2 as row masks, identity first.
/// Materialized once per size; sizes above five are refused because the
/// group is astronomically large.
pub fn gl_matrices(k: usize) -> Result<Arc<Vec<[u8; MAX_DIM]>>, RingError> {
    if k == 0 || k > 5 {
        return Err(RingError::SearchTooLarge(k));
    }
    let cache = GL_CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&k) {
        return Ok(hit.clone());
    }
    let mut identity = [0u8; MAX_DIM];
    for (i, row) in identity.iter_mut().enumerate().take(k) {
        *row = 1 << i;
    }
    let mut list = vec![identity];
    for mask in 0..1u64 << (k * k) {
        let mut rows = [0u8; MAX_DIM];
        for (i, row) in rows.iter_mut().enumerate().take(k) {
            *row = (mask >> (i * k) & ((1 << k) - 1)) as u8;
        }
        if rows != identity && invertible_rows(&rows, k) {
            list.push(rows);
        }
    }
    let arc = Arc::new(list);
    cache.lock().unwrap().insert(k, arc.clone());
    Ok(arc)
}

/// Searches for a graded-ring isomorphism between the rings of two normal
/// form matrices. Any such isomorphism respects the square-zero filtration,
/// so its matrix is block upper triangular for the common type signature
/// with invertible diagonal blocks; the search runs over exactly that space
/// and is therefore complete.
pub fn find_isomorphism(a: &BottMatrix, b: &BottMatrix) -> Result<Option<GeneratorMap>, RingError> {
    if a.n() != b.n() {
        return Err(RingError::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    if !a.is_normal_form() || !b.is_normal_form() {
        return Err(RingError::NotNormalForm);
    }
    let ty = a.type_signature();
    if ty != b.type_signature() {
        return Ok(None);
    }
    let n = a.n();
    let checker = IsomorphismChecker::new(a, b)?;
    if a == b {
        let identity = GeneratorMap::identity(n);
        debug_assert!(checker.is_isomorphism(&identity));
        return Ok(Some(identity));
    }
    let blocks = ty.blocks();
    let lists: Vec<Arc<Vec<[u8; MAX_DIM]>>> = blocks
        .iter()
        .map(|r| gl_matrices(r.len()))
        .collect::<Result<_, _>>()?;
    let mut free = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if ty.block_of(i) < ty.block_of(j) {
                free.push((i, j));
            }
        }
    }
    // Cycle the largest blocks outermost so the cheap free-bit loop sits
    // innermost.
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by_key(|&b| std::cmp::Reverse(blocks[b].len()));

    let mut choice = vec![0usize; blocks.len()];
    'outer: loop {
        let mut base = GeneratorMap::zero(n);
        for (bi, range) in blocks.iter().enumerate() {
            let sub = &lists[bi][choice[bi]];
            for (local, row) in range.clone().enumerate() {
                base.rows[row] |= sub[local] << range.start;
            }
        }
        for free_mask in 0..1u64 << free.len() {
            let mut p = base;
            let mut m = free_mask;
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                m &= m - 1;
                let (i, j) = free[b];
                p.rows[i] |= 1 << j;
            }
            if checker.relations_hold(&p) {
                debug_assert!(p.is_invertible());
                return Ok(Some(p));
            }
        }
        for &bi in order.iter().rev() {
            choice[bi] += 1;
            if choice[bi] < lists[bi].len() {
                continue 'outer;
            }
            choice[bi] = 0;
        }
        return Ok(None);
    }
}

/// Exhaustive isomorphism search over every invertible substitution, with
/// no structural restriction. Only feasible for `n <= 4`; serves as the
/// independent ground truth for the filtered search.
pub fn bruteforce_isomorphism(
    a: &BottMatrix,
    b: &BottMatrix,
) -> Result<Option<GeneratorMap>, RingError> {
    if a.n() != b.n() {
        return Err(RingError::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let n = a.n();
    if n > 4 {
        return Err(RingError::SearchTooLarge(n));
    }
    let checker = IsomorphismChecker::new(a, b)?;
    for rows in gl_matrices(n)?.iter() {
        let p = GeneratorMap {
            n: n as u8,
            rows: *rows,
        };
        if checker.relations_hold(&p) {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Arithmetic conditions satisfied by every isomorphism witness whose
/// diagonal entries are all one: the target matrix factors as `P * A` over
/// Z/2, and the quartic entry identity below holds. Used as a cross-check
/// on found witnesses, not as a search.
pub fn witness_necessary_conditions(a: &BottMatrix, b: &BottMatrix, p: &GeneratorMap) -> bool {
    assert_eq!(a.n(), b.n());
    assert_eq!(p.n(), a.n());
    let n = a.n();
    let pa = p.matmul(&GeneratorMap::from_matrix(a));
    for i in 0..n {
        for j in 0..n {
            if pa.entry(i, j) != b.entry(i, j) {
                return false;
            }
        }
    }
    let bm = |i: usize, j: usize| b.entry(i, j) as u8;
    let pm = |i: usize, j: usize| p.entry(i, j) as u8;
    for j in 0..n {
        for i in 0..n {
            for l in i + 1..n {
                let lhs = pm(l, j) & bm(i, l);
                let rhs = (pm(i, j) & bm(l, j))
                    ^ (pm(l, j) & bm(i, j))
                    ^ (pm(l, j) & bm(l, j) & bm(i, l));
                if lhs != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// Row-permutes a witness within each diagonal block so that its diagonal
/// is all ones, conjugating the target matrix by the same permutation.
/// Returns the adjusted target matrix and witness; the pair still satisfies
/// the isomorphism relations and now meets the preconditions of
/// [`witness_necessary_conditions`].
pub fn unit_diagonal_witness(
    a: &BottMatrix,
    b: &BottMatrix,
    p: &GeneratorMap,
) -> (BottMatrix, GeneratorMap) {
    let n = a.n();
    let ty = a.type_signature();
    let mut image = vec![usize::MAX; n];
    for range in ty.blocks() {
        let rows: Vec<usize> = range.clone().collect();
        let cols: Vec<usize> = range.clone().collect();
        let matched = match_block(p, &rows, &cols).expect("invertible block has a transversal");
        for (col_pos, &row) in matched.iter().enumerate() {
            image[row] = cols[col_pos];
        }
    }
    let tau = Permutation::from_image(image).expect("blockwise matching is a bijection");
    let b_star = b
        .conjugate(&tau)
        .expect("block-preserving conjugation stays upper triangular");
    let tau_inv = tau.inverse();
    let mut p_star = GeneratorMap::zero(n);
    for i in 0..n {
        p_star.rows[i] = p.rows[tau_inv.apply(i)];
    }
    debug_assert!(p_star.has_unit_diagonal());
    debug_assert!(b_star.is_normal_form());
    debug_assert_eq!(is_isomorphism(a, &b_star, &p_star), Ok(true));
    (b_star, p_star)
}

/// Finds rows (one per column, all distinct) carrying a one in each column
/// of the square subblock, by backtracking.
fn match_block(p: &GeneratorMap, rows: &[usize], cols: &[usize]) -> Option<Vec<usize>> {
    fn go(
        p: &GeneratorMap,
        rows: &[usize],
        cols: &[usize],
        used: &mut Vec<bool>,
        picked: &mut Vec<usize>,
    ) -> bool {
        if picked.len() == cols.len() {
            return true;
        }
        let col = cols[picked.len()];
        for (ri, &row) in rows.iter().enumerate() {
            if !used[ri] && p.entry(row, col) {
                used[ri] = true;
                picked.push(row);
                if go(p, rows, cols, used, picked) {
                    return true;
                }
                picked.pop();
                used[ri] = false;
            }
        }
        false
    }
    let mut used = vec![false; rows.len()];
    let mut picked = Vec::new();
    if go(p, rows, cols, &mut used, &mut picked) {
        Some(picked)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::enumerate_all;

    fn klein() -> BottMatrix {
        BottMatrix::from_entries(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn generator_squares_follow_columns() {
        let k = klein();
        let ring = Ring::new(&k);
        let x0 = RingElement::generator(2, 0).unwrap();
        let x1 = RingElement::generator(2, 1).unwrap();
        assert!(ring.square(&x0).unwrap().is_zero());
        assert_eq!(
            ring.square(&x1).unwrap(),
            RingElement::monomial(2, &[0, 1]).unwrap()
        );
    }

    #[test]
    fn chain_top_power_is_top_class() {
        let chain = BottMatrix::from_entries(3, &[(0, 1), (1, 2)]).unwrap();
        let ring = Ring::new(&chain);
        let x2 = RingElement::generator(3, 2).unwrap();
        let sq = ring.square(&x2).unwrap();
        assert_eq!(sq, RingElement::monomial(3, &[1, 2]).unwrap());
        let cube = ring.mul(&sq, &x2).unwrap();
        assert_eq!(cube, RingElement::monomial(3, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn zero_columns_square_to_zero() {
        let torus = BottMatrix::zero(4).unwrap();
        let ring = Ring::new(&torus);
        for i in 0..4 {
            let x = RingElement::generator(4, i).unwrap();
            assert!(ring.square(&x).unwrap().is_zero());
        }
    }

    #[test]
    fn multiplication_is_commutative_and_associative() {
        for m in enumerate_all(4).unwrap().step_by(7) {
            let ring = Ring::new(&m);
            let u = RingElement::monomial(4, &[0, 2]).unwrap();
            let v = RingElement::generator(4, 3)
                .unwrap()
                .add(&RingElement::generator(4, 1).unwrap())
                .unwrap();
            let w = RingElement::generator(4, 2)
                .unwrap()
                .add(&RingElement::one(4))
                .unwrap();
            assert_eq!(ring.mul(&u, &v).unwrap(), ring.mul(&v, &u).unwrap());
            let left = ring.mul(&ring.mul(&u, &v).unwrap(), &w).unwrap();
            let right = ring.mul(&u, &ring.mul(&v, &w).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn one_is_the_unit() {
        let m = BottMatrix::from_entries(3, &[(0, 2), (1, 2)]).unwrap();
        let ring = Ring::new(&m);
        let u = RingElement::monomial(3, &[0, 1]).unwrap();
        assert_eq!(ring.mul(&u, &RingElement::one(3)).unwrap(), u);
    }

    #[test]
    fn element_display_is_readable() {
        let u = RingElement::one(3)
            .add(&RingElement::monomial(3, &[0, 2]).unwrap())
            .unwrap();
        assert_eq!(u.to_string(), "1 + x1*x3");
        assert_eq!(RingElement::zero(3).to_string(), "0");
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = klein();
        let u = RingElement::one(2);
        let v = RingElement::one(3);
        assert_eq!(
            multiply(&m, &u, &v),
            Err(RingError::DimensionMismatch {
                expected: 2,
                got: 3
            })
        );
        assert!(RingElement::generator(2, 5).is_err());
        assert_eq!(
            RingElement::monomial(3, &[1, 1]),
            Err(RingError::DuplicateIndex(1))
        );
    }

    #[test]
    fn torus_and_klein_bottle_are_not_isomorphic() {
        let torus = BottMatrix::zero(2).unwrap();
        let k = klein();
        for rows in gl_matrices(2).unwrap().iter() {
            let p = GeneratorMap { n: 2, rows: *rows };
            assert!(!is_isomorphism(&torus, &k, &p).unwrap());
        }
        assert_eq!(bruteforce_isomorphism(&torus, &k).unwrap(), None);
        assert_eq!(find_isomorphism(&torus, &k).unwrap(), None);
    }

    #[test]
    fn twisted_chain_pair_is_isomorphic() {
        let a = BottMatrix::from_entries(3, &[(0, 1), (1, 2)]).unwrap();
        let b = BottMatrix::from_entries(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let witness = GeneratorMap::from_entries(3, &[(0, 0), (1, 1), (2, 2), (0, 1)]).unwrap();
        assert!(is_isomorphism(&a, &b, &witness).unwrap());
        let found = find_isomorphism(&a, &b).unwrap().expect("isomorphic pair");
        assert!(is_isomorphism(&a, &b, &found).unwrap());
        assert!(bruteforce_isomorphism(&a, &b).unwrap().is_some());
    }

    #[test]
    fn identity_is_found_first_for_equal_matrices() {
        let m = BottMatrix::from_entries(4, &[(0, 2), (1, 2), (2, 3)]).unwrap();
        let (nf, _) = m.normal_form();
        let p = find_isomorphism(&nf, &nf).unwrap().unwrap();
        assert_eq!(p, GeneratorMap::identity(4));
    }

    #[test]
    fn non_normal_form_inputs_are_rejected() {
        let m = BottMatrix::from_entries(3, &[(0, 1)]).unwrap();
        let z = BottMatrix::zero(3).unwrap();
        assert_eq!(find_isomorphism(&m, &z), Err(RingError::NotNormalForm));
    }

    #[test]
    fn filtered_search_matches_bruteforce_on_dimension_three() {
        let all: Vec<BottMatrix> = enumerate_all(3).unwrap().collect();
        for a in &all {
            for b in &all {
                let (na, _) = a.normal_form();
                let (nb, _) = b.normal_form();
                let fast = find_isomorphism(&na, &nb).unwrap().is_some();
                let brute = bruteforce_isomorphism(a, b).unwrap().is_some();
                assert_eq!(fast, brute, "disagreement on {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn same_type_distinct_classes_stay_separate() {
        let a = BottMatrix::from_entries(4, &[(1, 2), (2, 3)]).unwrap();
        let b = BottMatrix::from_entries(4, &[(0, 3), (1, 2), (2, 3)]).unwrap();
        assert_eq!(a.type_signature(), b.type_signature());
        assert!(find_isomorphism(&a, &b).unwrap().is_none());
        assert!(bruteforce_isomorphism(&a, &b).unwrap().is_none());
    }

    #[test]
    fn gl_sizes_are_correct() {
        assert_eq!(gl_matrices(1).unwrap().len(), 1);
        assert_eq!(gl_matrices(2).unwrap().len(), 6);
        assert_eq!(gl_matrices(3).unwrap().len(), 168);
        assert_eq!(gl_matrices(4).unwrap().len(), 20160);
        assert_eq!(gl_matrices(6).unwrap_err(), RingError::SearchTooLarge(6));
    }

    #[test]
    fn witness_conditions_hold_for_identity_and_twisted_pair() {
        for m in enumerate_all(3).unwrap() {
            assert!(witness_necessary_conditions(
                &m,
                &m,
                &GeneratorMap::identity(3)
            ));
        }
        let a = BottMatrix::from_entries(3, &[(0, 1), (1, 2)]).unwrap();
        let b = BottMatrix::from_entries(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let witness = GeneratorMap::from_entries(3, &[(0, 0), (1, 1), (2, 2), (0, 1)]).unwrap();
        assert!(witness_necessary_conditions(&a, &b, &witness));
    }

    #[test]
    fn unit_diagonal_normalization_preserves_isomorphism() {
        // The swap of the last two generators relates these two matrices but
        // has zero diagonal entries there; normalization repairs that.
        let a = BottMatrix::from_entries(4, &[(0, 3), (1, 2)]).unwrap();
        let b = BottMatrix::from_entries(4, &[(0, 2), (1, 3)]).unwrap();
        let p = find_isomorphism(&a, &b).unwrap().expect("isomorphic");
        let (b_star, p_star) = unit_diagonal_witness(&a, &b, &p);
        assert!(p_star.has_unit_diagonal());
        assert!(is_isomorphism(&a, &b_star, &p_star).unwrap());
        assert!(witness_necessary_conditions(&a, &b_star, &p_star));
    }

    #[test]
    fn det_int_matches_known_values() {
        assert_eq!(GeneratorMap::identity(4).det_int(), 1);
        let swap = GeneratorMap::from_entries(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(swap.det_int(), -1);
        let upper =
            GeneratorMap::from_entries(3, &[(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)])
                .unwrap();
        assert_eq!(upper.det_int(), 1);
    }

    #[test]
    fn det_int_matches_permutation_expansion() {
        use crate::matrix::permutations;
        let mut state = 0xD1B54A32D192ED03u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for n in 1..=4 {
            for _ in 0..30 {
                let mut p = GeneratorMap::zero(n);
                for i in 0..n {
                    for j in 0..n {
                        p.set_entry(i, j, next() & 1 == 1);
                    }
                }
                let mut oracle = 0i64;
                for sigma in permutations(n) {
                    let mut term = 1i64;
                    let mut inversions = 0;
                    for i in 0..n {
                        term *= i64::from(p.entry(i, sigma.apply(i)));
                        for k in 0..i {
                            if sigma.apply(k) > sigma.apply(i) {
                                inversions += 1;
                            }
                        }
                    }
                    oracle += if inversions % 2 == 0 { term } else { -term };
                }
                assert_eq!(p.det_int(), oracle, "matrix {p:?}");
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        let p = GeneratorMap::from_entries(3, &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)]).unwrap();
        let inv = p.inverse().unwrap();
        assert_eq!(p.matmul(&inv), GeneratorMap::identity(3));
        let singular = GeneratorMap::from_entries(2, &[(0, 0), (0, 1)]).unwrap();
        assert!(singular.inverse().is_none());
        assert!(!singular.is_invertible());
    }
}

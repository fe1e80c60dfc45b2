//! Integer matrices and Smith normal form over the integers.
//!
//! All arithmetic is checked; any overflow surfaces as an error instead of
//! wrapping. The decomposition produces unimodular certificates `U` and `V`
//! with `U * M * V = D` on request, which callers use to extract kernel
//! bases and to solve linear systems exactly.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SnfError {
    #[error("integer overflow during exact arithmetic")]
    Overflow,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: i64) {
        self.data[r * self.cols + c] = value;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, delta: i64) -> Result<(), SnfError> {
        let cell = &mut self.data[r * self.cols + c];
        *cell = cell.checked_add(delta).ok_or(SnfError::Overflow)?;
        Ok(())
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Checked matrix-vector product.
    pub fn mul_vec(&self, v: &[i64]) -> Result<Vec<i64>, SnfError> {
        if v.len() != self.cols {
            return Err(SnfError::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = vec![0i64; self.rows];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc: i64 = 0;
            for (c, &vc) in v.iter().enumerate() {
                let term = self.get(r, c).checked_mul(vc).ok_or(SnfError::Overflow)?;
                acc = acc.checked_add(term).ok_or(SnfError::Overflow)?;
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// Checked matrix product.
    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, SnfError> {
        if self.cols != other.rows {
            return Err(SnfError::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let term = a.checked_mul(other.get(k, c)).ok_or(SnfError::Overflow)?;
                    out.add_to(r, c, term)?;
                }
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += q * row[src], checked.
    fn row_axpy(&mut self, dst: usize, src: usize, q: i64) -> Result<(), SnfError> {
        if q == 0 {
            return Ok(());
        }
        for c in 0..self.cols {
            let term = q.checked_mul(self.get(src, c)).ok_or(SnfError::Overflow)?;
            self.add_to(dst, c, term)?;
        }
        Ok(())
    }

    /// col[dst] += q * col[src], checked.
    fn col_axpy(&mut self, dst: usize, src: usize, q: i64) -> Result<(), SnfError> {
        if q == 0 {
            return Ok(());
        }
        for r in 0..self.rows {
            let term = q.checked_mul(self.get(r, src)).ok_or(SnfError::Overflow)?;
            self.add_to(r, dst, term)?;
        }
        Ok(())
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = self.get(r, c);
            self.set(r, c, -v);
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Result of a Smith decomposition `U * M * V = D` with `D` diagonal and
/// each diagonal entry dividing the next. `u` and `v` are present only when
/// tracking was requested; for very wide or tall inputs the unused
/// certificate is best left untracked.
pub struct SmithNormalForm {
    pub d: IntMatrix,
    pub u: Option<IntMatrix>,
    pub v: Option<IntMatrix>,
    pub rank: usize,
}

impl SmithNormalForm {
    /// The positive diagonal entries, in division order.
    pub fn divisors(&self) -> Vec<i64> {
        (0..self.rank).map(|t| self.d.get(t, t)).collect()
    }
}

/// Computes the Smith normal form by repeated pivoting on a least-magnitude
/// entry. `track_u` / `track_v` control whether the row and column
/// certificates are accumulated.
pub fn smith_normal_form(
    m: &IntMatrix,
    track_u: bool,
    track_v: bool,
) -> Result<SmithNormalForm, SnfError> {
    let mut d = m.clone();
    let mut u = track_u.then(|| IntMatrix::identity(d.rows));
    let mut v = track_v.then(|| IntMatrix::identity(d.cols));
    let bound = d.rows.min(d.cols);
    let mut rank = bound;

    't_loop: for t in 0..bound {
        'pivot: loop {
            let mut best: Option<(usize, usize, i64)> = None;
            for r in t..d.rows {
                for c in t..d.cols {
                    let val = d.get(r, c);
                    if val != 0 && best.is_none_or(|(_, _, b)| val.abs() < b.abs()) {
                        best = Some((r, c, val));
                    }
                }
            }
            let (pr, pc, _) = match best {
                Some(found) => found,
                None => {
                    rank = t;
                    break 't_loop;
                }
            };
            d.swap_rows(t, pr);
            if let Some(u) = u.as_mut() {
                u.swap_rows(t, pr);
            }
            d.swap_cols(t, pc);
            if let Some(v) = v.as_mut() {
                v.swap_cols(t, pc);
            }
            let pivot = d.get(t, t);

            let mut clean = true;
            for r in t + 1..d.rows {
                let val = d.get(r, t);
                if val != 0 {
                    let q = val / pivot;
                    d.row_axpy(r, t, -q)?;
                    if let Some(u) = u.as_mut() {
                        u.row_axpy(r, t, -q)?;
                    }
                    if d.get(r, t) != 0 {
                        clean = false;
                    }
                }
            }
            for c in t + 1..d.cols {
                let val = d.get(t, c);
                if val != 0 {
                    let q = val / pivot;
                    d.col_axpy(c, t, -q)?;
                    if let Some(v) = v.as_mut() {
                        v.col_axpy(c, t, -q)?;
                    }
                    if d.get(t, c) != 0 {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'pivot;
            }

            for r in t + 1..d.rows {
                for c in t + 1..d.cols {
                    if d.get(r, c) % pivot != 0 {
                        d.row_axpy(t, r, 1)?;
                        if let Some(u) = u.as_mut() {
                            u.row_axpy(t, r, 1)?;
                        }
                        continue 'pivot;
                    }
                }
            }
            break 'pivot;
        }
        if d.get(t, t) < 0 {
            d.negate_row(t);
            if let Some(u) = u.as_mut() {
                u.negate_row(t);
            }
        }
    }

    Ok(SmithNormalForm { d, u, v, rank })
}

/// Basis of the integer kernel of `m`, as the trailing columns of the
/// Smith column certificate. The basis is saturated: it spans the kernel
/// over the integers, not just over the rationals.
pub fn kernel_basis(m: &IntMatrix) -> Result<Vec<Vec<i64>>, SnfError> {
    let snf = smith_normal_form(m, false, true)?;
    let v = snf.v.expect("column certificate was tracked");
    Ok((snf.rank..m.cols()).map(|c| v.column(c)).collect())
}

/// Solves `m * x = b` exactly over the integers, returning a witness when
/// one exists.
pub fn solve(m: &IntMatrix, b: &[i64]) -> Result<Option<Vec<i64>>, SnfError> {
    if b.len() != m.rows() {
        return Err(SnfError::DimensionMismatch {
            expected: m.rows(),
            got: b.len(),
        });
    }
    let snf = smith_normal_form(m, true, true)?;
    let ub = snf
        .u
        .as_ref()
        .expect("row certificate was tracked")
        .mul_vec(b)?;
    let mut y = vec![0i64; m.cols()];
    for (t, &rhs) in ub.iter().enumerate() {
        if t < snf.rank {
            let pivot = snf.d.get(t, t);
            if rhs % pivot != 0 {
                return Ok(None);
            }
            y[t] = rhs / pivot;
        } else if rhs != 0 {
            return Ok(None);
        }
    }
    let x = snf
        .v
        .as_ref()
        .expect("column certificate was tracked")
        .mul_vec(&y)?;
    Ok(Some(x))
}

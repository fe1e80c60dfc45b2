//! Degree-two cohomology of elementary abelian 2-groups with sign-twisted
//! integer coefficients, computed exactly from the bar complex.
//!
//! A character is a bitmask `m`: the group element `g` acts on the
//! coefficients by `(-1)^{popcount(g & m)}`. Cochains in degree `k` are
//! integer functions on `k`-tuples of group elements; the coboundaries are
//! assembled as explicit integer matrices and reduced by Smith normal form.

use thiserror::Error;

use crate::snf::{self, IntMatrix, SnfError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CohomologyError {
    #[error(transparent)]
    Arithmetic(#[from] SnfError),
    #[error("rank {0} is too large for the bar-complex solver (limit 4)")]
    RankTooLarge(usize),
    #[error("cochain table has wrong length: expected {expected}, got {got}")]
    ValuesLength { expected: usize, got: usize },
}

/// Value of the character with the given mask on a group element.
pub fn character_value(mask: u8, g: u8) -> i64 {
    if (mask & g).count_ones() % 2 == 1 {
        -1
    } else {
        1
    }
}

/// First coboundary `C^1 -> C^2` for the group of rank `n`:
/// `(dc)(g, h) = chi(g) c(h) - c(gh) + c(g)`. Rows are indexed by the pair
/// `(g << n) | h`, columns by group elements.
pub fn coboundary_matrix_1(n: usize, mask: u8) -> Result<IntMatrix, CohomologyError> {
    check_rank(n)?;
    let order = 1usize << n;
    let mut m = IntMatrix::zeros(order * order, order);
    for g in 0..order {
        for h in 0..order {
            let row = (g << n) | h;
            m.add_to(row, h, character_value(mask, g as u8))?;
            m.add_to(row, g ^ h, -1)?;
            m.add_to(row, g, 1)?;
        }
    }
    Ok(m)
}

/// Second coboundary `C^2 -> C^3`:
/// `(dc)(g, h, k) = chi(g) c(h, k) - c(gh, k) + c(g, hk) - c(g, h)`.
/// Rows are indexed by `((g << n) | h) << n | k`, columns by pairs.
pub fn coboundary_matrix_2(n: usize, mask: u8) -> Result<IntMatrix, CohomologyError> {
    check_rank(n)?;
    let order = 1usize << n;
    let mut m = IntMatrix::zeros(order * order * order, order * order);
    for g in 0..order {
        for h in 0..order {
            for k in 0..order {
                let row = ((g << n) | h) << n | k;
                m.add_to(row, (h << n) | k, character_value(mask, g as u8))?;
                m.add_to(row, ((g ^ h) << n) | k, -1)?;
                m.add_to(row, (g << n) | (h ^ k), 1)?;
                m.add_to(row, (g << n) | h, -1)?;
            }
        }
    }
    Ok(m)
}

fn check_rank(n: usize) -> Result<(), CohomologyError> {
    if n == 0 || n > 4 {
        return Err(CohomologyError::RankTooLarge(n));
    }
    Ok(())
}

/// Torsion divisors of the second cohomology group for one character:
/// kernel of the second coboundary modulo the image of the first, returned
/// as the cyclic orders greater than one, in division order.
pub fn h2_of_character(n: usize, mask: u8) -> Result<Vec<i64>, CohomologyError> {
    check_rank(n)?;
    let order = 1usize << n;

    let d2 = coboundary_matrix_2(n, mask)?;
    let kernel = snf::kernel_basis(&d2)?;
    let kdim = kernel.len();
    let mut k = IntMatrix::zeros(order * order, kdim);
    for (c, vec) in kernel.iter().enumerate() {
        for (r, &x) in vec.iter().enumerate() {
            k.set(r, c, x);
        }
    }

    let d1 = coboundary_matrix_1(n, mask)?;
    let k_snf = snf::smith_normal_form(&k, true, true)?;
    debug_assert!(
        k_snf.divisors().iter().all(|&d| d == 1),
        "kernel basis columns are saturated"
    );
    let u = k_snf.u.as_ref().expect("row certificate was tracked");
    let v = k_snf.v.as_ref().expect("column certificate was tracked");

    let mut coords = IntMatrix::zeros(kdim, order);
    for col in 0..order {
        let b = d1.column(col);
        let ub = u.mul_vec(&b)?;
        let mut y = vec![0i64; kdim];
        for (t, slot) in y.iter_mut().enumerate() {
            let pivot = k_snf.d.get(t, t);
            assert_eq!(ub[t] % pivot, 0, "coboundary lies in the cocycle lattice");
            *slot = ub[t] / pivot;
        }
        for (t, &rhs) in ub.iter().enumerate().skip(k_snf.rank) {
            let _ = t;
            assert_eq!(rhs, 0, "coboundary lies in the cocycle lattice");
        }
        let x = v.mul_vec(&y)?;
        for (r, &val) in x.iter().enumerate() {
            coords.set(r, col, val);
        }
    }

    let quotient = snf::smith_normal_form(&coords, false, false)?;
    assert_eq!(
        quotient.rank, kdim,
        "second cohomology of a finite group is finite"
    );
    Ok(quotient.divisors().into_iter().filter(|&d| d > 1).collect())
}

/// Whether the rank-`n` character table of second cohomology matches the
/// closed form: `n` cyclic factors of order two for the trivial character
/// and `n - 1` for every nontrivial one.
pub fn verify_character_table(n: usize) -> Result<bool, CohomologyError> {
    check_rank(n)?;
    for mask in 0..1u16 << n {
        let mask = mask as u8;
        let expected = vec![2i64; if mask == 0 { n } else { n - 1 }];
        if h2_of_character(n, mask)? != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solves `d1(lambda) = values` exactly over the integers, where `values`
/// is a 2-cochain indexed by `(g << n) | h`. Returns the 1-cochain witness
/// when the input is a coboundary.
pub fn coboundary_witness(
    n: usize,
    mask: u8,
    values: &[i64],
) -> Result<Option<Vec<i64>>, CohomologyError> {
    check_rank(n)?;
    let order = 1usize << n;
    if values.len() != order * order {
        return Err(CohomologyError::ValuesLength {
            expected: order * order,
            got: values.len(),
        });
    }
    let d1 = coboundary_matrix_1(n, mask)?;
    Ok(snf::solve(&d1, values)?)
}

/// Human-readable name of a finite abelian group given its cyclic orders,
/// for example `(Z/2)^3` or `Z/2 x Z/4`.
pub fn describe_torsion(divisors: &[i64]) -> String {
    if divisors.is_empty() {
        return "0".to_string();
    }
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < divisors.len() {
        let d = divisors[i];
        let mut count = 0;
        while i < divisors.len() && divisors[i] == d {
            count += 1;
            i += 1;
        }
        if count == 1 {
            parts.push(format!("Z/{d}"));
        } else {
            parts.push(format!("(Z/{d})^{count}"));
        }
    }
    parts.join(" x ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CocycleTable;
    use crate::matrix::BottMatrix;

    #[test]
    fn coboundary_composition_vanishes() {
        for n in 1..=3 {
            for mask in 0..1u8 << n {
                let d1 = coboundary_matrix_1(n, mask).unwrap();
                let d2 = coboundary_matrix_2(n, mask).unwrap();
                let prod = d2.mul(&d1).unwrap();
                for r in 0..prod.rows() {
                    for c in 0..prod.cols() {
                        assert_eq!(prod.get(r, c), 0, "n={n} mask={mask}");
                    }
                }
            }
        }
    }

    #[test]
    fn rank_one_groups_match_known_values() {
        assert_eq!(h2_of_character(1, 0).unwrap(), vec![2]);
        assert_eq!(h2_of_character(1, 1).unwrap(), Vec::<i64>::new());
    }

    #[test]
    fn rank_two_character_table() {
        assert_eq!(h2_of_character(2, 0).unwrap(), vec![2, 2]);
        for mask in 1..4u8 {
            assert_eq!(h2_of_character(2, mask).unwrap(), vec![2], "mask {mask}");
        }
        assert!(verify_character_table(2).unwrap());
    }

    #[test]
    fn doubled_group_cocycles_are_coboundaries() {
        let a = BottMatrix::from_entries(2, &[(0, 1)]).unwrap();
        let table = CocycleTable::build(&a).unwrap();
        for k in 0..2 {
            let mask = a.col_mask(k);
            let column = table.coordinate_column(k);
            let doubled: Vec<i64> = column.iter().map(|&x| 2 * x).collect();
            let witness = coboundary_witness(2, mask, &doubled).unwrap();
            assert!(witness.is_some(), "coordinate {k}");
            let d1 = coboundary_matrix_1(2, mask).unwrap();
            assert_eq!(d1.mul_vec(&witness.unwrap()).unwrap(), doubled);
        }
    }

    #[test]
    fn exact_coboundaries_are_recognized() {
        let n = 2;
        let mask = 0b01u8;
        let d1 = coboundary_matrix_1(n, mask).unwrap();
        let lambda: Vec<i64> = vec![3, -1, 4, 1];
        let values = d1.mul_vec(&lambda).unwrap();
        let witness = coboundary_witness(n, mask, &values).unwrap().unwrap();
        assert_eq!(d1.mul_vec(&witness).unwrap(), values);
    }

    #[test]
    fn torsion_descriptions_read_naturally() {
        assert_eq!(describe_torsion(&[]), "0");
        assert_eq!(describe_torsion(&[2]), "Z/2");
        assert_eq!(describe_torsion(&[2, 2, 2]), "(Z/2)^3");
        assert_eq!(describe_torsion(&[2, 4]), "Z/2 x Z/4");
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(matches!(
            h2_of_character(5, 0),
            Err(CohomologyError::RankTooLarge(5))
        ));
        assert!(matches!(
            coboundary_witness(2, 0, &[1, 2, 3]),
            Err(CohomologyError::ValuesLength {
                expected: 16,
                got: 3
            })
        ));
    }
}

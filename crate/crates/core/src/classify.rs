//! Diffeomorphism classification of all real Bott manifolds of a given
//! dimension.
//!
//! Matrices related by conjugating with a permutation describe the same
//! manifold, so those are merged first; the remaining decisions reduce to
//! graded-ring isomorphism tests between normal forms, which only need to
//! run inside buckets sharing a type signature and orientability.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::matrix::{BottMatrix, MatrixError, TypeSignature};
use crate::ring::{find_isomorphism, RingError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("dimension {0} exceeds the exhaustive classification limit of 5")]
    DimensionTooLarge(usize),
}

/// One diffeomorphism class: all matrices whose manifolds are mutually
/// diffeomorphic, together with its invariants.
#[derive(Debug, Clone)]
pub struct IsoClass {
    /// Member with the smallest key; canonical name of the class.
    pub rep: BottMatrix,
    pub type_signature: TypeSignature,
    pub orientable: bool,
    /// Every matrix in the class, sorted by key.
    pub members: Vec<BottMatrix>,
    /// The members that are in normal form, sorted by key.
    pub normal_form_members: Vec<BottMatrix>,
    /// Sizes of the conjugation orbits partitioning the normal form
    /// members, largest first.
    pub orbit_sizes: Vec<usize>,
}

/// Complete classification of one dimension.
#[derive(Debug)]
pub struct Classification {
    pub dim: usize,
    /// Number of matrices considered: all strictly upper triangular 0/1
    /// matrices of the dimension.
    pub total: usize,
    /// Classes sorted by type signature (descending lexicographic) and
    /// then by representative key.
    pub classes: Vec<IsoClass>,
}

impl Classification {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// The class containing the given matrix.
    pub fn class_of(&self, m: &BottMatrix) -> Option<&IsoClass> {
        self.classes
            .iter()
            .find(|c| c.members.binary_search(m).is_ok())
    }
}

struct DisjointSets {
    parent: Vec<u32>,
}

impl DisjointSets {
    fn new(size: usize) -> Self {
        DisjointSets {
            parent: (0..size as u32).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo as u32;
        }
    }
}

/// Classifies every real Bott manifold of the given dimension, choosing
/// the worker count automatically.
pub fn classify_dimension(n: usize) -> Result<Classification, ClassifyError> {
    classify_dimension_with(n, 0)
}

/// Classifies with an explicit worker count; zero means automatic.
pub fn classify_dimension_with(n: usize, threads: usize) -> Result<Classification, ClassifyError> {
    if n > 5 {
        return Err(ClassifyError::DimensionTooLarge(n));
    }
    let bits = n * (n - 1) / 2;
    let total = 1usize << bits;
    let mut sets = DisjointSets::new(total);

    let matrices: Vec<BottMatrix> = (0..total as u64)
        .map(|key| BottMatrix::from_key(n, key))
        .collect::<Result<_, _>>()?;

    for m in &matrices {
        let key = m.key() as usize;
        for conj in m.permutation_orbit() {
            sets.union(key, conj.key() as usize);
        }
    }

    let mut buckets: Vec<Vec<usize>> = Vec::new();
    {
        let mut index: Vec<((Vec<usize>, bool), usize)> = Vec::new();
        for m in &matrices {
            if !m.is_normal_form() {
                continue;
            }
            let tag = (m.type_signature().parts().to_vec(), m.is_orientable());
            let slot = match index.iter().find(|(t, _)| *t == tag) {
                Some(&(_, s)) => s,
                None => {
                    buckets.push(Vec::new());
                    index.push((tag, buckets.len() - 1));
                    buckets.len() - 1
                }
            };
            buckets[slot].push(m.key() as usize);
        }
    }

    let worker_count = if threads == 0 {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
            .min(buckets.len().max(1))
    } else {
        threads.min(buckets.len().max(1))
    };

    // Pre-share the permutation merges with the workers so they skip pairs
    // that are already known equivalent.
    let known_roots: Vec<usize> = (0..total).map(|k| sets.find(k)).collect();

    let next_bucket = AtomicUsize::new(0);
    let merges: Mutex<Vec<(usize, usize)>> = Mutex::new(Vec::new());
    let worker_failure: Mutex<Option<RingError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let b = next_bucket.fetch_add(1, Ordering::Relaxed);
                if b >= buckets.len() {
                    return;
                }
                let keys = &buckets[b];
                let mats: Vec<&BottMatrix> = keys.iter().map(|&k| &matrices[k]).collect();
                let mut local = DisjointSets::new(keys.len());
                for (i, &ka) in keys.iter().enumerate() {
                    for (j, &kb) in keys.iter().enumerate().skip(i + 1) {
                        if known_roots[ka] == known_roots[kb] {
                            local.union(i, j);
                        }
                    }
                }
                let mut found: Vec<(usize, usize)> = Vec::new();
                for i in 0..keys.len() {
                    for j in i + 1..keys.len() {
                        if local.find(i) == local.find(j) {
                            continue;
                        }
                        match find_isomorphism(mats[i], mats[j]) {
                            Ok(Some(_)) => {
                                local.union(i, j);
                                found.push((keys[i], keys[j]));
                            }
                            Ok(None) => {}
                            Err(e) => {
                                *worker_failure.lock().unwrap() = Some(e);
                                return;
                            }
                        }
                    }
                }
                merges.lock().unwrap().extend(found);
            });
        }
    });

    if let Some(e) = worker_failure.into_inner().unwrap() {
        return Err(e.into());
    }
    for (a, b) in merges.into_inner().unwrap() {
        sets.union(a, b);
    }

    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for key in 0..total {
        let root = sets.find(key);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, v)) => v.push(key),
            None => groups.push((root, vec![key])),
        }
    }

    let mut classes = Vec::with_capacity(groups.len());
    for (_, mut keys) in groups {
        keys.sort_unstable();
        let members: Vec<BottMatrix> = keys.iter().map(|&k| matrices[k]).collect();
        let rep = members[0];
        let normal_form_members: Vec<BottMatrix> = members
            .iter()
            .copied()
            .filter(BottMatrix::is_normal_form)
            .collect();
        debug_assert!(!normal_form_members.is_empty());
        let ty = normal_form_members[0].type_signature();
        let orientable = rep.is_orientable();
        debug_assert!(members.iter().all(|m| m.is_orientable() == orientable));

        let mut orbit_sizes = Vec::new();
        let mut seen: Vec<BottMatrix> = Vec::new();
        for m in &normal_form_members {
            if seen.contains(m) {
                continue;
            }
            let orbit = m.normal_form_orbit();
            debug_assert!(orbit
                .iter()
                .all(|o| normal_form_members.binary_search(o).is_ok()));
            orbit_sizes.push(orbit.len());
            seen.extend(orbit);
        }
        orbit_sizes.sort_unstable_by(|a, b| b.cmp(a));

        classes.push(IsoClass {
            rep,
            type_signature: ty,
            orientable,
            members,
            normal_form_members,
            orbit_sizes,
        });
    }

    classes.sort_by(|a, b| {
        b.type_signature
            .parts()
            .cmp(a.type_signature.parts())
            .then(a.rep.key().cmp(&b.rep.key()))
    });

    Ok(Classification {
        dim: n,
        total,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::BottMatrix;

    #[test]
    fn dimension_one_is_the_circle() {
        let c = classify_dimension(1).unwrap();
        assert_eq!(c.class_count(), 1);
        assert_eq!(c.total, 1);
        assert!(c.classes[0].orientable);
        assert_eq!(c.classes[0].orbit_sizes, vec![1]);
    }

    #[test]
    fn dimension_two_splits_torus_and_klein_bottle() {
        let c = classify_dimension(2).unwrap();
        assert_eq!(c.class_count(), 2);
        let torus = &c.classes[0];
        assert!(torus.orientable);
        assert_eq!(torus.members.len(), 1);
        let klein = &c.classes[1];
        assert!(!klein.orientable);
        assert_eq!(klein.members.len(), 1);
    }

    #[test]
    fn dimension_three_matches_reference_structure() {
        let c = classify_dimension(3).unwrap();
        assert_eq!(c.class_count(), 4);
        assert_eq!(c.total, 8);

        let types: Vec<Vec<usize>> = c
            .classes
            .iter()
            .map(|cl| cl.type_signature.parts().to_vec())
            .collect();
        assert_eq!(types, vec![vec![3], vec![2, 1], vec![1, 2], vec![1, 1, 1]]);

        let member_counts: Vec<usize> = c.classes.iter().map(|cl| cl.members.len()).collect();
        assert_eq!(member_counts, vec![1, 4, 1, 2]);

        let orientable: Vec<bool> = c.classes.iter().map(|cl| cl.orientable).collect();
        assert_eq!(orientable, vec![true, false, true, false]);

        assert_eq!(c.classes[0].orbit_sizes, vec![1]);
        assert_eq!(c.classes[1].orbit_sizes, vec![2, 1]);
        assert_eq!(c.classes[2].orbit_sizes, vec![1]);
        assert_eq!(c.classes[3].orbit_sizes, vec![1, 1]);
    }

    #[test]
    fn dimension_four_has_twelve_classes() {
        let c = classify_dimension(4).unwrap();
        assert_eq!(c.class_count(), 12);
        assert_eq!(c.total, 64);
        let member_total: usize = c.classes.iter().map(|cl| cl.members.len()).sum();
        assert_eq!(member_total, 64);
        let nf_total: usize = c
            .classes
            .iter()
            .map(|cl| cl.normal_form_members.len())
            .sum();
        assert_eq!(nf_total, 48);
        let orientable_count = c.classes.iter().filter(|cl| cl.orientable).count();
        assert_eq!(orientable_count, 3);
    }

    #[test]
    fn class_lookup_finds_every_member() {
        let c = classify_dimension(3).unwrap();
        let m = BottMatrix::from_entries(3, &[(0, 1)]).unwrap();
        let class = c.class_of(&m).unwrap();
        assert_eq!(class.type_signature.parts(), &[2, 1]);
        for cl in &c.classes {
            for member in &cl.members {
                assert_eq!(c.class_of(member).unwrap().rep.key(), cl.rep.key());
            }
        }
    }

    #[test]
    fn thread_counts_do_not_change_the_result() {
        let base = classify_dimension_with(4, 1).unwrap();
        let multi = classify_dimension_with(4, 4).unwrap();
        assert_eq!(base.class_count(), multi.class_count());
        for (a, b) in base.classes.iter().zip(&multi.classes) {
            assert_eq!(a.rep, b.rep);
            assert_eq!(a.members, b.members);
            assert_eq!(a.orbit_sizes, b.orbit_sizes);
        }
    }

    #[test]
    fn oversized_dimension_is_rejected() {
        assert!(matches!(
            classify_dimension(6),
            Err(ClassifyError::DimensionTooLarge(6))
        ));
    }
}

//! Exact incremental row reduction over sparse rational vectors.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::poly::{Monomial, Poly, Rational};

pub(crate) type SparseVec = BTreeMap<Monomial, Rational>;

pub(crate) fn to_sparse(p: &Poly) -> SparseVec {
    p.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
}

fn axpy<K: Ord + Clone>(y: &mut BTreeMap<K, Rational>, a: &Rational, x: &BTreeMap<K, Rational>) {
    for (k, v) in x {
        let delta = a * v;
        let entry = y.entry(k.clone()).or_insert_with(Rational::zero);
        *entry += delta;
        if entry.is_zero() {
            y.remove(k);
        }
    }
}

struct Row {
    vec: SparseVec,
    // expression of `vec` as a combination of inserted vectors
    combo: BTreeMap<usize, Rational>,
}

/// Span of a growing list of vectors, remembering how each echelon row
/// decomposes over the inserted vectors.
#[derive(Default)]
pub(crate) struct LinearSpan {
    rows: BTreeMap<Monomial, Row>,
    inserted: usize,
}

impl LinearSpan {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    #[cfg(test)]
    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    // Reduces `v`; returns the residue and the combination subtracted.
    fn reduce(&self, v: &SparseVec) -> (SparseVec, BTreeMap<usize, Rational>) {
        let mut v = v.clone();
        let mut used = BTreeMap::new();
        let mut kept = SparseVec::new();
        while let Some((m, c)) = v.pop_last() {
            match self.rows.get(&m) {
                Some(row) => {
                    let lead = &row.vec[&m];
                    let factor = &c / lead;
                    let mut rest = row.vec.clone();
                    rest.remove(&m);
                    axpy(&mut v, &-factor.clone(), &rest);
                    axpy(&mut used, &factor, &row.combo);
                }
                None => {
                    kept.insert(m, c);
                }
            }
        }
        (kept, used)
    }

    /// Inserts `v` as vector number `self.inserted()`. Returns `None` when it
    /// is independent of the earlier ones, otherwise its expression over them.
    pub(crate) fn insert(&mut self, v: &SparseVec) -> Option<BTreeMap<usize, Rational>> {
        let index = self.inserted;
        self.inserted += 1;
        let (residue, used) = self.reduce(v);
        match residue.keys().next_back().cloned() {
            None => Some(used),
            Some(pivot) => {
                let mut combo = BTreeMap::new();
                combo.insert(index, num_traits::One::one());
                axpy(&mut combo, &-Rational::from_integer(1.into()), &used);
                self.rows.insert(pivot, Row { vec: residue, combo });
                None
            }
        }
    }

    /// Expression of `v` over the inserted vectors, if `v` is in the span.
    pub(crate) fn express(&self, v: &SparseVec) -> Option<BTreeMap<usize, Rational>> {
        let (residue, used) = self.reduce(v);
        residue.is_empty().then_some(used)
    }
}

/// Basis of the kernel of the linear map sending column `j` to `images[j]`,
/// as coefficient vectors over the columns. The `j`-th returned vector has
/// coefficient 1 at its last nonzero column.
pub(crate) fn kernel(images: &[SparseVec]) -> Vec<BTreeMap<usize, Rational>> {
    let mut span = LinearSpan::new();
    let mut out = Vec::new();
    for (j, img) in images.iter().enumerate() {
        if let Some(expr) = span.insert(img) {
            let mut v: BTreeMap<usize, Rational> = BTreeMap::new();
            v.insert(j, num_traits::One::one());
            axpy(&mut v, &-Rational::from_integer(1.into()), &expr);
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn vec_of(entries: &[(u32, i64)]) -> SparseVec {
        entries.iter().map(|&(m, c)| (vec![m], rat(c))).collect()
    }

    #[test]
    fn expresses_dependent_vectors() {
        let mut s = LinearSpan::new();
        assert!(s.insert(&vec_of(&[(0, 1), (1, 1)])).is_none());
        assert!(s.insert(&vec_of(&[(1, 1)])).is_none());
        let expr = s.express(&vec_of(&[(0, 2)])).unwrap();
        assert_eq!(expr[&0], rat(2));
        assert_eq!(expr[&1], rat(-2));
        assert!(s.express(&vec_of(&[(2, 1)])).is_none());
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn kernel_of_rank_one_map() {
        // columns: a -> e0, b -> 2 e0, c -> 0
        let images = vec![vec_of(&[(0, 1)]), vec_of(&[(0, 2)]), SparseVec::new()];
        let k = kernel(&images);
        assert_eq!(k.len(), 2);
        assert_eq!(k[0][&0], rat(-2));
        assert_eq!(k[0][&1], rat(1));
        assert_eq!(k[1].len(), 1);
    }
}

//! Exact sparse vectors and an incremental row-echelon basis over the rationals.

use num::{One, Zero};

use crate::Rational;

/// Sorted by index, no explicit zeros.
pub type SparseVec = Vec<(usize, Rational)>;

/// `a + c * b`.
pub fn axpy(a: &[(usize, Rational)], c: &Rational, b: &[(usize, Rational)]) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ka = a.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let kb = b.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        if ka < kb {
            out.push(a[i].clone());
            i += 1;
        } else if kb < ka {
            out.push((kb, c * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + c * &b[j].1;
            if !v.is_zero() {
                out.push((ka, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn get(v: &[(usize, Rational)], k: usize) -> Option<&Rational> {
    v.binary_search_by_key(&k, |e| e.0).ok().map(|i| &v[i].1)
}

/// Accumulates unsorted contributions into a sparse vector.
pub fn from_entries(mut entries: Vec<(usize, Rational)>) -> SparseVec {
    entries.sort_by_key(|e| e.0);
    let mut out: SparseVec = Vec::with_capacity(entries.len());
    for (k, c) in entries {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += c,
            _ => out.push((k, c)),
        }
    }
    out.retain(|e| !e.1.is_zero());
    out
}

/// Rows in echelon form: row `j` has a unit entry at `pivots[j]` and zeros at
/// the pivots of all earlier rows.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pub rows: Vec<SparseVec>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    /// Reduces `v` against all rows; returns the row coefficients and the
    /// remainder, so that `v = sum c_j row_j + remainder`.
    pub fn reduce(&self, mut v: SparseVec) -> (Vec<(usize, Rational)>, SparseVec) {
        let mut coeffs = Vec::new();
        for (j, (row, &p)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if v.is_empty() {
                break;
            }
            if let Some(c) = get(&v, p).cloned() {
                v = axpy(&v, &-c.clone(), row);
                coeffs.push((j, c));
            }
        }
        (coeffs, v)
    }

    /// Adds `v` to the span; returns whether the rank increased.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let (_, r) = self.reduce(v);
        // the last entry is the "leading" one: assembly orders coordinates so
        // that high indices carry high polynomial degree
        let Some((p, lead)) = r.last().cloned() else {
            return false;
        };
        let inv = Rational::one() / lead;
        let r: SparseVec = r.into_iter().map(|(k, c)| (k, c * &inv)).collect();
        self.rows.push(r);
        self.pivots.push(p);
        true
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_algebra::rat;

    #[test]
    fn echelon_coordinates_reproduce_members() {
        let mut e = Echelon::default();
        let a = vec![(0, rat(1, 1)), (2, rat(3, 1))];
        let b = vec![(1, rat(2, 1)), (2, rat(1, 1))];
        assert!(e.insert(a.clone()));
        assert!(e.insert(b.clone()));
        let sum = axpy(&a, &rat(-5, 2), &b);
        assert!(!e.insert(sum.clone()));
        let (c, r) = e.reduce(sum.clone());
        assert!(r.is_empty());
        let mut back = Vec::new();
        for (j, cj) in c {
            back = axpy(&back, &cj, &e.rows[j]);
        }
        assert_eq!(back, sum);
    }
}

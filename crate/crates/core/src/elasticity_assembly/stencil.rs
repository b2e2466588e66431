//! Symbolic linear differential expressions. Feeding unit stencils through the
//! generic operators of `poly_calculus` yields the coefficient pattern of each
//! operator, which assembly then applies to tensor-product bases.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num::Zero;

use crate::poly_calculus::Differentiable;
use crate::tensor_algebra::{rat, Mat3, Scalar, Vec3, SYM_PAIRS, sym_index};
use crate::Rational;

/// `sum coef * d^alpha u_src`, keyed by `(src, alpha)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stencil(BTreeMap<(usize, [u32; 3]), Rational>);

impl Stencil {
    /// The unknown component `src` itself.
    pub fn unknown(src: usize) -> Self {
        let mut m = BTreeMap::new();
        m.insert((src, [0, 0, 0]), rat(1, 1));
        Stencil(m)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, [u32; 3], &Rational)> {
        self.0.iter().map(|((s, a), c)| (*s, *a, c))
    }

    fn add_term(&mut self, key: (usize, [u32; 3]), c: Rational) {
        let slot = self.0.entry(key).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&key);
        }
    }
}

impl Zero for Stencil {
    fn zero() -> Self {
        Stencil::default()
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl Add for Stencil {
    type Output = Stencil;
    fn add(mut self, rhs: Stencil) -> Stencil {
        for (k, c) in rhs.0 {
            self.add_term(k, c);
        }
        self
    }
}

impl Sub for Stencil {
    type Output = Stencil;
    fn sub(self, rhs: Stencil) -> Stencil {
        self + (-rhs)
    }
}

impl Neg for Stencil {
    type Output = Stencil;
    fn neg(self) -> Stencil {
        Stencil(self.0.into_iter().map(|(k, c)| (k, -c)).collect())
    }
}

impl Scalar for Stencil {
    fn scale(&self, num: i64, den: i64) -> Self {
        let f = rat(num, den);
        let mut out = Stencil::default();
        for (k, c) in &self.0 {
            out.add_term(*k, c * &f);
        }
        out
    }
}

impl Differentiable for Stencil {
    fn partial(&self, axis: usize) -> Self {
        Stencil(
            self.0
                .iter()
                .map(|((s, a), c)| {
                    let mut a = *a;
                    a[axis] += 1;
                    ((*s, a), c.clone())
                })
                .collect(),
        )
    }
}

pub fn vector_unknown() -> Vec3<Stencil> {
    Vec3([Stencil::unknown(0), Stencil::unknown(1), Stencil::unknown(2)])
}

/// Symmetric tensor whose six independent entries are the unknowns.
pub fn sym_unknown() -> Mat3<Stencil> {
    Mat3::from_fn(|i, j| Stencil::unknown(sym_index(i, j)))
}

pub fn sym_components(m: &Mat3<Stencil>) -> Vec<Stencil> {
    SYM_PAIRS.iter().map(|&(i, j)| m.0[i][j].clone()).collect()
}

pub fn all_components(m: &Mat3<Stencil>) -> Vec<Stencil> {
    m.0.iter().flatten().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_calculus::{div, grad};

    #[test]
    fn div_grad_is_laplacian() {
        let lap = div(&grad(&Stencil::unknown(0)));
        let terms: Vec<_> = lap.terms().map(|(s, a, c)| (s, a, c.clone())).collect();
        assert_eq!(
            terms,
            vec![(0, [0, 0, 2], rat(1, 1)), (0, [0, 2, 0], rat(1, 1)), (0, [2, 0, 0], rat(1, 1))]
        );
    }
}

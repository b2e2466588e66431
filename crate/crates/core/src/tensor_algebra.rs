//! Pointwise algebra on 3-vectors and 3x3 tensors.
//!
//! Everything here is generic over [`Scalar`], so the same code runs on exact
//! rationals, on `f64`, and on whole polynomial fields (a polynomial field is
//! just a vector/tensor whose entries are polynomials).

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Zero};

use crate::{Error, Rational, Result};

/// Additive group (with [`Zero`]) that admits multiplication by rational constants.
pub trait Scalar:
    Clone + Debug + PartialEq + Zero + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
    /// Multiply by the rational constant `num / den`.
    fn scale(&self, num: i64, den: i64) -> Self;
}

/// A [`Scalar`] that can also be multiplied with itself.
pub trait Ring: Scalar + Mul<Output = Self> {}

impl Scalar for f64 {
    fn scale(&self, num: i64, den: i64) -> Self {
        self * num as f64 / den as f64
    }
}
impl Ring for f64 {}

impl Scalar for Rational {
    fn scale(&self, num: i64, den: i64) -> Self {
        self * Rational::new(num.into(), den.into())
    }
}
impl Ring for Rational {}

/// Shorthand for the rational `num / den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn rat_one() -> Rational {
    Rational::one()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vec3<T>(pub [T; 3]);

/// Row-major 3x3 tensor: `self.0[i][j]` is row `i`, column `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

/// Index pairs of the six independent entries of a symmetric tensor
/// (diagonal plus upper triangle, row-major).
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Position of `(i, j)` (or `(j, i)`) in [`SYM_PAIRS`].
pub fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    SYM_PAIRS.iter().position(|&p| p == (a, b)).unwrap()
}

/// Symmetric tensor stored by its six independent entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat3<T>(pub [T; 6]);

impl<T: Scalar> Vec3<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Vec3([a, b, c])
    }

    pub fn zero() -> Self {
        Vec3([T::zero(), T::zero(), T::zero()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Vec3<U> {
        Vec3([f(&self.0[0]), f(&self.0[1]), f(&self.0[2])])
    }

    pub fn scale(&self, num: i64, den: i64) -> Self {
        self.map(|x| x.scale(num, den))
    }
}

impl<T: Ring> Vec3<T> {
    pub fn dot(&self, other: &Self) -> T {
        self.0[0].clone() * other.0[0].clone()
            + self.0[1].clone() * other.0[1].clone()
            + self.0[2].clone() * other.0[2].clone()
    }

    pub fn cross(&self, other: &Self) -> Self {
        let [a0, a1, a2] = &self.0;
        let [b0, b1, b2] = &other.0;
        Vec3([
            a1.clone() * b2.clone() - a2.clone() * b1.clone(),
            a2.clone() * b0.clone() - a0.clone() * b2.clone(),
            a0.clone() * b1.clone() - a1.clone() * b0.clone(),
        ])
    }

    /// Multiply every component by the scalar `s` (from the left).
    pub fn times(&self, s: &T) -> Self {
        self.map(|x| s.clone() * x.clone())
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = rhs.0;
        Vec3([a0 + b0, a1 + b1, a2 + b2])
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = rhs.0;
        Vec3([a0 - b0, a1 - b1, a2 - b2])
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let [a0, a1, a2] = self.0;
        Vec3([-a0, -a1, -a2])
    }
}

impl<T: Scalar> Mat3<T> {
    pub fn from_fn(f: impl Fn(usize, usize) -> T) -> Self {
        Mat3([
            [f(0, 0), f(0, 1), f(0, 2)],
            [f(1, 0), f(1, 1), f(1, 2)],
            [f(2, 0), f(2, 1), f(2, 2)],
        ])
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _| T::zero())
    }

    /// `u * id`.
    pub fn scalar_identity(u: &T) -> Self {
        Self::from_fn(|i, j| if i == j { u.clone() } else { T::zero() })
    }

    pub fn from_rows(rows: [Vec3<T>; 3]) -> Self {
        let [r0, r1, r2] = rows;
        Mat3([r0.0, r1.0, r2.0])
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3(self.0[i].clone())
    }

    pub fn rows(&self) -> [Vec3<T>; 3] {
        [self.row(0), self.row(1), self.row(2)]
    }

    pub fn entry(&self, i: usize, j: usize) -> &T {
        &self.0[i][j]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat3<U> {
        Mat3::from_fn(|i, j| f(&self.0[i][j]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.0[i][j] == self.0[j][i]))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn scale(&self, num: i64, den: i64) -> Self {
        self.map(|x| x.scale(num, den))
    }
}

impl<T: Ring> Mat3<T> {
    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        Vec3([self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v)])
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        Self::from_fn(|i, j| {
            (0..3)
                .map(|k| self.0[i][k].clone() * other.0[k][j].clone())
                .reduce(|a, b| a + b)
                .unwrap()
        })
    }

    /// Multiply every entry by the scalar `s` (from the left).
    pub fn times(&self, s: &T) -> Self {
        self.map(|x| s.clone() * x.clone())
    }
}

impl<T: Scalar> Add for Mat3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].clone() + rhs.0[i][j].clone())
    }
}

impl<T: Scalar> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].clone() - rhs.0[i][j].clone())
    }
}

impl<T: Scalar> Neg for Mat3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.0[i][j].clone())
    }
}

impl<T: Scalar> SymMat3<T> {
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.0[sym_index(i, j)]
    }

    pub fn to_mat(&self) -> Mat3<T> {
        Mat3::from_fn(|i, j| self.get(i, j).clone())
    }

    /// Upper-triangle entries of `m`; exact only when `m` is symmetric.
    pub fn from_upper(m: &Mat3<T>) -> Self {
        SymMat3(SYM_PAIRS.map(|(i, j)| m.0[i][j].clone()))
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> SymMat3<U> {
        SymMat3([
            f(&self.0[0]),
            f(&self.0[1]),
            f(&self.0[2]),
            f(&self.0[3]),
            f(&self.0[4]),
            f(&self.0[5]),
        ])
    }
}

pub fn tr<T: Scalar>(m: &Mat3<T>) -> T {
    m.0[0][0].clone() + m.0[1][1].clone() + m.0[2][2].clone()
}

/// `(M + M^T) / 2`.
pub fn sym<T: Scalar>(m: &Mat3<T>) -> SymMat3<T> {
    SymMat3(SYM_PAIRS.map(|(i, j)| (m.0[i][j].clone() + m.0[j][i].clone()).scale(1, 2)))
}

/// `(M - M^T) / 2`.
pub fn skw<T: Scalar>(m: &Mat3<T>) -> Mat3<T> {
    Mat3::from_fn(|i, j| (m.0[i][j].clone() - m.0[j][i].clone()).scale(1, 2))
}

/// `M - (tr M / 3) id`.
pub fn dev<T: Scalar>(m: &Mat3<T>) -> Mat3<T> {
    let third = tr(m).scale(1, 3);
    Mat3::from_fn(|i, j| {
        if i == j {
            m.0[i][j].clone() - third.clone()
        } else {
            m.0[i][j].clone()
        }
    })
}

/// The skew tensor with `spn(v) w = v x w`.
pub fn spn<T: Scalar>(v: &Vec3<T>) -> Mat3<T> {
    let [a, b, c] = &v.0;
    let z = T::zero;
    Mat3([
        [z(), -c.clone(), b.clone()],
        [c.clone(), z(), -a.clone()],
        [-b.clone(), a.clone(), z()],
    ])
}

/// Inverse of [`spn`]; fails unless `s` is exactly skew.
pub fn spn_inv<T: Scalar>(s: &Mat3<T>) -> Result<Vec3<T>> {
    if !sym(s).0.iter().all(Zero::is_zero) {
        return Err(Error::NotSkew);
    }
    Ok(Vec3([s.0[2][1].clone(), s.0[0][2].clone(), s.0[1][0].clone()]))
}

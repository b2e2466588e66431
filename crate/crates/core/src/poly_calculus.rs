//! Exact trivariate polynomials and the differential operators of the
//! elasticity complex.
//!
//! The operators are written once against [`Differentiable`]; [`Poly3`] is the
//! main instance, but anything that knows how to take a partial derivative
//! (for instance a symbolic stencil) can be pushed through them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};
use rand::Rng;

use crate::tensor_algebra::{rat, sym, Mat3, Ring, Scalar, Vec3};
use crate::Rational;

/// A scalar quantity that can be differentiated along the coordinate axes.
pub trait Differentiable: Scalar {
    fn partial(&self, axis: usize) -> Self;

    /// `∂^alpha`, applying x-, y- then z-derivatives.
    fn partial_multi(&self, alpha: [u32; 3]) -> Self {
        let mut out = self.clone();
        for (axis, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                out = out.partial(axis);
            }
        }
        out
    }
}

/// Sparse polynomial in x, y, z with rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly3 {
    terms: BTreeMap<[u32; 3], Rational>,
}

pub type PolyVecField = Vec3<Poly3>;
pub type PolyMatField = Mat3<Poly3>;

impl Poly3 {
    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(rat(c, 1))
    }

    pub fn monomial(c: Rational, exps: [u32; 3]) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Poly3 { terms }
    }

    /// The coordinate function `x`, `y` or `z`.
    pub fn var(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Self::monomial(Rational::one(), e)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ([u32; 3], Rational)>) -> Self {
        let mut p = Poly3::default();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: [u32; 3], c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: [u32; 3]) -> Rational {
        self.terms.get(&exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e[0] + e[1] + e[2]).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[Rational; 3]) -> Rational {
        let mut sum = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for d in 0..3 {
                t *= num::pow(x[d].clone(), e[d] as usize);
            }
            sum += t;
        }
        sum
    }

    /// Exact integral over the unit cube `[0,1]^3`.
    pub fn integrate_unit_box(&self) -> Rational {
        self.terms
            .iter()
            .map(|(e, c)| c * rat(1, ((e[0] + 1) * (e[1] + 1) * (e[2] + 1)) as i64))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Substitute `x_axis -> value` leaving the other variables free.
    pub fn restrict(&self, axis: usize, value: &Rational) -> Poly3 {
        let mut out = Poly3::default();
        for (e, c) in &self.terms {
            let mut e2 = *e;
            e2[axis] = 0;
            out.add_term(e2, c * num::pow(value.clone(), e[axis] as usize));
        }
        out
    }

    pub fn mul_scalar(&self, s: &Rational) -> Poly3 {
        if s.is_zero() {
            return Poly3::default();
        }
        Poly3 { terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect() }
    }
}

impl Zero for Poly3 {
    fn zero() -> Self {
        Poly3::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Scalar for Poly3 {
    fn scale(&self, num: i64, den: i64) -> Self {
        self.mul_scalar(&rat(num, den))
    }
}

impl Ring for Poly3 {}

impl Differentiable for Poly3 {
    fn partial(&self, axis: usize) -> Self {
        let mut out = Poly3::default();
        for (e, c) in &self.terms {
            if e[axis] == 0 {
                continue;
            }
            let mut e2 = *e;
            e2[axis] -= 1;
            out.add_term(e2, c * Rational::from_integer(e[axis].into()));
        }
        out
    }
}

impl Add for Poly3 {
    type Output = Poly3;
    fn add(mut self, rhs: Poly3) -> Poly3 {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for Poly3 {
    type Output = Poly3;
    fn sub(self, rhs: Poly3) -> Poly3 {
        self + (-rhs)
    }
}

impl Neg for Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        Poly3 { terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect() }
    }
}

impl Mul for Poly3 {
    type Output = Poly3;
    fn mul(self, rhs: Poly3) -> Poly3 {
        let mut out = Poly3::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }
}

/// Canonical text: terms in descending graded order, every exponent spelled
/// out, e.g. `-3/2 * x^2 y^0 z^1 + 1 * x^0 y^0 z^0`. The zero polynomial is `0`.
impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&[u32; 3]> = self.terms.keys().collect();
        keys.sort_by(|a, b| (b[0] + b[1] + b[2], b).cmp(&(a[0] + a[1] + a[2], a)));
        for (i, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{} * x^{} y^{} z^{}", c, e[0], e[1], e[2])?;
        }
        Ok(())
    }
}

pub fn vec_text<T: fmt::Display>(v: &Vec3<T>) -> String {
    format!("[{}; {}; {}]", v.0[0], v.0[1], v.0[2])
}

pub fn mat_text<T: fmt::Display + Scalar>(m: &Mat3<T>) -> String {
    let rows: Vec<String> = m.rows().iter().map(vec_text).collect();
    format!("[{}]", rows.join(", "))
}

pub fn grad<T: Differentiable>(f: &T) -> Vec3<T> {
    Vec3([f.partial(0), f.partial(1), f.partial(2)])
}

pub fn div<T: Differentiable>(v: &Vec3<T>) -> T {
    v.0[0].partial(0) + v.0[1].partial(1) + v.0[2].partial(2)
}

pub fn rot<T: Differentiable>(v: &Vec3<T>) -> Vec3<T> {
    let [a, b, c] = &v.0;
    Vec3([
        c.partial(1) - b.partial(2),
        a.partial(2) - c.partial(0),
        b.partial(0) - a.partial(1),
    ])
}

/// `Grad v`: row `i` is `grad v_i`.
pub fn grad_rows<T: Differentiable>(v: &Vec3<T>) -> Mat3<T> {
    Mat3::from_rows([grad(&v.0[0]), grad(&v.0[1]), grad(&v.0[2])])
}

/// `Rot S`: row-wise `rot`.
pub fn rot_rows<T: Differentiable>(m: &Mat3<T>) -> Mat3<T> {
    let [r0, r1, r2] = m.rows();
    Mat3::from_rows([rot(&r0), rot(&r1), rot(&r2)])
}

/// `Div S`: row-wise `div`.
pub fn div_rows<T: Differentiable>(m: &Mat3<T>) -> Vec3<T> {
    let [r0, r1, r2] = m.rows();
    Vec3([div(&r0), div(&r1), div(&r2)])
}

pub fn sym_grad<T: Differentiable>(v: &Vec3<T>) -> Mat3<T> {
    sym(&grad_rows(v)).to_mat()
}

/// `RotRot^T S = Rot((Rot S)^T)`.
pub fn rotrot_t<T: Differentiable>(m: &Mat3<T>) -> Mat3<T> {
    rot_rows(&rot_rows(m).transpose())
}

pub fn partial_vec<T: Differentiable>(v: &Vec3<T>, alpha: [u32; 3]) -> Vec3<T> {
    v.map(|x| x.partial_multi(alpha))
}

pub fn partial_mat<T: Differentiable>(m: &Mat3<T>, alpha: [u32; 3]) -> Mat3<T> {
    m.map(|x| x.partial_multi(alpha))
}

/// All exponent triples of total degree at most `degree`, in graded order.
pub fn monomials_up_to(degree: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for d in 0..=degree {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                out.push([a, b, d - a - b]);
            }
        }
    }
    out
}

/// Random polynomial of total degree at most `degree`: every monomial gets a
/// coefficient `k / d` with `k` uniform in `[-9, 9]` and `d` in `{1, 2, 3}`.
pub fn random_poly<R: Rng>(rng: &mut R, degree: u32) -> Poly3 {
    Poly3::from_terms(monomials_up_to(degree).into_iter().map(|e| {
        let k: i64 = rng.random_range(-9..=9);
        let d: i64 = rng.random_range(1..=3);
        (e, rat(k, d))
    }))
}

pub fn random_vec_field<R: Rng>(rng: &mut R, degree: u32) -> PolyVecField {
    Vec3([random_poly(rng, degree), random_poly(rng, degree), random_poly(rng, degree)])
}

pub fn random_mat_field<R: Rng>(rng: &mut R, degree: u32) -> PolyMatField {
    let entries: Vec<Poly3> = (0..9).map(|_| random_poly(rng, degree)).collect();
    Mat3::from_fn(|i, j| entries[3 * i + j].clone())
}

pub fn random_sym_field<R: Rng>(rng: &mut R, degree: u32) -> PolyMatField {
    sym(&random_mat_field(rng, degree)).to_mat()
}

/// Random rational in `[-9, 9] / {1,2,3}`, nonzero when `nonzero` is set.
pub fn random_rational<R: Rng>(rng: &mut R, nonzero: bool) -> Rational {
    loop {
        let k: i64 = rng.random_range(-9..=9);
        let d: i64 = rng.random_range(1..=3);
        let r = rat(k, d);
        if !nonzero || !r.is_zero() {
            return r;
        }
    }
}

/// Evaluate every entry of a matrix field at a point.
pub fn eval_mat(m: &PolyMatField, x: &[Rational; 3]) -> Mat3<Rational> {
    m.map(|p| p.eval(x))
}

/// Largest absolute coefficient, useful for quick size diagnostics.
pub fn max_abs_coeff(p: &Poly3) -> Rational {
    p.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_algebra::{spn, tr};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x() -> Poly3 {
        Poly3::var(0)
    }
    fn y() -> Poly3 {
        Poly3::var(1)
    }
    fn z() -> Poly3 {
        Poly3::var(2)
    }

    #[test]
    fn grad_of_product() {
        assert_eq!(grad(&(x() * y())), Vec3([y(), x(), Poly3::default()]));
    }

    #[test]
    fn curl_grad_and_div_curl_vanish() {
        let f = x() * x() * y() * z();
        assert!(rot(&grad(&f)).is_zero());
        let v = Vec3([x() * x() * z(), y() * y() * y(), x() * y()]);
        assert!(div(&rot(&v)).is_zero());
    }

    #[test]
    fn row_wise_operators_on_scalar_multiples_of_identity() {
        let u = x() * x();
        assert_eq!(div_rows(&Mat3::scalar_identity(&u)), grad(&u));
        let u = x() * y() * z();
        assert_eq!(rot_rows(&Mat3::scalar_identity(&u)), -spn(&grad(&u)));
        let v = Vec3([x() * x(), y() * z(), z() * z() * z()]);
        assert_eq!(tr(&grad_rows(&v)), div(&v));
    }

    #[test]
    fn sym_grad_examples() {
        let q = spn(&Vec3([Poly3::from_int(1), Poly3::default(), Poly3::default()]));
        let pos = Vec3([x(), y(), z()]);
        let rm = q.mul_vec(&pos) + Vec3([Poly3::from_int(2), Poly3::from_int(-1), Poly3::default()]);
        assert!(sym_grad(&rm).is_zero());

        let e = sym_grad(&Vec3([x(), Poly3::default(), Poly3::default()]));
        assert_eq!(e, Mat3::from_fn(|i, j| if (i, j) == (0, 0) { Poly3::from_int(1) } else { Poly3::default() }));

        let e = sym_grad(&Vec3([y(), Poly3::default(), Poly3::default()]));
        let half = Poly3::constant(rat(1, 2));
        assert_eq!(
            e,
            Mat3::from_fn(|i, j| if (i, j) == (0, 1) || (i, j) == (1, 0) { half.clone() } else { Poly3::default() })
        );
    }

    #[test]
    fn complex_properties_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let v = random_vec_field(&mut rng, 4);
            assert!(rotrot_t(&sym_grad(&v)).is_zero());
            let s = random_mat_field(&mut rng, 3);
            assert!(div_rows(&rotrot_t(&s)).is_zero());
            let s = random_sym_field(&mut rng, 3);
            assert!(rotrot_t(&s).is_symmetric());
        }
    }

    #[test]
    fn degree_bookkeeping() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_poly(&mut rng, 3);
        assert_eq!(f.degree(), 3);
        assert!(grad(&f).0.iter().map(Poly3::degree).max().unwrap() <= 2);
        let s = random_mat_field(&mut rng, 3);
        assert!(rotrot_t(&s).0.iter().flatten().all(|p| p.degree() <= 1));
    }

    #[test]
    fn canonical_text() {
        assert_eq!(Poly3::default().to_string(), "0");
        let p = x() * x() * z().scale(-3, 2) + Poly3::from_int(1);
        assert_eq!(p.to_string(), "-3/2 * x^2 y^0 z^1 + 1 * x^0 y^0 z^0");
        assert_eq!(vec_text(&Vec3([x(), Poly3::default(), Poly3::from_int(2)])), "[1 * x^1 y^0 z^0; 0; 2 * x^0 y^0 z^0]");
    }

    #[test]
    fn integrals_and_restriction() {
        assert_eq!((x() * y() * y()).integrate_unit_box(), rat(1, 6));
        let p = x() * y() + z();
        assert_eq!(p.restrict(0, &rat(0, 1)), z());
        assert_eq!(p.eval(&[rat(2, 1), rat(3, 1), rat(1, 2)]), rat(13, 2));
    }

    #[test]
    fn sampler_is_seeded() {
        let a = random_mat_field(&mut ChaCha8Rng::seed_from_u64(5), 3);
        let b = random_mat_field(&mut ChaCha8Rng::seed_from_u64(5), 3);
        assert_eq!(a, b);
        assert!(a.0.iter().flatten().all(|p| p.terms().all(|(_, c)| {
            c.abs() <= rat(9, 1) && [1, 2, 3].iter().any(|d| (c * rat(*d, 1)).is_integer())
        })));
    }

    proptest! {
        #[test]
        fn product_rule(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_poly(&mut rng, 3);
            let g = random_poly(&mut rng, 2);
            for axis in 0..3 {
                let lhs = (f.clone() * g.clone()).partial(axis);
                let rhs = f.partial(axis) * g.clone() + f.clone() * g.partial(axis);
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn derivatives_commute(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_poly(&mut rng, 4);
            prop_assert_eq!(f.partial(0).partial(2), f.partial(2).partial(0));
        }
    }
}

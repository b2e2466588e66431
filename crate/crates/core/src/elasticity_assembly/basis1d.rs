//! Exact orthogonal bases of univariate polynomials on `[0, 1]`.
//!
//! Each basis spans all of `P_p` and starts with the "interior" functions
//! `x^l (1-x)^r x^k`, so every constrained subspace used by the assembly is a
//! prefix of it. Functions are rescaled by powers of two so that squared norms
//! lie in `[1, 4)`.

use num::{One, Signed, Zero};

use crate::tensor_algebra::rat;
use crate::Rational;

/// Dense coefficients in the monomial basis, lowest degree first.
pub type Poly1 = Vec<Rational>;

fn trimmed(mut p: Poly1) -> Poly1 {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn mul(a: &[Rational], b: &[Rational]) -> Poly1 {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trimmed(out)
}

pub fn derivative(a: &[Rational]) -> Poly1 {
    a.iter().enumerate().skip(1).map(|(k, c)| c * rat(k as i64, 1)).collect()
}

pub fn derivative_n(a: &[Rational], n: u32) -> Poly1 {
    (0..n).fold(a.to_vec(), |acc, _| derivative(&acc))
}

/// `int_0^1 a b dx`.
pub fn inner(a: &[Rational], b: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                s += x * y / rat((i + j + 1) as i64, 1);
            }
        }
    }
    s
}

pub fn eval(a: &[Rational], x: &Rational) -> Rational {
    a.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn pow(base: &[Rational], e: u32) -> Poly1 {
    (0..e).fold(vec![Rational::one()], |acc, _| mul(&acc, base))
}

/// Power of two `2^e` with `4^e * r` in `[1, 4)`.
fn normalizing_power(r: &Rational) -> Rational {
    let one = Rational::one();
    let four = rat(4, 1);
    let mut f = Rational::one();
    let mut r = r.clone();
    while r >= four {
        r /= &four;
        f /= rat(2, 1);
    }
    while r < one {
        r *= &four;
        f *= rat(2, 1);
    }
    f
}

#[derive(Clone, Debug)]
pub struct Basis1d {
    pub degree: u32,
    /// Vanishing orders at `x = 0` and `x = 1`.
    pub orders: (u32, u32),
    pub funcs: Vec<Poly1>,
    pub norms2: Vec<Rational>,
}

impl Basis1d {
    /// Requires `left + right <= degree + 1`; otherwise the weight alone
    /// exceeds the degree and there are no interior functions.
    pub fn new(degree: u32, left: u32, right: u32) -> Self {
        let w = mul(&pow(&[rat(0, 1), rat(1, 1)], left), &pow(&[rat(1, 1), rat(-1, 1)], right));
        let wdeg = left + right;
        let mut gens: Vec<Poly1> = Vec::new();
        if wdeg <= degree {
            for k in 0..=(degree - wdeg) {
                gens.push(mul(&w, &pow(&[rat(0, 1), rat(1, 1)], k)));
            }
        }
        for k in 0..wdeg.min(degree + 1) {
            gens.push(pow(&[rat(0, 1), rat(1, 1)], k));
        }
        let mut funcs: Vec<Poly1> = Vec::new();
        let mut norms2: Vec<Rational> = Vec::new();
        for g in gens {
            let mut h = g.clone();
            for (f, n2) in funcs.iter().zip(&norms2) {
                let c = inner(&g, f) / n2;
                for (k, fk) in f.iter().enumerate() {
                    if k >= h.len() {
                        h.resize(k + 1, Rational::zero());
                    }
                    h[k] -= &c * fk;
                }
            }
            let h = trimmed(h);
            let n2 = inner(&h, &h);
            assert!(n2.is_positive(), "generators are independent");
            let s = normalizing_power(&n2);
            let h: Poly1 = h.iter().map(|c| c * &s).collect();
            norms2.push(&n2 * &s * &s);
            funcs.push(h);
        }
        Basis1d { degree, orders: (left, right), funcs, norms2 }
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    /// Number of leading functions spanning `w * P_q`, where `w` is the weight.
    pub fn prefix_for_degree(&self, q: i64) -> usize {
        let wdeg = (self.orders.0 + self.orders.1) as i64;
        (q - wdeg + 1).clamp(0, self.len() as i64) as usize
    }

    /// Exact coordinates of `f` (of degree at most `degree`) in this basis.
    pub fn coords(&self, f: &[Rational]) -> Vec<Rational> {
        self.funcs.iter().zip(&self.norms2).map(|(g, n2)| inner(f, g) / n2).collect()
    }
}

/// Sparse column representation of `d^k/dx^k` from `from` into `to`:
/// entry `[a]` lists `(b, c)` with `(phi_a)^(k) = sum c psi_b`.
pub fn transfer(from: &Basis1d, to: &Basis1d, k: u32) -> Vec<Vec<(usize, Rational)>> {
    from.funcs
        .iter()
        .map(|f| {
            let d = derivative_n(f, k);
            to.coords(&d).into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect()
        })
        .collect()
}

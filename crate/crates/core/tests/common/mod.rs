//! Oracles shared by the integration tests. None of them goes through the
//! library's linear algebra: ranks are computed modulo a large prime,
//! determinants by rational elimination, and cubical complexes are rebuilt
//! from scratch.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use elasticity_core::Rational;
use num::{BigInt, Integer, One, ToPrimitive, Zero};

/// 2^61 - 1
pub const PRIME: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a);
        }
        a = mul_mod(a, a);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64) -> u64 {
    assert!(a != 0, "division by zero mod p");
    pow_mod(a, PRIME - 2)
}

fn bigint_mod(b: &BigInt) -> u64 {
    b.mod_floor(&BigInt::from(PRIME)).to_u64().expect("reduced below p")
}

pub fn rational_mod(r: &Rational) -> u64 {
    mul_mod(bigint_mod(r.numer()), inv_mod(bigint_mod(r.denom())))
}

pub fn int_mod(v: i64) -> u64 {
    v.rem_euclid(PRIME as i64) as u64
}

/// Rank over `Z/p` of the span of sparse vectors. Never exceeds the rank
/// over the rationals and agrees with it unless `p` divides a minor.
pub fn rank_mod_p(vectors: impl IntoIterator<Item = Vec<(usize, u64)>>) -> usize {
    // pivot index -> reduced row with leading coefficient 1 at the pivot
    let mut rows: HashMap<usize, BTreeMap<usize, u64>> = HashMap::new();
    for v in vectors {
        let mut v: BTreeMap<usize, u64> = v.into_iter().filter(|(_, c)| *c != 0).collect();
        while let Some((lead, c)) = v.first_key_value().map(|(k, c)| (*k, *c)) {
            match rows.get(&lead) {
                Some(row) => {
                    for (&k, &r) in row {
                        let e = v.entry(k).or_insert(0);
                        *e = (*e + PRIME - mul_mod(c, r)) % PRIME;
                        if *e == 0 {
                            v.remove(&k);
                        }
                    }
                }
                None => {
                    let inv = inv_mod(c);
                    let row = v.into_iter().map(|(k, x)| (k, mul_mod(x, inv))).collect();
                    rows.insert(lead, row);
                    break;
                }
            }
        }
    }
    rows.len()
}

/// Rank of a matrix given by sparse rational columns.
pub fn rational_rank(columns: &[Vec<(usize, Rational)>]) -> usize {
    rank_mod_p(columns.iter().map(|c| c.iter().map(|(i, v)| (*i, rational_mod(v))).collect()))
}

/// Exact determinant by fraction-carrying Gaussian elimination.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let mut a = m.to_vec();
    let n = a.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if r != c {
            a.swap(r, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    det
}

/// Betti numbers of a union of unit cubes, from integer incidence matrices.
///
/// A `k`-cell is a lower corner plus a bitmask of the directions it spans.
/// Its boundary is `sum_i (-1)^i (upper_i - lower_i)` over the spanned
/// directions in increasing order.
pub fn cubical_betti(cubes: &[[i64; 3]]) -> (Vec<usize>, Vec<usize>) {
    let mut cells: [BTreeMap<([i64; 3], u8), usize>; 4] = Default::default();
    for c in cubes {
        for mask in 0u8..8 {
            for corner in 0u8..8 {
                if corner & mask != 0 {
                    continue;
                }
                let v = [0, 1, 2].map(|d| c[d] + ((corner >> d) & 1) as i64);
                let k = mask.count_ones() as usize;
                let next = cells[k].len();
                cells[k].entry((v, mask)).or_insert(next);
            }
        }
    }
    let counts: Vec<usize> = cells.iter().map(BTreeMap::len).collect();
    let mut ranks = vec![0usize; 5];
    for k in 1..4 {
        let cols = cells[k].keys().map(|&(v, mask)| {
            let mut col = Vec::new();
            let mut sign = 1i64;
            for d in 0..3 {
                if mask & (1 << d) == 0 {
                    continue;
                }
                let face = mask & !(1 << d);
                let mut up = v;
                up[d] += 1;
                col.push((cells[k - 1][&(up, face)], int_mod(sign)));
                col.push((cells[k - 1][&(v, face)], int_mod(-sign)));
                sign = -sign;
            }
            col
        });
        ranks[k] = rank_mod_p(cols);
    }
    let betti = (0..4).map(|k| counts[k] - ranks[k] - ranks[k + 1]).collect();
    (counts, betti)
}

/// Betti numbers of a path graph with `nodes` vertices.
pub fn path_betti(nodes: usize) -> Vec<usize> {
    let edges = nodes.saturating_sub(1);
    let rank = rank_mod_p((0..edges).map(|e| vec![(e, int_mod(-1)), (e + 1, 1)]));
    vec![nodes - rank, edges - rank]
}

//! Exact assembly of a conforming polynomial elasticity complex on the unit box
//!
//! ```text
//!   V0 --symGrad--> V1 --RotRot^T--> V2 --Div--> V3
//! ```
//!
//! with essential boundary conditions on a subset `Γt` of the six faces.
//!
//! Every space is a regular part with face constraints plus the image of the
//! previous operator:
//!
//! | space | kind      | regular part                                | vanishing on `Γt` |
//! |-------|-----------|---------------------------------------------|-------------------|
//! | V0    | vector    | degree `p` in each variable                 | order 1           |
//! | V1    | symmetric | total degree `p - 1`, plus `symGrad V0`     | order 2           |
//! | V2    | symmetric | total degree `p - 3`, plus `RotRot^T V1`    | order 1           |
//! | V3    | vector    | total degree `p - 4`, plus `Div V2`         | none              |
//!
//! A regular part with vanishing order `m` is `w P` with `w` the product of
//! `x^m` / `(1 - x)^m` factors of the constrained faces and the total degree
//! of `w P` bounded as listed. All fields live in `Q_p`, expanded in tensor
//! products of exact orthogonal 1D bases ([`basis1d`]) chosen per level so that
//! each regular part is a set of coordinates. The image part is an exact sparse
//! echelon basis of the image modulo those coordinates. Operators, membership
//! checks and the complex property `A_{n+1} A_n = 0` are exact over the
//! rationals; Gram matrices are then formed in floating point from the exact
//! coefficients.

pub mod basis1d;
pub mod sparse;
pub mod stencil;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use faer::Mat;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::fa_toolbox::{
    cohomology, generalized_eigen, kernel_basis, CohomologyReport, FiniteComplex, InnerProduct, Matrix, RankTol, Vector,
};
use crate::poly_calculus::{div_rows, grad_rows, rotrot_t, sym_grad, Poly3, PolyVecField};
use crate::tensor_algebra::{rat, spn, Vec3, SYM_PAIRS};
use crate::{Error, Rational, Result};

use basis1d::Basis1d;
use sparse::{axpy, from_entries, Echelon, SparseVec};
use stencil::Stencil;

/// Faces of the unit box; `X0` is `{x = 0}`, `X1` is `{x = 1}` and so on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Face {
    X0,
    X1,
    Y0,
    Y1,
    Z0,
    Z1,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::X0, Face::X1, Face::Y0, Face::Y1, Face::Z0, Face::Z1];

    pub fn axis(self) -> usize {
        self as usize / 2
    }

    /// 0 for the face at coordinate 0, 1 for the face at coordinate 1.
    pub fn side(self) -> usize {
        self as usize % 2
    }

    pub fn name(self) -> &'static str {
        ["X0", "X1", "Y0", "Y1", "Z0", "Z1"][self as usize]
    }
}

impl FromStr for Face {
    type Err = Error;
    fn from_str(s: &str) -> Result<Face> {
        Face::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown face `{s}` (expected one of X0, X1, Y0, Y1, Z0, Z1)")))
    }
}

/// The faces `Γt` carrying essential boundary conditions; the remaining faces
/// carry natural ones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BoundarySelection {
    faces: [bool; 6],
}

impl BoundarySelection {
    pub fn none() -> Self {
        BoundarySelection::default()
    }

    pub fn all() -> Self {
        BoundarySelection { faces: [true; 6] }
    }

    pub fn from_faces(faces: &[Face]) -> Self {
        let mut s = BoundarySelection::none();
        for f in faces {
            s.faces[*f as usize] = true;
        }
        s
    }

    pub fn contains(&self, f: Face) -> bool {
        self.faces[f as usize]
    }

    pub fn faces(&self) -> Vec<Face> {
        Face::ALL.into_iter().filter(|f| self.contains(*f)).collect()
    }

    /// Faces carrying natural boundary conditions.
    pub fn complement(&self) -> BoundarySelection {
        BoundarySelection { faces: self.faces.map(|b| !b) }
    }

    pub fn is_empty(&self) -> bool {
        !self.faces.iter().any(|&b| b)
    }

    /// Number of coordinate directions with at least one constrained face.
    pub fn constrained_directions(&self) -> usize {
        (0..3).filter(|&d| self.faces[2 * d] || self.faces[2 * d + 1]).count()
    }

    /// Vanishing orders at the two ends of direction `axis`.
    pub fn orders(&self, axis: usize, order: u32) -> (u32, u32) {
        let o = |b: bool| if b { order } else { 0 };
        (o(self.faces[2 * axis]), o(self.faces[2 * axis + 1]))
    }
}

impl fmt::Display for BoundarySelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        if self.faces.iter().all(|&b| b) {
            return f.write_str("all");
        }
        let names: Vec<&str> = self.faces().into_iter().map(Face::name).collect();
        f.write_str(&names.join(","))
    }
}

/// Accepts `none`, `all` or a comma separated face list such as `X0,Y1`.
impl FromStr for BoundarySelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t.eq_ignore_ascii_case("none") {
            return Ok(BoundarySelection::none());
        }
        if t.eq_ignore_ascii_case("all") {
            return Ok(BoundarySelection::all());
        }
        let faces = t.split(',').map(Face::from_str).collect::<Result<Vec<_>>>()?;
        Ok(BoundarySelection::from_faces(&faces))
    }
}

impl Serialize for BoundarySelection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BoundarySelection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
    SymmetricTensor,
}

impl FieldKind {
    pub fn components(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => 3,
            FieldKind::SymmetricTensor => 6,
        }
    }

    /// Weight of component `c` in the pointwise inner product; off-diagonal
    /// entries of a symmetric tensor appear twice in `S : T`.
    pub fn component_weight(self, c: usize) -> i64 {
        match self {
            FieldKind::SymmetricTensor if SYM_PAIRS[c].0 != SYM_PAIRS[c].1 => 2,
            _ => 1,
        }
    }
}

/// A field as one polynomial per independent component (see [`FieldKind`]).
pub type FieldComponents = Vec<Poly3>;

/// Tensor-product polynomial space with face constraints imposed by factors
/// `x^m` and `(1 - x)^m`, with its exact Gram matrix.
#[derive(Clone, Debug)]
pub struct FieldSpace {
    pub kind: FieldKind,
    pub degree: u32,
    pub vanish_order: u32,
    pub boundary: BoundarySelection,
    pub basis: Vec<FieldComponents>,
    pub gram: Vec<Vec<Rational>>,
}

impl FieldSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn gram_f64(&self) -> Matrix {
        Mat::from_fn(self.dim(), self.dim(), |i, j| self.gram[i][j].to_f64().unwrap_or(f64::NAN))
    }

    /// Exact membership test for a field: per-variable degree at most the
    /// space degree and vanishing to the required order on every constrained face.
    pub fn contains(&self, f: &[Poly3]) -> bool {
        f.len() == self.kind.components()
            && f.iter().all(|c| {
                per_variable_degree(c).iter().all(|&d| d <= self.degree)
                    && self.boundary.faces().into_iter().all(|face| vanishes_on(c, face, self.vanish_order))
            })
    }

    /// Exact L2 inner products `<b_i, f>` of the basis with a field.
    pub fn moments(&self, f: &[Poly3]) -> Vec<Rational> {
        self.basis.iter().map(|b| field_inner(self.kind, b, f)).collect()
    }
}

fn per_variable_degree(p: &Poly3) -> [u32; 3] {
    let mut d = [0; 3];
    for (e, _) in p.terms() {
        for k in 0..3 {
            d[k] = d[k].max(e[k]);
        }
    }
    d
}

fn vanishes_on(p: &Poly3, face: Face, order: u32) -> bool {
    let value = rat(face.side() as i64, 1);
    let mut q = p.clone();
    for _ in 0..order {
        if !q.restrict(face.axis(), &value).is_zero() {
            return false;
        }
        q = crate::poly_calculus::Differentiable::partial(&q, face.axis());
    }
    true
}

/// `int_box f : g` for fields given by components.
pub fn field_inner(kind: FieldKind, f: &[Poly3], g: &[Poly3]) -> Rational {
    let mut s = Rational::zero();
    for (c, (a, b)) in f.iter().zip(g).enumerate() {
        s += (a.clone() * b.clone()).integrate_unit_box() * rat(kind.component_weight(c), 1);
    }
    s
}

fn pow_linear(root_at_one: bool, m: u32) -> [Vec<Rational>; 1] {
    // x^m or (1 - x)^m as a univariate polynomial
    let base = if root_at_one { vec![rat(1, 1), rat(-1, 1)] } else { vec![rat(0, 1), rat(1, 1)] };
    [(0..m).fold(vec![rat(1, 1)], |acc, _| basis1d::mul(&acc, &base))]
}

fn univariate_in(axis: usize, coeffs: &[Rational]) -> Poly3 {
    let mut p = Poly3::zero();
    for (k, c) in coeffs.iter().enumerate() {
        let mut e = [0; 3];
        e[axis] = k as u32;
        p.add_term(e, c.clone());
    }
    p
}

/// Tensor-product space of the given kind: in each direction the factors are
/// `w(x) x^k`, where `w` is the product of `x^m` and/or `(1 - x)^m` for the
/// constrained faces of that direction, and `deg w + k <= p`.
pub fn build_space(kind: FieldKind, p: u32, boundary: BoundarySelection, vanish_order: u32) -> Result<FieldSpace> {
    let mut factors: Vec<Vec<Vec<Rational>>> = Vec::new();
    for axis in 0..3 {
        let (l, r) = boundary.orders(axis, vanish_order);
        let w = basis1d::mul(&pow_linear(false, l)[0], &pow_linear(true, r)[0]);
        let wdeg = (l + r) as i64;
        let count = p as i64 - wdeg + 1;
        if count < 0 {
            return Err(Error::DegreeTooLow(format!(
                "degree {p} cannot carry vanishing order {vanish_order} on both faces of direction {axis}"
            )));
        }
        factors.push(
            (0..count as u32)
                .map(|k| basis1d::mul(&w, &pow_linear(false, k)[0]))
                .collect(),
        );
    }
    let scalars: Vec<Poly3> = {
        let mut out = Vec::new();
        for fx in &factors[0] {
            for fy in &factors[1] {
                for fz in &factors[2] {
                    out.push(univariate_in(0, fx) * univariate_in(1, fy) * univariate_in(2, fz));
                }
            }
        }
        out
    };
    let nc = kind.components();
    let mut basis = Vec::new();
    for c in 0..nc {
        for s in &scalars {
            let mut f = vec![Poly3::zero(); nc];
            f[c] = s.clone();
            basis.push(f);
        }
    }
    // separable structure: <f, g> is a product of 1D integrals
    let ints: Vec<Vec<Vec<Rational>>> = factors
        .iter()
        .map(|fs| fs.iter().map(|a| fs.iter().map(|b| basis1d::inner(a, b)).collect()).collect())
        .collect();
    let (nx, ny, nz) = (factors[0].len(), factors[1].len(), factors[2].len());
    let ns = nx * ny * nz;
    let idx = |s: usize| (s / (ny * nz), (s / nz) % ny, s % nz);
    let n = basis.len();
    let mut gram = vec![vec![Rational::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            let (ca, cb) = (a / ns.max(1), b / ns.max(1));
            if ca != cb {
                continue;
            }
            let (i, j, k) = idx(a % ns);
            let (i2, j2, k2) = idx(b % ns);
            gram[a][b] = &ints[0][i][i2] * &ints[1][j][j2] * &ints[2][k][k2] * rat(kind.component_weight(ca), 1);
        }
    }
    Ok(FieldSpace { kind, degree: p, vanish_order, boundary, basis, gram })
}

/// The six rigid motions `x -> spn(e_i) x` (i = 1..3) and `x -> e_j`.
#[derive(Clone, Debug)]
pub struct RigidMotionBasis {
    pub fields: Vec<PolyVecField>,
}

impl RigidMotionBasis {
    /// Exact Gram matrix over the unit box.
    pub fn gram(&self) -> Vec<Vec<Rational>> {
        let comps: Vec<Vec<Poly3>> = self.fields.iter().map(|f| f.0.to_vec()).collect();
        comps.iter().map(|a| comps.iter().map(|b| field_inner(FieldKind::Vector, a, b)).collect()).collect()
    }
}

pub fn rigid_motion_basis() -> RigidMotionBasis {
    let x = Vec3([Poly3::var(0), Poly3::var(1), Poly3::var(2)]);
    let mut fields = Vec::new();
    for i in 0..3 {
        let mut e = Vec3::<Poly3>::zero();
        e.0[i] = Poly3::from_int(1);
        fields.push(spn(&e).mul_vec(&x));
    }
    for j in 0..3 {
        let mut e = Vec3::<Poly3>::zero();
        e.0[j] = Poly3::from_int(1);
        fields.push(e);
    }
    RigidMotionBasis { fields }
}

/// Exact null space of a dense rational matrix given by rows.
fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.iter().filter(|r| r.iter().any(|c| !c.is_zero())).cloned().collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(k) = (r..m.len()).find(|&k| !m[k][c].is_zero()) else { continue };
        m.swap(r, k);
        let inv = Rational::one() / m[r][c].clone();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for k in 0..m.len() {
            if k != r && !m[k][c].is_zero() {
                let f = m[k][c].clone();
                for j in 0..ncols {
                    let t = &f * &m[r][j];
                    m[k][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

/// Exact coefficient vectors `c` with `sum c_i rm_i` in the space.
fn rigid_motions_in(kind: FieldKind, degree: u32, boundary: BoundarySelection, order: u32) -> Vec<Vec<Rational>> {
    let rm = rigid_motion_basis();
    if kind != FieldKind::Vector {
        return Vec::new();
    }
    // linear conditions: coefficients of face traces of normal derivatives,
    // and of monomials exceeding the per-variable degree
    let mut conds: BTreeMap<(usize, usize, u32, [u32; 3]), Vec<Rational>> = BTreeMap::new();
    for (i, f) in rm.fields.iter().enumerate() {
        for (c, comp) in f.0.iter().enumerate() {
            for face in boundary.faces() {
                let mut q = comp.clone();
                for k in 0..order {
                    let tr = q.restrict(face.axis(), &rat(face.side() as i64, 1));
                    for (e, v) in tr.terms() {
                        conds.entry((face as usize, c, k, *e)).or_insert_with(|| vec![Rational::zero(); 6])[i] += v;
                    }
                    q = crate::poly_calculus::Differentiable::partial(&q, face.axis());
                }
            }
            for (e, v) in comp.terms() {
                if e.iter().any(|&d| d > degree) {
                    conds.entry((6, c, 0, *e)).or_insert_with(|| vec![Rational::zero(); 6])[i] += v;
                }
            }
        }
    }
    let rows: Vec<Vec<Rational>> = conds.into_values().collect();
    nullspace(&rows, 6)
}

/// `G`-orthogonal projector onto the rigid motions contained in a vector space.
pub fn rm_projector(space: &FieldSpace) -> Result<Matrix> {
    if space.kind != FieldKind::Vector {
        return Err(Error::DimensionMismatch(format!("rigid motions need a vector space, got {:?}", space.kind)));
    }
    let n = space.dim();
    let combos = rigid_motions_in(space.kind, space.degree, space.boundary, space.vanish_order);
    if combos.is_empty() || n == 0 {
        return Ok(Mat::zeros(n, n));
    }
    let rm = rigid_motion_basis();
    let g = InnerProduct::new(space.gram_f64())?;
    let mut x = Mat::<f64>::zeros(n, combos.len());
    for (j, c) in combos.iter().enumerate() {
        let mut f = vec![Poly3::zero(); 3];
        for (ci, field) in c.iter().zip(&rm.fields) {
            for k in 0..3 {
                f[k] = f[k].clone() + field.0[k].mul_scalar(ci);
            }
        }
        let b = Mat::from_fn(n, 1, |i, _| space.moments(&f)[i].to_f64().unwrap_or(f64::NAN));
        // G^{-1} b through the Cholesky factor
        let mut y = b;
        g.factor().solve_lower_triangular_in_place(y.as_mut());
        let sol = g.from_euclid(y.as_ref());
        for i in 0..n {
            x[(i, j)] = sol[(i, 0)];
        }
    }
    let gx = g.gram() * &x;
    let small = x.transpose() * &gx;
    let small_inv = invert_spd(&small)?;
    Ok(&x * small_inv * gx.transpose())
}

fn invert_spd(m: &Matrix) -> Result<Matrix> {
    let ip = InnerProduct::new(m.clone())?;
    let li = ip.from_euclid(crate::fa_toolbox::identity(m.nrows()).as_ref());
    Ok(&li * li.transpose())
}

/// Per-level description of an assembled space.
#[derive(Clone, Debug, Serialize)]
pub struct LevelDescriptor {
    pub kind: FieldKind,
    pub vanish_order: u32,
    /// Degree of the regular part (may be below the vanishing order).
    pub regular_degree: i64,
    /// `true` when `regular_degree` bounds the total degree, `false` when it
    /// bounds the degree in each variable separately.
    pub total_degree: bool,
    /// Number of leading 1D basis functions per direction used by the regular part.
    pub regular_prefix: [usize; 3],
    pub regular_dim: usize,
    pub image_dim: usize,
    pub dim: usize,
    pub ambient_dim: usize,
}

struct Level {
    kind: FieldKind,
    order: u32,
    regular_degree: i64,
    bases: [Arc<Basis1d>; 3],
    prefix: [usize; 3],
    /// Bound on `a + b + c` for regular tensor indices when the regular part
    /// has bounded total degree.
    total_budget: Option<i64>,
    regular: Vec<usize>,
    image: Echelon,
    /// Power-of-two factors applied to the echelon rows to form basis vectors.
    image_scale: Vec<Rational>,
    /// Power-of-two factor applied to every basis vector of the level.
    unit: Rational,
}

impl Level {
    fn n1(&self) -> usize {
        self.bases[0].len()
    }

    fn ambient_dim(&self) -> usize {
        self.kind.components() * self.n1().pow(3)
    }

    fn decode(&self, k: usize) -> (usize, [usize; 3]) {
        let n = self.n1();
        let s = n * n * n;
        let r = k % s;
        (k / s, [r / (n * n), (r / n) % n, r % n])
    }

    fn encode(&self, c: usize, i: [usize; 3]) -> usize {
        let n = self.n1();
        c * n * n * n + (i[0] * n + i[1]) * n + i[2]
    }

    fn is_regular(&self, k: usize) -> bool {
        let (_, i) = self.decode(k);
        (0..3).all(|d| i[d] < self.prefix[d]) && self.total_budget.is_none_or(|b| (i[0] + i[1] + i[2]) as i64 <= b)
    }

    fn dim(&self) -> usize {
        self.regular.len() + self.image.rank()
    }

    /// Ambient coordinates of basis vector `j`.
    fn basis_vector(&self, j: usize) -> SparseVec {
        if j < self.regular.len() {
            vec![(self.regular[j], self.unit.clone())]
        } else {
            let r = j - self.regular.len();
            let s = &self.image_scale[r] * &self.unit;
            self.image.rows[r].iter().map(|(k, c)| (*k, c * &s)).collect()
        }
    }

    /// Coordinates in this level's basis of an ambient vector, or `None` if it
    /// is not a member of the space.
    fn coordinates(&self, y: &SparseVec) -> Option<SparseVec> {
        let reg_pos: HashMap<usize, usize> = self.regular.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut out = Vec::new();
        let mut quotient = Vec::new();
        for (k, c) in y {
            match reg_pos.get(k) {
                Some(&i) => out.push((i, c / &self.unit)),
                None => quotient.push((*k, c.clone())),
            }
        }
        let (coeffs, rem) = self.image.reduce(quotient);
        if !rem.is_empty() {
            return None;
        }
        for (j, c) in coeffs {
            out.push((self.regular.len() + j, c / (&self.image_scale[j] * &self.unit)));
        }
        Some(from_entries(out))
    }

    fn mass_diagonal(&self) -> Vec<f64> {
        let n = self.n1();
        let mut out = Vec::with_capacity(self.ambient_dim());
        for c in 0..self.kind.components() {
            let w = self.kind.component_weight(c) as f64;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let m = &self.bases[0].norms2[i] * &self.bases[1].norms2[j] * &self.bases[2].norms2[k];
                        out.push(w * m.to_f64().unwrap_or(f64::NAN));
                    }
                }
            }
        }
        out
    }

    fn basis_matrix(&self) -> Matrix {
        let mut b = Mat::<f64>::zeros(self.ambient_dim(), self.dim());
        for j in 0..self.dim() {
            for (k, c) in self.basis_vector(j) {
                b[(k, j)] = c.to_f64().unwrap_or(f64::NAN);
            }
        }
        b
    }

    fn gram(&self) -> Matrix {
        let b = self.basis_matrix();
        let m = self.mass_diagonal();
        let mb = Mat::from_fn(b.nrows(), b.ncols(), |i, j| m[i] * b[(i, j)]);
        let g = b.transpose() * mb;
        Mat::from_fn(g.nrows(), g.ncols(), |i, j| 0.5 * (g[(i, j)] + g[(j, i)]))
    }

    /// The field with the given ambient coordinates, one polynomial per component.
    fn field(&self, v: &SparseVec) -> FieldComponents {
        let polys: Vec<Vec<Poly3>> =
            (0..3).map(|d| self.bases[d].funcs.iter().map(|f| univariate_in(d, f)).collect()).collect();
        let mut out = vec![Poly3::zero(); self.kind.components()];
        for (k, c) in v {
            let (comp, i) = self.decode(*k);
            let t = polys[0][i[0]].clone() * polys[1][i[1]].clone() * polys[2][i[2]].clone();
            out[comp] = out[comp].clone() + t.mul_scalar(c);
        }
        out
    }

    fn descriptor(&self) -> LevelDescriptor {
        LevelDescriptor {
            kind: self.kind,
            vanish_order: self.order,
            regular_degree: self.regular_degree,
            total_degree: self.total_budget.is_some(),
            regular_prefix: self.prefix,
            regular_dim: self.regular.len(),
            image_dim: self.image.rank(),
            dim: self.dim(),
            ambient_dim: self.ambient_dim(),
        }
    }
}

/// Output components of a differential operator as stencils in the input components.
type OperatorStencil = Vec<Vec<(usize, [u32; 3], Rational)>>;

fn collect(components: Vec<Stencil>) -> OperatorStencil {
    components.into_iter().map(|s| s.terms().map(|(src, a, c)| (src, a, c.clone())).collect()).collect()
}

fn sym_grad_stencil() -> OperatorStencil {
    collect(stencil::sym_components(&sym_grad(&stencil::vector_unknown())))
}

fn grad_stencil() -> OperatorStencil {
    collect(stencil::all_components(&grad_rows(&stencil::vector_unknown())))
}

fn rotrot_stencil() -> OperatorStencil {
    collect(stencil::sym_components(&rotrot_t(&stencil::sym_unknown())))
}

fn div_stencil() -> OperatorStencil {
    collect(div_rows(&stencil::sym_unknown()).0.to_vec())
}

/// A constant-coefficient differential operator between two tensor-product
/// coordinate systems, applied column by column with caching.
struct AmbientOperator {
    stencil: OperatorStencil,
    /// `transfer[d][k]`: 1D matrix of `d^k/dx_d^k`, as sparse columns.
    transfer: [Vec<Vec<Vec<(usize, Rational)>>>; 3],
    n_from: usize,
    n_to: usize,
    cache: HashMap<usize, SparseVec>,
}

impl AmbientOperator {
    fn new(stencil: OperatorStencil, from: &[Arc<Basis1d>; 3], to: &[Arc<Basis1d>; 3]) -> Self {
        let max_order = stencil.iter().flatten().flat_map(|t| t.1).max().unwrap_or(0);
        let transfer = std::array::from_fn(|d| (0..=max_order).map(|k| basis1d::transfer(&from[d], &to[d], k)).collect());
        AmbientOperator { stencil, transfer, n_from: from[0].len(), n_to: to[0].len(), cache: HashMap::new() }
    }

    fn apply_unit(&mut self, k: usize) -> SparseVec {
        if let Some(v) = self.cache.get(&k) {
            return v.clone();
        }
        let n = self.n_from;
        let s = n * n * n;
        let (src, r) = (k / s, k % s);
        let idx = [r / (n * n), (r / n) % n, r % n];
        let m = self.n_to;
        let mut entries = Vec::new();
        for (out, terms) in self.stencil.iter().enumerate() {
            for (tsrc, alpha, coef) in terms {
                if *tsrc != src {
                    continue;
                }
                let cx = &self.transfer[0][alpha[0] as usize][idx[0]];
                let cy = &self.transfer[1][alpha[1] as usize][idx[1]];
                let cz = &self.transfer[2][alpha[2] as usize][idx[2]];
                for (a, va) in cx {
                    let fa = coef * va;
                    for (b, vb) in cy {
                        let fab = &fa * vb;
                        for (c, vc) in cz {
                            entries.push((out * m * m * m + (a * m + b) * m + c, &fab * vc));
                        }
                    }
                }
            }
        }
        let v = from_entries(entries);
        self.cache.insert(k, v.clone());
        v
    }

    fn apply(&mut self, x: &SparseVec) -> SparseVec {
        let mut out = Vec::new();
        for (k, c) in x {
            let col = self.apply_unit(*k);
            out = axpy(&out, c, &col);
        }
        out
    }
}

/// Power of two bringing the Euclidean norm of `v` into `[1/2, 2)`; keeps
/// image basis vectors comparable in scale to the regular unit vectors.
fn balancing_scale(v: &SparseVec) -> Rational {
    let n2: f64 = v.iter().map(|(_, c)| c.to_f64().unwrap_or(0.0).powi(2)).sum();
    inverse_power_of_two(n2.sqrt())
}

/// The power of two nearest to `1 / x` on a log scale.
fn inverse_power_of_two(x: f64) -> Rational {
    let e = -(x.log2().round() as i32);
    if e >= 0 {
        Rational::from_integer(num::BigInt::from(2).pow(e as u32))
    } else {
        Rational::new(num::BigInt::one(), num::BigInt::from(2).pow((-e) as u32))
    }
}

/// Discrete elasticity complex together with its exact construction data.
pub struct AssembledComplex {
    pub p: u32,
    pub boundary: BoundarySelection,
    levels: Vec<Level>,
    /// Exact matrices of `A_0, A_1, A_2` as sparse columns.
    exact_operators: Vec<Vec<SparseVec>>,
    complex: FiniteComplex,
}

impl fmt::Debug for AssembledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AssembledComplex")
            .field("p", &self.p)
            .field("boundary", &self.boundary.to_string())
            .field("dims", &self.complex.dims())
            .finish()
    }
}

/// Kind, vanishing order, degree offset from `p`, and whether the regular
/// part bounds the total degree.
///
/// `V0` is the full tensor-product space. The regular parts of the later
/// spaces bound the total degree: a strain in `Q_{p-1}` can have a
/// displacement of degree `p + 1` in one variable (`symGrad (y^5, -5 x y^4, 0)`
/// is `diag(0, -20 x y^3, 0)`), which would leave spurious harmonic fields,
/// while polynomial potentials of total-degree fields raise the total degree
/// by the order of the operator and stay inside the previous space.
const LEVEL_LAYOUT: [(FieldKind, u32, i64, bool); 4] = [
    (FieldKind::Vector, 1, 0, false),
    (FieldKind::SymmetricTensor, 2, -1, true),
    (FieldKind::SymmetricTensor, 1, -3, true),
    (FieldKind::Vector, 0, -4, true),
];

/// Smallest degree with a nonempty regular part in every space.
pub const MIN_COMPLEX_DEGREE: u32 = 4;

fn level(p: u32, boundary: BoundarySelection, n: usize, cache: &mut HashMap<(u32, u32), Arc<Basis1d>>) -> Level {
    let (kind, order, offset, total) = LEVEL_LAYOUT[n];
    let bases: [Arc<Basis1d>; 3] = std::array::from_fn(|d| {
        let (l, r) = boundary.orders(d, order);
        cache.entry((l, r)).or_insert_with(|| Arc::new(Basis1d::new(p, l, r))).clone()
    });
    let q = p as i64 + offset;
    let (prefix, total_budget) = if total {
        // interior functions of direction d have degrees wdeg_d, wdeg_d + 1, ...
        let wdeg: i64 = bases.iter().map(|b| (b.orders.0 + b.orders.1) as i64).sum();
        let budget = q - wdeg;
        let prefix = std::array::from_fn(|d| if budget < 0 { 0 } else { bases[d].prefix_for_degree(p as i64) });
        (prefix, Some(budget))
    } else {
        (std::array::from_fn(|d| bases[d].prefix_for_degree(q)), None)
    };
    let mut lv = Level {
        kind,
        order,
        regular_degree: q,
        bases,
        prefix,
        total_budget,
        regular: Vec::new(),
        image: Echelon::default(),
        image_scale: Vec::new(),
        unit: Rational::one(),
    };
    for c in 0..kind.components() {
        for i in 0..prefix[0] {
            for j in 0..prefix[1] {
                for k in 0..prefix[2] {
                    let idx = lv.encode(c, [i, j, k]);
                    if lv.is_regular(idx) {
                        lv.regular.push(idx);
                    }
                }
            }
        }
    }
    lv
}

pub fn build_complex(p: u32, boundary: BoundarySelection) -> Result<AssembledComplex> {
    if p < MIN_COMPLEX_DEGREE {
        return Err(Error::DegreeTooLow(format!(
            "the elasticity complex needs p >= {MIN_COMPLEX_DEGREE} (regular part of V3 has degree p - 4), got p = {p}"
        )));
    }
    let mut cache = HashMap::new();
    let mut levels: Vec<Level> = (0..4).map(|n| level(p, boundary, n, &mut cache)).collect();
    let stencils = [sym_grad_stencil(), rotrot_stencil(), div_stencil()];
    let mut exact_operators = Vec::new();
    for (n, st) in stencils.into_iter().enumerate() {
        let (lo, hi) = levels.split_at_mut(n + 1);
        let (from, to) = (&lo[n], &mut hi[0]);
        let mut op = AmbientOperator::new(st, &from.bases, &to.bases);
        // images of the regular part span the image of the whole space,
        // since the previous operator annihilates the image part
        for &k in &from.regular {
            let y = op.apply_unit(k);
            let q: SparseVec = y.into_iter().filter(|(i, _)| !to.is_regular(*i)).collect();
            if to.image.insert(q) {
                let row = to.image.rows.last().expect("just inserted");
                to.image_scale.push(balancing_scale(row));
            }
        }
        let mut cols = Vec::with_capacity(from.dim());
        for j in 0..from.dim() {
            let y = op.apply(&from.basis_vector(j));
            let c = to.coordinates(&y).ok_or_else(|| {
                Error::NotRepresentable(format!("image of basis field {j} of V{n} is not in V{}", n + 1))
            })?;
            cols.push(c);
        }
        exact_operators.push(cols);
    }
    // derivatives of unit-size displacements are large; shrinking the V0
    // basis keeps A0 at unit size so that the float product A1 A0 does not
    // pick up rounding from large cancelling terms
    let largest = exact_operators[0].iter().flatten().map(|(_, c)| c.abs()).max().unwrap_or_else(Rational::one);
    let unit = inverse_power_of_two(largest.to_f64().unwrap_or(1.0));
    for col in &mut exact_operators[0] {
        for (_, c) in col.iter_mut() {
            *c = &*c * &unit;
        }
    }
    levels[0].unit = unit;
    let mut assembled = AssembledComplex { p, boundary, levels, exact_operators, complex: FiniteComplex::unweighted(&[0], vec![])? };
    if !assembled.exact_complex_property() {
        return Err(Error::ComplexProperty("exact composition of consecutive operators is nonzero".into()));
    }
    let grams: Vec<Matrix> = assembled.levels.iter().map(Level::gram).collect();
    let ops: Vec<Matrix> = (0..3).map(|n| assembled.operator_f64(n)).collect();
    assembled.complex = FiniteComplex::from_matrices(grams, ops)?;
    Ok(assembled)
}

impl AssembledComplex {
    pub fn complex(&self) -> &FiniteComplex {
        &self.complex
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Level::dim).collect()
    }

    pub fn descriptors(&self) -> Vec<LevelDescriptor> {
        self.levels.iter().map(Level::descriptor).collect()
    }

    /// Exact sparse columns of `A_n`.
    pub fn exact_operator(&self, n: usize) -> &[SparseVec] {
        &self.exact_operators[n]
    }

    fn operator_f64(&self, n: usize) -> Matrix {
        let cols = &self.exact_operators[n];
        let mut m = Mat::<f64>::zeros(self.levels[n + 1].dim(), cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, c) in col {
                m[(*i, j)] = c.to_f64().unwrap_or(f64::NAN);
            }
        }
        m
    }

    /// Exact composition `A_{n+1} A_n` as sparse columns.
    pub fn exact_composition(&self, n: usize) -> Vec<SparseVec> {
        let outer = &self.exact_operators[n + 1];
        self.exact_operators[n]
            .iter()
            .map(|col| col.iter().fold(Vec::new(), |acc, (i, c)| axpy(&acc, c, &outer[*i])))
            .collect()
    }

    /// `A_1 A_0 = 0` and `A_2 A_1 = 0` over the rationals.
    pub fn exact_complex_property(&self) -> bool {
        (0..2).all(|n| self.exact_composition(n).iter().all(Vec::is_empty))
    }

    /// Basis field `j` of `V_n` as exact polynomials, one per component.
    pub fn basis_field(&self, n: usize, j: usize) -> FieldComponents {
        let lv = &self.levels[n];
        lv.field(&lv.basis_vector(j))
    }

    pub fn kind(&self, n: usize) -> FieldKind {
        self.levels[n].kind
    }

    /// Spectral condition numbers of the Gram matrices.
    pub fn gram_conditioning(&self) -> Vec<f64> {
        (0..4).map(|n| self.complex.gram(n).condition_number()).collect()
    }
}

/// Result of the discrete Korn inequality computation.
#[derive(Clone, Debug, Serialize)]
pub struct KornResult {
    pub p: u32,
    pub boundary: BoundarySelection,
    /// `sup ||Grad v|| / ||symGrad v||` over the admissible fields.
    pub constant: f64,
    /// The infimum of the same quotient; 1 whenever a gradient field is admissible.
    pub min_ratio: f64,
    pub admissible_dim: usize,
    pub rigid_motions: usize,
    /// Coordinates of a maximizing field in the `V0` basis.
    pub extremal: Vec<f64>,
    pub extremal_ratio: f64,
}

fn dense_operator(op: &mut AmbientOperator, from: &Level, rows: usize) -> Matrix {
    let mut m = Mat::<f64>::zeros(rows, from.dim());
    for j in 0..from.dim() {
        for (i, c) in op.apply(&from.basis_vector(j)) {
            m[(i, j)] = c.to_f64().unwrap_or(f64::NAN);
        }
    }
    m
}

fn stiffness(d: &Matrix, mass: &[f64]) -> Matrix {
    let md = Mat::from_fn(d.nrows(), d.ncols(), |i, j| mass[i] * d[(i, j)]);
    let k = d.transpose() * md;
    Mat::from_fn(k.nrows(), k.ncols(), |i, j| 0.5 * (k[(i, j)] + k[(j, i)]))
}

/// Discrete Korn constant on `V0` of degree `p`: the largest generalized
/// eigenvalue of `(Grad, Grad)` against `(symGrad, symGrad)` on the
/// `L2`-orthogonal complement of the rigid motions in the space.
pub fn korn_constant(p: u32, boundary: BoundarySelection) -> Result<KornResult> {
    if p < 2 {
        return Err(Error::DegreeTooLow(format!("Korn constant needs p >= 2, got {p}")));
    }
    let mut cache = HashMap::new();
    let v0 = level(p, boundary, 0, &mut cache);
    let free: [Arc<Basis1d>; 3] = std::array::from_fn(|_| cache.entry((0, 0)).or_insert_with(|| Arc::new(Basis1d::new(p, 0, 0))).clone());
    let target = |kind| Level {
        kind,
        order: 0,
        regular_degree: p as i64,
        bases: free.clone(),
        prefix: [0; 3],
        total_budget: None,
        regular: Vec::new(),
        image: Echelon::default(),
        image_scale: Vec::new(),
        unit: Rational::one(),
    };
    // Grad has 9 unweighted components; a vector level with three times the
    // components has the right mass
    let grad_mass: Vec<f64> = {
        let t = target(FieldKind::Vector).mass_diagonal();
        (0..3).flat_map(|_| t.iter().cloned()).collect()
    };
    let sym_mass = target(FieldKind::SymmetricTensor).mass_diagonal();
    let mut g_op = AmbientOperator::new(grad_stencil(), &v0.bases, &free);
    let mut s_op = AmbientOperator::new(sym_grad_stencil(), &v0.bases, &free);
    let dg = dense_operator(&mut g_op, &v0, grad_mass.len());
    let ds = dense_operator(&mut s_op, &v0, sym_mass.len());
    let k_full = stiffness(&dg, &grad_mass);
    let k_sym = stiffness(&ds, &sym_mass);
    let g0 = v0.gram();
    let n = v0.dim();

    // rigid motions contained in V0, by exact coordinates
    let rm = rigid_motion_basis();
    let combos = rigid_motions_in(FieldKind::Vector, p, boundary, 1);
    let mut r = Mat::<f64>::zeros(n, combos.len());
    for (j, c) in combos.iter().enumerate() {
        let mut entries = Vec::new();
        for (ci, field) in c.iter().zip(&rm.fields) {
            for comp in 0..3 {
                for (e, v) in field.0[comp].terms() {
                    let mono: [Vec<Rational>; 3] = std::array::from_fn(|d| {
                        let mut m = vec![Rational::zero(); e[d] as usize + 1];
                        m[e[d] as usize] = Rational::one();
                        m
                    });
                    let co: Vec<Vec<Rational>> = (0..3).map(|d| v0.bases[d].coords(&mono[d])).collect();
                    for (a, ca) in co[0].iter().enumerate() {
                        for (b, cb) in co[1].iter().enumerate() {
                            for (cc, vc) in co[2].iter().enumerate() {
                                let val = ci * v * ca * cb * vc;
                                if !val.is_zero() {
                                    entries.push((v0.encode(comp, [a, b, cc]), val));
                                }
                            }
                        }
                    }
                }
            }
        }
        let coords = v0.coordinates(&from_entries(entries)).ok_or_else(|| {
            Error::NotRepresentable("rigid motion admitted by the constraints is not in V0".into())
        })?;
        for (i, v) in coords {
            r[(i, j)] = v.to_f64().unwrap_or(f64::NAN);
        }
    }
    // Z: Euclidean orthonormal basis of {x : R^T G0 x = 0}
    let z = if combos.is_empty() {
        crate::fa_toolbox::identity(n)
    } else {
        let rtg = r.transpose() * &g0;
        kernel_basis(&rtg, &InnerProduct::identity(n), RankTol::default())?
    };
    let a = z.transpose() * &k_full * &z;
    let b = InnerProduct::new(z.transpose() * &k_sym * &z)?;
    let (vals, vecs) = generalized_eigen(&a, &b)?;
    let (Some(&max), Some(&min)) = (vals.last(), vals.first()) else {
        return Err(Error::DegreeTooLow("no admissible fields".into()));
    };
    let ext: Vector = &z * vecs.col(vals.len() - 1);
    let num = crate::fa_toolbox::dot(&ext, &(&k_full * &ext));
    let den = crate::fa_toolbox::dot(&ext, &(&k_sym * &ext));
    Ok(KornResult {
        p,
        boundary,
        constant: max.sqrt(),
        min_ratio: min.max(0.0).sqrt(),
        admissible_dim: z.ncols(),
        rigid_motions: combos.len(),
        extremal: (0..n).map(|i| ext[i]).collect(),
        extremal_ratio: (num / den).sqrt(),
    })
}

/// Dimension and basis of the discrete harmonic fields at `V1`, optionally
/// with a weight `W` inserted into the `V1` inner product.
pub fn dirichlet_neumann_fields(
    p: u32,
    boundary: BoundarySelection,
    weight: Option<&Matrix>,
    tol: RankTol,
) -> Result<CohomologyReport> {
    let assembled = build_complex(p, boundary)?;
    let complex = match weight {
        Some(w) => assembled.complex().reweighted(1, w)?,
        None => assembled.complex().clone(),
    };
    cohomology(&complex, 1, tol)
}

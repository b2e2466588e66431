//! Finite-dimensional Hilbert complexes: weighted adjoints, kernels and
//! ranges, cohomology, Helmholtz decompositions, Friedrichs/Poincaré
//! constants and regular decomposition operators.
//!
//! Every weighted computation goes through the Cholesky congruence
//! `G = L L^T`: a vector `x` with `||x||_G` is represented by `y = L^T x`, and an
//! operator `A: (H_d, G_d) -> (H_c, G_c)` by `L_c^T A L_d^{-T}`. In these
//! coordinates adjoints are transposes and a plain SVD does the rest.

pub mod fixtures;

use faer::{Col, Mat, MatRef, Side};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Matrix = Mat<f64>;
pub type Vector = Col<f64>;

/// Row-major dense matrix with explicit dimensions, as stored in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_mat(m: MatRef<'_, f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        DenseMatrix { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_mat(&self) -> Result<Matrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix declared {}x{} but holds {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j]))
    }
}

pub fn identity(n: usize) -> Matrix {
    Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
}

/// Largest absolute entry (0 for an empty matrix).
pub fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].abs());
        }
    }
    out
}

pub fn frobenius(m: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)] * m[(i, j)];
        }
    }
    s.sqrt()
}

pub fn dot(a: &Vector, b: &Vector) -> f64 {
    (0..a.nrows()).map(|i| a[i] * b[i]).sum()
}

fn col_of(m: MatRef<'_, f64>, j: usize) -> Vector {
    Col::from_fn(m.nrows(), |i| m[(i, j)])
}

fn cols(m: MatRef<'_, f64>, start: usize, end: usize) -> Matrix {
    Mat::from_fn(m.nrows(), end - start, |i, j| m[(i, start + j)])
}

/// `B^T B + delta I` with `B` uniform in `[-1, 1]`: a random SPD weight.
pub fn random_spd<R: Rng>(n: usize, delta: f64, rng: &mut R) -> Matrix {
    let b = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
    let mut w = b.transpose() * &b;
    for i in 0..n {
        w[(i, i)] += delta;
    }
    w
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0))
}

/// Symmetric positive definite Gram matrix together with its Cholesky factor.
#[derive(Clone, Debug)]
pub struct InnerProduct {
    gram: Matrix,
    l: Matrix,
    l_inv: Matrix,
}

impl InnerProduct {
    pub fn new(gram: Matrix) -> Result<Self> {
        let n = gram.nrows();
        if gram.ncols() != n {
            return Err(Error::DimensionMismatch(format!("Gram matrix is {}x{}", n, gram.ncols())));
        }
        let asym = max_abs((&gram - gram.transpose()).as_ref());
        if asym > 1e-12 * max_abs(gram.as_ref()).max(1.0) {
            return Err(Error::NotSpd(format!("Gram matrix not symmetric (defect {asym:.3e})")));
        }
        let gram = Mat::from_fn(n, n, |i, j| 0.5 * (gram[(i, j)] + gram[(j, i)]));
        let l = match gram.llt(Side::Lower) {
            Ok(f) => f.L().to_owned(),
            Err(_) => return Err(Error::NotSpd(format!("Cholesky factorization failed on a {n}x{n} Gram matrix"))),
        };
        let mut l_inv = identity(n);
        l.solve_lower_triangular_in_place(l_inv.as_mut());
        Ok(InnerProduct { gram, l, l_inv })
    }

    pub fn identity(n: usize) -> Self {
        InnerProduct { gram: identity(n), l: identity(n), l_inv: identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    /// Lower Cholesky factor `L` with `G = L L^T`.
    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        dot(x, &(&self.gram * y))
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// `L^T x`: coordinates in which the Gram matrix becomes the identity.
    pub fn to_euclid(&self, x: MatRef<'_, f64>) -> Matrix {
        self.l.transpose() * x
    }

    /// `L^{-T} y`, the inverse of [`Self::to_euclid`].
    pub fn from_euclid(&self, y: MatRef<'_, f64>) -> Matrix {
        self.l_inv.transpose() * y
    }

    pub fn to_euclid_vec(&self, x: &Vector) -> Vector {
        self.l.transpose() * x
    }

    pub fn from_euclid_vec(&self, y: &Vector) -> Vector {
        self.l_inv.transpose() * y
    }

    /// The same space with the weight `W` inserted: `G' = L W L^T`.
    pub fn reweighted(&self, w: &Matrix) -> Result<InnerProduct> {
        if w.nrows() != self.dim() || w.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!("weight {}x{} for space of dim {}", w.nrows(), w.ncols(), self.dim())));
        }
        InnerProduct::new(&self.l * w * self.l.transpose())
    }

    /// Spectral condition number of the Gram matrix.
    pub fn condition_number(&self) -> f64 {
        if self.dim() == 0 {
            return 1.0;
        }
        let ev = self.gram.self_adjoint_eigenvalues(Side::Lower).unwrap_or_default();
        let max = ev.iter().cloned().fold(0.0, f64::max);
        let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Rank decision rule. With `relative = None` singular values below
/// `max(m, n) * eps * sigma_max * safety` count as zero; otherwise below
/// `relative * sigma_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTol {
    pub safety: f64,
    pub relative: Option<f64>,
}

impl Default for RankTol {
    fn default() -> Self {
        RankTol { safety: 100.0, relative: None }
    }
}

impl RankTol {
    pub fn relative(r: f64) -> Self {
        RankTol { safety: 100.0, relative: Some(r) }
    }

    pub fn threshold(&self, m: usize, n: usize, sigma_max: f64) -> f64 {
        match self.relative {
            Some(r) => r * sigma_max,
            None => m.max(n) as f64 * f64::EPSILON * sigma_max * self.safety,
        }
    }
}

/// `L_c^T A L_d^{-T}`.
pub fn transformed(a: &Matrix, dom: &InnerProduct, cod: &InnerProduct) -> Matrix {
    cod.l.transpose() * a * dom.l_inv.transpose()
}

/// Full SVD of an operator between weighted spaces, in Euclidean coordinates.
#[derive(Clone, Debug)]
pub struct WeightedSvd {
    /// Singular values in descending order.
    pub sigma: Vec<f64>,
    pub rank: usize,
    pub threshold: f64,
    u: Matrix,
    v: Matrix,
}

impl WeightedSvd {
    pub fn new(a: &Matrix, dom: &InnerProduct, cod: &InnerProduct, tol: RankTol) -> Result<Self> {
        if a.nrows() != cod.dim() || a.ncols() != dom.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator {}x{} between spaces of dims {} -> {}",
                a.nrows(),
                a.ncols(),
                dom.dim(),
                cod.dim()
            )));
        }
        Self::of_euclid(&transformed(a, dom, cod), tol)
    }

    /// SVD of a matrix that is already in Euclidean coordinates.
    pub fn of_euclid(t: &Matrix, tol: RankTol) -> Result<Self> {
        let (m, n) = (t.nrows(), t.ncols());
        if m == 0 || n == 0 {
            return Ok(WeightedSvd { sigma: vec![], rank: 0, threshold: 0.0, u: identity(m), v: identity(n) });
        }
        let svd = t.svd().map_err(|e| Error::SolverFailure(format!("SVD did not converge: {e:?}")))?;
        let s = svd.S().column_vector();
        let sigma: Vec<f64> = (0..m.min(n)).map(|i| s[i]).collect();
        let smax = sigma.first().cloned().unwrap_or(0.0);
        let threshold = tol.threshold(m, n, smax);
        let rank = if smax == 0.0 { 0 } else { sigma.iter().filter(|&&x| x > threshold).count() };
        Ok(WeightedSvd { sigma, rank, threshold, u: svd.U().to_owned(), v: svd.V().to_owned() })
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().cloned().unwrap_or(0.0)
    }

    /// Smallest nonzero singular value.
    pub fn sigma_min_nonzero(&self) -> Option<f64> {
        (self.rank > 0).then(|| self.sigma[self.rank - 1])
    }

    /// Orthonormal basis of the range (codomain, Euclidean coordinates).
    pub fn range(&self) -> Matrix {
        cols(self.u.as_ref(), 0, self.rank)
    }

    /// Orthonormal basis of the orthogonal complement of the range.
    pub fn range_complement(&self) -> Matrix {
        cols(self.u.as_ref(), self.rank, self.u.ncols())
    }

    /// Orthonormal basis of the orthogonal complement of the kernel.
    pub fn coimage(&self) -> Matrix {
        cols(self.v.as_ref(), 0, self.rank)
    }

    pub fn kernel(&self) -> Matrix {
        cols(self.v.as_ref(), self.rank, self.v.ncols())
    }

    /// Pseudo-inverse in Euclidean coordinates.
    pub fn pinv(&self) -> Matrix {
        let vr = Mat::from_fn(self.v.nrows(), self.rank, |i, j| self.v[(i, j)] / self.sigma[j]);
        vr * self.range().transpose()
    }
}

/// Hilbert-space adjoint `A* = G_d^{-1} A^T G_c`.
pub fn adjoint(a: &Matrix, dom: &InnerProduct, cod: &InnerProduct) -> Result<Matrix> {
    if a.nrows() != cod.dim() || a.ncols() != dom.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} between spaces of dims {} -> {}",
            a.nrows(),
            a.ncols(),
            dom.dim(),
            cod.dim()
        )));
    }
    // G_d^{-1} = L_d^{-T} L_d^{-1}
    Ok(dom.l_inv.transpose() * (&dom.l_inv * (a.transpose() * cod.gram())))
}

/// `G`-orthonormal basis (as columns) of the kernel of `A`.
pub fn kernel_basis(a: &Matrix, g: &InnerProduct, tol: RankTol) -> Result<Matrix> {
    let svd = WeightedSvd::new(a, g, &InnerProduct::identity(a.nrows()), tol)?;
    Ok(g.from_euclid(svd.kernel().as_ref()))
}

/// Generalized symmetric eigenproblem `A x = lambda B x`; eigenvalues ascending,
/// eigenvectors `B`-orthonormal.
pub fn generalized_eigen(a: &Matrix, b: &InnerProduct) -> Result<(Vec<f64>, Matrix)> {
    let n = b.dim();
    if n == 0 {
        return Ok((vec![], Mat::zeros(0, 0)));
    }
    let t = &b.l_inv * a * b.l_inv.transpose();
    let t = Mat::from_fn(n, n, |i, j| 0.5 * (t[(i, j)] + t[(j, i)]));
    let eig = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::SolverFailure(format!("eigensolver did not converge: {e:?}")))?;
    let s = eig.S().column_vector();
    let values = (0..n).map(|i| s[i]).collect();
    Ok((values, b.from_euclid(eig.U())))
}

/// Chain `H_0 -> H_1 -> ... -> H_m` of operators between weighted spaces.
#[derive(Clone, Debug)]
pub struct FiniteComplex {
    grams: Vec<InnerProduct>,
    operators: Vec<Matrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexFile {
    pub dims: Vec<usize>,
    pub grams: Vec<DenseMatrix>,
    pub operators: Vec<DenseMatrix>,
}

impl FiniteComplex {
    pub fn new(grams: Vec<InnerProduct>, operators: Vec<Matrix>) -> Result<Self> {
        if grams.is_empty() || operators.len() + 1 != grams.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} spaces need {} operators, got {}",
                grams.len(),
                grams.len().saturating_sub(1),
                operators.len()
            )));
        }
        for (n, a) in operators.iter().enumerate() {
            if a.ncols() != grams[n].dim() || a.nrows() != grams[n + 1].dim() {
                return Err(Error::DimensionMismatch(format!(
                    "operator {n} is {}x{}, spaces have dims {} -> {}",
                    a.nrows(),
                    a.ncols(),
                    grams[n].dim(),
                    grams[n + 1].dim()
                )));
            }
        }
        Ok(FiniteComplex { grams, operators })
    }

    pub fn from_matrices(grams: Vec<Matrix>, operators: Vec<Matrix>) -> Result<Self> {
        let grams = grams.into_iter().map(InnerProduct::new).collect::<Result<Vec<_>>>()?;
        Self::new(grams, operators)
    }

    /// Complex with identity Gram matrices.
    pub fn unweighted(dims: &[usize], operators: Vec<Matrix>) -> Result<Self> {
        Self::new(dims.iter().map(|&d| InnerProduct::identity(d)).collect(), operators)
    }

    pub fn num_spaces(&self) -> usize {
        self.grams.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.grams.iter().map(InnerProduct::dim).collect()
    }

    pub fn dim(&self, n: usize) -> usize {
        self.grams[n].dim()
    }

    pub fn gram(&self, n: usize) -> &InnerProduct {
        &self.grams[n]
    }

    /// `A_n: H_n -> H_{n+1}`.
    pub fn operator(&self, n: usize) -> &Matrix {
        &self.operators[n]
    }

    /// Operator entering `H_n` (zero map from a trivial space when `n = 0`).
    pub fn op_in(&self, n: usize) -> Matrix {
        if n == 0 {
            Mat::zeros(self.dim(0), 0)
        } else {
            self.operators[n - 1].clone()
        }
    }

    /// Operator leaving `H_n` (zero map to a trivial space for the last space).
    pub fn op_out(&self, n: usize) -> Matrix {
        if n + 1 == self.num_spaces() {
            Mat::zeros(0, self.dim(n))
        } else {
            self.operators[n].clone()
        }
    }

    fn gram_or_trivial(&self, n: isize) -> InnerProduct {
        if n < 0 || n as usize >= self.num_spaces() {
            InnerProduct::identity(0)
        } else {
            self.grams[n as usize].clone()
        }
    }

    pub fn svd_in(&self, n: usize, tol: RankTol) -> Result<WeightedSvd> {
        WeightedSvd::new(&self.op_in(n), &self.gram_or_trivial(n as isize - 1), &self.grams[n], tol)
    }

    pub fn svd_out(&self, n: usize, tol: RankTol) -> Result<WeightedSvd> {
        WeightedSvd::new(&self.op_out(n), &self.grams[n], &self.gram_or_trivial(n as isize + 1), tol)
    }

    /// `max |A_{n+1} A_n|`.
    pub fn composition_defect(&self, n: usize) -> f64 {
        max_abs((&self.operators[n + 1] * &self.operators[n]).as_ref())
    }

    pub fn max_composition_defect(&self) -> f64 {
        (0..self.operators.len().saturating_sub(1)).map(|n| self.composition_defect(n)).fold(0.0, f64::max)
    }

    pub fn verify_complex(&self, tol: f64) -> Result<()> {
        for n in 0..self.operators.len().saturating_sub(1) {
            let d = self.composition_defect(n);
            if d > tol {
                return Err(Error::ComplexProperty(format!("max |A{}A{}| = {d:.3e} exceeds {tol:.1e}", n + 1, n)));
            }
        }
        Ok(())
    }

    /// Adjoint of `A_n` with respect to the Gram matrices of the complex.
    pub fn adjoint(&self, n: usize) -> Matrix {
        adjoint(&self.operators[n], &self.grams[n], &self.grams[n + 1]).expect("shapes validated on construction")
    }

    /// Replace the inner product of `H_n` by the weighted one `L W L^T`.
    pub fn reweighted(&self, n: usize, w: &Matrix) -> Result<FiniteComplex> {
        let mut grams = self.grams.clone();
        grams[n] = grams[n].reweighted(w)?;
        FiniteComplex::new(grams, self.operators.clone())
    }

    pub fn to_file(&self) -> ComplexFile {
        ComplexFile {
            dims: self.dims(),
            grams: self.grams.iter().map(|g| DenseMatrix::from_mat(g.gram().as_ref())).collect(),
            operators: self.operators.iter().map(|a| DenseMatrix::from_mat(a.as_ref())).collect(),
        }
    }

    pub fn from_file(file: &ComplexFile) -> Result<Self> {
        if file.grams.len() != file.dims.len() {
            return Err(Error::DimensionMismatch(format!("{} dims but {} Gram matrices", file.dims.len(), file.grams.len())));
        }
        let mut grams = Vec::new();
        for (d, g) in file.dims.iter().zip(&file.grams) {
            let g = g.to_mat()?;
            if g.nrows() != *d {
                return Err(Error::DimensionMismatch(format!("Gram matrix of size {} for a space of dim {d}", g.nrows())));
            }
            grams.push(InnerProduct::new(g)?);
        }
        let ops = file.operators.iter().map(DenseMatrix::to_mat).collect::<Result<Vec<_>>>()?;
        Self::new(grams, ops)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("complex serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }
}

/// Orthonormal basis of `N(A_n) ∩ N(A_{n-1}^*)`.
#[derive(Clone, Debug)]
pub struct CohomologyReport {
    pub index: usize,
    pub dimension: usize,
    /// `G_n`-orthonormal basis vectors as columns.
    pub basis: Matrix,
    /// `dim H_n - rank A_{n-1} - rank A_n`, which must agree with `dimension`.
    pub rank_nullity_dimension: usize,
    pub rank_in: usize,
    pub rank_out: usize,
    pub thresholds: [f64; 2],
    /// `max ||A_n h|| / ||A_n||` over basis vectors.
    pub kernel_residual: f64,
    /// `max ||A_{n-1}^* h|| / ||A_{n-1}||` over basis vectors.
    pub adjoint_residual: f64,
    pub orthonormality_residual: f64,
}

pub fn cohomology(complex: &FiniteComplex, n: usize, tol: RankTol) -> Result<CohomologyReport> {
    let s_in = complex.svd_in(n, tol)?;
    let s_out = complex.svd_out(n, tol)?;
    let g = complex.gram(n);
    let t_out = transformed(&complex.op_out(n), g, &complex.gram_or_trivial(n as isize + 1));
    let t_in = transformed(&complex.op_in(n), &complex.gram_or_trivial(n as isize - 1), g);
    let w = s_in.range_complement();
    let b = &t_out * &w;
    let harm = if b.nrows() == 0 || b.ncols() == 0 {
        w
    } else {
        let svd = b.svd().map_err(|e| Error::SolverFailure(format!("SVD did not converge: {e:?}")))?;
        let s = svd.S().column_vector();
        let thr = tol.threshold(t_out.nrows(), t_out.ncols(), s_out.sigma_max());
        let r = (0..b.nrows().min(b.ncols())).filter(|&i| s[i] > thr).count();
        &w * cols(svd.V(), r, b.ncols()).as_ref()
    };
    let rel = |x: f64, s: f64| if s > 0.0 { x / s } else { x };
    let kernel_residual = (0..harm.ncols())
        .map(|j| rel(frobenius((&t_out * harm.col(j)).as_mat()), s_out.sigma_max()))
        .fold(0.0, f64::max);
    let adjoint_residual = (0..harm.ncols())
        .map(|j| rel(frobenius((t_in.transpose() * harm.col(j)).as_mat()), s_in.sigma_max()))
        .fold(0.0, f64::max);
    let orthonormality_residual = max_abs((harm.transpose() * &harm - identity(harm.ncols())).as_ref());
    let dim = complex.dim(n);
    Ok(CohomologyReport {
        index: n,
        dimension: harm.ncols(),
        basis: g.from_euclid(harm.as_ref()),
        rank_nullity_dimension: dim.saturating_sub(s_in.rank + s_out.rank),
        rank_in: s_in.rank,
        rank_out: s_out.rank,
        thresholds: [s_in.threshold, s_out.threshold],
        kernel_residual,
        adjoint_residual,
        orthonormality_residual,
    })
}

/// Dimensions of all cohomology spaces of the complex.
pub fn betti_numbers(complex: &FiniteComplex, tol: RankTol) -> Result<Vec<usize>> {
    (0..complex.num_spaces()).map(|n| cohomology(complex, n, tol).map(|r| r.dimension)).collect()
}

#[derive(Clone, Debug)]
pub struct HelmholtzResult {
    pub x: Vector,
    /// Component in `R(A_{n-1})`.
    pub range: Vector,
    /// Component in `N(A_n) ∩ N(A_{n-1}^*)`.
    pub harmonic: Vector,
    /// Component in `R(A_n^*)`.
    pub corange: Vector,
    /// `|<x_R, x_H>|, |<x_R, x_R*>|, |<x_H, x_R*>|`, each divided by `||x||^2`.
    pub inner_products: [f64; 3],
    /// `||x - x_R - x_H - x_R*|| / ||x||`.
    pub reconstruction_residual: f64,
    /// `max(||A_n x_H|| / ||A_n||, ||A_{n-1}^* x_H|| / ||A_{n-1}||) / ||x||`.
    pub harmonic_residual: f64,
}

impl HelmholtzResult {
    pub fn max_orthogonality_residual(&self) -> f64 {
        self.inner_products.iter().cloned().fold(0.0, f64::max)
    }
}

/// Precomputed orthogonal projectors for repeated Helmholtz decompositions in `H_n`.
pub struct Helmholtz {
    g: InnerProduct,
    q_range: Matrix,
    q_corange: Matrix,
    t_in: Matrix,
    t_out: Matrix,
    norms: [f64; 2],
}

impl Helmholtz {
    pub fn new(complex: &FiniteComplex, n: usize, tol: RankTol) -> Result<Self> {
        let s_in = complex.svd_in(n, tol)?;
        let s_out = complex.svd_out(n, tol)?;
        let g = complex.gram(n).clone();
        Ok(Helmholtz {
            t_in: transformed(&complex.op_in(n), &complex.gram_or_trivial(n as isize - 1), &g),
            t_out: transformed(&complex.op_out(n), &g, &complex.gram_or_trivial(n as isize + 1)),
            q_range: s_in.range(),
            q_corange: s_out.coimage(),
            norms: [s_in.sigma_max(), s_out.sigma_max()],
            g,
        })
    }

    pub fn decompose(&self, x: &Vector) -> Result<HelmholtzResult> {
        if x.nrows() != self.g.dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} in space of dim {}", x.nrows(), self.g.dim())));
        }
        let y = self.g.to_euclid_vec(x);
        let y_r: Vector = &self.q_range * (self.q_range.transpose() * &y);
        let y_c: Vector = &self.q_corange * (self.q_corange.transpose() * &y);
        let y_h: Vector = &y - &y_r - &y_c;
        let nx2 = dot(&y, &y);
        let scale = if nx2 > 0.0 { nx2 } else { 1.0 };
        let range = self.g.from_euclid_vec(&y_r);
        let corange = self.g.from_euclid_vec(&y_c);
        let harmonic = self.g.from_euclid_vec(&y_h);
        let ip = |a: &Vector, b: &Vector| (self.g.inner(a, b)).abs() / scale;
        let recon: Vector = x - &range - &harmonic - &corange;
        let rel = |v: f64, s: f64| if s > 0.0 { v / s } else { v };
        let h_out = rel(frobenius((&self.t_out * &y_h).as_mat()), self.norms[1]);
        let h_in = rel(frobenius((self.t_in.transpose() * &y_h).as_mat()), self.norms[0]);
        let harmonic_residual = h_out.max(h_in) / scale.sqrt();
        if harmonic_residual > 1e-8 {
            return Err(Error::SolverFailure(format!(
                "harmonic remainder leaves the kernels (residual {harmonic_residual:.3e})"
            )));
        }
        Ok(HelmholtzResult {
            inner_products: [ip(&range, &harmonic), ip(&range, &corange), ip(&harmonic, &corange)],
            reconstruction_residual: self.g.norm(&recon) / scale.sqrt(),
            harmonic_residual,
            x: x.clone(),
            range,
            harmonic,
            corange,
        })
    }
}

pub fn helmholtz(x: &Vector, complex: &FiniteComplex, n: usize, tol: RankTol) -> Result<HelmholtzResult> {
    Helmholtz::new(complex, n, tol)?.decompose(x)
}

/// Friedrichs/Poincaré constant `c = 1 / sigma_min^+` of one operator.
#[derive(Clone, Debug)]
pub struct PoincareConstant {
    pub label: String,
    pub constant: f64,
    pub sigma_min: f64,
    pub rank: usize,
    /// `G_dom`-unit vector in `N(A)^⊥` with `||x|| = c ||A x||`.
    pub extremal: Vector,
    /// `| ||x|| - c ||A x|| | / ||x||` at the extremal vector.
    pub sharpness_residual: f64,
}

pub fn poincare_constant(a: &Matrix, dom: &InnerProduct, cod: &InnerProduct, tol: RankTol) -> Result<PoincareConstant> {
    let svd = WeightedSvd::new(a, dom, cod, tol)?;
    let sigma_min = svd.sigma_min_nonzero().ok_or(Error::ZeroOperator)?;
    let constant = 1.0 / sigma_min;
    let v = col_of(svd.v.as_ref(), svd.rank - 1);
    let extremal = dom.from_euclid_vec(&v);
    let ax: Vector = a * &extremal;
    let nx = dom.norm(&extremal);
    let sharpness_residual = (nx - constant * cod.norm(&ax)).abs() / nx;
    Ok(PoincareConstant { label: String::new(), constant, sigma_min, rank: svd.rank, extremal, sharpness_residual })
}

/// Constants `c_0, c_1, ...` of every operator of the complex (`None` for zero operators).
#[derive(Clone, Debug)]
pub struct PoincareReport {
    pub constants: Vec<Option<PoincareConstant>>,
}

pub fn poincare_report(complex: &FiniteComplex, tol: RankTol) -> Result<PoincareReport> {
    let mut constants = Vec::new();
    for n in 0..complex.num_spaces() - 1 {
        match poincare_constant(complex.operator(n), complex.gram(n), complex.gram(n + 1), tol) {
            Ok(mut c) => {
                c.label = format!("A{n}");
                constants.push(Some(c));
            }
            Err(Error::ZeroOperator) => constants.push(None),
            Err(e) => return Err(e),
        }
    }
    Ok(PoincareReport { constants })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedEstimate {
    pub holds: bool,
    /// `||x||^2`
    pub lhs: f64,
    /// `c_n^2 ||A_n x||^2 + c_{n-1}^2 ||A_{n-1}^* x||^2`
    pub rhs: f64,
    /// `(rhs - lhs) / lhs`
    pub slack: f64,
}

/// Check `||x||^2 <= c_n^2 ||A_n x||^2 + c_{n-1}^2 ||A_{n-1}^* x||^2` for `x ⟂ Harm`.
/// Rounding is absorbed by accepting `lhs <= rhs (1 + 1e-10)`.
pub fn mixed_estimate_check(
    x: &Vector,
    complex: &FiniteComplex,
    n: usize,
    c_in: f64,
    c_out: f64,
    harm: &CohomologyReport,
) -> Result<MixedEstimate> {
    let g = complex.gram(n);
    let nx = g.norm(x);
    let coeffs: Vector = harm.basis.transpose() * (g.gram() * x);
    let proj = coeffs.norm_l2();
    if nx > 0.0 && proj / nx > 1e-8 {
        return Err(Error::NotOrthogonalToHarmonics(proj / nx));
    }
    let out = complex.op_out(n);
    let a_x: Vector = &out * x;
    let out_norm = if n + 1 < complex.num_spaces() { complex.gram(n + 1).norm(&a_x) } else { 0.0 };
    let in_norm = if n > 0 {
        let adj: Vector = complex.adjoint(n - 1) * x;
        complex.gram(n - 1).norm(&adj)
    } else {
        0.0
    };
    let lhs = nx * nx;
    let rhs = c_out * c_out * out_norm * out_norm + c_in * c_in * in_norm * in_norm;
    Ok(MixedEstimate {
        holds: lhs <= rhs * (1.0 + 1e-10),
        lhs,
        rhs,
        slack: if lhs > 0.0 { (rhs - lhs) / lhs } else { 0.0 },
    })
}

/// Weighted pseudo-inverse `P` of `A`: `A P = id` on `R(A)`, `R(P) = N(A)^⊥`.
pub fn reduced_inverse(a: &Matrix, dom: &InnerProduct, cod: &InnerProduct, tol: RankTol) -> Result<Matrix> {
    let svd = WeightedSvd::new(a, dom, cod, tol)?;
    Ok(dom.l_inv.transpose() * svd.pinv() * cod.l.transpose())
}

/// Operator norm of `M: (H_d, G_d) -> (H_c, G_c)`.
pub fn operator_norm(m: &Matrix, dom: &InnerProduct, cod: &InnerProduct) -> Result<f64> {
    Ok(WeightedSvd::new(m, dom, cod, RankTol::default())?.sigma_max())
}

/// Frobenius norm of `L_c^T M L_d^{-T}`; bounds the weighted operator norm from above.
pub fn weighted_frobenius(m: &Matrix, dom: &InnerProduct, cod: &InnerProduct) -> f64 {
    frobenius(transformed(m, dom, cod).as_ref())
}

/// Residuals of the regular decomposition identities, all measured with
/// [`weighted_frobenius`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DecompositionChecks {
    /// `||A_n P_n A_n - A_n|| / ||A_n||`.
    pub potential_defect: f64,
    pub q1_idempotence: f64,
    pub complement_idempotence: f64,
    /// `max(||Q1 N||, ||N Q1||)`.
    pub cross_terms: f64,
    /// `||Q1 K||` for an orthonormal basis `K` of `N(A_n)`.
    pub kernel_annihilation: f64,
    /// `max ||Q1 x|| / (||P_n|| ||A_n x||)` over random test vectors.
    pub bound_ratio: f64,
    /// `||Q1 + A_{n-1} Q0 - id||`.
    pub identity_defect: f64,
    /// `||Q1 + A_{n-1} Q0 + pi_Harm - id||`.
    pub harmonic_identity_defect: f64,
    pub harmonic_dimension: usize,
    pub potential_norm: f64,
}

#[derive(Clone, Debug)]
pub struct DecompositionOperators {
    /// `Q1 = P_n A_n`.
    pub q1: Matrix,
    /// `Q0 = P_{n-1} (1 - Q1)`.
    pub q0: Matrix,
    /// `N = 1 - Q1`.
    pub complement: Matrix,
    pub checks: DecompositionChecks,
}

/// Build `Q1`, `Q0`, `N` from potential operators `P_n` (for `A_n`) and
/// `P_{n-1}` (for `A_{n-1}`) and measure every identity they should satisfy.
///
/// `Q1 + A_{n-1} Q0 = id` needs `A_{n-1} P_{n-1} = id` on all of `N(A_n)`, which
/// only happens when the cohomology at `n` is trivial; in general the harmonic
/// projector closes the gap, and both defects are reported.
pub fn regular_decomposition(
    complex: &FiniteComplex,
    n: usize,
    p_n: &Matrix,
    p_in: &Matrix,
    tol: RankTol,
    check_tol: f64,
) -> Result<DecompositionOperators> {
    let g = complex.gram(n);
    let a = complex.op_out(n);
    let a_in = complex.op_in(n);
    let next = complex.gram_or_trivial(n as isize + 1);
    if p_n.nrows() != g.dim() || p_n.ncols() != a.nrows() || p_in.nrows() != a_in.ncols() || p_in.ncols() != g.dim() {
        return Err(Error::DimensionMismatch("potential operators do not fit the complex".into()));
    }
    let a_norm = weighted_frobenius(&a, g, &next);
    let potential_defect = weighted_frobenius(&(&a * p_n * &a - &a), g, &next) / if a_norm > 0.0 { a_norm } else { 1.0 };
    if potential_defect > check_tol {
        return Err(Error::InvalidPotential(potential_defect));
    }
    let id = identity(g.dim());
    let q1 = p_n * &a;
    let complement = &id - &q1;
    let q0 = p_in * &complement;
    let wf = |m: &Matrix| weighted_frobenius(m, g, g);
    let harm = cohomology(complex, n, tol)?;
    let pi_harm = &harm.basis * (harm.basis.transpose() * g.gram());
    let sum = &q1 + &a_in * &q0;
    let kernel = g.from_euclid(complex.svd_out(n, tol)?.kernel().as_ref());
    let potential_norm = operator_norm(p_n, &next, g)?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(n as u64);
    let mut bound_ratio = 0.0f64;
    for _ in 0..20 {
        let x: Vector = Col::from_fn(g.dim(), |_| rng.random_range(-1.0..=1.0));
        let qx: Vector = &q1 * &x;
        let ax: Vector = &a * &x;
        let denom = potential_norm * next.norm(&ax);
        let num = g.norm(&qx);
        if num > 0.0 {
            bound_ratio = bound_ratio.max(if denom > 0.0 { num / denom } else { f64::INFINITY });
        }
    }
    let checks = DecompositionChecks {
        potential_defect,
        q1_idempotence: wf(&(&q1 * &q1 - &q1)),
        complement_idempotence: wf(&(&complement * &complement - &complement)),
        cross_terms: wf(&(&q1 * &complement)).max(wf(&(&complement * &q1))),
        kernel_annihilation: if kernel.ncols() == 0 {
            0.0
        } else {
            weighted_frobenius(&(&q1 * &kernel), &InnerProduct::identity(kernel.ncols()), g)
        },
        bound_ratio,
        identity_defect: wf(&(&sum - &id)),
        harmonic_identity_defect: wf(&(&sum + &pi_harm - &id)),
        harmonic_dimension: harm.dimension,
        potential_norm,
    };
    Ok(DecompositionOperators { q1, q0, complement, checks })
}

/// Default potentials: reduced inverses of `A_n` and `A_{n-1}`.
pub fn default_decomposition(complex: &FiniteComplex, n: usize, tol: RankTol, check_tol: f64) -> Result<DecompositionOperators> {
    let g = complex.gram(n);
    let next = complex.gram_or_trivial(n as isize + 1);
    let prev = complex.gram_or_trivial(n as isize - 1);
    let p_n = reduced_inverse(&complex.op_out(n), g, &next, tol)?;
    let p_in = reduced_inverse(&complex.op_in(n), &prev, g, tol)?;
    regular_decomposition(complex, n, &p_n, &p_in, tol, check_tol)
}

/// Orthonormal basis (Euclidean) of the column span of `m`.
fn span_basis(m: &Matrix, tol: RankTol) -> Result<Matrix> {
    Ok(WeightedSvd::of_euclid(m, tol)?.range())
}

/// Distance between the spans of two orthonormal bases (projector difference).
fn span_distance(a: &Matrix, b: &Matrix) -> f64 {
    if a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    max_abs((a * a.transpose() - b * b.transpose()).as_ref())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelProjectorReport {
    pub harmonic_dimension: usize,
    /// Rank of `pi_{N(A_{n-1}^*)} N(A_n)`.
    pub image_rank_adjoint: usize,
    /// Rank of `pi_{N(A_n)} N(A_{n-1}^*)`.
    pub image_rank_kernel: usize,
    /// Projector distance of each image span to `Harm`.
    pub span_distances: [f64; 2],
    /// `||pi_{N(A_{n-1}^*)}|_{R(A_{n-1})}||`.
    pub range_annihilation: f64,
    pub spans_equal: bool,
}

/// Project each kernel onto the other and compare the images with `Harm`.
pub fn kernel_projector_images(complex: &FiniteComplex, n: usize, tol: RankTol) -> Result<KernelProjectorReport> {
    let s_in = complex.svd_in(n, tol)?;
    let s_out = complex.svd_out(n, tol)?;
    let harm = cohomology(complex, n, tol)?;
    let h = complex.gram(n).to_euclid(harm.basis.as_ref());
    let adj_kernel = s_in.range_complement();
    let kernel = s_out.kernel();
    let pi_adj = &adj_kernel * adj_kernel.transpose();
    let pi_ker = &kernel * kernel.transpose();
    let img1 = span_basis(&(&pi_adj * &kernel), tol)?;
    let img2 = span_basis(&(&pi_ker * &adj_kernel), tol)?;
    let d1 = span_distance(&img1, &h);
    let d2 = span_distance(&img2, &h);
    let range = s_in.range();
    let range_annihilation = if range.ncols() == 0 { 0.0 } else { max_abs((&pi_adj * &range).as_ref()) };
    Ok(KernelProjectorReport {
        harmonic_dimension: harm.dimension,
        image_rank_adjoint: img1.ncols(),
        image_rank_kernel: img2.ncols(),
        span_distances: [d1, d2],
        range_annihilation,
        spans_equal: d1 <= 1e-8 && d2 <= 1e-8,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreBasisReport {
    /// `max ||A_n b|| / ||A_n||` over the candidate vectors.
    pub kernel_residual: f64,
    /// Rank of `pi_Harm B`; must equal `dim Harm`.
    pub projected_rank: usize,
    /// `dim(Harm ∩ B^⊥)`; must be 0.
    pub harm_perp_dimension: usize,
    /// Projector distance between `N(A_{n-1}^*) ∩ B^⊥` and `R(A_n^*)`.
    pub corange_distance: f64,
    pub passed: bool,
}

/// Verify that the columns of `b` (vectors in `N(A_n)`) form a pre-basis:
/// their harmonic projections are a basis of `Harm`, and cutting
/// `N(A_{n-1}^*)` by `B^⊥` leaves exactly `R(A_n^*)`.
pub fn pre_basis_check(b: &Matrix, complex: &FiniteComplex, n: usize, tol: RankTol) -> Result<PreBasisReport> {
    let harm = cohomology(complex, n, tol)?;
    if b.ncols() != harm.dimension {
        return Err(Error::WrongCardinality { expected: harm.dimension, got: b.ncols() });
    }
    if b.nrows() != complex.dim(n) {
        return Err(Error::DimensionMismatch(format!("vectors of length {} in space of dim {}", b.nrows(), complex.dim(n))));
    }
    let g = complex.gram(n);
    let s_in = complex.svd_in(n, tol)?;
    let s_out = complex.svd_out(n, tol)?;
    let t_out = transformed(&complex.op_out(n), g, &complex.gram_or_trivial(n as isize + 1));
    let bt = g.to_euclid(b.as_ref());
    let h = g.to_euclid(harm.basis.as_ref());
    let rel = if s_out.sigma_max() > 0.0 { s_out.sigma_max() } else { 1.0 };
    let kernel_residual = (0..bt.ncols())
        .map(|j| frobenius((&t_out * bt.col(j)).as_mat()) / rel / frobenius(bt.col(j).as_mat()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    // coefficients of pi_Harm B in the harmonic basis
    let coeff = h.transpose() * &bt;
    let coeff_svd = WeightedSvd::of_euclid(&coeff, RankTol::relative(1e-10))?;
    let projected_rank = coeff_svd.rank;
    // Harm ∩ B^⊥: h c with B^T h c = 0, i.e. kernel of coeff^T
    let harm_perp_dimension = harm.dimension - WeightedSvd::of_euclid(&coeff.transpose().to_owned(), RankTol::relative(1e-10))?.rank;
    // N(A_{n-1}^*) ∩ B^⊥
    let w = s_in.range_complement();
    let c = bt.transpose() * &w;
    let cut = if c.nrows() == 0 {
        w.clone()
    } else {
        let k = WeightedSvd::of_euclid(&c, RankTol::relative(1e-10))?.kernel();
        &w * &k
    };
    let corange_distance = span_distance(&cut, &s_out.coimage());
    let passed = kernel_residual <= 1e-8
        && projected_rank == harm.dimension
        && harm_perp_dimension == 0
        && corange_distance <= 1e-8;
    Ok(PreBasisReport { kernel_residual, projected_rank, harm_perp_dimension, corange_distance, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path_gradient(nodes: usize) -> Matrix {
        Mat::from_fn(nodes - 1, nodes, |e, v| {
            if v == e + 1 {
                1.0
            } else if v == e {
                -1.0
            } else {
                0.0
            }
        })
    }

    fn spd(n: usize, seed: u64) -> InnerProduct {
        InnerProduct::new(random_spd(n, 0.1, &mut ChaCha8Rng::seed_from_u64(seed))).unwrap()
    }

    #[test]
    fn unweighted_adjoint_is_transpose() {
        let a = random_matrix(3, 4, &mut ChaCha8Rng::seed_from_u64(1));
        let adj = adjoint(&a, &InnerProduct::identity(4), &InnerProduct::identity(3)).unwrap();
        assert!(max_abs((adj - a.transpose()).as_ref()) < 1e-15);
    }

    #[test]
    fn weighted_adjoint_pairing_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(5, 4, &mut rng);
        let (gd, gc) = (spd(4, 3), spd(5, 4));
        let adj = adjoint(&a, &gd, &gc).unwrap();
        for _ in 0..10 {
            let x: Vector = Col::from_fn(4, |_| rng.random_range(-1.0..1.0));
            let y: Vector = Col::from_fn(5, |_| rng.random_range(-1.0..1.0));
            let lhs = gc.inner(&(&a * &x), &y);
            let rhs = gd.inner(&x, &(&adj * &y));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
        let back = adjoint(&adj, &gc, &gd).unwrap();
        assert!(max_abs((back - &a).as_ref()) <= 1e-12 * max_abs(a.as_ref()));
    }

    #[test]
    fn adjoint_errors() {
        let a = identity(2);
        assert!(matches!(adjoint(&a, &InnerProduct::identity(3), &InnerProduct::identity(2)), Err(Error::DimensionMismatch(_))));
        let not_spd = Mat::from_fn(2, 2, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(matches!(InnerProduct::new(not_spd), Err(Error::NotSpd(_))));
    }

    #[test]
    fn kernel_basis_examples() {
        let g3 = InnerProduct::identity(3);
        assert_eq!(kernel_basis(&Mat::zeros(3, 3), &g3, RankTol::default()).unwrap().ncols(), 3);
        assert_eq!(kernel_basis(&identity(3), &g3, RankTol::default()).unwrap().ncols(), 0);
        let k = kernel_basis(&path_gradient(4), &InnerProduct::identity(4), RankTol::default()).unwrap();
        assert_eq!(k.ncols(), 1);
        let s = k[(0, 0)];
        for i in 0..4 {
            assert!((k[(i, 0)] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn cohomology_of_zero_maps() {
        let c = FiniteComplex::unweighted(&[1, 2, 1], vec![Mat::zeros(2, 1), Mat::zeros(1, 2)]).unwrap();
        let r = cohomology(&c, 1, RankTol::default()).unwrap();
        assert_eq!(r.dimension, 2);
        assert_eq!(r.rank_nullity_dimension, 2);
    }

    #[test]
    fn poincare_examples() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { [0.0, 2.0, 3.0][i] } else { 0.0 });
        let g = InnerProduct::identity(3);
        let c = poincare_constant(&a, &g, &g, RankTol::default()).unwrap();
        assert!((c.constant - 0.5).abs() < 1e-14);
        assert!((c.extremal[1].abs() - 1.0).abs() < 1e-14 && c.extremal[0].abs() < 1e-14);
        assert!(c.sharpness_residual < 1e-10);

        let c = poincare_constant(&path_gradient(3), &g, &InnerProduct::identity(2), RankTol::default()).unwrap();
        assert!((c.constant - 1.0).abs() < 1e-12);

        assert!(matches!(poincare_constant(&Mat::zeros(3, 3), &g, &g, RankTol::default()), Err(Error::ZeroOperator)));
    }

    #[test]
    fn reduced_inverse_examples() {
        let g = InnerProduct::identity(2);
        let a = Mat::from_fn(2, 2, |i, j| [[2.0, 1.0], [1.0, 3.0]][i][j]);
        let p = reduced_inverse(&a, &g, &g, RankTol::default()).unwrap();
        assert!(max_abs((&a * &p - identity(2)).as_ref()) < 1e-14);

        let row = Mat::from_fn(1, 2, |_, j| [1.0, -1.0][j]);
        let p = reduced_inverse(&row, &g, &InnerProduct::identity(1), RankTol::default()).unwrap();
        assert!(((&row * &p)[(0, 0)] - 1.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_matrix(4, 6, &mut rng) * random_matrix(6, 6, &mut rng);
        let (gd, gc) = (spd(6, 9), spd(4, 10));
        let p = reduced_inverse(&a, &gd, &gc, RankTol::default()).unwrap();
        let c = poincare_constant(&a, &gd, &gc, RankTol::default()).unwrap();
        let norm = operator_norm(&p, &gc, &gd).unwrap();
        assert!((norm - c.constant).abs() <= 1e-10 * c.constant);
    }

    #[test]
    fn json_roundtrip() {
        let c = FiniteComplex::from_matrices(vec![identity(3), random_spd(2, 0.1, &mut ChaCha8Rng::seed_from_u64(1))], vec![path_gradient(3)]).unwrap();
        let back = FiniteComplex::from_json(&c.to_json()).unwrap();
        assert_eq!(back.to_json(), c.to_json());
    }
}

//! Randomized exact verification of the elementary operator identities of the
//! elasticity complex, the two Leibniz rules used when multiplying by a cutoff
//! function, and the commutation of the operators with partial derivatives.
//!
//! Every case is a list of clauses `lhs_scale * lhs == rhs`. A case passes when
//! every clause holds exactly on every random polynomial sample. Hypotheses such
//! as "S skew" are imposed by construction (skw/dev/sym of a random field).

use std::collections::BTreeMap;

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::poly_calculus::{
    div, div_rows, grad, grad_rows, mat_text, partial_mat, partial_vec, random_mat_field, random_poly,
    random_rational, random_vec_field, rot, rot_rows, rotrot_t, vec_text, Poly3, PolyMatField, PolyVecField,
};
use crate::tensor_algebra::{dev, skw, spn, spn_inv, sym, tr, Mat3, Scalar, Vec3};
use crate::{Error, Rational, Result};

/// Value of one side of an identity.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldValue {
    Scalar(Poly3),
    Vector(PolyVecField),
    Matrix(PolyMatField),
}

impl FieldValue {
    pub fn shape(&self) -> &'static str {
        match self {
            FieldValue::Scalar(_) => "scalar",
            FieldValue::Vector(_) => "vector",
            FieldValue::Matrix(_) => "matrix",
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldValue::Scalar(p) => p.is_zero(),
            FieldValue::Vector(v) => v.is_zero(),
            FieldValue::Matrix(m) => m.is_zero(),
        }
    }

    fn scaled(&self, k: i64) -> FieldValue {
        match self {
            FieldValue::Scalar(p) => FieldValue::Scalar(p.mul_scalar(&Rational::from_integer(k.into()))),
            FieldValue::Vector(v) => FieldValue::Vector(v.scale(k, 1)),
            FieldValue::Matrix(m) => FieldValue::Matrix(m.scale(k, 1)),
        }
    }

    /// Add 1 to the constant coefficient of the first entry.
    fn bumped(&self) -> FieldValue {
        let one = Poly3::from_int(1);
        match self {
            FieldValue::Scalar(p) => FieldValue::Scalar(p.clone() + one),
            FieldValue::Vector(v) => {
                let mut v = v.clone();
                v.0[0] = v.0[0].clone() + one;
                FieldValue::Vector(v)
            }
            FieldValue::Matrix(m) => {
                let mut m = m.clone();
                m.0[0][0] = m.0[0][0].clone() + one;
                FieldValue::Matrix(m)
            }
        }
    }

    pub fn text(&self) -> String {
        match self {
            FieldValue::Scalar(p) => p.to_string(),
            FieldValue::Vector(v) => vec_text(v),
            FieldValue::Matrix(m) => mat_text(m),
        }
    }
}

/// Constraint imposed on the random tensor field `S` of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    None,
    Skew,
    Traceless,
    Symmetric,
}

/// One random instance of every input an identity may consume.
#[derive(Clone, Debug)]
pub struct Sample {
    pub u: Poly3,
    pub v: PolyVecField,
    pub w: PolyVecField,
    pub s: PolyMatField,
    pub s2: PolyMatField,
    pub a: Rational,
    pub b: Rational,
    /// Random affine function.
    pub affine: Poly3,
    /// Random rational point.
    pub x0: [Rational; 3],
    /// Matrix field vanishing at `x0`.
    pub vanishing: PolyMatField,
    /// Cubic whose Hessian vanishes at `x0`.
    pub flat_cubic: Poly3,
    /// Multi-index with total order at most the degree bound.
    pub alpha: [u32; 3],
}

fn constrain(m: PolyMatField, hyp: Hypothesis) -> PolyMatField {
    match hyp {
        Hypothesis::None => m,
        Hypothesis::Skew => skw(&m),
        Hypothesis::Traceless => dev(&m),
        Hypothesis::Symmetric => sym(&m).to_mat(),
    }
}

fn shifted(axis: usize, x0: &[Rational; 3]) -> Poly3 {
    Poly3::var(axis) - Poly3::constant(x0[axis].clone())
}

impl Sample {
    pub fn draw<R: Rng>(rng: &mut R, degree: u32, hyp: Hypothesis) -> Sample {
        let u = random_poly(rng, degree);
        let v = random_vec_field(rng, degree);
        let w = random_vec_field(rng, degree);
        let s = constrain(random_mat_field(rng, degree), hyp);
        let s2 = constrain(random_mat_field(rng, degree), hyp);
        let a = random_rational(rng, false);
        let b = random_rational(rng, false);
        let affine = random_poly(rng, 1);
        let x0 = [random_rational(rng, false), random_rational(rng, false), random_rational(rng, false)];
        let lin = shifted(rng.random_range(0..3), &x0);
        let vanishing = constrain(random_mat_field(rng, degree.saturating_sub(1)), hyp).map(|p| p.clone() * lin.clone());
        let mut flat_cubic = Poly3::constant(random_rational(rng, true));
        for _ in 0..3 {
            flat_cubic = flat_cubic * shifted(rng.random_range(0..3), &x0);
        }
        let total = rng.random_range(0..=degree);
        let mut alpha = [0u32; 3];
        for _ in 0..total {
            alpha[rng.random_range(0..3)] += 1;
        }
        Sample { u, v, w, s, s2, a, b, affine, x0, vanishing, flat_cubic, alpha }
    }

    fn text(&self) -> String {
        format!(
            "u = {}; v = {}; w = {}; S = {}; alpha = {:?}",
            self.u,
            vec_text(&self.v),
            vec_text(&self.w),
            mat_text(&self.s),
            self.alpha
        )
    }
}

type Eval = fn(&Sample) -> FieldValue;

/// `lhs_scale * lhs == rhs`.
pub struct Clause {
    pub statement: &'static str,
    pub lhs_scale: i64,
    pub lhs: Eval,
    pub rhs: Eval,
}

pub struct IdentityCase {
    pub id: &'static str,
    /// Where the identity comes from, e.g. `bullet 3`.
    pub source: &'static str,
    pub hypothesis: Hypothesis,
    pub clauses: Vec<Clause>,
    /// Clause perturbed by the mutation run.
    pub mutate: usize,
}

/// Serializable registry entry (the content of `identities.json`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityInfo {
    pub id: String,
    pub source: String,
    pub hypothesis: Hypothesis,
    pub clauses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub clause: String,
    pub inputs: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub trials: usize,
    pub degree: u32,
    pub seed: u64,
    pub mutated: bool,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

use FieldValue::{Matrix as M, Scalar as S, Vector as V};

fn mat_of_scalar(u: &Poly3) -> PolyMatField {
    Mat3::scalar_identity(u)
}

/// `spn^{-1}` of a tensor that is skew by construction.
fn axial(m: &PolyMatField) -> PolyVecField {
    spn_inv(m).expect("argument is skew by construction")
}

fn axial_skw(m: &PolyMatField) -> PolyVecField {
    axial(&skw(m))
}

fn sym_m(m: &PolyMatField) -> PolyMatField {
    sym(m).to_mat()
}

/// `Psi(phi, S) = RotRot^T(phi S) - phi RotRot^T S - 2 sym((spn grad phi) Rot S)`,
/// the remainder of the Leibniz rule for `RotRot^T`. It is expected to be
/// algebraic in the Hessian of `phi` and in `S`.
pub fn derive_psi(phi: &Poly3, s: &PolyMatField) -> PolyMatField {
    let first = rotrot_t(&s.times(phi));
    let second = rotrot_t(s).times(phi);
    let third = sym(&spn(&grad(phi)).mul_mat(&rot_rows(s))).to_mat().scale(2, 1);
    first - second - third
}

fn psi_at_point(phi: &Poly3, s: &PolyMatField, x0: &[Rational; 3]) -> FieldValue {
    M(derive_psi(phi, s).map(|p| Poly3::constant(p.eval(x0))))
}

fn clause(statement: &'static str, lhs_scale: i64, lhs: Eval, rhs: Eval) -> Clause {
    Clause { statement, lhs_scale, lhs, rhs }
}

fn case(id: &'static str, source: &'static str, hypothesis: Hypothesis, clauses: Vec<Clause>) -> IdentityCase {
    IdentityCase { id, source, hypothesis, clauses, mutate: 0 }
}

/// All registered cases in their canonical order.
pub fn registry() -> Vec<IdentityCase> {
    use Hypothesis::*;
    let mut cases = vec![
        case("ELA-A01", "bullet 1", None, vec![
            clause("(spn v) w = v x w", 1, |x| V(spn(&x.v).mul_vec(&x.w)), |x| V(x.v.cross(&x.w))),
            clause("v x w = -(spn w) v", 1, |x| V(x.v.cross(&x.w)), |x| V(-spn(&x.w).mul_vec(&x.v))),
        ]),
        case("ELA-A02", "bullet 2", None, vec![
            clause("sym spn v = 0", 1, |x| M(sym_m(&spn(&x.v))), |_| M(Mat3::zero())),
            clause("dev(u id) = 0", 1, |x| M(dev(&mat_of_scalar(&x.u))), |_| M(Mat3::zero())),
        ]),
        case("ELA-A03", "bullet 3", None, vec![
            clause("tr Grad v = div v", 1, |x| S(tr(&grad_rows(&x.v))), |x| S(div(&x.v))),
            clause("2 skw Grad v = spn rot v", 2, |x| M(skw(&grad_rows(&x.v))), |x| M(spn(&rot(&x.v)))),
        ]),
        case("ELA-A04", "bullet 4", None, vec![
            clause("Div(u id) = grad u", 1, |x| V(div_rows(&mat_of_scalar(&x.u))), |x| V(grad(&x.u))),
            clause("Rot(u id) = -spn grad u", 1, |x| M(rot_rows(&mat_of_scalar(&x.u))), |x| M(-spn(&grad(&x.u)))),
        ]),
        case("ELA-A05", "bullet 5", None, vec![
            clause("Div spn v = -rot v", 1, |x| V(div_rows(&spn(&x.v))), |x| V(-rot(&x.v))),
            clause("Div skw S = -rot spn^-1 skw S", 1, |x| V(div_rows(&skw(&x.s))), |x| V(-rot(&axial_skw(&x.s)))),
        ]),
        case("ELA-A06", "bullet 6", None, vec![
            clause("Rot spn v = (div v) id - (Grad v)^T", 1, |x| M(rot_rows(&spn(&x.v))), |x| {
                M(mat_of_scalar(&div(&x.v)) - grad_rows(&x.v).transpose())
            }),
            clause("Rot skw S = (div spn^-1 skw S) id - (Grad spn^-1 skw S)^T", 1, |x| M(rot_rows(&skw(&x.s))), |x| {
                let q = axial_skw(&x.s);
                M(mat_of_scalar(&div(&q)) - grad_rows(&q).transpose())
            }),
        ]),
        case("ELA-A07", "bullet 7", None, vec![clause(
            "dev Rot spn v = -(dev Grad v)^T",
            1,
            |x| M(dev(&rot_rows(&spn(&x.v)))),
            |x| M(-dev(&grad_rows(&x.v)).transpose()),
        )]),
        case("ELA-A08", "bullet 8", None, vec![
            clause("-2 Rot sym Grad v = 2 Rot skw Grad v", -2, |x| M(rot_rows(&sym_m(&grad_rows(&x.v)))), |x| {
                M(rot_rows(&skw(&grad_rows(&x.v))).scale(2, 1))
            }),
            clause("2 Rot skw Grad v = -(Grad rot v)^T", 2, |x| M(rot_rows(&skw(&grad_rows(&x.v)))), |x| {
                M(-grad_rows(&rot(&x.v)).transpose())
            }),
        ]),
        case("ELA-A09", "bullet 9", None, vec![
            clause("2 spn^-1 skw Rot S = Div S^T - grad tr S", 2, |x| V(axial_skw(&rot_rows(&x.s))), |x| {
                V(div_rows(&x.s.transpose()) - grad(&tr(&x.s)))
            }),
            clause("Div S^T - grad tr S = Div(S - (tr S) id)^T", 1, |x| V(div_rows(&x.s.transpose()) - grad(&tr(&x.s))), |x| {
                V(div_rows(&(x.s.clone() - mat_of_scalar(&tr(&x.s))).transpose()))
            }),
        ]),
        case("ELA-A10", "bullet 10", None, vec![clause(
            "tr Rot S = 2 div spn^-1 skw S",
            1,
            |x| S(tr(&rot_rows(&x.s))),
            |x| S(div(&axial_skw(&x.s)).scale(2, 1)),
        )]),
        case("ELA-A11", "bullet 11", None, vec![clause(
            "2 (Grad spn^-1 skw S)^T = (tr Rot skw S) id - 2 Rot skw S",
            2,
            |x| M(grad_rows(&axial_skw(&x.s)).transpose()),
            |x| {
                let r = rot_rows(&skw(&x.s));
                M(mat_of_scalar(&tr(&r)) - r.scale(2, 1))
            },
        )]),
        case("ELA-A12", "bullet 12", None, vec![clause(
            "3 Div(dev Grad v)^T = 2 grad div v",
            3,
            |x| V(div_rows(&dev(&grad_rows(&x.v)).transpose())),
            |x| V(grad(&div(&x.v)).scale(2, 1)),
        )]),
        case("ELA-A13", "bullet 13", None, vec![
            clause("2 Rot sym Grad v = -2 Rot skw Grad v", 2, |x| M(rot_rows(&sym_m(&grad_rows(&x.v)))), |x| {
                M(rot_rows(&skw(&grad_rows(&x.v))).scale(-2, 1))
            }),
            clause("-2 Rot skw Grad v = -Rot spn rot v", -2, |x| M(rot_rows(&skw(&grad_rows(&x.v)))), |x| {
                M(-rot_rows(&spn(&rot(&x.v))))
            }),
            clause("-Rot spn rot v = (Grad rot v)^T", -1, |x| M(rot_rows(&spn(&rot(&x.v)))), |x| {
                M(grad_rows(&rot(&x.v)).transpose())
            }),
        ]),
        case("ELA-A14", "bullet 14", None, vec![
            clause("2 Div sym Rot S = -2 Div skw Rot S", 2, |x| V(div_rows(&sym_m(&rot_rows(&x.s)))), |x| {
                V(div_rows(&skw(&rot_rows(&x.s))).scale(-2, 1))
            }),
            clause("-2 Div skw Rot S = rot Div S^T", -2, |x| V(div_rows(&skw(&rot_rows(&x.s)))), |x| {
                V(rot(&div_rows(&x.s.transpose())))
            }),
        ]),
        case("ELA-A15", "bullet 15", None, vec![clause(
            "Rot(Rot sym S)^T = sym Rot(Rot S)^T",
            1,
            |x| M(rotrot_t(&sym_m(&x.s))),
            |x| M(sym_m(&rotrot_t(&x.s))),
        )]),
        case("ELA-A16", "bullet 16", None, vec![clause(
            "Rot(Rot skw S)^T = skw Rot(Rot S)^T",
            1,
            |x| M(rotrot_t(&skw(&x.s))),
            |x| M(skw(&rotrot_t(&x.s))),
        )]),
        case("ELA-A17", "bullet 1, conditional clause", Skew, vec![clause(
            "(spn v)(spn^-1 S) = -S v, if sym S = 0",
            1,
            |x| V(spn(&x.v).mul_vec(&axial(&x.s))),
            |x| V(-x.s.mul_vec(&x.v)),
        )]),
        case("ELA-A18", "bullet 4, consequence 1", None, vec![clause(
            "rot Div(u id) = 0",
            1,
            |x| V(rot(&div_rows(&mat_of_scalar(&x.u)))),
            |_| V(Vec3::zero()),
        )]),
        case("ELA-A19", "bullet 4, consequence 2", None, vec![clause(
            "rot spn^-1 Rot(u id) = 0",
            1,
            |x| V(rot(&axial(&rot_rows(&mat_of_scalar(&x.u))))),
            |_| V(Vec3::zero()),
        )]),
        case("ELA-A20", "bullet 4, consequence 3", None, vec![clause(
            "sym Rot(u id) = 0",
            1,
            |x| M(sym_m(&rot_rows(&mat_of_scalar(&x.u)))),
            |_| M(Mat3::zero()),
        )]),
        case("ELA-A21", "bullet 5, consequence", None, vec![clause(
            "div Div skw S = 0",
            1,
            |x| S(div(&div_rows(&skw(&x.s)))),
            |_| S(Poly3::zero()),
        )]),
        case("ELA-A22", "bullet 9, consequence 1", None, vec![clause(
            "rot Div S^T = 2 rot spn^-1 skw Rot S",
            1,
            |x| V(rot(&div_rows(&x.s.transpose()))),
            |x| V(rot(&axial_skw(&rot_rows(&x.s))).scale(2, 1)),
        )]),
        case("ELA-A23", "bullet 9, consequence 2", Traceless, vec![clause(
            "2 skw Rot S = spn Div S^T, if tr S = 0",
            2,
            |x| M(skw(&rot_rows(&x.s))),
            |x| M(spn(&div_rows(&x.s.transpose()))),
        )]),
        case("ELA-A24", "bullet 10, consequence 1", Symmetric, vec![clause(
            "tr Rot S = 0, if skw S = 0",
            1,
            |x| S(tr(&rot_rows(&x.s))),
            |_| S(Poly3::zero()),
        )]),
        case("ELA-A25", "bullet 10, consequences 2 and 3", None, vec![
            clause("tr Rot sym S = 0", 1, |x| S(tr(&rot_rows(&sym_m(&x.s)))), |_| S(Poly3::zero())),
            clause("tr Rot skw S = tr Rot S", 1, |x| S(tr(&rot_rows(&skw(&x.s)))), |x| S(tr(&rot_rows(&x.s)))),
        ]),
        case("ELA-CUT1", "cutoff Leibniz rule for Div", Symmetric, vec![clause(
            "Div(phi T) = phi Div T + T grad phi",
            1,
            |x| V(div_rows(&x.s.times(&x.u))),
            |x| V(div_rows(&x.s).times(&x.u) + x.s.mul_vec(&grad(&x.u))),
        )]),
        case("ELA-CUT2", "cutoff Leibniz rule for RotRot^T", Symmetric, vec![
            clause("Psi(phi, S) = 0 for affine phi", 1, |x| M(derive_psi(&x.affine, &x.s)), |_| M(Mat3::zero())),
            clause("Psi(phi, a S1 + b S2) = a Psi(phi, S1) + b Psi(phi, S2)", 1, |x| {
                M(derive_psi(&x.u, &(x.s.times(&Poly3::constant(x.a.clone())) + x.s2.times(&Poly3::constant(x.b.clone())))))
            }, |x| {
                M(derive_psi(&x.u, &x.s).times(&Poly3::constant(x.a.clone()))
                    + derive_psi(&x.u, &x.s2).times(&Poly3::constant(x.b.clone())))
            }),
            clause("Psi(phi1 + phi2, S) = Psi(phi1, S) + Psi(phi2, S)", 1, |x| {
                M(derive_psi(&(x.u.clone() + x.v.0[0].clone()), &x.s))
            }, |x| M(derive_psi(&x.u, &x.s) + derive_psi(&x.v.0[0], &x.s))),
            clause("Psi(phi, S + Z)(x0) = Psi(phi, S)(x0) for Z(x0) = 0", 1, |x| {
                psi_at_point(&x.u, &(x.s.clone() + x.vanishing.clone()), &x.x0)
            }, |x| psi_at_point(&x.u, &x.s, &x.x0)),
            clause("Psi(phi + q, S)(x0) = Psi(phi, S)(x0) for Hess q(x0) = 0", 1, |x| {
                psi_at_point(&(x.u.clone() + x.flat_cubic.clone()), &x.s, &x.x0)
            }, |x| psi_at_point(&x.u, &x.s, &x.x0)),
        ]),
        case("ELA-SCHWARZ", "commutation with partial derivatives", None, vec![
            clause("RotRot^T d^alpha S = d^alpha RotRot^T S", 1, |x| M(rotrot_t(&partial_mat(&x.s, x.alpha))), |x| {
                M(partial_mat(&rotrot_t(&x.s), x.alpha))
            }),
            clause("Div d^alpha T = d^alpha Div T", 1, |x| V(div_rows(&partial_mat(&x.s2, x.alpha))), |x| {
                V(partial_vec(&div_rows(&x.s2), x.alpha))
            }),
        ]),
    ];
    // the clause carrying an explicit coefficient is the natural mutation target
    for c in &mut cases {
        c.mutate = c.clauses.iter().position(|cl| cl.lhs_scale != 1).unwrap_or(0);
    }
    cases
}

pub fn registry_info() -> Vec<IdentityInfo> {
    registry()
        .iter()
        .map(|c| IdentityInfo {
            id: c.id.to_string(),
            source: c.source.to_string(),
            hypothesis: c.hypothesis,
            clauses: c.clauses.iter().map(|cl| cl.statement.to_string()).collect(),
        })
        .collect()
}

/// Pretty JSON listing of the registry.
pub fn registry_json() -> String {
    serde_json::to_string_pretty(&registry_info()).expect("registry serializes") + "\n"
}

pub fn find_case(id: &str) -> Result<IdentityCase> {
    registry().into_iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownIdentity(id.to_string()))
}

/// FNV-1a, used to give every case its own random stream.
fn stream_of(id: &str) -> u64 {
    id.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

pub fn run_case(case: &IdentityCase, trials: usize, degree: u32, seed: u64, mutated: bool) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_of(case.id));
    let mut counterexample = None;
    'trials: for trial in 0..trials {
        let sample = Sample::draw(&mut rng, degree, case.hypothesis);
        for (k, cl) in case.clauses.iter().enumerate() {
            let raw = (cl.lhs)(&sample);
            let mut scale = cl.lhs_scale;
            let mut lhs = raw.scaled(scale);
            if mutated && k == case.mutate {
                scale += 1;
                lhs = raw.scaled(scale);
                if raw.is_zero() {
                    lhs = lhs.bumped();
                }
            }
            let rhs = (cl.rhs)(&sample);
            if lhs.shape() != rhs.shape() || lhs != rhs {
                counterexample = Some(Counterexample {
                    trial,
                    clause: cl.statement.to_string(),
                    inputs: sample.text(),
                    lhs: lhs.text(),
                    rhs: rhs.text(),
                });
                break 'trials;
            }
        }
    }
    VerificationReport {
        id: case.id.to_string(),
        trials,
        degree,
        seed,
        mutated,
        passed: counterexample.is_none(),
        counterexample,
    }
}

/// Check one registered identity on `trials` random exact samples.
pub fn run_identity(id: &str, trials: usize, degree: u32, seed: u64) -> Result<VerificationReport> {
    Ok(run_case(&find_case(id)?, trials, degree, seed, false))
}

/// Same as [`run_identity`] with a single coefficient of the identity perturbed;
/// a sound harness must report a failure.
pub fn run_mutation(id: &str, trials: usize, degree: u32, seed: u64) -> Result<VerificationReport> {
    Ok(run_case(&find_case(id)?, trials, degree, seed, true))
}

/// Run every case (or the ones listed in `only`), ordered by id.
pub fn run_all(only: &[String], trials: usize, degree: u32, seed: u64, mutated: bool) -> Result<Vec<VerificationReport>> {
    let cases = registry();
    for id in only {
        if !cases.iter().any(|c| c.id == id) {
            return Err(Error::UnknownIdentity(id.clone()));
        }
    }
    let mut out: BTreeMap<&str, VerificationReport> = BTreeMap::new();
    for c in cases.iter().filter(|c| only.is_empty() || only.iter().any(|o| o == c.id)) {
        out.insert(c.id, run_case(c, trials, degree, seed, mutated));
    }
    Ok(out.into_values().collect())
}

/// JSON-lines rendering of a batch of reports.
pub fn reports_to_jsonl(reports: &[VerificationReport]) -> String {
    reports.iter().map(|r| serde_json::to_string(r).expect("report serializes") + "\n").collect()
}

fn single_report(id: &str, equal: bool, lhs: &FieldValue, rhs: &FieldValue) -> VerificationReport {
    VerificationReport {
        id: id.to_string(),
        trials: 1,
        degree: 0,
        seed: 0,
        mutated: false,
        passed: equal,
        counterexample: (!equal).then(|| Counterexample {
            trial: 0,
            clause: id.to_string(),
            inputs: String::new(),
            lhs: lhs.text(),
            rhs: rhs.text(),
        }),
    }
}

/// Exact check of `Div(phi T) = phi Div T + T grad phi` for the given inputs.
pub fn leibniz_div(phi: &Poly3, t: &PolyMatField) -> VerificationReport {
    let lhs = V(div_rows(&t.times(phi)));
    let rhs = V(div_rows(t).times(phi) + t.mul_vec(&grad(phi)));
    single_report("ELA-CUT1", lhs == rhs, &lhs, &rhs)
}

/// Exact check that `RotRot^T` and `Div` commute with `d^alpha` on `s`.
pub fn schwarz_check(alpha: [u32; 3], s: &PolyMatField) -> VerificationReport {
    let l1 = M(rotrot_t(&partial_mat(s, alpha)));
    let r1 = M(partial_mat(&rotrot_t(s), alpha));
    let l2 = V(div_rows(&partial_mat(s, alpha)));
    let r2 = V(partial_vec(&div_rows(s), alpha));
    if l1 != r1 {
        return single_report("ELA-SCHWARZ", false, &l1, &r1);
    }
    single_report("ELA-SCHWARZ", l2 == r2, &l2, &r2)
}

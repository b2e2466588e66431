mod common;

use elasticity_core::elasticity_assembly::*;
use elasticity_core::fa_toolbox::{random_spd, max_abs, RankTol};
use elasticity_core::poly_calculus::{div_rows, rotrot_t, sym_grad, Poly3};
use elasticity_core::tensor_algebra::{rat, sym_index, Mat3, Vec3, SYM_PAIRS};
use elasticity_core::{Error, Rational};
use faer::Mat;
use num::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gt(s: &str) -> BoundarySelection {
    s.parse().unwrap()
}

fn sym_matrix(f: &[Poly3]) -> Mat3<Poly3> {
    Mat3::from_fn(|i, j| f[sym_index(i, j)].clone())
}

/// The continuous operator applied with the polynomial calculus.
fn apply(n: usize, f: &[Poly3]) -> Vec<Poly3> {
    match n {
        0 => {
            let m = sym_grad(&Vec3([f[0].clone(), f[1].clone(), f[2].clone()]));
            SYM_PAIRS.iter().map(|&(i, j)| m.entry(i, j).clone()).collect()
        }
        1 => {
            let m = rotrot_t(&sym_matrix(f));
            SYM_PAIRS.iter().map(|&(i, j)| m.entry(i, j).clone()).collect()
        }
        _ => div_rows(&sym_matrix(f)).0.to_vec(),
    }
}

fn combine(fields: &[Vec<Poly3>], column: &[(usize, Rational)], components: usize) -> Vec<Poly3> {
    let mut out = vec![Poly3::zero(); components];
    for (i, c) in column {
        for k in 0..components {
            out[k] = out[k].clone() + fields[*i][k].mul_scalar(c);
        }
    }
    out
}

#[test]
fn operator_columns_match_polynomial_calculus() {
    for selection in ["none", "X0"] {
        let a = build_complex(4, gt(selection)).unwrap();
        let dims = a.dims();
        for n in 0..3 {
            let targets: Vec<Vec<Poly3>> = (0..dims[n + 1]).map(|i| a.basis_field(n + 1, i)).collect();
            let comps = a.kind(n + 1).components();
            // every third column keeps the run short; the stride hits both
            // regular and image basis vectors
            for j in (0..dims[n]).step_by(3) {
                let lhs = apply(n, &a.basis_field(n, j));
                let rhs = combine(&targets, &a.exact_operator(n)[j], comps);
                assert_eq!(lhs, rhs, "column {j} of A{n} for {selection}");
            }
        }
    }
}

#[test]
fn compositions_vanish_exactly_and_in_floats() {
    for p in [4, 5] {
        for selection in ["none", "X0", "X0,X1", "all"] {
            let a = build_complex(p, gt(selection)).unwrap();
            assert!(a.exact_complex_property());
            for n in 0..2 {
                assert!(a.exact_composition(n).iter().all(Vec::is_empty));
                assert!(a.complex().composition_defect(n) <= 1e-12, "p={p} {selection} n={n}");
            }
        }
    }
}

#[test]
fn essential_conditions_hold_on_constrained_faces() {
    let a = build_complex(4, gt("X0,Y1")).unwrap();
    let dims = a.dims();
    let faces = [(0usize, rat(0, 1)), (1usize, rat(1, 1))];
    for j in 0..dims[0] {
        for c in a.basis_field(0, j) {
            for (axis, v) in &faces {
                assert!(c.restrict(*axis, v).is_zero(), "displacement {j} does not vanish");
            }
        }
    }
    // stresses carry zero traction S n on the constrained faces
    for j in 0..dims[2] {
        let s = sym_matrix(&a.basis_field(2, j));
        for (axis, v) in &faces {
            for i in 0..3 {
                assert!(s.entry(i, *axis).restrict(*axis, v).is_zero(), "traction of stress {j}");
            }
        }
    }
}

#[test]
fn rigid_motion_kernel_by_exact_rank() {
    for (selection, expected) in [("none", 6), ("X0", 0), ("Y1", 0), ("X0,X1", 0), ("all", 0)] {
        let a = build_complex(4, gt(selection)).unwrap();
        let nullity = a.dims()[0] - common::rational_rank(a.exact_operator(0));
        assert_eq!(nullity, expected, "{selection}");
    }
}

#[test]
fn rigid_motions_have_zero_strain_and_known_gram() {
    let rm = rigid_motion_basis();
    for f in &rm.fields {
        assert!(sym_grad(f).is_zero());
    }
    // frozen with an independent symbolic computation: det = 1/216
    assert_eq!(common::determinant(&rm.gram()), rat(1, 216));
}

#[test]
fn rigid_motion_projector() {
    let space = build_space(FieldKind::Vector, 2, BoundarySelection::none(), 1).unwrap();
    let p = rm_projector(&space).unwrap();
    let g = space.gram_f64();
    assert!(max_abs((&p * &p - &p).as_ref()) < 1e-10);
    assert!(max_abs((&g * &p - p.transpose() * &g).as_ref()) < 1e-10);
    let rank = faer::linalg::solvers::Svd::new(p.as_ref())
        .unwrap()
        .S()
        .column_vector()
        .iter()
        .filter(|s| **s > 1e-8)
        .count();
    assert_eq!(rank, 6);

    // the coordinates of a rigid motion are fixed by the projector
    let rm = rigid_motion_basis();
    let f: Vec<Poly3> = (0..3).map(|k| rm.fields[1].0[k].clone() + rm.fields[3].0[k].mul_scalar(&rat(2, 1))).collect();
    assert!(space.contains(&f));
    // without constraints the basis is the monomials x^a y^b z^c per component
    let coords = Mat::from_fn(space.dim(), 1, |i, _| {
        let (c, e) = (i / 27, i % 27);
        num::ToPrimitive::to_f64(&f[c].coeff([(e / 9) as u32, (e / 3 % 3) as u32, (e % 3) as u32])).unwrap()
    });
    assert!(max_abs((&p * &coords - &coords).as_ref()) < 1e-10);

    let clamped = build_space(FieldKind::Vector, 2, gt("X0"), 1).unwrap();
    assert_eq!(max_abs(rm_projector(&clamped).unwrap().as_ref()), 0.0);
    assert!(rm_projector(&build_space(FieldKind::SymmetricTensor, 1, BoundarySelection::none(), 1).unwrap()).is_err());
}

#[test]
fn space_examples() {
    let s = build_space(FieldKind::Vector, 2, gt("X0"), 1).unwrap();
    assert_eq!(s.dim(), 3 * 2 * 3 * 3);
    for f in &s.basis {
        assert!(s.contains(f));
    }
    for (i, j) in [(0, 0), (1, 4), (5, 5), (20, 20)] {
        assert_eq!(s.gram[i][j], field_inner(s.kind, &s.basis[i], &s.basis[j]));
    }
    assert!(matches!(build_space(FieldKind::Scalar, 1, BoundarySelection::all(), 1), Ok(sp) if sp.dim() == 0));
    assert!(matches!(build_space(FieldKind::Scalar, 3, BoundarySelection::all(), 2), Ok(sp) if sp.dim() == 0));
    assert!(matches!(build_space(FieldKind::Scalar, 2, BoundarySelection::all(), 2), Err(Error::DegreeTooLow(_))));
    assert!(matches!(build_complex(3, BoundarySelection::none()), Err(Error::DegreeTooLow(_))));
}

#[test]
fn korn_constants() {
    let free = korn_constant(3, BoundarySelection::none()).unwrap();
    assert_eq!(free.rigid_motions, 6);
    assert!(free.constant >= 1.0 && free.constant.is_finite());
    // gradients of scalar fields are symmetric, so the infimum is one
    assert!((free.min_ratio - 1.0).abs() < 1e-8);
    assert!((free.extremal_ratio - free.constant).abs() < 1e-8 * free.constant);

    let mut last = 0.0;
    for p in 2..=5 {
        let k = korn_constant(p, gt("X0")).unwrap();
        assert_eq!(k.rigid_motions, 0);
        assert!(k.constant >= last * (1.0 - 1e-10), "p={p}: {} < {last}", k.constant);
        last = k.constant;
    }
    assert!(matches!(korn_constant(1, BoundarySelection::none()), Err(Error::DegreeTooLow(_))));
}

#[test]
fn harmonic_fields_agree_with_rank_identity() {
    let tol = RankTol::default();
    for selection in ["none", "X0"] {
        let a = build_complex(4, gt(selection)).unwrap();
        let dims = a.dims();
        let rank0 = common::rational_rank(a.exact_operator(0));
        let rank1 = common::rational_rank(a.exact_operator(1));
        let expected = dims[1] - rank1 - rank0;
        let report = dirichlet_neumann_fields(4, gt(selection), None, tol).unwrap();
        assert_eq!(report.dimension, expected, "{selection}");
        assert_eq!(report.rank_nullity_dimension, expected);
        let w = random_spd(dims[1], 0.1, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(dirichlet_neumann_fields(4, gt(selection), Some(&w), tol).unwrap().dimension, expected);
    }
    assert_eq!(dirichlet_neumann_fields(4, BoundarySelection::none(), None, tol).unwrap().dimension, 0);
    let x0: Vec<usize> =
        [4, 5].iter().map(|&p| dirichlet_neumann_fields(p, gt("X0"), None, tol).unwrap().dimension).collect();
    assert_eq!(x0[0], x0[1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rigid_motions_lie_in_free_displacements(c in proptest::array::uniform6(-9i64..9)) {
        let rm = rigid_motion_basis();
        let f: Vec<Poly3> = (0..3)
            .map(|k| (0..6).fold(Poly3::zero(), |acc, i| acc + rm.fields[i].0[k].mul_scalar(&rat(c[i], 1))))
            .collect();
        let s = sym_grad(&Vec3([f[0].clone(), f[1].clone(), f[2].clone()]));
        prop_assert!(s.is_zero());
        let space = build_space(FieldKind::Vector, 1, BoundarySelection::none(), 1).unwrap();
        prop_assert!(space.contains(&f));
    }

    #[test]
    fn selections_round_trip(mask in 0u8..64) {
        let faces: Vec<Face> = Face::ALL.iter().copied().filter(|f| mask & (1 << (*f as u8)) != 0).collect();
        let s = BoundarySelection::from_faces(&faces);
        prop_assert_eq!(s.to_string().parse::<BoundarySelection>().unwrap(), s);
        prop_assert_eq!(s.complement().faces().len(), 6 - faces.len());
    }
}

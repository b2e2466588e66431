mod common;

use elasticity_core::fa_toolbox::fixtures::{
    cubical_complex, named_fixtures, path_graph_complex, solid_box_cubes, solid_torus_cubes,
};
use elasticity_core::fa_toolbox::*;
use elasticity_core::reports::{cmd_fixture, load_fixture, RunConfig};
use faer::Col;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");

fn fixture_path(name: &str) -> String {
    format!("{FIXTURE_DIR}/{name}.json")
}

#[test]
fn betti_numbers_match_incidence_ranks() {
    let tol = RankTol::default();
    for nodes in [1, 3, 4, 7] {
        let c = path_graph_complex(nodes);
        assert_eq!(betti_numbers(&c, tol).unwrap(), common::path_betti(nodes), "path of {nodes}");
    }
    for (cubes, expected) in [(solid_box_cubes(3), vec![1, 0, 0, 0]), (solid_torus_cubes(), vec![1, 1, 0, 0])] {
        let (counts, oracle) = common::cubical_betti(&cubes);
        assert_eq!(oracle, expected);
        let c = cubical_complex(&cubes);
        assert_eq!(c.dims(), counts);
        assert_eq!(betti_numbers(&c, tol).unwrap(), oracle);
    }
    // two disjoint cubes and a hollow shell
    let pair = vec![[0, 0, 0], [2, 0, 0]];
    assert_eq!(betti_numbers(&cubical_complex(&pair), tol).unwrap(), common::cubical_betti(&pair).1);
    let shell: Vec<[i64; 3]> = solid_box_cubes(3).into_iter().filter(|c| *c != [1, 1, 1]).collect();
    let (_, b) = common::cubical_betti(&shell);
    assert_eq!(b, vec![1, 0, 1, 0]);
    assert_eq!(betti_numbers(&cubical_complex(&shell), tol).unwrap(), b);
}

#[test]
fn shipped_fixtures_match_generators() {
    let regenerate = std::env::var_os("REGENERATE_FIXTURES").is_some();
    for (name, complex) in named_fixtures() {
        let path = fixture_path(name);
        if regenerate {
            std::fs::write(&path, complex.to_json()).unwrap();
        }
        let shipped = load_fixture(&path).unwrap();
        assert_eq!(shipped.to_json(), complex.to_json(), "{name} is stale; rerun with REGENERATE_FIXTURES=1");
    }
}

#[test]
fn broken_fixture_is_rejected() {
    let c = load_fixture(&fixture_path("broken_complex")).unwrap();
    assert!(c.composition_defect(0) > 0.5);
    assert!(c.verify_complex(1e-12).is_err());
    let cfg = RunConfig { fixture: Some(fixture_path("broken_complex")), ..RunConfig::default() };
    let outcome = cmd_fixture(&cfg).unwrap();
    assert!(!outcome.passed);
    assert!(outcome.diagnostics.iter().any(|d| d.contains("A1 A0")), "{:?}", outcome.diagnostics);
}

#[test]
fn fixture_runs_pass() {
    for name in ["path3", "path4", "solid_box", "solid_torus"] {
        let cfg = RunConfig { fixture: Some(fixture_path(name)), ..RunConfig::default() };
        let outcome = cmd_fixture(&cfg).unwrap();
        assert!(outcome.passed, "{name}: {:?}", outcome.diagnostics);
    }
}

#[test]
fn torus_harmonics_are_seen_from_both_kernels() {
    let c = cubical_complex(&solid_torus_cubes());
    let r = kernel_projector_images(&c, 1, RankTol::default()).unwrap();
    assert_eq!(r.harmonic_dimension, 1);
    assert_eq!((r.image_rank_adjoint, r.image_rank_kernel), (1, 1));
    assert!(r.spans_equal, "{r:?}");
    assert!(r.range_annihilation < 1e-10);
}

#[test]
fn decomposition_identities_on_fixtures() {
    let tol = RankTol::default();
    for (name, c) in named_fixtures() {
        for n in 0..c.num_spaces() {
            let d = default_decomposition(&c, n, tol, 1e-10).unwrap().checks;
            assert!(d.harmonic_identity_defect < 1e-10, "{name} n={n}: {d:?}");
            if d.harmonic_dimension == 0 {
                assert!(d.identity_defect < 1e-10, "{name} n={n}: {d:?}");
            }
            assert!(d.q1_idempotence < 1e-10 && d.kernel_annihilation < 1e-10, "{name} n={n}: {d:?}");
            assert!(d.potential_defect < 1e-10);
            assert!(d.bound_ratio <= 1.0 + 1e-10);
        }
    }
}

#[test]
fn helmholtz_on_the_torus() {
    let c = cubical_complex(&solid_torus_cubes());
    let h = Helmholtz::new(&c, 1, RankTol::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x: Vector = Col::from_fn(c.dim(1), |_| rng.random_range(-1.0..1.0));
        let r = h.decompose(&x).unwrap();
        assert!(r.reconstruction_residual < 1e-10);
        assert!(r.max_orthogonality_residual() < 1e-10);
        assert!(r.harmonic.norm_l2() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weights_do_not_change_betti_numbers(seed in any::<u64>(), n in 0usize..4) {
        let c = cubical_complex(&solid_torus_cubes());
        let w = random_spd(c.dim(n), 0.1, &mut ChaCha8Rng::seed_from_u64(seed));
        let cw = c.reweighted(n, &w).unwrap();
        prop_assert_eq!(betti_numbers(&cw, RankTol::default()).unwrap(), vec![1, 1, 0, 0]);
    }
}

use genflow::catalog;
use genflow::liealg::{
    jacobiator, killing_endo, mean_curvature, moment_map_mu, ricci, scalar_curvature,
    structure_report, LieBracket,
};
use genflow::multilinear::{theta_action, Endomorphism};
use genflow::sample;
use proptest::prelude::*;
use rand::Rng;

fn mu_of(name: &str) -> LieBracket {
    catalog::entry(name)
        .unwrap()
        .spec
        .to_dorfman()
        .unwrap()
        .mu()
        .clone()
}

fn sym_defect(m: &Endomorphism) -> f64 {
    (m - m.transpose()).abs().max()
}

#[test]
fn structure_reports_of_catalog_algebras() {
    let so3 = structure_report(&mu_of("so3"), 1e-9);
    assert!(so3.is_lie && !so3.is_solvable && so3.is_unimodular);
    let sol3 = structure_report(&mu_of("sol3"), 1e-9);
    assert!(sol3.is_solvable && !sol3.is_nilpotent && sol3.is_unimodular);
    let aff = structure_report(&mu_of("aff1"), 1e-9);
    assert!(aff.is_solvable && !aff.is_unimodular);
    let n4 = structure_report(&mu_of("n4"), 1e-9);
    assert!(n4.is_nilpotent && n4.lower_central_length == 3);
    let ab = structure_report(&mu_of("abelian:n=5"), 1e-9);
    assert!(ab.is_nilpotent && ab.lower_central_length == 0);
}

#[test]
fn jacobi_failure_is_located() {
    // mu(e1,e2) = e3, mu(e2,e3) = e2
    let mu = LieBracket::from_entries(3, &[(0, 1, 2, 1.0), (1, 2, 1, 1.0)]);
    let j = jacobiator(&mu);
    assert!(j.max_abs() > 0.5);
    assert_eq!(j.get(0, 1, 2).unwrap(), vec![0.0, 0.0, -1.0]);
}

#[test]
fn so3_and_aff1_curvature() {
    let so3 = mu_of("so3");
    assert!((killing_endo(&so3) + Endomorphism::identity(3, 3) * 2.0).abs().max() < 1e-15);
    assert!((ricci(&so3) - Endomorphism::identity(3, 3) * 0.5).abs().max() < 1e-15);
    assert!((scalar_curvature(&so3) - 1.5).abs() < 1e-15);
    // aff(1) is the real hyperbolic plane
    let aff = mu_of("aff1");
    assert!((ricci(&aff) + Endomorphism::identity(2, 2)).abs().max() < 1e-15);
    assert_eq!(mean_curvature(&aff), vec![1.0, 0.0]);
}

#[test]
fn catalog_solvable_algebras_have_nonpositive_scalar_curvature() {
    for e in catalog::catalog() {
        let mu = e.spec.to_dorfman().unwrap().mu().clone();
        if structure_report(&mu, 1e-9).is_solvable {
            assert!(scalar_curvature(&mu) <= 1e-14, "{}", e.spec.name);
        }
    }
}

fn random_bracket(seed: u64, n: usize) -> LieBracket {
    let mut r = sample::rng(seed);
    if seed % 2 == 0 {
        sample::random_nilpotent(&mut r, n)
    } else {
        sample::random_solvable(&mut r, n)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moment_map_defining_identity(seed in any::<u64>(), n in 3usize..=5) {
        let mu = random_bracket(seed, n);
        let m = moment_map_mu(&mu);
        let mut r = sample::rng(seed ^ 0xabc);
        for _ in 0..20 {
            let a = Endomorphism::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
            let lhs = (&m * a.transpose()).trace();
            let rhs = 0.25 * theta_action(&a, &mu).unwrap().inner(&mu);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * mu.norm2().max(1.0));
        }
    }

    #[test]
    fn nilpotent_ricci_is_the_moment_map(seed in any::<u64>(), n in 3usize..=6) {
        let mut r = sample::rng(seed);
        let mu = sample::random_nilpotent(&mut r, n);
        prop_assert!((ricci(&mu) - moment_map_mu(&mu)).abs().max() <= 1e-12 * mu.norm2().max(1.0));
    }

    #[test]
    fn ricci_and_moment_map_are_symmetric(seed in any::<u64>(), n in 2usize..=5) {
        let mu = random_bracket(seed, n.max(3));
        prop_assert!(sym_defect(&ricci(&mu)) <= 1e-14 * mu.norm2().max(1.0));
        prop_assert!(sym_defect(&moment_map_mu(&mu)) <= 1e-14 * mu.norm2().max(1.0));
    }

    #[test]
    fn solvable_scalar_curvature_is_nonpositive(seed in any::<u64>(), n in 3usize..=5) {
        let mut r = sample::rng(seed);
        let mu = sample::random_solvable(&mut r, n);
        prop_assert!(scalar_curvature(&mu) <= 1e-12 * mu.norm2().max(1.0));
    }

    #[test]
    fn ricci_is_orthogonally_equivariant(seed in any::<u64>(), n in 3usize..=5) {
        let mu = random_bracket(seed, n);
        let mut r = sample::rng(seed ^ 3);
        let q = sample::random_orthogonal(&mut r, n);
        let moved = mu.act(&q).unwrap();
        prop_assert!(jacobiator(&moved).max_abs() <= 1e-12 * mu.norm2().max(1.0));
        let lhs = ricci(&moved);
        let rhs = &q * ricci(&mu) * q.transpose();
        prop_assert!((lhs - rhs).abs().max() <= 1e-12 * mu.norm2().max(1.0));
        prop_assert!((moved.norm2() - mu.norm2()).abs() <= 1e-12 * mu.norm2().max(1.0));
    }

    #[test]
    fn ricci_scales_quadratically(seed in any::<u64>(), n in 3usize..=5, c in 0.1f64..4.0) {
        let mu = random_bracket(seed, n);
        let lhs = ricci(&mu.scale(c));
        let rhs = ricci(&mu) * (c * c);
        prop_assert!((lhs - rhs).abs().max() <= 1e-12 * (c * c) * mu.norm2().max(1.0));
    }
}

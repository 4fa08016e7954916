mod common;

use common::*;
use proptest::prelude::*;
use qdekit::oracle::{fd_residual, rk4_integrate};
use qdekit::pdet::{ddet, wronskian};
use qdekit::qde::{
    exp_series, fundamental_matrix, liouville_check, solve_ivp, superpose, Propagator, SERIES_TOL,
};
use qdekit::spectra::full_spectrum;
use qdekit::{QMatrix, QVector};

fn ts10() -> Vec<f64> {
    (0..10).map(|s| s as f64 / 9.0).collect()
}

fn column(x: QVector) -> QMatrix {
    QMatrix::from_columns(&[x]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_produced_basis_solves_the_system(seed in any::<u64>(), n in 1usize..=4) {
        let a = rand_qmatrix(&mut rng(seed), n, n, 1.0);
        let basis = fundamental_matrix(&a).unwrap();
        prop_assert!(fd_residual(|t| basis.eval(t), &a, &ts10()) <= 1e-6);
    }

    #[test]
    fn nondegenerate_at_zero_means_nondegenerate_everywhere(seed in any::<u64>(), n in 1usize..=4) {
        let a = rand_qmatrix(&mut rng(seed), n, n, 1.0);
        let basis = fundamental_matrix(&a).unwrap();
        prop_assert!(ddet(&basis.eval(0.0)).unwrap() > 1e-9);
        for t in ts10() {
            prop_assert!(wronskian(&basis.eval(t)).unwrap() > 0.0);
        }
    }

    #[test]
    fn exp_semigroup_and_identity(seed in any::<u64>(), n in 2usize..=4, s in 0.0..0.6f64, t in 0.0..0.6f64) {
        let a = rand_qmatrix(&mut rng(seed), n, n, 1.0);
        let p = Propagator::new(&a).unwrap();
        prop_assert!(p.exp_at(0.0).approx_eq(&QMatrix::identity(n), 1e-10));
        prop_assert!(p.exp_at(s + t).approx_eq(&(&p.exp_at(s) * &p.exp_at(t)), 1e-7));
        prop_assert!(p.exp_at(t).approx_eq(&exp_series(&a, t, SERIES_TOL).unwrap(), 1e-8));
    }

    #[test]
    fn superposition_with_right_constants_is_a_solution(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let a = rand_qmatrix(&mut r, n, n, 1.0);
        let basis = fundamental_matrix(&a).unwrap();
        let u = superpose(&basis, rand_qvector(&mut r, n, 1.0).as_slice()).unwrap();
        let v = superpose(&basis, rand_qvector(&mut r, n, 1.0).as_slice()).unwrap();
        let (alpha, beta) = (rand_quat(&mut r, 1.0), rand_quat(&mut r, 1.0));
        let combo = |t: f64| column(&u.eval(t).mul_right(alpha) + &v.eval(t).mul_right(beta));
        prop_assert!(fd_residual(combo, &a, &ts10()) <= 1e-6);
    }

    #[test]
    fn ivp_matches_rk4(seed in any::<u64>(), n in 2usize..=3) {
        let mut r = rng(seed);
        let a = rand_qmatrix(&mut r, n, n, 1.0);
        let x0 = rand_qvector(&mut r, n, 1.0);
        let x = solve_ivp(&a, 0.0, &x0, 1.0).unwrap();
        let rk = rk4_integrate(&a, 0.0, &x0, 1.0, 1e-3).unwrap();
        prop_assert!((&x - &rk.state).norm() <= 1e-6);
    }

    #[test]
    fn chains_satisfy_the_residual_contract(seed in any::<u64>(), n in 1usize..=4) {
        // A random upper-triangular matrix with repeated diagonal exercises chains.
        let mut r = rng(seed);
        let mut a = rand_qmatrix(&mut r, n, n, 1.0);
        let d = rand_quat(&mut r, 1.0);
        for i in 0..n {
            for j in 0..i {
                a[(i, j)] = qdekit::Quaternion::ZERO;
            }
            a[(i, i)] = d;
        }
        let spec = full_spectrum(&a).unwrap();
        let total: usize = spec.entries.iter().map(|e| e.multiplicity).sum();
        prop_assert_eq!(total, n);
        for e in &spec.entries {
            for chain in &e.chains {
                for (l, v) in chain.iter().enumerate() {
                    let mut res = &a.mat_vec(v).unwrap() - &v.mul_right(e.eigenvalue);
                    if l > 0 {
                        res = &res - &chain[l - 1];
                    }
                    prop_assert!(res.norm() <= 1e-8);
                }
            }
        }
    }
}

#[test]
fn liouville_factor_is_shared_by_random_systems() {
    let mut r = rng(7);
    let factors: Vec<f64> = (0..20)
        .map(|s| {
            let a = rand_growing_system(&mut r, 1 + s % 4);
            liouville_check(&a, 0.0, 1.0).unwrap().factor.unwrap()
        })
        .collect();
    for f in &factors {
        assert!((f - 2.0).abs() <= 1e-6, "{factors:?}");
    }
}

mod common;

use common::*;
use quadbt_core::dense;
use quadbt_core::lti;
use quadbt_core::models::{generate, ModelSpec};
use quadbt_core::spectral::{self, build_factors, make_oracles, Variant};
use quadbt_core::{Mat, StateSpace};

const GRID5: [f64; 5] = [0.0, 0.1, 1.0, 3.0, 10.0];

#[test]
fn popov_values() {
    let g = s1();
    let p0 = spectral::popov(&g, c(0.0, 0.0)).unwrap();
    assert!((p0[(0, 0)] - c(4.0, 0.0)).norm() < 1e-14);
    for w in [0.01, 0.5, 1.0, 7.0, 100.0] {
        let v = spectral::popov(&g, c(0.0, w)).unwrap()[(0, 0)];
        let expect = 2.0 * (1.0 + 1.0 / (1.0 + w * w));
        assert!((v - c(expect, 0.0)).norm() < 1e-13);
        assert!(v.re > 0.0);
    }
    let g = rand_system(12, 5, 3, 3);
    let p = spectral::popov(&g, c(0.0, 0.8)).unwrap();
    assert!(max_abs(&(&p - p.adjoint())) <= 1e-13);
}

#[test]
fn popov_positive_on_log_grid_for_passive_model() {
    let g = generate(&ModelSpec::random_passive(10, 2, 3)).unwrap();
    for k in 0..50 {
        let w = 10f64.powf(-3.0 + 7.0 * k as f64 / 49.0);
        let p = spectral::popov(&g, c(0.0, w)).unwrap();
        let h = p.map(|z| z.re);
        let (ev, _) = dense::sym_eig(&h).unwrap();
        assert!(ev[0] > 0.0, "w = {w}");
    }
}

#[test]
fn bst_factor_of_lead_lag_is_itself() {
    let set = build_factors(&s1(), Variant::Bst).unwrap();
    let w = set.get("W").unwrap();
    assert!((w.c[(0, 0)] - 2.0 / 3.0).abs() < 1e-12);
    assert!((w.b[(0, 0)] - 1.5).abs() < 1e-14);
    assert_eq!(w.d[(0, 0)], 1.0);
    for wv in [0.0, 0.3, 1.0, 4.0, 20.0] {
        let s = c(0.0, wv);
        let ww = tf_inv(w, s)[(0, 0)] * tf_inv(w, -s)[(0, 0)];
        let gg = tf_inv(&s1(), s)[(0, 0)] * tf_inv(&s1(), -s)[(0, 0)];
        assert!((ww - gg).norm() < 1e-12);
        assert!((tf_inv(w, s)[(0, 0)] - (s + 2.0) / (s + 1.0)).norm() < 1e-12);
    }
}

#[test]
fn prbt_scalar_factor() {
    let set = build_factors(&s1(), Variant::Prbt).unwrap();
    let m = set.get("M").unwrap();
    assert!((m.c[(0, 0)] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    assert!((m.d[(0, 0)] - 2f64.sqrt()).abs() < 1e-14);
    let m0 = tf_inv(m, c(0.0, 0.0))[(0, 0)];
    assert!((m0 * m0 - c(4.0, 0.0)).norm() < 1e-12);
    let n = set.get("N").unwrap();
    for s in [c(0.0, 0.0), c(0.0, 2.0)] {
        assert!(max_abs(&(tf_inv(m, s) - tf_inv(n, s))) < 1e-12);
    }
}

#[test]
fn brbt_scalar_factor() {
    let set = build_factors(&s2(), Variant::Brbt).unwrap();
    let j = set.get("J").unwrap();
    assert!((j.c[(0, 0)] + (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-12);
    assert!((j.d[(0, 0)] - 1.0).abs() < 1e-14);
    let ji = tf_inv(j, c(0.0, 1.0))[(0, 0)];
    let gi = tf_inv(&s2(), c(0.0, 1.0))[(0, 0)];
    assert!((ji.norm_sqr() - (1.0 - gi.norm_sqr())).abs() < 1e-12);
}

#[test]
fn verify_identities_on_scalars() {
    let set = build_factors(&s1(), Variant::Bst).unwrap();
    let rep = spectral::verify_factorization(&set, &[0.1, 1.0, 10.0]).unwrap();
    assert!(rep.max_residual <= 1e-12);
    assert!(rep.minimum_phase);
    let set = build_factors(&s2(), Variant::Brbt).unwrap();
    let rep = spectral::verify_factorization(&set, &GRID5).unwrap();
    assert!(rep.max_residual <= 1e-12);
    assert!(rep.minimum_phase);
    let set = build_factors(&s1(), Variant::Prbt).unwrap();
    let rep = spectral::verify_factorization(&set, &GRID5).unwrap();
    assert!(rep.max_residual <= 1e-12);
    assert!(rep.minimum_phase);
}

#[test]
fn wrong_bst_branch_fails_zero_check() {
    let mut set = build_factors(&s1(), Variant::Bst).unwrap();
    // Q_W = 2 gives C_W = 1 - 1.5 * 2 = -2, zero of W at A - B_W C_W / D = 2
    let w = StateSpace { c: Mat::from_element(1, 1, -2.0), ..set.get("W").unwrap().clone() };
    set.factors = vec![("W", w)];
    let rep = spectral::verify_factorization(&set, &[0.1, 1.0, 10.0]).unwrap();
    assert!((rep.max_zero_real - 2.0).abs() < 1e-12);
    assert!(!rep.minimum_phase);
    // the spectral identity alone does not detect the wrong branch
    assert!(rep.max_residual < 1e-12);
}

#[test]
fn random_factor_sets_verify() {
    let pas = generate(&ModelSpec::random_passive(10, 2, 17)).unwrap();
    let grid = [0.0, 0.05, 0.7, 2.0, 30.0];
    for v in [Variant::Bst, Variant::Prbt] {
        let set = build_factors(&pas, v).unwrap();
        let rep = spectral::verify_factorization(&set, &grid).unwrap();
        assert!(rep.max_residual <= 1e-9, "{v}: {}", rep.max_residual);
        assert!(rep.minimum_phase, "{v}");
    }
    let st = generate(&ModelSpec::random_stable(8, 2, 3, 5)).unwrap();
    let (st, _) = quadbt_core::models::normalize_hinf(&st, 0.5, 1e-8).unwrap();
    let set = build_factors(&st, Variant::Brbt).unwrap();
    let rep = spectral::verify_factorization(&set, &grid).unwrap();
    assert!(rep.max_residual <= 1e-9, "{}", rep.max_residual);
    assert!(rep.minimum_phase);
    for (_, f) in &set.factors {
        assert_eq!(f.a, st.a);
        assert!(f.is_stable().unwrap());
    }
}

fn lyap_residual_obs(a: &Mat, q: &Mat, c: &Mat) -> f64 {
    (a.transpose() * q + q * a + c.transpose() * c).norm() / (1.0 + q.norm() * a.norm())
}

fn lyap_residual_reach(a: &Mat, p: &Mat, b: &Mat) -> f64 {
    (a * p + p * a.transpose() + b * b.transpose()).norm() / (1.0 + p.norm() * a.norm())
}

#[test]
fn gramian_cross_identities() {
    let pas = generate(&ModelSpec::random_passive(9, 2, 21)).unwrap();
    let set = build_factors(&pas, Variant::Bst).unwrap();
    assert!(lyap_residual_obs(&pas.a, &set.q_y.x, &set.c_y) <= 1e-9);
    let set = build_factors(&pas, Variant::Prbt).unwrap();
    assert!(lyap_residual_obs(&pas.a, &set.q_y.x, &set.c_y) <= 1e-9);
    assert!(lyap_residual_reach(&pas.a, &set.p_x.x, &set.b_x) <= 1e-9);
    let st = generate(&ModelSpec::random_stable(7, 2, 2, 8)).unwrap();
    let (st, _) = quadbt_core::models::normalize_hinf(&st, 0.5, 1e-8).unwrap();
    let set = build_factors(&st, Variant::Brbt).unwrap();
    assert_eq!(set.c_y.nrows(), 4);
    assert_eq!(set.b_x.ncols(), 4);
    assert!(lyap_residual_obs(&st.a, &set.q_y.x, &set.c_y) <= 1e-9);
    assert!(lyap_residual_reach(&st.a, &set.p_x.x, &set.b_x) <= 1e-9);
}

#[test]
fn oracle_examples() {
    let o = make_oracles(&s1(), Variant::Bst).unwrap();
    assert!((o.sigma_a.eval(c(0.0, 0.0)).unwrap()[(0, 0)] - c(2.0 / 3.0, 0.0)).norm() < 1e-12);
    assert!((o.b.eval(c(0.0, 0.0)).unwrap()[(0, 0)] - c(2.0 / 3.0, 0.0)).norm() < 1e-12);
    assert!((o.c.eval(c(0.0, 0.0)).unwrap()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);

    let g = rand_system(40, 6, 2, 3);
    let o = make_oracles(&g, Variant::Lyapunov).unwrap();
    let sp = lti::strictly_proper(&g);
    let mut r = rng(3);
    for _ in 0..5 {
        let s = c(rand::Rng::gen_range(&mut r, -0.3..0.3), rand::Rng::gen_range(&mut r, -5.0..5.0));
        let want = tf_inv(&sp, s);
        for orc in [&o.sigma_a, &o.b, &o.c] {
            assert!(max_abs(&(orc.eval(s).unwrap() - &want)) <= 1e-13);
        }
    }

    let o = make_oracles(&s2(), Variant::Brbt).unwrap();
    assert_eq!((o.sigma_a.rows(), o.sigma_a.cols()), (2, 2));
    assert_eq!((o.b.rows(), o.b.cols()), (2, 1));
    assert_eq!((o.c.rows(), o.c.cols()), (1, 2));
    let set = build_factors(&s2(), Variant::Brbt).unwrap();
    let s = c(0.0, 1.0);
    let gb = o.b.eval(s).unwrap();
    let g_inf = tf_inv(&lti::strictly_proper(&s2()), s)[(0, 0)];
    let j_inf = tf_inv(&lti::strictly_proper(set.get("J").unwrap()), s)[(0, 0)];
    assert!((gb[(0, 0)] - g_inf).norm() <= 1e-12);
    assert!((gb[(1, 0)] - j_inf).norm() <= 1e-12);
}

#[test]
fn oracles_conjugate_symmetric() {
    let g = rand_system(41, 5, 2, 2);
    let o = make_oracles(&g, Variant::Lyapunov).unwrap();
    let a = o.sigma_a.eval(c(0.0, 1.7)).unwrap();
    let b = o.sigma_a.eval(c(0.0, -1.7)).unwrap();
    assert!(max_abs(&(a - b.conjugate())) < 1e-14);
}

#[test]
fn cascade_checks() {
    let grid = [0.0, 1.0, 10.0];
    let set = build_factors(&s1(), Variant::Bst).unwrap();
    assert!(spectral::cascade_oracle_check(&set, &grid).unwrap() <= 1e-10);
    let set = build_factors(&s1(), Variant::Prbt).unwrap();
    assert!(spectral::cascade_oracle_check(&set, &grid).unwrap() <= 1e-10);
    let set = build_factors(&s2(), Variant::Brbt).unwrap();
    assert!(spectral::cascade_oracle_check(&set, &grid).unwrap() <= 1e-10);

    let pas = generate(&ModelSpec::random_passive(8, 2, 5)).unwrap();
    for v in [Variant::Prbt, Variant::Bst] {
        let set = build_factors(&pas, v).unwrap();
        let dev = spectral::cascade_oracle_check(&set, &GRID5).unwrap();
        assert!(dev <= 1e-8, "{v}: {dev}");
    }
    let st = generate(&ModelSpec::random_stable(8, 2, 2, 6)).unwrap();
    let (st, _) = quadbt_core::models::normalize_hinf(&st, 0.5, 1e-8).unwrap();
    let set = build_factors(&st, Variant::Brbt).unwrap();
    let dev = spectral::cascade_oracle_check(&set, &GRID5).unwrap();
    assert!(dev <= 1e-8, "{dev}");
}

#[test]
fn unstable_system_rejected() {
    let g = scalar(0.5, 1.0, 1.0, 1.0);
    for v in Variant::ALL {
        assert!(matches!(build_factors(&g, v), Err(quadbt_core::Error::UnstableSystem(_))));
    }
}

#[test]
fn variant_parsing() {
    for v in Variant::ALL {
        assert_eq!(v.name().parse::<Variant>().unwrap(), v);
    }
    assert!("lqg".parse::<Variant>().is_err());
}

use nalgebra::Matrix4;
use proptest::prelude::*;

use hardy_bellman::bellman::{
    bellman_derivatives, bellman_formula, bellman_value, domain_support_concavity, in_domain,
    lemma_minimizer, lemma_scalar_phi, midpoint_margin, support_function, support_hessian,
    BellmanPoint, DomainViolation, MarginKind, DOMAIN_TOL,
};
use hardy_bellman::sampling::{keyed_rng, sample_domain_point, sample_lemma_tuple};
use hardy_bellman::PExponent;

const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-5;

fn exp_strategy() -> impl Strategy<Value = PExponent> {
    prop_oneof![Just(1.25), Just(1.5), Just(2.0), Just(3.0), Just(4.0), 1.1f64..6.0]
        .prop_map(|p| PExponent::new(p).unwrap())
}

fn point(seed: u64, exp: &PExponent) -> BellmanPoint {
    sample_domain_point(&mut keyed_rng(seed, 0), exp)
}

/// Central differences with a step relative to each coordinate.
fn fd_gradient(x: [f64; 4], g: impl Fn([f64; 4]) -> [f64; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for j in 0..4 {
        let h = FD_STEP * x[j].abs().max(1e-3);
        let (mut lo, mut hi) = (x, x);
        lo[j] -= h;
        hi[j] += h;
        let (gl, gh) = (g(lo), g(hi));
        for i in 0..4 {
            out[i][j] = (gh[i] - gl[i]) / (2.0 * h);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn gradient_matches_differences(seed in any::<u64>(), exp in exp_strategy()) {
        let x = point(seed, &exp);
        prop_assume!(x.f > 1e-3 * x.big_f.max(x.v) && x.big_a > 1e-3 * x.v);
        let d = bellman_derivatives(&x, &exp).unwrap();
        let fd = fd_gradient(x.coords(), |y| [bellman_formula(y, &exp), 0.0, 0.0, 0.0]);
        let scale = d.gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        for j in 0..4 {
            prop_assert!((fd[0][j] - d.gradient[j]).abs() <= FD_TOL * scale,
                "coord {j}: {} vs {}", fd[0][j], d.gradient[j]);
        }
    }

    #[test]
    fn hessian_matches_differences(seed in any::<u64>(), exp in exp_strategy()) {
        let x = point(seed, &exp);
        prop_assume!(x.f > 1e-3 * x.big_f.max(x.v) && x.big_a > 1e-3 * x.v);
        let d = bellman_derivatives(&x, &exp).unwrap();
        let grad = |y: [f64; 4]| bellman_derivatives(&BellmanPoint::new_unchecked(y), &exp).unwrap().gradient;
        let fd = fd_gradient(x.coords(), grad);
        let scale = d.hessian.iter().flatten().fold(0.0f64, |m, h| m.max(h.abs()));
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((fd[i][j] - d.hessian[i][j]).abs() <= FD_TOL * scale,
                    "({i},{j}): {} vs {}", fd[i][j], d.hessian[i][j]);
            }
        }
    }

    #[test]
    fn hessian_is_negative_semidefinite(seed in any::<u64>(), exp in exp_strategy()) {
        let x = point(seed, &exp);
        let h = bellman_derivatives(&x, &exp).unwrap().hessian;
        let eig = Matrix4::from_fn(|i, j| h[i][j]).symmetric_eigen().eigenvalues;
        let scale = eig.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        prop_assert!(eig.iter().all(|&e| e <= 1e-12 * scale));
    }

    #[test]
    fn concave_along_chords(seed in any::<u64>(), exp in exp_strategy(), t in 0.0f64..1.0) {
        let mut rng = keyed_rng(seed, 1);
        let x = sample_domain_point(&mut rng, &exp);
        let y = sample_domain_point(&mut rng, &exp);
        let mid: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        let m = BellmanPoint::new(mid.try_into().unwrap(), &exp).unwrap();
        let lhs = bellman_value(&m, &exp);
        let rhs = (1.0 - t) * bellman_value(&x, &exp) + t * bellman_value(&y, &exp);
        prop_assert!(lhs >= rhs - 1e-12 * exp.c_p() * m.big_f);
    }

    #[test]
    fn one_homogeneous(seed in any::<u64>(), exp in exp_strategy(), t in 1e-3f64..1e3) {
        let x = point(seed, &exp);
        let y = BellmanPoint::new(x.coords().map(|c| c * t), &exp).unwrap();
        let (bx, by) = (bellman_value(&x, &exp), bellman_value(&y, &exp));
        prop_assert!((by - t * bx).abs() <= 1e-12 * t * exp.c_p() * x.big_f);
    }

    #[test]
    fn strong_margin_below_weak(seed in any::<u64>(), exp in exp_strategy()) {
        let t = sample_lemma_tuple(&mut keyed_rng(seed, 2), &exp);
        let strong = midpoint_margin(&t.xm, &t.xp, t.a, t.b, t.c, &exp, MarginKind::Strong).unwrap();
        let weak = midpoint_margin(&t.xm, &t.xp, t.a, t.b, t.c, &exp, MarginKind::Weak).unwrap();
        let scale = exp.c_p() * (t.xm.big_f + t.xp.big_f + exp.pow_p(t.b));
        prop_assert!(strong >= -1e-9 * scale);
        prop_assert!(weak >= strong - 1e-12 * scale);
    }

    #[test]
    fn lemma_scalar_is_minimised_at_the_formula(a in 1e-2f64..10.0, b in 1e-2f64..10.0, exp in exp_strategy()) {
        let y0 = lemma_minimizer(a, b, &exp).unwrap();
        let scale = exp.c_p() * exp.pow_p(b);
        prop_assert!(lemma_scalar_phi(y0, a, b, &exp).abs() <= 1e-10 * scale);
        for k in 0..=200 {
            let y = y0 * 3.0 * k as f64 / 200.0;
            prop_assert!(lemma_scalar_phi(y, a, b, &exp) >= -1e-10 * scale);
        }
    }

    #[test]
    fn support_function_is_concave(big_f in 1e-2f64..1e2, v in 1e-2f64..1e2, exp in exp_strategy()) {
        let h = support_hessian(big_f, v, &exp);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let scale = h[0][0].abs() * h[1][1].abs();
        prop_assert!(det.abs() <= 1e-10 * scale);
        let [zero, l2] = domain_support_concavity(big_f, v, &exp).unwrap();
        prop_assert_eq!(zero, 0.0);
        prop_assert!(l2 < 0.0);
    }
}

#[test]
fn lemma_scan_finds_the_minimiser() {
    let exp = PExponent::new(2.5).unwrap();
    let (a, b) = (0.7, 1.3);
    let y0 = lemma_minimizer(a, b, &exp).unwrap();
    let (mut best_y, mut best) = (0.0, f64::INFINITY);
    for k in 0..=100_000 {
        let y = 4.0 * y0 * k as f64 / 100_000.0;
        let v = lemma_scalar_phi(y, a, b, &exp);
        if v < best {
            best = v;
            best_y = y;
        }
    }
    assert!((best_y - y0).abs() <= 1e-3 * y0, "{best_y} vs {y0}");
    assert!(best.abs() < 1e-9);
}

#[test]
fn domain_membership() {
    let exp = PExponent::new(2.0).unwrap();
    assert!(in_domain([1.0, 1.0, 1.0, 1.0], &exp, DOMAIN_TOL).is_member());
    let r = in_domain([1.0, 2.0, 1.5, 1.0], &exp, DOMAIN_TOL);
    assert!(r.violations.contains(&DomainViolation::AExceedsV));
    assert!(r.violations.contains(&DomainViolation::HolderBound));
    assert!(!in_domain([1.0, 0.5, 0.0, 1.0], &exp, DOMAIN_TOL).is_member());
    assert!(BellmanPoint::new([-1.0, 0.5, 0.5, 1.0], &exp).is_err());
    assert!((support_function(8.0, 2.0, &exp) - 4.0).abs() < 1e-15);
}

#[test]
fn boundary_of_the_holder_constraint() {
    for p in [1.25, 2.0, 4.0] {
        let exp = PExponent::new(p).unwrap();
        let (big_f, v) = (2.0, 3.0);
        let f = support_function(big_f, v, &exp);
        let x = BellmanPoint::new([big_f, f, v, v], &exp).unwrap();
        let want = big_f * (exp.c_p() - exp.p_conj());
        assert!((bellman_value(&x, &exp) - want).abs() < 1e-12 * want);
    }
}

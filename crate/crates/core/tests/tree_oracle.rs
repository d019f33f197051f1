use proptest::prelude::*;

use hardy_bellman::sampling::{keyed_rng, random_feasible_instance};
use hardy_bellman::tree::{
    build_instance, compute_aggregates, interval_length, level, node_count, testing_margins,
    TreeInstance,
};
use hardy_bellman::PExponent;

fn is_descendant(k: usize, i: usize) -> bool {
    let (lk, li) = (level(k), level(i));
    lk >= li && (k >> (lk - li)) == i
}

/// Aggregates from explicit subtree sums:
/// `v = Σλ/|I|`, `F = Σφ^p/|I|`, `f = Σλ^(1/p')φ/|I|`, `A = Σαv^p/|I|`.
fn direct(inst: &TreeInstance, exp: &PExponent) -> Vec<[f64; 4]> {
    let n = inst.node_count();
    let (p, q) = (exp.p(), exp.p_conj());
    let mut v = vec![0.0; n];
    let mut out = vec![[0.0; 4]; n];
    for i in 1..=n {
        let len = interval_length(i, inst.depth()).unwrap();
        let mut s = [0.0; 3];
        for k in (i..=n).filter(|&k| is_descendant(k, i)) {
            s[0] += inst.lambda()[k - 1];
            s[1] += inst.phi()[k - 1].powf(p);
            s[2] += inst.lambda()[k - 1].powf(1.0 / q) * inst.phi()[k - 1];
        }
        v[i - 1] = s[0] / len;
        out[i - 1] = [s[1] / len, s[2] / len, 0.0, v[i - 1]];
    }
    for i in 1..=n {
        let len = interval_length(i, inst.depth()).unwrap();
        out[i - 1][2] = (i..=n)
            .filter(|&k| is_descendant(k, i))
            .map(|k| inst.alpha()[k - 1] * v[k - 1].powf(p))
            .sum::<f64>()
            / len;
    }
    out
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn arb_instance() -> impl Strategy<Value = (TreeInstance, PExponent)> {
    (0u32..=5, 1.1f64..5.0).prop_flat_map(|(depth, p)| {
        let n = node_count(depth);
        (
            prop::collection::vec(1e-3f64..10.0, n),
            prop::collection::vec(1e-3f64..10.0, n),
            prop::collection::vec(0.0f64..10.0, n),
        )
            .prop_map(move |(alpha, lambda, phi)| {
                (
                    build_instance(depth, alpha, lambda, phi).unwrap(),
                    PExponent::new(p).unwrap(),
                )
            })
    })
}

proptest! {
    #[test]
    fn aggregates_match_subtree_sums((inst, exp) in arb_instance()) {
        let agg = compute_aggregates(&inst, &exp);
        for (i, d) in direct(&inst, &exp).iter().enumerate() {
            let got = agg.point(i + 1);
            for c in 0..4 {
                prop_assert!(close(got[c], d[c], 1e-12), "node {} coord {c}: {} vs {}", i + 1, got[c], d[c]);
            }
        }
    }

    #[test]
    fn holder_bound_at_every_node((inst, exp) in arb_instance()) {
        let agg = compute_aggregates(&inst, &exp);
        for i in 1..=inst.node_count() {
            let [big_f, f, _, v] = agg.point(i);
            prop_assert!(f.powf(exp.p()) <= big_f * v.powf(exp.p() - 1.0) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn homogeneity((inst, exp) in arb_instance(), t in 0.1f64..10.0, s in 0.1f64..10.0, r in 0.1f64..10.0) {
        let p = exp.p();
        let base = compute_aggregates(&inst, &exp);
        let scaled = build_instance(
            inst.depth(),
            inst.alpha().iter().map(|a| a * r).collect(),
            inst.lambda().iter().map(|l| l * t).collect(),
            inst.phi().iter().map(|x| x * s).collect(),
        ).unwrap();
        let agg = compute_aggregates(&scaled, &exp);
        for i in 0..inst.node_count() {
            prop_assert!(close(agg.v[i], t * base.v[i], 1e-12));
            prop_assert!(close(agg.big_f[i], s.powf(p) * base.big_f[i], 1e-12));
            prop_assert!(close(agg.f[i], s * t.powf(1.0 / exp.p_conj()) * base.f[i], 1e-12));
            prop_assert!(close(agg.big_a[i], r * t.powf(p) * base.big_a[i], 1e-12));
        }
    }

    #[test]
    fn weights_scaled_to_feasibility_pass(seed in any::<u64>(), depth in 0u32..8, p in 1.1f64..5.0) {
        let exp = PExponent::new(p).unwrap();
        let inst = random_feasible_instance(&mut keyed_rng(seed, 0), depth, &exp);
        let agg = compute_aggregates(&inst, &exp);
        for (m, v) in testing_margins(&inst, &exp).iter().zip(&agg.v) {
            prop_assert!(*m >= -1e-12 * v);
        }
    }
}

#[test]
fn hand_example() {
    let h = 0.5f64.sqrt();
    let inst = build_instance(1, vec![0.1; 3], vec![1.0, 0.5, 0.5], vec![1.0, h, h]).unwrap();
    let exp = PExponent::new(2.0).unwrap();
    let agg = compute_aggregates(&inst, &exp);
    let root = agg.root();
    for (got, want) in root.iter().zip([2.0, 2.0, 0.6, 2.0]) {
        assert!((got - want).abs() < 1e-14, "{root:?}");
    }
    assert!((agg.v[1] - 1.0).abs() < 1e-15);
    let m = testing_margins(&inst, &exp);
    for (got, want) in m.iter().zip([1.4, 0.8, 0.8]) {
        assert!((got - want).abs() < 1e-14, "{m:?}");
    }
}

#[test]
fn heap_layout() {
    assert_eq!(node_count(0), 1);
    assert_eq!(node_count(10), 2047);
    assert_eq!(level(1), 0);
    assert_eq!(level(7), 2);
    assert_eq!(level(8), 3);
    for node in 1..=node_count(4) {
        let len = interval_length(node, 4).unwrap();
        assert_eq!(len, 0.5f64.powi(level(node) as i32));
    }
    assert!(interval_length(32, 4).is_err());
    assert!(interval_length(0, 4).is_err());
}

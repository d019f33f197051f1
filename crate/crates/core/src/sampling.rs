//! Random inputs for the randomized suites: points of the Bellman domain,
//! admissible midpoint tuples and tree instances.
//!
//! Every generator draws from a ChaCha8 stream keyed by `(seed, index)`, so
//! trial `i` of a suite sees the same numbers however trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bellman::{support_function, BellmanPoint};
use crate::exponent::PExponent;
use crate::tree::{build_instance, compute_aggregates, node_count, TreeInstance};

/// Independent stream `index` of the generator seeded with `seed`.
pub fn keyed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `(0, 1]`.
#[inline]
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Log-uniform on `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// A point of the Bellman domain: `v`, `F` log-uniform on `[1e-2, 1e2]`,
/// `A = v·U^(1/2)`, `f = h(F, v)·U^(1/p)`. Mass piles up near `v = A` and
/// near `f^p = F v^(p-1)`.
pub fn sample_domain_point<R: Rng + ?Sized>(rng: &mut R, exp: &PExponent) -> BellmanPoint {
    let v = log_uniform(rng, 1e-2, 1e2);
    let big_a = v * open_unit(rng).sqrt();
    let big_f = log_uniform(rng, 1e-2, 1e2);
    let f = support_function(big_f, v, exp) * rng.random::<f64>().powf(1.0 / exp.p());
    BellmanPoint::new_unchecked([big_f, f, big_a, v])
}

/// Inputs of the midpoint inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaTuple {
    pub xm: BellmanPoint,
    pub xp: BellmanPoint,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Two domain points and increments `a, b, c ≥ 0` whose composed point is
/// in the domain. `f ≤ h(F, v)` holds there automatically (`h` is concave
/// and one-homogeneous); `c` is drawn below the slack `ṽ - Ã + a^(p')` and
/// sits on it one time in five.
pub fn sample_lemma_tuple<R: Rng + ?Sized>(rng: &mut R, exp: &PExponent) -> LemmaTuple {
    let xm = sample_domain_point(rng, exp);
    let xp = if rng.random_bool(0.1) {
        xm
    } else {
        sample_domain_point(rng, exp)
    };
    let a = if rng.random_bool(0.1) {
        0.0
    } else {
        log_uniform(rng, 1e-2, 1e1)
    };
    let b = if rng.random_bool(0.1) {
        0.0
    } else {
        log_uniform(rng, 1e-2, 1e1)
    };
    let slack = 0.5 * (xm.v + xp.v) - 0.5 * (xm.big_a + xp.big_a) + a.powf(exp.p_conj());
    let c = if rng.random_bool(0.2) {
        slack
    } else if rng.random_bool(0.1) {
        0.0
    } else {
        slack * rng.random::<f64>()
    };
    LemmaTuple { xm, xp, a, b, c }
}

/// Log-uniform `λ` on `[1e-3, 1]` and `φ` uniform on `[0, 1)` with one node
/// in five set to zero.
pub fn random_lambda_phi<R: Rng + ?Sized>(rng: &mut R, depth: u32) -> (Vec<f64>, Vec<f64>) {
    let n = node_count(depth);
    let lambda = (0..n).map(|_| log_uniform(rng, 1e-3, 1.0)).collect();
    let phi = (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    (lambda, phi)
}

/// Random `φ` on a given tree, uniform on `[0, 1)`, never identically zero.
pub fn random_phi<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut phi: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if phi.iter().all(|&x| x == 0.0) {
        phi[rng.random_range(0..n)] = 1.0;
    }
    phi
}

/// A random instance satisfying the testing condition: log-uniform `α` on
/// `[1e-3, 1]`, rescaled by `t·min_I v_I/A_I` with `t ∈ [0.5, 1]` (and
/// `t = 1` half of the time, so some node is tight).
pub fn random_feasible_instance<R: Rng + ?Sized>(
    rng: &mut R,
    depth: u32,
    exp: &PExponent,
) -> TreeInstance {
    let n = node_count(depth);
    let (lambda, phi) = random_lambda_phi(rng, depth);
    let alpha: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1e-3, 1.0)).collect();
    let inst = build_instance(depth, alpha, lambda, phi).expect("generated instance is valid");
    let agg = compute_aggregates(&inst, exp);
    let ratio = agg
        .v
        .iter()
        .zip(&agg.big_a)
        .map(|(v, a)| v / a)
        .fold(f64::INFINITY, f64::min);
    let t = if rng.random_bool(0.5) {
        1.0
    } else {
        0.5 + 0.5 * rng.random::<f64>()
    };
    // A is linear in α; shave one ulp-scale factor so the tight node stays feasible
    let scale = ratio * t * (1.0 - 4.0 * f64::EPSILON);
    let alpha = inst.alpha().iter().map(|a| a * scale).collect();
    inst.with_alpha(alpha).expect("rescaled weights stay positive")
}

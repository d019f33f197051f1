//! Complete dyadic trees of finite depth in heap order, and the per-node
//! averages that the Bellman argument runs on.
//!
//! Node `1` is the root interval `I0 = [0, 1]`; the children of node `i` are
//! `2i` and `2i + 1`. A node at level `ℓ` has length `2^-ℓ`. Every public
//! function takes and reports 1-based node indices; storage is 0-based.

use crate::error::{Error, Result};
use crate::exponent::PExponent;

/// Largest supported depth (2^31 - 1 nodes).
pub const MAX_DEPTH: u32 = 30;

/// Number of nodes of the complete tree of the given depth.
#[inline]
pub fn node_count(depth: u32) -> usize {
    (1usize << (depth + 1)) - 1
}

/// Level of a node, root level 0.
#[inline]
pub fn level(node: usize) -> u32 {
    debug_assert!(node >= 1);
    usize::BITS - 1 - node.leading_zeros()
}

#[inline]
fn length_at(node: usize) -> f64 {
    // exact power of two
    f64::powi(0.5, level(node) as i32)
}

/// Length `|I| = 2^-level(node)` of a node in a tree of the given depth.
pub fn interval_length(node: usize, depth: u32) -> Result<f64> {
    let max = node_count(depth);
    if node == 0 || node > max {
        return Err(Error::NodeOutOfRange { node, max });
    }
    Ok(length_at(node))
}

/// A validated instance: weights `α`, measure `λ` and test function `φ`,
/// one value per node in heap order.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeInstance {
    depth: u32,
    alpha: Vec<f64>,
    lambda: Vec<f64>,
    phi: Vec<f64>,
}

fn check_len(field: &'static str, v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::LengthMismatch {
            field,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

fn check_values(field: &'static str, v: &[f64], strictly_positive: bool) -> Result<()> {
    for (i, &x) in v.iter().enumerate() {
        let node = i + 1;
        if !x.is_finite() {
            return Err(Error::NonFinite { field, node });
        }
        if strictly_positive && x <= 0.0 {
            return Err(Error::NonPositive {
                field,
                node,
                value: x,
            });
        }
        if !strictly_positive && x < 0.0 {
            return Err(Error::Negative {
                field,
                node,
                value: x,
            });
        }
    }
    Ok(())
}

/// Validates lengths and signs and builds an instance.
pub fn build_instance(
    depth: u32,
    alpha: Vec<f64>,
    lambda: Vec<f64>,
    phi: Vec<f64>,
) -> Result<TreeInstance> {
    if depth > MAX_DEPTH {
        return Err(Error::DepthTooLarge(depth));
    }
    let n = node_count(depth);
    check_len("alpha", &alpha, n)?;
    check_len("lambda", &lambda, n)?;
    check_len("phi", &phi, n)?;
    check_values("alpha", &alpha, true)?;
    check_values("lambda", &lambda, true)?;
    check_values("phi", &phi, false)?;
    Ok(TreeInstance {
        depth,
        alpha,
        lambda,
        phi,
    })
}

impl TreeInstance {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `true` when `node` has no children in this tree.
    pub fn is_leaf(&self, node: usize) -> bool {
        2 * node > self.node_count()
    }

    pub fn interval_length(&self, node: usize) -> Result<f64> {
        interval_length(node, self.depth)
    }

    /// Same tree and measure with a different test function.
    pub fn with_phi(&self, phi: Vec<f64>) -> Result<TreeInstance> {
        build_instance(self.depth, self.alpha.clone(), self.lambda.clone(), phi)
    }

    /// Same tree and measure with different weights.
    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<TreeInstance> {
        build_instance(self.depth, alpha, self.lambda.clone(), self.phi.clone())
    }
}

/// Per-node averages and increments, indexed like the instance (0-based
/// storage, use `node - 1`).
///
/// With `|I|` the node length and `I±` its children:
///
/// ```text
/// Λ(I) = Σ_{K⊆I} λ_K              v_I = Λ(I)/|I|
/// F_I  = (1/|I|) Σ_{K⊆I} φ(K)^p   f_I = (1/|I|) Σ_{K⊆I} φ(K) λ_K^{1/p'}
/// A_I  = (1/|I|) Σ_{K⊆I} α_K v_K^p
/// a_I  = (λ_I/|I|)^{1/p'}   b_I = φ(I)/|I|^{1/p}   c_I = α_I v_I^p/|I|
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAggregates {
    pub big_lambda: Vec<f64>,
    pub v: Vec<f64>,
    pub big_f: Vec<f64>,
    pub f: Vec<f64>,
    pub big_a: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl NodeAggregates {
    /// The point `(F_I, f_I, A_I, v_I)` of node `node` (1-based).
    pub fn point(&self, node: usize) -> [f64; 4] {
        let i = node - 1;
        [self.big_f[i], self.f[i], self.big_a[i], self.v[i]]
    }

    pub fn root(&self) -> [f64; 4] {
        self.point(1)
    }
}

/// One bottom-up pass. Internal nodes combine as
/// `local + ½·left + ½·right`, evaluated in that order.
pub fn compute_aggregates(instance: &TreeInstance, exp: &PExponent) -> NodeAggregates {
    let n = instance.node_count();
    let p = exp.p();
    let inv_p = 1.0 / p;
    let inv_q = 1.0 / exp.p_conj();
    let mut agg = NodeAggregates {
        big_lambda: vec![0.0; n],
        v: vec![0.0; n],
        big_f: vec![0.0; n],
        f: vec![0.0; n],
        big_a: vec![0.0; n],
        a: vec![0.0; n],
        b: vec![0.0; n],
        c: vec![0.0; n],
    };
    for node in (1..=n).rev() {
        let i = node - 1;
        let len = length_at(node);
        let lam = instance.lambda[i];
        let phi = instance.phi[i];
        let a = (lam / len).powf(inv_q);
        let b = phi / len.powf(inv_p);
        let local_v = lam / len;
        let local_f = exp.pow_p(phi) / len;
        let (big_lambda, v, big_f, f, tilde_a) = if 2 * node > n {
            (lam, local_v, local_f, a * b, 0.0)
        } else {
            let (l, r) = (2 * node - 1, 2 * node);
            (
                lam + agg.big_lambda[l] + agg.big_lambda[r],
                local_v + 0.5 * agg.v[l] + 0.5 * agg.v[r],
                local_f + 0.5 * agg.big_f[l] + 0.5 * agg.big_f[r],
                a * b + 0.5 * agg.f[l] + 0.5 * agg.f[r],
                0.5 * agg.big_a[l] + 0.5 * agg.big_a[r],
            )
        };
        let c = instance.alpha[i] * exp.pow_p(v) / len;
        agg.big_lambda[i] = big_lambda;
        agg.v[i] = v;
        agg.big_f[i] = big_f;
        agg.f[i] = f;
        agg.big_a[i] = if 2 * node > n { c } else { c + tilde_a };
        agg.a[i] = a;
        agg.b[i] = b;
        agg.c[i] = c;
    }
    agg
}

/// `v_I - A_I` per node; the testing condition holds iff all are `≥ 0`.
pub fn testing_margins(instance: &TreeInstance, exp: &PExponent) -> Vec<f64> {
    let agg = compute_aggregates(instance, exp);
    agg.v.iter().zip(&agg.big_a).map(|(v, a)| v - a).collect()
}

/// Whether every testing margin is at least `-tol·v_I`.
pub fn satisfies_testing_condition(instance: &TreeInstance, exp: &PExponent, tol: f64) -> bool {
    let agg = compute_aggregates(instance, exp);
    agg.v
        .iter()
        .zip(&agg.big_a)
        .all(|(&v, &a)| v - a >= -tol * v)
}

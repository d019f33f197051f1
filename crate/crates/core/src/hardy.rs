//! Both sides of the weighted dual Hardy inequality, the necessity identity
//! and the dual (ancestor-sum) formulation.

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::tree::{compute_aggregates, interval_length, NodeAggregates, TreeInstance};

/// `(1/|I0|) Σ_I α_I f_I^p` with `|I0| = 1`.
pub fn hardy_lhs(agg: &NodeAggregates, instance: &TreeInstance, exp: &PExponent) -> f64 {
    instance
        .alpha()
        .iter()
        .zip(&agg.f)
        .map(|(&al, &f)| al * exp.pow_p(f))
        .sum()
}

/// `C(p)·F_{I0}`.
pub fn hardy_rhs(agg: &NodeAggregates, exp: &PExponent) -> f64 {
    exp.c_p() * agg.big_f[0]
}

/// `Σ α_I f_I^p / Σ φ(I)^p`; bounded by `C(p)` under the testing condition.
pub fn hardy_ratio(instance: &TreeInstance, exp: &PExponent) -> Result<f64> {
    let den: f64 = instance.phi().iter().map(|&x| exp.pow_p(x)).sum();
    if den == 0.0 {
        return Err(Error::ZeroDenominator("phi is identically zero"));
    }
    let agg = compute_aggregates(instance, exp);
    Ok(hardy_lhs(&agg, instance, exp) / den)
}

/// Evaluates the inequality on the subtree of `node` with that node playing
/// the role of the root interval and `φ = λ^{1/p}` there.
///
/// Returns `(lhs, rhs)` where `rhs` carries constant 1. Because
/// `φλ^{1/p'} = λ`, the pair is `(A_node, v_node)`, so the inequality with
/// constant 1 at every node is exactly the testing condition.
pub fn necessity_identity(
    instance: &TreeInstance,
    exp: &PExponent,
    node: usize,
) -> Result<(f64, f64)> {
    let root_len = interval_length(node, instance.depth())?;
    let n = instance.node_count();
    let inv_p = 1.0 / exp.p();
    let inv_q = 1.0 / exp.p_conj();
    let lambda = instance.lambda();
    let alpha = instance.alpha();

    // Nodes of the subtree, level by level.
    let mut nodes = Vec::new();
    let (mut lo, mut hi) = (node, node);
    while lo <= n {
        nodes.extend(lo..=hi.min(n));
        lo *= 2;
        hi = 2 * hi + 1;
    }
    // Direct subtree sums, accumulated bottom-up: S(K) = Σ_{J⊆K} φ(J) λ_J^{1/p'}.
    let mut sums = vec![0.0; n + 1];
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for &k in nodes.iter().rev() {
        let lam = lambda[k - 1];
        let phi = lam.powf(inv_p);
        let mut s = phi * lam.powf(inv_q);
        if 2 * k <= n {
            s += sums[2 * k] + sums[2 * k + 1];
        }
        sums[k] = s;
        let len = interval_length(k, instance.depth())?;
        let f = s / len;
        lhs += alpha[k - 1] * exp.pow_p(f);
        rhs += exp.pow_p(phi);
    }
    Ok((lhs / root_len, rhs / root_len))
}

/// Dual variables: `η = φλ^{-1/p}`, `ω` from `ω^{1-p} = α/|I|^p`, and a dual
/// test function `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualData {
    pub eta: Vec<f64>,
    pub omega: Vec<f64>,
    pub psi: Vec<f64>,
}

impl DualData {
    pub fn new(instance: &TreeInstance, exp: &PExponent, psi: Vec<f64>) -> Result<Self> {
        let n = instance.node_count();
        if psi.len() != n {
            return Err(Error::LengthMismatch {
                field: "psi",
                expected: n,
                found: psi.len(),
            });
        }
        let inv_p = 1.0 / exp.p();
        let eta = instance
            .phi()
            .iter()
            .zip(instance.lambda())
            .map(|(&phi, &lam)| phi * lam.powf(-inv_p))
            .collect();
        let omega = omega_weights(instance, exp);
        Ok(Self { eta, omega, psi })
    }
}

/// `ω_I = (α_I/|I|^p)^{1/(1-p)}`.
pub fn omega_weights(instance: &TreeInstance, exp: &PExponent) -> Vec<f64> {
    let expo = 1.0 / (1.0 - exp.p());
    instance
        .alpha()
        .iter()
        .enumerate()
        .map(|(i, &al)| {
            let len = interval_length(i + 1, instance.depth()).expect("node in range");
            (al / exp.pow_p(len)).powf(expo)
        })
        .collect()
}

/// `(Sψ)(I) = Σ_{J⊇I} ψ(J)`, computed top-down.
pub fn ancestor_sum(psi: &[f64], instance: &TreeInstance) -> Vec<f64> {
    let n = instance.node_count();
    assert_eq!(psi.len(), n, "psi must have one value per node");
    let mut out = vec![0.0; n];
    for node in 1..=n {
        let up = if node == 1 { 0.0 } else { out[node / 2 - 1] };
        out[node - 1] = psi[node - 1] + up;
    }
    out
}

/// `Σ_I (Sψ)(I) η(I) λ_I - Σ_J ψ(J) Σ_{K⊆J} η(K) λ_K`: zero up to rounding,
/// since both are the same double sum over pairs `K ⊆ J`.
pub fn adjointness_gap(eta: &[f64], psi: &[f64], instance: &TreeInstance) -> f64 {
    let n = instance.node_count();
    assert_eq!(eta.len(), n, "eta must have one value per node");
    let lambda = instance.lambda();
    let anc = ancestor_sum(psi, instance);
    let lhs: f64 = (0..n).map(|i| anc[i] * eta[i] * lambda[i]).sum();
    let mut sub = vec![0.0; n];
    for node in (1..=n).rev() {
        let mut s = eta[node - 1] * lambda[node - 1];
        if 2 * node <= n {
            s += sub[2 * node - 1] + sub[2 * node];
        }
        sub[node - 1] = s;
    }
    let rhs: f64 = (0..n).map(|i| psi[i] * sub[i]).sum();
    lhs - rhs
}

/// Magnitude against which [`adjointness_gap`] is compared.
pub fn adjointness_scale(eta: &[f64], psi: &[f64], instance: &TreeInstance) -> f64 {
    let abs_psi: Vec<f64> = psi.iter().map(|x| x.abs()).collect();
    let anc = ancestor_sum(&abs_psi, instance);
    anc.iter()
        .zip(eta)
        .zip(instance.lambda())
        .map(|((s, e), l)| s * e.abs() * l)
        .sum()
}

/// `Σ λ_I (Sψ)(I)^{p'} / Σ ψ(I)^{p'} ω_I`.
pub fn dual_ratio(instance: &TreeInstance, psi: &[f64], exp: &PExponent) -> Result<f64> {
    let omega = omega_weights(instance, exp);
    dual_ratio_with_omega(instance, psi, &omega, exp)
}

pub(crate) fn dual_ratio_with_omega(
    instance: &TreeInstance,
    psi: &[f64],
    omega: &[f64],
    exp: &PExponent,
) -> Result<f64> {
    let q = exp.p_conj();
    if let Some(i) = psi.iter().position(|&x| !(x >= 0.0)) {
        return Err(Error::Negative {
            field: "psi",
            node: i + 1,
            value: psi[i],
        });
    }
    let den: f64 = psi.iter().zip(omega).map(|(&x, &w)| x.powf(q) * w).sum();
    if den == 0.0 {
        return Err(Error::ZeroDenominator("psi is identically zero"));
    }
    let anc = ancestor_sum(psi, instance);
    let num: f64 = anc
        .iter()
        .zip(instance.lambda())
        .map(|(&s, &l)| l * s.powf(q))
        .sum();
    Ok(num / den)
}

/// The two candidate constants for the dual form: `C(p)` and the one that
/// operator-norm duality produces, `C(p)^{p'/p} = (p')^{p'}`.
pub fn dual_constant_candidates(exp: &PExponent) -> (f64, f64) {
    (exp.c_p(), exp.c_p().powf(exp.p_conj() / exp.p()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::build_instance;

    fn three_node() -> (TreeInstance, PExponent) {
        let s = 0.5f64.sqrt();
        let inst = build_instance(1, vec![0.1; 3], vec![1.0, 0.5, 0.5], vec![1.0, s, s]).unwrap();
        (inst, PExponent::new(2.0).unwrap())
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn three_node_sides() {
        let (inst, e) = three_node();
        let agg = compute_aggregates(&inst, &e);
        assert!(close(hardy_lhs(&agg, &inst, &e), 0.6));
        assert!(close(hardy_rhs(&agg, &e), 8.0));
        assert!(close(hardy_ratio(&inst, &e).unwrap(), 0.3));
    }

    #[test]
    fn zero_phi() {
        let (inst, e) = three_node();
        let inst = inst.with_phi(vec![0.0; 3]).unwrap();
        let agg = compute_aggregates(&inst, &e);
        assert_eq!(hardy_lhs(&agg, &inst, &e), 0.0);
        assert_eq!(hardy_rhs(&agg, &e), 0.0);
        assert_eq!(
            hardy_ratio(&inst, &e),
            Err(Error::ZeroDenominator("phi is identically zero"))
        );
    }

    #[test]
    fn single_node_sides() {
        let e = PExponent::new(2.0).unwrap();
        let inst = build_instance(0, vec![1.0], vec![1.0], vec![1.0]).unwrap();
        let agg = compute_aggregates(&inst, &e);
        assert!(close(hardy_lhs(&agg, &inst, &e), 1.0));
        // ratio = α λ^{p-1} whatever φ > 0 is
        let e = PExponent::new(3.0).unwrap();
        for phi in [0.1, 1.0, 7.5] {
            let inst = build_instance(0, vec![0.4], vec![1.7], vec![phi]).unwrap();
            assert!(close(hardy_ratio(&inst, &e).unwrap(), 0.4 * 1.7f64.powi(2)));
        }
    }

    #[test]
    fn necessity_on_three_nodes() {
        let (inst, e) = three_node();
        let (l, r) = necessity_identity(&inst, &e, 1).unwrap();
        assert!(close(l, 0.6) && close(r, 2.0));
        let agg = compute_aggregates(&inst, &e);
        for node in 1..=3 {
            let (l, r) = necessity_identity(&inst, &e, node).unwrap();
            assert!(close(l, agg.big_a[node - 1]));
            assert!(close(r, agg.v[node - 1]));
        }
        assert!(necessity_identity(&inst, &e, 4).is_err());
    }

    #[test]
    fn ancestor_sums() {
        let (inst, _) = three_node();
        assert_eq!(ancestor_sum(&[1.0, 1.0, 1.0], &inst), vec![1.0, 2.0, 2.0]);
        assert_eq!(ancestor_sum(&[1.0, 0.0, 0.0], &inst), vec![1.0, 1.0, 1.0]);
        assert_eq!(ancestor_sum(&[0.0, 1.0, 0.0], &inst), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn adjointness_small_cases() {
        let (inst, _) = three_node();
        assert_eq!(adjointness_gap(&[1.0; 3], &[1.0; 3], &inst), 0.0);
        assert_eq!(adjointness_scale(&[1.0; 3], &[1.0; 3], &inst), 3.0);
        assert_eq!(adjointness_gap(&[0.0; 3], &[0.3, 2.0, 1.0], &inst), 0.0);
    }

    #[test]
    fn dual_ratio_single_node() {
        for p in [1.5, 2.0, 3.0] {
            let e = PExponent::new(p).unwrap();
            let inst = build_instance(0, vec![0.8], vec![1.3], vec![1.0]).unwrap();
            let r = dual_ratio(&inst, &[2.0], &e).unwrap();
            assert!(close(r, 1.3 * 0.8f64.powf(1.0 / (p - 1.0))));
        }
        let e = PExponent::new(2.0).unwrap();
        let inst = build_instance(0, vec![0.8], vec![1.3], vec![1.0]).unwrap();
        assert!(close(dual_ratio(&inst, &[1.0], &e).unwrap(), 1.3 * 0.8));
        assert!(dual_ratio(&inst, &[0.0], &e).is_err());
    }

    #[test]
    fn dual_data_reconstructs_phi() {
        let (inst, e) = three_node();
        let d = DualData::new(&inst, &e, vec![1.0; 3]).unwrap();
        for i in 0..3 {
            let phi = d.eta[i] * inst.lambda()[i].powf(0.5);
            assert!(close(phi, inst.phi()[i]));
            assert!(d.omega[i].is_finite() && d.omega[i] > 0.0);
        }
    }

    #[test]
    fn dual_constants() {
        let e = PExponent::new(2.0).unwrap();
        let (a, b) = dual_constant_candidates(&e);
        assert_eq!(a, 4.0);
        assert!(close(b, 4.0));
        let e = PExponent::new(3.0).unwrap();
        let (_, b) = dual_constant_candidates(&e);
        assert!(close(b, 1.5f64.powf(1.5)));
    }
}

//! The explicit Bellman function
//!
//! ```text
//! B(F, f, A, v) = (p/(p-1))^p F - p^p/(p-1) · f^p / (A + (p-1)v)^(p-1)
//! ```
//!
//! on `D = {F ≥ 0, f ≥ 0, A > 0, v > 0, v ≥ A, f^p ≤ F v^(p-1)}`, its
//! derivatives and spectrum, the midpoint inequality that drives the tree
//! argument, and the node-by-node replay of that argument.
//!
//! Coordinates are ordered `[F, f, A, v]` everywhere.

use std::fmt;

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::tree::{compute_aggregates, interval_length, TreeInstance};

/// Floor standing in for the strict inequalities `A > 0`, `v > 0`.
pub const POSITIVE_FLOOR: f64 = 1e-300;

/// Relative slack for the closed constraints of `D`.
pub const DOMAIN_TOL: f64 = 1e-12;

/// A constraint of `D` that a point fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainViolation {
    NotFinite,
    NegativeBigF,
    NegativeSmallF,
    NonPositiveA,
    NonPositiveV,
    AExceedsV,
    HolderBound,
}

impl fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainViolation::NotFinite => "coordinate not finite",
            DomainViolation::NegativeBigF => "F < 0",
            DomainViolation::NegativeSmallF => "f < 0",
            DomainViolation::NonPositiveA => "A <= 0",
            DomainViolation::NonPositiveV => "v <= 0",
            DomainViolation::AExceedsV => "v < A",
            DomainViolation::HolderBound => "f^p > F v^(p-1)",
        };
        f.write_str(s)
    }
}

/// Result of a membership test; empty means the point is in `D`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainReport {
    pub violations: Vec<DomainViolation>,
}

impl DomainReport {
    pub fn is_member(&self) -> bool {
        self.violations.is_empty()
    }

    fn describe(&self) -> String {
        self.violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn into_result(self, point: [f64; 4]) -> Result<()> {
        if self.is_member() {
            Ok(())
        } else {
            Err(Error::Domain {
                point,
                violations: self.describe(),
            })
        }
    }
}

/// Tolerant membership in `D`: `F, f ≥ -tol`, `A, v ≥` [`POSITIVE_FLOOR`],
/// `v ≥ A(1 - tol)`, `f^p ≤ F v^(p-1) (1 + tol)`.
pub fn in_domain(x: [f64; 4], exp: &PExponent, tol: f64) -> DomainReport {
    let [big_f, f, big_a, v] = x;
    let mut violations = Vec::new();
    if x.iter().any(|c| !c.is_finite()) {
        violations.push(DomainViolation::NotFinite);
        return DomainReport { violations };
    }
    if big_f < -tol {
        violations.push(DomainViolation::NegativeBigF);
    }
    if f < -tol {
        violations.push(DomainViolation::NegativeSmallF);
    }
    if big_a < POSITIVE_FLOOR {
        violations.push(DomainViolation::NonPositiveA);
    }
    if v < POSITIVE_FLOOR {
        violations.push(DomainViolation::NonPositiveV);
    }
    if v < big_a - tol * big_a.abs() {
        violations.push(DomainViolation::AExceedsV);
    }
    let (fc, big_fc, vc) = (f.max(0.0), big_f.max(0.0), v.max(0.0));
    if exp.pow_p(fc) > big_fc * exp.pow_p_minus_1(vc) * (1.0 + tol) {
        violations.push(DomainViolation::HolderBound);
    }
    DomainReport { violations }
}

/// Membership in the closure of `D` (`A, v ≥ 0`), with the same relative
/// slack as [`in_domain`] on the remaining constraints.
pub fn in_closure(x: [f64; 4], exp: &PExponent, tol: f64) -> bool {
    let [big_f, f, big_a, v] = x;
    x.iter().all(|c| c.is_finite())
        && big_f >= 0.0
        && f >= 0.0
        && big_a >= 0.0
        && v >= 0.0
        && v >= big_a - tol * big_a
        && exp.pow_p(f) <= big_f * exp.pow_p_minus_1(v) * (1.0 + tol)
}

/// A point of `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellmanPoint {
    pub big_f: f64,
    pub f: f64,
    pub big_a: f64,
    pub v: f64,
}

impl BellmanPoint {
    /// Validates membership with [`DOMAIN_TOL`]. Tolerated negative `F`, `f`
    /// are clamped to zero.
    pub fn new(coords: [f64; 4], exp: &PExponent) -> Result<Self> {
        in_domain(coords, exp, DOMAIN_TOL).into_result(coords)?;
        Ok(Self::new_unchecked(coords))
    }

    /// Skips validation; used on hot paths whose inputs are in `D` by
    /// construction.
    pub fn new_unchecked(coords: [f64; 4]) -> Self {
        Self {
            big_f: coords[0].max(0.0),
            f: coords[1].max(0.0),
            big_a: coords[2],
            v: coords[3],
        }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.big_f, self.f, self.big_a, self.v]
    }

    /// `A + (p-1)v`.
    #[inline]
    pub fn denominator(&self, exp: &PExponent) -> f64 {
        self.big_a + (exp.p() - 1.0) * self.v
    }
}

/// The closed-form expression of `B` with no domain check.
#[inline]
pub fn bellman_formula(x: [f64; 4], exp: &PExponent) -> f64 {
    let p = exp.p();
    let s = x[2] + (p - 1.0) * x[3];
    let k = p.powf(p) / (p - 1.0);
    exp.c_p() * x[0] - k * exp.pow_p(x[1]) / exp.pow_p_minus_1(s)
}

/// `B(x)` for a validated point.
pub fn bellman_value(x: &BellmanPoint, exp: &PExponent) -> f64 {
    bellman_formula(x.coords(), exp)
}

/// Validates `coords` and evaluates `B`.
pub fn bellman_value_at(coords: [f64; 4], exp: &PExponent) -> Result<f64> {
    Ok(bellman_value(&BellmanPoint::new(coords, exp)?, exp))
}

/// `(B(x), C(p)F - B(x))`; both are nonnegative on `D`.
pub fn bounds_margin(x: &BellmanPoint, exp: &PExponent) -> (f64, f64) {
    let b = bellman_value(x, exp);
    (b, exp.c_p() * x.big_f - b)
}

/// Analytic gradient and Hessian of `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub gradient: [f64; 4],
    pub hessian: [[f64; 4]; 4],
}

fn check_interior(x: &BellmanPoint, exp: &PExponent) -> Result<()> {
    if x.f == 0.0 && exp.p() < 2.0 {
        return Err(Error::BoundarySingular(x.coords()));
    }
    Ok(())
}

/// Gradient and Hessian at an interior point. Fails at `f = 0` when
/// `p < 2`, where `∂²B/∂f²` blows up.
pub fn bellman_derivatives(x: &BellmanPoint, exp: &PExponent) -> Result<Derivatives> {
    check_interior(x, exp)?;
    Ok(derivatives_unchecked(x, exp))
}

pub(crate) fn derivatives_unchecked(x: &BellmanPoint, exp: &PExponent) -> Derivatives {
    let p = exp.p();
    let s = x.denominator(exp);
    let f = x.f;
    let pp1 = p.powf(p + 1.0);
    let fp = exp.pow_p(f);
    let fpm1 = exp.pow_p_minus_1(f);
    let fpm2 = if p == 2.0 { 1.0 } else { f.powf(p - 2.0) };
    let s_pm1 = exp.pow_p_minus_1(s);
    let s_p = s_pm1 * s;
    let s_pp1 = s_p * s;

    let d_a = p.powf(p) * fp / s_p;
    let gradient = [exp.c_p(), -pp1 / (p - 1.0) * fpm1 / s_pm1, d_a, (p - 1.0) * d_a];

    let h_ff = -pp1 * fpm2 / s_pm1;
    let h_fa = pp1 * fpm1 / s_p;
    let h_aa = -pp1 * fp / s_pp1;
    let q = p - 1.0;
    let hessian = [
        [0.0, 0.0, 0.0, 0.0],
        [0.0, h_ff, h_fa, q * h_fa],
        [0.0, h_fa, h_aa, q * h_aa],
        [0.0, q * h_fa, q * h_aa, q * q * h_aa],
    ];
    Derivatives { gradient, hessian }
}

/// Eigenvalues of the Hessian of `B`, sorted descending: `[0, 0, 0, λ̃]`.
///
/// The Hessian is `J^T H₂ J` with `H₂` the Hessian of the one-homogeneous
/// map `(f, S) ↦ -k f^p S^(1-p)` and `S = A + (p-1)v`, so it has rank one
/// and its only nonzero eigenvalue is its trace:
///
/// ```text
/// λ̃ = -p^(p+1) [ f^(p-2)/S^(p-1) + (1 + (p-1)²) f^p/S^(p+1) ] ≤ 0
/// ```
pub fn hessian_spectrum(x: &BellmanPoint, exp: &PExponent) -> Result<[f64; 4]> {
    check_interior(x, exp)?;
    let p = exp.p();
    let s = x.denominator(exp);
    let fpm2 = if p == 2.0 { 1.0 } else { x.f.powf(p - 2.0) };
    let fp = exp.pow_p(x.f);
    let lam = -p.powf(p + 1.0)
        * (fpm2 / s.powf(p - 1.0) + (1.0 + (p - 1.0) * (p - 1.0)) * fp / s.powf(p + 1.0));
    Ok([0.0, 0.0, 0.0, lam])
}

/// The expression `-p^(2p+2) [ f^(p-2)/S^(p-1) + p f^p/S^(p+1) ]` that is
/// often quoted for the nonzero eigenvalue. It has the right sign but is
/// not an eigenvalue of the Hessian (it gives -48 instead of -6 at
/// `p = 2, (·, 1, 1, 1)`); it is kept only so reports can show the gap.
pub fn reference_eigenvalue_expression(x: &BellmanPoint, exp: &PExponent) -> Result<f64> {
    check_interior(x, exp)?;
    let p = exp.p();
    let s = x.denominator(exp);
    let fpm2 = if p == 2.0 { 1.0 } else { x.f.powf(p - 2.0) };
    Ok(-p.powf(2.0 * p + 2.0)
        * (fpm2 / s.powf(p - 1.0) + p * exp.pow_p(x.f) / s.powf(p + 1.0)))
}

/// `h(F, v) = F^(1/p) v^(1/p')`, whose subgraph cuts out the constraint
/// `f ≤ h(F, v)` of `D`.
pub fn support_function(big_f: f64, v: f64, exp: &PExponent) -> f64 {
    big_f.powf(1.0 / exp.p()) * v.powf(1.0 / exp.p_conj())
}

/// Analytic Hessian of [`support_function`] in `(F, v)`.
pub fn support_hessian(big_f: f64, v: f64, exp: &PExponent) -> [[f64; 2]; 2] {
    let (p, q) = (exp.p(), exp.p_conj());
    let (ip, iq) = (1.0 / p, 1.0 / q);
    let h_ff = (1.0 - p) / (p * p) * big_f.powf(ip - 2.0) * v.powf(iq);
    let h_fv = 1.0 / (p * q) * big_f.powf(ip - 1.0) * v.powf(iq - 1.0);
    let h_vv = (1.0 - q) / (q * q) * big_f.powf(ip) * v.powf(iq - 2.0);
    [[h_ff, h_fv], [h_fv, h_vv]]
}

/// Eigenvalues `[0, λ₂]` of the Hessian of `h`; `λ₂ < 0` for `F, v > 0`.
pub fn domain_support_concavity(big_f: f64, v: f64, exp: &PExponent) -> Result<[f64; 2]> {
    if !(big_f > 0.0 && v > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "F and v must be positive, got F = {big_f}, v = {v}"
        )));
    }
    let h = support_hessian(big_f, v, exp);
    Ok([0.0, h[0][0] + h[1][1]])
}

/// The scalar function bounding the second half of the midpoint increment
/// from below:
///
/// ```text
/// φ(y) = C(p) b^p - p^(p+1)/(p-1) y^(p-1) a b + (p-1) p^p y^p a^(p')
/// ```
pub fn lemma_scalar_phi(y: f64, a: f64, b: f64, exp: &PExponent) -> f64 {
    let p = exp.p();
    exp.c_p() * exp.pow_p(b) - p.powf(p + 1.0) / (p - 1.0) * exp.pow_p_minus_1(y) * a * b
        + (p - 1.0) * p.powf(p) * exp.pow_p(y) * a.powf(exp.p_conj())
}

/// Minimiser `ỹ = b / ((p-1) a^(p'-1))` of [`lemma_scalar_phi`] on `y ≥ 0`;
/// `None` when `a = 0` (then `φ ≡ C(p) b^p`).
pub fn lemma_minimizer(a: f64, b: f64, exp: &PExponent) -> Option<f64> {
    if a > 0.0 {
        Some(b / ((exp.p() - 1.0) * a.powf(exp.p_conj() - 1.0)))
    } else {
        None
    }
}

/// Which right-hand side of the midpoint inequality to subtract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginKind {
    /// `p^p f^p / (A + (p-1)v)^p · c`
    Strong,
    /// `f^p / v^p · c`
    Weak,
}

/// `(F̃ + b^p, f̃ + ab, Ã + c, ṽ + a^(p'))` with tildes the midpoints of
/// `xm`, `xp`.
pub fn composed_point(
    xm: &BellmanPoint,
    xp: &BellmanPoint,
    a: f64,
    b: f64,
    c: f64,
    exp: &PExponent,
) -> [f64; 4] {
    [
        0.5 * xm.big_f + 0.5 * xp.big_f + exp.pow_p(b),
        0.5 * xm.f + 0.5 * xp.f + a * b,
        0.5 * xm.big_a + 0.5 * xp.big_a + c,
        0.5 * xm.v + 0.5 * xp.v + a.powf(exp.p_conj()),
    ]
}

/// `B(x) - ½[B(xm) + B(xp)] - R` at the composed point `x`; nonnegative
/// for every admissible input.
pub fn midpoint_margin(
    xm: &BellmanPoint,
    xp: &BellmanPoint,
    a: f64,
    b: f64,
    c: f64,
    exp: &PExponent,
    kind: MarginKind,
) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0 && c >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "increments must be nonnegative, got a = {a}, b = {b}, c = {c}"
        )));
    }
    let x = BellmanPoint::new(composed_point(xm, xp, a, b, c, exp), exp)?;
    let p = exp.p();
    let r = match kind {
        MarginKind::Strong => p.powf(p) * exp.pow_p(x.f / x.denominator(exp)) * c,
        MarginKind::Weak => exp.pow_p(x.f / x.v) * c,
    };
    Ok(bellman_value(&x, exp) - 0.5 * (bellman_value(xm, exp) + bellman_value(xp, exp)) - r)
}

/// Output of [`telescoping_replay`].
#[derive(Debug, Clone, PartialEq)]
pub struct TelescopingCertificate {
    /// `|I|B(x_I) - |I₋|B(x₋) - |I₊|B(x₊) - α_I f_I^p` per node, children
    /// terms dropped at leaves.
    pub margins: Vec<f64>,
    /// Magnitude of the terms entering each margin.
    pub scales: Vec<f64>,
    /// `Σ α_I f_I^p`.
    pub lhs_sum: f64,
    /// `|I0| B(x_{I0})`.
    pub bellman_root: f64,
    /// `|I0| C(p) F_{I0}`.
    pub upper_bound: f64,
}

impl TelescopingCertificate {
    /// Smallest margin relative to its scale (0 when all scales vanish).
    pub fn min_relative_margin(&self) -> f64 {
        self.margins
            .iter()
            .zip(&self.scales)
            .map(|(&m, &s)| if s > 0.0 { m / s } else { m.min(0.0) })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Every margin `≥ -tol·scale` and
    /// `Σ α f^p ≤ B(x_{I0}) ≤ C(p)F_{I0}` up to `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        let all = self
            .margins
            .iter()
            .zip(&self.scales)
            .all(|(&m, &s)| m >= -tol * s);
        let slack = tol * self.upper_bound.abs().max(self.lhs_sum.abs());
        all && self.lhs_sum <= self.bellman_root + slack && self.bellman_root <= self.upper_bound + slack
    }
}

/// Replays the Bellman argument on every node and sums it up.
///
/// Needs the testing condition; a node whose point falls outside `D` is
/// reported as an error.
pub fn telescoping_replay(
    instance: &TreeInstance,
    exp: &PExponent,
) -> Result<TelescopingCertificate> {
    let agg = compute_aggregates(instance, exp);
    let n = instance.node_count();
    let mut values = vec![0.0; n];
    for node in 1..=n {
        let x = BellmanPoint::new(agg.point(node), exp).map_err(|e| Error::NodeDomain {
            node,
            source: Box::new(e),
        })?;
        values[node - 1] = bellman_value(&x, exp);
    }
    let mut margins = vec![0.0; n];
    let mut scales = vec![0.0; n];
    let mut lhs_sum = 0.0;
    for node in 1..=n {
        let i = node - 1;
        let len = interval_length(node, instance.depth())?;
        let gain = instance.alpha()[i] * exp.pow_p(agg.f[i]);
        lhs_sum += gain;
        let mut m = len * values[i];
        if 2 * node <= n {
            let half = 0.5 * len;
            m -= half * values[2 * node - 1] + half * values[2 * node];
        }
        margins[i] = m - gain;
        scales[i] = len * exp.c_p() * agg.big_f[i] + gain;
    }
    Ok(TelescopingCertificate {
        margins,
        scales,
        lhs_sum,
        bellman_root: values[0],
        upper_bound: exp.c_p() * agg.big_f[0],
    })
}

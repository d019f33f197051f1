//! Numerical exploration of the best constant.
//!
//! [`saturating_alpha`] builds weights for which the testing condition is
//! an equality at every node. [`maximize_ratio`] then searches for the test
//! function that maximises the Hardy ratio, which the inequality caps at
//! `C(p)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::hardy::{ancestor_sum, omega_weights};
use crate::sampling::{keyed_rng, log_uniform, open_unit};
use crate::tree::{build_instance, compute_aggregates, interval_length, node_count, TreeInstance};

/// Floor used for weights at nodes that cannot be saturated.
pub const ALPHA_FLOOR: f64 = 1e-300;

/// Weights produced by [`saturating_alpha`].
#[derive(Debug, Clone, PartialEq)]
pub struct SaturatedAlpha {
    pub alpha: Vec<f64>,
    /// 1-based nodes where the required weight was not positive.
    pub unsaturated: Vec<usize>,
}

/// Bottom-up weights with `A_I = v_I` at every node:
/// `α_I = |I| (v_I - ½(A₋ + A₊)) / v_I^p`, leaves `α_I = |I| v_I^(1-p)`.
pub fn saturating_alpha(depth: u32, lambda: &[f64], exp: &PExponent) -> Result<SaturatedAlpha> {
    let n = node_count(depth);
    let probe = build_instance(depth, vec![1.0; n], lambda.to_vec(), vec![0.0; n])?;
    let v = compute_aggregates(&probe, exp).v;
    let mut alpha = vec![0.0; n];
    let mut big_a = vec![0.0; n];
    let mut unsaturated = Vec::new();
    for node in (1..=n).rev() {
        let i = node - 1;
        let len = interval_length(node, depth)?;
        let tilde = if 2 * node <= n {
            0.5 * big_a[2 * node - 1] + 0.5 * big_a[2 * node]
        } else {
            0.0
        };
        let c = v[i] - tilde;
        let a = c * len / exp.pow_p(v[i]);
        if a > 0.0 && a.is_finite() {
            alpha[i] = a;
        } else {
            alpha[i] = ALPHA_FLOOR;
            unsaturated.push(node);
        }
        big_a[i] = alpha[i] * exp.pow_p(v[i]) / len + tilde;
    }
    unsaturated.reverse();
    Ok(SaturatedAlpha { alpha, unsaturated })
}

/// A ratio `N(x) / Σ w_i x_i^q` over `x ≥ 0` with `N` convex and
/// homogeneous of degree `q`, so the ratio is scale-invariant.
pub trait HomogeneousRatio: Sync {
    fn dim(&self) -> usize;
    /// The degree `q > 1`.
    fn degree(&self) -> f64;
    fn weights(&self) -> &[f64];
    /// Writes `∇N(x)` into `grad` and returns `N(x)`.
    fn numerator_with_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
    fn numerator(&self, x: &[f64]) -> f64;

    fn denominator(&self, x: &[f64]) -> f64 {
        let q = self.degree();
        x.iter()
            .zip(self.weights())
            .map(|(&xi, &w)| w * xi.powf(q))
            .sum()
    }

    fn ratio(&self, x: &[f64]) -> f64 {
        self.numerator(x) / self.denominator(x)
    }
}

/// `Σ α_I f_I^p` as a function of `φ`, over `Σ φ^p`.
pub struct HardyObjective {
    exp: PExponent,
    alpha: Vec<f64>,
    lambda_weight: Vec<f64>,
    inv_len: Vec<f64>,
    unit: Vec<f64>,
}

impl HardyObjective {
    pub fn new(instance: &TreeInstance, exp: &PExponent) -> Self {
        let n = instance.node_count();
        let inv_q = 1.0 / exp.p_conj();
        Self {
            exp: *exp,
            alpha: instance.alpha().to_vec(),
            lambda_weight: instance.lambda().iter().map(|l| l.powf(inv_q)).collect(),
            inv_len: (1..=n)
                .map(|k| 1.0 / interval_length(k, instance.depth()).expect("in range"))
                .collect(),
            unit: vec![1.0; n],
        }
    }

    fn averages(&self, phi: &[f64]) -> Vec<f64> {
        let n = phi.len();
        let mut sums = vec![0.0; n];
        for node in (1..=n).rev() {
            let mut s = phi[node - 1] * self.lambda_weight[node - 1];
            if 2 * node <= n {
                s += sums[2 * node - 1] + sums[2 * node];
            }
            sums[node - 1] = s;
        }
        sums.iter().zip(&self.inv_len).map(|(s, il)| s * il).collect()
    }
}

impl HomogeneousRatio for HardyObjective {
    fn dim(&self) -> usize {
        self.alpha.len()
    }

    fn degree(&self) -> f64 {
        self.exp.p()
    }

    fn weights(&self) -> &[f64] {
        &self.unit
    }

    fn numerator(&self, phi: &[f64]) -> f64 {
        self.averages(phi)
            .iter()
            .zip(&self.alpha)
            .map(|(&f, &a)| a * self.exp.pow_p(f))
            .sum()
    }

    fn numerator_with_gradient(&self, phi: &[f64], grad: &mut [f64]) -> f64 {
        let p = self.exp.p();
        let f = self.averages(phi);
        let mut total = 0.0;
        let n = phi.len();
        let mut coeff = vec![0.0; n];
        for i in 0..n {
            let fpm1 = self.exp.pow_p_minus_1(f[i]);
            total += self.alpha[i] * fpm1 * f[i];
            coeff[i] = self.alpha[i] * p * fpm1 * self.inv_len[i];
        }
        // ∂N/∂φ_J = λ_J^{1/p'} Σ_{K ⊇ J} coeff_K
        for node in 1..=n {
            let up = if node == 1 { 0.0 } else { coeff[node / 2 - 1] };
            coeff[node - 1] += up;
            grad[node - 1] = self.lambda_weight[node - 1] * coeff[node - 1];
        }
        total
    }
}

/// `Σ λ_I (Sψ)(I)^{p'}` over `Σ ω_I ψ(I)^{p'}`.
pub struct DualObjective {
    exp: PExponent,
    instance: TreeInstance,
    omega: Vec<f64>,
}

impl DualObjective {
    pub fn new(instance: &TreeInstance, exp: &PExponent) -> Self {
        Self {
            exp: *exp,
            instance: instance.clone(),
            omega: omega_weights(instance, exp),
        }
    }
}

impl HomogeneousRatio for DualObjective {
    fn dim(&self) -> usize {
        self.omega.len()
    }

    fn degree(&self) -> f64 {
        self.exp.p_conj()
    }

    fn weights(&self) -> &[f64] {
        &self.omega
    }

    fn numerator(&self, psi: &[f64]) -> f64 {
        let q = self.exp.p_conj();
        ancestor_sum(psi, &self.instance)
            .iter()
            .zip(self.instance.lambda())
            .map(|(&s, &l)| l * s.powf(q))
            .sum()
    }

    fn numerator_with_gradient(&self, psi: &[f64], grad: &mut [f64]) -> f64 {
        let q = self.exp.p_conj();
        let anc = ancestor_sum(psi, &self.instance);
        let lambda = self.instance.lambda();
        let n = psi.len();
        let mut total = 0.0;
        for i in 0..n {
            let sq1 = anc[i].powf(q - 1.0);
            total += lambda[i] * sq1 * anc[i];
            grad[i] = lambda[i] * q * sq1;
        }
        // ∂N/∂ψ_J = Σ_{I ⊆ J} λ_I q (Sψ)_I^{q-1}
        for node in (1..=n).rev() {
            if 2 * node <= n {
                grad[node - 1] += grad[2 * node - 1] + grad[2 * node];
            }
        }
        total
    }
}

/// Settings for [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub iters: usize,
    /// Initial (and largest) relaxation step in `(0, 1]`.
    pub step: f64,
    /// Stop once an accepted step improves the ratio by less than this,
    /// relatively.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            iters: 5000,
            step: 1.0,
            rel_tol: 1e-10,
            seed: 0,
        }
    }
}

/// Best iterate of an ascent run.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    /// Maximiser, normalised so that the denominator equals 1.
    pub x: Vec<f64>,
    pub ratio: f64,
    pub iterations: usize,
    /// Ratio after each iteration; non-decreasing.
    pub history: Vec<f64>,
}

fn normalize<O: HomogeneousRatio + ?Sized>(obj: &O, x: &mut [f64]) -> bool {
    let d = obj.denominator(x);
    if !(d > 0.0 && d.is_finite()) {
        return false;
    }
    let s = d.powf(-1.0 / obj.degree());
    x.iter_mut().for_each(|xi| *xi *= s);
    true
}

/// Projected ascent on the unit sphere of the weighted `q`-norm.
///
/// Each step moves toward the point of the sphere that maximises the
/// linearisation `⟨∇N(x), y⟩`, namely `y_i ∝ (max(∂_i N, 0)/w_i)^(1/(q-1))`,
/// then renormalises; nonnegativity is kept because both endpoints are
/// nonnegative. A full step is the nonlinear power iteration and never
/// decreases the ratio when `N` is convex; if a step fails to improve, it is
/// halved.
pub fn maximize<O: HomogeneousRatio + ?Sized>(
    obj: &O,
    start: Vec<f64>,
    opts: &AscentOptions,
) -> Result<AscentResult> {
    let n = obj.dim();
    let q = obj.degree();
    let w = obj.weights();
    let mut x = start;
    if x.len() != n || !normalize(obj, &mut x) {
        return Err(Error::InvalidArgument(
            "starting point must be nonnegative and nonzero".into(),
        ));
    }
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut ratio = obj.numerator_with_gradient(&x, &mut grad);
    let mut step = opts.step.clamp(f64::MIN_POSITIVE, 1.0);
    let mut history = Vec::with_capacity(opts.iters.min(1 << 16));
    let mut iterations = 0;
    let expo = 1.0 / (q - 1.0);
    while iterations < opts.iters {
        iterations += 1;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient {
                iteration: iterations,
            });
        }
        for i in 0..n {
            dir[i] = (grad[i].max(0.0) / w[i]).powf(expo);
        }
        if !normalize(obj, &mut dir) {
            history.push(ratio);
            break;
        }
        for i in 0..n {
            trial[i] = (1.0 - step) * x[i] + step * dir[i];
        }
        if !normalize(obj, &mut trial) {
            history.push(ratio);
            break;
        }
        let trial_ratio = obj.numerator(&trial);
        if trial_ratio > ratio {
            let gain = (trial_ratio - ratio) / ratio.abs().max(f64::MIN_POSITIVE);
            std::mem::swap(&mut x, &mut trial);
            ratio = obj.numerator_with_gradient(&x, &mut grad);
            history.push(ratio);
            if gain < opts.rel_tol {
                break;
            }
            step = (2.0 * step).min(opts.step.min(1.0));
        } else {
            history.push(ratio);
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    Ok(AscentResult {
        x,
        ratio,
        iterations,
        history,
    })
}

/// Random strictly positive start, stream `(seed, index)`.
pub fn random_start(dim: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = keyed_rng(seed, index);
    (0..dim).map(|_| open_unit(&mut rng)).collect()
}

/// Single-start maximisation of the Hardy ratio over `φ ≥ 0`; returns the
/// maximiser with `Σ φ^p = 1` and the ratio.
pub fn maximize_ratio(
    instance: &TreeInstance,
    exp: &PExponent,
    iters: usize,
    step: f64,
    seed: u64,
) -> Result<AscentResult> {
    let obj = HardyObjective::new(instance, exp);
    let opts = AscentOptions {
        iters,
        step,
        seed,
        ..AscentOptions::default()
    };
    maximize(&obj, random_start(obj.dim(), seed, 0), &opts)
}

/// Runs `starts` ascents from streams `(seed, k)` and keeps the best
/// (lowest `k` on ties).
pub fn maximize_multistart<O: HomogeneousRatio + ?Sized>(
    obj: &O,
    opts: &AscentOptions,
    starts: usize,
) -> Result<AscentResult> {
    let runs: Vec<Result<AscentResult>> = (0..starts.max(1))
        .into_par_iter()
        .map(|k| maximize(obj, random_start(obj.dim(), opts.seed, k as u64), opts))
        .collect();
    let mut best: Option<AscentResult> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.ratio > b.ratio) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Best Hardy ratio over 16 starts.
pub fn maximize_ratio_multistart(
    instance: &TreeInstance,
    exp: &PExponent,
    opts: &AscentOptions,
    starts: usize,
) -> Result<AscentResult> {
    maximize_multistart(&HardyObjective::new(instance, exp), opts, starts)
}

/// Instance families for sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `λ_I = |I|`.
    Uniform,
    /// `λ_I = |I|^s`.
    Geometric { exponent: f64 },
    /// i.i.d. log-uniform `λ_I` on `[1e-3, 1]`.
    Random,
}

impl Family {
    /// Parses `uniform`, `random`, `geometric` (`s = 2`) or `geometric:S`.
    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "uniform" => Ok(Family::Uniform),
            "random" => Ok(Family::Random),
            "geometric" => Ok(Family::Geometric { exponent: 2.0 }),
            _ => {
                if let Some(s) = id.strip_prefix("geometric:") {
                    let exponent = s
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::UnknownFamily(id.to_string()))?;
                    Ok(Family::Geometric { exponent })
                } else {
                    Err(Error::UnknownFamily(id.to_string()))
                }
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            Family::Uniform => "uniform".into(),
            Family::Random => "random".into(),
            Family::Geometric { exponent } => format!("geometric:{exponent}"),
        }
    }

    /// The measure of this family on a tree of the given depth; `Random`
    /// draws from stream `(seed, index)`.
    pub fn lambda(&self, depth: u32, seed: u64, index: u64) -> Vec<f64> {
        let n = node_count(depth);
        let len = |k: usize| interval_length(k, depth).expect("in range");
        match *self {
            Family::Uniform => (1..=n).map(len).collect(),
            Family::Geometric { exponent } => (1..=n).map(|k| len(k).powf(exponent)).collect(),
            Family::Random => {
                let mut rng = keyed_rng(seed, index);
                (0..n).map(|_| log_uniform(&mut rng, 1e-3, 1.0)).collect()
            }
        }
    }
}

/// Family instance with saturated weights and `φ ≡ 1`.
pub fn saturated_family_instance(
    family: Family,
    depth: u32,
    exp: &PExponent,
    seed: u64,
    index: u64,
) -> Result<(TreeInstance, SaturatedAlpha)> {
    let lambda = family.lambda(depth, seed, index);
    let sat = saturating_alpha(depth, &lambda, exp)?;
    let n = node_count(depth);
    let inst = build_instance(depth, sat.alpha.clone(), lambda, vec![1.0; n])?;
    Ok((inst, sat))
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub depth: u32,
    pub family: String,
    pub ratio: f64,
    pub c_p: f64,
    pub fraction: f64,
}

pub const SWEEP_HEADER: [&str; 6] = ["p", "depth", "family", "ratio", "cP", "fraction"];

/// For each `p`: build the family instance, saturate the weights, maximise
/// the ratio over `starts` starts and report it against `C(p)`.
pub fn p_sweep(
    depth: u32,
    family: Family,
    p_grid: &[f64],
    seed: u64,
    opts: &AscentOptions,
    starts: usize,
) -> Result<Vec<SweepRow>> {
    p_grid
        .iter()
        .enumerate()
        .map(|(task, &p)| {
            let exp = PExponent::new(p)?;
            let (inst, _) = saturated_family_instance(family, depth, &exp, seed, task as u64)?;
            let run_opts = AscentOptions {
                seed: seed.wrapping_add(task as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                ..*opts
            };
            let best = maximize_ratio_multistart(&inst, &exp, &run_opts, starts)?;
            Ok(SweepRow {
                p,
                depth,
                family: family.id(),
                ratio: best.ratio,
                c_p: exp.c_p(),
                fraction: best.ratio / exp.c_p(),
            })
        })
        .collect()
}

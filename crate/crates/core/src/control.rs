//! The stochastic control problem whose value function is `B`.
//!
//! State `X = (F, f, A, v)`, control `u = (u1, .., u4, u5)` with `u5 ≥ 0`,
//! dynamics driven by one scalar Brownian motion:
//!
//! ```text
//! dX = (0, 0, -u5, 0) dt + (u1, u2, u3, u4) dB
//! ```
//!
//! running payoff `p^p (f/(A + (p-1)v))^p u5` until the exit time from the
//! domain, then the bequest `B(X_τ)` (continuously extended to the closure).
//!
//! Paths are simulated by Euler–Maruyama with exit detected on the time
//! grid; the exit state is the last state inside the closed domain and the
//! payoff is a left-endpoint sum. Path `i` of seed `s` draws its Gaussian
//! increments from the ChaCha8 stream `(s, i)` through the ziggurat
//! transform of `rand_distr::StandardNormal`, one draw per step, so results
//! do not depend on scheduling.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bellman::{
    bellman_formula, bellman_value, derivatives_unchecked, in_closure, BellmanPoint, DOMAIN_TOL,
};
use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::sampling::{keyed_rng, log_uniform, open_unit};

/// Diffusion loadings `σ = (u1, .., u4)` and drift magnitude `u5 ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlVector {
    pub loadings: [f64; 4],
    pub drift: f64,
}

impl ControlVector {
    pub const ZERO: ControlVector = ControlVector {
        loadings: [0.0; 4],
        drift: 0.0,
    };

    pub const DRIFT_ONLY: ControlVector = ControlVector {
        loadings: [0.0; 4],
        drift: 1.0,
    };

    pub fn new(loadings: [f64; 4], drift: f64) -> Result<Self> {
        if !(drift >= 0.0 && drift.is_finite()) || loadings.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "control needs finite loadings and u5 >= 0, got {loadings:?}, {drift}"
            )));
        }
        Ok(Self { loadings, drift })
    }

    pub fn from_slice(u: [f64; 5]) -> Result<Self> {
        Self::new([u[0], u[1], u[2], u[3]], u[4])
    }

    pub fn as_array(&self) -> [f64; 5] {
        let l = self.loadings;
        [l[0], l[1], l[2], l[3], self.drift]
    }

    fn diffuses(&self) -> bool {
        self.loadings.iter().any(|&l| l != 0.0)
    }
}

/// Default loadings of the `diffuse-then-drift` rule.
pub const DEFAULT_LOADINGS: [f64; 4] = [0.5, 0.5, 0.5, 0.5];

/// A control process given as a function of time and current state.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlPolicy {
    /// `(0, 0, 0, 0, 1)`: drives `A` down at unit speed.
    DriftOnly,
    /// Nothing moves, nothing is earned.
    Zero,
    Constant(ControlVector),
    /// `(loadings, 0)` before `switch_time`, drift-only afterwards.
    DiffuseThenDrift { switch_time: f64, loadings: [f64; 4] },
    /// Piece `k` holds on `[breakpoints[k-1], breakpoints[k])`; there is one
    /// more piece than breakpoints.
    Schedule {
        breakpoints: Vec<f64>,
        pieces: Vec<ControlVector>,
    },
    /// Feedback rule `σ(x) = scale·x`, `u5 = drift`. Moves along rays of the
    /// domain, where `B` is linear.
    Proportional { scale: f64, drift: f64 },
}

impl ControlPolicy {
    pub fn schedule(breakpoints: Vec<f64>, pieces: Vec<ControlVector>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidArgument(
                "a schedule needs exactly one more piece than breakpoints".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "schedule breakpoints must be strictly increasing".into(),
            ));
        }
        for piece in &pieces {
            ControlVector::new(piece.loadings, piece.drift)?;
        }
        Ok(ControlPolicy::Schedule {
            breakpoints,
            pieces,
        })
    }

    /// Parses `drift-only`, `zero`, `diffuse-then-drift:S` (also
    /// `diffuse-then-drift(S)`), `constant:u1,u2,u3,u4,u5` and
    /// `proportional:K,U5`.
    pub fn parse(name: &str) -> Result<Self> {
        let bad = || Error::UnknownPolicy(name.to_string());
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        match name {
            "drift-only" => return Ok(ControlPolicy::DriftOnly),
            "zero" => return Ok(ControlPolicy::Zero),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix("diffuse-then-drift") {
            let arg = rest
                .strip_prefix(':')
                .or_else(|| rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')))
                .ok_or_else(bad)?;
            let s = nums(arg)?;
            if s.len() != 1 || !(s[0] >= 0.0) {
                return Err(bad());
            }
            return Ok(ControlPolicy::DiffuseThenDrift {
                switch_time: s[0],
                loadings: DEFAULT_LOADINGS,
            });
        }
        if let Some(arg) = name.strip_prefix("constant:") {
            let u = nums(arg)?;
            let u: [f64; 5] = u.try_into().map_err(|_| bad())?;
            return Ok(ControlPolicy::Constant(ControlVector::from_slice(u)?));
        }
        if let Some(arg) = name.strip_prefix("proportional:") {
            let u = nums(arg)?;
            if u.len() != 2 || !(u[1] >= 0.0) {
                return Err(bad());
            }
            return Ok(ControlPolicy::Proportional {
                scale: u[0],
                drift: u[1],
            });
        }
        Err(bad())
    }

    /// The control in force at time `t` in state `x`.
    pub fn control(&self, t: f64, x: &[f64; 4]) -> ControlVector {
        match self {
            ControlPolicy::DriftOnly => ControlVector::DRIFT_ONLY,
            ControlPolicy::Zero => ControlVector::ZERO,
            ControlPolicy::Constant(u) => *u,
            ControlPolicy::DiffuseThenDrift {
                switch_time,
                loadings,
            } => {
                if t < *switch_time {
                    ControlVector {
                        loadings: *loadings,
                        drift: 0.0,
                    }
                } else {
                    ControlVector::DRIFT_ONLY
                }
            }
            ControlPolicy::Schedule {
                breakpoints,
                pieces,
            } => {
                let k = breakpoints.partition_point(|&b| b <= t);
                pieces[k]
            }
            ControlPolicy::Proportional { scale, drift } => ControlVector {
                loadings: x.map(|c| scale * c),
                drift: *drift,
            },
        }
    }

    /// `true` when no control of the policy carries diffusion, so every path
    /// is the same.
    pub fn is_deterministic(&self) -> bool {
        match self {
            ControlPolicy::DriftOnly | ControlPolicy::Zero => true,
            ControlPolicy::Constant(u) => !u.diffuses(),
            ControlPolicy::DiffuseThenDrift {
                switch_time,
                loadings,
            } => *switch_time <= 0.0 || loadings.iter().all(|&l| l == 0.0),
            ControlPolicy::Schedule { pieces, .. } => pieces.iter().all(|u| !u.diffuses()),
            ControlPolicy::Proportional { scale, .. } => *scale == 0.0,
        }
    }
}

/// `p^p (x2/(x3 + (p-1)x4))^p u5`.
pub fn payoff_density(x: [f64; 4], drift: f64, exp: &PExponent) -> Result<f64> {
    let p = exp.p();
    let s = x[2] + (p - 1.0) * x[3];
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "payoff density needs A + (p-1)v > 0 at {x:?}"
        )));
    }
    Ok(payoff_unchecked(x, drift, exp))
}

#[inline]
fn payoff_unchecked(x: [f64; 4], drift: f64, exp: &PExponent) -> f64 {
    if drift == 0.0 {
        return 0.0;
    }
    let p = exp.p();
    let s = x[2] + (p - 1.0) * x[3];
    if s > 0.0 {
        p.powf(p) * exp.pow_p(x[1] / s) * drift
    } else {
        0.0
    }
}

/// `B` extended continuously to the closure of the domain; `0` at the
/// corner points `(F, 0, 0, 0)`.
pub fn bequest_ext(x: [f64; 4], exp: &PExponent) -> Result<f64> {
    if !in_closure(x, exp, DOMAIN_TOL) {
        return Err(Error::Domain {
            point: x,
            violations: "outside the closure of the domain".into(),
        });
    }
    Ok(bequest_unchecked(x, exp))
}

#[inline]
fn bequest_unchecked(x: [f64; 4], exp: &PExponent) -> f64 {
    let s = x[2] + (exp.p() - 1.0) * x[3];
    if s > 0.0 {
        bellman_formula(x, exp)
    } else {
        0.0
    }
}

/// `(L^u B)(x) = -∂B/∂A·u5 + ½ σᵀ H σ`.
///
/// The Hessian is `Jᵀ H₂ J` in the variables `(f, S)`, `S = A + (p-1)v`, so
/// only `σ_f` and `σ_A + (p-1)σ_v` enter; the `f^(p-2)` term is skipped when
/// `σ_f = 0`.
pub fn generator(x: [f64; 4], u: &ControlVector, exp: &PExponent) -> f64 {
    let p = exp.p();
    let f = x[1];
    let s = x[2] + (p - 1.0) * x[3];
    if !(s > 0.0) {
        return 0.0;
    }
    let pp1 = p.powf(p + 1.0);
    let fp = exp.pow_p(f);
    let s_pm1 = exp.pow_p_minus_1(s);
    let s_p = s_pm1 * s;
    let d_a = p.powf(p) * fp / s_p;
    let sig_f = u.loadings[1];
    let sig_s = u.loadings[2] + (p - 1.0) * u.loadings[3];
    let mut quad = -pp1 * fp / (s_p * s) * sig_s * sig_s;
    if sig_f != 0.0 {
        let fpm2 = if p == 2.0 { 1.0 } else { f.powf(p - 2.0) };
        quad += -pp1 * fpm2 / s_pm1 * sig_f * sig_f
            + 2.0 * pp1 * exp.pow_p_minus_1(f) / s_p * sig_f * sig_s;
    }
    -d_a * u.drift + 0.5 * quad
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub h: f64,
    /// States on the grid, starting point first, up to the exit state.
    pub states: Vec<[f64; 4]>,
    /// Start time of the step that left the domain, or the horizon.
    pub exit_time: f64,
    /// The path left the domain before the horizon.
    pub exited: bool,
    /// The path was stopped at the horizon without exiting.
    pub truncated: bool,
    pub payoff_integral: f64,
    /// `B` at the exit state; 0 for truncated paths.
    pub bequest_value: f64,
    /// `B(X_T)` for truncated paths, 0 otherwise.
    pub terminal_value: f64,
    /// `payoff_integral + bequest_value`.
    pub total_j: f64,
}

impl PathSample {
    /// The value of the problem stopped at `τ ∧ T`, where truncated paths
    /// are paid `B(X_T)`.
    pub fn stopped_value(&self) -> f64 {
        self.total_j + self.terminal_value
    }
}

#[derive(Debug, Clone, Copy)]
struct PathOutcome {
    last: [f64; 4],
    exited: bool,
    steps: usize,
    payoff: f64,
    generator_integral: f64,
}

fn step_count(h: f64, horizon: f64) -> usize {
    (horizon / h - 1e-9).ceil().max(0.0) as usize
}

fn validate_sim(x0: &BellmanPoint, h: f64, horizon: f64, exp: &PExponent) -> Result<()> {
    BellmanPoint::new(x0.coords(), exp)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step h must be positive, got {h}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_path<R: Rng>(
    x0: [f64; 4],
    policy: &ControlPolicy,
    h: f64,
    n_steps: usize,
    exp: &PExponent,
    rng: &mut R,
    with_generator: bool,
    mut record: impl FnMut(&[f64; 4]),
) -> PathOutcome {
    let sqrt_h = h.sqrt();
    let mut x = x0;
    let mut payoff = 0.0;
    let mut gen_int = 0.0;
    for k in 0..n_steps {
        let t = k as f64 * h;
        let u = policy.control(t, &x);
        let z: f64 = rng.sample(StandardNormal);
        let dw = sqrt_h * z;
        let l = u.loadings;
        let next = [
            x[0] + l[0] * dw,
            x[1] + l[1] * dw,
            x[2] - u.drift * h + l[2] * dw,
            x[3] + l[3] * dw,
        ];
        if !in_closure(next, exp, DOMAIN_TOL) {
            return PathOutcome {
                last: x,
                exited: true,
                steps: k,
                payoff,
                generator_integral: gen_int,
            };
        }
        payoff += h * payoff_unchecked(x, u.drift, exp);
        if with_generator {
            gen_int += h * generator(x, &u, exp);
        }
        x = next;
        record(&x);
    }
    PathOutcome {
        last: x,
        exited: false,
        steps: n_steps,
        payoff,
        generator_integral: gen_int,
    }
}

/// Simulates path `path_index` of `seed` with step `h` up to `horizon`.
pub fn simulate_path(
    x0: &BellmanPoint,
    policy: &ControlPolicy,
    h: f64,
    horizon: f64,
    seed: u64,
    path_index: u64,
    exp: &PExponent,
) -> Result<PathSample> {
    validate_sim(x0, h, horizon, exp)?;
    let mut rng = keyed_rng(seed, path_index);
    let mut states = vec![x0.coords()];
    let out = run_path(
        x0.coords(),
        policy,
        h,
        step_count(h, horizon),
        exp,
        &mut rng,
        false,
        |x| states.push(*x),
    );
    let end_value = bequest_unchecked(out.last, exp);
    let (bequest_value, terminal_value) = if out.exited {
        (end_value, 0.0)
    } else {
        (0.0, end_value)
    };
    Ok(PathSample {
        h,
        states,
        exit_time: out.steps as f64 * h,
        exited: out.exited,
        truncated: !out.exited,
        payoff_integral: out.payoff,
        bequest_value,
        terminal_value,
        total_j: out.payoff + bequest_value,
    })
}

/// Sum by recursive halving, so the result depends only on the order of
/// `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    if xs.iter().all(|&x| x == xs[0]) {
        return (xs[0], 0.0);
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of the payoff of a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueEstimate {
    /// Mean of the `τ ∧ T` value (truncated paths paid `B(X_T)`).
    pub mean: f64,
    pub std_error: f64,
    /// Mean of payoff plus bequest on exit only (truncated paths paid 0).
    pub exit_only_mean: f64,
    pub exit_only_std_error: f64,
    pub truncated_fraction: f64,
    pub n_paths: usize,
}

#[derive(Debug, Clone, Copy)]
struct PathSummary {
    stopped: f64,
    exit_only: f64,
    truncated: bool,
    dynkin: f64,
}

#[allow(clippy::too_many_arguments)]
fn summarize_paths(
    x0: &BellmanPoint,
    policy: &ControlPolicy,
    h: f64,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    exp: &PExponent,
    with_generator: bool,
) -> Result<Vec<PathSummary>> {
    validate_sim(x0, h, horizon, exp)?;
    if n_paths < 2 {
        return Err(Error::InvalidArgument("need at least two paths".into()));
    }
    let n_steps = step_count(h, horizon);
    let start = x0.coords();
    let b0 = bellman_value(x0, exp);
    let one = |i: usize| {
        let mut rng = keyed_rng(seed, i as u64);
        let out = run_path(start, policy, h, n_steps, exp, &mut rng, with_generator, |_| {});
        let end = bequest_unchecked(out.last, exp);
        PathSummary {
            stopped: out.payoff + end,
            exit_only: out.payoff + if out.exited { end } else { 0.0 },
            truncated: !out.exited,
            dynkin: end - b0 - out.generator_integral,
        }
    };
    if policy.is_deterministic() {
        return Ok(vec![one(0); n_paths]);
    }
    Ok((0..n_paths).into_par_iter().map(one).collect())
}

/// Mean and standard error of the policy's payoff from `x0` over `n_paths`
/// paths keyed `(seed, 0..n_paths)`.
pub fn estimate_value(
    x0: &BellmanPoint,
    policy: &ControlPolicy,
    h: f64,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    exp: &PExponent,
) -> Result<ValueEstimate> {
    let paths = summarize_paths(x0, policy, h, horizon, n_paths, seed, exp, false)?;
    let stopped: Vec<f64> = paths.iter().map(|s| s.stopped).collect();
    let exit_only: Vec<f64> = paths.iter().map(|s| s.exit_only).collect();
    let (mean, std_error) = mean_and_se(&stopped);
    let (exit_only_mean, exit_only_std_error) = mean_and_se(&exit_only);
    let truncated = paths.iter().filter(|s| s.truncated).count();
    Ok(ValueEstimate {
        mean,
        std_error,
        exit_only_mean,
        exit_only_std_error,
        truncated_fraction: truncated as f64 / n_paths as f64,
        n_paths,
    })
}

/// `E[B(X_{τ∧T})] - B(x0) - E[∫_0^{τ∧T} L^u B(X_s) ds]` with its standard
/// error; zero up to discretisation and sampling error.
pub fn dynkin_gap(
    x0: &BellmanPoint,
    policy: &ControlPolicy,
    h: f64,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    exp: &PExponent,
) -> Result<(f64, f64)> {
    let paths = summarize_paths(x0, policy, h, horizon, n_paths, seed, exp, true)?;
    let d: Vec<f64> = paths.iter().map(|s| s.dynkin).collect();
    Ok(mean_and_se(&d))
}

/// Payoff of the drift-only control in closed form:
/// `∫_0^A p^p (f/(A - s + (p-1)v))^p ds + B(F, f, 0, v)`, which telescopes
/// to `B(x0)`.
pub fn optimal_value_closed_form(x0: &BellmanPoint, exp: &PExponent) -> f64 {
    let p = exp.p();
    let [big_f, f, big_a, v] = x0.coords();
    let k = p.powf(p) / (p - 1.0);
    let fp = exp.pow_p(f);
    let running = k * fp * (1.0 / exp.pow_p_minus_1((p - 1.0) * v) - 1.0 / exp.pow_p_minus_1(big_a + (p - 1.0) * v));
    running + bequest_unchecked([big_f, f, 0.0, v], exp)
}

/// The bracket of the HJB equation at `x` for control `u`:
/// `-∂B/∂A·u5 + ½ Σ H_ij u_i u_j + p^p (f/(A + (p-1)v))^p u5`.
pub fn hjb_value(x: &BellmanPoint, u: &ControlVector, exp: &PExponent) -> Result<f64> {
    let d = crate::bellman::bellman_derivatives(x, exp)?;
    let l = u.loadings;
    let mut quad = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            quad += d.hessian[i][j] * l[i] * l[j];
        }
    }
    Ok(-d.gradient[2] * u.drift + 0.5 * quad + payoff_unchecked(x.coords(), u.drift, exp))
}

/// Magnitude of the terms entering [`hjb_value`].
pub fn hjb_scale(x: &BellmanPoint, u: &ControlVector, exp: &PExponent) -> f64 {
    let d = derivatives_unchecked(x, exp);
    let l = u.loadings;
    let mut quad = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            quad += (d.hessian[i][j] * l[i] * l[j]).abs();
        }
    }
    2.0 * d.gradient[2].abs() * u.drift + 0.5 * quad
}

/// Largest HJB bracket over `grid` and the control attaining it.
pub fn hjb_residual(
    x: &BellmanPoint,
    exp: &PExponent,
    grid: &[ControlVector],
) -> Result<(f64, ControlVector)> {
    let mut best = (f64::NEG_INFINITY, ControlVector::ZERO);
    for u in grid {
        let r = hjb_value(x, u, exp)?;
        if r > best.0 {
            best = (r, *u);
        }
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty control grid".into()));
    }
    Ok(best)
}

/// Random control with `‖u‖ ≤ max_norm`, direction uniform on the sphere
/// restricted to `u5 ≥ 0`.
pub fn random_control<R: Rng + ?Sized>(rng: &mut R, max_norm: f64) -> ControlVector {
    let mut u = [0.0f64; 5];
    for c in u.iter_mut() {
        *c = rng.sample(StandardNormal);
    }
    u[4] = u[4].abs();
    let norm = u.iter().map(|c| c * c).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let r = max_norm * rng.random::<f64>();
    ControlVector {
        loadings: [u[0] * r / norm, u[1] * r / norm, u[2] * r / norm, u[3] * r / norm],
        drift: u[4] * r / norm,
    }
}

fn random_piece<R: Rng + ?Sized>(rng: &mut R) -> ControlVector {
    let mut loadings = [0.0; 4];
    let kind = rng.random_range(0..4);
    if kind == 1 || kind == 2 {
        for l in loadings.iter_mut() {
            *l = 0.5 * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let drift = if kind == 0 || kind == 2 {
        3.0 * rng.random::<f64>()
    } else {
        0.0
    };
    ControlVector { loadings, drift }
}

/// A random admissible policy on `[0, horizon]`: a piecewise-constant
/// schedule of one to four pieces (drift, diffusion, both, or idle), a
/// diffuse-then-drift rule, or a proportional feedback rule.
pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, horizon: f64) -> ControlPolicy {
    match rng.random_range(0..6) {
        0 => ControlPolicy::DiffuseThenDrift {
            switch_time: horizon * rng.random::<f64>(),
            loadings: [0.0; 4].map(|_: f64| 0.5 * rng.sample::<f64, _>(StandardNormal)),
        },
        1 => ControlPolicy::Proportional {
            scale: 2.0 * rng.random::<f64>() - 1.0,
            drift: 2.0 * rng.random::<f64>(),
        },
        _ => {
            let pieces = rng.random_range(1..=4);
            let mut breakpoints: Vec<f64> =
                (1..pieces).map(|_| horizon * open_unit(rng)).collect();
            breakpoints.sort_by(f64::total_cmp);
            breakpoints.dedup();
            let pieces = (0..=breakpoints.len()).map(|_| random_piece(rng)).collect();
            ControlPolicy::Schedule {
                breakpoints,
                pieces,
            }
        }
    }
}

/// Starting point of moderate scale: `v, F` log-uniform on `[0.5, 2]`,
/// `A = v·U^(1/2)`, `f = F^(1/p) v^(1/p')·U^(1/p)`.
pub fn sample_start_point<R: Rng + ?Sized>(rng: &mut R, exp: &PExponent) -> BellmanPoint {
    let v = log_uniform(rng, 0.5, 2.0);
    let big_a = v * open_unit(rng).sqrt();
    let big_f = log_uniform(rng, 0.5, 2.0);
    let f = crate::bellman::support_function(big_f, v, exp) * open_unit(rng).powf(1.0 / exp.p());
    BellmanPoint::new_unchecked([big_f, f, big_a, v])
}

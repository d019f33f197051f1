//! Instance files, command dispatch, text reports and CSV output.
//!
//! An instance file is a JSON document. Either the sequences are given
//! explicitly:
//!
//! ```json
//! {"p": 2, "depth": 1, "alpha": [0.1, 0.1, 0.1], "lambda": [1, 1, 1], "phi": [1, 1, 1]}
//! ```
//!
//! or a generator block synthesises them:
//!
//! ```json
//! {"p": 2, "depth": 3, "family": "uniform", "saturate_alpha": true, "seed": 7}
//! ```
//!
//! A generated instance takes `λ` from the family, `α` saturated (or `≡ 1`
//! when `saturate_alpha` is false) and `φ` uniform on `[0, 1)` from stream
//! `(seed, 1)`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bellman::{bellman_value, telescoping_replay, BellmanPoint};
use crate::control::{
    estimate_value, hjb_residual, hjb_scale, hjb_value, optimal_value_closed_form,
    random_control, sample_start_point, ControlPolicy, ControlVector,
};
use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::hardy::{dual_constant_candidates, dual_ratio, hardy_lhs, hardy_ratio, hardy_rhs};
use crate::probe::{p_sweep, saturating_alpha, AscentOptions, Family, SweepRow, SWEEP_HEADER};
use crate::sampling::{keyed_rng, random_phi};
use crate::tree::{
    build_instance, compute_aggregates, node_count, testing_margins, TreeInstance, MAX_DEPTH,
};

/// The on-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub p: f64,
    pub depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturate_alpha: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceFile {
    pub fn explicit(instance: &TreeInstance, exp: &PExponent) -> Self {
        Self {
            p: exp.p(),
            depth: instance.depth(),
            alpha: Some(instance.alpha().to_vec()),
            lambda: Some(instance.lambda().to_vec()),
            phi: Some(instance.phi().to_vec()),
            family: None,
            saturate_alpha: None,
            seed: None,
        }
    }

    /// Validates the file and builds the instance it describes.
    pub fn resolve(&self) -> Result<(TreeInstance, PExponent)> {
        let exp = PExponent::new(self.p)?;
        if self.depth > MAX_DEPTH {
            return Err(Error::DepthTooLarge(self.depth));
        }
        let explicit = self.alpha.is_some() || self.lambda.is_some() || self.phi.is_some();
        let generated =
            self.family.is_some() || self.saturate_alpha.is_some() || self.seed.is_some();
        let instance = match (explicit, generated) {
            (true, true) => {
                return Err(Error::Parse(
                    "explicit sequences and a generator block are mutually exclusive".into(),
                ))
            }
            (false, false) => {
                return Err(Error::Parse(
                    "missing fields: give alpha, lambda and phi, or a family".into(),
                ))
            }
            (true, false) => {
                let take = |v: &Option<Vec<f64>>, name: &str| {
                    v.clone()
                        .ok_or_else(|| Error::Parse(format!("missing field `{name}`")))
                };
                build_instance(
                    self.depth,
                    take(&self.alpha, "alpha")?,
                    take(&self.lambda, "lambda")?,
                    take(&self.phi, "phi")?,
                )?
            }
            (false, true) => self.generate(&exp)?,
        };
        Ok((instance, exp))
    }

    fn generate(&self, exp: &PExponent) -> Result<TreeInstance> {
        let family = Family::parse(
            self.family
                .as_deref()
                .ok_or_else(|| Error::Parse("missing field `family`".into()))?,
        )?;
        let seed = self
            .seed
            .ok_or_else(|| Error::Parse("missing field `seed`".into()))?;
        let n = node_count(self.depth);
        let lambda = family.lambda(self.depth, seed, 0);
        let alpha = if self.saturate_alpha.unwrap_or(true) {
            saturating_alpha(self.depth, &lambda, exp)?.alpha
        } else {
            vec![1.0; n]
        };
        let phi = random_phi(&mut keyed_rng(seed, 1), n);
        build_instance(self.depth, alpha, lambda, phi)
    }
}

/// Parses and validates instance text.
pub fn parse_instance(text: &str) -> Result<(TreeInstance, PExponent)> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.resolve()
}

pub fn parse_instance_file(path: &Path) -> Result<(TreeInstance, PExponent)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance(&text)
}

/// Writes an instance with explicit sequences. Floats are printed in
/// shortest round-trip form, so parsing the output gives back the same
/// instance bit for bit.
pub fn emit_instance(instance: &TreeInstance, exp: &PExponent) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::explicit(instance, exp))
        .expect("instance serialises");
    s.push('\n');
    s
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Writes `header` and `rows` as comma-separated lines, each ending in
/// `\n`.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for (k, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::InvalidArgument(format!(
                "row {k} has {} cells, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(Cell::render)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[Vec<Cell>], header: &[&str], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(std::io::BufWriter::new(file), header, rows)
}

pub fn sweep_cells(rows: &[SweepRow]) -> Vec<Vec<Cell>> {
    rows.iter()
        .map(|r| {
            vec![
                Cell::Num(r.p),
                Cell::Int(r.depth as i64),
                Cell::Text(r.family.clone()),
                Cell::Num(r.ratio),
                Cell::Num(r.c_p),
                Cell::Num(r.fraction),
            ]
        })
        .collect()
}

#[derive(Debug, Parser)]
#[command(name = "hardy-bellman", version, about = "Weighted Hardy inequality on dyadic trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    /// Testing margins v - A at every node.
    Check,
    /// Both sides of the inequality and the dual ratio.
    Ratio,
    /// Node-by-node replay of the Bellman argument.
    Certificate,
    /// Best-constant sweep over p; CSV.
    Probe,
    /// Monte Carlo value of a policy against the closed form.
    Simulate,
    /// HJB residual over random states and controls.
    Hjb,
    /// check, ratio, certificate, hjb, simulate and probe together.
    Report,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the testing condition and the inequality on an instance
    Check(Flags),
    /// Hardy and dual ratios against their constants
    Ratio(Flags),
    /// Replay the Bellman certificate node by node
    Certificate(Flags),
    /// Sweep the best-constant probe over p and depth (CSV)
    Probe(Flags),
    /// Monte Carlo value of a control policy from a starting state
    Simulate(Flags),
    /// Sample HJB residuals at random states and controls
    Hjb(Flags),
    /// Run every check and print a summary
    Report(Flags),
}

impl Command {
    pub fn split(&self) -> (CommandKind, &Flags) {
        match self {
            Command::Check(f) => (CommandKind::Check, f),
            Command::Ratio(f) => (CommandKind::Ratio, f),
            Command::Certificate(f) => (CommandKind::Certificate, f),
            Command::Probe(f) => (CommandKind::Probe, f),
            Command::Simulate(f) => (CommandKind::Simulate, f),
            Command::Hjb(f) => (CommandKind::Hjb, f),
            Command::Report(f) => (CommandKind::Report, f),
        }
    }
}

/// Flags shared by every command; each command reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Exponent; for `probe` a comma-separated list.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value = "drift-only")]
    pub policy: String,
    /// Starting state `F,f,A,v`.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value = "uniform")]
    pub family: String,
    /// Random states (and controls per state) for `hjb`.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Ascent starts per sweep point for `probe`.
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
}

impl Flags {
    /// Flags with the same defaults as the command line.
    pub fn new() -> Self {
        Self {
            h: 1e-3,
            horizon: 10.0,
            paths: 1000,
            policy: "drift-only".into(),
            tol: 1e-9,
            family: "uniform".into(),
            samples: 200,
            starts: 8,
            ..Self::default()
        }
    }
}

/// Text report and overall verdict of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub passed: bool,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

struct Out {
    text: String,
    passed: bool,
}

impl Out {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}: {value}");
    }

    fn num(&mut self, key: &str, x: f64) {
        self.line(key, format_number(x));
    }

    fn verdict(&mut self, what: &str, ok: bool) {
        self.line(what, if ok { "pass" } else { "FAIL" });
        self.passed &= ok;
    }

    fn section(&mut self, name: &str) {
        let _ = writeln!(self.text, "[{name}]");
    }
}

fn require_seed(flags: &Flags, cmd: &str) -> Result<u64> {
    flags
        .seed
        .ok_or_else(|| Error::InvalidArgument(format!("`{cmd}` is randomized and needs --seed")))
}

fn load_instance(flags: &Flags, cmd: &str) -> Result<(TreeInstance, PExponent)> {
    let path = flags
        .instance
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("`{cmd}` needs --instance")))?;
    parse_instance_file(path)
}

fn parse_reals(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{what}: `{t}` is not a number")))
        })
        .collect()
}

fn single_p(flags: &Flags, default: f64) -> Result<PExponent> {
    match &flags.p {
        None => PExponent::new(default),
        Some(s) => {
            let v = parse_reals(s, "--p")?;
            if v.len() != 1 {
                return Err(Error::InvalidArgument("--p takes a single value here".into()));
            }
            PExponent::new(v[0])
        }
    }
}

fn parse_x0(flags: &Flags) -> Result<[f64; 4]> {
    let s = flags
        .x0
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("`simulate` needs --x0 F,f,A,v".into()))?;
    parse_reals(s, "--x0")?
        .try_into()
        .map_err(|_| Error::Parse("--x0 needs four values F,f,A,v".into()))
}

fn run_check(inst: &TreeInstance, exp: &PExponent, tol: f64, out: &mut Out) {
    out.section("check");
    let margins = testing_margins(inst, exp);
    let v = compute_aggregates(inst, exp).v;
    let list: Vec<String> = margins.iter().map(|m| format_number(*m)).collect();
    out.line("margins", format!("[{}]", list.join(", ")));
    out.num("min margin", margins.iter().copied().fold(f64::INFINITY, f64::min));
    let ok = margins.iter().zip(&v).all(|(m, v)| *m >= -tol * v);
    out.verdict("testing condition", ok);
}

fn run_ratio(inst: &TreeInstance, exp: &PExponent, tol: f64, out: &mut Out) -> Result<()> {
    out.section("ratio");
    let agg = compute_aggregates(inst, exp);
    out.num("lhs", hardy_lhs(&agg, inst, exp));
    out.num("rhs", hardy_rhs(&agg, exp));
    out.num("cP", exp.c_p());
    let testing = testing_margins(inst, exp)
        .iter()
        .zip(&agg.v)
        .all(|(m, v)| *m >= -tol * v);
    match hardy_ratio(inst, exp) {
        Ok(r) => {
            out.num("ratio", r);
            if testing {
                out.verdict("ratio <= cP", r <= exp.c_p() * (1.0 + tol));
            }
        }
        Err(e) => out.line("ratio", e),
    }
    let (c1, c2) = dual_constant_candidates(exp);
    let d = dual_ratio(inst, &vec![1.0; inst.node_count()], exp)?;
    out.num("dual ratio (psi = 1)", d);
    out.num("dual constant cP", c1);
    out.num("dual constant cP^(p'/p)", c2);
    if testing {
        out.verdict("dual ratio <= cP^(p'/p)", d <= c2 * (1.0 + tol));
    } else {
        out.line("testing condition", "fails, bounds not asserted");
    }
    Ok(())
}

fn run_certificate(inst: &TreeInstance, exp: &PExponent, tol: f64, out: &mut Out) {
    out.section("certificate");
    match telescoping_replay(inst, exp) {
        Ok(cert) => {
            out.num("sum alpha f^p", cert.lhs_sum);
            out.num("B(root)", cert.bellman_root);
            out.num("cP F(root)", cert.upper_bound);
            out.num("min margin", cert.min_margin());
            out.num("min relative margin", cert.min_relative_margin());
            out.verdict("chain", cert.holds(tol));
        }
        Err(e) => {
            out.line("error", e);
            out.verdict("chain", false);
        }
    }
}

fn run_probe(
    flags: &Flags,
    depth: u32,
    grid: &[f64],
    seed: u64,
    out: &mut Out,
) -> Result<Vec<SweepRow>> {
    out.section("probe");
    let family = Family::parse(&flags.family)?;
    let rows = p_sweep(depth, family, grid, seed, &AscentOptions::default(), flags.starts)?;
    for r in &rows {
        out.line(
            &format!("p={} depth={} {}", r.p, r.depth, r.family),
            format!(
                "ratio {} cP {} fraction {}",
                format_number(r.ratio),
                format_number(r.c_p),
                format_number(r.fraction)
            ),
        );
        out.verdict("ratio <= cP", r.ratio <= r.c_p * (1.0 + flags.tol));
    }
    Ok(rows)
}

fn run_simulate(
    flags: &Flags,
    exp: &PExponent,
    x0: [f64; 4],
    policy: &ControlPolicy,
    seed: u64,
    out: &mut Out,
) -> Result<()> {
    out.section("simulate");
    let x = BellmanPoint::new(x0, exp)?;
    let b = bellman_value(&x, exp);
    let closed = optimal_value_closed_form(&x, exp);
    let est = estimate_value(&x, policy, flags.h, flags.horizon, flags.paths, seed, exp)?;
    out.num("B(x0)", b);
    out.num("closed form", closed);
    out.num("mean J", est.mean);
    out.num("standard error", est.std_error);
    out.num("exit-only mean", est.exit_only_mean);
    out.num("truncated fraction", est.truncated_fraction);
    out.num("mean - closed form", est.mean - closed);
    let scale = b.abs().max(1.0);
    out.verdict(
        "closed form = B",
        (closed - b).abs() <= 1e-10 * scale,
    );
    out.verdict(
        "mean J <= B + 3 SE",
        est.mean <= b + 3.0 * est.std_error + flags.tol * scale,
    );
    Ok(())
}

fn run_hjb(flags: &Flags, exp: &PExponent, seed: u64, out: &mut Out) -> Result<()> {
    out.section("hjb");
    let mut rng = keyed_rng(seed, 0);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_drift = 0.0f64;
    for _ in 0..flags.samples {
        let x = sample_start_point(&mut rng, exp);
        let grid: Vec<ControlVector> = (0..flags.samples)
            .map(|_| random_control(&mut rng, 10.0))
            .collect();
        let (r, u) = hjb_residual(&x, exp, &grid)?;
        worst = worst.max(r / hjb_scale(&x, &u, exp).max(f64::MIN_POSITIVE));
        let d = ControlVector::DRIFT_ONLY;
        let z = hjb_value(&x, &d, exp)?;
        worst_drift = worst_drift.max(z.abs() / hjb_scale(&x, &d, exp).max(f64::MIN_POSITIVE));
    }
    out.num("max relative residual", worst);
    out.num("max relative residual at drift-only", worst_drift);
    out.verdict("residual <= tol", worst <= flags.tol);
    out.verdict("drift-only residual = 0", worst_drift <= 1e-12);
    Ok(())
}

/// Runs one command and collects its report.
pub fn run_command(kind: CommandKind, flags: &Flags) -> Result<Report> {
    let mut out = Out {
        text: String::new(),
        passed: true,
    };
    let tol = flags.tol;
    match kind {
        CommandKind::Check => {
            let (inst, exp) = load_instance(flags, "check")?;
            run_check(&inst, &exp, tol, &mut out);
        }
        CommandKind::Ratio => {
            let (inst, exp) = load_instance(flags, "ratio")?;
            run_ratio(&inst, &exp, tol, &mut out)?;
        }
        CommandKind::Certificate => {
            let (inst, exp) = load_instance(flags, "certificate")?;
            run_certificate(&inst, &exp, tol, &mut out);
        }
        CommandKind::Probe => {
            let seed = require_seed(flags, "probe")?;
            let depth = flags
                .depth
                .ok_or_else(|| Error::InvalidArgument("`probe` needs --depth".into()))?;
            let grid = match &flags.p {
                Some(s) => parse_reals(s, "--p")?,
                None => vec![1.25, 1.5, 2.0, 3.0, 4.0],
            };
            let rows = run_probe(flags, depth, &grid, seed, &mut out)?;
            write_sweep(flags, &rows, &mut out)?;
        }
        CommandKind::Simulate => {
            let seed = require_seed(flags, "simulate")?;
            let exp = single_p(flags, 2.0)?;
            let policy = ControlPolicy::parse(&flags.policy)?;
            run_simulate(flags, &exp, parse_x0(flags)?, &policy, seed, &mut out)?;
        }
        CommandKind::Hjb => {
            let seed = require_seed(flags, "hjb")?;
            let exp = single_p(flags, 2.0)?;
            run_hjb(flags, &exp, seed, &mut out)?;
        }
        CommandKind::Report => {
            let seed = require_seed(flags, "report")?;
            let (inst, exp) = load_instance(flags, "report")?;
            run_check(&inst, &exp, tol, &mut out);
            run_ratio(&inst, &exp, tol, &mut out)?;
            run_certificate(&inst, &exp, tol, &mut out);
            run_hjb(flags, &exp, seed, &mut out)?;
            let root = compute_aggregates(&inst, &exp).root();
            if BellmanPoint::new(root, &exp).is_ok() {
                let sim = Flags {
                    horizon: root[2] + 1.0,
                    paths: 2,
                    ..flags.clone()
                };
                run_simulate(&sim, &exp, root, &ControlPolicy::DriftOnly, seed, &mut out)?;
            }
            let rows = run_probe(flags, inst.depth().min(6), &[exp.p()], seed, &mut out)?;
            write_sweep(flags, &rows, &mut out)?;
        }
    }
    Ok(Report {
        text: out.text,
        passed: out.passed,
    })
}

fn write_sweep(flags: &Flags, rows: &[SweepRow], out: &mut Out) -> Result<()> {
    let cells = sweep_cells(rows);
    match &flags.out {
        Some(path) => {
            emit_csv(&cells, &SWEEP_HEADER, path)?;
            out.line("csv", path.display());
        }
        None => {
            let mut buf = Vec::new();
            write_csv(&mut buf, &SWEEP_HEADER, &cells)?;
            out.text.push_str(&String::from_utf8(buf).expect("csv is utf-8"));
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command, writes the report
/// to `stdout` and errors to `stderr`, and returns the exit status:
/// 0 pass, 1 assertion failure, 2 usage or parse error.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let (kind, flags) = cli.command.split();
    match run_command(kind, flags) {
        Ok(report) => {
            let _ = stdout.write_all(report.text.as_bytes());
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

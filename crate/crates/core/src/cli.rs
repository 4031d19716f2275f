//! Command-line front end.
//!
//! JSON numbers use the shortest representation that round-trips; CSV
//! numbers carry 17 significant digits. Both are lossless.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cubic::{critical_masses, ModelParams, RootKind, RootTriple};
use crate::error::{Error, Result};
use crate::evolve::{decay_certificate, AchievedRate, ModalIC};
use crate::metric::{
    equivalence_bounds, global_metric, natural_weight, normality_residual, uniform_band, BlockMetric,
    EquivalenceBounds, MetricKind, SpaceKind, SpaceRequest, UniformBand,
};
use crate::spectrum::{assemble_spectrum, figure_data, modes_dirichlet_1d, Dominant, ModeSet};

#[derive(Debug, Parser)]
#[command(name = "mgt-spectra", version, about = "Spectra, metrics and decay certificates for (u + αu_t)_tt + L(u + βu_t) = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roots of the characteristic cubic for each mode.
    Roots(ModeArgs),
    /// Critical masses and the regime of (α, β).
    Critical(CommonArgs),
    /// Spectrum report, σ_max and figure data.
    Spectrum(ModeArgs),
    /// Per-mode metrics, equivalence bounds and normality residuals.
    Metric(MetricArgs),
    /// Decay certificate for seeded random real initial data.
    Decay(DecayArgs),
    /// σ_max and the dominant part as α varies.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletSpec {
    pub a: f64,
    pub length: f64,
    pub count: usize,
}

fn parse_dirichlet(s: &str) -> std::result::Result<DirichletSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, length, count] = parts[..] else {
        return Err("expected a,length,count".into());
    };
    Ok(DirichletSpec {
        a: a.parse().map_err(|e| format!("a: {e}"))?,
        length: length.parse().map_err(|e| format!("length: {e}"))?,
        count: count.parse().map_err(|e| format!("count: {e}"))?,
    })
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ModeSource {
    /// Text file with one eigenvalue of L per line, ascending.
    #[arg(long)]
    pub modes: Option<PathBuf>,
    /// Dirichlet modes of −a²∂²ₓ on (0, length).
    #[arg(long, value_parser = parse_dirichlet)]
    pub dirichlet: Option<DirichletSpec>,
    /// Inline comma-separated eigenvalues.
    #[arg(long = "mu-list", alias = "mu", value_delimiter = ',')]
    pub mu_list: Option<Vec<f64>>,
    /// JSON written by `spectrum`; its `mu` values are reused.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub source: ModeSource,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[command(flatten)]
    pub modes: ModeArgs,
    #[arg(long, default_value = "h1")]
    pub space: SpaceRequest,
    /// Jordan-chain scaling for defective modes; shrunk when too large.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    /// Sample spacing; defaults to t_end/1000.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative envelope tolerance.
    #[arg(long, default_value_t = crate::evolve::ENVELOPE_TOL)]
    pub envelope_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

fn parse_sweep(s: &str) -> std::result::Result<SweepRange, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi, steps] = parts[..] else {
        return Err("expected lo,hi,steps".into());
    };
    let r = SweepRange {
        lo: lo.parse().map_err(|e| format!("lo: {e}"))?,
        hi: hi.parse().map_err(|e| format!("hi: {e}"))?,
        steps: steps.parse().map_err(|e| format!("steps: {e}"))?,
    };
    if r.steps < 2 || !(r.lo < r.hi) {
        return Err("need lo < hi and at least two steps".into());
    }
    Ok(r)
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_parser = parse_sweep)]
    pub sweep_alpha: SweepRange,
    #[arg(long = "mu-list", alias = "mu", value_delimiter = ',', default_value = "1")]
    pub mu_list: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a successful run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    CertificateViolated,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::CertificateViolated => 3,
        }
    }
}

/// Exit status for errors: every failure is a validation failure of the input.
pub const EXIT_VALIDATION: i32 = 2;

/// One positive decimal per line, ascending; repeats allowed.
pub fn parse_mode_file(path: &Path) -> Result<ModeSet> {
    let text = std::fs::read_to_string(path)?;
    let err = |line: usize, reason: String| Error::ModeFile {
        path: path.display().to_string(),
        line,
        reason,
    };
    let mut mus: Vec<f64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mu: f64 = line.parse().map_err(|e| err(i + 1, format!("`{line}`: {e}")))?;
        if !(mu.is_finite() && mu > 0.0) {
            return Err(err(i + 1, format!("{mu} is not positive")));
        }
        if let Some(&prev) = mus.last() {
            if mu < prev {
                return Err(err(i + 1, format!("{mu} is smaller than the previous entry {prev}")));
            }
        }
        mus.push(mu);
    }
    if mus.is_empty() {
        return Err(err(0, "no modes".into()));
    }
    ModeSet::explicit(mus)
}

/// Mode values stored in a `spectrum` JSON report.
pub fn parse_report(path: &Path) -> Result<ModeSet> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let rows = value
        .get("modes")
        .and_then(|m| m.as_array())
        .ok_or_else(|| Error::Precondition(format!("{}: no `modes` array", path.display())))?;
    let mus = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.get("mu")
                .and_then(|m| m.as_f64())
                .ok_or_else(|| Error::Precondition(format!("{}: mode {} has no `mu`", path.display(), i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    ModeSet::explicit(mus)
}

impl ModeSource {
    pub fn resolve(&self) -> Result<ModeSet> {
        if let Some(path) = &self.modes {
            parse_mode_file(path)
        } else if let Some(d) = self.dirichlet {
            modes_dirichlet_1d(d.a, d.length, d.count)
        } else if let Some(list) = &self.mu_list {
            ModeSet::explicit(list.clone())
        } else if let Some(path) = &self.report {
            parse_report(path)
        } else {
            Err(Error::EmptyModes)
        }
    }
}

fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_num).unwrap_or_default()
}

pub fn dominant_label(d: Dominant) -> String {
    match d {
        Dominant::EssentialPoint => "EssentialPoint".into(),
        Dominant::ConjugatePairOfMode(n) => format!("ConjugatePairOfMode({n})"),
        Dominant::Both(n) => format!("Both({n})"),
    }
}

/// Frozen per-mode row: `mode,mu,re1,im1,re2,im2,re3,im3,kind`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeRow {
    pub mode: usize,
    pub mu: f64,
    pub re1: f64,
    pub im1: f64,
    pub re2: f64,
    pub im2: f64,
    pub re3: f64,
    pub im3: f64,
    pub kind: RootKind,
}

pub const MODE_CSV_HEADER: &str = "mode,mu,re1,im1,re2,im2,re3,im3,kind";

impl ModeRow {
    fn new(mode: usize, t: &RootTriple) -> Self {
        let r = t.roots;
        Self {
            mode,
            mu: t.mu,
            re1: r[0].re,
            im1: r[0].im,
            re2: r[1].re,
            im2: r[1].im,
            re3: r[2].re,
            im3: r[2].im,
            kind: t.kind,
        }
    }

    fn csv(&self) -> String {
        let nums = [self.mu, self.re1, self.im1, self.re2, self.im2, self.re3, self.im3].map(csv_num);
        format!("{},{},{}", self.mode, nums.join(","), self.kind.label())
    }
}

fn mode_rows(triples: &[RootTriple]) -> Vec<ModeRow> {
    triples.iter().enumerate().map(|(i, t)| ModeRow::new(i + 1, t)).collect()
}

fn mode_csv(rows: &[ModeRow]) -> String {
    let mut s = String::from(MODE_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn params(common: &CommonArgs) -> Result<ModelParams> {
    ModelParams::new(common.alpha, common.beta)
}

#[derive(Serialize)]
struct RootsReport {
    params: ModelParams,
    modes: Vec<ModeRow>,
}

fn roots(args: &ModeArgs) -> Result<String> {
    let p = params(&args.common)?;
    let modes = args.source.resolve()?;
    let triples = modes
        .mus()
        .iter()
        .map(|&mu| crate::cubic::solve_characteristic(&p, mu))
        .collect::<Result<Vec<_>>>()?;
    let rows = mode_rows(&triples);
    match args.common.format {
        Format::Json => json(&RootsReport { params: p, modes: rows }),
        Format::Csv => Ok(mode_csv(&rows)),
    }
}

fn critical(args: &CommonArgs) -> Result<String> {
    let p = params(args)?;
    let cm = critical_masses(&p);
    match args.format {
        Format::Json => json(&serde_json::json!({
            "params": p,
            "ratio": p.ratio(),
            "critical": cm,
        })),
        Format::Csv => Ok(format!(
            "alpha,beta,c1,c2,m1,m2,regime\n{},{},{},{},{},{},{:?}\n",
            csv_num(p.alpha()),
            csv_num(p.beta()),
            csv_num(cm.c1),
            csv_num(cm.c2),
            csv_opt(cm.m1),
            csv_opt(cm.m2),
            cm.regime
        )),
    }
}

#[derive(Serialize)]
struct SpectrumJson {
    params: ModelParams,
    sigma_max: f64,
    essential_point: f64,
    pair_limit_line: f64,
    dominant: String,
    attained: bool,
    overdamped: bool,
    ordering_flag: crate::spectrum::OrderingFlag,
    defective_modes: Vec<usize>,
    modes: Vec<ModeRow>,
    figure: crate::spectrum::FigureData,
}

fn spectrum(args: &ModeArgs) -> Result<String> {
    let p = params(&args.common)?;
    let modes = args.source.resolve()?;
    let report = assemble_spectrum(&p, &modes)?;
    let rows = mode_rows(&report.triples);
    match args.common.format {
        Format::Json => json(&SpectrumJson {
            params: p,
            sigma_max: report.sigma_max,
            essential_point: report.essential_point,
            pair_limit_line: p.pair_limit(),
            dominant: dominant_label(report.dominant),
            attained: report.attained,
            overdamped: report.overdamped,
            ordering_flag: report.ordering_flag,
            defective_modes: report.defective_modes().iter().map(|i| i + 1).collect(),
            figure: figure_data(&report),
            modes: rows,
        }),
        Format::Csv => Ok(mode_csv(&rows)),
    }
}

#[derive(Serialize)]
struct MetricBlockJson {
    mode: usize,
    mu: f64,
    block: &'static str,
    g: [[f64; 3]; 3],
    bounds: EquivalenceBounds,
    normality_residual: f64,
    epsilon: Option<f64>,
    exponent: Option<f64>,
}

#[derive(Serialize)]
struct MetricJson {
    params: ModelParams,
    space: SpaceKind,
    via_isometry: bool,
    kind: MetricKind,
    sigma_max: f64,
    band: Option<UniformBand>,
    blocks: Vec<MetricBlockJson>,
}

/// Relative spread allowed around the last mode's bounds when reporting the
/// uniform band.
pub const BAND_SPREAD: f64 = 0.25;

fn metric(args: &MetricArgs) -> Result<String> {
    let p = params(&args.modes.common)?;
    let modes = args.modes.source.resolve()?;
    let g = global_metric(&p, &modes, args.space, args.epsilon)?;
    let mut blocks = Vec::with_capacity(g.blocks.len());
    for b in &g.blocks {
        let weight = natural_weight(g.space, b.mu)?;
        let m = *b.block.matrix();
        let (label, epsilon, exponent) = match &b.block {
            BlockMetric::Normal(_) => ("normal", None, None),
            BlockMetric::Adjusted(d) => ("adjusted", Some(d.epsilon), Some(d.exponent())),
        };
        blocks.push(MetricBlockJson {
            mode: b.mode,
            mu: b.mu,
            block: label,
            g: m,
            bounds: equivalence_bounds(&m, &weight)?,
            normality_residual: normality_residual(&p, b.mu, &m)?,
            epsilon,
            exponent,
        });
    }
    let normal_bounds: Vec<EquivalenceBounds> = blocks
        .iter()
        .filter(|b| b.block == "normal")
        .map(|b| b.bounds)
        .collect();
    let band = uniform_band(&normal_bounds, BAND_SPREAD);
    match args.modes.common.format {
        Format::Json => json(&MetricJson {
            params: p,
            space: g.space,
            via_isometry: g.via_isometry,
            kind: g.kind,
            sigma_max: g.sigma_max,
            band,
            blocks,
        }),
        Format::Csv => {
            let mut s = String::from("mode,mu,block,g11,g12,g13,g22,g23,g33,lower,upper,normality_residual\n");
            for b in &blocks {
                let entries = [b.g[0][0], b.g[0][1], b.g[0][2], b.g[1][1], b.g[1][2], b.g[2][2]].map(csv_num);
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    b.mode,
                    csv_num(b.mu),
                    b.block,
                    entries.join(","),
                    csv_num(b.bounds.lower),
                    csv_num(b.bounds.upper),
                    csv_num(b.normality_residual)
                )
                .expect("write to string");
            }
            Ok(s)
        }
    }
}

/// Seeded real initial data, uniform in `[-1, 1]³` per mode.
pub fn random_ics(seed: u64, count: usize) -> Vec<ModalIC> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z: [f64; 3] = [0; 3].map(|_| rng.gen_range(-1.0..=1.0));
            ModalIC::real(z[0], z[1], z[2]).expect("finite")
        })
        .collect()
}

#[derive(Serialize)]
struct DecaySample {
    t: f64,
    norm: f64,
    envelope: f64,
}

#[derive(Serialize)]
struct DecayJson {
    params: ModelParams,
    space: SpaceKind,
    via_isometry: bool,
    metric_kind: MetricKind,
    seed: u64,
    sigma_max: f64,
    initial_norm: f64,
    envelope_margin: f64,
    holds: bool,
    expansion_residual: Option<f64>,
    optimality_witness: Option<AchievedRate>,
    samples: Vec<DecaySample>,
}

fn decay(args: &DecayArgs) -> Result<(String, bool)> {
    let margs = &args.metric;
    let p = params(&margs.modes.common)?;
    p.require_dissipative()?;
    let modes = margs.modes.source.resolve()?;
    crate::error::require_positive("t_end", args.t_end)?;
    let dt = args.dt.unwrap_or(args.t_end / 1000.0);
    crate::error::require_positive("dt", dt)?;
    crate::error::require_positive("envelope_tol", args.envelope_tol)?;
    let steps = (args.t_end / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| (i as f64 * dt).min(args.t_end)).collect();
    let g = global_metric(&p, &modes, margs.space, margs.epsilon)?;
    let ics = random_ics(args.seed, modes.len());
    let cert = decay_certificate(&p, &modes, &ics, &g, &times)?;
    let holds = cert.envelope_margin >= -args.envelope_tol * cert.initial_norm;
    let samples: Vec<DecaySample> = cert
        .times
        .iter()
        .zip(&cert.norm_values)
        .map(|(&t, &norm)| DecaySample {
            t,
            norm,
            envelope: (cert.sigma_max * t).exp() * cert.initial_norm,
        })
        .collect();
    let body = match margs.modes.common.format {
        Format::Json => json(&DecayJson {
            params: p,
            space: g.space,
            via_isometry: g.via_isometry,
            metric_kind: g.kind,
            seed: args.seed,
            sigma_max: cert.sigma_max,
            initial_norm: cert.initial_norm,
            envelope_margin: cert.envelope_margin,
            holds,
            expansion_residual: cert.expansion_residual,
            optimality_witness: cert.optimality_witness,
            samples,
        })?,
        Format::Csv => {
            let mut s = String::from("t,norm,envelope\n");
            for x in &samples {
                writeln!(s, "{},{},{}", csv_num(x.t), csv_num(x.norm), csv_num(x.envelope)).expect("write to string");
            }
            s
        }
    };
    Ok((body, holds))
}

/// Case of the dominant-spectrum description for the lowest mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepCase {
    /// Lowest mode has three real roots (with multiplicity); `−1/β` dominates.
    ThreeRealEssential,
    /// Lowest mode has a pair that beats `−1/β`.
    PairDominant,
    /// Lowest mode has a pair, but `−1/β` lies to its right.
    PairBelowEssential,
    /// Pair real part equals `−1/β`.
    Tie,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub ratio: f64,
    pub sigma_max: f64,
    pub dominant: String,
    pub lowest_mode_kind: RootKind,
    pub case: SweepCase,
}

pub fn sweep_rows(beta: f64, range: SweepRange, mus: &[f64]) -> Result<Vec<SweepRow>> {
    let modes = ModeSet::explicit(mus.to_vec())?;
    (0..range.steps)
        .map(|i| {
            let alpha = range.lo + (range.hi - range.lo) * i as f64 / (range.steps - 1) as f64;
            let p = ModelParams::new(alpha, beta)?;
            let report = assemble_spectrum(&p, &modes)?;
            let kind = report.triples[0].kind;
            let case = match (kind, report.dominant) {
                (RootKind::OneRealPlusPair, Dominant::ConjugatePairOfMode(_)) => SweepCase::PairDominant,
                (RootKind::OneRealPlusPair, Dominant::Both(_)) => SweepCase::Tie,
                (RootKind::OneRealPlusPair, Dominant::EssentialPoint) => SweepCase::PairBelowEssential,
                _ => SweepCase::ThreeRealEssential,
            };
            Ok(SweepRow {
                alpha,
                ratio: p.ratio(),
                sigma_max: report.sigma_max,
                dominant: dominant_label(report.dominant),
                lowest_mode_kind: kind,
                case,
            })
        })
        .collect()
}

fn sweep(args: &SweepArgs) -> Result<String> {
    let rows = sweep_rows(args.beta, args.sweep_alpha, &args.mu_list)?;
    match args.format {
        Format::Json => json(&serde_json::json!({ "beta": args.beta, "mus": args.mu_list, "rows": rows })),
        Format::Csv => {
            let mut s = String::from("alpha,ratio,sigma_max,dominant,lowest_mode_kind,case\n");
            for r in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{:?}",
                    csv_num(r.alpha),
                    csv_num(r.ratio),
                    csv_num(r.sigma_max),
                    r.dominant,
                    r.lowest_mode_kind.label(),
                    r.case
                )
                .expect("write to string");
            }
            Ok(s)
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let (body, out, holds) = match &cli.command {
        Command::Roots(a) => (roots(a)?, &a.common.out, true),
        Command::Critical(a) => (critical(a)?, &a.out, true),
        Command::Spectrum(a) => (spectrum(a)?, &a.common.out, true),
        Command::Metric(a) => {
            a.modes.common_params_dissipative()?;
            (metric(a)?, &a.modes.common.out, true)
        }
        Command::Decay(a) => {
            let (body, holds) = decay(a)?;
            (body, &a.metric.modes.common.out, holds)
        }
        Command::Sweep(a) => (sweep(a)?, &a.out, true),
    };
    emit(out, &body)?;
    Ok(if holds {
        Outcome::Success
    } else {
        Outcome::CertificateViolated
    })
}

impl ModeArgs {
    fn common_params_dissipative(&self) -> Result<()> {
        params(&self.common)?.require_dissipative()
    }
}

//! Spectrum of the generator over a set of modes of the spatial operator.

use serde::Serialize;

use crate::cubic::{critical_masses, solve_characteristic, ModelParams, RootKind, RootTriple};
use crate::error::{require_positive, Error, Result};

/// How the eigenvalues `μₙ` of the spatial operator were produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ModeProvider {
    ExplicitList,
    /// `L = −a²∂²ₓ` on `(0, length)` with Dirichlet ends.
    Dirichlet1D { a: f64, length: f64, count: usize },
}

/// Ascending positive eigenvalues of the spatial operator. Repeated values
/// are kept (multiplicity).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeSet {
    provider: ModeProvider,
    mus: Vec<f64>,
}

impl ModeSet {
    pub fn explicit(mus: Vec<f64>) -> Result<Self> {
        for (i, &mu) in mus.iter().enumerate() {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::InvalidModes {
                    index: i,
                    reason: format!("{mu} is not a finite positive number"),
                });
            }
            if i > 0 && mu < mus[i - 1] {
                return Err(Error::InvalidModes {
                    index: i,
                    reason: format!("{mu} follows the larger value {}", mus[i - 1]),
                });
            }
        }
        Ok(Self {
            provider: ModeProvider::ExplicitList,
            mus,
        })
    }

    pub fn provider(&self) -> &ModeProvider {
        &self.provider
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn len(&self) -> usize {
        self.mus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mus.is_empty()
    }

    /// A provider that can generate further modes past the materialized ones.
    pub fn extended(&self, count: usize) -> Option<ModeSet> {
        match self.provider {
            ModeProvider::Dirichlet1D { a, length, .. } => modes_dirichlet_1d(a, length, count).ok(),
            ModeProvider::ExplicitList => None,
        }
    }

    /// Distinct values with their multiplicities, for reporting.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &mu in &self.mus {
            match out.last_mut() {
                Some((last, n)) if *last == mu => *n += 1,
                _ => out.push((mu, 1)),
            }
        }
        out
    }
}

/// `μₙ = (a n π / length)²`, `n = 1..=count`.
pub fn modes_dirichlet_1d(a: f64, length: f64, count: usize) -> Result<ModeSet> {
    require_positive("a", a)?;
    require_positive("length", length)?;
    if count == 0 {
        return Err(Error::EmptyModes);
    }
    let k = a * std::f64::consts::PI / length;
    let mus = (1..=count).map(|n| (k * n as f64).powi(2)).collect();
    Ok(ModeSet {
        provider: ModeProvider::Dirichlet1D { a, length, count },
        mus,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Dominant {
    /// `−1/β` dominates and is not an eigenvalue.
    EssentialPoint,
    /// The pair of mode `n` (1-based).
    ConjugatePairOfMode(usize),
    /// The pair of mode `n` sits exactly on `−1/β`.
    Both(usize),
}

/// Position of the pair limit `−(1/2)(1/α − 1/β)` relative to `−1/β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrderingFlag {
    /// `α/β < 1/3`.
    PairLimitBelow,
    /// `α/β = 1/3`.
    Equal,
    /// `α/β > 1/3`.
    Above,
}

pub fn ordering_flag(params: &ModelParams) -> OrderingFlag {
    let r = params.ratio();
    if (r - 1.0 / 3.0).abs() <= 1e-12 {
        OrderingFlag::Equal
    } else if r < 1.0 / 3.0 {
        OrderingFlag::PairLimitBelow
    } else {
        OrderingFlag::Above
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub params: ModelParams,
    pub triples: Vec<RootTriple>,
    pub essential_point: f64,
    pub sigma_max: f64,
    pub dominant: Dominant,
    pub attained: bool,
    pub overdamped: bool,
    pub ordering_flag: OrderingFlag,
}

impl SpectrumReport {
    /// Modes whose roots are defective (repeated, non-semisimple).
    pub fn defective_modes(&self) -> Vec<usize> {
        self.triples
            .iter()
            .enumerate()
            .filter(|(_, t)| t.kind.is_defective())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Relative tolerance for calling the pair real part equal to `−1/β`.
const TIE_TOL: f64 = 1e-12;

/// Reduces per-mode roots to `σ_max` and the dominant part.
pub fn summarize(params: &ModelParams, triples: Vec<RootTriple>) -> SpectrumReport {
    let essential = params.essential_point();
    // Best conjugate-pair real part; first mode wins ties so the report is
    // independent of evaluation order.
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in triples.iter().enumerate() {
        if t.kind == RootKind::OneRealPlusPair {
            let re = t.roots[1].re;
            if best.map_or(true, |(_, b)| re > b) {
                best = Some((i, re));
            }
        }
    }
    let (sigma_max, dominant) = match best {
        Some((i, re)) if (re - essential).abs() <= TIE_TOL * essential.abs() => {
            (re.max(essential), Dominant::Both(i + 1))
        }
        Some((i, re)) if re > essential => (re, Dominant::ConjugatePairOfMode(i + 1)),
        _ => (essential, Dominant::EssentialPoint),
    };
    SpectrumReport {
        params: *params,
        triples,
        essential_point: essential,
        sigma_max,
        attained: dominant != Dominant::EssentialPoint,
        overdamped: dominant == Dominant::EssentialPoint,
        dominant,
        ordering_flag: ordering_flag(params),
    }
}

pub fn assemble_spectrum(params: &ModelParams, modes: &ModeSet) -> Result<SpectrumReport> {
    params.require_dissipative()?;
    if modes.is_empty() {
        return Err(Error::EmptyModes);
    }
    let triples = modes
        .mus()
        .iter()
        .map(|&mu| solve_characteristic(params, mu))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(params, triples))
}

pub fn sigma_max(params: &ModelParams, modes: &ModeSet) -> Result<f64> {
    Ok(assemble_spectrum(params, modes)?.sigma_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub mode: usize,
    pub mu: f64,
    /// `|λ₁ + 1/β|`.
    pub real_root: f64,
    /// `|Re λ₂ + (1/2)(1/α − 1/β)|`.
    pub pair_real: f64,
    /// `|Im λ₂/√μ − √(β/α)|`.
    pub pair_imag: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticTable {
    pub rows: Vec<AsymptoticRow>,
    /// Modes in `[m₁, m₂]`, skipped because they carry no pair.
    pub skipped: Vec<usize>,
    /// First row index from which all three deviations strictly decrease to
    /// the end of the table.
    pub decreasing_from: usize,
}

impl AsymptoticTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.decreasing_from == 0
    }
}

pub fn asymptotic_check(params: &ModelParams, modes: &ModeSet) -> Result<AsymptoticTable> {
    let report = assemble_spectrum(params, modes)?;
    let (alpha, beta) = (params.alpha(), params.beta());
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (i, t) in report.triples.iter().enumerate() {
        if t.kind != RootKind::OneRealPlusPair {
            skipped.push(i + 1);
            continue;
        }
        rows.push(AsymptoticRow {
            mode: i + 1,
            mu: t.mu,
            real_root: (t.roots[0].re + 1.0 / beta).abs(),
            pair_real: (t.roots[1].re - params.pair_limit()).abs(),
            pair_imag: (t.roots[1].im / t.mu.sqrt() - (beta / alpha).sqrt()).abs(),
        });
    }
    let mut decreasing_from = rows.len().saturating_sub(1);
    while decreasing_from > 0 {
        let (prev, next) = (&rows[decreasing_from - 1], &rows[decreasing_from]);
        let ok = next.real_root < prev.real_root
            && next.pair_real < prev.pair_real
            && next.pair_imag < prev.pair_imag;
        if !ok {
            break;
        }
        decreasing_from -= 1;
    }
    Ok(AsymptoticTable {
        rows,
        skipped,
        decreasing_from,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonotonicityOutcome {
    pub holds: bool,
    /// 1-based mode pair `(n, m)` with `μₙ < μₘ` but `Re λ₂ⁿ ≤ Re λ₂ᵐ`.
    pub first_violation: Option<(usize, usize)>,
}

/// Checks that `Re λ₂` strictly decreases in `μ` over modes outside `[m₁, m₂]`.
pub fn monotonicity_check(params: &ModelParams, modes: &ModeSet) -> Result<MonotonicityOutcome> {
    let report = assemble_spectrum(params, modes)?;
    let masses = critical_masses(params);
    let pairs: Vec<(usize, &RootTriple)> = report
        .triples
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind == RootKind::OneRealPlusPair && !masses.contains(t.mu))
        .map(|(i, t)| (i + 1, t))
        .collect();
    // Sorted by μ, so comparing each mode to the last strictly smaller one
    // covers every pair.
    let mut last: Option<(usize, &RootTriple)> = None;
    for &(n, t) in &pairs {
        if let Some((m, prev)) = last {
            if prev.mu < t.mu && !(prev.roots[1].re > t.roots[1].re) {
                return Ok(MonotonicityOutcome {
                    holds: false,
                    first_violation: Some((m, n)),
                });
            }
        }
        if last.map_or(true, |(_, prev)| prev.mu < t.mu) {
            last = Some((n, t));
        }
    }
    Ok(MonotonicityOutcome {
        holds: true,
        first_violation: None,
    })
}

/// One eigenvalue of the generator, for plotting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenRecord {
    pub mode: usize,
    pub re: f64,
    pub im: f64,
    pub kind: RootKind,
}

/// Eigenvalue cloud plus the two reference markers: the vertical line
/// where pair real parts accumulate and the essential point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureData {
    pub records: Vec<EigenRecord>,
    pub pair_limit_line: f64,
    pub essential_marker: f64,
}

pub fn figure_data(report: &SpectrumReport) -> FigureData {
    let records = report
        .triples
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            t.roots.map(|z| EigenRecord {
                mode: i + 1,
                re: z.re,
                im: z.im,
                kind: t.kind,
            })
        })
        .collect();
    FigureData {
        records,
        pair_limit_line: report.params.pair_limit(),
        essential_marker: report.params.essential_point(),
    }
}

//! Exact modal evolution and decay certificates.
//!
//! Mode `n` of a solution is `u(t) = z(t)φₙ` with `αz‴ + z″ + βμz′ + μz = 0`,
//! so its state `(z, z′, z″)` is propagated by the companion block in closed
//! form: a sum of exponentials when the roots are distinct, and the
//! confluent forms `(a + bt)e^{λt}` or `(c₀ + c₁t + c₂t²)e^{λt}` when
//! they collide.

use num_complex::Complex64;
use serde::Serialize;

use crate::cubic::{solve_characteristic, ModelParams, RootKind, RootTriple};
use crate::error::{require_positive, Error, Result};
use crate::linalg::{self, CMat3, CVec3, Mat3};
use crate::metric::{
    metric_operator_norm, mr_energy_weight, normalization_constants, DefectiveMetric,
    GlobalMetric, MetricKind, SpaceKind,
};
use crate::spectrum::{sigma_max, ModeProvider, ModeSet};

/// Roots closer than this (relative to the largest magnitude) go through
/// the confluent branch.
pub const CONFLUENT_SEPARATION: f64 = 1e-6;
/// Largest accepted condition estimate of the column-scaled modal system.
pub const MAX_CONDITION: f64 = 1e12;
/// Bound on `dt·ρ`, with `ρ` an upper bound on the root magnitudes.
pub const STEP_LIMIT: f64 = 0.1;
/// Samples per decade of `e^{σ_max t}` a certificate grid must carry.
pub const SAMPLES_PER_DECADE: f64 = 8.0;

const fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Values of `(z, z′, z″)` at `t = 0` for one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModalIC {
    pub z0: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
}

impl ModalIC {
    pub fn new(z0: Complex64, z1: Complex64, z2: Complex64) -> Result<Self> {
        for (name, z) in [("z0", z0), ("z1", z1), ("z2", z2)] {
            if !z.is_finite() {
                return Err(Error::invalid(name, z.norm(), "initial data must be finite"));
            }
        }
        Ok(Self { z0, z1, z2 })
    }

    pub fn real(z0: f64, z1: f64, z2: f64) -> Result<Self> {
        Self::new(c(z0), c(z1), c(z2))
    }

    /// The eigenvector `(1, λ, λ²)`.
    pub fn eigenvector(lambda: Complex64) -> Self {
        Self {
            z0: c(1.0),
            z1: lambda,
            z2: lambda * lambda,
        }
    }

    pub fn state(&self) -> CVec3 {
        [self.z0, self.z1, self.z2]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ModalCoefficients {
    /// `z(t) = Σ wⱼ e^{λⱼt}`.
    Distinct {
        roots: [Complex64; 3],
        weights: [Complex64; 3],
    },
    /// `z(t) = (da + db·t)e^{λt} + dc·e^{λₛt}`.
    Double {
        repeated: f64,
        simple: f64,
        da: Complex64,
        db: Complex64,
        dc: Complex64,
    },
    /// `z(t) = (c₀ + c₁t + c₂t²)e^{λt}`.
    Triple { root: f64, c: [Complex64; 3] },
}

impl ModalCoefficients {
    /// Expansion coefficients `dⱼ = wⱼcⱼ` on the normalized eigenvectors
    /// `Ψⱼ`; only defined for the distinct form.
    pub fn expansion(&self, space: SpaceKind, triple: &RootTriple) -> Option<[Complex64; 3]> {
        match self {
            ModalCoefficients::Distinct { weights, .. } => {
                let norms = normalization_constants(space, triple).ok()?;
                Some([0, 1, 2].map(|j| weights[j] * norms[j]))
            }
            _ => None,
        }
    }

    /// Largest real part among exponents that carry a nonzero coefficient,
    /// with its root index (0-based, into the solver ordering when distinct).
    fn achieved_rate(&self) -> Option<(usize, f64)> {
        let mut terms: Vec<(usize, f64, f64)> = Vec::new();
        match self {
            ModalCoefficients::Distinct { roots, weights } => {
                for j in 0..3 {
                    terms.push((j, roots[j].re, weights[j].norm()));
                }
            }
            ModalCoefficients::Double {
                repeated,
                simple,
                da,
                db,
                dc,
            } => {
                terms.push((0, *repeated, da.norm() + db.norm()));
                terms.push((2, *simple, dc.norm()));
            }
            ModalCoefficients::Triple { root, c } => {
                terms.push((0, *root, c.iter().map(|x| x.norm()).sum()));
            }
        }
        let scale = terms.iter().map(|t| t.2).fold(0.0, f64::max);
        terms
            .into_iter()
            .filter(|t| t.2 > 1e-14 * scale)
            .map(|t| (t.0, t.1))
            .fold(None, |best: Option<(usize, f64)>, t| match best {
                Some(b) if b.1 >= t.1 => Some(b),
                _ => Some(t),
            })
    }
}

/// Closest pair of roots and the remaining one, when the closest pair is
/// within the confluent threshold.
fn near_collision(roots: &[Complex64; 3]) -> Option<(usize, usize, usize)> {
    let scale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    [(0, 1, 2), (0, 2, 1), (1, 2, 0)]
        .into_iter()
        .map(|(i, j, k)| ((roots[i] - roots[j]).norm(), (i, j, k)))
        .filter(|(d, _)| *d < CONFLUENT_SEPARATION * scale)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, idx)| idx)
}

/// Solves `A x = b` after scaling column `j` by `s[j]`; the condition
/// estimate is that of the scaled matrix.
fn solve_scaled(mu: f64, a: &CMat3, s: [f64; 3], b: &CVec3) -> Result<CVec3> {
    let mut scaled = *a;
    for row in scaled.iter_mut() {
        for j in 0..3 {
            row[j] *= s[j];
        }
    }
    let (y, condition) = linalg::c_solve(&scaled, b).ok_or(Error::IllConditioned {
        mu,
        condition: f64::INFINITY,
    })?;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { mu, condition });
    }
    Ok([0, 1, 2].map(|j| y[j] * s[j]))
}

fn double_coefficients(mu: f64, rep: f64, simple: f64, ic: &ModalIC) -> Result<ModalCoefficients> {
    let a = [
        [c(1.0), c(0.0), c(1.0)],
        [c(rep), c(1.0), c(simple)],
        [c(rep * rep), c(2.0 * rep), c(simple * simple)],
    ];
    let s = [
        1.0 / (1.0 + rep.abs() + rep * rep),
        1.0 / (1.0 + 2.0 * rep.abs()),
        1.0 / (1.0 + simple.abs() + simple * simple),
    ];
    let x = solve_scaled(mu, &a, s, &ic.state())?;
    Ok(ModalCoefficients::Double {
        repeated: rep,
        simple,
        da: x[0],
        db: x[1],
        dc: x[2],
    })
}

fn triple_coefficients(root: f64, ic: &ModalIC) -> ModalCoefficients {
    let c0 = ic.z0;
    let c1 = ic.z1 - c0 * root;
    let c2 = (ic.z2 - c1 * (2.0 * root) - c0 * (root * root)) / 2.0;
    ModalCoefficients::Triple {
        root,
        c: [c0, c1, c2],
    }
}

pub fn modal_coefficients(triple: &RootTriple, ic: &ModalIC) -> Result<ModalCoefficients> {
    let mu = triple.mu;
    match triple.kind {
        RootKind::TripleReal => return Ok(triple_coefficients(triple.roots[0].re, ic)),
        RootKind::DoubleReal => {
            let (rep, simple) = triple.double_split().expect("double root");
            return double_coefficients(mu, rep, simple, ic);
        }
        _ => {}
    }
    let roots = triple.roots;
    if let Some((i, j, k)) = near_collision(&roots) {
        let merged = ((roots[i] + roots[j]) / 2.0).re;
        let other = roots[k];
        let scale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if (other.re - merged).abs() < CONFLUENT_SEPARATION * scale {
            let mean = (roots[0] + roots[1] + roots[2]).re / 3.0;
            return Ok(triple_coefficients(mean, ic));
        }
        return double_coefficients(mu, merged, other.re, ic);
    }
    let a = [
        roots.map(|_| c(1.0)),
        roots,
        roots.map(|l| l * l),
    ];
    let s = roots.map(|l| 1.0 / (1.0 + l.norm() + l.norm_sqr()));
    let weights = solve_scaled(mu, &a, s, &ic.state())?;
    Ok(ModalCoefficients::Distinct { roots, weights })
}

/// `(z, z′, z″)` at time `t`.
pub fn modal_state(coeffs: &ModalCoefficients, t: f64) -> CVec3 {
    match *coeffs {
        ModalCoefficients::Distinct { roots, weights } => {
            let mut out = [c(0.0); 3];
            for j in 0..3 {
                let term = weights[j] * (roots[j] * t).exp();
                out[0] += term;
                out[1] += term * roots[j];
                out[2] += term * roots[j] * roots[j];
            }
            out
        }
        ModalCoefficients::Double {
            repeated: l,
            simple: s,
            da,
            db,
            dc,
        } => {
            let e = (l * t).exp();
            let es = (s * t).exp();
            let p = da + db * t;
            [
                p * e + dc * es,
                (p * l + db) * e + dc * (s * es),
                (p * (l * l) + db * (2.0 * l)) * e + dc * (s * s * es),
            ]
        }
        ModalCoefficients::Triple { root: l, c: k } => {
            let e = (l * t).exp();
            let p = k[0] + k[1] * t + k[2] * (t * t);
            let dp = k[1] + k[2] * (2.0 * t);
            let ddp = k[2] * 2.0;
            [p * e, (dp + p * l) * e, (ddp + dp * (2.0 * l) + p * (l * l)) * e]
        }
    }
}

/// `e^{Mt}` for the companion block of mode `mu`, column by column.
pub fn propagator(params: &ModelParams, mu: f64, t: f64) -> Result<Mat3> {
    let triple = solve_characteristic(params, mu)?;
    let mut out = linalg::ZERO3;
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let ic = ModalIC::real(e[0], e[1], e[2])?;
        let state = modal_state(&modal_coefficients(&triple, &ic)?, t);
        for i in 0..3 {
            out[i][k] = state[i].re;
        }
    }
    Ok(out)
}

/// Sampled states of one mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub mu: f64,
    pub times: Vec<f64>,
    pub states: Vec<CVec3>,
}

/// Exact trajectory sampled on `times`.
pub fn sample_exact(triple: &RootTriple, ic: &ModalIC, times: &[f64]) -> Result<Trajectory> {
    let coeffs = modal_coefficients(triple, ic)?;
    Ok(Trajectory {
        mu: triple.mu,
        times: times.to_vec(),
        states: times.iter().map(|&t| modal_state(&coeffs, t)).collect(),
    })
}

/// Fujiwara bound `2·max(1/α, (βμ/α)^{1/2}, (μ/2α)^{1/3})` on every root
/// magnitude; needs no root finding.
pub fn root_magnitude_bound(params: &ModelParams, mu: f64) -> f64 {
    let (a, b) = (params.alpha(), params.beta());
    2.0 * (1.0 / a).max((b * mu / a).sqrt()).max((mu / (2.0 * a)).cbrt())
}

/// Classical fourth-order Runge–Kutta on the companion system, sampled
/// after every step. The last step is shortened to land on `t_end`.
pub fn rk4_oracle(params: &ModelParams, mu: f64, ic: &ModalIC, t_end: f64, dt: f64) -> Result<Trajectory> {
    require_positive("mu", mu)?;
    require_positive("t_end", t_end)?;
    require_positive("dt", dt)?;
    let product = dt * root_magnitude_bound(params, mu);
    if product >= STEP_LIMIT {
        return Err(Error::StepTooLarge {
            dt,
            product,
            limit: STEP_LIMIT,
        });
    }
    let (a, b) = (params.alpha(), params.beta());
    let f = |y: &CVec3| -> CVec3 { [y[1], y[2], -(y[2] / a) - y[1] * (b * mu / a) - y[0] * (mu / a)] };
    let axpy = |y: &CVec3, k: &CVec3, h: f64| -> CVec3 { [0, 1, 2].map(|i| y[i] + k[i] * h) };

    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = ic.state();
    times.push(0.0);
    states.push(y);
    for n in 0..steps {
        let t0 = n as f64 * dt;
        let t1 = if n + 1 == steps { t_end } else { (n + 1) as f64 * dt };
        let h = t1 - t0;
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        y = [0, 1, 2].map(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0));
        times.push(t1);
        states.push(y);
    }
    Ok(Trajectory { mu, times, states })
}

/// Mode and root realizing the slowest decay present in some data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AchievedRate {
    /// 1-based.
    pub mode: usize,
    /// 1-based index into the solver's root ordering.
    pub root: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub sigma_max: f64,
    pub metric_kind: MetricKind,
    pub times: Vec<f64>,
    pub norm_values: Vec<f64>,
    pub initial_norm: f64,
    /// `min_t (e^{σ_max t}‖U(0)‖ − ‖U(t)‖)`.
    pub envelope_margin: f64,
    pub holds: bool,
    pub optimality_witness: Option<AchievedRate>,
    /// Relative gap between `‖U(t)‖²_G` and `Σ|dⱼⁿ|²e^{2Re λⱼⁿ t}`; only for
    /// the pure normalizing metric.
    pub expansion_residual: Option<f64>,
}

/// Relative margin below which the envelope is considered violated.
pub const ENVELOPE_TOL: f64 = 1e-9;

fn check_grid(times: &[f64], sigma: f64) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::GridTooCoarse {
            reason: "times must be finite and non-negative".into(),
        });
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridTooCoarse {
            reason: "times must be strictly increasing".into(),
        });
    }
    let span = match (times.first(), times.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let decades = sigma.abs() * span / std::f64::consts::LN_10;
    let needed = (SAMPLES_PER_DECADE * decades).ceil().max(SAMPLES_PER_DECADE) as usize;
    if times.len() < needed {
        return Err(Error::GridTooCoarse {
            reason: format!(
                "{} samples over {decades:.3} decades of decay; at least {needed} required",
                times.len()
            ),
        });
    }
    Ok(())
}

fn check_metric(params: &ModelParams, modes: &ModeSet, metric: &GlobalMetric) -> Result<()> {
    if metric.params != *params {
        return Err(Error::MetricMismatch {
            reason: "metric was built for different parameters".into(),
        });
    }
    if metric.blocks.len() != modes.len() {
        return Err(Error::MetricMismatch {
            reason: format!("{} metric blocks for {} modes", metric.blocks.len(), modes.len()),
        });
    }
    for (i, (block, &mu)) in metric.blocks.iter().zip(modes.mus()).enumerate() {
        if block.mu != mu {
            return Err(Error::MetricMismatch {
                reason: format!("mode {} has mu = {mu} but its block was built at {}", i + 1, block.mu),
            });
        }
    }
    Ok(())
}

/// Evolves one initial condition per mode and checks
/// `‖U(t)‖ ≤ e^{σ_max t}‖U(0)‖` in the supplied block-diagonal metric.
pub fn decay_certificate(
    params: &ModelParams,
    modes: &ModeSet,
    ics: &[ModalIC],
    metric: &GlobalMetric,
    times: &[f64],
) -> Result<DecayCertificate> {
    params.require_dissipative()?;
    check_metric(params, modes, metric)?;
    if ics.len() != modes.len() {
        return Err(Error::MetricMismatch {
            reason: format!("{} initial conditions for {} modes", ics.len(), modes.len()),
        });
    }
    let sigma = metric.sigma_max;
    check_grid(times, sigma)?;

    let coeffs = metric
        .blocks
        .iter()
        .zip(ics)
        .map(|(b, ic)| modal_coefficients(&b.triple, ic))
        .collect::<Result<Vec<_>>>()?;

    let norm_at = |t: f64| -> f64 {
        let mut sq = 0.0;
        for (block, k) in metric.blocks.iter().zip(&coeffs) {
            sq += linalg::herm_form(block.block.matrix(), &modal_state(k, t));
        }
        sq.max(0.0).sqrt()
    };
    let initial_norm = {
        let mut sq = 0.0;
        for (block, ic) in metric.blocks.iter().zip(ics) {
            sq += linalg::herm_form(block.block.matrix(), &ic.state());
        }
        sq.max(0.0).sqrt()
    };
    let norm_values: Vec<f64> = times.iter().map(|&t| norm_at(t)).collect();
    let envelope_margin = times
        .iter()
        .zip(&norm_values)
        .map(|(&t, &n)| (sigma * t).exp() * initial_norm - n)
        .fold(f64::INFINITY, f64::min);

    let expansion_residual = if metric.kind == MetricKind::Normality {
        let mut expansions = Vec::with_capacity(coeffs.len());
        for (block, k) in metric.blocks.iter().zip(&coeffs) {
            match (k, k.expansion(metric.space, &block.triple)) {
                (ModalCoefficients::Distinct { roots, .. }, Some(d)) => expansions.push((*roots, d)),
                _ => {
                    expansions.clear();
                    break;
                }
            }
        }
        (expansions.len() == coeffs.len()).then(|| {
            times
                .iter()
                .zip(&norm_values)
                .map(|(&t, &n)| {
                    let sum: f64 = expansions
                        .iter()
                        .flat_map(|(roots, d)| (0..3).map(move |j| d[j].norm_sqr() * (2.0 * roots[j].re * t).exp()))
                        .sum();
                    if sum == 0.0 {
                        (n * n).abs()
                    } else {
                        (n * n - sum).abs() / sum
                    }
                })
                .fold(0.0, f64::max)
        })
    } else {
        None
    };

    let optimality_witness = metric
        .blocks
        .iter()
        .zip(&coeffs)
        .filter_map(|(b, k)| {
            k.achieved_rate().map(|(root, rate)| AchievedRate {
                mode: b.mode,
                root: root + 1,
                rate,
            })
        })
        .fold(None, |best: Option<AchievedRate>, r| match best {
            Some(b) if b.rate >= r.rate => Some(b),
            _ => Some(r),
        });

    Ok(DecayCertificate {
        sigma_max: sigma,
        metric_kind: metric.kind,
        times: times.to_vec(),
        holds: envelope_margin >= -ENVELOPE_TOL * initial_norm,
        norm_values,
        initial_norm,
        envelope_margin,
        optimality_witness,
        expansion_residual,
    })
}

/// Largest `‖e^{Mt}‖_{G_ε} / e^{(σ+ε)t}` over `times`; at most 1 when the
/// ε-envelope holds.
pub fn defective_envelope_ratio(params: &ModelParams, metric: &DefectiveMetric, times: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in times {
        let e = propagator(params, metric.mu, t)?;
        let norm = metric_operator_norm(&metric.g_eps, &e)?;
        worst = worst.max(norm / (metric.exponent() * t).exp());
    }
    Ok(worst)
}

/// Least-squares slope of `ln y` against `ln t`.
pub fn power_law_exponent(times: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, y)| **t > 0.0 && **y > 0.0)
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// 1-based.
    pub mode: usize,
    /// 1-based root index.
    pub root: usize,
    pub mu: f64,
    pub rate: f64,
    /// Whether the mode lies past the materialized list.
    pub extended: bool,
}

fn best_root(triple: &RootTriple) -> (usize, f64) {
    let mut best = (0, triple.roots[0].re);
    for j in 1..3 {
        if triple.roots[j].re > best.1 {
            best = (j, triple.roots[j].re);
        }
    }
    best
}

/// Finds an eigen-solution decaying slower than `e^{ωt}`.
pub fn optimality_witness(params: &ModelParams, modes: &ModeSet, omega: f64) -> Result<Witness> {
    params.require_dissipative()?;
    let sigma = sigma_max(params, modes)?;
    if !(omega < sigma) {
        return Err(Error::Precondition(format!(
            "omega = {omega} must lie below sigma_max = {sigma}"
        )));
    }
    for (i, &mu) in modes.mus().iter().enumerate() {
        let triple = solve_characteristic(params, mu)?;
        let (j, rate) = best_root(&triple);
        if rate > omega {
            return Ok(Witness {
                mode: i + 1,
                root: j + 1,
                mu,
                rate,
                extended: false,
            });
        }
    }
    let ModeProvider::Dirichlet1D { a, length, .. } = *modes.provider() else {
        return Err(Error::NotFound(format!(
            "no listed mode has a root above {omega} and an explicit list can not be extended"
        )));
    };
    let k = a * std::f64::consts::PI / length;
    let probe = |n: u64| -> Result<(f64, usize, f64)> {
        let mu = (k * n as f64).powi(2);
        let (j, rate) = best_root(&solve_characteristic(params, mu)?);
        Ok((mu, j, rate))
    };
    let mut lo = modes.len() as u64;
    let mut hi = lo.max(1) * 2;
    loop {
        let (_, _, rate) = probe(hi)?;
        if rate > omega {
            break;
        }
        if hi > 1 << 40 {
            return Err(Error::NotFound(format!("no mode up to n = {hi} has a root above {omega}")));
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid)?.2 > omega {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (mu, j, rate) = probe(hi)?;
    Ok(Witness {
        mode: hi as usize,
        root: j + 1,
        mu,
        rate,
        extended: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyCheck {
    /// `max |dE/dt + (β − α)μ|v|²|` over interior samples.
    pub max_residual: f64,
    pub max_energy: f64,
    pub max_dissipation: f64,
}

/// Compares the five-point centered derivative of `E = ½⟨U, U⟩_MR` with
/// `−(β − α)μ|v|²` on a uniform grid.
pub fn mr_energy_derivative_check(params: &ModelParams, mu: f64, trajectory: &Trajectory) -> Result<EnergyCheck> {
    let weight = mr_energy_weight(params, mu)?;
    let times = &trajectory.times;
    if times.len() < 5 || times.len() != trajectory.states.len() {
        return Err(Error::GridTooCoarse {
            reason: "need at least five samples, one state per time".into(),
        });
    }
    let h = times[1] - times[0];
    if !(h > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(w[1].abs() * 1e-7)) {
        return Err(Error::GridTooCoarse {
            reason: "grid must be uniform".into(),
        });
    }
    let product = h * root_magnitude_bound(params, mu);
    if product >= STEP_LIMIT {
        return Err(Error::GridTooCoarse {
            reason: format!("spacing {h} gives h*|lambda|max = {product}, limit {STEP_LIMIT}"),
        });
    }
    let energy: Vec<f64> = trajectory
        .states
        .iter()
        .map(|u| 0.5 * linalg::herm_form(&weight, u))
        .collect();
    let damping = (params.beta() - params.alpha()) * mu;
    let mut out = EnergyCheck {
        max_residual: 0.0,
        max_energy: energy.iter().cloned().fold(0.0, f64::max),
        max_dissipation: 0.0,
    };
    for i in 2..energy.len() - 2 {
        let de = (energy[i - 2] - 8.0 * energy[i - 1] + 8.0 * energy[i + 1] - energy[i + 2]) / (12.0 * h);
        let dissipation = damping * trajectory.states[i][1].norm_sqr();
        out.max_residual = out.max_residual.max((de + dissipation).abs());
        out.max_dissipation = out.max_dissipation.max(dissipation);
    }
    Ok(out)
}

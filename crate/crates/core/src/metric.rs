//! Per-mode inner products.
//!
//! Each mode contributes a 3-dimensional invariant block spanned by
//! `(φₙ,0,0), (0,φₙ,0), (0,0,φₙ)`. On it the natural product of the state
//! space is the diagonal weight `Oₙ`. When the three roots are distinct the
//! eigenvectors `Ψⱼ = (1, λⱼ, λⱼ²)ᵀ/cⱼ` form a basis and
//! `Gₙ = (C̄⁻¹)ᵀC⁻¹`, with `C = col(Ψ₁, Ψ₂, Ψ₃)`, is the unique product in
//! which they are orthonormal; the companion block is normal there. A
//! repeated root has a one-dimensional eigenspace and no product can make
//! the block normal; for those blocks a Jordan basis with chain vectors
//! scaled by powers of `ε` gives a product with growth `e^{(σ+ε)t}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::cubic::{solve_characteristic, ModelParams, RootKind, RootTriple};
use crate::error::{require_positive, Error, Result};
use crate::linalg::{self, CMat3, Mat3};
use crate::spectrum::{assemble_spectrum, ModeSet};

/// State space requested by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpaceRequest {
    H1,
    H2,
    H3,
    H4,
}

/// State space whose modal matrices are actually built. `H2` and `H4` are
/// isometric to `H1` and `H3` through `diag(L^{1/2}, L^{1/2}, L^{1/2})`,
/// which leaves every modal matrix unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpaceKind {
    H1,
    H3,
}

impl SpaceRequest {
    /// The space actually used and whether the isometry was applied.
    pub fn resolve(self) -> (SpaceKind, bool) {
        match self {
            SpaceRequest::H1 => (SpaceKind::H1, false),
            SpaceRequest::H2 => (SpaceKind::H1, true),
            SpaceRequest::H3 => (SpaceKind::H3, false),
            SpaceRequest::H4 => (SpaceKind::H3, true),
        }
    }
}

impl std::str::FromStr for SpaceRequest {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "h1" => Ok(SpaceRequest::H1),
            "h2" => Ok(SpaceRequest::H2),
            "h3" => Ok(SpaceRequest::H3),
            "h4" => Ok(SpaceRequest::H4),
            other => Err(format!("unknown space `{other}` (expected h1, h2, h3 or h4)")),
        }
    }
}

impl From<SpaceKind> for SpaceRequest {
    fn from(kind: SpaceKind) -> Self {
        match kind {
            SpaceKind::H1 => SpaceRequest::H1,
            SpaceKind::H3 => SpaceRequest::H3,
        }
    }
}

impl SpaceKind {
    fn weights(self, mu: f64) -> [f64; 3] {
        match self {
            SpaceKind::H1 => [mu, mu, 1.0],
            SpaceKind::H3 => [mu * mu, mu, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NaturalWeight {
    pub space: SpaceKind,
    pub via_isometry: bool,
    pub mu: f64,
    pub diagonal: [f64; 3],
}

impl NaturalWeight {
    pub fn matrix(&self) -> Mat3 {
        linalg::diag(self.diagonal)
    }
}

pub fn natural_weight(space: impl Into<SpaceRequest>, mu: f64) -> Result<NaturalWeight> {
    require_positive("mu", mu)?;
    let (space, via_isometry) = space.into().resolve();
    Ok(NaturalWeight {
        space,
        via_isometry,
        mu,
        diagonal: space.weights(mu),
    })
}

fn require_non_defective(triple: &RootTriple) -> Result<()> {
    match triple.defect() {
        Some(d) => Err(Error::DefectiveMode {
            mu: triple.mu,
            eigenvalue: d.eigenvalue,
        }),
        None => Ok(()),
    }
}

/// Natural norms `cⱼ` of `(1, λⱼ, λⱼ²)`.
pub fn normalization_constants(space: SpaceKind, triple: &RootTriple) -> Result<[f64; 3]> {
    require_non_defective(triple)?;
    let w = space.weights(triple.mu);
    Ok(triple.roots.map(|l| {
        let m2 = l.norm_sqr();
        (w[0] + w[1] * m2 + w[2] * m2 * m2).sqrt()
    }))
}

/// Eigenvector frame of one mode, columns normalized in the natural norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModalFrame {
    pub mu: f64,
    pub space: SpaceKind,
    pub c: [f64; 3],
    pub columns: CMat3,
}

pub fn modal_frame(space: SpaceKind, triple: &RootTriple) -> Result<ModalFrame> {
    let c = normalization_constants(space, triple)?;
    let mut columns = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (j, l) in triple.roots.iter().enumerate() {
        let v = [Complex64::new(1.0, 0.0), *l, l * l];
        for i in 0..3 {
            columns[i][j] = v[i] / c[j];
        }
    }
    Ok(ModalFrame {
        mu: triple.mu,
        space,
        c,
        columns,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModalGram {
    pub mu: f64,
    pub space: SpaceKind,
    pub g: Mat3,
    /// Largest imaginary part discarded from `(C̄⁻¹)ᵀC⁻¹`, relative to `‖G‖`.
    pub imag_residue: f64,
}

/// Builds `G = (C̄⁻¹)ᵀC⁻¹` for a non-defective mode.
///
/// The inverse is taken on `O^{1/2}C`, whose columns have unit Euclidean
/// length, and scaled back; this keeps the frame well conditioned when the
/// natural weights span many orders of magnitude.
pub fn modal_gram(space: SpaceKind, triple: &RootTriple) -> Result<ModalGram> {
    let frame = modal_frame(space, triple)?;
    let w = space.weights(triple.mu).map(f64::sqrt);
    let mut scaled = frame.columns;
    for i in 0..3 {
        for j in 0..3 {
            scaled[i][j] *= w[i];
        }
    }
    let inv = linalg::c_inverse(&scaled).ok_or(Error::DefectiveMode {
        mu: triple.mu,
        eigenvalue: triple.roots[1].re,
    })?;
    let mut g = linalg::ZERO3;
    let mut max_imag: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let s: Complex64 = (0..3).map(|k| inv[k][i].conj() * inv[k][j]).sum();
            g[i][j] = (w[i] * w[j]) * s.re;
            max_imag = max_imag.max((w[i] * w[j] * s.im).abs());
        }
    }
    let norm = linalg::frobenius(&g);
    Ok(ModalGram {
        mu: triple.mu,
        space,
        g,
        imag_residue: max_imag / norm,
    })
}

/// `max |(C*GC − I)ᵢⱼ|`: how far the frame is from orthonormal in `G`.
pub fn orthonormality_residual(frame: &ModalFrame, g: &Mat3) -> f64 {
    let c = &frame.columns;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                for l in 0..3 {
                    s += c[k][i].conj() * g[k][l] * c[l][j];
                }
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

/// Departure from normality of the companion block in the product `g`.
///
/// With `g = LLᵀ`, the block in a `g`-orthonormal basis is `M̃ = LᵀML⁻ᵀ`
/// and its `g`-adjoint `G⁻¹MᵀG` becomes `M̃ᵀ`. Returns
/// `‖M̃M̃ᵀ − M̃ᵀM̃‖_F / ‖M̃‖_F²`.
pub fn normality_residual(params: &ModelParams, mu: f64, g: &Mat3) -> Result<f64> {
    let m = params.companion(mu);
    Ok(normality_residual_of(&m, g)?)
}

pub(crate) fn normality_residual_of(m: &Mat3, g: &Mat3) -> Result<f64> {
    let l = linalg::cholesky(g).ok_or_else(|| Error::Precondition("metric is not positive definite".into()))?;
    let lt = linalg::transpose(&l);
    let lt_inv = linalg::inverse(&lt).ok_or_else(|| Error::Precondition("singular metric".into()))?;
    let mt = linalg::mul(&linalg::mul(&lt, m), &lt_inv);
    let mtt = linalg::transpose(&mt);
    let comm = linalg::sub(&linalg::mul(&mt, &mtt), &linalg::mul(&mtt, &mt));
    let scale = linalg::frobenius(&mt).powi(2);
    Ok(if scale == 0.0 { 0.0 } else { linalg::frobenius(&comm) / scale })
}

/// `(m, M)` with `m‖x‖_O ≤ ‖x‖_G ≤ M‖x‖_O`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquivalenceBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Extreme generalized eigenvalues of the pencil `(G, O)`, through the
/// symmetric reduction `O^{−1/2} G O^{−1/2}`.
pub fn equivalence_bounds(g: &Mat3, weight: &NaturalWeight) -> Result<EquivalenceBounds> {
    let s = weight.diagonal.map(|d| 1.0 / d.sqrt());
    let mut reduced = *g;
    for i in 0..3 {
        for j in 0..3 {
            reduced[i][j] *= s[i] * s[j];
        }
    }
    let eig = linalg::sym_eigenvalues(&reduced);
    if !(eig[0] > 0.0) {
        return Err(Error::Precondition(format!(
            "pencil is not positive definite (smallest eigenvalue {})",
            eig[0]
        )));
    }
    Ok(EquivalenceBounds {
        lower: eig[0].sqrt(),
        upper: eig[2].sqrt(),
    })
}

/// Band covering the per-mode bounds from index `n0` onwards.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UniformBand {
    /// First index (0-based into the supplied list) inside the band.
    pub n0: usize,
    pub lower: f64,
    pub upper: f64,
    /// `M*/m*`.
    pub ratio: f64,
}

/// Smallest `n0` such that every later mode's `(m, M)` stays within a factor
/// `1 ± spread` of the last mode's values, and the band over that tail.
pub fn uniform_band(bounds: &[EquivalenceBounds], spread: f64) -> Option<UniformBand> {
    let last = bounds.last()?;
    let inside = |b: &EquivalenceBounds| {
        (b.lower / last.lower - 1.0).abs() <= spread && (b.upper / last.upper - 1.0).abs() <= spread
    };
    let mut n0 = bounds.len() - 1;
    while n0 > 0 && inside(&bounds[n0 - 1]) {
        n0 -= 1;
    }
    let tail = &bounds[n0..];
    let lower = tail.iter().map(|b| b.lower).fold(f64::INFINITY, f64::min);
    let upper = tail.iter().map(|b| b.upper).fold(0.0, f64::max);
    Some(UniformBand {
        n0,
        lower,
        upper,
        ratio: upper / lower,
    })
}

/// Leading-order entries of `G` as `μ → ∞`.
pub fn gram_asymptotics(space: SpaceKind, params: &ModelParams, mu: f64) -> Result<Mat3> {
    params.require_dissipative()?;
    require_positive("mu", mu)?;
    let (a, b) = (params.alpha(), params.beta());
    Ok(match space {
        SpaceKind::H1 => {
            let g11 = (2.0 * a * b * b + 3.0 * a + b) / (2.0 * a * b * b) * mu;
            let g12 = (a + b) / (2.0 * a * b) * mu;
            let g13 = (4.0 * a * a * b * b + b * b + 3.0 * a * a) / (4.0 * a * b.powi(3));
            let g22 = (a + b) / (2.0 * a) * mu;
            let g23 = (a + b).powi(2) / (4.0 * a * b * b);
            let g33 = (a + b) / (2.0 * b);
            [[g11, g12, g13], [g12, g22, g23], [g13, g23, g33]]
        }
        SpaceKind::H3 => {
            let g11 = mu * mu;
            let g12 = (3.0 * a * b - a * a + b * b) / (2.0 * a * b * b) * mu;
            let g13 = a / b * mu;
            let g22 = (a * a + a * b + b * b) / (2.0 * a * b) * mu;
            let g23 = (6.0 * a * a * b - 3.0 * a.powi(3) + 2.0 * a * b * b + b.powi(3)) / (4.0 * a * b.powi(3));
            let g33 = (3.0 * a * a + a * b + b * b) / (2.0 * b * b);
            [[g11, g12, g13], [g12, g22, g23], [g13, g23, g33]]
        }
    })
}

/// Modal matrix of the dissipative energy product
/// `|v + αw|² + μ|u + αv|² + α(β − α)μ|v|²` in coordinates `(u, v, w)`.
pub fn mr_energy_weight(params: &ModelParams, mu: f64) -> Result<Mat3> {
    params.require_dissipative()?;
    require_positive("mu", mu)?;
    let (a, b) = (params.alpha(), params.beta());
    let t = [[0.0, 1.0, 0.0], [1.0, a, 0.0], [0.0, 1.0, a]];
    let d = linalg::diag([a * (b - a) * mu, mu, 1.0]);
    Ok(linalg::mul(&linalg::mul(&linalg::transpose(&t), &d), &t))
}

/// Dimension of the eigenspace of the companion block at `lambda`, from
/// the numerical rank of `M − λI`.
pub fn geometric_multiplicity(params: &ModelParams, mu: f64, lambda: f64) -> usize {
    let shifted = linalg::sub(&params.companion(mu), &linalg::scale(&linalg::identity(), lambda));
    let gram = linalg::mul(&linalg::transpose(&shifted), &shifted);
    let sv2 = linalg::sym_eigenvalues(&gram);
    let tol = 1e-10 * sv2[2];
    sv2.iter().filter(|s| **s <= tol).count()
}

/// Scaled-Jordan product for a mode with a repeated root.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectiveMetric {
    pub mu: f64,
    pub epsilon: f64,
    /// Largest real part in the block.
    pub sigma_block: f64,
    pub kind: RootKind,
    /// Scaled Jordan basis `P·S_ε` (columns).
    pub basis: Mat3,
    pub g_eps: Mat3,
}

impl DefectiveMetric {
    /// Growth exponent `σ_block + ε` of the block in this product.
    pub fn exponent(&self) -> f64 {
        self.sigma_block + self.epsilon
    }
}

fn eigen_column(l: f64) -> [f64; 3] {
    [1.0, l, l * l]
}

/// Jordan basis of the companion block. For the companion matrix the chain
/// over a root `λ` of multiplicity k is `v(λ), v′(λ), v″(λ)/2` with
/// `v(λ) = (1, λ, λ²)`.
pub fn defective_metric(params: &ModelParams, mu: f64, epsilon: f64) -> Result<DefectiveMetric> {
    require_positive("epsilon", epsilon)?;
    let triple = solve_characteristic(params, mu)?;
    defective_metric_for(&triple, epsilon)
}

pub fn defective_metric_for(triple: &RootTriple, epsilon: f64) -> Result<DefectiveMetric> {
    require_positive("epsilon", epsilon)?;
    let cols: [[f64; 3]; 3] = match triple.kind {
        RootKind::DoubleReal => {
            let (rep, simple) = triple.double_split().expect("double root");
            [
                eigen_column(simple),
                eigen_column(rep),
                [0.0, epsilon, 2.0 * rep * epsilon],
            ]
        }
        RootKind::TripleReal => {
            let l = triple.roots[0].re;
            [
                eigen_column(l),
                [0.0, epsilon, 2.0 * l * epsilon],
                [0.0, 0.0, epsilon * epsilon],
            ]
        }
        _ => return Err(Error::NotDefective { mu: triple.mu }),
    };
    let basis = linalg::transpose(&cols);
    let inv = linalg::inverse(&basis).ok_or(Error::IllConditioned {
        mu: triple.mu,
        condition: f64::INFINITY,
    })?;
    let g_eps = linalg::mul(&linalg::transpose(&inv), &inv);
    Ok(DefectiveMetric {
        mu: triple.mu,
        epsilon,
        sigma_block: triple.max_real_part(),
        kind: triple.kind,
        basis,
        g_eps,
    })
}

/// Operator norm of `x` induced by the product `g`.
pub fn metric_operator_norm(g: &Mat3, x: &Mat3) -> Result<f64> {
    let l = linalg::cholesky(g).ok_or_else(|| Error::Precondition("metric is not positive definite".into()))?;
    let lt = linalg::transpose(&l);
    let lt_inv = linalg::inverse(&lt).ok_or_else(|| Error::Precondition("singular metric".into()))?;
    Ok(linalg::spectral_norm(&linalg::mul(&linalg::mul(&lt, x), &lt_inv)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BlockMetric {
    Normal(ModalGram),
    Adjusted(DefectiveMetric),
}

impl BlockMetric {
    pub fn matrix(&self) -> &Mat3 {
        match self {
            BlockMetric::Normal(g) => &g.g,
            BlockMetric::Adjusted(d) => &d.g_eps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MetricKind {
    /// Every block normalizing: the generator is normal.
    Normality,
    /// At least one ε-adjusted Jordan block.
    Adjusted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeMetric {
    /// 1-based.
    pub mode: usize,
    pub mu: f64,
    pub triple: RootTriple,
    pub block: BlockMetric,
}

/// Block-diagonal product over a mode set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalMetric {
    pub params: ModelParams,
    pub space: SpaceKind,
    pub via_isometry: bool,
    pub kind: MetricKind,
    pub blocks: Vec<ModeMetric>,
    /// `σ_max` of the spectrum, carried by the non-defective part.
    pub sigma_max: f64,
}

impl GlobalMetric {
    pub fn defective_blocks(&self) -> impl Iterator<Item = (&ModeMetric, &DefectiveMetric)> {
        self.blocks.iter().filter_map(|b| match &b.block {
            BlockMetric::Adjusted(d) => Some((b, d)),
            _ => None,
        })
    }
}

/// Builds the normalizing Gram on non-defective modes and the ε-adjusted
/// product on defective ones. `epsilon` is shrunk per block so that
/// `σ_block + ε` stays below `−1/β`; `None` uses half of that gap.
pub fn global_metric(
    params: &ModelParams,
    modes: &ModeSet,
    space: impl Into<SpaceRequest>,
    epsilon: Option<f64>,
) -> Result<GlobalMetric> {
    if let Some(e) = epsilon {
        require_positive("epsilon", e)?;
    }
    let (space, via_isometry) = space.into().resolve();
    let report = assemble_spectrum(params, modes)?;
    let essential = params.essential_point();
    let mut blocks = Vec::with_capacity(report.triples.len());
    let mut kind = MetricKind::Normality;
    for (i, triple) in report.triples.iter().enumerate() {
        let block = if triple.kind.is_defective() {
            kind = MetricKind::Adjusted;
            let gap = essential - triple.max_real_part();
            let eps = match epsilon {
                Some(e) if e < gap => e,
                _ => 0.5 * gap,
            };
            BlockMetric::Adjusted(defective_metric_for(triple, eps)?)
        } else {
            BlockMetric::Normal(modal_gram(space, triple)?)
        };
        blocks.push(ModeMetric {
            mode: i + 1,
            mu: triple.mu,
            triple: *triple,
            block,
        });
    }
    Ok(GlobalMetric {
        params: *params,
        space,
        via_isometry,
        kind,
        blocks,
        sigma_max: report.sigma_max,
    })
}

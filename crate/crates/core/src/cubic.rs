//! Modal characteristic cubic `αλ³ + λ² + βμλ + μ = 0`.
//!
//! For each eigenvalue `μ` of the spatial operator the generator restricted
//! to that mode has exactly the three roots of this cubic as eigenvalues.
//! Classification goes through the sign of the Cardano discriminant, which
//! factors as `d(μ) = (μ/α²)·w̃(μ)` with `w̃` a quadratic in `μ` whose roots
//! are the critical masses `m₁ ≤ m₂`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::linalg::Mat3;

/// Relative band on `w̃(μ)`, measured against its leading term, inside which
/// the discriminant counts as zero.
pub const DISCRIMINANT_ZERO_TOL: f64 = 1e-9;

/// Relative band on `p` and `q` inside which a zero-discriminant mode is a
/// triple root rather than a double one. Coarser than the discriminant band
/// because `p` vanishes like `sqrt(w̃)` near the coincident locus.
pub const TRIPLE_ROOT_TOL: f64 = 1e-4;

/// Upper bound on Newton polishing steps per root.
pub const MAX_POLISH_STEPS: usize = 5;

/// The damping pair `(α, β)` of `(u + αu_t)_tt + L(u + βu_t) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `α/β`.
    pub fn ratio(&self) -> f64 {
        self.alpha / self.beta
    }

    /// True iff `α < β`; only then do solutions decay.
    pub fn is_dissipative(&self) -> bool {
        self.alpha < self.beta
    }

    pub fn require_dissipative(&self) -> Result<()> {
        if self.is_dissipative() {
            Ok(())
        } else {
            Err(Error::NonDissipative {
                alpha: self.alpha,
                beta: self.beta,
            })
        }
    }

    /// `−1/β`, the only point of the essential spectrum.
    pub fn essential_point(&self) -> f64 {
        -1.0 / self.beta
    }

    /// `−(1/2)(1/α − 1/β)`, the limit of the real parts of the nonreal
    /// eigenvalues as `μ → ∞`.
    pub fn pair_limit(&self) -> f64 {
        -0.5 * (1.0 / self.alpha - 1.0 / self.beta)
    }

    /// The characteristic polynomial evaluated at `λ`.
    pub fn characteristic(&self, mu: f64, lambda: Complex64) -> Complex64 {
        ((lambda * self.alpha + 1.0) * lambda + self.beta * mu) * lambda + mu
    }

    fn characteristic_derivative(&self, mu: f64, lambda: Complex64) -> Complex64 {
        (lambda * (3.0 * self.alpha) + 2.0) * lambda + self.beta * mu
    }

    /// The generator restricted to one mode, in the basis `(φ,0,0), (0,φ,0), (0,0,φ)`.
    pub fn companion(&self, mu: f64) -> Mat3 {
        [
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [-mu / self.alpha, -self.beta * mu / self.alpha, -1.0 / self.alpha],
        ]
    }
}

/// Coefficients of `ξ³ + pξ + q` after the shift `ξ = λ + 1/(3α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DepressedCubic {
    pub p: f64,
    pub q: f64,
    /// `1/(3α)`.
    pub shift: f64,
}

impl DepressedCubic {
    pub fn eval(&self, xi: Complex64) -> Complex64 {
        (xi * xi + self.p) * xi + self.q
    }
}

pub fn depress(params: &ModelParams, mu: f64) -> Result<DepressedCubic> {
    require_positive("mu", mu)?;
    let (a, b) = (params.alpha, params.beta);
    Ok(DepressedCubic {
        p: b * mu / a - 1.0 / (3.0 * a * a),
        q: 2.0 / (27.0 * a * a * a) - b * mu / (3.0 * a * a) + mu / a,
        shift: 1.0 / (3.0 * a),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiscriminantSign {
    /// One real root and a conjugate pair.
    Positive,
    /// Three distinct real roots.
    Negative,
    /// Repeated real root.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscriminantReport {
    /// `4p³ + 27q²`.
    pub d: f64,
    /// `w̃(μ)`, with `d = (μ/α²)·w̃`.
    pub w: f64,
    pub sign: DiscriminantSign,
}

/// Quadratic factor `w̃(μ) = (4β³/α)μ² + C₁μ + 4/α²` of the discriminant.
pub fn discriminant_factor(params: &ModelParams, mu: f64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    let c1 = c1(params);
    4.0 * b * b * b / a * mu * mu + c1 * mu + 4.0 / (a * a)
}

fn zero_band(params: &ModelParams, mu: f64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    DISCRIMINANT_ZERO_TOL * 4.0 * b * b * b / a * mu * mu
}

pub fn discriminant(params: &ModelParams, mu: f64) -> Result<DiscriminantReport> {
    let dc = depress(params, mu)?;
    let w = discriminant_factor(params, mu);
    let sign = if w.abs() <= zero_band(params, mu) {
        DiscriminantSign::Zero
    } else if w > 0.0 {
        DiscriminantSign::Positive
    } else {
        DiscriminantSign::Negative
    };
    Ok(DiscriminantReport {
        d: 4.0 * dc.p.powi(3) + 27.0 * dc.q * dc.q,
        w,
        sign,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MassRegime {
    /// `1/9 < α/β < 1`: every mode has one real root and a conjugate pair.
    NoRealMasses,
    /// `α/β < 1/9`: modes in `(m₁, m₂)` have three real roots.
    TwoMasses,
    /// `α/β = 1/9`: `m₁ = m₂ = 3/β²`, a triple root there.
    CoincidentMasses,
    /// `α ≥ β`: the quadratic has no positive roots.
    NonDissipative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalMasses {
    pub c1: f64,
    pub c2: f64,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub regime: MassRegime,
}

impl CriticalMasses {
    /// True when `μ` lies strictly between the two critical masses.
    pub fn contains_strictly(&self, mu: f64) -> bool {
        matches!((self.m1, self.m2), (Some(m1), Some(m2)) if m1 < mu && mu < m2)
    }

    /// True when `μ ∈ [m₁, m₂]`, the modes without a conjugate pair.
    pub fn contains(&self, mu: f64) -> bool {
        matches!((self.m1, self.m2), (Some(m1), Some(m2)) if m1 <= mu && mu <= m2)
    }
}

fn c1(params: &ModelParams) -> f64 {
    let r = params.beta / params.alpha;
    27.0 - 18.0 * r - r * r
}

pub fn critical_masses(params: &ModelParams) -> CriticalMasses {
    let (a, b) = (params.alpha, params.beta);
    let r = b / a;
    let c1 = c1(params);
    let c2 = c1 * c1 - 64.0 * r * r * r;
    let coincident = c2.abs() <= 1e-12 * (c1 * c1).max(64.0 * r * r * r);
    let denom = 8.0 * b * b * b;

    if !params.is_dissipative() {
        return CriticalMasses {
            c1,
            c2,
            m1: None,
            m2: None,
            regime: MassRegime::NonDissipative,
        };
    }
    if coincident {
        let m = -a * c1 / denom;
        return CriticalMasses {
            c1,
            c2,
            m1: Some(m),
            m2: Some(m),
            regime: MassRegime::CoincidentMasses,
        };
    }
    if c2 < 0.0 {
        return CriticalMasses {
            c1,
            c2,
            m1: None,
            m2: None,
            regime: MassRegime::NoRealMasses,
        };
    }
    // C₁ < 0 here; the larger root in magnitude first, then Vieta for the
    // other one to avoid cancellation (m₁m₂ = 1/(αβ³)).
    let m2 = a * (-c1 + c2.sqrt()) / denom;
    let m1 = 1.0 / (a * b * b * b) / m2;
    CriticalMasses {
        c1,
        c2,
        m1: Some(m1),
        m2: Some(m2),
        regime: MassRegime::TwoMasses,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RootKind {
    OneRealPlusPair,
    ThreeRealDistinct,
    DoubleReal,
    TripleReal,
}

impl RootKind {
    /// Repeated eigenvalue with a single eigenvector: no eigenbasis.
    pub fn is_defective(self) -> bool {
        matches!(self, RootKind::DoubleReal | RootKind::TripleReal)
    }

    pub fn label(self) -> &'static str {
        match self {
            RootKind::OneRealPlusPair => "OneRealPlusPair",
            RootKind::ThreeRealDistinct => "ThreeRealDistinct",
            RootKind::DoubleReal => "DoubleReal",
            RootKind::TripleReal => "TripleReal",
        }
    }
}

pub fn classify_mode(params: &ModelParams, mu: f64) -> Result<RootKind> {
    let report = discriminant(params, mu)?;
    Ok(match report.sign {
        DiscriminantSign::Positive => RootKind::OneRealPlusPair,
        DiscriminantSign::Negative => RootKind::ThreeRealDistinct,
        DiscriminantSign::Zero => {
            let dc = depress(params, mu)?;
            let a = params.alpha;
            let p_small = dc.p.abs() <= TRIPLE_ROOT_TOL / (3.0 * a * a);
            let q_small = dc.q.abs() <= TRIPLE_ROOT_TOL * 2.0 / (27.0 * a * a * a);
            if p_small && q_small {
                RootKind::TripleReal
            } else {
                RootKind::DoubleReal
            }
        }
    })
}

/// The three roots of the characteristic cubic for one mode.
///
/// Ordering: three real roots ascend; otherwise `roots[0]` is the real root
/// and `roots[1]` the member of the pair with positive imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootTriple {
    pub mu: f64,
    pub roots: [Complex64; 3],
    pub kind: RootKind,
    /// Shared real part of the conjugate pair.
    pub a: Option<f64>,
    /// Positive imaginary part of the pair.
    pub b: Option<f64>,
}

/// Raised alongside a defective [`RootTriple`]; not an error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Defect {
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

impl RootTriple {
    pub fn lambda(&self, j: usize) -> Complex64 {
        self.roots[j]
    }

    /// Largest real part among the three roots.
    pub fn max_real_part(&self) -> f64 {
        self.roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn defect(&self) -> Option<Defect> {
        match self.kind {
            RootKind::TripleReal => Some(Defect {
                eigenvalue: self.roots[0].re,
                multiplicity: 3,
            }),
            RootKind::DoubleReal => {
                let r = self.roots.map(|z| z.re);
                let eigenvalue = if (r[0] - r[1]).abs() <= (r[1] - r[2]).abs() {
                    r[0]
                } else {
                    r[2]
                };
                Some(Defect {
                    eigenvalue,
                    multiplicity: 2,
                })
            }
            _ => None,
        }
    }

    /// For a double root: `(repeated, simple)`.
    pub fn double_split(&self) -> Option<(f64, f64)> {
        if self.kind != RootKind::DoubleReal {
            return None;
        }
        let r = self.roots.map(|z| z.re);
        Some(if (r[0] - r[1]).abs() <= (r[1] - r[2]).abs() {
            (r[0], r[2])
        } else {
            (r[2], r[0])
        })
    }
}

fn polish(params: &ModelParams, mu: f64, mut z: Complex64) -> Complex64 {
    let mut fz = params.characteristic(mu, z).norm();
    for _ in 0..MAX_POLISH_STEPS {
        if fz == 0.0 {
            break;
        }
        let df = params.characteristic_derivative(mu, z);
        if df.norm() == 0.0 {
            break;
        }
        let next = z - params.characteristic(mu, z) / df;
        let fnext = params.characteristic(mu, next).norm();
        if !(fnext < fz) {
            break;
        }
        z = next;
        fz = fnext;
    }
    z
}

pub fn solve_characteristic(params: &ModelParams, mu: f64) -> Result<RootTriple> {
    let kind = classify_mode(params, mu)?;
    let dc = depress(params, mu)?;
    let (alpha, beta) = (params.alpha, params.beta);
    let real = |x: f64| Complex64::new(x, 0.0);

    let triple = match kind {
        RootKind::TripleReal => {
            // Root of the second derivative 6αλ + 2.
            let l = -1.0 / (3.0 * alpha);
            RootTriple {
                mu,
                roots: [real(l); 3],
                kind,
                a: None,
                b: None,
            }
        }
        RootKind::DoubleReal => {
            // The repeated root is a common root of f and f'. Take the
            // critical point of f nearest the Cardano estimate.
            let estimate = -1.5 * dc.q / dc.p - dc.shift;
            let disc = (4.0 - 12.0 * alpha * beta * mu).max(0.0);
            let c0 = (-2.0 - disc.sqrt()) / (6.0 * alpha);
            let c1 = beta * mu / (3.0 * alpha) / c0;
            let repeated = if (c0 - estimate).abs() <= (c1 - estimate).abs() {
                c0
            } else {
                c1
            };
            let simple = polish(params, mu, real(-1.0 / alpha - 2.0 * repeated)).re;
            let mut r = [repeated, repeated, simple];
            r.sort_by(f64::total_cmp);
            RootTriple {
                mu,
                roots: r.map(real),
                kind,
                a: None,
                b: None,
            }
        }
        RootKind::ThreeRealDistinct => {
            let m = 2.0 * (-dc.p / 3.0).sqrt();
            let arg = (1.5 * dc.q / dc.p * (-3.0 / dc.p).sqrt()).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            let mut r = [0, 1, 2].map(|k| {
                let xi = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                polish(params, mu, real(xi - dc.shift)).re
            });
            r.sort_by(f64::total_cmp);
            RootTriple {
                mu,
                roots: r.map(real),
                kind,
                a: None,
                b: None,
            }
        }
        RootKind::OneRealPlusPair => {
            let half_q = 0.5 * dc.q;
            let s = (half_q * half_q + (dc.p / 3.0).powi(3)).max(0.0).sqrt();
            let u = if dc.q >= 0.0 { -half_q - s } else { -half_q + s }.cbrt();
            let v = -dc.p / (3.0 * u);
            let r = polish(params, mu, real(u + v - dc.shift)).re;
            // Deflate with Vieta: the pair sums to −1/α − r and has
            // squared modulus −μ/(αr).
            let a0 = 0.5 * (-1.0 / alpha - r);
            let b0 = (-mu / (alpha * r) - a0 * a0).max(0.0).sqrt();
            let z = polish(params, mu, Complex64::new(a0, b0));
            let z = Complex64::new(z.re, z.im.abs());
            RootTriple {
                mu,
                roots: [real(r), z, z.conj()],
                kind,
                a: Some(z.re),
                b: Some(z.im),
            }
        }
    };
    Ok(triple)
}

/// Residuals of the algebraic identities a root triple must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootResiduals {
    /// `|Σλ + 1/α|`, `|Σλᵢλⱼ − βμ/α|`, `|Πλ + μ/α|`.
    pub vieta: [f64; 3],
    /// The same, each divided by the magnitude of its terms.
    pub vieta_scaled: [f64; 3],
    /// Real-part cubic `8αa³ + 8a² + 2a(1/α + βμ) + μ(β/α − 1)` at the pair.
    pub part_real: Option<f64>,
    /// `b² − (3αa² + 2a + βμ)/α` at the pair.
    pub part_imag: Option<f64>,
    pub part_real_scaled: Option<f64>,
    pub part_imag_scaled: Option<f64>,
}

impl RootResiduals {
    pub fn max_vieta_scaled(&self) -> f64 {
        self.vieta_scaled.iter().copied().fold(0.0, f64::max)
    }
}

pub fn verify_root_identities(params: &ModelParams, triple: &RootTriple) -> RootResiduals {
    let (alpha, beta, mu) = (params.alpha, params.beta, triple.mu);
    let [l1, l2, l3] = triple.roots;

    let e1 = l1 + l2 + l3;
    let e2 = l1 * l2 + l1 * l3 + l2 * l3;
    let e3 = l1 * l2 * l3;
    let vieta = [
        (e1 + 1.0 / alpha).norm(),
        (e2 - beta * mu / alpha).norm(),
        (e3 + mu / alpha).norm(),
    ];
    let s1 = l1.norm() + l2.norm() + l3.norm();
    let s2 = (l1 * l2).norm() + (l1 * l3).norm() + (l2 * l3).norm();
    let s3 = e3.norm();
    let vieta_scaled = [
        vieta[0] / s1.max(1.0 / alpha),
        vieta[1] / s2.max(beta * mu / alpha),
        vieta[2] / s3.max(mu / alpha),
    ];

    let pair = match (triple.a, triple.b) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    let (part_real, part_real_scaled, part_imag, part_imag_scaled) = match pair {
        Some((a, b)) => {
            let terms = [
                8.0 * alpha * a.powi(3),
                8.0 * a * a,
                2.0 * a * (1.0 / alpha + beta * mu),
                mu * (beta / alpha - 1.0),
            ];
            let g: f64 = terms.iter().sum();
            let g_scale: f64 = terms.iter().map(|t| t.abs()).sum();
            let rhs_terms = [3.0 * a * a, 2.0 * a / alpha, beta * mu / alpha];
            let h = b * b - rhs_terms.iter().sum::<f64>();
            let h_scale = b * b + rhs_terms.iter().map(|t| t.abs()).sum::<f64>();
            (
                Some(g.abs()),
                Some(g.abs() / g_scale),
                Some(h.abs()),
                Some(h.abs() / h_scale),
            )
        }
        None => (None, None, None, None),
    };

    RootResiduals {
        vieta,
        vieta_scaled,
        part_real,
        part_imag,
        part_real_scaled,
        part_imag_scaled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a: f64, b: f64) -> ModelParams {
        ModelParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(ModelParams::new(0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -2.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
        assert!(depress(&params(1.0, 2.0), 0.0).is_err());
        assert!(solve_characteristic(&params(1.0, 2.0), -1.0).is_err());
    }

    #[test]
    fn depressed_coefficients_vanish_on_triple_locus() {
        let dc = depress(&params(1.0 / 3.0, 3.0), 1.0 / 3.0).unwrap();
        assert!(dc.p.abs() < 1e-14);
        assert!(dc.q.abs() < 1e-14);
    }

    #[test]
    fn depressed_coefficients_small_mu_limit() {
        let dc = depress(&params(1.0, 1.0), 1e-14).unwrap();
        assert_relative_eq!(dc.p, -1.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(dc.q, 2.0 / 27.0, epsilon = 1e-13);
    }

    #[test]
    fn depressed_cubic_reexpands_to_monic_characteristic() {
        // Substitute λ = ξ − s into λ³ + c₂λ² + c₁λ + c₀ and collect powers of ξ.
        let p = params(1.0 / 6.0, 11.0 / 6.0);
        let mu = 1.0;
        let dc = depress(&p, mu).unwrap();
        let s = 1.0 / (3.0 * p.alpha());
        let (c2, c1, c0) = (1.0 / p.alpha(), p.beta() * mu / p.alpha(), mu / p.alpha());
        let p_oracle = 3.0 * s * s - 2.0 * c2 * s + c1;
        let q_oracle = -s * s * s + c2 * s * s - c1 * s + c0;
        assert_relative_eq!(dc.p, p_oracle, max_relative = 1e-12);
        assert_relative_eq!(dc.q, q_oracle, max_relative = 1e-12);
        // The ξ² coefficient −3s + c₂ vanishes.
        assert_relative_eq!(3.0 * s, c2, max_relative = 1e-15);
        // And the two forms agree pointwise.
        for xi in [-2.0, -0.3, 0.7, 4.0] {
            let l = Complex64::new(xi - s, 0.0);
            let monic = p.characteristic(mu, l) / p.alpha();
            let depressed = dc.eval(Complex64::new(xi, 0.0));
            assert!((monic - depressed).norm() <= 1e-12 * monic.norm().max(1.0));
        }
    }

    #[test]
    fn critical_masses_coincident_case() {
        let cm = critical_masses(&params(1.0 / 3.0, 3.0));
        assert_relative_eq!(cm.c1, -216.0, max_relative = 1e-12);
        assert!(cm.c2.abs() < 1e-9);
        assert_eq!(cm.regime, MassRegime::CoincidentMasses);
        assert!((cm.m1.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(cm.m1, cm.m2);
    }

    #[test]
    fn critical_masses_absent_between_ninth_and_one() {
        let cm = critical_masses(&params(1.0, 2.0));
        assert_relative_eq!(cm.c1, -13.0, max_relative = 1e-14);
        assert_relative_eq!(cm.c2, -343.0, max_relative = 1e-14);
        assert_eq!(cm.regime, MassRegime::NoRealMasses);
        assert!(cm.m1.is_none() && cm.m2.is_none());
    }

    #[test]
    fn critical_masses_bracket_factored_mode() {
        let p = params(1.0 / 6.0, 11.0 / 6.0);
        let cm = critical_masses(&p);
        assert_relative_eq!(cm.c2, 80.0, max_relative = 1e-12);
        let (m1, m2) = (cm.m1.unwrap(), cm.m2.unwrap());
        // Frozen from a 40-digit evaluation of the quadratic formula.
        assert_relative_eq!(m1, 0.956_987_810_972_955_5, max_relative = 1e-13);
        assert_relative_eq!(m2, 1.017_467_485_796_390_8, max_relative = 1e-13);
        for m in [m1, m2] {
            let w = discriminant_factor(&p, m);
            assert!(w.abs() <= 1e-9 * 4.0 * p.beta().powi(3) / p.alpha() * m * m);
        }
        assert!(cm.contains_strictly(1.0));
    }

    #[test]
    fn non_dissipative_has_no_masses() {
        let cm = critical_masses(&params(2.0, 1.0));
        assert_eq!(cm.regime, MassRegime::NonDissipative);
        assert!(cm.m1.is_none());
    }

    #[test]
    fn discriminant_signs() {
        let zero = discriminant(&params(1.0 / 3.0, 3.0), 1.0 / 3.0).unwrap();
        assert_eq!(zero.sign, DiscriminantSign::Zero);
        let neg = discriminant(&params(1.0 / 6.0, 11.0 / 6.0), 1.0).unwrap();
        assert_eq!(neg.sign, DiscriminantSign::Negative);
        assert!(neg.d < 0.0);
        let pos = discriminant(&params(1.0, 2.0), 1.0).unwrap();
        assert_eq!(pos.sign, DiscriminantSign::Positive);
        assert!(pos.d > 0.0);
    }

    #[test]
    fn discriminant_factorization() {
        for (a, b, mu) in [(1.0, 2.0, 1.0), (0.1, 1.3, 7.5), (0.05, 1.0, 1e3)] {
            let p = params(a, b);
            let r = discriminant(&p, mu).unwrap();
            assert_relative_eq!(r.d, mu / (a * a) * r.w, max_relative = 1e-10);
        }
    }

    #[test]
    fn triple_root() {
        let t = solve_characteristic(&params(1.0 / 3.0, 3.0), 1.0 / 3.0).unwrap();
        assert_eq!(t.kind, RootKind::TripleReal);
        for z in t.roots {
            assert!((z.re + 1.0).abs() < 1e-12 && z.im == 0.0);
        }
        let d = t.defect().unwrap();
        assert_eq!(d.multiplicity, 3);
    }

    #[test]
    fn factored_cubic_roots() {
        let t = solve_characteristic(&params(1.0 / 6.0, 11.0 / 6.0), 1.0).unwrap();
        assert_eq!(t.kind, RootKind::ThreeRealDistinct);
        for (z, want) in t.roots.iter().zip([-3.0, -2.0, -1.0]) {
            assert!((z.re - want).abs() < 1e-12, "{z} vs {want}");
            assert_eq!(z.im, 0.0);
        }
        assert!(t.defect().is_none());
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn mixed_roots_against_bisection_and_deflation() {
        let p = params(1.0, 2.0);
        let f = |x: f64| ((x + 1.0) * x + 2.0) * x + 1.0;
        let real = bisect(f, -1.0, -0.5);
        // Deflate: x³ + x² + 2x + 1 = (x − r)(x² + bx + c).
        let b = 1.0 + real;
        let c = 2.0 + b * real;
        let pair = Complex64::new(-b / 2.0, (c - b * b / 4.0).sqrt());

        let t = solve_characteristic(&p, 1.0).unwrap();
        assert_eq!(t.kind, RootKind::OneRealPlusPair);
        assert!((t.roots[0].re - real).abs() < 1e-13);
        assert!((t.roots[0].re + 0.569_840_290_998_053_3).abs() < 1e-13);
        assert!((t.roots[1] - pair).norm() < 1e-12);
        assert_eq!(t.roots[2], t.roots[1].conj());
        assert!(t.b.unwrap() > 0.0);
        assert_eq!(t.a, Some(t.roots[1].re));
    }

    #[test]
    fn classification_examples() {
        let p = params(1.0, 2.0);
        for mu in [1e-3, 1.0, 1e4, 1e9] {
            assert_eq!(classify_mode(&p, mu).unwrap(), RootKind::OneRealPlusPair);
        }
        let q = params(1.0 / 6.0, 11.0 / 6.0);
        let cm = critical_masses(&q);
        assert_eq!(classify_mode(&q, cm.m2.unwrap()).unwrap(), RootKind::DoubleReal);
        assert_eq!(classify_mode(&q, cm.m1.unwrap()).unwrap(), RootKind::DoubleReal);
        assert_eq!(
            classify_mode(&params(1.0 / 3.0, 3.0), 1.0 / 3.0).unwrap(),
            RootKind::TripleReal
        );
    }

    #[test]
    fn double_roots_at_critical_masses() {
        let q = params(1.0 / 6.0, 11.0 / 6.0);
        let cm = critical_masses(&q);
        // 40-digit reference values of (repeated, simple) at m₁ and m₂.
        let cases = [
            (cm.m1.unwrap(), -1.299_254_187_954_602_8, -3.401_491_624_090_794_4),
            (cm.m2.unwrap(), -2.518_927_630_227_215_4, -0.962_144_739_545_569_3),
        ];
        for (mu, rep, simple) in cases {
            let t = solve_characteristic(&q, mu).unwrap();
            assert_eq!(t.kind, RootKind::DoubleReal);
            let (r, s) = t.double_split().unwrap();
            assert!((r - rep).abs() < 1e-7, "{r} vs {rep}");
            assert!((s - simple).abs() < 1e-9, "{s} vs {simple}");
            assert_eq!(t.defect().unwrap().eigenvalue, r);
            assert!(t.roots[0].re <= t.roots[1].re && t.roots[1].re <= t.roots[2].re);
        }
    }

    #[test]
    fn residuals_vanish_for_exact_roots() {
        let p = params(1.0 / 6.0, 11.0 / 6.0);
        let exact = RootTriple {
            mu: 1.0,
            roots: [-3.0, -2.0, -1.0].map(|x| Complex64::new(x, 0.0)),
            kind: RootKind::ThreeRealDistinct,
            a: None,
            b: None,
        };
        let r = verify_root_identities(&p, &exact);
        assert!(r.vieta.iter().all(|v| *v < 1e-12), "{:?}", r.vieta);
        assert!(r.part_real.is_none());
    }

    #[test]
    fn residuals_for_conjugate_pair_and_perturbation() {
        let p = params(1.0, 2.0);
        let t = solve_characteristic(&p, 1.0).unwrap();
        let r = verify_root_identities(&p, &t);
        assert!(r.part_real.unwrap() < 1e-9);
        assert!(r.part_imag.unwrap() < 1e-9);
        assert!(r.vieta.iter().all(|v| *v < 1e-12));

        let mut bad = t;
        bad.roots[0].re += 1e-3;
        let r = verify_root_identities(&p, &bad);
        assert!(r.vieta.iter().copied().fold(0.0, f64::max) > 1e-5);
    }
}

//! Dense 3×3 helpers. Every modal block of the generator is 3×3, so the
//! closed forms below are all the linear algebra the crate needs.

use num_complex::Complex64;

pub type Mat3 = [[f64; 3]; 3];
pub type CMat3 = [[Complex64; 3]; 3];
pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

pub const ZERO3: Mat3 = [[0.0; 3]; 3];

pub fn identity() -> Mat3 {
    diag([1.0, 1.0, 1.0])
}

pub fn diag(d: Vec3) -> Mat3 {
    let mut m = ZERO3;
    for i in 0..3 {
        m[i][i] = d[i];
    }
    m
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut t = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][j] - b[i][j];
        }
    }
    c
}

pub fn scale(a: &Mat3, s: f64) -> Mat3 {
    let mut c = *a;
    c.iter_mut().flatten().for_each(|x| *x *= s);
    c
}

pub fn mat_vec(a: &Mat3, x: &Vec3) -> Vec3 {
    [0, 1, 2].map(|i| (0..3).map(|k| a[i][k] * x[k]).sum())
}

pub fn frobenius(a: &Mat3) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// `xᵀ A x` for real `x`.
pub fn quad_form(a: &Mat3, x: &Vec3) -> f64 {
    let ax = mat_vec(a, x);
    (0..3).map(|i| x[i] * ax[i]).sum()
}

/// `x* A x` for complex `x` and real symmetric `A`; the result is real.
pub fn herm_form(a: &Mat3, x: &CVec3) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            acc += x[i].conj() * a[i][j] * x[j];
        }
    }
    acc.re
}

pub fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse through the adjugate; `None` when the determinant vanishes.
pub fn inverse(a: &Mat3) -> Option<Mat3> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut inv = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = others(j);
            let (c0, c1) = others(i);
            let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            inv[i][j] = sign * minor / d;
        }
    }
    Some(inv)
}

fn others(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

pub fn c_det(a: &CMat3) -> Complex64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn c_inverse(a: &CMat3) -> Option<CMat3> {
    let d = c_det(a);
    if d.norm() == 0.0 || !d.is_finite() {
        return None;
    }
    let mut inv = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = others(j);
            let (c0, c1) = others(i);
            let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            inv[i][j] = minor * sign / d;
        }
    }
    Some(inv)
}

pub fn c_norm1(a: &CMat3) -> f64 {
    (0..3)
        .map(|j| (0..3).map(|i| a[i][j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `A x = b` for complex data; returns the solution and a 1-norm
/// condition estimate of `A`.
pub fn c_solve(a: &CMat3, b: &CVec3) -> Option<(CVec3, f64)> {
    let inv = c_inverse(a)?;
    let x = [0, 1, 2].map(|i| (0..3).map(|k| inv[i][k] * b[k]).sum());
    Some((x, c_norm1(a) * c_norm1(&inv)))
}

/// Lower-triangular `L` with `A = L Lᵀ`; `None` unless `A` is positive definite.
pub fn cholesky(a: &Mat3) -> Option<Mat3> {
    let mut l = ZERO3;
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Eigenvalues of a real symmetric 3×3 matrix in ascending order.
///
/// Trigonometric closed form followed by Rayleigh-quotient refinement of
/// each eigenvalue, using an eigenvector recovered from the null space of
/// `A − λI`. The closed form only has absolute accuracy relative to the
/// largest eigenvalue; refinement converges quadratically, so a few passes
/// restore relative accuracy for the small ones.
pub fn sym_eigenvalues(a: &Mat3) -> Vec3 {
    let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let mut eig = if off == 0.0 {
        [a[0][0], a[1][1], a[2][2]]
    } else {
        let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
        let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * off;
        let p = (p2 / 6.0).sqrt();
        let b = scale(&sub(a, &scale(&identity(), q)), 1.0 / p);
        let r = (det(&b) / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let hi = q + 2.0 * p * phi.cos();
        let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [lo, 3.0 * q - hi - lo, hi]
    };
    for lam in eig.iter_mut() {
        for _ in 0..3 {
            let Some(v) = null_vector(&sub(a, &scale(&identity(), *lam))) else {
                break;
            };
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            let next = quad_form(a, &v) / norm2;
            let done = next == *lam;
            *lam = next;
            if done {
                break;
            }
        }
    }
    eig.sort_by(f64::total_cmp);
    eig
}

/// Approximate null vector of a (nearly) rank-2 matrix: the largest cross
/// product among its row pairs.
fn null_vector(m: &Mat3) -> Option<Vec3> {
    let cross = |a: &Vec3, b: &Vec3| -> Vec3 {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let candidates = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])];
    let best = candidates
        .into_iter()
        .max_by(|x, y| {
            let nx: f64 = x.iter().map(|v| v * v).sum();
            let ny: f64 = y.iter().map(|v| v * v).sum();
            nx.total_cmp(&ny)
        })
        .unwrap();
    let n: f64 = best.iter().map(|v| v * v).sum();
    (n > 0.0 && n.is_finite()).then_some(best)
}

/// Spectral norm of a real matrix, `sqrt(λmax(AᵀA))`.
pub fn spectral_norm(a: &Mat3) -> f64 {
    let ata = mul(&transpose(a), a);
    sym_eigenvalues(&ata)[2].max(0.0).sqrt()
}

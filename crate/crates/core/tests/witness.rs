use mgt_spectra::{modes_dirichlet_1d, optimality_witness, ModelParams};

fn cubic(alpha: f64, beta: f64, mu: f64, x: f64) -> f64 {
    ((alpha * x + 1.0) * x + beta * mu) * x + mu
}

fn bisect(alpha: f64, beta: f64, mu: f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = cubic(alpha, beta, mu, lo);
    assert!(flo * cubic(alpha, beta, mu, hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (cubic(alpha, beta, mu, mid) * flo) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn witness_extends_dirichlet_modes_past_the_list() {
    let (alpha, beta) = (0.05, 1.0);
    let p = ModelParams::new(alpha, beta).unwrap();
    let modes = modes_dirichlet_1d(2.5, std::f64::consts::PI, 1).unwrap();
    let omega = -1.05;
    let w = optimality_witness(&p, &modes, omega).unwrap();
    assert!(w.extended);
    assert_eq!(w.mode, 2);
    assert!((w.mu - 25.0).abs() < 1e-12);
    let oracle = bisect(alpha, beta, w.mu, -1.05, -1.0);
    assert!((w.rate - oracle).abs() < 1e-12, "{} vs {oracle}", w.rate);
    assert!(w.rate > omega);
    // The listed mode has nothing above omega.
    let first = bisect(alpha, beta, 6.25, -1.5, -1.0);
    assert!(first < omega);
}

//! The compactly supported bump kernel behind the packing construction.
//!
//! h(x) = (8/27) (1 - (9/4) ||x + e1/3||^2)^3 inside the ball
//! ||x + e1/3|| <= 2/3 and zero outside. It is twice continuously
//! differentiable with |h| <= 1, ||grad h|| <= 3, ||grad h(0)|| = 3/4 and
//! Hessian eigenvalues in [-4, 4]. The scaled copy
//! k(x) = 10 sqrt(d) eps^2 h(x / (10 sqrt(d) eps)) concentrates the bump
//! on (-eps', eps')^d with eps' = 10 sqrt(d) eps.

/// Value and gradient of the unit kernel.
pub fn kernel_h(x: &[f64]) -> (f64, Vec<f64>) {
    let d = x.len();
    // shifted argument x + e1/3
    let mut sq = 0.0;
    for (j, &xi) in x.iter().enumerate() {
        let v = if j == 0 { xi + 1.0 / 3.0 } else { xi };
        sq += v * v;
    }
    if sq >= 4.0 / 9.0 {
        return (0.0, vec![0.0; d]);
    }
    let a = 1.0 - 2.25 * sq;
    let value = 8.0 / 27.0 * a * a * a;
    let w = -4.0 * a * a;
    let grad = (0..d)
        .map(|j| {
            let v = if j == 0 { x[j] + 1.0 / 3.0 } else { x[j] };
            w * v
        })
        .collect();
    (value, grad)
}

pub fn kernel_h_value(x: &[f64]) -> f64 {
    let mut sq = 0.0;
    for (j, &xi) in x.iter().enumerate() {
        let v = if j == 0 { xi + 1.0 / 3.0 } else { xi };
        sq += v * v;
    }
    if sq >= 4.0 / 9.0 {
        return 0.0;
    }
    let a = 1.0 - 2.25 * sq;
    8.0 / 27.0 * a * a * a
}

/// Value and gradient of the scaled kernel for packing resolution `epsilon`.
pub fn kernel_k(x: &[f64], epsilon: f64) -> (f64, Vec<f64>) {
    assert!(epsilon > 0.0);
    let d = x.len() as f64;
    let s = 10.0 * d.sqrt() * epsilon;
    let scaled: Vec<f64> = x.iter().map(|&v| v / s).collect();
    let (hv, hg) = kernel_h(&scaled);
    // k = s * eps * h(x/s); grad k = eps * grad h(x/s)
    (s * epsilon * hv, hg.into_iter().map(|g| epsilon * g).collect())
}

/// Half-width of the scaled kernel's support box.
pub fn support_half_width(epsilon: f64, d: usize) -> f64 {
    10.0 * (d as f64).sqrt() * epsilon
}

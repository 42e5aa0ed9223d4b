//! Small numeric helpers shared across the crate: vector arithmetic on
//! `&[f64]` slices, a seedable standard-normal source, finite differences,
//! a Jacobi eigensolver for the tiny symmetric matrices that show up in
//! curvature checks, and stable seed derivation.

use rand::Rng;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Draw one standard normal via Box-Muller. Two uniforms per draw; the
/// second Box-Muller output is discarded so the stream stays a simple
/// function of the rng position.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// E[clip(Z, -a, a)^2] for Z ~ N(0,1), via Simpson quadrature on [-a, a]
/// plus the exact tail mass.
pub fn clipped_normal_second_moment(a: f64) -> f64 {
    assert!(a > 0.0);
    let phi = |z: f64| (-0.5 * z * z).exp() / (std::f64::consts::TAU).sqrt();
    let steps = 4000; // even
    let h = 2.0 * a / steps as f64;
    let mut body = 0.0;
    let mut mass = 0.0;
    for i in 0..=steps {
        let z = -a + i as f64 * h;
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        body += w * z * z * phi(z);
        mass += w * phi(z);
    }
    body *= h / 3.0;
    mass *= h / 3.0;
    body + a * a * (1.0 - mass)
}

/// Central-difference gradient of `f` at `x` with the given step.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let orig = xp[j];
        xp[j] = orig + step;
        let up = f(&xp);
        xp[j] = orig - step;
        let dn = f(&xp);
        xp[j] = orig;
        g[j] = (up - dn) / (2.0 * step);
    }
    g
}

/// Central-difference Hessian of `f` at `x` (symmetric by construction).
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let d = x.len();
    let mut h = vec![0.0; d * d];
    let mut xp = x.to_vec();
    let mut eval = |dx: &[(usize, f64)]| -> f64 {
        for &(j, v) in dx {
            xp[j] += v;
        }
        let val = f(&xp);
        for &(j, v) in dx {
            xp[j] -= v;
        }
        val
    };
    let f0 = eval(&[]);
    for i in 0..d {
        // diagonal: (f(x+h) - 2 f(x) + f(x-h)) / h^2
        let up = eval(&[(i, step)]);
        let dn = eval(&[(i, -step)]);
        h[i * d + i] = (up - 2.0 * f0 + dn) / (step * step);
        for j in (i + 1)..d {
            let pp = eval(&[(i, step), (j, step)]);
            let pm = eval(&[(i, step), (j, -step)]);
            let mp = eval(&[(i, -step), (j, step)]);
            let mm = eval(&[(i, -step), (j, -step)]);
            let v = (pp - pm - mp + mm) / (4.0 * step * step);
            h[i * d + j] = v;
            h[j * d + i] = v;
        }
    }
    h
}

/// Eigenvalues of a small symmetric matrix (row-major) by cyclic Jacobi
/// rotations. Returns them in ascending order.
pub fn symmetric_eigenvalues(mat: &[f64], d: usize) -> Vec<f64> {
    assert_eq!(mat.len(), d * d);
    let mut a = mat.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += a[i * d + j] * a[i * d + j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// FNV-1a over a byte stream; the crate's stable hash for seed derivation.
/// Kept hand-rolled so seeds never depend on std hasher internals.
#[derive(Clone, Copy)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub fn write(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self
    }

    pub fn write_u64(self, v: u64) -> Self {
        self.write(&v.to_le_bytes())
    }

    pub fn finish(self) -> u64 {
        // splitmix-style finalizer so nearby inputs land far apart
        let mut z = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normal_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = standard_normal(&mut rng);
            s1 += z;
            s2 += z * z;
        }
        assert!((s1 / n as f64).abs() < 0.01);
        assert!((s2 / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn clipped_second_moment_matches_reference() {
        // E[clip(Z,-3,3)^2] = 1 - 6 phi(3) + 16 (1 - Phi(3)) = 0.99500...
        let v = clipped_normal_second_moment(3.0);
        assert!((v - 0.995_008_1).abs() < 1e-5, "got {v}");
        // clip at +inf recovers the plain second moment
        assert!((clipped_normal_second_moment(8.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fd_gradient_on_quadratic() {
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[0] * x[1];
        let g = fd_gradient(&f, &[0.5, -0.25], 1e-5);
        assert!((g[0] - (1.0 - 0.75)).abs() < 1e-8);
        assert!((g[1] - 1.5).abs() < 1e-8);
    }

    #[test]
    fn jacobi_eigenvalues_2x2() {
        // [[2, 1], [1, 2]] -> {1, 3}
        let eig = symmetric_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((eig[0] - 1.0).abs() < 1e-10);
        assert!((eig[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn jacobi_eigenvalues_3x3_diag() {
        let eig = symmetric_eigenvalues(&[3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0], 3);
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 2.0).abs() < 1e-12);
        assert!((eig[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fnv_is_stable() {
        let h = Fnv1a::new().write(b"mre-c").write_u64(42).finish();
        let h2 = Fnv1a::new().write(b"mre-c").write_u64(42).finish();
        assert_eq!(h, h2);
        let h3 = Fnv1a::new().write(b"mre-c").write_u64(43).finish();
        assert_ne!(h, h3);
    }
}

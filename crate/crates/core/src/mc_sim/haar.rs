//! Haar-distributed unitaries from the Householder QR of a complex Gaussian
//! matrix.
//!
//! Column `k` of a Gaussian matrix, after the first `k` reflections, is again
//! an independent Gaussian vector, so the reflectors can be drawn one at a
//! time. With `Q = H_0 H_1 ... H_{n-1}` and the phases
//! `Lambda = diag(r_kk / |r_kk|)`, `U = Q Lambda` is exactly Haar. The
//! reflectors are applied to the target in place, which costs one `n^3` pass
//! instead of forming `U` and multiplying.

use nalgebra::DMatrix;
use num::complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// One Haar draw, stored as its reflectors and phases.
#[derive(Clone, Debug)]
pub struct HaarDraw {
    n: usize,
    /// Reflector `k` has length `n - k` and starts at `k n - k (k - 1) / 2`.
    vectors: Vec<Complex64>,
    /// `2 / |v_k|^2`, zero for a degenerate draw.
    betas: Vec<f64>,
    phases: Vec<Complex64>,
}

impl HaarDraw {
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut vectors = Vec::with_capacity(n * (n + 1) / 2);
        let mut betas = Vec::with_capacity(n);
        let mut phases = Vec::with_capacity(n);
        for k in 0..n {
            let start = vectors.len();
            for _ in k..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                vectors.push(Complex64::new(re, im));
            }
            let z = &mut vectors[start..];
            let alpha = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let lead = z[0].norm();
            let phase = if lead > 0.0 { z[0] / lead } else { Complex64::new(1.0, 0.0) };
            if alpha == 0.0 {
                betas.push(0.0);
                phases.push(Complex64::new(1.0, 0.0));
                continue;
            }
            z[0] += phase * alpha;
            betas.push(1.0 / (alpha * (alpha + lead)));
            // r_kk = -phase * alpha
            phases.push(-phase);
        }
        Self { n, vectors, betas, phases }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `M <- U M` for a column-major `n x cols` matrix.
    pub fn apply(&self, m: &mut [Complex64], cols: usize) {
        let n = self.n;
        debug_assert_eq!(m.len(), n * cols);
        for c in 0..cols {
            for (x, p) in m[c * n..(c + 1) * n].iter_mut().zip(&self.phases) {
                *x *= p;
            }
        }
        for k in (0..n).rev() {
            let beta = self.betas[k];
            if beta == 0.0 {
                continue;
            }
            let offset = k * n - k * k.saturating_sub(1) / 2;
            let v = &self.vectors[offset..offset + n - k];
            for c in 0..cols {
                let col = &mut m[c * n + k..(c + 1) * n];
                let mut w = Complex64::new(0.0, 0.0);
                for (vi, xi) in v.iter().zip(col.iter()) {
                    w += vi.conj() * xi;
                }
                w *= beta;
                for (vi, xi) in v.iter().zip(col.iter_mut()) {
                    *xi -= vi * w;
                }
            }
        }
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let n = self.n;
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            m[i * n + i] = Complex64::new(1.0, 0.0);
        }
        self.apply(&mut m, n);
        DMatrix::from_vec(n, n, m)
    }
}

/// Explicit `n x n` Haar unitary.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    HaarDraw::sample(n, rng).to_matrix()
}

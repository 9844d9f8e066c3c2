// Complex FFT of arbitrary length: iterative radix-2 for powers of two,
// Bluestein's chirp-z reduction to a power of two otherwise.

use alloc::vec::Vec;

use crate::linalg::C64;
use crate::math::*;

#[derive(Clone, Debug)]
pub(crate) struct FftPlan {
    n: usize,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Radix2 { twiddles: Vec<C64> },
    Bluestein { m: usize, chirp: Vec<C64>, kernel_fft: Vec<C64>, inner: Vec<C64> },
}

fn radix2_twiddles(n: usize) -> Vec<C64> {
    (0..n / 2).map(|k| C64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)).collect()
}

// In-place forward transform, length a power of two.
fn radix2(data: &mut [C64], twiddles: &[C64]) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

impl FftPlan {
    pub(crate) fn new(n: usize) -> Self {
        if n.is_power_of_two() {
            return Self { n, kind: Kind::Radix2 { twiddles: radix2_twiddles(n) } };
        }
        let m = (2 * n - 1).next_power_of_two();
        // chirp_k = exp(−iπk²/n); k² is reduced mod 2n to keep the angle small.
        let chirp: Vec<C64> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * n as u128)) as f64;
                C64::from_polar(1.0, -PI * k2 / n as f64)
            })
            .collect();
        let inner = radix2_twiddles(m);
        let mut kernel = alloc::vec![C64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        radix2(&mut kernel, &inner);
        Self { n, kind: Kind::Bluestein { m, chirp, kernel_fft: kernel, inner } }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    // Forward transform X_k = Σ_j x_j exp(−2πi jk/n), in place.
    pub(crate) fn forward(&self, data: &mut [C64]) {
        debug_assert_eq!(data.len(), self.n);
        match &self.kind {
            Kind::Radix2 { twiddles } => radix2(data, twiddles),
            Kind::Bluestein { m, chirp, kernel_fft, inner } => {
                let m = *m;
                let mut a = alloc::vec![C64::new(0.0, 0.0); m];
                for k in 0..self.n {
                    a[k] = data[k] * chirp[k];
                }
                radix2(&mut a, inner);
                for (x, y) in a.iter_mut().zip(kernel_fft) {
                    *x *= y;
                }
                // Inverse via conjugation.
                for x in a.iter_mut() {
                    *x = x.conj();
                }
                radix2(&mut a, inner);
                let scale = 1.0 / m as f64;
                for k in 0..self.n {
                    data[k] = a[k].conj() * scale * chirp[k];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1usize, 2, 3, 5, 8, 12, 16, 30, 64, 100] {
            let x: Vec<C64> = (0..n).map(|j| C64::new(sin(j as f64 * 1.3), cos(j as f64 * 0.4))).collect();
            let mut y = x.clone();
            let plan = FftPlan::new(n);
            assert_eq!(plan.len(), n);
            plan.forward(&mut y);
            let z = naive(&x);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).norm() < 1e-10 * n as f64, "n={n}");
            }
        }
    }
}

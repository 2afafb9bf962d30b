//! In-place radix-2 FFT.

use core::f64::consts::PI;

use num_complex::Complex64;

/// Forward transform X_j = Σ_k x_k e^{−2πi jk/n}, in place.
///
/// # Panics
/// If the length is not a power of two.
pub fn fft(data: &mut [Complex64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n < 2 {
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
        let half = len / 2;
        let angle = -2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // Direct twiddles avoid error build-up from repeated multiplication.
                let (s, c) = libm::sincos(angle * k as f64);
                let w = Complex64::new(c, s);
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let (s, c) = libm::sincos(-2.0 * PI * ((j * k) % n) as f64 / n as f64);
                        v * Complex64::new(c, s)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1usize, 2, 4, 8, 64, 256] {
            let x: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(libm::sin(0.3 * k as f64 + 0.1), libm::cos(1.7 * k as f64)))
                .collect();
            let expect = naive_dft(&x);
            let mut got = x.clone();
            fft(&mut got);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10 * n as f64, "n={n}");
            }
        }
    }

    #[test]
    #[should_panic]
    fn rejects_non_power_of_two() {
        fft(&mut [Complex64::new(0.0, 0.0); 6]);
    }
}

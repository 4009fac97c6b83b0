//! Iterative radix-2 FFT, enough for power-of-two analysis windows.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// In-place radix-2 Cooley-Tukey transform. `re.len()` must be a power of two
/// and equal to `im.len()`.
pub(crate) fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    debug_assert!(n.is_power_of_two());
    debug_assert_eq!(n, im.len());

    // bit-reversal permutation
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
        let mut bit = n >> 1;
        while bit != 0 && j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
    }

    let mut len = 2;
    while len <= n {
        let angle = -2.0 * PI / len as f64;
        let (w_im, w_re) = (libm::sin(angle), libm::cos(angle));
        let mut start = 0;
        while start < n {
            let mut cur_re = 1.0;
            let mut cur_im = 0.0;
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let t_re = re[b] * cur_re - im[b] * cur_im;
                let t_im = re[b] * cur_im + im[b] * cur_re;
                re[b] = re[a] - t_re;
                im[b] = im[a] - t_im;
                re[a] += t_re;
                im[a] += t_im;
                let next_re = cur_re * w_re - cur_im * w_im;
                cur_im = cur_re * w_im + cur_im * w_re;
                cur_re = next_re;
            }
            start += len;
        }
        len <<= 1;
    }
}

/// Magnitude spectrum of a real signal zero-padded to `fft_size`.
/// Returns the `fft_size/2 + 1` non-negative-frequency bins.
pub(crate) fn magnitude_spectrum(frame: &[f64], fft_size: usize) -> Vec<f64> {
    debug_assert!(fft_size.is_power_of_two() && frame.len() <= fft_size);
    let mut re = vec![0.0; fft_size];
    let mut im = vec![0.0; fft_size];
    re[..frame.len()].copy_from_slice(frame);
    fft_in_place(&mut re, &mut im);
    (0..=fft_size / 2)
        .map(|k| libm::sqrt(re[k] * re[k] + im[k] * im[k]))
        .collect()
}

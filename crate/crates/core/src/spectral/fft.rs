use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Forward DFT of a fixed length: iterative radix-2 for powers of two, a
/// direct O(n²) transform otherwise.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    /// `exp(-2πi k / len)` for `k < len`.
    twiddles: Vec<Complex64>,
}

impl Fft {
    pub fn new(len: usize) -> Self {
        let twiddles = (0..len)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        Self { len, twiddles }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length must match the planned transform");
        if self.len.is_power_of_two() {
            self.radix2(buf);
        } else {
            self.direct(buf);
        }
    }

    fn radix2(&self, buf: &mut [Complex64]) {
        let n = self.len;
        if n < 2 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }

    fn direct(&self, buf: &mut [Complex64]) {
        let n = self.len;
        let input = buf.to_vec();
        for (k, out) in buf.iter_mut().enumerate() {
            *out = input
                .iter()
                .enumerate()
                .map(|(t, &x)| x * self.twiddles[(k * t) % n])
                .sum();
        }
    }
}

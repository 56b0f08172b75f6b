//! Seeded pseudo-randomness for reproducible trials.
//!
//! SplitMix64: the state advances by `0x9E3779B97F4A7C15`; each output is the
//! state mixed by `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
//! `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, `z ^ (z >> 31)` (wrapping
//! arithmetic). Uniform doubles take the top 53 bits: `(z >> 11) * 2^-53`.
//! Any implementation following these constants reproduces the same trials.

use crate::cmatrix::{c, CMatrix, C64};

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }

    /// Real and imaginary parts independently uniform in `[-1, 1)`.
    pub fn complex(&mut self) -> C64 {
        let re = self.uniform(-1.0, 1.0);
        let im = self.uniform(-1.0, 1.0);
        c(re, im)
    }

    /// Row-major matrix of [`SplitMix64::complex`] entries.
    pub fn matrix(&mut self, n: usize) -> CMatrix {
        let data = (0..n * n).map(|_| self.complex()).collect();
        CMatrix::from_vec(n, data).expect("finite entries")
    }

    /// Unitary from modified Gram-Schmidt (applied twice) on the columns of
    /// a random matrix.
    pub fn unitary(&mut self, n: usize) -> CMatrix {
        loop {
            let a = self.matrix(n);
            let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
            let mut ok = true;
            for j in 0..n {
                for _pass in 0..2 {
                    for k in 0..j {
                        let proj: C64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                        let (head, tail) = cols.split_at_mut(j);
                        for (x, v) in tail[0].iter_mut().zip(&head[k]) {
                            *x -= proj * v;
                        }
                    }
                }
                let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    ok = false;
                    break;
                }
                for z in cols[j].iter_mut() {
                    *z /= norm;
                }
            }
            if ok {
                let mut u = CMatrix::zeros(n);
                for (j, col) in cols.iter().enumerate() {
                    for (i, &z) in col.iter().enumerate() {
                        u.set(i, j, z);
                    }
                }
                return u;
            }
        }
    }
}

//! The standard polynomial `F_N(x_1, .., x_N) = sum_σ sgn(σ) x_σ(1) .. x_σ(N)`.

use super::{CMatrix, C64};
use crate::error::{Error, Result};

/// 8! = 40320 ordered products; anything larger is refused.
pub const MAX_STANDARD_DEGREE: usize = 8;

/// Evaluates `F_N` on `xs` (with `N = xs.len()`).
///
/// Permutations are visited in lexicographic order and each ordered product
/// is formed left to right, sharing prefixes. The signed terms are
/// accumulated entrywise with an exactly rounded sum, so the result does not
/// depend on the order in which terms arrive. In particular swapping two
/// arguments negates the output bit for bit.
pub fn standard_polynomial(xs: &[CMatrix]) -> Result<CMatrix> {
    let degree = xs.len();
    if degree == 0 {
        return Err(Error::Empty("standard polynomial needs at least one argument"));
    }
    if degree > MAX_STANDARD_DEGREE {
        return Err(Error::DegreeTooLarge { degree, max: MAX_STANDARD_DEGREE });
    }
    let n = xs[0].dim();
    if let Some(bad) = xs.iter().find(|x| x.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
    }

    let mut acc: Vec<ExactSum> = (0..2 * n * n).map(|_| ExactSum::default()).collect();
    let mut used = vec![false; degree];
    for first in 0..degree {
        used[first] = true;
        expand(xs, &mut used, xs[first].clone(), 1, false, &mut acc);
        used[first] = false;
    }

    let data = acc
        .chunks(2)
        .map(|pair| C64::new(pair[0].value(), pair[1].value()))
        .collect();
    CMatrix::from_vec(n, data)
}

fn expand(
    xs: &[CMatrix],
    used: &mut [bool],
    prefix: CMatrix,
    depth: usize,
    odd: bool,
    acc: &mut [ExactSum],
) {
    if depth == xs.len() {
        let sign = if odd { -1.0 } else { 1.0 };
        for (k, z) in prefix.entries().iter().enumerate() {
            acc[2 * k].add(sign * z.re);
            acc[2 * k + 1].add(sign * z.im);
        }
        return;
    }
    for next in 0..xs.len() {
        if used[next] {
            continue;
        }
        // appending `next` creates one inversion per already-placed larger index
        let inversions = (next + 1..xs.len()).filter(|&j| used[j]).count();
        used[next] = true;
        let product = &prefix * &xs[next];
        expand(xs, used, product, depth + 1, odd ^ (inversions % 2 == 1), acc);
        used[next] = false;
    }
}

/// Exactly rounded floating-point summation (Shewchuk's non-overlapping
/// partials with a final round-half-even correction).
#[derive(Debug, Default, Clone)]
pub(crate) struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub(crate) fn add(&mut self, mut x: f64) {
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    pub(crate) fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(mut k) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[k];
        let mut lo = 0.0;
        while k > 0 {
            let x = hi;
            k -= 1;
            let y = p[k];
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        if k > 0 && ((lo < 0.0 && p[k - 1] < 0.0) || (lo > 0.0 && p[k - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

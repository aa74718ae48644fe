//! Correctly rounded summation.
//!
//! Kernel values are sums of attribute products whose order depends on how
//! the graphs are numbered. Summing them exactly makes every value depend
//! only on the multiset of products, so symmetric and permuted inputs give
//! bit-identical results.

use alloc::vec::Vec;

/// Shewchuk's non-overlapping partials with a round-half-even finish.
#[derive(Debug, Default, Clone)]
pub(crate) struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for k in 0..self.partials.len() {
            let mut y = self.partials[k];
            if libm::fabs(x) < libm::fabs(y) {
                core::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub(crate) fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(mut n) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[n];
        let mut lo = 0.0;
        if !hi.is_finite() {
            return p.iter().sum();
        }
        while n > 0 {
            n -= 1;
            let x = hi;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // the dropped tail decides ties of the half-way case
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

/// Correctly rounded `Σ a_k b_k`.
pub(crate) fn exact_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = ExactSum::new();
    for (x, y) in a.iter().zip(b) {
        s.add(x * y);
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum(xs: &[f64]) -> f64 {
        let mut s = ExactSum::new();
        xs.iter().for_each(|&x| s.add(x));
        s.value()
    }

    #[test]
    fn cancellation() {
        assert_eq!(sum(&[1e100, 1.0, -1e100]), 1.0);
        assert_eq!(sum(&[0.1, 0.2, -0.3]), 2.7755575615628914e-17);
        assert_eq!(sum(&[]), 0.0);
    }

    #[test]
    fn order_independent() {
        let xs = [0.1, 1e-17, 3.3, -2.2, 1e16, -1e16, 7.0 / 3.0];
        let mut rev = xs;
        rev.reverse();
        assert_eq!(sum(&xs), sum(&rev));
        assert_eq!(sum(&[0.1; 10]), 1.0);
    }

    #[test]
    fn half_even_rounding() {
        // 1 + 2^-53 + 2^-106 rounds up; 1 + 2^-53 alone rounds to even
        let e = f64::EPSILON / 2.0;
        assert_eq!(sum(&[1.0, e, e * e]), 1.0 + f64::EPSILON);
        assert_eq!(sum(&[1.0, e]), 1.0);
    }
}

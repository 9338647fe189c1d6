//! Neumaier compensated summation.
//!
//! Every reduction over coalitions or background rows goes through this
//! accumulator so that results do not drift with the number of terms.

/// Running sum with a separate compensation term.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(iter);
    acc.value()
}

/// A fixed-length vector of compensated accumulators.
#[derive(Debug, Clone)]
pub(crate) struct VecSum(Vec<CompensatedSum>);

impl VecSum {
    pub(crate) fn zeros(len: usize) -> Self {
        Self(vec![CompensatedSum::new(); len])
    }

    #[inline]
    pub(crate) fn add_scaled(&mut self, scale: f64, xs: &[f64]) {
        for (acc, &x) in self.0.iter_mut().zip(xs) {
            acc.add(scale * x);
        }
    }

    #[inline]
    pub(crate) fn add_scaled_diff(&mut self, scale: f64, hi: &[f64], lo: &[f64]) {
        for ((acc, &a), &b) in self.0.iter_mut().zip(hi).zip(lo) {
            acc.add(scale * (a - b));
        }
    }

    pub(crate) fn into_vec(self) -> Vec<f64> {
        self.0.iter().map(CompensatedSum::value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(xs), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn many_tenths() {
        let s = sum(std::iter::repeat_n(0.1, 1_000_000));
        assert!((s - 100_000.0).abs() < 1e-9);
    }
}

//! Cross-model attribution similarity: cosine similarity and Spearman rank
//! correlation between per-feature importance vectors.

use crate::error::{Error, Result};
use crate::game::Attribution;

/// Per-feature mean absolute attribution for one output.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector(Vec<f64>);

impl ImportanceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("importance vector must be nonempty".into()));
        }
        if values.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Invalid("importance entries must be finite and nonnegative".into()));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Entry `i` is the mean over runs of `|φ_i[k]|`.
pub fn importance_from_attributions(runs: &[Attribution], k: usize) -> Result<ImportanceVector> {
    let first = runs.first().ok_or(Error::EmptyRuns)?;
    let (n, m) = (first.n(), first.m());
    if runs.iter().any(|a| a.n() != n || a.m() != m) {
        return Err(Error::ShapeMismatch("attribution runs differ in shape".into()));
    }
    if k >= m {
        return Err(Error::OutputIndex { k, m });
    }
    let count = runs.len() as f64;
    ImportanceVector::new(
        (0..n)
            .map(|i| crate::sum::sum(runs.iter().map(|a| a.row(i)[k].abs())) / count)
            .collect(),
    )
}

fn check_lengths(a: &[f64], b: &[f64], min: usize) -> Result<()> {
    if a.len() != b.len() || a.len() < min {
        return Err(Error::ShapeMismatch(format!(
            "vectors of length {} and {} (need equal lengths ≥ {min})",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `⟨a, b⟩ / (‖a‖₂ ‖b‖₂)`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b, 1)?;
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ConstantVector);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of the average-rank vectors.
pub fn spearman_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b, 2)?;
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("correlation input".into()));
    }
    pearson(&average_ranks(a), &average_ranks(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_examples() {
        let v = [0.3, 1.2, 4.0];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine_similarity(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::ZeroVector)));
        assert!(cosine_similarity(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_examples() {
        let v = [0.1, 3.0, 2.0, 7.5];
        assert!((spearman_correlation(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        let r = spearman_correlation(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(matches!(spearman_correlation(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]), Err(Error::ConstantVector)));
        assert!(spearman_correlation(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn importance_examples() {
        let a = Attribution::from_rows(&[[-2.0, 5.0], [1.0, 0.0]]).unwrap();
        assert_eq!(importance_from_attributions(std::slice::from_ref(&a), 0).unwrap().as_slice(), &[2.0, 1.0]);
        let b = Attribution::from_rows(&[[2.0, 0.0], [-1.0, 0.0]]).unwrap();
        let pos = Attribution::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let neg = Attribution::from_rows(&[[-1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(importance_from_attributions(&[pos, neg], 0).unwrap().as_slice(), &[1.0, 0.0]);
        assert_eq!(importance_from_attributions(&[a, b], 1).unwrap().as_slice(), &[2.5, 0.0]);
        let zero = importance_from_attributions(&[Attribution::zeros(3, 1)], 0).unwrap();
        assert!(matches!(cosine_similarity(zero.as_slice(), zero.as_slice()), Err(Error::ZeroVector)));
        assert!(matches!(importance_from_attributions(&[], 0), Err(Error::EmptyRuns)));
        assert!(importance_from_attributions(&[Attribution::zeros(3, 1)], 1).is_err());
    }
}

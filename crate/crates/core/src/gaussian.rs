//! Closed-form SHAP for linear multi-output predictors under Gaussian inputs.
//!
//! For `X ~ N(μ, Σ)` the conditional mean given `X_S = x_S` is
//! `μ + Â_S (x − μ)`, where `Â_S` is `Σ_{:,S} Σ_{S,S}^{-1}` padded with zero
//! columns outside `S`. A linear predictor `f(x) = b0 + Bᵀx` therefore has the
//! centered game `v(S) = Bᵀ Â_S (x − μ)`, and its attribution for player `i` is
//! `Bᵀ M_i (x − μ)` with `M_i = Σ_{S ∌ i} w(|S|) (Â_{S∪{i}} − Â_S)`.

use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{insert_zero_bit, Attribution, VectorGame};
use crate::shapley::ShapleyWeightTable;
use crate::sum::CompensatedSum;

/// Relative pivot tolerance for positive-definiteness checks.
pub const PIVOT_TOLERANCE: f64 = 1e-10;
/// Relative tolerance for the symmetry check of `Σ`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Largest `n` for which `M_i` and the Gaussian game are enumerated.
pub const MAX_GAUSSIAN_PLAYERS: usize = 20;

fn check_gaussian_n(n: usize) -> Result<()> {
    if n > MAX_GAUSSIAN_PLAYERS {
        return Err(Error::PlayerCap { what: "Gaussian coalition enumeration", max: MAX_GAUSSIAN_PLAYERS, n });
    }
    Ok(())
}

/// Cholesky factor of `block`, accepted only if every squared pivot exceeds
/// `PIVOT_TOLERANCE * scale`.
fn spd_factor(block: DMatrix<f64>, scale: f64) -> Option<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(block)?;
    let l = chol.l_dirty();
    let ok = (0..l.nrows()).all(|i| l[(i, i)] * l[(i, i)] > PIVOT_TOLERANCE * scale);
    ok.then_some(chol)
}

/// Mean and positive-definite covariance of the input distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianInput {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    max_diag: f64,
}

impl GaussianInput {
    pub fn new(mu: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let n = mu.len();
        crate::game::check_n(n)?;
        if sigma.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "mean has {n} entries but covariance is {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if mu.iter().chain(sigma.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Gaussian parameters".into()));
        }
        let scale = sigma.amax();
        for i in 0..n {
            for j in i + 1..n {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::NotSymmetric { i, j });
                }
            }
        }
        let max_diag = sigma.diagonal().max();
        if max_diag <= 0.0 || spd_factor(sigma.clone(), max_diag).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { mu: DVector::from_vec(mu), sigma, max_diag })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(mu: Vec<f64>, sigma: &[Vec<f64>]) -> Result<Self> {
        let n = sigma.len();
        if sigma.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("covariance rows must all have length n".into()));
        }
        let flat: Vec<f64> = sigma.iter().flatten().copied().collect();
        Self::new(mu, DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i == j || self.sigma[(i, j)] == 0.0))
    }
}

/// `f(x) = b0 + Bᵀ x` with `B` of shape `n × m`; row `i` of `B` is feature `i`'s
/// coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPredictor {
    b0: DVector<f64>,
    b: DMatrix<f64>,
}

impl LinearPredictor {
    pub fn new(b0: Vec<f64>, b: DMatrix<f64>) -> Result<Self> {
        if b.ncols() != b0.len() {
            return Err(Error::ShapeMismatch(format!(
                "intercept has {} outputs but B has {} columns",
                b0.len(),
                b.ncols()
            )));
        }
        crate::game::check_n(b.nrows())?;
        crate::game::check_m(b.ncols())?;
        if b0.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("linear predictor coefficients".into()));
        }
        Ok(Self { b0: DVector::from_vec(b0), b })
    }

    pub fn from_rows(b0: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let m = b0.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::ShapeMismatch(format!("every row of B must have {m} entries")));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(b0, DMatrix::from_row_slice(rows.len(), m, &flat))
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn intercept(&self) -> &DVector<f64> {
        &self.b0
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        (&self.b0 + self.b.tr_mul(&x)).as_slice().to_vec()
    }
}

fn check_pair(p: &LinearPredictor, g: &GaussianInput, x: &[f64]) -> Result<()> {
    if p.n() != g.n() || x.len() != g.n() {
        return Err(Error::ShapeMismatch(format!(
            "predictor has {} features, distribution {}, instance {}",
            p.n(),
            g.n(),
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("instance".into()));
    }
    Ok(())
}

fn centered(g: &GaussianInput, x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x) - &g.mu
}

/// `Â_S`: the `n × n` conditional expectation matrix of coalition `s`.
pub fn conditional_matrix(g: &GaussianInput, s: u32) -> Result<DMatrix<f64>> {
    let n = g.n();
    if u64::from(s) >= 1u64 << n {
        return Err(Error::MaskOutOfRange { mask: s.into(), n });
    }
    let idx: Vec<usize> = (0..n).filter(|&i| s & (1 << i) != 0).collect();
    let mut out = DMatrix::zeros(n, n);
    if idx.is_empty() {
        return Ok(out);
    }
    let block = g.sigma.select_rows(&idx).select_columns(&idx);
    let chol = spd_factor(block, g.max_diag).ok_or(Error::SingularBlock(s))?;
    // Σ_{S,S} X = Σ_{S,:}, so A_S = Xᵀ
    let x = chol.solve(&g.sigma.select_rows(&idx));
    for (c, &j) in idx.iter().enumerate() {
        out.set_column(j, &x.row(c).transpose());
    }
    Ok(out)
}

/// Lazily computed `Â_S` for every coalition of one distribution.
///
/// Each entry is computed at most once and is safe to read concurrently.
/// Fully populated, the set holds `2^n` matrices of `n²` entries.
#[derive(Debug)]
pub struct ConditionalMatrixSet<'a> {
    input: &'a GaussianInput,
    cells: Vec<OnceLock<DMatrix<f64>>>,
}

impl<'a> ConditionalMatrixSet<'a> {
    pub fn new(input: &'a GaussianInput) -> Result<Self> {
        check_gaussian_n(input.n())?;
        let cells = (0..1usize << input.n()).map(|_| OnceLock::new()).collect();
        Ok(Self { input, cells })
    }

    pub fn n(&self) -> usize {
        self.input.n()
    }

    pub fn get(&self, s: u32) -> Result<&DMatrix<f64>> {
        let cell = self.cells.get(s as usize).ok_or(Error::MaskOutOfRange { mask: s.into(), n: self.n() })?;
        if let Some(a) = cell.get() {
            return Ok(a);
        }
        let a = conditional_matrix(self.input, s)?;
        Ok(cell.get_or_init(|| a))
    }

    /// `M_i(Σ)` by the weighted subset sum over coalitions without `i`.
    pub fn attribution_matrix(&self, i: usize) -> Result<DMatrix<f64>> {
        let n = self.n();
        if i >= n {
            return Err(Error::PlayerIndex { i, n });
        }
        let weights = ShapleyWeightTable::new(n)?;
        let bit = 1u32 << i;
        let mut acc = vec![CompensatedSum::new(); n * n];
        for r in 0..1u32 << (n - 1) {
            let s = insert_zero_bit(r, i);
            let w = weights.weight(s.count_ones() as usize);
            let (hi, lo) = (self.get(s | bit)?, self.get(s)?);
            for ((a, h), l) in acc.iter_mut().zip(hi.iter()).zip(lo.iter()) {
                a.add(w * (h - l));
            }
        }
        Ok(DMatrix::from_iterator(n, n, acc.iter().map(CompensatedSum::value)))
    }

    /// `M_i(Σ)` for every player, sharing this memo.
    pub fn attribution_matrices(&self) -> Result<Vec<DMatrix<f64>>> {
        (0..self.n()).into_par_iter().map(|i| self.attribution_matrix(i)).collect()
    }
}

/// `M_i(Σ)` for a single player.
pub fn attribution_matrix(g: &GaussianInput, i: usize) -> Result<DMatrix<f64>> {
    ConditionalMatrixSet::new(g)?.attribution_matrix(i)
}

/// `φ_i = B_i (x_i − μ_i)`; requires an exactly diagonal covariance.
pub fn shap_linear_independent(p: &LinearPredictor, g: &GaussianInput, x: &[f64]) -> Result<Attribution> {
    check_pair(p, g, x)?;
    if !g.is_diagonal() {
        return Err(Error::UseCorrelatedPath);
    }
    let (n, m) = (p.n(), p.m());
    let mut out = Attribution::zeros(n, m);
    for i in 0..n {
        let d = x[i] - g.mu[i];
        for (o, b) in out.row_mut(i).iter_mut().zip(p.b.row(i).iter()) {
            *o = b * d;
        }
    }
    Ok(out)
}

/// `φ_i = Bᵀ M_i(Σ) (x − μ)` for any positive-definite `Σ`.
pub fn shap_linear_correlated(p: &LinearPredictor, g: &GaussianInput, x: &[f64]) -> Result<Attribution> {
    check_pair(p, g, x)?;
    let matrices = ConditionalMatrixSet::new(g)?.attribution_matrices()?;
    shap_linear_with_matrices(p, &matrices, &centered(g, x))
}

/// Applies precomputed `M_i` matrices to a centered instance.
pub fn shap_linear_with_matrices(
    p: &LinearPredictor,
    matrices: &[DMatrix<f64>],
    centered_x: &DVector<f64>,
) -> Result<Attribution> {
    let (n, m) = (p.n(), p.m());
    if matrices.len() != n || centered_x.len() != n {
        return Err(Error::ShapeMismatch("attribution matrices do not match predictor".into()));
    }
    let mut payoff = Vec::with_capacity(n * m);
    for mi in matrices {
        let phi = p.b.tr_mul(&(mi * centered_x));
        payoff.extend_from_slice(phi.as_slice());
    }
    Attribution::from_flat(n, m, payoff)
}

/// The exact centered game `v(S) = Bᵀ Â_S (x − μ)`.
pub fn gaussian_game(p: &LinearPredictor, g: &GaussianInput, x: &[f64]) -> Result<VectorGame> {
    check_pair(p, g, x)?;
    let set = ConditionalMatrixSet::new(g)?;
    let d = centered(g, x);
    let (n, m) = (p.n(), p.m());
    let values: Vec<Vec<f64>> = (0..1u32 << n)
        .into_par_iter()
        .map(|s| Ok(p.b.tr_mul(&(set.get(s)? * &d)).as_slice().to_vec()))
        .collect::<Result<_>>()?;
    let mut values = values.concat();
    values[..m].fill(0.0);
    VectorGame::from_dense(n, m, values)
}

/// `Bᵀ(x − μ) = f(x) − E f(X)`, the total every attribution must reconstruct.
pub fn output_deviation(p: &LinearPredictor, g: &GaussianInput, x: &[f64]) -> Result<Vec<f64>> {
    check_pair(p, g, x)?;
    Ok(p.b.tr_mul(&centered(g, x)).as_slice().to_vec())
}

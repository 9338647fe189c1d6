//! Characteristic functions built from predictors and background data.
//!
//! For a black-box predictor the centered game is formed with the
//! interventional expectation: coordinates outside the coalition are filled in
//! from each background row, the predictions are averaged, and the background
//! mean prediction is subtracted. Every [`Explanation`] built this way is
//! labelled [`ExpectationMode::Interventional`]; the exact conditional game is
//! only available in closed form for linear predictors under Gaussian inputs
//! (see [`crate::gaussian`]).

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{full_mask, Attribution, VectorGame};
use crate::gaussian::{GaussianInput, LinearPredictor};
use crate::shapley::shapley_subset;
use crate::sum::{CompensatedSum, VecSum};

/// Largest `n` for which the interventional game is enumerated.
pub const MAX_INTERVENTIONAL_PLAYERS: usize = 16;

/// A deterministic model `R^n -> R^m`.
pub trait Predictor: Sync {
    fn n_inputs(&self) -> usize;
    fn n_outputs(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Vec<f64>;

    /// Whether the output can depend on input `i`, when that is known
    /// symbolically.
    fn depends_on(&self, _i: usize) -> Option<bool> {
        None
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn n_inputs(&self) -> usize {
        (**self).n_inputs()
    }
    fn n_outputs(&self) -> usize {
        (**self).n_outputs()
    }
    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (**self).evaluate(x)
    }
    fn depends_on(&self, i: usize) -> Option<bool> {
        (**self).depends_on(i)
    }
}

impl<P: Predictor + ?Sized + Send> Predictor for Box<P> {
    fn n_inputs(&self) -> usize {
        (**self).n_inputs()
    }
    fn n_outputs(&self) -> usize {
        (**self).n_outputs()
    }
    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (**self).evaluate(x)
    }
    fn depends_on(&self, i: usize) -> Option<bool> {
        (**self).depends_on(i)
    }
}

impl Predictor for LinearPredictor {
    fn n_inputs(&self) -> usize {
        self.n()
    }
    fn n_outputs(&self) -> usize {
        self.m()
    }
    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        self.predict(x)
    }
    fn depends_on(&self, i: usize) -> Option<bool> {
        Some(self.coefficients().row(i).iter().any(|&b| b != 0.0))
    }
}

/// A predictor given by a closure.
pub struct FnPredictor<F> {
    n: usize,
    m: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> FnPredictor<F> {
    pub fn new(n: usize, m: usize, f: F) -> Self {
        Self { n, m, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> Predictor for FnPredictor<F> {
    fn n_inputs(&self) -> usize {
        self.n
    }
    fn n_outputs(&self) -> usize {
        self.m
    }
    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

/// `coeff · Π_j x_j^{exponents[j]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// Maximum total degree of a polynomial term.
pub const MAX_POLY_DEGREE: u32 = 3;

/// Each output is a sum of monomials of total degree at most 3.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPredictor {
    n: usize,
    outputs: Vec<Vec<Term>>,
}

impl PolynomialPredictor {
    pub fn new(n: usize, outputs: Vec<Vec<Term>>) -> Result<Self> {
        crate::game::check_n(n)?;
        crate::game::check_m(outputs.len())?;
        for term in outputs.iter().flatten() {
            if term.exponents.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "polynomial term has {} exponents, expected {n}",
                    term.exponents.len()
                )));
            }
            if term.exponents.iter().sum::<u32>() > MAX_POLY_DEGREE {
                return Err(Error::Invalid(format!("polynomial term degree exceeds {MAX_POLY_DEGREE}")));
            }
            if !term.coeff.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient".into()));
            }
        }
        Ok(Self { n, outputs })
    }

    /// Infers `n` from the first term's exponent list.
    pub fn from_terms(outputs: Vec<Vec<Term>>) -> Result<Self> {
        let n = outputs
            .iter()
            .flatten()
            .map(|t| t.exponents.len())
            .next()
            .ok_or_else(|| Error::Invalid("polynomial has no terms; cannot infer n".into()))?;
        Self::new(n, outputs)
    }

    pub fn outputs(&self) -> &[Vec<Term>] {
        &self.outputs
    }
}

impl Predictor for PolynomialPredictor {
    fn n_inputs(&self) -> usize {
        self.n
    }
    fn n_outputs(&self) -> usize {
        self.outputs.len()
    }
    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        self.outputs
            .iter()
            .map(|terms| {
                crate::sum::sum(terms.iter().map(|t| {
                    t.exponents.iter().zip(x).fold(t.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
                }))
            })
            .collect()
    }
    fn depends_on(&self, i: usize) -> Option<bool> {
        Some(self.outputs.iter().flatten().any(|t| t.coeff != 0.0 && t.exponents[i] > 0))
    }
}

/// `N × n` background observations standing in for the input distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSample {
    n: usize,
    rows: Vec<f64>,
    columns: Vec<String>,
}

impl BackgroundSample {
    pub fn new(n: usize, rows: Vec<f64>, columns: Option<Vec<String>>) -> Result<Self> {
        if n == 0 || !rows.len().is_multiple_of(n) {
            return Err(Error::ShapeMismatch(format!("{} values do not form rows of width {n}", rows.len())));
        }
        if rows.is_empty() {
            return Err(Error::EmptyBackground);
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("background sample".into()));
        }
        let columns = match columns {
            Some(c) if c.len() != n => {
                return Err(Error::ShapeMismatch(format!("{} column names for {n} columns", c.len())))
            }
            Some(c) => c,
            None => (0..n).map(|i| format!("x{i}")).collect(),
        };
        Ok(Self { n, rows, columns })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyBackground)?;
        if rows.iter().any(|r| r.as_ref().len() != n) {
            return Err(Error::ShapeMismatch("ragged background rows".into()));
        }
        Self::new(n, rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect(), None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r * self.n..(r + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.n)
    }

    /// Compensated column means.
    pub fn column_means(&self) -> Vec<f64> {
        let count = self.len() as f64;
        (0..self.n).map(|j| crate::sum::sum(self.rows().map(|r| r[j])) / count).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationMode {
    Interventional,
    Conditional,
}

impl fmt::Display for ExpectationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExpectationMode::Interventional => "interventional",
            ExpectationMode::Conditional => "conditional",
        })
    }
}

fn check_inputs<P: Predictor + ?Sized>(f: &P, bg: &BackgroundSample, x: &[f64]) -> Result<()> {
    let n = f.n_inputs();
    if bg.n() != n || x.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "predictor has {n} inputs, background {} columns, instance {} values",
            bg.n(),
            x.len()
        )));
    }
    crate::game::check_n(n)?;
    crate::game::check_m(f.n_outputs())?;
    if n > MAX_INTERVENTIONAL_PLAYERS {
        return Err(Error::PlayerCap { what: "interventional game", max: MAX_INTERVENTIONAL_PLAYERS, n });
    }
    if bg.is_empty() {
        return Err(Error::EmptyBackground);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("instance".into()));
    }
    Ok(())
}

/// The point equal to `x` on `mask` and to `row` elsewhere.
fn hybrid(x: &[f64], row: &[f64], mask: u32, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        *o = if mask & (1 << j) != 0 { x[j] } else { row[j] };
    }
}

fn checked_eval<P: Predictor + ?Sized>(f: &P, z: &[f64]) -> Result<Vec<f64>> {
    let y = f.evaluate(z);
    if y.len() != f.n_outputs() {
        return Err(Error::ShapeMismatch(format!("predictor returned {} outputs, declared {}", y.len(), f.n_outputs())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("predictor output".into()));
    }
    Ok(y)
}

/// Mean prediction over hybrid points of one coalition.
fn hybrid_mean<P: Predictor + ?Sized>(f: &P, bg: &BackgroundSample, x: &[f64], mask: u32) -> Result<Vec<f64>> {
    let mut acc = VecSum::zeros(f.n_outputs());
    let mut z = vec![0.0; bg.n()];
    for row in bg.rows() {
        hybrid(x, row, mask, &mut z);
        acc.add_scaled(1.0, &checked_eval(f, &z)?);
    }
    let count = bg.len() as f64;
    Ok(acc.into_vec().into_iter().map(|s| s / count).collect())
}

/// Interventional game together with `f(x)` and the background mean prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredGame {
    pub game: VectorGame,
    pub prediction: Vec<f64>,
    pub baseline: Vec<f64>,
}

/// `v(S) = mean_r f(x_S, bg_r) − mean_r f(bg_r)`, with `v(∅) = 0` and
/// `v([n]) = f(x) − mean_r f(bg_r)` set exactly.
pub fn centered_game<P: Predictor + ?Sized>(f: &P, bg: &BackgroundSample, x: &[f64]) -> Result<CenteredGame> {
    check_inputs(f, bg, x)?;
    let (n, m) = (f.n_inputs(), f.n_outputs());
    let full = full_mask(n);
    let means: Vec<Vec<f64>> = (0..=full)
        .into_par_iter()
        .map(|mask| if mask == full { checked_eval(f, x) } else { hybrid_mean(f, bg, x, mask) })
        .collect::<Result<_>>()?;
    let baseline = means[0].clone();
    let prediction = means[full as usize].clone();
    let values: Vec<f64> = means
        .iter()
        .enumerate()
        .flat_map(|(mask, mean)| {
            let base = &baseline;
            mean.iter().zip(base).map(move |(a, b)| if mask == 0 { 0.0 } else { a - b })
        })
        .collect();
    debug_assert_eq!(values.len(), (1 << n) * m);
    Ok(CenteredGame { game: VectorGame::from_dense(n, m, values)?, prediction, baseline })
}

/// The interventional centered game of `f` at `x`.
pub fn interventional_game<P: Predictor + ?Sized>(f: &P, bg: &BackgroundSample, x: &[f64]) -> Result<VectorGame> {
    Ok(centered_game(f, bg, x)?.game)
}

/// An attribution with the quantities it must reconstruct.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub attribution: Attribution,
    /// `f(x)`.
    pub prediction: Vec<f64>,
    /// Expected prediction the attribution is measured against.
    pub baseline: Vec<f64>,
    pub mode: ExpectationMode,
}

impl Explanation {
    /// `‖Σ_i φ_i − (f(x) − baseline)‖_∞`.
    pub fn efficiency_residual(&self) -> f64 {
        self.attribution
            .total()
            .iter()
            .zip(self.prediction.iter().zip(&self.baseline))
            .fold(0.0, |acc, (t, (p, b))| acc.max((t - (p - b)).abs()))
    }
}

/// Exact Shapley attribution of the interventional game.
pub fn explain<P: Predictor + ?Sized>(f: &P, bg: &BackgroundSample, x: &[f64]) -> Result<Explanation> {
    let CenteredGame { game, prediction, baseline } = centered_game(f, bg, x)?;
    Ok(Explanation {
        attribution: shapley_subset(&game),
        prediction,
        baseline,
        mode: ExpectationMode::Interventional,
    })
}

/// Attribution difference between two predictors and the bounds controlling it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorStability {
    /// `‖Φ(f; x) − Φ(h; x)‖_{A,∞}`
    pub lhs: f64,
    /// `2 · max ‖f(z) − h(z)‖_∞` over every evaluated point `z`.
    pub bound: f64,
    /// `‖v_f − v_h‖_{Δ,∞}`
    pub marginal_bound: f64,
}

impl PredictorStability {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.bound + tol && self.lhs <= self.marginal_bound + tol
    }
}

/// Compares the explanations of `f` and `h` on the same background and
/// instance. The sup-norm of `f − h` is taken over the background rows, the
/// instance and every hybrid point the games evaluate.
pub fn predictor_stability<P, Q>(f: &P, h: &Q, bg: &BackgroundSample, x: &[f64]) -> Result<PredictorStability>
where
    P: Predictor + ?Sized,
    Q: Predictor + ?Sized,
{
    if f.n_inputs() != h.n_inputs() || f.n_outputs() != h.n_outputs() {
        return Err(Error::ShapeMismatch("predictors differ in shape".into()));
    }
    let gf = centered_game(f, bg, x)?;
    let gh = centered_game(h, bg, x)?;
    let lhs = shapley_subset(&gf.game).sub(&shapley_subset(&gh.game))?.norm();
    let marginal_bound = gf.game.sub(&gh.game)?.marginal_seminorm();

    let n = f.n_inputs();
    let sup = (0..=full_mask(n))
        .into_par_iter()
        .map(|mask| {
            let mut z = vec![0.0; n];
            let mut best = 0.0f64;
            for row in bg.rows() {
                hybrid(x, row, mask, &mut z);
                let (a, b) = (checked_eval(f, &z)?, checked_eval(h, &z)?);
                best = a.iter().zip(&b).fold(best, |acc, (p, q)| acc.max((p - q).abs()));
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(PredictorStability { lhs, bound: 2.0 * sup, marginal_bound })
}

/// Sample moments of a background sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoments {
    pub input: GaussianInput,
    /// Whether `ε·I` had to be added to make the covariance positive definite.
    pub ridged: bool,
    pub ridge: f64,
}

/// Relative ridge `ε = RIDGE_SCALE · trace(Σ)/n` used when `Σ` is not positive definite.
pub const RIDGE_SCALE: f64 = 1e-8;

/// Sample mean and covariance (denominator `N − 1`).
pub fn empirical_moments(bg: &BackgroundSample) -> Result<EmpiricalMoments> {
    let count = bg.len();
    if count < 2 {
        return Err(Error::TooFewRows { need: 2, got: count });
    }
    let n = bg.n();
    let mu = bg.column_means();
    let mut sigma = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = CompensatedSum::new();
            for row in bg.rows() {
                acc.add((row[i] - mu[i]) * (row[j] - mu[j]));
            }
            let c = acc.value() / (count - 1) as f64;
            sigma[(i, j)] = c;
            sigma[(j, i)] = c;
        }
    }
    match GaussianInput::new(mu.clone(), sigma.clone()) {
        Ok(input) => Ok(EmpiricalMoments { input, ridged: false, ridge: 0.0 }),
        Err(Error::NotPositiveDefinite) => {
            let ridge = RIDGE_SCALE * sigma.trace() / n as f64;
            let input = GaussianInput::new(mu, sigma + DMatrix::identity(n, n) * ridge)?;
            Ok(EmpiricalMoments { input, ridged: true, ridge })
        }
        Err(e) => Err(e),
    }
}

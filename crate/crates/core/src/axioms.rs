//! Executable checks of the Shapley axioms, the no-leakage property and the
//! Lipschitz-type stability bounds.
//!
//! Each check returns a [`Residual`]: the worst violation found together with
//! the indices that attain it. Symmetry and dummy hypotheses are tested with
//! exact equality of game values; a pair or player that only nearly satisfies
//! them is not considered.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{full_mask, insert_zero_bit, Attribution, VectorGame};
use crate::random::{random_game, structured_game, trial_rng};
use crate::shapley::shapley_subset;

/// Indices locating a residual: players `i`, `j`, coalition mask and output `k`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coalition: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub witness: Witness,
}

impl Residual {
    fn zero() -> Self {
        Self { value: 0.0, witness: Witness::default() }
    }

    fn raise(&mut self, value: f64, witness: Witness) {
        if value > self.value {
            *self = Self { value, witness };
        }
    }
}

fn check_shapes(v: &VectorGame, a: &Attribution) -> Result<()> {
    if v.n() != a.n() || v.m() != a.m() {
        return Err(Error::ShapeMismatch(format!(
            "game (n={}, m={}) vs attribution {}x{}",
            v.n(),
            v.m(),
            a.n(),
            a.m()
        )));
    }
    Ok(())
}

/// `‖Σ_i a_i − v([n])‖_∞`.
pub fn check_efficiency(v: &VectorGame, a: &Attribution) -> Result<Residual> {
    check_shapes(v, a)?;
    let mut res = Residual::zero();
    let coalition = full_mask(v.n());
    for (k, (t, g)) in a.total().iter().zip(v.grand()).enumerate() {
        res.raise((t - g).abs(), Witness { coalition: Some(coalition), k: Some(k), ..Default::default() });
    }
    Ok(res)
}

/// Players `i < j` with `v(S ∪ {i}) = v(S ∪ {j})` for every `S ⊆ [n]∖{i, j}`.
pub fn symmetric_pairs(v: &VectorGame) -> Vec<(usize, usize)> {
    let n = v.n();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (bi, bj) = (1u32 << i, 1u32 << j);
            let symmetric = (0..1u32 << n)
                .filter(|s| s & (bi | bj) == 0)
                .all(|s| v.value(s | bi) == v.value(s | bj));
            if symmetric {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Players whose addition never changes any coalition's value.
pub fn dummy_players(v: &VectorGame) -> Vec<usize> {
    let n = v.n();
    (0..n)
        .filter(|&i| {
            let bit = 1u32 << i;
            (0..1u32 << (n - 1)).all(|r| {
                let s = insert_zero_bit(r, i);
                v.value(s | bit) == v.value(s)
            })
        })
        .collect()
}

/// Max `‖a_i − a_j‖_∞` over symmetric pairs; zero if there are none.
pub fn check_symmetry(v: &VectorGame, a: &Attribution) -> Result<Residual> {
    check_shapes(v, a)?;
    let mut res = Residual::zero();
    for (i, j) in symmetric_pairs(v) {
        for (k, (x, y)) in a.row(i).iter().zip(a.row(j)).enumerate() {
            res.raise((x - y).abs(), Witness { i: Some(i), j: Some(j), k: Some(k), ..Default::default() });
        }
    }
    Ok(res)
}

/// Max `‖a_i‖_∞` over dummy players; zero if there are none.
pub fn check_dummy(v: &VectorGame, a: &Attribution) -> Result<Residual> {
    check_shapes(v, a)?;
    let mut res = Residual::zero();
    for i in dummy_players(v) {
        for (k, x) in a.row(i).iter().enumerate() {
            res.raise(x.abs(), Witness { i: Some(i), k: Some(k), ..Default::default() });
        }
    }
    Ok(res)
}

/// Max `|π_ℓ(Φ_i(ι_k g))|` over players and coordinates `ℓ ≠ k`.
pub fn leakage(g: &VectorGame, k: usize, m: usize) -> Result<Residual> {
    let attribution = shapley_subset(&VectorGame::embed(g, k, m)?);
    let mut res = Residual::zero();
    for (i, row) in attribution.rows().enumerate() {
        for (l, x) in row.iter().enumerate().filter(|&(l, _)| l != k) {
            res.raise(x.abs(), Witness { i: Some(i), k: Some(l), ..Default::default() });
        }
    }
    Ok(res)
}

/// Embeds `trials` random scalar games into coordinate `k` and reports the
/// largest cross-coordinate leakage of their attributions.
pub fn check_rigidity(n: usize, m: usize, k: usize, trials: usize, seed: u64) -> Result<Residual> {
    crate::game::check_n(n)?;
    crate::game::check_m(m)?;
    if k >= m {
        return Err(Error::OutputIndex { k, m });
    }
    let mut res = Residual::zero();
    for t in 0..trials {
        let g = random_game(&mut trial_rng(seed, t as u64), n, 1)?;
        let r = leakage(&g, k, m)?;
        res.raise(r.value, r.witness);
    }
    Ok(res)
}

/// Both sides of the stability estimates for a pair of games.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCheck {
    /// `‖Φ(u) − Φ(v)‖_{A,∞}`
    pub lhs: f64,
    /// `‖u − v‖_{Δ,∞}`
    pub bound_delta: f64,
    /// `2‖u − v‖_{G,∞}`
    pub bound_sup: f64,
    pub witness: Witness,
}

impl StabilityCheck {
    /// Worst violation of `lhs ≤ bound_delta ≤ bound_sup`, floored at zero.
    pub fn violation(&self) -> f64 {
        (self.lhs - self.bound_delta)
            .max(self.lhs - self.bound_sup)
            .max(self.bound_delta - self.bound_sup)
            .max(0.0)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.bound_delta + tol && self.lhs <= self.bound_sup + tol
    }
}

pub fn check_stability(u: &VectorGame, v: &VectorGame) -> Result<StabilityCheck> {
    let diff = u.sub(v)?;
    let delta = shapley_subset(u).sub(&shapley_subset(v))?;
    let (lhs, i, k) = delta.argmax_abs();
    Ok(StabilityCheck {
        lhs,
        bound_delta: diff.marginal_seminorm(),
        bound_sup: 2.0 * diff.sup_norm(),
        witness: Witness { i: Some(i), k: Some(k), ..Default::default() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Efficiency,
    Symmetry,
    Dummy,
    Additivity,
    NoLeakage,
    Stability,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::Efficiency,
        Axiom::Symmetry,
        Axiom::Dummy,
        Axiom::Additivity,
        Axiom::NoLeakage,
        Axiom::Stability,
    ];
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axiom::Efficiency => "efficiency",
            Axiom::Symmetry => "symmetry",
            Axiom::Dummy => "dummy",
            Axiom::Additivity => "additivity",
            Axiom::NoLeakage => "no_leakage",
            Axiom::Stability => "stability",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Efficiency, symmetry, dummy, additivity and stability residuals.
    pub attribution: f64,
    /// Cross-coordinate leakage.
    pub leakage: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { attribution: 1e-10, leakage: 1e-12 }
    }
}

impl Tolerances {
    pub fn for_axiom(&self, axiom: Axiom) -> f64 {
        match axiom {
            Axiom::NoLeakage => self.leakage,
            _ => self.attribution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

/// Where a trial's game came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameSource {
    /// i.i.d. uniform coalition values.
    Random,
    /// Unanimity combination with a planted dummy and symmetric pair.
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomRecord {
    pub axiom: Axiom,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Witness,
}

impl AxiomRecord {
    fn new(axiom: Axiom, residual: Residual, tolerances: &Tolerances) -> Self {
        let tolerance = tolerances.for_axiom(axiom);
        Self { axiom, residual: residual.value, tolerance, pass: residual.value <= tolerance, witness: residual.witness }
    }
}

/// All axiom records for one trial of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub source: GameSource,
    pub records: Vec<AxiomRecord>,
}

/// One line of the JSONL report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub axiom: Axiom,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Witness,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn record(&self, axiom: Axiom) -> Option<&AxiomRecord> {
        self.records.iter().find(|r| r.axiom == axiom)
    }

    pub fn lines(&self) -> impl Iterator<Item = ReportLine> + '_ {
        self.records.iter().map(|r| ReportLine {
            trial: self.trial,
            n: self.n,
            m: self.m,
            axiom: r.axiom,
            residual: r.residual,
            tolerance: r.tolerance,
            pass: r.pass,
            witness: r.witness,
        })
    }
}

/// Every fifth trial (index ≡ 4 mod 5) uses a structured game.
pub const STRUCTURED_EVERY: usize = 5;

/// Runs every check on one trial. The trial's randomness comes from stream
/// `trial` of `seed`, so trials can be evaluated in any order.
pub fn run_trial(config: &CampaignConfig, trial: usize) -> Result<AxiomReport> {
    let (n, m) = (config.n, config.m);
    let tol = &config.tolerances;
    let mut rng = trial_rng(config.seed, trial as u64);
    let (source, v) = if trial % STRUCTURED_EVERY == STRUCTURED_EVERY - 1 {
        (GameSource::Structured, structured_game(&mut rng, n, m)?.game)
    } else {
        (GameSource::Random, random_game(&mut rng, n, m)?)
    };
    let w = random_game(&mut rng, n, m)?;
    let alpha = rng.random_range(-2.0..=2.0);
    let beta = rng.random_range(-2.0..=2.0);

    let a = shapley_subset(&v);
    let b = shapley_subset(&w);
    let mut records = vec![
        AxiomRecord::new(Axiom::Efficiency, check_efficiency(&v, &a)?, tol),
        AxiomRecord::new(Axiom::Symmetry, check_symmetry(&v, &a)?, tol),
        AxiomRecord::new(Axiom::Dummy, check_dummy(&v, &a)?, tol),
    ];

    let mixed = shapley_subset(&VectorGame::combine(alpha, &v, beta, &w)?);
    let mut additivity = Residual::zero();
    for i in 0..n {
        for k in 0..m {
            let want = alpha * a.row(i)[k] + beta * b.row(i)[k];
            additivity.raise((mixed.row(i)[k] - want).abs(), Witness { i: Some(i), k: Some(k), ..Default::default() });
        }
    }
    records.push(AxiomRecord::new(Axiom::Additivity, additivity, tol));

    let mut leak = Residual::zero();
    for k in 0..m {
        let r = leakage(&v.project(k)?, k, m)?;
        leak.raise(r.value, r.witness);
    }
    records.push(AxiomRecord::new(Axiom::NoLeakage, leak, tol));

    let stab = check_stability(&v, &w)?;
    records.push(AxiomRecord::new(Axiom::Stability, Residual { value: stab.violation(), witness: stab.witness }, tol));

    Ok(AxiomReport { trial, n, m, seed: config.seed, source, records })
}

/// Runs `config.trials` independent trials; failures are recorded, not raised.
pub fn run_axiom_campaign(config: &CampaignConfig) -> Result<Vec<AxiomReport>> {
    crate::game::check_n(config.n)?;
    crate::game::check_m(config.m)?;
    (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CampaignSummary {
    pub trials: usize,
    pub records: usize,
    pub failures: usize,
}

pub fn summarize(reports: &[AxiomReport]) -> CampaignSummary {
    CampaignSummary {
        trials: reports.len(),
        records: reports.iter().map(|r| r.records.len()).sum(),
        failures: reports.iter().flat_map(|r| &r.records).filter(|r| !r.pass).count(),
    }
}

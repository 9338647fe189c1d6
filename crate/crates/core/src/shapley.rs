//! The vector-valued Shapley operator.
//!
//! [`shapley_subset`] is the production path: for each player it sums the
//! weighted marginal contributions over all coalitions that exclude the
//! player, in ascending mask order, with compensated accumulation.
//! [`shapley_permutation`] averages over all `n!` orderings and is kept as an
//! independent oracle. [`shapley_via_unanimity`] goes through the Harsanyi
//! dividends of a scalar game.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{insert_zero_bit, Attribution, VectorGame};
use crate::sum::VecSum;

/// Largest `n` accepted by the `n!` permutation oracle.
pub const PERMUTATION_MAX_PLAYERS: usize = 10;
/// Largest `n` accepted by the dividend path.
pub const UNANIMITY_MAX_PLAYERS: usize = 20;

/// Shapley weights `w[s] = s!(n−s−1)!/n!` for coalition sizes `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyWeightTable {
    n: usize,
    w: Vec<f64>,
}

impl ShapleyWeightTable {
    pub fn new(n: usize) -> Result<Self> {
        crate::game::check_n(n)?;
        let mut w = Vec::with_capacity(n);
        let mut cur = 1.0 / n as f64;
        w.push(cur);
        for s in 0..n - 1 {
            cur *= (s + 1) as f64 / (n - s - 1) as f64;
            w.push(cur);
        }
        Ok(Self { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight of any coalition of size `s` not containing the player.
    #[inline]
    pub fn weight(&self, s: usize) -> f64 {
        self.w[s]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// `s!(n−s−1)!/n!` without forming factorials.
pub fn coalition_weight(s: usize, n: usize) -> Result<f64> {
    if n == 0 || s >= n {
        return Err(Error::CoalitionSize { s, n });
    }
    let mut w = 1.0 / n as f64;
    for t in 0..s {
        w *= (t + 1) as f64 / (n - t - 1) as f64;
    }
    Ok(w)
}

/// `φ_i(v) = Σ_{S ⊆ [n]∖{i}} w(|S|) [v(S ∪ {i}) − v(S)]` for every player.
pub fn shapley_subset(v: &VectorGame) -> Attribution {
    let (n, m) = (v.n(), v.m());
    let weights = ShapleyWeightTable::new(n).expect("game invariants bound n");
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let bit = 1u32 << i;
            let mut acc = VecSum::zeros(m);
            for r in 0..1u32 << (n - 1) {
                let s = insert_zero_bit(r, i);
                acc.add_scaled_diff(weights.weight(s.count_ones() as usize), v.value(s | bit), v.value(s));
            }
            acc.into_vec()
        })
        .collect();
    Attribution::from_flat(n, m, rows.concat()).expect("finite game gives finite attribution")
}

/// Average marginal contribution over all `n!` player orderings.
pub fn shapley_permutation(v: &VectorGame) -> Result<Attribution> {
    let (n, m) = (v.n(), v.m());
    if n > PERMUTATION_MAX_PLAYERS {
        return Err(Error::PermutationCap(n));
    }
    let mut acc: Vec<VecSum> = (0..n).map(|_| VecSum::zeros(m)).collect();
    let mut count = 0u64;
    for order in (0..n).permutations(n) {
        let mut prefix = 0u32;
        for &i in &order {
            let with = prefix | (1 << i);
            acc[i].add_scaled_diff(1.0, v.value(with), v.value(prefix));
            prefix = with;
        }
        count += 1;
    }
    let scale = 1.0 / count as f64;
    let payoff = acc
        .into_iter()
        .flat_map(|a| a.into_vec().into_iter().map(move |x| x * scale))
        .collect();
    Attribution::from_flat(n, m, payoff)
}

/// Harsanyi dividends `d_T = Σ_{R⊆T} (−1)^{|T|−|R|} v(R)` of a scalar game,
/// indexed by mask.
pub fn harsanyi_dividends(v: &VectorGame) -> Result<Vec<f64>> {
    if v.m() != 1 {
        return Err(Error::NotScalar(v.m()));
    }
    let n = v.n();
    if n > UNANIMITY_MAX_PLAYERS {
        return Err(Error::PlayerCap { what: "dividend path", max: UNANIMITY_MAX_PLAYERS, n });
    }
    let mut d = v.values().to_vec();
    for i in 0..n {
        let bit = 1usize << i;
        for mask in 0..d.len() {
            if mask & bit != 0 {
                d[mask] -= d[mask ^ bit];
            }
        }
    }
    Ok(d)
}

/// Shapley value of a scalar game as `φ_i = Σ_{T ∋ i} d_T / |T|`.
pub fn shapley_via_unanimity(v: &VectorGame) -> Result<Attribution> {
    let d = harsanyi_dividends(v)?;
    let n = v.n();
    let mut acc = VecSum::zeros(n);
    let mut share = vec![0.0; n];
    for (mask, &dt) in d.iter().enumerate().skip(1) {
        if dt == 0.0 {
            continue;
        }
        let size = (mask as u32).count_ones() as f64;
        for (i, s) in share.iter_mut().enumerate() {
            *s = if mask & (1 << i) != 0 { dt / size } else { 0.0 };
        }
        acc.add_scaled(1.0, &share);
    }
    Attribution::from_flat(n, 1, acc.into_vec())
}

/// Which formula evaluates the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Subset,
    Permutation,
}

impl Engine {
    pub fn run(self, v: &VectorGame) -> Result<Attribution> {
        match self {
            Engine::Subset => Ok(shapley_subset(v)),
            Engine::Permutation => shapley_permutation(v),
        }
    }
}

//! Coalitions, vector-valued cooperative games and attributions.
//!
//! A [`VectorGame`] on `n` players with `m` outputs is stored densely: one
//! payoff vector per coalition mask, `2^n * m` values in total. Coalition
//! `S` is the bit set `mask` with bit `i` set iff player `i` belongs to `S`.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Hard cap on players; exact enumeration touches all `2^n` coalitions.
pub const MAX_PLAYERS: usize = 24;
/// Cap on the output dimension of a game.
pub const MAX_OUTPUTS: usize = 16;

pub(crate) fn check_n(n: usize) -> Result<()> {
    if (1..=MAX_PLAYERS).contains(&n) {
        Ok(())
    } else {
        Err(Error::PlayerCount(n))
    }
}

pub(crate) fn check_m(m: usize) -> Result<()> {
    if (1..=MAX_OUTPUTS).contains(&m) {
        Ok(())
    } else {
        Err(Error::OutputDim(m))
    }
}

fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(Error::NonFinite(format!("{what} contains {x}"))),
        None => Ok(()),
    }
}

/// A subset of the players `0..n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    mask: u32,
    n: u8,
}

impl Coalition {
    pub fn new(mask: u32, n: usize) -> Result<Self> {
        check_n(n)?;
        if u64::from(mask) >= 1u64 << n {
            return Err(Error::MaskOutOfRange { mask: mask.into(), n });
        }
        Ok(Self { mask, n: n as u8 })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn full(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self { mask: full_mask(n), n: n as u8 })
    }

    /// Builds the coalition containing exactly `players`.
    pub fn from_players(n: usize, players: &[usize]) -> Result<Self> {
        check_n(n)?;
        let mut mask = 0u32;
        for &i in players {
            if i >= n {
                return Err(Error::PlayerIndex { i, n });
            }
            mask |= 1 << i;
        }
        Ok(Self { mask, n: n as u8 })
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < self.n() && self.mask & (1 << i) != 0
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn players(self) -> impl Iterator<Item = usize> {
        let mask = self.mask;
        (0..self.n()).filter(move |&i| mask & (1 << i) != 0)
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.players()).finish()
    }
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u32 {
    ((1u64 << n) - 1) as u32
}

/// Expands `r` (a mask over `n - 1` players) into a mask over `n` players with
/// a zero at bit `i`. Ascending `r` gives ascending masks.
#[inline]
pub(crate) fn insert_zero_bit(r: u32, i: usize) -> u32 {
    let low = r & ((1u32 << i) - 1);
    ((r >> i) << (i + 1)) | low
}

/// A characteristic function `v : 2^[n] -> R^m` with `v(∅) = 0`.
#[derive(Clone, PartialEq)]
pub struct VectorGame {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl fmt::Debug for VectorGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for mask in 0..self.num_coalitions() as u32 {
            map.entry(&format_args!("{mask:#b}"), &self.value(mask));
        }
        map.finish()
    }
}

impl VectorGame {
    /// The zero game.
    pub fn zero(n: usize, m: usize) -> Result<Self> {
        check_n(n)?;
        check_m(m)?;
        Ok(Self { n, m, values: vec![0.0; (1usize << n) * m] })
    }

    /// Sparse constructor: coalitions not listed get the zero vector.
    pub fn from_entries<V: AsRef<[f64]>>(n: usize, m: usize, entries: &[(u32, V)]) -> Result<Self> {
        let mut game = Self::zero(n, m)?;
        let mut seen = std::collections::HashSet::new();
        for (mask, value) in entries {
            let value = value.as_ref();
            if u64::from(*mask) >= 1u64 << n {
                return Err(Error::MaskOutOfRange { mask: (*mask).into(), n });
            }
            if !seen.insert(*mask) {
                return Err(Error::DuplicateMask(*mask));
            }
            if value.len() != m {
                return Err(Error::ShapeMismatch(format!(
                    "coalition {mask:#b} has {} components, expected {m}",
                    value.len()
                )));
            }
            check_finite("game value", value)?;
            if *mask == 0 {
                if value.iter().any(|&x| x != 0.0) {
                    return Err(Error::EmptyCoalitionValue);
                }
                continue;
            }
            game.value_mut(*mask).copy_from_slice(value);
        }
        Ok(game)
    }

    /// Fills every coalition from `f(mask, out)`. `v(∅)` is forced to zero.
    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(u32, &mut [f64])) -> Result<Self> {
        let mut game = Self::zero(n, m)?;
        for (mask, chunk) in game.values.chunks_exact_mut(m).enumerate().skip(1) {
            f(mask as u32, chunk);
        }
        check_finite("game value", &game.values)?;
        Ok(game)
    }

    /// Builds a game from a dense table of `2^n * m` values.
    pub fn from_dense(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        check_m(m)?;
        if values.len() != (1usize << n) * m {
            return Err(Error::ShapeMismatch(format!(
                "dense table has {} values, expected {}",
                values.len(),
                (1usize << n) * m
            )));
        }
        check_finite("game value", &values)?;
        if values[..m].iter().any(|&x| x != 0.0) {
            return Err(Error::EmptyCoalitionValue);
        }
        Ok(Self { n, m, values })
    }

    /// The unanimity game `ι_k u_T`: `e_k` on every coalition containing `T`.
    pub fn unanimity(n: usize, t: Coalition, k: usize, m: usize) -> Result<Self> {
        check_n(n)?;
        check_m(m)?;
        if t.n() != n {
            return Err(Error::ShapeMismatch(format!("coalition over {} players, game over {n}", t.n())));
        }
        if t.is_empty() {
            return Err(Error::EmptyUnanimity);
        }
        if k >= m {
            return Err(Error::OutputIndex { k, m });
        }
        let t = t.mask();
        Self::from_fn(n, m, |mask, out| {
            if mask & t == t {
                out[k] = 1.0;
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_coalitions(&self) -> usize {
        1 << self.n
    }

    /// Payoff vector of the coalition with the given mask.
    #[inline]
    pub fn value(&self, mask: u32) -> &[f64] {
        let start = mask as usize * self.m;
        &self.values[start..start + self.m]
    }

    #[inline]
    fn value_mut(&mut self, mask: u32) -> &mut [f64] {
        let start = mask as usize * self.m;
        &mut self.values[start..start + self.m]
    }

    pub fn at(&self, s: Coalition) -> &[f64] {
        self.value(s.mask())
    }

    /// The grand-coalition payoff `v([n])`.
    pub fn grand(&self) -> &[f64] {
        self.value(full_mask(self.n))
    }

    /// The dense table in ascending mask order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::ShapeMismatch(format!(
                "games of shape (n={}, m={}) and (n={}, m={})",
                self.n, self.m, other.n, other.m
            )));
        }
        Ok(())
    }

    /// `a·u + b·v`, coalition by coalition.
    pub fn combine(a: f64, u: &Self, b: f64, v: &Self) -> Result<Self> {
        u.check_same_shape(v)?;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite("combination coefficient".into()));
        }
        let values: Vec<f64> = u.values.iter().zip(&v.values).map(|(x, y)| a * x + b * y).collect();
        check_finite("combined game", &values)?;
        Ok(Self { n: u.n, m: u.m, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::combine(1.0, self, -1.0, other)
    }

    /// The scalar game `π_k ∘ v`.
    pub fn project(&self, k: usize) -> Result<Self> {
        if k >= self.m {
            return Err(Error::OutputIndex { k, m: self.m });
        }
        let values = self.values.chunks_exact(self.m).map(|c| c[k]).collect();
        Ok(Self { n: self.n, m: 1, values })
    }

    /// The game `ι_k g` with `g(S)` placed in coordinate `k` of `R^m`.
    pub fn embed(g: &Self, k: usize, m: usize) -> Result<Self> {
        if g.m != 1 {
            return Err(Error::NotScalar(g.m));
        }
        check_m(m)?;
        if k >= m {
            return Err(Error::OutputIndex { k, m });
        }
        let mut values = vec![0.0; g.values.len() * m];
        for (chunk, &x) in values.chunks_exact_mut(m).zip(&g.values) {
            chunk[k] = x;
        }
        Ok(Self { n: g.n, m, values })
    }

    /// Renames players: player `p` of `self` becomes player `perm[p]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Invalid(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        let mut out = Self::zero(n, self.m)?;
        for mask in 0..self.num_coalitions() as u32 {
            let mut image = 0u32;
            for (p, &q) in perm.iter().enumerate() {
                if mask & (1 << p) != 0 {
                    image |= 1 << q;
                }
            }
            out.value_mut(image).copy_from_slice(self.value(mask));
        }
        Ok(out)
    }

    /// `‖v‖_{G,∞}`: the largest absolute component over all coalitions.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// `‖v‖_{Δ,∞}`: the largest absolute component of any marginal
    /// contribution `v(S ∪ {i}) − v(S)`, by full enumeration.
    pub fn marginal_seminorm(&self) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|i| self.max_marginal(i).0)
            .reduce(|| 0.0, f64::max)
    }

    /// Largest marginal of player `i` with the coalition `S` (without `i`) and
    /// the output index attaining it.
    pub(crate) fn max_marginal(&self, i: usize) -> (f64, u32, usize) {
        let bit = 1u32 << i;
        let mut best = (0.0, 0, 0);
        for r in 0..1u32 << (self.n - 1) {
            let s = insert_zero_bit(r, i);
            for (k, (a, b)) in self.value(s | bit).iter().zip(self.value(s)).enumerate() {
                let d = (a - b).abs();
                if d > best.0 {
                    best = (d, s, k);
                }
            }
        }
        best
    }
}

/// Per-player payoff vectors: row `i` is `φ_i ∈ R^m`.
#[derive(Clone, PartialEq)]
pub struct Attribution {
    n: usize,
    m: usize,
    payoff: Vec<f64>,
}

impl fmt::Debug for Attribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Attribution {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, payoff: vec![0.0; n * m] }
    }

    /// Builds an attribution from a row-major `n * m` table.
    pub fn from_flat(n: usize, m: usize, payoff: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 || payoff.len() != n * m {
            return Err(Error::ShapeMismatch(format!(
                "{} values cannot form a {n}x{m} attribution",
                payoff.len()
            )));
        }
        check_finite("attribution", &payoff)?;
        Ok(Self { n, m, payoff })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != m) {
            return Err(Error::ShapeMismatch("ragged attribution rows".into()));
        }
        let payoff = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_flat(rows.len(), m, payoff)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.payoff[i * self.m..(i + 1) * self.m]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.payoff[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.payoff.chunks_exact(self.m)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.payoff
    }

    /// Column sums `Σ_i φ_i`, compensated.
    pub fn total(&self) -> Vec<f64> {
        (0..self.m)
            .map(|k| crate::sum::sum(self.rows().map(|r| r[k])))
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::ShapeMismatch(format!(
                "attributions of shape {}x{} and {}x{}",
                self.n, self.m, other.n, other.m
            )));
        }
        let payoff = self.payoff.iter().zip(&other.payoff).map(|(a, b)| a - b).collect();
        Ok(Self { n: self.n, m: self.m, payoff })
    }

    /// `‖a‖_{A,∞}`: the largest absolute component over all players.
    pub fn norm(&self) -> f64 {
        self.payoff.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Largest absolute entry with its `(player, output)` position.
    pub(crate) fn argmax_abs(&self) -> (f64, usize, usize) {
        let mut best = (0.0, 0, 0);
        for (idx, x) in self.payoff.iter().enumerate() {
            if x.abs() > best.0 {
                best = (x.abs(), idx / self.m, idx % self.m);
            }
        }
        best
    }

    /// Largest elementwise difference between two attributions of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

/// Free-function form of [`VectorGame::sup_norm`].
pub fn sup_norm(v: &VectorGame) -> f64 {
    v.sup_norm()
}

/// Free-function form of [`VectorGame::marginal_seminorm`].
pub fn marginal_seminorm(v: &VectorGame) -> f64 {
    v.marginal_seminorm()
}

/// Free-function form of [`Attribution::norm`].
pub fn attribution_norm(a: &Attribution) -> f64 {
    a.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(n: usize, entries: &[(u32, f64)]) -> VectorGame {
        let entries: Vec<(u32, [f64; 1])> = entries.iter().map(|&(s, x)| (s, [x])).collect();
        VectorGame::from_entries(n, 1, &entries).unwrap()
    }

    #[test]
    fn empty_entries_give_zero_game() {
        let g = VectorGame::from_entries::<[f64; 1]>(2, 1, &[]).unwrap();
        assert_eq!(g.values(), &[0.0; 4]);
    }

    #[test]
    fn single_entry() {
        let g = scalar(2, &[(0b11, 1.0)]);
        assert_eq!(g.values(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_nonzero_empty_coalition() {
        let err = VectorGame::from_entries(2, 1, &[(0, [0.5])]).unwrap_err();
        assert_eq!(err.to_string(), "empty coalition must have zero value");
        // an explicit zero at the empty coalition is fine
        VectorGame::from_entries(2, 1, &[(0, [0.0])]).unwrap();
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(
            VectorGame::from_entries(2, 1, &[(4, [1.0])]),
            Err(Error::MaskOutOfRange { .. })
        ));
        assert!(matches!(
            VectorGame::from_entries(2, 1, &[(1, [f64::NAN])]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            VectorGame::from_entries(2, 1, &[(1, [1.0]), (1, [2.0])]),
            Err(Error::DuplicateMask(1))
        ));
        assert!(matches!(VectorGame::zero(25, 1), Err(Error::PlayerCount(25))));
        assert!(matches!(VectorGame::zero(0, 1), Err(Error::PlayerCount(0))));
        assert!(matches!(VectorGame::zero(2, 17), Err(Error::OutputDim(17))));
    }

    #[test]
    fn unanimity_pair() {
        let t = Coalition::from_players(2, &[0, 1]).unwrap();
        let g = VectorGame::unanimity(2, t, 0, 1).unwrap();
        assert_eq!(g.values(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn unanimity_singleton_vector() {
        // player "2" in 1-based labels is index 1
        let t = Coalition::from_players(3, &[1]).unwrap();
        let g = VectorGame::unanimity(3, t, 1, 2).unwrap();
        for mask in 0..8u32 {
            let expect = if mask & 0b010 != 0 { [0.0, 1.0] } else { [0.0, 0.0] };
            assert_eq!(g.value(mask), &expect);
        }
    }

    #[test]
    fn unanimity_rejects_empty_t() {
        let err = VectorGame::unanimity(2, Coalition::empty(2).unwrap(), 0, 1).unwrap_err();
        assert_eq!(err.to_string(), "unanimity game requires nonempty T");
    }

    #[test]
    fn project_and_embed() {
        let t = Coalition::from_players(2, &[0, 1]).unwrap();
        let g = VectorGame::unanimity(2, t, 1, 2).unwrap();
        assert_eq!(g.project(1).unwrap(), VectorGame::unanimity(2, t, 0, 1).unwrap());
        assert_eq!(VectorGame::zero(3, 2).unwrap().project(1).unwrap(), VectorGame::zero(3, 1).unwrap());
        assert!(matches!(g.project(2), Err(Error::OutputIndex { k: 2, m: 2 })));

        let u1 = VectorGame::unanimity(2, Coalition::from_players(2, &[0]).unwrap(), 0, 1).unwrap();
        let e = VectorGame::embed(&u1, 0, 3).unwrap();
        for mask in 0..4 {
            assert_eq!(&e.value(mask)[1..], &[0.0, 0.0]);
            assert_eq!(e.value(mask)[0], u1.value(mask)[0]);
        }
        let z = VectorGame::zero(2, 1).unwrap();
        assert_eq!(VectorGame::embed(&z, 1, 3).unwrap(), VectorGame::zero(2, 3).unwrap());
        let e = VectorGame::embed(&u1, 2, 4).unwrap();
        assert_eq!(e.project(1).unwrap(), z);
        assert_eq!(e.project(2).unwrap(), u1);
        assert!(VectorGame::embed(&u1, 4, 4).is_err());
        assert!(matches!(VectorGame::embed(&g, 0, 2), Err(Error::NotScalar(2))));
    }

    #[test]
    fn combine_cancels_and_scales() {
        let t = Coalition::from_players(3, &[0, 2]).unwrap();
        let u = VectorGame::unanimity(3, t, 0, 2).unwrap();
        assert_eq!(VectorGame::combine(1.0, &u, -1.0, &u).unwrap(), VectorGame::zero(3, 2).unwrap());
        let twice = VectorGame::combine(2.0, &u, 0.0, &VectorGame::zero(3, 2).unwrap()).unwrap();
        assert_eq!(twice.grand(), &[2.0, 0.0]);
        assert!(VectorGame::combine(1.0, &u, 1.0, &VectorGame::zero(3, 1).unwrap()).is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(VectorGame::zero(3, 2).unwrap().sup_norm(), 0.0);
        assert_eq!(VectorGame::zero(3, 2).unwrap().marginal_seminorm(), 0.0);
        let u = VectorGame::unanimity(3, Coalition::from_players(3, &[0]).unwrap(), 0, 1).unwrap();
        assert_eq!(u.sup_norm(), 1.0);
        assert_eq!(VectorGame::combine(3.0, &u, 0.0, &u).unwrap().sup_norm(), 3.0);

        let card = VectorGame::from_fn(3, 1, |mask, out| out[0] = mask.count_ones() as f64).unwrap();
        assert_eq!(card.marginal_seminorm(), 1.0);
    }

    #[test]
    fn seminorm_of_worked_game() {
        // players 1..3 mapped to bits 0..2
        let g = scalar(3, &[(0b001, 1.0), (0b011, 3.0), (0b101, 1.0), (0b111, 4.0)]);
        assert_eq!(g.marginal_seminorm(), 4.0);
        assert_eq!(g.max_marginal(0), (4.0, 0b110, 0));
    }

    #[test]
    fn attribution_norm_examples() {
        assert_eq!(Attribution::zeros(3, 2).norm(), 0.0);
        let a = Attribution::from_rows(&[[0.0, 0.5], [0.0, 0.5], [0.0, 0.0]]).unwrap();
        assert_eq!(a.norm(), 0.5);
        assert_eq!(Attribution::from_rows(&[[-2.0, 1.0]]).unwrap().norm(), 2.0);
    }

    #[test]
    fn insert_zero_bit_enumerates_complement() {
        let n = 5;
        for i in 0..n {
            let got: Vec<u32> = (0..1u32 << (n - 1)).map(|r| insert_zero_bit(r, i)).collect();
            let want: Vec<u32> = (0..1u32 << n).filter(|s| s & (1 << i) == 0).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn coalition_basics() {
        let s = Coalition::from_players(4, &[1, 3]).unwrap();
        assert_eq!(s.mask(), 0b1010);
        assert_eq!(s.len(), 2);
        assert!(s.contains(3) && !s.contains(0));
        assert_eq!(s.players().collect::<Vec<_>>(), vec![1, 3]);
        assert!(s.is_subset_of(Coalition::full(4).unwrap()));
        assert!(Coalition::new(16, 4).is_err());
        assert!(Coalition::from_players(4, &[4]).is_err());
    }
}

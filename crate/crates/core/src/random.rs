//! Seeded generators for random games, structured games and covariances.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::game::VectorGame;

/// The generator used throughout: ChaCha8 keyed by a user seed, with the
/// stream selecting an independent sub-sequence (one per trial).
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Every nonempty coalition value i.i.d. uniform on `[-1, 1]` per component.
pub fn random_game<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<VectorGame> {
    VectorGame::from_fn(n, m, |_, out| {
        for x in out {
            *x = rng.random_range(-1.0..=1.0);
        }
    })
}

/// A game with a dummy player and a symmetric pair, both holding with exact
/// floating-point equality.
#[derive(Debug, Clone)]
pub struct StructuredGame {
    pub game: VectorGame,
    pub dummy: usize,
    /// Symmetric pair, if `n ≥ 3`.
    pub pair: Option<(usize, usize)>,
}

/// Sum of unanimity games `c_T ι_k u_T` with dyadic coefficients `c_T`, so
/// every coalition value is computed exactly. No `T` contains the dummy, and
/// every `T` is paired with its image under swapping the symmetric pair.
pub fn structured_game<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<StructuredGame> {
    let dummy = rng.random_range(0..n);
    let others: Vec<usize> = (0..n).filter(|&i| i != dummy).collect();
    let pair = if others.len() >= 2 {
        let a = rng.random_range(0..others.len());
        let mut b = rng.random_range(0..others.len() - 1);
        if b >= a {
            b += 1;
        }
        Some((others[a.min(b)], others[a.max(b)]))
    } else {
        None
    };
    let swap = |mask: u32| -> u32 {
        match pair {
            Some((p, q)) => {
                let (bp, bq) = (mask >> p & 1, mask >> q & 1);
                (mask & !(1 << p) & !(1 << q)) | (bq << p) | (bp << q)
            }
            None => mask,
        }
    };

    // coefficient table over T, symmetric under the swap and zero on T ∋ dummy
    let mut coeff = vec![vec![0.0f64; m]; 1 << n];
    for t in 1u32..1 << n {
        if t & (1 << dummy) != 0 || swap(t) < t {
            continue;
        }
        for k in 0..m {
            // multiples of 1/8 in [-1, 1]; about half the terms are zero
            let c = if rng.random_bool(0.5) { f64::from(rng.random_range(-8i32..=8)) / 8.0 } else { 0.0 };
            coeff[t as usize][k] = c;
            coeff[swap(t) as usize][k] = c;
        }
    }
    let game = VectorGame::from_fn(n, m, |mask, out| {
        for (t, c) in coeff.iter().enumerate() {
            if t as u32 & mask == t as u32 {
                for (o, ck) in out.iter_mut().zip(c) {
                    *o += ck;
                }
            }
        }
    })?;
    Ok(StructuredGame { game, dummy, pair })
}

/// `L Lᵀ + ridge·I` with `L` entries uniform on `[-1, 1]`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, ridge: f64) -> DMatrix<f64> {
    let l = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
    &l * l.transpose() + DMatrix::identity(n, n) * ridge
}

/// `n` values uniform on `[lo, hi]`.
pub fn uniform_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}

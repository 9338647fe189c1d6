//! Exact Shapley attributions for games whose coalition values are vectors.
//!
//! A [`game::VectorGame`] stores one `m`-vector per coalition of `n` players.
//! [`shapley::shapley_subset`] returns the `n × m` attribution, and the other
//! modules build games from predictors:
//!
//! - [`gaussian`]: linear models with Gaussian inputs, in closed form.
//! - [`predictor`]: black-box models against a background sample.
//! - [`axioms`]: randomized residual checks for the attribution.
//! - [`similarity`]: importance comparison across models.
//!
//! ```
//! use vecshap::game::VectorGame;
//! use vecshap::shapley::shapley_subset;
//!
//! let v = VectorGame::from_entries(2, 1, &[(0b01, [1.0]), (0b11, [3.0])]).unwrap();
//! let phi = shapley_subset(&v);
//! assert_eq!(phi.total(), vec![3.0]);
//! ```

pub mod axioms;
pub mod cli;
pub mod error;
pub mod game;
pub mod gaussian;
pub mod io;
pub mod predictor;
pub mod random;
pub mod shapley;
pub mod similarity;
pub mod sum;

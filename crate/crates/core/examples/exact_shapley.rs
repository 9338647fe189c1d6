//! Exact Shapley values by three independent routes.

use vecshap::game::VectorGame;
use vecshap::random::{random_game, trial_rng};
use vecshap::shapley::{harsanyi_dividends, shapley_permutation, shapley_subset, shapley_via_unanimity, ShapleyWeightTable};

fn main() -> vecshap::error::Result<()> {
    let v = VectorGame::from_entries(3, 1, &[(0b001, [1.0]), (0b011, [3.0]), (0b101, [1.0]), (0b111, [4.0])])?;
    let phi = shapley_subset(&v);
    for (i, row) in phi.rows().enumerate() {
        println!("phi_{i} = {:.6}", row[0]);
    }
    println!("dividends: {:?}", harsanyi_dividends(&v)?);
    println!("unanimity route differs by {:e}", phi.max_abs_diff(&shapley_via_unanimity(&v)?)?);

    let weights = ShapleyWeightTable::new(5)?;
    println!("coalition weights for n=5: {:?}", weights.as_slice());

    // a larger random game with three outputs
    let g = random_game(&mut trial_rng(1, 0), 8, 3)?;
    let a = shapley_subset(&g);
    println!("n=8 m=3: subset vs permutation {:e}", a.max_abs_diff(&shapley_permutation(&g)?)?);
    println!("total payoff {:?} vs grand value {:?}", a.total(), g.grand());
    Ok(())
}

//! Build vector-valued games, split them into coordinates and measure them.

use vecshap::game::{Coalition, VectorGame};

fn main() -> vecshap::error::Result<()> {
    // two outputs over three players, unlisted coalitions are zero
    let v = VectorGame::from_entries(
        3,
        2,
        &[(0b001, [1.0, 0.0]), (0b011, [3.0, 1.0]), (0b101, [1.0, 2.0]), (0b111, [4.0, 2.5])],
    )?;
    println!("v([0,1]) = {:?}", v.at(Coalition::from_players(3, &[0, 1])?));
    println!("grand coalition value = {:?}", v.grand());

    for k in 0..v.m() {
        let scalar = v.project(k)?;
        println!("output {k}: sup norm {:.3}, marginal seminorm {:.3}", scalar.sup_norm(), scalar.marginal_seminorm());
    }

    // embedding every coordinate back and adding recovers the game
    let mut rebuilt = VectorGame::zero(3, 2)?;
    for k in 0..2 {
        rebuilt = VectorGame::combine(1.0, &rebuilt, 1.0, &VectorGame::embed(&v.project(k)?, k, 2)?)?;
    }
    println!("direct sum reproduces v: {}", rebuilt == v);

    let u = VectorGame::unanimity(3, Coalition::from_players(3, &[1, 2])?, 1, 2)?;
    println!("unanimity on {{1,2}} in output 1: v(full) = {:?}, v({{1}}) = {:?}", u.grand(), u.value(0b010));
    Ok(())
}

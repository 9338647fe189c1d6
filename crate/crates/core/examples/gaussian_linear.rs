//! Linear model with Gaussian inputs: closed-form attributions under
//! independent and correlated features, checked against exact enumeration.

use vecshap::gaussian::{
    attribution_matrix, gaussian_game, shap_linear_correlated, shap_linear_independent, GaussianInput,
    LinearPredictor,
};
use vecshap::shapley::shapley_subset;

fn main() -> vecshap::error::Result<()> {
    let p = LinearPredictor::from_rows(vec![0.5, -1.0], &[vec![1.0, 0.0], vec![2.0, 1.0], vec![-1.0, 0.5]])?;
    let x = [0.3, -0.2, 1.4];

    let independent = GaussianInput::from_rows(vec![0.0, 1.0, -1.0], &[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 1.5],
    ])?;
    println!("independent inputs:");
    for row in shap_linear_independent(&p, &independent, &x)?.rows() {
        println!("  {row:?}");
    }

    let correlated = GaussianInput::from_rows(vec![0.0, 1.0, -1.0], &[
        vec![1.0, 0.6, 0.1],
        vec![0.6, 2.0, -0.3],
        vec![0.1, -0.3, 1.5],
    ])?;
    let closed = shap_linear_correlated(&p, &correlated, &x)?;
    let exact = shapley_subset(&gaussian_game(&p, &correlated, &x)?);
    println!("correlated inputs:");
    for row in closed.rows() {
        println!("  {row:?}");
    }
    println!("closed form vs exact game: {:e}", closed.max_abs_diff(&exact)?);
    println!("M_0 ={:.4}", attribution_matrix(&correlated, 0)?);
    Ok(())
}

//! Compare feature importance of two models across several instances.

use vecshap::gaussian::{shap_linear_correlated, GaussianInput, LinearPredictor};
use vecshap::random::{trial_rng, uniform_vec};
use vecshap::similarity::{cosine_similarity, importance_from_attributions, spearman_correlation};

fn main() -> vecshap::error::Result<()> {
    let g = GaussianInput::from_rows(vec![0.0; 4], &[
        vec![1.0, 0.5, 0.0, 0.0],
        vec![0.5, 1.0, 0.2, 0.0],
        vec![0.0, 0.2, 1.0, -0.3],
        vec![0.0, 0.0, -0.3, 1.0],
    ])?;
    let a = LinearPredictor::from_rows(vec![0.0], &[vec![2.0], vec![1.0], vec![0.0], vec![-0.5]])?;
    let b = LinearPredictor::from_rows(vec![0.0], &[vec![1.5], vec![1.2], vec![0.1], vec![-0.4]])?;

    let mut rng = trial_rng(5, 0);
    let instances: Vec<Vec<f64>> = (0..20).map(|_| uniform_vec(&mut rng, 4, -2.0, 2.0)).collect();
    let runs = |p: &LinearPredictor| -> vecshap::error::Result<Vec<_>> {
        instances.iter().map(|x| shap_linear_correlated(p, &g, x)).collect()
    };
    let ia = importance_from_attributions(&runs(&a)?, 0)?;
    let ib = importance_from_attributions(&runs(&b)?, 0)?;
    println!("importance a {:?}", ia.as_slice());
    println!("importance b {:?}", ib.as_slice());
    println!("cosine {:.6}", cosine_similarity(ia.as_slice(), ib.as_slice())?);
    println!("spearman {:.6}", spearman_correlation(ia.as_slice(), ib.as_slice())?);
    Ok(())
}

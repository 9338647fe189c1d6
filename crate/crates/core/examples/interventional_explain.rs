//! Explain a black-box polynomial against a background sample and check the
//! predictor-level stability bound.

use vecshap::predictor::{
    empirical_moments, explain, predictor_stability, BackgroundSample, FnPredictor, PolynomialPredictor, Predictor,
    Term,
};

fn main() -> vecshap::error::Result<()> {
    let f = PolynomialPredictor::new(3, vec![
        vec![Term { coeff: 1.0, exponents: vec![1, 1, 0] }, Term { coeff: -0.5, exponents: vec![0, 0, 2] }],
        vec![Term { coeff: 2.0, exponents: vec![0, 1, 0] }, Term { coeff: 0.25, exponents: vec![1, 0, 1] }],
    ])?;
    let bg = BackgroundSample::from_rows(&[
        [0.1, 0.2, 0.3],
        [-0.5, 1.0, 0.0],
        [0.7, -0.2, 1.1],
        [0.0, 0.0, -0.4],
        [0.3, 0.5, 0.2],
    ])?;
    let x = [0.9, -0.3, 0.5];

    let e = explain(&f, &bg, &x)?;
    println!("mode {}: f(x) = {:?}, baseline = {:?}", e.mode, e.prediction, e.baseline);
    for (i, row) in e.attribution.rows().enumerate() {
        println!("  feature {i}: {row:?}");
    }
    println!("efficiency residual {:e}", e.efficiency_residual());

    let eps = 1e-2;
    let h = FnPredictor::new(3, 2, |z: &[f64]| {
        let y = f.evaluate(z);
        vec![y[0] + eps * z[0].sin(), y[1]]
    });
    let s = predictor_stability(&f, &h, &bg, &x)?;
    println!("perturbation {eps}: attribution shift {:.3e} <= {:.3e}", s.lhs, s.bound);

    let moments = empirical_moments(&bg)?;
    println!("background mean {:?}, ridge added: {}", moments.input.mu().as_slice(), moments.ridged);
    Ok(())
}

//! Fits a one-class SVM to a Gaussian cloud and scores points at growing
//! distance from it.

use grant_novelty::detector::{default_gamma, ocsvm_fit, KernelSpec};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn main() -> grant_novelty::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let x = Array2::from_shape_fn((300, 2), |_| rng.sample::<f64, _>(StandardNormal));
    let gamma = default_gamma(&x);
    let model = ocsvm_fit(&x, 0.05, KernelSpec::Rbf { gamma }, 1e-6, 1_000_000)?;
    println!("gamma {gamma:.3}, rho {:.4}, {} support vectors of {}", model.rho, model.alphas.len(), model.l);
    for r in [0.0, 1.0, 2.0, 3.0, 5.0] {
        let p = [r, 0.0];
        println!("distance {r:>3}: raw novelty {:+.4}", model.raw_novelty(&p)?);
    }
    Ok(())
}

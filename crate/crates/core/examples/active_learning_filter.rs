//! Trains the non-research classifier by uncertainty sampling against a
//! simulated annotator and compares it with random labelling.

use grant_novelty::filter::{
    active_learning_loop, cv_auc, random_sampling_loop, ActiveConfig, LabelPool, Provenance, TruthOracle,
};
use grant_novelty::sparse::CsrMatrix;
use grant_novelty::stats::roc_auc;
use grant_novelty::synthkit::separable_pool;

fn main() -> grant_novelty::Result<()> {
    let (x, y) = separable_pool(9, 600, 20, 0.15, 0.0);
    let m = CsrMatrix::from_dense(&x);
    let mut pool = LabelPool::new((0..y.len()).map(|i| format!("g{i}")).collect(), m.clone())?;
    for i in (0..y.len()).filter(|&i| y[i]).take(2).chain((0..y.len()).filter(|&i| !y[i]).take(8)) {
        pool.labels[i] = Some((y[i], Provenance::SeedList));
    }
    let cfg = ActiveConfig { rounds: 8, batch: 10, ..ActiveConfig::default() };
    let (active, labelled, report) = active_learning_loop(pool.clone(), &mut TruthOracle(&y), &cfg)?;
    let (random, _, _) = random_sampling_loop(pool, &mut TruthOracle(&y), &cfg, 9)?;
    println!("{} rounds, {} labels", report.rounds_run, labelled.n_labeled());
    println!("pool AUC: uncertainty {:.3}, random {:.3}", roc_auc(&active.predict_rows(&m)?, &y)?, roc_auc(&random.predict_rows(&m)?, &y)?);
    let (lx, ly) = labelled.training_set();
    let cv = cv_auc(&lx, &ly, 3, cfg.l2, 9)?;
    println!("3-fold CV AUC on the labelled set {:.3} ± {:.3}", cv.mean, cv.sd);
    Ok(())
}

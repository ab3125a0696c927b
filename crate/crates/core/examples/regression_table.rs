//! Citation regression on novelty and covariates, printed as a table, with
//! the predicted citations as novelty sweeps from 0 to 1.

use grant_novelty::corpus::link;
use grant_novelty::engine::{score_all, EngineConfig};
use grant_novelty::stats::stars;
use grant_novelty::studies::{covariate_means, marginal_effect_curve, table1_design, table1_regression, StudyConfig};
use grant_novelty::synthkit::{generate, SynthSpec};

fn main() -> grant_novelty::Result<()> {
    let corpus = generate(&SynthSpec { seed: 3, grants_per_year: 300, ..SynthSpec::default() })?;
    let table = score_all(&corpus.grants, &EngineConfig { seed: 3, topics: 30, ..EngineConfig::default() }, 1)?;
    let linked = link(corpus.grants, corpus.publications);
    let study = StudyConfig::default();
    let fits = table1_regression(&linked, &table, &study)?;
    for ((agency, fit), (_, _, x)) in fits.iter().zip(table1_design(&linked, &table, &study)) {
        println!("{agency}: n = {}, R2 = {:.3}", fit.n, fit.r_squared);
        for j in 0..fit.names.len() {
            println!("  {:<40} {:>9.3}{:<3} ({:.3})", fit.names[j], fit.estimates[j], stars(fit.p_values[j]), fit.std_errors[j]);
        }
        for p in marginal_effect_curve(fit, &[0.0, 0.5, 1.0], &covariate_means(&x))? {
            println!("  novelty {:.1}: {:.1} citations (SE {:.2})", p.novelty, p.prediction, p.std_error);
        }
    }
    Ok(())
}

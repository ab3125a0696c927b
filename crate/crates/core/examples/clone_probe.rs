//! Replaces a growing share of a grant's past window with near copies of it
//! and rescores the grant.

use grant_novelty::engine::{clone_probe, score_all, EngineConfig};
use grant_novelty::synthkit::{generate, SynthSpec};

fn main() -> grant_novelty::Result<()> {
    let corpus = generate(&SynthSpec { seed: 5, grants_per_year: 300, ..SynthSpec::default() })?;
    let cfg = EngineConfig { seed: 5, topics: 30, years: Some((2012, 2012)), ..EngineConfig::default() };
    let table = score_all(&corpus.grants, &cfg, 1)?;
    let truth = corpus.truth_map();
    let probe = table
        .rows
        .iter()
        .filter(|r| truth[r.grant_id.as_str()])
        .max_by(|a, b| a.novelty_score.total_cmp(&b.novelty_score))
        .expect("a planted grant in 2012");
    println!("probe {} with score {:.3}", probe.grant_id, probe.novelty_score);
    for p in clone_probe(&corpus.grants, &table, &probe.grant_id, &[0.0, 0.01, 0.02, 0.04, 0.1], None, &cfg)? {
        println!("f = {:.2} ({:>3} clones): raw {:+.5}, score {:.3}", p.fraction, p.clones, p.raw_distance, p.novelty_score);
    }
    Ok(())
}

//! Refits the citation regression under each (nu, topics, window) setting.

use grant_novelty::corpus::link;
use grant_novelty::engine::{score_all, sensitivity_grid, EngineConfig};
use grant_novelty::studies::StudyConfig;
use grant_novelty::synthkit::{generate, replant_citations, CitationModel, SynthSpec};

fn main() -> grant_novelty::Result<()> {
    let corpus = generate(&SynthSpec { seed: 2, grants_per_year: 300, ..SynthSpec::default() })?;
    let cfg = EngineConfig { seed: 2, topics: 30, ..EngineConfig::default() };
    let table = score_all(&corpus.grants, &cfg, 1)?;
    let pubs = replant_citations(&corpus.grants, &corpus.publications, &table.scores(), &CitationModel::default(), 2);
    let linked = link(corpus.grants.clone(), pubs);
    let grid = [(0.01, 30, 2), (0.1, 30, 2), (0.05, 40, 2), (0.05, 30, 1)];
    for r in sensitivity_grid(&linked, &grid, &cfg, &StudyConfig::default(), 1)? {
        println!(
            "nu {:<4} topics {:<3} window {}: novelty {:+.2} (SE {:.2}, p {:.1e}, n {})",
            r.nu, r.topics, r.window_years, r.coefficient, r.std_error, r.p_value, r.n
        );
    }
    Ok(())
}

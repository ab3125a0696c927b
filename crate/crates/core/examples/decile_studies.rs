//! Top-decile comparisons: citation dynamics, programs, journal prestige,
//! productivity and the novelty trend.

use grant_novelty::corpus::link;
use grant_novelty::engine::{score_all, EngineConfig};
use grant_novelty::studies::{
    citation_dynamics, flag_deciles, novelty_trend, prestige_comparison, productivity_comparison, program_comparison, StudyConfig,
};
use grant_novelty::synthkit::{generate, SynthSpec};

fn main() -> grant_novelty::Result<()> {
    let corpus = generate(&SynthSpec { seed: 4, grants_per_year: 300, ..SynthSpec::default() })?;
    let table = score_all(&corpus.grants, &EngineConfig { seed: 4, topics: 30, ..EngineConfig::default() }, 1)?;
    let linked = link(corpus.grants.clone(), corpus.publications.clone());
    let study = StudyConfig::default();
    let flags = flag_deciles(&linked, &table, &study);

    for d in citation_dynamics(&linked, &flags, &corpus.events, &study) {
        println!("{} dynamics ({}):", d.agency, d.mode);
        for p in &d.points {
            println!("  {} years: top-novel {:.3} vs other {:.3}", p.horizon, p.top_novel_share, p.other_share);
        }
    }
    let pairs = vec![("Standard".to_string(), "Continuing".to_string())];
    let programs = program_comparison(&linked, &flags, &pairs);
    for p in &programs.programs {
        println!("program {}: top-novel share {:.3}, top-cited share {:.3}", p.program, p.top_novel_share, p.top_cited_share);
    }
    for (name, reports) in [("prestige", prestige_comparison(&linked, &flags)), ("productivity", productivity_comparison(&linked, &flags))] {
        for r in reports {
            let t = r.test.map_or("n/a".to_string(), |t| format!("t = {:.2}, p = {:.3}", t.statistic, t.p_value));
            println!("{name} {}: mean difference {:+.3} over {} cells ({t})", r.agency, r.mean_difference, r.cells.len());
        }
    }
    for t in novelty_trend(&table) {
        if let Some(test) = t.test {
            println!("trend {}: r = {:+.3} over {} grants", t.agency, test.statistic, t.n);
        }
    }
    Ok(())
}

//! Writes a synthetic corpus to disk, loads it back with validation, drops
//! duplicate grant records and links publications to grants.

use grant_novelty::corpus::{dedupe_earliest, link, load_grants, load_publications, DedupeKey, Format};
use grant_novelty::synthkit::{generate, SynthSpec};

fn main() -> grant_novelty::Result<()> {
    let dir = std::env::temp_dir().join("grant-novelty-ingest-example");
    generate(&SynthSpec { seed: 1, grants_per_year: 50, ..SynthSpec::default() })?.write_dir(&dir)?;

    let grants = load_grants(&dir.join("grants.csv"), Format::Csv)?;
    let pubs = load_publications(&dir.join("publications.csv"), Format::Csv)?;
    println!("{} grants ({} rejected), {} publications ({} rejected)", grants.records.len(), grants.rejects.len(), pubs.records.len(), pubs.rejects.len());

    let mut records = grants.records;
    let mut copy = records[0].clone();
    copy.fiscal_year += 1;
    records.push(copy);
    let kept = dedupe_earliest(&records, &DedupeKey::default());
    println!("{} records after removing {} duplicate", kept.len(), records.len() - kept.len());

    let linked = link(kept, pubs.records);
    let multi = linked.grants_by_pub.iter().filter(|g| g.len() > 1).count();
    println!("{} publications, {multi} acknowledge several grants, {} orphan references", linked.publications.len(), linked.orphans.len());
    println!("missing SJR {}, missing field {}", linked.coverage.missing_sjr, linked.coverage.missing_field);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

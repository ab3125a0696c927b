//! Layers a config file and flag overrides, then drives the command line
//! in-process.

use grant_novelty::config::{ConfigLayer, Settings};

fn main() -> grant_novelty::Result<()> {
    let file = ConfigLayer::parse("topics = 20\nnu = 0.1\nsynth_grants_per_year = 40\nseed = 3\n")?;
    let flags = ConfigLayer { seed: Some(9), ..ConfigLayer::default() };
    let mut settings = Settings::default();
    settings.apply(&file)?;
    settings.apply(&flags)?;
    settings.validate()?;
    println!("topics {}, nu {}, seed {}", settings.engine.topics, settings.engine.nu, settings.engine.seed);

    let dir = std::env::temp_dir().join("grant-novelty-cli-example");
    let code = grant_novelty::cli::run(["grant-novelty", "--seed", "9", "--out", dir.to_str().unwrap(), "synth"]);
    println!("synth exited with {code}");
    for e in std::fs::read_dir(&dir)? {
        println!("  {}", e?.file_name().to_string_lossy());
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

//! Regenerate the bundled synthetic fixture under `fixtures/synth500/`.
//!
//! The fixture is checked in so tests and demos run without network access;
//! this program exists to rebuild it if the generator ever changes. A test
//! guards against silent drift between the two.

use std::path::PathBuf;

use collabnet::ingest::write_dataset;
use collabnet::synth::{generate, SynthConfig};

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synth500");
    std::fs::create_dir_all(&dir).expect("create fixture directory");
    let (stars, works, cast) = generate(&SynthConfig::default());
    let (s, w, c) = write_dataset(&dir, &stars, &works, &cast).expect("write fixture");
    println!(
        "wrote {} stars, {} works, {} cast rows",
        stars.len(),
        works.len(),
        cast.len()
    );
    for path in [s, w, c] {
        println!("  {}", path.display());
    }
}

//! Regenerates the bundled benchmark files under `benchmark/` at the
//! repository root. The generator is deterministic, so running this is
//! a no-op unless the generator itself changed.
//!
//! Usage: cargo run -p kbqa-core --example gen_benchmark [out_dir]

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                .join("../../benchmark")
        });
    std::fs::create_dir_all(&out_dir)?;

    let bench = kbqa_core::synth::benchmark();
    std::fs::write(out_dir.join("kb.tsv"), &bench.kb_tsv)?;
    std::fs::write(out_dir.join("train.jsonl"), &bench.corpus_jsonl)?;
    std::fs::write(out_dir.join("lexicon.tsv"), &bench.lexicon_tsv)?;

    println!(
        "wrote {} triples, {} questions, lexicon -> {}",
        bench.kb.len(),
        bench.train.len(),
        out_dir.display()
    );
    Ok(())
}

//! Builds a unigram+bigram tf-idf matrix from a handful of summaries and
//! factorizes it into topics.

use grant_novelty::factorize::{nmf_fit, relative_error};
use grant_novelty::textpipe::{fit_corpus, summary_terms, TextConfig};

fn main() -> grant_novelty::Result<()> {
    let summaries = [
        "Protein folding dynamics measured with single molecule spectroscopy.",
        "Single molecule spectroscopy of membrane protein folding.",
        "Graph neural networks for molecule property prediction.",
        "Neural networks trained on graph data for property prediction.",
        "Coastal erosion models under rising sea level scenarios.",
        "Sea level rise and coastal erosion in river deltas.",
    ];
    let cfg = TextConfig::default();
    let docs: Vec<_> = summaries.iter().map(|s| summary_terms(s, &cfg)).collect();
    let (model, v) = fit_corpus(&docs, &cfg)?;
    println!("{} documents, {} terms (min_df {})", v.n_rows(), model.dim(), cfg.min_df);

    let (w, topics) = nmf_fit(&v, 3, 0, 500, 1e-8)?;
    println!("relative reconstruction error {:.3}", relative_error(&v, &w.w, topics.h()));
    for (k, row) in topics.h().rows().into_iter().enumerate() {
        let mut terms: Vec<(f64, &str)> = row.iter().zip(model.vocab.terms()).map(|(&x, t)| (x, t.as_str())).collect();
        terms.sort_by(|a, b| b.0.total_cmp(&a.0));
        let top: Vec<&str> = terms.iter().take(4).map(|t| t.1).collect();
        println!("topic {k}: {}", top.join(", "));
    }
    for (i, row) in w.w.rows().into_iter().enumerate() {
        let loads: Vec<String> = row.iter().map(|x| format!("{x:.2}")).collect();
        println!("doc {i} loads [{}]", loads.join(" "));
    }
    Ok(())
}

//! Summaries to tf-idf rows over a unigram + bigram vocabulary.
//!
//! `tf(t, d)` is the raw (possibly fractional) count of `t` in `d` and
//! `idf(t) = ln((1 + N) / (1 + df(t))) + 1`. Rows are L2-normalized unless
//! normalization is switched off; all-zero rows stay zero.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, SparseVec};

/// Term → count for one document. Bigrams are joined with `_`.
pub type TermCounts = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TextConfig {
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub normalize: bool,
    pub min_token_len: usize,
}

impl Default for TextConfig {
    fn default() -> Self {
        TextConfig { min_df: 2, max_df_ratio: 0.95, normalize: true, min_token_len: 2 }
    }
}

impl TextConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_df < 1 {
            return Err(Error::InvalidInput("min_df must be >= 1".into()));
        }
        if !(self.max_df_ratio > 0.0 && self.max_df_ratio <= 1.0) {
            return Err(Error::InvalidInput(format!("max_df_ratio {} outside (0, 1]", self.max_df_ratio)));
        }
        Ok(())
    }
}

/// Lowercased maximal alphanumeric runs, dropping tokens shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_min_len(text, 2)
}

pub fn tokenize_with_min_len(text: &str, min_len: usize) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && t.chars().count() >= min_len)
        .map(str::to_lowercase)
        .collect()
}

/// Unigram and adjacent-bigram counts of a token sequence.
pub fn count_terms(tokens: &[String]) -> TermCounts {
    let mut counts = TermCounts::new();
    for t in tokens {
        *counts.entry(t.clone()).or_insert(0.0) += 1.0;
    }
    for pair in tokens.windows(2) {
        *counts.entry(format!("{}_{}", pair[0], pair[1])).or_insert(0.0) += 1.0;
    }
    counts
}

pub fn summary_terms(text: &str, cfg: &TextConfig) -> TermCounts {
    count_terms(&tokenize_with_min_len(text, cfg.min_token_len))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    /// Vocabulary over token lists.
    pub fn build(docs: &[Vec<String>], min_df: usize, max_df_ratio: f64) -> Result<Vocabulary> {
        let counts: Vec<TermCounts> = docs.iter().map(|d| count_terms(d)).collect();
        Vocabulary::from_counts(&counts, min_df, max_df_ratio)
    }

    /// Keeps every term with `min_df <= df <= max_df_ratio * N`, sorted lexicographically.
    pub fn from_counts(docs: &[TermCounts], min_df: usize, max_df_ratio: f64) -> Result<Vocabulary> {
        if docs.is_empty() {
            return Err(Error::InvalidInput("cannot build a vocabulary from zero documents".into()));
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for d in docs {
            for (t, &c) in d {
                if c > 0.0 {
                    *df.entry(t.as_str()).or_insert(0) += 1;
                }
            }
        }
        let max_df = max_df_ratio * docs.len() as f64;
        let kept: Vec<(&str, usize)> =
            df.into_iter().filter(|&(_, n)| n >= min_df && n as f64 <= max_df + 1e-9).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let terms: Vec<String> = kept.iter().map(|(t, _)| t.to_string()).collect();
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocabulary { terms, index, df: kept.iter().map(|&(_, n)| n).collect(), n_docs: docs.len() })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn df(&self) -> &[usize] {
        &self.df
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    pub vocab: Vocabulary,
    pub idf: Vec<f64>,
    pub n_docs: usize,
    pub normalize: bool,
}

pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

impl TfIdfModel {
    pub fn new(vocab: Vocabulary, normalize: bool) -> TfIdfModel {
        let n = vocab.n_docs();
        let idf = vocab.df().iter().map(|&df| smoothed_idf(n, df)).collect();
        TfIdfModel { vocab, idf, n_docs: n, normalize }
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    /// Weights one document with the frozen statistics; out-of-vocabulary terms are ignored.
    pub fn transform(&self, doc: &TermCounts) -> SparseVec {
        let pairs: Vec<(usize, f64)> = doc
            .iter()
            .filter(|(_, &c)| c > 0.0)
            .filter_map(|(t, &c)| self.vocab.index_of(t).map(|i| (i, c * self.idf[i])))
            .collect();
        let mut v = SparseVec::from_pairs(self.dim(), pairs);
        if self.normalize {
            let norm = v.norm_sq().sqrt();
            if norm > 0.0 {
                v.values.iter_mut().for_each(|x| *x /= norm);
            }
        }
        v
    }

    pub fn transform_all(&self, docs: &[TermCounts]) -> CsrMatrix {
        let mut m = CsrMatrix::empty(self.dim());
        for d in docs {
            m.push_row(&self.transform(d)).expect("row width equals vocabulary size");
        }
        m
    }

    /// `term,df,idf` dump of the fitted vocabulary.
    pub fn write_vocabulary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["term", "df", "idf"])?;
        for ((t, df), idf) in self.vocab.terms().iter().zip(self.vocab.df()).zip(&self.idf) {
            w.write_record([t.clone(), df.to_string(), idf.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fits idf on `docs` (which must be the documents `vocab` was built from)
/// and returns the document-term matrix.
pub fn tfidf_fit_transform(docs: &[TermCounts], vocab: Vocabulary, normalize: bool) -> (TfIdfModel, CsrMatrix) {
    let model = TfIdfModel::new(vocab, normalize);
    let matrix = model.transform_all(docs);
    (model, matrix)
}

/// Builds vocabulary and fits tf-idf in one step.
pub fn fit_corpus(docs: &[TermCounts], cfg: &TextConfig) -> Result<(TfIdfModel, CsrMatrix)> {
    cfg.validate()?;
    let vocab = Vocabulary::from_counts(docs, cfg.min_df, cfg.max_df_ratio)?;
    Ok(tfidf_fit_transform(docs, vocab, cfg.normalize))
}

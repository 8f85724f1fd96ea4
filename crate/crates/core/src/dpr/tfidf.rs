//! TF-IDF vectors over a fixed reference vocabulary with cosine retrieval.
//!
//! Tokens are maximal runs of alphanumeric characters after lowercasing.
//! Weights are `count(t, doc) * idf(t)` with the smoothed
//! `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, and every document vector is
//! L2-normalized, so cosine similarity is a plain dot product.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Sparse vector with entries sorted by strictly increasing term id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector<T> {
    entries: Vec<(u32, T)>,
}

impl<T: Scalar> SparseVector<T> {
    /// Entries must be sorted by term id without repeats.
    pub fn from_sorted(entries: Vec<(u32, T)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidInput("sparse vector indices must be strictly increasing".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(u32, T)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, w)| *w == T::zero())
    }

    pub fn norm(&self) -> T {
        self.entries.iter().map(|&(_, w)| w * w).sum::<T>().sqrt()
    }

    /// Merge-join dot product.
    pub fn dot(&self, other: &Self) -> T {
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        while i < self.entries.len() && j < other.entries.len() {
            let (a, wa) = self.entries[i];
            let (b, wb) = other.entries[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc = acc + wa * wb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > T::zero() {
            for (_, w) in &mut self.entries {
                *w = *w / norm;
            }
        }
        self
    }
}

/// Best-matching reference document for a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retrieval<T> {
    pub doc: usize,
    /// Cosine similarity in [0, 1].
    pub score: T,
    /// The query shares no term with the corpus; `doc` is then 0.
    pub no_overlap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfIndex<T> {
    /// Term per column id; ids follow lexicographic term order.
    terms: Vec<String>,
    vocabulary: BTreeMap<String, u32>,
    df: Vec<usize>,
    idf: Vec<T>,
    docs: Vec<SparseVector<T>>,
    /// term id -> (doc id, weight), doc ids ascending.
    postings: Vec<Vec<(u32, T)>>,
}

impl<T: Scalar> TfidfIndex<T> {
    pub fn build<S: AsRef<str>>(texts: &[S]) -> Result<Self> {
        if texts.is_empty() {
            return Err(Error::InvalidArgument("cannot index an empty document list".into()));
        }
        let counts: Vec<BTreeMap<String, usize>> = texts
            .iter()
            .map(|t| {
                let mut c = BTreeMap::new();
                for tok in tokenize(t.as_ref()) {
                    *c.entry(tok).or_insert(0) += 1;
                }
                c
            })
            .collect();

        let mut df_by_term: BTreeMap<&str, usize> = BTreeMap::new();
        for c in &counts {
            for term in c.keys() {
                *df_by_term.entry(term).or_insert(0) += 1;
            }
        }
        if df_by_term.is_empty() {
            return Err(Error::DegenerateCorpus);
        }
        let terms: Vec<String> = df_by_term.keys().map(|t| t.to_string()).collect();
        let df: Vec<usize> = df_by_term.values().copied().collect();
        let n = texts.len();
        let idf = df.iter().map(|&d| smoothed_idf::<T>(n, d)).collect();

        let mut index = Self::assemble(terms, df, idf, Vec::new())?;
        let docs = counts
            .iter()
            .map(|c| index.weigh(c.iter().map(|(t, &k)| (t.as_str(), k))))
            .collect();
        index.docs = docs;
        index.postings = index.invert();
        Ok(index)
    }

    /// Rebuilds an index from stored parts (see the memory file format).
    pub fn from_parts(
        terms: Vec<String>,
        df: Vec<usize>,
        idf: Vec<T>,
        docs: Vec<SparseVector<T>>,
    ) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::InvalidInput("index has no documents".into()));
        }
        if df.len() != terms.len() || idf.len() != terms.len() {
            return Err(Error::InvalidInput("vocabulary, df and idf lengths differ".into()));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("vocabulary must be sorted and unique".into()));
        }
        if idf.iter().any(|w| w.is_nan() || *w <= T::zero()) {
            return Err(Error::InvalidInput("idf weights must be strictly positive".into()));
        }
        let v = terms.len();
        if docs
            .iter()
            .any(|d| d.entries().iter().any(|&(i, _)| i as usize >= v))
        {
            return Err(Error::InvalidInput("document vector references an unknown term".into()));
        }
        let mut index = Self::assemble(terms, df, idf, docs)?;
        index.postings = index.invert();
        Ok(index)
    }

    fn assemble(terms: Vec<String>, df: Vec<usize>, idf: Vec<T>, docs: Vec<SparseVector<T>>) -> Result<Self> {
        let vocabulary = terms
            .iter()
            .enumerate()
            .map(|(i, t)| u32::try_from(i).map(|i| (t.clone(), i)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput("vocabulary too large".into()))?;
        Ok(Self {
            terms,
            vocabulary,
            df,
            idf,
            docs,
            postings: Vec::new(),
        })
    }

    fn invert(&self) -> Vec<Vec<(u32, T)>> {
        let mut postings = vec![Vec::new(); self.terms.len()];
        for (d, vec) in self.docs.iter().enumerate() {
            for &(t, w) in vec.entries() {
                postings[t as usize].push((d as u32, w));
            }
        }
        postings
    }

    /// Normalized tf-idf vector from (term, count) pairs; unknown terms drop.
    fn weigh<'a>(&self, counts: impl Iterator<Item = (&'a str, usize)>) -> SparseVector<T> {
        let mut entries: Vec<(u32, T)> = counts
            .filter_map(|(term, k)| {
                self.vocabulary
                    .get(term)
                    .map(|&id| (id, T::from_usize_exact(k) * self.idf[id as usize]))
            })
            .collect();
        entries.sort_by_key(|&(id, _)| id);
        SparseVector { entries }.normalized()
    }

    /// Query vector under this index's vocabulary and idf.
    pub fn vectorize(&self, text: &str) -> SparseVector<T> {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for tok in tokenize(text) {
            *counts.entry(tok).or_insert(0) += 1;
        }
        self.weigh(counts.iter().map(|(t, &k)| (t.as_str(), k)))
    }

    /// Cosine similarity of `query` against every document, by doc id.
    pub fn similarities(&self, query: &SparseVector<T>) -> Vec<T> {
        let mut scores = vec![T::zero(); self.docs.len()];
        for &(t, qw) in query.entries() {
            for &(d, dw) in &self.postings[t as usize] {
                scores[d as usize] = scores[d as usize] + qw * dw;
            }
        }
        for s in &mut scores {
            *s = s.max(T::zero()).min(T::one());
        }
        scores
    }

    /// Highest-cosine document; ties go to the lowest doc id.
    pub fn retrieve(&self, text: &str) -> Retrieval<T> {
        let q = self.vectorize(text);
        let scores = self.similarities(&q);
        let mut best = 0;
        for (d, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = d;
            }
        }
        Retrieval {
            doc: best,
            score: scores[best],
            no_overlap: scores[best] == T::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.vocabulary.get(term).copied()
    }

    pub fn df(&self) -> &[usize] {
        &self.df
    }

    pub fn idf(&self) -> &[T] {
        &self.idf
    }

    pub fn documents(&self) -> &[SparseVector<T>] {
        &self.docs
    }
}

fn smoothed_idf<T: Scalar>(n_docs: usize, df: usize) -> T {
    (T::from_usize_exact(1 + n_docs) / T::from_usize_exact(1 + df)).ln() + T::one()
}

/// Free-function form of [`TfidfIndex::build`].
pub fn build_index<T: Scalar, S: AsRef<str>>(texts: &[S]) -> Result<TfidfIndex<T>> {
    TfidfIndex::build(texts)
}

/// Free-function form of [`TfidfIndex::retrieve`].
pub fn retrieve_anchor<T: Scalar>(index: &TfidfIndex<T>, query: &str) -> Retrieval<T> {
    index.retrieve(query)
}

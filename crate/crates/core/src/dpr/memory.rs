//! Routing-memory persistence as one self-describing JSON document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::routing::{CorpusItem, RoutingMemory, SplitInfo};
use super::tfidf::{SparseVector, TfidfIndex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const FORMAT: &str = "persona-lab/routing-memory";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MemoryDoc {
    format: String,
    version: u32,
    dataset: String,
    split: SplitDoc,
    fallback_persona: String,
    index: IndexDoc,
    reference: Vec<CorpusItem>,
}

#[derive(Serialize, Deserialize)]
struct SplitDoc {
    seed: u64,
    ratio: f64,
    total: usize,
    reference: usize,
    test: usize,
}

#[derive(Serialize, Deserialize)]
struct IndexDoc {
    documents: usize,
    vocabulary: Vec<String>,
    df: Vec<usize>,
    idf: Vec<f64>,
    /// Per document: (term id, weight) pairs.
    vectors: Vec<Vec<(u32, f64)>>,
}

fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("scalar converts to f64")
}

fn from_f64<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 converts to scalar")
}

impl<T: Scalar> RoutingMemory<T> {
    pub fn to_json(&self) -> Result<String> {
        let index = self.index();
        let split = self.split();
        let doc = MemoryDoc {
            format: FORMAT.into(),
            version: VERSION,
            dataset: self.dataset().to_string(),
            split: SplitDoc {
                seed: split.seed,
                ratio: split.ratio,
                total: split.total,
                reference: self.reference().len(),
                test: split.total - self.reference().len(),
            },
            fallback_persona: self.fallback_persona().code().to_string(),
            index: IndexDoc {
                documents: index.len(),
                vocabulary: index.terms().to_vec(),
                df: index.df().to_vec(),
                idf: index.idf().iter().map(|&w| to_f64(w)).collect(),
                vectors: index
                    .documents()
                    .iter()
                    .map(|v| v.entries().iter().map(|&(i, w)| (i, to_f64(w))).collect())
                    .collect(),
            },
            reference: self.reference().to_vec(),
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    /// Loads a memory written by [`RoutingMemory::to_json`]; the stored index
    /// is used as-is, not recomputed.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MemoryDoc = serde_json::from_str(text)?;
        if doc.format != FORMAT || doc.version != VERSION {
            return Err(Error::parse(
                "routing memory",
                format!("unsupported format {} v{}", doc.format, doc.version),
            ));
        }
        if doc.index.documents != doc.reference.len() || doc.split.reference != doc.reference.len() {
            return Err(Error::parse("routing memory", "document counts disagree"));
        }
        if doc.split.reference + doc.split.test != doc.split.total {
            return Err(Error::parse("routing memory", "split sizes do not add up"));
        }
        let vectors = doc
            .index
            .vectors
            .into_iter()
            .map(|v| SparseVector::from_sorted(v.into_iter().map(|(i, w)| (i, from_f64(w))).collect()))
            .collect::<Result<Vec<_>>>()?;
        let index = TfidfIndex::from_parts(
            doc.index.vocabulary,
            doc.index.df,
            doc.index.idf.into_iter().map(from_f64).collect(),
            vectors,
        )?;
        let split = SplitInfo {
            seed: doc.split.seed,
            ratio: doc.split.ratio,
            total: doc.split.total,
        };
        let memory = Self::from_parts(doc.reference, index, split)?;
        if memory.dataset() != doc.dataset || memory.fallback_persona().code() != doc.fallback_persona {
            return Err(Error::parse("routing memory", "dataset or fallback persona disagrees with contents"));
        }
        Ok(memory)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

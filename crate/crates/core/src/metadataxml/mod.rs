//! Article metadata with provenance, parsed from PubMed efetch XML and PMC
//! JATS full text.

mod jats;
mod pubmed;

pub use jats::{parse_pmc_articleset, parse_pmc_fulltext_xml, PmcDocument, SectionSpan};
pub use pubmed::{parse_pubmed_records, parse_pubmed_xml, PubmedParse, PubmedRecord};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XmlError {
    #[error("XML syntax error: {0}")]
    Syntax(String),
    #[error("document has no paragraph text")]
    EmptyBody,
    #[error("unexpected document structure: {0}")]
    Structure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    PubMed,
    #[serde(rename = "PMC")]
    Pmc,
    BioRxiv,
    LocalPDF,
}

/// One literature record. At least one of `pmid`, `pmcid`, `doi`, `url` is
/// always present and `title` is never blank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleMetadata {
    pub pmid: Option<String>,
    pub pmcid: Option<String>,
    pub doi: Option<String>,
    pub title: String,
    pub authors: Vec<String>,
    pub journal: String,
    pub year: Option<i32>,
    pub source: Source,
    pub url: Option<String>,
}

impl ArticleMetadata {
    pub fn has_provenance(&self) -> bool {
        [&self.pmid, &self.pmcid, &self.doi, &self.url]
            .iter()
            .any(|id| id.as_deref().is_some_and(|s| !s.trim().is_empty()))
    }

    pub fn is_valid(&self) -> bool {
        self.has_provenance() && !normalize_ws(&self.title).is_empty()
    }

    /// Stable identity used for storage and cross-source merging, by
    /// identifier priority pmid > pmcid > doi > url.
    pub fn provenance_key(&self) -> String {
        if let Some(p) = &self.pmid {
            format!("pmid:{p}")
        } else if let Some(p) = &self.pmcid {
            format!("pmcid:{}", p.to_ascii_uppercase())
        } else if let Some(d) = &self.doi {
            format!("doi:{}", d.to_ascii_lowercase())
        } else if let Some(u) = &self.url {
            format!("url:{u}")
        } else {
            "unknown".to_string()
        }
    }

    /// Whether two records describe the same article (any shared identifier).
    pub fn same_article(&self, other: &ArticleMetadata) -> bool {
        fn eq(a: &Option<String>, b: &Option<String>) -> bool {
            matches!((a, b), (Some(x), Some(y)) if x.eq_ignore_ascii_case(y))
        }
        eq(&self.pmid, &other.pmid)
            || eq(&self.pmcid, &other.pmcid)
            || eq(&self.doi, &other.doi)
            || eq(&self.url, &other.url)
    }

    /// Fills absent fields from `other`; never overwrites present ones.
    pub fn absorb(&mut self, other: &ArticleMetadata) {
        fn fill(a: &mut Option<String>, b: &Option<String>) {
            if a.is_none() {
                a.clone_from(b);
            }
        }
        fill(&mut self.pmid, &other.pmid);
        fill(&mut self.pmcid, &other.pmcid);
        fill(&mut self.doi, &other.doi);
        fill(&mut self.url, &other.url);
        if self.authors.is_empty() {
            self.authors.clone_from(&other.authors);
        }
        if self.journal.is_empty() {
            self.journal.clone_from(&other.journal);
        }
        if self.year.is_none() {
            self.year = other.year;
        }
    }

    /// Best link to the full text: DOI resolver, then PMC, PubMed, raw URL.
    pub fn link(&self) -> Option<String> {
        if let Some(doi) = &self.doi {
            Some(format!("https://doi.org/{doi}"))
        } else if let Some(pmcid) = &self.pmcid {
            Some(format!("https://www.ncbi.nlm.nih.gov/pmc/articles/{pmcid}/"))
        } else if let Some(pmid) = &self.pmid {
            Some(format!("https://pubmed.ncbi.nlm.nih.gov/{pmid}/"))
        } else {
            self.url.clone()
        }
    }
}

/// Order-independent collection of unique articles. Records sharing any
/// identifier are merged.
#[derive(Debug, Clone, Default)]
pub struct SourceSet {
    items: Vec<ArticleMetadata>,
}

impl SourceSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or merges; returns the provenance key of the stored record.
    pub fn insert(&mut self, article: ArticleMetadata) -> String {
        let matches: Vec<usize> = self
            .items
            .iter()
            .enumerate()
            .filter(|(_, a)| a.same_article(&article))
            .map(|(i, _)| i)
            .collect();
        match matches.split_first() {
            None => {
                let key = article.provenance_key();
                self.items.push(article);
                key
            }
            Some((&first, rest)) => {
                for &i in rest.iter().rev() {
                    let other = self.items.remove(i);
                    self.items[first].absorb(&other);
                }
                self.items[first].absorb(&article);
                self.items[first].provenance_key()
            }
        }
    }

    pub fn contains(&self, article: &ArticleMetadata) -> bool {
        self.items.iter().any(|a| a.same_article(article))
    }

    pub fn find(&self, article: &ArticleMetadata) -> Option<&ArticleMetadata> {
        self.items.iter().find(|a| a.same_article(article))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Records sorted by provenance key.
    pub fn into_sorted(mut self) -> Vec<ArticleMetadata> {
        self.items.sort_by_key(|a| a.provenance_key());
        self.items
    }
}

pub(crate) fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Concatenated text of all descendants, whitespace-normalized.
pub(crate) fn node_text(node: roxmltree::Node<'_, '_>) -> String {
    let mut out = String::new();
    for d in node.descendants().filter(|n| n.is_text()) {
        out.push_str(d.text().unwrap_or(""));
    }
    normalize_ws(&out)
}

pub(crate) fn non_empty(s: String) -> Option<String> {
    if s.trim().is_empty() {
        None
    } else {
        Some(s)
    }
}

pub(crate) fn parse_document(xml: &str) -> Result<roxmltree::Document<'_>, XmlError> {
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    roxmltree::Document::parse_with_options(xml, opts).map_err(|e| XmlError::Syntax(e.to_string()))
}

use regex::Regex;
use std::sync::LazyLock;
use tracing::warn;

use super::{node_text, non_empty, normalize_ws, parse_document, ArticleMetadata, Source, XmlError};

/// A PubMed record plus its abstract (used as classifier context).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PubmedRecord {
    pub metadata: ArticleMetadata,
    pub abstract_text: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PubmedParse {
    pub records: Vec<PubmedRecord>,
    /// Articles dropped because they carried no identifier at all.
    pub skipped_no_provenance: usize,
    /// Articles dropped because their title was blank.
    pub skipped_untitled: usize,
}

static YEAR_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(\d{4})\b").unwrap());

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(name))
}

fn path<'a, 'i>(node: roxmltree::Node<'a, 'i>, names: &[&str]) -> Option<roxmltree::Node<'a, 'i>> {
    names.iter().try_fold(node, |n, name| child(n, name))
}

fn article_id(article: roxmltree::Node<'_, '_>, id_type: &str) -> Option<String> {
    let list = path(article, &["PubmedData", "ArticleIdList"])?;
    list.children()
        .filter(|n| n.has_tag_name("ArticleId") && n.attribute("IdType") == Some(id_type))
        .map(node_text)
        .find(|s| !s.is_empty())
}

fn parse_year(journal_issue: Option<roxmltree::Node<'_, '_>>) -> Option<i32> {
    let pub_date = journal_issue.and_then(|ji| child(ji, "PubDate"))?;
    if let Some(year) = child(pub_date, "Year").and_then(|y| node_text(y).parse().ok()) {
        return Some(year);
    }
    let medline = child(pub_date, "MedlineDate").map(node_text)?;
    YEAR_TOKEN
        .captures(&medline)
        .and_then(|c| c[1].parse().ok())
}

fn parse_authors(article: roxmltree::Node<'_, '_>) -> Vec<String> {
    let Some(list) = child(article, "AuthorList") else {
        return Vec::new();
    };
    list.children()
        .filter(|n| n.has_tag_name("Author"))
        .filter_map(|author| {
            if let Some(last) = child(author, "LastName").map(node_text) {
                let initials = child(author, "Initials").map(node_text).unwrap_or_default();
                let name = format!("{last} {initials}");
                non_empty(name.trim().to_string())
            } else {
                child(author, "CollectiveName").map(node_text).and_then(non_empty)
            }
        })
        .collect()
}

fn parse_one(pubmed_article: roxmltree::Node<'_, '_>) -> (ArticleMetadata, Option<String>) {
    let citation = child(pubmed_article, "MedlineCitation");
    let article = citation.and_then(|c| child(c, "Article"));
    let pmid = citation
        .and_then(|c| child(c, "PMID"))
        .map(node_text)
        .and_then(non_empty)
        .or_else(|| article_id(pubmed_article, "pubmed"));
    let doi = article_id(pubmed_article, "doi").or_else(|| {
        article.and_then(|a| {
            a.children()
                .filter(|n| n.has_tag_name("ELocationID") && n.attribute("EIdType") == Some("doi"))
                .map(node_text)
                .find(|s| !s.is_empty())
        })
    });
    let pmcid = article_id(pubmed_article, "pmc");
    let title = article
        .and_then(|a| child(a, "ArticleTitle"))
        .map(node_text)
        .unwrap_or_default();
    let journal_node = article.and_then(|a| child(a, "Journal"));
    let journal = journal_node
        .and_then(|j| child(j, "Title").or_else(|| child(j, "ISOAbbreviation")))
        .map(node_text)
        .unwrap_or_default();
    let year = parse_year(journal_node.and_then(|j| child(j, "JournalIssue")));
    let authors = article.map(parse_authors).unwrap_or_default();
    let abstract_text = article.and_then(|a| child(a, "Abstract")).and_then(|abs| {
        let parts: Vec<String> = abs
            .children()
            .filter(|n| n.has_tag_name("AbstractText"))
            .map(node_text)
            .filter(|s| !s.is_empty())
            .collect();
        non_empty(parts.join("\n\n"))
    });
    let metadata = ArticleMetadata {
        pmid,
        pmcid,
        doi,
        title: normalize_ws(&title),
        authors,
        journal,
        year,
        source: Source::PubMed,
        url: None,
    };
    (metadata, abstract_text)
}

/// Parses a PubMed efetch response into records with abstracts, in document
/// order.
pub fn parse_pubmed_records(xml: &str) -> Result<PubmedParse, XmlError> {
    let doc = parse_document(xml)?;
    let mut out = PubmedParse::default();
    for node in doc.descendants().filter(|n| n.has_tag_name("PubmedArticle")) {
        let (metadata, abstract_text) = parse_one(node);
        if !metadata.has_provenance() {
            warn!(title = %metadata.title, "skipping PubMed record without any identifier");
            out.skipped_no_provenance += 1;
            continue;
        }
        if metadata.title.is_empty() {
            warn!(key = %metadata.provenance_key(), "skipping PubMed record without a title");
            out.skipped_untitled += 1;
            continue;
        }
        out.records.push(PubmedRecord {
            metadata,
            abstract_text,
        });
    }
    Ok(out)
}

/// One [`ArticleMetadata`] per `PubmedArticle`, in document order.
pub fn parse_pubmed_xml(xml: &str) -> Result<Vec<ArticleMetadata>, XmlError> {
    Ok(parse_pubmed_records(xml)?
        .records
        .into_iter()
        .map(|r| r.metadata)
        .collect())
}

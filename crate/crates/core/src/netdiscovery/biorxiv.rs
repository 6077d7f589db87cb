use std::sync::LazyLock;

use regex::Regex;
use scraper::{ElementRef, Html, Selector};
use tracing::warn;
use url::Url;

use super::{FetchRequest, Fetcher, HostClass, NetError, Purpose};
use crate::metadataxml::{normalize_ws, ArticleMetadata, Source};

fn sel(s: &str) -> Selector {
    Selector::parse(s).expect("static selector")
}

static RESULT_ITEM: LazyLock<Selector> = LazyLock::new(|| sel("li.search-result, div.search-result"));
static CITATION: LazyLock<Selector> = LazyLock::new(|| sel(".highwire-article-citation"));
static TITLE_LINK: LazyLock<Selector> = LazyLock::new(|| sel("a.highwire-cite-linked-title"));
static DOI_FIELD: LazyLock<Selector> = LazyLock::new(|| sel(".highwire-cite-metadata-doi"));
static AUTHOR: LazyLock<Selector> = LazyLock::new(|| sel(".highwire-citation-author"));
static SUMMARY: LazyLock<Selector> = LazyLock::new(|| sel(".highwire-search-summary, .search-summary, #search-summary"));
static BIORXIV_DOI: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"10\.1101/(\d{4})[.\d]*\d").expect("doi pattern"));
static NO_RESULTS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bno results\b").expect("pattern"));

pub fn biorxiv_search_url(base: &str, target: &str) -> String {
    let mut url = Url::parse(base).expect("biorxiv base is validated");
    url.path_segments_mut()
        .expect("http base")
        .pop_if_empty()
        .push("search")
        .push(target);
    url.into()
}

fn text_of(el: ElementRef<'_>) -> String {
    normalize_ws(&el.text().collect::<String>())
}

fn record(item: ElementRef<'_>, base: &Url) -> Option<ArticleMetadata> {
    let link = item.select(&TITLE_LINK).next()?;
    let title = text_of(link);
    let href = link.value().attr("href").and_then(|h| base.join(h).ok());
    let doi_text = item.select(&DOI_FIELD).next().map(text_of).unwrap_or_default();
    let caps = BIORXIV_DOI
        .captures(&doi_text)
        .or_else(|| href.as_ref().and_then(|h| BIORXIV_DOI.captures(h.as_str())));
    let doi = caps.as_ref().map(|c| c[0].to_string());
    let year = caps.as_ref().and_then(|c| c[1].parse().ok()).filter(|y| (2013..=2100).contains(y));
    let meta = ArticleMetadata {
        pmid: None,
        pmcid: None,
        doi,
        title,
        authors: item.select(&AUTHOR).map(text_of).filter(|a| !a.is_empty()).collect(),
        journal: "bioRxiv".into(),
        year,
        source: Source::BioRxiv,
        url: href.map(String::from),
    };
    meta.is_valid().then_some(meta)
}

/// Preprint records from a bioRxiv search page. `None` means the page did
/// not look like a result listing at all.
pub fn parse_biorxiv_results(html: &str, base_url: &str) -> Option<Vec<ArticleMetadata>> {
    let base = Url::parse(base_url).ok()?;
    let doc = Html::parse_document(html);
    let mut items: Vec<ElementRef<'_>> = doc.select(&RESULT_ITEM).collect();
    if items.is_empty() {
        items = doc.select(&CITATION).collect();
    }
    if items.is_empty() {
        let summary = doc.select(&SUMMARY).next().is_some();
        let body = doc.root_element().text().collect::<String>();
        return (summary || NO_RESULTS.is_match(&body)).then(Vec::new);
    }
    let mut out: Vec<ArticleMetadata> = Vec::new();
    for meta in items.into_iter().filter_map(|i| record(i, &base)) {
        if !out.iter().any(|m| m.same_article(&meta)) {
            out.push(meta);
        }
    }
    Some(out)
}

impl Fetcher {
    /// Scrapes one bioRxiv result page for `target`. An unrecognized page
    /// yields an empty list and a warning.
    pub fn search_biorxiv(&self, target: &str) -> Result<Vec<ArticleMetadata>, NetError> {
        if target.trim().is_empty() {
            return Err(NetError::Precondition("bioRxiv search target is empty".into()));
        }
        let url = biorxiv_search_url(&self.config().biorxiv_base, target.trim());
        let result = self.acquire(&FetchRequest::new(&url, HostClass::BioRxiv, Purpose::Search))?;
        if !result.is_success() {
            return Err(NetError::Http {
                status: result.status,
                url,
            });
        }
        let html = String::from_utf8_lossy(&result.body);
        match parse_biorxiv_results(&html, &url) {
            Some(records) => Ok(records),
            None => {
                warn!(%url, "unrecognized bioRxiv page layout; no records taken");
                Ok(Vec::new())
            }
        }
    }
}

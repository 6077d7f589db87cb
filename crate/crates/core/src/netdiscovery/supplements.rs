use std::collections::HashMap;
use std::sync::LazyLock;

use scraper::{Html, Selector};
use serde::{Deserialize, Serialize};
use url::Url;

use crate::metadataxml::normalize_ws;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SupplementKind {
    SupportingInformation,
    SupplementaryMaterial,
    #[serde(rename = "PDF")]
    Pdf,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SupplementLink {
    pub url: String,
    pub kind: SupplementKind,
    pub anchor_text: String,
}

static ANCHOR: LazyLock<Selector> = LazyLock::new(|| Selector::parse("a[href]").expect("static selector"));

/// Kind from anchor text and href alone, or `None` when neither matches the
/// supplement patterns.
fn classify(anchor: &str, href: &str, url: &Url) -> Option<SupplementKind> {
    let words = format!("{} {}", anchor.to_lowercase(), href.to_lowercase().replace(['-', '_', '+'], " "));
    if words.contains("supporting information") {
        Some(SupplementKind::SupportingInformation)
    } else if words.contains("supplement") {
        // Covers "supplementary" too.
        Some(SupplementKind::SupplementaryMaterial)
    } else if url.path().to_lowercase().ends_with(".pdf") {
        Some(SupplementKind::Pdf)
    } else if href.to_lowercase().contains(".pdf") {
        Some(SupplementKind::Other)
    } else {
        None
    }
}

/// Absolute supplement links on a landing page, in first-appearance order and
/// unique by URL (fragments ignored). When one URL is linked several times
/// the entry with the smallest `(kind, anchor_text)` is kept, so the result
/// as a set does not depend on anchor order.
pub fn harvest_supplements(html: &str, base_url: &str) -> Vec<SupplementLink> {
    let base = Url::parse(base_url).ok();
    let doc = Html::parse_document(html);
    let mut order: Vec<String> = Vec::new();
    let mut best: HashMap<String, SupplementLink> = HashMap::new();
    for a in doc.select(&ANCHOR) {
        let href = a.value().attr("href").unwrap_or_default().trim();
        if href.is_empty() {
            continue;
        }
        let joined = match &base {
            Some(b) => b.join(href),
            None => Url::parse(href),
        };
        let Ok(mut url) = joined else { continue };
        if !matches!(url.scheme(), "http" | "https") {
            continue;
        }
        url.set_fragment(None);
        let anchor_text = normalize_ws(&a.text().collect::<String>());
        let Some(kind) = classify(&anchor_text, href, &url) else { continue };
        let link = SupplementLink {
            url: url.to_string(),
            kind,
            anchor_text,
        };
        match best.get_mut(&link.url) {
            Some(prev) => {
                if (link.kind, &link.anchor_text) < (prev.kind, &prev.anchor_text) {
                    *prev = link;
                }
            }
            None => {
                order.push(link.url.clone());
                best.insert(link.url.clone(), link);
            }
        }
    }
    order.into_iter().filter_map(|u| best.remove(&u)).collect()
}

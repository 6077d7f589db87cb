use serde::{Deserialize, Serialize};

use super::{node_text, non_empty, normalize_ws, parse_document, ArticleMetadata, Source, XmlError};

/// `(title, start, end)` byte range of one section inside `body_text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionSpan {
    pub title: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmcDocument {
    pub metadata: ArticleMetadata,
    pub abstract_text: Option<String>,
    /// Paragraphs (and table rows) in document order, separated by blank lines.
    pub body_text: String,
    pub sections: Vec<SectionSpan>,
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(name))
}

/// Paragraph-level blocks under `node`: `<p>` text, table captions and one
/// block per table row.
fn collect_blocks(node: roxmltree::Node<'_, '_>, out: &mut Vec<String>) {
    for c in node.children().filter(|c| c.is_element()) {
        match c.tag_name().name() {
            "p" => {
                let text = node_text(c);
                if !text.is_empty() {
                    out.push(text);
                }
            }
            "table-wrap" => collect_table(c, out),
            "title" | "label" | "xref" | "object-id" => {}
            _ => collect_blocks(c, out),
        }
    }
}

struct BodyBuilder {
    text: String,
    sections: Vec<SectionSpan>,
}

impl BodyBuilder {
    fn push_section(&mut self, title: String, blocks: Vec<String>) {
        if blocks.is_empty() {
            return;
        }
        if !self.text.is_empty() {
            self.text.push_str("\n\n");
        }
        let start = self.text.len();
        self.text.push_str(&blocks.join("\n\n"));
        self.sections.push(SectionSpan {
            title,
            start,
            end: self.text.len(),
        });
    }
}

fn normalize_pmcid(raw: &str) -> String {
    let raw = raw.trim();
    if raw.to_ascii_uppercase().starts_with("PMC") {
        format!("PMC{}", &raw[3..])
    } else {
        format!("PMC{raw}")
    }
}

fn parse_metadata(article: roxmltree::Node<'_, '_>) -> ArticleMetadata {
    let front = child(article, "front");
    let meta = front.and_then(|f| child(f, "article-meta"));
    let id = |kinds: &[&str]| {
        meta.and_then(|m| {
            m.children()
                .filter(|n| n.has_tag_name("article-id"))
                .filter(|n| n.attribute("pub-id-type").is_some_and(|t| kinds.contains(&t)))
                .map(node_text)
                .find(|s| !s.is_empty())
        })
    };
    let journal = front
        .and_then(|f| child(f, "journal-meta"))
        .and_then(|jm| jm.descendants().find(|n| n.has_tag_name("journal-title")))
        .map(node_text)
        .unwrap_or_default();
    let title = meta
        .and_then(|m| m.descendants().find(|n| n.has_tag_name("article-title")))
        .map(node_text)
        .unwrap_or_default();
    let authors = meta
        .map(|m| {
            m.descendants()
                .filter(|n| n.has_tag_name("contrib"))
                .filter(|n| n.attribute("contrib-type").is_none_or(|t| t == "author"))
                .filter_map(|contrib| {
                    let name = child(contrib, "name")?;
                    let surname = child(name, "surname").map(node_text).unwrap_or_default();
                    let initials: String = child(name, "given-names")
                        .map(node_text)
                        .unwrap_or_default()
                        .split(|c: char| c.is_whitespace() || c == '-' || c == '.')
                        .filter_map(|part| part.chars().next())
                        .collect();
                    non_empty(format!("{surname} {initials}").trim().to_string())
                })
                .collect()
        })
        .unwrap_or_default();
    let year = meta.and_then(|m| {
        m.children()
            .filter(|n| n.has_tag_name("pub-date"))
            .filter_map(|d| child(d, "year").and_then(|y| node_text(y).parse().ok()))
            .next()
    });
    ArticleMetadata {
        pmid: id(&["pmid"]),
        pmcid: id(&["pmc", "pmcid"]).map(|s| normalize_pmcid(&s)),
        doi: id(&["doi"]),
        title: normalize_ws(&title),
        authors,
        journal,
        year,
        source: Source::Pmc,
        url: None,
    }
}

fn parse_article(article: roxmltree::Node<'_, '_>) -> Result<PmcDocument, XmlError> {
    let metadata = parse_metadata(article);
    let mut body = BodyBuilder {
        text: String::new(),
        sections: Vec::new(),
    };

    let mut abstract_blocks = Vec::new();
    if let Some(meta) = child(article, "front").and_then(|f| child(f, "article-meta")) {
        for abs in meta.children().filter(|n| n.has_tag_name("abstract")) {
            collect_blocks(abs, &mut abstract_blocks);
        }
    }
    let abstract_text = non_empty(abstract_blocks.join("\n\n"));
    body.push_section("Abstract".to_string(), abstract_blocks);

    if let Some(b) = child(article, "body") {
        let mut loose = Vec::new();
        for c in b.children().filter(|c| c.is_element()) {
            if c.has_tag_name("sec") {
                body.push_section("Body".to_string(), std::mem::take(&mut loose));
                let title = child(c, "title").map(node_text).unwrap_or_default();
                let mut blocks = Vec::new();
                collect_blocks(c, &mut blocks);
                body.push_section(title, blocks);
            } else {
                collect_single(c, &mut loose);
            }
        }
        body.push_section("Body".to_string(), loose);
    }

    for group in article.children().filter(|n| n.has_tag_name("floats-group") || n.has_tag_name("back")) {
        let mut blocks = Vec::new();
        for tw in group
            .descendants()
            .filter(|n| n.has_tag_name("table-wrap") || n.has_tag_name("supplementary-material"))
        {
            collect_single(tw, &mut blocks);
        }
        let title = if group.has_tag_name("back") { "Back matter" } else { "Floats" };
        body.push_section(title.to_string(), blocks);
    }

    if body.text.trim().is_empty() {
        return Err(XmlError::EmptyBody);
    }
    Ok(PmcDocument {
        metadata,
        abstract_text,
        body_text: body.text,
        sections: body.sections,
    })
}

fn collect_single(node: roxmltree::Node<'_, '_>, out: &mut Vec<String>) {
    match node.tag_name().name() {
        "p" => {
            let text = node_text(node);
            if !text.is_empty() {
                out.push(text);
            }
        }
        "table-wrap" => collect_table(node, out),
        _ => collect_blocks(node, out),
    }
}

fn collect_table(node: roxmltree::Node<'_, '_>, out: &mut Vec<String>) {
    if let Some(caption) = child(node, "caption") {
        collect_blocks(caption, out);
    }
    for row in node.descendants().filter(|n| n.has_tag_name("tr")) {
        let cells: Vec<String> = row
            .children()
            .filter(|n| n.has_tag_name("td") || n.has_tag_name("th"))
            .map(node_text)
            .collect();
        let line = cells.join(" | ");
        if !line.trim_matches(|ch: char| ch == '|' || ch.is_whitespace()).is_empty() {
            out.push(line);
        }
    }
}

/// Parses a single JATS `<article>` document (the root may also be a
/// `pmc-articleset` holding exactly one article).
pub fn parse_pmc_fulltext_xml(xml: &str) -> Result<PmcDocument, XmlError> {
    let doc = parse_document(xml)?;
    let article = doc
        .descendants()
        .find(|n| n.has_tag_name("article"))
        .ok_or_else(|| XmlError::Structure("no <article> element".into()))?;
    parse_article(article)
}

/// Parses every `<article>` of a PMC efetch response.
pub fn parse_pmc_articleset(xml: &str) -> Result<Vec<Result<PmcDocument, XmlError>>, XmlError> {
    let doc = parse_document(xml)?;
    Ok(doc
        .descendants()
        .filter(|n| n.has_tag_name("article"))
        .map(parse_article)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = include_str!("../../tests/fixtures/pmc_article.xml");

    #[test]
    fn metadata_from_front_matter() {
        let doc = parse_pmc_fulltext_xml(FIXTURE).unwrap();
        let m = &doc.metadata;
        assert_eq!(m.pmid.as_deref(), Some("30000001"));
        assert_eq!(m.pmcid.as_deref(), Some("PMC6100001"));
        assert_eq!(m.doi.as_deref(), Some("10.1093/nar/gky001"));
        assert_eq!(m.title, "Selection of a DNA aptamer against human thrombin");
        assert_eq!(m.authors, vec!["Garcia ML", "Chen W"]);
        assert_eq!(m.journal, "Nucleic Acids Research");
        assert_eq!(m.year, Some(2018));
        assert_eq!(m.source, Source::Pmc);
        assert!(doc.abstract_text.unwrap().contains("binds thrombin"));
    }

    #[test]
    fn three_disjoint_section_spans() {
        let doc = parse_pmc_fulltext_xml(FIXTURE).unwrap();
        let titles: Vec<&str> = doc.sections.iter().map(|s| s.title.as_str()).collect();
        assert_eq!(titles, vec!["Abstract", "Introduction", "Results"]);
        let mut prev_end = 0;
        for s in &doc.sections {
            assert!(s.start >= prev_end && s.start < s.end && s.end <= doc.body_text.len());
            prev_end = s.end;
        }
    }

    #[test]
    fn table_cells_reach_body_text() {
        // Walking the fixture by hand: the only <tbody> row is
        // "TBA-29 | AGTCCGTGGTAGGGCAGGTTGGGGTGACT" inside the Results section.
        let doc = parse_pmc_fulltext_xml(FIXTURE).unwrap();
        let results = &doc.sections[2];
        let section_text = &doc.body_text[results.start..results.end];
        assert!(section_text.contains("TBA-29 | AGTCCGTGGTAGGGCAGGTTGGGGTGACT"));
        assert!(section_text.contains("Aptamer sequences selected against thrombin."));
        assert!(section_text.contains("25 °C"));
    }

    #[test]
    fn empty_body_and_syntax_errors() {
        let empty = "<article><front><article-meta><article-id pub-id-type=\"pmid\">1</article-id>\
                     </article-meta></front><body/></article>";
        assert_eq!(parse_pmc_fulltext_xml(empty), Err(XmlError::EmptyBody));
        assert!(matches!(parse_pmc_fulltext_xml("<article><body>"), Err(XmlError::Syntax(_))));
    }

    #[test]
    fn articleset_yields_each_article() {
        let inner = FIXTURE.split_once("?>").unwrap().1;
        let inner = inner.split_once("dtd\">").unwrap().1;
        let set = format!("<pmc-articleset>{inner}{inner}</pmc-articleset>");
        let docs = parse_pmc_articleset(&set).unwrap();
        assert_eq!(docs.len(), 2);
        assert!(docs.iter().all(|d| d.is_ok()));
    }
}

//! Parses a PubMed efetch batch and a PMC JATS article into provenance
//! records, then merges them into one source list.

use aptamine::metadataxml::{parse_pmc_fulltext_xml, parse_pubmed_records, SourceSet};

const PUBMED: &str = r#"<PubmedArticleSet>
 <PubmedArticle>
  <MedlineCitation><PMID>30000001</PMID>
   <Article>
    <Journal><JournalIssue><PubDate><Year>2018</Year></PubDate></JournalIssue><Title>Nucleic Acids Research</Title></Journal>
    <ArticleTitle>Selection of a DNA aptamer against human thrombin</ArticleTitle>
    <Abstract><AbstractText>We report a DNA aptamer that binds thrombin with Kd = 25 nM.</AbstractText></Abstract>
    <AuthorList><Author><LastName>Garcia</LastName><Initials>ML</Initials></Author></AuthorList>
   </Article>
  </MedlineCitation>
  <PubmedData><ArticleIdList>
   <ArticleId IdType="pubmed">30000001</ArticleId>
   <ArticleId IdType="pmc">PMC6100001</ArticleId>
  </ArticleIdList></PubmedData>
 </PubmedArticle>
</PubmedArticleSet>"#;

const JATS: &str = include_str!("../tests/fixtures/pmc_article.xml");

fn main() {
    let pubmed = parse_pubmed_records(PUBMED).expect("well-formed batch");
    let pmc = parse_pmc_fulltext_xml(JATS).expect("well-formed article");

    for rec in &pubmed.records {
        let m = &rec.metadata;
        println!("PubMed {:?} {:?} {} ({:?})", m.pmid, m.pmcid, m.title, m.year);
    }
    println!("PMC    {:?} {:?} {}", pmc.metadata.pmid, pmc.metadata.pmcid, pmc.metadata.title);
    for s in &pmc.sections {
        println!("  {:?}: {} bytes", s.title, s.end - s.start);
    }

    let mut sources = SourceSet::new();
    for rec in pubmed.records {
        sources.insert(rec.metadata);
    }
    sources.insert(pmc.metadata);
    println!("unique sources: {}", sources.len());
    for a in sources.into_sorted() {
        println!("  {} -> {}", a.provenance_key(), a.link().unwrap_or_default());
    }
}

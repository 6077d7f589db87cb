//! Runs esearch, efetch and a bioRxiv search through canned responses. Swap
//! `FixtureTransport` for `Fetcher::live` to hit the real services.

use std::sync::Arc;

use aptamine::metadataxml::parse_pubmed_records;
use aptamine::netdiscovery::{harvest_supplements, Database, Fetcher, FixtureTransport, HttpResponse, NetConfig};

const ESEARCH: &str = "<eSearchResult><Count>2</Count><IdList><Id>111</Id><Id>222</Id></IdList></eSearchResult>";
const EFETCH: &str = r#"<PubmedArticleSet>
<PubmedArticle><MedlineCitation><PMID>111</PMID><Article><ArticleTitle>Thrombin aptamers</ArticleTitle></Article></MedlineCitation></PubmedArticle>
<PubmedArticle><MedlineCitation><PMID>222</PMID><Article><ArticleTitle>Aptamer sensors</ArticleTitle></Article></MedlineCitation></PubmedArticle>
</PubmedArticleSet>"#;
const BIORXIV: &str = r#"<html><body><div class="highwire-search-summary">1 result</div><ul>
<li class="search-result"><a class="highwire-cite-linked-title" href="/content/10.1101/2021.05.01.442233v1">An aptamer for thrombin</a>
<span class="highwire-cite-metadata-doi">doi: https://doi.org/10.1101/2021.05.01.442233</span></li></ul></body></html>"#;
const LANDING: &str = r#"<a href="/pmc/articles/PMC1/bin/NIHMS1-supplement-1.pdf">Supplementary Material</a>
<a href="table_s1.xlsx">Supporting Information</a><a href="/about">About</a>"#;

fn main() {
    let transport = FixtureTransport::new()
        .route("esearch.fcgi", HttpResponse::new(200, "text/xml", ESEARCH))
        .route("efetch.fcgi", HttpResponse::new(200, "text/xml", EFETCH))
        .route("/search/thrombin", HttpResponse::new(200, "text/html", BIORXIV));
    let config = NetConfig {
        contact_email: "me@example.org".into(),
        ..NetConfig::default()
    };
    let fetcher = Fetcher::new(config, Arc::new(transport)).expect("valid config");

    let ids = fetcher.esearch("\"thrombin\" AND aptamer", Database::Pubmed).expect("esearch");
    println!("esearch ids {ids:?}");
    for batch in fetcher.efetch(&ids, Database::Pubmed).expect("efetch") {
        let parsed = parse_pubmed_records(batch.text().expect("utf-8")).expect("xml");
        for r in parsed.records {
            println!("  {:?} {}", r.metadata.pmid, r.metadata.title);
        }
    }
    for p in fetcher.search_biorxiv("thrombin").expect("biorxiv") {
        println!("bioRxiv {:?} {:?} {}", p.doi, p.year, p.title);
    }
    for link in harvest_supplements(LANDING, "https://www.ncbi.nlm.nih.gov/pmc/articles/PMC1/") {
        println!("supplement {:?} {}", link.kind, link.url);
    }
}

use serde::{Deserialize, Serialize};
use url::Url;

use super::{FetchRequest, FetchResult, Fetcher, HostClass, NetConfig, NetError, Purpose};

/// Identifiers per efetch request.
pub const EFETCH_BATCH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Database {
    Pubmed,
    Pmc,
}

impl Database {
    pub fn as_str(self) -> &'static str {
        match self {
            Database::Pubmed => "pubmed",
            Database::Pmc => "pmc",
        }
    }
}

fn endpoint(config: &NetConfig, name: &str, params: &[(&str, &str)]) -> String {
    let base = config.eutils_base.trim_end_matches('/');
    let mut url = Url::parse(&format!("{base}/{name}")).expect("eutils base is validated");
    {
        let mut q = url.query_pairs_mut();
        for (k, v) in params {
            q.append_pair(k, v);
        }
        if let Some(key) = &config.api_key {
            q.append_pair("api_key", key);
        }
    }
    url.into()
}

pub fn esearch_url(config: &NetConfig, db: Database, query: &str) -> String {
    let retmax = config.retmax.to_string();
    endpoint(config, "esearch.fcgi", &[
        ("db", db.as_str()),
        ("term", query),
        ("retmax", &retmax),
        ("retmode", "xml"),
    ])
}

/// One URL per batch of at most [`EFETCH_BATCH`] identifiers.
pub fn efetch_urls(config: &NetConfig, db: Database, ids: &[String]) -> Vec<String> {
    ids.chunks(EFETCH_BATCH)
        .map(|batch| {
            endpoint(config, "efetch.fcgi", &[
                ("db", db.as_str()),
                ("id", &batch.join(",")),
                ("retmode", "xml"),
            ])
        })
        .collect()
}

/// Identifiers from an esearch XML response, in server order.
pub fn parse_esearch(xml: &str) -> Result<Vec<String>, NetError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| NetError::MalformedResponse(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "eSearchResult" {
        return Err(NetError::MalformedResponse(format!(
            "expected eSearchResult, found {}",
            root.tag_name().name()
        )));
    }
    let child = |name: &str| root.children().find(|n| n.has_tag_name(name));
    match child("IdList") {
        Some(list) => list
            .children()
            .filter(|n| n.is_element())
            .map(|n| {
                let id = n.text().unwrap_or_default().trim();
                if n.has_tag_name("Id") && !id.is_empty() {
                    Ok(id.to_string())
                } else {
                    Err(NetError::MalformedResponse(format!("bad IdList entry {:?}", n.tag_name().name())))
                }
            })
            .collect(),
        None => {
            // Zero-hit responses may omit IdList but still report a count.
            let zero = child("Count").and_then(|c| c.text()).map(str::trim) == Some("0");
            let error = child("ERROR").and_then(|e| e.text()).map(str::trim);
            match (zero, error) {
                (true, _) => Ok(Vec::new()),
                (false, Some(e)) => Err(NetError::MalformedResponse(format!("server error: {e}"))),
                (false, None) => Err(NetError::MalformedResponse("no IdList in esearch response".into())),
            }
        }
    }
}

fn require_success(result: FetchResult, url: &str) -> Result<FetchResult, NetError> {
    if result.is_success() {
        Ok(result)
    } else {
        Err(NetError::Http {
            status: result.status,
            url: url.to_string(),
        })
    }
}

impl Fetcher {
    pub fn esearch(&self, query: &str, db: Database) -> Result<Vec<String>, NetError> {
        if query.trim().is_empty() {
            return Err(NetError::Precondition("esearch query is empty".into()));
        }
        let url = esearch_url(self.config(), db, query);
        let result = require_success(self.acquire(&FetchRequest::new(&url, HostClass::Ncbi, Purpose::Search))?, &url)?;
        parse_esearch(result.text()?)
    }

    /// Raw XML for `ids`, one result per batch.
    pub fn efetch(&self, ids: &[String], db: Database) -> Result<Vec<FetchResult>, NetError> {
        if ids.is_empty() {
            return Err(NetError::Precondition("efetch needs at least one id".into()));
        }
        efetch_urls(self.config(), db, ids)
            .into_iter()
            .map(|url| {
                let result = self.acquire(&FetchRequest::new(&url, HostClass::Ncbi, Purpose::Fetch))?;
                let result = require_success(result, &url)?;
                if result.text()?.trim().is_empty() {
                    return Err(NetError::MalformedResponse(format!("empty efetch body from {url}")));
                }
                Ok(result)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::testing::quick_config;
    use super::super::{FixtureTransport, HttpResponse};
    use super::*;
    use std::sync::Arc;

    const TWO_IDS: &str = "<eSearchResult><Count>2</Count><RetMax>2</RetMax><IdList><Id>111</Id><Id>222</Id></IdList></eSearchResult>";

    #[test]
    fn ids_in_server_order() {
        assert_eq!(parse_esearch(TWO_IDS).unwrap(), vec!["111", "222"]);
        let reversed = TWO_IDS.replace("111", "x").replace("222", "111").replace('x', "222");
        assert_eq!(parse_esearch(&reversed).unwrap(), vec!["222", "111"]);
    }

    #[test]
    fn zero_hits() {
        assert!(parse_esearch("<eSearchResult><Count>0</Count><IdList/></eSearchResult>").unwrap().is_empty());
        let no_list = "<eSearchResult><Count>0</Count><ErrorList><PhraseNotFound>zz</PhraseNotFound></ErrorList></eSearchResult>";
        assert!(parse_esearch(no_list).unwrap().is_empty());
    }

    #[test]
    fn malformed_responses() {
        for bad in [
            "<html>busy</html>",
            "<eSearchResult><Count>3</Count></eSearchResult>",
            "<eSearchResult><ERROR>Invalid query</ERROR></eSearchResult>",
            "<eSearchResult><IdList><Id></Id></IdList></eSearchResult>",
            "not xml",
        ] {
            assert!(matches!(parse_esearch(bad), Err(NetError::MalformedResponse(_))), "{bad}");
        }
    }

    #[test]
    fn wire_format() {
        let mut c = quick_config();
        c.retmax = 50;
        assert_eq!(
            esearch_url(&c, Database::Pubmed, "thrombin aptamer"),
            "http://mock.test/eutils/esearch.fcgi?db=pubmed&term=thrombin+aptamer&retmax=50&retmode=xml"
        );
        c.api_key = Some("KEY".into());
        let ids: Vec<String> = vec!["1".into(), "2".into()];
        assert_eq!(efetch_urls(&c, Database::Pmc, &ids), vec![
            "http://mock.test/eutils/efetch.fcgi?db=pmc&id=1%2C2&retmode=xml&api_key=KEY".to_string()
        ]);
    }

    #[test]
    fn efetch_batches() {
        let t = Arc::new(FixtureTransport::new().route("efetch.fcgi", HttpResponse::new(200, "text/xml", "<x/>")));
        let f = Fetcher::new(quick_config(), t.clone()).unwrap();
        let ids: Vec<String> = (0..250).map(|i| i.to_string()).collect();
        assert_eq!(f.efetch(&ids[..1], Database::Pubmed).unwrap().len(), 1);
        assert_eq!(f.efetch(&ids, Database::Pubmed).unwrap().len(), 2);
        assert_eq!(t.requests().len(), 3);
        assert!(matches!(f.efetch(&[], Database::Pubmed), Err(NetError::Precondition(_))));
        assert_eq!(t.requests().len(), 3);
    }

    #[test]
    fn esearch_through_fetcher() {
        let t = Arc::new(
            FixtureTransport::new()
                .route("term=thrombin", HttpResponse::new(200, "text/xml", TWO_IDS))
                .route("term=nothing", HttpResponse::new(400, "text/plain", "bad")),
        );
        let f = Fetcher::new(quick_config(), t).unwrap();
        assert_eq!(f.esearch("thrombin", Database::Pubmed).unwrap(), vec!["111", "222"]);
        assert!(matches!(f.esearch("nothing", Database::Pmc), Err(NetError::Http { status: 400, .. })));
        assert!(matches!(f.esearch("  ", Database::Pmc), Err(NetError::Precondition(_))));
    }
}

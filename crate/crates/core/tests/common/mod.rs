//! Shared fixtures for integration tests: a scripted HTTP server, an
//! in-process literature corpus behind a closure transport, and random
//! sequence helpers.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Instant;

use aptamine::config::RunConfig;
use aptamine::netdiscovery::{HttpRequest, HttpResponse, HttpTransport, TransportError};
use rand::Rng;
use url::Url;

pub const EMPTY_ESEARCH: &str =
    "<eSearchResult><Count>0</Count><RetMax>0</RetMax><RetStart>0</RetStart><IdList></IdList></eSearchResult>";

/// Local HTTP server answering with scripted statuses, then 200. Arrival
/// times of every request are recorded.
pub struct ScriptedServer {
    pub base: String,
    server: Arc<tiny_http::Server>,
    arrivals: Arc<Mutex<Vec<Instant>>>,
    handle: Option<JoinHandle<()>>,
}

impl ScriptedServer {
    pub fn start(script: Vec<u16>) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind mock server"));
        let port = server.server_addr().to_ip().expect("ip listener").port();
        let arrivals = Arc::new(Mutex::new(Vec::new()));
        let handle = {
            let server = server.clone();
            let arrivals = arrivals.clone();
            std::thread::spawn(move || {
                let mut script = script.into_iter();
                for req in server.incoming_requests() {
                    arrivals.lock().unwrap().push(Instant::now());
                    let status = script.next().unwrap_or(200);
                    let body = if status == 200 { EMPTY_ESEARCH } else { "busy" };
                    let resp = tiny_http::Response::from_string(body).with_status_code(status);
                    let _ = req.respond(resp);
                }
            })
        };
        ScriptedServer {
            base: format!("http://127.0.0.1:{port}"),
            server,
            arrivals,
            handle: Some(handle),
        }
    }

    pub fn arrivals(&self) -> Vec<Instant> {
        self.arrivals.lock().unwrap().clone()
    }
}

impl Drop for ScriptedServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// Bases whose GC fraction lies in [0.4, 0.6], so the core is valid for
/// default bounds.
pub fn random_core(rng: &mut impl Rng, len: usize) -> String {
    loop {
        let s: String = (0..len).map(|_| ['A', 'C', 'G', 'T'][rng.gen_range(0..4)]).collect();
        let gc = s.chars().filter(|c| matches!(c, 'G' | 'C')).count();
        if gc * 5 >= len * 2 && gc * 5 <= len * 3 {
            return s;
        }
    }
}

pub fn random_core_between(rng: &mut impl Rng, lens: std::ops::Range<usize>) -> String {
    let n = rng.gen_range(lens);
    random_core(rng, n)
}

pub fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One article. A `pmc` id makes it available as PMC full text with
/// `body` paragraphs.
#[derive(Debug, Clone, Default)]
pub struct Paper {
    pub pmid: u32,
    pub pmc: Option<u32>,
    pub title: String,
    pub abstract_text: String,
    pub body: Vec<String>,
    pub year: i32,
    pub journal: String,
    /// Plain-text supplement linked from the PMC landing page.
    pub supplement: Option<String>,
}

impl Paper {
    pub fn new(pmid: u32, title: &str, abstract_text: &str) -> Self {
        Paper {
            pmid,
            title: title.into(),
            abstract_text: abstract_text.into(),
            year: 2015 + (pmid % 8) as i32,
            journal: "Journal of Test Chemistry".into(),
            ..Paper::default()
        }
    }

    pub fn with_body(mut self, pmc: u32, body: &[String]) -> Self {
        self.pmc = Some(pmc);
        self.body = body.to_vec();
        self
    }

    pub fn pubmed_xml(&self) -> String {
        let pmc = self
            .pmc
            .map(|p| format!("<ArticleId IdType=\"pmc\">PMC{p}</ArticleId>"))
            .unwrap_or_default();
        format!(
            "<PubmedArticle><MedlineCitation><PMID>{pmid}</PMID><Article>\
             <Journal><JournalIssue><PubDate><Year>{year}</Year></PubDate></JournalIssue><Title>{journal}</Title></Journal>\
             <ArticleTitle>{title}</ArticleTitle><Abstract><AbstractText>{abs}</AbstractText></Abstract>\
             <AuthorList><Author><LastName>Author</LastName><Initials>A</Initials></Author></AuthorList>\
             </Article></MedlineCitation><PubmedData><ArticleIdList>\
             <ArticleId IdType=\"pubmed\">{pmid}</ArticleId><ArticleId IdType=\"doi\">10.5555/test.{pmid}</ArticleId>{pmc}\
             </ArticleIdList></PubmedData></PubmedArticle>",
            pmid = self.pmid,
            year = self.year,
            journal = xml_escape(&self.journal),
            title = xml_escape(&self.title),
            abs = xml_escape(&self.abstract_text),
        )
    }

    pub fn jats_xml(&self) -> String {
        let paras: String = self.body.iter().map(|p| format!("<p>{}</p>", xml_escape(p))).collect();
        format!(
            "<article><front><journal-meta><journal-title-group><journal-title>{journal}</journal-title></journal-title-group></journal-meta>\
             <article-meta><article-id pub-id-type=\"pmid\">{pmid}</article-id><article-id pub-id-type=\"pmc\">{pmc}</article-id>\
             <article-id pub-id-type=\"doi\">10.5555/test.{pmid}</article-id>\
             <title-group><article-title>{title}</article-title></title-group>\
             <pub-date><year>{year}</year></pub-date><abstract><p>{abs}</p></abstract></article-meta></front>\
             <body><sec><title>Results</title>{paras}</sec></body></article>",
            journal = xml_escape(&self.journal),
            pmid = self.pmid,
            pmc = self.pmc.unwrap_or_default(),
            title = xml_escape(&self.title),
            year = self.year,
            abs = xml_escape(&self.abstract_text),
        )
    }
}

/// What the mock services return for one target.
#[derive(Debug, Clone, Default)]
pub struct TargetFixture {
    pub name: String,
    /// PubMed ids returned by sequence-specific queries.
    pub specific: Vec<u32>,
    /// PubMed ids returned by fallback queries.
    pub broad: Vec<u32>,
    /// PMC ids returned by every PMC query.
    pub pmc: Vec<u32>,
    /// bioRxiv `(doi, title)` records.
    pub preprints: Vec<(String, String)>,
}

/// In-process stand-in for E-utilities, PMC landing pages and bioRxiv.
#[derive(Debug, Default)]
pub struct Literature {
    pub targets: Vec<TargetFixture>,
    pub papers: BTreeMap<u32, Paper>,
    requests: AtomicUsize,
}

fn ok(content_type: &str, body: String) -> Result<HttpResponse, TransportError> {
    Ok(HttpResponse::new(200, content_type, body))
}

impl Literature {
    pub fn add(&mut self, paper: Paper) {
        self.papers.insert(paper.pmid, paper);
    }

    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn target_names(&self) -> Vec<String> {
        self.targets.iter().map(|t| t.name.clone()).collect()
    }

    fn target_for_term(&self, term: &str) -> Option<&TargetFixture> {
        let t = term.trim_start_matches('"').to_lowercase();
        self.targets
            .iter()
            .filter(|f| {
                let n = f.name.to_lowercase();
                t.strip_prefix(&n).is_some_and(|rest| rest.starts_with(['"', ' ']) || rest.is_empty())
            })
            .max_by_key(|f| f.name.len())
    }

    fn by_pmc(&self, pmc: u32) -> Option<&Paper> {
        self.papers.values().find(|p| p.pmc == Some(pmc))
    }

    pub fn respond(&self, url: &str) -> Result<HttpResponse, TransportError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let u = Url::parse(url).map_err(|e| TransportError::Other(e.to_string()))?;
        let q: BTreeMap<String, String> = u.query_pairs().into_owned().collect();
        let path = u.path().to_string();
        let db = q.get("db").map(String::as_str).unwrap_or("");
        if path.ends_with("esearch.fcgi") {
            let term = q.get("term").cloned().unwrap_or_default();
            let ids: Vec<u32> = match (self.target_for_term(&term), db) {
                (Some(t), "pubmed") if term.contains(" AND aptamer AND ") => t.specific.clone(),
                (Some(t), "pubmed") => t.broad.clone(),
                (Some(t), "pmc") => t.pmc.clone(),
                _ => Vec::new(),
            };
            let list: String = ids.iter().map(|i| format!("<Id>{i}</Id>")).collect();
            return ok(
                "text/xml",
                format!("<eSearchResult><Count>{}</Count><IdList>{list}</IdList></eSearchResult>", ids.len()),
            );
        }
        if path.ends_with("efetch.fcgi") {
            let ids: Vec<u32> = q
                .get("id")
                .map(|s| s.split(',').filter_map(|i| i.parse().ok()).collect())
                .unwrap_or_default();
            return match db {
                "pubmed" => {
                    let inner: String = ids.iter().filter_map(|i| self.papers.get(i)).map(Paper::pubmed_xml).collect();
                    ok("text/xml", format!("<PubmedArticleSet>{inner}</PubmedArticleSet>"))
                }
                _ => {
                    let inner: String = ids.iter().filter_map(|i| self.by_pmc(*i)).map(Paper::jats_xml).collect();
                    ok("text/xml", format!("<pmc-articleset>{inner}</pmc-articleset>"))
                }
            };
        }
        if let Some(rest) = path.split("/articles/PMC").nth(1) {
            let pmc: u32 = rest.split('/').next().and_then(|s| s.parse().ok()).unwrap_or_default();
            let Some(paper) = self.by_pmc(pmc) else {
                return Ok(HttpResponse::new(404, "text/html", "not found"));
            };
            if path.ends_with("supplementary_data.txt") {
                return match &paper.supplement {
                    Some(s) => ok("text/plain", s.clone()),
                    None => Ok(HttpResponse::new(404, "text/plain", "not found")),
                };
            }
            let link = if paper.supplement.is_some() {
                "<a href=\"bin/supplementary_data.txt\">Supplementary Material</a>"
            } else {
                ""
            };
            return ok("text/html", format!("<html><body><h1>{}</h1>{link}</body></html>", xml_escape(&paper.title)));
        }
        if let Some(rest) = path.split("/search/").nth(1) {
            let name = percent_decode(rest);
            let preprints = self
                .targets
                .iter()
                .find(|t| t.name.eq_ignore_ascii_case(&name))
                .map(|t| t.preprints.clone())
                .unwrap_or_default();
            let items: String = preprints
                .iter()
                .map(|(doi, title)| {
                    format!(
                        "<li class=\"search-result\"><a class=\"highwire-cite-linked-title\" href=\"/content/{doi}v1\">{}</a>\
                         <span class=\"highwire-cite-metadata-doi\">doi: https://doi.org/{doi}</span>\
                         <span class=\"highwire-citation-author\">Author A</span></li>",
                        xml_escape(title)
                    )
                })
                .collect();
            return ok(
                "text/html",
                format!(
                    "<html><body><div class=\"highwire-search-summary\">{} results</div><ul>{items}</ul></body></html>",
                    preprints.len()
                ),
            );
        }
        Ok(HttpResponse::new(404, "text/plain", "not found"))
    }

    pub fn transport(self: &Arc<Self>) -> Arc<dyn HttpTransport> {
        let lit = self.clone();
        Arc::new(move |r: &HttpRequest| lit.respond(&r.url))
    }

    /// Ten targets covering every tier and every retrieval path.
    pub fn ten_targets() -> Self {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
        let mut seq = |n| random_core(&mut rng, n);
        let mut lit = Literature::default();
        let filler = "Measurements were repeated on three separate days with freshly prepared buffers, and the \
                      results were averaged after subtraction of the signal recorded for the empty sensor surface \
                      under otherwise identical conditions."
            .to_string();

        let (s1, s2) = (seq(29), seq(33));
        lit.add(Paper::new(
            1001,
            "DNA aptamers against thrombin",
            &format!("Aptamers were selected against thrombin by SELEX. The aptamer TB-1 (5'-{s1}-3') bound thrombin with Kd = 12 nM in PBS, pH 7.4."),
        ));
        lit.add(
            Paper::new(1002, "Truncation of thrombin aptamers", "We report shorter aptamers for thrombin.")
                .with_body(2002, &[
                    "Thrombin binding was tested for the truncated aptamer variants.".into(),
                    format!("The aptamer TB-2 ({s2}) bound thrombin with Kd = 40 nM at 25 °C."),
                    format!("Variant TB-1 (5'-{s1}-3') was included as a control aptamer for thrombin."),
                ]),
        );
        lit.targets.push(TargetFixture {
            name: "thrombin".into(),
            specific: vec![1001, 1002],
            pmc: vec![2002],
            ..Default::default()
        });

        let (v1, v2) = (seq(27), seq(31));
        let mut vegf = Paper::new(1011, "Fluorescent aptamer probes for VEGF", "A labelled aptamer for VEGF.").with_body(2011, &[
            format!("The aptamer 5'-^FAM-{v1}-3' bound VEGF with IC50 = 3.5 nM."),
            filler.clone(),
        ]);
        vegf.supplement = Some(format!(
            "Supplementary Table S1\n\nA second aptamer for VEGF, V-7 ({v2}), bound VEGF with Kd = 0.8 µM.\n"
        ));
        lit.add(vegf);
        lit.targets.push(TargetFixture {
            name: "VEGF".into(),
            pmc: vec![2011],
            ..Default::default()
        });

        lit.add(Paper::new(
            1021,
            "Aptamer-based sensors for lysozyme",
            "We review aptamer sensors for lysozyme detection in egg white and tears.",
        ));
        lit.targets.push(TargetFixture {
            name: "lysozyme".into(),
            broad: vec![1021],
            ..Default::default()
        });

        let p1 = seq(36);
        lit.add(Paper::new(
            1031,
            "Selection of aptamers for prostate specific antigen",
            &format!("An aptamer for prostate specific antigen, PSA-A ({p1}), bound prostate specific antigen with Kd = 2.1 nM."),
        ));
        lit.targets.push(TargetFixture {
            name: "prostate specific antigen".into(),
            specific: vec![1031],
            ..Default::default()
        });

        let (a1, pr1, pr2) = (seq(25), seq(22), seq(21));
        lit.add(
            Paper::new(1041, "An ATP aptamer switch", &format!("The aptamer 5'-{a1}-3' bound ATP with Kd = 6 µM."))
                .with_body(2041, &[
                    format!("Aptamer {a1} recognized ATP in 20 mM Tris."),
                    filler.clone(),
                    format!("The forward primer {pr1} and reverse primer {pr2} were used for PCR amplification."),
                ]),
        );
        lit.targets.push(TargetFixture {
            name: "ATP".into(),
            specific: vec![1041],
            pmc: vec![2041],
            ..Default::default()
        });

        lit.targets.push(TargetFixture {
            name: "cocaine".into(),
            preprints: vec![
                ("10.1101/2021.03.04.433900".into(), "A structure-switching aptamer for cocaine detection".into()),
                ("10.1101/2020.11.02.365123".into(), "Cocaine metabolism in liver microsomes".into()),
            ],
            ..Default::default()
        });

        lit.add(Paper::new(
            1061,
            "Streptavidin-biotin amplification in ELISA",
            "Streptavidin conjugates improved signal in sandwich assays.",
        ));
        lit.targets.push(TargetFixture {
            name: "streptavidin".into(),
            broad: vec![1061],
            ..Default::default()
        });

        lit.targets.push(TargetFixture {
            name: "nucleolin".into(),
            ..Default::default()
        });

        let d1 = seq(35);
        lit.add(Paper::new(
            1081,
            "Aptamers against PDGF-BB",
            &format!("SELEX yielded aptamer 36t ({d1}) that bound PDGF-BB with Kd = 0.1 nM."),
        ));
        lit.targets.push(TargetFixture {
            name: "PDGF-BB".into(),
            specific: vec![1081],
            ..Default::default()
        });

        lit.add(
            Paper::new(1091, "Allergy diagnostics", "Serum antibody levels in allergic patients.").with_body(2091, &[
                "Aptamers that recognise human IgE are promising reagents for allergy diagnostics.".into(),
                "Their sequences were not disclosed by the vendor.".into(),
            ]),
        );
        lit.targets.push(TargetFixture {
            name: "human IgE".into(),
            pmc: vec![2091],
            ..Default::default()
        });
        lit
    }
}

fn percent_decode(s: &str) -> String {
    url::form_urlencoded::parse(format!("x={}", s.replace('+', "%2B")).as_bytes())
        .next()
        .map(|(_, v)| v.into_owned())
        .unwrap_or_default()
}

/// Expected tier number per target of [`Literature::ten_targets`].
pub const TEN_TARGET_TIERS: [(&str, u8); 10] = [
    ("thrombin", 1),
    ("VEGF", 1),
    ("lysozyme", 2),
    ("prostate specific antigen", 1),
    ("ATP", 1),
    ("cocaine", 2),
    ("streptavidin", 3),
    ("nucleolin", 3),
    ("PDGF-BB", 1),
    ("human IgE", 2),
];

/// Config for a mocked run rooted in `dir`: fast limiter, tiny backoff,
/// placeholder bases and the given targets.
pub fn mocked_config(dir: &Path, targets: &[String], workers: usize) -> RunConfig {
    let mut c = RunConfig::default();
    c.run.targets = targets.to_vec();
    c.run.store_path = dir.join("store.db");
    c.run.out_dir = dir.join("out");
    c.run.workers = workers;
    c.net.eutils_base = "http://mock.test/entrez/eutils".into();
    c.net.pmc_base = "http://mock.test/pmc".into();
    c.net.biorxiv_base = "http://mock.test".into();
    c.net.limits.ncbi_rps = 10_000.0;
    c.net.limits.ncbi_rps_with_key = 10_000.0;
    c.net.limits.publisher_rps = 10_000.0;
    c.net.limits.biorxiv_rps = 10_000.0;
    c.net.limits.base_backoff_s = 0.001;
    c
}

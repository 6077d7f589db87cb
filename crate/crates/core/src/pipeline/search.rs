use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use tracing::{debug, info, info_span, warn};

use super::mine::{Mined, Miner};
use super::{Pipeline, PipelineError};
use crate::config::ConfigError;
use crate::curate::{dedup, CuratedSequence, RunRecord, Store};
use crate::docingest::{extract_text, KeywordIndex};
use crate::metadataxml::{parse_pmc_articleset, parse_pubmed_records, ArticleMetadata, PmcDocument, SourceSet};
use crate::netdiscovery::{
    harvest_supplements, BrowserHook, Database, FetchRequest, Fetcher, HostClass, Purpose, SupplementLink,
};
use crate::querygen::{make_plan, QuerySource, StageLabel};
use crate::semfilter::{is_aptamer_reference, mentions, SemanticFilter};
use crate::tierreport::{emit_report, summarize_run, unique_slugs, write_summary, RunStats, RunSummary, TargetReport};

/// Supplement files fetched per article at most.
const MAX_SUPPLEMENTS: usize = 5;

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// `out_dir/{run_timestamp}`.
    pub run_dir: PathBuf,
    /// In target order.
    pub reports: Vec<TargetReport>,
    pub summary: RunSummary,
    pub files: Vec<PathBuf>,
}

/// Shared state of one `search` run.
struct Shared<'a> {
    pipeline: &'a Pipeline,
    store: Mutex<Store>,
    index: KeywordIndex,
    fetcher: Option<Fetcher>,
    filter: SemanticFilter,
    browser: Option<BrowserHook>,
}

/// Accumulates the evidence for one target.
struct TargetRun<'a> {
    shared: &'a Shared<'a>,
    miner: Miner<'a>,
    target: String,
    stats: RunStats,
    found: Vec<CuratedSequence>,
    sources: SourceSet,
    lead_candidates: SourceSet,
    seen_ids: HashSet<(Database, String)>,
}

fn run_dir_name(pipeline: &Pipeline) -> String {
    pipeline.clock.now().format("%Y%m%dT%H%M%SZ").to_string()
}

fn fresh_dir(base: &Path, name: &str) -> PathBuf {
    let mut dir = base.join(name);
    let mut n = 1;
    while dir.exists() {
        n += 1;
        dir = base.join(format!("{name}-{n}"));
    }
    dir
}

impl Pipeline {
    /// Runs every target and writes reports plus `summary.json`. When
    /// `pdf_dir` is set, new documents are ingested first.
    pub fn search(&self) -> Result<SearchOutcome, PipelineError> {
        let started = Instant::now();
        let started_at = self.clock.now();
        let targets = self.config.resolve_targets()?;
        if targets.is_empty() {
            return Err(ConfigError::Invalid("search needs at least one target".into()).into());
        }
        if self.config.run.pdf_dir.is_some() {
            let s = self.ingest()?;
            info!(files = s.files.len(), sequences = s.sequences_stored, "local documents ingested");
        }
        let browser = match &self.config.net.browser_cmd {
            Some(cmd) => Some(BrowserHook::new(cmd).map_err(|e| ConfigError::Invalid(e.to_string()))?),
            None => None,
        };
        let shared = Shared {
            pipeline: self,
            store: Mutex::new(self.open_store()?),
            index: KeywordIndex::load(&self.config.index_path())?,
            fetcher: if self.config.run.offline { None } else { Some(self.fetcher()?) },
            filter: self.filter(),
            browser,
        };
        let run_dir = fresh_dir(&self.config.run.out_dir, &run_dir_name(self));
        let stems = unique_slugs(&targets);

        let next = AtomicUsize::new(0);
        type Slot = Option<Result<(TargetReport, Vec<PathBuf>), PipelineError>>;
        let results: Mutex<Vec<Slot>> = Mutex::new((0..targets.len()).map(|_| None).collect());
        std::thread::scope(|s| {
            for _ in 0..self.config.run.workers.min(targets.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(target) = targets.get(i) else { break };
                    let span = info_span!("target", cid = %format!("t{:04}", i + 1), name = %target);
                    let _enter = span.enter();
                    let r = shared.run_target(target).and_then(|report| {
                        let files = emit_report(&report, &self.config.run.formats, &run_dir, Some(&stems[i]))?;
                        info!(tier = report.tier.number(), sequences = report.curated.len(), "target done");
                        Ok((report, files))
                    });
                    results.lock().expect("results lock")[i] = Some(r);
                });
            }
        });

        let mut reports = Vec::with_capacity(targets.len());
        let mut files = Vec::new();
        for r in results.into_inner().expect("results lock") {
            let (report, f) = r.expect("every target processed")?;
            reports.push(report);
            files.extend(f);
        }
        let summary = summarize_run(&reports, started.elapsed(), self.clock.now(), &self.config.fingerprint())?;
        files.push(write_summary(&summary, &run_dir)?);
        shared.store.lock().expect("store lock").record_run(&RunRecord {
            started_at,
            finished_at: self.clock.now(),
            command: "search".into(),
            summary: serde_json::to_value(&summary).expect("summary serializes"),
        })?;
        Ok(SearchOutcome {
            run_dir,
            reports,
            summary,
            files,
        })
    }
}

impl<'a> Shared<'a> {
    fn run_target(&'a self, target: &str) -> Result<TargetReport, PipelineError> {
        let p = self.pipeline;
        let started_at = p.clock.now();
        let mut run = TargetRun {
            shared: self,
            miner: Miner {
                filter: &self.filter,
                bounds: p.config.sequence,
                curate: &p.config.curate,
                created_at: started_at,
                model_name: &p.config.semfilter.model,
            },
            target: target.to_string(),
            stats: RunStats::default(),
            found: Vec::new(),
            sources: SourceSet::new(),
            lead_candidates: SourceSet::new(),
            seen_ids: HashSet::new(),
        };
        let stored = self.store.lock().expect("store lock").query_store(target)?;
        debug!(stored = stored.len(), "local store checked");
        for rec in &stored {
            for a in &rec.articles {
                run.sources.insert(a.clone());
            }
        }
        run.search_local_index();
        if let Some(fetcher) = &self.fetcher {
            run.search_online(fetcher, !stored.is_empty());
        }

        let found = dedup(std::mem::take(&mut run.found));
        let curated = {
            let mut store = self.store.lock().expect("store lock");
            for rec in &found {
                store.upsert(rec)?;
            }
            store.query_store(target)?
        };
        let cited: Vec<&ArticleMetadata> = curated.iter().flat_map(|c| c.articles.iter()).collect();
        let leads: Vec<ArticleMetadata> = std::mem::take(&mut run.lead_candidates)
            .into_sorted()
            .into_iter()
            .filter(|l| !cited.iter().any(|c| c.same_article(l)))
            .collect();
        for l in &leads {
            run.sources.insert(l.clone());
        }
        let mut stats = run.stats;
        let elapsed = p.clock.now() - started_at;
        stats.wall_time_ms = elapsed.num_milliseconds().max(0) as u64;
        let sources = std::mem::take(&mut run.sources).into_sorted();
        Ok(TargetReport::new(target, curated, leads, sources, stats))
    }
}

impl TargetRun<'_> {
    fn absorb(&mut self, mined: Mined) -> usize {
        self.stats.model_calls += mined.model_calls;
        self.stats.fallbacks += mined.fallbacks;
        let n = mined.kept.len();
        self.found.extend(mined.kept);
        n
    }

    /// Scans `text` from `article`; the article becomes a lead when nothing
    /// is kept but it still discusses aptamers for the target.
    fn examine(&mut self, article: &ArticleMetadata, text: &str, abstract_text: Option<&str>, doc: Option<&str>) -> usize {
        self.sources.insert(article.clone());
        let mined = self.miner.mine(text, abstract_text, &self.target, article, doc);
        let kept = self.absorb(mined);
        let about = format!("{}\n{}\n{}", article.title, abstract_text.unwrap_or(""), text);
        if kept == 0 && is_aptamer_reference(&about, &self.target) {
            self.lead_candidates.insert(article.clone());
        }
        kept
    }

    fn search_local_index(&mut self) {
        let index = &self.shared.index;
        if index.is_empty() {
            return;
        }
        let hits = match index.query(&self.target) {
            Ok(h) => h,
            Err(e) => {
                debug!(error = %e, "target has no searchable terms");
                return;
            }
        };
        self.stats.queries_issued += 1;
        for hit in hits {
            let chunk = hit.chunk;
            if !mentions(&chunk.text, &self.target) {
                continue;
            }
            let Some(doc) = index.document(&chunk.doc_id) else { continue };
            let meta = doc.metadata.clone();
            self.examine(&meta, &chunk.text, None, Some(&chunk.doc_id));
        }
    }

    fn search_online(&mut self, fetcher: &Fetcher, stored: bool) {
        let plan = match make_plan(&self.target, &self.shared.pipeline.config.queries) {
            Ok(p) => p,
            Err(e) => {
                warn!(error = %e, "no query plan");
                return;
            }
        };
        for stage in &plan.stages {
            if stage.label == StageLabel::Fallback && (stored || !self.found.is_empty()) {
                debug!(?stage.source, "fallback stage skipped, sequences already found");
                continue;
            }
            match stage.source {
                QuerySource::PubMed => {
                    for q in &stage.queries {
                        self.pubmed(fetcher, q);
                    }
                }
                QuerySource::Pmc => {
                    for q in &stage.queries {
                        self.pmc(fetcher, q);
                    }
                }
                QuerySource::BioRxiv => self.biorxiv(fetcher),
            }
        }
    }

    fn new_ids(&mut self, fetcher: &Fetcher, query: &str, db: Database) -> Vec<String> {
        self.stats.queries_issued += 1;
        match fetcher.esearch(query, db) {
            Ok(ids) => ids.into_iter().filter(|id| self.seen_ids.insert((db, id.clone()))).collect(),
            Err(e) => {
                warn!(%query, db = db.as_str(), error = %e, "esearch failed");
                Vec::new()
            }
        }
    }

    fn efetch_bodies(&mut self, fetcher: &Fetcher, ids: &[String], db: Database) -> Vec<String> {
        match fetcher.efetch(ids, db) {
            Ok(results) => {
                self.stats.fetches += results.len() as u64;
                results
                    .into_iter()
                    .filter_map(|r| r.text().ok().map(String::from))
                    .collect()
            }
            Err(e) => {
                warn!(db = db.as_str(), error = %e, "efetch failed");
                Vec::new()
            }
        }
    }

    fn pubmed(&mut self, fetcher: &Fetcher, query: &str) {
        let ids = self.new_ids(fetcher, query, Database::Pubmed);
        if ids.is_empty() {
            return;
        }
        for xml in self.efetch_bodies(fetcher, &ids, Database::Pubmed) {
            match parse_pubmed_records(&xml) {
                Ok(parsed) => {
                    for rec in parsed.records {
                        let abs = rec.abstract_text.as_deref();
                        let text = format!("{}\n\n{}", rec.metadata.title, abs.unwrap_or(""));
                        self.examine(&rec.metadata, &text, abs, None);
                    }
                }
                Err(e) => warn!(error = %e, "unparseable PubMed batch"),
            }
        }
    }

    fn pmc(&mut self, fetcher: &Fetcher, query: &str) {
        let ids = self.new_ids(fetcher, query, Database::Pmc);
        if ids.is_empty() {
            return;
        }
        for xml in self.efetch_bodies(fetcher, &ids, Database::Pmc) {
            match parse_pmc_articleset(&xml) {
                Ok(docs) => {
                    for doc in docs {
                        match doc {
                            Ok(d) => self.pmc_article(fetcher, &d),
                            Err(e) => warn!(error = %e, "PMC article skipped"),
                        }
                    }
                }
                Err(e) => warn!(error = %e, "unparseable PMC batch"),
            }
        }
    }

    fn pmc_article(&mut self, fetcher: &Fetcher, doc: &PmcDocument) {
        let abs = doc.abstract_text.as_deref();
        let text = if doc.body_text.trim().is_empty() {
            format!("{}\n\n{}", doc.metadata.title, abs.unwrap_or(""))
        } else {
            doc.body_text.clone()
        };
        self.examine(&doc.metadata, &text, abs, None);
        let about = format!("{}\n{}\n{}", doc.metadata.title, abs.unwrap_or(""), doc.body_text);
        if self.shared.pipeline.config.run.harvest_supplements && is_aptamer_reference(&about, &self.target) {
            if let Some(pmcid) = &doc.metadata.pmcid {
                self.supplements(fetcher, doc, pmcid);
            }
        }
    }

    fn supplements(&mut self, fetcher: &Fetcher, doc: &PmcDocument, pmcid: &str) {
        let base = fetcher.config().pmc_base.trim_end_matches('/');
        let landing = format!("{base}/articles/{pmcid}/");
        self.stats.fetches += 1;
        let page = match fetcher.acquire(&FetchRequest::new(&landing, HostClass::Ncbi, Purpose::Supplement)) {
            Ok(r) if r.is_success() => r,
            Ok(r) => {
                debug!(url = %landing, status = r.status, "no landing page");
                return;
            }
            Err(e) => {
                warn!(url = %landing, error = %e, "landing page failed");
                return;
            }
        };
        let html = String::from_utf8_lossy(&page.body);
        let links = harvest_supplements(&html, &landing);
        for link in links.iter().take(MAX_SUPPLEMENTS) {
            let Some(bytes) = self.download(fetcher, link) else { continue };
            let converter = self.shared.pipeline.config.docingest.converter_cmd.as_deref();
            match extract_text(&bytes, converter) {
                Ok(text) => {
                    let kept = self.miner.mine(&text, doc.abstract_text.as_deref(), &self.target, &doc.metadata, Some(&link.url));
                    self.absorb(kept);
                }
                Err(e) => debug!(url = %link.url, error = %e, "supplement not readable"),
            }
        }
    }

    fn download(&mut self, fetcher: &Fetcher, link: &SupplementLink) -> Option<Vec<u8>> {
        let ncbi_host = url::Url::parse(&fetcher.config().pmc_base).ok().and_then(|u| u.host_str().map(String::from));
        let host = url::Url::parse(&link.url).ok().and_then(|u| u.host_str().map(String::from));
        let class = if host.is_some() && host == ncbi_host { HostClass::Ncbi } else { HostClass::Publisher };
        self.stats.fetches += 1;
        match fetcher.acquire(&FetchRequest::new(&link.url, class, Purpose::Supplement)) {
            Ok(r) if r.is_success() => Some(r.body),
            Ok(r) if matches!(r.status, 401 | 403) => match &self.shared.browser {
                Some(hook) => hook
                    .fetch(&link.url)
                    .map_err(|e| warn!(url = %link.url, error = %e, "browser hook failed"))
                    .ok(),
                None => {
                    info!(url = %link.url, status = r.status, "supplement refused; no browser hook configured");
                    None
                }
            },
            Ok(r) => {
                debug!(url = %link.url, status = r.status, "supplement unavailable");
                None
            }
            Err(e) => {
                warn!(url = %link.url, error = %e, "supplement download failed");
                None
            }
        }
    }

    fn biorxiv(&mut self, fetcher: &Fetcher) {
        self.stats.queries_issued += 1;
        match fetcher.search_biorxiv(&self.target) {
            Ok(records) => {
                for meta in records {
                    self.sources.insert(meta.clone());
                    if is_aptamer_reference(&meta.title, &self.target) {
                        self.lead_candidates.insert(meta);
                    }
                }
            }
            Err(e) => warn!(error = %e, "bioRxiv search failed"),
        }
    }
}

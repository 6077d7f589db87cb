//! Ingests two local documents (a generated PDF and a text file), chunks
//! them by section and queries the keyword index.

use aptamine::docingest::{ingest_bytes, text_to_pdf, DocingestConfig, KeywordIndex};

fn main() {
    let config = DocingestConfig::default();
    let pdf = text_to_pdf(&[
        "Aptamers for lysozyme",
        "",
        "Abstract",
        "We selected DNA aptamers that bind lysozyme.",
        "",
        "Results",
        "Aptamer LYS-1 bound lysozyme with Kd = 31 nM in PBS at pH 7.4.",
    ]);
    let notes = "Bench notes\n\nMethods\nThrombin was diluted in Tris buffer.\n\nResults\nNo binding to lysozyme was seen.\n";

    let mut index = KeywordIndex::new();
    for (name, bytes) in [("lysozyme.pdf", pdf.as_slice()), ("notes.txt", notes.as_bytes())] {
        let doc = ingest_bytes(bytes, name, &config).expect("readable document");
        println!("{name}: id {}..., title {:?}", &doc.doc_id[..12], doc.metadata.title);
        let chunks = doc.chunks(config.max_tokens);
        for c in &chunks {
            println!("  chunk {} [{:?}] {} tokens", c.chunk_index, c.section_label, c.token_count);
        }
        index.add_document(doc.index_entry(), chunks);
    }

    for q in ["lysozyme", "thrombin buffer", "selex"] {
        match index.query(q) {
            Ok(hits) => {
                println!("query {q:?}: {} hits", hits.len());
                for h in hits {
                    println!("  score {} {}#{}: {}", h.score, &h.chunk.doc_id[..12], h.chunk.chunk_index, h.chunk.text.replace('\n', " "));
                }
            }
            Err(e) => println!("query {q:?}: {e}"),
        }
    }
}

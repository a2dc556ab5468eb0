use std::collections::HashSet;

use super::schema::{EvidenceHit, EvidenceManifest, EvidenceRecord, InterpretationRecord, QueryEvidence, SCHEMA_VERSION};
use super::{PipelineError, RetrievalBudget, Workspace};
use crate::gateway::Embedder;
use crate::knowledge::{prefix_tokens, DefaultTokenizer, IndexError, ScoredChunk, VectorIndex};

/// Query text for a later round: the query followed by the first
/// `prefix_tokens` tokens of every hit from the previous round.
pub fn expand_query(query: &str, previous: &[ScoredChunk], prefix: usize) -> String {
    let mut out = query.to_string();
    for hit in previous {
        let p = prefix_tokens(&DefaultTokenizer, &hit.chunk.text, prefix);
        if !p.is_empty() {
            out.push(' ');
            out.push_str(p);
        }
    }
    out
}

/// Runs every query for `budget.rounds` rounds of top-`k` retrieval and saves
/// each new hit as `{dir}{query}_{round}_{rank}.json`. A chunk already saved
/// for the same query in an earlier round is not saved again. All searches
/// finish before the first file is written.
pub fn retrieve_evidence(
    rec: &InterpretationRecord,
    index: &VectorIndex,
    embedder: &dyn Embedder,
    ws: &mut Workspace,
    budget: RetrievalBudget,
    expansion_prefix_tokens: usize,
    dir: &str,
) -> Result<EvidenceManifest, PipelineError> {
    if index.is_empty() {
        return Err(IndexError::EmptyCorpus.into());
    }
    // (query index, round, rank, expanded query text, hit)
    let mut pending: Vec<(usize, usize, usize, String, ScoredChunk)> = Vec::new();
    for (qi, q) in rec.queries.iter().enumerate() {
        let mut seen = HashSet::new();
        let mut previous: Vec<ScoredChunk> = Vec::new();
        for round in 1..=budget.rounds {
            let text = if round == 1 {
                q.query.clone()
            } else {
                expand_query(&q.query, &previous, expansion_prefix_tokens)
            };
            let found = index.retrieve(&text, embedder, budget.top_k)?;
            for (rank, hit) in found.iter().enumerate() {
                if seen.insert(hit.chunk_ref()) {
                    pending.push((qi, round, rank, text.clone(), hit.clone()));
                }
            }
            previous = found;
        }
    }

    let mut manifest = EvidenceManifest::empty();
    manifest.queries = rec
        .queries
        .iter()
        .enumerate()
        .map(|(qi, q)| QueryEvidence { query_index: qi, concept: q.concept.clone(), query: q.query.clone(), hits: Vec::new() })
        .collect();
    for (qi, round, rank, text, hit) in pending {
        let path = format!("{dir}{qi}_{round}_{rank}.json");
        let record = EvidenceRecord {
            schema_version: SCHEMA_VERSION,
            query_index: qi,
            query: text,
            round,
            rank,
            doc_id: hit.chunk.doc_id.clone(),
            seq: hit.chunk.seq,
            token_span: hit.chunk.token_span.into(),
            score: hit.score,
            text: hit.chunk.text.clone(),
        };
        ws.save_file(&path, &serde_json::to_string_pretty(&record).expect("record serializes"))?;
        manifest.queries[qi].hits.push(EvidenceHit {
            round,
            rank,
            path,
            doc_id: hit.chunk.doc_id,
            seq: hit.chunk.seq,
            score: hit.score,
        });
    }
    for q in &mut manifest.queries {
        q.hits.sort_by(|a, b| b.score.total_cmp(&a.score));
    }
    Ok(manifest)
}

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "policygraph/chunk_store.hpp"
#include "policygraph/llm.hpp"
#include "policygraph/model.hpp"

namespace pg {

struct ContextEntity {
    std::string id;
    std::string name;
    std::string entity_type;
    std::string description; // one line
};

struct ExtractionContext {
    std::vector<ContextEntity> same_source_entities;   // insertion order
    std::vector<ContextEntity> cross_source_entities;  // degree desc, then id
    std::vector<std::string> open_entity_types;        // OPEN mode only
    std::vector<std::string> open_relation_types;      // OPEN mode only
};

struct ExtractorConfig {
    std::size_t k_same = 30;
    std::size_t k_cross = 15;
    std::size_t max_chunk_chars = 4000;
    std::string model_id;
};

struct ExtractionTemplates {
    std::string entities_prompt;  // placeholders: {{schema_description}},
                                  // {{same_source_entities}}, {{cross_source_entities}},
                                  // {{chunk_text}}
    std::string relations_prompt; // placeholders: {{schema_description}}, {{entity_catalog}},
                                  // {{chunk_text}}
};

struct RawEntity {
    std::string name;
    std::string entity_type;
    std::string description;
    std::string article_ref;
    std::string policy_quote;
};

struct RawRelation {
    std::string relation_type;
    std::string source_entity_id;
    std::string target_entity_id;
    std::string description;
};

struct RawExtraction {
    std::vector<RawEntity> entities;
    std::vector<RawRelation> relations;
};

struct ChunkReport {
    std::string chunk_id;
    bool failed = false;
    std::string failure;
    std::vector<std::string> added_entities;
    std::vector<std::string> added_relations;
    std::vector<std::string> rejections; // schema/endpoint rejections, logged not fatal
};

struct Merge {
    std::string kept_id;
    std::string merged_id;
    std::string name;
    std::string entity_type;
    std::string source_id;
    std::vector<std::string> dropped_relations;
};

struct MergeReport {
    std::vector<Merge> merges;
};

// Up to k_same most recently added entities of the current source plus the
// k_cross highest-degree entities from the other sources.
ExtractionContext build_context(const KnowledgeGraph& graph, const std::string& current_source,
                                std::size_t k_same, std::size_t k_cross);

std::string render_schema_description(const OntologySchema& schema);
std::string render_context_entities(const std::vector<ContextEntity>& entities);

RawExtraction parse_entities_payload(const std::string& model_text);
RawExtraction parse_relations_payload(const std::string& model_text);

// Two model passes over one chunk: entities then relations. Parse failures
// get one reprompt; a second failure marks the chunk failed and the pipeline
// moves on. Schema-invalid output is logged and skipped, never stored.
ChunkReport extract_chunk(const Chunk& chunk, KnowledgeGraph& graph,
                          const ExtractionContext& context, ChatProvider& provider,
                          const ExtractionTemplates& templates, const ExtractorConfig& config);

// Whole-corpus driver: sources in store order, chunks in id order, context
// rebuilt before every chunk; post-hoc dedup; optional embedding pass.
std::vector<ChunkReport> extract_corpus(const ChunkStore& store, KnowledgeGraph& graph,
                                        ChatProvider& provider,
                                        const ExtractionTemplates& templates,
                                        const ExtractorConfig& config,
                                        Embedder* embedder = nullptr,
                                        MergeReport* merge_report = nullptr);

// Merges entities with identical (case-folded collapsed name, type, source)
// into the earliest id, re-pointing relations and concatenating differing
// descriptions. Idempotent.
MergeReport dedup_entities(KnowledgeGraph& graph);

} // namespace pg

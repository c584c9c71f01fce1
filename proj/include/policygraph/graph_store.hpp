#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "policygraph/llm.hpp"
#include "policygraph/model.hpp"

namespace pg {

enum class MatchKind { Keyword, Semantic };

struct SearchHit {
    std::string entity_id;
    double score = 0.0;
    MatchKind match_kind = MatchKind::Keyword;
};

struct Subgraph {
    std::vector<std::string> entity_ids;   // BFS visit order from the start entity
    std::vector<std::string> relation_ids; // id order; all relations among the entities
};

struct IncidentRelation {
    std::string relation_id;
    bool outgoing = false;
};

struct EntityDetailResult {
    Entity entity;
    std::vector<IncidentRelation> incident; // relation id order
};

struct PathResult {
    std::vector<std::string> entity_ids;
    std::vector<std::string> relation_ids; // one fewer than entity_ids
};

// Token match over name + description; name hits count double. Only entities
// with score > 0 are returned, ties broken by id.
std::vector<SearchHit> keyword_search(const KnowledgeGraph& graph, const std::string& query,
                                      std::size_t k);

// Brute-force cosine ranking of the query embedding against every entity
// embedding. All entities must have been embedded first.
std::vector<SearchHit> semantic_search(const KnowledgeGraph& graph, const std::string& query,
                                       std::size_t k, Embedder& embedder);

// Undirected BFS to `depth` hops; neighbor visits in id order.
Subgraph expand_neighbors(const KnowledgeGraph& graph, const std::string& entity_id,
                          std::size_t depth);

EntityDetailResult entity_detail(const KnowledgeGraph& graph, const std::string& entity_id);

// Shortest undirected path with at most max_len edges; among equal-length
// paths the lexicographically smallest entity-id sequence wins, and each hop
// takes the smallest relation id joining the pair.
std::optional<PathResult> find_path(const KnowledgeGraph& graph, const std::string& src_id,
                                    const std::string& dst_id, std::size_t max_len);

// Human-readable totals, per-type counts and source list, alphabetical.
std::string schema_summary(const KnowledgeGraph& graph);

// Text the embedding pass feeds the embedder for one entity.
std::string entity_embedding_text(const Entity& e);

// Embeds every entity missing an embedding; returns how many were embedded.
std::size_t embed_entities(KnowledgeGraph& graph, Embedder& embedder);

} // namespace pg

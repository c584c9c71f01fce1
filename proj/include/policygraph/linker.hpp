#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "policygraph/llm.hpp"
#include "policygraph/model.hpp"

namespace pg {

struct LinkerConfig {
    double cosine_threshold = 0.70;
    double string_threshold = 0.80;
    std::size_t max_links_per_entity = 3;
    bool embed_name_only = false; // deviation knob: score names without descriptions
    void validate() const;
};

// 1 - levenshtein / max-length over case-folded, whitespace-collapsed inputs.
double string_similarity(const std::string& a, const std::string& b);

// Adds CORRESPONDS_TO edges between entities of different sources whose
// similarity clears the applicable threshold, keeping each entity within
// max_links_per_entity (an edge must be in the top set of BOTH endpoints).
// Edge direction: from the lexicographically smaller source id. Idempotent.
std::vector<Relation> link_cross_policy(KnowledgeGraph& graph, const LinkerConfig& config,
                                        Embedder* embedder);

} // namespace pg

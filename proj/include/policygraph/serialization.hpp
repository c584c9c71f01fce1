#pragma once

#include <string>

#include "json.hpp"

#include "policygraph/chunk_store.hpp"
#include "policygraph/model.hpp"

namespace pg {

// All converters use nlohmann's default (sorted-key) object representation,
// which is what makes persisted documents canonical and golden-testable.

nlohmann::json entity_to_json(const Entity& e);
Entity entity_from_json(const nlohmann::json& j);

nlohmann::json relation_to_json(const Relation& r);
Relation relation_from_json(const nlohmann::json& j);

nlohmann::json chunk_to_json(const Chunk& c);
Chunk chunk_from_json(const nlohmann::json& j);

nlohmann::json schema_to_json(const OntologySchema& s);
OntologySchema schema_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const KnowledgeGraph& g);
// Rebuilds the graph through add_entity/add_relation, so every schema and
// endpoint rule is re-checked; a hand-edited invalid file fails here.
KnowledgeGraph graph_from_json(const nlohmann::json& j);

nlohmann::json chunk_store_to_json(const ChunkStore& store);
ChunkStore chunk_store_from_json(const nlohmann::json& j);

// 2-space indented dump with a trailing newline.
std::string canonical_dump(const nlohmann::json& j);

inline constexpr int kFormatVersion = 1;

} // namespace pg

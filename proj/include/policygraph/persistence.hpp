#pragma once

#include <string>

#include "json.hpp"

#include "policygraph/chunk_store.hpp"
#include "policygraph/model.hpp"

namespace pg {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const nlohmann::json& j, const std::string& path);

// Refuses to persist a graph that fails verify_graph.
void save_graph(const KnowledgeGraph& graph, const std::string& path);
KnowledgeGraph load_graph(const std::string& path);

void save_chunks(const ChunkStore& store, const std::string& path);
ChunkStore load_chunks(const std::string& path);

// FNV-1a over the canonical serialization; used by purity tests and the
// trace log to detect accidental mutation.
std::string graph_fingerprint(const KnowledgeGraph& graph);

} // namespace pg

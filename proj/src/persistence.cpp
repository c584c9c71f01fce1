#include "policygraph/persistence.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "policygraph/error.hpp"
#include "policygraph/serialization.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) fail(ErrorCode::io, "read failed on '" + path + "'");
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::io, "write failed on '" + path + "'");
}

json load_json_file(const std::string& path) {
    std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, "'" + path + "' is not valid JSON: " + e.what());
    }
}

void save_json_file(const json& j, const std::string& path) {
    write_text_file(path, canonical_dump(j));
}

void save_graph(const KnowledgeGraph& graph, const std::string& path) {
    auto violations = verify_graph(graph);
    if (!violations.empty())
        fail(ErrorCode::validation, "refusing to save an invalid graph (" +
                                        std::to_string(violations.size()) + " violations; first: " +
                                        violations.front().rule + " on '" +
                                        violations.front().subject_id + "': " +
                                        violations.front().detail + ")");
    save_json_file(graph_to_json(graph), path);
}

KnowledgeGraph load_graph(const std::string& path) {
    KnowledgeGraph g = graph_from_json(load_json_file(path));
    auto violations = verify_graph(g);
    if (!violations.empty())
        fail(ErrorCode::validation, "'" + path + "' failed load-time verification (" +
                                        std::to_string(violations.size()) + " violations; first: " +
                                        violations.front().rule + " on '" +
                                        violations.front().subject_id + "': " +
                                        violations.front().detail + ")");
    return g;
}

void save_chunks(const ChunkStore& store, const std::string& path) {
    save_json_file(chunk_store_to_json(store), path);
}

ChunkStore load_chunks(const std::string& path) {
    return chunk_store_from_json(load_json_file(path));
}

std::string graph_fingerprint(const KnowledgeGraph& graph) {
    std::string dump = graph_to_json(graph).dump();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(dump)));
    return buf;
}

} // namespace pg

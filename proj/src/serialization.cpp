#include "policygraph/serialization.hpp"

#include "policygraph/error.hpp"

namespace pg {

using nlohmann::json;

namespace {

std::string require_string(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_string())
        fail(ErrorCode::parse, where + ": missing or non-string field '" + key + "'");
    return j[key].get<std::string>();
}

std::size_t require_uint(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number_unsigned())
        fail(ErrorCode::parse, where + ": missing or non-integer field '" + key + "'");
    return j[key].get<std::size_t>();
}

} // namespace

json entity_to_json(const Entity& e) {
    json j;
    j["id"] = e.id;
    j["name"] = e.name;
    j["entity_type"] = e.entity_type;
    j["description"] = e.description;
    j["article_ref"] = e.article_ref;
    j["policy_quote"] = e.policy_quote;
    j["source_id"] = e.source_id;
    j["source_chunk_id"] = e.source_chunk_id;
    if (e.embedding) j["embedding"] = *e.embedding;
    return j;
}

Entity entity_from_json(const json& j) {
    Entity e;
    e.id = require_string(j, "id", "entity");
    const std::string where = "entity '" + e.id + "'";
    e.name = require_string(j, "name", where);
    e.entity_type = require_string(j, "entity_type", where);
    e.description = require_string(j, "description", where);
    e.article_ref = require_string(j, "article_ref", where);
    e.policy_quote = require_string(j, "policy_quote", where);
    e.source_id = require_string(j, "source_id", where);
    e.source_chunk_id = require_string(j, "source_chunk_id", where);
    if (j.contains("embedding")) {
        if (!j["embedding"].is_array())
            fail(ErrorCode::parse, where + ": embedding must be an array");
        e.embedding = j["embedding"].get<std::vector<double>>();
    }
    return e;
}

json relation_to_json(const Relation& r) {
    json j;
    j["id"] = r.id;
    j["relation_type"] = r.relation_type;
    j["source_entity_id"] = r.source_entity_id;
    j["target_entity_id"] = r.target_entity_id;
    j["description"] = r.description;
    if (r.similarity) j["similarity"] = *r.similarity;
    return j;
}

Relation relation_from_json(const json& j) {
    Relation r;
    r.id = require_string(j, "id", "relation");
    const std::string where = "relation '" + r.id + "'";
    r.relation_type = require_string(j, "relation_type", where);
    r.source_entity_id = require_string(j, "source_entity_id", where);
    r.target_entity_id = require_string(j, "target_entity_id", where);
    r.description = require_string(j, "description", where);
    if (j.contains("similarity")) {
        if (!j["similarity"].is_number())
            fail(ErrorCode::parse, where + ": similarity must be a number");
        r.similarity = j["similarity"].get<double>();
    }
    return r;
}

json chunk_to_json(const Chunk& c) {
    json j;
    j["id"] = c.id;
    j["source_id"] = c.source_id;
    j["start_offset"] = c.start_offset;
    j["end_offset"] = c.end_offset;
    j["text"] = c.text;
    j["boundary_reason"] = c.boundary_reason;
    return j;
}

Chunk chunk_from_json(const json& j) {
    Chunk c;
    c.id = require_string(j, "id", "chunk");
    const std::string where = "chunk '" + c.id + "'";
    c.source_id = require_string(j, "source_id", where);
    c.start_offset = require_uint(j, "start_offset", where);
    c.end_offset = require_uint(j, "end_offset", where);
    c.text = require_string(j, "text", where);
    c.boundary_reason = require_string(j, "boundary_reason", where);
    if (c.end_offset < c.start_offset)
        fail(ErrorCode::parse, where + ": end_offset precedes start_offset");
    if (c.text.size() != c.end_offset - c.start_offset)
        fail(ErrorCode::parse, where + ": text length disagrees with offsets");
    return c;
}

json schema_to_json(const OntologySchema& s) {
    json j;
    j["mode"] = s.mode() == SchemaMode::Closed ? "CLOSED" : "OPEN";
    j["entity_types"] = s.entity_types();   // std::set -> sorted array
    j["relation_types"] = s.relation_types();
    json rules = json::array();
    for (const auto& r : s.direction_rules())
        rules.push_back({{"relation_type", r.relation_type},
                         {"source_type", r.source_type},
                         {"target_type", r.target_type}});
    j["direction_rules"] = std::move(rules);
    return j;
}

OntologySchema schema_from_json(const json& j) {
    std::string mode = require_string(j, "mode", "schema");
    if (mode == "OPEN") {
        OntologySchema s = OntologySchema::open();
        for (const auto& t : j.value("entity_types", json::array()))
            s.observe_entity_type(t.get<std::string>());
        for (const auto& t : j.value("relation_types", json::array())) {
            auto label = t.get<std::string>();
            if (label != kCorrespondsTo) s.observe_relation_type(label);
        }
        return s;
    }
    if (mode != "CLOSED") fail(ErrorCode::parse, "schema: unknown mode '" + mode + "'");
    if (!j.contains("entity_types") || !j["entity_types"].is_array())
        fail(ErrorCode::parse, "schema: missing entity_types array");
    if (!j.contains("direction_rules") || !j["direction_rules"].is_array())
        fail(ErrorCode::parse, "schema: missing direction_rules array");
    std::vector<std::string> types;
    for (const auto& t : j["entity_types"]) types.push_back(t.get<std::string>());
    std::vector<DirectionRule> rules;
    for (const auto& r : j["direction_rules"]) {
        DirectionRule rule;
        rule.relation_type = require_string(r, "relation_type", "direction rule");
        rule.source_type = require_string(r, "source_type", "direction rule");
        rule.target_type = require_string(r, "target_type", "direction rule");
        rules.push_back(std::move(rule));
    }
    return OntologySchema::closed(std::move(types), std::move(rules));
}

json graph_to_json(const KnowledgeGraph& g) {
    json j;
    j["format_version"] = kFormatVersion;
    j["schema"] = schema_to_json(g.schema());
    json entities = json::array();
    for (const auto& [id, e] : g.entities()) entities.push_back(entity_to_json(e));
    j["entities"] = std::move(entities);
    json relations = json::array();
    for (const auto& [id, r] : g.relations()) relations.push_back(relation_to_json(r));
    j["relations"] = std::move(relations);
    return j;
}

KnowledgeGraph graph_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::parse, "graph document must be a JSON object");
    if (!j.contains("format_version") || !j["format_version"].is_number_integer())
        fail(ErrorCode::parse, "graph document has no format_version");
    int version = j["format_version"].get<int>();
    if (version != kFormatVersion)
        fail(ErrorCode::validation, "unsupported graph format_version " + std::to_string(version) +
                                        " (this build reads version " +
                                        std::to_string(kFormatVersion) + ")");
    if (!j.contains("schema")) fail(ErrorCode::parse, "graph document has no schema");
    KnowledgeGraph g(schema_from_json(j["schema"]));
    if (!j.contains("entities") || !j["entities"].is_array())
        fail(ErrorCode::parse, "graph document has no entities array");
    if (!j.contains("relations") || !j["relations"].is_array())
        fail(ErrorCode::parse, "graph document has no relations array");
    try {
        for (const auto& item : j["entities"]) g.add_entity(entity_from_json(item));
        for (const auto& item : j["relations"]) g.add_relation(relation_from_json(item));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::parse) throw;
        fail(ErrorCode::validation, std::string("graph failed load-time verification: ") + e.what());
    }
    return g;
}

json chunk_store_to_json(const ChunkStore& store) {
    json j;
    j["format_version"] = kFormatVersion;
    json chunks = json::object();
    for (const auto& [id, c] : store.chunks) chunks[id] = chunk_to_json(c);
    j["chunks"] = std::move(chunks);
    json sources = json::array();
    for (const auto& [id, s] : store.sources)
        sources.push_back({{"char_count", s.char_count}, {"id", s.id}, {"title", s.title}});
    j["sources"] = std::move(sources);
    return j;
}

ChunkStore chunk_store_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::parse, "chunk store document must be a JSON object");
    int version = j.value("format_version", -1);
    if (version != kFormatVersion)
        fail(ErrorCode::validation,
             "unsupported chunk store format_version " + std::to_string(version));
    ChunkStore store;
    for (const auto& item : j.value("sources", json::array())) {
        SourceMeta meta;
        meta.id = require_string(item, "id", "source");
        meta.title = require_string(item, "title", "source '" + meta.id + "'");
        meta.char_count = require_uint(item, "char_count", "source '" + meta.id + "'");
        store.add_source(std::move(meta));
    }
    if (j.contains("chunks")) {
        if (!j["chunks"].is_object())
            fail(ErrorCode::parse, "chunk store: chunks must be an object keyed by chunk id");
        for (const auto& [key, value] : j["chunks"].items()) {
            Chunk c = chunk_from_json(value);
            if (c.id != key)
                fail(ErrorCode::parse, "chunk store: key '" + key + "' holds chunk id '" + c.id + "'");
            store.add_chunk(std::move(c));
        }
    }
    return store;
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace pg

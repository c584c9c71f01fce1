#include "policygraph/model.hpp"

#include <algorithm>
#include <cstdio>

#include "policygraph/chunk_store.hpp"
#include "policygraph/error.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

// Splits ids of the form <source>_<marker><digits>; returns false otherwise.
bool parse_ordinal_id(const std::string& id, const std::string& marker,
                      std::string& source_out, std::size_t& ordinal_out) {
    auto pos = id.rfind(marker);
    if (pos == std::string::npos || pos == 0) return false;
    std::string digits = id.substr(pos + marker.size());
    if (!all_digits(digits)) return false;
    source_out = id.substr(0, pos);
    ordinal_out = static_cast<std::size_t>(std::stoull(digits));
    return true;
}

std::string format_ordinal_id(const std::string& source, const std::string& marker,
                              std::size_t ordinal) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%04zu", marker.c_str(), ordinal);
    return source + buf;
}

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

OntologySchema OntologySchema::closed(std::vector<std::string> entity_types,
                                      std::vector<DirectionRule> rules) {
    OntologySchema s;
    s.mode_ = SchemaMode::Closed;
    s.entity_types_.insert(entity_types.begin(), entity_types.end());
    for (const auto& r : rules) s.relation_types_.insert(r.relation_type);
    s.relation_types_.insert(kCorrespondsTo);
    s.direction_rules_ = std::move(rules);
    return s;
}

OntologySchema OntologySchema::open() {
    OntologySchema s;
    s.mode_ = SchemaMode::Open;
    s.relation_types_.insert(kCorrespondsTo);
    return s;
}

void OntologySchema::observe_entity_type(const std::string& label) {
    if (mode_ == SchemaMode::Closed)
        fail(ErrorCode::validation, "closed schema vocabulary is fixed; cannot add entity type '" + label + "'");
    entity_types_.insert(label);
}

void OntologySchema::observe_relation_type(const std::string& label) {
    if (mode_ == SchemaMode::Closed)
        fail(ErrorCode::validation, "closed schema vocabulary is fixed; cannot add relation type '" + label + "'");
    relation_types_.insert(label);
}

OntologySchema default_closed_schema() {
    return OntologySchema::closed(
        {"AI_SYSTEM", "RISK", "CONSEQUENCE", "RISK_CONTROL", "STAKEHOLDER", "PURPOSE",
         "REGULATION"},
        {
            {"MITIGATES", "RISK_CONTROL", "RISK"},
            {"HAS_CONSEQUENCE", "RISK", "CONSEQUENCE"},
            {"HAS_RISK", "AI_SYSTEM", "RISK"},
            {"HAS_PURPOSE", "AI_SYSTEM", "PURPOSE"},
            {"AFFECTS", "RISK", "STAKEHOLDER"},
            {"REGULATED_BY", "AI_SYSTEM", "REGULATION"},
        });
}

bool validate_relation(const OntologySchema& schema, const std::string& rel_type,
                       const std::string& src_type, const std::string& dst_type) {
    if (rel_type == kCorrespondsTo) return true;
    if (schema.mode() == SchemaMode::Open) return true;
    for (const auto& rule : schema.direction_rules()) {
        if (rule.relation_type == rel_type && rule.source_type == src_type &&
            rule.target_type == dst_type)
            return true;
    }
    return false;
}

const Entity& KnowledgeGraph::entity(const std::string& id) const {
    auto it = entities_.find(id);
    if (it == entities_.end()) fail(ErrorCode::not_found, "no entity with id '" + id + "'");
    return it->second;
}

Entity& KnowledgeGraph::entity_mut(const std::string& id) {
    auto it = entities_.find(id);
    if (it == entities_.end()) fail(ErrorCode::not_found, "no entity with id '" + id + "'");
    return it->second;
}

const Relation& KnowledgeGraph::relation(const std::string& id) const {
    auto it = relations_.find(id);
    if (it == relations_.end()) fail(ErrorCode::not_found, "no relation with id '" + id + "'");
    return it->second;
}

std::vector<std::string> KnowledgeGraph::source_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, e] : entities_) out.push_back(e.source_id);
    sort_unique(out);
    return out;
}

std::size_t KnowledgeGraph::degree(const std::string& entity_id) const {
    std::size_t n = 0;
    if (auto it = out_index_.find(entity_id); it != out_index_.end()) n += it->second.size();
    if (auto it = in_index_.find(entity_id); it != in_index_.end()) n += it->second.size();
    return n;
}

std::vector<std::string> KnowledgeGraph::neighbors(const std::string& entity_id) const {
    std::vector<std::string> out;
    if (auto it = out_index_.find(entity_id); it != out_index_.end())
        for (const auto& rid : it->second) out.push_back(relations_.at(rid).target_entity_id);
    if (auto it = in_index_.find(entity_id); it != in_index_.end())
        for (const auto& rid : it->second) out.push_back(relations_.at(rid).source_entity_id);
    sort_unique(out);
    return out;
}

std::vector<std::string> KnowledgeGraph::incident_relations(const std::string& entity_id) const {
    std::vector<std::string> out;
    if (auto it = out_index_.find(entity_id); it != out_index_.end())
        out.insert(out.end(), it->second.begin(), it->second.end());
    if (auto it = in_index_.find(entity_id); it != in_index_.end())
        out.insert(out.end(), it->second.begin(), it->second.end());
    sort_unique(out);
    return out;
}

void KnowledgeGraph::add_entity(Entity entity) {
    if (entity.id.empty()) fail(ErrorCode::invalid_argument, "entity id must not be empty");
    if (entity.name.empty())
        fail(ErrorCode::invalid_argument, "entity '" + entity.id + "' has empty name");
    if (entities_.count(entity.id))
        fail(ErrorCode::validation, "duplicate entity id '" + entity.id + "'");
    if (schema_.mode() == SchemaMode::Closed) {
        if (!schema_.has_entity_type(entity.entity_type))
            fail(ErrorCode::validation, "entity type '" + entity.entity_type +
                                            "' is not in the closed schema (entity '" + entity.id + "')");
    } else {
        if (entity.entity_type.empty())
            fail(ErrorCode::validation, "entity '" + entity.id + "' has empty type");
        schema_.observe_entity_type(entity.entity_type);
    }
    std::string src;
    std::size_t ord = 0;
    if (parse_ordinal_id(entity.id, "_e", src, ord)) {
        auto& next = next_entity_ordinal_[src];
        next = std::max(next, ord + 1);
    }
    entity_type_counts_[entity.entity_type]++;
    entity_order_.push_back(entity.id);
    entities_.emplace(entity.id, std::move(entity));
}

std::optional<std::string> KnowledgeGraph::try_add_relation(Relation relation) {
    if (relation.id.empty()) return "relation id must not be empty";
    if (relations_.count(relation.id)) return "duplicate relation id '" + relation.id + "'";
    auto src = entities_.find(relation.source_entity_id);
    if (src == entities_.end())
        return "unknown source entity '" + relation.source_entity_id + "'";
    auto dst = entities_.find(relation.target_entity_id);
    if (dst == entities_.end())
        return "unknown target entity '" + relation.target_entity_id + "'";
    if (relation.source_entity_id == relation.target_entity_id)
        return "self-loop on entity '" + relation.source_entity_id + "'";
    if (relation.relation_type == kCorrespondsTo) {
        if (src->second.source_id == dst->second.source_id)
            return "CORRESPONDS_TO endpoints must come from different sources (both '" +
                   src->second.source_id + "')";
        if (relation.similarity && (*relation.similarity < 0.0 || *relation.similarity > 1.0))
            return "similarity out of [0,1] on '" + relation.id + "'";
    } else {
        if (relation.similarity)
            return "similarity is only meaningful on CORRESPONDS_TO ('" + relation.id + "')";
        if (!validate_relation(schema_, relation.relation_type, src->second.entity_type,
                               dst->second.entity_type))
            return "relation '" + relation.relation_type + "' does not permit " +
                   src->second.entity_type + " -> " + dst->second.entity_type;
        if (schema_.mode() == SchemaMode::Open)
            schema_.observe_relation_type(relation.relation_type);
    }
    std::string srcid;
    std::size_t ord = 0;
    if (parse_ordinal_id(relation.id, "_r", srcid, ord)) {
        auto& next = next_relation_ordinal_[srcid];
        next = std::max(next, ord + 1);
    }
    relation_type_counts_[relation.relation_type]++;
    index_relation(relation);
    relations_.emplace(relation.id, std::move(relation));
    return std::nullopt;
}

void KnowledgeGraph::add_relation(Relation relation) {
    if (auto err = try_add_relation(std::move(relation))) fail(ErrorCode::validation, *err);
}

void KnowledgeGraph::remove_entity(const std::string& id) {
    auto it = entities_.find(id);
    if (it == entities_.end()) fail(ErrorCode::not_found, "no entity with id '" + id + "'");
    for (const auto& rid : incident_relations(id)) remove_relation(rid);
    auto& count = entity_type_counts_[it->second.entity_type];
    if (--count == 0) entity_type_counts_.erase(it->second.entity_type);
    entities_.erase(it);
    entity_order_.erase(std::remove(entity_order_.begin(), entity_order_.end(), id),
                        entity_order_.end());
}

void KnowledgeGraph::remove_relation(const std::string& id) {
    auto it = relations_.find(id);
    if (it == relations_.end()) fail(ErrorCode::not_found, "no relation with id '" + id + "'");
    auto& counts = relation_type_counts_[it->second.relation_type];
    if (--counts == 0) relation_type_counts_.erase(it->second.relation_type);
    unindex_relation(it->second);
    relations_.erase(it);
}

std::vector<std::string> KnowledgeGraph::repoint_relations(const std::string& from,
                                                           const std::string& to) {
    if (!entities_.count(to)) fail(ErrorCode::not_found, "no entity with id '" + to + "'");
    std::vector<std::string> dropped;
    for (const auto& rid : incident_relations(from)) {
        Relation rel = relations_.at(rid);
        std::string new_src = rel.source_entity_id == from ? to : rel.source_entity_id;
        std::string new_dst = rel.target_entity_id == from ? to : rel.target_entity_id;
        bool duplicate = false;
        if (new_src != new_dst) {
            for (const auto& [oid, other] : relations_) {
                if (oid != rid && other.relation_type == rel.relation_type &&
                    other.source_entity_id == new_src && other.target_entity_id == new_dst) {
                    duplicate = true;
                    break;
                }
            }
        }
        if (new_src == new_dst || duplicate) {
            remove_relation(rid);
            dropped.push_back(rid);
            continue;
        }
        remove_relation(rid);
        rel.source_entity_id = new_src;
        rel.target_entity_id = new_dst;
        relation_type_counts_[rel.relation_type]++;
        index_relation(rel);
        relations_.emplace(rel.id, std::move(rel));
    }
    return dropped;
}

std::string KnowledgeGraph::allocate_entity_id(const std::string& source_id) {
    auto& next = next_entity_ordinal_[source_id];
    if (next == 0) next = 1;
    std::string id = format_ordinal_id(source_id, "_e", next);
    ++next;
    return id;
}

std::string KnowledgeGraph::allocate_relation_id(const std::string& source_id) {
    auto& next = next_relation_ordinal_[source_id];
    if (next == 0) next = 1;
    std::string id = format_ordinal_id(source_id, "_r", next);
    ++next;
    return id;
}

void KnowledgeGraph::index_relation(const Relation& rel) {
    out_index_[rel.source_entity_id].push_back(rel.id);
    in_index_[rel.target_entity_id].push_back(rel.id);
    std::sort(out_index_[rel.source_entity_id].begin(), out_index_[rel.source_entity_id].end());
    std::sort(in_index_[rel.target_entity_id].begin(), in_index_[rel.target_entity_id].end());
}

void KnowledgeGraph::unindex_relation(const Relation& rel) {
    auto drop = [&](std::map<std::string, std::vector<std::string>>& index,
                    const std::string& key) {
        auto it = index.find(key);
        if (it == index.end()) return;
        auto& v = it->second;
        v.erase(std::remove(v.begin(), v.end(), rel.id), v.end());
        if (v.empty()) index.erase(it);
    };
    drop(out_index_, rel.source_entity_id);
    drop(in_index_, rel.target_entity_id);
}

std::vector<Violation> KnowledgeGraph::verify() const { return verify_graph(*this); }

std::vector<Violation> KnowledgeGraph::verify(const ChunkStore& chunks) const {
    return verify_graph(*this, chunks);
}

namespace {

void verify_core(const KnowledgeGraph& g, std::vector<Violation>& out) {
    const auto& schema = g.schema();
    for (const auto& [id, e] : g.entities()) {
        if (e.name.empty()) out.push_back({id, "entity_name", "entity has empty name"});
        if (e.entity_type.empty()) {
            out.push_back({id, "entity_type", "entity has empty type"});
        } else if (schema.mode() == SchemaMode::Closed) {
            if (!schema.has_entity_type(e.entity_type))
                out.push_back({id, "entity_type",
                               "type '" + e.entity_type + "' is not in the closed schema"});
        } else {
            if (e.entity_type != normalize_type_label(e.entity_type))
                out.push_back({id, "entity_type",
                               "open-schema type '" + e.entity_type + "' is not normalized"});
        }
    }
    for (const auto& [id, r] : g.relations()) {
        bool src_ok = g.has_entity(r.source_entity_id);
        bool dst_ok = g.has_entity(r.target_entity_id);
        if (!src_ok)
            out.push_back({id, "dangling_endpoint",
                           "source entity '" + r.source_entity_id + "' does not exist"});
        if (!dst_ok)
            out.push_back({id, "dangling_endpoint",
                           "target entity '" + r.target_entity_id + "' does not exist"});
        if (src_ok && dst_ok && r.source_entity_id == r.target_entity_id)
            out.push_back({id, "self_loop", "relation loops on '" + r.source_entity_id + "'"});
        if (r.relation_type == kCorrespondsTo) {
            if (src_ok && dst_ok) {
                const auto& a = g.entity(r.source_entity_id);
                const auto& b = g.entity(r.target_entity_id);
                if (a.source_id == b.source_id)
                    out.push_back({id, "cross_source",
                                   "CORRESPONDS_TO endpoints share source '" + a.source_id + "'"});
            }
            if (r.similarity && (*r.similarity < 0.0 || *r.similarity > 1.0))
                out.push_back({id, "similarity", "similarity outside [0,1]"});
        } else {
            if (r.similarity)
                out.push_back({id, "similarity", "similarity set on non-CORRESPONDS_TO relation"});
            if (src_ok && dst_ok) {
                const auto& a = g.entity(r.source_entity_id);
                const auto& b = g.entity(r.target_entity_id);
                if (!validate_relation(schema, r.relation_type, a.entity_type, b.entity_type))
                    out.push_back({id, "schema",
                                   "'" + r.relation_type + "' does not permit " + a.entity_type +
                                       " -> " + b.entity_type});
            }
        }
    }
    // Index / count self-consistency; violations here indicate internal bugs
    // or a hand-edited persisted file.
    std::map<std::string, std::size_t> rel_counts;
    for (const auto& [id, r] : g.relations()) rel_counts[r.relation_type]++;
    if (rel_counts != g.relation_type_counts())
        out.push_back({"", "index", "relation type counts disagree with relations"});
    std::map<std::string, std::size_t> ent_counts;
    for (const auto& [id, e] : g.entities()) ent_counts[e.entity_type]++;
    if (ent_counts != g.entity_type_counts())
        out.push_back({"", "index", "entity type counts disagree with entities"});
    std::size_t indexed = 0;
    for (const auto& [eid, rids] : g.out_index()) {
        indexed += rids.size();
        for (const auto& rid : rids) {
            auto it = g.relations().find(rid);
            if (it == g.relations().end() || it->second.source_entity_id != eid)
                out.push_back({eid, "index", "out-index entry '" + rid + "' is stale"});
        }
    }
    if (indexed != g.relations().size())
        out.push_back({"", "index", "out-index size disagrees with relation count"});
}

void sort_violations(std::vector<Violation>& out) {
    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
        if (a.rule != b.rule) return a.rule < b.rule;
        return a.detail < b.detail;
    });
}

} // namespace

std::vector<Violation> verify_graph(const KnowledgeGraph& graph) {
    std::vector<Violation> out;
    verify_core(graph, out);
    sort_violations(out);
    return out;
}

std::vector<Violation> verify_graph(const KnowledgeGraph& graph, const ChunkStore& chunks) {
    std::vector<Violation> out;
    verify_core(graph, out);
    for (const auto& [id, e] : graph.entities()) {
        if (!e.source_chunk_id.empty() && !chunks.has(e.source_chunk_id))
            out.push_back({id, "chunk_ref",
                           "source chunk '" + e.source_chunk_id + "' is not in the chunk store"});
        if (!e.source_id.empty() && !chunks.sources.count(e.source_id))
            out.push_back({id, "source_ref",
                           "source '" + e.source_id + "' is not in the chunk store"});
    }
    sort_violations(out);
    return out;
}

const Chunk& ChunkStore::get(const std::string& chunk_id) const {
    auto it = chunks.find(chunk_id);
    if (it == chunks.end()) fail(ErrorCode::not_found, "no chunk with id '" + chunk_id + "'");
    return it->second;
}

void ChunkStore::add_source(SourceMeta meta) {
    if (meta.id.empty()) fail(ErrorCode::invalid_argument, "source id must not be empty");
    sources[meta.id] = std::move(meta);
}

void ChunkStore::add_chunk(Chunk chunk) {
    if (chunk.id.empty()) fail(ErrorCode::invalid_argument, "chunk id must not be empty");
    if (chunks.count(chunk.id)) fail(ErrorCode::validation, "duplicate chunk id '" + chunk.id + "'");
    if (!sources.count(chunk.source_id))
        fail(ErrorCode::validation,
             "chunk '" + chunk.id + "' references unknown source '" + chunk.source_id + "'");
    chunks.emplace(chunk.id, std::move(chunk));
}

std::vector<const Chunk*> ChunkStore::chunks_for_source(const std::string& source_id) const {
    std::vector<const Chunk*> out;
    for (const auto& [id, c] : chunks)
        if (c.source_id == source_id) out.push_back(&c);
    return out;
}

} // namespace pg

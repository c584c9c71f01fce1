#include "policygraph/graph_store.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "policygraph/error.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

namespace {

void sort_hits(std::vector<SearchHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entity_id < b.entity_id;
    });
}

} // namespace

std::vector<SearchHit> keyword_search(const KnowledgeGraph& graph, const std::string& query,
                                      std::size_t k) {
    if (k == 0) fail(ErrorCode::invalid_argument, "keyword_search: k must be >= 1");
    auto query_tokens = tokenize(query);
    if (query_tokens.empty())
        fail(ErrorCode::invalid_argument, "keyword_search: query has no tokens");
    std::set<std::string> unique_tokens(query_tokens.begin(), query_tokens.end());

    std::vector<SearchHit> hits;
    for (const auto& [id, e] : graph.entities()) {
        auto name_toks = tokenize(e.name);
        auto desc_toks = tokenize(e.description);
        std::set<std::string> name_set(name_toks.begin(), name_toks.end());
        std::set<std::string> desc_set(desc_toks.begin(), desc_toks.end());
        double score = 0.0;
        for (const auto& tok : unique_tokens) {
            if (name_set.count(tok))
                score += 2.0;
            else if (desc_set.count(tok))
                score += 1.0;
        }
        if (score > 0.0) hits.push_back({id, score, MatchKind::Keyword});
    }
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::string entity_embedding_text(const Entity& e) {
    if (e.description.empty()) return e.name;
    return e.name + ": " + e.description;
}

std::size_t embed_entities(KnowledgeGraph& graph, Embedder& embedder) {
    std::vector<std::string> ids;
    std::vector<std::string> texts;
    for (const auto& [id, e] : graph.entities()) {
        if (e.embedding) continue;
        ids.push_back(id);
        texts.push_back(entity_embedding_text(e));
    }
    if (ids.empty()) return 0;
    auto vectors = embedder.embed(texts);
    for (std::size_t i = 0; i < ids.size(); ++i)
        graph.entity_mut(ids[i]).embedding = std::move(vectors[i]);
    return ids.size();
}

std::vector<SearchHit> semantic_search(const KnowledgeGraph& graph, const std::string& query,
                                       std::size_t k, Embedder& embedder) {
    if (k == 0) fail(ErrorCode::invalid_argument, "semantic_search: k must be >= 1");
    if (graph.entities().empty()) return {};
    for (const auto& [id, e] : graph.entities())
        if (!e.embedding)
            fail(ErrorCode::validation, "entity '" + id +
                                            "' has no embedding; run the embedding pass before "
                                            "semantic search");
    auto q = embedder.embed_one(query);
    std::vector<SearchHit> hits;
    for (const auto& [id, e] : graph.entities()) {
        if (e.embedding->size() != q.size())
            fail(ErrorCode::validation, "entity '" + id + "' embedding dimension " +
                                            std::to_string(e.embedding->size()) +
                                            " does not match the embedder's " +
                                            std::to_string(q.size()));
        hits.push_back({id, cosine(q, *e.embedding), MatchKind::Semantic});
    }
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

Subgraph expand_neighbors(const KnowledgeGraph& graph, const std::string& entity_id,
                          std::size_t depth) {
    if (!graph.has_entity(entity_id))
        fail(ErrorCode::not_found, "no entity with id '" + entity_id + "'");
    if (depth == 0) fail(ErrorCode::invalid_argument, "expand_neighbors: depth must be >= 1");

    Subgraph result;
    std::set<std::string> visited{entity_id};
    result.entity_ids.push_back(entity_id);
    std::deque<std::pair<std::string, std::size_t>> frontier{{entity_id, 0}};
    while (!frontier.empty()) {
        auto [cur, dist] = frontier.front();
        frontier.pop_front();
        if (dist == depth) continue;
        for (const auto& next : graph.neighbors(cur)) {
            if (visited.count(next)) continue;
            visited.insert(next);
            result.entity_ids.push_back(next);
            frontier.emplace_back(next, dist + 1);
        }
    }
    for (const auto& [rid, rel] : graph.relations())
        if (visited.count(rel.source_entity_id) && visited.count(rel.target_entity_id))
            result.relation_ids.push_back(rid);
    return result;
}

EntityDetailResult entity_detail(const KnowledgeGraph& graph, const std::string& entity_id) {
    EntityDetailResult result;
    result.entity = graph.entity(entity_id); // throws not_found
    for (const auto& rid : graph.incident_relations(entity_id)) {
        const Relation& rel = graph.relation(rid);
        result.incident.push_back({rid, rel.source_entity_id == entity_id});
    }
    return result;
}

std::optional<PathResult> find_path(const KnowledgeGraph& graph, const std::string& src_id,
                                    const std::string& dst_id, std::size_t max_len) {
    if (!graph.has_entity(src_id)) fail(ErrorCode::not_found, "no entity with id '" + src_id + "'");
    if (!graph.has_entity(dst_id)) fail(ErrorCode::not_found, "no entity with id '" + dst_id + "'");
    if (max_len == 0) fail(ErrorCode::invalid_argument, "find_path: max_len must be >= 1");

    PathResult path;
    path.entity_ids.push_back(src_id);
    if (src_id == dst_id) return path;

    // Distance-to-destination map, then a greedy forward walk that always
    // takes the smallest-id neighbor still on a shortest path — yielding the
    // lexicographically smallest entity-id sequence among all shortest paths.
    std::map<std::string, std::size_t> dist;
    dist[dst_id] = 0;
    std::deque<std::string> frontier{dst_id};
    while (!frontier.empty()) {
        std::string cur = frontier.front();
        frontier.pop_front();
        std::size_t d = dist[cur];
        if (d == max_len) continue;
        for (const auto& next : graph.neighbors(cur)) {
            if (dist.count(next)) continue;
            dist[next] = d + 1;
            frontier.push_back(next);
        }
    }
    auto it = dist.find(src_id);
    if (it == dist.end() || it->second > max_len) return std::nullopt;

    std::string cur = src_id;
    std::size_t remaining = it->second;
    while (cur != dst_id) {
        std::string chosen;
        for (const auto& next : graph.neighbors(cur)) { // id order
            auto dn = dist.find(next);
            if (dn != dist.end() && dn->second == remaining - 1) {
                chosen = next;
                break;
            }
        }
        std::string hop_relation;
        for (const auto& rid : graph.incident_relations(cur)) { // id order
            const Relation& rel = graph.relation(rid);
            if ((rel.source_entity_id == cur && rel.target_entity_id == chosen) ||
                (rel.target_entity_id == cur && rel.source_entity_id == chosen)) {
                hop_relation = rid;
                break;
            }
        }
        path.entity_ids.push_back(chosen);
        path.relation_ids.push_back(hop_relation);
        cur = chosen;
        --remaining;
    }
    return path;
}

std::string schema_summary(const KnowledgeGraph& graph) {
    const auto& schema = graph.schema();
    std::ostringstream out;
    out << "GRAPH SUMMARY\n";
    out << "mode: " << (schema.mode() == SchemaMode::Closed ? "CLOSED" : "OPEN") << "\n";
    out << "entities: " << graph.entities().size() << "\n";
    out << "relations: " << graph.relations().size() << "\n";
    auto sources = graph.source_ids();
    out << "sources:";
    for (std::size_t i = 0; i < sources.size(); ++i) out << (i ? ", " : " ") << sources[i];
    out << "\n";
    out << "entity types:\n";
    for (const auto& type : schema.entity_types()) {
        auto it = graph.entity_type_counts().find(type);
        out << "  " << type << ": " << (it == graph.entity_type_counts().end() ? 0 : it->second)
            << "\n";
    }
    out << "relation types:\n";
    for (const auto& type : schema.relation_types()) {
        auto it = graph.relation_type_counts().find(type);
        out << "  " << type << ": " << (it == graph.relation_type_counts().end() ? 0 : it->second)
            << "\n";
    }
    return out.str();
}

} // namespace pg

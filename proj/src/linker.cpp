#include "policygraph/linker.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "policygraph/error.hpp"
#include "policygraph/graph_store.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

void LinkerConfig::validate() const {
    if (cosine_threshold <= 0.0 || cosine_threshold > 1.0)
        fail(ErrorCode::invalid_argument, "cosine_threshold must be in (0,1]");
    if (string_threshold <= 0.0 || string_threshold > 1.0)
        fail(ErrorCode::invalid_argument, "string_threshold must be in (0,1]");
    if (max_links_per_entity == 0)
        fail(ErrorCode::invalid_argument, "max_links_per_entity must be >= 1");
}

double string_similarity(const std::string& a, const std::string& b) {
    if (a.empty() || b.empty())
        fail(ErrorCode::invalid_argument, "string_similarity requires non-empty inputs");
    std::string fa = to_lower(collapse_whitespace(a));
    std::string fb = to_lower(collapse_whitespace(b));
    if (fa.empty() || fb.empty())
        fail(ErrorCode::invalid_argument, "string_similarity inputs collapse to empty");
    std::size_t longest = std::max(fa.size(), fb.size());
    return 1.0 - static_cast<double>(levenshtein(fa, fb)) / static_cast<double>(longest);
}

namespace {

struct Candidate {
    double score;
    std::string a; // entity id, a < b
    std::string b;
};

bool candidate_before(const Candidate& x, const Candidate& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
}

std::size_t corresponds_degree(const KnowledgeGraph& graph, const std::string& entity_id) {
    std::size_t n = 0;
    for (const auto& rid : graph.incident_relations(entity_id))
        if (graph.relation(rid).relation_type == kCorrespondsTo) ++n;
    return n;
}

} // namespace

std::vector<Relation> link_cross_policy(KnowledgeGraph& graph, const LinkerConfig& config,
                                        Embedder* embedder) {
    config.validate();
    if (graph.source_ids().size() < 2) return {};

    // Pairs already joined by a CORRESPONDS_TO edge keep their slot and are
    // never re-scored — this is what makes re-runs add nothing.
    std::set<std::pair<std::string, std::string>> linked;
    for (const auto& [rid, rel] : graph.relations()) {
        if (rel.relation_type != kCorrespondsTo) continue;
        auto pair = std::minmax(rel.source_entity_id, rel.target_entity_id);
        linked.emplace(pair.first, pair.second);
    }

    std::map<std::string, std::vector<double>> name_vectors;
    if (embedder) {
        if (config.embed_name_only) {
            std::vector<std::string> ids, names;
            for (const auto& [id, e] : graph.entities()) {
                ids.push_back(id);
                names.push_back(e.name);
            }
            if (!ids.empty()) {
                auto vecs = embedder->embed(names);
                for (std::size_t i = 0; i < ids.size(); ++i)
                    name_vectors[ids[i]] = std::move(vecs[i]);
            }
        } else {
            embed_entities(graph, *embedder); // fills any missing stored embeddings
        }
    }

    auto score_pair = [&](const Entity& x, const Entity& y) -> double {
        if (!embedder) return string_similarity(x.name, y.name);
        if (config.embed_name_only) return cosine(name_vectors.at(x.id), name_vectors.at(y.id));
        return cosine(*x.embedding, *y.embedding);
    };
    const double threshold = embedder ? config.cosine_threshold : config.string_threshold;

    std::vector<Candidate> candidates;
    for (auto ia = graph.entities().begin(); ia != graph.entities().end(); ++ia) {
        for (auto ib = std::next(ia); ib != graph.entities().end(); ++ib) {
            const Entity& ea = ia->second;
            const Entity& eb = ib->second;
            if (ea.source_id == eb.source_id) continue;
            if (linked.count({ia->first, ib->first})) continue;
            double score = score_pair(ea, eb);
            if (score >= threshold) candidates.push_back({score, ia->first, ib->first});
        }
    }
    std::sort(candidates.begin(), candidates.end(), candidate_before);

    // Each entity allows its best `capacity` new candidates; an edge lands
    // only when allowed by both endpoints.
    std::map<std::string, std::size_t> capacity;
    auto remaining = [&](const std::string& id) -> std::size_t {
        auto it = capacity.find(id);
        if (it != capacity.end()) return it->second;
        std::size_t used = corresponds_degree(graph, id);
        std::size_t cap =
            used >= config.max_links_per_entity ? 0 : config.max_links_per_entity - used;
        capacity[id] = cap;
        return cap;
    };
    std::map<std::string, std::set<std::size_t>> allowance;
    {
        std::map<std::string, std::size_t> taken;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (const std::string* id : {&candidates[i].a, &candidates[i].b}) {
                if (taken[*id] < remaining(*id)) {
                    allowance[*id].insert(i);
                    taken[*id]++;
                }
            }
        }
    }

    std::vector<Relation> added;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Candidate& c = candidates[i];
        if (!allowance[c.a].count(i) || !allowance[c.b].count(i)) continue;
        const Entity& ea = graph.entity(c.a);
        const Entity& eb = graph.entity(c.b);
        const bool a_first = ea.source_id < eb.source_id;
        Relation rel;
        rel.source_entity_id = a_first ? c.a : c.b;
        rel.target_entity_id = a_first ? c.b : c.a;
        rel.relation_type = kCorrespondsTo;
        rel.id = "corr_" + rel.source_entity_id + "__" + rel.target_entity_id;
        rel.description = embedder ? "cross-policy correspondence (embedding cosine)"
                                   : "cross-policy correspondence (name similarity)";
        rel.similarity = c.score;
        graph.add_relation(rel);
        added.push_back(std::move(rel));
    }
    return added;
}

} // namespace pg

#include "policygraph/extractor.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "policygraph/error.hpp"
#include "policygraph/graph_store.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

ExtractionContext build_context(const KnowledgeGraph& graph, const std::string& current_source,
                                std::size_t k_same, std::size_t k_cross) {
    ExtractionContext ctx;

    // Same-source: the k_same most recently added, presented oldest-first.
    std::vector<const Entity*> same;
    for (auto it = graph.entity_order().rbegin(); it != graph.entity_order().rend(); ++it) {
        const Entity& e = graph.entity(*it);
        if (e.source_id != current_source) continue;
        same.push_back(&e);
        if (same.size() == k_same) break;
    }
    std::reverse(same.begin(), same.end());
    for (const Entity* e : same)
        ctx.same_source_entities.push_back(
            {e->id, e->name, e->entity_type, one_line(e->description, 120)});

    // Cross-source: highest total degree wins, ties by id.
    std::vector<std::pair<std::size_t, const Entity*>> foreign;
    for (const auto& [id, e] : graph.entities())
        if (e.source_id != current_source) foreign.emplace_back(graph.degree(id), &e);
    std::sort(foreign.begin(), foreign.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->id < b.second->id;
    });
    if (foreign.size() > k_cross) foreign.resize(k_cross);
    for (const auto& [degree, e] : foreign)
        ctx.cross_source_entities.push_back(
            {e->id, e->name, e->entity_type, one_line(e->description, 120)});

    if (graph.schema().mode() == SchemaMode::Open) {
        for (const auto& t : graph.schema().entity_types()) ctx.open_entity_types.push_back(t);
        for (const auto& t : graph.schema().relation_types())
            if (t != kCorrespondsTo) ctx.open_relation_types.push_back(t);
    }
    return ctx;
}

std::string render_schema_description(const OntologySchema& schema) {
    std::ostringstream out;
    if (schema.mode() == SchemaMode::Closed) {
        out << "Schema mode: CLOSED\n";
        out << "Entity types:";
        bool first = true;
        for (const auto& t : schema.entity_types()) {
            out << (first ? " " : ", ") << t;
            first = false;
        }
        out << "\n";
        out << "Relation direction rules (source -> target):\n";
        for (const auto& r : schema.direction_rules())
            out << "  " << r.relation_type << ": " << r.source_type << " -> " << r.target_type
                << "\n";
        out << "CORRESPONDS_TO links equivalent entities across different sources (any types).\n";
    } else {
        out << "Schema mode: OPEN\n";
        out << "Invent entity and relation type labels as the text demands; labels are\n";
        out << "normalized to lowercase_with_underscores.\n";
        auto render_vocab = [&out](const char* title, const std::set<std::string>& vocab,
                                   bool skip_corresponds) {
            out << title;
            bool any = false;
            for (const auto& t : vocab) {
                if (skip_corresponds && t == kCorrespondsTo) continue;
                out << (any ? ", " : " ") << t;
                any = true;
            }
            if (!any) out << " (none yet)";
            out << "\n";
        };
        render_vocab("Observed entity types:", schema.entity_types(), false);
        render_vocab("Observed relation types:", schema.relation_types(), true);
    }
    return out.str();
}

std::string render_context_entities(const std::vector<ContextEntity>& entities) {
    if (entities.empty()) return "(none)\n";
    std::ostringstream out;
    for (const auto& e : entities)
        out << e.id << " | " << e.name << " | " << e.entity_type << " | " << e.description << "\n";
    return out.str();
}

namespace {

std::string get_string_field(const json& item, const char* key, bool required,
                             const std::string& where) {
    if (!item.contains(key)) {
        if (required) fail(ErrorCode::parse, where + ": missing field '" + key + "'");
        return {};
    }
    if (!item[key].is_string())
        fail(ErrorCode::parse, where + ": field '" + key + "' must be a string");
    return item[key].get<std::string>();
}

} // namespace

RawExtraction parse_entities_payload(const std::string& model_text) {
    json obj = parse_fenced_json(model_text);
    if (!obj.is_object() || !obj.contains("entities") || !obj["entities"].is_array())
        fail(ErrorCode::parse, "expected a JSON object with an \"entities\" array");
    RawExtraction out;
    for (const auto& item : obj["entities"]) {
        if (!item.is_object()) fail(ErrorCode::parse, "entity entries must be objects");
        RawEntity e;
        e.name = get_string_field(item, "name", true, "entity");
        e.entity_type = get_string_field(item, "entity_type", true, "entity");
        e.description = get_string_field(item, "description", false, "entity");
        e.article_ref = get_string_field(item, "article_ref", false, "entity");
        e.policy_quote = get_string_field(item, "policy_quote", false, "entity");
        out.entities.push_back(std::move(e));
    }
    return out;
}

RawExtraction parse_relations_payload(const std::string& model_text) {
    json obj = parse_fenced_json(model_text);
    if (!obj.is_object() || !obj.contains("relations") || !obj["relations"].is_array())
        fail(ErrorCode::parse, "expected a JSON object with a \"relations\" array");
    RawExtraction out;
    for (const auto& item : obj["relations"]) {
        if (!item.is_object()) fail(ErrorCode::parse, "relation entries must be objects");
        RawRelation r;
        r.relation_type = get_string_field(item, "relation_type", true, "relation");
        r.source_entity_id = get_string_field(item, "source_entity_id", true, "relation");
        r.target_entity_id = get_string_field(item, "target_entity_id", true, "relation");
        r.description = get_string_field(item, "description", false, "relation");
        out.relations.push_back(std::move(r));
    }
    return out;
}

namespace {

// One completion with a single retry on parse failure; parse_fn throws
// Error(parse) on bad shape. Returns nullopt after the second failure.
template <typename T, typename ParseFn>
std::optional<T> call_and_parse(ChatProvider& provider, ChatRequest request, ParseFn parse_fn,
                                std::string* failure) {
    ChatResponse response = provider.complete(request);
    std::string text = response.text.value_or(std::string{});
    try {
        return parse_fn(text);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::parse) throw;
        ChatRequest retry = request;
        retry.messages.push_back({"assistant", text});
        retry.messages.push_back({"user", std::string("Your previous reply could not be parsed: ") +
                                              e.what() + "\nReply again with only the fenced JSON."});
        ChatResponse second = provider.complete(retry);
        try {
            return parse_fn(second.text.value_or(std::string{}));
        } catch (const Error& e2) {
            if (e2.code() != ErrorCode::parse) throw;
            if (failure) *failure = e2.what();
            return std::nullopt;
        }
    }
}

} // namespace

ChunkReport extract_chunk(const Chunk& chunk, KnowledgeGraph& graph,
                          const ExtractionContext& context, ChatProvider& provider,
                          const ExtractionTemplates& templates, const ExtractorConfig& config) {
    if (chunk.text.size() > config.max_chunk_chars)
        fail(ErrorCode::invalid_argument, "chunk '" + chunk.id + "' exceeds max_chunk_chars");

    ChunkReport report;
    report.chunk_id = chunk.id;
    const std::string schema_desc = render_schema_description(graph.schema());
    const bool open_mode = graph.schema().mode() == SchemaMode::Open;

    // Pass 1: entities.
    std::string prompt = templates.entities_prompt;
    prompt = replace_all(std::move(prompt), "{{schema_description}}", schema_desc);
    prompt = replace_all(std::move(prompt), "{{same_source_entities}}",
                         render_context_entities(context.same_source_entities));
    prompt = replace_all(std::move(prompt), "{{cross_source_entities}}",
                         render_context_entities(context.cross_source_entities));
    prompt = replace_all(std::move(prompt), "{{chunk_text}}", chunk.text);

    ChatRequest request;
    request.messages.push_back({"user", prompt});
    request.model_id = config.model_id;

    std::string failure;
    auto entities = call_and_parse<RawExtraction>(
        provider, request, [](const std::string& t) { return parse_entities_payload(t); },
        &failure);
    if (!entities) {
        report.failed = true;
        report.failure = "entity pass: " + failure;
        return report;
    }

    for (const auto& raw : entities->entities) {
        Entity e;
        e.name = collapse_whitespace(raw.name);
        if (e.name.empty()) {
            report.rejections.push_back("entity with empty name rejected");
            continue;
        }
        if (open_mode) {
            try {
                e.entity_type = normalize_type_label(raw.entity_type);
            } catch (const Error&) {
                report.rejections.push_back("entity '" + e.name + "': unusable type label '" +
                                            raw.entity_type + "'");
                continue;
            }
        } else {
            e.entity_type = trim(raw.entity_type);
            if (!graph.schema().has_entity_type(e.entity_type)) {
                report.rejections.push_back("entity '" + e.name + "': type '" + raw.entity_type +
                                            "' is not in the closed schema");
                continue;
            }
        }
        e.description = raw.description;
        e.article_ref = raw.article_ref;
        e.policy_quote = raw.policy_quote;
        e.source_id = chunk.source_id;
        e.source_chunk_id = chunk.id;
        e.id = graph.allocate_entity_id(chunk.source_id);
        std::string id = e.id;
        graph.add_entity(std::move(e));
        report.added_entities.push_back(std::move(id));
    }

    // Pass 2: relations, with the ids issued above plus the context catalog.
    std::ostringstream catalog;
    for (const auto& id : report.added_entities) {
        const Entity& e = graph.entity(id);
        catalog << e.id << " | " << e.name << " | " << e.entity_type << "\n";
    }
    for (const auto& c : context.same_source_entities)
        catalog << c.id << " | " << c.name << " | " << c.entity_type << "\n";
    for (const auto& c : context.cross_source_entities)
        catalog << c.id << " | " << c.name << " | " << c.entity_type << "\n";

    std::string rel_prompt = templates.relations_prompt;
    rel_prompt = replace_all(std::move(rel_prompt), "{{schema_description}}", schema_desc);
    rel_prompt = replace_all(std::move(rel_prompt), "{{entity_catalog}}", catalog.str());
    rel_prompt = replace_all(std::move(rel_prompt), "{{chunk_text}}", chunk.text);

    ChatRequest rel_request;
    rel_request.messages.push_back({"user", rel_prompt});
    rel_request.model_id = config.model_id;

    auto relations = call_and_parse<RawExtraction>(
        provider, rel_request, [](const std::string& t) { return parse_relations_payload(t); },
        &failure);
    if (!relations) {
        report.failed = true;
        report.failure = "relation pass: " + failure;
        return report; // pass-1 entities stay in the graph
    }

    for (const auto& raw : relations->relations) {
        Relation r;
        r.relation_type = open_mode && raw.relation_type != kCorrespondsTo
                              ? normalize_type_label(raw.relation_type)
                              : trim(raw.relation_type);
        r.source_entity_id = trim(raw.source_entity_id);
        r.target_entity_id = trim(raw.target_entity_id);
        r.description = raw.description;
        r.id = graph.allocate_relation_id(chunk.source_id);
        if (auto err = graph.try_add_relation(r)) {
            report.rejections.push_back("relation " + r.relation_type + " " + r.source_entity_id +
                                        " -> " + r.target_entity_id + ": " + *err);
        } else {
            report.added_relations.push_back(r.id);
        }
    }
    return report;
}

MergeReport dedup_entities(KnowledgeGraph& graph) {
    MergeReport report;
    // Group by (folded name, type, source) in insertion order; first id wins.
    std::map<std::string, std::string> canonical; // key -> kept id
    std::vector<std::pair<std::string, std::string>> to_merge; // (dup, kept)
    for (const auto& id : graph.entity_order()) {
        const Entity& e = graph.entity(id);
        std::string key = to_lower(collapse_whitespace(e.name)) + "\x1f" + e.entity_type + "\x1f" +
                          e.source_id;
        auto [it, inserted] = canonical.emplace(key, id);
        if (!inserted) to_merge.emplace_back(id, it->second);
    }
    for (const auto& [dup_id, kept_id] : to_merge) {
        Entity dup = graph.entity(dup_id);
        Merge merge;
        merge.kept_id = kept_id;
        merge.merged_id = dup_id;
        merge.name = dup.name;
        merge.entity_type = dup.entity_type;
        merge.source_id = dup.source_id;
        merge.dropped_relations = graph.repoint_relations(dup_id, kept_id);

        Entity& kept = graph.entity_mut(kept_id);
        if (!dup.description.empty() && dup.description != kept.description) {
            kept.description = kept.description.empty()
                                   ? dup.description
                                   : kept.description + " | " + dup.description;
            kept.embedding.reset(); // description changed; embedding is stale
        }
        if (kept.article_ref.empty()) kept.article_ref = dup.article_ref;
        if (kept.policy_quote.empty()) kept.policy_quote = dup.policy_quote;
        graph.remove_entity(dup_id);
        report.merges.push_back(std::move(merge));
    }
    return report;
}

std::vector<ChunkReport> extract_corpus(const ChunkStore& store, KnowledgeGraph& graph,
                                        ChatProvider& provider,
                                        const ExtractionTemplates& templates,
                                        const ExtractorConfig& config, Embedder* embedder,
                                        MergeReport* merge_report) {
    std::vector<ChunkReport> reports;
    for (const auto& [source_id, meta] : store.sources) {
        for (const Chunk* chunk : store.chunks_for_source(source_id)) {
            ExtractionContext ctx =
                build_context(graph, source_id, config.k_same, config.k_cross);
            reports.push_back(
                extract_chunk(*chunk, graph, ctx, provider, templates, config));
        }
    }
    MergeReport merges = dedup_entities(graph);
    if (merge_report) *merge_report = std::move(merges);
    if (embedder) embed_entities(graph, *embedder);
    return reports;
}

} // namespace pg

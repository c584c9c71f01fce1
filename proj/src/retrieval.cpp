#include "policygraph/retrieval.hpp"

#include <algorithm>
#include <set>

#include "policygraph/error.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

TaskType task_type_from_string(const std::string& s) {
    std::string t = trim(s);
    if (t.size() == 2 && (t[0] == 'T' || t[0] == 't') && t[1] >= '1' && t[1] <= '6')
        return static_cast<TaskType>(t[1] - '1');
    fail(ErrorCode::parse, "unknown task type '" + s + "' (expected T1..T6)");
}

std::string task_type_to_string(TaskType t) {
    return "T" + std::to_string(static_cast<int>(t) + 1);
}

void AgentConfig::validate() const {
    if (max_steps == 0) fail(ErrorCode::invalid_argument, "max_steps must be >= 1");
    if (expand_seeds == 0 || expand_seeds > direct_top_k)
        fail(ErrorCode::invalid_argument, "expand_seeds must satisfy 1 <= expand_seeds <= direct_top_k");
}

RouteDecision route_fallback(const std::string& question, std::optional<TaskType> hint) {
    RouteDecision d;
    d.decided_by = RouteOrigin::Fallback;
    if (hint) {
        bool agent = *hint == TaskType::T4 || *hint == TaskType::T5 || *hint == TaskType::T6;
        d.path = agent ? RetrievalPath::Agent : RetrievalPath::Direct;
        d.rationale = "task-type hint " + task_type_to_string(*hint);
        return d;
    }
    static const char* kAgentKeywords[] = {"across",   "compare",  "correspond",
                                           "complian", "multiple", "all three"};
    for (const char* kw : kAgentKeywords) {
        if (contains_ci(question, kw)) {
            d.path = RetrievalPath::Agent;
            d.rationale = std::string("question keyword \"") + kw + "\"";
            return d;
        }
    }
    d.path = RetrievalPath::Direct;
    d.rationale = "no agent keyword in question";
    return d;
}

RouteDecision route(const std::string& question, const KnowledgeGraph& graph,
                    ChatProvider& provider, const std::string& router_template,
                    std::optional<TaskType> hint, const std::string& model_id) {
    std::string prompt = router_template;
    prompt = replace_all(std::move(prompt), "{{question}}", question);
    prompt = replace_all(std::move(prompt), "{{schema_summary}}", schema_summary(graph));

    ChatRequest request;
    request.messages.push_back({"user", prompt});
    request.model_id = model_id;

    std::string reply;
    try {
        ChatResponse response = provider.complete(request);
        reply = response.text.value_or(std::string{});
    } catch (const Error&) {
        RouteDecision d = route_fallback(question, hint);
        d.rationale = "router call failed; " + d.rationale;
        return d;
    }
    std::string verdict = to_lower(trim(reply));
    if (verdict == "direct")
        return {RetrievalPath::Direct, "model replied \"direct\"", RouteOrigin::Model};
    if (verdict == "agent")
        return {RetrievalPath::Agent, "model replied \"agent\"", RouteOrigin::Model};
    RouteDecision d = route_fallback(question, hint);
    d.rationale = "router replied \"" + one_line(reply, 60) + "\"; " + d.rationale;
    return d;
}

void finalize_bundle(const KnowledgeGraph& graph, EvidenceBundle& bundle) {
    std::set<std::string> evidence(bundle.entity_ids.begin(), bundle.entity_ids.end());
    bundle.relation_ids.clear();
    for (const auto& [rid, rel] : graph.relations())
        if (evidence.count(rel.source_entity_id) && evidence.count(rel.target_entity_id))
            bundle.relation_ids.push_back(rid);
    bundle.chunk_ids.clear();
    std::set<std::string> seen_chunks;
    for (const auto& eid : bundle.entity_ids) {
        const auto& chunk_id = graph.entity(eid).source_chunk_id;
        if (chunk_id.empty() || seen_chunks.count(chunk_id)) continue;
        seen_chunks.insert(chunk_id);
        bundle.chunk_ids.push_back(chunk_id);
    }
}

EvidenceBundle direct_retrieve(const std::string& question, const KnowledgeGraph& graph,
                               Embedder& embedder, const AgentConfig& config) {
    config.validate();
    EvidenceBundle bundle;
    auto seeds = semantic_search(graph, question, config.direct_top_k, embedder);
    {
        json args{{"query", question}, {"k", config.direct_top_k}};
        json hits = json::array();
        for (const auto& h : seeds) hits.push_back({{"id", h.entity_id}, {"score", h.score}});
        bundle.trace.push_back({"semantic_search", args, json{{"hits", hits}}.dump()});
    }
    std::set<std::string> seen;
    for (const auto& hit : seeds) {
        if (seen.insert(hit.entity_id).second) bundle.entity_ids.push_back(hit.entity_id);
    }
    std::size_t expansions = std::min(config.expand_seeds, seeds.size());
    for (std::size_t i = 0; i < expansions; ++i) {
        Subgraph sub = expand_neighbors(graph, seeds[i].entity_id, 1);
        json added = json::array();
        for (const auto& eid : sub.entity_ids) {
            if (seen.insert(eid).second) {
                bundle.entity_ids.push_back(eid);
                added.push_back(eid);
            }
        }
        bundle.trace.push_back({"expand_neighbors",
                                json{{"entity_id", seeds[i].entity_id}, {"depth", 1}},
                                json{{"added", added}}.dump()});
    }
    finalize_bundle(graph, bundle);
    return bundle;
}

std::vector<ToolDecl> agent_tool_decls() {
    auto obj = [](std::initializer_list<std::pair<const char*, const char*>> props,
                  std::initializer_list<const char*> required) {
        json schema{{"type", "object"}};
        json properties = json::object();
        for (const auto& [name, type] : props) properties[name] = {{"type", type}};
        schema["properties"] = std::move(properties);
        json req = json::array();
        for (const char* r : required) req.push_back(r);
        schema["required"] = std::move(req);
        return schema;
    };
    std::vector<ToolDecl> decls;
    decls.push_back({"keyword_search", "Token match over entity names and descriptions.",
                     obj({{"query", "string"}, {"k", "integer"}}, {"query"})});
    decls.push_back({"semantic_search", "Embedding similarity search over entities.",
                     obj({{"query", "string"}, {"k", "integer"}}, {"query"})});
    decls.push_back({"expand_neighbors", "Entities and relations within `depth` hops.",
                     obj({{"entity_id", "string"}, {"depth", "integer"}}, {"entity_id"})});
    decls.push_back({"entity_detail", "Every stored field of one entity plus its relations.",
                     obj({{"entity_id", "string"}}, {"entity_id"})});
    decls.push_back({"find_path", "Shortest connection between two entities.",
                     obj({{"source_id", "string"}, {"target_id", "string"}, {"max_len", "integer"}},
                         {"source_id", "target_id"})});
    ToolDecl terminal;
    terminal.name = "synthesize_answer";
    terminal.description =
        "Finish retrieval: hand over the entity ids that constitute the evidence.";
    terminal.parameters = {{"type", "object"},
                           {"properties",
                            {{"evidence_ids",
                              {{"type", "array"}, {"items", {{"type", "string"}}}}}}},
                           {"required", {"evidence_ids"}}};
    decls.push_back(std::move(terminal));
    return decls;
}

namespace {

constexpr std::size_t kResultEntityCap = 20;

json entity_row(const KnowledgeGraph& graph, const std::string& id) {
    const Entity& e = graph.entity(id);
    return {{"id", e.id},
            {"name", e.name},
            {"type", e.entity_type},
            {"description", one_line(e.description, 120)}};
}

json hit_rows(const KnowledgeGraph& graph, const std::vector<SearchHit>& hits) {
    json rows = json::array();
    for (const auto& h : hits) {
        if (rows.size() == kResultEntityCap) break;
        json row = entity_row(graph, h.entity_id);
        row["score"] = h.score;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string require_arg_string(const json& args, const char* key) {
    if (!args.is_object() || !args.contains(key) || !args[key].is_string())
        fail(ErrorCode::invalid_argument, std::string("missing string argument '") + key + "'");
    return args[key].get<std::string>();
}

std::size_t optional_arg_uint(const json& args, const char* key, std::size_t fallback) {
    if (!args.is_object() || !args.contains(key)) return fallback;
    if (!args[key].is_number_unsigned() || args[key].get<std::size_t>() == 0)
        fail(ErrorCode::invalid_argument, std::string("argument '") + key + "' must be a positive integer");
    return args[key].get<std::size_t>();
}

} // namespace

json execute_agent_tool(const KnowledgeGraph& graph, Embedder& embedder, const std::string& name,
                        const json& arguments) {
    if (name == "keyword_search") {
        auto hits = keyword_search(graph, require_arg_string(arguments, "query"),
                                   optional_arg_uint(arguments, "k", 5));
        return {{"hits", hit_rows(graph, hits)}};
    }
    if (name == "semantic_search") {
        auto hits = semantic_search(graph, require_arg_string(arguments, "query"),
                                    optional_arg_uint(arguments, "k", 5), embedder);
        return {{"hits", hit_rows(graph, hits)}};
    }
    if (name == "expand_neighbors") {
        Subgraph sub = expand_neighbors(graph, require_arg_string(arguments, "entity_id"),
                                        optional_arg_uint(arguments, "depth", 1));
        json entities = json::array();
        for (const auto& eid : sub.entity_ids) {
            if (entities.size() == kResultEntityCap) break;
            entities.push_back(entity_row(graph, eid));
        }
        json relations = json::array();
        for (const auto& rid : sub.relation_ids) {
            const Relation& rel = graph.relation(rid);
            relations.push_back({{"id", rid},
                                 {"type", rel.relation_type},
                                 {"source", rel.source_entity_id},
                                 {"target", rel.target_entity_id}});
        }
        return {{"entities", entities}, {"relations", relations}};
    }
    if (name == "entity_detail") {
        auto detail = entity_detail(graph, require_arg_string(arguments, "entity_id"));
        json incident = json::array();
        for (const auto& inc : detail.incident) {
            const Relation& rel = graph.relation(inc.relation_id);
            incident.push_back({{"id", inc.relation_id},
                                {"type", rel.relation_type},
                                {"direction", inc.outgoing ? "outgoing" : "incoming"},
                                {"source", rel.source_entity_id},
                                {"target", rel.target_entity_id}});
        }
        json row = entity_row(graph, detail.entity.id);
        row["description"] = detail.entity.description; // uncapped in detail view
        row["article_ref"] = detail.entity.article_ref;
        row["policy_quote"] = detail.entity.policy_quote;
        row["source_id"] = detail.entity.source_id;
        row["source_chunk_id"] = detail.entity.source_chunk_id;
        row["relations"] = std::move(incident);
        return row;
    }
    if (name == "find_path") {
        auto path = find_path(graph, require_arg_string(arguments, "source_id"),
                              require_arg_string(arguments, "target_id"),
                              optional_arg_uint(arguments, "max_len", 5));
        if (!path) return {{"found", false}};
        json entities = json::array();
        for (const auto& eid : path->entity_ids) entities.push_back(entity_row(graph, eid));
        json relations = json::array();
        for (const auto& rid : path->relation_ids) {
            const Relation& rel = graph.relation(rid);
            relations.push_back({{"id", rid}, {"type", rel.relation_type}});
        }
        return {{"found", true}, {"entities", entities}, {"relations", relations}};
    }
    fail(ErrorCode::not_found, "unknown tool '" + name + "'");
}

namespace {

// Entity ids mentioned in a tool result, in result order.
void collect_entity_ids(const KnowledgeGraph& graph, const json& result,
                        std::vector<std::string>& order, std::set<std::string>& seen) {
    auto take = [&](const std::string& id) {
        if (graph.has_entity(id) && seen.insert(id).second) order.push_back(id);
    };
    if (result.contains("hits"))
        for (const auto& row : result["hits"]) take(row.value("id", std::string{}));
    if (result.contains("entities"))
        for (const auto& row : result["entities"]) take(row.value("id", std::string{}));
    if (result.contains("id") && result["id"].is_string()) take(result["id"].get<std::string>());
}

} // namespace

EvidenceBundle agent_retrieve(const std::string& question, const KnowledgeGraph& graph,
                              Embedder& embedder, ChatProvider& provider,
                              const AgentConfig& config, const std::string& system_template) {
    config.validate();
    std::string system = system_template;
    system = replace_all(std::move(system), "{{schema_summary}}", schema_summary(graph));
    system = replace_all(std::move(system), "{{max_steps}}", std::to_string(config.max_steps));

    ChatRequest request;
    request.tools = agent_tool_decls();
    request.model_id = config.model_id;
    request.messages.push_back({"system", system});
    request.messages.push_back({"user", question});

    EvidenceBundle bundle;
    std::vector<std::string> seen_order;
    std::set<std::string> seen;

    for (std::size_t step = 0; step < config.max_steps; ++step) {
        ChatResponse response = provider.complete(request);
        if (!response.tool_call) {
            // A bare text reply is recorded and the model is nudged onward;
            // it still consumes a step so the loop stays bounded.
            std::string text = response.text.value_or(std::string{});
            bundle.trace.push_back({"", json::object(), "MODEL_TEXT: " + one_line(text, 200)});
            request.messages.push_back({"assistant", text});
            request.messages.push_back(
                {"user", "Call one of the tools, or synthesize_answer to finish."});
            continue;
        }
        const ToolCall& call = *response.tool_call;
        if (call.name == "synthesize_answer") {
            TraceStep trace{call.name, call.arguments, ""};
            if (!call.arguments.is_object() || !call.arguments.contains("evidence_ids") ||
                !call.arguments["evidence_ids"].is_array()) {
                trace.result_summary = "ERROR: synthesize_answer requires an evidence_ids array";
                bundle.trace.push_back(trace);
                request.messages.push_back({"assistant", "CALL synthesize_answer"});
                request.messages.push_back({"tool", trace.result_summary});
                continue; // malformed terminal call consumes a step
            }
            std::set<std::string> in_bundle;
            json dropped = json::array();
            for (const auto& item : call.arguments["evidence_ids"]) {
                if (!item.is_string()) continue;
                std::string id = item.get<std::string>();
                if (!graph.has_entity(id)) {
                    dropped.push_back(id);
                    continue;
                }
                if (in_bundle.insert(id).second) bundle.entity_ids.push_back(id);
            }
            trace.result_summary =
                json{{"accepted", bundle.entity_ids.size()}, {"dropped", dropped}}.dump();
            bundle.trace.push_back(std::move(trace));
            finalize_bundle(graph, bundle);
            return bundle;
        }

        TraceStep trace{call.name, call.arguments, ""};
        std::string result_text;
        try {
            json result = execute_agent_tool(graph, embedder, call.name, call.arguments);
            collect_entity_ids(graph, result, seen_order, seen);
            result_text = result.dump();
        } catch (const Error& e) {
            result_text = std::string("ERROR: ") + e.what();
        }
        trace.result_summary = result_text;
        bundle.trace.push_back(std::move(trace));
        request.messages.push_back({"assistant", "CALL " + call.name + " " + call.arguments.dump()});
        request.messages.push_back({"tool", result_text});
    }

    // Step cap reached without a terminal call: keep everything seen.
    bundle.entity_ids = seen_order;
    finalize_bundle(graph, bundle);
    return bundle;
}

} // namespace pg

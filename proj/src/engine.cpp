#include "policygraph/engine.hpp"

#include <cctype>
#include <filesystem>
#include <set>

#include "policygraph/chunker.hpp"
#include "policygraph/error.hpp"
#include "policygraph/evalkit.hpp"
#include "policygraph/extractor.hpp"
#include "policygraph/graph_store.hpp"
#include "policygraph/linker.hpp"
#include "policygraph/persistence.hpp"
#include "policygraph/retrieval.hpp"
#include "policygraph/serialization.hpp"
#include "policygraph/synthesis.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

namespace {

std::string to_upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

const json& require_object(const json& args) {
    if (!args.is_object()) fail(ErrorCode::invalid_argument, "tool arguments must be an object");
    return args;
}

std::string arg_string(const json& args, const char* key) {
    if (!args.contains(key) || !args[key].is_string() || args[key].get<std::string>().empty())
        fail(ErrorCode::invalid_argument, std::string("missing required argument '") + key + "'");
    return args[key].get<std::string>();
}

std::string arg_string_or(const json& args, const char* key, const std::string& fallback) {
    if (!args.contains(key)) return fallback;
    if (!args[key].is_string())
        fail(ErrorCode::invalid_argument, std::string("argument '") + key + "' must be a string");
    return args[key].get<std::string>();
}

std::size_t arg_size_or(const json& args, const char* key, std::size_t fallback) {
    if (!args.contains(key)) return fallback;
    if (!args[key].is_number_unsigned() || args[key].get<std::size_t>() == 0)
        fail(ErrorCode::invalid_argument,
             std::string("argument '") + key + "' must be a positive integer");
    return args[key].get<std::size_t>();
}

bool arg_bool_or(const json& args, const char* key, bool fallback) {
    if (!args.contains(key)) return fallback;
    if (!args[key].is_boolean())
        fail(ErrorCode::invalid_argument, std::string("argument '") + key + "' must be a boolean");
    return args[key].get<bool>();
}

json entity_row(const Entity& e) {
    return json{{"id", e.id},
                {"name", e.name},
                {"entity_type", e.entity_type},
                {"source_id", e.source_id}};
}

json relation_row(const Relation& r) {
    json row{{"id", r.id},
             {"relation_type", r.relation_type},
             {"source_entity_id", r.source_entity_id},
             {"target_entity_id", r.target_entity_id}};
    if (r.similarity) row["similarity"] = *r.similarity;
    return row;
}

json hits_to_json(const KnowledgeGraph& graph, const std::vector<SearchHit>& hits) {
    json rows = json::array();
    for (const auto& hit : hits) {
        json row = entity_row(graph.entity(hit.entity_id));
        row["score"] = hit.score;
        rows.push_back(std::move(row));
    }
    return rows;
}

json schema_object(const char* type, std::initializer_list<std::pair<const char*, json>> props,
                   std::initializer_list<const char*> required) {
    json properties = json::object();
    for (const auto& [name, schema] : props) properties[name] = schema;
    json out{{"type", type}, {"properties", std::move(properties)}};
    json req = json::array();
    for (const char* r : required) req.push_back(r);
    out["required"] = std::move(req);
    return out;
}

json prop(const char* type, const char* description) {
    return json{{"type", type}, {"description", description}};
}

} // namespace

Engine::Engine(Config config) : config_(std::move(config)), assets_(config_.assets_dir) {
    config_.validate();
    if (config_.provider.kind == "replay") {
        provider_ = ReplayChatProvider::from_file(config_.provider.script_path);
    } else if (config_.provider.kind == "http") {
        HttpProviderConfig http;
        http.base_url = config_.provider.base_url;
        http.model_id = config_.provider.model;
        http.api_key_env = config_.provider.api_key_env;
        http.max_retries = config_.provider.max_retries;
        provider_ = std::make_unique<HttpChatProvider>(http);
    }
    if (config_.embedder.kind == "hashed") {
        embedder_ = std::make_unique<HashedBagEmbedder>(config_.embedder.dim);
    } else {
        HttpProviderConfig http;
        http.base_url = config_.embedder.base_url;
        http.model_id = config_.embedder.model;
        http.api_key_env = config_.embedder.api_key_env;
        http.max_retries = config_.embedder.max_retries;
        embedder_ = std::make_unique<HttpEmbedder>(http, config_.embedder.dim);
    }
}

ChatProvider& Engine::require_provider() const {
    if (!provider_)
        fail(ErrorCode::provider, "no chat provider configured (provider.kind is none)");
    return *provider_;
}

std::string Engine::graph_path(const json& args) const {
    std::string path = arg_string_or(args, "graph", config_.paths.graph);
    if (path.empty())
        fail(ErrorCode::invalid_argument, "no graph path: set paths.graph or pass 'graph'");
    return path;
}

std::string Engine::chunks_path(const json& args) const {
    std::string path = arg_string_or(args, "chunks", config_.paths.chunks);
    if (path.empty())
        fail(ErrorCode::invalid_argument, "no chunk store path: set paths.chunks or pass 'chunks'");
    return path;
}

KnowledgeGraph Engine::load_required_graph(const std::string& path) const {
    if (!std::filesystem::is_regular_file(path))
        fail(ErrorCode::not_found, "graph file not found: " + path + " (run extract first)");
    return load_graph(path);
}

namespace {

OntologySchema schema_for_new_graph(const Config& config) {
    if (!config.paths.schema.empty()) return schema_from_json(load_json_file(config.paths.schema));
    return config.schema_mode == SchemaMode::Open ? OntologySchema::open()
                                                  : default_closed_schema();
}

SynthesisTemplates synthesis_templates(const AssetStore& assets) {
    SynthesisTemplates t;
    t.synthesize_prompt = assets.prompt("synthesize");
    t.router_prompt = assets.prompt("router");
    t.agent_system_prompt = assets.prompt("agent_system");
    return t;
}

std::vector<ICLExample> load_pool(const Config& config, const AssetStore& assets) {
    json j = config.paths.icl_pool.empty() ? json::parse(assets.get("icl_pool.json"))
                                           : load_json_file(config.paths.icl_pool);
    return load_icl_pool(j);
}

std::map<std::string, std::string> load_instructions(const Config& config,
                                                     const AssetStore& assets) {
    json j = config.paths.task_instructions.empty()
                 ? json::parse(assets.get("task_instructions.json"))
                 : load_json_file(config.paths.task_instructions);
    if (!j.is_object())
        fail(ErrorCode::parse, "task instructions must be a JSON object keyed by task type");
    std::map<std::string, std::string> table;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string())
            fail(ErrorCode::parse, "task instruction '" + key + "' must be a string");
        table[key] = value.get<std::string>();
    }
    return table;
}

} // namespace

json Engine::call_tool(const std::string& name, const json& arguments) {
    const json args = arguments.is_null() ? json::object() : arguments;
    require_object(args);
    if (name == "chunk_document") return tool_chunk_document(args);
    if (name == "extract_chunks") return tool_extract_chunks(args);
    if (name == "link_graph") return tool_link_graph(args);
    if (name == "keyword_search") return tool_keyword_search(args);
    if (name == "semantic_search") return tool_semantic_search(args);
    if (name == "expand_neighbors") return tool_expand_neighbors(args);
    if (name == "entity_detail") return tool_entity_detail(args);
    if (name == "find_path") return tool_find_path(args);
    if (name == "schema_summary") return tool_schema_summary(args);
    if (name == "ask_question") return tool_ask_question(args);
    if (name == "run_eval") return tool_run_eval(args);
    if (name == "verify_graph") return tool_verify_graph(args);
    fail(ErrorCode::not_found, "unknown tool: " + name);
}

json Engine::tool_chunk_document(const json& args) {
    PolicySource source;
    source.id = arg_string(args, "source_id");
    source.title = arg_string_or(args, "title", source.id);
    bool has_text = args.contains("text");
    bool has_file = args.contains("text_file");
    if (has_text == has_file)
        fail(ErrorCode::invalid_argument, "pass exactly one of 'text' and 'text_file'");
    source.document_text =
        has_text ? arg_string(args, "text") : read_text_file(arg_string(args, "text_file"));

    std::string store_path = chunks_path(args);
    ChunkStore store;
    if (std::filesystem::is_regular_file(store_path)) store = load_chunks(store_path);
    if (store.sources.count(source.id))
        fail(ErrorCode::validation,
             "source '" + source.id + "' is already chunked in " + store_path);

    std::unique_ptr<BoundaryProposer> proposer;
    std::unique_ptr<BoundaryProposer> review_proposer;
    std::string kind = config_.chunk_proposer;
    if (kind == "auto") kind = provider_ ? "llm" : "heuristic";
    if (kind == "llm") {
        proposer = std::make_unique<LlmBoundaryProposer>(
            require_provider(), assets_.prompt("chunk_scan"), config_.model_id);
        review_proposer = std::make_unique<LlmBoundaryProposer>(
            require_provider(), assets_.prompt("chunk_review"), config_.model_id);
    } else {
        proposer = std::make_unique<HeuristicBoundaryProposer>();
    }

    std::vector<ChunkWarning> warnings;
    std::vector<Chunk> chunks =
        chunk_document(source, config_.chunker, *proposer, &warnings, review_proposer.get());

    store.add_source({source.id, source.title, source.document_text.size()});
    json chunk_ids = json::array();
    for (auto& chunk : chunks) {
        chunk_ids.push_back(chunk.id);
        store.add_chunk(std::move(chunk));
    }
    save_chunks(store, store_path);

    json warning_rows = json::array();
    for (const auto& w : warnings)
        warning_rows.push_back(json{{"window_start", w.window_start},
                                    {"offset", w.offset},
                                    {"message", w.message}});
    return json{{"source_id", source.id},
                {"chunk_ids", std::move(chunk_ids)},
                {"count", chunks.size()},
                {"proposer", kind},
                {"warnings", std::move(warning_rows)},
                {"store", store_path}};
}

json Engine::tool_extract_chunks(const json& args) {
    std::string store_path = chunks_path(args);
    if (!std::filesystem::is_regular_file(store_path))
        fail(ErrorCode::not_found, "chunk store not found: " + store_path + " (run chunk first)");
    ChunkStore store = load_chunks(store_path);

    std::string gpath = graph_path(args);
    KnowledgeGraph graph = std::filesystem::is_regular_file(gpath)
                               ? load_graph(gpath)
                               : KnowledgeGraph(schema_for_new_graph(config_));

    ExtractionTemplates templates;
    templates.entities_prompt = assets_.prompt("extract_entities");
    templates.relations_prompt = assets_.prompt("extract_relations");
    ExtractorConfig extractor = config_.extractor;
    extractor.model_id = config_.model_id;

    bool embed = arg_bool_or(args, "embed", true);
    MergeReport merges;
    std::vector<ChunkReport> reports =
        extract_corpus(store, graph, require_provider(), templates, extractor,
                       embed ? embedder_.get() : nullptr, &merges);
    save_graph(graph, gpath);

    json failed = json::array();
    json rejections = json::array();
    std::size_t added_entities = 0;
    std::size_t added_relations = 0;
    for (const auto& report : reports) {
        if (report.failed)
            failed.push_back(json{{"chunk_id", report.chunk_id}, {"failure", report.failure}});
        added_entities += report.added_entities.size();
        added_relations += report.added_relations.size();
        for (const auto& r : report.rejections)
            rejections.push_back(json{{"chunk_id", report.chunk_id}, {"reason", r}});
    }
    return json{{"graph", gpath},
                {"chunks_processed", reports.size()},
                {"failed_chunks", std::move(failed)},
                {"added_entities", added_entities},
                {"added_relations", added_relations},
                {"merged_entities", merges.merges.size()},
                {"rejections", std::move(rejections)},
                {"entities", graph.entities().size()},
                {"relations", graph.relations().size()},
                {"embedded", embed}};
}

json Engine::tool_link_graph(const json& args) {
    std::string gpath = graph_path(args);
    KnowledgeGraph graph = load_required_graph(gpath);
    std::string method = to_lower(arg_string_or(args, "method", "auto"));
    if (method != "auto" && method != "cosine" && method != "string")
        fail(ErrorCode::invalid_argument, "method must be auto, cosine, or string");
    Embedder* embedder = method == "string" ? nullptr : embedder_.get();
    std::vector<Relation> added = link_cross_policy(graph, config_.linker, embedder);
    save_graph(graph, gpath);
    json rows = json::array();
    for (const auto& r : added) rows.push_back(relation_row(r));
    return json{{"graph", gpath},
                {"method", embedder ? "cosine" : "string"},
                {"added", std::move(rows)},
                {"count", added.size()},
                {"total_relations", graph.relations().size()}};
}

json Engine::tool_keyword_search(const json& args) {
    KnowledgeGraph graph = load_required_graph(graph_path(args));
    auto hits = keyword_search(graph, arg_string(args, "query"), arg_size_or(args, "k", 10));
    return json{{"hits", hits_to_json(graph, hits)}};
}

json Engine::tool_semantic_search(const json& args) {
    KnowledgeGraph graph = load_required_graph(graph_path(args));
    auto hits =
        semantic_search(graph, arg_string(args, "query"), arg_size_or(args, "k", 10), *embedder_);
    return json{{"hits", hits_to_json(graph, hits)}};
}

json Engine::tool_expand_neighbors(const json& args) {
    KnowledgeGraph graph = load_required_graph(graph_path(args));
    Subgraph sub = expand_neighbors(graph, arg_string(args, "entity_id"),
                                    arg_size_or(args, "depth", 1));
    json entities = json::array();
    for (const auto& id : sub.entity_ids) entities.push_back(entity_row(graph.entity(id)));
    json relations = json::array();
    for (const auto& id : sub.relation_ids) relations.push_back(relation_row(graph.relation(id)));
    return json{{"entities", std::move(entities)}, {"relations", std::move(relations)}};
}

json Engine::tool_entity_detail(const json& args) {
    KnowledgeGraph graph = load_required_graph(graph_path(args));
    EntityDetailResult detail = entity_detail(graph, arg_string(args, "entity_id"));
    const Entity& e = detail.entity;
    json relations = json::array();
    for (const auto& inc : detail.incident) {
        const Relation& r = graph.relation(inc.relation_id);
        relations.push_back(json{{"id", r.id},
                                 {"relation_type", r.relation_type},
                                 {"direction", inc.outgoing ? "out" : "in"},
                                 {"other_entity_id",
                                  inc.outgoing ? r.target_entity_id : r.source_entity_id}});
    }
    return json{{"entity", json{{"id", e.id},
                                {"name", e.name},
                                {"entity_type", e.entity_type},
                                {"description", e.description},
                                {"article_ref", e.article_ref},
                                {"policy_quote", e.policy_quote},
                                {"source_id", e.source_id},
                                {"source_chunk_id", e.source_chunk_id}}},
                {"degree", graph.degree(e.id)},
                {"relations", std::move(relations)}};
}

json Engine::tool_find_path(const json& args) {
    KnowledgeGraph graph = load_required_graph(graph_path(args));
    auto path = find_path(graph, arg_string(args, "source_entity_id"),
                          arg_string(args, "target_entity_id"), arg_size_or(args, "max_len", 4));
    if (!path) return json{{"found", false}};
    return json{{"found", true},
                {"entity_ids", path->entity_ids},
                {"relation_ids", path->relation_ids}};
}

json Engine::tool_schema_summary(const json& args) {
    KnowledgeGraph graph = load_required_graph(graph_path(args));
    return json{{"summary", schema_summary(graph)}};
}

json Engine::tool_ask_question(const json& args) {
    std::string question = arg_string(args, "question");
    Condition condition = condition_from_string(arg_string_or(args, "condition", "kg"));

    AskOptions options;
    if (args.contains("hint")) options.hint = task_type_from_string(arg_string(args, "hint"));
    if (args.contains("force_path")) {
        std::string forced = to_lower(arg_string(args, "force_path"));
        if (forced == "direct") {
            options.force_path = RetrievalPath::Direct;
        } else if (forced == "agent") {
            options.force_path = RetrievalPath::Agent;
        } else {
            fail(ErrorCode::invalid_argument, "force_path must be direct or agent");
        }
    }

    std::optional<KnowledgeGraph> graph;
    std::optional<ChunkStore> chunks;
    if (condition == Condition::KG) {
        graph = load_required_graph(graph_path(args));
        std::string store_path = arg_string_or(args, "chunks", config_.paths.chunks);
        if (!store_path.empty() && std::filesystem::is_regular_file(store_path))
            chunks = load_chunks(store_path);
    }

    auto pool = load_pool(config_, assets_);
    auto instructions = load_instructions(config_, assets_);
    SynthesisTemplates templates = synthesis_templates(assets_);

    AskEnv env;
    env.graph = graph ? &*graph : nullptr;
    env.chunks = chunks ? &*chunks : nullptr;
    env.provider = &require_provider();
    env.embedder = embedder_.get();
    env.icl_pool = &pool;
    env.task_instructions = &instructions;
    env.templates = &templates;
    env.agent = config_.agent;
    env.model_id = config_.model_id;

    AnswerResult result = run_condition(question, condition, env, options);

    json out{{"answer", result.answer},
             {"condition", condition == Condition::KG ? "kg" : "nc"}};
    if (result.route)
        out["route"] = json{
            {"path", result.route->path == RetrievalPath::Direct ? "direct" : "agent"},
            {"decided_by", result.route->decided_by == RouteOrigin::Model ? "model" : "fallback"},
            {"rationale", result.route->rationale}};
    if (result.bundle) {
        out["evidence"] = json{{"entity_ids", result.bundle->entity_ids},
                               {"relation_ids", result.bundle->relation_ids},
                               {"chunk_ids", result.bundle->chunk_ids}};
        json trace = json::array();
        for (const auto& step : result.bundle->trace)
            trace.push_back(json{{"tool", step.tool},
                                 {"arguments", step.arguments},
                                 {"result_summary", step.result_summary}});
        out["trace"] = std::move(trace);
    }
    return out;
}

json Engine::tool_run_eval(const json& args) {
    std::string questions_path = arg_string_or(args, "questions", config_.paths.questions);
    if (questions_path.empty())
        fail(ErrorCode::invalid_argument, "no questions path: set paths.questions or pass 'questions'");
    std::vector<EvalQuestion> questions = load_questions_jsonl(read_text_file(questions_path));

    std::vector<std::string> requested;
    if (args.contains("conditions")) {
        if (!args["conditions"].is_array() || args["conditions"].empty())
            fail(ErrorCode::invalid_argument, "'conditions' must be a non-empty array of strings");
        for (const auto& c : args["conditions"]) {
            if (!c.is_string())
                fail(ErrorCode::invalid_argument, "'conditions' must contain strings");
            requested.push_back(c.get<std::string>());
        }
    } else {
        requested = {"nc", "kg"};
    }
    std::size_t runs = arg_size_or(args, "runs", config_.eval.runs);
    bool do_judge = arg_bool_or(args, "judge", config_.eval.judge);

    std::map<std::string, std::string> graph_by_condition; // folded name -> path
    for (const auto& [name, path] : config_.eval.condition_graphs)
        graph_by_condition[to_lower(name)] = path;

    struct CondEnv {
        Condition condition = Condition::NC;
        std::optional<KnowledgeGraph> graph;
    };
    std::map<std::string, CondEnv> envs; // display name -> env
    std::vector<std::string> conditions; // display order as requested
    std::optional<ChunkStore> chunks;
    if (!config_.paths.chunks.empty() &&
        std::filesystem::is_regular_file(config_.paths.chunks))
        chunks = load_chunks(config_.paths.chunks);

    for (const auto& name : requested) {
        std::string folded = to_lower(trim(name));
        std::string display = to_upper(folded);
        if (envs.count(display))
            fail(ErrorCode::invalid_argument, "condition '" + name + "' requested twice");
        CondEnv env;
        if (folded == "nc") {
            env.condition = Condition::NC;
        } else {
            env.condition = Condition::KG;
            std::string gpath;
            if (folded == "kg") {
                gpath = config_.paths.graph;
                if (gpath.empty())
                    fail(ErrorCode::invalid_argument, "condition 'kg' needs paths.graph");
            } else {
                auto it = graph_by_condition.find(folded);
                if (it == graph_by_condition.end())
                    fail(ErrorCode::invalid_argument,
                         "unknown condition '" + name +
                             "' (use nc, kg, or a key of eval.condition_graphs)");
                gpath = it->second;
            }
            env.graph = load_required_graph(gpath);
        }
        conditions.push_back(display);
        envs.emplace(display, std::move(env));
    }

    ChatProvider& provider = require_provider();
    auto pool = load_pool(config_, assets_);
    auto instructions = load_instructions(config_, assets_);
    SynthesisTemplates templates = synthesis_templates(assets_);

    AnswerFn pipeline = [&](const EvalQuestion& q, const std::string& condition,
                            std::size_t) -> std::string {
        const CondEnv& cond = envs.at(condition);
        AskEnv env;
        env.graph = cond.graph ? &*cond.graph : nullptr;
        env.chunks = chunks ? &*chunks : nullptr;
        env.provider = &provider;
        env.embedder = embedder_.get();
        env.icl_pool = &pool;
        env.task_instructions = &instructions;
        env.templates = &templates;
        env.agent = config_.agent;
        env.model_id = config_.model_id;
        AskOptions options;
        options.hint = q.task_type;
        return run_condition(q.question, cond.condition, env, options).answer;
    };

    JudgeOptions judge_options;
    if (do_judge) {
        judge_options.provider = &provider;
        judge_options.judge_template = assets_.prompt("judge");
        judge_options.model_id = config_.model_id;
    }

    EvalReport report = run_eval(questions, conditions, runs, pipeline, judge_options);

    json out{{"records", report.records.size()}, {"rendered", report.rendered},
             {"report", eval_report_to_json(report)}};
    if (!config_.paths.results_dir.empty()) {
        std::filesystem::create_directories(config_.paths.results_dir);
        std::filesystem::path dir(config_.paths.results_dir);
        save_json_file(eval_report_to_json(report), (dir / "results.json").string());
        write_text_file((dir / "results.txt").string(), report.rendered);
        out["results_dir"] = config_.paths.results_dir;
    }
    return out;
}

json Engine::tool_verify_graph(const json& args) {
    std::string gpath = graph_path(args);
    if (!std::filesystem::is_regular_file(gpath))
        fail(ErrorCode::not_found, "graph file not found: " + gpath);
    KnowledgeGraph graph;
    try {
        graph = load_graph(gpath);
    } catch (const Error& e) {
        return json{{"ok", false}, {"loadable", false}, {"error", e.what()}};
    }
    std::vector<Violation> violations;
    std::string store_path = arg_string_or(args, "chunks", config_.paths.chunks);
    if (!store_path.empty() && std::filesystem::is_regular_file(store_path)) {
        ChunkStore store = load_chunks(store_path);
        violations = verify_graph(graph, store);
    } else {
        violations = verify_graph(graph);
    }
    json rows = json::array();
    for (const auto& v : violations)
        rows.push_back(
            json{{"subject_id", v.subject_id}, {"rule", v.rule}, {"detail", v.detail}});
    return json{{"ok", violations.empty()},
                {"loadable", true},
                {"violations", std::move(rows)},
                {"entities", graph.entities().size()},
                {"relations", graph.relations().size()},
                {"fingerprint", graph_fingerprint(graph)}};
}

const std::vector<ToolInfo>& Engine::tool_table() {
    static const std::vector<ToolInfo> kTools = [] {
        std::vector<ToolInfo> tools;
        tools.push_back(
            {"chunk_document",
             "Split one policy document into boundary-snapped chunks and store them.",
             schema_object("object",
                           {{"source_id", prop("string", "Stable id for the policy source.")},
                            {"title", prop("string", "Human title; defaults to the id.")},
                            {"text", prop("string", "Document text (or pass text_file).")},
                            {"text_file", prop("string", "Path to the document text.")},
                            {"chunks", prop("string", "Chunk store path override.")}},
                           {"source_id"})});
        tools.push_back(
            {"extract_chunks",
             "Run the two-pass LLM extraction over every stored chunk into the graph.",
             schema_object("object",
                           {{"graph", prop("string", "Graph path override.")},
                            {"chunks", prop("string", "Chunk store path override.")},
                            {"embed", prop("boolean", "Embed entities afterwards (default true).")}},
                           {})});
        tools.push_back(
            {"link_graph",
             "Add cross-policy CORRESPONDS_TO edges above the similarity thresholds.",
             schema_object("object",
                           {{"graph", prop("string", "Graph path override.")},
                            {"method",
                             prop("string", "auto (default), cosine, or string similarity.")}},
                           {})});
        tools.push_back(
            {"keyword_search", "Token-overlap entity search; name hits score double.",
             schema_object("object",
                           {{"query", prop("string", "Search terms.")},
                            {"k", prop("integer", "Max hits (default 10).")},
                            {"graph", prop("string", "Graph path override.")}},
                           {"query"})});
        tools.push_back(
            {"semantic_search", "Embedding cosine entity search.",
             schema_object("object",
                           {{"query", prop("string", "Search text.")},
                            {"k", prop("integer", "Max hits (default 10).")},
                            {"graph", prop("string", "Graph path override.")}},
                           {"query"})});
        tools.push_back(
            {"expand_neighbors", "Undirected BFS neighborhood of one entity.",
             schema_object("object",
                           {{"entity_id", prop("string", "Start entity.")},
                            {"depth", prop("integer", "Hop count (default 1).")},
                            {"graph", prop("string", "Graph path override.")}},
                           {"entity_id"})});
        tools.push_back(
            {"entity_detail", "Full record of one entity plus its incident relations.",
             schema_object("object",
                           {{"entity_id", prop("string", "Entity id.")},
                            {"graph", prop("string", "Graph path override.")}},
                           {"entity_id"})});
        tools.push_back(
            {"find_path", "Shortest undirected path between two entities.",
             schema_object("object",
                           {{"source_entity_id", prop("string", "Start entity.")},
                            {"target_entity_id", prop("string", "End entity.")},
                            {"max_len", prop("integer", "Max edges (default 4).")},
                            {"graph", prop("string", "Graph path override.")}},
                           {"source_entity_id", "target_entity_id"})});
        tools.push_back({"schema_summary", "Totals, per-type counts, and source list.",
                         schema_object("object",
                                       {{"graph", prop("string", "Graph path override.")}},
                                       {})});
        tools.push_back(
            {"ask_question",
             "Answer a question: route, retrieve graph evidence, and synthesize.",
             schema_object(
                 "object",
                 {{"question", prop("string", "The question.")},
                  {"condition", prop("string", "nc (no context) or kg (default).")},
                  {"hint", prop("string", "Task type hint T1..T6 for routing fallback.")},
                  {"force_path", prop("string", "Skip the router: direct or agent.")},
                  {"graph", prop("string", "Graph path override.")},
                  {"chunks", prop("string", "Chunk store path override.")}},
                 {"question"})});
        tools.push_back(
            {"run_eval",
             "Score a question set over conditions and runs; writes the results table.",
             schema_object(
                 "object",
                 {{"questions", prop("string", "Questions JSONL path override.")},
                  {"conditions",
                   json{{"type", "array"},
                        {"items", json{{"type", "string"}}},
                        {"description", "Condition names (default [nc, kg])."}}},
                  {"runs", prop("integer", "Repeated runs (default from config).")},
                  {"judge", prop("boolean", "Run the LLM judge as well.")}},
                 {})});
        tools.push_back(
            {"verify_graph", "Check every graph invariant and report violations.",
             schema_object("object",
                           {{"graph", prop("string", "Graph path override.")},
                            {"chunks", prop("string", "Chunk store for reference checks.")}},
                           {})});
        return tools;
    }();
    return kTools;
}

const std::vector<ResourceInfo>& Engine::resource_table() {
    static const std::vector<ResourceInfo> kResources{
        {"policygraph://graph", "The knowledge graph JSON document."},
        {"policygraph://chunks", "The chunk store JSON document."},
        {"policygraph://schema", "The active ontology schema."},
        {"policygraph://icl_pool", "In-context example pool for synthesis."},
        {"policygraph://questions", "Evaluation questions (JSON-Lines)."},
        {"policygraph://results", "Latest evaluation results JSON."},
        {"policygraph://prompts", "All prompt templates, keyed by name."},
    };
    return kResources;
}

std::string Engine::read_resource(const std::string& uri) const {
    auto require_file = [](const std::string& path, const std::string& what) {
        if (path.empty() || !std::filesystem::is_regular_file(path))
            fail(ErrorCode::not_found, what + " not available" +
                                           (path.empty() ? "" : " at " + path));
        return read_text_file(path);
    };
    if (uri == "policygraph://graph") return require_file(config_.paths.graph, "graph");
    if (uri == "policygraph://chunks") return require_file(config_.paths.chunks, "chunk store");
    if (uri == "policygraph://schema") {
        if (!config_.paths.schema.empty())
            return require_file(config_.paths.schema, "schema");
        if (!config_.paths.graph.empty() &&
            std::filesystem::is_regular_file(config_.paths.graph))
            return canonical_dump(schema_to_json(load_graph(config_.paths.graph).schema()));
        return canonical_dump(schema_to_json(schema_for_new_graph(config_)));
    }
    if (uri == "policygraph://icl_pool") {
        if (!config_.paths.icl_pool.empty())
            return require_file(config_.paths.icl_pool, "ICL pool");
        return assets_.get("icl_pool.json");
    }
    if (uri == "policygraph://questions")
        return require_file(config_.paths.questions, "question set");
    if (uri == "policygraph://results") {
        if (config_.paths.results_dir.empty())
            fail(ErrorCode::not_found, "results not available: paths.results_dir is empty");
        return require_file(
            (std::filesystem::path(config_.paths.results_dir) / "results.json").string(),
            "results");
    }
    if (uri == "policygraph://prompts") {
        json all = json::object();
        for (const auto& [name, desc] : AssetStore::prompt_names())
            all[name] = assets_.prompt(name);
        return canonical_dump(all);
    }
    fail(ErrorCode::not_found, "unknown resource: " + uri);
}

json Engine::manifest() const {
    json tools = json::array();
    for (const auto& t : tool_table())
        tools.push_back(json{{"name", t.name},
                             {"description", t.description},
                             {"input_schema", t.input_schema}});
    json resources = json::array();
    for (const auto& r : resource_table())
        resources.push_back(json{{"uri", r.uri}, {"description", r.description}});
    json prompts = json::array();
    for (const auto& [name, desc] : AssetStore::prompt_names())
        prompts.push_back(json{{"name", name}, {"description", desc}});
    return json{{"tools", std::move(tools)},
                {"resources", std::move(resources)},
                {"prompts", std::move(prompts)}};
}

} // namespace pg

#include "policygraph/config.hpp"

#include <set>

#include "policygraph/error.hpp"
#include "policygraph/persistence.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            fail(ErrorCode::validation, "config: unknown key '" + key + "' in " + where);
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string())
        fail(ErrorCode::parse, std::string("config: '") + key + "' must be a string");
    return j[key].get<std::string>();
}

double get_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number())
        fail(ErrorCode::parse, std::string("config: '") + key + "' must be a number");
    return j[key].get<double>();
}

std::size_t get_size(const json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_unsigned())
        fail(ErrorCode::parse, std::string("config: '") + key + "' must be a non-negative integer");
    return j[key].get<std::size_t>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean())
        fail(ErrorCode::parse, std::string("config: '") + key + "' must be a boolean");
    return j[key].get<bool>();
}

ProviderConfig provider_from_json(const json& j) {
    ProviderConfig p;
    reject_unknown_keys(j, {"kind", "script", "base_url", "api_key_env", "model", "max_retries"},
                        "provider");
    p.kind = to_lower(get_string(j, "kind", p.kind));
    p.script_path = get_string(j, "script", {});
    p.base_url = get_string(j, "base_url", {});
    p.api_key_env = get_string(j, "api_key_env", {});
    p.model = get_string(j, "model", {});
    p.max_retries = static_cast<int>(get_number(j, "max_retries", p.max_retries));
    if (p.kind != "none" && p.kind != "replay" && p.kind != "http")
        fail(ErrorCode::validation, "config: provider.kind must be none, replay, or http");
    if (p.kind == "replay" && p.script_path.empty())
        fail(ErrorCode::validation, "config: replay provider needs provider.script");
    if (p.kind == "http" && p.base_url.empty())
        fail(ErrorCode::validation, "config: http provider needs provider.base_url");
    return p;
}

EmbedderConfig embedder_from_json(const json& j) {
    EmbedderConfig e;
    reject_unknown_keys(j, {"kind", "dim", "base_url", "api_key_env", "model", "max_retries"},
                        "embedder");
    e.kind = to_lower(get_string(j, "kind", e.kind));
    e.dim = get_size(j, "dim", e.dim);
    e.base_url = get_string(j, "base_url", {});
    e.api_key_env = get_string(j, "api_key_env", {});
    e.model = get_string(j, "model", {});
    e.max_retries = static_cast<int>(get_number(j, "max_retries", e.max_retries));
    if (e.kind != "hashed" && e.kind != "http")
        fail(ErrorCode::validation, "config: embedder.kind must be hashed or http");
    if (e.kind == "hashed" && e.dim == 0)
        fail(ErrorCode::validation, "config: hashed embedder needs dim >= 1");
    if (e.kind == "http" && e.base_url.empty())
        fail(ErrorCode::validation, "config: http embedder needs embedder.base_url");
    return e;
}

} // namespace

void Config::validate() const {
    chunker.validate();
    linker.validate();
    agent.validate();
    if (extractor.k_same == 0 || extractor.k_cross == 0)
        fail(ErrorCode::validation, "config: extractor context sizes must be >= 1");
    if (chunk_proposer != "auto" && chunk_proposer != "heuristic" && chunk_proposer != "llm")
        fail(ErrorCode::validation, "config: chunk_proposer must be auto, heuristic, or llm");
    if (eval.runs == 0) fail(ErrorCode::validation, "config: eval.runs must be >= 1");
    for (const auto& [name, path] : eval.condition_graphs) {
        if (name.empty() || path.empty())
            fail(ErrorCode::validation, "config: eval.condition_graphs entries must be non-empty");
        std::string folded = to_lower(name);
        if (folded == "nc" || folded == "kg")
            fail(ErrorCode::validation,
                 "config: condition '" + name + "' is built in and cannot map to a graph file");
    }
}

Config config_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::parse, "config must be a JSON object");
    reject_unknown_keys(j,
                        {"schema_mode", "provider", "embedder", "paths", "chunker",
                         "chunk_proposer", "extractor", "linker", "agent", "eval", "assets_dir",
                         "model_id"},
                        "config");
    Config c;
    std::string mode = to_lower(get_string(j, "schema_mode", "closed"));
    if (mode == "closed") {
        c.schema_mode = SchemaMode::Closed;
    } else if (mode == "open") {
        c.schema_mode = SchemaMode::Open;
    } else {
        fail(ErrorCode::validation, "config: schema_mode must be closed or open");
    }
    if (j.contains("provider")) c.provider = provider_from_json(j["provider"]);
    if (j.contains("embedder")) c.embedder = embedder_from_json(j["embedder"]);

    if (j.contains("paths")) {
        const json& p = j["paths"];
        reject_unknown_keys(p,
                            {"graph", "chunks", "schema", "icl_pool", "task_instructions",
                             "questions", "results_dir"},
                            "paths");
        c.paths.graph = get_string(p, "graph", {});
        c.paths.chunks = get_string(p, "chunks", {});
        c.paths.schema = get_string(p, "schema", {});
        c.paths.icl_pool = get_string(p, "icl_pool", {});
        c.paths.task_instructions = get_string(p, "task_instructions", {});
        c.paths.questions = get_string(p, "questions", {});
        c.paths.results_dir = get_string(p, "results_dir", {});
    }

    if (j.contains("chunker")) {
        const json& ch = j["chunker"];
        reject_unknown_keys(ch, {"window_chars", "overlap_chars", "max_chunk_chars"}, "chunker");
        c.chunker.window_chars = get_size(ch, "window_chars", c.chunker.window_chars);
        c.chunker.overlap_chars = get_size(ch, "overlap_chars", c.chunker.overlap_chars);
        c.chunker.max_chunk_chars = get_size(ch, "max_chunk_chars", c.chunker.max_chunk_chars);
    }
    c.chunk_proposer = to_lower(get_string(j, "chunk_proposer", c.chunk_proposer));

    if (j.contains("extractor")) {
        const json& ex = j["extractor"];
        reject_unknown_keys(ex, {"k_same", "k_cross"}, "extractor");
        c.extractor.k_same = get_size(ex, "k_same", c.extractor.k_same);
        c.extractor.k_cross = get_size(ex, "k_cross", c.extractor.k_cross);
    }
    c.extractor.max_chunk_chars = c.chunker.max_chunk_chars;

    if (j.contains("linker")) {
        const json& li = j["linker"];
        reject_unknown_keys(
            li, {"cosine_threshold", "string_threshold", "max_links", "embed_name_only"},
            "linker");
        c.linker.cosine_threshold = get_number(li, "cosine_threshold", c.linker.cosine_threshold);
        c.linker.string_threshold = get_number(li, "string_threshold", c.linker.string_threshold);
        c.linker.max_links_per_entity =
            get_size(li, "max_links", c.linker.max_links_per_entity);
        c.linker.embed_name_only = get_bool(li, "embed_name_only", c.linker.embed_name_only);
    }

    if (j.contains("agent")) {
        const json& ag = j["agent"];
        reject_unknown_keys(ag, {"max_steps", "direct_top_k", "expand_seeds"}, "agent");
        c.agent.max_steps = get_size(ag, "max_steps", c.agent.max_steps);
        c.agent.direct_top_k = get_size(ag, "direct_top_k", c.agent.direct_top_k);
        c.agent.expand_seeds = get_size(ag, "expand_seeds", c.agent.expand_seeds);
    }

    if (j.contains("eval")) {
        const json& ev = j["eval"];
        reject_unknown_keys(ev, {"condition_graphs", "runs", "judge"}, "eval");
        if (ev.contains("condition_graphs")) {
            if (!ev["condition_graphs"].is_object())
                fail(ErrorCode::parse, "config: eval.condition_graphs must be an object");
            for (const auto& [name, path] : ev["condition_graphs"].items()) {
                if (!path.is_string())
                    fail(ErrorCode::parse, "config: eval.condition_graphs values must be strings");
                c.eval.condition_graphs[name] = path.get<std::string>();
            }
        }
        c.eval.runs = get_size(ev, "runs", c.eval.runs);
        c.eval.judge = get_bool(ev, "judge", c.eval.judge);
    }

    c.assets_dir = get_string(j, "assets_dir", {});
    c.model_id = get_string(j, "model_id", {});
    if (c.model_id.empty() && !c.provider.model.empty()) c.model_id = c.provider.model;

    c.validate();
    return c;
}

Config load_config_file(const std::string& path) {
    return config_from_json(load_json_file(path));
}

} // namespace pg

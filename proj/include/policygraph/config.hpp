#pragma once

#include <map>
#include <string>

#include "policygraph/chunker.hpp"
#include "policygraph/extractor.hpp"
#include "policygraph/linker.hpp"
#include "policygraph/model.hpp"
#include "policygraph/retrieval.hpp"

namespace pg {

struct ProviderConfig {
    std::string kind = "none"; // none | replay | http
    std::string script_path;   // replay: JSON step array
    std::string base_url;      // http
    std::string api_key_env;   // http: env var holding the key
    std::string model;         // http: default model id
    int max_retries = 3;
};

struct EmbedderConfig {
    std::string kind = "hashed"; // hashed | http
    std::size_t dim = 256;       // hashed
    std::string base_url;        // http
    std::string api_key_env;
    std::string model;
    int max_retries = 3;
};

struct PathsConfig {
    std::string graph;             // graph JSON (read and written)
    std::string chunks;            // chunk store JSON
    std::string schema;            // optional schema JSON for new graphs
    std::string icl_pool;          // optional override of the embedded pool
    std::string task_instructions; // optional override
    std::string questions;         // eval questions JSONL
    std::string results_dir;       // eval output directory
};

struct EvalSweepConfig {
    // Condition name -> graph path; "nc" needs none, "kg" uses paths.graph.
    std::map<std::string, std::string> condition_graphs;
    std::size_t runs = 1;
    bool judge = false;
};

struct Config {
    SchemaMode schema_mode = SchemaMode::Closed; // for graphs created by extract
    ProviderConfig provider;
    EmbedderConfig embedder;
    PathsConfig paths;
    ChunkerConfig chunker;
    std::string chunk_proposer = "auto"; // auto | heuristic | llm
    ExtractorConfig extractor;
    LinkerConfig linker;
    AgentConfig agent;
    EvalSweepConfig eval;
    std::string assets_dir; // optional per-file asset overrides
    std::string model_id;   // default model id stamped on requests

    void validate() const;
};

Config config_from_json(const nlohmann::json& j);
Config load_config_file(const std::string& path);

} // namespace pg

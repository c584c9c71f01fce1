#pragma once

#include <memory>
#include <string>
#include <vector>

#include "policygraph/assets.hpp"
#include "policygraph/config.hpp"
#include "policygraph/llm.hpp"

namespace pg {

inline constexpr const char* kEngineVersion = "1.0.0";

struct ToolInfo {
    std::string name;
    std::string description;
    nlohmann::json input_schema;
};

struct ResourceInfo {
    std::string uri;
    std::string description;
};

// One configured pipeline instance. Tool calls are stateless with respect to
// graph and chunk files — every call loads what it needs from the configured
// paths and build tools write their outputs back, so a served graph is never
// mutated in memory.
class Engine {
  public:
    explicit Engine(Config config);

    // Dispatches one of the 12 tools; throws pg::Error on failure.
    nlohmann::json call_tool(const std::string& name, const nlohmann::json& arguments);

    static const std::vector<ToolInfo>& tool_table();
    static const std::vector<ResourceInfo>& resource_table();
    nlohmann::json manifest() const; // {tools, resources, prompts}

    std::string read_resource(const std::string& uri) const;

    const Config& config() const { return config_; }
    const AssetStore& assets() const { return assets_; }
    ChatProvider* provider() { return provider_.get(); }
    Embedder& embedder() { return *embedder_; }

  private:
    nlohmann::json tool_chunk_document(const nlohmann::json& args);
    nlohmann::json tool_extract_chunks(const nlohmann::json& args);
    nlohmann::json tool_link_graph(const nlohmann::json& args);
    nlohmann::json tool_keyword_search(const nlohmann::json& args);
    nlohmann::json tool_semantic_search(const nlohmann::json& args);
    nlohmann::json tool_expand_neighbors(const nlohmann::json& args);
    nlohmann::json tool_entity_detail(const nlohmann::json& args);
    nlohmann::json tool_find_path(const nlohmann::json& args);
    nlohmann::json tool_schema_summary(const nlohmann::json& args);
    nlohmann::json tool_ask_question(const nlohmann::json& args);
    nlohmann::json tool_run_eval(const nlohmann::json& args);
    nlohmann::json tool_verify_graph(const nlohmann::json& args);

    ChatProvider& require_provider() const;
    KnowledgeGraph load_required_graph(const std::string& override_path) const;
    std::string graph_path(const nlohmann::json& args) const;
    std::string chunks_path(const nlohmann::json& args) const;

    Config config_;
    AssetStore assets_;
    std::unique_ptr<ChatProvider> provider_; // null when provider.kind == none
    std::unique_ptr<Embedder> embedder_;
};

} // namespace pg

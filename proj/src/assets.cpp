#include "policygraph/assets.hpp"

#include <filesystem>

#include "policygraph/error.hpp"
#include "policygraph/persistence.hpp"

namespace pg {

AssetStore::AssetStore(std::string override_dir) : override_dir_(std::move(override_dir)) {
    if (!override_dir_.empty() && !std::filesystem::is_directory(override_dir_))
        fail(ErrorCode::io, "assets directory not found: " + override_dir_);
}

bool AssetStore::has(const std::string& name) const {
    return embedded::asset_files().count(name) > 0;
}

std::optional<std::string> AssetStore::try_get(const std::string& name) const {
    if (!has(name)) return std::nullopt;
    if (!override_dir_.empty()) {
        std::filesystem::path candidate = std::filesystem::path(override_dir_) / name;
        if (std::filesystem::is_regular_file(candidate))
            return read_text_file(candidate.string());
    }
    return embedded::asset_files().at(name);
}

std::string AssetStore::get(const std::string& name) const {
    auto content = try_get(name);
    if (!content) fail(ErrorCode::not_found, "unknown asset: " + name);
    return *content;
}

std::vector<std::string> AssetStore::names() const {
    std::vector<std::string> out;
    for (const auto& [name, text] : embedded::asset_files()) out.push_back(name);
    return out;
}

const std::vector<std::pair<std::string, std::string>>& AssetStore::prompt_names() {
    static const std::vector<std::pair<std::string, std::string>> kPrompts{
        {"chunk_scan", "Propose snap-candidate boundary offsets inside a document window."},
        {"chunk_review", "Propose a split point for an oversized chunk."},
        {"extract_entities", "First extraction pass: typed entities from one chunk."},
        {"extract_relations", "Second extraction pass: typed relations over the entity catalog."},
        {"router", "Classify a question as direct or agent retrieval."},
        {"agent_system", "System prompt for the bounded graph-tool agent loop."},
        {"synthesize", "Answer-generation prompt over evidence, chunks, and ICL examples."},
        {"judge", "Three-dimension 1-5 rubric scoring of an answer against the excerpt."},
    };
    return kPrompts;
}

std::string AssetStore::prompt(const std::string& prompt_name) const {
    for (const auto& [name, desc] : prompt_names())
        if (name == prompt_name) return get("prompts/" + name + ".txt");
    fail(ErrorCode::not_found, "unknown prompt: " + prompt_name);
}

} // namespace pg

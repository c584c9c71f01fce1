#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pg {

namespace embedded {
// Generated at build time from assets/ (see cmake/embed_assets.cmake).
// Keys are paths relative to assets/, e.g. "prompts/synthesize.txt".
const std::map<std::string, std::string>& asset_files();
} // namespace embedded

// Compiled-in default assets, individually overridable by files under a
// directory (same relative names). Overrides never add names: unknown asset
// names are errors regardless of what the directory holds.
class AssetStore {
  public:
    AssetStore() = default;
    explicit AssetStore(std::string override_dir);

    bool has(const std::string& name) const;
    std::string get(const std::string& name) const; // not_found on unknown name
    std::optional<std::string> try_get(const std::string& name) const;
    std::vector<std::string> names() const;

    // Prompt template helpers; the name table is the 8-template surface.
    static const std::vector<std::pair<std::string, std::string>>&
    prompt_names(); // (name, description)
    std::string prompt(const std::string& prompt_name) const; // get("prompts/<name>.txt")

  private:
    std::string override_dir_;
};

} // namespace pg

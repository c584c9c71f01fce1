#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "policygraph/model.hpp"

namespace pg {

struct SourceMeta {
    std::string id;
    std::string title;
    std::size_t char_count = 0;
};

// Flat chunk collection keyed by chunk id, plus the source documents the
// chunks were cut from. Entities hold chunk ids; this is where they resolve.
struct ChunkStore {
    std::map<std::string, Chunk> chunks;
    std::map<std::string, SourceMeta> sources;

    bool has(const std::string& chunk_id) const { return chunks.count(chunk_id) > 0; }
    const Chunk& get(const std::string& chunk_id) const; // throws not_found

    void add_source(SourceMeta meta);
    void add_chunk(Chunk chunk); // throws on duplicate id or unknown source

    // Chunks of one source in id order.
    std::vector<const Chunk*> chunks_for_source(const std::string& source_id) const;
};

} // namespace pg

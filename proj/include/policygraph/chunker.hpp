#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "policygraph/llm.hpp"
#include "policygraph/model.hpp"

namespace pg {

struct ChunkerConfig {
    std::size_t window_chars = 6000;
    std::size_t overlap_chars = 400;
    std::size_t max_chunk_chars = 4000;
    void validate() const; // throws invalid_argument on bad combinations
};

struct BoundaryProposal {
    std::size_t offset; // absolute character index into the document
    std::string justification;
};

struct ChunkWarning {
    std::size_t window_start;
    std::size_t offset;
    std::string message;
};

// Supplies candidate split points for one window. Offsets are absolute;
// out-of-window offsets are discarded by the caller.
class BoundaryProposer {
public:
    virtual ~BoundaryProposer() = default;
    virtual std::vector<BoundaryProposal> propose(const std::string& window_text,
                                                  std::size_t window_start,
                                                  std::size_t window_end,
                                                  std::optional<std::size_t> last_boundary) = 0;
};

// Offline default: proposes the blank line nearest each multiple of `stride`
// characters, so the pipeline runs without any model at all.
class HeuristicBoundaryProposer : public BoundaryProposer {
public:
    explicit HeuristicBoundaryProposer(std::size_t stride = 3500) : stride_(stride) {}
    std::vector<BoundaryProposal> propose(const std::string& window_text, std::size_t window_start,
                                          std::size_t window_end,
                                          std::optional<std::size_t> last_boundary) override;

private:
    std::size_t stride_;
};

// Asks a chat model for split points; expects a fenced JSON object with a
// "boundaries" array of {offset, justification}. One reprompt on a parse
// failure, then the window yields no proposals.
class LlmBoundaryProposer : public BoundaryProposer {
public:
    LlmBoundaryProposer(ChatProvider& provider, std::string prompt_template,
                        std::string model_id = {})
        : provider_(provider), template_(std::move(prompt_template)), model_id_(std::move(model_id)) {}
    std::vector<BoundaryProposal> propose(const std::string& window_text, std::size_t window_start,
                                          std::size_t window_end,
                                          std::optional<std::size_t> last_boundary) override;

private:
    ChatProvider& provider_;
    std::string template_;
    std::string model_id_;
};

struct ScanResult {
    std::vector<BoundaryProposal> proposals; // snapped, strictly increasing, deduplicated
    std::vector<ChunkWarning> warnings;
};

// Slides a window (advancing by window_chars - overlap_chars) across the
// document, collecting snapped proposals from the proposer.
ScanResult scan(const std::string& document, const ChunkerConfig& config,
                BoundaryProposer& proposer);

// Nearest index (outward search, ties toward the earlier side, radius 200)
// that immediately follows a blank line, else a sentence end (".", "?", "!"
// plus whitespace); the offset itself when neither exists in range.
std::size_t snap_boundary(const std::string& document, std::size_t offset);

// Cuts the document at the boundaries, gives the proposer one round on any
// chunk above max_chunk_chars, then force-splits the remainder at snapped
// midpoints. Returned chunks carry offsets/text/reason but no ids yet.
// The oversize round can use a dedicated review proposer (its own prompt);
// null falls back to the scan proposer.
std::vector<Chunk> review(const std::string& document,
                          const std::vector<BoundaryProposal>& boundaries,
                          const ChunkerConfig& config, BoundaryProposer& proposer,
                          BoundaryProposer* review_proposer = nullptr);

// scan + review + id assignment (<source>_cNNNN). Verifies coverage, size and
// monotonicity before returning.
std::vector<Chunk> chunk_document(const PolicySource& source, const ChunkerConfig& config,
                                  BoundaryProposer& proposer,
                                  std::vector<ChunkWarning>* warnings = nullptr,
                                  BoundaryProposer* review_proposer = nullptr);

} // namespace pg

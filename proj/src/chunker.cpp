#include "policygraph/chunker.hpp"

#include <algorithm>
#include <map>

#include "policygraph/error.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

namespace {

constexpr std::size_t kSnapRadius = 200;

bool is_blankish(char c) { return c == ' ' || c == '\t' || c == '\r'; }
bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
bool is_sentence_end(char c) { return c == '.' || c == '?' || c == '!'; }

// True when position i sits just past a blank line: the previous character is
// a newline and the line before it holds nothing but spacing.
bool follows_paragraph(std::string_view text, std::size_t i) {
    if (i < 2 || i > text.size()) return false;
    if (text[i - 1] != '\n') return false;
    std::size_t j = i - 2;
    while (true) {
        if (text[j] == '\n') return true;
        if (!is_blankish(text[j])) return false;
        if (j == 0) return false;
        --j;
    }
}

bool follows_sentence(std::string_view text, std::size_t i) {
    if (i < 2 || i > text.size()) return false;
    return is_sentence_end(text[i - 2]) && is_ws(text[i - 1]);
}

// Outward search for the nearest position satisfying pred, earlier side
// winning ties. Candidates stay strictly inside the document.
template <typename Pred>
std::size_t nearest_match(std::string_view text, std::size_t offset, std::size_t radius,
                          Pred pred, bool* found) {
    for (std::size_t d = 0; d <= radius; ++d) {
        if (offset >= d + 1) { // earlier candidate, must stay >= 1
            std::size_t cand = offset - d;
            if (cand < text.size() && pred(text, cand)) {
                *found = true;
                return cand;
            }
        }
        if (d > 0 && offset + d < text.size()) {
            std::size_t cand = offset + d;
            if (pred(text, cand)) {
                *found = true;
                return cand;
            }
        }
    }
    *found = false;
    return offset;
}

} // namespace

void ChunkerConfig::validate() const {
    if (window_chars == 0) fail(ErrorCode::invalid_argument, "window_chars must be > 0");
    if (overlap_chars == 0 || overlap_chars >= window_chars)
        fail(ErrorCode::invalid_argument, "overlap_chars must satisfy 0 < overlap < window");
    if (max_chunk_chars == 0 || max_chunk_chars > window_chars)
        fail(ErrorCode::invalid_argument, "max_chunk_chars must satisfy 0 < max <= window");
}

std::size_t snap_boundary(const std::string& document, std::size_t offset) {
    if (offset == 0 || offset >= document.size())
        fail(ErrorCode::invalid_argument, "snap offset must be strictly inside the document");
    bool found = false;
    std::size_t snapped = nearest_match(document, offset, kSnapRadius, follows_paragraph, &found);
    if (found) return snapped;
    snapped = nearest_match(document, offset, kSnapRadius, follows_sentence, &found);
    if (found) return snapped;
    return offset;
}

ScanResult scan(const std::string& document, const ChunkerConfig& config,
                BoundaryProposer& proposer) {
    if (document.empty()) fail(ErrorCode::invalid_argument, "document is empty");
    config.validate();
    const std::size_t len = document.size();
    const std::size_t stride = config.window_chars - config.overlap_chars;

    ScanResult result;
    std::map<std::size_t, std::string> accepted; // snapped offset -> justification
    std::optional<std::size_t> last_boundary;

    std::size_t start = 0;
    while (true) {
        std::size_t end = std::min(start + config.window_chars, len);
        auto proposals =
            proposer.propose(document.substr(start, end - start), start, end, last_boundary);
        for (const auto& p : proposals) {
            if (p.offset <= start || p.offset >= end || p.offset >= len) {
                result.warnings.push_back(
                    {start, p.offset, "proposal outside window [" + std::to_string(start) + ", " +
                                          std::to_string(end) + "); discarded"});
                continue;
            }
            std::size_t snapped = snap_boundary(document, p.offset);
            accepted.emplace(snapped, p.justification); // first justification wins
            if (!last_boundary || snapped > *last_boundary) last_boundary = snapped;
        }
        if (start + config.window_chars >= len) break;
        start += stride;
    }
    for (auto& [offset, justification] : accepted)
        result.proposals.push_back({offset, justification});
    return result;
}

namespace {

// Recursive snapped-midpoint split; raw midpoint when snapping degenerates.
void force_split(const std::string& document, std::size_t begin, std::size_t end,
                 std::size_t max_chars, std::map<std::size_t, std::string>& cuts) {
    if (end - begin <= max_chars) return;
    std::size_t mid = begin + (end - begin) / 2;
    std::size_t snapped = snap_boundary(document, mid);
    if (snapped <= begin || snapped >= end) snapped = mid;
    cuts.emplace(snapped, "forced split at midpoint");
    force_split(document, begin, snapped, max_chars, cuts);
    force_split(document, snapped, end, max_chars, cuts);
}

std::vector<std::pair<std::size_t, std::size_t>> spans_from_cuts(
    const std::map<std::size_t, std::string>& cuts, std::size_t len) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t prev = 0;
    for (const auto& [offset, justification] : cuts) {
        spans.emplace_back(prev, offset);
        prev = offset;
    }
    spans.emplace_back(prev, len);
    return spans;
}

} // namespace

std::vector<Chunk> review(const std::string& document,
                          const std::vector<BoundaryProposal>& boundaries,
                          const ChunkerConfig& config, BoundaryProposer& proposer,
                          BoundaryProposer* review_proposer) {
    if (document.empty()) fail(ErrorCode::invalid_argument, "document is empty");
    config.validate();
    const std::size_t len = document.size();
    BoundaryProposer& oversize_proposer = review_proposer ? *review_proposer : proposer;

    std::map<std::size_t, std::string> cuts;
    for (const auto& b : boundaries) {
        if (b.offset == 0 || b.offset >= len)
            fail(ErrorCode::invalid_argument,
                 "boundary " + std::to_string(b.offset) + " outside the document");
        cuts.emplace(b.offset, b.justification);
    }

    // One proposer round over oversized chunks.
    for (const auto& [begin, end] : spans_from_cuts(cuts, len)) {
        if (end - begin <= config.max_chunk_chars) continue;
        auto proposals = oversize_proposer.propose(document.substr(begin, end - begin), begin, end,
                                                   begin == 0 ? std::optional<std::size_t>{} : begin);
        for (const auto& p : proposals) {
            if (p.offset <= begin || p.offset >= end) continue;
            std::size_t snapped = snap_boundary(document, p.offset);
            if (snapped > begin && snapped < end) cuts.emplace(snapped, p.justification);
        }
    }

    // Deterministic fallback for whatever is still oversized.
    for (const auto& [begin, end] : spans_from_cuts(cuts, len))
        force_split(document, begin, end, config.max_chunk_chars, cuts);

    std::vector<Chunk> chunks;
    for (const auto& [begin, end] : spans_from_cuts(cuts, len)) {
        Chunk c;
        c.start_offset = begin;
        c.end_offset = end;
        c.text = document.substr(begin, end - begin);
        auto it = cuts.find(end); // the cut that ends this chunk
        c.boundary_reason = it == cuts.end() ? std::string{} : it->second;
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::vector<Chunk> chunk_document(const PolicySource& source, const ChunkerConfig& config,
                                  BoundaryProposer& proposer, std::vector<ChunkWarning>* warnings,
                                  BoundaryProposer* review_proposer) {
    if (source.id.empty()) fail(ErrorCode::invalid_argument, "source id is empty");
    if (source.document_text.empty())
        fail(ErrorCode::invalid_argument, "source '" + source.id + "' has empty document text");

    ScanResult scanned = scan(source.document_text, config, proposer);
    if (warnings) *warnings = scanned.warnings;
    std::vector<Chunk> chunks =
        review(source.document_text, scanned.proposals, config, proposer, review_proposer);

    std::size_t expected_start = 0;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        auto& c = chunks[i];
        char buf[16];
        std::snprintf(buf, sizeof(buf), "_c%04zu", i + 1);
        c.id = source.id + buf;
        c.source_id = source.id;
        if (c.start_offset != expected_start || c.end_offset <= c.start_offset)
            fail(ErrorCode::validation, "chunker produced a gap or inversion at chunk " + c.id);
        if (c.end_offset - c.start_offset > config.max_chunk_chars)
            fail(ErrorCode::validation, "chunker produced an oversized chunk " + c.id);
        expected_start = c.end_offset;
    }
    if (expected_start != source.document_text.size())
        fail(ErrorCode::validation, "chunker did not cover the document");
    return chunks;
}

std::vector<BoundaryProposal> HeuristicBoundaryProposer::propose(
    const std::string& window_text, std::size_t window_start, std::size_t window_end,
    std::optional<std::size_t> last_boundary) {
    (void)last_boundary;
    std::vector<BoundaryProposal> out;
    if (window_end <= window_start) return out;
    const std::size_t wlen = window_text.size();
    std::size_t seen_last = 0;
    for (std::size_t target = stride_; target < window_end; target += stride_) {
        if (target <= window_start) continue;
        std::size_t local = target - window_start;
        if (local >= wlen) break;
        bool found = false;
        std::size_t cand = nearest_match(window_text, local, wlen, follows_paragraph, &found);
        if (!found || cand == 0) continue;
        std::size_t absolute = window_start + cand;
        if (absolute == seen_last) continue;
        seen_last = absolute;
        out.push_back({absolute, "paragraph break nearest offset " + std::to_string(target)});
    }
    return out;
}

std::vector<BoundaryProposal> LlmBoundaryProposer::propose(
    const std::string& window_text, std::size_t window_start, std::size_t window_end,
    std::optional<std::size_t> last_boundary) {
    std::string prompt = template_;
    prompt = replace_all(std::move(prompt), "{{window_text}}", window_text);
    prompt = replace_all(std::move(prompt), "{{window_start}}", std::to_string(window_start));
    prompt = replace_all(std::move(prompt), "{{window_end}}", std::to_string(window_end));
    prompt = replace_all(std::move(prompt), "{{last_boundary}}",
                         last_boundary ? std::to_string(*last_boundary) : "none");

    ChatRequest request;
    request.messages.push_back({"user", prompt});
    request.model_id = model_id_;

    auto parse = [](const std::string& text) {
        json obj = parse_fenced_json(text);
        std::vector<BoundaryProposal> out;
        if (!obj.is_object() || !obj.contains("boundaries") || !obj["boundaries"].is_array())
            fail(ErrorCode::parse, "expected an object with a boundaries array");
        for (const auto& item : obj["boundaries"]) {
            BoundaryProposal p;
            if (!item.contains("offset") || !item["offset"].is_number_unsigned())
                fail(ErrorCode::parse, "boundary offset must be a non-negative integer");
            p.offset = item["offset"].get<std::size_t>();
            p.justification = item.value("justification", std::string{});
            out.push_back(std::move(p));
        }
        return out;
    };

    ChatResponse response = provider_.complete(request);
    std::string text = response.text.value_or(std::string{});
    try {
        return parse(text);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::parse) throw;
        ChatRequest retry = request;
        retry.messages.push_back({"assistant", text});
        retry.messages.push_back(
            {"user", std::string("Your previous reply could not be parsed: ") + e.what() +
                         "\nReply again with only a fenced JSON object of the form "
                         "{\"boundaries\": [{\"offset\": N, \"justification\": \"...\"}]}."});
        ChatResponse second = provider_.complete(retry);
        try {
            return parse(second.text.value_or(std::string{}));
        } catch (const Error& e2) {
            if (e2.code() != ErrorCode::parse) throw;
            return {}; // window contributes nothing; review handles oversize
        }
    }
}

} // namespace pg

#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace pg {

struct ChatMessage {
    std::string role; // "system" | "user" | "assistant" | "tool"
    std::string content;
};

struct ToolDecl {
    std::string name;
    std::string description;
    nlohmann::json parameters; // JSON schema object
};

struct ToolCall {
    std::string name;
    nlohmann::json arguments; // parsed argument object
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    std::vector<ToolDecl> tools;
    double temperature = 0.0;
    std::string model_id;
};

// Exactly one of text / tool_call is set; raw keeps the provider payload (or
// a mock facsimile) for logging.
struct ChatResponse {
    std::optional<std::string> text;
    std::optional<ToolCall> tool_call;
    std::string raw;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    // One vector per input, same order, all of dimension().
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
    virtual std::size_t dimension() const = 0;
    std::vector<double> embed_one(const std::string& text);
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// One scripted exchange. Exactly one of respond_text / respond_tool_call.
struct ReplayStep {
    std::optional<std::string> expect_substring;
    std::optional<std::string> respond_text;
    std::optional<ToolCall> respond_tool_call;
};

// Deterministic mock: consumes steps in order, optionally asserting that the
// incoming prompt contains a marker substring. Thread-safe; script order is
// preserved under concurrent callers.
class ReplayChatProvider : public ChatProvider {
public:
    explicit ReplayChatProvider(std::vector<ReplayStep> steps);
    static std::vector<ReplayStep> parse_script(const nlohmann::json& script);
    static std::unique_ptr<ReplayChatProvider> from_file(const std::string& path);

    ChatResponse complete(const ChatRequest& request) override;

    const std::vector<ChatRequest>& requests() const { return requests_; }
    std::size_t calls_made() const { return next_; }
    std::size_t steps_remaining() const { return steps_.size() - next_; }

private:
    std::vector<ReplayStep> steps_;
    std::vector<ChatRequest> requests_;
    std::size_t next_ = 0;
    std::mutex mutex_;
};

// Deterministic mock embedder: lowercase alphanumeric tokens hashed into a
// fixed-dimension count vector, L2-normalized. Similarity correlates with
// token overlap, which is all the linker/retrieval tests need.
class HashedBagEmbedder : public Embedder {
public:
    explicit HashedBagEmbedder(std::size_t dim = 256) : dim_(dim) {}
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::size_t dimension() const override { return dim_; }

private:
    std::size_t dim_;
};

struct HttpProviderConfig {
    std::string base_url; // e.g. "http://localhost:11434/v1"
    std::string model_id;
    std::string api_key_env; // env var holding the bearer token; empty = no auth header
    int timeout_seconds = 120;
    int max_retries = 3;
};

// Chat-completions-compatible HTTP client. Transport failures and 5xx are
// retried with exponential backoff; malformed content never is.
class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {}
    ChatResponse complete(const ChatRequest& request) override;

private:
    HttpProviderConfig config_;
};

class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(HttpProviderConfig config, std::size_t dim)
        : config_(std::move(config)), dim_(dim) {}
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::size_t dimension() const override { return dim_; }

private:
    HttpProviderConfig config_;
    std::size_t dim_;
};

// Wire-format helpers, separated from transport so they are testable offline.
nlohmann::json build_chat_payload(const ChatRequest& request, const std::string& model_id);
ChatResponse parse_chat_payload(const nlohmann::json& body);
nlohmann::json build_embedding_payload(const std::vector<std::string>& texts,
                                       const std::string& model_id);
std::vector<std::vector<double>> parse_embedding_payload(const nlohmann::json& body);

// Extracts the JSON object a model was asked to emit: prefers a fenced
// ```json block, then the whole text, then the outermost {...} span.
nlohmann::json parse_fenced_json(const std::string& text);

} // namespace pg

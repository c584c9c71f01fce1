#include "policygraph/llm.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "policygraph/error.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

std::vector<double> Embedder::embed_one(const std::string& text) {
    return embed({text}).front();
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        fail(ErrorCode::invalid_argument, "cosine: dimension mismatch (" +
                                              std::to_string(a.size()) + " vs " +
                                              std::to_string(b.size()) + ")");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        fail(ErrorCode::invalid_argument, "cosine undefined for a zero vector");
    double v = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::max(-1.0, std::min(1.0, v));
}

namespace {

void check_request(const ChatRequest& request) {
    if (request.messages.empty())
        fail(ErrorCode::invalid_argument, "chat request has no messages");
    if (!std::isfinite(request.temperature))
        fail(ErrorCode::invalid_argument, "chat request temperature is not finite");
}

std::string flatten_messages(const ChatRequest& request) {
    std::string all;
    for (const auto& m : request.messages) {
        all += m.content;
        all += '\n';
    }
    return all;
}

} // namespace

ReplayChatProvider::ReplayChatProvider(std::vector<ReplayStep> steps) : steps_(std::move(steps)) {
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        const auto& s = steps_[i];
        if (s.respond_text.has_value() == s.respond_tool_call.has_value())
            fail(ErrorCode::parse, "replay step " + std::to_string(i) +
                                       " must have exactly one of respond_text/respond_tool_call");
    }
}

std::vector<ReplayStep> ReplayChatProvider::parse_script(const json& script) {
    if (!script.is_array()) fail(ErrorCode::parse, "replay script must be a JSON array of steps");
    std::vector<ReplayStep> steps;
    for (const auto& item : script) {
        if (!item.is_object()) fail(ErrorCode::parse, "replay step must be an object");
        ReplayStep step;
        if (item.contains("expect_substring"))
            step.expect_substring = item.at("expect_substring").get<std::string>();
        if (item.contains("respond_text"))
            step.respond_text = item.at("respond_text").get<std::string>();
        if (item.contains("respond_tool_call")) {
            const auto& tc = item.at("respond_tool_call");
            ToolCall call;
            call.name = tc.at("name").get<std::string>();
            call.arguments = tc.value("arguments", json::object());
            step.respond_tool_call = std::move(call);
        }
        steps.push_back(std::move(step));
    }
    return steps;
}

std::unique_ptr<ReplayChatProvider> ReplayChatProvider::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open replay script '" + path + "'");
    json script;
    try {
        in >> script;
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, "replay script '" + path + "': " + e.what());
    }
    return std::make_unique<ReplayChatProvider>(parse_script(script));
}

ChatResponse ReplayChatProvider::complete(const ChatRequest& request) {
    check_request(request);
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= steps_.size())
        fail(ErrorCode::provider,
             "replay script exhausted after " + std::to_string(steps_.size()) + " calls");
    const ReplayStep& step = steps_[next_];
    if (step.expect_substring) {
        std::string all = flatten_messages(request);
        if (all.find(*step.expect_substring) == std::string::npos)
            fail(ErrorCode::provider, "replay step " + std::to_string(next_) +
                                          ": prompt does not contain expected substring \"" +
                                          *step.expect_substring + "\"");
    }
    requests_.push_back(request);
    ++next_;
    ChatResponse resp;
    if (step.respond_text) {
        resp.text = *step.respond_text;
        resp.raw = *step.respond_text;
    } else {
        resp.tool_call = *step.respond_tool_call;
        resp.raw = json{{"tool_call",
                         {{"name", step.respond_tool_call->name},
                          {"arguments", step.respond_tool_call->arguments}}}}
                       .dump();
    }
    return resp;
}

std::vector<std::vector<double>> HashedBagEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) fail(ErrorCode::invalid_argument, "embed: empty input list");
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        auto tokens = tokenize(text);
        if (tokens.empty())
            fail(ErrorCode::invalid_argument,
                 "embed: text produced no tokens: \"" + one_line(text, 60) + "\"");
        std::vector<double> v(dim_, 0.0);
        for (const auto& tok : tokens) v[fnv1a(tok) % dim_] += 1.0;
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

json build_chat_payload(const ChatRequest& request, const std::string& model_id) {
    json payload;
    payload["model"] = model_id;
    payload["temperature"] = request.temperature;
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    payload["messages"] = std::move(messages);
    if (!request.tools.empty()) {
        json tools = json::array();
        for (const auto& t : request.tools)
            tools.push_back({{"type", "function"},
                             {"function",
                              {{"name", t.name},
                               {"description", t.description},
                               {"parameters", t.parameters}}}});
        payload["tools"] = std::move(tools);
    }
    return payload;
}

ChatResponse parse_chat_payload(const json& body) {
    ChatResponse resp;
    resp.raw = body.dump();
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
        fail(ErrorCode::protocol, "chat response has no choices: " + resp.raw);
    const json& message = body["choices"][0].value("message", json::object());
    if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
        !message["tool_calls"].empty()) {
        const json& tc = message["tool_calls"][0];
        ToolCall call;
        call.name = tc.at("function").at("name").get<std::string>();
        const json& args = tc.at("function").at("arguments");
        if (args.is_string()) {
            try {
                call.arguments = json::parse(args.get<std::string>());
            } catch (const json::exception&) {
                fail(ErrorCode::protocol, "malformed tool arguments: " + resp.raw);
            }
        } else if (args.is_object()) {
            call.arguments = args;
        } else {
            fail(ErrorCode::protocol, "malformed tool arguments: " + resp.raw);
        }
        resp.tool_call = std::move(call);
        return resp;
    }
    if (message.contains("content") && message["content"].is_string()) {
        resp.text = message["content"].get<std::string>();
        return resp;
    }
    fail(ErrorCode::protocol, "chat response has neither content nor tool call: " + resp.raw);
}

json build_embedding_payload(const std::vector<std::string>& texts, const std::string& model_id) {
    return json{{"model", model_id}, {"input", texts}};
}

std::vector<std::vector<double>> parse_embedding_payload(const json& body) {
    if (!body.contains("data") || !body["data"].is_array())
        fail(ErrorCode::protocol, "embedding response has no data array");
    struct Row {
        int index;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    for (const auto& item : body["data"]) {
        Row row;
        row.index = item.value("index", static_cast<int>(rows.size()));
        row.values = item.at("embedding").get<std::vector<double>>();
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.index < b.index; });
    std::vector<std::vector<double>> out;
    for (auto& r : rows) out.push_back(std::move(r.values));
    return out;
}

namespace {

// Splits "http://host:port/prefix" into the client target and path prefix.
void split_base_url(const std::string& base_url, std::string& host_part, std::string& prefix) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        fail(ErrorCode::invalid_argument, "base_url must include a scheme: " + base_url);
    auto slash = base_url.find('/', scheme_end + 3);
    if (slash == std::string::npos) {
        host_part = base_url;
        prefix.clear();
    } else {
        host_part = base_url.substr(0, slash);
        prefix = base_url.substr(slash);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
}

json http_post_json(const HttpProviderConfig& config, const std::string& route, const json& payload) {
    std::string host_part, prefix;
    split_base_url(config.base_url, host_part, prefix);
    std::string path = prefix + route;

    httplib::Headers headers;
    if (!config.api_key_env.empty()) {
        const char* key = std::getenv(config.api_key_env.c_str());
        if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    std::string body = payload.dump();

    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, config.max_retries); ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(200 << (attempt - 1)));
        httplib::Client client(host_part);
        client.set_connection_timeout(config.timeout_seconds, 0);
        client.set_read_timeout(config.timeout_seconds, 0);
        auto result = client.Post(path, headers, body, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue; // retryable
        }
        if (result->status >= 500) {
            last_error = "server error " + std::to_string(result->status);
            continue; // retryable
        }
        if (result->status != 200)
            fail(ErrorCode::provider, "provider returned HTTP " + std::to_string(result->status) +
                                          ": " + one_line(result->body, 200));
        try {
            return json::parse(result->body);
        } catch (const json::exception& e) {
            fail(ErrorCode::protocol,
                 std::string("provider returned unparseable JSON: ") + e.what());
        }
    }
    fail(ErrorCode::provider, "provider unreachable after " +
                                  std::to_string(std::max(1, config.max_retries)) +
                                  " attempts: " + last_error);
}

} // namespace

ChatResponse HttpChatProvider::complete(const ChatRequest& request) {
    check_request(request);
    json payload = build_chat_payload(request, config_.model_id);
    json body = http_post_json(config_, "/chat/completions", payload);
    return parse_chat_payload(body);
}

std::vector<std::vector<double>> HttpEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) fail(ErrorCode::invalid_argument, "embed: empty input list");
    for (const auto& t : texts)
        if (t.empty()) fail(ErrorCode::invalid_argument, "embed: empty text in input");
    json payload = build_embedding_payload(texts, config_.model_id);
    json body = http_post_json(config_, "/embeddings", payload);
    auto vectors = parse_embedding_payload(body);
    if (vectors.size() != texts.size())
        fail(ErrorCode::protocol, "embedding count mismatch: got " +
                                      std::to_string(vectors.size()) + " for " +
                                      std::to_string(texts.size()) + " inputs");
    for (const auto& v : vectors)
        if (v.size() != dim_)
            fail(ErrorCode::protocol, "embedding dimension mismatch: got " +
                                          std::to_string(v.size()) + ", expected " +
                                          std::to_string(dim_));
    return vectors;
}

json parse_fenced_json(const std::string& text) {
    auto try_parse = [](const std::string& s) -> std::optional<json> {
        try {
            return json::parse(s);
        } catch (const json::exception&) {
            return std::nullopt;
        }
    };
    auto fence = text.find("```");
    if (fence != std::string::npos) {
        auto line_end = text.find('\n', fence);
        if (line_end != std::string::npos) {
            auto close = text.find("```", line_end);
            if (close != std::string::npos) {
                if (auto parsed = try_parse(text.substr(line_end + 1, close - line_end - 1)))
                    return *parsed;
            }
        }
    }
    if (auto parsed = try_parse(trim(text))) return *parsed;
    auto open = text.find('{');
    auto close = text.rfind('}');
    if (open != std::string::npos && close != std::string::npos && close > open)
        if (auto parsed = try_parse(text.substr(open, close - open + 1))) return *parsed;
    fail(ErrorCode::parse, "no parseable JSON in model output: \"" + one_line(text, 120) + "\"");
}

} // namespace pg

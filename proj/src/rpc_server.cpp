#include "policygraph/rpc_server.hpp"

#include <istream>
#include <ostream>

#include "policygraph/error.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

namespace {

constexpr int kParseError = -32700;
constexpr int kInvalidRequest = -32600;
constexpr int kMethodNotFound = -32601;
constexpr int kInvalidParams = -32602;
constexpr int kServerError = -32000;

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::validation: return "validation";
    case ErrorCode::provider: return "provider";
    case ErrorCode::protocol: return "protocol";
    }
    return "internal";
}

std::string envelope_error(const json& id, int code, const std::string& message,
                           json data = {}) {
    json error{{"code", code}, {"message", message}};
    if (!data.is_null()) error["data"] = std::move(data);
    json response{{"jsonrpc", "2.0"}, {"id", id}, {"error", std::move(error)}};
    return response.dump();
}

std::string envelope_result(const json& id, json result) {
    json response{{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
    return response.dump();
}

} // namespace

json RpcServer::dispatch(const std::string& method, const json& params) {
    if (method == "initialize")
        return json{{"server", json{{"name", "policygraph"}, {"version", kEngineVersion}}},
                    {"capabilities",
                     json{{"tools", json::object()},
                          {"resources", json::object()},
                          {"prompts", json::object()}}}};
    if (method == "ping") return json::object();
    if (method == "tools/list") return json{{"tools", engine_.manifest()["tools"]}};
    if (method == "tools/call") {
        if (!params.is_object() || !params.contains("name") || !params["name"].is_string())
            fail(ErrorCode::invalid_argument, "tools/call needs a 'name' string parameter");
        json arguments =
            params.contains("arguments") ? params["arguments"] : json::object();
        return engine_.call_tool(params["name"].get<std::string>(), arguments);
    }
    if (method == "resources/list")
        return json{{"resources", engine_.manifest()["resources"]}};
    if (method == "resources/read") {
        if (!params.is_object() || !params.contains("uri") || !params["uri"].is_string())
            fail(ErrorCode::invalid_argument, "resources/read needs a 'uri' string parameter");
        std::string uri = params["uri"].get<std::string>();
        return json{{"uri", uri}, {"text", engine_.read_resource(uri)}};
    }
    if (method == "prompts/list") return json{{"prompts", engine_.manifest()["prompts"]}};
    if (method == "prompts/get") {
        if (!params.is_object() || !params.contains("name") || !params["name"].is_string())
            fail(ErrorCode::invalid_argument, "prompts/get needs a 'name' string parameter");
        std::string name = params["name"].get<std::string>();
        for (const auto& [prompt_name, description] : AssetStore::prompt_names())
            if (prompt_name == name)
                return json{{"name", name},
                            {"description", description},
                            {"template", engine_.assets().prompt(name)}};
        fail(ErrorCode::not_found, "unknown prompt: " + name);
    }
    fail(ErrorCode::not_found, "method not found: " + method);
}

std::optional<std::string> RpcServer::handle_line(const std::string& line) {
    json request;
    try {
        request = json::parse(line);
    } catch (const json::exception& e) {
        return envelope_error(nullptr, kParseError, std::string("parse error: ") + e.what());
    }

    json id = nullptr;
    bool is_notification = true;
    if (request.is_object() && request.contains("id")) {
        id = request["id"];
        is_notification = false;
    }

    if (!request.is_object() || !request.contains("method") || !request["method"].is_string() ||
        (request.contains("jsonrpc") && request["jsonrpc"] != "2.0")) {
        if (is_notification) return std::nullopt;
        return envelope_error(id, kInvalidRequest, "invalid request");
    }

    std::string method = request["method"].get<std::string>();
    json params = request.contains("params") ? request["params"] : json::object();

    try {
        json result = dispatch(method, params);
        if (is_notification) return std::nullopt;
        return envelope_result(id, std::move(result));
    } catch (const Error& e) {
        if (is_notification) return std::nullopt;
        int code = kServerError;
        if (e.code() == ErrorCode::invalid_argument) code = kInvalidParams;
        if (e.code() == ErrorCode::not_found && starts_with_ci(e.what(), "method not found"))
            code = kMethodNotFound;
        return envelope_error(id, code, e.what(),
                              json{{"code", error_code_name(e.code())}});
    } catch (const std::exception& e) {
        if (is_notification) return std::nullopt;
        return envelope_error(id, kServerError, e.what(), json{{"code", "internal"}});
    }
}

int RpcServer::serve(std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto response = handle_line(line);
        if (response) {
            out << *response << "\n";
            out.flush();
        }
    }
    return 0;
}

} // namespace pg

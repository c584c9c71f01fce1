#include "policygraph.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "policygraph/config.hpp"
#include "policygraph/engine.hpp"
#include "policygraph/error.hpp"
#include "policygraph/persistence.hpp"
#include "policygraph/rpc_server.hpp"

struct pg_engine {
    explicit pg_engine(pg::Config config) : engine(std::move(config)), server(engine) {}
    pg::Engine engine;
    pg::RpcServer server;
    std::string last_error;
};

namespace {

thread_local std::string g_open_error;

pg_status status_from(pg::ErrorCode code) {
    switch (code) {
    case pg::ErrorCode::invalid_argument: return PG_ERR_INVALID_ARGUMENT;
    case pg::ErrorCode::parse: return PG_ERR_PARSE;
    case pg::ErrorCode::io: return PG_ERR_IO;
    case pg::ErrorCode::not_found: return PG_ERR_NOT_FOUND;
    case pg::ErrorCode::validation: return PG_ERR_VALIDATION;
    case pg::ErrorCode::provider: return PG_ERR_PROVIDER;
    case pg::ErrorCode::protocol: return PG_ERR_PROTOCOL;
    }
    return PG_ERR_INTERNAL;
}

void set_status(pg_status* status, pg_status value) {
    if (status) *status = value;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

pg_engine* open_from_json(const nlohmann::json& j, pg_status* status) {
    try {
        auto* engine = new pg_engine(pg::config_from_json(j));
        g_open_error.clear();
        set_status(status, PG_OK);
        return engine;
    } catch (const pg::Error& e) {
        g_open_error = e.what();
        set_status(status, status_from(e.code()));
    } catch (const std::exception& e) {
        g_open_error = e.what();
        set_status(status, PG_ERR_INTERNAL);
    }
    return nullptr;
}

} // namespace

extern "C" {

const char* pg_version(void) { return pg::kEngineVersion; }

pg_engine* pg_engine_open(const char* config_json, pg_status* status) {
    if (!config_json) {
        g_open_error = "config_json is NULL";
        set_status(status, PG_ERR_INVALID_ARGUMENT);
        return nullptr;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
        g_open_error = std::string("config parse error: ") + e.what();
        set_status(status, PG_ERR_PARSE);
        return nullptr;
    }
    return open_from_json(j, status);
}

pg_engine* pg_engine_open_file(const char* config_path, pg_status* status) {
    if (!config_path) {
        g_open_error = "config_path is NULL";
        set_status(status, PG_ERR_INVALID_ARGUMENT);
        return nullptr;
    }
    nlohmann::json j;
    try {
        j = pg::load_json_file(config_path);
    } catch (const pg::Error& e) {
        g_open_error = e.what();
        set_status(status, status_from(e.code()));
        return nullptr;
    }
    return open_from_json(j, status);
}

void pg_engine_close(pg_engine* engine) { delete engine; }

const char* pg_last_open_error(void) { return g_open_error.c_str(); }

const char* pg_engine_last_error(const pg_engine* engine) {
    return engine ? engine->last_error.c_str() : "engine is NULL";
}

char* pg_engine_call(pg_engine* engine, const char* tool, const char* arguments_json,
                     pg_status* status) {
    if (!engine) {
        set_status(status, PG_ERR_INVALID_ARGUMENT);
        return nullptr;
    }
    engine->last_error.clear();
    if (!tool || !*tool) {
        engine->last_error = "tool name is empty";
        set_status(status, PG_ERR_INVALID_ARGUMENT);
        return nullptr;
    }
    nlohmann::json args = nlohmann::json::object();
    if (arguments_json && *arguments_json) {
        try {
            args = nlohmann::json::parse(arguments_json);
        } catch (const nlohmann::json::exception& e) {
            engine->last_error = std::string("arguments parse error: ") + e.what();
            set_status(status, PG_ERR_PARSE);
            return nullptr;
        }
    }
    try {
        nlohmann::json result = engine->engine.call_tool(tool, args);
        set_status(status, PG_OK);
        return dup_string(result.dump(2));
    } catch (const pg::Error& e) {
        engine->last_error = e.what();
        set_status(status, status_from(e.code()));
    } catch (const std::exception& e) {
        engine->last_error = e.what();
        set_status(status, PG_ERR_INTERNAL);
    }
    return nullptr;
}

char* pg_engine_rpc(pg_engine* engine, const char* request_line) {
    if (!engine || !request_line) return nullptr;
    engine->last_error.clear();
    try {
        auto response = engine->server.handle_line(request_line);
        if (!response) return nullptr;
        return dup_string(*response);
    } catch (const std::exception& e) {
        engine->last_error = e.what();
        return nullptr;
    }
}

pg_status pg_engine_serve_stdio(pg_engine* engine) {
    if (!engine) return PG_ERR_INVALID_ARGUMENT;
    engine->last_error.clear();
    try {
        engine->server.serve(std::cin, std::cout);
        return PG_OK;
    } catch (const pg::Error& e) {
        engine->last_error = e.what();
        return status_from(e.code());
    } catch (const std::exception& e) {
        engine->last_error = e.what();
        return PG_ERR_INTERNAL;
    }
}

char* pg_engine_manifest(pg_engine* engine, pg_status* status) {
    if (!engine) {
        set_status(status, PG_ERR_INVALID_ARGUMENT);
        return nullptr;
    }
    engine->last_error.clear();
    try {
        set_status(status, PG_OK);
        return dup_string(engine->engine.manifest().dump(2));
    } catch (const std::exception& e) {
        engine->last_error = e.what();
        set_status(status, PG_ERR_INTERNAL);
    }
    return nullptr;
}

void pg_string_free(char* s) { std::free(s); }

} // extern "C"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <policygraph.h>

// Exercises the shared library exactly as a foreign host would: C calls,
// JSON strings, and files on disk. No C++ engine symbols are visible here.

using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) { return "/tmp/pg_capi_" + name; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out << content;
    REQUIRE(out.good());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json entity_doc(const std::string& id, const std::string& name, const std::string& type,
                const std::string& source) {
    return json{{"id", id},           {"name", name},
                {"entity_type", type}, {"description", ""},
                {"article_ref", ""},   {"policy_quote", ""},
                {"source_id", source}, {"source_chunk_id", ""}};
}

// Builds a loadable graph document by hand; the library re-verifies on load.
std::string write_graph_file(const std::string& name) {
    json schema = json::parse(read_file(std::string(PG_ASSETS_DIR) + "/schema_closed.json"));
    json relations = json::array(
        {json{{"id", "p1_r0001"},
              {"relation_type", "HAS_RISK"},
              {"source_entity_id", "p1_e0001"},
              {"target_entity_id", "p1_e0002"},
              {"description", ""}},
         json{{"id", "p1_r0002"},
              {"relation_type", "MITIGATES"},
              {"source_entity_id", "p1_e0003"},
              {"target_entity_id", "p1_e0002"},
              {"description", ""}}});
    json doc{{"format_version", 1},
             {"schema", schema},
             {"entities",
              json::array({entity_doc("p1_e0001", "lending scoring system", "AI_SYSTEM", "p1"),
                           entity_doc("p1_e0002", "training data bias", "RISK", "p1"),
                           entity_doc("p1_e0003", "annual bias audit", "RISK_CONTROL", "p1")})},
             {"relations", relations}};
    const std::string path = temp_path(name);
    write_file(path, doc.dump(2) + "\n");
    return path;
}

std::string engine_config(const std::string& graph_path) {
    return json{{"provider", {{"kind", "none"}}},
                {"embedder", {{"kind", "hashed"}, {"dim", 256}}},
                {"paths", {{"graph", graph_path}}}}
        .dump();
}

struct EngineGuard {
    pg_engine* handle = nullptr;
    ~EngineGuard() { pg_engine_close(handle); }
};

struct StringGuard {
    char* s = nullptr;
    ~StringGuard() { pg_string_free(s); }
};

} // namespace

TEST_CASE("version string is static") {
    REQUIRE(pg_version() != nullptr);
    CHECK(std::string(pg_version()) == "1.0.0");
    CHECK(pg_version() == pg_version()); // same storage every call
}

TEST_CASE("open reports failures through status and last_open_error") {
    pg_status status = PG_OK;
    CHECK(pg_engine_open(nullptr, &status) == nullptr);
    CHECK(status == PG_ERR_INVALID_ARGUMENT);
    CHECK(std::string(pg_last_open_error()) == "config_json is NULL");

    CHECK(pg_engine_open("{nope", &status) == nullptr);
    CHECK(status == PG_ERR_PARSE);
    CHECK(std::string(pg_last_open_error()).rfind("config parse error: ", 0) == 0);

    CHECK(pg_engine_open("{\"bogus\": 1}", &status) == nullptr);
    CHECK(status == PG_ERR_VALIDATION);
    CHECK(std::string(pg_last_open_error()) == "config: unknown key 'bogus' in config");

    CHECK(pg_engine_open("{\"provider\": {\"kind\": \"replay\"}}", nullptr) == nullptr);
    CHECK(std::string(pg_last_open_error()) == "config: replay provider needs provider.script");

    CHECK(pg_engine_open_file(nullptr, &status) == nullptr);
    CHECK(status == PG_ERR_INVALID_ARGUMENT);
    CHECK(std::string(pg_last_open_error()) == "config_path is NULL");

    CHECK(pg_engine_open_file("/tmp/pg_capi_missing.json", &status) == nullptr);
    CHECK(status == PG_ERR_IO);
    CHECK(std::string(pg_last_open_error()) ==
          "cannot open '/tmp/pg_capi_missing.json' for reading");

    status = PG_ERR_INTERNAL;
    EngineGuard ok;
    ok.handle = pg_engine_open("{}", &status);
    REQUIRE(ok.handle != nullptr);
    CHECK(status == PG_OK);
    CHECK(std::string(pg_last_open_error()).empty()); // cleared by success

    const std::string cfg_path = temp_path("config.json");
    write_file(cfg_path, "{\"model_id\": \"from-file\"}\n");
    EngineGuard from_file;
    from_file.handle = pg_engine_open_file(cfg_path.c_str(), &status);
    REQUIRE(from_file.handle != nullptr);
    CHECK(status == PG_OK);

    pg_engine_close(nullptr); // tolerated
}

TEST_CASE("manifest and tool calls round trip as JSON strings") {
    EngineGuard engine;
    engine.handle = pg_engine_open(engine_config(write_graph_file("tools_graph.json")).c_str(),
                                   nullptr);
    REQUIRE(engine.handle != nullptr);

    pg_status status = PG_ERR_INTERNAL;
    StringGuard manifest;
    manifest.s = pg_engine_manifest(engine.handle, &status);
    REQUIRE(manifest.s != nullptr);
    CHECK(status == PG_OK);
    json m = json::parse(manifest.s);
    CHECK(m["tools"].size() == 12);
    CHECK(m["tools"][0]["name"] == "chunk_document");
    CHECK(m["resources"].size() == 7);
    CHECK(m["prompts"].size() == 8);

    StringGuard summary;
    summary.s = pg_engine_call(engine.handle, "schema_summary", "{}", &status);
    REQUIRE(summary.s != nullptr);
    CHECK(status == PG_OK);
    json s = json::parse(summary.s);
    CHECK(s["summary"].get<std::string>().rfind("GRAPH SUMMARY", 0) == 0);
    CHECK(std::string(pg_engine_last_error(engine.handle)).empty());

    // NULL and "" both mean no arguments.
    StringGuard with_null;
    with_null.s = pg_engine_call(engine.handle, "verify_graph", nullptr, &status);
    REQUIRE(with_null.s != nullptr);
    CHECK(json::parse(with_null.s)["ok"] == true);
    StringGuard with_empty;
    with_empty.s = pg_engine_call(engine.handle, "verify_graph", "", &status);
    REQUIRE(with_empty.s != nullptr);
    CHECK(json::parse(with_empty.s)["entities"] == 3);

    StringGuard hits;
    hits.s = pg_engine_call(engine.handle, "keyword_search",
                            "{\"query\": \"bias audit\", \"k\": 2}", &status);
    REQUIRE(hits.s != nullptr);
    json h = json::parse(hits.s);
    REQUIRE(h["hits"].size() == 2);
    CHECK(h["hits"][0]["id"] == "p1_e0003");
    CHECK(h["hits"][0]["score"] == 4.0);
    CHECK(h["hits"][1]["id"] == "p1_e0002");
}

TEST_CASE("call failures set status and last_error") {
    EngineGuard engine;
    engine.handle = pg_engine_open(engine_config(write_graph_file("errors_graph.json")).c_str(),
                                   nullptr);
    REQUIRE(engine.handle != nullptr);

    pg_status status = PG_OK;
    CHECK(pg_engine_call(nullptr, "ping", "{}", &status) == nullptr);
    CHECK(status == PG_ERR_INVALID_ARGUMENT);
    CHECK(std::string(pg_engine_last_error(nullptr)) == "engine is NULL");

    CHECK(pg_engine_call(engine.handle, nullptr, "{}", &status) == nullptr);
    CHECK(status == PG_ERR_INVALID_ARGUMENT);
    CHECK(std::string(pg_engine_last_error(engine.handle)) == "tool name is empty");
    CHECK(pg_engine_call(engine.handle, "", "{}", &status) == nullptr);
    CHECK(std::string(pg_engine_last_error(engine.handle)) == "tool name is empty");

    CHECK(pg_engine_call(engine.handle, "keyword_search", "{oops", &status) == nullptr);
    CHECK(status == PG_ERR_PARSE);
    CHECK(std::string(pg_engine_last_error(engine.handle)).rfind("arguments parse error: ", 0) ==
          0);

    CHECK(pg_engine_call(engine.handle, "zap", "{}", &status) == nullptr);
    CHECK(status == PG_ERR_NOT_FOUND);
    CHECK(std::string(pg_engine_last_error(engine.handle)) == "unknown tool: zap");

    CHECK(pg_engine_call(engine.handle, "keyword_search", "{}", &status) == nullptr);
    CHECK(status == PG_ERR_INVALID_ARGUMENT);
    CHECK(std::string(pg_engine_last_error(engine.handle)) == "missing required argument 'query'");

    CHECK(pg_engine_call(engine.handle, "ask_question", "{\"question\": \"q\"}", &status) ==
          nullptr);
    CHECK(status == PG_ERR_PROVIDER);
    CHECK(std::string(pg_engine_last_error(engine.handle)) ==
          "no chat provider configured (provider.kind is none)");

    // A later success clears the message again.
    StringGuard ok;
    ok.s = pg_engine_call(engine.handle, "schema_summary", "{}", &status);
    REQUIRE(ok.s != nullptr);
    CHECK(std::string(pg_engine_last_error(engine.handle)).empty());
}

TEST_CASE("rpc passthrough speaks JSON-RPC") {
    EngineGuard engine;
    engine.handle = pg_engine_open(engine_config(write_graph_file("rpc_graph.json")).c_str(),
                                   nullptr);
    REQUIRE(engine.handle != nullptr);

    StringGuard pong;
    pong.s = pg_engine_rpc(engine.handle, "{\"jsonrpc\":\"2.0\",\"id\":1,\"method\":\"ping\"}");
    REQUIRE(pong.s != nullptr);
    json p = json::parse(pong.s);
    CHECK(p["id"] == 1);
    CHECK(p["result"] == json::object());

    StringGuard tools;
    tools.s =
        pg_engine_rpc(engine.handle, "{\"jsonrpc\":\"2.0\",\"id\":2,\"method\":\"tools/list\"}");
    REQUIRE(tools.s != nullptr);
    CHECK(json::parse(tools.s)["result"]["tools"].size() == 12);

    // Notifications return NULL; malformed lines return an error response.
    CHECK(pg_engine_rpc(engine.handle, "{\"jsonrpc\":\"2.0\",\"method\":\"ping\"}") == nullptr);
    StringGuard parse_err;
    parse_err.s = pg_engine_rpc(engine.handle, "{nope");
    REQUIRE(parse_err.s != nullptr);
    CHECK(json::parse(parse_err.s)["error"]["code"] == -32700);

    CHECK(pg_engine_rpc(engine.handle, nullptr) == nullptr);
    CHECK(pg_engine_rpc(nullptr, "{}") == nullptr);
}

TEST_CASE("replay provider answers a question through the C surface") {
    // Forced agent path: keyword tools work on a graph with no embeddings.
    const std::string script_path = temp_path("ask_script.json");
    write_file(script_path,
               json::array({json{{"expect_substring", "what mitigates bias?"},
                                 {"respond_tool_call",
                                  json{{"name", "keyword_search"},
                                       {"arguments", json{{"query", "bias"}}}}}},
                            json{{"respond_tool_call",
                                  json{{"name", "synthesize_answer"},
                                       {"arguments",
                                        json{{"evidence_ids",
                                              json::array({"p1_e0002", "p1_e0003"})}}}}}},
                            json{{"expect_substring", "EVIDENCE"},
                                 {"respond_text", "The audit."}}})
                   .dump());
    json config{{"provider", {{"kind", "replay"}, {"script", script_path}}},
                {"embedder", {{"kind", "hashed"}, {"dim", 256}}},
                {"paths", {{"graph", write_graph_file("ask_graph.json")}}}};
    EngineGuard engine;
    pg_status status = PG_ERR_INTERNAL;
    engine.handle = pg_engine_open(config.dump().c_str(), &status);
    REQUIRE(engine.handle != nullptr);
    CHECK(status == PG_OK);

    StringGuard answer;
    answer.s = pg_engine_call(
        engine.handle, "ask_question",
        "{\"question\": \"what mitigates bias?\", \"force_path\": \"agent\"}", &status);
    REQUIRE(answer.s != nullptr);
    CHECK(status == PG_OK);
    json a = json::parse(answer.s);
    CHECK(a["answer"] == "The audit.");
    CHECK(a["condition"] == "kg");
    CHECK(a["route"]["path"] == "agent");
    CHECK(a["route"]["decided_by"] == "fallback");
    CHECK(a["route"]["rationale"] == "forced by caller");
    CHECK(a["evidence"]["entity_ids"] == json::array({"p1_e0002", "p1_e0003"}));
    REQUIRE(a["trace"].size() == 2);
    CHECK(a["trace"][0]["tool"] == "keyword_search");
    CHECK(a["trace"][1]["tool"] == "synthesize_answer");
}

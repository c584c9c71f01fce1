// pgraph: command-line front end over the policygraph C API. Every
// subcommand is a thin mapping from flags to one engine tool call.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "policygraph.h"

using nlohmann::json;

namespace {

struct EngineHandle {
    pg_engine* engine = nullptr;
    ~EngineHandle() { pg_engine_close(engine); }
};

int fail_with(const char* stage, const std::string& message) {
    std::fprintf(stderr, "pgraph: %s: %s\n", stage, message.c_str());
    return 1;
}

int call_and_print(pg_engine* engine, const char* tool, const json& args,
                   const char* ok_field = nullptr) {
    pg_status status = PG_OK;
    char* result = pg_engine_call(engine, tool, args.dump().c_str(), &status);
    if (!result) return fail_with(tool, pg_engine_last_error(engine));
    std::printf("%s\n", result);
    int exit_code = 0;
    if (ok_field) {
        json parsed = json::parse(result);
        if (!parsed.value(ok_field, false)) exit_code = 2;
    }
    pg_string_free(result);
    return exit_code;
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::string current;
    for (char c : csv) {
        if (c == ',') {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Policy knowledge-graph pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Engine config JSON file")->required();

    std::string source_id, title, input_file, chunks_path;
    auto* chunk = app.add_subcommand("chunk", "Chunk one policy document into the store");
    chunk->add_option("--source-id", source_id, "Stable source id")->required();
    chunk->add_option("--title", title, "Document title");
    chunk->add_option("--input", input_file, "Path to the document text")->required();
    chunk->add_option("--chunks", chunks_path, "Chunk store path override");

    std::string graph_path;
    bool no_embed = false;
    auto* extract = app.add_subcommand("extract", "Extract entities and relations from stored chunks");
    extract->add_option("--graph", graph_path, "Graph path override");
    extract->add_option("--chunks", chunks_path, "Chunk store path override");
    extract->add_flag("--no-embed", no_embed, "Skip the entity embedding pass");

    std::string link_method;
    auto* link = app.add_subcommand("link", "Add cross-policy correspondence edges");
    link->add_option("--graph", graph_path, "Graph path override");
    link->add_option("--method", link_method, "auto | cosine | string");

    std::string question, condition, hint, force_path;
    auto* ask = app.add_subcommand("ask", "Answer one question over the graph");
    ask->add_option("--question", question, "The question")->required();
    ask->add_option("--condition", condition, "nc | kg (default kg)");
    ask->add_option("--hint", hint, "Task type hint T1..T6");
    ask->add_option("--force-path", force_path, "direct | agent (skip the router)");
    ask->add_option("--graph", graph_path, "Graph path override");
    ask->add_option("--chunks", chunks_path, "Chunk store path override");

    std::string questions_path, conditions_csv;
    std::size_t runs = 0;
    bool judge = false;
    auto* eval = app.add_subcommand("eval", "Score a question set over conditions and runs");
    eval->add_option("--questions", questions_path, "Questions JSONL path override");
    eval->add_option("--conditions", conditions_csv, "Comma-separated condition names");
    eval->add_option("--runs", runs, "Repeated runs");
    eval->add_flag("--judge", judge, "Run the LLM judge as well");

    auto* serve = app.add_subcommand("serve", "Serve JSON-RPC tools over stdio");

    auto* verify = app.add_subcommand("verify", "Verify every graph invariant");
    verify->add_option("--graph", graph_path, "Graph path override");
    verify->add_option("--chunks", chunks_path, "Chunk store for reference checks");

    CLI11_PARSE(app, argc, argv);

    pg_status status = PG_OK;
    EngineHandle handle;
    handle.engine = pg_engine_open_file(config_path.c_str(), &status);
    if (!handle.engine) return fail_with("open", pg_last_open_error());

    if (chunk->parsed()) {
        json args{{"source_id", source_id}, {"text_file", input_file}};
        if (!title.empty()) args["title"] = title;
        if (!chunks_path.empty()) args["chunks"] = chunks_path;
        return call_and_print(handle.engine, "chunk_document", args);
    }
    if (extract->parsed()) {
        json args = json::object();
        if (!graph_path.empty()) args["graph"] = graph_path;
        if (!chunks_path.empty()) args["chunks"] = chunks_path;
        if (no_embed) args["embed"] = false;
        return call_and_print(handle.engine, "extract_chunks", args);
    }
    if (link->parsed()) {
        json args = json::object();
        if (!graph_path.empty()) args["graph"] = graph_path;
        if (!link_method.empty()) args["method"] = link_method;
        return call_and_print(handle.engine, "link_graph", args);
    }
    if (ask->parsed()) {
        json args{{"question", question}};
        if (!condition.empty()) args["condition"] = condition;
        if (!hint.empty()) args["hint"] = hint;
        if (!force_path.empty()) args["force_path"] = force_path;
        if (!graph_path.empty()) args["graph"] = graph_path;
        if (!chunks_path.empty()) args["chunks"] = chunks_path;
        return call_and_print(handle.engine, "ask_question", args);
    }
    if (eval->parsed()) {
        json args = json::object();
        if (!questions_path.empty()) args["questions"] = questions_path;
        if (!conditions_csv.empty()) args["conditions"] = split_csv(conditions_csv);
        if (runs > 0) args["runs"] = runs;
        if (judge) args["judge"] = true;
        return call_and_print(handle.engine, "run_eval", args);
    }
    if (serve->parsed()) {
        pg_status rc = pg_engine_serve_stdio(handle.engine);
        if (rc != PG_OK) return fail_with("serve", pg_engine_last_error(handle.engine));
        return 0;
    }
    if (verify->parsed()) {
        json args = json::object();
        if (!graph_path.empty()) args["graph"] = graph_path;
        if (!chunks_path.empty()) args["chunks"] = chunks_path;
        return call_and_print(handle.engine, "verify_graph", args, "ok");
    }
    return fail_with("args", "no subcommand selected");
}

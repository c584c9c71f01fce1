#ifndef POLICYGRAPH_H
#define POLICYGRAPH_H

/* C interface to the policy knowledge-graph engine. All JSON crosses this
 * boundary as UTF-8 strings; returned strings are malloc'd and must be
 * released with pg_string_free. */

#ifdef _WIN32
#define PG_API __declspec(dllexport)
#else
#define PG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pg_engine pg_engine;

typedef enum pg_status {
    PG_OK = 0,
    PG_ERR_INVALID_ARGUMENT = 1,
    PG_ERR_PARSE = 2,
    PG_ERR_IO = 3,
    PG_ERR_NOT_FOUND = 4,
    PG_ERR_VALIDATION = 5,
    PG_ERR_PROVIDER = 6,
    PG_ERR_PROTOCOL = 7,
    PG_ERR_INTERNAL = 8
} pg_status;

/* Library version, static storage. */
PG_API const char* pg_version(void);

/* Opens an engine from a config JSON document (or a file holding one).
 * Returns NULL on failure with *status set (status may be NULL); the failure
 * message is then available from pg_last_open_error. */
PG_API pg_engine* pg_engine_open(const char* config_json, pg_status* status);
PG_API pg_engine* pg_engine_open_file(const char* config_path, pg_status* status);
PG_API void pg_engine_close(pg_engine* engine);

/* Message of the most recent pg_engine_open/pg_engine_open_file failure on
 * this thread; empty string when the last open succeeded. */
PG_API const char* pg_last_open_error(void);

/* Message of the most recent failing call on this engine; empty string when
 * the last call succeeded. Owned by the engine. */
PG_API const char* pg_engine_last_error(const pg_engine* engine);

/* Invokes one named tool with a JSON object of arguments (NULL or "" for
 * none). Returns the JSON result, or NULL on failure with *status set. */
PG_API char* pg_engine_call(pg_engine* engine, const char* tool, const char* arguments_json,
                            pg_status* status);

/* Dispatches one JSON-RPC 2.0 request line. Returns the response line, or
 * NULL for notifications. Bad input yields a JSON-RPC error response, not
 * NULL. */
PG_API char* pg_engine_rpc(pg_engine* engine, const char* request_line);

/* Serves line-delimited JSON-RPC over stdin/stdout until EOF. */
PG_API pg_status pg_engine_serve_stdio(pg_engine* engine);

/* The tools/resources/prompts manifest as JSON. */
PG_API char* pg_engine_manifest(pg_engine* engine, pg_status* status);

PG_API void pg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* POLICYGRAPH_H */

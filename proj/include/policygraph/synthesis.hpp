#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "policygraph/chunk_store.hpp"
#include "policygraph/model.hpp"
#include "policygraph/retrieval.hpp"

namespace pg {

struct ICLExample {
    std::string id;
    TaskType task_type = TaskType::T1;
    std::string question;
    std::string answer;
    std::optional<std::vector<double>> embedding;
};

// Loads {"examples": [...]} and checks the pool covers all six task types.
std::vector<ICLExample> load_icl_pool(const nlohmann::json& j);

struct SynthesisInput {
    std::string serialized_evidence;                          // empty under NC
    std::vector<std::pair<std::string, std::string>> chunk_texts; // (chunk_id, text)
    std::vector<ICLExample> icl_examples;
    std::string question;
    std::string task_instructions;
};

// The relations-first evidence text. Grammar (normative, golden-tested):
// "RELATIONS" header; per relation type (alphabetical) a "[TYPE]" line then
// one "SourceName -> TargetName" line per relation (source-name order);
// "ENTITIES" header; per evidence entity (bundle order) "[id] name" plus
// indented type/article/description/quote lines. Values are flattened to one
// line; empty fields still get their label.
std::string serialize_evidence(const KnowledgeGraph& graph, const EvidenceBundle& bundle);

// Top-n pool examples by embedding similarity to the question; ties resolve
// to pool order. n greater than the pool returns the whole pool (ranked).
std::vector<ICLExample> select_icl(const std::string& question,
                                   const std::vector<ICLExample>& pool, Embedder& embedder,
                                   std::size_t n = 2);

struct SynthesisTemplates {
    std::string synthesize_prompt;  // {{icl_examples}}, {{evidence_section}},
                                    // {{chunks_section}}, {{task_instructions}}, {{question}}
    std::string router_prompt;      // {{question}}, {{schema_summary}}
    std::string agent_system_prompt;// {{schema_summary}}, {{max_steps}}
};

// Renders the five-input prompt and issues exactly one completion call.
std::string synthesize(const SynthesisInput& input, ChatProvider& provider,
                       const std::string& synthesize_template, const std::string& model_id = {});

// Prompt text builder, exposed for section-order tests.
std::string render_synthesis_prompt(const SynthesisInput& input,
                                    const std::string& synthesize_template);

enum class Condition { NC, KG };

Condition condition_from_string(const std::string& s); // "nc" | "kg"

struct AnswerResult {
    std::string answer;
    std::optional<RouteDecision> route;   // absent under NC
    std::optional<EvidenceBundle> bundle; // absent under NC
};

struct AskEnv {
    const KnowledgeGraph* graph = nullptr;   // required for KG
    const ChunkStore* chunks = nullptr;      // optional: chunk texts omitted when absent
    ChatProvider* provider = nullptr;        // required
    Embedder* embedder = nullptr;            // required (ICL selection + retrieval)
    const std::vector<ICLExample>* icl_pool = nullptr;
    // Keyed "T1".."T6" plus "default" for untyped questions.
    const std::map<std::string, std::string>* task_instructions = nullptr;
    const SynthesisTemplates* templates = nullptr;
    AgentConfig agent;
    std::string model_id;
};

struct AskOptions {
    std::optional<TaskType> hint;
    std::optional<RetrievalPath> force_path; // skip the router entirely
};

// NC: ICL + instructions + question only — no routing, no retrieval, no
// chunks. KG: route -> retrieve -> synthesize with evidence and chunk text.
AnswerResult run_condition(const std::string& question, Condition condition, const AskEnv& env,
                           const AskOptions& options = {});

std::string task_instructions_for(const std::map<std::string, std::string>& table,
                                  std::optional<TaskType> hint);

} // namespace pg

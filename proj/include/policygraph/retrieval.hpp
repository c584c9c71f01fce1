#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "policygraph/graph_store.hpp"
#include "policygraph/llm.hpp"
#include "policygraph/model.hpp"

namespace pg {

enum class TaskType { T1, T2, T3, T4, T5, T6 };

TaskType task_type_from_string(const std::string& s); // "T1".."T6"
std::string task_type_to_string(TaskType t);

enum class RetrievalPath { Direct, Agent };
enum class RouteOrigin { Model, Fallback };

struct RouteDecision {
    RetrievalPath path = RetrievalPath::Direct;
    std::string rationale;
    RouteOrigin decided_by = RouteOrigin::Fallback;
};

struct TraceStep {
    std::string tool;
    nlohmann::json arguments;
    std::string result_summary; // compact JSON of the tool result, or ERROR: ...
};

struct EvidenceBundle {
    std::vector<std::string> entity_ids;   // rank order (direct) / as collected (agent)
    std::vector<std::string> relation_ids; // all relations among the entities, id order
    std::vector<std::string> chunk_ids;    // source chunks of the entities, first-seen order
    std::vector<TraceStep> trace;
};

struct AgentConfig {
    std::size_t max_steps = 7;
    std::size_t direct_top_k = 5;
    std::size_t expand_seeds = 3;
    std::string model_id;
    void validate() const;
};

// One completion expecting exactly "direct" or "agent"; anything else (or a
// provider failure) falls back to the task-type hint, then to a keyword scan
// of the question.
RouteDecision route(const std::string& question, const KnowledgeGraph& graph,
                    ChatProvider& provider, const std::string& router_template,
                    std::optional<TaskType> hint = std::nullopt,
                    const std::string& model_id = {});

// The deterministic half of route(), exposed for tests and for provider-down
// operation.
RouteDecision route_fallback(const std::string& question, std::optional<TaskType> hint);

// Top-k semantic seeds, 1-hop expansion of the best expand_seeds of them.
// No completion call happens in here.
EvidenceBundle direct_retrieve(const std::string& question, const KnowledgeGraph& graph,
                               Embedder& embedder, const AgentConfig& config);

// Bounded ReAct loop over the five graph tools plus terminal
// synthesize_answer. Unknown tools and bad arguments consume a step and feed
// an error result back to the model. Step cap exhaustion falls back to every
// entity id seen so far, in first-seen order.
EvidenceBundle agent_retrieve(const std::string& question, const KnowledgeGraph& graph,
                              Embedder& embedder, ChatProvider& provider,
                              const AgentConfig& config, const std::string& system_template);

// Tool declarations handed to the model inside agent_retrieve.
std::vector<ToolDecl> agent_tool_decls();

// Executes one agent tool against the graph; entity lists in results are
// capped at 20 rows to bound context growth. Throws pg::Error on bad input.
nlohmann::json execute_agent_tool(const KnowledgeGraph& graph, Embedder& embedder,
                                  const std::string& name, const nlohmann::json& arguments);

// Fills relation_ids/chunk_ids for an entity id list (helper shared by both
// retrieval paths and by tests).
void finalize_bundle(const KnowledgeGraph& graph, EvidenceBundle& bundle);

} // namespace pg

#include "policygraph/synthesis.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "policygraph/error.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

std::vector<ICLExample> load_icl_pool(const json& j) {
    if (!j.is_object() || !j.contains("examples") || !j["examples"].is_array())
        fail(ErrorCode::parse, "ICL pool must be an object with an \"examples\" array");
    std::vector<ICLExample> pool;
    std::set<TaskType> covered;
    for (const auto& item : j["examples"]) {
        ICLExample ex;
        ex.id = item.value("id", std::string{});
        if (ex.id.empty()) fail(ErrorCode::parse, "ICL example without an id");
        if (!item.contains("task_type") || !item["task_type"].is_string())
            fail(ErrorCode::parse, "ICL example '" + ex.id + "' has no task_type");
        ex.task_type = task_type_from_string(item["task_type"].get<std::string>());
        ex.question = item.value("question", std::string{});
        ex.answer = item.value("answer", std::string{});
        if (ex.question.empty() || ex.answer.empty())
            fail(ErrorCode::parse, "ICL example '" + ex.id + "' needs question and answer");
        covered.insert(ex.task_type);
        pool.push_back(std::move(ex));
    }
    if (covered.size() != 6)
        fail(ErrorCode::validation, "ICL pool must cover all six task types (covers " +
                                        std::to_string(covered.size()) + ")");
    return pool;
}

std::string serialize_evidence(const KnowledgeGraph& graph, const EvidenceBundle& bundle) {
    std::ostringstream out;
    out << "RELATIONS\n";
    // type -> lines, each carrying a (source name, target name, id) sort key.
    struct Line {
        std::string source_name, target_name, relation_id;
    };
    std::map<std::string, std::vector<Line>> by_type;
    for (const auto& rid : bundle.relation_ids) {
        const Relation& rel = graph.relation(rid);
        by_type[rel.relation_type].push_back({graph.entity(rel.source_entity_id).name,
                                              graph.entity(rel.target_entity_id).name, rid});
    }
    for (auto& [type, lines] : by_type) {
        out << "[" << type << "]\n";
        std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
            if (a.source_name != b.source_name) return a.source_name < b.source_name;
            if (a.target_name != b.target_name) return a.target_name < b.target_name;
            return a.relation_id < b.relation_id;
        });
        for (const auto& line : lines)
            out << one_line(line.source_name) << " -> " << one_line(line.target_name) << "\n";
    }
    out << "ENTITIES\n";
    auto field = [&out](const char* label, const std::string& value) {
        std::string flat = one_line(value);
        out << "  " << label << ":";
        if (!flat.empty()) out << " " << flat;
        out << "\n";
    };
    for (const auto& eid : bundle.entity_ids) {
        const Entity& e = graph.entity(eid);
        out << "[" << e.id << "] " << one_line(e.name) << "\n";
        field("type", e.entity_type);
        field("article", e.article_ref);
        field("description", e.description);
        field("quote", e.policy_quote);
    }
    return out.str();
}

std::vector<ICLExample> select_icl(const std::string& question,
                                   const std::vector<ICLExample>& pool, Embedder& embedder,
                                   std::size_t n) {
    if (pool.empty()) fail(ErrorCode::invalid_argument, "ICL pool is empty");
    auto q = embedder.embed_one(question);
    std::vector<std::pair<double, std::size_t>> scored; // (score, pool index)
    std::vector<std::string> texts;
    std::vector<std::size_t> to_embed;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!pool[i].embedding) {
            to_embed.push_back(i);
            texts.push_back(pool[i].question);
        }
    }
    std::map<std::size_t, std::vector<double>> fresh;
    if (!texts.empty()) {
        auto vecs = embedder.embed(texts);
        for (std::size_t i = 0; i < to_embed.size(); ++i) fresh[to_embed[i]] = std::move(vecs[i]);
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& vec = pool[i].embedding ? *pool[i].embedding : fresh.at(i);
        scored.emplace_back(cosine(q, vec), i);
    }
    // stable sort keeps pool order among equal scores
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<ICLExample> out;
    for (std::size_t i = 0; i < std::min(n, scored.size()); ++i)
        out.push_back(pool[scored[i].second]);
    return out;
}

std::string render_synthesis_prompt(const SynthesisInput& input,
                                    const std::string& synthesize_template) {
    std::ostringstream icl;
    for (std::size_t i = 0; i < input.icl_examples.size(); ++i) {
        if (i) icl << "\n";
        icl << "Q: " << input.icl_examples[i].question << "\n";
        icl << "A: " << input.icl_examples[i].answer << "\n";
    }
    std::string evidence_section;
    if (!input.serialized_evidence.empty())
        evidence_section = "EVIDENCE\n" + input.serialized_evidence;
    std::ostringstream chunks;
    for (const auto& [chunk_id, text] : input.chunk_texts) {
        chunks << "SOURCE TEXT [" << chunk_id << "]\n" << text;
        if (text.empty() || text.back() != '\n') chunks << "\n";
    }
    std::string prompt = synthesize_template;
    prompt = replace_all(std::move(prompt), "{{icl_examples}}", icl.str());
    prompt = replace_all(std::move(prompt), "{{evidence_section}}", evidence_section);
    prompt = replace_all(std::move(prompt), "{{chunks_section}}", chunks.str());
    prompt = replace_all(std::move(prompt), "{{task_instructions}}", input.task_instructions);
    prompt = replace_all(std::move(prompt), "{{question}}", input.question);
    return prompt;
}

std::string synthesize(const SynthesisInput& input, ChatProvider& provider,
                       const std::string& synthesize_template, const std::string& model_id) {
    ChatRequest request;
    request.messages.push_back({"user", render_synthesis_prompt(input, synthesize_template)});
    request.model_id = model_id;
    ChatResponse response = provider.complete(request);
    if (!response.text)
        fail(ErrorCode::protocol, "synthesis expected a text response, got a tool call");
    return *response.text;
}

Condition condition_from_string(const std::string& s) {
    std::string v = to_lower(trim(s));
    if (v == "nc") return Condition::NC;
    if (v == "kg") return Condition::KG;
    fail(ErrorCode::parse, "unknown condition '" + s + "' (expected nc or kg)");
}

std::string task_instructions_for(const std::map<std::string, std::string>& table,
                                  std::optional<TaskType> hint) {
    if (hint) {
        auto it = table.find(task_type_to_string(*hint));
        if (it != table.end()) return it->second;
    }
    auto it = table.find("default");
    return it == table.end() ? std::string{} : it->second;
}

AnswerResult run_condition(const std::string& question, Condition condition, const AskEnv& env,
                           const AskOptions& options) {
    if (!env.provider) fail(ErrorCode::invalid_argument, "run_condition: no chat provider");
    if (!env.templates) fail(ErrorCode::invalid_argument, "run_condition: no templates");
    if (!env.icl_pool || env.icl_pool->empty())
        fail(ErrorCode::invalid_argument, "run_condition: no ICL pool");
    if (!env.embedder) fail(ErrorCode::invalid_argument, "run_condition: no embedder");

    static const std::map<std::string, std::string> kNoInstructions;
    const auto& instructions_table =
        env.task_instructions ? *env.task_instructions : kNoInstructions;

    SynthesisInput input;
    input.question = question;
    input.icl_examples = select_icl(question, *env.icl_pool, *env.embedder, 2);
    input.task_instructions = task_instructions_for(instructions_table, options.hint);

    AnswerResult result;
    if (condition == Condition::KG) {
        if (!env.graph) fail(ErrorCode::invalid_argument, "KG condition requires a graph");
        if (options.force_path) {
            result.route = RouteDecision{*options.force_path, "forced by caller",
                                         RouteOrigin::Fallback};
        } else {
            result.route = route(question, *env.graph, *env.provider,
                                 env.templates->router_prompt, options.hint, env.model_id);
        }
        AgentConfig agent = env.agent;
        agent.model_id = env.model_id;
        if (result.route->path == RetrievalPath::Direct) {
            result.bundle = direct_retrieve(question, *env.graph, *env.embedder, agent);
        } else {
            result.bundle = agent_retrieve(question, *env.graph, *env.embedder, *env.provider,
                                           agent, env.templates->agent_system_prompt);
        }
        input.serialized_evidence = serialize_evidence(*env.graph, *result.bundle);
        if (env.chunks) {
            for (const auto& chunk_id : result.bundle->chunk_ids)
                if (env.chunks->has(chunk_id))
                    input.chunk_texts.emplace_back(chunk_id, env.chunks->get(chunk_id).text);
        }
    }
    result.answer =
        synthesize(input, *env.provider, env.templates->synthesize_prompt, env.model_id);
    return result;
}

} // namespace pg

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "policygraph/llm.hpp"
#include "policygraph/retrieval.hpp"

namespace pg {

struct ExpectedMapping {
    std::string name;
    std::vector<std::string> key_terms; // at least one
};

struct EvalQuestion {
    std::string id;
    TaskType task_type = TaskType::T1;
    std::string question;
    // Exactly the expectation fields for the task type are present:
    // T1/T3: expected_answer; T2: expected_items; T4: either or both;
    // T5: expected_label; T6: expected_mappings.
    std::optional<std::string> expected_answer;
    std::optional<std::vector<std::string>> expected_items;
    std::optional<std::string> expected_label; // yes | no | partial
    std::optional<std::vector<ExpectedMapping>> expected_mappings;
    std::string policy_excerpt; // authoritative verbatim text (judge input)
    std::vector<std::string> source_refs;
};

EvalQuestion eval_question_from_json(const nlohmann::json& j);

// JSON-Lines, one question per line; blank lines skipped.
std::vector<EvalQuestion> load_questions_jsonl(const std::string& text);

// |unique(expected) ∩ unique(generated)| / |unique(expected)| over lowercase
// alphanumeric-run tokens. Errors when expected tokenizes to empty.
double score_word_overlap(const std::string& expected, const std::string& generated);

// An expected item matches iff its case-folded text is a substring of the
// case-folded response, or >=2 of its distinctive words (tokens longer than 4
// chars) appear as whole tokens; items with exactly one distinctive word need
// that word, items with none match only by substring. Recall over expected
// items; precision over response segments (split on newlines, semicolons, and
// numbered markers; precision = recall when <=1 segment); harmonic mean.
double score_set_match(const std::vector<std::string>& expected_items,
                       const std::string& generated);

// Verdict detection: strip leading punctuation and the prefixes
// "answer:"/"verdict:"/"compliance:", read the first word; otherwise scan
// signal phrases, partial before no before yes. 1.0 iff detected == expected.
double score_binary(const std::string& expected_label, const std::string& generated);

// Exposed for tests: detected verdict ("yes"/"no"/"partial") or nullopt.
std::optional<std::string> detect_verdict(const std::string& generated);

// A mapping is satisfied when >=2 of its key terms occur case-insensitively
// in the response (a single-term mapping needs that term). Satisfied fraction.
double score_mapping(const std::vector<ExpectedMapping>& expected_mappings,
                     const std::string& generated);

// T1/T3 -> word overlap; T2 -> set match; T4 -> mean of both when both
// expectations are present, else the one present; T5 -> binary; T6 -> mapping.
double dispatch_score(const EvalQuestion& question, const std::string& generated);

struct JudgeScores {
    int accuracy = 0;
    int completeness = 0;
    int relevance = 0;
    double composite = 0.0; // arithmetic mean of the three
};

// The reference answer shown to the judge, rendered from the expectation
// fields (items joined with "; ", mappings as "name (key terms: ...)").
std::string reference_answer_for(const EvalQuestion& question);

struct JudgeOptions {
    ChatProvider* provider = nullptr; // null -> judging skipped
    std::string judge_template;       // {{question}}, {{policy_excerpt}},
                                      // {{reference_answer}}, {{response}}
    std::string model_id;
};

// One completion at temperature 0.1; parses "accuracy: N / completeness: N /
// relevance: N" (integers 1-5, labels located anywhere in the reply). One
// reprompt on unparseable or out-of-range output, then nullopt (judge failed;
// the heuristic score stands).
std::optional<JudgeScores> judge(const EvalQuestion& question, const std::string& response,
                                 const JudgeOptions& options);

struct ScoreRecord {
    std::string question_id;
    std::string condition; // as passed to run_eval, e.g. "NC" | "AIRO" | "OPEN"
    std::size_t run_index = 0;
    double heuristic = 0.0; // in [0,1]
    std::optional<JudgeScores> judge;
    std::string answer;
    std::optional<std::string> failure; // pipeline or judge failure note
};

struct AggregateCell {
    double mean = 0.0;
    double stddev = 0.0; // sample (n-1); 0 when n < 2
    std::size_t n = 0;
};

struct EvalReport {
    std::vector<ScoreRecord> records;
    // condition -> column ("T1".."T6", "overall") -> heuristic aggregate.
    std::map<std::string, std::map<std::string, AggregateCell>> table;
    // Same shape over judge composites; present only for judged records.
    std::map<std::string, std::map<std::string, AggregateCell>> judge_table;
    std::string rendered; // text table, conditions x (T1..T6, overall)
};

// Answer producer for one (question, condition, run) cell.
using AnswerFn =
    std::function<std::string(const EvalQuestion&, const std::string& condition, std::size_t run)>;

// Sweeps run -> condition -> question (normative order: replay scripts rely
// on it). A throwing pipeline call is recorded as heuristic 0.0 with the
// failure note; the sweep never aborts.
EvalReport run_eval(const std::vector<EvalQuestion>& questions,
                    const std::vector<std::string>& conditions, std::size_t runs,
                    const AnswerFn& pipeline, const JudgeOptions& judge_options = {});

nlohmann::json score_record_to_json(const ScoreRecord& r);
nlohmann::json eval_report_to_json(const EvalReport& report);

std::string render_score_table(const EvalReport& report);

} // namespace pg

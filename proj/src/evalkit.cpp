#include "policygraph/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "policygraph/error.hpp"
#include "policygraph/text_util.hpp"

namespace pg {

using nlohmann::json;

namespace {

const std::set<std::string>& label_set() {
    static const std::set<std::string> kLabels{"yes", "no", "partial"};
    return kLabels;
}

std::vector<std::string> expectation_fields_present(const json& j) {
    std::vector<std::string> present;
    for (const char* f :
         {"expected_answer", "expected_items", "expected_label", "expected_mappings"})
        if (j.contains(f)) present.push_back(f);
    return present;
}

} // namespace

EvalQuestion eval_question_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::parse, "eval question must be a JSON object");
    EvalQuestion q;
    q.id = j.value("id", std::string{});
    if (q.id.empty()) fail(ErrorCode::parse, "eval question without an id");
    if (!j.contains("task_type") || !j["task_type"].is_string())
        fail(ErrorCode::parse, "question '" + q.id + "' has no task_type");
    q.task_type = task_type_from_string(j["task_type"].get<std::string>());
    q.question = j.value("question", std::string{});
    if (q.question.empty()) fail(ErrorCode::parse, "question '" + q.id + "' has no question text");

    auto present = expectation_fields_present(j);
    auto require_exactly = [&](std::vector<std::string> wanted) {
        if (present != wanted) {
            std::string msg = "question '" + q.id + "' (" + task_type_to_string(q.task_type) +
                              ") must carry exactly {";
            for (std::size_t i = 0; i < wanted.size(); ++i)
                msg += (i ? ", " : "") + wanted[i];
            msg += "}, found {";
            for (std::size_t i = 0; i < present.size(); ++i)
                msg += (i ? ", " : "") + present[i];
            msg += "}";
            fail(ErrorCode::validation, msg);
        }
    };
    switch (q.task_type) {
    case TaskType::T1:
    case TaskType::T3:
        require_exactly({"expected_answer"});
        break;
    case TaskType::T2:
        require_exactly({"expected_items"});
        break;
    case TaskType::T4: {
        bool ok = !present.empty();
        for (const auto& f : present)
            if (f != "expected_answer" && f != "expected_items") ok = false;
        if (!ok)
            fail(ErrorCode::validation, "question '" + q.id +
                                            "' (T4) needs expected_answer and/or expected_items "
                                            "and no other expectation fields");
        break;
    }
    case TaskType::T5:
        require_exactly({"expected_label"});
        break;
    case TaskType::T6:
        require_exactly({"expected_mappings"});
        break;
    }

    if (j.contains("expected_answer")) {
        if (!j["expected_answer"].is_string() || j["expected_answer"].get<std::string>().empty())
            fail(ErrorCode::parse, "question '" + q.id + "': expected_answer must be a non-empty string");
        q.expected_answer = j["expected_answer"].get<std::string>();
    }
    if (j.contains("expected_items")) {
        if (!j["expected_items"].is_array() || j["expected_items"].empty())
            fail(ErrorCode::parse, "question '" + q.id + "': expected_items must be a non-empty array");
        std::vector<std::string> items;
        for (const auto& item : j["expected_items"]) {
            if (!item.is_string() || item.get<std::string>().empty())
                fail(ErrorCode::parse, "question '" + q.id + "': expected_items entries must be non-empty strings");
            items.push_back(item.get<std::string>());
        }
        q.expected_items = std::move(items);
    }
    if (j.contains("expected_label")) {
        if (!j["expected_label"].is_string())
            fail(ErrorCode::parse, "question '" + q.id + "': expected_label must be a string");
        std::string label = to_lower(trim(j["expected_label"].get<std::string>()));
        if (!label_set().count(label))
            fail(ErrorCode::validation,
                 "question '" + q.id + "': expected_label must be yes, no, or partial");
        q.expected_label = label;
    }
    if (j.contains("expected_mappings")) {
        if (!j["expected_mappings"].is_array() || j["expected_mappings"].empty())
            fail(ErrorCode::parse, "question '" + q.id + "': expected_mappings must be a non-empty array");
        std::vector<ExpectedMapping> mappings;
        for (const auto& m : j["expected_mappings"]) {
            ExpectedMapping em;
            em.name = m.value("name", std::string{});
            if (em.name.empty())
                fail(ErrorCode::parse, "question '" + q.id + "': mapping without a name");
            if (!m.contains("key_terms") || !m["key_terms"].is_array() || m["key_terms"].empty())
                fail(ErrorCode::validation,
                     "question '" + q.id + "': mapping '" + em.name + "' needs at least one key term");
            for (const auto& t : m["key_terms"]) {
                if (!t.is_string() || t.get<std::string>().empty())
                    fail(ErrorCode::parse,
                         "question '" + q.id + "': key terms must be non-empty strings");
                em.key_terms.push_back(t.get<std::string>());
            }
            mappings.push_back(std::move(em));
        }
        q.expected_mappings = std::move(mappings);
    }

    q.policy_excerpt = j.value("policy_excerpt", std::string{});
    if (j.contains("source_refs")) {
        if (!j["source_refs"].is_array())
            fail(ErrorCode::parse, "question '" + q.id + "': source_refs must be an array");
        for (const auto& r : j["source_refs"]) q.source_refs.push_back(r.get<std::string>());
    }
    return q;
}

std::vector<EvalQuestion> load_questions_jsonl(const std::string& text) {
    std::vector<EvalQuestion> questions;
    std::set<std::string> ids;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(ErrorCode::parse,
                 "questions line " + std::to_string(line_no) + ": " + std::string(e.what()));
        }
        EvalQuestion q = eval_question_from_json(j);
        if (!ids.insert(q.id).second)
            fail(ErrorCode::validation, "duplicate question id '" + q.id + "'");
        questions.push_back(std::move(q));
    }
    return questions;
}

double score_word_overlap(const std::string& expected, const std::string& generated) {
    auto expected_tokens = tokenize(expected);
    std::set<std::string> expected_set(expected_tokens.begin(), expected_tokens.end());
    if (expected_set.empty())
        fail(ErrorCode::invalid_argument, "expected answer tokenizes to nothing");
    auto generated_tokens = tokenize(generated);
    std::set<std::string> generated_set(generated_tokens.begin(), generated_tokens.end());
    std::size_t hit = 0;
    for (const auto& t : expected_set)
        if (generated_set.count(t)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(expected_set.size());
}

namespace {

// The per-item match rule shared by the recall and precision sides.
bool item_matches(const std::string& item, const std::string& folded_text,
                  const std::set<std::string>& text_tokens) {
    std::string folded_item = to_lower(collapse_whitespace(item));
    if (folded_item.empty()) return false;
    if (folded_text.find(folded_item) != std::string::npos) return true;
    std::set<std::string> distinctive;
    for (const auto& t : tokenize(item))
        if (t.size() > 4) distinctive.insert(t);
    if (distinctive.empty()) return false; // substring was the only avenue
    std::size_t hits = 0;
    for (const auto& w : distinctive)
        if (text_tokens.count(w)) ++hits;
    return distinctive.size() == 1 ? hits == 1 : hits >= 2;
}

// Response segments: newline/semicolon separated, numbered markers split
// inline, bullet/number prefixes stripped.
std::vector<std::string> segment_response(const std::string& text) {
    std::vector<std::string> pieces;
    std::string current;
    for (char c : text) {
        if (c == '\n' || c == ';') {
            pieces.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    pieces.push_back(current);

    auto is_marker_at = [](const std::string& s, std::size_t i, std::size_t& marker_len) {
        std::size_t j = i;
        if (j < s.size() && (s[j] == '-' || s[j] == '*')) {
            ++j;
        } else {
            std::size_t digits = 0;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                ++j;
                ++digits;
            }
            if (digits == 0 || j >= s.size() || (s[j] != '.' && s[j] != ')')) return false;
            ++j;
        }
        if (j >= s.size() || (s[j] != ' ' && s[j] != '\t')) return false;
        marker_len = j - i + 1;
        return true;
    };

    std::vector<std::string> segments;
    for (const auto& piece : pieces) {
        std::vector<std::string> parts;
        std::string part;
        std::size_t i = 0;
        while (i < piece.size()) {
            std::size_t marker_len = 0;
            bool at_boundary = i == 0 || piece[i - 1] == ' ' || piece[i - 1] == '\t';
            // Only numbered markers split mid-piece; dashes/stars split too
            // aggressively in prose.
            bool numbered = std::isdigit(static_cast<unsigned char>(piece[i])) != 0;
            if (at_boundary && numbered && is_marker_at(piece, i, marker_len) && !part.empty() &&
                trim(part).size() > 0) {
                parts.push_back(part);
                part.clear();
                i += marker_len;
                continue;
            }
            if (i == 0 && is_marker_at(piece, i, marker_len)) {
                i += marker_len; // leading bullet/number marker
                continue;
            }
            part.push_back(piece[i]);
            ++i;
        }
        parts.push_back(part);
        for (auto& p : parts) {
            std::string t = trim(p);
            if (!t.empty()) segments.push_back(std::move(t));
        }
    }
    return segments;
}

} // namespace

double score_set_match(const std::vector<std::string>& expected_items,
                       const std::string& generated) {
    if (expected_items.empty())
        fail(ErrorCode::invalid_argument, "score_set_match needs at least one expected item");
    std::string folded = to_lower(collapse_whitespace(generated));
    auto tokens_vec = tokenize(generated);
    std::set<std::string> tokens(tokens_vec.begin(), tokens_vec.end());

    std::size_t matched = 0;
    for (const auto& item : expected_items)
        if (item_matches(item, folded, tokens)) ++matched;
    double recall = static_cast<double>(matched) / static_cast<double>(expected_items.size());

    auto segments = segment_response(generated);
    double precision = recall;
    if (segments.size() > 1) {
        std::size_t matching = 0;
        for (const auto& seg : segments) {
            std::string seg_folded = to_lower(collapse_whitespace(seg));
            auto seg_tokens_vec = tokenize(seg);
            std::set<std::string> seg_tokens(seg_tokens_vec.begin(), seg_tokens_vec.end());
            for (const auto& item : expected_items) {
                if (item_matches(item, seg_folded, seg_tokens)) {
                    ++matching;
                    break;
                }
            }
        }
        precision = static_cast<double>(matching) / static_cast<double>(segments.size());
    }
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

std::optional<std::string> detect_verdict(const std::string& generated) {
    std::string folded = to_lower(generated);

    // First-word path: skip non-letters and the known prefixes, then read one
    // letter run.
    std::size_t pos = 0;
    bool advanced = true;
    while (advanced) {
        advanced = false;
        while (pos < folded.size() && !std::isalpha(static_cast<unsigned char>(folded[pos])))
            ++pos;
        for (const char* prefix : {"answer", "verdict", "compliance"}) {
            std::size_t n = std::string_view(prefix).size();
            if (folded.compare(pos, n, prefix) != 0) continue;
            std::size_t after = pos + n;
            while (after < folded.size() &&
                   std::isspace(static_cast<unsigned char>(folded[after])))
                ++after;
            if (after < folded.size() && folded[after] == ':') {
                pos = after + 1;
                advanced = true;
                break;
            }
        }
    }
    std::string first_word;
    while (pos < folded.size() && std::isalpha(static_cast<unsigned char>(folded[pos])))
        first_word.push_back(folded[pos++]);
    if (first_word == "yes") return "yes";
    if (first_word == "no") return "no";
    if (first_word == "partial" || first_word == "partially") return "partial";

    // Signal phrases; partial and negative must win over positive ("not
    // compliant" must not read as yes via "compliant").
    for (const char* p : {"partially compliant", "partially complies"})
        if (folded.find(p) != std::string::npos) return "partial";
    for (const char* p : {"not compliant", "does not comply", "fails to comply", "violates"})
        if (folded.find(p) != std::string::npos) return "no";
    for (const char* p : {"is compliant", "complies with", "meets the requirement"})
        if (folded.find(p) != std::string::npos) return "yes";
    return std::nullopt;
}

double score_binary(const std::string& expected_label, const std::string& generated) {
    std::string expected = to_lower(trim(expected_label));
    if (!label_set().count(expected))
        fail(ErrorCode::invalid_argument, "expected label must be yes, no, or partial");
    auto detected = detect_verdict(generated);
    return detected && *detected == expected ? 1.0 : 0.0;
}

double score_mapping(const std::vector<ExpectedMapping>& expected_mappings,
                     const std::string& generated) {
    if (expected_mappings.empty())
        fail(ErrorCode::invalid_argument, "score_mapping needs at least one mapping");
    std::string folded = to_lower(generated);
    std::size_t satisfied = 0;
    for (const auto& mapping : expected_mappings) {
        if (mapping.key_terms.empty())
            fail(ErrorCode::invalid_argument,
                 "mapping '" + mapping.name + "' has no key terms");
        std::set<std::string> terms;
        for (const auto& t : mapping.key_terms) {
            std::string folded_term = to_lower(trim(t));
            if (!folded_term.empty()) terms.insert(folded_term);
        }
        if (terms.empty())
            fail(ErrorCode::invalid_argument,
                 "mapping '" + mapping.name + "' has no usable key terms");
        std::size_t present = 0;
        for (const auto& t : terms)
            if (folded.find(t) != std::string::npos) ++present;
        std::size_t need = terms.size() == 1 ? 1 : 2;
        if (present >= need) ++satisfied;
    }
    return static_cast<double>(satisfied) / static_cast<double>(expected_mappings.size());
}

double dispatch_score(const EvalQuestion& question, const std::string& generated) {
    switch (question.task_type) {
    case TaskType::T1:
    case TaskType::T3:
        if (!question.expected_answer)
            fail(ErrorCode::invalid_argument,
                 "question '" + question.id + "' lacks expected_answer");
        return score_word_overlap(*question.expected_answer, generated);
    case TaskType::T2:
        if (!question.expected_items)
            fail(ErrorCode::invalid_argument,
                 "question '" + question.id + "' lacks expected_items");
        return score_set_match(*question.expected_items, generated);
    case TaskType::T4: {
        std::vector<double> scores;
        if (question.expected_answer)
            scores.push_back(score_word_overlap(*question.expected_answer, generated));
        if (question.expected_items)
            scores.push_back(score_set_match(*question.expected_items, generated));
        if (scores.empty())
            fail(ErrorCode::invalid_argument,
                 "question '" + question.id + "' lacks both T4 expectations");
        double sum = 0.0;
        for (double s : scores) sum += s;
        return sum / static_cast<double>(scores.size());
    }
    case TaskType::T5:
        if (!question.expected_label)
            fail(ErrorCode::invalid_argument,
                 "question '" + question.id + "' lacks expected_label");
        return score_binary(*question.expected_label, generated);
    case TaskType::T6:
        if (!question.expected_mappings)
            fail(ErrorCode::invalid_argument,
                 "question '" + question.id + "' lacks expected_mappings");
        return score_mapping(*question.expected_mappings, generated);
    }
    fail(ErrorCode::invalid_argument, "unknown task type");
}

std::string reference_answer_for(const EvalQuestion& question) {
    std::vector<std::string> parts;
    if (question.expected_answer) parts.push_back(*question.expected_answer);
    if (question.expected_items) {
        std::string line = "Expected items: ";
        for (std::size_t i = 0; i < question.expected_items->size(); ++i)
            line += (i ? "; " : "") + (*question.expected_items)[i];
        parts.push_back(std::move(line));
    }
    if (question.expected_label) parts.push_back("Expected verdict: " + *question.expected_label);
    if (question.expected_mappings) {
        std::string block = "Expected mappings:";
        for (const auto& m : *question.expected_mappings) {
            block += "\n- " + m.name + " (key terms: ";
            for (std::size_t i = 0; i < m.key_terms.size(); ++i)
                block += (i ? ", " : "") + m.key_terms[i];
            block += ")";
        }
        parts.push_back(std::move(block));
    }
    if (parts.empty())
        fail(ErrorCode::invalid_argument,
             "question '" + question.id + "' carries no expectation fields");
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "\n" : "") + parts[i];
    return out;
}

namespace {

std::optional<JudgeScores> parse_judge_scores(const std::string& text) {
    std::string folded = to_lower(text);
    auto find_value = [&folded](const char* label) -> std::optional<int> {
        std::string_view want(label);
        std::size_t from = 0;
        while (true) {
            std::size_t pos = folded.find(label, from);
            if (pos == std::string::npos) return std::nullopt;
            std::size_t i = pos + want.size();
            while (i < folded.size() && (folded[i] == ' ' || folded[i] == '\t')) ++i;
            if (i < folded.size() && folded[i] == ':') {
                ++i;
                while (i < folded.size() && (folded[i] == ' ' || folded[i] == '\t')) ++i;
                std::size_t digits = 0;
                int value = 0;
                while (i < folded.size() && std::isdigit(static_cast<unsigned char>(folded[i])) &&
                       digits < 3) {
                    value = value * 10 + (folded[i] - '0');
                    ++i;
                    ++digits;
                }
                if (digits > 0) return value;
            }
            from = pos + 1;
        }
    };
    auto a = find_value("accuracy");
    auto c = find_value("completeness");
    auto r = find_value("relevance");
    if (!a || !c || !r) return std::nullopt;
    for (int v : {*a, *c, *r})
        if (v < 1 || v > 5) return std::nullopt;
    JudgeScores scores;
    scores.accuracy = *a;
    scores.completeness = *c;
    scores.relevance = *r;
    scores.composite = (*a + *c + *r) / 3.0;
    return scores;
}

} // namespace

std::optional<JudgeScores> judge(const EvalQuestion& question, const std::string& response,
                                 const JudgeOptions& options) {
    if (!options.provider) fail(ErrorCode::invalid_argument, "judge requires a chat provider");
    if (options.judge_template.empty())
        fail(ErrorCode::invalid_argument, "judge requires a prompt template");
    if (question.policy_excerpt.empty())
        fail(ErrorCode::validation,
             "question '" + question.id + "' has no policy excerpt for the judge");

    std::string prompt = options.judge_template;
    prompt = replace_all(std::move(prompt), "{{question}}", question.question);
    prompt = replace_all(std::move(prompt), "{{policy_excerpt}}", question.policy_excerpt);
    prompt = replace_all(std::move(prompt), "{{reference_answer}}", reference_answer_for(question));
    prompt = replace_all(std::move(prompt), "{{response}}", response);

    ChatRequest request;
    request.model_id = options.model_id;
    request.temperature = 0.1;
    request.messages.push_back({"user", prompt});

    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse reply = options.provider->complete(request);
        std::string text = reply.text ? *reply.text : std::string{};
        if (auto scores = parse_judge_scores(text)) return scores;
        request.messages.push_back({"assistant", text});
        request.messages.push_back(
            {"user", "Your reply could not be parsed. Respond with exactly three lines in the "
                     "format: accuracy: N / completeness: N / relevance: N, where each N is an "
                     "integer from 1 to 5."});
    }
    return std::nullopt;
}

namespace {

AggregateCell aggregate(const std::vector<double>& values) {
    AggregateCell cell;
    cell.n = values.size();
    if (values.empty()) return cell;
    double sum = 0.0;
    for (double v : values) sum += v;
    cell.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - cell.mean) * (v - cell.mean);
        cell.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return cell;
}

std::string format_cell(const AggregateCell& cell) {
    if (cell.n == 0) return "-";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f \xC2\xB1 %.2f", cell.mean, cell.stddev);
    return buf;
}

void render_table_block(std::ostringstream& out, const std::string& title,
                        const std::vector<std::string>& conditions,
                        const std::map<std::string, std::map<std::string, AggregateCell>>& table) {
    static const std::vector<std::string> kColumns{"T1", "T2", "T3", "T4", "T5", "T6", "overall"};
    std::size_t row_width = std::string("condition").size();
    for (const auto& c : conditions) row_width = std::max(row_width, c.size());
    const std::size_t cell_width = 12; // fits "0.00 ± 0.00"

    auto pad = [](const std::string& s, std::size_t width, std::size_t display_size) {
        std::string padded;
        for (std::size_t i = display_size; i < width; ++i) padded += ' ';
        return padded + s;
    };

    out << title << "\n";
    out << std::string(row_width, ' ') << " ";
    for (const auto& col : kColumns) out << " " << pad(col, cell_width, col.size());
    out << "\n";
    for (const auto& cond : conditions) {
        out << cond << std::string(row_width - cond.size(), ' ') << " ";
        auto row_it = table.find(cond);
        for (const auto& col : kColumns) {
            AggregateCell cell;
            if (row_it != table.end()) {
                auto cell_it = row_it->second.find(col);
                if (cell_it != row_it->second.end()) cell = cell_it->second;
            }
            std::string text = format_cell(cell);
            // The ± sign is two bytes; pad by display length.
            std::size_t display = text.size() - (cell.n == 0 ? 0 : 1);
            out << " " << pad(text, cell_width, display);
        }
        out << "\n";
    }
}

} // namespace

std::string render_score_table(const EvalReport& report) {
    std::ostringstream out;
    std::vector<std::string> conditions;
    for (const auto& [cond, row] : report.table) conditions.push_back(cond);
    render_table_block(out, "heuristic score (0-1), mean \xC2\xB1 std", conditions, report.table);
    if (!report.judge_table.empty()) {
        out << "\n";
        std::vector<std::string> judged;
        for (const auto& [cond, row] : report.judge_table) judged.push_back(cond);
        render_table_block(out, "judge composite (1-5), mean \xC2\xB1 std", judged,
                           report.judge_table);
    }
    return out.str();
}

EvalReport run_eval(const std::vector<EvalQuestion>& questions,
                    const std::vector<std::string>& conditions, std::size_t runs,
                    const AnswerFn& pipeline, const JudgeOptions& judge_options) {
    if (questions.empty()) fail(ErrorCode::invalid_argument, "run_eval: no questions");
    if (conditions.empty()) fail(ErrorCode::invalid_argument, "run_eval: no conditions");
    if (runs == 0) fail(ErrorCode::invalid_argument, "run_eval: runs must be >= 1");
    if (!pipeline) fail(ErrorCode::invalid_argument, "run_eval: no pipeline");

    EvalReport report;
    // (condition, column) -> values, heuristic and judge composite.
    std::map<std::string, std::map<std::string, std::vector<double>>> heuristic_values;
    std::map<std::string, std::map<std::string, std::vector<double>>> judge_values;

    for (std::size_t run = 0; run < runs; ++run) {
        for (const auto& condition : conditions) {
            for (const auto& question : questions) {
                ScoreRecord record;
                record.question_id = question.id;
                record.condition = condition;
                record.run_index = run;
                try {
                    record.answer = pipeline(question, condition, run);
                    record.heuristic = dispatch_score(question, record.answer);
                } catch (const std::exception& e) {
                    record.heuristic = 0.0;
                    record.failure = std::string("pipeline: ") + e.what();
                }
                if (judge_options.provider && !record.failure) {
                    try {
                        record.judge = judge(question, record.answer, judge_options);
                        if (!record.judge)
                            record.failure = "judge: unparseable output after reprompt";
                    } catch (const std::exception& e) {
                        record.failure = std::string("judge: ") + e.what();
                    }
                }
                std::string column = task_type_to_string(question.task_type);
                heuristic_values[condition][column].push_back(record.heuristic);
                heuristic_values[condition]["overall"].push_back(record.heuristic);
                if (record.judge) {
                    judge_values[condition][column].push_back(record.judge->composite);
                    judge_values[condition]["overall"].push_back(record.judge->composite);
                }
                report.records.push_back(std::move(record));
            }
        }
    }

    for (const auto& [cond, columns] : heuristic_values)
        for (const auto& [col, values] : columns) report.table[cond][col] = aggregate(values);
    for (const auto& [cond, columns] : judge_values)
        for (const auto& [col, values] : columns)
            report.judge_table[cond][col] = aggregate(values);
    report.rendered = render_score_table(report);
    return report;
}

json score_record_to_json(const ScoreRecord& r) {
    json j{{"question_id", r.question_id},
           {"condition", r.condition},
           {"run_index", r.run_index},
           {"heuristic", r.heuristic},
           {"answer", r.answer}};
    if (r.judge)
        j["judge"] = json{{"accuracy", r.judge->accuracy},
                          {"completeness", r.judge->completeness},
                          {"relevance", r.judge->relevance},
                          {"composite", r.judge->composite}};
    if (r.failure) j["failure"] = *r.failure;
    return j;
}

namespace {

json table_to_json(const std::map<std::string, std::map<std::string, AggregateCell>>& table) {
    json out = json::object();
    for (const auto& [cond, columns] : table) {
        json row = json::object();
        for (const auto& [col, cell] : columns)
            row[col] = json{{"mean", cell.mean}, {"stddev", cell.stddev}, {"n", cell.n}};
        out[cond] = std::move(row);
    }
    return out;
}

} // namespace

json eval_report_to_json(const EvalReport& report) {
    json records = json::array();
    for (const auto& r : report.records) records.push_back(score_record_to_json(r));
    json j{{"records", std::move(records)}, {"table", table_to_json(report.table)},
           {"rendered", report.rendered}};
    if (!report.judge_table.empty()) j["judge_table"] = table_to_json(report.judge_table);
    return j;
}

} // namespace pg

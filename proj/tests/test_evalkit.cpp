#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <policygraph/error.hpp>
#include <policygraph/evalkit.hpp>
#include <policygraph/llm.hpp>

using namespace pg;
using nlohmann::json;

namespace {

EvalQuestion make_q(std::string id, TaskType t, std::string question = "q?") {
    EvalQuestion q;
    q.id = std::move(id);
    q.task_type = t;
    q.question = std::move(question);
    return q;
}

ReplayStep text_step(std::string text, std::optional<std::string> anchor = std::nullopt) {
    ReplayStep s;
    s.expect_substring = std::move(anchor);
    s.respond_text = std::move(text);
    return s;
}

} // namespace

TEST_CASE("score_word_overlap set semantics") {
    CHECK(score_word_overlap("training data bias risk", "a risk of bias in training") ==
          doctest::Approx(0.75)); // data missing: 3 of 4 unique tokens
    CHECK(score_word_overlap("annual bias audit", "the audit is annual and covers bias") ==
          doctest::Approx(1.0));
    CHECK(score_word_overlap("risk risk risk", "one risk") == doctest::Approx(1.0)); // unique
    CHECK(score_word_overlap("RISK", "the risk") == doctest::Approx(1.0));           // case fold
    CHECK(score_word_overlap("alpha beta", "") == doctest::Approx(0.0));
    CHECK(score_word_overlap("alpha beta", "gamma delta") == doctest::Approx(0.0));
    CHECK_THROWS_WITH_AS(score_word_overlap("!!!", "anything"),
                         "expected answer tokenizes to nothing", Error);
}

TEST_CASE("score_word_overlap random subset property") {
    const std::vector<std::string> vocab = {"alpha", "bravo",  "charlie", "delta",
                                            "echo",  "foxtrot", "golf",   "hotel",
                                            "india", "juliet",  "kilo",   "lima"};
    const std::vector<std::string> noise = {"zulu", "yankee", "xray", "whiskey"};
    std::mt19937 rng(4242);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<std::string> pool = vocab;
        std::shuffle(pool.begin(), pool.end(), rng);
        std::size_t n_expected = 1 + rng() % 6;
        std::string expected;
        for (std::size_t i = 0; i < n_expected; ++i) expected += pool[i] + " ";
        std::size_t n_hit = rng() % (n_expected + 1);
        std::string generated;
        for (std::size_t i = 0; i < n_hit; ++i) generated += pool[i] + " ";
        for (std::size_t i = 0; i < 3; ++i) generated += noise[rng() % noise.size()] + " ";
        double want = static_cast<double>(n_hit) / static_cast<double>(n_expected);
        CHECK(score_word_overlap(expected, generated) == doctest::Approx(want));
    }
}

TEST_CASE("score_set_match item matching avenues") {
    // Exact substring after case folding and whitespace collapse.
    CHECK(score_set_match({"Human   Oversight"}, "strict human oversight required") ==
          doctest::Approx(1.0));
    // >=2 distinctive words (longer than 4 chars) as whole tokens.
    CHECK(score_set_match({"annual discrimination audit"},
                          "an annual audit of discrimination") == doctest::Approx(1.0));
    // One distinctive hit is not enough when the item has several.
    CHECK(score_set_match({"annual discrimination audit"}, "the audit occurs annually") ==
          doctest::Approx(0.0));
    // Single-distinctive-word items need exactly that word.
    CHECK(score_set_match({"the audit"}, "audit scheduled") == doctest::Approx(1.0));
    CHECK(score_set_match({"the audit"}, "audits scheduled") == doctest::Approx(0.0));
    // No distinctive words: substring is the only avenue.
    CHECK(score_set_match({"the law"}, "the law applies") == doctest::Approx(1.0));
    CHECK(score_set_match({"the law"}, "law of the land") == doctest::Approx(0.0));

    CHECK_THROWS_WITH_AS(score_set_match({}, "x"),
                         "score_set_match needs at least one expected item", Error);
}

TEST_CASE("score_set_match F1 over segments") {
    // Numbered list: all items found, one extra segment.
    // recall 1.0, precision 2/3 -> F1 = 0.8.
    CHECK(score_set_match({"human oversight", "bias audit"},
                          "1. human oversight\n2. data minimization\n3. bias audit") ==
          doctest::Approx(0.8));

    // Two segments both matching the single found item: precision 1, recall 1/2.
    CHECK(score_set_match({"human oversight", "encryption"},
                          "human oversight; strong human oversight") ==
          doctest::Approx(2.0 / 3.0));

    // Single segment: precision defined as recall.
    CHECK(score_set_match({"human oversight", "encryption"}, "human oversight only") ==
          doctest::Approx(0.5));

    // Bullet markers are stripped, semicolons split.
    CHECK(score_set_match({"human oversight", "encryption"},
                          "- human oversight; - encryption") == doctest::Approx(1.0));

    // Nothing matches.
    CHECK(score_set_match({"encryption"}, "unrelated words entirely") == doctest::Approx(0.0));
    CHECK(score_set_match({"encryption"}, "") == doctest::Approx(0.0));
}

TEST_CASE("detect_verdict first-word and prefix paths") {
    CHECK(detect_verdict("Yes, the system complies.") == "yes");
    CHECK(detect_verdict("No.") == "no");
    CHECK(detect_verdict("Partial compliance at best") == "partial");
    CHECK(detect_verdict("Partially. See below.") == "partial");
    CHECK(detect_verdict("Answer: No") == "no");
    CHECK(detect_verdict("**Verdict:** Partially compliant") == "partial");
    CHECK(detect_verdict("Compliance: YES") == "yes");
    CHECK(detect_verdict("Answer: Verdict: yes") == "yes"); // chained prefixes
    CHECK(detect_verdict("  \"No\" is the verdict") == "no"); // leading punctuation skipped
}

TEST_CASE("detect_verdict signal phrases with precedence") {
    CHECK(detect_verdict("The deployment is partially compliant with Article 9.") == "partial");
    CHECK(detect_verdict("The system is not compliant.") == "no");
    CHECK(detect_verdict("It violates the retention rule.") == "no");
    CHECK(detect_verdict("The controller fails to comply here.") == "no");
    CHECK(detect_verdict("The system is compliant.") == "yes");
    CHECK(detect_verdict("It complies with the act.") == "yes");
    CHECK(detect_verdict("The design meets the requirement.") == "yes");
    // partial outranks no outranks yes when several phrases appear
    CHECK(detect_verdict("It is partially compliant though it violates one rule.") == "partial");
    CHECK(detect_verdict("Overall it complies with A but does not comply with B.") == "no");
    CHECK(detect_verdict("It depends on the deployment.") == std::nullopt);
    CHECK(detect_verdict("") == std::nullopt);
}

TEST_CASE("score_binary") {
    CHECK(score_binary("yes", "Yes, it does.") == doctest::Approx(1.0));
    CHECK(score_binary("YES ", "yes") == doctest::Approx(1.0)); // expected label folded
    CHECK(score_binary("no", "Yes, it does.") == doctest::Approx(0.0));
    CHECK(score_binary("partial", "The system is partially compliant.") == doctest::Approx(1.0));
    CHECK(score_binary("yes", "hard to say") == doctest::Approx(0.0)); // undetected
    CHECK_THROWS_WITH_AS(score_binary("maybe", "yes"),
                         "expected label must be yes, no, or partial", Error);
}

TEST_CASE("score_binary prefix padding property") {
    const char* labels[] = {"yes", "no", "partial"};
    const char* prefixes[] = {"", "Answer: ", "VERDICT: ", "compliance: ", "  -- ", "\"", "* "};
    std::mt19937 rng(99);
    for (int iter = 0; iter < 120; ++iter) {
        std::string label = labels[rng() % 3];
        std::string prefix = prefixes[rng() % 7];
        std::string text = prefix + label + ", because of Article 9.";
        CHECK(score_binary(label, text) == doctest::Approx(1.0));
    }
}

TEST_CASE("score_mapping key-term thresholds") {
    ExpectedMapping m1{"risk management", {"risk management system", "article 9"}};
    ExpectedMapping m2{"transparency", {"transparency"}};
    ExpectedMapping m3{"oversight", {"human oversight", "article 14", "monitoring"}};

    std::string full = "A risk management system per Article 9 provides transparency; "
                       "human oversight and continuous monitoring apply.";
    CHECK(score_mapping({m1, m2, m3}, full) == doctest::Approx(1.0));

    // m1 has two terms and needs both; only one present.
    CHECK(score_mapping({m1, m2}, "Article 9 requires transparency.") == doctest::Approx(0.5));
    // m3 needs any two of its three terms.
    CHECK(score_mapping({m3}, "human oversight plus monitoring") == doctest::Approx(1.0));
    CHECK(score_mapping({m3}, "human oversight alone") == doctest::Approx(0.0));
    // Duplicate terms collapse: a single distinct term needs one hit.
    ExpectedMapping dup{"audit", {"Audit", "audit "}};
    CHECK(score_mapping({dup}, "an audit happens") == doctest::Approx(1.0));

    CHECK_THROWS_WITH_AS(score_mapping({}, "x"), "score_mapping needs at least one mapping",
                         Error);
    ExpectedMapping blank{"blank", {"  "}};
    CHECK_THROWS_WITH_AS(score_mapping({blank}, "x"),
                         "mapping 'blank' has no usable key terms", Error);
}

TEST_CASE("dispatch_score routes by task type") {
    EvalQuestion t1 = make_q("q1", TaskType::T1);
    t1.expected_answer = "training data bias risk";
    CHECK(dispatch_score(t1, "a risk of bias in training") == doctest::Approx(0.75));

    EvalQuestion t3 = make_q("q3", TaskType::T3);
    t3.expected_answer = "alpha beta";
    CHECK(dispatch_score(t3, "alpha beta") == doctest::Approx(1.0));

    EvalQuestion t2 = make_q("q2", TaskType::T2);
    t2.expected_items = std::vector<std::string>{"human oversight", "encryption"};
    CHECK(dispatch_score(t2, "human oversight only") == doctest::Approx(0.5));

    EvalQuestion t5 = make_q("q5", TaskType::T5);
    t5.expected_label = "no";
    CHECK(dispatch_score(t5, "No.") == doctest::Approx(1.0));

    EvalQuestion t6 = make_q("q6", TaskType::T6);
    t6.expected_mappings =
        std::vector<ExpectedMapping>{{"transparency", {"transparency"}}};
    CHECK(dispatch_score(t6, "transparency is provided") == doctest::Approx(1.0));

    EvalQuestion t4 = make_q("q4", TaskType::T4);
    t4.expected_answer = "alpha beta";                                    // overlap 0.5
    t4.expected_items = std::vector<std::string>{"human oversight"};      // set match 1.0
    CHECK(dispatch_score(t4, "alpha human oversight") == doctest::Approx(0.75));
    t4.expected_items.reset();
    CHECK(dispatch_score(t4, "alpha human oversight") == doctest::Approx(0.5));
    t4.expected_answer.reset();
    CHECK_THROWS_WITH_AS(dispatch_score(t4, "x"), "question 'q4' lacks both T4 expectations",
                         Error);

    EvalQuestion hollow = make_q("q0", TaskType::T1);
    CHECK_THROWS_WITH_AS(dispatch_score(hollow, "x"), "question 'q0' lacks expected_answer",
                         Error);
}

TEST_CASE("reference_answer_for renders expectation fields") {
    EvalQuestion t1 = make_q("q1", TaskType::T1);
    t1.expected_answer = "The audit mitigates bias.";
    CHECK(reference_answer_for(t1) == "The audit mitigates bias.");

    EvalQuestion t2 = make_q("q2", TaskType::T2);
    t2.expected_items = std::vector<std::string>{"human oversight", "encryption"};
    CHECK(reference_answer_for(t2) == "Expected items: human oversight; encryption");

    EvalQuestion t5 = make_q("q5", TaskType::T5);
    t5.expected_label = "partial";
    CHECK(reference_answer_for(t5) == "Expected verdict: partial");

    EvalQuestion t6 = make_q("q6", TaskType::T6);
    t6.expected_mappings = std::vector<ExpectedMapping>{
        {"risk management", {"article 9", "risk management system"}},
        {"transparency", {"article 13"}}};
    CHECK(reference_answer_for(t6) ==
          "Expected mappings:\n- risk management (key terms: article 9, risk management "
          "system)\n- transparency (key terms: article 13)");

    EvalQuestion t4 = make_q("q4", TaskType::T4);
    t4.expected_answer = "ans";
    t4.expected_items = std::vector<std::string>{"a", "b"};
    CHECK(reference_answer_for(t4) == "ans\nExpected items: a; b");

    EvalQuestion hollow = make_q("q0", TaskType::T1);
    CHECK_THROWS_WITH_AS(reference_answer_for(hollow),
                         "question 'q0' carries no expectation fields", Error);
}

TEST_CASE("judge happy path substitutes all placeholders") {
    EvalQuestion q = make_q("q5", TaskType::T5, "Is it compliant?");
    q.expected_label = "yes";
    q.policy_excerpt = "Article 9 text.";

    ReplayChatProvider provider({text_step(
        "Accuracy: 4\nCompleteness: 3\nRelevance: 5",
        "J q=Is it compliant? ex=Article 9 text. ref=Expected verdict: yes resp=Yes it is.")});
    JudgeOptions options;
    options.provider = &provider;
    options.judge_template = "J q={{question}} ex={{policy_excerpt}} ref={{reference_answer}} "
                             "resp={{response}}";
    options.model_id = "judge-model";

    auto scores = judge(q, "Yes it is.", options);
    REQUIRE(scores.has_value());
    CHECK(scores->accuracy == 4);
    CHECK(scores->completeness == 3);
    CHECK(scores->relevance == 5);
    CHECK(scores->composite == doctest::Approx(4.0));
    REQUIRE(provider.requests().size() == 1);
    CHECK(provider.requests()[0].temperature == doctest::Approx(0.1));
    CHECK(provider.requests()[0].model_id == "judge-model");
}

TEST_CASE("judge parses labels anywhere and tolerates case and spacing") {
    EvalQuestion q = make_q("q1", TaskType::T1);
    q.expected_answer = "x";
    q.policy_excerpt = "excerpt";
    JudgeOptions options;
    options.judge_template = "{{response}}";

    ReplayChatProvider p1({text_step(
        "relevance: high, I rate ACCURACY : 4, completeness:3 and relevance:   5 overall.")});
    options.provider = &p1;
    auto scores = judge(q, "r", options);
    REQUIRE(scores.has_value());
    CHECK(scores->accuracy == 4);
    CHECK(scores->completeness == 3);
    CHECK(scores->relevance == 5);
}

TEST_CASE("judge reprompts once then gives up") {
    EvalQuestion q = make_q("q1", TaskType::T1);
    q.expected_answer = "x";
    q.policy_excerpt = "excerpt";
    JudgeOptions options;
    options.judge_template = "P {{response}}";

    const std::string reprompt_text =
        "Your reply could not be parsed. Respond with exactly three lines in the format: "
        "accuracy: N / completeness: N / relevance: N, where each N is an integer from 1 to 5.";

    ReplayChatProvider recovers({
        text_step("accuracy: six, completeness: 3, relevance: 5"),
        text_step("accuracy: 4 completeness: 4 relevance: 5", reprompt_text),
    });
    options.provider = &recovers;
    auto scores = judge(q, "r", options);
    REQUIRE(scores.has_value());
    CHECK(scores->composite == doctest::Approx(13.0 / 3.0));
    REQUIRE(recovers.requests().size() == 2);
    REQUIRE(recovers.requests()[1].messages.size() == 3);
    CHECK(recovers.requests()[1].messages[1].role == "assistant");
    CHECK(recovers.requests()[1].messages[2].content == reprompt_text);

    // Out-of-range values are a parse failure too.
    ReplayChatProvider fails({
        text_step("accuracy: 0, completeness: 3, relevance: 5"),
        text_step("accuracy: 444, completeness: 3, relevance: 5"),
    });
    options.provider = &fails;
    CHECK_FALSE(judge(q, "r", options).has_value());
    CHECK(fails.calls_made() == 2);
}

TEST_CASE("judge validates its inputs") {
    EvalQuestion q = make_q("q1", TaskType::T1);
    q.expected_answer = "x";
    JudgeOptions options;
    CHECK_THROWS_WITH_AS(judge(q, "r", options), "judge requires a chat provider", Error);

    ReplayChatProvider provider(std::vector<ReplayStep>{});
    options.provider = &provider;
    CHECK_THROWS_WITH_AS(judge(q, "r", options), "judge requires a prompt template", Error);

    options.judge_template = "t";
    CHECK_THROWS_WITH_AS(judge(q, "r", options),
                         "question 'q1' has no policy excerpt for the judge", Error);
}

TEST_CASE("eval_question_from_json enforces per-type expectation fields") {
    json t1{{"id", "q1"}, {"task_type", "T1"}, {"question", "what?"},
            {"expected_answer", "ans"}};
    EvalQuestion q = eval_question_from_json(t1);
    CHECK(q.id == "q1");
    CHECK(q.task_type == TaskType::T1);
    CHECK(q.expected_answer == "ans");
    CHECK(q.policy_excerpt.empty());

    json t2{{"id", "q2"}, {"task_type", "T2"}, {"question", "list?"},
            {"expected_items", json::array({"a", "b"})},
            {"policy_excerpt", "text"},
            {"source_refs", json::array({"aira", "msc"})}};
    q = eval_question_from_json(t2);
    CHECK(q.expected_items == std::vector<std::string>{"a", "b"});
    CHECK(q.policy_excerpt == "text");
    CHECK(q.source_refs == std::vector<std::string>{"aira", "msc"});

    json t5{{"id", "q5"}, {"task_type", "T5"}, {"question", "ok?"},
            {"expected_label", " YES "}};
    CHECK(eval_question_from_json(t5).expected_label == "yes"); // folded

    json t6{{"id", "q6"}, {"task_type", "T6"}, {"question", "map?"},
            {"expected_mappings",
             json::array({{{"name", "m1"}, {"key_terms", json::array({"k1", "k2"})}}})}};
    q = eval_question_from_json(t6);
    REQUIRE(q.expected_mappings.has_value());
    CHECK((*q.expected_mappings)[0].name == "m1");
    CHECK((*q.expected_mappings)[0].key_terms == std::vector<std::string>{"k1", "k2"});

    json t4{{"id", "q4"}, {"task_type", "T4"}, {"question", "both?"},
            {"expected_answer", "ans"}, {"expected_items", json::array({"a"})}};
    q = eval_question_from_json(t4);
    CHECK(q.expected_answer.has_value());
    CHECK(q.expected_items.has_value());
}

TEST_CASE("eval_question_from_json rejections") {
    CHECK_THROWS_AS(eval_question_from_json(json::array()), Error);
    CHECK_THROWS_WITH_AS(eval_question_from_json(json{{"task_type", "T1"}}),
                         "eval question without an id", Error);
    CHECK_THROWS_WITH_AS(
        eval_question_from_json(json{{"id", "q"}, {"question", "x"}}),
        "question 'q' has no task_type", Error);
    CHECK_THROWS_WITH_AS(
        eval_question_from_json(json{{"id", "q"}, {"task_type", "T1"}}),
        "question 'q' has no question text", Error);

    // Wrong expectation set for the type.
    json extra{{"id", "q"}, {"task_type", "T1"}, {"question", "x"},
               {"expected_answer", "a"}, {"expected_items", json::array({"i"})}};
    CHECK_THROWS_WITH_AS(eval_question_from_json(extra),
                         "question 'q' (T1) must carry exactly {expected_answer}, found "
                         "{expected_answer, expected_items}",
                         Error);
    json t4bad{{"id", "q"}, {"task_type", "T4"}, {"question", "x"},
               {"expected_label", "yes"}};
    CHECK_THROWS_WITH_AS(eval_question_from_json(t4bad),
                         "question 'q' (T4) needs expected_answer and/or expected_items and no "
                         "other expectation fields",
                         Error);
    json t4none{{"id", "q"}, {"task_type", "T4"}, {"question", "x"}};
    CHECK_THROWS_AS(eval_question_from_json(t4none), Error);

    json bad_label{{"id", "q"}, {"task_type", "T5"}, {"question", "x"},
                   {"expected_label", "maybe"}};
    try {
        eval_question_from_json(bad_label);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::validation);
        CHECK(std::string(e.what()) == "question 'q': expected_label must be yes, no, or partial");
    }

    json empty_items{{"id", "q"}, {"task_type", "T2"}, {"question", "x"},
                     {"expected_items", json::array()}};
    CHECK_THROWS_WITH_AS(eval_question_from_json(empty_items),
                         "question 'q': expected_items must be a non-empty array", Error);

    json nameless{{"id", "q"}, {"task_type", "T6"}, {"question", "x"},
                  {"expected_mappings",
                   json::array({{{"key_terms", json::array({"k"})}}})}};
    CHECK_THROWS_WITH_AS(eval_question_from_json(nameless), "question 'q': mapping without a name",
                         Error);
    json termless{{"id", "q"}, {"task_type", "T6"}, {"question", "x"},
                  {"expected_mappings", json::array({{{"name", "m"}}})}};
    CHECK_THROWS_WITH_AS(eval_question_from_json(termless),
                         "question 'q': mapping 'm' needs at least one key term", Error);
}

TEST_CASE("load_questions_jsonl") {
    std::string text =
        R"({"id":"q1","task_type":"T1","question":"a?","expected_answer":"x"})"
        "\n\n"
        R"({"id":"q2","task_type":"T5","question":"b?","expected_label":"no"})"
        "\n";
    auto questions = load_questions_jsonl(text);
    REQUIRE(questions.size() == 2); // blank line skipped
    CHECK(questions[0].id == "q1");
    CHECK(questions[1].expected_label == "no");

    CHECK(load_questions_jsonl("").empty());
    CHECK(load_questions_jsonl("\n \n").empty());

    try {
        load_questions_jsonl("\n{broken");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse);
        CHECK(std::string(e.what()).rfind("questions line 2: ", 0) == 0);
    }

    std::string dup =
        R"({"id":"q1","task_type":"T1","question":"a?","expected_answer":"x"})"
        "\n"
        R"({"id":"q1","task_type":"T1","question":"b?","expected_answer":"y"})";
    CHECK_THROWS_WITH_AS(load_questions_jsonl(dup), "duplicate question id 'q1'", Error);
}

namespace {

std::vector<EvalQuestion> sweep_questions() {
    EvalQuestion q1 = make_q("q1", TaskType::T1, "first?");
    q1.expected_answer = "alpha beta gamma";
    q1.policy_excerpt = "excerpt one";
    EvalQuestion q2 = make_q("q2", TaskType::T5, "second?");
    q2.expected_label = "yes";
    q2.policy_excerpt = "excerpt two";
    return {q1, q2};
}

} // namespace

TEST_CASE("run_eval sweeps run then condition then question") {
    auto questions = sweep_questions();
    std::vector<std::string> order;
    auto pipeline = [&](const EvalQuestion& q, const std::string& cond, std::size_t run) {
        order.push_back(q.id + "/" + cond + "/" + std::to_string(run));
        if (q.id == "q1") {
            if (cond == "NC") return std::string("alpha");            // 1/3
            return run == 0 ? std::string("alpha beta gamma")         // 1.0
                            : std::string("alpha");                   // 1/3
        }
        return cond == "NC" ? std::string("No") : std::string("Yes"); // 0.0 / 1.0
    };

    EvalReport report = run_eval(questions, {"NC", "KG"}, 2, pipeline);
    CHECK(order == std::vector<std::string>{"q1/NC/0", "q2/NC/0", "q1/KG/0", "q2/KG/0",
                                            "q1/NC/1", "q2/NC/1", "q1/KG/1", "q2/KG/1"});
    REQUIRE(report.records.size() == 8);
    CHECK(report.records[0].question_id == "q1");
    CHECK(report.records[0].condition == "NC");
    CHECK(report.records[0].run_index == 0);
    CHECK(report.records[0].heuristic == doctest::Approx(1.0 / 3.0));
    CHECK(report.records[3].heuristic == doctest::Approx(1.0)); // q2/KG/0
    CHECK_FALSE(report.records[0].failure.has_value());
    CHECK_FALSE(report.records[0].judge.has_value()); // no judge wired

    // NC/T1: two runs of 1/3 -> mean 1/3, std 0.
    const AggregateCell& nc_t1 = report.table.at("NC").at("T1");
    CHECK(nc_t1.n == 2);
    CHECK(nc_t1.mean == doctest::Approx(1.0 / 3.0));
    CHECK(nc_t1.stddev == doctest::Approx(0.0));
    // KG/T1: 1.0 and 1/3 -> mean 2/3, sample std sqrt(2)/3.
    const AggregateCell& kg_t1 = report.table.at("KG").at("T1");
    CHECK(kg_t1.mean == doctest::Approx(2.0 / 3.0));
    CHECK(kg_t1.stddev == doctest::Approx(std::sqrt(2.0) / 3.0));

    const AggregateCell& kg_overall = report.table.at("KG").at("overall");
    CHECK(kg_overall.n == 4);
    CHECK(kg_overall.mean == doctest::Approx((1.0 + 1.0 / 3.0 + 1.0 + 1.0) / 4.0));
    CHECK(report.table.at("NC").count("T5") == 1);
    CHECK(report.table.at("NC").count("T2") == 0); // untested columns absent
    CHECK(report.judge_table.empty());

    CHECK(report.rendered.find("heuristic score (0-1), mean \xC2\xB1 std") != std::string::npos);
    CHECK(report.rendered.find("overall") != std::string::npos);
    CHECK(report.rendered.find("NC") != std::string::npos);
    CHECK(report.rendered.find("1.00 \xC2\xB1 0.00") != std::string::npos); // KG/T5
    CHECK(report.rendered.find("0.67 \xC2\xB1 0.47") != std::string::npos); // KG/T1
    CHECK(report.rendered.find("judge composite") == std::string::npos);
}

TEST_CASE("run_eval records pipeline failures as zero and keeps going") {
    auto questions = sweep_questions();
    auto pipeline = [&](const EvalQuestion& q, const std::string&, std::size_t) -> std::string {
        if (q.id == "q1") throw std::runtime_error("boom");
        return "Yes";
    };
    EvalReport report = run_eval(questions, {"KG"}, 1, pipeline);
    REQUIRE(report.records.size() == 2);
    CHECK(report.records[0].heuristic == doctest::Approx(0.0));
    REQUIRE(report.records[0].failure.has_value());
    CHECK(*report.records[0].failure == "pipeline: boom");
    CHECK(report.records[1].heuristic == doctest::Approx(1.0));
    CHECK(report.table.at("KG").at("T1").mean == doctest::Approx(0.0));
    CHECK(report.table.at("KG").at("overall").n == 2);
}

TEST_CASE("run_eval with a judge fills the judge table and notes failures") {
    EvalQuestion q1 = make_q("q1", TaskType::T1, "first?");
    q1.expected_answer = "alpha";
    q1.policy_excerpt = "excerpt";
    EvalQuestion q2 = make_q("q2", TaskType::T5, "second?");
    q2.expected_label = "yes";
    q2.policy_excerpt = "excerpt";
    EvalQuestion q3 = make_q("q3", TaskType::T2, "third?");
    q3.expected_items = std::vector<std::string>{"human oversight"};
    // q3 has no policy excerpt: the judge call itself throws.

    ReplayChatProvider provider({
        text_step("accuracy: 4, completeness: 3, relevance: 5"),
        text_step("nonsense"),
        text_step("still nonsense"),
    });
    JudgeOptions options;
    options.provider = &provider;
    options.judge_template = "{{response}}";

    auto pipeline = [](const EvalQuestion& q, const std::string&, std::size_t) -> std::string {
        if (q.id == "q1") return "alpha";
        if (q.id == "q2") return "Yes";
        return "human oversight";
    };
    EvalReport report = run_eval({q1, q2, q3}, {"KG"}, 1, pipeline, options);
    REQUIRE(report.records.size() == 3);

    REQUIRE(report.records[0].judge.has_value());
    CHECK(report.records[0].judge->composite == doctest::Approx(4.0));
    CHECK_FALSE(report.records[0].failure.has_value());

    CHECK_FALSE(report.records[1].judge.has_value());
    REQUIRE(report.records[1].failure.has_value());
    CHECK(*report.records[1].failure == "judge: unparseable output after reprompt");
    CHECK(report.records[1].heuristic == doctest::Approx(1.0)); // heuristic stands

    REQUIRE(report.records[2].failure.has_value());
    CHECK(*report.records[2].failure ==
          "judge: question 'q3' has no policy excerpt for the judge");

    // Only the parsed judgement aggregates.
    REQUIRE(report.judge_table.count("KG") == 1);
    CHECK(report.judge_table.at("KG").at("T1").n == 1);
    CHECK(report.judge_table.at("KG").at("T1").mean == doctest::Approx(4.0));
    CHECK(report.judge_table.at("KG").at("overall").n == 1);
    CHECK(report.judge_table.at("KG").count("T5") == 0);
    CHECK(report.rendered.find("judge composite (1-5), mean \xC2\xB1 std") != std::string::npos);
    CHECK(provider.steps_remaining() == 0);
}

TEST_CASE("run_eval validates arguments") {
    auto questions = sweep_questions();
    auto pipeline = [](const EvalQuestion&, const std::string&, std::size_t) {
        return std::string("x");
    };
    CHECK_THROWS_WITH_AS(run_eval({}, {"NC"}, 1, pipeline), "run_eval: no questions", Error);
    CHECK_THROWS_WITH_AS(run_eval(questions, {}, 1, pipeline), "run_eval: no conditions", Error);
    CHECK_THROWS_WITH_AS(run_eval(questions, {"NC"}, 0, pipeline), "run_eval: runs must be >= 1",
                         Error);
    CHECK_THROWS_WITH_AS(run_eval(questions, {"NC"}, 1, nullptr), "run_eval: no pipeline", Error);
}

TEST_CASE("score record and report serialization") {
    ScoreRecord r;
    r.question_id = "q1";
    r.condition = "KG";
    r.run_index = 2;
    r.heuristic = 0.5;
    r.answer = "text";
    json j = score_record_to_json(r);
    CHECK(j == json{{"question_id", "q1"}, {"condition", "KG"}, {"run_index", 2},
                    {"heuristic", 0.5}, {"answer", "text"}});

    r.judge = JudgeScores{4, 3, 5, 4.0};
    r.failure = "judge: late";
    j = score_record_to_json(r);
    CHECK(j["judge"]["accuracy"] == 4);
    CHECK(j["judge"]["composite"] == doctest::Approx(4.0));
    CHECK(j["failure"] == "judge: late");

    auto questions = sweep_questions();
    auto pipeline = [](const EvalQuestion&, const std::string&, std::size_t) {
        return std::string("alpha beta gamma");
    };
    EvalReport report = run_eval(questions, {"NC"}, 1, pipeline);
    json rj = eval_report_to_json(report);
    CHECK(rj["records"].size() == 2);
    CHECK(rj["table"]["NC"]["T1"]["mean"] == doctest::Approx(1.0));
    CHECK(rj["table"]["NC"]["T1"]["n"] == 1);
    CHECK(rj["rendered"] == report.rendered);
    CHECK_FALSE(rj.contains("judge_table"));
}
